use crate::error::{Error, Result};
use crate::math::{Point3, Vec3};

/// Pinhole camera. Image-space units are pixels: the virtual image plane
/// sits at distance `image_dist` so that one pixel has unit area.
#[derive(Clone, Debug, PartialEq)]
pub struct Camera {
    pub pos: Point3,
    pub look: Point3,
    pub up: Vec3,
    pub fov_deg: f64,
    pub width: u32,
    pub height: u32,
    forward: Vec3,
    right: Vec3,
    up_cam: Vec3,
    image_dist: f64,
}

impl Camera {
    pub fn new(pos: Point3, look: Point3, up: Vec3, fov_deg: f64, width: u32, height: u32) -> Result<Self> {
        if !(fov_deg > 0.0 && fov_deg < 180.0) {
            return Err(Error::InvalidArgument(format!("fov must lie in (0,180), got {fov_deg}")));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("resolution must be at least 1x1".into()));
        }
        let fwd = look - pos;
        if fwd.length_sq() == 0.0 {
            return Err(Error::InvalidArgument("camera look point equals its position".into()));
        }
        let forward = fwd.normalized();
        let r = forward.cross(up);
        if r.length() < 1e-9 || !r.is_finite() {
            return Err(Error::InvalidArgument("camera up vector is parallel to the view direction".into()));
        }
        let right = r.normalized();
        let up_cam = right.cross(forward);
        let image_dist = height as f64 / (2.0 * (fov_deg.to_radians() * 0.5).tan());
        Ok(Camera { pos, look, up, fov_deg, width, height, forward, right, up_cam, image_dist })
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn forward(&self) -> Vec3 {
        self.forward
    }

    pub fn image_dist(&self) -> f64 {
        self.image_dist
    }

    /// Primary ray direction through raster position `(x, y)`, y down.
    pub fn ray_dir(&self, x: f64, y: f64) -> Vec3 {
        let dx = x - 0.5 * self.width as f64;
        let dy = 0.5 * self.height as f64 - y;
        (self.forward * self.image_dist + self.right * dx + self.up_cam * dy).normalized()
    }

    /// Raster position of a world point, if it projects inside the image.
    pub fn raster(&self, p: Point3) -> Option<(f64, f64)> {
        let d = p - self.pos;
        let z = d.dot(self.forward);
        if z <= 0.0 {
            return None;
        }
        let x = 0.5 * self.width as f64 + self.image_dist * d.dot(self.right) / z;
        let y = 0.5 * self.height as f64 - self.image_dist * d.dot(self.up_cam) / z;
        if x >= 0.0 && y >= 0.0 && x < self.width as f64 && y < self.height as f64 {
            Some((x, y))
        } else {
            None
        }
    }

    /// Solid-angle density of primary rays for direction `dir` when a pixel
    /// position is chosen uniformly per unit image area.
    pub fn pdf_w(&self, dir: Vec3) -> f64 {
        let c = dir.dot(self.forward);
        if c <= 0.0 {
            return 0.0;
        }
        let d = self.image_dist / c;
        d * d / c
    }
}
