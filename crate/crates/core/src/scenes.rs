//! Procedural test scenes with closed-form or reference solutions.
//!
//! Each builder returns scene text in the file format, so the same scenes
//! can be written to disk and rendered from the command line.

use std::f64::consts::PI;

use crate::error::Result;
use crate::image::Image;
use crate::math::{Point3, Rgb, Vec3};
use crate::scene::{parse_scene, Scene};

/// Albedo of the plane scenes.
pub const PLANE_ALBEDO: f64 = 0.8;
/// Height of the distant spot over the uniform and step planes.
pub const PLANE_LIGHT_HEIGHT: f64 = 100.0;
/// Spot intensity giving about 0.5 radiance at the plane center.
pub const PLANE_INTENSITY: f64 = 0.5 * PI / PLANE_ALBEDO * PLANE_LIGHT_HEIGHT * PLANE_LIGHT_HEIGHT;

fn plane_camera(res: u32) -> String {
    // fov = 2 atan(1/4): the 2x2 plane exactly fills the frame from z = 4.
    let fov = 2.0 * 0.25f64.atan().to_degrees();
    format!("camera pos=(0,0,4) look=(0,0,0) up=(0,1,0) fov={fov:?} res=\"{res}x{res}\"\n")
}

fn plane_geometry() -> String {
    format!(
        "material floor lambertian albedo={PLANE_ALBEDO:?}\n\
         quad corner=(-1,-1,0) e1=(2,0,0) e2=(0,2,0) material=floor\n"
    )
}

/// A diffuse 2x2 plane lit by a narrow, distant spot: irradiance varies by
/// less than 0.03% across the frame.
pub fn uniform_plane(res: u32) -> String {
    format!(
        "# nearly uniform irradiance\n{}{}spotlight pos=(0,0,{PLANE_LIGHT_HEIGHT:?}) dir=(0,0,-1) angle=0.85 intensity={PLANE_INTENSITY:?}\n",
        plane_camera(res),
        plane_geometry()
    )
}

/// Same plane with the spot masked to one half: `y < 0` is lit, `y > 0` dark.
pub fn step_plane(res: u32) -> String {
    format!(
        "# half-bright, half-dark\n{}{}spotlight pos=(0,0,{PLANE_LIGHT_HEIGHT:?}) dir=(0,0,-1) angle=0.85 intensity={PLANE_INTENSITY:?} texture=\"@halfplane\"\n",
        plane_camera(res),
        plane_geometry()
    )
}

/// The plane under a close spot whose intensity follows a polar checker
/// pattern. Photons are emitted uniformly over the cone, so photon counts
/// carry no trace of the pattern while photon power does.
pub fn textured_spot(res: u32) -> String {
    format!(
        "# textured spotlight\n{}{}spotlight pos=(0,0,3) dir=(0,0,-1) angle=26 intensity=25 texture=\"@checker:8\"\n",
        plane_camera(res),
        plane_geometry()
    )
}

/// A glass ball focusing a spot (a point light restricted to the cone
/// around the ball) onto a diffuse floor. Every visible pixel is lit only
/// through the glass.
pub fn caustic(res: u32) -> String {
    format!(
        "# caustic under a glass ball\n\
         camera pos=(0,0,0.4) look=(0,0,0) up=(0,1,0) fov=90 res=\"{res}x{res}\"\n\
         material floor lambertian albedo=0.8\n\
         material glass dielectric ior=1.5\n\
         quad corner=(-2,-2,0) e1=(4,0,0) e2=(0,4,0) material=floor\n\
         sphere center=(0,0,1) radius=0.5 material=glass\n\
         spotlight pos=(0,0,2.5) dir=(0,0,-1) angle=20 intensity=5\n"
    )
}

/// Closed box of six inward-facing walls, each with albedo 0.5 and unit
/// emission. Radiance along any path limited to `d` segments is
/// `2 (1 - 2^-d)`.
pub fn furnace(res: u32) -> String {
    let mut s = format!(
        "camera pos=(0,0,0) look=(1,0,0) up=(0,0,1) fov=60 res=\"{res}x{res}\"\n\
         material wall lambertian albedo=0.5\n"
    );
    // (corner, e1, e2) with e1 x e2 pointing into the unit cube [-1,1]^3.
    let walls = [
        ("(-1,-1,-1)", "(0,2,0)", "(0,0,2)"),
        ("(1,-1,-1)", "(0,0,2)", "(0,2,0)"),
        ("(-1,-1,-1)", "(0,0,2)", "(2,0,0)"),
        ("(-1,1,-1)", "(2,0,0)", "(0,0,2)"),
        ("(-1,-1,-1)", "(2,0,0)", "(0,2,0)"),
        ("(-1,-1,1)", "(0,2,0)", "(2,0,0)"),
    ];
    for (k, (c, e1, e2)) in walls.iter().enumerate() {
        s += &format!("quad corner={c} e1={e1} e2={e2} material=wall emit=w{k}\n");
    }
    for k in 0..walls.len() {
        s += &format!("arealight shape=w{k} radiance=1\n");
    }
    s
}

/// Truncated furnace radiance for paths of at most `max_depth` segments.
pub fn furnace_radiance(max_depth: u32) -> f64 {
    2.0 * (1.0 - 0.5f64.powi(max_depth as i32))
}

/// A Cornell-style box with a ceiling light, a mirror ball and a glass ball.
pub fn cornell(res: u32) -> String {
    format!(
        "# box with a ceiling light\n\
         camera pos=(0,-3.9,1) look=(0,0,1) up=(0,0,1) fov=40 res=\"{res}x{res}\"\n\
         material white lambertian albedo=0.75\n\
         material red lambertian albedo=(0.7,0.1,0.1)\n\
         material green lambertian albedo=(0.1,0.6,0.15)\n\
         material chrome mirror refl=0.95\n\
         material glass dielectric ior=1.5\n\
         material lamp lambertian albedo=0\n\
         quad corner=(-1,-1,0) e1=(2,0,0) e2=(0,2,0) material=white\n\
         quad corner=(-1,-1,2) e1=(0,2,0) e2=(2,0,0) material=white\n\
         quad corner=(-1,1,0) e1=(2,0,0) e2=(0,0,2) material=white\n\
         quad corner=(-1,-1,0) e1=(0,2,0) e2=(0,0,2) material=red\n\
         quad corner=(1,-1,0) e1=(0,0,2) e2=(0,2,0) material=green\n\
         quad corner=(-0.25,-0.25,1.999) e1=(0,0.5,0) e2=(0.5,0,0) material=lamp emit=lamp\n\
         sphere center=(-0.45,0.3,0.4) radius=0.4 material=chrome\n\
         sphere center=(0.45,-0.3,0.35) radius=0.35 material=glass\n\
         arealight shape=lamp radiance=12\n"
    )
}

/// Parses one of the builders' outputs.
pub fn build(text: &str) -> Result<Scene> {
    parse_scene(text)
}

/// Outgoing radiance of a Lambertian plane at `x` lit by a spot at height
/// `h` straight above the origin, with unit mask.
pub fn spot_plane_radiance(albedo: f64, intensity: f64, h: f64, x: Point3) -> f64 {
    let d2 = h * h + x.x * x.x + x.y * x.y;
    albedo / PI * intensity * h / (d2 * d2.sqrt())
}

/// Pixel-averaged image of `f` over the plane `z = 0`, by midpoint
/// quadrature with `n x n` sub-samples per pixel. Rays that miss the plane
/// (or the 2x2 square when `bounded`) contribute zero.
pub fn plane_image(scene: &Scene, n: usize, bounded: bool, f: impl Fn(Point3) -> Rgb) -> Image {
    let cam = &scene.camera;
    let (w, h) = (cam.width as usize, cam.height as usize);
    let mut img = Image::new(w, h);
    for py in 0..h {
        for px in 0..w {
            let mut acc = Rgb::BLACK;
            for sy in 0..n {
                for sx in 0..n {
                    let x = px as f64 + (sx as f64 + 0.5) / n as f64;
                    let y = py as f64 + (sy as f64 + 0.5) / n as f64;
                    let d = cam.ray_dir(x, y);
                    if d.z >= 0.0 {
                        continue;
                    }
                    let t = -cam.pos.z / d.z;
                    let p = cam.pos + d * t;
                    if bounded && (p.x.abs() > 1.0 || p.y.abs() > 1.0) {
                        continue;
                    }
                    acc += f(p);
                }
            }
            img.set(px, py, (acc / (n * n) as f64).to_f32());
        }
    }
    img
}

/// Closed-form image of a plane scene lit by one (possibly textured) spot
/// directly above the origin.
pub fn spot_plane_reference(scene: &Scene, n: usize) -> Image {
    let e = &scene.emitters[0];
    let albedo = match scene.materials[0] {
        crate::scene::Material::Lambertian { albedo } => albedo,
        _ => Rgb::grey(PLANE_ALBEDO),
    };
    let light = match e {
        crate::scene::Emitter::Spot { pos, .. } => *pos,
        _ => Vec3::new(0.0, 0.0, PLANE_LIGHT_HEIGHT),
    };
    plane_image(scene, n, true, |p| {
        let d = p - light;
        let dist2 = d.length_sq();
        let dir = d / dist2.sqrt();
        let cos = -dir.z;
        albedo * e.spot_intensity(dir) * (cos / (PI * dist2))
    })
}

/// Pixels at least `margin` pixels away from the image border.
pub fn interior_pixels(width: usize, height: usize, margin: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for y in margin..height.saturating_sub(margin) {
        for x in margin..width.saturating_sub(margin) {
            out.push(y * width + x);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders_parse() {
        for text in [uniform_plane(8), step_plane(8), textured_spot(8), caustic(8), furnace(4), cornell(8)] {
            build(&text).unwrap();
        }
    }

    #[test]
    fn plane_frame_covers_the_quad() {
        let s = build(&uniform_plane(16)).unwrap();
        let img = plane_image(&s, 1, true, |_| Rgb::WHITE);
        assert!(img.pixels.iter().all(|p| p[0] == 1.0));
        assert!((s.bounding_radius().unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn uniform_plane_is_nearly_flat() {
        let s = build(&uniform_plane(16)).unwrap();
        let img = spot_plane_reference(&s, 2);
        let (lo, hi) = img.pixels.iter().fold((f32::MAX, 0f32), |(a, b), p| (a.min(p[0]), b.max(p[0])));
        assert!(hi / lo < 1.0005, "{lo} {hi}");
        assert!((hi as f64 - 0.5).abs() < 1e-3);
    }
}
