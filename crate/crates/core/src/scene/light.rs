use std::f64::consts::PI;

use super::Primitive;
use crate::error::{Error, Result};
use crate::math::{
    cosine_hemisphere_pdf, sample_cosine_hemisphere, sample_uniform_cone, sample_uniform_sphere,
    uniform_cone_pdf, Point3, Rgb, TangentFrame, Vec3, UNIFORM_SPHERE_PDF,
};

/// Directional intensity mask for a spotlight, looked up equirectangularly
/// inside the cone: `u = phi / 2pi` around the axis, `v = theta / angle`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpotTexture {
    /// The reference string from the scene file.
    pub source: String,
    pub width: usize,
    pub height: usize,
    /// Row-major, row 0 at `v = 0` (the cone axis).
    pub texels: Vec<Rgb>,
}

impl SpotTexture {
    /// Built-in patterns:
    /// `@checker:N` (NxN, texels alternate 1 and 0.25),
    /// `@checker:N:LOW` (alternate 1 and LOW),
    /// `@halfplane` (1 for `u < 0.5`, 0 otherwise).
    pub fn builtin(source: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown built-in texture '{source}'"));
        let spec = source.strip_prefix('@').ok_or_else(bad)?;
        let parts: Vec<&str> = spec.split(':').collect();
        match parts.as_slice() {
            ["halfplane"] => Ok(SpotTexture {
                source: source.to_string(),
                width: 2,
                height: 1,
                texels: vec![Rgb::WHITE, Rgb::BLACK],
            }),
            ["checker", n, rest @ ..] if rest.len() <= 1 => {
                let n: usize = n.parse().map_err(|_| bad())?;
                let low: f64 = match rest.first() {
                    Some(s) => s.parse().map_err(|_| bad())?,
                    None => 0.25,
                };
                if n == 0 || !(0.0..=1.0).contains(&low) {
                    return Err(bad());
                }
                let texels = (0..n * n)
                    .map(|k| if (k / n + k % n) % 2 == 0 { Rgb::WHITE } else { Rgb::grey(low) })
                    .collect();
                Ok(SpotTexture { source: source.to_string(), width: n, height: n, texels })
            }
            _ => Err(bad()),
        }
    }

    pub fn lookup(&self, u: f64, v: f64) -> Rgb {
        let x = ((u * self.width as f64) as usize).min(self.width - 1);
        let y = ((v * self.height as f64) as usize).min(self.height - 1);
        self.texels[y * self.width + x]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Emitter {
    /// Emits `radiance` from the outward side of primitive `prim`.
    Area { prim: usize, radiance: Rgb, name: String },
    Point { pos: Point3, intensity: Rgb },
    Spot {
        pos: Point3,
        dir: Vec3,
        angle_deg: f64,
        intensity: Rgb,
        texture: Option<SpotTexture>,
        frame: TangentFrame,
    },
}

/// A sampled emission ray, SmallVCM-style: `radiance` already includes the
/// cosine at the emitter.
#[derive(Clone, Copy, Debug)]
pub struct EmissionSample {
    pub pos: Point3,
    pub dir: Vec3,
    pub radiance: Rgb,
    /// Area pdf times direction pdf (direction pdf only for delta lights).
    pub emission_pdf_w: f64,
    /// Area pdf of the position (1 for delta lights).
    pub direct_pdf_a: f64,
    pub cos_light: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Illumination {
    /// Unit direction from the receiver toward the light.
    pub wi: Vec3,
    pub dist: f64,
    pub radiance: Rgb,
    /// Solid-angle pdf at the receiver (squared distance for delta lights).
    pub direct_pdf_w: f64,
    pub emission_pdf_w: f64,
    pub cos_at_light: f64,
    pub light_pos: Point3,
}

impl Emitter {
    pub fn is_delta(&self) -> bool {
        !matches!(self, Emitter::Area { .. })
    }

    pub fn spot_frame(dir: Vec3) -> TangentFrame {
        TangentFrame::from_unit(dir.normalized())
    }

    fn spot_mask(angle_deg: f64, texture: &Option<SpotTexture>, frame: &TangentFrame, d: Vec3) -> Option<f64> {
        let l = frame.to_local(d);
        let angle = angle_deg.to_radians();
        let theta = l.z.clamp(-1.0, 1.0).acos();
        if theta > angle {
            return None;
        }
        Some(match texture {
            None => 1.0,
            Some(t) => {
                let mut phi = l.y.atan2(l.x);
                if phi < 0.0 {
                    phi += 2.0 * PI;
                }
                t.lookup(phi / (2.0 * PI), theta / angle).luminance()
            }
        })
    }

    /// Spot intensity toward world direction `d` (zero outside the cone).
    pub fn spot_intensity(&self, d: Vec3) -> Rgb {
        match self {
            Emitter::Spot { angle_deg, intensity, texture, frame, .. } => {
                match Self::spot_mask(*angle_deg, texture, frame, d) {
                    Some(m) => *intensity * m,
                    None => Rgb::BLACK,
                }
            }
            _ => Rgb::BLACK,
        }
    }

    pub fn emit(&self, prims: &[Primitive], u: [f64; 4]) -> Option<EmissionSample> {
        match self {
            Emitter::Area { prim, radiance, .. } => {
                let shape = &prims[*prim].shape;
                let (pos, n) = shape.sample_point(u[0], u[1]);
                let l = sample_cosine_hemisphere(u[2], u[3]);
                if l.z <= 0.0 {
                    return None;
                }
                let dir = TangentFrame::from_unit(n).to_world(l);
                let pdf_a = 1.0 / shape.area();
                Some(EmissionSample {
                    pos,
                    dir,
                    radiance: *radiance * l.z,
                    emission_pdf_w: pdf_a * cosine_hemisphere_pdf(l.z),
                    direct_pdf_a: pdf_a,
                    cos_light: l.z,
                })
            }
            Emitter::Point { pos, intensity } => Some(EmissionSample {
                pos: *pos,
                dir: sample_uniform_sphere(u[2], u[3]),
                radiance: *intensity,
                emission_pdf_w: UNIFORM_SPHERE_PDF,
                direct_pdf_a: 1.0,
                cos_light: 1.0,
            }),
            Emitter::Spot { pos, angle_deg, intensity, texture, frame, .. } => {
                let cos_max = angle_deg.to_radians().cos();
                let dir = frame.to_world(sample_uniform_cone(u[2], u[3], cos_max));
                let mask = Self::spot_mask(*angle_deg, texture, frame, dir).unwrap_or(0.0);
                if mask <= 0.0 {
                    return None;
                }
                Some(EmissionSample {
                    pos: *pos,
                    dir,
                    radiance: *intensity * mask,
                    emission_pdf_w: uniform_cone_pdf(cos_max),
                    direct_pdf_a: 1.0,
                    cos_light: 1.0,
                })
            }
        }
    }

    /// Samples a light position as seen from `x` for direct lighting.
    pub fn illuminate(&self, prims: &[Primitive], x: Point3, u: [f64; 2]) -> Option<Illumination> {
        match self {
            Emitter::Area { prim, radiance, .. } => {
                let shape = &prims[*prim].shape;
                let (pos, n) = shape.sample_point(u[0], u[1]);
                let d = pos - x;
                let dist2 = d.length_sq();
                if dist2 <= 0.0 {
                    return None;
                }
                let dist = dist2.sqrt();
                let wi = d / dist;
                let cos_l = n.dot(-wi);
                if cos_l <= 0.0 {
                    return None;
                }
                let pdf_a = 1.0 / shape.area();
                Some(Illumination {
                    wi,
                    dist,
                    radiance: *radiance,
                    direct_pdf_w: pdf_a * dist2 / cos_l,
                    emission_pdf_w: pdf_a * cosine_hemisphere_pdf(cos_l),
                    cos_at_light: cos_l,
                    light_pos: pos,
                })
            }
            Emitter::Point { pos, intensity } => {
                let d = *pos - x;
                let dist2 = d.length_sq();
                let dist = dist2.sqrt();
                Some(Illumination {
                    wi: d / dist,
                    dist,
                    radiance: *intensity,
                    direct_pdf_w: dist2,
                    emission_pdf_w: UNIFORM_SPHERE_PDF,
                    cos_at_light: 1.0,
                    light_pos: *pos,
                })
            }
            Emitter::Spot { pos, angle_deg, .. } => {
                let d = *pos - x;
                let dist2 = d.length_sq();
                let dist = dist2.sqrt();
                let wi = d / dist;
                let radiance = self.spot_intensity(-wi);
                if radiance.is_black() {
                    return None;
                }
                Some(Illumination {
                    wi,
                    dist,
                    radiance,
                    direct_pdf_w: dist2,
                    emission_pdf_w: uniform_cone_pdf(angle_deg.to_radians().cos()),
                    cos_at_light: 1.0,
                    light_pos: *pos,
                })
            }
        }
    }

    /// Emitted radiance leaving an area emitter toward `-ray_dir`, with the
    /// area and emission densities for MIS. `front` is whether the ray hit
    /// the emitting side.
    pub fn area_radiance(&self, prims: &[Primitive], front: bool, outward: Vec3, ray_dir: Vec3) -> Option<(Rgb, f64, f64)> {
        match self {
            Emitter::Area { prim, radiance, .. } => {
                let cos = outward.dot(-ray_dir);
                if !front || cos <= 0.0 {
                    return None;
                }
                let pdf_a = 1.0 / prims[*prim].shape.area();
                Some((*radiance, pdf_a, pdf_a * cosine_hemisphere_pdf(cos)))
            }
            _ => None,
        }
    }

    /// Total emitted flux per channel.
    pub fn power(&self, prims: &[Primitive]) -> Rgb {
        match self {
            Emitter::Area { prim, radiance, .. } => *radiance * (PI * prims[*prim].shape.area()),
            Emitter::Point { intensity, .. } => *intensity * (4.0 * PI),
            Emitter::Spot { angle_deg, intensity, texture, .. } => {
                let cos_max = angle_deg.to_radians().cos();
                let solid = 2.0 * PI * (1.0 - cos_max);
                let mean_mask = match texture {
                    None => 1.0,
                    Some(t) => {
                        // Exact for the piecewise-constant equirectangular map:
                        // each texel row covers a band of solid angle.
                        let angle = angle_deg.to_radians();
                        let mut acc = 0.0;
                        for row in 0..t.height {
                            let t0 = angle * row as f64 / t.height as f64;
                            let t1 = angle * (row + 1) as f64 / t.height as f64;
                            let band = (t0.cos() - t1.cos()) / (1.0 - cos_max);
                            let row_mean: f64 = (0..t.width)
                                .map(|c| t.texels[row * t.width + c].luminance())
                                .sum::<f64>()
                                / t.width as f64;
                            acc += band * row_mean;
                        }
                        acc
                    }
                };
                *intensity * (solid * mean_mask)
            }
        }
    }
}
