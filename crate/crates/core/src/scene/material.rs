use std::f64::consts::PI;

use super::SurfacePoint;
use crate::math::{cosine_hemisphere_pdf, sample_cosine_hemisphere, Rgb, TangentFrame, Vec3};

#[derive(Clone, Debug, PartialEq)]
pub enum Material {
    Lambertian { albedo: Rgb },
    Mirror { reflectance: Rgb },
    Dielectric { ior: f64, tint: Rgb },
    /// Energy-conserving modified Phong.
    Phong { diffuse: Rgb, specular: Rgb, exponent: f64 },
}

impl Material {
    pub fn is_delta(&self) -> bool {
        matches!(self, Material::Mirror { .. } | Material::Dielectric { .. })
    }
}

/// Which quantity a path carries; only refraction cares.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transport {
    Radiance,
    Importance,
}

#[derive(Clone, Copy, Debug)]
pub struct BsdfEval {
    pub f: Rgb,
    /// |cos| between `wi` and the shading normal.
    pub cos_wi: f64,
    /// Solid-angle pdf of sampling `wi` given the fixed direction.
    pub pdf_fwd: f64,
    /// Solid-angle pdf of sampling the fixed direction given `wi`.
    pub pdf_rev: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct BsdfSample {
    pub wi: Vec3,
    /// `f * |cos| / pdf`.
    pub weight: Rgb,
    pub cos_wi: f64,
    pub pdf_fwd: f64,
    pub pdf_rev: f64,
    pub delta: bool,
}

/// A material bound to a surface point and a fixed direction `wo` (toward
/// the previous path vertex).
#[derive(Clone, Copy, Debug)]
pub struct Bsdf<'a> {
    mat: &'a Material,
    frame: TangentFrame,
    ng: Vec3,
    wo: Vec3,
    entering: bool,
    mode: Transport,
}

impl<'a> Bsdf<'a> {
    /// `None` when `wo` grazes or lies below the shading hemisphere.
    pub fn new(mat: &'a Material, sp: &SurfacePoint, wo: Vec3, mode: Transport) -> Option<Self> {
        let frame = TangentFrame::from_unit(sp.shading_normal);
        let wo_l = frame.to_local(wo);
        if wo_l.z <= 1e-9 || wo.dot(sp.geo_normal) <= 0.0 {
            return None;
        }
        Some(Bsdf { mat, frame, ng: sp.geo_normal, wo: wo_l, entering: sp.front_face, mode })
    }

    pub fn is_delta(&self) -> bool {
        self.mat.is_delta()
    }

    pub fn material(&self) -> &Material {
        self.mat
    }

    pub fn normal(&self) -> Vec3 {
        self.frame.n
    }

    pub fn cos_wo(&self) -> f64 {
        self.wo.z
    }

    fn diffuse_prob(diffuse: Rgb, specular: Rgb) -> f64 {
        let d = diffuse.luminance();
        let s = specular.luminance();
        if d + s <= 0.0 {
            0.0
        } else {
            d / (d + s)
        }
    }

    /// Evaluates the non-delta part for world direction `wi`.
    pub fn eval(&self, wi: Vec3) -> BsdfEval {
        let zero = BsdfEval { f: Rgb::BLACK, cos_wi: 0.0, pdf_fwd: 0.0, pdf_rev: 0.0 };
        let wi_l = self.frame.to_local(wi);
        if wi_l.z <= 0.0 || wi.dot(self.ng) <= 0.0 {
            return zero;
        }
        let cos_i = wi_l.z;
        let cos_o = self.wo.z;
        match *self.mat {
            Material::Lambertian { albedo } => BsdfEval {
                f: albedo / PI,
                cos_wi: cos_i,
                pdf_fwd: cosine_hemisphere_pdf(cos_i),
                pdf_rev: cosine_hemisphere_pdf(cos_o),
            },
            Material::Phong { diffuse, specular, exponent } => {
                let pd = Self::diffuse_prob(diffuse, specular);
                let refl = Vec3::new(-self.wo.x, -self.wo.y, self.wo.z);
                let ca = refl.dot(wi_l).max(0.0);
                let lobe = ca.powf(exponent);
                let f = diffuse / PI + specular * ((exponent + 2.0) / (2.0 * PI) * lobe);
                let spec_pdf = (exponent + 1.0) / (2.0 * PI) * lobe;
                BsdfEval {
                    f,
                    cos_wi: cos_i,
                    pdf_fwd: pd * cos_i / PI + (1.0 - pd) * spec_pdf,
                    pdf_rev: pd * cos_o / PI + (1.0 - pd) * spec_pdf,
                }
            }
            Material::Mirror { .. } | Material::Dielectric { .. } => zero,
        }
    }

    pub fn sample(&self, u: [f64; 3]) -> Option<BsdfSample> {
        match *self.mat {
            Material::Lambertian { albedo } => {
                if albedo.is_black() {
                    return None;
                }
                let l = sample_cosine_hemisphere(u[0], u[1]);
                self.finish_sampled(l)
            }
            Material::Phong { diffuse, specular, exponent } => {
                let pd = Self::diffuse_prob(diffuse, specular);
                if diffuse.is_black() && specular.is_black() {
                    return None;
                }
                let l = if u[2] < pd {
                    sample_cosine_hemisphere(u[0], u[1])
                } else {
                    let refl = Vec3::new(-self.wo.x, -self.wo.y, self.wo.z);
                    let cos_a = u[0].powf(1.0 / (exponent + 1.0));
                    let sin_a = (1.0 - cos_a * cos_a).max(0.0).sqrt();
                    let phi = 2.0 * PI * u[1];
                    let lobe = TangentFrame::from_unit(refl);
                    lobe.to_world(Vec3::new(sin_a * phi.cos(), sin_a * phi.sin(), cos_a))
                };
                self.finish_sampled(l)
            }
            Material::Mirror { reflectance } => {
                let l = Vec3::new(-self.wo.x, -self.wo.y, self.wo.z);
                let wi = self.frame.to_world(l);
                if wi.dot(self.ng) <= 0.0 {
                    return None;
                }
                Some(BsdfSample { wi, weight: reflectance, cos_wi: l.z, pdf_fwd: 1.0, pdf_rev: 1.0, delta: true })
            }
            Material::Dielectric { ior, tint } => {
                // eta = n(wo side) / n(other side)
                let eta = if self.entering { 1.0 / ior } else { ior };
                let cos_o = self.wo.z;
                let sin2_t = eta * eta * (1.0 - cos_o * cos_o).max(0.0);
                let fr = if sin2_t >= 1.0 { 1.0 } else { fresnel_dielectric(cos_o, eta) };
                if u[2] < fr {
                    let l = Vec3::new(-self.wo.x, -self.wo.y, self.wo.z);
                    let wi = self.frame.to_world(l);
                    if wi.dot(self.ng) <= 0.0 {
                        return None;
                    }
                    Some(BsdfSample { wi, weight: Rgb::WHITE, cos_wi: l.z, pdf_fwd: fr, pdf_rev: fr, delta: true })
                } else {
                    let cos_t = (1.0 - sin2_t).sqrt();
                    let l = Vec3::new(-eta * self.wo.x, -eta * self.wo.y, -cos_t);
                    let wi = self.frame.to_world(l).normalized();
                    if wi.dot(self.ng) >= 0.0 {
                        return None;
                    }
                    let scale = match self.mode {
                        Transport::Radiance => eta * eta,
                        Transport::Importance => 1.0,
                    };
                    Some(BsdfSample {
                        wi,
                        weight: tint * scale,
                        cos_wi: cos_t,
                        pdf_fwd: 1.0 - fr,
                        pdf_rev: 1.0 - fr,
                        delta: true,
                    })
                }
            }
        }
    }

    fn finish_sampled(&self, l: Vec3) -> Option<BsdfSample> {
        if l.z <= 0.0 {
            return None;
        }
        let wi = self.frame.to_world(l);
        let e = self.eval(wi);
        if e.pdf_fwd <= 0.0 || e.f.is_black() {
            return None;
        }
        Some(BsdfSample {
            wi,
            weight: e.f * (e.cos_wi / e.pdf_fwd),
            cos_wi: e.cos_wi,
            pdf_fwd: e.pdf_fwd,
            pdf_rev: e.pdf_rev,
            delta: false,
        })
    }
}

/// Unpolarized Fresnel reflectance; `eta = n_i / n_t`, `cos_i > 0`.
pub fn fresnel_dielectric(cos_i: f64, eta: f64) -> f64 {
    let sin2_t = eta * eta * (1.0 - cos_i * cos_i).max(0.0);
    if sin2_t >= 1.0 {
        return 1.0;
    }
    let cos_t = (1.0 - sin2_t).sqrt();
    let rs = (eta * cos_i - cos_t) / (eta * cos_i + cos_t);
    let rp = (cos_i - eta * cos_t) / (cos_i + eta * cos_t);
    0.5 * (rs * rs + rp * rp)
}
