//! Eye and light sub-path generation.

use crate::math::{Point3, Rgb, RngStream, Vec3};
use crate::mis::{self, MisContext, MisPartials};
use crate::photon_map::LightVertex;
use crate::scene::{Bsdf, Emitter, Scene, SurfacePoint, Transport};

/// Depth (segments) from which Russian roulette applies.
pub const RR_START_DEPTH: u32 = 5;

/// Chooses an emitter with probability proportional to its power.
#[derive(Clone, Debug)]
pub struct LightSampler {
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl LightSampler {
    pub fn new(scene: &Scene) -> Self {
        let mut w: Vec<f64> = scene.emitters.iter().map(|e| e.power(&scene.primitives).luminance().max(0.0)).collect();
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            w.iter_mut().for_each(|x| *x = 1.0);
        }
        let total: f64 = w.iter().sum();
        let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        LightSampler { probs, cdf }
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn pick(&self, u: f64) -> Option<(usize, f64)> {
        if self.probs.is_empty() {
            return None;
        }
        let i = self.cdf.partition_point(|&c| c <= u).min(self.probs.len() - 1);
        Some((i, self.probs[i]))
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }
}

/// A surface vertex of an eye sub-path.
#[derive(Clone, Copy, Debug)]
pub struct PathVertex {
    pub sp: SurfacePoint,
    /// Unit direction toward the previous vertex.
    pub wo: Vec3,
    /// Throughput of the sub-path arriving here.
    pub throughput: Rgb,
    /// Segments from the camera.
    pub depth: u32,
    /// Area density of this vertex given the previous one.
    pub pdf_fwd_a: f64,
    /// Area density of the previous vertex sampled from this one; zero
    /// until the path continues from here.
    pub pdf_rev_a: f64,
    /// Solid-angle density of the direction that reached this vertex.
    pub pdf_dir_w: f64,
    pub is_delta: bool,
    /// Whether the previous scattering event was specular (or the camera).
    pub prev_delta: bool,
    pub mis: MisPartials,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EyeMode {
    /// Continue through every surface up to the depth limit.
    Full,
    /// Stop at the first non-specular surface (photon-mapping gather point).
    FirstDiffuse,
}

fn russian_roulette(depth: u32, weight: Rgb, rng: &mut RngStream) -> Option<f64> {
    if depth < RR_START_DEPTH {
        return Some(1.0);
    }
    let q = weight.max_component().min(1.0);
    if q <= 0.0 || rng.uniform() >= q {
        None
    } else {
        Some(q)
    }
}

/// Raster position and primary direction for a jittered sample in `pixel`.
pub fn camera_ray(scene: &Scene, pixel: usize, rng: &mut RngStream) -> (f64, f64, Vec3) {
    let w = scene.camera.width as usize;
    let (jx, jy) = rng.uniform2();
    let x = (pixel % w) as f64 + jx;
    let y = (pixel / w) as f64 + jy;
    (x, y, scene.camera.ray_dir(x, y))
}

/// Traces one eye sub-path through `pixel`. Partials use `ctx` and
/// `light_paths` (the merging and light-tracing multiplicity).
pub fn trace_eye_subpath(
    scene: &Scene,
    ctx: &MisContext,
    light_paths: usize,
    pixel: usize,
    max_depth: u32,
    mode: EyeMode,
    rng: &mut RngStream,
) -> Vec<PathVertex> {
    let mut out = Vec::new();
    let (_, _, mut dir) = camera_ray(scene, pixel, rng);
    let cam_pdf_w = scene.camera.pdf_w(dir);
    let origin = scene.camera.pos;
    let mut spawn_from: Option<SurfacePoint> = None;
    let mut beta = Rgb::WHITE;
    let mut partials = mis::camera_init(ctx, light_paths, cam_pdf_w);
    let mut pdf_w = cam_pdf_w;
    let mut prev_delta = true;
    for depth in 1..=max_depth {
        let o = match &spawn_from {
            Some(sp) => scene.spawn(sp, dir),
            None => origin,
        };
        let Some(hit) = scene.intersect(o, dir, 0.0, f64::INFINITY) else { break };
        let sp = hit.sp;
        let wo = -dir;
        let mat = scene.material(sp.material);
        let bsdf = Bsdf::new(mat, &sp, wo, Transport::Radiance);
        let cos_in = match &bsdf {
            Some(b) => b.cos_wo(),
            None => sp.geo_normal.dot(wo).abs(),
        };
        let dist2 = hit.dist * hit.dist;
        partials = mis::on_hit(ctx, partials, dist2, cos_in);
        let is_delta = mat.is_delta();
        out.push(PathVertex {
            sp,
            wo,
            throughput: beta,
            depth,
            pdf_fwd_a: pdf_w * cos_in / dist2,
            pdf_rev_a: 0.0,
            pdf_dir_w: pdf_w,
            is_delta,
            prev_delta,
            mis: partials,
        });
        if mode == EyeMode::FirstDiffuse && !is_delta {
            break;
        }
        if depth == max_depth {
            break;
        }
        let Some(b) = bsdf else { break };
        let Some(s) = b.sample([rng.uniform(), rng.uniform(), rng.uniform()]) else { break };
        let Some(q) = russian_roulette(depth, s.weight, rng) else { break };
        // Reverse density of the previous vertex in area measure; the
        // pinhole camera cannot be hit, so it stays zero at depth 1.
        let n = out.len();
        if n >= 2 {
            let prev = out[n - 2].sp;
            let cos_prev = prev.shading_normal.dot(wo).abs();
            out[n - 1].pdf_rev_a = s.pdf_rev * cos_prev / dist2;
        }
        partials = mis::on_scatter(ctx, partials, s.cos_wi, s.pdf_fwd, s.pdf_rev, s.delta);
        beta = beta * s.weight / q;
        if beta.is_black() {
            break;
        }
        pdf_w = s.pdf_fwd;
        prev_delta = s.delta;
        spawn_from = Some(sp);
        dir = s.wi;
    }
    out
}

/// Traces light sub-path `j` and returns its stored (non-specular) vertices.
/// Vertices are kept up to depth `max_depth - 1`. With `alt`, partials are
/// also tracked under that second context.
pub fn trace_light_subpath(
    scene: &Scene,
    sampler: &LightSampler,
    ctx: &MisContext,
    alt: Option<&MisContext>,
    j: u32,
    max_depth: u32,
    rng: &mut RngStream,
) -> Vec<LightVertex> {
    let mut out = Vec::new();
    let Some((li, pick)) = sampler.pick(rng.uniform()) else { return out };
    let emitter = &scene.emitters[li];
    let u = [rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()];
    let Some(es) = emitter.emit(&scene.primitives, u) else { return out };
    let direct_pdf_a = es.direct_pdf_a * pick;
    let emission_pdf_w = es.emission_pdf_w * pick;
    let mut partials = mis::light_init(ctx, direct_pdf_a, emission_pdf_w, es.cos_light, emitter.is_delta());
    let alt_ctx = alt.copied().unwrap_or(*ctx);
    let mut partials_alt = mis::light_init(&alt_ctx, direct_pdf_a, emission_pdf_w, es.cos_light, emitter.is_delta());
    let mut beta = es.radiance / emission_pdf_w;
    let mut dir = es.dir;
    let mut o = match emitter {
        Emitter::Area { .. } => {
            // Offset off the emitting surface along the ray.
            es.pos + dir * (scene.ray_eps() * (1.0 + es.pos.x.abs().max(es.pos.y.abs()).max(es.pos.z.abs())))
        }
        _ => es.pos,
    };
    let limit = max_depth.saturating_sub(1);
    for depth in 1..=limit {
        let Some(hit) = scene.intersect(o, dir, 0.0, f64::INFINITY) else { break };
        let sp = hit.sp;
        let wo = -dir;
        let mat = scene.material(sp.material);
        let Some(bsdf) = Bsdf::new(mat, &sp, wo, Transport::Importance) else { break };
        partials = mis::on_hit(ctx, partials, hit.dist * hit.dist, bsdf.cos_wo());
        partials_alt = mis::on_hit(&alt_ctx, partials_alt, hit.dist * hit.dist, bsdf.cos_wo());
        if !bsdf.is_delta() {
            out.push(LightVertex {
                hit: sp,
                incident: wo,
                throughput: beta,
                depth,
                path: j,
                mis: partials,
                mis_alt: partials_alt,
            });
        }
        if depth == limit {
            break;
        }
        let Some(s) = bsdf.sample([rng.uniform(), rng.uniform(), rng.uniform()]) else { break };
        let Some(q) = russian_roulette(depth, s.weight, rng) else { break };
        partials = mis::on_scatter(ctx, partials, s.cos_wi, s.pdf_fwd, s.pdf_rev, s.delta);
        partials_alt = mis::on_scatter(&alt_ctx, partials_alt, s.cos_wi, s.pdf_fwd, s.pdf_rev, s.delta);
        beta = beta * s.weight / q;
        if beta.is_black() {
            break;
        }
        o = scene.spawn(&sp, s.wi);
        dir = s.wi;
    }
    out
}

/// Position and unit direction from `a` toward `b`, with distance.
pub fn direction(a: Point3, b: Point3) -> (Vec3, f64) {
    let d = b - a;
    let len = d.length();
    (d / len, len)
}
