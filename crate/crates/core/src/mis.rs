//! Multiple importance sampling across vertex connection (VC) and vertex
//! merging (VM) strategies.
//!
//! Weights are evaluated recursively, following Georgiev et al.'s
//! SmallVCM formulation: every sub-path vertex carries three partial sums
//! (`d_vcm`, `d_vc`, `d_vm`) from which the weight of any strategy ending
//! at that vertex follows in O(1).
//!
//! [`PathSpec`] describes a complete path by its local sampling densities.
//! [`enumerate_weight`] evaluates the weight by listing every strategy's
//! density explicitly; [`recursive_weight`] runs the same path through the
//! partial-sum recursion. The two must agree.
//!
//! Conventions, for a path `z_0 .. z_{n-1}` with `z_0` on a light and
//! `z_{n-1}` the camera:
//! - `VC(s)` uses `s` light vertices and `n - s` camera vertices.
//!   `VC(0)` is an eye path hitting an area light, `VC(1)` is next-event
//!   estimation, `VC(n-1)` is light tracing (requires `s >= 2`).
//! - `VM(s)` merges at `z_s`, `1 <= s <= n - 2`, with density
//!   `VC(s+1) * pi r^2 * P_rev(z_s)`.
//! - Light tracing and merging have multiplicity `J` (light paths per
//!   iteration); other connections have multiplicity 1.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::RngStream;

/// Recursive partial sums stored with each sub-path vertex.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MisPartials {
    pub d_vcm: f64,
    pub d_vc: f64,
    pub d_vm: f64,
}

/// Strategy counts and the power-heuristic exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MisContext {
    /// Connections per eye path (always 1 here).
    pub n_vc: f64,
    /// Merging multiplicity: light sub-paths per iteration.
    pub n_vm: f64,
    /// 1 is the balance heuristic.
    pub beta: f64,
    pub radius: f64,
    pub use_vc: bool,
    pub use_vm: bool,
}

impl MisContext {
    pub fn vcm(light_paths: usize, radius: f64) -> Self {
        MisContext { n_vc: 1.0, n_vm: light_paths as f64, beta: 1.0, radius, use_vc: true, use_vm: true }
    }

    /// Connections only (bidirectional path tracing).
    pub fn bdpt(light_paths: usize) -> Self {
        MisContext { n_vc: 1.0, n_vm: light_paths as f64, beta: 1.0, radius: 0.0, use_vc: true, use_vm: false }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    /// `eta_vm = n_vm * pi * r^2`.
    pub fn eta_vm(&self) -> f64 {
        self.n_vm * PI * self.radius * self.radius
    }

    #[inline]
    pub fn mis(&self, x: f64) -> f64 {
        if self.beta == 1.0 {
            x
        } else {
            x.powf(self.beta)
        }
    }

    /// Factor applied to merging terms relative to connections.
    pub fn vm_weight(&self) -> f64 {
        if self.use_vm {
            self.mis(self.eta_vm())
        } else {
            0.0
        }
    }

    pub fn vc_weight(&self) -> f64 {
        if self.use_vc && self.eta_vm() > 0.0 {
            self.mis(1.0 / self.eta_vm())
        } else {
            0.0
        }
    }
}

/// Partials at a light source. `direct_pdf_a` and `emission_pdf_w` include
/// the light-pick probability.
pub fn light_init(ctx: &MisContext, direct_pdf_a: f64, emission_pdf_w: f64, cos_light: f64, delta: bool) -> MisPartials {
    let d_vcm = ctx.mis(direct_pdf_a / emission_pdf_w);
    let d_vc = if delta { 0.0 } else { ctx.mis(cos_light / emission_pdf_w) };
    MisPartials { d_vcm, d_vc, d_vm: d_vc * ctx.vc_weight() }
}

/// Partials for a primary camera ray with solid-angle density `camera_pdf_w`.
pub fn camera_init(ctx: &MisContext, light_paths: usize, camera_pdf_w: f64) -> MisPartials {
    MisPartials { d_vcm: ctx.mis(light_paths as f64 / camera_pdf_w), d_vc: 0.0, d_vm: 0.0 }
}

/// Update on reaching a surface at squared distance `dist2` with cosine
/// `cos` between the incoming segment and the surface normal.
pub fn on_hit(ctx: &MisContext, p: MisPartials, dist2: f64, cos: f64) -> MisPartials {
    let c = ctx.mis(cos.abs());
    MisPartials { d_vcm: p.d_vcm * ctx.mis(dist2) / c, d_vc: p.d_vc / c, d_vm: p.d_vm / c }
}

/// Update on scattering. `pdf_dir` samples the outgoing direction, `pdf_rev`
/// is the density of the reverse direction, `cos_out` the outgoing cosine.
pub fn on_scatter(ctx: &MisContext, p: MisPartials, cos_out: f64, pdf_dir: f64, pdf_rev: f64, delta: bool) -> MisPartials {
    let c = ctx.mis(cos_out.abs());
    if delta {
        return MisPartials { d_vcm: 0.0, d_vc: p.d_vc * c, d_vm: p.d_vm * c };
    }
    let f = ctx.mis(cos_out.abs() / pdf_dir);
    MisPartials {
        d_vc: f * (p.d_vc * ctx.mis(pdf_rev) + p.d_vcm + ctx.vm_weight()),
        d_vm: f * (p.d_vm * ctx.mis(pdf_rev) + p.d_vcm * ctx.vc_weight() + 1.0),
        d_vcm: ctx.mis(1.0 / pdf_dir),
    }
}

/// Weight of an eye path that hits an area light. `direct_pdf_a` and
/// `emission_pdf_w` include the light-pick probability. Camera partials are
/// taken after [`on_hit`] at the light.
pub fn emission_weight(ctx: &MisContext, cam: MisPartials, direct_pdf_a: f64, emission_pdf_w: f64, path_len: u32) -> f64 {
    if path_len == 1 {
        return 1.0;
    }
    let w_camera = ctx.mis(direct_pdf_a) * cam.d_vcm + ctx.mis(emission_pdf_w) * cam.d_vc;
    1.0 / (1.0 + w_camera)
}

/// Next-event estimation at a camera vertex.
#[derive(Clone, Copy, Debug)]
pub struct NeeTerms {
    /// Camera BSDF density toward the light.
    pub bsdf_dir_pdf_w: f64,
    /// Camera BSDF density of the reverse direction.
    pub bsdf_rev_pdf_w: f64,
    pub pick_prob: f64,
    /// Solid-angle density of the light sample at the receiver, without pick.
    pub direct_pdf_w: f64,
    /// Emission density at the light, without pick.
    pub emission_pdf_w: f64,
    pub cos_to_light: f64,
    pub cos_at_light: f64,
    pub delta_light: bool,
}

pub fn nee_weight(ctx: &MisContext, cam: MisPartials, t: &NeeTerms) -> f64 {
    let w_light = if t.delta_light { 0.0 } else { ctx.mis(t.bsdf_dir_pdf_w / (t.pick_prob * t.direct_pdf_w)) };
    let w_camera = ctx.mis(t.emission_pdf_w * t.cos_to_light / (t.direct_pdf_w * t.cos_at_light))
        * (ctx.vm_weight() + cam.d_vcm + cam.d_vc * ctx.mis(t.bsdf_rev_pdf_w));
    1.0 / (w_light + 1.0 + w_camera)
}

/// Connection between a light vertex and a camera vertex.
#[derive(Clone, Copy, Debug)]
pub struct ConnectTerms {
    /// Camera BSDF density toward the light vertex, converted to area at it.
    pub camera_dir_pdf_a: f64,
    pub camera_rev_pdf_w: f64,
    /// Light BSDF density toward the camera vertex, converted to area at it.
    pub light_dir_pdf_a: f64,
    pub light_rev_pdf_w: f64,
}

pub fn connect_weight(ctx: &MisContext, light: MisPartials, cam: MisPartials, t: &ConnectTerms) -> f64 {
    let w_light = ctx.mis(t.camera_dir_pdf_a)
        * (ctx.vm_weight() + light.d_vcm + light.d_vc * ctx.mis(t.light_rev_pdf_w));
    let w_camera = ctx.mis(t.light_dir_pdf_a)
        * (ctx.vm_weight() + cam.d_vcm + cam.d_vc * ctx.mis(t.camera_rev_pdf_w));
    1.0 / (w_light + 1.0 + w_camera)
}

/// Light vertex connected to the camera. `camera_pdf_a` is the camera's
/// solid-angle density converted to area at the vertex.
pub fn light_trace_weight(ctx: &MisContext, light: MisPartials, light_paths: usize, camera_pdf_a: f64, bsdf_rev_pdf_w: f64) -> f64 {
    let w_light = ctx.mis(camera_pdf_a / light_paths as f64)
        * (ctx.vm_weight() + light.d_vcm + light.d_vc * ctx.mis(bsdf_rev_pdf_w));
    1.0 / (w_light + 1.0)
}

/// Merge of a light vertex into a camera vertex. `camera_dir_pdf_w` is the
/// camera BSDF density toward the photon's origin, `camera_rev_pdf_w` the
/// reverse. `ctx` carries the merge radius.
pub fn merge_weight(ctx: &MisContext, light: MisPartials, cam: MisPartials, camera_dir_pdf_w: f64, camera_rev_pdf_w: f64) -> f64 {
    let vc = ctx.vc_weight();
    let w_light = light.d_vcm * vc + light.d_vm * ctx.mis(camera_dir_pdf_w);
    let w_camera = cam.d_vcm * vc + cam.d_vm * ctx.mis(camera_rev_pdf_w);
    1.0 / (1.0 + w_light + w_camera)
}

/// Light partials re-evaluated at the radius of `target`.
///
/// `d_vcm` does not depend on the radius, `d_vc` is affine in the merging
/// factor and `d_vm` in its reciprocal, so one sub-path traced under two
/// radii gives exact partials for any other radius.
pub fn partials_at_radius(
    target: &MisContext,
    (ctx_a, a): (&MisContext, MisPartials),
    (ctx_b, b): (&MisContext, MisPartials),
) -> MisPartials {
    let (va, vb, v) = (ctx_a.vm_weight(), ctx_b.vm_weight(), target.vm_weight());
    if va == vb || v == va {
        return a;
    }
    let s = (v - va) / (vb - va);
    let (ia, ib, iv) = (1.0 / va, 1.0 / vb, 1.0 / v);
    let sm = (iv - ia) / (ib - ia);
    MisPartials { d_vcm: a.d_vcm, d_vc: a.d_vc + s * (b.d_vc - a.d_vc), d_vm: a.d_vm + sm * (b.d_vm - a.d_vm) }
}

/// Balance/power heuristic over explicit strategy densities.
pub fn heuristic_weight(densities: &[f64], index: usize, beta: f64) -> Result<f64> {
    let sum: f64 = densities.iter().map(|d| d.powf(beta)).sum();
    if !(sum > 0.0) {
        return Err(Error::InvalidArgument("all strategy densities are zero".into()));
    }
    Ok(densities[index].powf(beta) / sum)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Vc(usize),
    Vm(usize),
}

/// An interior path vertex described by its local sampling quantities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpecVertex {
    /// Cosine toward the previous (light-side) vertex.
    pub cos_prev: f64,
    /// Cosine toward the next (camera-side) vertex.
    pub cos_next: f64,
    /// Density of sampling the camera-side direction given the light side.
    pub pdf_fwd_w: f64,
    /// Density of sampling the light-side direction given the camera side.
    pub pdf_rev_w: f64,
    /// Specular vertex; both densities are then the same discrete probability.
    pub delta: bool,
}

/// A full path `z_0 .. z_{n-1}` by its local densities.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSpec {
    pub delta_light: bool,
    pub pick: f64,
    /// Area density on the emitter (1 for point lights).
    pub light_pdf_a: f64,
    /// Directional emission density at `z_0`.
    pub emission_dir_pdf_w: f64,
    pub cos_light: f64,
    /// Camera density toward `z_{n-2}`.
    pub camera_pdf_w: f64,
    /// `z_1 .. z_{n-2}`.
    pub interior: Vec<SpecVertex>,
    /// Segment lengths, `dist[i]` between `z_i` and `z_{i+1}`.
    pub dist: Vec<f64>,
    pub light_paths: usize,
}

impl PathSpec {
    pub fn vertex_count(&self) -> usize {
        self.interior.len() + 2
    }

    fn v(&self, i: usize) -> &SpecVertex {
        &self.interior[i - 1]
    }

    fn cos_next(&self, i: usize) -> f64 {
        if i == 0 {
            self.cos_light
        } else {
            self.v(i).cos_next
        }
    }

    fn is_delta(&self, i: usize) -> bool {
        i > 0 && i < self.vertex_count() - 1 && self.v(i).delta
    }

    /// Area density of `z_i` sampled from the light side.
    fn p_fwd(&self, i: usize) -> f64 {
        if i == 0 {
            return self.pick * self.light_pdf_a;
        }
        let pw = if i == 1 { self.emission_dir_pdf_w } else { self.v(i - 1).pdf_fwd_w };
        let d = self.dist[i - 1];
        // The camera is never hit from the light side (pinhole).
        if i == self.vertex_count() - 1 {
            return 0.0;
        }
        pw * self.v(i).cos_prev / (d * d)
    }

    /// Area density of `z_i` sampled from the camera side.
    fn p_rev(&self, i: usize) -> f64 {
        let n = self.vertex_count();
        if i == n - 1 {
            return 1.0;
        }
        if i == 0 && self.delta_light {
            return 0.0;
        }
        let pw = if i == n - 2 { self.camera_pdf_w } else { self.v(i + 1).pdf_rev_w };
        let d = self.dist[i];
        pw * self.cos_next(i) / (d * d)
    }

    fn vc_density(&self, s: usize) -> f64 {
        let n = self.vertex_count();
        (0..s).map(|i| self.p_fwd(i)).product::<f64>() * (s..n).map(|i| self.p_rev(i)).product::<f64>()
    }

    /// Every strategy with its multiplicity-scaled density; infeasible
    /// strategies have density 0.
    pub fn strategies(&self, ctx: &MisContext) -> Vec<(Strategy, f64)> {
        let n = self.vertex_count();
        let j = self.light_paths as f64;
        let mut out = Vec::new();
        for s in 0..n {
            let feasible = match s {
                0 => !self.delta_light,
                _ if s == n - 1 => s >= 2 && !self.is_delta(s - 1),
                _ => !self.is_delta(s - 1) && !self.is_delta(s),
            };
            let mult = if s == n - 1 { j } else { ctx.n_vc };
            let d = if feasible && ctx.use_vc { mult * self.vc_density(s) } else { 0.0 };
            out.push((Strategy::Vc(s), d));
        }
        for s in 1..n.saturating_sub(1) {
            let d = if ctx.use_vm && !self.is_delta(s) {
                ctx.eta_vm() * self.vc_density(s + 1) * self.p_rev(s)
            } else {
                0.0
            };
            out.push((Strategy::Vm(s), d));
        }
        out
    }

    /// A random path with `n` vertices for property checks.
    pub fn random(rng: &mut RngStream, n: usize, delta_light: bool, light_paths: usize) -> Self {
        let mut pos = |lo: f64, hi: f64| lo + (hi - lo) * rng.uniform();
        let interior: Vec<(f64, f64, f64, f64, bool)> =
            (0..n - 2).map(|_| (pos(0.05, 1.0), pos(0.05, 1.0), pos(0.05, 2.0), pos(0.05, 2.0), pos(0.0, 1.0) < 0.25)).collect();
        let interior = interior
            .into_iter()
            .map(|(a, b, f, r, delta)| SpecVertex {
                cos_prev: a,
                cos_next: b,
                pdf_fwd_w: f,
                pdf_rev_w: if delta { f.min(1.0) } else { r },
                delta,
            })
            .map(|mut v| {
                if v.delta {
                    v.pdf_fwd_w = v.pdf_rev_w;
                }
                v
            })
            .collect();
        PathSpec {
            delta_light,
            pick: pos(0.2, 1.0),
            light_pdf_a: if delta_light { 1.0 } else { pos(0.1, 3.0) },
            emission_dir_pdf_w: pos(0.05, 1.0),
            cos_light: if delta_light { 1.0 } else { pos(0.05, 1.0) },
            camera_pdf_w: pos(0.5, 5.0),
            interior,
            dist: (0..n - 1).map(|_| pos(0.2, 3.0)).collect(),
            light_paths,
        }
    }
}

/// Weight of `strategy` by listing every strategy's density.
pub fn enumerate_weight(ctx: &MisContext, spec: &PathSpec, strategy: Strategy) -> Result<f64> {
    let all = spec.strategies(ctx);
    let idx = all
        .iter()
        .position(|(s, _)| *s == strategy)
        .ok_or_else(|| Error::InvalidArgument(format!("{strategy:?} does not exist for this path")))?;
    let d: Vec<f64> = all.iter().map(|(_, d)| *d).collect();
    heuristic_weight(&d, idx, ctx.beta)
}

/// Light partials after arriving at `z_upto` (`upto >= 1`).
fn light_partials(ctx: &MisContext, spec: &PathSpec, upto: usize) -> MisPartials {
    let direct_pdf_a = spec.pick * spec.light_pdf_a;
    let emission_pdf_w = direct_pdf_a * spec.emission_dir_pdf_w;
    let mut p = light_init(ctx, direct_pdf_a, emission_pdf_w, spec.cos_light, spec.delta_light);
    for i in 1..=upto {
        let d = spec.dist[i - 1];
        p = on_hit(ctx, p, d * d, spec.v(i).cos_prev);
        if i < upto {
            let v = spec.v(i);
            p = on_scatter(ctx, p, v.cos_next, v.pdf_fwd_w, v.pdf_rev_w, v.delta);
        }
    }
    p
}

/// Camera partials after arriving at `z_downto`.
fn camera_partials(ctx: &MisContext, spec: &PathSpec, downto: usize) -> MisPartials {
    let n = spec.vertex_count();
    let mut p = camera_init(ctx, spec.light_paths, spec.camera_pdf_w);
    let mut i = n - 2;
    loop {
        let d = spec.dist[i];
        p = on_hit(ctx, p, d * d, spec.cos_next(i));
        if i == downto {
            return p;
        }
        let v = spec.v(i);
        p = on_scatter(ctx, p, v.cos_prev, v.pdf_rev_w, v.pdf_fwd_w, v.delta);
        i -= 1;
    }
}

/// Weight of `strategy` through the partial-sum recursion.
pub fn recursive_weight(ctx: &MisContext, spec: &PathSpec, strategy: Strategy) -> f64 {
    let n = spec.vertex_count();
    let d2 = |i: usize| spec.dist[i] * spec.dist[i];
    match strategy {
        Strategy::Vc(0) => {
            let cam = camera_partials(ctx, spec, 0);
            let direct_pdf_a = spec.pick * spec.light_pdf_a;
            emission_weight(ctx, cam, direct_pdf_a, direct_pdf_a * spec.emission_dir_pdf_w, (n - 1) as u32)
        }
        Strategy::Vc(1) => {
            let cam = camera_partials(ctx, spec, 1);
            let v = spec.v(1);
            let direct_pdf_w = if spec.delta_light { d2(0) } else { spec.light_pdf_a * d2(0) / spec.cos_light };
            nee_weight(
                ctx,
                cam,
                &NeeTerms {
                    bsdf_dir_pdf_w: v.pdf_rev_w,
                    bsdf_rev_pdf_w: v.pdf_fwd_w,
                    pick_prob: spec.pick,
                    direct_pdf_w,
                    emission_pdf_w: spec.light_pdf_a * spec.emission_dir_pdf_w,
                    cos_to_light: v.cos_prev,
                    cos_at_light: spec.cos_light,
                    delta_light: spec.delta_light,
                },
            )
        }
        Strategy::Vc(s) if s == n - 1 => {
            let light = light_partials(ctx, spec, n - 2);
            let camera_pdf_a = spec.camera_pdf_w * spec.v(n - 2).cos_next / d2(n - 2);
            light_trace_weight(ctx, light, spec.light_paths, camera_pdf_a, spec.v(n - 2).pdf_rev_w)
        }
        Strategy::Vc(s) => {
            let light = light_partials(ctx, spec, s - 1);
            let cam = camera_partials(ctx, spec, s);
            let (lv, cv) = (spec.v(s - 1), spec.v(s));
            connect_weight(
                ctx,
                light,
                cam,
                &ConnectTerms {
                    camera_dir_pdf_a: cv.pdf_rev_w * lv.cos_next / d2(s - 1),
                    camera_rev_pdf_w: cv.pdf_fwd_w,
                    light_dir_pdf_a: lv.pdf_fwd_w * cv.cos_prev / d2(s - 1),
                    light_rev_pdf_w: lv.pdf_rev_w,
                },
            )
        }
        Strategy::Vm(s) => {
            let light = light_partials(ctx, spec, s);
            let cam = camera_partials(ctx, spec, s);
            let v = spec.v(s);
            merge_weight(ctx, light, cam, v.pdf_rev_w, v.pdf_fwd_w)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{Purpose, StreamKey};

    #[test]
    fn single_and_symmetric_strategies() {
        assert_eq!(heuristic_weight(&[0.0, 3.0, 0.0], 1, 1.0).unwrap(), 1.0);
        assert_eq!(heuristic_weight(&[2.0, 2.0], 0, 1.0).unwrap(), 0.5);
        assert!(heuristic_weight(&[0.0, 0.0], 0, 1.0).is_err());
    }

    #[test]
    fn direct_view_of_light_is_unweighted() {
        let mut rng = RngStream::new(3, StreamKey { index: 0, iteration: 0, purpose: Purpose::Synthetic });
        let spec = PathSpec::random(&mut rng, 2, false, 64);
        let ctx = MisContext::vcm(64, 0.01);
        assert_eq!(enumerate_weight(&ctx, &spec, Strategy::Vc(0)).unwrap(), 1.0);
        assert_eq!(recursive_weight(&ctx, &spec, Strategy::Vc(0)), 1.0);
    }

    fn check(ctx: &MisContext, spec: &PathSpec) {
        let all = spec.strategies(ctx);
        if all.iter().all(|(_, d)| *d == 0.0) {
            // e.g. a point light seen directly: no strategy can produce it
            assert!(enumerate_weight(ctx, spec, Strategy::Vc(0)).is_err());
            return;
        }
        let mut sum = 0.0;
        for (s, d) in &all {
            if *d == 0.0 {
                continue;
            }
            let we = enumerate_weight(ctx, spec, *s).unwrap();
            let wr = recursive_weight(ctx, spec, *s);
            assert!((we - wr).abs() < 1e-9, "{s:?}: enumerated {we} vs recursive {wr} for {spec:?}");
            sum += we;
        }
        assert!((sum - 1.0).abs() < 1e-9, "sum {sum} {all:?} {spec:?} {ctx:?}");
    }

    #[test]
    fn recursion_matches_enumeration() {
        for k in 0..400u64 {
            let mut rng = RngStream::new(11, StreamKey { index: k, iteration: 0, purpose: Purpose::Synthetic });
            let n = 2 + rng.below(4);
            let delta_light = rng.uniform() < 0.3;
            let j = 1 + rng.below(500);
            let spec = PathSpec::random(&mut rng, n, delta_light, j);
            let r = 0.001 + 0.2 * rng.uniform();
            check(&MisContext::vcm(spec.light_paths, r), &spec);
            check(&MisContext::bdpt(spec.light_paths), &spec);
        }
    }

    #[test]
    fn power_heuristic_also_matches() {
        for k in 0..100u64 {
            let mut rng = RngStream::new(12, StreamKey { index: k, iteration: 0, purpose: Purpose::Synthetic });
            let n = 3 + rng.below(3);
            let spec = PathSpec::random(&mut rng, n, false, 100);
            let mut ctx = MisContext::vcm(100, 0.05);
            ctx.beta = 2.0;
            for (s, d) in spec.strategies(&ctx) {
                if d > 0.0 {
                    let we = enumerate_weight(&ctx, &spec, s).unwrap();
                    let wr = recursive_weight(&ctx, &spec, s);
                    assert!((we - wr).abs() < 1e-9 * we.max(1.0), "{s:?} {we} {wr}");
                }
            }
        }
    }

    #[test]
    fn partials_follow_radius_exactly() {
        let mut rng = RngStream::new(5, crate::math::StreamKey { index: 0, iteration: 0, purpose: crate::math::Purpose::Synthetic });
        for _ in 0..200 {
            let radii = [0.3 * rng.uniform() + 0.01, 0.5 * rng.uniform() + 0.02, 0.2 * rng.uniform() + 0.005];
            let ctxs = radii.map(|r| MisContext::vcm(64, r));
            let (dpa, epw, cl) = (rng.uniform() + 0.1, rng.uniform() + 0.1, rng.uniform());
            let mut p = ctxs.map(|c| light_init(&c, dpa, epw, cl, false));
            for _ in 0..1 + rng.below(4) {
                let (d2, ci, co, pf, pr) =
                    (rng.uniform() + 0.1, rng.uniform() + 0.05, rng.uniform() + 0.05, rng.uniform() + 0.1, rng.uniform() + 0.1);
                let delta = rng.uniform() < 0.2;
                for k in 0..3 {
                    p[k] = on_scatter(&ctxs[k], on_hit(&ctxs[k], p[k], d2, ci), co, pf, pr, delta);
                }
            }
            let q = partials_at_radius(&ctxs[2], (&ctxs[0], p[0]), (&ctxs[1], p[1]));
            for (x, y) in [(q.d_vcm, p[2].d_vcm), (q.d_vc, p[2].d_vc), (q.d_vm, p[2].d_vm)] {
                assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn radius_scales_only_merging_densities() {
        let mut rng = RngStream::new(5, StreamKey { index: 0, iteration: 0, purpose: Purpose::Synthetic });
        let spec = PathSpec::random(&mut rng, 5, false, 10);
        let a = spec.strategies(&MisContext::vcm(10, 0.1));
        let b = spec.strategies(&MisContext::vcm(10, 0.3));
        for ((s, da), (_, db)) in a.iter().zip(&b) {
            match s {
                Strategy::Vc(_) => assert_eq!(da, db),
                Strategy::Vm(_) => assert!((db - 9.0 * da).abs() <= 1e-12 * db.abs()),
            }
        }
    }

    #[test]
    fn merge_weight_grows_with_radius() {
        let mut rng = RngStream::new(6, StreamKey { index: 0, iteration: 0, purpose: Purpose::Synthetic });
        for _ in 0..50 {
            let spec = PathSpec::random(&mut rng, 4, false, 50);
            let mut last = 0.0;
            for r in [0.001, 0.01, 0.1, 1.0] {
                let ctx = MisContext::vcm(50, r);
                let w = spec
                    .strategies(&ctx)
                    .iter()
                    .filter(|(s, d)| matches!(s, Strategy::Vm(_)) && *d > 0.0)
                    .map(|(s, _)| enumerate_weight(&ctx, &spec, *s).unwrap())
                    .sum::<f64>();
                assert!(w >= last - 1e-12);
                last = w;
            }
        }
    }
}
