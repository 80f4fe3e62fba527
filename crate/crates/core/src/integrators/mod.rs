//! Rendering algorithms driven one progressive iteration at a time.
//!
//! Every iteration traces `J` light sub-paths (one per pixel by default) and
//! one jittered eye sub-path per pixel. Random streams are keyed by
//! `(seed, path or pixel index, iteration, purpose)`, and all reductions
//! run in index order, so results do not depend on the thread count.

mod pm;
mod pt;
mod vcm;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::film::Film;
use crate::gather::{Decision, GatherRegion, RadiusMode, RadiusSchedule};
use crate::math::{Purpose, Rgb, RngStream, StreamKey};
use crate::mis::MisContext;
use crate::par;
use crate::path::{trace_light_subpath, LightSampler};
use crate::photon_map::{HashGrid, LightVertex};
use crate::scene::Scene;
use crate::stats::{Channels, CriticalValues, TestConfig};

pub use pm::{pm_pixel, NORMAL_GUARD_COS};
pub use pt::pt_pixel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Pt,
    Bdpt,
    Sppm,
    Cppm,
    Fppm,
    Vcm,
    VcmPlus,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Pt,
        Algorithm::Bdpt,
        Algorithm::Sppm,
        Algorithm::Cppm,
        Algorithm::Fppm,
        Algorithm::Vcm,
        Algorithm::VcmPlus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pt => "pt",
            Algorithm::Bdpt => "bdpt",
            Algorithm::Sppm => "sppm",
            Algorithm::Cppm => "cppm",
            Algorithm::Fppm => "fppm",
            Algorithm::Vcm => "vcm",
            Algorithm::VcmPlus => "vcm+",
        }
    }

    /// Whether the algorithm keeps a per-pixel kernel radius.
    pub fn uses_kernel(self) -> bool {
        !matches!(self, Algorithm::Pt | Algorithm::Bdpt)
    }

    pub fn radius_mode(self) -> RadiusMode {
        match self {
            Algorithm::Fppm | Algorithm::VcmPlus => RadiusMode::FTest,
            Algorithm::Cppm => RadiusMode::Chi2Test,
            _ => RadiusMode::FixedSchedule,
        }
    }

    fn is_photon_mapping(self) -> bool {
        matches!(self, Algorithm::Sppm | Algorithm::Cppm | Algorithm::Fppm)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderConfig {
    pub algorithm: Algorithm,
    pub iterations: u64,
    pub seed: u64,
    /// Initial radius as a fraction of the scene's bounding radius.
    pub r0_frac: f64,
    /// Absolute initial radius; overrides `r0_frac` when set.
    pub initial_radius: Option<f64>,
    pub k: f64,
    pub alpha: f64,
    pub alpha_f: f64,
    pub alpha_chi: f64,
    pub n_a: usize,
    pub n_s: usize,
    pub max_depth: u32,
    /// Light sub-paths per iteration; the pixel count when `None`.
    pub light_paths: Option<usize>,
    /// Forces the outcome of every hypothesis test (for degenerate checks).
    pub decision: Decision,
    /// Tested channels; RGB is chosen automatically for chromatic lights.
    pub channels: Option<Channels>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            algorithm: Algorithm::Fppm,
            iterations: 1,
            seed: 0,
            r0_frac: 0.002,
            initial_radius: None,
            k: 0.7,
            alpha: 0.75,
            alpha_f: 0.01,
            alpha_chi: 0.01,
            n_a: 2,
            n_s: 6,
            max_depth: 10,
            light_paths: None,
            decision: Decision::Test,
            channels: None,
        }
    }
}

impl RenderConfig {
    pub fn new(algorithm: Algorithm, iterations: u64, seed: u64) -> Self {
        RenderConfig { algorithm, iterations, seed, ..Default::default() }
    }
}

/// Per-iteration snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationReport {
    /// 1-based.
    pub iteration: u64,
    /// Wall time of this iteration (zero where no clock is available).
    pub seconds: f64,
    /// Kernel radius per pixel used during this iteration.
    pub radii: Vec<f64>,
    /// Radius for the next iteration.
    pub next_radii: Vec<f64>,
    pub tested: Vec<bool>,
    pub rejected: Vec<bool>,
    /// This iteration's luminance from connections, per pixel.
    pub vc: Vec<f64>,
    /// This iteration's luminance from merging, per pixel.
    pub vm: Vec<f64>,
}

impl IterationReport {
    pub fn mean_radius(&self) -> f64 {
        if self.radii.is_empty() {
            return 0.0;
        }
        self.radii.iter().sum::<f64>() / self.radii.len() as f64
    }

    /// Merging share of this iteration's luminance over `pixels` (all
    /// pixels when `None`).
    pub fn vm_share(&self, pixels: Option<&[usize]>) -> f64 {
        let (mut vc, mut vm) = (0.0, 0.0);
        let mut add = |i: usize| {
            vc += self.vc[i];
            vm += self.vm[i];
        };
        match pixels {
            Some(p) => p.iter().for_each(|&i| add(i)),
            None => (0..self.vc.len()).for_each(&mut add),
        }
        if vc + vm > 0.0 {
            vm / (vc + vm)
        } else {
            0.0
        }
    }
}

#[cfg(not(target_arch = "wasm32"))]
struct Clock(std::time::Instant);

#[cfg(not(target_arch = "wasm32"))]
impl Clock {
    fn start() -> Self {
        Clock(std::time::Instant::now())
    }
    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[cfg(target_arch = "wasm32")]
struct Clock;

#[cfg(target_arch = "wasm32")]
impl Clock {
    fn start() -> Self {
        Clock
    }
    fn seconds(&self) -> f64 {
        0.0
    }
}

/// Light sub-paths of one iteration, flattened in path order.
struct LightPaths {
    vertices: Vec<LightVertex>,
    /// `vertices[offsets[j]..offsets[j + 1]]` belong to path `j`.
    offsets: Vec<usize>,
    /// Light-tracing splats `(pixel, value)` in path order.
    splats: Vec<(usize, Rgb)>,
}

/// Progressive renderer state.
pub struct Renderer<'a> {
    scene: &'a Scene,
    config: RenderConfig,
    sampler: LightSampler,
    schedule: RadiusSchedule,
    test: TestConfig,
    critical: CriticalValues,
    regions: Vec<GatherRegion>,
    film: Film,
    light_paths: usize,
    iteration: u64,
    warnings: Vec<String>,
}

impl<'a> Renderer<'a> {
    pub fn new(scene: &'a Scene, config: RenderConfig) -> Result<Self> {
        let pixels = scene.camera.pixel_count();
        let light_paths = config.light_paths.unwrap_or(pixels);
        if light_paths == 0 {
            return Err(Error::InvalidArgument("light path count must be positive".into()));
        }
        if config.max_depth == 0 {
            return Err(Error::InvalidArgument("max depth must be at least 1".into()));
        }
        let mut warnings = Vec::new();
        let r1 = match config.initial_radius {
            Some(r) => r,
            None => {
                if !(1e-4..=1e-2).contains(&config.r0_frac) {
                    warnings.push(format!(
                        "initial radius fraction {} lies outside the usual range [0.0001, 0.01]",
                        config.r0_frac
                    ));
                }
                config.r0_frac * scene.bounding_radius()?
            }
        };
        let schedule = RadiusSchedule::with(r1, config.k, config.alpha);
        if config.algorithm.uses_kernel() {
            schedule.validate()?;
        }
        let channels = config.channels.unwrap_or(if scene.has_chromatic_emitter() {
            Channels::Rgb
        } else {
            Channels::Luminance
        });
        let test = TestConfig {
            n_a: config.n_a,
            n_s: config.n_s,
            alpha_f: config.alpha_f,
            alpha_chi: config.alpha_chi,
            channels,
        };
        test.validate()?;
        let regions = if config.algorithm.uses_kernel() {
            vec![GatherRegion::new(&schedule, config.algorithm.radius_mode(), &test); pixels]
        } else {
            Vec::new()
        };
        let mut film = Film::new(scene.camera.width as usize, scene.camera.height as usize);
        if config.algorithm.uses_kernel() {
            film.radius = vec![r1; pixels];
        }
        Ok(Renderer {
            scene,
            sampler: LightSampler::new(scene),
            schedule,
            test,
            critical: CriticalValues::new(),
            regions,
            film,
            light_paths,
            iteration: 0,
            warnings,
            config,
        })
    }

    pub fn film(&self) -> &Film {
        &self.film
    }

    pub fn into_film(self) -> Film {
        self.film
    }

    pub fn config(&self) -> &RenderConfig {
        &self.config
    }

    pub fn schedule(&self) -> &RadiusSchedule {
        &self.schedule
    }

    pub fn test_config(&self) -> &TestConfig {
        &self.test
    }

    pub fn regions(&self) -> &[GatherRegion] {
        &self.regions
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn light_paths(&self) -> usize {
        self.light_paths
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn trace_lights(&self, i: u64, ctx: &MisContext, alt: Option<&MisContext>, radii: &[f64], splat: bool) -> LightPaths {
        let scene = self.scene;
        let sampler = &self.sampler;
        let (seed, max_depth, jn) = (self.config.seed, self.config.max_depth, self.light_paths);
        let per_path: Vec<(Vec<LightVertex>, Vec<(usize, Rgb)>)> = par::map_indexed(jn, |j| {
            let mut rng = RngStream::new(seed, StreamKey { index: j as u64, iteration: i, purpose: Purpose::Light });
            let verts = trace_light_subpath(scene, sampler, ctx, alt, j as u32, max_depth, &mut rng);
            let splats = if splat { vcm::light_trace(scene, ctx, alt, radii, &verts, jn, max_depth) } else { Vec::new() };
            (verts, splats)
        });
        let mut out = LightPaths { vertices: Vec::new(), offsets: vec![0], splats: Vec::new() };
        for (v, s) in per_path {
            out.vertices.extend(v);
            out.offsets.push(out.vertices.len());
            out.splats.extend(s);
        }
        out
    }

    /// Runs one iteration.
    pub fn step(&mut self) -> Result<IterationReport> {
        let clock = Clock::start();
        let i = self.iteration + 1;
        let scene = self.scene;
        let n = scene.camera.pixel_count();
        let (seed, max_depth, jn) = (self.config.seed, self.config.max_depth, self.light_paths);
        let algo = self.config.algorithm;
        let radii: Vec<f64> = self.regions.iter().map(|r| r.radius).collect();
        let r_max = radii.iter().copied().fold(0.0, f64::max);
        let eye_rng = move |p: usize| RngStream::new(seed, StreamKey { index: p as u64, iteration: i, purpose: Purpose::Eye });
        let test = self.test;

        let results: Vec<(Rgb, f64, f64)> = match algo {
            Algorithm::Pt => {
                let sampler = &self.sampler;
                par::map_indexed(n, |p| {
                    let c = pt_pixel(scene, sampler, p, max_depth, &mut eye_rng(p));
                    (c, c.luminance(), 0.0)
                })
            }
            _ if algo.is_photon_mapping() => {
                let ctx = MisContext::bdpt(jn);
                let lights = self.trace_lights(i, &ctx, None, &[], false);
                let grid = HashGrid::build(&lights.vertices, r_max)?;
                let collect = algo != Algorithm::Sppm;
                let photons = &lights.vertices;
                let out: Vec<Result<(Rgb, f64, f64)>> = par::map_mut(&mut self.regions, |p, region| {
                    let region = if collect { Some(region) } else { None };
                    pm_pixel(scene, &grid, photons, region, &test, radii[p], p, jn, max_depth, &mut eye_rng(p))
                });
                out.into_iter().collect::<Result<_>>()?
            }
            _ => {
                let use_vm = algo != Algorithm::Bdpt;
                let light_ctx = if use_vm { MisContext::vcm(jn, r_max) } else { MisContext::bdpt(jn) };
                // Per-pixel radii: track partials under a second radius so
                // each merge and splat can be weighted for its own pixel.
                let per_pixel = algo == Algorithm::VcmPlus && r_max > 0.0;
                let alt_ctx = per_pixel.then(|| light_ctx.with_radius(0.5 * r_max));
                let pixel_radii: &[f64] = if per_pixel { &radii } else { &[] };
                let lights = self.trace_lights(i, &light_ctx, alt_ctx.as_ref(), pixel_radii, true);
                let grid = if use_vm { Some(HashGrid::build(&lights.vertices, r_max)?) } else { None };
                let shared = vcm::Shared {
                    scene,
                    sampler: &self.sampler,
                    vertices: &lights.vertices,
                    offsets: &lights.offsets,
                    grid: grid.as_ref(),
                    light_paths: jn,
                    max_depth,
                    light_ctx,
                    alt_ctx,
                };
                let collect = algo == Algorithm::VcmPlus;
                let mut out: Vec<(Rgb, f64, f64)> = if use_vm {
                    let res: Vec<Result<(Rgb, f64, f64)>> = par::map_mut(&mut self.regions, |p, region| {
                        let ctx = MisContext::vcm(jn, radii[p]);
                        let region = if collect { Some(region) } else { None };
                        vcm::vcm_pixel(&shared, &ctx, region, &test, p, &mut eye_rng(p))
                    });
                    res.into_iter().collect::<Result<_>>()?
                } else {
                    let ctx = MisContext::bdpt(jn);
                    let res: Vec<Result<(Rgb, f64, f64)>> =
                        par::map_indexed(n, |p| vcm::vcm_pixel(&shared, &ctx, None, &test, p, &mut eye_rng(p)));
                    res.into_iter().collect::<Result<_>>()?
                };
                for &(p, c) in &lights.splats {
                    out[p].0 += c;
                    out[p].1 += c.luminance();
                }
                out
            }
        };

        let estimate: Vec<Rgb> = results.iter().map(|r| r.0).collect();
        let vc: Vec<f64> = results.iter().map(|r| r.1).collect();
        let vm: Vec<f64> = results.iter().map(|r| r.2).collect();
        self.film.add_iteration(&estimate, &vc, &vm)?;

        let (mut tested, mut rejected) = (Vec::new(), Vec::new());
        if algo.uses_kernel() {
            let schedule = self.schedule;
            let critical = &self.critical;
            let decision = self.config.decision;
            let updates: Vec<Result<crate::gather::RadiusUpdate>> =
                par::map_mut(&mut self.regions, |_, r| r.update(&schedule, i, jn as u64, &test, critical, decision));
            for u in updates {
                let u = u?;
                tested.push(u.tested);
                rejected.push(u.rejected);
            }
            self.film.radius = self.regions.iter().map(|r| r.radius).collect();
        }
        self.iteration = i;
        Ok(IterationReport {
            iteration: i,
            seconds: clock.seconds(),
            next_radii: self.film.radius.clone(),
            radii,
            tested,
            rejected,
            vc,
            vm,
        })
    }
}

/// Renders `config.iterations` iterations, keeping every report.
pub fn render(scene: &Scene, config: &RenderConfig) -> Result<(Film, Vec<IterationReport>)> {
    let mut r = Renderer::new(scene, config.clone())?;
    let mut reports = Vec::with_capacity(config.iterations as usize);
    for _ in 0..config.iterations {
        reports.push(r.step()?);
    }
    Ok((r.into_film(), reports))
}

/// Progressive reference: runs `algorithm` (PT or BDPT) until every pixel's
/// standard error is below `target` times the larger of its own mean and
/// the image mean, checking every 16 iterations.
pub fn render_reference(
    scene: &Scene,
    algorithm: Algorithm,
    seed: u64,
    target: f64,
    max_iterations: u64,
) -> Result<Film> {
    if !matches!(algorithm, Algorithm::Pt | Algorithm::Bdpt) {
        return Err(Error::InvalidArgument("references use pt or bdpt".into()));
    }
    let mut r = Renderer::new(scene, RenderConfig::new(algorithm, max_iterations, seed))?;
    while r.iteration() < max_iterations {
        r.step()?;
        if r.iteration() % 16 != 0 {
            continue;
        }
        let film = r.film();
        let n = film.pixel_count();
        let image_mean = (0..n).map(|p| film.mean(p).luminance()).sum::<f64>() / n as f64;
        if image_mean == 0.0 {
            return Ok(r.into_film());
        }
        let ok = (0..n).all(|p| film.std_error(p) <= target * film.mean(p).luminance().max(image_mean));
        if ok {
            return Ok(r.into_film());
        }
    }
    Err(Error::NotConverged(format!("target {target} not reached in {max_iterations} iterations")))
}
