//! Browser bindings: a progressive render session, a sector-test explorer
//! and critical values.

use fppm::image::Image;
use fppm::integrators::{Algorithm, RenderConfig, Renderer};
use fppm::math::{Purpose, RngStream, StreamKey};
use fppm::scene::{parse_scene, Scene};
use fppm::scenes;
use fppm::stats::{chi2_quantile, chi2_statistic, f_quantile, f_statistic, SectorStats};
use wasm_bindgen::prelude::*;

fn js(e: fppm::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Text of a bundled scene at `res x res` pixels.
#[wasm_bindgen]
pub fn builtin_scene(name: &str, res: u32) -> Result<String, JsError> {
    let res = res.clamp(8, 256);
    Ok(match name {
        "cornell" => scenes::cornell(res),
        "caustic" => scenes::caustic(res),
        "textured_spot" => scenes::textured_spot(res),
        "step_plane" => scenes::step_plane(res),
        "uniform_plane" => scenes::uniform_plane(res),
        "furnace" => scenes::furnace(res),
        _ => return Err(JsError::new(&format!("unknown scene '{name}'"))),
    })
}

fn rgba(img: &Image) -> Vec<u8> {
    img.to_rgb8().chunks(3).flat_map(|c| [c[0], c[1], c[2], 255]).collect()
}

/// A progressive render the page advances a few iterations at a time.
#[wasm_bindgen]
pub struct Session {
    renderer: Renderer<'static>,
    mean_radius: f64,
    vm_share: f64,
    rejected: usize,
}

#[wasm_bindgen]
impl Session {
    #[wasm_bindgen(constructor)]
    pub fn new(scene_text: &str, algorithm: &str, r0_frac: f64, seed: u32) -> Result<Session, JsError> {
        let algorithm: Algorithm = algorithm.parse().map_err(js)?;
        let scene = parse_scene(scene_text).map_err(js)?;
        // The renderer borrows its scene; a page holds only a handful of
        // sessions, so each scene simply lives until the page closes.
        let scene: &'static Scene = Box::leak(Box::new(scene));
        // Open-ended: the page decides when to stop.
        let config = RenderConfig { r0_frac, ..RenderConfig::new(algorithm, 0, seed as u64) };
        let renderer = Renderer::new(scene, config).map_err(js)?;
        Ok(Session { renderer, mean_radius: 0.0, vm_share: 0.0, rejected: 0 })
    }

    /// Runs `n` more iterations.
    pub fn step(&mut self, n: u32) -> Result<(), JsError> {
        for _ in 0..n {
            let rep = self.renderer.step().map_err(js)?;
            self.mean_radius = rep.mean_radius();
            self.vm_share = rep.vm_share(None);
            self.rejected += rep.rejected.iter().filter(|&&r| r).count();
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.renderer.film().width
    }

    pub fn height(&self) -> usize {
        self.renderer.film().height
    }

    pub fn iteration(&self) -> u32 {
        self.renderer.iteration() as u32
    }

    /// Mean kernel radius of the last iteration.
    pub fn mean_radius(&self) -> f64 {
        self.mean_radius
    }

    /// Merging share of the last iteration's luminance.
    pub fn vm_share(&self) -> f64 {
        self.vm_share
    }

    /// Rejected tests so far.
    pub fn rejected(&self) -> usize {
        self.rejected
    }

    /// Current estimate as RGBA bytes.
    pub fn image_rgba(&self) -> Vec<u8> {
        rgba(&self.renderer.film().image())
    }

    /// Kernel radius per pixel as grey RGBA: white is the initial radius,
    /// black the radius floor.
    pub fn radius_rgba(&self) -> Vec<u8> {
        let film = self.renderer.film();
        let s = self.renderer.schedule();
        let values = film.radius_map(s.r_min_base, s.initial_radius);
        rgba(&Image::from_scalar(film.width, film.height, &values))
    }
}

/// One simulated kernel with `sectors` equal sectors, `photons` photons per
/// sector and `m` light paths. Sector 0 receives photons `contrast` times as
/// bright as the rest, so counts stay uniform while power does not.
///
/// Returns `[F, F critical, chi2, chi2 critical]` at significance `alpha`.
#[wasm_bindgen]
pub fn sector_test(sectors: u32, photons: u32, m: u32, contrast: f64, noise: f64, alpha: f64, seed: u32) -> Result<Vec<f64>, JsError> {
    if sectors < 2 || photons == 0 || m < photons {
        return Err(JsError::new("need at least two sectors and photons <= light paths"));
    }
    let (sectors, m) = (sectors as usize, m as u64);
    let mut rng = RngStream::new(seed as u64, StreamKey { index: 0, iteration: 0, purpose: Purpose::Synthetic });
    let stats: Vec<SectorStats> = (0..sectors)
        .map(|k| {
            let mut s = SectorStats { m_total: m, ..Default::default() };
            let level = if k == 0 { contrast } else { 1.0 };
            for _ in 0..photons {
                let v = (level * (1.0 + noise * rng.normal())).max(1e-9);
                s.add_sample([v, v, v]);
            }
            s
        })
        .collect();
    let f = f_statistic(&stats, m).map_err(js)?;
    let n = sectors as u64;
    let f_crit = f_quantile(1.0 - alpha, n - 1, n * m - n).map_err(js)?;
    let counts: Vec<u64> = stats.iter().map(|s| s.nonzero_count).collect();
    let chi = chi2_statistic(&counts).map_err(js)?;
    let chi_crit = chi2_quantile(1.0 - alpha, n - 1).map_err(js)?;
    Ok(vec![f, f_crit, chi, chi_crit])
}

/// `[F(1 - alpha; k - 1, k m - k), chi2(1 - alpha; k - 1)]`.
#[wasm_bindgen]
pub fn critical_values(alpha: f64, sectors: u32, m: u32) -> Result<Vec<f64>, JsError> {
    if sectors < 2 || m < 1 {
        return Err(JsError::new("need at least two sectors and one light path"));
    }
    let (k, m) = (sectors as u64, m as u64);
    let f = f_quantile(1.0 - alpha, k - 1, k * m - k).map_err(js)?;
    let c = chi2_quantile(1.0 - alpha, k - 1).map_err(js)?;
    Ok(vec![f, c])
}
