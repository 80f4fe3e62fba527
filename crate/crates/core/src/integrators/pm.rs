use std::f64::consts::PI;

use crate::error::Result;
use crate::gather::{ContributionSample, GatherRegion};
use crate::math::{map_to_unified, Rgb, RngStream, TangentFrame};
use crate::mis::MisContext;
use crate::path::{trace_eye_subpath, EyeMode};
use crate::photon_map::{HashGrid, LightVertex};
use crate::scene::{Bsdf, Scene, Transport};
use crate::stats::TestConfig;

/// Photons whose surface normal deviates from the gather normal by more
/// than 30 degrees are ignored.
pub const NORMAL_GUARD_COS: f64 = 0.866_025_403_784_438_6;

/// Photon-mapping estimate for one pixel: emission seen through specular
/// chains plus a constant-kernel density estimate at the first
/// non-specular surface. With `region`, every accepted photon is also
/// deposited as one test sample. Returns `(radiance, direct luminance,
/// gathered luminance)`.
#[allow(clippy::too_many_arguments)]
pub fn pm_pixel(
    scene: &Scene,
    grid: &HashGrid,
    photons: &[LightVertex],
    mut region: Option<&mut GatherRegion>,
    test: &TestConfig,
    radius: f64,
    pixel: usize,
    light_paths: usize,
    max_depth: u32,
    rng: &mut RngStream,
) -> Result<(Rgb, f64, f64)> {
    let ctx = MisContext::bdpt(light_paths);
    let verts = trace_eye_subpath(scene, &ctx, light_paths, pixel, max_depth, EyeMode::FirstDiffuse, rng);
    let mut direct = Rgb::BLACK;
    for v in &verts {
        if let Some(e) = v.sp.emitter {
            if let Some((le, _, _)) =
                scene.emitters[e].area_radiance(&scene.primitives, v.sp.front_face, v.sp.outward, -v.wo)
            {
                direct += v.throughput * le;
            }
        }
    }
    let mut gathered = Rgb::BLACK;
    if let Some(v) = verts.last().filter(|v| !v.is_delta) {
        if let Some(bsdf) = Bsdf::new(scene.material(v.sp.material), &v.sp, v.wo, Transport::Radiance) {
            let x = v.sp.point;
            let frame = TangentFrame::from_unit(v.sp.shading_normal);
            if let Some(r) = region.as_deref_mut() {
                r.set_site(x, frame);
            }
            let mut sum = Rgb::BLACK;
            let mut err = None;
            grid.for_each_in_ball(x, radius, |k| {
                let p = &photons[k];
                if p.depth + v.depth > max_depth || p.hit.geo_normal.dot(v.sp.geo_normal) < NORMAL_GUARD_COS {
                    return;
                }
                let y = map_to_unified(x, p.hit.point, &frame);
                if y.norm() > radius {
                    return;
                }
                let c = v.throughput * bsdf.eval(p.incident).f * p.throughput;
                sum += c;
                if let Some(r) = region.as_deref_mut() {
                    if let Err(e) = r.accumulate(&ContributionSample { y, value: c }, test) {
                        err.get_or_insert(e);
                    }
                }
            })?;
            if let Some(e) = err {
                return Err(e);
            }
            gathered = sum / (PI * radius * radius * light_paths as f64);
        }
    }
    Ok((direct + gathered, direct.luminance(), gathered.luminance()))
}
