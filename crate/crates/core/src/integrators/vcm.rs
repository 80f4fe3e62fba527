use std::f64::consts::PI;

use super::pm::NORMAL_GUARD_COS;
use crate::error::Result;
use crate::gather::{ContributionSample, GatherRegion};
use crate::math::{map_to_unified, Rgb, RngStream, TangentFrame};
use crate::mis::{self, ConnectTerms, MisContext, MisPartials, NeeTerms};
use crate::path::{trace_eye_subpath, EyeMode, LightSampler};
use crate::photon_map::{HashGrid, LightVertex};
use crate::scene::{Bsdf, Scene, Transport};
use crate::stats::TestConfig;

/// Read-only data shared by all pixels in one iteration.
pub(super) struct Shared<'a> {
    pub scene: &'a Scene,
    pub sampler: &'a LightSampler,
    pub vertices: &'a [LightVertex],
    pub offsets: &'a [usize],
    /// Present when merging is enabled.
    pub grid: Option<&'a HashGrid>,
    pub light_paths: usize,
    pub max_depth: u32,
    /// Context the light sub-paths were traced under.
    pub light_ctx: MisContext,
    /// Second context, present when pixels merge with their own radii.
    pub alt_ctx: Option<MisContext>,
}

/// Light-vertex partials under the radius of `target`.
fn light_partials(light_ctx: &MisContext, alt: Option<&MisContext>, lv: &LightVertex, target: &MisContext) -> MisPartials {
    match alt {
        Some(a) => mis::partials_at_radius(target, (light_ctx, lv.mis), (a, lv.mis_alt)),
        None => lv.mis,
    }
}

/// Connects every vertex of one light sub-path to the camera. With
/// per-pixel `radii`, each splat is weighted for its pixel's radius.
pub(super) fn light_trace(
    scene: &Scene,
    ctx: &MisContext,
    alt: Option<&MisContext>,
    radii: &[f64],
    verts: &[LightVertex],
    light_paths: usize,
    max_depth: u32,
) -> Vec<(usize, Rgb)> {
    let cam = &scene.camera;
    let mut out = Vec::new();
    for lv in verts {
        if lv.depth + 1 > max_depth {
            continue;
        }
        let Some((x, y)) = cam.raster(lv.hit.point) else { continue };
        let d = lv.hit.point - cam.pos;
        let dist2 = d.length_sq();
        let dir = d / dist2.sqrt();
        let cos_cam = cam.forward().dot(dir);
        if cos_cam <= 0.0 {
            continue;
        }
        let Some(bsdf) = Bsdf::new(scene.material(lv.hit.material), &lv.hit, lv.incident, Transport::Importance)
        else {
            continue;
        };
        let e = bsdf.eval(-dir);
        if e.f.is_black() {
            continue;
        }
        let to_image_dist = cam.image_dist() / cos_cam;
        let image_to_solid_angle = to_image_dist * to_image_dist / cos_cam;
        let image_to_surface = image_to_solid_angle * e.cos_wi / dist2;
        let pixel = y as usize * cam.width as usize + x as usize;
        let target = if radii.is_empty() { *ctx } else { ctx.with_radius(radii[pixel]) };
        let partials = light_partials(ctx, alt, lv, &target);
        let w = mis::light_trace_weight(&target, partials, light_paths, image_to_surface, e.pdf_rev);
        if scene.occluded(&lv.hit, cam.pos, None) {
            continue;
        }
        let c = lv.throughput * e.f * (w * image_to_surface / light_paths as f64);
        out.push((pixel, c));
    }
    out
}

/// Everything gathered along one eye sub-path: emission, next-event
/// estimation, connections to the pixel's light sub-path and merging.
/// With `region`, each merge is also deposited as a test sample, weighted
/// by its MIS weight. Returns `(radiance, connection luminance, merging
/// luminance)`.
pub(super) fn vcm_pixel(
    sh: &Shared,
    ctx: &MisContext,
    mut region: Option<&mut GatherRegion>,
    test: &TestConfig,
    pixel: usize,
    rng: &mut RngStream,
) -> Result<(Rgb, f64, f64)> {
    let scene = sh.scene;
    let jn = sh.light_paths;
    let verts = trace_eye_subpath(scene, ctx, jn, pixel, sh.max_depth, EyeMode::Full, rng);
    let path = pixel % jn;
    let light_path = &sh.vertices[sh.offsets[path]..sh.offsets[path + 1]];
    let mut vc = Rgb::BLACK;
    let mut vm = Rgb::BLACK;
    let radius = ctx.radius;
    let mut site_set = false;
    for v in &verts {
        let t = v.depth;
        if let Some(e) = v.sp.emitter {
            if let Some((le, pdf_a, em_w)) =
                scene.emitters[e].area_radiance(&scene.primitives, v.sp.front_face, v.sp.outward, -v.wo)
            {
                let pick = sh.sampler.prob(e);
                let w = mis::emission_weight(ctx, v.mis, pick * pdf_a, pick * em_w, t);
                vc += v.throughput * le * w;
            }
        }
        if v.is_delta {
            continue;
        }
        let Some(bsdf) = Bsdf::new(scene.material(v.sp.material), &v.sp, v.wo, Transport::Radiance) else {
            continue;
        };

        // Next-event estimation.
        if t < sh.max_depth {
            if let Some((li, pick)) = sh.sampler.pick(rng.uniform()) {
                let emitter = &scene.emitters[li];
                let u = [rng.uniform(), rng.uniform()];
                if let Some(ill) = emitter.illuminate(&scene.primitives, v.sp.point, u) {
                    let e = bsdf.eval(ill.wi);
                    if !e.f.is_black() && !scene.occluded(&v.sp, ill.light_pos, None) {
                        let w = mis::nee_weight(
                            ctx,
                            v.mis,
                            &NeeTerms {
                                bsdf_dir_pdf_w: e.pdf_fwd,
                                bsdf_rev_pdf_w: e.pdf_rev,
                                pick_prob: pick,
                                direct_pdf_w: ill.direct_pdf_w,
                                emission_pdf_w: ill.emission_pdf_w,
                                cos_to_light: e.cos_wi,
                                cos_at_light: ill.cos_at_light,
                                delta_light: emitter.is_delta(),
                            },
                        );
                        vc += v.throughput * e.f * ill.radiance * (w * e.cos_wi / (pick * ill.direct_pdf_w));
                    }
                }
            }
        }

        // Connections to the light sub-path with the same index.
        for lv in light_path {
            if lv.depth + 1 + t > sh.max_depth {
                continue;
            }
            let d = lv.hit.point - v.sp.point;
            let dist2 = d.length_sq();
            if dist2 <= 0.0 {
                continue;
            }
            let dir = d / dist2.sqrt();
            let ce = bsdf.eval(dir);
            if ce.f.is_black() {
                continue;
            }
            let Some(lb) = Bsdf::new(scene.material(lv.hit.material), &lv.hit, lv.incident, Transport::Importance)
            else {
                continue;
            };
            let le = lb.eval(-dir);
            if le.f.is_black() {
                continue;
            }
            let w = mis::connect_weight(
                ctx,
                light_partials(&sh.light_ctx, sh.alt_ctx.as_ref(), lv, ctx),
                v.mis,
                &ConnectTerms {
                    camera_dir_pdf_a: ce.pdf_fwd * le.cos_wi / dist2,
                    camera_rev_pdf_w: ce.pdf_rev,
                    light_dir_pdf_a: le.pdf_fwd * ce.cos_wi / dist2,
                    light_rev_pdf_w: le.pdf_rev,
                },
            );
            if scene.occluded(&v.sp, lv.hit.point, Some(lv.hit.geo_normal)) {
                continue;
            }
            let g = ce.cos_wi * le.cos_wi / dist2;
            vc += v.throughput * ce.f * le.f * lv.throughput * (w * g);
        }

        // Merging.
        if let Some(grid) = sh.grid {
            let x = v.sp.point;
            let frame = TangentFrame::from_unit(v.sp.shading_normal);
            if !site_set {
                if let Some(r) = region.as_deref_mut() {
                    r.set_site(x, frame);
                }
                site_set = true;
            }
            let mut sum = Rgb::BLACK;
            let mut err = None;
            grid.for_each_in_ball(x, radius, |k| {
                let lv = &sh.vertices[k];
                if lv.depth + t > sh.max_depth || lv.hit.geo_normal.dot(v.sp.geo_normal) < NORMAL_GUARD_COS {
                    return;
                }
                let y = map_to_unified(x, lv.hit.point, &frame);
                if y.norm() > radius {
                    return;
                }
                let e = bsdf.eval(lv.incident);
                if e.f.is_black() {
                    return;
                }
                let lp = light_partials(&sh.light_ctx, sh.alt_ctx.as_ref(), lv, ctx);
                let w = mis::merge_weight(ctx, lp, v.mis, e.pdf_fwd, e.pdf_rev);
                let c = v.throughput * e.f * lv.throughput * w;
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
            vm += sum / (PI * radius * radius * jn as f64);
        }
    }
    Ok((vc + vm, vc.luminance(), vm.luminance()))
}
