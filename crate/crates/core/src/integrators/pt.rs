use crate::math::{Rgb, RngStream};
use crate::mis::MisContext;
use crate::path::{trace_eye_subpath, EyeMode, LightSampler};
use crate::scene::{Bsdf, Scene, Transport};

/// Unidirectional path tracing with next-event estimation, combined with
/// BSDF-sampled emission by the balance heuristic.
pub fn pt_pixel(scene: &Scene, sampler: &LightSampler, pixel: usize, max_depth: u32, rng: &mut RngStream) -> Rgb {
    let ctx = MisContext::bdpt(1);
    let verts = trace_eye_subpath(scene, &ctx, 1, pixel, max_depth, EyeMode::Full, rng);
    let mut l = Rgb::BLACK;
    for v in &verts {
        if let Some(e) = v.sp.emitter {
            if let Some((le, pdf_a, _)) =
                scene.emitters[e].area_radiance(&scene.primitives, v.sp.front_face, v.sp.outward, -v.wo)
            {
                let w = if v.prev_delta {
                    1.0
                } else {
                    // Light-sampling density of the same direction.
                    let p_light = sampler.prob(e) * pdf_a * v.pdf_dir_w / v.pdf_fwd_a;
                    v.pdf_dir_w / (v.pdf_dir_w + p_light)
                };
                l += v.throughput * le * w;
            }
        }
        if v.is_delta || v.depth >= max_depth {
            continue;
        }
        let Some(bsdf) = Bsdf::new(scene.material(v.sp.material), &v.sp, v.wo, Transport::Radiance) else {
            continue;
        };
        let Some((li, pick)) = sampler.pick(rng.uniform()) else { continue };
        let emitter = &scene.emitters[li];
        let Some(ill) = emitter.illuminate(&scene.primitives, v.sp.point, [rng.uniform(), rng.uniform()]) else {
            continue;
        };
        let e = bsdf.eval(ill.wi);
        if e.f.is_black() || scene.occluded(&v.sp, ill.light_pos, None) {
            continue;
        }
        let p_light = pick * ill.direct_pdf_w;
        let w = if emitter.is_delta() { 1.0 } else { p_light / (p_light + e.pdf_fwd) };
        l += v.throughput * e.f * ill.radiance * (w * e.cos_wi / p_light);
    }
    l
}
