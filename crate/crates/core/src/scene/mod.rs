//! Scene representation, ray queries and the text scene format.

mod bvh;
mod camera;
mod light;
mod material;
mod parse;
mod shape;

pub use bvh::Bvh;
pub use camera::Camera;
pub use light::{EmissionSample, Emitter, Illumination, SpotTexture};
pub use material::{fresnel_dielectric, Bsdf, BsdfEval, BsdfSample, Material, Transport};
pub use parse::{parse_obj, parse_scene, parse_scene_with, serialize_scene};
pub use shape::{Aabb, Shape, ShapeHit};

use crate::error::{Error, Result};
use crate::math::{Point3, Vec3};

#[derive(Clone, Debug, PartialEq)]
pub struct Primitive {
    pub shape: Shape,
    pub material: usize,
    pub emitter: Option<usize>,
    /// `emit=` tag from the scene file.
    pub tag: Option<String>,
}

/// A mesh declaration kept for serialization; its triangles occupy
/// `first..first + count` in the primitive list.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshDecl {
    pub obj: String,
    pub material: usize,
    pub first: usize,
    pub count: usize,
}

/// Local geometry at a ray hit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub point: Point3,
    /// Geometric normal flipped toward the side the ray came from.
    pub geo_normal: Vec3,
    /// Shading normal on the same side as `geo_normal`.
    pub shading_normal: Vec3,
    /// Unflipped outward geometric normal.
    pub outward: Vec3,
    /// Whether the ray arrived on the outward side.
    pub front_face: bool,
    pub prim: usize,
    pub material: usize,
    pub emitter: Option<usize>,
}

#[derive(Clone, Copy, Debug)]
pub struct Hit {
    pub dist: f64,
    pub sp: SurfacePoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub camera: Camera,
    pub materials: Vec<Material>,
    pub material_names: Vec<String>,
    pub primitives: Vec<Primitive>,
    pub emitters: Vec<Emitter>,
    pub meshes: Vec<MeshDecl>,
    bvh: Bvh,
    ray_eps: f64,
}

impl Scene {
    pub fn new(
        camera: Camera,
        materials: Vec<(String, Material)>,
        primitives: Vec<Primitive>,
        emitters: Vec<Emitter>,
        meshes: Vec<MeshDecl>,
    ) -> Self {
        let (material_names, materials) = materials.into_iter().unzip();
        let bvh = Bvh::build(&primitives);
        let bounds = primitives.iter().fold(Aabb::EMPTY, |b, p| b.union(p.shape.aabb()));
        let scale = if primitives.is_empty() {
            1.0
        } else {
            bounds.min.x.abs().max(bounds.min.y.abs()).max(bounds.min.z.abs())
                .max(bounds.max.x.abs()).max(bounds.max.y.abs()).max(bounds.max.z.abs())
                .max(bounds.diagonal().length())
        };
        Scene { camera, materials, material_names, primitives, emitters, meshes, bvh, ray_eps: 1e-7 * scale.max(1e-3) }
    }

    /// Offset used to move ray origins off surfaces.
    pub fn ray_eps(&self) -> f64 {
        self.ray_eps
    }

    /// Nearest hit along the unit direction `d` within `(t_min, t_max)`.
    pub fn intersect(&self, o: Point3, d: Vec3, t_min: f64, t_max: f64) -> Option<Hit> {
        let (prim, h) = self.bvh.intersect(&self.primitives, o, d, t_min, t_max)?;
        Some(self.resolve(prim, o, d, h))
    }

    /// Exhaustive nearest hit, used to cross-check the accelerator.
    pub fn intersect_brute_force(&self, o: Point3, d: Vec3, t_min: f64, mut t_max: f64) -> Option<Hit> {
        let mut best = None;
        for (i, p) in self.primitives.iter().enumerate() {
            if let Some(h) = p.shape.intersect(o, d, t_min, t_max) {
                t_max = h.t;
                best = Some((i, h));
            }
        }
        best.map(|(i, h)| self.resolve(i, o, d, h))
    }

    fn resolve(&self, prim: usize, o: Point3, d: Vec3, h: ShapeHit) -> Hit {
        let point = o + d * h.t;
        let (outward, ns) = self.primitives[prim].shape.normals(point, &h);
        let front_face = outward.dot(d) < 0.0;
        let (geo, shading) = if front_face { (outward, ns) } else { (-outward, -ns) };
        let p = &self.primitives[prim];
        Hit {
            dist: h.t,
            sp: SurfacePoint {
                point,
                geo_normal: geo,
                shading_normal: shading,
                outward,
                front_face,
                prim,
                material: p.material,
                emitter: p.emitter,
            },
        }
    }

    /// Ray leaving surface point `sp` in direction `d`: offset origin.
    pub fn spawn(&self, sp: &SurfacePoint, d: Vec3) -> Point3 {
        let side = if d.dot(sp.geo_normal) >= 0.0 { 1.0 } else { -1.0 };
        let scale = self.ray_eps * (1.0 + sp.point.x.abs().max(sp.point.y.abs()).max(sp.point.z.abs()));
        sp.point + sp.geo_normal * (side * scale)
    }

    /// Whether the segment from surface point `a` (leaving toward `b`) to
    /// point `b` is blocked. `b_sp` offsets the far end off its surface.
    pub fn occluded(&self, a: &SurfacePoint, b: Point3, b_normal: Option<Vec3>) -> bool {
        let dir = b - a.point;
        let o = self.spawn(a, dir);
        let target = match b_normal {
            Some(n) => {
                let side = if (o - b).dot(n) >= 0.0 { 1.0 } else { -1.0 };
                let scale = self.ray_eps * (1.0 + b.x.abs().max(b.y.abs()).max(b.z.abs()));
                b + n * (side * scale)
            }
            None => b,
        };
        let d = target - o;
        let len = d.length();
        if len <= 0.0 {
            return false;
        }
        self.bvh.occluded(&self.primitives, o, d / len, 0.0, len * (1.0 - 1e-9))
    }

    pub fn bounds(&self) -> Aabb {
        self.primitives.iter().fold(Aabb::EMPTY, |b, p| b.union(p.shape.aabb()))
    }

    /// Half the diagonal of the bounding box of all geometry.
    pub fn bounding_radius(&self) -> Result<f64> {
        if self.primitives.is_empty() {
            return Err(Error::InvalidArgument("scene has no geometry".into()));
        }
        Ok(0.5 * self.bounds().diagonal().length())
    }

    pub fn material(&self, i: usize) -> &Material {
        &self.materials[i]
    }

    /// Whether any emitter is chromatic, in which case tests run per channel.
    pub fn has_chromatic_emitter(&self) -> bool {
        self.emitters.iter().any(|e| match e {
            Emitter::Area { radiance, .. } => !radiance.is_grey(),
            Emitter::Point { intensity, .. } | Emitter::Spot { intensity, .. } => !intensity.is_grey(),
        })
    }
}
