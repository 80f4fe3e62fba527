use crate::math::{sample_uniform_sphere, sample_uniform_triangle, Point3, Vec3};

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub const EMPTY: Aabb = Aabb {
        min: Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
        max: Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
    };

    pub fn union(self, o: Aabb) -> Aabb {
        Aabb { min: self.min.min(o.min), max: self.max.max(o.max) }
    }

    pub fn grow(self, p: Point3) -> Aabb {
        Aabb { min: self.min.min(p), max: self.max.max(p) }
    }

    pub fn centroid(&self) -> Point3 {
        (self.min + self.max) * 0.5
    }

    pub fn diagonal(&self) -> Vec3 {
        self.max - self.min
    }

    /// Slab test; returns whether the ray overlaps `(t_min, t_max)`.
    pub fn hit(&self, origin: Point3, inv_dir: Vec3, t_min: f64, t_max: f64) -> bool {
        let mut t0 = t_min;
        let mut t1 = t_max;
        for a in 0..3 {
            let ta = (self.min[a] - origin[a]) * inv_dir[a];
            let tb = (self.max[a] - origin[a]) * inv_dir[a];
            let (near, far) = if ta < tb { (ta, tb) } else { (tb, ta) };
            // NaN from 0 * inf keeps the current bound.
            if near > t0 {
                t0 = near;
            }
            if far < t1 {
                t1 = far;
            }
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Sphere { center: Point3, radius: f64 },
    /// Parallelogram `corner + a*e1 + b*e2`, `a, b` in [0,1]; its outward
    /// side is `e1 x e2`.
    Quad { corner: Point3, e1: Vec3, e2: Vec3 },
    Triangle { p: [Point3; 3], n: Option<[Vec3; 3]> },
}

/// Raw intersection data, resolved into a surface point by the scene.
#[derive(Clone, Copy, Debug)]
pub struct ShapeHit {
    pub t: f64,
    pub b1: f64,
    pub b2: f64,
}

impl Shape {
    pub fn aabb(&self) -> Aabb {
        match self {
            Shape::Sphere { center, radius } => {
                Aabb { min: *center - Vec3::splat(*radius), max: *center + Vec3::splat(*radius) }
            }
            Shape::Quad { corner, e1, e2 } => Aabb::EMPTY
                .grow(*corner)
                .grow(*corner + *e1)
                .grow(*corner + *e2)
                .grow(*corner + *e1 + *e2),
            Shape::Triangle { p, .. } => Aabb::EMPTY.grow(p[0]).grow(p[1]).grow(p[2]),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Shape::Sphere { radius, .. } => 4.0 * std::f64::consts::PI * radius * radius,
            Shape::Quad { e1, e2, .. } => e1.cross(*e2).length(),
            Shape::Triangle { p, .. } => 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).length(),
        }
    }

    pub fn intersect(&self, o: Point3, d: Vec3, t_min: f64, t_max: f64) -> Option<ShapeHit> {
        match self {
            Shape::Sphere { center, radius } => {
                let oc = o - *center;
                let b = oc.dot(d);
                let c = oc.length_sq() - radius * radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                // Stable roots of t^2 + 2bt + c = 0.
                let q = if b > 0.0 { -b - sq } else { -b + sq };
                let (mut t0, mut t1) = if q != 0.0 { (q, c / q) } else { (-b, -b) };
                if t0 > t1 {
                    std::mem::swap(&mut t0, &mut t1);
                }
                let t = if t0 > t_min && t0 < t_max {
                    t0
                } else if t1 > t_min && t1 < t_max {
                    t1
                } else {
                    return None;
                };
                Some(ShapeHit { t, b1: 0.0, b2: 0.0 })
            }
            Shape::Quad { corner, e1, e2 } => {
                let n = e1.cross(*e2);
                let denom = n.dot(d);
                if denom.abs() < 1e-300 {
                    return None;
                }
                let t = n.dot(*corner - o) / denom;
                if !(t > t_min && t < t_max) {
                    return None;
                }
                let w = o + d * t - *corner;
                let nn = n.length_sq();
                let a = w.cross(*e2).dot(n) / nn;
                let b = e1.cross(w).dot(n) / nn;
                if (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) {
                    Some(ShapeHit { t, b1: a, b2: b })
                } else {
                    None
                }
            }
            Shape::Triangle { p, .. } => {
                let e1 = p[1] - p[0];
                let e2 = p[2] - p[0];
                let pv = d.cross(e2);
                let det = e1.dot(pv);
                if det.abs() < 1e-300 {
                    return None;
                }
                let inv = 1.0 / det;
                let tv = o - p[0];
                let b1 = tv.dot(pv) * inv;
                if !(0.0..=1.0).contains(&b1) {
                    return None;
                }
                let qv = tv.cross(e1);
                let b2 = d.dot(qv) * inv;
                if b2 < 0.0 || b1 + b2 > 1.0 {
                    return None;
                }
                let t = e2.dot(qv) * inv;
                if t > t_min && t < t_max {
                    Some(ShapeHit { t, b1, b2 })
                } else {
                    None
                }
            }
        }
    }

    /// Outward geometric normal and shading normal at a hit.
    pub fn normals(&self, p: Point3, h: &ShapeHit) -> (Vec3, Vec3) {
        match self {
            Shape::Sphere { center, radius } => {
                let n = (p - *center) / *radius;
                let n = n.normalized();
                (n, n)
            }
            Shape::Quad { e1, e2, .. } => {
                let n = e1.cross(*e2).normalized();
                (n, n)
            }
            Shape::Triangle { p: v, n } => {
                let ng = (v[1] - v[0]).cross(v[2] - v[0]).normalized();
                let ns = match n {
                    Some(vn) => {
                        let s = (vn[0] * (1.0 - h.b1 - h.b2) + vn[1] * h.b1 + vn[2] * h.b2).normalized();
                        if !s.is_finite() {
                            ng
                        } else if s.dot(ng) < 0.0 {
                            -s
                        } else {
                            s
                        }
                    }
                    None => ng,
                };
                (ng, ns)
            }
        }
    }

    /// Uniform point on the surface: `(position, outward normal)`.
    pub fn sample_point(&self, u1: f64, u2: f64) -> (Point3, Vec3) {
        match self {
            Shape::Sphere { center, radius } => {
                let n = sample_uniform_sphere(u1, u2);
                (*center + n * *radius, n)
            }
            Shape::Quad { corner, e1, e2 } => {
                (*corner + *e1 * u1 + *e2 * u2, e1.cross(*e2).normalized())
            }
            Shape::Triangle { p, .. } => {
                let (b1, b2) = sample_uniform_triangle(u1, u2);
                let pos = p[0] * (1.0 - b1 - b2) + p[1] * b1 + p[2] * b2;
                (pos, (p[1] - p[0]).cross(p[2] - p[0]).normalized())
            }
        }
    }
}
