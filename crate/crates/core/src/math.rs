//! Vectors, colors, tangent frames, the unified 2D map, sampling routines and
//! reproducible random streams.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Div, DivAssign, Index, Mul, MulAssign, Neg, Sub, SubAssign};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub type Point3 = Vec3;

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn splat(v: f64) -> Self {
        Vec3::new(v, v, v)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn length_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn length(self) -> f64 {
        self.length_sq().sqrt()
    }

    /// Unit vector in the same direction. Zero input yields NaNs; callers
    /// that cannot rule that out should use [`Normal3::normalize`].
    pub fn normalized(self) -> Vec3 {
        self / self.length()
    }

    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn axis(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            _ => &self.z,
        }
    }
}

/// A unit-length surface normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normal3(Vec3);

impl Normal3 {
    /// Accepts `v` only if it is finite and unit length within 1e-6.
    pub fn new(v: Vec3) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::InvalidArgument("normal is not finite".into()));
        }
        let len = v.length();
        if len == 0.0 {
            return Err(Error::InvalidArgument("normal has zero length".into()));
        }
        if (len - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "normal is not unit length (|n| = {len})"
            )));
        }
        Ok(Normal3(v))
    }

    pub fn normalize(v: Vec3) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::InvalidArgument("normal is not finite".into()));
        }
        let len = v.length();
        if len == 0.0 {
            return Err(Error::InvalidArgument("normal has zero length".into()));
        }
        Ok(Normal3(v / len))
    }

    pub fn vec(self) -> Vec3 {
        self.0
    }
}

/// Linear RGB triple.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Rgb {
    pub const BLACK: Rgb = Rgb { r: 0.0, g: 0.0, b: 0.0 };
    pub const WHITE: Rgb = Rgb { r: 1.0, g: 1.0, b: 1.0 };

    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Rgb { r, g, b }
    }

    pub fn grey(v: f64) -> Self {
        Rgb::new(v, v, v)
    }

    pub fn luminance(self) -> f64 {
        0.2126 * self.r + 0.7152 * self.g + 0.0722 * self.b
    }

    pub fn is_black(self) -> bool {
        self.r == 0.0 && self.g == 0.0 && self.b == 0.0
    }

    pub fn is_grey(self) -> bool {
        self.r == self.g && self.g == self.b
    }

    pub fn max_component(self) -> f64 {
        self.r.max(self.g).max(self.b)
    }

    pub fn channel(self, i: usize) -> f64 {
        match i {
            0 => self.r,
            1 => self.g,
            _ => self.b,
        }
    }

    pub fn is_finite(self) -> bool {
        self.r.is_finite() && self.g.is_finite() && self.b.is_finite()
    }

    pub fn to_f32(self) -> [f32; 3] {
        [self.r as f32, self.g as f32, self.b as f32]
    }
}

impl Add for Rgb {
    type Output = Rgb;
    fn add(self, o: Rgb) -> Rgb {
        Rgb::new(self.r + o.r, self.g + o.g, self.b + o.b)
    }
}

impl AddAssign for Rgb {
    fn add_assign(&mut self, o: Rgb) {
        *self = *self + o;
    }
}

impl Sub for Rgb {
    type Output = Rgb;
    fn sub(self, o: Rgb) -> Rgb {
        Rgb::new(self.r - o.r, self.g - o.g, self.b - o.b)
    }
}

impl Mul for Rgb {
    type Output = Rgb;
    fn mul(self, o: Rgb) -> Rgb {
        Rgb::new(self.r * o.r, self.g * o.g, self.b * o.b)
    }
}

impl MulAssign for Rgb {
    fn mul_assign(&mut self, o: Rgb) {
        *self = *self * o;
    }
}

impl Mul<f64> for Rgb {
    type Output = Rgb;
    fn mul(self, s: f64) -> Rgb {
        Rgb::new(self.r * s, self.g * s, self.b * s)
    }
}

impl MulAssign<f64> for Rgb {
    fn mul_assign(&mut self, s: f64) {
        *self = *self * s;
    }
}

impl Div<f64> for Rgb {
    type Output = Rgb;
    fn div(self, s: f64) -> Rgb {
        Rgb::new(self.r / s, self.g / s, self.b / s)
    }
}

impl DivAssign<f64> for Rgb {
    fn div_assign(&mut self, s: f64) {
        *self = *self / s;
    }
}

/// Right-handed orthonormal basis with `n` as the third axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentFrame {
    pub u: Vec3,
    pub v: Vec3,
    pub n: Vec3,
}

impl TangentFrame {
    /// Branchless construction of Duff et al. (2017), "Building an
    /// Orthonormal Basis, Revisited":
    ///
    /// ```text
    /// s = copysign(1, n.z)
    /// a = -1 / (s + n.z)
    /// b = n.x * n.y * a
    /// u = (1 + s * n.x^2 * a, s * b, -s * n.x)
    /// v = (b, s + n.y^2 * a, -n.y)
    /// ```
    ///
    /// Sector indices are anchored to `u`, so this formula is part of the
    /// on-disk reproducibility contract. `n` must already be unit length.
    pub fn from_unit(n: Vec3) -> Self {
        let s = 1.0f64.copysign(n.z);
        let a = -1.0 / (s + n.z);
        let b = n.x * n.y * a;
        let u = Vec3::new(1.0 + s * n.x * n.x * a, s * b, -s * n.x);
        let v = Vec3::new(b, s + n.y * n.y * a, -n.y);
        TangentFrame { u, v, n }
    }

    pub fn to_local(&self, w: Vec3) -> Vec3 {
        Vec3::new(w.dot(self.u), w.dot(self.v), w.dot(self.n))
    }

    pub fn to_world(&self, l: Vec3) -> Vec3 {
        self.u * l.x + self.v * l.y + self.n * l.z
    }
}

/// Validating entry point: rejects non-finite, zero-length or non-unit input.
pub fn build_tangent_frame(n: Vec3) -> Result<TangentFrame> {
    let n = Normal3::new(n)?;
    Ok(TangentFrame::from_unit(n.vec()))
}

/// A point in the tangent-plane coordinates around a gather point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UnifiedPoint {
    pub y_u: f64,
    pub y_v: f64,
}

impl UnifiedPoint {
    pub fn new(y_u: f64, y_v: f64) -> Self {
        UnifiedPoint { y_u, y_v }
    }

    pub fn norm_sq(self) -> f64 {
        self.y_u * self.y_u + self.y_v * self.y_v
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }
}

/// `(<x - x*, u>, <x - x*, v>)` with the frame built at the gather point `x`.
///
/// The sign follows the textbook definition, so a photon displaced by `+u`
/// from the gather point maps to `(-1, 0)`. Sector labels are arbitrary, so
/// this 180 degree rotation relative to `x* - x` has no effect on any test.
pub fn map_to_unified(x: Point3, x_star: Point3, frame: &TangentFrame) -> UnifiedPoint {
    let d = x - x_star;
    UnifiedPoint::new(d.dot(frame.u), d.dot(frame.v))
}

/// `x + u * y_u + v * y_v`. Composed with [`map_to_unified`] this yields the
/// point reflected through `x` (that is `2x - x*` for in-plane `x*`); use
/// [`unified_to_point`] for the exact inverse.
pub fn map_from_unified(x: Point3, y: UnifiedPoint, frame: &TangentFrame) -> Point3 {
    x + frame.u * y.y_u + frame.v * y.y_v
}

/// True inverse of [`map_to_unified`] on the tangent plane.
pub fn unified_to_point(x: Point3, y: UnifiedPoint, frame: &TangentFrame) -> Point3 {
    x - frame.u * y.y_u - frame.v * y.y_v
}

/// Cosine-weighted hemisphere direction (local frame, +z up) using the polar
/// disk map `r = sqrt(u1)`, `phi = 2 pi u2`, so `u1 = 0` is the pole.
pub fn sample_cosine_hemisphere(u1: f64, u2: f64) -> Vec3 {
    let r = u1.sqrt();
    let phi = 2.0 * PI * u2;
    let z = (1.0 - u1).max(0.0).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

pub fn cosine_hemisphere_pdf(cos_theta: f64) -> f64 {
    cos_theta.max(0.0) / PI
}

pub fn sample_uniform_sphere(u1: f64, u2: f64) -> Vec3 {
    let z = 1.0 - 2.0 * u1;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = 2.0 * PI * u2;
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

pub const UNIFORM_SPHERE_PDF: f64 = 1.0 / (4.0 * PI);

/// Uniform direction inside the cone around +z with `cos(theta) >= cos_max`.
pub fn sample_uniform_cone(u1: f64, u2: f64, cos_max: f64) -> Vec3 {
    let z = 1.0 - u1 * (1.0 - cos_max);
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = 2.0 * PI * u2;
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

pub fn uniform_cone_pdf(cos_max: f64) -> f64 {
    1.0 / (2.0 * PI * (1.0 - cos_max))
}

/// Barycentric coordinates `(b1, b2)` uniform over a triangle.
pub fn sample_uniform_triangle(u1: f64, u2: f64) -> (f64, f64) {
    let su = u1.sqrt();
    (1.0 - su, u2 * su)
}

/// What a random stream is used for. Part of the stream key so that, e.g.,
/// the eye path of pixel 7 and light path 7 never share numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Eye = 1,
    Light = 2,
    Reference = 3,
    Synthetic = 4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub index: u64,
    pub iteration: u64,
    pub purpose: Purpose,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-keyed random stream: the sequence depends only on `(seed, key)`,
/// never on which thread creates it or when.
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, key: StreamKey) -> Self {
        let mut state = seed;
        let mut words = [0u64; 4];
        for (w, salt) in words
            .iter_mut()
            .zip([key.index, key.iteration, key.purpose as u64, 0x5EED])
        {
            state ^= splitmix64(&mut { salt });
            *w = splitmix64(&mut state);
        }
        let mut bytes = [0u8; 32];
        for (chunk, w) in bytes.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        RngStream { rng: ChaCha8Rng::from_seed(bytes) }
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn uniform2(&mut self) -> (f64, f64) {
        (self.uniform(), self.uniform())
    }

    /// Standard normal variate (Box-Muller).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n.saturating_sub(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).length() <= tol
    }

    #[test]
    fn frame_of_up_normal_is_canonical() {
        let f = build_tangent_frame(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(f.u, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(f.v, Vec3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn frame_of_down_normal_matches_hand_evaluation() {
        // s = -1, a = 1/2, b = 0 -> u = (1,0,0), v = (0,-1,0)
        let f = build_tangent_frame(Vec3::new(0.0, 0.0, -1.0)).unwrap();
        assert!(close(f.u, Vec3::new(1.0, 0.0, 0.0), 1e-15));
        assert!(close(f.v, Vec3::new(0.0, -1.0, 0.0), 1e-15));
        assert!(f.u.cross(f.v).dot(f.n) > 0.0);
    }

    #[test]
    fn frame_rejects_bad_normals() {
        assert!(build_tangent_frame(Vec3::ZERO).is_err());
        assert!(build_tangent_frame(Vec3::new(f64::NAN, 0.0, 1.0)).is_err());
        assert!(build_tangent_frame(Vec3::new(0.0, 0.0, 2.0)).is_err());
    }

    #[test]
    fn unified_map_examples() {
        let x = Vec3::new(0.3, -1.0, 2.0);
        let f = TangentFrame::from_unit(Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(map_to_unified(x, x, &f), UnifiedPoint::new(0.0, 0.0));
        let y = map_to_unified(x, x + f.u, &f);
        assert!((y.y_u + 1.0).abs() < 1e-15 && y.y_v.abs() < 1e-15);
        assert_eq!(map_from_unified(x, UnifiedPoint::default(), &f), x);
        let o = map_from_unified(Vec3::ZERO, UnifiedPoint::new(1.0, 0.0), &f);
        assert_eq!(o, Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn cosine_hemisphere_pole_and_mean() {
        assert_eq!(sample_cosine_hemisphere(0.0, 0.37).z, 1.0);
        let mut rng = RngStream::new(
            9,
            StreamKey { index: 0, iteration: 0, purpose: Purpose::Synthetic },
        );
        let n = 100_000;
        let mut mean = 0.0;
        for _ in 0..n {
            let (a, b) = rng.uniform2();
            let d = sample_cosine_hemisphere(a, b);
            assert!((d.length() - 1.0).abs() < 1e-6);
            assert!(d.z >= 0.0);
            mean += d.z;
        }
        mean /= n as f64;
        assert!((mean - 2.0 / 3.0).abs() < 0.01, "mean cos {mean}");
    }

    #[test]
    fn stream_depends_only_on_key() {
        let k = |i| StreamKey { index: i, iteration: 3, purpose: Purpose::Eye };
        let a: Vec<f64> = {
            let mut s = RngStream::new(1, k(5));
            (0..4).map(|_| s.uniform()).collect()
        };
        let _other = RngStream::new(1, k(6)).uniform();
        let b: Vec<f64> = {
            let mut s = RngStream::new(1, k(5));
            (0..4).map(|_| s.uniform()).collect()
        };
        assert_eq!(a, b);
        let c = RngStream::new(1, k(6)).uniform();
        assert_ne!(a[0], c);
    }
}
