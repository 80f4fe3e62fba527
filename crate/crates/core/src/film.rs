//! Progressive per-pixel accumulation.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::math::Rgb;

/// Sum of per-iteration pixel estimates plus the auxiliary channels.
#[derive(Clone, Debug, PartialEq)]
pub struct Film {
    pub width: usize,
    pub height: usize,
    pub iterations: u64,
    sum: Vec<Rgb>,
    /// Sum of squared per-iteration luminance, for standard errors.
    sum_sq: Vec<f64>,
    /// Accumulated luminance from connections (everything but merging).
    vc_sum: Vec<f64>,
    /// Accumulated luminance from merging / photon gathering.
    vm_sum: Vec<f64>,
    /// Current kernel radius per pixel (zero for non-kernel methods).
    pub radius: Vec<f64>,
}

impl Film {
    pub fn new(width: usize, height: usize) -> Self {
        let n = width * height;
        Film {
            width,
            height,
            iterations: 0,
            sum: vec![Rgb::BLACK; n],
            sum_sq: vec![0.0; n],
            vc_sum: vec![0.0; n],
            vm_sum: vec![0.0; n],
            radius: vec![0.0; n],
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Adds one iteration's estimate with its connection/merging split.
    pub fn add_iteration(&mut self, estimate: &[Rgb], vc: &[f64], vm: &[f64]) -> Result<()> {
        let n = self.pixel_count();
        if estimate.len() != n || vc.len() != n || vm.len() != n {
            return Err(Error::DimensionMismatch(format!("iteration data for {n} pixels has wrong length")));
        }
        for i in 0..n {
            self.sum[i] += estimate[i];
            let l = estimate[i].luminance();
            self.sum_sq[i] += l * l;
            self.vc_sum[i] += vc[i];
            self.vm_sum[i] += vm[i];
        }
        self.iterations += 1;
        Ok(())
    }

    pub fn mean(&self, i: usize) -> Rgb {
        if self.iterations == 0 {
            Rgb::BLACK
        } else {
            self.sum[i] / self.iterations as f64
        }
    }

    pub fn sum(&self, i: usize) -> Rgb {
        self.sum[i]
    }

    /// Standard error of the mean luminance of pixel `i`.
    pub fn std_error(&self, i: usize) -> f64 {
        let n = self.iterations as f64;
        if self.iterations < 2 {
            return f64::INFINITY;
        }
        let m = self.sum[i].luminance() / n;
        let var = ((self.sum_sq[i] / n - m * m) * n / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }

    pub fn image(&self) -> Image {
        let mut img = Image::new(self.width, self.height);
        for i in 0..self.pixel_count() {
            img.pixels[i] = self.mean(i).to_f32();
        }
        img
    }

    /// Fraction of accumulated luminance due to merging, per pixel.
    pub fn vm_share(&self) -> Vec<f64> {
        (0..self.pixel_count())
            .map(|i| {
                let t = self.vc_sum[i] + self.vm_sum[i];
                if t > 0.0 {
                    self.vm_sum[i] / t
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Radius visualization: `r_min` maps to 0 and `r_1` to 1, clamped.
    pub fn radius_map(&self, r_min: f64, r_1: f64) -> Vec<f64> {
        self.radius
            .iter()
            .map(|&r| if r_1 > r_min { ((r - r_min) / (r_1 - r_min)).clamp(0.0, 1.0) } else { 1.0 })
            .collect()
    }

    /// Per-pixel squared error against `reference`, averaged over channels
    /// and scaled by 255^2 like [`crate::metrics::mse`].
    pub fn squared_error_map(&self, reference: &Image) -> Result<Vec<f64>> {
        if reference.width != self.width || reference.height != self.height {
            return Err(Error::DimensionMismatch(format!(
                "film {}x{} vs reference {}x{}",
                self.width, self.height, reference.width, reference.height
            )));
        }
        Ok((0..self.pixel_count())
            .map(|i| {
                let a = self.mean(i).to_f32();
                let b = reference.pixels[i];
                let s: f64 = (0..3).map(|c| (a[c] as f64 - b[c] as f64).powi(2)).sum();
                255.0 * 255.0 * s / 3.0
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_is_sum_over_iterations() {
        let mut f = Film::new(2, 1);
        f.add_iteration(&[Rgb::grey(1.0), Rgb::grey(3.0)], &[1.0, 3.0], &[0.0, 0.0]).unwrap();
        f.add_iteration(&[Rgb::grey(2.0), Rgb::grey(0.0)], &[0.0, 0.0], &[2.0, 0.0]).unwrap();
        assert_eq!(f.mean(0), Rgb::grey(1.5));
        assert_eq!(f.mean(1), Rgb::grey(1.5));
        let share = f.vm_share();
        assert!((share[0] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(share[1], 0.0);
        assert!(f.add_iteration(&[Rgb::BLACK], &[0.0], &[0.0]).is_err());
    }

    #[test]
    fn radius_map_endpoints() {
        let mut f = Film::new(3, 1);
        f.radius = vec![0.01, 1.0, 0.505];
        let m = f.radius_map(0.01, 1.0);
        assert_eq!(m[0], 0.0);
        assert_eq!(m[1], 1.0);
        assert!((m[2] - 0.5).abs() < 1e-12);
    }
}
