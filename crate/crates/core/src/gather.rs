//! Per-pixel kernel state: equi-areal sectors, streaming sample statistics and
//! the hypothesis-driven radius update.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::{Point3, Rgb, TangentFrame, UnifiedPoint, Vec3};
use crate::stats::{chi2_statistic, f_degrees_of_freedom, f_statistic_channel, Channels};
use crate::stats::{CriticalValues, SectorStats, TestConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadiusMode {
    FTest,
    Chi2Test,
    FixedSchedule,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusSchedule {
    pub k: f64,
    pub alpha: f64,
    pub r_min_base: f64,
    pub initial_radius: f64,
}

impl RadiusSchedule {
    /// Defaults: `k = 0.7`, `alpha = 0.75`, `r_min_base = 0.001 * r_1`.
    pub fn new(initial_radius: f64) -> Self {
        RadiusSchedule { k: 0.7, alpha: 0.75, r_min_base: 0.001 * initial_radius, initial_radius }
    }

    pub fn with(initial_radius: f64, k: f64, alpha: f64) -> Self {
        RadiusSchedule { k, alpha, ..Self::new(initial_radius) }
    }

    /// `r_min_base * sqrt(i^(alpha - 1))` for a 1-based iteration `i`.
    pub fn lower_bound(&self, i: u64) -> f64 {
        self.r_min_base * (i as f64).powf(0.5 * (self.alpha - 1.0))
    }

    /// Radius of the standard progressive schedule at 1-based iteration `i`.
    pub fn fixed_radius(&self, i: u64) -> f64 {
        self.initial_radius * (i as f64).powf(0.5 * (self.alpha - 1.0))
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.k > 0.0
            && self.k < 1.0
            && self.alpha > 0.0
            && self.alpha < 1.0
            && self.initial_radius > 0.0
            && self.r_min_base > 0.0
            && self.r_min_base <= self.initial_radius;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid radius schedule {self:?}")))
        }
    }
}

/// One full-path sample deposited into a kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContributionSample {
    pub y: UnifiedPoint,
    pub value: Rgb,
}

/// Equi-areal sector of `y`: annulus boundaries at `radius * sqrt(a / n_a)`,
/// angular bins anchored at the frame's `u` axis.
pub fn sector_index(y: UnifiedPoint, radius: f64, n_a: usize, n_s: usize) -> Result<usize> {
    let r2 = radius * radius;
    let d2 = y.norm_sq();
    if d2 > r2 {
        return Err(Error::OutOfKernel { norm: d2.sqrt(), radius });
    }
    let a = ((n_a as f64 * d2 / r2) as usize).min(n_a - 1);
    let mut theta = y.y_v.atan2(y.y_u);
    if theta < 0.0 {
        theta += 2.0 * PI;
    }
    let s = ((n_s as f64 * theta / (2.0 * PI)) as usize).min(n_s - 1);
    Ok(a * n_s + s)
}

/// Outcome of a radius update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusUpdate {
    pub radius: f64,
    pub tested: bool,
    pub rejected: bool,
}

/// Overrides the test outcome; used to check that the adaptive estimators
/// reduce to their fixed-schedule counterparts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Decision {
    #[default]
    Test,
    AlwaysReject,
    NeverReject,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GatherRegion {
    pub center: Point3,
    pub frame: TangentFrame,
    pub radius: f64,
    pub sectors: Vec<SectorStats>,
    /// Iterations accumulated at the current radius, counting the current one.
    pub t: u64,
    pub r_min_base: f64,
    pub mode: RadiusMode,
}

impl GatherRegion {
    pub fn new(schedule: &RadiusSchedule, mode: RadiusMode, config: &TestConfig) -> Self {
        GatherRegion {
            center: Vec3::ZERO,
            frame: TangentFrame::from_unit(Vec3::new(0.0, 0.0, 1.0)),
            radius: schedule.initial_radius,
            sectors: vec![SectorStats::default(); config.sector_count()],
            t: 1,
            r_min_base: schedule.r_min_base,
            mode,
        }
    }

    /// Moves the kernel to this iteration's gather point.
    pub fn set_site(&mut self, center: Point3, frame: TangentFrame) {
        self.center = center;
        self.frame = frame;
    }

    pub fn accumulate(&mut self, sample: &ContributionSample, config: &TestConfig) -> Result<()> {
        let idx = sector_index(sample.y, self.radius, config.n_a, config.n_s)?;
        let values = match config.channels {
            Channels::Luminance => [sample.value.luminance(), 0.0, 0.0],
            Channels::Rgb => [sample.value.r, sample.value.g, sample.value.b],
        };
        self.sectors[idx].add_sample(values);
        Ok(())
    }

    fn finish(&mut self, schedule: &RadiusSchedule, i: u64, tested: bool, reject: bool) -> RadiusUpdate {
        if reject {
            self.radius = (schedule.k * self.radius).max(self.r_min_base * ((i + 1) as f64).powf(0.5 * (schedule.alpha - 1.0)));
            self.sectors.iter_mut().for_each(|s| *s = SectorStats::default());
            self.t = 1;
        } else {
            self.t += 1;
        }
        RadiusUpdate { radius: self.radius, tested, rejected: reject }
    }

    /// F-test update at the end of 1-based iteration `i` with `j` light paths.
    pub fn end_iteration(
        &mut self,
        schedule: &RadiusSchedule,
        i: u64,
        j: u64,
        config: &TestConfig,
        critical: &CriticalValues,
        decision: Decision,
    ) -> Result<RadiusUpdate> {
        let m = self.t * j;
        for s in &mut self.sectors {
            s.m_total = m;
        }
        let reject = match decision {
            Decision::AlwaysReject => true,
            Decision::NeverReject => false,
            Decision::Test => {
                if m < 2 {
                    return Ok(self.finish(schedule, i, false, false));
                }
                let (d1, d2) = f_degrees_of_freedom(self.sectors.len(), m);
                let fc = critical.f(1.0 - config.alpha_f, d1, d2)?;
                let mut any = false;
                for c in 0..config.channels.count() {
                    if f_statistic_channel(&self.sectors, m, c)? > fc {
                        any = true;
                        break;
                    }
                }
                any
            }
        };
        Ok(self.finish(schedule, i, decision == Decision::Test, reject))
    }

    /// Chi-squared uniformity update using unweighted sample counts.
    pub fn chi2_end_iteration(
        &mut self,
        schedule: &RadiusSchedule,
        i: u64,
        config: &TestConfig,
        critical: &CriticalValues,
        decision: Decision,
    ) -> Result<RadiusUpdate> {
        let reject = match decision {
            Decision::AlwaysReject => true,
            Decision::NeverReject => false,
            Decision::Test => {
                let counts: Vec<u64> = self.sectors.iter().map(|s| s.nonzero_count).collect();
                if counts.iter().all(|&c| c == 0) {
                    return Ok(self.finish(schedule, i, false, false));
                }
                let chi = chi2_statistic(&counts)?;
                chi > critical.chi2(1.0 - config.alpha_chi, counts.len() as u64 - 1)?
            }
        };
        Ok(self.finish(schedule, i, decision == Decision::Test, reject))
    }

    /// Standard progressive schedule: the radius for iteration `i + 1`.
    pub fn fixed_end_iteration(&mut self, schedule: &RadiusSchedule, i: u64) -> RadiusUpdate {
        self.radius = schedule.fixed_radius(i + 1);
        self.t += 1;
        RadiusUpdate { radius: self.radius, tested: false, rejected: false }
    }

    /// Dispatches on `mode`.
    pub fn update(
        &mut self,
        schedule: &RadiusSchedule,
        i: u64,
        j: u64,
        config: &TestConfig,
        critical: &CriticalValues,
        decision: Decision,
    ) -> Result<RadiusUpdate> {
        match self.mode {
            RadiusMode::FTest => self.end_iteration(schedule, i, j, config, critical, decision),
            RadiusMode::Chi2Test => self.chi2_end_iteration(schedule, i, config, critical, decision),
            RadiusMode::FixedSchedule => Ok(self.fixed_end_iteration(schedule, i)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{Purpose, RngStream, StreamKey};

    fn rng(i: u64) -> RngStream {
        RngStream::new(77, StreamKey { index: i, iteration: 0, purpose: Purpose::Synthetic })
    }

    #[test]
    fn sector_index_examples() {
        assert_eq!(sector_index(UnifiedPoint::new(1e-12, 0.0), 1.0, 2, 6).unwrap(), 0);
        let t = std::f64::consts::FRAC_PI_2;
        let y = UnifiedPoint::new(0.9 * t.cos(), 0.9 * t.sin());
        assert_eq!(sector_index(y, 1.0, 2, 6).unwrap(), 7);
        assert_eq!(sector_index(UnifiedPoint::new(0.0, -1.0), 1.0, 2, 6).unwrap(), 6 + 4);
        assert!(matches!(
            sector_index(UnifiedPoint::new(1.1, 0.0), 1.0, 2, 6),
            Err(Error::OutOfKernel { .. })
        ));
    }

    #[test]
    fn sector_areas_are_equal() {
        let (r, n_a, n_s) = (1.7, 3usize, 5usize);
        for a in 0..n_a {
            let inner = r * (a as f64 / n_a as f64).sqrt();
            let outer = r * ((a + 1) as f64 / n_a as f64).sqrt();
            let area = PI * (outer * outer - inner * inner) / n_s as f64;
            let expected = PI * r * r / (n_a * n_s) as f64;
            assert!((area - expected).abs() <= 1e-9 * expected);
        }
    }

    #[test]
    fn accumulate_updates_one_sector() {
        let cfg = TestConfig::default();
        let sched = RadiusSchedule::new(1.0);
        let mut g = GatherRegion::new(&sched, RadiusMode::FTest, &cfg);
        let y = UnifiedPoint::new(0.0, 0.9);
        let s = ContributionSample { y, value: Rgb::grey(2.0) };
        g.accumulate(&s, &cfg).unwrap();
        assert_eq!(g.sectors[7].nonzero_count, 1);
        assert!((g.sectors[7].sum[0] - 2.0).abs() < 1e-12);
        assert!((g.sectors[7].sum_sq[0] - 4.0).abs() < 1e-12);
        g.accumulate(&s, &cfg).unwrap();
        assert!((g.sectors[7].sum[0] - 4.0).abs() < 1e-12);
        assert!((g.sectors[7].sum_sq[0] - 8.0).abs() < 1e-12);
        let far = ContributionSample { y: UnifiedPoint::new(2.0, 0.0), value: Rgb::WHITE };
        assert!(g.accumulate(&far, &cfg).is_err());
        assert_eq!(g.sectors.iter().map(|s| s.nonzero_count).sum::<u64>(), 2);
    }

    #[test]
    fn radius_update_examples() {
        let cfg = TestConfig::default();
        let cv = CriticalValues::new();
        let mut sched = RadiusSchedule::with(1.0, 0.7, 0.75);
        sched.r_min_base = 1e-6;
        let mut g = GatherRegion::new(&sched, RadiusMode::FTest, &cfg);
        let u = g.end_iteration(&sched, 1, 10, &cfg, &cv, Decision::NeverReject).unwrap();
        assert_eq!((u.radius, g.t), (1.0, 2));
        let u = g.end_iteration(&sched, 2, 10, &cfg, &cv, Decision::AlwaysReject).unwrap();
        assert!((u.radius - 0.7).abs() < 1e-15);
        assert_eq!(g.t, 1);

        let mut sched = RadiusSchedule::with(1.0, 0.5, 0.75);
        sched.r_min_base = 1.0;
        let mut g = GatherRegion::new(&sched, RadiusMode::FTest, &cfg);
        let u = g.end_iteration(&sched, 3, 10, &cfg, &cv, Decision::AlwaysReject).unwrap();
        assert!((u.radius - 4f64.powf(-0.125)).abs() < 1e-12);
        assert!((u.radius - 0.8409).abs() < 1e-4);
    }

    #[test]
    fn single_sample_iteration_skips_test() {
        let cfg = TestConfig::default();
        let sched = RadiusSchedule::new(1.0);
        let mut g = GatherRegion::new(&sched, RadiusMode::FTest, &cfg);
        let u = g.end_iteration(&sched, 1, 1, &cfg, &CriticalValues::new(), Decision::Test).unwrap();
        assert!(!u.tested && !u.rejected);
        assert_eq!(g.radius, 1.0);
    }

    #[test]
    fn concentrated_samples_trigger_rejection_and_reset() {
        let cfg = TestConfig::default();
        let sched = RadiusSchedule::new(1.0);
        let mut g = GatherRegion::new(&sched, RadiusMode::FTest, &cfg);
        for _ in 0..50 {
            g.accumulate(&ContributionSample { y: UnifiedPoint::new(0.1, 0.05), value: Rgb::WHITE }, &cfg)
                .unwrap();
        }
        let u = g.end_iteration(&sched, 1, 100, &cfg, &CriticalValues::new(), Decision::Test).unwrap();
        assert!(u.rejected);
        assert!(g.sectors.iter().all(|s| *s == SectorStats::default()));
        assert_eq!(g.t, 1);
    }

    #[test]
    fn chi2_policy() {
        let cfg = TestConfig::default();
        let sched = RadiusSchedule::new(1.0);
        let cv = CriticalValues::new();
        let mut g = GatherRegion::new(&sched, RadiusMode::Chi2Test, &cfg);
        for a in 0..2 {
            for s in 0..6 {
                let th = (s as f64 + 0.5) * PI / 3.0;
                let rad = if a == 0 { 0.3 } else { 0.9 };
                let y = UnifiedPoint::new(rad * th.cos(), rad * th.sin());
                for _ in 0..3 {
                    g.accumulate(&ContributionSample { y, value: Rgb::WHITE }, &cfg).unwrap();
                }
            }
        }
        let u = g.chi2_end_iteration(&sched, 1, &cfg, &cv, Decision::Test).unwrap();
        assert!(!u.rejected);
        assert!((cv.chi2(0.99, 11).unwrap() - 24.725).abs() < 0.01);

        let mut g = GatherRegion::new(&sched, RadiusMode::Chi2Test, &cfg);
        for _ in 0..24 {
            g.accumulate(&ContributionSample { y: UnifiedPoint::new(0.1, 0.01), value: Rgb::WHITE }, &cfg)
                .unwrap();
        }
        assert!(g.chi2_end_iteration(&sched, 1, &cfg, &cv, Decision::Test).unwrap().rejected);
    }

    #[test]
    fn fixed_schedule_matches_formula() {
        let cfg = TestConfig::default();
        let sched = RadiusSchedule::with(0.3, 0.7, 2.0 / 3.0);
        let mut g = GatherRegion::new(&sched, RadiusMode::FixedSchedule, &cfg);
        for i in 1..50u64 {
            let u = g.fixed_end_iteration(&sched, i);
            let expect = 0.3 * ((i + 1) as f64).powf((2.0 / 3.0 - 1.0) / 2.0);
            assert!((u.radius - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn null_stream_rarely_shrinks() {
        // Constant-valued samples at uniform positions satisfy the null
        // hypothesis; each test should reject with probability near alpha.
        let cfg = TestConfig::default();
        let sched = RadiusSchedule::new(1.0);
        let cv = CriticalValues::new();
        let (regions, iters, j) = (40u64, 200u64, 200u64);
        let mut shrinks = 0u64;
        let mut tests = 0u64;
        for r in 0..regions {
            let mut g = GatherRegion::new(&sched, RadiusMode::FTest, &cfg);
            let mut rng = rng(r);
            for i in 1..=iters {
                for _ in 0..j {
                    if rng.uniform() < 0.3 {
                        let rad = g.radius * rng.uniform().sqrt();
                        let th = 2.0 * PI * rng.uniform();
                        let y = UnifiedPoint::new(rad * th.cos(), rad * th.sin());
                        g.accumulate(&ContributionSample { y, value: Rgb::grey(1.5) }, &cfg).unwrap();
                    }
                }
                let u = g.end_iteration(&sched, i, j, &cfg, &cv, Decision::Test).unwrap();
                tests += u.tested as u64;
                shrinks += u.rejected as u64;
            }
        }
        let rate = shrinks as f64 / tests as f64;
        assert!(rate <= 2.0 * cfg.alpha_f, "shrink rate {rate}");
    }
}
