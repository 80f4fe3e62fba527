//! ANOVA F-test and Pearson chi-squared test over kernel sectors, plus the
//! distribution functions they need.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::{Error, Result};

/// Streaming statistics of one sector. `sum`/`sum_sq` hold up to three
/// tested channels; only the first `Channels::count()` entries are used.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SectorStats {
    pub m_total: u64,
    pub nonzero_count: u64,
    pub sum: [f64; 3],
    pub sum_sq: [f64; 3],
}

impl SectorStats {
    pub fn add_sample(&mut self, values: [f64; 3]) {
        self.nonzero_count += 1;
        for c in 0..3 {
            self.sum[c] += values[c];
            self.sum_sq[c] += values[c] * values[c];
        }
    }

    /// Component-wise sum, used to combine partial accumulations.
    pub fn merge(&mut self, o: &SectorStats) {
        self.m_total += o.m_total;
        self.nonzero_count += o.nonzero_count;
        for c in 0..3 {
            self.sum[c] += o.sum[c];
            self.sum_sq[c] += o.sum_sq[c];
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channels {
    Luminance,
    Rgb,
}

impl Channels {
    pub fn count(self) -> usize {
        match self {
            Channels::Luminance => 1,
            Channels::Rgb => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestConfig {
    pub n_a: usize,
    pub n_s: usize,
    pub alpha_f: f64,
    pub alpha_chi: f64,
    pub channels: Channels,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig { n_a: 2, n_s: 6, alpha_f: 0.01, alpha_chi: 0.01, channels: Channels::Luminance }
    }
}

impl TestConfig {
    pub fn sector_count(&self) -> usize {
        self.n_a * self.n_s
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_a == 0 || self.n_s == 0 || self.sector_count() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least two sectors, got n_a={} n_s={}",
                self.n_a, self.n_s
            )));
        }
        for (name, a) in [("alpha_f", self.alpha_f), ("alpha_chi", self.alpha_chi)] {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::InvalidArgument(format!("{name} must lie in (0,1), got {a}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FTestResult {
    pub f_value: f64,
    pub critical: f64,
    pub reject: bool,
    pub d1: u64,
    pub d2: u64,
}

/// One-way ANOVA F statistic of `channel` from streaming sums.
///
/// Every sector must report the same nominal sample count `m`; samples that
/// were never stored count as zeros. Returns 0 when the group means agree and
/// `+inf` when they differ but every group is internally constant.
pub fn f_statistic_channel(sectors: &[SectorStats], m: u64, channel: usize) -> Result<f64> {
    let n = sectors.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 sectors, got {n}")));
    }
    if m < 2 {
        return Err(Error::InsufficientSamples(format!("m = {m} < 2")));
    }
    if let Some(s) = sectors.iter().find(|s| s.m_total != m) {
        return Err(Error::InvalidArgument(format!(
            "sector sample count {} differs from m = {m}",
            s.m_total
        )));
    }
    let mf = m as f64;
    let nf = n as f64;
    let grand = sectors.iter().map(|s| s.sum[channel]).sum::<f64>() / (nf * mf);
    let between: f64 = sectors
        .iter()
        .map(|s| {
            let d = s.sum[channel] / mf - grand;
            d * d
        })
        .sum::<f64>()
        * mf;
    let within: f64 = sectors
        .iter()
        .map(|s| (s.sum_sq[channel] - s.sum[channel] * s.sum[channel] / mf).max(0.0))
        .sum();
    // Cancellation noise is measured against the raw second moment.
    let scale: f64 = sectors.iter().map(|s| s.sum_sq[channel]).sum::<f64>() * 1e-13;
    if between <= scale {
        return Ok(0.0);
    }
    if within <= scale {
        return Ok(f64::INFINITY);
    }
    Ok((between / (nf - 1.0)) / (within / (nf * (mf - 1.0))))
}

pub fn f_statistic(sectors: &[SectorStats], m: u64) -> Result<f64> {
    f_statistic_channel(sectors, m, 0)
}

pub fn f_degrees_of_freedom(n: usize, m: u64) -> (u64, u64) {
    (n as u64 - 1, n as u64 * (m - 1))
}

pub fn anova_f_test(sectors: &[SectorStats], m: u64, alpha_f: f64) -> Result<FTestResult> {
    let f_value = f_statistic(sectors, m)?;
    let (d1, d2) = f_degrees_of_freedom(sectors.len(), m);
    let critical = f_quantile(1.0 - alpha_f, d1, d2)?;
    Ok(FTestResult { f_value, critical, reject: f_value > critical, d1, d2 })
}

/// Pearson statistic against the uniform expectation `total / n`.
pub fn chi2_statistic(counts: &[u64]) -> Result<f64> {
    if counts.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 cells".into()));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InsufficientSamples("zero total count".into()));
    }
    let e = total as f64 / counts.len() as f64;
    Ok(counts.iter().map(|&o| (o as f64 - e).powi(2) / e).sum())
}

/// Memoized critical values. Quantiles are pure, so sharing the cache across
/// threads cannot affect results.
#[derive(Debug, Default)]
pub struct CriticalValues {
    f: RwLock<HashMap<(u64, u64, u64), f64>>,
    chi2: RwLock<HashMap<(u64, u64), f64>>,
}

impl CriticalValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn f(&self, p: f64, d1: u64, d2: u64) -> Result<f64> {
        let key = (p.to_bits(), d1, d2);
        if let Some(v) = self.f.read().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = f_quantile(p, d1, d2)?;
        self.f.write().unwrap().insert(key, v);
        Ok(v)
    }

    pub fn chi2(&self, p: f64, df: u64) -> Result<f64> {
        let key = (p.to_bits(), df);
        if let Some(v) = self.chi2.read().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = chi2_quantile(p, df)?;
        self.chi2.write().unwrap().insert(key, v);
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// Special functions

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn stirling_tail(z: f64) -> f64 {
    let z2 = z * z;
    1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
}

/// `ln Gamma(b) - ln Gamma(a + b)`, stable when `b` is huge and `a` modest.
fn ln_gamma_shift(a: f64, b: f64) -> f64 {
    if b < 1e4 {
        return ln_gamma(b) - ln_gamma(a + b);
    }
    -a * b.ln() - (a + b - 0.5) * (a / b).ln_1p() + a + stirling_tail(b) - stirling_tail(a + b)
}

fn ln_beta(a: f64, b: f64) -> f64 {
    let (small, large) = if a < b { (a, b) } else { (b, a) };
    ln_gamma(small) + ln_gamma_shift(small, large)
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..100_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ln_front = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..100_000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        sum * ln_front.exp()
    } else {
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..100_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        1.0 - ln_front.exp() * h
    }
}

pub fn f_cdf(x: f64, d1: u64, d2: u64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let (a, b) = (d1 as f64, d2 as f64);
    let t = a * x / (a * x + b);
    reg_inc_beta(a / 2.0, b / 2.0, t)
}

pub fn chi2_cdf(x: f64, df: u64) -> f64 {
    reg_lower_gamma(df as f64 / 2.0, x / 2.0)
}

/// Inverts a continuous CDF on (0, inf) by bracketing then bisection.
fn invert_cdf(p: f64, cdf: impl Fn(f64) -> f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while cdf(hi) < p {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("probability {p} outside (0,1)")))
    }
}

pub fn f_quantile(p: f64, d1: u64, d2: u64) -> Result<f64> {
    check_p(p)?;
    if d1 == 0 || d2 == 0 {
        return Err(Error::InvalidArgument("degrees of freedom must be positive".into()));
    }
    Ok(invert_cdf(p, |x| f_cdf(x, d1, d2)))
}

pub fn chi2_quantile(p: f64, df: u64) -> Result<f64> {
    check_p(p)?;
    if df == 0 {
        return Err(Error::InvalidArgument("degrees of freedom must be positive".into()));
    }
    Ok(invert_cdf(p, |x| chi2_cdf(x, df)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(samples: &[f64], m: u64) -> SectorStats {
        let mut s = SectorStats { m_total: m, ..Default::default() };
        for &v in samples {
            s.add_sample([v, 0.0, 0.0]);
        }
        s
    }

    #[test]
    fn f_statistic_examples() {
        let eq = [group(&[1.0, 3.0], 2), group(&[2.0, 2.0], 2)];
        assert_eq!(f_statistic(&eq, 2).unwrap(), 0.0);
        let inf = [group(&[0.0, 0.0], 2), group(&[2.0, 2.0], 2)];
        assert_eq!(f_statistic(&inf, 2).unwrap(), f64::INFINITY);
        let hand = [group(&[1.0, 3.0], 2), group(&[4.0, 6.0], 2)];
        assert!((f_statistic(&hand, 2).unwrap() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn f_statistic_errors() {
        let a = [group(&[1.0], 1), group(&[1.0], 1)];
        assert!(matches!(f_statistic(&a, 1), Err(Error::InsufficientSamples(_))));
        let b = [group(&[1.0, 2.0], 2), group(&[1.0, 2.0, 3.0], 3)];
        assert!(matches!(f_statistic(&b, 2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn f_test_degenerate_decisions() {
        let eq = [group(&[1.0, 3.0], 2), group(&[2.0, 2.0], 2)];
        assert!(!anova_f_test(&eq, 2, 0.01).unwrap().reject);
        let inf = [group(&[0.0, 0.0], 2), group(&[2.0, 2.0], 2)];
        let r = anova_f_test(&inf, 2, 0.01).unwrap();
        assert!(r.reject);
        assert_eq!((r.d1, r.d2), (1, 2));
    }

    #[test]
    fn chi2_examples() {
        assert_eq!(chi2_statistic(&[5, 5, 5]).unwrap(), 0.0);
        assert!((chi2_statistic(&[8, 4]).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        let mut c = vec![0u64; 12];
        c[0] = 12;
        assert!((chi2_statistic(&c).unwrap() - 132.0).abs() < 1e-9);
        c[0] = 24;
        assert!((chi2_statistic(&c).unwrap() - 264.0).abs() < 1e-9);
        assert!(chi2_statistic(&[0, 0]).is_err());
    }

    #[test]
    fn quantile_closed_forms() {
        assert!((f_quantile(0.5, 1, 1).unwrap() - 1.0).abs() < 1e-6);
        assert!((f_quantile(0.95, 2, 2).unwrap() - 19.0).abs() < 1e-6);
        assert!((chi2_quantile(0.5, 2).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-5);
        assert!(f_quantile(1.0, 2, 2).is_err());
        assert!(chi2_quantile(0.0, 2).is_err());
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut fact = 1.0f64;
        for n in 1..20 {
            fact *= n as f64;
            assert!((ln_gamma(n as f64 + 1.0) - fact.ln()).abs() < 1e-12 * fact.ln().max(1.0));
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn shifted_ln_gamma_agrees_with_direct_form() {
        for &(a, b) in &[(5.5, 2e4), (0.5, 1e5), (3.0, 5e4)] {
            let direct = ln_gamma(b) - ln_gamma(a + b);
            let shifted = ln_gamma_shift(a, b);
            assert!((direct - shifted).abs() < 1e-9, "{a} {b}: {direct} vs {shifted}");
        }
    }
}
