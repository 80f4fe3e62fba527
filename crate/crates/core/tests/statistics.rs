use fppm::math::{Purpose, RngStream, StreamKey};
use fppm::stats::*;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor};

// High-precision values computed independently with mpmath (50 digits).
const CHI2_99_11: f64 = 24.72497031131828;
const F_99_11_1E9: f64 = 2.247724591428908;
const F_99_11_1089: f64 = 2.264000501585907;
const F_99_11_49140: f64 = 2.248084236875741;

fn rng(i: u64) -> RngStream {
    RngStream::new(2024, StreamKey { index: i, iteration: 0, purpose: Purpose::Synthetic })
}

#[test]
fn quantiles_match_high_precision_values() {
    assert!((chi2_quantile(0.99, 11).unwrap() - CHI2_99_11).abs() < 1e-9);
    assert!((f_quantile(0.99, 11, 1_000_000_000).unwrap() - F_99_11_1E9).abs() < 1e-7);
    assert!((f_quantile(0.99, 11, 1089).unwrap() - F_99_11_1089).abs() < 1e-9);
    assert!((f_quantile(0.99, 11, 49140).unwrap() - F_99_11_49140).abs() < 1e-9);
}

#[test]
fn quantiles_agree_with_statrs() {
    for &df in &[1u64, 2, 5, 11, 30, 200] {
        for &p in &[0.01, 0.5, 0.9, 0.99] {
            let ours = chi2_quantile(p, df).unwrap();
            let theirs = ChiSquared::new(df as f64).unwrap().inverse_cdf(p);
            assert!((ours - theirs).abs() <= 1e-6 * theirs.max(1.0), "chi2 {p} {df}: {ours} {theirs}");
        }
    }
    for &(d1, d2) in &[(1u64, 1u64), (3, 7), (11, 100), (11, 10_000), (5, 2)] {
        for &p in &[0.05, 0.5, 0.99] {
            let ours = f_quantile(p, d1, d2).unwrap();
            let theirs = FisherSnedecor::new(d1 as f64, d2 as f64).unwrap().inverse_cdf(p);
            assert!((ours - theirs).abs() <= 1e-6 * theirs.max(1.0), "F {p} {d1} {d2}: {ours} {theirs}");
        }
    }
}

#[test]
fn quantile_domain_errors() {
    assert!(f_quantile(0.0, 11, 100).is_err());
    assert!(f_quantile(1.0, 11, 100).is_err());
    assert!(f_quantile(0.5, 0, 100).is_err());
    assert!(chi2_quantile(0.5, 0).is_err());
    assert!(chi2_quantile(-0.1, 3).is_err());
}

/// Textbook two-pass one-way ANOVA over explicit samples.
fn two_pass_f(groups: &[Vec<f64>]) -> f64 {
    let k = groups.len() as f64;
    let n: usize = groups.iter().map(Vec::len).sum();
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (mean - grand).powi(2);
        ssw += g.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    }
    (ssb / (k - 1.0)) / (ssw / (n as f64 - k))
}

fn streaming(groups: &[Vec<f64>]) -> Vec<SectorStats> {
    let m = groups[0].len() as u64;
    groups
        .iter()
        .map(|g| {
            let mut s = SectorStats { m_total: m, ..Default::default() };
            // Zeros are implicit in the streaming form.
            for &v in g.iter().filter(|v| **v != 0.0) {
                s.add_sample([v, 0.0, 0.0]);
            }
            s
        })
        .collect()
}

#[test]
fn streaming_f_equals_two_pass_on_many_datasets() {
    let mut r = rng(1);
    for _ in 0..1000 {
        let k = 2 + r.below(12);
        let m = 2 + r.below(40);
        let shift = r.normal();
        let groups: Vec<Vec<f64>> = (0..k)
            .map(|g| (0..m).map(|_| if r.uniform() < 0.3 { 0.0 } else { r.normal() + shift * g as f64 * 0.1 + 3.0 }).collect())
            .collect();
        let a = f_statistic(&streaming(&groups), m as u64).unwrap();
        let b = two_pass_f(&groups);
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn f_test_decision_uses_upper_tail() {
    // Group means 0 and 10 with unit spread: decisive.
    let groups = vec![vec![-1.0, 0.0, 1.0], vec![9.0, 10.0, 11.0]];
    let t = anova_f_test(&streaming(&groups), 3, 0.01).unwrap();
    assert!(t.reject && t.f_value > t.critical);
    assert_eq!((t.d1, t.d2), (1, 4));
    let same = vec![vec![-1.0, 0.0, 1.0], vec![1.0, 0.0, -1.0]];
    assert!(!anova_f_test(&streaming(&same), 3, 0.01).unwrap().reject);
}

#[test]
fn chi2_statistic_examples() {
    assert_eq!(chi2_statistic(&[5, 5, 5, 5]).unwrap(), 0.0);
    // Expected 5 per cell: 25/5 + 25/5 + 0 + 0.
    assert!((chi2_statistic(&[10, 0, 5, 5]).unwrap() - 10.0).abs() < 1e-12);
    assert!(chi2_statistic(&[0, 0]).is_err());
    assert!(chi2_statistic(&[3]).is_err());
}

#[test]
fn cdfs_agree_with_statrs() {
    for &x in &[0.1, 1.0, 2.25, 7.5] {
        let a = f_cdf(x, 11, 300);
        let b = FisherSnedecor::new(11.0, 300.0).unwrap().cdf(x);
        assert!((a - b).abs() < 1e-10);
        let a = chi2_cdf(x * 5.0, 11);
        let b = ChiSquared::new(11.0).unwrap().cdf(x * 5.0);
        assert!((a - b).abs() < 1e-10);
    }
}

proptest! {
    #[test]
    fn f_statistic_is_shift_invariant_for_explicit_groups(
        seed in 0u64..10_000, k in 2usize..8, m in 3usize..20, shift in -50.0f64..50.0
    ) {
        // With no implicit zeros, adding a constant to every sample leaves F unchanged.
        let mut r = rng(seed);
        let groups: Vec<Vec<f64>> = (0..k).map(|_| (0..m).map(|_| r.normal() + 100.0).collect()).collect();
        let shifted: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|x| x + shift).collect()).collect();
        let a = f_statistic(&streaming(&groups), m as u64).unwrap();
        let b = f_statistic(&streaming(&shifted), m as u64).unwrap();
        prop_assert!((a - b).abs() <= 1e-6 * a.max(1.0));
    }

    #[test]
    fn f_statistic_is_scale_invariant(seed in 0u64..10_000, scale in 0.001f64..1000.0) {
        let mut r = rng(seed);
        let groups: Vec<Vec<f64>> = (0..6).map(|g| (0..10).map(|_| r.normal() + g as f64).collect()).collect();
        let scaled: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|x| x * scale).collect()).collect();
        let a = f_statistic(&streaming(&groups), 10).unwrap();
        let b = f_statistic(&streaming(&scaled), 10).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * a.max(1.0));
    }

    #[test]
    fn quantile_inverts_cdf(p in 0.001f64..0.999, d1 in 1u64..30, d2 in 1u64..5000) {
        let x = f_quantile(p, d1, d2).unwrap();
        prop_assert!((f_cdf(x, d1, d2) - p).abs() < 1e-9);
    }

    #[test]
    fn merged_sectors_equal_single_pass(values in proptest::collection::vec(-10.0f64..10.0, 1..50), split in 0usize..50) {
        let split = split.min(values.len());
        let mut whole = SectorStats::default();
        let (mut a, mut b) = (SectorStats::default(), SectorStats::default());
        for (i, &v) in values.iter().enumerate() {
            whole.add_sample([v, 0.0, 0.0]);
            if i < split { a.add_sample([v, 0.0, 0.0]) } else { b.add_sample([v, 0.0, 0.0]) }
        }
        a.merge(&b);
        prop_assert_eq!(a.nonzero_count, whole.nonzero_count);
        prop_assert!((a.sum[0] - whole.sum[0]).abs() < 1e-9);
        prop_assert!((a.sum_sq[0] - whole.sum_sq[0]).abs() < 1e-8);
    }
}
