//! Sample summaries and the two-sample Kolmogorov–Smirnov test.

use serde::Serialize;

/// Mean of per-path values with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCSummary {
    pub n_paths: usize,
    pub estimate: f64,
    pub std_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_path: Option<Vec<f64>>,
}

impl MCSummary {
    pub fn from_samples(xs: &[f64], keep: bool) -> MCSummary {
        let n = xs.len();
        if n == 0 {
            return MCSummary { n_paths: 0, estimate: f64::NAN, std_error: f64::NAN, per_path: None };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        MCSummary {
            n_paths: n,
            estimate: mean,
            std_error: (var / n as f64).sqrt(),
            per_path: keep.then(|| xs.to_vec()),
        }
    }

    /// Binomial proportion `k / n`.
    pub fn proportion(k: usize, n: usize) -> MCSummary {
        if n == 0 {
            return MCSummary { n_paths: 0, estimate: f64::NAN, std_error: f64::NAN, per_path: None };
        }
        let p = k as f64 / n as f64;
        MCSummary { n_paths: n, estimate: p, std_error: (p * (1.0 - p) / n as f64).sqrt(), per_path: None }
    }
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub n1: usize,
    pub n2: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov distribution tail `P(K > λ)`.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample KS statistic with the asymptotic p-value (including the
/// usual small-sample correction of the scaling factor).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let (n1, n2) = (a.len(), b.len());
    if n1 == 0 || n2 == 0 {
        return KsResult { n1, n2, statistic: f64::NAN, p_value: f64::NAN };
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        let v = x[i].min(y[j]);
        while i < n1 && x[i] <= v {
            i += 1;
        }
        while j < n2 && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    KsResult { n1, n2, statistic: d, p_value: kolmogorov_tail(lambda) }
}

/// Asymptotic critical value of the two-sample KS statistic at level `alpha`.
pub fn ks_critical_value(n1: usize, n2: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((n1 + n2) as f64 / (n1 * n2) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_constant() {
        let s = MCSummary::from_samples(&[2.0; 10], false);
        assert_eq!((s.estimate, s.std_error), (2.0, 0.0));
        assert!(MCSummary::from_samples(&[], false).estimate.is_nan());
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let a: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let r = ks_two_sample(&a, &a);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let b: Vec<f64> = (0..200).map(|i| 1000.0 + i as f64).collect();
        let r = ks_two_sample(&a, &b);
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn kolmogorov_tail_reference_values() {
        // P(K > 1.36) ≈ 0.049, P(K > 1.63) ≈ 0.0098
        assert!((kolmogorov_tail(1.36) - 0.0494).abs() < 1e-3);
        assert!((kolmogorov_tail(1.63) - 0.0098).abs() < 5e-4);
        assert!((ks_critical_value(100, 100, 0.05) - 1.358 * 0.1414).abs() < 1e-3);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
