//! Statistical checks of the path identities behind the classifier: the
//! first Ray–Knight theorem, Williams' time reversal, the Bessel(3)
//! dichotomy at the origin, the Fubini mean identity and the occupation
//! times formula.

use super::bessel::{last_exit_walk, simulate_squared_bessel2};
use super::brownian::walk_to_hit;
use super::functional::{trend_of_increments, Trend, TrendRule};
use super::rng::{derive_seed, normal, par_indexed, rng_from_seed, stream};
use super::stats::{ks_critical_value, ks_two_sample, median, KsResult, MCSummary};
use super::{check_positive, SimError};
use crate::coeffspec::Expr;
use crate::quad::{integrate_compact, Tolerances};
use serde::Serialize;

/// Runs with fewer paths than this are flagged as underpowered.
pub const UNDERPOWERED_BELOW: usize = 100;

/// `Φ⁻¹(3/4)`: the median of `τ_1` for Brownian motion from 0 is its
/// inverse square.
const NORMAL_Q75: f64 = 0.674_489_750_196_081_7;

fn max_time(gap: f64) -> f64 {
    1e4 * gap * gap
}

fn check_paths(n: usize) -> Result<(), SimError> {
    if n == 0 {
        Err(SimError::InvalidParameter("n_paths must be positive".into()))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayKnightCheck {
    pub r: f64,
    pub x0: f64,
    pub u: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub bandwidth: f64,
    /// `L̂^{r−u}_{τ_r}` at the bandwidth.
    pub local_time: MCSummary,
    /// `η_u`, squared Bessel(2) at time `u`.
    pub eta: MCSummary,
    pub expected_mean: f64,
    pub ks: KsResult,
    pub ks_half_bandwidth: KsResult,
    pub critical_value: f64,
    pub bandwidth_sensitive: bool,
    pub truncated_paths: usize,
    pub means_within_3se: bool,
    pub underpowered: bool,
    pub alpha: f64,
    pub passed: bool,
}

/// Two-sample comparison of the local time of Brownian motion at `r − u`
/// up to `τ_r` with the squared Bessel(2) value `η_u`.
///
/// The walker takes `dt` steps above `r − u − h` and larger steps below it,
/// so the occupation estimate is unaffected by the step growth.
#[allow(clippy::too_many_arguments)]
pub fn ray_knight_check(
    r: f64,
    x0: f64,
    u: f64,
    n_paths: usize,
    dt: f64,
    bandwidth: Option<f64>,
    seed: u64,
    alpha: f64,
) -> Result<RayKnightCheck, SimError> {
    check_positive("dt", dt)?;
    check_paths(n_paths)?;
    if !(u > 0.0 && u <= r - x0) {
        return Err(SimError::InvalidParameter(format!("u must lie in (0, r − x0], got {u}")));
    }
    let h = bandwidth.unwrap_or(2.0 * dt.sqrt());
    check_positive("bandwidth", h)?;
    let level = r - u;
    let cap = max_time(r - x0);
    let runs: Vec<(f64, f64, bool)> = par_indexed(n_paths, |i| {
        let mut rng = rng_from_seed(derive_seed(seed, stream::BM_HIT, i as u64));
        let (mut occ, mut occ_half) = (0.0, 0.0);
        let walk = walk_to_hit(x0, r, dt, cap, Some(level - h), &mut rng, |s| {
            let d = (s.b0 - level).abs();
            if d < h {
                occ += s.h;
                if d < 0.5 * h {
                    occ_half += s.h;
                }
            }
        });
        (occ / (2.0 * h), occ_half / h, walk.tau.is_none())
    });
    let lt: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let lt_half: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let truncated = runs.iter().filter(|r| r.2).count();
    let eta: Vec<f64> = par_indexed(n_paths, |i| {
        simulate_squared_bessel2(&[u], derive_seed(seed, stream::SQUARED_BESSEL2, i as u64)).expect("u > 0")[0]
    });
    let ks = ks_two_sample(&lt, &eta);
    let ks_half = ks_two_sample(&lt_half, &eta);
    let critical = ks_critical_value(n_paths, n_paths, alpha);
    let local_time = MCSummary::from_samples(&lt, false);
    let eta_s = MCSummary::from_samples(&eta, false);
    let expected = 2.0 * u;
    let within = |s: &MCSummary| (s.estimate - expected).abs() <= 3.0 * s.std_error;
    let means_within_3se = within(&local_time) && within(&eta_s);
    let bandwidth_sensitive = (ks.statistic - ks_half.statistic).abs() > critical;
    Ok(RayKnightCheck {
        r,
        x0,
        u,
        n_paths,
        dt,
        bandwidth: h,
        local_time,
        eta: eta_s,
        expected_mean: expected,
        passed: ks.p_value > alpha && means_within_3se,
        ks,
        ks_half_bandwidth: ks_half,
        critical_value: critical,
        bandwidth_sensitive,
        truncated_paths: truncated,
        means_within_3se,
        underpowered: n_paths < UNDERPOWERED_BELOW,
        alpha,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilliamsCheck {
    pub r: f64,
    pub x0: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub median_hitting_time: f64,
    pub median_last_exit: f64,
    pub expected_median: f64,
    pub ks: KsResult,
    /// Hitting times of the doubled gap divided by 4 against those of the
    /// original gap.
    pub scaling_ks: KsResult,
    pub censored_hitting: usize,
    pub censored_last_exit: usize,
    pub medians_within_10pct: bool,
    pub underpowered: bool,
    pub alpha: f64,
    pub passed: bool,
}

/// Compares the law of `τ_r` for Brownian motion from `x0` with the law of
/// the last exit of Bessel(3) from level `r − x0`. Both samples are
/// censored at `10⁴·(r − x0)²`. Brownian scaling is checked on the side by
/// comparing `τ` for gap `2(r − x0)`, divided by 4, with the first sample.
pub fn williams_check(r: f64, x0: f64, n_paths: usize, dt: f64, seed: u64, alpha: f64) -> Result<WilliamsCheck, SimError> {
    check_positive("dt", dt)?;
    check_paths(n_paths)?;
    let gap = r - x0;
    check_positive("r − x0", gap)?;
    let cap = max_time(gap);
    let hits = |stream: u64, gap: f64| {
        let cap = max_time(gap);
        par_indexed(n_paths, move |i| {
            let mut rng = rng_from_seed(derive_seed(seed, stream, i as u64));
            let w = walk_to_hit(0.0, gap, dt, cap, None, &mut rng, |_| {});
            (w.tau.unwrap_or(cap), w.tau.is_none())
        })
    };
    let tau: Vec<(f64, bool)> = hits(stream::BM_HIT, gap);
    let doubled: Vec<f64> = hits(stream::BM_HIT_SCALED, 2.0 * gap).iter().map(|v| 0.25 * v.0).collect();
    let xi: Vec<(f64, bool)> = par_indexed(n_paths, |i| {
        let mut rng = rng_from_seed(derive_seed(seed, stream::BESSEL3, i as u64));
        last_exit_walk(gap, dt, cap, &mut rng)
    });
    let t: Vec<f64> = tau.iter().map(|v| v.0).collect();
    let x: Vec<f64> = xi.iter().map(|v| v.0).collect();
    let expected = gap * gap / (NORMAL_Q75 * NORMAL_Q75);
    let (mt, mx) = (median(&t), median(&x));
    let close = |m: f64| (m - expected).abs() <= 0.1 * expected;
    let ks = ks_two_sample(&t, &x);
    let scaling_ks = ks_two_sample(&doubled, &t);
    Ok(WilliamsCheck {
        r,
        x0,
        n_paths,
        dt,
        median_hitting_time: mt,
        median_last_exit: mx,
        expected_median: expected,
        passed: ks.p_value > alpha && close(mt) && close(mx),
        ks,
        scaling_ks,
        censored_hitting: tau.iter().filter(|v| v.1).count(),
        censored_last_exit: xi.iter().filter(|v| v.1).count(),
        medians_within_10pct: close(mt) && close(mx),
        underpowered: n_paths < UNDERPOWERED_BELOW,
        alpha,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChernyCheck {
    pub p: f64,
    pub eps: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub levels: usize,
    pub expected_trend: Trend,
    pub converging: usize,
    pub diverging: usize,
    pub undecided: usize,
    pub agreement: MCSummary,
    /// Fraction of paths whose trend changes when the grid is refined by
    /// Brownian-bridge midpoints.
    pub refinement_flip_fraction: f64,
    pub refinement_unstable: bool,
    pub underpowered: bool,
    pub threshold: f64,
    pub passed: bool,
}

/// Level integrals of `ρ^{−p}` over `[ε2^{−k−1}, ε2^{−k}]` for `k < levels`,
/// ordered toward the origin, from a 3d Brownian path sampled at `times`.
fn level_integrals(times: &[f64], w: &[[f64; 3]], p: f64, per_level: usize, levels: usize) -> Vec<f64> {
    let g: Vec<f64> = w.iter().map(|x| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).powf(-0.5 * p)).collect();
    // times ascend from the finest level; level k occupies the block that
    // ends `k` blocks from the top
    let mut out = Vec::with_capacity(levels);
    for k in 0..levels {
        let hi = times.len() - 1 - k * per_level;
        let lo = hi - per_level;
        let mut acc = 0.0;
        for i in lo..hi {
            acc += 0.5 * (times[i + 1] - times[i]) * (g[i] + g[i + 1]);
        }
        out.push(acc);
    }
    out
}

fn geometric_grid(eps: f64, per_level: usize, levels: usize) -> Vec<f64> {
    let t_min = eps * 0.5f64.powi(levels as i32);
    let mut times = vec![t_min];
    for k in (0..levels).rev() {
        let lo = eps * 0.5f64.powi(k as i32 + 1);
        let step = lo / per_level as f64;
        for j in 1..=per_level {
            times.push(lo + step * j as f64);
        }
    }
    times
}

/// Trend of `∫_0^ε ρ_u^{−p} du` toward `u = 0` for Bessel(3) paths: the
/// integral is finite iff `p < 2`. The origin case `p = 2` is excluded.
///
/// Each dyadic level gets `⌈ε/(2dt)⌉` points, so the coarsest level has
/// spacing `dt` and finer levels keep the same relative resolution. The
/// path starts from its exact law at the smallest grid time.
#[allow(clippy::too_many_arguments)]
pub fn cherny_dichotomy_check(
    p: f64,
    eps: f64,
    n_paths: usize,
    dt: f64,
    levels: usize,
    rule: &TrendRule,
    seed: u64,
    threshold: f64,
) -> Result<ChernyCheck, SimError> {
    check_positive("dt", dt)?;
    check_positive("eps", eps)?;
    check_paths(n_paths)?;
    if !(p >= 0.0 && p.is_finite()) {
        return Err(SimError::InvalidParameter(format!("p must be nonnegative, got {p}")));
    }
    if p == 2.0 {
        return Err(SimError::InvalidParameter("p = 2 sits on the dichotomy and is excluded".into()));
    }
    if levels < 4 {
        return Err(SimError::InvalidParameter("at least 4 levels are needed".into()));
    }
    let per_level = (eps / (2.0 * dt)).ceil().max(2.0) as usize;
    let times = geometric_grid(eps, per_level, levels);
    let expected = if p < 2.0 { Trend::Converging } else { Trend::Diverging };
    let trends: Vec<(Trend, Trend)> = par_indexed(n_paths, |i| {
        let mut rng = rng_from_seed(derive_seed(seed, stream::CHERNY, i as u64));
        let mut w = Vec::with_capacity(times.len());
        let sd0 = times[0].sqrt();
        let mut x = [sd0 * normal(&mut rng), sd0 * normal(&mut rng), sd0 * normal(&mut rng)];
        w.push(x);
        for j in 1..times.len() {
            let sd = (times[j] - times[j - 1]).sqrt();
            for c in &mut x {
                *c += sd * normal(&mut rng);
            }
            w.push(x);
        }
        let coarse = trend_of_increments(&level_integrals(&times, &w, p, per_level, levels), rule).0;
        let mut rng = rng_from_seed(derive_seed(seed, stream::CHERNY_REFINE, i as u64));
        let mut fine_t = Vec::with_capacity(2 * times.len());
        let mut fine_w = Vec::with_capacity(2 * times.len());
        for j in 0..times.len() - 1 {
            fine_t.push(times[j]);
            fine_w.push(w[j]);
            let sd = (0.25 * (times[j + 1] - times[j])).sqrt();
            let mut m = [0.0; 3];
            for (c, mc) in m.iter_mut().enumerate() {
                *mc = 0.5 * (w[j][c] + w[j + 1][c]) + sd * normal(&mut rng);
            }
            fine_t.push(0.5 * (times[j] + times[j + 1]));
            fine_w.push(m);
        }
        fine_t.push(*times.last().unwrap());
        fine_w.push(*w.last().unwrap());
        let fine = trend_of_increments(&level_integrals(&fine_t, &fine_w, p, 2 * per_level, levels), rule).0;
        (coarse, fine)
    });
    let count = |t: Trend| trends.iter().filter(|v| v.0 == t).count();
    let agreeing = count(expected);
    let flips = trends.iter().filter(|v| v.0 != v.1).count();
    let flip_fraction = flips as f64 / n_paths as f64;
    let agreement = MCSummary::proportion(agreeing, n_paths);
    Ok(ChernyCheck {
        p,
        eps,
        n_paths,
        dt,
        levels,
        expected_trend: expected,
        converging: count(Trend::Converging),
        diverging: count(Trend::Diverging),
        undecided: count(Trend::Undecided),
        passed: agreement.estimate >= threshold,
        agreement,
        refinement_flip_fraction: flip_fraction,
        refinement_unstable: flip_fraction > 0.05,
        underpowered: n_paths < UNDERPOWERED_BELOW,
        threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FubiniCheck {
    pub f: String,
    pub r: f64,
    pub x0: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub estimate: MCSummary,
    pub target: f64,
    pub z_score: f64,
    pub underpowered: bool,
    pub passed: bool,
}

/// Monte Carlo mean of `∫_0^g f(r−u) W_u² du` against `∫_0^g f(r−u) u du`
/// with `g = r − x0`. Passes when the two agree within three standard
/// errors.
pub fn fubini_mean_check(f: &Expr, r: f64, x0: f64, n_paths: usize, dt: f64, seed: u64) -> Result<FubiniCheck, SimError> {
    check_positive("dt", dt)?;
    let gap = r - x0;
    check_positive("r − x0", gap)?;
    check_paths(n_paths)?;
    let n = (gap / dt).round().max(1.0) as usize;
    let h = gap / n as f64;
    let weights: Vec<f64> = (0..=n).map(|k| f.eval(r - k as f64 * h)).collect();
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(SimError::InvalidParameter("f must be finite on [x0, r]".into()));
    }
    let target = integrate_compact(&|u: f64| f.eval(r - u) * u, 0.0, gap, &Tolerances::default())
        .map_err(|e| SimError::InvalidParameter(format!("target integral failed: {e}")))?
        .value;
    let vals: Vec<f64> = par_indexed(n_paths, |i| {
        let mut rng = rng_from_seed(derive_seed(seed, stream::FUBINI, i as u64));
        let sd = h.sqrt();
        let mut w = 0.0;
        let mut prev = 0.0;
        let mut acc = 0.0;
        for wk in &weights[1..] {
            w += sd * normal(&mut rng);
            let cur = wk * w * w;
            acc += 0.5 * h * (prev + cur);
            prev = cur;
        }
        acc
    });
    let estimate = MCSummary::from_samples(&vals, false);
    let diff = estimate.estimate - target;
    let z = if diff == 0.0 { 0.0 } else { diff / estimate.std_error };
    Ok(FubiniCheck {
        f: f.to_string(),
        r,
        x0,
        n_paths,
        dt,
        passed: z.abs() <= 3.0,
        estimate,
        target,
        z_score: z,
        underpowered: n_paths < UNDERPOWERED_BELOW,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupationCheck {
    pub f: String,
    pub r: f64,
    pub x0: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub bandwidth: f64,
    pub level_low: f64,
    pub level_count: usize,
    pub median_relative_error: f64,
    pub max_relative_error: f64,
    pub truncated_paths: usize,
    pub underpowered: bool,
    pub passed: bool,
}

/// Per path, compares `∫_0^{τ_r} f(B_u) du` with `∫ f(x) L̂^x_{τ_r} dx`
/// over levels spaced `2h` on `[level_low, r]`. Passes when the median
/// relative error is below 5%.
#[allow(clippy::too_many_arguments)]
pub fn occupation_check(
    f: &Expr,
    r: f64,
    x0: f64,
    level_low: f64,
    n_paths: usize,
    dt: f64,
    bandwidth: Option<f64>,
    seed: u64,
) -> Result<OccupationCheck, SimError> {
    check_positive("dt", dt)?;
    check_paths(n_paths)?;
    check_positive("r − x0", r - x0)?;
    if level_low >= x0 || level_low.is_nan() {
        return Err(SimError::InvalidParameter("level_low must lie below x0".into()));
    }
    let h = bandwidth.unwrap_or(2.0 * dt.sqrt());
    check_positive("bandwidth", h)?;
    let count = ((r - level_low) / (2.0 * h)).ceil() as usize + 1;
    let levels: Vec<f64> = (0..count).map(|j| level_low + 2.0 * h * j as f64).collect();
    let f_levels: Vec<f64> = levels.iter().map(|&x| f.eval(x)).collect();
    let cap = max_time(r - x0);
    let runs: Vec<(f64, bool)> = par_indexed(n_paths, |i| {
        let mut rng = rng_from_seed(derive_seed(seed, stream::OCCUPATION, i as u64));
        let mut occ = vec![0.0; count];
        let mut direct = 0.0;
        let walk = walk_to_hit(x0, r, dt, cap, Some(level_low - h), &mut rng, |s| {
            let v = f.eval(s.b0);
            if v.is_finite() {
                direct += v * s.h;
            }
            let j = ((s.b0 - level_low) / (2.0 * h) + 0.5).floor();
            if j >= 0.0 && (j as usize) < count {
                occ[j as usize] += s.h;
            }
        });
        // ∑_j f(x_j) · (occupation / 2h) · 2h
        let via_lt: f64 = occ.iter().zip(&f_levels).map(|(o, fv)| o * fv).sum();
        let rel = if direct > 0.0 { (via_lt - direct).abs() / direct } else { 0.0 };
        (rel, walk.tau.is_none())
    });
    let errs: Vec<f64> = runs.iter().map(|v| v.0).collect();
    let med = median(&errs);
    Ok(OccupationCheck {
        f: f.to_string(),
        r,
        x0,
        n_paths,
        dt,
        bandwidth: h,
        level_low,
        level_count: count,
        median_relative_error: med,
        max_relative_error: errs.iter().cloned().fold(0.0, f64::max),
        truncated_paths: runs.iter().filter(|v| v.1).count(),
        underpowered: n_paths < UNDERPOWERED_BELOW,
        passed: med < 0.05,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffspec::parse_expr;

    #[test]
    fn geometric_grid_levels() {
        let t = geometric_grid(1.0, 4, 3);
        assert_eq!(t.len(), 13);
        assert_eq!(t[0], 0.125);
        assert_eq!(*t.last().unwrap(), 1.0);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn cherny_rejects_boundary_case() {
        assert!(cherny_dichotomy_check(2.0, 1.0, 10, 1e-2, 10, &TrendRule::default(), 0, 0.9).is_err());
    }

    #[test]
    fn degenerate_cases() {
        let zero = parse_expr("0").unwrap();
        let c = fubini_mean_check(&zero, 1.0, 0.0, 50, 1e-2, 1).unwrap();
        assert!(c.passed && c.target == 0.0 && c.estimate.estimate == 0.0);
        let c = cherny_dichotomy_check(0.0, 1.0, 20, 1e-2, 30, &TrendRule::default(), 0, 0.9).unwrap();
        assert_eq!(c.converging, 20);
    }

    #[test]
    fn small_runs_are_underpowered() {
        let one = parse_expr("1").unwrap();
        let c = fubini_mean_check(&one, 1.0, 0.0, 10, 1e-2, 1).unwrap();
        assert!(c.underpowered);
        let c = ray_knight_check(1.0, 0.0, 0.5, 10, 1e-3, None, 1, 0.01).unwrap();
        assert!(c.underpowered);
        assert!(ray_knight_check(1.0, 0.0, 1.5, 10, 1e-3, None, 1, 0.01).is_err());
    }
}
