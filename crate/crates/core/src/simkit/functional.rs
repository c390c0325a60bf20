//! Partial integrals `∫_0^t f(Y_u) du` along a path and the dyadic trend
//! classifier used as an observable proxy for pathwise convergence.

use super::{Exit, PathSample};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Converging,
    Diverging,
    Undecided,
}

/// Compares the sums of the two halves of the last `window` increments:
/// a ratio (late over early) at most `converging_max` means geometric
/// decay, at least `diverging_min` means level or growing increments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendRule {
    pub window: usize,
    pub converging_max: f64,
    pub diverging_min: f64,
}

impl Default for TrendRule {
    fn default() -> Self {
        TrendRule { window: 24, converging_max: 0.5, diverging_min: 0.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checkpoint {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyDiagnostic {
    pub checkpoints: Vec<Checkpoint>,
    pub trend: Trend,
    /// Late-over-early ratio the trend was read from.
    pub ratio: Option<f64>,
}

/// Trapezoidal `∫_0^{t_i} f(Y_u) du` at every stored time. Undefined values
/// of `f` count as zero.
pub fn cumulative_integral<F: Fn(f64) -> f64 + ?Sized>(path: &PathSample, f: &F) -> Vec<f64> {
    let fv = |y: f64| {
        let v = f(y);
        if v.is_nan() {
            0.0
        } else {
            v
        }
    };
    let mut out = Vec::with_capacity(path.times.len());
    out.push(0.0);
    let mut acc = 0.0;
    let mut prev = fv(path.values[0]);
    for i in 1..path.times.len() {
        let cur = fv(path.values[i]);
        let h = path.times[i] - path.times[i - 1];
        if h > 0.0 {
            acc += 0.5 * h * (prev + cur);
        }
        out.push(acc);
        prev = cur;
    }
    out
}

fn value_at(times: &[f64], cum: &[f64], t: f64) -> f64 {
    let i = times.partition_point(|&s| s <= t);
    if i == 0 {
        return cum[0];
    }
    if i >= times.len() {
        return cum[cum.len() - 1];
    }
    let (t0, t1) = (times[i - 1], times[i]);
    let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
    cum[i - 1] + w * (cum[i] - cum[i - 1])
}

/// Reads the trend from a sequence of nonnegative increments ordered toward
/// the singular end.
pub fn trend_of_increments(increments: &[f64], rule: &TrendRule) -> (Trend, Option<f64>) {
    let w = rule.window.min(increments.len());
    if w < 4 {
        return (Trend::Undecided, None);
    }
    let last = &increments[increments.len() - w..];
    let half = w / 2;
    let early: f64 = last[..half].iter().sum();
    let late: f64 = last[w - half..].iter().sum();
    if early == 0.0 && late == 0.0 {
        return (Trend::Converging, Some(0.0));
    }
    let ratio = if early == 0.0 { f64::INFINITY } else { late / early };
    let trend = if ratio.is_nan() {
        Trend::Undecided
    } else if ratio <= rule.converging_max {
        Trend::Converging
    } else if ratio >= rule.diverging_min {
        Trend::Diverging
    } else {
        Trend::Undecided
    };
    (trend, Some(ratio))
}

/// Partial integrals at dyadic checkpoints approaching the end of the path.
///
/// For an exit at `τ` the checkpoints are `τ − τ·2^{−k}`, stopping once the
/// remaining time is within 16 steps of the end so the final step onto the
/// endpoint never enters. For a path that ran to its horizon `T` they are
/// `T·2^{k−K}`. Both lists start with `(0, 0)`.
pub fn functional_trajectory<F: Fn(f64) -> f64 + ?Sized>(
    path: &PathSample,
    f: &F,
    dyadic_count: usize,
    rule: &TrendRule,
) -> DichotomyDiagnostic {
    let cum = cumulative_integral(path, f);
    let times = &path.times;
    let mut pts = vec![Checkpoint { t: 0.0, value: 0.0 }];
    match path.exit {
        Exit::ExitAt { time, .. } if times.len() >= 2 => {
            let n = times.len();
            let last_step = times[n - 1] - times[n - 2];
            for k in 1..=dyadic_count {
                let gap = time * 0.5f64.powi(k as i32);
                if gap < 16.0 * last_step {
                    break;
                }
                let t = time - gap;
                pts.push(Checkpoint { t, value: value_at(times, &cum, t) });
            }
        }
        _ => {
            let end = path.terminal_time();
            for k in 0..=dyadic_count {
                let t = end * 0.5f64.powi((dyadic_count - k) as i32);
                if t > 0.0 {
                    pts.push(Checkpoint { t, value: value_at(times, &cum, t) });
                }
            }
        }
    }
    let incs: Vec<f64> = pts.windows(2).map(|w| (w[1].value - w[0].value).max(0.0)).collect();
    // the first increment starts at 0 rather than at a dyadic point
    let usable = if incs.len() > 1 { &incs[1..] } else { &incs[..] };
    let (trend, ratio) = trend_of_increments(usable, rule);
    DichotomyDiagnostic { checkpoints: pts, trend, ratio }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffspec::Endpoint;
    use proptest::prelude::*;

    fn grid_path(n: usize, end: f64, exit: bool, y: impl Fn(f64) -> f64) -> PathSample {
        let times: Vec<f64> = (0..=n).map(|i| end * i as f64 / n as f64).collect();
        let values = times.iter().map(|&t| y(t)).collect();
        let exit = if exit {
            Exit::ExitAt { time: end, endpoint: Endpoint::Right }
        } else {
            Exit::NoExit { horizon: end }
        };
        PathSample { times, values, exit, driving_seed: 0 }
    }

    #[test]
    fn zero_integrand_converges() {
        let p = grid_path(1000, 10.0, false, |t| t);
        let d = functional_trajectory(&p, &|_y: f64| 0.0, 12, &TrendRule::default());
        assert!(d.checkpoints.iter().all(|c| c.value == 0.0));
        assert_eq!(d.trend, Trend::Converging);
    }

    #[test]
    fn deterministic_power_laws() {
        // y = t exits at 1, so f = (1 − y)^(−p) behaves like (1 − t)^(−p)
        let rule = TrendRule::default();
        let conv = grid_path(1 << 20, 1.0, true, |t| t);
        let d = functional_trajectory(&conv, &|y: f64| (1.0 - y).powf(-0.5), 20, &rule);
        assert_eq!(d.trend, Trend::Converging);
        let d = functional_trajectory(&conv, &|y: f64| (1.0 - y).powf(-1.5), 20, &rule);
        assert_eq!(d.trend, Trend::Diverging);
        let horizon = grid_path(1 << 16, 1000.0, false, |t| t);
        let d = functional_trajectory(&horizon, &|_y: f64| 1.0, 20, &rule);
        assert_eq!(d.trend, Trend::Diverging);
        let d = functional_trajectory(&horizon, &|y: f64| (1.0 + y).powi(-3), 20, &rule);
        assert_eq!(d.trend, Trend::Converging);
    }

    #[test]
    fn too_few_increments_is_undecided() {
        assert_eq!(trend_of_increments(&[1.0, 2.0, 3.0], &TrendRule::default()).0, Trend::Undecided);
    }

    proptest! {
        #[test]
        fn checkpoints_monotone(values in prop::collection::vec(-3.0f64..3.0, 3..200), exit in any::<bool>()) {
            let n = values.len();
            let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.01).collect();
            let exit = if exit {
                Exit::ExitAt { time: times[n - 1], endpoint: Endpoint::Left }
            } else {
                Exit::NoExit { horizon: times[n - 1] }
            };
            let p = PathSample { times, values, exit, driving_seed: 0 };
            let d = functional_trajectory(&p, &|y: f64| y * y, 10, &TrendRule::default());
            prop_assert!(d.checkpoints.windows(2).all(|w| w[1].t > w[0].t));
            prop_assert!(d.checkpoints.windows(2).all(|w| w[1].value >= w[0].value));
            let cum = cumulative_integral(&p, &|y: f64| y * y);
            prop_assert!(cum.windows(2).all(|w| w[1] >= w[0]) && cum[0] == 0.0);
        }
    }
}
