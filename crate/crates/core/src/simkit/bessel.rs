//! Bessel(3) as the norm of a three-dimensional Brownian motion and
//! squared Bessel(2) as the sum of two squared Brownian coordinates.

use super::brownian::grown_step;
use super::diffusion::PROXIMITY;
use super::rng::{normal, rng_from_seed};
use super::{check_positive, Exit, PathSample, SimError};
use rand::Rng;
use serde::Serialize;

/// Bessel(3) from 0 on the uniform grid `k·dt`, up to `horizon`.
pub fn simulate_bessel3(dt: f64, horizon: f64, seed: u64) -> Result<PathSample, SimError> {
    check_positive("dt", dt)?;
    check_positive("horizon", horizon)?;
    let mut rng = rng_from_seed(seed);
    let n = (horizon / dt).round().max(1.0) as usize;
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    let mut x = [0.0f64; 3];
    times.push(0.0);
    values.push(0.0);
    let sd = dt.sqrt();
    for k in 1..=n {
        for c in &mut x {
            *c += sd * normal(&mut rng);
        }
        times.push(k as f64 * dt);
        values.push(norm3(&x));
    }
    Ok(PathSample { times, values, exit: Exit::NoExit { horizon }, driving_seed: seed })
}

fn norm3(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// First time the stored path reaches `level`, interpolated.
pub fn first_hit(path: &PathSample, level: f64) -> Option<f64> {
    let v = &path.values;
    if v[0] >= level {
        return Some(path.times[0]);
    }
    (1..v.len()).find(|&i| v[i] >= level).map(|i| crossing_time(path, i - 1, level))
}

fn crossing_time(path: &PathSample, i: usize, level: f64) -> f64 {
    let (v0, v1) = (path.values[i], path.values[i + 1]);
    let (t0, t1) = (path.times[i], path.times[i + 1]);
    if v1 == v0 {
        t0
    } else {
        t0 + (t1 - t0) * ((level - v0) / (v1 - v0)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LastExit {
    /// Interpolated time of the final crossing of the level; `None` if the
    /// path never reached it.
    pub time: Option<f64>,
    /// The path ends below twice the level, so a later return is likely.
    pub horizon_too_short: bool,
}

/// Last crossing of `level` on a stored path.
pub fn last_exit(path: &PathSample, level: f64) -> LastExit {
    let v = &path.values;
    let time = (0..v.len().saturating_sub(1))
        .rev()
        .find(|&i| (v[i] - level) * (v[i + 1] - level) <= 0.0 && v[i] != v[i + 1])
        .map(|i| crossing_time(path, i, level));
    LastExit { time, horizon_too_short: path.terminal_value() < 2.0 * level }
}

/// Streams Bessel(3) from 0 and returns its last exit time from `level`.
///
/// Steps are `dt` within a band around the level and grow away from it
/// while a ten-standard-deviation margin remains. Crossings hidden inside a
/// step are detected with the Brownian-bridge crossing probability
/// `exp(−2ab/h)`. At `max_time` the path returns to the level later with
/// probability `level/ρ`; such paths are censored at `max_time`.
pub(crate) fn last_exit_walk<R: Rng>(level: f64, dt: f64, max_time: f64, rng: &mut R) -> (f64, bool) {
    let mut x = [0.0f64; 3];
    let mut rho = 0.0;
    let mut t = 0.0;
    let mut last = 0.0;
    let margin = 3f64.sqrt();
    while t < max_time {
        let room = (rho - level).abs() / margin;
        let h = grown_step(dt, room).min(max_time - t);
        let sd = h.sqrt();
        for c in &mut x {
            *c += sd * normal(rng);
        }
        let rho1 = norm3(&x);
        let (a, b) = (rho - level, rho1 - level);
        if a * b <= 0.0 {
            last = if rho1 == rho { t + h } else { t + h * (a / (a - b)).clamp(0.0, 1.0) };
        } else if PROXIMITY * sd * margin > a.abs().min(b.abs()) {
            let u: f64 = rng.random();
            if u < (-2.0 * a * b / h).exp() {
                last = t + h * rng.random::<f64>();
            }
        }
        t += h;
        rho = rho1;
    }
    if rho > level && rng.random::<f64>() >= level / rho {
        (last, false)
    } else {
        (max_time, true)
    }
}

/// Squared Bessel(2) from 0 sampled exactly at the (sorted, positive) grid.
pub fn simulate_squared_bessel2(u_grid: &[f64], seed: u64) -> Result<Vec<f64>, SimError> {
    if u_grid.iter().any(|&u| !(u > 0.0 && u.is_finite())) || u_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SimError::InvalidParameter("grid must be positive and increasing".into()));
    }
    let mut rng = rng_from_seed(seed);
    let (mut w1, mut w2, mut prev) = (0.0, 0.0, 0.0);
    Ok(u_grid
        .iter()
        .map(|&u| {
            let sd = (u - prev).sqrt();
            w1 += sd * normal(&mut rng);
            w2 += sd * normal(&mut rng);
            prev = u;
            w1 * w1 + w2 * w2
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simkit::rng::rng_from_seed;

    #[test]
    fn bessel_path_shape() {
        let p = simulate_bessel3(1e-2, 50.0, 5).unwrap();
        assert_eq!(p.values[0], 0.0);
        assert!(p.values.iter().all(|&v| v >= 0.0));
        assert_eq!(p.times.len(), 5001);
    }

    #[test]
    fn last_exit_not_before_first_hit() {
        for seed in 0..20 {
            let p = simulate_bessel3(1e-2, 200.0, seed).unwrap();
            let first = first_hit(&p, 1.0);
            let last = last_exit(&p, 1.0);
            if let (Some(f), Some(l)) = (first, last.time) {
                assert!(l >= f);
            }
        }
    }

    #[test]
    fn short_horizon_is_flagged() {
        let p = simulate_bessel3(1e-2, 0.05, 1).unwrap();
        assert!(last_exit(&p, 1.0).horizon_too_short);
    }

    #[test]
    fn streamed_last_exit_is_positive() {
        let mut rng = rng_from_seed(3);
        let (xi, censored) = last_exit_walk(1.0, 1e-3, 1e4, &mut rng);
        assert!(!censored && xi > 0.0);
        let (xi, censored) = last_exit_walk(1.0, 1e-3, 1e-2, &mut rng);
        assert!(censored && xi == 1e-2);
    }

    #[test]
    fn squared_bessel_is_nonnegative() {
        let v = simulate_squared_bessel2(&[0.1, 0.5, 2.0], 4).unwrap();
        assert!(v.iter().all(|&x| x >= 0.0));
        assert!(simulate_squared_bessel2(&[0.5, 0.1], 4).is_err());
        assert!(simulate_squared_bessel2(&[0.0], 4).is_err());
    }
}
