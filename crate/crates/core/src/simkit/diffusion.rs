//! Euler–Maruyama with absorption at the endpoints.

use super::rng::{normal, rng_from_seed};
use super::{check_positive, Exit, PathSample, SimError};
use crate::coeffspec::{Endpoint, Problem};

/// A step of size `h` is halved while `PROXIMITY·|σ|·√h` exceeds the
/// distance to the nearer endpoint.
pub(crate) const PROXIMITY: f64 = 10.0;
pub(crate) const MAX_HALVINGS: u32 = 20;

/// Simulates `dY = μ dt + σ dW` from `x0` until `horizon` or the first exit
/// from `(l, r)`. Exit times are interpolated linearly inside the crossing
/// step.
pub fn simulate_diffusion(p: &Problem, dt: f64, horizon: f64, seed: u64) -> Result<PathSample, SimError> {
    simulate_diffusion_with_growth(p, dt, dt, horizon, seed)
}

/// As [`simulate_diffusion`], but away from the endpoints the step grows to
/// `dt·4^j ≤ max_step` while `PROXIMITY·|σ|·√h` and `10·|μ|·h` both stay
/// below the distance to the nearer endpoint (and `|μ|·h ≤ 0.1·(1 + |y|)`).
pub fn simulate_diffusion_with_growth(
    p: &Problem,
    dt: f64,
    max_step: f64,
    horizon: f64,
    seed: u64,
) -> Result<PathSample, SimError> {
    check_positive("dt", dt)?;
    check_positive("horizon", horizon)?;
    check_positive("max_step", max_step)?;
    let (l, r) = (p.space.l, p.space.r);
    let mut rng = rng_from_seed(seed);
    let mut y = p.space.x0;
    let mut t = 0.0;
    let cap = (horizon / dt).ceil() as usize + 1;
    let mut times = Vec::with_capacity(cap.min(1 << 22));
    let mut values = Vec::with_capacity(cap.min(1 << 22));
    times.push(0.0);
    values.push(y);
    let slack = 1e-9 * dt;
    while horizon - t > slack {
        let m = p.mu.eval(y);
        let s = p.sigma.eval(y);
        if !(m.is_finite() && s.is_finite()) {
            return Err(SimError::CoefficientUndefined { x: y, t });
        }
        let dist = (y - l).min(r - y);
        let mut h = dt;
        while 4.0 * h <= max_step
            && PROXIMITY * s.abs() * (4.0 * h).sqrt() <= dist
            && 40.0 * m.abs() * h <= dist.min(1.0 + y.abs())
        {
            h *= 4.0;
        }
        let mut h = h.min(horizon - t);
        let mut halvings = 0;
        while PROXIMITY * s.abs() * h.sqrt() > dist && halvings < MAX_HALVINGS {
            h *= 0.5;
            halvings += 1;
        }
        let y1 = y + m * h + s * h.sqrt() * normal(&mut rng);
        if !(y1 > l && y1 < r) {
            let endpoint = if y1 <= l || y1.is_nan() && y < 0.5 * (l + r) { Endpoint::Left } else { Endpoint::Right };
            let e = p.space.endpoint(endpoint);
            let frac = if e.is_finite() && y1.is_finite() && y1 != y {
                ((e - y) / (y1 - y)).clamp(0.0, 1.0)
            } else {
                1.0
            };
            let time = t + frac * h;
            times.push(time);
            values.push(e);
            return Ok(PathSample { times, values, exit: Exit::ExitAt { time, endpoint }, driving_seed: seed });
        }
        y = y1;
        t += h;
        times.push(t);
        values.push(y);
    }
    Ok(PathSample { times, values, exit: Exit::NoExit { horizon }, driving_seed: seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffspec::{parse_expr, StateSpace};

    fn problem(l: f64, r: f64, x0: f64, mu: &str, sigma: &str) -> Problem {
        Problem::new(
            StateSpace::new(l, r, x0).unwrap(),
            parse_expr(mu).unwrap(),
            parse_expr(sigma).unwrap(),
            parse_expr("1").unwrap(),
        )
    }

    #[test]
    fn exit_is_absorbing_and_interpolated() {
        let p = problem(0.0, 1.0, 0.5, "0", "1");
        let path = simulate_diffusion(&p, 1e-2, 100.0, 3).unwrap();
        match path.exit {
            Exit::ExitAt { time, endpoint } => {
                assert_eq!(path.terminal_time(), time);
                assert_eq!(path.terminal_value(), p.space.endpoint(endpoint));
                let n = path.times.len();
                assert!(path.times[n - 1] >= path.times[n - 2]);
                assert!(path.values[..n - 1].iter().all(|&v| v > 0.0 && v < 1.0));
            }
            Exit::NoExit { .. } => panic!("BM on (0,1) must exit well before t=100"),
        }
        assert!(path.times.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn undefined_coefficient_aborts() {
        let p = problem(-1.0, 1.0, 0.5, "log(x)", "1");
        let e = simulate_diffusion(&p, 1e-2, 10.0, 1);
        assert!(matches!(e, Err(SimError::CoefficientUndefined { .. })));
    }

    #[test]
    fn growth_keeps_fine_steps_near_boundary() {
        let p = problem(0.0, f64::INFINITY, 1.0, "1/x", "1");
        let path = simulate_diffusion_with_growth(&p, 1e-3, 10.0, 1e3, 2).unwrap();
        for i in 0..path.times.len() - 1 {
            let h = path.times[i + 1] - path.times[i];
            assert!(PROXIMITY * h.sqrt() <= path.values[i] || h <= 1e-3 + 1e-15);
        }
        assert!(path.times.len() < 1_000_000);
    }

    #[test]
    fn same_seed_same_path() {
        let p = problem(f64::NEG_INFINITY, f64::INFINITY, 0.0, "-x", "1");
        assert_eq!(simulate_diffusion(&p, 1e-2, 5.0, 9), simulate_diffusion(&p, 1e-2, 5.0, 9));
        assert!(simulate_diffusion(&p, 0.0, 5.0, 9).is_err());
    }
}
