//! Brownian motion run until it first reaches a level `r` above its start.

use super::diffusion::{MAX_HALVINGS, PROXIMITY};
use super::rng::{normal, rng_from_seed};
use super::{Exit, PathSample};
use crate::coeffspec::Endpoint;
use rand::Rng;

/// Stored path of `B` from `x0` stopped at `τ_r`, on a grid of step `dt`
/// halved near `r`. `NoExit` when `max_time` is reached first.
pub fn simulate_bm_to_hit(x0: f64, r: f64, dt: f64, seed: u64, max_time: f64) -> PathSample {
    assert!(x0 <= r, "start must not exceed the level");
    let mut times = vec![0.0];
    let mut values = vec![x0];
    if x0 == r {
        return PathSample { times, values, exit: Exit::ExitAt { time: 0.0, endpoint: Endpoint::Right }, driving_seed: seed };
    }
    let mut rng = rng_from_seed(seed);
    let walk = walk_to_hit(x0, r, dt, max_time, Some(f64::NEG_INFINITY), &mut rng, |seg| {
        times.push(seg.t + seg.h);
        values.push(seg.b1);
    });
    let exit = match walk.tau {
        Some(time) => Exit::ExitAt { time, endpoint: Endpoint::Right },
        None => Exit::NoExit { horizon: max_time },
    };
    PathSample { times, values, exit, driving_seed: seed }
}

/// One step of a streamed walk: from `b0` at time `t` to `b1` at `t + h`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment {
    pub t: f64,
    pub h: f64,
    pub b0: f64,
    pub b1: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct HitWalk {
    pub tau: Option<f64>,
}

/// Largest `dt·4^j` (capped at `4^15`) with `PROXIMITY·√h ≤ room`, or `dt`.
pub(crate) fn grown_step(dt: f64, room: f64) -> f64 {
    let mut h = dt;
    for _ in 0..15 {
        let next = 4.0 * h;
        if PROXIMITY * next.sqrt() > room {
            break;
        }
        h = next;
    }
    h
}

/// Streams a Brownian path from `x0` until it reaches `r` or `max_time`.
///
/// Above `fine_lo` steps are `dt`, halved near `r`. Below it the step grows
/// geometrically while a ten-standard-deviation margin separates the walker
/// from `fine_lo`, which leaves the hitting time law intact and keeps
/// occupation statistics above `fine_lo` on the `dt` grid. With
/// `fine_lo = None` the margin is measured to `r` itself.
pub(crate) fn walk_to_hit<R: Rng, V: FnMut(Segment)>(
    x0: f64,
    r: f64,
    dt: f64,
    max_time: f64,
    fine_lo: Option<f64>,
    rng: &mut R,
    mut visit: V,
) -> HitWalk {
    let mut t = 0.0;
    let mut b = x0;
    let slack = 1e-12 * dt;
    while max_time - t > slack {
        let dist = r - b;
        let room = match fine_lo {
            Some(lo) if b < lo => lo - b,
            Some(_) => 0.0,
            None => dist,
        };
        let mut h = grown_step(dt, room).min(max_time - t);
        let mut halvings = 0;
        while PROXIMITY * h.sqrt() > dist && halvings < MAX_HALVINGS {
            h *= 0.5;
            halvings += 1;
        }
        let b1 = b + h.sqrt() * normal(rng);
        if b1 >= r {
            let frac = ((r - b) / (b1 - b)).clamp(0.0, 1.0);
            visit(Segment { t, h: frac * h, b0: b, b1: r });
            let tau = t + frac * h;
            return HitWalk { tau: Some(tau) };
        }
        visit(Segment { t, h, b0: b, b1 });
        t += h;
        b = b1;
    }
    HitWalk { tau: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hit_at_start_is_immediate() {
        let p = simulate_bm_to_hit(1.0, 1.0, 1e-3, 0, 10.0);
        assert_eq!(p.exit_time(), Some(0.0));
    }

    #[test]
    fn stored_path_ends_at_level() {
        let p = simulate_bm_to_hit(0.0, 0.5, 1e-3, 11, 1e4);
        assert_eq!(p.terminal_value(), 0.5);
        assert!(p.values[..p.values.len() - 1].iter().all(|&v| v < 0.5));
        assert_eq!(p.exit_time(), Some(p.terminal_time()));
    }

    #[test]
    fn grown_steps_respect_margin() {
        assert_eq!(grown_step(1e-3, 0.0), 1e-3);
        let h = grown_step(1e-3, 5.0);
        assert!(PROXIMITY * h.sqrt() <= 5.0 && PROXIMITY * (4.0 * h).sqrt() > 5.0);
    }
}
