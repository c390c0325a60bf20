//! Occupation-density estimates of local time.

use super::PathSample;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalTimeProfile {
    pub levels: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

/// `L̂^x_t = |{u ≤ t : |Y_u − x| < h}| / (2h)` on a stored path, using the
/// value at the start of each step.
pub fn local_time_profile(path: &PathSample, levels: &[f64], bandwidth: f64) -> LocalTimeProfile {
    local_time_profile_with_clock(path, levels, bandwidth, |_| 1.0)
}

/// Occupation density measured on the clock `σ²(Y_u) du`, which turns the
/// occupation estimate of a diffusion into its semimartingale local time.
pub fn local_time_profile_with_clock<C: Fn(f64) -> f64>(
    path: &PathSample,
    levels: &[f64],
    bandwidth: f64,
    clock: C,
) -> LocalTimeProfile {
    assert!(bandwidth > 0.0, "bandwidth must be positive");
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| levels[a].total_cmp(&levels[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| levels[i]).collect();
    let mut mass = vec![0.0; levels.len()];
    for i in 0..path.times.len().saturating_sub(1) {
        let y = path.values[i];
        let h = path.times[i + 1] - path.times[i];
        let lo = sorted.partition_point(|&x| x <= y - bandwidth);
        let w = h * clock(y);
        for k in lo..sorted.len() {
            if sorted[k] >= y + bandwidth {
                break;
            }
            mass[order[k]] += w;
        }
    }
    let density = mass.into_iter().map(|m| m / (2.0 * bandwidth)).collect();
    LocalTimeProfile { levels: levels.to_vec(), density, bandwidth }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simkit::Exit;

    fn path(values: Vec<f64>) -> PathSample {
        let times = (0..values.len()).map(|i| i as f64 * 0.1).collect();
        PathSample { times, values, exit: Exit::NoExit { horizon: 1.0 }, driving_seed: 0 }
    }

    #[test]
    fn unvisited_level_is_zero() {
        let p = path(vec![0.0, 0.1, 0.2, 0.1]);
        let prof = local_time_profile(&p, &[5.0, 0.1], 0.05);
        assert_eq!(prof.density[0], 0.0);
        assert!(prof.density[1] > 0.0);
    }

    #[test]
    fn tiled_levels_conserve_time() {
        let p = path(vec![0.0, 0.33, -0.2, 0.71, 0.4, 0.05]);
        let h = 0.05;
        let levels: Vec<f64> = (-20..20).map(|k| k as f64 * 2.0 * h + 1e-9).collect();
        let prof = local_time_profile(&p, &levels, h);
        let total: f64 = prof.density.iter().map(|d| d * 2.0 * h).sum();
        assert!((total - 0.5).abs() < 1e-12);
    }
}
