//! Synthetic benchmark series.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DatasetError;

/// Euler step of the Mackey–Glass delay equation.
pub const MG_STEP: f64 = 0.1;
pub const MG_DEFAULT_HISTORY: f64 = 1.2;
pub const MG_DEFAULT_TRANSIENT: usize = 1000;

/// Mackey–Glass series
/// `z[t+1] = z[t] + 0.1·(0.2·z[t−D] / (1 + z[t−D]¹⁰) − 0.1·z[t])` with
/// `D = τ / 0.1` samples and constant history `z[t] = history` for `t ≤ 0`.
///
/// The first `transient` generated values are dropped; the next `total` are
/// returned, starting at `z[transient + 1]`.
pub fn gen_mackey_glass(tau: f64, total: usize, history: f64, transient: usize) -> Result<Vec<f64>, DatasetError> {
    let delay = (tau / MG_STEP).round() as usize;
    let mut z = vec![history; delay + 1];
    z.reserve(transient + total);
    for _ in 0..transient + total {
        let now = z[z.len() - 1];
        let lagged = z[z.len() - 1 - delay];
        let next = now + MG_STEP * (0.2 * lagged / (1.0 + lagged.powi(10)) - 0.1 * now);
        if !next.is_finite() {
            return Err(DatasetError::NonFinite);
        }
        z.push(next);
    }
    Ok(z.split_off(delay + 1 + transient))
}

/// MG-17 with the default history and transient.
pub fn mackey_glass_17(total: usize) -> Result<Vec<f64>, DatasetError> {
    gen_mackey_glass(17.0, total, MG_DEFAULT_HISTORY, MG_DEFAULT_TRANSIENT)
}

pub const NARMA_DIVERGENCE_GUARD: f64 = 10.0;
pub const NARMA_MAX_REGENERATIONS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct NarmaSeries {
    /// Driving input `μ`, i.i.d. uniform on [0, 0.5].
    pub inputs: Vec<f64>,
    /// System output `z`; the first ten values are zero.
    pub outputs: Vec<f64>,
    /// Seed that produced a non-divergent draw.
    pub seed_used: u64,
    /// Number of discarded divergent draws.
    pub regenerations: usize,
}

/// NARMA-10 driven by seeded uniform inputs. A draw whose output leaves
/// `[-10, 10]` is discarded and regenerated with the next seed.
pub fn gen_narma10(total: usize, seed: u64) -> Result<NarmaSeries, DatasetError> {
    gen_narma10_guarded(total, seed, NARMA_DIVERGENCE_GUARD)
}

pub fn gen_narma10_guarded(total: usize, seed: u64, guard: f64) -> Result<NarmaSeries, DatasetError> {
    if total < 11 {
        return Err(DatasetError::TooShort { needed: 11, got: total });
    }
    for attempt in 0..=NARMA_MAX_REGENERATIONS {
        let seed_used = seed.wrapping_add(attempt as u64);
        if let Some((inputs, outputs)) = narma_draw(total, seed_used, guard) {
            return Ok(NarmaSeries { inputs, outputs, seed_used, regenerations: attempt });
        }
    }
    Err(DatasetError::PersistentDivergence { seed, attempts: NARMA_MAX_REGENERATIONS + 1 })
}

fn narma_draw(total: usize, seed: u64, guard: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu: Vec<f64> = (0..total).map(|_| rng.random_range(0.0..=0.5)).collect();
    let mut z = vec![0.0; total];
    for t in 9..total - 1 {
        let window: f64 = z[t - 9..=t].iter().sum();
        let next = 0.3 * z[t] + 0.05 * z[t] * window + 1.5 * mu[t - 9] * mu[t] + 0.1;
        if !next.is_finite() || next.abs() > guard {
            return None;
        }
        z[t + 1] = next;
    }
    Some((mu, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mackey_glass_first_step() {
        let z = gen_mackey_glass(17.0, 3, 1.2, 0).unwrap();
        let expected = 1.2 + 0.1 * (0.24 / (1.0 + 1.2f64.powi(10)) - 0.12);
        assert_eq!(z[0], expected);
        assert!((z[0] - 1.19134).abs() < 1e-5);
    }

    #[test]
    fn mackey_glass_zero_fixed_point() {
        assert!(gen_mackey_glass(17.0, 500, 0.0, 100).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mackey_glass_transient_is_a_suffix() {
        let long = gen_mackey_glass(17.0, 200, 1.2, 0).unwrap();
        let short = gen_mackey_glass(17.0, 150, 1.2, 50).unwrap();
        assert_eq!(&long[50..], &short[..]);
    }

    #[test]
    fn mackey_glass_is_bounded_and_aperiodic() {
        let z = mackey_glass_17(10_000).unwrap();
        assert!(z.iter().all(|&v| v > 0.2 && v < 1.5));
        // No lag up to half the series reproduces it.
        let half = z.len() / 2;
        for lag in 1..half {
            let max_dev = (0..half).map(|t| (z[t] - z[t + lag]).abs()).fold(0.0, f64::max);
            assert!(max_dev > 1e-3, "series repeats with lag {lag}");
        }
        // Autocorrelation decays below 1 after the first zero crossing.
        let mean = z.iter().sum::<f64>() / z.len() as f64;
        let var: f64 = z.iter().map(|v| (v - mean).powi(2)).sum();
        let acf = |lag: usize| -> f64 {
            (0..z.len() - lag).map(|t| (z[t] - mean) * (z[t + lag] - mean)).sum::<f64>() / var
        };
        let first_neg = (1..half).find(|&l| acf(l) < 0.0).expect("autocorrelation crosses zero");
        assert!((first_neg..half).step_by(7).all(|l| acf(l) < 0.99));
    }

    #[test]
    fn narma_starts_at_zero() {
        let s = gen_narma10(200, 1).unwrap();
        assert!(s.outputs[..10].iter().all(|&v| v == 0.0));
        assert_eq!(s.outputs[10], 1.5 * s.inputs[0] * s.inputs[9] + 0.1);
        assert!(s.inputs.iter().all(|&m| (0.0..=0.5).contains(&m)));
    }

    #[test]
    fn narma_matches_straight_loop_reference() {
        let total = 10_000;
        let s = gen_narma10(total, 42).unwrap();
        // 1-based transcription of the recurrence.
        let mu = |t: usize| s.inputs[t - 1];
        let mut z = vec![0.0; total + 1];
        for t in 10..total {
            let mut acc = 0.0;
            for i in 0..=9 {
                acc += z[t - i];
            }
            z[t + 1] = 0.3 * z[t] + 0.05 * z[t] * acc + 1.5 * mu(t - 9) * mu(t) + 0.1;
        }
        for t in 1..=total {
            assert!((z[t] - s.outputs[t - 1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn narma_is_reproducible() {
        assert_eq!(gen_narma10(500, 9).unwrap(), gen_narma10(500, 9).unwrap());
        assert_ne!(gen_narma10(500, 9).unwrap().inputs, gen_narma10(500, 10).unwrap().inputs);
    }

    #[test]
    fn narma_guard_regenerates_then_gives_up() {
        let err = gen_narma10_guarded(100, 0, 0.05).unwrap_err();
        assert_eq!(err, DatasetError::PersistentDivergence { seed: 0, attempts: 11 });
        assert!(matches!(gen_narma10(10, 0), Err(DatasetError::TooShort { .. })));
    }
}
