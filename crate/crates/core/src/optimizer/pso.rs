//! Particle swarm optimization (minimization).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InertiaSchedule {
    /// `w^l = 0.5 + 0.5·(1 − l/l_max)`.
    Linear,
    Constant(f64),
}

impl InertiaSchedule {
    pub fn weight(self, l: usize, l_max: usize) -> f64 {
        match self {
            InertiaSchedule::Linear => 0.5 + 0.5 * (1.0 - l as f64 / l_max as f64),
            InertiaSchedule::Constant(w) => w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub particles: usize,
    pub iterations: usize,
    /// Attraction to the particle's own best position.
    pub nostalgia: f64,
    /// Attraction to the swarm's best position.
    pub social: f64,
    pub inertia: InertiaSchedule,
    /// Half-width of the uniform initial position box.
    pub init_range: f64,
    /// Per-coordinate velocity bound; `None` disables clamping.
    pub velocity_clamp: Option<f64>,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            particles: 100,
            iterations: 100,
            nostalgia: 2.0,
            social: 2.0,
            inertia: InertiaSchedule::Linear,
            init_range: 1.0,
            velocity_clamp: Some(1.0),
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn with_budget(particles: usize, iterations: usize, seed: u64) -> Self {
        PsoConfig { particles, iterations, seed, ..PsoConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Swarm {
    pub particles: Vec<Particle>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
}

impl Swarm {
    /// Particles at the given positions and velocities, with no fitness
    /// recorded yet.
    pub fn from_state(positions: Vec<Vec<f64>>, velocities: Vec<Vec<f64>>) -> Self {
        assert!(!positions.is_empty(), "empty swarm");
        assert_eq!(positions.len(), velocities.len());
        let best_position = positions[0].clone();
        let particles = positions
            .into_iter()
            .zip(velocities)
            .map(|(position, velocity)| {
                assert_eq!(position.len(), velocity.len());
                Particle { best_position: position.clone(), position, velocity, best_fitness: f64::INFINITY }
            })
            .collect();
        Swarm { particles, best_position, best_fitness: f64::INFINITY }
    }

    /// Uniform positions in `[−init_range, init_range]`, zero velocities.
    pub fn random(dim: usize, cfg: &PsoConfig, rng: &mut impl Rng) -> Self {
        let r = cfg.init_range;
        let positions: Vec<Vec<f64>> = (0..cfg.particles)
            .map(|_| (0..dim).map(|_| if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 }).collect())
            .collect();
        Swarm::from_state(positions, vec![vec![0.0; dim]; cfg.particles])
    }

    /// Folds freshly evaluated fitnesses into personal and global bests.
    /// Ties keep the incumbent; the global reduction runs in particle order.
    pub fn record(&mut self, fitness: &[f64]) {
        assert_eq!(fitness.len(), self.particles.len());
        for (p, &f) in self.particles.iter_mut().zip(fitness) {
            let f = sanitize(f);
            if f < p.best_fitness {
                p.best_fitness = f;
                p.best_position.clone_from(&p.position);
            }
        }
        for p in &self.particles {
            if p.best_fitness < self.best_fitness {
                self.best_fitness = p.best_fitness;
                self.best_position.clone_from(&p.best_position);
            }
        }
    }
}

fn sanitize(f: f64) -> f64 {
    if f.is_nan() {
        f64::INFINITY
    } else {
        f
    }
}

/// One particle move with explicit random coefficients:
/// `v ← w·v + c·α·(y − x) + s_w·β·(ŷ − x)`, clamp, then `x ← x + v`.
#[allow(clippy::too_many_arguments)]
pub fn update_particle(
    position: &mut [f64],
    velocity: &mut [f64],
    personal_best: &[f64],
    global_best: &[f64],
    w: f64,
    nostalgia: f64,
    social: f64,
    alpha: f64,
    beta: f64,
    clamp: Option<f64>,
) {
    for j in 0..position.len() {
        let x = position[j];
        let mut v = w * velocity[j] + nostalgia * alpha * (personal_best[j] - x) + social * beta * (global_best[j] - x);
        if let Some(c) = clamp {
            v = v.clamp(-c, c);
        }
        velocity[j] = v;
        position[j] = x + v;
    }
}

/// Moves every particle once with inertia `w^l`. One `(α, β)` pair is
/// drawn per particle, in particle order.
pub fn pso_step(swarm: &mut Swarm, cfg: &PsoConfig, l: usize, rng: &mut impl Rng) {
    let w = cfg.inertia.weight(l, cfg.iterations);
    let global = swarm.best_position.clone();
    for p in &mut swarm.particles {
        let alpha: f64 = rng.random();
        let beta: f64 = rng.random();
        update_particle(
            &mut p.position,
            &mut p.velocity,
            &p.best_position,
            &global,
            w,
            cfg.nostalgia,
            cfg.social,
            alpha,
            beta,
            cfg.velocity_clamp,
        );
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Global-best fitness after each iteration.
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

/// Minimizes `f` over `R^dim`. Iteration `l` evaluates the current positions,
/// updates the bests, and (except after the last one) moves the swarm with
/// inertia `w^l`. NaN fitness counts as +∞.
pub fn pso_minimize<F>(dim: usize, cfg: &PsoConfig, exec: Exec, f: F) -> PsoResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    assert!(cfg.particles >= 1 && cfg.iterations >= 1, "swarm size and iteration count must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut swarm = Swarm::random(dim, cfg, &mut rng);
    let mut trace = Vec::with_capacity(cfg.iterations);
    for l in 0..cfg.iterations {
        let fitness = exec.map(&swarm.particles, |p| f(&p.position));
        swarm.record(&fitness);
        if let Some(&prev) = trace.last() {
            assert!(swarm.best_fitness <= prev, "global best increased at iteration {l}");
        }
        trace.push(swarm.best_fitness);
        if l + 1 < cfg.iterations {
            pso_step(&mut swarm, cfg, l, &mut rng);
        }
    }
    PsoResult {
        best_position: swarm.best_position,
        best_fitness: swarm.best_fitness,
        trace,
        evaluations: cfg.particles * cfg.iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn arithmetic_example() {
        let (mut x, mut v) = (vec![0.0], vec![1.0]);
        update_particle(&mut x, &mut v, &[1.0], &[2.0], 1.0, 2.0, 2.0, 0.5, 0.5, None);
        assert_eq!((x[0], v[0]), (4.0, 4.0));
        let (mut x, mut v) = (vec![0.0], vec![1.0]);
        update_particle(&mut x, &mut v, &[1.0], &[2.0], 1.0, 2.0, 2.0, 0.5, 0.5, Some(1.0));
        assert_eq!((x[0], v[0]), (1.0, 1.0));
    }

    #[test]
    fn particle_at_rest_on_the_best_stays() {
        let (mut x, mut v) = (vec![0.3, -0.7], vec![0.0, 0.0]);
        let best = x.clone();
        update_particle(&mut x, &mut v, &best, &best, 0.9, 2.0, 2.0, 0.37, 0.81, Some(1.0));
        assert_eq!(x, best);
        assert_eq!(v, vec![0.0, 0.0]);
    }

    #[test]
    fn inertia_schedule_endpoints() {
        assert_eq!(InertiaSchedule::Linear.weight(0, 100), 1.0);
        assert_eq!(InertiaSchedule::Linear.weight(100, 100), 0.5);
        let w: Vec<f64> = (0..100).map(|l| InertiaSchedule::Linear.weight(l, 100)).collect();
        assert!(w.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn inertial_drift() {
        let cfg = PsoConfig {
            nostalgia: 0.0,
            social: 0.0,
            inertia: InertiaSchedule::Constant(1.0),
            velocity_clamp: None,
            ..PsoConfig::default()
        };
        let x0 = vec![vec![0.25, -1.5], vec![3.0, 0.0]];
        let v0 = vec![vec![0.5, 2.0], vec![-0.125, 1.0]];
        let mut swarm = Swarm::from_state(x0.clone(), v0.clone());
        swarm.record(&[1.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for l in 0..7 {
            pso_step(&mut swarm, &cfg, l, &mut rng);
        }
        for (p, (x, v)) in swarm.particles.iter().zip(x0.iter().zip(&v0)) {
            for j in 0..2 {
                assert!((p.position[j] - (x[j] + 7.0 * v[j])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_makes_progress() {
        for seed in 0..5 {
            let cfg = PsoConfig::with_budget(20, 50, seed);
            let r = pso_minimize(10, &cfg, Exec::Sequential, sphere);
            assert!(r.best_fitness < r.trace[0] / 10.0, "seed {seed}: {} from {}", r.best_fitness, r.trace[0]);
            assert_eq!(r.trace.len(), 50);
            assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(sphere(&r.best_position), r.best_fitness);
        }
    }

    #[test]
    fn single_particle_single_iteration() {
        let cfg = PsoConfig::with_budget(1, 1, 7);
        let r = pso_minimize(3, &cfg, Exec::Sequential, sphere);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let expected = Swarm::random(3, &cfg, &mut rng).particles[0].position.clone();
        assert_eq!(r.best_position, expected);
        assert_eq!(r.best_fitness, sphere(&expected));
        assert_eq!(r.trace, vec![r.best_fitness]);
    }

    #[test]
    fn nan_counts_as_worst() {
        let cfg = PsoConfig::with_budget(4, 3, 1);
        let r = pso_minimize(2, &cfg, Exec::Sequential, |_| f64::NAN);
        assert_eq!(r.best_fitness, f64::INFINITY);
        assert!(r.trace.iter().all(|f| f.is_infinite()));
    }

    #[test]
    fn deterministic_and_scheduling_independent() {
        let cfg = PsoConfig::with_budget(8, 10, 11);
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] + x[2]).abs();
        let a = pso_minimize(3, &cfg, Exec::Sequential, f);
        let b = pso_minimize(3, &cfg, Exec::Sequential, f);
        let c = pso_minimize(3, &cfg, Exec::Parallel, f);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn ties_keep_the_incumbent() {
        let mut swarm = Swarm::from_state(vec![vec![0.0], vec![1.0]], vec![vec![0.0], vec![0.0]]);
        swarm.record(&[1.0, 1.0]);
        assert_eq!(swarm.best_position, vec![0.0]);
        swarm.particles[0].position = vec![5.0];
        swarm.record(&[1.0, 1.0]);
        assert_eq!(swarm.particles[0].best_position, vec![0.0]);
    }
}
