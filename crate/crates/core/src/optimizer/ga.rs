//! Binary genetic algorithm (minimization) used as the topology-search
//! baseline.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    pub crossover_rate: f64,
    /// Per-bit flip probability; `None` means `1 / length`.
    pub mutation_rate: Option<f64>,
    pub elitism: usize,
    /// Put the all-zero and all-one strings into generation 0.
    pub seed_extremes: bool,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 100,
            generations: 100,
            tournament: 3,
            crossover_rate: 0.9,
            mutation_rate: None,
            elitism: 1,
            seed_extremes: true,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn with_budget(population: usize, generations: usize, seed: u64) -> Self {
        GaConfig { population, generations, seed, ..GaConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaResult {
    pub best_bits: Vec<bool>,
    pub best_fitness: f64,
    /// Best fitness so far after generation 0, 1, …, `generations`.
    pub trace: Vec<f64>,
    pub final_population: Vec<Vec<bool>>,
    /// Distinct bitstrings evaluated.
    pub evaluations: usize,
}

/// Memoized, order-preserving batch evaluation.
struct Evaluator<'a, F> {
    f: &'a F,
    exec: Exec,
    cache: HashMap<Vec<bool>, f64>,
}

impl<F> Evaluator<'_, F>
where
    F: Fn(&[bool]) -> f64 + Sync,
{
    fn eval(&mut self, pop: &[Vec<bool>]) -> Vec<f64> {
        let mut fresh: Vec<Vec<bool>> = Vec::new();
        for ind in pop {
            if !self.cache.contains_key(ind) && !fresh.contains(ind) {
                fresh.push(ind.clone());
            }
        }
        let f = self.f;
        let values = self.exec.map(&fresh, |b| {
            let v = f(b);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        });
        self.cache.extend(fresh.into_iter().zip(values));
        pop.iter().map(|ind| self.cache[ind]).collect()
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

fn tournament(fitness: &[f64], size: usize, rng: &mut impl Rng) -> usize {
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] < fitness[best] {
            best = c;
        }
    }
    best
}

/// Minimizes `f` over bitstrings of length `len`.
///
/// Each generation keeps the `elitism` best individuals, then fills the rest
/// with one child per pair of tournament-selected parents (uniform
/// crossover with probability `crossover_rate`, otherwise a copy of the
/// first parent), followed by bit-flip mutation. NaN fitness counts as +∞.
pub fn ga_minimize<F>(len: usize, cfg: &GaConfig, exec: Exec, f: F) -> GaResult
where
    F: Fn(&[bool]) -> f64 + Sync,
{
    assert!(cfg.population >= 1 && cfg.tournament >= 1, "population and tournament size must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mutation = cfg.mutation_rate.unwrap_or(if len == 0 { 0.0 } else { 1.0 / len as f64 });
    let elitism = cfg.elitism.min(cfg.population);

    let mut pop: Vec<Vec<bool>> = Vec::with_capacity(cfg.population);
    if cfg.seed_extremes {
        pop.push(vec![false; len]);
        if cfg.population > 1 {
            pop.push(vec![true; len]);
        }
    }
    while pop.len() < cfg.population {
        pop.push((0..len).map(|_| rng.random::<bool>()).collect());
    }

    let mut evaluator = Evaluator { f: &f, exec, cache: HashMap::new() };
    let mut fitness = evaluator.eval(&pop);
    let i = argmin(&fitness);
    let (mut best_bits, mut best_fitness) = (pop[i].clone(), fitness[i]);
    let mut trace = vec![best_fitness];

    for g in 1..=cfg.generations {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)));
        let mut next: Vec<Vec<bool>> = order[..elitism].iter().map(|&i| pop[i].clone()).collect();
        while next.len() < cfg.population {
            let p1 = tournament(&fitness, cfg.tournament, &mut rng);
            let p2 = tournament(&fitness, cfg.tournament, &mut rng);
            let mut child = pop[p1].clone();
            if rng.random::<f64>() < cfg.crossover_rate {
                for (c, &b) in child.iter_mut().zip(&pop[p2]) {
                    if rng.random::<bool>() {
                        *c = b;
                    }
                }
            }
            if mutation > 0.0 {
                for c in child.iter_mut() {
                    if rng.random::<f64>() < mutation {
                        *c = !*c;
                    }
                }
            }
            next.push(child);
        }
        pop = next;
        fitness = evaluator.eval(&pop);
        let i = argmin(&fitness);
        if fitness[i] < best_fitness {
            best_fitness = fitness[i];
            best_bits = pop[i].clone();
        }
        assert!(best_fitness <= trace[g - 1], "best fitness increased at generation {g}");
        trace.push(best_fitness);
    }

    GaResult { best_bits, best_fitness, trace, final_population: pop, evaluations: evaluator.cache.len() }
}
