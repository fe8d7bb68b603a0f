//! Coot optimization algorithm (COA) for box-constrained minimization.
//!
//! The swarm is split into leaders and ordinary coots. Each iteration every coot either
//! follows its leader, averages with the previous coot (chain movement) or moves towards a
//! random point; afterwards every leader is pushed around the global best. All random draws
//! come from a single [`ChaCha8Rng`] seeded from [`CootConfig::seed`], consumed in this order:
//!
//! 1. initial positions, coot by coot, dimension by dimension;
//! 2. the leader subset;
//! 3. per iteration: one draw deciding vector- or scalar-valued coefficients, then per coot one
//!    branch draw followed by that movement's own draws, then per leader its update draws.
//!
//! Positions leaving the box are clamped back onto it.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interval of `R` in the `cos(2πR)` factor of the leader update.
pub const COS_ARG_RANGE: (f64, f64) = (-1.0, 1.0);

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let space = Self { lower, upper };
        space.validate()?;
        Ok(space)
    }

    /// The same `[lo, hi]` interval on every axis.
    pub fn uniform(dims: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dims], vec![hi; dims])
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_empty() {
            return Err(Error::Parameter("search space needs at least one dimension".into()));
        }
        if self.lower.len() != self.upper.len() {
            return Err(Error::Parameter(format!(
                "bound length mismatch: {} lower vs {} upper",
                self.lower.len(),
                self.upper.len()
            )));
        }
        for (d, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::Parameter(format!(
                    "invalid bounds [{lo}, {hi}] on dimension {d}"
                )));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, pos: &[f64]) -> bool {
        pos.len() == self.dims()
            && pos
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| (*lo..=*hi).contains(x))
    }

    pub fn clamp(&self, pos: &mut [f64]) {
        for (x, (lo, hi)) in pos.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *x = x.clamp(*lo, *hi);
        }
    }

    /// A uniform point in the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| rng.random::<f64>() * (hi - lo) + lo)
            .collect()
    }
}

/// Swarm hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CootConfig {
    pub population: usize,
    pub max_iters: usize,
    /// Leaders are `ceil(population * leader_fraction)`.
    pub leader_fraction: f64,
    /// Probability of drawing vector-valued (rather than scalar) random coefficients in an
    /// iteration.
    pub probability_p: f64,
    pub seed: u64,
}

impl Default for CootConfig {
    fn default() -> Self {
        Self {
            population: 10,
            max_iters: 10,
            leader_fraction: 0.1,
            probability_p: 0.5,
            seed: 7,
        }
    }
}

impl CootConfig {
    pub fn n_leaders(&self) -> usize {
        // Guard against 10 * 0.1 style products landing a hair above an integer.
        (self.population as f64 * self.leader_fraction - 1e-9).ceil().max(0.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Parameter(format!(
                "population must be >= 2, got {}",
                self.population
            )));
        }
        if self.max_iters < 1 {
            return Err(Error::Parameter("max_iters must be >= 1".into()));
        }
        if !(self.leader_fraction > 0.0 && self.leader_fraction < 1.0) {
            return Err(Error::Parameter(format!(
                "leader_fraction must lie in (0, 1), got {}",
                self.leader_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.probability_p) {
            return Err(Error::Parameter(format!(
                "probability_p must lie in [0, 1], got {}",
                self.probability_p
            )));
        }
        let leaders = self.n_leaders();
        if leaders < 1 || leaders >= self.population {
            return Err(Error::Parameter(format!(
                "{leaders} leaders out of {} coots leaves no followers",
                self.population
            )));
        }
        Ok(())
    }
}

/// Whether the random coefficients of an iteration vary per dimension or are shared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrawShape {
    Vector,
    Scalar,
}

impl DrawShape {
    pub fn choose<R: Rng + ?Sized>(probability_p: f64, rng: &mut R) -> Self {
        if rng.random::<f64>() < probability_p {
            DrawShape::Vector
        } else {
            DrawShape::Scalar
        }
    }

    fn draw<R: Rng + ?Sized>(self, dims: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
        match self {
            DrawShape::Vector => (0..dims).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect(),
            DrawShape::Scalar => vec![lo + (hi - lo) * rng.random::<f64>(); dims],
        }
    }
}

/// Best fitness after each completed iteration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub best_per_iteration: Vec<f64>,
}

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.best_per_iteration.len()
    }

    pub fn is_empty(&self) -> bool {
        self.best_per_iteration.is_empty()
    }

    pub fn last(&self) -> Option<f64> {
        self.best_per_iteration.last().copied()
    }

    pub fn is_non_increasing(&self) -> bool {
        self.best_per_iteration.windows(2).all(|w| w[1] <= w[0])
    }

    /// `iteration,best_fitness` CSV with 1-based iterations.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,best_fitness\n");
        for (i, v) in self.best_per_iteration.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, v));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if self.is_empty() {
            return Err(Error::Report("refusing to export an empty convergence trace".into()));
        }
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// `(A, B)` for 1-based iteration `iter`.
pub fn coefficients_ab(iter: usize, max_iters: usize) -> (f64, f64) {
    let progress = iter as f64 * (1.0 / max_iters as f64);
    (1.0 - progress, 2.0 - progress)
}

/// `pos + A * rn2 * (target - pos)`, clamped.
pub fn random_step(pos: &[f64], a: f64, rn2: &[f64], target: &[f64], space: &SearchSpace) -> Vec<f64> {
    let mut out: Vec<f64> = pos
        .iter()
        .zip(rn2.iter().zip(target))
        .map(|(x, (r, t))| x + a * r * (t - x))
        .collect();
    space.clamp(&mut out);
    out
}

/// Moves towards a freshly drawn point of the box.
pub fn random_movement<R: Rng + ?Sized>(
    pos: &[f64],
    a: f64,
    shape: DrawShape,
    space: &SearchSpace,
    rng: &mut R,
) -> Vec<f64> {
    let target = space.sample(rng);
    let rn2 = shape.draw(space.dims(), 0.0, 1.0, rng);
    random_step(pos, a, &rn2, &target, space)
}

pub fn chain_movement(prev: &[f64], cur: &[f64]) -> Vec<f64> {
    prev.iter().zip(cur).map(|(p, c)| 0.5 * (p + c)).collect()
}

/// 1-based leader assigned to 1-based coot `i`.
pub fn leader_index(i: usize, n_leaders: usize) -> usize {
    1 + i % n_leaders
}

/// `B * r3 * cos(2πr) * (anchor - current) + anchor`, clamped.
pub fn anchored_step(anchor: &[f64], current: &[f64], b: f64, r3: &[f64], r: &[f64], space: &SearchSpace) -> Vec<f64> {
    let mut out: Vec<f64> = (0..anchor.len())
        .map(|d| b * r3[d] * (2.0 * PI * r[d]).cos() * (anchor[d] - current[d]) + anchor[d])
        .collect();
    space.clamp(&mut out);
    out
}

fn anchored_move<R: Rng + ?Sized>(
    anchor: &[f64],
    current: &[f64],
    b: f64,
    shape: DrawShape,
    space: &SearchSpace,
    rng: &mut R,
) -> Vec<f64> {
    let dims = space.dims();
    let r3 = shape.draw(dims, 0.0, 1.0, rng);
    let r = shape.draw(dims, COS_ARG_RANGE.0, COS_ARG_RANGE.1, rng);
    anchored_step(anchor, current, b, &r3, &r, space)
}

/// Leader search around the global best.
pub fn leader_update<R: Rng + ?Sized>(
    leader: &[f64],
    g_best: &[f64],
    b: f64,
    shape: DrawShape,
    space: &SearchSpace,
    rng: &mut R,
) -> Vec<f64> {
    anchored_move(g_best, leader, b, shape, space, rng)
}

/// An ordinary coot moving around its assigned leader.
pub fn follow_leader<R: Rng + ?Sized>(
    coot: &[f64],
    leader: &[f64],
    b: f64,
    shape: DrawShape,
    space: &SearchSpace,
    rng: &mut R,
) -> Vec<f64> {
    anchored_move(leader, coot, b, shape, space, rng)
}

/// Positions and fitness of the whole swarm.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub coot_positions: Vec<Vec<f64>>,
    pub coot_fitness: Vec<f64>,
    pub leader_positions: Vec<Vec<f64>>,
    pub leader_fitness: Vec<f64>,
    pub g_best: Vec<f64>,
    pub g_best_fitness: f64,
    /// Completed iterations.
    pub iteration: usize,
    pub evaluations: usize,
}

fn evaluate<F>(fitness: &mut F, pos: &[f64], evaluations: &mut usize) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let value = fitness(pos)?;
    *evaluations += 1;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Optimization {
            position: pos.to_vec(),
            value,
        })
    }
}

/// Draws and evaluates the initial swarm and picks the first global best.
pub fn init_population<F, R>(
    space: &SearchSpace,
    config: &CootConfig,
    rng: &mut R,
    fitness: &mut F,
) -> Result<OptimizerState>
where
    F: FnMut(&[f64]) -> Result<f64>,
    R: Rng + ?Sized,
{
    space.validate()?;
    config.validate()?;
    let n = config.population;
    let positions: Vec<Vec<f64>> = (0..n).map(|_| space.sample(rng)).collect();
    let mut is_leader = vec![false; n];
    for idx in rand::seq::index::sample(rng, n, config.n_leaders()) {
        is_leader[idx] = true;
    }

    let mut evaluations = 0;
    let mut values = Vec::with_capacity(n);
    for pos in &positions {
        values.push(evaluate(fitness, pos, &mut evaluations)?);
    }

    let mut g_best_idx = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[g_best_idx] {
            g_best_idx = i;
        }
    }

    let mut state = OptimizerState {
        coot_positions: Vec::new(),
        coot_fitness: Vec::new(),
        leader_positions: Vec::new(),
        leader_fitness: Vec::new(),
        g_best: positions[g_best_idx].clone(),
        g_best_fitness: values[g_best_idx],
        iteration: 0,
        evaluations,
    };
    for ((pos, v), leader) in positions.into_iter().zip(values).zip(is_leader) {
        if leader {
            state.leader_positions.push(pos);
            state.leader_fitness.push(v);
        } else {
            state.coot_positions.push(pos);
            state.coot_fitness.push(v);
        }
    }
    Ok(state)
}

impl OptimizerState {
    /// Runs iteration `self.iteration + 1` of `max_iters`.
    pub fn iterate<F, R>(
        &mut self,
        space: &SearchSpace,
        config: &CootConfig,
        rng: &mut R,
        fitness: &mut F,
    ) -> Result<()>
    where
        F: FnMut(&[f64]) -> Result<f64>,
        R: Rng + ?Sized,
    {
        let t = self.iteration + 1;
        let (a, b) = coefficients_ab(t, config.max_iters);
        let shape = DrawShape::choose(config.probability_p, rng);
        let n_leaders = self.leader_positions.len();

        for idx in 0..self.coot_positions.len() {
            let i = idx + 1;
            let k = leader_index(i, n_leaders) - 1;
            let branch: f64 = rng.random();
            let next = if branch > 0.5 {
                follow_leader(
                    &self.coot_positions[idx],
                    &self.leader_positions[k],
                    b,
                    shape,
                    space,
                    rng,
                )
            } else if branch < 0.5 && i != 1 {
                chain_movement(&self.coot_positions[idx - 1], &self.coot_positions[idx])
            } else {
                random_movement(&self.coot_positions[idx], a, shape, space, rng)
            };
            let value = evaluate(fitness, &next, &mut self.evaluations)?;
            self.coot_positions[idx] = next;
            self.coot_fitness[idx] = value;
            if value < self.g_best_fitness {
                self.g_best = self.coot_positions[idx].clone();
                self.g_best_fitness = value;
            }
            if value < self.leader_fitness[k] {
                std::mem::swap(&mut self.coot_positions[idx], &mut self.leader_positions[k]);
                std::mem::swap(&mut self.coot_fitness[idx], &mut self.leader_fitness[k]);
            }
        }

        for l in 0..n_leaders {
            let next = leader_update(&self.leader_positions[l], &self.g_best, b, shape, space, rng);
            let value = evaluate(fitness, &next, &mut self.evaluations)?;
            self.leader_positions[l] = next;
            self.leader_fitness[l] = value;
            if value < self.g_best_fitness {
                std::mem::swap(&mut self.g_best, &mut self.leader_positions[l]);
                std::mem::swap(&mut self.g_best_fitness, &mut self.leader_fitness[l]);
            }
        }

        self.iteration = t;
        Ok(())
    }

    pub fn positions(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.coot_positions
            .iter()
            .chain(&self.leader_positions)
            .chain(std::iter::once(&self.g_best))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness of the initial population.
    pub initial_best_fitness: f64,
    pub trace: ConvergenceTrace,
    pub evaluations: usize,
}

/// Minimizes `fitness` over `space`. Deterministic for a fixed `config.seed`.
pub fn run<F>(mut fitness: F, space: &SearchSpace, config: &CootConfig) -> Result<OptimizationResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = init_population(space, config, &mut rng, &mut fitness)?;
    let initial_best_fitness = state.g_best_fitness;
    let mut trace = ConvergenceTrace {
        best_per_iteration: Vec::with_capacity(config.max_iters),
    };
    for _ in 0..config.max_iters {
        state.iterate(space, config, &mut rng, &mut fitness)?;
        trace.best_per_iteration.push(state.g_best_fitness);
    }
    Ok(OptimizationResult {
        best_position: state.g_best,
        best_fitness: state.g_best_fitness,
        initial_best_fitness,
        trace,
        evaluations: state.evaluations,
    })
}
