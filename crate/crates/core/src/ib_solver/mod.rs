//! Information bottleneck over finite alphabets.
//!
//! Minimizes `I(X; X̂) − β·I(Y; X̂)` over stochastic encoders `p(x̂ | x)` with
//! the alternating self-consistent updates
//!
//! ```text
//! p(x̂|x) ∝ p(x̂) · exp(−β · KL(p(y|x) ‖ p(y|x̂)))
//! p(x̂)   = Σ_x p(x) p(x̂|x)
//! p(y|x̂) = Σ_x p(y|x) p(x|x̂)
//! ```
//!
//! Each update exactly minimizes the same free energy over one block of
//! variables, so the Lagrangian is non-increasing along a trajectory. The
//! fixed point reached depends on the start. [`solve_ib`] therefore runs a
//! family of starts and keeps the best:
//!
//! * `restarts` random encoders, each row drawn from Dirichlet(1);
//! * the same draws hardened to their row argmax, then improved by
//!   single-symbol moves;
//! * greedy agglomerative merging, improved the same way;
//! * the constant encoder and, when `|X̂| ≥ |X|`, the identity;
//! * an optional caller-provided warm start and an optional annealing path.
//!
//! Starts are independent and run on the rayon pool. The reduction walks them
//! in a fixed order (warm, constant, identity, agglomerative, hardened, random,
//! annealed) and only replaces the incumbent on a relative improvement above
//! 1e-12, so results do not depend on scheduling.

mod oracle;
mod problem;
mod search;

use rayon::prelude::*;
use serde::Serialize;

pub use oracle::{brute_force_ib, MAX_ENUMERATION};

use crate::error::{Error, Result};
use crate::info_theory::{
    mutual_information, push_through, Channel, Distribution, JointDistribution,
};
use crate::sampling::{dirichlet_ones, rng_from_seed};
use crate::scalar::Scalar;
use problem::{one_hot, Descent, Problem};

/// Relative margin a later start must beat the current best by.
const TIE_SLACK: f64 = 1e-12;

/// Slack for the monotone-relevance guarantee of [`anneal_ib`].
pub const MONOTONE_SLACK: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig<T> {
    /// Trade-off multiplier on the relevance term.
    pub beta: T,
    /// Alphabet size of the compressed representation.
    pub bottleneck_cardinality: usize,
    pub max_iterations: usize,
    /// Stop once the Lagrangian changes by less than this in one update.
    pub convergence_tol: T,
    pub restarts: usize,
    pub rng_seed: u64,
    /// Increasing β values to anneal through before solving at `beta`.
    pub anneal: Option<Vec<T>>,
    /// Extra start, `|X| × |X̂|`.
    #[serde(skip)]
    pub warm_start: Option<Channel<T>>,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            beta: T::one(),
            bottleneck_cardinality: 2,
            max_iterations: 10_000,
            convergence_tol: T::of(1e-10).max(T::epsilon() * T::of(100.0)),
            restarts: 10,
            rng_seed: 0,
            anneal: None,
            warm_start: None,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn new(beta: T, bottleneck_cardinality: usize) -> Self {
        Self {
            beta,
            bottleneck_cardinality,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_warm_start(mut self, encoder: Channel<T>) -> Self {
        self.warm_start = Some(encoder);
        self
    }

    pub fn with_anneal(mut self, schedule: Vec<T>) -> Self {
        self.anneal = Some(schedule);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || self.beta < T::zero() {
            return Err(Error::Config(format!(
                "beta must be finite and non-negative, got {}",
                self.beta
            )));
        }
        if self.bottleneck_cardinality == 0 {
            return Err(Error::Config(
                "bottleneck cardinality must be at least 1".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        if self.convergence_tol.is_nan() || self.convergence_tol <= T::zero() {
            return Err(Error::Config("convergence_tol must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if let Some(schedule) = &self.anneal {
            check_schedule(schedule)?;
        }
        Ok(())
    }
}

/// Outcome of one bottleneck solve. All information quantities are
/// recomputed from `encoder`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IbSolution<T> {
    /// `p(x̂ | x)`.
    pub encoder: Channel<T>,
    /// `p(x̂)`.
    pub marginal: Distribution<T>,
    /// `p(y | x̂)`; clusters without mass decode to `p(y)`.
    pub decoder: Channel<T>,
    pub i_x_xhat: T,
    pub i_y_xhat: T,
    pub lagrangian: T,
    pub beta: T,
    pub iterations_used: usize,
    pub converged: bool,
}

impl<T: Scalar> IbSolution<T> {
    /// Derives marginal, decoder and information terms from an encoder.
    pub fn from_encoder(
        j: &JointDistribution<T>,
        encoder: Channel<T>,
        beta: T,
        iterations_used: usize,
        converged: bool,
    ) -> Result<Self> {
        let px = j.marginal_x();
        let with_x = JointDistribution::from_marginal_and_channel(&px, &encoder)?;
        let with_y = push_through(j, &encoder)?;
        let i_x_xhat = mutual_information(&with_x);
        let i_y_xhat = mutual_information(&with_y);
        Ok(Self {
            marginal: with_y.marginal_x(),
            decoder: with_y.conditional_y_given_x(),
            encoder,
            i_x_xhat,
            i_y_xhat,
            lagrangian: i_x_xhat - beta * i_y_xhat,
            beta,
            iterations_used,
            converged,
        })
    }
}

/// One point of the relevance/compression trade-off curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InfoCurvePoint<T> {
    pub beta: T,
    pub i_x_xhat: T,
    pub i_y_xhat: T,
}

/// `I(X; X̂) − β·I(Y; X̂)` for the given encoder.
pub fn ib_lagrangian<T: Scalar>(
    j: &JointDistribution<T>,
    encoder: &Channel<T>,
    beta: T,
) -> Result<T> {
    if encoder.in_size() != j.x_size() {
        return Err(Error::dimension(
            "encoder input vs joint x",
            j.x_size(),
            encoder.in_size(),
        ));
    }
    let with_x = JointDistribution::from_marginal_and_channel(&j.marginal_x(), encoder)?;
    let with_y = push_through(j, encoder)?;
    Ok(mutual_information(&with_x) - beta * mutual_information(&with_y))
}

/// A single self-consistent update of `encoder` at trade-off `beta`.
pub fn ib_update<T: Scalar>(
    j: &JointDistribution<T>,
    encoder: &Channel<T>,
    beta: T,
) -> Result<Channel<T>> {
    if encoder.in_size() != j.x_size() {
        return Err(Error::dimension(
            "encoder input vs joint x",
            j.x_size(),
            encoder.in_size(),
        ));
    }
    let k = encoder.out_size();
    let next = Problem::new(j, beta).update(encoder.probs(), k);
    Ok(Channel::from_rows_unchecked(j.x_size(), k, next))
}

#[derive(Clone, Copy, Debug)]
enum Start {
    Dirichlet(usize),
    Hardened(usize),
    Agglomerative,
    Constant,
    Identity,
    Warm,
    Annealed,
}

fn dirichlet_rows<T: Scalar>(seed: u64, nx: usize, k: usize) -> Vec<T> {
    let mut rng = rng_from_seed(seed);
    (0..nx)
        .flat_map(|_| dirichlet_ones(&mut rng, k))
        .map(T::of)
        .collect()
}

fn row_argmax<T: Scalar>(enc: &[T], k: usize) -> Vec<usize> {
    enc.chunks(k)
        .map(|row| {
            let mut best = 0;
            for c in 1..k {
                if row[c] > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

struct Context<'a, T> {
    problem: Problem<T>,
    cfg: &'a SolverConfig<T>,
    k: usize,
}

impl<T: Scalar> Context<'_, T> {
    fn descend(&self, start: Vec<T>) -> Descent<T> {
        self.problem.descend(
            start,
            self.k,
            self.cfg.max_iterations,
            self.cfg.convergence_tol,
        )
    }

    fn seed(&self, restart: usize) -> u64 {
        self.cfg.rng_seed.wrapping_add(restart as u64)
    }

    fn run(&self, start: Start) -> Descent<T> {
        let (nx, k) = (self.problem.nx, self.k);
        match start {
            Start::Dirichlet(r) => self.descend(dirichlet_rows(self.seed(r), nx, k)),
            Start::Hardened(r) => {
                let hard = row_argmax(&dirichlet_rows::<T>(self.seed(r), nx, k), k);
                let refined = search::sequential_refine(&self.problem, hard, k);
                self.descend(one_hot(&refined, k))
            }
            Start::Agglomerative => {
                let merged = search::agglomerate(&self.problem, k);
                let refined = search::sequential_refine(&self.problem, merged, k);
                self.descend(one_hot(&refined, k))
            }
            Start::Constant => self.descend(one_hot(&vec![0; nx], k)),
            Start::Identity => self.descend(one_hot(&(0..nx).collect::<Vec<_>>(), k)),
            Start::Warm => {
                let warm = self.cfg.warm_start.as_ref().expect("warm start present");
                self.descend(warm.probs().to_vec())
            }
            Start::Annealed => self.annealed(),
        }
    }

    /// Follows the annealing schedule below `beta`, warm-starting each step.
    fn annealed(&self) -> Descent<T> {
        let schedule = self.cfg.anneal.as_deref().unwrap_or(&[]);
        let mut enc = dirichlet_rows(self.seed(0), self.problem.nx, self.k);
        for &b in schedule.iter().filter(|&&b| b < self.problem.beta) {
            let stage = self.problem.with_beta(b);
            enc = stage
                .descend(
                    enc,
                    self.k,
                    self.cfg.max_iterations,
                    self.cfg.convergence_tol,
                )
                .encoder;
        }
        self.descend(enc)
    }
}

/// Minimizes the bottleneck Lagrangian for `j` under `cfg`.
pub fn solve_ib<T: Scalar>(
    j: &JointDistribution<T>,
    cfg: &SolverConfig<T>,
) -> Result<IbSolution<T>> {
    cfg.validate()?;
    let (nx, k) = (j.x_size(), cfg.bottleneck_cardinality);
    if let Some(w) = &cfg.warm_start {
        if w.in_size() != nx || w.out_size() != k {
            return Err(Error::dimension(
                "warm start encoder cells",
                nx * k,
                w.in_size() * w.out_size(),
            ));
        }
    }
    if cfg.beta == T::zero() {
        return IbSolution::from_encoder(j, Channel::constant(nx, k, 0)?, cfg.beta, 0, true);
    }

    // Near-ties go to the earliest start, so structured encoders are listed
    // before random ones.
    let mut starts = Vec::new();
    if cfg.warm_start.is_some() {
        starts.push(Start::Warm);
    }
    starts.push(Start::Constant);
    if k >= nx {
        starts.push(Start::Identity);
    }
    starts.push(Start::Agglomerative);
    starts.extend((0..cfg.restarts).map(Start::Hardened));
    starts.extend((0..cfg.restarts).map(Start::Dirichlet));
    if cfg.anneal.is_some() {
        starts.push(Start::Annealed);
    }

    let ctx = Context {
        problem: Problem::new(j, cfg.beta),
        cfg,
        k,
    };
    let runs: Vec<Descent<T>> = starts.par_iter().map(|&s| ctx.run(s)).collect();
    let best = runs
        .into_iter()
        .reduce(|best, d| {
            let slack = T::of(TIE_SLACK) * best.lagrangian.abs().max(T::one());
            if d.lagrangian < best.lagrangian - slack {
                d
            } else {
                best
            }
        })
        .expect("at least one start");
    let encoder = Channel::from_rows_unchecked(nx, k, best.encoder);
    IbSolution::from_encoder(j, encoder, cfg.beta, best.iterations, best.converged)
}

fn check_schedule<T: Scalar>(schedule: &[T]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::Config("annealing schedule is empty".into()));
    }
    for (i, &b) in schedule.iter().enumerate() {
        if !b.is_finite() || b < T::zero() {
            return Err(Error::Config(format!(
                "schedule entry {i} is {b}, expected a finite non-negative beta"
            )));
        }
        if i > 0 && b <= schedule[i - 1] {
            return Err(Error::Config(format!(
                "schedule must be strictly increasing, entry {i} is {b} after {}",
                schedule[i - 1]
            )));
        }
    }
    Ok(())
}

/// Traces the trade-off curve over `schedule`.
///
/// The first β is solved with the full start family of `cfg`; every later β
/// is warm-started from the previous encoder. The last β also gets a full
/// solve, from which a second warm-started chain runs back down the schedule. Each reported
/// point is the lowest-Lagrangian encoder among all encoders found, evaluated
/// at that point's β. Minimizing over one common candidate set makes
/// `I(Y; X̂)` non-decreasing along the schedule.
pub fn anneal_ib<T: Scalar>(
    j: &JointDistribution<T>,
    schedule: &[T],
    cfg: &SolverConfig<T>,
) -> Result<Vec<InfoCurvePoint<T>>> {
    check_schedule(schedule)?;
    let k = cfg.bottleneck_cardinality;
    let full = |beta: T| {
        solve_ib(
            j,
            &SolverConfig {
                beta,
                anneal: None,
                ..cfg.clone()
            },
        )
    };
    let first = full(schedule[0])?;
    let base = Problem::new(j, schedule[0]);
    let warm = |beta: T, enc: &[T]| -> Vec<T> {
        base.with_beta(beta)
            .descend(enc.to_vec(), k, cfg.max_iterations, cfg.convergence_tol)
            .encoder
    };

    let mut candidates: Vec<Vec<T>> = vec![first.encoder.probs().to_vec()];
    for &beta in &schedule[1..] {
        let next = warm(beta, candidates.last().expect("non-empty"));
        candidates.push(next);
    }
    // The forward chain can stall on a fixed point such as the constant
    // encoder, so the backward chain starts from an independent solve.
    let mut down = if schedule.len() > 1 {
        full(*schedule.last().expect("non-empty"))?
            .encoder
            .probs()
            .to_vec()
    } else {
        candidates[0].clone()
    };
    candidates.push(down.clone());
    for &beta in schedule.iter().rev().skip(1) {
        down = warm(beta, &down);
        candidates.push(down.clone());
    }

    let terms: Vec<(T, T)> = candidates
        .iter()
        .map(|enc| {
            let (ix, iy, _) = base.evaluate(enc, k);
            (ix, iy)
        })
        .collect();
    Ok(schedule
        .iter()
        .map(|&beta| {
            let (ix, iy) = terms
                .iter()
                .copied()
                .reduce(|a, b| {
                    if b.0 - beta * b.1 < a.0 - beta * a.1 {
                        b
                    } else {
                        a
                    }
                })
                .expect("non-empty");
            InfoCurvePoint {
                beta,
                i_x_xhat: ix,
                i_y_xhat: iy,
            }
        })
        .collect())
}
