//! Scenario generation and strict-versus-skip topology comparison.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hierarchy::{
    build_hierarchy, propagate, propagate_with_warm_starts, relevant_info_profile, HierarchySpec,
    LayerSpec, ProfileRow, SkipEdge,
};
use crate::ib_solver::{anneal_ib, InfoCurvePoint, SolverConfig};
use crate::info_theory::{mutual_information, Channel, JointDistribution};
use crate::sampling::{dirichlet_ones, rng_from_seed};
use crate::scalar::Scalar;

pub const MAX_X_SIZE: usize = 64;
pub const MAX_Y_SIZE: usize = 16;
pub const MAX_LAYERS: usize = 8;

/// A source and two topologies over the same layers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario<T> {
    pub label: String,
    pub source: JointDistribution<T>,
    pub spec_strict: HierarchySpec<T>,
    pub spec_skip: HierarchySpec<T>,
    pub seed: u64,
}

impl<T: Scalar> Scenario<T> {
    /// Builds the pair from the skip topology; the strict one drops its skips.
    pub fn new(
        label: impl Into<String>,
        source: JointDistribution<T>,
        spec_skip: HierarchySpec<T>,
        seed: u64,
    ) -> Result<Self> {
        let spec_skip = build_hierarchy(spec_skip)?;
        if spec_skip.skips.is_empty() {
            return Err(Error::Config(
                "scenario needs at least one skip edge".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            source,
            spec_strict: spec_skip.strict(),
            spec_skip,
            seed,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioParams<T> {
    pub x_size: usize,
    pub y_size: usize,
    pub n_layers: usize,
    /// One entry per layer, or a single entry used for every layer.
    pub cardinalities: Vec<usize>,
    /// Inclusive range each individual attention is drawn from.
    pub attention_range: (T, T),
    pub agents_per_layer: usize,
    pub skip_edges: Vec<SkipEdge>,
}

impl<T: Scalar> ScenarioParams<T> {
    fn check(&self) -> Result<()> {
        let guard = |ok: bool, msg: String| if ok { Ok(()) } else { Err(Error::Config(msg)) };
        guard(
            (1..=MAX_X_SIZE).contains(&self.x_size),
            format!("x_size {} outside 1..={MAX_X_SIZE}", self.x_size),
        )?;
        guard(
            (1..=MAX_Y_SIZE).contains(&self.y_size),
            format!("y_size {} outside 1..={MAX_Y_SIZE}", self.y_size),
        )?;
        guard(
            (1..=MAX_LAYERS).contains(&self.n_layers),
            format!("n_layers {} outside 1..={MAX_LAYERS}", self.n_layers),
        )?;
        guard(
            self.cardinalities.len() == 1 || self.cardinalities.len() == self.n_layers,
            format!(
                "{} cardinalities given for {} layers",
                self.cardinalities.len(),
                self.n_layers
            ),
        )?;
        guard(
            self.cardinalities.iter().all(|&c| c >= 1),
            "cardinalities must be positive".into(),
        )?;
        let (lo, hi) = self.attention_range;
        guard(
            lo.is_finite() && hi.is_finite() && lo > T::zero() && lo <= hi,
            format!("attention range [{lo}, {hi}] must be positive and ordered"),
        )?;
        guard(
            self.agents_per_layer >= 1,
            "agents_per_layer must be at least 1".into(),
        )?;
        guard(
            !self.skip_edges.is_empty(),
            "at least one skip edge is required".into(),
        )
    }
}

/// Random scenario: Dirichlet(1) joint over the full grid, uniform attentions.
pub fn generate_scenario<T: Scalar>(seed: u64, params: &ScenarioParams<T>) -> Result<Scenario<T>> {
    params.check()?;
    let mut rng = rng_from_seed(seed);
    let cells = dirichlet_ones(&mut rng, params.x_size * params.y_size);
    let source = JointDistribution::new(
        params.x_size,
        params.y_size,
        cells.into_iter().map(T::of).collect(),
    )?;
    let (lo, hi) = (
        params.attention_range.0.as_f64(),
        params.attention_range.1.as_f64(),
    );
    let layers = (0..params.n_layers)
        .map(|i| {
            let attentions = (0..params.agents_per_layer)
                .map(|_| {
                    T::of(if lo < hi {
                        rng.random_range(lo..=hi)
                    } else {
                        lo
                    })
                })
                .collect();
            let card = params.cardinalities[if params.cardinalities.len() == 1 {
                0
            } else {
                i
            }];
            LayerSpec::new(format!("level-{}", i + 1), attentions, card)
        })
        .collect();
    let spec = HierarchySpec::new(layers, params.skip_edges.clone());
    Scenario::new(format!("random-{seed}"), source, spec, seed)
        .map_err(|e| Error::Config(format!("generated scenario is invalid: {e}")))
}

/// Named reference scenarios.
///
/// * `xor`: `X` is two fair bits, `Y` their XOR. The operational level
///   (β = 5) reports `Y` exactly; middle management (β overridden to 0.5)
///   filters everything; the board (β = 10) only recovers `Y` through the
///   skip from level 1.
/// * `redundant`: `X = Y` uniform binary with identity-forcing attention on
///   every level, so the skip duplicates an identical report.
pub fn builtin_scenario<T: Scalar>(name: &str) -> Result<Scenario<T>> {
    let t = T::of;
    match name {
        "xor" => {
            let mut cells = vec![T::zero(); 8];
            for x in 0..4 {
                let y = (x >> 1) ^ (x & 1);
                cells[x * 2 + y] = t(0.25);
            }
            let source = JointDistribution::new(4, 2, cells)?;
            let spec = HierarchySpec::new(
                vec![
                    LayerSpec::new("operations", vec![t(1.0), t(1.0)], 2),
                    LayerSpec::new("management", vec![t(2.5), t(2.5)], 2)
                        .with_beta_override(t(0.5)),
                    LayerSpec::new("board", vec![t(10.0)], 2),
                ],
                vec![SkipEdge::new(1, 3)],
            );
            Scenario::new("xor", source, spec, 0)
        }
        "redundant" => {
            let source = JointDistribution::new(2, 2, vec![t(0.5), t(0.0), t(0.0), t(0.5)])?;
            let layer = |n: &str| LayerSpec::new(n, vec![t(60.0), t(60.0)], 2);
            let spec = HierarchySpec::new(
                vec![layer("operations"), layer("management"), layer("board")],
                vec![SkipEdge::new(1, 3)],
            );
            Scenario::new("redundant", source, spec, 0)
        }
        other => Err(Error::Config(format!(
            "unknown builtin scenario '{other}' (available: xor, redundant)"
        ))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompareOptions {
    /// Seed each skip-run layer with the strict run's encoder for that layer.
    pub warm_start: bool,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self { warm_start: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport<T> {
    pub label: String,
    pub seed: u64,
    #[serde(rename = "source_mi_bits")]
    pub source_mi: T,
    #[serde(rename = "final_relevance_strict_bits")]
    pub final_relevance_strict: T,
    #[serde(rename = "final_relevance_skip_bits")]
    pub final_relevance_skip: T,
    #[serde(rename = "relevance_gain_bits")]
    pub relevance_gain: T,
    pub profile_strict: Vec<ProfileRow<T>>,
    pub profile_skip: Vec<ProfileRow<T>>,
}

pub fn compare_topologies<T: Scalar>(
    s: &Scenario<T>,
    solver_cfg: &SolverConfig<T>,
) -> Result<ComparisonReport<T>> {
    compare_topologies_with(s, solver_cfg, CompareOptions::default())
}

/// Propagates both topologies with the scenario seed and reports the change
/// in final-layer relevance.
pub fn compare_topologies_with<T: Scalar>(
    s: &Scenario<T>,
    solver_cfg: &SolverConfig<T>,
    opts: CompareOptions,
) -> Result<ComparisonReport<T>> {
    let labelled = |e: Error| Error::Scenario {
        label: s.label.clone(),
        source: Box::new(e),
    };
    let cfg = SolverConfig {
        rng_seed: s.seed,
        ..solver_cfg.clone()
    };
    let strict = propagate(&s.spec_strict, &s.source, &cfg).map_err(labelled)?;
    let warm: Vec<Channel<T>> = strict.states.iter().map(|st| st.encoder.clone()).collect();
    let skip = propagate_with_warm_starts(
        &s.spec_skip,
        &s.source,
        &cfg,
        opts.warm_start.then_some(warm.as_slice()),
    )
    .map_err(labelled)?;
    let last = |r: &crate::hierarchy::PropagationReport<T>| {
        r.states.last().map_or(T::zero(), |st| st.i_y_l)
    };
    let (final_strict, final_skip) = (last(&strict), last(&skip));
    Ok(ComparisonReport {
        label: s.label.clone(),
        seed: s.seed,
        source_mi: mutual_information(&s.source),
        final_relevance_strict: final_strict,
        final_relevance_skip: final_skip,
        relevance_gain: final_skip - final_strict,
        profile_strict: relevant_info_profile(&strict),
        profile_skip: relevant_info_profile(&skip),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchReport<T> {
    /// One row per scenario, sorted by seed.
    pub rows: Vec<ComparisonReport<T>>,
    #[serde(rename = "mean_gain_bits")]
    pub mean_gain: T,
    #[serde(rename = "median_gain_bits")]
    pub median_gain: T,
}

/// Compares every scenario (in parallel) and aggregates the gains.
pub fn run_batch<T: Scalar>(
    scenarios: &[Scenario<T>],
    solver_cfg: &SolverConfig<T>,
) -> Result<BatchReport<T>> {
    run_batch_with(scenarios, solver_cfg, CompareOptions::default())
}

pub fn run_batch_with<T: Scalar>(
    scenarios: &[Scenario<T>],
    solver_cfg: &SolverConfig<T>,
    opts: CompareOptions,
) -> Result<BatchReport<T>> {
    if scenarios.is_empty() {
        return Err(Error::Config("batch has no scenarios".into()));
    }
    let mut rows = scenarios
        .par_iter()
        .map(|s| compare_topologies_with(s, solver_cfg, opts))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.seed);
    let n = T::of(rows.len() as f64);
    let mean_gain = rows.iter().map(|r| r.relevance_gain).sum::<T>() / n;
    let mut gains: Vec<T> = rows.iter().map(|r| r.relevance_gain).collect();
    gains.sort_by(|a, b| a.partial_cmp(b).expect("finite gains"));
    let mid = gains.len() / 2;
    let median_gain = if gains.len() % 2 == 1 {
        gains[mid]
    } else {
        (gains[mid - 1] + gains[mid]) / T::of(2.0)
    };
    Ok(BatchReport {
        rows,
        mean_gain,
        median_gain,
    })
}

/// The compression/relevance curve of `j` over `schedule`.
pub fn info_curve<T: Scalar>(
    j: &JointDistribution<T>,
    schedule: &[T],
    cfg: &SolverConfig<T>,
) -> Result<Vec<InfoCurvePoint<T>>> {
    anneal_ib(j, schedule, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ScenarioParams<f64> {
        ScenarioParams {
            x_size: 4,
            y_size: 2,
            n_layers: 3,
            cardinalities: vec![3, 2, 2],
            attention_range: (0.5, 3.0),
            agents_per_layer: 2,
            skip_edges: vec![SkipEdge::new(1, 3)],
        }
    }

    #[test]
    fn generation_is_deterministic_and_normalized() {
        let a = generate_scenario(17, &params()).unwrap();
        let b = generate_scenario(17, &params()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.source.probs().len(), 8);
        let s: f64 = a.source.probs().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_ne!(a, generate_scenario(18, &params()).unwrap());
        for l in &a.spec_skip.layers {
            assert!(l.attentions.iter().all(|&x| (0.5..=3.0).contains(&x)));
        }
    }

    #[test]
    fn generation_guards() {
        let mut p = params();
        p.x_size = 65;
        assert!(matches!(generate_scenario(1, &p), Err(Error::Config(_))));
        let mut p = params();
        p.n_layers = 9;
        assert!(matches!(generate_scenario(1, &p), Err(Error::Config(_))));
        let mut p = params();
        p.skip_edges.clear();
        assert!(matches!(generate_scenario(1, &p), Err(Error::Config(_))));
    }

    #[test]
    fn builtin_xor_shape() {
        let s = builtin_scenario::<f64>("xor").unwrap();
        assert_eq!(s.spec_skip.skips, vec![SkipEdge::new(1, 3)]);
        assert!(s.spec_strict.skips.is_empty());
        assert_eq!(
            s.spec_skip
                .layers
                .iter()
                .map(|l| l.cardinality)
                .collect::<Vec<_>>(),
            vec![2, 2, 2]
        );
        assert!((mutual_information(&s.source) - 1.0).abs() < 1e-12);
        assert!(builtin_scenario::<f64>("nope").is_err());
    }

    #[test]
    fn xor_skip_recovers_relevance() {
        let s = builtin_scenario::<f64>("xor").unwrap();
        let r = compare_topologies(&s, &SolverConfig::default()).unwrap();
        assert!(
            r.final_relevance_strict <= 0.05,
            "{}",
            r.final_relevance_strict
        );
        assert!(r.final_relevance_skip >= 0.95, "{}", r.final_relevance_skip);
        assert!(r.relevance_gain >= 0.9);
    }

    #[test]
    fn redundant_skip_gains_nothing() {
        let s = builtin_scenario::<f64>("redundant").unwrap();
        let r = compare_topologies(&s, &SolverConfig::default()).unwrap();
        assert!(r.relevance_gain.abs() < 1e-6, "{}", r.relevance_gain);
    }

    #[test]
    fn scenario_errors_carry_the_label() {
        let mut s = builtin_scenario::<f64>("xor").unwrap();
        s.label = "broken".into();
        s.spec_strict.layers[0].cardinality = 0;
        let err = compare_topologies(&s, &SolverConfig::default()).unwrap_err();
        assert!(
            matches!(&err, Error::Scenario { label, .. } if label == "broken"),
            "{err}"
        );
    }

    #[test]
    fn batch_rows_are_sorted_and_aggregated() {
        let scenarios: Vec<_> = [9u64, 3, 5]
            .iter()
            .map(|&s| generate_scenario(s, &params()).unwrap())
            .collect();
        let cfg = SolverConfig::default().with_restarts(3);
        let b = run_batch(&scenarios, &cfg).unwrap();
        assert_eq!(
            b.rows.iter().map(|r| r.seed).collect::<Vec<_>>(),
            vec![3, 5, 9]
        );
        let mean = b.rows.iter().map(|r| r.relevance_gain).sum::<f64>() / 3.0;
        assert!((b.mean_gain - mean).abs() < 1e-15);
        let mut g: Vec<f64> = b.rows.iter().map(|r| r.relevance_gain).collect();
        g.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(b.median_gain, g[1]);
    }
}
