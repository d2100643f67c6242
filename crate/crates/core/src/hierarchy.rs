//! Layered organizations as chains of bottleneck stages.
//!
//! Layer 1 receives the external signal `X`. Layer `i > 1` receives the
//! representation of layer `i − 1`, plus the representation of every layer
//! `a` with a skip edge `a → i`. Several inputs are merged into their product
//! alphabet, ordered by ascending source layer with `i − 1` last (least
//! significant). Each layer solves a bottleneck against the global relevance
//! variable `Y` with trade-off `β_i`:
//!
//! * `β_i = Σ_j α_{j,i+1}` for `i < N` (attention of the consuming layer);
//! * `β_N = Σ_j α_{j,N}` for the top layer;
//! * a per-layer `beta_override` replaces either.
//!
//! Every layer's encoder is recorded in an [`EncoderHistory`]. Exact joints
//! over any subset of layer variables are rebuilt from it by summing out the
//! other variables in layer order. Conditional independence is never assumed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ib_solver::{solve_ib, SolverConfig};
use crate::info_theory::{
    entropy, mutual_information, push_through, Channel, JointDistribution, DPI_SLACK,
};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerSpec<T> {
    pub name: String,
    /// Attention budget of each individual at this layer.
    pub attentions: Vec<T>,
    /// Alphabet size of this layer's representation.
    pub cardinality: usize,
    /// Reporting-only cap on `I(X; L_i)`; exceeding it is flagged, not enforced.
    pub max_rate_bits: Option<T>,
    pub beta_override: Option<T>,
}

impl<T: Scalar> LayerSpec<T> {
    pub fn new(name: impl Into<String>, attentions: Vec<T>, cardinality: usize) -> Self {
        Self {
            name: name.into(),
            attentions,
            cardinality,
            max_rate_bits: None,
            beta_override: None,
        }
    }

    pub fn with_max_rate(mut self, bits: T) -> Self {
        self.max_rate_bits = Some(bits);
        self
    }

    pub fn with_beta_override(mut self, beta: T) -> Self {
        self.beta_override = Some(beta);
        self
    }

    pub fn total_attention(&self) -> T {
        self.attentions.iter().copied().sum()
    }
}

/// Skip connection between 1-based layer indices, spanning at least one
/// intermediate layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SkipEdge {
    pub from: usize,
    pub to: usize,
}

impl SkipEdge {
    pub fn new(from: usize, to: usize) -> Self {
        Self { from, to }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HierarchySpec<T> {
    /// Index 0 here is layer 1, the operational level receiving `X`.
    pub layers: Vec<LayerSpec<T>>,
    pub skips: Vec<SkipEdge>,
}

impl<T: Scalar> HierarchySpec<T> {
    pub fn new(layers: Vec<LayerSpec<T>>, skips: Vec<SkipEdge>) -> Self {
        Self { layers, skips }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// The same layers without skip edges.
    pub fn strict(&self) -> Self {
        Self {
            layers: self.layers.clone(),
            skips: Vec::new(),
        }
    }

    /// Input variables of layer `i`: skip sources ascending, then `i − 1`.
    /// Variable 0 is `X`.
    pub fn inputs_of(&self, i: usize) -> Vec<usize> {
        let mut sources: Vec<usize> = self
            .skips
            .iter()
            .filter(|s| s.to == i)
            .map(|s| s.from)
            .collect();
        sources.sort_unstable();
        sources.push(i - 1);
        sources
    }

    fn layer(&self, i: usize) -> &LayerSpec<T> {
        &self.layers[i - 1]
    }
}

fn positive_finite<T: Scalar>(v: T) -> bool {
    v.is_finite() && v > T::zero()
}

/// Validates `spec` and returns it with skip edges sorted by `(to, from)`.
pub fn build_hierarchy<T: Scalar>(spec: HierarchySpec<T>) -> Result<HierarchySpec<T>> {
    let n = spec.layers.len();
    if n == 0 {
        return Err(Error::Validation("hierarchy has no layers".into()));
    }
    for (idx, layer) in spec.layers.iter().enumerate() {
        let i = idx + 1;
        if layer.attentions.is_empty() {
            return Err(Error::Validation(format!(
                "layer {i} ('{}') has no attention entries",
                layer.name
            )));
        }
        if let Some((j, a)) = layer
            .attentions
            .iter()
            .enumerate()
            .find(|(_, &a)| !positive_finite(a))
        {
            return Err(Error::Validation(format!(
                "layer {i} ('{}'): attention {j} is {a}, expected a positive finite value",
                layer.name
            )));
        }
        if layer.cardinality == 0 {
            return Err(Error::Validation(format!(
                "layer {i} ('{}') has cardinality 0",
                layer.name
            )));
        }
        if let Some(r) = layer.max_rate_bits {
            if !r.is_finite() || r < T::zero() {
                return Err(Error::Validation(format!(
                    "layer {i}: max_rate_bits {r} is not a finite non-negative value"
                )));
            }
        }
        if let Some(b) = layer.beta_override {
            if !b.is_finite() || b < T::zero() {
                return Err(Error::Validation(format!(
                    "layer {i}: beta_override {b} is not a finite non-negative value"
                )));
            }
        }
    }
    let mut skips = spec.skips;
    for s in &skips {
        if s.from < 1 || s.to > n || s.from > n {
            return Err(Error::Validation(format!(
                "skip {} -> {} is outside layers 1..={n}",
                s.from, s.to
            )));
        }
        if s.to < s.from + 2 {
            return Err(Error::Validation(format!(
                "skip {} -> {} must span at least one intermediate layer",
                s.from, s.to
            )));
        }
    }
    skips.sort_unstable_by_key(|s| (s.to, s.from));
    if let Some(w) = skips.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Validation(format!(
            "duplicate skip {} -> {}",
            w[0].from, w[0].to
        )));
    }
    Ok(HierarchySpec {
        layers: spec.layers,
        skips,
    })
}

/// Attention-derived trade-off for layer `i` (1-based).
pub fn layer_beta<T: Scalar>(spec: &HierarchySpec<T>, i: usize) -> Result<T> {
    let n = spec.depth();
    if i == 0 || i > n {
        return Err(Error::Validation(format!(
            "layer index {i} outside 1..={n}"
        )));
    }
    Ok(if i < n {
        spec.layer(i + 1).total_attention()
    } else {
        spec.layer(n).total_attention()
    })
}

fn effective_beta<T: Scalar>(spec: &HierarchySpec<T>, i: usize) -> Result<T> {
    match spec.layer(i).beta_override {
        Some(b) => Ok(b),
        None => layer_beta(spec, i),
    }
}

/// Encoder of one layer and the variables it reads (0 is `X`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerRecord<T> {
    pub inputs: Vec<usize>,
    pub encoder: Channel<T>,
}

/// Source joint plus the encoders of every layer propagated so far.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EncoderHistory<T> {
    source: JointDistribution<T>,
    records: Vec<LayerRecord<T>>,
}

fn mixed_radix(values: impl Iterator<Item = (usize, usize)>) -> usize {
    values.fold(0, |acc, (v, card)| acc * card + v)
}

fn decode(mut idx: usize, cards: &[usize], out: &mut [usize]) {
    for (slot, &c) in out.iter_mut().zip(cards).rev() {
        *slot = idx % c;
        idx /= c;
    }
}

impl<T: Scalar> EncoderHistory<T> {
    pub fn new(source: JointDistribution<T>) -> Self {
        Self {
            source,
            records: Vec::new(),
        }
    }

    pub fn from_records(
        source: JointDistribution<T>,
        records: Vec<LayerRecord<T>>,
    ) -> Result<Self> {
        let mut h = Self::new(source);
        for r in records {
            h.push(r)?;
        }
        Ok(h)
    }

    /// Appends the encoder of the next layer.
    pub fn push(&mut self, record: LayerRecord<T>) -> Result<()> {
        let index = self.records.len() + 1;
        if record.inputs.is_empty() {
            return Err(Error::Validation(format!("layer {index} has no inputs")));
        }
        let mut seen = record.inputs.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) || seen.last().is_some_and(|&v| v >= index) {
            return Err(Error::Validation(format!(
                "layer {index} inputs {:?} must be distinct earlier variables",
                record.inputs
            )));
        }
        let in_size: usize = record.inputs.iter().map(|&v| self.cardinality(v)).product();
        if record.encoder.in_size() != in_size {
            return Err(Error::dimension(
                format!("layer {index} encoder input"),
                in_size,
                record.encoder.in_size(),
            ));
        }
        self.records.push(record);
        Ok(())
    }

    pub fn source(&self) -> &JointDistribution<T> {
        &self.source
    }

    pub fn records(&self) -> &[LayerRecord<T>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Alphabet size of variable `v` (0 is `X`).
    pub fn cardinality(&self, v: usize) -> usize {
        if v == 0 {
            self.source.x_size()
        } else {
            self.records[v - 1].encoder.out_size()
        }
    }

    /// Exact channel from `X` to the product alphabet of `vars`, first
    /// variable most significant. Repeated variables are allowed.
    pub fn channel_to(&self, vars: &[usize]) -> Result<Channel<T>> {
        if vars.is_empty() {
            return Err(Error::Validation("no variables requested".into()));
        }
        if let Some(&v) = vars.iter().find(|&&v| v > self.records.len()) {
            return Err(Error::Validation(format!(
                "variable {v} not in history of {} layers",
                self.records.len()
            )));
        }
        let nx = self.source.x_size();
        let last = vars.iter().copied().max().unwrap_or(0);

        // Variables still referenced after layer i.
        let keep_after = |i: usize, v: usize| {
            vars.contains(&v) || self.records[i..last].iter().any(|r| r.inputs.contains(&v))
        };

        let mut frontier: Vec<usize> = Vec::new();
        let mut cards: Vec<usize> = Vec::new();
        let mut table = vec![T::one(); nx];
        let mut values = Vec::new();
        for i in 1..=last {
            let rec = &self.records[i - 1];
            let ci = rec.encoder.out_size();
            let width: usize = cards.iter().product();
            let mut grown = vec![T::zero(); nx * width * ci];
            values.resize(frontier.len(), 0);
            for x in 0..nx {
                for f in 0..width {
                    let w = table[x * width + f];
                    if w == T::zero() {
                        continue;
                    }
                    decode(f, &cards, &mut values);
                    let input = mixed_radix(rec.inputs.iter().map(|&v| {
                        let val = if v == 0 {
                            x
                        } else {
                            values[frontier
                                .iter()
                                .position(|&u| u == v)
                                .expect("input on frontier")]
                        };
                        (val, self.cardinality(v))
                    }));
                    let out = &mut grown[(x * width + f) * ci..(x * width + f + 1) * ci];
                    for (slot, &e) in out.iter_mut().zip(rec.encoder.row(input)) {
                        *slot = w * e;
                    }
                }
            }
            frontier.push(i);
            cards.push(ci);
            table = grown;

            let keep: Vec<bool> = frontier.iter().map(|&v| keep_after(i, v)).collect();
            if keep.iter().all(|&k| k) {
                continue;
            }
            let kept_cards: Vec<usize> = cards
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(&c, _)| c)
                .collect();
            let width: usize = cards.iter().product();
            let kept_width: usize = kept_cards.iter().product();
            let mut reduced = vec![T::zero(); nx * kept_width];
            values.resize(frontier.len(), 0);
            for x in 0..nx {
                for f in 0..width {
                    let w = table[x * width + f];
                    if w == T::zero() {
                        continue;
                    }
                    decode(f, &cards, &mut values);
                    let idx = mixed_radix(
                        values
                            .iter()
                            .zip(&cards)
                            .zip(&keep)
                            .filter(|(_, &k)| k)
                            .map(|((&v, &c), _)| (v, c)),
                    );
                    reduced[x * kept_width + idx] = reduced[x * kept_width + idx] + w;
                }
            }
            frontier = frontier
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(&v, _)| v)
                .collect();
            cards = kept_cards;
            table = reduced;
        }

        let width: usize = cards.iter().product();
        let out_cards: Vec<usize> = vars.iter().map(|&v| self.cardinality(v)).collect();
        let out_size: usize = out_cards.iter().product();
        let mut out = vec![T::zero(); nx * out_size];
        values.resize(frontier.len(), 0);
        for x in 0..nx {
            for f in 0..width {
                let w = table[x * width + f];
                if w == T::zero() {
                    continue;
                }
                decode(f, &cards, &mut values);
                let idx = mixed_radix(vars.iter().zip(&out_cards).map(|(&v, &c)| {
                    let val = if v == 0 {
                        x
                    } else {
                        values[frontier
                            .iter()
                            .position(|&u| u == v)
                            .expect("target on frontier")]
                    };
                    (val, c)
                }));
                out[x * out_size + idx] = out[x * out_size + idx] + w;
            }
        }
        Ok(Channel::from_rows_unchecked(nx, out_size, out))
    }

    /// Exact joint of the product of `vars` with `Y`.
    pub fn relevance_joint(&self, vars: &[usize]) -> Result<JointDistribution<T>> {
        push_through(&self.source, &self.channel_to(vars)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerState<T> {
    /// 1-based layer index.
    pub index: usize,
    pub name: String,
    /// Variables this layer read (0 is `X`).
    pub inputs: Vec<usize>,
    /// Joint of `L_i` with `Y`.
    pub representation_joint: JointDistribution<T>,
    /// From this layer's input alphabet to `L_i`.
    pub encoder: Channel<T>,
    pub i_x_l: T,
    pub i_y_l: T,
    pub h_l: T,
    pub beta_effective: T,
    pub converged: bool,
    pub iterations_used: usize,
    /// `I(X; L_i)` exceeded the layer's `max_rate_bits`.
    pub rate_violation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropagationReport<T> {
    pub states: Vec<LayerState<T>>,
    /// `I(X; Y)` of the source.
    pub source_mi: T,
    pub topology: HierarchySpec<T>,
    #[serde(skip)]
    pub history: EncoderHistory<T>,
}

fn layer_seed(seed: u64, layer: usize) -> u64 {
    seed.wrapping_add((layer as u64) << 32)
}

/// Widens a strict-run encoder to a product input whose least significant
/// coordinate is the strict input, ignoring the other coordinates.
fn extend_encoder<T: Scalar>(enc: &Channel<T>, in_size: usize, layer: usize) -> Result<Channel<T>> {
    if enc.in_size() == in_size {
        return Ok(enc.clone());
    }
    if !in_size.is_multiple_of(enc.in_size()) {
        return Err(Error::dimension(
            format!("warm start for layer {layer}"),
            in_size,
            enc.in_size(),
        ));
    }
    let probs = (0..in_size)
        .flat_map(|i| enc.row(i % enc.in_size()).iter().copied())
        .collect();
    Channel::new(in_size, enc.out_size(), probs)
}

/// Propagates `source` through every layer of `spec`.
pub fn propagate<T: Scalar>(
    spec: &HierarchySpec<T>,
    source: &JointDistribution<T>,
    solver_cfg: &SolverConfig<T>,
) -> Result<PropagationReport<T>> {
    propagate_with_warm_starts(spec, source, solver_cfg, None)
}

/// [`propagate`], optionally adding a per-layer warm-start encoder to each
/// solve. A warm start built for a narrower input (for instance the same
/// layer of a run without skips) is widened by ignoring the extra coordinates.
pub fn propagate_with_warm_starts<T: Scalar>(
    spec: &HierarchySpec<T>,
    source: &JointDistribution<T>,
    solver_cfg: &SolverConfig<T>,
    warm_starts: Option<&[Channel<T>]>,
) -> Result<PropagationReport<T>> {
    let spec = build_hierarchy(spec.clone())?;
    let px = source.marginal_x();
    let source_mi = mutual_information(source);
    let mut history = EncoderHistory::new(source.clone());
    let mut states = Vec::with_capacity(spec.depth());
    for i in 1..=spec.depth() {
        let layer = spec.layer(i);
        let inputs = spec.inputs_of(i);
        let input_joint = history.relevance_joint(&inputs)?;
        let beta = effective_beta(&spec, i)?;
        let warm_start = match warm_starts.and_then(|w| w.get(i - 1)) {
            Some(enc) => Some(extend_encoder(enc, input_joint.x_size(), i)?),
            None => None,
        };
        let cfg = SolverConfig {
            beta,
            bottleneck_cardinality: layer.cardinality,
            rng_seed: layer_seed(solver_cfg.rng_seed, i),
            warm_start,
            ..solver_cfg.clone()
        };
        let sol = solve_ib(&input_joint, &cfg)?;
        history.push(LayerRecord {
            inputs: inputs.clone(),
            encoder: sol.encoder.clone(),
        })?;

        let to_layer = history.channel_to(&[i])?;
        let with_x = JointDistribution::from_marginal_and_channel(&px, &to_layer)?;
        let representation_joint = push_through(source, &to_layer)?;
        let i_x_l = mutual_information(&with_x);
        let rate_violation = layer
            .max_rate_bits
            .is_some_and(|cap| i_x_l > cap + T::of(DPI_SLACK));
        states.push(LayerState {
            index: i,
            name: layer.name.clone(),
            inputs,
            i_y_l: mutual_information(&representation_joint),
            h_l: entropy(&representation_joint.marginal_x()),
            representation_joint,
            encoder: sol.encoder,
            i_x_l,
            beta_effective: beta,
            converged: sol.converged,
            iterations_used: sol.iterations_used,
            rate_violation,
        });
    }
    Ok(PropagationReport {
        states,
        source_mi,
        topology: spec,
        history,
    })
}

/// Exact joint of `(L_earlier × L_current, Y)` rebuilt from the encoder history.
pub fn merge_skip<T: Scalar>(
    earlier: &LayerState<T>,
    current: &LayerState<T>,
    source: &JointDistribution<T>,
    history: &EncoderHistory<T>,
) -> Result<JointDistribution<T>> {
    if history.source() != source {
        return Err(Error::Consistency(
            "history was built from a different source".into(),
        ));
    }
    for s in [earlier, current] {
        let recorded = s
            .index
            .checked_sub(1)
            .and_then(|k| history.records().get(k))
            .ok_or_else(|| {
                Error::Consistency(format!("layer {} is not part of this history", s.index))
            })?;
        if recorded.encoder != s.encoder || recorded.inputs != s.inputs {
            return Err(Error::Consistency(format!(
                "layer {} state does not match the recorded encoder",
                s.index
            )));
        }
    }
    history.relevance_joint(&[earlier.index, current.index])
}

/// One row of a per-layer profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileRow<T> {
    pub layer_index: usize,
    pub layer_name: String,
    pub beta_effective: T,
    pub i_x_l_bits: T,
    pub i_y_l_bits: T,
    pub h_l_bits: T,
    pub converged: bool,
}

pub fn relevant_info_profile<T: Scalar>(report: &PropagationReport<T>) -> Vec<ProfileRow<T>> {
    report
        .states
        .iter()
        .map(|s| ProfileRow {
            layer_index: s.index,
            layer_name: s.name.clone(),
            beta_effective: s.beta_effective,
            i_x_l_bits: s.i_x_l,
            i_y_l_bits: s.i_y_l,
            h_l_bits: s.h_l,
            converged: s.converged,
        })
        .collect()
}
