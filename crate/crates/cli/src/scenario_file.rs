//! On-disk scenario format.

use orgbottleneck::{
    build_hierarchy, HierarchySpecF64, JointF64, LayerSpec, Scenario, ScenarioF64, ScenarioParams,
    SkipEdge,
};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub x_size: usize,
    pub y_size: usize,
    /// Row-major `p(x, y)`.
    pub joint: Vec<f64>,
    #[serde(default)]
    pub layers: Vec<LayerEntry>,
    #[serde(default)]
    pub skips: Vec<SkipEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerEntry {
    pub name: String,
    pub attentions: Vec<f64>,
    pub cardinality: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rate_bits: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_override: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkipEntry {
    pub from: usize,
    pub to: usize,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("malformed scenario: {e}"))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    pub fn source(&self) -> Result<JointF64, String> {
        let cells = self.x_size.saturating_mul(self.y_size);
        if self.joint.len() != cells {
            return Err(format!(
                "joint: expected x_size*y_size = {cells} entries, found {}",
                self.joint.len()
            ));
        }
        JointF64::new(self.x_size, self.y_size, self.joint.clone())
            .map_err(|e| format!("joint: {e}"))
    }

    /// The hierarchy as written, skips included.
    pub fn hierarchy(&self) -> Result<HierarchySpecF64, String> {
        if self.layers.is_empty() {
            return Err("layers: at least one layer is required".into());
        }
        let mut layers = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            let key = format!("layers[{i}]");
            if l.attentions.is_empty() {
                return Err(format!("{key}.attentions: at least one entry is required"));
            }
            if let Some((j, a)) = l
                .attentions
                .iter()
                .enumerate()
                .find(|(_, a)| !(a.is_finite() && **a > 0.0))
            {
                return Err(format!(
                    "{key}.attentions[{j}]: must be positive and finite, got {a}"
                ));
            }
            if l.cardinality == 0 {
                return Err(format!("{key}.cardinality: must be at least 1"));
            }
            if let Some(r) = l.max_rate_bits.filter(|r| !(r.is_finite() && *r >= 0.0)) {
                return Err(format!(
                    "{key}.max_rate_bits: must be non-negative and finite, got {r}"
                ));
            }
            if let Some(b) = l.beta_override.filter(|b| !(b.is_finite() && *b >= 0.0)) {
                return Err(format!(
                    "{key}.beta_override: must be non-negative and finite, got {b}"
                ));
            }
            let mut spec = LayerSpec::new(l.name.clone(), l.attentions.clone(), l.cardinality);
            spec.max_rate_bits = l.max_rate_bits;
            spec.beta_override = l.beta_override;
            layers.push(spec);
        }
        let skips = self
            .skips
            .iter()
            .map(|s| SkipEdge::new(s.from, s.to))
            .collect();
        build_hierarchy(orgbottleneck::HierarchySpec::new(layers, skips))
            .map_err(|e| format!("skips: {e}"))
    }

    pub fn scenario(&self, fallback_label: &str, seed: u64) -> Result<ScenarioF64, String> {
        let source = self.source()?;
        let spec = self.hierarchy()?;
        if spec.skips.is_empty() {
            return Err("skips: comparing topologies needs at least one skip edge".into());
        }
        let label = self
            .label
            .clone()
            .unwrap_or_else(|| fallback_label.to_string());
        Scenario::new(label, source, spec, seed).map_err(|e| e.to_string())
    }

    pub fn from_scenario(s: &ScenarioF64) -> Self {
        Self {
            label: Some(s.label.clone()),
            x_size: s.source.x_size(),
            y_size: s.source.y_size(),
            joint: s.source.probs().to_vec(),
            layers: s
                .spec_skip
                .layers
                .iter()
                .map(|l| LayerEntry {
                    name: l.name.clone(),
                    attentions: l.attentions.clone(),
                    cardinality: l.cardinality,
                    max_rate_bits: l.max_rate_bits,
                    beta_override: l.beta_override,
                })
                .collect(),
            skips: s
                .spec_skip
                .skips
                .iter()
                .map(|e| SkipEntry {
                    from: e.from,
                    to: e.to,
                })
                .collect(),
            seed: Some(s.seed),
        }
    }
}

/// Parameters for `compare-topologies --random`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub x_size: usize,
    pub y_size: usize,
    pub n_layers: usize,
    pub cardinalities: Vec<usize>,
    pub attention_range: (f64, f64),
    #[serde(default = "default_agents")]
    pub agents_per_layer: usize,
    pub skip_edges: Vec<SkipEntry>,
}

fn default_agents() -> usize {
    2
}

impl ParamsFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("malformed params: {e}"))
    }

    pub fn params(&self) -> ScenarioParams<f64> {
        ScenarioParams {
            x_size: self.x_size,
            y_size: self.y_size,
            n_layers: self.n_layers,
            cardinalities: self.cardinalities.clone(),
            attention_range: self.attention_range,
            agents_per_layer: self.agents_per_layer,
            skip_edges: self
                .skip_edges
                .iter()
                .map(|s| SkipEdge::new(s.from, s.to))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use orgbottleneck::builtin_scenario;

    #[test]
    fn builtin_round_trips() {
        let s = builtin_scenario::<f64>("xor").unwrap();
        let file = ScenarioFile::from_scenario(&s);
        let back = ScenarioFile::parse(&file.to_json()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.scenario("ignored", s.seed).unwrap(), s);
    }

    #[test]
    fn errors_name_the_key() {
        let base = r#"{"x_size": 2, "y_size": 2, "joint": [0.5, 0, 0, 0.5],
            "layers": [{"name": "a", "attentions": [1.0, -2.0], "cardinality": 2}]}"#;
        let f = ScenarioFile::parse(base).unwrap();
        let err = f.hierarchy().unwrap_err();
        assert!(err.starts_with("layers[0].attentions[1]"), "{err}");

        let short = r#"{"x_size": 2, "y_size": 2, "joint": [0.5, 0.5, 0]}"#;
        let err = ScenarioFile::parse(short).unwrap().source().unwrap_err();
        assert!(err.starts_with("joint:"), "{err}");

        let err = ScenarioFile::parse("{\n  \"x_size\": 2,\n  \"y_size\": 2\n}").unwrap_err();
        assert!(err.contains("joint") && err.contains("line"), "{err}");

        let err = ScenarioFile::parse(r#"{"x_size": 1, "y_size": 1, "joint": [1], "bogus": 3}"#)
            .unwrap_err();
        assert!(err.contains("bogus"), "{err}");
    }
}
