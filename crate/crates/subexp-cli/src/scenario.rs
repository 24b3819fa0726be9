//! Scenario files: the TOML schema, loading (including manifests, which
//! embed a scenario), and conversion into library objects with errors that
//! name the offending piece.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use subexp::independence::{Marginal, ScaleRule, SequenceSpec};
use subexp::{DiscreteMeasure, MeasureFamily, RandomVariable};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// The TOML parser reports line and column in its message.
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    /// Value of the coordinate variable X at each outcome.
    pub outcomes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
    pub measures: Vec<MeasureSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSection {
    pub horizon: usize,
    /// Per-term scaling of the i.i.d. base variable; omitted means i.i.d.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<ScaleRule>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Parameters {
    /// Moment exponent for series and strong-law checks.
    pub p: f64,
    /// Truncated-moment exponent of the three-series condition (iii).
    pub q: f64,
    /// Truncation level of the three-series criterion.
    pub c: f64,
    /// Centering mean for the strong law.
    pub mu: f64,
    /// Cauchy-window tolerance.
    pub epsilon: f64,
    /// Cauchy-window width.
    pub window: usize,
    pub replicates: usize,
    pub final_statistic_threshold: f64,
    pub decay_ratio_bound: f64,
    pub axiom_trials: usize,
    pub subadditivity_samples: usize,
    pub fuzz_instances: u64,
    pub choquet_exponents: Vec<f64>,
    pub tail_grid: Vec<f64>,
}

impl Default for Parameters {
    fn default() -> Self {
        Parameters {
            p: 1.5,
            q: 2.0,
            c: 1.0,
            mu: 0.0,
            epsilon: 1e-6,
            window: 1000,
            replicates: 100,
            final_statistic_threshold: 0.7,
            decay_ratio_bound: 0.5,
            axiom_trials: 10_000,
            subadditivity_samples: 20_000,
            fuzz_instances: 100_000,
            choquet_exponents: vec![0.5, 1.0, 1.5, 2.0],
            tail_grid: vec![0.0, 0.5, 1.0, 2.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub space: SpaceSection,
    pub sequence: SequenceSection,
    #[serde(default)]
    pub parameters: Parameters,
}

impl MeasureSection {
    fn display_name(&self, index: usize) -> String {
        match &self.name {
            Some(name) => format!("\"{name}\" (index {index})"),
            None => format!("(index {index})"),
        }
    }
}

impl Scenario {
    /// Parses a scenario document. A run manifest embeds its resolved
    /// scenario under a `[scenario]` table, so manifests are accepted here
    /// too: any run is reproducible straight from its manifest.
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let table: toml::Table = text.parse()?;
        let scenario: Scenario = match table.get("scenario") {
            Some(inner) => inner.clone().try_into()?,
            None => table.try_into()?,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let size = self.space.outcomes.len();
        if size == 0 {
            return Err(ScenarioError::Invalid(format!(
                "scenario \"{}\": space.outcomes must be nonempty",
                self.name
            )));
        }
        if !self.space.labels.is_empty() && self.space.labels.len() != size {
            return Err(ScenarioError::Invalid(format!(
                "scenario \"{}\": {} labels for {} outcomes",
                self.name,
                self.space.labels.len(),
                size
            )));
        }
        if self.space.measures.is_empty() {
            return Err(ScenarioError::Invalid(format!(
                "scenario \"{}\": space.measures must be nonempty",
                self.name
            )));
        }
        for (index, measure) in self.space.measures.iter().enumerate() {
            if measure.probabilities.len() != size {
                return Err(ScenarioError::Invalid(format!(
                    "scenario \"{}\": measure {} has {} probabilities for {} outcomes",
                    self.name,
                    measure.display_name(index),
                    measure.probabilities.len(),
                    size
                )));
            }
            if let Err(err) = DiscreteMeasure::validated(measure.probabilities.clone(), index) {
                return Err(ScenarioError::Invalid(format!(
                    "scenario \"{}\": measure {}: {}",
                    self.name,
                    measure.display_name(index),
                    err
                )));
            }
        }
        if self.sequence.horizon == 0 {
            return Err(ScenarioError::Invalid(format!(
                "scenario \"{}\": sequence.horizon must be at least 1",
                self.name
            )));
        }
        if let Some(scale) = &self.sequence.scale {
            if let Err(err) = SequenceSpec::scaled_iid(self.base_marginal()?, *scale) {
                return Err(ScenarioError::Invalid(format!(
                    "scenario \"{}\": sequence.scale: {err}",
                    self.name
                )));
            }
        }
        self.variable()?;
        Ok(())
    }

    pub fn family(&self) -> Result<MeasureFamily, ScenarioError> {
        let measures = self
            .space
            .measures
            .iter()
            .enumerate()
            .map(|(index, m)| {
                DiscreteMeasure::validated(m.probabilities.clone(), index).map_err(|err| {
                    ScenarioError::Invalid(format!(
                        "scenario \"{}\": measure {}: {}",
                        self.name,
                        m.display_name(index),
                        err
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        MeasureFamily::new(measures)
            .map_err(|err| ScenarioError::Invalid(format!("scenario \"{}\": {err}", self.name)))
    }

    pub fn variable(&self) -> Result<RandomVariable, ScenarioError> {
        RandomVariable::new(self.space.outcomes.clone()).map_err(|err| {
            ScenarioError::Invalid(format!(
                "scenario \"{}\": space.outcomes: {err}",
                self.name
            ))
        })
    }

    pub fn base_marginal(&self) -> Result<Marginal, ScenarioError> {
        Marginal::new(self.family()?, self.variable()?)
            .map_err(|err| ScenarioError::Invalid(format!("scenario \"{}\": {err}", self.name)))
    }

    pub fn sequence_spec(&self) -> Result<SequenceSpec, ScenarioError> {
        let base = self.base_marginal()?;
        match self.sequence.scale {
            None => Ok(SequenceSpec::iid(base)),
            Some(scale) => SequenceSpec::scaled_iid(base, scale).map_err(|err| {
                ScenarioError::Invalid(format!(
                    "scenario \"{}\": sequence.scale: {err}",
                    self.name
                ))
            }),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} outcomes, {} measures, horizon {})",
            self.name,
            self.space.outcomes.len(),
            self.space.measures.len(),
            self.sequence.horizon
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const COIN: &str = r#"
        name = "coin"
        seed = 42

        [space]
        outcomes = [-1.0, 1.0]

        [[space.measures]]
        name = "heads-light"
        probabilities = [0.7, 0.3]

        [[space.measures]]
        probabilities = [0.3, 0.7]

        [sequence]
        horizon = 1000
    "#;

    #[test]
    fn parses_and_builds() {
        let scenario = Scenario::from_toml_str(COIN).unwrap();
        assert_eq!(scenario.name, "coin");
        let family = scenario.family().unwrap();
        assert_eq!(family.measure_count(), 2);
        let spec = scenario.sequence_spec().unwrap();
        assert!(spec.term_count().is_none());
        // Defaults fill unspecified parameters.
        assert_eq!(scenario.parameters.window, 1000);
    }

    #[test]
    fn bad_probability_sum_names_the_measure() {
        let text = COIN.replace("probabilities = [0.3, 0.7]", "probabilities = [0.3, 0.6]");
        let err = Scenario::from_toml_str(&text).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("index 1"), "{message}");
        assert!(message.contains("coin"), "{message}");
    }

    #[test]
    fn named_measure_appears_in_error() {
        let text = COIN.replace("probabilities = [0.7, 0.3]", "probabilities = [0.6, 0.3]");
        let err = Scenario::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("heads-light"), "{err}");
    }

    #[test]
    fn parse_errors_are_line_addressed() {
        let err = Scenario::from_toml_str("name = \"x\"\nseed = ").unwrap_err();
        let message = err.to_string();
        assert!(message.contains("line"), "{message}");
    }

    #[test]
    fn manifest_embedding_round_trips() {
        let scenario = Scenario::from_toml_str(COIN).unwrap();
        let mut doc = toml::Table::new();
        doc.insert("tool".into(), "subexp".into());
        doc.insert("subcommand".into(), "axioms".into());
        doc.insert(
            "scenario".into(),
            toml::Value::try_from(&scenario).unwrap(),
        );
        let manifest = toml::to_string(&doc).unwrap();
        let reloaded = Scenario::from_toml_str(&manifest).unwrap();
        assert_eq!(reloaded.name, scenario.name);
        assert_eq!(reloaded.seed, scenario.seed);
        assert_eq!(reloaded.space.measures.len(), scenario.space.measures.len());
    }

    #[test]
    fn scale_section_parses() {
        let text = format!(
            "{COIN}\n[sequence.scale]\nrule = \"power-law\"\ncoefficient = 1.0\nexponent = 2.0\nalternating = false\n"
        );
        let scenario = Scenario::from_toml_str(&text).unwrap();
        let spec = scenario.sequence_spec().unwrap();
        let term = spec.term(2).unwrap();
        assert_eq!(term.variable.value(1), 0.25);
    }
}
