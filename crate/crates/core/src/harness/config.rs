use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::backend::HttpConfig;
use super::prompt::{PromptTemplate, TemplateSet};
use super::HarnessError;
use crate::formats::FormatKind;
use crate::scoring::ScoreWeights;
use crate::sustainability::EmissionConfig;

/// TOML run configuration. Every section is optional.
///
/// ```toml
/// model_id = "gpt-oss-20b"
/// parallelism = 4
///
/// [backend]
/// url = "http://localhost:8000/v1/chat/completions"
/// stream = true
///
/// [emission]
/// mode = "token_factor"
/// token_factor = 0.0012
///
/// [weights]
/// gamma = 0.7
///
/// [templates.toon]
/// preamble = "..."
/// format_rules = "..."
/// task = "Task:\n{description}"
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub model_id: String,
    pub parallelism: usize,
    pub strip_fences: bool,
    pub backend: HttpConfig,
    pub emission: EmissionConfig,
    pub weights: ScoreWeights,
    pub templates: BTreeMap<FormatKind, PromptTemplate>,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            model_id: "model".into(),
            parallelism: 1,
            strip_fences: true,
            backend: HttpConfig::default(),
            emission: EmissionConfig::default(),
            weights: ScoreWeights::default(),
            templates: BTreeMap::new(),
        }
    }
}

impl HarnessConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.model_id.is_empty() {
            return Err(HarnessError::Config("model_id must not be empty".into()));
        }
        if self.parallelism == 0 {
            return Err(HarnessError::Config("parallelism must be at least 1".into()));
        }
        self.weights
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        self.emission
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        self.template_set().map(|_| ())
    }

    /// Built-in templates with this config's overrides applied.
    pub fn template_set(&self) -> Result<TemplateSet, HarnessError> {
        let mut set = TemplateSet::default();
        for (format, t) in &self.templates {
            set.insert(*format, t.clone())
                .map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sustainability::EmissionMode;

    #[test]
    fn empty_config_is_all_defaults() {
        assert_eq!(HarnessConfig::parse("").unwrap(), HarnessConfig::default());
    }

    #[test]
    fn full_config() {
        let cfg = HarnessConfig::parse(
            r#"
model_id = "m7"
parallelism = 4
strip_fences = false

[backend]
url = "http://127.0.0.1:9/v1/chat/completions"
stream = true
temperature = 0.2
sampling = { top_p = 0.9, seed = 7 }

[emission]
mode = "token_factor"
token_factor = 0.0012

[weights]
alpha = 0.5
beta = 0.5
gamma = 0.7

[templates.toon]
preamble = "P"
format_rules = "R"
task = "T {description}"
"#,
        )
        .unwrap();
        assert_eq!(cfg.model_id, "m7");
        assert!(cfg.backend.stream);
        assert_eq!(cfg.backend.sampling["seed"], serde_json::json!(7));
        assert_eq!(cfg.emission.mode, EmissionMode::TokenFactor);
        assert_eq!(cfg.weights.gamma, 0.7);
        let set = cfg.template_set().unwrap();
        assert_eq!(set.get(FormatKind::Toon).unwrap().render("d"), "P\n\nR\n\nT d");
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            "unknown = 1",
            "parallelism = 0",
            "[weights]\nalpha = 0.3",
            "[emission]\nx_ref = -1.0",
            "[templates.toon]\npreamble = \"\"\nformat_rules = \"\"\ntask = \"no slot\"",
            "[templates.csv]\npreamble = \"\"\nformat_rules = \"\"\ntask = \"{description}\"",
        ] {
            assert!(
                matches!(HarnessConfig::parse(bad), Err(HarnessError::Config(_))),
                "{bad}"
            );
        }
    }
}
