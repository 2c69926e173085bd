//! File configuration. Every field can also be set by a flag; flags win.

use std::fs;
use std::path::{Path, PathBuf};

use cnarg_core::experiments::{ExperimentSettings, ModelFamily, Task};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub corpus: Option<PathBuf>,
    /// TOML file with label names, attribute names and language directories.
    pub corpus_config: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub experiment: ExperimentSection,
    pub agreement: AgreementSection,
    pub scaffold: ScaffoldSection,
}

// no deny_unknown_fields here: serde does not support it together with flatten
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSection {
    /// Task keys; empty means all eight.
    pub tasks: Vec<String>,
    pub family: String,
    pub suite: Suite,
    #[serde(flatten)]
    pub settings: ExperimentSettings,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            tasks: Vec::new(),
            family: "lr".to_owned(),
            suite: Suite::Baseline,
            settings: ExperimentSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Each task without conditioning.
    Baseline,
    /// Each task with its default gold conditioning.
    Conditioned,
    /// Both, for tasks that have a conditioned variant.
    Paired,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgreementSection {
    pub merge_pivot: bool,
}

impl Default for AgreementSection {
    fn default() -> Self {
        AgreementSection { merge_pivot: true }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaffoldSection {
    pub templates: Option<PathBuf>,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<CliConfig, Failure> {
        let src = fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&src).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
    }

    pub fn family(&self) -> Result<ModelFamily, Failure> {
        parse_family(&self.experiment.family)
    }

    pub fn tasks(&self) -> Result<Vec<Task>, Failure> {
        if self.experiment.tasks.is_empty() {
            return Ok(Task::ALL.to_vec());
        }
        self.experiment
            .tasks
            .iter()
            .map(|k| Task::from_key(k).map_err(|e| Failure::usage(e.to_string())))
            .collect()
    }
}

pub fn parse_family(s: &str) -> Result<ModelFamily, Failure> {
    [ModelFamily::LrBow, ModelFamily::LrEmbed]
        .into_iter()
        .find(|f| f.key() == s)
        .ok_or_else(|| {
            Failure::usage(format!(
                "unknown model family '{s}' (expected lr or lr_embed)"
            ))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use cnarg_core::experiments::Grid;

    #[test]
    fn parses_full_file() {
        let src = r#"
corpus = "data"
out = "results"

[experiment]
tasks = ["arg", "pivot"]
family = "lr_embed"
suite = "paired"
seeds = [7]
grid = "reference"
window = 3

[agreement]
merge_pivot = false
"#;
        let c: CliConfig = toml::from_str(src).unwrap();
        assert_eq!(c.corpus.as_deref(), Some(Path::new("data")));
        assert_eq!(c.tasks().unwrap(), vec![Task::ArgVsNonArg, Task::Pivot]);
        assert_eq!(c.family().unwrap(), ModelFamily::LrEmbed);
        assert_eq!(c.experiment.suite, Suite::Paired);
        assert_eq!(c.experiment.settings.seeds, vec![7]);
        assert_eq!(c.experiment.settings.grid, Grid::Reference);
        assert_eq!(c.experiment.settings.window, 3);
        assert!(c.experiment.settings.include_punct);
        assert!(!c.agreement.merge_pivot);
    }

    #[test]
    fn search_grid_from_file() {
        let c: CliConfig = toml::from_str("[experiment]\ngrid = { search = [1.0, 0.1] }").unwrap();
        assert_eq!(c.experiment.settings.grid, Grid::Search(vec![1.0, 0.1]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<CliConfig>("corpsu = \"x\"").is_err());
    }

    #[test]
    fn bad_task_is_a_usage_error() {
        let c: CliConfig = toml::from_str("[experiment]\ntasks = [\"nope\"]").unwrap();
        assert_eq!(c.tasks().unwrap_err().code, crate::EXIT_USAGE);
    }
}
