//! TOML scenario files for `patrol simulate`.
//!
//! ```toml
//! horizon = 30000
//! seed = 7
//! policy = "LFV_E"
//! tiebreak = "lowest-id"        # or "seeded-random:3", "scripted:0,1,0"
//!
//! [graph]
//! family = "grid_triangulation" # or: file = "instance.graph"
//! params = { w = 10, h = 10 }
//!
//! [robots]
//! starts = [0]
//! arrivals = [{ round = 10000, vertex = 0 }, { round = 10000, vertex = 0 }]
//!
//! [outputs]
//! dir = "out"
//! ```
//!
//! Relative paths (graph file, output dir) resolve against the scenario's
//! own directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use patrol_core::generators::FamilySpec;
use patrol_core::{Graph, PolicyKind, Round, TieBreak};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub graph: GraphSource,
    pub policy: String,
    #[serde(default)]
    pub tiebreak: Option<String>,
    #[serde(default)]
    pub robots: Robots,
    pub horizon: Round,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSource {
    pub family: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, i64>,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Robots {
    #[serde(default = "default_starts")]
    pub starts: Vec<usize>,
    #[serde(default)]
    pub arrivals: Vec<ArrivalEntry>,
}

impl Default for Robots {
    fn default() -> Self {
        Robots { starts: default_starts(), arrivals: Vec::new() }
    }
}

fn default_starts() -> Vec<usize> {
    vec![0]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrivalEntry {
    pub round: Round,
    pub vertex: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_events")]
    pub events: String,
    #[serde(default = "default_metrics")]
    pub metrics: String,
    #[serde(default = "default_summary")]
    pub summary: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { dir: default_dir(), events: default_events(), metrics: default_metrics(), summary: default_summary() }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}
fn default_events() -> String {
    "events.csv".into()
}
fn default_metrics() -> String {
    "metrics.csv".into()
}
fn default_summary() -> String {
    "summary.json".into()
}

/// Graph plus the family/parameter labels used in summaries.
pub struct LoadedGraph {
    pub graph: Graph,
    pub family: String,
    pub param: String,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut scenario = Self::parse(&text).with_context(|| format!("in scenario {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(file) = &scenario.graph.file {
            if file.is_relative() {
                scenario.graph.file = Some(base.join(file));
            }
        }
        if scenario.outputs.dir.is_relative() {
            scenario.outputs.dir = base.join(&scenario.outputs.dir);
        }
        Ok(scenario)
    }

    /// Parses scenario text; errors name the offending key path.
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| anyhow::anyhow!("{}", e.to_string().trim_end()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow::anyhow!("at `{path}`: {}", e.into_inner().message().trim_end())
        })
    }

    pub fn policy(&self) -> Result<PolicyKind> {
        self.policy.parse().map_err(|e| anyhow::anyhow!("at `policy`: {e}"))
    }

    pub fn tiebreak(&self) -> Result<TieBreak> {
        match &self.tiebreak {
            None => Ok(TieBreak::LowestId),
            Some(s) => s.parse().map_err(|e| anyhow::anyhow!("at `tiebreak`: {e}")),
        }
    }
}

impl GraphSource {
    pub fn load(&self) -> Result<LoadedGraph> {
        match (&self.family, &self.file) {
            (Some(family), None) => {
                let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let spec = FamilySpec::parse(family, &params).context("at `graph`")?;
                let graph = spec.graph().context("at `graph.params`")?;
                Ok(LoadedGraph { graph, family: spec.family.to_string(), param: params.join(" ") })
            }
            (None, Some(file)) => {
                let graph = patrol_core::generators::load(file).with_context(|| format!("loading {}", file.display()))?;
                let meta = graph.metadata();
                let family = meta.get(patrol_core::graph::META_FAMILY).cloned().unwrap_or_else(|| "file".into());
                let param = meta
                    .iter()
                    .filter(|(k, _)| {
                        k.as_str() != patrol_core::graph::META_FAMILY
                            && k.as_str() != patrol_core::graph::META_TRIANGULATION_DUAL
                    })
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                Ok(LoadedGraph { graph, family, param })
            }
            (Some(_), Some(_)) => bail!("at `graph`: give either `family` or `file`, not both"),
            (None, None) => bail!("at `graph`: missing `family` or `file`"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
horizon = 12
policy = "LRV_V"
[graph]
family = "cycle"
params = { n = 4 }
"#;

    #[test]
    fn defaults_fill_in() {
        let s = Scenario::parse(BASIC).unwrap();
        assert_eq!(s.robots.starts, vec![0]);
        assert_eq!(s.seed, 0);
        assert_eq!(s.outputs.events, "events.csv");
        assert_eq!(s.tiebreak().unwrap(), TieBreak::LowestId);
        assert_eq!(s.graph.load().unwrap().graph.vertex_count(), 4);
    }

    #[test]
    fn unknown_keys_name_their_path() {
        let err = Scenario::parse(&format!("{BASIC}\n[robots]\nstart = [1]\n")).unwrap_err().to_string();
        assert!(err.contains("robots"), "{err}");
        assert!(err.contains("start"), "{err}");
    }

    #[test]
    fn wrong_types_name_their_path() {
        let err = Scenario::parse(&BASIC.replace("horizon = 12", "horizon = \"soon\"")).unwrap_err().to_string();
        assert!(err.contains("horizon"), "{err}");
    }

    #[test]
    fn bad_policy_is_reported() {
        let s = Scenario::parse(&BASIC.replace("LRV_V", "FASTEST")).unwrap();
        assert!(s.policy().unwrap_err().to_string().contains("policy"));
    }
}
