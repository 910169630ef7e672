use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use cutsphere_core::model::SphericalQuadratic;
use cutsphere_core::problems::{build_npc, build_packing, iris, parse_libsvm, NpcSpec, PackingSpec};
use cutsphere_core::solver::SolverConfig;
use cutsphere_core::{Constraint, Problem};
use serde::de::DeserializeOwned;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemSection {
    Packing(PackingSection),
    Npc(NpcSection),
    CustomQuadratic(CustomSection),
}

/// Either `m` unit circles or explicit radii.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackingSection {
    pub m: Option<usize>,
    pub radii: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NpcSection {
    /// LIBSVM file; the bundled Iris data when absent.
    pub data: Option<PathBuf>,
    /// Labels in class order, class 1 first.
    pub labels: Option<Vec<String>>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
}

fn default_lambda() -> f64 {
    0.3
}

fn default_thresholds() -> Vec<f64> {
    vec![0.92, 0.92]
}

/// `min ‖x − z‖²` subject to `p‖x‖² + bᵀx + c ≤ 0` constraints.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSection {
    pub z: Vec<f64>,
    pub constraints: Vec<QuadraticSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticSpec {
    pub p: f64,
    pub b: Vec<f64>,
    pub c: f64,
    pub label: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// JSONL trace file.
    pub trace: Option<PathBuf>,
    /// JSON result file; the result always goes to stdout as well.
    pub result: Option<PathBuf>,
}

/// A problem ready to solve, with what the reporting needs to know about it.
pub enum Built {
    Packing { problem: Problem, spec: PackingSpec },
    Npc { problem: Problem, spec: NpcSpec },
    Custom { problem: Problem },
}

impl Built {
    pub fn problem(&self) -> &Problem {
        match self {
            Built::Packing { problem, .. } | Built::Npc { problem, .. } | Built::Custom { problem } => problem,
        }
    }
}

/// Parses TOML, or JSON when the extension is `.json`.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse(&text, path)
}

pub fn parse<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(text).with_context(|| format!("invalid JSON in {}", path.display()))
    } else {
        toml::from_str(text).with_context(|| format!("invalid TOML in {}", path.display()))
    }
}

/// Resolves `p` against the directory of the config file.
pub fn relative_to(config: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config.parent().unwrap_or(Path::new(".")).join(p)
    }
}

impl ProblemSection {
    pub fn build(&self, config_path: &Path) -> Result<Built> {
        match self {
            ProblemSection::Packing(s) => {
                let spec = match (&s.m, &s.radii) {
                    (Some(m), None) => PackingSpec::unit(*m),
                    (None, Some(r)) => PackingSpec { radii: r.clone() },
                    (Some(m), Some(r)) if *m == r.len() => PackingSpec { radii: r.clone() },
                    (Some(_), Some(_)) => bail!("packing: m disagrees with the number of radii"),
                    (None, None) => bail!("packing: give m or radii"),
                };
                Ok(Built::Packing {
                    problem: build_packing(&spec)?,
                    spec,
                })
            }
            ProblemSection::Npc(s) => {
                let ds = match &s.data {
                    None => iris(),
                    Some(p) => {
                        let path = relative_to(config_path, p);
                        let text =
                            std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
                        let labels: Option<Vec<&str>> = s.labels.as_ref().map(|l| l.iter().map(String::as_str).collect());
                        parse_libsvm(&text, labels.as_deref()).with_context(|| format!("in {}", path.display()))?
                    }
                };
                let spec = NpcSpec::from_dataset(&ds, s.lambda, s.thresholds.clone());
                Ok(Built::Npc {
                    problem: build_npc(&spec)?,
                    spec,
                })
            }
            ProblemSection::CustomQuadratic(s) => {
                let cons: Vec<Arc<dyn Constraint>> = s
                    .constraints
                    .iter()
                    .enumerate()
                    .map(|(i, q)| {
                        let label = q.label.clone().unwrap_or_else(|| format!("q{}", i + 1));
                        Arc::new(SphericalQuadratic::new(q.p, q.b.clone(), q.c, label)) as Arc<dyn Constraint>
                    })
                    .collect();
                Ok(Built::Custom {
                    problem: Problem::new(s.z.clone(), cons)?,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toml_cfg(text: &str) -> Result<RunConfig> {
        parse(text, Path::new("run.toml"))
    }

    #[test]
    fn packing_config_parses() {
        let c = toml_cfg("[problem]\nkind = \"packing\"\nm = 2\n[solver]\nepsilon = 1.0\nstart_level = 2.0\n").unwrap();
        assert!(matches!(c.problem, ProblemSection::Packing(PackingSection { m: Some(2), .. })));
        assert_eq!(c.solver.epsilon, 1.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml_cfg("[problem]\nkind = \"packing\"\nm = 2\nbogus = 1\n").is_err());
        assert!(toml_cfg("[problem]\nkind = \"packing\"\nm = 2\n[solver]\nepsilonn = 1.0\n").is_err());
        assert!(toml_cfg("[problem]\nkind = \"packing\"\nm = 2\n[extra]\n").is_err());
    }

    #[test]
    fn json_alternative() {
        let c: RunConfig = parse(
            r#"{"problem": {"kind": "custom-quadratic", "z": [0, 0], "constraints": [{"p": -1, "b": [0, 0], "c": 1}]}}"#,
            Path::new("run.json"),
        )
        .unwrap();
        let built = c.problem.build(Path::new("run.json")).unwrap();
        assert_eq!(built.problem().n, 2);
    }

    #[test]
    fn parse_errors_carry_a_line() {
        let err = toml_cfg("[problem]\nkind = \"packing\"\nm = = 2\n").unwrap_err();
        assert!(format!("{err:#}").contains("line 3"), "{err:#}");
    }
}
