//! Scenario, jet and reparametrization files.
//!
//! A scenario is a JSON object
//!
//! ```json
//! {
//!   "n": 2, "r": 2,
//!   "samples": [ { "weight": 1.0, "c": [[[[ [re, im], ... ], ...], ...], ...] } ],
//!   "theta_L": [ [ [1, 0], [0, 0] ], [ [0, 0], [1, 0] ] ],
//!   "delta": 0.0,
//!   "metric": { "kind": { "kind": "demailly_gg" }, "k": 3, "p": 6, "epsilons": [0.1, 0.01, 0.001] }
//! }
//! ```
//!
//! `c[i][j][α][β]` is indexed base indices first, then fiber indices. Complex
//! numbers are `[re, im]` pairs. `metric` is optional.

use std::fs;
use std::path::Path;

use jetmorse_core::hermitian::BaseSample;
use jetmorse_core::{BaseScenario, Complex64, CurvatureModel, HermitianForm, Jet, MetricSpec, Reparam};
use serde::{Deserialize, Serialize};

use crate::CliError;

type Pair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleFile {
    pub weight: f64,
    pub c: Vec<Vec<Vec<Vec<Pair>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n: usize,
    pub r: usize,
    pub samples: Vec<SampleFile>,
    #[serde(rename = "theta_L")]
    pub theta_l: Vec<Vec<Pair>>,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetFile {
    /// `rows[s-1][α]` is `ξ_{s,α} = f_α^(s)(0)/s!`.
    pub rows: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReparamFile {
    /// `alpha[s-1]` multiplies `t^s`.
    pub alpha: Vec<Pair>,
}

/// A parsed scenario with its optional embedded metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub base: BaseScenario,
    pub metric: Option<MetricSpec>,
}

fn cx(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, CliError> {
    // serde_json messages carry "at line L column C"
    serde_json::from_str(text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn shape_error(what: String) -> CliError {
    CliError::Core(jetmorse_core::Error::InvalidScenario(what))
}

impl ScenarioFile {
    pub fn to_scenario(&self) -> Result<Scenario, CliError> {
        let (n, r) = (self.n, self.r);
        if n == 0 || r == 0 {
            return Err(shape_error(format!("n and r must be positive (n={n}, r={r})")));
        }
        let mut samples = Vec::with_capacity(self.samples.len());
        for (idx, s) in self.samples.iter().enumerate() {
            let ok = s.c.len() == n
                && s.c.iter().all(|ci| {
                    ci.len() == n && ci.iter().all(|cij| cij.len() == r && cij.iter().all(|row| row.len() == r))
                });
            if !ok {
                return Err(shape_error(format!("samples[{idx}].c: expected shape [{n}][{n}][{r}][{r}]")));
            }
            let flat = s.c.iter().flatten().flatten().flatten().map(cx).collect();
            let model = CurvatureModel::new(n, r, flat)
                .map_err(|e| shape_error(format!("samples[{idx}].c: {e}")))?;
            samples.push(BaseSample { weight: s.weight, model });
        }
        if self.theta_l.len() != n || self.theta_l.iter().any(|row| row.len() != n) {
            return Err(shape_error(format!("theta_L: expected shape [{n}][{n}]")));
        }
        let rows: Vec<Vec<Complex64>> = self.theta_l.iter().map(|row| row.iter().map(cx).collect()).collect();
        let theta = HermitianForm::from_rows(&rows).map_err(|e| shape_error(format!("theta_L: {e}")))?;
        let base = BaseScenario::new(samples, theta, self.delta)?;
        if let Some(m) = &self.metric {
            MetricSpec::new(m.kind, m.k, m.p, m.epsilons.clone())?;
        }
        Ok(Scenario {
            base,
            metric: self.metric.clone(),
        })
    }

    pub fn from_scenario(sc: &Scenario) -> Self {
        let base = &sc.base;
        let (n, r) = (base.n(), base.r());
        let samples = base
            .samples()
            .iter()
            .map(|s| SampleFile {
                weight: s.weight,
                c: (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| (0..r).map(|a| (0..r).map(|b| pair(s.model.get(i, j, a, b))).collect()).collect())
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        ScenarioFile {
            n,
            r,
            samples,
            theta_l: base.theta_l().rows().iter().map(|row| row.iter().map(|&z| pair(z)).collect()).collect(),
            delta: base.delta(),
            metric: sc.metric.clone(),
        }
    }
}

pub fn parse_scenario_str(path: &Path, text: &str) -> Result<Scenario, CliError> {
    parse_json::<ScenarioFile>(path, text)?.to_scenario()
}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario, CliError> {
    parse_scenario_str(path, &read(path)?)
}

pub fn scenario_to_string(sc: &Scenario) -> String {
    serde_json::to_string_pretty(&ScenarioFile::from_scenario(sc)).expect("scenario serializes")
}

pub fn write_scenario(path: &Path, sc: &Scenario) -> Result<(), CliError> {
    fs::write(path, scenario_to_string(sc)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn parse_jet(path: &Path) -> Result<Jet, CliError> {
    let f: JetFile = parse_json(path, &read(path)?)?;
    Ok(Jet::new(f.rows.iter().map(|row| row.iter().map(cx).collect()).collect())?)
}

pub fn jet_file(j: &Jet) -> JetFile {
    JetFile {
        rows: j.rows().iter().map(|row| row.iter().map(|&z| pair(z)).collect()).collect(),
    }
}

pub fn parse_reparam(path: &Path) -> Result<Reparam, CliError> {
    let f: ReparamFile = parse_json(path, &read(path)?)?;
    Ok(Reparam::new(f.alpha.iter().map(cx).collect())?)
}

pub fn reparam_file(phi: &Reparam) -> ReparamFile {
    ReparamFile {
        alpha: phi.alpha().iter().map(|&z| pair(z)).collect(),
    }
}
