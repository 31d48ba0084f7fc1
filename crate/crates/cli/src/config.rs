use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};

use boxcert::algebra::Scenario;
use boxcert::moments::LevelSpec;
use boxcert::sdp::{BellFunctional, BuildOptions, Flags, SolverOptions, Target, Template};
use boxcert::swap::{chsh_reference, chsh_swap, cglmp_reference, cglmp_swap};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Everything a sweep can be configured with. Every field is optional so a
/// config file and the command-line flags can be layered.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Option<String>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: Option<usize>,
    pub at: Option<String>,
    pub level: Option<String>,
    pub localizing_level: Option<String>,
    pub localizing_weight_words: Option<bool>,
    pub rho_psd: Option<bool>,
    pub localizing: Option<bool>,
    pub isotropic: Option<bool>,
    pub solver: Option<SolverOptions>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub timing: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
        let mut v: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("{}: invalid JSON", path.display()))?;
        // `at` may be written as a number
        if let Some(at) = v.get_mut("at") {
            if let Some(x) = at.as_f64() {
                *at = serde_json::Value::String(x.to_string());
            }
        }
        serde_json::from_value(v).with_context(|| format!("{}: invalid config", path.display()))
    }

    /// Fields set in `over` replace those of `self`. A range on one side
    /// replaces a single value on the other and vice versa.
    pub fn merged_with(self, over: RunConfig) -> RunConfig {
        let ranged = over.from.is_some() || over.to.is_some() || over.points.is_some();
        let (at, from, to, points) = if over.at.is_some() {
            (over.at, None, None, None)
        } else if ranged {
            (None, over.from.or(self.from), over.to.or(self.to), over.points.or(self.points))
        } else {
            (self.at, self.from, self.to, self.points)
        };
        RunConfig {
            scenario: over.scenario.or(self.scenario),
            from,
            to,
            points,
            at,
            level: over.level.or(self.level),
            localizing_level: over.localizing_level.or(self.localizing_level),
            localizing_weight_words: over.localizing_weight_words.or(self.localizing_weight_words),
            rho_psd: over.rho_psd.or(self.rho_psd),
            localizing: over.localizing.or(self.localizing),
            isotropic: over.isotropic.or(self.isotropic),
            solver: over.solver.or(self.solver),
            output: over.output.or(self.output),
            format: over.format.or(self.format),
            threads: over.threads.or(self.threads),
            timing: over.timing.or(self.timing),
        }
    }
}

/// `auto` (None), `npa:N` or `local:N`.
pub fn parse_level(text: &str) -> anyhow::Result<Option<LevelSpec>> {
    let t = text.trim().to_ascii_lowercase();
    if t == "auto" {
        return Ok(None);
    }
    let (kind, n) = t
        .split_once(':')
        .ok_or_else(|| anyhow!("level `{text}`: expected auto, npa:N or local:N"))?;
    let n: usize = n.parse().with_context(|| format!("level `{text}`: bad number"))?;
    match kind {
        "npa" => Ok(Some(LevelSpec::Npa(n))),
        "local" => Ok(Some(LevelSpec::LocalProduct(n))),
        _ => bail!("level `{text}`: expected auto, npa:N or local:N"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioName {
    Chsh,
    ChshIsotropic,
    Cglmp,
    Tau,
}

impl ScenarioName {
    fn parse(s: &str) -> anyhow::Result<Self> {
        Ok(match s {
            "chsh" => ScenarioName::Chsh,
            "chsh-isotropic" => ScenarioName::ChshIsotropic,
            "cglmp" => ScenarioName::Cglmp,
            "tau" => ScenarioName::Tau,
            _ => bail!("unknown scenario `{s}` (expected chsh, chsh-isotropic, cglmp or tau)"),
        })
    }

    fn scenario(self) -> Scenario {
        match self {
            ScenarioName::Cglmp => Scenario::cglmp(),
            _ => Scenario::chsh(),
        }
    }

    fn target(self) -> Target {
        match self {
            ScenarioName::Chsh | ScenarioName::ChshIsotropic => Target::Fidelity {
                swap: chsh_swap(),
                reference: chsh_reference(),
            },
            ScenarioName::Cglmp => Target::Fidelity {
                swap: cglmp_swap(),
                reference: cglmp_reference(),
            },
            ScenarioName::Tau => Target::Tau,
        }
    }

    fn default_flags(self) -> Flags {
        let base = Flags::defaults_for(&self.scenario());
        match self {
            ScenarioName::ChshIsotropic | ScenarioName::Tau => Flags {
                isotropic: true,
                ..base
            },
            _ => base,
        }
    }
}

/// A validated sweep.
#[derive(Clone, Debug)]
pub struct SweepPlan {
    pub scenario_name: String,
    name: ScenarioName,
    pub bell: BellFunctional,
    pub flags: Flags,
    pub build: BuildOptions,
    pub single: Option<f64>,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub solver: SolverOptions,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub threads: usize,
    pub timing: bool,
}

pub const DEFAULT_POINTS: usize = 25;

impl SweepPlan {
    pub fn resolve(c: &RunConfig) -> anyhow::Result<Self> {
        let scenario_name = c.scenario.clone().ok_or_else(|| anyhow!("--scenario is required"))?;
        let name = ScenarioName::parse(&scenario_name)?;
        let scenario = name.scenario();
        let bell = BellFunctional::for_scenario(&scenario)?;

        let d = name.default_flags();
        let flags = Flags {
            rho_psd: c.rho_psd.unwrap_or(d.rho_psd),
            localizing: c.localizing.unwrap_or(d.localizing),
            isotropic: c.isotropic.unwrap_or(d.isotropic),
        };
        flags.check(&scenario)?;
        if name == ScenarioName::Tau && flags.rho_psd {
            bail!("--rho-psd has no meaning for the tau scenario");
        }

        let lo = bell.classical_bound.min(bell.quantum_extremum);
        let hi = bell.classical_bound.max(bell.quantum_extremum);
        let single = match c.at.as_deref() {
            None => None,
            Some("extremum") => Some(bell.quantum_extremum),
            Some(s) => Some(
                s.trim()
                    .parse::<f64>()
                    .with_context(|| format!("--at `{s}`: expected a number or `extremum`"))?,
            ),
        };
        let from = c.from.unwrap_or(lo);
        let to = c.to.unwrap_or(hi);
        let points = c.points.unwrap_or(DEFAULT_POINTS);
        if single.is_none() {
            if points == 0 {
                bail!("--points must be at least 1");
            }
            if points > 1 && !(from < to) {
                bail!("sweep range needs from < to, got [{from}, {to}]");
            }
        }
        if let Some(b) = single {
            if !b.is_finite() {
                bail!("--at must be finite");
            }
        }

        let solver = c.solver.clone().unwrap_or_default().with_env_overrides()?;
        let threads = c.threads.unwrap_or(1);
        if threads == 0 {
            bail!("--threads must be at least 1");
        }
        Ok(SweepPlan {
            scenario_name,
            name,
            bell,
            flags,
            build: BuildOptions {
                level: c.level.as_deref().map(parse_level).transpose()?.flatten(),
                localizing_level: c.localizing_level.as_deref().map(parse_level).transpose()?.flatten(),
                localizing_weight_words: c.localizing_weight_words.unwrap_or(false),
            },
            single,
            from,
            to,
            points,
            solver,
            output: c.output.clone(),
            format: c.format.unwrap_or_default(),
            threads,
            timing: c.timing.unwrap_or(true),
        })
    }

    pub fn template(&self) -> boxcert::Result<Template> {
        Template::build(
            &self.name.scenario(),
            &self.name.target(),
            self.bell.clone(),
            self.flags,
            &self.build,
        )
    }
}
