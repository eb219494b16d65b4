//! Experiment configuration files.
//!
//! A config names an experiment, a seed, and an output directory. Any
//! setting of the experiment may be changed under `[overrides]`; everything
//! not overridden keeps its default. All problems in a file are reported
//! together.
//!
//! ```toml
//! schema_version = 1
//! experiment = "custom"
//! seed = 7
//! output_dir = "results/custom"
//!
//! [overrides]
//! attack = "sensing-jammer"
//! tau = 3.4
//! game.test_slots = 200
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::{Table, Value};

use super::settings::*;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Fig5a,
    Fig5b,
    Fig6,
    Fig10a,
    Fig10b,
    Fig11b,
    Table3,
    Fig23a,
    GanAugment,
    Custom,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Fig5a,
        Experiment::Fig5b,
        Experiment::Fig6,
        Experiment::Fig10a,
        Experiment::Fig10b,
        Experiment::Fig11b,
        Experiment::Table3,
        Experiment::Fig23a,
        Experiment::GanAugment,
        Experiment::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig5a => "fig5a",
            Experiment::Fig5b => "fig5b",
            Experiment::Fig6 => "fig6",
            Experiment::Fig10a => "fig10a",
            Experiment::Fig10b => "fig10b",
            Experiment::Fig11b => "fig11b",
            Experiment::Table3 => "table3",
            Experiment::Fig23a => "fig23a",
            Experiment::GanAugment => "gan-augment",
            Experiment::Custom => "custom",
        }
    }

    pub fn default_settings(self) -> Settings {
        match self {
            Experiment::Fig5a => Settings::Fig5a(Default::default()),
            Experiment::Fig5b => Settings::Fig5b(Default::default()),
            Experiment::Fig6 => Settings::Fig6(Default::default()),
            Experiment::Fig10a => Settings::Fig10a(Default::default()),
            Experiment::Fig10b => Settings::Fig10b(Default::default()),
            Experiment::Fig11b => Settings::Fig11b(Default::default()),
            Experiment::Table3 => Settings::Table3(Default::default()),
            Experiment::Fig23a => Settings::Fig23a(Default::default()),
            Experiment::GanAugment => Settings::GanAugment(Default::default()),
            Experiment::Custom => Settings::Custom(Default::default()),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
            Error::Config(vec![format!("unknown experiment `{s}`; expected one of {}", names.join(", "))])
        })
    }
}

impl Settings {
    pub fn experiment(&self) -> Experiment {
        match self {
            Settings::Fig5a(_) => Experiment::Fig5a,
            Settings::Fig5b(_) => Experiment::Fig5b,
            Settings::Fig6(_) => Experiment::Fig6,
            Settings::Fig10a(_) => Experiment::Fig10a,
            Settings::Fig10b(_) => Experiment::Fig10b,
            Settings::Fig11b(_) => Experiment::Fig11b,
            Settings::Table3(_) => Experiment::Table3,
            Settings::Fig23a(_) => Experiment::Fig23a,
            Settings::GanAugment(_) => Experiment::GanAugment,
            Settings::Custom(_) => Experiment::Custom,
        }
    }

    pub fn to_table(&self) -> Table {
        let v = match self {
            Settings::Fig5a(s) => Table::try_from(s),
            Settings::Fig5b(s) => Table::try_from(s),
            Settings::Fig6(s) => Table::try_from(s),
            Settings::Fig10a(s) => Table::try_from(s),
            Settings::Fig10b(s) => Table::try_from(s),
            Settings::Fig11b(s) => Table::try_from(s),
            Settings::Table3(s) => Table::try_from(s),
            Settings::Fig23a(s) => Table::try_from(s),
            Settings::GanAugment(s) => Table::try_from(s),
            Settings::Custom(s) => Table::try_from(s),
        };
        v.expect("settings contain only TOML-representable values")
    }

    fn from_table(exp: Experiment, t: Table) -> std::result::Result<Self, String> {
        fn de<T: DeserializeOwned>(t: Table) -> std::result::Result<T, String> {
            serde_path_to_error::deserialize(t).map_err(|e| format!("{}: {}", e.path(), e.inner().message()))
        }
        Ok(match exp {
            Experiment::Fig5a => Settings::Fig5a(de(t)?),
            Experiment::Fig5b => Settings::Fig5b(de(t)?),
            Experiment::Fig6 => Settings::Fig6(de(t)?),
            Experiment::Fig10a => Settings::Fig10a(de(t)?),
            Experiment::Fig10b => Settings::Fig10b(de(t)?),
            Experiment::Fig11b => Settings::Fig11b(de(t)?),
            Experiment::Table3 => Settings::Table3(de(t)?),
            Experiment::Fig23a => Settings::Fig23a(de(t)?),
            Experiment::GanAugment => Settings::GanAugment(de(t)?),
            Experiment::Custom => Settings::Custom(de(t)?),
        })
    }
}

/// A validated run description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub settings: Settings,
}

#[derive(Serialize)]
struct Snapshot<'a> {
    schema_version: u32,
    experiment: &'a str,
    seed: u64,
    output_dir: String,
    overrides: Table,
}

impl ExperimentConfig {
    /// Default settings of `experiment`.
    pub fn new(experiment: Experiment, seed: u64, output_dir: impl Into<PathBuf>) -> Self {
        Self { experiment, seed, output_dir: output_dir.into(), settings: experiment.default_settings() }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let mut doc: Table =
            text.parse().map_err(|e: toml::de::Error| Error::Config(vec![format!("invalid TOML: {}", e.message())]))?;
        let mut errs = Vec::new();

        match doc.remove("schema_version") {
            Some(Value::Integer(v)) if v == i64::from(SCHEMA_VERSION) => {}
            Some(v) => errs.push(format!("schema_version must be {SCHEMA_VERSION}, got {v}")),
            None => errs.push("missing schema_version".into()),
        }
        let experiment = match doc.remove("experiment") {
            Some(Value::String(s)) => match s.parse::<Experiment>() {
                Ok(e) => Some(e),
                Err(Error::Config(v)) => {
                    errs.extend(v);
                    None
                }
                Err(e) => {
                    errs.push(e.to_string());
                    None
                }
            },
            Some(v) => {
                errs.push(format!("experiment must be a string, got {v}"));
                None
            }
            None => {
                errs.push("missing experiment".into());
                None
            }
        };
        let seed = match doc.remove("seed") {
            Some(Value::Integer(s)) if s >= 0 => s as u64,
            Some(Value::Integer(s)) => {
                errs.push(format!("seed must be nonnegative, got {s}"));
                0
            }
            Some(v) => {
                errs.push(format!("seed must be an integer, got {v}"));
                0
            }
            None => 0,
        };
        let output_dir = match doc.remove("output_dir") {
            Some(Value::String(s)) => PathBuf::from(s),
            Some(v) => {
                errs.push(format!("output_dir must be a string, got {v}"));
                PathBuf::new()
            }
            None => PathBuf::from("results"),
        };
        let overrides = match doc.remove("overrides") {
            Some(Value::Table(t)) => t,
            Some(v) => {
                errs.push(format!("overrides must be a table, got {v}"));
                Table::new()
            }
            None => Table::new(),
        };
        for key in doc.keys() {
            errs.push(format!("unknown key `{key}`"));
        }

        let Some(experiment) = experiment else {
            return Err(Error::Config(errs));
        };
        match apply(experiment, experiment.default_settings().to_table(), overrides) {
            Ok(settings) if errs.is_empty() => Ok(Self { experiment, seed, output_dir, settings }),
            Ok(_) => Err(Error::Config(errs)),
            Err(Error::Config(v)) => {
                errs.extend(v);
                Err(Error::Config(errs))
            }
            Err(e) => Err(e),
        }
    }

    /// Applies `key=value` assignments, where `key` is a dotted path into the
    /// settings and `value` is a TOML value (bare words are taken as strings).
    pub fn set(&mut self, assignments: &[String]) -> Result<()> {
        let mut overrides = Table::new();
        let mut errs = Vec::new();
        for a in assignments {
            let Some((key, raw)) = a.split_once('=') else {
                errs.push(format!("`{a}` is not of the form key=value"));
                continue;
            };
            let value = parse_value(raw.trim());
            insert_path(&mut overrides, key.trim(), value);
        }
        if !errs.is_empty() {
            return Err(Error::Config(errs));
        }
        self.settings = apply(self.experiment, self.settings.to_table(), overrides)?;
        Ok(())
    }

    /// Normalized TOML with every setting spelled out.
    pub fn to_toml(&self) -> String {
        let snap = Snapshot {
            schema_version: SCHEMA_VERSION,
            experiment: self.experiment.name(),
            seed: self.seed,
            output_dir: self.output_dir.display().to_string(),
            overrides: self.settings.to_table(),
        };
        toml::to_string(&snap).expect("config snapshot is representable as TOML")
    }
}

fn parse_value(raw: &str) -> Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.into())),
        Err(_) => Value::String(raw.into()),
    }
}

fn insert_path(t: &mut Table, key: &str, value: Value) {
    match key.split_once('.') {
        None => {
            t.insert(key.into(), value);
        }
        Some((head, rest)) => {
            let entry = t.entry(head.to_string()).or_insert_with(|| Value::Table(Table::new()));
            if !entry.is_table() {
                *entry = Value::Table(Table::new());
            }
            insert_path(entry.as_table_mut().expect("just made a table"), rest, value);
        }
    }
}

/// Deep-merges `over` into `base`, recording and skipping keys absent from
/// `base`.
fn merge(base: &mut Table, over: Table, prefix: &str, unknown: &mut Vec<String>) {
    for (k, v) in over {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match (base.get_mut(&k), v) {
            (None, _) => unknown.push(format!("unknown setting `{path}`")),
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o, &path, unknown),
            (Some(slot), v) => *slot = v,
        }
    }
}

/// Merges `overrides` into `base` and validates the result, reporting
/// unknown keys and invalid values together.
fn apply(exp: Experiment, mut base: Table, overrides: Table) -> Result<Settings> {
    let mut errs = Vec::new();
    merge(&mut base, overrides, "", &mut errs);
    match Settings::from_table(exp, base) {
        Ok(settings) => {
            errs.extend(settings.problems());
            if errs.is_empty() {
                return Ok(settings);
            }
        }
        Err(e) => errs.push(e),
    }
    Err(Error::Config(errs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
    }

    #[test]
    fn defaults_validate_and_round_trip() {
        for e in Experiment::ALL {
            let cfg = ExperimentConfig::new(e, 3, "out");
            assert!(cfg.settings.problems().is_empty(), "{e}: {:?}", cfg.settings.problems());
            let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
            assert_eq!(back.to_toml(), cfg.to_toml());
        }
    }

    #[test]
    fn bare_words_become_strings() {
        assert_eq!(parse_value("dl-jammer"), Value::String("dl-jammer".into()));
        assert_eq!(parse_value("3"), Value::Integer(3));
        assert_eq!(parse_value("[1, 2]"), Value::Array(vec![Value::Integer(1), Value::Integer(2)]));
    }
}
