//! Flat `key = value` configuration.
//!
//! Physical quantities carry their unit in the key: `_dbm` (powers, taken
//! relative to `noise_dbm`), `_db`, `_lin` or `_bpshz` (rates). One of
//! `p_bs`, `p_d_max`, `lambda_si` and `lambda_d` may hold a comma-separated
//! list, which becomes the sweep axis.

use std::collections::BTreeMap;
use std::fmt;

use cnoma::channel::{db_to_linear, ChannelStats};
use cnoma::experiments::{Baseline, Pairing, Scenario, Sweep, SweepAxis};
use cnoma::power_control::{PairPolicy, RelayPower, Strategy};
use cnoma::{InputError, PairChannels, PairProblem, QosSpec};
use thiserror::Error;

/// Where a setting came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override,
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override => f.write_str("--set"),
            Origin::Default => f.write_str("default"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{origin}: {msg}")]
    Syntax { origin: Origin, msg: String },
    #[error("duplicate key `{key}` on {first} and {second}")]
    Duplicate {
        key: String,
        first: Origin,
        second: Origin,
    },
    #[error("{0}")]
    Missing(String),
    #[error("invalid configuration: {0}")]
    Input(#[from] InputError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Dbm,
    Db,
    Lin,
    Bpshz,
}

impl Unit {
    const ALL: [(Unit, &'static str); 4] = [
        (Unit::Dbm, "_dbm"),
        (Unit::Db, "_db"),
        (Unit::Lin, "_lin"),
        (Unit::Bpshz, "_bpshz"),
    ];

    fn suffix(self) -> &'static str {
        Self::ALL.iter().find(|(u, _)| *u == self).unwrap().1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Power,
    Gain,
    Noise,
    Rate,
    Plain,
}

impl Kind {
    fn units(self) -> &'static [Unit] {
        match self {
            Kind::Power => &[Unit::Dbm, Unit::Db, Unit::Lin],
            Kind::Gain => &[Unit::Db, Unit::Lin],
            Kind::Noise => &[Unit::Dbm],
            Kind::Rate => &[Unit::Bpshz],
            Kind::Plain => &[],
        }
    }
}

const KEYS: [(&str, Kind); 21] = [
    ("p_bs", Kind::Power),
    ("p_d_max", Kind::Power),
    ("noise", Kind::Noise),
    ("lambda_s", Kind::Gain),
    ("lambda_w", Kind::Gain),
    ("lambda_d", Kind::Gain),
    ("lambda_si", Kind::Gain),
    ("gain_strong", Kind::Gain),
    ("gain_weak", Kind::Gain),
    ("gain_d2d", Kind::Gain),
    ("gain_si", Kind::Gain),
    ("r_th", Kind::Rate),
    ("k", Kind::Plain),
    ("trials", Kind::Plain),
    ("seed", Kind::Plain),
    ("mode", Kind::Plain),
    ("pairing", Kind::Plain),
    ("relay_power", Kind::Plain),
    ("verify_instances", Kind::Plain),
    ("bench_k", Kind::Plain),
    ("bench_reps", Kind::Plain),
];

const SWEEPABLE: [&str; 4] = ["p_bs", "p_d_max", "lambda_si", "lambda_d"];

fn kind_of(base: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _)| *k == base).map(|(_, kind)| *kind)
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    unit: Option<Unit>,
    /// Raw key as written.
    key: String,
    value: String,
    origin: Origin,
}

/// Settings keyed by unit-free name, before interpretation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            raw.insert(line, Origin::Line(i + 1), false)?;
        }
        Ok(raw)
    }

    /// Applies `key=value`, replacing any setting of the same quantity.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        self.insert(assignment.trim(), Origin::Override, true)
    }

    fn insert(&mut self, line: &str, origin: Origin, replace: bool) -> Result<(), ConfigError> {
        let syntax = |msg: String| ConfigError::Syntax { origin, msg };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| syntax(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(syntax(format!("expected `key = value`, got `{line}`")));
        }
        let (base, unit) = split_unit(key);
        let Some(kind) = kind_of(base) else {
            return Err(syntax(format!("unknown key `{key}`")));
        };
        match (kind, unit) {
            (Kind::Plain, Some(_)) => return Err(syntax(format!("unknown key `{key}`"))),
            (Kind::Plain, None) => {}
            (kind, None) => return Err(syntax(format!("`{key}` needs a unit suffix ({})", unit_list(kind)))),
            (kind, Some(u)) if !kind.units().contains(&u) => {
                return Err(syntax(format!(
                    "unit {} not accepted for `{base}` (use {})",
                    u.suffix(),
                    unit_list(kind)
                )))
            }
            _ => {}
        }
        if !replace {
            if let Some(prev) = self.entries.get(base) {
                return Err(ConfigError::Duplicate {
                    key: base.to_string(),
                    first: prev.origin,
                    second: origin,
                });
            }
        }
        self.entries.insert(
            base.to_string(),
            Entry {
                unit,
                key: key.to_string(),
                value: value.to_string(),
                origin,
            },
        );
        Ok(())
    }
}

fn split_unit(key: &str) -> (&str, Option<Unit>) {
    for (unit, suffix) in Unit::ALL {
        if let Some(base) = key.strip_suffix(suffix) {
            if kind_of(base).is_some() {
                return (base, Some(unit));
            }
        }
    }
    (key, None)
}

fn unit_list(kind: Kind) -> String {
    kind.units().iter().map(|u| u.suffix()).collect::<Vec<_>>().join(", ")
}

/// Values of a swept quantity, as written and in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    /// Key as written, e.g. `p_bs_dbm`; it names the unit of `given`.
    pub key: String,
    pub given: Vec<f64>,
    pub linear: Vec<f64>,
}

/// Validated configuration with every quantity linear and noise-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub stats: ChannelStats,
    pub p_bs: f64,
    pub p_d_max: f64,
    pub qos: QosSpec,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub policy: PairPolicy,
    pub pairing: Pairing,
    pub sweep: SweepSpec,
    /// Instantaneous gains of a single pair, for `solve-pair`.
    pub pair: Option<[f64; 4]>,
    pub verify_instances: u64,
    pub bench_k: Vec<usize>,
    pub bench_reps: usize,
}

/// Defaults, as config text.
pub const DEFAULTS: &str = "\
lambda_s_db = 10
lambda_w_db = 0
lambda_d_db = 6
lambda_si_db = 0
p_bs_dbm = 30
p_d_max_dbm = 30
noise_dbm = 0
r_th_bpshz = 1
k = 5
trials = 10000
seed = 0
mode = fd
pairing = hungarian
relay_power = adaptive
verify_instances = 1000
bench_k = 10, 20, 40, 80, 160, 250
bench_reps = 5
";

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    Config::from_raw(&RawConfig::parse(text)?)
}

impl Config {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let mut merged = RawConfig::parse(DEFAULTS).expect("defaults parse");
        for e in merged.entries.values_mut() {
            e.origin = Origin::Default;
        }
        for (base, e) in &raw.entries {
            merged.entries.insert(base.clone(), e.clone());
        }
        let r = Reader { raw: &merged };

        let noise = r.number("noise")?;
        let lists: Vec<&str> = SWEEPABLE
            .iter()
            .copied()
            .filter(|k| r.entry(k).is_some_and(|e| e.value.contains(',')))
            .collect();
        if lists.len() > 1 {
            return Err(ConfigError::Missing(format!(
                "only one swept quantity allowed, got lists for {}",
                lists.join(" and ")
            )));
        }
        for (base, e) in &merged.entries {
            if e.value.contains(',') && !SWEEPABLE.contains(&base.as_str()) && base != "bench_k" {
                return Err(ConfigError::Syntax {
                    origin: e.origin,
                    msg: format!("`{}` takes a single value", e.key),
                });
            }
        }
        let swept = lists.first().copied().unwrap_or("p_bs");
        let axis = match swept {
            "p_bs" => SweepAxis::BsPower,
            "p_d_max" => SweepAxis::RelayBudget,
            "lambda_si" => SweepAxis::SiMean,
            _ => SweepAxis::D2dMean,
        };
        let given = r.numbers(swept)?;
        let linear = given.iter().map(|&v| r.to_linear(swept, v, noise)).collect();
        let sweep = SweepSpec {
            axis,
            key: r.entry(swept).unwrap().key.clone(),
            given,
            linear,
        };
        let first = |base: &str| -> Result<f64, ConfigError> {
            Ok(r.to_linear(base, r.numbers(base)?[0], noise))
        };

        let stats = ChannelStats::new(
            first("lambda_s")?,
            first("lambda_w")?,
            first("lambda_d")?,
            first("lambda_si")?,
        )?;
        let gains = ["gain_strong", "gain_weak", "gain_d2d", "gain_si"];
        let present = gains.iter().filter(|g| r.entry(g).is_some()).count();
        let pair = match present {
            0 => None,
            4 => Some([first(gains[0])?, first(gains[1])?, first(gains[2])?, first(gains[3])?]),
            _ => {
                return Err(ConfigError::Missing(
                    "a pair needs all of gain_strong, gain_weak, gain_d2d and gain_si".into(),
                ))
            }
        };

        let strategy = match r.text("mode") {
            "hd" => Strategy::HalfDuplex,
            "fd" => Strategy::FullDuplex,
            "select" => Strategy::ModeSelect,
            "noma" => Strategy::Noma,
            other => return Err(r.bad("mode", format!("unknown mode `{other}` (hd, fd, select, noma)"))),
        };
        let relay = match r.text("relay_power") {
            "adaptive" => RelayPower::Adaptive,
            "fixed" => RelayPower::Fixed,
            other => return Err(r.bad("relay_power", format!("unknown relay power `{other}` (adaptive, fixed)"))),
        };
        let pairing = match r.text("pairing") {
            "hungarian" => Pairing::Hungarian,
            "baseline1" => Pairing::Baseline(Baseline::Reversed),
            "baseline2" => Pairing::Baseline(Baseline::Aligned),
            "random" => Pairing::Baseline(Baseline::Random),
            other => {
                return Err(r.bad(
                    "pairing",
                    format!("unknown pairing `{other}` (hungarian, baseline1, baseline2, random)"),
                ))
            }
        };

        let config = Self {
            stats,
            p_bs: first("p_bs")?,
            p_d_max: first("p_d_max")?,
            qos: QosSpec::new(r.number("r_th")?)?,
            k: r.count("k", 1)?,
            trials: r.count("trials", 1)?,
            seed: r.integer("seed")?,
            policy: PairPolicy::new(strategy, relay),
            pairing,
            sweep,
            pair,
            verify_instances: r.count("verify_instances", 1)? as u64,
            bench_k: r
                .text("bench_k")
                .split(',')
                .map(|s| r.parse_count("bench_k", s.trim(), 1))
                .collect::<Result<_, _>>()?,
            bench_reps: r.count("bench_reps", 5)?,
        };
        config.scenario().validate().map_err(|e| ConfigError::Missing(e.to_string()))?;
        Ok(config)
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            stats: self.stats,
            k: self.k,
            p_bs: self.p_bs,
            p_d_max: self.p_d_max,
            qos: self.qos,
            policy: self.policy,
            pairing: self.pairing,
            trials: self.trials,
            sweep: Sweep {
                axis: self.sweep.axis,
                values: self.sweep.linear.clone(),
            },
        }
    }

    /// The single pair described by the `gain_*` keys.
    pub fn pair_problem(&self) -> Result<PairProblem, ConfigError> {
        let [s, w, d, si] = self.pair.ok_or_else(|| {
            ConfigError::Missing("solve-pair needs gain_strong, gain_weak, gain_d2d and gain_si".into())
        })?;
        let ch = PairChannels::new(s, w, d, si)?;
        Ok(PairProblem::new(ch, self.p_bs, self.p_d_max, self.qos)?)
    }
}

struct Reader<'a> {
    raw: &'a RawConfig,
}

impl Reader<'_> {
    fn entry(&self, base: &str) -> Option<&Entry> {
        self.raw.entries.get(base)
    }

    fn text(&self, base: &str) -> &str {
        &self.entry(base).expect("key has a default").value
    }

    fn bad(&self, base: &str, msg: String) -> ConfigError {
        ConfigError::Syntax {
            origin: self.entry(base).map_or(Origin::Default, |e| e.origin),
            msg,
        }
    }

    fn numbers(&self, base: &str) -> Result<Vec<f64>, ConfigError> {
        let e = self.entry(base).expect("key has a default or was checked");
        e.value
            .split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.bad(base, format!("`{}`: `{s}` is not a finite number", e.key)))
            })
            .collect()
    }

    fn number(&self, base: &str) -> Result<f64, ConfigError> {
        Ok(self.numbers(base)?[0])
    }

    fn integer(&self, base: &str) -> Result<u64, ConfigError> {
        let s = self.text(base);
        s.parse()
            .map_err(|_| self.bad(base, format!("`{base}`: `{s}` is not a non-negative integer")))
    }

    fn parse_count(&self, base: &str, s: &str, min: usize) -> Result<usize, ConfigError> {
        s.parse::<usize>()
            .ok()
            .filter(|&v| v >= min)
            .ok_or_else(|| self.bad(base, format!("`{base}`: `{s}` is not an integer >= {min}")))
    }

    fn count(&self, base: &str, min: usize) -> Result<usize, ConfigError> {
        self.parse_count(base, self.text(base), min)
    }

    fn to_linear(&self, base: &str, v: f64, noise_dbm: f64) -> f64 {
        match self.entry(base).and_then(|e| e.unit) {
            Some(Unit::Dbm) => db_to_linear(v - noise_dbm),
            Some(Unit::Db) => db_to_linear(v),
            _ => v,
        }
    }
}
