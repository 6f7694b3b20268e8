//! Experiment configuration: every knob that influences an output file.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::Stop;
use crate::lowerbound::table::{named_table, TransitionTable1Bit};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "TREEWALK_WORKERS";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("invalid {what} {value:?}: {reason}")]
    Invalid {
        what: &'static str,
        value: String,
        reason: String,
    },
}

fn invalid(what: &'static str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        what,
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn parse_num<T: FromStr>(what: &'static str, value: &str, part: &str) -> Result<T, ConfigError> {
    part.parse()
        .map_err(|_| invalid(what, value, format!("{part:?} is not a number")))
}

macro_rules! string_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.to_string())
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let text = String::deserialize(d)?;
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    CleanMem,
    Token,
    Rotor,
    /// A 1-bit path table, by id; named tables resolve to their id.
    Table(u16),
}

impl Algo {
    pub fn table(&self) -> Option<TransitionTable1Bit> {
        match self {
            Algo::Table(id) => TransitionTable1Bit::from_id(*id).ok(),
            _ => None,
        }
    }
}

impl FromStr for Algo {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "cleanmem" => Ok(Algo::CleanMem),
            "token" => Ok(Algo::Token),
            "rotor" => Ok(Algo::Rotor),
            "x" | "y" | "z" | "r" | "q" => Ok(Algo::Table(named_table(&lower).expect("known name").id())),
            _ => {
                let id = lower
                    .strip_prefix("table:")
                    .ok_or_else(|| invalid("algorithm", s, "expected cleanmem, token, rotor, x, y, z, r, q or table:<id>"))?;
                let id: u16 = parse_num("algorithm", s, id)?;
                TransitionTable1Bit::from_id(id).map_err(|e| invalid("algorithm", s, e.to_string()))?;
                Ok(Algo::Table(id))
            }
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algo::CleanMem => write!(f, "cleanmem"),
            Algo::Token => write!(f, "token"),
            Algo::Rotor => write!(f, "rotor"),
            Algo::Table(id) => write!(f, "table:{id}"),
        }
    }
}

string_serde!(Algo);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeSource {
    File(PathBuf),
    /// Path `0 - ... - n-1` with ports in ascending neighbor order.
    Path(usize),
    Random { n: usize, seed: u64 },
    /// Every tree shape with `min..=max` nodes.
    All { min: usize, max: usize },
    /// Every path with `min..=max` nodes.
    Paths { min: usize, max: usize },
    /// `count` independent random trees on `n` nodes.
    Samples { n: usize, count: u64, seed: u64 },
}

fn parse_range(what: &'static str, s: &str, body: &str) -> Result<(usize, usize), ConfigError> {
    match body.split_once("..") {
        Some((a, b)) => Ok((parse_num(what, s, a)?, parse_num(what, s, b)?)),
        None => {
            let n = parse_num(what, s, body)?;
            Ok((n, n))
        }
    }
}

impl FromStr for TreeSource {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let parts: Vec<&str> = rest.split(':').collect();
        match kind {
            "file" if !rest.is_empty() => Ok(TreeSource::File(PathBuf::from(rest))),
            "path" if parts.len() == 1 => Ok(TreeSource::Path(parse_num("tree", s, parts[0])?)),
            "random" if parts.len() == 2 => Ok(TreeSource::Random {
                n: parse_num("tree", s, parts[0])?,
                seed: parse_num("tree", s, parts[1])?,
            }),
            "all" => {
                let (min, max) = parse_range("tree", s, rest)?;
                Ok(TreeSource::All { min, max })
            }
            "paths" => {
                let (min, max) = parse_range("tree", s, rest)?;
                Ok(TreeSource::Paths { min, max })
            }
            "samples" if parts.len() == 3 => Ok(TreeSource::Samples {
                n: parse_num("tree", s, parts[0])?,
                count: parse_num("tree", s, parts[1])?,
                seed: parse_num("tree", s, parts[2])?,
            }),
            _ => Err(invalid(
                "tree source",
                s,
                "expected file:PATH, path:N, random:N:SEED, all:A..B, paths:A..B or samples:N:COUNT:SEED",
            )),
        }
    }
}

impl fmt::Display for TreeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeSource::File(p) => write!(f, "file:{}", p.display()),
            TreeSource::Path(n) => write!(f, "path:{n}"),
            TreeSource::Random { n, seed } => write!(f, "random:{n}:{seed}"),
            TreeSource::All { min, max } => write!(f, "all:{min}..{max}"),
            TreeSource::Paths { min, max } => write!(f, "paths:{min}..{max}"),
            TreeSource::Samples { n, count, seed } => write!(f, "samples:{n}:{count}:{seed}"),
        }
    }
}

string_serde!(TreeSource);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelingSource {
    Given,
    Enumerate,
    Seed(u64),
}

impl FromStr for LabelingSource {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "given" => Ok(LabelingSource::Given),
            "enumerate" => Ok(LabelingSource::Enumerate),
            _ => match s.strip_prefix("seed:") {
                Some(x) => Ok(LabelingSource::Seed(parse_num("labeling", s, x)?)),
                None => Err(invalid("labeling", s, "expected given, enumerate or seed:N")),
            },
        }
    }
}

impl fmt::Display for LabelingSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelingSource::Given => write!(f, "given"),
            LabelingSource::Enumerate => write!(f, "enumerate"),
            LabelingSource::Seed(s) => write!(f, "seed:{s}"),
        }
    }
}

string_serde!(LabelingSource);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitSource {
    Clean,
    Dirty(u64),
    File(PathBuf),
    Enumerate,
}

impl FromStr for InitSource {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "clean" => Ok(InitSource::Clean),
            "enumerate" => Ok(InitSource::Enumerate),
            _ => {
                if let Some(x) = s.strip_prefix("dirty:") {
                    Ok(InitSource::Dirty(parse_num("init", s, x)?))
                } else if let Some(p) = s.strip_prefix("file:") {
                    Ok(InitSource::File(PathBuf::from(p)))
                } else {
                    Err(invalid("init", s, "expected clean, dirty:SEED, file:PATH or enumerate"))
                }
            }
        }
    }
}

impl fmt::Display for InitSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSource::Clean => write!(f, "clean"),
            InitSource::Dirty(s) => write!(f, "dirty:{s}"),
            InitSource::File(p) => write!(f, "file:{}", p.display()),
            InitSource::Enumerate => write!(f, "enumerate"),
        }
    }
}

string_serde!(InitSource);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartSource {
    Index(usize),
    /// Node `n / 2`.
    Middle,
    All,
    /// Drawn with the instance's generator.
    Random,
}

impl StartSource {
    pub fn starts(&self, n: usize) -> Vec<usize> {
        match self {
            StartSource::Index(i) => vec![(*i).min(n - 1)],
            StartSource::Middle => vec![n / 2],
            StartSource::All => (0..n).collect(),
            StartSource::Random => vec![0],
        }
    }
}

impl FromStr for StartSource {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "middle" => Ok(StartSource::Middle),
            "all" => Ok(StartSource::All),
            "random" => Ok(StartSource::Random),
            _ => Ok(StartSource::Index(parse_num("start", s, s)?)),
        }
    }
}

impl fmt::Display for StartSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StartSource::Index(i) => write!(f, "{i}"),
            StartSource::Middle => write!(f, "middle"),
            StartSource::All => write!(f, "all"),
            StartSource::Random => write!(f, "random"),
        }
    }
}

string_serde!(StartSource);

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub command: String,
    pub algo: Algo,
    /// Starting agent bit for 1-bit tables.
    pub agent_bit: bool,
    pub tree: TreeSource,
    pub labeling: LabelingSource,
    pub init: InitSource,
    pub start: StartSource,
    /// Move budget; `None` picks a per-algorithm default from `n`.
    pub budget: Option<u64>,
    pub stop: Stop,
    pub monitors: bool,
    pub output: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    /// Write one row per instance in addition to the summary.
    pub rows: bool,
    pub workers: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(command: &str, algo: Algo, tree: TreeSource) -> Self {
        ExperimentConfig {
            command: command.to_string(),
            algo,
            agent_bit: false,
            tree,
            labeling: LabelingSource::Given,
            init: InitSource::Clean,
            start: StartSource::Index(0),
            budget: None,
            stop: Stop::SelfTermination,
            monitors: true,
            output: None,
            trace: None,
            rows: false,
            workers: default_workers(),
            seed: 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Worker count from the environment, else the number of available CPUs.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sources_round_trip() {
        for s in ["file:a.json", "path:5", "random:50:7", "all:2..6", "paths:4..6", "samples:20:100:3"] {
            assert_eq!(s.parse::<TreeSource>().unwrap().to_string(), s);
        }
        assert_eq!("all:4".parse::<TreeSource>().unwrap(), TreeSource::All { min: 4, max: 4 });
        for s in ["clean", "dirty:1", "file:m.json", "enumerate"] {
            assert_eq!(s.parse::<InitSource>().unwrap().to_string(), s);
        }
        for s in ["cleanmem", "token", "rotor", "table:77"] {
            assert_eq!(s.parse::<Algo>().unwrap().to_string(), s);
        }
        assert!("table:4096".parse::<Algo>().is_err());
        assert!("walk".parse::<Algo>().is_err());
        assert!(matches!("x".parse::<Algo>().unwrap(), Algo::Table(_)));
    }

    #[test]
    fn config_round_trip() {
        let c = ExperimentConfig::new("sweep", Algo::Token, TreeSource::All { min: 2, max: 6 });
        let back: ExperimentConfig = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }
}
