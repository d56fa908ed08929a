//! Flat key-value experiment configuration.
//!
//! The format is line-oriented `key = value`, `#` for comments. Every run
//! echoes its fully resolved configuration in this format, and feeding that
//! file back through `simulate --config` reproduces the run byte for byte.
//!
//! Keys: `graph` (k-circulant | offsets | edge-list | builtin), `n`, `k`,
//! `offsets`, `path`, `builtin`, `adversaries`, `model`, `scope`, `f`,
//! `f_filter`, `signal`, `alpha`, `init`, `horizon`, `tol`, `seed`.

use std::fmt::Write as _;
use std::path::PathBuf;

use kcirc::graph::NodeId;
use kcirc::sim::{AdversaryModel, AdversaryScope, AdversarySignal};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    KCirculant { n: usize, k: usize },
    Offsets { n: usize, offsets: Vec<u32> },
    EdgeList(PathBuf),
    Builtin(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Uniform { lo: f64, hi: f64 },
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub adversaries: Vec<NodeId>,
    pub model: AdversaryModel,
    pub scope: AdversaryScope,
    pub f: usize,
    pub f_filter: usize,
    pub signal: AdversarySignal,
    /// `None` means the uniform default `1 / (2 * max_in_degree)`.
    pub alpha: Option<f64>,
    pub init: InitSpec,
    pub horizon: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            graph: GraphSource::KCirculant { n: 15, k: 6 },
            adversaries: Vec::new(),
            model: AdversaryModel::Malicious,
            scope: AdversaryScope::FLocal,
            f: 0,
            f_filter: 0,
            signal: AdversarySignal::Sinusoid { center: 0.0, amplitude: 50.0, period: 20.0 },
            alpha: None,
            init: InitSpec::Uniform { lo: -50.0, hi: 50.0 },
            horizon: 500,
            tol: 1e-6,
            seed: 42,
        }
    }
}

fn bad(key: &str, value: &str) -> CliError {
    CliError::invalid(format!("config: bad value `{value}` for key `{key}`"))
}

pub fn parse_signal(text: &str) -> Result<AdversarySignal, CliError> {
    let (name, args) = text.split_once(':').unwrap_or((text, ""));
    let nums: Vec<f64> = if args.is_empty() {
        Vec::new()
    } else {
        args.split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("signal", text))?
    };
    match (name, nums.as_slice()) {
        ("constant", [c]) => Ok(AdversarySignal::Constant(*c)),
        ("ramp", [start, slope]) => Ok(AdversarySignal::Ramp { start: *start, slope: *slope }),
        ("sin", [center, amplitude, period]) => Ok(AdversarySignal::Sinusoid {
            center: *center,
            amplitude: *amplitude,
            period: *period,
        }),
        ("random", [lo, hi]) => Ok(AdversarySignal::RandomInRange { lo: *lo, hi: *hi }),
        ("per-edge", [lo, hi]) => Ok(AdversarySignal::PerEdgeDistinct { lo: *lo, hi: *hi }),
        _ => Err(bad("signal", text)),
    }
}

pub fn signal_to_string(signal: &AdversarySignal) -> String {
    match signal {
        AdversarySignal::Constant(c) => format!("constant:{c}"),
        AdversarySignal::Ramp { start, slope } => format!("ramp:{start},{slope}"),
        AdversarySignal::Sinusoid { center, amplitude, period } => {
            format!("sin:{center},{amplitude},{period}")
        }
        AdversarySignal::RandomInRange { lo, hi } => format!("random:{lo},{hi}"),
        AdversarySignal::PerEdgeDistinct { lo, hi } => format!("per-edge:{lo},{hi}"),
    }
}

pub fn parse_init(text: &str) -> Result<InitSpec, CliError> {
    let (name, args) = text.split_once(':').ok_or_else(|| bad("init", text))?;
    match name {
        "uniform" => {
            let parts: Vec<f64> = args
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad("init", text))?;
            match parts.as_slice() {
                [lo, hi] => Ok(InitSpec::Uniform { lo: *lo, hi: *hi }),
                _ => Err(bad("init", text)),
            }
        }
        "values" => {
            let values: Vec<f64> = args
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad("init", text))?;
            Ok(InitSpec::Values(values))
        }
        _ => Err(bad("init", text)),
    }
}

pub fn init_to_string(init: &InitSpec) -> String {
    match init {
        InitSpec::Uniform { lo, hi } => format!("uniform:{lo},{hi}"),
        InitSpec::Values(values) => {
            let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            format!("values:{}", parts.join(","))
        }
    }
}

pub fn parse_node_list(text: &str) -> Result<Vec<NodeId>, CliError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|p| p.trim().parse::<NodeId>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::invalid(format!("bad node list `{text}`")))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        let mut graph_kind: Option<String> = None;
        let mut n: Option<usize> = None;
        let mut k: Option<usize> = None;
        let mut offsets: Option<Vec<u32>> = None;
        let mut path: Option<PathBuf> = None;
        let mut builtin: Option<String> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| CliError::invalid(format!("config line {}: expected `key = value`", idx + 1)))?;
            match key {
                "graph" => graph_kind = Some(value.to_string()),
                "n" => n = Some(value.parse().map_err(|_| bad(key, value))?),
                "k" => k = Some(value.parse().map_err(|_| bad(key, value))?),
                "offsets" => {
                    offsets = Some(
                        value
                            .split(',')
                            .map(|p| p.trim().parse::<u32>())
                            .collect::<Result<_, _>>()
                            .map_err(|_| bad(key, value))?,
                    )
                }
                "path" => path = Some(PathBuf::from(value)),
                "builtin" => builtin = Some(value.to_string()),
                "adversaries" => cfg.adversaries = parse_node_list(value)?,
                "model" => {
                    cfg.model = match value {
                        "malicious" => AdversaryModel::Malicious,
                        "byzantine" => AdversaryModel::Byzantine,
                        _ => return Err(bad(key, value)),
                    }
                }
                "scope" => {
                    cfg.scope = match value {
                        "f-local" => AdversaryScope::FLocal,
                        "f-total" => AdversaryScope::FTotal,
                        _ => return Err(bad(key, value)),
                    }
                }
                "f" => cfg.f = value.parse().map_err(|_| bad(key, value))?,
                "f_filter" => cfg.f_filter = value.parse().map_err(|_| bad(key, value))?,
                "signal" => cfg.signal = parse_signal(value)?,
                "alpha" => {
                    cfg.alpha = if value == "default" {
                        None
                    } else {
                        Some(value.parse().map_err(|_| bad(key, value))?)
                    }
                }
                "init" => cfg.init = parse_init(value)?,
                "horizon" => cfg.horizon = value.parse().map_err(|_| bad(key, value))?,
                "tol" => cfg.tol = value.parse().map_err(|_| bad(key, value))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad(key, value))?,
                _ => return Err(CliError::invalid(format!("config: unknown key `{key}`"))),
            }
        }

        cfg.graph = match graph_kind.as_deref() {
            None | Some("k-circulant") => GraphSource::KCirculant {
                n: n.ok_or_else(|| CliError::invalid("config: k-circulant graph needs `n`"))?,
                k: k.ok_or_else(|| CliError::invalid("config: k-circulant graph needs `k`"))?,
            },
            Some("offsets") => GraphSource::Offsets {
                n: n.ok_or_else(|| CliError::invalid("config: offsets graph needs `n`"))?,
                offsets: offsets
                    .ok_or_else(|| CliError::invalid("config: offsets graph needs `offsets`"))?,
            },
            Some("edge-list") => GraphSource::EdgeList(
                path.ok_or_else(|| CliError::invalid("config: edge-list graph needs `path`"))?,
            ),
            Some("builtin") => GraphSource::Builtin(
                builtin.ok_or_else(|| CliError::invalid("config: builtin graph needs `builtin`"))?,
            ),
            Some(other) => return Err(bad("graph", other)),
        };
        Ok(cfg)
    }

    /// Canonical serialization; `parse` inverts it.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# kcirc experiment configuration\n");
        match &self.graph {
            GraphSource::KCirculant { n, k } => {
                out.push_str("graph = k-circulant\n");
                let _ = writeln!(out, "n = {n}");
                let _ = writeln!(out, "k = {k}");
            }
            GraphSource::Offsets { n, offsets } => {
                out.push_str("graph = offsets\n");
                let _ = writeln!(out, "n = {n}");
                let parts: Vec<String> = offsets.iter().map(|o| o.to_string()).collect();
                let _ = writeln!(out, "offsets = {}", parts.join(","));
            }
            GraphSource::EdgeList(path) => {
                out.push_str("graph = edge-list\n");
                let _ = writeln!(out, "path = {}", path.display());
            }
            GraphSource::Builtin(name) => {
                out.push_str("graph = builtin\n");
                let _ = writeln!(out, "builtin = {name}");
            }
        }
        let adversaries: Vec<String> = self.adversaries.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(out, "adversaries = {}", adversaries.join(","));
        let _ = writeln!(out, "model = {}", self.model.as_str());
        let _ = writeln!(out, "scope = {}", self.scope.as_str());
        let _ = writeln!(out, "f = {}", self.f);
        let _ = writeln!(out, "f_filter = {}", self.f_filter);
        let _ = writeln!(out, "signal = {}", signal_to_string(&self.signal));
        match self.alpha {
            Some(a) => {
                let _ = writeln!(out, "alpha = {a}");
            }
            None => out.push_str("alpha = default\n"),
        }
        let _ = writeln!(out, "init = {}", init_to_string(&self.init));
        let _ = writeln!(out, "horizon = {}", self.horizon);
        let _ = writeln!(out, "tol = {}", self.tol);
        let _ = writeln!(out, "seed = {}", self.seed);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_text() {
        let mut cfg = ExperimentConfig::default();
        cfg.adversaries = vec![0, 6];
        cfg.f = 1;
        cfg.f_filter = 1;
        cfg.alpha = Some(0.05);
        let text = cfg.to_text();
        let parsed = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(parsed, cfg);
        assert_eq!(parsed.to_text(), text);
    }

    #[test]
    fn parses_every_graph_source() {
        let offsets = ExperimentConfig::parse("graph = offsets\nn = 7\noffsets = 1,2,3\n").unwrap();
        assert_eq!(offsets.graph, GraphSource::Offsets { n: 7, offsets: vec![1, 2, 3] });

        let edge = ExperimentConfig::parse("graph = edge-list\npath = d1.txt\n").unwrap();
        assert_eq!(edge.graph, GraphSource::EdgeList(PathBuf::from("d1.txt")));

        let builtin =
            ExperimentConfig::parse("graph = builtin\nbuiltin = fig3-counterexample\n").unwrap();
        assert_eq!(builtin.graph, GraphSource::Builtin("fig3-counterexample".into()));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::parse("mystery = 1\n").is_err());
        assert!(ExperimentConfig::parse("graph = k-circulant\nn = 15\nk = six\n").is_err());
        assert!(ExperimentConfig::parse("graph = offsets\nn = 7\n").is_err());
    }

    #[test]
    fn signal_specs_round_trip() {
        for text in ["constant:5", "ramp:-60,0.5", "sin:0,50,20", "random:-80,80", "per-edge:-1,1"] {
            let signal = parse_signal(text).unwrap();
            assert_eq!(signal_to_string(&signal), text);
        }
        assert!(parse_signal("sin:1").is_err());
        assert!(parse_signal("noise:1,2").is_err());
    }

    #[test]
    fn init_specs_round_trip() {
        for text in ["uniform:-50,50", "values:1,2,3.5"] {
            let init = parse_init(text).unwrap();
            assert_eq!(init_to_string(&init), text);
        }
        assert!(parse_init("uniform:1").is_err());
        assert!(parse_init("fixed").is_err());
    }
}
