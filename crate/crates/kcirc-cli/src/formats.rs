//! Text formats: the edge-list graph format, DOT export, trajectory CSVs,
//! and the real-number formatting shared by every emitted file.
//!
//! Edge-list format: first significant line `n <count>`, then `e <src> <dst>`
//! per edge (0-indexed). `#` starts a comment line; blank lines are ignored.
//! Serialization is deterministic: edges sorted lexicographically.

use std::fmt;

use kcirc::graph::{Digraph, GraphError, NodeSubset};
use kcirc::sim::{Role, SimulationResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormatErrorKind {
    MissingHeader,
    RepeatedHeader,
    Malformed,
    Graph(GraphError),
}

/// Parse failure with the 1-based offending line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    pub line: usize,
    pub kind: FormatErrorKind,
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FormatErrorKind::MissingHeader => {
                write!(f, "line {}: expected header `n <count>`", self.line)
            }
            FormatErrorKind::RepeatedHeader => write!(f, "line {}: repeated header", self.line),
            FormatErrorKind::Malformed => {
                write!(f, "line {}: expected `e <src> <dst>`", self.line)
            }
            FormatErrorKind::Graph(e) => write!(f, "line {}: {e}", self.line),
        }
    }
}

impl std::error::Error for FormatError {}

/// Parse the edge-list text format.
pub fn parse_edge_list(text: &str) -> Result<Digraph, FormatError> {
    let mut n: Option<usize> = None;
    let mut header_line = 0usize;
    let mut edges: Vec<(u32, u32, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let tag = parts.next().expect("nonempty line has a first token");
        match tag {
            "n" => {
                let value = parts
                    .next()
                    .and_then(|v| v.parse::<usize>().ok())
                    .filter(|_| parts.next().is_none());
                match value {
                    Some(count) if n.is_none() => {
                        n = Some(count);
                        header_line = line_no;
                    }
                    Some(_) => {
                        return Err(FormatError { line: line_no, kind: FormatErrorKind::RepeatedHeader })
                    }
                    None => {
                        return Err(FormatError { line: line_no, kind: FormatErrorKind::MissingHeader })
                    }
                }
            }
            "e" => {
                if n.is_none() {
                    return Err(FormatError { line: line_no, kind: FormatErrorKind::MissingHeader });
                }
                let src = parts.next().and_then(|v| v.parse::<u32>().ok());
                let dst = parts.next().and_then(|v| v.parse::<u32>().ok());
                match (src, dst, parts.next()) {
                    (Some(s), Some(d), None) => edges.push((s, d, line_no)),
                    _ => return Err(FormatError { line: line_no, kind: FormatErrorKind::Malformed }),
                }
            }
            _ => return Err(FormatError { line: line_no, kind: FormatErrorKind::Malformed }),
        }
    }

    let n = n.ok_or(FormatError { line: text.lines().count() + 1, kind: FormatErrorKind::MissingHeader })?;
    // Validate each edge individually so the error names its line.
    for &(s, d, line_no) in &edges {
        if (s as usize) >= n {
            return Err(FormatError {
                line: line_no,
                kind: FormatErrorKind::Graph(GraphError::NodeOutOfRange { node: s, n }),
            });
        }
        if (d as usize) >= n {
            return Err(FormatError {
                line: line_no,
                kind: FormatErrorKind::Graph(GraphError::NodeOutOfRange { node: d, n }),
            });
        }
        if s == d {
            return Err(FormatError {
                line: line_no,
                kind: FormatErrorKind::Graph(GraphError::SelfLoop { node: s }),
            });
        }
    }
    Digraph::new(n, edges.into_iter().map(|(s, d, _)| (s, d)))
        .map_err(|e| FormatError { line: header_line, kind: FormatErrorKind::Graph(e) })
}

/// Deterministic edge-list serialization; `parse_edge_list` inverts it.
pub fn serialize_edge_list(g: &Digraph) -> String {
    let mut out = format!("n {}\n", g.node_count());
    for &(src, dst) in g.edges() {
        out.push_str(&format!("e {src} {dst}\n"));
    }
    out
}

/// DOT export for visualization; output-only.
pub fn to_dot(g: &Digraph) -> String {
    let mut out = String::from("digraph {\n");
    let mut isolated: Vec<bool> = vec![true; g.node_count()];
    for &(src, dst) in g.edges() {
        isolated[src as usize] = false;
        isolated[dst as usize] = false;
    }
    for (node, iso) in isolated.iter().enumerate() {
        if *iso {
            out.push_str(&format!("  {node};\n"));
        }
    }
    for &(src, dst) in g.edges() {
        out.push_str(&format!("  {src} -> {dst};\n"));
    }
    out.push_str("}\n");
    out
}

/// 17 significant digits, the contract for every real in emitted files.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Witness subsets print as sorted node lists.
pub fn subset_human(s: &NodeSubset) -> String {
    let nodes: Vec<String> = s.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", nodes.join(", "))
}

pub fn subset_csv(s: &NodeSubset) -> String {
    let nodes: Vec<String> = s.iter().map(|i| i.to_string()).collect();
    nodes.join(";")
}

/// Long-format trajectory CSV: one row per agent per step, 0-indexed agents.
pub fn trajectories_csv(result: &SimulationResult) -> String {
    let mut out = String::from("t,agent,role,value\n");
    let steps = result.trajectories.first().map(|tr| tr.values.len()).unwrap_or(0);
    for t in 0..steps {
        for tr in &result.trajectories {
            out.push_str(&format!("{t},{},{},{}\n", tr.agent, tr.role, format_real(tr.values[t])));
        }
    }
    out
}

/// Companion CSV of byzantine per-edge emissions, when any exist.
pub fn byzantine_sends_csv(result: &SimulationResult) -> Option<String> {
    if result.trajectories.iter().all(|tr| tr.per_edge_sends.is_empty()) {
        return None;
    }
    let mut out = String::from("t,src,dst,value\n");
    let steps = result.trajectories.first().map(|tr| tr.values.len()).unwrap_or(0);
    for t in 0..steps {
        for tr in &result.trajectories {
            if tr.role != Role::Byzantine {
                continue;
            }
            for send in tr.per_edge_sends.iter().filter(|s| s.step == t) {
                out.push_str(&format!(
                    "{t},{},{},{}\n",
                    tr.agent,
                    send.dst,
                    format_real(send.value)
                ));
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use kcirc::graph::make_k_circulant;

    #[test]
    fn parses_the_two_cycle() {
        let g = parse_edge_list("n 2\ne 0 1\ne 1 0\n").unwrap();
        assert_eq!(g, make_k_circulant(2, 1).unwrap());
    }

    #[test]
    fn serializes_sorted_definitional_edges() {
        let g = make_k_circulant(3, 1).unwrap();
        assert_eq!(serialize_edge_list(&g), "n 3\ne 0 1\ne 1 2\ne 2 0\n");
    }

    #[test]
    fn out_of_range_endpoint_names_line_two() {
        let err = parse_edge_list("n 2\ne 0 5\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.kind, FormatErrorKind::Graph(GraphError::NodeOutOfRange { node: 5, n: 2 }));
    }

    #[test]
    fn self_loop_and_malformed_lines_are_rejected() {
        let err = parse_edge_list("n 3\ne 1 1\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.kind, FormatErrorKind::Graph(GraphError::SelfLoop { node: 1 }));

        let err = parse_edge_list("n 3\nedge 0 1\n").unwrap_err();
        assert_eq!((err.line, err.kind), (2, FormatErrorKind::Malformed));

        let err = parse_edge_list("n 3\ne 0\n").unwrap_err();
        assert_eq!((err.line, err.kind), (2, FormatErrorKind::Malformed));

        let err = parse_edge_list("e 0 1\n").unwrap_err();
        assert_eq!((err.line, err.kind), (1, FormatErrorKind::MissingHeader));

        let err = parse_edge_list("n 2\nn 2\n").unwrap_err();
        assert_eq!((err.line, err.kind), (2, FormatErrorKind::RepeatedHeader));
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let g = parse_edge_list("# a graph\n\nn 3\n  # indented comment\ne 0 2\n\n").unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(g.has_edge(0, 2));
    }

    #[test]
    fn dot_export_shape() {
        let g = Digraph::new(3, [(0, 1)]).unwrap();
        assert_eq!(to_dot(&g), "digraph {\n  2;\n  0 -> 1;\n}\n");
    }

    #[test]
    fn reals_carry_seventeen_significant_digits() {
        assert_eq!(format_real(3.5), "3.5000000000000000e0");
        assert_eq!(format_real(-1.0 / 3.0), "-3.3333333333333331e-1");
    }
}
