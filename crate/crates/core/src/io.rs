//! Snapshot file ingestion and serialization.
//!
//! Single-file format, one record per line:
//!
//! ```text
//! # comment
//! <t> <u> <v> [w]
//! ```
//!
//! `w` defaults to 1.0 and timestamps must be nondecreasing. Directory mode
//! holds one `<t>.edges` file per snapshot with `<u> <v> [w]` lines.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{NodeInterner, SnapshotGraph};

/// An ordered sequence of snapshots sharing one node interner.
#[derive(Debug, Clone, Default)]
pub struct SnapshotSeries {
    pub interner: NodeInterner,
    pub graphs: Vec<SnapshotGraph>,
}

impl SnapshotSeries {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }
}

/// Collects the records of one timestamp before turning them into a graph.
struct SnapshotBuilder {
    t: u64,
    node_ids: Vec<usize>,
    local: std::collections::HashMap<usize, usize>,
    edges: Vec<(usize, usize, f64)>,
}

impl SnapshotBuilder {
    fn new(t: u64) -> Self {
        Self {
            t,
            node_ids: Vec::new(),
            local: Default::default(),
            edges: Vec::new(),
        }
    }

    fn local_of(&mut self, id: usize) -> usize {
        let next = self.node_ids.len();
        *self.local.entry(id).or_insert_with(|| {
            self.node_ids.push(id);
            next
        })
    }

    fn push(&mut self, interner: &mut NodeInterner, u: &str, v: &str, w: f64) {
        let (u, v) = (interner.intern(u), interner.intern(v));
        let (lu, lv) = (self.local_of(u), self.local_of(v));
        self.edges.push((lu, lv, w));
    }

    fn finish(self) -> SnapshotGraph {
        SnapshotGraph::from_edges_with_ids(self.t, self.node_ids, self.edges)
            .expect("records validated while parsing")
    }
}

struct EdgeRecord<'a> {
    u: &'a str,
    v: &'a str,
    w: f64,
}

fn parse_edge<'a>(fields: &[&'a str], line: usize) -> Result<EdgeRecord<'a>> {
    let err = |message: String| Error::Parse { line, message };
    let (u, v, w) = match *fields {
        [u, v] => (u, v, 1.0),
        [u, v, w] => {
            let w: f64 = w
                .parse()
                .map_err(|_| err(format!("invalid weight `{w}`")))?;
            (u, v, w)
        }
        _ => return Err(err(format!("expected `u v [w]`, got {} fields", fields.len()))),
    };
    if !(w > 0.0 && w.is_finite()) {
        return Err(err(format!("weight must be positive and finite, got {w}")));
    }
    if u == v {
        return Err(err(format!("self-loop on `{u}` is not allowed in input graphs")));
    }
    Ok(EdgeRecord { u, v, w })
}

fn record_fields(raw: &str) -> Option<Vec<&str>> {
    let trimmed = raw.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return None;
    }
    Some(trimmed.split_whitespace().collect())
}

/// Parses the single-file `<t> <u> <v> [w]` format.
pub fn parse_snapshots(text: &str) -> Result<SnapshotSeries> {
    let mut interner = NodeInterner::new();
    let graphs = parse_snapshots_with(text, &mut interner)?;
    Ok(SnapshotSeries { interner, graphs })
}

/// [`parse_snapshots`] against an existing interner, so that node ids stay
/// stable across several chunks of input.
pub fn parse_snapshots_with(text: &str, interner: &mut NodeInterner) -> Result<Vec<SnapshotGraph>> {
    let mut graphs = Vec::new();
    let mut current: Option<SnapshotBuilder> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(fields) = record_fields(raw) else {
            continue;
        };
        if fields.len() < 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected `t u v [w]`, got {} fields", fields.len()),
            });
        }
        let t: u64 = fields[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid timestamp `{}`", fields[0]),
        })?;
        let edge = parse_edge(&fields[1..], line)?;
        match current.as_ref().map(|b| b.t) {
            Some(prev) if t < prev => {
                return Err(Error::Parse {
                    line,
                    message: format!("timestamp {t} decreases (previous {prev})"),
                })
            }
            Some(prev) if t == prev => {}
            _ => {
                if let Some(done) = current.take() {
                    graphs.push(done.finish());
                }
                current = Some(SnapshotBuilder::new(t));
            }
        }
        current
            .as_mut()
            .expect("builder initialized above")
            .push(interner, edge.u, edge.v, edge.w);
    }
    if let Some(done) = current {
        graphs.push(done.finish());
    }
    Ok(graphs)
}

/// Parses directory-mode content: `(t, file text)` pairs in any order.
pub fn parse_snapshot_files(mut files: Vec<(u64, String)>) -> Result<SnapshotSeries> {
    files.sort_by_key(|(t, _)| *t);
    let mut series = SnapshotSeries::default();
    for (t, text) in files {
        let mut builder = SnapshotBuilder::new(t);
        for (i, raw) in text.lines().enumerate() {
            let Some(fields) = record_fields(raw) else {
                continue;
            };
            let edge = parse_edge(&fields, i + 1).map_err(|e| match e {
                Error::Parse { line, message } => Error::Parse {
                    line,
                    message: format!("{t}.edges: {message}"),
                },
                other => other,
            })?;
            builder.push(&mut series.interner, edge.u, edge.v, edge.w);
        }
        if !builder.edges.is_empty() {
            series.graphs.push(builder.finish());
        }
    }
    Ok(series)
}

/// Reads the `<t>.edges` files of a directory as `(t, text)` pairs.
pub fn read_snapshot_dir(dir: &Path) -> Result<Vec<(u64, String)>> {
    let io_err = |path: &Path, source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let path = entry.map_err(|e| io_err(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("edges") {
            continue;
        }
        let Some(t) = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.parse::<u64>().ok())
        else {
            continue;
        };
        let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        files.push((t, text));
    }
    Ok(files)
}

/// Loads a snapshot file or a directory of `<t>.edges` files.
pub fn load_snapshots(path: &Path) -> Result<SnapshotSeries> {
    if path.is_dir() {
        parse_snapshot_files(read_snapshot_dir(path)?)
    } else {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        parse_snapshots(&text)
    }
}

/// Serializes a series in the single-file format.
pub fn format_snapshots(series: &SnapshotSeries) -> String {
    let mut out = String::new();
    for g in &series.graphs {
        let ids = g.node_ids();
        for (u, v, w) in g.edges() {
            let (a, b) = (series.interner.name(ids[u]), series.interner.name(ids[v]));
            writeln!(out, "{} {a} {b} {w}", g.t()).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weight(series: &SnapshotSeries, k: usize, a: &str, b: &str) -> f64 {
        let g = &series.graphs[k];
        let local = g.local_index();
        let ia = local[&series.interner.get(a).unwrap()];
        let ib = local[&series.interner.get(b).unwrap()];
        g.edge_weight(ia, ib)
    }

    #[test]
    fn parses_two_snapshots() {
        let s = parse_snapshots("0 a b 1.0\n0 b c 2.0\n1 a b 1.0\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.graphs[0].t(), 0);
        assert_eq!(s.graphs[0].edge_count(), 2);
        assert_eq!(weight(&s, 0, "a", "b"), 1.0);
        assert_eq!(weight(&s, 0, "b", "c"), 2.0);
        assert_eq!(s.graphs[1].t(), 1);
        assert_eq!(s.graphs[1].node_count(), 2);
        assert_eq!(weight(&s, 1, "a", "b"), 1.0);
    }

    #[test]
    fn empty_file_is_empty_series() {
        assert!(parse_snapshots("").unwrap().is_empty());
        assert!(parse_snapshots("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn duplicate_lines_sum() {
        let s = parse_snapshots("0 a b 1.0\n0 a b 0.5\n").unwrap();
        assert_eq!(s.graphs[0].edge_count(), 1);
        assert_eq!(weight(&s, 0, "a", "b"), 1.5);
    }

    #[test]
    fn default_weight_and_comments() {
        let s = parse_snapshots("# header\n3 x y\n  \n3 y z 2\n").unwrap();
        assert_eq!(s.graphs[0].t(), 3);
        assert_eq!(weight(&s, 0, "x", "y"), 1.0);
    }

    #[test]
    fn unsorted_within_timestamp_is_fine() {
        let s = parse_snapshots("0 c d\n0 a b\n").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.graphs[0].edge_count(), 2);
    }

    fn parse_error_line(text: &str) -> usize {
        match parse_snapshots(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_report_line_numbers() {
        assert_eq!(parse_error_line("0 a b\n0 a\n"), 2);
        assert_eq!(parse_error_line("0 a b\nx a b\n"), 2);
        assert_eq!(parse_error_line("# c\n0 a b 0\n"), 2);
        assert_eq!(parse_error_line("0 a b -1\n"), 1);
        assert_eq!(parse_error_line("0 a a 1\n"), 1);
        assert_eq!(parse_error_line("1 a b\n0 a b\n"), 2);
        assert_eq!(parse_error_line("0 a b c d\n"), 1);
        assert_eq!(parse_error_line("0 a b w\n"), 1);
    }

    #[test]
    fn directory_mode() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("1.edges"), "a b\n").unwrap();
        std::fs::write(dir.path().join("0.edges"), "a b 2\nb c\n").unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let s = load_snapshots(dir.path()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.graphs[0].t(), 0);
        assert_eq!(weight(&s, 0, "a", "b"), 2.0);
        assert_eq!(s.graphs[1].edge_count(), 1);
    }

    #[test]
    fn format_round_trips() {
        let text = "0 a b 1\n0 b c 2.5\n2 c a 1\n";
        let s = parse_snapshots(text).unwrap();
        let again = parse_snapshots(&format_snapshots(&s)).unwrap();
        assert_eq!(again.len(), 2);
        assert_eq!(weight(&again, 0, "b", "c"), 2.5);
        assert_eq!(again.graphs[1].t(), 2);
    }
}
