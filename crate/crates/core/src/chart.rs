//! Evolution charts: node x time grids colored by temporal label.
//!
//! Rows are ordered so that members of a temporal community sit together.
//! Each node gets a tuple of its distinct labels, most frequent first (ties
//! by first occurrence). Nodes are sorted lexicographically by that tuple,
//! where a tuple that runs out compares as ABSENT, which sorts after every
//! label. Remaining ties go to the node that appeared first, then to the
//! node name.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::pipeline::ResultDocument;

pub const DEFAULT_CELL_SIZE: u32 = 8;

const PALETTE: [&str; 16] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#e7ba52", "#843c39", "#5254a3", "#637939", "#7b4173",
];

/// Deterministic color for a label.
pub fn label_color(label: usize) -> &'static str {
    PALETTE[label % PALETTE.len()]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvolutionChart {
    /// Row order.
    pub nodes: Vec<String>,
    /// Column order.
    pub times: Vec<u64>,
    /// `cells[row][column]`; `None` where the node is absent.
    pub cells: Vec<Vec<Option<usize>>>,
}

struct RowKey {
    name: String,
    tuple: Vec<usize>,
    first_seen: usize,
}

fn compare_tuples(a: &[usize], b: &[usize]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    // the shorter tuple continues with ABSENT, which sorts last
    b.len().cmp(&a.len())
}

impl EvolutionChart {
    pub fn from_document(doc: &ResultDocument) -> Self {
        let mut snapshots: Vec<_> = doc.snapshots.iter().collect();
        snapshots.sort_by_key(|s| s.t);
        let times: Vec<u64> = snapshots.iter().map(|s| s.t).collect();
        let names: BTreeSet<&String> = snapshots.iter().flat_map(|s| s.labels.keys()).collect();

        let mut rows: Vec<(RowKey, Vec<Option<usize>>)> = names
            .into_iter()
            .map(|name| {
                let cells: Vec<Option<usize>> =
                    snapshots.iter().map(|s| s.labels.get(name).copied()).collect();
                let mut stats: HashMap<usize, (usize, usize)> = HashMap::new();
                for (col, label) in cells.iter().enumerate() {
                    if let Some(l) = label {
                        stats.entry(*l).or_insert((0, col)).0 += 1;
                    }
                }
                let mut tuple: Vec<(usize, usize, usize)> =
                    stats.into_iter().map(|(l, (count, first))| (l, count, first)).collect();
                tuple.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
                let key = RowKey {
                    name: name.clone(),
                    tuple: tuple.into_iter().map(|(l, _, _)| l).collect(),
                    first_seen: cells.iter().position(Option::is_some).unwrap_or(usize::MAX),
                };
                (key, cells)
            })
            .collect();
        rows.sort_by(|(a, _), (b, _)| {
            compare_tuples(&a.tuple, &b.tuple)
                .then(a.first_seen.cmp(&b.first_seen))
                .then_with(|| a.name.cmp(&b.name))
        });

        let (keys, cells): (Vec<RowKey>, Vec<_>) = rows.into_iter().unzip();
        Self {
            nodes: keys.into_iter().map(|k| k.name).collect(),
            times,
            cells,
        }
    }

    /// Tab-separated matrix; absent cells are `-`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("node");
        for t in &self.times {
            write!(out, "\t{t}").unwrap();
        }
        out.push('\n');
        for (name, row) in self.nodes.iter().zip(&self.cells) {
            out.push_str(name);
            for cell in row {
                match cell {
                    Some(l) => write!(out, "\t{l}").unwrap(),
                    None => out.push_str("\t-"),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn labels(&self) -> BTreeSet<usize> {
        self.cells.iter().flatten().flatten().copied().collect()
    }

    /// SVG grid with one `cell`-sized square per present (node, time) and a
    /// label legend underneath.
    pub fn to_svg(&self, cell: u32) -> String {
        let cols = self.times.len() as u32;
        let rows = self.nodes.len() as u32;
        let labels = self.labels();
        let legend_line = 14u32;
        let grid_h = rows * cell;
        let width = (cols * cell).max(160);
        let height = grid_h + 8 + legend_line * labels.len() as u32;

        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
        )
        .unwrap();
        for (r, row) in self.cells.iter().enumerate() {
            for (c, label) in row.iter().enumerate() {
                if let Some(l) = label {
                    writeln!(
                        out,
                        r#"<rect x="{}" y="{}" width="{cell}" height="{cell}" fill="{}"><title>{} t={} label={l}</title></rect>"#,
                        c as u32 * cell,
                        r as u32 * cell,
                        label_color(*l),
                        xml_escape(&self.nodes[r]),
                        self.times[c],
                    )
                    .unwrap();
                }
            }
        }
        for (i, l) in labels.iter().enumerate() {
            let y = grid_h + 8 + i as u32 * legend_line;
            writeln!(
                out,
                r#"<rect x="0" y="{y}" width="10" height="10" fill="{}"/><text x="14" y="{}" font-size="10" font-family="sans-serif">label {l}</text>"#,
                label_color(*l),
                y + 9
            )
            .unwrap();
        }
        out.push_str("</svg>\n");
        out
    }

    /// Number of nodes per label, for summaries.
    pub fn label_sizes(&self) -> BTreeMap<usize, usize> {
        let mut sizes = BTreeMap::new();
        for l in self.cells.iter().flatten().flatten() {
            *sizes.entry(*l).or_insert(0) += 1;
        }
        sizes
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
