//! Graph view of the effective Hamiltonian: configurations are nodes and an
//! edge joins two configurations whose coupling exceeds a cutoff.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::FockBasis;
use crate::error::{Error, Result};
use crate::output::{csv_reader, fmt_f64, CsvSink};

pub const DEFAULT_CUTOFF: f64 = 1e-2;

/// Symmetric 0/1 matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    links: DMatrix<u8>,
    pub cutoff: f64,
}

impl AdjacencyMatrix {
    /// `a_{l,l'} = 1` iff `|H(l,l')| > cutoff` and `l != l'`. The upper
    /// triangle decides so the result is symmetric even for slightly
    /// non-Hermitian input.
    pub fn from_heff(heff: &DMatrix<Complex64>, cutoff: f64) -> Result<Self> {
        if !heff.is_square() {
            return Err(Error::DimensionMismatch("H_eff must be square".into()));
        }
        if !(cutoff >= 0.0) {
            return Err(Error::invalid("cutoff", "must be >= 0"));
        }
        let n = heff.nrows();
        let mut links = DMatrix::<u8>::zeros(n, n);
        for c in 0..n {
            for r in 0..c {
                if heff[(r, c)].norm() > cutoff {
                    links[(r, c)] = 1;
                    links[(c, r)] = 1;
                }
            }
        }
        Ok(AdjacencyMatrix { links, cutoff })
    }

    pub fn from_edges(nodes: usize, edges: &[(usize, usize)], cutoff: f64) -> Result<Self> {
        let mut links = DMatrix::<u8>::zeros(nodes, nodes);
        for &(a, b) in edges {
            if a >= nodes || b >= nodes || a == b {
                return Err(Error::invalid("edge", format!("({}, {}) is not a valid edge", a + 1, b + 1)));
            }
            links[(a, b)] = 1;
            links[(b, a)] = 1;
        }
        Ok(AdjacencyMatrix { links, cutoff })
    }

    pub fn nodes(&self) -> usize {
        self.links.nrows()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.links[(a, b)] == 1
    }

    /// Edges `(a, b)` with `a < b`, 0-based, row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.nodes();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if self.has_edge(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.links
            .row_iter()
            .map(|row| row.iter().map(|&x| x as usize).sum())
            .collect()
    }

    pub fn summary(&self) -> Result<GraphSummary> {
        let degrees = self.degrees();
        let edge_count = degrees.iter().sum::<usize>() / 2;
        Ok(GraphSummary {
            density: density(self)?,
            degrees,
            edge_count,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub degrees: Vec<usize>,
    pub edge_count: usize,
    pub density: f64,
}

/// `2|E| / (|V| (|V| - 1))`.
pub fn density(a: &AdjacencyMatrix) -> Result<f64> {
    let v = a.nodes();
    if v < 2 {
        return Err(Error::invalid("nodes", "density needs at least two nodes"));
    }
    let twice_edges: usize = a.degrees().iter().sum();
    Ok(twice_edges as f64 / (v * (v - 1)) as f64)
}

/// Degree counts pooled over every node of every graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeHistogram {
    /// `counts[K]` for `K = 0..nodes-1`.
    pub counts: Vec<u64>,
}

impl DegreeHistogram {
    pub fn new(nodes: usize) -> Self {
        DegreeHistogram {
            counts: vec![0; nodes],
        }
    }

    pub fn add(&mut self, a: &AdjacencyMatrix) -> Result<()> {
        if a.nodes() != self.counts.len() {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} nodes, histogram expects {}",
                a.nodes(),
                self.counts.len()
            )));
        }
        for k in a.degrees() {
            self.counts[k] += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &DegreeHistogram) -> Result<()> {
        if other.counts.len() != self.counts.len() {
            return Err(Error::DimensionMismatch("degree histograms differ in size".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `P(K)`, normalized over `K = 0..nodes-1`.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total().max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    pub fn mean(&self) -> f64 {
        let total = self.total() as f64;
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| k as f64 * c as f64)
            .sum::<f64>()
            / total
    }

    /// Population variance of the pooled degrees.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let total = self.total() as f64;
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| (k as f64 - mean).powi(2) * c as f64)
            .sum::<f64>()
            / total
    }

    /// `K, count, P`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut sink = CsvSink::new(writer, &["K", "count", "P"])?;
        for (k, (c, p)) in self.counts.iter().zip(self.probabilities()).enumerate() {
            sink.row(&[k.to_string(), c.to_string(), fmt_f64(p)])?;
        }
        sink.finish()
    }
}

pub fn degree_distribution(ensemble: &[AdjacencyMatrix]) -> Result<DegreeHistogram> {
    let first = ensemble.first().ok_or(Error::Empty("graph ensemble"))?;
    let mut hist = DegreeHistogram::new(first.nodes());
    for a in ensemble {
        hist.add(a)?;
    }
    Ok(hist)
}

/// `l, K` with 1-based `l`.
pub fn write_degrees<W: Write>(a: &AdjacencyMatrix, writer: W) -> Result<()> {
    let mut sink = CsvSink::new(writer, &["l", "K"])?;
    for (l, k) in a.degrees().iter().enumerate() {
        sink.row(&[(l + 1).to_string(), k.to_string()])?;
    }
    sink.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    GraphMl,
    EdgeCsv,
}

/// Writes the graph with 1-based node ids and `|H_eff|` edge weights.
/// When a basis is given, nodes carry their occupation vector as a label.
pub fn export_graph<W: Write>(
    a: &AdjacencyMatrix,
    heff: &DMatrix<Complex64>,
    basis: Option<&FockBasis>,
    format: GraphFormat,
    mut writer: W,
) -> Result<()> {
    if heff.nrows() != a.nodes() {
        return Err(Error::DimensionMismatch("H_eff and graph sizes differ".into()));
    }
    if let Some(b) = basis {
        if b.len() != a.nodes() {
            return Err(Error::DimensionMismatch("basis and graph sizes differ".into()));
        }
    }
    let label = |l: usize| basis.map(|b| b.states()[l].to_string());
    let edges = a.edges();
    match format {
        GraphFormat::Dot => {
            writeln!(writer, "graph heff {{")?;
            for l in 0..a.nodes() {
                match label(l) {
                    Some(s) => writeln!(writer, "  {} [label=\"{}\"];", l + 1, s)?,
                    None => writeln!(writer, "  {};", l + 1)?,
                }
            }
            for (x, y) in edges {
                writeln!(writer, "  {} -- {} [weight={}];", x + 1, y + 1, fmt_f64(heff[(x, y)].norm()))?;
            }
            writeln!(writer, "}}")?;
        }
        GraphFormat::GraphMl => {
            writeln!(writer, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
            writeln!(
                writer,
                r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" xsi:schemaLocation="http://graphml.graphdrawing.org/xmlns http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd">"#
            )?;
            writeln!(writer, r#"  <key id="label" for="node" attr.name="label" attr.type="string"/>"#)?;
            writeln!(writer, r#"  <key id="weight" for="edge" attr.name="weight" attr.type="double"/>"#)?;
            writeln!(writer, r#"  <graph id="heff" edgedefault="undirected">"#)?;
            for l in 0..a.nodes() {
                match label(l) {
                    Some(s) => writeln!(
                        writer,
                        r#"    <node id="n{}"><data key="label">{}</data></node>"#,
                        l + 1,
                        s.replace('<', "&lt;").replace('>', "&gt;")
                    )?,
                    None => writeln!(writer, r#"    <node id="n{}"/>"#, l + 1)?,
                }
            }
            for (i, (x, y)) in edges.into_iter().enumerate() {
                writeln!(
                    writer,
                    r#"    <edge id="e{}" source="n{}" target="n{}"><data key="weight">{}</data></edge>"#,
                    i + 1,
                    x + 1,
                    y + 1,
                    fmt_f64(heff[(x, y)].norm())
                )?;
            }
            writeln!(writer, "  </graph>")?;
            writeln!(writer, "</graphml>")?;
        }
        GraphFormat::EdgeCsv => {
            let mut sink = CsvSink::new(writer, &["l", "l_tilde", "weight"])?;
            for (x, y) in edges {
                sink.row(&[(x + 1).to_string(), (y + 1).to_string(), fmt_f64(heff[(x, y)].norm())])?;
            }
            sink.finish()?;
        }
    }
    Ok(())
}

/// Reads an edge CSV written by [`export_graph`].
pub fn import_edge_csv<R: Read>(reader: R, nodes: usize, cutoff: f64) -> Result<AdjacencyMatrix> {
    let mut rdr = csv_reader(reader);
    let mut edges = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<usize> {
            rec.get(i)
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&v| v >= 1)
                .map(|v| v - 1)
                .ok_or_else(|| Error::invalid("edge csv", format!("bad node id in {rec:?}")))
        };
        edges.push((parse(0)?, parse(1)?));
    }
    AdjacencyMatrix::from_edges(nodes, &edges, cutoff)
}
