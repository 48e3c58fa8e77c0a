//! Plain-text formats.
//!
//! Every format is line oriented: fields are separated by tabs (any run
//! of whitespace is accepted), `#` starts a comment and blank lines are
//! skipped.
//!
//! | file          | line                 |
//! |---------------|----------------------|
//! | edge list     | `u  v  weight`       |
//! | measure       | `v  m`               |
//! | potential     | `v  value`           |
//! | metric matrix | `u  v  distance`     |
//! | edge function | `u  v  value`        |
//! | flow          | `u  v  flow`         |
//! | paths         | `v1 v2 v3 ...`       |

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{EdgeFunction, Measure, Potential, VertexId, WeightedGraph};
use crate::metrics::DenseMetric;
use crate::scalar::Scalar;

/// Non-comment lines split into fields, with 1-based line numbers.
pub fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, line)| {
        let body = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((k + 1, fields))
    })
}

pub fn field<F: FromStr>(fields: &[&str], k: usize, line: usize, what: &str) -> Result<F> {
    let raw = fields.get(k).ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    raw.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad {what} {raw:?}"),
    })
}

pub(crate) fn scalar<T: Scalar>(fields: &[&str], k: usize, line: usize, what: &str) -> Result<T> {
    let v: f64 = field(fields, k, line, what)?;
    if !v.is_finite() {
        return Err(Error::Parse { line, msg: format!("{what} must be finite") });
    }
    Ok(T::lit(v))
}

pub(crate) fn expect_fields(fields: &[&str], n: usize, line: usize) -> Result<()> {
    if fields.len() != n {
        return Err(Error::Parse {
            line,
            msg: format!("expected {n} fields, found {}", fields.len()),
        });
    }
    Ok(())
}

fn triples<T: Scalar>(text: &str, what: &str) -> Result<Vec<(usize, VertexId, VertexId, T)>> {
    records(text)
        .map(|(line, f)| {
            expect_fields(&f, 3, line)?;
            Ok((line, field(&f, 0, line, "vertex")?, field(&f, 1, line, "vertex")?, scalar(&f, 2, line, what)?))
        })
        .collect()
}

pub fn parse_edge_list<T: Scalar>(text: &str) -> Result<WeightedGraph<T>> {
    let edges = triples::<T>(text, "weight")?;
    WeightedGraph::from_edges([], edges.into_iter().map(|(_, u, v, w)| (u, v, w)))
}

pub fn load_graph<T: Scalar>(path: impl AsRef<Path>) -> Result<WeightedGraph<T>> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}

fn vertex_values<T: Scalar>(text: &str, graph: &WeightedGraph<T>, what: &str) -> Result<Vec<Option<T>>> {
    let mut out = vec![None; graph.len()];
    for (line, f) in records(text) {
        expect_fields(&f, 2, line)?;
        let v: VertexId = field(&f, 0, line, "vertex")?;
        let i = graph.require(v)?;
        if out[i].is_some() {
            return Err(Error::Duplicate(v));
        }
        out[i] = Some(scalar(&f, 1, line, what)?);
    }
    Ok(out)
}

/// Every vertex must be listed with a positive mass.
pub fn parse_measure<T: Scalar>(text: &str, graph: &WeightedGraph<T>) -> Result<Measure<T>> {
    let values = vertex_values(text, graph, "mass")?;
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::InvalidParameter(format!("no mass for vertex {}", graph.id(i)))))
        .collect::<Result<Vec<T>>>()?;
    Measure::new(values)
}

/// Unlisted vertices default to zero.
pub fn parse_potential<T: Scalar>(text: &str, graph: &WeightedGraph<T>) -> Result<Potential<T>> {
    let values = vertex_values(text, graph, "value")?;
    Ok(Potential::new(values.into_iter().map(|v| v.unwrap_or(T::zero())).collect()))
}

/// Values on every edge, given in either orientation.
pub fn parse_edge_function<T: Scalar>(text: &str, graph: &WeightedGraph<T>) -> Result<EdgeFunction<T>> {
    let mut values: Vec<Option<T>> = vec![None; graph.edge_count()];
    for (_, u, v, w) in triples::<T>(text, "value")? {
        let (i, j) = (graph.require(u)?, graph.require(v)?);
        let e = graph.edge_index(i, j).ok_or(Error::NotAdjacent(u, v))?;
        match values[e] {
            Some(prev) if prev != w => {
                return Err(Error::Asymmetric { u, v, a: prev.as_f64(), b: w.as_f64() });
            }
            _ => values[e] = Some(w),
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(e, v)| {
            let (i, j, _) = graph.edges()[e];
            v.ok_or_else(|| Error::InvalidParameter(format!("no value for edge ({}, {})", graph.id(i), graph.id(j))))
        })
        .collect::<Result<Vec<T>>>()?;
    EdgeFunction::new(graph, values)
}

/// Antisymmetric edge flow, stored per edge in the orientation `i → j`
/// with `i < j` (graph index order). Unlisted edges carry no flow.
pub fn parse_flow<T: Scalar>(text: &str, graph: &WeightedGraph<T>) -> Result<Vec<T>> {
    let mut values: Vec<Option<T>> = vec![None; graph.edge_count()];
    for (_, u, v, w) in triples::<T>(text, "flow")? {
        let (i, j) = (graph.require(u)?, graph.require(v)?);
        let e = graph.edge_index(i, j).ok_or(Error::NotAdjacent(u, v))?;
        let oriented = if i < j { w } else { -w };
        match values[e] {
            Some(prev) if prev != oriented => {
                return Err(Error::Asymmetric { u, v, a: prev.as_f64(), b: oriented.as_f64() });
            }
            _ => values[e] = Some(oriented),
        }
    }
    Ok(values.into_iter().map(|v| v.unwrap_or(T::zero())).collect())
}

/// Pairs not listed are an error; the diagonal defaults to zero.
pub fn parse_metric_matrix<T: Scalar>(text: &str, ids: &[VertexId]) -> Result<DenseMetric<T>> {
    let n = ids.len();
    let index: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut data: Vec<Option<T>> = vec![None; n * n];
    for i in 0..n {
        data[i * n + i] = Some(T::zero());
    }
    for (_, u, v, d) in triples::<T>(text, "distance")? {
        let i = *index.get(&u).ok_or(Error::UnknownVertex(u))?;
        let j = *index.get(&v).ok_or(Error::UnknownVertex(v))?;
        for (a, b) in [(i, j), (j, i)] {
            match data[a * n + b] {
                Some(prev) if prev != d => {
                    return Err(Error::Asymmetric { u, v, a: prev.as_f64(), b: d.as_f64() });
                }
                _ => data[a * n + b] = Some(d),
            }
        }
    }
    let data = data
        .into_iter()
        .enumerate()
        .map(|(k, d)| {
            d.ok_or_else(|| Error::InvalidParameter(format!("no distance for ({}, {})", ids[k / n], ids[k % n])))
        })
        .collect::<Result<Vec<T>>>()?;
    DenseMetric::from_matrix(ids.to_vec(), data)
}

pub fn parse_paths(text: &str) -> Result<Vec<Vec<VertexId>>> {
    records(text)
        .map(|(line, f)| (0..f.len()).map(|k| field(&f, k, line, "vertex")).collect())
        .collect()
}

/// Full-precision decimal rendering that round-trips through `parse`.
pub fn fmt_scalar<T: Scalar>(x: T) -> String {
    format!("{:?}", x.as_f64())
}

pub fn write_edge_list<T: Scalar>(graph: &WeightedGraph<T>) -> String {
    let mut out = String::new();
    for &(i, j, b) in graph.edges() {
        let _ = writeln!(out, "{}\t{}\t{}", graph.id(i), graph.id(j), fmt_scalar(b));
    }
    out
}

pub fn write_potential<T: Scalar>(graph: &WeightedGraph<T>, f: &[T]) -> String {
    let mut out = String::new();
    for (i, v) in f.iter().enumerate() {
        let _ = writeln!(out, "{}\t{}", graph.id(i), fmt_scalar(*v));
    }
    out
}

pub fn write_measure<T: Scalar>(graph: &WeightedGraph<T>, m: &Measure<T>) -> String {
    write_potential(graph, m.values())
}

pub fn write_edge_function<T: Scalar>(graph: &WeightedGraph<T>, w: &EdgeFunction<T>) -> String {
    let mut out = String::new();
    for (e, &(i, j, _)) in graph.edges().iter().enumerate() {
        let _ = writeln!(out, "{}\t{}\t{}", graph.id(i), graph.id(j), fmt_scalar(w.on_edge(e)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_examples() {
        let g: WeightedGraph<f64> = parse_edge_list("0\t1\t1.0\n").unwrap();
        assert_eq!((g.degree(0), g.degree(1)), (1.0, 1.0));
        let g: WeightedGraph<f64> = parse_edge_list("# triangle\n0 1 1\n1 2 1\n\n0 2 2\n").unwrap();
        assert_eq!(g.degrees(), &[3.0, 2.0, 3.0]);
        assert!(matches!(parse_edge_list::<f64>("0 1 1\n2 3 1\n"), Err(Error::Disconnected { .. })));
        assert!(matches!(parse_edge_list::<f64>("0 0 1\n"), Err(Error::SelfLoop(0))));
        assert!(matches!(parse_edge_list::<f64>("0 1 -1\n"), Err(Error::NonPositiveWeight { .. })));
        assert!(matches!(parse_edge_list::<f64>("0 1 1\n1 0 2\n"), Err(Error::Asymmetric { .. })));
        assert!(matches!(parse_edge_list::<f64>("0 1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(parse_edge_list::<f64>("0 1 1\n1 0 1\n").is_ok());
    }

    #[test]
    fn vertex_files() {
        let g: WeightedGraph<f64> = parse_edge_list("0 1 1\n1 2 1\n").unwrap();
        let f = parse_potential("1 2.5\n", &g).unwrap();
        assert_eq!(f.values(), &[0.0, 2.5, 0.0]);
        assert!(parse_measure("0 1\n1 1\n", &g).is_err());
        let m = parse_measure("0 1\n1 1\n2 0.5\n", &g).unwrap();
        assert_eq!(m.total(), 2.5);
        assert!(parse_potential("7 1\n", &g).is_err());
    }

    #[test]
    fn flow_orientation() {
        let g: WeightedGraph<f64> = parse_edge_list("0 1 1\n1 2 1\n").unwrap();
        let f = parse_flow("1 0 -2\n2 1 -2\n", &g).unwrap();
        assert_eq!(f, vec![2.0, 2.0]);
        assert!(parse_flow("0 1 1\n1 0 1\n", &g).is_err());
        assert!(parse_flow("0 2 1\n", &g).is_err());
    }

    #[test]
    fn round_trips() {
        let g: WeightedGraph<f64> = parse_edge_list("0 1 0.1\n1 2 0.3333333333333333\n").unwrap();
        let again: WeightedGraph<f64> = parse_edge_list(&write_edge_list(&g)).unwrap();
        assert_eq!(g.edges(), again.edges());
        let w = EdgeFunction::from_fn(&g, |i, j, _| (i + j) as f64 / 7.0).unwrap();
        let back = parse_edge_function(&write_edge_function(&g, &w), &g).unwrap();
        assert_eq!(w.values(), back.values());
        let m = parse_metric_matrix::<f64>("0 1 2\n", &[0, 1]).unwrap();
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(parse_paths("0 1 2\n\n3\n").unwrap(), vec![vec![0, 1, 2], vec![3]]);
    }
}
