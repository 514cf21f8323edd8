//! Reader for the `TYPE: TSP` / `EDGE_WEIGHT_TYPE: EUC_2D` subset of TSPLIB.
//!
//! Distances are later computed as exact Euclidean reals, not with TSPLIB's
//! `nint` rounding, so published optimal tour lengths do not carry over.

use super::Graph;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn parse_tsplib<T: Real>(text: &str) -> Result<Graph<T>> {
    let mut name = String::from("tsplib");
    let mut problem_type = None;
    let mut dimension = None;
    let mut weight_type = None;
    let mut nodes = None;

    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    while let Some(line) = lines.next() {
        let (key, value) = match line.split_once(':') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (line, ""),
        };
        match key {
            "NAME" => name = value.to_string(),
            "TYPE" => problem_type = Some(value.to_string()),
            "DIMENSION" => {
                let d = value.parse::<usize>().map_err(|_| {
                    Error::MalformedInput(format!("DIMENSION is not an integer: {value:?}"))
                })?;
                dimension = Some(d);
            }
            "EDGE_WEIGHT_TYPE" => weight_type = Some(value.to_string()),
            "NODE_COORD_SECTION" => {
                let mut coords = Vec::new();
                for line in lines.by_ref() {
                    if line == "EOF" {
                        break;
                    }
                    coords.push(parse_coord_line::<T>(line)?);
                }
                nodes = Some(coords);
                break;
            }
            "EOF" => break,
            _ => {}
        }
    }

    match problem_type.as_deref() {
        Some("TSP") => {}
        Some(other) => {
            return Err(Error::UnsupportedFormat(format!("TYPE: {other}")));
        }
        None => return Err(Error::MalformedInput("missing TYPE".into())),
    }
    match weight_type.as_deref() {
        Some("EUC_2D") => {}
        Some(other) => {
            return Err(Error::UnsupportedFormat(format!(
                "EDGE_WEIGHT_TYPE: {other}"
            )));
        }
        None => return Err(Error::MalformedInput("missing EDGE_WEIGHT_TYPE".into())),
    }
    let nodes =
        nodes.ok_or_else(|| Error::MalformedInput("missing NODE_COORD_SECTION".into()))?;
    let dimension = dimension.ok_or_else(|| Error::MalformedInput("missing DIMENSION".into()))?;
    if dimension != nodes.len() {
        return Err(Error::MalformedInput(format!(
            "DIMENSION is {dimension} but {} coordinates were given",
            nodes.len()
        )));
    }
    Graph::new(name, nodes)
}

fn parse_coord_line<T: Real>(line: &str) -> Result<[T; 2]> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::MalformedInput(format!(
            "expected `id x y`, got {line:?}"
        )));
    }
    let coord = |s: &str| {
        s.parse::<f64>()
            .map(T::lit)
            .map_err(|_| Error::MalformedInput(format!("bad coordinate {s:?}")))
    };
    Ok([coord(fields[1])?, coord(fields[2])?])
}
