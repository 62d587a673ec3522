//! TSPLIB reader for EUC_2D node-coordinate files.
//!
//! Supports the keyword subset needed for the classic benchmark instances:
//! NAME, TYPE, COMMENT, DIMENSION, EDGE_WEIGHT_TYPE, NODE_COORD_SECTION and
//! EOF. Distances of TSPLIB-loaded instances follow the EUC_2D convention
//! (Euclidean, rounded to the nearest integer), so the published optima
//! (eil51 = 426, berlin52 = 7542, ...) are reproduced exactly.

use crate::instance::{InstanceError, Point, TspInstance};

/// Parse a TSPLIB EUC_2D file.
///
/// 1-based TSPLIB city ids are mapped to 0-based indices. The instance's
/// `coord_scale` is the largest coordinate magnitude in the file.
pub fn parse_tsplib(text: &str) -> Result<TspInstance, InstanceError> {
    let mut dimension: Option<usize> = None;
    let mut weight_type: Option<String> = None;
    let mut coords: Vec<Option<Point>> = Vec::new();
    let mut in_coords = false;

    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if in_coords {
            if line == "EOF" {
                break;
            }
            let mut toks = line.split_whitespace();
            let id: usize = toks
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| InstanceError::MalformedInput(format!("bad node line {line:?}")))?;
            let x: f64 = toks
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| InstanceError::MalformedInput(format!("bad node line {line:?}")))?;
            let y: f64 = toks
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| InstanceError::MalformedInput(format!("bad node line {line:?}")))?;
            let n = dimension.ok_or_else(|| {
                InstanceError::MalformedInput("NODE_COORD_SECTION before DIMENSION".into())
            })?;
            if id == 0 || id > n {
                return Err(InstanceError::MalformedInput(format!(
                    "node id {id} outside 1..={n}"
                )));
            }
            if coords[id - 1].replace(Point::new(x, y)).is_some() {
                return Err(InstanceError::MalformedInput(format!(
                    "duplicate node id {id}"
                )));
            }
            continue;
        }
        if line == "NODE_COORD_SECTION" {
            let n = dimension.ok_or_else(|| {
                InstanceError::MalformedInput("NODE_COORD_SECTION before DIMENSION".into())
            })?;
            coords = vec![None; n];
            in_coords = true;
            continue;
        }
        if line == "EOF" {
            break;
        }
        let (key, value) = match line.split_once(':') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (line, ""),
        };
        match key {
            "DIMENSION" => {
                let n = value.parse().map_err(|_| {
                    InstanceError::MalformedInput(format!("bad DIMENSION {value:?}"))
                })?;
                dimension = Some(n);
            }
            "EDGE_WEIGHT_TYPE" => weight_type = Some(value.to_string()),
            "TYPE" => {
                if value != "TSP" {
                    return Err(InstanceError::UnsupportedFormat(format!(
                        "TYPE {value:?} (only TSP)"
                    )));
                }
            }
            // NAME, COMMENT and anything else informational.
            _ => {}
        }
    }

    match weight_type.as_deref() {
        Some("EUC_2D") => {}
        Some(other) => {
            return Err(InstanceError::UnsupportedFormat(format!(
                "EDGE_WEIGHT_TYPE {other:?} (only EUC_2D)"
            )))
        }
        None => {
            return Err(InstanceError::MalformedInput(
                "missing EDGE_WEIGHT_TYPE".into(),
            ))
        }
    }
    let n = dimension.ok_or_else(|| InstanceError::MalformedInput("missing DIMENSION".into()))?;
    let points: Vec<Point> = coords.into_iter().flatten().collect();
    if points.len() != n {
        return Err(InstanceError::MalformedInput(format!(
            "DIMENSION is {n} but {} coordinates were read",
            points.len()
        )));
    }
    let scale = points
        .iter()
        .flat_map(|p| [p.x.abs(), p.y.abs()])
        .fold(0.0_f64, f64::max)
        .max(1.0);
    TspInstance::new(points, scale, true)
}

pub fn read_tsplib(path: &std::path::Path) -> Result<TspInstance, InstanceError> {
    parse_tsplib(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "NAME : two\nTYPE : TSP\nDIMENSION : 2\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 4\nEOF\n";

    #[test]
    fn minimal_two_node_file() {
        let inst = parse_tsplib(MINIMAL).unwrap();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.edge_weight(0, 1), 5.0);
        assert!(inst.is_rounded());
        assert_eq!(inst.coord_scale(), 4.0);
    }

    #[test]
    fn rounding_follows_euc_2d_convention() {
        let text = "TYPE : TSP\nDIMENSION : 2\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 1\nEOF\n";
        let inst = parse_tsplib(text).unwrap();
        // sqrt(2) = 1.414... rounds to 1.
        assert_eq!(inst.edge_weight(0, 1), 1.0);
    }

    #[test]
    fn rejects_non_euc_2d() {
        let text = "DIMENSION : 2\nEDGE_WEIGHT_TYPE : GEO\nNODE_COORD_SECTION\n1 0 0\n2 3 4\nEOF\n";
        let err = parse_tsplib(text).unwrap_err();
        assert!(matches!(err, InstanceError::UnsupportedFormat(_)), "{err}");
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let text = "DIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 4\nEOF\n";
        let err = parse_tsplib(text).unwrap_err();
        assert!(matches!(err, InstanceError::MalformedInput(_)), "{err}");
    }

    fn data_file(name: &str) -> String {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../data/tsplib")
            .join(name);
        std::fs::read_to_string(path).unwrap()
    }

    #[test]
    fn eil51_parses_with_known_optimum() {
        let inst = parse_tsplib(&data_file("eil51.tsp")).unwrap();
        assert_eq!(inst.n(), 51);
        let opt = crate::instance::Tour::from_line(&data_file("eil51_opt.tour"), 51).unwrap();
        assert_eq!(inst.tour_length(&opt), 426.0);
    }

    #[test]
    fn berlin52_parses_with_known_optimum() {
        let inst = parse_tsplib(&data_file("berlin52.tsp")).unwrap();
        assert_eq!(inst.n(), 52);
        let opt = crate::instance::Tour::from_line(&data_file("berlin52_opt.tour"), 52).unwrap();
        assert_eq!(inst.tour_length(&opt), 7542.0);
    }
}
