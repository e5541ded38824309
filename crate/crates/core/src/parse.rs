//! Parser for the classical CVRP benchmark text format
//! (NAME / DIMENSION / CAPACITY / NODE_COORD_SECTION / DEMAND_SECTION /
//! DEPOT_SECTION with EUC_2D distances).

use std::collections::HashMap;

use thiserror::Error;

use crate::model::CvrpBase;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("missing section or field: {0}")]
    MissingSection(&'static str),
    #[error("non-integer value `{value}` in {context}")]
    NonIntegerField { context: &'static str, value: String },
    #[error("depot demand must be zero, found {0}")]
    DepotDemandNonzero(u64),
    #[error("unsupported EDGE_WEIGHT_TYPE `{0}` (only EUC_2D)")]
    UnsupportedEdgeWeight(String),
    #[error("inconsistent instance: {0}")]
    Inconsistent(String),
}

fn parse_int<T: std::str::FromStr>(value: &str, context: &'static str) -> Result<T, ParseError> {
    value.trim().parse().map_err(|_| ParseError::NonIntegerField {
        context,
        value: value.trim().to_string(),
    })
}

/// Parses an instance file. Node ids in the file are arbitrary (usually
/// 1-based); the depot named in DEPOT_SECTION is remapped to index 0 and the
/// remaining nodes follow in ascending id order.
pub fn parse_cvrp(text: &str) -> Result<CvrpBase, ParseError> {
    let mut name = String::from("unnamed");
    let mut dimension: Option<usize> = None;
    let mut capacity: Option<u64> = None;
    let mut coords: Vec<(u64, i64, i64)> = Vec::new();
    let mut demands: HashMap<u64, u64> = HashMap::new();
    let mut depot_id: Option<u64> = None;

    #[derive(PartialEq)]
    enum Section {
        Header,
        Coords,
        Demands,
        Depot,
    }
    let mut section = Section::Header;

    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        match line {
            "NODE_COORD_SECTION" => {
                section = Section::Coords;
                continue;
            }
            "DEMAND_SECTION" => {
                section = Section::Demands;
                continue;
            }
            "DEPOT_SECTION" => {
                section = Section::Depot;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Header => {
                if let Some((key, value)) = line.split_once(':') {
                    match key.trim() {
                        "NAME" => name = value.trim().to_string(),
                        "DIMENSION" => dimension = Some(parse_int(value, "DIMENSION")?),
                        "CAPACITY" => capacity = Some(parse_int(value, "CAPACITY")?),
                        "EDGE_WEIGHT_TYPE" => {
                            let v = value.trim();
                            if v != "EUC_2D" {
                                return Err(ParseError::UnsupportedEdgeWeight(v.to_string()));
                            }
                        }
                        _ => {} // COMMENT, TYPE, ... ignored
                    }
                }
            }
            Section::Coords => {
                let mut it = line.split_whitespace();
                let id: u64 = parse_int(
                    it.next().ok_or(ParseError::MissingSection("NODE_COORD_SECTION"))?,
                    "node id",
                )?;
                let x: i64 = parse_int(
                    it.next().ok_or(ParseError::MissingSection("NODE_COORD_SECTION"))?,
                    "node x coordinate",
                )?;
                let y: i64 = parse_int(
                    it.next().ok_or(ParseError::MissingSection("NODE_COORD_SECTION"))?,
                    "node y coordinate",
                )?;
                coords.push((id, x, y));
            }
            Section::Demands => {
                let mut it = line.split_whitespace();
                let id: u64 = parse_int(
                    it.next().ok_or(ParseError::MissingSection("DEMAND_SECTION"))?,
                    "demand node id",
                )?;
                let q: u64 = parse_int(
                    it.next().ok_or(ParseError::MissingSection("DEMAND_SECTION"))?,
                    "demand",
                )?;
                demands.insert(id, q);
            }
            Section::Depot => {
                let v: i64 = parse_int(line, "DEPOT_SECTION")?;
                if v >= 0 && depot_id.is_none() {
                    depot_id = Some(v as u64);
                }
            }
        }
    }

    let dimension = dimension.ok_or(ParseError::MissingSection("DIMENSION"))?;
    let capacity = capacity.ok_or(ParseError::MissingSection("CAPACITY"))?;
    if coords.is_empty() {
        return Err(ParseError::MissingSection("NODE_COORD_SECTION"));
    }
    if demands.is_empty() {
        return Err(ParseError::MissingSection("DEMAND_SECTION"));
    }
    let depot_id = depot_id.ok_or(ParseError::MissingSection("DEPOT_SECTION"))?;
    if coords.len() != dimension {
        return Err(ParseError::Inconsistent(format!(
            "DIMENSION is {dimension} but {} coordinates listed",
            coords.len()
        )));
    }

    let depot_pos = coords
        .iter()
        .position(|&(id, _, _)| id == depot_id)
        .ok_or_else(|| ParseError::Inconsistent(format!("depot id {depot_id} has no coordinates")))?;
    coords.swap(0, depot_pos);
    coords[1..].sort_by_key(|&(id, _, _)| id);

    let mut out_coords = Vec::with_capacity(dimension);
    let mut out_demands = Vec::with_capacity(dimension);
    for &(id, x, y) in &coords {
        let q = *demands
            .get(&id)
            .ok_or_else(|| ParseError::Inconsistent(format!("node {id} has no demand entry")))?;
        out_coords.push((x, y));
        out_demands.push(q);
    }
    if out_demands[0] != 0 {
        return Err(ParseError::DepotDemandNonzero(out_demands[0]));
    }
    for (i, &q) in out_demands.iter().enumerate() {
        if q > capacity {
            return Err(ParseError::Inconsistent(format!(
                "demand {q} of node index {i} exceeds capacity {capacity}"
            )));
        }
    }

    CvrpBase::new(name, out_coords, out_demands, capacity)
        .map_err(|e| ParseError::Inconsistent(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
NAME : toy-n3-k1
TYPE : CVRP
DIMENSION : 3
EDGE_WEIGHT_TYPE : EUC_2D
CAPACITY : 10
NODE_COORD_SECTION
1 0 0
2 3 4
3 6 8
DEMAND_SECTION
1 0
2 4
3 5
DEPOT_SECTION
1
-1
EOF
";

    #[test]
    fn parses_minimal_file() {
        let base = parse_cvrp(MINIMAL).unwrap();
        assert_eq!(base.name, "toy-n3-k1");
        assert_eq!(base.capacity, 10);
        assert_eq!(base.coords.len(), 3);
        assert_eq!(base.demands, vec![0, 4, 5]);
        assert_eq!(base.client_count(), 2);
    }

    #[test]
    fn depot_remapped_to_front() {
        let text = MINIMAL.replace("DEPOT_SECTION\n1", "DEPOT_SECTION\n2");
        let text = text.replace("1 0\n2 4", "1 4\n2 0");
        let base = parse_cvrp(&text).unwrap();
        assert_eq!(base.coords[0], (3, 4));
        assert_eq!(base.demands[0], 0);
    }

    #[test]
    fn nonzero_depot_demand_rejected() {
        let text = MINIMAL.replace("1 0\n2 4", "1 5\n2 4");
        assert_eq!(parse_cvrp(&text), Err(ParseError::DepotDemandNonzero(5)));
    }

    #[test]
    fn missing_capacity_rejected() {
        let text = MINIMAL.replace("CAPACITY : 10\n", "");
        assert_eq!(
            parse_cvrp(&text),
            Err(ParseError::MissingSection("CAPACITY"))
        );
    }

    #[test]
    fn non_integer_coordinate_rejected() {
        let text = MINIMAL.replace("2 3 4", "2 3.5 4");
        assert!(matches!(
            parse_cvrp(&text),
            Err(ParseError::NonIntegerField { .. })
        ));
    }

    #[test]
    fn non_euclidean_metric_rejected() {
        let text = MINIMAL.replace("EUC_2D", "GEO");
        assert!(matches!(
            parse_cvrp(&text),
            Err(ParseError::UnsupportedEdgeWeight(_))
        ));
    }
}
