//! JSON formats for ensembles, groups and subgroups.
//!
//! ```json
//! {"dim": 2, "priors": [0.5, 0.5], "states": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]], ...]}
//! {"order": 2, "table": [[0, 1], [1, 0]]}
//! {"elements": [0, 2]}
//! ```
//!
//! Complex entries are always `[re, im]`. Parse failures carry the JSON path
//! of the offending value.

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hsp::{group_from_cayley, Group, Subgroup};
use crate::linalg::ComplexMatrix;
use crate::states::{DensityMatrix, Ensemble};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleFile {
    dim: usize,
    priors: Vec<f64>,
    states: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupFile {
    order: usize,
    table: Vec<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubgroupFile {
    elements: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(SubgroupFile),
    Many(Vec<SubgroupFile>),
}

fn parse_err(path: impl Into<String>, message: impl ToString) -> Error {
    Error::Parse { path: path.into(), message: message.to_string() }
}

fn from_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let path = match path.as_str() {
            "." => "$".to_string(),
            p if p.starts_with('[') => format!("${p}"),
            p => format!("$.{p}"),
        };
        parse_err(path, e.into_inner())
    })?;
    de.end().map_err(|e| parse_err("$", e))?;
    Ok(value)
}

pub fn parse_ensemble(text: &str) -> Result<Ensemble> {
    let file: EnsembleFile = from_str(text)?;
    let d = file.dim;
    if d == 0 {
        return Err(parse_err("$.dim", "dimension must be at least 1"));
    }
    if file.states.is_empty() {
        return Err(parse_err("$.states", "ensemble needs at least one state"));
    }
    if file.priors.len() != file.states.len() {
        return Err(parse_err(
            "$.priors",
            format!("{} priors for {} states", file.priors.len(), file.states.len()),
        ));
    }
    let mut states = Vec::with_capacity(file.states.len());
    for (i, rows) in file.states.iter().enumerate() {
        if rows.len() != d {
            return Err(parse_err(format!("$.states[{i}]"), format!("{} rows, expected dim = {d}", rows.len())));
        }
        let mut entries = Vec::with_capacity(d);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(parse_err(
                    format!("$.states[{i}][{r}]"),
                    format!("{} entries, expected dim = {d}", row.len()),
                ));
            }
            entries.push(row.iter().map(|&[re, im]| Complex64::new(re, im)).collect::<Vec<_>>());
        }
        let state = ComplexMatrix::from_rows(&entries)
            .and_then(DensityMatrix::new)
            .map_err(|e| parse_err(format!("$.states[{i}]"), e))?;
        states.push(state);
    }
    Ensemble::new(states, file.priors).map_err(|e| parse_err("$.priors", e))
}

pub fn ensemble_to_json(e: &Ensemble) -> String {
    let states = e
        .states()
        .iter()
        .map(|s| {
            let m = s.matrix();
            (0..m.dim()).map(|r| (0..m.dim()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
        })
        .collect();
    let file = EnsembleFile { dim: e.dim(), priors: e.priors().to_vec(), states };
    serde_json::to_string_pretty(&file).expect("ensemble serializes")
}

pub fn parse_group(text: &str) -> Result<Group> {
    let file: GroupFile = from_str(text)?;
    if file.table.len() != file.order {
        return Err(parse_err("$.table", format!("{} rows, expected order = {}", file.table.len(), file.order)));
    }
    group_from_cayley(file.table).map_err(|e| parse_err("$.table", e))
}

pub fn group_to_json(g: &Group) -> String {
    serde_json::to_string(&GroupFile { order: g.order(), table: g.table().to_vec() }).expect("group serializes")
}

/// Accepts a single `{"elements": [...]}` object or an array of them.
pub fn parse_subgroups(text: &str, g: &Group) -> Result<Vec<Subgroup>> {
    match from_str::<OneOrMany>(text) {
        Ok(OneOrMany::One(s)) => Ok(vec![Subgroup::new(g, s.elements).map_err(|e| parse_err("$.elements", e))?]),
        Ok(OneOrMany::Many(list)) => list
            .into_iter()
            .enumerate()
            .map(|(i, s)| Subgroup::new(g, s.elements).map_err(|e| parse_err(format!("$[{i}].elements"), e)))
            .collect(),
        // untagged enums lose the inner path, so retry both shapes for a precise message
        Err(_) => {
            let trimmed = text.trim_start();
            if trimmed.starts_with('[') {
                from_str::<Vec<SubgroupFile>>(text).map(|_| Vec::new())
            } else {
                from_str::<SubgroupFile>(text).map(|_| Vec::new())
            }
        }
    }
}

pub fn subgroups_to_json(subs: &[Subgroup]) -> String {
    let list: Vec<SubgroupFile> = subs.iter().map(|s| SubgroupFile { elements: s.elements().to_vec() }).collect();
    serde_json::to_string(&list).expect("subgroups serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hsp::{cyclic_group, dihedral_group, enumerate_subgroups};
    use crate::states::{random_density, random_pure_state};

    fn path_of(r: Result<impl std::fmt::Debug>) -> String {
        match r.unwrap_err() {
            Error::Parse { path, .. } => path,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ensemble_round_trip_is_bit_identical() {
        for seed in 0..20 {
            let states: Vec<_> = (0..3)
                .map(|k| {
                    if k == 0 {
                        random_pure_state(3, seed * 3 + k).unwrap()
                    } else {
                        random_density(3, 2, seed * 3 + k).unwrap()
                    }
                })
                .collect();
            let ens = Ensemble::new(states, vec![0.2, 0.3 + seed as f64 * 1e-3, 0.5 - seed as f64 * 1e-3]).unwrap();
            let text = ensemble_to_json(&ens);
            let back = parse_ensemble(&text).unwrap();
            assert_eq!(back.priors().iter().map(|p| p.to_bits()).collect::<Vec<_>>(),
                ens.priors().iter().map(|p| p.to_bits()).collect::<Vec<_>>());
            for (a, b) in back.states().iter().zip(ens.states()) {
                let (a, b) = (a.matrix(), b.matrix());
                assert!(a.iter().zip(b.iter()).all(|(x, y)| x.re.to_bits() == y.re.to_bits()
                    && x.im.to_bits() == y.im.to_bits()));
            }
            assert_eq!(ensemble_to_json(&back), text);
        }
    }

    #[test]
    fn ensemble_errors_name_the_path() {
        let ok = r#"{"dim":2,"priors":[0.5,0.5],"states":[[[[1,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[1,0]]]]}"#;
        assert_eq!(parse_ensemble(ok).unwrap().len(), 2);
        let bad_entry = ok.replacen("[1,0]", "[1,\"x\"]", 1);
        assert_eq!(path_of(parse_ensemble(&bad_entry)), "$.states[0][0][0][1]");
        let bad_trace = ok.replacen("[1,0]", "[2,0]", 1);
        assert_eq!(path_of(parse_ensemble(&bad_trace)), "$.states[0]");
        let bad_priors = ok.replace("[0.5,0.5]", "[0.7,0.5]");
        assert_eq!(path_of(parse_ensemble(&bad_priors)), "$.priors");
        let short = ok.replace("[0.5,0.5]", "[1.0]");
        assert_eq!(path_of(parse_ensemble(&short)), "$.priors");
        let bad_dim = ok.replace("\"dim\":2", "\"dim\":3");
        assert_eq!(path_of(parse_ensemble(&bad_dim)), "$.states[0]");
        let extra = ok.replace("\"dim\":2", "\"dim\":2,\"extra\":1");
        assert!(parse_ensemble(&extra).is_err());
        let nonherm = r#"{"dim":2,"priors":[1.0],"states":[[[[0.5,0],[0.5,0]],[[0,0],[0.5,0]]]]}"#;
        let err = parse_ensemble(nonherm).unwrap_err().to_string();
        assert!(err.contains("Hermitian"), "{err}");
    }

    #[test]
    fn group_round_trip() {
        for g in [cyclic_group(6).unwrap(), dihedral_group(4).unwrap()] {
            let text = group_to_json(&g);
            assert_eq!(parse_group(&text).unwrap(), g);
            let subs = enumerate_subgroups(&g).unwrap();
            assert_eq!(parse_subgroups(&subgroups_to_json(&subs), &g).unwrap(), subs);
        }
        assert!(matches!(parse_group(r#"{"order":2,"table":[[0,1],[1,1]]}"#), Err(Error::Parse { .. })));
        assert_eq!(path_of(parse_group(r#"{"order":3,"table":[[0,1],[1,0]]}"#)), "$.table");
    }

    #[test]
    fn subgroup_formats() {
        let g = cyclic_group(4).unwrap();
        assert_eq!(parse_subgroups(r#"{"elements":[0,2]}"#, &g).unwrap()[0].elements(), &[0, 2]);
        assert_eq!(parse_subgroups(r#"[{"elements":[0]},{"elements":[0,1,2,3]}]"#, &g).unwrap().len(), 2);
        assert_eq!(path_of(parse_subgroups(r#"[{"elements":[0]},{"elements":[0,1]}]"#, &g)), "$[1].elements");
        assert_eq!(path_of(parse_subgroups(r#"[{"elements":[0]},{"elements":"x"}]"#, &g)), "$[1].elements");
    }
}
