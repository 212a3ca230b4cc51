//! JSON schemas for spaces, measures, functions, projections and gentle partitions.
//!
//! Points are referred to by label everywhere. Files that describe objects on a
//! space carry an optional `space` field, either a path (informational) or an
//! inline space; an inline space must agree with the space it is loaded against.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{PointFunction, TargetNorm};
use crate::measure::SignedMeasure;
use crate::metric::{FiniteMetricSpace, Subspace};
use crate::projection::{GentlePartition, RandomProjection};

/// Parses JSON text; syntax and schema errors carry line and column.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
}

fn malformed<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Malformed(msg.into()))
}

fn index(space: &FiniteMetricSpace, label: &str) -> Result<usize> {
    space
        .index_of(label)
        .ok_or_else(|| Error::Malformed(format!("unknown point label {label:?}")))
}

fn indices(space: &FiniteMetricSpace, labels: &[String]) -> Result<Vec<usize>> {
    labels.iter().map(|l| index(space, l)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    pub labels: Vec<String>,
    pub basepoint: String,
    pub dist: Vec<Vec<f64>>,
}

impl SpaceFile {
    /// Structural conversion only; metric axioms are checked separately.
    pub fn to_space(&self) -> Result<FiniteMetricSpace> {
        let Some(base) = self.labels.iter().position(|l| *l == self.basepoint) else {
            return malformed(format!("basepoint {:?} is not among the labels", self.basepoint));
        };
        FiniteMetricSpace::new(self.labels.clone(), self.dist.clone(), base)
    }

    pub fn from_space(space: &FiniteMetricSpace) -> Self {
        Self {
            labels: space.labels().to_vec(),
            basepoint: space.label(space.basepoint()).to_string(),
            dist: space.dist_rows(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceRef {
    Path(String),
    Inline(SpaceFile),
}

fn check_space(r: &Option<SpaceRef>, space: &FiniteMetricSpace) -> Result<()> {
    if let Some(SpaceRef::Inline(f)) = r {
        if f.to_space()? != *space {
            return malformed("inline space differs from the space supplied alongside it");
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceRef>,
    pub coeff: BTreeMap<String, f64>,
}

impl MeasureFile {
    pub fn to_measure(&self, space: &Arc<FiniteMetricSpace>) -> Result<SignedMeasure> {
        check_space(&self.space, space)?;
        let entries = self
            .coeff
            .iter()
            .map(|(l, &c)| Ok((index(space, l)?, c)))
            .collect::<Result<Vec<_>>>()?;
        SignedMeasure::new(space.clone(), entries)
    }

    pub fn from_measure(mu: &SignedMeasure) -> Self {
        let s = mu.space();
        Self { space: None, coeff: mu.iter().map(|(i, c)| (s.label(i).to_string(), c)).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceRef>,
    pub dim: usize,
    pub norm: String,
    pub values: BTreeMap<String, Vec<f64>>,
}

impl FunctionFile {
    pub fn to_function(&self, space: &Arc<FiniteMetricSpace>) -> Result<PointFunction> {
        check_space(&self.space, space)?;
        let norm: TargetNorm = self.norm.parse()?;
        if let Some((l, v)) = self.values.iter().find(|(_, v)| v.len() != self.dim) {
            return malformed(format!("value at {l:?} has {} entries but dim is {}", v.len(), self.dim));
        }
        let entries = self
            .values
            .iter()
            .map(|(l, v)| Ok((index(space, l)?, v.clone())))
            .collect::<Result<Vec<_>>>()?;
        PointFunction::new(space.clone(), entries, norm)
    }

    pub fn from_function(f: &PointFunction) -> Self {
        let s = f.space();
        Self {
            space: None,
            dim: f.dim(),
            norm: f.norm().name().to_string(),
            values: f.iter().map(|(i, v)| (s.label(i).to_string(), v.to_vec())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceRef>,
    pub subset: Vec<String>,
    pub strong: bool,
    /// Rows of points in the subset may be omitted; they are `δ_x`.
    pub rows: BTreeMap<String, BTreeMap<String, f64>>,
}

impl ProjectionFile {
    pub fn to_projection(&self, space: &Arc<FiniteMetricSpace>) -> Result<RandomProjection> {
        check_space(&self.space, space)?;
        let subset = Subspace::new(space.clone(), &indices(space, &self.subset)?)?;
        let mut given: Vec<Option<SignedMeasure>> = vec![None; space.len()];
        for (l, row) in &self.rows {
            let x = index(space, l)?;
            let entries = row
                .iter()
                .map(|(m, &c)| Ok((index(space, m)?, c)))
                .collect::<Result<Vec<_>>>()?;
            given[x] = Some(SignedMeasure::new(space.clone(), entries)?);
        }
        let rows = given
            .into_iter()
            .enumerate()
            .map(|(x, r)| match r {
                Some(r) => Ok(r),
                None if subset.contains(x) => Ok(SignedMeasure::dirac(space.clone(), x)),
                None => malformed(format!("no row for exterior point {:?}", space.label(x))),
            })
            .collect::<Result<Vec<_>>>()?;
        RandomProjection::new(subset, rows, self.strong)
    }

    pub fn from_projection(p: &RandomProjection) -> Self {
        let s = p.space();
        Self {
            space: None,
            subset: p.subset().labels(),
            strong: p.is_strong(),
            rows: p
                .rows()
                .iter()
                .enumerate()
                .map(|(x, r)| {
                    let row = r.iter().map(|(m, c)| (s.label(m).to_string(), c)).collect();
                    (s.label(x).to_string(), row)
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GentleFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceRef>,
    pub subset: Vec<String>,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    /// `psi[ω][x]`, points in the order of the space's labels.
    pub psi: Vec<Vec<f64>>,
    pub gamma: Vec<String>,
}

impl GentleFile {
    pub fn to_partition(&self, space: &Arc<FiniteMetricSpace>) -> Result<GentlePartition> {
        check_space(&self.space, space)?;
        let subset = Subspace::new(space.clone(), &indices(space, &self.subset)?)?;
        GentlePartition::new(subset, self.p.clone(), self.psi.clone(), indices(space, &self.gamma)?)
    }

    pub fn from_partition(g: &GentlePartition) -> Self {
        let s = g.subset().parent();
        Self {
            space: None,
            subset: g.subset().labels(),
            p: g.weights().to_vec(),
            psi: g.psi().to_vec(),
            gamma: g.gamma().iter().map(|&i| s.label(i).to_string()).collect(),
        }
    }
}

/// A vector given either as a bare array or as `{ "y": [...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorFile {
    Bare(Vec<f64>),
    Keyed {
        y: Vec<f64>,
    },
}

impl VectorFile {
    pub fn into_vec(self) -> Vec<f64> {
        match self {
            Self::Bare(v) | Self::Keyed { y: v } => v,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    const THREE: &str = r#"{"labels": ["a", "b", "c"], "basepoint": "a",
        "dist": [[0, 1, 2], [1, 0, 1.5], [2, 1.5, 0]]}"#;

    fn three() -> Arc<FiniteMetricSpace> {
        Arc::new(parse::<SpaceFile>(THREE).unwrap().to_space().unwrap())
    }

    #[test]
    fn space_round_trip() {
        let s = three();
        assert_eq!(*s, gen::three_point_space());
        assert_eq!(SpaceFile::from_space(&s).to_space().unwrap(), *s);
    }

    #[test]
    fn errors_report_position() {
        let err = parse::<SpaceFile>("{\"labels\": [\"a\",\n  }").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let err = parse::<SpaceFile>(r#"{"labels": [], "basepoint": "a", "dist": [], "extra": 1}"#).unwrap_err();
        assert!(err.to_string().contains("extra"));
        let bad_base = parse::<SpaceFile>(r#"{"labels": ["a"], "basepoint": "z", "dist": [[0]]}"#).unwrap();
        assert!(matches!(bad_base.to_space(), Err(Error::Malformed(_))));
    }

    #[test]
    fn measure_and_inline_space() {
        let s = three();
        let m: MeasureFile = parse(r#"{"space": "three.json", "coeff": {"b": 1, "c": -1}}"#).unwrap();
        let mu = m.to_measure(&s).unwrap();
        assert_eq!(mu, SignedMeasure::new(s.clone(), [(1, 1.0), (2, -1.0)]).unwrap());
        assert_eq!(MeasureFile::from_measure(&mu).to_measure(&s).unwrap(), mu);

        let inline = format!(r#"{{"space": {THREE}, "coeff": {{"b": 1}}}}"#);
        assert!(parse::<MeasureFile>(&inline).unwrap().to_measure(&s).is_ok());
        let other = Arc::new(gen::line_space(&[0.0, 1.0, 2.0]));
        let relabeled = MeasureFile { space: None, coeff: [("p1".into(), 1.0)].into() };
        assert!(relabeled.to_measure(&other).is_ok());
        let mismatched = parse::<MeasureFile>(&inline).unwrap();
        assert!(mismatched.to_measure(&other).is_err());
        let unknown: MeasureFile = parse(r#"{"coeff": {"zz": 1}}"#).unwrap();
        assert!(unknown.to_measure(&s).is_err());
    }

    #[test]
    fn projection_and_gentle_round_trip() {
        let s = three();
        let pf: ProjectionFile = parse(r#"{"subset": ["a", "b"], "strong": true, "rows": {"c": {"a": 0.4, "b": 0.6}}}"#).unwrap();
        let p = pf.to_projection(&s).unwrap();
        assert_eq!(p.row(2).get(1), 0.6);
        assert_eq!(ProjectionFile::from_projection(&p).to_projection(&s).unwrap(), p);

        let gf: GentleFile = parse(r#"{"subset": ["a", "b"], "P": [0.5, 0.5], "psi": [[0, 0, 0.8], [0, 0, 1.2]], "gamma": ["a", "b"]}"#).unwrap();
        let g = gf.to_partition(&s).unwrap();
        assert_eq!(GentleFile::from_partition(&g), gf);

        let missing: ProjectionFile = parse(r#"{"subset": ["a", "b"], "strong": true, "rows": {}}"#).unwrap();
        assert!(missing.to_projection(&s).is_err());
    }

    #[test]
    fn functions_and_vectors() {
        let s = three();
        let ff: FunctionFile = parse(r#"{"dim": 2, "norm": "sup", "values": {"a": [0, 0], "b": [1, -1]}}"#).unwrap();
        let f = ff.to_function(&s).unwrap();
        assert_eq!(f.value(1), Some(&[1.0, -1.0][..]));
        assert_eq!(FunctionFile::from_function(&f), ff);
        let bad: FunctionFile = parse(r#"{"dim": 1, "norm": "abs", "values": {"a": [0, 0]}}"#).unwrap();
        assert!(bad.to_function(&s).is_err());

        assert_eq!(parse::<VectorFile>("[2, 0.5]").unwrap().into_vec(), vec![2.0, 0.5]);
        assert_eq!(parse::<VectorFile>(r#"{"y": [1]}"#).unwrap().into_vec(), vec![1.0]);
    }
}
