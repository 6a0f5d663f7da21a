//! JSON formats.
//!
//! Algebra documents look like
//!
//! ```json
//! { "dim": 3, "mu": [{"i": 1, "j": 2, "k": 3, "v": 2}], "spectral": [1, 1, 2] }
//! ```
//!
//! with 1-based indices. Optional fields: `"kind"` (`"lie"` or `"frame"`),
//! `"param"` (value of `t` when eigenvalues are written in terms of `t`),
//! `"non_constant"`, `"name"` and `"decomposition": {"h": [..], "m": [..]}`.
//! Values may be JSON numbers, `"num/den"` strings or decimal strings.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{ExtensionSpec, OrthogonalDecomposition, StructureTensor, TensorKind};
use crate::error::{Error, Result};
use crate::exact::{parse_rational, to_f64, Affine, Rational};

/// A number written either as a JSON number or as a string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Scalar::Int(x) => Ok(Rational::from_integer(*x as i128)),
            Scalar::Float(x) if x.is_finite() => parse_rational(&x.to_string()),
            Scalar::Float(x) => Err(Error::Parse(format!("non-finite value {x}"))),
            Scalar::Text(s) => parse_rational(s),
        }
    }

    pub fn to_affine(&self) -> Result<Affine> {
        match self {
            Scalar::Text(s) => s.parse(),
            other => other.to_rational().map(Affine::constant),
        }
    }

    pub fn to_f64(&self) -> Result<f64> {
        match self {
            Scalar::Float(x) => Ok(*x),
            other => other.to_rational().map(|r| to_f64(&r)),
        }
    }

    pub fn from_affine(a: &Affine) -> Scalar {
        if a.is_rational() && a.constant.is_integer() {
            if let Ok(x) = i64::try_from(a.constant.to_integer()) {
                return Scalar::Int(x);
            }
        }
        Scalar::Text(a.to_string())
    }

    /// Integers stay integers; other values are written as plain numbers.
    pub fn from_f64(v: f64) -> Scalar {
        if v.fract() == 0.0 && v.abs() < 1e15 {
            Scalar::Int(v as i64)
        } else {
            Scalar::Float(v)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub v: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionDoc {
    pub h: Vec<usize>,
    pub m: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    #[serde(default)]
    pub kind: TensorKind,
    #[serde(default)]
    pub mu: Vec<MuEntry>,
    pub spectral: Vec<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub non_constant: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionDoc>,
}

fn zero_based(index: usize, dim: usize) -> Result<usize> {
    if index == 0 || index > dim {
        return Err(Error::IndexOutOfRange { index, dim });
    }
    Ok(index - 1)
}

impl AlgebraDoc {
    pub fn to_spec(&self) -> Result<ExtensionSpec> {
        let n = self.dim;
        let mut mu = StructureTensor::zero(n);
        for e in &self.mu {
            let (i, j, k) = (zero_based(e.i, n)?, zero_based(e.j, n)?, zero_based(e.k, n)?);
            mu.set(i, j, k, e.v.to_f64()?)?;
        }
        let spectral = self.spectral.iter().map(Scalar::to_affine).collect::<Result<Vec<_>>>()?;
        let mut spec = ExtensionSpec::new(mu, spectral)?.with_kind(self.kind);
        spec.param = self.param;
        spec.non_constant = self.non_constant;
        if let Some(d) = &self.decomposition {
            let conv = |v: &[usize]| v.iter().map(|&x| zero_based(x, n)).collect::<Result<Vec<_>>>();
            spec.decomposition = Some(OrthogonalDecomposition::new(conv(&d.h)?, conv(&d.m)?));
        }
        Ok(spec)
    }

    pub fn from_spec(spec: &ExtensionSpec, name: Option<&str>) -> Self {
        AlgebraDoc {
            name: name.map(str::to_owned),
            dim: spec.dim(),
            kind: spec.kind,
            mu: spec
                .algebra
                .nonzeros()
                .map(|(i, j, k, v)| MuEntry { i: i + 1, j: j + 1, k: k + 1, v: Scalar::from_f64(v) })
                .collect(),
            spectral: spec.spectral.iter().map(Scalar::from_affine).collect(),
            param: spec.param,
            non_constant: spec.non_constant,
            decomposition: spec.decomposition.as_ref().map(|d| DecompositionDoc {
                h: d.h.iter().map(|x| x + 1).collect(),
                m: d.m.iter().map(|x| x + 1).collect(),
            }),
        }
    }
}

pub fn parse_spec(text: &str) -> Result<ExtensionSpec> {
    let doc: AlgebraDoc = serde_json::from_str(text)?;
    doc.to_spec()
}

pub fn spec_to_json(spec: &ExtensionSpec, name: Option<&str>) -> Result<String> {
    Ok(serde_json::to_string(&AlgebraDoc::from_spec(spec, name))?)
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Serde adapter for `Vec<Rational>` as `"num/den"` strings; numbers are
/// accepted on input.
pub mod ratio_vec {
    use super::Scalar;
    use crate::exact::{fmt_ratio, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(fmt_ratio))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw = Vec::<Scalar>::deserialize(d)?;
        raw.iter()
            .map(|x| x.to_rational().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter for root coefficients as `[{"root": [i, j, k], "coefficient": "a/b"}]`.
pub mod root_coefficients {
    use super::Scalar;
    use crate::exact::{fmt_ratio, Rational};
    use crate::spectral::RootTriple;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Item {
        root: [usize; 3],
        coefficient: Scalar,
    }

    pub fn serialize<S: Serializer>(v: &[(RootTriple, Rational)], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|(r, c)| Item {
            root: [r.i, r.j, r.k],
            coefficient: Scalar::Text(fmt_ratio(c)),
        }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Vec<(RootTriple, Rational)>, D::Error> {
        let raw = Vec::<Item>::deserialize(d)?;
        raw.into_iter()
            .map(|it| {
                let [i, j, k] = it.root;
                let root = RootTriple::checked(i, j, k)
                    .ok_or_else(|| serde::de::Error::custom(format!("invalid root ({i},{j}|{k})")))?;
                let c = it.coefficient.to_rational().map_err(serde::de::Error::custom)?;
                Ok((root, c))
            })
            .collect()
    }
}
