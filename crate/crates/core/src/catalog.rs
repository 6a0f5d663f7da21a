//! Named example specs with their expected verdicts.

use serde::Serialize;

use crate::algebra::{ExtensionSpec, OrthogonalDecomposition, StructureTensor};
use crate::curvature::ricci_at;
use crate::error::{Error, Result};
use crate::exact::{rational_from_f64, to_f64, Affine};
use crate::spectral::{
    build_root_set, check_consistency, cone_membership, cone_target, maximal_independent_subset,
    orthogonal_roots, ConeCertificate, ConsistencyReport, RootMatrix, SpectralVector,
};

/// Default value of the free parameter of the fourth four-dimensional family.
pub const DEFAULT_ROW4_PARAM: f64 = 1.0;

/// Verdict a catalog spec is expected to produce.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Expected {
    pub einstein: bool,
    pub einstein_constant: Option<f64>,
}

impl Expected {
    fn pass(constant: f64) -> Self {
        Expected { einstein: true, einstein_constant: Some(constant) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub spec: ExtensionSpec,
    pub expected: Expected,
    pub note: String,
}

fn ints(p: &[i128]) -> Vec<Affine> {
    p.iter().map(|&x| Affine::int(x)).collect()
}

fn entry(name: String, spec: ExtensionSpec, expected: Expected, note: &str) -> CatalogEntry {
    CatalogEntry { name, spec, expected, note: note.into() }
}

/// The four families of Einstein extensions of three-dimensional Lie groups.
/// `param` is required for row 4 and ignored otherwise.
pub fn table1(row: usize, param: Option<f64>) -> Result<CatalogEntry> {
    let name = format!("table1:{row}");
    match row {
        1 => Ok(entry(
            name,
            ExtensionSpec::new(StructureTensor::zero(3), ints(&[0, 0, 0]))?,
            Expected::pass(0.0),
            "flat R^4",
        )),
        2 => Ok(entry(
            name,
            ExtensionSpec::new(StructureTensor::zero(3), ints(&[1, 1, 1]))?,
            Expected::pass(-3.0),
            "real hyperbolic space H^4(-1)",
        )),
        3 => Ok(entry(
            name,
            ExtensionSpec::new(StructureTensor::from_entries(3, &[(0, 1, 2, 2.0)])?, ints(&[1, 1, 2]))?,
            Expected::pass(-6.0),
            "complex hyperbolic plane CH^2(-4)",
        )),
        4 => {
            let t = param.ok_or_else(|| Error::Catalog("table1 row 4 requires a parameter".into()))?;
            if !t.is_finite() {
                return Err(Error::Catalog(format!("parameter must be finite, got {t}")));
            }
            let mu = StructureTensor::from_entries(3, &[(2, 0, 0, t), (2, 1, 1, -1.0)])?;
            let exact = rational_from_f64(t, 10_000).filter(|r| to_f64(r) == t);
            let (middle, symbolic) = match exact {
                Some(r) => (Affine::constant(r), false),
                None => (Affine::param(), true),
            };
            let mut spec = ExtensionSpec::new(mu, vec![Affine::int(1), middle, Affine::int(0)])?
                .with_decomposition(OrthogonalDecomposition::new(vec![2], vec![0, 1]));
            if symbolic {
                spec = spec.with_param(t);
            }
            Ok(entry(
                format!("{name}:{t}"),
                spec,
                Expected::pass(-(1.0 + t * t)),
                "product of two hyperbolic planes",
            ))
        }
        _ => Err(Error::Catalog(format!("table1 has rows 1..4, got {row}"))),
    }
}

/// Heisenberg algebra of dimension `2k+1` with `[ē_{2i-1}, ē_{2i}] = 2ē_n`
/// and `D = diag(1, …, 1, 2)`.
pub fn heisenberg(k: usize) -> Result<CatalogEntry> {
    if k < 1 {
        return Err(Error::Catalog("heisenberg requires k >= 1".into()));
    }
    let n = 2 * k + 1;
    let mut mu = StructureTensor::zero(n);
    for i in 0..k {
        mu.set(2 * i, 2 * i + 1, n - 1, 2.0)?;
    }
    let mut p = vec![Affine::int(1); n];
    p[n - 1] = Affine::int(2);
    Ok(entry(
        format!("heisenberg:{k}"),
        ExtensionSpec::new(mu, p)?,
        Expected::pass(-(2.0 * k as f64 + 4.0)),
        "flat almost-Kaehler base, K-contact eta-Einstein",
    ))
}

/// The flat Euclidean motion algebra `e(2)`: `[ē_3, ē_1] = ē_2`, `[ē_3, ē_2] = -ē_1`.
pub fn e2_algebra() -> StructureTensor {
    StructureTensor::from_entries(3, &[(2, 0, 1, 1.0), (2, 1, 0, -1.0)]).expect("valid indices")
}

/// `D = id` over a Ricci-flat base; Einstein with constant `-n`.
pub fn identity_extension(flat: &StructureTensor) -> Result<CatalogEntry> {
    let n = flat.dim();
    let spec = ExtensionSpec::new(flat.clone(), vec![Affine::int(1); n])?;
    let ric = ricci_at(&spec, 0.0)?.amax();
    if ric > 1e-10 {
        return Err(Error::NotRicciFlat(ric));
    }
    Ok(entry(format!("identity:{n}"), spec, Expected::pass(-(n as f64)), "D = id over a flat base"))
}

/// `e(2)` with `D = id`: Einstein although `D` is not a derivation.
pub fn e2() -> CatalogEntry {
    let mut e = identity_extension(&e2_algebra()).expect("e(2) is flat");
    e.name = "e2".into();
    e.spec.decomposition = Some(OrthogonalDecomposition::new(vec![2], vec![0, 1]));
    e.note = "Einstein, D not a derivation".into();
    e
}

/// Hyperbolic plane times a line, `D = diag(0, 0, 1)`.
pub fn h2xr() -> CatalogEntry {
    let mu = StructureTensor::from_entries(3, &[(0, 1, 1, -1.0)]).expect("valid indices");
    let spec = ExtensionSpec::new(mu, ints(&[0, 0, 1])).expect("dimensions agree");
    entry("h2xr".into(), spec, Expected::pass(-1.0), "H^2(-1) x H^2(-1)")
}

/// Block direct sum of two specs with `D = D_1 ⊕ D_2`.
pub fn product(a: &ExtensionSpec, b: &ExtensionSpec) -> Result<ExtensionSpec> {
    a.direct_sum(b)
}

/// A zero-trace spectral vector that passes the cone test but fails the
/// remaining conditions.
pub fn counterexample_p6() -> SpectralVector {
    SpectralVector::from_ints(&[-3, -2, -1, 1, 2, 3]).expect("length 6")
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleDiagnostic {
    pub p: SpectralVector,
    pub cone: ConeCertificate,
    pub cone_verified: bool,
    pub trace_zero: bool,
    pub roots: RootMatrix,
    pub consistency: ConsistencyReport,
    pub consistent: bool,
}

/// Runs the cone test and the consistency check on `p`, using a greedy
/// maximal independent subset of the orthogonal roots.
pub fn diagnose(p: &SpectralVector) -> Result<CounterexampleDiagnostic> {
    let n = p.len();
    let roots = build_root_set(n)?;
    let cone = cone_membership(p, &roots)?;
    let orth = orthogonal_roots(p, &roots);
    let cone_verified = cone.is_feasible() && cone.verify(n, &orth, &cone_target(p));
    let v = RootMatrix::new(n, maximal_independent_subset(n, &orth))?;
    let consistency = check_consistency(p, &v, &roots)?;
    Ok(CounterexampleDiagnostic {
        p: p.clone(),
        consistent: consistency.holds(),
        cone,
        cone_verified,
        trace_zero: p.trace() == num_traits::Zero::zero(),
        roots: v,
        consistency,
    })
}

/// Catalog names accepted by [`lookup`]: `table1:R[:P]`, `heisenberg:K`,
/// `e2`, `h2xr`, `abelian:N`.
pub fn lookup(name: &str) -> Result<CatalogEntry> {
    let parts: Vec<&str> = name.split(':').collect();
    let num = |s: &str| -> Result<usize> {
        s.parse().map_err(|_| Error::Catalog(format!("expected a positive integer, got `{s}`")))
    };
    let real = |s: &str| -> Result<f64> {
        crate::exact::parse_rational(s)
            .map(|r| to_f64(&r))
            .or_else(|_| s.parse::<f64>().map_err(|_| Error::Catalog(format!("bad parameter `{s}`"))))
    };
    match parts.as_slice() {
        ["table1", row] => {
            let row = num(row)?;
            table1(row, (row == 4).then_some(DEFAULT_ROW4_PARAM))
        }
        ["table1", row, p] => table1(num(row)?, Some(real(p)?)),
        ["heisenberg"] => heisenberg(1),
        ["heisenberg", k] => heisenberg(num(k)?),
        ["e2"] => Ok(e2()),
        ["h2xr"] => Ok(h2xr()),
        ["abelian", n] => {
            let n = num(n)?;
            if n < 2 {
                return Err(Error::DimensionTooSmall { min: 2, found: n });
            }
            identity_extension(&StructureTensor::zero(n))
        }
        _ => Err(Error::Catalog(format!("unknown entry `{name}`"))),
    }
}

/// One representative of every family.
pub fn entries() -> Vec<CatalogEntry> {
    let mut out: Vec<CatalogEntry> = (1..=3).map(|r| table1(r, None).expect("fixed rows")).collect();
    for t in [0.0, 0.5, 1.0, 2.0] {
        out.push(table1(4, Some(t)).expect("finite parameter"));
    }
    out.extend((1..=4).map(|k| heisenberg(k).expect("k >= 1")));
    out.push(e2());
    out.push(h2xr());
    out.push(identity_extension(&StructureTensor::zero(3)).expect("abelian is flat"));
    out
}
