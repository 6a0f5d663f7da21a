//! Einstein test for `D`-extensions and structural checks for the special
//! eigenvalue types `(0,…,0,1)`, `(1,…,1,0)` and `(1,…,1,2)`.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::algebra::{divergence_residual, jacobi_residual, ExtensionSpec, StructureTensor, TensorKind};
use crate::curvature::{ricci_at, ricci_deformation};
use crate::error::{Error, Result};
use crate::exact::{Affine, Rational};
use crate::spectral::SpectralVector;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Values of `u` at which the grouped check is cross-checked by direct
/// evaluation.
pub const U_GRID: [f64; 6] = [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub einstein: bool,
    /// `-Tr D²`, present only when verification passes.
    pub einstein_constant: Option<f64>,
    pub tolerance: f64,
    /// Named raw residuals (max-abs norms).
    pub residuals: BTreeMap<String, f64>,
    pub violated_conditions: Vec<String>,
    /// Verdict of the exponent-class test alone.
    pub grouped_pass: bool,
    /// Verdict of the direct evaluation on [`U_GRID`] alone.
    pub grid_pass: bool,
}

impl VerificationReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().fold(0.0, |m, v| m.max(*v))
    }
}

/// The Einstein target `(Tr D) D - (Tr D²) id` evaluated numerically.
pub fn einstein_target(spec: &ExtensionSpec) -> Result<DMatrix<f64>> {
    let p = spec.p_values()?;
    let (tr, tr2) = spec.traces()?;
    Ok(DMatrix::from_diagonal(&DVector::from_iterator(p.len(), p.iter().map(|pi| tr * pi - tr2))))
}

pub fn verify_extension(spec: &ExtensionSpec, tol: f64) -> Result<VerificationReport> {
    if spec.non_constant {
        return Err(Error::NonConstant);
    }
    let target = einstein_target(spec)?;
    let (_, tr2) = spec.traces()?;
    let grouped = ricci_deformation(spec)?;

    let mut residuals = BTreeMap::new();
    let mut violated = Vec::new();
    let mut record = |name: &str, value: f64| {
        if value.is_nan() || value > tol {
            violated.push(name.to_string());
        }
        residuals.insert(name.to_string(), value);
    };

    let div = divergence_residual(spec)?.into_iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    record("divergence", div);
    if spec.kind == TensorKind::Lie {
        record("jacobi", jacobi_residual(&spec.algebra));
    }
    let target_dev = (grouped.constant_class() - &target).amax();
    record("target", target_dev);
    let mut grid: f64 = 0.0;
    for u in U_GRID {
        grid = grid.max((ricci_at(spec, u)? - &target).amax());
    }
    record("u_grid", grid);
    let mut class_max: f64 = 0.0;
    for (q, c) in grouped.nonconstant() {
        let v = c.amax();
        class_max = class_max.max(v);
        if v > tol {
            record(&format!("class {q}"), v);
        }
    }
    residuals.insert("nonconstant_classes".into(), class_max);
    let grouped_pass = class_max <= tol && target_dev <= tol;
    let grid_pass = grid <= tol;

    let einstein = violated.is_empty();
    Ok(VerificationReport {
        einstein,
        einstein_constant: einstein.then_some(0.0 - tr2),
        tolerance: tol,
        residuals,
        violated_conditions: violated,
        grouped_pass,
        grid_pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalarCaseReport {
    pub scalar: bool,
    pub ricci_flat: bool,
    /// `scalar == ricci_flat`.
    pub holds: bool,
    pub base_ricci_max: f64,
}

/// For an Einstein extension, `D` is scalar exactly when the base is Ricci
/// flat.
pub fn scalar_case_check(spec: &ExtensionSpec, tol: f64) -> Result<ScalarCaseReport> {
    let report = verify_extension(spec, tol)?;
    if !report.einstein {
        return Err(Error::NotEinstein(report.violated_conditions.join(", ")));
    }
    let p = spec.p_values()?;
    let scalar = spec.spectral.iter().all(|x| *x == spec.spectral[0])
        || p.iter().all(|x| (x - p[0]).abs() <= tol);
    let base_ricci_max = ricci_at(spec, 0.0)?.amax();
    let ricci_flat = base_ricci_max <= tol;
    Ok(ScalarCaseReport { scalar, ricci_flat, holds: scalar == ricci_flat, base_ricci_max })
}

/// First `(i, j, k)` (1-based, `i < j`) with `p_k = p_i + p_j`.
pub fn relation_exists(p: &SpectralVector) -> Option<(usize, usize, usize)> {
    let a: Vec<Affine> = p.entries().iter().map(|&x| Affine::constant(x)).collect();
    relation_exists_affine(&a)
}

pub fn relation_exists_affine(p: &[Affine]) -> Option<(usize, usize, usize)> {
    let n = p.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                if p[k] == p[i] + p[j] {
                    return Some((i + 1, j + 1, k + 1));
                }
            }
        }
    }
    None
}

/// Triples `(i, j, k)`, 0-based with `i < j`, for which `μ_{ij|k}` is allowed
/// to be nonzero: `p_i + p_j - p_k ∈ {0, p_1, …, p_n}`.
pub fn sparsity_pattern(p: &SpectralVector) -> BTreeSet<(usize, usize, usize)> {
    let a: Vec<Affine> = p.entries().iter().map(|&x| Affine::constant(x)).collect();
    sparsity_pattern_affine(&a)
}

pub fn sparsity_pattern_affine(p: &[Affine]) -> BTreeSet<(usize, usize, usize)> {
    let n = p.len();
    let mut allowed: BTreeSet<Affine> = p.iter().copied().collect();
    allowed.insert(Affine::default());
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                if allowed.contains(&(p[i] + p[j] - p[k])) {
                    out.insert((i, j, k));
                }
            }
        }
    }
    out
}

/// Largest `|μ_{ij|k}|` over triples outside the sparsity pattern.
pub fn sparsity_violation(spec: &ExtensionSpec) -> f64 {
    let pattern = sparsity_pattern_affine(&spec.spectral);
    spec.algebra
        .nonzeros()
        .filter(|(i, j, k, _)| !pattern.contains(&(*i, *j, *k)))
        .fold(0.0, |m, (.., v)| m.max(v.abs()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassifierReport {
    pub classifier: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// 1-based index that was moved to the last position, if any relabeling
    /// was needed.
    pub relabeled_from: Option<usize>,
    pub gauge_obstruction: bool,
    /// Eigenvalues of the induced endomorphism `D'` on the complementary
    /// block, when applicable.
    pub d_prime_spectrum: Option<Vec<f64>>,
    pub verdict: String,
}

struct Builder {
    tol: f64,
    checks: Vec<Check>,
}

impl Builder {
    fn new(tol: f64) -> Self {
        Builder { tol, checks: Vec::new() }
    }

    /// Records `value` (a nonnegative deviation) against the tolerance.
    fn check(&mut self, name: &str, value: f64) -> bool {
        let passed = value <= self.tol;
        self.checks.push(Check { name: name.into(), value, passed });
        passed
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Moves the single entry of `spec.spectral` equal to `special` to the last
/// position, after checking that the spectrum is exactly `(other, …, other,
/// special)` up to order.
fn normalize_type(
    spec: &ExtensionSpec,
    other: i128,
    special: i128,
    label: &str,
) -> Result<(ExtensionSpec, Option<usize>)> {
    let n = spec.dim();
    let found = || {
        spec.spectral.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
    };
    let wrong = || Error::WrongType { expected: label.into(), found: found() };
    if n < 2 || spec.is_symbolic() {
        return Err(wrong());
    }
    let other = Rational::from_integer(other);
    let special = Rational::from_integer(special);
    let positions: Vec<usize> =
        (0..n).filter(|&i| spec.spectral[i].constant == special).collect();
    let rest_ok = (0..n).all(|i| spec.spectral[i].constant == special || spec.spectral[i].constant == other);
    if positions.len() != 1 || !rest_ok {
        return Err(wrong());
    }
    let s = positions[0];
    if s == n - 1 {
        return Ok((spec.clone(), None));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm[s] = n - 1;
    for (i, slot) in perm.iter_mut().enumerate().skip(s + 1) {
        *slot = i - 1;
    }
    let mut out = spec.clone();
    out.algebra = spec.algebra.permuted(&perm)?;
    let mut spectral = vec![Affine::constant(other); n];
    spectral[n - 1] = Affine::constant(special);
    out.spectral = spectral;
    out.decomposition = None;
    Ok((out, Some(s + 1)))
}

/// Restriction of `μ` to the first `m` indices.
fn leading_block(mu: &StructureTensor, m: usize) -> StructureTensor {
    let mut out = StructureTensor::zero(m);
    for (i, j, k, v) in mu.nonzeros() {
        if i < m && j < m && k < m {
            out.set(i, j, k, v).expect("indices in range");
        }
    }
    out
}

fn block_ricci(mu: &StructureTensor, m: usize) -> Result<DMatrix<f64>> {
    let block = leading_block(mu, m);
    let spec = ExtensionSpec::new(block, vec![Affine::default(); m])?.with_kind(TensorKind::Frame);
    ricci_at(&spec, 0.0)
}

/// Type `(0,…,0,1)`: local product of the hyperbolic plane with an
/// Einstein block of constant `-1`.
pub fn classify_type_0001(spec: &ExtensionSpec, tol: f64) -> Result<ClassifierReport> {
    let (s, relabeled_from) = normalize_type(spec, 0, 1, "(0,...,0,1)")?;
    let n = s.dim();
    let last = n - 1;
    let mut b = Builder::new(tol);
    let touching = s
        .algebra
        .nonzeros()
        .filter(|(i, j, k, _)| *i == last || *j == last || *k == last)
        .fold(0.0_f64, |m, (.., v)| m.max(v.abs()));
    b.check("mu touching index n vanishes", touching);
    let ric = block_ricci(&s.algebra, last)?;
    let dev = (ric + DMatrix::identity(last, last)).amax();
    b.check("block Ricci equals -id", dev);
    let passed = b.passed();
    Ok(ClassifierReport {
        classifier: "type_0001".into(),
        passed,
        checks: b.checks,
        relabeled_from,
        gauge_obstruction: false,
        d_prime_spectrum: None,
        verdict: if passed {
            "product of the hyperbolic plane and an Einstein block with constant -1".into()
        } else {
            "product decomposition not certified".into()
        },
    })
}

/// `S_n = Σ_k μ_{kn|k}`.
fn s_last(mu: &StructureTensor) -> f64 {
    let last = mu.dim() - 1;
    (0..mu.dim()).map(|k| mu.get(k, last, k)).sum()
}

/// `M_{ij} = μ_{ni|j}` for `i, j < n`.
fn last_action(mu: &StructureTensor) -> DMatrix<f64> {
    let last = mu.dim() - 1;
    DMatrix::from_fn(last, last, |i, j| mu.get(last, i, j))
}

/// Type `(1,…,1,0)`.
pub fn classify_type_1110(spec: &ExtensionSpec, tol: f64) -> Result<ClassifierReport> {
    let (s, relabeled_from) = normalize_type(spec, 1, 0, "(1,...,1,0)")?;
    let n = s.dim();
    let last = n - 1;
    let mu = &s.algebra;
    let mut b = Builder::new(tol);
    b.check("S_n = 0", s_last(mu).abs());
    let mut into_last: f64 = 0.0;
    for i in 0..last {
        for j in 0..last {
            into_last = into_last.max(mu.get(i, j, last).abs());
        }
    }
    b.check("mu_{ij|n} = 0", into_last);
    let m = last_action(mu);
    let skew = ((&m - m.transpose()) * 0.5).amax();
    let gauge_obstruction = !b.check("(mu_{ni|j}) symmetric after gauge", skew);
    let mut d_prime_spectrum = None;
    if !gauge_obstruction {
        let sym = (&m + m.transpose()) * 0.5;
        let mut q: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        q.sort_by(f64::total_cmp);
        let sum: f64 = q.iter().sum();
        let sq: f64 = q.iter().map(|x| x * x).sum();
        b.check("Tr D' = 0", sum.abs());
        b.check("Tr D'^2 = n-1", (sq - last as f64).abs());
        d_prime_spectrum = Some(q);
    }
    let ric = block_ricci(mu, last)?;
    b.check("block Ricci flat", ric.amax());
    let passed = b.passed();
    Ok(ClassifierReport {
        classifier: "type_1110".into(),
        passed,
        checks: b.checks,
        relabeled_from,
        gauge_obstruction,
        d_prime_spectrum,
        verdict: if passed {
            "extension of a Ricci-flat block by a traceless D' with Tr D'^2 = n-1".into()
        } else if gauge_obstruction {
            "gauge obstruction: skew part of the last-generator action is not removable".into()
        } else {
            "conditions not satisfied".into()
        },
    })
}

/// Type `(1,…,1,2)`.
pub fn classify_type_1112(spec: &ExtensionSpec, tol: f64) -> Result<ClassifierReport> {
    let (s, relabeled_from) = normalize_type(spec, 1, 2, "(1,...,1,2)")?;
    let n = s.dim();
    let last = n - 1;
    let mu = &s.algebra;
    let mut b = Builder::new(tol);
    b.check("S_n = 0", s_last(mu).abs());
    let in_n = (0..last).map(|i| mu.get(i, last, last).abs()).fold(0.0, f64::max);
    b.check("mu_{in|n} = 0", in_n);
    let m = last_action(mu);
    let sym = ((&m + m.transpose()) * 0.5).amax();
    let skew = ((&m - m.transpose()) * 0.5).amax();
    b.check("symmetric part of (mu_{nk|l}) vanishes", sym);
    let gauge_obstruction = !b.check("mu_{nk|l} = 0 after gauge", skew);
    let contact = (0..last)
        .map(|i| {
            let s: f64 = (0..last).map(|k| mu.get(i, k, last).powi(2)).sum();
            (s - 4.0).abs()
        })
        .fold(0.0, f64::max);
    b.check("sum_k mu_{ik|n}^2 = 4", contact);
    let mut expected = vec![-2.0; n];
    expected[last] = last as f64;
    let target = DMatrix::from_diagonal(&DVector::from_vec(expected));
    b.check("Ric at u=0 equals diag(-2,...,-2,n-1)", (ricci_at(&s, 0.0)? - target).amax());
    let passed = b.passed();
    Ok(ClassifierReport {
        classifier: "type_1112".into(),
        passed,
        checks: b.checks,
        relabeled_from,
        gauge_obstruction,
        d_prime_spectrum: None,
        verdict: if passed {
            "locally K-contact eta-Einstein base".into()
        } else if gauge_obstruction {
            "gauge obstruction: skew part of the last-generator action is not removable".into()
        } else {
            "conditions not satisfied".into()
        },
    })
}
