//! Metric Lie algebras and homogeneous frame data given by structure
//! constants `μ_{ij|k} = <[ē_i, ē_j], ē_k>` in an orthonormal frame.
//!
//! Indices are 0-based throughout this module. The eigenvalues of `D` are
//! carried as [`Affine`] values so that one free scalar parameter can be kept
//! symbolic.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{Affine, Rational};
use crate::spectral::SpectralVector;

pub const DEFAULT_JACOBI_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_PATTERN_TOLERANCE: f64 = 1e-10;

/// Sparse antisymmetric tensor `μ_{ij|k}`, stored once per pair `i < j`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct StructureTensor {
    dim: usize,
    entries: BTreeMap<(usize, usize, usize), f64>,
}

impl StructureTensor {
    pub fn zero(dim: usize) -> Self {
        StructureTensor { dim, entries: BTreeMap::new() }
    }

    /// Builds a tensor from `(i, j, k, value)` entries; later entries for the
    /// same normalized key overwrite earlier ones.
    pub fn from_entries(dim: usize, entries: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut t = Self::zero(dim);
        for &(i, j, k, v) in entries {
            t.set(i, j, k, v)?;
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sets `μ_{ij|k} = v` (and implicitly `μ_{ji|k} = -v`).
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) -> Result<()> {
        for index in [i, j, k] {
            if index >= self.dim {
                return Err(Error::IndexOutOfRange { index, dim: self.dim });
            }
        }
        if i == j {
            if v != 0.0 {
                return Err(Error::Parse(format!(
                    "mu_{{{i}{i}|{k}}} must vanish by antisymmetry, got {v}"
                )));
            }
            return Ok(());
        }
        let (key, v) = if i < j { ((i, j, k), v) } else { ((j, i, k), -v) };
        if v == 0.0 {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, v);
        }
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.entries.get(&(i, j, k)).copied().unwrap_or(0.0),
            std::cmp::Ordering::Greater => -self.entries.get(&(j, i, k)).copied().unwrap_or(0.0),
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Stored entries `(i, j, k, μ_{ij|k})` with `i < j`, in key order.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(i, j, k), &v)| (i, j, k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm(&self) -> f64 {
        self.entries.values().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Dense `n³` array indexed as `[(i * n + j) * n + k]`.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n * n];
        for (&(i, j, k), &v) in &self.entries {
            out[(i * n + j) * n + k] = v;
            out[(j * n + i) * n + k] = -v;
        }
        out
    }

    /// Matrix of `ad_{ē_i}`: `(ad_i)_{kl} = μ_{il|k}`.
    pub fn ad(&self, i: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |k, l| self.get(i, l, k))
    }

    /// Block direct sum; indices of `other` are shifted by `self.dim()`.
    pub fn direct_sum(&self, other: &StructureTensor) -> StructureTensor {
        let shift = self.dim;
        let mut entries = self.entries.clone();
        for (&(i, j, k), &v) in &other.entries {
            entries.insert((i + shift, j + shift, k + shift), v);
        }
        StructureTensor { dim: self.dim + other.dim, entries }
    }

    /// Relabels indices: the new index of `i` is `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<StructureTensor> {
        if perm.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: perm.len() });
        }
        let mut out = StructureTensor::zero(self.dim);
        for (i, j, k, v) in self.nonzeros() {
            out.set(perm[i], perm[j], perm[k], v)?;
        }
        Ok(out)
    }

    /// Checks the Jacobi identity, for data that claims to be a Lie algebra.
    pub fn check_jacobi(&self, tol: f64) -> Result<()> {
        let residual = jacobi_residual(self);
        if residual > tol {
            return Err(Error::Jacobi { residual, tolerance: tol });
        }
        Ok(())
    }
}

/// Whether structure data is claimed to satisfy the Jacobi identity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TensorKind {
    #[default]
    Lie,
    Frame,
}

/// Orthogonal splitting `𝔤 = 𝔥 ⊕ 𝔪` into an abelian subalgebra and an ideal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrthogonalDecomposition {
    pub h: Vec<usize>,
    pub m: Vec<usize>,
}

impl OrthogonalDecomposition {
    pub fn new(h: Vec<usize>, m: Vec<usize>) -> Self {
        OrthogonalDecomposition { h, m }
    }

    /// Partition of `0..n`, `[𝔥, 𝔥] = 0` and `[𝔤, 𝔪] ⊂ 𝔪`.
    pub fn validate(&self, mu: &StructureTensor, tol: f64) -> Result<()> {
        let n = mu.dim();
        let mut seen = vec![false; n];
        for &x in self.h.iter().chain(&self.m) {
            if x >= n {
                return Err(Error::IndexOutOfRange { index: x, dim: n });
            }
            if std::mem::replace(&mut seen[x], true) {
                return Err(Error::Decomposition(format!("index {} listed twice", x + 1)));
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Decomposition(format!("index {} not covered", missing + 1)));
        }
        for &a in &self.h {
            for &b in &self.h {
                for c in 0..n {
                    if mu.get(a, b, c).abs() > tol {
                        return Err(Error::Decomposition(format!(
                            "h is not abelian: mu_{{{}{}|{}}} = {}",
                            a + 1,
                            b + 1,
                            c + 1,
                            mu.get(a, b, c)
                        )));
                    }
                }
            }
        }
        for &k in &self.m {
            for x in 0..n {
                for &a in &self.h {
                    if mu.get(x, k, a).abs() > tol {
                        return Err(Error::Decomposition(format!(
                            "m is not an ideal: mu_{{{}{}|{}}} = {}",
                            x + 1,
                            k + 1,
                            a + 1,
                            mu.get(x, k, a)
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Structure data together with the diagonal endomorphism `D ē_i = p_i ē_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionSpec {
    pub algebra: StructureTensor,
    pub spectral: Vec<Affine>,
    /// Value of the symbolic parameter `t`, required when any `p_i` uses it.
    pub param: Option<f64>,
    pub kind: TensorKind,
    /// Set for data whose structure functions vary over the base.
    pub non_constant: bool,
    pub decomposition: Option<OrthogonalDecomposition>,
}

impl ExtensionSpec {
    pub fn new(algebra: StructureTensor, spectral: Vec<Affine>) -> Result<Self> {
        if algebra.dim() != spectral.len() {
            return Err(Error::DimensionMismatch { expected: algebra.dim(), found: spectral.len() });
        }
        Ok(ExtensionSpec {
            algebra,
            spectral,
            param: None,
            kind: TensorKind::Lie,
            non_constant: false,
            decomposition: None,
        })
    }

    pub fn from_rationals(algebra: StructureTensor, p: &[Rational]) -> Result<Self> {
        Self::new(algebra, p.iter().map(|&x| Affine::constant(x)).collect())
    }

    pub fn from_spectral(algebra: StructureTensor, p: &SpectralVector) -> Result<Self> {
        Self::from_rationals(algebra, p.entries())
    }

    pub fn with_param(mut self, t: f64) -> Self {
        self.param = Some(t);
        self
    }

    pub fn with_kind(mut self, kind: TensorKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_decomposition(mut self, d: OrthogonalDecomposition) -> Self {
        self.decomposition = Some(d);
        self
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn is_symbolic(&self) -> bool {
        self.spectral.iter().any(|p| !p.is_rational())
    }

    /// Numeric eigenvalues.
    pub fn p_values(&self) -> Result<Vec<f64>> {
        let t = match (self.is_symbolic(), self.param) {
            (true, None) => return Err(Error::MissingParam),
            (_, t) => t.unwrap_or(0.0),
        };
        Ok(self.spectral.iter().map(|p| p.eval(t)).collect())
    }

    /// The exact spectral vector when no symbolic parameter is involved.
    pub fn exact_spectral(&self) -> Option<SpectralVector> {
        if self.is_symbolic() {
            return None;
        }
        SpectralVector::new(self.spectral.iter().map(|p| p.constant).collect()).ok()
    }

    pub fn trace(&self) -> Affine {
        self.spectral.iter().fold(Affine::default(), |acc, &p| acc + p)
    }

    /// `Tr D` and `Tr D²` evaluated numerically.
    pub fn traces(&self) -> Result<(f64, f64)> {
        let p = self.p_values()?;
        Ok((p.iter().sum(), p.iter().map(|x| x * x).sum()))
    }

    /// Refuses non-constant data, and Lie data that violates Jacobi.
    pub fn validate(&self, jacobi_tol: f64) -> Result<()> {
        if self.non_constant {
            return Err(Error::NonConstant);
        }
        if self.dim() != self.spectral.len() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: self.spectral.len() });
        }
        self.p_values()?;
        if self.kind == TensorKind::Lie {
            self.algebra.check_jacobi(jacobi_tol)?;
        }
        if let Some(d) = &self.decomposition {
            d.validate(&self.algebra, DEFAULT_PATTERN_TOLERANCE)?;
        }
        Ok(())
    }

    /// Block direct sum of two specs (tensor and eigenvalues).
    pub fn direct_sum(&self, other: &ExtensionSpec) -> Result<ExtensionSpec> {
        let param = match (self.param, other.param) {
            (Some(a), Some(b)) if a != b => return Err(Error::ParamConflict(a, b)),
            (a, b) => a.or(b),
        };
        let kind = if self.kind == TensorKind::Lie && other.kind == TensorKind::Lie {
            TensorKind::Lie
        } else {
            TensorKind::Frame
        };
        Ok(ExtensionSpec {
            algebra: self.algebra.direct_sum(&other.algebra),
            spectral: self.spectral.iter().chain(&other.spectral).copied().collect(),
            param,
            kind,
            non_constant: self.non_constant || other.non_constant,
            decomposition: None,
        })
    }
}

/// The cyclic sums `Σ_m (μ_{ij|m}μ_{mk|l} + μ_{jk|m}μ_{mi|l} + μ_{ki|m}μ_{mj|l})`
/// for `i < j < k` and every `l`, in lexicographic order.
pub fn jacobi_components(mu: &StructureTensor) -> Vec<f64> {
    let n = mu.dim();
    let d = mu.dense();
    let at = |i: usize, j: usize, k: usize| d[(i * n + j) * n + k];
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in 0..n {
                    let s: f64 = (0..n)
                        .map(|m| {
                            at(i, j, m) * at(m, k, l)
                                + at(j, k, m) * at(m, i, l)
                                + at(k, i, m) * at(m, j, l)
                        })
                        .sum();
                    out.push(s);
                }
            }
        }
    }
    out
}

pub fn jacobi_residual(mu: &StructureTensor) -> f64 {
    jacobi_components(mu).into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivationCheck {
    pub is_derivation: bool,
    pub max_violation: f64,
}

/// Tests whether `D` is a derivation: `(p_k - p_i - p_j) μ_{ij|k} = 0`.
pub fn is_derivation(spec: &ExtensionSpec, tol: f64) -> Result<DerivationCheck> {
    if spec.spectral.len() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: spec.spectral.len() });
    }
    let p = spec.p_values()?;
    let max_violation = spec
        .algebra
        .nonzeros()
        .map(|(i, j, k, v)| ((p[k] - p[i] - p[j]) * v).abs())
        .fold(0.0, f64::max);
    Ok(DerivationCheck { is_derivation: max_violation <= tol, max_violation })
}

/// Killing form `B_{ij} = Σ_{k,l} μ_{jk|l} μ_{il|k}`, symmetrized.
pub fn killing_form(mu: &StructureTensor) -> DMatrix<f64> {
    let n = mu.dim();
    let ads: Vec<DMatrix<f64>> = (0..n).map(|i| mu.ad(i)).collect();
    let b = DMatrix::from_fn(n, n, |i, j| (&ads[i] * &ads[j]).trace());
    (&b + b.transpose()) * 0.5
}

/// `H_i = Tr ad_i = Σ_k μ_{ik|k}`.
pub fn mean_curvature(mu: &StructureTensor) -> Vec<f64> {
    let mut h = vec![0.0; mu.dim()];
    for (i, j, k, v) in mu.nonzeros() {
        if k == j {
            h[i] += v;
        }
        if k == i {
            h[j] -= v;
        }
    }
    h
}

/// Components `Σ_j μ_{ij|j}(p_i - p_j)`; all vanish iff `div D = 0`.
pub fn divergence_residual(spec: &ExtensionSpec) -> Result<Vec<f64>> {
    let p = spec.p_values()?;
    let mu = &spec.algebra;
    Ok((0..spec.dim())
        .map(|i| (0..spec.dim()).map(|j| mu.get(i, j, j) * (p[i] - p[j])).sum())
        .collect())
}

/// An entry of `ad_b|𝔪` that fits neither the skew nor the shifting pattern,
/// or a skew-pattern block that is not skew-symmetric.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatternViolation {
    pub generator: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Splitting of the `𝔥`-action on `𝔪`. Matrices are indexed by positions in
/// `decomposition.m`.
#[derive(Clone, Debug, PartialEq)]
pub struct QnSplit {
    pub m: Vec<usize>,
    /// `ad_a|𝔪` for `a ∈ 𝔥` with `p_a = 0`.
    pub t: BTreeMap<usize, DMatrix<f64>>,
    /// Block-diagonal skew part for `p_b ≠ 0`.
    pub q: BTreeMap<usize, DMatrix<f64>>,
    /// Shifting part for `p_b ≠ 0`.
    pub n: BTreeMap<usize, DMatrix<f64>>,
    pub violations: Vec<PatternViolation>,
}

impl QnSplit {
    /// All families, labelled for error reporting.
    fn labelled(&self) -> Vec<(String, &DMatrix<f64>)> {
        let mut out = Vec::new();
        for (a, m) in &self.t {
            out.push((format!("T_{}", a + 1), m));
        }
        for (b, m) in &self.q {
            out.push((format!("Q_{}", b + 1), m));
        }
        for (b, m) in &self.n {
            out.push((format!("N_{}", b + 1), m));
        }
        out
    }

    /// First pair of families whose commutator exceeds `tol` in max norm.
    pub fn first_noncommuting(&self, tol: f64) -> Option<(String, String, f64)> {
        let all = self.labelled();
        for (x, (na, a)) in all.iter().enumerate() {
            for (nb, b) in &all[x + 1..] {
                let c = *a * *b - *b * *a;
                let norm = c.amax();
                if norm > tol {
                    return Some((na.clone(), nb.clone(), norm));
                }
            }
        }
        None
    }
}

pub fn qn_split(
    mu: &StructureTensor,
    spec: &ExtensionSpec,
    decomp: &OrthogonalDecomposition,
    tol: f64,
) -> Result<QnSplit> {
    if spec.dim() != mu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: spec.dim() });
    }
    decomp.validate(mu, tol)?;
    let p = spec.p_values()?;
    let m = decomp.m.clone();
    let size = m.len();
    let mut split = QnSplit {
        m: m.clone(),
        t: BTreeMap::new(),
        q: BTreeMap::new(),
        n: BTreeMap::new(),
        violations: Vec::new(),
    };
    for &b in &decomp.h {
        let ad = DMatrix::from_fn(size, size, |r, c| mu.get(b, m[c], m[r]));
        if p[b].abs() <= tol {
            split.t.insert(b, ad);
            continue;
        }
        let mut q = DMatrix::zeros(size, size);
        let mut nn = DMatrix::zeros(size, size);
        for r in 0..size {
            for c in 0..size {
                let v = ad[(r, c)];
                let (pk, pl) = (p[m[r]], p[m[c]]);
                if (pk - pl).abs() <= tol {
                    q[(r, c)] = v;
                } else if (pk - pl - p[b]).abs() <= tol {
                    nn[(r, c)] = v;
                } else if v.abs() > tol {
                    split.violations.push(PatternViolation { generator: b, row: m[r], col: m[c], value: v });
                }
            }
        }
        for r in 0..size {
            for c in r..size {
                let asym = q[(r, c)] + q[(c, r)];
                if asym.abs() > tol {
                    split.violations.push(PatternViolation {
                        generator: b,
                        row: m[r],
                        col: m[c],
                        value: asym,
                    });
                }
            }
        }
        split.q.insert(b, q);
        split.n.insert(b, nn);
    }
    Ok(split)
}

/// Replaces `ad_b` by its shifting part `N_b` for every `b ∈ 𝔥` with
/// `p_b ≠ 0`, keeping all other brackets.
pub fn standard_modification(
    mu: &StructureTensor,
    spec: &ExtensionSpec,
    decomp: &OrthogonalDecomposition,
    tol: f64,
) -> Result<StructureTensor> {
    let split = qn_split(mu, spec, decomp, tol)?;
    if let Some(v) = split.violations.first() {
        return Err(Error::PatternViolation {
            count: split.violations.len(),
            generator: v.generator + 1,
            row: v.row + 1,
            col: v.col + 1,
            value: v.value,
        });
    }
    if let Some((left, right, norm)) = split.first_noncommuting(tol) {
        return Err(Error::Commutation { left, right, norm });
    }
    let mut out = mu.clone();
    for (&b, nb) in &split.n {
        for (r, &k) in split.m.iter().enumerate() {
            for (c, &l) in split.m.iter().enumerate() {
                out.set(b, l, k, nb[(r, c)])?;
            }
        }
    }
    Ok(out)
}
