//! Curvature of the deformation `g^u = (exp(uD))* g` and of the extension
//! `du² + g^u`, for constant structure data.
//!
//! Everything is expressed in the `g^u`-orthonormal frame `e_i = e^{-u p_i} ē_i`.
//! Each Ricci coefficient is a finite sum of terms `c · e^{-2uq}`; the
//! exponents `q` are kept exact (as [`Affine`] values) and terms with equal
//! exponent are collected.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::algebra::{divergence_residual, killing_form, mean_curvature, ExtensionSpec};
use crate::error::{Error, Result};
use crate::exact::{frac, Affine};

fn require_constant(spec: &ExtensionSpec) -> Result<()> {
    if spec.non_constant {
        return Err(Error::NonConstant);
    }
    Ok(())
}

fn half(a: Affine) -> Affine {
    a.scale(frac(1, 2))
}

/// Christoffel symbols `Γ^i_{jk}(u) = <∇_{e_k} e_j, e_i>` stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    dim: usize,
    data: Vec<f64>,
}

impl Connection {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.dim + j) * self.dim + k]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

pub fn connection_coeffs(spec: &ExtensionSpec, u: f64) -> Result<Connection> {
    require_constant(spec)?;
    let p = spec.p_values()?;
    let n = spec.dim();
    let mu = spec.algebra.dense();
    let m = |i: usize, j: usize, k: usize| mu[(i * n + j) * n + k];
    let mut data = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                data[(i * n + j) * n + k] = 0.5 * (u * (p[k] - p[i] - p[j])).exp() * m(i, j, k)
                    - 0.5 * (u * (p[i] - p[j] - p[k])).exp() * m(j, k, i)
                    - 0.5 * (u * (p[j] - p[k] - p[i])).exp() * m(k, i, j);
            }
        }
    }
    Ok(Connection { dim: n, data })
}

/// `Ric^u = Σ_q e^{-2uq} C_q`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupedRicci {
    dim: usize,
    classes: BTreeMap<Affine, DMatrix<f64>>,
}

impl GroupedRicci {
    fn new(dim: usize) -> Self {
        GroupedRicci { dim, classes: BTreeMap::new() }
    }

    fn add(&mut self, q: Affine, i: usize, j: usize, value: f64) {
        if value == 0.0 {
            return;
        }
        let n = self.dim;
        self.classes.entry(q).or_insert_with(|| DMatrix::zeros(n, n))[(i, j)] += value;
    }

    fn prune(&mut self) {
        self.classes.retain(|_, m| m.iter().any(|x| *x != 0.0));
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> &BTreeMap<Affine, DMatrix<f64>> {
        &self.classes
    }

    /// The coefficient of `e^0`, or zero.
    pub fn constant_class(&self) -> DMatrix<f64> {
        self.classes
            .get(&Affine::default())
            .cloned()
            .unwrap_or_else(|| DMatrix::zeros(self.dim, self.dim))
    }

    /// Exponents other than zero, with their coefficients.
    pub fn nonconstant(&self) -> impl Iterator<Item = (&Affine, &DMatrix<f64>)> {
        self.classes.iter().filter(|(q, _)| !q.is_zero())
    }

    /// Evaluates the expansion at `u`; `t` is the symbolic parameter value.
    pub fn eval(&self, u: f64, t: f64) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (q, c) in &self.classes {
            out += c * (-2.0 * u * q.eval(t)).exp();
        }
        out
    }

    /// Per-exponent traces.
    pub fn traces(&self) -> BTreeMap<Affine, f64> {
        self.classes.iter().map(|(q, c)| (*q, c.trace())).collect()
    }

    /// Largest deviation from symmetry over all coefficient matrices.
    pub fn asymmetry(&self) -> f64 {
        self.classes.values().map(|c| (c - c.transpose()).amax()).fold(0.0, f64::max)
    }
}

impl Serialize for GroupedRicci {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let classes: Vec<ClassEntry> = self
            .classes
            .iter()
            .map(|(q, m)| ClassEntry { exponent: q.to_string(), matrix: crate::io::matrix_rows(m) })
            .collect();
        let mut st = s.serialize_struct("GroupedRicci", 2)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("classes", &classes)?;
        st.end()
    }
}

#[derive(Serialize)]
struct ClassEntry {
    exponent: String,
    matrix: Vec<Vec<f64>>,
}

/// Collects the Ricci tensor of `g^u` by exponent class.
pub fn ricci_deformation(spec: &ExtensionSpec) -> Result<GroupedRicci> {
    require_constant(spec)?;
    spec.p_values()?;
    let n = spec.dim();
    let p = &spec.spectral;
    let mu = spec.algebra.dense();
    let m = |i: usize, j: usize, k: usize| mu[(i * n + j) * n + k];
    let h = mean_curvature(&spec.algebra);
    let mut out = GroupedRicci::new(n);
    for i in 0..n {
        for j in 0..n {
            let mid = half(p[i] + p[j]);
            let skew_ij = half(p[j] - p[i]);
            for k in 0..n {
                for l in 0..n {
                    // -1/2 B_ij
                    out.add(mid, i, j, -0.5 * m(j, k, l) * m(i, l, k));
                    // 1/4 Σ μ_{kl|i} μ_{kl|j}
                    out.add(p[k] + p[l] - mid, i, j, 0.25 * m(k, l, i) * m(k, l, j));
                    // -1/2 Σ μ_{ik|l} μ_{jk|l}
                    out.add(mid + p[k] - p[l], i, j, -0.5 * m(i, k, l) * m(j, k, l));
                }
            }
            for l in 0..n {
                out.add(p[l] + skew_ij, i, j, -0.5 * m(l, j, i) * h[l]);
                out.add(p[l] - skew_ij, i, j, -0.5 * m(l, i, j) * h[l]);
            }
        }
    }
    out.prune();
    Ok(out)
}

/// Ricci tensor of `g^u` at a single `u`, evaluated term by term with the
/// Killing form and mean curvature precomputed.
pub fn ricci_at(spec: &ExtensionSpec, u: f64) -> Result<DMatrix<f64>> {
    require_constant(spec)?;
    let p = spec.p_values()?;
    let n = spec.dim();
    let mu = &spec.algebra;
    let b = killing_form(mu);
    let h = mean_curvature(mu);
    let e = |x: f64| (u * x).exp();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let mut r = -0.5 * e(-(p[i] + p[j])) * b[(i, j)];
        for l in 0..n {
            r -= 0.5
                * (e(p[i] - p[j] - 2.0 * p[l]) * mu.get(l, j, i)
                    + e(p[j] - p[i] - 2.0 * p[l]) * mu.get(l, i, j))
                * h[l];
        }
        let mut quarter = 0.0;
        let mut second = 0.0;
        for k in 0..n {
            for l in 0..n {
                quarter += e(-2.0 * (p[l] + p[k])) * mu.get(k, l, i) * mu.get(k, l, j);
                second += e(2.0 * (p[l] - p[k])) * mu.get(i, k, l) * mu.get(j, k, l);
            }
        }
        r + 0.25 * e(p[i] + p[j]) * quarter - 0.5 * e(-(p[i] + p[j])) * second
    }))
}

/// Scalar curvature of `g^u` by exponent class, computed from the Killing
/// form and mean curvature rather than by tracing [`ricci_deformation`].
pub fn scalar_deformation(spec: &ExtensionSpec) -> Result<BTreeMap<Affine, f64>> {
    require_constant(spec)?;
    spec.p_values()?;
    let n = spec.dim();
    let p = &spec.spectral;
    let b = killing_form(&spec.algebra);
    let h = mean_curvature(&spec.algebra);
    let mut out: BTreeMap<Affine, f64> = BTreeMap::new();
    for k in 0..n {
        let c = -(h[k] * h[k] + 0.5 * b[(k, k)]);
        if c != 0.0 {
            *out.entry(p[k]).or_default() += c;
        }
    }
    for (k, l, i, v) in spec.algebra.nonzeros() {
        // each unordered pair appears twice in the full sum
        *out.entry(p[k] + p[l] - p[i]).or_default() -= 0.5 * v * v;
    }
    out.retain(|_, v| *v != 0.0);
    Ok(out)
}

/// Evaluates a grouped scalar expansion at `u`.
pub fn eval_scalar(terms: &BTreeMap<Affine, f64>, u: f64, t: f64) -> f64 {
    terms.iter().map(|(q, c)| c * (-2.0 * u * q.eval(t)).exp()).sum()
}

/// Ricci tensor of the `(n+1)`-dimensional extension, index 0 being `∂_u`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionRicci {
    /// `ric_00 = -Tr D²`.
    pub ric_00: f64,
    /// `ric_0i = -e^{-u p_i} d_i` with `d` the divergence residual, stored
    /// as `(p_i / 2, -d_i)` in the `e^{-2uq}` convention.
    pub ric_0i: Vec<(Affine, f64)>,
    /// `ric_ij = Ric^u_ij - δ_ij p_i Tr D`.
    pub ric_ij: GroupedRicci,
}

impl ExtensionRicci {
    pub fn eval(&self, u: f64, t: f64) -> DMatrix<f64> {
        let n = self.ric_ij.dim();
        let mut out = DMatrix::zeros(n + 1, n + 1);
        out[(0, 0)] = self.ric_00;
        for (i, (q, c)) in self.ric_0i.iter().enumerate() {
            let v = c * (-2.0 * u * q.eval(t)).exp();
            out[(0, i + 1)] = v;
            out[(i + 1, 0)] = v;
        }
        out.view_mut((1, 1), (n, n)).copy_from(&self.ric_ij.eval(u, t));
        out
    }

    /// Max deviation from `ric_00 · id` over the given `u` values.
    pub fn einstein_deviation(&self, us: &[f64], t: f64) -> f64 {
        let n = self.ric_ij.dim() + 1;
        us.iter()
            .map(|&u| (self.eval(u, t) - DMatrix::identity(n, n) * self.ric_00).amax())
            .fold(0.0, f64::max)
    }
}

impl Serialize for ExtensionRicci {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Mixed {
            exponent: String,
            coefficient: f64,
        }
        let mixed: Vec<Mixed> = self
            .ric_0i
            .iter()
            .map(|(q, c)| Mixed { exponent: q.to_string(), coefficient: *c })
            .collect();
        let mut st = s.serialize_struct("ExtensionRicci", 3)?;
        st.serialize_field("ric_00", &self.ric_00)?;
        st.serialize_field("ric_0i", &mixed)?;
        st.serialize_field("ric_ij", &self.ric_ij)?;
        st.end()
    }
}

pub fn extension_ricci(spec: &ExtensionSpec) -> Result<ExtensionRicci> {
    let mut ric_ij = ricci_deformation(spec)?;
    let p = spec.p_values()?;
    let (trace, trace_sq) = spec.traces()?;
    let div = divergence_residual(spec)?;
    let n = spec.dim();
    for (i, &pi) in p.iter().enumerate() {
        ric_ij.add(Affine::default(), i, i, -pi * trace);
    }
    ric_ij.prune();
    let ric_0i = (0..n).map(|i| (half(spec.spectral[i]), -div[i])).collect();
    Ok(ExtensionRicci { ric_00: -trace_sq, ric_0i, ric_ij })
}

/// Ricci data of a spec in one bundle.
#[derive(Clone, Debug)]
pub struct CurvatureReport {
    pub ric_u: GroupedRicci,
    pub scal_terms: BTreeMap<Affine, f64>,
    pub extension_ricci: ExtensionRicci,
}

impl Serialize for CurvatureReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let scal: BTreeMap<String, f64> =
            self.scal_terms.iter().map(|(q, v)| (q.to_string(), *v)).collect();
        let mut st = s.serialize_struct("CurvatureReport", 3)?;
        st.serialize_field("ric_u", &self.ric_u)?;
        st.serialize_field("scal_terms", &scal)?;
        st.serialize_field("extension_ricci", &self.extension_ricci)?;
        st.end()
    }
}

pub fn curvature_report(spec: &ExtensionSpec) -> Result<CurvatureReport> {
    Ok(CurvatureReport {
        ric_u: ricci_deformation(spec)?,
        scal_terms: scalar_deformation(spec)?,
        extension_ricci: extension_ricci(spec)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::StructureTensor;
    use nalgebra::DVector;

    fn spec(entries: &[(usize, usize, usize, f64)], p: &[i128]) -> ExtensionSpec {
        let mu = StructureTensor::from_entries(p.len(), entries).unwrap();
        ExtensionSpec::new(mu, p.iter().map(|&x| Affine::int(x)).collect()).unwrap()
    }

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(v))
    }

    #[test]
    fn abelian_is_flat() {
        let s = spec(&[], &[1, -2, 3]);
        assert!(ricci_deformation(&s).unwrap().classes().is_empty());
        assert!(scalar_deformation(&s).unwrap().is_empty());
        for u in [-1.0, 0.0, 2.0] {
            assert_eq!(connection_coeffs(&s, u).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn heisenberg_connection_at_zero() {
        let s = spec(&[(0, 1, 2, 2.0)], &[1, 1, 2]);
        let g = connection_coeffs(&s, 0.0).unwrap();
        assert_eq!(g.get(2, 0, 1), -1.0);
        assert_eq!(g.get(2, 1, 0), 1.0);
        assert_eq!(g.get(0, 1, 2), 1.0);
        assert_eq!(g.get(0, 2, 1), 1.0);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert!((g.get(i, j, k) + g.get(j, i, k)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn heisenberg_ricci_is_constant() {
        let s = spec(&[(0, 1, 2, 2.0)], &[1, 1, 2]);
        let r = ricci_deformation(&s).unwrap();
        assert_eq!(r.classes().len(), 1);
        assert!((r.constant_class() - diag(&[-2.0, -2.0, 2.0])).amax() < 1e-14);
        let scal = scalar_deformation(&s).unwrap();
        assert_eq!(scal.len(), 1);
        assert!((scal[&Affine::default()] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn e2_is_ricci_flat_for_all_u() {
        let s = spec(&[(2, 0, 1, 1.0), (2, 1, 0, -1.0)], &[1, 1, 1]);
        let r = ricci_deformation(&s).unwrap();
        for c in r.classes().values() {
            assert!(c.amax() < 1e-14);
        }
        for u in [-1.0, 0.5, 2.0] {
            assert!(ricci_at(&s, u).unwrap().amax() < 1e-12);
        }
    }

    #[test]
    fn row4_scalar_curvature() {
        let s = spec(&[(2, 0, 0, 1.0), (2, 1, 1, -1.0)], &[1, 1, 0]);
        let scal = scalar_deformation(&s).unwrap();
        assert!((eval_scalar(&scal, 0.3, 0.0) + 2.0).abs() < 1e-12);
        let total: f64 = scal.values().sum();
        assert!((total + 2.0).abs() < 1e-12);
    }

    #[test]
    fn grouped_matches_direct_on_non_derivation() {
        let s = spec(&[(0, 1, 2, 0.7), (2, 0, 0, 1.3), (2, 1, 1, -0.4), (1, 2, 0, 0.25)], &[2, -1, 1]);
        let r = ricci_deformation(&s).unwrap();
        for u in [-1.0, -0.3, 0.0, 0.7, 2.0] {
            assert!((r.eval(u, 0.0) - ricci_at(&s, u).unwrap()).amax() < 1e-10);
        }
        assert!(r.asymmetry() < 1e-12);
    }

    #[test]
    fn trace_identity() {
        let s = spec(&[(0, 1, 2, 0.7), (0, 2, 1, -1.1), (1, 2, 1, 0.3)], &[3, -1, 2]);
        let traces = ricci_deformation(&s).unwrap().traces();
        let scal = scalar_deformation(&s).unwrap();
        for (q, v) in &traces {
            assert!((scal.get(q).copied().unwrap_or(0.0) - v).abs() < 1e-12, "class {q}");
        }
        for (q, v) in &scal {
            assert!((traces.get(q).copied().unwrap_or(0.0) - v).abs() < 1e-12, "class {q}");
        }
    }

    #[test]
    fn extension_ricci_examples() {
        let abelian = extension_ricci(&spec(&[], &[1, 1, 1])).unwrap();
        assert!(abelian.einstein_deviation(&[0.0, 1.0], 0.0) < 1e-14);
        assert_eq!(abelian.ric_00, -3.0);

        let h = extension_ricci(&spec(&[(0, 1, 2, 2.0)], &[1, 1, 2])).unwrap();
        assert_eq!(h.ric_00, -6.0);
        for u in [-1.0, 0.0, 2.0] {
            assert!((h.eval(u, 0.0) + DMatrix::identity(4, 4) * 6.0).amax() < 1e-12);
        }

        let diverging = extension_ricci(&spec(&[(2, 0, 0, 1.0), (2, 1, 1, -1.0)], &[1, 2, 0])).unwrap();
        let mixed = diverging.eval(0.5, 0.0);
        // divergence residual of index 3 is 1; ∂u pairs with it with a minus sign
        assert!((mixed[(0, 3)] + 1.0).abs() < 1e-14);
        assert!((mixed[(3, 0)] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn symbolic_exponents_stay_exact() {
        let mu = StructureTensor::from_entries(3, &[(0, 1, 2, 1.0)]).unwrap();
        let s = ExtensionSpec::new(mu, vec![Affine::int(1), Affine::param(), Affine::int(0)])
            .unwrap()
            .with_param(2f64.sqrt());
        let r = ricci_deformation(&s).unwrap();
        assert!(r.classes().keys().any(|q| !q.is_rational()));
        let t = 2f64.sqrt();
        for u in [-1.0, 0.4, 1.5] {
            assert!((r.eval(u, t) - ricci_at(&s, u).unwrap()).amax() < 1e-10);
        }
    }

    #[test]
    fn refuses_non_constant_data() {
        let mut s = spec(&[], &[1, 1]);
        s.non_constant = true;
        assert!(matches!(ricci_deformation(&s), Err(Error::NonConstant)));
        assert!(matches!(connection_coeffs(&s, 0.0), Err(Error::NonConstant)));
    }
}
