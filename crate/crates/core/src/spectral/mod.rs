//! Admissible eigenvalue types of `D` for Einstein extensions with
//! `det D != 0` and `Tr D != 0`.
//!
//! The root set `F` consists of the vectors `f_i + f_j - f_k` (`i < j`,
//! `k` distinct from both). For a maximal linearly independent subset `V` of
//! `F ∩ p⊥` the spectral vector is, up to scale, `1 - V (VᵗV)⁻¹ 1`, which is
//! the projection of the all-ones vector onto `span(V)⊥` (because
//! `Vᵗ 1 = 1`). Enumerating types therefore reduces to enumerating the
//! subspaces spanned by subsets of `F` (the flats of the root matroid); every
//! flat is visited once, keyed by its reduced row echelon form.
//!
//! All arithmetic in this module is exact.

pub mod cone;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{dot, primitive_integer, rank_fraction_free, rat, rref, solve, Rational};

pub use cone::{cone_membership, cone_target, ConeCertificate, LinearProgram, LpOutcome};

/// Default upper bound on the dimension accepted by [`enumerate_types`].
pub const DEFAULT_DIMENSION_CAP: usize = 7;

/// The eigenvalues `(p_1, …, p_n)` of `D`, exact.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpectralVector(Vec<Rational>);

impl SpectralVector {
    pub fn new(entries: Vec<Rational>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::DimensionTooSmall { min: 2, found: entries.len() });
        }
        Ok(SpectralVector(entries))
    }

    pub fn from_ints(entries: &[i128]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| rat(x)).collect())
    }

    pub fn ones(n: usize) -> Result<Self> {
        Self::new(vec![Rational::one(); n])
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn trace(&self) -> Rational {
        self.0.iter().sum()
    }

    pub fn norm_sq(&self) -> Rational {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn is_scalar(&self) -> bool {
        self.0.iter().all(|x| *x == self.0[0])
    }

    /// Sorted, scaled to coprime integers, sign fixed so that the sum is
    /// positive (or, for zero sum, so that the larger of the two sorted
    /// orientations compared from the top wins).
    pub fn canonical(&self) -> SpectralVector {
        let ints = primitive_integer(&self.0);
        let sum: i128 = ints.iter().sum();
        let mut plus = ints.clone();
        plus.sort_unstable();
        let mut minus: Vec<i128> = ints.iter().map(|x| -x).collect();
        minus.sort_unstable();
        // positive trace; zero trace breaks the tie on the largest entries
        let use_minus = sum < 0 || (sum == 0 && minus.iter().rev().cmp(plus.iter().rev()).is_gt());
        let pick = if use_minus { minus } else { plus };
        SpectralVector(pick.into_iter().map(rat).collect())
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonical()
    }

    /// Integer entries, if every entry is integral.
    pub fn as_integers(&self) -> Option<Vec<i128>> {
        self.0.iter().map(|x| x.is_integer().then(|| x.to_integer())).collect()
    }
}

impl fmt::Display for SpectralVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for SpectralVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.as_integers() {
            Some(ints) => ints.iter().map(|&x| x as i64).collect::<Vec<_>>().serialize(s),
            None => crate::io::ratio_vec::serialize(&self.0, s),
        }
    }
}

impl<'de> Deserialize<'de> for SpectralVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries = crate::io::ratio_vec::deserialize(d)?;
        SpectralVector::new(entries).map_err(serde::de::Error::custom)
    }
}

/// The root `f_i + f_j - f_k` with 1-based indices, `i < j`, `k ∉ {i, j}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RootTriple {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl RootTriple {
    /// Panics on an invalid triple; see [`RootTriple::checked`].
    pub fn new(i: usize, j: usize, k: usize) -> Self {
        Self::checked(i, j, k).expect("invalid root triple")
    }

    pub fn checked(i: usize, j: usize, k: usize) -> Option<Self> {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        (i >= 1 && i != j && k >= 1 && k != i && k != j).then_some(RootTriple { i, j, k })
    }

    pub fn vector(&self, n: usize) -> Vec<i128> {
        let mut v = vec![0; n];
        v[self.i - 1] += 1;
        v[self.j - 1] += 1;
        v[self.k - 1] -= 1;
        v
    }

    pub fn pairing(&self, p: &[Rational]) -> Rational {
        p[self.i - 1] + p[self.j - 1] - p[self.k - 1]
    }
}

impl fmt::Display for RootTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{}|{})", self.i, self.j, self.k)
    }
}

/// Linearly independent roots, read as the columns of an `n × m` matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootMatrix {
    n: usize,
    columns: Vec<RootTriple>,
}

impl RootMatrix {
    pub fn new(n: usize, columns: Vec<RootTriple>) -> Result<Self> {
        if let Some(bad) = columns.iter().find(|c| c.i.max(c.j).max(c.k) > n) {
            return Err(Error::IndexOutOfRange { index: bad.i.max(bad.j).max(bad.k), dim: n });
        }
        let rows: Vec<Vec<i128>> = columns.iter().map(|c| c.vector(n)).collect();
        let rank = rank_fraction_free(&rows);
        if rank < columns.len() {
            return Err(Error::RankDeficient { rank, columns: columns.len() });
        }
        Ok(RootMatrix { n, columns })
    }

    pub fn empty(n: usize) -> Self {
        RootMatrix { n, columns: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> &[RootTriple] {
        &self.columns
    }

    /// Row-major `n × m` integer matrix.
    pub fn matrix(&self) -> Vec<Vec<i128>> {
        let cols: Vec<Vec<i128>> = self.columns.iter().map(|c| c.vector(self.n)).collect();
        (0..self.n).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
    }
}

/// `F` for dimension `n`, ordered lexicographically by `(i, j, k)`.
pub fn build_root_set(n: usize) -> Result<Vec<RootTriple>> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { min: 2, found: n });
    }
    let mut out = Vec::with_capacity(n * (n - 1) / 2 * (n - 2));
    for i in 1..=n {
        for j in i + 1..=n {
            for k in (1..=n).filter(|&k| k != i && k != j) {
                out.push(RootTriple { i, j, k });
            }
        }
    }
    Ok(out)
}

/// Roots in `roots` orthogonal to `p`.
pub fn orthogonal_roots(p: &SpectralVector, roots: &[RootTriple]) -> Vec<RootTriple> {
    roots.iter().copied().filter(|r| r.pairing(p.entries()).is_zero()).collect()
}

/// A maximal linearly independent subset of `roots`, chosen greedily in the
/// given order.
pub fn maximal_independent_subset(n: usize, roots: &[RootTriple]) -> Vec<RootTriple> {
    let mut chosen: Vec<RootTriple> = Vec::new();
    let mut rows: Vec<Vec<i128>> = Vec::new();
    for r in roots {
        rows.push(r.vector(n));
        if rank_fraction_free(&rows) == rows.len() {
            chosen.push(*r);
        } else {
            rows.pop();
        }
    }
    chosen
}

/// A raw candidate from `1 - V (VᵗV)⁻¹ 1` together with its canonical form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    #[serde(with = "crate::io::ratio_vec")]
    pub raw: Vec<Rational>,
    pub canonical: SpectralVector,
}

pub fn candidate_spectral(v: &RootMatrix) -> Result<Candidate> {
    let raw = projected_ones(v.n, v.columns())?;
    let canonical = SpectralVector::new(raw.clone())?.canonical();
    Ok(Candidate { raw, canonical })
}

fn projected_ones(n: usize, columns: &[RootTriple]) -> Result<Vec<Rational>> {
    let m = columns.len();
    let cols: Vec<Vec<Rational>> = columns
        .iter()
        .map(|c| c.vector(n).into_iter().map(rat).collect())
        .collect();
    let gram: Vec<Vec<Rational>> =
        cols.iter().map(|a| cols.iter().map(|b| dot(a, b)).collect()).collect();
    let x = solve(&gram, &vec![Rational::one(); m]).ok_or_else(|| {
        let ints: Vec<Vec<i128>> = columns.iter().map(|c| c.vector(n)).collect();
        Error::RankDeficient { rank: rank_fraction_free(&ints), columns: m }
    })?;
    Ok((0..n)
        .map(|r| Rational::one() - cols.iter().zip(&x).map(|(c, xa)| c[r] * xa).sum::<Rational>())
        .collect())
}

/// Conditions that make `(p, V)` an admissible eigenvalue type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    /// `Vᵗ p = 0`.
    pub orthogonal: bool,
    /// No zero eigenvalue.
    pub nonzero_entries: bool,
    /// `Σ p_i ≠ 0`.
    pub nonzero_trace: bool,
    /// `span V = span(F ∩ p⊥)`.
    pub maximal: bool,
    /// Set when the projection formula applied to `V` yields the zero vector
    /// although `p ≠ 0`; pairing both sides with `p` would force `|p|² = 0`.
    pub norm_contradiction: bool,
}

impl ConsistencyReport {
    pub fn holds(&self) -> bool {
        self.orthogonal && self.nonzero_entries && self.nonzero_trace && self.maximal
    }
}

pub fn check_consistency(
    p: &SpectralVector,
    v: &RootMatrix,
    roots: &[RootTriple],
) -> Result<ConsistencyReport> {
    let n = p.len();
    if v.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: v.dim() });
    }
    if let Some(bad) = roots.iter().find(|r| r.i.max(r.j).max(r.k) > n) {
        return Err(Error::IndexOutOfRange { index: bad.i.max(bad.j).max(bad.k), dim: n });
    }
    let orthogonal = v.columns().iter().all(|c| c.pairing(p.entries()).is_zero());
    let nonzero_entries = p.entries().iter().all(|x| !x.is_zero());
    let nonzero_trace = !p.trace().is_zero();
    let mut combined: Vec<Vec<i128>> = orthogonal_roots(p, roots).iter().map(|r| r.vector(n)).collect();
    combined.extend(v.columns().iter().map(|c| c.vector(n)));
    let maximal = rank_fraction_free(&combined) == v.columns().len();
    let p_nonzero = p.entries().iter().any(|x| !x.is_zero());
    let norm_contradiction =
        p_nonzero && projected_ones(n, v.columns())?.iter().all(Zero::is_zero);
    Ok(ConsistencyReport { orthogonal, nonzero_entries, nonzero_trace, maximal, norm_contradiction })
}

#[derive(Clone, Copy, Debug)]
pub struct EnumerationOptions {
    pub cap: usize,
    pub cone_filter: bool,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions { cap: DEFAULT_DIMENSION_CAP, cone_filter: false }
    }
}

/// One admissible type together with a root matrix that produces it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnumeratedType {
    pub canonical: SpectralVector,
    /// The candidate in the coordinates of `roots` (unsorted, unscaled).
    #[serde(with = "crate::io::ratio_vec")]
    pub raw: Vec<Rational>,
    pub roots: RootMatrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeEnumeration {
    pub dim: usize,
    /// Types passing the rank/orthogonality/trace/maximality conditions.
    pub unfiltered: BTreeMap<SpectralVector, EnumeratedType>,
    /// The subset also passing the cone test, when the filter was requested.
    pub filtered: Option<BTreeSet<SpectralVector>>,
    /// Number of distinct flats visited.
    pub flats_visited: usize,
}

impl TypeEnumeration {
    /// The filtered set when the cone filter ran, otherwise the unfiltered one.
    pub fn types(&self) -> BTreeSet<SpectralVector> {
        match &self.filtered {
            Some(f) => f.clone(),
            None => self.unfiltered.keys().cloned().collect(),
        }
    }

    /// Types removed by the cone filter (empty if it did not run).
    pub fn discrepancy(&self) -> BTreeSet<SpectralVector> {
        match &self.filtered {
            Some(f) => self.unfiltered.keys().filter(|p| !f.contains(*p)).cloned().collect(),
            None => BTreeSet::new(),
        }
    }
}

pub fn enumerate_types(n: usize, options: EnumerationOptions) -> Result<TypeEnumeration> {
    let roots = build_root_set(n)?;
    enumerate_types_over(n, &roots, options)
}

/// Same as [`enumerate_types`] but over an explicitly ordered root list; the
/// resulting set does not depend on the order.
pub fn enumerate_types_over(
    n: usize,
    roots: &[RootTriple],
    options: EnumerationOptions,
) -> Result<TypeEnumeration> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { min: 2, found: n });
    }
    if n > options.cap {
        return Err(Error::DimensionCap { found: n, cap: options.cap });
    }
    let vectors: Vec<Vec<Rational>> =
        roots.iter().map(|r| r.vector(n).into_iter().map(rat).collect()).collect();
    let ones = vec![Rational::one(); n];

    let mut seen: HashSet<Vec<i128>> = HashSet::new();
    let mut level = vec![Flat { echelon: Vec::new(), members: Vec::new() }];
    seen.insert(Vec::new());
    let mut found: Vec<EnumeratedType> = Vec::new();
    let mut visited = 0;

    while !level.is_empty() {
        visited += level.len();
        let evaluated: Vec<Option<EnumeratedType>> =
            level.par_iter().map(|flat| evaluate_flat(n, roots, flat)).collect::<Result<_>>()?;
        found.extend(evaluated.into_iter().flatten());

        let children: Vec<Vec<(Vec<i128>, Flat)>> = level
            .par_iter()
            .map(|flat| flat.extensions(&vectors, &ones))
            .collect();
        let mut next = Vec::new();
        for (key, flat) in children.into_iter().flatten() {
            if seen.insert(key) {
                next.push(flat);
            }
        }
        level = next;
    }

    let mut unfiltered = BTreeMap::new();
    for t in found {
        unfiltered.entry(t.canonical.clone()).or_insert(t);
    }
    let filtered = if options.cone_filter {
        let mut keep = BTreeSet::new();
        for (p, t) in &unfiltered {
            let raw = SpectralVector::new(t.raw.clone())?;
            if cone_membership(&raw, roots)?.is_feasible() {
                keep.insert(p.clone());
            }
        }
        Some(keep)
    } else {
        None
    };
    Ok(TypeEnumeration { dim: n, unfiltered, filtered, flats_visited: visited })
}

struct Flat {
    echelon: Vec<Vec<Rational>>,
    members: Vec<usize>,
}

impl Flat {
    fn contains(&self, v: &[Rational]) -> bool {
        reduce(&self.echelon, v).iter().all(Zero::is_zero)
    }

    /// Flats one dimension up, keyed by their echelon form. Flats containing
    /// the all-ones vector are dropped: every flat above them projects the
    /// ones vector to zero.
    fn extensions(&self, vectors: &[Vec<Rational>], ones: &[Rational]) -> Vec<(Vec<i128>, Flat)> {
        let mut out = Vec::new();
        let mut local: HashSet<Vec<i128>> = HashSet::new();
        for (idx, v) in vectors.iter().enumerate() {
            if self.contains(v) {
                continue;
            }
            let mut rows = self.echelon.clone();
            rows.push(v.clone());
            let echelon = rref(&rows);
            let key = echelon_key(&echelon);
            if !local.insert(key.clone()) {
                continue;
            }
            let next = Flat { echelon, members: [self.members.as_slice(), &[idx]].concat() };
            if next.contains(ones) {
                continue;
            }
            out.push((key, next));
        }
        out
    }
}

fn reduce(echelon: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    let mut out = v.to_vec();
    for row in echelon {
        let Some(lead) = row.iter().position(|x| !x.is_zero()) else { continue };
        if out[lead].is_zero() {
            continue;
        }
        let factor = out[lead];
        for (o, r) in out.iter_mut().zip(row) {
            *o -= factor * r;
        }
    }
    out
}

fn echelon_key(echelon: &[Vec<Rational>]) -> Vec<i128> {
    echelon.iter().flat_map(|row| primitive_integer(row)).collect()
}

fn evaluate_flat(n: usize, roots: &[RootTriple], flat: &Flat) -> Result<Option<EnumeratedType>> {
    let columns: Vec<RootTriple> = flat.members.iter().map(|&i| roots[i]).collect();
    let raw = projected_ones(n, &columns)?;
    if raw.iter().any(Zero::is_zero) {
        return Ok(None);
    }
    let trace: Rational = raw.iter().sum();
    if trace.is_zero() {
        return Ok(None);
    }
    let p = SpectralVector::new(raw.clone())?;
    let closure: Vec<Vec<i128>> = orthogonal_roots(&p, roots).iter().map(|r| r.vector(n)).collect();
    if rank_fraction_free(&closure) != columns.len() {
        return Ok(None);
    }
    debug_assert!(trace.is_positive() || p.canonical().trace().is_positive());
    Ok(Some(EnumeratedType {
        canonical: p.canonical(),
        raw,
        roots: RootMatrix { n, columns },
    }))
}
