//! Exact cone-membership test for the projected all-ones vector.
//!
//! Deciding whether `b` is a nonnegative combination of a set of columns is a
//! linear feasibility problem; it is solved with a dense two-phase simplex
//! over the rationals using Bland's rule, so there is no tolerance anywhere.
//! Infeasible instances come back with a Farkas vector `z` satisfying
//! `z·a >= 0` for every column and `z·b < 0`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{RootTriple, SpectralVector};
use crate::error::{Error, Result};
use crate::exact::{dot, Rational};

/// `minimize c·x  subject to  A x = b, x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub a: Vec<Vec<Rational>>,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible { farkas: Vec<Rational> },
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    // row index in the original problem, after redundant rows are dropped
    origin: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for x in self.rows[row].iter_mut() {
            *x *= inv;
        }
        self.rhs[row] *= inv;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row];
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let factor = self.rows[r][col];
            for (x, p) in self.rows[r].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= factor * p;
                }
            }
            self.rhs[r] -= factor * pivot_rhs;
        }
        self.basis[row] = col;
    }

    fn reduced_costs(&self, cost: &[Rational]) -> (Vec<Rational>, Rational) {
        let width = self.rows.first().map_or(cost.len(), Vec::len);
        let mut d: Vec<Rational> = cost.to_vec();
        d.resize(width, Rational::zero());
        let mut value = Rational::zero();
        for (r, &bv) in self.basis.iter().enumerate() {
            let cb = cost.get(bv).copied().unwrap_or_default();
            if cb.is_zero() {
                continue;
            }
            for (dj, a) in d.iter_mut().zip(&self.rows[r]) {
                *dj -= cb * a;
            }
            value += cb * self.rhs[r];
        }
        (d, value)
    }

    /// Runs primal simplex with Bland's rule over columns `< allowed`.
    /// Returns `false` if the objective is unbounded below.
    fn optimize(&mut self, cost: &[Rational], allowed: usize) -> bool {
        loop {
            let (d, _) = self.reduced_costs(cost);
            let Some(col) = (0..allowed).find(|&j| d[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs[r] / a;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

impl LinearProgram {
    pub fn solve(&self) -> LpOutcome {
        let m = self.b.len();
        let n = self.c.len();
        // Phase 1: rows sign-normalised so that b >= 0, one artificial per row.
        let signs: Vec<Rational> = self
            .b
            .iter()
            .map(|b| if b.is_negative() { -Rational::one() } else { Rational::one() })
            .collect();
        let mut rows = Vec::with_capacity(m);
        for r in 0..m {
            let mut row: Vec<Rational> = self.a[r].iter().map(|x| x * signs[r]).collect();
            row.extend((0..m).map(|k| if k == r { Rational::one() } else { Rational::zero() }));
            rows.push(row);
        }
        let mut t = Tableau {
            rows,
            rhs: self.b.iter().zip(&signs).map(|(b, s)| b * s).collect(),
            basis: (n..n + m).collect(),
            origin: (0..m).collect(),
        };
        let mut phase1 = vec![Rational::zero(); n];
        phase1.extend(std::iter::repeat_n(Rational::one(), m));
        t.optimize(&phase1, n + m);
        let (d, w) = t.reduced_costs(&phase1);
        if w.is_positive() {
            // y_i = 1 - d(artificial_i); the Farkas vector is -S y.
            let farkas = (0..m).map(|i| -(Rational::one() - d[n + i]) * signs[i]).collect();
            return LpOutcome::Infeasible { farkas };
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= n {
                match (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                    Some(col) => t.pivot(r, col),
                    None => {
                        t.rows.remove(r);
                        t.rhs.remove(r);
                        t.basis.remove(r);
                        t.origin.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        if !t.optimize(&self.c, n) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); n];
        for (row, &bv) in t.basis.iter().enumerate() {
            if bv < n {
                x[bv] = t.rhs[row];
            }
        }
        let value = dot(&self.c, &x);
        LpOutcome::Optimal { x, value }
    }
}

/// Outcome of the cone test: either nonnegative coefficients on the roots
/// orthogonal to `p`, or a separating vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConeCertificate {
    Feasible {
        #[serde(with = "crate::io::root_coefficients")]
        coefficients: Vec<(RootTriple, Rational)>,
    },
    Infeasible {
        #[serde(with = "crate::io::ratio_vec")]
        separating: Vec<Rational>,
    },
}

impl ConeCertificate {
    pub fn is_feasible(&self) -> bool {
        matches!(self, ConeCertificate::Feasible { .. })
    }

    /// Re-checks the certificate against `target` and the candidate roots
    /// in exact arithmetic.
    pub fn verify(&self, n: usize, roots: &[RootTriple], target: &[Rational]) -> bool {
        match self {
            ConeCertificate::Feasible { coefficients } => {
                let mut sum = vec![Rational::zero(); n];
                for (root, c) in coefficients {
                    if c.is_negative() || !roots.contains(root) {
                        return false;
                    }
                    for (s, v) in sum.iter_mut().zip(root.vector(n)) {
                        *s += c * Rational::from_integer(v);
                    }
                }
                sum == target
            }
            ConeCertificate::Infeasible { separating } => {
                roots.iter().all(|root| {
                    let v: Vec<Rational> =
                        root.vector(n).into_iter().map(Rational::from_integer).collect();
                    !dot(separating, &v).is_negative()
                }) && dot(separating, target).is_negative()
            }
        }
    }
}

/// Right-hand side of the cone condition: `|p|^2 1 - <p, 1> p`.
pub fn cone_target(p: &SpectralVector) -> Vec<Rational> {
    let norm = p.norm_sq();
    let trace = p.trace();
    p.entries().iter().map(|x| norm - trace * x).collect()
}

/// Decides exactly whether `|p|^2 1 - <p,1> p` lies in the convex cone spanned
/// by the roots in `roots` that are orthogonal to `p`.
pub fn cone_membership(p: &SpectralVector, roots: &[RootTriple]) -> Result<ConeCertificate> {
    if let Some(index) = p.entries().iter().position(Zero::is_zero) {
        return Err(Error::ZeroEntry { index });
    }
    let n = p.len();
    let orthogonal = super::orthogonal_roots(p, roots);
    let target = cone_target(p);
    let certificate = if orthogonal.is_empty() {
        if target.iter().all(Zero::is_zero) {
            ConeCertificate::Feasible { coefficients: Vec::new() }
        } else {
            ConeCertificate::Infeasible { separating: target.iter().map(|x| -x).collect() }
        }
    } else {
        let vectors: Vec<Vec<i128>> = orthogonal.iter().map(|r| r.vector(n)).collect();
        let a: Vec<Vec<Rational>> = (0..n)
            .map(|row| vectors.iter().map(|v| Rational::from_integer(v[row])).collect())
            .collect();
        let lp = LinearProgram {
            a,
            b: target.clone(),
            c: vec![Rational::zero(); orthogonal.len()],
        };
        match lp.solve() {
            LpOutcome::Optimal { x, .. } => ConeCertificate::Feasible {
                coefficients: orthogonal
                    .iter()
                    .zip(x)
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(r, c)| (*r, c))
                    .collect(),
            },
            LpOutcome::Infeasible { farkas } => ConeCertificate::Infeasible { separating: farkas },
            LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
        }
    };
    debug_assert!(certificate.verify(n, &orthogonal, &target));
    Ok(certificate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{frac, rat};
    use crate::spectral::build_root_set;

    fn rv(v: &[i128]) -> Vec<Rational> {
        v.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn simplex_finds_known_optimum() {
        // min -x1 - 2x2  s.t. x1 + x2 + s1 = 4, x1 + 3x2 + s2 = 6
        let lp = LinearProgram {
            a: vec![rv(&[1, 1, 1, 0]), rv(&[1, 3, 0, 1])],
            b: rv(&[4, 6]),
            c: rv(&[-1, -2, 0, 0]),
        };
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, rat(-5));
                assert_eq!(&x[..2], &[rat(3), rat(1)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn simplex_reports_farkas_vector() {
        // x1 - x2 = -1 and x1 + x2 = -1 has no nonnegative solution.
        let lp = LinearProgram {
            a: vec![rv(&[1, -1]), rv(&[1, 1])],
            b: rv(&[-1, -1]),
            c: rv(&[0, 0]),
        };
        let LpOutcome::Infeasible { farkas } = lp.solve() else { panic!() };
        for col in 0..2 {
            let a_col: Vec<Rational> = lp.a.iter().map(|row| row[col]).collect();
            assert!(!dot(&farkas, &a_col).is_negative());
        }
        assert!(dot(&farkas, &lp.b).is_negative());
    }

    #[test]
    fn simplex_handles_redundant_rows_and_unboundedness() {
        let lp = LinearProgram {
            a: vec![rv(&[1, 1]), rv(&[2, 2])],
            b: rv(&[1, 2]),
            c: rv(&[1, 0]),
        };
        assert_eq!(
            lp.solve(),
            LpOutcome::Optimal { x: rv(&[0, 1]), value: rat(0) }
        );
        let lp = LinearProgram { a: vec![rv(&[1, -1])], b: rv(&[1]), c: rv(&[0, -1]) };
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn type_112_has_single_root_certificate() {
        let p = SpectralVector::from_ints(&[1, 1, 2]).unwrap();
        let cert = cone_membership(&p, &build_root_set(3).unwrap()).unwrap();
        assert_eq!(cone_target(&p), rv(&[2, 2, -2]));
        match cert {
            ConeCertificate::Feasible { coefficients } => {
                assert_eq!(coefficients, vec![(RootTriple::new(1, 2, 3), rat(2))]);
            }
            _ => panic!("expected feasible"),
        }
    }

    #[test]
    fn scalar_type_is_trivially_feasible() {
        let p = SpectralVector::from_ints(&[1, 1, 1]).unwrap();
        let cert = cone_membership(&p, &build_root_set(3).unwrap()).unwrap();
        assert_eq!(cert, ConeCertificate::Feasible { coefficients: vec![] });
    }

    #[test]
    fn infeasible_type_gets_separating_vector() {
        // (1,2) in dimension 2: no roots at all and a nonzero target.
        let p = SpectralVector::new(vec![rat(1), frac(2, 1)]).unwrap();
        let roots = build_root_set(2).unwrap();
        let cert = cone_membership(&p, &roots).unwrap();
        assert!(!cert.is_feasible());
        assert!(cert.verify(2, &[], &cone_target(&p)));
    }

    #[test]
    fn zero_entry_is_rejected() {
        let p = SpectralVector::from_ints(&[0, 1, 1]).unwrap();
        assert!(matches!(
            cone_membership(&p, &build_root_set(3).unwrap()),
            Err(Error::ZeroEntry { index: 0 })
        ));
    }
}
