//! Multistart Levenberg-Marquardt search for structure constants whose
//! extension by a given `D` is Einstein.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{divergence_residual, jacobi_components, ExtensionSpec, StructureTensor, TensorKind};
use crate::curvature::ricci_deformation;
use crate::error::Result;
use crate::exact::{frac, Affine};
use crate::spectral::SpectralVector;
use crate::verifier::{einstein_target, sparsity_pattern};

pub const DEFAULT_JACOBI_WEIGHT: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternChoice {
    /// Triples allowed by the eigenvalue relations.
    Auto,
    /// Every triple `(i < j, k)`.
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchProblem {
    pub spectral: SpectralVector,
    /// 0-based `(i, j, k)` with `i < j`.
    pub pattern: Vec<(usize, usize, usize)>,
    /// Initial points are drawn uniformly from `[-bound, bound]`.
    pub bound: f64,
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub jacobi_weight: f64,
}

impl SearchProblem {
    pub fn new(spectral: SpectralVector) -> Self {
        let pattern = sparsity_pattern(&spectral).into_iter().collect();
        SearchProblem {
            spectral,
            pattern,
            bound: 3.0,
            restarts: 8,
            seed: 0,
            max_iterations: 200,
            tolerance: 1e-10,
            jacobi_weight: DEFAULT_JACOBI_WEIGHT,
        }
    }

    pub fn with_pattern(mut self, choice: PatternChoice) -> Self {
        let n = self.spectral.len();
        self.pattern = match choice {
            PatternChoice::Auto => sparsity_pattern(&self.spectral).into_iter().collect(),
            PatternChoice::Full => {
                let mut all = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        for k in 0..n {
                            all.push((i, j, k));
                        }
                    }
                }
                all
            }
        };
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.spectral.len();
        if self.restarts == 0 {
            return Err(crate::error::Error::Parse("restarts must be at least 1".into()));
        }
        if let Some(&(i, j, k)) = self.pattern.iter().find(|(i, j, k)| i >= j || *j >= n || *k >= n) {
            return Err(crate::error::Error::Parse(format!(
                "pattern entry ({},{}|{}) is not a valid triple for dimension {n}",
                i + 1,
                j + 1,
                k + 1
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub best_mu: StructureTensor,
    pub residual: f64,
    pub converged: bool,
    pub trace: Vec<RestartSummary>,
}

/// Every exponent that the grouped Ricci expansion can produce for `p`.
fn exponent_layout(p: &[Affine]) -> Vec<Affine> {
    let half = |a: Affine| a.scale(frac(1, 2));
    let n = p.len();
    let mut set = BTreeSet::new();
    set.insert(Affine::default());
    for i in 0..n {
        for j in i..n {
            let mid = half(p[i] + p[j]);
            set.insert(mid);
            for l in 0..n {
                set.insert(p[l] + half(p[j] - p[i]));
                set.insert(p[l] - half(p[j] - p[i]));
                for k in 0..n {
                    set.insert(p[k] + p[l] - mid);
                    set.insert(mid + p[k] - p[l]);
                }
            }
        }
    }
    set.into_iter().collect()
}

struct Layout {
    spec: ExtensionSpec,
    exponents: Vec<Affine>,
    target: DMatrix<f64>,
}

impl Layout {
    fn new(p: &SpectralVector) -> Result<Self> {
        let spec = ExtensionSpec::from_spectral(StructureTensor::zero(p.len()), p)?
            .with_kind(TensorKind::Frame);
        let exponents = exponent_layout(&spec.spectral);
        let target = einstein_target(&spec)?;
        Ok(Layout { spec, exponents, target })
    }

    fn residuals(&self, mu: &StructureTensor, jacobi_weight: f64) -> Result<Vec<f64>> {
        let n = mu.dim();
        let mut spec = self.spec.clone();
        spec.algebra = mu.clone();
        let grouped = ricci_deformation(&spec)?;
        debug_assert!(grouped.classes().keys().all(|q| self.exponents.binary_search(q).is_ok()));
        let zero = DMatrix::zeros(n, n);
        let mut out = Vec::new();
        for q in &self.exponents {
            let c = grouped.classes().get(q).unwrap_or(&zero);
            for i in 0..n {
                for j in i..n {
                    let target = if q.is_zero() { self.target[(i, j)] } else { 0.0 };
                    out.push(c[(i, j)] - target);
                }
            }
        }
        out.extend(divergence_residual(&spec)?);
        out.extend(jacobi_components(mu).into_iter().map(|x| jacobi_weight * x));
        Ok(out)
    }
}

/// Deviation vector whose vanishing is equivalent to the Einstein
/// conditions plus the Jacobi identity: grouped Ricci deviations per
/// exponent class (upper triangles, classes in increasing order), then
/// divergence components, then Jacobi components times `jacobi_weight`.
pub fn residual_vector(mu: &StructureTensor, p: &SpectralVector, jacobi_weight: f64) -> Result<Vec<f64>> {
    Layout::new(p)?.residuals(mu, jacobi_weight)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Objective<'a> {
    layout: &'a Layout,
    pattern: &'a [(usize, usize, usize)],
    weight: f64,
    n: usize,
}

impl Objective<'_> {
    fn tensor(&self, x: &[f64]) -> StructureTensor {
        let mut mu = StructureTensor::zero(self.n);
        for (&(i, j, k), &v) in self.pattern.iter().zip(x) {
            mu.set(i, j, k, v).expect("pattern validated");
        }
        mu
    }

    fn residuals(&self, x: &[f64]) -> Vec<f64> {
        self.layout.residuals(&self.tensor(x), self.weight).expect("layout validated")
    }

    /// Central-difference Jacobian with step `1e-6 * max(1, |x_i|)`.
    fn jacobian(&self, x: &[f64], m: usize) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(m, x.len());
        let mut probe = x.to_vec();
        for c in 0..x.len() {
            let h = 1e-6 * x[c].abs().max(1.0);
            probe[c] = x[c] + h;
            let plus = self.residuals(&probe);
            probe[c] = x[c] - h;
            let minus = self.residuals(&probe);
            probe[c] = x[c];
            for r in 0..m {
                jac[(r, c)] = (plus[r] - minus[r]) / (2.0 * h);
            }
        }
        jac
    }
}

/// Gradient of `½|r|²` via the finite-difference Jacobian.
pub fn objective_gradient(problem: &SearchProblem, x: &[f64]) -> Result<Vec<f64>> {
    problem.validate()?;
    let layout = Layout::new(&problem.spectral)?;
    let obj = Objective { layout: &layout, pattern: &problem.pattern, weight: problem.jacobi_weight, n: problem.spectral.len() };
    let r = obj.residuals(x);
    let jac = obj.jacobian(x, r.len());
    Ok((jac.transpose() * DVector::from_vec(r)).iter().copied().collect())
}

/// `½|r|²` at the pattern values `x`.
pub fn objective(problem: &SearchProblem, x: &[f64]) -> Result<f64> {
    problem.validate()?;
    let layout = Layout::new(&problem.spectral)?;
    let obj = Objective { layout: &layout, pattern: &problem.pattern, weight: problem.jacobi_weight, n: problem.spectral.len() };
    let r = obj.residuals(x);
    Ok(0.5 * r.iter().map(|v| v * v).sum::<f64>())
}

struct Run {
    x: Vec<f64>,
    residual: f64,
    summary: RestartSummary,
}

fn levenberg_marquardt(obj: &Objective, start: Vec<f64>, max_iter: usize, tol: f64, restart: usize) -> Run {
    let mut x = start;
    let mut r = obj.residuals(&x);
    let initial = norm(&r);
    let mut current = initial;
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < max_iter && current > tol * 1e-3 {
        iterations += 1;
        let jac = obj.jacobian(&x, r.len());
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for d in 0..a.nrows() {
                a[(d, d)] += lambda * (1.0 + jtj[(d, d)]);
            }
            let step = match a.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => match a.lu().solve(&(-&g)) {
                    Some(s) => s,
                    None => {
                        lambda *= 10.0;
                        continue;
                    }
                },
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let r_trial = obj.residuals(&trial);
            let n_trial = norm(&r_trial);
            if n_trial < current {
                x = trial;
                r = r_trial;
                current = n_trial;
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Run {
        x,
        residual: current,
        summary: RestartSummary {
            restart,
            initial_residual: initial,
            final_residual: current,
            iterations,
            converged: current <= tol,
        },
    }
}

/// Orders runs: converged before not converged; among converged, smaller
/// `|μ|` then lexicographic; otherwise smaller residual.
fn better(a: &Run, b: &Run, tol: f64) -> Ordering {
    let ca = a.residual <= tol;
    let cb = b.residual <= tol;
    match (ca, cb) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (true, true) => norm(&a.x)
            .total_cmp(&norm(&b.x))
            .then_with(|| lex(&a.x, &b.x))
            .then(a.summary.restart.cmp(&b.summary.restart)),
        (false, false) => a
            .residual
            .total_cmp(&b.residual)
            .then(a.summary.restart.cmp(&b.summary.restart)),
    }
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

pub fn search(problem: &SearchProblem) -> Result<SearchResult> {
    problem.validate()?;
    let n = problem.spectral.len();
    let layout = Layout::new(&problem.spectral)?;
    let obj = Objective { layout: &layout, pattern: &problem.pattern, weight: problem.jacobi_weight, n };
    if problem.pattern.is_empty() {
        let residual = norm(&obj.residuals(&[]));
        let converged = residual <= problem.tolerance;
        return Ok(SearchResult {
            best_mu: StructureTensor::zero(n),
            residual,
            converged,
            trace: vec![RestartSummary {
                restart: 0,
                initial_residual: residual,
                final_residual: residual,
                iterations: 0,
                converged,
            }],
        });
    }
    let runs: Vec<Run> = (0..problem.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(problem.seed);
            rng.set_stream(restart as u64);
            let start: Vec<f64> =
                problem.pattern.iter().map(|_| rng.gen_range(-problem.bound..=problem.bound)).collect();
            levenberg_marquardt(&obj, start, problem.max_iterations, problem.tolerance, restart)
        })
        .collect();
    let best = runs
        .iter()
        .min_by(|a, b| better(a, b, problem.tolerance))
        .expect("at least one restart");
    let best_mu = obj.tensor(&best.x);
    let residual = norm(&layout.residuals(&best_mu, problem.jacobi_weight)?);
    Ok(SearchResult {
        best_mu,
        residual,
        converged: residual <= problem.tolerance,
        trace: runs.iter().map(|r| r.summary.clone()).collect(),
    })
}
