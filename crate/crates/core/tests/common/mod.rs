//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use dext::{ExtensionSpec, StructureTensor};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Bracket coefficients `c[a][b][c]` with `[E_a, E_b] = Σ_c c_{ab}^c E_c` in
/// an orthonormal frame.
pub type Brackets = Vec<Vec<Vec<f64>>>;

/// `Γ[a][b][c] = g(∇_{E_a} E_b, E_c)` from the Koszul formula.
fn christoffel(c: &Brackets) -> Brackets {
    let n = c.len();
    let mut g = vec![vec![vec![0.0; n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            for k in 0..n {
                g[a][b][k] = 0.5 * (c[a][b][k] - c[b][k][a] + c[k][a][b]);
            }
        }
    }
    g
}

/// Ricci tensor of an orthonormal frame whose bracket coefficients depend on
/// one coordinate `s` only, with `E_active = ∂_s` when `active` is set.
/// Derivatives of the connection are taken by central differences.
pub fn frame_ricci(brackets: &dyn Fn(f64) -> Brackets, s: f64, active: Option<usize>) -> DMatrix<f64> {
    let h = 1e-5;
    let c = brackets(s);
    let n = c.len();
    let gam = christoffel(&c);
    let dgam = match active {
        Some(_) => {
            let (p, m) = (christoffel(&brackets(s + h)), christoffel(&brackets(s - h)));
            let mut d = vec![vec![vec![0.0; n]; n]; n];
            for a in 0..n {
                for b in 0..n {
                    for k in 0..n {
                        d[a][b][k] = (p[a][b][k] - m[a][b][k]) / (2.0 * h);
                    }
                }
            }
            Some(d)
        }
        None => None,
    };
    // E_a applied to Γ_{bc}^d
    let deriv = |a: usize, b: usize, k: usize, d: usize| -> f64 {
        match (&dgam, active) {
            (Some(dg), Some(act)) if a == act => dg[b][k][d],
            _ => 0.0,
        }
    };
    // R(E_a, E_b) E_k, component along E_d
    let riem = |a: usize, b: usize, k: usize, d: usize| -> f64 {
        let mut r = deriv(a, b, k, d) - deriv(b, a, k, d);
        for e in 0..n {
            r += gam[b][k][e] * gam[a][e][d] - gam[a][k][e] * gam[b][e][d];
            r -= (c[a][b][e]) * gam[e][k][d];
        }
        r
    };
    DMatrix::from_fn(n, n, |y, z| (0..n).map(|a| riem(a, y, z, a)).sum())
}

pub fn tensor_brackets(mu: &StructureTensor) -> Brackets {
    let n = mu.dim();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| mu.get(i, j, k)).collect()).collect())
        .collect()
}

/// Ricci tensor of the left-invariant metric with orthonormal basis `e_i`.
pub fn koszul_ricci(mu: &StructureTensor) -> DMatrix<f64> {
    let c = tensor_brackets(mu);
    frame_ricci(&move |_| c.clone(), 0.0, None)
}

/// Ricci tensor of `du² + (e^{uD})* g` in the frame `∂_u, e^{-u p_i} e_i`.
pub fn extension_ricci_fd(spec: &ExtensionSpec, u: f64, t: f64) -> DMatrix<f64> {
    let n = spec.dim();
    let p: Vec<f64> = spec.spectral.iter().map(|a| a.eval(t)).collect();
    let mu = tensor_brackets(&spec.algebra);
    let brackets = move |s: f64| -> Brackets {
        let mut c = vec![vec![vec![0.0; n + 1]; n + 1]; n + 1];
        for i in 0..n {
            c[0][i + 1][i + 1] = -p[i];
            c[i + 1][0][i + 1] = p[i];
            for j in 0..n {
                for k in 0..n {
                    c[i + 1][j + 1][k + 1] = (-s * (p[i] + p[j] - p[k])).exp() * mu[i][j][k];
                }
            }
        }
        c
    };
    frame_ricci(&brackets, u, Some(0))
}

fn sparse_value(rng: &mut ChaCha8Rng, density: f64) -> f64 {
    if rng.gen_bool(density) {
        (rng.gen_range(-4..=4) as f64) * 0.5 + rng.gen_range(-0.25..0.25)
    } else {
        0.0
    }
}

/// `R ⋉_A R^{n-1}`: `[e_1, e_j] = Σ_k A_{kj} e_k` for `j, k ≥ 2`.
pub fn random_semidirect(rng: &mut ChaCha8Rng, n: usize) -> StructureTensor {
    let mut mu = StructureTensor::zero(n);
    for j in 1..n {
        for k in 1..n {
            mu.set(0, j, k, sparse_value(rng, 0.6)).unwrap();
        }
    }
    mu
}

/// Two-step nilpotent: brackets of the first `n - c` vectors land in the last `c`.
pub fn random_two_step(rng: &mut ChaCha8Rng, n: usize) -> StructureTensor {
    let c = rng.gen_range(1..=n.saturating_sub(2).max(1));
    let mut mu = StructureTensor::zero(n);
    for i in 0..n - c {
        for j in i + 1..n - c {
            for k in n - c..n {
                mu.set(i, j, k, sparse_value(rng, 0.6)).unwrap();
            }
        }
    }
    mu
}

pub fn random_lie(rng: &mut ChaCha8Rng, n: usize) -> StructureTensor {
    if rng.gen_bool(0.5) {
        random_semidirect(rng, n)
    } else {
        random_two_step(rng, n)
    }
}

/// Arbitrary sparse tensor, Jacobi not enforced.
pub fn random_tensor(rng: &mut ChaCha8Rng, n: usize) -> StructureTensor {
    let mut mu = StructureTensor::zero(n);
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                mu.set(i, j, k, sparse_value(rng, 0.3)).unwrap();
            }
        }
    }
    mu
}

pub fn random_spectral(rng: &mut ChaCha8Rng, n: usize) -> Vec<i128> {
    (0..n).map(|_| rng.gen_range(-1..=2)).collect()
}
