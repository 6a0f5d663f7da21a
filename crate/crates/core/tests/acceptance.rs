//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always appear in the output.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use dext::algebra::{is_derivation, TensorKind};
use dext::catalog::{self, counterexample_p6, diagnose, heisenberg, table1};
use dext::curvature::{extension_ricci, ricci_at, ricci_deformation};
use dext::solver::{search, SearchProblem};
use dext::spectral::{build_root_set, check_consistency, cone_membership, cone_target};
use dext::spectral::{enumerate_types, maximal_independent_subset, orthogonal_roots, EnumerationOptions};
use dext::verifier::{classify_type_1112, relation_exists_affine, sparsity_violation, verify_extension};
use dext::{Affine, ExtensionSpec, RootMatrix, SpectralVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Residual bound for criteria 4–6, 8 and 9.
const RESIDUAL_TOL: f64 = 1e-10;
/// Tolerance handed to the verifier in criteria 4–6.
const VERIFY_TOL: f64 = 1e-10;
/// Solver criteria.
const SOLVER_RESIDUAL: f64 = 1e-8;
const SOLVER_MU_TOL: f64 = 1e-6;
const SOLVER_SEED: u64 = 42;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, format!("took {elapsed:?}, limit {limit:?}"))
}

fn types(v: &[&[i128]]) -> BTreeSet<SpectralVector> {
    v.iter().map(|p| SpectralVector::from_ints(p).unwrap()).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let e = enumerate_types(3, EnumerationOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let expected = types(&[&[1, 1, 1], &[1, 1, 2]]);
    ensure(e.types() == expected, format!("got {:?}", e.types()))?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("{{(1,1,1),(1,1,2)}} in {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let opts = EnumerationOptions { cone_filter: true, ..EnumerationOptions::default() };
    let e = enumerate_types(4, opts).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let expected = types(&[
        &[1, 1, 1, 1],
        &[1, 1, 1, 2],
        &[1, 1, 2, 2],
        &[1, 1, 2, 3],
        &[1, 2, 3, 4],
        &[2, 2, 3, 4],
        &[3, 4, 4, 7],
        &[-1, 1, 1, 2],
        &[-1, 1, 2, 3],
    ]);
    let unfiltered: BTreeSet<_> = e.unfiltered.keys().cloned().collect();
    ensure(unfiltered == expected, format!("got {unfiltered:?}"))?;
    let removed = e.discrepancy();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("9 types in {elapsed:?}; cone filter removed {}", removed.len()))
}

fn criterion_3() -> Outcome {
    let p = counterexample_p6();
    let n = p.len();
    let roots = build_root_set(n).map_err(|e| e.to_string())?;
    let cert = cone_membership(&p, &roots).map_err(|e| e.to_string())?;
    let orth = orthogonal_roots(&p, &roots);
    ensure(cert.is_feasible(), "cone test infeasible")?;
    ensure(cert.verify(n, &orth, &cone_target(&p)), "certificate does not verify")?;
    let v = RootMatrix::new(n, maximal_independent_subset(n, &orth)).map_err(|e| e.to_string())?;
    let report = check_consistency(&p, &v, &roots).map_err(|e| e.to_string())?;
    ensure(!report.holds(), "consistency unexpectedly holds")?;
    ensure(!report.nonzero_trace, "trace is not zero")?;
    ensure(report.norm_contradiction, "no norm contradiction reported")?;
    let d = diagnose(&p).map_err(|e| e.to_string())?;
    ensure(d.cone_verified && !d.consistent && d.trace_zero, "diagnostic disagrees")?;
    Ok(format!("cone feasible with {} roots; Tr = 0 forces |p|^2 = 0", orth.len()))
}

fn check_pass(spec: &ExtensionSpec, constant: f64, label: &str) -> Result<f64, String> {
    let r = verify_extension(spec, VERIFY_TOL).map_err(|e| format!("{label}: {e}"))?;
    ensure(r.einstein, format!("{label}: not Einstein, {:?}", r.violated_conditions))?;
    let c = r.einstein_constant.ok_or(format!("{label}: no constant"))?;
    ensure((c - constant).abs() <= RESIDUAL_TOL, format!("{label}: constant {c}, expected {constant}"))?;
    let res = r.max_residual();
    ensure(res <= RESIDUAL_TOL, format!("{label}: residual {res:e}"))?;
    Ok(res)
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for (row, c) in [(1, 0.0), (2, -3.0), (3, -6.0)] {
        let e = table1(row, None).map_err(|e| e.to_string())?;
        worst = worst.max(check_pass(&e.spec, c, &e.name)?);
    }
    for t in [0.0, 0.5, 1.0, 2.0] {
        let e = table1(4, Some(t)).map_err(|e| e.to_string())?;
        worst = worst.max(check_pass(&e.spec, -(1.0 + t * t), &format!("row 4, t={t}"))?);
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("7 specs, max residual {worst:.1e}, {elapsed:?}"))
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0_f64;
    for k in 1..=4 {
        let e = heisenberg(k).map_err(|e| e.to_string())?;
        worst = worst.max(check_pass(&e.spec, -(2.0 * k as f64 + 4.0), &e.name)?);
        let c = classify_type_1112(&e.spec, VERIFY_TOL).map_err(|e| e.to_string())?;
        ensure(c.passed, format!("{}: classifier failed: {}", e.name, c.verdict))?;
    }
    Ok(format!("k = 1..4, max residual {worst:.1e}"))
}

fn criterion_6() -> Outcome {
    let e = catalog::e2();
    let res = check_pass(&e.spec, -3.0, "e2")?;
    let d = is_derivation(&e.spec, RESIDUAL_TOL).map_err(|e| e.to_string())?;
    ensure(!d.is_derivation, "D = id reported as a derivation of e(2)")?;
    Ok(format!("Einstein -3 with residual {res:.1e}; derivation violation {:.1}", d.max_violation))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut problem = SearchProblem::new(SpectralVector::from_ints(&[1, 1, 2]).unwrap());
    problem.restarts = 8;
    problem.seed = SOLVER_SEED;
    let r = search(&problem).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(r.converged, format!("did not converge, residual {:e}", r.residual))?;
    ensure(r.residual < SOLVER_RESIDUAL, format!("residual {:e}", r.residual))?;
    let m = r.best_mu.get(0, 1, 2).abs();
    ensure((m - 2.0).abs() <= SOLVER_MU_TOL, format!("|mu_12|3| = {m}"))?;
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("residual {:.1e}, |mu_12|3| = {m:.9}, {elapsed:?}", r.residual))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut grouped_dev = 0.0_f64;
    let mut koszul_dev = 0.0_f64;
    for case in 0..100 {
        let n = rng.gen_range(2..=5);
        let p = random_spectral(&mut rng, n);
        let affine: Vec<Affine> = p.iter().map(|&x| Affine::int(x)).collect();
        let mu = random_tensor(&mut rng, n);
        let spec = ExtensionSpec::new(mu, affine.clone()).unwrap().with_kind(TensorKind::Frame);
        let grouped = ricci_deformation(&spec).map_err(|e| e.to_string())?;
        for u in [-0.5, -0.25, 0.0, 0.3, 0.5] {
            let d = (grouped.eval(u, 0.0) - ricci_at(&spec, u).map_err(|e| e.to_string())?).amax();
            grouped_dev = grouped_dev.max(d);
        }
        if n <= 4 {
            let lie = random_lie(&mut rng, n);
            let spec = ExtensionSpec::new(lie.clone(), affine).unwrap();
            let g0 = ricci_deformation(&spec).map_err(|e| e.to_string())?.eval(0.0, 0.0);
            let d = (g0 - koszul_ricci(&lie)).amax();
            koszul_dev = koszul_dev.max(d);
            ensure(d <= RESIDUAL_TOL, format!("case {case}: Koszul deviation {d:e}"))?;
        }
    }
    ensure(grouped_dev <= RESIDUAL_TOL, format!("grouped vs direct {grouped_dev:e}"))?;
    Ok(format!("grouped vs direct {grouped_dev:.1e}, vs Koszul {koszul_dev:.1e}"))
}

fn invariant_properties(spec: &ExtensionSpec, label: &str) -> Result<f64, String> {
    let p = &spec.spectral;
    let scalar = p.iter().all(|x| *x == p[0]);
    if !scalar {
        ensure(relation_exists_affine(p).is_some(), format!("{label}: no p_k = p_i + p_j"))?;
    }
    let off = sparsity_violation(spec);
    ensure(off <= RESIDUAL_TOL, format!("{label}: entry {off:e} outside the sparsity pattern"))?;
    let ext = extension_ricci(spec).map_err(|e| e.to_string())?;
    let (_, tr2) = spec.traces().map_err(|e| e.to_string())?;
    ensure((ext.ric_00 + tr2).abs() <= RESIDUAL_TOL, format!("{label}: ric_00 = {}", ext.ric_00))?;
    let t = spec.param.unwrap_or(0.0);
    let dev = ext.einstein_deviation(&dext::verifier::U_GRID, t);
    ensure(dev <= RESIDUAL_TOL, format!("{label}: extension Ricci deviates by {dev:e}"))?;
    Ok(dev)
}

fn criterion_9() -> Outcome {
    let mut count = 0;
    let mut worst = 0.0_f64;
    let mut specs: Vec<(String, ExtensionSpec)> =
        catalog::entries().into_iter().map(|e| (e.name, e.spec)).collect();
    specs.push(("table1:4:sqrt2".into(), table1(4, Some(2f64.sqrt())).unwrap().spec));
    for p in [&[1, 1, 2][..], &[0, 0, 1], &[1, 1, 1, 2], &[1, 1, 1]] {
        let sv = SpectralVector::from_ints(p).unwrap();
        let mut problem = SearchProblem::new(sv.clone());
        problem.seed = 7;
        let r = search(&problem).map_err(|e| e.to_string())?;
        if r.converged {
            let spec = ExtensionSpec::from_spectral(r.best_mu, &sv).map_err(|e| e.to_string())?;
            specs.push((format!("search {p:?}"), spec));
        }
    }
    for (label, spec) in &specs {
        let r = verify_extension(spec, VERIFY_TOL).map_err(|e| format!("{label}: {e}"))?;
        if !r.einstein {
            continue;
        }
        worst = worst.max(invariant_properties(spec, label)?);
        count += 1;
    }
    ensure(count >= 15, format!("only {count} passing specs checked"))?;
    Ok(format!("{count} passing specs, extension Ricci deviation {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("eigenvalue types, n = 3", criterion_1),
        ("eigenvalue types, n = 4", criterion_2),
        ("zero-trace cone diagnostic", criterion_3),
        ("three-dimensional catalog", criterion_4),
        ("Heisenberg family", criterion_5),
        ("non-derivation Einstein fixture", criterion_6),
        ("solver recovery", criterion_7),
        ("oracle equivalence", criterion_8),
        ("invariant properties", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
