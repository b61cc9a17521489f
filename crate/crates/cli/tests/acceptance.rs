//! The twelve acceptance criteria, each at its stated tolerance.
//!
//! Runs without the test harness so every criterion prints exactly one
//! `PASS`/`FAIL` line; the process exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use orlicz_core::embedding::{
    decompose, enumerate_truncated_k, enumeration_sup, normalize_to_unit_modular, sup_norm,
    sup_norm_full, telescoped_objective,
};
use orlicz_core::extremal::{
    boundedness_scan, brute_force_oracle, build_problem, kkt_residual, solve,
};
use orlicz_core::nonembed::divergence_partial_sums;
use orlicz_core::ordinal::{
    cb_rank_by_derivation, definition_based_derive, symbolic_restriction, truncated_universe,
    verify_omega,
};
use orlicz_core::orlicz::{luxemburg_norm, smooth};
use orlicz_core::{
    conjugate, ConjugatePair, FiniteSequence, KPoint, OrdinalTag, OrliczFunction, SymbolicFamily,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Verdict + 'a>);

const SEED: u64 = 20;

fn pair(m: &OrliczFunction, levels: usize) -> ConjugatePair {
    conjugate(m).unwrap().with_levels(levels).unwrap()
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn random_sparse(rng: &mut ChaCha8Rng, max_support: usize, index_range: usize) -> FiniteSequence {
    let k = rng.gen_range(1..=max_support);
    let idx = rand::seq::index::sample(rng, index_range, k);
    let entries = idx
        .into_iter()
        .map(|i| (i + 1, rng.gen_range(-5.0..5.0)))
        .collect();
    FiniteSequence::new(entries).unwrap()
}

fn conjugate_matches_closed_form() -> Verdict {
    let mut worst = 0.0f64;
    for p in [1.5, 2.0, 3.0] {
        let q = p / (p - 1.0);
        let c = conjugate(&OrliczFunction::power(p).unwrap()).unwrap();
        for t in log_spaced(1e-4, 1.0, 50) {
            let exact = t.powf(q) / q;
            worst = worst.max((c.value(t) - exact).abs() / exact);
        }
    }
    if worst <= 1e-8 {
        Ok(format!("max relative error {worst:.2e}"))
    } else {
        Err(format!("max relative error {worst:.2e} > 1e-8"))
    }
}

fn level_sequence() -> Verdict {
    let n_max = 10_000;
    let sq = pair(&OrliczFunction::power(2.0).unwrap(), n_max);
    let worst = sq
        .levels()
        .iter()
        .enumerate()
        .map(|(i, &t)| (t - (2.0 / (i + 1) as f64).sqrt()).abs())
        .fold(0.0, f64::max);
    if worst > 1e-10 {
        return Err(format!("power(2) level error {worst:.2e} > 1e-10"));
    }
    let families = [
        OrliczFunction::power(1.5).unwrap(),
        OrliczFunction::power(3.0).unwrap(),
        OrliczFunction::lt().unwrap(),
        smooth(&OrliczFunction::power(1.5).unwrap()).unwrap(),
        smooth(&OrliczFunction::lt().unwrap()).unwrap(),
    ];
    for m in &families {
        let t = pair(m, n_max);
        if let Some(i) = t.levels().windows(2).position(|w| w[1] >= w[0]) {
            return Err(format!(
                "{} levels not decreasing at n = {}",
                m.label(),
                i + 2
            ));
        }
    }
    Ok(format!(
        "power(2) max error {worst:.2e}; 6 families strictly decreasing to n = {n_max}"
    ))
}

fn luxemburg_matches_lp() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let p = [1.5, 2.0, 3.0][i % 3];
        let m = OrliczFunction::power(p).unwrap().normalized().unwrap();
        let b = random_sparse(&mut rng, 20, 40);
        let exact = b
            .values()
            .map(|x| x.abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p);
        worst = worst.max((luxemburg_norm(&m, &b) - exact).abs() / exact);
    }
    if worst <= 1e-8 {
        Ok(format!("max relative error {worst:.2e}"))
    } else {
        Err(format!("max relative error {worst:.2e} > 1e-8"))
    }
}

fn solver_matches_oracle() -> Verdict {
    let (mut gap, mut kkt) = (0.0f64, 0.0f64);
    for m in [
        OrliczFunction::power(2.0).unwrap(),
        OrliczFunction::power(3.0).unwrap(),
        OrliczFunction::lt().unwrap(),
    ] {
        let c = pair(&m, 4);
        for n in 1..=4 {
            let problem = build_problem(&c, n).unwrap();
            let sol = solve(&problem).unwrap();
            let grid = brute_force_oracle(&problem, 2000).unwrap();
            gap = gap.max((sol.objective - grid).abs());
            kkt = kkt.max(kkt_residual(&sol, &c));
        }
    }
    if gap <= 5e-3 && kkt <= 1e-6 {
        Ok(format!("max gap {gap:.2e}, max KKT residual {kkt:.2e}"))
    } else {
        Err(format!(
            "max gap {gap:.2e} (<= 5e-3?), max KKT residual {kkt:.2e} (<= 1e-6?)"
        ))
    }
}

fn closed_form_spot_check() -> Verdict {
    let c = pair(&OrliczFunction::power(2.0).unwrap(), 2);
    let sol = solve(&build_problem(&c, 2).unwrap()).unwrap();
    let msg = format!("f* = {:.7}, lambda = {:.7}", sol.objective, sol.lambda);
    if (sol.objective - 1.08239).abs() <= 1e-5 && (sol.lambda - 0.54120).abs() <= 1e-5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Scan maximum for lt, shared with the decomposition criterion.
fn boundedness_dichotomy(c_hat: &mut f64) -> Verdict {
    let ns: Vec<usize> = (0..=12).map(|k| 1usize << k).collect();
    let budget = Duration::from_secs(60);

    let started = Instant::now();
    let sq = boundedness_scan(
        &conjugate(&OrliczFunction::power(2.0).unwrap()).unwrap(),
        &ns,
    )
    .unwrap();
    let sq_time = started.elapsed();
    let started = Instant::now();
    let lt = boundedness_scan(&conjugate(&OrliczFunction::lt().unwrap()).unwrap(), &ns).unwrap();
    let lt_time = started.elapsed();
    *c_hat = lt.c_hat;

    let v = sq.values();
    let increasing = v.len() == ns.len() && v.windows(2).all(|w| w[1].1 > w[0].1);
    let msg = format!(
        "power(2) increment {:.4} in {:.1?}; lt increment {:.4} in {:.1?}, C_hat {:.4}",
        sq.last_decade_increment, sq_time, lt.last_decade_increment, lt_time, lt.c_hat
    );
    let ok = increasing
        && sq.last_decade_increment > 0.05
        && lt.values().len() == ns.len()
        && lt.last_decade_increment < 0.05
        && sq_time < budget
        && lt_time < budget;
    if ok {
        Ok(msg)
    } else {
        Err(format!("{msg}; power(2) strictly increasing: {increasing}"))
    }
}

fn decomposition(c_hat: f64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let pairs = [
        pair(&OrliczFunction::power(2.0).unwrap(), 64),
        pair(&OrliczFunction::power(3.0).unwrap(), 64),
        pair(&OrliczFunction::lt().unwrap(), 64),
    ];
    let (mut recon, mut mass, mut lt_max) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..200 {
        let which = i % 3;
        let c = &pairs[which];
        let len = rng.gen_range(1..=50);
        let mut v: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..4.0)).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        if v[0] == 0.0 {
            v[0] = 1.0;
        }
        let b = normalize_to_unit_modular(&FiniteSequence::from_dense(&v), c).unwrap();
        let d = decompose(&b, c).unwrap();
        let dense = b.to_dense();
        for (x, y) in d.reconstruct().iter().zip(&dense) {
            let err = if *y == 0.0 {
                x.abs()
            } else {
                ((x - y) / y).abs()
            };
            recon = recon.max(err);
        }
        let f = telescoped_objective(&dense, c).unwrap();
        mass = mass.max((d.total() - f).abs());
        if which == 2 {
            lt_max = lt_max.max(d.total());
        }
    }
    let msg = format!(
        "reconstruction {recon:.2e}, mass {mass:.2e}, lt max sum {lt_max:.4} vs 1.1 C_hat {:.4}",
        1.1 * c_hat
    );
    if recon <= 1e-14 && mass <= 1e-12 && lt_max <= 1.1 * c_hat {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn embedding_sandwich() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let pairs = [
        pair(&OrliczFunction::power(1.5).unwrap(), 64),
        pair(&OrliczFunction::power(2.0).unwrap(), 64),
        pair(&OrliczFunction::power(3.0).unwrap(), 64),
        pair(&OrliczFunction::lt().unwrap(), 64),
        pair(&smooth(&OrliczFunction::power(1.5).unwrap()).unwrap(), 64),
    ];
    let mut worst = f64::NEG_INFINITY;
    for c in &pairs {
        for _ in 0..500 {
            let b = random_sparse(&mut rng, 50, 100);
            let excess = sup_norm_full(&b, c).unwrap() - 2.0 * luxemburg_norm(c.base(), &b);
            worst = worst.max(excess);
        }
    }
    let sq = &pairs[1];
    let e1 = FiniteSequence::unit(1);
    let ratio = sup_norm_full(&e1, sq).unwrap() / luxemburg_norm(sq.base(), &e1);
    let msg = format!("max sup - 2 lux {worst:.2e} over 5x500 vectors; e1 ratio {ratio:.15}");
    if worst <= 1e-9 && (ratio - 2.0).abs() <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn sup_norm_exactness() -> Verdict {
    let points: Vec<KPoint> = enumerate_truncated_k(8, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    let mut checked = 0;
    for m in [
        OrliczFunction::power(2.0).unwrap(),
        OrliczFunction::power(3.0).unwrap(),
        OrliczFunction::lt().unwrap(),
    ] {
        let c = pair(&m, 8);
        for i in 0..60 {
            // half the vectors use small integers, which produce ties and zeros
            let dense: Vec<f64> = (0..6)
                .map(|_| {
                    if i % 2 == 0 {
                        rng.gen_range(-2i32..=2) as f64
                    } else {
                        rng.gen_range(-3.0..3.0)
                    }
                })
                .collect();
            let b = FiniteSequence::from_dense(&dense);
            let rule = sup_norm(&b, &c, 8).unwrap();
            let brute = enumeration_sup(&b, &points, &c).unwrap();
            if rule != brute {
                return Err(format!("{} on {dense:?}: {rule} vs {brute}", m.label()));
            }
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} vectors exact against {} enumerated points",
        points.len()
    ))
}

fn derived_sets() -> Verdict {
    let k = SymbolicFamily::full();
    for m in 0..=64 {
        let d = k.derive_times(m);
        for n in 1..=m + 100 {
            let expected = n.checked_sub(m);
            if d.kappa(n) != expected {
                return Err(format!(
                    "m = {m}, n = {n}: cap {:?}, expected {expected:?}",
                    d.kappa(n)
                ));
            }
        }
        if !d.has_zero() {
            return Err(format!("origin lost at m = {m}"));
        }
    }
    let mut universes = 0;
    for i in 0..=6 {
        for n in 1..=6 {
            for m in 0..=n + 1 {
                let oracle = definition_based_derive(i, n, m).unwrap();
                let rule = symbolic_restriction(&k, i, n, m).unwrap();
                if oracle != rule {
                    return Err(format!("I = {i}, N = {n}, m = {m}: oracle and rule differ"));
                }
                universes += 1;
            }
        }
    }
    let omega = verify_omega(&k, 50);
    if !(omega.passed && omega.zero_rank == OrdinalTag::Omega) {
        return Err(format!("verify_omega failed: {:?}", omega.rank_mismatches));
    }
    let horizon = 60;
    let omega_points: Vec<KPoint> = truncated_universe(6, 6)
        .unwrap()
        .into_iter()
        .chain([KPoint::origin()])
        .filter(|p| cb_rank_by_derivation(&k, p, horizon) == Some(OrdinalTag::Omega))
        .collect();
    if omega_points != [KPoint::origin()] {
        return Err(format!("points of rank ω: {omega_points:?}"));
    }
    Ok(format!("closed form to m = 64; {universes} universes match; ω verified to 50, only the origin has rank ω"))
}

fn non_embedding_witness() -> Verdict {
    let mut notes = Vec::new();
    let mut failed = false;
    for m in [
        OrliczFunction::linear(),
        OrliczFunction::power(2.0).unwrap(),
        OrliczFunction::lt().unwrap(),
    ] {
        let label = m.label().to_owned();
        let m = m.normalized().unwrap();
        let r = divergence_partial_sums(&m, 100).unwrap();
        let ok = r.partial_sums_dominate_j && r.block_norms_bounded && r.j_star.is_some();
        failed |= !ok;
        let last = r.norm_partials().last().copied().unwrap_or(0.0);
        notes.push(match r.j_star {
            Some(j) => format!("{label}: S_J >= J {}, blocks {}, norm > 10 at J = {j}",
                r.partial_sums_dominate_j, r.block_norms_bounded),
            None => format!(
                "{label}: S_J >= J {}, blocks {}, norm never exceeds 10 (norm {last:.3} at J = 100, searched to {:?})",
                r.partial_sums_dominate_j, r.block_norms_bounded, r.search_stopped_at
            ),
        });
    }
    if failed {
        Err(notes.join("; "))
    } else {
        Ok(notes.join("; "))
    }
}

fn run_binary(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_orlicz"))
        .args(args)
        .env_remove("ORLICZ_OUT_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {}", out.status));
    }
    Ok(out.stdout)
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let report = dir.path().join("r.jsonl");
    let report = report.to_str().unwrap();
    let configs: [&[&str]; 5] = [
        &["extremal-scan", "lt", "--n", "1,2,4,8,16"],
        &["embed-verify", "lt", "--samples", "50", "--seed", "11"],
        &["derive", "--m", "2", "--I", "4", "--N", "4"],
        &["nonembed", "power:p=2", "--J", "20"],
        &[
            "conjugate",
            "smooth(power:p=1.5)",
            "--n",
            "32",
            "--out",
            report,
        ],
    ];
    for args in configs {
        let first = run_binary(args)?;
        let first_file = std::fs::read(report).unwrap_or_default();
        let second = run_binary(args)?;
        let second_file = std::fs::read(report).unwrap_or_default();
        if first != second || first_file != second_file {
            return Err(format!("{args:?} differs between runs"));
        }
    }
    Ok(format!(
        "{} configurations byte-identical across two runs",
        configs.len()
    ))
}

/// A panic inside a criterion counts as its failure.
fn guarded(f: impl FnOnce() -> Verdict) -> Verdict {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() -> ExitCode {
    let mut c_hat = f64::NAN;
    let criteria: Vec<Criterion> = vec![
        (
            "conjugate closed form",
            Box::new(conjugate_matches_closed_form),
        ),
        ("level sequence", Box::new(level_sequence)),
        ("Luxemburg norm vs l^p", Box::new(luxemburg_matches_lp)),
        ("solver vs grid oracle", Box::new(solver_matches_oracle)),
        ("closed-form spot check", Box::new(closed_form_spot_check)),
        (
            "boundedness dichotomy",
            Box::new(|| boundedness_dichotomy(&mut c_hat)),
        ),
    ];
    let mut failures = 0;
    let mut report = |idx: usize, name: &str, v: Verdict| {
        let (tag, detail) = match v {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {idx:>2} {tag} {name}: {detail}");
    };
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        report(i + 1, name, guarded(f));
    }
    report(7, "decomposition", guarded(|| decomposition(c_hat)));
    report(8, "embedding sandwich", guarded(embedding_sandwich));
    report(9, "sup_norm exactness", guarded(sup_norm_exactness));
    report(10, "derived sets", guarded(derived_sets));
    report(11, "non-embedding witness", guarded(non_embedding_witness));
    report(12, "determinism", guarded(determinism));
    if failures == 0 {
        println!("acceptance: 12/12 passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of 12 failed");
        ExitCode::FAILURE
    }
}
