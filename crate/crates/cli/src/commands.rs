//! One function per subcommand. Each returns the records to write and the
//! residual checks that failed.

use std::collections::{BTreeMap, BTreeSet};

use orlicz_core::embedding::{
    decompose, enumerate_truncated_k, enumeration_sup, norm_equivalence_report,
    normalize_to_unit_modular, sup_norm, telescoped_objective,
};
use orlicz_core::extremal::{boundedness_scan, brute_force_oracle, build_problem, ORACLE_MAX_N};
use orlicz_core::nonembed::{
    block_norms, build_witness, divergence_partial_sums, BlockPartition, COORDINATE_GUARD,
};
use orlicz_core::ordinal::{
    cb_rank, cb_rank_by_derivation, limit_points, symbolic_restriction, truncated_universe,
    verify_omega,
};
use orlicz_core::orlicz::luxemburg_norm;
use orlicz_core::{
    conjugate, make_family, ConjugatePair, FamilySpec, FiniteSequence, KPoint, OrdinalTag,
    OrliczFunction, Record, SymbolicFamily,
};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{
    Cli, CliError, Command, ConjugateArgs, DecomposeArgs, DeriveArgs, EmbedArgs, NonembedArgs,
    NormArgs, Outcome, ScanArgs,
};

/// Largest `--n` accepted by `conjugate`.
const MAX_LEVELS: usize = 1_000_000;
/// Largest row count of the `conjugate` function table.
const MAX_TABLE: usize = 100_000;
/// Vectors compared against the enumerated truncated K.
const K_CHECK_VECTORS: usize = 20;
/// Default scan list `1, 2, 4, …, 4096`.
const DEFAULT_SCAN_EXPONENT: u32 = 12;

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let tol = match cli.tol {
        Some(t) if !(t.is_finite() && t >= 0.0) => {
            return Err(CliError::validation(
                "usage",
                format!("--tol must be a non-negative number, got {t}"),
            ))
        }
        t => t,
    };
    let mut ctx = Ctx { tol, out: &mut out };
    match &cli.command {
        Command::Conjugate(a) => run_conjugate(a, &mut ctx)?,
        Command::Norm(a) => run_norm(a, &mut ctx)?,
        Command::ExtremalScan(a) => run_scan(a, &mut ctx)?,
        Command::Decompose(a) => run_decompose(a, &mut ctx)?,
        Command::EmbedVerify(a) => run_embed(a, cli.seed, &mut ctx)?,
        Command::Derive(a) => run_derive(a, &mut ctx)?,
        Command::Nonembed(a) => run_nonembed(a, &mut ctx)?,
    }
    Ok(out)
}

struct Ctx<'a> {
    tol: Option<f64>,
    out: &'a mut Outcome,
}

impl Ctx<'_> {
    fn push<I: Serialize, O: Serialize, R: Serialize>(
        &mut self,
        op: &str,
        inputs: &I,
        outputs: &O,
        residuals: &R,
    ) -> Result<(), CliError> {
        self.out
            .records
            .push(Record::new(op, inputs, outputs, residuals)?);
        Ok(())
    }

    /// Records a failure when `residual` exceeds `--tol`.
    fn check(&mut self, what: &str, residual: f64) {
        if let Some(tol) = self.tol {
            if !(residual <= tol) {
                self.out
                    .failures
                    .push(format!("{what} residual {residual:e} exceeds {tol:e}"));
            }
        }
    }

    fn fail(&mut self, what: String) {
        self.out.failures.push(what);
    }
}

fn family(spec: &str) -> Result<OrliczFunction, CliError> {
    let spec: FamilySpec = spec.parse()?;
    Ok(make_family(&spec)?)
}

fn pair_for(spec: &str) -> Result<ConjugatePair, CliError> {
    Ok(conjugate(&family(spec)?)?)
}

fn guard(what: &str, got: usize, lo: usize, hi: usize) -> Result<(), CliError> {
    if got < lo || got > hi {
        return Err(CliError::validation(
            "guard",
            format!("{what} = {got} outside [{lo}, {hi}]"),
        ));
    }
    Ok(())
}

fn csv_text(
    write: impl FnOnce(&mut Vec<u8>) -> orlicz_core::Result<()>,
) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    String::from_utf8(buf).map_err(|e| CliError::validation("serialization", e.to_string()))
}

fn run_conjugate(a: &ConjugateArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    guard("--n", a.n, 1, MAX_LEVELS)?;
    guard("--grid", a.grid, 1, MAX_TABLE)?;
    let pair = pair_for(&a.spec)?.with_levels(a.n)?;
    let m = pair.base();
    let levels = pair.levels().to_vec();
    let level_residual = levels
        .iter()
        .enumerate()
        .map(|(i, &t)| (pair.value(t) - 1.0 / (i + 1) as f64).abs())
        .fold(0.0, f64::max);
    ctx.push(
        "conjugate.levels",
        &json!({"spec": a.spec, "n": a.n}),
        &json!({"function": m.info(), "levels": levels}),
        &json!({"max_level_residual": level_residual}),
    )?;
    ctx.check("level", level_residual);

    // t up to the first level, where the conjugate reaches 1
    let top = levels[0];
    let rows: Vec<Value> = (1..=a.grid)
        .map(|k| {
            let t = top * k as f64 / a.grid as f64;
            json!({
                "t": t,
                "M": m.value(t),
                "conjugate": pair.value(t),
                "quotient": pair.quotient(t),
            })
        })
        .collect();
    ctx.push(
        "conjugate.table",
        &json!({"spec": a.spec, "grid": a.grid, "t_max": top}),
        &rows,
        &json!({}),
    )?;

    let mut csv = String::from("n,t_n,residual\n");
    for (i, &t) in levels.iter().enumerate() {
        let n = i + 1;
        csv.push_str(&format!(
            "{n},{t:e},{:e}\n",
            (pair.value(t) - 1.0 / n as f64).abs()
        ));
    }
    ctx.out.csv = Some(csv);
    Ok(())
}

fn run_norm(a: &NormArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    if a.values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::validation("usage", "--values must be finite"));
    }
    let base = family(&a.spec)?;
    let m = if a.normalize {
        base.normalized()?
    } else {
        base
    };
    let b = FiniteSequence::from_dense(&a.values);
    let rho = luxemburg_norm(&m, &b);
    let modular_residual = if rho > 0.0 {
        (b.values().map(|x| m.value(x.abs() / rho)).sum::<f64>() - 1.0).abs()
    } else {
        0.0
    };
    ctx.push(
        "norm",
        &json!({"spec": a.spec, "values": a.values, "normalize": a.normalize}),
        &json!({"norm": rho}),
        &json!({"modular": modular_residual}),
    )?;
    ctx.check("modular", modular_residual);
    Ok(())
}

fn run_scan(a: &ScanArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let ns: Vec<usize> = if a.n.is_empty() {
        (0..=DEFAULT_SCAN_EXPONENT).map(|k| 1usize << k).collect()
    } else {
        a.n.clone()
    };
    let pair = pair_for(&a.spec)?;
    let table = boundedness_scan(&pair, &ns)?;
    for row in &table.rows {
        let mut residuals = json!({"kkt": row.kkt_residual});
        if let (Some(grid), Some(f)) = (a.grid, row.fstar) {
            if row.n <= ORACLE_MAX_N {
                let g = brute_force_oracle(&build_problem(&pair, row.n)?, grid)?;
                residuals["oracle_value"] = json!(g);
                residuals["oracle_gap"] = json!((f - g).abs());
            }
        }
        ctx.push(
            "extremal-scan.row",
            &json!({"spec": a.spec, "n": row.n}),
            row,
            &residuals,
        )?;
        match (&row.error, row.kkt_residual) {
            (Some(e), _) => ctx.fail(format!("n = {}: {e}", row.n)),
            (None, Some(k)) => ctx.check(&format!("kkt at n = {}", row.n), k),
            _ => {}
        }
    }
    ctx.push(
        "extremal-scan.summary",
        &json!({"spec": a.spec, "n": ns, "grid": a.grid}),
        &json!({
            "c_hat": table.c_hat,
            "last_decade_increment": table.last_decade_increment,
            "decade_start": table.decade_start,
            "relative_increment": table.relative_increment,
            "plateau": table.plateau,
            "verdict_is_empirical": table.verdict_is_empirical,
        }),
        &json!({}),
    )?;
    ctx.out.csv = Some(csv_text(|w| table.write_csv(w))?);
    Ok(())
}

fn run_decompose(a: &DecomposeArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let pair = pair_for(&a.spec)?;
    let raw = FiniteSequence::from_dense(&a.values);
    let b = normalize_to_unit_modular(&raw, &pair)?;
    let d = decompose(&b, &pair)?;
    let dense = b.to_dense();
    let reconstruction = d
        .reconstruct()
        .iter()
        .zip(&dense)
        .map(|(x, y)| {
            if *y == 0.0 {
                x.abs()
            } else {
                ((x - y) / y).abs()
            }
        })
        .fold(0.0, f64::max);
    let f = telescoped_objective(&dense, &pair)?;
    let mass = (d.total() - f).abs();
    ctx.push(
        "decompose",
        &json!({"spec": a.spec, "values": a.values}),
        &json!({
            "normalized": dense,
            "coefficients": d.coefficients,
            "levels": d.levels,
            "total": d.total(),
            "objective": f,
        }),
        &json!({"reconstruction": reconstruction, "mass": mass}),
    )?;
    ctx.check("reconstruction", reconstruction);
    ctx.check("mass", mass);
    let mut csv = String::from("i,b,coefficient,level\n");
    for (i, ((x, c), t)) in dense.iter().zip(&d.coefficients).zip(&d.levels).enumerate() {
        csv.push_str(&format!("{},{x:e},{c:e},{t:e}\n", i + 1));
    }
    ctx.out.csv = Some(csv);
    Ok(())
}

/// Random vector with `1..=support` non-zero coordinates among `1..=2 support`.
fn random_sample(rng: &mut ChaCha8Rng, support: usize) -> FiniteSequence {
    let k = rng.gen_range(1..=support);
    let mut entries: Vec<(usize, f64)> = sample(rng, 2 * support, k)
        .into_iter()
        .map(|i| (i + 1, 0.0))
        .collect();
    for e in &mut entries {
        e.1 = rng.gen_range(-1.0..1.0);
    }
    FiniteSequence::new(entries).expect("distinct indices")
}

fn run_embed(a: &EmbedArgs, seed: u64, ctx: &mut Ctx) -> Result<(), CliError> {
    guard("--samples", a.samples, 1, 1_000_000)?;
    guard("--support", a.support, 1, 10_000)?;
    let pair = pair_for(&a.spec)?.with_levels(a.support.max(a.level_bound))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<FiniteSequence> = (0..a.samples)
        .map(|_| random_sample(&mut rng, a.support))
        .collect();
    let report = norm_equivalence_report(&pair, &samples)?;
    ctx.push(
        "embed-verify.norms",
        &json!({"spec": a.spec, "samples": a.samples, "support": a.support, "seed": seed}),
        &json!({
            "min_ratio": report.min_ratio,
            "max_ratio": report.max_ratio,
            "norming_constant": report.norming_constant,
            "skipped": report.skipped,
            "pairing_bound_holds": report.pairing_bound_holds(),
        }),
        &json!({"pairing_violations": report.pairing_violations}),
    )?;
    if !report.pairing_bound_holds() {
        ctx.fail(format!(
            "sup_norm > 2 lux_norm on samples {:?}",
            report.pairing_violations
        ));
    }

    let points = enumerate_truncated_k(a.index_bound, a.level_bound)?;
    let mut mismatches = Vec::new();
    let mut checked = Vec::new();
    for id in 0..K_CHECK_VECTORS {
        let dense: Vec<f64> = (0..a.index_bound)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let b = FiniteSequence::from_dense(&dense);
        let by_rule = sup_norm(&b, &pair, a.level_bound)?;
        let by_enumeration = enumeration_sup(&b, &points, &pair)?;
        if by_rule != by_enumeration {
            mismatches.push(id);
        }
        checked.push(json!({"id": id, "sup_norm": by_rule, "enumeration": by_enumeration}));
    }
    ctx.push(
        "embed-verify.truncated-k",
        &json!({"I": a.index_bound, "N": a.level_bound, "vectors": K_CHECK_VECTORS}),
        &json!({"points": points.len(), "rows": checked}),
        &json!({"mismatches": mismatches}),
    )?;
    if !mismatches.is_empty() {
        ctx.fail(format!(
            "sup_norm differs from enumeration on vectors {mismatches:?}"
        ));
    }

    let mut csv = String::from("sample_id,lux_norm,sup_norm,ratio\n");
    for r in &report.samples {
        csv.push_str(&format!(
            "{},{:e},{:e},{:e}\n",
            r.sample_id, r.lux_norm, r.sup_norm, r.ratio
        ));
    }
    ctx.out.csv = Some(csv);
    Ok(())
}

fn run_derive(a: &DeriveArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let fam = a
        .cap
        .map_or_else(SymbolicFamily::full, SymbolicFamily::capped);
    let derived = fam.derive_times(a.m);

    // m rounds of limit points, starting from the family inside the universe
    let mut oracle: BTreeSet<KPoint> = truncated_universe(a.index_bound, a.level_bound)?
        .into_iter()
        .filter(|p| fam.contains(p))
        .collect();
    for _ in 0..a.m {
        oracle = limit_points(&oracle);
    }
    let symbolic = symbolic_restriction(&fam, a.index_bound, a.level_bound, a.m)?;
    let only_oracle: Vec<&KPoint> = oracle.difference(&symbolic).collect();
    let only_symbolic: Vec<&KPoint> = symbolic.difference(&oracle).collect();
    ctx.push(
        "derive.sets",
        &json!({"m": a.m, "cap": a.cap, "I": a.index_bound, "N": a.level_bound}),
        &json!({
            "family": fam,
            "derived": derived,
            "contains_zero": derived.has_zero(),
            "oracle_points": oracle.len(),
            "symbolic_points": symbolic.len(),
        }),
        &json!({"only_oracle": only_oracle, "only_symbolic": only_symbolic}),
    )?;
    if !(only_oracle.is_empty() && only_symbolic.is_empty()) {
        ctx.fail(format!(
            "derived sets differ: {} only in the oracle, {} only in the symbolic rule",
            only_oracle.len(),
            only_symbolic.len()
        ));
    }

    // rank histogram over the universe; against the closed form for K itself
    let horizon = a.level_bound + 1;
    let mut histogram: BTreeMap<String, usize> = BTreeMap::new();
    let mut rank_mismatches = Vec::new();
    for p in truncated_universe(a.index_bound, a.level_bound)? {
        let Some(rank) = cb_rank_by_derivation(&fam, &p, horizon) else {
            continue;
        };
        *histogram.entry(rank.to_string()).or_default() += 1;
        if a.cap.is_none() && rank != cb_rank(&p) {
            rank_mismatches.push(p);
        }
    }
    let zero = KPoint::origin();
    let zero_rank = cb_rank_by_derivation(&fam, &zero, a.m_max + 1);
    ctx.push(
        "derive.ranks",
        &json!({"I": a.index_bound, "N": a.level_bound, "horizon": horizon}),
        &json!({"histogram": histogram, "zero_rank": zero_rank}),
        &json!({"mismatches": rank_mismatches}),
    )?;
    if !rank_mismatches.is_empty() {
        ctx.fail(format!(
            "{} ranks differ from n - |A|",
            rank_mismatches.len()
        ));
    }

    let omega = verify_omega(&fam, a.m_max);
    ctx.push(
        "derive.omega",
        &json!({"m_max": a.m_max, "cap": a.cap}),
        &json!({
            "passed": omega.passed,
            "zero_in_every_stage": omega.zero_in_every_stage,
            "zero_rank": omega.zero_rank,
            "last_stage": omega.stages.last(),
        }),
        &json!({"rank_mismatches": omega.rank_mismatches}),
    )?;
    // a capped family loses the origin after finitely many steps, which is the expected answer
    if a.cap.is_none() && !(omega.passed && omega.zero_rank == OrdinalTag::Omega) {
        ctx.fail("origin does not have rank ω in K".into());
    }
    Ok(())
}

fn run_nonembed(a: &NonembedArgs, ctx: &mut Ctx) -> Result<(), CliError> {
    let m = family(&a.spec)?.normalized()?;
    let report = divergence_partial_sums(&m, a.horizon)?;
    ctx.push(
        "nonembed.divergence",
        &json!({"spec": a.spec, "J": a.horizon}),
        &json!({
            "sizes": report.sizes(),
            "partial_sums": report.partial_sums(),
            "norm_partials": report.norm_partials(),
            "j_star": report.j_star,
            "search_stopped_at": report.search_stopped_at,
            "min_group_norm": report.min_group_norm,
        }),
        &json!({
            "partial_sums_dominate_j": report.partial_sums_dominate_j,
            "block_norms_bounded": report.block_norms_bounded,
            "norm_partials_non_decreasing": report.norm_partials_non_decreasing,
        }),
    )?;
    if !(report.partial_sums_dominate_j && report.block_norms_bounded) {
        ctx.fail("witness sizes violate S_J >= J or the block norm bound".into());
    }

    // the witness vector itself, when it is small enough to hold
    let total: u64 = report.sizes().iter().sum();
    let materialized = if total <= COORDINATE_GUARD as u64 {
        let partition = BlockPartition::uniform(a.step, total as usize)?;
        let witness = build_witness(&m, &partition, a.horizon)?;
        let v = witness.realize(&partition)?;
        let norms = block_norms(&witness, &m, &partition)?;
        let excess = norms
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                let j = witness.group_of(k as u64 + 1).expect("block in a group");
                r - 1.0 / j as f64
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let norm = luxemburg_norm(&m, &v);
        let grouped = report.rows.last().map_or(0.0, |r| r.norm_partial);
        let gap = (norm - grouped).abs() / grouped.max(f64::MIN_POSITIVE);
        ctx.check("witness norm", gap);
        json!({
            "coordinates": v.len(),
            "last_index": v.max_index(),
            "norm": norm,
            "grouped_norm_gap": gap,
            "max_block_norm_excess": excess,
        })
    } else {
        json!({"skipped": format!("{total} blocks exceed the guard {COORDINATE_GUARD}")})
    };
    ctx.push(
        "nonembed.witness",
        &json!({"spec": a.spec, "J": a.horizon, "step": a.step}),
        &materialized,
        &json!({}),
    )?;
    ctx.out.csv = Some(csv_text(|w| report.write_csv(w))?);
    Ok(())
}
