use orlicz_core::nonembed::{
    block_norms, build_witness, divergence_partial_sums, normalize, witness_sizes,
};
use orlicz_core::{BlockPartition, OrliczFunction};
use proptest::prelude::*;

fn families() -> Vec<OrliczFunction> {
    [
        OrliczFunction::linear(),
        OrliczFunction::power(2.0).unwrap(),
        OrliczFunction::power(1.5).unwrap(),
        OrliczFunction::lt().unwrap(),
    ]
    .iter()
    .map(|m| normalize(m).unwrap())
    .collect()
}

#[test]
fn contradiction_pair_for_every_family() {
    for m in families() {
        let rep = divergence_partial_sums(&m, 100).unwrap();
        assert!(rep.partial_sums_dominate_j, "{}", m.label());
        assert!(rep.block_norms_bounded, "{}", m.label());
        assert!(rep.norm_partials_non_decreasing, "{}", m.label());
        // the tail of block norms drops below any ε
        assert!(rep.rows[50..].iter().all(|r| r.block_norm <= 1.0 / 50.0));
        // each group alone carries norm close to 1
        assert!(rep.min_group_norm >= 1.0 - 1e-9, "{}", m.label());
    }
}

#[test]
fn groups_are_separated() {
    let m = &families()[1];
    let p = BlockPartition::uniform(3, 400).unwrap();
    let w = build_witness(m, &p, 7).unwrap();
    assert!(w.groups.windows(2).all(|g| g[0].1 < g[1].0));
    let norms = block_norms(&w, m, &p).unwrap();
    for (k, nrm) in norms.iter().enumerate() {
        let j = w.group_of(k as u64 + 1).unwrap();
        assert!((nrm - 1.0 / j as f64).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn sizes_are_minimal(j_max in 1usize..60, family in 0usize..4) {
        let m = &families()[family];
        let sizes = witness_sizes(m, j_max).unwrap();
        for (i, &s) in sizes.iter().enumerate() {
            let v = m.value(1.0 / (i + 1) as f64);
            prop_assert!(s as f64 * v >= 1.0 - 1e-12);
            prop_assert!(s == 1 || (s - 1) as f64 * v < 1.0 - 1e-12);
        }
    }
}
