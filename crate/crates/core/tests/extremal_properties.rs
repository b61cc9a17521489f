use orlicz_core::extremal::{
    boundedness_scan, brute_force_oracle, build_problem, kkt_residual, solve, ExtremalProblem,
};
use orlicz_core::{conjugate, ConjugatePair, OrliczFunction};
use proptest::prelude::*;

fn pairs() -> Vec<ConjugatePair> {
    [
        OrliczFunction::power(2.0).unwrap(),
        OrliczFunction::power(3.0).unwrap(),
        OrliczFunction::power(1.5).unwrap(),
        OrliczFunction::lt().unwrap(),
    ]
    .iter()
    .map(|m| conjugate(m).unwrap().with_levels(64).unwrap())
    .collect()
}

#[test]
fn solver_agrees_with_grid_oracle() {
    let grid = 300;
    for pair in pairs() {
        for n in 1..=4 {
            let p = build_problem(&pair, n).unwrap();
            let f = solve(&p).unwrap().objective;
            let g = brute_force_oracle(&p, grid).unwrap();
            let tol = 5.0 / grid as f64 * (1.0 + f);
            assert!(
                (f - g).abs() <= tol,
                "{} n={n}: {f} vs {g}",
                pair.base().label()
            );
            // grid points are feasible, so they cannot beat the optimum
            assert!(g <= f + 1e-9);
        }
    }
}

#[test]
fn padding_is_monotone() {
    for pair in pairs() {
        let ns: Vec<usize> = (1..=64).collect();
        let v = boundedness_scan(&pair, &ns).unwrap().values();
        assert_eq!(v.len(), 64);
        assert!(
            v.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12),
            "{}",
            pair.base().label()
        );
    }
}

#[test]
fn multiplier_bound_holds() {
    for pair in pairs() {
        for n in [1, 2, 5, 17, 64] {
            let sol = solve(&build_problem(&pair, n).unwrap()).unwrap();
            assert!(sol.objective <= sol.doubling_bound(&pair) + 1e-6);
        }
    }
}

#[test]
fn feasibility_residual_is_monotone_in_lambda() {
    for pair in pairs() {
        let p = build_problem(&pair, 6).unwrap();
        let m = pair.base();
        let residual = |lambda: f64| -> f64 {
            p.weights()
                .iter()
                .map(|w| pair.value_at_slope_of(w / lambda))
                .sum::<f64>()
                - 1.0
        };
        let sol = solve(&p).unwrap();
        let (lo, hi) = (sol.lambda / 64.0, sol.lambda * 64.0);
        let pts: Vec<f64> = (0..=48)
            .map(|k| lo * (hi / lo).powf(k as f64 / 48.0))
            .collect();
        let vals: Vec<f64> = pts.iter().map(|&l| residual(l)).collect();
        assert!(
            vals.windows(2).all(|w| w[1] <= w[0] + 1e-15),
            "{}",
            m.label()
        );
        assert!(vals[0] > 0.0 && *vals.last().unwrap() < 0.0);
    }
}

#[test]
fn quadratic_growth_matches_closed_form() {
    // f*(n) = sqrt(2 Σ w_i²) and w_i² ~ 1/(8i), so f*² grows like log(n)/4
    let pair = conjugate(&OrliczFunction::power(2.0).unwrap()).unwrap();
    let ns = [1024usize, 4096, 16384];
    let v = boundedness_scan(&pair, &ns).unwrap().values();
    let d1 = v[1].1.powi(2) - v[0].1.powi(2);
    let d2 = v[2].1.powi(2) - v[1].1.powi(2);
    let expected = 4f64.ln() / 4.0;
    assert!(
        (d1 - expected).abs() < 1e-3 && (d2 - expected).abs() < 1e-3,
        "{d1} {d2}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaling_weights_scales_lambda(c in 0.05f64..20.0, family in 0usize..4) {
        let pair = &pairs()[family];
        let p = build_problem(pair, 2).unwrap();
        let a = solve(&p).unwrap();
        let b = solve(&p.rescaled(c)).unwrap();
        prop_assert!((b.lambda - c * a.lambda).abs() <= 1e-10 * c * a.lambda);
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-10 * x);
        }
    }

    #[test]
    fn arbitrary_weights_give_valid_solutions(
        w in prop::collection::vec(0.0f64..3.0, 1..12),
        family in 0usize..4,
    ) {
        prop_assume!(w[0] > 1e-3);
        let pair = &pairs()[family];
        let p = ExtremalProblem::from_weights(pair, w).unwrap();
        let sol = solve(&p).unwrap();
        prop_assert!(sol.feasibility_residual(pair).abs() <= 1e-9);
        prop_assert!(kkt_residual(&sol, pair) <= 1e-6);
        let v = sol.values();
        prop_assert!(v.windows(2).all(|x| x[1] <= x[0]));
        prop_assert!(sol.blocks.windows(2).all(|b| b[1].value < b[0].value && b[1].start == b[0].end + 1));
        prop_assert!((p.objective(&v) - sol.objective).abs() <= 1e-10 * sol.objective);
    }
}
