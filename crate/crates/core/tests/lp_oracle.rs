mod support;

use proptest::prelude::*;
use qmetro_core::lp::{self, solve_minimax, LpStatus, RowKind, StandardLp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::vertex_enum;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(lo..hi)).collect()).collect()
}

#[test]
fn random_5x5_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let a = random_matrix(&mut rng, 5, 5, 0.05, 2.0);
        let b: Vec<f64> = (0..5).map(|_| rng.gen_range(0.5..3.0)).collect();
        let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..2.0)).collect();
        let mut problem = StandardLp::maximize(c.clone());
        for (row, &bi) in a.iter().zip(&b) {
            problem.add_row(row.clone(), RowKind::Le, bi);
        }
        let sol = lp::solve(&problem).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let oracle = vertex_enum::max_le_nonneg(&c, &a, &b).unwrap();
        assert!((sol.value - oracle).abs() <= 1e-9, "simplex {} vs oracle {}", sol.value, oracle);
        assert!(problem.certify(&sol.x, &sol.dual).is_optimal());
    }
}

#[test]
fn random_games_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..50 {
        let rows = 1 + trial % 6;
        let cols = 1 + (trial / 6) % 6;
        let g = random_matrix(&mut rng, rows, cols, -1.0, 4.0);
        let sol = solve_minimax(&g).unwrap();
        let oracle = vertex_enum::minimax_value(&g);
        assert!((sol.value - oracle).abs() <= 1e-9, "{rows}x{cols}: {} vs {}", sol.value, oracle);
        assert!(sol.certificate.is_optimal(), "{:?}", sol.certificate);
        let total: f64 = sol.dual.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(sol.dual.iter().all(|&y| y >= -1e-12));
    }
}

#[test]
fn degenerate_games_terminate() {
    // Many identical rows and columns stress Bland's rule.
    let g = vec![vec![1.0; 8]; 8];
    let sol = solve_minimax(&g).unwrap();
    assert!((sol.value - 1.0).abs() < 1e-12);
    let mut g = vec![vec![0.0; 6]; 6];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    g.push(vec![1.0 / 6.0; 6]);
    let sol = solve_minimax(&g).unwrap();
    assert!((sol.value - 1.0 / 6.0).abs() < 1e-12);
}

fn game() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(0.0f64..5.0, c), r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strong_duality(g in game()) {
        let sol = solve_minimax(&g).unwrap();
        let c = sol.certificate;
        prop_assert!(c.gap() <= 1e-8 * (1.0 + c.primal_value.abs()));
        prop_assert!(c.primal_residual <= 1e-9 && c.dual_residual <= 1e-9);
    }

    #[test]
    fn value_is_permutation_invariant(g in game(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows: Vec<usize> = (0..g.len()).collect();
        let mut cols: Vec<usize> = (0..g[0].len()).collect();
        use rand::seq::SliceRandom;
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
        let permuted: Vec<Vec<f64>> = rows.iter().map(|&i| cols.iter().map(|&j| g[i][j]).collect()).collect();
        let a = solve_minimax(&g).unwrap().value;
        let b = solve_minimax(&permuted).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn dominated_row_does_not_change_value(g in game(), pick in any::<prop::sample::Index>(), shrink in 0.0f64..1.0) {
        let base = solve_minimax(&g).unwrap().value;
        let donor = &g[pick.index(g.len())];
        let mut extended = g.clone();
        extended.push(donor.iter().map(|v| v * shrink).collect());
        let value = solve_minimax(&extended).unwrap().value;
        prop_assert!((base - value).abs() <= 1e-9);
    }

    #[test]
    fn scaling_scales_value(g in game(), s in 0.1f64..10.0) {
        let a = solve_minimax(&g).unwrap();
        let scaled: Vec<Vec<f64>> = g.iter().map(|row| row.iter().map(|v| v * s).collect()).collect();
        let b = solve_minimax(&scaled).unwrap();
        prop_assert!((a.value * s - b.value).abs() <= 1e-9 * (1.0 + b.value.abs()));
        // Pivoting is scale-covariant, so the same vertex is reached.
        let support = |l: &[f64]| l.iter().map(|&w| w > 1e-8).collect::<Vec<_>>();
        prop_assert_eq!(support(&a.lambda), support(&b.lambda));
    }
}
