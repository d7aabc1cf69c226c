use proptest::prelude::*;

use tablegrid_core::grits::{align_2d_exact, align_2d_factored, cell_sim_con, cell_sim_top};
use tablegrid_core::table::{build_grid, grid_exact_match, CellSpan, LogicalCell, TableGrid};
use tablegrid_core::{grits, Criterion};
use tablegrid_testkit::{random_grid, random_subset, rng, sub_grid, GridSpec};

const LIMIT: usize = 4;

fn small_pair(seed: u64, spec: GridSpec) -> (TableGrid, TableGrid) {
    let mut r = rng(seed);
    (random_grid(&mut r, &spec), random_grid(&mut r, &spec))
}

/// Brute-force LCS over all subsequences of the shorter string.
fn lcs_by_enumeration(a: &[char], b: &[char]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let is_subsequence = |sub: &[char]| {
        let mut it = long.iter();
        sub.iter().all(|c| it.any(|x| x == c))
    };
    (0u32..1 << short.len())
        .filter_map(|mask| {
            let sub: Vec<char> = (0..short.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| short[i])
                .collect();
            is_subsequence(&sub).then_some(sub.len())
        })
        .max()
        .unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn con_similarity_matches_enumeration(a in "[abc ]{0,7}", b in "[abc ]{0,7}") {
        let ca: Vec<char> = a.chars().collect();
        let cb: Vec<char> = b.chars().collect();
        let expected = if ca.is_empty() && cb.is_empty() {
            1.0
        } else {
            2.0 * lcs_by_enumeration(&ca, &cb) as f64 / (ca.len() + cb.len()) as f64
        };
        prop_assert!((cell_sim_con(&a, &b) - expected).abs() < 1e-12);
        prop_assert_eq!(cell_sim_con(&a, &b), cell_sim_con(&b, &a));
    }

    #[test]
    fn top_similarity_symmetric_and_bounded(
        a in (0usize..3, 0usize..3, 0usize..3, 0usize..3),
        b in (0usize..3, 0usize..3, 0usize..3, 0usize..3),
    ) {
        let sa = CellSpan::new(a.0, a.0 + a.1, a.2, a.2 + a.3);
        let sb = CellSpan::new(b.0, b.0 + b.1, b.2, b.2 + b.3);
        let (pa, pb) = ((a.0 + a.1, a.2), (b.0, b.2 + b.3));
        let s = cell_sim_top(&sa, pa, &sb, pb);
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s, cell_sim_top(&sb, pb, &sa, pa));
        prop_assert_eq!(cell_sim_top(&sa, pa, &sa, pa), 1.0);
    }

    #[test]
    fn score_range_symmetry_and_identity(seed in any::<u64>()) {
        let (a, b) = small_pair(seed, GridSpec::default());
        for criterion in Criterion::ALL {
            let ab = grits(&a, &b, criterion);
            let ba = grits(&b, &a, criterion);
            prop_assert!((0.0..=1.0).contains(&ab.score));
            prop_assert!(ab.tp <= ab.size_gt.min(ab.size_pred) as f64 + 1e-9);
            prop_assert!((ab.score - ba.score).abs() <= 1e-12, "{} vs {}", ab.score, ba.score);
            prop_assert_eq!(grits(&a, &a, criterion).score, 1.0);
            prop_assert_eq!(grits(&a, &TableGrid::empty(), criterion).score, 0.0);
        }
    }

    #[test]
    fn perfect_score_iff_exact_match(seed in any::<u64>()) {
        let spec = GridSpec { unique_text: true, empty_prob: 0.0, ..GridSpec::default() };
        let mut r = rng(seed);
        let a = random_grid(&mut r, &spec);
        // Either a copy with one span split or an unrelated grid.
        let b = if seed % 2 == 0 { random_grid(&mut r, &spec) } else { a.clone() };
        for criterion in Criterion::ALL {
            let perfect = grits(&a, &b, criterion).score == 1.0;
            prop_assert_eq!(perfect, grid_exact_match(&a, &b, criterion));
        }
    }

    #[test]
    fn heuristic_is_feasible_and_bounded_by_oracle(seed in any::<u64>()) {
        let (a, b) = small_pair(seed, GridSpec::small(LIMIT));
        for criterion in Criterion::ALL {
            let h = align_2d_factored(&a, &b, criterion);
            let x = align_2d_exact(&a, &b, criterion, LIMIT).unwrap();
            prop_assert!(h.is_monotone() && x.is_monotone());
            prop_assert!(h.tp_score <= x.tp_score + 1e-12);
        }
    }

    #[test]
    fn heuristic_is_exact_on_sub_grid_deletions(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_grid(&mut r, &GridSpec::small(LIMIT));
        let rows = random_subset(&mut r, a.n_rows());
        let cols = random_subset(&mut r, a.n_cols());
        let b = sub_grid(&a, &rows, &cols).unwrap();
        for criterion in Criterion::ALL {
            for (g, p) in [(&a, &b), (&b, &a)] {
                let h = align_2d_factored(g, p, criterion);
                let x = align_2d_exact(g, p, criterion, LIMIT).unwrap();
                prop_assert_eq!(h.tp_score, x.tp_score, "{:?} {:?}", criterion, (&rows, &cols));
            }
        }
    }
}

#[test]
fn appended_column_scores_point_eight() {
    let cell = |r, c, t: &str| LogicalCell::new(CellSpan::single(r, c), t);
    let gt = build_grid(
        2,
        2,
        [
            cell(0, 0, "a"),
            cell(0, 1, "b"),
            cell(1, 0, "c"),
            cell(1, 1, "d"),
        ],
    )
    .unwrap();
    let pred = build_grid(
        2,
        3,
        [
            cell(0, 0, "a"),
            cell(0, 1, "b"),
            cell(0, 2, "xyz"),
            cell(1, 0, "c"),
            cell(1, 1, "d"),
            cell(1, 2, "uvw"),
        ],
    )
    .unwrap();
    let r = grits(&gt, &pred, Criterion::Con);
    assert_eq!(r.tp, 4.0);
    assert!((r.score - 0.8).abs() < 1e-12);
    let x = align_2d_exact(&gt, &pred, Criterion::Con, LIMIT).unwrap();
    assert_eq!(x.tp_score, 4.0);
    assert_eq!(x.col_map, vec![(0, 0), (1, 1)]);
}

#[test]
fn oracle_rejects_large_grids() {
    let cells =
        (0..5).flat_map(|r| (0..5).map(move |c| LogicalCell::new(CellSpan::single(r, c), "")));
    let g = build_grid(5, 5, cells).unwrap();
    assert!(align_2d_exact(&g, &g, Criterion::Top, LIMIT).is_err());
}

#[test]
fn oracle_gap_summary() {
    // Reports how often the single-pass heuristic is strictly below the
    // optimum on unrelated small grids.
    let cases = 300;
    let mut gaps = [0usize; 2];
    let mut worst = [0.0f64; 2];
    for seed in 0..cases {
        let (a, b) = small_pair(seed, GridSpec::small(LIMIT));
        for (k, criterion) in Criterion::ALL.into_iter().enumerate() {
            let h = align_2d_factored(&a, &b, criterion).tp_score;
            let x = align_2d_exact(&a, &b, criterion, LIMIT).unwrap().tp_score;
            if h < x {
                gaps[k] += 1;
                worst[k] = worst[k].max(x - h);
            }
        }
    }
    for (k, criterion) in Criterion::ALL.into_iter().enumerate() {
        println!(
            "heuristic gap {}: {}/{} pairs below optimum, worst tp gap {:.4}",
            criterion.name(),
            gaps[k],
            cases,
            worst[k]
        );
    }
}
