use proptest::prelude::*;

use tablegrid_core::assignment::max_weight_assignment;
use tablegrid_core::grits::{Criterion, GritsResult};
use tablegrid_core::table::{build_grid, CellSpan, LogicalCell, TableGrid};
use tablegrid_core::{
    aggregate_mean, aggregate_pseudo_f1, binary_prf, exact_match_accuracy, match_table_sets,
    TableSetMatch,
};
use tablegrid_testkit::rand::Rng;
use tablegrid_testkit::{max_assignment_value, random_grid, rng, shuffled, GridSpec};

/// Gains on a 1/8 lattice so every summation order gives the same float.
fn lattice_matrix<R: Rng>(r: &mut R, n: usize, m: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..m)
                .map(|_| r.random_range(0..=80) as f64 / 8.0)
                .collect()
        })
        .collect()
}

fn from_gains(gains: &[Vec<f64>]) -> TableSetMatch {
    let n = gains.len();
    let m = gains.first().map_or(0, Vec::len);
    let results: Vec<Vec<GritsResult>> = gains
        .iter()
        .map(|row| {
            row.iter()
                .map(|&tp| GritsResult::new(Criterion::Top, tp, 10, 10))
                .collect()
        })
        .collect();
    TableSetMatch::from_results(Criterion::Top, &vec![10; n], &vec![10; m], &results)
}

#[test]
fn hungarian_equals_permutation_maximum() {
    let mut r = rng(3);
    for _ in 0..1000 {
        let n = r.random_range(0..=5);
        let m = r.random_range(0..=5);
        let gains = lattice_matrix(&mut r, n, m);
        let matched = from_gains(&gains);
        assert_eq!(matched.assignment.len(), n.min(m));
        assert_eq!(
            matched.total_tp(),
            max_assignment_value(&gains),
            "{gains:?}"
        );
    }
}

#[test]
fn ties_resolve_to_lowest_indices() {
    assert_eq!(
        max_weight_assignment(&[vec![1.0, 1.0], vec![1.0, 1.0]]),
        vec![(0, 0), (1, 1)]
    );
    assert_eq!(max_weight_assignment(&[vec![0.0, 0.0, 0.0]]), vec![(0, 0)]);
    assert_eq!(
        max_weight_assignment(&[vec![2.0, 2.0, 1.0], vec![2.0, 0.0, 0.0]]),
        vec![(0, 1), (1, 0)]
    );
}

fn grid_set(seed: u64, n: usize) -> Vec<TableGrid> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| random_grid(&mut r, &GridSpec::default()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn grid_sets_match_optimally(seed in any::<u64>(), n in 0usize..4, m in 0usize..4) {
        let gt = grid_set(seed, n);
        let pred = grid_set(seed ^ 0x5EED, m);
        for criterion in Criterion::ALL {
            let matched = match_table_sets(&gt, &pred, criterion);
            let gains: Vec<Vec<f64>> = gt
                .iter()
                .map(|g| pred.iter().map(|p| tablegrid_core::grits(g, p, criterion).tp).collect())
                .collect();
            let best = max_assignment_value(&gains);
            prop_assert!((matched.total_tp() - best).abs() <= 1e-9 * best.max(1.0));
            prop_assert_eq!(matched.per_gt_results.len(), n);
            prop_assert_eq!(matched.unmatched_gt.len() + matched.assignment.len(), n);
            prop_assert_eq!(matched.unmatched_pred.len() + matched.assignment.len(), m);
        }
    }

    #[test]
    fn permuting_predictions_relabels_the_assignment(seed in any::<u64>()) {
        let mut r = rng(seed);
        let gt = grid_set(seed, 3);
        let spec = GridSpec { unique_text: true, ..GridSpec::default() };
        let pred: Vec<TableGrid> = (0..3).map(|_| random_grid(&mut r, &spec)).collect();
        let order = shuffled(&mut r, (0..3).collect::<Vec<usize>>());
        let permuted: Vec<TableGrid> = order.iter().map(|&i| pred[i].clone()).collect();
        let a = match_table_sets(&gt, &pred, Criterion::Con);
        let b = match_table_sets(&gt, &permuted, Criterion::Con);
        prop_assert!((a.total_tp() - b.total_tp()).abs() < 1e-9);
        // The optimum is unique when no other assignment reaches its total.
        let gains: Vec<Vec<f64>> = gt
            .iter()
            .map(|g| pred.iter().map(|p| tablegrid_core::grits(g, p, Criterion::Con).tp).collect())
            .collect();
        let runner_up = (0..3)
            .flat_map(|x| (0..3).map(move |y| (x, y)))
            .filter(|&(x, y)| a.pred_for(x) == Some(y))
            .map(|(x, y)| {
                let mut masked = gains.clone();
                masked[x][y] = -1e6;
                max_assignment_value(&masked)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        if runner_up < a.total_tp() - 1e-6 {
            let relabeled: Vec<(usize, usize)> =
                b.assignment.iter().map(|&(g, p)| (g, order[p])).collect();
            prop_assert_eq!(relabeled, a.assignment);
        }
    }

    #[test]
    fn equal_sizes_make_pseudo_f1_the_mean(
        tps in proptest::collection::vec(0u32..=12, 1..20),
    ) {
        let results: Vec<GritsResult> = tps
            .iter()
            .map(|&tp| GritsResult::new(Criterion::Con, tp as f64 / 2.0, 6, 6))
            .collect();
        let mean = aggregate_mean(&results).unwrap().f1;
        let pf1 = aggregate_pseudo_f1(&results).unwrap();
        prop_assert!((mean - pf1.f1).abs() <= 1e-12);
        for v in [mean, pf1.f1, pf1.precision.unwrap(), pf1.recall.unwrap()] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn unmatchable_prediction_lowers_only_precision(
        tps in proptest::collection::vec((0u32..=8, 1usize..=8, 1usize..=8), 1..10),
        extra in 1usize..20,
    ) {
        let mut results: Vec<GritsResult> = tps
            .iter()
            .map(|&(tp, g, p)| {
                let tp = (tp as f64 / 8.0) * g.min(p) as f64;
                GritsResult::new(Criterion::Top, tp, g, p)
            })
            .collect();
        let before = aggregate_pseudo_f1(&results).unwrap();
        results.push(GritsResult::unmatched_pred(Criterion::Top, extra));
        let after = aggregate_pseudo_f1(&results).unwrap();
        prop_assert!(after.precision.unwrap() <= before.precision.unwrap());
        prop_assert_eq!(after.recall, before.recall);
    }
}

fn square(tag: &str) -> TableGrid {
    let cells = (0..2).flat_map(|r| {
        (0..2).map(move |c| LogicalCell::new(CellSpan::single(r, c), format!("{tag}{r}{c}")))
    });
    build_grid(2, 2, cells).unwrap()
}

#[test]
fn two_table_aggregation_fixture() {
    let perfect = GritsResult::new(Criterion::Top, 4.0, 4, 4);
    let missing = GritsResult::unmatched_gt(Criterion::Top, 4);
    let results = [perfect, missing];
    assert!((aggregate_mean(&results).unwrap().f1 - 0.5).abs() <= 1e-9);
    let pf1 = aggregate_pseudo_f1(&results).unwrap();
    assert_eq!(pf1.precision, Some(1.0));
    assert_eq!(pf1.recall, Some(0.5));
    assert!((pf1.f1 - 2.0 / 3.0).abs() <= 1e-9);
}

#[test]
fn exact_match_accuracy_counts_ground_truth_tables() {
    let g = square("a");
    let mut changed = g.clone().into_cells();
    changed[3].text = "other".into();
    let changed = build_grid(2, 2, changed).unwrap();
    assert_eq!(
        exact_match_accuracy(&[(&g, Some(&g))], Criterion::Con),
        Ok(1.0)
    );
    assert_eq!(exact_match_accuracy(&[(&g, None)], Criterion::Con), Ok(0.0));
    let pairs = [(&g, Some(&g)), (&g, Some(&changed))];
    assert_eq!(exact_match_accuracy(&pairs, Criterion::Con), Ok(0.5));
    assert_eq!(exact_match_accuracy(&pairs, Criterion::Top), Ok(1.0));
    assert!(exact_match_accuracy(&[], Criterion::Top).is_err());
}

#[test]
fn binary_scores_by_hand() {
    let s = binary_prf(&[true, true, false, false], &[true, false, true, false]).unwrap();
    assert_eq!((s.recall, s.precision, s.f1), (0.5, 0.5, 0.5));
    let s = binary_prf(&[true, false], &[false, false]).unwrap();
    assert_eq!((s.recall, s.precision, s.f1), (0.0, 0.0, 0.0));
    assert!(binary_prf(&[true], &[]).is_err());
}
