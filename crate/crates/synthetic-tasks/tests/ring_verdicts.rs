//! The three reference verdicts on the ring dataset: a horizontal-axis
//! reflection is correct equivariance, a half-turn rotation is
//! incorrect (witnessed at the diagonal point), and scaling is
//! extrinsic (every scaled point leaves the annulus).

use group_core::{make_group, rep_matrix, GroupKind, RepKind};
use symmetry_diagnostics::{classify_action, PredicateOracle, VerdictKind};
use synthetic_tasks::ring::{make_ring_dataset, named_points, BLUE, ORANGE};
use tensor_autodiff::rng::seeded;

fn apply_2d(m: &group_core::RepMatrix, p: &Vec<f64>) -> Vec<f64> {
    m.apply(p)
}

#[test]
fn reflection_across_horizontal_axis_is_correct() {
    let ds = make_ring_dataset(64, 0.1, &mut seeded(1), true);
    let d1 = make_group(GroupKind::Dihedral, 1).unwrap();
    let oracle = PredicateOracle {
        predicate: |p: &Vec<f64>| ds.membership(p),
    };
    let verdict = classify_action(
        &ds.points,
        &ds.labels,
        &d1,
        |g, p| apply_2d(&rep_matrix(&d1, RepKind::Standard2d, g), p),
        |_, l| l,
        &oracle,
        4,
    )
    .unwrap();
    assert_eq!(verdict.overall, VerdictKind::Correct);
    // the mirror pair: reflecting (-a, a) lands on (-a, -a), both blue
    let pts = named_points();
    assert_eq!(ds.labels[2], BLUE);
    let reflected = vec![pts[2][0], -pts[2][1]];
    assert_eq!(ds.membership(&reflected), Some(BLUE));
}

#[test]
fn half_turn_rotation_is_incorrect_with_diagonal_witness() {
    let ds = make_ring_dataset(64, 0.1, &mut seeded(2), true);
    let c2 = make_group(GroupKind::Cyclic, 2).unwrap();
    let oracle = PredicateOracle {
        predicate: |p: &Vec<f64>| ds.membership(p),
    };
    let verdict = classify_action(
        &ds.points,
        &ds.labels,
        &c2,
        |g, p| apply_2d(&rep_matrix(&c2, RepKind::Standard2d, g), p),
        |_, l| l,
        &oracle,
        64,
    )
    .unwrap();
    assert_eq!(verdict.overall, VerdictKind::Incorrect);
    // sample 0 is (a, a), orange; its half-turn image (-a, -a) is blue
    assert_eq!(ds.labels[0], ORANGE);
    assert!(verdict
        .incorrect_witnesses
        .iter()
        .any(|&(sample, _)| sample == 0));
}

#[test]
fn doubling_scale_is_extrinsic() {
    let ds = make_ring_dataset(64, 0.1, &mut seeded(3), true);
    // the scaling check uses a two-element group whose non-identity
    // element doubles the vector; only non-identity elements are
    // tallied, so the order-2 structure is never exercised
    let c2 = make_group(GroupKind::Cyclic, 2).unwrap();
    let oracle = PredicateOracle {
        predicate: |p: &Vec<f64>| ds.membership(p),
    };
    let verdict = classify_action(
        &ds.points,
        &ds.labels,
        &c2,
        |g, p| {
            if g.index == 0 {
                p.clone()
            } else {
                vec![2.0 * p[0], 2.0 * p[1]]
            }
        },
        |_, l| l,
        &oracle,
        4,
    )
    .unwrap();
    assert_eq!(verdict.overall, VerdictKind::Extrinsic);
    assert_eq!(verdict.extrinsic_count, 64);
    // the generic orange point is among the witnesses when requested
    assert!(verdict.extrinsic_witnesses.iter().any(|&(s, _)| s == 3));
}
