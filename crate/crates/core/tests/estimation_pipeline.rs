mod common;

use common::{counts, max_diff, COUNTS, REF_INDEXES, REF_P, REF_PARAMS, REF_Q, REF_R};
use occmob_core::estimation::{
    amend_decomposition, bootstrap, decompose, estimate, estimate_p, shares_from_counts, solve_r, TransitionCounts,
};
use occmob_core::io::{CohortSpec, MicroRecord};
use occmob_core::model::identify_params;
use occmob_core::{OccClass, TransitionMatrix};
use proptest::prelude::*;

#[test]
fn counts_reproduce_reference_p() {
    for k in 0..3 {
        let p = estimate_p(&counts(k)).unwrap();
        assert!(max_diff(&p.rows(), &REF_P[k]) <= 0.005 + 1e-12, "cohort {k}");
    }
}

#[test]
fn reference_shares_for_the_first_cohort() {
    let (f, c) = shares_from_counts(&counts(0)).unwrap();
    for (got, want) in f.as_array().iter().zip([0.51, 0.44, 0.06]) {
        assert!((got - want).abs() < 0.006);
    }
    for (got, want) in c.as_array().iter().zip([0.35, 0.49, 0.16]) {
        assert!((got - want).abs() < 0.006);
    }
}

#[test]
fn decompositions_match_reference_matrices() {
    for k in 0..3 {
        let d = decompose(&counts(k)).unwrap();
        assert!(max_diff(&d.r.rows(), &REF_R[k]) <= 0.03, "R cohort {k}: {:?}", d.r.rows());
        assert!(max_diff(&d.q.rows(), &REF_Q[k]) <= 0.03, "Q cohort {k}: {:?}", d.q.rows());
        assert!(d.qr_residual < 0.05, "cohort {k}: {}", d.qr_residual);
        if !d.amended {
            assert!(d.qr_residual <= 1e-6);
        }
    }
}

#[test]
fn indexes_match_reference_values() {
    for k in 0..3 {
        let e = estimate(&counts(k)).unwrap();
        let got = [e.indexes.i_obs, e.indexes.i_os, e.indexes.i_true];
        for (g, w) in got.iter().zip(REF_INDEXES[k]) {
            assert!((g - w).abs() <= 0.02, "cohort {k}: {got:?}");
        }
        assert!((e.indexes.i_obs - e.indexes.i_true * e.indexes.i_os).abs() <= 1e-9);
        assert!((e.indexes.i_loi - (e.indexes.i_opp - e.indexes.i_true)).abs() <= 1e-9);
    }
}

#[test]
fn identification_of_estimated_q_is_close_to_reference() {
    for k in 0..3 {
        let e = estimate(&counts(k)).unwrap();
        for (g, w) in e.identification.params.to_array().iter().zip(REF_PARAMS[k]) {
            assert!((g - w).abs() <= 0.03, "cohort {k}: {:?}", e.identification.params);
        }
    }
}

#[test]
fn third_cohort_upper_row() {
    let d = decompose(&counts(2)).unwrap();
    let row = d.q.rows()[2];
    for (g, w) in row.iter().zip([0.15, 0.53, 0.31]) {
        assert!((g - w).abs() <= 0.03, "{row:?}");
    }
}

#[test]
fn identity_counts_decompose_trivially() {
    let c = TransitionCounts::new([[5.0, 0.0, 0.0], [0.0, 5.0, 0.0], [0.0, 0.0, 5.0]]).unwrap();
    let d = decompose(&c).unwrap();
    let id = TransitionMatrix::identity();
    assert_eq!((d.p, d.q, d.r), (id, id, id));
    assert!(!d.amended);
}

#[test]
fn equal_counts_give_uniform_p() {
    let p = estimate_p(&TransitionCounts::new([[2.0; 3]; 3]).unwrap()).unwrap();
    assert!(p.rows().iter().flatten().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
}

#[test]
fn single_cell_shares() {
    let mut c = TransitionCounts::zeros();
    c.add(OccClass::Working, OccClass::Upper, 4.0);
    let (f, ch) = shares_from_counts(&c).unwrap();
    assert_eq!(f.as_array(), [1.0, 0.0, 0.0]);
    assert_eq!(ch.as_array(), [0.0, 0.0, 1.0]);
}

#[test]
fn amendment_trivial_cases() {
    let p = estimate_p(&counts(0)).unwrap();
    let a = amend_decomposition(&p, &p).unwrap();
    assert!(!a.amended);
    assert!(a.q.max_abs_diff(&TransitionMatrix::identity()) < 1e-9);
    let a = amend_decomposition(&p, &TransitionMatrix::identity()).unwrap();
    assert!(!a.amended);
    assert!(a.q.max_abs_diff(&p) < 1e-15);
}

#[test]
fn amendment_fires_on_first_cohort() {
    let p = estimate_p(&counts(0)).unwrap();
    let (f, c) = shares_from_counts(&counts(0)).unwrap();
    let r0 = solve_r(&f, &c).unwrap();
    assert!((p.as_matrix() * r0.try_inverse().unwrap()).min() < 0.0);
    let a = amend_decomposition(&p, &r0).unwrap();
    assert!(a.amended && a.passes >= 1);
    assert!(a.q.as_matrix().min() >= 0.0);
    assert!(identify_params(&a.q).is_ok());
}

fn micro_records(cells: [[f64; 3]; 3], year: i32, copies: usize) -> Vec<MicroRecord> {
    let mut out = Vec::new();
    for _ in 0..copies {
        for f in OccClass::ALL {
            for c in OccClass::ALL {
                for _ in 0..cells[f.index()][c.index()] as usize {
                    out.push(MicroRecord::new(year, f, c));
                }
            }
        }
    }
    out
}

#[test]
fn bootstrap_errors_shrink_with_root_n() {
    let cohort = CohortSpec::new("I", 1940, 1951);
    let single = bootstrap(&micro_records(COUNTS[0], 1945, 1), &cohort, 600, 17).unwrap();
    let double = bootstrap(&micro_records(COUNTS[0], 1945, 2), &cohort, 600, 17).unwrap();
    assert_eq!(single.dropped, 0);
    let sqrt2 = 2f64.sqrt();
    for ((name, a), b) in
        occmob_core::estimation::EstimateVector::NAMES.iter().zip(single.se.to_array()).zip(double.se.to_array())
    {
        let ratio = a / b;
        assert!((ratio / sqrt2 - 1.0).abs() <= 0.15, "{name}: {a} / {b} = {ratio}");
    }
}

proptest! {
    #[test]
    fn p_is_scale_invariant(cells in proptest::array::uniform3(proptest::array::uniform3(1.0..500.0f64)), k in 0.01..100.0f64) {
        let a = estimate_p(&TransitionCounts::new(cells).unwrap()).unwrap();
        let b = estimate_p(&TransitionCounts::new(cells.map(|r| r.map(|v| v * k))).unwrap()).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-12);
    }

    #[test]
    fn children_shares_are_propagated_fathers(cells in proptest::array::uniform3(proptest::array::uniform3(0.1..500.0f64))) {
        let c = TransitionCounts::new(cells).unwrap();
        let (f, ch) = shares_from_counts(&c).unwrap();
        let implied = estimate_p(&c).unwrap().propagate(&f);
        for j in 0..3 {
            prop_assert!((implied[j] - ch.as_array()[j]).abs() <= 1e-9);
        }
    }

    #[test]
    fn decompositions_are_consistent(cells in proptest::array::uniform3(proptest::array::uniform3(1.0..500.0f64))) {
        let c = TransitionCounts::new(cells).unwrap();
        if let Ok(d) = decompose(&c) {
            for m in [d.p, d.q, d.r] {
                for row in m.rows() {
                    prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                    prop_assert!(row.iter().all(|&v| v >= 0.0));
                }
            }
            if !d.amended {
                prop_assert!(d.qr_residual <= 1e-6);
            }
        }
    }
}
