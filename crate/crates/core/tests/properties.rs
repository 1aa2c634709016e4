//! Property tests for the sequence algebra and selection invariants.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use tsglasso::graph::select_edges;
use tsglasso::matseq::{CMatrix, IndexSet, MatrixSequence};

/// Strategy for a Hermitian sequence with bounded entries.
fn hermitian_seq(f_max: usize, p_max: usize) -> impl Strategy<Value = MatrixSequence> {
    (1..=f_max, 1..=p_max).prop_flat_map(|(f_len, p)| {
        proptest::collection::vec(
            proptest::collection::vec(-5.0f64..5.0, p * p * 2),
            f_len,
        )
        .prop_map(move |raw| {
            let mats = raw
                .into_iter()
                .map(|vals| {
                    let m = CMatrix::from_fn(p, p, |i, j| {
                        let k = 2 * (i * p + j);
                        Complex64::new(vals[k], vals[k + 1])
                    });
                    let adj = m.adjoint();
                    (m + adj).scale(0.5)
                })
                .collect();
            MatrixSequence::new(mats).expect("symmetrized matrices are Hermitian")
        })
    })
}

/// A pair of sequences sharing one shape.
fn hermitian_pair() -> impl Strategy<Value = (MatrixSequence, MatrixSequence)> {
    (1usize..=3, 1usize..=4).prop_flat_map(|(f_len, p)| {
        let gen = proptest::collection::vec(
            proptest::collection::vec(-5.0f64..5.0, p * p * 2),
            f_len,
        )
        .prop_map(move |raw| {
            let mats = raw
                .into_iter()
                .map(|vals| {
                    let m = CMatrix::from_fn(p, p, |i, j| {
                        let k = 2 * (i * p + j);
                        Complex64::new(vals[k], vals[k + 1])
                    });
                    let adj = m.adjoint();
                    (m + adj).scale(0.5)
                })
                .collect();
            MatrixSequence::new(mats).expect("hermitian")
        });
        (gen.clone(), gen)
    })
}

proptest! {
    #[test]
    fn l1_triangle_inequality((a, b) in hermitian_pair()) {
        let lhs = a.add(&b).l1_norm();
        let rhs = a.l1_norm() + b.l1_norm();
        prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs));
    }

    #[test]
    fn block_norm_is_symmetric(x in hermitian_seq(3, 4)) {
        for i in 0..x.dim() {
            for j in 0..x.dim() {
                let d = (x.block_norm(i, j) - x.block_norm(j, i)).abs();
                prop_assert!(d <= 1e-12);
            }
        }
    }

    #[test]
    fn self_inner_product_nonnegative(x in hermitian_seq(3, 4)) {
        // tr(X[f]^2) = sum of squared eigenvalues >= 0 for Hermitian X.
        prop_assert!(x.inner_product(&x).unwrap() >= -1e-12);
    }

    #[test]
    fn support_of_restriction_is_contained(x in hermitian_seq(3, 4), mask_bits in proptest::collection::vec(any::<bool>(), 16)) {
        let p = x.dim();
        let mut pairs = Vec::new();
        for i in 0..p {
            for j in 0..=i {
                if mask_bits[i * 4 + j] {
                    pairs.push((i, j));
                    pairs.push((j, i));
                }
            }
        }
        let s = IndexSet::new(p, pairs).unwrap();
        let restricted = x.restrict_support(&s).unwrap();
        prop_assert!(restricted.gsupport(0.0).is_subset_of(&s));
    }

    #[test]
    fn frobenius_matches_elementwise_oracle(x in hermitian_seq(3, 4)) {
        let f_len = x.f_len() as f64;
        let mut oracle = 0.0;
        for m in x.mats() {
            for v in m.iter() {
                oracle += v.norm_sqr() / f_len;
            }
        }
        prop_assert!((x.frobenius_norm_sq() - oracle).abs() <= 1e-9 * (1.0 + oracle));
    }

    #[test]
    fn edge_selection_monotone_in_eta(x in hermitian_seq(3, 5), eta1 in 1e-6f64..1.0, eta2 in 1e-6f64..1.0) {
        let (lo, hi) = if eta1 <= eta2 { (eta1, eta2) } else { (eta2, eta1) };
        let loose = select_edges(&x, lo);
        let tight = select_edges(&x, hi);
        prop_assert!(tight.is_subset_of(&loose));
    }

    #[test]
    fn matseq_io_roundtrip(x in hermitian_seq(3, 4)) {
        let mut buf = Vec::new();
        tsglasso::io::write_matrix_sequence_to(&mut buf, &x).unwrap();
        let back = tsglasso::io::read_matrix_sequence_from(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(x, back);
    }

    #[test]
    fn samples_transpose_slices_agree_with_acf_definition(
        rows in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 3), 4..12),
        max_lag in 0usize..3,
    ) {
        // Direct O(N p^2) summation oracle for the biased ACF.
        let n = rows.len();
        let data = DMatrix::from_fn(n, 3, |i, j| rows[i][j]);
        let x = tsglasso::spectrum::SampleMatrix::new(data.clone()).unwrap();
        let acf = tsglasso::spectrum::acf_biased(&x, max_lag).unwrap();
        for m in 0..=max_lag {
            for i in 0..3 {
                for j in 0..3 {
                    let mut acc = 0.0;
                    for t in m..n {
                        acc += data[(t, i)] * data[(t - m, j)];
                    }
                    acc /= n as f64;
                    prop_assert!((acf.lag(m)[(i, j)] - acc).abs() <= 1e-12);
                }
            }
        }
    }
}
