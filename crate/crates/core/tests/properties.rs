use nalgebra::DMatrix;
use proptest::prelude::*;
use trp_core::projection::{MapKind, MapSpec};
use trp_core::sketch::{low_rank_approx, relative_error, sketch, ssvr, SketchConfig};
use trp_core::{
    khatri_rao, khatri_rao_all, kron_vec, mode_n_fold, mode_n_unfold, qr_orthonormal, sample_matrix,
    ConventionalRp, DenseMatrix, DenseTensor, DistFamily, EntryDistribution, Projection, SeedSpec,
    TensorRandomProjection,
};

fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    sample_matrix(&EntryDistribution::Gaussian, rows, cols, &SeedSpec::new(seed)).unwrap()
}

fn numerical_rank(m: &DenseMatrix, rel_tol: f64) -> usize {
    let a = DMatrix::from_row_slice(m.rows(), m.cols(), m.data());
    let sv = a.singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(1usize..6, 1..4)
}

fn family_strategy() -> impl Strategy<Value = DistFamily> {
    prop_oneof![
        Just(DistFamily::Gaussian),
        Just(DistFamily::Sparse { delta: 1.0 / 3.0 }),
        Just(DistFamily::VerySparse),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn khatri_rao_is_associative(i in 1usize..5, j in 1usize..5, l in 1usize..5, k in 1usize..5, seed in any::<u64>()) {
        let a = gaussian(i, k, seed);
        let b = gaussian(j, k, seed ^ 1);
        let c = gaussian(l, k, seed ^ 2);
        let left = khatri_rao(&khatri_rao(&a, &b).unwrap(), &c).unwrap();
        let right = khatri_rao(&a, &khatri_rao(&b, &c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) <= 1e-12);
    }

    #[test]
    fn khatri_rao_columns_are_kronecker_products(dims in dims_strategy(), k in 1usize..4, seed in any::<u64>()) {
        let factors: Vec<DenseMatrix> = dims.iter().enumerate().map(|(n, &d)| gaussian(d, k, seed.wrapping_add(n as u64))).collect();
        let kr = khatri_rao_all(&factors).unwrap();
        for j in 0..k {
            let cols: Vec<_> = factors.iter().map(|f| f.column(j)).collect();
            let kron = kron_vec(&cols).unwrap();
            let col = kr.column(j);
            prop_assert_eq!(col.as_slice(), kron.as_slice());
        }
    }

    #[test]
    fn unfolding_preserves_entries(dims in proptest::collection::vec(1usize..5, 1..5), seed in any::<u64>()) {
        let len: usize = dims.iter().product();
        let t = DenseTensor::new(dims.clone(), gaussian(len, 1, seed).into_data()).unwrap();
        for n in 1..=dims.len() {
            let m = mode_n_unfold(&t, n).unwrap();
            prop_assert_eq!(m.shape(), (dims[n - 1], len / dims[n - 1]));
            prop_assert!((m.frobenius_norm() - t.frobenius_norm()).abs() <= 1e-12 * (1.0 + t.frobenius_norm()));
            prop_assert_eq!(mode_n_fold(&m, n, &dims).unwrap(), t.clone());
        }
    }

    #[test]
    fn qr_invariants(m in 1usize..12, k in 1usize..8, seed in any::<u64>(), dup in any::<bool>()) {
        prop_assume!(k <= m);
        let mut a = gaussian(m, k, seed);
        if dup && k >= 2 {
            for i in 0..m {
                let v = a.get(i, 0);
                a.set(i, k - 1, 2.0 * v);
            }
        }
        let qr = qr_orthonormal(&a).unwrap();
        let qtq = qr.q.t_matmul(&qr.q).unwrap();
        prop_assert!(qtq.max_abs_diff(&DenseMatrix::identity(qr.rank)) <= 1e-10);
        prop_assert!(qr.q.matmul(&qr.r).unwrap().max_abs_diff(&a) <= 1e-10 * (1.0 + a.frobenius_norm()));
        if dup && k >= 2 {
            prop_assert!(qr.rank < k);
        }
    }

    #[test]
    fn trp_apply_matches_dense_oracle(dims in dims_strategy(), k in 1usize..5, family in family_strategy(), seed in any::<u64>()) {
        let map = TensorRandomProjection::build_family(&dims, k, family, &SeedSpec::new(seed)).unwrap();
        let d = map.input_dim();
        let x = gaussian(d, 1, seed ^ 7);
        let want = map.materialize().unwrap().t_matmul(&x).unwrap();
        let got = map.apply(x.data()).unwrap();
        let scale = 1.0 / (k as f64).sqrt();
        for (g, w) in got.iter().zip(want.data()) {
            prop_assert!((g - w * scale).abs() <= 1e-10 * (1.0 + w.abs()));
        }
    }

    #[test]
    fn maps_are_linear(dims in dims_strategy(), k in 1usize..5, kind in 0usize..3, a in -3.0f64..3.0, b in -3.0f64..3.0, seed in any::<u64>()) {
        let kind = [MapKind::Rp, MapKind::Trp, MapKind::TrpEnsemble { replicates: 3 }][kind];
        let map = MapSpec::new(kind, dims, k, DistFamily::Gaussian).build(&SeedSpec::new(seed)).unwrap();
        let d = map.input_dim();
        let x = gaussian(d, 1, seed ^ 1).into_data();
        let y = gaussian(d, 1, seed ^ 2).into_data();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let (fx, fy, fc) = (map.apply(&x).unwrap(), map.apply(&y).unwrap(), map.apply(&combo).unwrap());
        for i in 0..k {
            prop_assert!((fc[i] - (a * fx[i] + b * fy[i])).abs() <= 1e-10 * (1.0 + fc[i].abs()));
        }
    }

    #[test]
    fn trp_storage_never_exceeds_dense(dims in proptest::collection::vec(1usize..30, 2..4), k in 1usize..50, t in 1usize..4) {
        let d: usize = dims.iter().product();
        let sum: usize = dims.iter().sum();
        let spec = MapSpec::new(MapKind::TrpEnsemble { replicates: t }, dims.clone(), k, DistFamily::Gaussian);
        let stored = spec.build(&SeedSpec::new(0)).unwrap().storage_count();
        prop_assert_eq!(stored, t * k * sum);
        if t * sum <= d {
            prop_assert!(stored <= k * d);
        }
    }

    #[test]
    fn sketch_projector_is_idempotent(m in 2usize..10, k in 1usize..6, seed in any::<u64>()) {
        prop_assume!(k <= m);
        let x = gaussian(m, 12, seed);
        let omega = TensorRandomProjection::build(&[3, 4], k, EntryDistribution::Gaussian, &SeedSpec::new(seed ^ 3)).unwrap();
        let z = sketch(&x, &omega).unwrap();
        let q = qr_orthonormal(&z).unwrap().q;
        let p = q.matmul(&q.transpose()).unwrap();
        prop_assert!(p.matmul(&p).unwrap().max_abs_diff(&p) <= 1e-10);
    }

    #[test]
    fn projection_never_worsens_error(m in 1usize..10, k in 1usize..6, sparse in any::<bool>(), seed in any::<u64>()) {
        prop_assume!(k <= m);
        let x = gaussian(m, 12, seed);
        let dist = if sparse { EntryDistribution::sparse_sign(1.0 / 3.0).unwrap() } else { EntryDistribution::Gaussian };
        let omega = ConventionalRp::build(12, k, dist, &SeedSpec::new(seed ^ 5)).unwrap();
        let a = low_rank_approx(&x, &omega).unwrap();
        prop_assert!(relative_error(&x, &a.approx).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn ssvr_rank_is_bounded(m in 2usize..14, k in 1usize..4, t in 1usize..5, seed in any::<u64>()) {
        prop_assume!(k <= m);
        let x = gaussian(m, 20, seed);
        let cfg = SketchConfig { dims: vec![4, 5], k, replicates: t, family: DistFamily::Gaussian, seed: SeedSpec::new(seed ^ 9) };
        let a = ssvr(&x, &cfg).unwrap();
        prop_assert!(numerical_rank(&a.approx, 1e-10) <= (t * k).min(m));
        prop_assert!(relative_error(&x, &a.approx).unwrap() <= 1.0 + 1e-12);
    }
}

#[test]
fn nnz_fraction_within_three_sigma() {
    for (dims, family, p) in [
        (vec![50, 50], DistFamily::VerySparse, 1.0 / 50.0),
        (vec![20, 20], DistFamily::Sparse { delta: 1.0 / 3.0 }, 1.0 / 9.0),
        (vec![10, 10, 10], DistFamily::Sparse { delta: 1.0 / 3.0 }, 1.0 / 27.0),
    ] {
        let map = TensorRandomProjection::build_family(&dims, 200, family, &SeedSpec::new(21)).unwrap();
        assert!((map.expected_sparsity() - p).abs() < 1e-12);
        // Each factor's nonzeros are i.i.d. Bernoulli, so test there.
        for f in map.factors() {
            let n = f.data().len() as f64;
            let q = p.powf(1.0 / dims.len() as f64);
            let frac = f.data().iter().filter(|v| **v != 0.0).count() as f64 / n;
            assert!((frac - q).abs() <= 3.0 * (q * (1.0 - q) / n).sqrt(), "{frac} vs {q}");
        }
    }
}
