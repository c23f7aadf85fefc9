use proptest::prelude::*;
use tensorcs::io::{decode_dtf1, encode_dtf1};
use tensorcs::l1::{solve_bp, solve_bpdn};
use tensorcs::pipeline::{dct_forward, dct_inverse, dct_sparsify, psnr};
use tensorcs::sensing::{generate_ensemble, sample};
use tensorcs::tensor::{fold, kronecker, l1_norm, mode_product, unfold};
use tensorcs::{DenseMatrix, DenseTensor, Distribution, SolverSettings};

fn dims_strategy(max_order: usize, max_len: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1..=max_len, 1..=max_order)
}

fn tensor_strategy(max_order: usize, max_len: usize) -> impl Strategy<Value = DenseTensor> {
    dims_strategy(max_order, max_len).prop_flat_map(|dims| {
        let n: usize = dims.iter().product();
        prop::collection::vec(-10.0..10.0f64, n)
            .prop_map(move |data| DenseTensor::new(dims.clone(), data).unwrap())
    })
}

fn matrix_strategy(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-3.0..3.0f64, rows * cols)
        .prop_map(move |d| DenseMatrix::from_col_major(rows, cols, d).unwrap())
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

// Multi-index of linear position `p` under first-index-fastest ordering.
fn multi_index(mut p: usize, dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .map(|&n| {
            let i = p % n;
            p /= n;
            i
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mode_product_matches_index_sum(x in tensor_strategy(3, 4), mode in 0usize..3, rows in 1usize..6,
                                      entries in prop::collection::vec(-3.0..3.0f64, 24)) {
        let mode = mode % x.order();
        let n = x.dims()[mode];
        let u = DenseMatrix::from_col_major(rows, n, entries[..rows * n].to_vec()).unwrap();
        let got = mode_product(&x, &u, mode).unwrap();
        let mut out_dims = x.dims().to_vec();
        out_dims[mode] = rows;
        prop_assert_eq!(got.dims(), &out_dims[..]);
        for p in 0..got.len() {
            let idx = multi_index(p, &out_dims);
            let mut src = idx.clone();
            let mut want = 0.0;
            for j in 0..n {
                src[mode] = j;
                want += u.get(idx[mode], j) * x.get(&src);
            }
            prop_assert!((got.get(&idx) - want).abs() <= 1e-10 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn fold_inverts_unfold(x in tensor_strategy(4, 4), mode in 0usize..4) {
        let mode = mode % x.order();
        let back = fold(&unfold(&x, mode).unwrap(), mode, x.dims()).unwrap();
        prop_assert_eq!(back.data(), x.data());
    }

    #[test]
    fn kronecker_mixed_product(a in matrix_strategy(2, 3), b in matrix_strategy(3, 2),
                               c in matrix_strategy(3, 2), d in matrix_strategy(2, 3)) {
        let lhs = kronecker(&a, &b).matmul(&kronecker(&c, &d)).unwrap();
        let rhs = kronecker(&a.matmul(&c).unwrap(), &b.matmul(&d).unwrap());
        prop_assert!(close(lhs.data(), rhs.data(), 1e-10));
    }

    #[test]
    fn sampling_equals_kronecker_operator(x in tensor_strategy(3, 4), seed in 0u64..1000) {
        let m: Vec<usize> = x.dims().iter().map(|&n| n.max(2) - 1).collect();
        let ens = generate_ensemble(x.dims(), &m, Distribution::Gaussian, seed).unwrap();
        let y = sample(&x, &ens).unwrap();
        let direct = ens.kronecker_operator().unwrap().matvec(x.data()).unwrap();
        prop_assert!(close(y.data(), &direct, 1e-10));
    }

    #[test]
    fn dct_is_an_isometry(x in tensor_strategy(3, 6)) {
        let c = dct_forward(&x).unwrap();
        prop_assert!((c.frobenius_norm() - x.frobenius_norm()).abs() <= 1e-10 * (1.0 + x.frobenius_norm()));
        let back = dct_inverse(&c).unwrap();
        prop_assert!(close(back.data(), x.data(), 1e-10));
    }

    #[test]
    fn sparsify_is_idempotent(x in tensor_strategy(2, 8), k0 in 1usize..8, k1 in 1usize..8) {
        let keep: Vec<usize> = [k0, k1][..x.order()].iter().zip(x.dims()).map(|(&k, &n)| k.min(n)).collect();
        let once = dct_sparsify(&x, &keep).unwrap();
        let twice = dct_sparsify(&once, &keep).unwrap();
        prop_assert!(close(twice.data(), once.data(), 1e-9));
    }

    #[test]
    fn doubling_mse_costs_three_db(x in tensor_strategy(2, 6), noise in prop::collection::vec(-1.0..1.0f64, 36)) {
        prop_assume!(noise[..x.len()].iter().any(|v| v.abs() > 1e-3));
        let e = DenseTensor::new(x.dims().to_vec(), noise[..x.len()].to_vec()).unwrap();
        let p1 = psnr(&x, &x.add(&e).unwrap(), 255.0).unwrap();
        let p2 = psnr(&x, &x.add(&e.scaled(2f64.sqrt())).unwrap(), 255.0).unwrap();
        prop_assert!((p1 - p2 - 10.0 * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn dtf1_round_trips(x in tensor_strategy(4, 3)) {
        let back = decode_dtf1(&encode_dtf1(&x)).unwrap();
        prop_assert_eq!(back.dims(), x.dims());
        prop_assert_eq!(back.data(), x.data());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // Any feasible point bounds the optimum, so the generating vector does.
    #[test]
    fn bp_is_feasible_and_no_worse_than_truth(seed in 0u64..10_000, z0 in prop::collection::vec(-2.0..2.0f64, 12)) {
        let a = generate_ensemble(&[12], &[7], Distribution::Gaussian, seed).unwrap().matrices.remove(0);
        let y = a.matvec(&z0).unwrap();
        let s = solve_bp(&a, &y, &SolverSettings::default()).unwrap();
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(s.residual <= 1e-6 * y_norm.max(1.0));
        prop_assert!(s.objective <= l1_norm(&z0) * (1.0 + 1e-6) + 1e-9);
    }

    #[test]
    fn bpdn_respects_the_ball(seed in 0u64..10_000, z0 in prop::collection::vec(-2.0..2.0f64, 10), frac in 0.01..0.5f64) {
        let a = generate_ensemble(&[10], &[6], Distribution::Gaussian, seed).unwrap().matrices.remove(0);
        let y = a.matvec(&z0).unwrap();
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let eps = frac * y_norm;
        let s = solve_bpdn(&a, &y, eps, &SolverSettings::default()).unwrap();
        let r: f64 = a.matvec(&s.z).unwrap().iter().zip(&y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        prop_assert!(r <= eps + 1e-6 * y_norm.max(1.0));
        prop_assert!(s.objective <= l1_norm(&z0) * (1.0 + 1e-6) + 1e-9);
    }
}
