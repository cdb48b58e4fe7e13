//! Independent oracles for the core building blocks: naive loops, brute
//! force over permutations and pairs, and finite differences.

use flnnsc_core::data::{
    generate_synthetic, load_csv, pca_reduce, save_csv, scale_to_unit, Dataset, Nonlinearity,
    SyntheticSpec,
};
use flnnsc_core::flnn::{
    expand, sample_fit_loss, ActivationKind, ExpansionKind, NetworkState,
};
use flnnsc_core::graph::{knn_similarity, laplacian, WeightKind};
use flnnsc_core::linalg::{matmul, matmul_nt, matmul_tn, solve_linear, svd_thin, sym_eigen};
use flnnsc_core::metrics::{ari, clustering_accuracy, hungarian, nmi, pairwise_f1};
use flnnsc_core::models::{
    fit_ccsc, fit_linear_smr, fit_lsr, objective_flnnsc, update_z, CcscConfig, FlnnscConfig,
};
use flnnsc_core::spectral::{affinity_from_z, spectral_cluster, AffinityGraph, AffinityKind};
use flnnsc_core::{Error, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

fn naive_matmul(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum()
    })
}

#[test]
fn products_match_triple_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for &(m, k, n) in &[(1, 1, 1), (3, 7, 2), (13, 5, 9), (20, 20, 20)] {
        let a = random(m, k, &mut rng);
        let b = random(k, n, &mut rng);
        let want = naive_matmul(&a, &b);
        assert!(matmul(&a, &b).unwrap().sub(&want).unwrap().max_abs() < 1e-13);
        let at = a.transpose();
        assert!(matmul_tn(&at, &b).unwrap().sub(&want).unwrap().max_abs() < 1e-13);
        let bt = b.transpose();
        assert!(matmul_nt(&a, &bt).unwrap().sub(&want).unwrap().max_abs() < 1e-13);
    }
}

#[test]
fn expansion_matches_formula_and_is_lipschitz() {
    use std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let phi = expand(&x, ExpansionKind::Trig2);
    for (i, &v) in x.iter().enumerate() {
        let want = [v, (PI * v).sin(), (PI * v).cos(), (2.0 * PI * v).sin(), (2.0 * PI * v).cos()];
        for (t, w) in want.iter().enumerate() {
            assert!((phi[t * 3 + i] - w).abs() < 1e-15);
        }
    }
    let bound = (1.0 + 2.0 * PI) * 5f64.sqrt();
    for _ in 0..200 {
        let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dist = |p: &[f64], q: &[f64]| {
            p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        };
        let (pa, pb) = (expand(&a, ExpansionKind::Trig2), expand(&b, ExpansionKind::Trig2));
        assert!(dist(&pa, &pb) <= bound * dist(&a, &b) + 1e-12);
    }
}

#[test]
fn activation_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for act in [ActivationKind::Tanh, ActivationKind::Sigmoid, ActivationKind::Identity] {
        for _ in 0..100 {
            let u = rng.gen_range(-3.0..3.0);
            let h = 1e-5;
            let fd = (act.value(u + h) - act.value(u - h)) / (2.0 * h);
            assert!((fd - act.derivative(u)).abs() < 1e-6, "{act:?} at {u}");
        }
    }
}

#[test]
fn forward_matches_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let net = NetworkState::init(3, ActivationKind::Tanh, ExpansionKind::Trig2, 0.1, 0.0, &mut rng)
        .unwrap();
    let x = random(3, 6, &mut rng);
    let h = net.forward_batch(&x).unwrap();
    for j in 0..6 {
        let phi = expand(x.col(j), ExpansionKind::Trig2);
        let u = net.w.mul_vec(&phi).unwrap();
        for (i, ui) in u.iter().enumerate() {
            assert!((h[(i, j)] - ui.tanh()).abs() < 1e-14);
        }
        assert_eq!(net.forward(x.col(j)).unwrap(), h.col(j));
    }
}

/// Central differences of `½‖ρ(Wφ(x_i)) − H z_i‖² + (β/2)‖W‖²` with H fixed.
fn fd_gradient(net: &NetworkState, x_i: &[f64], h: &Matrix, z_i: &[f64], step: f64) -> Matrix {
    let loss = |n: &NetworkState| {
        sample_fit_loss(n, x_i, h, z_i).unwrap() + 0.5 * n.beta * n.w.frobenius_norm_sq()
    };
    let mut g = Matrix::zeros(net.w.rows(), net.w.cols());
    let mut probe = net.clone();
    for j in 0..net.w.cols() {
        for i in 0..net.w.rows() {
            let orig = net.w[(i, j)];
            probe.w[(i, j)] = orig + step;
            let up = loss(&probe);
            probe.w[(i, j)] = orig - step;
            let down = loss(&probe);
            probe.w[(i, j)] = orig;
            g[(i, j)] = (up - down) / (2.0 * step);
        }
    }
    g
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for act in [ActivationKind::Tanh, ActivationKind::Sigmoid, ActivationKind::Identity] {
        for _ in 0..10 {
            let beta = rng.gen_range(0.0..2.0);
            let net = NetworkState::init(2, act, ExpansionKind::Trig2, 0.1, beta, &mut rng).unwrap();
            let x = random(2, 4, &mut rng);
            let h = net.forward_batch(&x).unwrap();
            let z_i: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x_i = x.col(1);
            let h_i = net.forward(x_i).unwrap();
            let g = net.grad_w(x_i, &h_i, &h, &z_i).unwrap();
            let fd = fd_gradient(&net, x_i, &h, &z_i, 1e-6);
            let rel = g.sub(&fd).unwrap().frobenius_norm() / fd.frobenius_norm().max(1e-12);
            assert!(rel <= 1e-5, "{act:?}: relative error {rel}");
        }
    }
}

#[test]
fn newton_step_solves_the_linear_fit() {
    // Identity activation, β = 0 and fixed targets T = H Z: the fit is a
    // linear least-squares problem in W, solved by the normal equations.
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let n = 15;
    let x = random(2, n, &mut rng);
    let mut net =
        NetworkState::init(2, ActivationKind::Identity, ExpansionKind::Trig2, 0.0, 0.0, &mut rng)
            .unwrap();
    let h = net.forward_batch(&x).unwrap();
    let z = random(n, n, &mut rng);
    let t = matmul(&h, &z).unwrap();
    let phi = Matrix::from_columns(
        &(0..n).map(|j| expand(x.col(j), ExpansionKind::Trig2)).collect::<Vec<_>>(),
    )
    .unwrap();
    let wt = solve_linear(&matmul_nt(&phi, &phi).unwrap(), &matmul_nt(&phi, &t).unwrap()).unwrap();
    net.w = wt.transpose();
    let mut total = Matrix::zeros(10, 10);
    for i in 0..n {
        let h_i = net.forward(x.col(i)).unwrap();
        total = total.add(&net.grad_w(x.col(i), &h_i, &h, z.col(i)).unwrap()).unwrap();
    }
    assert!(total.max_abs() < 1e-9, "gradient {}", total.max_abs());
}

#[test]
fn sgd_step_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut net =
        NetworkState::init(1, ActivationKind::Tanh, ExpansionKind::Trig2, 0.25, 0.0, &mut rng).unwrap();
    let before = net.w.clone();
    let g = random(5, 5, &mut rng);
    net.sgd_step(&g).unwrap();
    for (i, v) in net.w.as_slice().iter().enumerate() {
        assert_eq!(*v, before.as_slice()[i] - 0.25 * g.as_slice()[i]);
    }
}

#[test]
fn knn_graph_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..20 {
        let n = rng.gen_range(5..30);
        let k = rng.gen_range(1..n.min(6));
        let x = random(3, n, &mut rng);
        let g = knn_similarity(&x, k, WeightKind::Binary).unwrap();
        let d2 = |i: usize, j: usize| -> f64 {
            (0..3).map(|r| (x[(r, i)] - x[(r, j)]).powi(2)).sum()
        };
        let mut adj = vec![vec![false; n]; n];
        for i in 0..n {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| d2(i, a).partial_cmp(&d2(i, b)).unwrap().then(a.cmp(&b)));
            for &j in &others[..k] {
                adj[i][j] = true;
                adj[j][i] = true;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let want = if adj[i][j] { 1.0 } else { 0.0 };
                assert_eq!(g.s[(i, j)], want, "trial {trial} ({i},{j})");
            }
        }
    }
}

#[test]
fn laplacian_quadratic_form_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..20 {
        let n = rng.gen_range(5..25);
        let x = random(4, n, &mut rng);
        let g = knn_similarity(&x, 3, WeightKind::HeatKernel { sigma: None }).unwrap();
        let l = laplacian(&g);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut want = 0.0;
        for i in 0..n {
            for j in 0..n {
                want += 0.5 * g.s[(i, j)] * (v[i] - v[j]).powi(2);
            }
        }
        let got = l.quadratic_form(&v);
        assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0));
        let eig = sym_eigen(&l.l).unwrap();
        assert!(eig.values[0] >= -1e-10 * l.l.frobenius_norm());
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn brute_ca(t: &[usize], p: &[usize]) -> f64 {
    let k = t.iter().chain(p).max().unwrap() + 1;
    permutations(k)
        .iter()
        .map(|perm| t.iter().zip(p).filter(|(a, b)| perm[**b] == **a).count())
        .max()
        .unwrap() as f64
        / t.len() as f64
}

fn pair_counts(t: &[usize], p: &[usize]) -> (f64, f64, f64, f64) {
    // (both same, same in truth only, same in pred only, neither)
    let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            match (t[i] == t[j], p[i] == p[j]) {
                (true, true) => a += 1.0,
                (true, false) => b += 1.0,
                (false, true) => c += 1.0,
                (false, false) => d += 1.0,
            }
        }
    }
    (a, b, c, d)
}

fn brute_nmi(t: &[usize], p: &[usize]) -> f64 {
    let n = t.len() as f64;
    let k = t.iter().chain(p).max().unwrap() + 1;
    let count = |f: &dyn Fn(usize) -> bool| (0..t.len()).filter(|&i| f(i)).count() as f64;
    let mut ht = 0.0;
    let mut hp = 0.0;
    let mut mi = 0.0;
    for a in 0..k {
        let ca = count(&|i| t[i] == a);
        if ca > 0.0 {
            ht -= ca / n * (ca / n).ln();
        }
        let cp = count(&|i| p[i] == a);
        if cp > 0.0 {
            hp -= cp / n * (cp / n).ln();
        }
        for b in 0..k {
            let cab = count(&|i| t[i] == a && p[i] == b);
            let cb = count(&|i| p[i] == b);
            if cab > 0.0 {
                mi += cab / n * (n * cab / (ca * cb)).ln();
            }
        }
    }
    if ht == 0.0 || hp == 0.0 {
        let single = |v: &[usize]| v.iter().all(|&x| x == v[0]);
        return if single(t) && single(p) { 1.0 } else { 0.0 };
    }
    mi / (ht * hp).sqrt()
}

#[test]
fn metrics_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=8);
        let kt = rng.gen_range(1..=4);
        let kp = rng.gen_range(1..=4);
        let t: Vec<usize> = (0..n).map(|_| rng.gen_range(0..kt)).collect();
        let p: Vec<usize> = (0..n).map(|_| rng.gen_range(0..kp)).collect();

        assert_eq!(clustering_accuracy(&t, &p).unwrap(), brute_ca(&t, &p));

        let (a, b, c, d) = pair_counts(&t, &p);
        let total = a + b + c + d;
        let want_ari = if total == 0.0 {
            1.0
        } else {
            let expected = (a + b) * (a + c) / total;
            let max = 0.5 * ((a + b) + (a + c));
            if max == expected {
                1.0
            } else {
                (a - expected) / (max - expected)
            }
        };
        assert!((ari(&t, &p).unwrap() - want_ari).abs() < 1e-12);

        let want_f1 = if a + b == 0.0 && a + c == 0.0 {
            1.0
        } else {
            let prec = if a + c > 0.0 { a / (a + c) } else { 0.0 };
            let rec = if a + b > 0.0 { a / (a + b) } else { 0.0 };
            if prec + rec == 0.0 {
                0.0
            } else {
                2.0 * prec * rec / (prec + rec)
            }
        };
        assert!((pairwise_f1(&t, &p).unwrap() - want_f1).abs() < 1e-12);

        assert!((nmi(&t, &p).unwrap() - brute_nmi(&t, &p)).abs() <= 1e-12);
    }
}

#[test]
fn nmi_independent_labels_direct_formula() {
    let t = [0, 0, 0, 1, 1, 1];
    let p = [0, 1, 2, 0, 1, 2];
    assert!(nmi(&t, &p).unwrap().abs() < 1e-15);
    let p2 = [0, 0, 1, 1, 1, 1];
    assert!((nmi(&t, &p2).unwrap() - brute_nmi(&t, &p2)).abs() < 1e-12);
}

#[test]
fn hungarian_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..500 {
        let rows = rng.gen_range(1..=7);
        let cols = rng.gen_range(1..=7);
        let cost = Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-5.0..5.0));
        let m = rows.max(cols);
        let c = |i: usize, j: usize| if i < rows && j < cols { cost[(i, j)] } else { 0.0 };
        let best = permutations(m)
            .iter()
            .map(|p| (0..m).map(|i| c(i, p[i])).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let a = hungarian(&cost);
        let mut seen = a.row_to_col.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..m).collect::<Vec<_>>());
        assert!((a.cost - best).abs() < 1e-9, "{} vs {best}", a.cost);
    }
}

#[test]
fn majority_lower_bound_for_ca() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..300 {
        let k = rng.gen_range(1..5);
        let n = rng.gen_range(k..20);
        let t: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.gen_range(0..k) }).collect();
        let p: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        assert!(clustering_accuracy(&t, &p).unwrap() >= 1.0 / k as f64 - 1e-15);
    }
}

#[test]
fn two_blobs_are_separated() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let n = 40;
    let x = Matrix::from_fn(2, n, |r, j| {
        let center = if j < n / 2 { -3.0 } else { 3.0 };
        (if r == 0 { center } else { 0.0 }) + 0.3 * rng.gen_range(-1.0..1.0)
    });
    let s = knn_similarity(&x, 5, WeightKind::Binary).unwrap().s;
    let truth: Vec<usize> = (0..n).map(|j| usize::from(j >= n / 2)).collect();
    for seed in 0..5 {
        let a = spectral_cluster(&AffinityGraph { g: s.clone() }, 2, seed).unwrap();
        assert_eq!(clustering_accuracy(&truth, &a.labels).unwrap(), 1.0);
    }
}

#[test]
fn sym_laplacian_spectrum_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10 {
        let z = random(15, 15, &mut rng);
        let g = affinity_from_z(&z, AffinityKind::SymAbs).unwrap().g;
        let deg: Vec<f64> = (0..15).map(|i| g.col(i).iter().sum()).collect();
        let l = Matrix::from_fn(15, 15, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - g[(i, j)] / (deg[i] * deg[j]).sqrt()
        });
        let l = Matrix::from_fn(15, 15, |i, j| 0.5 * (l[(i, j)] + l[(j, i)]));
        let e = sym_eigen(&l).unwrap();
        assert!(e.values[0] >= -1e-10 && e.values[14] <= 2.0 + 1e-10);
    }
}

#[test]
fn scaling_range_and_idempotence() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let x = Matrix::from_fn(6, 30, |_, _| rng.gen_range(-50.0..80.0));
    let y = scale_to_unit(&x);
    for i in 0..6 {
        let row = y.row(i);
        assert!(row.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!(row.iter().cloned().fold(f64::INFINITY, f64::min), -1.0);
        assert_eq!(row.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
    }
    assert_eq!(scale_to_unit(&y), y);
}

#[test]
fn pca_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    // exact 2-dim subspace through the mean
    let basis = random(6, 2, &mut rng);
    let coef = random(2, 40, &mut rng);
    let x = matmul(&basis, &coef).unwrap();
    let p = pca_reduce(&x, 2).unwrap();
    assert!((p.preserved_variance - 1.0).abs() < 1e-9);
    assert!(p.x.as_slice().iter().all(|v| v.is_finite()));
    for r in 0..2 {
        assert!(p.x.row(r).iter().sum::<f64>().abs() < 1e-10);
    }

    // full dimension: an isometry of the centered data
    let x = random(5, 12, &mut rng);
    let p = pca_reduce(&x, 5).unwrap();
    for i in 0..12 {
        for j in 0..12 {
            let d0: f64 = (0..5).map(|r| (x[(r, i)] - x[(r, j)]).powi(2)).sum();
            let d1: f64 = (0..5).map(|r| (p.x[(r, i)] - p.x[(r, j)]).powi(2)).sum();
            assert!((d0.sqrt() - d1.sqrt()).abs() < 1e-9);
        }
    }

    // projected variance equals the top squared singular values over n
    let x = random(50, 100, &mut rng);
    let p = pca_reduce(&x, 10).unwrap();
    let mut xc = x.clone();
    for r in 0..50 {
        let mean = x.row(r).iter().sum::<f64>() / 100.0;
        for j in 0..100 {
            xc[(r, j)] -= mean;
        }
    }
    let s = svd_thin(&xc).unwrap().s;
    let want: f64 = s[..10].iter().map(|v| v * v).sum::<f64>() / 100.0;
    let got = p.x.frobenius_norm_sq() / 100.0;
    assert!((got - want).abs() < 1e-9 * want.max(1.0));
}

#[test]
fn csv_round_trip_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let data = Dataset {
        x: Matrix::from_fn(3, 7, |_, _| rng.gen_range(-1e3..1e3) / 7.0),
        labels: Some(vec![0, 1, 2, 0, 1, 2, 9]),
        name: "rt".into(),
    };
    let path = dir.path().join("rt.csv");
    save_csv(&path, &data).unwrap();
    assert_eq!(load_csv(&path, true, false).unwrap(), data);

    let small = dir.path().join("small.csv");
    std::fs::write(&small, "1,2,0\n3,4,1\n5,6,1\n").unwrap();
    let d = load_csv(&small, true, false).unwrap();
    assert_eq!((d.dim(), d.n()), (2, 3));
    assert_eq!(d.labels.as_ref().map(Vec::len), Some(3));

    let header = dir.path().join("header.csv");
    std::fs::write(&header, "a,b\n1,2\n").unwrap();
    assert_eq!(load_csv(&header, false, true).unwrap().n(), 1);

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    assert!(load_csv(&empty, false, false).is_err());

    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "1,2\n3,4\n5\n").unwrap();
    assert!(matches!(load_csv(&ragged, false, false), Err(Error::Parse { line: 3, .. })));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,2\nx,4\n").unwrap();
    assert!(matches!(load_csv(&bad, false, false), Err(Error::Parse { line: 2, .. })));

    assert!(matches!(
        load_csv(&dir.path().join("missing.csv"), false, false),
        Err(Error::Io { .. })
    ));
}

#[test]
fn linear_synthetic_clusters_are_low_rank() {
    let spec = SyntheticSpec {
        nonlinearity: Nonlinearity::None,
        noise_sigma: 0.0,
        ..Default::default()
    };
    let d = generate_synthetic(&spec).unwrap();
    for c in 0..spec.clusters {
        let idx: Vec<usize> = (c * 50..(c + 1) * 50).collect();
        let s = svd_thin(&d.x.select_columns(&idx)).unwrap().s;
        assert!(s[spec.subspace_dim] <= 1e-10, "{:?}", s);
    }
}

#[test]
fn objective_matches_naive_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let n = 8;
    let x = random(2, n, &mut rng);
    let g = knn_similarity(&x, 2, WeightKind::Binary).unwrap();
    let l = laplacian(&g);
    let h = random(10, n, &mut rng);
    let z = random(n, n, &mut rng);
    let w = random(10, 10, &mut rng);
    let (alpha, beta) = (0.7, 1.3);
    let mut fit = 0.0;
    for i in 0..n {
        for r in 0..10 {
            let hz: f64 = (0..n).map(|k| h[(r, k)] * z[(k, i)]).sum();
            fit += 0.5 * (h[(r, i)] - hz).powi(2);
        }
    }
    let mut tr = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                tr += z[(i, j)] * l.l[(j, k)] * z[(i, k)];
            }
        }
    }
    let decay: f64 = w.as_slice().iter().map(|v| v * v).sum::<f64>() * 0.5 * beta;
    let want = fit + 0.5 * alpha * tr + decay;
    let got = objective_flnnsc(&h, &z, &w, &l, alpha, beta).unwrap();
    assert!((got - want).abs() < 1e-10 * want.abs().max(1.0));
}

#[test]
fn z_update_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let x = random(2, 15, &mut rng);
    let l = laplacian(&knn_similarity(&x, 4, WeightKind::Binary).unwrap());
    let h = random(10, 15, &mut rng);
    let z = update_z(&h, &l, 1.0).unwrap();
    let hth = h.gram();
    let r = matmul(&hth, &z)
        .unwrap()
        .add(&matmul(&z, &l.l).unwrap())
        .unwrap()
        .sub(&hth)
        .unwrap()
        .frobenius_norm();
    assert!(r <= 1e-8 * hth.frobenius_norm());
}

#[test]
fn lsr_normal_equation_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let x = random(6, 20, &mut rng);
    let z = fit_lsr(&x, 0.3).unwrap().z;
    let mut lhs = x.gram();
    for i in 0..20 {
        lhs[(i, i)] += 0.3;
    }
    let r = matmul(&lhs, &z).unwrap().sub(&x.gram()).unwrap().max_abs();
    assert!(r < 1e-10);
    let big = fit_lsr(&x, 1e8).unwrap().z;
    assert!(big.frobenius_norm() <= 1e-6 * 20.0);
}

#[test]
fn ccsc_half_recombines_parts() {
    let data = generate_synthetic(&SyntheticSpec {
        points_per_cluster: 10,
        ..Default::default()
    })
    .unwrap();
    let x = scale_to_unit(&data.x);
    let g = knn_similarity(&x, 4, WeightKind::Binary).unwrap();
    let cfg = CcscConfig {
        base: FlnnscConfig {
            max_outer_iters: 5,
            ..Default::default()
        },
        lambda: 0.5,
    };
    let fit = fit_ccsc(&x, &g, &cfg).unwrap();
    let (z1, z2) = fit.representation.parts.clone().unwrap();
    let want = Matrix::from_fn(30, 30, |i, j| 0.5 * z1[(i, j)] + 0.5 * z2[(i, j)]);
    assert_eq!(fit.representation.z, want);
    let smr = fit_linear_smr(&x, &g, cfg.base.alpha).unwrap().z;
    assert!(smr.sub(&z2).unwrap().max_abs() <= 1e-10);
}
