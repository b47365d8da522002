mod common;

use common::*;
use shqmm_core::learning::*;
use shqmm_core::random::{haar_stiefel, Rng};
use shqmm_core::{
    Boundary, CMatrix, DensityMatrix, Error, HqmmModel, KrausBundle, KrausModel, SequenceModel, ShqmmModel,
    StiefelPoint, C64,
};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn directional_fd<M: KrausModel>(model: &M, batch: &[Vec<usize>], d: &CMatrix, eps: f64) -> f64 {
    let k = model.point().into_matrix();
    let at = |s: f64| {
        let p = StiefelPoint::new(&k + d * c(s)).unwrap();
        batch_loss(&model.with_point(&p).unwrap(), batch).unwrap()
    };
    (at(eps) - at(-eps)) / (2.0 * eps)
}

fn gradient_check<M: KrausModel>(model: &M, batch: &[Vec<usize>], dirs: usize, seed: u64) -> f64 {
    let g = grad_kappa(model, batch).unwrap();
    let k = model.point().into_matrix();
    let mut rng = Rng::seed(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..dirs {
        let z = rng.complex_matrix(k.nrows(), k.ncols());
        let mut d = tangent(&k, &z);
        d /= c(d.norm());
        let fd = directional_fd(model, batch, &d, 1e-6);
        let adj = 2.0 * g.inner_re(&d);
        let rel = (fd - adj).abs() / fd.abs().max(adj.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    worst
}

// ---------- gradient ----------

#[test]
fn gradient_matches_finite_differences() {
    let cases = [
        (2, 2, 3, 1, 12),
        (3, 2, 4, 1, 20),
        (2, 3, 4, 1, 15),
        (1, 2, 3, 1, 20),
        (2, 2, 1, 0, 20),
        (2, 2, 4, 0, 10),
    ];
    for boundary in [Boundary::Periodic, Boundary::Open] {
        for (i, &(m, dim_o, n_max, k, len)) in cases.iter().enumerate() {
            let model = random_shqmm(m, dim_o, n_max, k, boundary, 31 + i as u64);
            let batch = random_sequences(i as u64, 2, len, dim_o);
            let worst = gradient_check(&model, &batch, 20, i as u64);
            assert!(worst < 1e-5, "{boundary} case {i}: relative error {worst:e}");
        }
    }
}

#[test]
fn hqmm_gradient_matches_finite_differences() {
    let model = random_hqmm(3, 2, 2, 4);
    let batch = random_sequences(4, 3, 15, 2);
    let worst = gradient_check(&model, &batch, 20, 4);
    assert!(worst < 1e-5, "{worst:e}");
}

#[test]
fn batch_gradient_is_mean_of_sequence_gradients() {
    let model = random_shqmm(2, 3, 4, 1, Boundary::Periodic, 8);
    let batch = random_sequences(8, 4, 12, 3);
    let g = grad_kappa(&model, &batch).unwrap();
    let mut mean = CMatrix::zeros(g.matrix().nrows(), g.matrix().ncols());
    let mut loss = 0.0;
    for s in &batch {
        mean += grad_kappa(&model, std::slice::from_ref(s)).unwrap().0;
        loss -= model.loglik(s).unwrap();
    }
    mean /= c(batch.len() as f64);
    assert!(max_abs_diff(g.matrix(), &mean) < 1e-12);
    assert!((batch_loss(&model, &batch).unwrap() - loss / batch.len() as f64).abs() < 1e-12);
    let (l2, g2) = loss_and_grad(&model, &batch).unwrap();
    assert_eq!(g2, g);
    assert!((l2 - loss / batch.len() as f64).abs() < 1e-12);
}

#[test]
fn loss_trivial_examples() {
    let s = 1.0 / 2f64.sqrt();
    let b = KrausBundle::new(2, 1, vec![CMatrix::identity(2, 2) * c(s), CMatrix::identity(2, 2) * c(s)]).unwrap();
    let m = HqmmModel::new(b, DensityMatrix::maximally_mixed(2)).unwrap();
    let seq = vec![0, 1, 1, 0, 1, 1, 1];
    let single = batch_loss(&m, std::slice::from_ref(&seq)).unwrap();
    assert!((single - 7.0 * 2f64.ln()).abs() < 1e-12);
    assert_eq!(batch_loss(&m, &[seq.clone(), seq]).unwrap(), single);
    assert!(matches!(batch_loss(&m, &[]), Err(Error::EmptyDataset)));
}

#[test]
fn constant_likelihood_has_no_tangent_gradient() {
    // dimO = 1, one class, one slot: every sequence has probability 1.
    let mut rng = Rng::seed(2);
    let u = haar_stiefel(&mut rng, 3, 3).into_matrix();
    let b = KrausBundle::new(1, 1, vec![u]).unwrap();
    let ens = random_ensemble(3, 1, 2);
    let model = ShqmmModel::new(b, ens, 0, Boundary::Periodic).unwrap();
    let batch = vec![vec![0; 9]];
    assert!(batch_loss(&model, &batch).unwrap().abs() < 1e-12);
    let g = grad_kappa(&model, &batch).unwrap().0;
    let k = model.point().into_matrix();
    let a = &g * k.adjoint() - &k * g.adjoint();
    assert!((a * &k).norm() < 1e-12);
}

// ---------- Cayley update ----------

#[test]
fn cayley_trivial_cases() {
    let mut rng = Rng::seed(1);
    let k = haar_stiefel(&mut rng, 12, 2);
    let g = GradientBlock(rng.complex_matrix(12, 2));
    assert_eq!(cayley_update(&k, &GradientBlock::zeros(12, 2), 0.7).unwrap(), k);
    assert_eq!(cayley_update(&k, &g, 0.0).unwrap(), k);
    assert!(matches!(cayley_update(&k, &GradientBlock::zeros(10, 2), 0.1), Err(Error::Shape(_))));
}

#[test]
fn cayley_matches_extended_precision_solve() {
    let mut rng = Rng::seed(21);
    for _ in 0..10 {
        let k = haar_stiefel(&mut rng, 18, 3);
        let g = rng.complex_matrix(18, 3);
        let next = cayley_update(&k, &GradientBlock(g.clone()), 0.1).unwrap();
        assert!(next.residual() < 1e-10);
        let oracle = cayley_dd(k.matrix(), &g, 0.1);
        assert!(max_abs_diff(next.matrix(), &oracle) < 1e-10);
    }
}

#[test]
fn cayley_keeps_points_on_manifold() {
    let mut rng = Rng::seed(99);
    let mut k = haar_stiefel(&mut rng, 18, 3);
    for _ in 0..1000 {
        let g = GradientBlock(rng.complex_matrix(18, 3));
        k = cayley_update(&k, &g, 0.1).unwrap();
    }
    let m = k.matrix();
    assert!((m.adjoint() * m - CMatrix::identity(3, 3)).norm() < 1e-8);
}

#[test]
fn cayley_is_descent_direction() {
    let model = random_shqmm(2, 2, 3, 1, Boundary::Periodic, 5);
    let batch = random_sequences(5, 2, 20, 2);
    let g = grad_kappa(&model, &batch).unwrap();
    let next = cayley_update(&model.point(), &g, 1e-3).unwrap();
    let after = batch_loss(&model.with_point(&next).unwrap(), &batch).unwrap();
    assert!(after < batch_loss(&model, &batch).unwrap());
}

// ---------- distance and initialization ----------

#[test]
fn distance_examples() {
    let mut rng = Rng::seed(4);
    let k = haar_stiefel(&mut rng, 12, 3);
    assert!(stiefel_distance(&k, &k).unwrap() < 1e-12);

    let u = haar_stiefel(&mut rng, 3, 3).into_matrix();
    let ku = StiefelPoint::new(k.matrix() * &u).unwrap();
    let want = (&u - CMatrix::identity(3, 3)).svd(false, false).singular_values[0];
    assert!((stiefel_distance(&k, &ku).unwrap() - want).abs() < 1e-12);

    for _ in 0..10 {
        let a = haar_stiefel(&mut rng, 12, 3);
        let b = haar_stiefel(&mut rng, 12, 3);
        let oracle = stiefel_distance_oracle(a.matrix(), b.matrix());
        assert!((stiefel_distance(&a, &b).unwrap() - oracle).abs() < 1e-10);
    }
    let other = haar_stiefel(&mut rng, 10, 3);
    assert!(matches!(stiefel_distance(&k, &other), Err(Error::Shape(_))));
}

#[test]
fn init_stiefel_properties() {
    assert_eq!(init_stiefel(2, 3, 2, 7).unwrap(), init_stiefel(2, 3, 2, 7).unwrap());
    for seed in 0..100 {
        let p = init_stiefel(3, 3, 2, seed).unwrap();
        let m = p.matrix();
        assert!((m.adjoint() * m - CMatrix::identity(3, 3)).norm() < 1e-12);
    }
    let a = init_stiefel(2, 3, 2, 1).unwrap();
    let b = init_stiefel(2, 3, 2, 2).unwrap();
    assert!(stiefel_distance(&a, &b).unwrap() > 0.0);
    // too few rows for 2m real columns: still a valid point
    let square = init_stiefel(3, 1, 1, 5).unwrap();
    assert!(square.residual() < 1e-12);
}

#[test]
fn init_ensemble_schemes() {
    let u = init_ensemble(2, 2, EnsembleInit::UniformMixed, 0).unwrap();
    for x in u.members() {
        assert_eq!(x, &(CMatrix::identity(2, 2) * c(0.25)));
    }
    for seed in 0..20 {
        let r = init_ensemble(3, 4, EnsembleInit::RandomPsd, seed).unwrap();
        assert!((r.total_trace() - 1.0).abs() < 1e-12);
        for x in r.members() {
            assert!(hermitian_eigenvalues(x)[0] >= -1e-12);
        }
    }
}

// ---------- training ----------

fn small_cfg() -> TrainConfig {
    TrainConfig {
        m: 2,
        dim_o: 2,
        n_max: 3,
        k: 1,
        epochs: 3,
        batches: 2,
        seed: 11,
        ..Default::default()
    }
}

#[test]
fn zero_step_keeps_parameters() {
    let data = random_sequences(1, 4, 15, 2);
    let cfg = TrainConfig { tau: 0.0, ..small_cfg() };
    let (model, hist) = train(&cfg, &data, &data).unwrap();
    assert_eq!(model.point(), initial_shqmm(&cfg).unwrap().point());
    for epoch in hist.losses.chunks(cfg.batches) {
        assert_eq!(epoch, &hist.losses[..cfg.batches]);
    }
    assert_eq!(hist.losses.len(), cfg.epochs * cfg.batches);
    assert_eq!(hist.epochs.len(), cfg.epochs);

    let (hq, _) = train_hqmm(&cfg, 2, &data, &data).unwrap();
    assert_eq!(hq.point(), initial_hqmm(&cfg, 2).unwrap().point());
}

#[test]
fn one_plain_step_is_one_cayley_update() {
    let data = random_sequences(2, 3, 20, 2);
    let cfg = TrainConfig {
        epochs: 1,
        batches: 1,
        beta: 0.0,
        loss_scale: LossScale::PerSequence,
        ..small_cfg()
    };
    let init = initial_shqmm(&cfg).unwrap();
    let want = cayley_update(&init.point(), &grad_kappa(&init, &data).unwrap(), cfg.tau).unwrap();
    let (model, _) = train(&cfg, &data, &[]).unwrap();
    assert_eq!(model.point(), want);
}

/// β = 0, B = 1 reduces to plain Cayley descent with decaying step.
#[test]
fn momentum_free_training_matches_hand_loop() {
    let data = random_sequences(3, 4, 25, 2);
    for scale in [LossScale::PerSequence, LossScale::PerSymbol] {
        let cfg = TrainConfig {
            epochs: 4,
            batches: 1,
            beta: 0.0,
            tau: 0.3,
            alpha: 0.8,
            loss_scale: scale,
            ..small_cfg()
        };
        let mut model = initial_shqmm(&cfg).unwrap();
        let mut tau = cfg.tau;
        let mut losses = vec![];
        let factor = match scale {
            LossScale::PerSequence => 1.0,
            LossScale::PerSymbol => 1.0 / 25.0,
        };
        for _ in 0..cfg.epochs {
            let (loss, g) = loss_and_grad(&model, &data).unwrap();
            losses.push(loss);
            let g = GradientBlock(g.0 * c(factor));
            model = model.with_point(&cayley_update(&model.point(), &g, tau).unwrap()).unwrap();
            tau *= cfg.alpha;
        }
        let (trained, hist) = train(&cfg, &data, &[]).unwrap();
        assert_eq!(hist.losses, losses);
        assert!(max_abs_diff(trained.point().matrix(), model.point().matrix()) < 1e-14);
        assert!((hist.epochs.last().unwrap().tau - tau).abs() < 1e-15);
    }
}

#[test]
fn training_is_deterministic() {
    let data = random_sequences(4, 6, 20, 2);
    let cfg = small_cfg();
    let (a, ha) = train(&cfg, &data, &data).unwrap();
    let (b, hb) = train(&cfg, &data, &data).unwrap();
    assert_eq!(ha.losses, hb.losses);
    assert_eq!(a.point(), b.point());
    let va: Vec<_> = ha.epochs.iter().map(|e| e.val_da).collect();
    let vb: Vec<_> = hb.epochs.iter().map(|e| e.val_da).collect();
    assert_eq!(va, vb);
}

#[test]
fn degenerate_shqmm_training_equals_hqmm_training() {
    let data = random_sequences(5, 4, 20, 3);
    let cfg = TrainConfig {
        n_max: 1,
        k: 0,
        dim_o: 3,
        epochs: 3,
        ..small_cfg()
    };
    let (sh, hs) = train(&cfg, &data, &data).unwrap();
    let (hq, hh) = train_hqmm(&cfg, 1, &data, &data).unwrap();
    assert_eq!(hs.losses, hh.losses);
    assert_eq!(sh.point(), hq.point());
}

#[test]
fn hqmm_training_reduces_loss() {
    let data = random_sequences(6, 8, 30, 3);
    let cfg = TrainConfig {
        m: 2,
        dim_o: 3,
        epochs: 6,
        batches: 1,
        seed: 3,
        ..Default::default()
    };
    let (_, hist) = train_hqmm(&cfg, 1, &data, &[]).unwrap();
    let means: Vec<f64> = hist.epochs.iter().map(|e| e.mean_loss).collect();
    let down = means.windows(2).filter(|w| w[1] <= w[0]).count();
    assert!(down >= 4, "{means:?}");
}

#[test]
fn invalid_configs_are_rejected() {
    let data = random_sequences(1, 2, 5, 2);
    let bad = [
        TrainConfig { tau: -0.1, ..small_cfg() },
        TrainConfig { alpha: 0.0, ..small_cfg() },
        TrainConfig { alpha: 1.5, ..small_cfg() },
        TrainConfig { beta: 1.0, ..small_cfg() },
        TrainConfig { epochs: 0, ..small_cfg() },
        TrainConfig { batches: 0, ..small_cfg() },
        TrainConfig { k: 2, ..small_cfg() },
        TrainConfig { m: 0, ..small_cfg() },
        TrainConfig { dim_o: 1, ..small_cfg() },
        TrainConfig { batches: 3, ..small_cfg() },
    ];
    for cfg in bad {
        assert!(matches!(train(&cfg, &data, &[]), Err(Error::Config(_))), "{cfg:?}");
    }
    let out_of_range = vec![vec![0, 2]];
    assert!(train(&small_cfg(), &out_of_range, &[]).is_err());
}

#[test]
fn batches_are_contiguous() {
    let data: Vec<Vec<usize>> = (0..7).map(|i| vec![i]).collect();
    let b = split_batches(&data, 3).unwrap();
    let sizes: Vec<usize> = b.iter().map(|x| x.len()).collect();
    assert_eq!(sizes.iter().sum::<usize>(), 7);
    let flat: Vec<usize> = b.iter().flat_map(|x| x.iter().map(|s| s[0])).collect();
    assert_eq!(flat, (0..7).collect::<Vec<_>>());
}

// ---------- Baum-Welch ----------

#[test]
fn baum_welch_recovers_single_state_emissions() {
    let data = vec![vec![0, 1, 1, 2, 1, 1, 0, 1]];
    let fit = baum_welch_train(&data, 1, 3, 10, 0).unwrap();
    let e = fit.model.emission();
    for (y, want) in [2.0 / 8.0, 5.0 / 8.0, 1.0 / 8.0].iter().enumerate() {
        assert!((e[(y, 0)] - want).abs() < 1e-6);
    }
}

#[test]
fn baum_welch_is_monotone_on_random_data() {
    let data = random_sequences(9, 5, 100, 3);
    let fit = baum_welch_train(&data, 3, 3, 20, 9).unwrap();
    assert_eq!(fit.loglik_history.len(), 21);
    for w in fit.loglik_history.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "{w:?}");
    }
}

#[test]
fn baum_welch_beats_the_generator() {
    let gen = random_hmm(2, 3, 12);
    let data = shqmm_core::datagen::sample_hmm(&gen, 10, 200, 12).sequences;
    let fit = baum_welch_train(&data, 2, 3, 200, 1).unwrap();
    let fitted: f64 = data.iter().map(|s| fit.model.forward_loglik(s).unwrap()).sum();
    let truth: f64 = data.iter().map(|s| gen.forward_loglik(s).unwrap()).sum();
    assert!(fitted >= truth - 1e-6, "{fitted} < {truth}");
    assert!((fitted - fit.loglik_history.last().unwrap()).abs() < 1e-6);
}
