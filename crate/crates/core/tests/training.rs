//! End-to-end training behaviour on synthetic blobs.

use afbench::data::synth_blobs;
use afbench::experiment::{build_trials, derive_seed, run_matrix, TrialSpec};
use afbench::network::{evaluate, fit, init_network, softmax_cross_entropy, train_epoch, DenseLayer, Network};
use afbench::{ActivationKind, ActivationSpec, Dataset, Matrix, NetworkConfig, RandomStream, TrainConfig};
use proptest::prelude::*;

fn blobs() -> Dataset {
    synth_blobs(2000, 20, 4, 0.08, &mut RandomStream::new(42)).unwrap()
}

#[test]
fn linear_softmax_baseline_separates_blobs() {
    let ds = blobs();
    let cfg = NetworkConfig::new("linear", 20, vec![4], ActivationKind::Relu, 0.0).unwrap();
    let tc = TrainConfig {
        epochs: 20,
        dropout_rate: 0.0,
        seed: 1,
        ..TrainConfig::default()
    };
    let model = fit(&cfg, &ds, &tc, |_, _| {}).unwrap();
    let acc = evaluate(&model.network, &ds).unwrap();
    assert!(acc > 0.8, "linear baseline accuracy {acc}");
}

#[test]
fn training_is_deterministic_and_reduces_loss() {
    let ds = blobs();
    let cfg = NetworkConfig::new("small", 20, vec![16, 4], ActivationKind::Pfts, 0.5).unwrap();
    let tc = TrainConfig {
        epochs: 5,
        seed: 3,
        ..TrainConfig::default()
    };
    let a = fit(&cfg, &ds, &tc, |_, _| {}).unwrap();
    let b = fit(&cfg, &ds, &tc, |_, _| {}).unwrap();
    assert_eq!(a.epoch_losses, b.epoch_losses);
    assert_eq!(a.network, b.network);
    assert!(a.epoch_losses[4] < a.epoch_losses[0], "{:?}", a.epoch_losses);
    // the hinge moved away from its initial value
    assert!(a.network.activation_params()[0] != -0.2);
}

#[test]
fn zero_learning_rate_leaves_parameters_alone() {
    let ds = blobs();
    let cfg = NetworkConfig::new("frozen", 20, vec![8, 4], ActivationKind::PRelu, 0.5).unwrap();
    let mut net = init_network(&cfg, &mut RandomStream::new(1)).unwrap();
    let before = net.clone();
    let tc = TrainConfig {
        learning_rate: 0.0,
        ..TrainConfig::default()
    };
    train_epoch(&mut net, &ds, &tc, &mut RandomStream::new(2)).unwrap();
    for (a, b) in net.layers().iter().zip(before.layers()) {
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.bias, b.bias);
        assert_eq!(a.activation.map(|s| s.value), b.activation.map(|s| s.value));
    }
}

#[test]
fn untrained_network_is_at_chance() {
    let ds = synth_blobs(2000, 20, 10, 0.08, &mut RandomStream::new(5)).unwrap();
    let cfg = NetworkConfig::new("chance", 20, vec![32, 10], ActivationKind::Relu, 0.5).unwrap();
    let net = init_network(&cfg, &mut RandomStream::new(9)).unwrap();
    let acc = evaluate(&net, &ds).unwrap();
    assert!((acc - 0.1).abs() <= 0.05, "untrained accuracy {acc}");
}

fn linear_net(weights: Matrix) -> Network {
    let (d, c) = weights.shape();
    let cfg = NetworkConfig::new("oracle", d, vec![c], ActivationKind::Relu, 0.0).unwrap();
    Network::from_layers(
        cfg,
        vec![DenseLayer {
            weights,
            bias: Matrix::zeros(1, c),
            activation: None,
        }],
    )
    .unwrap()
}

#[test]
fn evaluate_with_oracle_logits() {
    // features are one-hot so logits = onehot * 10
    let labels = vec![0, 2, 1, 2, 0];
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&l| (0..3).map(|j| if j == l { 1.0 } else { 0.0 }).collect())
        .collect();
    let ds = Dataset::new(Matrix::from_rows(&rows).unwrap(), labels, 3).unwrap();
    let mut w = Matrix::identity(3);
    for i in 0..3 {
        w.set(i, i, 10.0);
    }
    assert_eq!(evaluate(&linear_net(w), &ds).unwrap(), 1.0);

    // all-zero logits resolve to class 0
    let zeros = Dataset::new(Matrix::from_rows(&rows).unwrap(), vec![0; 5], 3).unwrap();
    assert_eq!(evaluate(&linear_net(Matrix::zeros(3, 3)), &zeros).unwrap(), 1.0);
}

#[test]
fn evaluation_never_mutates_the_network() {
    let ds = blobs();
    let cfg = NetworkConfig::new("pure", 20, vec![8, 4], ActivationKind::Pfts, 0.5).unwrap();
    let net = init_network(&cfg, &mut RandomStream::new(4)).unwrap();
    let before = serde_json::to_vec(&net).unwrap();
    evaluate(&net, &ds).unwrap();
    net.predict(ds.features()).unwrap();
    assert_eq!(serde_json::to_vec(&net).unwrap(), before);
}

#[test]
fn inverted_dropout_preserves_expectation() {
    // identity weights expose the post-dropout hidden layer as the logits
    let cfg = NetworkConfig::new("drop", 3, vec![3, 3], ActivationKind::Relu, 0.5).unwrap();
    let layer = |act| DenseLayer {
        weights: Matrix::identity(3),
        bias: Matrix::zeros(1, 3),
        activation: act,
    };
    let spec = ActivationSpec::new(ActivationKind::Relu);
    let net = Network::from_layers(cfg, vec![layer(Some(spec.init_state())), layer(None)]).unwrap();
    let v = [0.2, 1.0, 3.0];
    let x = Matrix::from_rows(&vec![v; 100_000]).unwrap();
    let (out, _) = net.forward_train(&x, &mut RandomStream::new(8)).unwrap();
    for (j, want) in v.iter().enumerate() {
        let mean = (0..out.rows()).map(|r| out.get(r, j)).sum::<f64>() / out.rows() as f64;
        assert!((mean - want).abs() / want < 0.01, "unit {j}: {mean} vs {want}");
    }
}

#[test]
fn identical_seed_runs_agree() {
    let ds = synth_blobs(200, 5, 3, 0.1, &mut RandomStream::new(1)).unwrap();
    let cfg = NetworkConfig::new("8-C", 5, vec![8, 3], ActivationKind::Fts, 0.5).unwrap();
    let seed = derive_seed(7, 0, ActivationKind::Fts, 0);
    let trial = |run| TrialSpec {
        config_index: 0,
        network: cfg.clone(),
        activation: ActivationSpec::new(ActivationKind::Fts),
        run_index: run,
        seed,
        train: TrainConfig {
            epochs: 3,
            seed,
            ..TrainConfig::default()
        },
    };
    let table = run_matrix(&[trial(0), trial(1)], &ds, &ds, Some(2)).unwrap();
    let cell = table.cell(0, 0);
    assert_eq!(cell.runs.len(), 2);
    assert_eq!(cell.runs[0].accuracy, cell.runs[1].accuracy);
    assert_eq!(cell.mean, cell.runs[0].accuracy);

    let single = run_matrix(&[trial(0)], &ds, &ds, Some(1)).unwrap();
    assert_eq!(single.cell(0, 0).mean, single.cell(0, 0).runs[0].accuracy);
}

#[test]
fn small_matrix_fills_every_cell_regardless_of_threads() {
    let ds = synth_blobs(300, 6, 3, 0.1, &mut RandomStream::new(2)).unwrap();
    let specs: Vec<ActivationSpec> = [ActivationKind::Relu, ActivationKind::Fts, ActivationKind::Pfts]
        .map(ActivationSpec::new)
        .to_vec();
    let tc = TrainConfig {
        epochs: 2,
        ..TrainConfig::default()
    };
    let configs = vec!["16-C".to_string(), "32-16-C".to_string()];
    let trials = build_trials(&configs, &specs, 2, &tc, 11, &ds).unwrap();
    assert_eq!(trials.len(), 12);
    let serial = run_matrix(&trials, &ds, &ds, Some(1)).unwrap();
    let parallel = run_matrix(&trials, &ds, &ds, Some(4)).unwrap();
    assert_eq!(serial, parallel);
    assert_eq!(serial.configs(), ["16-C", "32-16-C"]);
    assert_eq!(serial.activations(), ["relu", "fts", "pfts"]);
    for c in 0..2 {
        for a in 0..3 {
            let cell = serial.cell(c, a);
            assert_eq!(cell.runs.len(), 2);
            assert!((0.0..=100.0).contains(&cell.mean));
        }
    }
}

#[test]
fn failing_trial_is_named() {
    let ds = synth_blobs(30, 4, 3, 0.1, &mut RandomStream::new(2)).unwrap();
    // wrong class count: network emits 5 logits for a 3-class dataset
    let cfg = NetworkConfig::new("bad-net", 4, vec![8, 5], ActivationKind::Relu, 0.5).unwrap();
    let t = TrialSpec {
        config_index: 0,
        network: cfg,
        activation: ActivationSpec::new(ActivationKind::Relu),
        run_index: 3,
        seed: 1,
        train: TrainConfig::default(),
    };
    let err = run_matrix(&[t], &ds, &ds, Some(1)).unwrap_err().to_string();
    assert!(err.contains("bad-net") && err.contains("run 3"), "{err}");
}

proptest! {
    #[test]
    fn softmax_rows_are_distributions(
        logits in proptest::collection::vec(-30.0f64..30.0, 12),
        labels in proptest::collection::vec(0usize..4, 3),
    ) {
        let m = Matrix::from_vec(3, 4, logits).unwrap();
        let (loss, probs) = softmax_cross_entropy(&m, &labels).unwrap();
        prop_assert!(loss.is_finite() && loss >= 0.0);
        for r in 0..3 {
            let row = probs.row(r);
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(row.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }
}
