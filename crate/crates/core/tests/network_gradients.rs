//! Backpropagation against the finite-difference oracle in `support/fd.rs`.

#[path = "support/fd.rs"]
mod fd;

use afbench::network::{init_network, softmax_cross_entropy, DenseLayer, Network, NetworkConfig};
use afbench::{ActivationKind, ActivationSpec, Matrix, RandomStream};

const EPS: f64 = 1e-5;
const TOL: f64 = 1e-4;

struct Case {
    net: Network,
    x: Matrix,
    labels: Vec<usize>,
}

fn make_case(kind: ActivationKind, widths: &[usize], input: usize, batch: usize, seed: u64) -> Case {
    let cfg = NetworkConfig::new("toy", input, widths.to_vec(), kind, 0.0).unwrap();
    let mut rng = RandomStream::new(seed);
    let mut net = init_network(&cfg, &mut rng).unwrap();
    // move trainable parameters and biases off their initial values
    for layer in net.layers_mut() {
        let b = rng.uniform(-0.3, 0.3, 1, layer.bias.cols()).unwrap();
        layer.bias = b;
        if let Some(s) = layer.activation.as_mut() {
            if kind.is_trainable() {
                s.value += rng.uniform(-0.1, 0.1, 1, 1).unwrap().get(0, 0);
            }
        }
    }
    let x = rng.uniform(-1.5, 1.5, batch, input).unwrap();
    let classes = *widths.last().unwrap();
    let labels = (0..batch).map(|i| (i * 7 + seed as usize) % classes).collect();
    Case { net, x, labels }
}

fn near_breakpoint(case: &Case) -> bool {
    case.net.config().activation.kind.is_piecewise()
        && fd::reference_forward(&case.net, &case.x).1.iter().any(|z| z.abs() < 1e-3)
}

fn check(case: &Case) -> f64 {
    let (logits, cache) = case.net.forward_train(&case.x, &mut RandomStream::new(0)).unwrap();
    let (loss, probs) = softmax_cross_entropy(&logits, &case.labels).unwrap();
    assert!((loss - fd::reference_loss(&case.net, &case.x, &case.labels)).abs() < 1e-12);
    let analytic = case.net.backward(&cache, &probs, &case.labels).unwrap();
    let numeric = fd::numeric_gradients(&case.net, &case.x, &case.labels, EPS);
    fd::max_relative_error(&analytic, &numeric, 1e-3)
}

#[test]
fn swish_two_layer_five_unit_net() {
    let case = make_case(ActivationKind::Swish, &[5, 3], 4, 4, 11);
    let err = check(&case);
    assert!(err < TOL, "max relative error {err}");
}

#[test]
fn every_activation_on_small_nets() {
    let shapes: [(&[usize], usize, usize); 3] = [(&[5, 3], 4, 4), (&[8, 6, 4], 3, 2), (&[2, 2], 8, 1)];
    for kind in ActivationKind::ALL {
        let mut checked = 0;
        for seed in 0..12u64 {
            let (widths, input, batch) = shapes[seed as usize % shapes.len()];
            let case = make_case(kind, widths, input, batch, seed);
            if near_breakpoint(&case) {
                continue;
            }
            let err = check(&case);
            assert!(err < TOL, "{kind} seed {seed}: max relative error {err}");
            checked += 1;
        }
        assert!(checked >= 6, "{kind}: only {checked} usable cases");
    }
}

#[test]
fn pfts_hinge_gradient_is_sum_of_upstream() {
    // dL/dt equals the sum of dL/dh over batch and units, because dh/dt = 1.
    let case = make_case(ActivationKind::Pfts, &[5, 3], 4, 4, 5);
    let (logits, cache) = case.net.forward_train(&case.x, &mut RandomStream::new(0)).unwrap();
    let (_, probs) = softmax_cross_entropy(&logits, &case.labels).unwrap();
    let grads = case.net.backward(&cache, &probs, &case.labels).unwrap();

    let mut delta = probs.clone();
    for (r, &l) in case.labels.iter().enumerate() {
        delta.set(r, l, delta.get(r, l) - 1.0);
    }
    let upstream = delta.matmul(&case.net.layers()[1].weights.transpose()).unwrap();
    let expected: f64 = upstream.as_slice().iter().sum::<f64>() / case.labels.len() as f64;
    assert!((grads.activation[0].unwrap() - expected).abs() < 1e-12);
}

#[test]
fn dropout_masks_are_replayed_in_backward() {
    // With dropout the loss is a deterministic function of the parameters
    // once the mask stream is fixed, so replaying the same seed gives a
    // finite-difference oracle for the masked network.
    let cfg = NetworkConfig::new("drop", 3, vec![6, 3], ActivationKind::Pfts, 0.5).unwrap();
    let net = init_network(&cfg, &mut RandomStream::new(1)).unwrap();
    let x = RandomStream::new(2).uniform(0.0, 1.0, 4, 3).unwrap();
    let labels = [0, 1, 2, 0];
    let masked_loss = |n: &Network| {
        let (logits, _) = n.forward_train(&x, &mut RandomStream::new(99)).unwrap();
        softmax_cross_entropy(&logits, &labels).unwrap().0
    };
    let (logits, cache) = net.forward_train(&x, &mut RandomStream::new(99)).unwrap();
    let (_, probs) = softmax_cross_entropy(&logits, &labels).unwrap();
    let g = net.backward(&cache, &probs, &labels).unwrap();

    let mut work = net.clone();
    for (i, j) in [(0, 0), (1, 4), (2, 5)] {
        let w0 = work.layers()[0].weights.get(i, j);
        work.layers_mut()[0].weights.set(i, j, w0 + EPS);
        let up = masked_loss(&work);
        work.layers_mut()[0].weights.set(i, j, w0 - EPS);
        let down = masked_loss(&work);
        work.layers_mut()[0].weights.set(i, j, w0);
        let numeric = (up - down) / (2.0 * EPS);
        let analytic = g.weights[0].get(i, j);
        assert!((analytic - numeric).abs() < 1e-7, "w[{i},{j}]: {analytic} vs {numeric}");
    }
    let t0 = work.layers()[0].activation.unwrap().value;
    let shift = |n: &mut Network, v: f64| n.layers_mut()[0].activation.as_mut().unwrap().value = v;
    shift(&mut work, t0 + EPS);
    let up = masked_loss(&work);
    shift(&mut work, t0 - EPS);
    let down = masked_loss(&work);
    let numeric = (up - down) / (2.0 * EPS);
    assert!((g.activation[0].unwrap() - numeric).abs() < 1e-7);
}

#[test]
fn hand_built_relu_net_gradient() {
    // 1 -> 1 -> 2 with ReLU; small enough to differentiate by hand.
    let cfg = NetworkConfig::new("hand", 1, vec![1, 2], ActivationKind::Relu, 0.0).unwrap();
    let layers = vec![
        DenseLayer {
            weights: Matrix::from_rows(&[[2.0]]).unwrap(),
            bias: Matrix::zeros(1, 1),
            activation: Some(ActivationSpec::new(ActivationKind::Relu).init_state()),
        },
        DenseLayer {
            weights: Matrix::from_rows(&[[1.0, -1.0]]).unwrap(),
            bias: Matrix::zeros(1, 2),
            activation: None,
        },
    ];
    let net = Network::from_layers(cfg, layers).unwrap();
    let x = Matrix::from_rows(&[[0.5]]).unwrap();
    let (logits, cache) = net.forward_train(&x, &mut RandomStream::new(0)).unwrap();
    assert_eq!(logits.as_slice(), &[1.0, -1.0]);
    let (_, probs) = softmax_cross_entropy(&logits, &[0]).unwrap();
    let g = net.backward(&cache, &probs, &[0]).unwrap();
    let p1 = probs.get(0, 1);
    // dL/dlogits = [p0 - 1, p1] = [-p1, p1]; h = 1
    assert!((g.weights[1].get(0, 0) + p1).abs() < 1e-15);
    assert!((g.weights[1].get(0, 1) - p1).abs() < 1e-15);
    // dL/dh = -p1 - p1; dL/dz = same (z > 0); dL/dw0 = x * that
    assert!((g.weights[0].get(0, 0) - 0.5 * -2.0 * p1).abs() < 1e-15);
    assert_eq!(g.activation, vec![None, None]);
}
