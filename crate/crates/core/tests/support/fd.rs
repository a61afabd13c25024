//! Central-difference oracle for whole-network gradients. It recomputes the
//! loss with its own forward pass and log-sum-exp, so it shares no code with
//! the engine's backward path.

use afbench::network::{Gradients, Network};
use afbench::Matrix;

/// Mean softmax cross-entropy of `net` on `(x, labels)`, no dropout.
pub fn reference_loss(net: &Network, x: &Matrix, labels: &[usize]) -> f64 {
    let (logits, _) = reference_forward(net, x);
    let mut total = 0.0;
    for (r, &l) in labels.iter().enumerate() {
        let row = logits.row(r);
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
        total += lse - row[l];
    }
    total / labels.len() as f64
}

/// Plain nested-loop forward pass; also returns every hidden pre-activation.
pub fn reference_forward(net: &Network, x: &Matrix) -> (Matrix, Vec<f64>) {
    let spec = net.config().activation;
    let mut a: Vec<Vec<f64>> = (0..x.rows()).map(|r| x.row(r).to_vec()).collect();
    let mut pre = Vec::new();
    for layer in net.layers() {
        let (fan_in, fan_out) = layer.weights.shape();
        a = a
            .iter()
            .map(|row| {
                (0..fan_out)
                    .map(|j| {
                        let z = layer.bias.get(0, j) + (0..fan_in).map(|i| row[i] * layer.weights.get(i, j)).sum::<f64>();
                        match layer.activation {
                            Some(s) => {
                                pre.push(z);
                                spec.forward(z, s.value)
                            }
                            None => z,
                        }
                    })
                    .collect()
            })
            .collect();
    }
    (Matrix::from_rows(&a).unwrap(), pre)
}

/// Every parameter's central difference, in the layout of [`Gradients`].
pub fn numeric_gradients(net: &Network, x: &Matrix, labels: &[usize], eps: f64) -> Gradients {
    let mut work = net.clone();
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    let mut activation = Vec::new();
    let trainable = net.config().activation.is_trainable();
    for l in 0..net.layers().len() {
        let mut perturb = |which: &dyn Fn(&mut Network, f64)| -> f64 {
            which(&mut work, eps);
            let up = reference_loss(&work, x, labels);
            which(&mut work, -2.0 * eps);
            let down = reference_loss(&work, x, labels);
            which(&mut work, eps);
            (up - down) / (2.0 * eps)
        };
        let (r, c) = net.layers()[l].weights.shape();
        let mut gw = Matrix::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                let g = perturb(&|n: &mut Network, d| {
                    let w = &mut n.layers_mut()[l].weights;
                    w.set(i, j, w.get(i, j) + d);
                });
                gw.set(i, j, g);
            }
        }
        let mut gb = Matrix::zeros(1, c);
        for j in 0..c {
            let g = perturb(&|n: &mut Network, d| {
                let b = &mut n.layers_mut()[l].bias;
                b.set(0, j, b.get(0, j) + d);
            });
            gb.set(0, j, g);
        }
        weights.push(gw);
        biases.push(gb);
        activation.push(match net.layers()[l].activation {
            Some(_) if trainable => Some(perturb(&|n: &mut Network, d| {
                n.layers_mut()[l].activation.as_mut().unwrap().value += d;
            })),
            _ => None,
        });
    }
    Gradients {
        weights,
        biases,
        activation,
    }
}

/// Largest |a − n| / max(|a|, |n|, floor) over all entries.
pub fn max_relative_error(analytic: &Gradients, numeric: &Gradients, floor: f64) -> f64 {
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(floor);
    let mut worst: f64 = 0.0;
    for (a, n) in analytic.weights.iter().chain(&analytic.biases).zip(numeric.weights.iter().chain(&numeric.biases)) {
        assert_eq!(a.shape(), n.shape());
        for (x, y) in a.as_slice().iter().zip(n.as_slice()) {
            worst = worst.max(rel(*x, *y));
        }
    }
    for (a, n) in analytic.activation.iter().zip(&numeric.activation) {
        match (a, n) {
            (Some(a), Some(n)) => worst = worst.max(rel(*a, *n)),
            (None, None) => {}
            _ => panic!("activation gradient presence differs"),
        }
    }
    worst
}
