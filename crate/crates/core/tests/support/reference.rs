//! Activation values at default parameters, evaluated with mpmath at 50
//! digits by `tests/oracle/activation_values.py`.

#![allow(clippy::excessive_precision, clippy::approx_constant)]

pub const POINTS: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

pub const REFERENCE: [(&str, [f64; 5]); 10] = [
    ("relu", [0.0, 0.0, 0.0, 1.0, 2.0]),
    ("swish", [-0.23840584404423511188, -0.26894142136999512075, 0.0, 0.73105857863000487925, 1.7615941559557648881]),
    ("tanh", [-0.96402758007581688395, -0.76159415595576488812, 0.0, 0.76159415595576488812, 0.96402758007581688395]),
    ("lrelu", [-0.02, -0.01, 0.0, 1.0, 2.0]),
    ("prelu", [-0.5, -0.25, 0.0, 1.0, 2.0]),
    ("softplus", [0.12692801104297249644, 0.31326168751822283405, 0.69314718055994530942, 1.3132616875182228340, 2.1269280110429724964]),
    ("elu", [-0.86466471676338730811, -0.63212055882855767840, 0.0, 1.0, 2.0]),
    ("frelu", [-0.398, -0.398, -0.398, 0.602, 1.602]),
    ("fts", [-0.2, -0.2, -0.2, 0.53105857863000487925, 1.5615941559557648881]),
    ("pfts", [-0.2, -0.2, -0.2, 0.53105857863000487925, 1.5615941559557648881]),
];
