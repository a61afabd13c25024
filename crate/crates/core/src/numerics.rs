//! Dense row-major matrices and the seedable random stream used by every
//! other module.
//!
//! The random stream is ChaCha8 (`rand_chacha`), seeded through
//! `SeedableRng::seed_from_u64`. Gaussian draws use the ziggurat sampler from
//! `rand_distr::StandardNormal`. Child streams for parallel work are seeded
//! with a SplitMix64 mix of the parent seed and the task index. The generator
//! is fixed for a release, so any seed reproduces bit-identical draws within
//! this crate.

use std::fmt;

use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense, row-major matrix of `f64`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} ", self.rows, self.cols)?;
        f.debug_list().entries(self.data.chunks(self.cols.max(1))).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Collapse each row to one value (result is `rows x 1`).
    Row,
    /// Collapse each column to one value (result is `1 x cols`).
    Col,
}

impl TryFrom<usize> for Axis {
    type Error = Error;

    fn try_from(axis: usize) -> Result<Self> {
        match axis {
            0 => Ok(Axis::Col),
            1 => Ok(Axis::Row),
            other => Err(Error::Shape(format!(
                "axis {other} is invalid for a 2-D matrix (expected 0 or 1)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceOp {
    Sum,
    Max,
    /// Index of the maximum; ties resolve to the lowest index.
    Argmax,
    Mean,
}

fn check_finite(data: &[f64], what: &str) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(i) => Err(Error::Domain(format!(
            "{what} produced a non-finite value ({}) at flat index {i}",
            data[i]
        ))),
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        check_finite(&data, "matrix construction")?;
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} values, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Matrix::from_vec(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    /// Overwrites one entry.
    ///
    /// # Panics
    /// If `v` is not finite or the index is out of bounds.
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        assert!(v.is_finite(), "matrix entries must be finite, got {v}");
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn shape_str(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {} by {}",
                self.shape_str(),
                other.shape_str()
            )));
        }
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let out_row = &mut out[i * n..(i + 1) * n];
            for p in 0..k {
                let a = self.data[i * k + p];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[p * n..(p + 1) * n];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        check_finite(&out, "matmul")?;
        Ok(Matrix {
            rows: m,
            cols: n,
            data: out,
        })
    }

    /// `selfᵀ * other` without materializing the transpose.
    pub fn t_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply transpose of {} by {}",
                self.shape_str(),
                other.shape_str()
            )));
        }
        let (k, m, n) = (self.rows, self.cols, other.cols);
        let mut out = vec![0.0; m * n];
        for p in 0..k {
            let a_row = &self.data[p * m..(p + 1) * m];
            let b_row = &other.data[p * n..(p + 1) * n];
            for (i, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out[i * n..(i + 1) * n].iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        check_finite(&out, "matmul")?;
        Ok(Matrix {
            rows: m,
            cols: n,
            data: out,
        })
    }

    /// `self * otherᵀ` without materializing the transpose.
    pub fn matmul_t(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::Shape(format!(
                "cannot multiply {} by transpose of {}",
                self.shape_str(),
                other.shape_str()
            )));
        }
        let (m, k, n) = (self.rows, self.cols, other.rows);
        let mut out = Vec::with_capacity(m * n);
        for i in 0..m {
            let a_row = &self.data[i * k..(i + 1) * k];
            for j in 0..n {
                let b_row = &other.data[j * k..(j + 1) * k];
                out.push(a_row.iter().zip(b_row).map(|(a, b)| a * b).sum());
            }
        }
        check_finite(&out, "matmul")?;
        Ok(Matrix {
            rows: m,
            cols: n,
            data: out,
        })
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// Applies `f` to every element.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Matrix> {
        let data: Vec<f64> = self.data.iter().map(|&v| f(v)).collect();
        check_finite(&data, "elementwise map")?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Combines two same-shape matrices elementwise.
    pub fn zip_map(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "elementwise operation on {} and {}",
                self.shape_str(),
                other.shape_str()
            )));
        }
        let data: Vec<f64> = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        check_finite(&data, "elementwise map")?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Adds a `1 x cols` row vector to every row.
    pub fn add_row_vector(&self, v: &Matrix) -> Result<Matrix> {
        if v.rows != 1 || v.cols != self.cols {
            return Err(Error::Shape(format!(
                "cannot broadcast {} over rows of {}",
                v.shape_str(),
                self.shape_str()
            )));
        }
        let mut out = self.clone();
        for row in out.data.chunks_mut(self.cols.max(1)) {
            for (o, b) in row.iter_mut().zip(&v.data) {
                *o += b;
            }
        }
        check_finite(&out.data, "row broadcast")?;
        Ok(out)
    }

    /// Collapses the matrix along `axis`. `Axis::Row` yields a `rows x 1`
    /// column, `Axis::Col` a `1 x cols` row. Argmax indices are stored as
    /// exact integers in `f64`.
    pub fn reduce(&self, axis: Axis, op: ReduceOp) -> Result<Matrix> {
        let reduce_lane = |lane: &mut dyn Iterator<Item = f64>| -> f64 {
            match op {
                ReduceOp::Sum => lane.sum(),
                ReduceOp::Mean => {
                    let (s, n) = lane.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
                    s / n as f64
                }
                ReduceOp::Max => lane.fold(f64::NEG_INFINITY, f64::max),
                ReduceOp::Argmax => argmax_iter(lane).map_or(f64::NAN, |i| i as f64),
            }
        };
        let (lanes, lane_len) = match axis {
            Axis::Row => (self.rows, self.cols),
            Axis::Col => (self.cols, self.rows),
        };
        if lane_len == 0 {
            return Err(Error::Shape(format!(
                "cannot reduce empty lanes of a {} matrix",
                self.shape_str()
            )));
        }
        let data: Vec<f64> = (0..lanes)
            .map(|l| match axis {
                Axis::Row => reduce_lane(&mut self.row(l).iter().copied()),
                Axis::Col => reduce_lane(&mut (0..self.rows).map(|r| self.get(r, l))),
            })
            .collect();
        let (rows, cols) = match axis {
            Axis::Row => (lanes, 1),
            Axis::Col => (1, lanes),
        };
        check_finite(&data, "reduce")?;
        Ok(Matrix { rows, cols, data })
    }

    /// Per-row argmax, lowest index on ties.
    pub fn argmax_rows(&self) -> Vec<usize> {
        (0..self.rows)
            .map(|r| argmax(self.row(r)).unwrap_or(0))
            .collect()
    }

    /// Copies the listed rows into a new matrix, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub(crate) fn scale_in_place(&mut self, k: f64) {
        self.data.iter_mut().for_each(|v| *v *= k);
    }

    /// `self -= k * other`.
    pub(crate) fn axpy_in_place(&mut self, k: f64, other: &Matrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "cannot update {} with {}",
                self.shape_str(),
                other.shape_str()
            )));
        }
        for (p, g) in self.data.iter_mut().zip(&other.data) {
            *p += k * g;
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn argmax_iter(it: &mut dyn Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in it.enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> Option<usize> {
    argmax_iter(&mut values.iter().copied())
}

const fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `seed` with each of `parts` in turn. Each step is a bijection of the
/// running state for a fixed part, so tuples that differ in one coordinate
/// map to different seeds.
pub fn mix_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Deterministic ChaCha8 stream. Single-owner; derive children with
/// [`RandomStream::child`] for parallel work.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream for task `index`, derived from this stream's seed.
    pub fn child(&self, index: u64) -> RandomStream {
        RandomStream::new(mix_seed(self.seed, &[index]))
    }

    /// One draw in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn next_gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }

    /// `rows x cols` draws from `[lo, hi)`; `lo == hi` yields the constant.
    pub fn uniform(&mut self, lo: f64, hi: f64, rows: usize, cols: usize) -> Result<Matrix> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::Domain(format!(
                "uniform interval [{lo}, {hi}) is empty or not finite"
            )));
        }
        if lo == hi {
            return Ok(Matrix::filled(rows, cols, lo));
        }
        let dist = Uniform::new(lo, hi);
        let data = (0..rows * cols).map(|_| dist.sample(&mut self.rng)).collect();
        Ok(Matrix { rows, cols, data })
    }

    pub fn normal(&mut self, mean: f64, std: f64, rows: usize, cols: usize) -> Result<Matrix> {
        if !(std >= 0.0 && std.is_finite() && mean.is_finite()) {
            return Err(Error::Domain(format!(
                "normal distribution needs finite mean and std >= 0, got mean={mean}, std={std}"
            )));
        }
        let data = (0..rows * cols)
            .map(|_| mean + std * self.next_gaussian())
            .collect();
        Ok(Matrix { rows, cols, data })
    }

    /// Matrix of independent {0, 1} entries, 1 with probability `keep_prob`.
    pub fn bernoulli_mask(&mut self, keep_prob: f64, rows: usize, cols: usize) -> Result<Matrix> {
        if !(0.0..=1.0).contains(&keep_prob) {
            return Err(Error::Domain(format!(
                "keep probability {keep_prob} is outside [0, 1]"
            )));
        }
        let data = (0..rows * cols)
            .map(|_| if self.next_f64() < keep_prob { 1.0 } else { 0.0 })
            .collect();
        Ok(Matrix { rows, cols, data })
    }
}
