use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::Dataset;

/// Stream reserved for the design matrix, apart from replication streams.
const DESIGN_STREAM: u64 = u64::MAX;

/// Generator for replication `rep` under `seed`, independent of all others.
pub fn child_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Intercept column of ones, then `p − 1` Gaussian columns scaled to norm `√n`.
pub fn gaussian_design(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = child_rng(seed, DESIGN_STREAM);
    let mut x = DMatrix::from_element(n, p, 1.0);
    for j in 1..p {
        let mut col: DVector<f64> = DVector::from_fn(n, |_, _| rng.sample(StandardNormal));
        col *= (n as f64).sqrt() / col.norm();
        x.set_column(j, &col);
    }
    x
}

pub fn design_names(p: usize) -> Vec<String> {
    std::iter::once("(Intercept)".to_string())
        .chain((1..p).map(|j| format!("x{j}")))
        .collect()
}

/// `y = Xβ* + u* + ε`, `ε ~ N(0, σ²I)`.
#[derive(Debug, Clone)]
pub struct MeanShiftSpec {
    pub x: DMatrix<f64>,
    pub beta: DVector<f64>,
    pub shift: DVector<f64>,
    pub sigma: f64,
}

impl MeanShiftSpec {
    pub fn new(x: DMatrix<f64>, beta: DVector<f64>, shift: DVector<f64>, sigma: f64) -> Result<Self> {
        if beta.len() != x.ncols() || shift.len() != x.nrows() {
            return Err(Error::InvalidInput("mean-shift dimensions disagree".into()));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("σ must be finite and non-negative, got {sigma}")));
        }
        Ok(MeanShiftSpec { x, beta, shift, sigma })
    }

    /// Setting with outliers at rows 0..5 shifted by `(s, s, s, −s, −s)`.
    pub fn five_outliers(x: DMatrix<f64>, beta: DVector<f64>, s: f64, sigma: f64) -> Result<Self> {
        let n = x.nrows();
        if n < 5 {
            return Err(Error::InvalidInput("need at least five rows".into()));
        }
        let mut shift = DVector::zeros(n);
        for (i, sign) in [1.0, 1.0, 1.0, -1.0, -1.0].into_iter().enumerate() {
            shift[i] = sign * s;
        }
        Self::new(x, beta, shift, sigma)
    }

    pub fn mean(&self) -> DVector<f64> {
        &self.x * &self.beta + &self.shift
    }

    /// `M*`: rows without a mean shift.
    pub fn true_inliers(&self) -> Vec<usize> {
        (0..self.shift.len()).filter(|&i| self.shift[i] == 0.0).collect()
    }

    pub fn true_outliers(&self) -> Vec<usize> {
        (0..self.shift.len()).filter(|&i| self.shift[i] != 0.0).collect()
    }

    pub fn draw_response(&self, rng: &mut impl Rng) -> DVector<f64> {
        let mut y = self.mean();
        for v in y.iter_mut() {
            let e: f64 = rng.sample(StandardNormal);
            *v += self.sigma * e;
        }
        y
    }
}

/// Draw for replication `rep`; the same `(seed, rep)` always gives the same data.
pub fn generate_mean_shift(spec: &MeanShiftSpec, seed: u64, rep: u64) -> Result<Dataset> {
    let y = spec.draw_response(&mut child_rng(seed, rep));
    Dataset::new(y, spec.x.clone(), design_names(spec.x.ncols()), true)
}
