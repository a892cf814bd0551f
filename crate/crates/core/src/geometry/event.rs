use nalgebra::DVector;

use super::constraint::{solve_quadratic_sign_set, ProjectionCache, QuadraticConstraint};
use super::interval::IntervalSet;
use crate::error::{Error, Result};

/// Union of intersections of quadratic constraints over `R^n`.
///
/// A group with no constraints is the whole space; an event with no groups
/// is empty.
#[derive(Debug, Clone)]
pub struct SelectionEvent {
    dim: usize,
    groups: Vec<Vec<QuadraticConstraint>>,
}

impl SelectionEvent {
    pub fn new(dim: usize, groups: Vec<Vec<QuadraticConstraint>>) -> Self {
        SelectionEvent { dim, groups }
    }

    pub fn intersection(dim: usize, constraints: Vec<QuadraticConstraint>) -> Self {
        Self::new(dim, vec![constraints])
    }

    pub fn whole_space(dim: usize) -> Self {
        Self::new(dim, vec![Vec::new()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn groups(&self) -> &[Vec<QuadraticConstraint>] {
        &self.groups
    }

    pub fn constraint_count(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    fn check_dim(&self, y: &DVector<f64>) -> Result<()> {
        if y.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "vector of length {} against an event in dimension {}",
                y.len(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn contains(&self, y: &DVector<f64>) -> bool {
        if y.len() != self.dim {
            return false;
        }
        let mut cache = ProjectionCache::new();
        self.groups
            .iter()
            .any(|g| g.iter().all(|c| c.evaluate_cached(y, &mut cache) >= 0.0))
    }

    /// Smallest constraint value within the best-satisfied group.
    /// Nonnegative exactly when `y` is in the event.
    pub fn margin(&self, y: &DVector<f64>) -> f64 {
        let mut cache = ProjectionCache::new();
        self.groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|c| c.evaluate_cached(y, &mut cache))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `{t : z + t v ∈ E}`.
    pub fn slice_on_line(&self, z: &DVector<f64>, v: &DVector<f64>) -> Result<IntervalSet> {
        self.check_dim(z)?;
        self.check_dim(v)?;
        let mut cache = ProjectionCache::new();
        let mut pieces = Vec::with_capacity(self.groups.len());
        for group in &self.groups {
            let mut acc = IntervalSet::real_line();
            for c in group {
                let (a, b, cc) = c.line_coefficients(z, v, &mut cache);
                acc = acc.intersect(&solve_quadratic_sign_set(a, b, cc));
                if acc.is_empty() {
                    break;
                }
            }
            pieces.push(acc);
        }
        Ok(IntervalSet::union_all(&pieces))
    }
}
