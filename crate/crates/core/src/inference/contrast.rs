use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::pad;
use crate::model::{Dataset, OlsFit};

/// Linear functional of `β^M`.
#[derive(Debug, Clone, PartialEq)]
pub enum ContrastKind {
    /// `e_jᵀ β^M`
    Coefficient(usize),
    /// `x₀ᵀ β^M`
    Surface(DVector<f64>),
}

/// `ν` with `νᵀy = ` the fitted functional, plus the decomposition
/// `y = z + (σZ) ν/‖ν‖` used to condition on everything but `Z`.
#[derive(Debug, Clone)]
pub struct ContrastSpec {
    pub kind: ContrastKind,
    /// Length `n`, zero outside the retained rows.
    pub nu: DVector<f64>,
    pub nu_norm: f64,
    /// `νᵀy`
    pub estimate: f64,
    pub sigma: f64,
    /// `νᵀy / (σ‖ν‖)`
    pub statistic: f64,
    /// `P_ν^⊥ y`
    pub z_residual: DVector<f64>,
    /// `ν / ‖ν‖`
    pub direction: DVector<f64>,
}

pub fn make_contrast(fit: &OlsFit, kind: ContrastKind, data: &Dataset, sigma: f64) -> Result<ContrastSpec> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("σ must be positive and finite, got {sigma}")));
    }
    let p = fit.p();
    let pinv = fit.pseudo_inverse();
    let row = match &kind {
        ContrastKind::Coefficient(j) => {
            if *j >= p {
                return Err(Error::InvalidInput(format!("coefficient index {j} out of range")));
            }
            pinv.row(*j).transpose()
        }
        ContrastKind::Surface(x0) => {
            if x0.len() != p {
                return Err(Error::InvalidInput(format!("x₀ has length {}, expected {p}", x0.len())));
            }
            pinv.tr_mul(x0)
        }
    };
    let nu = pad(&row, fit.subset(), data.n());
    let nu_norm = nu.norm();
    if nu_norm == 0.0 {
        return Err(Error::InvalidInput("contrast vector is zero".into()));
    }
    let y = data.y();
    let estimate = nu.dot(y);
    let direction = &nu / nu_norm;
    let z_residual = y - &direction * direction.dot(y);
    Ok(ContrastSpec {
        kind,
        nu,
        nu_norm,
        estimate,
        sigma,
        statistic: estimate / (sigma * nu_norm),
        z_residual,
        direction,
    })
}
