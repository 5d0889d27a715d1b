//! The almost-sure large-sample limits of the criteria.
//!
//! Under consistency of the (power) posterior, DICₙ, BPICₙ, and WBICₙ all
//! converge to −2·E[log p(X | θ₀)], which has a closed form per model:
//!
//! - geometric: 2 log(1 + EX) − 2·EX·log(EX / (1 + EX)),
//! - normal: p log 2π + E‖X‖² − ‖EX‖²,
//! - Laplace: 2 log(2γ₀) + 2.
//!
//! Limits take population moments as explicit arguments so misspecified
//! inputs can be probed; [`limit_for_dgp`] derives the moments from a
//! [`DataGeneratingProcess`].

use crate::models::{DataGeneratingProcess, LN_2PI};
use crate::{Error, Result};

/// Population inputs a limit was computed from.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitInputs {
    Geometric {
        ex: f64,
    },
    Normal {
        p: usize,
        e_norm_sq: f64,
        norm_e_sq: f64,
    },
    Laplace {
        gamma0: f64,
    },
}

/// A theoretical criterion limit.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitValue {
    pub value: f64,
    pub inputs: LimitInputs,
}

/// Geometric limit 2 log(1 + EX) − 2·EX·log(EX / (1 + EX)), for EX > 0.
pub fn limit_geometric(ex: f64) -> Result<LimitValue> {
    if !(ex > 0.0 && ex.is_finite()) {
        return Err(Error::Domain(format!(
            "E X must be finite and > 0, got {ex}"
        )));
    }
    let value = 2.0 * (1.0 + ex).ln() - 2.0 * ex * (ex / (1.0 + ex)).ln();
    Ok(LimitValue {
        value,
        inputs: LimitInputs::Geometric { ex },
    })
}

/// Normal limit p log 2π + E‖X‖² − ‖EX‖².
pub fn limit_normal(p: usize, e_norm_sq: f64, norm_e_sq: f64) -> Result<LimitValue> {
    if p == 0 {
        return Err(Error::Argument("dimension p must be ≥ 1".into()));
    }
    if !(norm_e_sq >= 0.0 && e_norm_sq >= norm_e_sq) {
        return Err(Error::Domain(format!(
            "moments require E‖X‖² ≥ ‖EX‖² ≥ 0, got ({e_norm_sq}, {norm_e_sq})"
        )));
    }
    let value = p as f64 * LN_2PI + e_norm_sq - norm_e_sq;
    Ok(LimitValue {
        value,
        inputs: LimitInputs::Normal {
            p,
            e_norm_sq,
            norm_e_sq,
        },
    })
}

/// Laplace limit 2 log(2γ₀) + 2, for γ₀ > 0.
pub fn limit_laplace(gamma0: f64) -> Result<LimitValue> {
    if !(gamma0 > 0.0 && gamma0.is_finite()) {
        return Err(Error::Domain(format!(
            "gamma0 must be finite and > 0, got {gamma0}"
        )));
    }
    Ok(LimitValue {
        value: 2.0 * (2.0 * gamma0).ln() + 2.0,
        inputs: LimitInputs::Laplace { gamma0 },
    })
}

/// Limit for data drawn from `dgp` and evaluated under the matching
/// well-specified model.
pub fn limit_for_dgp(dgp: &DataGeneratingProcess) -> Result<LimitValue> {
    match dgp {
        DataGeneratingProcess::Geometric { theta0 } => limit_geometric((1.0 - theta0) / theta0),
        DataGeneratingProcess::Normal { mean } => {
            let p = mean.len();
            let norm_e_sq: f64 = mean.iter().map(|m| m * m).sum();
            // Identity covariance: E‖X‖² = ‖EX‖² + p.
            limit_normal(p, norm_e_sq + p as f64, norm_e_sq)
        }
        DataGeneratingProcess::Laplace { scale, .. } => limit_laplace(*scale),
    }
}
