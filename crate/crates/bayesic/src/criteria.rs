//! The three information criteria, on the per-observation scale:
//!
//! - DICₙ  = −4·E_Πₙ[ℓₙ(θ)] + 2·ℓₙ(θ̄ₙ), with θ̄ₙ the posterior mean,
//! - BPICₙ = −2·E_Πₙ[ℓₙ(θ)] + 2p/n,
//! - WBICₙ = −2·E_{Πₙ^{βₙ}}[ℓₙ(θ)], canonically at βₙ = 1/log n,
//!
//! where ℓₙ(θ) = (1/n) Σᵢ log p(Xᵢ|θ). DIC and BPIC integrate against the
//! untempered posterior (βₙ = 1); passing a tempered posterior is a contract
//! error. The original (sum-scale) conventions are n·DICₙ, n·BPICₙ, and
//! n·WBICₙ/2; the CLI can rescale on output.
//!
//! The geometric model additionally gets an exact digamma closed form and
//! the large-n Poincaré approximation of the DIC, so the approximate path
//! stays auditable against the exact one.

use crate::models::{avg_loglik, ModelSpec, ObservedSample, Theta};
use crate::posterior::{
    power_posterior, power_posterior_with_nodes, BetaSchedule, PowerPosterior, Representation,
};
use crate::specfun::digamma;
use crate::{Error, Result};

/// Which criterion a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriterionKind {
    Dic,
    Bpic,
    Wbic,
}

impl CriterionKind {
    pub fn name(&self) -> &'static str {
        match self {
            CriterionKind::Dic => "dic",
            CriterionKind::Bpic => "bpic",
            CriterionKind::Wbic => "wbic",
        }
    }
}

impl std::fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How a criterion value was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    PoincareApprox,
    Quadrature,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::PoincareApprox => "poincare-approx",
            Method::Quadrature => "quadrature",
        }
    }
}

/// One evaluated criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionValue {
    pub kind: CriterionKind,
    pub n: u64,
    pub beta_n: f64,
    pub value: f64,
    pub method: Method,
}

impl CriterionValue {
    fn new(kind: CriterionKind, n: u64, beta_n: f64, value: f64, method: Method) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Domain(format!(
                "{kind} evaluated to a non-finite value {value}"
            )));
        }
        if matches!(kind, CriterionKind::Dic | CriterionKind::Bpic) && beta_n != 1.0 {
            return Err(Error::Contract(format!(
                "{kind} is defined against the untempered posterior, got beta_n = {beta_n}"
            )));
        }
        Ok(CriterionValue {
            kind,
            n,
            beta_n,
            value,
            method,
        })
    }
}

// DIC and BPIC integrate against Πₙ, i.e. βₙ = 1. Posteriors built directly
// from kernels carry no temperature and are accepted as-is.
fn require_untempered(post: &PowerPosterior, kind: CriterionKind) -> Result<()> {
    match post.beta_n() {
        Some(b) if b != 1.0 => Err(Error::Contract(format!(
            "{kind} requires a posterior built at beta_n = 1, got {b}"
        ))),
        _ => Ok(()),
    }
}

/// E_post[(1/n) Σ log p(Xᵢ|θ)] and the method that computed it.
fn expected_avg_loglik(
    model: &ModelSpec,
    sample: &ObservedSample,
    post: &PowerPosterior,
) -> Result<(f64, Method)> {
    match (post.representation(), model) {
        (Representation::Beta { a, b }, ModelSpec::Geometric { .. }) => {
            sample.check_geometric_support()?;
            let psi_ab = digamma(a + b)?;
            let e = sample.mean_scalar() * (digamma(*b)? - psi_ab) + digamma(*a)? - psi_ab;
            Ok((e, Method::ClosedForm))
        }
        (Representation::Normal { mean, variance }, ModelSpec::Normal { prior_mean }) => {
            let p = prior_mean.len();
            if mean.len() != p || sample.dim() != p {
                return Err(Error::Argument(
                    "posterior, model, and sample dimensions disagree".into(),
                ));
            }
            let n = sample.len() as f64;
            let cross: f64 = sample.mean().iter().zip(mean).map(|(x, m)| x * m).sum();
            let mean_sq: f64 = mean.iter().map(|m| m * m).sum();
            let e_norm_sq = mean_sq + p as f64 * variance;
            let e = -0.5 * p as f64 * crate::models::LN_2PI
                - 0.5 * (sample.sum_sq() / n - 2.0 * cross + e_norm_sq);
            Ok((e, Method::ClosedForm))
        }
        (Representation::Grid(_), _) => {
            let e = post.expect_fn(|c| {
                avg_loglik(model, sample, &Theta::new(c.to_vec()))
                    .expect("grid nodes lie inside the parameter space")
            })?;
            Ok((e, Method::Quadrature))
        }
        (repr, model) => Err(Error::Argument(format!(
            "posterior representation {repr:?} does not match model {model:?}"
        ))),
    }
}

/// BPICₙ = −2·E_Πₙ ℓₙ + 2p/n.
pub fn bpic(
    model: &ModelSpec,
    sample: &ObservedSample,
    post: &PowerPosterior,
) -> Result<CriterionValue> {
    require_untempered(post, CriterionKind::Bpic)?;
    let (e, method) = expected_avg_loglik(model, sample, post)?;
    let n = sample.len() as u64;
    let value = -2.0 * e + 2.0 * model.dim() as f64 / n as f64;
    CriterionValue::new(CriterionKind::Bpic, n, 1.0, value, method)
}

/// DICₙ = −4·E_Πₙ ℓₙ + 2·ℓₙ(θ̄ₙ), the plug-in taken at the posterior mean.
pub fn dic(
    model: &ModelSpec,
    sample: &ObservedSample,
    post: &PowerPosterior,
) -> Result<CriterionValue> {
    require_untempered(post, CriterionKind::Dic)?;
    let (e, method) = expected_avg_loglik(model, sample, post)?;
    let theta_bar = post.mean();
    let plug = avg_loglik(model, sample, &theta_bar)?;
    let n = sample.len() as u64;
    CriterionValue::new(CriterionKind::Dic, n, 1.0, -4.0 * e + 2.0 * plug, method)
}

/// WBICₙ = −2·E_{Πₙ^{βₙ}} ℓₙ at βₙ from the schedule.
pub fn wbic(
    model: &ModelSpec,
    sample: &ObservedSample,
    schedule: BetaSchedule,
) -> Result<CriterionValue> {
    let n = sample.len() as u64;
    let beta_n = schedule.evaluate(n)?;
    wbic_at_beta(model, sample, beta_n)
}

/// WBIC at an explicit temperature βₙ > 0.
pub fn wbic_at_beta(
    model: &ModelSpec,
    sample: &ObservedSample,
    beta_n: f64,
) -> Result<CriterionValue> {
    let post = power_posterior(model, sample, beta_n)?;
    let (e, method) = expected_avg_loglik(model, sample, &post)?;
    CriterionValue::new(
        CriterionKind::Wbic,
        sample.len() as u64,
        beta_n,
        -2.0 * e,
        method,
    )
}

/// Exact geometric DIC from the Beta(n+α, n·x̄ₙ+β) posterior via digamma
/// moments.
pub fn dic_geometric_exact(alpha: f64, beta: f64, n: u64, xbar: f64) -> Result<CriterionValue> {
    check_geometric_args(alpha, beta, n, xbar)?;
    let a = n as f64 + alpha;
    let b = n as f64 * xbar + beta;
    let psi_ab = digamma(a + b)?;
    let e = xbar * (digamma(b)? - psi_ab) + digamma(a)? - psi_ab;
    let plug = xbar * (b / (a + b)).ln() + (a / (a + b)).ln();
    CriterionValue::new(
        CriterionKind::Dic,
        n,
        1.0,
        -4.0 * e + 2.0 * plug,
        Method::ClosedForm,
    )
}

/// Large-n geometric DIC with ψ(z) replaced by log z − 1/(2z) throughout.
pub fn dic_geometric_approx(alpha: f64, beta: f64, n: u64, xbar: f64) -> Result<CriterionValue> {
    check_geometric_args(alpha, beta, n, xbar)?;
    let a = n as f64 + alpha;
    let b = n as f64 * xbar + beta;
    let t = a + b;
    let value = -2.0 * (a / t).ln() + 2.0 * b / (a * t) - 2.0 * xbar * (b / t).ln()
        + 2.0 * a * xbar / (b * t);
    CriterionValue::new(CriterionKind::Dic, n, 1.0, value, Method::PoincareApprox)
}

fn check_geometric_args(alpha: f64, beta: f64, n: u64, xbar: f64) -> Result<()> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::Argument(format!(
            "Beta prior parameters must be finite and > 0, got ({alpha}, {beta})"
        )));
    }
    if n == 0 {
        return Err(Error::Argument("geometric DIC requires n ≥ 1".into()));
    }
    if !(xbar >= 0.0 && xbar.is_finite()) {
        return Err(Error::Argument(format!(
            "xbar must be finite and ≥ 0, got {xbar}"
        )));
    }
    Ok(())
}

/// Evaluate one criterion for the Laplace model on an explicit grid.
///
/// DIC and BPIC integrate against the βₙ = 1 grid posterior; `beta_n` is the
/// WBIC temperature.
pub fn laplace_criteria(
    model: &ModelSpec,
    sample: &ObservedSample,
    kind: CriterionKind,
    beta_n: f64,
    nodes: [usize; 2],
) -> Result<CriterionValue> {
    if !matches!(model, ModelSpec::Laplace { .. }) {
        return Err(Error::Argument(format!(
            "laplace_criteria requires a Laplace model, got {model:?}"
        )));
    }
    match kind {
        CriterionKind::Wbic => {
            let post = power_posterior_with_nodes(model, sample, beta_n, nodes)?;
            let (e, method) = expected_avg_loglik(model, sample, &post)?;
            CriterionValue::new(kind, sample.len() as u64, beta_n, -2.0 * e, method)
        }
        CriterionKind::Bpic | CriterionKind::Dic => {
            if beta_n != 1.0 {
                return Err(Error::Contract(format!(
                    "{kind} requires beta_n = 1, got {beta_n}"
                )));
            }
            let post = power_posterior_with_nodes(model, sample, 1.0, nodes)?;
            if kind == CriterionKind::Bpic {
                bpic(model, sample, &post)
            } else {
                dic(model, sample, &post)
            }
        }
    }
}
