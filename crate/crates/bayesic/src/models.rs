//! The three likelihood families: geometric, p-dimensional unit-variance
//! normal, and Laplace on a compact location/scale box.
//!
//! Each family knows its parameter space, per-observation log density,
//! sample-average log likelihood, population expected log likelihood, and
//! the unique population maximizer θ₀.

use std::sync::OnceLock;

use crate::{Error, Result};

pub(crate) const LN_2PI: f64 = 1.8378770664093453;

/// A likelihood family together with its prior hyperparameters and
/// parameter-space box.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// PMF (1−θ)ˣ θ on x ∈ {0, 1, 2, ...}, θ ∈ (0, 1), Beta(α, β) prior.
    /// α = β = 1 is the uniform prior.
    Geometric { alpha: f64, beta: f64 },
    /// Unit-covariance normal on ℝᵖ with a unit-covariance normal prior
    /// centered at `prior_mean`.
    Normal { prior_mean: Vec<f64> },
    /// Laplace with θ = (μ, γ) ∈ [−m, m] × [s⁻¹, s] and a uniform prior on
    /// the box.
    Laplace { m: f64, s: f64 },
}

impl ModelSpec {
    pub fn geometric(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0) {
            return Err(Error::Config(format!(
                "geometric prior needs alpha, beta > 0, got ({alpha}, {beta})"
            )));
        }
        Ok(ModelSpec::Geometric { alpha, beta })
    }

    pub fn normal(prior_mean: Vec<f64>) -> Result<Self> {
        if prior_mean.is_empty() || prior_mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(
                "normal prior mean must be a non-empty finite vector".into(),
            ));
        }
        Ok(ModelSpec::Normal { prior_mean })
    }

    pub fn laplace(m: f64, s: f64) -> Result<Self> {
        if !(m.is_finite() && s.is_finite() && m > 0.0 && s > 1.0) {
            return Err(Error::Config(format!(
                "Laplace box needs m > 0 and s > 1, got ({m}, {s})"
            )));
        }
        Ok(ModelSpec::Laplace { m, s })
    }

    /// Parameter dimension p: 1, p, or 2.
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Geometric { .. } => 1,
            ModelSpec::Normal { prior_mean } => prior_mean.len(),
            ModelSpec::Laplace { .. } => 2,
        }
    }

    /// Observation dimension q: 1 for geometric and Laplace, p for normal.
    pub fn obs_dim(&self) -> usize {
        match self {
            ModelSpec::Normal { prior_mean } => prior_mean.len(),
            _ => 1,
        }
    }

    /// Parameter-space box for the Laplace model.
    pub fn laplace_box(&self) -> Option<[(f64, f64); 2]> {
        match self {
            ModelSpec::Laplace { m, s } => Some([(-m, *m), (1.0 / s, *s)]),
            _ => None,
        }
    }

    /// Does θ lie in this model's parameter space?
    pub fn contains(&self, theta: &Theta) -> bool {
        let c = theta.coords();
        match self {
            ModelSpec::Geometric { .. } => c.len() == 1 && c[0] > 0.0 && c[0] < 1.0,
            ModelSpec::Normal { prior_mean } => {
                c.len() == prior_mean.len() && c.iter().all(|v| v.is_finite())
            }
            ModelSpec::Laplace { m, s } => {
                c.len() == 2 && c[0] >= -m && c[0] <= *m && c[1] >= 1.0 / s && c[1] <= *s
            }
        }
    }

    pub fn check_theta(&self, theta: &Theta) -> Result<()> {
        if self.contains(theta) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "theta {:?} outside the parameter space of {:?}",
                theta.coords(),
                self
            )))
        }
    }
}

/// A point in a model's parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct Theta(Vec<f64>);

impl Theta {
    pub fn new(coords: Vec<f64>) -> Self {
        Theta(coords)
    }

    pub fn scalar(value: f64) -> Self {
        Theta(vec![value])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// First (or only) coordinate.
    pub fn value(&self) -> f64 {
        self.0[0]
    }
}

impl From<f64> for Theta {
    fn from(v: f64) -> Self {
        Theta::scalar(v)
    }
}

// Sorted copy of a scalar sample plus prefix sums, so Σ|Xᵢ − μ| costs one
// binary search instead of a data scan.
#[derive(Debug)]
struct AbsDevTable {
    sorted: Vec<f64>,
    prefix: Vec<f64>,
}

impl AbsDevTable {
    fn build(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(sorted.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for &v in &sorted {
            acc += v;
            prefix.push(acc);
        }
        AbsDevTable { sorted, prefix }
    }

    fn sum_abs_dev(&self, mu: f64) -> f64 {
        let k = self.sorted.partition_point(|&v| v <= mu);
        let n = self.sorted.len();
        let below = mu * k as f64 - self.prefix[k];
        let above = (self.prefix[n] - self.prefix[k]) - mu * (n - k) as f64;
        below + above
    }
}

/// An immutable observed sample with the statistics every criterion needs
/// cached at construction, so evaluation never re-scans the raw data.
#[derive(Debug)]
pub struct ObservedSample {
    values: Vec<f64>, // row-major, n × q
    n: usize,
    q: usize,
    mean: Vec<f64>,
    sum_sq: f64,
    nonneg_integers: bool,
    abs_dev: OnceLock<AbsDevTable>,
}

impl ObservedSample {
    /// Scalar observations (geometric or Laplace data).
    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::multivariate(values, 1)
    }

    /// Row-major n × q observations.
    pub fn multivariate(values: Vec<f64>, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::Argument("observation dimension must be ≥ 1".into()));
        }
        if values.is_empty() || !values.len().is_multiple_of(q) {
            return Err(Error::Argument(format!(
                "sample length {} is not a positive multiple of q = {q}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("sample contains a non-finite value".into()));
        }
        let n = values.len() / q;
        let mut mean = vec![0.0; q];
        let mut sum_sq = 0.0;
        for row in values.chunks_exact(q) {
            for (m, &x) in mean.iter_mut().zip(row) {
                *m += x;
                sum_sq += x * x;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let nonneg_integers = q == 1 && values.iter().all(|&v| v >= 0.0 && v.fract() == 0.0);
        Ok(ObservedSample {
            values,
            n,
            q,
            mean,
            sum_sq,
            nonneg_integers,
            abs_dev: OnceLock::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.q
    }

    /// Sample mean x̄ₙ.
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn mean_scalar(&self) -> f64 {
        self.mean[0]
    }

    /// Σᵢ ‖Xᵢ‖².
    pub fn sum_sq(&self) -> f64 {
        self.sum_sq
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.q)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Σᵢ |Xᵢ − μ| for scalar samples, from the lazily built sorted table.
    pub fn sum_abs_dev(&self, mu: f64) -> Result<f64> {
        if self.q != 1 {
            return Err(Error::Argument(
                "sum_abs_dev is defined for scalar samples only".into(),
            ));
        }
        let table = self
            .abs_dev
            .get_or_init(|| AbsDevTable::build(&self.values));
        Ok(table.sum_abs_dev(mu))
    }

    pub(crate) fn check_geometric_support(&self) -> Result<()> {
        if self.q == 1 && self.nonneg_integers {
            Ok(())
        } else {
            Err(Error::Domain(
                "geometric data must be scalar non-negative integers".into(),
            ))
        }
    }
}

/// The population that simulated data is drawn from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataGeneratingProcess {
    Geometric {
        theta0: f64,
    },
    /// Identity covariance.
    Normal {
        mean: Vec<f64>,
    },
    Laplace {
        location: f64,
        scale: f64,
    },
}

impl DataGeneratingProcess {
    pub fn geometric(theta0: f64) -> Result<Self> {
        if !(theta0 > 0.0 && theta0 < 1.0) {
            return Err(Error::Config(format!(
                "geometric theta0 must lie in (0, 1), got {theta0}"
            )));
        }
        Ok(DataGeneratingProcess::Geometric { theta0 })
    }

    pub fn normal(mean: Vec<f64>) -> Result<Self> {
        if mean.is_empty() || mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(
                "normal mean must be finite and non-empty".into(),
            ));
        }
        Ok(DataGeneratingProcess::Normal { mean })
    }

    pub fn laplace(location: f64, scale: f64) -> Result<Self> {
        if !(location.is_finite() && scale.is_finite() && scale > 0.0) {
            return Err(Error::Config(format!(
                "Laplace DGP needs finite location and scale > 0, got ({location}, {scale})"
            )));
        }
        Ok(DataGeneratingProcess::Laplace { location, scale })
    }

    /// E X for the geometric family: (1 − θ₀)/θ₀.
    pub fn geometric_mean(&self) -> Option<f64> {
        match self {
            DataGeneratingProcess::Geometric { theta0 } => Some((1.0 - theta0) / theta0),
            _ => None,
        }
    }
}

/// log p(x | θ) for a single observation.
pub fn log_density(model: &ModelSpec, x: &[f64], theta: &Theta) -> Result<f64> {
    model.check_theta(theta)?;
    match model {
        ModelSpec::Geometric { .. } => {
            let v = x[0];
            if x.len() != 1 || !(v >= 0.0 && v.is_finite() && v.fract() == 0.0) {
                return Err(Error::Domain(format!(
                    "geometric observation must be a non-negative integer, got {x:?}"
                )));
            }
            let t = theta.value();
            Ok(v * (1.0 - t).ln() + t.ln())
        }
        ModelSpec::Normal { prior_mean } => {
            let p = prior_mean.len();
            if x.len() != p {
                return Err(Error::Argument(format!(
                    "normal observation has dimension {}, expected {p}",
                    x.len()
                )));
            }
            let quad: f64 = x
                .iter()
                .zip(theta.coords())
                .map(|(xi, ti)| (xi - ti) * (xi - ti))
                .sum();
            Ok(-0.5 * p as f64 * LN_2PI - 0.5 * quad)
        }
        ModelSpec::Laplace { .. } => {
            if x.len() != 1 {
                return Err(Error::Argument("Laplace observations are scalar".into()));
            }
            let mu = theta.coords()[0];
            let gamma = theta.coords()[1];
            Ok(-(2.0 * gamma).ln() - (x[0] - mu).abs() / gamma)
        }
    }
}

/// (1/n) Σᵢ log p(Xᵢ | θ), from the cached sample statistics.
pub fn avg_loglik(model: &ModelSpec, sample: &ObservedSample, theta: &Theta) -> Result<f64> {
    model.check_theta(theta)?;
    match model {
        ModelSpec::Geometric { .. } => {
            sample.check_geometric_support()?;
            let t = theta.value();
            Ok(sample.mean_scalar() * (1.0 - t).ln() + t.ln())
        }
        ModelSpec::Normal { prior_mean } => {
            let p = prior_mean.len();
            if sample.dim() != p {
                return Err(Error::Argument(format!(
                    "sample dimension {} does not match model dimension {p}",
                    sample.dim()
                )));
            }
            let n = sample.len() as f64;
            let cross: f64 = sample
                .mean()
                .iter()
                .zip(theta.coords())
                .map(|(m, t)| m * t)
                .sum();
            let norm_sq: f64 = theta.coords().iter().map(|t| t * t).sum();
            Ok(-0.5 * p as f64 * LN_2PI - 0.5 * (sample.sum_sq() / n - 2.0 * cross + norm_sq))
        }
        ModelSpec::Laplace { .. } => {
            let mu = theta.coords()[0];
            let gamma = theta.coords()[1];
            let n = sample.len() as f64;
            Ok(-(2.0 * gamma).ln() - sample.sum_abs_dev(mu)? / (n * gamma))
        }
    }
}

/// E[log p(X | θ)] under the data-generating process.
pub fn expected_loglik(
    model: &ModelSpec,
    dgp: &DataGeneratingProcess,
    theta: &Theta,
) -> Result<f64> {
    model.check_theta(theta)?;
    match (model, dgp) {
        (ModelSpec::Geometric { .. }, DataGeneratingProcess::Geometric { theta0 }) => {
            let ex = (1.0 - theta0) / theta0;
            let t = theta.value();
            Ok(ex * (1.0 - t).ln() + t.ln())
        }
        (ModelSpec::Normal { prior_mean }, DataGeneratingProcess::Normal { mean }) => {
            let p = prior_mean.len();
            if mean.len() != p {
                return Err(Error::Argument(
                    "DGP dimension does not match model dimension".into(),
                ));
            }
            // E‖X‖² = ‖mean‖² + p for identity covariance.
            let mean_sq: f64 = mean.iter().map(|m| m * m).sum();
            let e_norm_sq = mean_sq + p as f64;
            let cross: f64 = mean.iter().zip(theta.coords()).map(|(m, t)| m * t).sum();
            let norm_sq: f64 = theta.coords().iter().map(|t| t * t).sum();
            Ok(-0.5 * p as f64 * LN_2PI - 0.5 * (e_norm_sq - 2.0 * cross + norm_sq))
        }
        (ModelSpec::Laplace { .. }, DataGeneratingProcess::Laplace { location, scale }) => {
            let mu = theta.coords()[0];
            let gamma = theta.coords()[1];
            let d = (mu - location).abs();
            let e_abs_dev = scale * (-d / scale).exp() + d;
            Ok(-(2.0 * gamma).ln() - e_abs_dev / gamma)
        }
        _ => Err(Error::Argument(format!(
            "model {model:?} does not match DGP {dgp:?}"
        ))),
    }
}

/// The unique maximizer θ₀ of the population expected log likelihood.
pub fn true_theta0(model: &ModelSpec, dgp: &DataGeneratingProcess) -> Result<Theta> {
    match (model, dgp) {
        (ModelSpec::Geometric { .. }, DataGeneratingProcess::Geometric { theta0 }) => {
            let ex = (1.0 - theta0) / theta0;
            Ok(Theta::scalar(1.0 / (1.0 + ex)))
        }
        (ModelSpec::Normal { prior_mean }, DataGeneratingProcess::Normal { mean }) => {
            if mean.len() != prior_mean.len() {
                return Err(Error::Argument(
                    "DGP dimension does not match model dimension".into(),
                ));
            }
            Ok(Theta::new(mean.clone()))
        }
        (ModelSpec::Laplace { .. }, DataGeneratingProcess::Laplace { location, scale }) => {
            // Median of a symmetric Laplace is its location; γ₀ = E|X − μ₀| = b*.
            let theta0 = Theta::new(vec![*location, *scale]);
            if !model.contains(&theta0) {
                return Err(Error::Config(format!(
                    "Laplace theta0 ({location}, {scale}) lies outside the box {:?}",
                    model.laplace_box().unwrap()
                )));
            }
            Ok(theta0)
        }
        _ => Err(Error::Argument(format!(
            "model {model:?} does not match DGP {dgp:?}"
        ))),
    }
}
