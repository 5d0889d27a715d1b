//! Power posteriors Πₙ^{βₙ} and Gibbs posteriors, with closed forms where
//! the model is conjugate and tensor-product midpoint grids otherwise, plus
//! the consistency diagnostics built on them (ball masses, η-rescaling,
//! tail-integral curves, quasiconcavity checks).

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::models::{avg_loglik, ModelSpec, ObservedSample, Theta};
use crate::specfun::{digamma, normal_cdf, reg_inc_beta};
use crate::{Error, Result};

/// Default node count for 1-D grid posteriors.
pub const DEFAULT_NODES_1D: usize = 4096;
/// Default node counts for the 2-D Laplace box.
pub const DEFAULT_NODES_2D: [usize; 2] = [256, 256];

/// The temperature sequence βₙ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BetaSchedule {
    /// βₙ = 1/log n, the canonical WBIC temperature.
    InvLogN,
    /// βₙ = 1/log log n.
    InvLogLogN,
    /// βₙ = 1, the untempered posterior.
    One,
    /// βₙ = 1/√n.
    InvSqrtN,
    /// βₙ = 1/n; n·βₙ does not diverge.
    InvN,
    /// βₙ = 1/(n log n); n·βₙ does not diverge.
    InvNLogN,
}

impl BetaSchedule {
    pub const ALL: [BetaSchedule; 6] = [
        BetaSchedule::InvLogN,
        BetaSchedule::InvLogLogN,
        BetaSchedule::One,
        BetaSchedule::InvSqrtN,
        BetaSchedule::InvN,
        BetaSchedule::InvNLogN,
    ];

    /// Smallest n for which the schedule is defined and positive.
    pub fn n_min(&self) -> u64 {
        match self {
            BetaSchedule::InvLogN | BetaSchedule::InvN | BetaSchedule::InvNLogN => 2,
            BetaSchedule::InvLogLogN => 3,
            BetaSchedule::One | BetaSchedule::InvSqrtN => 1,
        }
    }

    /// Whether n·βₙ → ∞, the sufficient condition for posterior consistency.
    pub fn satisfies_growth(&self) -> bool {
        !matches!(self, BetaSchedule::InvN | BetaSchedule::InvNLogN)
    }

    pub fn evaluate(&self, n: u64) -> Result<f64> {
        if n < self.n_min() {
            return Err(Error::Argument(format!(
                "schedule {} requires n ≥ {}, got {n}",
                self.name(),
                self.n_min()
            )));
        }
        let nf = n as f64;
        Ok(match self {
            BetaSchedule::InvLogN => 1.0 / nf.ln(),
            BetaSchedule::InvLogLogN => 1.0 / nf.ln().ln(),
            BetaSchedule::One => 1.0,
            BetaSchedule::InvSqrtN => 1.0 / nf.sqrt(),
            BetaSchedule::InvN => 1.0 / nf,
            BetaSchedule::InvNLogN => 1.0 / (nf * nf.ln()),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            BetaSchedule::InvLogN => "inv-log-n",
            BetaSchedule::InvLogLogN => "inv-log-log-n",
            BetaSchedule::One => "one",
            BetaSchedule::InvSqrtN => "inv-sqrt-n",
            BetaSchedule::InvN => "inv-n",
            BetaSchedule::InvNLogN => "inv-n-log-n",
        }
    }
}

impl std::str::FromStr for BetaSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BetaSchedule::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::Argument(format!(
                    "unknown schedule `{s}` (expected one of inv-log-n, inv-log-log-n, one, \
                     inv-sqrt-n, inv-n, inv-n-log-n)"
                ))
            })
    }
}

impl std::fmt::Display for BetaSchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

// Compensated (Neumaier) summation; grid normalization must hold Σw = 1 to
// 1e-12 even at 1e6 nodes.
fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A normalized posterior on a tensor-product midpoint grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPosterior {
    bounds: Vec<(f64, f64)>,
    shape: Vec<usize>,
    axes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl GridPosterior {
    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Normalized weights in row-major node order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Coordinates of the node with the given flat index.
    pub fn node(&self, flat: usize) -> Vec<f64> {
        let mut buf = vec![0.0; self.shape.len()];
        self.fill_node(flat, &mut buf);
        buf
    }

    fn fill_node(&self, flat: usize, buf: &mut [f64]) {
        let mut rem = flat;
        for k in (0..self.shape.len()).rev() {
            let i = rem % self.shape[k];
            rem /= self.shape[k];
            buf[k] = self.axes[k][i];
        }
    }

    fn for_each_node<F: FnMut(usize, &[f64])>(&self, mut f: F) {
        let mut buf = vec![0.0; self.shape.len()];
        for flat in 0..self.weights.len() {
            self.fill_node(flat, &mut buf);
            f(flat, &buf);
        }
    }
}

/// A posterior representation: conjugate closed form or normalized grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// Beta(a, b) on (0, 1).
    Beta {
        a: f64,
        b: f64,
    },
    /// N(mean, variance · I).
    Normal {
        mean: Vec<f64>,
        variance: f64,
    },
    Grid(GridPosterior),
}

/// Functionals with analytic formulas under the closed-form representations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// E θⱼ.
    Coordinate(usize),
    /// E ‖θ‖².
    NormSq,
    /// E log θ (scalar parameter only).
    LogTheta,
    /// E log(1 − θ) (scalar parameter only).
    Log1mTheta,
}

/// A power or Gibbs posterior.
///
/// `beta_n` records the temperature the posterior was built at when it came
/// from a likelihood (the DIC/BPIC contract requires βₙ = 1); posteriors
/// built from raw kernels carry `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerPosterior {
    repr: Representation,
    beta_n: Option<f64>,
}

impl PowerPosterior {
    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn beta_n(&self) -> Option<f64> {
        self.beta_n
    }

    pub fn grid(&self) -> Option<&GridPosterior> {
        match &self.repr {
            Representation::Grid(g) => Some(g),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Representation::Beta { .. } => 1,
            Representation::Normal { mean, .. } => mean.len(),
            Representation::Grid(g) => g.shape.len(),
        }
    }

    /// Posterior mean θ̄ₙ.
    pub fn mean(&self) -> Theta {
        match &self.repr {
            Representation::Beta { a, b } => Theta::scalar(a / (a + b)),
            Representation::Normal { mean, .. } => Theta::new(mean.clone()),
            Representation::Grid(g) => {
                let dims = g.shape.len();
                // Per-axis compensated accumulation.
                let mut sums = vec![(0.0f64, 0.0f64); dims];
                g.for_each_node(|flat, coords| {
                    let w = g.weights[flat];
                    for (k, &c) in coords.iter().enumerate() {
                        let (sum, comp) = sums[k];
                        let v = w * c;
                        let t = sum + v;
                        let comp = if sum.abs() >= v.abs() {
                            comp + ((sum - t) + v)
                        } else {
                            comp + ((v - t) + sum)
                        };
                        sums[k] = (t, comp);
                    }
                });
                Theta::new(sums.into_iter().map(|(s, c)| s + c).collect())
            }
        }
    }

    /// E[f(θ)] for a registered functional.
    pub fn expect(&self, f: Functional) -> Result<f64> {
        match &self.repr {
            Representation::Beta { a, b } => match f {
                Functional::Coordinate(0) => Ok(a / (a + b)),
                Functional::Coordinate(j) => Err(Error::Argument(format!(
                    "Beta posterior has no coordinate {j}"
                ))),
                Functional::NormSq => Ok(a * (a + 1.0) / ((a + b) * (a + b + 1.0))),
                Functional::LogTheta => Ok(digamma(*a)? - digamma(a + b)?),
                Functional::Log1mTheta => Ok(digamma(*b)? - digamma(a + b)?),
            },
            Representation::Normal { mean, variance } => match f {
                Functional::Coordinate(j) => mean.get(j).copied().ok_or_else(|| {
                    Error::Argument(format!("normal posterior has no coordinate {j}"))
                }),
                Functional::NormSq => {
                    let m2: f64 = mean.iter().map(|m| m * m).sum();
                    Ok(m2 + mean.len() as f64 * variance)
                }
                Functional::LogTheta | Functional::Log1mTheta => Err(Error::UnsupportedFunctional(
                    "log moments have no closed form under a normal posterior".into(),
                )),
            },
            Representation::Grid(_) => match f {
                Functional::Coordinate(j) => self.expect_fn(|c| c[j]),
                Functional::NormSq => self.expect_fn(|c| c.iter().map(|x| x * x).sum()),
                Functional::LogTheta => {
                    if self.dim() != 1 {
                        return Err(Error::UnsupportedFunctional(
                            "log θ is a scalar-parameter functional".into(),
                        ));
                    }
                    self.expect_fn(|c| c[0].ln())
                }
                Functional::Log1mTheta => {
                    if self.dim() != 1 {
                        return Err(Error::UnsupportedFunctional(
                            "log(1−θ) is a scalar-parameter functional".into(),
                        ));
                    }
                    self.expect_fn(|c| (1.0 - c[0]).ln())
                }
            },
        }
    }

    /// Quadrature expectation of an arbitrary function; grid posteriors only.
    pub fn expect_fn<G: Fn(&[f64]) -> f64>(&self, g: G) -> Result<f64> {
        match &self.repr {
            Representation::Grid(grid) => {
                let mut terms = Vec::with_capacity(grid.len());
                grid.for_each_node(|flat, coords| {
                    terms.push(grid.weights[flat] * g(coords));
                });
                Ok(neumaier_sum(terms))
            }
            _ => Err(Error::UnsupportedFunctional(
                "arbitrary functionals require a grid posterior".into(),
            )),
        }
    }

    /// Mass of the closed Euclidean ball of radius `eps` around `center`.
    pub fn ball_mass(&self, center: &Theta, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Argument(format!(
                "ball radius must be > 0, got {eps}"
            )));
        }
        if center.coords().len() != self.dim() {
            return Err(Error::Argument(format!(
                "center dimension {} does not match posterior dimension {}",
                center.coords().len(),
                self.dim()
            )));
        }
        let mass = match &self.repr {
            Representation::Beta { a, b } => {
                let c = center.value();
                let hi = (c + eps).min(1.0);
                let lo = (c - eps).max(0.0);
                if hi <= lo {
                    0.0
                } else {
                    reg_inc_beta(*a, *b, hi) - reg_inc_beta(*a, *b, lo)
                }
            }
            Representation::Normal { mean, variance } => {
                if mean.len() == 1 {
                    let sd = variance.sqrt();
                    let c = center.value();
                    normal_cdf((c + eps - mean[0]) / sd) - normal_cdf((c - eps - mean[0]) / sd)
                } else {
                    // Grid fallback restricted to mean ± 6√v per axis.
                    let sd = variance.sqrt();
                    let bounds: Vec<(f64, f64)> =
                        mean.iter().map(|m| (m - 6.0 * sd, m + 6.0 * sd)).collect();
                    let p = mean.len();
                    let per_axis = ((262_144f64).powf(1.0 / p as f64) as usize).max(32);
                    let nodes = vec![per_axis; p];
                    let mean_ref = mean.clone();
                    let v = *variance;
                    let post = grid_posterior(
                        move |c: &[f64]| {
                            let q: f64 = c
                                .iter()
                                .zip(&mean_ref)
                                .map(|(x, m)| (x - m) * (x - m))
                                .sum();
                            -0.5 * q / v
                        },
                        &bounds,
                        &nodes,
                    )?;
                    post.ball_mass(center, eps)?
                }
            }
            // 1-D: weight boundary cells by their overlap with the ball, so
            // the mass is not quantized to whole cells.
            Representation::Grid(g) if g.shape.len() == 1 => {
                let c = center.value();
                let (lo, hi) = g.bounds[0];
                let h = (hi - lo) / g.shape[0] as f64;
                let (ball_lo, ball_hi) = (c - eps, c + eps);
                let mut terms = Vec::new();
                for (i, &w) in g.weights.iter().enumerate() {
                    let cell_lo = lo + i as f64 * h;
                    let overlap = (cell_lo + h).min(ball_hi) - cell_lo.max(ball_lo);
                    if overlap > 0.0 {
                        terms.push(w * (overlap / h).min(1.0));
                    }
                }
                neumaier_sum(terms)
            }
            Representation::Grid(g) => {
                let c = center.coords();
                let mut terms = Vec::new();
                g.for_each_node(|flat, coords| {
                    let d2: f64 = coords.iter().zip(c).map(|(x, y)| (x - y) * (x - y)).sum();
                    if d2.sqrt() <= eps {
                        terms.push(g.weights[flat]);
                    }
                });
                neumaier_sum(terms)
            }
        };
        Ok(mass.clamp(0.0, 1.0))
    }

    /// Tail integrals ∫ |f| · 1{|f| ≥ δ} dΠ at each δ, for the AUI
    /// diagnostic. Grid posteriors only.
    pub fn aui_tail_diagnostic<G: Fn(&[f64]) -> f64>(
        &self,
        f: G,
        deltas: &[f64],
    ) -> Result<Vec<(f64, f64)>> {
        let grid = self.grid().ok_or_else(|| {
            Error::Argument("the AUI diagnostic requires a grid posterior".into())
        })?;
        let mut fabs = vec![0.0; grid.len()];
        grid.for_each_node(|flat, coords| {
            fabs[flat] = f(coords).abs();
        });
        Ok(deltas
            .iter()
            .map(|&delta| {
                let total = neumaier_sum(
                    fabs.iter()
                        .zip(&grid.weights)
                        .filter(|(a, _)| **a >= delta)
                        .map(|(a, w)| a * w),
                );
                (delta, total)
            })
            .collect())
    }
}

fn check_beta_n(beta_n: f64) -> Result<()> {
    if !(beta_n > 0.0 && beta_n.is_finite()) {
        return Err(Error::Argument(format!(
            "temperature beta_n must be finite and > 0, got {beta_n}"
        )));
    }
    Ok(())
}

/// Power posterior for the geometric model under a Beta(α, β) prior:
/// Beta(n·βₙ + α, n·βₙ·x̄ₙ + β). Exponent arithmetic, exact at any n.
pub fn geometric_power_posterior(
    alpha: f64,
    beta: f64,
    n: u64,
    xbar: f64,
    beta_n: f64,
) -> Result<PowerPosterior> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::Argument(format!(
            "Beta prior parameters must be finite and > 0, got ({alpha}, {beta})"
        )));
    }
    if n == 0 {
        return Err(Error::Argument("geometric posterior requires n ≥ 1".into()));
    }
    if !(xbar >= 0.0 && xbar.is_finite()) {
        return Err(Error::Argument(format!(
            "xbar must be finite and ≥ 0, got {xbar}"
        )));
    }
    check_beta_n(beta_n)?;
    let nb = n as f64 * beta_n;
    Ok(PowerPosterior {
        repr: Representation::Beta {
            a: nb + alpha,
            b: nb * xbar + beta,
        },
        beta_n: Some(beta_n),
    })
}

/// Power posterior for the unit-variance normal model under an N(μ, I)
/// prior: N(mₙ, vₙ I) with mₙ = (nβₙ x̄ₙ + μ)/(nβₙ + 1), vₙ = 1/(nβₙ + 1).
pub fn normal_power_posterior(
    mu: &[f64],
    n: u64,
    xbar: &[f64],
    beta_n: f64,
) -> Result<PowerPosterior> {
    if mu.len() != xbar.len() || mu.is_empty() {
        return Err(Error::Argument(format!(
            "prior mean and sample mean must have the same positive length ({} vs {})",
            mu.len(),
            xbar.len()
        )));
    }
    if n == 0 {
        return Err(Error::Argument("normal posterior requires n ≥ 1".into()));
    }
    check_beta_n(beta_n)?;
    let nb = n as f64 * beta_n;
    let mean = mu
        .iter()
        .zip(xbar)
        .map(|(m, x)| (nb * x + m) / (nb + 1.0))
        .collect();
    Ok(PowerPosterior {
        repr: Representation::Normal {
            mean,
            variance: 1.0 / (nb + 1.0),
        },
        beta_n: Some(beta_n),
    })
}

/// Normalize a log kernel over a tensor-product midpoint grid.
///
/// Weights are max-shifted before exponentiation, so kernels offset by ±1e5
/// normalize identically. A kernel that is −∞ everywhere is degenerate.
pub fn grid_posterior<F: Fn(&[f64]) -> f64>(
    log_kernel: F,
    bounds: &[(f64, f64)],
    nodes_per_axis: &[usize],
) -> Result<PowerPosterior> {
    if bounds.is_empty() || bounds.len() != nodes_per_axis.len() {
        return Err(Error::Argument(
            "bounds and nodes_per_axis must be non-empty and equally long".into(),
        ));
    }
    for &(lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Argument(format!(
                "grid box must have finite lo < hi, got ({lo}, {hi})"
            )));
        }
    }
    if nodes_per_axis.iter().any(|&m| m < 16) {
        return Err(Error::Argument(
            "grids need at least 16 nodes per axis".into(),
        ));
    }
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .zip(nodes_per_axis)
        .map(|(&(lo, hi), &m)| {
            let h = (hi - lo) / m as f64;
            (0..m).map(|i| lo + (i as f64 + 0.5) * h).collect()
        })
        .collect();
    let total: usize = nodes_per_axis.iter().product();

    let mut grid = GridPosterior {
        bounds: bounds.to_vec(),
        shape: nodes_per_axis.to_vec(),
        axes,
        weights: vec![0.0; total],
    };

    let mut log_w = vec![0.0; total];
    let mut max_lw = f64::NEG_INFINITY;
    let mut bad = None;
    grid.for_each_node(|flat, coords| {
        let lw = log_kernel(coords);
        if lw.is_nan() || lw == f64::INFINITY {
            bad = Some((flat, lw));
        }
        log_w[flat] = lw;
        if lw > max_lw {
            max_lw = lw;
        }
    });
    if let Some((flat, lw)) = bad {
        return Err(Error::Domain(format!(
            "log kernel is {lw} at node {:?}",
            grid.node(flat)
        )));
    }
    if max_lw == f64::NEG_INFINITY {
        return Err(Error::DegenerateKernel);
    }
    for lw in &mut log_w {
        *lw = (*lw - max_lw).exp();
    }
    let norm = neumaier_sum(log_w.iter().copied());
    for w in &mut log_w {
        *w /= norm;
    }
    // One exact renormalization pass keeps Σw = 1 to 1e-12 even at 1e6 nodes.
    let resid = neumaier_sum(log_w.iter().copied());
    for w in &mut log_w {
        *w /= resid;
    }
    grid.weights = log_w;
    Ok(PowerPosterior {
        repr: Representation::Grid(grid),
        beta_n: None,
    })
}

/// Gibbs posterior ∝ exp(γₙ · uₙ(θ)) on a box, under the uniform prior.
pub fn gibbs_posterior<U: Fn(&[f64]) -> f64>(
    utility: U,
    gamma_n: f64,
    bounds: &[(f64, f64)],
    nodes_per_axis: &[usize],
) -> Result<PowerPosterior> {
    if !(gamma_n > 0.0 && gamma_n.is_finite()) {
        return Err(Error::Argument(format!(
            "gamma_n must be finite and > 0, got {gamma_n}"
        )));
    }
    grid_posterior(|c| gamma_n * utility(c), bounds, nodes_per_axis)
}

// Odd power x^{2k+1} by repeated multiplication; k = 0 returns x itself so
// the η = identity case is bit-for-bit the plain Gibbs kernel.
fn odd_power(x: f64, k: u32) -> f64 {
    let mut r = x;
    let sq = x * x;
    for _ in 0..k {
        r *= sq;
    }
    r
}

/// Gibbs posterior rescaled by η(x) = x^{2k+1}: ∝ exp((γₙ · uₙ(θ))^{2k+1}).
pub fn eta_rescaled_posterior<U: Fn(&[f64]) -> f64>(
    utility: U,
    gamma_n: f64,
    k: u32,
    bounds: &[(f64, f64)],
    nodes_per_axis: &[usize],
) -> Result<PowerPosterior> {
    if !(gamma_n > 0.0 && gamma_n.is_finite()) {
        return Err(Error::Argument(format!(
            "gamma_n must be finite and > 0, got {gamma_n}"
        )));
    }
    grid_posterior(
        |c| odd_power(gamma_n * utility(c), k),
        bounds,
        nodes_per_axis,
    )
}

/// Power posterior Πₙ^{βₙ} for a model and sample: conjugate closed form for
/// geometric and normal, a grid over the box (default 256×256) for Laplace.
pub fn power_posterior(
    model: &ModelSpec,
    sample: &ObservedSample,
    beta_n: f64,
) -> Result<PowerPosterior> {
    power_posterior_with_nodes(model, sample, beta_n, DEFAULT_NODES_2D)
}

/// As [`power_posterior`], with explicit node counts for the Laplace grid.
pub fn power_posterior_with_nodes(
    model: &ModelSpec,
    sample: &ObservedSample,
    beta_n: f64,
    laplace_nodes: [usize; 2],
) -> Result<PowerPosterior> {
    check_beta_n(beta_n)?;
    let n = sample.len() as u64;
    match model {
        ModelSpec::Geometric { alpha, beta } => {
            sample.check_geometric_support()?;
            geometric_power_posterior(*alpha, *beta, n, sample.mean_scalar(), beta_n)
        }
        ModelSpec::Normal { prior_mean } => {
            if sample.dim() != prior_mean.len() {
                return Err(Error::Argument(format!(
                    "sample dimension {} does not match model dimension {}",
                    sample.dim(),
                    prior_mean.len()
                )));
            }
            normal_power_posterior(prior_mean, n, sample.mean(), beta_n)
        }
        ModelSpec::Laplace { .. } => {
            let bounds = model.laplace_box().unwrap();
            let nb = n as f64 * beta_n;
            let mut post = grid_posterior(
                |c| {
                    let theta = Theta::new(c.to_vec());
                    nb * avg_loglik(model, sample, &theta).expect("grid node inside the box")
                },
                &bounds,
                &laplace_nodes,
            )?;
            post.beta_n = Some(beta_n);
            Ok(post)
        }
    }
}

/// A witness that quasiconcavity failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub theta: Vec<f64>,
    pub tau: Vec<f64>,
    pub lambda: f64,
    pub midpoint_value: f64,
    pub endpoint_min: f64,
}

/// Outcome of [`quasiconcavity_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiconcavityReport {
    pub pass: bool,
    pub counterexample: Option<Counterexample>,
    pub triples_checked: usize,
}

/// Randomized quasiconcavity check: f(λθ + (1−λ)τ) ≥ min(f(θ), f(τ)) − tol
/// over `n_triples` uniformly sampled triples, reporting the first
/// counterexample found.
pub fn quasiconcavity_check<F: Fn(&[f64]) -> f64>(
    f: F,
    bounds: &[(f64, f64)],
    n_triples: usize,
    tol: f64,
    seed: u64,
) -> QuasiconcavityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = bounds.len();
    let draw_point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        bounds
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..hi))
            .collect::<Vec<f64>>()
    };
    for i in 0..n_triples {
        let theta = draw_point(&mut rng);
        let tau = draw_point(&mut rng);
        let lambda: f64 = rng.random_range(0.0..=1.0);
        let mid: Vec<f64> = (0..dims)
            .map(|k| lambda * theta[k] + (1.0 - lambda) * tau[k])
            .collect();
        let fm = f(&mid);
        let fe = f(&theta).min(f(&tau));
        if fm < fe - tol {
            return QuasiconcavityReport {
                pass: false,
                counterexample: Some(Counterexample {
                    theta,
                    tau,
                    lambda,
                    midpoint_value: fm,
                    endpoint_min: fe,
                }),
                triples_checked: i + 1,
            };
        }
    }
    QuasiconcavityReport {
        pass: true,
        counterexample: None,
        triples_checked: n_triples,
    }
}
