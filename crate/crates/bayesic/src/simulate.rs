//! Random-variate generation and the replicated convergence experiments.
//!
//! Every experiment cell (one combination of DGP parameters, prior, sample
//! size, and replicate index) derives its own RNG seed from the master seed
//! and the cell's indices, so runs are reproducible cell-by-cell and
//! independent of worker parallelism. Records come back in a deterministic
//! order regardless of how many rayon workers execute the grid.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::criteria::{
    bpic, dic, dic_geometric_approx, dic_geometric_exact, wbic_at_beta, CriterionKind,
};
use crate::limits::{limit_for_dgp, limit_geometric};
use crate::models::{
    avg_loglik, true_theta0, DataGeneratingProcess, ModelSpec, ObservedSample, Theta,
};
use crate::posterior::{
    eta_rescaled_posterior, geometric_power_posterior, gibbs_posterior, normal_power_posterior,
    power_posterior_with_nodes, BetaSchedule, DEFAULT_NODES_2D,
};
use crate::{Error, Result};

/// Master seed used when neither flag, config file, nor environment supply
/// one.
pub const DEFAULT_SEED: u64 = 7;

fn splitmix_mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a per-cell seed from the master seed and the cell indices.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix_mix(master ^ 0xA076_1D64_78BD_642F);
    for &p in parts {
        h = splitmix_mix(h ^ splitmix_mix(p));
    }
    h
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Uniform on (0, 1): the generator yields [0, 1) and an exact zero is
// resampled so inverse-CDF logs stay finite.
fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// n IID geometric draws via the inverse CDF X = ⌊log U / log(1 − θ₀)⌋.
pub fn sample_geometric(
    dgp: &DataGeneratingProcess,
    n: usize,
    seed: u64,
) -> Result<ObservedSample> {
    let DataGeneratingProcess::Geometric { theta0 } = dgp else {
        return Err(Error::Argument(format!(
            "expected a geometric DGP, got {dgp:?}"
        )));
    };
    if n == 0 {
        return Err(Error::Argument("sample size must be ≥ 1".into()));
    }
    let mut rng = rng_for(seed);
    let log_q = (1.0 - theta0).ln();
    let values = (0..n)
        .map(|_| (open_uniform(&mut rng).ln() / log_q).floor())
        .collect();
    ObservedSample::univariate(values)
}

/// n IID draws from N(mean, I), row-major n × p.
pub fn sample_normal(dgp: &DataGeneratingProcess, n: usize, seed: u64) -> Result<ObservedSample> {
    let DataGeneratingProcess::Normal { mean } = dgp else {
        return Err(Error::Argument(format!(
            "expected a normal DGP, got {dgp:?}"
        )));
    };
    if n == 0 {
        return Err(Error::Argument("sample size must be ≥ 1".into()));
    }
    let mut rng = rng_for(seed);
    let p = mean.len();
    let mut values = Vec::with_capacity(n * p);
    for _ in 0..n {
        for m in mean {
            let z: f64 = rng.sample(StandardNormal);
            values.push(m + z);
        }
    }
    ObservedSample::multivariate(values, p)
}

/// n IID Laplace draws via X = μ* − b*·sgn(U − ½)·log(1 − 2|U − ½|).
pub fn sample_laplace(dgp: &DataGeneratingProcess, n: usize, seed: u64) -> Result<ObservedSample> {
    let DataGeneratingProcess::Laplace { location, scale } = dgp else {
        return Err(Error::Argument(format!(
            "expected a Laplace DGP, got {dgp:?}"
        )));
    };
    if n == 0 {
        return Err(Error::Argument("sample size must be ≥ 1".into()));
    }
    let mut rng = rng_for(seed);
    let values = (0..n)
        .map(|_| {
            let d = open_uniform(&mut rng) - 0.5;
            location - scale * d.signum() * (1.0 - 2.0 * d.abs()).ln()
        })
        .collect();
    ObservedSample::univariate(values)
}

/// One simulation result row, ready for CSV emission.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub experiment: &'static str,
    pub model: &'static str,
    pub criterion: &'static str,
    pub schedule: Option<BetaSchedule>,
    pub theta0: Vec<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub n: u64,
    pub replicate: u32,
    pub seed: u64,
    pub value: f64,
    pub limit: f64,
    pub abs_error: f64,
}

impl RunRecord {
    #[allow(clippy::too_many_arguments)]
    fn new(
        experiment: &'static str,
        model: &'static str,
        criterion: &'static str,
        schedule: Option<BetaSchedule>,
        theta0: Vec<f64>,
        alpha: Option<f64>,
        beta: Option<f64>,
        n: u64,
        replicate: u32,
        seed: u64,
        value: f64,
        limit: f64,
    ) -> Self {
        RunRecord {
            experiment,
            model,
            criterion,
            schedule,
            theta0,
            alpha,
            beta,
            n,
            replicate,
            seed,
            value,
            limit,
            abs_error: (value - limit).abs(),
        }
    }
}

fn check_n_grid(n_grid: &[u64], n_min: u64) -> Result<()> {
    if n_grid.is_empty() {
        return Err(Error::Config("n-grid must be non-empty".into()));
    }
    if !n_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Config(format!(
            "n-grid must be strictly increasing: {n_grid:?}"
        )));
    }
    if n_grid[0] < n_min {
        return Err(Error::Config(format!(
            "n-grid must start at ≥ {n_min} (smallest n every schedule is defined at), got {}",
            n_grid[0]
        )));
    }
    Ok(())
}

fn check_replicates(replicates: u32) -> Result<()> {
    if replicates == 0 {
        return Err(Error::Config("replicates must be ≥ 1".into()));
    }
    Ok(())
}

/// Fig.-1-style experiment: geometric DIC over a grid of θ₀ and Beta priors.
#[derive(Debug, Clone)]
pub struct DicGeometricConfig {
    pub theta0_grid: Vec<f64>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub n_grid: Vec<u64>,
    pub replicates: u32,
    pub seed: u64,
}

impl Default for DicGeometricConfig {
    fn default() -> Self {
        DicGeometricConfig {
            theta0_grid: (1..=9).map(|i| f64::from(i) / 10.0).collect(),
            alphas: vec![1.0, 10.0, 100.0],
            betas: vec![1.0, 10.0, 100.0],
            n_grid: vec![100, 1_000, 10_000, 100_000, 1_000_000],
            replicates: 10,
            seed: DEFAULT_SEED,
        }
    }
}

impl DicGeometricConfig {
    fn validate(&self) -> Result<()> {
        check_n_grid(&self.n_grid, 1)?;
        check_replicates(self.replicates)?;
        if self.theta0_grid.is_empty() || self.theta0_grid.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            return Err(Error::Config("theta0 grid must lie in (0, 1)".into()));
        }
        if self
            .alphas
            .iter()
            .chain(&self.betas)
            .any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return Err(Error::Config("prior hyperparameters must be > 0".into()));
        }
        Ok(())
    }
}

/// Fig.-2-style experiment: normal WBIC under the six temperature schedules.
#[derive(Debug, Clone)]
pub struct WbicNormalConfig {
    pub theta0: f64,
    pub schedules: Vec<BetaSchedule>,
    pub n_grid: Vec<u64>,
    pub replicates: u32,
    pub seed: u64,
}

impl Default for WbicNormalConfig {
    fn default() -> Self {
        WbicNormalConfig {
            theta0: 1.0,
            schedules: BetaSchedule::ALL.to_vec(),
            n_grid: vec![10, 100, 1_000, 10_000, 100_000],
            replicates: 10,
            seed: DEFAULT_SEED,
        }
    }
}

impl WbicNormalConfig {
    fn validate(&self) -> Result<()> {
        if self.schedules.is_empty() {
            return Err(Error::Config("at least one schedule is required".into()));
        }
        let n_min = self.schedules.iter().map(|s| s.n_min()).max().unwrap();
        check_n_grid(&self.n_grid, n_min)?;
        check_replicates(self.replicates)?;
        if !self.theta0.is_finite() {
            return Err(Error::Config("theta0 must be finite".into()));
        }
        Ok(())
    }
}

/// Laplace criteria on a compact box via grid quadrature.
#[derive(Debug, Clone)]
pub struct LaplaceConfig {
    /// DGP location μ* and scale b*.
    pub location: f64,
    pub scale: f64,
    /// Box half-width m and scale bound s.
    pub box_m: f64,
    pub box_s: f64,
    pub nodes: [usize; 2],
    pub schedule: BetaSchedule,
    pub criteria: Vec<CriterionKind>,
    pub n_grid: Vec<u64>,
    pub replicates: u32,
    pub seed: u64,
}

impl Default for LaplaceConfig {
    fn default() -> Self {
        LaplaceConfig {
            location: 0.0,
            scale: 1.0,
            box_m: 4.0,
            box_s: 8.0,
            nodes: DEFAULT_NODES_2D,
            schedule: BetaSchedule::InvLogN,
            criteria: vec![CriterionKind::Wbic, CriterionKind::Bpic, CriterionKind::Dic],
            n_grid: vec![100, 1_000, 10_000, 100_000],
            replicates: 10,
            seed: DEFAULT_SEED,
        }
    }
}

impl LaplaceConfig {
    fn validate(&self) -> Result<()> {
        check_n_grid(&self.n_grid, self.schedule.n_min())?;
        check_replicates(self.replicates)?;
        if self.criteria.is_empty() {
            return Err(Error::Config("at least one criterion is required".into()));
        }
        // Constructor errors surface here if the box or DGP are invalid.
        ModelSpec::laplace(self.box_m, self.box_s)?;
        let dgp = DataGeneratingProcess::laplace(self.location, self.scale)?;
        true_theta0(&ModelSpec::laplace(self.box_m, self.box_s)?, &dgp)?;
        Ok(())
    }
}

/// Ball-mass consistency curves for the geometric and normal power
/// posteriors (optionally Gibbs and η-rescaled variants on the geometric
/// grid).
#[derive(Debug, Clone)]
pub struct ConsistencyConfig {
    pub epsilon: f64,
    pub schedules: Vec<BetaSchedule>,
    pub geometric_theta0: f64,
    pub normal_theta0: f64,
    pub include_gibbs: bool,
    pub n_grid: Vec<u64>,
    pub replicates: u32,
    pub seed: u64,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        ConsistencyConfig {
            epsilon: 0.05,
            schedules: vec![BetaSchedule::One, BetaSchedule::InvLogN],
            geometric_theta0: 0.5,
            normal_theta0: 1.0,
            include_gibbs: false,
            n_grid: vec![100, 1_000, 10_000, 100_000],
            replicates: 10,
            seed: DEFAULT_SEED,
        }
    }
}

impl ConsistencyConfig {
    fn validate(&self) -> Result<()> {
        if self.schedules.is_empty() {
            return Err(Error::Config("at least one schedule is required".into()));
        }
        if let Some(s) = self.schedules.iter().find(|s| !s.satisfies_growth()) {
            return Err(Error::Config(format!(
                "consistency curves require n·βₙ → ∞; schedule {s} does not satisfy it"
            )));
        }
        let n_min = self.schedules.iter().map(|s| s.n_min()).max().unwrap();
        check_n_grid(&self.n_grid, n_min)?;
        check_replicates(self.replicates)?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config("epsilon must be > 0".into()));
        }
        if !(self.geometric_theta0 > 0.0 && self.geometric_theta0 < 1.0) {
            return Err(Error::Config("geometric theta0 must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// One of the four experiments.
#[derive(Debug, Clone)]
pub enum ExperimentConfig {
    DicGeometric(DicGeometricConfig),
    WbicNormal(WbicNormalConfig),
    Laplace(LaplaceConfig),
    Consistency(ConsistencyConfig),
}

impl ExperimentConfig {
    pub fn run(&self) -> Result<Vec<RunRecord>> {
        match self {
            ExperimentConfig::DicGeometric(c) => run_dic_geometric(c),
            ExperimentConfig::WbicNormal(c) => run_wbic_normal(c),
            ExperimentConfig::Laplace(c) => run_laplace(c),
            ExperimentConfig::Consistency(c) => run_consistency(c),
        }
    }
}

const TAG_DIC_GEOMETRIC: u64 = 1;
const TAG_WBIC_NORMAL: u64 = 2;
const TAG_LAPLACE: u64 = 3;
const TAG_CONSISTENCY: u64 = 4;

/// Geometric DIC experiment: one sample per (θ₀, α, β, n, replicate) cell,
/// emitting both the Poincaré-approximate and exact DIC as separate records.
pub fn run_dic_geometric(cfg: &DicGeometricConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for (ti, &theta0) in cfg.theta0_grid.iter().enumerate() {
        for (ai, &alpha) in cfg.alphas.iter().enumerate() {
            for (bi, &beta) in cfg.betas.iter().enumerate() {
                for (ni, &n) in cfg.n_grid.iter().enumerate() {
                    for rep in 0..cfg.replicates {
                        cells.push((ti, ai, bi, ni, rep, theta0, alpha, beta, n));
                    }
                }
            }
        }
    }
    let nested: Vec<Vec<RunRecord>> = cells
        .par_iter()
        .map(
            |&(ti, ai, bi, ni, rep, theta0, alpha, beta, n)| -> Result<Vec<RunRecord>> {
                let seed = derive_seed(
                    cfg.seed,
                    &[
                        TAG_DIC_GEOMETRIC,
                        ti as u64,
                        ai as u64,
                        bi as u64,
                        ni as u64,
                        u64::from(rep),
                    ],
                );
                let dgp = DataGeneratingProcess::geometric(theta0)?;
                let sample = sample_geometric(&dgp, n as usize, seed)?;
                let xbar = sample.mean_scalar();
                let limit = limit_geometric((1.0 - theta0) / theta0)?.value;
                let approx = dic_geometric_approx(alpha, beta, n, xbar)?;
                let exact = dic_geometric_exact(alpha, beta, n, xbar)?;
                Ok(vec![
                    RunRecord::new(
                        "dic-geometric",
                        "geometric",
                        "dic-approx",
                        None,
                        vec![theta0],
                        Some(alpha),
                        Some(beta),
                        n,
                        rep,
                        seed,
                        approx.value,
                        limit,
                    ),
                    RunRecord::new(
                        "dic-geometric",
                        "geometric",
                        "dic-exact",
                        None,
                        vec![theta0],
                        Some(alpha),
                        Some(beta),
                        n,
                        rep,
                        seed,
                        exact.value,
                        limit,
                    ),
                ])
            },
        )
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Normal WBIC experiment: one N(θ₀, 1) sample per (schedule, n, replicate),
/// evaluated through the closed form.
pub fn run_wbic_normal(cfg: &WbicNormalConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for (si, &schedule) in cfg.schedules.iter().enumerate() {
        for (ni, &n) in cfg.n_grid.iter().enumerate() {
            for rep in 0..cfg.replicates {
                cells.push((si, ni, rep, schedule, n));
            }
        }
    }
    let dgp = DataGeneratingProcess::normal(vec![cfg.theta0])?;
    let limit = limit_for_dgp(&dgp)?.value;
    let model = ModelSpec::normal(vec![0.0])?;
    let nested: Vec<Vec<RunRecord>> = cells
        .par_iter()
        .map(|&(si, ni, rep, schedule, n)| -> Result<Vec<RunRecord>> {
            let seed = derive_seed(
                cfg.seed,
                &[TAG_WBIC_NORMAL, si as u64, ni as u64, u64::from(rep)],
            );
            let sample = sample_normal(&dgp, n as usize, seed)?;
            let beta_n = schedule.evaluate(n)?;
            let w = wbic_at_beta(&model, &sample, beta_n)?;
            Ok(vec![RunRecord::new(
                "wbic-normal",
                "normal",
                "wbic",
                Some(schedule),
                vec![cfg.theta0],
                None,
                None,
                n,
                rep,
                seed,
                w.value,
                limit,
            )])
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Laplace experiment: grid-posterior criteria against 2 log(2γ₀) + 2.
pub fn run_laplace(cfg: &LaplaceConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let model = ModelSpec::laplace(cfg.box_m, cfg.box_s)?;
    let dgp = DataGeneratingProcess::laplace(cfg.location, cfg.scale)?;
    let limit = limit_for_dgp(&dgp)?.value;
    let mut cells = Vec::new();
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        for rep in 0..cfg.replicates {
            cells.push((ni, rep, n));
        }
    }
    let nested: Vec<Vec<RunRecord>> = cells
        .par_iter()
        .map(|&(ni, rep, n)| -> Result<Vec<RunRecord>> {
            let seed = derive_seed(cfg.seed, &[TAG_LAPLACE, ni as u64, u64::from(rep)]);
            let sample = sample_laplace(&dgp, n as usize, seed)?;
            let mut out = Vec::new();
            let untempered = if cfg
                .criteria
                .iter()
                .any(|k| matches!(k, CriterionKind::Bpic | CriterionKind::Dic))
            {
                Some(power_posterior_with_nodes(&model, &sample, 1.0, cfg.nodes)?)
            } else {
                None
            };
            for &kind in &cfg.criteria {
                let (value, schedule) = match kind {
                    CriterionKind::Wbic => {
                        let beta_n = cfg.schedule.evaluate(n)?;
                        let post = power_posterior_with_nodes(&model, &sample, beta_n, cfg.nodes)?;
                        let e = post.expect_fn(|c| {
                            avg_loglik(&model, &sample, &Theta::new(c.to_vec()))
                                .expect("grid nodes lie inside the box")
                        })?;
                        (-2.0 * e, Some(cfg.schedule))
                    }
                    CriterionKind::Bpic => (
                        bpic(&model, &sample, untempered.as_ref().unwrap())?.value,
                        None,
                    ),
                    CriterionKind::Dic => (
                        dic(&model, &sample, untempered.as_ref().unwrap())?.value,
                        None,
                    ),
                };
                out.push(RunRecord::new(
                    "laplace",
                    "laplace",
                    kind.name(),
                    schedule,
                    vec![cfg.location, cfg.scale],
                    None,
                    None,
                    n,
                    rep,
                    seed,
                    value,
                    limit,
                ));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Posterior-consistency experiment: ball masses Πₙ^{βₙ}(B̄_ε(θ₀)), which
/// approach 1, recorded with limit 1.
pub fn run_consistency(cfg: &ConsistencyConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let models: [&'static str; 2] = ["geometric", "normal"];
    let mut cells = Vec::new();
    for (mi, &model) in models.iter().enumerate() {
        for (si, &schedule) in cfg.schedules.iter().enumerate() {
            for (ni, &n) in cfg.n_grid.iter().enumerate() {
                for rep in 0..cfg.replicates {
                    cells.push((mi, si, ni, rep, model, schedule, n));
                }
            }
        }
    }
    let nested: Vec<Vec<RunRecord>> = cells
        .par_iter()
        .map(
            |&(mi, si, ni, rep, model, schedule, n)| -> Result<Vec<RunRecord>> {
                let seed = derive_seed(
                    cfg.seed,
                    &[
                        TAG_CONSISTENCY,
                        mi as u64,
                        si as u64,
                        ni as u64,
                        u64::from(rep),
                    ],
                );
                let beta_n = schedule.evaluate(n)?;
                let mut out = Vec::new();
                match model {
                    "geometric" => {
                        let theta0 = cfg.geometric_theta0;
                        let dgp = DataGeneratingProcess::geometric(theta0)?;
                        let sample = sample_geometric(&dgp, n as usize, seed)?;
                        let xbar = sample.mean_scalar();
                        let center = Theta::scalar(theta0);
                        let post = geometric_power_posterior(1.0, 1.0, n, xbar, beta_n)?;
                        let mass = post.ball_mass(&center, cfg.epsilon)?;
                        out.push(RunRecord::new(
                            "consistency",
                            "geometric",
                            "ball-mass",
                            Some(schedule),
                            vec![theta0],
                            Some(1.0),
                            Some(1.0),
                            n,
                            rep,
                            seed,
                            mass,
                            1.0,
                        ));
                        if cfg.include_gibbs {
                            let gamma_n = n as f64 * beta_n;
                            let u = |c: &[f64]| xbar * (1.0 - c[0]).ln() + c[0].ln();
                            let gibbs = gibbs_posterior(u, gamma_n, &[(0.0, 1.0)], &[4096])?;
                            let eta0 =
                                eta_rescaled_posterior(u, gamma_n, 0, &[(0.0, 1.0)], &[4096])?;
                            for (criterion, post) in
                                [("ball-mass-gibbs", gibbs), ("ball-mass-eta0", eta0)]
                            {
                                out.push(RunRecord::new(
                                    "consistency",
                                    "geometric",
                                    criterion,
                                    Some(schedule),
                                    vec![theta0],
                                    Some(1.0),
                                    Some(1.0),
                                    n,
                                    rep,
                                    seed,
                                    post.ball_mass(&center, cfg.epsilon)?,
                                    1.0,
                                ));
                            }
                        }
                    }
                    _ => {
                        let theta0 = cfg.normal_theta0;
                        let dgp = DataGeneratingProcess::normal(vec![theta0])?;
                        let sample = sample_normal(&dgp, n as usize, seed)?;
                        let post = normal_power_posterior(&[0.0], n, sample.mean(), beta_n)?;
                        let mass = post.ball_mass(&Theta::scalar(theta0), cfg.epsilon)?;
                        out.push(RunRecord::new(
                            "consistency",
                            "normal",
                            "ball-mass",
                            Some(schedule),
                            vec![theta0],
                            None,
                            None,
                            n,
                            rep,
                            seed,
                            mass,
                            1.0,
                        ));
                    }
                }
                Ok(out)
            },
        )
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// One summary group: median (lower convention), min, and max per
/// (experiment, criterion, schedule, n).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment: &'static str,
    pub criterion: &'static str,
    pub schedule: Option<BetaSchedule>,
    pub n: u64,
    pub count: usize,
    pub median_value: f64,
    pub median_abs_error: f64,
    pub min_value: f64,
    pub max_value: f64,
}

// Lower median: for even counts, the smaller of the two central order
// statistics.
fn lower_median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values[(values.len() - 1) / 2]
}

/// Group records by (experiment, criterion, schedule, n) and reduce each
/// group to medians and extremes.
pub fn summarize(records: &[RunRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::Argument(
            "cannot summarize an empty record list".into(),
        ));
    }
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(&str, &str, &str, u64), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let schedule = r.schedule.map_or("-", |s| s.name());
        groups
            .entry((r.experiment, r.criterion, schedule, r.n))
            .or_default()
            .push(r);
    }
    Ok(groups
        .into_values()
        .map(|group| {
            let mut values: Vec<f64> = group.iter().map(|r| r.value).collect();
            let mut errors: Vec<f64> = group.iter().map(|r| r.abs_error).collect();
            let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max_value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let first = group[0];
            SummaryRow {
                experiment: first.experiment,
                criterion: first.criterion,
                schedule: first.schedule,
                n: first.n,
                count: group.len(),
                median_value: lower_median(&mut values),
                median_abs_error: lower_median(&mut errors),
                min_value,
                max_value,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_derivation_is_stable_and_sensitive() {
        let a = derive_seed(42, &[1, 2, 3]);
        let b = derive_seed(42, &[1, 2, 3]);
        assert_eq!(a, b);
        assert_ne!(a, derive_seed(42, &[1, 2, 4]));
        assert_ne!(a, derive_seed(42, &[1, 3, 2]));
        assert_ne!(a, derive_seed(43, &[1, 2, 3]));
    }

    #[test]
    fn geometric_sampler_edge_cases() {
        // Success probability ≈ 1: every draw is 0.
        let dgp = DataGeneratingProcess::geometric(1.0 - 1e-15).unwrap();
        let s = sample_geometric(&dgp, 1000, 1).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.0));

        // Determinism.
        let dgp = DataGeneratingProcess::geometric(0.3).unwrap();
        let a = sample_geometric(&dgp, 500, 9).unwrap();
        let b = sample_geometric(&dgp, 500, 9).unwrap();
        assert_eq!(a.values(), b.values());

        // Non-negative integers.
        assert!(a.values().iter().all(|&v| v >= 0.0 && v.fract() == 0.0));
    }

    #[test]
    fn geometric_sampler_mean_bound() {
        // Mean 1, variance 2 at θ₀ = 1/2; hard assertion at 5σ.
        let dgp = DataGeneratingProcess::geometric(0.5).unwrap();
        let s = sample_geometric(&dgp, 1_000_000, DEFAULT_SEED).unwrap();
        let bound = 5.0 * (2.0f64 / 1e6).sqrt();
        assert!(
            (s.mean_scalar() - 1.0).abs() <= bound,
            "{}",
            s.mean_scalar()
        );
    }

    #[test]
    fn normal_sampler_mean_bound() {
        let dgp = DataGeneratingProcess::normal(vec![1.0]).unwrap();
        let s = sample_normal(&dgp, 1_000_000, DEFAULT_SEED).unwrap();
        assert!((s.mean_scalar() - 1.0).abs() <= 3e-3, "{}", s.mean_scalar());
    }

    #[test]
    fn laplace_sampler_median_and_scaling() {
        let dgp = DataGeneratingProcess::laplace(0.0, 1.0).unwrap();
        let s = sample_laplace(&dgp, 1_000_000, DEFAULT_SEED).unwrap();
        let mut v = s.values().to_vec();
        v.sort_by(f64::total_cmp);
        let median = v[v.len() / 2];
        assert!(median.abs() < 0.01, "median {median}");

        // Inverse-CDF linearity: scale 2 draws are exactly 2× scale 1 draws.
        let dgp2 = DataGeneratingProcess::laplace(0.0, 2.0).unwrap();
        let a = sample_laplace(&dgp, 1000, 7).unwrap();
        let b = sample_laplace(&dgp2, 1000, 7).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn dgp_mismatch_is_an_error() {
        let dgp = DataGeneratingProcess::normal(vec![0.0]).unwrap();
        assert!(sample_geometric(&dgp, 10, 1).is_err());
        assert!(sample_laplace(&dgp, 10, 1).is_err());
    }

    #[test]
    fn dic_geometric_runner_convergence_cell() {
        let cfg = DicGeometricConfig {
            theta0_grid: vec![0.5],
            alphas: vec![1.0],
            betas: vec![1.0],
            n_grid: vec![1_000_000],
            replicates: 3,
            seed: DEFAULT_SEED,
        };
        let records = run_dic_geometric(&cfg).unwrap();
        assert_eq!(records.len(), 6); // 3 replicates × 2 methods
        for r in &records {
            assert!((r.value - 4.0 * 2f64.ln()).abs() <= 0.02, "{r:?}");
            assert!((r.abs_error - (r.value - r.limit).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn dic_geometric_runner_deterministic_and_degenerate_safe() {
        let cfg = DicGeometricConfig {
            theta0_grid: vec![1.0 - 1e-12],
            alphas: vec![1.0],
            betas: vec![1.0],
            n_grid: vec![20],
            replicates: 2,
            seed: 5,
        };
        let a = run_dic_geometric(&cfg).unwrap();
        let b = run_dic_geometric(&cfg).unwrap();
        assert_eq!(a, b);
        // All-zero samples stay finite thanks to β > 0.
        for r in &a {
            assert!(r.value.is_finite());
        }
    }

    #[test]
    fn wbic_normal_runner_growth_vs_non_growth() {
        let cfg = WbicNormalConfig {
            schedules: vec![BetaSchedule::InvLogN, BetaSchedule::InvNLogN],
            n_grid: vec![10, 1_000, 100_000],
            ..Default::default()
        };
        let records = run_wbic_normal(&cfg).unwrap();
        let at = |s: BetaSchedule, n: u64| -> Vec<f64> {
            records
                .iter()
                .filter(|r| r.schedule == Some(s) && r.n == n)
                .map(|r| r.abs_error)
                .collect()
        };
        // 1/log n: within 0.05 of log 2π + 1 in at least 9 of 10 replicates.
        let close = at(BetaSchedule::InvLogN, 100_000)
            .iter()
            .filter(|e| **e < 0.05)
            .count();
        assert!(close >= 9, "{close}/10 replicates close");

        // Median error ordering against the non-growth schedule.
        let mut a = at(BetaSchedule::InvLogN, 100_000);
        let mut b = at(BetaSchedule::InvNLogN, 100_000);
        assert!(lower_median(&mut b) > lower_median(&mut a));
    }

    #[test]
    fn wbic_schedule_one_matches_direct_beta_one() {
        let cfg = WbicNormalConfig {
            schedules: vec![BetaSchedule::One],
            n_grid: vec![50],
            replicates: 2,
            ..Default::default()
        };
        let records = run_wbic_normal(&cfg).unwrap();
        let model = ModelSpec::normal(vec![0.0]).unwrap();
        let dgp = DataGeneratingProcess::normal(vec![1.0]).unwrap();
        for r in &records {
            let sample = sample_normal(&dgp, 50, r.seed).unwrap();
            let direct = wbic_at_beta(&model, &sample, 1.0).unwrap().value;
            assert_eq!(r.value, direct);
        }
    }

    #[test]
    fn consistency_runner_examples() {
        let cfg = ConsistencyConfig {
            schedules: vec![BetaSchedule::One],
            n_grid: vec![100_000],
            replicates: 2,
            ..Default::default()
        };
        let records = run_consistency(&cfg).unwrap();
        for r in records.iter().filter(|r| r.model == "geometric") {
            assert!(r.value >= 0.999, "{r:?}");
        }

        // ε covering the whole space has mass 1.
        let cfg = ConsistencyConfig {
            epsilon: 1.0,
            schedules: vec![BetaSchedule::One],
            n_grid: vec![100],
            replicates: 1,
            ..Default::default()
        };
        let records = run_consistency(&cfg).unwrap();
        for r in records.iter().filter(|r| r.model == "geometric") {
            assert!((r.value - 1.0).abs() < 1e-12);
        }

        // Normal masses non-decreasing over the n-grid at a fixed seed
        // (vₙ = 1/(nβₙ + 1) shrinks).
        let cfg = ConsistencyConfig {
            schedules: vec![BetaSchedule::InvLogN],
            n_grid: vec![100, 1_000, 10_000, 100_000],
            replicates: 1,
            ..Default::default()
        };
        let records = run_consistency(&cfg).unwrap();
        let masses: Vec<f64> = records
            .iter()
            .filter(|r| r.model == "normal")
            .map(|r| r.value)
            .collect();
        assert_eq!(masses.len(), 4);
        assert!(masses.windows(2).all(|w| w[1] >= w[0]), "{masses:?}");
    }

    #[test]
    fn consistency_runner_gibbs_variants() {
        let cfg = ConsistencyConfig {
            schedules: vec![BetaSchedule::InvLogN],
            n_grid: vec![1_000],
            replicates: 1,
            include_gibbs: true,
            ..Default::default()
        };
        let records = run_consistency(&cfg).unwrap();
        let gibbs: Vec<&RunRecord> = records
            .iter()
            .filter(|r| r.criterion == "ball-mass-gibbs")
            .collect();
        let eta: Vec<&RunRecord> = records
            .iter()
            .filter(|r| r.criterion == "ball-mass-eta0")
            .collect();
        assert_eq!(gibbs.len(), 1);
        assert_eq!(eta.len(), 1);
        // η at k = 0 is the identity rescaling.
        assert_eq!(gibbs[0].value, eta[0].value);
        // And both track the conjugate closed form.
        let closed = records
            .iter()
            .find(|r| r.criterion == "ball-mass" && r.model == "geometric")
            .unwrap();
        assert!((gibbs[0].value - closed.value).abs() < 1e-4);
    }

    #[test]
    fn summarize_examples() {
        let rec = |value: f64, n: u64, rep: u32| {
            RunRecord::new(
                "wbic-normal",
                "normal",
                "wbic",
                Some(BetaSchedule::InvLogN),
                vec![1.0],
                None,
                None,
                n,
                rep,
                0,
                value,
                2.0,
            )
        };
        // Single record: the group is that record.
        let rows = summarize(&[rec(1.5, 10, 0)]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].median_value, 1.5);
        assert_eq!(rows[0].count, 1);

        // Lower-median convention for even counts.
        let rows = summarize(&[rec(3.0, 10, 0), rec(1.0, 10, 1)]).unwrap();
        assert_eq!(rows[0].median_value, 1.0);

        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn summarize_fig2_error_ordering() {
        let cfg = WbicNormalConfig {
            schedules: vec![BetaSchedule::InvLogN],
            n_grid: vec![100, 100_000],
            ..Default::default()
        };
        let records = run_wbic_normal(&cfg).unwrap();
        let rows = summarize(&records).unwrap();
        let err_at = |n: u64| {
            rows.iter()
                .find(|r| r.n == n)
                .map(|r| r.median_abs_error)
                .unwrap()
        };
        assert!(err_at(100_000) < err_at(100));
    }

    #[test]
    fn runner_rejects_bad_configs() {
        let cfg = DicGeometricConfig {
            n_grid: vec![100, 100],
            ..Default::default()
        };
        assert!(run_dic_geometric(&cfg).is_err());
        let cfg = DicGeometricConfig {
            replicates: 0,
            ..Default::default()
        };
        assert!(run_dic_geometric(&cfg).is_err());
        let cfg = WbicNormalConfig {
            n_grid: vec![2, 10],
            ..Default::default()
        };
        assert!(run_wbic_normal(&cfg).is_err()); // inv-log-log-n needs n ≥ 3
        let cfg = ConsistencyConfig {
            schedules: vec![BetaSchedule::InvN],
            ..Default::default()
        };
        assert!(run_consistency(&cfg).is_err());
    }
}
