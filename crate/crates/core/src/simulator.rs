//! Forward Monte-Carlo of the occupational-choice model.
//!
//! Fathers are allocated to classes by largest remainder, each child draws an
//! endowment from its father's support and picks a class by comparing it
//! with the thresholds. Agent `i` uses random stream `i`, so a run is
//! reproducible from its seed regardless of parallelism.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::class::OccClass;
use crate::estimation::TransitionCounts;
use crate::io::IncomeRecord;
use crate::matrix::ClassShares;
use crate::model::{ModelError, ModelParams, Primitives};
use crate::rng::StreamFactory;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("population must be positive")]
    EmptyPopulation,
    #[error("invalid simulation parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub fathers: ClassShares,
    pub population: u64,
    pub seed: u64,
}

impl SimConfig {
    /// Only the supports and threshold range are checked, so boundary cases
    /// such as the perfectly immobile society can be simulated.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.population == 0 {
            return Err(SimError::EmptyPopulation);
        }
        let p = &self.params;
        let unit = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        if !p.to_array().into_iter().all(unit) {
            return Err(SimError::InvalidParams("every parameter must lie in [0, 1]".into()));
        }
        if !(p.lambda_m <= p.lambda_u) {
            return Err(SimError::InvalidParams("need lambda_M <= lambda_U".into()));
        }
        if !(p.theta_max > 0.0 && p.theta_min < 1.0 && p.theta_m_min < p.theta_m_max) {
            return Err(SimError::InvalidParams("endowment supports must be nondegenerate".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub father_class: OccClass,
    pub theta: f64,
    pub chosen_class: OccClass,
}

/// Endowment support `[lo, hi]` for children of `father`.
pub fn support(father: OccClass, params: &ModelParams) -> (f64, f64) {
    match father {
        OccClass::Working => (0.0, params.theta_max),
        OccClass::Middle => (params.theta_m_min, params.theta_m_max),
        OccClass::Upper => (params.theta_min, 1.0),
    }
}

pub fn draw_theta<R: Rng + ?Sized>(father: OccClass, params: &ModelParams, rng: &mut R) -> f64 {
    let (lo, hi) = support(father, params);
    lo + (hi - lo) * rng.random::<f64>()
}

/// Ties at a threshold go to the higher class.
pub fn choose_class(theta: f64, lambda_m: f64, lambda_u: f64) -> OccClass {
    if theta >= lambda_u {
        OccClass::Upper
    } else if theta >= lambda_m {
        OccClass::Middle
    } else {
        OccClass::Working
    }
}

/// Integer class sizes summing to `population`, by largest remainder
/// (ties to the lower class index).
pub fn allocate_fathers(shares: &ClassShares, population: u64) -> [u64; 3] {
    let exact = shares.as_array().map(|s| s * population as f64);
    let mut sizes = exact.map(|v| v.floor() as u64);
    let assigned: u64 = sizes.iter().sum();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().take(population.saturating_sub(assigned) as usize) {
        sizes[k] += 1;
    }
    sizes
}

fn father_of(index: u64, sizes: &[u64; 3]) -> OccClass {
    if index < sizes[0] {
        OccClass::Working
    } else if index < sizes[0] + sizes[1] {
        OccClass::Middle
    } else {
        OccClass::Upper
    }
}

fn simulate_one(index: u64, sizes: &[u64; 3], cfg: &SimConfig, factory: &StreamFactory) -> Agent {
    let father_class = father_of(index, sizes);
    let mut rng = factory.stream(index);
    let theta = draw_theta(father_class, &cfg.params, &mut rng);
    Agent { father_class, theta, chosen_class: choose_class(theta, cfg.params.lambda_m, cfg.params.lambda_u) }
}

pub fn simulate_agents(cfg: &SimConfig) -> Result<Vec<Agent>, SimError> {
    cfg.validate()?;
    let sizes = allocate_fathers(&cfg.fathers, cfg.population);
    let factory = StreamFactory::new(cfg.seed);
    Ok((0..cfg.population).into_par_iter().map(|i| simulate_one(i, &sizes, cfg, &factory)).collect())
}

/// Father→child counts of a simulated cohort.
pub fn simulate_cohort(cfg: &SimConfig) -> Result<TransitionCounts, SimError> {
    cfg.validate()?;
    let sizes = allocate_fathers(&cfg.fathers, cfg.population);
    let factory = StreamFactory::new(cfg.seed);
    let tally = (0..cfg.population)
        .into_par_iter()
        .fold(
            || [[0u64; 3]; 3],
            |mut acc, i| {
                let a = simulate_one(i, &sizes, cfg, &factory);
                acc[a.father_class.index()][a.chosen_class.index()] += 1;
                acc
            },
        )
        .reduce(
            || [[0u64; 3]; 3],
            |mut a, b| {
                for i in 0..3 {
                    for j in 0..3 {
                        a[i][j] += b[i][j];
                    }
                }
                a
            },
        );
    TransitionCounts::new(tally.map(|row| row.map(|n| n as f64))).map_err(|e| SimError::InvalidParams(e.to_string()))
}

/// Incomes for simulated agents: log income is the systematic utility of
/// the chosen class plus normal noise with that class's variance.
pub fn simulate_incomes<R: Rng + ?Sized>(
    primitives: &Primitives,
    agents: &[Agent],
    wave_year: i32,
    birth_year: i32,
    rng: &mut R,
) -> Result<Vec<IncomeRecord>, SimError> {
    // Zero variances are allowed here: incomes then equal exp(V) exactly.
    let mut noise = Vec::with_capacity(3);
    for class in OccClass::ALL {
        let var = primitives.variance(class);
        let normal = Normal::new(0.0, var.sqrt())
            .map_err(|_| SimError::InvalidParams(format!("variance for {class} must be finite and >= 0, got {var}")))?;
        noise.push(normal);
    }
    Ok(agents
        .iter()
        .map(|a| {
            let v = primitives.systematic_utility(a.chosen_class, a.theta);
            IncomeRecord {
                wave_year,
                birth_year,
                occ_class: a.chosen_class,
                income: (v + noise[a.chosen_class.index()].sample(rng)).exp(),
            }
        })
        .collect())
}

/// A synthetic log-normal income panel with given per-class log moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncomePanelSpec {
    pub log_means: [f64; 3],
    pub log_variances: [f64; 3],
    pub waves: Vec<i32>,
    pub birth_year: i32,
    pub per_cell: usize,
    /// Standardize each (wave, class) sample so its mean and sample
    /// variance hit the targets exactly.
    pub exact_moments: bool,
}

pub fn simulate_income_panel(spec: &IncomePanelSpec, seed: u64) -> Result<Vec<IncomeRecord>, SimError> {
    if spec.per_cell < 2 {
        return Err(SimError::InvalidParams("need at least two incomes per wave and class".into()));
    }
    if spec.log_variances.iter().any(|v| !(*v > 0.0)) || spec.log_means.iter().any(|m| !m.is_finite()) {
        return Err(SimError::InvalidParams("log variances must be positive and means finite".into()));
    }
    let factory = StreamFactory::new(seed);
    let mut out = Vec::with_capacity(spec.waves.len() * 3 * spec.per_cell);
    for (w, &wave_year) in spec.waves.iter().enumerate() {
        for class in OccClass::ALL {
            let k = class.index();
            let mut rng = factory.stream((3 * w + k) as u64);
            let z: Vec<f64> = (0..spec.per_cell).map(|_| rand_distr::StandardNormal.sample(&mut rng)).collect();
            let z = if spec.exact_moments { standardize(&z) } else { z };
            let sd = spec.log_variances[k].sqrt();
            out.extend(z.into_iter().map(|z| IncomeRecord {
                wave_year,
                birth_year: spec.birth_year,
                occ_class: class,
                income: (spec.log_means[k] + sd * z).exp(),
            }));
        }
    }
    Ok(out)
}

fn standardize(z: &[f64]) -> Vec<f64> {
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    z.iter().map(|v| (v - mean) / sd).collect()
}
