//! Seeded Monte Carlo engine: null calibration, power estimation, power
//! curves, paired test comparison and null-shape checks.
//!
//! Replicate `r` of every simulation draws its data from a seed that is a
//! pure function of `(master_seed, purpose, grid point, r)`. Replicates run
//! in parallel, results are gathered by index and reduced sequentially, so
//! every output is identical for any number of worker threads.

use rayon::prelude::*;

use crate::ellipsoid::{solve_weight_plan, EllipsoidSpec, WeightPlan};
use crate::error::{Error, Result};
use crate::normal::normal_cdf;
use crate::seed::derive_seed;
use crate::statistic::{cm_statistic, normalized_factor, u_statistic};
use crate::toeplitz::{family_poly, family_tridiag, GaussianSampler, SampleMatrix, ToeplitzSpec};

const STREAM_NULL: u64 = 1;
const STREAM_POWER: u64 = 2;
const STREAM_NORMALITY: u64 = 3;
const STREAM_SAMPLES: u64 = 4;

/// Minimum replicate count for percentile estimation.
pub const MIN_REPLICATES: usize = 100;

/// `M` values of the polynomial-decay family used in the reference study.
pub const M_GRID: [f64; 10] = [2.0, 2.5, 3.0, 4.0, 6.0, 8.0, 16.0, 30.0, 60.0, 80.0];

/// Ten equispaced `ρ` values in `(0, 0.35]`.
pub fn rho_grid() -> Vec<f64> {
    (1..=10).map(|k| (35 * k) as f64 / 1000.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    /// Weighted U-statistic, normalized as `n(p−T)Â_n`.
    Chi,
    /// Frobenius-norm baseline `T̂^{CM}/p`.
    Cm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub n: usize,
    pub p: usize,
    pub replicates: usize,
    pub master_seed: u64,
    /// Class and radius of the weight plan; grid studies override the radius.
    pub plan_spec: EllipsoidSpec,
    pub test_kind: TestKind,
    pub alpha_level: f64,
}

impl SimulationConfig {
    /// Chi test at level 0.05.
    pub fn new(
        n: usize,
        p: usize,
        replicates: usize,
        master_seed: u64,
        plan_spec: EllipsoidSpec,
    ) -> Self {
        Self {
            n,
            p,
            replicates,
            master_seed,
            plan_spec,
            test_kind: TestKind::Chi,
            alpha_level: 0.05,
        }
    }

    pub fn with_test(mut self, kind: TestKind) -> Self {
        self.test_kind = kind;
        self
    }

    pub fn with_level(mut self, alpha_level: f64) -> Self {
        self.alpha_level = alpha_level;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be >= 2, got {}", self.n)));
        }
        if self.p < 3 {
            return Err(Error::Config(format!("p must be >= 3, got {}", self.p)));
        }
        if self.replicates < MIN_REPLICATES {
            return Err(Error::Config(format!(
                "at least {MIN_REPLICATES} replicates are required, got {}",
                self.replicates
            )));
        }
        if !(self.alpha_level > 0.0 && self.alpha_level < 1.0) {
            return Err(Error::Config(format!(
                "alpha_level must lie in (0, 1), got {}",
                self.alpha_level
            )));
        }
        self.plan_spec
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn plan(&self) -> Result<WeightPlan> {
        solve_weight_plan(&self.plan_spec, self.p)
    }
}

/// How a replicate dataset is turned into a test statistic.
#[derive(Debug, Clone)]
enum Evaluator {
    Chi(WeightPlan),
    Cm,
}

impl Evaluator {
    fn for_kind(kind: TestKind, plan: Option<&WeightPlan>) -> Self {
        match (kind, plan) {
            (TestKind::Chi, Some(plan)) => Evaluator::Chi(plan.clone()),
            (TestKind::Chi, None) => unreachable!("chi evaluator needs a plan"),
            (TestKind::Cm, _) => Evaluator::Cm,
        }
    }

    fn evaluate(&self, x: &SampleMatrix) -> Result<f64> {
        match self {
            Evaluator::Chi(plan) => {
                Ok(normalized_factor(x.n(), x.p(), plan.t) * u_statistic(x, plan)?)
            }
            Evaluator::Cm => cm_statistic(x),
        }
    }
}

/// Simulates `replicates` datasets from `sampler` and evaluates every
/// evaluator on each one. Output is indexed `[evaluator][replicate]`.
fn simulate(
    config: &SimulationConfig,
    sampler: &GaussianSampler,
    evaluators: &[Evaluator],
    stream: &[u64],
) -> Result<Vec<Vec<f64>>> {
    let per_replicate: Vec<Vec<f64>> = (0..config.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut path = stream.to_vec();
            path.push(r);
            let x = sampler.sample(config.n, derive_seed(config.master_seed, &path));
            evaluators.iter().map(|e| e.evaluate(&x)).collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..evaluators.len())
        .map(|e| per_replicate.iter().map(|row| row[e]).collect())
        .collect())
}

/// Empirical `q`-quantile by the nearest-rank rule (the `⌈qR⌉`-th order statistic).
pub fn nearest_rank_quantile(samples: &[f64], q: f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Moment summary of simulated statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub replicates: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

impl SampleSummary {
    pub fn from_samples(samples: &[f64]) -> Self {
        let r = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / r;
        let variance = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0);
        Self {
            replicates: samples.len(),
            mean,
            variance,
            min: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullCalibration {
    /// Empirical `(1 − alpha_level)` quantile of the statistic under `Σ = I`.
    pub threshold: f64,
    pub summary: SampleSummary,
}

/// Calibrates the configured test on null datasets.
pub fn estimate_null_percentile(config: &SimulationConfig) -> Result<NullCalibration> {
    config.validate()?;
    let plan = match config.test_kind {
        TestKind::Chi => Some(config.plan()?),
        TestKind::Cm => None,
    };
    let sampler = GaussianSampler::new(&ToeplitzSpec::identity(config.p)?)?;
    let evaluator = Evaluator::for_kind(config.test_kind, plan.as_ref());
    let samples = simulate(config, &sampler, &[evaluator], &[STREAM_NULL])?.remove(0);
    Ok(NullCalibration {
        threshold: nearest_rank_quantile(&samples, 1.0 - config.alpha_level),
        summary: SampleSummary::from_samples(&samples),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub power_hat: f64,
    /// Binomial standard error `√(π̂(1−π̂)/R)`.
    pub mc_stderr: f64,
}

impl PowerEstimate {
    fn from_statistics(samples: &[f64], threshold: f64) -> Self {
        let r = samples.len() as f64;
        let hits = samples.iter().filter(|&&s| s > threshold).count() as f64;
        let power_hat = hits / r;
        Self {
            power_hat,
            mc_stderr: (power_hat * (1.0 - power_hat) / r).sqrt(),
        }
    }
}

/// Rejection rate of the configured test under `alternative` at `threshold`.
pub fn estimate_power(
    config: &SimulationConfig,
    alternative: &ToeplitzSpec,
    threshold: f64,
) -> Result<PowerEstimate> {
    config.validate()?;
    check_dimension(config, alternative)?;
    let plan = match config.test_kind {
        TestKind::Chi => Some(config.plan()?),
        TestKind::Cm => None,
    };
    let sampler = GaussianSampler::new(alternative)?;
    let evaluator = Evaluator::for_kind(config.test_kind, plan.as_ref());
    let samples = simulate(config, &sampler, &[evaluator], &[STREAM_POWER, 0])?.remove(0);
    Ok(PowerEstimate::from_statistics(&samples, threshold))
}

fn check_dimension(config: &SimulationConfig, spec: &ToeplitzSpec) -> Result<()> {
    if spec.p() != config.p {
        return Err(Error::Config(format!(
            "alternative has dimension {} but the study uses p = {}",
            spec.p(),
            config.p
        )));
    }
    Ok(())
}

/// Simulated statistics of the configured test under `alternative`.
pub fn statistic_samples(
    config: &SimulationConfig,
    alternative: &ToeplitzSpec,
    stream: u64,
) -> Result<Vec<f64>> {
    config.validate()?;
    check_dimension(config, alternative)?;
    let plan = match config.test_kind {
        TestKind::Chi => Some(config.plan()?),
        TestKind::Cm => None,
    };
    let sampler = GaussianSampler::new(alternative)?;
    let evaluator = Evaluator::for_kind(config.test_kind, plan.as_ref());
    Ok(simulate(config, &sampler, &[evaluator], &[STREAM_SAMPLES, stream])?.remove(0))
}

/// One-parameter family of alternatives.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `σ_j = j^{−2}/M` for each `M` in the grid.
    PolyM(Vec<f64>),
    /// `σ_1 = ρ` for each `ρ` in the grid.
    Tridiag(Vec<f64>),
}

impl Family {
    pub fn len(&self) -> usize {
        match self {
            Family::PolyM(g) | Family::Tridiag(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Members with their radius and label, in grid order.
    pub fn members(&self, p: usize) -> Result<Vec<FamilyMember>> {
        match self {
            Family::PolyM(grid) => grid
                .iter()
                .map(|&m| {
                    let (spec, psi) = family_poly(m, p)?;
                    Ok(FamilyMember {
                        spec,
                        psi,
                        label: format!("M={m}"),
                    })
                })
                .collect(),
            Family::Tridiag(grid) => grid
                .iter()
                .map(|&rho| {
                    let (spec, psi) = family_tridiag(rho, p)?;
                    Ok(FamilyMember {
                        spec,
                        psi,
                        label: format!("rho={rho}"),
                    })
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub spec: ToeplitzSpec,
    pub psi: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerPoint {
    pub psi: f64,
    pub label: String,
    pub power_hat: f64,
    pub mc_stderr: f64,
    pub threshold_used: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    /// Sorted by `psi` ascending.
    pub points: Vec<PowerPoint>,
    pub config: SimulationConfig,
}

/// Power curves of several tests over one family, on shared datasets.
///
/// The chi test at grid point `i` uses the plan for radius `ψ_i`. All tests
/// are calibrated on a single set of null datasets; each chi plan gets its
/// own percentile, and plans sharing a truncation share it because their
/// normalized weights coincide.
fn family_curves(
    config: &SimulationConfig,
    family: &Family,
    kinds: &[TestKind],
) -> Result<Vec<PowerCurve>> {
    config.validate()?;
    let members = family.members(config.p)?;
    let plans: Vec<Option<WeightPlan>> = if kinds.contains(&TestKind::Chi) {
        members
            .iter()
            .map(|m| solve_weight_plan(&config.plan_spec.with_psi(m.psi)?, config.p).map(Some))
            .collect::<Result<_>>()?
    } else {
        vec![None; members.len()]
    };

    // Distinct null evaluators: the CM statistic once, one chi plan per truncation.
    let mut null_evaluators = Vec::new();
    let mut cm_slot = None;
    let mut chi_slots: Vec<(usize, usize)> = Vec::new(); // (T, slot)
    for &kind in kinds {
        match kind {
            TestKind::Cm => {
                if cm_slot.is_none() {
                    cm_slot = Some(null_evaluators.len());
                    null_evaluators.push(Evaluator::Cm);
                }
            }
            TestKind::Chi => {
                for plan in plans.iter().flatten() {
                    if !chi_slots.iter().any(|&(t, _)| t == plan.t) {
                        chi_slots.push((plan.t, null_evaluators.len()));
                        null_evaluators.push(Evaluator::Chi(plan.clone()));
                    }
                }
            }
        }
    }
    let null_sampler = GaussianSampler::new(&ToeplitzSpec::identity(config.p)?)?;
    let null_stats = simulate(config, &null_sampler, &null_evaluators, &[STREAM_NULL])?;
    let q = 1.0 - config.alpha_level;
    let null_thresholds: Vec<f64> = null_stats
        .iter()
        .map(|s| nearest_rank_quantile(s, q))
        .collect();

    let mut curves: Vec<Vec<PowerPoint>> = vec![Vec::with_capacity(members.len()); kinds.len()];
    for (i, (member, plan)) in members.iter().zip(&plans).enumerate() {
        let evaluators: Vec<Evaluator> = kinds
            .iter()
            .map(|&k| Evaluator::for_kind(k, plan.as_ref()))
            .collect();
        let sampler = GaussianSampler::new(&member.spec)?;
        let stats = simulate(config, &sampler, &evaluators, &[STREAM_POWER, i as u64])?;
        for (k, (&kind, samples)) in kinds.iter().zip(&stats).enumerate() {
            let slot = match kind {
                TestKind::Cm => cm_slot.expect("CM slot registered"),
                TestKind::Chi => {
                    let t = plan.as_ref().expect("chi plan").t;
                    chi_slots
                        .iter()
                        .find(|&&(pt, _)| pt == t)
                        .expect("chi slot")
                        .1
                }
            };
            let threshold = null_thresholds[slot];
            let est = PowerEstimate::from_statistics(samples, threshold);
            curves[k].push(PowerPoint {
                psi: member.psi,
                label: member.label.clone(),
                power_hat: est.power_hat,
                mc_stderr: est.mc_stderr,
                threshold_used: threshold,
            });
        }
    }
    Ok(kinds
        .iter()
        .zip(curves)
        .map(|(&kind, mut points)| {
            points.sort_by(|a, b| a.psi.total_cmp(&b.psi));
            PowerCurve {
                points,
                config: config.with_test(kind),
            }
        })
        .collect())
}

/// Power of the configured test along a family of alternatives.
pub fn power_curve(config: &SimulationConfig, family: &Family) -> Result<PowerCurve> {
    Ok(family_curves(config, family, &[config.test_kind])?.remove(0))
}

/// Chi and CM curves computed on identical datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub chi: PowerCurve,
    pub cm: PowerCurve,
}

pub fn compare_tests(config: &SimulationConfig, family: &Family) -> Result<Comparison> {
    let mut curves = family_curves(config, family, &[TestKind::Chi, TestKind::Cm])?;
    let cm = curves.pop().expect("two curves");
    let chi = curves.pop().expect("two curves");
    Ok(Comparison { chi, cm })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityReport {
    /// Kolmogorov–Smirnov distance of `n(p−T)Â_n` to `N(0, 1)`.
    pub ks_statistic: f64,
    pub mean_hat: f64,
    pub var_hat: f64,
}

/// Null distribution shape of the normalized chi statistic.
pub fn normality_check(config: &SimulationConfig) -> Result<NormalityReport> {
    config.validate()?;
    let plan = config.plan()?;
    let sampler = GaussianSampler::new(&ToeplitzSpec::identity(config.p)?)?;
    let samples = simulate(
        config,
        &sampler,
        &[Evaluator::Chi(plan)],
        &[STREAM_NORMALITY],
    )?
    .remove(0);
    let summary = SampleSummary::from_samples(&samples);
    Ok(NormalityReport {
        ks_statistic: ks_distance(&samples, normal_cdf),
        mean_hat: summary.mean,
        var_hat: summary.variance,
    })
}

/// `sup_x |F_R(x) − F(x)|` for the empirical CDF of `samples`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / r).max((i + 1) as f64 / r - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1%-level Kolmogorov–Smirnov critical value `1.63/√R`.
pub fn ks_critical_value_1pct(replicates: usize) -> f64 {
    1.63 / (replicates as f64).sqrt()
}
