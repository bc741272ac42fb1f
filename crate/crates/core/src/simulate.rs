//! Monte Carlo trajectories of the controller/adversary dynamics.
//!
//! Trajectory `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `i`,
//! so results do not depend on how rayon schedules the work. Per-trajectory
//! outputs are collected in index order and summed with Kahan compensation.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gain::duality_report;
use crate::model::{product_indices, AdversaryChoice, RobustMdpInstance, StationaryAdversaryPolicy, StationaryControllerPolicy};
use crate::oracle::optimal_mdp_policy;
use crate::structure::{check_adversary_communication, HittingCertificate, DEFAULT_POLICY_CAP};

/// Hitting-time trajectories give up after this many steps.
pub const HITTING_HORIZON: usize = 1_000_000;

/// Number of checkpoints kept in each running-average series.
const SERIES_POINTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum PolicySpec {
    Stationary {
        policy: StationaryControllerPolicy,
    },
    /// `before` until the first visit to `target`, `after` from then on.
    TwoPhase {
        before: StationaryControllerPolicy,
        target: usize,
        after: StationaryControllerPolicy,
    },
    Learner(LearnerConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum AdversarySpec {
    Stationary {
        policy: StationaryAdversaryPolicy,
    },
    TwoPhase {
        before: StationaryAdversaryPolicy,
        target: usize,
        after: StationaryAdversaryPolicy,
    },
}

/// Certainty-equivalence learner: replans on the empirical kernel at the
/// start of each epoch (epochs double in length) and explores uniformly with
/// probability `min(1, exploration/√t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub first_epoch: usize,
    pub exploration: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            first_epoch: 64,
            exploration: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Before,
    After,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub time: usize,
    pub state: usize,
    pub action: usize,
    pub next: usize,
    pub controller_phase: Phase,
    pub adversary_phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStats {
    pub n_steps: usize,
    pub n_trajectories: usize,
    pub seed: u64,
    /// Mean over trajectories of `(1/n) Σ r`.
    pub mean: f64,
    /// Sample standard deviation over trajectories divided by `√n_trajectories`.
    pub standard_error: f64,
    pub per_trajectory_mean: Vec<f64>,
    /// Step counts at which the running averages were recorded.
    pub checkpoints: Vec<usize>,
    /// Running average per trajectory at each checkpoint.
    pub series: Vec<Vec<f64>>,
    pub mean_series: Vec<f64>,
    /// Mean over trajectories of the smallest running average in the last
    /// third of the run (a liminf proxy).
    pub tail_min: f64,
    /// Same with the largest (a limsup proxy).
    pub tail_max: f64,
    /// First visit to the two-phase target, per trajectory, when one is set.
    pub hitting_times: Option<Vec<Option<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingEstimate {
    pub start: usize,
    pub target: usize,
    pub n_trajectories: usize,
    pub mean: f64,
    pub standard_error: f64,
    pub ci95: (f64, f64),
    /// Fraction of trajectories with `τ ≤ |S|`.
    pub within_n_states: f64,
    pub within_n_states_se: f64,
    /// Trajectories that did not hit the target within the horizon; they are
    /// excluded from the mean.
    pub horizon_exceeded: usize,
}

/// `Σ` with Kahan compensation.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = kahan_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = kahan_sum(values.iter().map(|v| (v - mean).powi(2))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn weighted(row: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(row).map_err(|e| Error::PreconditionFailed(format!("bad probability row: {e}")))
}

struct ControllerTable {
    rows: Vec<WeightedIndex<f64>>,
}

impl ControllerTable {
    fn new(inst: &RobustMdpInstance, policy: &StationaryControllerPolicy) -> Result<Self> {
        policy.validate(inst)?;
        Ok(Self {
            rows: policy.rows.iter().map(|r| weighted(r)).collect::<Result<_>>()?,
        })
    }
}

struct AdversaryTable {
    rows: Vec<Vec<WeightedIndex<f64>>>,
}

impl AdversaryTable {
    fn new(inst: &RobustMdpInstance, policy: &StationaryAdversaryPolicy) -> Result<Self> {
        policy.validate(inst)?;
        let rows = policy
            .choices
            .iter()
            .enumerate()
            .map(|(s, c)| inst.rows(s, c).iter().map(|r| weighted(r)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok(Self { rows })
    }
}

struct Phased<T> {
    before: T,
    after: T,
    target: Option<usize>,
}

enum Controller {
    Fixed(Phased<ControllerTable>),
    Learner(LearnerConfig),
}

/// Validated, sampling-ready specs.
struct Compiled {
    controller: Controller,
    adversary: Phased<AdversaryTable>,
    mu: WeightedIndex<f64>,
}

fn check_target(inst: &RobustMdpInstance, target: usize) -> Result<()> {
    if target >= inst.n_states() {
        return Err(Error::validation("target", &[target], "state out of range"));
    }
    Ok(())
}

fn compile(inst: &RobustMdpInstance, mu: &[f64], controller: &PolicySpec, adversary: &AdversarySpec) -> Result<Compiled> {
    let ns = inst.n_states();
    if mu.len() != ns {
        return Err(Error::DimensionMismatch("initial distribution length differs from n_states".into()));
    }
    if mu.iter().any(|&p| !(p >= 0.0)) || (mu.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::validation("mu", &[], "not a probability vector"));
    }
    let controller = match controller {
        PolicySpec::Stationary { policy } => {
            let t = ControllerTable::new(inst, policy)?;
            let t2 = ControllerTable::new(inst, policy)?;
            Controller::Fixed(Phased { before: t, after: t2, target: None })
        }
        PolicySpec::TwoPhase { before, target, after } => {
            check_target(inst, *target)?;
            Controller::Fixed(Phased {
                before: ControllerTable::new(inst, before)?,
                after: ControllerTable::new(inst, after)?,
                target: Some(*target),
            })
        }
        PolicySpec::Learner(cfg) => {
            if !inst.controller_set().contains_diracs(inst.n_actions()) {
                return Err(Error::PreconditionFailed("the learner plays Dirac actions, which Q must contain".into()));
            }
            let count = (inst.n_actions() as u128).pow(ns as u32);
            if count > DEFAULT_POLICY_CAP as u128 {
                return Err(Error::EnumerationCapExceeded { count, cap: DEFAULT_POLICY_CAP });
            }
            if cfg.first_epoch == 0 || !(cfg.exploration >= 0.0) {
                return Err(Error::validation("learner", &[], "first_epoch must be ≥ 1 and exploration ≥ 0"));
            }
            Controller::Learner(cfg.clone())
        }
    };
    let adversary = match adversary {
        AdversarySpec::Stationary { policy } => Phased {
            before: AdversaryTable::new(inst, policy)?,
            after: AdversaryTable::new(inst, policy)?,
            target: None,
        },
        AdversarySpec::TwoPhase { before, target, after } => {
            check_target(inst, *target)?;
            Phased {
                before: AdversaryTable::new(inst, before)?,
                after: AdversaryTable::new(inst, after)?,
                target: Some(*target),
            }
        }
    };
    Ok(Compiled {
        controller,
        adversary,
        mu: weighted(mu)?,
    })
}

struct Learner<'a> {
    inst: &'a RobustMdpInstance,
    cfg: &'a LearnerConfig,
    counts: Vec<Vec<Vec<u32>>>,
    policy: Vec<usize>,
    epoch_len: usize,
    epoch_end: usize,
}

impl<'a> Learner<'a> {
    fn new(inst: &'a RobustMdpInstance, cfg: &'a LearnerConfig) -> Self {
        let (ns, na) = (inst.n_states(), inst.n_actions());
        Self {
            inst,
            cfg,
            counts: vec![vec![vec![0; ns]; na]; ns],
            policy: vec![0; ns],
            epoch_len: cfg.first_epoch,
            epoch_end: cfg.first_epoch,
        }
    }

    fn replan(&mut self) {
        let ns = self.inst.n_states();
        let kernel: Vec<Vec<Vec<f64>>> = self
            .counts
            .iter()
            .map(|per_a| {
                per_a
                    .iter()
                    .map(|c| {
                        let n: u32 = c.iter().sum();
                        if n == 0 {
                            vec![1.0 / ns as f64; ns]
                        } else {
                            c.iter().map(|&k| k as f64 / n as f64).collect()
                        }
                    })
                    .collect()
            })
            .collect();
        if let Ok((pol, _)) = optimal_mdp_policy(&kernel, self.inst.rewards()) {
            self.policy = pol;
        }
    }

    /// Action at the 1-based step `t` in state `x`.
    fn act(&mut self, t: usize, x: usize, rng: &mut ChaCha8Rng) -> usize {
        if t > self.epoch_end {
            self.replan();
            self.epoch_len *= 2;
            self.epoch_end = t - 1 + self.epoch_len;
        }
        let eps = (self.cfg.exploration / (t as f64).sqrt()).min(1.0);
        if rng.gen::<f64>() < eps {
            rng.gen_range(0..self.inst.n_actions())
        } else {
            self.policy[x]
        }
    }

    fn observe(&mut self, x: usize, a: usize, next: usize) {
        self.counts[x][a][next] += 1;
    }
}

struct TrajOut {
    total: f64,
    series: Vec<f64>,
    tail_min: f64,
    tail_max: f64,
    hit: Option<usize>,
}

/// Runs one trajectory; `log` receives every transition when given.
fn trajectory(
    inst: &RobustMdpInstance,
    c: &Compiled,
    rng: &mut ChaCha8Rng,
    start: Option<usize>,
    n_steps: usize,
    checkpoints: &[usize],
    mut log: Option<&mut Vec<TraceStep>>,
) -> TrajOut {
    let mut x = start.unwrap_or_else(|| c.mu.sample(rng));
    let mut learner = match &c.controller {
        Controller::Learner(cfg) => Some(Learner::new(inst, cfg)),
        Controller::Fixed(_) => None,
    };
    let ctrl_target = match &c.controller {
        Controller::Fixed(p) => p.target,
        Controller::Learner(_) => None,
    };
    let watch = ctrl_target.or(c.adversary.target);
    let (mut ctrl_after, mut adv_after) = (ctrl_target.is_none(), c.adversary.target.is_none());
    let mut hit = None;
    let mut total = 0.0;
    let mut comp = 0.0;
    let mut series = Vec::with_capacity(checkpoints.len());
    let mut next_cp = 0;
    let tail_start = n_steps - n_steps / 3;
    let (mut tail_min, mut tail_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..n_steps {
        if ctrl_target == Some(x) {
            ctrl_after = true;
        }
        if c.adversary.target == Some(x) {
            adv_after = true;
        }
        if hit.is_none() && watch == Some(x) {
            hit = Some(k);
        }
        let a = match (&c.controller, learner.as_mut()) {
            (Controller::Fixed(p), _) => {
                let table = if ctrl_after { &p.after } else { &p.before };
                table.rows[x].sample(rng)
            }
            (Controller::Learner(_), Some(l)) => l.act(k + 1, x, rng),
            (Controller::Learner(_), None) => unreachable!(),
        };
        let table = if adv_after { &c.adversary.after } else { &c.adversary.before };
        let next = table.rows[x][a].sample(rng);
        if let Some(l) = learner.as_mut() {
            l.observe(x, a, next);
        }
        if let Some(log) = log.as_deref_mut() {
            log.push(TraceStep {
                time: k,
                state: x,
                action: a,
                next,
                controller_phase: if ctrl_after { Phase::After } else { Phase::Before },
                adversary_phase: if adv_after { Phase::After } else { Phase::Before },
            });
        }
        // Kahan step on the running total
        let y = inst.reward(x, a) - comp;
        let t = total + y;
        comp = (t - total) - y;
        total = t;
        let avg = total / (k + 1) as f64;
        if k + 1 >= tail_start {
            tail_min = tail_min.min(avg);
            tail_max = tail_max.max(avg);
        }
        if next_cp < checkpoints.len() && checkpoints[next_cp] == k + 1 {
            series.push(avg);
            next_cp += 1;
        }
        x = next;
    }
    TrajOut {
        total,
        series,
        tail_min,
        tail_max,
        hit,
    }
}

fn checkpoints(n_steps: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=SERIES_POINTS).map(|i| (i * n_steps).div_ceil(SERIES_POINTS)).collect();
    out.dedup();
    out
}

/// Simulates `n_trajectories` independent runs of `n_steps` steps from `μ`.
pub fn run(
    inst: &RobustMdpInstance,
    mu: &[f64],
    controller: &PolicySpec,
    adversary: &AdversarySpec,
    n_steps: usize,
    n_trajectories: usize,
    seed: u64,
) -> Result<RunStats> {
    if n_steps == 0 || n_trajectories == 0 {
        return Err(Error::validation("run", &[], "n_steps and n_trajectories must be ≥ 1"));
    }
    let compiled = compile(inst, mu, controller, adversary)?;
    let cps = checkpoints(n_steps);
    let outs: Vec<TrajOut> = (0..n_trajectories)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            trajectory(inst, &compiled, &mut rng, None, n_steps, &cps, None)
        })
        .collect();
    let per_mean: Vec<f64> = outs.iter().map(|o| o.total / n_steps as f64).collect();
    let (mean, standard_error) = mean_and_se(&per_mean);
    let nt = n_trajectories as f64;
    let mean_series = (0..cps.len()).map(|j| kahan_sum(outs.iter().map(|o| o.series[j])) / nt).collect();
    let has_target = match controller {
        PolicySpec::TwoPhase { .. } => true,
        _ => matches!(adversary, AdversarySpec::TwoPhase { .. }),
    };
    Ok(RunStats {
        n_steps,
        n_trajectories,
        seed,
        mean,
        standard_error,
        per_trajectory_mean: per_mean,
        mean_series,
        tail_min: kahan_sum(outs.iter().map(|o| o.tail_min)) / nt,
        tail_max: kahan_sum(outs.iter().map(|o| o.tail_max)) / nt,
        hitting_times: has_target.then(|| outs.iter().map(|o| o.hit).collect()),
        series: outs.into_iter().map(|o| o.series).collect(),
        checkpoints: cps,
    })
}

/// One trajectory from `start` with every transition logged.
pub fn trace(
    inst: &RobustMdpInstance,
    start: usize,
    controller: &PolicySpec,
    adversary: &AdversarySpec,
    n_steps: usize,
    seed: u64,
) -> Result<Vec<TraceStep>> {
    check_target(inst, start)?;
    let mu = vec![1.0 / inst.n_states() as f64; inst.n_states()];
    let compiled = compile(inst, &mu, controller, adversary)?;
    let mut rng = rng_for(seed, 0);
    let mut log = Vec::with_capacity(n_steps);
    trajectory(inst, &compiled, &mut rng, Some(start), n_steps, &[], Some(&mut log));
    Ok(log)
}

/// Monte Carlo estimate of `E_start τ_y` under a stationary pair.
pub fn estimate_hitting_time(
    inst: &RobustMdpInstance,
    controller: &StationaryControllerPolicy,
    adversary: &StationaryAdversaryPolicy,
    target: usize,
    start: usize,
    n_trajectories: usize,
    seed: u64,
) -> Result<HittingEstimate> {
    check_target(inst, target)?;
    check_target(inst, start)?;
    if n_trajectories == 0 {
        return Err(Error::validation("n_trajectories", &[], "must be ≥ 1"));
    }
    let ctrl = ControllerTable::new(inst, controller)?;
    let adv = AdversaryTable::new(inst, adversary)?;
    let times: Vec<Option<usize>> = (0..n_trajectories)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let mut x = start;
            for k in 0..=HITTING_HORIZON {
                if x == target {
                    return Some(k);
                }
                let a = ctrl.rows[x].sample(&mut rng);
                x = adv.rows[x][a].sample(&mut rng);
            }
            None
        })
        .collect();
    let hit: Vec<f64> = times.iter().flatten().map(|&t| t as f64).collect();
    let horizon_exceeded = n_trajectories - hit.len();
    let (mean, standard_error) = if hit.is_empty() { (f64::NAN, f64::NAN) } else { mean_and_se(&hit) };
    let ns = inst.n_states();
    let within: Vec<f64> = times.iter().map(|t| if t.is_some_and(|t| t <= ns) { 1.0 } else { 0.0 }).collect();
    let (within_n_states, within_n_states_se) = mean_and_se(&within);
    Ok(HittingEstimate {
        start,
        target,
        n_trajectories,
        mean,
        standard_error,
        ci95: (mean - 1.96 * standard_error, mean + 1.96 * standard_error),
        within_n_states,
        within_n_states_se,
        horizon_exceeded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub estimates: Vec<HittingEstimate>,
    /// `max_w` of the Monte Carlo mean hitting time.
    pub max_mean: f64,
    /// Every start's mean is at most the bound (3σ allowance).
    pub mean_within_bound: bool,
    /// Every start's `P(τ ≤ |S|)` is at least `δ′` (3σ allowance).
    pub probability_at_least_delta: bool,
}

/// Checks a hitting certificate by simulation from every start state; the
/// side the certificate did not build is supplied by the caller.
pub fn cross_check_certificate(
    inst: &RobustMdpInstance,
    cert: &mut HittingCertificate,
    controller: &StationaryControllerPolicy,
    adversary: &StationaryAdversaryPolicy,
    n_trajectories: usize,
    seed: u64,
) -> Result<CertificateCheck> {
    let estimates = (0..inst.n_states())
        .map(|w| estimate_hitting_time(inst, controller, adversary, cert.target, w, n_trajectories, seed ^ ((w as u64) << 32)))
        .collect::<Result<Vec<_>>>()?;
    let max_mean = estimates.iter().map(|e| e.mean).fold(0.0, f64::max);
    cert.empirical_mean = Some(max_mean);
    let mean_within_bound = estimates
        .iter()
        .all(|e| e.horizon_exceeded == 0 && e.mean - 3.0 * e.standard_error <= cert.bound);
    let probability_at_least_delta = estimates
        .iter()
        .all(|e| e.within_n_states >= cert.delta_prime - 3.0 * e.within_n_states_se);
    Ok(CertificateCheck {
        estimates,
        max_mean,
        mean_within_bound,
        probability_at_least_delta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversaryRun {
    pub adversary: Vec<AdversaryChoice>,
    pub mean: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HdsDemoReport {
    pub alpha_star: f64,
    pub alpha_prime: f64,
    pub gap: f64,
    pub runs: Vec<AdversaryRun>,
    /// Smallest learner mean over the stationary adversaries.
    pub learner_worst_mean: f64,
    pub learner_worst_se: f64,
    /// `α* + (α′ − α*)/2 − 3·SE`.
    pub threshold: f64,
    /// Gap-free instances pass trivially.
    pub pass: bool,
}

pub const DEMO_STEPS: usize = 100_000;
const DEMO_TRAJECTORIES: usize = 4;

/// Plays the learner against every extreme stationary adversary and
/// compares its worst long-run mean with `α*` and `α′`.
pub fn hd_s_gap_demo(inst: &RobustMdpInstance, tol: f64, seed: u64, n_steps: usize) -> Result<HdsDemoReport> {
    let comm = check_adversary_communication(inst)?;
    if !comm.is_weakly_communicating() {
        return Err(Error::PreconditionFailed(format!(
            "adversary communication check returned {}",
            comm.label()
        )));
    }
    if !inst.controller_set().contains_diracs(inst.n_actions()) {
        return Err(Error::PreconditionFailed("the learner plays Dirac actions, which Q must contain".into()));
    }
    let report = duality_report(inst, tol)?;
    let options: Vec<Vec<AdversaryChoice>> = (0..inst.n_states())
        .map(|s| crate::ambiguity::extreme_kernels(s, inst))
        .collect::<Result<_>>()?;
    let radices: Vec<usize> = options.iter().map(Vec::len).collect();
    let count = radices.iter().fold(1u128, |a, &r| a.saturating_mul(r as u128));
    if count > DEFAULT_POLICY_CAP as u128 {
        return Err(Error::EnumerationCapExceeded { count, cap: DEFAULT_POLICY_CAP });
    }
    let mu = vec![1.0 / inst.n_states() as f64; inst.n_states()];
    let learner = PolicySpec::Learner(LearnerConfig::default());
    let mut runs = Vec::new();
    for pick in product_indices(radices) {
        let choices: Vec<AdversaryChoice> = pick.iter().enumerate().map(|(s, &o)| options[s][o].clone()).collect();
        let adversary = AdversarySpec::Stationary {
            policy: StationaryAdversaryPolicy { choices: choices.clone() },
        };
        let stats = run(inst, &mu, &learner, &adversary, n_steps, DEMO_TRAJECTORIES, seed)?;
        runs.push(AdversaryRun {
            adversary: choices,
            mean: stats.mean,
            standard_error: stats.standard_error,
        });
    }
    let worst = runs
        .iter()
        .min_by(|a, b| a.mean.total_cmp(&b.mean))
        .expect("at least one adversary policy");
    let (alpha_star, alpha_prime) = (report.alpha_supinf, report.alpha_infsup);
    let threshold = alpha_star + 0.5 * (alpha_prime - alpha_star) - 3.0 * worst.standard_error;
    let pass = report.gap.abs() <= tol || worst.mean >= threshold;
    Ok(HdsDemoReport {
        alpha_star,
        alpha_prime,
        gap: report.gap,
        learner_worst_mean: worst.mean,
        learner_worst_se: worst.standard_error,
        threshold,
        pass,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ControllerSet, KernelRows, StateAmbiguity};

    fn d2_toggle() -> RobustMdpInstance {
        let l: Vec<KernelRows> = vec![
            vec![vec![0.0, 1.0], vec![0.75, 0.25]],
            vec![vec![0.5, 0.5], vec![0.75, 0.25]],
        ];
        let r: Vec<KernelRows> = vec![
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0], vec![0.5, 0.5]],
        ];
        RobustMdpInstance::new(
            vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            ControllerSet::DiracOnly,
            vec![StateAmbiguity::FiniteKernels(l), StateAmbiguity::FiniteKernels(r)],
        )
        .unwrap()
    }

    fn stationary(actions: &[usize], kernels: &[usize]) -> (PolicySpec, AdversarySpec) {
        (
            PolicySpec::Stationary {
                policy: StationaryControllerPolicy::deterministic(actions, 2),
            },
            AdversarySpec::Stationary {
                policy: StationaryAdversaryPolicy::from_kernels(kernels),
            },
        )
    }

    #[test]
    fn constant_reward_is_exact() {
        let inst = RobustMdpInstance::new(
            vec![vec![0.7]],
            ControllerSet::DiracOnly,
            vec![StateAmbiguity::FiniteKernels(vec![vec![vec![1.0]]])],
        )
        .unwrap();
        let c = PolicySpec::Stationary {
            policy: StationaryControllerPolicy::deterministic(&[0], 1),
        };
        let a = AdversarySpec::Stationary {
            policy: StationaryAdversaryPolicy::nominal(&inst),
        };
        let stats = run(&inst, &[1.0], &c, &a, 10_000, 3, 1).unwrap();
        assert!((stats.mean - 0.7).abs() < 1e-12);
        assert!(stats.standard_error < 1e-12);
    }

    #[test]
    fn same_seed_same_stats() {
        let inst = d2_toggle();
        let (c, a) = stationary(&[0, 1], &[1, 1]);
        let x = run(&inst, &[1.0, 0.0], &c, &a, 2_000, 8, 42).unwrap();
        let y = run(&inst, &[1.0, 0.0], &c, &a, 2_000, 8, 42).unwrap();
        assert_eq!(x, y);
        let z = run(&inst, &[1.0, 0.0], &c, &a, 2_000, 8, 43).unwrap();
        assert_ne!(x.per_trajectory_mean, z.per_trajectory_mean);
    }

    #[test]
    fn saddle_pair_mean() {
        let inst = d2_toggle();
        let (c, a) = stationary(&[0, 1], &[1, 1]);
        let stats = run(&inst, &[1.0, 0.0], &c, &a, 100_000, 16, 7).unwrap();
        assert!((stats.mean - 0.5).abs() <= 3.0 * stats.standard_error + 1e-3, "{} ± {}", stats.mean, stats.standard_error);
        assert!(stats.tail_min <= stats.tail_max);
    }

    #[test]
    fn hitting_times_of_toggle() {
        let inst = d2_toggle();
        let d = StationaryControllerPolicy::deterministic(&[0, 1], 2);
        let nominal = StationaryAdversaryPolicy::from_kernels(&[0, 0]);
        let e = estimate_hitting_time(&inst, &d, &nominal, 1, 0, 100, 3).unwrap();
        assert_eq!(e.mean, 1.0);
        let e = estimate_hitting_time(&inst, &d, &nominal, 1, 1, 10, 3).unwrap();
        assert_eq!(e.mean, 0.0);
        let leaky = StationaryAdversaryPolicy::from_kernels(&[1, 1]);
        let e = estimate_hitting_time(&inst, &d, &leaky, 1, 0, 10_000, 3).unwrap();
        assert!((e.mean - 2.0).abs() <= 3.0 * e.standard_error, "{e:?}");
    }

    #[test]
    fn two_phase_switches_on_first_visit() {
        let inst = d2_toggle();
        let c = PolicySpec::TwoPhase {
            before: StationaryControllerPolicy::deterministic(&[0, 0], 2),
            target: 1,
            after: StationaryControllerPolicy::deterministic(&[1, 1], 2),
        };
        let a = AdversarySpec::TwoPhase {
            before: StationaryAdversaryPolicy::from_kernels(&[1, 1]),
            target: 1,
            after: StationaryAdversaryPolicy::from_kernels(&[0, 0]),
        };
        let log = trace(&inst, 0, &c, &a, 200, 5).unwrap();
        let first = log.iter().position(|st| st.state == 1).unwrap();
        for st in &log[..first] {
            assert_eq!(st.controller_phase, Phase::Before);
            assert_eq!(st.action, 0);
        }
        for st in &log[first..] {
            assert_eq!(st.controller_phase, Phase::After);
            assert_eq!(st.adversary_phase, Phase::After);
            assert_eq!(st.action, 1);
        }
        // after the switch R stays put under the nominal kernel
        assert!(log[first..].iter().all(|st| st.next == 1));
    }

    #[test]
    fn kahan_beats_naive_sum() {
        let v: Vec<f64> = std::iter::once(1.0).chain(std::iter::repeat_n(1e-16, 10_000)).collect();
        assert!((kahan_sum(v.iter().copied()) - (1.0 + 1e-12)).abs() < 1e-15);
    }
}
