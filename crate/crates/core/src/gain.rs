//! Constant-gain solutions by vanishing discount.
//!
//! For each `γ` in an ascending schedule the discounted game is solved in
//! relative form, giving `u_γ = v_γ − v_γ(s₀)` and `α_γ = (1−γ) v_γ(s₀)`.
//! Since the error of both is `O(1−γ)`, each step also forms the
//! Richardson-extrapolated pair from the previous step and keeps whichever
//! candidate has the smaller constant-gain residual.

use serde::Serialize;

use crate::ambiguity::worst_case_expectation;
use crate::bellman::{apply_shifted, solve_discounted_relative, span, sup_norm_diff};
use crate::error::{Error, Result};
use crate::game::{solve_supinf, Orientation};
use crate::model::{ControllerSet, RobustMdpInstance, StationaryControllerPolicy};
use crate::structure::{analyze, StructureReport};

/// Tolerance handed to the per-state games when evaluating residuals.
const GAME_TOL: f64 = 1e-10;

/// Number of trailing schedule points used by the span-growth fit.
const SPAN_WINDOW: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    SpanUnbounded,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainConfig {
    pub schedule: Vec<f64>,
    pub tol: f64,
    pub reference: usize,
    /// Cap on policy-iteration evaluations per discount factor.
    pub max_policy_iters: usize,
}

impl Default for GainConfig {
    fn default() -> Self {
        Self {
            schedule: default_schedule(),
            tol: 1e-6,
            reference: 0,
            max_policy_iters: 10_000,
        }
    }
}

impl GainConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// `γ_k = 1 − 2^{-k}` for `k = 4..=20`.
pub fn default_schedule() -> Vec<f64> {
    (4..=20).map(|k| 1.0 - 2f64.powi(-k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainSolution {
    pub orientation: Orientation,
    pub alpha: f64,
    /// Normalized so that `min_s u(s) = 0`.
    pub u: Vec<f64>,
    pub residual: f64,
    pub gamma_trace: Vec<f64>,
    pub verdict: Verdict,
    /// Span of `v_γ` at each traced discount.
    pub span_trace: Vec<f64>,
    pub extrapolated: bool,
}

#[derive(Debug, Clone)]
struct Candidate {
    u: Vec<f64>,
    alpha: f64,
    residual: f64,
    extrapolated: bool,
}

fn residual_unchecked(u: &[f64], alpha: f64, orientation: Orientation, inst: &RobustMdpInstance) -> Result<f64> {
    let tu = apply_shifted(u, alpha, 1.0, orientation, inst, GAME_TOL)?;
    Ok(sup_norm_diff(&tu, u))
}

/// `max_s |u(s) − G_s(u, α)|`, with `G_s` the orientation's per-state game
/// at `γ = 1` and gain shift `α`.
pub fn verify_constant_gain(u: &[f64], alpha: f64, orientation: Orientation, inst: &RobustMdpInstance) -> Result<f64> {
    if u.len() != inst.n_states() {
        return Err(Error::DimensionMismatch(format!(
            "u has length {}, instance has {} states",
            u.len(),
            inst.n_states()
        )));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::PreconditionFailed("u has non-finite entries".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::PreconditionFailed(format!("gain {alpha} outside [0,1]")));
    }
    residual_unchecked(u, alpha, orientation, inst)
}

fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::PreconditionFailed("empty discount schedule".into()));
    }
    if schedule.iter().any(|&g| !(g > 0.0 && g < 1.0)) {
        return Err(Error::PreconditionFailed("discount schedule must lie in (0,1)".into()));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::PreconditionFailed("discount schedule must be strictly ascending".into()));
    }
    Ok(())
}

/// Least-squares fit of `span ≈ a + c·x` with `x = 1/(1−γ)`; returns `(c, R²)`.
fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, 0.0);
    }
    let c = sxy / sxx;
    let r2 = if syy == 0.0 { 0.0 } else { sxy * sxy / (sxx * syy) };
    (c, r2)
}

/// Span grows like `c/(1−γ)` across the trailing window.
pub fn span_unbounded(gammas: &[f64], spans: &[f64], tol: f64) -> bool {
    if spans.len() < SPAN_WINDOW {
        return false;
    }
    let k = spans.len() - SPAN_WINDOW;
    let points: Vec<(f64, f64)> = gammas[k..].iter().zip(&spans[k..]).map(|(&g, &s)| (1.0 / (1.0 - g), s)).collect();
    let (c, r2) = linear_fit(&points);
    let grows = spans[spans.len() - 1] >= 2.0 * spans[k];
    r2 > 0.999 && c > 10.0 * tol && grows
}

fn normalize_min_zero(u: &mut [f64]) {
    let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
    u.iter_mut().for_each(|v| *v -= lo);
}

/// Vanishing-discount solve of the orientation's constant-gain equation.
pub fn solve_constant_gain(orientation: Orientation, inst: &RobustMdpInstance, config: &GainConfig) -> Result<GainSolution> {
    check_schedule(&config.schedule)?;
    if !(config.tol > 0.0) {
        return Err(Error::PreconditionFailed("tolerance must be positive".into()));
    }
    if config.reference >= inst.n_states() {
        return Err(Error::DimensionMismatch(format!("reference state {} out of range", config.reference)));
    }
    let tol = config.tol;
    let mut gamma_trace = Vec::new();
    let mut span_trace = Vec::new();
    let mut prev_raw: Option<(f64, Vec<f64>, f64)> = None;
    let mut prev_best: Option<Candidate> = None;
    let mut verdict = Verdict::Inconclusive;
    let mut best: Option<Candidate> = None;

    for &gamma in &config.schedule {
        let sol = solve_discounted_relative(gamma, orientation, inst, config.reference, config.max_policy_iters)?;
        gamma_trace.push(gamma);
        span_trace.push(span(&sol.bias));

        let raw_residual = residual_unchecked(&sol.bias, sol.gain, orientation, inst)?;
        let mut chosen = Candidate {
            u: sol.bias.clone(),
            alpha: sol.gain,
            residual: raw_residual,
            extrapolated: false,
        };
        if let Some((g0, u0, a0)) = &prev_raw {
            // est(h) ≈ est* + c·h with h = 1−γ
            let rho = (1.0 - gamma) / (1.0 - g0);
            let w = 1.0 / (1.0 - rho);
            let u: Vec<f64> = sol.bias.iter().zip(u0).map(|(x, y)| w * (x - rho * y)).collect();
            let alpha = w * (sol.gain - rho * a0);
            if u.iter().all(|v| v.is_finite()) && alpha.is_finite() {
                let residual = residual_unchecked(&u, alpha, orientation, inst)?;
                if residual < chosen.residual {
                    chosen = Candidate { u, alpha, residual, extrapolated: true };
                }
            }
        }
        prev_raw = Some((gamma, sol.bias, sol.gain));

        let settled = prev_best.as_ref().is_some_and(|p| {
            let diff = sup_norm_diff(&p.u, &chosen.u).max((p.alpha - chosen.alpha).abs());
            diff < tol / 2.0
        });
        best = Some(chosen.clone());
        if settled && chosen.residual < tol {
            verdict = Verdict::Converged;
            break;
        }
        if span_unbounded(&gamma_trace, &span_trace, tol) {
            verdict = Verdict::SpanUnbounded;
            break;
        }
        prev_best = Some(chosen);
    }

    let best = best.expect("schedule is non-empty");
    let mut u = best.u;
    normalize_min_zero(&mut u);
    Ok(GainSolution {
        orientation,
        alpha: best.alpha.clamp(0.0, 1.0),
        u,
        residual: best.residual,
        gamma_trace,
        verdict,
        span_trace,
        extrapolated: best.extrapolated,
    })
}

/// Greedy stationary controller policy from a constant-gain solution,
/// re-verified state by state against `u(s) ≤ inf_p E[r − α + u(X₁)] + ε`.
pub fn extract_policy(u: &[f64], alpha: f64, inst: &RobustMdpInstance, epsilon: f64) -> Result<StationaryControllerPolicy> {
    if u.len() != inst.n_states() {
        return Err(Error::DimensionMismatch(format!(
            "u has length {}, instance has {} states",
            u.len(),
            inst.n_states()
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::PreconditionFailed("ε must be positive".into()));
    }
    let na = inst.n_actions();
    let candidates = match inst.controller_set() {
        ControllerSet::FullSimplex => None,
        q => Some(q.candidates(na)),
    };
    let mut rows = Vec::with_capacity(inst.n_states());
    for s in 0..inst.n_states() {
        let (phi, value) = match &candidates {
            Some(list) => {
                let mut best: Option<(usize, f64)> = None;
                for (i, phi) in list.iter().enumerate() {
                    let worst = worst_case_expectation(s, phi, u, inst)?.value;
                    let v = inst.mixed_reward(s, phi) - alpha + worst;
                    if best.is_none_or(|b| v > b.1) {
                        best = Some((i, v));
                    }
                }
                let (i, v) = best.expect("Q is non-empty");
                (list[i].clone(), v)
            }
            None => {
                let g = solve_supinf(s, u, alpha, 1.0, inst, GAME_TOL)?;
                let worst = worst_case_expectation(s, &g.controller_choice, u, inst)?.value;
                let v = inst.mixed_reward(s, &g.controller_choice) - alpha + worst;
                (g.controller_choice, v)
            }
        };
        let shortfall = u[s] - value;
        if shortfall > epsilon {
            return Err(Error::ExtractionFailed { state: s, shortfall });
        }
        rows.push(phi);
    }
    Ok(StationaryControllerPolicy { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub alpha_supinf: f64,
    pub alpha_infsup: f64,
    /// `α_infsup − α_supinf`.
    pub gap: f64,
    pub both_converged: bool,
    /// `|gap| ≤ tol`, meaningful only when both solves converged.
    pub stationary_optimal_hd_s: bool,
    pub supinf: GainSolution,
    pub infsup: GainSolution,
    /// Attached for judging the weakly-communicating-adversary hypothesis;
    /// absent when the structure checks exceed their caps.
    pub structure: Option<StructureReport>,
}

/// Both orientations (solved concurrently) and the gap between them.
pub fn duality_report(inst: &RobustMdpInstance, tol: f64) -> Result<DualityReport> {
    let config = GainConfig::with_tol(tol);
    let (sup, inf) = rayon::join(
        || solve_constant_gain(Orientation::SupInf, inst, &config),
        || solve_constant_gain(Orientation::InfSup, inst, &config),
    );
    let (sup, inf) = (sup?, inf?);
    let gap = inf.alpha - sup.alpha;
    let both_converged = sup.verdict == Verdict::Converged && inf.verdict == Verdict::Converged;
    Ok(DualityReport {
        alpha_supinf: sup.alpha,
        alpha_infsup: inf.alpha,
        gap,
        both_converged,
        stationary_optimal_hd_s: both_converged && gap.abs() <= tol,
        supinf: sup,
        infsup: inf,
        structure: analyze(inst).ok(),
    })
}

/// Relative value iteration `u ← T u − (T u)(s₀)` at `γ = 1`, for
/// comparison only: it carries no convergence guarantee for robust
/// multichain instances and oscillates on periodic ones.
#[cfg(feature = "experimental-rvi")]
pub fn experimental_rvi(orientation: Orientation, inst: &RobustMdpInstance, tol: f64, max_iters: usize) -> Result<(f64, Vec<f64>)> {
    let mut u = vec![0.0; inst.n_states()];
    let mut last = f64::INFINITY;
    for _ in 0..max_iters {
        let tu = apply_shifted(&u, 0.0, 1.0, orientation, inst, GAME_TOL)?;
        let alpha = tu[0];
        let next: Vec<f64> = tu.iter().map(|v| v - alpha).collect();
        last = sup_norm_diff(&next, &u);
        u = next;
        if last < tol {
            normalize_min_zero(&mut u);
            return Ok((alpha, u));
        }
    }
    Err(Error::MaxItersExceeded { iters: max_iters, last_residual: last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{StateAmbiguity, KernelRows};

    fn t1() -> RobustMdpInstance {
        RobustMdpInstance::new(
            vec![vec![0.7]],
            ControllerSet::DiracOnly,
            vec![StateAmbiguity::FiniteKernels(vec![vec![vec![1.0]]])],
        )
        .unwrap()
    }

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

    fn mp_loop() -> RobustMdpInstance {
        let hub = vec![
            vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]],
        ];
        let back = vec![vec![vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]];
        RobustMdpInstance::new(
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0]],
            ControllerSet::DiracOnly,
            vec![
                StateAmbiguity::FiniteKernels(hub),
                StateAmbiguity::FiniteKernels(back.clone()),
                StateAmbiguity::FiniteKernels(back),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_state_gain() {
        let sol = solve_constant_gain(Orientation::SupInf, &t1(), &GainConfig::default()).unwrap();
        assert_eq!(sol.verdict, Verdict::Converged);
        assert!((sol.alpha - 0.7).abs() < 1e-12);
        assert_eq!(sol.u, vec![0.0]);
        assert!(sol.residual < 1e-12);
    }

    #[test]
    fn residual_is_gain_error() {
        assert!(verify_constant_gain(&[0.0], 0.7, Orientation::SupInf, &t1()).unwrap().abs() < 1e-15);
        assert!((verify_constant_gain(&[0.0], 0.6, Orientation::SupInf, &t1()).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn toggle_gain_and_bias() {
        let inst = d2_toggle();
        let sol = solve_constant_gain(Orientation::SupInf, &inst, &GainConfig::default()).unwrap();
        assert_eq!(sol.verdict, Verdict::Converged);
        assert!((sol.alpha - 0.5).abs() < 1e-6);
        assert!((sol.u[1] - sol.u[0] - 1.0).abs() < 1e-6);
        assert!(verify_constant_gain(&sol.u, sol.alpha, Orientation::SupInf, &inst).unwrap() <= 1e-6);
        let pol = extract_policy(&sol.u, sol.alpha, &inst, 1e-6).unwrap();
        assert_eq!(pol.as_deterministic(), Some(vec![0, 1]));
    }

    #[test]
    fn hub_loop_orientations_differ() {
        let inst = mp_loop();
        let rep = duality_report(&inst, 1e-6).unwrap();
        assert!(rep.both_converged);
        assert!(rep.alpha_supinf.abs() < 1e-6);
        assert!((rep.alpha_infsup - 0.5).abs() < 1e-6);
        assert!((rep.gap - 0.5).abs() < 2e-6);
        assert!(!rep.stationary_optimal_hd_s);
        let sup = &rep.supinf;
        let pol = extract_policy(&sup.u, sup.alpha, &inst, 1e-6).unwrap();
        assert_eq!(pol.as_deterministic().unwrap()[0], 0);
        let inf = &rep.infsup;
        for (x, y) in inf.u.iter().zip([0.5, 1.0, 0.0]) {
            assert!((x - y).abs() < 1e-5, "{:?}", inf.u);
        }
    }

    #[test]
    fn absorbing_pair_is_flagged() {
        let inst = RobustMdpInstance::new(
            vec![vec![1.0], vec![0.5]],
            ControllerSet::DiracOnly,
            vec![
                StateAmbiguity::FiniteKernels(vec![vec![vec![1.0, 0.0]]]),
                StateAmbiguity::FiniteKernels(vec![vec![vec![0.0, 1.0]]]),
            ],
        )
        .unwrap();
        let sol = solve_constant_gain(Orientation::SupInf, &inst, &GainConfig::default()).unwrap();
        assert_eq!(sol.verdict, Verdict::SpanUnbounded);
    }

    #[test]
    fn schedule_must_ascend() {
        let config = GainConfig {
            schedule: vec![0.9, 0.5],
            ..GainConfig::default()
        };
        assert!(solve_constant_gain(Orientation::SupInf, &t1(), &config).is_err());
    }

    #[test]
    fn extraction_fails_on_wrong_bias() {
        // u(R) − u(L) = 3 cannot be supported by any action at L
        let err = extract_policy(&[0.0, 3.0], 0.5, &d2_toggle(), 1e-6).unwrap_err();
        assert!(matches!(err, Error::ExtractionFailed { .. }));
    }
}
