//! Discounted robust Bellman operators and their fixed points.
//!
//! `T_γ v(s)` is the per-state game value with target `w = v`, gain shift 0
//! and discount `γ`, in either orientation. Two solvers are provided:
//!
//! * value iteration: synchronous (Jacobi) sweeps from `v = 0`, stopped once
//!   `‖T v − v‖∞ ≤ tol·(1−γ)/(2γ)`;
//! * policy iteration (Hoffman–Karp): the outer player improves greedily, the
//!   inner player's MDP is solved exactly by its own policy iteration. Each
//!   evaluation is done in relative form `α·1 + (I − γP)u = r`, `u(s₀) = 0`,
//!   with `v = α/(1−γ) + u`, which keeps `u` bounded as `γ → 1`.

use rayon::prelude::*;
use serde::Serialize;

use crate::ambiguity::{bundle_expectation, worst_case_expectation};
use crate::error::{Error, Result};
use crate::game::{payoff, solve_state, Orientation};
use crate::linalg::{solve, Matrix};
use crate::model::{mix_rows_into, AdversaryChoice, RobustMdpInstance};

/// Below this many states the sweep runs on the calling thread.
const PAR_THRESHOLD: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscountedMethod {
    ValueIteration,
    PolicyIteration,
}

#[derive(Debug, Clone, Copy)]
pub struct DiscountedConfig {
    pub tol: f64,
    pub max_iters: usize,
    pub method: DiscountedMethod,
}

impl Default for DiscountedConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 1_000_000,
            method: DiscountedMethod::ValueIteration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueFunction {
    pub values: Vec<f64>,
    pub gamma: f64,
    pub orientation: Orientation,
    /// `‖T v − v‖∞` as last measured.
    pub residual: f64,
    pub iterations: usize,
    pub method: DiscountedMethod,
}

/// One synchronous sweep `T_γ v`.
pub fn apply_operator(v: &[f64], gamma: f64, orientation: Orientation, inst: &RobustMdpInstance, tol: f64) -> Result<Vec<f64>> {
    apply_shifted(v, 0.0, gamma, orientation, inst, tol)
}

/// `s ↦ game value with w = v, gain shift α, discount γ`.
pub(crate) fn apply_shifted(v: &[f64], gain_shift: f64, gamma: f64, orientation: Orientation, inst: &RobustMdpInstance, tol: f64) -> Result<Vec<f64>> {
    if v.len() != inst.n_states() {
        return Err(Error::DimensionMismatch(format!(
            "value vector has length {}, instance has {} states",
            v.len(),
            inst.n_states()
        )));
    }
    let one = |s: usize| solve_state(orientation, s, v, gain_shift, gamma, inst, tol).map(|g| g.value);
    if inst.n_states() >= PAR_THRESHOLD {
        (0..inst.n_states()).into_par_iter().map(one).collect()
    } else {
        (0..inst.n_states()).map(one).collect()
    }
}

fn check_discount(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::PreconditionFailed(format!("discount {gamma} outside (0,1)")))
    }
}

pub fn sup_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Fixed point of `T_γ` in the given orientation.
///
/// Value iteration returns `T v_n` for the first `v_n` with
/// `‖T v_n − v_n‖∞` below the stopping threshold, which puts it within
/// `tol/2` of the fixed point.
pub fn solve_discounted(gamma: f64, orientation: Orientation, inst: &RobustMdpInstance, config: &DiscountedConfig) -> Result<ValueFunction> {
    solve_discounted_from(&vec![0.0; inst.n_states()], gamma, orientation, inst, config)
}

/// [`solve_discounted`] with value iteration started at `initial`.
pub fn solve_discounted_from(
    initial: &[f64],
    gamma: f64,
    orientation: Orientation,
    inst: &RobustMdpInstance,
    config: &DiscountedConfig,
) -> Result<ValueFunction> {
    check_discount(gamma)?;
    match config.method {
        DiscountedMethod::ValueIteration => {
            let threshold = config.tol * (1.0 - gamma) / (2.0 * gamma);
            let game_tol = (threshold * 1e-3).max(1e-14);
            let mut v = initial.to_vec();
            let mut residual = f64::INFINITY;
            for it in 1..=config.max_iters {
                let tv = apply_operator(&v, gamma, orientation, inst, game_tol)?;
                residual = sup_norm_diff(&tv, &v);
                v = tv;
                if residual <= threshold {
                    return Ok(ValueFunction {
                        values: v,
                        gamma,
                        orientation,
                        residual,
                        iterations: it,
                        method: DiscountedMethod::ValueIteration,
                    });
                }
            }
            Err(Error::MaxItersExceeded { iters: config.max_iters, last_residual: residual })
        }
        DiscountedMethod::PolicyIteration => {
            let rel = solve_discounted_relative(gamma, orientation, inst, 0, config.max_iters.min(10_000))?;
            let c = rel.gain / (1.0 - gamma);
            Ok(ValueFunction {
                values: rel.bias.iter().map(|u| c + u).collect(),
                gamma,
                orientation,
                residual: rel.residual,
                iterations: rel.iterations,
                method: DiscountedMethod::PolicyIteration,
            })
        }
    }
}

/// Discounted fixed point in relative form: `v_γ = gain/(1−γ)·1 + bias`,
/// `bias(reference) = 0`, so `gain = (1−γ) v_γ(reference)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeSolution {
    pub gamma: f64,
    pub gain: f64,
    pub bias: Vec<f64>,
    pub controller: Vec<Vec<f64>>,
    pub adversary: Vec<AdversaryChoice>,
    /// `‖T_γ(bias) − bias − gain·1‖∞`, equal to `‖T_γ v − v‖∞`.
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `gain·1 + (I − γP)u = r`, `u(reference) = 0`.
pub(crate) fn evaluate_relative(transition: &[Vec<f64>], reward: &[f64], gamma: f64, reference: usize) -> Result<(f64, Vec<f64>)> {
    let n = reward.len();
    let mut a = Matrix::zeros(n);
    for s in 0..n {
        for j in 0..n {
            a[(s, j)] = if j == reference {
                1.0
            } else {
                (if s == j { 1.0 } else { 0.0 }) - gamma * transition[s][j]
            };
        }
    }
    let x = solve(&a, reward)?;
    let gain = x[reference];
    let mut u = x;
    u[reference] = 0.0;
    Ok((gain, u))
}

struct PairState {
    controller: Vec<Vec<f64>>,
    adversary: Vec<AdversaryChoice>,
}

impl PairState {
    fn evaluate(&self, inst: &RobustMdpInstance, gamma: f64, reference: usize) -> Result<(f64, Vec<f64>)> {
        let ns = inst.n_states();
        let mut p = vec![vec![0.0; ns]; ns];
        let mut r = vec![0.0; ns];
        for s in 0..ns {
            let rows = inst.rows(s, &self.adversary[s]);
            mix_rows_into(&self.controller[s], &rows, &mut p[s]);
            r[s] = inst.mixed_reward(s, &self.controller[s]);
        }
        evaluate_relative(&p, &r, gamma, reference)
    }
}

/// Hoffman–Karp policy iteration for the discounted game.
pub fn solve_discounted_relative(gamma: f64, orientation: Orientation, inst: &RobustMdpInstance, reference: usize, max_iters: usize) -> Result<RelativeSolution> {
    check_discount(gamma)?;
    if reference >= inst.n_states() {
        return Err(Error::DimensionMismatch(format!("reference state {reference} out of range")));
    }
    let ns = inst.n_states();
    let game_tol = 1e-12;
    let zero = vec![0.0; ns];
    let mut pair = PairState {
        controller: Vec::with_capacity(ns),
        adversary: Vec::with_capacity(ns),
    };
    for s in 0..ns {
        let g = solve_state(orientation, s, &zero, 0.0, gamma, inst, game_tol)?;
        pair.controller.push(g.controller_choice);
        pair.adversary.push(g.adversary_choice);
    }
    let candidates = inst.controller_set().candidates(inst.n_actions());
    let mut iterations = 0;
    let (mut gain, mut u);
    loop {
        // inner player's MDP
        loop {
            iterations += 1;
            if iterations > max_iters {
                return Err(Error::MaxItersExceeded { iters: max_iters, last_residual: f64::NAN });
            }
            (gain, u) = pair.evaluate(inst, gamma, reference)?;
            let thr = 1e-12 * (1.0 + u.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            let mut changed = false;
            for s in 0..ns {
                match orientation {
                    Orientation::SupInf => {
                        let rows = inst.rows(s, &pair.adversary[s]);
                        let current = bundle_expectation(&pair.controller[s], &rows, &u);
                        let resp = worst_case_expectation(s, &pair.controller[s], &u, inst)?;
                        if resp.value < current - thr {
                            pair.adversary[s] = resp.choice;
                            changed = true;
                        }
                    }
                    Orientation::InfSup => {
                        let rows = inst.rows(s, &pair.adversary[s]).into_owned();
                        let current = payoff(inst, s, &pair.controller[s], &rows, &u, 0.0, gamma);
                        let mut best: Option<(usize, f64)> = None;
                        for (i, phi) in candidates.iter().enumerate() {
                            let v = payoff(inst, s, phi, &rows, &u, 0.0, gamma);
                            if best.is_none_or(|b| v > b.1) {
                                best = Some((i, v));
                            }
                        }
                        let (i, v) = best.expect("Q is non-empty");
                        if v > current + thr {
                            pair.controller[s] = candidates[i].clone();
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        // outer player's improvement
        let thr = 1e-12 * (1.0 + u.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let mut changed = false;
        for s in 0..ns {
            let g = solve_state(orientation, s, &u, 0.0, gamma, inst, game_tol)?;
            let rows = inst.rows(s, &pair.adversary[s]).into_owned();
            let current = payoff(inst, s, &pair.controller[s], &rows, &u, 0.0, gamma);
            let improves = match orientation {
                Orientation::SupInf => g.value > current + thr,
                Orientation::InfSup => g.value < current - thr,
            };
            if improves {
                match orientation {
                    Orientation::SupInf => pair.controller[s] = g.controller_choice,
                    Orientation::InfSup => pair.adversary[s] = g.adversary_choice,
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let tu = apply_operator(&u, gamma, orientation, inst, game_tol)?;
    let residual = tu
        .iter()
        .zip(&u)
        .map(|(t, x)| (t - x - gain).abs())
        .fold(0.0, f64::max);
    Ok(RelativeSolution {
        gamma,
        gain,
        bias: u,
        controller: pair.controller,
        adversary: pair.adversary,
        residual,
        iterations,
    })
}

/// `max_s v(s) − min_s v(s)`.
pub fn span(v: &[f64]) -> f64 {
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpanRecord {
    pub gamma: f64,
    pub span: f64,
    /// `(1−γ)·v_γ(s₀)`
    pub alpha_proxy: f64,
}

/// Span of `v_γ` along an ascending discount grid.
pub fn span_curve(grid: &[f64], orientation: Orientation, inst: &RobustMdpInstance, _tol: f64) -> Result<Vec<SpanRecord>> {
    for &g in grid {
        check_discount(g)?;
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::PreconditionFailed("discount grid must be strictly ascending".into()));
    }
    grid.par_iter()
        .map(|&gamma| {
            let rel = solve_discounted_relative(gamma, orientation, inst, 0, 10_000)?;
            Ok(SpanRecord {
                gamma,
                span: span(&rel.bias),
                alpha_proxy: rel.gain,
            })
        })
        .collect()
}

/// CSV with header `gamma,span,alpha_proxy` and 17 significant digits.
pub fn span_curve_csv(records: &[SpanRecord]) -> String {
    let mut out = String::from("gamma,span,alpha_proxy\n");
    for r in records {
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", r.gamma, r.span, r.alpha_proxy));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ControllerSet, StateAmbiguity};

    fn t1() -> RobustMdpInstance {
        RobustMdpInstance::new(
            vec![vec![0.7]],
            ControllerSet::DiracOnly,
            vec![StateAmbiguity::FiniteKernels(vec![vec![vec![1.0]]])],
        )
        .unwrap()
    }

    fn absorbing_pair() -> RobustMdpInstance {
        RobustMdpInstance::new(
            vec![vec![1.0], vec![0.5]],
            ControllerSet::DiracOnly,
            vec![
                StateAmbiguity::FiniteKernels(vec![vec![vec![1.0, 0.0]]]),
                StateAmbiguity::FiniteKernels(vec![vec![vec![0.0, 1.0]]]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_state_operator() {
        let inst = t1();
        let out = apply_operator(&[0.0], 0.9, Orientation::SupInf, &inst, 1e-9).unwrap();
        assert!((out[0] - 0.7).abs() < 1e-15);
        let out = apply_operator(&[7.0], 0.9, Orientation::SupInf, &inst, 1e-9).unwrap();
        assert!((out[0] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn single_state_fixed_point() {
        let cfg = DiscountedConfig::default();
        let v = solve_discounted(0.9, Orientation::SupInf, &t1(), &cfg).unwrap();
        assert!((v.values[0] - 7.0).abs() < 1e-8);
        assert!(v.residual <= cfg.tol * 0.1 / 1.8);
    }

    #[test]
    fn absorbing_closed_form_both_methods() {
        for method in [DiscountedMethod::ValueIteration, DiscountedMethod::PolicyIteration] {
            let cfg = DiscountedConfig { method, ..Default::default() };
            let v = solve_discounted(0.9, Orientation::SupInf, &absorbing_pair(), &cfg).unwrap();
            assert!((v.values[0] - 10.0).abs() < 1e-6, "{method:?}");
            assert!((v.values[1] - 5.0).abs() < 1e-6, "{method:?}");
            assert!((span(&v.values) - 5.0).abs() < 1e-6);
        }
    }

    #[test]
    fn max_iters_reports_residual() {
        let cfg = DiscountedConfig { max_iters: 3, ..Default::default() };
        match solve_discounted(0.99, Orientation::SupInf, &t1(), &cfg) {
            Err(Error::MaxItersExceeded { iters, last_residual }) => {
                assert_eq!(iters, 3);
                assert!(last_residual > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn span_examples() {
        assert_eq!(span(&[3.0, 3.0, 3.0]), 0.0);
        assert_eq!(span(&[0.0, 1.0]), 1.0);
    }

    #[test]
    fn span_curves_of_closed_forms() {
        let grid = [0.9, 0.99, 0.999];
        let t1 = span_curve(&grid, Orientation::SupInf, &t1(), 1e-8).unwrap();
        for r in &t1 {
            assert!(r.span.abs() < 1e-9);
            assert!((r.alpha_proxy - 0.7).abs() < 1e-9);
        }
        let ap = span_curve(&grid, Orientation::SupInf, &absorbing_pair(), 1e-8).unwrap();
        for (r, expect) in ap.iter().zip([5.0, 50.0, 500.0]) {
            assert!((r.span - expect).abs() < 1e-6 * expect, "{} vs {expect}", r.span);
        }
        let csv = span_curve_csv(&ap);
        assert!(csv.starts_with("gamma,span,alpha_proxy\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn grid_must_ascend() {
        assert!(span_curve(&[0.99, 0.9], Orientation::SupInf, &t1(), 1e-8).is_err());
        assert!(span_curve(&[1.0], Orientation::SupInf, &t1(), 1e-8).is_err());
    }
}
