//! Per-state zero-sum games behind the robust Bellman operators.
//!
//! Payoff of a controller distribution `φ ∈ Q` against an adversary choice
//! `p_s ∈ P_s`:
//!
//! ```text
//! E_{φ,p_s}[ r(s,A_0) − α + γ·w(X_1) ]
//! ```
//!
//! The adversary only ever mixes over the stored set implicitly: for a fixed
//! `φ` the payoff is linear in `p_s`, so its infimum over the convex hull is
//! attained at a stored element. Ties go to the lowest index on both sides.

use serde::{Deserialize, Serialize};

use crate::ambiguity::{bundle_expectation, tv_worst_row, worst_case_expectation};
use crate::error::{Error, Result};
use crate::lp::solve_matrix_game;
use crate::model::{AdversaryChoice, ControllerSet, KernelRows, RobustMdpInstance, StateAmbiguity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `sup_φ inf_p`: the controller commits first.
    SupInf,
    /// `inf_p sup_φ`: the adversary commits first.
    InfSup,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::SupInf => "sup_inf",
            Orientation::InfSup => "inf_sup",
        }
    }
}

impl std::fmt::Display for Orientation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Orientation {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sup_inf" | "sup-inf" | "supinf" => Ok(Orientation::SupInf),
            "inf_sup" | "inf-sup" | "infsup" => Ok(Orientation::InfSup),
            other => Err(format!("unknown orientation '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateGameSolution {
    pub value: f64,
    pub controller_choice: Vec<f64>,
    pub adversary_choice: AdversaryChoice,
    pub orientation: Orientation,
    pub gap_bound: f64,
}

/// Payoff of `(φ, rows)` at state `s`.
pub fn payoff(inst: &RobustMdpInstance, s: usize, phi: &[f64], rows: &[Vec<f64>], w: &[f64], gain_shift: f64, gamma: f64) -> f64 {
    inst.mixed_reward(s, phi) - gain_shift + gamma * bundle_expectation(phi, rows, w)
}

fn check_args(s: usize, w: &[f64], gamma: f64, tol: f64, inst: &RobustMdpInstance) -> Result<()> {
    if s >= inst.n_states() || w.len() != inst.n_states() {
        return Err(Error::DimensionMismatch(format!(
            "state {s} / w of length {} for an instance with {} states",
            w.len(),
            inst.n_states()
        )));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::PreconditionFailed(format!("discount {gamma} outside (0,1]")));
    }
    if !(tol > 0.0) {
        return Err(Error::PreconditionFailed("tolerance must be positive".into()));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::PreconditionFailed("w has non-finite entries".into()));
    }
    Ok(())
}

fn unsupported() -> Error {
    Error::UnsupportedCombination("full-simplex controller set with total-variation ambiguity".into())
}

/// `sup_{φ∈Q} inf_{p_s∈P_s} E_{φ,p_s}[r(s,A_0) − α + γ·w(X_1)]`.
pub fn solve_supinf(s: usize, w: &[f64], gain_shift: f64, gamma: f64, inst: &RobustMdpInstance, tol: f64) -> Result<StateGameSolution> {
    check_args(s, w, gamma, tol, inst)?;
    let na = inst.n_actions();
    match (inst.controller_set(), inst.ambiguity(s)) {
        (ControllerSet::FullSimplex, StateAmbiguity::SaTvBalls { .. }) => Err(unsupported()),
        (ControllerSet::FullSimplex, StateAmbiguity::FiniteKernels(kernels)) => {
            let matrix: Vec<Vec<f64>> = (0..na)
                .map(|a| {
                    kernels
                        .iter()
                        .map(|rows| inst.reward(s, a) - gain_shift + gamma * crate::ambiguity::dot(&rows[a], w))
                        .collect()
                })
                .collect();
            let game = solve_matrix_game(&matrix)?;
            if game.gap > tol {
                return Err(Error::ToleranceNotMet { achieved: game.gap, requested: tol });
            }
            let phi = game.row_strategy;
            let (k, _) = argmin_kernel(kernels, |rows| payoff(inst, s, &phi, rows, w, gain_shift, gamma));
            Ok(StateGameSolution {
                value: game.value,
                controller_choice: phi,
                adversary_choice: AdversaryChoice::Kernel(k),
                orientation: Orientation::SupInf,
                gap_bound: game.gap,
            })
        }
        (q, _) => {
            let mut best: Option<(Vec<f64>, AdversaryChoice, f64)> = None;
            for phi in q.candidates(na) {
                let inner = worst_case_expectation(s, &phi, w, inst)?;
                let v = inst.mixed_reward(s, &phi) - gain_shift + gamma * inner.value;
                if best.as_ref().is_none_or(|b| v > b.2) {
                    best = Some((phi, inner.choice, v));
                }
            }
            let (phi, choice, value) = best.expect("Q is non-empty");
            Ok(StateGameSolution {
                value,
                controller_choice: phi,
                adversary_choice: choice,
                orientation: Orientation::SupInf,
                gap_bound: 0.0,
            })
        }
    }
}

/// `inf_{p_s∈P_s} sup_{φ∈Q} E_{φ,p_s}[r(s,A_0) − α + γ·w(X_1)]`.
pub fn solve_infsup(s: usize, w: &[f64], gain_shift: f64, gamma: f64, inst: &RobustMdpInstance, tol: f64) -> Result<StateGameSolution> {
    check_args(s, w, gamma, tol, inst)?;
    let na = inst.n_actions();
    let candidates = inst.controller_set().candidates(na);
    let best_response = |rows: &[Vec<f64>]| -> (Vec<f64>, f64) {
        let mut best: Option<(usize, f64)> = None;
        for (i, phi) in candidates.iter().enumerate() {
            let v = payoff(inst, s, phi, rows, w, gain_shift, gamma);
            if best.is_none_or(|b| v > b.1) {
                best = Some((i, v));
            }
        }
        let (i, v) = best.expect("Q is non-empty");
        (candidates[i].clone(), v)
    };
    match (inst.controller_set(), inst.ambiguity(s)) {
        (ControllerSet::FullSimplex, StateAmbiguity::SaTvBalls { .. }) => Err(unsupported()),
        (_, StateAmbiguity::FiniteKernels(kernels)) => {
            let mut best: Option<(usize, Vec<f64>, f64)> = None;
            for (k, rows) in kernels.iter().enumerate() {
                let (phi, v) = best_response(rows);
                if best.as_ref().is_none_or(|b| v < b.2) {
                    best = Some((k, phi, v));
                }
            }
            let (k, phi, value) = best.expect("kernel list is non-empty");
            Ok(StateGameSolution {
                value,
                controller_choice: phi,
                adversary_choice: AdversaryChoice::Kernel(k),
                orientation: Orientation::InfSup,
                gap_bound: 0.0,
            })
        }
        (_, StateAmbiguity::SaTvBalls { nominal, radius }) => {
            // each action's worst row is independent of φ, so this bundle is
            // simultaneously worst against every controller choice
            let rows: KernelRows = nominal
                .iter()
                .zip(radius)
                .map(|(p0, &theta)| tv_worst_row(p0, theta, w))
                .collect();
            let (phi, value) = best_response(&rows);
            Ok(StateGameSolution {
                value,
                controller_choice: phi,
                adversary_choice: AdversaryChoice::Rows(rows),
                orientation: Orientation::InfSup,
                gap_bound: 0.0,
            })
        }
    }
}

pub fn solve_state(orientation: Orientation, s: usize, w: &[f64], gain_shift: f64, gamma: f64, inst: &RobustMdpInstance, tol: f64) -> Result<StateGameSolution> {
    match orientation {
        Orientation::SupInf => solve_supinf(s, w, gain_shift, gamma, inst, tol),
        Orientation::InfSup => solve_infsup(s, w, gain_shift, gamma, inst, tol),
    }
}

fn argmin_kernel(kernels: &[KernelRows], f: impl Fn(&[Vec<f64>]) -> f64) -> (usize, f64) {
    let mut best = (0, f(&kernels[0]));
    for (k, rows) in kernels.iter().enumerate().skip(1) {
        let v = f(rows);
        if v < best.1 {
            best = (k, v);
        }
    }
    best
}

/// Re-evaluates a solution's own choices; used to check reproducibility.
pub fn evaluate_choices(sol: &StateGameSolution, s: usize, w: &[f64], gain_shift: f64, gamma: f64, inst: &RobustMdpInstance) -> f64 {
    let rows = inst.rows(s, &sol.adversary_choice);
    payoff(inst, s, &sol.controller_choice, &rows, w, gain_shift, gamma)
}
