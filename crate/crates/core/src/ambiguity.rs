//! Best and worst responses over a single state's ambiguity set `P_s`.
//!
//! For `FiniteKernels` the responses are exact minima/maxima by
//! enumeration. For SA-rectangular total-variation balls the inner problem
//! separates per action and each action's row is solved in closed form:
//! mass `θ` is shifted greedily from the highest-valued coordinates onto the
//! single lowest-valued one (and the reverse for the best case).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AdversaryChoice, KernelRows, RobustMdpInstance, StateAmbiguity};

pub const DEFAULT_VERTEX_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseResult {
    pub value: f64,
    /// The optimizing element of `P_s`.
    pub choice: AdversaryChoice,
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sense {
    Min,
    Max,
}

/// `Σ_a φ(a) Σ_{s'} rows[a][s'] w(s')`.
pub fn bundle_expectation(phi: &[f64], rows: &[Vec<f64>], w: &[f64]) -> f64 {
    phi.iter()
        .zip(rows)
        .filter(|(p, _)| **p != 0.0)
        .map(|(p, row)| p * dot(row, w))
        .sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(s: usize, phi: &[f64], w: &[f64], inst: &RobustMdpInstance) -> Result<()> {
    if s >= inst.n_states() {
        return Err(Error::DimensionMismatch(format!("state {s} out of range")));
    }
    if phi.len() != inst.n_actions() {
        return Err(Error::DimensionMismatch(format!(
            "φ has length {}, expected {}",
            phi.len(),
            inst.n_actions()
        )));
    }
    if w.len() != inst.n_states() {
        return Err(Error::DimensionMismatch(format!(
            "w has length {}, expected {}",
            w.len(),
            inst.n_states()
        )));
    }
    Ok(())
}

/// `inf_{p_s ∈ P_s} Σ_a φ(a) Σ_{s'} p_{s,a}(s') w(s')`.
pub fn worst_case_expectation(s: usize, phi: &[f64], w: &[f64], inst: &RobustMdpInstance) -> Result<ResponseResult> {
    check_dims(s, phi, w, inst)?;
    Ok(respond(inst.ambiguity(s), phi, w, Sense::Min))
}

/// `sup_{p_s ∈ P_s} Σ_a φ(a) Σ_{s'} p_{s,a}(s') w(s')`.
pub fn best_case_expectation(s: usize, phi: &[f64], w: &[f64], inst: &RobustMdpInstance) -> Result<ResponseResult> {
    check_dims(s, phi, w, inst)?;
    Ok(respond(inst.ambiguity(s), phi, w, Sense::Max))
}

fn respond(amb: &StateAmbiguity, phi: &[f64], w: &[f64], sense: Sense) -> ResponseResult {
    match amb {
        StateAmbiguity::FiniteKernels(kernels) => {
            let mut best = (0, bundle_expectation(phi, &kernels[0], w));
            for (k, rows) in kernels.iter().enumerate().skip(1) {
                let v = bundle_expectation(phi, rows, w);
                let better = match sense {
                    Sense::Min => v < best.1,
                    Sense::Max => v > best.1,
                };
                if better {
                    best = (k, v);
                }
            }
            ResponseResult {
                value: best.1,
                choice: AdversaryChoice::Kernel(best.0),
                exact: true,
            }
        }
        StateAmbiguity::SaTvBalls { nominal, radius } => {
            let rows: KernelRows = nominal
                .iter()
                .zip(radius)
                .map(|(p0, &theta)| match sense {
                    Sense::Min => tv_worst_row(p0, theta, w),
                    Sense::Max => tv_best_row(p0, theta, w),
                })
                .collect();
            let value = bundle_expectation(phi, &rows, w);
            ResponseResult {
                value,
                choice: AdversaryChoice::Rows(rows),
                exact: true,
            }
        }
    }
}

/// Minimizer of `q·w` over `{q ∈ simplex : ½‖q − p0‖₁ ≤ θ}`.
pub fn tv_worst_row(p0: &[f64], theta: f64, w: &[f64]) -> Vec<f64> {
    shift_mass(p0, theta, w, Sense::Min)
}

/// Maximizer of `q·w` over the same ball.
pub fn tv_best_row(p0: &[f64], theta: f64, w: &[f64]) -> Vec<f64> {
    shift_mass(p0, theta, w, Sense::Max)
}

fn shift_mass(p0: &[f64], theta: f64, w: &[f64], sense: Sense) -> Vec<f64> {
    let mut q = p0.to_vec();
    if theta <= 0.0 {
        return q;
    }
    // receiver: extreme w, lowest index on ties
    let mut recv = 0;
    for i in 1..w.len() {
        let better = match sense {
            Sense::Min => w[i] < w[recv],
            Sense::Max => w[i] > w[recv],
        };
        if better {
            recv = i;
        }
    }
    let mut donors: Vec<usize> = (0..w.len()).filter(|&i| i != recv && w[i] != w[recv]).collect();
    // stable sort keeps lowest index first among equal w
    match sense {
        Sense::Min => donors.sort_by(|&a, &b| w[b].total_cmp(&w[a])),
        Sense::Max => donors.sort_by(|&a, &b| w[a].total_cmp(&w[b])),
    }
    let mut budget = theta;
    for i in donors {
        if budget <= 0.0 {
            break;
        }
        let m = budget.min(q[i]);
        q[i] -= m;
        q[recv] += m;
        budget -= m;
    }
    q
}

/// Support-extremal elements of `P_s`, used where only positivity patterns
/// matter. For TV balls: the nominal bundle, then for each action and each
/// ordered pair `(i, j)` the nominal bundle with that action's row moving
/// `min(θ, p0(i))` from `i` to `j`.
pub fn extreme_kernels(s: usize, inst: &RobustMdpInstance) -> Result<Vec<AdversaryChoice>> {
    extreme_kernels_capped(s, inst, DEFAULT_VERTEX_CAP)
}

pub fn extreme_kernels_capped(s: usize, inst: &RobustMdpInstance, cap: usize) -> Result<Vec<AdversaryChoice>> {
    if s >= inst.n_states() {
        return Err(Error::DimensionMismatch(format!("state {s} out of range")));
    }
    match inst.ambiguity(s) {
        StateAmbiguity::FiniteKernels(kernels) => {
            if kernels.len() > cap {
                return Err(Error::ExplosionGuard { state: s, count: kernels.len(), cap });
            }
            Ok((0..kernels.len()).map(AdversaryChoice::Kernel).collect())
        }
        StateAmbiguity::SaTvBalls { nominal, radius } => {
            let ns = inst.n_states();
            let mut out = vec![AdversaryChoice::Rows(nominal.clone())];
            for (a, (p0, &theta)) in nominal.iter().zip(radius).enumerate() {
                if theta <= 0.0 {
                    continue;
                }
                let mut seen: Vec<Vec<f64>> = vec![p0.clone()];
                for i in 0..ns {
                    if p0[i] <= 0.0 {
                        continue;
                    }
                    for j in 0..ns {
                        if j == i {
                            continue;
                        }
                        let m = theta.min(p0[i]);
                        let mut row = p0.clone();
                        row[i] -= m;
                        row[j] += m;
                        if seen.contains(&row) {
                            continue;
                        }
                        seen.push(row.clone());
                        let mut bundle = nominal.clone();
                        bundle[a] = row;
                        out.push(AdversaryChoice::Rows(bundle));
                        if out.len() > cap {
                            return Err(Error::ExplosionGuard { state: s, count: out.len(), cap });
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

/// True when no feasible TV row can zero out a coordinate the nominal row
/// charges, i.e. `θ < min positive nominal mass` for every action with
/// `θ > 0`. Under this margin the extreme kernels capture every support
/// pattern a stationary adversary can realize up to additions.
pub fn tv_margin_ok(s: usize, inst: &RobustMdpInstance) -> bool {
    match inst.ambiguity(s) {
        StateAmbiguity::FiniteKernels(_) => true,
        StateAmbiguity::SaTvBalls { nominal, radius } => nominal.iter().zip(radius).all(|(p0, &theta)| {
            theta <= 0.0 || p0.iter().filter(|&&v| v > 0.0).all(|&v| theta < v)
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ControllerSet;

    fn tv_instance(p0: Vec<f64>, theta: f64) -> RobustMdpInstance {
        let n = p0.len();
        let amb = (0..n)
            .map(|_| StateAmbiguity::SaTvBalls { nominal: vec![p0.clone()], radius: vec![theta] })
            .collect();
        RobustMdpInstance::new(vec![vec![0.0]; n], ControllerSet::DiracOnly, amb).unwrap()
    }

    /// Brute force over a 1e-3 grid of rows in the ball.
    fn grid_extreme(p0: &[f64], theta: f64, w: &[f64]) -> (f64, f64) {
        let steps = 1000;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let n = p0.len();
        let mut visit = |q: &[f64]| {
            if 0.5 * q.iter().zip(p0).map(|(a, b)| (a - b).abs()).sum::<f64>() <= theta + 1e-9 {
                let v = dot(q, w);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        };
        match n {
            2 => {
                for i in 0..=steps {
                    let x = i as f64 / steps as f64;
                    visit(&[x, 1.0 - x]);
                }
            }
            3 => {
                for i in 0..=steps {
                    for j in 0..=(steps - i) {
                        let x = i as f64 / steps as f64;
                        let y = j as f64 / steps as f64;
                        visit(&[x, y, (1.0 - x - y).max(0.0)]);
                    }
                }
            }
            _ => unreachable!(),
        }
        (lo, hi)
    }

    #[test]
    fn singleton_set_is_plain_expectation() {
        let inst = RobustMdpInstance::new(
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            ControllerSet::DiracOnly,
            vec![
                StateAmbiguity::FiniteKernels(vec![vec![vec![0.25, 0.75], vec![1.0, 0.0]]]),
                StateAmbiguity::FiniteKernels(vec![vec![vec![1.0, 0.0], vec![1.0, 0.0]]]),
            ],
        )
        .unwrap();
        let w = [2.0, 4.0];
        let phi = [0.5, 0.5];
        let expected = 0.5 * (0.25 * 2.0 + 0.75 * 4.0) + 0.5 * 2.0;
        let lo = worst_case_expectation(0, &phi, &w, &inst).unwrap();
        let hi = best_case_expectation(0, &phi, &w, &inst).unwrap();
        assert_eq!(lo.value, expected);
        assert_eq!(hi.value, expected);
        assert!(lo.exact);
    }

    #[test]
    fn tv_worst_and_best_match_grid() {
        let inst = tv_instance(vec![0.5, 0.5], 0.2);
        let w = [0.0, 1.0];
        let lo = worst_case_expectation(0, &[1.0], &w, &inst).unwrap();
        let hi = best_case_expectation(0, &[1.0], &w, &inst).unwrap();
        assert_eq!(lo.choice, AdversaryChoice::Rows(vec![vec![0.7, 0.3]]));
        assert!((lo.value - 0.3).abs() < 1e-12);
        assert!((hi.value - 0.7).abs() < 1e-12);
        let (glo, ghi) = grid_extreme(&[0.5, 0.5], 0.2, &w);
        assert!((lo.value - glo).abs() < 1e-9);
        assert!((hi.value - ghi).abs() < 1e-9);
    }

    #[test]
    fn tv_three_state_matches_grid() {
        let p0 = [0.2, 0.5, 0.3];
        for &theta in &[0.05, 0.25, 0.6] {
            for w in [[0.3, 1.0, -0.4], [2.0, 0.0, 1.0], [1.0, 1.0, 0.0]] {
                let inst = tv_instance(p0.to_vec(), theta);
                let lo = worst_case_expectation(0, &[1.0], &w, &inst).unwrap().value;
                let hi = best_case_expectation(0, &[1.0], &w, &inst).unwrap().value;
                let (glo, ghi) = grid_extreme(&p0, theta, &w);
                // grid minimum is never below the exact one
                assert!(lo <= glo + 1e-12 && glo - lo < 5e-3, "θ={theta} w={w:?}: {lo} vs {glo}");
                assert!(hi >= ghi - 1e-12 && hi - ghi < 5e-3, "θ={theta} w={w:?}: {hi} vs {ghi}");
            }
        }
    }

    #[test]
    fn zero_radius_is_nominal() {
        let inst = tv_instance(vec![0.3, 0.7], 0.0);
        let hi = best_case_expectation(0, &[1.0], &[1.0, 5.0], &inst).unwrap();
        assert!((hi.value - (0.3 + 3.5)).abs() < 1e-12);
        let ext = extreme_kernels(0, &inst).unwrap();
        assert_eq!(ext, vec![AdversaryChoice::Rows(vec![vec![0.3, 0.7]])]);
    }

    #[test]
    fn extreme_kernels_of_finite_set() {
        let inst = RobustMdpInstance::new(
            vec![vec![0.0]],
            ControllerSet::DiracOnly,
            vec![StateAmbiguity::FiniteKernels(vec![vec![vec![1.0]], vec![vec![1.0]]])],
        )
        .unwrap();
        assert_eq!(
            extreme_kernels(0, &inst).unwrap(),
            vec![AdversaryChoice::Kernel(0), AdversaryChoice::Kernel(1)]
        );
    }

    #[test]
    fn extreme_patterns_of_point_mass_ball() {
        let inst = tv_instance(vec![1.0, 0.0], 0.2);
        let ext = extreme_kernels(0, &inst).unwrap();
        let rows: Vec<Vec<f64>> = ext
            .iter()
            .map(|c| match c {
                AdversaryChoice::Rows(r) => r[0].clone(),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(rows, vec![vec![1.0, 0.0], vec![0.8, 0.2]]);
    }

    #[test]
    fn vertex_cap_is_enforced() {
        let inst = tv_instance(vec![0.5, 0.5], 0.1);
        assert!(matches!(
            extreme_kernels_capped(0, &inst, 1),
            Err(Error::ExplosionGuard { .. })
        ));
    }

    #[test]
    fn margin_condition() {
        assert!(tv_margin_ok(0, &tv_instance(vec![0.5, 0.5], 0.2)));
        assert!(!tv_margin_ok(0, &tv_instance(vec![0.9, 0.1], 0.2)));
        assert!(tv_margin_ok(0, &tv_instance(vec![1.0, 0.0], 0.2)));
    }

    /// Every transition some feasible TV row can charge is charged by an
    /// extreme kernel, and vice versa.
    #[test]
    fn extreme_patterns_are_complete() {
        for (p0, theta) in [
            (vec![1.0, 0.0, 0.0], 0.2),
            (vec![0.6, 0.4, 0.0], 0.5),
            (vec![0.2, 0.3, 0.5], 0.1),
            (vec![0.0, 0.0, 1.0], 0.0),
        ] {
            let inst = tv_instance(p0.clone(), theta);
            let ext = extreme_kernels(0, &inst).unwrap();
            let mut from_ext = [false; 3];
            for c in &ext {
                if let AdversaryChoice::Rows(r) = c {
                    for j in 0..3 {
                        from_ext[j] |= r[0][j] > 0.0;
                    }
                }
            }
            let mut from_grid = [false; 3];
            let steps = 200;
            for i in 0..=steps {
                for j in 0..=(steps - i) {
                    let q = [i as f64 / 200.0, j as f64 / 200.0, 1.0 - (i + j) as f64 / 200.0];
                    let d = 0.5 * q.iter().zip(&p0).map(|(a, b)| (a - b).abs()).sum::<f64>();
                    if d <= theta + 1e-12 {
                        for k in 0..3 {
                            from_grid[k] |= q[k] > 1e-12;
                        }
                    }
                }
            }
            assert_eq!(from_ext, from_grid, "p0={p0:?} θ={theta}");
        }
    }
}
