//! Brute-force ground truth for tiny instances.
//!
//! Every stationary pair `(Δ, p)` (deterministic or listed controller
//! distributions against every product of listed kernels) is evaluated
//! exactly: Cesàro gains through the closed-class decomposition of the
//! induced chain, discounted values through a direct linear solve. None of
//! this shares code with the Bellman solvers beyond the LU routine.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::linalg::{solve, Matrix};
use crate::model::{product_indices, ControllerSet, RobustMdpInstance, StateAmbiguity};

pub const DEFAULT_PAIR_CAP: usize = 500_000;

/// Long-run average reward from each start state of the chain `(P, r)`.
pub fn exact_chain_gain(transition: &[Vec<f64>], reward: &[f64]) -> Result<Vec<f64>> {
    let n = reward.len();
    if transition.len() != n || transition.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("transition matrix must be n×n".into()));
    }
    let graph = Digraph::from_positive(transition);
    let mut gain = vec![f64::NAN; n];
    let mut recurrent = vec![false; n];
    for class in graph.closed_classes() {
        // π (I − P_C) = 0 with the last equation replaced by Σπ = 1
        let m = class.len();
        let mut a = Matrix::zeros(m);
        for (i, &si) in class.iter().enumerate() {
            for (j, &sj) in class.iter().enumerate() {
                // row j of the transposed system
                a[(j, i)] = (if i == j { 1.0 } else { 0.0 }) - transition[si][sj];
            }
        }
        for i in 0..m {
            a[(m - 1, i)] = 1.0;
        }
        let mut b = vec![0.0; m];
        b[m - 1] = 1.0;
        let pi = solve(&a, &b)?;
        let g: f64 = pi.iter().zip(&class).map(|(p, &s)| p * reward[s]).sum();
        for &s in &class {
            gain[s] = g;
            recurrent[s] = true;
        }
    }
    let transient: Vec<usize> = (0..n).filter(|&s| !recurrent[s]).collect();
    if !transient.is_empty() {
        // (I − P_TT) g_T = P_TR g_R
        let m = transient.len();
        let mut a = Matrix::zeros(m);
        let mut b = vec![0.0; m];
        for (i, &si) in transient.iter().enumerate() {
            for (j, &sj) in transient.iter().enumerate() {
                a[(i, j)] = (if i == j { 1.0 } else { 0.0 }) - transition[si][sj];
            }
            b[i] = (0..n).filter(|&t| recurrent[t]).map(|t| transition[si][t] * gain[t]).sum();
        }
        let gt = solve(&a, &b)?;
        for (&s, g) in transient.iter().zip(gt) {
            gain[s] = g;
        }
    }
    Ok(gain)
}

/// `(I − γP)^{-1} r`.
pub fn exact_discounted(transition: &[Vec<f64>], reward: &[f64], gamma: f64) -> Result<Vec<f64>> {
    let n = reward.len();
    let mut a = Matrix::identity(n);
    for s in 0..n {
        for t in 0..n {
            a[(s, t)] -= gamma * transition[s][t];
        }
    }
    solve(&a, reward)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairValues {
    /// Index into `Q`'s enumeration per state (the action for Dirac sets).
    pub controller: Vec<usize>,
    /// Kernel index per state.
    pub adversary: Vec<usize>,
    pub gain: Vec<f64>,
    pub discounted: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub pairs: Vec<PairValues>,
    pub mus: Vec<Vec<f64>>,
    /// `max_Δ min_p μ·g` per requested μ.
    pub supinf_gain: Vec<f64>,
    /// `min_p max_Δ μ·g` per requested μ.
    pub infsup_gain: Vec<f64>,
    /// `max_Δ min_p v(s)` per state.
    pub supinf_discounted: Option<Vec<f64>>,
    /// `min_p max_Δ v(s)` per state.
    pub infsup_discounted: Option<Vec<f64>>,
}

/// Per-state controller choices the oracle enumerates.
pub fn controller_choices(inst: &RobustMdpInstance) -> Result<Vec<Vec<f64>>> {
    match inst.controller_set() {
        ControllerSet::FullSimplex => Err(Error::UnsupportedCombination(
            "the oracle does not enumerate the full simplex of controller distributions".into(),
        )),
        q => Ok(q.candidates(inst.n_actions())),
    }
}

fn kernel_counts(inst: &RobustMdpInstance) -> Result<Vec<usize>> {
    inst.ambiguities()
        .iter()
        .map(|a| match a {
            StateAmbiguity::FiniteKernels(k) => Ok(k.len()),
            StateAmbiguity::SaTvBalls { .. } => Err(Error::UnsupportedCombination(
                "the oracle enumerates finite kernel lists only".into(),
            )),
        })
        .collect()
}

fn chain_of(inst: &RobustMdpInstance, choices: &[Vec<f64>], ctrl: &[usize], adv: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let ns = inst.n_states();
    let mut p = vec![vec![0.0; ns]; ns];
    let mut r = vec![0.0; ns];
    for s in 0..ns {
        let phi = &choices[ctrl[s]];
        let StateAmbiguity::FiniteKernels(kernels) = inst.ambiguity(s) else { unreachable!() };
        let rows = &kernels[adv[s]];
        for (a, w) in phi.iter().enumerate() {
            for t in 0..ns {
                p[s][t] += w * rows[a][t];
            }
        }
        r[s] = inst.mixed_reward(s, phi);
    }
    (p, r)
}

fn count_pairs(inst: &RobustMdpInstance, n_choices: usize, kernels: &[usize], cap: usize) -> Result<()> {
    let n_ctrl = (n_choices as u128).pow(inst.n_states() as u32);
    let n_adv: u128 = kernels.iter().map(|&k| k as u128).product();
    let count = n_ctrl * n_adv;
    if count > cap as u128 {
        return Err(Error::EnumerationCapExceeded { count, cap });
    }
    Ok(())
}

/// Evaluates every stationary pair and aggregates max-min / min-max values.
pub fn exhaustive_values(inst: &RobustMdpInstance, mus: &[Vec<f64>], gamma: Option<f64>) -> Result<OracleResult> {
    exhaustive_values_capped(inst, mus, gamma, DEFAULT_PAIR_CAP)
}

pub fn exhaustive_values_capped(inst: &RobustMdpInstance, mus: &[Vec<f64>], gamma: Option<f64>, cap: usize) -> Result<OracleResult> {
    let ns = inst.n_states();
    for mu in mus {
        if mu.len() != ns {
            return Err(Error::DimensionMismatch("initial distribution length differs from n_states".into()));
        }
    }
    if let Some(g) = gamma {
        if !(g > 0.0 && g < 1.0) {
            return Err(Error::PreconditionFailed(format!("discount {g} outside (0,1)")));
        }
    }
    let choices = controller_choices(inst)?;
    let kernels = kernel_counts(inst)?;
    count_pairs(inst, choices.len(), &kernels, cap)?;
    let ctrl_list: Vec<Vec<usize>> = product_indices(vec![choices.len(); ns]).collect();
    let adv_list: Vec<Vec<usize>> = product_indices(kernels).collect();

    let per_ctrl: Vec<Vec<PairValues>> = ctrl_list
        .par_iter()
        .map(|ctrl| {
            adv_list
                .iter()
                .map(|adv| {
                    let (p, r) = chain_of(inst, &choices, ctrl, adv);
                    let gain = exact_chain_gain(&p, &r)?;
                    let discounted = gamma.map(|g| exact_discounted(&p, &r, g)).transpose()?;
                    Ok(PairValues {
                        controller: ctrl.clone(),
                        adversary: adv.clone(),
                        gain,
                        discounted,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let n_adv = adv_list.len();
    let dot = |mu: &[f64], g: &[f64]| mu.iter().zip(g).map(|(a, b)| a * b).sum::<f64>();
    let supinf_gain = mus
        .iter()
        .map(|mu| {
            per_ctrl
                .iter()
                .map(|row| row.iter().map(|pv| dot(mu, &pv.gain)).fold(f64::INFINITY, f64::min))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let infsup_gain = mus
        .iter()
        .map(|mu| {
            (0..n_adv)
                .map(|j| per_ctrl.iter().map(|row| dot(mu, &row[j].gain)).fold(f64::NEG_INFINITY, f64::max))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let (supinf_discounted, infsup_discounted) = if gamma.is_some() {
        let v = |i: usize, j: usize, s: usize| per_ctrl[i][j].discounted.as_ref().unwrap()[s];
        let sup_inf = (0..ns)
            .map(|s| {
                (0..per_ctrl.len())
                    .map(|i| (0..n_adv).map(|j| v(i, j, s)).fold(f64::INFINITY, f64::min))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let inf_sup = (0..ns)
            .map(|s| {
                (0..n_adv)
                    .map(|j| (0..per_ctrl.len()).map(|i| v(i, j, s)).fold(f64::NEG_INFINITY, f64::max))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        (Some(sup_inf), Some(inf_sup))
    } else {
        (None, None)
    };
    Ok(OracleResult {
        pairs: per_ctrl.into_iter().flatten().collect(),
        mus: mus.to_vec(),
        supinf_gain,
        infsup_gain,
        supinf_discounted,
        infsup_discounted,
    })
}

/// `min_p g^{Δ,p}(s)` per state for a fixed stationary controller policy
/// given as rows `Δ(·|s)`.
pub fn controller_worst_gain(inst: &RobustMdpInstance, controller: &[Vec<f64>]) -> Result<Vec<f64>> {
    let ns = inst.n_states();
    if controller.len() != ns {
        return Err(Error::DimensionMismatch("controller policy length differs from n_states".into()));
    }
    let kernels = kernel_counts(inst)?;
    let count: u128 = kernels.iter().map(|&k| k as u128).product();
    if count > DEFAULT_PAIR_CAP as u128 {
        return Err(Error::EnumerationCapExceeded { count, cap: DEFAULT_PAIR_CAP });
    }
    let choices = controller.to_vec();
    let ctrl: Vec<usize> = (0..ns).collect();
    let mut worst = vec![f64::INFINITY; ns];
    for adv in product_indices(kernels) {
        // choices[s] is Δ(·|s), so index s selects the row for state s
        let (p, r) = chain_of(inst, &choices, &ctrl, &adv);
        let g = exact_chain_gain(&p, &r)?;
        for (w, x) in worst.iter_mut().zip(g) {
            *w = w.min(x);
        }
    }
    Ok(worst)
}

/// Best deterministic policy of a plain MDP `kernel[s][a][t]` with rewards
/// `reward[s][a]`, ranked by total gain `Σ_s g(s)`; ties go to the policy
/// listed first.
pub fn optimal_mdp_policy(kernel: &[Vec<Vec<f64>>], reward: &[Vec<f64>]) -> Result<(Vec<usize>, Vec<f64>)> {
    let ns = kernel.len();
    let na = kernel.first().map_or(0, Vec::len);
    let count = (na as u128).pow(ns as u32);
    if count > DEFAULT_PAIR_CAP as u128 {
        return Err(Error::EnumerationCapExceeded { count, cap: DEFAULT_PAIR_CAP });
    }
    let mut best: Option<(Vec<usize>, Vec<f64>, f64)> = None;
    for pol in product_indices(vec![na; ns]) {
        let p: Vec<Vec<f64>> = (0..ns).map(|s| kernel[s][pol[s]].clone()).collect();
        let r: Vec<f64> = (0..ns).map(|s| reward[s][pol[s]]).collect();
        let g = exact_chain_gain(&p, &r)?;
        let total: f64 = g.iter().sum();
        if best.as_ref().is_none_or(|b| total > b.2 + 1e-12) {
            best = Some((pol, g, total));
        }
    }
    let (pol, g, _) = best.ok_or_else(|| Error::DimensionMismatch("empty MDP".into()))?;
    Ok((pol, g))
}

/// Unit masses on every state followed by the uniform distribution.
pub fn standard_mus(n: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            let mut v = vec![0.0; n];
            v[s] = 1.0;
            v
        })
        .collect();
    out.push(vec![1.0 / n as f64; n]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `(1/N) Σ_{k<N} P^k r`; its bias is O(1/N), hence the loose tolerance below.
    fn power_average(p: &[Vec<f64>], r: &[f64], n_steps: usize) -> Vec<f64> {
        let n = r.len();
        let mut cur = r.to_vec();
        let mut acc = vec![0.0; n];
        for _ in 0..n_steps {
            for (a, c) in acc.iter_mut().zip(&cur) {
                *a += c;
            }
            cur = (0..n).map(|s| (0..n).map(|t| p[s][t] * cur[t]).sum()).collect();
        }
        acc.iter().map(|a| a / n_steps as f64).collect()
    }

    #[test]
    fn identity_chain() {
        let g = exact_chain_gain(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0.3, 0.9]).unwrap();
        assert_eq!(g, vec![0.3, 0.9]);
    }

    #[test]
    fn periodic_swap_chain() {
        let g = exact_chain_gain(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[0.0, 1.0]).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-15 && (g[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn transient_state_weights_classes() {
        // 0 → {1 w.p. 0.25, 2 w.p. 0.75}, 1 and 2 absorbing
        let p = vec![vec![0.0, 0.25, 0.75], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let g = exact_chain_gain(&p, &[0.5, 1.0, 0.2]).unwrap();
        assert!((g[0] - (0.25 + 0.15)).abs() < 1e-14);
    }

    fn random_chain(rng: &mut ChaCha8Rng, n: usize, zero_prob: f64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                let raw: Vec<f64> = (0..n).map(|_| if rng.gen_bool(zero_prob) { 0.0 } else { rng.gen::<f64>() }).collect();
                let s: f64 = raw.iter().sum();
                if s == 0.0 {
                    vec![1.0 / n as f64; n]
                } else {
                    raw.iter().map(|x| x / s).collect()
                }
            })
            .collect()
    }

    #[test]
    fn matches_power_averaging_on_dense_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let p = random_chain(&mut rng, 4, 0.0);
            let r: Vec<f64> = (0..4).map(|_| rng.gen()).collect();
            let exact = exact_chain_gain(&p, &r).unwrap();
            let approx = power_average(&p, &r, 1_000_000);
            for (e, a) in exact.iter().zip(&approx) {
                assert!((e - a).abs() < 1e-6, "{exact:?} vs {approx:?}");
            }
        }
    }

    #[test]
    fn matches_extrapolated_averaging_on_sparse_chains() {
        // slow mixing makes the O(1/N) bias visible, so cancel it with 2·A(2N) − A(N)
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let p = random_chain(&mut rng, 4, 0.4);
            let r: Vec<f64> = (0..4).map(|_| rng.gen()).collect();
            let exact = exact_chain_gain(&p, &r).unwrap();
            let a1 = power_average(&p, &r, 500_000);
            let a2 = power_average(&p, &r, 1_000_000);
            for i in 0..4 {
                let approx = 2.0 * a2[i] - a1[i];
                assert!((exact[i] - approx).abs() < 1e-8, "{exact:?} vs {a1:?} {a2:?}");
            }
        }
    }

    #[test]
    fn full_simplex_is_refused() {
        let inst = RobustMdpInstance::new(
            vec![vec![0.5, 0.5]],
            ControllerSet::FullSimplex,
            vec![StateAmbiguity::FiniteKernels(vec![vec![vec![1.0], vec![1.0]]])],
        )
        .unwrap();
        assert!(matches!(exhaustive_values(&inst, &[vec![1.0]], None), Err(Error::UnsupportedCombination(_))));
    }
}
