#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmdp_core::model::KernelRows;
use rmdp_core::{ControllerSet, RobustMdpInstance, StateAmbiguity};

pub const FIXTURES: [&str; 6] = ["t1_single", "d2_toggle", "mp_loop", "absorbing_pair", "d4_transient", "d6_overlap"];

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> RobustMdpInstance {
    RobustMdpInstance::load(fixture_dir().join(format!("{name}.json"))).unwrap()
}

pub fn expected(name: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(fixture_dir().join(format!("{name}.expected.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Probability row with each entry zeroed with probability `zero_prob`
/// (at least one entry stays positive).
pub fn random_row(rng: &mut ChaCha8Rng, n: usize, zero_prob: f64) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(zero_prob) { 0.0 } else { rng.gen_range(0.05..1.0) })
            .collect();
        let s: f64 = raw.iter().sum();
        if s > 0.0 {
            return raw.iter().map(|x| x / s).collect();
        }
    }
}

pub fn random_rewards(rng: &mut ChaCha8Rng, ns: usize, na: usize) -> Vec<Vec<f64>> {
    (0..ns).map(|_| (0..na).map(|_| rng.gen()).collect()).collect()
}

pub fn random_kernels(rng: &mut ChaCha8Rng, ns: usize, na: usize, nk: usize, zero_prob: f64) -> Vec<StateAmbiguity> {
    (0..ns)
        .map(|_| {
            let kernels: Vec<KernelRows> = (0..nk)
                .map(|_| (0..na).map(|_| random_row(rng, ns, zero_prob)).collect())
                .collect();
            StateAmbiguity::FiniteKernels(kernels)
        })
        .collect()
}

pub fn random_finite(seed: u64, ns: usize, na: usize, nk: usize, q: ControllerSet, zero_prob: f64) -> RobustMdpInstance {
    let mut r = rng(seed);
    let reward = random_rewards(&mut r, ns, na);
    let amb = random_kernels(&mut r, ns, na, nk, zero_prob);
    RobustMdpInstance::new(reward, q, amb).unwrap()
}

/// A listed controller set: every Dirac plus `extra` random distributions.
pub fn random_finite_q(rng: &mut ChaCha8Rng, na: usize, extra: usize) -> ControllerSet {
    let mut list: Vec<Vec<f64>> = (0..na).map(|a| rmdp_core::model::dirac(a, na)).collect();
    for _ in 0..extra {
        list.push(random_row(rng, na, 0.0));
    }
    ControllerSet::Finite(list)
}

pub fn random_tv(seed: u64, ns: usize, na: usize, q: ControllerSet, max_radius: f64, zero_prob: f64) -> RobustMdpInstance {
    let mut r = rng(seed);
    let reward = random_rewards(&mut r, ns, na);
    let amb = (0..ns)
        .map(|_| StateAmbiguity::SaTvBalls {
            nominal: (0..na).map(|_| random_row(&mut r, ns, zero_prob)).collect(),
            radius: (0..na).map(|_| r.gen_range(0.0..max_radius)).collect(),
        })
        .collect();
    RobustMdpInstance::new(reward, q, amb).unwrap()
}

/// Mixed bag used by operator-level properties: finite kernels or TV balls,
/// with Dirac, listed or full-simplex controller sets where supported.
pub fn random_any(seed: u64) -> RobustMdpInstance {
    let mut r = rng(seed ^ 0x5eed);
    let ns = r.gen_range(1..=5);
    let na = r.gen_range(1..=3);
    match r.gen_range(0..5) {
        0 => random_finite(seed, ns, na, r.gen_range(1..=3), ControllerSet::DiracOnly, 0.3),
        1 => random_finite(seed, ns, na, r.gen_range(1..=3), ControllerSet::FullSimplex, 0.3),
        2 => {
            let q = random_finite_q(&mut r, na, 2);
            random_finite(seed, ns, na, r.gen_range(1..=3), q, 0.3)
        }
        3 => random_tv(seed, ns, na, ControllerSet::DiracOnly, 0.5, 0.3),
        _ => {
            let q = random_finite_q(&mut r, na, 1);
            random_tv(seed, ns, na, q, 0.5, 0.3)
        }
    }
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
