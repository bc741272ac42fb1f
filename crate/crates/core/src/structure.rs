//! Communication structure of the controller/adversary game.
//!
//! Every "for all Δ" or "for all p" check is reduced to finitely many
//! positivity patterns. A controller distribution only matters through its
//! support, so Δ ranges over per-state support patterns of `Q`. The
//! adversary ranges over products of per-state extreme kernels.
//!
//! Over TV balls whose radius reaches a nominal mass the extreme kernels no
//! longer cover every realizable support pattern; results that depend on the
//! enumeration are then reported as inconclusive.

use serde::Serialize;

use crate::ambiguity::{extreme_kernels_capped, tv_margin_ok, DEFAULT_VERTEX_CAP};
use crate::error::{Error, Result};
use crate::graph::{trim_path, Digraph};
use crate::linalg::{solve, Matrix};
use crate::model::{
    mix_rows_into, product_indices, AdversaryChoice, ControllerSet, RobustMdpInstance, StationaryAdversaryPolicy,
    StationaryControllerPolicy,
};

pub const DEFAULT_POLICY_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Cap on enumerated policies per side.
    pub policies: usize,
    /// Cap on extreme kernels per state.
    pub vertices: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            policies: DEFAULT_POLICY_CAP,
            vertices: DEFAULT_VERTEX_CAP,
        }
    }
}

/// A policy named by its positivity pattern.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "side", rename_all = "snake_case")]
pub enum PolicyRef {
    /// Supported actions per state.
    Controller { supports: Vec<Vec<usize>> },
    Adversary { choices: Vec<AdversaryChoice> },
    Pair {
        supports: Vec<Vec<usize>>,
        choices: Vec<AdversaryChoice>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub check: String,
    pub policy: PolicyRef,
    /// `(s, s')` with `s'` unreachable from `s`, where that is the failure.
    pub pair: Option<(usize, usize)>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyClass {
    pub policy: PolicyRef,
    pub class: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Communication {
    Communicating,
    WeaklyCommunicating { classes: Vec<PolicyClass> },
    No { witness: Witness },
    Inconclusive { reason: String },
}

impl Communication {
    pub fn is_communicating(&self) -> bool {
        matches!(self, Communication::Communicating)
    }

    /// Communicating or weakly communicating.
    pub fn is_weakly_communicating(&self) -> bool {
        matches!(self, Communication::Communicating | Communication::WeaklyCommunicating { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Communication::Communicating => "communicating",
            Communication::WeaklyCommunicating { .. } => "weakly_communicating",
            Communication::No { .. } => "no",
            Communication::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// A yes/no check; `value` is `None` when the enumeration cannot decide.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub value: Option<bool>,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Controller,
    Adversary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub controller_comm: Communication,
    pub adversary_comm: Communication,
    pub all_unichain: Check,
    pub occcc_controller: Check,
    pub occcc_adversary: Check,
    /// False when some TV ball fails the margin condition.
    pub exhaustive: bool,
}

impl StructureReport {
    /// Counterexamples of every failed check.
    pub fn witnesses(&self) -> Vec<&Witness> {
        let mut out = Vec::new();
        for c in [&self.controller_comm, &self.adversary_comm] {
            if let Communication::No { witness } = c {
                out.push(witness);
            }
        }
        for c in [&self.all_unichain, &self.occcc_controller, &self.occcc_adversary] {
            if let Some(w) = &c.witness {
                out.push(w);
            }
        }
        out
    }
}

pub fn analyze(inst: &RobustMdpInstance) -> Result<StructureReport> {
    analyze_capped(inst, Caps::default())
}

pub fn analyze_capped(inst: &RobustMdpInstance, caps: Caps) -> Result<StructureReport> {
    let t = Tables::build(inst, caps)?;
    Ok(StructureReport {
        controller_comm: t.controller_communication()?,
        adversary_comm: t.adversary_communication()?,
        all_unichain: t.unichain()?,
        occcc_controller: t.occcc(Side::Controller)?,
        occcc_adversary: t.occcc(Side::Adversary)?,
        exhaustive: t.margin_ok,
    })
}

pub fn check_controller_communication(inst: &RobustMdpInstance) -> Result<Communication> {
    Tables::build(inst, Caps::default())?.controller_communication()
}

pub fn check_adversary_communication(inst: &RobustMdpInstance) -> Result<Communication> {
    Tables::build(inst, Caps::default())?.adversary_communication()
}

pub fn check_unichain(inst: &RobustMdpInstance) -> Result<Check> {
    Tables::build(inst, Caps::default())?.unichain()
}

pub fn check_occcc(inst: &RobustMdpInstance, side: Side) -> Result<Check> {
    Tables::build(inst, Caps::default())?.occcc(side)
}

/// Support patterns of `Q` used by the communication and overlap checks.
pub fn support_patterns(q: &ControllerSet, n_actions: usize) -> Vec<Vec<usize>> {
    match q {
        ControllerSet::DiracOnly => (0..n_actions).map(|a| vec![a]).collect(),
        ControllerSet::FullSimplex => (1u64..(1 << n_actions))
            .map(|mask| (0..n_actions).filter(|a| mask >> a & 1 == 1).collect())
            .collect(),
        ControllerSet::Finite(list) => distinct_supports(list),
    }
}

/// Patterns of deterministic policies (the distinct supports for a finite `Q`).
fn unichain_patterns(q: &ControllerSet, n_actions: usize) -> Vec<Vec<usize>> {
    match q {
        ControllerSet::Finite(list) => distinct_supports(list),
        _ => (0..n_actions).map(|a| vec![a]).collect(),
    }
}

fn distinct_supports(list: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for phi in list {
        let s: Vec<usize> = phi.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(a, _)| a).collect();
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

fn check_cap(radices: &[usize], cap: usize) -> Result<()> {
    let count = radices.iter().fold(1u128, |acc, &r| acc.saturating_mul(r as u128));
    if count > cap as u128 {
        return Err(Error::EnumerationCapExceeded { count, cap });
    }
    Ok(())
}

struct Tables {
    ns: usize,
    patterns: Vec<Vec<usize>>,
    uni_patterns: Vec<Vec<usize>>,
    options: Vec<Vec<AdversaryChoice>>,
    /// `[s][option][action]` successor sets.
    succ: Vec<Vec<Vec<Vec<bool>>>>,
    margin_ok: bool,
    cap: usize,
}

impl Tables {
    fn build(inst: &RobustMdpInstance, caps: Caps) -> Result<Self> {
        let ns = inst.n_states();
        let na = inst.n_actions();
        if matches!(inst.controller_set(), ControllerSet::FullSimplex) {
            check_cap(&[(1usize << na.min(63)) - 1], caps.policies)?;
        }
        let mut options = Vec::with_capacity(ns);
        let mut succ = Vec::with_capacity(ns);
        for s in 0..ns {
            let opts = extreme_kernels_capped(s, inst, caps.vertices)?;
            succ.push(
                opts.iter()
                    .map(|o| inst.rows(s, o).iter().map(|row| row.iter().map(|&p| p > 0.0).collect()).collect())
                    .collect(),
            );
            options.push(opts);
        }
        Ok(Self {
            ns,
            patterns: support_patterns(inst.controller_set(), na),
            uni_patterns: unichain_patterns(inst.controller_set(), na),
            options,
            succ,
            margin_ok: (0..ns).all(|s| tv_margin_ok(s, inst)),
            cap: caps.policies,
        })
    }

    fn add_edges(&self, g: &mut Digraph, s: usize, pattern: &[usize], option: usize) {
        for &a in pattern {
            for (t, &e) in self.succ[s][option][a].iter().enumerate() {
                if e {
                    g.add_edge(s, t);
                }
            }
        }
    }

    fn graph(&self, patterns: &[Vec<usize>], pat: &[usize], opt: &[usize]) -> Digraph {
        let mut g = Digraph::empty(self.ns);
        for s in 0..self.ns {
            self.add_edges(&mut g, s, &patterns[pat[s]], opt[s]);
        }
        g
    }

    /// Union over every adversary option, controller pattern fixed.
    fn union_over_options(&self, pat: &[usize]) -> Digraph {
        let mut g = Digraph::empty(self.ns);
        for s in 0..self.ns {
            for o in 0..self.options[s].len() {
                self.add_edges(&mut g, s, &self.patterns[pat[s]], o);
            }
        }
        g
    }

    /// Union over every controller pattern, adversary option fixed.
    fn union_over_patterns(&self, opt: &[usize]) -> Digraph {
        let mut g = Digraph::empty(self.ns);
        for s in 0..self.ns {
            for p in &self.patterns {
                self.add_edges(&mut g, s, p, opt[s]);
            }
        }
        g
    }

    fn pattern_radices(&self) -> Vec<usize> {
        vec![self.patterns.len(); self.ns]
    }

    fn option_radices(&self) -> Vec<usize> {
        self.options.iter().map(Vec::len).collect()
    }

    fn supports(&self, patterns: &[Vec<usize>], pat: &[usize]) -> Vec<Vec<usize>> {
        pat.iter().map(|&i| patterns[i].clone()).collect()
    }

    fn choices(&self, opt: &[usize]) -> Vec<AdversaryChoice> {
        opt.iter().enumerate().map(|(s, &o)| self.options[s][o].clone()).collect()
    }

    /// Pair `(s, t)` inside `members` with `t` unreachable from `s` in `g`.
    fn split_pair(g: &Digraph, members: &[usize]) -> Option<(usize, usize)> {
        members.iter().find_map(|&s| {
            let r = g.reachable_from(s);
            members.iter().find(|&&t| !r[t]).map(|&t| (s, t))
        })
    }

    fn controller_communication(&self) -> Result<Communication> {
        check_cap(&self.pattern_radices(), self.cap)?;
        let mut all_comm = true;
        let mut classes = Vec::new();
        for pat in product_indices(self.pattern_radices()) {
            let g = self.union_over_options(&pat);
            if g.is_strongly_connected() {
                continue;
            }
            all_comm = false;
            check_cap(&self.option_radices(), self.cap)?;
            let mut recurrent = vec![false; self.ns];
            for opt in product_indices(self.option_radices()) {
                for class in self.graph(&self.patterns, &pat, &opt).closed_classes() {
                    class.iter().for_each(|&s| recurrent[s] = true);
                }
            }
            let members: Vec<usize> = (0..self.ns).filter(|&s| recurrent[s]).collect();
            let policy = PolicyRef::Controller {
                supports: self.supports(&self.patterns, &pat),
            };
            if let Some(pair) = Self::split_pair(&g, &members) {
                return Ok(Communication::No {
                    witness: Witness {
                        check: "controller_communication".into(),
                        policy,
                        pair: Some(pair),
                        note: "recurrent states of this policy do not form one communicating class".into(),
                    },
                });
            }
            classes.push(PolicyClass { policy, class: members });
        }
        if all_comm {
            Ok(Communication::Communicating)
        } else if !self.margin_ok {
            Ok(Communication::Inconclusive {
                reason: "a TV radius reaches a nominal mass, so recurrent classes may be missed".into(),
            })
        } else {
            Ok(Communication::WeaklyCommunicating { classes })
        }
    }

    fn adversary_communication(&self) -> Result<Communication> {
        check_cap(&self.option_radices(), self.cap)?;
        let mut all_comm = true;
        let mut classes = Vec::new();
        for opt in product_indices(self.option_radices()) {
            let g = self.union_over_patterns(&opt);
            if g.is_strongly_connected() {
                continue;
            }
            all_comm = false;
            check_cap(&self.pattern_radices(), self.cap)?;
            let mut recurrent = vec![false; self.ns];
            for pat in product_indices(self.pattern_radices()) {
                for class in self.graph(&self.patterns, &pat, &opt).closed_classes() {
                    class.iter().for_each(|&s| recurrent[s] = true);
                }
            }
            let members: Vec<usize> = (0..self.ns).filter(|&s| recurrent[s]).collect();
            let policy = PolicyRef::Adversary { choices: self.choices(&opt) };
            if let Some(pair) = Self::split_pair(&g, &members) {
                return Ok(Communication::No {
                    witness: Witness {
                        check: "adversary_communication".into(),
                        policy,
                        pair: Some(pair),
                        note: "recurrent states of this policy do not form one communicating class".into(),
                    },
                });
            }
            classes.push(PolicyClass { policy, class: members });
        }
        if !self.margin_ok {
            Ok(Communication::Inconclusive {
                reason: "a TV radius reaches a nominal mass, so adversary policies may be missed".into(),
            })
        } else if all_comm {
            Ok(Communication::Communicating)
        } else {
            Ok(Communication::WeaklyCommunicating { classes })
        }
    }

    fn unichain(&self) -> Result<Check> {
        let pr = vec![self.uni_patterns.len(); self.ns];
        check_cap(&pr, self.cap)?;
        check_cap(&self.option_radices(), self.cap)?;
        for pat in product_indices(pr) {
            for opt in product_indices(self.option_radices()) {
                let closed = self.graph(&self.uni_patterns, &pat, &opt).closed_classes();
                if closed.len() != 1 {
                    return Ok(Check {
                        value: Some(false),
                        witness: Some(Witness {
                            check: "unichain".into(),
                            policy: PolicyRef::Pair {
                                supports: self.supports(&self.uni_patterns, &pat),
                                choices: self.choices(&opt),
                            },
                            pair: None,
                            note: format!("{} closed classes: {:?}", closed.len(), closed),
                        }),
                    });
                }
            }
        }
        Ok(Check {
            value: self.margin_ok.then_some(true),
            witness: None,
        })
    }

    fn occcc(&self, side: Side) -> Result<Check> {
        check_cap(&self.pattern_radices(), self.cap)?;
        check_cap(&self.option_radices(), self.cap)?;
        let (outer, inner) = match side {
            Side::Controller => (self.pattern_radices(), self.option_radices()),
            Side::Adversary => (self.option_radices(), self.pattern_radices()),
        };
        for fixed in product_indices(outer) {
            let mut classes: Vec<Vec<usize>> = Vec::new();
            for other in product_indices(inner.clone()) {
                let (pat, opt) = match side {
                    Side::Controller => (&fixed, &other),
                    Side::Adversary => (&other, &fixed),
                };
                for c in self.graph(&self.patterns, pat, opt).closed_classes() {
                    if !classes.contains(&c) {
                        classes.push(c);
                    }
                }
            }
            if !overlap_connected(&classes) {
                if side == Side::Controller && !self.margin_ok {
                    return Ok(Check { value: None, witness: None });
                }
                let policy = match side {
                    Side::Controller => PolicyRef::Controller {
                        supports: self.supports(&self.patterns, &fixed),
                    },
                    Side::Adversary => PolicyRef::Adversary { choices: self.choices(&fixed) },
                };
                return Ok(Check {
                    value: Some(false),
                    witness: Some(Witness {
                        check: format!("occcc_{}", if side == Side::Controller { "controller" } else { "adversary" }),
                        policy,
                        pair: None,
                        note: format!("closed classes {classes:?} are not overlap-connected"),
                    }),
                });
            }
        }
        Ok(Check {
            value: self.margin_ok.then_some(true),
            witness: None,
        })
    }
}

/// Whether the sets form one component under the "share a state" relation.
pub fn overlap_connected(classes: &[Vec<usize>]) -> bool {
    if classes.len() <= 1 {
        return true;
    }
    let mut parent: Vec<usize> = (0..classes.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..classes.len() {
        for j in i + 1..classes.len() {
            if classes[i].iter().any(|s| classes[j].contains(s)) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let root = find(&mut parent, 0);
    (1..classes.len()).all(|i| find(&mut parent, i) == root)
}

/// Which side's policy a certificate was built for.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "side", rename_all = "snake_case")]
pub enum BuiltPolicy {
    Adversary { policy: StationaryAdversaryPolicy },
    Controller { policy: StationaryControllerPolicy },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingCertificate {
    pub target: usize,
    pub policy: BuiltPolicy,
    /// Probability of the recorded path to the target, per start state.
    pub path_probability: Vec<f64>,
    /// Length of the recorded path, per start state.
    pub path_length: Vec<usize>,
    /// `min_w P_w(τ_y ≤ |S|)` lower bound from the recorded paths.
    pub delta_prime: f64,
    /// `|S|/δ′`.
    pub bound: f64,
    /// The worst-case `(δ·|S|^{-N})^{|S|}` value for the same paths.
    pub formula_delta: f64,
    /// Filled in by a Monte Carlo cross-check.
    pub empirical_mean: Option<f64>,
}

/// Shared construction: each state picks one of its `options`, whose row is
/// `rows[s][o]`. Paths are found in the union graph by BFS to the target,
/// trimmed, cut at the first already-assigned state, and every state on the
/// prefix takes the option maximizing its edge probability.
fn build_to_target(rows: &[Vec<Vec<f64>>], target: usize) -> Result<(Vec<usize>, Vec<f64>, Vec<usize>, f64)> {
    let ns = rows.len();
    if target >= ns {
        return Err(Error::DimensionMismatch(format!("target {target} out of range")));
    }
    let mut g = Digraph::empty(ns);
    for (s, opts) in rows.iter().enumerate() {
        for r in opts {
            for (t, &p) in r.iter().enumerate() {
                if p > 0.0 {
                    g.add_edge(s, t);
                }
            }
        }
    }
    for w in 0..ns {
        if !g.reachable_from(w)[target] {
            return Err(Error::TargetUnreachable { from: w, target });
        }
    }
    let mut assigned: Vec<Option<usize>> = vec![None; ns];
    let mut prob = vec![0.0; ns];
    let mut length = vec![0usize; ns];
    assigned[target] = Some(0);
    prob[target] = 1.0;
    let mut formula = f64::INFINITY;
    let n_pow = |n: usize| (ns as f64).powi(-(n as i32));
    while let Some(s0) = (0..ns).find(|&s| assigned[s].is_none()) {
        let path = trim_path(&g.shortest_path(s0, target).expect("reachability checked"));
        let cut = path.iter().position(|&s| assigned[s].is_some()).expect("target is assigned");
        let mut picks = Vec::with_capacity(cut);
        let mut full_prob = 1.0;
        for i in 0..path.len() - 1 {
            let (a, b) = (path[i], path[i + 1]);
            let mut best = 0;
            for (o, r) in rows[a].iter().enumerate() {
                if r[b] > rows[a][best][b] {
                    best = o;
                }
            }
            full_prob *= rows[a][best][b];
            if i < cut {
                picks.push((a, best, rows[a][best][b]));
            }
        }
        formula = formula.min((full_prob * n_pow(path.len() - 1)).powi(ns as i32));
        let (mut p, mut l) = (prob[path[cut]], length[path[cut]]);
        for &(a, o, edge) in picks.iter().rev() {
            p *= edge;
            l += 1;
            assigned[a] = Some(o);
            prob[a] = p;
            length[a] = l;
        }
    }
    if formula == f64::INFINITY {
        formula = 1.0;
    }
    let choice = assigned.into_iter().map(|o| o.expect("every state assigned")).collect();
    Ok((choice, prob, length, formula))
}

fn certificate(target: usize, policy: BuiltPolicy, prob: Vec<f64>, length: Vec<usize>, formula: f64) -> HittingCertificate {
    let delta_prime = prob.iter().copied().fold(1.0, f64::min);
    HittingCertificate {
        target,
        policy,
        bound: prob.len() as f64 / delta_prime,
        path_probability: prob,
        path_length: length,
        delta_prime,
        formula_delta: formula,
        empirical_mean: None,
    }
}

/// Adversary policy `q` under which every state reaches `y` within `|S|`
/// steps with probability at least `δ′`, the controller playing `Δ`.
pub fn build_adversary_to_target(inst: &RobustMdpInstance, delta: &StationaryControllerPolicy, y: usize) -> Result<HittingCertificate> {
    delta.validate(inst)?;
    let ns = inst.n_states();
    let mut options = Vec::with_capacity(ns);
    let mut rows = Vec::with_capacity(ns);
    for s in 0..ns {
        let opts = extreme_kernels_capped(s, inst, DEFAULT_VERTEX_CAP)?;
        rows.push(
            opts.iter()
                .map(|o| {
                    let mut out = vec![0.0; ns];
                    mix_rows_into(&delta.rows[s], &inst.rows(s, o), &mut out);
                    out
                })
                .collect(),
        );
        options.push(opts);
    }
    let (choice, prob, length, formula) = build_to_target(&rows, y)?;
    let policy = StationaryAdversaryPolicy {
        choices: choice.iter().enumerate().map(|(s, &o)| options[s][o].clone()).collect(),
    };
    Ok(certificate(y, BuiltPolicy::Adversary { policy }, prob, length, formula))
}

/// Controller policy `η` under which every state reaches `y` within `|S|`
/// steps with probability at least `δ′`, the adversary playing `p`.
pub fn build_controller_to_target(inst: &RobustMdpInstance, p: &StationaryAdversaryPolicy, y: usize) -> Result<HittingCertificate> {
    p.validate(inst)?;
    let ns = inst.n_states();
    let candidates = inst.controller_set().candidates(inst.n_actions());
    let rows: Vec<Vec<Vec<f64>>> = (0..ns)
        .map(|s| {
            let k = inst.rows(s, &p.choices[s]);
            candidates
                .iter()
                .map(|phi| {
                    let mut out = vec![0.0; ns];
                    mix_rows_into(phi, &k, &mut out);
                    out
                })
                .collect()
        })
        .collect();
    let (choice, prob, length, formula) = build_to_target(&rows, y)?;
    let policy = StationaryControllerPolicy {
        rows: choice.iter().map(|&i| candidates[i].clone()).collect(),
    };
    Ok(certificate(y, BuiltPolicy::Controller { policy }, prob, length, formula))
}

/// Expected number of steps to enter `c` from each state outside it, in
/// increasing state order.
pub fn expected_exit_time(
    inst: &RobustMdpInstance,
    delta: &StationaryControllerPolicy,
    p: &StationaryAdversaryPolicy,
    c: &[usize],
) -> Result<Vec<f64>> {
    if c.is_empty() {
        return Err(Error::PreconditionFailed("target set is empty".into()));
    }
    let ns = inst.n_states();
    if c.iter().any(|&s| s >= ns) {
        return Err(Error::DimensionMismatch("target set names a state out of range".into()));
    }
    let chain = crate::model::induced_chain(inst, delta, p)?;
    let outside: Vec<usize> = (0..ns).filter(|s| !c.contains(s)).collect();
    let g = Digraph::from_positive(&chain.transition);
    if let Some(&w) = outside.iter().find(|&&w| {
        let r = g.reachable_from(w);
        !c.iter().any(|&t| r[t])
    }) {
        return Err(Error::SingularSystem(format!("state {w} cannot reach the target set")));
    }
    let m = outside.len();
    let mut a = Matrix::zeros(m);
    for (i, &si) in outside.iter().enumerate() {
        for (j, &sj) in outside.iter().enumerate() {
            a[(i, j)] = (if i == j { 1.0 } else { 0.0 }) - chain.transition[si][sj];
        }
    }
    solve(&a, &vec![1.0; m])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{KernelRows, StateAmbiguity};

    fn finite(reward: Vec<Vec<f64>>, kernels: Vec<Vec<KernelRows>>) -> RobustMdpInstance {
        RobustMdpInstance::new(
            reward,
            ControllerSet::DiracOnly,
            kernels.into_iter().map(StateAmbiguity::FiniteKernels).collect(),
        )
        .unwrap()
    }

    fn absorbing_pair() -> RobustMdpInstance {
        finite(vec![vec![1.0], vec![0.5]], vec![vec![vec![vec![1.0, 0.0]]], vec![vec![vec![0.0, 1.0]]]])
    }

    #[test]
    fn support_patterns_per_controller_set() {
        assert_eq!(support_patterns(&ControllerSet::DiracOnly, 2), vec![vec![0], vec![1]]);
        assert_eq!(support_patterns(&ControllerSet::FullSimplex, 2), vec![vec![0], vec![1], vec![0, 1]]);
        let q = ControllerSet::Finite(vec![vec![0.5, 0.5], vec![0.25, 0.75], vec![1.0, 0.0]]);
        assert_eq!(support_patterns(&q, 2), vec![vec![0, 1], vec![0]]);
    }

    #[test]
    fn absorbing_pair_fails_everything() {
        let rep = analyze(&absorbing_pair()).unwrap();
        assert!(matches!(rep.controller_comm, Communication::No { .. }));
        assert!(matches!(rep.adversary_comm, Communication::No { .. }));
        assert_eq!(rep.all_unichain.value, Some(false));
        assert_eq!(rep.occcc_controller.value, Some(false));
        assert_eq!(rep.occcc_adversary.value, Some(false));
        assert_eq!(rep.witnesses().len(), 5);
    }

    #[test]
    fn single_state_passes_everything() {
        let inst = finite(vec![vec![0.7]], vec![vec![vec![vec![1.0]]]]);
        let rep = analyze(&inst).unwrap();
        assert!(rep.controller_comm.is_communicating());
        assert_eq!(rep.all_unichain.value, Some(true));
        assert_eq!(rep.occcc_controller.value, Some(true));
        let cert = build_adversary_to_target(&inst, &StationaryControllerPolicy::deterministic(&[0], 1), 0).unwrap();
        assert_eq!(cert.delta_prime, 1.0);
    }

    #[test]
    fn overlap_union_find() {
        assert!(overlap_connected(&[vec![0, 1], vec![1, 2]]));
        assert!(overlap_connected(&[vec![0, 1], vec![2, 3], vec![1, 2]]));
        assert!(!overlap_connected(&[vec![0], vec![1]]));
    }

    #[test]
    fn exit_times() {
        let inst = finite(
            vec![vec![0.0], vec![0.0], vec![0.0]],
            vec![
                vec![vec![vec![0.0, 0.0, 1.0]]],
                vec![vec![vec![0.0, 0.5, 0.5]]],
                vec![vec![vec![0.0, 0.0, 1.0]]],
            ],
        );
        let d = StationaryControllerPolicy::deterministic(&[0, 0, 0], 1);
        let p = StationaryAdversaryPolicy::nominal(&inst);
        let x = expected_exit_time(&inst, &d, &p, &[2]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);

        let ap = absorbing_pair();
        let d = StationaryControllerPolicy::deterministic(&[0, 0], 1);
        let err = expected_exit_time(&ap, &d, &StationaryAdversaryPolicy::nominal(&ap), &[0]).unwrap_err();
        assert!(matches!(err, Error::SingularSystem(_)));
    }

    #[test]
    fn unreachable_target_names_state() {
        let ap = absorbing_pair();
        let d = StationaryControllerPolicy::deterministic(&[0, 0], 1);
        assert!(matches!(
            build_adversary_to_target(&ap, &d, 1),
            Err(Error::TargetUnreachable { from: 0, target: 1 })
        ));
    }
}
