//! Robust MDP instances: rewards, the controller decision set `Q` and the
//! S-rectangular ambiguity set `P = ×_s P_s`, plus stationary policies for
//! both players and the on-disk JSON format.
//!
//! Everything is addressed by index. Instances are validated on
//! construction and immutable afterwards.

use std::borrow::Cow;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on row sums and ball constraints.
pub const PROB_TOL: f64 = 1e-12;

/// Transition row per action: `rows[a][s']`.
pub type KernelRows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub enum ControllerSet {
    /// `Q = {δ_a : a ∈ A}`.
    DiracOnly,
    /// `Q = P(A)`.
    FullSimplex,
    /// Explicit list of distributions over `A`.
    Finite(Vec<Vec<f64>>),
}

impl ControllerSet {
    /// Whether every Dirac measure belongs to `Q`.
    pub fn contains_diracs(&self, n_actions: usize) -> bool {
        match self {
            ControllerSet::DiracOnly | ControllerSet::FullSimplex => true,
            ControllerSet::Finite(list) => (0..n_actions).all(|a| {
                list.iter().any(|phi| {
                    phi.iter()
                        .enumerate()
                        .all(|(b, &v)| if a == b { v == 1.0 } else { v == 0.0 })
                })
            }),
        }
    }

    /// Enumerable elements of `Q`: the Diracs for `DiracOnly`/`FullSimplex`
    /// (the vertices of the simplex), the list itself for `Finite`.
    pub fn candidates(&self, n_actions: usize) -> Vec<Vec<f64>> {
        match self {
            ControllerSet::DiracOnly | ControllerSet::FullSimplex => {
                (0..n_actions).map(|a| dirac(a, n_actions)).collect()
            }
            ControllerSet::Finite(list) => list.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateAmbiguity {
    /// Finite list of kernels `A → P(S)`; the adversary picks one whole
    /// bundle, which may couple actions.
    FiniteKernels(Vec<KernelRows>),
    /// SA-rectangular product of total-variation balls around a nominal row.
    SaTvBalls { nominal: KernelRows, radius: Vec<f64> },
}

impl StateAmbiguity {
    pub fn n_choices_hint(&self) -> Option<usize> {
        match self {
            StateAmbiguity::FiniteKernels(k) => Some(k.len()),
            StateAmbiguity::SaTvBalls { .. } => None,
        }
    }

    /// The bundle returned for `AdversaryChoice::Kernel(0)`: first kernel or
    /// the nominal rows.
    pub fn reference_rows(&self) -> &KernelRows {
        match self {
            StateAmbiguity::FiniteKernels(k) => &k[0],
            StateAmbiguity::SaTvBalls { nominal, .. } => nominal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Labels {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustMdpInstance {
    n_states: usize,
    n_actions: usize,
    reward: Vec<Vec<f64>>,
    controller_set: ControllerSet,
    ambiguity: Vec<StateAmbiguity>,
    labels: Option<Labels>,
}

impl RobustMdpInstance {
    pub fn new(
        reward: Vec<Vec<f64>>,
        controller_set: ControllerSet,
        ambiguity: Vec<StateAmbiguity>,
    ) -> Result<Self> {
        let n_states = reward.len();
        let n_actions = reward.first().map_or(0, Vec::len);
        let inst = Self {
            n_states,
            n_actions,
            reward,
            controller_set,
            ambiguity,
            labels: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_labels(mut self, labels: Labels) -> Result<Self> {
        self.labels = Some(labels);
        self.validate()?;
        Ok(self)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s][a]
    }

    pub fn rewards(&self) -> &[Vec<f64>] {
        &self.reward
    }

    pub fn controller_set(&self) -> &ControllerSet {
        &self.controller_set
    }

    pub fn ambiguity(&self, s: usize) -> &StateAmbiguity {
        &self.ambiguity[s]
    }

    pub fn ambiguities(&self) -> &[StateAmbiguity] {
        &self.ambiguity
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn has_tv_balls(&self) -> bool {
        self.ambiguity
            .iter()
            .any(|a| matches!(a, StateAmbiguity::SaTvBalls { .. }))
    }

    /// Expected one-step reward `Σ_a φ(a) r(s,a)`.
    pub fn mixed_reward(&self, s: usize, phi: &[f64]) -> f64 {
        phi.iter().zip(&self.reward[s]).map(|(p, r)| p * r).sum()
    }

    fn validate(&self) -> Result<()> {
        let (ns, na) = (self.n_states, self.n_actions);
        if ns == 0 {
            return Err(Error::validation("n_states", &[], "must be positive"));
        }
        if na == 0 {
            return Err(Error::validation("n_actions", &[], "must be positive"));
        }
        for (s, row) in self.reward.iter().enumerate() {
            if row.len() != na {
                return Err(Error::validation(
                    "reward",
                    &[s],
                    format!("expected {na} actions, got {}", row.len()),
                ));
            }
            for (a, &r) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&r) {
                    return Err(Error::validation("reward", &[s, a], format!("{r} outside [0,1]")));
                }
            }
        }
        if let ControllerSet::Finite(list) = &self.controller_set {
            if list.is_empty() {
                return Err(Error::validation("controller_set.distributions", &[], "empty"));
            }
            for (i, phi) in list.iter().enumerate() {
                check_prob_row(phi, na, "controller_set.distributions", &[i])?;
            }
        }
        if self.ambiguity.len() != ns {
            return Err(Error::validation(
                "ambiguity",
                &[],
                format!("expected {ns} entries, got {}", self.ambiguity.len()),
            ));
        }
        for (s, amb) in self.ambiguity.iter().enumerate() {
            match amb {
                StateAmbiguity::FiniteKernels(kernels) => {
                    if kernels.is_empty() {
                        return Err(Error::validation("ambiguity.kernels", &[s], "empty kernel list"));
                    }
                    for (k, rows) in kernels.iter().enumerate() {
                        check_bundle(rows, na, ns, "ambiguity.kernels", &[s, k])?;
                    }
                }
                StateAmbiguity::SaTvBalls { nominal, radius } => {
                    check_bundle(nominal, na, ns, "ambiguity.nominal", &[s])?;
                    if radius.len() != na {
                        return Err(Error::validation(
                            "ambiguity.radius",
                            &[s],
                            format!("expected {na} radii, got {}", radius.len()),
                        ));
                    }
                    for (a, &t) in radius.iter().enumerate() {
                        if !(0.0..=1.0).contains(&t) {
                            return Err(Error::validation("ambiguity.radius", &[s, a], format!("{t} outside [0,1]")));
                        }
                    }
                }
            }
        }
        if let Some(labels) = &self.labels {
            if labels.states.as_ref().is_some_and(|v| v.len() != ns) {
                return Err(Error::validation("labels.states", &[], "length differs from n_states"));
            }
            if labels.actions.as_ref().is_some_and(|v| v.len() != na) {
                return Err(Error::validation("labels.actions", &[], "length differs from n_actions"));
            }
        }
        Ok(())
    }

    /// Per-action rows selected by an adversary choice at state `s`.
    pub fn rows<'a>(&'a self, s: usize, choice: &'a AdversaryChoice) -> Cow<'a, KernelRows> {
        match (choice, &self.ambiguity[s]) {
            (AdversaryChoice::Kernel(k), StateAmbiguity::FiniteKernels(list)) => Cow::Borrowed(&list[*k]),
            (AdversaryChoice::Kernel(_), StateAmbiguity::SaTvBalls { nominal, .. }) => Cow::Borrowed(nominal),
            (AdversaryChoice::Rows(rows), _) => Cow::Borrowed(rows),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.try_into()
    }

    /// Canonical serialization: pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let file = InstanceFile::from(self);
        let mut s = serde_json::to_string_pretty(&file).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

fn check_prob_row(row: &[f64], len: usize, field: &str, index: &[usize]) -> Result<()> {
    if row.len() != len {
        return Err(Error::validation(field, index, format!("expected length {len}, got {}", row.len())));
    }
    if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::validation(field, index, format!("entry {v} is negative or non-finite")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::validation(field, index, format!("row sums to {sum}, not 1")));
    }
    Ok(())
}

fn check_bundle(rows: &KernelRows, na: usize, ns: usize, field: &str, index: &[usize]) -> Result<()> {
    if rows.len() != na {
        return Err(Error::validation(field, index, format!("expected {na} action rows, got {}", rows.len())));
    }
    for (a, row) in rows.iter().enumerate() {
        let mut idx = index.to_vec();
        idx.push(a);
        check_prob_row(row, ns, field, &idx)?;
    }
    Ok(())
}

pub fn dirac(a: usize, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[a] = 1.0;
    v
}

/// Total-variation distance `½ Σ |p − q|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

// ---------------------------------------------------------------------------
// Policies

/// `Δ(a|s)`, one distribution over actions per state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryControllerPolicy {
    pub rows: Vec<Vec<f64>>,
}

impl StationaryControllerPolicy {
    pub fn deterministic(actions: &[usize], n_actions: usize) -> Self {
        Self {
            rows: actions.iter().map(|&a| dirac(a, n_actions)).collect(),
        }
    }

    /// The action index per state when every row is a Dirac.
    pub fn as_deterministic(&self) -> Option<Vec<usize>> {
        self.rows
            .iter()
            .map(|row| {
                let a = row.iter().position(|&v| v == 1.0)?;
                row.iter().enumerate().all(|(b, &v)| b == a || v == 0.0).then_some(a)
            })
            .collect()
    }

    pub fn validate(&self, inst: &RobustMdpInstance) -> Result<()> {
        if self.rows.len() != inst.n_states() {
            return Err(Error::DimensionMismatch(format!(
                "controller policy has {} rows, instance has {} states",
                self.rows.len(),
                inst.n_states()
            )));
        }
        for (s, row) in self.rows.iter().enumerate() {
            check_prob_row(row, inst.n_actions(), "controller_policy", &[s])?;
            let member = match inst.controller_set() {
                ControllerSet::FullSimplex => true,
                ControllerSet::DiracOnly => row.iter().filter(|&&v| v == 1.0).count() == 1,
                ControllerSet::Finite(list) => list.iter().any(|phi| phi == row),
            };
            if !member {
                return Err(Error::validation("controller_policy", &[s], "row is not an element of Q"));
            }
        }
        Ok(())
    }
}

/// The adversary's pick at one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryChoice {
    /// Index into `FiniteKernels`; `0` means the nominal rows for TV balls.
    Kernel(usize),
    /// Explicit per-action rows (TV-ball states only).
    Rows(KernelRows),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryAdversaryPolicy {
    pub choices: Vec<AdversaryChoice>,
}

impl StationaryAdversaryPolicy {
    pub fn from_kernels(indices: &[usize]) -> Self {
        Self {
            choices: indices.iter().map(|&k| AdversaryChoice::Kernel(k)).collect(),
        }
    }

    /// First kernel (or the nominal rows) at every state.
    pub fn nominal(inst: &RobustMdpInstance) -> Self {
        Self::from_kernels(&vec![0; inst.n_states()])
    }

    pub fn validate(&self, inst: &RobustMdpInstance) -> Result<()> {
        if self.choices.len() != inst.n_states() {
            return Err(Error::DimensionMismatch(format!(
                "adversary policy has {} entries, instance has {} states",
                self.choices.len(),
                inst.n_states()
            )));
        }
        for (s, choice) in self.choices.iter().enumerate() {
            match (choice, inst.ambiguity(s)) {
                (AdversaryChoice::Kernel(k), StateAmbiguity::FiniteKernels(list)) => {
                    if *k >= list.len() {
                        return Err(Error::validation("adversary_policy", &[s], format!("kernel {k} out of range")));
                    }
                }
                (AdversaryChoice::Kernel(k), StateAmbiguity::SaTvBalls { .. }) => {
                    if *k != 0 {
                        return Err(Error::validation("adversary_policy", &[s], "TV-ball state accepts only kernel 0 (nominal)"));
                    }
                }
                (AdversaryChoice::Rows(rows), StateAmbiguity::SaTvBalls { nominal, radius }) => {
                    check_bundle(rows, inst.n_actions(), inst.n_states(), "adversary_policy", &[s])?;
                    for (a, row) in rows.iter().enumerate() {
                        let d = tv_distance(row, &nominal[a]);
                        if d > radius[a] + PROB_TOL {
                            return Err(Error::validation(
                                "adversary_policy",
                                &[s, a],
                                format!("row at TV distance {d} exceeds radius {}", radius[a]),
                            ));
                        }
                    }
                }
                (AdversaryChoice::Rows(rows), StateAmbiguity::FiniteKernels(list)) => {
                    if !list.iter().any(|k| k == rows) {
                        return Err(Error::validation("adversary_policy", &[s], "rows are not one of the listed kernels"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Markov chain induced by a stationary pair.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedChain {
    /// `p_Δ(s'|s) = Σ_a p(s'|s,a) Δ(a|s)`.
    pub transition: Vec<Vec<f64>>,
    /// `r_Δ(s) = Σ_a Δ(a|s) r(s,a)`.
    pub reward: Vec<f64>,
}

pub fn induced_chain(
    inst: &RobustMdpInstance,
    controller: &StationaryControllerPolicy,
    adversary: &StationaryAdversaryPolicy,
) -> Result<InducedChain> {
    controller.validate(inst)?;
    adversary.validate(inst)?;
    let ns = inst.n_states();
    let mut transition = vec![vec![0.0; ns]; ns];
    let mut reward = vec![0.0; ns];
    for s in 0..ns {
        let rows = inst.rows(s, &adversary.choices[s]);
        mix_rows_into(&controller.rows[s], &rows, &mut transition[s]);
        reward[s] = inst.mixed_reward(s, &controller.rows[s]);
    }
    Ok(InducedChain { transition, reward })
}

/// `out = Σ_a φ(a) rows[a]`.
pub(crate) fn mix_rows_into(phi: &[f64], rows: &[Vec<f64>], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (w, row) in phi.iter().zip(rows) {
        if *w == 0.0 {
            continue;
        }
        for (o, p) in out.iter_mut().zip(row) {
            *o += w * p;
        }
    }
}

/// Every deterministic stationary controller policy, in lexicographic order
/// (state 0 varies slowest).
pub fn deterministic_policies(n_states: usize, n_actions: usize) -> impl Iterator<Item = Vec<usize>> {
    product_indices(vec![n_actions; n_states])
}

/// Mixed-radix counter over `radices`, state 0 most significant.
pub fn product_indices(radices: Vec<usize>) -> impl Iterator<Item = Vec<usize>> {
    let total: usize = if radices.contains(&0) {
        0
    } else {
        radices.iter().product()
    };
    (0..total).map(move |mut idx| {
        let mut out = vec![0; radices.len()];
        for i in (0..radices.len()).rev() {
            out[i] = idx % radices[i];
            idx /= radices[i];
        }
        out
    })
}

// ---------------------------------------------------------------------------
// File format

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    format: u32,
    n_states: usize,
    n_actions: usize,
    reward: Vec<Vec<f64>>,
    controller_set: ControllerSetFile,
    ambiguity: Vec<AmbiguityFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Labels>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
enum ControllerSetFile {
    DiracOnly,
    FullSimplex,
    Finite { distributions: Vec<Vec<f64>> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
enum AmbiguityFile {
    FiniteKernels { kernels: Vec<KernelRows> },
    SaTv { nominal: KernelRows, radius: Vec<f64> },
}

impl TryFrom<InstanceFile> for RobustMdpInstance {
    type Error = Error;

    fn try_from(f: InstanceFile) -> Result<Self> {
        if f.format != 1 {
            return Err(Error::Parse(format!("unsupported format version {}", f.format)));
        }
        if f.reward.len() != f.n_states {
            return Err(Error::validation(
                "reward",
                &[],
                format!("expected {} rows, got {}", f.n_states, f.reward.len()),
            ));
        }
        if let Some((s, row)) = f.reward.iter().enumerate().find(|(_, r)| r.len() != f.n_actions) {
            return Err(Error::validation(
                "reward",
                &[s],
                format!("expected {} actions, got {}", f.n_actions, row.len()),
            ));
        }
        let controller_set = match f.controller_set {
            ControllerSetFile::DiracOnly => ControllerSet::DiracOnly,
            ControllerSetFile::FullSimplex => ControllerSet::FullSimplex,
            ControllerSetFile::Finite { distributions } => ControllerSet::Finite(distributions),
        };
        let ambiguity = f
            .ambiguity
            .into_iter()
            .map(|a| match a {
                AmbiguityFile::FiniteKernels { kernels } => StateAmbiguity::FiniteKernels(kernels),
                AmbiguityFile::SaTv { nominal, radius } => StateAmbiguity::SaTvBalls { nominal, radius },
            })
            .collect();
        let inst = RobustMdpInstance::new(f.reward, controller_set, ambiguity)?;
        match f.labels {
            Some(l) => inst.with_labels(l),
            None => Ok(inst),
        }
    }
}

impl From<&RobustMdpInstance> for InstanceFile {
    fn from(inst: &RobustMdpInstance) -> Self {
        Self {
            format: 1,
            n_states: inst.n_states,
            n_actions: inst.n_actions,
            reward: inst.reward.clone(),
            controller_set: match &inst.controller_set {
                ControllerSet::DiracOnly => ControllerSetFile::DiracOnly,
                ControllerSet::FullSimplex => ControllerSetFile::FullSimplex,
                ControllerSet::Finite(d) => ControllerSetFile::Finite { distributions: d.clone() },
            },
            ambiguity: inst
                .ambiguity
                .iter()
                .map(|a| match a {
                    StateAmbiguity::FiniteKernels(k) => AmbiguityFile::FiniteKernels { kernels: k.clone() },
                    StateAmbiguity::SaTvBalls { nominal, radius } => AmbiguityFile::SaTv {
                        nominal: nominal.clone(),
                        radius: radius.clone(),
                    },
                })
                .collect(),
            labels: inst.labels.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t1() -> RobustMdpInstance {
        RobustMdpInstance::new(
            vec![vec![0.7]],
            ControllerSet::DiracOnly,
            vec![StateAmbiguity::FiniteKernels(vec![vec![vec![1.0]]])],
        )
        .unwrap()
    }

    #[test]
    fn smallest_instance() {
        let inst = t1();
        assert_eq!(inst.n_states(), 1);
        let chain = induced_chain(
            &inst,
            &StationaryControllerPolicy::deterministic(&[0], 1),
            &StationaryAdversaryPolicy::nominal(&inst),
        )
        .unwrap();
        assert_eq!(chain.transition, vec![vec![1.0]]);
        assert_eq!(chain.reward, vec![0.7]);
    }

    #[test]
    fn bad_row_sum_names_state_and_action() {
        let err = RobustMdpInstance::new(
            vec![vec![0.0], vec![0.0]],
            ControllerSet::DiracOnly,
            vec![
                StateAmbiguity::FiniteKernels(vec![vec![vec![1.0, 0.0]]]),
                StateAmbiguity::FiniteKernels(vec![vec![vec![0.5, 0.6]]]),
            ],
        )
        .unwrap_err();
        match err {
            Error::Validation { field, index, .. } => {
                assert_eq!(field, "ambiguity.kernels");
                assert_eq!(index, vec![1, 0, 0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reward_out_of_range() {
        let err = RobustMdpInstance::new(
            vec![vec![1.5]],
            ControllerSet::DiracOnly,
            vec![StateAmbiguity::FiniteKernels(vec![vec![vec![1.0]]])],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "reward"));
    }

    #[test]
    fn ambiguity_length_mismatch() {
        let err = RobustMdpInstance::new(vec![vec![0.1], vec![0.2]], ControllerSet::DiracOnly, vec![
            StateAmbiguity::FiniteKernels(vec![vec![vec![1.0, 0.0]]]),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "ambiguity"));
    }

    #[test]
    fn tv_rows_outside_ball_rejected() {
        let inst = RobustMdpInstance::new(
            vec![vec![0.0], vec![0.0]],
            ControllerSet::DiracOnly,
            vec![
                StateAmbiguity::SaTvBalls { nominal: vec![vec![0.5, 0.5]], radius: vec![0.2] },
                StateAmbiguity::SaTvBalls { nominal: vec![vec![0.5, 0.5]], radius: vec![0.0] },
            ],
        )
        .unwrap();
        let ok = StationaryAdversaryPolicy {
            choices: vec![AdversaryChoice::Rows(vec![vec![0.7, 0.3]]), AdversaryChoice::Kernel(0)],
        };
        ok.validate(&inst).unwrap();
        let bad = StationaryAdversaryPolicy {
            choices: vec![AdversaryChoice::Rows(vec![vec![0.8, 0.2]]), AdversaryChoice::Kernel(0)],
        };
        assert!(bad.validate(&inst).is_err());
    }

    #[test]
    fn json_round_trip_is_identical() {
        let inst = t1();
        let text = inst.to_json();
        let back = RobustMdpInstance::from_json(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn rejects_unknown_format() {
        let text = t1().to_json().replace("\"format\": 1", "\"format\": 2");
        assert!(matches!(RobustMdpInstance::from_json(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn deterministic_policy_count() {
        assert_eq!(deterministic_policies(2, 2).count(), 4);
        assert_eq!(deterministic_policies(3, 2).collect::<Vec<_>>()[1], vec![0, 0, 1]);
    }

    #[test]
    fn finite_set_membership() {
        let q = ControllerSet::Finite(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]);
        assert!(q.contains_diracs(2));
        let q = ControllerSet::Finite(vec![vec![0.5, 0.5]]);
        assert!(!q.contains_diracs(2));
    }
}
