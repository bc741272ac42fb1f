//! Command implementations. Each one renders its whole result before
//! anything is written.

use std::fmt::Write as _;
use std::path::Path;

use rmdp_core::bellman::{solve_discounted, span_curve, span_curve_csv, DiscountedConfig, DiscountedMethod};
use rmdp_core::gain::{duality_report, extract_policy, solve_constant_gain, GainConfig, Verdict};
use rmdp_core::oracle::{exhaustive_values, standard_mus};
use rmdp_core::simulate::{hd_s_gap_demo, run as simulate, AdversarySpec, LearnerConfig, PolicySpec};
use rmdp_core::structure::{analyze, Check};
use rmdp_core::{model::StationaryAdversaryPolicy, ControllerSet, Orientation, RobustMdpInstance, StateAmbiguity};
use serde_json::{json, Value};
use thiserror::Error;

use crate::{Command, Global};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rmdp_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use rmdp_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::Core(e) => match e {
                E::Io(_) | E::Parse(_) | E::Validation { .. } | E::DimensionMismatch(_) => 2,
                E::ToleranceNotMet { .. }
                | E::MaxItersExceeded { .. }
                | E::ExtractionFailed { .. }
                | E::Infeasible
                | E::Unbounded => 3,
                E::ExplosionGuard { .. }
                | E::EnumerationCapExceeded { .. }
                | E::UnsupportedCombination(_)
                | E::TargetUnreachable { .. }
                | E::SingularSystem(_)
                | E::PreconditionFailed(_) => 4,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

fn format_of(g: &Global) -> Format {
    if g.json {
        Format::Json
    } else if g.csv {
        Format::Csv
    } else {
        Format::Text
    }
}

fn unsupported(what: &str) -> CliError {
    CliError::Usage(format!("{what} has no CSV form"))
}

fn load(g: &Global) -> Result<RobustMdpInstance> {
    let path = g.instance.as_ref().ok_or_else(|| CliError::Usage("--instance is required".into()))?;
    Ok(RobustMdpInstance::load(path)?)
}

fn emit(g: &Global, text: &str) -> Result<()> {
    match &g.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Core(e.into())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// A spec given inline (`{...}`) or as a path to a JSON file.
fn read_spec<T: serde::de::DeserializeOwned>(arg: &str) -> Result<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(Path::new(arg)).map_err(|e| CliError::Core(e.into()))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Core(rmdp_core::Error::Parse(e.to_string())))
}

fn state_name(inst: &RobustMdpInstance, s: usize) -> String {
    inst.labels()
        .and_then(|l| l.states.as_ref())
        .map_or_else(|| s.to_string(), |names| names[s].clone())
}

fn mu_names(inst: &RobustMdpInstance) -> Vec<String> {
    let mut names: Vec<String> = (0..inst.n_states()).map(|s| format!("state {}", state_name(inst, s))).collect();
    names.push("uniform".into());
    names
}

pub fn run(g: &Global, cmd: &Command) -> Result<()> {
    match cmd {
        Command::SolveDiscounted { gamma, orientation, policy_iteration } => {
            solve_discounted_cmd(g, *gamma, *orientation, *policy_iteration)
        }
        Command::SolveGain { orientation, extract, duality } => {
            if *duality {
                duality_cmd(g)
            } else {
                solve_gain_cmd(g, *orientation, *extract)
            }
        }
        Command::SpanCurve { gammas, orientation } => span_curve_cmd(g, gammas, *orientation),
        Command::CheckStructure { witnesses } => check_structure_cmd(g, *witnesses),
        Command::Simulate { controller, adversary, steps, trajectories, mu, csv_out } => simulate_cmd(
            g,
            controller.as_deref(),
            adversary.as_deref(),
            *steps,
            *trajectories,
            mu.as_deref(),
            csv_out.as_deref(),
        ),
        Command::OracleCompare { gamma } => oracle_cmd(g, *gamma),
        Command::HdSDemo { steps } => hd_s_cmd(g, *steps),
        Command::Validate => validate_cmd(g),
    }
}

fn solve_discounted_cmd(g: &Global, gamma: f64, orientation: Orientation, pi: bool) -> Result<()> {
    let inst = load(g)?;
    let config = DiscountedConfig {
        tol: g.tol,
        method: if pi { DiscountedMethod::PolicyIteration } else { DiscountedMethod::ValueIteration },
        ..DiscountedConfig::default()
    };
    let v = solve_discounted(gamma, orientation, &inst, &config)?;
    match format_of(g) {
        Format::Csv => {
            let mut out = String::from("state,value\n");
            for (s, x) in v.values.iter().enumerate() {
                writeln!(out, "{s},{x:.16e}").unwrap();
            }
            emit(g, &out)
        }
        _ => emit(g, &pretty(&v)),
    }
}

fn solve_gain_cmd(g: &Global, orientation: Orientation, extract: Option<f64>) -> Result<()> {
    let inst = load(g)?;
    let sol = solve_constant_gain(orientation, &inst, &GainConfig::with_tol(g.tol))?;
    let mut out = json!({
        "orientation": sol.orientation,
        "alpha": sol.alpha,
        "u": sol.u,
        "residual": sol.residual,
        "verdict": sol.verdict,
        "gamma_trace": sol.gamma_trace,
    });
    if let (Some(eps), Verdict::Converged) = (extract, sol.verdict) {
        let policy = extract_policy(&sol.u, sol.alpha, &inst, eps)?;
        out["policy"] = serde_json::to_value(policy).expect("serializable");
    }
    if format_of(g) == Format::Csv {
        return Err(unsupported("solve-gain"));
    }
    emit(g, &pretty(&out))?;
    match sol.verdict {
        Verdict::Converged => Ok(()),
        v => Err(CliError::NotConverged(format!("constant-gain solve ended with verdict {v:?}"))),
    }
}

fn duality_cmd(g: &Global) -> Result<()> {
    let inst = load(g)?;
    if format_of(g) == Format::Csv {
        return Err(unsupported("solve-gain --duality"));
    }
    let r = duality_report(&inst, g.tol)?;
    emit(g, &pretty(&r))?;
    if r.both_converged {
        Ok(())
    } else {
        Err(CliError::NotConverged("at least one orientation did not converge".into()))
    }
}

fn span_curve_cmd(g: &Global, gammas: &[f64], orientation: Orientation) -> Result<()> {
    let inst = load(g)?;
    let records = span_curve(gammas, orientation, &inst, g.tol)?;
    match format_of(g) {
        Format::Json => emit(g, &pretty(&records)),
        _ => emit(g, &span_curve_csv(&records)),
    }
}

fn check_label(c: &Check) -> &'static str {
    match c.value {
        Some(true) => "yes",
        Some(false) => "no",
        None => "inconclusive",
    }
}

fn check_structure_cmd(g: &Global, witnesses: bool) -> Result<()> {
    let inst = load(g)?;
    let report = analyze(&inst)?;
    match format_of(g) {
        Format::Csv => Err(unsupported("check-structure")),
        Format::Json => {
            let mut v = serde_json::to_value(&report).expect("serializable");
            if witnesses {
                v["witnesses"] = serde_json::to_value(report.witnesses()).expect("serializable");
            }
            emit(g, &pretty(&v))
        }
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "controller communication  {}", report.controller_comm.label()).unwrap();
            writeln!(out, "adversary communication   {}", report.adversary_comm.label()).unwrap();
            writeln!(out, "unichain                  {}", check_label(&report.all_unichain)).unwrap();
            writeln!(out, "overlap (controller)      {}", check_label(&report.occcc_controller)).unwrap();
            writeln!(out, "overlap (adversary)       {}", check_label(&report.occcc_adversary)).unwrap();
            if !report.exhaustive {
                writeln!(out, "note: some TV radius reaches a nominal mass; enumeration is not exhaustive").unwrap();
            }
            if witnesses {
                for w in report.witnesses() {
                    let policy = serde_json::to_string(&w.policy).expect("serializable");
                    write!(out, "witness {}: {} {policy}", w.check, w.note).unwrap();
                    if let Some((s, t)) = w.pair {
                        write!(out, " ({} cannot reach {})", state_name(&inst, s), state_name(&inst, t)).unwrap();
                    }
                    out.push('\n');
                }
            }
            emit(g, &out)
        }
    }
}

fn simulate_cmd(
    g: &Global,
    controller: Option<&str>,
    adversary: Option<&str>,
    steps: usize,
    trajectories: usize,
    mu: Option<&[f64]>,
    csv_out: Option<&Path>,
) -> Result<()> {
    let inst = load(g)?;
    let controller: PolicySpec = match controller {
        Some(arg) => read_spec(arg)?,
        None => PolicySpec::Learner(LearnerConfig::default()),
    };
    let adversary: AdversarySpec = match adversary {
        Some(arg) => read_spec(arg)?,
        None => AdversarySpec::Stationary { policy: StationaryAdversaryPolicy::nominal(&inst) },
    };
    let ns = inst.n_states();
    let mu = mu.map_or_else(|| vec![1.0 / ns as f64; ns], <[f64]>::to_vec);
    let stats = simulate(&inst, &mu, &controller, &adversary, steps, trajectories, g.seed)?;
    if format_of(g) == Format::Csv {
        return Err(unsupported("simulate (use --csv-out)"));
    }
    if let Some(path) = csv_out {
        let mut out = String::from("step,mean");
        for i in 0..trajectories {
            write!(out, ",trajectory_{i}").unwrap();
        }
        out.push('\n');
        for (j, step) in stats.checkpoints.iter().enumerate() {
            write!(out, "{step},{:.16e}", stats.mean_series[j]).unwrap();
            for series in &stats.series {
                write!(out, ",{:.16e}", series[j]).unwrap();
            }
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| CliError::Core(e.into()))?;
    }
    let mut v = serde_json::to_value(&stats).expect("serializable");
    if let Value::Object(map) = &mut v {
        map.remove("series");
    }
    emit(g, &pretty(&v))
}

fn oracle_cmd(g: &Global, gamma: Option<f64>) -> Result<()> {
    let inst = load(g)?;
    let mus = standard_mus(inst.n_states());
    let oracle = exhaustive_values(&inst, &mus, gamma)?;
    let config = GainConfig::with_tol(g.tol);
    let sup = solve_constant_gain(Orientation::SupInf, &inst, &config)?;
    let inf = solve_constant_gain(Orientation::InfSup, &inst, &config)?;
    let discounted = match gamma {
        Some(gamma) => {
            let cfg = DiscountedConfig { tol: g.tol.min(1e-8), ..DiscountedConfig::default() };
            Some((
                solve_discounted(gamma, Orientation::SupInf, &inst, &cfg)?.values,
                solve_discounted(gamma, Orientation::InfSup, &inst, &cfg)?.values,
            ))
        }
        None => None,
    };
    let names = mu_names(&inst);
    match format_of(g) {
        Format::Json => {
            let mut v = json!({
                "mus": names,
                "oracle_supinf": oracle.supinf_gain,
                "oracle_infsup": oracle.infsup_gain,
                "alpha_supinf": sup.alpha,
                "alpha_infsup": inf.alpha,
                "verdict_supinf": sup.verdict,
                "verdict_infsup": inf.verdict,
                "pairs_evaluated": oracle.pairs.len(),
            });
            if let Some((ds, di)) = &discounted {
                v["gamma"] = json!(gamma);
                v["oracle_discounted_supinf"] = json!(oracle.supinf_discounted);
                v["oracle_discounted_infsup"] = json!(oracle.infsup_discounted);
                v["solver_discounted_supinf"] = json!(ds);
                v["solver_discounted_infsup"] = json!(di);
            }
            emit(g, &pretty(&v))
        }
        Format::Csv => {
            let mut out = String::from("mu,oracle_supinf,oracle_infsup,alpha_supinf,alpha_infsup\n");
            for (i, name) in names.iter().enumerate() {
                writeln!(
                    out,
                    "{name},{:.16e},{:.16e},{:.16e},{:.16e}",
                    oracle.supinf_gain[i], oracle.infsup_gain[i], sup.alpha, inf.alpha
                )
                .unwrap();
            }
            emit(g, &out)
        }
        Format::Text => {
            let width = names.iter().map(String::len).max().unwrap_or(0).max(2);
            let mut out = format!(
                "{:<width$}  {:>13}  {:>13}  {:>12}  {:>12}\n",
                "mu", "oracle_supinf", "oracle_infsup", "alpha_supinf", "alpha_infsup"
            );
            for (i, name) in names.iter().enumerate() {
                writeln!(
                    out,
                    "{name:<width$}  {:>13.6}  {:>13.6}  {:>12.6}  {:>12.6}",
                    oracle.supinf_gain[i], oracle.infsup_gain[i], sup.alpha, inf.alpha
                )
                .unwrap();
            }
            writeln!(out, "verdicts: sup_inf {:?}, inf_sup {:?}; {} stationary pairs", sup.verdict, inf.verdict, oracle.pairs.len()).unwrap();
            if let (Some((ds, di)), Some(os), Some(oi)) = (&discounted, &oracle.supinf_discounted, &oracle.infsup_discounted) {
                writeln!(out, "\ndiscounted values at gamma {}", gamma.unwrap()).unwrap();
                writeln!(out, "{:<width$}  {:>13}  {:>13}  {:>12}  {:>12}", "state", "oracle_supinf", "oracle_infsup", "solver_supinf", "solver_infsup").unwrap();
                for s in 0..inst.n_states() {
                    writeln!(out, "{:<width$}  {:>13.6}  {:>13.6}  {:>12.6}  {:>12.6}", state_name(&inst, s), os[s], oi[s], ds[s], di[s]).unwrap();
                }
            }
            emit(g, &out)
        }
    }
}

fn hd_s_cmd(g: &Global, steps: usize) -> Result<()> {
    let inst = load(g)?;
    let report = hd_s_gap_demo(&inst, g.tol, g.seed, steps)?;
    match format_of(g) {
        Format::Csv => Err(unsupported("hd-s-demo")),
        Format::Json => emit(g, &pretty(&report)),
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "alpha* (sup-inf)   {:.6}", report.alpha_star).unwrap();
            writeln!(out, "alpha' (inf-sup)   {:.6}", report.alpha_prime).unwrap();
            writeln!(out, "gap                {:.6}", report.gap).unwrap();
            for r in &report.runs {
                let choices = serde_json::to_string(&r.adversary).expect("serializable");
                writeln!(out, "learner vs {choices}: {:.4} ± {:.4}", r.mean, r.standard_error).unwrap();
            }
            writeln!(out, "worst learner mean {:.4} (threshold {:.4})", report.learner_worst_mean, report.threshold).unwrap();
            writeln!(out, "{}", if report.pass { "PASS" } else { "FAIL" }).unwrap();
            emit(g, &out)
        }
    }
}

fn validate_cmd(g: &Global) -> Result<()> {
    let inst = load(g)?;
    let q = match inst.controller_set() {
        ControllerSet::DiracOnly => "dirac_only".to_string(),
        ControllerSet::FullSimplex => "full_simplex".to_string(),
        ControllerSet::Finite(list) => format!("finite ({} elements)", list.len()),
    };
    let tv = inst.ambiguities().iter().filter(|a| matches!(a, StateAmbiguity::SaTvBalls { .. })).count();
    match format_of(g) {
        Format::Csv => Err(unsupported("validate")),
        Format::Json => emit(
            g,
            &pretty(&json!({
                "valid": true,
                "n_states": inst.n_states(),
                "n_actions": inst.n_actions(),
                "controller_set": q,
                "tv_ball_states": tv,
            })),
        ),
        Format::Text => emit(
            g,
            &format!(
                "valid: {} states, {} actions, controller set {q}, {tv} TV-ball states\n",
                inst.n_states(),
                inst.n_actions()
            ),
        ),
    }
}
