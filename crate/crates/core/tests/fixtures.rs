mod common;

use common::{expected, fixture, fixture_dir, sup_diff, FIXTURES};
use rmdp_core::gain::{extract_policy, solve_constant_gain, GainConfig, Verdict};
use rmdp_core::oracle::{exact_chain_gain, exhaustive_values, standard_mus};
use rmdp_core::structure::{analyze, Communication};
use rmdp_core::{Orientation, RobustMdpInstance};

#[test]
fn fixtures_round_trip_byte_for_byte() {
    for name in FIXTURES {
        let path = fixture_dir().join(format!("{name}.json"));
        let text = std::fs::read_to_string(&path).unwrap();
        let inst = RobustMdpInstance::from_json(&text).unwrap();
        assert_eq!(inst.to_json(), text, "{name}");
    }
}

#[test]
fn gains_match_sidecars() {
    for name in FIXTURES {
        let exp = expected(name);
        let inst = fixture(name);
        for (orientation, key) in [(Orientation::SupInf, "supinf"), (Orientation::InfSup, "infsup")] {
            let sol = solve_constant_gain(orientation, &inst, &GainConfig::default()).unwrap();
            let verdict = serde_json::to_value(sol.verdict).unwrap();
            assert_eq!(verdict, exp["verdict"], "{name} {key}");
            if sol.verdict != Verdict::Converged {
                continue;
            }
            let alpha = exp[format!("alpha_{key}")].as_f64().unwrap();
            assert!((sol.alpha - alpha).abs() <= 1e-6, "{name} {key}: {} vs {alpha}", sol.alpha);
            if let Some(u) = exp.get(format!("u_{key}")) {
                let u: Vec<f64> = serde_json::from_value(u.clone()).unwrap();
                assert!(sup_diff(&sol.u, &u) <= 1e-5, "{name} {key}: {:?}", sol.u);
            }
            if orientation == Orientation::SupInf {
                if let Some(policy) = exp.get("extracted_policy") {
                    let want: Vec<usize> = serde_json::from_value(policy.clone()).unwrap();
                    let got = extract_policy(&sol.u, sol.alpha, &inst, 1e-4).unwrap();
                    assert_eq!(got.as_deterministic().unwrap(), want, "{name}");
                }
            }
        }
    }
}

#[test]
fn absorbing_pair_oracle_gain_is_not_constant() {
    let exp = expected("absorbing_pair");
    let want: Vec<f64> = serde_json::from_value(exp["oracle_gain"].clone()).unwrap();
    let inst = fixture("absorbing_pair");
    let res = exhaustive_values(&inst, &standard_mus(2), None).unwrap();
    for pair in &res.pairs {
        assert!(sup_diff(&pair.gain, &want) < 1e-12);
    }
}

#[test]
fn oracle_agrees_with_fixture_gains() {
    for name in ["t1_single", "d2_toggle", "mp_loop", "d4_transient", "d6_overlap"] {
        let exp = expected(name);
        let inst = fixture(name);
        let res = exhaustive_values(&inst, &standard_mus(inst.n_states()), None).unwrap();
        let a = exp["alpha_supinf"].as_f64().unwrap();
        for v in &res.supinf_gain {
            assert!((v - a).abs() < 1e-9, "{name}: {v} vs {a}");
        }
    }
}

#[test]
fn structure_matches_sidecars() {
    for name in FIXTURES {
        let exp = &expected(name)["structure"];
        let report = analyze(&fixture(name)).unwrap();
        assert!(report.exhaustive);
        assert_eq!(report.controller_comm.label(), exp["controller_comm"], "{name}");
        assert_eq!(report.adversary_comm.label(), exp["adversary_comm"], "{name}");
        assert_eq!(report.all_unichain.value, exp["all_unichain"].as_bool(), "{name}");
        assert_eq!(report.occcc_controller.value, exp["occcc_controller"].as_bool(), "{name}");
        assert_eq!(report.occcc_adversary.value, exp["occcc_adversary"].as_bool(), "{name}");
    }
}

#[test]
fn d4_weak_class_is_the_core() {
    let report = analyze(&fixture("d4_transient")).unwrap();
    let want: Vec<usize> = serde_json::from_value(expected("d4_transient")["class"].clone()).unwrap();
    for comm in [&report.controller_comm, &report.adversary_comm] {
        let Communication::WeaklyCommunicating { classes } = comm else { panic!("{comm:?}") };
        assert!(!classes.is_empty());
        assert!(classes.iter().all(|c| c.class == want));
    }
}

#[test]
fn exact_chain_gain_of_d2_saddle() {
    let p = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
    let g = exact_chain_gain(&p, &[0.0, 1.0]).unwrap();
    assert!(sup_diff(&g, &[0.5, 0.5]) < 1e-14);
}
