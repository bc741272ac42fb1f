use rmdp_web::{builtin, duality, simulate_learner, span_sweep};
use serde_json::Value;

fn value(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn wider_balls_never_raise_the_gain() {
    let inst = builtin("tv_ring").unwrap();
    let mut last = f64::INFINITY;
    for radius in [0.0, 0.02, 0.05, 0.08] {
        let v = value(&span_sweep(&inst, radius).unwrap());
        assert_eq!(v["verdict_supinf"], "converged", "radius {radius}");
        let a = v["alpha_supinf"].as_f64().unwrap();
        assert!(a <= last + 1e-6, "radius {radius}: {a} > {last}");
        assert!((a - v["alpha_infsup"].as_f64().unwrap()).abs() <= 2e-6);
        assert_eq!(v["curve"].as_array().unwrap().len(), 13);
        last = a;
    }
}

#[test]
fn duality_shows_the_mp_loop_gap() {
    let v = value(&duality(&builtin("mp_loop").unwrap(), 1e-6).unwrap());
    assert!(v["alpha_supinf"].as_f64().unwrap().abs() < 1e-6);
    assert!((v["gap"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert_eq!(v["stationary_optimal_hd_s"], false);
    assert_eq!(v["structure"]["controller_comm"], "communicating");
}

#[test]
fn learner_series_is_seeded() {
    let inst = builtin("d2_toggle").unwrap();
    let a = simulate_learner(&inst, 1, 20_000, 3).unwrap();
    assert_eq!(a, simulate_learner(&inst, 1, 20_000, 3).unwrap());
    let v = value(&a);
    assert_eq!(v["checkpoints"].as_array().unwrap().len(), 100);
    let mean = v["mean"].as_f64().unwrap();
    assert!((mean - 0.5).abs() < 0.05, "{mean}");
    let t1 = value(&simulate_learner(&builtin("t1_single").unwrap(), 0, 1000, 0).unwrap());
    assert!((t1["mean"].as_f64().unwrap() - 0.7).abs() < 1e-12);
}
