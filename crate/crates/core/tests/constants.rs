use std::f64::consts::{E, PI};

use kdl_core::constants::{
    constants_report, grad_constants, lambda_min, lemma_key_constants, spatial_lipschitz_constant,
    stability_thresholds, time_lipschitz_constants, translate_decay, ConstantsInput, GrowthFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn grad_constant_examples() {
    assert!(rel(grad_constants(1.0, 0.0, 1.0).unwrap().c, 2.0 * PI.powf(1.5)) < 1e-14);
    assert!((grad_constants(1.0, 0.0, 1.0).unwrap().c - 11.13666).abs() < 1e-5);
    let c4 = grad_constants(1.0, 0.0, 4.0).unwrap().c;
    assert!(rel(c4, 2.0 * PI.powf(1.5) * 4f64.powf(-1.5)) < 1e-14);
    assert!((c4 - 1.39208).abs() < 1e-5);
}

#[test]
fn g_bound_is_attained_at_the_origin() {
    // int exp(-|w|^2) dw = 4 pi int_0^inf r^2 exp(-r^2) dr, by composite Simpson
    let n = 20_000;
    let h = 12.0 / n as f64;
    let f = |r: f64| r * r * (-r * r).exp();
    let mut s = f(0.0) + f(12.0);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    let integral = 4.0 * PI * s * h / 3.0;
    let g = grad_constants(1.0, 0.0, 1.0).unwrap().g_bound;
    assert!((g - 5.56833).abs() < 1e-5);
    assert!(rel(integral, g) < 1e-12, "{integral} vs {g}");
}

#[test]
fn key_constant_examples() {
    let k = lemma_key_constants(1.0, 1.0, 2.0, 1.0, 1.0, 0.0).unwrap();
    let cs = grad_constants(1.0, 0.0, 1.0).unwrap().c;
    assert_eq!(k.k15, k.k25);
    assert!(rel(k.k15, 2.0 * cs) < 1e-14);
    assert_eq!(k.k1, k.k12.max(k.k13).max(k.k14).max(k.k15));
    assert_eq!(k.k2, k.k22.max(k.k23).max(k.k24).max(k.k25));
    let tiny = lemma_key_constants(1e-9, 1e-9, 2.0, 1.0, 1.0, 0.0).unwrap();
    for v in [tiny.k12, tiny.k22, tiny.k13, tiny.k23, tiny.k14, tiny.k24, tiny.k15] {
        assert!(v < 1e-7, "{v}");
    }
    assert!(lemma_key_constants(1.0, 1.0, 1.0, 1.0, 1.0, 0.0).is_err());
}

#[test]
fn time_lipschitz_examples() {
    let (d1, _) = time_lipschitz_constants(1.0, 1.0, 2.0, 1.0, 1.0, 0.0).unwrap();
    assert!(rel(d1, 2f64.sqrt() * E.powf(-0.5) + 2.0 * PI.powf(1.5)) < 1e-14);
    assert!((d1 - 11.994).abs() < 1e-3);
    assert_eq!(time_lipschitz_constants(0.0, 0.0, 2.0, 1.0, 1.0, 0.0).unwrap(), (0.0, 0.0));
    let (a1, a2) = time_lipschitz_constants(1.0, 1.0, 2.0, 1.0, 1.0, 0.5).unwrap();
    let (b1, b2) = time_lipschitz_constants(1.5, 1.0, 2.0, 1.0, 1.0, 0.5).unwrap();
    assert!(b1 > a1 && b2 > a2);
    assert!(time_lipschitz_constants(1.0, 1.0, 1.0, 2.0, 1.0, 0.0).is_err());
}

#[test]
fn growth_function_examples() {
    let c = GrowthFunction {
        k: 1.0,
        c_sigma: 1.0,
        r: 1.0,
        t: 1.0,
    };
    assert!(rel(c.eval(0.0), E) < 1e-15);
    let xs: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
    assert!(xs.windows(2).all(|w| c.eval(w[1]) > c.eval(w[0])));
}

#[test]
fn stability_chain_holds() {
    for (r, m, t, tau, sigma, b0, l) in [
        (1.0, 1.0, 1.0, 1.0, 0.5, 1.0, 0.0),
        (0.1, 0.3, 0.5, 2.0, 1.0, 0.5, 1.0),
        (0.5, 0.5, 0.5, 1.5, 0.7, 0.5, 1.9),
    ] {
        let s = stability_thresholds(r, m, t, tau, sigma, b0, l).unwrap();
        assert!(!s.fallback);
        let product = s.c_at * (s.t0 + s.x0);
        assert!(0.0 < product && product <= s.rho);
        let window = s.rho / s.c_at;
        assert!(0.0 < s.x0 && s.x0 < window);
        assert!(rel(s.t0 + s.x0, window) < 1e-14);
        assert!(s.t_star <= s.t0 && s.t_star <= 1.0 / s.d0 && s.t_star <= 1.0 && s.t_star <= t);
        // the window is maximal: nearby rho give a smaller window
        for f in [0.9, 0.99, 1.01, 1.1] {
            assert!(s.growth.window(s.rho * f) < s.growth.window(s.rho));
        }
    }
    // the window underflows when C(R + rho) overflows
    assert!(stability_thresholds(2.0, 0.5, 2.0, 1.5, 0.2, 2.0, 1.9).is_err());
}

#[test]
fn theta_examples() {
    assert_eq!(translate_decay(0.0, 0.7).unwrap(), 0.7);
    assert!(rel(lambda_min(1.0), (3.0 - 5f64.sqrt()) / 2.0) < 1e-14);
    assert!((lambda_min(1.0) - 0.381966).abs() < 1e-6);
    // dense direction sweep of ((x - v)^2 + v^2) / (x^2 + v^2)
    let n = 2_000_000;
    let swept = (0..n)
        .map(|i| {
            let a = PI * i as f64 / n as f64;
            let (x, v) = (a.cos(), a.sin());
            (x - v).powi(2) + v * v
        })
        .fold(f64::INFINITY, f64::min);
    assert!((swept - lambda_min(1.0)).abs() < 1e-11, "{swept}");
    assert!(translate_decay(-1.0, 1.0).is_err());
}

#[test]
fn theta_bounds_the_transported_weight() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = 0;
    for _ in 0..10_000 {
        let big_t: f64 = rng.gen_range(0.0..3.0);
        let tau1: f64 = rng.gen_range(0.1..4.0);
        let theta = translate_decay(big_t, tau1).unwrap();
        assert!(theta <= tau1);
        let t = rng.gen_range(0.0..=big_t);
        let x: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
        let q: f64 = (0..3).map(|d| (x[d] - t * v[d]).powi(2) + v[d] * v[d]).sum();
        let n: f64 = (0..3).map(|d| x[d] * x[d] + v[d] * v[d]).sum();
        let lhs = (-tau1 * q).exp();
        let rhs = (-theta * n).exp();
        if lhs > rhs * (1.0 + 1e-13) {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn spatial_lipschitz_examples() {
    assert_eq!(spatial_lipschitz_constant(1.3, 1.0, 0.0, 2.0, 1.0, 1.0, 0.0).unwrap(), 1.3);
    assert_eq!(spatial_lipschitz_constant(1.3, 0.0, 1.0, 2.0, 1.0, 1.0, 0.0).unwrap(), 1.3);
    let m = spatial_lipschitz_constant(1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 0.0).unwrap();
    let c1 = 2.0 * PI.powf(1.5);
    let expected = 1.0 + 0.5 * ((2.0 * c1).exp() - 1.0) * (1.0 + 4f64.exp());
    assert!(rel(m, expected) < 1e-13);
    assert!(spatial_lipschitz_constant(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0).is_err());
}

#[test]
fn report_entries_are_positive() {
    let r = constants_report(ConstantsInput {
        r: 1.0,
        m: 1.0,
        t: 1.0,
        tau: 2.0,
        sigma: 1.0,
        tau1: 0.5,
        tau_star: 1.0,
        m0: 1.0,
        b0: 1.0,
        lambda: 0.0,
    })
    .unwrap();
    let json = serde_json::to_value(&r).unwrap();
    fn walk(v: &serde_json::Value, path: &str) {
        match v {
            serde_json::Value::Number(n) => {
                assert!(n.as_f64().unwrap() > 0.0, "{path} not positive")
            }
            serde_json::Value::Object(m) => {
                for (k, v) in m.iter().filter(|(k, _)| *k != "inputs") {
                    walk(v, &format!("{path}.{k}"));
                }
            }
            _ => {}
        }
    }
    walk(&json, "report");
    assert_eq!(r.r_star, r.c_tau);
    assert_eq!(r.m_star, r.c_tau * 3.0);
}
