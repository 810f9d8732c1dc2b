//! Ground-truth generators checked against independently computed values.
//!
//! Frozen constants come from high-precision Taylor integration (40 digits)
//! or from standalone double-precision reimplementations, never from this
//! crate.

use qngrc::dynamics::{
    double_scroll_rhs, lorenz63, lorenz63_rhs, mackey_glass, narma_input, narma_series, rk4_step,
    MackeyGlass,
};

fn max_err(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

fn lorenz(x: &[f64; 3]) -> Option<[f64; 3]> {
    Some(lorenz63_rhs(x))
}

#[test]
fn narma_input_at_25() {
    assert!((narma_input(25) - 0.101_216_420_622_251_46).abs() < 1e-15);
}

#[test]
fn narma10_matches_reference_loop() {
    // y[k+1] = 0.3 y[k] + 0.05 y[k] Σ_{j<10} y[k-j] + 1.5 u[k-9] u[k] + 0.1
    let (_, y) = narma_series(10, 501).unwrap();
    assert!((y[500] - 0.20565875708370038).abs() < 1e-12);
    let (_, y2) = narma_series(2, 501).unwrap();
    assert!((y2[500] - 0.19249162514790785).abs() < 1e-12);

    // test-side loop over the same recurrence
    let n = 501;
    let u: Vec<f64> = (0..n).map(narma_input).collect();
    let mut r = vec![0.0; n];
    for k in 0..n - 1 {
        let s: f64 = (0..10).filter(|j| *j <= k).map(|j| r[k - j]).sum();
        let lag = if k >= 9 { u[k - 9] } else { 0.0 };
        r[k + 1] = 0.3 * r[k] + 0.05 * r[k] * s + 1.5 * lag * u[k] + 0.1;
    }
    for k in 0..n {
        assert!((y[k] - r[k]).abs() < 1e-14, "step {k}");
    }
}

#[test]
fn narma_stays_bounded() {
    for order in [5, 10, 15, 20] {
        let (_, y) = narma_series(order, 10_000).unwrap();
        assert!(
            y.iter().all(|v| v.is_finite() && v.abs() < 10.0),
            "narma{order}"
        );
    }
}

#[test]
fn rk4_single_steps() {
    let l = rk4_step(&lorenz, &[1.0, 1.0, 1.0], 0.025).unwrap();
    assert!(
        max_err(
            &l,
            &[1.075450532023112, 1.6593081252041169, 0.9686116362706064]
        ) < 1e-14
    );
    let d = rk4_step(&double_scroll_rhs, &[0.1, 0.0, 0.0], 0.25).unwrap();
    assert!(
        max_err(
            &d,
            &[
                0.11479270460269213,
                0.007461135357069452,
                0.0009114996330430791
            ]
        ) < 1e-15
    );

    // local error against the exact flow
    let exact_l = [1.0753164517307951, 1.659516395127107, 0.9686199176651698];
    let exact_d = [
        0.11479276159816742,
        0.007_461_285_508_647_946,
        0.000_911_625_261_043_771,
    ];
    assert!(max_err(&l, &exact_l) < 3e-4);
    assert!(max_err(&d, &exact_d) < 2e-7);
}

fn global_error<F>(f: &F, init: [f64; 3], t: f64, n: usize, exact: &[f64; 3]) -> f64
where
    F: Fn(&[f64; 3]) -> Option<[f64; 3]>,
{
    let mut x = init;
    for _ in 0..n {
        x = rk4_step(f, &x, t / n as f64).unwrap();
    }
    max_err(&x, exact)
}

#[test]
fn rk4_is_fourth_order() {
    let exact_l = [11.042844240025365, 21.775417183737307, 11.016773388022337];
    let exact_d = [
        0.43107326108574895,
        0.07011515757123202,
        0.07711934985156291,
    ];
    let rl = global_error(&lorenz, [1.0, 1.0, 1.0], 0.25, 10, &exact_l)
        / global_error(&lorenz, [1.0, 1.0, 1.0], 0.25, 20, &exact_l);
    let rd = global_error(&double_scroll_rhs, [0.1, 0.0, 0.0], 2.5, 10, &exact_d)
        / global_error(&double_scroll_rhs, [0.1, 0.0, 0.0], 2.5, 20, &exact_d);
    for r in [rl, rd] {
        assert!((8.0..=32.0).contains(&r), "ratio {r}");
    }
}

#[test]
fn lorenz_stays_on_attractor() {
    let s = lorenz63([1.0, 1.0, 1.0], 0.01, 100_000).unwrap();
    for col in s.column_iter() {
        assert!(col[0].abs() < 30.0 && col[1].abs() < 40.0 && (0.0..60.0).contains(&col[2]));
    }
}

#[test]
fn mackey_glass_short_delay_is_the_ode() {
    // ẏ = 0.2 y / (1 + y¹⁰) - 0.1 y from y(0) = 1.2
    let p = MackeyGlass {
        dt: 0.01,
        tau: 0.01,
        sample_every: 100,
        init: 1.2,
        transient: 0,
    };
    let s = mackey_glass(&p, 51).unwrap();
    for (t, want) in [
        (5, 1.0172528399641076),
        (10, 1.0014068109043954),
        (20, 1.0000094724788285),
        (50, 1.0000000000028976),
    ] {
        assert!((s[t] - want).abs() < 1e-3, "t = {t}: {} vs {want}", s[t]);
    }
}

#[test]
fn mackey_glass_is_aperiodic() {
    let p = MackeyGlass {
        transient: 1000,
        ..MackeyGlass::default()
    };
    let s = mackey_glass(&p, 1500).unwrap();
    assert!(s.iter().all(|v| (0.2..1.5).contains(v)));
    // no lag up to 500 reproduces the series
    for lag in 1..=500 {
        let dev = (0..1000)
            .map(|k| (s[k + lag] - s[k]).abs())
            .fold(0.0, f64::max);
        assert!(dev > 1e-2, "near-periodic at lag {lag}");
    }
}
