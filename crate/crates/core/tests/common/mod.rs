//! Reference computations shared by the integration targets. Nothing here
//! calls into the crate's numeric code.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Tanh-sinh quadrature of `f(t, 1 - t)` over `[lo, hi]` within `[0, 1]`.
/// The complement is passed separately so integrands singular at 1 keep
/// full precision near that end.
pub fn tanh_sinh(f: impl Fn(f64, f64) -> f64, lo: f64, hi: f64) -> f64 {
    let h = 1.0 / 128.0;
    let half = 0.5 * (hi - lo);
    let mut sum = 0.0;
    for k in -640i32..=640 {
        let s = k as f64 * h;
        let u = 0.5 * PI * s.sinh();
        let weight = 0.5 * PI * s.cosh() / u.cosh().powi(2);
        // 1 + x and 1 - x for x = tanh(u), without cancellation.
        let one_plus = 2.0 / (1.0 + (-2.0 * u).exp());
        let one_minus = 2.0 / (1.0 + (2.0 * u).exp());
        let t = lo + half * one_plus;
        let t_comp = (1.0 - hi) + half * one_minus;
        if one_minus == 0.0 || one_plus == 0.0 || t <= 0.0 || t_comp <= 0.0 {
            continue;
        }
        let v = f(t, t_comp) * weight;
        if v.is_finite() {
            sum += v;
        }
    }
    sum * half * h
}

/// Γ(a) for a a positive multiple of 1/2, by the recurrences from Γ(1)
/// and Γ(1/2).
pub fn gamma_half_integer(a: f64) -> f64 {
    let twice = (2.0 * a).round();
    assert!((twice - 2.0 * a).abs() < 1e-12 && twice >= 1.0);
    let mut x = if twice as i64 % 2 == 0 { 1.0 } else { 0.5 };
    let mut g = if x == 1.0 { 1.0 } else { PI.sqrt() };
    while x < a - 1e-12 {
        g *= x;
        x += 1.0;
    }
    g
}

/// I_x(a, b) for half-integer a, b by quadrature of the beta density.
pub fn beta_reference(a: f64, b: f64, x: f64) -> f64 {
    let norm = gamma_half_integer(a) * gamma_half_integer(b) / gamma_half_integer(a + b);
    let integrand = |t: f64, tc: f64| t.powf(a - 1.0) * tc.powf(b - 1.0);
    if x <= 0.5 {
        tanh_sinh(integrand, 0.0, x) / norm
    } else {
        1.0 - tanh_sinh(integrand, x, 1.0) / norm
    }
}

/// P(a, x) for half-integer a. The integral over `[0, x]` is mapped onto
/// `[0, 1]` by t = x·s.
pub fn gamma_p_reference(a: f64, x: f64) -> f64 {
    let integral = tanh_sinh(|s, _| x * (x * s).powf(a - 1.0) * (-x * s).exp(), 0.0, 1.0);
    integral / gamma_half_integer(a)
}

/// Survival function of Student's t with `nu` degrees of freedom, two
/// sided, from quadrature of the unnormalized density on `[0, inf)`
/// mapped to `[0, 1)` by y = s / (1 - s).
pub fn t_two_sided_p(t: f64, nu: f64) -> f64 {
    let g = |y: f64| (1.0 + y * y / nu).powf(-(nu + 1.0) / 2.0);
    let mapped = |offset: f64| {
        tanh_sinh(
            move |s, sc| {
                let y = offset + s / sc;
                g(y) / (sc * sc)
            },
            0.0,
            1.0,
        )
    };
    mapped(t.abs()) / mapped(0.0)
}

/// One-way ANOVA of two groups: (F, df_within, p) with p taken from the
/// equivalent pooled two-sample t statistic.
pub fn anova_two_groups(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ma, mb) = (mean(a), mean(b));
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    let grand = mean(&all);
    let ss_between = a.len() as f64 * (ma - grand).powi(2) + b.len() as f64 * (mb - grand).powi(2);
    let ss_within: f64 = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>()
        + b.iter().map(|x| (x - mb).powi(2)).sum::<f64>();
    let df_within = (all.len() - 2) as f64;
    let f = ss_between / (ss_within / df_within);
    (f, df_within, t_two_sided_p(f.sqrt(), df_within))
}

/// 50 `(a, b, x)` triples over half-integer shapes.
pub fn beta_grid() -> Vec<(f64, f64, f64)> {
    let shapes = [0.5, 1.0, 1.5, 2.5, 4.0, 7.5, 12.0, 30.5, 50.0, 99.5];
    let xs = [0.01, 0.13, 0.37, 0.5, 0.66, 0.84, 0.97];
    (0..50)
        .map(|i| (shapes[i % 10], shapes[(i * 3 + 1) % 10], xs[i % 7]))
        .collect()
}

/// 50 `(a, x)` pairs over half-integer shapes.
pub fn gamma_grid() -> Vec<(f64, f64)> {
    let shapes = [0.5, 1.0, 1.5, 2.0, 3.5, 5.0, 8.5, 13.0, 20.5, 40.0];
    let scale = [0.05, 0.4, 0.8, 1.0, 1.3];
    (0..50).map(|i| (shapes[i % 10], shapes[i % 10] * scale[i / 10] + 0.1 * (i / 10) as f64)).collect()
}
