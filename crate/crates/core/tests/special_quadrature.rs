mod common;

use common::{beta_grid, beta_reference, gamma_grid, gamma_p_reference, t_two_sided_p};
use llmhpo::stats::special::{f_survival, gamma_p, regularized_beta};

#[test]
fn regularized_beta_matches_quadrature() {
    let mut worst = 0.0f64;
    for (a, b, x) in beta_grid() {
        let d = (regularized_beta(a, b, x) - beta_reference(a, b, x)).abs();
        assert!(d < 1e-8, "I_{x}({a}, {b}) off by {d:e}");
        worst = worst.max(d);
    }
    eprintln!("regularized_beta worst |diff| = {worst:e}");
}

#[test]
fn gamma_p_matches_quadrature() {
    let mut worst = 0.0f64;
    for (a, x) in gamma_grid() {
        let d = (gamma_p(a, x) - gamma_p_reference(a, x)).abs();
        assert!(d < 1e-8, "P({a}, {x}) off by {d:e}");
        worst = worst.max(d);
    }
    eprintln!("gamma_p worst |diff| = {worst:e}");
}

#[test]
fn f_survival_with_one_numerator_df_is_two_sided_t() {
    for (f, d2) in [(0.3, 3.0), (1.5, 4.0), (4.0, 10.0), (9.0, 50.0), (2.0, 198.0)] {
        let d = (f_survival(f, 1.0, d2) - t_two_sided_p(f64::sqrt(f), d2)).abs();
        assert!(d < 1e-9, "F({f}; 1, {d2}) off by {d:e}");
    }
}

#[test]
fn reference_sanity() {
    assert!((beta_reference(1.0, 1.0, 0.3) - 0.3).abs() < 1e-13);
    assert!((gamma_p_reference(1.0, 2.0) - (1.0 - (-2.0f64).exp())).abs() < 1e-13);
    // Closed form for four degrees of freedom.
    let t = 1.5f64.sqrt();
    let theta = (t / 2.0).atan();
    let closed = 1.0 - theta.sin() * (1.0 + 0.5 * theta.cos().powi(2));
    assert!((t_two_sided_p(t, 4.0) - closed).abs() < 1e-12);
}
