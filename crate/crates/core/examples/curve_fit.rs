//! Saturation and polynomial fits with nested-model order selection.

use cascade_forge::stats::{fit_exponential_saturation, fit_polynomial_anova, polyval, saturation, DEFAULT_ALPHA, DEFAULT_MAX_ORDER};

fn main() {
    let x: Vec<f64> = (0..60).map(|i| i as f64 / 59.0).collect();

    let y: Vec<f64> = x.iter().enumerate().map(|(i, &v)| saturation(3.1, 0.578, v) + 0.01 * ((i * 37 % 11) as f64 - 5.0) / 5.0).collect();
    let e = fit_exponential_saturation(&x, &y).unwrap();
    println!("y = {:.3} (1 - exp(-{:.3} x)), RSE {:.4}", e.params[1], e.params[0], e.residual_std_error);

    let y: Vec<f64> = x.iter().map(|&v| polyval(&[-0.002, 0.168, -1.112, 4.447, -3.291], v)).collect();
    let p = fit_polynomial_anova(&x, &y, DEFAULT_MAX_ORDER, DEFAULT_ALPHA).unwrap();
    println!("selected {:?}, coefficients {:.3?}", p.model_kind, p.params);
    for step in &p.selection_trace {
        println!("  order {} vs {}: F = {:.3e}, p = {:.3e}", step.order, step.order - 1, step.f_statistic, step.p_value);
    }
}
