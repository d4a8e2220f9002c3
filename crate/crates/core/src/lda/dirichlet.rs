use statrs::function::gamma::ln_gamma;

use super::LdaError;

const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Log density of `Dir(alpha)` at `z`.
pub fn dirichlet_ln_pdf(z: &[f64], alpha: &[f64]) -> Result<f64, LdaError> {
    if z.len() != alpha.len() || z.is_empty() {
        return Err(LdaError::NotOnSimplex(format!(
            "{} coordinates for {} concentrations",
            z.len(),
            alpha.len()
        )));
    }
    if alpha.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(LdaError::InvalidHyperParams(
            "concentrations must be positive".into(),
        ));
    }
    let total: f64 = z.iter().sum();
    if z.iter().any(|x| !(0.0..=1.0).contains(x)) || (total - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(LdaError::NotOnSimplex(format!("{z:?} sums to {total}")));
    }

    let alpha_sum: f64 = alpha.iter().sum();
    let mut log_density = ln_gamma(alpha_sum) - alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>();
    for (&x, &a) in z.iter().zip(alpha) {
        if a == 1.0 {
            continue;
        }
        if x == 0.0 {
            return Err(LdaError::NotOnSimplex(format!(
                "zero coordinate where concentration is {a}"
            )));
        }
        log_density += (a - 1.0) * x.ln();
    }
    Ok(log_density)
}

/// `Γ(α₀) / ∏ Γ(α_i) · ∏ z_i^(α_i - 1)` with `α₀ = Σ α_i`.
pub fn dirichlet_pdf(z: &[f64], alpha: &[f64]) -> Result<f64, LdaError> {
    dirichlet_ln_pdf(z, alpha).map(f64::exp)
}
