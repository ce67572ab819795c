//! Exact grand partition function of one-dimensional hard rods.

use crate::error::{Error, Result};

/// log Ξ = log Σ_{n=0}^{⌊ℓ/a⌋+1} λ^n (ℓ − (n−1)a)₊^n / n!.
pub fn tonks_log_xi(length: f64, core: f64, lambda: f64) -> Result<f64> {
    Ok(log_terms(length, core, lambda)?.0)
}

fn log_terms(length: f64, core: f64, lambda: f64) -> Result<(f64, Vec<f64>)> {
    if !(length > 0.0 && core > 0.0 && lambda >= 0.0) {
        return Err(Error::Invalid(format!("need length > 0, core > 0, lambda >= 0; got {length}, {core}, {lambda}")));
    }
    let n_top = (length / core).floor() as usize + 1;
    let mut logs = vec![0.0];
    let mut log_fact = 0.0;
    for n in 1..=n_top {
        log_fact += (n as f64).ln();
        let free = length - (n as f64 - 1.0) * core;
        if free <= 0.0 || lambda == 0.0 {
            break;
        }
        logs.push(n as f64 * (lambda * free).ln() - log_fact);
    }
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = logs.iter().map(|l| (l - m).exp()).sum();
    Ok((m + s.ln(), logs))
}

/// (Ξ, βp = log Ξ / ℓ).
pub fn tonks_reference(length: f64, core: f64, lambda: f64) -> Result<(f64, f64)> {
    let log_xi = tonks_log_xi(length, core, lambda)?;
    Ok((log_xi.exp(), log_xi / length))
}

/// ⟨N⟩ = λ ∂_λ log Ξ, exactly.
pub fn tonks_mean_number(length: f64, core: f64, lambda: f64) -> Result<f64> {
    let (log_xi, logs) = log_terms(length, core, lambda)?;
    Ok(logs.iter().enumerate().map(|(n, l)| n as f64 * (l - log_xi).exp()).sum())
}
