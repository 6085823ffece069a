use crate::error::{Error, Result};

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("log_gamma", format!("x = {x} must be positive and finite")));
    }
    Ok(libm::lgamma(x))
}

/// ln (x)_n = ln Γ(x+n) − ln Γ(x).
pub fn pochhammer_log(x: f64, n: u64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("pochhammer_log", format!("x = {x} must be positive and finite")));
    }
    if n == 0 {
        return Ok(0.0);
    }
    // Short products are exact to a few ulps; beyond that the gamma difference
    // avoids overflow.
    if n <= 8 && x < 1e30 {
        let prod: f64 = (0..n).map(|k| x + k as f64).product();
        return Ok(prod.ln());
    }
    Ok(libm::lgamma(x + n as f64) - libm::lgamma(x))
}
