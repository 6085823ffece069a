//! The weight G^{q+1,0}_{p,q+1}(t | a−1 ; 0, b−1) whose Mellin moments are
//! Γ(s)·∏Γ(b_j−1+s)/∏Γ(a_i−1+s).
//!
//! Closed forms exist for two families and are the only ones supported:
//!
//! * (p, q) = (0, 0): G = e^{−t}
//! * (p, q) = (0, 1): G = 2 t^{(b−1)/2} K_{b−1}(2√t)

use super::bessel::bessel_k_scaled;
use super::gamma::log_gamma;
use super::ParamLists;
use crate::error::{Error, Result};

enum Family {
    Exponential,
    Bessel { order: f64 },
}

fn family(params: &ParamLists) -> Result<Family> {
    let r = params.reduced();
    match (r.p(), r.q()) {
        (0, 0) => Ok(Family::Exponential),
        (0, 1) => Ok(Family::Bessel { order: r.b()[0] - 1.0 }),
        (p, q) => Err(Error::Unsupported(format!(
            "no closed-form moment weight for (p, q) = ({p}, {q})"
        ))),
    }
}

/// ln G(t) for t > 0.
pub fn meijer_weight_log(params: &ParamLists, t: f64) -> Result<f64> {
    if !(t > 0.0) || t.is_nan() {
        return Err(Error::domain("meijer_weight", format!("t = {t} must be positive")));
    }
    if t.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    match family(params)? {
        Family::Exponential => Ok(-t),
        Family::Bessel { order } => {
            let x = 2.0 * t.sqrt();
            let ks = bessel_k_scaled(order, x)?;
            Ok(std::f64::consts::LN_2 + 0.5 * order * t.ln() + ks.ln() - x)
        }
    }
}

/// The moment weight G(t), t > 0.
pub fn meijer_weight(params: &ParamLists, t: f64) -> Result<f64> {
    Ok(meijer_weight_log(params, t)?.exp())
}

/// ln [G(scale·t) / G(t)], including the t → 0⁺ limit at t = 0.
pub fn meijer_weight_log_ratio(params: &ParamLists, t: f64, scale: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::domain("meijer_weight_log_ratio", format!("scale = {scale} must be positive")));
    }
    if t < 0.0 || t.is_nan() {
        return Err(Error::domain("meijer_weight_log_ratio", format!("t = {t} must be >= 0")));
    }
    if t == 0.0 {
        return match family(params)? {
            Family::Exponential => Ok(0.0),
            // G(t) ~ Γ(ν) for ν > 0, ~ −ln t for ν = 0 and ~ Γ(|ν|)·t^ν for ν < 0
            Family::Bessel { order } => Ok(if order < 0.0 { order * scale.ln() } else { 0.0 }),
        };
    }
    Ok(meijer_weight_log(params, scale * t)? - meijer_weight_log(params, t)?)
}

/// ln [Γ(s)·∏Γ(b_j−1+s)/∏Γ(a_i−1+s)], the s-th Mellin moment of the weight.
pub fn meijer_moment_rhs(params: &ParamLists, s: f64) -> Result<f64> {
    let mut acc = log_gamma(s)?;
    for &b in params.b() {
        acc += log_gamma(b - 1.0 + s)
            .map_err(|_| Error::domain("meijer_moment_rhs", format!("Γ(b−1+s) with b = {b}, s = {s}")))?;
    }
    for &a in params.a() {
        acc -= log_gamma(a - 1.0 + s)
            .map_err(|_| Error::domain("meijer_moment_rhs", format!("Γ(a−1+s) with a = {a}, s = {s}")))?;
    }
    Ok(acc)
}
