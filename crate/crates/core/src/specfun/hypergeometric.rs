use num_complex::Complex64 as C64;

use super::ParamLists;
use crate::error::{Error, Result};

/// Hard cap on the number of series terms.
pub const HYP_TERM_BUDGET: usize = 10_000;

/// Relative threshold of the stopping rule.
const STOP_REL: f64 = 1e-17;

/// Mantissa renormalisation bounds for the term recursion.
const RESCALE_HI: f64 = 1e100;
const RESCALE_LO: f64 = 1e-100;

/// Result of a generalized hypergeometric summation, stored as
/// `scaled * exp(log_scale)` so that values far outside the binary64 range
/// stay representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypSeries {
    pub scaled: C64,
    pub log_scale: f64,
    /// Estimated magnitude of the discarded tail relative to the summed
    /// magnitudes.
    pub tail_estimate: f64,
    pub terms: usize,
}

impl HypSeries {
    fn exact(value: C64) -> Self {
        HypSeries { scaled: value, log_scale: 0.0, tail_estimate: 0.0, terms: 1 }
    }

    /// The value itself; overflows to infinity if it is not representable.
    pub fn value(&self) -> C64 {
        self.scaled * self.log_scale.exp()
    }

    /// ln |value|.
    pub fn ln_abs(&self) -> f64 {
        self.scaled.norm().ln() + self.log_scale
    }
}

/// Generalized hypergeometric function pFq(a; b; x) by direct summation.
///
/// Parameters shared between the two lists are cancelled first; if nothing is
/// left the function is the exponential. The series is summed with every term
/// held as (mantissa, log-scale, phase), stopping when the last term and its
/// geometric tail estimate are both below `1e-17` of the accumulated term
/// magnitudes.
pub fn hyp_pfq(params: &ParamLists, x: C64) -> Result<HypSeries> {
    if !(x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::domain("hyp_pfq", format!("argument {x} is not finite")));
    }
    let reduced = params.reduced();
    let (p, q) = (reduced.p(), reduced.q());
    if p > q + 1 {
        return Err(Error::Divergent {
            function: "hyp_pfq",
            detail: format!("p = {p} > q + 1 = {}", q + 1),
        });
    }
    let modulus = x.norm();
    if p == q + 1 && modulus >= 1.0 {
        return Err(Error::Divergent {
            function: "hyp_pfq",
            detail: format!("p = q + 1 requires |x| < 1, got |x| = {modulus}"),
        });
    }
    if modulus == 0.0 {
        return Ok(HypSeries::exact(C64::new(1.0, 0.0)));
    }
    if p == 0 && q == 0 {
        // 0F0(;;x) = e^x
        return Ok(HypSeries {
            scaled: C64::new(x.im.cos(), x.im.sin()),
            log_scale: x.re,
            tail_estimate: 0.0,
            terms: 0,
        });
    }

    let phase = x.arg();
    let ln_stop = STOP_REL.ln();

    // Pass 1: term magnitudes as (mantissa, log-scale).
    let mut mags: Vec<(f64, f64)> = Vec::with_capacity(64);
    let mut mantissa = 1.0f64;
    let mut scale = 0.0f64;
    let mut acc_log = 0.0f64; // ln of the accumulated magnitudes
    let mut tail_log = f64::NEG_INFINITY;
    mags.push((mantissa, scale));
    let mut converged = false;
    for n in 0..HYP_TERM_BUDGET {
        let nf = n as f64;
        let mut ratio = modulus / (nf + 1.0);
        for &ai in reduced.a() {
            ratio *= ai + nf;
        }
        for &bj in reduced.b() {
            ratio /= bj + nf;
        }
        mantissa *= ratio;
        if mantissa == 0.0 {
            converged = true;
            tail_log = f64::NEG_INFINITY;
            break;
        }
        if !(RESCALE_LO..=RESCALE_HI).contains(&mantissa) {
            scale += mantissa.ln();
            mantissa = 1.0;
        }
        mags.push((mantissa, scale));
        let term_log = mantissa.ln() + scale;
        acc_log = log_add_exp(acc_log, term_log);
        if term_log < ln_stop + acc_log && ratio < 1.0 {
            let tail = term_log + (ratio / (1.0 - ratio)).ln();
            if tail < ln_stop + acc_log {
                converged = true;
                tail_log = tail;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence { function: "hyp_pfq", iterations: HYP_TERM_BUDGET });
    }

    // Pass 2: sum relative to the largest term.
    let max_log = mags
        .iter()
        .map(|&(m, s)| m.ln() + s)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut sum = C64::new(0.0, 0.0);
    let real_axis = phase == 0.0;
    for (n, &(m, s)) in mags.iter().enumerate() {
        let w = m * (s - max_log).exp();
        if real_axis {
            sum.re += w;
        } else {
            let ph = n as f64 * phase;
            sum += C64::new(w * ph.cos(), w * ph.sin());
        }
    }
    Ok(HypSeries {
        scaled: sum,
        log_scale: max_log,
        tail_estimate: (tail_log - acc_log).exp(),
        terms: mags.len(),
    })
}

/// ln pFq(a; b; x) for real x ≥ 0, where the series is positive.
pub fn hyp_pfq_log_real(params: &ParamLists, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain("hyp_pfq_log_real", format!("x = {x} must be >= 0")));
    }
    Ok(hyp_pfq(params, C64::new(x, 0.0))?.ln_abs())
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}
