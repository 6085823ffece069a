//! Mixed states: Boltzmann density operators, the partial trace of the
//! thermal vacuum, thermal averages, and the Husimi Q and Glauber P
//! representations over Barut-Girardello states.
//!
//! All density operators here are diagonal in the Fock basis and whole-space
//! quantities factor over physical ⊗ tilde, so only the diagonal weights are
//! ever stored.

use num_complex::Complex64 as C64;

use crate::coherent::MomentCheck;
use crate::error::{Error, Result};
use crate::model::{DeformedModel, Truncation};
use crate::specfun::{hyp_pfq_log_real, meijer_weight_log, meijer_weight_log_ratio, quad_semiinfinite_with, QuadConfig};
use crate::thermal::{partition, Partition, ThermalAngle, ThermalVacuum};

/// ln of the smallest positive normal double; a weight below this has
/// underflowed in linear space.
const LN_MIN_POSITIVE: f64 = -708.3964185322641;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalDensity {
    /// p_n, n = 0..=n_max.
    pub weights: Vec<f64>,
    pub tail_weight: f64,
}

impl DiagonalDensity {
    pub fn trace(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn from_partition(p: &Partition) -> Self {
        DiagonalDensity { weights: p.weights.clone(), tail_weight: p.tail_weight }
    }
}

/// ρ ⊗ ρ̃, kept as its two factors.
#[derive(Debug, Clone, PartialEq)]
pub struct WholeDensity {
    pub physical: DiagonalDensity,
    pub tilde: DiagonalDensity,
}

impl WholeDensity {
    pub fn new(physical: DiagonalDensity, tilde: DiagonalDensity) -> Self {
        WholeDensity { physical, tilde }
    }

    pub fn trace(&self) -> f64 {
        self.physical.trace() * self.tilde.trace()
    }

    /// ⟨n, m̃|ρ ⊗ ρ̃|n, m̃⟩.
    pub fn weight(&self, n: usize, m: usize) -> f64 {
        self.physical.weights[n] * self.tilde.weights[m]
    }
}

/// Boltzmann density p_n = e^{−βE_n}/Z.
pub fn density_build(model: &DeformedModel, beta: f64, trunc: &Truncation) -> Result<DiagonalDensity> {
    Ok(DiagonalDensity::from_partition(&partition(model, beta, trunc)?))
}

/// Tr_tilde |0(β)⟩⟨0(β)|, whose diagonal is C_n².
pub fn partial_trace_tilde(tv: &ThermalVacuum) -> DiagonalDensity {
    DiagonalDensity { weights: tv.coeffs.iter().map(|c| c * c).collect(), tail_weight: tv.tail_weight }
}

fn check_len(obs: &[f64], trunc: &Truncation) -> Result<()> {
    if obs.len() == trunc.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: trunc.dim(), got: obs.len() })
    }
}

/// Σ p_n·obs[n] for an observable diagonal in the Fock basis.
pub fn thermal_average(model: &DeformedModel, obs_diag: &[f64], beta: f64, trunc: &Truncation) -> Result<f64> {
    check_len(obs_diag, trunc)?;
    let rho = density_build(model, beta, trunc)?;
    Ok(rho.weights.iter().zip(obs_diag).map(|(p, o)| p * o).sum())
}

/// ⟨0(β)|Ô ⊗ 1̃|0(β)⟩ through the coefficient matrix of the thermal vacuum.
pub fn vacuum_average(tv: &ThermalVacuum, obs_diag: &[f64]) -> Result<f64> {
    let d = tv.coeffs.len();
    if obs_diag.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: obs_diag.len() });
    }
    let op = ndarray::Array2::from_diag(&ndarray::Array1::from(obs_diag.to_vec()));
    tv.expect(&op)
}

fn cosh2(model: &DeformedModel, beta: f64) -> Result<f64> {
    Ok(ThermalAngle::new(beta * model.hbar_omega())?.cosh2)
}

/// Q(z) = ⟨z;β|ρ|z;β⟩ = (1/F(t))·Σ p_n tⁿ/ρ_BG(n), t = |z|²cosh²θ.
pub fn husimi_q(model: &DeformedModel, z: C64, beta: f64, trunc: &Truncation) -> Result<f64> {
    let rho = density_build(model, beta, trunc)?;
    husimi_from_density(model, &rho, z, beta)
}

fn husimi_from_density(model: &DeformedModel, rho: &DiagonalDensity, z: C64, beta: f64) -> Result<f64> {
    let t = z.norm_sqr() * cosh2(model, beta)?;
    if t == 0.0 {
        return Ok(rho.weights[0]);
    }
    let ln_f = hyp_pfq_log_real(model.params(), t)?;
    let ln_t = t.ln();
    Ok(rho
        .weights
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(n, &p)| (p.ln() + n as f64 * ln_t - model.rho_bg_log(n) - ln_f).exp())
        .sum())
}

/// Q of the whole space at (z, σ̃); it factors into single-mode values.
pub fn husimi_q_whole(model: &DeformedModel, z: C64, sigma: C64, beta: f64, trunc: &Truncation) -> Result<f64> {
    let rho = density_build(model, beta, trunc)?;
    Ok(husimi_from_density(model, &rho, z, beta)? * husimi_from_density(model, &rho, sigma, beta)?)
}

fn quad_cfg(rel_tol: f64) -> QuadConfig {
    QuadConfig { abs_tol: 0.0, rel_tol, max_panels: 4000 }
}

/// ∫dμ(z)·Q(z) over the plane. The measure carries a factor F(t) that cancels
/// the 1/F of Q, leaving Γ(a/b)·∫ G(t)·Σ p_n tⁿ/ρ_BG(n) dt.
pub fn husimi_normalization(model: &DeformedModel, beta: f64, trunc: &Truncation) -> Result<f64> {
    let rho = density_build(model, beta, trunc)?;
    let params = model.params();
    meijer_weight_log(params, 1.0)?;
    let gr = model.gamma_ratio_log();
    let terms: Vec<(f64, f64)> = rho
        .weights
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(n, &p)| (n as f64, p.ln() - model.rho_bg_log(n)))
        .collect();
    let f = |t: f64| match meijer_weight_log(params, t) {
        Ok(lg) if lg == f64::NEG_INFINITY => 0.0,
        Ok(lg) => {
            let ln_t = t.ln();
            let ln_sum = log_sum_exp(terms.iter().map(|&(n, c)| c + n * ln_t));
            (gr + lg + ln_sum).exp()
        }
        Err(_) => f64::NAN,
    };
    Ok(quad_semiinfinite_with(f, &quad_cfg(1e-10))?.value)
}

fn log_sum_exp(it: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + it.map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn require_linear(model: &DeformedModel) -> Result<()> {
    if model.is_linear() {
        Ok(())
    } else {
        Err(Error::Precondition(
            "the P-representation needs a linear spectrum; a generalized spectrum has no closed-form P".into(),
        ))
    }
}

/// P(t) = (e^{βħω} − 1)·G(t·e^{βħω})/G(t) at t = |z|²cosh²θ.
///
/// Works in log space. For weights other than the exponential one the ratio
/// is refused with `OutOfRange` once G(t) itself would underflow.
pub fn p_function_linear(model: &DeformedModel, z: C64, beta: f64) -> Result<f64> {
    require_linear(model)?;
    let x = beta * model.hbar_omega();
    let t = z.norm_sqr() * cosh2(model, beta)?;
    let params = model.params();
    let exponential = params.reduced().q() == 0 && params.reduced().p() == 0;
    if t > 0.0 && !exponential {
        let den = meijer_weight_log(params, t)?;
        if den < LN_MIN_POSITIVE {
            return Err(Error::OutOfRange(format!(
                "P-function weight G({t}) underflows (ln G = {den}); ratio is not representable"
            )));
        }
    }
    let ratio = meijer_weight_log_ratio(params, t, x.exp())?;
    Ok((x.exp_m1().ln() + ratio).exp())
}

/// P of the whole space at (z, σ̃), the product of single-mode values.
pub fn p_function_whole(model: &DeformedModel, z: C64, sigma: C64, beta: f64) -> Result<f64> {
    Ok(p_function_linear(model, z, beta)? * p_function_linear(model, sigma, beta)?)
}

/// lhs = ∫ S(t)·tⁿ dt with S(t) = (e^{βħω} − 1)·G(t·e^{βħω});
/// rhs = p_n·ρ_BG(n)/Γ(a/b).
pub fn p_moment_check(model: &DeformedModel, n: usize, beta: f64, trunc: &Truncation) -> Result<MomentCheck> {
    require_linear(model)?;
    let rho = density_build(model, beta, trunc)?;
    if n >= rho.weights.len() {
        return Err(Error::Precondition(format!("moment {n} exceeds the truncation")));
    }
    let x = beta * model.hbar_omega();
    let params = model.params();
    meijer_weight_log(params, 1.0)?;
    let ln_pref = x.exp_m1().ln();
    let scale = x.exp();
    let nf = n as f64;
    let f = |t: f64| match meijer_weight_log(params, t * scale) {
        Ok(lg) if lg == f64::NEG_INFINITY => 0.0,
        Ok(lg) => (ln_pref + lg + nf * t.ln()).exp(),
        Err(_) => f64::NAN,
    };
    let lhs = quad_semiinfinite_with(f, &quad_cfg(1e-10))?.value;
    let rhs = (rho.weights[n].ln() + model.rho_bg_log(n) - model.gamma_ratio_log()).exp();
    Ok(MomentCheck { lhs, rhs })
}

/// ∫dμ·P·⟨z;β|Ô|z;β⟩ for a diagonal observable. After the angular integral
/// this is Γ(a/b)·∫ S(t)·Σ obs[n]·tⁿ/ρ_BG(n) dt.
pub fn average_via_p(model: &DeformedModel, obs_diag: &[f64], beta: f64, trunc: &Truncation) -> Result<f64> {
    require_linear(model)?;
    check_len(obs_diag, trunc)?;
    let x = beta * model.hbar_omega();
    let params = model.params();
    meijer_weight_log(params, 1.0)?;
    let ln_pref = x.exp_m1().ln() + model.gamma_ratio_log();
    let scale = x.exp();
    let rho_log: Vec<f64> = (0..obs_diag.len()).map(|n| model.rho_bg_log(n)).collect();
    let f = |t: f64| {
        let lg = match meijer_weight_log(params, t * scale) {
            Ok(lg) if lg == f64::NEG_INFINITY => return 0.0,
            Ok(lg) => lg,
            Err(_) => return f64::NAN,
        };
        let ln_t = t.ln();
        let logs = obs_diag
            .iter()
            .zip(&rho_log)
            .enumerate()
            .filter(|(_, (o, _))| **o != 0.0)
            .map(|(n, (_, r))| n as f64 * ln_t - r);
        let max = logs.clone().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return 0.0;
        }
        let s: f64 = obs_diag
            .iter()
            .zip(&rho_log)
            .enumerate()
            .filter(|(_, (o, _))| **o != 0.0)
            .map(|(n, (o, r))| o * (n as f64 * ln_t - r - max).exp())
            .sum();
        s * (ln_pref + lg + max).exp()
    };
    Ok(quad_semiinfinite_with(f, &quad_cfg(1e-10))?.value)
}
