//! Thermal coherent states of Barut-Girardello and Klauder-Perelomov type on
//! the truncated Fock basis.
//!
//! Both kinds have coefficients c_n = wⁿ/√ρ(n)/√N(|w|²) with the thermal label
//! w = z·coshθ(β); they differ in the structure constants (ρ_BG or ρ_KP) and
//! in the normalization function, pFq(a;b;·) or qFp(b;a;·).

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{ladder_matrices, DeformedModel, LadderMatrices, Truncation};
use crate::specfun::{hyp_pfq, hyp_pfq_log_real, meijer_moment_rhs, meijer_weight_log, quad_semiinfinite_with};
use crate::specfun::{ParamLists, QuadConfig};
use crate::thermal::ThermalAngle;

/// Upper bound on the number of tail terms summed past the cutoff.
const TAIL_TERM_BUDGET: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CsKind {
    /// Barut-Girardello: eigenstates of the lowering operator.
    Bg,
    /// Klauder-Perelomov: displaced-vacuum type, dual structure constants.
    Kp,
}

impl CsKind {
    pub fn name(self) -> &'static str {
        match self {
            CsKind::Bg => "bg",
            CsKind::Kp => "kp",
        }
    }

    fn rho_log(self, model: &DeformedModel, n: usize) -> f64 {
        match self {
            CsKind::Bg => model.rho_bg_log(n),
            CsKind::Kp => model.rho_kp_log(n),
        }
    }

    /// Parameter lists of the normalization series.
    fn norm_params(self, model: &DeformedModel) -> ParamLists {
        match self {
            CsKind::Bg => model.params().clone(),
            CsKind::Kp => model.params().swapped(),
        }
    }
}

impl std::str::FromStr for CsKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bg" => Ok(CsKind::Bg),
            "kp" => Ok(CsKind::Kp),
            other => Err(Error::Precondition(format!("unknown coherent-state kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalCoherentState {
    pub kind: CsKind,
    pub z: C64,
    pub beta: f64,
    pub coeffs: Vec<C64>,
    /// ln N(|z|²cosh²θ).
    pub norm_log: f64,
    /// Σ_{n>n_max} |c_n|², from the continued series.
    pub tail_weight: f64,
}

impl ThermalCoherentState {
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Σ c̄_n(self)·c_n(other).
    pub fn inner(&self, other: &ThermalCoherentState) -> C64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum()
    }
}

fn thermal_label(model: &DeformedModel, z: C64, beta: f64) -> Result<(ThermalAngle, C64)> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain("beta", format!("β = {beta} must be positive and finite")));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain("coherent state", format!("label {z} is not finite")));
    }
    let angle = ThermalAngle::new(beta * model.hbar_omega())?;
    Ok((angle, z * angle.cosh()))
}

/// ln N for label z at inverse temperature β.
pub fn cs_norm_log(model: &DeformedModel, kind: CsKind, z: C64, beta: f64) -> Result<f64> {
    let (_, w) = thermal_label(model, z, beta)?;
    hyp_pfq_log_real(&kind.norm_params(model), w.norm_sqr())
}

pub fn cs_build(
    model: &DeformedModel,
    kind: CsKind,
    z: C64,
    beta: f64,
    trunc: &Truncation,
) -> Result<ThermalCoherentState> {
    let (_, w) = thermal_label(model, z, beta)?;
    let dim = trunc.dim();
    let mut coeffs = vec![C64::new(0.0, 0.0); dim];
    if w.norm_sqr() == 0.0 {
        coeffs[0] = C64::new(1.0, 0.0);
        return Ok(ThermalCoherentState { kind, z, beta, coeffs, norm_log: 0.0, tail_weight: 0.0 });
    }
    let x = w.norm_sqr();
    let norm_log = hyp_pfq_log_real(&kind.norm_params(model), x)?;
    let ln_w = w.norm().ln();
    let phase = w.arg();
    for (n, c) in coeffs.iter_mut().enumerate() {
        let ln_mag = n as f64 * ln_w - 0.5 * kind.rho_log(model, n) - 0.5 * norm_log;
        *c = C64::from_polar(ln_mag.exp(), n as f64 * phase);
    }
    let tail_weight = tail_weight(model, kind, x, norm_log, trunc.n_max())?;
    trunc.check_tail(tail_weight)?;
    // keep Σ|c_n|² ≤ 1 against rounding
    for _ in 0..8 {
        if coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() <= 1.0 {
            break;
        }
        coeffs.iter_mut().for_each(|c| *c *= 1.0 - f64::EPSILON);
    }
    Ok(ThermalCoherentState { kind, z, beta, coeffs, norm_log, tail_weight })
}

/// Σ_{n>n_max} xⁿ/ρ(n)/N summed in log space until the remainder is negligible.
fn tail_weight(model: &DeformedModel, kind: CsKind, x: f64, norm_log: f64, n_max: usize) -> Result<f64> {
    let ln_x = x.ln();
    let ln_stop = 1e-17f64.ln();
    let term = |n: usize| n as f64 * ln_x - kind.rho_log(model, n) - norm_log;
    let mut acc = f64::NEG_INFINITY;
    let mut prev = term(n_max);
    for n in n_max + 1..n_max + 1 + TAIL_TERM_BUDGET {
        let t = term(n);
        acc = log_add_exp(acc, t);
        let ln_ratio = t - prev;
        prev = t;
        if ln_ratio < 0.0 {
            // geometric remainder t·r/(1 − r), valid once the ratio decreases
            let rest = t + ln_ratio - (-ln_ratio.exp_m1()).ln();
            if rest < acc + ln_stop || rest < -745.0 {
                return Ok(acc.exp());
            }
        }
    }
    Err(Error::NonConvergence { function: "coherent tail", iterations: TAIL_TERM_BUDGET })
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// ⟨z;β|z′;β⟩ = F(z̄·z′·cosh²θ)/√(F(|z|²cosh²θ)·F(|z′|²cosh²θ)).
pub fn overlap(model: &DeformedModel, kind: CsKind, z: C64, zp: C64, beta: f64) -> Result<C64> {
    let (angle, _) = thermal_label(model, z, beta)?;
    let params = kind.norm_params(model);
    let c2 = angle.cosh2;
    let num = hyp_pfq(&params, z.conj() * zp * c2)?;
    let n1 = hyp_pfq_log_real(&params, z.norm_sqr() * c2)?;
    let n2 = hyp_pfq_log_real(&params, zp.norm_sqr() * c2)?;
    Ok(num.scaled * (num.log_scale - 0.5 * (n1 + n2)).exp())
}

/// ‖Â₋c − z·coshθ·c‖₂ over n = 0..n_max−1; the top component only sees the
/// truncation edge.
pub fn eigen_residual(model: &DeformedModel, kind: CsKind, z: C64, beta: f64, trunc: &Truncation) -> Result<f64> {
    if kind != CsKind::Bg {
        return Err(Error::Precondition(
            "only Barut-Girardello states are eigenstates of the lowering operator".into(),
        ));
    }
    let state = cs_build(model, kind, z, beta, trunc)?;
    Ok(lowering_residual(&ladder_matrices(model, trunc), &state.coeffs, z * ThermalAngle::new(beta * model.hbar_omega())?.cosh()))
}

fn lowering_residual(ladder: &LadderMatrices, c: &[C64], w: C64) -> f64 {
    let lowered = ladder.lower(c);
    let n = c.len() - 1;
    lowered[..n].iter().zip(&c[..n]).map(|(l, c)| (l - w * c).norm_sqr()).sum::<f64>().sqrt()
}

/// Result of a moment check: the integral and the value it must reproduce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl MomentCheck {
    pub fn rel_err(&self) -> f64 {
        ((self.lhs - self.rhs) / self.rhs).abs()
    }
}

/// n-th diagonal moment of the resolution-of-identity measure.
///
/// The integral runs over r = |z|² with the scaled variable t = r·cosh²θ
/// inside the weight and the Jacobian cosh²θ in front, so that the result is
/// independent of β only through an actual cancellation:
/// lhs = ∫ Γ(a/b)·G(r·cosh²θ)·(r·cosh²θ)ⁿ·cosh²θ dr, rhs = ρ_BG(n).
pub fn identity_moment_check(model: &DeformedModel, n: usize, beta: f64) -> Result<MomentCheck> {
    let (angle, _) = thermal_label(model, C64::new(0.0, 0.0), beta)?;
    let params = model.params();
    meijer_weight_log(params, 1.0)?;
    let c2 = angle.cosh2;
    let ln_c2 = c2.ln();
    let gr = model.gamma_ratio_log();
    let nf = n as f64;
    let f = |r: f64| {
        let t = r * c2;
        match meijer_weight_log(params, t) {
            Ok(lg) if lg == f64::NEG_INFINITY => 0.0,
            Ok(lg) => (gr + lg + nf * t.ln() + ln_c2).exp(),
            Err(_) => f64::NAN,
        }
    };
    let r = quad_semiinfinite_with(f, &QuadConfig { abs_tol: 0.0, rel_tol: 1e-12, max_panels: 4000 })?;
    Ok(MomentCheck { lhs: r.value, rhs: model.rho_bg_log(n).exp() })
}

/// The closed-form moment Γ(a/b)·Γ(n+1)∏Γ(b−1+n+1)/∏Γ(a−1+n+1), which must equal ρ_BG(n).
pub fn identity_moment_closed(model: &DeformedModel, n: usize) -> Result<f64> {
    Ok((model.gamma_ratio_log() + meijer_moment_rhs(model.params(), n as f64 + 1.0)?).exp())
}

/// Operator-ordering substitution: ⟨F(#A₊(β)A₋(β)#)⟩ → F(|z|²cosh²θ). A
/// symbolic rule, not a matrix expectation value.
pub fn doot_expect<F: Fn(f64) -> f64>(model: &DeformedModel, func: F, z: C64, beta: f64) -> Result<f64> {
    let (_, w) = thermal_label(model, z, beta)?;
    Ok(func(w.norm_sqr()))
}

/// Product state |z;β⟩ ⊗ |σ̃;β⟩ stored as its coefficient matrix, rows indexing
/// the physical and columns the tilde factor.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    pub coeffs: Array2<C64>,
    pub physical: ThermalCoherentState,
    pub tilde: ThermalCoherentState,
}

impl TwoModeState {
    pub fn frobenius_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Â₋ acting on the physical index.
    pub fn lower_physical(&self, ladder: &LadderMatrices) -> Array2<C64> {
        let am = ladder.a_minus().mapv(|v| C64::new(v, 0.0));
        am.dot(&self.coeffs)
    }

    /// Â₋ acting on the tilde index.
    pub fn lower_tilde(&self, ladder: &LadderMatrices) -> Array2<C64> {
        let am = ladder.a_minus().mapv(|v| C64::new(v, 0.0));
        self.coeffs.dot(&am.t())
    }
}

pub fn two_mode_build(
    model: &DeformedModel,
    kind: CsKind,
    z: C64,
    sigma_tilde: C64,
    beta: f64,
    trunc: &Truncation,
) -> Result<TwoModeState> {
    let physical = cs_build(model, kind, z, beta, trunc)?;
    let tilde = cs_build(model, kind, sigma_tilde, beta, trunc)?;
    let d = trunc.dim();
    let coeffs = Array2::from_shape_fn((d, d), |(i, j)| physical.coeffs[i] * tilde.coeffs[j]);
    Ok(TwoModeState { coeffs, physical, tilde })
}
