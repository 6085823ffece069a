//! Finite-temperature side: the thermal angle θ(β), partition function,
//! thermal vacuum, thermodynamic quantities and the Bogoliubov-rotated
//! ladder operators.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{spectral_ladder, DeformedModel, LadderMatrices, Spectrum, Truncation};
use crate::specfun::{quad_semiinfinite_with, QuadConfig};

/// Below this value of βħω the thermal angle is treated as divergent.
const MIN_BETA_HW: f64 = 1e-12;

/// Finite-difference step relative to β for derivative checks.
pub const FD_REL_STEP: f64 = 1e-5;

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("beta", format!("β = {beta} must be positive and finite")))
    }
}

/// Hyperbolic functions of θ(β), each evaluated from x = βħω without
/// cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalAngle {
    pub theta: f64,
    /// tanh θ = e^{−x/2}.
    pub tanh: f64,
    /// cosh²θ = 1/(1 − e^{−x}).
    pub cosh2: f64,
    /// sinh²θ = 1/(e^x − 1).
    pub sinh2: f64,
}

impl ThermalAngle {
    pub fn new(beta_hw: f64) -> Result<Self> {
        if beta_hw.is_nan() || beta_hw < 0.0 {
            return Err(Error::domain("theta_of_beta", format!("βħω = {beta_hw} must be positive")));
        }
        if beta_hw < MIN_BETA_HW {
            return Err(Error::Divergent {
                function: "theta_of_beta",
                detail: format!("θ diverges as βħω → 0 (βħω = {beta_hw})"),
            });
        }
        let tanh = (-0.5 * beta_hw).exp();
        // artanh y = ½[ln(1+y) − ln(1−y)], with 1 − y = −expm1(−x/2)
        let theta = 0.5 * (tanh.ln_1p() - (-(-0.5 * beta_hw).exp_m1()).ln());
        let cosh2 = -1.0 / (-beta_hw).exp_m1();
        let sinh2 = 1.0 / beta_hw.exp_m1();
        Ok(ThermalAngle { theta, tanh, cosh2, sinh2 })
    }

    pub fn cosh(&self) -> f64 {
        self.cosh2.sqrt()
    }

    pub fn sinh(&self) -> f64 {
        self.sinh2.sqrt()
    }

    /// cosh 2θ = cosh²θ + sinh²θ.
    pub fn cosh_2theta(&self) -> f64 {
        self.cosh2 + self.sinh2
    }
}

/// θ(β) = artanh(e^{−βħω/2}), the same definition for every spectrum.
pub fn theta_of_beta(model: &DeformedModel, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(ThermalAngle::new(beta * model.hbar_omega())?.theta)
}

/// Bose-Einstein occupation n_T = 1/(e^{βħω} − 1).
pub fn bose_einstein(model: &DeformedModel, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(ThermalAngle::new(beta * model.hbar_omega())?.sinh2)
}

/// Truncated Boltzmann sum with its tail bound.
///
/// Weights are held relative to the ground state, w_n = e^{−β(E_n − E_0)},
/// so that Z = e^{−βE_0}·(S + T) with S the truncated sum and T the tail
/// bound never overflows.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub beta: f64,
    /// ln Z.
    pub log_z: f64,
    /// Normalized Boltzmann weights p_n = e^{−βE_n}/Z, n = 0..=n_max.
    pub weights: Vec<f64>,
    /// Upper bound on the discarded weight, T/(S + T).
    pub tail_weight: f64,
}

impl Partition {
    pub fn z(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn n_max(&self) -> usize {
        self.weights.len() - 1
    }
}

/// Z = Σ_{n≤n_max} e^{−βE_n} plus a bound on the remaining terms.
///
/// The bound is geometric when the level gaps do not shrink beyond n_max
/// (always for linear spectra; checked on [n_max, 2·n_max] otherwise) and the
/// integral ∫ e^{−βE(x)} dx over [n_max, ∞) of the continued spectrum when
/// they do. Fails unless the bound is below `tail_tol` times the sum.
pub fn partition(model: &DeformedModel, beta: f64, trunc: &Truncation) -> Result<Partition> {
    check_beta(beta)?;
    let n_max = trunc.n_max();
    let e0 = model.energy(0);
    let log_w: Vec<f64> = (0..=n_max).map(|n| -beta * (model.energy(n) - e0)).collect();
    let sum: f64 = log_w.iter().map(|l| l.exp()).sum();
    let tail = tail_bound(model, beta, n_max, sum * trunc.tail_tol())?;
    let total = sum + tail;
    let tail_weight = tail / total;
    if !(tail < trunc.tail_tol() * sum) {
        return Err(Error::TruncationInsufficient { tail: tail_weight, tol: trunc.tail_tol(), n_max });
    }
    let ln_total = total.ln();
    let mut weights: Vec<f64> = log_w.iter().map(|l| (l - ln_total).exp()).collect();
    cap_unit_sum(&mut weights, |w| w);
    Ok(Partition { beta, log_z: -beta * e0 + ln_total, weights, tail_weight })
}

/// Rounding can push a sum that is mathematically 1 − tail a few ulps above
/// one; shrink the vector by single ulps until Σ g(v_n) ≤ 1.
pub(crate) fn cap_unit_sum(v: &mut [f64], g: impl Fn(f64) -> f64) {
    for _ in 0..8 {
        if v.iter().map(|&x| g(x)).sum::<f64>() <= 1.0 {
            return;
        }
        v.iter_mut().for_each(|x| *x *= 1.0 - f64::EPSILON);
    }
}

/// Bound on Σ_{n>n_max} e^{−β(E_n − E_0)}; `scale` is the size the bound must
/// be resolved against.
fn tail_bound(model: &DeformedModel, beta: f64, n_max: usize, scale: f64) -> Result<f64> {
    let e0 = model.energy(0);
    let reduced = model.params().reduced();
    if matches!(model.spectrum(), Spectrum::Generalized) && reduced.p() == reduced.q() + 1 {
        // bounded spectrum: the Boltzmann series diverges
        return Ok(f64::INFINITY);
    }
    let gap_at = |n: usize| model.energy(n + 1) - model.energy(n);
    let geometric = model.is_linear() || {
        let mut ok = true;
        let mut prev = gap_at(n_max);
        for n in n_max + 1..=2 * n_max {
            let g = gap_at(n);
            if g < prev * (1.0 - 1e-12) {
                ok = false;
                break;
            }
            prev = g;
        }
        ok
    };
    if geometric {
        let first = (-beta * (model.energy(n_max + 1) - e0)).exp();
        let ratio = (-beta * gap_at(n_max)).exp();
        return Ok(first / (1.0 - ratio));
    }
    // each term e^{−βE_n} is at most ∫_{n−1}^{n} e^{−βE(x)} dx
    let x0 = n_max as f64;
    let f = |t: f64| (-beta * (model.energy_at(x0 + t) - e0)).exp();
    let cfg = QuadConfig { abs_tol: 1e-3 * scale.max(f64::MIN_POSITIVE), rel_tol: 1e-6, max_panels: 4000 };
    match quad_semiinfinite_with(f, &cfg) {
        Ok(r) => Ok(r.value + r.error),
        Err(Error::Quadrature { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// e^{−βE_0}/(1 − e^{−βħω}) for linear spectra.
pub fn partition_closed_form(model: &DeformedModel, beta: f64) -> Option<f64> {
    match model.spectrum() {
        Spectrum::Linear { e0 } => Some((-beta * e0).exp() / -(-beta * model.hbar_omega()).exp_m1()),
        Spectrum::Generalized => None,
    }
}

/// Everything derived from (model, β, truncation) that the other modules need.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalContext {
    pub beta: f64,
    pub angle: ThermalAngle,
    pub partition: Partition,
}

impl ThermalContext {
    pub fn new(model: &DeformedModel, beta: f64, trunc: &Truncation) -> Result<Self> {
        check_beta(beta)?;
        let angle = ThermalAngle::new(beta * model.hbar_omega())?;
        let partition = partition(model, beta, trunc)?;
        Ok(ThermalContext { beta, angle, partition })
    }

    pub fn theta(&self) -> f64 {
        self.angle.theta
    }

    pub fn z_partition(&self) -> f64 {
        self.partition.z()
    }
}

/// The thermal vacuum |0(β)⟩ = Σ C_n |n, ñ⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalVacuum {
    pub beta: f64,
    /// C_n = √(e^{−βE_n}/Z).
    pub coeffs: Vec<f64>,
    pub tail_weight: f64,
}

impl ThermalVacuum {
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// ⟨0(β)|Ô ⊗ 1̃|0(β)⟩ for an operator on the physical factor, computed
    /// as Tr(Ψᵀ Ô Ψ) with the coefficient matrix Ψ = diag(C).
    pub fn expect(&self, op: &Array2<f64>) -> Result<f64> {
        let d = self.coeffs.len();
        if op.dim() != (d, d) {
            return Err(Error::DimensionMismatch { expected: d, got: op.nrows() });
        }
        let psi = Array2::from_diag(&ndarray::Array1::from(self.coeffs.clone()));
        Ok((psi.t().dot(op).dot(&psi)).diag().sum())
    }
}

pub fn thermal_vacuum(model: &DeformedModel, beta: f64, trunc: &Truncation) -> Result<ThermalVacuum> {
    Ok(vacuum_from_partition(&partition(model, beta, trunc)?))
}

pub fn vacuum_from_partition(p: &Partition) -> ThermalVacuum {
    let mut coeffs: Vec<f64> = p.weights.iter().map(|w| w.sqrt()).collect();
    cap_unit_sum(&mut coeffs, |c| c * c);
    ThermalVacuum { beta: p.beta, coeffs, tail_weight: p.tail_weight }
}

/// U = Σ p_n E_n.
pub fn internal_energy(model: &DeformedModel, beta: f64, trunc: &Truncation) -> Result<f64> {
    let p = partition(model, beta, trunc)?;
    Ok(p.weights.iter().enumerate().map(|(n, w)| w * model.energy(n)).sum())
}

/// F = −ln Z / β.
pub fn free_energy(model: &DeformedModel, beta: f64, trunc: &Truncation) -> Result<f64> {
    Ok(-partition(model, beta, trunc)?.log_z / beta)
}

/// ⟨0(β)|Â₊Â₋|0(β)⟩ = Σ C_n²·e(n), using the spectral number operator.
pub fn vacuum_expect_num(model: &DeformedModel, beta: f64, trunc: &Truncation) -> Result<f64> {
    let tv = thermal_vacuum(model, beta, trunc)?;
    let diag = spectral_ladder(model, trunc).number_diagonal();
    Ok(tv.coeffs.iter().zip(&diag).map(|(c, e)| c * c * e).sum())
}

/// Thermal ladder operators A₋(β) = coshθ·Â₋ − sinhθ·Â₊ and
/// A₊(β) = coshθ·Â₊ − sinhθ·Â₋ on the truncated physical basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovOps {
    pub a_minus: Array2<f64>,
    pub a_plus: Array2<f64>,
    /// e(0)·cosh 2θ, the scalar part of the thermal number operator that a
    /// nonzero ground level contributes.
    pub offset: f64,
}

impl BogoliubovOps {
    /// A₊(β)A₋(β) + e(0)·cosh 2θ.
    pub fn number_operator(&self) -> Array2<f64> {
        let mut m = self.a_plus.dot(&self.a_minus);
        m.diag_mut().mapv_inplace(|v| v + self.offset);
        m
    }
}

pub fn bogoliubov_ops(model: &DeformedModel, beta: f64, trunc: &Truncation) -> Result<BogoliubovOps> {
    check_beta(beta)?;
    let angle = ThermalAngle::new(beta * model.hbar_omega())?;
    Ok(bogoliubov_from(&spectral_ladder(model, trunc), &angle))
}

pub fn bogoliubov_from(ladder: &LadderMatrices, angle: &ThermalAngle) -> BogoliubovOps {
    let (c, s) = (angle.cosh(), angle.sinh());
    let am = ladder.a_minus();
    let ap = ladder.a_plus();
    BogoliubovOps {
        a_minus: &am * c - &ap * s,
        a_plus: &ap * c - &am * s,
        offset: ladder.offset() * angle.cosh_2theta(),
    }
}

/// ⟨A₊(β)A₋(β)⟩ in the thermal ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalExpectation {
    /// Σ p_n [cosh²θ·e(n) + sinh²θ·e(n+1)].
    pub value: f64,
    /// sinh²θ + cosh 2θ·U/ħω; only defined for linear spectra.
    pub closed_form: Option<f64>,
}

pub fn thermal_expect_ap_am(model: &DeformedModel, beta: f64, trunc: &Truncation) -> Result<ThermalExpectation> {
    let ctx = ThermalContext::new(model, beta, trunc)?;
    let a = ctx.angle;
    let value = ctx
        .partition
        .weights
        .iter()
        .enumerate()
        .map(|(n, w)| w * (a.cosh2 * model.spectrum_e(n) + a.sinh2 * model.spectrum_e(n + 1)))
        .sum();
    let closed_form = if model.is_linear() {
        let u: f64 = ctx.partition.weights.iter().enumerate().map(|(n, w)| w * model.energy(n)).sum();
        Some(a.sinh2 + a.cosh_2theta() * u / model.hbar_omega())
    } else {
        None
    };
    Ok(ThermalExpectation { value, closed_form })
}

/// ‖A₋(β)|0(β)⟩‖, recorded as a diagnostic only: the thermal annihilator does
/// not annihilate the thermal vacuum in the matrix representation.
pub fn annihilation_residual(model: &DeformedModel, beta: f64, trunc: &Truncation) -> Result<f64> {
    let ops = bogoliubov_ops(model, beta, trunc)?;
    let tv = thermal_vacuum(model, beta, trunc)?;
    let psi = Array2::from_diag(&ndarray::Array1::from(tv.coeffs));
    Ok(ops.a_minus.dot(&psi).iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Thermal vacuum of a two-level system: (c0, c1) with c0² + c1² = 1.
pub fn thermal_qubit(e0: f64, e1: f64, beta: f64) -> Result<(f64, f64)> {
    if !(e1 > e0) {
        return Err(Error::DegenerateLevels { e0, e1 });
    }
    if !(beta >= 0.0) {
        return Err(Error::domain("thermal_qubit", format!("β = {beta} must be nonnegative")));
    }
    let u = (-beta * (e1 - e0)).exp();
    Ok(((1.0 / (1.0 + u)).sqrt(), (u / (1.0 + u)).sqrt()))
}
