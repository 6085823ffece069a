//! The deformed-boson family: deformation function, structure constants,
//! energy spectrum and truncated ladder-operator matrices.
//!
//! Two level functions are kept apart:
//!
//! * the *structural* function `e(n) = n·f(n)`, fixed by the parameter lists,
//!   which governs the ladder operators and the structure constants ρ(n);
//! * the *spectral* function, equal to the structural one for a generalized
//!   spectrum and to `n + E0/ħω` for a linear spectrum, which fixes the
//!   energies `E_n = ħω·e(n)`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{log_gamma, pochhammer_log, ParamLists};

/// Largest cutoff the auto-raise loop will try.
pub const N_MAX_CAP: usize = 2048;

/// Energy-spectrum kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spectrum {
    /// E_n = ħω·n·f(n).
    Generalized,
    /// E_n = ħω·n + E0.
    Linear { e0: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeformedModel {
    params: ParamLists,
    hbar_omega: f64,
    spectrum: Spectrum,
}

impl DeformedModel {
    /// Builds and validates a model. Generalized spectra must be strictly
    /// increasing up to `2·N_MAX_CAP`.
    pub fn new(params: ParamLists, hbar_omega: f64, spectrum: Spectrum) -> Result<Self> {
        if !(hbar_omega > 0.0 && hbar_omega.is_finite()) {
            return Err(Error::InvalidModel(format!("hbar_omega = {hbar_omega} must be positive")));
        }
        if let Spectrum::Linear { e0 } = spectrum {
            if !(e0 >= 0.0 && e0.is_finite()) {
                return Err(Error::InvalidModel(format!("E0 = {e0} must be a finite value >= 0")));
            }
        }
        let model = DeformedModel { params, hbar_omega, spectrum };
        model.check_monotone(2 * N_MAX_CAP)?;
        Ok(model)
    }

    /// The canonical oscillator, p = q = 0.
    pub fn oscillator(hbar_omega: f64, spectrum: Spectrum) -> Result<Self> {
        Self::new(ParamLists::empty(), hbar_omega, spectrum)
    }

    fn check_monotone(&self, up_to: usize) -> Result<()> {
        let mut prev = self.spectrum_e(0);
        for n in 1..=up_to {
            let cur = self.spectrum_e(n);
            if !(cur > prev) || !cur.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "spectrum is not strictly increasing: e({}) = {prev}, e({n}) = {cur}",
                    n - 1
                )));
            }
            prev = cur;
        }
        Ok(())
    }

    pub fn params(&self) -> &ParamLists {
        &self.params
    }

    pub fn hbar_omega(&self) -> f64 {
        self.hbar_omega
    }

    pub fn spectrum(&self) -> Spectrum {
        self.spectrum
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.spectrum, Spectrum::Linear { .. })
    }

    /// f(n) = ∏(b_j − 1 + n) / ∏(a_i − 1 + n).
    pub fn deformation_f(&self, n: usize) -> Result<f64> {
        self.deformation_at(n as f64).ok_or(Error::Singular(n))
    }

    fn deformation_at(&self, x: f64) -> Option<f64> {
        let mut f = 1.0;
        for &b in self.params.b() {
            f *= b - 1.0 + x;
        }
        for &a in self.params.a() {
            let d = a - 1.0 + x;
            if d == 0.0 {
                return None;
            }
            f /= d;
        }
        Some(f)
    }

    /// Structural level function e(n) = n·f(n), with e(0) = 0.
    pub fn structure_e(&self, n: usize) -> f64 {
        self.structure_e_at(n as f64)
    }

    /// e(x) continued to real x ≥ 0.
    pub fn structure_e_at(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        // a_i − 1 + x vanishes only at x = 1 − a_i < 1, never at x ≥ 1
        x * self.deformation_at(x).unwrap_or(f64::INFINITY)
    }

    /// Spectral level function: e(n) for generalized spectra, n + E0/ħω for
    /// linear ones.
    pub fn spectrum_e(&self, n: usize) -> f64 {
        self.spectrum_e_at(n as f64)
    }

    pub fn spectrum_e_at(&self, x: f64) -> f64 {
        match self.spectrum {
            Spectrum::Generalized => self.structure_e_at(x),
            Spectrum::Linear { e0 } => x + e0 / self.hbar_omega,
        }
    }

    /// E_n = ħω·e(n).
    pub fn energy(&self, n: usize) -> f64 {
        self.hbar_omega * self.spectrum_e(n)
    }

    pub fn energy_at(&self, x: f64) -> f64 {
        self.hbar_omega * self.spectrum_e_at(x)
    }

    /// ln ρ_BG(n) = ln n! + Σ ln (b_j)_n − Σ ln (a_i)_n.
    pub fn rho_bg_log(&self, n: usize) -> f64 {
        let n64 = n as u64;
        let mut acc = ln_factorial(n);
        for &b in self.params.b() {
            acc += pochhammer_log(b, n64).expect("b_j > 0 by construction");
        }
        for &a in self.params.a() {
            acc -= pochhammer_log(a, n64).expect("a_i > 0 by construction");
        }
        acc
    }

    /// ln ρ_KP(n) = ln n! + Σ ln (a_i)_n − Σ ln (b_j)_n, the dual constants.
    pub fn rho_kp_log(&self, n: usize) -> f64 {
        let n64 = n as u64;
        let mut acc = ln_factorial(n);
        for &a in self.params.a() {
            acc += pochhammer_log(a, n64).expect("a_i > 0 by construction");
        }
        for &b in self.params.b() {
            acc -= pochhammer_log(b, n64).expect("b_j > 0 by construction");
        }
        acc
    }

    /// ln Γ(a/b) = Σ ln Γ(a_i) − Σ ln Γ(b_j).
    pub fn gamma_ratio_log(&self) -> f64 {
        let num: f64 = self.params.a().iter().map(|&a| log_gamma(a).expect("a_i > 0")).sum();
        let den: f64 = self.params.b().iter().map(|&b| log_gamma(b).expect("b_j > 0")).sum();
        num - den
    }
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// Fock-space cutoff plus the tail weight a truncated vector may discard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    n_max: usize,
    tail_tol: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { n_max: 128, tail_tol: 1e-12 }
    }
}

impl Truncation {
    pub fn new(n_max: usize, tail_tol: f64) -> Result<Self> {
        if n_max < 4 {
            return Err(Error::InvalidModel(format!("n_max = {n_max} must be >= 4")));
        }
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::InvalidModel(format!("tail_tol = {tail_tol} must lie in (0, 1)")));
        }
        Ok(Truncation { n_max, tail_tol })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    /// Basis dimension n_max + 1.
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn with_n_max(&self, n_max: usize) -> Result<Self> {
        Truncation::new(n_max, self.tail_tol)
    }

    /// Fails with `TruncationInsufficient` unless `tail < tail_tol`.
    pub fn check_tail(&self, tail: f64) -> Result<()> {
        if tail < self.tail_tol {
            Ok(())
        } else {
            Err(Error::TruncationInsufficient { tail, tol: self.tail_tol, n_max: self.n_max })
        }
    }

    /// Runs `op`, doubling n_max (up to [`N_MAX_CAP`]) while it reports an
    /// insufficient truncation.
    pub fn auto_raise<T, F>(&self, mut op: F) -> Result<T>
    where
        F: FnMut(&Truncation) -> Result<T>,
    {
        let mut trunc = *self;
        loop {
            match op(&trunc) {
                Err(Error::TruncationInsufficient { .. }) if trunc.n_max < N_MAX_CAP => {
                    trunc = trunc.with_n_max((trunc.n_max * 2).min(N_MAX_CAP))?;
                }
                other => return other,
            }
        }
    }
}

/// Truncated ladder operators, stored through their single nonzero diagonal.
///
/// `a_minus` has ⟨n−1|A₋|n⟩ = √(e(n) − e(0)) on the superdiagonal of the
/// matrix (row n−1, column n) and `a_plus` is its transpose. A nonzero e(0)
/// (linear spectrum with E0 > 0) is carried as a scalar `offset` so that the
/// normal-ordered number operator A₊A₋ + offset has diagonal e(n) for every n.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderMatrices {
    lowering: Vec<f64>,
    offset: f64,
}

impl LadderMatrices {
    /// From the level values e(0), …, e(n_max).
    pub fn from_levels(levels: &[f64]) -> Self {
        let offset = levels[0];
        let lowering = levels[1..].iter().map(|&e| (e - offset).sqrt()).collect();
        LadderMatrices { lowering, offset }
    }

    pub fn dim(&self) -> usize {
        self.lowering.len() + 1
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// ⟨n−1|A₋|n⟩ for n = 1..=n_max.
    pub fn lowering_elements(&self) -> &[f64] {
        &self.lowering
    }

    pub fn a_minus(&self) -> Array2<f64> {
        let d = self.dim();
        let mut m = Array2::zeros((d, d));
        for (k, &v) in self.lowering.iter().enumerate() {
            m[[k, k + 1]] = v;
        }
        m
    }

    pub fn a_plus(&self) -> Array2<f64> {
        self.a_minus().reversed_axes().as_standard_layout().to_owned()
    }

    /// Diagonal of A₊A₋ + offset, i.e. e(n) for n = 0..=n_max.
    pub fn number_diagonal(&self) -> Vec<f64> {
        std::iter::once(self.offset)
            .chain(self.lowering.iter().map(|&v| v * v + self.offset))
            .collect()
    }

    /// Applies A₋ to a coefficient vector: (A₋c)_n = √e(n+1)·c_{n+1}, with
    /// the top component zero.
    pub fn lower<T>(&self, c: &[T]) -> Vec<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + Default,
    {
        let mut out = vec![T::default(); c.len()];
        for (n, slot) in out.iter_mut().enumerate().take(c.len().saturating_sub(1)) {
            if n < self.lowering.len() {
                *slot = c[n + 1] * self.lowering[n];
            }
        }
        out
    }
}

/// Ladder operators of the structural level function e(n) = n·f(n).
pub fn ladder_matrices(model: &DeformedModel, trunc: &Truncation) -> LadderMatrices {
    let levels: Vec<f64> = (0..=trunc.n_max()).map(|n| model.structure_e(n)).collect();
    LadderMatrices::from_levels(&levels)
}

/// Ladder operators of the spectral level function; identical to
/// [`ladder_matrices`] for generalized spectra.
pub fn spectral_ladder(model: &DeformedModel, trunc: &Truncation) -> LadderMatrices {
    let levels: Vec<f64> = (0..=trunc.n_max()).map(|n| model.spectrum_e(n)).collect();
    LadderMatrices::from_levels(&levels)
}

/// On-disk model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub p: usize,
    pub q: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub hbar_omega: f64,
    pub spectrum: SpectrumFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumFile {
    pub kind: SpectrumKind,
    #[serde(rename = "E0", default, skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Generalized,
    Linear,
}

impl ModelFile {
    pub fn into_model(self) -> Result<DeformedModel> {
        if self.a.len() != self.p || self.b.len() != self.q {
            return Err(Error::InvalidModel(format!(
                "p = {} and q = {} disagree with |a| = {} and |b| = {}",
                self.p,
                self.q,
                self.a.len(),
                self.b.len()
            )));
        }
        let spectrum = match (self.spectrum.kind, self.spectrum.e0) {
            (SpectrumKind::Generalized, None) => Spectrum::Generalized,
            (SpectrumKind::Generalized, Some(_)) => {
                return Err(Error::InvalidModel("E0 is only meaningful for a linear spectrum".into()))
            }
            (SpectrumKind::Linear, e0) => Spectrum::Linear { e0: e0.unwrap_or(0.0) },
        };
        DeformedModel::new(ParamLists::new(self.a, self.b)?, self.hbar_omega, spectrum)
    }
}

impl From<&DeformedModel> for ModelFile {
    fn from(m: &DeformedModel) -> Self {
        let spectrum = match m.spectrum {
            Spectrum::Generalized => SpectrumFile { kind: SpectrumKind::Generalized, e0: None },
            Spectrum::Linear { e0 } => SpectrumFile { kind: SpectrumKind::Linear, e0: Some(e0) },
        };
        ModelFile {
            p: m.params.p(),
            q: m.params.q(),
            a: m.params.a().to_vec(),
            b: m.params.b().to_vec(),
            hbar_omega: m.hbar_omega,
            spectrum,
        }
    }
}

impl DeformedModel {
    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        file.into_model().map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelFile::from(self)).expect("model serializes")
    }
}
