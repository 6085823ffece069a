//! Special-function kernels: log-gamma, Pochhammer symbols, generalized
//! hypergeometric series, the modified Bessel function of the second kind,
//! the Meijer-G weights that solve the resolution-of-identity moment problem,
//! and adaptive quadrature on the half line.
//!
//! Products of gamma functions are carried in log-space throughout and only
//! exponentiated at the last step.

mod bessel;
mod gamma;
mod hypergeometric;
mod meijer;
mod quadrature;

pub use bessel::{bessel_k, bessel_k_scaled};
pub use gamma::{log_gamma, pochhammer_log};
pub use hypergeometric::{hyp_pfq, hyp_pfq_log_real, HypSeries, HYP_TERM_BUDGET};
pub use meijer::{meijer_moment_rhs, meijer_weight, meijer_weight_log, meijer_weight_log_ratio};
pub use quadrature::{quad_semiinfinite, quad_semiinfinite_with, QuadConfig, QuadResult};

use crate::error::{Error, Result};

/// Upper bound on the lengths of the two parameter lists.
pub const MAX_PARAMS: usize = 8;

/// The two sets of real numbers `a` (length p) and `b` (length q) that
/// parameterize the deformed-boson family and its hypergeometric functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamLists {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl ParamLists {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() > MAX_PARAMS || b.len() > MAX_PARAMS {
            return Err(Error::InvalidModel(format!(
                "p = {} and q = {} must both be <= {MAX_PARAMS}",
                a.len(),
                b.len()
            )));
        }
        for (name, list) in [("a", &a), ("b", &b)] {
            if let Some(bad) = list.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::InvalidModel(format!(
                    "every {name}_i must be a finite positive real, got {bad}"
                )));
            }
        }
        Ok(ParamLists { a, b })
    }

    /// p = q = 0: the canonical oscillator family.
    pub fn empty() -> Self {
        ParamLists { a: Vec::new(), b: Vec::new() }
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn q(&self) -> usize {
        self.b.len()
    }

    /// Lists with the roles of `a` and `b` exchanged.
    pub fn swapped(&self) -> Self {
        ParamLists { a: self.b.clone(), b: self.a.clone() }
    }

    /// Removes every value that appears in both lists (with multiplicity).
    /// The hypergeometric series and the structure constants are unchanged.
    pub fn reduced(&self) -> Self {
        let mut a = self.a.clone();
        let mut b = Vec::with_capacity(self.b.len());
        for &bj in &self.b {
            if let Some(pos) = a.iter().position(|&ai| ai == bj) {
                a.swap_remove(pos);
            } else {
                b.push(bj);
            }
        }
        ParamLists { a, b }
    }

    /// True when the reduced lists are empty, i.e. the family collapses onto
    /// the canonical oscillator.
    pub fn is_canonical(&self) -> bool {
        let r = self.reduced();
        r.a.is_empty() && r.b.is_empty()
    }
}
