//! Verification suites: every module invariant evaluated over a model battery
//! and a β grid, collected into a JSON report.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coherent::{cs_build, eigen_residual, identity_moment_check, overlap, two_mode_build, CsKind};
use crate::error::{Error, Result};
use crate::model::{DeformedModel, Spectrum, Truncation};
use crate::quasiprob::{
    average_via_p, density_build, husimi_normalization, husimi_q, husimi_q_whole, p_function_linear, p_function_whole,
    p_moment_check, partial_trace_tilde, thermal_average, vacuum_average, WholeDensity,
};
use crate::specfun::{
    bessel_k, hyp_pfq, meijer_moment_rhs, meijer_weight_log, quad_semiinfinite_with, ParamLists, QuadConfig,
};
use crate::thermal::{
    annihilation_residual, bogoliubov_ops, bose_einstein, free_energy, internal_energy, partition,
    partition_closed_form, thermal_expect_ap_am, thermal_qubit, thermal_vacuum, vacuum_expect_num, ThermalAngle,
    FD_REL_STEP,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Labels |z| and phases of the coherent-state property grid.
pub const Z_RADII: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
pub const Z_PHASES: [f64; 3] = [0.0, PI / 3.0, PI];

/// The reference β grid.
pub fn reference_betas() -> Vec<f64> {
    vec![0.5, 4f64.ln(), 3.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Thermal,
    Coherent,
    Quasiprob,
    Specfun,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Thermal, Suite::Coherent, Suite::Quasiprob, Suite::Specfun];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Thermal => "thermal",
            Suite::Coherent => "coherent",
            Suite::Quasiprob => "quasiprob",
            Suite::Specfun => "specfun",
        }
    }

    /// Parses a suite name; `all` expands to every suite.
    pub fn parse_list(s: &str) -> std::result::Result<Vec<Suite>, String> {
        match s {
            "all" => Ok(Suite::ALL.to_vec()),
            "thermal" => Ok(vec![Suite::Thermal]),
            "coherent" => Ok(vec![Suite::Coherent]),
            "quasiprob" => Ok(vec![Suite::Quasiprob]),
            "specfun" => Ok(vec![Suite::Specfun]),
            other => Err(format!("unknown suite {other:?} (expected thermal, coherent, quasiprob, specfun or all)")),
        }
    }
}

/// How `lhs` is compared with `rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// |lhs − rhs| ≤ tol
    Abs,
    /// |lhs − rhs| ≤ tol·|rhs|
    Rel,
    /// lhs ≤ rhs + tol
    Upper,
    /// rhs − tol ≤ lhs ≤ rhs
    Interval,
    /// recorded only, never fails
    Info,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
    Error,
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub suite: Suite,
    pub name: String,
    /// The identity the check exercises.
    pub anchor: &'static str,
    pub model: String,
    pub beta: Option<f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub metric: Metric,
    pub tolerance: f64,
    pub deviation: Option<f64>,
    pub status: Status,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub errors: usize,
    pub info: usize,
    pub overall_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub suites: Vec<Suite>,
    pub models: Vec<String>,
    pub betas: Vec<f64>,
    pub n_max: usize,
    pub tail_tol: f64,
    pub tolerance_override: Option<f64>,
    pub summary: Summary,
    pub checks: Vec<CheckRecord>,
}

impl VerifyReport {
    /// 0 when everything passed, 3 if any check hit a numerical error, else 1.
    pub fn exit_code(&self) -> i32 {
        if self.summary.errors > 0 {
            3
        } else if self.summary.overall_pass {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedModel {
    pub name: String,
    pub model: DeformedModel,
}

/// The four reference models, ħω = 1.
pub fn reference_battery() -> Vec<NamedModel> {
    let b2 = || ParamLists::new(vec![], vec![2.0]).expect("valid lists");
    let mk = |name: &str, model: Result<DeformedModel>| NamedModel {
        name: name.to_string(),
        model: model.expect("reference model is valid"),
    };
    vec![
        mk("M0", DeformedModel::oscillator(1.0, Spectrum::Linear { e0: 0.5 })),
        mk("M0g", DeformedModel::oscillator(1.0, Spectrum::Generalized)),
        mk("M1", DeformedModel::new(b2(), 1.0, Spectrum::Generalized)),
        mk("M1L", DeformedModel::new(b2(), 1.0, Spectrum::Linear { e0: 0.0 })),
    ]
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub suites: Vec<Suite>,
    pub models: Vec<NamedModel>,
    pub betas: Vec<f64>,
    pub trunc: Truncation,
    pub tol_override: Option<f64>,
    pub timings: bool,
}

impl VerifyConfig {
    pub fn reference(suites: Vec<Suite>) -> Self {
        VerifyConfig {
            suites,
            models: reference_battery(),
            betas: reference_betas(),
            trunc: Truncation::default(),
            tol_override: None,
            timings: false,
        }
    }
}

enum Outcome {
    Measured { lhs: f64, rhs: f64 },
    Skipped(String),
}

fn measured(lhs: f64, rhs: f64) -> Result<Outcome> {
    Ok(Outcome::Measured { lhs, rhs })
}

fn skipped(reason: &str) -> Result<Outcome> {
    Ok(Outcome::Skipped(reason.to_string()))
}

type CheckFn = Box<dyn Fn(&Truncation) -> Result<Outcome> + Send + Sync>;

struct Task {
    suite: Suite,
    name: String,
    anchor: &'static str,
    model: String,
    beta: Option<f64>,
    metric: Metric,
    tol: f64,
    run: CheckFn,
}

struct Builder<'a> {
    suite: Suite,
    model: &'a str,
    tasks: Vec<Task>,
}

impl Builder<'_> {
    fn add<F>(&mut self, name: impl Into<String>, anchor: &'static str, beta: Option<f64>, metric: Metric, tol: f64, f: F)
    where
        F: Fn(&Truncation) -> Result<Outcome> + Send + Sync + 'static,
    {
        self.tasks.push(Task {
            suite: self.suite,
            name: name.into(),
            anchor,
            model: self.model.to_string(),
            beta,
            metric,
            tol,
            run: Box::new(f),
        });
    }
}

pub fn run_verify(cfg: &VerifyConfig) -> VerifyReport {
    let mut tasks = Vec::new();
    for &suite in &cfg.suites {
        match suite {
            Suite::Specfun => tasks.extend(specfun_tasks()),
            Suite::Thermal => {
                tasks.extend(qubit_tasks());
                for m in &cfg.models {
                    tasks.extend(thermal_tasks(m, &cfg.betas));
                }
            }
            Suite::Coherent => {
                for m in &cfg.models {
                    tasks.extend(coherent_tasks(m, &cfg.betas));
                }
            }
            Suite::Quasiprob => {
                for m in &cfg.models {
                    tasks.extend(quasiprob_tasks(m, &cfg.betas));
                }
            }
        }
    }
    let checks: Vec<CheckRecord> = tasks.par_iter().map(|t| execute(t, cfg)).collect();
    let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
    let summary = Summary {
        total: checks.len(),
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        skipped: count(Status::Skip),
        errors: count(Status::Error),
        info: count(Status::Info),
        overall_pass: checks.iter().all(|c| c.pass),
    };
    VerifyReport {
        schema_version: SCHEMA_VERSION,
        suites: cfg.suites.clone(),
        models: cfg.models.iter().map(|m| m.name.clone()).collect(),
        betas: cfg.betas.clone(),
        n_max: cfg.trunc.n_max(),
        tail_tol: cfg.trunc.tail_tol(),
        tolerance_override: cfg.tol_override,
        summary,
        checks,
    }
}

fn execute(task: &Task, cfg: &VerifyConfig) -> CheckRecord {
    let start = Instant::now();
    let tol = match (task.metric, cfg.tol_override) {
        (Metric::Info, _) => 0.0,
        (_, Some(t)) => t,
        (_, None) => task.tol,
    };
    let result = cfg.trunc.auto_raise(|t| (task.run)(t));
    let mut rec = CheckRecord {
        suite: task.suite,
        name: task.name.clone(),
        anchor: task.anchor,
        model: task.model.clone(),
        beta: task.beta,
        lhs: None,
        rhs: None,
        metric: task.metric,
        tolerance: tol,
        deviation: None,
        status: Status::Error,
        pass: false,
        reason: None,
        runtime_ms: None,
    };
    match result {
        Ok(Outcome::Measured { lhs, rhs }) => {
            let (dev, pass) = compare(task.metric, lhs, rhs, tol);
            rec.lhs = Some(lhs);
            rec.rhs = Some(rhs);
            rec.deviation = Some(dev);
            rec.pass = pass;
            rec.status = match (task.metric, pass) {
                (Metric::Info, _) => Status::Info,
                (_, true) => Status::Pass,
                (_, false) => Status::Fail,
            };
        }
        Ok(Outcome::Skipped(reason)) => {
            rec.status = Status::Skip;
            rec.pass = true;
            rec.reason = Some(reason);
        }
        Err(e) => {
            rec.reason = Some(format!("{}: {e}", e.name()));
        }
    }
    if cfg.timings {
        rec.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    rec
}

/// Returns (deviation, pass).
fn compare(metric: Metric, lhs: f64, rhs: f64, tol: f64) -> (f64, bool) {
    let ok = |d: f64| d.is_finite() && d <= tol;
    match metric {
        Metric::Abs => {
            let d = (lhs - rhs).abs();
            (d, ok(d))
        }
        Metric::Rel => {
            let d = (lhs - rhs).abs() / rhs.abs();
            (d, ok(d))
        }
        Metric::Upper => {
            let d = (lhs - rhs).max(0.0);
            (d, lhs.is_finite() && ok(d))
        }
        Metric::Interval => {
            let d = (lhs - rhs).abs();
            (d, lhs <= rhs && ok(d))
        }
        Metric::Info => ((lhs - rhs).abs(), true),
    }
}

fn qubit_tasks() -> Vec<Task> {
    let mut b = Builder { suite: Suite::Thermal, model: "qubit", tasks: vec![] };
    // β(e1 − e0) on a geometric grid from 1e-3 to 1e2
    let grid: Vec<f64> = (0..100).map(|i| 1e-3 * 1e5f64.powf(i as f64 / 99.0)).collect();
    let g = grid.clone();
    b.add("qubit_normalization", "c0² + c1² = 1", None, Metric::Upper, 1e-15, move |_| {
        let mut worst = 0.0f64;
        for &beta in &g {
            let (c0, c1) = thermal_qubit(0.0, 1.0, beta)?;
            worst = worst.max((c0 * c0 + c1 * c1 - 1.0).abs());
        }
        measured(worst, 0.0)
    });
    b.add("qubit_limits", "(c0, c1) → (1, 0) cold and (1/√2, 1/√2) hot, monotonically", None, Metric::Upper, 0.0, move |_| {
        let pts: Vec<(f64, f64)> = grid.iter().map(|&beta| thermal_qubit(0.0, 1.0, beta)).collect::<Result<_>>()?;
        let mut violations = pts.windows(2).filter(|w| !(w[1].0 >= w[0].0 && w[1].1 <= w[0].1)).count();
        let (h0, h1) = thermal_qubit(0.0, 1.0, 0.0)?;
        let (k0, k1) = thermal_qubit(0.0, 1.0, 1e4)?;
        let s = 0.5f64.sqrt();
        let first = pts[0];
        let last = pts[pts.len() - 1];
        // grid endpoints lie between the limits
        if !((h0 - s).abs() < 1e-15 && (h1 - s).abs() < 1e-15 && k0 == 1.0 && k1 == 0.0) {
            violations += 1;
        }
        if !(first.0 >= h0 && last.0 <= k0 && first.1 <= h1 && last.1 >= k1) {
            violations += 1;
        }
        measured(violations as f64, 0.0)
    });
    b.tasks
}

fn thermal_tasks(nm: &NamedModel, betas: &[f64]) -> Vec<Task> {
    let mut b = Builder { suite: Suite::Thermal, model: &nm.name, tasks: vec![] };
    let linear_e0 = match nm.model.spectrum() {
        Spectrum::Linear { e0 } => Some(e0),
        Spectrum::Generalized => None,
    };
    for &beta in betas {
        let m = nm.model.clone();
        let hw = m.hbar_omega();
        let x = beta * hw;
        let bb = Some(beta);
        b.add("theta_tanh", "tanh θ(β) = e^{−βħω/2}", bb, Metric::Abs, 1e-12, move |_| {
            let a = ThermalAngle::new(x)?;
            measured(a.theta.tanh(), (-0.5 * x).exp())
        });
        b.add("theta_hyperbolic", "cosh²θ − sinh²θ = 1", bb, Metric::Abs, 1e-12, move |_| {
            let th = ThermalAngle::new(x)?.theta;
            measured(th.cosh().powi(2) - th.sinh().powi(2), 1.0)
        });
        let mm = m.clone();
        b.add("sinh2_bose_einstein", "sinh²θ = n_T", bb, Metric::Abs, 1e-12, move |_| {
            let th = ThermalAngle::new(x)?.theta;
            measured(th.sinh().powi(2), bose_einstein(&mm, beta)?)
        });
        let mm = m.clone();
        b.add("cosh2_bose_einstein", "cosh²θ = n_T + 1", bb, Metric::Abs, 1e-12, move |_| {
            let th = ThermalAngle::new(x)?.theta;
            measured(th.cosh().powi(2), bose_einstein(&mm, beta)? + 1.0)
        });
        let mm = m.clone();
        b.add("vacuum_normalization", "Σ C_n² ∈ [1 − tail_tol, 1]", bb, Metric::Interval, 1e-12, move |t| {
            measured(thermal_vacuum(&mm, beta, t)?.norm_sqr(), 1.0)
        });
        let mm = m.clone();
        b.add("partition_closed_form", "Z = e^{−βE0}/(1 − e^{−βħω})", bb, Metric::Rel, 1e-12, move |t| {
            match partition_closed_form(&mm, beta) {
                Some(z) => measured(partition(&mm, beta, t)?.z(), z),
                None => skipped("closed form exists only for a linear spectrum"),
            }
        });
        let mm = m.clone();
        b.add("vacuum_number_internal_energy", "ħω·⟨0(β)|Â₊Â₋|0(β)⟩ = U", bb, Metric::Rel, 1e-10, move |t| {
            measured(hw * vacuum_expect_num(&mm, beta, t)?, internal_energy(&mm, beta, t)?)
        });
        let mm = m.clone();
        b.add("vacuum_number_bose_einstein", "⟨0(β)|Â₊Â₋|0(β)⟩ = n_T + E0/ħω", bb, Metric::Abs, 1e-10, move |t| {
            match linear_e0 {
                Some(e0) => measured(vacuum_expect_num(&mm, beta, t)?, bose_einstein(&mm, beta)? + e0 / hw),
                None => skipped("occupation closed form needs a linear spectrum"),
            }
        });
        let mm = m.clone();
        b.add("internal_energy_from_log_z", "U = −∂ ln Z/∂β", bb, Metric::Rel, 1e-6, move |t| {
            let h = FD_REL_STEP * beta;
            let lz = |b: f64| partition(&mm, b, t).map(|p| p.log_z);
            let d = (lz(beta + h)? - lz(beta - h)?) / (2.0 * h);
            measured(-d, internal_energy(&mm, beta, t)?)
        });
        let mm = m.clone();
        b.add("free_energy_ode", "β·∂F/∂β + F = ħω·⟨Â₊Â₋⟩", bb, Metric::Rel, 1e-6, move |t| {
            let h = FD_REL_STEP * beta;
            let f = |b: f64| free_energy(&mm, b, t);
            let lhs = beta * (f(beta + h)? - f(beta - h)?) / (2.0 * h) + f(beta)?;
            measured(lhs, hw * vacuum_expect_num(&mm, beta, t)?)
        });
        let mm = m.clone();
        b.add(
            "bogoliubov_diagonal",
            "⟨n|A₊(β)A₋(β)|n⟩ = cosh²θ·e(n) + sinh²θ·e(n+1)",
            bb,
            Metric::Upper,
            1e-12,
            move |t| {
                let a = ThermalAngle::new(x)?;
                let n_op = bogoliubov_ops(&mm, beta, t)?.number_operator();
                let worst = (0..=t.n_max() - 2)
                    .map(|n| {
                        let want = a.cosh2 * mm.spectrum_e(n) + a.sinh2 * mm.spectrum_e(n + 1);
                        (n_op[[n, n]] - want).abs() / want.abs().max(1.0)
                    })
                    .fold(0.0, f64::max);
                measured(worst, 0.0)
            },
        );
        let mm = m.clone();
        b.add(
            "thermal_number_closed_form",
            "⟨A₊(β)A₋(β)⟩ = sinh²θ + cosh 2θ·U/ħω",
            bb,
            Metric::Abs,
            1e-8,
            move |t| {
                let r = thermal_expect_ap_am(&mm, beta, t)?;
                match r.closed_form {
                    Some(c) => measured(r.value, c),
                    None => skipped("closed form requires e(n+1) = e(n) + 1 (linear spectrum)"),
                }
            },
        );
        let mm = m.clone();
        b.add("thermal_annihilator_on_vacuum", "‖A₋(β)|0(β)⟩‖ (diagnostic)", bb, Metric::Info, 0.0, move |t| {
            measured(annihilation_residual(&mm, beta, t)?, 0.0)
        });
    }
    if nm.model.is_linear() {
        let m = nm.model.clone();
        b.add(
            "high_temperature_flattening",
            "max_n |C_n² − C_{n+1}²| decreases as β → 0",
            None,
            Metric::Upper,
            0.0,
            move |t| {
                let mut spreads = Vec::new();
                for beta in [1.0, 0.5, 0.25, 0.1] {
                    let tv = t.auto_raise(|tt| thermal_vacuum(&m, beta, tt))?;
                    spreads.push(tv.coeffs.windows(2).map(|w| (w[0] * w[0] - w[1] * w[1]).abs()).fold(0.0, f64::max));
                }
                let violations = spreads.windows(2).filter(|w| !(w[1] < w[0])).count();
                measured(violations as f64, 0.0)
            },
        );
    }
    b.tasks
}

fn grid_labels() -> Vec<C64> {
    Z_RADII.iter().flat_map(|&r| Z_PHASES.iter().map(move |&ph| C64::from_polar(r, ph))).collect()
}

fn is_canonical(m: &DeformedModel) -> bool {
    m.params().reduced().is_canonical()
}

fn coherent_tasks(nm: &NamedModel, betas: &[f64]) -> Vec<Task> {
    let mut b = Builder { suite: Suite::Coherent, model: &nm.name, tasks: vec![] };
    for &beta in betas {
        let bb = Some(beta);
        let m = nm.model.clone();
        b.add("bg_eigen_relation", "Â₋|z;β⟩ = z·coshθ·|z;β⟩", bb, Metric::Upper, 1e-10, move |t| {
            let mut worst = 0.0f64;
            for z in grid_labels() {
                worst = worst.max(t.auto_raise(|tt| eigen_residual(&m, CsKind::Bg, z, beta, tt))?);
            }
            measured(worst, 0.0)
        });
        for kind in [CsKind::Bg, CsKind::Kp] {
            let m = nm.model.clone();
            b.add(
                format!("{}_overlap_series", kind.name()),
                "Σ c̄_n(z)c_n(z′) = F(z̄z′cosh²θ)/√(F·F)",
                bb,
                Metric::Upper,
                1e-10,
                move |t| {
                    let labels = grid_labels();
                    let mut worst = 0.0f64;
                    let mut used = 0;
                    for (i, &z) in labels.iter().enumerate() {
                        for &zp in &labels[i..] {
                            let pair = (|| -> Result<f64> {
                                let a = t.auto_raise(|tt| cs_build(&m, kind, z, beta, tt))?;
                                let c = t.auto_raise(|tt| cs_build(&m, kind, zp, beta, tt))?;
                                let n = a.coeffs.len().min(c.coeffs.len());
                                let series: C64 = (0..n).map(|k| a.coeffs[k].conj() * c.coeffs[k]).sum();
                                Ok((series - overlap(&m, kind, z, zp, beta)?).norm())
                            })();
                            match pair {
                                Ok(d) => {
                                    worst = worst.max(d);
                                    used += 1;
                                }
                                Err(Error::Divergent { .. }) => {}
                                Err(e) => return Err(e),
                            }
                        }
                    }
                    if used == 0 {
                        return skipped("normalization series diverges on the whole label grid");
                    }
                    measured(worst, 0.0)
                },
            );
        }
        let m = nm.model.clone();
        b.add("overlap_cauchy_schwarz", "|⟨z;β|z′;β⟩| ≤ 1", bb, Metric::Upper, 1e-12, move |_| {
            let labels = grid_labels();
            let mut worst = 0.0f64;
            for &z in &labels {
                for &zp in &labels {
                    worst = worst.max(overlap(&m, CsKind::Bg, z, zp, beta)?.norm());
                }
            }
            measured(worst, 1.0)
        });
        let m = nm.model.clone();
        b.add("overlap_gaussian", "|⟨z;β|z′;β⟩|² = exp(−|z − z′|²cosh²θ)", bb, Metric::Upper, 1e-10, move |_| {
            if !is_canonical(&m) {
                return skipped("Gaussian overlap law holds for the canonical oscillator only");
            }
            let c2 = ThermalAngle::new(beta * m.hbar_omega())?.cosh2;
            let labels = grid_labels();
            let mut worst = 0.0f64;
            for &z in &labels {
                for &zp in &labels {
                    let o = overlap(&m, CsKind::Bg, z, zp, beta)?.norm_sqr();
                    worst = worst.max((o - (-(z - zp).norm_sqr() * c2).exp()).abs());
                }
            }
            measured(worst, 0.0)
        });
        let m = nm.model.clone();
        b.add("label_continuity", "‖c(z) − c(z′)‖ ≤ K·|z − z′|", bb, Metric::Upper, 0.0, move |t| {
            let c = ThermalAngle::new(beta * m.hbar_omega())?.cosh();
            let dz = C64::new(6e-7, -4e-7);
            let mut worst = 0.0f64;
            for z in grid_labels() {
                let zp = if z.norm() >= 2.0 { z - dz } else { z + dz };
                let a = t.auto_raise(|tt| cs_build(&m, CsKind::Bg, z, beta, tt))?;
                let bz = t.auto_raise(|tt| cs_build(&m, CsKind::Bg, zp, beta, tt))?;
                let n = a.coeffs.len().min(bz.coeffs.len());
                let diff = (0..n).map(|k| (a.coeffs[k] - bz.coeffs[k]).norm_sqr()).sum::<f64>().sqrt();
                let support = a.coeffs.iter().rposition(|v| v.norm_sqr() > 1e-30).unwrap_or(0);
                let k = 10.0 * c * m.structure_e(support + 1).sqrt();
                worst = worst.max(diff / (k * dz.norm()));
            }
            measured(worst, 1.0)
        });
        let m = nm.model.clone();
        b.add("bg_kp_collapse", "BG and KP states coincide for the oscillator", bb, Metric::Upper, 1e-14, move |t| {
            if !is_canonical(&m) {
                return skipped("BG and KP states differ away from the canonical oscillator");
            }
            let mut worst = 0.0f64;
            for z in grid_labels() {
                let a = t.auto_raise(|tt| cs_build(&m, CsKind::Bg, z, beta, tt))?;
                let k = t.auto_raise(|tt| cs_build(&m, CsKind::Kp, z, beta, tt))?;
                for (x, y) in a.coeffs.iter().zip(&k.coeffs) {
                    worst = worst.max((x - y).norm());
                }
            }
            measured(worst, 0.0)
        });
    }
    let m = nm.model.clone();
    b.add("structure_duality", "ρ_BG(n)·ρ_KP(n) = (n!)²", None, Metric::Upper, 1e-12, move |_| {
        let worst = (0..=60usize)
            .map(|n| (m.rho_bg_log(n) + m.rho_kp_log(n) - 2.0 * libm::lgamma(n as f64 + 1.0)).abs())
            .fold(0.0, f64::max);
        measured(worst, 0.0)
    });
    let (b1, b2) = (betas[0], betas[betas.len() - 1]);
    for n in 0..=8usize {
        let m = nm.model.clone();
        b.add(
            format!("identity_moment_n{n}"),
            "Γ(a/b)∫G(t)tⁿdt = ρ_BG(n)",
            Some(b1),
            Metric::Rel,
            1e-6,
            move |_| match identity_moment_check(&m, n, b1) {
                Ok(c) => measured(c.lhs, c.rhs),
                Err(Error::Unsupported(_)) => skipped("no closed-form moment weight for this (p, q)"),
                Err(e) => Err(e),
            },
        );
        if betas.len() > 1 {
            let m = nm.model.clone();
            b.add(
                format!("identity_moment_beta_independence_n{n}"),
                "measure moments do not depend on β",
                Some(b2),
                Metric::Rel,
                1e-10,
                move |_| match (identity_moment_check(&m, n, b2), identity_moment_check(&m, n, b1)) {
                    (Ok(c2), Ok(c1)) => measured(c2.lhs, c1.lhs),
                    (Err(Error::Unsupported(_)), _) => skipped("no closed-form moment weight for this (p, q)"),
                    (Err(e), _) | (_, Err(e)) => Err(e),
                },
            );
        }
    }
    b.tasks
}

/// Fixed-seed diagonal observables with entries in [−1, 1].
fn random_observables(dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7fdc5);
    (0..count).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect()
}

fn linear_only() -> Result<Outcome> {
    skipped("the P-representation is defined for linear spectra only")
}

fn quasiprob_tasks(nm: &NamedModel, betas: &[f64]) -> Vec<Task> {
    let mut b = Builder { suite: Suite::Quasiprob, model: &nm.name, tasks: vec![] };
    let linear = nm.model.is_linear();
    for &beta in betas {
        let bb = Some(beta);
        let m = nm.model.clone();
        b.add("purification", "Tr_tilde |0(β)⟩⟨0(β)| = ρ(β)", bb, Metric::Upper, 1e-12, move |t| {
            let rt = partial_trace_tilde(&thermal_vacuum(&m, beta, t)?);
            let rho = density_build(&m, beta, t)?;
            let worst = rt
                .weights
                .iter()
                .zip(&rho.weights)
                .filter(|(_, p)| **p > 0.0)
                .map(|(a, p)| (a - p).abs() / p)
                .fold(0.0, f64::max);
            measured(worst, 0.0)
        });
        let m = nm.model.clone();
        b.add("tfd_equivalence", "⟨0(β)|Ô|0(β)⟩ = Tr ρ(β)Ô", bb, Metric::Upper, 1e-12, move |t| {
            let tv = thermal_vacuum(&m, beta, t)?;
            let mut worst = 0.0f64;
            for obs in random_observables(t.dim(), 5) {
                let a = vacuum_average(&tv, &obs)?;
                let c = thermal_average(&m, &obs, beta, t)?;
                worst = worst.max((a - c).abs());
            }
            measured(worst, 0.0)
        });
        let m = nm.model.clone();
        b.add("density_trace", "Tr ρ(β) = 1", bb, Metric::Interval, 1e-12, move |t| {
            measured(density_build(&m, beta, t)?.trace(), 1.0)
        });
        let m = nm.model.clone();
        b.add("husimi_origin", "Q(0) = p_0(β)", bb, Metric::Abs, 1e-12, move |t| {
            measured(husimi_q(&m, C64::new(0.0, 0.0), beta, t)?, density_build(&m, beta, t)?.weights[0])
        });
        let m = nm.model.clone();
        b.add("husimi_normalization", "∫dμ(z) Q(z) = 1", bb, Metric::Abs, 1e-6, move |t| {
            match husimi_normalization(&m, beta, t) {
                Ok(v) => measured(v, 1.0),
                Err(Error::Unsupported(_)) => skipped("no closed-form moment weight for this (p, q)"),
                Err(e) => Err(e),
            }
        });
        for n in 0..=8usize {
            let m = nm.model.clone();
            b.add(
                format!("p_moment_n{n}"),
                "∫S(t)tⁿdt = p_n(β)ρ_BG(n)/Γ(a/b)",
                bb,
                Metric::Rel,
                1e-5,
                move |t| {
                    if !linear {
                        return linear_only();
                    }
                    let c = p_moment_check(&m, n, beta, t)?;
                    measured(c.lhs, c.rhs)
                },
            );
        }
        let m = nm.model.clone();
        b.add("p_average_energy", "∫dμ P ⟨z|Ĥ|z⟩ = U", bb, Metric::Rel, 1e-5, move |t| {
            if !linear {
                return linear_only();
            }
            let en: Vec<f64> = (0..t.dim()).map(|k| m.energy(k)).collect();
            measured(average_via_p(&m, &en, beta, t)?, thermal_average(&m, &en, beta, t)?)
        });
        let m = nm.model.clone();
        b.add("p_average_trace", "∫dμ P = 1", bb, Metric::Abs, 1e-5, move |t| {
            if !linear {
                return linear_only();
            }
            measured(average_via_p(&m, &vec![1.0; t.dim()], beta, t)?, 1.0)
        });
    }
    let beta = betas[0];
    let (z, s) = (C64::new(0.3, 0.2), C64::new(-0.5, 0.4));
    let m = nm.model.clone();
    b.add("husimi_factorization", "Q(z, σ̃) = Q(z)·Q(σ̃)", Some(beta), Metric::Abs, 1e-12, move |_| {
        let t = Truncation::new(48, 1e-12)?;
        let t = t.auto_raise(|tt| density_build(&m, beta, tt).map(|_| *tt))?;
        let rho = density_build(&m, beta, &t)?;
        let whole = WholeDensity::new(rho.clone(), rho);
        let st = two_mode_build(&m, CsKind::Bg, z, s, beta, &t)?;
        let mut direct = 0.0;
        for n in 0..t.dim() {
            for k in 0..t.dim() {
                direct += whole.weight(n, k) * st.coeffs[[n, k]].norm_sqr();
            }
        }
        measured(direct, husimi_q_whole(&m, z, s, beta, &t)?)
    });
    let m = nm.model.clone();
    b.add("p_factorization", "P(z, σ̃) = P(z)·P(σ̃)", Some(beta), Metric::Rel, 1e-15, move |_| {
        if !linear {
            return linear_only();
        }
        measured(p_function_whole(&m, z, s, beta)?, p_function_linear(&m, z, beta)? * p_function_linear(&m, s, beta)?)
    });
    b.tasks
}

fn specfun_tasks() -> Vec<Task> {
    let mut b = Builder { suite: Suite::Specfun, model: "-", tasks: vec![] };
    for (label, params) in [
        ("exponential", ParamLists::empty()),
        ("bessel_b2", ParamLists::new(vec![], vec![2.0]).expect("valid")),
        ("bessel_b2.5", ParamLists::new(vec![], vec![2.5]).expect("valid")),
    ] {
        for n in 0..=8usize {
            let p = params.clone();
            b.add(
                format!("meijer_moment_{label}_n{n}"),
                "∫G(t)tⁿdt = Γ(n+1)∏Γ(b−1+n+1)/∏Γ(a−1+n+1)",
                None,
                Metric::Rel,
                1e-6,
                move |_| {
                    let nf = n as f64;
                    let f = |t: f64| match meijer_weight_log(&p, t) {
                        Ok(l) if l == f64::NEG_INFINITY => 0.0,
                        Ok(l) => (l + nf * t.ln()).exp(),
                        Err(_) => f64::NAN,
                    };
                    let r = quad_semiinfinite_with(f, &QuadConfig::relative(1e-10))?;
                    measured(r.value, meijer_moment_rhs(&p, nf + 1.0)?.exp())
                },
            );
        }
    }
    b.add("hypergeometric_exponential_collapse", "pFq with a = b equals e^x", None, Metric::Upper, 1e-12, |_| {
        let p = ParamLists::new(vec![1.7, 0.4], vec![0.4, 1.7]).expect("valid");
        let mut worst = 0.0f64;
        for k in 0..21 {
            let x = C64::from_polar(10.0 * k as f64 / 20.0, 0.37 * k as f64);
            for x in [x, -x] {
                let v = hyp_pfq(&p, x)?.value();
                worst = worst.max((v - x.exp()).norm() / x.exp().norm());
            }
        }
        measured(worst, 0.0)
    });
    b.add("bessel_half_order", "K_{1/2}(x) = √(π/2x)e^{−x}", None, Metric::Upper, 1e-13, |_| {
        let mut worst = 0.0f64;
        for k in 1..=40 {
            let x = 0.05 * k as f64 * k as f64 / 4.0;
            let exact = (PI / (2.0 * x)).sqrt() * (-x).exp();
            worst = worst.max(((bessel_k(0.5, x)? - exact) / exact).abs());
        }
        measured(worst, 0.0)
    });
    b.tasks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compare_metrics() {
        assert!(compare(Metric::Abs, 1.0, 1.0 + 1e-13, 1e-12).1);
        assert!(!compare(Metric::Rel, 2.0, 1.0, 0.5).1);
        assert!(compare(Metric::Upper, 1.0, 1.0, 0.0).1);
        assert!(!compare(Metric::Interval, 1.0 + 1e-15, 1.0, 1e-12).1);
        assert!(compare(Metric::Interval, 1.0 - 1e-13, 1.0, 1e-12).1);
        assert!(!compare(Metric::Abs, f64::NAN, 1.0, 1.0).1);
    }

    #[test]
    fn random_observables_are_reproducible() {
        let a = random_observables(10, 5);
        assert_eq!(a, random_observables(10, 5));
        assert!(a.iter().flatten().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!(Suite::parse_list("all").unwrap().len(), 4);
        assert_eq!(Suite::parse_list("thermal").unwrap(), vec![Suite::Thermal]);
        assert!(Suite::parse_list("nope").is_err());
    }
}
