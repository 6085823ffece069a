//! Randomized invariants across modules: structure constants, truncated
//! operators, thermal vacua and quasi-probabilities.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use tfdcs::coherent::CsKind;
use tfdcs::model::{ladder_matrices, DeformedModel, Spectrum, Truncation};
use tfdcs::quasiprob::{
    density_build, husimi_q, husimi_q_whole, partial_trace_tilde, thermal_average, vacuum_average,
};
use tfdcs::specfun::{hyp_pfq, pochhammer_log, ParamLists};
use tfdcs::thermal::{bogoliubov_ops, internal_energy, partition, thermal_vacuum, ThermalAngle};

fn ln_fact(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn reference_models() -> Vec<DeformedModel> {
    let b2 = || ParamLists::new(vec![], vec![2.0]).unwrap();
    vec![
        DeformedModel::oscillator(1.0, Spectrum::Linear { e0: 0.5 }).unwrap(),
        DeformedModel::oscillator(1.0, Spectrum::Generalized).unwrap(),
        DeformedModel::new(b2(), 1.0, Spectrum::Generalized).unwrap(),
        DeformedModel::new(b2(), 1.0, Spectrum::Linear { e0: 0.0 }).unwrap(),
    ]
}

/// 1 ≤ p+q ≤ 3 with p ≤ q, parameters in (0.3, 4).
fn param_lists() -> impl Strategy<Value = ParamLists> {
    (0usize..=1, 1usize..=2)
        .prop_flat_map(|(p, q)| (prop::collection::vec(0.3f64..4.0, p), prop::collection::vec(0.3f64..4.0, q)))
        .prop_map(|(a, b)| ParamLists::new(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pochhammer_step(x in prop::sample::select(vec![0.5, 1.0, 2.5]), n in 0u64..50) {
        let d = pochhammer_log(x, n + 1).unwrap() - pochhammer_log(x, n).unwrap();
        prop_assert!((d - (x + n as f64).ln()).abs() <= 1e-12);
    }

    #[test]
    fn hypergeometric_conjugation(params in param_lists(), re in -4.0f64..4.0, im in -4.0f64..4.0) {
        let x = C64::new(re, im);
        let v = hyp_pfq(&params, x).unwrap().value();
        let w = hyp_pfq(&params, x.conj()).unwrap().value();
        prop_assert_eq!(w, v.conj());
    }

    #[test]
    fn structure_constants(params in param_lists()) {
        let Ok(m) = DeformedModel::new(params, 1.0, Spectrum::Generalized) else {
            return Ok(());
        };
        for n in 1..=60usize {
            let dual = m.rho_bg_log(n) + m.rho_kp_log(n) - 2.0 * ln_fact(n);
            prop_assert!(dual.abs() <= 1e-12, "duality off by {dual} at n = {n}");
            let step = m.rho_bg_log(n) - m.rho_bg_log(n - 1) - m.structure_e(n).ln();
            prop_assert!(step.abs() <= 1e-12, "recursion off by {step} at n = {n}");
        }
    }

    #[test]
    fn matched_parameters_collapse(a in prop::collection::vec(0.3f64..4.0, 1..3)) {
        let m = DeformedModel::new(ParamLists::new(a.clone(), a).unwrap(), 1.0, Spectrum::Generalized).unwrap();
        for n in 0..=40usize {
            prop_assert!((m.deformation_f(n).unwrap() - 1.0).abs() <= 1e-14);
            prop_assert!((m.spectrum_e(n) - n as f64).abs() <= 1e-12 * (n as f64).max(1.0));
            prop_assert!((m.rho_bg_log(n) - ln_fact(n)).abs() <= 1e-12);
            prop_assert!((m.rho_kp_log(n) - ln_fact(n)).abs() <= 1e-12);
        }
    }

    #[test]
    fn ladder_products(params in param_lists(), n_max in 4usize..60) {
        let Ok(m) = DeformedModel::new(params, 1.0, Spectrum::Generalized) else {
            return Ok(());
        };
        let t = Truncation::new(n_max, 1e-12).unwrap();
        let l = ladder_matrices(&m, &t);
        let (am, ap) = (l.a_minus(), l.a_plus());
        prop_assert_eq!(&ap, &am.t().to_owned());
        let up_down: Array2<f64> = ap.dot(&am);
        let down_up: Array2<f64> = am.dot(&ap);
        for i in 0..=n_max {
            for j in 0..=n_max {
                if i != j {
                    prop_assert_eq!(up_down[[i, j]], 0.0);
                    prop_assert_eq!(down_up[[i, j]], 0.0);
                }
            }
            let e = m.structure_e(i);
            prop_assert!((up_down[[i, i]] - e).abs() <= 4.0 * f64::EPSILON * e);
            if i < n_max {
                let e1 = m.structure_e(i + 1);
                prop_assert!((down_up[[i, i]] - e1).abs() <= 4.0 * f64::EPSILON * e1);
            }
        }
    }

    #[test]
    fn thermal_angle_identities(beta in 0.05f64..40.0) {
        let a = ThermalAngle::new(beta).unwrap();
        let n_t = 1.0 / beta.exp_m1();
        prop_assert!((a.sinh2 - n_t).abs() <= 1e-12 * n_t.max(1.0));
        prop_assert!((a.cosh2 - n_t - 1.0).abs() <= 1e-12 * n_t.max(1.0));
        prop_assert!((a.theta.tanh() - (-beta / 2.0).exp()).abs() <= 1e-12);
    }

    #[test]
    fn vacuum_normalization_and_thermodynamics(beta in 0.3f64..6.0) {
        let t = Truncation::default();
        for m in reference_models() {
            let tv = thermal_vacuum(&m, beta, &t).unwrap();
            let s = tv.norm_sqr();
            prop_assert!(s <= 1.0 && s >= 1.0 - t.tail_tol(), "ΣC² = {s}");
            let u = internal_energy(&m, beta, &t).unwrap();
            let h = 1e-5 * beta;
            let d = (partition(&m, beta + h, &t).unwrap().log_z - partition(&m, beta - h, &t).unwrap().log_z) / (2.0 * h);
            prop_assert!((u + d).abs() <= 1e-6 * u.abs());
        }
    }

    #[test]
    fn bogoliubov_diagonal(beta in 0.3f64..6.0) {
        let t = Truncation::new(64, 1e-12).unwrap();
        let a = ThermalAngle::new(beta).unwrap();
        for m in reference_models() {
            let n_op = bogoliubov_ops(&m, beta, &t).unwrap().number_operator();
            for n in 0..=t.n_max() - 2 {
                let want = a.cosh2 * m.spectrum_e(n) + a.sinh2 * m.spectrum_e(n + 1);
                prop_assert!((n_op[[n, n]] - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn purification_and_equivalence(beta in 0.3f64..6.0, seed in prop::collection::vec(-1.0f64..1.0, 129)) {
        let t = Truncation::default();
        for m in reference_models() {
            let tv = thermal_vacuum(&m, beta, &t).unwrap();
            let rho = density_build(&m, beta, &t).unwrap();
            let reduced = partial_trace_tilde(&tv);
            for (x, p) in reduced.weights.iter().zip(&rho.weights) {
                if *p > 0.0 {
                    prop_assert!(((x - p) / p).abs() <= 1e-12);
                }
            }
            let a = vacuum_average(&tv, &seed).unwrap();
            let b = thermal_average(&m, &seed, beta, &t).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn husimi_factorizes(zr in -1.5f64..1.5, zi in -1.5f64..1.5, sr in -1.5f64..1.5, si in -1.5f64..1.5,
                         beta in 0.5f64..3.0) {
        let t = Truncation::new(96, 1e-12).unwrap();
        let (z, s) = (C64::new(zr, zi), C64::new(sr, si));
        for m in reference_models() {
            let whole = husimi_q_whole(&m, z, s, beta, &t).unwrap();
            let prod = husimi_q(&m, z, beta, &t).unwrap() * husimi_q(&m, s, beta, &t).unwrap();
            prop_assert!((whole - prod).abs() <= 1e-14 * prod.max(1e-300) + 1e-300);
        }
    }
}

#[test]
fn kind_names_parse() {
    assert_eq!("bg".parse::<CsKind>().unwrap(), CsKind::Bg);
    assert_eq!("kp".parse::<CsKind>().unwrap(), CsKind::Kp);
    assert!("xx".parse::<CsKind>().is_err());
}
