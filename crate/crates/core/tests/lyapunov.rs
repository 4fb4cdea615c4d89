use anomaly_core::catalog;
use anomaly_core::classify::{classify_anomaly, AnomalyReport};
use anomaly_core::family::{Atom, FamilySpec};
use anomaly_core::lyapunov::{
    coeff_elliptic, coeff_hyperbolic, coeff_second_degree, fit_power_law, gamma_from_ij, mc_gamma,
    osc_sums, perturbative_coeff, sweep, CoeffOrder, McParams,
};
use anomaly_core::mat2::Mat2;
use anomaly_core::measure::rho0_diffusive;
use num_complex::Complex64;

/// Complete elliptic integrals K(m), E(m) by the arithmetic-geometric mean.
fn elliptic_ke(m: f64) -> (f64, f64) {
    let (mut a, mut b) = (1.0f64, (1.0 - m).sqrt());
    let mut c = m.sqrt();
    let mut sum = 0.5 * c * c;
    let mut pow = 0.5;
    for _ in 0..12 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow *= 2.0;
        sum += pow * c * c;
    }
    let k = std::f64::consts::PI / (2.0 * a);
    (k, k * (1.0 - sum))
}

fn anderson_diffusive_oracle() -> f64 {
    let (k, e) = elliptic_ke(0.5);
    0.25 * (2.0 * e / k - 1.0)
}

fn dimer_oracle(e: f64) -> f64 {
    2.0 * (1.0 - e * e) / (3.0 - e).powi(2) * (1.0 + 2.0 * (e - 1.0).powi(2) / (7.0 - 2.0 * e - e * e))
}

fn report(f: &FamilySpec) -> AnomalyReport {
    classify_anomaly(f, 4).unwrap()
}

fn centered() -> FamilySpec {
    catalog::anderson(&[(-1.0, 0.5), (1.0, 0.5)], 0.0).unwrap()
}

#[test]
fn oracle_constants() {
    let (k, e) = elliptic_ke(0.5);
    assert!((k - 1.854074677301372).abs() < 1e-14);
    assert!((e - 1.350643881047675).abs() < 1e-14);
    assert!((anderson_diffusive_oracle() - 0.114243).abs() < 1e-4);
}

#[test]
fn deterministic_diagonal_family() {
    let f = FamilySpec::new("d", vec![Atom::from_generators(1.0, "d", 1.0, Mat2::diag(1.0, -1.0), Mat2::ZERO)], 1).unwrap();
    let g = mc_gamma(&f, McParams::new(0.1, 1, 2, 10_000_000)).unwrap();
    assert!((g.gamma - 0.1).abs() < 1e-6, "{}", g.gamma);
}

#[test]
fn rotations_have_zero_exponent() {
    let p = Mat2::new(0.0, -1.0, 1.0, 0.0);
    let f = FamilySpec::new(
        "r",
        vec![
            Atom::from_generators(0.5, "a", 1.0, p, Mat2::ZERO),
            Atom::from_generators(0.5, "b", 1.0, p.scale(-2.0), Mat2::ZERO),
        ],
        1,
    )
    .unwrap();
    let g = mc_gamma(&f, McParams::new(0.3, 1, 4, 100_000)).unwrap();
    assert!(g.gamma.abs() <= 3.0 * g.stderr + 1e-12, "{g:?}");
}

#[test]
fn overflow_halves_interval() {
    let f = FamilySpec::new("d", vec![Atom::from_generators(1.0, "d", 1.0, Mat2::diag(1.0, -1.0), Mat2::ZERO)], 1).unwrap();
    let g = mc_gamma(&f, McParams::new(30.0, 1, 1, 10_000)).unwrap();
    assert_eq!(g.renorm_every, 16);
    assert!(g.renorm_halved(32));
    assert!((g.gamma - 30.0).abs() < 1e-3);
}

#[test]
fn mc_rejects_short_runs() {
    assert!(mc_gamma(&centered(), McParams::new(0.1, 1, 1, 100)).is_err());
}

#[test]
fn anderson_elliptic_coefficient() {
    for vals in [vec![(0.0, 0.5), (1.0, 0.5)], vec![(0.3, 0.2), (-1.0, 0.5), (2.0, 0.3)]] {
        let f = catalog::anderson(&vals, 0.2).unwrap();
        let ev: f64 = vals.iter().map(|(v, w)| v * w).sum();
        let ev2: f64 = vals.iter().map(|(v, w)| v * v * w).sum();
        let c = coeff_elliptic(&report(&f)).unwrap();
        assert_eq!(c.order, CoeffOrder::Quadratic);
        assert!((c.value - (ev2 - ev * ev) / 8.0).abs() < 1e-13, "{} vs {}", c.value, (ev2 - ev * ev) / 8.0);
    }
    let f = catalog::anderson(&[(0.0, 0.5), (1.0, 0.5)], 0.0).unwrap();
    assert!((coeff_elliptic(&report(&f)).unwrap().value - 1.0 / 32.0).abs() < 1e-15);
}

#[test]
fn dimer_coefficient_closed_form() {
    for e in [-0.5, 0.0, 0.5, 0.9, -0.9] {
        let c = coeff_elliptic(&report(&catalog::dimer(e).unwrap())).unwrap();
        assert!((c.value - dimer_oracle(e)).abs() <= 1e-10, "e={e}: {} vs {}", c.value, dimer_oracle(e));
    }
    assert!((dimer_oracle(0.0) - 2.0 / 7.0).abs() < 1e-15);
    for e in [1.0, -1.0] {
        let c = coeff_elliptic(&report(&catalog::dimer(e).unwrap())).unwrap();
        assert!(c.value.abs() < 1e-14);
    }
}

#[test]
fn coefficient_does_not_depend_on_report_basis() {
    let r = report(&catalog::dimer(0.3).unwrap());
    let raw = r.rebased(&Mat2::IDENTITY).unwrap();
    let a = coeff_elliptic(&r).unwrap().value;
    let b = coeff_elliptic(&raw).unwrap().value;
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn synthetic_coefficients() {
    let c = coeff_elliptic(&report(&catalog::synthetic_elliptic(1.0, 1.0).unwrap())).unwrap();
    assert!((c.value - 0.5).abs() < 1e-14);
    let c = coeff_elliptic(&report(&catalog::synthetic_elliptic(0.7, 0.3).unwrap())).unwrap();
    assert!((c.value - 0.045).abs() < 1e-14);
    let f = catalog::synthetic_hyperbolic(1.0, 1.0).unwrap();
    let c = coeff_hyperbolic(&report(&f)).unwrap();
    assert_eq!(c.order, CoeffOrder::Linear);
    assert!((c.value - 0.5).abs() < 1e-14);
    assert_eq!(c.nondegenerate, Some(true));
    let m = Mat2::new(1.3, 0.4, -0.2, 0.7).project_sl2().unwrap();
    let c2 = coeff_hyperbolic(&report(&f.conjugated(&m).unwrap())).unwrap();
    assert!((c2.value - 0.5).abs() < 1e-12);
    assert!(coeff_hyperbolic(&report(&catalog::synthetic_elliptic(1.0, 1.0).unwrap())).is_err());
}

#[test]
fn degenerate_hyperbolic_is_flagged() {
    let f = FamilySpec::new(
        "h",
        vec![Atom::from_generators(1.0, "x", 1.0, Mat2::diag(0.5, -0.5), Mat2::ZERO)],
        1,
    )
    .unwrap();
    let c = coeff_hyperbolic(&report(&f)).unwrap();
    assert_eq!(c.nondegenerate, Some(false));
    assert!((c.value - 0.5).abs() < 1e-15);
}

#[test]
fn second_degree_coefficients_match_oracles() {
    let r = report(&centered());
    let d = rho0_diffusive(&r, 2048).unwrap();
    let c = coeff_second_degree(&r, &d).unwrap();
    assert!((c.value - anderson_diffusive_oracle()).abs() < 1e-10, "{}", c.value);
    // scales with E(v²)
    let f = catalog::anderson(&[(-2.0, 0.5), (2.0, 0.5)], 0.0).unwrap();
    let c4 = perturbative_coeff(&report(&f), 2048).unwrap();
    assert!((c4.value - 4.0 * anderson_diffusive_oracle()).abs() < 1e-10);

    let r = report(&catalog::synthetic_diffusive().unwrap());
    let c = perturbative_coeff(&r, 2048).unwrap();
    assert!((c.value - 4.0 * anderson_diffusive_oracle()).abs() < 1e-10, "{}", c.value);
}

#[test]
fn two_code_paths_agree() {
    let fams = [
        centered(),
        catalog::anderson(&[(-1.0, 0.5), (1.0, 0.5)], 0.5).unwrap(),
        catalog::anderson(&[(-1.0, 0.3), (0.6, 0.5), (0.0, 0.2)], -0.7).unwrap(),
        catalog::synthetic_diffusive().unwrap(),
    ];
    for f in fams {
        let r = report(&f);
        let d = rho0_diffusive(&r, 2048).unwrap();
        let c = coeff_second_degree(&r, &d).unwrap().value;
        assert!(c >= -1e-12);
        for lam in [0.1, 0.01] {
            let g = gamma_from_ij(&r, d.moment(1), d.moment(2), lam);
            assert!((g - c * lam * lam).abs() <= 1e-10, "{}: {g} vs {}", f.name, c * lam * lam);
        }
    }
}

#[test]
fn gamma_from_ij_reductions() {
    let r = report(&catalog::synthetic_elliptic(1.0, 1.0).unwrap());
    let lam = 0.03;
    let g = gamma_from_ij(&r, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), lam);
    let c = coeff_elliptic(&r).unwrap().value;
    assert!((g - c * lam * lam).abs() < 1e-15);

    let r = report(&catalog::synthetic_hyperbolic(1.0, 1.0).unwrap());
    let lam = 1e-3;
    let g = gamma_from_ij(&r, Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), lam);
    // linear term ½λμ, μ = 1
    assert!((g - 0.5 * lam).abs() < 10.0 * lam * lam);
}

#[test]
fn quadratic_coefficients_are_nonnegative() {
    let fams = vec![
        catalog::anderson(&[(0.0, 0.5), (1.0, 0.5)], 0.0).unwrap(),
        centered(),
        catalog::dimer(0.0).unwrap(),
        catalog::dimer(0.5).unwrap(),
        catalog::synthetic_elliptic(1.0, 1.0).unwrap(),
        catalog::synthetic_diffusive().unwrap(),
    ];
    for f in fams {
        let c = perturbative_coeff(&report(&f), 2048).unwrap();
        assert!(c.value >= -1e-12);
    }
}

#[test]
fn mc_is_deterministic() {
    let f = catalog::dimer(0.2).unwrap();
    let p = McParams::new(0.1, 77, 3, 20_000);
    assert_eq!(mc_gamma(&f, p).unwrap(), mc_gamma(&f, p).unwrap());
    let other = mc_gamma(&f, McParams { seed: 78, ..p }).unwrap();
    assert_ne!(other.gamma, mc_gamma(&f, p).unwrap().gamma);
}

fn within(a: f64, sa: f64, b: f64, sb: f64) -> bool {
    (a - b).abs() <= 3.0 * (sa * sa + sb * sb).sqrt()
}

#[test]
fn mc_conjugation_invariance() {
    let fams = [
        catalog::anderson(&[(0.0, 0.5), (1.0, 0.5)], 0.0).unwrap(),
        catalog::synthetic_hyperbolic(1.0, 1.0).unwrap(),
        catalog::synthetic_diffusive().unwrap(),
    ];
    let m = Mat2::new(2.0, 0.7, -0.4, 0.36);
    let m = m.project_sl2().unwrap();
    for f in fams {
        let p = McParams::new(0.1, 11, 8, 200_000);
        let a = mc_gamma(&f, p).unwrap();
        let b = mc_gamma(&f.conjugated(&m).unwrap(), McParams { seed: 12, ..p }).unwrap();
        assert!(within(a.gamma, a.stderr, b.gamma, b.stderr), "{}: {a:?} {b:?}", f.name);
    }
}

#[test]
fn mc_hat_additivity() {
    let f = catalog::anderson(&[(0.0, 0.5), (1.0, 0.5)], 0.0).unwrap();
    let p = McParams { raw: true, ..McParams::new(0.1, 21, 8, 200_000) };
    let a = mc_gamma(&f, p).unwrap();
    let h = f.hat_family(2).unwrap();
    let b = mc_gamma(&h, McParams { steps: 100_000, seed: 22, ..p }).unwrap();
    assert!(within(2.0 * a.gamma, 2.0 * a.stderr, b.gamma, b.stderr), "{a:?} {b:?}");
    // per-original-factor reporting divides by the product length
    let c = mc_gamma(&h, McParams { raw: false, steps: 100_000, seed: 22, ..p }).unwrap();
    assert!((c.gamma - b.gamma / 2.0).abs() < 1e-15);
}

#[test]
fn osc_sums_elliptic_vanish() {
    let f = catalog::synthetic_elliptic(1.0, 1.0).unwrap();
    let r = report(&f);
    let s = osc_sums(&f, &r, 0.05, 1, 10_000, 2_000_000).unwrap();
    assert!(!s.short_run);
    assert!(s.i1.norm() <= 0.06 && s.i2.norm() <= 0.06, "{s:?}");
}

#[test]
fn osc_sums_hyperbolic_near_one() {
    let f = catalog::synthetic_hyperbolic(1.0, 1.0).unwrap();
    let r = report(&f);
    let s = osc_sums(&f, &r, 0.01, 1, 100_000, 2_000_000).unwrap();
    assert!((s.i1.re - 1.0).abs() <= 0.15, "{s:?}");
}

#[test]
fn osc_sums_diffusive_match_density() {
    for f in [centered(), catalog::synthetic_diffusive().unwrap()] {
        let r = report(&f);
        let d = rho0_diffusive(&r, 2048).unwrap();
        let s = osc_sums(&f, &r, 0.05, 3, 100_000, 4_000_000).unwrap();
        assert!((s.i1 - d.moment(1)).norm() <= 0.05, "{s:?} {:?}", d.moment(1));
        assert!((s.i2 - d.moment(2)).norm() <= 0.05, "{s:?} {:?}", d.moment(2));
    }
}

#[test]
fn power_fit_and_sweep() {
    let pts: Vec<(f64, f64)> = [0.2, 0.1, 0.05].iter().map(|&l| (l, 3.0 * l * l)).collect();
    let fit = fit_power_law(&pts).unwrap();
    assert!((fit.exponent - 2.0).abs() < 1e-12 && (fit.prefactor - 3.0).abs() < 1e-12);
    let fit = fit_power_law(&[(0.2, 1.0), (0.1, -1.0), (0.05, 0.25)]).unwrap();
    assert_eq!(fit.dropped, vec![0.1]);
    let f = catalog::synthetic_hyperbolic(1.0, 1.0).unwrap();
    assert!(sweep(&f, &[0.01, 0.02], McParams::new(0.0, 1, 2, 10_000), CoeffOrder::Linear).is_err());
    let s = sweep(&f, &[0.04, 0.02, 0.01], McParams::new(0.0, 1, 4, 200_000), CoeffOrder::Linear).unwrap();
    assert_eq!(s.estimates.len(), 3);
    assert!((s.exponent().unwrap() - 1.0).abs() < 0.1, "{s:?}");
    assert!((s.fitted_coefficient - 0.5).abs() < 0.1);
}
