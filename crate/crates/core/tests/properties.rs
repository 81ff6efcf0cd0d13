//! Randomized invariants across the library.

use std::f64::consts::PI;

use approx::relative_eq;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;

use biorthogonal::biortho::{
    apply_hamiltonian, build_dual, build_eigenfunction, gamma_inhomogeneity, pairing, BiorthogonalSystem, BuildOptions,
    EigenMethod, Sector,
};
use biorthogonal::classical::{
    circle_geometry, closed_form_single_exp, hamiltonian_value, integrate, momentum_amplitude, Branch, PhasePoint,
    TrajectoryConfig,
};
use biorthogonal::kernels::{
    bessel_bilinear_sum, ham_kernel_h, ham_kernel_h_nu, magnetic_bilinear_sum, norm_kernel_j, norm_kernel_j_nu,
    norm_via_kernel, energy_via_kernel, periodic_grid, trilinear_transform,
};
use biorthogonal::models::{darboux_system, single_exp_system, two_exp_system};
use biorthogonal::qft::{multi_exp_instability, trial_energy, ExpTerm, QftTrialParams};
use biorthogonal::specfun::{bessel_j, bessel_j_poly, gamma_real, gegenbauer_a, gegenbauer_c, SeriesControl};
use biorthogonal::{HamiltonianSpec, LaurentPoly};

fn ctl() -> SeriesControl {
    SeriesControl::default()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

fn complex_in(r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..r, 0.0..2.0 * PI).prop_map(|(m, a)| Complex64::from_polar(m, a))
}

/// Up to four couplings `mu_k`, `k = 1..=4`, with `sum |mu_k| <= 4`.
fn couplings() -> impl Strategy<Value = Vec<(u32, Complex64)>> {
    prop::collection::btree_map(1u32..=4, complex_in(1.0), 1..=4).prop_map(|m| m.into_iter().collect())
}

fn spec_of(nu: f64, mu: &[(u32, Complex64)]) -> HamiltonianSpec {
    HamiltonianSpec::new(nu, mu.iter().copied(), "random").unwrap()
}

fn opts(n_max: usize, trunc: usize) -> BuildOptions {
    BuildOptions {
        n_max,
        trunc,
        ..BuildOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bessel_reflection(n in 0u32..=12, z in complex_in(3.0)) {
        let pos = bessel_j(n as f64, z, ctl()).unwrap();
        let neg = bessel_j(-(n as f64), z, ctl()).unwrap();
        let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
        prop_assert!((neg - sign * pos).norm() <= 1e-13 * pos.norm().max(1.0));
    }

    #[test]
    fn bessel_three_term(n in 1u32..=10, r in 0.1f64..3.0, a in 0.0..2.0 * PI) {
        let z = Complex64::from_polar(r, a);
        let j = |k: u32| bessel_j(k as f64, z, ctl()).unwrap();
        prop_assert!((j(n - 1) + j(n + 1) - 2.0 * n as f64 / z * j(n)).norm() <= 1e-11);
    }

    #[test]
    fn raising_and_lowering_on_the_circle(n in 1u32..=10, m in 0.1f64..2.0, x in 0.0..2.0 * PI) {
        let z = m * cis(x);
        let jn = bessel_j_poly(n, m, 40);
        // -i d/dx acts on e^{ix} series as z d/dz
        let d = jn.momentum();
        let up = bessel_j(n as f64 + 1.0, z, ctl()).unwrap();
        let down = bessel_j(n as f64 - 1.0, z, ctl()).unwrap();
        let v = jn.eval(x);
        prop_assert!((d.eval(x) - n as f64 * v + z * up).norm() <= 1e-11);
        prop_assert!((d.eval(x) + n as f64 * v - z * down).norm() <= 1e-11);
    }

    #[test]
    fn generating_function(z in complex_in(2.0)) {
        for theta in periodic_grid(64) {
            let sum: Complex64 = (-30i32..=30)
                .map(|n| bessel_j(n as f64, z, ctl()).unwrap() * cis(n as f64 * theta))
                .sum();
            prop_assert!(((Complex64::i() * z * theta.sin()).exp() - sum).norm() <= 1e-12);
        }
    }

    #[test]
    fn gegenbauer_contour_transform(n in 0u32..=6, half in any::<bool>(), z in complex_in(1.0)) {
        let nu = if half { 0.5 } else { 1.3 };
        let points = 256;
        let integral: Complex64 = periodic_grid(points)
            .into_iter()
            .map(|phi| {
                let w = cis(phi);
                // dw / (2 pi i) = w dphi / 2pi
                (Complex64::i() * z * w).exp() * gegenbauer_a(n, nu, w).unwrap() * w
            })
            .sum::<Complex64>()
            / points as f64;
        let want = 2f64.powf(nu) * Complex64::i().powu(n) * (nu + n as f64) * gamma_real(nu).unwrap()
            * gegenbauer_c(n, nu, z);
        prop_assert!((integral - want).norm() <= 1e-9, "{integral} vs {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn complex_energy_is_conserved(mu in couplings(), x0 in -PI..PI, p0 in complex_in(1.0)) {
        let mu: Vec<(u32, Complex64)> = mu.into_iter().map(|(k, v)| (k, v * 0.5)).collect();
        let spec = spec_of(0.0, &mu);
        let start = PhasePoint::new(c(x0, 0.0), p0, 0.0);
        let h0 = hamiltonian_value(&spec, &start);
        // Near a movable singularity |p| blows up and a fixed step cannot follow it; such
        // excursions abort at the bound and are not asserted on.
        if let Ok(traj) = integrate(&spec, start, TrajectoryConfig { bound: 2.0, ..TrajectoryConfig::new(1e-3, 2000) }) {
            let drift = traj.points.iter().map(|pt| (hamiltonian_value(&spec, pt) - h0).norm()).fold(0.0, f64::max);
            prop_assert!(drift <= 1e-8 * h0.norm().max(1.0), "drift {drift}");
        }
    }

    #[test]
    fn energy_drift_is_fourth_order_discretization_error(mu in couplings(), x0 in -PI..PI, p0 in complex_in(1.0)) {
        let mu: Vec<(u32, Complex64)> = mu.into_iter().map(|(k, v)| (k, v * 0.5)).collect();
        let spec = spec_of(0.0, &mu);
        let start = PhasePoint::new(c(x0, 0.0), p0, 0.0);
        let h0 = hamiltonian_value(&spec, &start);
        let drift = |dt: f64| {
            let cfg = TrajectoryConfig { bound: 100.0, ..TrajectoryConfig::new(dt, (2.0 / dt).round() as usize) };
            integrate(&spec, start, cfg)
                .map(|t| t.points.iter().map(|pt| (hamiltonian_value(&spec, pt) - h0).norm()).fold(0.0, f64::max))
        };
        if let (Ok(coarse), Ok(fine)) = (drift(1e-3), drift(5e-4)) {
            // below ~1e-11 the drift is mostly rounding, not truncation
            if coarse > 1e-11 * h0.norm().max(1.0) {
                let ratio = coarse / fine;
                prop_assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}, drift {coarse}");
            }
        }
    }

    #[test]
    fn unit_amplitude_means_imaginary_momentum(e in 0.05f64..4.0, m in 0.3f64..2.0, y in -2.0f64..2.0) {
        // e^{2 i x0} = E (1 + y^2) / m^2 puts sqrt(1 - m^2 e^{2ix0}/E) on the imaginary axis
        let x0 = c(0.0, -0.5 * (e * (1.0 + y * y) / (m * m)).ln());
        let energy = c(e, 0.0);
        let a = momentum_amplitude(m, energy, x0).unwrap();
        prop_assert!((a.norm() - 1.0).abs() <= 1e-10);
        prop_assert!(circle_geometry(a, e, Branch::Plus).unwrap().degenerate);
        for k in 0..20 {
            let p = closed_form_single_exp(m, energy, x0, Branch::Plus, 0.05 * k as f64).unwrap().point.p;
            prop_assert!(p.re.abs() <= 1e-8 * p.norm().max(1.0));
        }
    }

    #[test]
    fn generic_amplitude_means_complex_momentum(e in 0.05f64..4.0, m in 0.3f64..2.0, x0 in 0.2f64..1.3) {
        let energy = c(e, 0.0);
        let x0 = c(x0, 0.0);
        let a = momentum_amplitude(m, energy, x0).unwrap();
        prop_assert!((a.norm() - 1.0).abs() > 1e-10);
        let most = (0..20)
            .map(|k| closed_form_single_exp(m, energy, x0, Branch::Plus, 0.05 * k as f64).unwrap().point.p.re.abs())
            .fold(0.0, f64::max);
        prop_assert!(most > 1e-8);
    }

    #[test]
    fn momentum_stays_on_circle(e in 0.05f64..4.0, m in 0.3f64..2.0, x0 in 0.2f64..1.3, minus in any::<bool>()) {
        let branch = if minus { Branch::Minus } else { Branch::Plus };
        let spec = HamiltonianSpec::single_exp(m, 0.0).unwrap();
        let (energy, x0) = (c(e, 0.0), c(x0, 0.0));
        let p0 = branch.sign() * (energy - spec.potential(x0)).sqrt();
        let traj = integrate(&spec, PhasePoint::new(x0, p0, 0.0), TrajectoryConfig::new(1e-3, 500)).unwrap();
        let circle = circle_geometry(momentum_amplitude(m, energy, x0).unwrap(), e, branch).unwrap();
        let worst = traj.points.iter().map(|pt| circle.distance(pt.p)).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-6, "{worst}");
    }
}

#[test]
fn rk4_is_fourth_order() {
    let spec = HamiltonianSpec::single_exp(1.0, 0.0).unwrap();
    let (energy, x0) = (c(0.25, 0.0), c(1.0, 0.0));
    let p0 = (energy - spec.potential(x0)).sqrt();
    let deviation = |dt: f64| {
        let steps = (2.0 / dt).round() as usize;
        let traj = integrate(&spec, PhasePoint::new(x0, p0, 0.0), TrajectoryConfig::new(dt, steps)).unwrap();
        traj.points
            .iter()
            .map(|pt| (closed_form_single_exp(1.0, energy, x0, Branch::Plus, pt.t).unwrap().point.p - pt.p).norm())
            .fold(0.0, f64::max)
    };
    let ratio = deviation(0.02) / deviation(0.01);
    assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn built_systems_are_biorthonormal_eigenbases(nu in 0.0f64..1.0, mu in couplings()) {
        let spec = spec_of(nu, &mu);
        let sys = BiorthogonalSystem::build(&spec, opts(15, 60)).unwrap();
        prop_assert!(sys.biorthonormality_deviation() <= 1e-10);
        prop_assert!(sys.eigen_residual().retained <= 1e-10);
        for (n, e) in sys.energies().iter().enumerate() {
            prop_assert!(relative_eq!(*e, (nu + n as f64).powi(2), max_relative = 4.0 * f64::EPSILON));
        }
    }

    #[test]
    fn dual_residual_lives_at_positive_powers(nu in 0.0f64..1.0, mu in couplings(), n in 0usize..=10) {
        let spec = spec_of(nu, &mu);
        let chi = build_dual(&spec, n, Sector::Right, 0).unwrap();
        let e = (nu + n as f64).powi(2);
        let r = &apply_hamiltonian(&spec, &chi, true) - &chi.scale(c(e, 0.0));
        let low = r.terms().filter(|(p, _)| *p <= 0).map(|(_, v)| v.norm()).fold(0.0, f64::max);
        prop_assert!(low <= 1e-13 * chi.sup_norm(), "{low}");
        // the positive powers are the reported inhomogeneity
        let gamma = gamma_inhomogeneity(&spec, n, Sector::Right, 0).unwrap();
        for (p, v) in r.terms().filter(|(p, _)| *p >= 1) {
            let g = gamma.get(&(p as u32)).copied().unwrap_or(c(0.0, 0.0));
            prop_assert!((v - g).norm() <= 1e-12 * chi.sup_norm().max(1.0));
        }
        // and never meets an eigenfunction in a pairing
        let sys = BiorthogonalSystem::build(&spec, opts(6, 30)).unwrap();
        for k in gamma.keys() {
            let probe = LaurentPoly::monomial(*k as i64, c(1.0, 0.0));
            for psi in sys.psi() {
                prop_assert_eq!(pairing(&probe, psi), c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn triangular_and_frobenius_agree(nu in 0.0f64..1.0, mu in couplings(), n in 0usize..=6) {
        let spec = spec_of(nu, &mu);
        let a = build_eigenfunction(&spec, n, 30, Sector::Right, EigenMethod::Frobenius).unwrap();
        let b = build_eigenfunction(&spec, n, 30, Sector::Right, EigenMethod::Triangular).unwrap();
        prop_assert!((&a - &b).sup_norm() <= 1e-12 * a.sup_norm());
    }

    #[test]
    fn ehrenfest_for_four_states(cs in prop::collection::vec(complex_in(1.0), 4), t in 0.0f64..2.0) {
        let spec = HamiltonianSpec::single_exp(1.0, 0.0).unwrap();
        let sys = BiorthogonalSystem::build(&spec, opts(8, 60)).unwrap();
        let mut coeffs = vec![c(0.0, 0.0); 9];
        coeffs[..4].copy_from_slice(&cs);
        prop_assume!(cs.iter().any(|z| z.norm() > 1e-3));
        let state = sys.state(coeffs).unwrap();
        prop_assert!(state.ehrenfest_residual(t, 1e-3).unwrap() <= 1e-6);
    }
}

/// `chi_n` coefficients by exact rational recursion `c_k = sum mu_j c_{k-j} / (k (2n + 2nu - k))`.
fn exact_dual(nu: &BigRational, mu: &[(u32, BigRational)], n: usize) -> Vec<BigRational> {
    let two_n_nu = BigRational::from_integer(BigInt::from(2 * n)) + nu * BigRational::from_integer(2.into());
    let mut cs = vec![BigRational::from_integer(1.into())];
    for k in 1..=n {
        let kq = BigRational::from_integer(BigInt::from(k));
        let acc = mu
            .iter()
            .filter(|(j, _)| *j as usize <= k)
            .fold(BigRational::from_integer(0.into()), |acc, (j, m)| acc + m * &cs[k - *j as usize]);
        cs.push(acc / (kq.clone() * (two_n_nu.clone() - kq)));
    }
    cs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dual_recursion_cancels_exactly(
        nu_num in 0i64..8,
        mu in prop::collection::btree_map(1u32..=3, -4i64..=4, 1..=3),
        n in 0usize..=8,
    ) {
        let q = |v: i64| BigRational::from_integer(BigInt::from(v));
        let nu = BigRational::new(nu_num.into(), 8.into());
        let mu_q: Vec<(u32, BigRational)> = mu.iter().map(|(k, v)| (*k, q(*v))).collect();
        let cs = exact_dual(&nu, &mu_q, n);
        let energy = (q(n as i64) + nu.clone()) * (q(n as i64) + nu.clone());
        // (H~ - E) chi at powers -n..=0, with H~ = (p - nu)^2 + sum mu_k z^k
        for j in 0..=n {
            let p = q(j as i64 - n as i64);
            let mut v = (p.clone() - nu.clone()) * (p - nu.clone()) * cs[j].clone() - energy.clone() * cs[j].clone();
            for (k, m) in &mu_q {
                if *k as usize <= j {
                    v += m * &cs[j - *k as usize];
                }
            }
            prop_assert_eq!(v, q(0));
        }
        // the library's floating-point dual is this rational dual, rounded
        let spec = spec_of(
            nu_num as f64 / 8.0,
            &mu.iter().map(|(k, v)| (*k, c(*v as f64, 0.0))).collect::<Vec<_>>(),
        );
        let chi = build_dual(&spec, n, Sector::Right, 0).unwrap();
        for (j, exact) in cs.iter().enumerate() {
            let want = exact.numer().to_string().parse::<f64>().unwrap() / exact.denom().to_string().parse::<f64>().unwrap();
            let got = chi.coeff(j as i64 - n as i64);
            prop_assert!((got - want).norm() <= 1e-13 * want.abs().max(1.0), "{got} vs {want}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn kernels_equal_their_bilinear_sums(m in 0.1f64..2.0, nu in 0.0f64..1.5, x in 0.0..2.0 * PI, y in 0.0..2.0 * PI) {
        let j = bessel_bilinear_sum(m, x, y, 40, |_| 1.0).unwrap();
        prop_assert!((j - norm_kernel_j(m, x, y).unwrap()).norm() <= 1e-9);
        let h = bessel_bilinear_sum(m, x, y, 40, |n| (n * n) as f64).unwrap();
        prop_assert!((h - ham_kernel_h(m, x, y).unwrap()).norm() <= 1e-9);
        let jn = magnetic_bilinear_sum(m, nu, x, y, 40, |_| 1.0).unwrap();
        prop_assert!((jn - norm_kernel_j_nu(m, nu, x, y).unwrap()).norm() <= 1e-9);
        let hn = magnetic_bilinear_sum(m, nu, x, y, 40, |n| (nu + n as f64).powi(2)).unwrap();
        prop_assert!((hn - ham_kernel_h_nu(m, nu, x, y).unwrap()).norm() <= 1e-9);
    }

    #[test]
    fn kernel_intertwines_h_and_h_star(m in 0.1f64..2.0, x in 0.3f64..5.9, y in 0.3f64..5.9) {
        // eighth-order central second derivative
        let w = [-1.0 / 560.0, 8.0 / 315.0, -1.0 / 5.0, 8.0 / 5.0, -205.0 / 72.0];
        let h = 0.02;
        let d2 = |f: &dyn Fn(f64) -> Complex64, t: f64| {
            let mut s = w[4] * f(t);
            for (k, wk) in w[..4].iter().enumerate() {
                let off = (4 - k) as f64 * h;
                s += *wk * (f(t + off) + f(t - off));
            }
            s / (h * h)
        };
        let j = |a: f64, b: f64| norm_kernel_j(m, a, b).unwrap();
        let left = -d2(&|t| j(t, y), x) + m * m * cis(-2.0 * x) * j(x, y);
        let right = -d2(&|t| j(x, t), y) + m * m * cis(2.0 * y) * j(x, y);
        prop_assert!((left - right).norm() <= 1e-6, "{}", (left - right).norm());
    }

    #[test]
    fn trilinear_transform_factorizes(m in 0.1f64..2.0, n in 0u32..=6, x in 0.0..2.0 * PI, y in 0.0..2.0 * PI) {
        let got = trilinear_transform(m, n, x, y, 256).unwrap();
        let want = bessel_j(n as f64, m * cis(x), ctl()).unwrap() * bessel_j(n as f64, m * cis(y), ctl()).unwrap();
        prop_assert!((got - want).norm() <= 1e-9);
    }

    #[test]
    fn closed_forms_match_builds(m in 0.1f64..2.0, nu in 0.0f64..1.0) {
        let (_, rep) = single_exp_system(m, nu, 12, 60).unwrap();
        prop_assert!(rep.max_closedform_dev <= 1e-10, "{rep:?}");
        let (_, rep) = darboux_system(m, 12, 60).unwrap();
        prop_assert!(rep.max_closedform_dev <= 1e-10, "{rep:?}");
    }

    #[test]
    fn two_exponential_isospectral(mu1 in complex_in(2.0), mu2 in complex_in(2.0), nu in 0.0f64..1.0) {
        prop_assume!(mu2.norm() > 0.05);
        let (sys, rep) = two_exp_system(mu1, mu2, nu, 10, 60).unwrap();
        prop_assert!(rep.max_eigen_residual <= 1e-10 && rep.max_biorth_dev <= 1e-10, "{rep:?}");
        prop_assert!(rep.checks["psi_vs_kummer"] <= 1e-10, "{rep:?}");
        for (n, e) in sys.energies().iter().enumerate() {
            prop_assert!(relative_eq!(*e, (nu + n as f64).powi(2), max_relative = 4.0 * f64::EPSILON));
        }
    }

    // real nu, mu1 and sqrt(-mu2): x -> -x with conjugation maps each psi_n to itself
    #[test]
    fn two_exponential_pt_slice(mu1 in -2.0f64..2.0, s in 0.3f64..1.4, nu in 0.0f64..1.0) {
        let (sys, rep) = two_exp_system(Complex64::new(mu1, 0.0), Complex64::new(-s * s, 0.0), nu, 10, 60).unwrap();
        prop_assert!(rep.max_eigen_residual <= 1e-10 && rep.max_biorth_dev <= 1e-10, "{rep:?}");
        for psi in sys.psi() {
            for p in psi.min_power()..=psi.max_power() {
                prop_assert!(psi.coeff(p).im == 0.0, "power {p}: {}", psi.coeff(p));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3))]

    #[test]
    fn double_quadrature_routes(cs in prop::collection::vec(complex_in(1.0), 2..=5)) {
        prop_assume!(cs.iter().any(|z| z.norm() > 1e-2));
        let norm: f64 = cs.iter().map(|z| z.norm_sqr()).sum();
        let avg = cs.iter().enumerate().map(|(n, z)| (n * n) as f64 * z.norm_sqr()).sum::<f64>() / norm;
        prop_assert!((norm_via_kernel(1.0, &cs, 256).unwrap() - norm).norm() <= 1e-8 * norm);
        prop_assert!((energy_via_kernel(1.0, &cs, 256).unwrap() - avg).norm() <= 1e-8 * avg.max(1.0));
    }
}

proptest! {
    #[test]
    fn multi_exp_unstable_iff_k_above_five(ks in prop::collection::btree_set(1u32..=8, 1..=4), g in -2.0f64..-0.1) {
        let terms: Vec<ExpTerm> = ks.iter().map(|k| ExpTerm { k: *k as f64, coupling: g }).collect();
        let rep = multi_exp_instability(&terms, 1.0, 1e3, 40).unwrap();
        let want: Vec<f64> = ks.iter().filter(|k| **k > 5).map(|k| *k as f64).collect();
        prop_assert_eq!(rep.unstable.iter().map(|t| t.k).collect::<Vec<_>>(), want);
    }

    #[test]
    fn trial_energy_real_and_continuous(mu in -3.0f64..3.0, beta in 0.1f64..3.0, j in -3i32..=3, big in 1.0f64..100.0) {
        let xi = j as f64 * PI / (2.0 * beta);
        let at = |mass: f64| trial_energy(&QftTrialParams { mu: c(mu, 0.0), beta, xi, trial_mass: mass, m: 1.0 }).unwrap();
        let e = at(big);
        // measured against the size of the two terms, which may cancel in the sum
        let scale = mu.abs() * big.powf(beta * beta / PI) + (big * big - 1.0) / (8.0 * PI);
        prop_assert!(e.im.abs() <= 1e-14 * scale.max(1.0));
        let step = (at(big * (1.0 + 1e-9)) - e).norm();
        prop_assert!(step <= 1e-6 * e.norm().max(1.0));
    }
}
