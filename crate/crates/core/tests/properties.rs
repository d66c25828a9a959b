use num_complex::Complex64 as C;
use proptest::prelude::*;
use sl_spectra::asymptotics::paper_quantities;
use sl_spectra::boundary::{biorthogonality_matrix, Family, OperatorSpec};
use sl_spectra::diagnostics::{eigenfunction_residual, pair_overlap, uv_coefficients};
use sl_spectra::ode::integrate_fundamental_rk;
use sl_spectra::potential::{sample_uniform, standard_even_potential, trapezoid_inner, TrigPotential};
use sl_spectra::solver::{
    boundary_matrix, char_det_tol, eigenfunction, fix_phase, hausdorff, solve_disk, SolverOptions,
};
use std::f64::consts::PI;

fn complex(r: f64) -> impl Strategy<Value = C> {
    (-r..r, -r..r).prop_map(|(a, b)| C::new(a, b))
}

fn potential(max_degree: usize, amp: f64) -> impl Strategy<Value = TrigPotential> {
    (1..=max_degree).prop_flat_map(move |k| {
        (
            prop::collection::vec(complex(amp), k),
            prop::collection::vec(complex(amp), k),
        )
            .prop_map(|(c, s)| TrigPotential::new(c, s).unwrap())
    })
}

fn admissible(family: Family) -> impl Strategy<Value = OperatorSpec> {
    complex(5.0)
        .prop_filter("away from ±1", |p| (p - 1.0).norm() > 0.1 && (p + 1.0).norm() > 0.1)
        .prop_map(move |p| OperatorSpec::new(family, p).unwrap())
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::T1), Just(Family::T2), Just(Family::T3), Just(Family::T4)]
}

/// Normalized samples of a random trigonometric combination.
fn normalized(q: &TrigPotential, points: usize) -> Vec<C> {
    let mut v = sample_uniform(points, |x| q.eval(x) + C::new(0.3, 0.1));
    let norm = trapezoid_inner(&v, &v).unwrap().re.sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn overlap_obeys_cauchy_schwarz(a in potential(6, 1.0), b in potential(6, 1.0)) {
        let (u, v) = (normalized(&a, 513), normalized(&b, 513));
        prop_assert!(pair_overlap(&u, &v).unwrap().norm() <= 1.0 + 1e-8);
        prop_assert!((pair_overlap(&u, &u).unwrap() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn phase_fix_is_idempotent(q in potential(4, 1.0), f in family(), n in 1u32..8) {
        let spec = OperatorSpec::new(f, C::new(3.0, 0.0)).unwrap();
        let mut psi = normalized(&q, 1025);
        fix_phase(&spec, n, &mut psi);
        let once = psi.clone();
        fix_phase(&spec, n, &mut psi);
        for (a, b) in once.iter().zip(&psi) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn biorthogonal_for_random_parameters(spec in family().prop_flat_map(admissible)) {
        prop_assert!(biorthogonality_matrix(&spec, 8).unwrap().max_deviation() < 1e-10);
    }

    #[test]
    fn taylor_and_runge_kutta_determinants_agree(
        q in potential(3, 2.0),
        f in family(),
        re in 1.0f64..2000.0,
        im in -20.0f64..20.0,
    ) {
        let spec = OperatorSpec::new(f, C::new(3.0, 0.0)).unwrap();
        let l = C::new(re, im);
        let taylor = char_det_tol(&spec, &q, l, 1e-13).unwrap();
        let m = boundary_matrix(&spec, &integrate_fundamental_rk(&q, l, 1e-12).unwrap());
        let rk = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        // Entries are O(cosh(Im √λ)); compare on that scale.
        let scale = 1.0 + l.sqrt().im.abs().cosh().powi(2);
        prop_assert!((taylor - rk).norm() < 1e-7 * scale, "{taylor} vs {rk}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Conjugating `β` and `q` conjugates the spectrum.
    #[test]
    fn spectrum_conjugation(q in potential(3, 1.0), beta in complex(4.0), n in 3u32..7) {
        prop_assume!((beta - 1.0).norm() > 0.2 && (beta + 1.0).norm() > 0.2);
        let opts = SolverOptions { tol: 1e-11, ..Default::default() };
        let a = solve_disk(&OperatorSpec::t1(beta).unwrap(), &q, n, &opts).unwrap();
        let b = solve_disk(&OperatorSpec::t1(beta.conj()).unwrap(), &q.conj(), n, &opts).unwrap();
        prop_assert_eq!(a.count, b.count);
        let la: Vec<C> = a.records.iter().map(|r| r.lambda.conj()).collect();
        let lb: Vec<C> = b.records.iter().map(|r| r.lambda).collect();
        prop_assert!(hausdorff(&la, &lb) < 1e-6);
    }
}

/// For `q → εq` the pair sum moves by `ε(Q_n + P*_n) + O(ε²)`.
#[test]
fn pair_sum_follows_first_order_couplings() {
    let spec = OperatorSpec::t1(C::new(3.0, 0.0)).unwrap();
    let opts = SolverOptions {
        tol: 1e-12,
        ..Default::default()
    };
    let n = 5;
    let mut errors = Vec::new();
    for eps in [0.1, 0.05] {
        let mut sin = vec![C::new(0.0, 0.0); 10];
        sin[0] = C::new(0.0, eps);
        sin[1] = C::new(eps, 0.0);
        sin[9] = C::new(eps, 0.0);
        let q = TrigPotential::new(vec![C::new(0.5 * eps, 0.0)], sin).unwrap();
        let sol = solve_disk(&spec, &q, n, &opts).unwrap();
        let sum: C = sol.records.iter().map(|r| r.lambda * r.multiplicity as f64).sum();
        let pq = paper_quantities(&spec, &q, n).unwrap();
        let predicted = 2.0 * spec.base_eigenvalue(n) + pq.q_n + pq.p_star;
        errors.push((sum - predicted).norm());
    }
    // Halving ε should cut the error by about four.
    let ratio = errors[0] / errors[1];
    assert!(ratio > 3.0 && ratio < 5.0, "{errors:?}");
}

/// `|u|·n^{1/2}` stays bounded for T1 with the standard potential.
#[test]
fn t1_u_coefficient_decays() {
    let spec = OperatorSpec::t1(C::new(3.0, 0.0)).unwrap();
    let q = standard_even_potential();
    let opts = SolverOptions {
        tol: 1e-10,
        ..Default::default()
    };
    let mut scaled = Vec::new();
    for n in [8u32, 12, 16] {
        for r in solve_disk(&spec, &q, n, &opts).unwrap().records {
            let psi = eigenfunction(&spec, &q, r.lambda, n, 2048).unwrap();
            let (u, _) = uv_coefficients(&spec, &psi, n).unwrap();
            scaled.push(u.norm() * (n as f64).sqrt());
        }
    }
    let max = scaled.iter().cloned().fold(0.0, f64::max);
    let min = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max < 3.0 * min && max < 10.0, "{scaled:?}");
}

/// A negated eigenfunction is `2√2` away in sup norm until the phase is fixed.
#[test]
fn phase_fix_matters_for_the_residual() {
    let spec = OperatorSpec::t1(C::new(3.0, 0.0)).unwrap();
    let n = 4;
    let mut psi: Vec<C> = sample_uniform(1025, |x| {
        C::new(-(2.0f64).sqrt() * (2.0 * PI * n as f64 * x).cos(), 0.0)
    });
    let (before, _) = eigenfunction_residual(&spec, &psi, n);
    assert!((before - 2.0 * 2.0f64.sqrt()).abs() < 1e-9);
    fix_phase(&spec, n, &mut psi);
    assert!(eigenfunction_residual(&spec, &psi, n).0 < 1e-9);
}
