use proptest::prelude::*;
use qspan_core::asymptotics::{
    moment_asymptotic, pi_cumulative, pi_universal, renyi_asymptotic, von_neumann_asymptotic,
    weighted_renyi, weighted_von_neumann, Correction, CumulantSeries, WeightFunction,
};
use qspan_core::ed::{
    averaged_state, cumulant_densities, energy_cumulants, energy_cumulants_from_state, Boundary,
    Pauli, PauliHamiltonian, SpectralDecomposition,
};
use qspan_core::overlap::{ising_f, InitialField, IsingQuench};
use qspan_core::special::{erf, erf_inv, polylog_half_branch};
use qspan_core::Complex64;

const PAULIS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

fn random_chain(l: usize, fields: &[(u8, f64)], bonds: &[(u8, u8, f64)]) -> PauliHamiltonian {
    let mut h = PauliHamiltonian::new(l, Boundary::Periodic).unwrap();
    for (site, &(p, c)) in fields.iter().enumerate() {
        h.add_term(c, &[(site % l, PAULIS[p as usize % 3])])
            .unwrap();
    }
    for (site, &(a, b, c)) in bonds.iter().enumerate() {
        let s = site % l;
        h.add_term(
            c,
            &[
                (s, PAULIS[a as usize % 3]),
                ((s + 1) % l, PAULIS[b as usize % 3]),
            ],
        )
        .unwrap();
    }
    h
}

fn normalised(raw: &[f64]) -> Vec<Complex64> {
    let v: Vec<Complex64> = raw.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

fn system() -> impl Strategy<Value = (PauliHamiltonian, Vec<Complex64>)> {
    (
        prop::collection::vec((0u8..3, -1.5f64..1.5), 4),
        prop::collection::vec((0u8..3, 0u8..3, -1.5f64..1.5), 4),
        prop::collection::vec(-1.0f64..1.0, 32),
    )
        .prop_filter("non-zero state", |(_, _, s)| {
            s.iter().any(|x| x.abs() > 0.1)
        })
        .prop_map(|(f, b, s)| (random_chain(4, &f, &b), normalised(&s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn erf_inverse_round_trip(y in -0.999f64..0.999) {
        let x = erf_inv(y).unwrap();
        prop_assert!((erf(x) - y).abs() < 1e-12);
    }

    #[test]
    fn polylog_branch_nonincreasing(x in 1.0f64..1e6, step in 1e-6f64..10.0) {
        let a = polylog_half_branch(x).unwrap();
        let b = polylog_half_branch(x + step).unwrap();
        prop_assert!(b <= a + 1e-15 * a.abs());
    }

    #[test]
    fn polylog_branch_vanishes_below_one(x in 1e-12f64..=1.0) {
        prop_assert_eq!(polylog_half_branch(x).unwrap(), 0.0);
    }

    #[test]
    fn pi_cumulative_is_running_integral(y in 0.01f64..0.99) {
        // d/dy erfc(√(-log y)) = Π(y)
        let h = 1e-6 * y;
        let slope = (pi_cumulative(y + h) - pi_cumulative(y - h)) / (2.0 * h);
        prop_assert!((slope - pi_universal(y).unwrap()).abs() < 1e-6 * slope);
    }

    #[test]
    fn entropies_are_additive_in_log_volume(
        e2 in 0.1f64..5.0,
        t in 0.05f64..10.0,
        l in 2u64..100_000,
        l2 in 2u64..100_000,
        d in 1u32..3,
        alpha in 0.2f64..6.0,
    ) {
        prop_assume!((alpha - 1.0).abs() > 1e-3);
        let a = CumulantSeries::gaussian(e2, l, d).unwrap();
        let b = a.with_l(l2).unwrap();
        let shift = 0.5 * d as f64 * ((l2 as f64).ln() - (l as f64).ln());
        let dr = renyi_asymptotic(&b, t, alpha, Correction::None).unwrap()
            - renyi_asymptotic(&a, t, alpha, Correction::None).unwrap();
        let dv = von_neumann_asymptotic(&b, t).unwrap() - von_neumann_asymptotic(&a, t).unwrap();
        prop_assert!((dr - shift).abs() < 1e-10);
        prop_assert!((dv - shift).abs() < 1e-10);
        let w = WeightFunction::uniform(t).unwrap();
        let dw = weighted_renyi(&b, &w, alpha).unwrap() - weighted_renyi(&a, &w, alpha).unwrap();
        let dwv = weighted_von_neumann(&b, &w).unwrap() - weighted_von_neumann(&a, &w).unwrap();
        prop_assert!((dw - shift).abs() < 1e-10);
        prop_assert!((dwv - shift).abs() < 1e-10);
    }

    #[test]
    fn moments_decrease_with_order(e2 in 0.1f64..5.0, t in 0.5f64..5.0, l in 10u64..10_000) {
        let c = CumulantSeries::gaussian(e2, l, 1).unwrap();
        let m: Vec<f64> = (2..=6).map(|a| moment_asymptotic(&c, t, a as f64).unwrap()).collect();
        prop_assert!(m.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn ising_mode_angle_is_a_cosine(h_i in -3.0f64..3.0, h_f in -3.0f64..3.0, k in 0.0f64..std::f64::consts::PI) {
        let q = IsingQuench::new(InitialField::Finite(h_i), h_f, 1.0, 64).unwrap();
        let m = qspan_core::overlap::ising_dispersion(&q, k);
        prop_assert!(m.cos_delta.abs() <= 1.0 + 1e-15);
        prop_assert!(m.eps >= 0.0);
    }

    #[test]
    fn loschmidt_rate_has_nonnegative_real_part(
        h_i in -3.0f64..3.0,
        h_f in -3.0f64..3.0,
        t in 0.0f64..20.0,
    ) {
        let q = IsingQuench::new(InitialField::Finite(h_i), h_f, 1.0, 256).unwrap();
        prop_assert!(ising_f(&q, t).f.re >= -1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ising_k_grid_is_converged(t in 0.0f64..1.0) {
        let coarse = IsingQuench::new(InitialField::Infinite, 1.5, 1.0, 4096).unwrap();
        let fine = IsingQuench::new(InitialField::Infinite, 1.5, 1.0, 8192).unwrap();
        prop_assert!((ising_f(&coarse, t).f - ising_f(&fine, t).f).norm() < 1e-9);
    }

    #[test]
    fn averaged_spectrum_ignores_window_start((h, psi) in system(), t in 0.2f64..5.0) {
        let levels = SpectralDecomposition::new(&h, &psi).unwrap().levels();
        let base = averaged_state(&levels, 0.0, t, None).unwrap();
        for t0 in [0.7, 2.1] {
            let shifted = averaged_state(&levels, t0, t, None).unwrap();
            for (a, b) in base.eigenvalues().iter().zip(shifted.eigenvalues()) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cumulant_routes_agree((h, psi) in system()) {
        let sd = SpectralDecomposition::new(&h, &psi).unwrap();
        let spectral = energy_cumulants(&sd, 4.0, 4).unwrap();
        let direct = energy_cumulants_from_state(&h, &psi, 4.0, 4).unwrap();
        for (a, b) in spectral.iter().zip(&direct) {
            prop_assert!((a - b).abs() < 1e-8, "{spectral:?} vs {direct:?}");
        }
    }

    #[test]
    fn cumulant_densities_sum_to_total((h, psi) in system(), n in 1usize..5) {
        let total = energy_cumulants_from_state(&h, &psi, 1.0, n).unwrap()[n - 1];
        let parts: f64 = cumulant_densities(&h, &psi, n).unwrap().iter().sum();
        prop_assert!((parts - total).abs() < 1e-8 * total.abs().max(1.0));
    }

    #[test]
    fn averaged_state_is_a_density_matrix((h, psi) in system(), t in 0.01f64..50.0) {
        let levels = SpectralDecomposition::new(&h, &psi).unwrap().levels();
        let state = averaged_state(&levels, 0.0, t, None).unwrap();
        prop_assert!((state.trace() - 1.0).abs() < 1e-10);
        prop_assert!(state.eigenvalues().iter().all(|&x| x >= 0.0));
        let purity = state.moment(2.0);
        prop_assert!(purity > 0.0 && purity <= 1.0 + 1e-12);
    }

    #[test]
    fn overlap_respects_the_speed_limit((h, psi) in system(), s in 0.0f64..1.0) {
        // |⟨Ψ₀|Ψₜ⟩| ≥ cos(ΔE t) while ΔE t ≤ π/2
        let sd = SpectralDecomposition::new(&h, &psi).unwrap();
        let var = energy_cumulants(&sd, 1.0, 2).unwrap()[1];
        prop_assume!(var > 1e-6);
        let t = s * core::f64::consts::FRAC_PI_2 / var.sqrt();
        let overlap = sd.return_amplitude(t).norm();
        prop_assert!(overlap >= (var.sqrt() * t).cos() - 1e-10, "{overlap} at t = {t}");
    }
}
