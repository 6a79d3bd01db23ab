use nalgebra::{DMatrix, DVector};
use rand::Rng;
use sobolev_lab::potential::{make_random_bounded, uniform_nodes};
use sobolev_lab::propagator::{
    convert, evolve_fixed, evolve_observed, perturbation_gap, Scheme,
};
use sobolev_lab::{
    dense_monodromy, duhamel_series, evolve, rng, truncation_scan, EvolveConfig, FourierState,
    Observable, Picture, PotentialModel, SymbolSpec, C64,
};

fn random_state(seed: u64, n: usize) -> FourierState {
    let mut r = rng::stream(seed, 0);
    let coeffs: Vec<C64> = (0..2 * n + 1)
        .map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
        .collect();
    let s = FourierState::from_coeffs(n, coeffs).unwrap();
    let norm = s.norm();
    s.scale(C64::new(1.0 / norm, 0.0))
}

#[test]
fn evolve_duhamel_and_monodromy_agree() {
    let spec = SymbolSpec::schrodinger();
    for seed in 0..3 {
        let pot = make_random_bounded(seed, 3, &uniform_nodes(0.0, 0.25, 3), 1.0).unwrap();
        let init = random_state(100 + seed, 4);
        let cfg = EvolveConfig::new(1.3, 0.0, 0.25).with_tol(1e-12);
        let a = evolve(&init, &spec, &pot, &cfg).unwrap();
        let a = a.final_state().unwrap();
        let b = duhamel_series(&init, &spec, &pot, &cfg, 8).unwrap();
        let m = dense_monodromy(&spec, &pot, 1.3, 4, (0.0, 0.25), 1e-12).unwrap();
        let c = m.apply(&init).unwrap();
        assert!(a.distance(&b.state) < 1e-8, "evolve/duhamel {}", a.distance(&b.state));
        assert!(a.distance(&c) < 1e-8, "evolve/monodromy {}", a.distance(&c));
        assert!(b.state.distance(&c) < 1e-8);
    }
}

#[test]
fn duhamel_matches_evolve_for_gaps_symbol_across_crossings() {
    let spec = SymbolSpec::gaps();
    let pot = make_random_bounded(7, 2, &uniform_nodes(3.5, 4.5, 4), 0.5).unwrap();
    let init = random_state(8, 3);
    let cfg = EvolveConfig::new(0.8, 3.5, 4.5).with_tol(1e-12);
    let a = evolve(&init, &spec, &pot, &cfg).unwrap();
    let b = duhamel_series(&init, &spec, &pot, &cfg, 10).unwrap();
    assert!(a.final_state().unwrap().distance(&b.state) < 1e-8);
}

#[test]
fn monodromy_columns_match_duhamel() {
    let spec = SymbolSpec::schrodinger();
    let pot = make_random_bounded(2, 2, &uniform_nodes(0.0, 0.1, 2), 1.0).unwrap();
    let m = dense_monodromy(&spec, &pot, 0.7, 2, (0.0, 0.1), 1e-12).unwrap();
    let cfg = EvolveConfig::new(0.7, 0.0, 0.1);
    for col in 0..5 {
        let e = FourierState::delta(2, col as i64 - 2).unwrap();
        let d = duhamel_series(&e, &spec, &pot, &cfg, 8).unwrap();
        for row in 0..5 {
            assert!((m.entries[(row, col)] - d.state.coeffs()[row]).norm() < 1e-8);
        }
    }
}

#[test]
fn global_error_is_second_order() {
    let spec = SymbolSpec::schrodinger();
    let pot = make_random_bounded(4, 3, &uniform_nodes(0.0, 1.0, 4), 1.0).unwrap();
    let init = FourierState::one(4).with_picture(Picture::Interaction);
    let reference = evolve_fixed(&init, &spec, &pot, 1.0, 1.0, 1 << 13).unwrap();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in 4..=10 {
        let u = evolve_fixed(&init, &spec, &pot, 1.0, 1.0, 1 << p).unwrap();
        xs.push(-(p as f64) * 2f64.ln());
        ys.push(u.distance(&reference).ln());
    }
    let slope = sobolev_lab::harness::fit::least_squares(&xs, &ys).slope;
    assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn lab_and_interaction_schemes_agree_after_unrotating() {
    let spec = SymbolSpec::schrodinger();
    let pot = make_random_bounded(9, 3, &uniform_nodes(0.0, 1.0, 4), 1.0).unwrap();
    let init = random_state(3, 4);
    let cfg = EvolveConfig::new(0.6, 0.0, 1.0).with_tol(1e-13);
    let a = evolve_observed(&init, &spec, &pot, &cfg, Scheme::Interaction, |_, _| {}).unwrap();
    let b = evolve_observed(&init, &spec, &pot, &cfg, Scheme::Lab, |_, _| {}).unwrap();
    let (a, b) = (a.final_state().unwrap(), b.final_state().unwrap());
    assert!(a.distance(b) < 1e-9, "{}", a.distance(b));
    let ai = convert(a, &spec, 0.6, Picture::Interaction);
    let bi = convert(b, &spec, 0.6, Picture::Interaction);
    assert!(ai.distance(&bi) < 1e-9);
}

#[test]
fn norm_drift_stays_within_tolerance_budget() {
    let spec = SymbolSpec::schrodinger();
    let pot = make_random_bounded(1, 4, &uniform_nodes(0.0, 4.0, 16), 1.0).unwrap();
    let tol = 1e-9;
    for k in [-2.0, 0.5, 2.0] {
        let cfg = EvolveConfig::new(k, 0.0, 4.0)
            .with_tol(tol)
            .with_observables(vec![Observable::NormDeviation]);
        let tr = evolve(&FourierState::one(32), &spec, &pot, &cfg).unwrap();
        assert!(tr.sup[0] <= 10.0 * tol * 4.0, "k={k}: {}", tr.sup[0]);
    }
}

#[test]
fn truncation_errors_shrink_with_band() {
    let spec = SymbolSpec::schrodinger();
    let pot = make_random_bounded(6, 3, &uniform_nodes(0.0, 1.0, 4), 2.0).unwrap();
    let cfg = EvolveConfig::new(0.2, 0.0, 1.0)
        .with_tol(1e-11)
        .with_observers(vec![0.5, 1.0]);
    let rows = truncation_scan(&spec, &pot, &FourierState::one(1), &cfg, &[4, 8, 16]).unwrap();
    assert!(rows[0].deviation > rows[1].deviation);
    assert!(rows[1].deviation > rows[2].deviation);
}

#[test]
fn truncation_plateau_for_short_times() {
    // In time 1e-3 the potential moves mass by a few modes at most.
    let spec = SymbolSpec::schrodinger();
    let pot = make_random_bounded(6, 2, &uniform_nodes(0.0, 1.0, 2), 1.0).unwrap();
    let cfg = EvolveConfig::new(1.0, 0.0, 1e-3).with_tol(1e-13);
    let rows = truncation_scan(&spec, &pot, &FourierState::one(1), &cfg, &[8, 16]).unwrap();
    assert!(rows.iter().all(|r| r.deviation < 1e-14), "{rows:?}");
}

#[test]
fn zero_mode_observer_sees_every_step() {
    let spec = SymbolSpec::schrodinger();
    let pot = make_random_bounded(5, 2, &uniform_nodes(0.0, 1.0, 3), 1.0).unwrap();
    let cfg = EvolveConfig::new(1.0, 0.0, 1.0);
    let mut count = 0;
    let tr = evolve_observed(&FourierState::one(8), &spec, &pot, &cfg, Scheme::Interaction, |_, w| {
        assert_eq!(w.len(), 17);
        count += 1;
    })
    .unwrap();
    assert_eq!(count, tr.accepted + 1);
}

fn random_hermitian(r: &mut rng::Rng, n: usize, scale: f64) -> DMatrix<C64> {
    let a = DMatrix::<C64>::from_fn(n, n, |_, _| {
        C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
    });
    (&a + a.adjoint()) * C64::new(0.5 * scale, 0.0)
}

#[test]
fn perturbation_lemma_holds_on_random_small_systems() {
    let mut r = rng::stream(2024, 0);
    for trial in 0..100 {
        let n = r.gen_range(2..6);
        let (o_a, o_b) = (random_hermitian(&mut r, n, 1.0), random_hermitian(&mut r, n, 1.0));
        let (p_a, p_b) = (random_hermitian(&mut r, n, 0.2), random_hermitian(&mut r, n, 0.2));
        let jv = DVector::<C64>::from_fn(n, |_, _| {
            C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
        });
        let t_end = 1.0;
        // ‖f₂‖ + ∫‖j‖ ≤ 1 keeps ‖ψ₂‖ ≤ 1, the normalization the estimate relies on.
        let jv = &jv * C64::new(0.2 / jv.norm(), 0.0);
        let f1 = DVector::<C64>::from_fn(n, |_, _| C64::new(r.gen_range(-1.0..1.0), 0.0));
        let f1 = &f1 * C64::new(1.0 / f1.norm(), 0.0);
        let pert = DVector::<C64>::from_fn(n, |_, _| C64::new(0.0, r.gen_range(-0.1..0.1)));
        let f2 = &f1 + pert;
        let f2 = &f2 * C64::new(0.8 / f2.norm(), 0.0);
        let o = |t: f64| &o_a + &o_b * C64::new(t.sin(), 0.0);
        let o1 = |t: f64| &p_a * C64::new((-t).exp(), 0.0) + &p_b * C64::new(t * t, 0.0);
        let j = |t: f64| &jv * C64::new((3.0 * t).cos(), 0.0);
        let gap = perturbation_gap(&o, &o1, &j, &f1, &f2, t_end, 400).unwrap();
        assert!(gap.sup_norm_psi2 <= 1.0 + 1e-9);
        assert!(
            gap.sup_distance <= gap.bound + 1e-9,
            "trial {trial}: {} > {}",
            gap.sup_distance,
            gap.bound
        );
    }
}

#[test]
fn zero_potential_free_flow_is_unitary_diagonal() {
    let spec = SymbolSpec::polynomial(vec![0.5, -1.0, 0.25]).unwrap();
    let m = dense_monodromy(&spec, &PotentialModel::zero(), 1.1, 3, (0.0, 2.0), 1e-10).unwrap();
    for n in -3i64..=3 {
        let i = (n + 3) as usize;
        let want = C64::from_polar(1.0, -1.1 * spec.multiplier(n, 0.0) * 2.0);
        assert!((m.entries[(i, i)] - want).norm() < 1e-12);
    }
}
