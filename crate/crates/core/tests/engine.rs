// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use qwalk::coins::{coin_by_name, registry, CoinSpec};
use qwalk::engine::*;
use qwalk::matrix::ComplexMatrix;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cases() -> Vec<(LatticeKind, Mode, usize)> {
    vec![
        (LatticeKind::Line, Mode::Additive, 2),
        (LatticeKind::Square, Mode::Additive, 4),
        (LatticeKind::Square, Mode::TwoStep, 4),
        (LatticeKind::Graphene, Mode::Additive, 3),
        (LatticeKind::Graphene, Mode::ThreeStep, 3),
    ]
}

#[test]
fn engine_matches_dense_operator_for_every_registry_coin() {
    for (kind, mode, dim) in cases() {
        let extent = if kind == LatticeKind::Graphene { 2 } else { 3 };
        let lat = LatticeDescriptor::new(kind, extent, Boundary::Periodic).unwrap();
        for coin in registry().into_iter().filter(|c| c.dim == dim) {
            for sign in [ShiftSign::Standard, ShiftSign::Mirrored] {
                let report = oracle_check(&lat, mode, &coin, ChiralityConvention::new(sign), 3, 3).unwrap();
                assert!(report.unitarity_residual < 1e-10, "{kind:?} {mode:?} {}", coin.name);
                assert!(report.max_deviation <= 1e-12, "{kind:?} {mode:?} {} {sign:?}: {report:?}", coin.name);
            }
        }
    }
}

#[test]
fn dense_square_is_two_engine_steps() {
    let lat = LatticeDescriptor::new(LatticeKind::Square, 2, Boundary::Periodic).unwrap();
    let coin = coin_by_name("grover4", &[]).unwrap();
    let w = dense_evolution_matrix(&lat, Mode::Additive, &coin, ChiralityConvention::default()).unwrap();
    let w2 = w.mul(&w).unwrap();
    let mut basis = vec![c(0.0, 0.0); w.dim()];
    basis[lat.site_index(&[1, -1, 0]) * 4 + 2] = c(1.0, 0.0);
    let expected = w2.apply(&basis).unwrap();
    let evo = Evolution::new(LatticeKind::Square, Mode::Additive, coin).unwrap();
    let mut st = WalkState::from_flat(lat, &basis).unwrap();
    evo.step(&mut st).unwrap();
    evo.step(&mut st).unwrap();
    let dev = st.to_flat().iter().zip(&expected).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(dev < 1e-13);
}

#[test]
fn identity_axis_coin_flips_direction_then_shifts() {
    // identity(3) composes to blockdiag(M₁, M₂, M₃); (1,−) becomes (1,+) and moves to n₁ − 1.
    let lat = LatticeDescriptor::for_steps(LatticeKind::Graphene, 2);
    let coin = coin_by_name("identity", &[3.0]).unwrap();
    let evo = Evolution::new(LatticeKind::Graphene, Mode::Additive, coin).unwrap();
    let mut chi = [c(0.0, 0.0); 6];
    chi[1] = c(1.0, 0.0);
    let mut st = initial_state(lat, &chi, [0, 0, 0]).unwrap();
    evo.step(&mut st).unwrap();
    assert_eq!(st.site_amplitudes(), vec![([-1, 0, 0], vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])]);
    evo.step(&mut st).unwrap();
    assert!((st.amplitude(&[0, 0, 0], 1) - c(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn plane_waves_are_shift_eigenstates() {
    let lat = LatticeDescriptor::ring(LatticeKind::Line, 64).unwrap();
    let id = ComplexMatrix::identity(2);
    for m in [1, 5, 31] {
        let k = 2.0 * PI * m as f64 / 64.0;
        for (component, sign) in [(0usize, 1.0), (1, -1.0)] {
            let mut flat = vec![c(0.0, 0.0); 128];
            for i in 0..64 {
                let n = lat.site_at(i)[0] as f64;
                flat[i * 2 + component] = Complex64::from_polar(0.125, k * n);
            }
            let mut st = WalkState::from_flat(lat, &flat).unwrap();
            step_line(&mut st, &id).unwrap();
            let eig = Complex64::from_polar(1.0, sign * k);
            let dev = st
                .to_flat()
                .iter()
                .zip(&flat)
                .map(|(after, before)| (after - eig * before).norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-12, "m = {m}, component {component}: {dev}");
        }
    }
}

#[test]
fn hadamard_line_preserves_norm_over_500_steps() {
    let lat = LatticeDescriptor::for_steps(LatticeKind::Line, 500);
    let evo = Evolution::new(LatticeKind::Line, Mode::Additive, coin_by_name("hadamard2", &[]).unwrap()).unwrap();
    let st = initial_state(lat, &[c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)], [0, 0, 0]).unwrap();
    let out = run(st, &evo, 500, 100).unwrap();
    assert!((out.final_state.norm_sqr() - 1.0).abs() < 1e-12);
    assert_eq!(out.records.len(), 6);
    for (_, d) in &out.records {
        assert!((d.total() - 1.0).abs() < 1e-12);
    }
    // Two ballistic peaks, no weight beyond the light cone.
    let last = &out.records[5].1;
    assert!(last.probabilities().keys().all(|s| s[0].abs() <= 500 && (s[0] % 2 == 0)));
}

#[test]
fn single_step_allows_repeated_axis_moves() {
    let lat = LatticeDescriptor::for_steps(LatticeKind::Square, 2);
    let evo = Evolution::new(LatticeKind::Square, Mode::Additive, coin_by_name("dft4", &[]).unwrap()).unwrap();
    let st = initial_state(lat, &[c(0.5, 0.0); 4], [0, 0, 0]).unwrap();
    let out = run(st, &evo, 2, 1).unwrap();
    let p = out.records[2].1.probabilities().get(&[-2, 0, 0]).copied().unwrap_or(0.0);
    assert!(p > 0.0);
}

#[test]
fn two_step_support_alternates_axes() {
    let steps = 6;
    let lat = LatticeDescriptor::for_steps(LatticeKind::Square, steps);
    let evo = Evolution::new(LatticeKind::Square, Mode::TwoStep, coin_by_name("dft4", &[]).unwrap()).unwrap();
    let st = initial_state(lat, &[c(0.5, 0.0); 4], [0, 0, 0]).unwrap();
    let out = run(st, &evo, steps, 1).unwrap();
    for (t, d) in &out.records {
        let t = *t as i64;
        // Each composite step moves x by at most one, then y by at most one.
        assert!(d.probabilities().keys().all(|s| s[0].abs() <= t && s[1].abs() <= t));
    }
    // Corners lie outside the single-step reach |x| + |y| ≤ t.
    let last = &out.records[steps].1;
    assert!(last.probabilities().get(&[-(steps as i64), steps as i64, 0]).is_some_and(|p| *p > 0.0));
    // Identity coin on (1,+): x moves once per composite step, y never.
    let evo = Evolution::new(LatticeKind::Square, Mode::TwoStep, coin_by_name("identity", &[4.0]).unwrap()).unwrap();
    let st = initial_state(lat, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], [0, 0, 0]).unwrap();
    let out = run(st, &evo, 3, 1).unwrap();
    assert_eq!(out.records[3].1.probabilities().keys().collect::<Vec<_>>(), vec![&[-3, 0, 0]]);
}

fn threestep_start(coin: &CoinSpec) -> (Evolution, WalkState) {
    let lat = LatticeDescriptor::for_steps(LatticeKind::Graphene, 10);
    let r = 1.0 / 3f64.sqrt();
    let chi = [c(0.0, 0.0), c(r, 0.0), c(0.0, 0.0), c(0.0, r), c(0.0, 0.0), c(0.0, -r)];
    let evo = Evolution::new(LatticeKind::Graphene, Mode::ThreeStep, coin.clone()).unwrap();
    (evo, initial_state(lat, &chi, [0, 0, 0]).unwrap())
}

#[test]
fn threestep_collapses_to_two_sites() {
    for name in ["dft3", "grover3"] {
        let (evo, mut st) = threestep_start(&coin_by_name(name, &[]).unwrap());
        for t in 1..=7 {
            evo.step(&mut st).unwrap();
            let d = probability_distribution(&st);
            assert_eq!(d.len(), 1);
            let (site, p) = d.probabilities().iter().next().unwrap();
            let expected = if t % 2 == 1 { [-1, 1, -1] } else { [0, 0, 0] };
            assert_eq!(*site, expected);
            assert!((p - 1.0).abs() < 1e-12);
        }
    }
    let (evo, st) = threestep_start(&coin_by_name("dft3", &[]).unwrap());
    let mut st = st.with_convention(ChiralityConvention::new(ShiftSign::Mirrored));
    evo.step(&mut st).unwrap();
    assert_eq!(probability_distribution(&st).probabilities().keys().next(), Some(&[1, -1, 1]));
}

#[test]
fn threestep_direction_follows_sublattice() {
    let (evo, mut st) = threestep_start(&coin_by_name("dft3", &[]).unwrap());
    for _ in 0..8 {
        evo.step(&mut st).unwrap();
        for (site, amps) in st.site_amplitudes() {
            let odd = site.iter().sum::<i64>().rem_euclid(2) == 1;
            // Odd-sum sites hold only |+⟩ (even components), even-sum only |−⟩.
            let forbidden = if odd { 1 } else { 0 };
            for block in 0..3 {
                assert_eq!(amps[2 * block + forbidden], c(0.0, 0.0), "{site:?}");
            }
            let weight: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
            assert!((weight - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn graphene_additive_stays_on_two_sublattices() {
    let lat = LatticeDescriptor::for_steps(LatticeKind::Graphene, 20);
    let evo = Evolution::new(LatticeKind::Graphene, Mode::Additive, coin_by_name("dft3", &[]).unwrap()).unwrap();
    let r = 1.0 / 3f64.sqrt();
    let chi = [c(0.0, 0.0), c(r, 0.0), c(0.0, 0.0), c(r, 0.0), c(0.0, 0.0), c(r, 0.0)];
    let out = run(initial_state(lat, &chi, [0, 0, 0]).unwrap(), &evo, 20, 1).unwrap();
    for (t, d) in &out.records {
        let expected_sum = if t % 2 == 0 { 0 } else { -1 };
        assert!(d.probabilities().keys().all(|s| s.iter().sum::<i64>() == expected_sum));
        assert!((d.total() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn snapshot_serializes_amplitudes_as_pairs() {
    let lat = LatticeDescriptor::for_steps(LatticeKind::Line, 1);
    let st = initial_state(lat, &[c(0.0, 1.0), c(0.0, 0.0)], [0, 0, 0]).unwrap();
    let json = serde_json::to_value(st.snapshot()).unwrap();
    assert_eq!(json["sites"][0]["site"], serde_json::json!([0]));
    assert_eq!(json["sites"][0]["amplitudes"], serde_json::json!([[0.0, 1.0], [0.0, 0.0]]));
    assert_eq!(json["lattice"]["kind"], "line");
}
