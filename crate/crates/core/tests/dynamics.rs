use std::sync::Arc;

use dicke_cavity::dynamics::{
    check_heisenberg_identities, check_variance_dynamics, diagonalize, series, NamedObservable,
    SpectralPropagator, DEFAULT_DTAU,
};
use dicke_cavity::hilbert::{
    build_field_matrices, build_spin_matrices, directional_spin_op, interaction_hamiltonian,
    interaction_tensor, number_operator, DickeSpace, FockSpace, JointSpace, SpinRotator, TensorOperator,
};
use dicke_cavity::linalg::{c, CVector};
use dicke_cavity::states::{
    bloch_state, coherent_state, dicke_basis, partial_trace, product_state, vacuum, variance, DensityMatrix,
    JointState, Keep, PureState, Space, DEFAULT_TAIL_TOL,
};

fn propagator(n: u32, n_max: usize) -> SpectralPropagator {
    let joint = Arc::new(JointSpace::new(DickeSpace::new(n).unwrap(), FockSpace::new(n_max)));
    diagonalize(&interaction_hamiltonian(&joint)).unwrap()
}

fn joint_basis(p: &SpectralPropagator, spin_index: usize, photons: usize) -> JointState {
    let j = p.joint();
    let space = Space::joint(j.dicke(), j.fock());
    JointState::Pure(PureState::basis(space, j.index(spin_index, photons)).unwrap())
}

/// Atoms after exchanging with a coherent field for `tau1`, with the
/// reduced state turned by `theta` about y.
fn squeezed_atoms(n: u32, alpha: f64, tau1: f64, theta: f64) -> DensityMatrix {
    let d = DickeSpace::new(n).unwrap();
    let f = FockSpace::new(dicke_cavity::states::required_cutoff(alpha, DEFAULT_TAIL_TOL) + n as usize);
    let p = {
        let joint = Arc::new(JointSpace::new(d, f));
        diagonalize(&interaction_hamiltonian(&joint)).unwrap()
    };
    let s0 = product_state(
        dicke_basis(&d, d.top()).unwrap(),
        coherent_state(c(alpha, 0.0), &f, DEFAULT_TAIL_TOL).unwrap(),
    )
    .unwrap();
    let rho = partial_trace(&p.evolve(&s0, tau1).unwrap(), Keep::Atom);
    rho.transformed(&SpinRotator::new(d).about_y(theta)).unwrap()
}

#[test]
fn vacuum_rabi_oscillation() {
    let p = propagator(1, 3);
    let s0 = joint_basis(&p, 1, 0);
    let j = p.joint();
    let n_op = TensorOperator::field(j.dicke(), j.fock(), number_operator(&j.fock()));
    let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
    let s = series(&p, &s0, &[NamedObservable::mean("n", n_op)], &grid, "excited").unwrap();
    let n = s.real("n").unwrap();
    for (t, v) in grid.iter().zip(&n) {
        assert!((v - t.sin().powi(2)).abs() <= 1e-10, "tau={t}");
    }
    let psi = p.evolve(&s0, 0.9).unwrap();
    let JointState::Pure(psi) = psi else { unreachable!() };
    let stay = psi.amplitudes()[j.index(1, 0)].norm_sqr();
    assert!((stay - 0.9f64.cos().powi(2)).abs() < 1e-12);
}

#[test]
fn enhanced_coupling_transfer() {
    let p = propagator(2, 4);
    let j = p.joint();
    let s0 = joint_basis(&p, 0, 1);
    for tau in [0.2, 0.6, 1.3] {
        let JointState::Pure(psi) = p.evolve(&s0, tau).unwrap() else { unreachable!() };
        let moved = psi.amplitudes()[j.index(1, 0)].norm_sqr();
        assert!((moved - (2f64.sqrt() * tau).sin().powi(2)).abs() < 1e-12);
    }
}

#[test]
fn ground_atoms_in_vacuum_stay_put() {
    let p = propagator(4, 3);
    let s0 = joint_basis(&p, 0, 0);
    let j = p.joint();
    let spin = build_spin_matrices(&j.dicke());
    let obs = [
        NamedObservable::mean("sz", TensorOperator::atom(j.dicke(), j.fock(), spin.sz.clone())),
        NamedObservable::mean("n", TensorOperator::field(j.dicke(), j.fock(), number_operator(&j.fock()))),
    ];
    let s = series(&p, &s0, &obs, &[0.0, 0.5, 2.0, 7.0], "ground").unwrap();
    assert!(s.real("sz").unwrap().iter().all(|v| (*v + 2.0).abs() < 1e-15));
    assert!(s.real("n").unwrap().iter().all(|v| v.abs() < 1e-15));
}

fn conserved_observables(p: &SpectralPropagator) -> Vec<NamedObservable> {
    let j = p.joint();
    let (d, f) = (j.dicke(), j.fock());
    let spin = build_spin_matrices(&d);
    let excitation = &TensorOperator::field(d, f, number_operator(&f)) + &TensorOperator::atom(d, f, spin.sz);
    vec![
        NamedObservable::mean("norm", TensorOperator::identity(d, f)),
        NamedObservable::mean("excitation", excitation),
        NamedObservable::mean("energy", interaction_tensor(d, f, 1.0)),
    ]
}

fn assert_conserved(p: &SpectralPropagator, s0: &JointState) {
    let grid: Vec<f64> = (0..60).map(|i| i as f64 * 0.137).collect();
    let s = series(p, s0, &conserved_observables(p), &grid, "test").unwrap();
    assert!(s.max_imaginary() <= 1e-10);
    let norm = s.real("norm").unwrap();
    assert!(norm.iter().all(|v| (v - 1.0).abs() <= 1e-12));
    let exc = s.real("excitation").unwrap();
    let mean = exc.iter().sum::<f64>() / exc.len() as f64;
    let var = exc.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / exc.len() as f64;
    assert!(var <= 1e-20, "excitation variance {var:e}");
    let energy = s.real("energy").unwrap();
    for e in &energy {
        assert!((e - energy[0]).abs() <= 1e-10 * energy[0].abs().max(1.0));
    }
}

#[test]
fn conservation_pure_and_mixed() {
    let p = propagator(6, 24);
    let j = p.joint();
    let d = j.dicke();
    let field = coherent_state(c(1.5, 0.4), &j.fock(), DEFAULT_TAIL_TOL).unwrap();
    let pure = product_state(bloch_state(1.0, 0.3, &d), field).unwrap();
    assert_conserved(&p, &pure);
    let rho = squeezed_atoms(6, 2.0, 0.4, 2.5);
    let mixed = product_state(rho, vacuum(&j.fock())).unwrap();
    assert!(matches!(mixed, JointState::Mixed(_)));
    assert_conserved(&p, &mixed);
}

#[test]
fn evolution_is_reversible() {
    let p = propagator(5, 12);
    let j = p.joint();
    let psi = CVector::from_fn(j.dim(), |i, _| c((0.3 * i as f64).cos(), (0.17 * i as f64).sin()));
    let psi = psi.unscale(psi.norm());
    for tau in [0.4, 3.0, 11.0] {
        let there = p.evolve_vector(&psi, tau).unwrap();
        assert!((there.norm() - 1.0).abs() <= 1e-12);
        let back = p.evolve_vector(&there, -tau).unwrap();
        assert!((back - &psi).camax() <= 1e-10);
    }
}

#[test]
fn hermitian_series_are_real() {
    let p = propagator(4, 16);
    let j = p.joint();
    let (d, f) = (j.dicke(), j.fock());
    let field = build_field_matrices(&f);
    let s0 = product_state(bloch_state(2.2, 0.0, &d), vacuum(&f)).unwrap();
    let x = TensorOperator::field(d, f, (&field.a + &field.a_dag).scale(0.5));
    let sx = TensorOperator::atom(d, f, build_spin_matrices(&d).sx);
    let obs = [
        NamedObservable::mean("x", x.clone()),
        NamedObservable::variance("var_x", x.clone()),
        NamedObservable::covariance("cov", x, sx),
    ];
    let s = series(&p, &s0, &obs, &[0.0, 0.3, 0.8, 1.9], "bloch").unwrap();
    assert!(s.max_imaginary() <= 1e-10);
    assert!((s.real("var_x").unwrap()[0] - 0.25).abs() < 1e-14);
}

#[test]
fn field_amplitude_follows_negative_spin_components() {
    let p = propagator(10, 14);
    let j = p.joint();
    let (d, f) = (j.dicke(), j.fock());
    let atoms = bloch_state(2.0, 0.7, &d);
    let rho = DensityMatrix::from_pure(&atoms);
    let spin = build_spin_matrices(&d);
    let sx = dicke_cavity::states::expectation(&spin.sx, &rho).unwrap().re;
    let sy = dicke_cavity::states::expectation(&spin.sy, &rho).unwrap().re;
    let s0 = product_state(atoms, vacuum(&f)).unwrap();
    let a = TensorOperator::field(d, f, build_field_matrices(&f).a);
    let tau = 1e-4;
    let s = series(&p, &s0, &[NamedObservable::mean("a", a)], &[tau], "tilted").unwrap();
    let amp = s.get("a").unwrap()[0] / tau;
    assert!((amp.re + sy).abs() < 1e-3 * sy.abs());
    assert!((amp.im + sx).abs() < 1e-3 * sx.abs());
}

#[test]
fn series_csv_and_sidecar() {
    let p = propagator(2, 5);
    let s0 = joint_basis(&p, 2, 0);
    let s = series(&p, &s0, &conserved_observables(&p), &[0.0, 0.5], "top").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (csv_path, meta_path) = s.write_with_metadata(&dir.path().join("series.csv"), &p).unwrap();
    let text = std::fs::read_to_string(csv_path).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, "tau,norm_re,norm_im,excitation_re,excitation_im,energy_re,energy_im");
    assert_eq!(text.lines().count(), 3);
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(meta_path).unwrap()).unwrap();
    assert_eq!(meta["cutoff"], 5);
    assert_eq!(meta["sector_count"], 8);
    assert_eq!(meta["provenance"]["initial_state"], "top");
}

#[test]
fn variance_dynamics_at_emission_start() {
    let p = propagator(10, 14);
    let j = p.joint();
    let (d, f) = (j.dicke(), j.fock());
    let atoms = squeezed_atoms(10, 2.0, 0.3, 2.8);
    let s0 = product_state(atoms.clone(), vacuum(&f)).unwrap();
    let phi = 0.4;
    let r = check_variance_dynamics(&p, &s0, phi, 0.0, DEFAULT_DTAU).unwrap();
    assert!(r.first_moment.abs() < 1e-12);
    assert!(r.first_difference.abs() <= 1e-6);
    // vacuum field: 4 Cov(a, Sz a) reduces to <Sz>
    let spin = build_spin_matrices(&d);
    let sz = dicke_cavity::states::expectation(&spin.sz, &atoms).unwrap().re;
    let conj = directional_spin_op(std::f64::consts::FRAC_PI_2 - phi, &d);
    let reduced = sz + 2.0 * variance(&conj, &atoms).unwrap();
    assert!((r.second_moment - reduced).abs() <= 1e-10 * reduced.abs());
    assert!(r.second_rel_error <= 1e-6, "{r:?}");
    assert_eq!(r.predicted_negative, Some(r.second_difference_negative()));
}

#[test]
fn variance_dynamics_mid_emission() {
    let p = propagator(10, 14);
    let f = p.joint().fock();
    let atoms = squeezed_atoms(10, 2.0, 0.3, 2.6);
    let s0 = product_state(atoms, vacuum(&f)).unwrap();
    let r = check_variance_dynamics(&p, &s0, 1.1, 0.3, DEFAULT_DTAU).unwrap();
    assert!(r.first_rel_error <= 1e-5, "{r:?}");
    assert!(r.second_rel_error <= 1e-5, "{r:?}");
    assert!(r.predicted_negative.is_none());
}

#[test]
fn identities_hold_below_cutoff() {
    let joint = JointSpace::new(DickeSpace::new(10).unwrap(), FockSpace::new(20));
    for phi in [0.0, 0.7, 2.0] {
        let r = check_heisenberg_identities(&joint, phi, 1.0);
        assert!(r.max_interior() <= 1e-12, "{r:?}");
        assert!(r.field_edge_magnitude > 1.0);
    }
}
