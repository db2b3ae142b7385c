mod common;

use proptest::prelude::*;
use qiso_core::blocks::{block_tensor, build_block, isometry_deviation, BlockParams, WireSignature};
use qiso_core::circuit::schedule_network;
use qiso_core::exact_sim::{expect_pauli, physical_state, EnergyModel, SimConfig};
use qiso_core::eigen::ground_eigenpairs;
use qiso_core::hamiltonians::{build_j1j2, build_tfi, Pauli, PauliTerm};
use qiso_core::linalg::C64;
use qiso_core::network::{build_network, LatticeKind, LatticeSpec};
use qiso_core::noise::{exact_noisy_expectation, final_noisy_density, NoiseModel, RegisterDensity};
use qiso_core::optimize::{AmsGradConfig, OptimizerState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn angles(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-std::f64::consts::PI..std::f64::consts::PI, n)
}

fn lattice() -> impl Strategy<Value = LatticeSpec> {
    (0usize..3, 1usize..4, 1usize..5, 1usize..3, 1usize..3).prop_filter_map("valid lattice", |(k, rows, cols, n_bq, n_bl)| {
        let kind = [LatticeKind::Square, LatticeKind::Triangular, LatticeKind::Honeycomb][k];
        let spec = LatticeSpec { kind, rows, cols, n_bq, n_bl };
        spec.validate().ok().map(|_| spec)
    })
}

fn signature() -> impl Strategy<Value = (WireSignature, usize)> {
    (1usize..4, any::<bool>(), any::<bool>(), 1usize..3).prop_map(|(n_bq, l, t, layers)| (WireSignature::square(n_bq, l, t), layers))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn blocks_are_unitary_isometries((sig, layers) in signature(), seed in any::<u64>()) {
        let n = sig.param_count(layers);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, -3.2..3.2)).collect();
        let block = build_block(sig, BlockParams { layers, angles: a }).unwrap();
        prop_assert!(block.unitary.unitarity_deviation() < 1e-12);
        prop_assert!(isometry_deviation(&block) < 1e-12);
        prop_assert_eq!(sig.gate_count(layers), layers * 2 * sig.wires());
    }

    #[test]
    fn site_tensor_is_a_reindexing((sig, _) in signature(), a in angles(3 * 7)) {
        let w = sig.wires();
        let block = build_block(sig, BlockParams { layers: 1, angles: a[..3 * w].to_vec() }).unwrap();
        let t = block_tensor(&block).unwrap();
        let mut seen = 0;
        for i in 0..t.dims[0] { for j in 0..t.dims[1] { for k in 0..t.dims[2] { for l in 0..t.dims[3] { for p in 0..t.dims[4] {
            let row = p | k << sig.n_phys | l << (sig.n_phys + sig.n_right);
            let col = i | j << sig.n_left;
            prop_assert_eq!(t.get(i, j, k, l, p), block.unitary.get(row, col));
            seen += 1;
        }}}}}
        prop_assert_eq!(seen, t.data.len());
        prop_assert_eq!(seen, (1usize << w) * (1 << sig.bond_inputs()));
    }

    #[test]
    fn orders_are_linear_extensions_and_wires_balance(spec in lattice()) {
        let net = build_network(spec).unwrap();
        for order in &net.orders {
            prop_assert!(net.is_linear_extension(order));
        }
        let n_bq = spec.n_bq;
        let produced: usize = net.sites.iter().map(|s| s.outputs.len() * n_bq).sum();
        let consumed: usize = net.sites.iter().map(|s| s.inputs.len() * n_bq).sum();
        let dangling = net.bonds.iter().filter(|b| b.to.is_none()).count() * n_bq;
        prop_assert_eq!(produced, consumed + dangling);
    }

    #[test]
    fn cones_are_unions_and_downward_closed(spec in lattice(), a in 0usize..16, b in 0usize..16) {
        let net = build_network(spec).unwrap();
        let n = net.n_sites();
        let (a, b) = (a % n, b % n);
        let ca = net.cone_mask(&[a]);
        let cb = net.cone_mask(&[b]);
        let cab = net.cone_mask(&[a, b]);
        for s in 0..n {
            prop_assert_eq!(cab[s], ca[s] || cb[s]);
            if cab[s] {
                for p in net.predecessors(s) {
                    prop_assert!(cab[p]);
                }
            }
        }
    }

    #[test]
    fn amsgrad_second_moment_never_decreases(grads in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 4), 1..20)) {
        let mut state = OptimizerState::new(4, AmsGradConfig::default());
        let mut prev = vec![0.0; 4];
        for g in &grads {
            let step = state.step(g).unwrap();
            for k in 0..4 {
                prop_assert!(state.v_hat[k] >= prev[k]);
                prop_assert!(step[k].is_finite());
            }
            prev.clone_from(&state.v_hat);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hamiltonian_application_is_hermitian(rows in 1usize..4, cols in 2usize..4, lambda in -4.0f64..4.0, j2 in -1.0f64..1.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for h in [build_tfi(rows, cols, lambda, 1.0), build_j1j2(rows, cols, 1.0, j2)] {
            let d = h.dim();
            let rv = |rng: &mut ChaCha8Rng| -> Vec<C64> { (0..d).map(|_| C64::new(rand::Rng::gen_range(rng, -1.0..1.0), rand::Rng::gen_range(rng, -1.0..1.0))).collect() };
            let u = rv(&mut rng);
            let v = rv(&mut rng);
            let mut hu = vec![C64::new(0.0, 0.0); d];
            let mut hv = hu.clone();
            h.apply(&u, &mut hu);
            h.apply(&v, &mut hv);
            let a: C64 = u.iter().zip(&hv).map(|(x, y)| x.conj() * y).sum();
            let b: C64 = v.iter().zip(&hu).map(|(x, y)| x.conj() * y).sum();
            prop_assert!((a - b.conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn expectations_are_bounded_and_states_normalized(spec in lattice(), seed in any::<u64>(), p in 0usize..3, s in 0usize..16) {
        let cfg = SimConfig::default();
        let net = build_network(spec).unwrap();
        let params = net.random_params(&mut ChaCha8Rng::seed_from_u64(seed));
        let site = s % net.n_sites();
        let pauli = [Pauli::X, Pauli::Y, Pauli::Z][p];
        let v = expect_pauli(&net, &params, &PauliTerm::new(1.0, vec![(site, pauli)]).unwrap(), &cfg).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-12);
        prop_assert_eq!(expect_pauli(&net, &params, &PauliTerm::identity(2.0), &cfg).unwrap(), 1.0);
        match physical_state(&net, &params, &cfg) {
            Ok(state) => {
                prop_assert!((state.rho.trace().re - 1.0).abs() < 1e-10);
                prop_assert!(state.rho.trace().im.abs() < 1e-12);
                prop_assert!(state.purity > 0.0 && state.purity <= 1.0 + 1e-10);
            }
            Err(e) => prop_assert!(matches!(e, qiso_core::Error::MemoryBudget { .. }), "{e}"),
        }
    }

    #[test]
    fn blocks_outside_the_cone_do_not_matter(rows in 2usize..4, cols in 2usize..5, n_bq in 1usize..3, site in 0usize..16, seed in any::<u64>()) {
        let cfg = SimConfig::default();
        let net = build_network(LatticeSpec::square(rows, cols, n_bq, 1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = site % net.n_sites();
        let b = (a + 1) % net.n_sites();
        let term = PauliTerm::new(1.0, vec![(a, Pauli::Z), (b, Pauli::X)]).unwrap();
        let params = net.random_params(&mut rng);
        let cone = net.cone_mask(&[a, b]);
        let mut other = net.random_params(&mut rng);
        for s in 0..net.n_sites() {
            if cone[s] {
                let site = &net.sites[s];
                let r = site.param_offset..site.param_offset + site.param_count;
                other[r.clone()].copy_from_slice(&params[r]);
            }
        }
        let v1 = expect_pauli(&net, &params, &term, &cfg).unwrap();
        let v2 = expect_pauli(&net, &other, &term, &cfg).unwrap();
        prop_assert!((v1 - v2).abs() < 1e-12);
    }

    #[test]
    fn energies_respect_the_variational_bound(rows in 1usize..3, cols in 2usize..4, lambda in 0.0f64..4.0, seed in any::<u64>()) {
        let cfg = SimConfig::default();
        let h = build_tfi(rows, cols, lambda, 1.0);
        let e0 = ground_eigenpairs(&h, 1).unwrap().ground_energy();
        let net = build_network(LatticeSpec::square(rows, cols, 1, 2)).unwrap();
        let model = EnergyModel::new(&net, &h, &cfg).unwrap();
        let params = net.random_params(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(model.energy(&params).unwrap() >= e0 - 1e-8);
    }

    #[test]
    fn noisy_evolution_stays_a_state(p in 0.0f64..0.2, f in 0.0f64..1.0, seed in any::<u64>()) {
        let net = build_network(LatticeSpec::square(2, 2, 1, 1)).unwrap();
        let params = net.random_params(&mut ChaCha8Rng::seed_from_u64(seed));
        let noise = NoiseModel { p_error: p, depolarizing_fraction: f };
        let c = schedule_network(&net, &params, None).unwrap();
        let term = PauliTerm::new(1.0, vec![(0, Pauli::Z), (3, Pauli::Z)]).unwrap();
        let v = exact_noisy_expectation(&c, &term, &noise).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-12);
        let flat = qiso_core::circuit::build_hea(1, 3, 2, &{
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
            (0..18).map(|_| rand::Rng::gen_range(&mut rng, -3.0..3.0)).collect::<Vec<f64>>()
        }).unwrap();
        let rho: RegisterDensity = final_noisy_density(&flat, &noise).unwrap();
        prop_assert!((rho.trace() - 1.0).norm() < 1e-12);
        let d = 1 << rho.n_qubits;
        for r in 0..d {
            for c in 0..d {
                prop_assert!((rho.data[r * d + c] - rho.data[c * d + r].conj()).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn tfi_spectrum_is_symmetric_in_the_field() {
    for (rows, cols) in [(2, 2), (2, 3), (3, 3)] {
        let a = ground_eigenpairs(&build_tfi(rows, cols, 2.3, 1.0), 4).unwrap();
        let b = ground_eigenpairs(&build_tfi(rows, cols, -2.3, 1.0), 4).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn term_counts_follow_bond_formulas() {
    for rows in 1..=6 {
        for cols in 1..=6 {
            let n = rows * cols;
            let nn = rows * (cols - 1) + cols * (rows - 1);
            let nnn = 2 * (rows - 1) * (cols - 1);
            assert_eq!(build_tfi(rows, cols, 1.0, 1.0).terms.len(), n + nn);
            assert_eq!(build_j1j2(rows, cols, 1.0, 0.5).terms.len(), 3 * (nn + nnn));
        }
    }
}
