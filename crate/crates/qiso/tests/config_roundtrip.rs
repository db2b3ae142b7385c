use proptest::prelude::*;
use qiso::config::{ExperimentKind, GradientName, LatticeName, ModelKind, VarianceName};
use qiso::ExperimentConfig;

fn config() -> impl Strategy<Value = ExperimentConfig> {
    let head = (0usize..8, 0u64..i64::MAX as u64, 1usize..6, "[a-z0-9_/.-]{1,12}", 1usize..100_000);
    let model = (any::<bool>(), -10.0f64..10.0, -3.0f64..3.0, -2.0f64..2.0, -2.0f64..2.0);
    let lattice = (0usize..3, 1usize..6, 1usize..6, 1usize..4, 1usize..9);
    let optimizer = (0usize..2000, 1e-4f64..1.0, 0.0f64..1.0, 0.0f64..1.0, any::<bool>(), 0usize..50);
    let lists = (
        proptest::collection::vec(-5.0f64..5.0, 0..6),
        proptest::collection::vec(1usize..9, 0..6),
        proptest::collection::vec(0.0f64..0.1, 0..4),
        0usize..3,
        proptest::option::of("[a-z]{1,8}\\.json"),
    );
    (head, model, lattice, optimizer, lists).prop_map(|(h, m, l, o, x)| {
        let mut c = ExperimentConfig::default();
        c.kind = [
            ExperimentKind::Vqe,
            ExperimentKind::Sweep,
            ExperimentKind::Variance,
            ExperimentKind::Pretrain,
            ExperimentKind::Noise,
            ExperimentKind::Sample,
            ExperimentKind::Export,
            ExperimentKind::Ed,
        ][h.0];
        (c.seed, c.n_seeds, c.output_dir, c.shots) = (h.1, h.2, h.3, h.4);
        c.model.kind = if m.0 { ModelKind::Tfi } else { ModelKind::J1j2 };
        (c.model.lambda, c.model.delta, c.model.j1, c.model.j2) = (m.1, m.2, m.3, m.4);
        c.lattice.kind = [LatticeName::Square, LatticeName::Triangular, LatticeName::Honeycomb][l.0];
        (c.lattice.rows, c.lattice.cols, c.lattice.n_bq, c.lattice.n_bl) = (l.1, l.2, l.3, l.4);
        (c.optimizer.steps, c.optimizer.alpha, c.optimizer.beta1, c.optimizer.beta2) = (o.0, o.1, o.2, o.3);
        c.optimizer.gradient = if o.4 { GradientName::Adjoint } else { GradientName::ParameterShift };
        c.optimizer.fidelity_every = o.5;
        c.sweep.lambdas = x.0;
        c.variance.layers = x.1.clone();
        c.noise.target_sides = x.1;
        c.noise.vqe_p = x.2;
        c.variance.group = [VarianceName::Layers, VarianceName::BondQubits, VarianceName::Column][x.3];
        c.params_file = x.4;
        c
    })
}

proptest! {
    #[test]
    fn configs_survive_serialization(c in config()) {
        let text = c.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.hash(), c.hash());
        let overridden = ExperimentConfig::from_toml_with_overrides(&text, &[format!("seed={}", c.seed)]).unwrap();
        prop_assert_eq!(overridden, c);
    }

    #[test]
    fn hash_ignores_the_output_directory(c in config(), dir in "[a-z]{1,8}") {
        let mut moved = c.clone();
        moved.output_dir = dir;
        prop_assert_eq!(moved.hash(), c.hash());
        let mut reseeded = c.clone();
        reseeded.seed = c.seed.wrapping_add(1);
        prop_assert_ne!(reseeded.hash(), c.hash());
    }
}
