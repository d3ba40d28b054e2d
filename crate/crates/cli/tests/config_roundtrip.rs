use proptest::prelude::*;
use taperflow_cli::config::{parse_config, serialize_config};
use taperflow_core::montecarlo::{ExperimentConfig, PresampleMode};
use taperflow_core::{CaseId, InnovationModel};

/// `(j, β, γ₁)` with `β` and `γ₁` consistent with the case.
fn case_params() -> impl Strategy<Value = (u8, f64, f64)> {
    (1u8..=12, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(j, u, v)| {
        let beta = match (j - 1) % 3 {
            _ if j >= 10 => 0.0,
            0 => 0.55 + 0.4 * u,
            1 => 1.05 + 3.0 * u,
            _ => 1.05 + 0.4 * u,
        };
        let regime = if j >= 10 { j - 10 } else { (j - 1) / 3 };
        let gamma1 = match regime {
            0 => 0.05 + 0.9 * v,
            1 => 1.05 + 2.0 * v,
            _ => 1.0,
        };
        (j, beta, gamma1)
    })
}

fn innovation() -> impl Strategy<Value = InnovationModel> {
    prop_oneof![
        Just(InnovationModel::Gaussian),
        (1.05f64..1.95, 0.05f64..0.95).prop_map(|(alpha, u)| InnovationModel::TaperedPareto {
            alpha,
            gamma: u / alpha
        }),
    ]
}

fn config() -> impl Strategy<Value = ExperimentConfig> {
    (
        case_params(),
        0.1f64..4.0,
        innovation(),
        prop::collection::vec(1u64..2_000_000, 1..4),
        prop::collection::btree_set(1u32..4000, 1..6),
        1usize..10_000,
        any::<u64>(),
        prop_oneof![Just(PresampleMode::Auto), Just(PresampleMode::Exact)],
    )
        .prop_map(
            |((j, beta, gamma1), c, innovation, n_list, ts, reps, seed, presample)| {
                let c = if j == 7 || j == 8 || j == 9 || j == 12 { c } else { 1.0 };
                let t_grid = ts.into_iter().map(|k| k as f64 / 1000.0).collect();
                let mut cfg = ExperimentConfig::new(CaseId::new(j).unwrap(), beta, gamma1, c, n_list, t_grid);
                cfg.innovation = innovation;
                cfg.reps = reps;
                cfg.seed = seed;
                cfg.presample = presample;
                cfg
            },
        )
}

proptest! {
    #[test]
    fn canonical_form_round_trips(cfg in config()) {
        let text = serialize_config(&cfg);
        let back = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(serialize_config(&back), text);
    }
}
