//! Built-in scenarios mirroring the published figures.
//!
//! The figures show covariance ellipses and divergence curves but never the
//! matrices behind them, so every covariance below is a reconstruction with
//! the described structure. Each config says so in its `provenance` field.

use crate::config::{EigenSpec, GaussianSpec, IntegratorName, Output, ScenarioConfig};

pub const BUILTIN_NAMES: [&str; 7] = [
    "fig1_nonsingular",
    "fig1_singular_target",
    "fig2_orthogonal",
    "fig2_rotated",
    "fig3_commuting",
    "fig3_noncommuting",
    "fig4_eps_sweep",
];

pub const FIG3_LAMBDA_STAR: [f64; 6] = [0.5, 0.2, 0.1, 0.05, 0.01, 0.0];
pub const FIG4_EPS: [f64; 5] = [0.1, 0.5, 1.0, 5.0, 10.0];

/// Rows are never needed finer than this for plotting.
const TARGET_ROWS: f64 = 2000.0;

const RECONSTRUCTED: &str = "reconstructed: the published figure shows ellipses or curves, not matrix entries";

fn cov(mean: [f64; 2], rows: [[f64; 2]; 2]) -> GaussianSpec {
    GaussianSpec {
        mean: mean.to_vec(),
        cov: Some(rows.iter().map(|r| r.to_vec()).collect()),
        eigen: None,
    }
}

fn eigen(mean: [f64; 2], values: [f64; 2], angle: f64) -> GaussianSpec {
    GaussianSpec {
        mean: mean.to_vec(),
        cov: None,
        eigen: Some(EigenSpec {
            values: values.to_vec(),
            basis: None,
            angle: Some(angle),
        }),
    }
}

/// Nonsingular, tilted source shared by several figures.
fn fig1_source() -> GaussianSpec {
    cov([-1.0, 0.5], [[1.5, 0.6], [0.6, 0.8]])
}

fn scenario(name: &str, series: Option<String>, source: GaussianSpec, target: GaussianSpec, eps: f64, t_end: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig {
        name: name.to_string(),
        series,
        provenance: Some(RECONSTRUCTED.to_string()),
        source,
        target,
        eps,
        tau: None,
        t_end,
        integrator: IntegratorName::EulerCongruence,
        record_every: 1,
        outputs: vec![Output::Trajectory, Output::LimitReport, Output::Rates],
    };
    let tau = cfg
        .validate()
        .map(|s| s.flow.tau)
        .expect("builtin scenarios are valid");
    cfg.record_every = ((t_end / tau / TARGET_ROWS).floor() as usize).max(1);
    cfg
}

pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    let mut out = Vec::new();
    let fig1_target = eigen([1.0, 0.0], [1.0, 0.3], 0.5);

    let mut nonsingular = scenario("fig1_nonsingular", None, fig1_source(), fig1_target.clone(), 1.0, 50.0);
    nonsingular.outputs.push(Output::OracleCheck);
    out.push(nonsingular);
    out.push(scenario(
        "fig1_singular_target",
        None,
        fig1_source(),
        eigen([1.0, 0.0], [1.0, 0.0], 0.5),
        1.0,
        50.0,
    ));

    // Small ε: the stalled eigenvalue decays like ε/(8t).
    out.push(scenario(
        "fig2_orthogonal",
        None,
        cov([0.0, 0.0], [[1.0, 0.0], [0.0, 0.0]]),
        cov([0.0, 0.0], [[0.0, 0.0], [0.0, 1.0]]),
        0.1,
        50.0,
    ));
    out.push(scenario(
        "fig2_rotated",
        None,
        cov([0.0, 0.0], [[1.0, 0.0], [0.0, 0.0]]),
        eigen([0.0, 0.0], [0.0, 1.0], 0.1),
        0.1,
        200.0,
    ));

    for (name, source, t_end) in [
        ("fig3_commuting", cov([0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]]), 50.0),
        ("fig3_noncommuting", cov([0.0, 0.0], [[1.5, 0.6], [0.6, 0.8]]), 500.0),
    ] {
        for ls in FIG3_LAMBDA_STAR {
            out.push(scenario(
                name,
                Some(format!("lambda_star={ls}")),
                source.clone(),
                cov([0.0, 0.0], [[1.0, 0.0], [0.0, ls]]),
                1.0,
                t_end,
            ));
        }
    }

    for e in FIG4_EPS {
        out.push(scenario(
            "fig4_eps_sweep",
            Some(format!("eps={e}")),
            fig1_source(),
            fig1_target.clone(),
            e,
            50.0,
        ));
    }
    out
}

/// All members of the named builtin family, in sweep order.
pub fn builtin(name: &str) -> Vec<ScenarioConfig> {
    builtin_scenarios().into_iter().filter(|c| c.name == name).collect()
}
