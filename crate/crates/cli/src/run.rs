use gaussflow::analysis::{
    functional_bound, loglog_slope, predict_limit, rate_constants, LimitClassification, DEFAULT_COMMUTE_TOL,
};
use gaussflow::flow::{integrate, EigenFlowState, COMMUTE_TOL};
use gaussflow::gaussian_eot::{covariance_divergence, sinkhorn_divergence};
use gaussflow::oracle::{discretize_gaussian, sinkhorn_divergence_discrete, DEFAULT_RADIUS_SIGMAS};
use gaussflow::symlin::sym_eig;
use serde::{Deserialize, Serialize};

use crate::config::{Output, Scenario, ScenarioConfig};
use crate::error::CliError;

/// One recorded step of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub t: f64,
    pub s_eps: f64,
    /// `S_ε(μ_t, μ⋆)/S_ε(μ_0, μ⋆)`, zero when the run starts at the target.
    pub s_eps_norm: f64,
    pub dissipation: f64,
    pub w2: f64,
    /// Covariance eigenvalues in the joint eigenbasis; empty when source and
    /// target do not commute.
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitSummary {
    pub classification: String,
    pub converges_to_target: bool,
    pub limit_cov: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    /// Per-axis constants; present only in the commuting case.
    pub c_a: Option<Vec<f64>>,
    pub c_b: Option<Vec<f64>>,
    pub l: Option<Vec<f64>>,
    /// Rows where the covariance part of `S_ε` exceeds the commuting-case
    /// bound by more than `10τ·max L`.
    pub bound_violations: Option<usize>,
    /// `α` in `S_ε ∝ t^{−α}`, fitted over the last decade of time when the
    /// target is singular.
    pub fitted_exponent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub nodes_per_axis: usize,
    pub closed_form: f64,
    pub oracle: Option<f64>,
    pub rel_error: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub eps: f64,
    pub tau: f64,
    pub t_end: f64,
    pub n_steps: usize,
    pub commuting: bool,
    pub final_cov: Vec<Vec<f64>>,
    pub final_eigenvalues: Vec<f64>,
    pub limit: Option<LimitSummary>,
    pub rates: Option<RateSummary>,
    pub oracle: Option<OracleSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub id: String,
    pub name: String,
    pub series: Option<String>,
    pub provenance: Option<String>,
    pub rows: Vec<Row>,
    pub summary: Summary,
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunRecord, CliError> {
    run_validated(&cfg.validate()?)
}

pub fn run_validated(sc: &Scenario) -> Result<RunRecord, CliError> {
    let cfg = &sc.config;
    let flow = &sc.flow;
    let traj = integrate(&sc.source, &sc.target, flow)?;
    let joint = EigenFlowState::from_commuting(sc.source.cov(), sc.target.cov(), COMMUTE_TOL)?;

    let s0 = traj.divergence.first().copied().unwrap_or(0.0);
    let rows: Vec<Row> = (0..traj.len())
        .map(|i| {
            let st = &traj.steps[i];
            Row {
                t: st.t,
                s_eps: traj.divergence[i],
                s_eps_norm: if s0 > 0.0 { traj.divergence[i] / s0 } else { 0.0 },
                dissipation: traj.dissipation[i],
                w2: traj.w2_to_target[i],
                eigenvalues: joint.as_ref().map(|j| j.coordinates(st.state.cov())).unwrap_or_default(),
            }
        })
        .collect();

    let last = traj.last().expect("a trajectory always records step 0");
    let final_eig = sym_eig(last.state.cov())?;

    let limit = if cfg.wants(Output::LimitReport) {
        let rep = predict_limit(&sc.source, &sc.target, DEFAULT_COMMUTE_TOL)?;
        Some(LimitSummary {
            classification: match rep.classification {
                LimitClassification::NonsingularSource => "nonsingular_source",
                LimitClassification::CommutingCase => "commuting_case",
                LimitClassification::Undetermined => "undetermined",
            }
            .to_string(),
            converges_to_target: rep.converges_to_target,
            limit_cov: rep.limit_cov.map(|c| c.to_rows()),
        })
    } else {
        None
    };

    let rates = if cfg.wants(Output::Rates) {
        Some(rate_summary(sc, joint.as_ref(), &traj)?)
    } else {
        None
    };

    let oracle = if cfg.wants(Output::OracleCheck) {
        Some(oracle_summary(sc)?)
    } else {
        None
    };

    Ok(RunRecord {
        id: cfg.id(),
        name: cfg.name.clone(),
        series: cfg.series.clone(),
        provenance: cfg.provenance.clone(),
        rows,
        summary: Summary {
            eps: flow.eps.eps(),
            tau: flow.tau,
            t_end: flow.t_end,
            n_steps: flow.n_steps(),
            commuting: joint.is_some(),
            final_cov: last.state.cov().to_rows(),
            final_eigenvalues: final_eig.eigenvalues,
            limit,
            rates,
            oracle,
        },
    })
}

fn rate_summary(
    sc: &Scenario,
    joint: Option<&EigenFlowState<f64>>,
    traj: &gaussflow::Trajectory,
) -> Result<RateSummary, CliError> {
    let eps = sc.flow.eps;
    let tau = sc.flow.tau;
    let mut out = RateSummary {
        c_a: None,
        c_b: None,
        l: None,
        bound_violations: None,
        fitted_exponent: None,
    };
    if let Some(j) = joint {
        let rc = rate_constants(&j.lambdas, &j.lambdas_star, eps)?;
        let l_max = rc.l.iter().copied().fold(0.0, f64::max);
        let mut violations = 0;
        for st in &traj.steps {
            let cov_part = covariance_divergence(st.state.cov(), sc.target.cov(), eps)?;
            if cov_part > functional_bound(st.t, &j.lambdas, &j.lambdas_star, eps)? + 10.0 * tau * l_max {
                violations += 1;
            }
        }
        out.c_a = Some(rc.c_a);
        out.c_b = Some(rc.c_b);
        out.l = Some(rc.l);
        out.bound_violations = Some(violations);
    }
    let target_eig = sym_eig(sc.target.cov())?;
    if target_eig.lambda_min() <= DEFAULT_COMMUTE_TOL * target_eig.lambda_max().max(1.0) {
        let t_end = sc.flow.t_end;
        out.fitted_exponent = loglog_slope(&traj.times(), &traj.divergence, t_end / 10.0, t_end).map(|s| -s);
    }
    Ok(out)
}

/// Grid size used by the `oracle_check` output.
pub fn oracle_nodes(dim: usize) -> usize {
    if dim <= 1 {
        200
    } else {
        24
    }
}

fn oracle_summary(sc: &Scenario) -> Result<OracleSummary, CliError> {
    let eps = sc.flow.eps;
    let closed = sinkhorn_divergence(&sc.source, &sc.target, eps)?;
    let nodes = oracle_nodes(sc.source.dim());
    if sc.source.dim() > gaussflow::oracle::MAX_ORACLE_DIM {
        return Ok(OracleSummary {
            nodes_per_axis: 0,
            closed_form: closed,
            oracle: None,
            rel_error: None,
            note: Some("skipped: grid oracle is limited to two dimensions".into()),
        });
    }
    let a = discretize_gaussian(&sc.source, nodes, DEFAULT_RADIUS_SIGMAS)?;
    let b = discretize_gaussian(&sc.target, nodes, DEFAULT_RADIUS_SIGMAS)?;
    let discrete = sinkhorn_divergence_discrete(&a, &b, eps, 100_000, 1e-10)?;
    Ok(OracleSummary {
        nodes_per_axis: nodes,
        closed_form: closed,
        oracle: Some(discrete),
        rel_error: (closed != 0.0).then(|| ((closed - discrete) / closed).abs()),
        note: None,
    })
}
