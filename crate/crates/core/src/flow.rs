//! Time integration of the Sinkhorn–Wasserstein gradient flow between
//! Gaussians.
//!
//! Means follow `m_t = m⋆ + e^{−2t}(m₀ − m⋆)` exactly. Covariances follow
//! `Σ̇ = −(GΣ + ΣG)` with `G = G_Σ^{Σ⋆}` and are stepped by one of three
//! explicit schemes:
//!
//! * [`Integrator::EulerCongruence`]: `Σ ← (I − τG)Σ(I − τG)`, PSD by construction.
//! * [`Integrator::FactorLift`]: `X ← X(I − τG_{XᵀX})` on a factor `Σ = XᵀX`.
//! * [`Integrator::EigenAxis`]: per-eigenvalue recursion in a basis shared by
//!   commuting `Σ₀` and `Σ⋆`.

use crate::analysis::dissipation_with_gain;
use crate::error::{Error, Result};
use crate::gaussian_eot::{g_matrix, sinkhorn_divergence, w2_gaussian, Epsilon, Gaussian};
use crate::scalar::Scalar;
use crate::symlin::{
    check_dims, j_scalar, joint_diagonalize, psd_sqrt, sym_eig, Matrix, SymMat, DEFAULT_PSD_TOL,
};

/// Relative commutator tolerance used to accept the eigen-axis integrator.
pub const COMMUTE_TOL: f64 = 1e-10;

/// Covariance norm growth factor treated as divergence of the scheme.
const DIVERGENCE_FACTOR: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Integrator {
    EulerCongruence,
    FactorLift,
    EigenAxis,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowConfig<T> {
    pub eps: Epsilon<T>,
    pub tau: T,
    pub t_end: T,
    pub integrator: Integrator,
    pub record_every: usize,
}

impl<T: Scalar> FlowConfig<T> {
    pub fn new(
        eps: Epsilon<T>,
        tau: T,
        t_end: T,
        integrator: Integrator,
        record_every: usize,
    ) -> Result<Self> {
        let cfg = Self {
            eps,
            tau,
            t_end,
            integrator,
            record_every,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > T::zero()) || !self.tau.is_finite() {
            return Err(Error::InvalidInput(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.t_end >= self.tau) || !self.t_end.is_finite() {
            return Err(Error::InvalidInput(format!(
                "t_end ({}) must be finite and at least tau ({})",
                self.t_end, self.tau
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidInput("record_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps, `⌊t_end/τ⌋`.
    pub fn n_steps(&self) -> usize {
        // Guard against t_end/τ landing a hair below an integer.
        let ratio = self.t_end / self.tau * (T::one() + T::lit(1e-12));
        ratio.floor().to_usize().unwrap_or(usize::MAX)
    }
}

/// Step size `min(0.01, ε̃/(2λ_max(Σ⋆)))`, which keeps `I − τG` positive definite.
pub fn default_tau<T: Scalar>(eps: Epsilon<T>, target: &SymMat<T>) -> Result<T> {
    let lmax = sym_eig(target)?.lambda_max();
    let cap = T::lit(0.01);
    if lmax <= T::zero() {
        return Ok(cap);
    }
    Ok(cap.min(eps.eps_tilde() / (T::lit(2.0) * lmax)))
}

/// Largest step for which the congruence scheme decreases `S_ε` monotonically
/// in practice: `ε̃/(4λ_max(Σ⋆) + 4)`.
pub fn monotone_tau_bound<T: Scalar>(eps: Epsilon<T>, target: &SymMat<T>) -> Result<T> {
    let lmax = sym_eig(target)?.lambda_max().max(T::zero());
    Ok(eps.eps_tilde() / (T::lit(4.0) * lmax + T::lit(4.0)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState<T> {
    pub t: T,
    pub state: Gaussian<T>,
}

/// Recorded samples of an integrated flow. All per-step vectors are aligned
/// with `steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub steps: Vec<FlowState<T>>,
    /// Index of each recorded step in the underlying time grid.
    pub step_index: Vec<usize>,
    /// `S_ε(μ_t, μ⋆)`.
    pub divergence: Vec<T>,
    /// `Tr(G Σ_t G)`.
    pub dissipation: Vec<T>,
    pub w2_to_target: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    fn with_capacity(n: usize) -> Self {
        Self {
            steps: Vec::with_capacity(n),
            step_index: Vec::with_capacity(n),
            divergence: Vec::with_capacity(n),
            dissipation: Vec::with_capacity(n),
            w2_to_target: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn times(&self) -> Vec<T> {
        self.steps.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> Option<&FlowState<T>> {
        self.steps.last()
    }
}

/// Eigenvalue flow state in a basis `P` shared by `Σ₀` and `Σ⋆`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenFlowState<T> {
    pub basis: Matrix<T>,
    pub lambdas: Vec<T>,
    pub lambdas_star: Vec<T>,
}

impl<T: Scalar> EigenFlowState<T> {
    /// Jointly diagonalizes commuting `Σ₀`, `Σ⋆`. Returns `None` if their
    /// commutator exceeds `tol` (relative).
    pub fn from_commuting(sigma0: &SymMat<T>, sigma_star: &SymMat<T>, tol: T) -> Result<Option<Self>> {
        Ok(joint_diagonalize(sigma0, sigma_star, tol)?.map(|(basis, l0, ls)| Self {
            basis,
            lambdas: l0.into_iter().map(|l| l.max(T::zero())).collect(),
            lambdas_star: ls.into_iter().map(|l| l.max(T::zero())).collect(),
        }))
    }

    pub fn covariance(&self) -> SymMat<T> {
        SymMat::from_spectrum(&self.basis, &self.lambdas)
    }

    /// Diagonal of `PᵀΣP`: eigenvalues of a covariance in this basis.
    pub fn coordinates(&self, sigma: &SymMat<T>) -> Vec<T> {
        let pt = self.basis.transpose();
        (&(&pt * sigma.as_matrix()) * &self.basis).diagonal()
    }
}

/// Factor `X` with `Σ = XᵀX`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorState<T> {
    pub x: Matrix<T>,
}

impl<T: Scalar> FactorState<T> {
    /// Starts from the symmetric square root `X = Σ^{1/2}`.
    pub fn from_covariance(sigma: &SymMat<T>) -> Result<Self> {
        Ok(Self {
            x: psd_sqrt(sigma, T::lit(DEFAULT_PSD_TOL))?.into_matrix(),
        })
    }

    pub fn covariance(&self) -> SymMat<T> {
        SymMat::from_symmetric_product(&self.x.transpose() * &self.x)
    }
}

/// `m⋆ + e^{−2t}(m₀ − m⋆)`.
pub fn mean_at<T: Scalar>(m0: &[T], m_star: &[T], t: T) -> Result<Vec<T>> {
    check_dims(m0.len(), m_star.len())?;
    if !(t >= T::zero()) {
        return Err(Error::InvalidInput(format!("time must be nonnegative, got {t}")));
    }
    let decay = (T::lit(-2.0) * t).exp();
    Ok(m0
        .iter()
        .zip(m_star)
        .map(|(&a, &b)| b + decay * (a - b))
        .collect())
}

/// `−(GΣ + ΣG)`, the covariance velocity.
pub fn rhs<T: Scalar>(sigma: &SymMat<T>, target: &SymMat<T>, eps: Epsilon<T>) -> Result<SymMat<T>> {
    let g = g_matrix(sigma, target, eps)?;
    let gs = g.as_matrix() * sigma.as_matrix();
    Ok(SymMat::from_symmetric_product(gs.scale(T::lit(-2.0))))
}

/// Applies `Σ ← (I − τG)Σ(I − τG)` and clamps rounding noise below zero.
fn congruence_step<T: Scalar>(sigma: &SymMat<T>, gain: &SymMat<T>, tau: T) -> Result<SymMat<T>> {
    if gain.is_zero() {
        return Ok(sigma.clone());
    }
    let a = SymMat::identity(sigma.dim()).sub(&gain.scale(tau)).into_matrix();
    clamp_psd(sigma.congruence(&a))
}

fn clamp_psd<T: Scalar>(sigma: SymMat<T>) -> Result<SymMat<T>> {
    let eig = sym_eig(&sigma)?;
    eig.check_near_psd(T::lit(DEFAULT_PSD_TOL))?;
    if eig.lambda_min() < T::zero() {
        Ok(eig.map(|l| l.max(T::zero())))
    } else {
        Ok(sigma)
    }
}

/// One explicit step of the covariance scheme, `(I − τG)Σ(I − τG)`.
///
/// `Σ = 0` and `Σ = Σ⋆` are returned unchanged for every `τ`.
pub fn euler_step<T: Scalar>(
    sigma: &SymMat<T>,
    target: &SymMat<T>,
    eps: Epsilon<T>,
    tau: T,
) -> Result<SymMat<T>> {
    if !(tau > T::zero()) {
        return Err(Error::InvalidInput(format!("tau must be positive, got {tau}")));
    }
    let g = g_matrix(sigma, target, eps)?;
    congruence_step(sigma, &g, tau)
}

/// One explicit step of the lifted flow, `X ← X − τX G_{XᵀX}`.
pub fn factor_step<T: Scalar>(
    x: &FactorState<T>,
    target: &SymMat<T>,
    eps: Epsilon<T>,
    tau: T,
) -> Result<FactorState<T>> {
    if !(tau > T::zero()) {
        return Err(Error::InvalidInput(format!("tau must be positive, got {tau}")));
    }
    let g = g_matrix(&x.covariance(), target, eps)?;
    if g.is_zero() {
        return Ok(x.clone());
    }
    let step = &x.x * g.as_matrix();
    Ok(FactorState {
        x: &x.x - &step.scale(tau),
    })
}

/// Scalar gain `g(λ) = 2λ/(√(λ²+ε̃²)+ε̃) − 2λ⋆/(√(λ⋆λ+ε̃²)+ε̃)` on one eigen-axis,
/// so that `λ̇ = −2g(λ)λ`.
pub fn axis_gain<T: Scalar>(lambda: T, lambda_star: T, eps: Epsilon<T>) -> T {
    let et = eps.eps_tilde();
    let lambda = lambda.max(T::zero());
    let own = lambda * j_scalar(lambda * lambda, et);
    let cross = lambda_star * j_scalar(lambda_star * lambda, et);
    T::lit(2.0) * (own - cross)
}

/// One step of the eigen-axis recursion `λ ← (1 − τg(λ))²λ`, clamped to the
/// interval between `λ⁰` and `λ⋆`.
fn axis_step<T: Scalar>(lambda: T, lambda0: T, lambda_star: T, eps: Epsilon<T>, tau: T) -> T {
    if lambda == T::zero() {
        return T::zero();
    }
    let factor = T::one() - tau * axis_gain(lambda, lambda_star, eps);
    let next = factor * factor * lambda;
    next.max(lambda0.min(lambda_star)).min(lambda0.max(lambda_star))
}

fn check_nonnegative<T: Scalar>(values: &[T]) -> Result<()> {
    match values.iter().position(|&l| !(l >= T::zero())) {
        Some(index) => Err(Error::NegativeEigenvalue {
            index,
            value: values[index].to_f64().unwrap_or(f64::NAN),
        }),
        None => Ok(()),
    }
}

/// Integrates the decoupled eigenvalue flow for `⌊t_end/τ⌋` steps and returns
/// every `(t, λ(t))`, starting at `t = 0`.
///
/// Each step is the restriction of the congruence scheme to one axis, so the
/// result matches [`euler_step`] on commuting inputs to rounding. Zero
/// eigenvalues stay zero.
pub fn eigen_flow_integrate<T: Scalar>(
    lam0: &[T],
    lam_star: &[T],
    eps: Epsilon<T>,
    tau: T,
    t_end: T,
) -> Result<Vec<(T, Vec<T>)>> {
    check_dims(lam0.len(), lam_star.len())?;
    check_nonnegative(lam0)?;
    check_nonnegative(lam_star)?;
    let cfg = FlowConfig::new(eps, tau, t_end, Integrator::EigenAxis, 1)?;
    let n = cfg.n_steps();
    let mut out = Vec::with_capacity(n + 1);
    let mut lambdas = lam0.to_vec();
    out.push((T::zero(), lambdas.clone()));
    for k in 1..=n {
        for ((l, &l0), &ls) in lambdas.iter_mut().zip(lam0).zip(lam_star) {
            *l = axis_step(*l, l0, ls, eps, tau);
        }
        out.push((T::from_count(k) * tau, lambdas.clone()));
    }
    Ok(out)
}

enum Stepper<T> {
    Congruence(SymMat<T>),
    Factor(FactorState<T>),
    Axis {
        state: EigenFlowState<T>,
        lambda0: Vec<T>,
    },
}

impl<T: Scalar> Stepper<T> {
    fn covariance(&self) -> SymMat<T> {
        match self {
            Stepper::Congruence(s) => s.clone(),
            Stepper::Factor(x) => x.covariance(),
            Stepper::Axis { state, .. } => state.covariance(),
        }
    }

    fn advance(&mut self, sigma: &SymMat<T>, gain: &SymMat<T>, eps: Epsilon<T>, tau: T) -> Result<()> {
        match self {
            Stepper::Congruence(s) => *s = congruence_step(sigma, gain, tau)?,
            Stepper::Factor(x) => {
                // Σ = XᵀX, so the gain evaluated on Σ is G_{XᵀX}.
                if !gain.is_zero() {
                    let step = &x.x * gain.as_matrix();
                    x.x = &x.x - &step.scale(tau);
                }
            }
            Stepper::Axis { state, lambda0 } => {
                for ((l, &l0), &ls) in state
                    .lambdas
                    .iter_mut()
                    .zip(lambda0.iter())
                    .zip(&state.lambdas_star)
                {
                    *l = axis_step(*l, l0, ls, eps, tau);
                }
            }
        }
        Ok(())
    }
}

/// Integrates the flow from `mu0` toward `target` up to `⌊t_end/τ⌋` steps.
///
/// Records step 0, every `record_every`-th step and the final step. Errors
/// carry the index of the failing step.
pub fn integrate<T: Scalar>(
    mu0: &Gaussian<T>,
    target: &Gaussian<T>,
    cfg: &FlowConfig<T>,
) -> Result<Trajectory<T>> {
    check_dims(mu0.dim(), target.dim())?;
    cfg.validate()?;
    let eps = cfg.eps;
    let tau = cfg.tau;
    let n = cfg.n_steps();
    let sigma_star = target.cov();

    let mut stepper = match cfg.integrator {
        Integrator::EulerCongruence => Stepper::Congruence(mu0.cov().clone()),
        Integrator::FactorLift => Stepper::Factor(FactorState::from_covariance(mu0.cov())?),
        Integrator::EigenAxis => {
            let state = EigenFlowState::from_commuting(mu0.cov(), sigma_star, T::lit(COMMUTE_TOL))?
                .ok_or_else(|| {
                    Error::InvalidInput(
                        "eigen-axis integrator requires commuting source and target covariances".into(),
                    )
                })?;
            let lambda0 = state.lambdas.clone();
            Stepper::Axis { state, lambda0 }
        }
    };

    let limit = T::lit(DIVERGENCE_FACTOR) * (T::one() + mu0.cov().frobenius_norm());
    let mut traj = Trajectory::with_capacity(n / cfg.record_every + 2);

    for k in 0..=n {
        let sigma = stepper.covariance();
        let norm = sigma.frobenius_norm();
        if !(norm <= limit) {
            return Err(Error::StepDiverged {
                step: k,
                norm: norm.to_f64().unwrap_or(f64::NAN),
            });
        }
        let gain = g_matrix(&sigma, sigma_star, eps).map_err(|e| e.at_step(k))?;
        if k % cfg.record_every == 0 || k == n {
            let t = T::from_count(k) * tau;
            let mean = mean_at(mu0.mean(), target.mean(), t)?;
            let state = Gaussian::from_parts(mean, sigma.clone());
            let record = || -> Result<(T, T)> {
                Ok((
                    sinkhorn_divergence(&state, target, eps)?,
                    w2_gaussian(&state, target)?,
                ))
            };
            let (div, w2) = record().map_err(|e| e.at_step(k))?;
            traj.divergence.push(div);
            traj.w2_to_target.push(w2);
            traj.dissipation.push(dissipation_with_gain(&gain, &sigma));
            traj.step_index.push(k);
            traj.steps.push(FlowState { t, state });
        }
        if k < n {
            stepper
                .advance(&sigma, &gain, eps, tau)
                .map_err(|e| e.at_step(k + 1))?;
        }
    }
    Ok(traj)
}
