//! Post-hoc diagnostics for the flow: convergence-rate constants in the
//! commuting case, the resulting bound on `S_ε`, critical points and limit
//! prediction.

use crate::error::{Error, Result};
use crate::gaussian_eot::{g_matrix, Epsilon, Gaussian};
use crate::scalar::Scalar;
use crate::symlin::{check_dims, joint_diagonalize, sym_eig, SymMat};

/// Default relative tolerance for commutation and singularity tests.
pub const DEFAULT_COMMUTE_TOL: f64 = 1e-10;

/// Per-axis constants of the commuting-case rates.
#[derive(Clone, Debug, PartialEq)]
pub struct RateConstants<T> {
    /// Exponential rate, zero when `min(λ⁰, λ⋆) = 0`.
    pub c_a: Vec<T>,
    /// Sublinear rate, used on axes with `λ⋆ = 0`.
    pub c_b: Vec<T>,
    /// Lipschitz constant of `𝓑_ε` in the axis eigenvalue, `2(1 + λ⋆/ε̃)`.
    pub l: Vec<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitClassification {
    NonsingularSource,
    CommutingCase,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitReport<T> {
    /// Predicted limit covariance; `None` when `Undetermined`.
    pub limit_cov: Option<SymMat<T>>,
    pub converges_to_target: bool,
    pub classification: LimitClassification,
}

fn check_axes<T: Scalar>(lam0: &[T], lam_star: &[T]) -> Result<()> {
    check_dims(lam0.len(), lam_star.len())?;
    for values in [lam0, lam_star] {
        if let Some(index) = values.iter().position(|&l| !(l >= T::zero())) {
            return Err(Error::NegativeEigenvalue {
                index,
                value: values[index].to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

pub fn rate_constants<T: Scalar>(lam0: &[T], lam_star: &[T], eps: Epsilon<T>) -> Result<RateConstants<T>> {
    check_axes(lam0, lam_star)?;
    let et = eps.eps_tilde();
    let et2 = et * et;
    let four = T::lit(4.0);
    let two = T::lit(2.0);
    let mut out = RateConstants {
        c_a: Vec::with_capacity(lam0.len()),
        c_b: Vec::with_capacity(lam0.len()),
        l: Vec::with_capacity(lam0.len()),
    };
    for (&l0, &ls) in lam0.iter().zip(lam_star) {
        let hi = l0.max(ls);
        let denom = ((ls * hi + et2).sqrt() + et) * ((hi * hi + et2).sqrt() + et);
        out.c_a.push(four * et * l0.min(ls) / denom);
        out.c_b.push(four / ((l0 * l0 + et2).sqrt() + et));
        out.l.push(two * (T::one() + ls / et));
    }
    Ok(out)
}

/// Upper bound on `S_ε(μ_t, μ⋆)` for centred commuting Gaussians:
/// exponential terms on axes with `λ⋆ > 0`, `λ⁰/(1 + λ⁰C^b t)` terms on axes
/// with `λ⋆ = 0`.
pub fn functional_bound<T: Scalar>(t: T, lam0: &[T], lam_star: &[T], eps: Epsilon<T>) -> Result<T> {
    let rc = rate_constants(lam0, lam_star, eps)?;
    Ok((0..lam0.len())
        .map(|i| {
            let (l0, ls) = (lam0[i], lam_star[i]);
            if ls > T::zero() {
                rc.l[i] * (-rc.c_a[i] * t).exp() * (l0 - ls).abs()
            } else {
                rc.l[i] * l0 / (T::one() + l0 * rc.c_b[i] * t)
            }
        })
        .sum())
}

/// `Tr(GΣG)` for a precomputed gain `G`, clamped at zero.
pub fn dissipation_with_gain<T: Scalar>(gain: &SymMat<T>, sigma: &SymMat<T>) -> T {
    let gs = gain.as_matrix() * sigma.as_matrix();
    let n = sigma.dim();
    let mut tr = T::zero();
    for i in 0..n {
        for j in 0..n {
            tr = tr + gs[(i, j)] * gain[(j, i)];
        }
    }
    tr.max(T::zero())
}

/// Dissipation rate `Tr(G_Σ Σ G_Σ)` of `𝓑_ε(·, Σ⋆)` along the flow.
pub fn dissipation<T: Scalar>(sigma: &SymMat<T>, target: &SymMat<T>, eps: Epsilon<T>) -> Result<T> {
    let g = g_matrix(sigma, target, eps)?;
    Ok(dissipation_with_gain(&g, sigma))
}

/// Whether `Σ` is a critical point: `‖G_Σ Σ‖_F ≤ tol·(1 + ‖Σ‖_F)`.
pub fn is_critical<T: Scalar>(sigma: &SymMat<T>, target: &SymMat<T>, eps: Epsilon<T>, tol: T) -> Result<bool> {
    let g = g_matrix(sigma, target, eps)?;
    let gs = g.as_matrix() * sigma.as_matrix();
    Ok(gs.frobenius_norm() <= tol * (T::one() + sigma.frobenius_norm()))
}

/// `‖AB − BA‖_F ≤ tol·(1 + ‖A‖_F‖B‖_F)`.
pub fn commute_check<T: Scalar>(a: &SymMat<T>, b: &SymMat<T>, tol: T) -> Result<bool> {
    check_dims(a.dim(), b.dim())?;
    Ok(a.commutator_norm(b) <= tol * (T::one() + a.frobenius_norm() * b.frobenius_norm()))
}

/// Predicts the long-time limit of the covariance flow.
///
/// A nonsingular source always converges to the target. For a singular
/// source commuting with the target, axes with `λ⁰ = 0` stay at zero and the
/// others reach `λ⋆`. Singular non-commuting sources are `Undetermined`.
pub fn predict_limit<T: Scalar>(mu0: &Gaussian<T>, target: &Gaussian<T>, commute_tol: T) -> Result<LimitReport<T>> {
    check_dims(mu0.dim(), target.dim())?;
    let sigma0 = mu0.cov();
    let sigma_star = target.cov();
    let eig0 = sym_eig(sigma0)?;
    if eig0.lambda_min() > commute_tol * eig0.lambda_max() {
        return Ok(LimitReport {
            limit_cov: Some(sigma_star.clone()),
            converges_to_target: true,
            classification: LimitClassification::NonsingularSource,
        });
    }

    let commutator = sigma0.commutator_norm(sigma_star);
    if commutator > commute_tol * sigma0.frobenius_norm() * sigma_star.frobenius_norm() {
        return Ok(LimitReport {
            limit_cov: None,
            converges_to_target: false,
            classification: LimitClassification::Undetermined,
        });
    }
    // The commutator test above already passed; accept any residual here.
    let (basis, l0, ls) = joint_diagonalize(sigma0, sigma_star, T::infinity())?
        .expect("infinite tolerance always accepts");
    let zero0 = commute_tol * eig0.lambda_max().max(T::zero());
    let zero_star = commute_tol * sym_eig(sigma_star)?.lambda_max().max(T::zero());
    let mut converges = true;
    let limit: Vec<T> = l0
        .iter()
        .zip(&ls)
        .map(|(&a, &b)| {
            if a <= zero0 {
                if b > zero_star {
                    converges = false;
                }
                T::zero()
            } else {
                b.max(T::zero())
            }
        })
        .collect();
    let limit_cov = if converges {
        sigma_star.clone()
    } else {
        SymMat::from_spectrum(&basis, &limit)
    };
    Ok(LimitReport {
        limit_cov: Some(limit_cov),
        converges_to_target: converges,
        classification: LimitClassification::CommutingCase,
    })
}

/// Least-squares slope of `log y` against `log t` over samples with
/// `t_min ≤ t ≤ t_max` and `y > 0`. `None` with fewer than two samples.
pub fn loglog_slope<T: Scalar>(times: &[T], values: &[T], t_min: T, t_max: T) -> Option<T> {
    let pts: Vec<(T, T)> = times
        .iter()
        .zip(values)
        .filter(|(&t, &y)| t >= t_min && t <= t_max && t > T::zero() && y > T::zero())
        .map(|(&t, &y)| (t.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = T::from_count(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxy: T = pts.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: T = pts.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == T::zero() {
        return None;
    }
    Some(sxy / sxx)
}
