//! Closed-form entropic optimal transport between Gaussian measures.
//!
//! With `ε̃ = ε/4` and `J(X) = ((X + ε̃²I)^{1/2} + ε̃I)^{-1}` the Schrödinger
//! potentials between `N(m, Σ)` and `N(n, Γ)` are quadratic with matrices
//!
//! ```text
//! F_Σ^Γ = I − Γ^{1/2} J(Γ^{1/2} Σ Γ^{1/2}) Γ^{1/2}
//! G_Σ^Γ = 2(F_Σ^Γ − F_Σ^Σ)
//! ```
//!
//! and the Sinkhorn divergence is `‖m − n‖² + 𝓑_ε(Σ, Γ)`. Singular
//! covariances are handled throughout: nothing here inverts `Σ` or `Γ`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symlin::{
    check_dims, dot, j_operator, j_scalar, norm_sq, psd_sqrt, sym_eig, vec_sub, SymMat,
    DEFAULT_PSD_TOL,
};

/// Gaussian measure `N(mean, cov)`, covariance possibly singular.
#[derive(Clone, Debug, PartialEq)]
pub struct Gaussian<T> {
    mean: Vec<T>,
    cov: SymMat<T>,
}

impl<T: Scalar> Gaussian<T> {
    pub fn new(mean: Vec<T>, cov: SymMat<T>) -> Result<Self> {
        check_dims(cov.dim(), mean.len())?;
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite mean".into()));
        }
        sym_eig(&cov)?.check_near_psd(T::lit(DEFAULT_PSD_TOL))?;
        Ok(Self { mean, cov })
    }

    pub fn centered(cov: SymMat<T>) -> Result<Self> {
        let d = cov.dim();
        Self::new(vec![T::zero(); d], cov)
    }

    pub fn dirac(mean: Vec<T>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::InvalidInput("empty mean".into()));
        }
        Self::new(mean, SymMat::zeros(d))
    }

    /// Skips the PSD check; callers guarantee the invariant.
    pub(crate) fn from_parts(mean: Vec<T>, cov: SymMat<T>) -> Self {
        debug_assert_eq!(mean.len(), cov.dim());
        Self { mean, cov }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn cov(&self) -> &SymMat<T> {
        &self.cov
    }
}

/// Entropic regularization strength `ε` together with `ε̃ = ε/4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Epsilon<T> {
    eps: T,
    eps_tilde: T,
}

impl<T: Scalar> Epsilon<T> {
    pub fn new(eps: T) -> Result<Self> {
        if !(eps > T::zero()) || !eps.is_finite() {
            return Err(Error::InvalidInput(format!(
                "epsilon must be positive and finite, got {eps}"
            )));
        }
        Ok(Self {
            eps,
            eps_tilde: eps / T::lit(4.0),
        })
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn eps_tilde(&self) -> T {
        self.eps_tilde
    }
}

/// Affine vector field `x ↦ gain·(x − center) + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineField<T> {
    pub gain: SymMat<T>,
    pub offset: Vec<T>,
    pub center: Vec<T>,
}

impl<T: Scalar> AffineField<T> {
    pub fn evaluate(&self, x: &[T]) -> Vec<T> {
        let shifted = vec_sub(x, &self.center);
        self.gain
            .as_matrix()
            .apply(&shifted)
            .into_iter()
            .zip(&self.offset)
            .map(|(a, &b)| a + b)
            .collect()
    }
}

/// `f(x) = ⟨x − c, Q(x − c)⟩ + ⟨lin, x⟩ + constant`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticPotential<T> {
    pub quad: SymMat<T>,
    pub center: Vec<T>,
    pub lin: Vec<T>,
    pub constant: T,
}

impl<T: Scalar> QuadraticPotential<T> {
    pub fn evaluate(&self, x: &[T]) -> T {
        let y = vec_sub(x, &self.center);
        dot(&y, &self.quad.as_matrix().apply(&y)) + dot(&self.lin, x) + self.constant
    }

    /// `∫ f dμ` for a Gaussian `μ`, in closed form.
    pub fn expectation(&self, mu: &Gaussian<T>) -> T {
        let shift = vec_sub(mu.mean(), &self.center);
        let quad_cov = (self.quad.as_matrix() * mu.cov().as_matrix()).trace();
        quad_cov
            + dot(&shift, &self.quad.as_matrix().apply(&shift))
            + dot(&self.lin, mu.mean())
            + self.constant
    }
}

fn check_psd<T: Scalar>(s: &SymMat<T>) -> Result<()> {
    sym_eig(s)?.check_near_psd(T::lit(DEFAULT_PSD_TOL))
}

/// `Γ^{1/2} J(Γ^{1/2} Σ Γ^{1/2}) Γ^{1/2}`, the cross term of `F_Σ^Γ`.
fn cross_term<T: Scalar>(sigma: &SymMat<T>, gamma: &SymMat<T>, eps: Epsilon<T>) -> Result<SymMat<T>> {
    let tol = T::lit(DEFAULT_PSD_TOL);
    let gh = psd_sqrt(gamma, tol)?;
    let j = j_operator(&gh.sandwich(sigma), eps.eps_tilde())?;
    Ok(gh.sandwich(&j))
}

/// `F_Σ^Γ = I − Γ^{1/2} J(Γ^{1/2} Σ Γ^{1/2}) Γ^{1/2}`.
///
/// Eigenvalues lie in `[1 − λ_max(Γ)/(2ε̃), 1]`.
pub fn f_matrix<T: Scalar>(sigma: &SymMat<T>, gamma: &SymMat<T>, eps: Epsilon<T>) -> Result<SymMat<T>> {
    check_dims(sigma.dim(), gamma.dim())?;
    check_psd(sigma)?;
    let cross = cross_term(sigma, gamma, eps)?;
    Ok(SymMat::identity(sigma.dim()).sub(&cross))
}

/// `G_Σ^Γ = 2Σ J(Σ²) − 2Γ^{1/2} J(Γ^{1/2} Σ Γ^{1/2}) Γ^{1/2}`, the gain of the
/// flow's driving field. Eigenvalues lie in `[−λ_max(Γ)/ε̃, 2]`.
///
/// `G_Σ^Σ` is returned as the exact zero matrix.
pub fn g_matrix<T: Scalar>(
    sigma: &SymMat<T>,
    sigma_star: &SymMat<T>,
    eps: Epsilon<T>,
) -> Result<SymMat<T>> {
    check_dims(sigma.dim(), sigma_star.dim())?;
    let eig = sym_eig(sigma)?;
    eig.check_near_psd(T::lit(DEFAULT_PSD_TOL))?;
    if sigma == sigma_star {
        return Ok(SymMat::zeros(sigma.dim()));
    }
    let two = T::lit(2.0);
    let et = eps.eps_tilde();
    // Σ J(Σ²) shares Σ's eigenbasis: λ/(√(λ²+ε̃²)+ε̃) per axis.
    let self_term = eig.map(|l| {
        let l = l.max(T::zero());
        two * l * j_scalar(l * l, et)
    });
    let cross = cross_term(sigma, sigma_star, eps)?;
    Ok(self_term.sub(&cross.scale(two)))
}

fn b_eps_from_cross_spectrum<T: Scalar>(
    tr_sigma: T,
    tr_gamma: T,
    alphas: impl Iterator<Item = T>,
    eps: Epsilon<T>,
) -> T {
    let half_eps = eps.eps() * T::lit(0.5);
    let quarter_eps_sq = half_eps * half_eps;
    let four = T::lit(4.0);
    let spectral: T = alphas
        .map(|a| {
            let d = (four * a.max(T::zero()) + quarter_eps_sq).sqrt();
            half_eps * (d + half_eps).ln() - d
        })
        .sum();
    tr_sigma + tr_gamma + spectral
}

/// `B_ε(Σ, Γ) = Tr Σ + Tr Γ + (ε/2) log det(D_ε + (ε/2)I) − Tr D_ε` with
/// `D_ε = (4Σ^{1/2}ΓΣ^{1/2} + (ε²/4)I)^{1/2}`.
///
/// The log-determinant is summed over eigenvalues of `D_ε`, all `≥ ε/2`.
pub fn b_eps<T: Scalar>(sigma: &SymMat<T>, gamma: &SymMat<T>, eps: Epsilon<T>) -> Result<T> {
    check_dims(sigma.dim(), gamma.dim())?;
    check_psd(gamma)?;
    let sh = psd_sqrt(sigma, T::lit(DEFAULT_PSD_TOL))?;
    let cross = sym_eig(&sh.sandwich(gamma))?;
    Ok(b_eps_from_cross_spectrum(
        sigma.trace(),
        gamma.trace(),
        cross.eigenvalues.into_iter(),
        eps,
    ))
}

/// `B_ε(Σ, Σ)`, evaluated on the spectrum of `Σ` directly.
pub fn b_eps_self<T: Scalar>(sigma: &SymMat<T>, eps: Epsilon<T>) -> Result<T> {
    let eig = sym_eig(sigma)?;
    eig.check_near_psd(T::lit(DEFAULT_PSD_TOL))?;
    let tr = sigma.trace();
    Ok(b_eps_from_cross_spectrum(
        tr,
        tr,
        eig.clamped_eigenvalues().into_iter().map(|l| l * l),
        eps,
    ))
}

/// Covariance part of the Sinkhorn divergence,
/// `𝓑_ε(Σ, Γ) = B_ε(Σ, Γ) − ½B_ε(Σ, Σ) − ½B_ε(Γ, Γ)`.
pub fn covariance_divergence<T: Scalar>(
    sigma: &SymMat<T>,
    gamma: &SymMat<T>,
    eps: Epsilon<T>,
) -> Result<T> {
    if sigma == gamma {
        check_psd(sigma)?;
        return Ok(T::zero());
    }
    let half = T::lit(0.5);
    let cross = b_eps(sigma, gamma, eps)?;
    let own = b_eps_self(sigma, eps)?;
    let other = b_eps_self(gamma, eps)?;
    Ok(cross - half * own - half * other)
}

/// `S_ε(μ, ν) = ‖m − n‖² + 𝓑_ε(Σ, Γ)`.
pub fn sinkhorn_divergence<T: Scalar>(mu: &Gaussian<T>, nu: &Gaussian<T>, eps: Epsilon<T>) -> Result<T> {
    check_dims(mu.dim(), nu.dim())?;
    let means = norm_sq(&vec_sub(mu.mean(), nu.mean()));
    Ok(means + covariance_divergence(mu.cov(), nu.cov(), eps)?)
}

/// Entropic transport cost `OT_ε(μ, ν)` for the cost `‖x − y‖²` with
/// `ε·KL(π | μ⊗ν)` regularization:
/// `‖m − n‖² + B_ε(Σ, Γ) + d·(ε/2)(1 − log ε)`.
///
/// The dimension-only constant cancels in the Sinkhorn divergence.
pub fn entropic_ot<T: Scalar>(mu: &Gaussian<T>, nu: &Gaussian<T>, eps: Epsilon<T>) -> Result<T> {
    check_dims(mu.dim(), nu.dim())?;
    let means = norm_sq(&vec_sub(mu.mean(), nu.mean()));
    let half_eps = eps.eps() * T::lit(0.5);
    let constant = T::from_count(mu.dim()) * half_eps * (T::one() - eps.eps().ln());
    Ok(means + b_eps(mu.cov(), nu.cov(), eps)? + constant)
}

/// Schrödinger potentials `(f, g)` between `μ` and `ν`, defined up to the
/// gauge `(f + c, g − c)`.
///
/// `f` has quadratic part `F_Σ^Γ` centred at `m` and linear part `2(m − n)`;
/// `g` has `F_Γ^Σ` centred at `n`, linear part `2(n − m)` and constant
/// `−‖m − n‖²`.
pub fn potentials<T: Scalar>(
    mu: &Gaussian<T>,
    nu: &Gaussian<T>,
    eps: Epsilon<T>,
) -> Result<(QuadraticPotential<T>, QuadraticPotential<T>)> {
    check_dims(mu.dim(), nu.dim())?;
    let two = T::lit(2.0);
    let diff = vec_sub(mu.mean(), nu.mean());
    let f = QuadraticPotential {
        quad: f_matrix(mu.cov(), nu.cov(), eps)?,
        center: mu.mean().to_vec(),
        lin: diff.iter().map(|&x| two * x).collect(),
        constant: T::zero(),
    };
    let g = QuadraticPotential {
        quad: f_matrix(nu.cov(), mu.cov(), eps)?,
        center: nu.mean().to_vec(),
        lin: diff.iter().map(|&x| -two * x).collect(),
        constant: -norm_sq(&diff),
    };
    Ok((f, g))
}

/// Gradient of the first variation of `S_ε(·, target)` at `μ`:
/// `x ↦ G_Σ^{Σ⋆}(x − m) + 2(m − m⋆)`.
pub fn gradient_field<T: Scalar>(
    mu: &Gaussian<T>,
    target: &Gaussian<T>,
    eps: Epsilon<T>,
) -> Result<AffineField<T>> {
    check_dims(mu.dim(), target.dim())?;
    let two = T::lit(2.0);
    Ok(AffineField {
        gain: g_matrix(mu.cov(), target.cov(), eps)?,
        offset: vec_sub(mu.mean(), target.mean())
            .into_iter()
            .map(|x| two * x)
            .collect(),
        center: mu.mean().to_vec(),
    })
}

/// 2-Wasserstein (Bures–Wasserstein) distance between Gaussians.
pub fn w2_gaussian<T: Scalar>(mu: &Gaussian<T>, nu: &Gaussian<T>) -> Result<T> {
    check_dims(mu.dim(), nu.dim())?;
    let means = norm_sq(&vec_sub(mu.mean(), nu.mean()));
    if mu.cov() == nu.cov() {
        return Ok(means.sqrt());
    }
    let sh = psd_sqrt(mu.cov(), T::lit(DEFAULT_PSD_TOL))?;
    check_psd(nu.cov())?;
    let cross: T = sym_eig(&sh.sandwich(nu.cov()))?
        .clamped_eigenvalues()
        .into_iter()
        .map(|a| a.sqrt())
        .sum();
    let sq = means + mu.cov().trace() + nu.cov().trace() - T::lit(2.0) * cross;
    Ok(sq.max(T::zero()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symlin::Matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn eps(e: f64) -> Epsilon<f64> {
        Epsilon::new(e).unwrap()
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> SymMat<f64> {
        let a = Matrix::from_fn(n, rank, |_, _| rng.gen_range(-1.5..1.5));
        SymMat::new(&a * &a.transpose()).unwrap()
    }

    fn scalar(x: f64) -> SymMat<f64> {
        SymMat::from_diag(&[x])
    }

    #[test]
    fn epsilon_validation() {
        assert_eq!(eps(2.0).eps_tilde(), 0.5);
        assert!(Epsilon::new(0.0f64).is_err());
        assert!(Epsilon::new(-1.0f64).is_err());
        assert!(Epsilon::new(f64::INFINITY).is_err());
    }

    #[test]
    fn gaussian_validation() {
        assert!(matches!(
            Gaussian::new(vec![0.0], SymMat::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Gaussian::new(vec![0.0, 0.0], SymMat::from_diag(&[1.0, -0.5])),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn f_matrix_examples() {
        let e = eps(0.8);
        let sigma = SymMat::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let f = f_matrix(&sigma, &SymMat::zeros(2), e).unwrap();
        assert_eq!(f, SymMat::identity(2));

        let lstar = 1.7;
        let f = f_matrix(&scalar(0.0), &scalar(lstar), e).unwrap();
        assert!((f[(0, 0)] - (1.0 - lstar / (2.0 * e.eps_tilde()))).abs() < 1e-14);
    }

    #[test]
    fn g_matrix_examples() {
        let e = eps(0.8);
        let sigma = SymMat::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        assert!(g_matrix(&sigma, &sigma, e).unwrap().is_zero());

        let lstar = 1.7;
        let g = g_matrix(&scalar(0.0), &scalar(lstar), e).unwrap();
        assert!((g[(0, 0)] + lstar / e.eps_tilde()).abs() < 1e-13);
    }

    #[test]
    fn g_matches_definition_through_f() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let n = rng.gen_range(1..=5);
            let s = { let r = rng.gen_range(0..=n); random_psd(&mut rng, n, r) };
            let t = { let r = rng.gen_range(0..=n); random_psd(&mut rng, n, r) };
            let e = eps(rng.gen_range(0.1..5.0));
            let g = g_matrix(&s, &t, e).unwrap();
            let def = f_matrix(&s, &t, e)
                .unwrap()
                .sub(&f_matrix(&s, &s, e).unwrap())
                .scale(2.0);
            assert!(g.sub(&def).frobenius_norm() < 1e-9 * (1.0 + g.frobenius_norm()));
        }
    }

    #[test]
    fn spectral_bounds_of_f_and_g() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let n = rng.gen_range(1..=6);
            let s = { let r = rng.gen_range(0..=n); random_psd(&mut rng, n, r) };
            let t = { let r = rng.gen_range(0..=n); random_psd(&mut rng, n, r) };
            let e = eps([0.1, 1.0, 10.0][rng.gen_range(0..3)]);
            let lmax = sym_eig(&t).unwrap().lambda_max().max(0.0);
            let fe = sym_eig(&f_matrix(&s, &t, e).unwrap()).unwrap();
            assert!(fe.lambda_max() <= 1.0 + 1e-10);
            assert!(fe.lambda_min() >= 1.0 - lmax / (2.0 * e.eps_tilde()) - 1e-10);
            let fs = sym_eig(&f_matrix(&s, &s, e).unwrap()).unwrap();
            assert!(fs.lambda_min() >= -1e-10 && fs.lambda_max() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn b_eps_examples() {
        let e = eps(0.7);
        let d = 3;
        let b = b_eps(&SymMat::zeros(d), &SymMat::zeros(d), e).unwrap();
        let expected = 0.35 * d as f64 * 0.7f64.ln() - d as f64 * 0.35;
        assert!((b - expected).abs() < 1e-14);

        let (s, g) = (0.9, 2.3);
        let root = (4.0f64 * s * g + 0.49 / 4.0).sqrt();
        let expected = s + g + 0.35 * (root + 0.35).ln() - root;
        assert!((b_eps(&scalar(s), &scalar(g), e).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn b_eps_symmetric_and_self_route_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let n = rng.gen_range(1..=6);
            let s = { let r = rng.gen_range(0..=n); random_psd(&mut rng, n, r) };
            let t = { let r = rng.gen_range(0..=n); random_psd(&mut rng, n, r) };
            let e = eps(rng.gen_range(0.1..5.0));
            let ab = b_eps(&s, &t, e).unwrap();
            let ba = b_eps(&t, &s, e).unwrap();
            assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab.abs()));
            let general = b_eps(&s, &s, e).unwrap();
            let own = b_eps_self(&s, e).unwrap();
            assert!((general - own).abs() <= 1e-9 * (1.0 + own.abs()));
        }
    }

    #[test]
    fn divergence_examples() {
        let e = eps(1.3);
        let cov = SymMat::from_rows(&[vec![1.0, 0.4], vec![0.4, 0.7]]).unwrap();
        let mu = Gaussian::new(vec![0.5, -1.0], cov.clone()).unwrap();
        assert_eq!(sinkhorn_divergence(&mu, &mu, e).unwrap(), 0.0);
        let nu = Gaussian::new(vec![1.5, 1.0], cov).unwrap();
        assert!((sinkhorn_divergence(&mu, &nu, e).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn divergence_symmetric_and_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..200 {
            let n = rng.gen_range(1..=6);
            let s = { let r = rng.gen_range(0..=n); random_psd(&mut rng, n, r) };
            let t = { let r = rng.gen_range(0..=n); random_psd(&mut rng, n, r) };
            let e = eps([0.1, 1.0, 10.0][rng.gen_range(0..3)]);
            let mu = Gaussian::centered(s.clone()).unwrap();
            let nu = Gaussian::centered(t.clone()).unwrap();
            let st = sinkhorn_divergence(&mu, &nu, e).unwrap();
            let ts = sinkhorn_divergence(&nu, &mu, e).unwrap();
            let scale = 1.0 + b_eps_self(&s, e).unwrap().abs() + b_eps_self(&t, e).unwrap().abs();
            assert!(st >= -1e-9 * scale, "negative divergence {st}");
            assert!((st - ts).abs() <= 1e-8 * (1.0 + st.abs()));
        }
    }

    #[test]
    fn half_g_is_the_gradient_on_diagonals() {
        // Central differences of Σ ↦ 𝓑_ε(Σ, Γ) along diagonal directions.
        let e = eps(0.9);
        let sigma = [1.3, 0.4, 2.2];
        let gamma = SymMat::from_diag(&[0.7, 1.9, 0.05]);
        let g = g_matrix(&SymMat::from_diag(&sigma), &gamma, e).unwrap();
        for i in 0..3 {
            let h = 1e-5 * sigma[i];
            let mut plus = sigma;
            plus[i] += h;
            let mut minus = sigma;
            minus[i] -= h;
            let fd = (covariance_divergence(&SymMat::from_diag(&plus), &gamma, e).unwrap()
                - covariance_divergence(&SymMat::from_diag(&minus), &gamma, e).unwrap())
                / (2.0 * h);
            let half_g = 0.5 * g[(i, i)];
            assert!((fd - half_g).abs() <= 1e-4 * half_g.abs().max(1e-3), "axis {i}: {fd} vs {half_g}");
        }
    }

    #[test]
    fn continuity_at_singular_covariance() {
        let e = eps(0.6);
        let gamma = SymMat::from_rows(&[vec![1.2, 0.5], vec![0.5, 0.9]]).unwrap();
        let at = |d: f64| SymMat::from_diag(&[d, 1.1]);
        let f0 = f_matrix(&at(0.0), &gamma, e).unwrap();
        let g0 = g_matrix(&at(0.0), &gamma, e).unwrap();
        // J is Lipschitz with constant 1/(8ε̃³), so both maps are too.
        let et = e.eps_tilde();
        let lip = 2.0 * (1.0 + 2.0 * 1.6 * 1.6) / (8.0 * et.powi(3));
        for delta in [1e-4, 1e-6, 1e-8] {
            let df = f_matrix(&at(delta), &gamma, e).unwrap().sub(&f0).frobenius_norm();
            let dg = g_matrix(&at(delta), &gamma, e).unwrap().sub(&g0).frobenius_norm();
            assert!(df <= lip * delta, "F jump {df} at {delta}");
            assert!(dg <= lip * delta, "G jump {dg} at {delta}");
        }
    }

    #[test]
    fn potentials_examples() {
        let e = eps(0.5);
        let cov = SymMat::from_rows(&[vec![1.0, 0.2], vec![0.2, 0.5]]).unwrap();
        let mu = Gaussian::centered(cov.clone()).unwrap();
        let (f, g) = potentials(&mu, &mu, e).unwrap();
        assert_eq!(f, g);
        assert_eq!(f.quad, f_matrix(&cov, &cov, e).unwrap());
        assert_eq!(f.lin, vec![0.0, 0.0]);

        let a = Gaussian::dirac(vec![1.0, 2.0]).unwrap();
        let b = Gaussian::dirac(vec![-1.0, 0.5]).unwrap();
        let (f, _) = potentials(&a, &b, e).unwrap();
        assert_eq!(f.quad, SymMat::identity(2));
        let x = [0.3, -0.7];
        // Quadratic part is the identity at the Dirac; the rest is affine.
        let affine = 2.0 * (2.0 * 0.3 + 1.5 * -0.7);
        let quad = (0.3f64 - 1.0).powi(2) + (-0.7f64 - 2.0).powi(2);
        assert!((f.evaluate(&x) - quad - affine).abs() < 1e-14);
    }

    #[test]
    fn potential_expectations_closed_form() {
        let e = eps(0.5);
        let mu = Gaussian::new(
            vec![0.3, -0.2],
            SymMat::from_rows(&[vec![1.0, 0.2], vec![0.2, 0.5]]).unwrap(),
        )
        .unwrap();
        let nu = Gaussian::new(vec![1.0, 0.4], SymMat::from_diag(&[0.8, 1.5])).unwrap();
        let (f, g) = potentials(&mu, &nu, e).unwrap();
        let fs = f_matrix(mu.cov(), nu.cov(), e).unwrap();
        let fg = f_matrix(nu.cov(), mu.cov(), e).unwrap();
        let tr = (fs.as_matrix() * mu.cov().as_matrix()).trace()
            + (fg.as_matrix() * nu.cov().as_matrix()).trace();
        let dm = norm_sq(&vec_sub(mu.mean(), nu.mean()));
        let total = f.expectation(&mu) + g.expectation(&nu);
        assert!((total - (tr + dm)).abs() < 1e-13);
    }

    #[test]
    fn gradient_field_examples() {
        let e = eps(0.5);
        let cov = SymMat::from_rows(&[vec![1.0, 0.2], vec![0.2, 0.5]]).unwrap();
        let mu = Gaussian::new(vec![1.0, 1.0], cov.clone()).unwrap();
        let field = gradient_field(&mu, &mu, e).unwrap();
        assert_eq!(field.evaluate(&[3.0, -2.0]), vec![0.0, 0.0]);

        let target = Gaussian::new(vec![0.0, 0.5], cov).unwrap();
        let field = gradient_field(&mu, &target, e).unwrap();
        assert_eq!(field.evaluate(&[3.0, -2.0]), vec![2.0, 1.0]);

        let lstar = 0.8;
        let mu = Gaussian::new(vec![0.4], scalar(0.0)).unwrap();
        let target = Gaussian::new(vec![0.4], scalar(lstar)).unwrap();
        let field = gradient_field(&mu, &target, e).unwrap();
        let v = field.evaluate(&[1.4])[0];
        assert!((v + lstar / e.eps_tilde()).abs() < 1e-13);
    }

    #[test]
    fn w2_examples() {
        let cov = SymMat::from_rows(&[vec![1.0, 0.2], vec![0.2, 0.5]]).unwrap();
        let mu = Gaussian::new(vec![1.0, 0.0], cov).unwrap();
        assert_eq!(w2_gaussian(&mu, &mu).unwrap(), 0.0);

        let a = Gaussian::dirac(vec![0.0, 0.0]).unwrap();
        let b = Gaussian::dirac(vec![3.0, 4.0]).unwrap();
        assert!((w2_gaussian(&a, &b).unwrap() - 5.0f64).abs() < 1e-14);

        let l = [2.0, 0.5, 0.0];
        let g = [1.0, 0.3, 4.0];
        let a = Gaussian::new(vec![0.0, 1.0, 0.0], SymMat::from_diag(&l)).unwrap();
        let b = Gaussian::new(vec![1.0, 0.0, 0.0], SymMat::from_diag(&g)).unwrap();
        let expected = (l
            .iter()
            .zip(&g)
            .map(|(x, y): (&f64, &f64)| (x.sqrt() - y.sqrt()).powi(2))
            .sum::<f64>()
            + 2.0)
            .sqrt();
        assert!((w2_gaussian(&a, &b).unwrap() - expected).abs() < 1e-12);
        assert!((w2_gaussian(&b, &a).unwrap() - expected).abs() < 1e-12);
    }
}
