//! Log-domain Sinkhorn on small grids, used to cross-check the closed forms.

use crate::error::{Error, Result};
use crate::gaussian_eot::{Epsilon, Gaussian};
use crate::scalar::Scalar;
use crate::symlin::{sym_eig, Matrix};

/// Grids are tensor products, so anything past the plane is out of reach.
pub const MAX_ORACLE_DIM: usize = 2;
pub const DEFAULT_RADIUS_SIGMAS: f64 = 8.0;

/// Weighted point cloud. `points` is `n × d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<T> {
    points: Matrix<T>,
    weights: Vec<T>,
}

impl<T: Scalar> DiscreteMeasure<T> {
    /// Weights must be nonnegative with unit sum up to `1e-12`.
    pub fn new(points: Matrix<T>, weights: Vec<T>) -> Result<Self> {
        if points.nrows() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.nrows(),
                found: weights.len(),
            });
        }
        if weights.is_empty() {
            return Err(Error::InvalidInput("empty measure".into()));
        }
        if !points.is_finite() || weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::from_count(weights.len())) {
            return Err(Error::InvalidInput(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { points, weights })
    }

    pub fn dirac(location: &[T]) -> Result<Self> {
        Self::new(Matrix::from_rows(&[location.to_vec()])?, vec![T::one()])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Matrix<T> {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[T] {
        self.points.row(i)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

/// Regular grid over `mean ± radius_sigmas·√λ_i` along each eigenaxis of the
/// covariance, weighted by the Gaussian density and renormalized. Axes with
/// (numerically) zero variance collapse to the mean.
pub fn discretize_gaussian<T: Scalar>(g: &Gaussian<T>, n_per_axis: usize, radius_sigmas: T) -> Result<DiscreteMeasure<T>> {
    let d = g.dim();
    if d > MAX_ORACLE_DIM {
        return Err(Error::DimensionTooLarge { dim: d, max: MAX_ORACLE_DIM });
    }
    if n_per_axis < 2 {
        return Err(Error::InvalidInput(format!("n_per_axis must be at least 2, got {n_per_axis}")));
    }
    if !(radius_sigmas > T::zero()) || !radius_sigmas.is_finite() {
        return Err(Error::InvalidInput(format!("radius_sigmas must be positive, got {radius_sigmas}")));
    }
    let eig = sym_eig(g.cov())?;
    let floor = T::lit(1e-12) * eig.spectral_radius();
    // Per eigenaxis: node offsets (in that axis) and their log-density.
    let axes: Vec<Vec<(T, T)>> = eig
        .eigenvalues
        .iter()
        .map(|&lam| {
            if lam <= floor || lam <= T::zero() {
                return vec![(T::zero(), T::zero())];
            }
            let sd = lam.sqrt();
            let half = radius_sigmas * sd;
            let step = (half + half) / T::from_count(n_per_axis - 1);
            (0..n_per_axis)
                .map(|k| {
                    let z = -half + step * T::from_count(k);
                    (z, -z * z / (lam + lam))
                })
                .collect()
        })
        .collect();

    let total: usize = axes.iter().map(Vec::len).product();
    let mut coords = Vec::with_capacity(total * d);
    let mut logw = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let mut lw = T::zero();
        for (r, &mean_r) in g.mean().iter().enumerate() {
            let mut x = mean_r;
            for (a, axis) in axes.iter().enumerate() {
                x = x + eig.basis[(r, a)] * axis[idx[a]].0;
            }
            coords.push(x);
        }
        for (a, axis) in axes.iter().enumerate() {
            lw = lw + axis[idx[a]].1;
        }
        logw.push(lw);
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < axes[a].len() {
                break;
            }
            idx[a] = 0;
        }
    }
    let top = logw.iter().copied().fold(T::neg_infinity(), T::max);
    let mut weights: Vec<T> = logw.iter().map(|&l| (l - top).exp()).collect();
    let norm: T = weights.iter().copied().sum();
    for w in &mut weights {
        *w = *w / norm;
    }
    let points = if d == 0 {
        Matrix::zeros(total, 0)
    } else {
        Matrix::from_fn(total, d, |i, j| coords[i * d + j])
    };
    DiscreteMeasure::new(points, weights)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SinkhornResult<T> {
    pub ot_eps: T,
    /// Potential on the support of the first measure.
    pub f: Vec<T>,
    /// Potential on the support of the second measure.
    pub g: Vec<T>,
    pub iterations: usize,
    /// Sup-norm change of the potentials over the last iteration.
    pub residual: T,
}

fn sq_dist<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum()
}

/// `out_j = −ε log Σ_i w_i exp((h_i − ‖x_i − y_j‖²)/ε)`, evaluated stably.
/// `cost[j*n + i]` holds `‖x_i − y_j‖²`.
fn soft_min<T: Scalar>(h: &[T], log_w: &[T], cost: &[T], eps: T, out: &mut [T]) {
    let n = h.len();
    let mut terms = vec![T::zero(); n];
    for (j, o) in out.iter_mut().enumerate() {
        let row = &cost[j * n..(j + 1) * n];
        let mut top = T::neg_infinity();
        for i in 0..n {
            terms[i] = (h[i] - row[i]) / eps + log_w[i];
            top = top.max(terms[i]);
        }
        let s: T = terms.iter().map(|&t| (t - top).exp()).sum();
        *o = -eps * (top + s.ln());
    }
}

fn log_weights<T: Scalar>(w: &[T]) -> Vec<T> {
    w.iter()
        .map(|&x| if x > T::zero() { x.ln() } else { T::neg_infinity() })
        .collect()
}

/// Entropic OT with squared Euclidean cost by alternating
/// `f ← T_ε(g, b)`, `g ← T_ε(f, a)` in the log domain.
///
/// On `NotConverged` the error carries the residual after `max_iter` sweeps.
pub fn sinkhorn_ot<T: Scalar>(
    a: &DiscreteMeasure<T>,
    b: &DiscreteMeasure<T>,
    eps: Epsilon<T>,
    max_iter: usize,
    threshold: T,
) -> Result<SinkhornResult<T>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if max_iter == 0 {
        return Err(Error::InvalidInput("max_iter must be at least 1".into()));
    }
    let (n, m) = (a.len(), b.len());
    let e = eps.eps();
    // cost_ab[i*m + j] = ‖x_i − y_j‖²; the transpose serves the g update.
    let mut cost_ab = vec![T::zero(); n * m];
    let mut cost_ba = vec![T::zero(); n * m];
    for i in 0..n {
        for j in 0..m {
            let c = sq_dist(a.point(i), b.point(j));
            cost_ab[i * m + j] = c;
            cost_ba[j * n + i] = c;
        }
    }
    let (log_a, log_b) = (log_weights(a.weights()), log_weights(b.weights()));
    let mut f = vec![T::zero(); n];
    let mut g = vec![T::zero(); m];
    let mut f_new = vec![T::zero(); n];
    let mut g_new = vec![T::zero(); m];
    let mut residual = T::infinity();
    for it in 1..=max_iter {
        soft_min(&g, &log_b, &cost_ab, e, &mut f_new);
        soft_min(&f_new, &log_a, &cost_ba, e, &mut g_new);
        let df = f.iter().zip(&f_new).map(|(&x, &y)| (x - y).abs()).fold(T::zero(), T::max);
        let dg = g.iter().zip(&g_new).map(|(&x, &y)| (x - y).abs()).fold(T::zero(), T::max);
        residual = df.max(dg);
        std::mem::swap(&mut f, &mut f_new);
        std::mem::swap(&mut g, &mut g_new);
        if !residual.is_finite() {
            break;
        }
        if residual <= threshold {
            let ot_eps = dot_weights(&f, a.weights()) + dot_weights(&g, b.weights());
            return Ok(SinkhornResult {
                ot_eps,
                f,
                g,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: residual.to_f64().unwrap_or(f64::NAN),
    })
}

fn dot_weights<T: Scalar>(v: &[T], w: &[T]) -> T {
    v.iter().zip(w).map(|(&x, &y)| x * y).sum()
}

/// `OT_ε(a, b) − ½OT_ε(a, a) − ½OT_ε(b, b)` from three Sinkhorn solves.
pub fn sinkhorn_divergence_discrete<T: Scalar>(
    a: &DiscreteMeasure<T>,
    b: &DiscreteMeasure<T>,
    eps: Epsilon<T>,
    max_iter: usize,
    threshold: T,
) -> Result<T> {
    let half = T::lit(0.5);
    let ab = sinkhorn_ot(a, b, eps, max_iter, threshold)?.ot_eps;
    let aa = sinkhorn_ot(a, a, eps, max_iter, threshold)?.ot_eps;
    let bb = sinkhorn_ot(b, b, eps, max_iter, threshold)?.ot_eps;
    Ok(ab - half * aa - half * bb)
}
