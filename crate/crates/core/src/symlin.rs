//! Dense symmetric-matrix primitives: storage, Jacobi eigendecomposition,
//! PSD square roots and the `J` resolvent used by every closed form.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative tolerance below which negative eigenvalues are treated as rounding
/// noise and clamped to zero.
pub const DEFAULT_PSD_TOL: f64 = 1e-10;

const MAX_JACOBI_SWEEPS: usize = 100;

/// Dense row-major real matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { T::zero() })
    }

    /// Builds a matrix from row vectors; all rows must have the same length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    expected: ncols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn trace(&self) -> T {
        self.diagonal().into_iter().sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetric_part(&self) -> Self {
        assert!(self.is_square(), "symmetric part of a non-square matrix");
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)]) * half
        })
    }

    fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] = out.data[i * rhs.cols + j] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "elementwise dimension mismatch"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<'a, T: Scalar> Mul<&'a Matrix<T>> for &'a Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: &'a Matrix<T>) -> Matrix<T> {
        self.matmul(rhs)
    }
}

impl<'a, T: Scalar> Add<&'a Matrix<T>> for &'a Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: &'a Matrix<T>) -> Matrix<T> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<'a, T: Scalar> Sub<&'a Matrix<T>> for &'a Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: &'a Matrix<T>) -> Matrix<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols = self.cols.max(1);
        f.debug_list().entries(self.data.chunks(cols)).finish()
    }
}

/// Real symmetric matrix. Symmetry is exact: construction averages the
/// input with its transpose.
#[derive(Clone, PartialEq)]
pub struct SymMat<T>(Matrix<T>);

impl<T: Scalar> SymMat<T> {
    /// Symmetrizes `m` as `(m + mᵀ)/2`. Rejects non-square, empty or
    /// non-finite input.
    pub fn new(m: Matrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        if !m.is_finite() {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Self(m.symmetric_part()))
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Symmetric part of a mathematically symmetric product, skipping checks.
    pub(crate) fn from_symmetric_product(m: Matrix<T>) -> Self {
        debug_assert!(m.is_square());
        Self(m.symmetric_part())
    }

    pub fn zeros(n: usize) -> Self {
        Self(Matrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    pub fn from_diag(diag: &[T]) -> Self {
        Self(Matrix::from_diag(diag))
    }

    /// `P diag(values) Pᵀ` for an orthonormal `P` whose columns are eigenvectors.
    pub fn from_spectrum(basis: &Matrix<T>, values: &[T]) -> Self {
        let n = basis.nrows();
        assert_eq!(values.len(), basis.ncols(), "spectrum length mismatch");
        let mut out = Matrix::zeros(n, n);
        for (k, &v) in values.iter().enumerate() {
            if v == T::zero() {
                continue;
            }
            for i in 0..n {
                let pik = basis[(i, k)] * v;
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + pik * basis[(j, k)];
                }
            }
        }
        Self(out.symmetric_part())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.0
    }

    pub fn trace(&self) -> T {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> T {
        self.0.frobenius_norm()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.0.to_rows()
    }

    pub fn is_zero(&self) -> bool {
        self.0.as_slice().iter().all(|&x| x == T::zero())
    }

    pub fn scale(&self, s: T) -> Self {
        Self(self.0.scale(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    /// `A·self·Aᵀ`, symmetrized.
    pub fn congruence(&self, a: &Matrix<T>) -> Self {
        Self::from_symmetric_product(&(a * &self.0) * &a.transpose())
    }

    /// `self·m·self`, symmetrized.
    pub fn sandwich(&self, m: &SymMat<T>) -> Self {
        Self::from_symmetric_product(&(&self.0 * &m.0) * &self.0)
    }

    /// `self + s·I`.
    pub fn shift(&self, s: T) -> Self {
        let mut m = self.0.clone();
        for i in 0..self.dim() {
            m[(i, i)] = m[(i, i)] + s;
        }
        Self(m)
    }

    /// `‖self·other − other·self‖_F`.
    pub fn commutator_norm(&self, other: &Self) -> T {
        let ab = &self.0 * &other.0;
        let ba = &other.0 * &self.0;
        (&ab - &ba).frobenius_norm()
    }
}

impl<T> Index<(usize, usize)> for SymMat<T> {
    type Output = T;

    #[inline]
    fn index(&self, idx: (usize, usize)) -> &T {
        &self.0[idx]
    }
}

impl<T: fmt::Debug> fmt::Debug for SymMat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Orthonormal eigenbasis (columns of `basis`) with eigenvalues sorted descending.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomp<T> {
    pub basis: Matrix<T>,
    pub eigenvalues: Vec<T>,
}

impl<T: Scalar> SpectralDecomp<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_max(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn lambda_min(&self) -> T {
        self.eigenvalues[self.dim() - 1]
    }

    /// Largest eigenvalue magnitude; the scale for relative PSD tolerances.
    pub fn spectral_radius(&self) -> T {
        self.lambda_max().abs().max(self.lambda_min().abs())
    }

    pub fn reconstruct(&self) -> SymMat<T> {
        SymMat::from_spectrum(&self.basis, &self.eigenvalues)
    }

    /// `P diag(f(λ_i)) Pᵀ`.
    pub fn map(&self, f: impl Fn(T) -> T) -> SymMat<T> {
        let values: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        SymMat::from_spectrum(&self.basis, &values)
    }

    /// Fails with `NotPsd` if some eigenvalue is below `-tol·ρ`, `ρ` the
    /// spectral radius.
    pub fn check_near_psd(&self, tol: T) -> Result<()> {
        let floor = -tol * self.spectral_radius();
        match self.eigenvalues.iter().find(|&&l| l < floor) {
            Some(&l) => Err(Error::NotPsd {
                eigenvalue: l.to_f64().unwrap_or(f64::NAN),
                tol: (-floor).to_f64().unwrap_or(f64::NAN),
            }),
            None => Ok(()),
        }
    }

    /// Eigenvalues with the negative rounding noise set to zero.
    pub fn clamped_eigenvalues(&self) -> Vec<T> {
        self.eigenvalues.iter().map(|&l| l.max(T::zero())).collect()
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Output is deterministic: eigenvalues descending (stable among ties) and
/// every eigenvector's first nonzero component made positive.
pub fn sym_eig<T: Scalar>(s: &SymMat<T>) -> Result<SpectralDecomp<T>> {
    let n = s.dim();
    let mut a = s.as_matrix().clone();
    if !a.is_finite() {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();
    let target = T::epsilon() * scale;

    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: T = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)] * a[(p, q)])
            .sum::<T>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (apq + apq);
                let t = if theta >= T::zero() {
                    T::one() / (theta + theta.hypot(T::one()))
                } else {
                    -T::one() / (-theta + theta.hypot(T::one()))
                };
                let c = T::one() / t.hypot(T::one());
                let sn = t * c;
                a[(p, p)] = a[(p, p)] - t * apq;
                a[(q, q)] = a[(q, q)] + t * apq;
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        let new_rp = c * arp - sn * arq;
                        let new_rq = sn * arp + c * arq;
                        a[(r, p)] = new_rp;
                        a[(p, r)] = new_rp;
                        a[(r, q)] = new_rq;
                        a[(q, r)] = new_rq;
                    }
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - sn * vrq;
                    v[(r, q)] = sn * vrp + c * vrq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .partial_cmp(&a[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues = order.iter().map(|&k| a[(k, k)]).collect();
    let mut basis = Matrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let flip = (0..n)
            .map(|i| v[(i, k)])
            .find(|&x| x != T::zero())
            .is_some_and(|x| x < T::zero());
        for i in 0..n {
            basis[(i, col)] = if flip { -v[(i, k)] } else { v[(i, k)] };
        }
    }
    Ok(SpectralDecomp { basis, eigenvalues })
}

/// Nearest PSD matrix in the eigenvalue-clamping sense. Fails if some
/// eigenvalue lies below `-tol·ρ(S)`.
pub fn psd_project<T: Scalar>(s: &SymMat<T>, tol: T) -> Result<SymMat<T>> {
    let eig = sym_eig(s)?;
    eig.check_near_psd(tol)?;
    Ok(eig.map(|l| l.max(T::zero())))
}

/// Principal square root of a near-PSD matrix.
pub fn psd_sqrt<T: Scalar>(s: &SymMat<T>, tol: T) -> Result<SymMat<T>> {
    let eig = sym_eig(s)?;
    eig.check_near_psd(tol)?;
    Ok(eig.map(|l| l.max(T::zero()).sqrt()))
}

/// Scalar resolvent `1/(√(α+ε̃²)+ε̃)`, evaluated on the clamped `α ≥ 0`.
#[inline]
pub fn j_scalar<T: Scalar>(alpha: T, eps_tilde: T) -> T {
    let alpha = alpha.max(T::zero());
    T::one() / ((alpha + eps_tilde * eps_tilde).sqrt() + eps_tilde)
}

/// `J(X) = ((X + ε̃²I)^{1/2} + ε̃I)^{-1}` for near-PSD `X`.
///
/// Eigenvalues of the result lie in `(0, 1/(2ε̃)]`.
pub fn j_operator<T: Scalar>(x: &SymMat<T>, eps_tilde: T) -> Result<SymMat<T>> {
    if !(eps_tilde > T::zero()) {
        return Err(Error::InvalidInput("eps_tilde must be positive".into()));
    }
    let eig = sym_eig(x)?;
    eig.check_near_psd(T::lit(DEFAULT_PSD_TOL))?;
    Ok(eig.map(|a| j_scalar(a, eps_tilde)))
}

/// Basis `P` with the diagonals of `PᵀAP` and `PᵀBP`.
pub type JointBasis<T> = (Matrix<T>, Vec<T>, Vec<T>);

/// Common eigenbasis of two commuting symmetric matrices.
///
/// Returns the basis together with the diagonals of `PᵀAP` and `PᵀBP`, or
/// `None` when `‖AB − BA‖_F > tol·(1 + ‖A‖_F‖B‖_F)`.
pub fn joint_diagonalize<T: Scalar>(
    a: &SymMat<T>,
    b: &SymMat<T>,
    tol: T,
) -> Result<Option<JointBasis<T>>> {
    check_dims(a.dim(), b.dim())?;
    let (na, nb) = (a.frobenius_norm(), b.frobenius_norm());
    if a.commutator_norm(b) > tol * (T::one() + na * nb) {
        return Ok(None);
    }
    // A generic combination separates the eigenspaces of both matrices.
    let weight = T::SQRT_2() * (T::one() + na) / (T::one() + nb) * T::lit(0.618_033_988_749_894_9);
    let eig = sym_eig(&a.add(&b.scale(weight)))?;
    let p = eig.basis;
    let pt = p.transpose();
    let da = (&(&pt * a.as_matrix()) * &p).diagonal();
    let db = (&(&pt * b.as_matrix()) * &p).diagonal();
    Ok(Some((p, da, db)))
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn vec_sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn norm_sq<T: Scalar>(a: &[T]) -> T {
    dot(a, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMat<f64> {
        SymMat::new(Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))).unwrap()
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> SymMat<f64> {
        let a = Matrix::from_fn(n, rank, |_, _| rng.gen_range(-1.0..1.0));
        SymMat::new(&a * &a.transpose()).unwrap()
    }

    #[test]
    fn construction_symmetrizes() {
        let s = SymMat::from_rows(&[vec![1.0, 2.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(s[(0, 1)], 1.0);
        assert_eq!(s[(1, 0)], 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            SymMat::from_rows(&[vec![1.0, f64::NAN], vec![0.0, 1.0]]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            SymMat::<f64>::new(Matrix::zeros(2, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let e = sym_eig(&SymMat::<f64>::identity(2)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);

        let e = sym_eig(&SymMat::from_diag(&[1.0, 3.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0]);
        assert_eq!(e.basis.column(0), vec![0.0, 1.0]);
        assert_eq!(e.basis.column(1), vec![1.0, 0.0]);
    }

    #[test]
    fn eig_round_trip_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=12 {
            let s = random_sym(&mut rng, n);
            let e = sym_eig(&s).unwrap();
            let ptp = &e.basis.transpose() * &e.basis;
            let orth = (&ptp - &Matrix::identity(n)).frobenius_norm();
            assert!(orth <= 1e-10 * n as f64, "orthonormality {orth}");
            let rec = e.reconstruct().sub(&s).frobenius_norm();
            assert!(rec <= 1e-9 * (1.0 + s.frobenius_norm()), "reconstruction {rec}");
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            for k in 0..n {
                let first = e.basis.column(k).into_iter().find(|&x| x != 0.0).unwrap();
                assert!(first > 0.0);
            }
        }
    }

    #[test]
    fn eig_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = random_sym(&mut rng, 6);
        assert_eq!(sym_eig(&s).unwrap(), sym_eig(&s).unwrap());
    }

    #[test]
    fn eig_handles_large_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_psd(&mut rng, 40, 40);
        let e = sym_eig(&s).unwrap();
        let rec = e.reconstruct().sub(&s).frobenius_norm();
        assert!(rec <= 1e-9 * (1.0 + s.frobenius_norm()));
    }

    #[test]
    fn sqrt_examples() {
        let tol = DEFAULT_PSD_TOL;
        assert_eq!(
            psd_sqrt(&SymMat::<f64>::identity(3), tol).unwrap(),
            SymMat::identity(3)
        );
        assert_eq!(
            psd_sqrt(&SymMat::from_diag(&[4.0, 0.0]), tol).unwrap(),
            SymMat::from_diag(&[2.0, 0.0])
        );
        assert_eq!(
            psd_sqrt(&SymMat::from_diag(&[4.0, -1e-14]), tol).unwrap(),
            SymMat::from_diag(&[2.0, 0.0])
        );
        assert!(matches!(
            psd_sqrt(&SymMat::from_diag(&[4.0, -1e-3]), tol),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn sqrt_squares_to_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=8 {
            for rank in 0..=n {
                let s = random_psd(&mut rng, n, rank);
                let r = psd_sqrt(&s, DEFAULT_PSD_TOL).unwrap();
                let sq = SymMat::from_symmetric_product(r.as_matrix() * r.as_matrix());
                let proj = psd_project(&s, DEFAULT_PSD_TOL).unwrap();
                let err = sq.sub(&proj).frobenius_norm();
                assert!(err <= 1e-8 * (1.0 + proj.frobenius_norm()), "n={n} rank={rank} err={err}");
            }
        }
    }

    #[test]
    fn j_operator_examples() {
        let et = 0.3;
        let j = j_operator(&SymMat::<f64>::zeros(3), et).unwrap();
        let expected = SymMat::identity(3).scale(1.0 / (2.0 * et));
        assert!(j.sub(&expected).frobenius_norm() < 1e-15);

        let j = j_operator(&SymMat::from_diag(&[2.0, 0.5]), et).unwrap();
        assert!((j[(0, 0)] - 1.0 / ((2.0f64 + et * et).sqrt() + et)).abs() < 1e-15);
        assert!((j[(1, 1)] - 1.0 / ((0.5f64 + et * et).sqrt() + et)).abs() < 1e-15);
        assert!(j_operator(&SymMat::<f64>::zeros(2), 0.0).is_err());
    }

    #[test]
    fn j_operator_bounds_and_commutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let n = rng.gen_range(1..=6);
            let rank = rng.gen_range(0..=n);
            let x = random_psd(&mut rng, n, rank).scale(rng.gen_range(0.1..10.0));
            let et = rng.gen_range(0.01..3.0);
            let j = j_operator(&x, et).unwrap();
            let e = sym_eig(&j).unwrap();
            assert!(e.lambda_min() > 0.0);
            assert!(e.lambda_max() <= 1.0 / (2.0 * et) * (1.0 + 1e-12));
            let comm = j.commutator_norm(&x);
            assert!(comm <= 1e-9 * (1.0 + x.frobenius_norm()));
        }
    }

    #[test]
    fn generic_over_f32() {
        let s = SymMat::<f32>::from_diag(&[9.0, 4.0]);
        let r = psd_sqrt(&s, 1e-5).unwrap();
        assert!((r[(0, 0)] - 3.0).abs() < 1e-6);
        assert!((r[(1, 1)] - 2.0).abs() < 1e-6);
    }
}
