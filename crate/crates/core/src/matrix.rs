//! Dense complex matrices and Hermitian spectral primitives.
//!
//! Storage is dense and row-major; the problem sizes here are at most a few
//! hundred rows, so no sparsity or blocking is attempted. The eigensolver is
//! a cyclic complex Jacobi iteration, which is backward stable and keeps the
//! whole stack generic over the real scalar type.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use thiserror::Error;

use crate::scalar::{cre, Cx, RealScalar};

/// Relative tolerance accepted when checking Hermiticity.
pub fn hermiticity_tol<R: RealScalar>() -> R {
    R::of(1e-12)
}

/// Eigenvalue cutoff that defines the support of a positive matrix.
pub fn support_cutoff<R: RealScalar>() -> R {
    R::of(1e-12)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error(
        "matrix is not Hermitian: max |H_ij - conj(H_ji)| = {deviation} exceeds tolerance {tol}"
    )]
    NonHermitianInput { deviation: f64, tol: f64 },
    #[error("matrix exponential overflow: eigenvalue {lambda} exceeds 700; rescale the exponent")]
    Overflow { lambda: f64 },
    #[error("zero state: all eigenvalues at or below the support cutoff {cutoff}")]
    ZeroState { cutoff: f64 },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("length mismatch: left has {left}, right has {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid density matrix: {context}")]
    InvalidDensity { context: String },
    #[error("non-finite matrix entry encountered")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, MatrixError>;

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix<R: RealScalar> {
    dim: usize,
    data: Vec<Cx<R>>,
}

impl<R: RealScalar> fmt::Debug for ComplexMatrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| format!("{:+.4e}{:+.4e}i", self[(i, j)].re, self[(i, j)].im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl<R: RealScalar> Index<(usize, usize)> for ComplexMatrix<R> {
    type Output = Cx<R>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Cx<R> {
        &self.data[i * self.dim + j]
    }
}

impl<R: RealScalar> IndexMut<(usize, usize)> for ComplexMatrix<R> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<R> {
        &mut self.data[i * self.dim + j]
    }
}

impl<R: RealScalar> ComplexMatrix<R> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Cx::new(R::zero(), R::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = cre(R::one());
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Cx<R>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<Cx<R>>]) -> Result<Self> {
        let dim = rows.len();
        for r in rows {
            if r.len() != dim {
                return Err(MatrixError::DimensionMismatch {
                    context: format!("row of length {} in a {}-row matrix", r.len(), dim),
                });
            }
        }
        Ok(Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn diagonal(entries: &[Cx<R>]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn real_diagonal(entries: &[R]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = cre(e);
        }
        m
    }

    /// Rank-1 projector |v><v| / <v|v>.
    pub fn projector(v: &[Cx<R>]) -> Self {
        let n2: R = v.iter().map(|z| z.norm_sqr()).sum();
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj() / cre(n2))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_all_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(i, j)].conj())
    }

    pub fn trace(&self) -> Cx<R> {
        (0..self.dim)
            .map(|i| self[(i, i)])
            .fold(cre(R::zero()), |a, b| a + b)
    }

    pub fn scale(&self, s: Cx<R>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: R) -> Self {
        self.scale(cre(s))
    }

    /// Max-norm over entries.
    pub fn max_abs(&self) -> R {
        self.data.iter().map(|z| z.norm()).fold(R::zero(), R::max)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == R::zero() && a.im == R::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// y = M x
    pub fn apply(&self, x: &[Cx<R>]) -> Vec<Cx<R>> {
        assert_eq!(self.dim, x.len());
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self[(i, j)] * x[j])
                    .fold(cre(R::zero()), |a, b| a + b)
            })
            .collect()
    }

    /// <x| M |y>
    pub fn sandwich(&self, x: &[Cx<R>], y: &[Cx<R>]) -> Cx<R> {
        let my = self.apply(y);
        x.iter()
            .zip(my.iter())
            .map(|(a, b)| a.conj() * *b)
            .fold(cre(R::zero()), |a, b| a + b)
    }

    pub fn hermiticity_deviation(&self) -> R {
        let mut dev = R::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// (M + M†)/2
    pub fn symmetrize(&self) -> Self {
        let half = cre(R::of(0.5));
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half)
    }

    /// Standard Kronecker product; `dim = dim_A * dim_B`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (da, db) = (self.dim, rhs.dim);
        let mut out = Self::zeros(da * db);
        for ia in 0..da {
            for ja in 0..da {
                let a = self[(ia, ja)];
                for ib in 0..db {
                    for jb in 0..db {
                        out[(ia * db + ib, ja * db + jb)] = a * rhs[(ib, jb)];
                    }
                }
            }
        }
        out
    }
}

impl<R: RealScalar> Add for &ComplexMatrix<R> {
    type Output = ComplexMatrix<R>;
    fn add(self, rhs: Self) -> ComplexMatrix<R> {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

impl<R: RealScalar> Sub for &ComplexMatrix<R> {
    type Output = ComplexMatrix<R>;
    fn sub(self, rhs: Self) -> ComplexMatrix<R> {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }
}

impl<R: RealScalar> Mul for &ComplexMatrix<R> {
    type Output = ComplexMatrix<R>;
    fn mul(self, rhs: Self) -> ComplexMatrix<R> {
        self.matmul(rhs)
    }
}

/// Hermitian operator; construction symmetrizes within tolerance and rejects
/// anything further off.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianObservable<R: RealScalar> {
    matrix: ComplexMatrix<R>,
}

impl<R: RealScalar> HermitianObservable<R> {
    pub fn new(m: ComplexMatrix<R>) -> Result<Self> {
        if !m.is_all_finite() {
            return Err(MatrixError::NonFinite);
        }
        let scale = R::one().max(m.max_abs());
        let dev = m.hermiticity_deviation();
        let tol = hermiticity_tol::<R>() * scale;
        if dev > tol {
            return Err(MatrixError::NonHermitianInput {
                deviation: dev.to_f64().unwrap_or(f64::NAN),
                tol: tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            matrix: m.symmetrize(),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix<R> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn real_diagonal(entries: &[R]) -> Self {
        Self {
            matrix: ComplexMatrix::real_diagonal(entries),
        }
    }

    /// Tr(H ρ) for Hermitian H and ρ; real by construction.
    pub fn expectation(&self, rho: &ComplexMatrix<R>) -> R {
        let n = self.matrix.dim();
        assert_eq!(n, rho.dim());
        let mut acc = R::zero();
        for i in 0..n {
            for j in 0..n {
                acc += (self.matrix[(i, j)] * rho[(j, i)]).re;
            }
        }
        acc
    }
}

/// Unit-trace positive-semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<R: RealScalar> {
    matrix: ComplexMatrix<R>,
}

impl<R: RealScalar> DensityMatrix<R> {
    pub fn new(m: ComplexMatrix<R>) -> Result<Self> {
        if !m.is_all_finite() {
            return Err(MatrixError::InvalidDensity {
                context: "non-finite entry".into(),
            });
        }
        let h = HermitianObservable::new(m)?;
        let tr = h.matrix().trace().re;
        if (tr - R::one()).abs() > R::of(1e-10) {
            return Err(MatrixError::InvalidDensity {
                context: format!("trace {} deviates from 1", tr),
            });
        }
        let eig = hermitian_eig(&h);
        if eig.eigenvalues[0] < -R::of(1e-10) {
            return Err(MatrixError::InvalidDensity {
                context: format!("negative eigenvalue {}", eig.eigenvalues[0]),
            });
        }
        Ok(Self {
            matrix: h.matrix().clone(),
        })
    }

    /// Normalizes a PSD matrix by its trace.
    pub fn from_unnormalized(m: ComplexMatrix<R>) -> Result<Self> {
        let tr = m.trace().re;
        if tr <= R::zero() {
            return Err(MatrixError::InvalidDensity {
                context: "nonpositive trace".into(),
            });
        }
        Self::new(m.scale_re(R::one() / tr))
    }

    pub fn pure(v: &[Cx<R>]) -> Result<Self> {
        Self::new(ComplexMatrix::projector(v))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_re(R::one() / R::of_usize(dim)),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix<R> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn as_observable(&self) -> HermitianObservable<R> {
        HermitianObservable {
            matrix: self.matrix.clone(),
        }
    }
}

/// Result of diagonalizing a Hermitian matrix: H = U diag(λ) U†,
/// eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<R: RealScalar> {
    pub eigenvalues: Vec<R>,
    pub unitary: ComplexMatrix<R>,
}

impl<R: RealScalar> SpectralDecomposition<R> {
    /// Reassembles U f(Λ) U†.
    pub fn map_eigenvalues(&self, f: impl Fn(R) -> R) -> ComplexMatrix<R> {
        let n = self.unitary.dim();
        let mut out = ComplexMatrix::zeros(n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let flam = f(lam);
            if flam == R::zero() {
                continue;
            }
            for i in 0..n {
                let ui = self.unitary[(i, k)];
                for j in 0..n {
                    out[(i, j)] += ui * self.unitary[(j, k)].conj() * cre(flam);
                }
            }
        }
        out
    }

    /// k-th eigenvector (column of U).
    pub fn eigenvector(&self, k: usize) -> Vec<Cx<R>> {
        (0..self.unitary.dim())
            .map(|i| self.unitary[(i, k)])
            .collect()
    }
}

/// Diagonalizes a Hermitian matrix with a cyclic complex Jacobi iteration.
///
/// Eigenvalues come back ascending; exact ties are ordered by the
/// lexicographic order of the (phase-canonicalized) eigenvectors so repeated
/// runs are reproducible.
pub fn hermitian_eig<R: RealScalar>(h: &HermitianObservable<R>) -> SpectralDecomposition<R> {
    let n = h.dim();
    let mut a = h.matrix().clone();
    let mut u = ComplexMatrix::<R>::identity(n);
    if n == 0 {
        return SpectralDecomposition {
            eigenvalues: vec![],
            unitary: u,
        };
    }
    let scale = a.max_abs().max(R::min_positive_value());
    let stop = scale * R::epsilon() * R::of_usize(n);

    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = R::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let beta = apq.norm();
                if beta <= stop * R::of(1e-3) {
                    continue;
                }
                let phase = apq / cre(beta);
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Stable 2x2 rotation for [[app, beta], [beta, aqq]].
                let tau = (aqq - app) / (beta + beta);
                let t = if tau >= R::zero() {
                    R::one() / (tau + (R::one() + tau * tau).sqrt())
                } else {
                    -R::one() / (-tau + (R::one() + tau * tau).sqrt())
                };
                let c = R::one() / (R::one() + t * t).sqrt();
                let s = t * c;
                let cph = phase.conj();
                // A <- J† A J with J[p][p]=c, J[p][q]=s, J[q][p]=-s*conj(phase),
                // J[q][q]=c*conj(phase).
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cre(c) - akq * cph * cre(s);
                    a[(k, q)] = akp * cre(s) + akq * cph * cre(c);
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cre(c) - aqk * phase * cre(s);
                    a[(q, k)] = apk * cre(s) + aqk * phase * cre(c);
                }
                for k in 0..n {
                    let ukp = u[(k, p)];
                    let ukq = u[(k, q)];
                    u[(k, p)] = ukp * cre(c) - ukq * cph * cre(s);
                    u[(k, q)] = ukp * cre(s) + ukq * cph * cre(c);
                }
            }
        }
    }

    // Canonical column phases: largest-magnitude entry made real positive.
    let mut cols: Vec<(R, Vec<Cx<R>>)> = (0..n)
        .map(|k| {
            let mut col: Vec<Cx<R>> = (0..n).map(|i| u[(i, k)]).collect();
            let mut best = 0usize;
            let mut bestn = R::zero();
            for (i, z) in col.iter().enumerate() {
                if z.norm() > bestn {
                    bestn = z.norm();
                    best = i;
                }
            }
            if bestn > R::zero() {
                let ph = col[best].conj() / cre(bestn);
                for z in col.iter_mut() {
                    *z *= ph;
                }
            }
            (a[(k, k)].re, col)
        })
        .collect();

    cols.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .unwrap()
            .then_with(|| lex_cmp(&x.1, &y.1))
    });

    let eigenvalues: Vec<R> = cols.iter().map(|c| c.0).collect();
    let unitary = ComplexMatrix::from_fn(n, |i, k| cols[k].1[i]);
    SpectralDecomposition {
        eigenvalues,
        unitary,
    }
}

fn lex_cmp<R: RealScalar>(a: &[Cx<R>], b: &[Cx<R>]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.re.partial_cmp(&y.re).unwrap() {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
        match x.im.partial_cmp(&y.im).unwrap() {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// exp(H) = U diag(e^λ) U† for Hermitian H. Errors if any eigenvalue
/// exceeds 700; the caller is responsible for rescaling the exponent.
pub fn matrix_exp<R: RealScalar>(h: &HermitianObservable<R>) -> Result<ComplexMatrix<R>> {
    let eig = hermitian_eig(h);
    for &l in &eig.eigenvalues {
        if l > R::of(700.0) {
            return Err(MatrixError::Overflow {
                lambda: l.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(eig.map_eigenvalues(|l| l.exp()).symmetrize())
}

/// Eigendata of a PSD matrix restricted to its support (eigenvalues above
/// `cutoff`), used by every support-compressed solve.
pub(crate) struct SupportDecomposition<R: RealScalar> {
    /// Support eigenvalues, ascending.
    pub eigenvalues: Vec<R>,
    /// n x m matrix whose columns are the support eigenvectors.
    pub basis: Vec<Vec<Cx<R>>>,
    pub dim: usize,
}

impl<R: RealScalar> SupportDecomposition<R> {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Σ ln(λ) |v><v|
    pub fn log_matrix(&self) -> ComplexMatrix<R> {
        let mut out = ComplexMatrix::zeros(self.dim);
        for (lam, v) in self.eigenvalues.iter().zip(&self.basis) {
            let l = lam.ln();
            for i in 0..self.dim {
                for j in 0..self.dim {
                    out[(i, j)] += v[i] * v[j].conj() * cre(l);
                }
            }
        }
        out
    }

    /// Σ |v><v|
    pub fn projector(&self) -> ComplexMatrix<R> {
        let mut out = ComplexMatrix::zeros(self.dim);
        for v in &self.basis {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    out[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        out
    }

    /// V† M V: compresses an operator to the support subspace.
    pub fn compress(&self, m: &ComplexMatrix<R>) -> ComplexMatrix<R> {
        let r = self.rank();
        let mut out = ComplexMatrix::zeros(r);
        for a in 0..r {
            for b in 0..r {
                out[(a, b)] = m.sandwich(&self.basis[a], &self.basis[b]);
            }
        }
        out
    }

    /// V M V†: embeds a support-side operator back into the full space.
    pub fn embed(&self, m: &ComplexMatrix<R>) -> ComplexMatrix<R> {
        let r = self.rank();
        assert_eq!(r, m.dim());
        let mut out = ComplexMatrix::zeros(self.dim);
        for a in 0..r {
            for b in 0..r {
                let w = m[(a, b)];
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        out[(i, j)] += self.basis[a][i] * self.basis[b][j].conj() * w;
                    }
                }
            }
        }
        out
    }
}

pub(crate) fn support_decomposition<R: RealScalar>(
    psd: &ComplexMatrix<R>,
    cutoff: R,
) -> Result<SupportDecomposition<R>> {
    let h = HermitianObservable::new(psd.clone())?;
    let eig = hermitian_eig(&h);
    let mut eigenvalues = Vec::new();
    let mut basis = Vec::new();
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > cutoff {
            eigenvalues.push(l);
            basis.push(eig.eigenvector(k));
        }
    }
    if basis.is_empty() {
        return Err(MatrixError::ZeroState {
            cutoff: cutoff.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(SupportDecomposition {
        eigenvalues,
        basis,
        dim: psd.dim(),
    })
}

/// Matrix logarithm restricted to the support of ρ.
///
/// Returns `(L, P)` with `L = Σ_{λ>cutoff} ln λ |v><v|` and `P` the support
/// projector.
pub fn matrix_log_on_support<R: RealScalar>(
    rho: &DensityMatrix<R>,
    cutoff: R,
) -> Result<(ComplexMatrix<R>, ComplexMatrix<R>)> {
    let sd = support_decomposition(rho.matrix(), cutoff)?;
    Ok((sd.log_matrix(), sd.projector()))
}

/// Kronecker product of two operators.
pub fn kron<R: RealScalar>(a: &ComplexMatrix<R>, b: &ComplexMatrix<R>) -> ComplexMatrix<R> {
    a.kron(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceOver {
    A,
    B,
}

/// Partial trace of a density matrix on a bipartite space with factor
/// dimensions `(d_a, d_b)`.
pub fn partial_trace<R: RealScalar>(
    rho_ab: &DensityMatrix<R>,
    dims: (usize, usize),
    over: TraceOver,
) -> Result<DensityMatrix<R>> {
    let (da, db) = dims;
    if da * db != rho_ab.dim() {
        return Err(MatrixError::DimensionMismatch {
            context: format!(
                "factors {}x{} do not compose to dim {}",
                da,
                db,
                rho_ab.dim()
            ),
        });
    }
    let m = rho_ab.matrix();
    let out = match over {
        TraceOver::B => ComplexMatrix::from_fn(da, |ia, ja| {
            (0..db)
                .map(|b| m[(ia * db + b, ja * db + b)])
                .fold(cre(R::zero()), |acc, z| acc + z)
        }),
        TraceOver::A => ComplexMatrix::from_fn(db, |ib, jb| {
            (0..da)
                .map(|a| m[(a * db + ib, a * db + jb)])
                .fold(cre(R::zero()), |acc, z| acc + z)
        }),
    };
    DensityMatrix::new(out)
}
