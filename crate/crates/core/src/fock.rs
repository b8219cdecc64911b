//! Truncated number-basis linear algebra: coherent vectors, Hermitian
//! eigendecomposition, matrix logarithms, and trace products.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dimensionless coherent amplitude alpha = q + ik built from a dimensional
/// phase-space point via (q, k) = (lambda·x, p/lambda)/sqrt(hbar).
#[derive(Debug, Clone, Copy)]
pub struct CoherentAmplitude {
    pub q: f64,
    pub k: f64,
    pub hbar: f64,
    pub lambda: f64,
}

impl CoherentAmplitude {
    pub fn from_point(x: f64, p: f64, hbar: f64, lambda: f64) -> Result<Self> {
        if !(hbar > 0.0) || !(lambda > 0.0) {
            return Err(Error::InvalidInput(format!(
                "hbar and lambda must be positive, got hbar={hbar}, lambda={lambda}"
            )));
        }
        let root = hbar.sqrt();
        Ok(Self {
            q: lambda * x / root,
            k: p / (lambda * root),
            hbar,
            lambda,
        })
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.q, self.k)
    }

    /// The dimensional point this amplitude encodes.
    pub fn to_point(&self) -> (f64, f64) {
        let root = self.hbar.sqrt();
        (root * self.q / self.lambda, root * self.k * self.lambda)
    }
}

/// Controls coherent-vector truncation: target Poisson tail mass and the
/// hard dimension cap.
#[derive(Debug, Clone, Copy)]
pub struct TruncationPolicy {
    pub epsilon: f64,
    pub dim_cap: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            epsilon: 1e-12,
            dim_cap: 512,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidInput(format!(
                "truncation epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.dim_cap == 0 {
            return Err(Error::InvalidInput("dim_cap must be positive".into()));
        }
        Ok(())
    }

    /// Smallest dimension whose Poisson tail at mean |alpha|^2 is below
    /// epsilon, clamped to the cap. Returns (dim, tail_at_dim, capped).
    pub fn dim_for(&self, alpha_sq: f64) -> (usize, f64, bool) {
        if alpha_sq == 0.0 {
            return (1, 0.0, false);
        }
        let mut term = (-alpha_sq).exp(); // P(n = 0)
        let mut cumulative = term;
        let mut n = 0usize;
        loop {
            let tail = (1.0 - cumulative).max(0.0);
            if tail < self.epsilon {
                return (n + 1, tail, false);
            }
            if n + 1 >= self.dim_cap {
                return (self.dim_cap, tail, true);
            }
            n += 1;
            term *= alpha_sq / n as f64;
            cumulative += term;
        }
    }
}

/// A vector in the truncated number basis, with the tail mass that the
/// truncation discarded (exact zero only for finitely supported states).
#[derive(Debug, Clone)]
pub struct FockVector {
    pub amplitudes: DVector<Complex64>,
    pub eps_tail: f64,
}

impl FockVector {
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// A dense operator in the truncated number basis.
#[derive(Debug, Clone)]
pub struct FockOperator {
    pub entries: DMatrix<Complex64>,
    pub hermitian: bool,
}

impl FockOperator {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
            hermitian: true,
        }
    }

    pub fn from_matrix(entries: DMatrix<Complex64>) -> Self {
        let hermitian = hermiticity_defect(&entries) <= 1e-12 * max_abs(&entries).max(1e-300);
        Self { entries, hermitian }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Self {
            entries: m,
            hermitian: true,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.diagonal().sum()
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        Self {
            entries: &self.entries * a,
            hermitian: self.hermitian && a.im == 0.0,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            entries: &self.entries + &other.entries,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self::from_matrix(&self.entries * &other.entries))
    }

    /// [self, other] = self·other − other·self.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        let c = &self.entries * &other.entries - &other.entries * &self.entries;
        Ok(Self {
            hermitian: false,
            entries: c,
        })
    }
}

pub fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimMismatch { left, right });
    }
    Ok(())
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Number-basis coefficients of |alpha>, c_n = e^{-|alpha|^2/2} alpha^n/sqrt(n!),
/// by the multiplicative recurrence c_{n+1} = c_n·alpha/sqrt(n+1).
/// Dimension is the smallest N with Poisson tail below the policy target;
/// hitting the cap is not an error, the achieved tail rides along in
/// `eps_tail` for callers to escalate.
pub fn coherent_vector(alpha: CoherentAmplitude, policy: &TruncationPolicy) -> Result<FockVector> {
    policy.validate()?;
    let a = alpha.alpha();
    let (dim, _tail, _capped) = policy.dim_for(a.norm_sqr());
    Ok(coherent_vector_with_dim(a, dim))
}

/// Coherent coefficients at a fixed dimension (used when several states must
/// share a basis). Tail mass is computed from the actual coefficients.
pub fn coherent_vector_with_dim(alpha: Complex64, dim: usize) -> FockVector {
    let mut amplitudes = DVector::zeros(dim);
    let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    let mut mass = 0.0;
    for n in 0..dim {
        amplitudes[n] = c;
        mass += c.norm_sqr();
        c *= alpha / ((n + 1) as f64).sqrt();
    }
    FockVector {
        amplitudes,
        eps_tail: (1.0 - mass).max(0.0),
    }
}

/// <v1|v2>, conjugate-linear in the first argument.
pub fn overlap(v1: &FockVector, v2: &FockVector) -> Result<Complex64> {
    check_dims(v1.dim(), v2.dim())?;
    Ok(v1.amplitudes.dotc(&v2.amplitudes))
}

/// Closed-form coherent overlap <alpha|alpha'> =
/// exp[-(q-q')^2/2 - (k-k')^2/2 + i(q k' - k q')].
///
/// Note the +i phase: that is the convention the number-basis inner product
/// actually produces; the magnitude and all closed cyclic products are
/// convention independent.
pub fn coherent_overlap_closed_form(a: CoherentAmplitude, b: CoherentAmplitude) -> Complex64 {
    let dq = a.q - b.q;
    let dk = a.k - b.k;
    let phase = a.q * b.k - a.k * b.q;
    Complex64::new(-0.5 * (dq * dq + dk * dk), phase).exp()
}

/// Eigendecomposition of a Hermitian operator: eigenvalues ascending,
/// orthonormal eigenvectors as columns.
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

pub fn hermitian_eig(op: &FockOperator) -> Result<HermitianEig> {
    if !op.hermitian {
        return Err(Error::NonHermitian {
            defect: hermiticity_defect(&op.entries),
        });
    }
    // symmetrize to scrub round-off before factorizing
    let n = op.dim();
    let mut m = op.entries.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) / 2.0;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
    }
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

impl HermitianEig {
    /// Rebuilds f(O) = V f(Λ) V† from the decomposition.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> FockOperator {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let flam = Complex64::new(f(lam), 0.0);
            for i in 0..n {
                scaled[(i, k)] = self.eigenvectors[(i, k)] * flam;
            }
        }
        let m = &scaled * self.eigenvectors.adjoint();
        FockOperator {
            entries: m,
            hermitian: true,
        }
    }
}

/// log O for Hermitian positive semidefinite O, eigenvalues clipped below
/// `floor` before the log. Eigenvalues below -1e-10 mean the input is not a
/// state.
pub fn operator_log(op: &FockOperator, floor: f64) -> Result<FockOperator> {
    let eig = hermitian_eig(op)?;
    if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| l < -1e-10) {
        return Err(Error::NotAState { eigenvalue: bad });
    }
    Ok(eig.apply(|l| l.max(floor).ln()))
}

/// Trace of the left-to-right product of the operators.
pub fn trace_product(ops: &[&FockOperator]) -> Result<Complex64> {
    let first = ops
        .first()
        .ok_or_else(|| Error::InvalidInput("trace_product needs at least one operator".into()))?;
    for o in ops.iter().skip(1) {
        check_dims(first.dim(), o.dim())?;
    }
    match ops.len() {
        1 => Ok(first.trace()),
        2 => {
            // Tr[AB] without forming the product
            let a = &ops[0].entries;
            let b = &ops[1].entries;
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..a.nrows() {
                for k in 0..a.ncols() {
                    acc += a[(i, k)] * b[(k, i)];
                }
            }
            Ok(acc)
        }
        _ => {
            let mut prod = ops[0].entries.clone();
            for o in &ops[1..ops.len() - 1] {
                prod = prod * &o.entries;
            }
            let last = &ops[ops.len() - 1].entries;
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..prod.nrows() {
                for k in 0..prod.ncols() {
                    acc += prod[(i, k)] * last[(k, i)];
                }
            }
            Ok(acc)
        }
    }
}
