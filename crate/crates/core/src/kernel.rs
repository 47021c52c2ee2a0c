//! Kernel evaluation, Gram assembly, weighted kernel sums and kernel-expansion models.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative tolerance on negative Gram eigenvalues attributed to rounding.
pub const PSD_REL_TOL: f64 = 1e-9;

/// Positive-semidefinite kernel families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec<T> {
    /// `exp(−‖x−y‖² / (2σ²))`
    Gaussian { width: T },
    /// `exp(−‖x−y‖ / s)`
    Laplacian { scale: T },
    /// `(⟨x,y⟩ + c)^d`
    Polynomial { degree: u32, offset: T },
    /// `⟨x,y⟩`
    Linear,
}

impl<T: Real> KernelSpec<T> {
    pub fn gaussian(width: T) -> Result<Self> {
        positive("Gaussian width", width)?;
        Ok(KernelSpec::Gaussian { width })
    }

    pub fn laplacian(scale: T) -> Result<Self> {
        positive("Laplacian scale", scale)?;
        Ok(KernelSpec::Laplacian { scale })
    }

    pub fn polynomial(degree: u32, offset: T) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidParameter("polynomial degree must be >= 1".into()));
        }
        if !(offset >= T::zero()) {
            return Err(Error::InvalidParameter("polynomial offset must be >= 0".into()));
        }
        Ok(KernelSpec::Polynomial { degree, offset })
    }

    pub fn eval(&self, x: &DVector<T>, y: &DVector<T>) -> T {
        match *self {
            KernelSpec::Gaussian { width } => {
                let d2 = (x - y).norm_squared();
                (-d2 / (T::lit(2.0) * width * width)).exp()
            }
            KernelSpec::Laplacian { scale } => (-(x - y).norm() / scale).exp(),
            KernelSpec::Polynomial { degree, offset } => (x.dot(y) + offset).powi(degree as i32),
            KernelSpec::Linear => x.dot(y),
        }
    }

    /// Cross-kernel matrix `K[i,j] = r(a_i, b_j)`.
    pub fn cross(&self, a: &[DVector<T>], b: &[DVector<T>]) -> DMatrix<T> {
        DMatrix::from_fn(a.len(), b.len(), |i, j| self.eval(&a[i], &b[j]))
    }
}

fn positive<T: Real>(what: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be > 0")))
    }
}

fn check_points<T: Real>(points: &[DVector<T>]) -> Result<usize> {
    let d = points.first().ok_or(Error::EmptyPoints)?.len();
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: p.len() });
        }
    }
    Ok(d)
}

/// Gram matrix of `kernel` on `points`, checked to be PSD up to rounding.
pub fn gram<T: Real>(kernel: &KernelSpec<T>, points: &[DVector<T>]) -> Result<DMatrix<T>> {
    check_points(points)?;
    let m = points.len();
    let mut g = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = kernel.eval(&points[i], &points[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    check_psd(&g)?;
    Ok(g)
}

/// Fails when the smallest eigenvalue is below `−1e−9·‖G‖₂`.
pub fn check_psd<T: Real>(g: &DMatrix<T>) -> Result<()> {
    if g.nrows() == 0 {
        return Ok(());
    }
    let eig = SymmetricEigen::new(g.clone()).eigenvalues;
    let scale = eig.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
    let min = eig.min();
    let tol = T::lit(PSD_REL_TOL).max(T::default_epsilon() * T::from_usize_lossy(g.nrows()) * T::lit(10.0));
    if min < -tol * scale {
        return Err(Error::NotPsd { min_eig: min.as_f64() });
    }
    Ok(())
}

/// Non-negative combination `r = Σ α_n r_n` of kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiKernel<T> {
    kernels: Vec<KernelSpec<T>>,
    weights: DVector<T>,
}

impl<T: Real> MultiKernel<T> {
    pub fn new(kernels: Vec<KernelSpec<T>>, weights: DVector<T>) -> Result<Self> {
        if kernels.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: kernels.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|&w| !(w >= T::zero())) {
            return Err(Error::InvalidParameter("kernel combination weights must be >= 0".into()));
        }
        Ok(MultiKernel { kernels, weights })
    }

    pub fn kernels(&self) -> &[KernelSpec<T>] {
        &self.kernels
    }

    pub fn weights(&self) -> &DVector<T> {
        &self.weights
    }

    pub fn eval(&self, x: &DVector<T>, y: &DVector<T>) -> T {
        self.kernels
            .iter()
            .zip(self.weights.iter())
            .fold(T::zero(), |acc, (k, &w)| acc + w * k.eval(x, y))
    }

    /// `Σ α_n G_n` on `points`.
    pub fn gram(&self, points: &[DVector<T>]) -> Result<DMatrix<T>> {
        let grams = self.component_grams(points)?;
        Ok(combine(&grams, &self.weights))
    }

    pub fn component_grams(&self, points: &[DVector<T>]) -> Result<Vec<DMatrix<T>>> {
        self.kernels.iter().map(|k| gram(k, points)).collect()
    }
}

/// `Σ α_n G_n`.
pub fn combine<T: Real>(grams: &[DMatrix<T>], weights: &DVector<T>) -> DMatrix<T> {
    let m = grams.first().map_or(0, |g| g.nrows());
    grams
        .iter()
        .zip(weights.iter())
        .fold(DMatrix::zeros(m, m), |acc, (g, &w)| acc + g * w)
}

/// Builds the weighted kernel sum; see [`MultiKernel::new`].
pub fn multi_kernel<T: Real>(kernels: Vec<KernelSpec<T>>, alpha: DVector<T>) -> Result<MultiKernel<T>> {
    MultiKernel::new(kernels, alpha)
}

/// Kernel expansion `f(x) = Σ_m a_m Σ_n α_n r_n(x, x_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel<T> {
    pub kernel: MultiKernel<T>,
    pub centers: Vec<DVector<T>>,
    pub coefficients: DVector<T>,
}

impl<T: Real> KernelModel<T> {
    pub fn new(kernel: MultiKernel<T>, centers: Vec<DVector<T>>, coefficients: DVector<T>) -> Result<Self> {
        check_points(&centers)?;
        if centers.len() != coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: centers.len(),
                got: coefficients.len(),
            });
        }
        Ok(KernelModel {
            kernel,
            centers,
            coefficients,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.centers[0].len()
    }

    fn check_input(&self, x: &DVector<T>) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, x: &DVector<T>) -> Result<T> {
        Ok(self.predict_components(x)?.iter().fold(T::zero(), |acc, &v| acc + v))
    }

    /// Per-kernel contributions `f_n(x) = α_n Σ_m a_m r_n(x, x_m)`.
    pub fn predict_components(&self, x: &DVector<T>) -> Result<Vec<T>> {
        self.check_input(x)?;
        Ok(self
            .kernel
            .kernels
            .iter()
            .zip(self.kernel.weights.iter())
            .map(|(k, &w)| {
                if w == T::zero() {
                    return T::zero();
                }
                let s = self
                    .centers
                    .iter()
                    .zip(self.coefficients.iter())
                    .fold(T::zero(), |acc, (c, &a)| acc + a * k.eval(x, c));
                w * s
            })
            .collect())
    }

    /// `‖f‖²_H = aᵀ(Σ α_n G_n)a` in the combined RKHS.
    pub fn rkhs_norm_squared(&self) -> Result<T> {
        let g = self.kernel.gram(&self.centers)?;
        Ok(self.coefficients.dot(&(g * &self.coefficients)))
    }
}

/// Free-function form of [`KernelModel::predict`].
pub fn predict<T: Real>(model: &KernelModel<T>, x: &DVector<T>) -> Result<T> {
    model.predict(x)
}
