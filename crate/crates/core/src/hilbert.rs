//! The typical fibre `F = ℂⁿ` with scalar product `≺u|v≻ = u*·G·v`.

use alloc::format;
use alloc::string::ToString;

use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::frobenius;
use crate::{CMat, CVec};

/// Finite-dimensional complex Hilbert space with a Hermitian positive-definite
/// Gram matrix. The scalar product is conjugate-linear in its first slot.
#[derive(Debug, Clone, PartialEq)]
pub struct FibreSpace {
    n: usize,
    gram: CMat,
    gram_inv: CMat,
    identity_gram: bool,
}

impl FibreSpace {
    /// `ℂⁿ` with the standard scalar product.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidFibreSpace(
                "dimension must be positive".to_string(),
            ));
        }
        Ok(Self {
            n,
            gram: CMat::identity(n, n),
            gram_inv: CMat::identity(n, n),
            identity_gram: true,
        })
    }

    pub fn with_gram(gram: CMat) -> Result<Self> {
        let n = gram.nrows();
        if n == 0 || !gram.is_square() {
            return Err(Error::InvalidFibreSpace(
                "gram matrix must be square and non-empty".to_string(),
            ));
        }
        let asym = frobenius((&gram - gram.adjoint()).as_slice());
        if asym > 1e-12 * frobenius(gram.as_slice()).max(1.0) {
            return Err(Error::InvalidFibreSpace(format!(
                "gram matrix is not Hermitian (residual {asym:e})"
            )));
        }
        // Complex Cholesky accepts some indefinite inputs; check the factor.
        let not_pd =
            || Error::InvalidFibreSpace("gram matrix is not positive definite".to_string());
        let chol = Cholesky::new(gram.clone()).ok_or_else(not_pd)?;
        let l = chol.l();
        let diag_ok = l
            .diagonal()
            .iter()
            .all(|d| d.re > 0.0 && d.im.abs() <= 1e-12 * d.re);
        let recon = frobenius((&l * l.adjoint() - &gram).as_slice());
        if !diag_ok || recon > 1e-10 * frobenius(gram.as_slice()).max(1.0) {
            return Err(not_pd());
        }
        let gram_inv = chol.inverse();
        let identity_gram = gram == CMat::identity(n, n);
        Ok(Self {
            n,
            gram,
            gram_inv,
            identity_gram,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn gram(&self) -> &CMat {
        &self.gram
    }

    pub fn gram_inverse(&self) -> &CMat {
        &self.gram_inv
    }

    /// Upper-triangular `R` with `G = R*R`; maps the space isometrically onto
    /// `ℂⁿ` with the standard product.
    pub fn gram_root(&self) -> CMat {
        if self.identity_gram {
            return CMat::identity(self.n, self.n);
        }
        Cholesky::new(self.gram.clone())
            .expect("gram matrix was checked positive definite")
            .l()
            .adjoint()
    }

    pub fn check_vector(&self, v: &CVec) -> Result<()> {
        if v.len() == self.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n,
                found: v.len(),
            })
        }
    }

    pub fn check_operator(&self, a: &CMat) -> Result<()> {
        if a.nrows() != self.n || a.ncols() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: if a.nrows() != self.n {
                    a.nrows()
                } else {
                    a.ncols()
                },
            });
        }
        Ok(())
    }

    /// `≺u|v≻`.
    pub fn inner(&self, u: &CVec, v: &CVec) -> Result<Complex64> {
        self.check_vector(u)?;
        self.check_vector(v)?;
        Ok(if self.identity_gram {
            u.dotc(v)
        } else {
            u.dotc(&(&self.gram * v))
        })
    }

    pub fn norm(&self, u: &CVec) -> Result<f64> {
        Ok(libm::sqrt(self.inner(u, u)?.re.max(0.0)))
    }

    /// The adjoint `A†` with `≺A†u|v≻ = ≺u|Av≻`, i.e. `G⁻¹A*G`.
    pub fn adjoint(&self, a: &CMat) -> Result<CMat> {
        self.check_operator(a)?;
        Ok(if self.identity_gram {
            a.adjoint()
        } else {
            &self.gram_inv * a.adjoint() * &self.gram
        })
    }

    /// `‖A†A − I‖_F ≤ tol`.
    pub fn is_unitary(&self, a: &CMat, tol: f64) -> Result<bool> {
        let dag = self.adjoint(a)?;
        let defect = dag * a - CMat::identity(self.n, self.n);
        Ok(frobenius(defect.as_slice()) <= tol)
    }

    /// `‖A† − A‖_F ≤ tol`.
    pub fn is_hermitian(&self, a: &CMat, tol: f64) -> Result<bool> {
        let dag = self.adjoint(a)?;
        Ok(frobenius((dag - a).as_slice()) <= tol)
    }
}
