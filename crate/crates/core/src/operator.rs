//! Hermitian operators on `vec(S)`, either block-diagonal `I_L ⊗ X` (never
//! materialized) or dense.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::linalg::{hermitian_eigen, hermitian_part, kron_identity, psd_sqrt, C64};

#[derive(Debug, Clone)]
pub enum HermitianOp {
    /// `I_reps ⊗ block`.
    Kron { block: DMatrix<C64>, reps: usize },
    Dense(DMatrix<C64>),
}

impl HermitianOp {
    pub fn kron(block: DMatrix<C64>, reps: usize) -> Self {
        HermitianOp::Kron { block: hermitian_part(&block), reps }
    }

    pub fn dense(m: DMatrix<C64>) -> Self {
        HermitianOp::Dense(hermitian_part(&m))
    }

    pub fn dim(&self) -> usize {
        match self {
            HermitianOp::Kron { block, reps } => block.nrows() * reps,
            HermitianOp::Dense(m) => m.nrows(),
        }
    }

    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        assert_eq!(x.len(), self.dim(), "operator/vector dimension mismatch");
        match self {
            HermitianOp::Kron { block, reps } => {
                let n = block.nrows();
                let blocks = DMatrix::from_column_slice(n, *reps, x.as_slice());
                DVector::from_column_slice((block * blocks).as_slice())
            }
            HermitianOp::Dense(m) => m * x,
        }
    }

    /// Real quadratic form `x† A x`.
    pub fn quad(&self, x: &DVector<C64>) -> f64 {
        x.dotc(&self.apply(x)).re
    }

    pub fn materialize(&self) -> DMatrix<C64> {
        match self {
            HermitianOp::Kron { block, reps } => kron_identity(*reps, block),
            HermitianOp::Dense(m) => m.clone(),
        }
    }

    /// Largest eigenvalue and an associated unit eigenvector. For the
    /// block-diagonal form the eigenvector lives in the first block.
    pub fn principal(&self) -> (f64, DVector<C64>) {
        match self {
            HermitianOp::Kron { block, reps } => {
                let eig = hermitian_eigen(block);
                let n = block.nrows();
                let mut v = DVector::zeros(n * reps);
                v.rows_mut(0, n).copy_from(&eig.principal_vector());
                (eig.max_value(), v)
            }
            HermitianOp::Dense(m) => {
                let eig = hermitian_eigen(m);
                (eig.max_value(), eig.principal_vector())
            }
        }
    }

    pub fn lambda_max(&self) -> f64 {
        match self {
            HermitianOp::Kron { block, .. } => hermitian_eigen(block).max_value(),
            HermitianOp::Dense(m) => hermitian_eigen(m).max_value(),
        }
    }

    /// Hermitian PSD square root, keeping the block structure when present.
    pub fn sqrt(&self) -> Result<HermitianOp> {
        Ok(match self {
            HermitianOp::Kron { block, reps } => HermitianOp::Kron { block: psd_sqrt(block)?, reps: *reps },
            HermitianOp::Dense(m) => HermitianOp::Dense(psd_sqrt(m)?),
        })
    }

    pub fn plus(&self, other: &HermitianOp) -> HermitianOp {
        assert_eq!(self.dim(), other.dim(), "operator dimension mismatch");
        match (self, other) {
            (HermitianOp::Kron { block: a, reps: ra }, HermitianOp::Kron { block: b, reps: rb }) if ra == rb => {
                HermitianOp::Kron { block: a + b, reps: *ra }
            }
            _ => HermitianOp::Dense(self.materialize() + other.materialize()),
        }
    }
}
