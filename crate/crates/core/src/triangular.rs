//! The triangular nilpotent algebra `T(n)` of strictly upper triangular matrices.

use num_traits::{One, Zero};

use crate::basis::{tn_dim, BasisOrder};
use crate::error::{Error, Result};
use crate::liecore::{LieAlgebra, Vector};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct TriangularAlgebra {
    order: BasisOrder,
    algebra: LieAlgebra,
}

/// `[N_ik, N_ab] = δ_ka N_ib − δ_bi N_ak`, built from the chains `i < k < b`.
pub fn build_tn(n: usize) -> Result<TriangularAlgebra> {
    if n < 3 {
        return Err(Error::SizeTooSmall { n, min: 3, what: "T(n)" });
    }
    let order = BasisOrder::new(n)?;
    let names = order.pairs().iter().map(|p| format!("N{}", p.label())).collect();
    let mut algebra = LieAlgebra::new(names);
    for i in 1..=n {
        for k in i + 1..=n {
            for b in k + 1..=n {
                algebra.add_constant(order.idx(i, k), order.idx(k, b), order.idx(i, b), &Scalar::one())?;
            }
        }
    }
    Ok(TriangularAlgebra { order, algebra })
}

impl TriangularAlgebra {
    pub fn n(&self) -> usize {
        self.order.n()
    }

    pub fn dim(&self) -> usize {
        tn_dim(self.n())
    }

    pub fn order(&self) -> &BasisOrder {
        &self.order
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn into_algebra(self) -> LieAlgebra {
        self.algebra
    }

    pub fn basis_vector(&self, i: usize, k: usize) -> Vector {
        Vector::unit(self.dim(), self.order.idx(i, k))
    }

    /// Row `y` holds `[x, N_y]`, so that `[x, N] = M N` for the column vector `N`.
    pub fn ad_matrix(&self, x: &Vector) -> Result<Matrix> {
        self.algebra.ad_matrix(x)
    }
}

/// Expected lower central series dimensions of `T(n)`: `r, (n−1)(n−2)/2, …, 3, 1, 0`.
pub fn tn_central_series_formula(n: usize) -> Vec<usize> {
    (1..=n).rev().map(tn_dim).collect()
}

#[allow(dead_code)]
fn is_zero_matrix(m: &Matrix) -> bool {
    m.row_vecs().iter().flatten().all(Zero::is_zero)
}
