//! Finite-dimensional Lie algebras over exact rationals.
//!
//! Structure constants are stored sparsely, once per unordered pair `x < y`;
//! lookups with `x > y` flip the sign, so antisymmetry holds by construction.
//! Matrices of `ad` follow the row convention used for structure matrices:
//! row `y` holds the coefficients of `[x, e_y]`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{to_dense, Echelon, Matrix, SparseRow};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Vector(pub Vec<Scalar>);

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![Scalar::zero(); dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = Scalar::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: &Scalar) -> Vector {
        Vector(self.0.iter().map(|a| a * s).collect())
    }

    pub fn support(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, _)| i).collect()
    }

    fn sparse(&self) -> SparseRow {
        crate::linalg::sparse_from_dense(&self.0)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct LieAlgebra {
    basis_names: Vec<String>,
    constants: BTreeMap<(usize, usize), SparseRow>,
}

impl fmt::Debug for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "LieAlgebra(dim {})", self.dim())?;
        for (x, y, z, c) in self.canonical_constants() {
            let (nx, ny, nz) = (&self.basis_names[x], &self.basis_names[y], &self.basis_names[z]);
            writeln!(f, "  [{nx}, {ny}] += {c} {nz}")?;
        }
        Ok(())
    }
}

impl LieAlgebra {
    /// Abelian algebra on the given basis labels.
    pub fn new(basis_names: Vec<String>) -> Self {
        Self { basis_names, constants: BTreeMap::new() }
    }

    pub fn abelian(dim: usize) -> Self {
        Self::new((1..=dim).map(|i| format!("e{i}")).collect())
    }

    pub fn dim(&self) -> usize {
        self.basis_names.len()
    }

    pub fn basis_names(&self) -> &[String] {
        &self.basis_names
    }

    fn check_index(&self, x: usize) -> Result<()> {
        if x >= self.dim() {
            return Err(Error::IndexOutOfRange { idx: x, n: self.dim(), r: self.dim() });
        }
        Ok(())
    }

    /// Adds `coeff * e_z` to `[e_x, e_y]` (and the negative to `[e_y, e_x]`).
    pub fn add_constant(&mut self, x: usize, y: usize, z: usize, coeff: &Scalar) -> Result<()> {
        self.check_index(x)?;
        self.check_index(y)?;
        self.check_index(z)?;
        if coeff.is_zero() {
            return Ok(());
        }
        if x == y {
            return Err(Error::Antisymmetry(x));
        }
        let (key, c) = if x < y { ((x, y), coeff.clone()) } else { ((y, x), -coeff.clone()) };
        let row = self.constants.entry(key).or_default();
        let e = row.entry(z).or_insert_with(Scalar::zero);
        *e += c;
        if e.is_zero() {
            row.remove(&z);
            if row.is_empty() {
                self.constants.remove(&key);
            }
        }
        Ok(())
    }

    /// `[e_x, e_y]` as a sparse coefficient map.
    pub fn bracket_basis(&self, x: usize, y: usize) -> SparseRow {
        if x == y {
            return SparseRow::new();
        }
        let (key, flip) = if x < y { ((x, y), false) } else { ((y, x), true) };
        match self.constants.get(&key) {
            None => SparseRow::new(),
            Some(row) if !flip => row.clone(),
            Some(row) => row.iter().map(|(z, c)| (*z, -c.clone())).collect(),
        }
    }

    pub fn structure_constant(&self, x: usize, y: usize, z: usize) -> Scalar {
        self.bracket_basis(x, y).get(&z).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Nonzero `c_{xy}^z` with `x < y`.
    pub fn canonical_constants(&self) -> Vec<(usize, usize, usize, Scalar)> {
        self.constants
            .iter()
            .flat_map(|(&(x, y), row)| row.iter().map(move |(&z, c)| (x, y, z, c.clone())))
            .collect()
    }

    fn bracket_sparse(&self, u: &SparseRow, v: &SparseRow) -> SparseRow {
        let mut out = SparseRow::new();
        for (x, a) in u {
            for (y, b) in v {
                if x == y {
                    continue;
                }
                let ab = a * b;
                for (z, c) in self.bracket_basis(*x, *y) {
                    let e = out.entry(z).or_insert_with(Scalar::zero);
                    *e += &ab * &c;
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn bracket(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        for v in [x, y] {
            if v.dim() != self.dim() {
                return Err(Error::DimensionMismatch { expected: self.dim(), found: v.dim() });
            }
        }
        Ok(Vector(to_dense(&self.bracket_sparse(&x.sparse(), &y.sparse()), self.dim())))
    }

    /// Row `y` holds `[x, e_y]`.
    pub fn ad_matrix(&self, x: &Vector) -> Result<Matrix> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.dim() });
        }
        let d = self.dim();
        let xs = x.sparse();
        let mut m = Matrix::zeros(d, d);
        for y in 0..d {
            let mut ey = SparseRow::new();
            ey.insert(y, Scalar::one());
            for (z, c) in self.bracket_sparse(&xs, &ey) {
                m[(y, z)] = c;
            }
        }
        Ok(m)
    }

    /// Structure constants in the basis `e'_i = sum_j P_ij e_j`.
    pub fn change_basis(&self, p: &Matrix) -> Result<LieAlgebra> {
        let d = self.dim();
        if p.rows() != d || p.cols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: p.rows() });
        }
        let pinv = p
            .inverse()
            .ok_or_else(|| Error::Unsupported("basis change matrix is singular".into()))?;
        let rows: Vec<SparseRow> = (0..d).map(|i| crate::linalg::sparse_from_dense(p.row(i))).collect();
        let mut out = LieAlgebra::new(self.basis_names.clone());
        for i in 0..d {
            for k in i + 1..d {
                let w = to_dense(&self.bracket_sparse(&rows[i], &rows[k]), d);
                let coords = pinv.left_apply(&w)?;
                for (z, c) in coords.iter().enumerate() {
                    out.add_constant(i, k, z, c)?;
                }
            }
        }
        Ok(out)
    }

    /// RREF span of all brackets `[a, b]` with `a` from `left` and `b` from `right`.
    pub fn bracket_span(&self, left: &[SparseRow], right: &[SparseRow]) -> Echelon {
        let mut e = Echelon::new(self.dim());
        for a in left {
            for b in right {
                let v = self.bracket_sparse(a, b);
                if !v.is_empty() {
                    e.insert(v);
                }
            }
        }
        e
    }

    pub fn unit_basis(&self) -> Vec<SparseRow> {
        (0..self.dim())
            .map(|i| {
                let mut r = SparseRow::new();
                r.insert(i, Scalar::one());
                r
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiViolation {
    pub triple: (usize, usize, usize),
    pub residual: Vector,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JacobiReport {
    pub violations: Vec<JacobiViolation>,
}

impl JacobiReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn describe(&self, alg: &LieAlgebra) -> String {
        match self.violations.first() {
            None => "no violations".into(),
            Some(v) => {
                let names = alg.basis_names();
                let (x, y, z) = v.triple;
                format!(
                    "{} violating triple(s), first ({}, {}, {})",
                    self.violations.len(),
                    names[x],
                    names[y],
                    names[z]
                )
            }
        }
    }
}

/// Evaluates `[[x,y],z] + [[y,z],x] + [[z,x],y]` on every basis triple `x < y < z`.
pub fn check_jacobi(alg: &LieAlgebra) -> JacobiReport {
    let d = alg.dim();
    let units = alg.unit_basis();
    let mut violations = Vec::new();
    for x in 0..d {
        for y in x + 1..d {
            let xy = alg.bracket_basis(x, y);
            for z in y + 1..d {
                let mut sum = alg.bracket_sparse(&xy, &units[z]);
                let yz = alg.bracket_basis(y, z);
                let zx = alg.bracket_basis(z, x);
                for part in [alg.bracket_sparse(&yz, &units[x]), alg.bracket_sparse(&zx, &units[y])] {
                    for (k, c) in part {
                        *sum.entry(k).or_insert_with(Scalar::zero) += c;
                    }
                }
                sum.retain(|_, c| !c.is_zero());
                if !sum.is_empty() {
                    violations.push(JacobiViolation {
                        triple: (x, y, z),
                        residual: Vector(to_dense(&sum, d)),
                    });
                }
            }
        }
    }
    JacobiReport { violations }
}

fn run_series(
    alg: &LieAlgebra,
    start: Vec<SparseRow>,
    next: impl Fn(&[SparseRow], &[SparseRow]) -> Echelon,
) -> Vec<usize> {
    let mut dims = vec![start.len()];
    let base = start.clone();
    let mut current = start;
    loop {
        let e = next(&base, &current);
        let dim = e.rank();
        if dim == *dims.last().unwrap() {
            break;
        }
        dims.push(dim);
        if dim == 0 {
            break;
        }
        current = e.basis();
    }
    let _ = alg;
    dims
}

/// Dimensions of `L, [L,L], [[L,L],[L,L]], ...` until the series stabilizes.
pub fn derived_series(alg: &LieAlgebra) -> Vec<usize> {
    derived_series_of(alg, &alg.unit_basis())
}

/// Lower central series dimensions `L, [L,L], [L,[L,L]], ...`.
pub fn central_series(alg: &LieAlgebra) -> Vec<usize> {
    central_series_of(alg, &alg.unit_basis())
}

/// Derived series of the subalgebra spanned by `basis`.
pub fn derived_series_of(alg: &LieAlgebra, basis: &[SparseRow]) -> Vec<usize> {
    let start = span_basis(alg, basis);
    run_series(alg, start, |_, cur| alg.bracket_span(cur, cur))
}

/// Lower central series of the subalgebra spanned by `basis`, taken inside itself.
pub fn central_series_of(alg: &LieAlgebra, basis: &[SparseRow]) -> Vec<usize> {
    let start = span_basis(alg, basis);
    run_series(alg, start, |base, cur| alg.bracket_span(base, cur))
}

fn span_basis(alg: &LieAlgebra, basis: &[SparseRow]) -> Vec<SparseRow> {
    let mut e = Echelon::new(alg.dim());
    for b in basis {
        e.insert(b.clone());
    }
    e.basis()
}

pub fn is_solvable(alg: &LieAlgebra) -> bool {
    derived_series(alg).last() == Some(&0)
}

pub fn is_nilpotent(alg: &LieAlgebra) -> bool {
    central_series(alg).last() == Some(&0)
}

pub fn center_dim(alg: &LieAlgebra) -> usize {
    // x central iff sum_i x_i [e_i, e_y] = 0 for every y
    let d = alg.dim();
    let mut e = Echelon::new(d);
    for y in 0..d {
        let mut rows: BTreeMap<usize, SparseRow> = BTreeMap::new();
        for i in 0..d {
            for (z, c) in alg.bracket_basis(i, y) {
                rows.entry(z).or_default().insert(i, c);
            }
        }
        for row in rows.into_values() {
            e.insert(row);
        }
    }
    d - e.rank()
}

/// True iff `ad(x)` is a nilpotent operator.
pub fn is_nilpotent_element(alg: &LieAlgebra, x: &Vector) -> Result<bool> {
    Ok(alg.ad_matrix(x)?.is_nilpotent())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NilMethod {
    /// No matrices were given; independent by convention.
    EmptyInput,
    /// All inputs upper triangular: independence of the diagonals.
    Diagonal,
    /// Pairwise commuting inputs: intersection with the radical of the
    /// generated associative algebra, computed from the trace form.
    TraceForm,
    /// A single matrix, tested by powering.
    Single,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Nilindependence {
    pub independent: bool,
    pub method: NilMethod,
}

/// Whether no nontrivial linear combination of `mats` is nilpotent.
pub fn nilindependent(mats: &[Matrix]) -> Result<Nilindependence> {
    let Some(first) = mats.first() else {
        return Ok(Nilindependence { independent: true, method: NilMethod::EmptyInput });
    };
    let m = first.rows();
    for a in mats {
        if !a.is_square() || a.rows() != m {
            return Err(Error::DimensionMismatch { expected: m, found: a.rows() });
        }
    }
    if mats.iter().all(Matrix::is_upper_triangular) {
        let diags: Vec<Vec<Scalar>> = mats.iter().map(Matrix::diagonal).collect();
        let independent = crate::linalg::rank_of(&diags) == mats.len();
        return Ok(Nilindependence { independent, method: NilMethod::Diagonal });
    }
    if mats.len() == 1 {
        return Ok(Nilindependence { independent: !first.is_nilpotent(), method: NilMethod::Single });
    }
    for (i, a) in mats.iter().enumerate() {
        for b in &mats[i + 1..] {
            if !a.commutator(b)?.is_zero() {
                return Err(Error::Undecided(
                    "nilindependence of non-commuting, non-triangular matrices".into(),
                ));
            }
        }
    }
    Ok(Nilindependence { independent: trace_form_independent(mats)?, method: NilMethod::TraceForm })
}

fn flatten(a: &Matrix) -> Vec<Scalar> {
    (0..a.rows()).flat_map(|i| a.row(i).to_vec()).collect()
}

fn unflatten(v: &[Scalar], m: usize) -> Matrix {
    Matrix::from_rows(v.chunks(m).map(<[Scalar]>::to_vec).collect()).expect("square")
}

fn trace_form_independent(mats: &[Matrix]) -> Result<bool> {
    let m = mats[0].rows();
    let flat: Vec<Vec<Scalar>> = mats.iter().map(flatten).collect();
    if crate::linalg::rank_of(&flat) < mats.len() {
        return Ok(false);
    }
    // associative closure of the span
    let mut span = Echelon::new(m * m);
    let mut basis: Vec<Matrix> = Vec::new();
    for a in mats {
        if span.insert_dense(&flatten(a)) {
            basis.push(a.clone());
        }
    }
    let mut i = 0;
    while i < basis.len() {
        for j in 0..=i {
            for prod in [basis[i].mul(&basis[j])?, basis[j].mul(&basis[i])?] {
                if span.insert_dense(&flatten(&prod)) {
                    basis.push(prod);
                }
            }
        }
        i += 1;
    }
    let d = basis.len();
    let mut gram = Matrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            gram[(a, b)] = basis[a].mul(&basis[b])?.trace();
        }
    }
    let radical: Vec<Vec<Scalar>> = gram
        .nullspace()
        .into_iter()
        .map(|coeffs| {
            let mut acc = Matrix::zeros(m, m);
            for (c, b) in coeffs.iter().zip(&basis) {
                if !c.is_zero() {
                    acc = acc.add(&b.scale(c)).expect("same size");
                }
            }
            flatten(&acc)
        })
        .collect();
    let mut all = flat;
    all.extend(radical.iter().cloned());
    let _ = unflatten;
    Ok(crate::linalg::rank_of(&all) == mats.len() + radical.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn heisenberg() -> LieAlgebra {
        let mut h = LieAlgebra::abelian(3);
        h.add_constant(0, 1, 2, &int(1)).unwrap();
        h
    }

    #[test]
    fn antisymmetric_storage() {
        let h = heisenberg();
        assert_eq!(h.structure_constant(1, 0, 2), int(-1));
        let mut bad = LieAlgebra::abelian(2);
        assert_eq!(bad.add_constant(1, 1, 0, &int(1)), Err(Error::Antisymmetry(1)));
        assert!(bad.add_constant(0, 5, 0, &int(1)).is_err());
    }

    #[test]
    fn bracket_dimension_mismatch() {
        let h = heisenberg();
        assert!(matches!(
            h.bracket(&Vector::zeros(2), &Vector::zeros(3)),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn abelian_series() {
        assert_eq!(derived_series(&LieAlgebra::abelian(5)), vec![5, 0]);
        assert_eq!(central_series(&LieAlgebra::abelian(3)), vec![3, 0]);
        assert_eq!(center_dim(&LieAlgebra::abelian(4)), 4);
    }

    #[test]
    fn heisenberg_invariants() {
        let h = heisenberg();
        assert!(check_jacobi(&h).is_ok());
        assert_eq!(central_series(&h), vec![3, 1, 0]);
        assert_eq!(center_dim(&h), 1);
        assert!(is_nilpotent_element(&h, &Vector::unit(3, 0)).unwrap());
    }

    #[test]
    fn non_solvable_series_stabilizes() {
        // sl2: [h,e]=2e, [h,f]=-2f, [e,f]=h
        let mut s = LieAlgebra::new(vec!["h".into(), "e".into(), "f".into()]);
        s.add_constant(0, 1, 1, &int(2)).unwrap();
        s.add_constant(0, 2, 2, &int(-2)).unwrap();
        s.add_constant(1, 2, 0, &int(1)).unwrap();
        assert!(check_jacobi(&s).is_ok());
        assert_eq!(derived_series(&s), vec![3]);
        assert!(!is_solvable(&s));
        assert!(!is_nilpotent_element(&s, &Vector::unit(3, 0)).unwrap());
        assert!(is_nilpotent_element(&s, &Vector::unit(3, 1)).unwrap());
    }

    fn diag(v: &[i64]) -> Matrix {
        Matrix::diagonal_from(&v.iter().map(|&x| int(x)).collect::<Vec<_>>())
    }

    #[test]
    fn nilindependence_cases() {
        let r = nilindependent(&[]).unwrap();
        assert!(r.independent);
        assert_eq!(r.method, NilMethod::EmptyInput);
        assert!(nilindependent(&[diag(&[1, 0, 0]), diag(&[0, 1, 0])]).unwrap().independent);
        let a = Matrix::from_rows(vec![vec![int(1), int(2)], vec![int(3), int(4)]]).unwrap();
        let r = nilindependent(&[a.clone(), a.scale(&int(2))]).unwrap();
        assert!(!r.independent);
        assert_eq!(r.method, NilMethod::TraceForm);
    }

    #[test]
    fn trace_form_sees_nilpotent_combination() {
        // A = diag-ish block plus nilpotent part, B = A + N with N nilpotent, commuting
        let a = Matrix::from_rows(vec![
            vec![int(1), int(0), int(0)],
            vec![int(0), int(1), int(0)],
            vec![int(0), int(0), int(2)],
        ])
        .unwrap();
        let n = Matrix::from_rows(vec![
            vec![int(0), int(0), int(0)],
            vec![int(1), int(0), int(0)],
            vec![int(0), int(0), int(0)],
        ])
        .unwrap();
        let b = a.add(&n).unwrap();
        assert!(a.commutator(&b).unwrap().is_zero());
        // B - A = N is nilpotent
        assert!(!nilindependent(&[a.clone(), b]).unwrap().independent);
        let c = Matrix::from_rows(vec![
            vec![int(1), int(0), int(0)],
            vec![int(0), int(1), int(0)],
            vec![int(0), int(0), int(0)],
        ])
        .unwrap();
        let lower_c = c.add(&n).unwrap();
        assert!(nilindependent(&[a, lower_c]).unwrap().independent);
    }
}
