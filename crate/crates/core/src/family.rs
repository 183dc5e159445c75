//! Extension families: structure matrices `A^α`, the `[X^α, X^β]` table and
//! their assembly into a full Lie algebra `F ∔ T(n)`.
//!
//! The basis of an assembled algebra is `X^1, …, X^f` followed by the `N_ik`
//! in [`BasisOrder`]. Structure matrices use the row convention
//! `[X^α, N_y] = Σ_z A^α[y][z] N_z`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisOrder, PairIdx};
use crate::error::{Error, Result};
use crate::expr::ParamExpr;
use crate::liecore::LieAlgebra;
use crate::linalg::Matrix;
use crate::scalar::{ratio, Scalar};
use crate::triangular::build_tn;

/// Which normalizations are reachable; all arithmetic stays rational.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FieldFlag {
    #[serde(rename = "R")]
    Real,
    #[serde(rename = "C")]
    Complex,
}

impl fmt::Display for FieldFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldFlag::Real => "R",
            FieldFlag::Complex => "C",
        })
    }
}

impl FromStr for FieldFlag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" | "r" => Ok(FieldFlag::Real),
            "C" | "c" => Ok(FieldFlag::Complex),
            other => Err(Error::Document(format!("unknown field `{other}` (expected R or C)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ParamDomain {
    #[default]
    Any,
    Nonzero,
}

impl fmt::Display for ParamDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParamDomain::Any => "any",
            ParamDomain::Nonzero => "nonzero",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Param {
    pub name: String,
    pub domain: ParamDomain,
}

impl Param {
    pub fn any(name: &str) -> Self {
        Self { name: name.into(), domain: ParamDomain::Any }
    }

    pub fn nonzero(name: &str) -> Self {
        Self { name: name.into(), domain: ParamDomain::Nonzero }
    }

    pub fn admits(&self, v: &Scalar) -> bool {
        self.domain == ParamDomain::Any || !v.is_zero()
    }
}

/// `r × r` matrix of parameter expressions, stored sparsely by flat position.
#[derive(Clone, PartialEq, Eq)]
pub struct StructureMatrix {
    order: BasisOrder,
    entries: BTreeMap<(usize, usize), ParamExpr>,
}

impl fmt::Debug for StructureMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(&(x, y), e)| format!("{}{}: {e}", self.order.pair(x).label(), self.order.pair(y).label()))
            .collect();
        write!(f, "A[{}]", parts.join(", "))
    }
}

impl StructureMatrix {
    pub fn zero(n: usize) -> Result<Self> {
        Ok(Self { order: BasisOrder::new(n)?, entries: BTreeMap::new() })
    }

    /// Diagonal from the `n − 1` generator values `A_{p(p+1),p(p+1)}`;
    /// other diagonal entries follow `A_{ik,ik} = Σ_{p=i}^{k−1} A_{p(p+1),p(p+1)}`.
    pub fn from_generators(n: usize, gens: &[ParamExpr]) -> Result<Self> {
        if gens.len() != n - 1 {
            return Err(Error::DimensionMismatch { expected: n - 1, found: gens.len() });
        }
        let mut m = Self::zero(n)?;
        for idx in 0..m.size() {
            let p = m.order.pair(idx);
            let mut d = ParamExpr::zero();
            for g in &gens[p.i - 1..p.k - 1] {
                d = d.add(g);
            }
            m.set(idx, idx, d);
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.order.n()
    }

    pub fn order(&self) -> &BasisOrder {
        &self.order
    }

    pub fn size(&self) -> usize {
        self.order.len()
    }

    pub fn get(&self, row: usize, col: usize) -> ParamExpr {
        self.entries.get(&(row, col)).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, row: usize, col: usize, value: ParamExpr) {
        if value.is_zero() {
            self.entries.remove(&(row, col));
        } else {
            self.entries.insert((row, col), value);
        }
    }

    pub fn get_pair(&self, row: PairIdx, col: PairIdx) -> Result<ParamExpr> {
        Ok(self.get(self.order.pair_to_index(row)?, self.order.pair_to_index(col)?))
    }

    pub fn set_pair(&mut self, row: PairIdx, col: PairIdx, value: ParamExpr) -> Result<()> {
        let (r, c) = (self.order.pair_to_index(row)?, self.order.pair_to_index(col)?);
        self.set(r, c, value);
        Ok(())
    }

    /// Nonzero entries in row-major flat order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &ParamExpr)> {
        self.entries.iter().map(|(&(r, c), e)| (r, c, e))
    }

    pub fn diagonal(&self) -> Vec<ParamExpr> {
        (0..self.size()).map(|i| self.get(i, i)).collect()
    }

    /// The `n − 1` values `A_{p(p+1),p(p+1)}`.
    pub fn generators(&self) -> Vec<ParamExpr> {
        (0..self.n() - 1).map(|i| self.get(i, i)).collect()
    }

    pub fn off_diagonal(&self) -> Vec<(usize, usize, ParamExpr)> {
        self.entries.iter().filter(|((r, c), _)| r != c).map(|(&(r, c), e)| (r, c, e.clone())).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.entries.keys().all(|(r, c)| r <= c)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.entries.values().flat_map(ParamExpr::variables).collect()
    }

    pub fn map(&self, f: impl Fn(&ParamExpr) -> ParamExpr) -> StructureMatrix {
        let mut out = StructureMatrix { order: self.order.clone(), entries: BTreeMap::new() };
        for (&(r, c), e) in &self.entries {
            out.set(r, c, f(e));
        }
        out
    }

    pub fn try_map(&self, f: impl Fn(&ParamExpr) -> Result<ParamExpr>) -> Result<StructureMatrix> {
        let mut out = StructureMatrix { order: self.order.clone(), entries: BTreeMap::new() };
        for (&(r, c), e) in &self.entries {
            out.set(r, c, f(e)?);
        }
        Ok(out)
    }

    pub fn scale(&self, s: &Scalar) -> StructureMatrix {
        self.map(|e| e.scale(s))
    }

    pub fn bind(&self, values: &BTreeMap<String, Scalar>) -> StructureMatrix {
        self.map(|e| e.bind(values))
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> StructureMatrix {
        self.map(|e| e.rename(map))
    }

    pub fn instantiate(&self, values: &BTreeMap<String, Scalar>) -> Result<Matrix> {
        let mut m = Matrix::zeros(self.size(), self.size());
        for (&(r, c), e) in &self.entries {
            m[(r, c)] = e.eval(values)?;
        }
        Ok(m)
    }

    pub fn from_matrix(n: usize, m: &Matrix) -> Result<StructureMatrix> {
        let mut out = Self::zero(n)?;
        if m.rows() != out.size() || m.cols() != out.size() {
            return Err(Error::DimensionMismatch { expected: out.size(), found: m.rows() });
        }
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                out.set(r, c, ParamExpr::from(&m[(r, c)]));
            }
        }
        Ok(out)
    }

    /// `self · other` as expressions (degree-capped).
    pub fn try_mul(&self, other: &StructureMatrix) -> Result<StructureMatrix> {
        let mut out = StructureMatrix { order: self.order.clone(), entries: BTreeMap::new() };
        let mut acc: BTreeMap<(usize, usize), ParamExpr> = BTreeMap::new();
        for (&(r, k), a) in &self.entries {
            for (&(k2, c), b) in other.entries.range((k, 0)..(k + 1, 0)) {
                debug_assert_eq!(k, k2);
                let e = acc.entry((r, c)).or_default();
                *e = e.add(&a.try_mul(b)?);
            }
        }
        for ((r, c), e) in acc {
            out.set(r, c, e);
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &StructureMatrix) -> Result<StructureMatrix> {
        let ab = self.try_mul(other)?;
        let ba = other.try_mul(self)?;
        let mut out = ab;
        for (&(r, c), e) in &ba.entries {
            let v = out.get(r, c).sub(e);
            out.set(r, c, v);
        }
        Ok(out)
    }

    /// Conjugation `G A G⁻¹` by a concrete change of nilradical basis.
    pub fn conjugate(&self, g: &SparseMatrix, g_inv: &SparseMatrix) -> StructureMatrix {
        let left = sparse_times_expr(g, &self.entries);
        let mut acc: BTreeMap<(usize, usize), ParamExpr> = BTreeMap::new();
        for (&(r, k), e) in &left {
            if let Some(row) = g_inv.get(&k) {
                for (&c, s) in row {
                    let v = acc.entry((r, c)).or_default();
                    *v = v.add(&e.scale(s));
                }
            }
        }
        let mut out = StructureMatrix { order: self.order.clone(), entries: BTreeMap::new() };
        for ((r, c), e) in acc {
            out.set(r, c, e);
        }
        out
    }
}

/// Row-sparse scalar matrix: row → (col → value).
pub type SparseMatrix = BTreeMap<usize, BTreeMap<usize, Scalar>>;

fn sparse_times_expr(
    g: &SparseMatrix,
    a: &BTreeMap<(usize, usize), ParamExpr>,
) -> BTreeMap<(usize, usize), ParamExpr> {
    let mut acc: BTreeMap<(usize, usize), ParamExpr> = BTreeMap::new();
    for (&r, row) in g {
        for (&k, s) in row {
            for (&(_, c), e) in a.range((k, 0)..(k + 1, 0)) {
                let v = acc.entry((r, c)).or_default();
                *v = v.add(&e.scale(s));
            }
        }
    }
    acc.retain(|_, e| !e.is_zero());
    acc
}

/// `[X^α, X^β] = Σ_pq σ^{αβ}_pq N_pq`, stored for `α < β` (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SigmaTable {
    f: usize,
    entries: BTreeMap<(usize, usize), BTreeMap<usize, ParamExpr>>,
}

impl SigmaTable {
    pub fn zero(f: usize) -> Self {
        Self { f, entries: BTreeMap::new() }
    }

    pub fn f(&self) -> usize {
        self.f
    }

    /// Coefficient of `N_pos` in `[X^α, X^β]`.
    pub fn get(&self, alpha: usize, beta: usize, pos: usize) -> ParamExpr {
        if alpha == beta {
            return ParamExpr::zero();
        }
        let (key, flip) = if alpha < beta { ((alpha, beta), false) } else { ((beta, alpha), true) };
        let v = self.entries.get(&key).and_then(|m| m.get(&pos)).cloned().unwrap_or_default();
        if flip {
            v.neg()
        } else {
            v
        }
    }

    pub fn set(&mut self, alpha: usize, beta: usize, pos: usize, value: ParamExpr) -> Result<()> {
        if alpha == beta {
            if value.is_zero() {
                return Ok(());
            }
            return Err(Error::Antisymmetry(alpha));
        }
        if alpha >= self.f || beta >= self.f {
            return Err(Error::IndexOutOfRange { idx: alpha.max(beta), n: self.f, r: self.f });
        }
        let (key, v) = if alpha < beta { ((alpha, beta), value) } else { ((beta, alpha), value.neg()) };
        let row = self.entries.entry(key).or_default();
        if v.is_zero() {
            row.remove(&pos);
        } else {
            row.insert(pos, v);
        }
        if row.is_empty() {
            self.entries.remove(&key);
        }
        Ok(())
    }

    pub fn add(&mut self, alpha: usize, beta: usize, pos: usize, value: &ParamExpr) -> Result<()> {
        let v = self.get(alpha, beta, pos).add(value);
        self.set(alpha, beta, pos, v)
    }

    /// `(α, β, pos, value)` with `α < β`.
    pub fn entries(&self) -> Vec<(usize, usize, usize, ParamExpr)> {
        self.entries
            .iter()
            .flat_map(|(&(a, b), row)| row.iter().map(move |(&p, e)| (a, b, p, e.clone())))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when every nonzero coefficient sits on position `top`.
    pub fn supported_on(&self, top: usize) -> bool {
        self.entries.values().all(|row| row.keys().all(|&p| p == top))
    }

    pub fn map(&self, f: impl Fn(&ParamExpr) -> ParamExpr) -> SigmaTable {
        let mut out = SigmaTable::zero(self.f);
        for (a, b, p, e) in self.entries() {
            out.set(a, b, p, f(&e)).expect("indices already valid");
        }
        out
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.entries.values().flat_map(|r| r.values().flat_map(ParamExpr::variables)).collect()
    }
}

/// A candidate `L(n,f)`: `f` structure matrices over `T(n)` and the `[X, X]` table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionFamily {
    pub n: usize,
    pub field: FieldFlag,
    pub matrices: Vec<StructureMatrix>,
    pub sigma: SigmaTable,
    pub params: Vec<Param>,
}

impl ExtensionFamily {
    pub fn new(
        n: usize,
        field: FieldFlag,
        matrices: Vec<StructureMatrix>,
        sigma: SigmaTable,
        params: Vec<Param>,
    ) -> Result<Self> {
        let f = matrices.len();
        if n < 3 {
            return Err(Error::SizeTooSmall { n, min: 3, what: "an extension of T(n)" });
        }
        if f == 0 || f > n - 1 {
            return Err(Error::FOutOfRange { n, f, max: n - 1 });
        }
        if matrices.iter().any(|m| m.n() != n) {
            return Err(Error::Document("structure matrices disagree on n".into()));
        }
        if sigma.f() != f {
            return Err(Error::DimensionMismatch { expected: f, found: sigma.f() });
        }
        Ok(Self { n, field, matrices, sigma, params })
    }

    pub fn f(&self) -> usize {
        self.matrices.len()
    }

    pub fn r(&self) -> usize {
        crate::basis::tn_dim(self.n)
    }

    pub fn dim(&self) -> usize {
        self.f() + self.r()
    }

    pub fn order(&self) -> &BasisOrder {
        self.matrices[0].order()
    }

    /// Every variable that occurs, in sorted order.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut v: BTreeSet<String> = self.matrices.iter().flat_map(StructureMatrix::variables).collect();
        v.extend(self.sigma.variables());
        v
    }

    /// Declared parameters plus any undeclared variables (domain `any`).
    pub fn all_params(&self) -> Vec<Param> {
        let mut out = self.params.clone();
        for v in self.variables() {
            if !out.iter().any(|p| p.name == v) {
                out.push(Param::any(&v));
            }
        }
        out
    }

    pub fn is_concrete(&self) -> bool {
        self.variables().is_empty()
    }

    /// Substitutes values; bound parameters are dropped from the parameter list.
    pub fn bind(&self, values: &BTreeMap<String, Scalar>) -> Result<ExtensionFamily> {
        for p in &self.params {
            if let Some(v) = values.get(&p.name) {
                if !p.admits(v) {
                    return Err(Error::ParamDomain {
                        name: p.name.clone(),
                        value: v.to_string(),
                        domain: p.domain.to_string(),
                    });
                }
            }
        }
        Ok(ExtensionFamily {
            n: self.n,
            field: self.field,
            matrices: self.matrices.iter().map(|m| m.bind(values)).collect(),
            sigma: self.sigma.map(|e| e.bind(values)),
            params: self.params.iter().filter(|p| !values.contains_key(&p.name)).cloned().collect(),
        })
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> ExtensionFamily {
        ExtensionFamily {
            n: self.n,
            field: self.field,
            matrices: self.matrices.iter().map(|m| m.rename(map)).collect(),
            sigma: self.sigma.map(|e| e.rename(map)),
            params: self
                .params
                .iter()
                .map(|p| Param { name: map.get(&p.name).cloned().unwrap_or_else(|| p.name.clone()), domain: p.domain })
                .collect(),
        }
    }

    pub fn instantiate_matrices(&self, values: &BTreeMap<String, Scalar>) -> Result<Vec<Matrix>> {
        self.matrices.iter().map(|m| m.instantiate(values)).collect()
    }

    pub fn basis_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.f()).map(|a| format!("X{a}")).collect();
        names.extend(self.order().pairs().iter().map(|p| format!("N{}", p.label())));
        names
    }

    /// Full algebra on `X^1..X^f, N`; every variable must be bound.
    pub fn assemble(&self, values: &BTreeMap<String, Scalar>) -> Result<LieAlgebra> {
        let f = self.f();
        let t = build_tn(self.n)?;
        let mut alg = LieAlgebra::new(self.basis_names());
        for (x, y, z, c) in t.algebra().canonical_constants() {
            alg.add_constant(f + x, f + y, f + z, &c)?;
        }
        for (alpha, m) in self.matrices.iter().enumerate() {
            for (row, col, e) in m.entries() {
                alg.add_constant(alpha, f + row, f + col, &e.eval(values)?)?;
            }
        }
        for (a, b, p, e) in self.sigma.entries() {
            alg.add_constant(a, b, f + p, &e.eval(values)?)?;
        }
        Ok(alg)
    }

    /// Rebuilds a family from an assembled algebra whose basis is `X^1..X^f, N`.
    pub fn from_algebra(n: usize, f: usize, field: FieldFlag, alg: &LieAlgebra) -> Result<ExtensionFamily> {
        let r = crate::basis::tn_dim(n);
        if alg.dim() != f + r {
            return Err(Error::DimensionMismatch { expected: f + r, found: alg.dim() });
        }
        let mut matrices = Vec::with_capacity(f);
        for alpha in 0..f {
            let mut m = StructureMatrix::zero(n)?;
            for y in 0..r {
                for (z, c) in alg.bracket_basis(alpha, f + y) {
                    if z < f {
                        return Err(Error::Document(format!("[X{}, N] leaves the nilradical", alpha + 1)));
                    }
                    m.set(y, z - f, ParamExpr::from(c));
                }
            }
            matrices.push(m);
        }
        let mut sigma = SigmaTable::zero(f);
        for a in 0..f {
            for b in a + 1..f {
                for (z, c) in alg.bracket_basis(a, b) {
                    if z < f {
                        return Err(Error::Document(format!("[X{}, X{}] leaves the nilradical", a + 1, b + 1)));
                    }
                    sigma.set(a, b, z - f, ParamExpr::from(c))?;
                }
            }
        }
        ExtensionFamily::new(n, field, matrices, sigma, Vec::new())
    }
}

/// Seed used whenever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 1729;

/// Deterministic small rationals used as "generic" parameter samples.
pub fn sample_scalar(rng: &mut ChaCha8Rng, nonzero: bool) -> Scalar {
    loop {
        let p: i64 = rng.gen_range(-12..=12);
        let q: i64 = rng.gen_range(1..=5);
        if nonzero && p == 0 {
            continue;
        }
        return ratio(p, q);
    }
}

/// One value per parameter of `params`, honoring domains.
pub fn sample_params(params: &[Param], rng: &mut ChaCha8Rng) -> BTreeMap<String, Scalar> {
    params
        .iter()
        .map(|p| (p.name.clone(), sample_scalar(rng, p.domain == ParamDomain::Nonzero)))
        .collect()
}
