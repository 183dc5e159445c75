//! Reduction of extension families to canonical form.
//!
//! Allowed moves: shifting `X^α` by nilradical elements (`μ`), the unipotent
//! nilradical automorphism `G1 = I + Σ g_m E_slot(m)`, the diagonal automorphism
//! `G2` with `g_ab = Π_{p=a}^{b−1} g_p`, and rescaling each `X^α`.
//! Over ℝ the `G2` generators must be real, so only some sign patterns of the
//! surviving off-diagonal entries can be flipped; the reachable patterns form
//! an `𝔽₂`-subspace and the lexicographically smallest coset member is kept.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand_chacha::ChaCha8Rng;

use crate::basis::{BasisOrder, PairIdx};
use crate::error::{Error, Result};
use crate::expr::ParamExpr;
use crate::family::{sample_scalar, ExtensionFamily, FieldFlag, SparseMatrix, StructureMatrix, DEFAULT_SEED};
use crate::jacobi::{lemma1_slots, mu_image, sigma_constraints, verify_family_jacobi, SigmaRule};
use crate::liecore::{check_jacobi, nilindependent};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// `X^α → X^α + Σ μ_pq N_pq`. A `μ_1n` entry only moves `σ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuShift {
    pub alpha: usize,
    pub mu: BTreeMap<PairIdx, ParamExpr>,
}

impl MuShift {
    pub fn new(alpha: usize) -> Self {
        Self { alpha, mu: BTreeMap::new() }
    }

    pub fn with(mut self, p: PairIdx, value: impl Into<ParamExpr>) -> Self {
        self.mu.insert(p, value.into());
        self
    }
}

/// One coefficient per slot of [`lemma1_slots`], in the same order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct G1Transform {
    pub g: Vec<Scalar>,
}

/// Generators `g_{p(p+1)}` for `p = 1..n−1` (index `p − 1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct G2Transform {
    pub g: Vec<Scalar>,
}

impl G2Transform {
    pub fn identity(n: usize) -> Self {
        Self { g: vec![Scalar::one(); n - 1] }
    }

    /// `g_ab = Π_{p=a}^{b−1} g_{p(p+1)}`.
    pub fn factor(&self, p: PairIdx) -> Scalar {
        self.g[p.i - 1..p.k - 1].iter().fold(Scalar::one(), |acc, x| acc * x)
    }

    pub fn compose(&self, other: &G2Transform) -> G2Transform {
        G2Transform { g: self.g.iter().zip(&other.g).map(|(a, b)| a * b).collect() }
    }
}

fn check_alpha(fam: &ExtensionFamily, alpha: usize) -> Result<()> {
    if alpha >= fam.f() {
        return Err(Error::IndexOutOfRange { idx: alpha, n: fam.n, r: fam.f() });
    }
    Ok(())
}

pub fn apply_mu(fam: &ExtensionFamily, shift: &MuShift) -> Result<ExtensionFamily> {
    check_alpha(fam, shift.alpha)?;
    let order = fam.order().clone();
    let r = order.len();
    let mut out = fam.clone();
    let mut sum = vec![ParamExpr::zero(); r * r];
    let mut mu_vec = vec![ParamExpr::zero(); r];
    for (&p, m) in &shift.mu {
        let pos = order.pair_to_index(p)?;
        mu_vec[pos] = m.clone();
        for (u, c) in mu_image(&order, p).iter().enumerate() {
            if !c.is_zero() {
                sum[u] = sum[u].add(&m.scale(c));
            }
        }
    }
    let a = &mut out.matrices[shift.alpha];
    for (u, v) in sum.into_iter().enumerate() {
        if !v.is_zero() {
            let (x, y) = (u / r, u % r);
            let nv = a.get(x, y).add(&v);
            a.set(x, y, nv);
        }
    }
    // [X^α + μN, X^β] = σ^{αβ} − μᵀA^β
    for beta in 0..fam.f() {
        if beta == shift.alpha {
            continue;
        }
        let b = &fam.matrices[beta];
        let mut delta: BTreeMap<usize, ParamExpr> = BTreeMap::new();
        for (y, z, e) in b.entries() {
            if mu_vec[y].is_zero() {
                continue;
            }
            let d = delta.entry(z).or_default();
            *d = d.sub(&mu_vec[y].try_mul(e)?);
        }
        for (z, d) in delta {
            out.sigma.add(shift.alpha, beta, z, &d)?;
        }
    }
    Ok(out)
}

/// Simultaneous change `N' = G N` of the nilradical basis with `G` invertible.
/// The caller is responsible for `G` being an automorphism of `T(n)`.
pub fn apply_nilradical_change(fam: &ExtensionFamily, g: &SparseMatrix, g_inv: &SparseMatrix) -> ExtensionFamily {
    let mut out = fam.clone();
    for m in &mut out.matrices {
        *m = m.conjugate(g, g_inv);
    }
    // σ'ᵀ = σᵀ G⁻¹
    let mut sigma = crate::family::SigmaTable::zero(fam.f());
    for (a, b, p, e) in fam.sigma.entries() {
        if let Some(row) = g_inv.get(&p) {
            for (&z, c) in row {
                sigma.add(a, b, z, &e.scale(c)).expect("valid indices");
            }
        }
    }
    out.sigma = sigma;
    out
}

fn identity_sparse(r: usize) -> SparseMatrix {
    (0..r).map(|i| (i, BTreeMap::from([(i, Scalar::one())]))).collect()
}

/// `G = I + Δ` and `G⁻¹ = I − Δ` with `Δ = Σ g_m E_slot(m)`; `Δ² = 0` for `n ≥ 4`.
pub fn g1_matrices(order: &BasisOrder, t: &G1Transform) -> Result<(SparseMatrix, SparseMatrix)> {
    let n = order.n();
    if n < 4 {
        return Err(Error::SizeTooSmall { n, min: 4, what: "the unipotent slot transformation" });
    }
    let slots = lemma1_slots(n);
    if t.g.len() != slots.len() {
        return Err(Error::DimensionMismatch { expected: slots.len(), found: t.g.len() });
    }
    let mut g = identity_sparse(order.len());
    let mut g_inv = identity_sparse(order.len());
    for ((x, y), c) in slots.iter().zip(&t.g) {
        if c.is_zero() {
            continue;
        }
        let (xi, yi) = (order.pair_to_index(*x)?, order.pair_to_index(*y)?);
        g.entry(xi).or_default().insert(yi, c.clone());
        g_inv.entry(xi).or_default().insert(yi, -c.clone());
    }
    Ok((g, g_inv))
}

pub fn apply_g1(fam: &ExtensionFamily, t: &G1Transform) -> Result<ExtensionFamily> {
    let (g, g_inv) = g1_matrices(fam.order(), t)?;
    Ok(apply_nilradical_change(fam, &g, &g_inv))
}

pub fn g2_matrices(order: &BasisOrder, t: &G2Transform) -> Result<(SparseMatrix, SparseMatrix)> {
    if t.g.len() != order.n() - 1 {
        return Err(Error::DimensionMismatch { expected: order.n() - 1, found: t.g.len() });
    }
    if let Some(p) = t.g.iter().position(Zero::is_zero) {
        return Err(Error::ZeroGenerator(PairIdx::new(p + 1, p + 2)));
    }
    let mut g = SparseMatrix::new();
    let mut g_inv = SparseMatrix::new();
    for (idx, &p) in order.pairs().iter().enumerate() {
        let f = t.factor(p);
        g_inv.insert(idx, BTreeMap::from([(idx, Scalar::one() / &f)]));
        g.insert(idx, BTreeMap::from([(idx, f)]));
    }
    Ok((g, g_inv))
}

pub fn apply_g2(fam: &ExtensionFamily, t: &G2Transform) -> Result<ExtensionFamily> {
    let (g, g_inv) = g2_matrices(fam.order(), t)?;
    Ok(apply_nilradical_change(fam, &g, &g_inv))
}

/// `A_{ab,ab} − A_{ik,ik}` for each slot `(ik, ab)`; `G1` moves the slot by `g` times this.
pub fn slot_brackets(m: &StructureMatrix) -> Vec<ParamExpr> {
    let o = m.order();
    lemma1_slots(m.n())
        .into_iter()
        .map(|(x, y)| {
            let (xi, yi) = (o.idx(x.i, x.k), o.idx(y.i, y.k));
            m.get(yi, yi).sub(&m.get(xi, xi))
        })
        .collect()
}

/// Slots whose bracket factor vanishes identically for every matrix.
pub fn resonance_slots(fam: &ExtensionFamily) -> Vec<(PairIdx, PairIdx)> {
    let brackets: Vec<Vec<ParamExpr>> = fam.matrices.iter().map(slot_brackets).collect();
    lemma1_slots(fam.n)
        .into_iter()
        .enumerate()
        .filter(|(s, _)| brackets.iter().all(|b| b[*s].is_zero()))
        .map(|(_, slot)| slot)
        .collect()
}

/// Exponent row of slot `(ik, ab)` under `G2`: `e(ik) − e(ab)` over the generators.
pub fn slot_exponents(n: usize, x: PairIdx, y: PairIdx) -> Vec<i64> {
    (1..n).map(|p| i64::from(x.covers(p)) - i64::from(y.covers(p))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransformStep {
    Mu { alpha: usize, values: Vec<(PairIdx, ParamExpr)> },
    /// `g = −numerator / denominator` for the given slot.
    G1 { slot: (PairIdx, PairIdx), numerator: ParamExpr, denominator: ParamExpr },
    Scale { alpha: usize, divisor: Scalar },
    /// `g_{p(p+1)}` written as products of powers, one string per generator.
    G2 { generators: Vec<String> },
}

impl fmt::Display for TransformStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformStep::Mu { alpha, values } => {
                let parts: Vec<String> = values.iter().map(|(p, v)| format!("mu_{} = {v}", p.label())).collect();
                write!(f, "shift X{}: {}", alpha + 1, parts.join(", "))
            }
            TransformStep::G1 { slot, numerator, denominator } => write!(
                f,
                "G1 slot ({},{}): g = -({numerator})/({denominator})",
                slot.0.label(),
                slot.1.label()
            ),
            TransformStep::Scale { alpha, divisor } => write!(f, "scale X{} by 1/({divisor})", alpha + 1),
            TransformStep::G2 { generators } => write!(f, "G2: {}", generators.join(", ")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub family: ExtensionFamily,
    pub log: Vec<TransformStep>,
}

fn validate(fam: &ExtensionFamily) -> Result<()> {
    if fam.n < 4 {
        return Err(Error::SizeTooSmall { n: fam.n, min: 4, what: "canonical reduction" });
    }
    if let Some(a) = fam.matrices.iter().position(StructureMatrix::is_zero) {
        return Err(Error::NotNilindependent(format!(
            "X{} acts as zero, so the nilradical would be larger",
            a + 1
        )));
    }
    let sample = if fam.is_concrete() {
        let alg = fam.assemble(&BTreeMap::new())?;
        let rep = check_jacobi(&alg);
        if !rep.is_ok() {
            return Err(Error::JacobiViolated(rep.describe(&alg)));
        }
        BTreeMap::new()
    } else {
        let rep = verify_family_jacobi(fam, 3, DEFAULT_SEED)?;
        if !rep.is_ok() {
            return Err(Error::JacobiViolated(rep.describe()));
        }
        rep.samples[0].values.clone()
    };
    if !fam.matrices.iter().all(StructureMatrix::is_upper_triangular) {
        return Err(Error::NotReducedForm("structure matrices must be upper triangular".into()));
    }
    let mats = fam.instantiate_matrices(&sample)?;
    if !nilindependent(&mats)?.independent {
        return Err(Error::NotNilindependent(
            "a nontrivial combination of the structure matrices is nilpotent".into(),
        ));
    }
    Ok(())
}

/// Shift values that clear the non-slot entries of one matrix.
pub fn mu_schedule(m: &StructureMatrix) -> BTreeMap<PairIdx, ParamExpr> {
    let n = m.n();
    let o = m.order();
    let mut mu = BTreeMap::new();
    for k in 2..n {
        let v = m.get(o.idx(k, k + 1), o.idx(1, k + 1)).neg();
        if !v.is_zero() {
            mu.insert(PairIdx::new(1, k), v);
        }
    }
    for l in 2..n {
        for k in l + 1..=n {
            let v = m.get(o.idx(l - 1, l), o.idx(l - 1, k));
            if !v.is_zero() {
                mu.insert(PairIdx::new(l, k), v);
            }
        }
    }
    mu
}

fn check_slot_form(fam: &ExtensionFamily) -> Result<()> {
    let o = fam.order();
    let slots: Vec<(usize, usize)> =
        lemma1_slots(fam.n).iter().map(|(x, y)| (o.idx(x.i, x.k), o.idx(y.i, y.k))).collect();
    for (alpha, m) in fam.matrices.iter().enumerate() {
        for (r, c, _) in m.off_diagonal() {
            if !slots.contains(&(r, c)) {
                return Err(Error::NotReducedForm(format!(
                    "X{} keeps entry ({},{}) after the shift schedule",
                    alpha + 1,
                    o.pair(r).label(),
                    o.pair(c).label()
                )));
            }
        }
        let expected = StructureMatrix::from_generators(fam.n, &m.generators())?;
        if expected.diagonal() != m.diagonal() {
            return Err(Error::NotReducedForm(format!("X{} breaks the diagonal sum rule", alpha + 1)));
        }
    }
    if !fam.sigma.supported_on(o.top()) {
        return Err(Error::NotReducedForm("[X, X] has components outside N_1n".into()));
    }
    Ok(())
}

fn eliminate_slots(fam: &mut ExtensionFamily, log: &mut Vec<TransformStep>) -> Result<()> {
    let o = fam.order().clone();
    for (x, y) in lemma1_slots(fam.n) {
        let (xi, yi) = (o.idx(x.i, x.k), o.idx(y.i, y.k));
        let brackets: Vec<ParamExpr> =
            fam.matrices.iter().map(|m| m.get(yi, yi).sub(&m.get(xi, xi))).collect();
        let Some(pivot) = brackets.iter().position(|b| !b.is_zero()) else {
            continue;
        };
        let bp = brackets[pivot].clone();
        let ep = fam.matrices[pivot].get(xi, yi);
        if ep.is_zero() && fam.matrices.iter().all(|m| m.get(xi, yi).is_zero()) {
            continue;
        }
        for (beta, m) in fam.matrices.iter_mut().enumerate() {
            let numer = m.get(xi, yi).try_mul(&bp)?.sub(&ep.try_mul(&brackets[beta])?);
            let value = if numer.is_zero() {
                ParamExpr::zero()
            } else if let Some(c) = bp.as_constant() {
                numer.div_scalar(&c)
            } else {
                return Err(Error::SymbolicNormalization(bp.to_string()));
            };
            m.set(xi, yi, value);
        }
        if !ep.is_zero() {
            log.push(TransformStep::G1 { slot: (x, y), numerator: ep, denominator: bp });
        }
    }
    Ok(())
}

fn scale_generators(fam: &mut ExtensionFamily, log: &mut Vec<TransformStep>) -> Result<()> {
    for alpha in 0..fam.f() {
        let m = &fam.matrices[alpha];
        let Some(lead) = m.generators().into_iter().find(|g| !g.is_zero()) else {
            return Err(Error::NotNilindependent(format!("X{} has a zero diagonal", alpha + 1)));
        };
        let c = lead.as_constant().ok_or_else(|| Error::SymbolicNormalization(lead.to_string()))?;
        if c.is_one() {
            continue;
        }
        let inv = Scalar::one() / &c;
        fam.matrices[alpha] = m.scale(&inv);
        for beta in 0..fam.f() {
            if beta == alpha {
                continue;
            }
            let top = fam.order().top();
            let v = fam.sigma.get(alpha, beta, top).scale(&inv);
            fam.sigma.set(alpha, beta, top, v)?;
        }
        log.push(TransformStep::Scale { alpha, divisor: c });
    }
    Ok(())
}

fn clean_sigma(fam: &mut ExtensionFamily, log: &mut Vec<TransformStep>) -> Result<()> {
    if fam.sigma.is_zero() {
        return Ok(());
    }
    let SigmaRule::ForcedZero { witness } = sigma_constraints(fam) else {
        return Ok(());
    };
    let top = fam.order().top();
    let d = fam.matrices[witness].get(top, top);
    let d = d.as_constant().ok_or_else(|| Error::SymbolicNormalization(d.to_string()))?;
    let n = fam.n;
    for beta in 0..fam.f() {
        if beta == witness {
            continue;
        }
        let s = fam.sigma.get(beta, witness, top);
        if s.is_zero() {
            continue;
        }
        let m = s.div_scalar(&d);
        let shift = MuShift::new(beta).with(PairIdx::new(1, n), m.clone());
        *fam = apply_mu(fam, &shift)?;
        log.push(TransformStep::Mu { alpha: beta, values: vec![(PairIdx::new(1, n), m)] });
    }
    if !fam.sigma.is_zero() {
        return Err(Error::JacobiViolated(
            "the [X, X] constants are inconsistent with the N_1n diagonal entries".into(),
        ));
    }
    Ok(())
}

/// Reachable sign flips: `F₂` basis vectors (over slots) with the generator combination producing each.
fn sign_subspace(rows: &[Vec<i64>], keep_sigma: bool) -> Vec<(Vec<bool>, Vec<bool>)> {
    let k = rows.len();
    let gens = rows.first().map_or(0, Vec::len);
    let column = |p: usize| -> Vec<bool> { rows.iter().map(|r| r[p].rem_euclid(2) == 1).collect() };
    let mut raw: Vec<(Vec<bool>, Vec<bool>)> = Vec::new();
    for p in 0..gens {
        let mut combo = vec![false; gens];
        combo[p] = true;
        let mut img = column(p);
        if keep_sigma && p > 0 {
            combo[0] = true;
            let c0 = column(0);
            img.iter_mut().zip(c0).for_each(|(a, b)| *a ^= b);
        } else if keep_sigma {
            continue;
        }
        raw.push((img, combo));
    }
    // reduced echelon over F₂, pivots at first set position
    let mut basis: Vec<(Vec<bool>, Vec<bool>)> = Vec::new();
    for (mut v, mut c) in raw {
        for (bv, bc) in &basis {
            let piv = bv.iter().position(|&b| b).unwrap();
            if v[piv] {
                v.iter_mut().zip(bv).for_each(|(a, b)| *a ^= b);
                c.iter_mut().zip(bc).for_each(|(a, b)| *a ^= b);
            }
        }
        if let Some(piv) = v.iter().position(|&b| b) {
            for (bv, bc) in basis.iter_mut() {
                if bv[piv] {
                    bv.iter_mut().zip(&v).for_each(|(a, b)| *a ^= b);
                    bc.iter_mut().zip(&c).for_each(|(a, b)| *a ^= b);
                }
            }
            basis.push((v, c));
        }
    }
    basis.sort_by_key(|(v, _)| v.iter().position(|&b| b));
    debug_assert!(basis.iter().all(|(v, _)| v.len() == k));
    basis
}

/// Lexicographically smallest sign pattern (`false` = positive) reachable from `signs`,
/// with the generator flips that reach it.
pub fn min_sign_pattern(rows: &[Vec<i64>], signs: &[bool], keep_sigma: bool) -> (Vec<bool>, Vec<bool>) {
    let gens = rows.first().map_or(0, Vec::len);
    let mut v = signs.to_vec();
    let mut combo = vec![false; gens];
    for (bv, bc) in sign_subspace(rows, keep_sigma) {
        let piv = bv.iter().position(|&b| b).unwrap();
        if v[piv] {
            v.iter_mut().zip(&bv).for_each(|(a, b)| *a ^= b);
            combo.iter_mut().zip(&bc).for_each(|(a, b)| *a ^= b);
        }
    }
    (v, combo)
}

fn format_power(base: &Scalar, exp: &Scalar) -> String {
    if exp.is_one() {
        format!("({base})")
    } else {
        format!("({base})^({exp})")
    }
}

fn normalize_slots(fam: &mut ExtensionFamily, field: FieldFlag, log: &mut Vec<TransformStep>) -> Result<()> {
    let n = fam.n;
    let o = fam.order().clone();
    let mut surviving = Vec::new();
    for (x, y) in lemma1_slots(n) {
        let (xi, yi) = (o.idx(x.i, x.k), o.idx(y.i, y.k));
        if let Some(m) = fam.matrices.iter().find(|m| !m.get(xi, yi).is_zero()) {
            let v = m.get(xi, yi);
            let v = v.as_constant().ok_or_else(|| Error::SymbolicNormalization(v.to_string()))?;
            surviving.push(((xi, yi), slot_exponents(n, x, y), v));
        }
    }
    if surviving.is_empty() {
        return Ok(());
    }
    let keep_sigma = !fam.sigma.is_zero();
    let mut rows: Vec<Vec<i64>> = surviving.iter().map(|(_, r, _)| r.clone()).collect();
    let mut constraint = rows.clone();
    if keep_sigma {
        constraint.push(vec![1; n - 1]);
    }
    let cm = Matrix::from_rows(
        constraint.iter().map(|r| r.iter().map(|&e| Scalar::from_integer(e.into())).collect()).collect(),
    )?;
    if cm.rank() < constraint.len() {
        return Err(Error::Unsupported(
            "off-diagonal entries cannot be normalized without rescaling the [X, X] constant".into(),
        ));
    }
    // right inverse C = Mᵀ (M Mᵀ)⁻¹; log g_p = −Σ_s C_{p,s} log v_s
    let mt = cm.transpose();
    let gram_inv = cm.mul(&mt)?.inverse().expect("full row rank");
    let right = mt.mul(&gram_inv)?;

    let signs: Vec<bool> = surviving.iter().map(|(_, _, v)| v.is_negative()).collect();
    let (target, flips) = match field {
        FieldFlag::Complex => (vec![false; signs.len()], vec![false; n - 1]),
        FieldFlag::Real => min_sign_pattern(&rows, &signs, keep_sigma),
    };
    let mut any_change = false;
    for (s, ((xi, yi), _, v)) in surviving.iter().enumerate() {
        // factor applied to this slot in every matrix
        let mut lambda = match field {
            FieldFlag::Complex => Scalar::one() / v,
            FieldFlag::Real => Scalar::one() / v.abs(),
        };
        if field == FieldFlag::Real && target[s] != signs[s] {
            lambda = -lambda;
        }
        if !lambda.is_one() {
            any_change = true;
        }
        for m in fam.matrices.iter_mut() {
            let w = m.get(*xi, *yi).scale(&lambda);
            m.set(*xi, *yi, w);
        }
    }
    if any_change {
        let generators = (0..n - 1)
            .map(|p| {
                let mut parts = Vec::new();
                if field == FieldFlag::Real && flips[p] {
                    parts.push("-1".to_string());
                }
                for (s, (_, _, v)) in surviving.iter().enumerate() {
                    let e = -right[(p, s)].clone();
                    if e.is_zero() {
                        continue;
                    }
                    let base = if field == FieldFlag::Real { v.abs() } else { v.clone() };
                    if !base.is_one() {
                        parts.push(format_power(&base, &e));
                    }
                }
                let body = if parts.is_empty() { "1".to_string() } else { parts.join("*") };
                format!("g_{}{} = {body}", p + 1, p + 2)
            })
            .collect();
        log.push(TransformStep::G2 { generators });
    }
    rows.clear();
    Ok(())
}

/// Full pipeline: validate, shift schedule, `G1` elimination, leading-diagonal
/// scaling, `σ` cleanup, then `G2` normalization of the surviving slots.
pub fn reduce_to_canonical(fam: &ExtensionFamily, field: FieldFlag) -> Result<Reduction> {
    validate(fam)?;
    let mut out = fam.clone();
    out.field = field;
    let mut log = Vec::new();
    for alpha in 0..out.f() {
        let mu = mu_schedule(&out.matrices[alpha]);
        if mu.is_empty() {
            continue;
        }
        let shift = MuShift { alpha, mu: mu.clone() };
        out = apply_mu(&out, &shift)?;
        log.push(TransformStep::Mu { alpha, values: mu.into_iter().collect() });
    }
    check_slot_form(&out)?;
    eliminate_slots(&mut out, &mut log)?;
    scale_generators(&mut out, &mut log)?;
    clean_sigma(&mut out, &mut log)?;
    normalize_slots(&mut out, field, &mut log)?;
    Ok(Reduction { family: out, log })
}

pub fn reduce(fam: &ExtensionFamily, field: FieldFlag) -> Result<ExtensionFamily> {
    Ok(reduce_to_canonical(fam, field)?.family)
}

/// `X^α → c X^α`: scales `A^α` and every `σ^{αβ}`.
pub fn scale_generator(fam: &ExtensionFamily, alpha: usize, c: &Scalar) -> Result<ExtensionFamily> {
    check_alpha(fam, alpha)?;
    if c.is_zero() {
        return Err(Error::NotNilindependent(format!("X{} scaled by zero", alpha + 1)));
    }
    let mut out = fam.clone();
    out.matrices[alpha] = fam.matrices[alpha].scale(c);
    for (a, b, p, e) in fam.sigma.entries() {
        if a == alpha || b == alpha {
            out.sigma.set(a, b, p, e.scale(c))?;
        }
    }
    Ok(out)
}

/// A seeded random equivalent of `fam`: every `X^α` shifted by a full `μ`,
/// then one G1 and one G2 move, then each `X^α` rescaled.
pub fn scramble(fam: &ExtensionFamily, rng: &mut ChaCha8Rng) -> Result<ExtensionFamily> {
    let order = fam.order().clone();
    let mut out = fam.clone();
    for alpha in 0..fam.f() {
        let mut shift = MuShift::new(alpha);
        for &p in order.pairs() {
            shift = shift.with(p, sample_scalar(rng, false));
        }
        out = apply_mu(&out, &shift)?;
    }
    let g1 = G1Transform { g: lemma1_slots(fam.n).iter().map(|_| sample_scalar(rng, false)).collect() };
    out = apply_g1(&out, &g1)?;
    let g2 = G2Transform { g: (1..fam.n).map(|_| sample_scalar(rng, true)).collect() };
    out = apply_g2(&out, &g2)?;
    for alpha in 0..fam.f() {
        out = scale_generator(&out, alpha, &sample_scalar(rng, true))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{Param, SigmaTable};
    use crate::scalar::{int, ratio};

    fn diag_family(n: usize, gens: &[i64]) -> ExtensionFamily {
        let g: Vec<ParamExpr> = gens.iter().map(|&x| ParamExpr::int(x)).collect();
        let m = StructureMatrix::from_generators(n, &g).unwrap();
        ExtensionFamily::new(n, FieldFlag::Complex, vec![m], SigmaTable::zero(1), vec![]).unwrap()
    }

    fn set(fam: &mut ExtensionFamily, alpha: usize, x: (usize, usize), y: (usize, usize), v: Scalar) {
        fam.matrices[alpha]
            .set_pair(PairIdx::new(x.0, x.1), PairIdx::new(y.0, y.1), ParamExpr::from(v))
            .unwrap();
    }

    #[test]
    fn zero_moves_are_identity() {
        let fam = diag_family(4, &[1, 2, 4]);
        assert_eq!(apply_mu(&fam, &MuShift::new(0)).unwrap(), fam);
        assert_eq!(apply_g1(&fam, &G1Transform { g: vec![int(0); 3] }).unwrap(), fam);
        assert_eq!(apply_g2(&fam, &G2Transform::identity(4)).unwrap(), fam);
    }

    #[test]
    fn g1_shift_rule() {
        let mut fam = diag_family(4, &[1, 2, 4]);
        set(&mut fam, 0, (1, 2), (2, 4), int(3));
        let b = slot_brackets(&fam.matrices[0]);
        assert_eq!(b, vec![ParamExpr::int(5), ParamExpr::int(5), ParamExpr::int(-1)]);
        let g = G1Transform { g: vec![ratio(-3, 5), int(0), int(0)] };
        let out = apply_g1(&fam, &g).unwrap();
        assert!(out.matrices[0].off_diagonal().is_empty());
        assert_eq!(out.matrices[0].diagonal(), fam.matrices[0].diagonal());
        let fam = diag_family(4, &[1, 2, 3]);
        assert!(slot_brackets(&fam.matrices[0])[2].is_zero());
    }

    #[test]
    fn g2_ratio_and_composition() {
        let mut fam = diag_family(4, &[0, 1, -1]);
        set(&mut fam, 0, (1, 2), (2, 4), int(1));
        let t = G2Transform { g: vec![int(2), int(1), int(1)] };
        let out = apply_g2(&fam, &t).unwrap();
        assert_eq!(out.matrices[0].get(0, 4), ParamExpr::int(2));
        let t2 = G2Transform { g: vec![int(3), int(5), ratio(1, 2)] };
        let twice = apply_g2(&apply_g2(&fam, &t).unwrap(), &t2).unwrap();
        assert_eq!(twice, apply_g2(&fam, &t.compose(&t2)).unwrap());
        assert!(matches!(
            apply_g2(&fam, &G2Transform { g: vec![int(0), int(1), int(1)] }),
            Err(Error::ZeroGenerator(_))
        ));
    }

    #[test]
    fn mu_schedule_targets_vanish() {
        for n in 4..=6 {
            let mut fam = diag_family(n, &vec![1; n - 1]);
            // a random shift of a diagonal matrix
            let mut shift = MuShift::new(0);
            for (k, &p) in fam.order().pairs().to_vec().iter().enumerate() {
                shift.mu.insert(p, ParamExpr::int(k as i64 + 1));
            }
            fam = apply_mu(&fam, &shift).unwrap();
            let mu = mu_schedule(&fam.matrices[0]);
            let back = apply_mu(&fam, &MuShift { alpha: 0, mu }).unwrap();
            assert!(back.matrices[0].off_diagonal().is_empty(), "n={n}");
        }
    }

    #[test]
    fn resonances() {
        let a = ParamExpr::var("a");
        let one = ParamExpr::int(1);
        let m = StructureMatrix::from_generators(4, &[one.clone(), a.clone(), one.sub(&a)]).unwrap();
        let fam = ExtensionFamily::new(4, FieldFlag::Complex, vec![m], SigmaTable::zero(1), vec![Param::any("a")])
            .unwrap();
        assert_eq!(resonance_slots(&fam), vec![(PairIdx::new(1, 2), PairIdx::new(2, 4))]);
        assert!(resonance_slots(&diag_family(4, &[1, 2, 4])).is_empty());
    }

    #[test]
    fn sign_patterns_n4() {
        let rows: Vec<Vec<i64>> = vec![slot_exponents(4, PairIdx::new(1, 2), PairIdx::new(2, 4)), slot_exponents(4, PairIdx::new(3, 4), PairIdx::new(1, 3))];
        // both slots always flip together
        assert_eq!(min_sign_pattern(&rows, &[false, true], false).0, vec![false, true]);
        assert_eq!(min_sign_pattern(&rows, &[true, false], false).0, vec![false, true]);
        assert_eq!(min_sign_pattern(&rows, &[true, true], false).0, vec![false, false]);
    }

    #[test]
    fn r113_over_both_fields() {
        let mut fam = diag_family(4, &[1, 0, 1]);
        set(&mut fam, 0, (1, 2), (2, 4), int(1));
        set(&mut fam, 0, (3, 4), (1, 3), int(-1));
        let real = reduce(&fam, FieldFlag::Real).unwrap();
        assert_eq!(real.matrices[0], fam.matrices[0]);
        let cplx = reduce(&fam, FieldFlag::Complex).unwrap();
        assert_eq!(cplx.matrices[0].get(2, 3), ParamExpr::int(1));
        assert_eq!(cplx.matrices[0].get(0, 4), ParamExpr::int(1));
    }

    #[test]
    fn reduce_rejects_bad_input() {
        let fam = diag_family(4, &[0, 0, 0]);
        assert!(matches!(reduce(&fam, FieldFlag::Real), Err(Error::NotNilindependent(_))));
        let mut bad = diag_family(4, &[1, 2, 4]);
        bad.matrices[0].set(5, 5, ParamExpr::int(100));
        assert!(matches!(reduce(&bad, FieldFlag::Real), Err(Error::JacobiViolated(_))));
    }

    #[test]
    fn reduce_scales_and_is_idempotent() {
        let fam = diag_family(4, &[2, 4, 8]);
        let shift = MuShift::new(0).with(PairIdx::new(2, 3), int(7)).with(PairIdx::new(1, 3), int(-3));
        let fam = apply_mu(&fam, &shift).unwrap();
        assert!(!fam.matrices[0].off_diagonal().is_empty());
        let once = reduce_to_canonical(&fam, FieldFlag::Real).unwrap();
        assert_eq!(once.family.matrices[0], diag_family(4, &[1, 2, 4]).matrices[0]);
        assert!(!once.log.is_empty());
        let twice = reduce_to_canonical(&once.family, FieldFlag::Real).unwrap();
        assert_eq!(twice.family, once.family);
        assert!(twice.log.is_empty());
    }
}
