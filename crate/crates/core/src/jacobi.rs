//! Linear constraint systems imposed by the Jacobi identity on extensions of `T(n)`.
//!
//! `xnn_system` collects `[X,[N_y1,N_y2]] = [[X,N_y1],N_y2] + [N_y1,[X,N_y2]]`
//! for all pairs, with one unknown per entry of a single structure matrix.
//! `lemma1_family` is the closed-form solution after the shift schedule, and
//! `verify_family_jacobi` checks whole families by seeded sampling.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basis::{BasisOrder, PairIdx};
use crate::error::{Error, Result};
use crate::expr::ParamExpr;
use crate::family::{sample_params, ExtensionFamily, FieldFlag, Param, SigmaTable, StructureMatrix};
use crate::liecore::{check_jacobi, nilindependent, JacobiReport, LieAlgebra};
use crate::linalg::{Echelon, SparseRow};
use crate::scalar::Scalar;
use crate::triangular::build_tn;

/// Off-diagonal positions that survive the shift schedule, in elimination order:
/// `(12,2n)`, `(j(j+1),1n)` for `2 ≤ j ≤ n−2`, `((n−1)n,1(n−1))`.
pub fn lemma1_slots(n: usize) -> Vec<(PairIdx, PairIdx)> {
    let mut out = vec![(PairIdx::new(1, 2), PairIdx::new(2, n))];
    for j in 2..=n.saturating_sub(2) {
        out.push((PairIdx::new(j, j + 1), PairIdx::new(1, n)));
    }
    out.push((PairIdx::new(n - 1, n), PairIdx::new(1, n - 1)));
    out
}

/// Homogeneous system in the `r²` entries of one structure matrix.
#[derive(Clone, Debug)]
pub struct XnnSystem {
    order: BasisOrder,
    /// One equation per (pair `y1 < y2`, output coordinate), keyed for inspection.
    rows: BTreeMap<(usize, usize), Vec<SparseRow>>,
}

impl XnnSystem {
    pub fn n(&self) -> usize {
        self.order.n()
    }

    pub fn order(&self) -> &BasisOrder {
        &self.order
    }

    pub fn num_unknowns(&self) -> usize {
        self.order.len() * self.order.len()
    }

    /// Unknown `u` is the entry `A_{row,col}` with `u = row·r + col`.
    pub fn unknown(&self, u: usize) -> (PairIdx, PairIdx) {
        let r = self.order.len();
        (self.order.pair(u / r), self.order.pair(u % r))
    }

    pub fn unknown_index(&self, row: PairIdx, col: PairIdx) -> Result<usize> {
        Ok(self.order.pair_to_index(row)? * self.order.len() + self.order.pair_to_index(col)?)
    }

    pub fn rows(&self) -> impl Iterator<Item = &SparseRow> {
        self.rows.values().flatten()
    }

    pub fn num_equations(&self) -> usize {
        self.rows.values().map(Vec::len).sum()
    }

    /// Equations contributed by the triplet `{X, N_p, N_q}`.
    pub fn rows_for(&self, p: PairIdx, q: PairIdx) -> Result<Vec<SparseRow>> {
        let (a, b) = (self.order.pair_to_index(p)?, self.order.pair_to_index(q)?);
        let key = (a.min(b), a.max(b));
        Ok(self.rows.get(&key).cloned().unwrap_or_default())
    }

    pub fn format_row(&self, row: &SparseRow) -> String {
        let mut s = String::new();
        for (k, (&u, c)) in row.iter().enumerate() {
            let (x, y) = self.unknown(u);
            let name = format!("A_{{{},{}}}", x.label(), y.label());
            let neg = c < &Scalar::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            let coeff = if mag.is_one() { String::new() } else { format!("{mag}*") };
            match (k, neg) {
                (0, false) => s.push_str(&format!("{coeff}{name}")),
                (0, true) => s.push_str(&format!("-{coeff}{name}")),
                (_, false) => s.push_str(&format!(" + {coeff}{name}")),
                (_, true) => s.push_str(&format!(" - {coeff}{name}")),
            }
        }
        s.push_str(" = 0");
        s
    }

    pub fn solution_space(&self) -> Echelon {
        let mut e = Echelon::new(self.num_unknowns());
        for row in self.rows() {
            e.insert(row.clone());
        }
        e
    }

    /// Basis of the admissible structure matrices, flattened row-major.
    pub fn nullspace(&self) -> Vec<Vec<Scalar>> {
        self.solution_space().nullspace()
    }

    pub fn nullspace_dim(&self) -> usize {
        self.num_unknowns() - self.solution_space().rank()
    }
}

fn accumulate(target: &mut BTreeMap<usize, SparseRow>, out: usize, unknown: usize, c: &Scalar) {
    let row = target.entry(out).or_default();
    let e = row.entry(unknown).or_insert_with(Scalar::zero);
    *e += c;
}

pub fn xnn_system(n: usize) -> Result<XnnSystem> {
    let t = build_tn(n)?;
    let alg = t.algebra();
    let order = t.order().clone();
    let r = order.len();
    // right brackets [N_z, N_y] for all z, y
    let br = |z: usize, y: usize| alg.bracket_basis(z, y);
    let mut rows = BTreeMap::new();
    for y1 in 0..r {
        for y2 in y1 + 1..r {
            // Σ_w c^w A_{w,q}  −  Σ_z A_{y1,z} [N_z,N_y2]_q  −  Σ_z A_{y2,z} [N_y1,N_z]_q  = 0
            let mut eqs: BTreeMap<usize, SparseRow> = BTreeMap::new();
            for (w, c) in alg.bracket_basis(y1, y2) {
                for q in 0..r {
                    accumulate(&mut eqs, q, w * r + q, &c);
                }
            }
            for z in 0..r {
                for (q, c) in br(z, y2) {
                    accumulate(&mut eqs, q, y1 * r + z, &-c);
                }
                for (q, c) in br(y1, z) {
                    accumulate(&mut eqs, q, y2 * r + z, &-c);
                }
            }
            let list: Vec<SparseRow> = eqs
                .into_values()
                .map(|mut row| {
                    row.retain(|_, c| !c.is_zero());
                    row
                })
                .filter(|row| !row.is_empty())
                .collect();
            if !list.is_empty() {
                rows.insert((y1, y2), list);
            }
        }
    }
    Ok(XnnSystem { order, rows })
}

/// Flattened matrix of the shift `X → X + Σ μ_pq N_pq` with a single `μ_pq = 1`:
/// `A_{ik,ab} += δ_kb μ_ai − δ_ia μ_kb`.
pub fn mu_image(order: &BasisOrder, p: PairIdx) -> Vec<Scalar> {
    let r = order.len();
    let mut v = vec![Scalar::zero(); r * r];
    for (x, ik) in order.pairs().iter().enumerate() {
        for (y, ab) in order.pairs().iter().enumerate() {
            let mut c = Scalar::zero();
            if ik.k == ab.k && ab.i == p.i && ik.i == p.k {
                c += Scalar::one();
            }
            if ik.i == ab.i && ik.k == p.i && ab.k == p.k {
                c -= Scalar::one();
            }
            v[x * r + y] = c;
        }
    }
    v
}

/// Spanning set for the admissible single structure matrices: diagonal
/// generators, the slot units, and the shift images of every `N_pq ≠ N_1n`.
pub fn lemma1_plus_mu_span(n: usize) -> Result<Vec<Vec<Scalar>>> {
    let order = BasisOrder::new(n)?;
    let r = order.len();
    let mut out = Vec::new();
    for p in 1..n {
        let mut v = vec![Scalar::zero(); r * r];
        for (x, pair) in order.pairs().iter().enumerate() {
            if pair.covers(p) {
                v[x * r + x] = Scalar::one();
            }
        }
        out.push(v);
    }
    for (a, b) in lemma1_slots(n) {
        let mut v = vec![Scalar::zero(); r * r];
        v[order.pair_to_index(a)? * r + order.pair_to_index(b)?] = Scalar::one();
        out.push(v);
    }
    for &p in order.pairs() {
        if p != PairIdx::new(1, n) {
            out.push(mu_image(&order, p));
        }
    }
    Ok(out)
}

/// Unknowns: `σ_pq` (`r` of them) followed by the `n − 1` slot values of the
/// commutator `C = A^β A^α − A^α A^β` of two slot-form matrices.
/// Equations: `[σ·N, N_y] = Σ_z C_{y,z} N_z` for every `y`.
#[derive(Clone, Debug)]
pub struct XxnSystem {
    pub order: BasisOrder,
    pub rows: Vec<SparseRow>,
}

impl XxnSystem {
    pub fn num_unknowns(&self) -> usize {
        self.order.len() + self.order.n() - 1
    }

    pub fn nullspace(&self) -> Vec<Vec<Scalar>> {
        let mut e = Echelon::new(self.num_unknowns());
        for row in &self.rows {
            e.insert(row.clone());
        }
        e.nullspace()
    }
}

pub fn xxn_system(n: usize) -> Result<XxnSystem> {
    let t = build_tn(n)?;
    let alg = t.algebra();
    let order = t.order().clone();
    let r = order.len();
    let slots: Vec<(usize, usize)> = lemma1_slots(n)
        .into_iter()
        .map(|(a, b)| (order.idx(a.i, a.k), order.idx(b.i, b.k)))
        .collect();
    let mut rows = Vec::new();
    for y in 0..r {
        let mut eqs: BTreeMap<usize, SparseRow> = BTreeMap::new();
        for pq in 0..r {
            for (z, c) in alg.bracket_basis(pq, y) {
                accumulate(&mut eqs, z, pq, &c);
            }
        }
        for (s, &(sy, sz)) in slots.iter().enumerate() {
            if sy == y {
                accumulate(&mut eqs, sz, r + s, &-Scalar::one());
            }
        }
        rows.extend(eqs.into_values().filter(|row| row.values().any(|c| !c.is_zero())));
    }
    Ok(XxnSystem { order, rows })
}

/// Parameter names used by [`lemma1_family`].
pub fn lemma1_diag_name(alpha: usize, p: usize) -> String {
    format!("d{alpha}_{p}")
}

pub fn lemma1_slot_name(alpha: usize, s: usize) -> String {
    format!("e{alpha}_{s}")
}

pub fn lemma1_sigma_name(alpha: usize, beta: usize) -> String {
    format!("s{alpha}_{beta}")
}

/// General slot-form family: free diagonal generators, free slot entries and
/// symbolic `σ^{αβ}` on `N_1n`. Indices in names are 1-based.
pub fn lemma1_family(n: usize, f: usize) -> Result<ExtensionFamily> {
    if n < 4 {
        return Err(Error::SizeTooSmall { n, min: 4, what: "the slot form" });
    }
    if f == 0 || f > n - 1 {
        return Err(Error::FOutOfRange { n, f, max: n - 1 });
    }
    let slots = lemma1_slots(n);
    let mut params = Vec::new();
    let mut matrices = Vec::new();
    for alpha in 1..=f {
        let gens: Vec<ParamExpr> = (1..n)
            .map(|p| {
                let name = lemma1_diag_name(alpha, p);
                params.push(Param::any(&name));
                ParamExpr::var(&name)
            })
            .collect();
        let mut m = StructureMatrix::from_generators(n, &gens)?;
        for (s, &(a, b)) in slots.iter().enumerate() {
            let name = lemma1_slot_name(alpha, s + 1);
            params.push(Param::any(&name));
            m.set_pair(a, b, ParamExpr::var(&name))?;
        }
        matrices.push(m);
    }
    let top = crate::basis::tn_dim(n) - 1;
    let mut sigma = SigmaTable::zero(f);
    for a in 0..f {
        for b in a + 1..f {
            let name = lemma1_sigma_name(a + 1, b + 1);
            params.push(Param::any(&name));
            sigma.set(a, b, top, ParamExpr::var(&name))?;
        }
    }
    ExtensionFamily::new(n, FieldFlag::Complex, matrices, sigma, params)
}

/// Positions where the symbolic commutator `[A^α, A^β]` may be nonzero.
pub fn commutator_support(a: &StructureMatrix, b: &StructureMatrix) -> Result<Vec<(usize, usize)>> {
    Ok(a.commutator(b)?.entries().map(|(r, c, _)| (r, c)).collect())
}

#[derive(Clone, Debug)]
pub struct SampleOutcome {
    pub values: BTreeMap<String, Scalar>,
    pub report: JacobiReport,
    pub algebra: LieAlgebra,
}

#[derive(Clone, Debug)]
pub struct FamilyJacobiReport {
    pub samples: Vec<SampleOutcome>,
}

impl FamilyJacobiReport {
    pub fn is_ok(&self) -> bool {
        self.samples.iter().all(|s| s.report.is_ok())
    }

    pub fn first_failure(&self) -> Option<&SampleOutcome> {
        self.samples.iter().find(|s| !s.report.is_ok())
    }

    pub fn describe(&self) -> String {
        match self.first_failure() {
            None => format!("{} sample(s) pass", self.samples.len()),
            Some(s) => {
                let vals: Vec<String> = s.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
                format!("{} at [{}]", s.report.describe(&s.algebra), vals.join(", "))
            }
        }
    }
}

/// Assembles the family at `samples` seeded parameter points and checks Jacobi.
/// A concrete family is checked once regardless of `samples`.
pub fn verify_family_jacobi(fam: &ExtensionFamily, samples: usize, seed: u64) -> Result<FamilyJacobiReport> {
    let params = fam.all_params();
    let count = if params.is_empty() { 1 } else { samples.max(1) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let values = sample_params(&params, &mut rng);
        let algebra = fam.assemble(&values)?;
        let report = check_jacobi(&algebra);
        out.push(SampleOutcome { values, report, algebra });
    }
    Ok(FamilyJacobiReport { samples: out })
}

/// What the `[X, X]` constants are allowed to be once matrices are in slot form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SigmaRule {
    /// `f = 1`: there is nothing to constrain.
    Vacuous,
    /// Every `A^γ_{1n,1n}` vanishes identically; `σ` on `N_1n` is free.
    Free,
    /// Some `A^γ_{1n,1n}` is nonzero; shifting `X` by multiples of `N_1n` removes `σ`.
    ForcedZero { witness: usize },
}

pub fn sigma_constraints(fam: &ExtensionFamily) -> SigmaRule {
    if fam.f() < 2 {
        return SigmaRule::Vacuous;
    }
    let top = fam.order().top();
    match fam.matrices.iter().position(|m| !m.get(top, top).is_zero()) {
        Some(witness) => SigmaRule::ForcedZero { witness },
        None => SigmaRule::Free,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct FamilyChecks {
    pub checks: Vec<Check>,
}

impl FamilyChecks {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name, passed, detail: detail.into() });
    }
}

/// Jacobi, commutativity, nilindependence, `σ` support and the nilradical
/// dimension bound, all at seeded samples.
pub fn check_family(fam: &ExtensionFamily, samples: usize, seed: u64) -> Result<FamilyChecks> {
    let mut out = FamilyChecks::default();
    let jac = verify_family_jacobi(fam, samples, seed)?;
    out.push("jacobi", jac.is_ok(), jac.describe());

    let mut commute = true;
    let mut nil_ok = true;
    let mut nil_detail = String::from("generic samples nilindependent");
    for s in &jac.samples {
        let mats = fam.instantiate_matrices(&s.values)?;
        for (i, a) in mats.iter().enumerate() {
            for b in &mats[i + 1..] {
                if !a.commutator(b)?.is_zero() {
                    commute = false;
                }
            }
        }
        match nilindependent(&mats) {
            Ok(r) if r.independent => {}
            Ok(_) => {
                nil_ok = false;
                nil_detail = "a nontrivial combination of the matrices is nilpotent".into();
            }
            Err(e) => {
                nil_ok = false;
                nil_detail = e.to_string();
            }
        }
    }
    if fam.f() >= 2 {
        out.push("commutativity", commute, if commute { "[A^a, A^b] = 0" } else { "structure matrices do not commute" });
    }
    out.push("nilindependence", nil_ok, nil_detail);

    let top = fam.order().top();
    let (ok, detail) = if !fam.sigma.supported_on(top) {
        (false, "[X, X] has components outside N_1n".to_string())
    } else {
        match sigma_constraints(fam) {
            SigmaRule::Vacuous => (true, "f = 1".to_string()),
            SigmaRule::Free => (true, "A_{1n,1n} = 0 for all matrices; sigma free".to_string()),
            SigmaRule::ForcedZero { witness } if fam.sigma.is_zero() => {
                (true, format!("sigma = 0 (forced by X{})", witness + 1))
            }
            SigmaRule::ForcedZero { witness } => (
                false,
                format!("sigma must vanish: A{}_{{1n,1n}} is nonzero so a shift of X removes it", witness + 1),
            ),
        }
    };
    out.push("sigma-support", ok, detail);

    let (r, d) = (fam.r(), fam.dim());
    out.push("nilradical-bound", 2 * r >= d, format!("dim NR = {r}, dim L = {d}"));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn slot_lists() {
        let lbl = |n| -> Vec<String> {
            lemma1_slots(n).iter().map(|(a, b)| format!("{}-{}", a.label(), b.label())).collect()
        };
        assert_eq!(lbl(4), ["12-24", "23-14", "34-13"]);
        assert_eq!(lbl(5), ["12-25", "23-15", "34-15", "45-14"]);
    }

    #[test]
    fn triplet_12_34_rows() {
        let sys = xnn_system(4).unwrap();
        let rows = sys.rows_for(PairIdx::new(1, 2), PairIdx::new(3, 4)).unwrap();
        let mut text: Vec<String> = rows.iter().map(|r| sys.format_row(r)).collect();
        text.sort();
        let mut expected = vec![
            "-A_{12,13} - A_{34,24} = 0".to_string(),
            "-A_{12,23} = 0".to_string(),
            "-A_{34,23} = 0".to_string(),
        ];
        expected.sort();
        assert_eq!(text, expected);
    }

    #[test]
    fn xnn_dimensions() {
        assert_eq!(xnn_system(4).unwrap().nullspace_dim(), 11);
        assert_eq!(xnn_system(5).unwrap().nullspace_dim(), 17);
    }

    #[test]
    fn n3_nullspace_support() {
        let sys = xnn_system(3).unwrap();
        let ns = sys.nullspace();
        assert_eq!(ns.len(), 6);
        let mut lower = std::collections::BTreeSet::new();
        for v in &ns {
            for (u, c) in v.iter().enumerate() {
                let (x, y) = sys.unknown(u);
                let (xi, yi) = (sys.order().pair_to_index(x).unwrap(), sys.order().pair_to_index(y).unwrap());
                if !c.is_zero() && xi > yi {
                    lower.insert((x.label(), y.label()));
                }
            }
        }
        assert_eq!(lower.into_iter().collect::<Vec<_>>(), vec![("23".to_string(), "12".to_string())]);
    }

    #[test]
    fn xxn_forces_top_support() {
        for n in 4..=6 {
            let sys = xxn_system(n).unwrap();
            let ns = sys.nullspace();
            assert_eq!(ns.len(), 1);
            let top = sys.order.top();
            let support: Vec<usize> = ns[0].iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, _)| i).collect();
            assert_eq!(support, vec![top]);
        }
    }

    #[test]
    fn lemma1_shapes() {
        let fam = lemma1_family(5, 1).unwrap();
        let off: Vec<String> = fam.matrices[0]
            .off_diagonal()
            .iter()
            .map(|(r, c, _)| format!("{}-{}", fam.order().pair(*r).label(), fam.order().pair(*c).label()))
            .collect();
        let mut expected = vec!["12-25", "23-15", "34-15", "45-14"];
        expected.sort_by_key(|s| {
            let o = fam.order();
            let p = |l: &str| o.idx(l[0..1].parse().unwrap(), l[1..2].parse().unwrap());
            (p(&s[0..2]), p(&s[3..5]))
        });
        assert_eq!(off, expected);
        let f3 = lemma1_family(4, 3).unwrap();
        assert_eq!(f3.f(), 3);
        for m in &f3.matrices {
            assert_eq!(m.generators().len(), 3);
            assert_eq!(m.off_diagonal().len(), 3);
        }
        assert!(matches!(lemma1_family(4, 4), Err(Error::FOutOfRange { .. })));
    }

    #[test]
    fn commutator_lives_on_slots() {
        for n in 4..=6 {
            let fam = lemma1_family(n, 2).unwrap();
            let o = fam.order().clone();
            let slots: Vec<(usize, usize)> = lemma1_slots(n)
                .iter()
                .map(|(a, b)| (o.pair_to_index(*a).unwrap(), o.pair_to_index(*b).unwrap()))
                .collect();
            for pos in commutator_support(&fam.matrices[0], &fam.matrices[1]).unwrap() {
                assert!(slots.contains(&pos), "n={n} {pos:?}");
            }
        }
    }

    #[test]
    fn generic_lemma1_samples_fail_jacobi_when_noncommuting() {
        // random slot entries in two matrices do not commute, so Jacobi must fail
        let fam = lemma1_family(4, 2).unwrap();
        let rep = verify_family_jacobi(&fam, 2, 7).unwrap();
        assert!(!rep.is_ok());
        // f = 1 has no such constraint
        let fam = lemma1_family(5, 1).unwrap();
        assert!(verify_family_jacobi(&fam, 3, 7).unwrap().is_ok());
    }

    #[test]
    fn sigma_rules() {
        let gens = |v: [i64; 3]| v.iter().map(|&x| ParamExpr::int(x)).collect::<Vec<_>>();
        let a = StructureMatrix::from_generators(4, &gens([1, 0, -1])).unwrap();
        let b = StructureMatrix::from_generators(4, &gens([0, 1, -1])).unwrap();
        let mut s = SigmaTable::zero(2);
        s.set(0, 1, 5, ParamExpr::int(5)).unwrap();
        let fam = ExtensionFamily::new(4, FieldFlag::Real, vec![a, b.clone()], s.clone(), vec![]).unwrap();
        assert_eq!(sigma_constraints(&fam), SigmaRule::Free);
        assert!(check_family(&fam, 3, 1).unwrap().passed());
        // perturb A¹_{14,14}
        let mut bad = fam.clone();
        bad.matrices[0].set(5, 5, ParamExpr::from(int(1)));
        assert!(!verify_family_jacobi(&bad, 3, 1).unwrap().is_ok());
        let c = StructureMatrix::from_generators(4, &gens([1, 0, 0])).unwrap();
        let fam2 = ExtensionFamily::new(4, FieldFlag::Real, vec![c, b], s, vec![]).unwrap();
        assert_eq!(sigma_constraints(&fam2), SigmaRule::ForcedZero { witness: 0 });
    }
}
