//! Classification data for `L(4,f)`, the closed forms for `L(n,1)` and
//! `L(n,n−1)`, and an independent enumerator that regenerates the tables.
//!
//! Names follow the table convention: `K_{f,i}` exists over both fields,
//! `R_{f,i}` is a real form that merges with an earlier entry over ℂ.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::basis::{tn_dim, PairIdx};
use crate::canonical::{min_sign_pattern, slot_exponents};
use crate::error::{Error, Result};
use crate::expr::ParamExpr;
use crate::family::{ExtensionFamily, FieldFlag, Param, ParamDomain, SigmaTable, StructureMatrix};
use crate::jacobi::lemma1_slots;
use crate::liecore::{
    center_dim, central_series_of, check_jacobi, derived_series, nilindependent, LieAlgebra,
};
use crate::linalg::{rank_of, solve, Echelon, Matrix};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub name: String,
    pub family: ExtensionFamily,
    /// Distinct class over ℝ only.
    pub real_only: bool,
    /// Enumeration branch that produced the entry (empty for stored data).
    pub branch: String,
}

impl CatalogEntry {
    pub fn params(&self) -> &[Param] {
        &self.family.params
    }
}

fn expr(s: &str) -> ParamExpr {
    s.parse().unwrap_or_else(|e| panic!("bad table literal `{s}`: {e}"))
}

fn pair(label: &str) -> PairIdx {
    let b = label.as_bytes();
    PairIdx::new((b[0] - b'0') as usize, (b[1] - b'0') as usize)
}

/// One `T(4)` structure matrix: the six diagonal entries as printed, plus slots.
fn table_matrix(diag: [&str; 6], off: &[(&str, &str, i64)]) -> StructureMatrix {
    let mut m = StructureMatrix::zero(4).expect("n = 4");
    for (i, d) in diag.iter().enumerate() {
        m.set(i, i, expr(d));
    }
    for &(x, y, v) in off {
        m.set_pair(pair(x), pair(y), ParamExpr::int(v)).expect("valid slot");
    }
    m
}

fn entry(name: &str, params: &[&str], matrices: Vec<StructureMatrix>, sigma: Option<&str>) -> CatalogEntry {
    let f = matrices.len();
    let mut ps: Vec<Param> = params.iter().map(|p| Param::any(p)).collect();
    let mut s = SigmaTable::zero(f);
    if let Some(name) = sigma {
        ps.push(Param::nonzero(name));
        s.set(0, 1, tn_dim(4) - 1, ParamExpr::var(name)).expect("f = 2");
    }
    CatalogEntry {
        name: name.into(),
        family: ExtensionFamily::new(4, FieldFlag::Complex, matrices, s, ps).expect("table entries are well formed"),
        real_only: name.starts_with('R'),
        branch: String::new(),
    }
}

fn table_a1() -> Vec<CatalogEntry> {
    let one = |name: &str, params: &[&str], diag, off: &[(&str, &str, i64)]| {
        entry(name, params, vec![table_matrix(diag, off)], None)
    };
    vec![
        one("K_{1,1}", &["a", "b"], ["1", "a", "b", "1+a", "a+b", "1+a+b"], &[]),
        one("K_{1,2}", &["a"], ["0", "1", "a", "1", "1+a", "1+a"], &[]),
        one("K_{1,3}", &[], ["0", "0", "1", "0", "1", "1"], &[]),
        one("K_{1,4}", &["a"], ["1", "a", "1-a", "1+a", "1", "2"], &[("12", "24", 1)]),
        one("K_{1,5}", &[], ["0", "1", "-1", "1", "0", "0"], &[("12", "24", 1)]),
        one("K_{1,6}", &["a"], ["1", "a", "-1", "1+a", "-1+a", "a"], &[("23", "14", 1)]),
        one("K_{1,7}", &[], ["0", "1", "0", "1", "1", "1"], &[("23", "14", 1)]),
        one("K_{1,8}", &["a"], ["1", "a", "1+a", "1+a", "1+2*a", "2*(1+a)"], &[("34", "13", 1)]),
        one("K_{1,9}", &[], ["0", "1", "1", "1", "2", "2"], &[("34", "13", 1)]),
        one("K_{1,10}", &[], ["1", "-2", "-1", "-1", "-3", "-2"], &[("23", "14", 1), ("34", "13", 1)]),
        one("K_{1,11}", &[], ["1", "2", "-1", "3", "1", "2"], &[("12", "24", 1), ("23", "14", 1)]),
        one("K_{1,12}", &[], ["1", "0", "1", "1", "1", "2"], &[("12", "24", 1), ("34", "13", 1)]),
        one("R_{1,13}", &[], ["1", "0", "1", "1", "1", "2"], &[("12", "24", 1), ("34", "13", -1)]),
    ]
}

fn table_a2() -> Vec<CatalogEntry> {
    let d = |diag| table_matrix(diag, &[]);
    let two = |name: &str, params: &[&str], a1, a2, sigma| entry(name, params, vec![a1, a2], sigma);
    vec![
        two("K_{2,1}", &["a", "b"], d(["1", "0", "a", "1", "a", "1+a"]), d(["0", "1", "b", "1", "1+b", "1+b"]), None),
        two("K_{2,2}", &[], d(["1", "0", "-1", "1", "-1", "0"]), d(["0", "1", "-1", "1", "0", "0"]), Some("sigma")),
        two("K_{2,3}", &["a"], d(["1", "a", "0", "1+a", "a", "1+a"]), d(["0", "0", "1", "0", "1", "1"]), None),
        two("K_{2,4}", &[], d(["0", "0", "1", "0", "1", "1"]), d(["0", "1", "0", "1", "1", "1"]), None),
        two(
            "K_{2,5}",
            &["a"],
            d(["1", "a", "1-a", "1+a", "1", "2"]),
            table_matrix(["0", "1", "-1", "1", "0", "0"], &[("12", "24", 1)]),
            None,
        ),
        two(
            "K_{2,6}",
            &[],
            d(["0", "1", "-1", "1", "0", "0"]),
            table_matrix(["1", "0", "1", "1", "1", "2"], &[("12", "24", 1)]),
            None,
        ),
        two(
            "K_{2,7}",
            &["a"],
            d(["1", "a", "-1", "1+a", "-1+a", "a"]),
            table_matrix(["0", "1", "0", "1", "1", "1"], &[("23", "14", 1)]),
            None,
        ),
        two(
            "K_{2,8}",
            &[],
            d(["0", "1", "0", "1", "1", "1"]),
            table_matrix(["1", "0", "-1", "1", "-1", "0"], &[("23", "14", 1)]),
            None,
        ),
        two(
            "K_{2,9}",
            &["a"],
            d(["1", "a", "1+a", "1+a", "1+2*a", "2*(1+a)"]),
            table_matrix(["0", "1", "1", "1", "2", "2"], &[("34", "13", 1)]),
            None,
        ),
        two(
            "K_{2,10}",
            &[],
            d(["0", "1", "1", "1", "2", "2"]),
            table_matrix(["1", "0", "1", "1", "1", "2"], &[("34", "13", 1)]),
            None,
        ),
    ]
}

fn table_a3() -> Vec<CatalogEntry> {
    vec![entry(
        "K_{3,1}",
        &[],
        vec![
            table_matrix(["1", "0", "0", "1", "0", "1"], &[]),
            table_matrix(["0", "1", "0", "1", "1", "1"], &[]),
            table_matrix(["0", "0", "1", "0", "1", "1"], &[]),
        ],
        None,
    )]
}

fn with_field(mut entries: Vec<CatalogEntry>, field: FieldFlag) -> Vec<CatalogEntry> {
    if field == FieldFlag::Complex {
        entries.retain(|e| !e.real_only);
    }
    for e in &mut entries {
        e.family.field = field;
    }
    entries
}

/// Stored tables for `n = 4`, closed forms for `f = n − 1`, and the enumerator for `f = 1`.
pub fn table_entries(n: usize, f: usize, field: FieldFlag) -> Result<Vec<CatalogEntry>> {
    if n < 4 {
        return Err(Error::SizeTooSmall { n, min: 4, what: "a classification listing" });
    }
    if f == 0 || f > n - 1 {
        return Err(Error::FOutOfRange { n, f, max: n - 1 });
    }
    match (n, f) {
        (4, 1) => Ok(with_field(table_a1(), field)),
        (4, 2) => Ok(with_field(table_a2(), field)),
        (4, 3) => Ok(with_field(table_a3(), field)),
        (_, 1) => enumerate_ln1(n, field),
        (_, f) if f == n - 1 => {
            let mut e = lnn1_family(n)?;
            e.family.field = field;
            Ok(vec![e])
        }
        _ => Err(Error::Unsupported(format!(
            "no explicit list of L({n},{f}); only the general slot form and its reduction are available"
        ))),
    }
}

/// The unique `L(n, n−1)`: `A^α_{ik,ik} = 1` iff `i ≤ α ≤ k − 1`, all `σ = 0`.
pub fn lnn1_family(n: usize) -> Result<CatalogEntry> {
    if n < 4 {
        return Err(Error::SizeTooSmall { n, min: 4, what: "L(n,n-1)" });
    }
    let matrices = (1..n)
        .map(|alpha| {
            let gens: Vec<ParamExpr> = (1..n).map(|p| ParamExpr::int(i64::from(p == alpha))).collect();
            StructureMatrix::from_generators(n, &gens)
        })
        .collect::<Result<Vec<_>>>()?;
    let name = if n == 4 { "K_{3,1}".to_string() } else { format!("L({n},{})", n - 1) };
    Ok(CatalogEntry {
        name,
        family: ExtensionFamily::new(n, FieldFlag::Complex, matrices, SigmaTable::zero(n - 1), vec![])?,
        real_only: false,
        branch: "diagonal basis".into(),
    })
}

fn param_name(i: usize) -> String {
    const LETTERS: &[u8] = b"abcdfghjklmpquvwxyz";
    match LETTERS.get(i) {
        Some(&c) => (c as char).to_string(),
        None => format!("t{i}"),
    }
}

/// RREF basis of `{d : ℓ·d = 0 for ℓ in forms}` in `dim` coordinates.
fn kernel_rref(dim: usize, forms: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let mut e = Echelon::new(dim);
    for f in forms {
        e.insert_dense(f);
    }
    let mut k = Echelon::new(dim);
    for v in e.nullspace() {
        k.insert_dense(&v);
    }
    k.basis_dense()
}

/// `v_j + Σ_{i>j} t_i v_i` for each `j`; parameters named in order.
fn projective_lines(basis: &[Vec<Scalar>]) -> Vec<(Vec<ParamExpr>, Vec<Param>)> {
    let dim = basis.first().map_or(0, Vec::len);
    (0..basis.len())
        .map(|j| {
            let mut v: Vec<ParamExpr> = basis[j].iter().map(ParamExpr::from).collect();
            let mut params = Vec::new();
            for (t, bi) in basis[j + 1..].iter().enumerate() {
                let name = param_name(t);
                let var = ParamExpr::var(&name);
                for c in 0..dim {
                    v[c] = v[c].add(&var.scale(&bi[c]));
                }
                params.push(Param::any(&name));
            }
            (v, params)
        })
        .collect()
}

/// Resonance form of each slot as a vector over the diagonal generators.
fn resonance_forms(n: usize) -> Vec<Vec<Scalar>> {
    lemma1_slots(n)
        .into_iter()
        .map(|(x, y)| slot_exponents(n, x, y).into_iter().map(|e| Scalar::from_integer((-e).into())).collect())
        .collect()
}

fn subsets_up_to(k: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for mask in 0u32..(1 << k) {
        let s: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        if s.len() <= max {
            out.push(s);
        }
    }
    out.sort();
    out
}

/// Sign patterns (one per reachable coset) for the given slots; `false` = `+1`.
fn sign_representatives(n: usize, slots: &[usize], field: FieldFlag) -> Vec<Vec<bool>> {
    if field == FieldFlag::Complex || slots.is_empty() {
        return vec![vec![false; slots.len()]];
    }
    let all = lemma1_slots(n);
    let rows: Vec<Vec<i64>> = slots.iter().map(|&s| slot_exponents(n, all[s].0, all[s].1)).collect();
    let mut reps = BTreeSet::new();
    for mask in 0u32..(1 << slots.len()) {
        let signs: Vec<bool> = (0..slots.len()).map(|i| mask & (1 << i) != 0).collect();
        reps.insert(min_sign_pattern(&rows, &signs, false).0);
    }
    reps.into_iter().collect()
}

fn sign_label(p: &[bool]) -> String {
    p.iter().map(|&b| if b { '-' } else { '+' }).collect()
}

fn set_label(s: &[usize]) -> String {
    let parts: Vec<String> = s.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Regenerates `L(n,1)` from the resonance case split, in branch order.
pub fn enumerate_ln1(n: usize, field: FieldFlag) -> Result<Vec<CatalogEntry>> {
    if n < 4 {
        return Err(Error::SizeTooSmall { n, min: 4, what: "the L(n,1) enumerator" });
    }
    let forms = resonance_forms(n);
    let slots = lemma1_slots(n);
    let mut out = Vec::new();
    for s in subsets_up_to(slots.len(), n - 2) {
        let chosen: Vec<Vec<Scalar>> = s.iter().map(|&i| forms[i].clone()).collect();
        let basis = kernel_rref(n - 1, &chosen);
        for (j, (gens, params)) in projective_lines(&basis).into_iter().enumerate() {
            for signs in sign_representatives(n, &s, field) {
                let mut m = StructureMatrix::from_generators(n, &gens)?;
                for (&slot, &neg) in s.iter().zip(&signs) {
                    let (x, y) = slots[slot];
                    m.set_pair(x, y, ParamExpr::int(if neg { -1 } else { 1 }))?;
                }
                let family = ExtensionFamily::new(n, field, vec![m], SigmaTable::zero(1), params.clone())?;
                out.push(CatalogEntry {
                    name: String::new(),
                    family,
                    real_only: signs.iter().any(|&b| b),
                    branch: if s.is_empty() {
                        format!("resonant {{}} line {}", j + 1)
                    } else {
                        format!("resonant {} line {} signs {}", set_label(&s), j + 1, sign_label(&signs))
                    },
                });
            }
        }
    }
    for (k, e) in out.iter_mut().enumerate() {
        e.name = format!("L({n},1).{}", k + 1);
    }
    Ok(out)
}

/// RREF `k`-planes in `dim` coordinates with the given pivot columns.
fn rref_plane(dim: usize, pivots: &[usize]) -> (Vec<Vec<ParamExpr>>, Vec<Param>) {
    let mut params = Vec::new();
    let mut rows = Vec::new();
    for &p in pivots {
        let mut row = vec![ParamExpr::zero(); dim];
        row[p] = ParamExpr::int(1);
        for (c, slot) in row.iter_mut().enumerate().skip(p + 1) {
            if !pivots.contains(&c) {
                let name = param_name(params.len());
                *slot = ParamExpr::var(&name);
                params.push(Param::any(&name));
            }
        }
        rows.push(row);
    }
    (rows, params)
}

fn diag_family(n: usize, field: FieldFlag, rows: &[Vec<ParamExpr>], params: Vec<Param>) -> Result<ExtensionFamily> {
    let mats = rows.iter().map(|r| StructureMatrix::from_generators(n, r)).collect::<Result<Vec<_>>>()?;
    let f = mats.len();
    ExtensionFamily::new(n, field, mats, SigmaTable::zero(f), params)
}

fn scalars(v: &[Scalar]) -> Vec<ParamExpr> {
    v.iter().map(ParamExpr::from).collect()
}

/// Regenerates `L(4,2)`: diagonal planes by pivot pattern (plus the `σ ≠ 0`
/// plane on which every `A_{14,14}` vanishes), then one resonant slot per plane.
pub fn enumerate_l42(field: FieldFlag) -> Result<Vec<CatalogEntry>> {
    let n = 4;
    let mut out = Vec::new();
    let mut push = |family: ExtensionFamily, branch: String| {
        out.push(CatalogEntry { name: String::new(), family, real_only: false, branch });
    };
    for pivots in [[0usize, 1], [0, 2], [1, 2]] {
        let (rows, params) = rref_plane(n - 1, &pivots);
        let label = set_label(&pivots);
        push(diag_family(n, field, &rows, params)?, format!("diagonal {label}"));
        // σ can survive only if the plane lies in ker(d1 + d2 + d3)
        let basis = kernel_rref(n - 1, &[vec![Scalar::one(); n - 1]]);
        let pv: Vec<usize> = basis.iter().map(|r| r.iter().position(|x| !x.is_zero()).unwrap()).collect();
        if pv == pivots {
            let rows: Vec<Vec<ParamExpr>> = basis.iter().map(|r| scalars(r)).collect();
            let mut fam = diag_family(n, field, &rows, vec![Param::nonzero("sigma")])?;
            fam.sigma.set(0, 1, tn_dim(n) - 1, ParamExpr::var("sigma"))?;
            push(fam, format!("diagonal {label} sigma"));
        }
    }
    let forms = resonance_forms(n);
    let slots = lemma1_slots(n);
    for (s, form) in forms.iter().enumerate() {
        let basis = kernel_rref(n - 1, std::slice::from_ref(form));
        let (v1, v2) = (&basis[0], &basis[1]);
        let (x, y) = slots[s];
        // kernel line spanned by v1 + a v2: the other generator carries the slot
        let a = ParamExpr::var("a");
        let line: Vec<ParamExpr> = v1.iter().zip(v2).map(|(p, q)| ParamExpr::from(p).add(&a.scale(q))).collect();
        let mut fam = diag_family(n, field, &[line, scalars(v2)], vec![Param::any("a")])?;
        fam.matrices[1].set_pair(x, y, ParamExpr::int(1))?;
        push(fam, format!("slot {} kernel line 1", s + 1));
        let mut fam = diag_family(n, field, &[scalars(v2), scalars(v1)], vec![])?;
        fam.matrices[1].set_pair(x, y, ParamExpr::int(1))?;
        push(fam, format!("slot {} kernel line 2", s + 1));
    }
    Ok(out)
}

/// `L(4,3)`: the three generator directions.
pub fn enumerate_l43(field: FieldFlag) -> Result<Vec<CatalogEntry>> {
    let (rows, _) = rref_plane(3, &[0, 1, 2]);
    Ok(vec![CatalogEntry {
        name: String::new(),
        family: diag_family(4, field, &rows, vec![])?,
        real_only: false,
        branch: "diagonal {1,2,3}".into(),
    }])
}

fn permuted(fam: &ExtensionFamily, perm: &[usize]) -> ExtensionFamily {
    let mut out = fam.clone();
    out.matrices = perm.iter().map(|&i| fam.matrices[i].clone()).collect();
    let top = fam.order().top();
    let mut s = SigmaTable::zero(fam.f());
    for (a, b) in (0..perm.len()).flat_map(|a| (a + 1..perm.len()).map(move |b| (a, b))) {
        s.set(a, b, top, fam.sigma.get(perm[a], perm[b], top)).expect("valid");
    }
    out.sigma = s;
    out
}

fn permutations(f: usize) -> Vec<Vec<usize>> {
    if f == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(f - 1) {
        for pos in (0..=p.len()).rev() {
            let mut q = p.clone();
            q.insert(pos, f - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Same family after renaming parameters positionally and permuting the `X`'s.
fn same_up_to_renaming(a: &ExtensionFamily, b: &ExtensionFamily) -> bool {
    if a.n != b.n || a.f() != b.f() || a.params.len() != b.params.len() {
        return false;
    }
    let map: BTreeMap<String, String> =
        a.params.iter().zip(&b.params).map(|(p, q)| (p.name.clone(), q.name.clone())).collect();
    if a.params.iter().zip(&b.params).any(|(p, q)| p.domain != q.domain) {
        return false;
    }
    let renamed = a.rename(&map);
    permutations(a.f()).iter().any(|perm| {
        let p = permuted(&renamed, perm);
        p.matrices == b.matrices && p.sigma == b.sigma
    })
}

/// Enumerates `L(4,f)` and names each result after its table entry.
/// Fails if the enumeration and the stored table are not in bijection.
pub fn enumerate_l4(f: usize, field: FieldFlag) -> Result<Vec<CatalogEntry>> {
    let mut found = match f {
        1 => enumerate_ln1(4, field)?,
        2 => enumerate_l42(field)?,
        3 => enumerate_l43(field)?,
        _ => return Err(Error::FOutOfRange { n: 4, f, max: 3 }),
    };
    let table = table_entries(4, f, field)?;
    if found.len() != table.len() {
        return Err(Error::TableMismatch(format!(
            "enumerated {} families, table lists {}",
            found.len(),
            table.len()
        )));
    }
    let mut used = vec![false; table.len()];
    for e in &mut found {
        let hit = table
            .iter()
            .enumerate()
            .find(|(i, t)| !used[*i] && same_up_to_renaming(&e.family, &t.family))
            .map(|(i, _)| i);
        let Some(i) = hit else {
            return Err(Error::TableMismatch(format!("branch `{}` matches no table entry", e.branch)));
        };
        used[i] = true;
        e.name = table[i].name.clone();
        e.real_only = table[i].real_only;
    }
    Ok(found)
}

pub fn enumerate_l41(field: FieldFlag) -> Result<Vec<CatalogEntry>> {
    enumerate_l4(1, field)
}

#[derive(Clone, Debug)]
pub struct AssembledAlgebra {
    pub name: String,
    pub n: usize,
    pub f: usize,
    pub values: BTreeMap<String, Scalar>,
    pub matrices: Vec<Matrix>,
    pub algebra: LieAlgebra,
}

impl AssembledAlgebra {
    pub fn nr_dim(&self) -> usize {
        tn_dim(self.n)
    }
}

/// Binds every parameter, checks nilindependence and Jacobi, and builds the algebra.
pub fn assemble(entry: &CatalogEntry, values: &BTreeMap<String, Scalar>) -> Result<AssembledAlgebra> {
    assemble_family(&entry.name, &entry.family, values)
}

pub fn assemble_family(
    name: &str,
    fam: &ExtensionFamily,
    values: &BTreeMap<String, Scalar>,
) -> Result<AssembledAlgebra> {
    let bound = fam.bind(values)?;
    if let Some(v) = bound.variables().into_iter().next() {
        return Err(Error::UnboundParameter(v));
    }
    let empty = BTreeMap::new();
    let matrices = bound.instantiate_matrices(&empty)?;
    if !nilindependent(&matrices)?.independent {
        let vals: Vec<String> = values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        return Err(Error::NotNilindependent(format!(
            "{name} at [{}] has a nilpotent combination of structure matrices",
            vals.join(", ")
        )));
    }
    let algebra = bound.assemble(&empty)?;
    let rep = check_jacobi(&algebra);
    if !rep.is_ok() {
        return Err(Error::JacobiViolated(rep.describe(&algebra)));
    }
    Ok(AssembledAlgebra { name: name.into(), n: fam.n, f: fam.f(), values: values.clone(), matrices, algebra })
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Signature {
    pub dim: usize,
    pub derived_series: Vec<usize>,
    pub nilradical_central_series: Vec<usize>,
    pub center_dim: usize,
    /// Rank of the diagonals of the structure matrices.
    pub diagonal_rank: usize,
    pub nilradical_dim: usize,
}

impl Signature {
    /// `dim NR ≥ ½ dim L`.
    pub fn nilradical_bound_holds(&self) -> bool {
        2 * self.nilradical_dim >= self.dim
    }
}

pub fn invariant_signature(alg: &AssembledAlgebra) -> Signature {
    let nr: Vec<_> = (alg.f..alg.algebra.dim())
        .map(|i| std::iter::once((i, Scalar::one())).collect())
        .collect();
    let diags: Vec<Vec<Scalar>> = alg.matrices.iter().map(Matrix::diagonal).collect();
    Signature {
        dim: alg.algebra.dim(),
        derived_series: derived_series(&alg.algebra),
        nilradical_central_series: central_series_of(&alg.algebra, &nr),
        center_dim: center_dim(&alg.algebra),
        diagonal_rank: if diags.is_empty() { 0 } else { rank_of(&diags) },
        nilradical_dim: alg.nr_dim(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Identification {
    pub name: String,
    /// Table parameter → value (possibly symbolic in the input's parameters).
    pub values: BTreeMap<String, ParamExpr>,
    /// `perm[α]` is the input matrix playing the role of the table's `X^{α+1}`.
    pub permutation: Vec<usize>,
}

/// Solves `entry(params) = target` for table expressions affine in `unknowns`.
fn solve_affine(eqs: &[(ParamExpr, ParamExpr)], unknowns: &[String]) -> Option<BTreeMap<String, ParamExpr>> {
    if unknowns.is_empty() {
        return Some(BTreeMap::new());
    }
    let rows: Vec<Vec<Scalar>> =
        eqs.iter().map(|(e, _)| unknowns.iter().map(|u| e.linear_coefficient(u)).collect()).collect();
    let m = Matrix::from_rows(rows).ok()?;
    let rhs: Vec<ParamExpr> = eqs.iter().map(|(e, t)| t.sub(&ParamExpr::constant(e.constant_term()))).collect();
    let monomials: BTreeSet<_> = rhs.iter().flat_map(|r| r.terms().map(|(m, _)| m.clone())).collect();
    let mut sol: BTreeMap<String, ParamExpr> = unknowns.iter().map(|u| (u.clone(), ParamExpr::zero())).collect();
    for mono in monomials {
        let b: Vec<Scalar> = rhs
            .iter()
            .map(|r| r.terms().find(|(m, _)| **m == mono).map(|(_, c)| c.clone()).unwrap_or_else(Scalar::zero))
            .collect();
        let x = solve(&m, &b)?;
        for (u, c) in unknowns.iter().zip(x) {
            let e = sol.get_mut(u).unwrap();
            *e = e.add(&ParamExpr::term(mono.clone(), c));
        }
    }
    Some(sol)
}

/// Substitutes expressions into an expression that is affine in the substituted names.
fn substitute_affine(e: &ParamExpr, values: &BTreeMap<String, ParamExpr>) -> Option<ParamExpr> {
    let mut out = ParamExpr::constant(e.constant_term());
    let mut rest = e.sub(&ParamExpr::constant(e.constant_term()));
    for (name, v) in values {
        let c = e.linear_coefficient(name);
        if !c.is_zero() {
            out = out.add(&v.scale(&c));
            rest = rest.sub(&ParamExpr::var(name).scale(&c));
        }
    }
    rest.is_zero().then_some(out)
}

fn match_entry(entry: &CatalogEntry, target: &ExtensionFamily) -> Option<Identification> {
    let table = &entry.family;
    if table.n != target.n || table.f() != target.f() {
        return None;
    }
    let unknowns: Vec<String> = table.params.iter().map(|p| p.name.clone()).collect();
    let top = table.order().top();
    for perm in permutations(table.f()) {
        let t = permuted(target, &perm);
        let mut eqs = Vec::new();
        for (a, b) in table.matrices.iter().zip(&t.matrices) {
            for (x, y) in a.generators().into_iter().zip(b.generators()) {
                eqs.push((x, y));
            }
        }
        for a in 0..table.f() {
            for b in a + 1..table.f() {
                eqs.push((table.sigma.get(a, b, top), t.sigma.get(a, b, top)));
            }
        }
        let Some(values) = solve_affine(&eqs, &unknowns) else { continue };
        let domain_ok = table.params.iter().all(|p| {
            p.domain == ParamDomain::Any || !values.get(&p.name).is_some_and(ParamExpr::is_zero)
        });
        if !domain_ok {
            continue;
        }
        let sub = |e: &ParamExpr| substitute_affine(e, &values);
        let mats_ok = table.matrices.iter().zip(&t.matrices).all(|(a, b)| {
            a.try_map(|e| sub(e).ok_or(Error::Undecided(String::new()))).is_ok_and(|m| m == *b)
        });
        let sigma_ok = table.sigma.map(|e| sub(e).unwrap_or_default()) == t.sigma;
        if mats_ok && sigma_ok {
            return Some(Identification { name: entry.name.clone(), values, permutation: perm });
        }
    }
    None
}

/// First table entry (in table order) that the family equals after solving
/// for the entry's parameters and permuting the `X`'s.
pub fn identify(fam: &ExtensionFamily, field: FieldFlag) -> Result<Option<Identification>> {
    let entries = match table_entries(fam.n, fam.f(), field) {
        Ok(e) => e,
        Err(Error::Unsupported(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(entries.iter().find_map(|e| match_entry(e, fam)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::reduce;
    use crate::scalar::int;

    #[test]
    fn table_counts() {
        assert_eq!(table_entries(4, 1, FieldFlag::Complex).unwrap().len(), 12);
        assert_eq!(table_entries(4, 1, FieldFlag::Real).unwrap().len(), 13);
        assert_eq!(table_entries(4, 2, FieldFlag::Real).unwrap().len(), 10);
        assert_eq!(table_entries(4, 3, FieldFlag::Complex).unwrap().len(), 1);
        assert!(matches!(table_entries(5, 2, FieldFlag::Real), Err(Error::Unsupported(_))));
        assert!(matches!(table_entries(4, 4, FieldFlag::Real), Err(Error::FOutOfRange { .. })));
    }

    #[test]
    fn a2_parameter_census() {
        let entries = table_entries(4, 2, FieldFlag::Complex).unwrap();
        let count = |k: usize| {
            entries.iter().filter(|e| e.params().len() == k).count()
        };
        assert_eq!((count(2), count(1), count(0)), (1, 5, 4));
    }

    #[test]
    fn stored_diagonals_follow_sum_rule() {
        for f in 1..=3 {
            for e in table_entries(4, f, FieldFlag::Real).unwrap() {
                for m in &e.family.matrices {
                    let rebuilt = StructureMatrix::from_generators(4, &m.generators()).unwrap();
                    assert_eq!(rebuilt.diagonal(), m.diagonal(), "{}", e.name);
                }
            }
        }
    }

    #[test]
    fn lnn1_matches_a3_and_formula() {
        assert_eq!(lnn1_family(4).unwrap().family.matrices, table_a3()[0].family.matrices);
        let e = lnn1_family(5).unwrap();
        let o = e.family.order().clone();
        for (idx, p) in o.pairs().iter().enumerate() {
            let want = i64::from(p.i <= 2 && 2 < p.k);
            assert_eq!(e.family.matrices[1].get(idx, idx), ParamExpr::int(want));
        }
    }

    #[test]
    fn enumerators_match_tables() {
        for field in [FieldFlag::Complex, FieldFlag::Real] {
            for f in 1..=3 {
                let got = enumerate_l4(f, field).unwrap();
                let names: BTreeSet<String> = got.iter().map(|e| e.name.clone()).collect();
                let table: BTreeSet<String> =
                    table_entries(4, f, field).unwrap().into_iter().map(|e| e.name).collect();
                assert_eq!(names, table);
            }
        }
        let first = &enumerate_l41(FieldFlag::Complex).unwrap()[0];
        assert_eq!(first.name, "K_{1,1}");
    }

    #[test]
    fn tables_are_canonical() {
        for field in [FieldFlag::Complex, FieldFlag::Real] {
            for f in 1..=3 {
                for e in table_entries(4, f, field).unwrap() {
                    let red = reduce(&e.family, field).unwrap();
                    assert_eq!(red, e.family, "{} over {field}", e.name);
                }
            }
        }
    }

    #[test]
    fn identification() {
        let t = table_entries(4, 1, FieldFlag::Real).unwrap();
        let r113 = t.iter().find(|e| e.name == "R_{1,13}").unwrap();
        let id = identify(&r113.family, FieldFlag::Real).unwrap().unwrap();
        assert_eq!(id.name, "R_{1,13}");
        let c = reduce(&r113.family, FieldFlag::Complex).unwrap();
        assert_eq!(identify(&c, FieldFlag::Complex).unwrap().unwrap().name, "K_{1,12}");
        // K_{1,1} at a concrete point
        let k11 = &t[0];
        let vals: BTreeMap<String, Scalar> = [("a".into(), int(2)), ("b".into(), int(3))].into();
        let id = identify(&k11.family.bind(&vals).unwrap(), FieldFlag::Real).unwrap().unwrap();
        assert_eq!(id.name, "K_{1,1}");
        assert_eq!(id.values["b"], ParamExpr::int(3));
        // K_{2,4} with its matrices swapped
        let k24 = &table_entries(4, 2, FieldFlag::Real).unwrap()[3];
        let swapped = permuted(&k24.family, &[1, 0]);
        let id = identify(&swapped, FieldFlag::Real).unwrap().unwrap();
        assert_eq!((id.name.as_str(), id.permutation.clone()), ("K_{2,4}", vec![1, 0]));
    }

    #[test]
    fn assembly_and_signatures() {
        let k31 = &table_entries(4, 3, FieldFlag::Real).unwrap()[0];
        let a = assemble(k31, &BTreeMap::new()).unwrap();
        assert_eq!(a.algebra.dim(), 9);
        let sig = invariant_signature(&a);
        assert_eq!(sig.derived_series, vec![9, 6, 3, 0]);
        assert_eq!(sig.nilradical_central_series, vec![6, 3, 1, 0]);
        assert!(sig.nilradical_bound_holds());
        let k22 = &table_entries(4, 2, FieldFlag::Real).unwrap()[1];
        assert!(matches!(
            assemble(k22, &[("sigma".into(), int(0))].into()),
            Err(Error::ParamDomain { .. })
        ));
        let a = assemble(k22, &[("sigma".into(), int(1))].into()).unwrap();
        assert_eq!(a.algebra.structure_constant(0, 1, 2 + 5), int(1));
        let k11 = &table_entries(4, 1, FieldFlag::Real).unwrap()[0];
        assert!(assemble(k11, &[("a".into(), int(0)), ("b".into(), int(0))].into()).is_ok());
        assert!(matches!(assemble(k11, &BTreeMap::new()), Err(Error::UnboundParameter(_))));
    }

    #[test]
    fn all_resonances_force_nilpotent() {
        // the three resonance forms are independent, so only d = 0 survives
        assert!(kernel_rref(3, &resonance_forms(4)).is_empty());
        for n in 5..=7 {
            assert_eq!(kernel_rref(n - 1, &resonance_forms(n)).len(), 0, "n = {n}");
        }
    }

    #[test]
    fn general_n_enumeration() {
        for n in 5..=6 {
            let list = enumerate_ln1(n, FieldFlag::Real).unwrap();
            assert!(!list.is_empty());
            for e in &list {
                assert!(e.family.matrices[0].off_diagonal().len() <= n - 2);
                assert_eq!(reduce(&e.family, FieldFlag::Real).unwrap(), e.family, "{}", e.branch);
            }
        }
    }
}
