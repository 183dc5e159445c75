//! JSON interchange format for algebras and extension families.
//!
//! Rationals are always strings (`"p/q"`), matrix entries are sparse
//! `[[i,k],[a,b],"expr"]` triples with 1-based pair labels, and `[X^α,X^β]`
//! entries are `[[α,β],"expr"]` (on `N_1n`) or `[[α,β],[p,q],"expr"]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::basis::{BasisOrder, PairIdx};
use crate::error::{Error, Result};
use crate::expr::ParamExpr;
use crate::family::{ExtensionFamily, FieldFlag, Param, ParamDomain, SigmaTable, StructureMatrix};
use crate::liecore::LieAlgebra;
use crate::scalar::{format_ratio, parse_scalar, Scalar};
use crate::triangular::build_tn;

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    #[serde(default)]
    pub domain: ParamDomain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

pub type MatrixEntry = ([usize; 2], [usize; 2], String);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaEntry {
    Top([usize; 2], String),
    At([usize; 2], [usize; 2], String),
}

/// Explicit structure constants `[x, y] = c z`, by basis name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureBlock {
    pub basis: Vec<String>,
    pub brackets: Vec<(String, String, String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraDocument {
    pub version: String,
    pub n: usize,
    pub f: usize,
    pub field: FieldFlag,
    #[serde(default)]
    pub params: Vec<ParamSpec>,
    #[serde(default)]
    pub matrices: Vec<Vec<MatrixEntry>>,
    #[serde(default)]
    pub sigma: Vec<SigmaEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform_log: Option<Vec<String>>,
}

fn pair_of(o: &BasisOrder, idx: usize) -> [usize; 2] {
    let p = o.pair(idx);
    [p.i, p.k]
}

impl AlgebraDocument {
    pub fn parse(text: &str) -> Result<Self> {
        // serde_json messages already end in "at line L column C"
        let doc: AlgebraDocument = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        if doc.version != FORMAT_VERSION {
            return Err(Error::Document(format!("unsupported version `{}`", doc.version)));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    /// The bare `T(n)` as an explicit structure block (`f = 0`).
    pub fn from_tn(n: usize) -> Result<Self> {
        let t = build_tn(n)?;
        let mut doc = Self::from_algebra(t.algebra(), n, 0, FieldFlag::Real);
        doc.provenance = Some(format!("T({n})"));
        Ok(doc)
    }

    /// Any algebra, stored by structure constants only.
    pub fn from_algebra(alg: &LieAlgebra, n: usize, f: usize, field: FieldFlag) -> Self {
        let names = alg.basis_names();
        let brackets = alg
            .canonical_constants()
            .into_iter()
            .map(|(x, y, z, c)| (names[x].clone(), names[y].clone(), names[z].clone(), format_ratio(&c)))
            .collect();
        AlgebraDocument {
            version: FORMAT_VERSION.into(),
            n,
            f,
            field,
            params: Vec::new(),
            matrices: Vec::new(),
            sigma: Vec::new(),
            provenance: None,
            structure: Some(StructureBlock { basis: names.to_vec(), brackets }),
            transform_log: None,
        }
    }

    pub fn from_family(fam: &ExtensionFamily, provenance: Option<&str>) -> Self {
        let o = fam.order();
        let top = o.top();
        let matrices = fam
            .matrices
            .iter()
            .map(|m| {
                m.entries()
                    .map(|(row, col, e)| (pair_of(o, row), pair_of(o, col), e.to_string()))
                    .collect()
            })
            .collect();
        let sigma = fam
            .sigma
            .entries()
            .into_iter()
            .map(|(a, b, p, e)| {
                let ab = [a + 1, b + 1];
                if p == top {
                    SigmaEntry::Top(ab, e.to_string())
                } else {
                    SigmaEntry::At(ab, pair_of(o, p), e.to_string())
                }
            })
            .collect();
        AlgebraDocument {
            version: FORMAT_VERSION.into(),
            n: fam.n,
            f: fam.f(),
            field: fam.field,
            params: fam
                .all_params()
                .into_iter()
                .map(|p| ParamSpec { name: p.name, domain: p.domain, value: None })
                .collect(),
            matrices,
            sigma,
            provenance: provenance.map(str::to_string),
            structure: None,
            transform_log: None,
        }
    }

    /// Parameter values fixed by the document.
    pub fn bindings(&self) -> Result<BTreeMap<String, Scalar>> {
        let mut out = BTreeMap::new();
        for p in &self.params {
            if let Some(v) = &p.value {
                out.insert(p.name.clone(), parse_scalar(v)?);
            }
        }
        Ok(out)
    }

    pub fn is_family(&self) -> bool {
        self.structure.is_none() && self.f > 0
    }

    /// The (symbolic) family; stored values are not substituted.
    pub fn to_family(&self) -> Result<ExtensionFamily> {
        if self.structure.is_some() {
            return Err(Error::Document("document stores explicit structure constants, not structure matrices".into()));
        }
        if self.matrices.len() != self.f {
            return Err(Error::Document(format!("f = {} but {} matrices given", self.f, self.matrices.len())));
        }
        let order = BasisOrder::new(self.n)?;
        let idx = |p: [usize; 2]| order.pair_to_index(PairIdx::new(p[0], p[1]));
        let mut matrices = Vec::with_capacity(self.f);
        for list in &self.matrices {
            let mut m = StructureMatrix::zero(self.n)?;
            for (row, col, e) in list {
                let (r, c) = (idx(*row)?, idx(*col)?);
                let v: ParamExpr = e.parse()?;
                m.set(r, c, m.get(r, c).add(&v));
            }
            matrices.push(m);
        }
        let mut sigma = SigmaTable::zero(self.f);
        for s in &self.sigma {
            let (ab, p, e) = match s {
                SigmaEntry::Top(ab, e) => (ab, order.top(), e),
                SigmaEntry::At(ab, pq, e) => (ab, idx(*pq)?, e),
            };
            let [a, b] = *ab;
            if a == 0 || b == 0 || a > self.f || b > self.f {
                return Err(Error::Document(format!("sigma index [{a},{b}] outside 1..={}", self.f)));
            }
            if a == b {
                return Err(Error::Antisymmetry(a - 1));
            }
            sigma.add(a - 1, b - 1, p, &e.parse()?)?;
        }
        let params = self.params.iter().map(|p| Param { name: p.name.clone(), domain: p.domain }).collect();
        ExtensionFamily::new(self.n, self.field, matrices, sigma, params)
    }

    /// Pairs listed twice with inconsistent signs, or `[x, x] ≠ 0`.
    pub fn antisymmetry_violations(&self) -> Vec<String> {
        let Some(s) = &self.structure else { return Vec::new() };
        let mut seen: BTreeMap<(String, String, String), Scalar> = BTreeMap::new();
        let mut out = Vec::new();
        for (x, y, z, c) in &s.brackets {
            let Ok(c) = parse_scalar(c) else { continue };
            if x == y && c != Scalar::from_integer(0.into()) {
                out.push(format!("[{x}, {x}] has coefficient {c} on {z}"));
                continue;
            }
            if let Some(other) = seen.get(&(y.clone(), x.clone(), z.clone())) {
                if *other != -c.clone() {
                    out.push(format!("[{x}, {y}] and [{y}, {x}] disagree on {z}: {c} vs {other}"));
                }
            }
            seen.insert((x.clone(), y.clone(), z.clone()), c);
        }
        out
    }

    /// Assembles the algebra, substituting stored values for parameters.
    pub fn to_algebra(&self) -> Result<LieAlgebra> {
        self.to_algebra_with(&self.bindings()?)
    }

    pub fn to_algebra_with(&self, values: &BTreeMap<String, Scalar>) -> Result<LieAlgebra> {
        if let Some(s) = &self.structure {
            if let Some(v) = self.antisymmetry_violations().into_iter().next() {
                return Err(Error::Document(format!("antisymmetry: {v}")));
            }
            let pos = |name: &str| {
                s.basis
                    .iter()
                    .position(|b| b == name)
                    .ok_or_else(|| Error::Document(format!("unknown basis element `{name}`")))
            };
            let mut alg = LieAlgebra::new(s.basis.clone());
            let mut seen = BTreeMap::new();
            for (x, y, z, c) in &s.brackets {
                let (x, y, z) = (pos(x)?, pos(y)?, pos(z)?);
                // a pair listed in both orders is one bracket, not two
                if seen.contains_key(&(y, x, z)) {
                    continue;
                }
                seen.insert((x, y, z), ());
                alg.add_constant(x, y, z, &parse_scalar(c)?)?;
            }
            return Ok(alg);
        }
        if self.f == 0 {
            return Ok(build_tn(self.n)?.into_algebra());
        }
        let fam = self.to_family()?.bind(values)?;
        if let Some(v) = fam.variables().into_iter().next() {
            return Err(Error::UnboundParameter(v));
        }
        fam.assemble(&BTreeMap::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liecore::check_jacobi;
    use crate::scalar::int;

    #[test]
    fn tn_document() {
        let d = AlgebraDocument::from_tn(4).unwrap();
        assert_eq!(d.structure.as_ref().unwrap().brackets.len(), 4);
        let back = AlgebraDocument::parse(&d.to_json()).unwrap();
        assert_eq!(back, d);
        let alg = back.to_algebra().unwrap();
        assert_eq!(alg.dim(), 6);
        assert!(check_jacobi(&alg).is_ok());
    }

    #[test]
    fn family_round_trip() {
        let mut m = StructureMatrix::from_generators(4, &[ParamExpr::int(1), "a".parse().unwrap(), ParamExpr::int(0)])
            .unwrap();
        m.set_pair(PairIdx::new(2, 3), PairIdx::new(1, 4), ParamExpr::int(1)).unwrap();
        let fam = ExtensionFamily::new(4, FieldFlag::Real, vec![m], SigmaTable::zero(1), vec![Param::any("a")]).unwrap();
        let d = AlgebraDocument::from_family(&fam, Some("test"));
        let text = d.to_json();
        assert!(text.contains("\"a\""));
        let back = AlgebraDocument::parse(&text).unwrap();
        assert_eq!(back.to_family().unwrap(), fam);
        let mut bound = back.clone();
        bound.params[0].value = Some("2/3".into());
        assert_eq!(bound.to_algebra().unwrap().dim(), 7);
        assert!(matches!(back.to_algebra(), Err(Error::UnboundParameter(_))));
    }

    #[test]
    fn sigma_forms() {
        let json = r#"{"version":"1","n":4,"f":2,"field":"C",
            "matrices":[[[[1,2],[1,2],"1"]],[[[2,3],[2,3],"1"]]],
            "sigma":[[[1,2],"3"],[[2,1],[2,4],"1"]]}"#;
        let fam = AlgebraDocument::parse(json).unwrap().to_family().unwrap();
        let top = fam.order().top();
        assert_eq!(fam.sigma.get(0, 1, top), ParamExpr::int(3));
        let p24 = fam.order().idx(2, 4);
        assert_eq!(fam.sigma.get(0, 1, p24), ParamExpr::int(-1));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = AlgebraDocument::parse("{\n  \"version\": \"1\",\n  \"n\": x }").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = AlgebraDocument::parse(r#"{"version":"2","n":4,"f":0,"field":"R"}"#).unwrap_err();
        assert!(err.to_string().contains("version"));
    }

    #[test]
    fn antisymmetry_detected() {
        let mut d = AlgebraDocument::from_tn(3).unwrap();
        d.structure.as_mut().unwrap().brackets.push(("N23".into(), "N12".into(), "N13".into(), "1".into()));
        assert_eq!(d.antisymmetry_violations().len(), 1);
        assert!(d.to_algebra().is_err());
        let mut ok = AlgebraDocument::from_tn(3).unwrap();
        ok.structure.as_mut().unwrap().brackets.push(("N23".into(), "N12".into(), "N13".into(), "-1".into()));
        assert!(ok.antisymmetry_violations().is_empty());
        assert_eq!(ok.to_algebra().unwrap().structure_constant(0, 1, 2), int(1));
    }
}
