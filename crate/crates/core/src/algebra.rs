//! Stratified nilpotent Lie algebras given by exact structure constants.

use crate::linalg::RatMatrix;
use crate::scalar::{parse_rat, rat_to_string, Coeff, Rat};
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::ops::Range;
use thiserror::Error;

/// Basis indices in errors are 1-based, matching the JSON format.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("malformed algebra description: {0}")]
    MalformedSpec(String),
    #[error("grading violation: [e{i},e{j}] has a component on e{k} (layers {li} + {lj} != {lk})")]
    GradingViolation { i: usize, j: usize, k: usize, li: usize, lj: usize, lk: usize },
    #[error("Jacobi identity fails on (e{i}, e{j}, e{k})")]
    JacobiViolation { i: usize, j: usize, k: usize },
    #[error("layer {layer} is not generated by the first layer: rank of [V1, V{prev}] is {rank}, expected {expected}", prev = layer - 1)]
    GenerationFailure { layer: usize, rank: usize, expected: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Coefficient written as a string (`"p/q"`) or a JSON integer.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffRepr {
    Int(i64),
    Text(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketSpec {
    pub i: usize,
    pub j: usize,
    pub coeffs: BTreeMap<String, CoeffRepr>,
}

/// On-disk description: `{"layers": [...], "brackets": [{"i", "j", "coeffs": {"k": "p/q"}}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub layers: Vec<usize>,
    #[serde(default)]
    pub brackets: Vec<BracketSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StratifiedLieAlgebra {
    name: String,
    layer_dims: Vec<usize>,
    offsets: Vec<usize>,
    degrees: Vec<usize>,
    // brackets[i][j] lists the nonzero (k, c^k_ij), antisymmetric in (i, j).
    brackets: Vec<Vec<Vec<(usize, Rat)>>>,
}

impl StratifiedLieAlgebra {
    /// Builds and validates an algebra from 0-based bracket data
    /// `(i, j, [(k, c^k_ij)])`. Each unordered pair may appear once.
    pub fn new(
        name: impl Into<String>,
        layer_dims: Vec<usize>,
        brackets: Vec<(usize, usize, Vec<(usize, Rat)>)>,
    ) -> Result<Self, AlgebraError> {
        if layer_dims.is_empty() || layer_dims.contains(&0) {
            return Err(AlgebraError::MalformedSpec("layer dimensions must be positive and non-empty".into()));
        }
        let mut offsets = vec![0];
        for m in &layer_dims {
            offsets.push(offsets.last().unwrap() + m);
        }
        let n = *offsets.last().unwrap();
        if n > 30 {
            return Err(AlgebraError::MalformedSpec(format!("dimension {n} exceeds the supported maximum of 30")));
        }
        let degrees: Vec<usize> =
            (0..n).map(|k| (0..layer_dims.len()).find(|&l| k < offsets[l + 1]).unwrap() + 1).collect();
        let mut table = vec![vec![Vec::<(usize, Rat)>::new(); n]; n];
        let mut seen = vec![vec![false; n]; n];
        for (i, j, coeffs) in brackets {
            if i >= n || j >= n {
                return Err(AlgebraError::MalformedSpec(format!("bracket index out of range: ({}, {})", i + 1, j + 1)));
            }
            if i == j {
                return Err(AlgebraError::MalformedSpec(format!("[e{0},e{0}] must vanish", i + 1)));
            }
            if seen[i][j] {
                return Err(AlgebraError::MalformedSpec(format!("bracket [e{},e{}] given twice", i + 1, j + 1)));
            }
            seen[i][j] = true;
            seen[j][i] = true;
            let mut dense: BTreeMap<usize, Rat> = BTreeMap::new();
            for (k, c) in coeffs {
                if k >= n {
                    return Err(AlgebraError::MalformedSpec(format!("coefficient index e{} out of range", k + 1)));
                }
                *dense.entry(k).or_insert_with(Rat::zero) += c;
            }
            for (k, c) in dense {
                if c.is_zero() {
                    continue;
                }
                if degrees[i] + degrees[j] != degrees[k] {
                    return Err(AlgebraError::GradingViolation {
                        i: i + 1,
                        j: j + 1,
                        k: k + 1,
                        li: degrees[i],
                        lj: degrees[j],
                        lk: degrees[k],
                    });
                }
                table[j][i].push((k, -c.clone()));
                table[i][j].push((k, c));
            }
        }
        let alg = StratifiedLieAlgebra { name: name.into(), layer_dims, offsets, degrees, brackets: table };
        alg.check_jacobi()?;
        alg.check_generation()?;
        Ok(alg)
    }

    pub fn from_spec(spec: &AlgebraSpec) -> Result<Self, AlgebraError> {
        let mut brackets = Vec::new();
        for b in &spec.brackets {
            if b.i == 0 || b.j == 0 {
                return Err(AlgebraError::MalformedSpec("bracket indices are 1-based".into()));
            }
            let mut coeffs = Vec::new();
            for (k, c) in &b.coeffs {
                let k: usize = k
                    .trim()
                    .trim_start_matches('e')
                    .parse()
                    .map_err(|_| AlgebraError::MalformedSpec(format!("bad basis index {k:?}")))?;
                if k == 0 {
                    return Err(AlgebraError::MalformedSpec("coefficient indices are 1-based".into()));
                }
                let c = match c {
                    CoeffRepr::Int(v) => Rat::from_integer((*v).into()),
                    CoeffRepr::Text(s) => {
                        parse_rat(s).ok_or_else(|| AlgebraError::MalformedSpec(format!("bad coefficient {s:?}")))?
                    }
                };
                coeffs.push((k - 1, c));
            }
            brackets.push((b.i - 1, b.j - 1, coeffs));
        }
        let name = spec.name.clone().unwrap_or_else(|| "custom".into());
        StratifiedLieAlgebra::new(name, spec.layers.clone(), brackets)
    }

    pub fn from_json_str(s: &str) -> Result<Self, AlgebraError> {
        let spec: AlgebraSpec = serde_json::from_str(s).map_err(|e| AlgebraError::MalformedSpec(e.to_string()))?;
        StratifiedLieAlgebra::from_spec(&spec)
    }

    pub fn to_spec(&self) -> AlgebraSpec {
        let n = self.dim();
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.brackets[i][j].is_empty() {
                    continue;
                }
                let coeffs = self.brackets[i][j]
                    .iter()
                    .map(|(k, c)| ((k + 1).to_string(), CoeffRepr::Text(rat_to_string(c))))
                    .collect();
                brackets.push(BracketSpec { i: i + 1, j: j + 1, coeffs });
            }
        }
        AlgebraSpec { name: Some(self.name.clone()), layers: self.layer_dims.clone(), brackets }
    }

    /// Commutative group ℝⁿ, a single layer.
    pub fn abelian(n: usize) -> Self {
        StratifiedLieAlgebra::new(format!("abelian{n}"), vec![n], vec![]).expect("abelian algebra is valid")
    }

    /// Heisenberg algebra of dimension `2n+1` with `[e_i, e_{n+i}] = e_{2n+1}`.
    pub fn heisenberg(n: usize) -> Self {
        assert!(n >= 1);
        let br = (0..n).map(|i| (i, n + i, vec![(2 * n, Rat::one())])).collect();
        StratifiedLieAlgebra::new(format!("heisenberg{n}"), vec![2 * n, 1], br).expect("Heisenberg algebra is valid")
    }

    /// Engel algebra: layers (2,1,1), `[e1,e2] = e3`, `[e1,e3] = e4`, other brackets zero.
    pub fn engel() -> Self {
        let br = vec![(0, 1, vec![(2, Rat::one())]), (0, 2, vec![(3, Rat::one())])];
        StratifiedLieAlgebra::new("engel", vec![2, 1, 1], br).expect("Engel algebra is valid")
    }

    /// Looks up a built-in algebra by name: `abelianN`, `heisenbergN`, `engel`.
    pub fn preset(name: &str) -> Option<Self> {
        if name == "engel" {
            return Some(Self::engel());
        }
        if let Some(n) = name.strip_prefix("heisenberg") {
            return n.parse().ok().filter(|&n| n >= 1).map(Self::heisenberg);
        }
        if let Some(n) = name.strip_prefix("abelian") {
            return n.parse().ok().filter(|&n| (1..=30).contains(&n)).map(Self::abelian);
        }
        None
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Nilpotency step κ.
    pub fn step(&self) -> usize {
        self.layer_dims.len()
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    /// `offsets[l]` is the first basis index of layer `l+1`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Basis indices of layer `l` (1-based layer number).
    pub fn layer_range(&self, l: usize) -> Range<usize> {
        self.offsets[l - 1]..self.offsets[l]
    }

    /// Layer number (1-based) of each basis vector.
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn degree(&self, k: usize) -> usize {
        self.degrees[k]
    }

    /// Homogeneous dimension Q = Σ j·m_j.
    pub fn homogeneous_dimension(&self) -> usize {
        self.layer_dims.iter().enumerate().map(|(j, m)| (j + 1) * m).sum()
    }

    pub fn horizontal_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn bracket_terms(&self, i: usize, j: usize) -> &[(usize, Rat)] {
        &self.brackets[i][j]
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> Rat {
        self.brackets[i][j].iter().find(|(kk, _)| *kk == k).map(|(_, c)| c.clone()).unwrap_or_else(Rat::zero)
    }

    pub fn is_abelian(&self) -> bool {
        self.brackets.iter().flatten().all(|v| v.is_empty())
    }

    /// Bracket of coordinate vectors.
    pub fn bracket<C: Coeff>(&self, v: &[C], w: &[C]) -> Result<Vec<C>, AlgebraError> {
        let n = self.dim();
        if v.len() != n || w.len() != n {
            return Err(AlgebraError::DimensionMismatch { expected: n, got: v.len().min(w.len()) });
        }
        Ok(self.bracket_unchecked(v, w))
    }

    pub(crate) fn bracket_unchecked<C: Coeff>(&self, v: &[C], w: &[C]) -> Vec<C> {
        let n = self.dim();
        let mut out = vec![C::zero(); n];
        for i in 0..n {
            if v[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if w[j].is_zero() || self.brackets[i][j].is_empty() {
                    continue;
                }
                let vw = v[i].clone() * w[j].clone();
                for (k, c) in &self.brackets[i][j] {
                    out[*k] = out[*k].clone() + C::from_rat(c) * vw.clone();
                }
            }
        }
        out
    }

    fn basis_vector(&self, i: usize) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); self.dim()];
        v[i] = Rat::one();
        v
    }

    fn check_jacobi(&self) -> Result<(), AlgebraError> {
        let n = self.dim();
        let e: Vec<Vec<Rat>> = (0..n).map(|i| self.basis_vector(i)).collect();
        for i in 0..n {
            for j in i + 1..n {
                let eij = self.bracket_unchecked(&e[i], &e[j]);
                for k in j + 1..n {
                    let a = self.bracket_unchecked(&eij, &e[k]);
                    let b = self.bracket_unchecked(&self.bracket_unchecked(&e[j], &e[k]), &e[i]);
                    let c = self.bracket_unchecked(&self.bracket_unchecked(&e[k], &e[i]), &e[j]);
                    if (0..n).any(|m| !(a[m].clone() + b[m].clone() + c[m].clone()).is_zero()) {
                        return Err(AlgebraError::JacobiViolation { i: i + 1, j: j + 1, k: k + 1 });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_generation(&self) -> Result<(), AlgebraError> {
        for l in 1..self.step() {
            let mut rows = Vec::new();
            for a in self.layer_range(1) {
                for b in self.layer_range(l) {
                    let v = self.bracket_unchecked(&self.basis_vector(a), &self.basis_vector(b));
                    rows.push(v[self.layer_range(l + 1)].to_vec());
                }
            }
            let rank = RatMatrix::from_rows(rows).rank();
            let expected = self.layer_dims[l];
            if rank != expected {
                return Err(AlgebraError::GenerationFailure { layer: l + 1, rank, expected });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};
    use proptest::prelude::*;

    #[test]
    fn presets_have_expected_shape() {
        let h = StratifiedLieAlgebra::heisenberg(1);
        assert_eq!(h.layer_dims(), &[2, 1]);
        assert_eq!(h.homogeneous_dimension(), 4);
        assert_eq!(h.structure_constant(0, 1, 2), rat_int(1));
        assert_eq!(h.structure_constant(1, 0, 2), rat_int(-1));
        let e = StratifiedLieAlgebra::engel();
        assert_eq!(e.homogeneous_dimension(), 7);
        assert_eq!(e.step(), 3);
        assert_eq!(e.structure_constant(1, 2, 3), Rat::zero());
        let h2 = StratifiedLieAlgebra::heisenberg(2);
        assert_eq!(h2.homogeneous_dimension(), 6);
        assert_eq!(h2.structure_constant(1, 3, 4), rat_int(1));
        assert_eq!(h2.structure_constant(0, 1, 4), Rat::zero());
    }

    #[test]
    fn json_round_trip() {
        for alg in [StratifiedLieAlgebra::heisenberg(2), StratifiedLieAlgebra::engel(), StratifiedLieAlgebra::abelian(3)] {
            let s = serde_json::to_string(&alg.to_spec()).unwrap();
            assert_eq!(StratifiedLieAlgebra::from_json_str(&s).unwrap(), alg);
        }
    }

    #[test]
    fn rejects_bad_grading() {
        let err = StratifiedLieAlgebra::from_json_str(r#"{"layers":[2,1],"brackets":[{"i":1,"j":2,"coeffs":{"2":"1"}}]}"#)
            .unwrap_err();
        assert!(matches!(err, AlgebraError::GradingViolation { i: 1, j: 2, k: 2, .. }));
    }

    #[test]
    fn rejects_missing_generation() {
        let err = StratifiedLieAlgebra::from_json_str(r#"{"layers":[2,1]}"#).unwrap_err();
        assert_eq!(err, AlgebraError::GenerationFailure { layer: 2, rank: 0, expected: 1 });
    }

    #[test]
    fn rejects_jacobi_failure() {
        // Layers (3,3,1): choose [V1,V2] brackets that break Jacobi on (e1,e2,e3).
        let spec = r#"{"layers":[3,3,1],"brackets":[
            {"i":1,"j":2,"coeffs":{"4":1}},
            {"i":1,"j":3,"coeffs":{"5":1}},
            {"i":2,"j":3,"coeffs":{"6":1}},
            {"i":1,"j":6,"coeffs":{"7":1}}]}"#;
        let err = StratifiedLieAlgebra::from_json_str(spec).unwrap_err();
        assert!(matches!(err, AlgebraError::JacobiViolation { .. }), "{err:?}");
    }

    #[test]
    fn rejects_malformed() {
        for s in [
            r#"{"layers":[]}"#,
            r#"{"layers":[2,0]}"#,
            r#"{"layers":[2,1],"brackets":[{"i":1,"j":1,"coeffs":{"3":"1"}}]}"#,
            r#"{"layers":[2,1],"brackets":[{"i":1,"j":4,"coeffs":{"3":"1"}}]}"#,
            r#"{"layers":[2,1],"brackets":[{"i":1,"j":2,"coeffs":{"3":"x"}}]}"#,
            r#"{"layers":[2,1],"brackets":[{"i":1,"j":2,"coeffs":{"3":"1"}},{"i":2,"j":1,"coeffs":{"3":"1"}}]}"#,
            r#"not json"#,
        ] {
            assert!(matches!(StratifiedLieAlgebra::from_json_str(s), Err(AlgebraError::MalformedSpec(_))), "{s}");
        }
    }

    #[test]
    fn engel_e2_e3_bracket_is_a_free_choice() {
        // Jacobi alone does not pin [e2,e3]; the preset sets it to zero.
        let br = vec![(0, 1, vec![(2, rat_int(1))]), (0, 2, vec![(3, rat_int(1))]), (1, 2, vec![(3, rat(2, 3))])];
        assert!(StratifiedLieAlgebra::new("e", vec![2, 1, 1], br).is_ok());
        let br = vec![(0, 1, vec![(2, rat_int(1))]), (0, 2, vec![(3, rat_int(1))])];
        assert!(StratifiedLieAlgebra::new("e", vec![2, 1, 1], br).is_ok());
    }

    fn vec_rat(n: usize) -> impl Strategy<Value = Vec<Rat>> {
        proptest::collection::vec((-5i64..6, 1i64..4), n).prop_map(|v| v.into_iter().map(|(a, b)| rat(a, b)).collect())
    }

    proptest! {
        #[test]
        fn bracket_antisymmetric_and_jacobi(x in vec_rat(4), y in vec_rat(4), z in vec_rat(4)) {
            let g = StratifiedLieAlgebra::engel();
            let xy = g.bracket(&x, &y).unwrap();
            let yx = g.bracket(&y, &x).unwrap();
            prop_assert!(xy.iter().zip(&yx).all(|(a, b)| (a + b).is_zero()));
            let a = g.bracket(&g.bracket(&x, &y).unwrap(), &z).unwrap();
            let b = g.bracket(&g.bracket(&y, &z).unwrap(), &x).unwrap();
            let c = g.bracket(&g.bracket(&z, &x).unwrap(), &y).unwrap();
            prop_assert!((0..4).all(|k| (a[k].clone() + b[k].clone() + c[k].clone()).is_zero()));
        }
    }
}
