//! Left-invariant differential operators in Poincaré–Birkhoff–Witt normal
//! form, and matrices of them acting between spaces of forms.

use crate::algebra::StratifiedLieAlgebra;
use crate::group::VectorField;
use crate::linalg::RatMatrix;
use crate::poly::Poly;
use crate::scalar::{parse_rat, rat_to_string, Rat};
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpcalcError {
    #[error("shape mismatch: left operand has {left_cols} columns, right operand has {right_rows} rows")]
    ShapeMismatch { left_cols: usize, right_rows: usize },
    #[error("basis mismatch between composed operators")]
    BasisMismatch,
    #[error("operator has order {0}; an order-0 operator was required")]
    NotAlgebraic(usize),
    #[error("malformed operator description: {0}")]
    Malformed(String),
}

/// Exponent vector `I` of the ordered monomial `X_1^{i_1} ⋯ X_n^{i_n}`.
pub type Monomial = Vec<u16>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorPolynomial {
    n: usize,
    terms: BTreeMap<Monomial, Rat>,
}

impl OperatorPolynomial {
    pub fn zero(n: usize) -> Self {
        OperatorPolynomial { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Rat) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; n], c);
        p
    }

    pub fn generator(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        let mut p = Self::zero(n);
        p.add_term(e, Rat::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        OperatorPolynomial { n: self.n, terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    /// Largest isotropic order |I| among the terms.
    pub fn order(&self) -> usize {
        self.terms.keys().map(|m| m.iter().map(|&a| a as usize).sum()).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> Rat {
        self.terms.get(&vec![0; self.n]).cloned().unwrap_or_else(Rat::zero)
    }

    /// Coefficient of the single generator X_j.
    pub fn linear_coeff(&self, j: usize) -> Rat {
        let mut e = vec![0; self.n];
        e[j] = 1;
        self.terms.get(&e).cloned().unwrap_or_else(Rat::zero)
    }

    /// Homogeneous degree d(I) = Σ i_k d_k of a monomial.
    pub fn monomial_degree(m: &Monomial, degrees: &[usize]) -> usize {
        m.iter().zip(degrees).map(|(&a, &d)| a as usize * d).sum()
    }

    pub fn word(m: &Monomial) -> Vec<u8> {
        m.iter().enumerate().flat_map(|(k, &a)| std::iter::repeat_n(k as u8, a as usize)).collect()
    }

    /// Applies the operator to a polynomial function through the frame `X`.
    pub fn apply_to_poly(&self, frame: &[VectorField], f: &Poly) -> Poly {
        let mut out = Poly::zero_in(f.nvars());
        for (m, c) in &self.terms {
            let mut g = f.clone();
            for &k in Self::word(m).iter().rev() {
                g = frame[k as usize].apply(&g);
            }
            out = out + g.scale(c);
        }
        out
    }

    pub fn render(&self, latex: bool) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono: String = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(k, &e)| match (latex, e) {
                    (true, 1) => format!("X_{{{}}}", k + 1),
                    (true, _) => format!("X_{{{}}}^{{{}}}", k + 1, e),
                    (false, 1) => format!("X{}", k + 1),
                    (false, _) => format!("X{}^{}", k + 1, e),
                })
                .collect::<Vec<_>>()
                .join(if latex { "" } else { " " });
            let coeff = if latex && !a.is_integer() {
                format!("\\tfrac{{{}}}{{{}}}", a.numer(), a.denom())
            } else {
                rat_to_string(&a)
            };
            if mono.is_empty() {
                s.push_str(&coeff);
            } else if a.is_one() {
                s.push_str(&mono);
            } else {
                s.push_str(&coeff);
                if !latex {
                    s.push(' ');
                }
                s.push_str(&mono);
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewriteStrategy {
    /// Rewrites the leftmost inversion first; results are memoized.
    LeftmostInversion,
    /// Rewrites the rightmost inversion first, without memoization.
    RightmostInversion,
}

/// Normal-ordering engine for the universal enveloping algebra.
#[derive(Debug)]
pub struct Pbw {
    n: usize,
    degrees: Vec<usize>,
    brackets: Vec<Vec<Vec<(usize, Rat)>>>,
    memo: RwLock<HashMap<Vec<u8>, OperatorPolynomial>>,
}

impl Clone for Pbw {
    fn clone(&self) -> Self {
        Pbw {
            n: self.n,
            degrees: self.degrees.clone(),
            brackets: self.brackets.clone(),
            memo: RwLock::new(self.memo.read().unwrap().clone()),
        }
    }
}

impl Pbw {
    pub fn new(alg: &StratifiedLieAlgebra) -> Self {
        let n = alg.dim();
        let brackets = (0..n).map(|i| (0..n).map(|j| alg.bracket_terms(i, j).to_vec()).collect()).collect();
        Pbw { n, degrees: alg.degrees().to_vec(), brackets, memo: RwLock::new(HashMap::new()) }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().unwrap().len()
    }

    /// Normal form of the word `X_{w_1} ⋯ X_{w_k}`.
    pub fn normal_order(&self, word: &[u8], strategy: RewriteStrategy) -> OperatorPolynomial {
        match strategy {
            RewriteStrategy::LeftmostInversion => self.reduce_left(word),
            RewriteStrategy::RightmostInversion => self.reduce_right(word),
        }
    }

    fn sorted(&self, word: &[u8]) -> OperatorPolynomial {
        let mut e = vec![0u16; self.n];
        for &k in word {
            e[k as usize] += 1;
        }
        let mut p = OperatorPolynomial::zero(self.n);
        p.add_term(e, Rat::one());
        p
    }

    fn rewrite(&self, word: &[u8], i: usize, recurse: &dyn Fn(&[u8]) -> OperatorPolynomial) -> OperatorPolynomial {
        // X_b X_a = X_a X_b + Σ_k c^k_{ba} X_k for b > a.
        let (b, a) = (word[i] as usize, word[i + 1] as usize);
        let mut swapped = word.to_vec();
        swapped.swap(i, i + 1);
        let mut out = recurse(&swapped);
        for (k, c) in &self.brackets[b][a] {
            let mut w = word[..i].to_vec();
            w.push(*k as u8);
            w.extend_from_slice(&word[i + 2..]);
            out = out.add(&recurse(&w).scale(c));
        }
        out
    }

    fn reduce_left(&self, word: &[u8]) -> OperatorPolynomial {
        if let Some(hit) = self.memo.read().unwrap().get(word) {
            return hit.clone();
        }
        let out = match (0..word.len().saturating_sub(1)).find(|&i| word[i] > word[i + 1]) {
            None => self.sorted(word),
            Some(i) => self.rewrite(word, i, &|w| self.reduce_left(w)),
        };
        self.memo.write().unwrap().insert(word.to_vec(), out.clone());
        out
    }

    fn reduce_right(&self, word: &[u8]) -> OperatorPolynomial {
        match (0..word.len().saturating_sub(1)).rev().find(|&i| word[i] > word[i + 1]) {
            None => self.sorted(word),
            Some(i) => self.rewrite(word, i, &|w| self.reduce_right(w)),
        }
    }

    pub fn mul(&self, a: &OperatorPolynomial, b: &OperatorPolynomial) -> OperatorPolynomial {
        let mut out = OperatorPolynomial::zero(self.n);
        for (ma, ca) in &a.terms {
            let wa = OperatorPolynomial::word(ma);
            for (mb, cb) in &b.terms {
                let mut w = wa.clone();
                w.extend(OperatorPolynomial::word(mb));
                let c = ca * cb;
                for (m, v) in &self.reduce_left(&w).terms {
                    out.add_term(m.clone(), v * &c);
                }
            }
        }
        out
    }

    /// Formal L²(G) adjoint: X_j* = −X_j, order of products reversed.
    pub fn adjoint(&self, a: &OperatorPolynomial) -> OperatorPolynomial {
        let mut out = OperatorPolynomial::zero(self.n);
        for (m, c) in &a.terms {
            let mut w = OperatorPolynomial::word(m);
            w.reverse();
            let sign = if w.len().is_multiple_of(2) { c.clone() } else { -c.clone() };
            for (mm, v) in &self.reduce_left(&w).terms {
                out.add_term(mm.clone(), v * &sign);
            }
        }
        out
    }
}

/// Labels and weights of an ordered basis of forms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormBasis {
    pub labels: Vec<String>,
    pub weights: Vec<usize>,
}

impl FormBasis {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Matrix of operator polynomials mapping coefficient vectors in the column
/// basis to coefficient vectors in the row basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FormOperator {
    n: usize,
    row_basis: FormBasis,
    col_basis: FormBasis,
    entries: Vec<OperatorPolynomial>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: String,
    monomial: Vec<u16>,
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    row: usize,
    col: usize,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct FormOperatorJson {
    generators: usize,
    rows: FormBasis,
    cols: FormBasis,
    entries: Vec<EntryJson>,
}

impl FormOperator {
    pub fn zero(n: usize, row_basis: FormBasis, col_basis: FormBasis) -> Self {
        let len = row_basis.len() * col_basis.len();
        FormOperator { n, row_basis, col_basis, entries: vec![OperatorPolynomial::zero(n); len] }
    }

    pub fn identity(n: usize, basis: FormBasis) -> Self {
        let mut op = Self::zero(n, basis.clone(), basis);
        for i in 0..op.rows() {
            op.set(i, i, OperatorPolynomial::constant(n, Rat::one()));
        }
        op
    }

    pub fn from_matrix(n: usize, m: &RatMatrix, row_basis: FormBasis, col_basis: FormBasis) -> Self {
        assert_eq!((m.rows(), m.cols()), (row_basis.len(), col_basis.len()));
        let mut op = Self::zero(n, row_basis, col_basis);
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                op.set(i, j, OperatorPolynomial::constant(n, m.get(i, j).clone()));
            }
        }
        op
    }

    pub fn rows(&self) -> usize {
        self.row_basis.len()
    }

    pub fn cols(&self) -> usize {
        self.col_basis.len()
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn row_basis(&self) -> &FormBasis {
        &self.row_basis
    }

    pub fn col_basis(&self) -> &FormBasis {
        &self.col_basis
    }

    pub fn entry(&self, i: usize, j: usize) -> &OperatorPolynomial {
        &self.entries[i * self.cols() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: OperatorPolynomial) {
        let c = self.cols();
        self.entries[i * c + j] = p;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(OperatorPolynomial::is_zero)
    }

    pub fn max_order(&self) -> usize {
        self.entries.iter().map(OperatorPolynomial::order).max().unwrap_or(0)
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), OpcalcError> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(OpcalcError::ShapeMismatch { left_cols: self.cols(), right_rows: other.cols() });
        }
        if self.row_basis != other.row_basis || self.col_basis != other.col_basis {
            return Err(OpcalcError::BasisMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, OpcalcError> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&other.entries) {
            *a = a.add(b);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, OpcalcError> {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut out = self.clone();
        out.entries.iter_mut().for_each(|e| *e = e.scale(c));
        out
    }

    /// `a ∘ b`: apply `b` first.
    pub fn compose(pbw: &Pbw, a: &FormOperator, b: &FormOperator) -> Result<FormOperator, OpcalcError> {
        if a.cols() != b.rows() {
            return Err(OpcalcError::ShapeMismatch { left_cols: a.cols(), right_rows: b.rows() });
        }
        if a.col_basis != b.row_basis {
            return Err(OpcalcError::BasisMismatch);
        }
        let mut out = FormOperator::zero(a.n, a.row_basis.clone(), b.col_basis.clone());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = OperatorPolynomial::zero(a.n);
                for k in 0..a.cols() {
                    let x = a.entry(i, k);
                    let y = b.entry(k, j);
                    if x.is_zero() || y.is_zero() {
                        continue;
                    }
                    acc = acc.add(&pbw.mul(x, y));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Transpose with each entry replaced by its formal adjoint; valid for
    /// orthonormal row and column bases.
    pub fn adjoint(&self, pbw: &Pbw) -> FormOperator {
        let mut out = FormOperator::zero(self.n, self.col_basis.clone(), self.row_basis.clone());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.set(j, i, pbw.adjoint(self.entry(i, j)));
            }
        }
        out
    }

    /// Splits the operator by `row weight − column weight`.
    pub fn homogeneous_parts(&self) -> BTreeMap<i64, FormOperator> {
        let mut out: BTreeMap<i64, FormOperator> = BTreeMap::new();
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let e = self.entry(i, j);
                if e.is_zero() {
                    continue;
                }
                let k = self.row_basis.weights[i] as i64 - self.col_basis.weights[j] as i64;
                out.entry(k)
                    .or_insert_with(|| FormOperator::zero(self.n, self.row_basis.clone(), self.col_basis.clone()))
                    .set(i, j, e.clone());
            }
        }
        out
    }

    /// Whether every term X^I sitting in entry (i, j) has d(I) equal to the
    /// weight gap between row i and column j.
    pub fn is_weight_graded(&self, degrees: &[usize]) -> bool {
        (0..self.rows()).all(|i| {
            (0..self.cols()).all(|j| {
                let gap = self.row_basis.weights[i] as i64 - self.col_basis.weights[j] as i64;
                self.entry(i, j).terms().all(|(m, _)| OperatorPolynomial::monomial_degree(m, degrees) as i64 == gap)
            })
        })
    }

    pub fn to_matrix(&self) -> Result<RatMatrix, OpcalcError> {
        let ord = self.max_order();
        if ord > 0 {
            return Err(OpcalcError::NotAlgebraic(ord));
        }
        let mut m = RatMatrix::zeros(self.rows(), self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                m.set(i, j, self.entry(i, j).constant_term());
            }
        }
        Ok(m)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut entries = Vec::new();
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let e = self.entry(i, j);
                if e.is_zero() {
                    continue;
                }
                let terms =
                    e.terms().map(|(m, c)| TermJson { coeff: rat_to_string(c), monomial: m.clone() }).collect();
                entries.push(EntryJson { row: i, col: j, terms });
            }
        }
        serde_json::to_value(FormOperatorJson {
            generators: self.n,
            rows: self.row_basis.clone(),
            cols: self.col_basis.clone(),
            entries,
        })
        .expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<FormOperator, OpcalcError> {
        let j: FormOperatorJson =
            serde_json::from_value(v.clone()).map_err(|e| OpcalcError::Malformed(e.to_string()))?;
        let mut op = FormOperator::zero(j.generators, j.rows, j.cols);
        for e in j.entries {
            if e.row >= op.rows() || e.col >= op.cols() {
                return Err(OpcalcError::Malformed(format!("entry ({}, {}) out of range", e.row, e.col)));
            }
            let mut p = OperatorPolynomial::zero(j.generators);
            for t in e.terms {
                if t.monomial.len() != j.generators {
                    return Err(OpcalcError::Malformed("monomial length".into()));
                }
                let c = parse_rat(&t.coeff).ok_or_else(|| OpcalcError::Malformed(format!("coefficient {:?}", t.coeff)))?;
                p.add_term(t.monomial, c);
            }
            op.set(e.row, e.col, p);
        }
        Ok(op)
    }

    pub fn to_latex(&self) -> String {
        let rows: Vec<String> = (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.entry(i, j).render(true)).collect::<Vec<_>>().join(" & "))
            .collect();
        format!("\\begin{{pmatrix}}\n{}\n\\end{{pmatrix}}", rows.join(" \\\\\n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::CarnotGroup;
    use crate::scalar::{rat, rat_int};
    use proptest::prelude::*;

    fn gen(n: usize, j: usize) -> OperatorPolynomial {
        OperatorPolynomial::generator(n, j)
    }

    #[test]
    fn heisenberg_commutator() {
        let pbw = Pbw::new(&StratifiedLieAlgebra::heisenberg(1));
        let x1x2 = pbw.mul(&gen(3, 0), &gen(3, 1));
        let x2x1 = pbw.mul(&gen(3, 1), &gen(3, 0));
        assert_eq!(x1x2.sub(&x2x1), gen(3, 2));
        // X2 X1 X1 = X1^2 X2 - 2 X1 X3
        let p = pbw.normal_order(&[1, 0, 0], RewriteStrategy::LeftmostInversion);
        let mut expect = OperatorPolynomial::zero(3);
        expect.add_term(vec![2, 1, 0], rat_int(1));
        expect.add_term(vec![1, 0, 1], rat_int(-2));
        assert_eq!(p, expect);
    }

    #[test]
    fn render_forms() {
        let mut p = OperatorPolynomial::zero(3);
        p.add_term(vec![2, 0, 1], rat(-1, 2));
        p.add_term(vec![0, 1, 0], rat_int(1));
        assert_eq!(p.render(false), "X2 - 1/2 X1^2 X3");
        assert_eq!(p.render(true), "X_{2} - \\tfrac{1}{2}X_{1}^{2}X_{3}");
    }

    #[test]
    fn compose_shape_errors() {
        let pbw = Pbw::new(&StratifiedLieAlgebra::heisenberg(1));
        let b2 = FormBasis { labels: vec!["a".into(), "b".into()], weights: vec![1, 1] };
        let b3 = FormBasis { labels: vec!["a".into(), "b".into(), "c".into()], weights: vec![1, 1, 2] };
        let a = FormOperator::identity(3, b2.clone());
        let b = FormOperator::identity(3, b3);
        assert!(matches!(FormOperator::compose(&pbw, &a, &b), Err(OpcalcError::ShapeMismatch { .. })));
        let other = FormBasis { labels: vec!["x".into(), "y".into()], weights: vec![1, 1] };
        let c = FormOperator::identity(3, other);
        assert_eq!(FormOperator::compose(&pbw, &a, &c), Err(OpcalcError::BasisMismatch));
    }

    #[test]
    fn json_round_trip() {
        let b = FormBasis { labels: vec!["a".into(), "b".into()], weights: vec![1, 2] };
        let mut op = FormOperator::zero(3, b.clone(), b);
        let mut p = gen(3, 0);
        p.add_term(vec![0, 2, 1], rat(3, 7));
        op.set(0, 1, p);
        op.set(1, 1, OperatorPolynomial::constant(3, rat_int(-2)));
        assert_eq!(FormOperator::from_json(&op.to_json()).unwrap(), op);
    }

    fn arb_word(n: u8, max: usize) -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0..n, 0..max)
    }

    proptest! {
        #[test]
        fn rewriting_is_confluent(w in arb_word(4, 8)) {
            let pbw = Pbw::new(&StratifiedLieAlgebra::engel());
            let a = pbw.normal_order(&w, RewriteStrategy::LeftmostInversion);
            let b = pbw.normal_order(&w, RewriteStrategy::RightmostInversion);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn product_is_associative(a in arb_word(4, 4), b in arb_word(4, 4), c in arb_word(4, 4)) {
            let pbw = Pbw::new(&StratifiedLieAlgebra::engel());
            let [pa, pb, pc] = [a, b, c].map(|w| pbw.normal_order(&w, RewriteStrategy::LeftmostInversion));
            prop_assert_eq!(pbw.mul(&pbw.mul(&pa, &pb), &pc), pbw.mul(&pa, &pbw.mul(&pb, &pc)));
        }

        #[test]
        fn normal_order_is_faithful(w in arb_word(3, 5), exps in proptest::collection::vec(0u32..4, 3), c in -3i64..4) {
            // Applying the word letter by letter agrees with applying its normal form.
            let alg = StratifiedLieAlgebra::heisenberg(1);
            let frame = CarnotGroup::new(alg.clone()).frame();
            let pbw = Pbw::new(&alg);
            let mut f = Poly::zero_in(3);
            f.add_term(exps, rat_int(c));
            f.add_term(vec![1, 1, 1], rat_int(1));
            let mut direct = f.clone();
            for &k in w.iter().rev() {
                direct = frame[k as usize].apply(&direct);
            }
            let nf = pbw.normal_order(&w, RewriteStrategy::LeftmostInversion);
            prop_assert_eq!(nf.apply_to_poly(&frame, &f), direct);
        }

        #[test]
        fn normal_forms_are_homogeneous(w in arb_word(4, 7)) {
            let alg = StratifiedLieAlgebra::engel();
            let pbw = Pbw::new(&alg);
            let d: usize = w.iter().map(|&k| alg.degree(k as usize)).sum();
            let p = pbw.normal_order(&w, RewriteStrategy::LeftmostInversion);
            prop_assert!(p.terms().all(|(m, _)| OperatorPolynomial::monomial_degree(m, alg.degrees()) == d));
        }
    }
}
