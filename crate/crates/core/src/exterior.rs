//! Left-invariant forms: the exterior algebra on the dual basis θ_1..θ_n.
//!
//! Basis elements are bitmasks (bit `i` stands for θ_{i+1}) ordered by
//! increasing index within each degree.

use crate::linalg::RatMatrix;
use crate::scalar::{rat_to_string, Coeff, Rat};
use num::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

pub type Mask = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExteriorError {
    #[error("degree overflow: {0} + {1} exceeds the dimension {2}")]
    DegreeOverflow(usize, usize, usize),
    #[error("operands live in different dimensions ({0} and {1})")]
    DimensionMismatch(usize, usize),
    #[error("element is not homogeneous in degree")]
    MixedDegree,
}

/// Sign of θ_a ∧ θ_b relative to the sorted basis element, or `None` if they overlap.
pub fn wedge_sign(a: Mask, b: Mask) -> Option<i32> {
    if a & b != 0 {
        return None;
    }
    // Count pairs (i in a, j in b) with i > j.
    let mut inv = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        inv += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    Some(if inv.is_multiple_of(2) { 1 } else { -1 })
}

/// Sign in `∗θ_I = ±θ_{I*}`, i.e. the sign of θ_I ∧ θ_{I*} against θ_1∧..∧θ_n.
pub fn hodge_sign(mask: Mask, n: usize) -> i32 {
    let full: Mask = if n == 32 { !0 } else { (1 << n) - 1 };
    wedge_sign(mask, full & !mask).unwrap()
}

pub fn full_mask(n: usize) -> Mask {
    ((1u64 << n) - 1) as Mask
}

/// All degree-`h` masks in `n` variables, ordered lexicographically by index set.
pub fn basis(n: usize, h: usize) -> Vec<Mask> {
    fn rec(start: usize, n: usize, left: usize, cur: Mask, out: &mut Vec<Mask>) {
        if left == 0 {
            out.push(cur);
            return;
        }
        for i in start..n {
            if n - i < left {
                break;
            }
            rec(i + 1, n, left - 1, cur | (1 << i), out);
        }
    }
    let mut out = Vec::new();
    if h <= n {
        rec(0, n, h, 0, &mut out);
    }
    out
}

/// Weight Σ d_i of θ_I, where `degrees[i]` is the layer of e_{i+1}.
pub fn weight(mask: Mask, degrees: &[usize]) -> usize {
    (0..degrees.len()).filter(|i| mask & (1 << i) != 0).map(|i| degrees[i]).sum()
}

pub fn label(mask: Mask) -> String {
    if mask == 0 {
        return "1".into();
    }
    (0..32).filter(|i| mask & (1 << i) != 0).map(|i| format!("t{}", i + 1)).collect::<Vec<_>>().join("^")
}

/// Homogeneous element of Λ^h.
#[derive(Clone, Debug, PartialEq)]
pub struct CovectorElement<C = Rat> {
    n: usize,
    degree: usize,
    terms: BTreeMap<Mask, C>,
}

impl<C: Coeff> CovectorElement<C> {
    pub fn zero(n: usize, degree: usize) -> Self {
        CovectorElement { n, degree, terms: BTreeMap::new() }
    }

    pub fn basis_element(n: usize, mask: Mask) -> Self {
        let mut e = CovectorElement::zero(n, mask.count_ones() as usize);
        e.terms.insert(mask, C::one());
        e
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Mask, C)>) -> Result<Self, ExteriorError> {
        let mut degree = None;
        let mut map = BTreeMap::new();
        for (m, c) in terms {
            let d = m.count_ones() as usize;
            if *degree.get_or_insert(d) != d {
                return Err(ExteriorError::MixedDegree);
            }
            if !c.is_zero() {
                map.insert(m, c);
            }
        }
        Ok(CovectorElement { n, degree: degree.unwrap_or(0), terms: map })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, m: Mask) -> C {
        self.terms.get(&m).cloned().unwrap_or_else(C::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mask, &C)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(Zero::is_zero)
    }

    fn add_term(&mut self, m: Mask, c: C) {
        let v = self.coeff(m) + c;
        if v.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, v);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = CovectorElement::zero(self.n, self.degree);
        for (m, v) in &self.terms {
            out.add_term(*m, v.clone() * c.clone());
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Result<Self, ExteriorError> {
        if self.n != other.n {
            return Err(ExteriorError::DimensionMismatch(self.n, other.n));
        }
        if self.degree + other.degree > self.n {
            return Err(ExteriorError::DegreeOverflow(self.degree, other.degree, self.n));
        }
        let mut out = CovectorElement::zero(self.n, self.degree + other.degree);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some(s) = wedge_sign(*a, *b) {
                    let v = ca.clone() * cb.clone();
                    out.add_term(a | b, if s > 0 { v } else { -v });
                }
            }
        }
        Ok(out)
    }

    /// Hodge star for the orthonormal coframe θ_1..θ_n.
    pub fn hodge(&self) -> Self {
        let full = full_mask(self.n);
        let mut out = CovectorElement::zero(self.n, self.n - self.degree);
        for (m, c) in &self.terms {
            let v = c.clone();
            out.add_term(full & !m, if hodge_sign(*m, self.n) > 0 { v } else { -v });
        }
        out
    }

    pub fn inner(&self, other: &Self) -> C {
        self.terms.iter().fold(C::zero(), |acc, (m, c)| acc + c.clone() * other.coeff(*m))
    }

    /// Splits into pure-weight pieces.
    pub fn weight_decompose(&self, degrees: &[usize]) -> BTreeMap<usize, Self> {
        let mut out: BTreeMap<usize, Self> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(weight(*m, degrees))
                .or_insert_with(|| CovectorElement::zero(self.n, self.degree))
                .add_term(*m, c.clone());
        }
        out
    }

    /// Coordinates in the ordered basis of Λ^h.
    pub fn to_coords(&self) -> Vec<C> {
        basis(self.n, self.degree).into_iter().map(|m| self.coeff(m)).collect()
    }

    pub fn from_coords(n: usize, degree: usize, coords: &[C]) -> Self {
        let mut out = CovectorElement::zero(n, degree);
        for (m, c) in basis(n, degree).into_iter().zip(coords) {
            out.add_term(m, c.clone());
        }
        out
    }

    /// The vector field dual to a 1-form (♮ inverse).
    pub fn sharp(&self) -> Result<Multivector<C>, ExteriorError> {
        if self.degree != 1 {
            return Err(ExteriorError::MixedDegree);
        }
        Ok(Multivector(self.clone()))
    }
}

impl CovectorElement<Rat> {
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(m, c)| if c.is_one() { label(*m) } else { format!("({}) {}", rat_to_string(c), label(*m)) })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Element of Λ_h g, identified with forms through the orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Multivector<C = Rat>(CovectorElement<C>);

impl<C: Coeff> Multivector<C> {
    /// The 1-form v^♮ with ⟨v^♮, w⟩ = ⟨v, w⟩.
    pub fn flat(&self) -> CovectorElement<C> {
        self.0.clone()
    }

    pub fn coeff(&self, i: usize) -> C {
        self.0.coeff(1 << i)
    }
}

/// Matrix of ∗ : Λ^h → Λ^{n-h} in the ordered bases.
pub fn hodge_matrix(n: usize, h: usize) -> RatMatrix {
    let src = basis(n, h);
    let dst = basis(n, n - h);
    let mut m = RatMatrix::zeros(dst.len(), src.len());
    let full = full_mask(n);
    for (j, s) in src.iter().enumerate() {
        let i = dst.iter().position(|d| *d == full & !s).unwrap();
        m.set(i, j, Rat::from_integer(hodge_sign(*s, n).into()));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;
    use proptest::prelude::*;

    type F = CovectorElement<Rat>;

    #[test]
    fn basis_sizes_and_order() {
        assert_eq!(basis(3, 2), vec![0b011, 0b101, 0b110]);
        for n in 0..7 {
            let total: usize = (0..=n).map(|h| basis(n, h).len()).sum();
            assert_eq!(total, 1 << n);
        }
    }

    #[test]
    fn three_dimensional_star() {
        let t = |m| F::basis_element(3, m);
        assert_eq!(t(0b001).hodge(), t(0b110));
        assert_eq!(t(0b010).hodge(), t(0b101).scale(&rat_int(-1)));
        assert_eq!(t(0b100).hodge(), t(0b011));
        assert_eq!(t(0).hodge(), t(0b111));
    }

    #[test]
    fn double_star_sign() {
        for n in 1..7 {
            for h in 0..=n {
                let a = hodge_matrix(n, h);
                let b = hodge_matrix(n, n - h);
                let sign = if (h * (n - h)) % 2 == 0 { 1 } else { -1 };
                assert_eq!(b.mul(&a), RatMatrix::identity(a.cols()).scale(&rat_int(sign)), "n={n} h={h}");
            }
        }
    }

    #[test]
    fn weight_of_top_form() {
        let deg = [1, 1, 2, 3];
        assert_eq!(weight(full_mask(4), &deg), 7);
        let e = F::from_terms(4, [(0b0011, rat_int(1)), (0b0101, rat_int(2)), (0b1001, rat_int(3))]).unwrap();
        let parts = e.weight_decompose(&deg);
        assert_eq!(parts.keys().copied().collect::<Vec<_>>(), vec![2, 3, 4]);
    }

    #[test]
    fn degree_overflow_and_mixed() {
        let a = F::basis_element(2, 0b11);
        assert!(matches!(a.wedge(&F::basis_element(2, 0b01)), Err(ExteriorError::DegreeOverflow(..))));
        assert!(F::from_terms(3, [(0b1, rat_int(1)), (0b11, rat_int(1))]).is_err());
    }

    #[test]
    fn musical_round_trip() {
        let a = F::from_coords(3, 1, &[rat_int(1), rat_int(-2), rat_int(5)]);
        let v = a.sharp().unwrap();
        assert_eq!(v.coeff(1), rat_int(-2));
        assert_eq!(v.flat(), a);
    }

    fn arb_form(n: usize, h: usize) -> impl Strategy<Value = F> {
        let len = basis(n, h).len();
        proptest::collection::vec(-4i64..5, len)
            .prop_map(move |v| F::from_coords(n, h, &v.into_iter().map(rat_int).collect::<Vec<_>>()))
    }

    proptest! {
        #[test]
        fn wedge_graded_commutative(a in arb_form(5, 2), b in arb_form(5, 1), c in arb_form(5, 1)) {
            let ab = a.wedge(&b).unwrap();
            let ba = b.wedge(&a).unwrap();
            prop_assert_eq!(ab.clone(), ba);
            let bc = b.wedge(&c).unwrap();
            let cb = c.wedge(&b).unwrap();
            prop_assert_eq!(bc.clone(), cb.scale(&rat_int(-1)));
            prop_assert_eq!(ab.wedge(&c).unwrap(), a.wedge(&bc).unwrap());
        }

        #[test]
        fn star_pairing(a in arb_form(4, 2), b in arb_form(4, 2)) {
            // a ∧ ∗b = ⟨a, b⟩ dV
            let lhs = a.wedge(&b.hodge()).unwrap();
            prop_assert_eq!(lhs.coeff(full_mask(4)), a.inner(&b));
        }
    }
}
