//! Sparse multivariate polynomials with rational coefficients.

use crate::scalar::{rat_to_f64, rat_to_string, Coeff, Rat};
use num::{One, Zero};
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

/// Polynomial in `nvars` variables; keys are exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl Poly {
    pub fn zero_in(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = Poly::zero_in(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        let mut p = Poly::zero_in(nvars);
        p.terms.insert(e, Rat::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
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

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero_in(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    pub fn derivative(&self, k: usize) -> Poly {
        let mut out = Poly::zero_in(self.nvars);
        for (e, c) in &self.terms {
            if e[k] > 0 {
                let mut e2 = e.clone();
                e2[k] -= 1;
                out.add_term(e2, c * Rat::from_integer(e[k].into()));
            }
        }
        out
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Degree of every term under `weights`, if all terms agree.
    pub fn weighted_degree(&self, weights: &[usize]) -> Option<usize> {
        let mut deg = None;
        for e in self.terms.keys() {
            let d: usize = e.iter().zip(weights).map(|(a, w)| *a as usize * w).sum();
            match deg {
                None => deg = Some(d),
                Some(d0) if d0 != d => return None,
                _ => {}
            }
        }
        deg
    }

    pub fn constant_value(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&a| a == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn eval<C: Coeff>(&self, x: &[C]) -> C {
        let mut acc = C::zero();
        for (e, c) in &self.terms {
            let mut m = C::from_rat(c);
            for (xi, &a) in x.iter().zip(e) {
                for _ in 0..a {
                    m = m * xi.clone();
                }
            }
            acc = acc + m;
        }
        acc
    }

    /// Fast `f64` evaluation.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| rat_to_f64(c) * e.iter().zip(x).map(|(&a, xi)| xi.powi(a as i32)).product::<f64>())
            .sum()
    }

    /// Human-readable rendering using the given variable names.
    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (idx, (e, c)) in self.terms.iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &a)| a > 0)
                .map(|(k, &a)| if a == 1 { names[k].clone() } else { format!("{}^{}", names[k], a) })
                .collect();
            let neg = c < &Rat::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if idx > 0 {
                out.push_str(if neg { " - " } else { " + " });
            } else if neg {
                out.push('-');
            }
            if mono.is_empty() {
                out.push_str(&rat_to_string(&abs));
            } else {
                if !abs.is_one() {
                    out.push_str(&rat_to_string(&abs));
                    out.push(' ');
                }
                out.push_str(&mono.join(" "));
            }
        }
        out
    }
}

impl Zero for Poly {
    // A variable count of zero marks the additive identity produced by
    // `Zero::zero`; it combines with polynomials in any number of variables.
    fn zero() -> Self {
        Poly::zero_in(0)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Poly {
    fn one() -> Self {
        Poly::constant(0, Rat::one())
    }
}

fn widen(p: Poly, n: usize) -> Poly {
    if p.nvars == n {
        return p;
    }
    let terms = p
        .terms
        .into_iter()
        .map(|(mut e, c)| {
            e.resize(n, 0);
            (e, c)
        })
        .collect();
    Poly { nvars: n, terms }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        let n = self.nvars.max(rhs.nvars);
        let mut a = widen(self, n);
        for (e, c) in widen(rhs, n).terms {
            a.add_term(e, c);
        }
        a
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect() }
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self + (-rhs)
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        let n = self.nvars.max(rhs.nvars);
        let a = widen(self, n);
        let b = widen(rhs, n);
        let mut out = Poly::zero_in(n);
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl Coeff for Poly {
    fn from_rat(r: &Rat) -> Self {
        Poly::constant(0, r.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    #[test]
    fn product_and_derivative() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let p = (x.clone() + y.clone()) * (x.clone() - y.clone());
        assert_eq!(p.clone() + y.clone() * y.clone(), x.clone() * x.clone());
        assert_eq!(p.derivative(0), x.scale(&rat_int(2)));
        assert_eq!(p.eval(&[rat_int(3), rat_int(1)]), rat_int(8));
        assert_eq!(p.eval_f64(&[3.0, 1.0]), 8.0);
    }

    #[test]
    fn weighted_degree_detects_mixed_terms() {
        let x = Poly::var(3, 0);
        let t = Poly::var(3, 2);
        let w = [1, 1, 2];
        assert_eq!((x.clone() * x.clone() + t.clone()).weighted_degree(&w), Some(2));
        assert_eq!((x.clone() + t).weighted_degree(&w), None);
        assert_eq!(Poly::constant(3, rat(1, 2)).weighted_degree(&w), Some(0));
    }

    #[test]
    fn zero_identity_widens() {
        let x = Poly::var(3, 1);
        assert_eq!(Poly::zero() + x.clone(), x);
        assert_eq!(Poly::one() * x.clone(), x);
    }
}
