//! Exact construction of the Rumin complex (E₀, d_c) of a stratified algebra.

use crate::algebra::StratifiedLieAlgebra;
use crate::exterior::{self, hodge_matrix, CovectorElement, Mask};
use crate::linalg::{dot, gram_schmidt, RatMatrix};
use crate::opcalc::{FormBasis, FormOperator, OpcalcError, OperatorPolynomial, Pbw};
use crate::scalar::{rat_to_string, Rat};
use num::{One, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuminError {
    #[error("the series defining P does not terminate in degree {degree}")]
    NilpotencyFailure { degree: usize },
    #[error("degree {degree} out of range 0..={max}")]
    DegreeOutOfRange { degree: usize, max: usize },
    #[error(transparent)]
    Opcalc(#[from] OpcalcError),
}

/// Matrix of d₀ : Λ^h → Λ^{h+1}, extended from dθ_k = −Σ_{i<j} c^k_ij θ_i∧θ_j as a derivation.
pub fn d0_matrix(alg: &StratifiedLieAlgebra, h: usize) -> RatMatrix {
    let n = alg.dim();
    let src = exterior::basis(n, h);
    let dst = exterior::basis(n, h + 1);
    let dtheta: Vec<CovectorElement> = (0..n)
        .map(|k| {
            let mut terms = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    let c = alg.structure_constant(i, j, k);
                    if !c.is_zero() {
                        terms.push(((1 << i) | (1 << j), -c));
                    }
                }
            }
            CovectorElement::from_terms(n, terms).unwrap_or_else(|_| CovectorElement::zero(n, 2))
        })
        .collect();
    let mut m = RatMatrix::zeros(dst.len(), src.len());
    for (col, &mask) in src.iter().enumerate() {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut total = CovectorElement::<Rat>::zero(n, h + 1);
        for (r, &k) in idx.iter().enumerate() {
            let left: Mask = idx[..r].iter().fold(0, |a, &i| a | (1 << i));
            let right: Mask = idx[r + 1..].iter().fold(0, |a, &i| a | (1 << i));
            let mut term = CovectorElement::basis_element(n, left).wedge(&dtheta[k]).expect("degree fits");
            if h < n {
                term = term.wedge(&CovectorElement::basis_element(n, right)).expect("degree fits");
            }
            total = if r % 2 == 0 { total.add(&term) } else { total.add(&term.scale(&-Rat::one())) };
        }
        for (row, &dm) in dst.iter().enumerate() {
            m.set(row, col, total.coeff(dm));
        }
    }
    m
}

fn lambda_basis(alg: &StratifiedLieAlgebra, h: usize) -> FormBasis {
    let masks = exterior::basis(alg.dim(), h);
    FormBasis {
        labels: masks.iter().map(|&m| exterior::label(m)).collect(),
        weights: masks.iter().map(|&m| exterior::weight(m, alg.degrees())).collect(),
    }
}

fn render_vector(v: &[Rat], masks: &[Mask]) -> String {
    let parts: Vec<String> = v
        .iter()
        .zip(masks)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, &m)| if c.is_one() { exterior::label(m) } else { format!("({}){}", rat_to_string(c), exterior::label(m)) })
        .collect();
    if parts.len() == 1 {
        parts[0].clone()
    } else {
        format!("[{}]", parts.join(" + "))
    }
}

/// All operators of the complex in every degree.
#[derive(Clone, Debug)]
pub struct RuminComplex {
    algebra: StratifiedLieAlgebra,
    pbw: Pbw,
    lambda: Vec<FormBasis>,
    d0: Vec<RatMatrix>,
    d0_pinv: Vec<RatMatrix>,
    d: Vec<FormOperator>,
    p: Vec<FormOperator>,
    q: Vec<FormOperator>,
    series_length: Vec<usize>,
    pi_e: Vec<FormOperator>,
    e0_vectors: Vec<Vec<Vec<Rat>>>,
    e0: Vec<FormBasis>,
    pi_e0: Vec<FormOperator>,
    embed: Vec<FormOperator>,
    extract: Vec<FormOperator>,
    star: Vec<FormOperator>,
    dc_full: Vec<FormOperator>,
    dc: Vec<FormOperator>,
    dc_star: Vec<FormOperator>,
}

impl RuminComplex {
    pub fn build(alg: &StratifiedLieAlgebra) -> Result<Self, RuminError> {
        let n = alg.dim();
        let pbw = Pbw::new(alg);
        let lambda: Vec<FormBasis> = (0..=n).map(|h| lambda_basis(alg, h)).collect();
        let op = |m: &RatMatrix, r: usize, c: usize| FormOperator::from_matrix(n, m, lambda[r].clone(), lambda[c].clone());

        let d0: Vec<RatMatrix> = (0..n).map(|h| d0_matrix(alg, h)).collect();
        let d0_pinv: Vec<RatMatrix> = d0.iter().map(RatMatrix::pseudoinverse).collect();

        let mut d = Vec::new();
        for h in 0..n {
            let mut dh = op(&d0[h], h + 1, h);
            let src = exterior::basis(n, h);
            let dst = exterior::basis(n, h + 1);
            for (col, &mask) in src.iter().enumerate() {
                for j in 0..n {
                    let Some(sign) = exterior::wedge_sign(1 << j, mask) else { continue };
                    let row = dst.iter().position(|&m| m == mask | (1 << j)).unwrap();
                    let mut e = dh.entry(row, col).clone();
                    e.add_term(
                        {
                            let mut m = vec![0; n];
                            m[j] = 1;
                            m
                        },
                        Rat::from_integer(sign.into()),
                    );
                    dh.set(row, col, e);
                }
            }
            d.push(dh);
        }

        let mut p = Vec::new();
        let mut q = Vec::new();
        let mut series_length = Vec::new();
        for h in 0..n {
            let pinv = op(&d0_pinv[h], h, h + 1);
            let proj_r = op(&d0_pinv[h].mul(&d0[h]), h, h);
            let dd = FormOperator::compose(&pbw, &pinv, &d[h])?.sub(&proj_r)?;
            let minus_d = dd.scale(&-Rat::one());
            let mut term = proj_r.clone();
            let mut sum = proj_r.clone();
            let bound = lambda[h].weights.iter().max().unwrap_or(&0) - lambda[h].weights.iter().min().unwrap_or(&0) + 1;
            let mut k = 0;
            loop {
                term = FormOperator::compose(&pbw, &minus_d, &term)?;
                if term.is_zero() {
                    break;
                }
                k += 1;
                if k > bound {
                    return Err(RuminError::NilpotencyFailure { degree: h });
                }
                sum = sum.add(&term)?;
            }
            series_length.push(k);
            q.push(FormOperator::compose(&pbw, &sum, &pinv)?);
            p.push(sum);
        }

        let mut pi_e = Vec::new();
        for h in 0..=n {
            let mut e = FormOperator::identity(n, lambda[h].clone());
            if h < n {
                e = e.sub(&FormOperator::compose(&pbw, &q[h], &d[h])?)?;
            }
            if h > 0 {
                e = e.sub(&FormOperator::compose(&pbw, &d[h - 1], &q[h - 1])?)?;
            }
            pi_e.push(e);
        }

        let mut e0_vectors = Vec::new();
        let mut e0 = Vec::new();
        let mut pi_e0 = Vec::new();
        let mut embed = Vec::new();
        let mut extract = Vec::new();
        for h in 0..=n {
            let masks = exterior::basis(n, h);
            let dim = masks.len();
            let mut rows: Vec<Vec<Rat>> = Vec::new();
            if h < n {
                for i in 0..d0[h].rows() {
                    rows.push((0..dim).map(|j| d0[h].get(i, j).clone()).collect());
                }
            }
            if h > 0 {
                for j in 0..d0[h - 1].cols() {
                    rows.push((0..dim).map(|i| d0[h - 1].get(i, j).clone()).collect());
                }
            }
            let mut weights_sorted: Vec<usize> = lambda[h].weights.clone();
            weights_sorted.sort_unstable();
            weights_sorted.dedup();
            let mut vecs = Vec::new();
            let mut wts = Vec::new();
            for w in weights_sorted {
                let cols: Vec<usize> = (0..dim).filter(|&j| lambda[h].weights[j] == w).collect();
                let block = if rows.is_empty() {
                    RatMatrix::zeros(0, cols.len())
                } else {
                    RatMatrix::from_rows(rows.iter().map(|r| cols.iter().map(|&j| r[j].clone()).collect()).collect())
                };
                let ns = if block.rows() == 0 {
                    (0..cols.len())
                        .map(|i| (0..cols.len()).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
                        .collect()
                } else {
                    block.nullspace()
                };
                for v in gram_schmidt(&ns) {
                    let mut full = vec![Rat::zero(); dim];
                    for (c, x) in cols.iter().zip(v) {
                        full[*c] = x;
                    }
                    vecs.push(full);
                    wts.push(w);
                }
            }
            let basis = FormBasis { labels: vecs.iter().map(|v| render_vector(v, &masks)).collect(), weights: wts };
            let b = RatMatrix::from_columns(dim, &vecs);
            let gram_inv = RatMatrix::from_rows(
                (0..vecs.len())
                    .map(|i| (0..vecs.len()).map(|j| if i == j { dot(&vecs[i], &vecs[i]).recip() } else { Rat::zero() }).collect())
                    .collect(),
            );
            let ext = gram_inv.mul(&b.transpose());
            pi_e0.push(op(&b.mul(&ext), h, h));
            embed.push(FormOperator::from_matrix(n, &b, lambda[h].clone(), basis.clone()));
            extract.push(FormOperator::from_matrix(n, &ext, basis.clone(), lambda[h].clone()));
            e0.push(basis);
            e0_vectors.push(vecs);
        }

        let star: Vec<FormOperator> = (0..=n).map(|h| op(&hodge_matrix(n, h), n - h, h)).collect();

        let mut dc_full = Vec::new();
        let mut dc = Vec::new();
        for h in 0..n {
            let a = FormOperator::compose(&pbw, &d[h], &pi_e[h])?;
            let full = FormOperator::compose(&pbw, &pi_e0[h + 1], &FormOperator::compose(&pbw, &a, &pi_e0[h])?)?;
            let reduced = FormOperator::compose(&pbw, &extract[h + 1], &FormOperator::compose(&pbw, &a, &embed[h])?)?;
            dc_full.push(full);
            dc.push(reduced);
        }
        let mut dc_star = Vec::new();
        for h in 1..=n {
            let sign = if (n * (h + 1) + 1).is_multiple_of(2) { Rat::one() } else { -Rat::one() };
            let inner = FormOperator::compose(&pbw, &dc_full[n - h], &FormOperator::compose(&pbw, &star[h], &embed[h])?)?;
            let outer = FormOperator::compose(&pbw, &extract[h - 1], &FormOperator::compose(&pbw, &star[n - h + 1], &inner)?)?;
            dc_star.push(outer.scale(&sign));
        }

        Ok(RuminComplex {
            algebra: alg.clone(),
            pbw,
            lambda,
            d0,
            d0_pinv,
            d,
            p,
            q,
            series_length,
            pi_e,
            e0_vectors,
            e0,
            pi_e0,
            embed,
            extract,
            star,
            dc_full,
            dc,
            dc_star,
        })
    }

    pub fn algebra(&self) -> &StratifiedLieAlgebra {
        &self.algebra
    }

    pub fn pbw(&self) -> &Pbw {
        &self.pbw
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    fn check_degree(&self, h: usize, max: usize) -> Result<(), RuminError> {
        if h > max {
            return Err(RuminError::DegreeOutOfRange { degree: h, max });
        }
        Ok(())
    }

    pub fn lambda_basis(&self, h: usize) -> &FormBasis {
        &self.lambda[h]
    }

    pub fn d0(&self, h: usize) -> &RatMatrix {
        &self.d0[h]
    }

    pub fn d0_pinv(&self, h: usize) -> &RatMatrix {
        &self.d0_pinv[h]
    }

    /// Exterior differential Ω^h → Ω^{h+1} in the basis θ_I.
    pub fn d(&self, h: usize) -> Result<&FormOperator, RuminError> {
        self.check_degree(h, self.dim().saturating_sub(1))?;
        Ok(&self.d[h])
    }

    pub fn p(&self, h: usize) -> &FormOperator {
        &self.p[h]
    }

    pub fn q(&self, h: usize) -> &FormOperator {
        &self.q[h]
    }

    pub fn pi_e(&self, h: usize) -> Result<&FormOperator, RuminError> {
        self.check_degree(h, self.dim())?;
        Ok(&self.pi_e[h])
    }

    /// Largest differential order appearing in Π_E on h-forms.
    pub fn pi_e_order(&self, h: usize) -> usize {
        self.pi_e[h].max_order()
    }

    pub fn e0_basis(&self, h: usize) -> Result<&FormBasis, RuminError> {
        self.check_degree(h, self.dim())?;
        Ok(&self.e0[h])
    }

    /// Basis vectors of E₀^h in the coordinates of Λ^h.
    pub fn e0_vectors(&self, h: usize) -> &[Vec<Rat>] {
        &self.e0_vectors[h]
    }

    pub fn e0_dims(&self) -> Vec<usize> {
        self.e0.iter().map(FormBasis::len).collect()
    }

    pub fn pi_e0(&self, h: usize) -> &FormOperator {
        &self.pi_e0[h]
    }

    /// Inclusion E₀^h → Λ^h from E₀ coordinates.
    pub fn embed(&self, h: usize) -> &FormOperator {
        &self.embed[h]
    }

    /// Orthogonal projection Λ^h → E₀^h in E₀ coordinates.
    pub fn extract(&self, h: usize) -> &FormOperator {
        &self.extract[h]
    }

    pub fn star(&self, h: usize) -> &FormOperator {
        &self.star[h]
    }

    /// Π_{E₀} d Π_E Π_{E₀} acting on all of Ω^h.
    pub fn dc_full(&self, h: usize) -> &FormOperator {
        &self.dc_full[h]
    }

    /// d_c : E₀^h → E₀^{h+1} in E₀ coordinates.
    pub fn dc(&self, h: usize) -> Result<&FormOperator, RuminError> {
        self.check_degree(h, self.dim().saturating_sub(1))?;
        Ok(&self.dc[h])
    }

    /// d_c* : E₀^h → E₀^{h−1}, for 1 ≤ h ≤ n.
    pub fn dc_star(&self, h: usize) -> Result<&FormOperator, RuminError> {
        if h == 0 {
            return Err(RuminError::DegreeOutOfRange { degree: 0, max: self.dim() });
        }
        self.check_degree(h, self.dim())?;
        Ok(&self.dc_star[h - 1])
    }

    /// ∗ between E₀^h and E₀^{n−h} in E₀ coordinates.
    pub fn star_e0(&self, h: usize) -> Result<FormOperator, RuminError> {
        let n = self.dim();
        let inner = FormOperator::compose(&self.pbw, &self.star[h], &self.embed[h])?;
        Ok(FormOperator::compose(&self.pbw, &self.extract[n - h], &inner)?)
    }

    /// Δ_{G,0} = d_c* d_c on functions.
    pub fn laplacian_functions(&self) -> Result<OperatorPolynomial, RuminError> {
        let l = FormOperator::compose(&self.pbw, self.dc_star(1)?, self.dc(0)?)?;
        Ok(l.entry(0, 0).clone())
    }

    /// Δ_{G,n} = d_c d_c* on volume forms.
    pub fn laplacian_volume(&self) -> Result<OperatorPolynomial, RuminError> {
        let n = self.dim();
        let l = FormOperator::compose(&self.pbw, self.dc(n - 1)?, self.dc_star(n)?)?;
        Ok(l.entry(0, 0).clone())
    }

    pub fn verify(&self) -> VerificationReport {
        verify_complex(self)
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct IdentityCheck {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub algebra: String,
    pub layers: Vec<usize>,
    pub homogeneous_dimension: usize,
    pub e0_dims: Vec<usize>,
    pub pi_e_orders: Vec<usize>,
    pub series_lengths: Vec<usize>,
    pub checks: Vec<IdentityCheck>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Re-derives every structural identity of the complex with exact arithmetic.
pub fn verify_complex(cx: &RuminComplex) -> VerificationReport {
    let n = cx.dim();
    let alg = &cx.algebra;
    let pbw = &cx.pbw;
    let mut checks = Vec::new();
    let mut push = |name: &str, degree: Option<usize>, r: Result<bool, OpcalcError>| {
        let (passed, detail) = match r {
            Ok(ok) => (ok, String::new()),
            Err(e) => (false, e.to_string()),
        };
        checks.push(IdentityCheck { name: name.into(), degree, passed, detail });
    };
    let comp = |a: &FormOperator, b: &FormOperator| FormOperator::compose(pbw, a, b);

    for h in 0..n {
        let d0 = &cx.d0[h];
        let pinv = &cx.d0_pinv[h];
        push("d0 pseudoinverse: d0 d0+ d0 = d0", Some(h), Ok(d0.mul(pinv).mul(d0) == *d0));
        push("d0 pseudoinverse: d0+ d0 d0+ = d0+", Some(h), Ok(pinv.mul(d0).mul(pinv) == *pinv));
        let sym = |m: RatMatrix| m.transpose() == m;
        push("d0 pseudoinverse: symmetric projections", Some(h), Ok(sym(d0.mul(pinv)) && sym(pinv.mul(d0))));
        push("d is weight graded", Some(h), Ok(cx.d[h].is_weight_graded(alg.degrees())));
        let d0_part = cx.d[h].homogeneous_parts().remove(&0);
        let d0_op = FormOperator::from_matrix(n, d0, cx.lambda[h + 1].clone(), cx.lambda[h].clone());
        push(
            "weight-preserving part of d is d0",
            Some(h),
            Ok(d0_part.unwrap_or_else(|| FormOperator::zero(n, cx.lambda[h + 1].clone(), cx.lambda[h].clone())) == d0_op),
        );
        let pinv_op = FormOperator::from_matrix(n, pinv, cx.lambda[h].clone(), cx.lambda[h + 1].clone());
        let proj_r = FormOperator::from_matrix(n, &pinv.mul(d0), cx.lambda[h].clone(), cx.lambda[h].clone());
        let ddd = comp(&pinv_op, &cx.d[h]).and_then(|x| x.sub(&proj_r));
        push(
            "D = d0+ (d - d0) strictly raises weight",
            Some(h),
            ddd.and_then(|dd| {
                let alt = comp(&pinv_op, &cx.d[h].sub(&d0_op)?)?;
                Ok(dd == alt && dd.homogeneous_parts().keys().all(|&k| k > 0))
            }),
        );
        push(
            "P: d0+ d P = Pi_R and P Pi_R = P",
            Some(h),
            comp(&comp(&pinv_op, &cx.d[h]).unwrap(), &cx.p[h])
                .and_then(|x| Ok(x == proj_r && comp(&cx.p[h], &proj_r)? == cx.p[h])),
        );
        push("P raises or preserves weight", Some(h), Ok(cx.p[h].homogeneous_parts().keys().all(|&k| k >= 0)));
    }
    for h in 0..n.saturating_sub(1) {
        push("d d = 0", Some(h), comp(&cx.d[h + 1], &cx.d[h]).map(|x| x.is_zero()));
        push("d_c d_c = 0", Some(h), comp(&cx.dc[h + 1], &cx.dc[h]).map(|x| x.is_zero()));
    }
    for h in 0..=n {
        let e = &cx.pi_e[h];
        let e0 = &cx.pi_e0[h];
        push("Pi_E idempotent", Some(h), comp(e, e).map(|x| x == *e));
        if h < n {
            push(
                "d Pi_E = Pi_E d",
                Some(h),
                comp(&cx.d[h], e).and_then(|a| Ok(a == comp(&cx.pi_e[h + 1], &cx.d[h])?)),
            );
        }
        push("Pi_E0 Pi_E Pi_E0 = Pi_E0", Some(h), comp(&comp(e0, e).unwrap(), e0).map(|x| x == *e0));
        push("Pi_E Pi_E0 Pi_E = Pi_E", Some(h), comp(&comp(e, e0).unwrap(), e).map(|x| x == *e));
        let other = n - h;
        let mapped = cx.star[h].to_matrix().unwrap().mul(&RatMatrix::from_columns(cx.lambda[h].len(), &cx.e0_vectors[h]));
        let proj = cx.pi_e0[other].to_matrix().unwrap();
        push(
            "Hodge star maps E0^h onto E0^(n-h)",
            Some(h),
            Ok(cx.e0[h].len() == cx.e0[other].len() && proj.mul(&mapped) == mapped),
        );
    }
    for h in 0..n {
        push("d_c is weight graded", Some(h), Ok(cx.dc[h].is_weight_graded(alg.degrees())));
    }
    for h in 1..=n {
        // The formal adjoint of d_c^{(h-1)}, compressed to E0, against the ∗ formula.
        let adj = cx.dc_full[h - 1].adjoint(pbw);
        let lhs = comp(&cx.pi_e0[h - 1], &adj).and_then(|x| comp(&x, &cx.pi_e0[h]));
        let sign = if (n * (h + 1) + 1).is_multiple_of(2) { Rat::one() } else { -Rat::one() };
        let rhs = comp(&cx.dc_full[n - h], &cx.star[h])
            .and_then(|x| comp(&cx.star[n - h + 1], &x))
            .and_then(|x| comp(&cx.pi_e0[h - 1], &x.scale(&sign)))
            .and_then(|x| comp(&x, &cx.pi_e0[h]));
        push(
            "d_c* = (-1)^(n(h+1)+1) * d_c * agrees with the formal adjoint",
            Some(h),
            lhs.and_then(|l| Ok(l == rhs?)),
        );
    }
    let dims = cx.e0_dims();
    push("E0 dimensions are palindromic", None, Ok(dims.iter().eq(dims.iter().rev())));
    let euler: i64 = dims.iter().enumerate().map(|(h, &m)| if h % 2 == 0 { m as i64 } else { -(m as i64) }).sum();
    push("E0 Euler characteristic vanishes", None, Ok(euler == 0 || n == 0));
    let lap = (|| -> Result<bool, RuminError> {
        let l0 = FormOperator::compose(pbw, cx.dc_star(1)?, cx.dc(0)?)?;
        let ln = FormOperator::compose(pbw, cx.dc(n - 1)?, cx.dc_star(n)?)?;
        let conj = FormOperator::compose(pbw, &cx.star_e0(0)?, &FormOperator::compose(pbw, &l0, &cx.star_e0(n)?)?)?;
        Ok(conj == ln)
    })();
    push(
        "Delta_(G,n) = * Delta_(G,0) *",
        None,
        lap.map_err(|e| match e {
            RuminError::Opcalc(o) => o,
            other => OpcalcError::Malformed(other.to_string()),
        }),
    );

    VerificationReport {
        algebra: alg.name().into(),
        layers: alg.layer_dims().to_vec(),
        homogeneous_dimension: alg.homogeneous_dimension(),
        e0_dims: dims,
        pi_e_orders: (0..=n).map(|h| cx.pi_e_order(h)).collect(),
        series_lengths: cx.series_length.clone(),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    fn x(n: usize, j: usize) -> OperatorPolynomial {
        OperatorPolynomial::generator(n, j)
    }

    #[test]
    fn d0_on_heisenberg_one_forms() {
        let alg = StratifiedLieAlgebra::heisenberg(1);
        let m = d0_matrix(&alg, 1);
        // dθ3 = −θ1∧θ2; the first row of Λ² is θ1∧θ2.
        assert_eq!(m.get(0, 2), &rat_int(-1));
        assert_eq!(m.column(0), vec![Rat::zero(); 3]);
    }

    #[test]
    fn heisenberg_e0_and_dc() {
        let cx = RuminComplex::build(&StratifiedLieAlgebra::heisenberg(1)).unwrap();
        assert_eq!(cx.e0_dims(), vec![1, 2, 2, 1]);
        assert_eq!(cx.e0_basis(1).unwrap().labels, vec!["t1", "t2"]);
        assert_eq!(cx.e0_basis(2).unwrap().labels, vec!["t1^t3", "t2^t3"]);
        let dc0 = cx.dc(0).unwrap();
        assert_eq!(dc0.entry(0, 0), &x(3, 0));
        assert_eq!(dc0.entry(1, 0), &x(3, 1));
        let dc2 = cx.dc(2).unwrap();
        assert_eq!(dc2.entry(0, 0), &x(3, 1).scale(&rat_int(-1)));
        assert_eq!(dc2.entry(0, 1), &x(3, 0));
        // Second order in the middle degree.
        assert_eq!(cx.dc(1).unwrap().max_order(), 2);
        let lap = cx.laplacian_functions().unwrap();
        let mut expect = OperatorPolynomial::zero(3);
        expect.add_term(vec![2, 0, 0], rat_int(-1));
        expect.add_term(vec![0, 2, 0], rat_int(-1));
        assert_eq!(lap, expect);
    }

    #[test]
    fn heisenberg_pi_e_closed_forms() {
        let cx = RuminComplex::build(&StratifiedLieAlgebra::heisenberg(1)).unwrap();
        let e1 = cx.pi_e(1).unwrap();
        // Π_E(α1θ1 + α2θ2) gains (X1α2 − X2α1)θ3.
        assert_eq!(e1.entry(2, 0), &x(3, 1).scale(&rat_int(-1)));
        assert_eq!(e1.entry(2, 1), &x(3, 0));
        assert_eq!(e1.entry(0, 0), &OperatorPolynomial::constant(3, rat_int(1)));
        let e2 = cx.pi_e(2).unwrap();
        // On 2-forms, θ12 is replaced by X1β12 θ13 + X2β12 θ23.
        assert!(e2.entry(0, 0).is_zero());
        assert_eq!(e2.entry(1, 0), &x(3, 0));
        assert_eq!(e2.entry(2, 0), &x(3, 1));
        assert_eq!(cx.pi_e_order(1), 1);
    }

    #[test]
    fn heisenberg_identities() {
        let rep = RuminComplex::build(&StratifiedLieAlgebra::heisenberg(1)).unwrap().verify();
        for c in &rep.checks {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn engel_identities() {
        let cx = RuminComplex::build(&StratifiedLieAlgebra::engel()).unwrap();
        let rep = cx.verify();
        for c in &rep.checks {
            assert!(c.passed, "{c:?}");
        }
        assert_eq!(rep.e0_dims, vec![1, 2, 2, 2, 1]);
        assert!(cx.pi_e_order(1) >= 1);
    }

    #[test]
    fn abelian_complex_is_de_rham() {
        let cx = RuminComplex::build(&StratifiedLieAlgebra::abelian(3)).unwrap();
        assert_eq!(cx.e0_dims(), vec![1, 3, 3, 1]);
        for h in 0..3 {
            assert_eq!(cx.dc(h).unwrap(), cx.d(h).unwrap());
            assert!(cx.pi_e(h).unwrap() == &FormOperator::identity(3, cx.lambda_basis(h).clone()));
        }
        assert!(cx.verify().all_passed());
    }

    #[test]
    fn degree_out_of_range() {
        let cx = RuminComplex::build(&StratifiedLieAlgebra::heisenberg(1)).unwrap();
        assert!(matches!(cx.dc(3), Err(RuminError::DegreeOutOfRange { .. })));
        assert!(matches!(cx.dc_star(0), Err(RuminError::DegreeOutOfRange { .. })));
        assert!(matches!(cx.pi_e(4), Err(RuminError::DegreeOutOfRange { .. })));
    }
}
