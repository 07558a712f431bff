//! Grid instantiation of left-invariant operators by centered finite differences.

use super::grid::{FormFrame, Grid, GridForm};
use super::{NumericsError, Result};
use crate::group::VectorField;
use crate::opcalc::{FormOperator, OperatorPolynomial};
use crate::rumin::RuminComplex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdOrder {
    Second,
    #[default]
    Fourth,
    Sixth,
}

impl FdOrder {
    fn stencil(self) -> &'static [f64] {
        match self {
            FdOrder::Second => &[0.5],
            FdOrder::Fourth => &[2.0 / 3.0, -1.0 / 12.0],
            FdOrder::Sixth => &[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
        }
    }

    pub fn half_width(self) -> usize {
        self.stencil().len()
    }
}

/// Largest absolute value of `f`.
pub fn max_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Fails if `f` is nonzero within `width` nodes of either end of `axis`.
pub fn check_margin(grid: &Grid, f: &[f64], axis: usize, width: usize) -> Result<()> {
    let tol = 1e-12 * max_abs(f);
    let n = grid.n;
    for i in 0..n[0] {
        for j in 0..n[1] {
            for k in 0..n[2] {
                let c = [i, j, k][axis];
                if (c < width || c + width >= n[axis]) && f[grid.idx(i, j, k)].abs() > tol {
                    return Err(NumericsError::MarginViolation { axis, nodes: width });
                }
            }
        }
    }
    Ok(())
}

/// Centered difference along `axis` with zero extension outside the grid.
pub fn partial(grid: &Grid, f: &[f64], axis: usize, order: FdOrder) -> Result<Vec<f64>> {
    if f.len() != grid.len() {
        return Err(NumericsError::ShapeMismatch(format!("field has {} values, grid {}", f.len(), grid.len())));
    }
    let st = order.stencil();
    check_margin(grid, f, axis, st.len())?;
    let n = grid.n;
    let stride = [n[1] * n[2], n[2], 1][axis];
    let inv_h = 1.0 / grid.h[axis];
    let mut out = grid.zeros();
    for i in 0..n[0] {
        for j in 0..n[1] {
            for k in 0..n[2] {
                let c = [i, j, k][axis] as isize;
                let base = grid.idx(i, j, k);
                let mut acc = 0.0;
                for (m, w) in st.iter().enumerate() {
                    let s = m as isize + 1;
                    let fp = if c + s < n[axis] as isize { f[base + s as usize * stride] } else { 0.0 };
                    let fm = if c - s >= 0 { f[base - s as usize * stride] } else { 0.0 };
                    acc += w * (fp - fm);
                }
                out[base] = acc * inv_h;
            }
        }
    }
    Ok(out)
}

enum Coef {
    Zero,
    Const(f64),
    Field(Vec<f64>),
}

/// The left-invariant frame sampled on a grid.
pub struct GridFrame {
    grid: Grid,
    order: FdOrder,
    coeffs: Vec<Vec<Coef>>,
}

impl GridFrame {
    pub fn new(grid: &Grid, frame: &[VectorField], order: FdOrder) -> Result<Self> {
        if frame.len() != 3 {
            return Err(NumericsError::UnsupportedGroup(format!("grid numerics need dimension 3, got {}", frame.len())));
        }
        let coeffs = frame
            .iter()
            .map(|x| {
                x.coeffs
                    .iter()
                    .map(|a| {
                        if a.terms().next().is_none() {
                            Coef::Zero
                        } else if let Some(c) = a.constant_value() {
                            Coef::Const(crate::scalar::rat_to_f64(&c))
                        } else {
                            Coef::Field(grid.sample(|p| a.eval_f64(&p)))
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(GridFrame { grid: grid.clone(), order, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn order(&self) -> FdOrder {
        self.order
    }

    /// X_j f = Σ_k a_jk ∂_k f.
    pub fn apply_field(&self, j: usize, f: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.grid.zeros();
        for (k, a) in self.coeffs[j].iter().enumerate() {
            match a {
                Coef::Zero => {}
                Coef::Const(c) => {
                    let d = partial(&self.grid, f, k, self.order)?;
                    out.iter_mut().zip(&d).for_each(|(o, v)| *o += c * v);
                }
                Coef::Field(c) => {
                    let d = partial(&self.grid, f, k, self.order)?;
                    for ((o, v), w) in out.iter_mut().zip(&d).zip(c) {
                        *o += w * v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Applies X^I = X_1^{i_1} ⋯ X_n^{i_n} (rightmost factor first), summed over terms.
    pub fn apply_op(&self, op: &OperatorPolynomial, f: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.grid.zeros();
        for (m, c) in op.terms() {
            let c = crate::scalar::rat_to_f64(c);
            let mut g = f.to_vec();
            for &k in OperatorPolynomial::word(m).iter().rev() {
                g = self.apply_field(k as usize, &g)?;
            }
            out.iter_mut().zip(&g).for_each(|(o, v)| *o += c * v);
        }
        Ok(out)
    }
}

/// A form operator bound to a grid frame.
pub struct GridOperator<'a> {
    frame: &'a GridFrame,
    op: FormOperator,
    out_frame: FormFrame,
    out_metric: Vec<f64>,
    out_degree: usize,
}

impl<'a> GridOperator<'a> {
    pub fn new(frame: &'a GridFrame, op: FormOperator, out_degree: usize, out_frame: FormFrame, out_metric: Vec<f64>) -> Self {
        GridOperator { frame, op, out_frame, out_metric, out_degree }
    }

    pub fn apply(&self, form: &GridForm) -> Result<GridForm> {
        if form.components.len() != self.op.cols() {
            return Err(NumericsError::ShapeMismatch(format!(
                "operator expects {} components, form has {}",
                self.op.cols(),
                form.components.len()
            )));
        }
        let mut comps = vec![self.frame.grid.zeros(); self.op.rows()];
        for (i, out) in comps.iter_mut().enumerate() {
            for (j, f) in form.components.iter().enumerate() {
                let e = self.op.entry(i, j);
                if e.is_zero() {
                    continue;
                }
                let v = self.frame.apply_op(e, f)?;
                out.iter_mut().zip(&v).for_each(|(o, x)| *o += x);
            }
        }
        Ok(GridForm::new(self.out_degree, self.out_frame, self.out_metric.clone(), comps))
    }
}

/// Squared lengths of the E₀^h basis vectors.
pub fn e0_metric(cx: &RuminComplex, h: usize) -> Vec<f64> {
    cx.e0_vectors(h)
        .iter()
        .map(|v| v.iter().map(|x| crate::scalar::rat_to_f64(x).powi(2)).sum())
        .collect()
}

/// Binds a complex operator acting between the given frames.
pub fn instantiate<'a>(
    cx: &RuminComplex,
    frame: &'a GridFrame,
    op: &FormOperator,
    out_degree: usize,
    out_frame: FormFrame,
) -> GridOperator<'a> {
    let metric = match out_frame {
        FormFrame::E0 => e0_metric(cx, out_degree),
        FormFrame::Lambda => vec![1.0; op.rows()],
    };
    GridOperator::new(frame, op.clone(), out_degree, out_frame, metric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::StratifiedLieAlgebra;
    use crate::group::CarnotGroup;

    fn bump(p: [f64; 3]) -> f64 {
        let s = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        if s < 1.0 {
            (1.0 - s).powi(6)
        } else {
            0.0
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let g0 = CarnotGroup::new(StratifiedLieAlgebra::heisenberg(1));
        let mut errs = Vec::new();
        for n in [25, 49] {
            let grid = Grid::symmetric([n, n, n], [1.2; 3], 0);
            let fr = GridFrame::new(&grid, &g0.frame(), FdOrder::Fourth).unwrap();
            let f = grid.sample(bump);
            let x1 = fr.apply_field(0, &f).unwrap();
            // X1 = ∂x − (y/2)∂t applied to the closed form.
            let exact = grid.sample(|p| {
                let s = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                if s >= 1.0 {
                    return 0.0;
                }
                let d = -6.0 * (1.0 - s).powi(5);
                d * 2.0 * p[0] - p[1] / 2.0 * d * 2.0 * p[2]
            });
            errs.push(x1.iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())));
        }
        let rate = (errs[0] / errs[1]).log2();
        assert!(rate > 3.5, "observed order {rate}, errors {errs:?}");
    }

    #[test]
    fn margin_violation_detected() {
        let grid = Grid::symmetric([11, 11, 11], [1.0; 3], 0);
        let f = grid.sample(|p| (p[0] + 2.0).sin());
        assert!(matches!(partial(&grid, &f, 0, FdOrder::Fourth), Err(NumericsError::MarginViolation { axis: 0, .. })));
    }
}
