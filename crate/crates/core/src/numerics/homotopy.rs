//! Homotopy operators on volume forms: the Euclidean averaged cone operator
//! on cylinders, its Rumin-complex correction, and the near/far kernel split.

use super::convolve::{box_gauge, gauss_legendre, group_convolve, ConvolutionMethod};
use super::fd::{e0_metric, instantiate, GridFrame};
use super::grid::{FormFrame, Grid, GridForm};
use super::kernel::{HeisenbergKernels, RadialCutoff, SplitKernel};
use super::{NumericsError, Result};
use crate::exterior;
use crate::group::{CarnotGroup, HomogeneousNormConfig, VectorField};
use crate::opcalc::FormOperator;
use crate::rumin::RuminComplex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `{|z| ≤ radius, |t| ≤ half_height}` in exponential coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub radius: f64,
    pub half_height: f64,
}

impl Cylinder {
    /// The ball `B(e, r)` of a layered max-norm on a group with layers (2, 1).
    pub fn norm_ball(norm: &HomogeneousNormConfig, r: f64) -> Cylinder {
        Cylinder { radius: r / norm.epsilons[0], half_height: (r / norm.epsilons[1]).powi(2) }
    }

    pub fn contains(&self, p: [f64; 3], slack: f64) -> bool {
        (p[0] * p[0] + p[1] * p[1]).sqrt() <= self.radius + slack && p[2].abs() <= self.half_height + slack
    }
}

/// θ(z, t) = θ_z(z) θ_t(t) with `(1 − s²)³₊` profiles; θ_t is normalised so its
/// discrete integral on the grid column is exactly one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaBump {
    pub radius: f64,
    pub half_height: f64,
}

impl ThetaBump {
    fn disc_raw(&self, z2: f64) -> f64 {
        let s = z2 / (self.radius * self.radius);
        if s < 1.0 {
            (1.0 - s).powi(3)
        } else {
            0.0
        }
    }

    /// θ_z with unit mass: ∫ (1 − |z|²/ρ²)³ dz = πρ²/4.
    pub fn disc(&self, z: [f64; 2]) -> f64 {
        self.disc_raw(z[0] * z[0] + z[1] * z[1]) * 4.0 / (PI * self.radius * self.radius)
    }

    fn column_raw(&self, t: f64) -> f64 {
        let s = t * t / (self.half_height * self.half_height);
        if s < 1.0 {
            (1.0 - s).powi(3)
        } else {
            0.0
        }
    }

    /// θ_t sampled on the t-axis of `grid`, with unit mass under [`cumulative`].
    pub fn column(&self, grid: &Grid) -> Result<Vec<f64>> {
        let raw: Vec<f64> = (0..grid.n[2]).map(|k| self.column_raw(grid.coord(2, k))).collect();
        let mass = *cumulative(&raw, grid.h[2]).last().unwrap_or(&0.0);
        if !(mass > 0.0) {
            return Err(NumericsError::BumpMass { mass });
        }
        Ok(raw.into_iter().map(|v| v / mass).collect())
    }
}

/// Running integral by the four-point rule
/// `I_k = I_{k−1} + h(−g_{k−2} + 13g_{k−1} + 13g_k − g_{k+1})/24`, zero outside the array.
pub fn cumulative(g: &[f64], h: f64) -> Vec<f64> {
    let at = |k: isize| if k >= 0 && (k as usize) < g.len() { g[k as usize] } else { 0.0 };
    let mut out = vec![0.0; g.len()];
    for k in 1..g.len() {
        let k = k as isize;
        out[k as usize] = out[k as usize - 1] + h * (-at(k - 2) + 13.0 * at(k - 1) + 13.0 * at(k) - at(k + 1)) / 24.0;
    }
    out
}

/// Quadrature for the planar cone operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeRule {
    pub directions: usize,
    /// Gauss points per radial panel; panels are one grid spacing long.
    pub gauss: usize,
}

impl Default for ConeRule {
    fn default() -> Self {
        ConeRule { directions: 96, gauss: 3 }
    }
}

/// Bicubic (4×4 Lagrange) interpolation of a planar field, zero outside.
struct Plane<'a> {
    n: [usize; 2],
    lo: [f64; 2],
    h: [f64; 2],
    v: &'a [f64],
}

fn cubic(fr: f64) -> [f64; 4] {
    [
        -fr * (fr - 1.0) * (fr - 2.0) / 6.0,
        (fr + 1.0) * (fr - 1.0) * (fr - 2.0) / 2.0,
        -(fr + 1.0) * fr * (fr - 2.0) / 2.0,
        (fr + 1.0) * fr * (fr - 1.0) / 6.0,
    ]
}

impl Plane<'_> {
    fn at(&self, x: f64, y: f64) -> f64 {
        let sx = (x - self.lo[0]) / self.h[0];
        let sy = (y - self.lo[1]) / self.h[1];
        let (ix, iy) = (sx.floor(), sy.floor());
        let (wx, wy) = (cubic(sx - ix), cubic(sy - iy));
        let (ix, iy) = (ix as isize - 1, iy as isize - 1);
        let mut s = 0.0;
        for (a, wa) in wx.iter().enumerate() {
            let i = ix + a as isize;
            if i < 0 || i >= self.n[0] as isize {
                continue;
            }
            for (b, wb) in wy.iter().enumerate() {
                let j = iy + b as isize;
                if j < 0 || j >= self.n[1] as isize {
                    continue;
                }
                s += wa * wb * self.v[i as usize * self.n[1] + j as usize];
            }
        }
        s
    }
}

/// Planar averaged cone operator: a field v on the disc with
/// div v = a − (∫a) θ_z, from
/// v(z) = −∫_{S¹} ω ∫∫ θ_z(z − ρω) (ρ + τ) a(z + τω) dρ dτ dω.
fn planar_cone(grid: &Grid, a: &[f64], theta: &ThetaBump, disc: f64, rule: &ConeRule) -> [Vec<f64>; 2] {
    let (nx, ny) = (grid.n[0], grid.n[1]);
    let plane = Plane { n: [nx, ny], lo: [grid.lo[0], grid.lo[1]], h: [grid.h[0], grid.h[1]], v: a };
    let mut reach: f64 = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            if a[i * ny + j] != 0.0 {
                let (x, y) = (grid.coord(0, i), grid.coord(1, j));
                reach = reach.max((x * x + y * y).sqrt());
            }
        }
    }
    reach += 2.0 * grid.h[0].max(grid.h[1]);
    let panel = grid.h[0].min(grid.h[1]);
    let (gx, gw) = gauss_legendre(rule.gauss);
    let (px, pw) = gauss_legendre(4);
    let dirs: Vec<(f64, f64)> = (0..rule.directions)
        .map(|m| {
            let phi = 2.0 * PI * m as f64 / rule.directions as f64;
            (phi.cos(), phi.sin())
        })
        .collect();
    let dphi = 2.0 * PI / rule.directions as f64;
    let rows: Vec<Vec<[f64; 2]>> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let x = grid.coord(0, i);
            (0..ny)
                .map(|j| {
                    let y = grid.coord(1, j);
                    if (x * x + y * y).sqrt() > disc + 1e-12 {
                        return [0.0; 2];
                    }
                    let mut v = [0.0; 2];
                    for &(cx, cy) in &dirs {
                        // A_k: θ_z along z − ρω is a polynomial of degree six in ρ.
                        let zw = x * cx + y * cy;
                        let disc_r = zw * zw - (x * x + y * y) + theta.radius * theta.radius;
                        let (mut a0, mut a1) = (0.0, 0.0);
                        if disc_r > 0.0 {
                            let lo = (zw - disc_r.sqrt()).max(0.0);
                            let hi = zw + disc_r.sqrt();
                            if hi > lo {
                                for (xr, wr) in px.iter().zip(&pw) {
                                    let rho = lo + 0.5 * (hi - lo) * (xr + 1.0);
                                    let w = 0.5 * (hi - lo) * wr * theta.disc([x - rho * cx, y - rho * cy]);
                                    a0 += w;
                                    a1 += w * rho;
                                }
                            }
                        }
                        if a0 == 0.0 {
                            continue;
                        }
                        // B_k: the ray z + τω leaves supp a before |z| + reach.
                        let tmax = (x * x + y * y).sqrt() + reach;
                        let pieces = (tmax / panel).ceil() as usize;
                        let len = tmax / pieces as f64;
                        let (mut b0, mut b1) = (0.0, 0.0);
                        for p in 0..pieces {
                            let t0 = p as f64 * len;
                            for (xt, wt) in gx.iter().zip(&gw) {
                                let tau = t0 + 0.5 * len * (xt + 1.0);
                                let w = 0.5 * len * wt * plane.at(x + tau * cx, y + tau * cy);
                                b0 += w;
                                b1 += w * tau;
                            }
                        }
                        let s = -(a0 * b1 + a1 * b0) * dphi;
                        v[0] += s * cx;
                        v[1] += s * cy;
                    }
                    v
                })
                .collect()
        })
        .collect();
    let mut out = [vec![0.0; nx * ny], vec![0.0; nx * ny]];
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            out[0][i * ny + j] = v[0];
            out[1][i * ny + j] = v[1];
        }
    }
    out
}

/// Euclidean homotopy for a top-degree form `a dx∧dy∧dt` supported in a
/// cylinder: returns a vector field u (coordinate components) supported in
/// the same cylinder with div u = a − (∫a) θ.
pub fn j_euclidean(grid: &Grid, a: &[f64], domain: &Cylinder, theta: &ThetaBump, rule: &ConeRule) -> Result<[Vec<f64>; 3]> {
    if a.len() != grid.len() {
        return Err(NumericsError::ShapeMismatch(format!("field has {} values, grid {}", a.len(), grid.len())));
    }
    if theta.radius > domain.radius || theta.half_height > domain.half_height {
        return Err(NumericsError::Support("the averaging bump must lie inside the domain".into()));
    }
    let slack = 1e-9 * (1.0 + domain.radius + domain.half_height);
    for i in 0..grid.n[0] {
        for j in 0..grid.n[1] {
            for k in 0..grid.n[2] {
                if a[grid.idx(i, j, k)] != 0.0 && !domain.contains(grid.point(i, j, k), slack) {
                    return Err(NumericsError::Support(format!(
                        "form is nonzero at {:?}, outside the cylinder of radius {} and half-height {}",
                        grid.point(i, j, k),
                        domain.radius,
                        domain.half_height
                    )));
                }
            }
        }
    }
    let (nx, ny, nt) = (grid.n[0], grid.n[1], grid.n[2]);
    let ht = grid.h[2];
    let th = theta.column(grid)?;
    let mut col_mass = vec![0.0; nx * ny];
    let mut ut = grid.zeros();
    for i in 0..nx {
        for j in 0..ny {
            let base = grid.idx(i, j, 0);
            let col = &a[base..base + nt];
            if col.iter().all(|v| *v == 0.0) {
                continue;
            }
            let m = *cumulative(col, ht).last().unwrap();
            col_mass[i * ny + j] = m;
            let g: Vec<f64> = col.iter().zip(&th).map(|(v, t)| v - t * m).collect();
            let c = cumulative(&g, ht);
            // Past the support the running integral is zero up to rounding.
            for (k, v) in c.into_iter().enumerate() {
                if grid.coord(2, k).abs() <= domain.half_height + slack {
                    ut[base + k] = v;
                }
            }
        }
    }
    let v = planar_cone(grid, &col_mass, theta, domain.radius, rule);
    let mut ux = grid.zeros();
    let mut uy = grid.zeros();
    for i in 0..nx {
        for j in 0..ny {
            let (vx, vy) = (v[0][i * ny + j], v[1][i * ny + j]);
            if vx == 0.0 && vy == 0.0 {
                continue;
            }
            let base = grid.idx(i, j, 0);
            for k in 0..nt {
                ux[base + k] = th[k] * vx;
                uy[base + k] = th[k] * vy;
            }
        }
    }
    Ok([ux, uy, ut])
}

/// ι_u(θ_1∧θ_2∧θ_3) in Λ² coordinates, with u given in coordinate components.
pub fn volume_contraction(grid: &Grid, frame: &[VectorField], u: &[Vec<f64>; 3]) -> GridForm {
    let masks = exterior::basis(3, 2);
    let mut comps = vec![grid.zeros(); masks.len()];
    for i in 0..grid.n[0] {
        for j in 0..grid.n[1] {
            for k in 0..grid.n[2] {
                let x = grid.idx(i, j, k);
                let c = [u[0][x], u[1][x], u[2][x]];
                if c == [0.0; 3] {
                    continue;
                }
                let p = grid.point(i, j, k);
                // Columns of the frame matrix: u = Σ_j U_j X_j.
                let a: Vec<Vec<f64>> = frame.iter().map(|f| f.eval(&p)).collect();
                let uu = solve3([[a[0][0], a[1][0], a[2][0]], [a[0][1], a[1][1], a[2][1]], [a[0][2], a[1][2], a[2][2]]], c);
                for (jj, uj) in uu.iter().enumerate() {
                    let rest = exterior::full_mask(3) & !(1 << jj);
                    let pos = masks.iter().position(|&m| m == rest).unwrap();
                    let sign = if jj % 2 == 0 { 1.0 } else { -1.0 };
                    comps[pos][x] += sign * uj;
                }
            }
        }
    }
    GridForm::new(2, FormFrame::Lambda, vec![1.0; masks.len()], comps)
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(m);
    [0, 1, 2].map(|c| {
        let mut mc = m;
        for r in 0..3 {
            mc[r][c] = b[r];
        }
        det(mc) / d
    })
}

/// J α = Π_{E₀} Π_E J_Euc α for a top-degree form with coefficient `a`
/// (against θ_1∧θ_2∧θ_3), returned in E₀^{n−1} coordinates.
pub struct RuminHomotopy<'a> {
    cx: &'a RuminComplex,
    frame: &'a GridFrame,
    correction: FormOperator,
}

impl<'a> RuminHomotopy<'a> {
    pub fn new(cx: &'a RuminComplex, frame: &'a GridFrame) -> Result<Self> {
        if cx.dim() != 3 {
            return Err(NumericsError::UnsupportedGroup(format!("grid homotopy needs dimension 3, got {}", cx.dim())));
        }
        let correction = FormOperator::compose(cx.pbw(), cx.extract(2), cx.pi_e(2)?)?;
        Ok(RuminHomotopy { cx, frame, correction })
    }

    pub fn apply(&self, a: &[f64], domain: &Cylinder, theta: &ThetaBump, rule: &ConeRule) -> Result<GridForm> {
        let grid = self.frame.grid();
        let u = j_euclidean(grid, a, domain, theta, rule)?;
        let frame = CarnotGroup::new(self.cx.algebra().clone()).frame();
        let beta = volume_contraction(grid, &frame, &u);
        instantiate(self.cx, self.frame, &self.correction, 2, FormFrame::E0).apply(&beta)
    }
}

/// Outputs of the kernel split ω = d_c K_{1,R} ω + S ω.
pub struct HomotopySplit {
    /// ω ∗ ψ_R k₁ in E₀^{n−1} coordinates.
    pub near: GridForm,
    /// Coefficient of S ω = ω ∗ K_S.
    pub smooth: Vec<f64>,
}

/// Convolves the coefficient of a volume form with ψ_R k₁ and with K_S.
pub fn homotopy_split(
    cx: &RuminComplex,
    grid: &Grid,
    omega: &[f64],
    kernels: &HeisenbergKernels,
    cutoff: RadialCutoff,
    method: &ConvolutionMethod,
) -> Result<HomotopySplit> {
    let group = CarnotGroup::new(cx.algebra().clone());
    let split = SplitKernel { kernels, cutoff };
    let out = match grid.support_box(omega) {
        Some(b) => {
            let rho = box_gauge(grid, &b) + cutoff.radius + 2.0 * grid.h[0].max(grid.h[1]);
            grid.box_covering([rho, rho, rho * rho / 4.0 + 2.0 * grid.h[2]])
        }
        None => grid.full_box(),
    };
    let mut comps = group_convolve(&group, grid, omega, &split, method, Some(out))?;
    let smooth = comps.pop().unwrap();
    Ok(HomotopySplit { near: GridForm::new(2, FormFrame::E0, e0_metric(cx, 2), comps), smooth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::StratifiedLieAlgebra;
    use crate::numerics::fd::{partial, FdOrder};
    use crate::numerics::norms::{lp_norm, Region};

    fn bump(p: [f64; 3], c: [f64; 3], r: f64) -> f64 {
        let s = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)) / (r * r) + (p[2] - c[2]).powi(2) / (r * r);
        if s < 1.0 {
            (1.0 - s).powi(4)
        } else {
            0.0
        }
    }

    #[test]
    fn cumulative_rule_is_fourth_order() {
        let err = |n: usize| {
            let h = 2.0 / (n - 1) as f64;
            let g: Vec<f64> = (0..n).map(|k| (-1.0 + k as f64 * h).cos()).collect();
            let c = cumulative(&g, h);
            // Interior nodes only: the rule zero-extends at the ends.
            (n / 4..n - 2).map(|k| (c[k] - c[n / 4] - ((-1.0 + k as f64 * h).sin() - (-1.0 + (n / 4) as f64 * h).sin())).abs()).fold(0.0, f64::max)
        };
        let rate = (err(41) / err(81)).log2();
        assert!(rate > 3.5, "rate {rate}");
    }

    #[test]
    fn euclidean_homotopy_inverts_divergence() {
        let grid = Grid::symmetric([40, 40, 40], [1.0, 1.0, 1.0], 4);
        let dom = Cylinder { radius: 1.0, half_height: 1.0 };
        let theta = ThetaBump { radius: 0.5, half_height: 0.5 };
        let a = grid.sample(|p| bump(p, [0.2, -0.1, 0.1], 0.55) - 0.7 * bump(p, [-0.2, 0.2, -0.2], 0.45));
        let u = j_euclidean(&grid, &a, &dom, &theta, &ConeRule::default()).unwrap();
        let mut div = grid.zeros();
        for ax in 0..3 {
            let d = partial(&grid, &u[ax], ax, FdOrder::Fourth).unwrap();
            div.iter_mut().zip(&d).for_each(|(s, v)| *s += v);
        }
        let mass = a.iter().sum::<f64>() * grid.cell_volume();
        let th = theta.column(&grid).unwrap();
        let mut res = div.clone();
        for i in 0..grid.n[0] {
            for j in 0..grid.n[1] {
                for k in 0..grid.n[2] {
                    let x = grid.idx(i, j, k);
                    let p = grid.point(i, j, k);
                    res[x] -= a[x] - mass * theta.disc([p[0], p[1]]) * th[k];
                    if u.iter().any(|c| c[x] != 0.0) {
                        assert!(dom.contains(p, 1e-9));
                    }
                }
            }
        }
        let rel = lp_norm(&grid, &res, 1.0, &Region::All) / lp_norm(&grid, &a, 1.0, &Region::All);
        assert!(rel < 0.02, "relative residual {rel}");
    }

    #[test]
    fn support_outside_domain_is_rejected() {
        let grid = Grid::symmetric([16, 16, 16], [1.0; 3], 2);
        let a = grid.sample(|p| bump(p, [0.6, 0.0, 0.0], 0.5));
        let dom = Cylinder { radius: 0.5, half_height: 1.0 };
        let theta = ThetaBump { radius: 0.3, half_height: 0.3 };
        assert!(matches!(j_euclidean(&grid, &a, &dom, &theta, &ConeRule::default()), Err(NumericsError::Support(_))));
    }

    #[test]
    fn contraction_of_coordinate_field() {
        // u = ∂_t = X_3 gives ι_{X_3} θ_{123} = θ_{12}.
        let alg = StratifiedLieAlgebra::heisenberg(1);
        let frame = CarnotGroup::new(alg).frame();
        let grid = Grid::symmetric([5, 5, 5], [1.0; 3], 0);
        let u = [grid.zeros(), grid.zeros(), vec![1.0; grid.len()]];
        let b = volume_contraction(&grid, &frame, &u);
        let masks = exterior::basis(3, 2);
        let p12 = masks.iter().position(|&m| m == 0b011).unwrap();
        for (c, comp) in b.components.iter().enumerate() {
            let want = if c == p12 { 1.0 } else { 0.0 };
            assert!(comp.iter().all(|v| (v - want).abs() < 1e-14));
        }
    }
}
