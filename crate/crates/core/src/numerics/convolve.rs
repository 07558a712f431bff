//! Group convolution `f ∗ K(p) = ∫ K(u) f(p·u⁻¹) du` of grid fields.

use super::grid::{Grid, IndexBox};
use super::kernel::{gauge, polar_point, Kernel, RadialCutoff, Truncated};
use super::{NumericsError, Result};
use crate::group::CarnotGroup;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Product rule in Korányi polar coordinates: Gauss in the gauge radius
/// (per subinterval), Gauss in β = ±(π/2)(1 − w²) per hemisphere, and the
/// periodic trapezoid rule in φ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarRule {
    pub radial: usize,
    pub polar: usize,
    pub azimuth: usize,
    pub max_radial_step: f64,
}

impl Default for PolarRule {
    fn default() -> Self {
        PolarRule { radial: 6, polar: 6, azimuth: 16, max_radial_step: 0.25 }
    }
}

/// Sphere points `σ(β, φ)` with weights for `dβ dφ`.
pub fn sphere_rule(polar: usize, azimuth: usize) -> Vec<(f64, f64, f64)> {
    let (gx, gw) = gauss_legendre(polar);
    let mut out = Vec::new();
    for (xi, wi) in gx.iter().zip(&gw) {
        let w = 0.5 * (xi + 1.0);
        let beta = PI / 2.0 * (1.0 - w * w);
        let wb = PI * w * 0.5 * wi;
        for m in 0..azimuth {
            let phi = 2.0 * PI * (m as f64 + 0.5) / azimuth as f64;
            let wp = 2.0 * PI / azimuth as f64;
            out.push((beta, phi, wb * wp));
            out.push((-beta, phi, wb * wp));
        }
    }
    out
}

impl PolarRule {
    /// Quadrature points and weights (including the r³/4 Jacobian) covering
    /// the gauge shells between consecutive `breaks`.
    pub fn nodes(&self, breaks: &[f64]) -> Vec<([f64; 3], f64)> {
        let (gx, gw) = gauss_legendre(self.radial);
        let sphere = sphere_rule(self.polar, self.azimuth);
        let mut out = Vec::new();
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b <= a {
                continue;
            }
            let pieces = ((b - a) / self.max_radial_step).ceil().max(1.0) as usize;
            let len = (b - a) / pieces as f64;
            for p in 0..pieces {
                let lo = a + p as f64 * len;
                for (xr, wr) in gx.iter().zip(&gw) {
                    let r = lo + 0.5 * len * (xr + 1.0);
                    let jr = 0.5 * len * wr * r * r * r / 4.0;
                    for &(beta, phi, ws) in &sphere {
                        out.push((polar_point(r, beta, phi), jr * ws));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ConvolutionMethod {
    /// Quadrature over u in polar coordinates, interpolating f at p·u⁻¹.
    Polar(PolarRule),
    /// Riemann sum over grid nodes q of f(q) K(q⁻¹p); for a singular kernel
    /// the coincident node is replaced by the exact integral of K over a
    /// gauge ball of one cell volume.
    Direct { excise: bool },
    /// Polar quadrature for ψ_r K with ψ_r a gauge cutoff at `split`, and a
    /// Riemann sum for the smooth remainder (1 − ψ_r) K over every `stride`-th
    /// node, evaluated on the coarse lattice and interpolated back.
    Hybrid { rule: PolarRule, split: f64, stride: usize },
}

impl Default for ConvolutionMethod {
    fn default() -> Self {
        ConvolutionMethod::Polar(PolarRule::default())
    }
}

/// Largest gauge over the corners of an index box.
pub fn box_gauge(grid: &Grid, b: &IndexBox) -> f64 {
    let mut m: f64 = 0.0;
    for &i in &[b.lo[0], b.hi[0].saturating_sub(1)] {
        for &j in &[b.lo[1], b.hi[1].saturating_sub(1)] {
            for &k in &[b.lo[2], b.hi[2].saturating_sub(1)] {
                m = m.max(gauge(grid.point(i, j, k)));
            }
        }
    }
    m
}

/// p·u⁻¹ = (x + dx, y + dy, t + c0 + cx·x + cy·y) for a step-two law in dimension 3.
struct Shift {
    dx: f64,
    dy: f64,
    c0: f64,
    cx: f64,
    cy: f64,
}

fn shift_for(group: &CarnotGroup, u: [f64; 3]) -> Shift {
    let ui = [-u[0], -u[1], -u[2]];
    let at = |p: [f64; 3]| group.product_unchecked(&p, &ui);
    let o = at([0.0; 3]);
    let ex = at([1.0, 0.0, 0.0]);
    let ey = at([0.0, 1.0, 0.0]);
    Shift { dx: o[0], dy: o[1], c0: o[2], cx: ex[2] - o[2], cy: ey[2] - o[2] }
}

fn check_group(group: &CarnotGroup) -> Result<()> {
    let alg = group.algebra();
    if alg.dim() != 3 || alg.step() > 2 {
        return Err(NumericsError::UnsupportedGroup(format!(
            "grid convolution needs a three-dimensional group of step at most two, got {}",
            alg.name()
        )));
    }
    Ok(())
}

/// q⁻¹p = p − q + B(q, p) for a law of step at most two.
pub(crate) struct BilinearLaw {
    b: [[[f64; 3]; 3]; 3],
}

impl BilinearLaw {
    pub(crate) fn new(group: &CarnotGroup) -> Self {
        let mut b = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            for c in 0..3 {
                let mut q = [0.0; 3];
                let mut p = [0.0; 3];
                q[a] = -1.0;
                p[c] = 1.0;
                let u = group.product_unchecked(&q, &p);
                for k in 0..3 {
                    b[k][a][c] = u[k] - p[k] - q[k];
                }
            }
        }
        BilinearLaw { b }
    }

    #[inline]
    pub(crate) fn left_quotient(&self, q: &[f64; 3], p: &[f64; 3]) -> [f64; 3] {
        let mut u = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
        for (k, uk) in u.iter_mut().enumerate() {
            for a in 0..3 {
                for c in 0..3 {
                    let w = self.b[k][a][c];
                    if w != 0.0 {
                        *uk += w * q[a] * p[c];
                    }
                }
            }
        }
        u
    }
}

/// Lagrange weights on the nodes −(W/2 − 1), …, W/2 at offset `fr` ∈ [0, 1).
#[inline]
fn lagrange_weights<const W: usize>(fr: f64) -> [f64; W] {
    let off = (W / 2 - 1) as f64;
    let mut w = [1.0; W];
    for (a, wa) in w.iter_mut().enumerate() {
        let xa = a as f64 - off;
        for b in 0..W {
            if b != a {
                let xb = b as f64 - off;
                *wa *= (fr - xb) / (xa - xb);
            }
        }
    }
    w
}

/// Points per axis of the interpolation stencil in the polar method.
const INTERP: usize = 6;
const INTERP_BACK: isize = (INTERP / 2 - 1) as isize;
const INTERP_SPAN: isize = INTERP as isize - 1;

#[inline]
fn cubic_weights(fr: f64) -> [f64; 4] {
    [
        -fr * (fr - 1.0) * (fr - 2.0) / 6.0,
        (fr + 1.0) * (fr - 1.0) * (fr - 2.0) / 2.0,
        -(fr + 1.0) * fr * (fr - 2.0) / 2.0,
        (fr + 1.0) * fr * (fr - 1.0) / 6.0,
    ]
}

/// Convolves `f` with every component of `kernel`, filling `out` (default:
/// the whole grid); values outside `out` are zero.
pub fn group_convolve(
    group: &CarnotGroup,
    grid: &Grid,
    f: &[f64],
    kernel: &dyn Kernel,
    method: &ConvolutionMethod,
    out: Option<IndexBox>,
) -> Result<Vec<Vec<f64>>> {
    Ok(group_convolve_many(group, grid, &[f], kernel, method, out)?.remove(0))
}

/// [`group_convolve`] for several fields at once; direct sums share kernel
/// evaluations across fields. Indexed `[field][component]`.
pub fn group_convolve_many(
    group: &CarnotGroup,
    grid: &Grid,
    fields: &[&[f64]],
    kernel: &dyn Kernel,
    method: &ConvolutionMethod,
    out: Option<IndexBox>,
) -> Result<Vec<Vec<Vec<f64>>>> {
    check_group(group)?;
    for f in fields {
        if f.len() != grid.len() {
            return Err(NumericsError::ShapeMismatch(format!("field has {} values, grid {}", f.len(), grid.len())));
        }
    }
    let out = out.unwrap_or_else(|| grid.full_box());
    let nc = kernel.components();
    let boxes: Vec<IndexBox> = fields.iter().filter_map(|f| grid.support_box(f)).collect();
    let Some(supp) = boxes.iter().cloned().reduce(|a, b| a.union(&b)) else {
        return Ok(vec![vec![grid.zeros(); nc]; fields.len()]);
    };
    let polar = |k: &dyn Kernel, rule: &PolarRule| -> Result<Vec<Vec<Vec<f64>>>> {
        fields
            .iter()
            .map(|f| match grid.support_box(f) {
                Some(b) => polar_convolve(group, grid, f, k, rule, &b, &out),
                None => Ok(vec![grid.zeros(); nc]),
            })
            .collect()
    };
    match method {
        ConvolutionMethod::Polar(rule) => polar(kernel, rule),
        ConvolutionMethod::Direct { excise } => direct_convolve(group, grid, fields, kernel, *excise, &supp, &out, 1),
        ConvolutionMethod::Hybrid { rule, split, stride } => {
            if *split <= 0.0 || *stride == 0 {
                return Err(NumericsError::InvalidConfig("hybrid convolution needs split > 0 and stride ≥ 1".into()));
            }
            let cutoff = RadialCutoff::new(*split, 0.5);
            let near = Truncated { kernel, cutoff, near: true };
            let far = Truncated { kernel, cutoff, near: false };
            let mut a = polar(&near, rule)?;
            let b = direct_convolve(group, grid, fields, &far, false, &supp, &out, *stride)?;
            for (fa, fb) in a.iter_mut().zip(b) {
                for (x, y) in fa.iter_mut().zip(fb) {
                    for (u, v) in x.iter_mut().zip(y) {
                        *u += v;
                    }
                }
            }
            Ok(a)
        }
    }
}

fn polar_convolve(
    group: &CarnotGroup,
    grid: &Grid,
    f: &[f64],
    kernel: &dyn Kernel,
    rule: &PolarRule,
    supp: &IndexBox,
    out: &IndexBox,
) -> Result<Vec<Vec<f64>>> {
    let nc = kernel.components();
    let (r0, r1) = kernel.radial_support();
    let reach = box_gauge(grid, out) + box_gauge(grid, supp) + 2.0 * grid.h.iter().fold(0.0f64, |m, &h| m.max(h));
    let r_end = r1.map_or(reach, |r| r.min(reach));
    let mut breaks = vec![r0];
    breaks.extend(kernel.radial_breaks().into_iter().filter(|&b| b > r0 && b < r_end));
    breaks.push(r_end);
    let mut nodes = Vec::new();
    let mut buf = vec![0.0; nc];
    for (u, w) in rule.nodes(&breaks) {
        kernel.eval(u, &mut buf);
        if buf.iter().any(|v| *v != 0.0) {
            nodes.push((shift_for(group, u), buf.iter().map(|v| v * w).collect::<Vec<f64>>()));
        }
    }

    let n = grid.n;
    let nk_s = supp.hi[2] - supp.lo[2];
    let nj = out.hi[1] - out.lo[1];
    let nk = out.hi[2] - out.lo[2];
    let slabs: Vec<Vec<Vec<f64>>> = (out.lo[0]..out.hi[0])
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![vec![0.0; nj * nk]; nc];
            let mut col = vec![0.0; nk_s];
            let x = grid.coord(0, i);
            for (sh, kv) in &nodes {
                let sx = i as f64 + sh.dx / grid.h[0];
                let ix = sx.floor();
                let wx = lagrange_weights::<INTERP>(sx - ix);
                let ix = ix as isize - INTERP_BACK;
                if ix + INTERP_SPAN < supp.lo[0] as isize || ix >= supp.hi[0] as isize {
                    continue;
                }
                for j in out.lo[1]..out.hi[1] {
                    let sy = j as f64 + sh.dy / grid.h[1];
                    let iy = sy.floor();
                    let wy = lagrange_weights::<INTERP>(sy - iy);
                    let iy = iy as isize - INTERP_BACK;
                    if iy + INTERP_SPAN < supp.lo[1] as isize || iy >= supp.hi[1] as isize {
                        continue;
                    }
                    col.iter_mut().for_each(|c| *c = 0.0);
                    let mut any = false;
                    for (a, wa) in wx.iter().enumerate() {
                        let ii = ix + a as isize;
                        if ii < supp.lo[0] as isize || ii >= supp.hi[0] as isize {
                            continue;
                        }
                        for (b, wb) in wy.iter().enumerate() {
                            let jj = iy + b as isize;
                            if jj < supp.lo[1] as isize || jj >= supp.hi[1] as isize {
                                continue;
                            }
                            let w = wa * wb;
                            let base = grid.idx(ii as usize, jj as usize, supp.lo[2]);
                            for (c, v) in col.iter_mut().zip(&f[base..base + nk_s]) {
                                *c += w * v;
                            }
                            any = true;
                        }
                    }
                    if !any {
                        continue;
                    }
                    let y = grid.coord(1, j);
                    let st = (sh.c0 + sh.cx * x + sh.cy * y) / grid.h[2];
                    let it = st.floor();
                    let wt = lagrange_weights::<INTERP>(st - it);
                    let it = it as isize - INTERP_BACK;
                    // Source index k + it + c must fall in the support range.
                    let klo = (supp.lo[2] as isize - it - INTERP_SPAN).max(out.lo[2] as isize);
                    let khi = (supp.hi[2] as isize - it).min(out.hi[2] as isize);
                    for k in klo..khi {
                        let mut v = 0.0;
                        for (c, w) in wt.iter().enumerate() {
                            let s = k + it + c as isize - supp.lo[2] as isize;
                            if s >= 0 && (s as usize) < nk_s {
                                v += w * col[s as usize];
                            }
                        }
                        if v != 0.0 {
                            let o = (j - out.lo[1]) * nk + (k as usize - out.lo[2]);
                            for (a, kvc) in acc.iter_mut().zip(kv) {
                                a[o] += kvc * v;
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();

    let mut result = vec![grid.zeros(); nc];
    for (di, slab) in slabs.into_iter().enumerate() {
        let i = out.lo[0] + di;
        for (c, comp) in slab.into_iter().enumerate() {
            for j in 0..nj {
                let dst = grid.idx(i, out.lo[1] + j, out.lo[2]);
                result[c][dst..dst + nk].copy_from_slice(&comp[j * nk..(j + 1) * nk]);
            }
        }
    }
    let _ = n;
    Ok(result)
}

/// ∫_{N(u) < a} K(u) du for a kernel homogeneous of degree α > −4.
fn small_ball_integral(kernel: &dyn Kernel, alpha: f64, a: f64) -> Vec<f64> {
    let nc = kernel.components();
    let mut ang = vec![0.0; nc];
    let mut buf = vec![0.0; nc];
    for (beta, phi, w) in sphere_rule(16, 64) {
        kernel.eval(polar_point(1.0, beta, phi), &mut buf);
        for (s, v) in ang.iter_mut().zip(&buf) {
            *s += w * v;
        }
    }
    let radial = a.powf(alpha + 4.0) / (4.0 * (alpha + 4.0));
    ang.into_iter().map(|v| v * radial).collect()
}

#[allow(clippy::too_many_arguments)]
fn direct_convolve(
    group: &CarnotGroup,
    grid: &Grid,
    fields: &[&[f64]],
    kernel: &dyn Kernel,
    excise: bool,
    supp: &IndexBox,
    out: &IndexBox,
    stride: usize,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let nc = kernel.components();
    let singular = kernel.singular_at_origin();
    let overlap = (0..3).all(|a| supp.lo[a] < out.hi[a] && out.lo[a] < supp.hi[a]);
    if singular && overlap && (!excise || stride != 1) {
        return Err(NumericsError::SingularKernel);
    }
    let dv = grid.cell_volume();
    let correction = match (singular, kernel.homogeneity()) {
        (true, Some(alpha)) if alpha > -4.0 => {
            let a = (8.0 * dv / (PI * PI)).powf(0.25);
            small_ball_integral(kernel, alpha, a)
        }
        (true, _) => return Err(NumericsError::SingularKernel),
        _ => vec![0.0; nc],
    };
    let law = BilinearLaw::new(group);
    // Sources on the stride lattice anchored at the support corner; the
    // support box already contains every nonzero, so its ends are zero-padded.
    let mut sources = Vec::new();
    for i in (supp.lo[0]..supp.hi[0]).step_by(stride) {
        for j in (supp.lo[1]..supp.hi[1]).step_by(stride) {
            for k in (supp.lo[2]..supp.hi[2]).step_by(stride) {
                let x = grid.idx(i, j, k);
                let v: Vec<f64> = fields.iter().map(|f| f[x]).collect();
                if v.iter().any(|v| *v != 0.0) {
                    sources.push(([i, j, k], grid.point(i, j, k), v));
                }
            }
        }
    }
    let weight = dv * (stride * stride * stride) as f64;
    // Coarse output lattice, extended so that every fine node has a
    // four-point stencil whenever the box holds at least four coarse nodes.
    let axes: Vec<Vec<usize>> = (0..3)
        .map(|a| {
            if stride == 1 {
                return (out.lo[a]..out.hi[a]).collect();
            }
            let lo = out.lo[a].saturating_sub(stride);
            let hi = (out.hi[a] + 2 * stride).min(grid.n[a]);
            (lo..hi).step_by(stride).collect()
        })
        .collect();
    let (cy, cz) = (axes[1].len(), axes[2].len());
    let nf = fields.len();
    // planes[i][field · nc + component][j · cz + k]
    let planes: Vec<Vec<Vec<f64>>> = axes[0]
        .par_iter()
        .map(|&i| {
            let mut acc = vec![vec![0.0; cy * cz]; nf * nc];
            let mut buf = vec![0.0; nc];
            for (jj, &j) in axes[1].iter().enumerate() {
                for (kk, &k) in axes[2].iter().enumerate() {
                    let p = grid.point(i, j, k);
                    let o = jj * cz + kk;
                    for (idx, q, v) in &sources {
                        let kv = if singular && *idx == [i, j, k] {
                            buf.iter_mut().zip(&correction).for_each(|(b, c)| *b = c / dv);
                            &buf
                        } else {
                            kernel.eval(law.left_quotient(q, &p), &mut buf);
                            &buf
                        };
                        for (fi, vf) in v.iter().enumerate() {
                            if *vf != 0.0 {
                                for (c, b) in kv.iter().enumerate() {
                                    acc[fi * nc + c][o] += vf * b;
                                }
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut result = vec![vec![grid.zeros(); nc]; nf];
    if stride == 1 {
        for (di, plane) in planes.into_iter().enumerate() {
            let i = out.lo[0] + di;
            for (fc, vals) in plane.into_iter().enumerate() {
                for jj in 0..cy {
                    let dst = grid.idx(i, out.lo[1] + jj, out.lo[2]);
                    for (r, v) in result[fc / nc][fc % nc][dst..dst + cz].iter_mut().zip(&vals[jj * cz..(jj + 1) * cz]) {
                        *r = v * weight;
                    }
                }
            }
        }
        return Ok(result);
    }
    let stencil = |a: usize, i: usize| -> (usize, [f64; 4]) {
        let m = axes[a].len();
        let pos = (i - axes[a][0]) as f64 / stride as f64;
        if m < 4 {
            // Too few coarse nodes: nearest neighbour.
            let s = (pos.round() as usize).min(m - 1);
            let mut w = [0.0; 4];
            w[0] = 1.0;
            return (s, w);
        }
        let s = ((pos.floor() as isize) - 1).clamp(0, m as isize - 4) as usize;
        let x = pos - s as f64 - 1.0;
        (s, cubic_weights(x))
    };
    for i in out.lo[0]..out.hi[0] {
        let (si, wi) = stencil(0, i);
        for j in out.lo[1]..out.hi[1] {
            let (sj, wj) = stencil(1, j);
            for k in out.lo[2]..out.hi[2] {
                let (sk, wk) = stencil(2, k);
                let dst = grid.idx(i, j, k);
                for fc in 0..nf * nc {
                    let mut v = 0.0;
                    for (a, wa) in wi.iter().enumerate() {
                        if *wa == 0.0 {
                            continue;
                        }
                        let plane = &planes[si + a][fc];
                        for (b, wb) in wj.iter().enumerate() {
                            for (d, wd) in wk.iter().enumerate() {
                                if *wb != 0.0 && *wd != 0.0 {
                                    v += wa * wb * wd * plane[(sj + b) * cz + sk + d];
                                }
                            }
                        }
                    }
                    result[fc / nc][fc % nc][dst] = v * weight;
                }
            }
        }
    }
    Ok(result)
}
