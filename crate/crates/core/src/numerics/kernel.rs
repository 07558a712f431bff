//! Convolution kernels on the first Heisenberg group: the fundamental
//! solution of the sub-Laplacian, its horizontal derivatives, and their
//! truncations.

use super::{NumericsError, Result};
use crate::group::{CarnotGroup, VectorField};
use crate::rumin::RuminComplex;
use crate::scalar::{rat_to_f64, Rat};
use std::f64::consts::PI;

/// Normalizing constant of Γ = c (|z|⁴ + 16 t²)^{-1/2}.
pub const GAMMA_CONSTANT: f64 = 1.0 / (2.0 * PI);

/// Korányi gauge N(u) = (|z|⁴ + 16 t²)^{1/4}.
pub fn gauge(u: [f64; 3]) -> f64 {
    let z2 = u[0] * u[0] + u[1] * u[1];
    (z2 * z2 + 16.0 * u[2] * u[2]).sqrt().sqrt()
}

/// Point of gauge `r` with angles β ∈ [−π/2, π/2], φ ∈ [0, 2π).
/// The volume element is `r³/4 dr dβ dφ`.
pub fn polar_point(r: f64, beta: f64, phi: f64) -> [f64; 3] {
    let c = beta.cos().max(0.0).sqrt();
    [r * c * phi.cos(), r * c * phi.sin(), r * r * beta.sin() / 4.0]
}

pub trait Kernel: Sync {
    fn components(&self) -> usize;

    fn eval(&self, u: [f64; 3], out: &mut [f64]);

    /// Gauge radii bounding the support: `(inner, outer)`, `outer = None` if unbounded.
    fn radial_support(&self) -> (f64, Option<f64>);

    /// Gauge radii where the kernel is not smooth, strictly inside the support.
    fn radial_breaks(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Exponent `a` with K(δ_λ u) = λ^a K(u), for homogeneous kernels.
    fn homogeneity(&self) -> Option<f64> {
        None
    }

    fn singular_at_origin(&self) -> bool {
        self.homogeneity().is_some_and(|a| a < 0.0)
    }
}

fn frame_at(frame: &[VectorField], u: [f64; 3]) -> [[f64; 3]; 3] {
    let mut a = [[0.0; 3]; 3];
    for (j, x) in frame.iter().enumerate() {
        for (k, c) in x.coeffs.iter().enumerate() {
            a[j][k] = c.eval_f64(&u);
        }
    }
    a
}

/// Closed-form Γ and its horizontal derivatives, together with the symbolic
/// coefficients of d_c* on volume forms and of d_c on (n−1)-forms.
#[derive(Clone, Debug)]
pub struct HeisenbergKernels {
    c: f64,
    frame: Vec<VectorField>,
    /// Row `c` gives the coefficients of X_1, X_2, X_3 in component `c` of d_c*(· dV).
    dc_star_top: Vec<[f64; 3]>,
    /// Coefficients of X_1, X_2, X_3 of d_c on component `c` of E₀^{n−1}.
    dc_last: Vec<[f64; 3]>,
}

fn first_order_coeffs(p: &crate::opcalc::OperatorPolynomial) -> Result<[f64; 3]> {
    if p.order() > 1 || p.constant_term() != Rat::from_integer(0.into()) {
        return Err(NumericsError::UnsupportedGroup("expected a first-order operator without constant term".into()));
    }
    Ok([0, 1, 2].map(|j| rat_to_f64(&p.linear_coeff(j))))
}

impl HeisenbergKernels {
    pub fn new(cx: &RuminComplex) -> Result<Self> {
        let alg = cx.algebra();
        let is_h1 = alg.layer_dims() == [2, 1]
            && alg.structure_constant(0, 1, 2) == Rat::from_integer(1.into())
            && alg.bracket_terms(0, 2).is_empty()
            && alg.bracket_terms(1, 2).is_empty();
        if !is_h1 {
            return Err(NumericsError::UnsupportedGroup(format!(
                "closed-form kernels are available for the first Heisenberg group only, not {}",
                alg.name()
            )));
        }
        let star = cx.dc_star(3)?;
        let dc = cx.dc(2)?;
        let dc_star_top = (0..star.rows()).map(|c| first_order_coeffs(star.entry(c, 0))).collect::<Result<_>>()?;
        let dc_last = (0..dc.cols()).map(|c| first_order_coeffs(dc.entry(0, c))).collect::<Result<_>>()?;
        Ok(HeisenbergKernels {
            c: GAMMA_CONSTANT,
            frame: CarnotGroup::new(alg.clone()).frame(),
            dc_star_top,
            dc_last,
        })
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    pub fn gamma(&self, u: [f64; 3]) -> f64 {
        let z2 = u[0] * u[0] + u[1] * u[1];
        self.c / (z2 * z2 + 16.0 * u[2] * u[2]).sqrt()
    }

    /// X_j Γ(u), j = 1, 2, 3.
    pub fn frame_gradient(&self, u: [f64; 3]) -> [f64; 3] {
        let z2 = u[0] * u[0] + u[1] * u[1];
        let rho = z2 * z2 + 16.0 * u[2] * u[2];
        let f = -0.5 * self.c * rho.powf(-1.5);
        let grad = [f * 4.0 * z2 * u[0], f * 4.0 * z2 * u[1], f * 32.0 * u[2]];
        let a = frame_at(&self.frame, u);
        [0, 1, 2].map(|j| (0..3).map(|k| a[j][k] * grad[k]).sum())
    }

    /// X_j applied to N⁴ = |z|⁴ + 16t².
    pub fn frame_gradient_gauge4(&self, u: [f64; 3]) -> [f64; 3] {
        let z2 = u[0] * u[0] + u[1] * u[1];
        let grad = [4.0 * z2 * u[0], 4.0 * z2 * u[1], 32.0 * u[2]];
        let a = frame_at(&self.frame, u);
        [0, 1, 2].map(|j| (0..3).map(|k| a[j][k] * grad[k]).sum())
    }

    /// Components of the kernel of d_c* Δ⁻¹ on volume forms, in E₀^{n−1} coordinates.
    pub fn k1(&self, u: [f64; 3]) -> [f64; 2] {
        let g = self.frame_gradient(u);
        let mut out = [0.0; 2];
        for (c, row) in self.dc_star_top.iter().enumerate().take(2) {
            out[c] = row.iter().zip(&g).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn dc_last(&self) -> &[[f64; 3]] {
        &self.dc_last
    }
}

/// Γ as a convolution kernel, homogeneous of degree 2 − Q = −2.
pub struct FundamentalSolution<'a>(pub &'a HeisenbergKernels);

impl Kernel for FundamentalSolution<'_> {
    fn components(&self) -> usize {
        1
    }
    fn eval(&self, u: [f64; 3], out: &mut [f64]) {
        out[0] = self.0.gamma(u);
    }
    fn radial_support(&self) -> (f64, Option<f64>) {
        (0.0, None)
    }
    fn homogeneity(&self) -> Option<f64> {
        Some(-2.0)
    }
}

/// k₁, homogeneous of degree 1 − Q = −3.
pub struct HorizontalKernel<'a>(pub &'a HeisenbergKernels);

impl Kernel for HorizontalKernel<'_> {
    fn components(&self) -> usize {
        2
    }
    fn eval(&self, u: [f64; 3], out: &mut [f64]) {
        out[..2].copy_from_slice(&self.0.k1(u));
    }
    fn radial_support(&self) -> (f64, Option<f64>) {
        (0.0, None)
    }
    fn homogeneity(&self) -> Option<f64> {
        Some(-3.0)
    }
}

/// ψ_R = χ(N⁴/R⁴) with χ = 1 below `inner⁴/R⁴`, 0 above 1, and a quintic
/// smoothstep (two continuous derivatives) in between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialCutoff {
    pub radius: f64,
    pub inner: f64,
}

impl RadialCutoff {
    pub fn new(radius: f64, inner_fraction: f64) -> Self {
        assert!(radius > 0.0 && inner_fraction > 0.0 && inner_fraction < 1.0);
        RadialCutoff { radius, inner: radius * inner_fraction }
    }

    fn v0(&self) -> f64 {
        (self.inner / self.radius).powi(4)
    }

    fn chi(&self, v: f64) -> (f64, f64) {
        let v0 = self.v0();
        if v <= v0 {
            return (1.0, 0.0);
        }
        if v >= 1.0 {
            return (0.0, 0.0);
        }
        let s = (v - v0) / (1.0 - v0);
        let val = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
        let der = 30.0 * s * s * (1.0 - s) * (1.0 - s) / (1.0 - v0);
        (1.0 - val, -der)
    }

    pub fn value(&self, u: [f64; 3]) -> f64 {
        self.chi(gauge(u).powi(4) / self.radius.powi(4)).0
    }

    /// X_j ψ_R for j = 1, 2, 3.
    pub fn frame_gradient(&self, k: &HeisenbergKernels, u: [f64; 3]) -> [f64; 3] {
        let r4 = self.radius.powi(4);
        let (_, d) = self.chi(gauge(u).powi(4) / r4);
        if d == 0.0 {
            return [0.0; 3];
        }
        k.frame_gradient_gauge4(u).map(|g| d * g / r4)
    }
}

/// `[ψ_R k₁ (two components), K_S]` with K_S = d_c((1 − ψ_R) k₁) away from the
/// origin, where d_c k₁ vanishes, so K_S = −Σ a_{c,j} (X_j ψ_R) k₁_c.
pub struct SplitKernel<'a> {
    pub kernels: &'a HeisenbergKernels,
    pub cutoff: RadialCutoff,
}

impl SplitKernel<'_> {
    pub fn smooth_part(&self, u: [f64; 3]) -> f64 {
        let dpsi = self.cutoff.frame_gradient(self.kernels, u);
        if dpsi == [0.0; 3] {
            return 0.0;
        }
        let k1 = self.kernels.k1(u);
        let mut s = 0.0;
        for (c, row) in self.kernels.dc_last.iter().enumerate() {
            for j in 0..3 {
                s -= row[j] * dpsi[j] * k1[c];
            }
        }
        s
    }
}

impl Kernel for SplitKernel<'_> {
    fn components(&self) -> usize {
        3
    }
    fn eval(&self, u: [f64; 3], out: &mut [f64]) {
        let psi = self.cutoff.value(u);
        if psi > 0.0 {
            let k1 = self.kernels.k1(u);
            out[0] = psi * k1[0];
            out[1] = psi * k1[1];
        } else {
            out[0] = 0.0;
            out[1] = 0.0;
        }
        out[2] = self.smooth_part(u);
    }
    fn radial_support(&self) -> (f64, Option<f64>) {
        (0.0, Some(self.cutoff.radius))
    }
    fn radial_breaks(&self) -> Vec<f64> {
        vec![self.cutoff.inner]
    }
    fn singular_at_origin(&self) -> bool {
        true
    }
}

/// ψ_R k₁ alone.
pub struct NearKernel<'a>(pub SplitKernel<'a>);

impl Kernel for NearKernel<'_> {
    fn components(&self) -> usize {
        2
    }
    fn eval(&self, u: [f64; 3], out: &mut [f64]) {
        let psi = self.0.cutoff.value(u);
        let k1 = self.0.kernels.k1(u);
        out[0] = psi * k1[0];
        out[1] = psi * k1[1];
    }
    fn radial_support(&self) -> (f64, Option<f64>) {
        (0.0, Some(self.0.cutoff.radius))
    }
    fn radial_breaks(&self) -> Vec<f64> {
        vec![self.0.cutoff.inner]
    }
    fn singular_at_origin(&self) -> bool {
        true
    }
}

/// (1 − ψ_R) k₁.
pub struct FarKernel<'a>(pub SplitKernel<'a>);

impl Kernel for FarKernel<'_> {
    fn components(&self) -> usize {
        2
    }
    fn eval(&self, u: [f64; 3], out: &mut [f64]) {
        let psi = self.0.cutoff.value(u);
        let k1 = self.0.kernels.k1(u);
        out[0] = (1.0 - psi) * k1[0];
        out[1] = (1.0 - psi) * k1[1];
    }
    fn radial_support(&self) -> (f64, Option<f64>) {
        (self.0.cutoff.inner, None)
    }
    fn radial_breaks(&self) -> Vec<f64> {
        vec![self.0.cutoff.radius]
    }
}

/// The part ψ_R K (`near`) or (1 − ψ_R) K of a kernel.
pub struct Truncated<'a> {
    pub kernel: &'a dyn Kernel,
    pub cutoff: RadialCutoff,
    pub near: bool,
}

impl Kernel for Truncated<'_> {
    fn components(&self) -> usize {
        self.kernel.components()
    }
    fn eval(&self, u: [f64; 3], out: &mut [f64]) {
        let psi = self.cutoff.value(u);
        let w = if self.near { psi } else { 1.0 - psi };
        if w == 0.0 {
            out.iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        self.kernel.eval(u, out);
        out.iter_mut().for_each(|v| *v *= w);
    }
    fn radial_support(&self) -> (f64, Option<f64>) {
        let (a, b) = self.kernel.radial_support();
        if self.near {
            (a, Some(b.map_or(self.cutoff.radius, |b| b.min(self.cutoff.radius))))
        } else {
            (a.max(self.cutoff.inner), b)
        }
    }
    fn radial_breaks(&self) -> Vec<f64> {
        let mut b = self.kernel.radial_breaks();
        b.push(if self.near { self.cutoff.inner } else { self.cutoff.radius });
        b.sort_by(f64::total_cmp);
        b
    }
    fn singular_at_origin(&self) -> bool {
        self.near && self.kernel.singular_at_origin()
    }
}

/// Smooth compactly supported kernel `(1 − N⁴/r⁴)³₊`, scaled to unit mass.
pub struct GaugeBump {
    pub radius: f64,
}

impl GaugeBump {
    /// ∫ (1 − N⁴/r⁴)³ du = (π² r⁴ / 2) ∫_0^1 s³ (1 − s⁴)³ ds = π² r⁴ / 32.
    fn mass(&self) -> f64 {
        PI * PI * self.radius.powi(4) / 32.0
    }
}

impl Kernel for GaugeBump {
    fn components(&self) -> usize {
        1
    }
    fn eval(&self, u: [f64; 3], out: &mut [f64]) {
        let v = gauge(u).powi(4) / self.radius.powi(4);
        out[0] = if v < 1.0 { (1.0 - v).powi(3) / self.mass() } else { 0.0 };
    }
    fn radial_support(&self) -> (f64, Option<f64>) {
        (0.0, Some(self.radius))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::StratifiedLieAlgebra;

    fn kernels() -> HeisenbergKernels {
        HeisenbergKernels::new(&RuminComplex::build(&StratifiedLieAlgebra::heisenberg(1)).unwrap()).unwrap()
    }

    #[test]
    fn polar_map_has_gauge_r() {
        for (r, b, p) in [(0.3, 0.2, 1.0), (2.0, -1.2, 4.0), (1.0, 1.5, 0.1)] {
            assert!((gauge(polar_point(r, b, p)) - r).abs() < 1e-12);
        }
    }

    #[test]
    fn k1_is_rotated_horizontal_gradient() {
        let k = kernels();
        let u = [0.3, -0.2, 0.1];
        let g = k.frame_gradient(u);
        let k1 = k.k1(u);
        assert!((k1[0] - g[1]).abs() < 1e-14 && (k1[1] + g[0]).abs() < 1e-14);
    }

    #[test]
    fn gamma_is_harmonic_away_from_origin() {
        // Second differences of the closed form, independent of the frame code.
        let k = kernels();
        let h = 1e-3;
        for u in [[0.4, 0.1, 0.2], [-0.3, 0.5, -0.1], [0.2, 0.2, 0.6]] {
            let f = |p: [f64; 3]| k.gamma(p);
            let x1 = |g: &dyn Fn([f64; 3]) -> f64, p: [f64; 3]| {
                (g([p[0] + h, p[1], p[2] - p[1] * h / 2.0]) - g([p[0] - h, p[1], p[2] + p[1] * h / 2.0])) / (2.0 * h)
            };
            let x2 = |g: &dyn Fn([f64; 3]) -> f64, p: [f64; 3]| {
                (g([p[0], p[1] + h, p[2] + p[0] * h / 2.0]) - g([p[0], p[1] - h, p[2] - p[0] * h / 2.0])) / (2.0 * h)
            };
            // Exponential-coordinate flows of X1, X2 are straight lines, so the
            // symmetric difference quotients above are exact to O(h²).
            let l = x1(&|p| x1(&f, p), u) + x2(&|p| x2(&f, p), u);
            assert!(l.abs() < 1e-4 * k.gamma(u), "L0 Γ = {l}");
        }
    }

    #[test]
    fn cutoff_profile() {
        let c = RadialCutoff::new(0.5, 0.5);
        assert_eq!(c.value([0.1, 0.0, 0.0]), 1.0);
        assert_eq!(c.value([0.6, 0.0, 0.0]), 0.0);
        let mid = c.value([0.4, 0.0, 0.0]);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn rejects_other_groups() {
        let cx = RuminComplex::build(&StratifiedLieAlgebra::abelian(3)).unwrap();
        assert!(matches!(HeisenbergKernels::new(&cx), Err(NumericsError::UnsupportedGroup(_))));
    }
}
