//! Primitives of zero-average volume forms on the first Heisenberg group:
//! φ = J S ω + K_{1,R} ω with d_c φ = ω on B, and the horizontal field F with
//! div_G F = f.

use super::convolve::{box_gauge, group_convolve, group_convolve_many, ConvolutionMethod, PolarRule};
use super::fd::{instantiate, FdOrder, GridFrame};
use super::grid::{FormFrame, Grid, GridForm, IndexBox};
use super::homotopy::{homotopy_split, ConeRule, Cylinder, RuminHomotopy, ThetaBump};
use super::kernel::{FarKernel, FundamentalSolution, HeisenbergKernels, NearKernel, RadialCutoff, SplitKernel, GAMMA_CONSTANT};
use super::norms::{integral, lp_norm, weak_mr_norm, Region};
use super::samples::{zero_average_family, CylinderBump, Profile};
use super::{NumericsError, Result};
use crate::algebra::StratifiedLieAlgebra;
use crate::group::{CarnotGroup, HomogeneousNormConfig};
use crate::linalg::RatMatrix;
use crate::opcalc::FormOperator;
use crate::rumin::RuminComplex;
use crate::scalar::{parse_rat, rat_to_f64};
use serde::{Deserialize, Serialize};

/// An exponent given as a number or as a string such as `"4/3"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Number(f64),
    Text(String),
}

impl Exponent {
    pub fn value(&self) -> Result<f64> {
        match self {
            Exponent::Number(x) => Ok(*x),
            Exponent::Text(s) => parse_rat(s)
                .map(|r| rat_to_f64(&r))
                .ok_or_else(|| NumericsError::InvalidExponent(format!("cannot parse exponent {s:?}"))),
        }
    }
}

impl From<f64> for Exponent {
    fn from(x: f64) -> Self {
        Exponent::Number(x)
    }
}

const EXPONENT_TOL: f64 = 1e-12;

/// Accepts (p, q) with 1 ≤ p < Q and 1 ≤ q ≤ pQ/(Q − p) for p > 1,
/// 1 ≤ q < Q/(Q − 1) for p = 1.
pub fn check_exponents(p: f64, q: f64, hom_dim: f64) -> Result<()> {
    if !(p.is_finite() && q.is_finite()) {
        return Err(NumericsError::InvalidExponent(format!("p = {p}, q = {q} must be finite")));
    }
    if p < 1.0 - EXPONENT_TOL || p >= hom_dim - EXPONENT_TOL {
        return Err(NumericsError::InvalidExponent(format!("p = {p} must satisfy 1 ≤ p < {hom_dim}")));
    }
    if q < 1.0 - EXPONENT_TOL {
        return Err(NumericsError::InvalidExponent(format!("q = {q} must be at least 1")));
    }
    if (p - 1.0).abs() <= EXPONENT_TOL {
        let bound = hom_dim / (hom_dim - 1.0);
        if q >= bound - EXPONENT_TOL {
            return Err(NumericsError::InvalidExponent(format!("for p = 1, q = {q} must be below {bound}")));
        }
    } else {
        let bound = p * hom_dim / (hom_dim - p);
        if q > bound + EXPONENT_TOL {
            return Err(NumericsError::InvalidExponent(format!("for p = {p}, q = {q} must not exceed {bound}")));
        }
    }
    Ok(())
}

/// How the constant of the fundamental solution is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelConstant {
    /// Least squares fit of (Δ_{G,0} u) ∗ Γ ≈ u over the calibration bumps.
    #[default]
    Calibrated,
    /// The closed form 1/(2π).
    ClosedForm,
    Fixed(f64),
}

fn default_support() -> f64 {
    1.0
}
fn default_inner() -> f64 {
    0.5
}
fn default_margin() -> usize {
    4
}
fn default_samples() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: Exponent,
    pub q: Exponent,
    /// Radius of B′ = B(e, λ).
    pub lambda: f64,
    /// Radius of B, the support of the inputs.
    #[serde(default = "default_support")]
    pub support: f64,
    /// Truncation radius R of ψ_R.
    pub cutoff_radius: f64,
    /// ψ_R ≡ 1 on gauge radii below `cutoff_inner · R`.
    #[serde(default = "default_inner")]
    pub cutoff_inner: f64,
    /// Nodes per axis.
    pub grid: usize,
    #[serde(default = "default_margin")]
    pub margin: usize,
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Averaging bump of the Euclidean homotopy; defaults to the cylinder of B.
    #[serde(default)]
    pub theta: Option<ThetaBump>,
    #[serde(default)]
    pub polar: PolarRule,
    #[serde(default)]
    pub cone: ConeRule,
    #[serde(default)]
    pub kernel_constant: KernelConstant,
    #[serde(default)]
    pub calibration: CalibrationSettings,
    #[serde(default)]
    pub fd_order: FdOrder,
    /// Weights of the layered norm defining B and B′.
    #[serde(default)]
    pub norm_epsilons: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn new(p: f64, q: f64, lambda: f64, cutoff_radius: f64, grid: usize, seed: u64, samples: usize) -> Self {
        ExperimentConfig {
            p: p.into(),
            q: q.into(),
            lambda,
            support: 1.0,
            cutoff_radius,
            cutoff_inner: default_inner(),
            grid,
            margin: default_margin(),
            seed,
            samples,
            theta: None,
            polar: PolarRule::default(),
            cone: ConeRule::default(),
            kernel_constant: KernelConstant::default(),
            calibration: CalibrationSettings::default(),
            fd_order: FdOrder::default(),
            norm_epsilons: None,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| NumericsError::InvalidConfig(e.to_string()))
    }

    pub fn exponents(&self) -> Result<(f64, f64)> {
        Ok((self.p.value()?, self.q.value()?))
    }

    /// Exponent admissibility, geometry and resolution checks.
    pub fn validate(&self, hom_dim: f64) -> Result<()> {
        let (p, q) = self.exponents()?;
        check_exponents(p, q, hom_dim)?;
        if !(self.support > 0.0 && self.lambda > self.support) {
            return Err(NumericsError::InvalidConfig(format!("need 0 < support < λ, got {} and {}", self.support, self.lambda)));
        }
        // The distance from B(e, s) to the boundary of B(e, λ) is at least λ − s.
        if !(self.cutoff_radius > 0.0 && self.cutoff_radius < self.lambda - self.support) {
            return Err(NumericsError::InvalidConfig(format!(
                "truncation radius {} must lie in (0, λ − support) = (0, {})",
                self.cutoff_radius,
                self.lambda - self.support
            )));
        }
        if !(self.cutoff_inner > 0.0 && self.cutoff_inner < 1.0) {
            return Err(NumericsError::InvalidConfig("cutoff_inner must lie in (0, 1)".into()));
        }
        if self.grid < 2 * self.margin + 8 {
            return Err(NumericsError::InvalidConfig(format!("{} nodes cannot hold a margin of {}", self.grid, self.margin)));
        }
        Ok(())
    }
}

/// Grid and quadrature used to fit the constant of Γ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSettings {
    /// Nodes per axis of the grid adapted to the bumps.
    pub grid: usize,
    /// Gauge radius of the largest bump; Γ is homogeneous, so this only sets units.
    pub scale: f64,
    pub margin: usize,
    pub rule: PolarRule,
    /// Near/far split radius of the hybrid convolution, relative to `scale`.
    pub split: f64,
    pub stride: usize,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        CalibrationSettings {
            grid: 32,
            scale: 0.5,
            margin: 4,
            rule: PolarRule { azimuth: 24, ..PolarRule::default() },
            split: 0.6,
            stride: 2,
        }
    }
}

impl CalibrationSettings {
    pub fn with_grid(grid: usize) -> Self {
        CalibrationSettings { grid, ..Self::default() }
    }
}

/// Result of fitting the constant of Γ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub grid: usize,
    pub constant: f64,
    pub closed_form: f64,
    /// max |(Δu) ∗ Γ − u| / max |u| over interior nodes, per bump, with the fitted constant.
    pub relative_errors: Vec<f64>,
}

impl Calibration {
    pub fn max_error(&self) -> f64 {
        self.relative_errors.iter().fold(0.0, |m: f64, e| m.max(*e))
    }
}

/// Five Korányi bumps of gauge radius at most `scale`.
pub fn calibration_bumps(scale: f64) -> Vec<CylinderBump> {
    let b = |c: [f64; 3], r: f64, a: f64| CylinderBump {
        center: [c[0] * scale, c[1] * scale, c[2] * scale * scale],
        radius: r * scale,
        amplitude: a,
        profile: Profile::Gauge,
    };
    vec![
        b([0.0; 3], 1.0, 1.0),
        b([0.0; 3], 0.7, -0.5),
        b([0.2, -0.1, 0.0], 0.75, 1.0),
        b([-0.15, 0.1, 0.05], 0.8, 2.0),
        b([0.1, 0.2, -0.05], 0.6, 1.0),
    ]
}

/// Coordinate half-widths of a box holding every bump.
fn bump_extents(bumps: &[CylinderBump]) -> [f64; 3] {
    let mut e = [0.0f64; 3];
    for b in bumps {
        let cz = b.center[0].hypot(b.center[1]);
        e[0] = e[0].max(b.center[0].abs() + b.radius);
        e[1] = e[1].max(b.center[1].abs() + b.radius);
        // t-coordinate of c·u is c_t + u_t + (c_x u_y − c_y u_x)/2.
        e[2] = e[2].max(b.center[2].abs() + b.radius * b.radius / 4.0 + cz * b.radius / 2.0);
    }
    e
}

/// Fits c in (Δ_{G,0} u) ∗ (c N⁻²) ≈ u by least squares over the interior
/// nodes of a grid adapted to the bumps, then reports the per-bump error.
pub fn calibrate_kernel_constant(cx: &RuminComplex, bumps: &[CylinderBump], settings: &CalibrationSettings) -> Result<Calibration> {
    if settings.grid < 2 * settings.margin + 8 {
        return Err(NumericsError::InvalidConfig(format!("{} calibration nodes cannot hold a margin of {}", settings.grid, settings.margin)));
    }
    let group = CarnotGroup::new(cx.algebra().clone());
    let grid = Grid::symmetric([settings.grid; 3], bump_extents(bumps), settings.margin);
    let frame = GridFrame::new(&grid, &group.frame(), FdOrder::Fourth)?;
    let unit = HeisenbergKernels::new(cx)?.with_constant(1.0);
    let lap = cx.laplacian_functions()?;
    let method = ConvolutionMethod::Hybrid { rule: settings.rule.clone(), split: settings.split * settings.scale, stride: settings.stride };
    let us: Vec<Vec<f64>> = bumps.iter().map(|b| b.sample(&group, &grid)).collect();
    let lus: Vec<Vec<f64>> = us.iter().map(|u| frame.apply_op(&lap, u)).collect::<Result<_>>()?;
    // Nodes where the fourth-order stencils are centred.
    let interior = IndexBox { lo: [2; 3], hi: grid.n.map(|n| n - 2) };
    let refs: Vec<&[f64]> = lus.iter().map(|v| v.as_slice()).collect();
    let vs = group_convolve_many(&group, &grid, &refs, &FundamentalSolution(&unit), &method, Some(interior))?;
    let idx: Vec<usize> = (interior.lo[0]..interior.hi[0])
        .flat_map(|i| (interior.lo[1]..interior.hi[1]).flat_map(move |j| (interior.lo[2]..interior.hi[2]).map(move |k| [i, j, k])))
        .map(|[i, j, k]| grid.idx(i, j, k))
        .collect();
    let (mut num, mut den) = (0.0, 0.0);
    for (u, v) in us.iter().zip(&vs) {
        for &x in &idx {
            num += u[x] * v[0][x];
            den += v[0][x] * v[0][x];
        }
    }
    if den == 0.0 {
        return Err(NumericsError::InvalidConfig("calibration produced a zero field".into()));
    }
    let c = num / den;
    let relative_errors = us
        .iter()
        .zip(&vs)
        .map(|(u, v)| {
            let m = idx.iter().fold(0.0f64, |m, &x| m.max(u[x].abs()));
            idx.iter().fold(0.0f64, |e, &x| e.max((u[x] - c * v[0][x]).abs())) / m
        })
        .collect();
    Ok(Calibration { grid: settings.grid, constant: c, closed_form: GAMMA_CONSTANT, relative_errors })
}

/// Per-sample measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub index: usize,
    /// ∫f before the zero-average projection, relative to ‖f‖₁.
    pub initial_average: f64,
    pub f_lp: f64,
    pub f_l1: f64,
    pub big_f_lq: f64,
    /// ‖F‖_{L^q(B′)} / ‖f‖_{L^p(B)}.
    pub ratio: f64,
    /// ‖div_G F − f‖_{L^p(B)} / ‖f‖_{L^p(B)}.
    pub divergence_residual: f64,
    /// ‖ω − d_c K_{1,R} ω − S ω‖₁ / ‖ω‖₁.
    pub homotopy_residual: f64,
    /// |∫ S ω| / ‖ω‖₁.
    pub smooth_average: f64,
    /// ‖d_c J S ω − S ω‖₂ / ‖S ω‖₂.
    pub homotopy_j_residual: f64,
    /// ‖K_{1,R} ω‖_{M^{Q/(Q−1)}} / ‖ω‖₁.
    pub weak_ratio: f64,
    /// Largest norm ‖p‖ over nodes where F is nonzero.
    pub support_extent: f64,
    pub support_ok: bool,
}

/// Fields produced for one input.
pub struct Primitive {
    pub phi: GridForm,
    pub field: [Vec<f64>; 2],
    pub report: SampleReport,
}

/// Everything that depends on the configuration but not on the input.
pub struct PrimitiveSolver {
    pub config: ExperimentConfig,
    pub grid: Grid,
    cx: RuminComplex,
    group: CarnotGroup,
    frame: GridFrame,
    kernels: HeisenbergKernels,
    cutoff: RadialCutoff,
    norm: HomogeneousNormConfig,
    ball: Region,
    outer: Region,
    /// B(e, support + R), which holds the supports of K_{1,R}ω and Sω.
    reach: Region,
    theta: ThetaBump,
    outer_cylinder: Cylinder,
    /// F^♮ = σ (∗|_{E₀¹})⁻¹ φ makes d_c φ = div_G F.
    sharp: [[f64; 2]; 2],
    pub calibration: Option<Calibration>,
    pub dc_star_sign: i32,
}

impl PrimitiveSolver {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let alg = StratifiedLieAlgebra::heisenberg(1);
        config.validate(alg.homogeneous_dimension() as f64)?;
        let cx = RuminComplex::build(&alg)?;
        let group = CarnotGroup::new(alg.clone());
        let norm = match &config.norm_epsilons {
            Some(e) => HomogeneousNormConfig { algebra: alg.name().into(), epsilons: e.clone(), samples: 0, seed: 0 },
            None => HomogeneousNormConfig::unit(&alg),
        };
        let ext = norm.ball_extents(&alg, config.lambda);
        let grid = Grid::symmetric([config.grid; 3], [ext[0], ext[1], ext[2]], config.margin);
        let frame = GridFrame::new(&grid, &group.frame(), config.fd_order)?;
        let mut kernels = HeisenbergKernels::new(&cx)?;
        let calibration = match config.kernel_constant {
            KernelConstant::Calibrated => {
                let cal = calibrate_kernel_constant(&cx, &calibration_bumps(config.calibration.scale), &config.calibration)?;
                kernels = kernels.with_constant(cal.constant);
                Some(cal)
            }
            KernelConstant::ClosedForm => None,
            KernelConstant::Fixed(c) => {
                kernels = kernels.with_constant(c);
                None
            }
        };
        let cutoff = RadialCutoff::new(config.cutoff_radius, config.cutoff_inner);
        let ball = Region::ball(&grid, &alg, &norm, config.support);
        let outer = Region::ball(&grid, &alg, &norm, config.lambda);
        let reach = Region::ball(&grid, &alg, &norm, (config.support + config.cutoff_radius) * (1.0 + 1e-12));
        let outer_cylinder = Cylinder::norm_ball(&norm, config.lambda);
        let inner = Cylinder::norm_ball(&norm, config.support);
        let theta = config.theta.unwrap_or(ThetaBump { radius: inner.radius, half_height: inner.half_height });
        let (sharp, sign) = sharp_map(&cx)?;
        Ok(PrimitiveSolver {
            config,
            grid,
            cx,
            group,
            frame,
            kernels,
            cutoff,
            norm,
            ball,
            outer,
            reach,
            theta,
            outer_cylinder,
            sharp,
            calibration,
            dc_star_sign: sign,
        })
    }

    pub fn complex(&self) -> &RuminComplex {
        &self.cx
    }

    pub fn group(&self) -> &CarnotGroup {
        &self.group
    }

    pub fn frame(&self) -> &GridFrame {
        &self.frame
    }

    pub fn kernels(&self) -> &HeisenbergKernels {
        &self.kernels
    }

    pub fn cutoff(&self) -> RadialCutoff {
        self.cutoff
    }

    pub fn ball(&self) -> &Region {
        &self.ball
    }

    pub fn norm_config(&self) -> &HomogeneousNormConfig {
        &self.norm
    }

    fn method(&self) -> ConvolutionMethod {
        ConvolutionMethod::Polar(self.config.polar.clone())
    }

    /// Zero-average projection f ← f − (∫f/|B|) 1_B, allowed when |∫f| ≤ 10⁻⁶ ‖f‖₁.
    pub fn project_average(&self, f: &[f64]) -> Result<(Vec<f64>, f64)> {
        let l1 = lp_norm(&self.grid, f, 1.0, &Region::All);
        let total = integral(&self.grid, f, &Region::All);
        if l1 == 0.0 {
            return Ok((f.to_vec(), 0.0));
        }
        if total.abs() > 1e-6 * l1 {
            return Err(NumericsError::NonZeroAverage { integral: total, l1 });
        }
        let Region::Mask(mask) = &self.ball else { unreachable!() };
        let vol = self.ball.count(&self.grid) as f64 * self.grid.cell_volume();
        let shift = total / vol;
        let g = f.iter().zip(mask).map(|(v, &m)| if m { v - shift } else { *v }).collect();
        Ok((g, total / l1))
    }

    /// d_c on E₀^{n−1} forms, as a field.
    pub fn dc_last(&self, phi: &GridForm) -> Result<Vec<f64>> {
        let dc = self.cx.dc(2)?;
        Ok(instantiate(&self.cx, &self.frame, dc, 3, FormFrame::E0).apply(phi)?.components.remove(0))
    }

    /// div_G F = X₁F₁ + X₂F₂.
    pub fn horizontal_divergence(&self, f: &[Vec<f64>]) -> Result<Vec<f64>> {
        horizontal_divergence(&self.frame, f)
    }

    /// φ, F and the measurements for one input.
    pub fn solve(&self, f: &[f64], index: usize) -> Result<Primitive> {
        let grid = &self.grid;
        if f.len() != grid.len() {
            return Err(NumericsError::ShapeMismatch(format!("input has {} values, grid {}", f.len(), grid.len())));
        }
        let Region::Mask(inside) = &self.ball else { unreachable!() };
        if f.iter().zip(inside).any(|(v, &m)| *v != 0.0 && !m) {
            return Err(NumericsError::Support(format!("input is not supported in B(e, {})", self.config.support)));
        }
        let (p, q) = self.config.exponents()?;
        let (omega, initial_average) = self.project_average(f)?;
        let l1 = lp_norm(grid, &omega, 1.0, &Region::All);

        let split = homotopy_split(&self.cx, grid, &omega, &self.kernels, self.cutoff, &self.method())?;
        // Both convolutions vanish outside B(e, support + R); interpolation leaves
        // traces a few nodes further out, which are cleared here.
        let Region::Mask(reach) = &self.reach else { unreachable!() };
        let crop = |v: Vec<f64>| -> Vec<f64> { v.into_iter().zip(reach).map(|(x, &m)| if m { x } else { 0.0 }).collect() };
        let mut near = split.near;
        near.components = near.components.into_iter().map(crop).collect();
        let s = crop(split.smooth);
        let dc_near = self.dc_last(&near)?;
        let hom: Vec<f64> = (0..grid.len()).map(|x| omega[x] - dc_near[x] - s[x]).collect();
        let homotopy_residual = if l1 > 0.0 { lp_norm(grid, &hom, 1.0, &Region::All) / l1 } else { 0.0 };
        let smooth_average = if l1 > 0.0 { integral(grid, &s, &Region::All).abs() / l1 } else { 0.0 };

        let j = RuminHomotopy::new(&self.cx, &self.frame)?;
        let js = j.apply(&s, &self.outer_cylinder, &self.theta, &self.config.cone)?;
        let dc_js = self.dc_last(&js)?;
        let s2 = lp_norm(grid, &s, 2.0, &Region::All);
        let jr: Vec<f64> = dc_js.iter().zip(&s).map(|(a, b)| a - b).collect();
        let homotopy_j_residual = if s2 > 0.0 { lp_norm(grid, &jr, 2.0, &Region::All) / s2 } else { 0.0 };

        let comps: Vec<Vec<f64>> = (0..2).map(|c| (0..grid.len()).map(|x| js.components[c][x] + near.components[c][x]).collect()).collect();
        let phi = GridForm::new(2, FormFrame::E0, near.metric.clone(), comps);
        let field: [Vec<f64>; 2] = [0, 1].map(|a| (0..grid.len()).map(|x| self.sharp[a][0] * phi.components[0][x] + self.sharp[a][1] * phi.components[1][x]).collect());

        let div = self.horizontal_divergence(&field)?;
        let dres: Vec<f64> = div.iter().zip(&omega).map(|(a, b)| a - b).collect();
        let f_lp = lp_norm(grid, &omega, p, &self.ball);
        let divergence_residual = if f_lp > 0.0 { lp_norm(grid, &dres, p, &self.ball) / f_lp } else { 0.0 };
        let mag: Vec<f64> = (0..grid.len()).map(|x| field[0][x].hypot(field[1][x])).collect();
        let big_f_lq = lp_norm(grid, &mag, q, &self.outer);
        let ratio = if f_lp > 0.0 { big_f_lq / f_lp } else { 0.0 };

        let alg = self.cx.algebra();
        let hom_dim = alg.homogeneous_dimension() as f64;
        let weak = weak_mr_norm(grid, &near.magnitude(), hom_dim / (hom_dim - 1.0), &Region::All);
        let weak_ratio = if l1 > 0.0 { weak / l1 } else { 0.0 };

        let (support_extent, support_ok) = self.support_check(&mag);
        Ok(Primitive {
            phi,
            field,
            report: SampleReport {
                index,
                initial_average,
                f_lp,
                f_l1: l1,
                big_f_lq,
                ratio,
                divergence_residual,
                homotopy_residual,
                smooth_average,
                homotopy_j_residual,
                weak_ratio,
                support_extent,
                support_ok,
            },
        })
    }

    /// The cylinder of B′ grown by one stencil width.
    fn stencil_cylinder(&self) -> Cylinder {
        let w = self.config.fd_order.half_width() as f64;
        let h = &self.grid.h;
        Cylinder { radius: self.outer_cylinder.radius + w * h[0].max(h[1]), half_height: self.outer_cylinder.half_height + w * h[2] }
    }

    /// Whether every node carrying F lies within one stencil width of B′.
    fn support_check(&self, mag: &[f64]) -> (f64, bool) {
        let grid = &self.grid;
        let top = mag.iter().fold(0.0f64, |m, v| m.max(*v));
        let cyl = self.stencil_cylinder();
        let (slack_z, slack_t) = (0.0, 0.0);
        let alg = self.cx.algebra();
        let mut extent: f64 = 0.0;
        let mut ok = true;
        for i in 0..grid.n[0] {
            for j in 0..grid.n[1] {
                for k in 0..grid.n[2] {
                    if mag[grid.idx(i, j, k)] <= 1e-12 * top {
                        continue;
                    }
                    let pt = grid.point(i, j, k);
                    extent = extent.max(self.norm.norm(alg, &pt));
                    let r = (pt[0] * pt[0] + pt[1] * pt[1]).sqrt();
                    if r > cyl.radius + slack_z || pt[2].abs() > cyl.half_height + slack_t {
                        ok = false;
                    }
                }
            }
        }
        (extent, ok)
    }

    /// ‖f ∗ ψ_R k₁‖_{L^q} / ‖f‖_{L^p(B)} and the same for (1 − ψ_R) k₁, with
    /// L^q taken over the whole grid.
    pub fn truncation_ratios(&self, f: &[f64]) -> Result<[f64; 2]> {
        let (p, q) = self.config.exponents()?;
        let (omega, _) = self.project_average(f)?;
        let f_lp = lp_norm(&self.grid, &omega, p, &self.ball);
        if f_lp == 0.0 {
            return Ok([0.0; 2]);
        }
        let split = SplitKernel { kernels: &self.kernels, cutoff: self.cutoff };
        let near = group_convolve(&self.group, &self.grid, &omega, &NearKernel(split), &self.method(), None)?;
        let split = SplitKernel { kernels: &self.kernels, cutoff: self.cutoff };
        // The far kernel is smooth at scale R; its tail is summed on every second node.
        let far_method = ConvolutionMethod::Hybrid { rule: self.config.polar.clone(), split: 2.0 * self.cutoff.radius, stride: 2 };
        let far = group_convolve(&self.group, &self.grid, &omega, &FarKernel(split), &far_method, None)?;
        let ratio = |c: &[Vec<f64>]| {
            let mag: Vec<f64> = (0..self.grid.len()).map(|x| c[0][x].hypot(c[1][x])).collect();
            lp_norm(&self.grid, &mag, q, &Region::All) / f_lp
        };
        Ok([ratio(&near), ratio(&far)])
    }

    /// Runs the seeded zero-average family of the configuration.
    pub fn run(&self) -> Result<ExperimentReport> {
        let family = zero_average_family(&self.group, &self.grid, self.config.support, self.config.seed, self.config.samples)?;
        let mut samples = Vec::new();
        for (i, f) in family.iter().enumerate() {
            samples.push(self.solve(f, i)?.report);
        }
        Ok(ExperimentReport::new(self, samples))
    }
}

/// div_G F = Σ_j X_j F_j over the horizontal frame.
pub fn horizontal_divergence(frame: &GridFrame, f: &[Vec<f64>]) -> Result<Vec<f64>> {
    if f.len() != 2 {
        return Err(NumericsError::ShapeMismatch(format!("expected 2 horizontal components, got {}", f.len())));
    }
    let mut out = frame.grid().zeros();
    for (j, c) in f.iter().enumerate() {
        let d = frame.apply_field(j, c)?;
        out.iter_mut().zip(&d).for_each(|(o, v)| *o += v);
    }
    Ok(out)
}

/// Reads the sign σ with d_c ∗ F^♮ = σ div_G F and returns σ (∗|_{E₀¹})⁻¹.
fn sharp_map(cx: &RuminComplex) -> Result<([[f64; 2]; 2], i32)> {
    let star = cx.star_e0(1)?;
    let both = FormOperator::compose(cx.pbw(), cx.dc(2)?, &star)?;
    let mut sign = 0i32;
    for j in 0..2 {
        let e = both.entry(0, j);
        let c = e.linear_coeff(j);
        let s = if c == num::One::one() {
            1
        } else if c == -num::BigRational::from_integer(1.into()) {
            -1
        } else {
            0
        };
        let mut rest = e.clone();
        let mut m = vec![0u16; e.nvars()];
        m[j] = 1;
        rest.add_term(m, -c.clone());
        if s == 0 || !rest.is_zero() || (sign != 0 && s != sign) {
            return Err(NumericsError::UnsupportedGroup("d_c ∗ on horizontal forms is not ± the divergence".into()));
        }
        sign = s;
    }
    let m: RatMatrix = star.to_matrix()?;
    let inv = m.inverse().ok_or_else(|| NumericsError::UnsupportedGroup("Hodge star on E₀¹ is singular".into()))?;
    let mut out = [[0.0; 2]; 2];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            *v = sign as f64 * rat_to_f64(inv.get(a, b));
        }
    }
    Ok((out, sign))
}

/// Summary of a run over a sample family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub grid: Grid,
    pub kernel_constant: f64,
    pub calibration: Option<Calibration>,
    /// σ in d_c ∗ F^♮ = σ div_G F.
    pub star_sign: i32,
    /// Largest ‖F‖_{L^q(B′)} / ‖f‖_{L^p(B)} over the family.
    pub empirical_constant: f64,
    pub max_divergence_residual: f64,
    pub max_homotopy_residual: f64,
    pub all_supports_ok: bool,
    pub samples: Vec<SampleReport>,
}

impl ExperimentReport {
    pub fn new(solver: &PrimitiveSolver, samples: Vec<SampleReport>) -> Self {
        let max = |f: fn(&SampleReport) -> f64| samples.iter().map(f).fold(0.0f64, f64::max);
        ExperimentReport {
            config: solver.config.clone(),
            grid: solver.grid.clone(),
            kernel_constant: solver.kernels.constant(),
            calibration: solver.calibration.clone(),
            star_sign: solver.dc_star_sign,
            empirical_constant: max(|s| s.ratio),
            max_divergence_residual: max(|s| s.divergence_residual),
            max_homotopy_residual: max(|s| s.homotopy_residual),
            all_supports_ok: samples.iter().all(|s| s.support_ok),
            samples,
        }
    }

    /// One CSV line per sample.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "index,initial_average,f_lp,f_l1,big_f_lq,ratio,divergence_residual,homotopy_residual,smooth_average,homotopy_j_residual,weak_ratio,support_extent,support_ok\n",
        );
        for r in &self.samples {
            s.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}\n",
                r.index,
                r.initial_average,
                r.f_lp,
                r.f_l1,
                r.big_f_lq,
                r.ratio,
                r.divergence_residual,
                r.homotopy_residual,
                r.smooth_average,
                r.homotopy_j_residual,
                r.weak_ratio,
                r.support_extent,
                r.support_ok
            ));
        }
        s
    }
}

/// Bound on the M^r norm of ψ_R k₁ through the homogeneous k₁:
/// ‖k₁‖_{M^r}^r ≤ r^{r+1}/(r − 1)^r · sup_t t^r |{|k₁| > t}|, and by homogeneity of
/// degree −3 the supremum equals (1/16) ∫_{S} |k₁(σ)|^{4/3} dβ dφ for r = 4/3.
pub fn k1_weak_bound(kernels: &HeisenbergKernels) -> f64 {
    let r: f64 = 4.0 / 3.0;
    let mut s = 0.0;
    for (beta, phi, w) in super::convolve::sphere_rule(24, 128) {
        let k = kernels.k1(super::kernel::polar_point(1.0, beta, phi));
        s += w * k[0].hypot(k[1]).powf(r);
    }
    let lorentz = s / 16.0;
    (r.powf(r + 1.0) / (r - 1.0).powf(r) * lorentz).powf(1.0 / r)
}

/// Whether the grid-level box gauge of `f` fits in `B(e, r)` for the Korányi gauge.
pub fn support_gauge(grid: &Grid, f: &[f64]) -> f64 {
    grid.support_box(f).map_or(0.0, |b| box_gauge(grid, &b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_admissibility() {
        let q = 4.0;
        assert!(check_exponents(2.0, 4.0, q).is_ok());
        assert!(check_exponents(2.0, 4.0 + 1e-9, q).is_err());
        assert!(check_exponents(1.0, 1.3, q).is_ok());
        assert!(check_exponents(1.0, 4.0 / 3.0, q).is_err());
        assert!(check_exponents(4.0, 2.0, q).is_err());
        assert!(check_exponents(0.5, 1.0, q).is_err());
        assert!(check_exponents(3.0, 12.0, q).is_ok());
        let e = Exponent::Text("4/3".into()).value().unwrap();
        assert!(check_exponents(1.0, e, q).is_err());
    }

    #[test]
    fn config_parses_fraction_strings() {
        let c = ExperimentConfig::from_json_str(r#"{"p": 1, "q": "6/5", "lambda": 2, "cutoff_radius": 0.5, "grid": 32, "seed": 3}"#).unwrap();
        assert_eq!(c.exponents().unwrap(), (1.0, 1.2));
        assert!(c.validate(4.0).is_ok());
        let mut bad = c.clone();
        bad.cutoff_radius = 1.0;
        assert!(bad.validate(4.0).is_err());
    }

    #[test]
    fn sharp_map_sign() {
        let cx = RuminComplex::build(&StratifiedLieAlgebra::heisenberg(1)).unwrap();
        let (m, s) = sharp_map(&cx).unwrap();
        assert_eq!(s, 1);
        // φ = (φ₁, φ₂) ↦ F = (φ₂, −φ₁).
        assert_eq!(m, [[0.0, 1.0], [-1.0, 0.0]]);
    }
}
