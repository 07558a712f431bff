//! Group law in exponential coordinates, dilations, the left-invariant frame,
//! and the calibrated homogeneous norm.

use crate::algebra::StratifiedLieAlgebra;
use crate::poly::Poly;
use crate::scalar::{Coeff, Rat};
use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dilation factor must be positive")]
    NonPositiveDilation,
    #[error("no admissible norm weight for layer {layer} on the search grid")]
    CalibrationFailure { layer: usize },
    #[error("norm configuration rejected: {0}")]
    InvalidNormConfig(String),
}

type Series = HashMap<Vec<u8>, Rat>;

fn series_mul(a: &Series, b: &Series, depth: usize) -> Series {
    let mut out = Series::new();
    for (wa, ca) in a {
        for (wb, cb) in b {
            if wa.len() + wb.len() > depth {
                continue;
            }
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            *out.entry(w).or_insert_with(Rat::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn series_exp_letter(letter: u8, depth: usize) -> Series {
    let mut s = Series::new();
    let mut fact = Rat::one();
    for k in 0..=depth {
        if k > 0 {
            fact *= Rat::from_integer(k.into());
        }
        s.insert(vec![letter; k], fact.recip());
    }
    s
}

/// Truncated Baker–Campbell–Hausdorff series `log(exp X exp Y)` as a
/// combination of left-normed brackets `[..[[w1,w2],w3],..,wN]` of the letters
/// X (0) and Y (1).
#[derive(Clone, Debug)]
pub struct BchSeries {
    depth: usize,
    terms: Vec<(Vec<u8>, Rat)>,
}

impl BchSeries {
    pub fn new(depth: usize) -> Self {
        let ex = series_exp_letter(0, depth);
        let ey = series_exp_letter(1, depth);
        let mut w = series_mul(&ex, &ey, depth);
        w.remove(&Vec::new());
        let mut log = Series::new();
        let mut power = w.clone();
        for m in 1..=depth {
            let c = Rat::new(if m % 2 == 1 { 1.into() } else { (-1).into() }, (m as i64).into());
            for (word, v) in &power {
                *log.entry(word.clone()).or_insert_with(Rat::zero) += v * &c;
            }
            power = series_mul(&power, &w, depth);
        }
        // Dynkin–Specht–Wever: a homogeneous Lie element P of degree N
        // satisfies Σ c_w [w] = N·P for P = Σ c_w w.
        let mut terms: Vec<(Vec<u8>, Rat)> = log
            .into_iter()
            .filter(|(w, c)| !c.is_zero() && (w.len() == 1 || w[0] != w[1]))
            .map(|(w, c)| {
                let n = Rat::from_integer((w.len() as i64).into());
                (w, c / n)
            })
            .collect();
        terms.sort_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)));
        BchSeries { depth, terms }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn terms(&self) -> &[(Vec<u8>, Rat)] {
        &self.terms
    }

    /// Sums the terms accepted by `keep` (called with the number of Y letters).
    fn eval_filtered<C: Coeff>(
        &self,
        alg: &StratifiedLieAlgebra,
        x: &[C],
        y: &[C],
        keep: impl Fn(usize) -> bool,
    ) -> Vec<C> {
        let n = alg.dim();
        let mut out = vec![C::zero(); n];
        for (w, c) in &self.terms {
            if !keep(w.iter().filter(|&&l| l == 1).count()) {
                continue;
            }
            let pick = |l: u8| if l == 0 { x } else { y };
            let mut acc = pick(w[0]).to_vec();
            for &l in &w[1..] {
                acc = alg.bracket_unchecked(&acc, pick(l));
                if acc.iter().all(Zero::is_zero) {
                    break;
                }
            }
            let cc = C::from_rat(c);
            for (o, a) in out.iter_mut().zip(acc) {
                if !a.is_zero() {
                    *o = o.clone() + cc.clone() * a;
                }
            }
        }
        out
    }
}

/// First-order differential operator `Σ_k a_k(x) ∂_k` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub coeffs: Vec<Poly>,
}

impl VectorField {
    pub fn apply(&self, f: &Poly) -> Poly {
        let n = self.coeffs.len();
        let mut out = Poly::zero_in(n);
        for (k, a) in self.coeffs.iter().enumerate() {
            if !a.is_zero() {
                out = out + a.clone() * f.derivative(k);
            }
        }
        out
    }

    pub fn commutator(&self, other: &VectorField) -> VectorField {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| self.apply(b) - other.apply(a)).collect();
        VectorField { coeffs }
    }

    pub fn scale(&self, c: &Rat) -> VectorField {
        VectorField { coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.coeffs.iter().map(|a| a.eval_f64(x)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct CarnotGroup {
    algebra: StratifiedLieAlgebra,
    bch: BchSeries,
}

impl CarnotGroup {
    pub fn new(algebra: StratifiedLieAlgebra) -> Self {
        let bch = BchSeries::new(algebra.step());
        CarnotGroup { algebra, bch }
    }

    pub fn algebra(&self) -> &StratifiedLieAlgebra {
        &self.algebra
    }

    pub fn bch(&self) -> &BchSeries {
        &self.bch
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    fn check_dim(&self, len: usize) -> Result<(), GroupError> {
        if len != self.dim() {
            return Err(GroupError::DimensionMismatch { expected: self.dim(), got: len });
        }
        Ok(())
    }

    pub fn product<C: Coeff>(&self, p: &[C], q: &[C]) -> Result<Vec<C>, GroupError> {
        self.check_dim(p.len())?;
        self.check_dim(q.len())?;
        Ok(self.product_unchecked(p, q))
    }

    pub(crate) fn product_unchecked<C: Coeff>(&self, p: &[C], q: &[C]) -> Vec<C> {
        self.bch.eval_filtered(&self.algebra, p, q, |_| true)
    }

    pub fn inverse<C: Coeff>(&self, p: &[C]) -> Vec<C> {
        p.iter().map(|x| -x.clone()).collect()
    }

    pub fn dilate<C: Coeff + PartialOrd>(&self, lambda: &C, p: &[C]) -> Result<Vec<C>, GroupError> {
        self.check_dim(p.len())?;
        if !(*lambda > C::zero()) {
            return Err(GroupError::NonPositiveDilation);
        }
        Ok(p.iter()
            .zip(self.algebra.degrees())
            .map(|(x, &d)| {
                let mut v = x.clone();
                for _ in 0..d {
                    v = v * lambda.clone();
                }
                v
            })
            .collect())
    }

    /// Components of `p·q` as polynomials in `(p_1..p_n, q_1..q_n)`.
    pub fn product_formula(&self) -> Vec<Poly> {
        let n = self.dim();
        let p: Vec<Poly> = (0..n).map(|k| Poly::var(2 * n, k)).collect();
        let q: Vec<Poly> = (0..n).map(|k| Poly::var(2 * n, n + k)).collect();
        self.product_unchecked(&p, &q)
    }

    /// Left-invariant fields `X_j f(x) = d/ds f(x·exp(s e_j))|_{s=0}`.
    pub fn frame(&self) -> Vec<VectorField> {
        let n = self.dim();
        let x: Vec<Poly> = (0..n).map(|k| Poly::var(n, k)).collect();
        (0..n)
            .map(|j| {
                let e: Vec<Poly> = (0..n)
                    .map(|k| if k == j { Poly::constant(n, Rat::one()) } else { Poly::zero_in(n) })
                    .collect();
                let coeffs = self.bch.eval_filtered(&self.algebra, &x, &e, |ny| ny == 1);
                VectorField { coeffs: coeffs.into_iter().map(|c| c + Poly::zero_in(n)).collect() }
            })
            .collect()
    }
}

/// Weights of `‖p‖ = max_j ε_j ‖p^{(j)}‖^{1/j}` (Euclidean norm on each layer).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HomogeneousNormConfig {
    pub algebra: String,
    pub epsilons: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

pub const NORM_SAMPLE_RADIUS: f64 = 10.0;
const EPS_STEP: f64 = 0.05;

impl HomogeneousNormConfig {
    /// Norm with every weight equal to one.
    pub fn unit(alg: &StratifiedLieAlgebra) -> Self {
        HomogeneousNormConfig { algebra: alg.name().into(), epsilons: vec![1.0; alg.step()], samples: 0, seed: 0 }
    }

    pub fn norm(&self, alg: &StratifiedLieAlgebra, p: &[f64]) -> f64 {
        self.truncated_norm(alg, p, alg.step())
    }

    fn truncated_norm(&self, alg: &StratifiedLieAlgebra, p: &[f64], layers: usize) -> f64 {
        (1..=layers)
            .map(|l| {
                let r = alg.layer_range(l);
                let e: f64 = p[r].iter().map(|x| x * x).sum::<f64>().sqrt();
                self.epsilons[l - 1] * e.powf(1.0 / l as f64)
            })
            .fold(0.0, f64::max)
    }

    /// Half-extent of the ball `B(e, r)` along each coordinate.
    pub fn ball_extents(&self, alg: &StratifiedLieAlgebra, r: f64) -> Vec<f64> {
        alg.degrees().iter().map(|&d| (r / self.epsilons[d - 1]).powi(d as i32)).collect()
    }

    /// Parses a stored configuration and re-runs the triangle-inequality check.
    pub fn load_verified(json: &str, group: &CarnotGroup, samples: usize) -> Result<Self, GroupError> {
        let cfg: HomogeneousNormConfig =
            serde_json::from_str(json).map_err(|e| GroupError::InvalidNormConfig(e.to_string()))?;
        if cfg.epsilons.len() != group.algebra().step() {
            return Err(GroupError::InvalidNormConfig("one weight per layer expected".into()));
        }
        if cfg.epsilons.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return Err(GroupError::InvalidNormConfig("weights must lie in (0, 1]".into()));
        }
        let bad = count_triangle_violations(group, &cfg, group.algebra().step(), samples, cfg.seed ^ 0x5eed);
        if bad > 0 {
            return Err(GroupError::InvalidNormConfig(format!("{bad} triangle-inequality violations")));
        }
        Ok(cfg)
    }
}

fn sample_point(rng: &mut ChaCha8Rng, alg: &StratifiedLieAlgebra, eps: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; alg.dim()];
    for l in 1..=alg.step() {
        let mode: f64 = rng.gen();
        let u = if mode < 0.2 {
            0.0
        } else if mode < 0.45 {
            1.0
        } else {
            rng.gen::<f64>()
        };
        let rad = (NORM_SAMPLE_RADIUS * u / eps[l - 1]).powi(l as i32);
        let r = alg.layer_range(l);
        let mut dir: Vec<f64> = r.clone().map(|_| rng.sample(StandardNormal)).collect();
        let len = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        dir.iter_mut().for_each(|x| *x *= rad / len);
        p[r].copy_from_slice(&dir);
    }
    p
}

/// Number of sampled pairs with `‖pq‖ > ‖p‖ + ‖q‖`, using the norm truncated
/// to the first `layers` layers.
pub fn count_triangle_violations(
    group: &CarnotGroup,
    cfg: &HomogeneousNormConfig,
    layers: usize,
    samples: usize,
    seed: u64,
) -> usize {
    let alg = group.algebra();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..samples {
        let p = sample_point(&mut rng, alg, &cfg.epsilons);
        let q = sample_point(&mut rng, alg, &cfg.epsilons);
        let pq = group.product_unchecked(&p, &q);
        let lhs = cfg.truncated_norm(alg, &pq, layers);
        let rhs = cfg.truncated_norm(alg, &p, layers) + cfg.truncated_norm(alg, &q, layers);
        if lhs > rhs * (1.0 + 1e-12) + 1e-300 {
            bad += 1;
        }
    }
    bad
}

/// Descending search (step 0.05) for the largest weight of each layer that
/// passes `samples` random triangle-inequality trials, layer by layer on the
/// truncated norms, followed by a check of the full norm.
pub fn calibrate_norm(group: &CarnotGroup, samples: usize, seed: u64) -> Result<HomogeneousNormConfig, GroupError> {
    let alg = group.algebra();
    let mut cfg = HomogeneousNormConfig { algebra: alg.name().into(), epsilons: vec![1.0; alg.step()], samples, seed };
    for l in 2..=alg.step() {
        let mut found = false;
        let steps = (1.0 / EPS_STEP).round() as usize;
        for s in 0..steps {
            cfg.epsilons[l - 1] = 1.0 - s as f64 * EPS_STEP;
            if count_triangle_violations(group, &cfg, l, samples, seed.wrapping_add(l as u64)) == 0 {
                found = true;
                break;
            }
        }
        if !found {
            return Err(GroupError::CalibrationFailure { layer: l });
        }
    }
    if count_triangle_violations(group, &cfg, alg.step(), samples, seed.wrapping_add(1000)) > 0 {
        return Err(GroupError::CalibrationFailure { layer: alg.step() });
    }
    Ok(cfg)
}
