//! Lebesgue, Folland–Stein and Marcinkiewicz norms of grid fields.

use super::fd::GridFrame;
use super::grid::Grid;
use super::Result;
use crate::algebra::StratifiedLieAlgebra;
use crate::group::HomogeneousNormConfig;
use crate::opcalc::OperatorPolynomial;

/// Pairwise summation, accurate to O(log n) roundoff.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 64 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Nodes taken into account by a norm.
#[derive(Clone, Debug)]
pub enum Region {
    All,
    Mask(Vec<bool>),
}

impl Region {
    /// Nodes in the closed ball `{‖p‖ ≤ r}` of the homogeneous norm.
    pub fn ball(grid: &Grid, alg: &StratifiedLieAlgebra, norm: &HomogeneousNormConfig, r: f64) -> Region {
        let mut mask = vec![false; grid.len()];
        for i in 0..grid.n[0] {
            for j in 0..grid.n[1] {
                for k in 0..grid.n[2] {
                    mask[grid.idx(i, j, k)] = norm.norm(alg, &grid.point(i, j, k)) <= r;
                }
            }
        }
        Region::Mask(mask)
    }

    fn select<'a>(&'a self, f: &'a [f64]) -> Box<dyn Iterator<Item = f64> + 'a> {
        match self {
            Region::All => Box::new(f.iter().copied()),
            Region::Mask(m) => Box::new(f.iter().zip(m).filter(|(_, &k)| k).map(|(v, _)| *v)),
        }
    }

    pub fn count(&self, grid: &Grid) -> usize {
        match self {
            Region::All => grid.len(),
            Region::Mask(m) => m.iter().filter(|&&k| k).count(),
        }
    }
}

pub fn integral(grid: &Grid, f: &[f64], region: &Region) -> f64 {
    let v: Vec<f64> = region.select(f).collect();
    pairwise_sum(&v) * grid.cell_volume()
}

/// ‖f‖_{L^p} by the rectangle rule; `p = ∞` gives the maximum modulus.
pub fn lp_norm(grid: &Grid, f: &[f64], p: f64, region: &Region) -> f64 {
    if p.is_infinite() {
        return region.select(f).fold(0.0, |m, v| m.max(v.abs()));
    }
    let v: Vec<f64> = region.select(f).map(|x| x.abs().powf(p)).collect();
    (pairwise_sum(&v) * grid.cell_volume()).powf(1.0 / p)
}

/// Σ_{d(I) ≤ m} ‖X^I u‖_{L^p} over ordered monomials.
pub fn folland_stein_norm(frame: &GridFrame, degrees: &[usize], u: &[f64], m: usize, p: f64, region: &Region) -> Result<f64> {
    let n = degrees.len();
    let mut total = 0.0;
    let mut exps = vec![0u16; n];
    loop {
        let d: usize = exps.iter().zip(degrees).map(|(&a, &w)| a as usize * w).sum();
        if d <= m {
            let mut op = OperatorPolynomial::zero(n);
            op.add_term(exps.clone(), num::One::one());
            let v = frame.apply_op(&op, u)?;
            total += lp_norm(frame.grid(), &v, p, region);
        }
        // Odometer over exponents bounded by m / degree.
        let mut a = 0;
        loop {
            if a == n {
                return Ok(total);
            }
            exps[a] += 1;
            if exps[a] as usize * degrees[a] <= m {
                break;
            }
            exps[a] = 0;
            a += 1;
        }
    }
}

fn sorted_moduli(f: &[f64], region: &Region) -> Vec<f64> {
    let mut v: Vec<f64> = region.select(f).map(f64::abs).filter(|x| *x > 0.0).collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

/// Marcinkiewicz norm sup_E |E|^{-1+1/r} ∫_E |f|, attained on level sets of the grid field.
pub fn weak_mr_norm(grid: &Grid, f: &[f64], r: f64, region: &Region) -> f64 {
    let v = sorted_moduli(f, region);
    let dv = grid.cell_volume();
    let mut acc = 0.0;
    let mut best: f64 = 0.0;
    for (k, x) in v.iter().enumerate() {
        acc += x;
        let meas = (k + 1) as f64 * dv;
        best = best.max(acc * dv / meas.powf(1.0 - 1.0 / r));
    }
    best
}

/// sup_t t^r |{|f| > t}|, the r-th power of the weak-L^r quasinorm.
pub fn weak_lr_power(grid: &Grid, f: &[f64], r: f64, region: &Region) -> f64 {
    let v = sorted_moduli(f, region);
    let dv = grid.cell_volume();
    v.iter().enumerate().fold(0.0, |m, (k, x)| m.max(x.powf(r) * (k + 1) as f64 * dv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_grid(n: usize) -> Grid {
        Grid::new([n, 1, 1], [0.0; 3], [1.0; 3])
    }

    #[test]
    fn lp_of_constant() {
        let g = Grid::symmetric([5, 5, 5], [1.0; 3], 0);
        let f = vec![2.0; g.len()];
        let vol = g.len() as f64 * g.cell_volume();
        assert!((lp_norm(&g, &f, 2.0, &Region::All) - 2.0 * vol.sqrt()).abs() < 1e-12);
        assert_eq!(lp_norm(&g, &f, f64::INFINITY, &Region::All), 2.0);
    }

    #[test]
    fn weak_norms_of_step_function() {
        let g = unit_grid(4);
        let f = [4.0, 3.0, 2.0, 1.0];
        // t^r λ(t) peaks where v_k^r k is largest.
        let w = weak_lr_power(&g, &f, 2.0, &Region::All);
        assert_eq!(w, (16.0f64).max(9.0 * 2.0).max(4.0 * 3.0).max(4.0));
        let m = weak_mr_norm(&g, &f, 2.0, &Region::All);
        let expect = [4.0 / 1.0, 7.0 / 2f64.sqrt(), 9.0 / 3f64.sqrt(), 10.0 / 2.0].into_iter().fold(0.0, f64::max);
        assert!((m - expect).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn weak_norm_sandwich(v in proptest::collection::vec(0.0f64..10.0, 1..60), r in 1.1f64..4.0) {
            let g = unit_grid(v.len());
            let m = weak_mr_norm(&g, &v, r, &Region::All);
            let w = weak_lr_power(&g, &v, r, &Region::All);
            let lower = (r - 1.0).powf(r) / r.powf(r + 1.0) * m.powf(r);
            prop_assert!(lower <= w * (1.0 + 1e-12) + 1e-300);
            prop_assert!(w <= m.powf(r) * (1.0 + 1e-12) + 1e-300);
        }
    }
}
