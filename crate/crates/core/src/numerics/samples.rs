//! Smooth compactly supported test inputs on three-dimensional groups.

use super::grid::Grid;
use super::norms::{integral, Region};
use super::{NumericsError, Result};
use crate::group::CarnotGroup;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `(1 − |z|²/ρ²)³₊ (1 − t²/ρ⁴)³₊`, supported in the unit-weight ball B(e, ρ).
    Cylinder,
    /// `(1 − N⁴/ρ⁴)⁶₊` for the Korányi gauge N.
    Gauge,
}

/// A bump left-translated to `center`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderBump {
    pub center: [f64; 3],
    pub radius: f64,
    pub amplitude: f64,
    pub profile: Profile,
}

impl CylinderBump {
    pub fn eval_at_local(&self, u: [f64; 3]) -> f64 {
        let r2 = self.radius * self.radius;
        let z2 = u[0] * u[0] + u[1] * u[1];
        match self.profile {
            Profile::Cylinder => {
                let a = 1.0 - z2 / r2;
                let b = 1.0 - u[2] * u[2] / (r2 * r2);
                if a <= 0.0 || b <= 0.0 {
                    return 0.0;
                }
                self.amplitude * a.powi(3) * b.powi(3)
            }
            Profile::Gauge => {
                let a = 1.0 - (z2 * z2 + 16.0 * u[2] * u[2]) / (r2 * r2);
                if a <= 0.0 {
                    return 0.0;
                }
                self.amplitude * a.powi(6)
            }
        }
    }

    pub fn sample(&self, group: &CarnotGroup, grid: &Grid) -> Vec<f64> {
        let ci = group.inverse(&self.center);
        grid.sample(|p| {
            let u = group.product_unchecked(&ci, &p);
            self.eval_at_local([u[0], u[1], u[2]])
        })
    }
}

/// Layered max-norm of the unit weights: max(|z|, |t|^{1/2}).
fn unit_norm(p: [f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1]).sqrt().max(p[2].abs().sqrt())
}

/// Random bumps whose supports lie in `B(e, support)`: radii in
/// `[0.75, 0.95]·support`, centres of norm at most `support − radius`.
pub fn random_bumps(rng: &mut impl Rng, support: f64, count: usize) -> Vec<CylinderBump> {
    (0..count)
        .map(|_| {
            let radius = support * rng.gen_range(0.75..0.95);
            let room = support - radius;
            let center = loop {
                let c = [rng.gen_range(-room..room), rng.gen_range(-room..room), rng.gen_range(-room * room..room * room)];
                if unit_norm(c) <= room {
                    break c;
                }
            };
            let amplitude = if rng.gen_bool(0.5) { 1.0 } else { -1.0 } * rng.gen_range(0.5..1.5);
            CylinderBump { center, radius, amplitude, profile: Profile::Cylinder }
        })
        .collect()
}

/// A smooth field supported in `B(e, support)` whose grid integral vanishes
/// up to rounding: three random bumps, with the first rescaled against the rest.
pub fn zero_average_sample(group: &CarnotGroup, grid: &Grid, support: f64, seed: u64) -> Result<Vec<f64>> {
    check_group(group)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps = random_bumps(&mut rng, support, 3);
    let fields: Vec<Vec<f64>> = bumps.iter().map(|b| b.sample(group, grid)).collect();
    let m0 = integral(grid, &fields[0], &Region::All);
    if m0.abs() < 1e-300 {
        return Err(NumericsError::InvalidConfig("bump too small for the grid".into()));
    }
    let rest: Vec<f64> = (0..grid.len()).map(|x| fields[1..].iter().map(|f| f[x]).sum()).collect();
    let mr = integral(grid, &rest, &Region::All);
    if mr.abs() < 1e-3 * m0.abs() {
        return zero_average_sample(group, grid, support, seed.wrapping_add(0x9e37_79b9));
    }
    let s = -mr / m0;
    Ok((0..grid.len()).map(|x| s * fields[0][x] + rest[x]).collect())
}

/// `count` samples with seeds `seed, seed + 1, …`.
pub fn zero_average_family(group: &CarnotGroup, grid: &Grid, support: f64, seed: u64, count: usize) -> Result<Vec<Vec<f64>>> {
    (0..count).map(|i| zero_average_sample(group, grid, support, seed.wrapping_add(i as u64))).collect()
}

fn check_group(group: &CarnotGroup) -> Result<()> {
    if group.dim() != 3 {
        return Err(NumericsError::UnsupportedGroup(format!("samples need dimension 3, got {}", group.dim())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::StratifiedLieAlgebra;

    #[test]
    fn samples_are_supported_and_balanced() {
        let group = CarnotGroup::new(StratifiedLieAlgebra::heisenberg(1));
        let grid = Grid::symmetric([24, 24, 24], [1.2, 1.2, 1.44], 2);
        for seed in 0..5 {
            let f = zero_average_sample(&group, &grid, 1.0, seed).unwrap();
            let l1: f64 = f.iter().map(|v| v.abs()).sum::<f64>() * grid.cell_volume();
            assert!(l1 > 0.0);
            assert!(integral(&grid, &f, &Region::All).abs() < 1e-12 * l1);
            for i in 0..grid.n[0] {
                for j in 0..grid.n[1] {
                    for k in 0..grid.n[2] {
                        if f[grid.idx(i, j, k)] != 0.0 {
                            assert!(unit_norm(grid.point(i, j, k)) <= 1.0 + 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn same_seed_same_sample() {
        let group = CarnotGroup::new(StratifiedLieAlgebra::heisenberg(1));
        let grid = Grid::symmetric([12, 12, 12], [1.0; 3], 1);
        assert_eq!(zero_average_sample(&group, &grid, 0.8, 7).unwrap(), zero_average_sample(&group, &grid, 0.8, 7).unwrap());
    }
}
