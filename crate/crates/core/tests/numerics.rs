use carnot_core::algebra::StratifiedLieAlgebra;
use carnot_core::group::CarnotGroup;
use carnot_core::numerics::fd::{FdOrder, GridFrame};
use carnot_core::numerics::grid::Grid;
use carnot_core::numerics::homotopy::{j_euclidean, volume_contraction, ConeRule, Cylinder, RuminHomotopy, ThetaBump};
use carnot_core::numerics::norms::{integral, lp_norm, Region};
use carnot_core::numerics::pipeline::{check_exponents, horizontal_divergence, ExperimentConfig, PrimitiveSolver};
use carnot_core::rumin::RuminComplex;
use proptest::prelude::*;

fn heisenberg_frame(grid: &Grid) -> GridFrame {
    let group = CarnotGroup::new(StratifiedLieAlgebra::heisenberg(1));
    GridFrame::new(grid, &group.frame(), FdOrder::Fourth).unwrap()
}

/// `(1 − |p − c|²/r²)⁴₊`, smooth enough for fourth-order differences.
fn bump(p: [f64; 3], c: [f64; 3], r: f64) -> f64 {
    let s = (0..3).map(|a| (p[a] - c[a]).powi(2)).sum::<f64>() / (r * r);
    if s < 1.0 {
        (1.0 - s).powi(4)
    } else {
        0.0
    }
}

const CENTER: [f64; 3] = [0.1, -0.1, 0.05];

/// `(1 − |p − c|²)⁶₊` and its Euclidean gradient.
fn smooth_bump(p: [f64; 3]) -> (f64, [f64; 3]) {
    let d = [0, 1, 2].map(|a| p[a] - CENTER[a]);
    let s = 1.0 - d.iter().map(|x| x * x).sum::<f64>();
    if s <= 0.0 {
        return (0.0, [0.0; 3]);
    }
    (s.powi(6), d.map(|x| -12.0 * s.powi(5) * x))
}

#[test]
fn divergence_is_exactly_minus_adjoint_of_horizontal_gradient() {
    let mut residuals = Vec::new();
    for n in [24, 36, 48] {
        let grid = Grid::symmetric([n; 3], [1.0; 3], 3);
        let frame = heisenberg_frame(&grid);
        let f = [grid.sample(|p| bump(p, [0.1, 0.0, 0.1], 0.8)), grid.sample(|p| bump(p, [-0.1, 0.2, 0.0], 0.7))];
        let g = grid.sample(|p| bump(p, [0.0, -0.1, -0.1], 0.8) * (1.0 + p[0]));
        let div = horizontal_divergence(&frame, &f).unwrap();
        let lhs: Vec<f64> = div.iter().zip(&g).map(|(a, b)| a * b).collect();
        let mut rhs = grid.zeros();
        for (j, fj) in f.iter().enumerate() {
            let xg = frame.apply_field(j, &g).unwrap();
            rhs.iter_mut().zip(fj.iter().zip(&xg)).for_each(|(r, (a, b))| *r += a * b);
        }
        let a = integral(&grid, &lhs, &Region::All);
        let b = integral(&grid, &rhs, &Region::All);
        residuals.push((a + b).abs() / b.abs());
    }
    // Antisymmetric central stencils and divergence-free coefficients make
    // summation by parts exact on the grid.
    assert!(residuals.iter().all(|r| *r < 1e-12), "{residuals:?}");
}

#[test]
fn grid_frame_is_left_invariant() {
    let group = CarnotGroup::new(StratifiedLieAlgebra::heisenberg(1));
    let vector_fields = group.frame();
    let p = [0.3, -0.2, 0.15];
    let translate = |x: [f64; 3]| {
        let q = group.product(&p, &x).unwrap();
        [q[0], q[1], q[2]]
    };
    let mut errors = Vec::new();
    for n in [24, 32, 48] {
        let grid = Grid::symmetric([n; 3], [1.8; 3], 3);
        let frame = heisenberg_frame(&grid);
        let translated = grid.sample(|x| smooth_bump(translate(x)).0);
        let mut worst: f64 = 0.0;
        for (j, field) in vector_fields.iter().enumerate() {
            let lhs = frame.apply_field(j, &translated).unwrap();
            // (X_j f)(p·x) with X_j f evaluated exactly.
            let rhs = grid.sample(|x| {
                let y = translate(x);
                let a = field.eval(&y);
                let g = smooth_bump(y).1;
                (0..3).map(|k| a[k] * g[k]).sum()
            });
            let err: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
            worst = worst.max(lp_norm(&grid, &err, 2.0, &Region::All) / lp_norm(&grid, &rhs, 2.0, &Region::All));
        }
        errors.push(worst);
    }
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    assert!(errors[2] < 1e-2, "{errors:?}");
}

#[test]
fn abelian_homotopy_is_euclidean() {
    let alg = StratifiedLieAlgebra::abelian(3);
    let cx = RuminComplex::build(&alg).unwrap();
    let grid = Grid::symmetric([28; 3], [1.0; 3], 3);
    let frame = GridFrame::new(&grid, &CarnotGroup::new(alg.clone()).frame(), FdOrder::Fourth).unwrap();
    let a = grid.sample(|p| bump(p, [0.1, -0.1, 0.1], 0.6));
    let domain = Cylinder { radius: 1.0, half_height: 1.0 };
    let theta = ThetaBump { radius: 0.8, half_height: 0.8 };
    let rule = ConeRule::default();
    let j = RuminHomotopy::new(&cx, &frame).unwrap().apply(&a, &domain, &theta, &rule).unwrap();
    let u = j_euclidean(&grid, &a, &domain, &theta, &rule).unwrap();
    let euclid = volume_contraction(&grid, &CarnotGroup::new(alg).frame(), &u);
    assert_eq!(j.components.len(), euclid.components.len());
    for (x, y) in j.components.iter().zip(&euclid.components) {
        for (p, q) in x.iter().zip(y) {
            assert!((p - q).abs() <= 1e-12 * (1.0 + q.abs()), "{p} vs {q}");
        }
    }
}

#[test]
fn primitive_of_a_horizontal_derivative() {
    // f = X₁g has zero average; the solver must return some F with div F ≈ f.
    let mut cfg = ExperimentConfig::new(2.0, 4.0, 2.0, 0.75, 40, 1, 1);
    cfg.kernel_constant = carnot_core::numerics::pipeline::KernelConstant::ClosedForm;
    let solver = PrimitiveSolver::new(cfg).unwrap();
    let grid = solver.grid.clone();
    let g = grid.sample(|p| {
        let s = (p[0] * p[0] + p[1] * p[1]) / 0.49 + p[2] * p[2] / 0.2401;
        if s < 1.0 {
            (1.0 - s).powi(4)
        } else {
            0.0
        }
    });
    let f = solver.frame().apply_field(0, &g).unwrap();
    let l1 = lp_norm(&grid, &f, 1.0, &Region::All);
    assert!(integral(&grid, &f, &Region::All).abs() < 1e-10 * l1);
    let sol = solver.solve(&f, 0).unwrap();
    assert!(sol.report.support_ok);
    assert!(sol.report.divergence_residual < 0.1, "{:?}", sol.report);
    assert!(sol.report.ratio.is_finite() && sol.report.ratio > 0.0);
}

proptest! {
    #[test]
    fn admissible_exponents_are_downward_closed(p in 1.0f64..3.99, q in 1.0f64..20.0, t in 0.0f64..1.0) {
        let hom = 4.0;
        if check_exponents(p, q, hom).is_ok() {
            let smaller = 1.0 + t * (q - 1.0);
            prop_assert!(check_exponents(p, smaller, hom).is_ok());
            if p > 1.0 + 1e-9 {
                prop_assert!(q <= p * hom / (hom - p) + 1e-9);
            } else {
                prop_assert!(q < hom / (hom - 1.0));
            }
        }
    }

    #[test]
    fn sobolev_endpoint_is_admissible(p in 1.01f64..3.99) {
        prop_assert!(check_exponents(p, p * 4.0 / (4.0 - p), 4.0).is_ok());
        prop_assert!(check_exponents(p, p * 4.0 / (4.0 - p) * 1.001, 4.0).is_err());
    }
}
