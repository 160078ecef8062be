use std::f64::consts::PI;

use haarsg::algebra::GalerkinTensor;
use haarsg::basis::HaarTypeBasis;
use haarsg::models::{initial_data, ModelSpec, ModelSystem, Preset};
use haarsg::solver::{advance, Boundary, GpcField, Grid, SolverOptions};

fn advection(dim: usize) -> ModelSystem {
    ModelSystem::at_sample(
        ModelSpec::Advection {
            velocity: [1.0, 1.0],
            space_dim: dim,
        },
        0.5,
    )
}

/// L1 error of the smooth advection test at t = 0.5 with exact cell averages.
fn advection_error(dim: usize, n: usize) -> f64 {
    let t = GalerkinTensor::point();
    let m = advection(dim);
    let grid = if dim == 1 {
        Grid::new_1d(n, (0.0, 1.0), Boundary::Periodic).unwrap()
    } else {
        Grid::new_2d(n, n, (0.0, 1.0), (0.0, 1.0), Boundary::Periodic).unwrap()
    };
    let h = grid.dx();
    // cell average of sin(2 pi (x - s)) over cell i
    let avg = |i: usize, s: f64| {
        let (a, b) = (i as f64 * h - s, (i + 1) as f64 * h - s);
        ((2.0 * PI * a).cos() - (2.0 * PI * b).cos()) / (2.0 * PI * h)
    };
    let exact = |i: usize, j: usize, s: f64| {
        if dim == 1 {
            avg(i, s)
        } else {
            avg(i, s) * avg(j, s)
        }
    };
    let mut f = GpcField::zeros(&grid, 1, 1);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            f.cell_mut(i, j)[0] = exact(i, j, 0.0);
        }
    }
    advance(&m, &t, &mut f, &grid, 0.5, SolverOptions::default(), None).unwrap();
    let mut err = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            err += (f.cell(i, j)[0] - exact(i, j, 0.5)).abs() * grid.cell_volume();
        }
    }
    err
}

#[test]
fn third_order_1d() {
    // the 50 -> 100 rate is pre-asymptotic (about 2.2) and is reported by the
    // acceptance target; here only the refined pairs are asserted
    let e: Vec<f64> = [100, 200, 400].iter().map(|&n| advection_error(1, n)).collect();
    let eoc: Vec<f64> = e.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    println!("1d errors {e:?} eoc {eoc:?}");
    assert!(eoc.iter().all(|&r| r >= 2.5), "{eoc:?}");
}

#[test]
fn third_order_2d() {
    let e: Vec<f64> = [32, 64, 128].iter().map(|&n| advection_error(2, n)).collect();
    let eoc: Vec<f64> = e.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    println!("2d errors {e:?} eoc {eoc:?}");
    assert!(eoc.iter().all(|&r| r >= 2.5), "{eoc:?}");
}

#[test]
fn periodic_runs_conserve_every_mode() {
    let t = GalerkinTensor::new(&HaarTypeBasis::classical_haar(2).unwrap()).unwrap();
    let m = ModelSystem::new(ModelSpec::ScalarLipschitz, &t).unwrap();
    let grid = Grid::new_1d(64, (-2.0, 2.0), Boundary::Periodic).unwrap();
    let mut f = initial_data(Preset::ScalarOleinik, &m, &t, &grid).unwrap();
    let mut prev = f.totals();
    let mut worst: f64 = 0.0;
    let mut cb = |_: &haarsg::solver::StepInfo, g: &GpcField| {
        let now = g.totals();
        for (a, b) in now.iter().zip(&prev) {
            worst = worst.max((a - b).abs());
        }
        prev = now;
        Ok(())
    };
    advance(
        &m,
        &t,
        &mut f,
        &grid,
        0.2,
        SolverOptions::default(),
        Some(&mut cb),
    )
    .unwrap();
    assert!(worst < 1e-12, "{worst}");
}
