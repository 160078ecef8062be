//! Reference solutions and the error and statistics metrics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::algebra::GalerkinTensor;
use crate::error::{Error, Result};
use crate::models::{initial_data_sample, ModelSystem, Preset};
use crate::quadrature::composite_gauss5;
use crate::solver::{advance, GpcField, Grid, SolverOptions};

/// Pointwise entropy solution of the scalar Lipschitz-flux problem with
/// initial data `sign(x - (xi - 1/2))`.
pub fn exact_scalar(t: f64, x: f64, xi: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("exact solution needs t > 0, got {t}")));
    }
    let s = (x - (xi - 0.5)) / t;
    Ok(if s < -3.0 {
        -1.0
    } else if s < -1.0 {
        0.5 * (s + 1.0)
    } else if s < 1.0 {
        0.0
    } else if s < 3.0 {
        0.5 * (s - 1.0)
    } else {
        1.0
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    ExactScalar,
    Collocation,
    MonteCarlo,
}

impl ReferenceKind {
    pub fn name(&self) -> &'static str {
        match self {
            ReferenceKind::ExactScalar => "exact",
            ReferenceKind::Collocation => "collocation",
            ReferenceKind::MonteCarlo => "monte-carlo",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Self::ExactScalar, Self::Collocation, Self::MonteCarlo]
            .into_iter()
            .find(|k| k.name() == name)
    }
}

/// Deterministic random field `(x, y, xi) -> state` used as ground truth.
#[derive(Debug, Clone)]
pub enum ReferenceField {
    ExactScalar {
        t: f64,
    },
    /// One deterministic run per stochastic cell, at the cell midpoint.
    Collocation {
        grid: Grid,
        xi_edges: Vec<f64>,
        runs: Vec<GpcField>,
    },
}

impl ReferenceField {
    pub fn kind(&self) -> ReferenceKind {
        match self {
            ReferenceField::ExactScalar { .. } => ReferenceKind::ExactScalar,
            ReferenceField::Collocation { .. } => ReferenceKind::Collocation,
        }
    }

    /// Point value of `component`; positions outside the domain are clamped.
    pub fn evaluate(&self, x: f64, y: f64, xi: f64, component: usize) -> f64 {
        match self {
            ReferenceField::ExactScalar { t } => exact_scalar(*t, x, xi).unwrap_or(f64::NAN),
            ReferenceField::Collocation { grid, runs, .. } => {
                let run = &runs[self.xi_cell(xi)];
                let i = locate(x, grid.x_range, grid.nx);
                let j = if grid.space_dim == 2 {
                    locate(y, grid.y_range, grid.ny)
                } else {
                    0
                };
                run.modes_of(i, j, component)[0]
            }
        }
    }

    fn xi_cell(&self, xi: f64) -> usize {
        match self {
            ReferenceField::ExactScalar { .. } => 0,
            ReferenceField::Collocation { xi_edges, .. } => {
                let n = xi_edges.len() - 1;
                xi_edges[1..n].partition_point(|&e| e <= xi)
            }
        }
    }

    /// Value representing solver cell `(i, j)` of `grid`: the point value at
    /// the cell centre, or for a collocation reference on an integer
    /// refinement of `grid`, the average of the fine cells it covers.
    pub fn cell_value(&self, grid: &Grid, i: usize, j: usize, component: usize, xi: f64) -> f64 {
        if let ReferenceField::Collocation { grid: fine, runs, .. } = self {
            if let Some((rx, ry)) = refinement(grid, fine) {
                let run = &runs[self.xi_cell(xi)];
                let mut acc = 0.0;
                for fj in j * ry..(j + 1) * ry {
                    for fi in i * rx..(i + 1) * rx {
                        acc += run.modes_of(fi, fj, component)[0];
                    }
                }
                return acc / (rx * ry) as f64;
            }
        }
        self.evaluate(grid.x_center(i), grid.y_center(j), xi, component)
    }

    /// Stochastic locations inside `(0, 1)` where the reference may fail to be
    /// smooth at the centre of cell `(i, j)`.
    pub fn xi_breakpoints(&self, grid: &Grid, i: usize, _j: usize) -> Vec<f64> {
        match self {
            ReferenceField::ExactScalar { t } => {
                let x = grid.x_center(i);
                [-3.0, -1.0, 1.0, 3.0]
                    .iter()
                    .map(|k| x + 0.5 - k * t)
                    .filter(|&b| b > 0.0 && b < 1.0)
                    .collect()
            }
            ReferenceField::Collocation { xi_edges, .. } => xi_edges[1..xi_edges.len() - 1].to_vec(),
        }
    }

    /// Deterministic runs of a collocation reference (empty otherwise).
    pub fn runs(&self) -> &[GpcField] {
        match self {
            ReferenceField::Collocation { runs, .. } => runs,
            _ => &[],
        }
    }
}

fn locate(x: f64, range: (f64, f64), n: usize) -> usize {
    let h = (range.1 - range.0) / n as f64;
    (((x - range.0) / h).floor().max(0.0) as usize).min(n - 1)
}

/// Integer refinement factors of `fine` over `coarse`, if it is one.
fn refinement(coarse: &Grid, fine: &Grid) -> Option<(usize, usize)> {
    if coarse.space_dim != fine.space_dim
        || coarse.x_range != fine.x_range
        || (coarse.space_dim == 2 && coarse.y_range != fine.y_range)
        || fine.nx % coarse.nx != 0
        || fine.ny % coarse.ny != 0
    {
        return None;
    }
    Some((fine.nx / coarse.nx, fine.ny / coarse.ny))
}

/// Deterministic problem at one value of `xi`: model and initial field on
/// the given grid.
pub type SampleSetup<'a> = dyn Fn(f64, &Grid) -> (ModelSystem, GpcField) + Sync + 'a;

/// Model and initial data of `preset` at `xi`.
pub fn preset_setup(preset: Preset) -> impl Fn(f64, &Grid) -> (ModelSystem, GpcField) + Sync {
    move |xi, grid| {
        (
            ModelSystem::at_sample(preset.model_spec(), xi),
            initial_data_sample(preset, grid, xi),
        )
    }
}

/// Runs `solve` over `items` in parallel, in a dedicated pool when a thread
/// count is given; results keep the order of `items`.
fn parallel_map<T: Sync, R: Send>(
    items: &[T],
    threads: Option<usize>,
    solve: impl Fn(&T) -> R + Sync + Send,
) -> Result<Vec<R>> {
    let run_all = || items.par_iter().map(&solve).collect::<Vec<R>>();
    Ok(match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::invalid(format!("cannot start worker threads: {e}")))?
            .install(run_all),
        None => run_all(),
    })
}

/// Solves the deterministic problem at the midpoint of every stochastic cell
/// delimited by `xi_edges`, on `grid` refined by `refine`.
pub fn collocation_reference(
    setup: &SampleSetup<'_>,
    xi_edges: &[f64],
    grid: &Grid,
    refine: usize,
    t_final: f64,
    options: SolverOptions<'_>,
) -> Result<ReferenceField> {
    if xi_edges.len() < 2 || refine == 0 {
        return Err(Error::invalid(
            "collocation needs at least one stochastic cell and refine >= 1",
        ));
    }
    let fine = grid.refined(refine);
    let point = GalerkinTensor::point();
    let mids: Vec<f64> = xi_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let inner = SolverOptions {
        threads: None,
        ..options
    };
    let results = parallel_map(&mids, options.threads, |xi| -> Result<GpcField> {
        let (model, mut f) = setup(*xi, &fine);
        advance(&model, &point, &mut f, &fine, t_final, inner, None)?;
        Ok(f)
    })?;
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ReferenceField::Collocation {
        grid: fine,
        xi_edges: xi_edges.to_vec(),
        runs,
    })
}

/// Pointwise statistics of Monte Carlo samples along the `x2 = 0` profile
/// (the whole line in 1D).
#[derive(Debug, Clone, PartialEq)]
pub struct McEnvelope {
    pub x: Vec<f64>,
    /// `[component][x index]`
    pub min: Vec<Vec<f64>>,
    pub max: Vec<Vec<f64>>,
    pub mean: Vec<Vec<f64>>,
    pub samples: Vec<f64>,
    /// Samples whose solve failed; they are excluded from the statistics.
    pub failures: usize,
    /// Per successful sample, shock positions of component 0 (one per half
    /// of the profile).
    pub shocks: Vec<Vec<f64>>,
}

/// Values of `component` along `x2 = 0`: the middle row, or the average of
/// the two middle rows when `ny` is even. `values(i, j)` reads one cell.
pub fn profile_x2_zero(grid: &Grid, values: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    (0..grid.nx)
        .map(|i| {
            if grid.space_dim == 1 {
                values(i, 0)
            } else if grid.ny % 2 == 0 {
                0.5 * (values(i, grid.ny / 2 - 1) + values(i, grid.ny / 2))
            } else {
                values(i, grid.ny / 2)
            }
        })
        .collect()
}

/// Positions of the largest jump of `profile` left and right of `x = 0`
/// (the interface between the two cells of largest difference).
pub fn shock_locations(grid: &Grid, profile: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let centre = grid.nx / 2;
    for (lo, hi) in [(0, centre), (centre, grid.nx - 1)] {
        let best = (lo..hi).map(|i| (i, (profile[i + 1] - profile[i]).abs())).fold(
            None::<(usize, f64)>,
            |acc, (i, d)| match acc {
                Some((_, bd)) if bd >= d => acc,
                _ => Some((i, d)),
            },
        );
        if let Some((i, d)) = best {
            if d > 0.0 {
                out.push(grid.x_range.0 + (i + 1) as f64 * grid.dx());
            }
        }
    }
    out
}

/// Sample `index` of the stream seeded by `seed`.
pub fn mc_sample(seed: u64, index: usize) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.gen::<f64>()
}

pub fn monte_carlo_reference(
    setup: &SampleSetup<'_>,
    samples: usize,
    grid: &Grid,
    t_final: f64,
    seed: u64,
    options: SolverOptions<'_>,
) -> Result<McEnvelope> {
    if samples == 0 {
        return Err(Error::invalid("Monte Carlo needs at least one sample"));
    }
    let point = GalerkinTensor::point();
    let xis: Vec<f64> = (0..samples).map(|k| mc_sample(seed, k)).collect();
    let inner = SolverOptions {
        threads: None,
        ..options
    };
    let results = parallel_map(&xis, options.threads, |xi| -> Result<Vec<Vec<f64>>> {
        let (model, mut f) = setup(*xi, grid);
        advance(&model, &point, &mut f, grid, t_final, inner, None)?;
        Ok((0..f.components)
            .map(|c| profile_x2_zero(grid, |i, j| f.modes_of(i, j, c)[0]))
            .collect())
    })?;
    let comps = results
        .iter()
        .find_map(|r| r.as_ref().ok().map(|p| p.len()))
        .unwrap_or(0);

    let nx = grid.nx;
    let mut env = McEnvelope {
        x: (0..nx).map(|i| grid.x_center(i)).collect(),
        min: vec![vec![f64::INFINITY; nx]; comps],
        max: vec![vec![f64::NEG_INFINITY; nx]; comps],
        mean: vec![vec![0.0; nx]; comps],
        samples: xis.clone(),
        failures: 0,
        shocks: Vec::new(),
    };
    let mut ok = 0usize;
    for r in results {
        match r {
            Ok(profiles) => {
                ok += 1;
                env.shocks.push(shock_locations(grid, &profiles[0]));
                for (c, p) in profiles.iter().enumerate() {
                    for (i, v) in p.iter().enumerate() {
                        env.min[c][i] = env.min[c][i].min(*v);
                        env.max[c][i] = env.max[c][i].max(*v);
                        env.mean[c][i] += v;
                    }
                }
            }
            Err(_) => env.failures += 1,
        }
    }
    if ok == 0 {
        return Err(Error::invalid("every Monte Carlo sample failed"));
    }
    for m in env.mean.iter_mut().flatten() {
        *m /= ok as f64;
    }
    Ok(env)
}

/// Per cell and component mean and standard deviation of a gPC field.
#[derive(Debug, Clone, PartialEq)]
pub struct Statistics {
    pub components: usize,
    /// `mean[(j * nx + i) * components + c]`
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Mean `<u, c>` and standard deviation `|u - mean c|` per cell, where `c`
/// holds the modes of the constant function (for piecewise-constant bases:
/// mode 0 and the norm of the remaining modes).
pub fn mean_std(field: &GpcField, t: &GalerkinTensor) -> Statistics {
    let unit = t.unit();
    let m = field.modes;
    let mut mean = Vec::with_capacity(field.data.len() / m);
    let mut std = Vec::with_capacity(field.data.len() / m);
    for modes in field.data.chunks(m) {
        let mu: f64 = modes.iter().zip(unit.iter()).map(|(a, b)| a * b).sum();
        let var: f64 = modes
            .iter()
            .zip(unit.iter())
            .map(|(a, b)| (a - mu * b).powi(2))
            .sum();
        mean.push(mu);
        std.push(var.sqrt());
    }
    Statistics {
        components: field.components,
        mean,
        std,
    }
}

/// `sum_cells volume * E[g(u_K - u_ref)]` for `component`; the expectation
/// uses the five-point Gauss rule on every piece of the merged stochastic
/// partitions of expansion and reference.
fn expected_discrepancy(
    field: &GpcField,
    grid: &Grid,
    t: &GalerkinTensor,
    reference: &ReferenceField,
    component: usize,
    g: impl Fn(f64) -> f64 + Sync,
) -> Result<f64> {
    if field.nx != grid.nx || field.ny != grid.ny || field.modes != t.size() || component >= field.components
    {
        return Err(Error::invalid("field does not match grid, basis or component"));
    }
    if let ReferenceField::Collocation { grid: fine, .. } = reference {
        if fine.space_dim != grid.space_dim || fine.x_range != grid.x_range || fine.y_range != grid.y_range {
            return Err(Error::invalid("reference and field live on different domains"));
        }
    }
    let basis = t.basis();
    let edges = basis.cell_edges();
    let inner_edges = &edges[1..edges.len() - 1];
    let piecewise_constant = basis.is_piecewise_constant();
    let n_cells = basis.stochastic_cells();
    let rows: Vec<f64> = (0..grid.ny)
        .into_par_iter()
        .map(|j| {
            let mut spec = vec![0.0; t.size()];
            let mut acc = 0.0;
            for i in 0..grid.nx {
                let u = field.modes_of(i, j, component);
                t.to_spectrum_into(u, &mut spec);
                let mut bps = reference.xi_breakpoints(grid, i, j);
                bps.extend_from_slice(inner_edges);
                let mut e = 0.0;
                for (xi, w) in composite_gauss5(0.0, 1.0, 1, &bps) {
                    let value = if piecewise_constant {
                        spec[((xi * n_cells as f64) as usize).min(n_cells - 1)]
                    } else {
                        t.evaluate(u, xi)
                    };
                    e += w * g(value - reference.cell_value(grid, i, j, component, xi));
                }
                acc += e;
            }
            acc
        })
        .collect();
    Ok(rows.iter().sum::<f64>() * grid.cell_volume())
}

/// Mean squared error `int E[(u_K - u_ref)^2] dx` of `component`.
pub fn mse(
    field: &GpcField,
    grid: &Grid,
    t: &GalerkinTensor,
    reference: &ReferenceField,
    component: usize,
) -> Result<f64> {
    expected_discrepancy(field, grid, t, reference, component, |d| d * d)
}

/// `int E|u_K - u_ref| dx` of `component`.
pub fn l1_distance(
    field: &GpcField,
    grid: &Grid,
    t: &GalerkinTensor,
    reference: &ReferenceField,
    component: usize,
) -> Result<f64> {
    expected_discrepancy(field, grid, t, reference, component, f64::abs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::HaarTypeBasis;
    use crate::models::ModelSpec;
    use crate::solver::Boundary;

    fn haar(j: u32) -> GalerkinTensor {
        GalerkinTensor::new(&HaarTypeBasis::classical_haar(j).unwrap()).unwrap()
    }

    #[test]
    fn exact_scalar_branches() {
        // xi = 1/2 makes x-hat equal to x
        assert_eq!(exact_scalar(1.0, 0.0, 0.5).unwrap(), 0.0);
        assert_eq!(exact_scalar(1.0, -4.0, 0.5).unwrap(), -1.0);
        assert_eq!(exact_scalar(1.0, 2.0, 0.5).unwrap(), 0.5);
        for k in [-3.0, -1.0, 1.0, 3.0] {
            let lo = exact_scalar(1.0, k - 1e-15, 0.5).unwrap();
            let hi = exact_scalar(1.0, k, 0.5).unwrap();
            assert!((lo - hi).abs() <= 1e-15);
        }
        assert!(exact_scalar(0.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn mean_std_examples() {
        let t = haar(0);
        let grid = Grid::new_1d(1, (0.0, 1.0), Boundary::Transmissive).unwrap();
        let mut f = GpcField::zeros(&grid, 1, 2);
        f.data.copy_from_slice(&[2.0, 1.0]);
        let s = mean_std(&f, &t);
        assert_eq!((s.mean[0], s.std[0]), (2.0, 1.0));
        // realizations (3, 1): mean 2, variance 1
        let d = t.to_spectrum(&[2.0, 1.0]).unwrap();
        let m = 0.5 * (d[0] + d[1]);
        let v = 0.5 * ((d[0] - m).powi(2) + (d[1] - m).powi(2));
        assert!((m - 2.0).abs() < 1e-15 && (v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mse_of_exact_expansion_and_offset() {
        let t = haar(1);
        let grid = Grid::new_1d(4, (0.0, 2.0), Boundary::Transmissive).unwrap();
        let runs: Vec<GpcField> = (0..4)
            .map(|l| {
                let mut f = GpcField::zeros(&grid, 1, 1);
                f.data.fill(l as f64);
                f
            })
            .collect();
        let reference = ReferenceField::Collocation {
            grid: grid.clone(),
            xi_edges: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            runs,
        };
        let mut field = GpcField::zeros(&grid, 1, 4);
        let modes = t.from_spectrum(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        for i in 0..4 {
            field.cell_mut(i, 0).copy_from_slice(&modes);
        }
        assert!(mse(&field, &grid, &t, &reference, 0).unwrap() < 1e-28);
        let shifted = t.from_spectrum(&[0.5, 1.5, 2.5, 3.5]).unwrap();
        for i in 0..4 {
            field.cell_mut(i, 0).copy_from_slice(&shifted);
        }
        // c^2 L with c = 1/2, L = 2
        assert!((mse(&field, &grid, &t, &reference, 0).unwrap() - 0.5).abs() < 1e-14);
        assert!((l1_distance(&field, &grid, &t, &reference, 0).unwrap() - 1.0).abs() < 1e-14);
    }

    fn advection_setup(xi: f64, grid: &Grid) -> (ModelSystem, GpcField) {
        let spec = ModelSpec::Advection {
            velocity: [1.0, 0.5],
            space_dim: grid.space_dim,
        };
        let mut f = GpcField::zeros(grid, 1, 1);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                f.cell_mut(i, j)[0] = if grid.x_center(i) < 0.0 { 1.0 } else { 0.0 };
            }
        }
        (ModelSystem::at_sample(spec, xi), f)
    }

    #[test]
    fn mc_envelope_trivial_cases() {
        let grid = Grid::new_1d(16, (-2.0, 2.0), Boundary::Transmissive).unwrap();
        let setup = preset_setup(Preset::ScalarOleinik);
        let one = monte_carlo_reference(&setup, 1, &grid, 0.1, 7, SolverOptions::default()).unwrap();
        assert_eq!(one.min, one.max);
        assert_eq!(one.min, one.mean);
        let g2 = Grid::new_2d(8, 8, (-1.0, 1.0), (-1.0, 1.0), Boundary::Transmissive).unwrap();
        let env = monte_carlo_reference(&advection_setup, 5, &g2, 0.3, 3, SolverOptions::default()).unwrap();
        assert_eq!(env.min, env.max);
        assert_eq!(env.failures, 0);
    }

    #[test]
    fn samples_are_reproducible_and_distinct() {
        assert_eq!(mc_sample(5, 3), mc_sample(5, 3));
        assert_ne!(mc_sample(5, 3), mc_sample(5, 4));
        assert_ne!(mc_sample(5, 3), mc_sample(6, 3));
        assert!((0..100).map(|k| mc_sample(1, k)).all(|x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn constant_data_give_identical_collocation_runs() {
        let grid = Grid::new_1d(32, (-1.0, 1.0), Boundary::Transmissive).unwrap();
        let edges = HaarTypeBasis::classical_haar(1).unwrap().cell_edges();
        let r =
            collocation_reference(&advection_setup, &edges, &grid, 2, 0.4, SolverOptions::default()).unwrap();
        assert_eq!(r.runs().len(), 4);
        assert!(r.runs().iter().all(|f| *f == r.runs()[0]));
    }
}
