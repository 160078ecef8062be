//! Method-of-lines finite-volume solver for the Galerkin systems: CWENO3
//! reconstruction of every gPC mode, local Lax–Friedrichs fluxes and SSPRK3.
//!
//! Fluxes are evaluated in spectral coordinates, one deterministic flux per
//! stochastic cell, which coincides with the Galerkin flux for Haar-type
//! systems. Deterministic runs use the same code with [`GalerkinTensor::point`].

pub mod cweno;
pub mod grid;
pub mod rk;

use rayon::prelude::*;

use crate::algebra::GalerkinTensor;
use crate::error::{Error, Result};
use crate::models::{CellState, ModelSystem, PointState, MAX_COMPONENTS};
use crate::quadrature::GAUSS2_NODES;

pub use cweno::{cweno3_reconstruct_1d, cweno3_reconstruct_2d, CwenoParams};
pub use grid::{Boundary, GpcField, Grid, GHOST};
pub use rk::ssprk3_step;

use cweno::{EAST, FACE_POINTS, NORTH, SOUTH, WEST};

pub const DEFAULT_CFL: f64 = 0.45;

/// Source term `s(x, y, t, out)`; `out` receives one value per component and
/// mode, laid out like a cell of [`GpcField`].
pub type SourceFn = dyn Fn(f64, f64, f64, &mut [f64]) + Send + Sync;

#[derive(Clone, Copy)]
pub struct SolverOptions<'a> {
    pub cfl: f64,
    pub cweno: CwenoParams,
    /// Worker threads; `None` runs in the caller's rayon context.
    pub threads: Option<usize>,
    pub source: Option<&'a SourceFn>,
}

impl Default for SolverOptions<'_> {
    fn default() -> Self {
        Self {
            cfl: DEFAULT_CFL,
            cweno: CwenoParams::default(),
            threads: None,
            source: None,
        }
    }
}

impl std::fmt::Debug for SolverOptions<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolverOptions")
            .field("cfl", &self.cfl)
            .field("cweno", &self.cweno)
            .field("threads", &self.threads)
            .field("source", &self.source.is_some())
            .finish()
    }
}

/// Passed to the step callback after every accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    /// Smallest spectrum value of the positivity-constrained component before
    /// the step (`+inf` for unconstrained models).
    pub admissibility: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvanceReport {
    pub steps: usize,
    pub time: f64,
    /// Minimum of [`StepInfo::admissibility`] over the run, final state included.
    pub min_admissibility: f64,
}

pub type StepCallback<'c> = dyn FnMut(&StepInfo, &GpcField) -> Result<()> + Send + 'c;

/// Local Lax–Friedrichs flux between two cell states, evaluated with the
/// Galerkin operations.
pub fn llf_flux(
    model: &ModelSystem,
    t: &GalerkinTensor,
    left: &CellState,
    right: &CellState,
    direction: usize,
) -> Result<CellState> {
    let fl = model.flux(t, left, direction)?;
    let fr = model.flux(t, right, direction)?;
    let alpha = model
        .max_wave_speed(t, left, direction)?
        .max(model.max_wave_speed(t, right, direction)?);
    let data = fl
        .as_slice()
        .iter()
        .zip(fr.as_slice())
        .zip(left.as_slice().iter().zip(right.as_slice()))
        .map(|((a, b), (l, r))| 0.5 * (a + b) - 0.5 * alpha * (r - l))
        .collect();
    Ok(CellState::from_flat(left.modes(), data))
}

/// Cell averages of `source` at time `time` by the two-point Gauss rule per
/// axis; zeros when no source is given.
pub fn source_quadrature_hook(grid: &Grid, stride: usize, time: f64, source: Option<&SourceFn>) -> Vec<f64> {
    let mut out = vec![0.0; grid.cells() * stride];
    let Some(src) = source else {
        return out;
    };
    let (dx, dy) = (grid.dx(), grid.dy());
    let mut buf = vec![0.0; stride];
    let ys: &[f64] = if grid.space_dim == 2 {
        &GAUSS2_NODES
    } else {
        &[0.0]
    };
    let wy = 1.0 / ys.len() as f64;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let cell = &mut out[(j * grid.nx + i) * stride..][..stride];
            for gy in ys {
                for gx in GAUSS2_NODES {
                    let x = grid.x_center(i) + 0.5 * dx * gx;
                    let y = grid.y_center(j) + 0.5 * dy * gy;
                    src(x, y, time, &mut buf);
                    for (c, b) in cell.iter_mut().zip(&buf) {
                        *c += 0.5 * wy * b;
                    }
                }
            }
        }
    }
    out
}

/// Largest stable time step for `field`, clipped to land on `t_final`.
pub fn compute_dt(
    model: &ModelSystem,
    t: &GalerkinTensor,
    field: &GpcField,
    grid: &Grid,
    cfl: f64,
    t_final: f64,
) -> Result<f64> {
    let scheme = Scheme::new(
        model,
        t,
        grid,
        SolverOptions {
            cfl,
            ..Default::default()
        },
    )?;
    let (dt, _) = scheme.scan(&field.data, field.time)?;
    Ok(dt.min(t_final - field.time))
}

/// Integrates `field` from `field.time` to `t_final`. `callback` runs after
/// every accepted step.
pub fn advance(
    model: &ModelSystem,
    t: &GalerkinTensor,
    field: &mut GpcField,
    grid: &Grid,
    t_final: f64,
    options: SolverOptions<'_>,
    callback: Option<&mut StepCallback<'_>>,
) -> Result<AdvanceReport> {
    match options.threads {
        None => advance_inner(model, t, field, grid, t_final, options, callback),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::invalid(format!("cannot start worker threads: {e}")))?;
            pool.install(|| advance_inner(model, t, field, grid, t_final, options, callback))
        }
    }
}

fn advance_inner(
    model: &ModelSystem,
    t: &GalerkinTensor,
    field: &mut GpcField,
    grid: &Grid,
    t_final: f64,
    options: SolverOptions<'_>,
    mut callback: Option<&mut StepCallback<'_>>,
) -> Result<AdvanceReport> {
    if !(t_final >= field.time) {
        return Err(Error::invalid(format!(
            "final time {t_final} precedes field time {}",
            field.time
        )));
    }
    if !(options.cfl > 0.0 && options.cfl < 1.0) {
        return Err(Error::invalid(format!(
            "cfl must lie in (0, 1), got {}",
            options.cfl
        )));
    }
    if field.nx != grid.nx
        || field.ny != grid.ny
        || field.modes != t.size()
        || field.components != model.components()
    {
        return Err(Error::invalid("field does not match grid, basis or model"));
    }
    let mut scheme = Scheme::new(model, t, grid, options)?;
    let mut steps = 0;
    let mut time = field.time;
    let mut min_adm = f64::INFINITY;
    while time < t_final {
        let (dt_max, adm) = scheme.scan(&field.data, time)?;
        min_adm = min_adm.min(adm);
        let remaining = t_final - time;
        let dt = dt_max.min(remaining);
        ssprk3_step(&mut field.data, time, dt, |s, u, out| scheme.rhs(s, u, out))?;
        time = if dt >= remaining { t_final } else { time + dt };
        field.time = time;
        steps += 1;
        if let Some(k) = field.data.iter().position(|v| !v.is_finite()) {
            let cell = k / field.stride();
            return Err(Error::SolverAbort {
                time,
                i: cell % grid.nx,
                j: cell / grid.nx,
                component: (k % field.stride()) / field.modes,
                source: Box::new(Error::NonFinite {
                    value: field.data[k],
                    xi: f64::NAN,
                }),
            });
        }
        if let Some(cb) = callback.as_deref_mut() {
            cb(
                &StepInfo {
                    step: steps,
                    time,
                    dt,
                    admissibility: adm,
                },
                field,
            )?;
        }
    }
    let (_, adm) = scheme.scan(&field.data, time)?;
    Ok(AdvanceReport {
        steps,
        time,
        min_admissibility: min_adm.min(adm),
    })
}

/// Reusable state of the semi-discrete operator.
struct Scheme<'a> {
    model: &'a ModelSystem,
    t: &'a GalerkinTensor,
    grid: &'a Grid,
    options: SolverOptions<'a>,
    comps: usize,
    modes: usize,
    stride: usize,
    nxp: usize,
    nyp: usize,
    // single-mode tensor with trivial spectral transform
    identity: bool,
    padded: Vec<f64>,
    rec: Vec<f64>,
    fx: Vec<f64>,
    fy: Vec<f64>,
}

/// Per-thread buffers of the face flux kernel.
struct Scratch {
    spec: Vec<f64>,
    left: Vec<PointState>,
    right: Vec<PointState>,
    flux: Vec<f64>,
}

impl Scratch {
    fn new(modes: usize, comps: usize) -> Self {
        Self {
            spec: vec![0.0; modes],
            left: vec![[0.0; MAX_COMPONENTS]; modes],
            right: vec![[0.0; MAX_COMPONENTS]; modes],
            flux: vec![0.0; modes * comps],
        }
    }
}

/// Where a face flux failed: which side, and the error.
type FaceError = (bool, Error);

impl<'a> Scheme<'a> {
    fn new(
        model: &'a ModelSystem,
        t: &'a GalerkinTensor,
        grid: &'a Grid,
        options: SolverOptions<'a>,
    ) -> Result<Self> {
        if model.space_dim() != grid.space_dim {
            return Err(Error::invalid(format!(
                "{}D model on a {}D grid",
                model.space_dim(),
                grid.space_dim
            )));
        }
        if model.modes() != t.size() {
            return Err(Error::Dimension {
                expected: t.size(),
                got: model.modes(),
            });
        }
        let comps = model.components();
        let modes = t.size();
        let stride = comps * modes;
        let nxp = grid.nx + 2 * GHOST;
        let nyp = if grid.space_dim == 2 {
            grid.ny + 2 * GHOST
        } else {
            1
        };
        let points = if grid.space_dim == 2 { FACE_POINTS } else { 2 };
        Ok(Self {
            model,
            t,
            grid,
            options,
            comps,
            modes,
            stride,
            nxp,
            nyp,
            identity: modes == 1
                && t.to_spectrum(&[1.0]).map(|d| d[0] == 1.0).unwrap_or(false)
                && t.from_spectrum(&[1.0]).map(|u| u[0] == 1.0).unwrap_or(false),
            padded: vec![0.0; nxp * nyp * stride],
            rec: vec![0.0; nxp * nyp * points * stride],
            fx: vec![0.0; (grid.nx + 1) * grid.ny * stride],
            fy: vec![0.0; grid.nx * (grid.ny + 1) * stride],
        })
    }

    fn abort(&self, time: f64, i: usize, j: usize, e: Error) -> Error {
        Error::SolverAbort {
            time,
            i,
            j,
            component: self.model.positive_component().map(|c| c.0).unwrap_or(0),
            source: Box::new(e),
        }
    }

    /// Checks admissibility of all cell averages and returns the CFL time
    /// step (unclipped) and the admissibility margin.
    fn scan(&self, u: &[f64], time: f64) -> Result<(f64, f64)> {
        let (nx, stride, modes) = (self.grid.nx, self.stride, self.modes);
        let dim = self.grid.space_dim;
        let (dx, dy) = (self.grid.dx(), self.grid.dy());
        let positive = self.model.positive_component();
        let rows: Vec<Result<(f64, f64)>> = u
            .par_chunks(nx * stride)
            .enumerate()
            .map(|(j, row)| {
                let mut spec = vec![0.0; modes];
                let mut reals = vec![[0.0; MAX_COMPONENTS]; modes];
                let mut rate: f64 = 0.0;
                let mut margin = f64::INFINITY;
                for (i, cell) in row.chunks(stride).enumerate() {
                    for c in 0..self.comps {
                        self.t
                            .to_spectrum_into(&cell[c * modes..(c + 1) * modes], &mut spec);
                        for (r, s) in reals.iter_mut().zip(&spec) {
                            r[c] = *s;
                        }
                    }
                    let (mut sx, mut sy) = (0.0f64, 0.0f64);
                    for (l, r) in reals.iter().enumerate() {
                        self.model
                            .point_admissible(l, r)
                            .map_err(|e| self.abort(time, i, j, e))?;
                        if let Some((pc, _)) = positive {
                            margin = margin.min(r[pc]);
                        }
                        sx = sx.max(self.model.point_max_speed(l, r, 0));
                        if dim == 2 {
                            sy = sy.max(self.model.point_max_speed(l, r, 1));
                        }
                    }
                    let cell_rate = if dim == 2 { sx / dx + sy / dy } else { sx / dx };
                    if !cell_rate.is_finite() {
                        return Err(self.abort(
                            time,
                            i,
                            j,
                            Error::NonFinite {
                                value: cell_rate,
                                xi: f64::NAN,
                            },
                        ));
                    }
                    rate = rate.max(cell_rate);
                }
                Ok((rate, margin))
            })
            .collect();
        let mut rate: f64 = 0.0;
        let mut margin = f64::INFINITY;
        for r in rows {
            let (a, m) = r?;
            rate = rate.max(a);
            margin = margin.min(m);
        }
        let dt = if rate > 0.0 {
            self.options.cfl / rate
        } else {
            f64::INFINITY
        };
        Ok((dt, margin))
    }

    #[inline]
    fn wrap(&self, p: isize, n: usize) -> usize {
        let n = n as isize;
        match self.grid.boundary {
            Boundary::Transmissive => p.clamp(0, n - 1) as usize,
            Boundary::Periodic => p.rem_euclid(n) as usize,
        }
    }

    fn fill_padded(&mut self, u: &[f64]) {
        let (nx, ny, stride) = (self.grid.nx, self.grid.ny, self.stride);
        let g = GHOST as isize;
        let two_d = self.grid.space_dim == 2;
        for pj in 0..self.nyp {
            let j = if two_d { self.wrap(pj as isize - g, ny) } else { 0 };
            for pi in 0..self.nxp {
                let i = self.wrap(pi as isize - g, nx);
                let src = &u[(j * nx + i) * stride..][..stride];
                self.padded[(pj * self.nxp + pi) * stride..][..stride].copy_from_slice(src);
            }
        }
    }

    /// LLF flux at one face point from the reconstructed mode values on both
    /// sides; the result (modes) is written to `scratch.flux`.
    fn face_flux(
        &self,
        ul: &[f64],
        ur: &[f64],
        dir: usize,
        s: &mut Scratch,
    ) -> std::result::Result<(), FaceError> {
        let (m, comps) = (self.modes, self.comps);
        if self.identity {
            s.left[0][..comps].copy_from_slice(ul);
            s.right[0][..comps].copy_from_slice(ur);
        }
        for c in 0..comps {
            if self.identity {
                break;
            }
            self.t.to_spectrum_into(&ul[c * m..(c + 1) * m], &mut s.spec);
            for (p, v) in s.left.iter_mut().zip(&s.spec) {
                p[c] = *v;
            }
            self.t.to_spectrum_into(&ur[c * m..(c + 1) * m], &mut s.spec);
            for (p, v) in s.right.iter_mut().zip(&s.spec) {
                p[c] = *v;
            }
        }
        let same = ul == ur;
        let mut alpha: f64 = 0.0;
        for l in 0..m {
            self.model
                .point_admissible(l, &s.left[l])
                .map_err(|e| (false, e))?;
            let (fl, al) = self.model.point_flux_speed(l, &s.left[l], dir);
            if same {
                for c in 0..comps {
                    s.flux[c * m + l] = fl[c];
                }
                continue;
            }
            self.model
                .point_admissible(l, &s.right[l])
                .map_err(|e| (true, e))?;
            let (fr, ar) = self.model.point_flux_speed(l, &s.right[l], dir);
            alpha = alpha.max(al).max(ar);
            for c in 0..comps {
                s.flux[c * m + l] = 0.5 * (fl[c] + fr[c]);
            }
        }
        // spectral LLF flux, stored component-major in `flux` as spectra
        if !same {
            for c in 0..comps {
                for l in 0..m {
                    s.flux[c * m + l] -= 0.5 * alpha * (s.right[l][c] - s.left[l][c]);
                }
            }
        }
        if self.identity {
            return Ok(());
        }
        for c in 0..comps {
            s.spec.copy_from_slice(&s.flux[c * m..(c + 1) * m]);
            self.t
                .from_spectrum_into(&s.spec, &mut s.flux[c * m..(c + 1) * m]);
        }
        Ok(())
    }

    fn rhs(&mut self, time: f64, u: &[f64], out: &mut [f64]) -> Result<()> {
        self.fill_padded(u);
        if self.grid.space_dim == 1 {
            self.rhs_1d(time, out)?;
        } else {
            self.rhs_2d(time, out)?;
        }
        if self.options.source.is_some() {
            let src = source_quadrature_hook(self.grid, self.stride, time, self.options.source);
            for (o, s) in out.iter_mut().zip(&src) {
                *o += s;
            }
        }
        Ok(())
    }

    fn rhs_1d(&mut self, time: f64, out: &mut [f64]) -> Result<()> {
        let (nx, stride) = (self.grid.nx, self.stride);
        let params = self.options.cweno;
        // rec[(p * 2 + side) * stride + q], side 0 = left interface
        for p in 1..self.nxp - 1 {
            for q in 0..stride {
                let v = |k: usize| self.padded[k * stride + q];
                let (l, r) = cweno3_reconstruct_1d(v(p - 1), v(p), v(p + 1), &params);
                self.rec[(p * 2) * stride + q] = l;
                self.rec[(p * 2 + 1) * stride + q] = r;
            }
        }
        let mut scratch = Scratch::new(self.modes, self.comps);
        let mut fx = std::mem::take(&mut self.fx);
        for f in 0..=nx {
            let (pl, pr) = (f + GHOST - 1, f + GHOST);
            let ul = &self.rec[(pl * 2 + 1) * stride..][..stride];
            let ur = &self.rec[(pr * 2) * stride..][..stride];
            if let Err((right, e)) = self.face_flux(ul, ur, 0, &mut scratch) {
                let i = if right { f.min(nx - 1) } else { f.saturating_sub(1) };
                self.fx = fx;
                return Err(self.abort(time, i, 0, e));
            }
            fx[f * stride..][..stride].copy_from_slice(&scratch.flux);
        }
        let dx = self.grid.dx();
        for i in 0..nx {
            for q in 0..stride {
                out[i * stride + q] = -(fx[(i + 1) * stride + q] - fx[i * stride + q]) / dx;
            }
        }
        self.fx = fx;
        Ok(())
    }

    fn rhs_2d(&mut self, time: f64, out: &mut [f64]) -> Result<()> {
        let (nx, ny, stride, nxp) = (self.grid.nx, self.grid.ny, self.stride, self.nxp);
        let params = self.options.cweno;
        let row_len = nxp * FACE_POINTS * stride;

        // reconstruction on interior cells and the first ghost ring
        let padded = &self.padded;
        let mut rec = std::mem::take(&mut self.rec);
        rec.par_chunks_mut(row_len)
            .enumerate()
            .filter(|(pj, _)| *pj >= 1 && *pj + 1 < self.nyp)
            .for_each(|(pj, row)| {
                let mut st = [0.0; 9];
                for pi in 1..nxp - 1 {
                    for q in 0..stride {
                        for b in 0..3 {
                            for a in 0..3 {
                                st[b * 3 + a] = padded[((pj + b - 1) * nxp + pi + a - 1) * stride + q];
                            }
                        }
                        let vals = cweno3_reconstruct_2d(&st, &params);
                        for (pt, v) in vals.iter().enumerate() {
                            row[(pi * FACE_POINTS + pt) * stride + q] = *v;
                        }
                    }
                }
            });
        self.rec = rec;

        let this = &*self;
        let at = |pi: usize, pj: usize, pt: usize| -> &[f64] {
            &this.rec[((pj * nxp + pi) * FACE_POINTS + pt) * stride..][..stride]
        };

        // x faces: fx[(j * (nx + 1) + f) * stride]
        let mut fx = vec![0.0; (nx + 1) * ny * stride];
        let xres: Vec<std::result::Result<(), (usize, usize, Error)>> = fx
            .par_chunks_mut((nx + 1) * stride)
            .enumerate()
            .map(|(j, row)| {
                let mut s = Scratch::new(this.modes, this.comps);
                let pj = j + GHOST;
                for f in 0..=nx {
                    let (pl, pr) = (f + GHOST - 1, f + GHOST);
                    let dst = &mut row[f * stride..][..stride];
                    for g in 0..2 {
                        this.face_flux(at(pl, pj, EAST + g), at(pr, pj, WEST + g), 0, &mut s)
                            .map_err(|(right, e)| {
                                (if right { f.min(nx - 1) } else { f.saturating_sub(1) }, j, e)
                            })?;
                        for (d, v) in dst.iter_mut().zip(&s.flux) {
                            *d += 0.5 * v;
                        }
                    }
                }
                Ok(())
            })
            .collect();

        // y faces: fy[(g * nx + i) * stride]
        let mut fy = vec![0.0; nx * (ny + 1) * stride];
        let yres: Vec<std::result::Result<(), (usize, usize, Error)>> = fy
            .par_chunks_mut(nx * stride)
            .enumerate()
            .map(|(f, row)| {
                let mut s = Scratch::new(this.modes, this.comps);
                let (pl, pr) = (f + GHOST - 1, f + GHOST);
                for i in 0..nx {
                    let pi = i + GHOST;
                    let dst = &mut row[i * stride..][..stride];
                    for g in 0..2 {
                        this.face_flux(at(pi, pl, NORTH + g), at(pi, pr, SOUTH + g), 1, &mut s)
                            .map_err(|(upper, e)| {
                                (i, if upper { f.min(ny - 1) } else { f.saturating_sub(1) }, e)
                            })?;
                        for (d, v) in dst.iter_mut().zip(&s.flux) {
                            *d += 0.5 * v;
                        }
                    }
                }
                Ok(())
            })
            .collect();
        for r in xres.into_iter().chain(yres) {
            if let Err((i, j, e)) = r {
                return Err(self.abort(time, i, j, e));
            }
        }

        let (dx, dy) = (self.grid.dx(), self.grid.dy());
        out.par_chunks_mut(nx * stride).enumerate().for_each(|(j, row)| {
            for i in 0..nx {
                for q in 0..stride {
                    let ex = fx[(j * (nx + 1) + i + 1) * stride + q] - fx[(j * (nx + 1) + i) * stride + q];
                    let ey = fy[((j + 1) * nx + i) * stride + q] - fy[(j * nx + i) * stride + q];
                    row[i * stride + q] = -ex / dx - ey / dy;
                }
            }
        });
        self.fx = fx;
        self.fy = fy;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::HaarTypeBasis;
    use crate::models::{ModelSpec, Preset};

    fn haar(j: u32) -> GalerkinTensor {
        GalerkinTensor::new(&HaarTypeBasis::classical_haar(j).unwrap()).unwrap()
    }

    #[test]
    fn llf_examples() {
        let t = haar(0);
        let m = ModelSystem::new(ModelSpec::ScalarLipschitz, &t).unwrap();
        let one = CellState::from_flat(2, vec![1.0, 0.0]);
        let minus = CellState::from_flat(2, vec![-1.0, 0.0]);
        let f = llf_flux(&m, &t, &one, &minus, 0).unwrap();
        assert!((f.as_slice()[0] - 5.0).abs() < 1e-14);
        assert!(f.as_slice()[1].abs() < 1e-14);
        let same = llf_flux(&m, &t, &one, &one, 0).unwrap();
        assert_eq!(same, m.flux(&t, &one, 0).unwrap());
        // swapping the states flips the dissipative part only
        let g = llf_flux(&m, &t, &minus, &one, 0).unwrap();
        assert!((f.as_slice()[0] + g.as_slice()[0] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn spectral_face_flux_matches_galerkin_llf() {
        let t = GalerkinTensor::new(&HaarTypeBasis::dct(4).unwrap()).unwrap();
        let m = ModelSystem::new(Preset::EulerBox.model_spec(), &t).unwrap();
        let grid = Grid::new_2d(2, 2, (0.0, 1.0), (0.0, 1.0), Boundary::Periodic).unwrap();
        let scheme = Scheme::new(&m, &t, &grid, SolverOptions::default()).unwrap();
        let l: Vec<f64> = [2.0, 0.1, 0.0, 0.05, 0.3, 0.0, -0.1, 0.0, 0.2, 0.0, 0.0, 0.1].to_vec();
        let r: Vec<f64> = [1.5, -0.1, 0.02, 0.0, 0.0, 0.1, 0.0, 0.05, -0.2, 0.0, 0.1, 0.0].to_vec();
        let mut s = Scratch::new(4, 3);
        for dir in 0..2 {
            scheme.face_flux(&l, &r, dir, &mut s).unwrap();
            let reference = llf_flux(
                &m,
                &t,
                &CellState::from_flat(4, l.clone()),
                &CellState::from_flat(4, r.clone()),
                dir,
            )
            .unwrap();
            for (a, b) in s.flux.iter().zip(reference.as_slice()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dt_examples() {
        let t = GalerkinTensor::point();
        let m = ModelSystem::at_sample(ModelSpec::ScalarLipschitz, 0.5);
        let grid = Grid::new_1d(100, (0.0, 1.0), Boundary::Periodic).unwrap();
        let mut field = GpcField::zeros(&grid, 1, 1);
        field.data.fill(1.0);
        let dt = compute_dt(&m, &t, &field, &grid, 0.45, 1.0).unwrap();
        assert!((dt - 0.0015).abs() < 1e-15);
        field.time = 0.9995;
        assert!((compute_dt(&m, &t, &field, &grid, 0.45, 1.0).unwrap() - 0.0005).abs() < 1e-15);

        let adv = ModelSystem::at_sample(
            ModelSpec::Advection {
                velocity: [2.0, 3.0],
                space_dim: 2,
            },
            0.5,
        );
        let g2 = Grid::new_2d(10, 20, (0.0, 1.0), (0.0, 1.0), Boundary::Periodic).unwrap();
        let f2 = GpcField::zeros(&g2, 1, 1);
        let dt = compute_dt(&adv, &t, &f2, &g2, 0.45, 1.0).unwrap();
        assert!((dt - 0.45 / (2.0 / 0.1 + 3.0 / 0.05)).abs() < 1e-15);

        let still = ModelSystem::at_sample(
            ModelSpec::Advection {
                velocity: [0.0, 0.0],
                space_dim: 1,
            },
            0.5,
        );
        let f0 = GpcField::zeros(&grid, 1, 1);
        assert_eq!(compute_dt(&still, &t, &f0, &grid, 0.45, 0.3).unwrap(), 0.3);
    }

    #[test]
    fn zero_length_run_is_identity() {
        let t = haar(1);
        let preset = Preset::ScalarOleinik;
        let m = ModelSystem::new(preset.model_spec(), &t).unwrap();
        let grid = Grid::new_1d(16, (-2.0, 2.0), Boundary::Transmissive).unwrap();
        let mut f = crate::models::initial_data(preset, &m, &t, &grid).unwrap();
        let before = f.clone();
        let rep = advance(&m, &t, &mut f, &grid, 0.0, SolverOptions::default(), None).unwrap();
        assert_eq!(rep.steps, 0);
        assert_eq!(f, before);
    }

    #[test]
    fn source_hook_examples() {
        let grid = Grid::new_1d(4, (0.0, 1.0), Boundary::Periodic).unwrap();
        assert!(source_quadrature_hook(&grid, 2, 0.0, None)
            .iter()
            .all(|&v| v == 0.0));
        let constant = |_: f64, _: f64, _: f64, out: &mut [f64]| out.fill(3.0);
        assert!(source_quadrature_hook(&grid, 2, 0.0, Some(&constant))
            .iter()
            .all(|&v| (v - 3.0).abs() < 1e-15));
        let quad = |x: f64, _: f64, _: f64, out: &mut [f64]| out[0] = x * x;
        let got = source_quadrature_hook(&grid, 1, 0.0, Some(&quad));
        for (i, g) in got.iter().enumerate() {
            let (a, b) = (i as f64 * 0.25, (i + 1) as f64 * 0.25);
            assert!((g - (b.powi(3) - a.powi(3)) / 3.0 / 0.25).abs() < 1e-15);
        }
        let g2 = Grid::new_2d(2, 2, (0.0, 1.0), (0.0, 1.0), Boundary::Periodic).unwrap();
        let xy = |x: f64, y: f64, _: f64, out: &mut [f64]| out[0] = x * x * y;
        let got = source_quadrature_hook(&g2, 1, 0.0, Some(&xy));
        let exact = |a: f64, c: f64| {
            ((a + 0.5f64).powi(3) - a.powi(3)) / 3.0 * ((c + 0.5f64).powi(2) - c * c) / 2.0 / 0.25
        };
        assert!((got[3] - exact(0.5, 0.5)).abs() < 1e-15);
    }
}
