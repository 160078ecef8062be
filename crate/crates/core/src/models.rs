//! Stochastic Galerkin formulations of four hyperbolic systems with
//! Lipschitz-continuous flux, plus a linear advection model for scheme tests.
//!
//! Each model exposes two evaluation routes:
//!
//! - the Galerkin route ([`ModelSystem::flux`], [`ModelSystem::flux_jacobian`])
//!   composes the gPC operations of [`crate::algebra`] literally;
//! - the spectral route ([`ModelSystem::point_flux`] and friends) evaluates the
//!   deterministic flux at each spectrum entry. It is what the solver uses,
//!   and it agrees with the Galerkin route for every Haar-type system.

use nalgebra::DMatrix;

use crate::algebra::{sign, GalerkinTensor, ModeVector, SpectrumVector};
use crate::error::{Error, Result};
use crate::solver::grid::{Boundary, GpcField, Grid};

/// Spectrum entries of `||u||` below this use the generalized-gradient speeds.
pub const LEVEL_SET_DEGENERATE: f64 = 1e-12;

/// Maximum number of conserved components of the shipped models.
pub const MAX_COMPONENTS: usize = 3;

pub type PointState = [f64; MAX_COMPONENTS];

/// Scalar input depending on the uniform random variable `xi` in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RandomInput {
    Constant(f64),
    /// `lo + (hi - lo) * xi`, i.e. uniformly distributed on `[lo, hi]`.
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl RandomInput {
    pub fn sample(&self, xi: f64) -> f64 {
        match *self {
            RandomInput::Constant(c) => c,
            RandomInput::Uniform { lo, hi } => lo + (hi - lo) * xi,
        }
    }
}

/// Unprojected description of a model and its random parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    ScalarLipschitz,
    LevelSet2D {
        velocity: RandomInput,
    },
    PSystem1D {
        gamma1: f64,
        gamma2: f64,
        v_star: RandomInput,
    },
    Euler2D {
        gamma: f64,
    },
    Advection {
        velocity: [f64; 2],
        space_dim: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    ScalarLipschitz,
    LevelSet2D,
    PSystem1D,
    Euler2D,
    Advection,
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::ScalarLipschitz => ModelKind::ScalarLipschitz,
            ModelSpec::LevelSet2D { .. } => ModelKind::LevelSet2D,
            ModelSpec::PSystem1D { .. } => ModelKind::PSystem1D,
            ModelSpec::Euler2D { .. } => ModelKind::Euler2D,
            ModelSpec::Advection { .. } => ModelKind::Advection,
        }
    }

    pub fn components(&self) -> usize {
        match self {
            ModelSpec::ScalarLipschitz | ModelSpec::Advection { .. } => 1,
            ModelSpec::LevelSet2D { .. } | ModelSpec::PSystem1D { .. } => 2,
            ModelSpec::Euler2D { .. } => 3,
        }
    }

    pub fn space_dim(&self) -> usize {
        match self {
            ModelSpec::ScalarLipschitz | ModelSpec::PSystem1D { .. } => 1,
            ModelSpec::LevelSet2D { .. } | ModelSpec::Euler2D { .. } => 2,
            ModelSpec::Advection { space_dim, .. } => *space_dim,
        }
    }

    /// Deterministic parameter values at `xi`, in the order stored by [`ModelSystem`].
    fn parameters_at(&self, xi: f64) -> Vec<f64> {
        match self {
            ModelSpec::LevelSet2D { velocity } => vec![velocity.sample(xi)],
            ModelSpec::PSystem1D {
                gamma1,
                gamma2,
                v_star,
            } => {
                let vs = v_star.sample(xi);
                vec![vs, pressure_offset(vs, *gamma1, *gamma2)]
            }
            _ => Vec::new(),
        }
    }
}

/// Offset that makes the two pressure branches meet at `v_star`:
/// `v*^(-gamma1) = v*^(-gamma2) + offset`.
pub fn pressure_offset(v_star: f64, gamma1: f64, gamma2: f64) -> f64 {
    v_star.powf(-gamma1) - v_star.powf(-gamma2)
}

/// Deterministic Lipschitz pressure; at `v == v_star` both branches are
/// averaged, matching `sign(0) = 0`.
pub fn pressure(v: f64, v_star: f64, offset: f64, gamma1: f64, gamma2: f64) -> f64 {
    let s = sign(v - v_star);
    -0.5 * (s - 1.0) * v.powf(-gamma1) + 0.5 * (s + 1.0) * (v.powf(-gamma2) + offset)
}

fn pressure_derivative(v: f64, v_star: f64, gamma1: f64, gamma2: f64) -> f64 {
    let s = sign(v - v_star);
    -0.5 * (s - 1.0) * (-gamma1 * v.powf(-gamma1 - 1.0)) + 0.5 * (s + 1.0) * (-gamma2 * v.powf(-gamma2 - 1.0))
}

/// Mode vectors of all conserved components in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    modes: usize,
    data: Vec<f64>,
}

impl CellState {
    pub fn from_components(components: &[&[f64]]) -> Result<Self> {
        let modes = components.first().map(|c| c.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(modes * components.len());
        for c in components {
            if c.len() != modes {
                return Err(Error::Dimension {
                    expected: modes,
                    got: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Ok(Self { modes, data })
    }

    pub fn from_flat(modes: usize, data: Vec<f64>) -> Self {
        Self { modes, data }
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.data[c * self.modes..(c + 1) * self.modes]
    }

    pub fn components(&self) -> usize {
        self.data.len() / self.modes.max(1)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Result of [`ModelSystem::is_admissible_state`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateAdmissibility {
    pub admissible: bool,
    /// Smallest spectrum value of the constrained component, if any.
    pub min_spectrum: Option<f64>,
    pub cell: usize,
}

/// A model bound to a Galerkin tensor: random parameters are projected once.
#[derive(Debug, Clone)]
pub struct ModelSystem {
    spec: ModelSpec,
    modes: usize,
    params: Vec<ModeVector>,
    param_spectra: Vec<Vec<f64>>,
}

impl ModelSystem {
    pub fn new(spec: ModelSpec, t: &GalerkinTensor) -> Result<Self> {
        let params: Vec<ModeVector> = match &spec {
            ModelSpec::LevelSet2D { velocity } => {
                let v = *velocity;
                vec![t.project(move |xi| v.sample(xi), &[])?]
            }
            ModelSpec::PSystem1D {
                gamma1,
                gamma2,
                v_star,
            } => {
                let (vs, g1, g2) = (*v_star, *gamma1, *gamma2);
                vec![
                    t.project(move |xi| vs.sample(xi), &[])?,
                    t.project(move |xi| pressure_offset(vs.sample(xi), g1, g2), &[])?,
                ]
            }
            _ => Vec::new(),
        };
        let param_spectra = params
            .iter()
            .map(|p| t.to_spectrum(p).map(|s| s.0))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec,
            modes: t.size(),
            params,
            param_spectra,
        })
    }

    /// Deterministic model with all random parameters fixed at `xi`
    /// (to be used with [`GalerkinTensor::point`]).
    pub fn at_sample(spec: ModelSpec, xi: f64) -> Self {
        let values = spec.parameters_at(xi);
        Self {
            spec,
            modes: 1,
            params: values.iter().map(|&v| ModeVector(vec![v])).collect(),
            param_spectra: values.iter().map(|&v| vec![v]).collect(),
        }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn kind(&self) -> ModelKind {
        self.spec.kind()
    }

    pub fn components(&self) -> usize {
        self.spec.components()
    }

    pub fn space_dim(&self) -> usize {
        self.spec.space_dim()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Projected parameter modes (velocity for the level set; `v*` and the
    /// pressure offset for the p-system).
    pub fn parameters(&self) -> &[ModeVector] {
        &self.params
    }

    fn check_state(&self, t: &GalerkinTensor, s: &CellState) -> Result<()> {
        if s.modes() != t.size() || t.size() != self.modes {
            return Err(Error::Dimension {
                expected: self.modes,
                got: s.modes(),
            });
        }
        if s.components() != self.components() {
            return Err(Error::Dimension {
                expected: self.components(),
                got: s.components(),
            });
        }
        Ok(())
    }

    fn check_direction(&self, direction: usize) -> Result<()> {
        if direction >= self.space_dim() {
            return Err(Error::invalid(format!(
                "direction {direction} invalid for a {}D model",
                self.space_dim()
            )));
        }
        Ok(())
    }

    // ---- spectral (pointwise) route ---------------------------------------

    /// Index of the component whose spectrum must stay strictly positive.
    pub fn positive_component(&self) -> Option<(usize, &'static str)> {
        match self.spec {
            ModelSpec::PSystem1D { .. } => Some((1, "specific volume")),
            ModelSpec::Euler2D { .. } => Some((0, "density")),
            _ => None,
        }
    }

    /// Checks the admissibility of a realization in stochastic cell `cell`.
    #[inline]
    pub fn point_admissible(&self, cell: usize, u: &PointState) -> Result<()> {
        if let Some((c, quantity)) = self.positive_component() {
            if !(u[c] > 0.0) {
                return Err(Error::Admissibility {
                    quantity,
                    cell,
                    value: u[c],
                });
            }
        }
        Ok(())
    }

    /// Deterministic flux in `direction` (0 = x, 1 = y) of the realization in
    /// stochastic cell `cell`.
    #[inline]
    pub fn point_flux(&self, cell: usize, u: &PointState, direction: usize) -> PointState {
        match self.spec {
            ModelSpec::ScalarLipschitz => [u[0] * u[0] + u[0].abs(), 0.0, 0.0],
            ModelSpec::LevelSet2D { .. } => {
                let v = self.param_spectra[0][cell];
                let norm = (u[0] * u[0] + u[1] * u[1]).sqrt();
                let mut f = [0.0; MAX_COMPONENTS];
                f[direction] = v * norm;
                f
            }
            ModelSpec::PSystem1D { gamma1, gamma2, .. } => {
                let vs = self.param_spectra[0][cell];
                let off = self.param_spectra[1][cell];
                [pressure(u[1], vs, off, gamma1, gamma2), -u[0], 0.0]
            }
            ModelSpec::Euler2D { gamma } => {
                let rho = u[0];
                let p = rho * rho.powf(gamma - 1.0);
                let nu = u[1 + direction] / rho;
                let mut f = [u[1 + direction], nu * u[1], nu * u[2]];
                f[1 + direction] += p;
                f
            }
            ModelSpec::Advection { velocity, .. } => [velocity[direction] * u[0], 0.0, 0.0],
        }
    }

    /// Bound on all characteristic speeds in `direction` of the realization in
    /// stochastic cell `cell`. At kinks of the flux the bound covers every
    /// element of the generalized Jacobian.
    #[inline]
    pub fn point_max_speed(&self, cell: usize, u: &PointState, direction: usize) -> f64 {
        match self.spec {
            ModelSpec::ScalarLipschitz => 2.0 * u[0].abs() + 1.0,
            ModelSpec::LevelSet2D { .. } => {
                let v = self.param_spectra[0][cell].abs();
                let norm = (u[0] * u[0] + u[1] * u[1]).sqrt();
                if norm < LEVEL_SET_DEGENERATE {
                    v
                } else {
                    v * u[direction].abs() / norm
                }
            }
            ModelSpec::PSystem1D { gamma1, gamma2, .. } => {
                let v = u[1];
                let vs = self.param_spectra[0][cell];
                if v == vs {
                    (gamma1 * v.powf(-gamma1 - 1.0))
                        .sqrt()
                        .max((gamma2 * v.powf(-gamma2 - 1.0)).sqrt())
                } else {
                    (-pressure_derivative(v, vs, gamma1, gamma2)).sqrt()
                }
            }
            ModelSpec::Euler2D { gamma } => {
                let rho = u[0];
                let c = (gamma * rho.powf(gamma - 1.0)).sqrt();
                (u[1 + direction] / rho).abs() + c
            }
            ModelSpec::Advection { velocity, .. } => velocity[direction].abs(),
        }
    }

    /// [`Self::point_flux`] and [`Self::point_max_speed`] in one call, sharing
    /// the expensive powers.
    #[inline]
    pub fn point_flux_speed(&self, cell: usize, u: &PointState, direction: usize) -> (PointState, f64) {
        match self.spec {
            ModelSpec::Euler2D { gamma } => {
                let rho = u[0];
                let r = rho.powf(gamma - 1.0);
                let nu = u[1 + direction] / rho;
                let mut f = [u[1 + direction], nu * u[1], nu * u[2]];
                f[1 + direction] += rho * r;
                (f, nu.abs() + (gamma * r).sqrt())
            }
            _ => (
                self.point_flux(cell, u, direction),
                self.point_max_speed(cell, u, direction),
            ),
        }
    }

    /// Characteristic families of the realization in cell `cell` along `n`.
    pub fn point_speeds(&self, cell: usize, u: &PointState, n: [f64; 2]) -> Vec<f64> {
        match self.spec {
            ModelSpec::ScalarLipschitz => vec![n[0] * (2.0 * u[0] + sign(u[0]))],
            ModelSpec::LevelSet2D { .. } => {
                let v = self.param_spectra[0][cell];
                let norm = (u[0] * u[0] + u[1] * u[1]).sqrt();
                let first = if norm < LEVEL_SET_DEGENERATE {
                    v * (n[0] * sign(u[0]) + n[1] * sign(u[1]))
                } else {
                    v * (n[0] * u[0] + n[1] * u[1]) / norm
                };
                vec![first, 0.0]
            }
            ModelSpec::PSystem1D { gamma1, gamma2, .. } => {
                let vs = self.param_spectra[0][cell];
                let c = (-pressure_derivative(u[1], vs, gamma1, gamma2)).sqrt();
                vec![-n[0] * c, n[0] * c]
            }
            ModelSpec::Euler2D { gamma } => {
                let rho = u[0];
                let c = (gamma * rho.powf(gamma - 1.0)).sqrt();
                let un = (n[0] * u[1] + n[1] * u[2]) / rho;
                vec![un - c, un, un + c]
            }
            ModelSpec::Advection { velocity, .. } => {
                vec![velocity[0] * n[0] + velocity[1] * n[1]]
            }
        }
    }

    fn realizations(&self, t: &GalerkinTensor, s: &CellState) -> Vec<PointState> {
        let n = t.size();
        let mut out = vec![[0.0; MAX_COMPONENTS]; n];
        let mut d = vec![0.0; n];
        for c in 0..self.components() {
            t.to_spectrum_into(s.component(c), &mut d);
            for (o, v) in out.iter_mut().zip(&d) {
                o[c] = *v;
            }
        }
        out
    }

    // ---- Galerkin route ----------------------------------------------------

    /// Galerkin flux in `direction`, composed from gPC operations.
    pub fn flux(&self, t: &GalerkinTensor, s: &CellState, direction: usize) -> Result<CellState> {
        self.check_state(t, s)?;
        self.check_direction(direction)?;
        self.require_admissible(t, s)?;
        let n = t.size();
        let comps: Vec<ModeVector> = match &self.spec {
            ModelSpec::ScalarLipschitz => {
                let u = s.component(0);
                let sq = t.galerkin_product(u, u)?;
                let su = t.galerkin_product(&t.sign_modes(u)?, u)?;
                vec![add(&sq, &su)]
            }
            ModelSpec::LevelSet2D { .. } => {
                let norm = t.pnorm_modes(&[s.component(0), s.component(1)], 2.0)?;
                let f = t.galerkin_product(&self.params[0], &norm)?;
                let mut out = vec![ModeVector::zeros(n), ModeVector::zeros(n)];
                out[direction] = f;
                out
            }
            ModelSpec::PSystem1D { gamma1, gamma2, .. } => {
                let (u, v) = (s.component(0), s.component(1));
                let p = self.galerkin_pressure(t, v, *gamma1, *gamma2)?;
                vec![p, ModeVector(u.iter().map(|x| -x).collect())]
            }
            ModelSpec::Euler2D { gamma } => {
                let rho = s.component(0);
                let nu = self.euler_velocities(t, s)?;
                let p = t.power_modes(rho, *gamma)?;
                let nd = &nu[direction];
                let mass = t.galerkin_product(nd, rho)?;
                let mut mom = Vec::with_capacity(2);
                for nuk in &nu {
                    let prod = t.galerkin_product(nd, nuk)?;
                    mom.push(t.galerkin_product(&prod, rho)?);
                }
                mom[direction] = add(&mom[direction], &p);
                vec![mass, mom[0].clone(), mom[1].clone()]
            }
            ModelSpec::Advection { velocity, .. } => {
                vec![ModeVector(
                    s.component(0).iter().map(|x| velocity[direction] * x).collect(),
                )]
            }
        };
        let refs: Vec<&[f64]> = comps.iter().map(|c| &c[..]).collect();
        CellState::from_components(&refs)
    }

    fn galerkin_pressure(&self, t: &GalerkinTensor, v: &[f64], g1: f64, g2: f64) -> Result<ModeVector> {
        let unit = t.unit();
        let diff: Vec<f64> = v.iter().zip(self.params[0].iter()).map(|(a, b)| a - b).collect();
        let s = t.sign_modes(&diff)?;
        let lower: Vec<f64> = s.iter().zip(unit.iter()).map(|(a, b)| a - b).collect();
        let upper: Vec<f64> = s.iter().zip(unit.iter()).map(|(a, b)| a + b).collect();
        let p1 = t.power_modes(v, -g1)?;
        let p2 = add(&t.power_modes(v, -g2)?, &self.params[1]);
        let a = t.galerkin_product(&lower, &p1)?;
        let b = t.galerkin_product(&upper, &p2)?;
        Ok(ModeVector(
            a.iter().zip(b.iter()).map(|(x, y)| -0.5 * x + 0.5 * y).collect(),
        ))
    }

    fn euler_velocities(&self, t: &GalerkinTensor, s: &CellState) -> Result<Vec<ModeVector>> {
        let d_rho = t.to_spectrum(s.component(0))?;
        (1..3)
            .map(|c| {
                let d_q = t.to_spectrum(s.component(c))?;
                let ratio: Vec<f64> = d_q.iter().zip(d_rho.iter()).map(|(q, r)| q / r).collect();
                t.from_spectrum(&ratio)
            })
            .collect()
    }

    fn require_admissible(&self, t: &GalerkinTensor, s: &CellState) -> Result<()> {
        let a = self.is_admissible_state(t, s)?;
        if !a.admissible {
            let (_, quantity) = self.positive_component().expect("only constrained models fail");
            return Err(Error::Admissibility {
                quantity,
                cell: a.cell,
                value: a.min_spectrum.unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    /// Generalized characteristic speeds along the unit vector `n`, one
    /// diagonal array per family, evaluated entrywise on spectra.
    pub fn spectrum(&self, t: &GalerkinTensor, s: &CellState, n: [f64; 2]) -> Result<Vec<SpectrumVector>> {
        self.check_state(t, s)?;
        self.require_admissible(t, s)?;
        let reals = self.realizations(t, s);
        let families = self.point_speeds(0, &reals[0], n).len();
        let mut out = vec![SpectrumVector(vec![0.0; t.size()]); families];
        for (cell, u) in reals.iter().enumerate() {
            for (f, v) in self.point_speeds(cell, u, n).into_iter().enumerate() {
                out[f][cell] = v;
            }
        }
        Ok(out)
    }

    /// Largest characteristic speed in `direction` over all families and
    /// stochastic cells.
    pub fn max_wave_speed(&self, t: &GalerkinTensor, s: &CellState, direction: usize) -> Result<f64> {
        self.check_state(t, s)?;
        self.check_direction(direction)?;
        self.require_admissible(t, s)?;
        Ok(self
            .realizations(t, s)
            .iter()
            .enumerate()
            .map(|(cell, u)| self.point_max_speed(cell, u, direction))
            .fold(0.0, f64::max))
    }

    pub fn is_admissible_state(&self, t: &GalerkinTensor, s: &CellState) -> Result<StateAdmissibility> {
        self.check_state(t, s)?;
        match self.positive_component() {
            None => Ok(StateAdmissibility {
                admissible: true,
                min_spectrum: None,
                cell: 0,
            }),
            Some((c, _)) => {
                let a = t.is_admissible(s.component(c))?;
                Ok(StateAdmissibility {
                    admissible: a.min_spectrum > 0.0,
                    min_spectrum: Some(a.min_spectrum),
                    cell: a.argmin,
                })
            }
        }
    }

    /// Smallest spectrum value of the constrained component over a field
    /// (`+inf` for unconstrained models).
    pub fn admissibility_margin(&self, t: &GalerkinTensor, field: &GpcField) -> f64 {
        let Some((c, _)) = self.positive_component() else {
            return f64::INFINITY;
        };
        let mut d = vec![0.0; t.size()];
        let mut min = f64::INFINITY;
        for j in 0..field.ny {
            for i in 0..field.nx {
                t.to_spectrum_into(field.modes_of(i, j, c), &mut d);
                min = d.iter().copied().fold(min, f64::min);
            }
        }
        min
    }

    /// Jacobian of the Galerkin flux along `n`, assembled from the Jacobians of
    /// the gPC operations (block row = flux component, block column = state
    /// component).
    pub fn flux_jacobian(&self, t: &GalerkinTensor, s: &CellState, n: [f64; 2]) -> Result<DMatrix<f64>> {
        self.check_state(t, s)?;
        self.require_admissible(t, s)?;
        let k = t.size();
        let c = self.components();
        let mut jac = DMatrix::zeros(c * k, c * k);
        match &self.spec {
            ModelSpec::ScalarLipschitz => {
                let u = s.component(0);
                let block = t.galerkin_matrix(u)? * 2.0 + t.jacobian_abs(u)?;
                jac.copy_from(&(block * n[0]));
            }
            ModelSpec::LevelSet2D { .. } => {
                let comps = [s.component(0), s.component(1)];
                let pv = t.galerkin_matrix(&self.params[0])?;
                for b in 0..2 {
                    let blk = &pv * t.jacobian_pnorm(&comps, 2.0, b)?;
                    for a in 0..2 {
                        jac.view_mut((a * k, b * k), (k, k)).copy_from(&(&blk * n[a]));
                    }
                }
            }
            ModelSpec::PSystem1D { gamma1, gamma2, .. } => {
                let v = s.component(1);
                let unit = t.unit();
                let diff: Vec<f64> = v.iter().zip(self.params[0].iter()).map(|(a, b)| a - b).collect();
                let sg = t.sign_modes(&diff)?;
                let lower: Vec<f64> = sg.iter().zip(unit.iter()).map(|(a, b)| a - b).collect();
                let upper: Vec<f64> = sg.iter().zip(unit.iter()).map(|(a, b)| a + b).collect();
                let dp = t.galerkin_matrix(&lower)? * t.jacobian_power(v, -gamma1)? * -0.5
                    + t.galerkin_matrix(&upper)? * t.jacobian_power(v, -gamma2)? * 0.5;
                jac.view_mut((0, k), (k, k)).copy_from(&(dp * n[0]));
                jac.view_mut((k, 0), (k, k))
                    .copy_from(&(DMatrix::<f64>::identity(k, k) * -n[0]));
            }
            ModelSpec::Euler2D { gamma } => {
                let reals = self.realizations(t, s);
                for a in 0..3 {
                    for b in 0..3 {
                        let g: Vec<f64> = reals
                            .iter()
                            .map(|u| euler_flux_derivative(u, *gamma, n, a, b))
                            .collect();
                        jac.view_mut((a * k, b * k), (k, k))
                            .copy_from(&t.spectral_jacobian(&g)?);
                    }
                }
            }
            ModelSpec::Advection { velocity, .. } => {
                let a = velocity[0] * n[0] + velocity[1] * n[1];
                jac.copy_from(&(DMatrix::<f64>::identity(k, k) * a));
            }
        }
        Ok(jac)
    }
}

/// `d(n . f)_a / d u_b` of the isentropic Euler flux.
fn euler_flux_derivative(u: &PointState, gamma: f64, n: [f64; 2], a: usize, b: usize) -> f64 {
    let (rho, q1, q2) = (u[0], u[1], u[2]);
    let dp = gamma * rho.powf(gamma - 1.0);
    let r2 = rho * rho;
    let d1 = [
        [0.0, 1.0, 0.0],
        [-q1 * q1 / r2 + dp, 2.0 * q1 / rho, 0.0],
        [-q1 * q2 / r2, q2 / rho, q1 / rho],
    ];
    let d2 = [
        [0.0, 0.0, 1.0],
        [-q1 * q2 / r2, q2 / rho, q1 / rho],
        [-q2 * q2 / r2 + dp, 0.0, 2.0 * q2 / rho],
    ];
    n[0] * d1[a][b] + n[1] * d2[a][b]
}

fn add(a: &[f64], b: &[f64]) -> ModeVector {
    ModeVector(a.iter().zip(b).map(|(x, y)| x + y).collect())
}

// ---- experiment presets -----------------------------------------------------

/// The four experiment setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    ScalarOleinik,
    LevelSetBox,
    PSystemRiemann,
    EulerBox,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::ScalarOleinik,
        Preset::LevelSetBox,
        Preset::PSystemRiemann,
        Preset::EulerBox,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::ScalarOleinik => "scalar-oleinik",
            Preset::LevelSetBox => "levelset-box",
            Preset::PSystemRiemann => "psystem-riemann",
            Preset::EulerBox => "euler-box",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn model_spec(&self) -> ModelSpec {
        match self {
            Preset::ScalarOleinik => ModelSpec::ScalarLipschitz,
            Preset::LevelSetBox => ModelSpec::LevelSet2D {
                velocity: RandomInput::Uniform { lo: 0.5, hi: 1.0 },
            },
            Preset::PSystemRiemann => ModelSpec::PSystem1D {
                gamma1: 5.0 / 3.0,
                gamma2: 4.0 / 3.0,
                v_star: RandomInput::Uniform { lo: 1.0, hi: 1.5 },
            },
            Preset::EulerBox => ModelSpec::Euler2D { gamma: 4.0 / 3.0 },
        }
    }

    pub fn t_final(&self) -> f64 {
        match self {
            Preset::ScalarOleinik => 0.2,
            Preset::LevelSetBox => 1.0,
            Preset::PSystemRiemann => 1.0,
            Preset::EulerBox => 0.5,
        }
    }

    pub fn default_grid(&self) -> Grid {
        let b = Boundary::Transmissive;
        match self {
            Preset::ScalarOleinik => Grid::new_1d(400, (-2.0, 2.0), b),
            Preset::LevelSetBox => Grid::new_2d(100, 100, (-4.0, 4.0), (-4.0, 4.0), b),
            Preset::PSystemRiemann => Grid::new_1d(400, (-3.0, 3.0), b),
            Preset::EulerBox => Grid::new_2d(100, 100, (-3.0, 3.0), (-3.0, 3.0), b),
        }
        .expect("preset grids are valid")
    }

    /// Deterministic initial state at `(x, y)` for the random input `xi`.
    pub fn initial_state(&self, x: f64, y: f64, xi: f64) -> PointState {
        match self {
            Preset::ScalarOleinik => [sign(x - (xi - 0.5)), 0.0, 0.0],
            Preset::LevelSetBox => {
                if x.abs() <= 2.0 && y.abs() <= 2.0 {
                    [1.0, 0.0, 0.0]
                } else {
                    [-1.0, 0.0, 0.0]
                }
            }
            Preset::PSystemRiemann => {
                if x < 0.0 {
                    [0.0, 1.0, 0.0]
                } else {
                    [0.0, 3.0, 0.0]
                }
            }
            Preset::EulerBox => {
                if x.abs() <= 1.0 && y.abs() <= 1.0 {
                    [2.0 + xi, 0.0, 0.0]
                } else {
                    [1.0, 0.0, 0.0]
                }
            }
        }
    }

    /// Stochastic locations where the initial state jumps at `(x, y)`.
    pub fn breakpoints(&self, x: f64, _y: f64) -> Vec<f64> {
        match self {
            Preset::ScalarOleinik => {
                let b = x + 0.5;
                if b > 0.0 && b < 1.0 {
                    vec![b]
                } else {
                    Vec::new()
                }
            }
            _ => Vec::new(),
        }
    }
}

/// Projects the preset's random initial condition cell by cell (at cell centers).
pub fn initial_data(
    preset: Preset,
    model: &ModelSystem,
    t: &GalerkinTensor,
    grid: &Grid,
) -> Result<GpcField> {
    if preset.model_spec().kind() != model.kind() {
        return Err(Error::invalid(format!(
            "preset {} does not match model {:?}",
            preset.name(),
            model.kind()
        )));
    }
    let comps = model.components();
    let modes = t.size();
    let mut field = GpcField::zeros(grid, comps, modes);
    for j in 0..grid.ny {
        let y = grid.y_center(j);
        for i in 0..grid.nx {
            let x = grid.x_center(i);
            let bps = preset.breakpoints(x, y);
            let cell = field.cell_mut(i, j);
            for c in 0..comps {
                let m = t.project(|xi| preset.initial_state(x, y, xi)[c], &bps)?;
                cell[c * modes..(c + 1) * modes].copy_from_slice(&m);
            }
        }
    }
    Ok(field)
}

/// Deterministic initial field for the single realization `xi`.
pub fn initial_data_sample(preset: Preset, grid: &Grid, xi: f64) -> GpcField {
    let comps = preset.model_spec().components();
    let mut field = GpcField::zeros(grid, comps, 1);
    for j in 0..grid.ny {
        let y = grid.y_center(j);
        for i in 0..grid.nx {
            let s = preset.initial_state(grid.x_center(i), y, xi);
            field.cell_mut(i, j).copy_from_slice(&s[..comps]);
        }
    }
    field
}
