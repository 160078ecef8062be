//! Stochastic Galerkin tensors, the Galerkin product and the closed-form
//! nonlinear operations available for Haar-type systems.
//!
//! Every Galerkin matrix `P(u) = sum_k u_k M_k` of a Haar-type system shares
//! the eigenvector matrix `Hn`, so `P(u) = Hn diag(d(u)) Hn^T`. The diagonal
//! `d(u)` is the *spectrum* of a mode vector. For piecewise-constant systems it
//! is the list of values of the truncated expansion on the stochastic cells,
//! which turns every nonlinear operation into an entrywise map:
//! `f(u) -> from_spectrum(f(d(u)))`.

use std::ops::{Deref, DerefMut};

use nalgebra::DMatrix;

use crate::basis::{BasisKind, HaarTypeBasis};
use crate::error::{Error, Result};
use crate::quadrature::composite_gauss5;

/// Panels per stochastic cell used by [`GalerkinTensor::project`].
pub const PROJECTION_PANELS: usize = 8;

/// Tolerance of pairwise commutators accepted by [`GalerkinTensor::check_commuting`].
pub const COMMUTATION_TOL: f64 = 1e-10;

/// Spectrum values above this (negative) threshold count as zero.
pub const SEMI_POSITIVE_TOL: f64 = -1e-13;

/// gPC coefficients of one scalar random quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVector(pub Vec<f64>);

/// Diagonal of `Hn^T P(u) Hn`, indexed by stochastic cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumVector(pub Vec<f64>);

macro_rules! vector_newtype {
    ($t:ty) => {
        impl Deref for $t {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }
        impl DerefMut for $t {
            fn deref_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }
        }
        impl From<Vec<f64>> for $t {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }
    };
}
vector_newtype!(ModeVector);
vector_newtype!(SpectrumVector);

impl ModeVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    /// `c * e_1`.
    pub fn constant(n: usize, c: f64) -> Self {
        let mut v = vec![0.0; n];
        v[0] = c;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Positivity class of a mode vector's Galerkin matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Positivity {
    StrictlyPositive,
    SemiPositive,
    Indefinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    pub class: Positivity,
    pub min_spectrum: f64,
    pub argmin: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutationReport {
    pub commuting: bool,
    pub worst: f64,
}

/// Precomputed triple-product matrices and spectral transforms of a basis.
#[derive(Debug, Clone)]
pub struct GalerkinTensor {
    basis: HaarTypeBasis,
    triple: Vec<DMatrix<f64>>,
    hn: DMatrix<f64>,
    unit: Vec<f64>,
    // forward[l * n + k]: coefficient of u_k in spectrum entry l
    forward: Vec<f64>,
    // inverse[k * n + l]: coefficient of d_l in mode k
    inverse: Vec<f64>,
}

impl GalerkinTensor {
    /// Builds the tensors `M_k[i][j] = <phi_k, phi_i phi_j>` of `basis`.
    pub fn new(basis: &HaarTypeBasis) -> Result<Self> {
        let n = basis.size();
        let triple = match basis.kind() {
            BasisKind::PiecewiseLinear { subdomains } => piecewise_linear_triples(*subdomains),
            _ => piecewise_constant_triples(basis.matrix()),
        };
        let hn = basis.normalized();
        let mut unit = vec![0.0; n];
        match basis.kind() {
            BasisKind::PiecewiseLinear { subdomains } => {
                let c = 1.0 / (*subdomains as f64).sqrt();
                for k in 0..*subdomains {
                    unit[2 * k] = c;
                }
            }
            _ => unit[0] = 1.0,
        }

        let mut forward = vec![0.0; n * n];
        let mut inverse = vec![0.0; n * n];
        if basis.is_piecewise_constant() {
            let h = basis.matrix();
            for l in 0..n {
                for k in 0..n {
                    forward[l * n + k] = h[(k, l)];
                    inverse[k * n + l] = h[(k, l)] / n as f64;
                }
            }
        } else {
            let weights: Vec<f64> = (0..n)
                .map(|l| (0..n).map(|k| hn[(k, l)] * unit[k]).sum())
                .collect();
            for l in 0..n {
                for k in 0..n {
                    forward[l * n + k] = hn[(k, l)] / weights[l];
                    inverse[k * n + l] = hn[(k, l)] * weights[l];
                }
            }
        }

        let tensor = Self {
            basis: basis.clone(),
            triple,
            hn,
            unit,
            forward,
            inverse,
        };
        if matches!(basis.kind(), BasisKind::Custom) {
            let report = tensor.check_commuting();
            if !report.commuting {
                return Err(Error::NotCommuting { worst: report.worst });
            }
        }
        Ok(tensor)
    }

    /// Single-mode tensor for deterministic runs.
    pub fn point() -> Self {
        Self::new(&HaarTypeBasis::point()).expect("point basis is always valid")
    }

    pub fn basis(&self) -> &HaarTypeBasis {
        &self.basis
    }

    /// Number of modes `K+1`.
    pub fn size(&self) -> usize {
        self.triple.len()
    }

    pub fn triple(&self) -> &[DMatrix<f64>] {
        &self.triple
    }

    /// Orthogonal eigenvector matrix shared by all Galerkin matrices.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.hn
    }

    /// Modes of the constant function 1 (`e_1` for piecewise-constant systems).
    pub fn unit(&self) -> ModeVector {
        ModeVector(self.unit.clone())
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.size() {
            return Err(Error::Dimension {
                expected: self.size(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// `P(u) = sum_k u_k M_k`.
    pub fn galerkin_matrix(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        self.check_len(u)?;
        let n = self.size();
        let mut p = DMatrix::zeros(n, n);
        for (k, m) in self.triple.iter().enumerate() {
            if u[k] != 0.0 {
                p += m * u[k];
            }
        }
        Ok(p)
    }

    /// Galerkin product `u * q = P(u) q`, evaluated so that swapping the
    /// arguments gives a bitwise identical result.
    pub fn galerkin_product(&self, u: &[f64], q: &[f64]) -> Result<ModeVector> {
        self.check_len(u)?;
        self.check_len(q)?;
        let n = self.size();
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..n {
                let row = &self.triple[j];
                acc += row[(i, j)] * (u[j] * q[j]);
                for k in j + 1..n {
                    let t = row[(i, k)];
                    if t != 0.0 {
                        acc += t * (u[j] * q[k] + u[k] * q[j]);
                    }
                }
            }
            *o = acc;
        }
        Ok(ModeVector(out))
    }

    /// Spectrum of `u` written into `out`.
    pub fn to_spectrum_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.size();
        for (l, o) in out.iter_mut().enumerate().take(n) {
            let row = &self.forward[l * n..(l + 1) * n];
            let mut acc = 0.0;
            for (c, x) in row.iter().zip(u) {
                acc += c * x;
            }
            *o = acc;
        }
    }

    /// Modes with spectrum `d` written into `out`.
    pub fn from_spectrum_into(&self, d: &[f64], out: &mut [f64]) {
        let n = self.size();
        for (k, o) in out.iter_mut().enumerate().take(n) {
            let row = &self.inverse[k * n..(k + 1) * n];
            let mut acc = 0.0;
            for (c, x) in row.iter().zip(d) {
                acc += c * x;
            }
            *o = acc;
        }
    }

    pub fn to_spectrum(&self, u: &[f64]) -> Result<SpectrumVector> {
        self.check_len(u)?;
        let mut d = vec![0.0; self.size()];
        self.to_spectrum_into(u, &mut d);
        Ok(SpectrumVector(d))
    }

    pub fn from_spectrum(&self, d: &[f64]) -> Result<ModeVector> {
        self.check_len(d)?;
        let mut u = vec![0.0; self.size()];
        self.from_spectrum_into(d, &mut u);
        Ok(ModeVector(u))
    }

    /// Applies `f` entrywise in spectral coordinates.
    pub fn map_spectrum(&self, u: &[f64], mut f: impl FnMut(f64) -> f64) -> Result<ModeVector> {
        let mut d = self.to_spectrum(u)?;
        for x in d.iter_mut() {
            *x = f(*x);
        }
        self.from_spectrum(&d)
    }

    /// `Hn diag(g) Hn^T`: the Jacobian of `u -> from_spectrum(f(d(u)))` when
    /// `g` holds the entrywise derivatives `f'(d)`.
    pub fn spectral_jacobian(&self, g: &[f64]) -> Result<DMatrix<f64>> {
        self.check_len(g)?;
        let n = self.size();
        let mut scaled = self.hn.clone();
        for l in 0..n {
            for k in 0..n {
                scaled[(k, l)] *= g[l];
            }
        }
        Ok(scaled * self.hn.transpose())
    }

    /// Value of the truncated expansion at `xi`.
    pub fn evaluate(&self, u: &[f64], xi: f64) -> f64 {
        let xi = xi.clamp(0.0, 1.0 - f64::EPSILON);
        u.iter()
            .enumerate()
            .map(|(k, c)| c * self.basis.evaluate_unchecked(k, xi))
            .sum()
    }

    /// Orthogonal projection of `f` onto the system. Cell integrals use the
    /// composite five-point Gauss rule with [`PROJECTION_PANELS`] panels per
    /// stochastic cell, additionally split at `breakpoints`.
    pub fn project(&self, f: impl Fn(f64) -> f64, breakpoints: &[f64]) -> Result<ModeVector> {
        let n = self.size();
        let edges = self.basis.cell_edges();
        let cells = edges.len() - 1;
        let mut out = vec![0.0; n];
        let pc = self.basis.is_piecewise_constant();
        for c in 0..cells {
            let (lo, hi) = (edges[c], edges[c + 1]);
            let mut mean = 0.0;
            let mut slope = 0.0;
            for (xi, w) in composite_gauss5(lo, hi, PROJECTION_PANELS, breakpoints) {
                let v = f(xi);
                if !v.is_finite() {
                    return Err(Error::NonFinite { value: v, xi });
                }
                mean += w * v;
                if !pc {
                    let local = 2.0 * (xi - lo) / (hi - lo) - 1.0;
                    slope += w * v * local;
                }
            }
            if pc {
                let h = self.basis.matrix();
                for (k, o) in out.iter_mut().enumerate() {
                    *o += h[(k, c)] * mean;
                }
            } else {
                let scale = (cells as f64).sqrt();
                out[2 * c] = scale * mean;
                out[2 * c + 1] = 3f64.sqrt() * scale * slope;
            }
        }
        Ok(ModeVector(out))
    }

    /// Classifies `P(u)` by its smallest eigenvalue.
    pub fn is_admissible(&self, u: &[f64]) -> Result<Admissibility> {
        let d = self.to_spectrum(u)?;
        let (argmin, min) =
            d.iter().copied().enumerate().fold(
                (0, f64::INFINITY),
                |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
            );
        let class = if min > 0.0 {
            Positivity::StrictlyPositive
        } else if min >= SEMI_POSITIVE_TOL {
            Positivity::SemiPositive
        } else {
            Positivity::Indefinite
        };
        Ok(Admissibility {
            class,
            min_spectrum: min,
            argmin,
        })
    }

    /// Modes of `u^gamma`. Non-negative exponents require a semi-positive
    /// spectrum, negative exponents a strictly positive one.
    pub fn power_modes(&self, u: &[f64], gamma: f64) -> Result<ModeVector> {
        let mut d = self.to_spectrum(u)?;
        for (cell, x) in d.iter_mut().enumerate() {
            *x = checked_power(*x, gamma, cell)?;
        }
        self.from_spectrum(&d)
    }

    /// `gamma Hn D^(gamma-1) Hn^T`; strict positivity is required whenever
    /// `gamma < 2`, where `D^(gamma-1)` would degenerate at zero.
    pub fn jacobian_power(&self, u: &[f64], gamma: f64) -> Result<DMatrix<f64>> {
        let mut d = self.to_spectrum(u)?;
        for (cell, x) in d.iter_mut().enumerate() {
            let strict = gamma < 2.0 && gamma != 1.0;
            if *x < SEMI_POSITIVE_TOL || (strict && *x <= 0.0) {
                return Err(Error::Admissibility {
                    quantity: "power argument",
                    cell,
                    value: *x,
                });
            }
            *x = if gamma == 1.0 {
                1.0
            } else {
                gamma * x.max(0.0).powf(gamma - 1.0)
            };
        }
        self.spectral_jacobian(&d)
    }

    /// Modes of `sign(u)` with `sign(0) = 0`.
    pub fn sign_modes(&self, u: &[f64]) -> Result<ModeVector> {
        self.map_spectrum(u, sign)
    }

    /// Modes of `|u|`.
    pub fn abs_modes(&self, u: &[f64]) -> Result<ModeVector> {
        self.map_spectrum(u, f64::abs)
    }

    /// `Hn sign(D(u)) Hn^T`.
    pub fn jacobian_abs(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        let mut d = self.to_spectrum(u)?;
        for x in d.iter_mut() {
            *x = sign(*x);
        }
        self.spectral_jacobian(&d)
    }

    /// Modes of `||(u_1, ..., u_d)||_p`.
    pub fn pnorm_modes(&self, components: &[&[f64]], p: f64) -> Result<ModeVector> {
        let acc = self.pnorm_spectrum(components, p)?;
        self.from_spectrum(&acc)
    }

    fn pnorm_spectrum(&self, components: &[&[f64]], p: f64) -> Result<Vec<f64>> {
        if components.is_empty() {
            return Err(Error::invalid("p-norm of zero components"));
        }
        if p < 1.0 {
            return Err(Error::invalid(format!("p = {p} < 1")));
        }
        let mut acc = vec![0.0; self.size()];
        for comp in components {
            let d = self.to_spectrum(comp)?;
            for (a, x) in acc.iter_mut().zip(d.iter()) {
                *a += if p == 2.0 { x * x } else { x.abs().powf(p) };
            }
        }
        for a in acc.iter_mut() {
            *a = if p == 2.0 { a.sqrt() } else { a.powf(1.0 / p) };
        }
        Ok(acc)
    }

    /// Jacobian of the p-norm modes with respect to component `i`:
    /// `Hn [D(c)^(1/p-1) |D(u_i)|^(p-1) sign(D(u_i))] Hn^T` with `D(c) = sum_j |D(u_j)|^p`.
    pub fn jacobian_pnorm(&self, components: &[&[f64]], p: f64, i: usize) -> Result<DMatrix<f64>> {
        if i >= components.len() {
            return Err(Error::invalid(format!("component {i} out of range")));
        }
        let norm = self.pnorm_spectrum(components, p)?;
        let di = self.to_spectrum(components[i])?;
        let mut g = vec![0.0; self.size()];
        for (cell, (gl, (&nl, &x))) in g.iter_mut().zip(norm.iter().zip(di.iter())).enumerate() {
            if nl <= 0.0 {
                return Err(Error::Admissibility {
                    quantity: "p-norm",
                    cell,
                    value: nl,
                });
            }
            *gl = (x.abs() / nl).powf(p - 1.0) * sign(x);
        }
        self.spectral_jacobian(&g)
    }

    /// Inverse of `u -> u^{*n}` on the semi-positive cone.
    pub fn nth_root_modes(&self, rho: &[f64], n: u32) -> Result<ModeVector> {
        if n < 2 {
            return Err(Error::invalid(format!("root order {n} < 2")));
        }
        let mut d = self.to_spectrum(rho)?;
        for (cell, x) in d.iter_mut().enumerate() {
            if *x < SEMI_POSITIVE_TOL {
                return Err(Error::Admissibility {
                    quantity: "root argument",
                    cell,
                    value: *x,
                });
            }
            *x = x.max(0.0).powf(1.0 / n as f64);
        }
        self.from_spectrum(&d)
    }

    /// Value and gradient of the convex objective
    /// `e^T P(a)^(n+1) e / (n+1) - rho^T a` whose minimiser is the `n`-th
    /// root of `rho` (`e` = modes of the constant 1). The associativity
    /// error term vanishes for Haar-type systems and is not included.
    pub fn convex_root_objective(&self, rho: &[f64], alpha: &[f64], n: u32) -> Result<(f64, ModeVector)> {
        self.check_len(rho)?;
        let p = self.galerkin_matrix(alpha)?;
        let mut power = nalgebra::DVector::from_column_slice(&self.unit);
        for _ in 0..n {
            power = &p * power;
        }
        let grad: Vec<f64> = power.iter().zip(rho).map(|(a, b)| a - b).collect();
        let top = (&p * &power).dot(&nalgebra::DVector::from_column_slice(&self.unit));
        let lin: f64 = rho.iter().zip(alpha).map(|(a, b)| a * b).sum();
        Ok((top / (n as f64 + 1.0) - lin, ModeVector(grad)))
    }

    /// `P(u)^(m-1) u`, the m-th Galerkin power.
    pub fn moment_modes(&self, u: &[f64], m: u32) -> Result<ModeVector> {
        if m < 1 {
            return Err(Error::invalid("moment order must be >= 1"));
        }
        let mut acc = ModeVector(u.to_vec());
        for _ in 1..m {
            acc = self.galerkin_product(u, &acc)?;
        }
        Ok(acc)
    }

    /// Max-norm difference between a central finite-difference evaluation of
    /// `D_a D(a) V^T q` at `a = u` and the exact `V^T P(q)`.
    pub fn eigen_derivative_check(&self, u: &[f64], q: &[f64]) -> Result<f64> {
        self.check_len(u)?;
        let n = self.size();
        let step = 1e-6;
        let vt = self.hn.transpose();
        let vq = &vt * nalgebra::DVector::from_column_slice(q);
        let rhs = &vt * self.galerkin_matrix(q)?;
        let eig = |a: &[f64]| -> Result<Vec<f64>> {
            let p = self.galerkin_matrix(a)?;
            let m = &vt * p * &self.hn;
            Ok((0..n).map(|i| m[(i, i)]).collect())
        };
        let mut worst: f64 = 0.0;
        let mut plus = u.to_vec();
        let mut minus = u.to_vec();
        for j in 0..n {
            plus[j] = u[j] + step;
            minus[j] = u[j] - step;
            let dp = eig(&plus)?;
            let dm = eig(&minus)?;
            plus[j] = u[j];
            minus[j] = u[j];
            for k in 0..n {
                let deriv = (dp[k] - dm[k]) / (2.0 * step);
                worst = worst.max((deriv * vq[k] - rhs[(k, j)]).abs());
            }
        }
        Ok(worst)
    }

    /// Largest pairwise commutator `max_{i<j} |M_i M_j - M_j M_i|_max`.
    pub fn check_commuting(&self) -> CommutationReport {
        let n = self.size();
        let sparse: Vec<Vec<Vec<(usize, f64)>>> = self
            .triple
            .iter()
            .map(|m| {
                (0..n)
                    .map(|r| {
                        (0..n)
                            .filter(|&c| m[(r, c)] != 0.0)
                            .map(|c| (c, m[(r, c)]))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut prod = vec![0.0; n * n];
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                prod.iter_mut().for_each(|x| *x = 0.0);
                // (M_i M_j)^T = M_j M_i, so the commutator is A - A^T.
                for (a, row) in sparse[i].iter().enumerate() {
                    for &(c, x) in row {
                        for &(b, y) in &sparse[j][c] {
                            prod[a * n + b] += x * y;
                        }
                    }
                }
                for a in 0..n {
                    for b in a + 1..n {
                        worst = worst.max((prod[a * n + b] - prod[b * n + a]).abs());
                    }
                }
            }
        }
        CommutationReport {
            commuting: worst < COMMUTATION_TOL,
            worst,
        }
    }

    /// Max-norm of the off-diagonal part of `Hn^T M_k Hn` over all `k`.
    pub fn diagonality_residual(&self) -> f64 {
        let n = self.size();
        let mut worst: f64 = 0.0;
        for m in &self.triple {
            let t = self.hn.transpose() * m * &self.hn;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        worst = worst.max(t[(i, j)].abs());
                    }
                }
            }
        }
        worst
    }

    /// Builds a tensor set from explicit matrices (diagnostics and tests).
    pub fn with_triples(&self, triple: Vec<DMatrix<f64>>) -> Self {
        Self {
            triple,
            ..self.clone()
        }
    }
}

/// `sign` with `sign(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn checked_power(x: f64, gamma: f64, cell: usize) -> Result<f64> {
    if gamma < 0.0 {
        if x <= 0.0 {
            return Err(Error::Admissibility {
                quantity: "power argument",
                cell,
                value: x,
            });
        }
        return Ok(x.powf(gamma));
    }
    if x < SEMI_POSITIVE_TOL {
        return Err(Error::Admissibility {
            quantity: "power argument",
            cell,
            value: x,
        });
    }
    let x = x.max(0.0);
    Ok(if gamma == 1.0 {
        x
    } else if gamma == 2.0 {
        x * x
    } else {
        x.powf(gamma)
    })
}

fn piecewise_constant_triples(h: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let n = h.nrows();
    let mut m = vec![DMatrix::zeros(n, n); n];
    let inv = 1.0 / n as f64;
    // One value per sorted triple, copied to every permutation so the tensor is
    // exactly symmetric in all three indices.
    let mut sums = std::collections::HashMap::<(usize, usize, usize), f64>::new();
    for l in 0..n {
        let nz: Vec<usize> = (0..n).filter(|&r| h[(r, l)] != 0.0).collect();
        for (a, &i) in nz.iter().enumerate() {
            for (b, &j) in nz.iter().enumerate().skip(a) {
                for &k in nz.iter().skip(b) {
                    *sums.entry((i, j, k)).or_insert(0.0) += h[(i, l)] * h[(j, l)] * h[(k, l)];
                }
            }
        }
    }
    for ((i, j, k), s) in sums {
        let v = s * inv;
        for (a, b, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
            m[a][(b, c)] = v;
        }
    }
    m
}

/// Exact triple products of `psi_{k,0} = sqrt(N)`, `psi_{k,1} = sqrt(3N) t`
/// with `t` the local coordinate in [-1, 1] of cell `k`.
fn piecewise_linear_triples(subdomains: usize) -> Vec<DMatrix<f64>> {
    let n = 2 * subdomains;
    let scale = (subdomains as f64).sqrt();
    // E[l_a l_b l_c] for l_0 = 1, l_1 = sqrt(3) t, t ~ U[-1, 1]
    let local = |a: usize, b: usize, c: usize| -> f64 {
        match a + b + c {
            0 => 1.0,
            2 => 1.0,
            _ => 0.0,
        }
    };
    let mut m = vec![DMatrix::zeros(n, n); n];
    for k in 0..subdomains {
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    m[2 * k + a][(2 * k + b, 2 * k + c)] = scale * local(a, b, c);
                }
            }
        }
    }
    m
}
