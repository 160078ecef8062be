//! Haar-type matrices and the wavelet systems they generate on the uniform
//! stochastic domain [0, 1].
//!
//! A piecewise-constant Haar-type matrix `H` has an all-ones first row and
//! mutually orthogonal rows of Euclidean norm `sqrt(K+1)`. Row `k` holds the
//! values of the basis function `phi_k` on the `K+1` equal stochastic cells,
//! so `H / sqrt(K+1)` is orthogonal and its columns are the constant
//! eigenvectors of every stochastic Galerkin matrix built from the system.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest classical Haar level accepted by [`HaarTypeBasis::classical_haar`].
pub const MAX_HAAR_LEVEL: u32 = 12;

const ORTHOGONALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum BasisKind {
    /// Recursive Haar matrix of level `J`, size `2^(J+1)`.
    ClassicalHaar { level: u32 },
    /// Canonical Haar matrix, optionally rotated by an orthogonal block.
    CanonicalHaar { size: usize },
    /// Orthogonal DCT-II matrix with rows scaled to norm `sqrt(size)`.
    Dct { size: usize },
    /// Local Legendre polynomials of degree <= 1 on `subdomains` equal cells.
    PiecewiseLinear { subdomains: usize },
    /// User supplied Haar-type matrix.
    Custom,
    /// Single mode, used for deterministic (sampled) runs.
    Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HaarTypeBasis {
    kind: BasisKind,
    matrix: DMatrix<f64>,
}

impl HaarTypeBasis {
    /// Classical Haar matrix of level `J` with wavelet rows scaled by `2^(j/2)`.
    pub fn classical_haar(level: u32) -> Result<Self> {
        if level > MAX_HAAR_LEVEL {
            return Err(Error::invalid(format!(
                "Haar level {level} exceeds the maximum {MAX_HAAR_LEVEL}"
            )));
        }
        let mut h = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        for j in 1..=level {
            let n = h.nrows();
            let scale = 2f64.powf(0.5 * j as f64);
            let mut next = DMatrix::zeros(2 * n, 2 * n);
            for r in 0..n {
                for c in 0..n {
                    next[(r, 2 * c)] = h[(r, c)];
                    next[(r, 2 * c + 1)] = h[(r, c)];
                }
                next[(n + r, 2 * r)] = scale;
                next[(n + r, 2 * r + 1)] = -scale;
            }
            h = next;
        }
        Ok(Self {
            kind: BasisKind::ClassicalHaar { level },
            matrix: h,
        })
    }

    /// Canonical Haar matrix of the given size.
    pub fn canonical_haar(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::invalid(format!("basis size {size} < 2")));
        }
        let n = size as f64;
        let mut h = DMatrix::zeros(size, size);
        for c in 0..size {
            h[(0, c)] = 1.0;
        }
        for i in 1..size {
            let s = -((size - i) as f64);
            let hr = (n / (s * s - s)).sqrt();
            h[(i, i - 1)] = s * hr;
            for c in i..size {
                h[(i, c)] = hr;
            }
        }
        Ok(Self {
            kind: BasisKind::CanonicalHaar { size },
            matrix: h,
        })
    }

    /// Canonical Haar matrix whose detail rows are mixed by the orthogonal
    /// `K x K` block `rotation`.
    pub fn canonical_haar_rotated(size: usize, rotation: &DMatrix<f64>) -> Result<Self> {
        let base = Self::canonical_haar(size)?;
        let k = size - 1;
        if rotation.nrows() != k || rotation.ncols() != k {
            return Err(Error::Dimension {
                expected: k,
                got: rotation.nrows(),
            });
        }
        let residual = (rotation * rotation.transpose() - DMatrix::identity(k, k)).amax();
        if residual > ORTHOGONALITY_TOL {
            return Err(Error::InvalidBasis(format!(
                "rotation block is not orthogonal (residual {residual:e})"
            )));
        }
        let mut block = DMatrix::identity(size, size);
        block.view_mut((1, 1), (k, k)).copy_from(rotation);
        Ok(Self {
            kind: BasisKind::CanonicalHaar { size },
            matrix: block * base.matrix,
        })
    }

    /// DCT-II matrix with rows scaled so that every row norm is `sqrt(size)`.
    pub fn dct(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::invalid(format!("basis size {size} < 2")));
        }
        let n = size as f64;
        let h = DMatrix::from_fn(size, size, |i, j| {
            if i == 0 {
                1.0
            } else {
                2f64.sqrt() * (PI * i as f64 * (2.0 * j as f64 + 1.0) / (2.0 * n)).cos()
            }
        });
        Ok(Self {
            kind: BasisKind::Dct { size },
            matrix: h,
        })
    }

    /// Piecewise-linear system on `subdomains` cells. The stored matrix is the
    /// block-diagonal orthonormal eigenvector matrix (rows orthonormal).
    pub fn piecewise_linear(subdomains: usize) -> Result<Self> {
        if subdomains < 1 {
            return Err(Error::invalid(
                "piecewise-linear basis needs at least one subdomain",
            ));
        }
        let size = 2 * subdomains;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut h = DMatrix::zeros(size, size);
        for k in 0..subdomains {
            let o = 2 * k;
            h[(o, o)] = r;
            h[(o, o + 1)] = r;
            h[(o + 1, o)] = -r;
            h[(o + 1, o + 1)] = r;
        }
        Ok(Self {
            kind: BasisKind::PiecewiseLinear { subdomains },
            matrix: h,
        })
    }

    /// Any matrix with an all-ones first row and orthogonal rows of norm
    /// `sqrt(K+1)`. Commutation of the derived tensors is checked when the
    /// tensors are built.
    pub fn custom(matrix: DMatrix<f64>) -> Result<Self> {
        let size = matrix.nrows();
        if size < 2 || matrix.ncols() != size {
            return Err(Error::InvalidBasis(format!(
                "expected a square matrix of size >= 2, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.row(0).iter().any(|&v| (v - 1.0).abs() > ORTHOGONALITY_TOL) {
            return Err(Error::InvalidBasis("first row must be all ones".into()));
        }
        let basis = Self {
            kind: BasisKind::Custom,
            matrix,
        };
        let residual = basis.orthogonality_residual();
        if residual > ORTHOGONALITY_TOL {
            return Err(Error::InvalidBasis(format!(
                "rows are not orthogonal with norm sqrt(K+1) (residual {residual:e})"
            )));
        }
        Ok(basis)
    }

    pub fn point() -> Self {
        Self {
            kind: BasisKind::Point,
            matrix: DMatrix::from_element(1, 1, 1.0),
        }
    }

    pub fn kind(&self) -> &BasisKind {
        &self.kind
    }

    /// Number of basis functions `K+1`.
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn is_piecewise_constant(&self) -> bool {
        !matches!(self.kind, BasisKind::PiecewiseLinear { .. })
    }

    /// The orthogonal matrix whose columns are the common eigenvectors.
    pub fn normalized(&self) -> DMatrix<f64> {
        if self.is_piecewise_constant() {
            &self.matrix / (self.size() as f64).sqrt()
        } else {
            self.matrix.clone()
        }
    }

    /// `max |Hn Hn^T - I|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let hn = self.normalized();
        let n = self.size();
        (&hn * hn.transpose() - DMatrix::<f64>::identity(n, n)).amax()
    }

    /// Number of equal stochastic cells on which every basis function is a polynomial.
    pub fn stochastic_cells(&self) -> usize {
        match self.kind {
            BasisKind::PiecewiseLinear { subdomains } => subdomains,
            _ => self.size(),
        }
    }

    /// Edges `0 = e_0 < ... < e_n = 1` of the stochastic cells.
    pub fn cell_edges(&self) -> Vec<f64> {
        let n = self.stochastic_cells();
        (0..=n).map(|i| i as f64 / n as f64).collect()
    }

    /// Stochastic coordinates associated with the spectrum entries: cell
    /// midpoints for piecewise-constant systems, the two local Gauss nodes per
    /// cell for the piecewise-linear system.
    pub fn spectral_nodes(&self) -> Vec<f64> {
        match self.kind {
            BasisKind::PiecewiseLinear { subdomains } => {
                let n = subdomains as f64;
                let g = 1.0 / 3f64.sqrt();
                (0..subdomains)
                    .flat_map(|k| {
                        let mid = (k as f64 + 0.5) / n;
                        [mid - 0.5 * g / n, mid + 0.5 * g / n]
                    })
                    .collect()
            }
            _ => {
                let n = self.size() as f64;
                (0..self.size()).map(|l| (l as f64 + 0.5) / n).collect()
            }
        }
    }

    /// Value of the `k`-th basis function at `xi` in `[0, 1)`.
    pub fn evaluate(&self, k: usize, xi: f64) -> Result<f64> {
        let size = self.size();
        if k >= size {
            return Err(Error::invalid(format!("basis index {k} out of range 0..{size}")));
        }
        if !(0.0..1.0).contains(&xi) {
            return Err(Error::invalid(format!("xi = {xi} outside [0, 1)")));
        }
        Ok(self.evaluate_unchecked(k, xi))
    }

    pub(crate) fn evaluate_unchecked(&self, k: usize, xi: f64) -> f64 {
        match self.kind {
            BasisKind::PiecewiseLinear { subdomains } => {
                let n = subdomains as f64;
                let cell = ((xi * n) as usize).min(subdomains - 1);
                if k / 2 != cell {
                    return 0.0;
                }
                if k % 2 == 0 {
                    n.sqrt()
                } else {
                    let local = 2.0 * (xi * n - cell as f64) - 1.0;
                    (3.0 * n).sqrt() * local
                }
            }
            _ => {
                let size = self.size();
                let cell = ((xi * size as f64) as usize).min(size - 1);
                self.matrix[(k, cell)]
            }
        }
    }

    /// Values of all basis functions at `xi`.
    pub fn evaluate_all(&self, xi: f64, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.evaluate_unchecked(k, xi);
        }
    }

    /// Short label used in file names and reports.
    pub fn label(&self) -> String {
        match &self.kind {
            BasisKind::ClassicalHaar { level } => format!("haar-J{level}"),
            BasisKind::CanonicalHaar { size } => format!("canonical-{size}"),
            BasisKind::Dct { size } => format!("dct-{size}"),
            BasisKind::PiecewiseLinear { subdomains } => format!("pwlinear-{subdomains}"),
            BasisKind::Custom => format!("custom-{}", self.size()),
            BasisKind::Point => "point".to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-14
    }

    #[test]
    fn haar_level_zero_matches_recursion_seed() {
        let b = HaarTypeBasis::classical_haar(0).unwrap();
        assert_eq!(
            b.matrix().as_slice(),
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]).as_slice()
        );
    }

    #[test]
    fn haar_level_one_rows_are_rescaled() {
        let b = HaarTypeBasis::classical_haar(1).unwrap();
        let s = 2f64.sqrt();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 1.0, 1.0, 1.0, //
                1.0, 1.0, -1.0, -1.0, //
                s, -s, 0.0, 0.0, //
                0.0, 0.0, s, -s,
            ],
        );
        assert!((b.matrix() - expected).amax() < 1e-15);
        let gram = b.matrix() * b.matrix().transpose();
        assert!((gram - DMatrix::identity(4, 4) * 4.0).amax() < 1e-12);
    }

    #[test]
    fn haar_level_two_is_orthogonal() {
        let b = HaarTypeBasis::classical_haar(2).unwrap();
        assert_eq!(b.size(), 8);
        let gram = b.matrix() * b.matrix().transpose();
        assert!((gram - DMatrix::identity(8, 8) * 8.0).amax() < 1e-12);
    }

    #[test]
    fn haar_level_out_of_range() {
        assert!(HaarTypeBasis::classical_haar(13).is_err());
    }

    #[test]
    fn canonical_size_two() {
        let b = HaarTypeBasis::canonical_haar(2).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0]);
        assert!((b.matrix() - expected).amax() < 1e-15);
    }

    #[test]
    fn canonical_rows_have_equal_norm_and_are_orthogonal() {
        for size in 2..=9 {
            let b = HaarTypeBasis::canonical_haar(size).unwrap();
            assert!(b.orthogonality_residual() < 1e-12, "size {size}");
            let h = b.matrix();
            for r in 1..size {
                for c in 0..r - 1 {
                    assert_eq!(h[(r, c)], 0.0);
                }
            }
        }
        assert!(HaarTypeBasis::canonical_haar(1).is_err());
    }

    #[test]
    fn rotated_canonical_rejects_non_orthogonal_block() {
        let bad = DMatrix::from_element(2, 2, 1.0);
        assert!(HaarTypeBasis::canonical_haar_rotated(3, &bad).is_err());
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let b = HaarTypeBasis::canonical_haar_rotated(3, &rot).unwrap();
        assert!(b.orthogonality_residual() < 1e-12);
        assert!(b.matrix().row(0).iter().all(|&v| v == 1.0));
    }

    #[test]
    fn dct_first_row_ones_and_orthogonal() {
        for size in [2, 3, 4, 8, 16] {
            let b = HaarTypeBasis::dct(size).unwrap();
            assert!(b.matrix().row(0).iter().all(|&v| v == 1.0));
            let gram = b.matrix() * b.matrix().transpose();
            let n = size as f64;
            assert!((gram - DMatrix::identity(size, size) * n).amax() < 1e-12);
        }
    }

    #[test]
    fn piecewise_linear_rows_orthonormal() {
        for n in 1..=4 {
            let b = HaarTypeBasis::piecewise_linear(n).unwrap();
            assert_eq!(b.size(), 2 * n);
            assert!(b.orthogonality_residual() < 1e-15);
        }
        assert!(HaarTypeBasis::piecewise_linear(0).is_err());
    }

    #[test]
    fn custom_validation() {
        let ok = HaarTypeBasis::custom(HaarTypeBasis::dct(4).unwrap().matrix().clone());
        assert!(ok.is_ok());
        let mut bad = HaarTypeBasis::dct(4).unwrap().matrix().clone();
        bad[(1, 1)] += 1e-3;
        assert!(matches!(HaarTypeBasis::custom(bad), Err(Error::InvalidBasis(_))));
    }

    #[test]
    fn wavelet_evaluation_examples() {
        let j0 = HaarTypeBasis::classical_haar(0).unwrap();
        assert_eq!(j0.evaluate(0, 0.3).unwrap(), 1.0);
        assert_eq!(j0.evaluate(1, 0.7).unwrap(), -1.0);
        let j1 = HaarTypeBasis::classical_haar(1).unwrap();
        assert!(close(j1.evaluate(2, 0.1).unwrap(), 2f64.sqrt()));
        assert!(j1.evaluate(4, 0.1).is_err());
        assert!(j1.evaluate(0, 1.0).is_err());
    }

    #[test]
    fn evaluation_at_midpoints_reproduces_rows() {
        let b = HaarTypeBasis::classical_haar(3).unwrap();
        let nodes = b.spectral_nodes();
        for k in 0..b.size() {
            for (l, &xi) in nodes.iter().enumerate() {
                assert_eq!(b.evaluate(k, xi).unwrap(), b.matrix()[(k, l)]);
            }
        }
    }

    #[test]
    fn uniform_measure_orthonormality() {
        for b in [
            HaarTypeBasis::classical_haar(4).unwrap(),
            HaarTypeBasis::dct(8).unwrap(),
            HaarTypeBasis::canonical_haar(5).unwrap(),
        ] {
            let n = b.size();
            let h = b.matrix();
            for i in 0..n {
                for j in 0..n {
                    let ip: f64 = (0..n).map(|l| h[(i, l)] * h[(j, l)]).sum::<f64>() / n as f64;
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn piecewise_linear_local_functions() {
        let b = HaarTypeBasis::piecewise_linear(2).unwrap();
        // cell 1 spans [0.5, 1); its linear function vanishes at the center
        assert!(b.evaluate(3, 0.75).unwrap().abs() < 1e-15);
        assert!(close(b.evaluate(2, 0.9).unwrap(), 2f64.sqrt()));
        assert_eq!(b.evaluate(0, 0.9).unwrap(), 0.0);
        // local linear function at the right Gauss node equals sqrt(N)
        let nodes = b.spectral_nodes();
        assert!(close(b.evaluate(1, nodes[1]).unwrap(), 2f64.sqrt()));
    }
}
