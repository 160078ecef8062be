//! Third-order CWENO reconstruction on uniform cells.
//!
//! Coordinates are local to the reconstructed cell and scaled to `[-1/2, 1/2]`.

use crate::quadrature::GAUSS2_NODES;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwenoParams {
    pub epsilon: f64,
    pub power: i32,
}

impl Default for CwenoParams {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            power: 2,
        }
    }
}

impl CwenoParams {
    #[inline]
    fn alpha(&self, d: f64, beta: f64) -> f64 {
        d / (self.epsilon + beta).powi(self.power)
    }
}

pub const D_CENTRAL: f64 = 0.5;
pub const D_SIDE_1D: f64 = 0.25;
pub const D_SECTOR_2D: f64 = 0.125;

/// Values at the left (`x = -1/2`) and right (`x = +1/2`) interfaces of the
/// middle cell of the stencil `(um, u0, up)`.
pub fn cweno3_reconstruct_1d(um: f64, u0: f64, up: f64, params: &CwenoParams) -> (f64, f64) {
    if um == u0 && u0 == up {
        return (u0, u0);
    }
    let c1 = 0.5 * (up - um);
    let c2 = 0.5 * (up - 2.0 * u0 + um);
    let (dl, dr) = (u0 - um, up - u0);

    let opt = (u0 - 0.5 * c1 + c2 / 6.0, u0 + 0.5 * c1 + c2 / 6.0);
    let pl = (u0 - 0.5 * dl, u0 + 0.5 * dl);
    let pr = (u0 - 0.5 * dr, u0 + 0.5 * dr);
    let p0 = (
        (opt.0 - D_SIDE_1D * (pl.0 + pr.0)) / D_CENTRAL,
        (opt.1 - D_SIDE_1D * (pl.1 + pr.1)) / D_CENTRAL,
    );

    let ac = params.alpha(D_CENTRAL, c1 * c1 + 13.0 / 3.0 * c2 * c2);
    let al = params.alpha(D_SIDE_1D, dl * dl);
    let ar = params.alpha(D_SIDE_1D, dr * dr);
    let s = ac + al + ar;
    let (wc, wl, wr) = (ac / s, al / s, ar / s);
    (
        wc * p0.0 + wl * pl.0 + wr * pr.0,
        wc * p0.1 + wl * pl.1 + wr * pr.1,
    )
}

/// Number of reconstruction points per cell in 2D.
pub const FACE_POINTS: usize = 8;

/// Face points in the order east (2), west (2), north (2), south (2); along
/// each face the two Gauss nodes are ordered by increasing coordinate.
pub fn face_points() -> [(f64, f64); FACE_POINTS] {
    let g = 0.5 * GAUSS2_NODES[1];
    [
        (0.5, -g),
        (0.5, g),
        (-0.5, -g),
        (-0.5, g),
        (-g, 0.5),
        (g, 0.5),
        (-g, -0.5),
        (g, -0.5),
    ]
}

pub const EAST: usize = 0;
pub const WEST: usize = 2;
pub const NORTH: usize = 4;
pub const SOUTH: usize = 6;

// Stencil index of the cell with offsets (a, b) in {-1, 0, 1}^2.
#[inline]
fn sidx(a: i32, b: i32) -> usize {
    ((b + 1) * 3 + (a + 1)) as usize
}

const SECTORS: [(i32, i32); 4] = [(1, 1), (-1, 1), (-1, -1), (1, -1)];

// 1D Gram matrices over [-1/2, 1/2] of a quadratic's coefficients (c0, c1, c2):
// the value itself, and the sum over derivatives of order 0, 1 and 2.
const GRAM0: [[f64; 3]; 3] = [
    [1.0, 0.0, 1.0 / 12.0],
    [0.0, 1.0 / 12.0, 0.0],
    [1.0 / 12.0, 0.0, 1.0 / 80.0],
];
const GRAM_ALL: [[f64; 3]; 3] = [
    [1.0, 0.0, 1.0 / 12.0],
    [0.0, 13.0 / 12.0, 0.0],
    [1.0 / 12.0, 0.0, 1.0 / 80.0 + 1.0 / 3.0 + 4.0],
];

/// Coefficients `(c0, c1, c2)` of the quadratic with averages `(um, u0, up)`
/// on the cells centred at -1, 0 and 1.
#[inline]
fn quadratic(um: f64, u0: f64, up: f64) -> [f64; 3] {
    let c2 = 0.5 * (up - 2.0 * u0 + um);
    [u0 - c2 / 12.0, 0.5 * (up - um), c2]
}

/// `sum a[p][q] a[r][s] A[p][r] B[q][s]` for the Gram matrices above, which
/// share their sparsity pattern.
#[inline]
fn tensor_form(a: &[[f64; 3]; 3], ga: &[[f64; 3]; 3], gb: &[[f64; 3]; 3]) -> f64 {
    let f = |x: &[f64; 3], y: &[f64; 3]| {
        gb[0][0] * x[0] * y[0]
            + gb[0][2] * (x[0] * y[2] + x[2] * y[0])
            + gb[1][1] * x[1] * y[1]
            + gb[2][2] * x[2] * y[2]
    };
    ga[0][0] * f(&a[0], &a[0])
        + 2.0 * ga[0][2] * f(&a[0], &a[2])
        + ga[1][1] * f(&a[1], &a[1])
        + ga[2][2] * f(&a[2], &a[2])
}

/// Biquadratic with the nine cell averages of the stencil: `a[p][q]` is the
/// coefficient of `x^p y^q`.
fn biquadratic(u: &[f64; 9]) -> [[f64; 3]; 3] {
    let rows = [
        quadratic(u[0], u[1], u[2]),
        quadratic(u[3], u[4], u[5]),
        quadratic(u[6], u[7], u[8]),
    ];
    let mut a = [[0.0; 3]; 3];
    for p in 0..3 {
        let col = quadratic(rows[0][p], rows[1][p], rows[2][p]);
        a[p] = col;
    }
    a
}

#[inline]
fn eval_biquadratic(a: &[[f64; 3]; 3], x: f64, y: f64) -> f64 {
    let row = |p: usize| a[p][0] + y * (a[p][1] + y * a[p][2]);
    row(0) + x * (row(1) + x * row(2))
}

/// Values at the two Gauss points of each face of the middle cell of a 3x3
/// stencil. `u[(b + 1) * 3 + (a + 1)]` is the average of the cell offset by
/// `a` in x and `b` in y. Output order follows [`face_points`].
pub fn cweno3_reconstruct_2d(u: &[f64; 9], params: &CwenoParams) -> [f64; FACE_POINTS] {
    let u00 = u[sidx(0, 0)];
    if u.iter().all(|&v| v == u00) {
        return [u00; FACE_POINTS];
    }
    let a = biquadratic(u);
    let beta_c = tensor_form(&a, &GRAM_ALL, &GRAM_ALL) - tensor_form(&a, &GRAM0, &GRAM0);

    let mut sectors = [[0.0; 3]; 4];
    let mut alphas = [0.0; 4];
    for (s, &(sx, sy)) in SECTORS.iter().enumerate() {
        let ux = u[sidx(sx, 0)];
        let uy = u[sidx(0, sy)];
        let uxy = u[sidx(sx, sy)];
        let (fsx, fsy) = (sx as f64, sy as f64);
        let b = fsx * (ux - u00);
        let c = fsy * (uy - u00);
        let d = fsx * fsy * (uxy - ux - uy + u00);
        sectors[s] = [b, c, d];
        alphas[s] = params.alpha(D_SECTOR_2D, b * b + c * c + 7.0 / 6.0 * d * d);
    }
    let ac = params.alpha(D_CENTRAL, beta_c);
    let total = ac + alphas.iter().sum::<f64>();
    let wc = ac / total;

    // wc * P0 + sum_s w_s p_s = (wc / d_C) P_opt + sum_s (w_s - wc d_s / d_C) p_s,
    // and the sum of bilinear sector polynomials is again bilinear
    let scale = wc / D_CENTRAL;
    let mut lin = [u00 * (1.0 - scale), 0.0, 0.0, 0.0];
    for s in 0..4 {
        let k = alphas[s] / total - scale * D_SECTOR_2D;
        for m in 0..3 {
            lin[m + 1] += k * sectors[s][m];
        }
    }
    let mut out = [0.0; FACE_POINTS];
    for (o, &(x, y)) in out.iter_mut().zip(&face_points()) {
        *o = scale * eval_biquadratic(&a, x, y) + lin[0] + lin[1] * x + lin[2] * y + lin[3] * x * y;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> CwenoParams {
        CwenoParams::default()
    }

    #[test]
    fn reproduces_constants_and_lines_1d() {
        assert_eq!(cweno3_reconstruct_1d(2.5, 2.5, 2.5, &params()), (2.5, 2.5));
        let (l, r) = cweno3_reconstruct_1d(0.7 - 0.3, 0.7, 0.7 + 0.3, &params());
        assert!((l - 0.55).abs() < 1e-15 && (r - 0.85).abs() < 1e-15);
    }

    #[test]
    fn third_order_interface_values_1d() {
        // cell averages of sin on cells of width h centred at 1
        let err = |h: f64| {
            let avg = |c: f64| ((c - h / 2.0).cos() - (c + h / 2.0).cos()) / h;
            let (_, r) = cweno3_reconstruct_1d(avg(1.0 - h), avg(1.0), avg(1.0 + h), &params());
            (r - (1.0 + h / 2.0).sin()).abs()
        };
        let order = (err(0.02) / err(0.01)).log2();
        assert!(order > 2.7, "order {order}");
    }

    #[test]
    fn reproduces_constants_and_planes_2d() {
        assert_eq!(cweno3_reconstruct_2d(&[1.5; 9], &params()), [1.5; FACE_POINTS]);
        let (a, b, c) = (0.3, -0.8, 2.0);
        let mut u = [0.0; 9];
        for j in -1..=1 {
            for i in -1..=1 {
                u[sidx(i, j)] = a * i as f64 + b * j as f64 + c;
            }
        }
        let out = cweno3_reconstruct_2d(&u, &params());
        for (v, (x, y)) in out.iter().zip(face_points()) {
            assert!((v - (a * x + b * y + c)).abs() < 1e-14);
        }
    }

    #[test]
    fn central_polynomial_reproduces_biquadratics() {
        // averages of x^2 y^2 over unit cells centred at (a, b)
        let m2 = |a: f64| a * a + 1.0 / 12.0;
        let mut u = [0.0; 9];
        for j in -1..=1 {
            for i in -1..=1 {
                u[sidx(i, j)] = m2(i as f64) * m2(j as f64);
            }
        }
        let a = biquadratic(&u);
        for (x, y) in face_points() {
            assert!((eval_biquadratic(&a, x, y) - x * x * y * y).abs() < 1e-14);
        }
    }

    #[test]
    fn central_indicator_matches_quadrature() {
        // sum over derivatives (mx, my) != (0, 0), mx, my <= 2, of the squared
        // integral, by a 3x3 Gauss rule on the cell
        let u = [0.3, 1.1, -0.4, 2.0, 0.7, 0.9, -1.2, 0.5, 1.6];
        let a = biquadratic(&u);
        let d = |c: [f64; 3], m: usize, x: f64| match m {
            0 => c[0] + c[1] * x + c[2] * x * x,
            1 => c[1] + 2.0 * c[2] * x,
            _ => 2.0 * c[2],
        };
        let nodes = [-(0.6f64).sqrt() / 2.0, 0.0, (0.6f64).sqrt() / 2.0];
        let w = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
        let mut expected = 0.0;
        for mx in 0..3 {
            for my in 0..3 {
                if mx + my == 0 {
                    continue;
                }
                for (i, &x) in nodes.iter().enumerate() {
                    for (j, &y) in nodes.iter().enumerate() {
                        let mut v = 0.0;
                        for p in 0..3 {
                            let mut e = [0.0; 3];
                            e[p] = 1.0;
                            v += d(e, mx, x) * d(a[p], my, y);
                        }
                        expected += w[i] * w[j] * v * v;
                    }
                }
            }
        }
        let got = tensor_form(&a, &GRAM_ALL, &GRAM_ALL) - tensor_form(&a, &GRAM0, &GRAM0);
        assert!(
            (got - expected).abs() < 1e-12 * expected.abs().max(1.0),
            "{got} vs {expected}"
        );
    }
}
