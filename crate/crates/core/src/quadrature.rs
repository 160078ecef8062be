//! Gauss–Legendre rules on the reference interval [-1, 1].

/// Two-point rule, exact for cubics.
pub const GAUSS2_NODES: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];
pub const GAUSS2_WEIGHTS: [f64; 2] = [1.0, 1.0];

pub const GAUSS5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
pub const GAUSS5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Integral of `f` over `[a, b]` with the five-point rule.
pub fn gauss5(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Nodes and weights of the composite five-point rule on `[a, b]` with `panels`
/// equal panels, additionally split at every breakpoint strictly inside `(a, b)`.
pub fn composite_gauss5(a: f64, b: f64, panels: usize, breakpoints: &[f64]) -> Vec<(f64, f64)> {
    let mut edges: Vec<f64> = (0..=panels)
        .map(|p| a + (b - a) * p as f64 / panels as f64)
        .collect();
    for &bp in breakpoints {
        if bp > a && bp < b {
            edges.push(bp);
        }
    }
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.dedup_by(|x, y| (*x - *y).abs() <= 1e-15);

    let mut out = Vec::with_capacity(5 * (edges.len() - 1));
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (x, wt) in GAUSS5_NODES.iter().zip(GAUSS5_WEIGHTS.iter()) {
            out.push((mid + half * x, wt * half));
        }
    }
    out
}
