//! Minimax linear-program oracle for equiripple designs, solved on the same
//! dense grid rule as the exchange.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

/// Grid points per band: uniform, both edges, spacing at most 0.5 / (16 * taps).
pub fn grid(bands: &[(f64, f64, f64, f64)], taps: usize) -> Vec<(f64, f64, f64)> {
    let step = 0.5 / (16 * taps) as f64;
    let mut out = Vec::new();
    for &(lo, hi, d, w) in bands {
        let n = ((hi - lo) / step).ceil().max(1.0) as usize;
        for i in 0..=n {
            let f = if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 };
            out.push((f, d, w));
        }
    }
    out
}

/// Cosine basis: A(f) = c0 + sum_k 2 c_k cos(2 pi k f), with c_k = h[M - k].
fn basis(f: f64, m: usize) -> Vec<f64> {
    (0..=m)
        .map(|k| if k == 0 { 1.0 } else { 2.0 * (2.0 * std::f64::consts::PI * k as f64 * f).cos() })
        .collect()
}

/// Minimizes max |W (D - A)| over the grid; returns (taps, ripple).
pub fn lp_minimax(bands: &[(f64, f64, f64, f64)], taps: usize) -> (Vec<f64>, f64) {
    let m = (taps - 1) / 2;
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let c: Vec<_> = (0..=m).map(|_| p.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let delta = p.add_var(1.0, (0.0, f64::INFINITY));
    for (f, d, w) in grid(bands, taps) {
        let b = basis(f, m);
        // w (d - A) <= delta  and  -w (d - A) <= delta
        let mut upper: Vec<_> = c.iter().zip(&b).map(|(&v, &bk)| (v, -w * bk)).collect();
        upper.push((delta, -1.0));
        p.add_constraint(&upper, ComparisonOp::Le, -w * d);
        let mut lower: Vec<_> = c.iter().zip(&b).map(|(&v, &bk)| (v, w * bk)).collect();
        lower.push((delta, -1.0));
        p.add_constraint(&lower, ComparisonOp::Le, w * d);
    }
    let sol = p.solve().expect("LP solves");
    let coeffs: Vec<f64> = c.iter().map(|&v| sol[v]).collect();
    let mut h = vec![0.0; taps];
    for k in 0..=m {
        h[m + k] = coeffs[k];
        h[m - k] = coeffs[k];
    }
    (h, sol[delta])
}
