//! One-dimensional quadrature: adaptive Gauss–Kronrod for smooth integrands
//! and Gauss–Legendre node generation for tensor grids.

use crate::error::{Error, Result};

// 15-point Kronrod nodes/weights on [-1, 1] with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7-15 pass over [a, b]; returns (estimate, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut res_k = 0.0;
    let mut res_g = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let (fl, fr) = if x == 0.0 {
            let v = f(c);
            (v, 0.0)
        } else {
            (f(c - h * x), f(c + h * x))
        };
        let sum = fl + fr;
        res_k += wk * sum;
        if i % 2 == 1 {
            res_g += WG[i / 2] * sum;
        }
    }
    let integral = res_k * h;
    let err = ((res_k - res_g) * h).abs();
    (integral, err)
}

/// Adaptive bisection around GK15. Tolerance is relative to the accumulated
/// integral with an absolute floor, so integrals that are legitimately tiny
/// do not force endless refinement.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_floor: f64) -> Result<f64> {
    const MAX_DEPTH: u32 = 48;
    const MAX_INTERVALS: usize = 20_000;

    let mut stack: Vec<(f64, f64, u32)> = vec![(a, b, 0)];
    let mut total = 0.0;
    let mut scale = 0.0f64;
    let mut processed = 0usize;

    while let Some((lo, hi, depth)) = stack.pop() {
        processed += 1;
        if processed > MAX_INTERVALS {
            return Err(Error::QuadratureFailure(format!(
                "interval budget exhausted on [{a}, {b}]"
            )));
        }
        let (est, err) = gk15(f, lo, hi);
        scale = scale.max(est.abs());
        let tol = (rel_tol * scale.max(est.abs())).max(abs_floor);
        if err <= tol * ((hi - lo) / (b - a)).max(1e-6) || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH && err > 1e3 * tol {
                return Err(Error::QuadratureFailure(format!(
                    "refinement cap reached on [{lo}, {hi}], err = {err:.3e}"
                )));
            }
            total += est;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    Ok(total)
}

/// Convenience wrapper with the default kernel tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    adaptive(f, a, b, rel_tol, 1e-300)
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (
        x.iter().map(|&xi| c + h * xi).collect(),
        w.iter().map(|&wi| h * wi).collect(),
    )
}

/// Quadrature rule on the unit sphere S^{d-1} in R^d: unit direction vectors
/// and weights summing to the sphere area.
///
/// d = 2 uses n uniform midpoints on the circle (exact for trigonometric
/// polynomials of degree < n); d = 3 tensors an n-point Gauss-Legendre rule
/// in the polar cosine with 2n uniform azimuths. Higher d is not needed by
/// the experiments and is rejected.
pub fn sphere_rule(d: u32, n: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let tau = 2.0 * std::f64::consts::PI;
    match d {
        2 => {
            let mut nodes = Vec::with_capacity(n);
            let mut weights = Vec::with_capacity(n);
            for j in 0..n {
                let a = tau * (j as f64 + 0.5) / n as f64;
                nodes.push(vec![a.cos(), a.sin()]);
                weights.push(tau / n as f64);
            }
            Ok((nodes, weights))
        }
        3 => {
            let (mu, wmu) = gauss_legendre(n);
            let m = 2 * n;
            let mut nodes = Vec::with_capacity(n * m);
            let mut weights = Vec::with_capacity(n * m);
            for (u, wu) in mu.iter().zip(&wmu) {
                let s = (1.0 - u * u).max(0.0).sqrt();
                for j in 0..m {
                    let a = tau * (j as f64 + 0.5) / m as f64;
                    nodes.push(vec![*u, s * a.cos(), s * a.sin()]);
                    weights.push(wu * tau / m as f64);
                }
            }
            Ok((nodes, weights))
        }
        _ => Err(Error::InvalidInput(format!(
            "sphere quadrature implemented for d = 2, 3 only, got {d}"
        ))),
    }
}

/// Trapezoid rule on an arbitrary increasing grid.
pub fn trapezoid(nodes: &[f64], values: &[f64]) -> f64 {
    assert_eq!(nodes.len(), values.len());
    let mut s = 0.0;
    for i in 1..nodes.len() {
        s += 0.5 * (values[i] + values[i - 1]) * (nodes[i] - nodes[i - 1]);
    }
    s
}

/// Quadrature weights of a midpoint rule whose cells are centered on the
/// nodes and tile the grid; on uniform grids every weight is the spacing h.
/// Matches the finite-volume discretization of the solver module, so sums
/// with these weights reproduce its conserved mass exactly.
pub fn midpoint_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            if i == 0 {
                nodes[1] - nodes[0]
            } else if i == n - 1 {
                nodes[n - 1] - nodes[n - 2]
            } else {
                0.5 * (nodes[i + 1] - nodes[i - 1])
            }
        })
        .collect()
}
