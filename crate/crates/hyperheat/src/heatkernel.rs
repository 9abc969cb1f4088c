//! The heat kernel G_d(t, r) on hyperbolic space.
//!
//! d = 3 has a closed form; d = 2 is a one-dimensional integral with an
//! inverse-square-root endpoint singularity removed by the substitution
//! s = r + w^2. Higher dimensions come from the recurrence
//! G_{d+2}(t, r) = -e^{-dt} dG_d/dr / (2 pi sinh r), applied analytically
//! along the odd chain (d = 5, 7) and by differentiation under the integral
//! sign along the even chain (d = 4, 6). The chain is capped at d = 7.
//!
//! Everything is computed internally with the dominant exponentials factored
//! out, so log-space values stay meaningful far into the Gaussian tail.

use crate::error::{Error, Result};
use crate::hypgeo::{self, Dimension};
use crate::quad;

const LN_4PI: f64 = 2.531_024_246_969_291; // ln(4 pi)
pub const MAX_DIMENSION: u32 = 7;

/// Evaluation strategy for G_d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMethod {
    ClosedFormD3,
    QuadratureD2,
    /// Recurrence chain starting from d_base in {2, 3}.
    RecurrenceFrom(u32),
}

/// Dimension plus evaluation strategy for the kernel.
#[derive(Debug, Clone, Copy)]
pub struct KernelSpec {
    pub d: Dimension,
    pub method: KernelMethod,
    pub quad_tolerance: f64,
}

impl KernelSpec {
    /// Default method for a dimension: closed form / quadrature for d in
    /// {2, 3}, the matching-parity recurrence chain for 4 <= d <= 7.
    pub fn for_dimension(d: Dimension) -> Result<Self> {
        let method = match d.get() {
            2 => KernelMethod::QuadratureD2,
            3 => KernelMethod::ClosedFormD3,
            4 | 6 => KernelMethod::RecurrenceFrom(2),
            5 | 7 => KernelMethod::RecurrenceFrom(3),
            _ => {
                return Err(Error::UnsupportedDimension {
                    d: d.get(),
                    max: MAX_DIMENSION,
                })
            }
        };
        Ok(KernelSpec {
            d,
            method,
            quad_tolerance: 1e-10,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d.get();
        match self.method {
            KernelMethod::ClosedFormD3 if d == 3 => Ok(()),
            KernelMethod::QuadratureD2 if d == 2 => Ok(()),
            KernelMethod::RecurrenceFrom(base) if (base == 2 || base == 3) && d % 2 == base % 2 && d <= MAX_DIMENSION => Ok(()),
            _ => Err(Error::InvalidInput(format!(
                "kernel method {:?} is inconsistent with d = {d}",
                self.method
            ))),
        }
    }
}

/// Kernel evaluator; all paths expose ln G_d, with a linear wrapper that
/// underflows to zero.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    spec: KernelSpec,
}

impl Kernel {
    pub fn new(spec: KernelSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Kernel { spec })
    }

    pub fn for_dimension(d: Dimension) -> Result<Self> {
        Ok(Kernel {
            spec: KernelSpec::for_dimension(d)?,
        })
    }

    pub fn dimension(&self) -> Dimension {
        self.spec.d
    }

    pub fn eval_ln(&self, t: f64, r: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::NonPositiveTime(t));
        }
        if r < 0.0 {
            return Err(Error::InvalidInput(format!("radius must be >= 0, got {r}")));
        }
        let tol = self.spec.quad_tolerance;
        match (self.spec.d.get(), self.spec.method) {
            (3, _) => Ok(ln_g3(t, r)),
            (2, _) => ln_g2(t, r, tol),
            (5, _) => Ok(ln_g5(t, r)),
            (7, _) => Ok(ln_g7(t, r)),
            (4, _) => ln_g4(t, r, tol),
            (6, _) => ln_g6(t, r, tol),
            (d, _) => Err(Error::UnsupportedDimension { d, max: MAX_DIMENSION }),
        }
    }

    pub fn eval(&self, t: f64, r: f64) -> Result<f64> {
        Ok(self.eval_ln(t, r)?.exp())
    }
}

/// ln(r / sinh r), continuous through r = 0.
fn ln_r_over_sinh(r: f64) -> f64 {
    if r < 1e-4 {
        -(r * r / 6.0 + 7.0 * r.powi(4) / 360.0).ln_1p()
    } else {
        r.ln() - hypgeo::ln_sinh(r)
    }
}

/// ln G_3(t, r) = -3/2 ln(4 pi t) + ln(r / sinh r) - t - r^2 / 4t.
pub fn ln_g3(t: f64, r: f64) -> f64 {
    -1.5 * (LN_4PI + t.ln()) + ln_r_over_sinh(r) - t - r * r / (4.0 * t)
}

/// Two-sided envelope h_d(t, r).
pub fn ln_envelope_hd(d: Dimension, t: f64, r: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::NonPositiveTime(t));
    }
    let df = d.as_f64();
    let q = r + (df - 1.0) * t;
    Ok(-0.5 * df * (LN_4PI + t.ln())
        + 0.5 * (df - 3.0) * (1.0 + r + t).ln()
        + (1.0 + r).ln()
        - q * q / (4.0 * t))
}

pub fn envelope_hd(d: Dimension, t: f64, r: f64) -> Result<f64> {
    Ok(ln_envelope_hd(d, t, r)?.exp())
}

// ---------------------------------------------------------------------------
// d = 2 family: G_2 and its first two r-derivatives under the integral sign.
//
// After s = r + w^2 the integrand is F(w) = 2 s E / sqrt(g) with
//   E = exp(-s^2/4t),
//   g(w, r) = (cosh s - cosh r) / w^2 = 2 sinh(w^2/2) sinh(r + w^2/2) / w^2,
// smooth in w on [0, W]. We factor exp(-r^2/4t - r/2) out of F, F', F'' so
// the numerical integrals stay O(1) deep in the tail.
// ---------------------------------------------------------------------------

/// sinh(x)/x, stable near zero.
fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

struct G2Parts {
    /// rescaled integrand value, first and second r-derivative
    f0: f64,
    f1: f64,
    f2: f64,
}

/// Rescaled integrand pieces at (w, r, t): true F^{(k)} = e^{-r^2/4t - r/2} * fk.
fn g2_integrand(w: f64, r: f64, t: f64, derivatives: bool) -> G2Parts {
    let h = w * w;
    let s = r + h;
    // g * e^{-r}: 2 sinh(h/2) sinh(r + h/2) e^{-r} / h
    let half = 0.5 * h;
    let sh_half = half * sinhc(half); // sinh(h/2)
    let sinh_shift_scaled = if r > 20.0 {
        // sinh(r + h/2) e^{-r} = (e^{h/2} - e^{-2r - h/2}) / 2
        0.5 * (half.exp() - (-2.0 * r - half).exp())
    } else {
        (r + half).sinh() * (-r).exp()
    };
    let g_hat = 2.0 * sh_half * sinh_shift_scaled / h.max(f64::MIN_POSITIVE);
    let g_hat = if h < 1e-14 {
        // limit h -> 0 of 2 sinh(h/2) sinh(r + h/2) e^{-r} / h
        if r > 20.0 { 0.5 } else { r.sinh() * (-r).exp() }
    } else {
        g_hat
    };
    let e_hat = (-(s * s - r * r) / (4.0 * t)).exp();
    let inv_sqrt_g = g_hat.sqrt().recip();
    let f0 = 2.0 * s * e_hat * inv_sqrt_g;
    if !derivatives {
        return G2Parts { f0, f1: 0.0, f2: 0.0 };
    }
    // dg/dr * e^{-r} and d2g/dr2 * e^{-r}
    let cosh_shift_scaled = if r > 20.0 {
        0.5 * (half.exp() + (-2.0 * r - half).exp())
    } else {
        (r + half).cosh() * (-r).exp()
    };
    let (g1_hat, g2_hat) = if h < 1e-14 {
        let c = if r > 20.0 { 0.5 } else { r.cosh() * (-r).exp() };
        (c, g_hat)
    } else {
        (
            2.0 * sh_half * cosh_shift_scaled / h,
            2.0 * sh_half * sinh_shift_scaled / h,
        )
    };
    let a0 = 2.0 * s * e_hat;
    let a1 = 2.0 * e_hat * (1.0 - s * s / (2.0 * t));
    let a2 = -(s * e_hat / t) * (3.0 - s * s / (2.0 * t));
    let ig = g_hat.recip();
    let f1 = a1 * inv_sqrt_g - 0.5 * a0 * inv_sqrt_g * ig * g1_hat;
    let f2 = a2 * inv_sqrt_g - a1 * inv_sqrt_g * ig * g1_hat
        + 0.75 * a0 * inv_sqrt_g * ig * ig * g1_hat * g1_hat
        - 0.5 * a0 * inv_sqrt_g * ig * g2_hat;
    G2Parts { f0, f1, f2 }
}

/// Upper limit in w: cut where the Gaussian factor drops below 1e-16 of its
/// value at the left endpoint.
fn g2_upper_limit(t: f64, r: f64) -> f64 {
    let s_max = (r * r + 160.0 * t).sqrt();
    (s_max - r).sqrt().max(1e-3)
}

fn g2_scaled_integral(t: f64, r: f64, tol: f64) -> Result<f64> {
    let w_max = g2_upper_limit(t, r);
    quad::integrate(&|w| g2_integrand(w, r, t, false).f0, 0.0, w_max, tol)
}

fn g2_scaled_derivative_integrals(t: f64, r: f64, tol: f64) -> Result<(f64, f64)> {
    let w_max = g2_upper_limit(t, r);
    let i1 = quad::integrate(&|w| g2_integrand(w, r, t, true).f1, 0.0, w_max, tol)?;
    let i2 = quad::integrate(&|w| g2_integrand(w, r, t, true).f2, 0.0, w_max, tol)?;
    Ok((i1, i2))
}

/// ln of the t-only prefactor sqrt(2) (4 pi t)^{-3/2} e^{-t/4}.
fn ln_k2(t: f64) -> f64 {
    0.5 * std::f64::consts::LN_2 - 1.5 * (LN_4PI + t.ln()) - 0.25 * t
}

pub fn ln_g2(t: f64, r: f64, tol: f64) -> Result<f64> {
    let i0 = g2_scaled_integral(t, r, tol)?;
    if i0 <= 0.0 {
        return Err(Error::QuadratureFailure(format!(
            "G2 integral non-positive at t = {t}, r = {r}"
        )));
    }
    Ok(ln_k2(t) - r * r / (4.0 * t) - 0.5 * r + i0.ln())
}

/// G_4 via one differentiation of the G_2 integral. Near r = 0 the
/// recurrence is 0/0; we extrapolate evenly in r^2 from two nearby radii.
pub fn ln_g4(t: f64, r: f64, tol: f64) -> Result<f64> {
    if r < 0.02 {
        let r1 = 0.02;
        let r2 = 0.04;
        let v1 = ln_g4_direct(t, r1, tol)?;
        let v2 = ln_g4_direct(t, r2, tol)?;
        // ln G is smooth and even in r; interpolate linearly in r^2
        let frac = (r * r - r1 * r1) / (r2 * r2 - r1 * r1);
        return Ok(v1 + frac * (v2 - v1));
    }
    ln_g4_direct(t, r, tol)
}

fn ln_g4_direct(t: f64, r: f64, tol: f64) -> Result<f64> {
    let (i1, _) = g2_scaled_derivative_integrals(t, r, tol)?;
    if i1 >= 0.0 {
        return Err(Error::QuadratureFailure(format!(
            "dG2/dr integral has unexpected sign at t = {t}, r = {r}"
        )));
    }
    // G4 = -e^{-2t} K2 e^{-r^2/4t - r/2} I1 / (2 pi sinh r)
    Ok(-2.0 * t + ln_k2(t) - r * r / (4.0 * t) - 0.5 * r + (-i1).ln()
        - (2.0 * std::f64::consts::PI).ln()
        - hypgeo::ln_sinh(r))
}

/// G_6 via two differentiations of the G_2 integral.
pub fn ln_g6(t: f64, r: f64, tol: f64) -> Result<f64> {
    if r < 0.04 {
        let r1 = 0.04;
        let r2 = 0.08;
        let v1 = ln_g6_direct(t, r1, tol)?;
        let v2 = ln_g6_direct(t, r2, tol)?;
        let frac = (r * r - r1 * r1) / (r2 * r2 - r1 * r1);
        return Ok(v1 + frac * (v2 - v1));
    }
    ln_g6_direct(t, r, tol)
}

fn ln_g6_direct(t: f64, r: f64, tol: f64) -> Result<f64> {
    let (i1, i2) = g2_scaled_derivative_integrals(t, r, tol)?;
    // numerator of d/dr (I(r)/sinh r), rescaled by e^{-r}
    let em2r = (-2.0 * r).exp();
    let n_tilde = 0.5 * (i2 * (1.0 - em2r) - i1 * (1.0 + em2r));
    if n_tilde <= 0.0 {
        return Err(Error::QuadratureFailure(format!(
            "G6 recurrence numerator non-positive at t = {t}, r = {r}"
        )));
    }
    // G6 = e^{-6t} K2 e^{-r^2/4t - r/2} (I2 sinh r - I1 cosh r) / (4 pi^2 sinh^3 r)
    let pi = std::f64::consts::PI;
    Ok(-6.0 * t + ln_k2(t) - r * r / (4.0 * t) - 0.5 * r + n_tilde.ln() + r
        - (4.0 * pi * pi).ln()
        - 3.0 * hypgeo::ln_sinh(r))
}

// ---------------------------------------------------------------------------
// Odd chain: analytic derivatives of the d = 3 closed form.
// With u(r) = r / sinh r:
//   G5 = B5 e^{-r^2/4t} q5,   q5 = -(u' - (r/2t) u) / sinh r,
//   G7 = B7 e^{-r^2/4t} q7,   q7 = -(q5' - (r/2t) q5) / sinh r.
// ---------------------------------------------------------------------------

/// (u, u', u'') for u = r / sinh r, with series below r = 0.05.
fn u_family(r: f64) -> (f64, f64, f64) {
    if r < 0.05 {
        let r2 = r * r;
        let u = 1.0 - r2 / 6.0 + 7.0 * r2 * r2 / 360.0 - 31.0 * r2 * r2 * r2 / 15120.0;
        let up = -r / 3.0 + 7.0 * r * r2 / 90.0 - 31.0 * r * r2 * r2 / 2520.0;
        let upp = -1.0 / 3.0 + 7.0 * r2 / 30.0 - 31.0 * r2 * r2 / 504.0;
        (u, up, upp)
    } else {
        let sh = r.sinh();
        let ch = r.cosh();
        let u = r / sh;
        let up = (sh - r * ch) / (sh * sh);
        // u'' = (r sinh^2 r - 2 cosh r (sinh r - r cosh r)) / sinh^3 r - derived
        // directly from differentiating u':
        let upp = (-r * sh * sh * sh - 2.0 * sh * ch * (sh - r * ch)) / (sh * sh * sh * sh);
        (u, up, upp)
    }
}

/// q5 and q5' with small-r series.
fn q5_family(t: f64, r: f64) -> (f64, f64) {
    let c0 = 1.0 / 3.0 + 1.0 / (2.0 * t);
    let c2 = -((7.0 / 90.0 + 1.0 / (12.0 * t)) + c0 / 6.0);
    if r < 0.05 {
        return (c0 + c2 * r * r, 2.0 * c2 * r);
    }
    let (u, up, upp) = u_family(r);
    let sh = r.sinh();
    let ch = r.cosh();
    let n5 = up - (r / (2.0 * t)) * u;
    let q5 = -n5 / sh;
    let n5p = upp - (u + r * up) / (2.0 * t);
    let q5p = -(n5p * sh - n5 * ch) / (sh * sh);
    (q5, q5p)
}

pub fn ln_g5(t: f64, r: f64) -> f64 {
    let (q5, _) = q5_family(t, r);
    // B5 = e^{-3t} (4 pi t)^{-3/2} e^{-t} / (2 pi)
    -4.0 * t - 1.5 * (LN_4PI + t.ln()) - (2.0 * std::f64::consts::PI).ln() - r * r / (4.0 * t)
        + q5.ln()
}

pub fn ln_g7(t: f64, r: f64) -> f64 {
    let (q5, q5p) = q5_family(t, r);
    let q7 = if r < 0.02 {
        let c0 = 1.0 / 3.0 + 1.0 / (2.0 * t);
        let c2 = -((7.0 / 90.0 + 1.0 / (12.0 * t)) + c0 / 6.0);
        c0 / (2.0 * t) - 2.0 * c2
    } else {
        -(q5p - (r / (2.0 * t)) * q5) / r.sinh()
    };
    let pi = std::f64::consts::PI;
    -9.0 * t - 1.5 * (LN_4PI + t.ln()) - (4.0 * pi * pi).ln() - r * r / (4.0 * t) + q7.ln()
}

// ---------------------------------------------------------------------------
// Normalization and tabulation helpers.
// ---------------------------------------------------------------------------

/// Full-space integral of G_d(t, .) against d mu; equals 1 analytically.
pub fn normalization(kernel: &Kernel, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::NonPositiveTime(t));
    }
    let d = kernel.dimension();
    let ln_area = d.sphere_area().ln();
    let r_max = (d.as_f64() - 1.0) * t + 14.0 * (t + 1.0).sqrt() + 10.0;
    // resolve the integrand accurately even though the kernel itself spans
    // hundreds of orders of magnitude: integrate exp(ln G + ln weight)
    let f = |r: f64| -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match kernel.eval_ln(t, r) {
            Ok(lg) => (lg + hypgeo::ln_radial_weight(d, r) + ln_area).exp(),
            Err(_) => f64::NAN,
        }
    };
    quad::integrate(&f, 0.0, r_max, 1e-9)
}

/// Tabulated ln G_d(t, .) on a uniform radius grid with cubic interpolation.
/// Used by superposition-type sums where millions of kernel values at one
/// fixed time are needed.
pub struct KernelTable {
    t: f64,
    step: f64,
    r_max: f64,
    ln_values: Vec<f64>,
}

impl KernelTable {
    pub fn build(kernel: &Kernel, t: f64, r_max: f64, step: f64) -> Result<Self> {
        if t <= 0.0 {
            return Err(Error::NonPositiveTime(t));
        }
        let n = (r_max / step).ceil() as usize + 4;
        let mut ln_values = Vec::with_capacity(n);
        for i in 0..n {
            let r = i as f64 * step;
            ln_values.push(kernel.eval_ln(t, r)?);
        }
        Ok(KernelTable {
            t,
            step,
            r_max: (n - 1) as f64 * step,
            ln_values,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn eval_ln(&self, r: f64) -> f64 {
        let x = r / self.step;
        let n = self.ln_values.len();
        if r >= self.r_max - self.step {
            // linear continuation from the last two nodes
            let a = self.ln_values[n - 2];
            let b = self.ln_values[n - 1];
            return b + (x - (n - 1) as f64) * (b - a);
        }
        let i = (x.floor() as usize).clamp(1, n - 3);
        let s = x - i as f64;
        // 4-point Lagrange on nodes i-1 .. i+2
        let (f0, f1, f2, f3) = (
            self.ln_values[i - 1],
            self.ln_values[i],
            self.ln_values[i + 1],
            self.ln_values[i + 2],
        );
        let c0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        let c1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        let c2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        let c3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        c0 * f0 + c1 * f1 + c2 * f2 + c3 * f3
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.eval_ln(r).exp()
    }
}
