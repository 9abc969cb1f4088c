//! Asymptotic and transient profiles: the Gaussian, the radial and
//! horospheric transient equilibria with their mass-matching constant C(t),
//! the kernel-ratio function phi, the memory function Phi, and directional
//! masses on the sphere.
//!
//! Conventions. The radial mass is the line integral of u sinh^{d-1} dr (no
//! sphere factor); the horospheric mass is the line integral of u e^{(d-1)r}
//! dr; atoms carry full H^d masses. Times fed to `radial_equilibrium_c` are
//! already shifted (callers pass t+1); the `*_equilibrium_v` evaluators take
//! the unshifted t and shift internally.

use crate::datum::InitialDatum;
use crate::error::{Error, Result};
use crate::heatkernel::Kernel;
use crate::hypgeo::{self, Dimension, PolarPoint};
use crate::quad;

/// The Gaussian profile t^{-1/2} e^{-r^2/4t}.
///
/// Note it is not normalized: its integral over the line is sqrt(4 pi).
pub fn gaussian(t: f64, r: f64) -> Result<f64> {
    Ok(ln_gaussian(t, r)?.exp())
}

/// ln of the Gaussian profile; safe far out in the tails.
pub fn ln_gaussian(t: f64, r: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    Ok(-0.5 * t.ln() - r * r / (4.0 * t))
}

/// Limiting value of the mass-matching constant, 2^{d-2} M / sqrt(pi).
pub fn radial_c_limit(d: Dimension, mass: f64) -> f64 {
    2f64.powi(d.get() as i32 - 2) * mass / std::f64::consts::PI.sqrt()
}

/// Mass-matching constant C of the radial transient equilibrium at (shifted)
/// time t, from the mass identity
///
///   M = (C/sqrt(t)) * int_0^inf sinh^{d-1}(r) e^{-(r+(d-1)t)^2/4t} dr.
///
/// The integrand is rewritten as 2^{1-d} (1-e^{-2r})^{d-1} e^{-(r-(d-1)t)^2/4t}
/// (the measure weight absorbs the drift), which is O(1) near the bulk and
/// needs no log-space tricks at any t.
pub fn radial_equilibrium_c(d: Dimension, mass: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    if !(mass > 0.0) {
        return Err(Error::InvalidInput(format!("mass must be positive, got {mass}")));
    }
    let j = radial_mass_integral(d, t, 0)?;
    Ok(mass * 2f64.powi(d.get() as i32 - 1) * t.sqrt() / j)
}

/// int_0^inf r^moment (1-e^{-2r})^{d-1} e^{-(r-(d-1)t)^2/4t} dr.
fn radial_mass_integral(d: Dimension, t: f64, moment: i32) -> Result<f64> {
    let k = d.as_f64() - 1.0;
    let bulk = k * t;
    let half_width = 14.0 * t.sqrt();
    let lo = (bulk - half_width).max(0.0);
    let hi = bulk + half_width;
    quad::integrate(
        &|r: f64| {
            let shape = (1.0 - (-2.0 * r).exp()).powi(d.get() as i32 - 1);
            let z = r - bulk;
            r.powi(moment) * shape * (-z * z / (4.0 * t)).exp()
        },
        lo,
        hi,
        1e-12,
    )
}

/// The two-sided bound on C at (shifted) time t: the lower bound is the
/// limit value; the upper bound's bracket can be nonpositive for small t, in
/// which case the inequality carries no information and +inf is returned.
pub fn radial_c_bounds(d: Dimension, mass: f64, t: f64) -> (f64, f64) {
    let lo = radial_c_limit(d, mass);
    let k = d.as_f64() - 1.0;
    let l1 = d.lambda1();
    let bracket = std::f64::consts::PI.sqrt() - (-l1 * t / 4.0).exp() / (l1 * t).sqrt();
    let shape = (1.0 - (-k * t).exp()).powi(d.get() as i32 - 1);
    if bracket <= 0.0 {
        return (lo, f64::INFINITY);
    }
    (lo, 2f64.powi(d.get() as i32 - 2) * mass / (shape * bracket))
}

/// Logarithmic time derivative of C at (shifted) time t, by central
/// differences with step h = 1e-3 t.
pub fn radial_c_log_derivative(d: Dimension, mass: f64, t: f64) -> Result<f64> {
    let h = 1e-3 * t;
    let cp = radial_equilibrium_c(d, mass, t + h)?;
    let cm = radial_equilibrium_c(d, mass, t - h)?;
    let c = radial_equilibrium_c(d, mass, t)?;
    Ok((cp - cm) / (2.0 * h * c))
}

/// ln of the radial transient equilibrium V(t,r) = C(t+1) sinh^{d-1}(r)
/// e^{-(r+(d-1)(t+1))^2 / 4(t+1)}. Assembled in log space: the raw weight
/// overflows for windows beyond r ~ 700/(d-1) while the product stays O(C).
pub fn ln_radial_equilibrium_v(d: Dimension, mass: f64, t: f64, r: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::NonPositiveTime(t));
    }
    let big_t = t + 1.0;
    let c = radial_equilibrium_c(d, mass, big_t)?;
    Ok(ln_radial_v_shape(d, big_t, r) + c.ln())
}

/// ln of sinh^{d-1}(r) e^{-(r+(d-1)T)^2/4T} at shifted time T.
fn ln_radial_v_shape(d: Dimension, big_t: f64, r: f64) -> f64 {
    let k = d.as_f64() - 1.0;
    // (d-1) ln sinh r - (r + kT)^2/4T = ln((1-e^{-2r})^{d-1}/2^{d-1}) - (r - kT)^2/4T
    let z = r - k * big_t;
    k * ((-(-2.0 * r).exp()).ln_1p() - std::f64::consts::LN_2) - z * z / (4.0 * big_t)
}

/// Radial transient equilibrium V(t,r); vanishes at r = 0.
pub fn radial_equilibrium_v(d: Dimension, mass: f64, t: f64, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    Ok(ln_radial_equilibrium_v(d, mass, t, r)?.exp())
}

/// Horospheric transient equilibrium V(t,r) = M e^{-(r-(d-1)(t+1))^2/4(t+1)};
/// the matching constant is the horospheric mass itself.
pub fn horo_equilibrium_v(d: Dimension, mass: f64, t: f64, r: f64) -> f64 {
    let big_t = t + 1.0;
    let z = r - (d.as_f64() - 1.0) * big_t;
    mass * (-z * z / (4.0 * big_t)).exp()
}

/// The limiting kernel ratio phi(y, theta) = [cosh r_y - sinh r_y cos]^{-(d-1)}
/// where cos is the inner product of theta with the direction of y.
pub fn phi(d: Dimension, y: &PolarPoint, theta: &[f64]) -> f64 {
    let cos = hypgeo::inner(&y.theta, theta).clamp(-1.0, 1.0);
    phi_from_parts(d, y.r, cos)
}

/// phi in terms of the radius of y and the cosine of the angle.
pub fn phi_from_parts(d: Dimension, r_y: f64, cos: f64) -> f64 {
    let base = r_y.cosh() - r_y.sinh() * cos;
    base.powi(-(d.get() as i32 - 1))
}

/// Kernel ratio G_d(t, dist(p_t, y)) / G_d(t, r_l(t)) with r_l(t) = (d-1)t + ell
/// and p_t the point at radius r_l(t) in direction theta. Evaluated entirely
/// in log space: at t = 40 both kernels underflow linearly.
pub fn phi_ratio_limit_check(
    kernel: &Kernel,
    y: &PolarPoint,
    theta: &[f64],
    ell: f64,
    t_sequence: &[f64],
) -> Result<Vec<f64>> {
    let d = kernel.dimension();
    let cos = hypgeo::inner(&y.theta, theta).clamp(-1.0, 1.0);
    let mut out = Vec::with_capacity(t_sequence.len());
    for &t in t_sequence {
        let r_l = (d.as_f64() - 1.0) * t + ell;
        if r_l <= 0.0 {
            return Err(Error::InvalidInput(format!("r_l(t) = {r_l} <= 0 at t = {t}")));
        }
        let lambda = hypgeo::distance_from_parts(r_l, y.r, cos)?;
        let ratio = (kernel.eval_ln(t, lambda)? - kernel.eval_ln(t, r_l)?).exp();
        out.push(ratio);
    }
    Ok(out)
}

/// Function values sampled on a quadrature grid of S^{d-1}.
#[derive(Debug, Clone)]
pub struct SphericalSamples {
    pub d: Dimension,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

impl SphericalSamples {
    /// Quadrature grid with zero values; n controls the rule size.
    pub fn grid(d: Dimension, n: usize) -> Result<Self> {
        let (nodes, weights) = quad::sphere_rule(d.get(), n)?;
        let values = vec![0.0; nodes.len()];
        Ok(SphericalSamples { d, nodes, weights, values })
    }

    /// Quadrature of the sampled function over the sphere.
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Integral divided by the sphere area.
    pub fn mean(&self) -> f64 {
        self.integral() / self.d.sphere_area()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Spherical mean of phi(y, .) over the direction; equals 1 analytically.
pub fn phi_spherical_mean(d: Dimension, r_y: f64, n: usize) -> Result<f64> {
    let mut grid = SphericalSamples::grid(d, n)?;
    let y = PolarPoint::axial(d, r_y);
    for (i, node) in grid.nodes.iter().enumerate() {
        grid.values[i] = phi(d, &y, node);
    }
    Ok(grid.mean())
}

/// The memory function Phi(theta) = int u0(y) phi(y, theta) dmu(y), evaluated
/// on each node of the grid by atom quadrature.
///
/// With y on the hyperboloid sheet, cosh r_y = y_0 and sinh r_y theta_y = y',
/// so phi(y, theta) = (y_0 - <theta, y'>)^{-(d-1)} without trigonometry.
pub fn memory_phi(
    d: Dimension,
    u0: &InitialDatum,
    grid: &mut SphericalSamples,
) -> Result<()> {
    let samples = u0.atom_samples(d, 32, 24)?;
    let p = -(d.get() as i32 - 1);
    for (i, theta) in grid.nodes.iter().enumerate() {
        let mut acc = 0.0;
        for s in &samples {
            let base = s.point[0] - hypgeo::inner(theta, &s.point[1..]);
            acc += s.weight * base.powi(p);
        }
        grid.values[i] = acc;
    }
    Ok(())
}

/// Directional mass N(t, theta) = int_0^inf u(t, r, theta) sinh^{d-1}(r) dr,
/// computed on the grid nodes by trapezoid over the supplied radial nodes.
pub fn directional_mass<F>(
    d: Dimension,
    u: F,
    r_nodes: &[f64],
    grid: &mut SphericalSamples,
) -> Result<()>
where
    F: Fn(f64, &[f64]) -> Result<f64>,
{
    let weights: Vec<f64> = r_nodes
        .iter()
        .map(|&r| hypgeo::radial_measure_weight(d, r))
        .collect();
    let mut line = vec![0.0; r_nodes.len()];
    for (i, theta) in grid.nodes.iter().enumerate() {
        for (j, &r) in r_nodes.iter().enumerate() {
            line[j] = u(r, theta)? * weights[j];
        }
        grid.values[i] = quad::trapezoid(r_nodes, &line);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn gaussian_values() {
        assert_eq!(gaussian(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(gaussian(4.0, 0.0).unwrap(), 0.5);
        assert!((gaussian(1.0, 2.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(gaussian(0.0, 1.0).is_err());
        // line integral is sqrt(4 pi), independent of t
        for &t in &[0.5, 3.0] {
            let v = quad::integrate(&|r: f64| gaussian(t, r).unwrap(), -60.0, 60.0, 1e-12).unwrap();
            assert!((v - (4.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn c_matches_brute_force_quadrature() {
        // independent oracle: trapezoid on the original integrand of the mass
        // identity, without the weight-absorbing rewrite
        let d = dim(3);
        let t = 4.0;
        let n = 200_000;
        let hi = 40.0;
        let h = hi / n as f64;
        let mut j = 0.0;
        for i in 0..=n {
            let r = i as f64 * h;
            let z = r + 2.0 * t;
            let v = hypgeo::radial_measure_weight(d, r) * (-z * z / (4.0 * t)).exp();
            j += if i == 0 || i == n { 0.5 * v } else { v };
        }
        j *= h;
        let c_oracle = 1.0 * t.sqrt() / j;
        let c = radial_equilibrium_c(d, 1.0, t).unwrap();
        assert!((c - c_oracle).abs() / c_oracle < 1e-8, "{c} vs {c_oracle}");
    }

    #[test]
    fn c_limit_linearity_and_bounds() {
        let pi = std::f64::consts::PI;
        assert!((radial_c_limit(dim(2), 1.0) - 1.0 / pi.sqrt()).abs() < 1e-15);
        assert!((radial_c_limit(dim(3), 1.0) - 2.0 / pi.sqrt()).abs() < 1e-15);

        for dd in [2u32, 3] {
            let d = dim(dd);
            // linearity in mass
            let c1 = radial_equilibrium_c(d, 1.0, 3.0).unwrap();
            let c2 = radial_equilibrium_c(d, 2.0, 3.0).unwrap();
            assert!((c2 - 2.0 * c1).abs() < 1e-12);
            // two-sided bounds at the sampled times
            for &t in &[1.0, 2.0, 5.0, 20.0] {
                let c = radial_equilibrium_c(d, 1.0, t).unwrap();
                let (lo, hi) = radial_c_bounds(d, 1.0, t);
                assert!(c >= lo * (1.0 - 1e-9), "d={dd} t={t}: C={c} < {lo}");
                assert!(c <= hi, "d={dd} t={t}: C={c} > {hi}");
            }
            // convergence to the limit
            let c_far = radial_equilibrium_c(d, 1.0, 400.0).unwrap();
            assert!((c_far - radial_c_limit(d, 1.0)).abs() / c_far < 1e-6);
        }
    }

    #[test]
    fn c_log_derivative_matches_implicit_formula() {
        // closed-form oracle: d/dt ln C = ((d-1)^2 t + 2)/(4t) - I/(II 4t^2)
        // with I, II the second-moment and plain bulk integrals
        for dd in [2u32, 3] {
            let d = dim(dd);
            for &t in &[2.0, 6.0, 15.0] {
                let i2 = radial_mass_integral(d, t, 2).unwrap();
                let i0 = radial_mass_integral(d, t, 0).unwrap();
                let k = d.as_f64() - 1.0;
                let exact = (k * k * t + 2.0) / (4.0 * t) - i2 / (i0 * 4.0 * t * t);
                let fd = radial_c_log_derivative(d, 1.0, t).unwrap();
                assert!(
                    (fd - exact).abs() < 1e-6 * (1.0 + exact.abs()),
                    "d={dd} t={t}: {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn radial_v_values_and_mass() {
        let d = dim(2);
        // direct formula evaluation at moderate arguments
        let c2 = radial_equilibrium_c(d, 1.0, 2.0).unwrap();
        let expect = c2 * 3.0f64.sinh() * (-(3.0f64 + 2.0).powi(2) / 8.0).exp();
        let got = radial_equilibrium_v(d, 1.0, 1.0, 3.0).unwrap();
        assert!((got - expect).abs() / expect < 1e-12);
        assert_eq!(radial_equilibrium_v(d, 1.0, 1.0, 0.0).unwrap(), 0.0);

        // mass identity: int V dr = sqrt(t+1) * mass
        for dd in [2u32, 3] {
            let d = dim(dd);
            for &t in &[0.5, 4.0, 30.0] {
                let big_t = t + 1.0;
                let k = d.as_f64() - 1.0;
                let lo = (k * big_t - 14.0 * big_t.sqrt()).max(0.0);
                let hi = k * big_t + 14.0 * big_t.sqrt();
                let m = quad::integrate(
                    &|r: f64| radial_equilibrium_v(d, 1.0, t, r).unwrap(),
                    lo,
                    hi,
                    1e-10,
                )
                .unwrap();
                assert!(
                    (m - big_t.sqrt()).abs() / big_t.sqrt() < 1e-8,
                    "d={dd} t={t}: mass {m}"
                );
            }
        }
    }

    #[test]
    fn horo_v_peak_and_symmetry() {
        let d = dim(2);
        assert_eq!(horo_equilibrium_v(d, 1.0, 0.0, 1.0), 1.0);
        let v = horo_equilibrium_v(d, 3.0, 4.0, 5.0);
        let peak = 5.0; // (d-1)(t+1)
        let _ = peak;
        assert!((horo_equilibrium_v(d, 3.0, 4.0, 5.0) - 3.0).abs() < 1e-15);
        assert_eq!(v, 3.0);
        let a = horo_equilibrium_v(d, 3.0, 4.0, 5.0 + 1.3);
        let b = horo_equilibrium_v(d, 3.0, 4.0, 5.0 - 1.3);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn phi_values_and_bound() {
        let d2 = dim(2);
        let d3 = dim(3);
        // r_y = 0 gives 1 in any direction
        assert_eq!(phi_from_parts(d3, 0.0, 0.3), 1.0);
        // aligned directions attain e^{(d-1) r_y}
        for (d, r_y) in [(d2, 1.0), (d3, 0.7)] {
            let top = phi_from_parts(d, r_y, 1.0);
            let bound = ((d.as_f64() - 1.0) * r_y).exp();
            assert!((top - bound).abs() / bound < 1e-12);
            // bound holds across the angle range
            for k in 0..=40 {
                let cos = -1.0 + 2.0 * k as f64 / 40.0;
                let v = phi_from_parts(d, r_y, cos);
                assert!(v > 0.0 && v <= bound * (1.0 + 1e-12));
            }
        }
        // antipodal d=2: (cosh 1 + sinh 1)^{-1} = e^{-1}
        assert!((phi_from_parts(d2, 1.0, -1.0) - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn phi_spherical_mean_is_one() {
        for dd in [2u32, 3] {
            let d = dim(dd);
            for &r_y in &[0.5, 1.0, 2.0] {
                // the rule error decays geometrically with base e^{-y*} where
                // cosh(y*) = coth(r_y); r_y = 2 needs ~128 nodes for 1e-9
                let m = phi_spherical_mean(d, r_y, 128).unwrap();
                assert!((m - 1.0).abs() < 1e-9, "d={dd} r_y={r_y}: mean {m}");
            }
        }
    }

    #[test]
    fn memory_phi_radial_is_mass_and_zero_is_zero() {
        let d = dim(2);
        let mut grid = SphericalSamples::grid(d, 48).unwrap();
        let u0 = InitialDatum::RadialBump { mass: 1.0, width: 0.5 };
        memory_phi(d, &u0, &mut grid).unwrap();
        let full_mass = 2.0 * std::f64::consts::PI;
        for v in &grid.values {
            assert!((v - full_mass).abs() < 1e-5 * full_mass, "Phi = {v}");
        }
    }

    #[test]
    fn memory_phi_narrow_bump_direction_ratio() {
        // a narrow bump at r_y = 1 on the axis: Phi(e1)/Phi(-e1) -> e^2
        let d = dim(2);
        let mut grid = SphericalSamples::grid(d, 4).unwrap();
        // place nodes exactly on +-e1 by overriding the rule nodes
        grid.nodes = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        grid.weights = vec![std::f64::consts::PI, std::f64::consts::PI];
        grid.values = vec![0.0, 0.0];
        let u0 = InitialDatum::Atoms {
            atoms: vec![crate::datum::Atom {
                center_r: 1.0,
                center_theta: vec![1.0, 0.0],
                mass: 1.0,
                width: 1e-2,
            }],
        };
        memory_phi(d, &u0, &mut grid).unwrap();
        let ratio = grid.values[0] / grid.values[1];
        assert!((ratio - (2.0f64).exp()).abs() < 1e-3, "ratio {ratio}");
    }

    #[test]
    fn phi_ratio_is_one_for_origin() {
        let d = dim(3);
        let kernel = Kernel::for_dimension(d).unwrap();
        let y = PolarPoint::origin(d);
        let theta = vec![1.0, 0.0, 0.0];
        let ratios =
            phi_ratio_limit_check(&kernel, &y, &theta, 0.0, &[1.0, 5.0, 20.0]).unwrap();
        for r in ratios {
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn phi_ratio_d3_aligned_near_limit() {
        let d = dim(3);
        let kernel = Kernel::for_dimension(d).unwrap();
        let y = PolarPoint::axial(d, 1.0);
        let theta = vec![1.0, 0.0, 0.0];
        let ratios = phi_ratio_limit_check(&kernel, &y, &theta, 0.0, &[40.0]).unwrap();
        let target = (2.0f64).exp();
        assert!((ratios[0] - target).abs() / target < 0.02, "ratio {}", ratios[0]);
    }

    #[test]
    fn directional_mass_of_kernel_is_uniform() {
        let d = dim(2);
        let kernel = Kernel::for_dimension(d).unwrap();
        let t = 2.0;
        let n = 2000;
        let r_nodes: Vec<f64> = (0..=n).map(|i| 25.0 * i as f64 / n as f64).collect();
        let mut grid = SphericalSamples::grid(d, 16).unwrap();
        directional_mass(
            d,
            |r, _theta| kernel.eval(t, r),
            &r_nodes,
            &mut grid,
        )
        .unwrap();
        // radial solution: no theta dependence; integral over sphere = mass 1
        let total = grid.integral();
        assert!((total - 1.0).abs() < 1e-5, "total {total}");
        let first = grid.values[0];
        for v in &grid.values {
            assert!((v - first).abs() < 1e-14);
        }
    }
}
