//! Hyperbolic geometry primitives: polar and horospheric coordinates on H^d,
//! geodesic distance, and the measure weights of both coordinate systems.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Spatial dimension d >= 2 of the hyperbolic space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::UnsupportedDimension { d, max: u32::MAX });
        }
        Ok(Dimension(d))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    /// Bottom of the Laplace–Beltrami spectrum, (d-1)^2/4.
    pub fn lambda1(self) -> f64 {
        let dm1 = self.as_f64() - 1.0;
        dm1 * dm1 / 4.0
    }

    /// Decay exponent of the mass-matching constant, min(d-1, (d-1)^2/16).
    pub fn m_d(self) -> f64 {
        let dm1 = self.as_f64() - 1.0;
        (dm1).min(dm1 * dm1 / 16.0)
    }

    /// Surface area of the unit sphere S^{d-1}.
    pub fn sphere_area(self) -> f64 {
        // |S^1| = 2 pi, |S^2| = 4 pi, |S^k| = (2 pi / (k-1)) |S^{k-2}|.
        let pi = std::f64::consts::PI;
        let k = self.0 - 1;
        let (mut cur_k, mut cur) = if k % 2 == 1 { (1u32, 2.0 * pi) } else { (2u32, 4.0 * pi) };
        while cur_k < k {
            cur_k += 2;
            cur = 2.0 * pi * cur / f64::from(cur_k - 1);
        }
        cur
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;
    fn try_from(d: u32) -> Result<Self> {
        Dimension::new(d)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

/// Point in polar coordinates: distance to the pole and a unit direction
/// vector in R^d. Keeping theta as a full vector makes the inner product
/// in the distance law exact and dimension-generic.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: Vec<f64>,
}

impl PolarPoint {
    pub fn new(r: f64, theta: Vec<f64>) -> Result<Self> {
        if r < 0.0 || !r.is_finite() {
            return Err(Error::InvalidInput(format!("polar radius must be >= 0, got {r}")));
        }
        let norm: f64 = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "direction must be a unit vector, |theta| = {norm}"
            )));
        }
        Ok(PolarPoint { r, theta })
    }

    /// Point on the polar axis e_1 at radius r (d-dimensional).
    pub fn axial(d: Dimension, r: f64) -> Self {
        let mut theta = vec![0.0; d.get() as usize];
        theta[0] = 1.0;
        PolarPoint { r, theta }
    }

    pub fn origin(d: Dimension) -> Self {
        Self::axial(d, 0.0)
    }
}

/// Point in horospheric coordinates: signed distance to the horosphere and
/// the Euclidean foot point on it.
#[derive(Debug, Clone, PartialEq)]
pub struct HoroPoint {
    pub r: f64,
    pub y: Vec<f64>,
}

pub fn inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Angle between two unit directions, arccos of the clamped inner product.
pub fn angle(theta_x: &[f64], theta_y: &[f64]) -> f64 {
    inner(theta_x, theta_y).clamp(-1.0, 1.0).acos()
}

/// Geodesic distance from the second hyperbolic law of cosines.
///
/// The arccosh argument is >= 1 analytically; rounding may push it slightly
/// below 1 near coincident points, which we clamp within 1e-12.
pub fn hyperbolic_distance(x: &PolarPoint, y: &PolarPoint) -> Result<f64> {
    let cos_angle = inner(&x.theta, &y.theta).clamp(-1.0, 1.0);
    distance_from_parts(x.r, y.r, cos_angle)
}

/// Distance in terms of the two radii and the cosine of the angle at the pole.
pub fn distance_from_parts(r_x: f64, r_y: f64, cos_angle: f64) -> Result<f64> {
    let arg = r_x.cosh() * r_y.cosh() - r_x.sinh() * r_y.sinh() * cos_angle;
    if arg < 1.0 {
        if arg < 1.0 - 1e-12 {
            return Err(Error::DistanceDomain(arg));
        }
        return Ok(0.0);
    }
    Ok(arg.acosh())
}

/// ln(sinh r) for r > 0, stable for both tiny and large arguments.
pub fn ln_sinh(r: f64) -> f64 {
    if r <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if r < 1e-4 {
        // sinh r = r (1 + r^2/6 + ...)
        r.ln() + (r * r / 6.0).ln_1p()
    } else {
        // sinh r = e^r (1 - e^{-2r}) / 2
        r + (-(-2.0 * r).exp()).ln_1p() - std::f64::consts::LN_2
    }
}

/// Radial measure weight sinh^{d-1}(r). Uses log-space assembly so large
/// windows (r up to several hundred) do not overflow intermediate powers.
pub fn radial_measure_weight(d: Dimension, r: f64) -> f64 {
    if r == 0.0 {
        return if d.get() == 1 { 1.0 } else { 0.0 };
    }
    let k = d.as_f64() - 1.0;
    if r > 30.0 {
        (k * ln_sinh(r)).exp()
    } else {
        r.sinh().powf(k)
    }
}

/// ln of the radial measure weight, (d-1) ln sinh r.
pub fn ln_radial_weight(d: Dimension, r: f64) -> f64 {
    (d.as_f64() - 1.0) * ln_sinh(r)
}

/// Horospheric measure weight e^{(d-1) r}.
pub fn horo_measure_weight(d: Dimension, r: f64) -> f64 {
    ((d.as_f64() - 1.0) * r).exp()
}

// --- Hyperboloid model -----------------------------------------------------
//
// For quadrature over geodesic balls around off-axis centers it is easiest to
// embed H^d as {x in R^{d+1} : x_0^2 - |x'|^2 = 1, x_0 > 0}. The polar point
// (r, theta) maps to (cosh r, sinh r * theta), geodesics are explicit, and
// cosh of the distance is the Minkowski product, so the law of cosines never
// has to be invoked for transported points.

/// Minkowski product x_0 y_0 - x' . y' of two R^{d+1} vectors.
pub fn minkowski_dot(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] - inner(&a[1..], &b[1..])
}

/// Embed a polar point into the hyperboloid model.
pub fn to_hyperboloid(p: &PolarPoint) -> Vec<f64> {
    let mut v = Vec::with_capacity(p.theta.len() + 1);
    v.push(p.r.cosh());
    let s = p.r.sinh();
    v.extend(p.theta.iter().map(|t| s * t));
    v
}

/// Geodesic distance between two hyperboloid points.
pub fn hyperboloid_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    let arg = minkowski_dot(a, b);
    if arg < 1.0 {
        if arg < 1.0 - 1e-12 {
            return Err(Error::DistanceDomain(arg));
        }
        return Ok(0.0);
    }
    Ok(arg.acosh())
}

/// Polar radius and direction recovered from a hyperboloid point.
pub fn from_hyperboloid(v: &[f64]) -> PolarPoint {
    let r = v[0].max(1.0).acosh();
    let s: f64 = inner(&v[1..], &v[1..]).sqrt();
    let theta = if s > 1e-300 {
        v[1..].iter().map(|x| x / s).collect()
    } else {
        // at the pole the direction is arbitrary
        let mut t = vec![0.0; v.len() - 1];
        t[0] = 1.0;
        t
    };
    PolarPoint { r, theta }
}

/// Orthonormal basis (in the Minkowski sense) of the tangent space at p.
///
/// The first vector points in the radial direction; the rest are angular.
/// All returned vectors u satisfy <u,u>_M = -1 and <u,p>_M = 0.
pub fn tangent_basis(p: &PolarPoint) -> Vec<Vec<f64>> {
    let d = p.theta.len();
    let mut basis = Vec::with_capacity(d);
    let mut radial = Vec::with_capacity(d + 1);
    radial.push(p.r.sinh());
    let c = p.r.cosh();
    radial.extend(p.theta.iter().map(|t| c * t));
    basis.push(radial);
    // Angular directions: complete theta to an orthonormal frame of R^d by
    // Gram-Schmidt over the standard basis, embedded with zero time component.
    let mut frame: Vec<Vec<f64>> = vec![p.theta.clone()];
    for k in 0..d {
        if frame.len() == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        for f in &frame {
            let proj = inner(&v, f);
            for (vi, fi) in v.iter_mut().zip(f) {
                *vi -= proj * fi;
            }
        }
        let n = inner(&v, &v).sqrt();
        if n > 1e-8 {
            frame.push(v.iter().map(|x| x / n).collect());
        }
    }
    for f in frame.into_iter().skip(1) {
        let mut u = Vec::with_capacity(d + 1);
        u.push(0.0);
        u.extend(f);
        basis.push(u);
    }
    basis
}

/// exp_c(w * u): the point at geodesic distance w from c in tangent direction u.
pub fn geodesic_point(c: &[f64], u: &[f64], w: f64) -> Vec<f64> {
    let (cw, sw) = (w.cosh(), w.sinh());
    c.iter().zip(u).map(|(ci, ui)| cw * ci + sw * ui).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn random_unit(rng: &mut impl Rng, d: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-3 {
                return v.iter().map(|x| x / n).collect();
            }
        }
    }

    #[test]
    fn distance_identity_and_collinear() {
        let d = dim(3);
        let x = PolarPoint::axial(d, 2.0);
        assert_eq!(hyperbolic_distance(&x, &x).unwrap(), 0.0);

        let y = PolarPoint::axial(d, 0.5);
        let l = hyperbolic_distance(&x, &y).unwrap();
        assert!((l - 1.5).abs() < 1e-12);
    }

    #[test]
    fn distance_antipodal() {
        let x = PolarPoint::new(1.0, vec![1.0, 0.0]).unwrap();
        let y = PolarPoint::new(1.0, vec![-1.0, 0.0]).unwrap();
        let l = hyperbolic_distance(&x, &y).unwrap();
        assert!((l - 2.0).abs() < 1e-12);
    }

    #[test]
    fn angle_cases() {
        assert_eq!(angle(&[1.0, 0.0], &[1.0, 0.0]), 0.0);
        assert!((angle(&[1.0, 0.0], &[0.0, 1.0]) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((angle(&[1.0, 0.0], &[-1.0, 0.0]) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn measure_weights() {
        assert_eq!(radial_measure_weight(dim(3), 0.0), 0.0);
        assert!((radial_measure_weight(dim(2), 1.0) - 1.0f64.sinh()).abs() < 1e-12);
        assert!((radial_measure_weight(dim(3), 1.0) - 1.0f64.sinh().powi(2)).abs() < 1e-12);
        assert!((horo_measure_weight(dim(2), 0.0) - 1.0).abs() < 1e-15);
        assert!((horo_measure_weight(dim(3), 2.0f64.ln()) - 4.0).abs() < 1e-12);
        assert!((horo_measure_weight(dim(4), -1.0) - (-3.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn ln_sinh_matches_direct() {
        for &r in &[1e-6, 1e-3, 0.1, 1.0, 5.0, 20.0] {
            assert!((ln_sinh(r) - r.sinh().ln()).abs() < 1e-12, "r = {r}");
        }
        // large r: compare against the asymptotic r - ln 2
        assert!((ln_sinh(400.0) - (400.0 - std::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn sphere_areas() {
        let pi = std::f64::consts::PI;
        assert!((dim(2).sphere_area() - 2.0 * pi).abs() < 1e-12);
        assert!((dim(3).sphere_area() - 4.0 * pi).abs() < 1e-12);
        assert!((dim(4).sphere_area() - 2.0 * pi * pi).abs() < 1e-12);
        assert!((dim(5).sphere_area() - 8.0 * pi * pi / 3.0).abs() < 1e-12);
        assert!((dim(7).sphere_area() - 16.0 * pi * pi * pi / 15.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_constants() {
        assert!((dim(2).lambda1() - 0.25).abs() < 1e-15);
        assert!((dim(3).lambda1() - 1.0).abs() < 1e-15);
        assert!((dim(2).m_d() - 1.0 / 16.0).abs() < 1e-15);
        assert!((dim(3).m_d() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn distance_symmetry_and_radial_lower_bound() {
        let d = dim(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let x = PolarPoint::new(rng.gen_range(0.0..5.0), random_unit(&mut rng, 3)).unwrap();
            let y = PolarPoint::new(rng.gen_range(0.0..5.0), random_unit(&mut rng, 3)).unwrap();
            let _ = d;
            let dxy = hyperbolic_distance(&x, &y).unwrap();
            let dyx = hyperbolic_distance(&y, &x).unwrap();
            assert_eq!(dxy, dyx);
            assert!(dxy >= (x.r - y.r).abs() - 1e-10);
        }
    }

    #[test]
    fn triangle_inequality_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let a = PolarPoint::new(rng.gen_range(0.0..4.0), random_unit(&mut rng, 3)).unwrap();
            let b = PolarPoint::new(rng.gen_range(0.0..4.0), random_unit(&mut rng, 3)).unwrap();
            let c = PolarPoint::new(rng.gen_range(0.0..4.0), random_unit(&mut rng, 3)).unwrap();
            let ab = hyperbolic_distance(&a, &b).unwrap();
            let bc = hyperbolic_distance(&b, &c).unwrap();
            let ac = hyperbolic_distance(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-10);
        }
    }

    #[test]
    fn angular_lower_bounds() {
        // From cosh(lambda) >= (1 - cos theta) cosh(r_x) cosh(r_y) when
        // cos(theta) >= 0 and cosh(r_x) cosh(r_y) >= e^{r_x + r_y}/4:
        //   lambda >= r_x + r_y + ln(sin^2(theta/2) / 2),
        // and lambda >= r_x + r_y - ln 4 when cos(theta) <= 0.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5000 {
            let rx = rng.gen_range(0.0..8.0);
            let ry = rng.gen_range(0.0..8.0);
            let ct: f64 = rng.gen_range(-1.0..1.0);
            let l = distance_from_parts(rx, ry, ct).unwrap();
            if ct >= 0.0 {
                // sin^2(theta/2) = (1 - cos theta)/2
                let s2h = 0.5 * (1.0 - ct);
                if s2h > 0.0 {
                    assert!(l >= rx + ry + (0.5 * s2h).ln() - 1e-9);
                }
            } else {
                assert!(l >= rx + ry - 4.0f64.ln() - 1e-9);
            }
        }
    }

    #[test]
    fn hyperboloid_round_trip_and_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..2000 {
            let x = PolarPoint::new(rng.gen_range(0.0..5.0), random_unit(&mut rng, 3)).unwrap();
            let y = PolarPoint::new(rng.gen_range(0.0..5.0), random_unit(&mut rng, 3)).unwrap();
            let hx = to_hyperboloid(&x);
            let hy = to_hyperboloid(&y);
            // on the hyperboloid sheet
            assert!((minkowski_dot(&hx, &hx) - 1.0).abs() < 1e-9);
            // distances agree with the law of cosines
            let via_embed = hyperboloid_distance(&hx, &hy).unwrap();
            let via_law = hyperbolic_distance(&x, &y).unwrap();
            assert!((via_embed - via_law).abs() < 1e-9, "{via_embed} vs {via_law}");
            // round trip
            let back = from_hyperboloid(&hx);
            assert!((back.r - x.r).abs() < 1e-9);
            if x.r > 1e-6 {
                assert!((inner(&back.theta, &x.theta) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tangent_basis_orthonormal_and_exponential_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..500 {
            let c = PolarPoint::new(rng.gen_range(0.0..4.0), random_unit(&mut rng, 3)).unwrap();
            let hc = to_hyperboloid(&c);
            let basis = tangent_basis(&c);
            assert_eq!(basis.len(), 3);
            for (i, u) in basis.iter().enumerate() {
                assert!((minkowski_dot(u, u) + 1.0).abs() < 1e-9, "unit tangent");
                assert!(minkowski_dot(u, &hc).abs() < 1e-9, "tangent to sheet");
                for v in basis.iter().skip(i + 1) {
                    assert!(minkowski_dot(u, v).abs() < 1e-9, "orthogonal pair");
                }
            }
            // walking distance w along any tangent direction lands at distance w
            let w = rng.gen_range(0.0..3.0);
            let dir = &basis[rng.gen_range(0..3)];
            let p = geodesic_point(&hc, dir, w);
            assert!((minkowski_dot(&p, &p) - 1.0).abs() < 1e-7);
            let dist = hyperboloid_distance(&hc, &p).unwrap();
            assert!((dist - w).abs() < 1e-8, "dist {dist} vs w {w}");
        }
    }

    #[test]
    fn exponential_map_radial_direction_changes_radius() {
        let d = dim(2);
        let c = PolarPoint::axial(d, 1.5);
        let basis = tangent_basis(&c);
        let p = geodesic_point(&to_hyperboloid(&c), &basis[0], 0.7);
        let q = from_hyperboloid(&p);
        // radial tangent at an axial point moves straight out along the axis
        assert!((q.r - 2.2).abs() < 1e-10);
        assert!((q.theta[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(PolarPoint::new(-0.1, vec![1.0, 0.0]).is_err());
        assert!(PolarPoint::new(1.0, vec![0.5, 0.0]).is_err());
        assert!(Dimension::new(1).is_err());
        // far below the clamping threshold
        assert!(distance_from_parts(0.0, 0.0, 2.0).is_ok()); // cos clamped upstream; arg = 1 here
    }
}
