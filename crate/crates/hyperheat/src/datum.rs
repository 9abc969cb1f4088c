//! Initial data for the evolution problems: smooth compactly supported bumps
//! (radial, horospheric, or general mixtures of geodesic-ball "atoms") and
//! raw tabulated profiles.
//!
//! Atoms are discretized once into a weighted point cloud on the hyperboloid
//! sheet; superposition solvers and the memory functional then only ever see
//! points and weights, with the discrete weights rescaled so each atom's mass
//! is matched exactly.

use crate::error::{Error, Result};
use crate::hypgeo::{
    self, geodesic_point, tangent_basis, to_hyperboloid, Dimension, PolarPoint,
};
use crate::quad;
use serde::{Deserialize, Serialize};

/// The standard smooth bump exp(-w^2 / (sigma^2 - w^2)) on |w| < sigma,
/// identically zero outside. C^infinity with compact support.
pub fn bump(w: f64, sigma: f64) -> f64 {
    let a = w.abs();
    if a >= sigma {
        return 0.0;
    }
    (-a * a / (sigma * sigma - a * a)).exp()
}

/// One smooth compactly supported lump of heat: a bump profile in the
/// geodesic distance to `center`, scaled so its total mass on H^d is `mass`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Atom {
    pub center_r: f64,
    pub center_theta: Vec<f64>,
    pub mass: f64,
    pub width: f64,
}

impl Atom {
    pub fn center(&self) -> Result<PolarPoint> {
        PolarPoint::new(self.center_r, self.center_theta.clone())
    }

    pub fn validate(&self, d: Dimension) -> Result<()> {
        if self.center_theta.len() != d.get() as usize {
            return Err(Error::InvalidInput(format!(
                "atom direction has {} components, expected {}",
                self.center_theta.len(),
                d.get()
            )));
        }
        if !(self.width > 0.0) || !(self.mass > 0.0) {
            return Err(Error::InvalidInput(
                "atom mass and width must be positive".into(),
            ));
        }
        self.center()?;
        Ok(())
    }
}

/// A quadrature sample of an atom: a hyperboloid point and the measure weight
/// it carries. Weights of one atom sum to the atom's mass.
#[derive(Debug, Clone)]
pub struct WeightedPoint {
    pub point: Vec<f64>,
    pub weight: f64,
}

/// Discretize one atom into weighted hyperboloid points, using geodesic polar
/// coordinates around the atom center: `n_radial` Gauss-Legendre nodes in the
/// geodesic distance and a sphere rule with parameter `n_sphere` in the
/// tangent direction.
pub fn sample_atom(
    d: Dimension,
    atom: &Atom,
    n_radial: usize,
    n_sphere: usize,
) -> Result<Vec<WeightedPoint>> {
    atom.validate(d)?;
    let center = atom.center()?;
    let hc = to_hyperboloid(&center);
    let basis = tangent_basis(&center);
    let (dirs, dir_w) = quad::sphere_rule(d.get(), n_sphere)?;
    let (wn, ww) = quad::gauss_legendre_on(n_radial, 0.0, atom.width);

    let dim = d.get() as usize + 1;
    let mut out = Vec::with_capacity(wn.len() * dirs.len());
    let mut raw_total = 0.0;
    for (&w, &wq) in wn.iter().zip(&ww) {
        let density = bump(w, atom.width) * hypgeo::radial_measure_weight(d, w) * wq;
        for (dir, &dq) in dirs.iter().zip(&dir_w) {
            // tangent vector with components dir[k] along the orthonormal basis
            let mut u = vec![0.0; dim];
            for (k, b) in basis.iter().enumerate() {
                for (ui, bi) in u.iter_mut().zip(b) {
                    *ui += dir[k] * bi;
                }
            }
            let point = geodesic_point(&hc, &u, w);
            let weight = density * dq;
            raw_total += weight;
            out.push(WeightedPoint { point, weight });
        }
    }
    if !(raw_total > 0.0) {
        return Err(Error::InvalidInput("atom quadrature has zero mass".into()));
    }
    // rescale so the discrete mass is exactly the prescribed one
    let scale = atom.mass / raw_total;
    for p in &mut out {
        p.weight *= scale;
    }
    Ok(out)
}

/// A one-dimensional profile in the radial (or horospheric height) variable.
#[derive(Debug, Clone)]
pub enum Profile1D {
    Bump { amplitude: f64, center: f64, width: f64 },
    Table { nodes: Vec<f64>, values: Vec<f64> },
}

impl Profile1D {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Profile1D::Bump { amplitude, center, width } => amplitude * bump(r - center, *width),
            Profile1D::Table { nodes, values } => {
                if nodes.is_empty() || r < nodes[0] || r > *nodes.last().unwrap() {
                    return 0.0;
                }
                let i = match nodes.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
                    Ok(i) => return values[i],
                    Err(i) => i,
                };
                let (a, b) = (nodes[i - 1], nodes[i]);
                let s = (r - a) / (b - a);
                values[i - 1] * (1.0 - s) + values[i] * s
            }
        }
    }

    /// Interval outside of which the profile vanishes (tables: node range).
    pub fn support(&self) -> (f64, f64) {
        match self {
            Profile1D::Bump { center, width, .. } => (center - width, center + width),
            Profile1D::Table { nodes, .. } => (nodes[0], *nodes.last().unwrap()),
        }
    }
}

/// Initial datum of an evolution problem.
///
/// `RadialBump` is centered at the pole; its `mass` is the radial-line mass
/// integral of u0 sinh^{d-1} dr. `HoroBump` lives at height `center` in
/// horospheric coordinates; its `mass` is the integral of u0 e^{(d-1)r} dr.
/// Atom masses are full H^d masses.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDatum {
    RadialBump { mass: f64, width: f64 },
    HoroBump { mass: f64, width: f64, center: f64 },
    Atoms { atoms: Vec<Atom> },
    RadialTable { nodes: Vec<f64>, values: Vec<f64> },
    HoroTable { nodes: Vec<f64>, values: Vec<f64> },
}

impl InitialDatum {
    /// Radial profile u0(r), for radial data only.
    pub fn radial_profile(&self, d: Dimension) -> Result<Profile1D> {
        match self {
            InitialDatum::RadialBump { mass, width } => {
                if !(*width > 0.0) || !(*mass > 0.0) {
                    return Err(Error::InvalidInput("bump mass and width must be positive".into()));
                }
                let w = *width;
                let raw = quad::integrate(
                    &|r: f64| bump(r, w) * hypgeo::radial_measure_weight(d, r),
                    0.0,
                    w,
                    1e-12,
                )?;
                Ok(Profile1D::Bump { amplitude: mass / raw, center: 0.0, width: w })
            }
            InitialDatum::RadialTable { nodes, values } => {
                check_table(nodes, values)?;
                Ok(Profile1D::Table { nodes: nodes.clone(), values: values.clone() })
            }
            _ => Err(Error::InvalidInput("initial datum is not radial".into())),
        }
    }

    /// Height profile u0(r) in horospheric coordinates.
    pub fn horo_profile(&self, d: Dimension) -> Result<Profile1D> {
        match self {
            InitialDatum::HoroBump { mass, width, center } => {
                if !(*width > 0.0) || !(*mass > 0.0) {
                    return Err(Error::InvalidInput("bump mass and width must be positive".into()));
                }
                let (w, c) = (*width, *center);
                let raw = quad::integrate(
                    &|r: f64| bump(r - c, w) * hypgeo::horo_measure_weight(d, r),
                    c - w,
                    c + w,
                    1e-12,
                )?;
                Ok(Profile1D::Bump { amplitude: mass / raw, center: c, width: w })
            }
            InitialDatum::HoroTable { nodes, values } => {
                check_table(nodes, values)?;
                Ok(Profile1D::Table { nodes: nodes.clone(), values: values.clone() })
            }
            _ => Err(Error::InvalidInput("initial datum is not horospheric".into())),
        }
    }

    /// View the datum as a list of atoms, when that makes sense. A radial
    /// bump becomes a single atom at the pole carrying the corresponding
    /// full mass |S^{d-1}| * mass.
    pub fn as_atoms(&self, d: Dimension) -> Result<Vec<Atom>> {
        match self {
            InitialDatum::Atoms { atoms } => {
                for a in atoms {
                    a.validate(d)?;
                }
                Ok(atoms.clone())
            }
            InitialDatum::RadialBump { mass, width } => {
                let origin = PolarPoint::origin(d);
                Ok(vec![Atom {
                    center_r: 0.0,
                    center_theta: origin.theta,
                    mass: mass * d.sphere_area(),
                    width: *width,
                }])
            }
            _ => Err(Error::InvalidInput("initial datum has no atom decomposition".into())),
        }
    }

    /// Discretize all atoms of the datum; weights sum to the total full mass.
    pub fn atom_samples(
        &self,
        d: Dimension,
        n_radial: usize,
        n_sphere: usize,
    ) -> Result<Vec<WeightedPoint>> {
        let atoms = self.as_atoms(d)?;
        let mut out = Vec::new();
        for a in &atoms {
            out.extend(sample_atom(d, a, n_radial, n_sphere)?);
        }
        Ok(out)
    }
}

fn check_table(nodes: &[f64], values: &[f64]) -> Result<()> {
    if nodes.len() != values.len() || nodes.len() < 2 {
        return Err(Error::GridMismatch(format!(
            "table needs matching node/value lists of length >= 2, got {} / {}",
            nodes.len(),
            values.len()
        )));
    }
    if !nodes.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::GridMismatch("table nodes must be strictly increasing".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypgeo::hyperboloid_distance;

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn bump_is_compact_and_smoothly_decaying() {
        assert_eq!(bump(0.5, 0.5), 0.0);
        assert_eq!(bump(0.7, 0.5), 0.0);
        assert_eq!(bump(0.0, 0.5), 1.0);
        // symmetric, monotone on [0, sigma)
        assert_eq!(bump(-0.3, 0.5), bump(0.3, 0.5));
        assert!(bump(0.2, 0.5) > bump(0.4, 0.5));
    }

    #[test]
    fn radial_bump_normalization() {
        let d = dim(3);
        let datum = InitialDatum::RadialBump { mass: 2.5, width: 0.8 };
        let p = datum.radial_profile(d).unwrap();
        let n = 4000;
        let nodes: Vec<f64> = (0..=n).map(|i| 0.8 * i as f64 / n as f64).collect();
        let vals: Vec<f64> = nodes
            .iter()
            .map(|&r| p.eval(r) * hypgeo::radial_measure_weight(d, r))
            .collect();
        let mass = quad::trapezoid(&nodes, &vals);
        assert!((mass - 2.5).abs() < 1e-6, "mass = {mass}");
    }

    #[test]
    fn horo_bump_normalization() {
        let d = dim(2);
        let datum = InitialDatum::HoroBump { mass: 1.0, width: 0.6, center: -0.4 };
        let p = datum.horo_profile(d).unwrap();
        let n = 4000;
        let nodes: Vec<f64> = (0..=n).map(|i| -1.0 + 1.2 * i as f64 / n as f64).collect();
        let vals: Vec<f64> = nodes
            .iter()
            .map(|&r| p.eval(r) * hypgeo::horo_measure_weight(d, r))
            .collect();
        let mass = quad::trapezoid(&nodes, &vals);
        assert!((mass - 1.0).abs() < 1e-6, "mass = {mass}");
    }

    #[test]
    fn atom_samples_mass_and_support() {
        for d in [2u32, 3] {
            let d = dim(d);
            let atom = Atom {
                center_r: 1.2,
                center_theta: PolarPoint::axial(d, 0.0).theta,
                mass: 0.7,
                width: 0.4,
            };
            let pts = sample_atom(d, &atom, 24, 16).unwrap();
            let total: f64 = pts.iter().map(|p| p.weight).sum();
            assert!((total - 0.7).abs() < 1e-12);
            // every sample stays inside the geodesic ball
            let hc = to_hyperboloid(&atom.center().unwrap());
            for p in &pts {
                let dist = hyperboloid_distance(&hc, &p.point).unwrap();
                assert!(dist <= 0.4 + 1e-9);
                assert!(p.weight >= 0.0);
            }
        }
    }

    #[test]
    fn radial_bump_as_single_origin_atom() {
        let d = dim(2);
        let datum = InitialDatum::RadialBump { mass: 1.0, width: 0.5 };
        let atoms = datum.as_atoms(d).unwrap();
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].center_r, 0.0);
        assert!((atoms[0].mass - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn table_profile_interpolates_and_clips() {
        let p = Profile1D::Table { nodes: vec![0.0, 1.0, 2.0], values: vec![0.0, 2.0, 0.0] };
        assert_eq!(p.eval(0.5), 1.0);
        assert_eq!(p.eval(1.5), 1.0);
        assert_eq!(p.eval(3.0), 0.0);
        assert_eq!(p.eval(-0.1), 0.0);
    }

    #[test]
    fn serde_round_trip() {
        let datum = InitialDatum::Atoms {
            atoms: vec![Atom { center_r: 1.0, center_theta: vec![0.0, 1.0], mass: 0.5, width: 0.3 }],
        };
        let s = serde_json::to_string(&datum).unwrap();
        assert!(s.contains("\"kind\":\"atoms\""));
        let back: InitialDatum = serde_json::from_str(&s).unwrap();
        match back {
            InitialDatum::Atoms { atoms } => assert_eq!(atoms.len(), 1),
            _ => panic!("wrong variant"),
        }
    }

    #[test]
    fn rejects_bad_tables() {
        let bad = InitialDatum::RadialTable { nodes: vec![0.0, 0.0], values: vec![1.0, 1.0] };
        assert!(bad.radial_profile(dim(2)).is_err());
        let bad = InitialDatum::HoroTable { nodes: vec![0.0], values: vec![1.0] };
        assert!(bad.horo_profile(dim(2)).is_err());
    }
}
