//! Relative entropy, entropy production (the weighted Dirichlet form) and
//! the Csiszar-Kullback / log-Sobolev numeric checks in the self-similar
//! frame.
//!
//! The frame variables are tau = ln(t+1) and rho = (r - (d-1)(t+1)) /
//! sqrt(t+1), which center and rescale the mass bulk. The transformed
//! density v(tau, rho) = e^{tau/2} w(r) u(t, r) (w the 1D measure weight)
//! carries the same line mass as u for every tau, and relaxes to a fixed
//! Gaussian-type reference profile V. Convergence is quantified by the
//! relative entropy H = int v ln(v/V) drho and its production D =
//! int v |d_rho ln(v/V)|^2 drho; the references here satisfy a log-Sobolev
//! inequality with constant 1, i.e. H <= D for matched masses.

use crate::error::{Error, Result};
use crate::hypgeo::Dimension;
use crate::quad::midpoint_weights;
use crate::solvers::{GridFunction, GridKind};

/// A solution snapshot transported to self-similar variables.
#[derive(Debug, Clone)]
pub struct SelfSimilarFrame {
    pub d: Dimension,
    pub kind: GridKind,
    /// tau = ln(t + 1).
    pub tau: f64,
    pub rho_nodes: Vec<f64>,
    pub v_values: Vec<f64>,
}

impl SelfSimilarFrame {
    /// Left end of the admissible rho interval: the image of r = 0.
    pub fn rho0(&self) -> f64 {
        -(self.d.as_f64() - 1.0) * (self.tau / 2.0).exp()
    }

    /// Line mass int v drho (midpoint rule; equals the grid function's mass
    /// exactly, since the change of variables is linear per cell).
    pub fn mass(&self) -> f64 {
        midpoint_weights(&self.rho_nodes)
            .iter()
            .zip(&self.v_values)
            .map(|(&w, &v)| w * v)
            .sum()
    }
}

/// Transport a snapshot to the self-similar frame. Assembled in log space:
/// at large times the measure weight overflows exactly where the density
/// underflows, while v itself is O(1).
pub fn to_self_similar(g: &GridFunction) -> Result<SelfSimilarFrame> {
    if !(g.t > 0.0) {
        return Err(Error::NonPositiveTime(g.t));
    }
    let big_t = g.t + 1.0;
    let scale = big_t.sqrt();
    let k = g.d.as_f64() - 1.0;
    let rho_nodes: Vec<f64> = g.nodes.iter().map(|&r| (r - k * big_t) / scale).collect();
    let v_values: Vec<f64> = g
        .nodes
        .iter()
        .zip(&g.values)
        .map(|(&r, &u)| {
            if u > 0.0 {
                (g.kind.ln_weight(g.d, r) + u.ln() + scale.ln()).exp()
            } else {
                0.0
            }
        })
        .collect();
    Ok(SelfSimilarFrame {
        d: g.d,
        kind: g.kind,
        tau: big_t.ln(),
        rho_nodes,
        v_values,
    })
}

/// Inverse of [`to_self_similar`]; exact at the nodes.
pub fn from_self_similar(f: &SelfSimilarFrame) -> GridFunction {
    let big_t = f.tau.exp();
    let scale = big_t.sqrt();
    let k = f.d.as_f64() - 1.0;
    let nodes: Vec<f64> = f.rho_nodes.iter().map(|&rho| k * big_t + scale * rho).collect();
    let values: Vec<f64> = nodes
        .iter()
        .zip(&f.v_values)
        .map(|(&r, &v)| {
            if v > 0.0 {
                (v.ln() - f.kind.ln_weight(f.d, r) - scale.ln()).exp()
            } else {
                0.0
            }
        })
        .collect();
    GridFunction {
        kind: f.kind,
        d: f.d,
        t: big_t - 1.0,
        nodes,
        values,
    }
}

/// Reference profile family for the relative entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefKind {
    /// sinh-type transient equilibrium: proportional to
    /// (1 - e^{-2r})^{d-1} e^{-rho^2/4} with r = (d-1)e^tau + e^{tau/2} rho.
    Radial,
    /// cosh-type companion, proportional to (1 + e^{-2r})^{d-1} e^{-rho^2/4};
    /// also log-Sobolev with constant 1.
    RadialCosh,
    /// plain Gaussian e^{-rho^2/4} (horospheric frame).
    Horospheric,
}

impl RefKind {
    pub fn for_grid(kind: GridKind) -> RefKind {
        match kind {
            GridKind::Radial => RefKind::Radial,
            GridKind::Horospheric => RefKind::Horospheric,
        }
    }
}

/// Reference profile sampled on rho nodes and renormalized so its midpoint
/// mass equals `mass` exactly. Discrete renormalization (rather than the
/// analytic constant) makes the Jensen lower bound H >= 0 hold at the
/// quadrature level.
pub fn reference_values(
    kind: RefKind,
    d: Dimension,
    tau: f64,
    rho_nodes: &[f64],
    mass: f64,
) -> Result<Vec<f64>> {
    if !(mass > 0.0) {
        return Err(Error::InvalidInput("reference mass must be positive".into()));
    }
    let k = d.as_f64() - 1.0;
    let big_t = tau.exp();
    let scale = big_t.sqrt();
    let shape: Vec<f64> = rho_nodes
        .iter()
        .map(|&rho| {
            let gauss = -rho * rho / 4.0;
            let ln_prefactor = match kind {
                RefKind::Horospheric => 0.0,
                RefKind::Radial | RefKind::RadialCosh => {
                    let r = k * big_t + scale * rho;
                    if r <= 0.0 && kind == RefKind::Radial {
                        return 0.0;
                    }
                    let e = (-2.0 * r).exp();
                    match kind {
                        RefKind::Radial => k * (-e).ln_1p(),
                        _ => k * e.ln_1p(),
                    }
                }
            };
            (ln_prefactor + gauss).exp()
        })
        .collect();
    let raw: f64 = midpoint_weights(rho_nodes)
        .iter()
        .zip(&shape)
        .map(|(&w, &s)| w * s)
        .sum();
    if !(raw > 0.0) {
        return Err(Error::QuadratureFailure(
            "reference profile vanishes on the grid".into(),
        ));
    }
    let c = mass / raw;
    Ok(shape.into_iter().map(|s| c * s).collect())
}

/// Entropy functionals of one snapshot relative to a reference.
#[derive(Debug, Clone)]
pub struct EntropyReport {
    pub tau: f64,
    /// relative entropy int v ln(v/ref) drho.
    pub h: f64,
    /// entropy production int v |d_rho ln(v/ref)|^2 drho.
    pub d_production: f64,
    /// L1 gap int |v - ref| drho.
    pub l1_gap: f64,
    /// shared line mass of v and ref.
    pub mass: f64,
}

impl EntropyReport {
    /// Left side of the Csiszar-Kullback inequality.
    pub fn ck_lhs(&self) -> f64 {
        self.l1_gap * self.l1_gap
    }

    /// Right side of the Csiszar-Kullback inequality (standard constant).
    pub fn ck_rhs(&self) -> f64 {
        2.0 * self.mass * self.h
    }
}

// relative smallness below which tail nodes are dropped from the entropy
// quadrature; their contribution to H is provably below 1e-12 of the peak
const TAIL_CUT: f64 = 1e-16;

/// Relative entropy, production and L1 gap of a frame against reference
/// values on the same nodes. Conventions: 0 ln 0 = 0; the ratio v/ref is
/// floored at 1e-300 before the log; nodes where the reference vanishes but
/// v does not (inside the non-negligible region) are an error, since they
/// indicate a domain bug rather than a numerical edge case.
pub fn relative_entropy(frame: &SelfSimilarFrame, ref_values: &[f64]) -> Result<EntropyReport> {
    let v = &frame.v_values;
    let rho = &frame.rho_nodes;
    if ref_values.len() != v.len() {
        return Err(Error::GridMismatch("reference length differs".into()));
    }
    let weights = midpoint_weights(rho);
    let mass_v = frame.mass();
    let mass_ref: f64 = weights.iter().zip(ref_values).map(|(&w, &f)| w * f).sum();
    let gap = (mass_v - mass_ref).abs() / mass_ref.abs().max(f64::MIN_POSITIVE);
    if !(gap <= 1e-6) {
        return Err(Error::MassMismatch(gap));
    }
    let peak = v
        .iter()
        .chain(ref_values)
        .cloned()
        .fold(0.0f64, f64::max);
    let cut = TAIL_CUT * peak;
    let keep: Vec<usize> = (0..v.len())
        .filter(|&i| v[i] >= cut || ref_values[i] >= cut)
        .collect();
    if keep.len() < 3 {
        return Err(Error::InvalidInput("fewer than 3 non-negligible nodes".into()));
    }
    // log-ratio on the kept nodes; the production integrand differentiates
    // this, which is smoother than v and ref separately in the tails
    let mut ln_ratio = Vec::with_capacity(keep.len());
    for &i in &keep {
        if ref_values[i] <= 0.0 && v[i] > 0.0 {
            return Err(Error::ReferenceVanishes(rho[i]));
        }
        let ratio = if v[i] > 0.0 {
            (v[i] / ref_values[i]).max(1e-300)
        } else {
            1e-300
        };
        ln_ratio.push(ratio.ln());
    }
    let mut h = 0.0;
    let mut l1 = 0.0;
    let mut d_production = 0.0;
    for (j, &i) in keep.iter().enumerate() {
        let w = weights[i];
        if v[i] > 0.0 {
            h += w * v[i] * ln_ratio[j];
        }
        l1 += w * (v[i] - ref_values[i]).abs();
        // central differences inside, one-sided at the ends
        let (ja, jb) = if j == 0 {
            (j, j + 1)
        } else if j == keep.len() - 1 {
            (j - 1, j)
        } else {
            (j - 1, j + 1)
        };
        let drho = rho[keep[jb]] - rho[keep[ja]];
        let slope = (ln_ratio[jb] - ln_ratio[ja]) / drho;
        let term = w * v[i] * slope * slope;
        // v below the cut multiplies a floored (hence meaningless) slope
        if term.is_finite() && v[i] >= cut {
            d_production += term;
        }
    }
    Ok(EntropyReport {
        tau: frame.tau,
        h,
        d_production,
        l1_gap: l1,
        mass: mass_v,
    })
}

/// Entropy series of a snapshot sequence plus the fitted exponential decay
/// rate of H in tau (least squares of ln H against tau).
#[derive(Debug, Clone)]
pub struct EntropyDecay {
    pub reports: Vec<EntropyReport>,
    pub fitted_rate: f64,
}

/// Compute the entropy report of every snapshot against the matching
/// reference and fit the decay rate of H versus tau.
pub fn entropy_decay_series(snapshots: &[GridFunction], kind: RefKind) -> Result<EntropyDecay> {
    let mut reports = Vec::with_capacity(snapshots.len());
    for g in snapshots {
        let frame = to_self_similar(g)?;
        let refs = reference_values(kind, frame.d, frame.tau, &frame.rho_nodes, frame.mass())?;
        reports.push(relative_entropy(&frame, &refs)?);
    }
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.h > 0.0)
        .map(|r| (r.tau, r.h.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateFit(
            "need at least 2 snapshots with positive entropy".into(),
        ));
    }
    let n = pts.len() as f64;
    let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = pts.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("snapshots share a single tau".into()));
    }
    let sxy: f64 = pts.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    Ok(EntropyDecay {
        reports,
        fitted_rate: sxy / sxx,
    })
}

/// Check the log-Sobolev inequality with constant 1 against a list of trial
/// densities on a common rho grid. The reference is renormalized to each
/// trial's mass (the functionals are jointly 1-homogeneous, so this does not
/// change the H/D ratio). Returns (H, D, D/H) per trial, with the ratio
/// reported as 1 when H is numerically zero.
pub fn log_sobolev_check(
    kind: RefKind,
    d: Dimension,
    tau: f64,
    rho_nodes: &[f64],
    trials: &[Vec<f64>],
) -> Result<Vec<(f64, f64, f64)>> {
    let weights = midpoint_weights(rho_nodes);
    trials
        .iter()
        .map(|v| {
            let mass: f64 = weights.iter().zip(v).map(|(&w, &x)| w * x).sum();
            if !(mass > 0.0) {
                return Err(Error::InvalidInput("trial density has no mass".into()));
            }
            let refs = reference_values(kind, d, tau, rho_nodes, mass)?;
            let frame = SelfSimilarFrame {
                d,
                kind: match kind {
                    RefKind::Horospheric => GridKind::Horospheric,
                    _ => GridKind::Radial,
                },
                tau,
                rho_nodes: rho_nodes.to_vec(),
                v_values: v.clone(),
            };
            let rep = relative_entropy(&frame, &refs)?;
            let ratio = if rep.h.abs() < 1e-14 {
                1.0
            } else {
                rep.d_production / rep.h
            };
            Ok((rep.h, rep.d_production, ratio))
        })
        .collect()
}
