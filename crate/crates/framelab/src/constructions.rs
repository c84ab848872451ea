//! Frame-producing constructions: discretization, smoothing, approximate
//! identities, the averaging operator on convolutions, budgeted Bessel
//! measures, and convex combination.

use num_complex::Complex64;
use serde_json::json;

use crate::bounds::BoundCertificate;
use crate::error::{FrameError, Result};
use crate::geometry::{add, BoxNd};
use crate::measures::Measure;
use crate::quadrature::{composite_nodes_1d, QuadSpec};
use crate::sip::{ExponentPair, TestFunction};

/// Where each cell's mass is placed.
#[derive(Debug, Clone)]
pub enum RepresentativeRule {
    CellCenter,
    CellCorner,
    /// Explicit representative per cell index; each point must lie inside
    /// its cell `r(k + [0,1)^d)`.
    Explicit(Vec<(Vec<i64>, Vec<f64>)>),
}

/// Cells are the half-open cubes `r(k + [0,1)^d)`, `k` ranging over `Z^d`.
#[derive(Debug, Clone)]
pub struct DiscretizationSpec {
    pub r: f64,
    pub rule: RepresentativeRule,
    /// Restricts the cell sweep; required when the measure's support is
    /// unbounded.
    pub window: Option<BoxNd>,
}

impl DiscretizationSpec {
    pub fn centers(r: f64) -> Self {
        DiscretizationSpec { r, rule: RepresentativeRule::CellCenter, window: None }
    }

    pub fn corners(r: f64) -> Self {
        DiscretizationSpec { r, rule: RepresentativeRule::CellCorner, window: None }
    }

    fn representative(&self, k: &[i64]) -> Result<Vec<f64>> {
        match &self.rule {
            RepresentativeRule::CellCenter => {
                Ok(k.iter().map(|&ki| self.r * (ki as f64 + 0.5)).collect())
            }
            RepresentativeRule::CellCorner => Ok(k.iter().map(|&ki| self.r * ki as f64).collect()),
            RepresentativeRule::Explicit(list) => {
                for (idx, x) in list {
                    if idx == k {
                        let inside = x
                            .iter()
                            .zip(k)
                            .all(|(&xi, &ki)| xi >= self.r * ki as f64 && xi < self.r * (ki as f64 + 1.0));
                        if !inside {
                            return Err(FrameError::InvalidArgument(format!(
                                "representative {x:?} lies outside cell {k:?}"
                            )));
                        }
                        return Ok(x.clone());
                    }
                }
                Err(FrameError::InvalidArgument(format!("no representative for cell {k:?}")))
            }
        }
    }
}

/// `nu' = sum_k nu(r(k+Q)) delta_{x_k}`, zero-mass cells omitted.
///
/// Atomic mass lands in cells by the half-open floor convention; density
/// cell masses are exact (piecewise-constant overlap volumes, no
/// quadrature).
pub fn discretize(nu: &Measure, spec: &DiscretizationSpec) -> Result<Measure> {
    if !(spec.r > 0.0 && spec.r.is_finite()) {
        return Err(FrameError::InvalidArgument("cell size must be positive".into()));
    }
    let sweep = match &spec.window {
        Some(w) => w.clone(),
        None => nu.support_box().ok_or_else(|| {
            FrameError::InvalidArgument(
                "unbounded or unknown support: discretization needs a window".into(),
            )
        })?,
    };
    let r = spec.r;
    match nu {
        Measure::Atomic(a) => {
            let mut cells: Vec<(Vec<i64>, f64)> = Vec::new();
            for atom in a.atoms() {
                if let Some(w) = &spec.window {
                    if !w.contains(&atom.point) {
                        continue;
                    }
                }
                let k: Vec<i64> = atom.point.iter().map(|&x| (x / r).floor() as i64).collect();
                match cells.iter_mut().find(|(idx, _)| *idx == k) {
                    Some((_, m)) => *m += atom.weight,
                    None => cells.push((k, atom.weight)),
                }
            }
            finish_cells(cells, spec)
        }
        Measure::Density(d) => {
            // cell index ranges covering the sweep box
            let lo: Vec<i64> = sweep.intervals.iter().map(|iv| (iv[0] / r).floor() as i64).collect();
            let hi: Vec<i64> = sweep.intervals.iter().map(|iv| (iv[1] / r).ceil() as i64).collect();
            let mut cells: Vec<(Vec<i64>, f64)> = Vec::new();
            let mut k = lo.clone();
            'sweep: loop {
                let cell = BoxNd {
                    intervals: k
                        .iter()
                        .map(|&ki| [r * ki as f64, r * (ki as f64 + 1.0)])
                        .collect(),
                };
                let mut mass = 0.0;
                for piece in d.pieces() {
                    if let Some(overlap) = piece.support.intersect(&cell) {
                        mass += piece.value * overlap.volume();
                    }
                }
                if mass > 0.0 {
                    cells.push((k.clone(), mass));
                }
                let mut axis = 0;
                loop {
                    if axis == k.len() {
                        break 'sweep;
                    }
                    k[axis] += 1;
                    if k[axis] < hi[axis] {
                        break;
                    }
                    k[axis] = lo[axis];
                    axis += 1;
                }
            }
            finish_cells(cells, spec)
        }
        _ => Err(FrameError::UnsupportedKind(
            "discretization needs an atomic or density measure".into(),
        )),
    }
}

fn finish_cells(cells: Vec<(Vec<i64>, f64)>, spec: &DiscretizationSpec) -> Result<Measure> {
    let mut atoms = Vec::with_capacity(cells.len());
    for (k, mass) in cells {
        atoms.push((spec.representative(&k)?, mass));
    }
    if atoms.is_empty() {
        return Err(FrameError::Evaluation("every cell has zero mass".into()));
    }
    Measure::atomic(atoms)
}

/// The weighted exponential family `{c_k e_{x_k}}` with `c_k = w_k^{1/q}`,
/// whose q-Bessel sum equals the functional against the atomic measure.
pub fn q_frame_from_discretization(
    nu_prime: &Measure,
    e: &ExponentPair,
) -> Result<Vec<(Vec<f64>, f64)>> {
    let q = e.q();
    if !q.is_finite() {
        return Err(FrameError::InvalidArgument("q-frame weights need finite q".into()));
    }
    match nu_prime {
        Measure::Atomic(a) => Ok(a
            .atoms()
            .iter()
            .map(|atom| (atom.point.clone(), atom.weight.powf(1.0 / q)))
            .collect()),
        _ => Err(FrameError::UnsupportedKind("weighted family needs an atomic measure".into())),
    }
}

/// Stage one of smoothing on the line: the Lipschitz density
/// `t -> nu([t-1, t])`. Exact closed-form pieces for atomic `nu`
/// (each atom contributes its weight on `[x, x+1]`); density `nu` is
/// evaluated per grid cell.
pub fn smooth_stage_one(nu: &Measure, grid_per_unit: usize) -> Result<Measure> {
    if nu.dim() != 1 {
        return Err(FrameError::UnsupportedKind("smoothing runs on the line".into()));
    }
    match nu {
        Measure::Atomic(a) => {
            let pieces = a
                .atoms()
                .iter()
                .map(|atom| (BoxNd::interval(atom.point[0], atom.point[0] + 1.0), atom.weight))
                .collect();
            Measure::density(pieces, QuadSpec::default())
        }
        Measure::Density(d) => {
            let bb = d.bounding_box();
            let (lo, hi) = (bb.intervals[0][0], bb.intervals[0][1] + 1.0);
            let n = (((hi - lo) * grid_per_unit.max(1) as f64).ceil() as usize).max(1);
            let h = (hi - lo) / n as f64;
            let mut pieces = Vec::new();
            for i in 0..n {
                let t = lo + (i as f64 + 0.5) * h;
                // nu([t-1, t]) exactly from the piecewise-constant density
                let mut val = 0.0;
                for piece in d.pieces() {
                    let a = piece.support.intervals[0][0].max(t - 1.0);
                    let b = piece.support.intervals[0][1].min(t);
                    if b > a {
                        val += piece.value * (b - a);
                    }
                }
                if val > 0.0 {
                    pieces.push((BoxNd::interval(lo + i as f64 * h, lo + (i + 1) as f64 * h), val));
                }
            }
            let m = Measure::density(pieces, *d.quad())?;
            rescale_to_mass(m, d.mass())
        }
        _ => Err(FrameError::UnsupportedKind("smoothing needs atomic or density input".into())),
    }
}

/// Normalized bump `exp(-1/(1-(2x)^2))` supported on `(-1/2, 1/2)`.
fn bump(x: f64) -> f64 {
    let u = 2.0 * x;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// Mollify `nu` into a density with smooth profile: stage one gives
/// `t -> nu([t-1, t])`, stage two convolves with a compactly supported
/// smooth bump, sampled per grid cell and rescaled so total mass is
/// preserved exactly.
pub fn smooth(nu: &Measure, grid_per_unit: usize) -> Result<Measure> {
    let stage_one = smooth_stage_one(nu, grid_per_unit)?;
    let d = match &stage_one {
        Measure::Density(d) => d,
        _ => unreachable!(),
    };
    let bump_mass: f64 = composite_nodes_1d(&QuadSpec::new(4, 16), -0.5, 0.5)
        .into_iter()
        .map(|(x, w)| w * bump(x))
        .sum();
    let bb = d.bounding_box();
    let (lo, hi) = (bb.intervals[0][0] - 0.5, bb.intervals[0][1] + 0.5);
    let n = (((hi - lo) * grid_per_unit.max(1) as f64).ceil() as usize).max(1);
    let h = (hi - lo) / n as f64;
    let mut pieces = Vec::new();
    for i in 0..n {
        let t = lo + (i as f64 + 0.5) * h;
        let val: f64 = composite_nodes_1d(&QuadSpec::new(4, 16), -0.5, 0.5)
            .into_iter()
            .map(|(y, w)| w * bump(y) / bump_mass * d.density_at(&[t - y]))
            .sum();
        if val > 0.0 {
            pieces.push((BoxNd::interval(lo + i as f64 * h, lo + (i + 1) as f64 * h), val));
        }
    }
    let m = Measure::density(pieces, *d.quad())?;
    rescale_to_mass(m, nu.mass()?)
}

fn rescale_to_mass(m: Measure, target: f64) -> Result<Measure> {
    let current = m.mass()?;
    if current <= 0.0 {
        return Err(FrameError::Evaluation("smoothed measure lost all mass".into()));
    }
    match m.scale(target / current)? {
        Measure::Scaled(alpha, inner) => match *inner {
            Measure::Density(d) => {
                let pieces = d
                    .pieces()
                    .iter()
                    .map(|p| (p.support.clone(), p.value * alpha))
                    .collect();
                Measure::density(pieces, *d.quad())
            }
            other => other.scale(alpha),
        },
        other => Ok(other),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityKind {
    Uniform,
    Atomic,
}

/// Approximate identity: probability measures with support radius `1/n`.
#[derive(Debug, Clone)]
pub struct ApproximateIdentity {
    pub kind: IdentityKind,
    pub dim: usize,
}

impl ApproximateIdentity {
    pub fn new(kind: IdentityKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(FrameError::InvalidArgument("dimension must be at least 1".into()));
        }
        Ok(ApproximateIdentity { kind, dim })
    }

    /// The n-th member `lambda_n`; support radius exactly `1/n`.
    pub fn member(&self, n: usize) -> Result<Measure> {
        if n == 0 {
            return Err(FrameError::InvalidArgument("index must be at least 1".into()));
        }
        let s = 1.0 / n as f64;
        match self.kind {
            IdentityKind::Uniform => {
                let bx = BoxNd::new(vec![[-s, s]; self.dim])?;
                let vol = bx.volume();
                Measure::density(vec![(bx, 1.0 / vol)], QuadSpec::default())
            }
            IdentityKind::Atomic => {
                let mut pt = vec![0.0; self.dim];
                pt[0] = s;
                Ok(Measure::dirac(pt))
            }
        }
    }

    pub fn support_radius(&self, n: usize) -> f64 {
        1.0 / n as f64
    }
}

/// The averaging operator carrying `f` on `mu` to a function on
/// `mu * mu'`: at each convolution atom `z`, the conditional average of
/// `f(x)` over decompositions `z = x + y`, weighted by
/// `mu(x) mu'(y)`. Satisfies
/// `int Pf(z) g(z) d(mu*mu') = double int f(x) g(x+y) dmu dmu'` for every `g`.
pub fn p_operator(f: &TestFunction, mu: &Measure, mu_prime: &Measure) -> Result<TestFunction> {
    if !(mu.is_probability() && mu_prime.is_probability()) {
        return Err(FrameError::InvalidArgument("both measures must be probabilities".into()));
    }
    // delta convolution leaves f translated only through its argument;
    // handle it for any mu by composing with the shift
    if let Measure::Atomic(b) = mu_prime {
        if b.atoms().len() == 1 {
            let shift = b.atoms()[0].point.clone();
            if shift.iter().all(|&c| c == 0.0) {
                return Ok(f.clone());
            }
        }
    }
    let (a, b) = match (mu, mu_prime) {
        (Measure::Atomic(a), Measure::Atomic(b)) => (a, b),
        _ => {
            return Err(FrameError::UnsupportedKind(
                "averaging operator implemented for atomic pairs and delta-shifts".into(),
            ))
        }
    };
    const TOL: f64 = 1e-12;
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut num: Vec<Complex64> = Vec::new();
    let mut den: Vec<f64> = Vec::new();
    for x in a.atoms() {
        let fx = f.eval(&x.point);
        for y in b.atoms() {
            let z = add(&x.point, &y.point);
            let w = x.weight * y.weight;
            match points.iter().position(|p| {
                p.iter().zip(&z).all(|(u, v)| (u - v).abs() <= TOL)
            }) {
                Some(i) => {
                    num[i] += fx * w;
                    den[i] += w;
                }
                None => {
                    points.push(z);
                    num.push(fx * w);
                    den.push(w);
                }
            }
        }
    }
    let values = num.iter().zip(&den).map(|(n, d)| n / d).collect();
    Ok(TestFunction::AtomSamples { points, values })
}

/// Atomic `nu` on the given points with equal weights summing to
/// `B / mass(mu)`; any such measure is `(p,q)`-Bessel with bound `B`.
pub fn budgeted_bessel(
    mu: &Measure,
    bound: f64,
    points: &[Vec<f64>],
    e: &ExponentPair,
) -> Result<(Measure, BoundCertificate)> {
    if !(bound > 0.0) || points.is_empty() {
        return Err(FrameError::InvalidArgument("need B > 0 and at least one point".into()));
    }
    let mass = mu.mass()?;
    let c = bound / mass / points.len() as f64;
    let nu = Measure::atomic(points.iter().map(|p| (p.clone(), c)).collect())?;
    let cert = BoundCertificate {
        rule: "Budgeted".into(),
        upper: bound,
        lower: None,
        premises: json!({
            "mass_mu": mass, "points": points.len(), "weight_each": c,
            "p": e.p(), "q": e.q(),
        }),
    };
    Ok((nu, cert))
}

/// `lambda nu1 + (1 - lambda) nu2`. Like kinds merge structurally
/// (additive atom/piece lists); mixed kinds fall back to a lazy sum.
pub fn convex_combine(nu1: &Measure, nu2: &Measure, lambda: f64) -> Result<Measure> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(FrameError::InvalidArgument("lambda must lie in (0,1)".into()));
    }
    if nu1.dim() != nu2.dim() {
        return Err(FrameError::DimensionMismatch { expected: nu1.dim(), got: nu2.dim() });
    }
    match (nu1, nu2) {
        (Measure::Atomic(a), Measure::Atomic(b)) => {
            let mut atoms: Vec<(Vec<f64>, f64)> = a
                .atoms()
                .iter()
                .map(|at| (at.point.clone(), lambda * at.weight))
                .collect();
            atoms.extend(
                b.atoms()
                    .iter()
                    .map(|at| (at.point.clone(), (1.0 - lambda) * at.weight)),
            );
            Measure::atomic(atoms)
        }
        (Measure::Density(a), Measure::Density(b)) => {
            let mut pieces: Vec<(BoxNd, f64)> = a
                .pieces()
                .iter()
                .map(|p| (p.support.clone(), lambda * p.value))
                .collect();
            pieces.extend(
                b.pieces()
                    .iter()
                    .map(|p| (p.support.clone(), (1.0 - lambda) * p.value)),
            );
            Measure::density(pieces, *a.quad())
        }
        _ => Ok(Measure::Sum(vec![
            nu1.scale(lambda)?,
            nu2.scale(1.0 - lambda)?,
        ])),
    }
}
