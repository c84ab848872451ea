//! The (p,q)-Bessel/frame functional, empirical bound estimation, and
//! certified analytic bound calculators.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{FrameError, Result};
use crate::geometry::{euclidean_norm, BoxNd};
use crate::measures::Measure;
use crate::quadrature::tensor_nodes;
use crate::sip::{fourier_coefficient, norm_p, ExponentPair, TestFunction};

/// Norms below this are treated as degenerate and rejected.
pub const NORM_FLOOR: f64 = 1e-12;

/// Empirical inner estimates of the frame bounds: `upper_hat` never exceeds
/// the true Bessel bound and `lower_hat` never undercuts the true lower
/// frame bound, because both are extrema over sampled unit-norm functions.
#[derive(Debug, Clone, Serialize)]
pub struct BoundEstimate {
    pub lower_hat: f64,
    pub upper_hat: f64,
    pub sample_count: usize,
    pub family: String,
    pub p: f64,
    pub q: f64,
    pub truncation: Option<usize>,
    pub seed: u64,
}

/// An analytic bound, valid conditional on the recorded premises.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCertificate {
    pub rule: String,
    pub upper: f64,
    pub lower: Option<f64>,
    pub premises: serde_json::Value,
}

/// `int |F(f dmu)(t)|^q dnu(t)`.
///
/// For atomic `nu` this is the q-Bessel sum over the atoms; density `nu`
/// integrates by quadrature. Requires `p > 1`; the `(1, infinity)` endpoint
/// goes through [`crate::sip::sup_norm_transform`] instead.
pub fn bessel_functional(
    f: &TestFunction,
    mu: &Measure,
    nu: &Measure,
    e: &ExponentPair,
) -> Result<f64> {
    if e.is_endpoint() {
        return Err(FrameError::InvalidArgument(
            "p = 1 has no q-sum; use sup_norm_transform".into(),
        ));
    }
    let q = e.q();
    match nu {
        Measure::Atomic(a) => {
            let mut acc = 0.0;
            for atom in a.atoms() {
                let fc = fourier_coefficient(f, &atom.point, mu)?;
                acc += atom.weight * fc.norm().powf(q);
            }
            Ok(acc)
        }
        Measure::Density(d) => {
            let mut acc = 0.0;
            for piece in d.pieces() {
                for (pt, w) in tensor_nodes(d.quad(), &piece.support) {
                    let fc = fourier_coefficient(f, &pt, mu)?;
                    acc += piece.value * w * fc.norm().powf(q);
                }
            }
            Ok(acc)
        }
        Measure::Sum(terms) => {
            let mut acc = 0.0;
            for t in terms {
                acc += bessel_functional(f, mu, t, e)?;
            }
            Ok(acc)
        }
        Measure::Scaled(alpha, inner) => Ok(alpha * bessel_functional(f, mu, inner, e)?),
        _ => Err(FrameError::UnsupportedKind(
            "nu must integrate directly (atomic or density)".into(),
        )),
    }
}

/// Test-function families the estimator draws from.
#[derive(Debug, Clone)]
pub enum TestFamily {
    /// Trig polynomials with integer frequencies in `[-max_freq, max_freq]^d`
    /// and complex Gaussian coefficients.
    Trig { dim: usize, max_freq: i64 },
    /// Random complex values at the atoms of an atomic `mu`.
    AtomValues,
    /// The adversarial modulated indicators `e_{-T} chi_box`.
    ModulatedIndicator { bx: BoxNd, t_values: Vec<f64> },
}

impl TestFamily {
    pub fn default_trig(dim: usize) -> TestFamily {
        TestFamily::Trig { dim, max_freq: 32 }
    }

    fn describe(&self) -> String {
        match self {
            TestFamily::Trig { dim, max_freq } => format!("trig(dim={dim},max_freq={max_freq})"),
            TestFamily::AtomValues => "atom_values".into(),
            TestFamily::ModulatedIndicator { t_values, .. } => {
                format!("modulated_indicator(T={t_values:?})")
            }
        }
    }
}

fn trig_freqs(dim: usize, max_freq: i64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..dim {
        let mut next = Vec::new();
        for base in &out {
            for k in -max_freq..=max_freq {
                let mut v = base.clone();
                v.push(k as f64);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

struct Candidate {
    coeffs: Vec<Complex64>,
    build: Box<dyn Fn(&[Complex64]) -> TestFunction + Sync + Send>,
}

impl Candidate {
    fn function(&self) -> TestFunction {
        (self.build)(&self.coeffs)
    }
}

fn draw_candidate(family: &TestFamily, mu: &Measure, rng: &mut ChaCha8Rng) -> Result<Candidate> {
    match family {
        TestFamily::Trig { dim, max_freq } => {
            let freqs = trig_freqs(*dim, *max_freq);
            let coeffs: Vec<Complex64> = freqs
                .iter()
                .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
                .collect();
            Ok(Candidate {
                coeffs,
                build: Box::new(move |c: &[Complex64]| {
                    TestFunction::TrigPolynomial {
                        dim: freqs[0].len(),
                        terms: freqs.iter().cloned().zip(c.iter().copied()).collect(),
                    }
                }),
            })
        }
        TestFamily::AtomValues => {
            let points: Vec<Vec<f64>> = match mu {
                Measure::Atomic(a) => a.atoms().iter().map(|at| at.point.clone()).collect(),
                _ => {
                    return Err(FrameError::UnsupportedKind(
                        "atom_values family needs an atomic mu".into(),
                    ))
                }
            };
            let coeffs: Vec<Complex64> = points
                .iter()
                .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
                .collect();
            Ok(Candidate {
                coeffs,
                build: Box::new(move |c: &[Complex64]| TestFunction::AtomSamples {
                    points: points.clone(),
                    values: c.to_vec(),
                }),
            })
        }
        TestFamily::ModulatedIndicator { bx, t_values } => {
            let t = t_values[rng.gen_range(0..t_values.len())];
            let bx = bx.clone();
            Ok(Candidate {
                coeffs: Vec::new(),
                build: Box::new(move |_| {
                    TestFunction::indicator(bx.clone()).modulate(vec![-t; bx.dim()])
                }),
            })
        }
    }
}

fn ratio_of(
    cand: &Candidate,
    mu: &Measure,
    nu: &Measure,
    e: &ExponentPair,
) -> Result<Option<f64>> {
    let f = cand.function();
    let n = norm_p(&f, mu, e)?;
    if n < NORM_FLOOR {
        return Ok(None);
    }
    let v = bessel_functional(&f, mu, nu, e)?;
    Ok(Some(v / n.powf(e.q())))
}

/// Empirical frame-bound estimation: random draws from the family followed
/// by coordinate-wise local search (perturb one coefficient component,
/// renormalize implicitly through the ratio, keep on improvement).
/// Deterministic given the seed; draws are parallelized with an indexed
/// reduction so thread scheduling cannot change the result.
pub fn estimate_bounds(
    mu: &Measure,
    nu: &Measure,
    e: &ExponentPair,
    families: &[TestFamily],
    budget: usize,
    seed: u64,
) -> Result<BoundEstimate> {
    if families.is_empty() || budget == 0 {
        return Err(FrameError::InvalidArgument("need a family and budget >= 1".into()));
    }
    const REFINE_STEPS: usize = 50;
    const INITIAL_STEP: f64 = 0.25;

    let results: Vec<Result<Option<(f64, f64)>>> = (0..budget)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let family = &families[i % families.len()];
            let mut cand = draw_candidate(family, mu, &mut rng)?;
            let Some(mut ratio) = ratio_of(&cand, mu, nu, e)? else {
                return Ok(None);
            };
            let mut lo = ratio;
            let mut hi = ratio;
            if !cand.coeffs.is_empty() {
                // maximize, then minimize, from the same start
                for maximize in [true, false] {
                    let mut step = INITIAL_STEP;
                    let mut work = Candidate {
                        coeffs: cand.coeffs.clone(),
                        build: std::mem::replace(&mut cand.build, Box::new(|_| unreachable!())),
                    };
                    let mut best = ratio;
                    for s in 0..REFINE_STEPS {
                        let idx = s % work.coeffs.len();
                        let re_part = (s / work.coeffs.len()) % 2 == 0;
                        let old = work.coeffs[idx];
                        let delta = step * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                        work.coeffs[idx] = if re_part {
                            old + Complex64::new(delta, 0.0)
                        } else {
                            old + Complex64::new(0.0, delta)
                        };
                        match ratio_of(&work, mu, nu, e)? {
                            Some(r) if (maximize && r > best) || (!maximize && r < best) => {
                                best = r;
                            }
                            _ => {
                                work.coeffs[idx] = old;
                                step *= 0.5;
                            }
                        }
                    }
                    if maximize {
                        hi = hi.max(best);
                    } else {
                        lo = lo.min(best);
                    }
                    cand.build = work.build;
                }
            }
            ratio = ratio.max(hi).min(f64::INFINITY);
            let _ = ratio;
            Ok(Some((lo, hi)))
        })
        .collect();

    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    let mut samples = 0usize;
    for r in results {
        if let Some((lo, hi)) = r? {
            lower = lower.min(lo);
            upper = upper.max(hi);
            samples += 1;
        }
    }
    if samples == 0 {
        return Err(FrameError::InvalidArgument(
            "family degenerate: every draw had vanishing norm".into(),
        ));
    }
    Ok(BoundEstimate {
        lower_hat: lower,
        upper_hat: upper,
        sample_count: samples,
        family: families.iter().map(|f| f.describe()).collect::<Vec<_>>().join("+"),
        p: e.p(),
        q: e.q(),
        truncation: None,
        seed,
    })
}

/// One evaluated sample of a bound sweep; maps onto the CSV columns
/// `family_id, sample_index, p, q, truncation, functional, norm_q_power,
/// ratio`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub family_id: String,
    pub sample_index: usize,
    pub p: f64,
    pub q: f64,
    pub truncation: usize,
    pub functional: f64,
    pub norm_q_power: f64,
    pub ratio: f64,
}

/// Evaluate `budget` raw family draws (no refinement) and report one row
/// per nondegenerate sample. Deterministic given the seed.
pub fn sweep(
    mu: &Measure,
    nu: &Measure,
    e: &ExponentPair,
    families: &[TestFamily],
    budget: usize,
    seed: u64,
    truncation: usize,
) -> Result<Vec<SweepRow>> {
    if families.is_empty() || budget == 0 {
        return Err(FrameError::InvalidArgument("need a family and budget >= 1".into()));
    }
    let mut rows = Vec::new();
    for i in 0..budget {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let family = &families[i % families.len()];
        let cand = draw_candidate(family, mu, &mut rng)?;
        let f = cand.function();
        let n = norm_p(&f, mu, e)?;
        if n < NORM_FLOOR {
            continue;
        }
        let functional = bessel_functional(&f, mu, nu, e)?;
        let norm_q_power = n.powf(e.q());
        rows.push(SweepRow {
            family_id: family.describe(),
            sample_index: i,
            p: e.p(),
            q: e.q(),
            truncation,
            functional,
            norm_q_power,
            ratio: functional / norm_q_power,
        });
    }
    Ok(rows)
}

/// Holder: every finite `nu` is `(p,q)`-Bessel for finite `mu` with bound
/// `mass(mu) * mass(nu)`.
pub fn holder_bound(mu: &Measure, nu: &Measure, e: &ExponentPair) -> Result<BoundCertificate> {
    let mm = mu.mass()?;
    let nm = nu.mass()?;
    Ok(BoundCertificate {
        rule: "Holder".into(),
        upper: mm * nm,
        lower: None,
        premises: json!({ "mass_mu": mm, "mass_nu": nm, "p": e.p(), "q": e.q() }),
    })
}

/// Riesz-Thorin interpolation arithmetic at the operator-norm level.
///
/// `c0`, `c1` are Bessel *functional* bounds at the endpoint pairs, so the
/// endpoint operator norms are `c^{1/q}` (read as `c` itself at the
/// `(1, infinity)` endpoint). Returns the interpolated pair and a
/// certificate carrying both the operator-norm bound and the functional
/// bound `B^q`.
pub fn riesz_thorin(
    e0: &ExponentPair,
    c0: f64,
    e1: &ExponentPair,
    c1: f64,
    theta: f64,
) -> Result<(ExponentPair, BoundCertificate)> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(FrameError::InvalidArgument("theta must lie in (0,1)".into()));
    }
    if e0 == e1 {
        return Err(FrameError::InvalidArgument("endpoint pairs must differ".into()));
    }
    let inv_p = (1.0 - theta) / e0.p() + theta / e1.p();
    let pair = ExponentPair::new(1.0 / inv_p)?;
    let op0 = if e0.q().is_infinite() { c0 } else { c0.powf(1.0 / e0.q()) };
    let op1 = if e1.q().is_infinite() { c1 } else { c1.powf(1.0 / e1.q()) };
    let op_bound = op0.powf(1.0 - theta) * op1.powf(theta);
    let functional = op_bound.powf(pair.q());
    Ok((
        pair,
        BoundCertificate {
            rule: "RieszThorin".into(),
            upper: functional,
            lower: None,
            premises: json!({
                "p0": e0.p(), "c0": c0, "p1": e1.p(), "c1": c1,
                "theta": theta, "p": pair.p(), "q": pair.q(),
                "operator_norm_bound": op_bound,
            }),
        },
    ))
}

/// Perturbed-spectrum Bessel bound from the Taylor/Minkowski argument:
/// a `q`-Bessel bound `B` with offsets at most `C` and support inside
/// `[-M, M]^d` perturbs to
/// `(B^{1/q} + (B (e^{C^p}-1)^{q-1} (e^{(2 pi M)^q}-1))^{1/q})^q`.
/// When a lower bound `A` is supplied, reports whether the sufficient
/// frame-preservation condition holds and the implied lower bound.
pub fn perturbation_bound(
    bessel: f64,
    e: &ExponentPair,
    c: f64,
    m: f64,
    lower: Option<f64>,
) -> Result<BoundCertificate> {
    let (p, q) = (e.p(), e.q());
    if !q.is_finite() {
        return Err(FrameError::InvalidArgument("perturbation bound needs finite p, q".into()));
    }
    let defect = (bessel
        * (c.powf(p).exp() - 1.0).powf(q - 1.0)
        * ((2.0 * std::f64::consts::PI * m).powf(q).exp() - 1.0))
        .powf(1.0 / q);
    let upper = (bessel.powf(1.0 / q) + defect).powf(q);
    let implied_lower = lower.and_then(|a| {
        let margin = a.powf(1.0 / q) - defect;
        (margin > 0.0).then(|| margin.powf(q))
    });
    Ok(BoundCertificate {
        rule: "Perturbation".into(),
        upper,
        lower: implied_lower,
        premises: json!({
            "bessel": bessel, "p": p, "q": q, "offset_bound": c,
            "support_radius": m, "defect": defect,
            "frame_preserved": implied_lower.is_some(),
            "given_lower": lower,
        }),
    })
}

/// Weighted-exponential factors: a density weight `phi` with
/// `0 < a <= phi <= b` rescales `q`-frame bounds by `a^p / b^{p-q}` below
/// and `b^p / a^{p-q}` above.
pub fn weighted_exponential_bound(
    a: f64,
    b: f64,
    e: &ExponentPair,
    base: Option<(f64, f64)>,
) -> Result<BoundCertificate> {
    if !(a > 0.0 && a <= b && b.is_finite()) {
        return Err(FrameError::InvalidArgument("need 0 < a <= b < infinity".into()));
    }
    let (p, q) = (e.p(), e.q());
    let upper_factor = b.powf(p) / a.powf(p - q);
    let lower_factor = a.powf(p) / b.powf(p - q);
    let (base_a, base_b) = base.unwrap_or((1.0, 1.0));
    Ok(BoundCertificate {
        rule: "WeightedExponential".into(),
        upper: upper_factor * base_b,
        lower: Some(lower_factor * base_a),
        premises: json!({
            "a": a, "b": b, "p": p, "q": q,
            "upper_factor": upper_factor, "lower_factor": lower_factor,
            "base_lower": base_a, "base_upper": base_b,
        }),
    })
}

/// The deconvolution weight `|mu'^(t)|^q dnu(t)`: if `nu` is Bessel for
/// `mu * mu'`, this measure is Bessel for `mu` with the same bound.
pub fn deconvolution_weight(
    nu: &Measure,
    mu_prime: &Measure,
    e: &ExponentPair,
    grid_per_unit: usize,
) -> Result<Measure> {
    let q = e.q();
    match nu {
        Measure::Atomic(a) => {
            let mut atoms = Vec::new();
            for atom in a.atoms() {
                // transform magnitudes below numerical resolution count as
                // exact zeros of mu'^
                let norm = mu_prime.fourier_stieltjes(&atom.point)?.norm();
                let w = if norm < 1e-12 { 0.0 } else { atom.weight * norm.powf(q) };
                if w > 0.0 {
                    atoms.push((atom.point.clone(), w));
                }
            }
            if atoms.is_empty() {
                return Err(FrameError::Evaluation(
                    "deconvolution weight vanishes at every atom".into(),
                ));
            }
            Measure::atomic(atoms)
        }
        Measure::Density(d) => {
            // multiply the density by |mu'^|^q sampled on a grid
            let n_per_unit = grid_per_unit.max(1);
            let mut pieces = Vec::new();
            for piece in d.pieces() {
                let bx = &piece.support;
                let mut grids: Vec<Vec<(f64, f64)>> = Vec::new();
                for iv in &bx.intervals {
                    let n = (((iv[1] - iv[0]) * n_per_unit as f64).ceil() as usize).max(1);
                    let h = (iv[1] - iv[0]) / n as f64;
                    grids.push((0..n).map(|k| (iv[0] + k as f64 * h, h)).collect());
                }
                let mut cells: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
                for axis in &grids {
                    let mut next = Vec::new();
                    for c in &cells {
                        for seg in axis {
                            let mut cc = c.clone();
                            cc.push(*seg);
                            next.push(cc);
                        }
                    }
                    cells = next;
                }
                for cell in cells {
                    let center: Vec<f64> = cell.iter().map(|(lo, h)| lo + 0.5 * h).collect();
                    let w = mu_prime.fourier_stieltjes(&center)?.norm().powf(q);
                    let val = piece.value * w;
                    if val > 0.0 {
                        let cb = BoxNd {
                            intervals: cell.iter().map(|(lo, h)| [*lo, lo + h]).collect(),
                        };
                        pieces.push((cb, val));
                    }
                }
            }
            Measure::density(pieces, *d.quad())
        }
        _ => Err(FrameError::UnsupportedKind(
            "deconvolution weight needs atomic or density nu".into(),
        )),
    }
}

/// Envelope sums of the stability theorem: the integral of
/// `sup_{|y| <= r} |F(x+y)|^q` (and the inf analogue) against `nu`,
/// probed on a deterministic net in the ball of radius `r`.
/// Always brackets the plain functional.
pub fn envelope_functional(
    f: &TestFunction,
    mu: &Measure,
    nu: &Measure,
    e: &ExponentPair,
    radius: f64,
    probes_per_axis: usize,
) -> Result<(f64, f64)> {
    if !(radius > 0.0) {
        return Err(FrameError::InvalidArgument("radius must be positive".into()));
    }
    let q = e.q();
    let dim = mu.dim();
    let net = ball_net(dim, radius, probes_per_axis.max(3));
    let weighted_points: Vec<(Vec<f64>, f64)> = collect_nu_nodes(nu)?;
    let mut inf_sum = 0.0;
    let mut sup_sum = 0.0;
    for (x, w) in &weighted_points {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for y in &net {
            let t: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
            let v = fourier_coefficient(f, &t, mu)?.norm().powf(q);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        inf_sum += w * lo;
        sup_sum += w * hi;
    }
    Ok((inf_sum, sup_sum))
}

/// Deterministic probe net inside the closed ball of radius `r`, always
/// containing the origin.
fn ball_net(dim: usize, r: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| -r + 2.0 * r * i as f64 / (per_axis - 1) as f64)
        .collect();
    let mut pts: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..dim {
        let mut next = Vec::new();
        for p in &pts {
            for &x in &axis {
                let mut pp = p.clone();
                pp.push(x);
                next.push(pp);
            }
        }
        pts = next;
    }
    let mut out: Vec<Vec<f64>> = pts
        .into_iter()
        .filter(|p| euclidean_norm(p) <= r + 1e-15)
        .collect();
    let origin = vec![0.0; dim];
    if !out.contains(&origin) {
        out.push(origin);
    }
    out
}

/// Atoms (or quadrature nodes weighted by the density) of `nu`.
fn collect_nu_nodes(nu: &Measure) -> Result<Vec<(Vec<f64>, f64)>> {
    match nu {
        Measure::Atomic(a) => Ok(a
            .atoms()
            .iter()
            .map(|at| (at.point.clone(), at.weight))
            .collect()),
        Measure::Density(d) => {
            let mut out = Vec::new();
            for piece in d.pieces() {
                for (pt, w) in tensor_nodes(d.quad(), &piece.support) {
                    out.push((pt, w * piece.value));
                }
            }
            Ok(out)
        }
        Measure::Sum(terms) => {
            let mut out = Vec::new();
            for t in terms {
                out.extend(collect_nu_nodes(t)?);
            }
            Ok(out)
        }
        Measure::Scaled(alpha, inner) => Ok(collect_nu_nodes(inner)?
            .into_iter()
            .map(|(p, w)| (p, w * alpha))
            .collect()),
        _ => Err(FrameError::UnsupportedKind(
            "envelope sums need atomic or density nu".into(),
        )),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaFinitenessReport {
    pub epsilon: f64,
    pub delta: f64,
    pub limit: f64,
    pub violations: Vec<(Vec<f64>, f64)>,
    pub probes: usize,
}

impl SigmaFinitenessReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Ball-mass test behind sigma-finiteness: find `epsilon` with
/// `|mu^| >= 1 - eta` on `B(0, epsilon)`, then check
/// `nu(B(t, epsilon)) <= B / (1 - eta)^q` at probe centers across the
/// window. A valid Bessel bound `B` cannot be violated; any reported
/// violation contradicts the premise.
pub fn sigma_finiteness_probe(
    nu: &Measure,
    mu: &Measure,
    e: &ExponentPair,
    bessel: f64,
    eta: f64,
    window: &BoxNd,
    probe_count: usize,
) -> Result<SigmaFinitenessReport> {
    if !mu.is_probability() {
        return Err(FrameError::InvalidArgument("mu must be a probability measure".into()));
    }
    if !(0.0..1.0).contains(&eta) {
        return Err(FrameError::InvalidArgument("eta must lie in [0, 1)".into()));
    }
    let q = e.q();
    let delta = (1.0 - eta).powf(q);
    let dim = mu.dim();

    // shrink epsilon until |mu^| stays above 1 - eta on the sampled ball
    let mut epsilon = 1.0f64;
    'search: loop {
        for y in ball_net(dim, epsilon, 9) {
            if mu.fourier_stieltjes(&y)?.norm() < 1.0 - eta {
                epsilon *= 0.5;
                if epsilon < 1e-6 {
                    return Err(FrameError::Evaluation(
                        "could not locate a transform lower-bound ball".into(),
                    ));
                }
                continue 'search;
            }
        }
        break;
    }

    let limit = bessel / delta;
    let n = probe_count.max(2);
    let mut violations = Vec::new();
    let mut idx = vec![0usize; window.dim()];
    let mut probes = 0usize;
    loop {
        let t: Vec<f64> = window
            .intervals
            .iter()
            .zip(&idx)
            .map(|(iv, &i)| iv[0] + (iv[1] - iv[0]) * i as f64 / (n - 1) as f64)
            .collect();
        let mass = nu.ball_mass(&t, epsilon)?;
        probes += 1;
        if mass > limit + 1e-12 {
            violations.push((t, mass));
        }
        let mut k = 0;
        loop {
            if k == window.dim() {
                return Ok(SigmaFinitenessReport { epsilon, delta, limit, violations, probes });
            }
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::convolve;
    use crate::quadrature::QuadSpec;
    use crate::spectra::{as_atomic_measure, SpectrumSet};
    use approx::assert_abs_diff_eq;

    fn two_atom() -> Measure {
        Measure::atomic(vec![(vec![0.0], 0.5), (vec![0.5], 0.5)]).unwrap()
    }

    fn random_trig(seed: u64, max_freq: i64) -> TestFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TestFunction::TrigPolynomial {
            dim: 1,
            terms: (-max_freq..=max_freq)
                .map(|k| (vec![k as f64], Complex64::new(gaussian(&mut rng), gaussian(&mut rng))))
                .collect(),
        }
    }

    #[test]
    fn dirac_mu_gives_tight_functional() {
        // mu = delta_0: the functional is exactly mass(nu) * ||f||^q
        let mu = Measure::dirac(vec![0.0]);
        let nu = Measure::atomic(vec![(vec![1.0], 0.5), (vec![3.5], 1.5)]).unwrap();
        for p in [1.5, 2.0, 4.0] {
            let e = ExponentPair::new(p).unwrap();
            for seed in 0..10 {
                let f = random_trig(seed, 3);
                let v = bessel_functional(&f, &mu, &nu, &e).unwrap();
                let n = norm_p(&f, &mu, &e).unwrap();
                assert_abs_diff_eq!(v, 2.0 * n.powf(e.q()), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn two_atom_parseval() {
        // orthonormal basis {e_0, e_1} for the two-atom measure
        let mu = two_atom();
        let nu = Measure::atomic(vec![(vec![0.0], 1.0), (vec![1.0], 1.0)]).unwrap();
        let e = ExponentPair::new(2.0).unwrap();
        for seed in 0..20 {
            let f = random_trig(seed, 2);
            let v = bessel_functional(&f, &mu, &nu, &e).unwrap();
            let n = norm_p(&f, &mu, &e).unwrap();
            assert_abs_diff_eq!(v, n * n, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_interval_closed_form() {
        // f = chi_[0,1], mu' the two-interval probability measure,
        // nu over Z union Z+1/4: the sum converges to 1/2
        let mu = Measure::density(
            vec![
                (BoxNd::interval(0.0, 1.0), 0.5),
                (BoxNd::interval(2.0, 3.0), 0.5),
            ],
            QuadSpec::default(),
        )
        .unwrap();
        let f = TestFunction::indicator(BoxNd::interval(0.0, 1.0));
        let e = ExponentPair::new(2.0).unwrap();
        let nu = as_atomic_measure(&SpectrumSet::z_union_z_quarter(), 100, None).unwrap();
        let v = bessel_functional(&f, &mu, &nu, &e).unwrap();
        // quarter from lambda = 0 plus the tail sum toward another quarter
        assert!(v > 0.49 && v <= 0.5 + 1e-12, "{v}");
    }

    #[test]
    fn functional_monotone_in_truncation() {
        let mu = Measure::lebesgue_on(BoxNd::unit(1));
        let f = random_trig(3, 4);
        let e = ExponentPair::new(2.0).unwrap();
        let lam = SpectrumSet::integer_lattice(1);
        let mut prev = 0.0;
        for level in 1..6 {
            let nu = as_atomic_measure(&lam, level, None).unwrap();
            let v = bessel_functional(&f, &mu, &nu, &e).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn functional_rejects_endpoint_and_lazy_nu() {
        let mu = two_atom();
        let f = TestFunction::constant(1, Complex64::ONE);
        let e1 = ExponentPair::new(1.0).unwrap();
        let nu = two_atom();
        assert!(bessel_functional(&f, &mu, &nu, &e1).is_err());

        let lazy = Measure::Convolution(Box::new(two_atom()), Box::new(two_atom()));
        let e = ExponentPair::new(2.0).unwrap();
        assert!(bessel_functional(&f, &mu, &lazy, &e).is_err());
    }

    #[test]
    fn convolution_closure_identity_exact() {
        // functional with nu * rho equals the double sum, exactly for atoms
        let mu = two_atom();
        let nu = Measure::atomic(vec![(vec![0.0], 1.0), (vec![1.0], 1.0)]).unwrap();
        let rho = Measure::atomic(vec![(vec![0.25], 0.5), (vec![-0.5], 0.5)]).unwrap();
        let conv = convolve(&nu, &rho).unwrap();
        let e = ExponentPair::new(1.5).unwrap();
        let f = random_trig(9, 2);
        let lhs = bessel_functional(&f, &mu, &conv, &e).unwrap();
        let mut rhs = 0.0;
        for (t, wt) in [(0.0, 1.0), (1.0, 1.0)] {
            for (s, ws) in [(0.25, 0.5), (-0.5, 0.5)] {
                let fc = fourier_coefficient(&f, &[t + s], &mu).unwrap();
                rhs += wt * ws * fc.norm().powf(e.q());
            }
        }
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn functional_convex_in_nu() {
        let mu = two_atom();
        let nu1 = Measure::atomic(vec![(vec![0.0], 1.0)]).unwrap();
        let nu2 = Measure::atomic(vec![(vec![0.3], 2.0)]).unwrap();
        let lam = 0.3;
        let combo = Measure::Sum(vec![
            nu1.scale(lam).unwrap(),
            nu2.scale(1.0 - lam).unwrap(),
        ]);
        let e = ExponentPair::new(2.0).unwrap();
        let f = random_trig(4, 2);
        let lhs = bessel_functional(&f, &mu, &combo, &e).unwrap();
        let rhs = lam * bessel_functional(&f, &mu, &nu1, &e).unwrap()
            + (1.0 - lam) * bessel_functional(&f, &mu, &nu2, &e).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-14);
    }

    #[test]
    fn functional_scaling_in_mu_mass() {
        // q-homogeneity in the mass scale of mu
        let mu = two_atom();
        let alpha = 2.5;
        let scaled = mu.scale(alpha).unwrap();
        let nu = Measure::atomic(vec![(vec![0.0], 1.0), (vec![1.0], 1.0)]).unwrap();
        let e = ExponentPair::new(2.0).unwrap();
        let f = random_trig(5, 2);
        let v = bessel_functional(&f, &mu, &nu, &e).unwrap();
        let vs = bessel_functional(&f, &scaled, &nu, &e).unwrap();
        assert_abs_diff_eq!(vs, alpha.powf(e.q()) * v, epsilon = 1e-10);
        // and the norm scales by alpha^{q/p}
        let n = norm_p(&f, &mu, &e).unwrap();
        let ns = norm_p(&f, &scaled, &e).unwrap();
        assert_abs_diff_eq!(
            ns.powf(e.q()),
            alpha.powf(e.q() / e.p()) * n.powf(e.q()),
            epsilon = 1e-10
        );
    }

    #[test]
    fn estimator_tight_for_dirac() {
        let mu = Measure::dirac(vec![0.0]);
        let nu = Measure::atomic(vec![(vec![0.5], 1.0), (vec![2.0], 1.0)]).unwrap();
        let e = ExponentPair::new(2.0).unwrap();
        let est = estimate_bounds(&mu, &nu, &e, &[TestFamily::Trig { dim: 1, max_freq: 2 }], 20, 1)
            .unwrap();
        assert_abs_diff_eq!(est.lower_hat, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(est.upper_hat, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn estimator_is_deterministic() {
        let mu = two_atom();
        let nu = Measure::atomic(vec![(vec![0.0], 1.0), (vec![1.0], 1.0)]).unwrap();
        let e = ExponentPair::new(1.5).unwrap();
        let fam = [TestFamily::Trig { dim: 1, max_freq: 2 }];
        let a = estimate_bounds(&mu, &nu, &e, &fam, 8, 77).unwrap();
        let b = estimate_bounds(&mu, &nu, &e, &fam, 8, 77).unwrap();
        assert_eq!(a.lower_hat, b.lower_hat);
        assert_eq!(a.upper_hat, b.upper_hat);
    }

    #[test]
    fn holder_certificate_examples() {
        let e = ExponentPair::new(2.0).unwrap();
        let c = holder_bound(&two_atom(), &two_atom(), &e).unwrap();
        assert_abs_diff_eq!(c.upper, 1.0, epsilon = 1e-14);
        let big = two_atom().scale(2.0).unwrap();
        let bigger = two_atom().scale(3.0).unwrap();
        let c = holder_bound(&big, &bigger, &e).unwrap();
        assert_abs_diff_eq!(c.upper, 6.0, epsilon = 1e-12);
    }

    #[test]
    fn riesz_thorin_arithmetic() {
        let e0 = ExponentPair::new(1.0).unwrap();
        let e1 = ExponentPair::new(2.0).unwrap();
        let (pair, cert) = riesz_thorin(&e0, 1.0, &e1, 1.0, 0.5).unwrap();
        assert_abs_diff_eq!(pair.p(), 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(pair.q(), 4.0, epsilon = 1e-14);
        assert!(cert.upper <= 1.0 + 1e-14);

        // endpoint convention with c0 = 4
        let (pair2, cert2) = riesz_thorin(&e0, 4.0, &e1, 1.0, 0.5).unwrap();
        let op = cert2.premises["operator_norm_bound"].as_f64().unwrap();
        assert_abs_diff_eq!(op, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cert2.upper, 2.0f64.powf(pair2.q()), epsilon = 1e-10);

        // plain exponent arithmetic
        let (pair3, _) = riesz_thorin(&e0, 1.0, &e1, 1.0, 2.0 / 3.0).unwrap();
        assert_abs_diff_eq!(pair3.p(), 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(pair3.q(), 3.0, epsilon = 1e-13);

        assert!(riesz_thorin(&e0, 1.0, &e1, 1.0, 1.0).is_err());
    }

    #[test]
    fn perturbation_certificate() {
        let e = ExponentPair::new(2.0).unwrap();
        // C = 0 collapses to the original bound
        let c = perturbation_bound(1.0, &e, 0.0, 0.5, None).unwrap();
        assert_abs_diff_eq!(c.upper, 1.0, epsilon = 1e-14);

        // plug-in arithmetic at B=1, p=q=2, M=1/2, C=0.01
        let c = perturbation_bound(1.0, &e, 0.01, 0.5, None).unwrap();
        let expected = {
            let defect = ((1e-4f64.exp() - 1.0) * ((std::f64::consts::PI.powi(2)).exp() - 1.0))
                .sqrt();
            (1.0 + defect).powi(2)
        };
        assert_abs_diff_eq!(c.upper, expected, epsilon = 1e-10);
    }

    #[test]
    fn weighted_exponential_factors() {
        let e2 = ExponentPair::new(2.0).unwrap();
        let c = weighted_exponential_bound(1.0, 1.0, &e2, None).unwrap();
        assert_abs_diff_eq!(c.upper, 1.0);
        assert_abs_diff_eq!(c.lower.unwrap(), 1.0);

        let c = weighted_exponential_bound(0.5, 3.0, &e2, None).unwrap();
        assert_abs_diff_eq!(c.upper, 9.0, epsilon = 1e-13);
        assert_abs_diff_eq!(c.lower.unwrap(), 0.25, epsilon = 1e-13);

        assert!(weighted_exponential_bound(2.0, 1.0, &e2, None).is_err());
    }

    #[test]
    fn deconvolution_examples() {
        let e = ExponentPair::new(2.0).unwrap();
        let nu = as_atomic_measure(&SpectrumSet::integer_lattice(1), 3, None).unwrap();

        // mu' = delta_0 leaves nu unchanged
        let same = deconvolution_weight(&nu, &Measure::dirac(vec![0.0]), &e, 8).unwrap();
        assert_abs_diff_eq!(same.mass().unwrap(), nu.mass().unwrap(), epsilon = 1e-12);

        // mu' = leb[0,1] kills every nonzero integer atom
        let leb = Measure::lebesgue_on(BoxNd::unit(1));
        let filtered = deconvolution_weight(&nu, &leb, &e, 8).unwrap();
        match &filtered {
            Measure::Atomic(a) => {
                assert_eq!(a.atoms().len(), 1);
                assert_eq!(a.atoms()[0].point, vec![0.0]);
            }
            _ => panic!("expected atomic"),
        }
    }

    #[test]
    fn envelope_sandwich() {
        let mu = two_atom();
        let nu = Measure::atomic(vec![(vec![0.0], 1.0), (vec![1.0], 1.0)]).unwrap();
        let e = ExponentPair::new(2.0).unwrap();
        for seed in 0..5 {
            let f = random_trig(seed, 2);
            let v = bessel_functional(&f, &mu, &nu, &e).unwrap();
            let (lo, hi) = envelope_functional(&f, &mu, &nu, &e, 0.1, 9).unwrap();
            assert!(lo <= v + 1e-12 && v <= hi + 1e-12, "{lo} {v} {hi}");
            // radius down, envelopes tighten toward the functional
            let (lo2, hi2) = envelope_functional(&f, &mu, &nu, &e, 0.01, 9).unwrap();
            assert!(hi2 - lo2 <= hi - lo + 1e-12);
        }
    }

    #[test]
    fn sigma_finiteness_passes_for_lattice() {
        let mu = Measure::lebesgue_on(BoxNd::unit(1));
        let nu = as_atomic_measure(&SpectrumSet::integer_lattice(1), 10, None).unwrap();
        let e = ExponentPair::new(2.0).unwrap();
        let window = BoxNd::interval(-5.0, 5.0);
        let report = sigma_finiteness_probe(&nu, &mu, &e, 1.0, 0.5, &window, 41).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_abs_diff_eq!(report.delta, 0.25);

        // a heavy atom violates the premise
        let bad = Measure::atomic(vec![(vec![0.5], 100.0)]).unwrap();
        let report = sigma_finiteness_probe(&bad, &mu, &e, 1.0, 0.5, &window, 41).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn eta_zero_gives_delta_one() {
        let e = ExponentPair::new(2.0).unwrap();
        assert_abs_diff_eq!((1.0f64 - 0.0).powf(e.q()), 1.0);
    }
}
