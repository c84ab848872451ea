//! The compatible semi-inner product on `L^p(mu)`, norms, and Fourier
//! coefficients of `f dmu`.

use num_complex::Complex64;

use crate::error::{FrameError, Result};
use crate::geometry::BoxNd;
use crate::measures::Measure;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Conjugate exponents `(p, q)` with `1/p + 1/q = 1`. Only `p` is stored;
/// `q` is always derived, so the identity holds exactly. `p = 1` pairs with
/// `q = infinity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair {
    p: f64,
}

impl ExponentPair {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(FrameError::InvalidArgument(format!(
                "p must lie in [1, infinity), got {p}"
            )));
        }
        Ok(ExponentPair { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        if self.p == 1.0 {
            f64::INFINITY
        } else {
            self.p / (self.p - 1.0)
        }
    }

    /// The `(1, infinity)` endpoint.
    pub fn is_endpoint(&self) -> bool {
        self.p == 1.0
    }
}

/// An element of `L^p(mu)` in evaluable form.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// Finite combination of exponentials `sum_j c_j e^{2 pi i f_j . x}`,
    /// defined on all of `R^d`.
    TrigPolynomial {
        dim: usize,
        terms: Vec<(Vec<f64>, Complex64)>,
    },
    /// Piecewise-constant function: complex value per cell, zero outside.
    /// Overlapping cells contribute additively.
    Simple {
        dim: usize,
        cells: Vec<(BoxNd, Complex64)>,
    },
    /// Values sampled at the atoms of an atomic measure.
    AtomSamples {
        points: Vec<Vec<f64>>,
        values: Vec<Complex64>,
    },
    /// `e^{2 pi i s . x}` times a base function (the modulated family of the
    /// no-frame counterexample lives here).
    Modulated {
        freq: Vec<f64>,
        base: Box<TestFunction>,
    },
}

impl TestFunction {
    pub fn exponential(freq: Vec<f64>) -> TestFunction {
        TestFunction::TrigPolynomial {
            dim: freq.len(),
            terms: vec![(freq, Complex64::ONE)],
        }
    }

    pub fn constant(dim: usize, c: Complex64) -> TestFunction {
        TestFunction::TrigPolynomial {
            dim,
            terms: vec![(vec![0.0; dim], c)],
        }
    }

    pub fn trig(terms: Vec<(Vec<f64>, Complex64)>) -> Result<TestFunction> {
        if terms.is_empty() {
            return Err(FrameError::InvalidArgument("trig polynomial needs terms".into()));
        }
        let dim = terms[0].0.len();
        for i in 0..terms.len() {
            if terms[i].0.len() != dim {
                return Err(FrameError::DimensionMismatch { expected: dim, got: terms[i].0.len() });
            }
            for j in 0..i {
                if crate::geometry::euclidean_dist(&terms[i].0, &terms[j].0) == 0.0 {
                    return Err(FrameError::InvalidArgument(
                        "trig polynomial frequencies must be pairwise distinct".into(),
                    ));
                }
            }
        }
        Ok(TestFunction::TrigPolynomial { dim, terms })
    }

    pub fn indicator(bx: BoxNd) -> TestFunction {
        TestFunction::Simple {
            dim: bx.dim(),
            cells: vec![(bx, Complex64::ONE)],
        }
    }

    /// `e_s . f`.
    pub fn modulate(self, freq: Vec<f64>) -> TestFunction {
        match self {
            TestFunction::TrigPolynomial { dim, terms } => TestFunction::TrigPolynomial {
                dim,
                terms: terms
                    .into_iter()
                    .map(|(f, c)| (crate::geometry::add(&f, &freq), c))
                    .collect(),
            },
            base => TestFunction::Modulated { freq, base: Box::new(base) },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TestFunction::TrigPolynomial { dim, .. } | TestFunction::Simple { dim, .. } => *dim,
            TestFunction::AtomSamples { points, .. } => points.first().map_or(0, |p| p.len()),
            TestFunction::Modulated { freq, .. } => freq.len(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            TestFunction::TrigPolynomial { terms, .. } => terms
                .iter()
                .map(|(f, c)| c * Complex64::from_polar(1.0, TWO_PI * crate::geometry::dot(f, x)))
                .sum(),
            TestFunction::Simple { cells, .. } => cells
                .iter()
                .filter(|(bx, _)| bx.contains(x))
                .map(|(_, c)| *c)
                .sum(),
            TestFunction::AtomSamples { points, values } => points
                .iter()
                .position(|p| crate::geometry::euclidean_dist(p, x) <= crate::measures::ATOM_MERGE_TOL)
                .map_or(Complex64::new(0.0, 0.0), |i| values[i]),
            TestFunction::Modulated { freq, base } => {
                base.eval(x) * Complex64::from_polar(1.0, TWO_PI * crate::geometry::dot(freq, x))
            }
        }
    }
}

/// `|| f ||_{L^p(mu)} = (int |f|^p dmu)^{1/p}`.
pub fn norm_p(f: &TestFunction, mu: &Measure, e: &ExponentPair) -> Result<f64> {
    let p = e.p();
    let v = mu.integrate(&|x: &[f64]| Complex64::new(f.eval(x).norm().powf(p), 0.0))?;
    Ok(v.re.max(0.0).powf(1.0 / p))
}

/// The compatible semi-inner product
/// `[f, g] = ||g||^{2-p} int f |g|^{p-2} conj(g) dmu`,
/// with the integrand taken as zero wherever `g` vanishes and `[f, g] = 0`
/// when `||g|| = 0`. Defined for finite `p > 1`; at `p = 1` only the
/// sup-norm pathway applies (see [`sup_norm_transform`]).
pub fn semi_inner_product(
    f: &TestFunction,
    g: &TestFunction,
    mu: &Measure,
    e: &ExponentPair,
) -> Result<Complex64> {
    let p = e.p();
    if p <= 1.0 {
        return Err(FrameError::InvalidArgument(
            "the semi-inner product formula requires p > 1".into(),
        ));
    }
    let g_norm = norm_p(g, mu, e)?;
    if g_norm == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let integral = mu.integrate(&|x: &[f64]| {
        let gv = g.eval(x);
        let m = gv.norm();
        if m == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            f.eval(x) * m.powf(p - 2.0) * gv.conj()
        }
    })?;
    Ok(integral * g_norm.powf(2.0 - p))
}

/// Fourier coefficient `[f, e_t] = int f(x) e^{-2 pi i t.x} dmu(x)`,
/// independent of `p`. Exact for atomic measures, for trig polynomials
/// against any measure with an evaluable transform, and for
/// piecewise-constant `f` against piecewise-constant densities.
pub fn fourier_coefficient(f: &TestFunction, t: &[f64], mu: &Measure) -> Result<Complex64> {
    match f {
        TestFunction::TrigPolynomial { terms, .. } => {
            // int e^{2 pi i f_j.x} e^{-2 pi i t.x} dmu = mu^(t - f_j)
            let mut acc = Complex64::new(0.0, 0.0);
            for (fj, c) in terms {
                let shifted: Vec<f64> = t.iter().zip(fj).map(|(a, b)| a - b).collect();
                acc += c * mu.fourier_stieltjes(&shifted)?;
            }
            Ok(acc)
        }
        TestFunction::Modulated { freq, base } => {
            let shifted: Vec<f64> = t.iter().zip(freq).map(|(a, b)| a - b).collect();
            fourier_coefficient(base, &shifted, mu)
        }
        _ => transform_against(f, t, mu),
    }
}

fn transform_against(f: &TestFunction, t: &[f64], mu: &Measure) -> Result<Complex64> {
    match mu {
        Measure::Density(d) => {
            if let TestFunction::Simple { cells, .. } = f {
                // closed form on each cell/piece overlap
                let mut acc = Complex64::new(0.0, 0.0);
                for (cell, c) in cells {
                    for piece in d.pieces() {
                        if let Some(overlap) = cell.intersect(&piece.support) {
                            if overlap.volume() > 0.0 {
                                acc += c * piece.value * crate::measures::box_transform(&overlap, t);
                            }
                        }
                    }
                }
                return Ok(acc);
            }
            direct_transform(f, t, mu)
        }
        Measure::Sum(terms) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in terms {
                acc += transform_against(f, t, m)?;
            }
            Ok(acc)
        }
        Measure::Scaled(alpha, inner) => Ok(transform_against(f, t, inner)? * *alpha),
        _ => direct_transform(f, t, mu),
    }
}

fn direct_transform(f: &TestFunction, t: &[f64], mu: &Measure) -> Result<Complex64> {
    mu.integrate(&|x: &[f64]| {
        f.eval(x) * Complex64::from_polar(1.0, -TWO_PI * crate::geometry::dot(t, x))
    })
}

/// Grid maximum of `|F(f dmu)|` over a compact window: a lower estimate of
/// the true sup norm of the transform.
pub fn sup_norm_transform(
    f: &TestFunction,
    mu: &Measure,
    window: &BoxNd,
    grid_per_axis: usize,
) -> Result<f64> {
    let n = grid_per_axis.max(2);
    let dim = window.dim();
    let mut best = 0.0f64;
    let mut idx = vec![0usize; dim];
    loop {
        let t: Vec<f64> = window
            .intervals
            .iter()
            .zip(&idx)
            .map(|(iv, &i)| iv[0] + (iv[1] - iv[0]) * i as f64 / (n - 1) as f64)
            .collect();
        best = best.max(fourier_coefficient(f, &t, mu)?.norm());
        // odometer over the grid
        let mut k = 0;
        loop {
            if k == dim {
                return Ok(best);
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
