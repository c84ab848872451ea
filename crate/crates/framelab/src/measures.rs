//! Finite Borel measures on `R^d` in evaluable form.
//!
//! A measure is one of: a finite atomic combination, an additive
//! piecewise-constant density, a self-similar (IFS) invariant measure exposed
//! through its Fourier-Stieltjes transform only, a lazy convolution node, a
//! finite sum, a scalar multiple, or a lower-dimensional measure embedded
//! into a larger ambient space. All values are immutable after construction;
//! derived measures are new values.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{FrameError, Result};
use crate::geometry::{euclidean_dist, euclidean_norm, BoxNd};
use crate::quadrature::{tensor_nodes, QuadSpec};

pub const ATOM_MERGE_TOL: f64 = 1e-12;
pub const MASS_TOL: f64 = 1e-9;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub point: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(FrameError::InvalidArgument("atomic measure needs atoms".into()));
        }
        let dim = atoms[0].0.len();
        for (point, weight) in &atoms {
            if point.len() != dim {
                return Err(FrameError::DimensionMismatch { expected: dim, got: point.len() });
            }
            if !(*weight > 0.0 && weight.is_finite()) {
                return Err(FrameError::InvalidArgument(format!(
                    "atom weight must be positive, got {weight}"
                )));
            }
        }
        // Merge coincident points with a lexicographic sweep instead of an
        // all-pairs scan; points within the merge tolerance are adjacent in
        // first coordinate after sorting. Output keeps first-appearance order.
        let mut order: Vec<usize> = (0..atoms.len()).collect();
        order.sort_by(|&i, &j| {
            atoms[i]
                .0
                .iter()
                .zip(&atoms[j].0)
                .map(|(a, b)| a.total_cmp(b))
                .find(|c| *c != std::cmp::Ordering::Equal)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        // (point, weight, first original index)
        let mut clusters: Vec<(Vec<f64>, f64, usize)> = Vec::with_capacity(atoms.len());
        let mut window_start = 0usize;
        for &idx in &order {
            let (point, weight) = &atoms[idx];
            while window_start < clusters.len()
                && point[0] - clusters[window_start].0[0] > ATOM_MERGE_TOL
            {
                window_start += 1;
            }
            let mut merged = false;
            for cluster in clusters[window_start..].iter_mut() {
                if euclidean_dist(&cluster.0, point) <= ATOM_MERGE_TOL {
                    cluster.1 += weight;
                    cluster.2 = cluster.2.min(idx);
                    merged = true;
                    break;
                }
            }
            if !merged {
                clusters.push((point.clone(), *weight, idx));
            }
        }
        clusters.sort_by_key(|c| c.2);
        let out = clusters
            .into_iter()
            .map(|(point, weight, _)| Atom { point, weight })
            .collect();
        Ok(AtomicMeasure { dim, atoms: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }
}

/// One constant piece of an additive piecewise-constant density.
///
/// Pieces may overlap; the density at a point is the sum of the values of all
/// pieces containing it. This keeps translates and sums of densities exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub support: BoxNd,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMeasure {
    dim: usize,
    pieces: Vec<Piece>,
    quad: QuadSpec,
}

impl DensityMeasure {
    pub fn new(pieces: Vec<(BoxNd, f64)>, quad: QuadSpec) -> Result<Self> {
        if pieces.is_empty() {
            return Err(FrameError::InvalidArgument("density needs pieces".into()));
        }
        let dim = pieces[0].0.dim();
        let mut out = Vec::with_capacity(pieces.len());
        for (support, value) in pieces {
            if support.dim() != dim {
                return Err(FrameError::DimensionMismatch { expected: dim, got: support.dim() });
            }
            if !value.is_finite() || value < 0.0 {
                return Err(FrameError::Evaluation(format!(
                    "density value must be finite and nonnegative, got {value}"
                )));
            }
            if value > 0.0 && support.volume() > 0.0 {
                out.push(Piece { support, value });
            }
        }
        if out.is_empty() {
            return Err(FrameError::InvalidArgument("density is identically zero".into()));
        }
        Ok(DensityMeasure { dim, pieces: out, quad })
    }

    /// Lebesgue measure restricted to a box.
    pub fn lebesgue_on(bx: BoxNd) -> Self {
        DensityMeasure {
            dim: bx.dim(),
            pieces: vec![Piece { support: bx, value: 1.0 }],
            quad: QuadSpec::default(),
        }
    }

    pub fn with_quad(mut self, quad: QuadSpec) -> Self {
        self.quad = quad;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn quad(&self) -> &QuadSpec {
        &self.quad
    }

    pub fn mass(&self) -> f64 {
        self.pieces.iter().map(|p| p.value * p.support.volume()).sum()
    }

    /// Pointwise density value (sum over pieces containing `x`).
    pub fn density_at(&self, x: &[f64]) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.support.contains(x))
            .map(|p| p.value)
            .sum()
    }

    pub fn bounding_box(&self) -> BoxNd {
        let mut it = self.pieces.iter();
        let first = it.next().expect("nonempty").support.clone();
        it.fold(first, |acc, p| acc.hull(&p.support))
    }
}

/// Invariant measure of the affine IFS `tau_a(x) = R^{-1}(x + a)` with
/// probability weights `rho_a`. Exposed through its transform only: the
/// measure may be singular, so no pointwise density is available.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarMeasure {
    dim: usize,
    matrix: Vec<Vec<i64>>,
    inv: DMatrix<f64>,
    digits: Vec<Vec<f64>>,
    weights: Vec<f64>,
    tail_tol: f64,
    max_depth: usize,
}

impl SelfSimilarMeasure {
    pub fn new(matrix: Vec<Vec<i64>>, digits: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let dim = matrix.len();
        if dim == 0 || matrix.iter().any(|r| r.len() != dim) {
            return Err(FrameError::InvalidArgument("R must be square".into()));
        }
        let r = DMatrix::from_fn(dim, dim, |i, j| matrix[i][j] as f64);
        // expanding: all eigenvalues strictly outside the unit circle
        // (checked numerically; the metric making tau_a contractive is not
        // fixed by the construction, eigenvalue magnitudes are what we test)
        for ev in r.complex_eigenvalues().iter() {
            if ev.norm() <= 1.0 + 1e-12 {
                return Err(FrameError::InvalidArgument(format!(
                    "R must be expanding; eigenvalue {ev} has |.| <= 1"
                )));
            }
        }
        let inv = r
            .try_inverse()
            .ok_or_else(|| FrameError::InvalidArgument("R is singular".into()))?;
        if digits.len() != weights.len() || digits.len() < 2 {
            return Err(FrameError::InvalidArgument(
                "digits and weights must match with at least 2 entries".into(),
            ));
        }
        if !digits.iter().any(|d| d.iter().all(|&x| x == 0.0)) {
            return Err(FrameError::InvalidArgument("digit set must contain 0".into()));
        }
        if digits.iter().any(|d| d.len() != dim) {
            return Err(FrameError::InvalidArgument("digit dimension mismatch".into()));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w <= 0.0 || w >= 1.0) || (sum - 1.0).abs() > MASS_TOL {
            return Err(FrameError::InvalidArgument(
                "weights must lie in (0,1) and sum to 1".into(),
            ));
        }
        Ok(SelfSimilarMeasure {
            dim,
            matrix,
            inv,
            digits,
            weights,
            tail_tol: 1e-10,
            max_depth: 256,
        })
    }

    /// The Jorgensen-Pedersen measure `mu_4`: R = 4, digits {0, 2}, equal weights.
    pub fn mu4() -> Self {
        SelfSimilarMeasure::new(vec![vec![4]], vec![vec![0.0], vec![2.0]], vec![0.5, 0.5])
            .expect("mu4 data is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn digits(&self) -> &[Vec<f64>] {
        &self.digits
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Digit mask `m_A(s) = sum_a rho_a e^{-2 pi i a.s}`.
    pub fn mask(&self, s: &[f64]) -> Complex64 {
        self.digits
            .iter()
            .zip(&self.weights)
            .map(|(a, &rho)| {
                let phase = -TWO_PI * crate::geometry::dot(a, s);
                Complex64::from_polar(rho, phase)
            })
            .sum()
    }

    /// Truncated product `prod_{k=1..depth} m_A(R^{-k} t)`.
    pub fn transform_at_depth(&self, t: &[f64], depth: usize) -> Complex64 {
        let mut s = DMatrix::from_column_slice(self.dim, 1, t);
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..depth {
            s = &self.inv * s;
            acc *= self.mask(s.as_slice());
        }
        acc
    }

    /// Adaptive product: stops once the geometric tail bound
    /// `|1 - m_A(s)| <= 2 pi max|a| |s|` summed below `tail_tol`.
    pub fn transform(&self, t: &[f64]) -> Complex64 {
        let max_digit = self
            .digits
            .iter()
            .map(|d| euclidean_norm(d))
            .fold(0.0, f64::max);
        let mut s = DMatrix::from_column_slice(self.dim, 1, t);
        let mut acc = Complex64::new(1.0, 0.0);
        let mut prev_norm = f64::INFINITY;
        for k in 0..self.max_depth {
            s = &self.inv * s;
            acc *= self.mask(s.as_slice());
            let n = euclidean_norm(s.as_slice());
            if k >= 8 && n < prev_norm {
                let ratio = (n / prev_norm).min(0.99);
                let tail = TWO_PI * max_digit * n * ratio / (1.0 - ratio);
                if tail < self.tail_tol {
                    break;
                }
            }
            prev_norm = n;
        }
        acc
    }
}

/// A finite Borel measure on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Atomic(AtomicMeasure),
    Density(DensityMeasure),
    SelfSimilar(SelfSimilarMeasure),
    Convolution(Box<Measure>, Box<Measure>),
    Sum(Vec<Measure>),
    Scaled(f64, Box<Measure>),
    Embedded {
        inner: Box<Measure>,
        ambient_dim: usize,
        axes: Vec<usize>,
    },
}

impl Measure {
    pub fn atomic(atoms: Vec<(Vec<f64>, f64)>) -> Result<Measure> {
        Ok(Measure::Atomic(AtomicMeasure::new(atoms)?))
    }

    pub fn dirac(point: Vec<f64>) -> Measure {
        Measure::Atomic(AtomicMeasure::new(vec![(point, 1.0)]).expect("valid dirac"))
    }

    pub fn lebesgue_on(bx: BoxNd) -> Measure {
        Measure::Density(DensityMeasure::lebesgue_on(bx))
    }

    pub fn density(pieces: Vec<(BoxNd, f64)>, quad: QuadSpec) -> Result<Measure> {
        Ok(Measure::Density(DensityMeasure::new(pieces, quad)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Measure::Atomic(a) => a.dim(),
            Measure::Density(d) => d.dim(),
            Measure::SelfSimilar(s) => s.dim(),
            Measure::Convolution(a, _) => a.dim(),
            Measure::Sum(terms) => terms[0].dim(),
            Measure::Scaled(_, m) => m.dim(),
            Measure::Embedded { ambient_dim, .. } => *ambient_dim,
        }
    }

    /// Total mass.
    pub fn mass(&self) -> Result<f64> {
        Ok(match self {
            Measure::Atomic(a) => a.mass(),
            Measure::Density(d) => d.mass(),
            Measure::SelfSimilar(_) => 1.0,
            Measure::Convolution(a, b) => a.mass()? * b.mass()?,
            Measure::Sum(terms) => {
                let mut m = 0.0;
                for t in terms {
                    m += t.mass()?;
                }
                m
            }
            Measure::Scaled(alpha, m) => alpha * m.mass()?,
            Measure::Embedded { inner, .. } => inner.mass()?,
        })
    }

    pub fn is_probability(&self) -> bool {
        matches!(self.mass(), Ok(m) if (m - 1.0).abs() <= MASS_TOL)
    }

    /// `int g dmu` for an evaluable complex `g`. Not supported for the
    /// self-similar kind (only the transform is exposed there).
    pub fn integrate(&self, g: &dyn Fn(&[f64]) -> Complex64) -> Result<Complex64> {
        match self {
            Measure::Atomic(a) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for atom in a.atoms() {
                    let v = g(&atom.point);
                    if !v.re.is_finite() || !v.im.is_finite() {
                        return Err(FrameError::Evaluation(format!(
                            "non-finite integrand at {:?}",
                            atom.point
                        )));
                    }
                    acc += v * atom.weight;
                }
                Ok(acc)
            }
            Measure::Density(d) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for piece in d.pieces() {
                    for (pt, w) in tensor_nodes(d.quad(), &piece.support) {
                        let v = g(&pt);
                        if !v.re.is_finite() || !v.im.is_finite() {
                            return Err(FrameError::Evaluation(format!(
                                "non-finite integrand at {pt:?}"
                            )));
                        }
                        acc += v * (w * piece.value);
                    }
                }
                Ok(acc)
            }
            Measure::SelfSimilar(_) => Err(FrameError::UnsupportedKind(
                "direct integration against a self-similar measure; use the transform".into(),
            )),
            Measure::Convolution(a, b) => {
                // iterated integral over the children
                a.integrate(&|x: &[f64]| {
                    b.integrate(&|y: &[f64]| g(&crate::geometry::add(x, y)))
                        .unwrap_or(Complex64::new(f64::NAN, 0.0))
                })
            }
            Measure::Sum(terms) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in terms {
                    acc += t.integrate(g)?;
                }
                Ok(acc)
            }
            Measure::Scaled(alpha, m) => Ok(m.integrate(g)? * *alpha),
            Measure::Embedded { inner, ambient_dim, axes } => {
                inner.integrate(&|x: &[f64]| {
                    let mut amb = vec![0.0; *ambient_dim];
                    for (i, &ax) in axes.iter().enumerate() {
                        amb[ax] = x[i];
                    }
                    g(&amb)
                })
            }
        }
    }

    /// Fourier-Stieltjes transform `mu^(t) = int e^{-2 pi i t.x} dmu(x)`.
    ///
    /// Piecewise-constant densities use the closed-form interval transform,
    /// so the result is exact at any frequency.
    pub fn fourier_stieltjes(&self, t: &[f64]) -> Result<Complex64> {
        if t.len() != self.dim() {
            return Err(FrameError::DimensionMismatch { expected: self.dim(), got: t.len() });
        }
        Ok(match self {
            Measure::Atomic(a) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for atom in a.atoms() {
                    let phase = -TWO_PI * crate::geometry::dot(t, &atom.point);
                    acc += Complex64::from_polar(atom.weight, phase);
                }
                acc
            }
            Measure::Density(d) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for piece in d.pieces() {
                    acc += piece.value * box_transform(&piece.support, t);
                }
                acc
            }
            Measure::SelfSimilar(s) => s.transform(t),
            Measure::Convolution(a, b) => a.fourier_stieltjes(t)? * b.fourier_stieltjes(t)?,
            Measure::Sum(terms) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for m in terms {
                    acc += m.fourier_stieltjes(t)?;
                }
                acc
            }
            Measure::Scaled(alpha, m) => m.fourier_stieltjes(t)? * *alpha,
            Measure::Embedded { inner, axes, .. } => {
                let proj: Vec<f64> = axes.iter().map(|&ax| t[ax]).collect();
                inner.fourier_stieltjes(&proj)?
            }
        })
    }

    /// Measure of the open Euclidean ball `B(center, radius)`.
    pub fn ball_mass(&self, center: &[f64], radius: f64) -> Result<f64> {
        if radius <= 0.0 {
            return Err(FrameError::InvalidArgument("radius must be positive".into()));
        }
        match self {
            Measure::Atomic(a) => Ok(a
                .atoms()
                .iter()
                .filter(|at| euclidean_dist(&at.point, center) < radius)
                .map(|at| at.weight)
                .sum()),
            Measure::Density(d) => {
                let mut acc = 0.0;
                for piece in d.pieces() {
                    acc += piece.value * ball_box_volume(&piece.support, center, radius, d.quad());
                }
                Ok(acc)
            }
            Measure::Sum(terms) => {
                let mut acc = 0.0;
                for m in terms {
                    acc += m.ball_mass(center, radius)?;
                }
                Ok(acc)
            }
            Measure::Scaled(alpha, m) => Ok(alpha * m.ball_mass(center, radius)?),
            Measure::Embedded { inner, ambient_dim, axes } => {
                // the slice cuts the ball at reduced radius
                let mut perp_sq = 0.0;
                for (ax, &c) in center.iter().enumerate().take(*ambient_dim).map(|(i, c)| (i, c)) {
                    if !axes.contains(&ax) {
                        perp_sq += c * c;
                    }
                }
                if perp_sq >= radius * radius {
                    return Ok(0.0);
                }
                let reduced = (radius * radius - perp_sq).sqrt();
                let proj: Vec<f64> = axes.iter().map(|&ax| center[ax]).collect();
                inner.ball_mass(&proj, reduced)
            }
            _ => Err(FrameError::UnsupportedKind(
                "ball_mass needs an atomic or density representation".into(),
            )),
        }
    }

    /// Multiply the measure by a positive scalar.
    pub fn scale(&self, alpha: f64) -> Result<Measure> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(FrameError::InvalidArgument(format!(
                "scale factor must be positive, got {alpha}"
            )));
        }
        Ok(match self {
            Measure::Atomic(a) => Measure::Atomic(
                AtomicMeasure::new(
                    a.atoms()
                        .iter()
                        .map(|at| (at.point.clone(), at.weight * alpha))
                        .collect(),
                )
                .expect("scaled atoms stay valid"),
            ),
            Measure::Density(d) => Measure::Density(
                DensityMeasure::new(
                    d.pieces()
                        .iter()
                        .map(|p| (p.support.clone(), p.value * alpha))
                        .collect(),
                    *d.quad(),
                )
                .expect("scaled pieces stay valid"),
            ),
            Measure::Sum(terms) => {
                let mut out = Vec::with_capacity(terms.len());
                for m in terms {
                    out.push(m.scale(alpha)?);
                }
                Measure::Sum(out)
            }
            Measure::Scaled(beta, m) => Measure::Scaled(alpha * beta, m.clone()),
            other => Measure::Scaled(alpha, Box::new(other.clone())),
        })
    }

    /// Bounding box of the support where a finite description exists.
    pub fn support_box(&self) -> Option<BoxNd> {
        match self {
            Measure::Atomic(a) => {
                let dim = a.dim();
                let mut intervals = vec![[f64::INFINITY, f64::NEG_INFINITY]; dim];
                for at in a.atoms() {
                    for (iv, &x) in intervals.iter_mut().zip(&at.point) {
                        iv[0] = iv[0].min(x);
                        iv[1] = iv[1].max(x);
                    }
                }
                Some(BoxNd { intervals })
            }
            Measure::Density(d) => Some(d.bounding_box()),
            Measure::Convolution(a, b) => {
                Some(a.support_box()?.minkowski_sum(&b.support_box()?))
            }
            Measure::Sum(terms) => {
                let mut it = terms.iter();
                let mut acc = it.next()?.support_box()?;
                for m in it {
                    acc = acc.hull(&m.support_box()?);
                }
                Some(acc)
            }
            Measure::Scaled(_, m) => m.support_box(),
            Measure::Embedded { inner, ambient_dim, axes } => {
                let inner_box = inner.support_box()?;
                let mut intervals = vec![[0.0, 0.0]; *ambient_dim];
                for (i, &ax) in axes.iter().enumerate() {
                    intervals[ax] = inner_box.intervals[i];
                }
                Some(BoxNd { intervals })
            }
            Measure::SelfSimilar(_) => None,
        }
    }
}

/// Transform of the indicator density of a box: a product of per-axis
/// interval transforms `e^{-2 pi i s (a+b)/2} (b-a) sinc(pi s (b-a))`.
pub(crate) fn box_transform(bx: &BoxNd, t: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (iv, &s) in bx.intervals.iter().zip(t) {
        let len = iv[1] - iv[0];
        let mid = 0.5 * (iv[0] + iv[1]);
        let arg = std::f64::consts::PI * s * len;
        let sinc = if arg.abs() < 1e-8 { 1.0 - arg * arg / 6.0 } else { arg.sin() / arg };
        acc *= Complex64::from_polar(1.0, -TWO_PI * s * mid) * (len * sinc);
    }
    acc
}

/// Volume of `box ∩ B(center, radius)`. Exact in 1-d (interval clipping);
/// in higher dimension a tensor quadrature of the ball indicator.
fn ball_box_volume(bx: &BoxNd, center: &[f64], radius: f64, quad: &QuadSpec) -> f64 {
    if bx.dim() == 1 {
        let lo = bx.intervals[0][0].max(center[0] - radius);
        let hi = bx.intervals[0][1].min(center[0] + radius);
        return (hi - lo).max(0.0);
    }
    let mut acc = 0.0;
    for (pt, w) in tensor_nodes(quad, bx) {
        if euclidean_dist(&pt, center) < radius {
            acc += w;
        }
    }
    acc
}

/// Convolution of two finite measures.
///
/// Atomic*atomic and atomic*density stay exact; density*density is evaluated
/// on a grid over the Minkowski-sum box; any other pairing becomes a lazy
/// node usable on the Fourier side only.
pub fn convolve(a: &Measure, b: &Measure) -> Result<Measure> {
    if a.dim() != b.dim() {
        return Err(FrameError::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    match (a, b) {
        (Measure::Atomic(x), Measure::Atomic(y)) => {
            let mut atoms = Vec::with_capacity(x.atoms().len() * y.atoms().len());
            for ax in x.atoms() {
                for ay in y.atoms() {
                    atoms.push((crate::geometry::add(&ax.point, &ay.point), ax.weight * ay.weight));
                }
            }
            Measure::atomic(atoms)
        }
        (Measure::Atomic(x), Measure::Density(d)) | (Measure::Density(d), Measure::Atomic(x)) => {
            // shifted-sum density, exact for piecewise-constant pieces
            let mut pieces = Vec::with_capacity(x.atoms().len() * d.pieces().len());
            for at in x.atoms() {
                for p in d.pieces() {
                    pieces.push((p.support.translate(&at.point), at.weight * p.value));
                }
            }
            Measure::density(pieces, *d.quad())
        }
        (Measure::Density(x), Measure::Density(y)) => {
            let out_box = x.bounding_box().minkowski_sum(&y.bounding_box());
            let quad = *x.quad();
            let cells_per_unit = quad.panels_per_unit.max(1);
            // grid density: h(z) = sum over piece pairs of overlap volume
            let mut grids: Vec<Vec<(f64, f64)>> = Vec::new();
            for iv in &out_box.intervals {
                let n = (((iv[1] - iv[0]) * cells_per_unit as f64).ceil() as usize).max(1);
                let h = (iv[1] - iv[0]) / n as f64;
                grids.push((0..n).map(|k| (iv[0] + k as f64 * h, h)).collect());
            }
            let mut cells: Vec<(Vec<f64>, Vec<f64>)> = vec![(Vec::new(), Vec::new())];
            for axis in &grids {
                let mut next = Vec::with_capacity(cells.len() * axis.len());
                for (lo, h) in &cells {
                    for (alo, ah) in axis {
                        let mut l = lo.clone();
                        let mut hh = h.clone();
                        l.push(*alo);
                        hh.push(*ah);
                        next.push((l, hh));
                    }
                }
                cells = next;
            }
            let mut pieces = Vec::new();
            for (lo, h) in cells {
                let center: Vec<f64> = lo.iter().zip(&h).map(|(l, hh)| l + 0.5 * hh).collect();
                let mut val = 0.0;
                for px in x.pieces() {
                    // z - px.support, intersected with each piece of y
                    let shifted = BoxNd {
                        intervals: px
                            .support
                            .intervals
                            .iter()
                            .zip(&center)
                            .map(|(iv, &z)| [z - iv[1], z - iv[0]])
                            .collect(),
                    };
                    for py in y.pieces() {
                        if let Some(overlap) = shifted.intersect(&py.support) {
                            val += px.value * py.value * overlap.volume();
                        }
                    }
                }
                if val > 0.0 {
                    let bx = BoxNd {
                        intervals: lo.iter().zip(&h).map(|(l, hh)| [*l, l + hh]).collect(),
                    };
                    pieces.push((bx, val));
                }
            }
            Measure::density(pieces, quad)
        }
        _ => Ok(Measure::Convolution(Box::new(a.clone()), Box::new(b.clone()))),
    }
}

/// Mixed-type measure on `R^{n+m}`: `rho = mu x delta_0 + delta_0 x mu'`,
/// i.e. `int f drho = int f(x,0) dmu + int f(0,y) dmu'`.
pub fn mixed_type(a: &Measure, b: &Measure) -> Result<Measure> {
    let n = a.dim();
    let m = b.dim();
    let ambient = n + m;
    let ea = embed(a, ambient, (0..n).collect());
    let eb = embed(b, ambient, (n..ambient).collect());
    // collapse to a plain atomic measure when both summands are atomic
    if let (Measure::Atomic(x), Measure::Atomic(y)) = (&ea, &eb) {
        let mut atoms: Vec<(Vec<f64>, f64)> = x
            .atoms()
            .iter()
            .map(|at| (at.point.clone(), at.weight))
            .collect();
        atoms.extend(y.atoms().iter().map(|at| (at.point.clone(), at.weight)));
        return Measure::atomic(atoms);
    }
    Ok(Measure::Sum(vec![ea, eb]))
}

fn embed(m: &Measure, ambient_dim: usize, axes: Vec<usize>) -> Measure {
    if let Measure::Atomic(a) = m {
        let atoms = a
            .atoms()
            .iter()
            .map(|at| {
                let mut p = vec![0.0; ambient_dim];
                for (i, &ax) in axes.iter().enumerate() {
                    p[ax] = at.point[i];
                }
                (p, at.weight)
            })
            .collect();
        return Measure::Atomic(AtomicMeasure::new(atoms).expect("embedded atoms valid"));
    }
    Measure::Embedded { inner: Box::new(m.clone()), ambient_dim, axes }
}
