//! Countable frequency sets with deterministic enumeration, truncation, and
//! bounded perturbation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FrameError, Result};
use crate::measures::Measure;

/// A countable set `Lambda` of frequencies in `R^d`.
///
/// Enumeration order is part of the contract: lattices enumerate by
/// increasing sup-norm shell (lexicographic within a shell), digit sets
/// ascending, shifted unions shift-major over the base order. Truncations
/// are monotone: `truncate(n)` is a subset of `truncate(n')` for `n <= n'`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSet {
    /// `step * Z^d`.
    Lattice { dim: usize, step: f64 },
    /// Union of translates of a base set.
    ShiftedUnion {
        base: Box<SpectrumSet>,
        shifts: Vec<Vec<f64>>,
    },
    /// `{ sum_{m=0..k} b^m d_m : d_m in D }` on the line; `0 in D` keeps
    /// truncations nested.
    DigitSet { base: i64, digits: Vec<f64> },
    Explicit { points: Vec<Vec<f64>> },
    /// Base set plus per-point offsets bounded by `c` in each coordinate,
    /// reproducible from `seed` and independent of the truncation level.
    Perturbed {
        base: Box<SpectrumSet>,
        c: f64,
        seed: u64,
    },
}

impl SpectrumSet {
    pub fn integer_lattice(dim: usize) -> SpectrumSet {
        SpectrumSet::Lattice { dim, step: 1.0 }
    }

    /// `Z union (Z + 1/4)`, the two-interval spectrum.
    pub fn z_union_z_quarter() -> SpectrumSet {
        SpectrumSet::ShiftedUnion {
            base: Box::new(SpectrumSet::integer_lattice(1)),
            shifts: vec![vec![0.0], vec![0.25]],
        }
    }

    /// The `mu_4` spectrum digits: base 4, digit set {0, 1}.
    pub fn cantor4_spectrum() -> SpectrumSet {
        SpectrumSet::DigitSet { base: 4, digits: vec![0.0, 1.0] }
    }

    pub fn dim(&self) -> usize {
        match self {
            SpectrumSet::Lattice { dim, .. } => *dim,
            SpectrumSet::ShiftedUnion { base, .. } => base.dim(),
            SpectrumSet::DigitSet { .. } => 1,
            SpectrumSet::Explicit { points } => points.first().map_or(1, |p| p.len()),
            SpectrumSet::Perturbed { base, .. } => base.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpectrumSet::Lattice { dim, step } => {
                if *dim == 0 || !(*step > 0.0) {
                    return Err(FrameError::InvalidArgument("lattice needs dim >= 1, step > 0".into()));
                }
            }
            SpectrumSet::ShiftedUnion { base, shifts } => {
                base.validate()?;
                if shifts.is_empty() || shifts.iter().any(|s| s.len() != base.dim()) {
                    return Err(FrameError::InvalidArgument("bad shift list".into()));
                }
            }
            SpectrumSet::DigitSet { base, digits } => {
                if *base < 2 || digits.len() < 2 || !digits.contains(&0.0) {
                    return Err(FrameError::InvalidArgument(
                        "digit set needs base >= 2 and digits containing 0".into(),
                    ));
                }
            }
            SpectrumSet::Explicit { points } => {
                if points.is_empty() {
                    return Err(FrameError::InvalidArgument("explicit set is empty".into()));
                }
                let d = points[0].len();
                if points.iter().any(|p| p.len() != d) {
                    return Err(FrameError::InvalidArgument("inconsistent point dimensions".into()));
                }
            }
            SpectrumSet::Perturbed { base, c, .. } => {
                base.validate()?;
                if !(*c > 0.0) {
                    return Err(FrameError::InvalidArgument("perturbation bound must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Finite truncation at the given level: lattice sup-norm shells up to
    /// `level`, digit sums up to power `level`, the full list for explicit
    /// sets.
    pub fn truncate(&self, level: usize) -> Vec<Vec<f64>> {
        match self {
            SpectrumSet::Lattice { dim, step } => {
                let mut out = Vec::new();
                for shell in 0..=(level as i64) {
                    lattice_shell(*dim, shell, &mut |k| {
                        out.push(k.iter().map(|&ki| ki as f64 * step).collect());
                    });
                }
                out
            }
            SpectrumSet::ShiftedUnion { base, shifts } => {
                let base_pts = base.truncate(level);
                let mut seen: std::collections::HashSet<Vec<u64>> = std::collections::HashSet::new();
                let mut out: Vec<Vec<f64>> = Vec::new();
                for shift in shifts {
                    for p in &base_pts {
                        let shifted: Vec<f64> = p.iter().zip(shift).map(|(a, b)| a + b).collect();
                        if seen.insert(shifted.iter().map(|x| x.to_bits()).collect()) {
                            out.push(shifted);
                        }
                    }
                }
                out
            }
            SpectrumSet::DigitSet { base, digits } => {
                let mut sums: Vec<f64> = vec![0.0];
                let mut scale = 1.0;
                for _ in 0..=level {
                    let mut next = Vec::with_capacity(sums.len() * digits.len());
                    for &s in &sums {
                        for &d in digits {
                            next.push(s + scale * d);
                        }
                    }
                    sums = next;
                    scale *= *base as f64;
                }
                sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
                sums.dedup();
                sums.into_iter().map(|s| vec![s]).collect()
            }
            SpectrumSet::Explicit { points } => points.clone(),
            SpectrumSet::Perturbed { base, c, seed } => base
                .truncate(level)
                .iter()
                .map(|p| {
                    let off = point_offset(p, *c, *seed);
                    p.iter().zip(&off).map(|(a, b)| a + b).collect()
                })
                .collect(),
        }
    }
}

/// Offsets are keyed on the unperturbed point itself, so a point keeps its
/// offset at every truncation level.
fn point_offset(point: &[f64], c: f64, seed: u64) -> Vec<f64> {
    // FNV-1a over the coordinate bit patterns
    let mut h: u64 = 0xcbf29ce484222325;
    for &x in point {
        for b in x.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ h);
    point.iter().map(|_| rng.gen_range(-c..=c)).collect()
}

fn lattice_shell(dim: usize, shell: i64, emit: &mut impl FnMut(&[i64])) {
    let mut k = vec![-shell; dim];
    loop {
        if k.iter().map(|x| x.abs()).max().unwrap_or(0) == shell {
            emit(&k);
        }
        let mut i = dim;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            k[i] += 1;
            if k[i] <= shell {
                break;
            }
            k[i] = -shell;
        }
    }
}

/// Attach i.i.d. uniform offsets in `[-c, c]^d`, reproducible from `seed`.
pub fn perturb(lambda: &SpectrumSet, c: f64, seed: u64) -> Result<SpectrumSet> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(FrameError::InvalidArgument("perturbation bound must be positive".into()));
    }
    Ok(SpectrumSet::Perturbed {
        base: Box::new(lambda.clone()),
        c,
        seed,
    })
}

/// `nu = sum_lambda delta_lambda` (or the weighted version) over a truncation.
pub fn as_atomic_measure(
    lambda: &SpectrumSet,
    level: usize,
    weights: Option<&[f64]>,
) -> Result<Measure> {
    let points = lambda.truncate(level);
    let atoms: Vec<(Vec<f64>, f64)> = match weights {
        None => points.into_iter().map(|p| (p, 1.0)).collect(),
        Some(w) => {
            if w.len() != points.len() {
                return Err(FrameError::InvalidArgument(format!(
                    "weight count {} does not match truncation length {}",
                    w.len(),
                    points.len()
                )));
            }
            points.into_iter().zip(w.iter().copied()).collect()
        }
    };
    Measure::atomic(atoms)
}
