use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};

/// Axis-aligned box in `R^d`, a product of closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoxNd {
    pub intervals: Vec<[f64; 2]>,
}

impl BoxNd {
    pub fn new(intervals: Vec<[f64; 2]>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(FrameError::InvalidArgument("empty box".into()));
        }
        for iv in &intervals {
            if !(iv[0].is_finite() && iv[1].is_finite() && iv[0] <= iv[1]) {
                return Err(FrameError::InvalidArgument(format!(
                    "bad interval [{}, {}]",
                    iv[0], iv[1]
                )));
            }
        }
        Ok(BoxNd { intervals })
    }

    pub fn unit(dim: usize) -> Self {
        BoxNd {
            intervals: vec![[0.0, 1.0]; dim],
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        BoxNd {
            intervals: vec![[lo, hi]],
        }
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn volume(&self) -> f64 {
        self.intervals.iter().map(|iv| iv[1] - iv[0]).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.dim() == x.len()
            && self
                .intervals
                .iter()
                .zip(x)
                .all(|(iv, &xi)| iv[0] <= xi && xi <= iv[1])
    }

    /// Intersection with another box, or `None` if the interiors are disjoint
    /// in a way that leaves zero volume and no shared face point.
    pub fn intersect(&self, other: &BoxNd) -> Option<BoxNd> {
        if self.dim() != other.dim() {
            return None;
        }
        let mut out = Vec::with_capacity(self.dim());
        for (a, b) in self.intervals.iter().zip(&other.intervals) {
            let lo = a[0].max(b[0]);
            let hi = a[1].min(b[1]);
            if lo > hi {
                return None;
            }
            out.push([lo, hi]);
        }
        Some(BoxNd { intervals: out })
    }

    /// Minkowski sum: intervals add componentwise.
    pub fn minkowski_sum(&self, other: &BoxNd) -> BoxNd {
        BoxNd {
            intervals: self
                .intervals
                .iter()
                .zip(&other.intervals)
                .map(|(a, b)| [a[0] + b[0], a[1] + b[1]])
                .collect(),
        }
    }

    pub fn translate(&self, shift: &[f64]) -> BoxNd {
        BoxNd {
            intervals: self
                .intervals
                .iter()
                .zip(shift)
                .map(|(iv, s)| [iv[0] + s, iv[1] + s])
                .collect(),
        }
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &BoxNd) -> BoxNd {
        BoxNd {
            intervals: self
                .intervals
                .iter()
                .zip(&other.intervals)
                .map(|(a, b)| [a[0].min(b[0]), a[1].max(b[1])])
                .collect(),
        }
    }

    pub fn center(&self) -> Vec<f64> {
        self.intervals.iter().map(|iv| 0.5 * (iv[0] + iv[1])).collect()
    }
}

pub fn euclidean_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn euclidean_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}
