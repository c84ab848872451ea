//! Composite Gauss-Legendre quadrature over axis-aligned boxes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::BoxNd;

/// Panel/node counts for composite Gauss-Legendre rules.
///
/// `panels_per_unit` panels are laid per unit length on each axis (at least
/// one panel per axis regardless of length), each carrying `nodes_per_panel`
/// Gauss-Legendre nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub panels_per_unit: usize,
    pub nodes_per_panel: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            panels_per_unit: 64,
            nodes_per_panel: 8,
        }
    }
}

impl QuadSpec {
    pub fn new(panels_per_unit: usize, nodes_per_panel: usize) -> Self {
        QuadSpec {
            panels_per_unit: panels_per_unit.max(1),
            nodes_per_panel: nodes_per_panel.max(1),
        }
    }

    fn panels_for_len(&self, len: f64) -> usize {
        ((len * self.panels_per_unit as f64).ceil() as usize).max(1)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre polynomial from the Chebyshev initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            if n == 1 {
                dp = 1.0;
            }
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n == 1 {
        nodes[0] = 0.0;
        weights[0] = 2.0;
    }
    (nodes, weights)
}

/// One-dimensional nodes/weights of the composite rule on `[a, b]`.
pub fn composite_nodes_1d(spec: &QuadSpec, a: f64, b: f64) -> Vec<(f64, f64)> {
    if b <= a {
        return Vec::new();
    }
    let panels = spec.panels_for_len(b - a);
    let (gn, gw) = gauss_legendre(spec.nodes_per_panel);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * spec.nodes_per_panel);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (x, w) in gn.iter().zip(&gw) {
            out.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

/// Tensor-product nodes/weights over a box. Degenerate axes (zero length)
/// collapse to a single node of weight 1 on that axis.
pub fn tensor_nodes(spec: &QuadSpec, bx: &BoxNd) -> Vec<(Vec<f64>, f64)> {
    let per_axis: Vec<Vec<(f64, f64)>> = bx
        .intervals
        .iter()
        .map(|iv| {
            if iv[1] - iv[0] <= 0.0 {
                vec![(iv[0], 1.0)]
            } else {
                composite_nodes_1d(spec, iv[0], iv[1])
            }
        })
        .collect();
    let mut out: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
    for axis in &per_axis {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for (pt, w) in &out {
            for (x, wx) in axis {
                let mut p = pt.clone();
                p.push(*x);
                next.push((p, w * wx));
            }
        }
        out = next;
    }
    out
}

/// Integrate a complex-valued function over a box.
pub fn integrate_box<F>(spec: &QuadSpec, bx: &BoxNd, f: F) -> Complex64
where
    F: Fn(&[f64]) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for (pt, w) in tensor_nodes(spec, bx) {
        acc += f(&pt) * w;
    }
    acc
}

/// Integrate a real-valued function over a box.
pub fn integrate_box_real<F>(spec: &QuadSpec, bx: &BoxNd, f: F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let mut acc = 0.0;
    for (pt, w) in tensor_nodes(spec, bx) {
        acc += f(&pt) * w;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_nodes_integrate_polynomials_exactly() {
        // n-point GL is exact through degree 2n-1
        let (nodes, weights) = gauss_legendre(8);
        for deg in 0..16 {
            let val: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| w * x.powi(deg))
                .sum();
            let exact = if deg % 2 == 0 {
                2.0 / (deg as f64 + 1.0)
            } else {
                0.0
            };
            assert!((val - exact).abs() < 1e-13, "deg {deg}: {val} vs {exact}");
        }
    }

    #[test]
    fn composite_rule_handles_oscillation() {
        // trig monomial of degree 64 over [0,1] with the default spec
        let spec = QuadSpec::default();
        let v = integrate_box(&spec, &BoxNd::unit(1), |x| {
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * 64.0 * x[0])
        });
        assert!(v.norm() < 1e-9);
        let one = integrate_box(&spec, &BoxNd::unit(1), |_| Complex64::new(1.0, 0.0));
        assert!((one.re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn single_node_rule() {
        let (n, w) = gauss_legendre(1);
        assert_eq!(n, vec![0.0]);
        assert_eq!(w, vec![2.0]);
    }

    #[test]
    fn tensor_nodes_cover_2d_volume() {
        let spec = QuadSpec::new(4, 4);
        let bx = BoxNd::new(vec![[0.0, 2.0], [1.0, 3.0]]).unwrap();
        let v = integrate_box_real(&spec, &bx, |_| 1.0);
        assert!((v - 4.0).abs() < 1e-12);
    }
}
