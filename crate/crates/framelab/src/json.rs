//! JSON ingestion and emission for measures, test functions, and spectra.
//!
//! Field names are part of the external contract; see the variant structs
//! below for the exact shapes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::geometry::BoxNd;
use crate::measures::{Measure, SelfSimilarMeasure};
use crate::quadrature::QuadSpec;
use crate::sip::TestFunction;
use crate::spectra::SpectrumSet;

/// `{"kind":"atomic","atoms":[[[x...],w],...]}` and friends.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Atomic {
        atoms: Vec<(Vec<f64>, f64)>,
    },
    Density {
        #[serde(rename = "box")]
        bounding: Vec<[f64; 2]>,
        pieces: Vec<PieceSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quad: Option<QuadSpec>,
    },
    Ifs {
        #[serde(rename = "R")]
        matrix: Vec<Vec<i64>>,
        digits: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
    Convolution {
        left: Box<MeasureSpec>,
        right: Box<MeasureSpec>,
    },
    Sum {
        terms: Vec<MeasureSpec>,
    },
    Scaled {
        alpha: f64,
        inner: Box<MeasureSpec>,
    },
}

/// One constant piece of a density: value on a sub-box; overlapping
/// pieces add.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    #[serde(rename = "box")]
    pub support: Vec<[f64; 2]>,
    pub value: f64,
}

impl MeasureSpec {
    pub fn to_measure(&self) -> Result<Measure> {
        match self {
            MeasureSpec::Atomic { atoms } => Measure::atomic(atoms.clone()),
            MeasureSpec::Density { bounding, pieces, quad } => {
                let outer = BoxNd::new(bounding.clone())?;
                let mut out = Vec::with_capacity(pieces.len());
                for p in pieces {
                    let bx = BoxNd::new(p.support.clone())?;
                    if bx.dim() != outer.dim() {
                        return Err(FrameError::DimensionMismatch {
                            expected: outer.dim(),
                            got: bx.dim(),
                        });
                    }
                    if bx.intersect(&outer).map_or(true, |i| i.volume() < bx.volume() - 1e-12) {
                        return Err(FrameError::Parse(
                            "density piece extends outside the declared box".into(),
                        ));
                    }
                    out.push((bx, p.value));
                }
                Measure::density(out, quad.unwrap_or_default())
            }
            MeasureSpec::Ifs { matrix, digits, weights } => Ok(Measure::SelfSimilar(
                SelfSimilarMeasure::new(matrix.clone(), digits.clone(), weights.clone())?,
            )),
            MeasureSpec::Convolution { left, right } => {
                crate::measures::convolve(&left.to_measure()?, &right.to_measure()?)
            }
            MeasureSpec::Sum { terms } => {
                if terms.is_empty() {
                    return Err(FrameError::Parse("sum needs at least one term".into()));
                }
                let parts: Result<Vec<Measure>> = terms.iter().map(|t| t.to_measure()).collect();
                let parts = parts?;
                let d = parts[0].dim();
                if parts.iter().any(|m| m.dim() != d) {
                    return Err(FrameError::DimensionMismatch { expected: d, got: 0 });
                }
                Ok(Measure::Sum(parts))
            }
            MeasureSpec::Scaled { alpha, inner } => inner.to_measure()?.scale(*alpha),
        }
    }

    pub fn from_measure(m: &Measure) -> Result<MeasureSpec> {
        match m {
            Measure::Atomic(a) => Ok(MeasureSpec::Atomic {
                atoms: a
                    .atoms()
                    .iter()
                    .map(|at| (at.point.clone(), at.weight))
                    .collect(),
            }),
            Measure::Density(d) => Ok(MeasureSpec::Density {
                bounding: d.bounding_box().intervals,
                pieces: d
                    .pieces()
                    .iter()
                    .map(|p| PieceSpec { support: p.support.intervals.clone(), value: p.value })
                    .collect(),
                quad: Some(*d.quad()),
            }),
            Measure::SelfSimilar(s) => Ok(MeasureSpec::Ifs {
                matrix: s.matrix().to_vec(),
                digits: s.digits().to_vec(),
                weights: s.weights().to_vec(),
            }),
            Measure::Convolution(a, b) => Ok(MeasureSpec::Convolution {
                left: Box::new(MeasureSpec::from_measure(a)?),
                right: Box::new(MeasureSpec::from_measure(b)?),
            }),
            Measure::Sum(terms) => Ok(MeasureSpec::Sum {
                terms: terms
                    .iter()
                    .map(MeasureSpec::from_measure)
                    .collect::<Result<_>>()?,
            }),
            Measure::Scaled(alpha, inner) => Ok(MeasureSpec::Scaled {
                alpha: *alpha,
                inner: Box::new(MeasureSpec::from_measure(inner)?),
            }),
            Measure::Embedded { .. } => Err(FrameError::UnsupportedKind(
                "embedded measures have no serialized form".into(),
            )),
        }
    }
}

/// `{"kind":"trig","terms":[[[freq...],[re,im]],...]}` and friends.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunctionSpec {
    Trig {
        terms: Vec<(Vec<f64>, [f64; 2])>,
    },
    Simple {
        cells: Vec<(Vec<[f64; 2]>, [f64; 2])>,
    },
    AtomSamples {
        points: Vec<Vec<f64>>,
        values: Vec<[f64; 2]>,
    },
    Modulated {
        freq: Vec<f64>,
        base: Box<TestFunctionSpec>,
    },
}

fn cx(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

impl TestFunctionSpec {
    pub fn to_function(&self) -> Result<TestFunction> {
        match self {
            TestFunctionSpec::Trig { terms } => TestFunction::trig(
                terms.iter().map(|(fr, c)| (fr.clone(), cx(*c))).collect(),
            ),
            TestFunctionSpec::Simple { cells } => {
                if cells.is_empty() {
                    return Err(FrameError::Parse("simple function needs cells".into()));
                }
                let mut out = Vec::with_capacity(cells.len());
                let mut dim = None;
                for (ivs, c) in cells {
                    let bx = BoxNd::new(ivs.clone())?;
                    match dim {
                        None => dim = Some(bx.dim()),
                        Some(d) if d != bx.dim() => {
                            return Err(FrameError::DimensionMismatch { expected: d, got: bx.dim() })
                        }
                        _ => {}
                    }
                    out.push((bx, cx(*c)));
                }
                Ok(TestFunction::Simple { dim: dim.unwrap(), cells: out })
            }
            TestFunctionSpec::AtomSamples { points, values } => {
                if points.len() != values.len() || points.is_empty() {
                    return Err(FrameError::Parse(
                        "atom samples need matching nonempty points and values".into(),
                    ));
                }
                let d = points[0].len();
                if points.iter().any(|p| p.len() != d) {
                    return Err(FrameError::DimensionMismatch { expected: d, got: 0 });
                }
                Ok(TestFunction::AtomSamples {
                    points: points.clone(),
                    values: values.iter().map(|v| cx(*v)).collect(),
                })
            }
            TestFunctionSpec::Modulated { freq, base } => {
                let inner = base.to_function()?;
                if inner.dim() != freq.len() {
                    return Err(FrameError::DimensionMismatch {
                        expected: inner.dim(),
                        got: freq.len(),
                    });
                }
                Ok(inner.modulate(freq.clone()))
            }
        }
    }

    pub fn from_function(f: &TestFunction) -> TestFunctionSpec {
        match f {
            TestFunction::TrigPolynomial { terms, .. } => TestFunctionSpec::Trig {
                terms: terms
                    .iter()
                    .map(|(fr, c)| (fr.clone(), [c.re, c.im]))
                    .collect(),
            },
            TestFunction::Simple { cells, .. } => TestFunctionSpec::Simple {
                cells: cells
                    .iter()
                    .map(|(bx, c)| (bx.intervals.clone(), [c.re, c.im]))
                    .collect(),
            },
            TestFunction::AtomSamples { points, values } => TestFunctionSpec::AtomSamples {
                points: points.clone(),
                values: values.iter().map(|c| [c.re, c.im]).collect(),
            },
            TestFunction::Modulated { freq, base } => TestFunctionSpec::Modulated {
                freq: freq.clone(),
                base: Box::new(TestFunctionSpec::from_function(base)),
            },
        }
    }
}

/// `{"kind":"lattice","dim":1,"step":1.0}` and friends; a mirror of the
/// spectrum type fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumSpec {
    Lattice {
        dim: usize,
        #[serde(default = "default_step")]
        step: f64,
    },
    ShiftedUnion {
        base: Box<SpectrumSpec>,
        shifts: Vec<Vec<f64>>,
    },
    DigitSet {
        base: i64,
        digits: Vec<f64>,
    },
    Explicit {
        points: Vec<Vec<f64>>,
    },
    Perturbed {
        base: Box<SpectrumSpec>,
        c: f64,
        seed: u64,
    },
}

fn default_step() -> f64 {
    1.0
}

impl SpectrumSpec {
    pub fn to_spectrum(&self) -> Result<SpectrumSet> {
        let set = match self {
            SpectrumSpec::Lattice { dim, step } => SpectrumSet::Lattice { dim: *dim, step: *step },
            SpectrumSpec::ShiftedUnion { base, shifts } => SpectrumSet::ShiftedUnion {
                base: Box::new(base.to_spectrum()?),
                shifts: shifts.clone(),
            },
            SpectrumSpec::DigitSet { base, digits } => {
                SpectrumSet::DigitSet { base: *base, digits: digits.clone() }
            }
            SpectrumSpec::Explicit { points } => SpectrumSet::Explicit { points: points.clone() },
            SpectrumSpec::Perturbed { base, c, seed } => SpectrumSet::Perturbed {
                base: Box::new(base.to_spectrum()?),
                c: *c,
                seed: *seed,
            },
        };
        set.validate()?;
        Ok(set)
    }

    pub fn from_spectrum(s: &SpectrumSet) -> SpectrumSpec {
        match s {
            SpectrumSet::Lattice { dim, step } => SpectrumSpec::Lattice { dim: *dim, step: *step },
            SpectrumSet::ShiftedUnion { base, shifts } => SpectrumSpec::ShiftedUnion {
                base: Box::new(SpectrumSpec::from_spectrum(base)),
                shifts: shifts.clone(),
            },
            SpectrumSet::DigitSet { base, digits } => {
                SpectrumSpec::DigitSet { base: *base, digits: digits.clone() }
            }
            SpectrumSet::Explicit { points } => SpectrumSpec::Explicit { points: points.clone() },
            SpectrumSet::Perturbed { base, c, seed } => SpectrumSpec::Perturbed {
                base: Box::new(SpectrumSpec::from_spectrum(base)),
                c: *c,
                seed: *seed,
            },
        }
    }
}

pub fn parse_measure(text: &str) -> Result<Measure> {
    let spec: MeasureSpec = serde_json::from_str(text)?;
    spec.to_measure()
}

pub fn parse_test_function(text: &str) -> Result<TestFunction> {
    let spec: TestFunctionSpec = serde_json::from_str(text)?;
    spec.to_function()
}

pub fn parse_spectrum(text: &str) -> Result<SpectrumSet> {
    let spec: SpectrumSpec = serde_json::from_str(text)?;
    spec.to_spectrum()
}

pub fn measure_to_json(m: &Measure) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MeasureSpec::from_measure(m)?)?)
}

pub fn spectrum_to_json(s: &SpectrumSet) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SpectrumSpec::from_spectrum(s))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_round_trip() {
        let text = r#"{"kind":"atomic","atoms":[[[0.0],0.5],[[0.5],0.5]]}"#;
        let m = parse_measure(text).unwrap();
        assert!(m.is_probability());
        let back = measure_to_json(&m).unwrap();
        let again = parse_measure(&back).unwrap();
        assert_eq!(again.mass().unwrap(), 1.0);
    }

    #[test]
    fn density_round_trip() {
        let text = r#"{
            "kind": "density",
            "box": [[0.0, 3.0]],
            "pieces": [
                {"box": [[0.0, 1.0]], "value": 0.5},
                {"box": [[2.0, 3.0]], "value": 0.5}
            ]
        }"#;
        let m = parse_measure(text).unwrap();
        assert!(m.is_probability());
        let back = measure_to_json(&m).unwrap();
        assert!(parse_measure(&back).unwrap().is_probability());
    }

    #[test]
    fn piece_outside_box_rejected() {
        let text = r#"{"kind":"density","box":[[0.0,1.0]],"pieces":[{"box":[[0.5,2.0]],"value":1.0}]}"#;
        assert!(parse_measure(text).is_err());
    }

    #[test]
    fn ifs_parses() {
        let text = r#"{"kind":"ifs","R":[[4]],"digits":[[0.0],[2.0]],"weights":[0.5,0.5]}"#;
        let m = parse_measure(text).unwrap();
        let v = m.fourier_stieltjes(&[0.0]).unwrap();
        assert!((v.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn convolution_and_sum_parse() {
        let text = r#"{
            "kind": "convolution",
            "left": {"kind":"atomic","atoms":[[[0.0],0.5],[[1.0],0.5]]},
            "right": {"kind":"atomic","atoms":[[[0.0],1.0]]}
        }"#;
        let m = parse_measure(text).unwrap();
        assert!((m.mass().unwrap() - 1.0).abs() < 1e-12);

        let text = r#"{
            "kind": "sum",
            "terms": [
                {"kind":"atomic","atoms":[[[2.0],1.0]]},
                {"kind":"density","box":[[0.0,1.0]],"pieces":[{"box":[[0.0,1.0]],"value":1.0}]}
            ]
        }"#;
        let m = parse_measure(text).unwrap();
        assert!((m.mass().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bad_measures_rejected() {
        for text in [
            r#"{"kind":"atomic","atoms":[]}"#,
            r#"{"kind":"atomic","atoms":[[[0.0],-1.0]]}"#,
            r#"{"kind":"nosuch"}"#,
            r#"{"kind":"scaled","alpha":-2.0,"inner":{"kind":"atomic","atoms":[[[0.0],1.0]]}}"#,
            r#"{"kind":"sum","terms":[]}"#,
            "not json",
        ] {
            assert!(parse_measure(text).is_err(), "{text}");
        }
    }

    #[test]
    fn trig_function_round_trip() {
        let text = r#"{"kind":"trig","terms":[[[0.0],[1.0,0.0]],[[1.0],[0.0,-1.0]]]}"#;
        let f = parse_test_function(text).unwrap();
        assert_eq!(f.dim(), 1);
        let back = serde_json::to_string(&TestFunctionSpec::from_function(&f)).unwrap();
        let again = parse_test_function(&back).unwrap();
        assert_eq!(again.eval(&[0.3]), f.eval(&[0.3]));
    }

    #[test]
    fn modulated_function_parses() {
        let text = r#"{
            "kind": "modulated",
            "freq": [-3.0],
            "base": {"kind":"simple","cells":[[[[0.0,1.0]],[1.0,0.0]]]}
        }"#;
        let f = parse_test_function(text).unwrap();
        let v = f.eval(&[0.25]);
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_functions_rejected() {
        for text in [
            r#"{"kind":"trig","terms":[[[0.0],[1.0,0.0]],[[0.0],[2.0,0.0]]]}"#,
            r#"{"kind":"atom_samples","points":[[0.0]],"values":[]}"#,
            r#"{"kind":"simple","cells":[]}"#,
        ] {
            assert!(parse_test_function(text).is_err(), "{text}");
        }
    }

    #[test]
    fn spectrum_round_trip() {
        let text = r#"{
            "kind": "shifted_union",
            "base": {"kind":"lattice","dim":1},
            "shifts": [[0.0],[0.25]]
        }"#;
        let s = parse_spectrum(text).unwrap();
        assert_eq!(s, SpectrumSet::z_union_z_quarter());
        let back = spectrum_to_json(&s).unwrap();
        assert_eq!(parse_spectrum(&back).unwrap(), s);

        let p = r#"{"kind":"perturbed","base":{"kind":"lattice","dim":1,"step":1.0},"c":0.1,"seed":7}"#;
        let s = parse_spectrum(p).unwrap();
        assert_eq!(s.truncate(2).len(), 5);
    }

    #[test]
    fn bad_spectra_rejected() {
        for text in [
            r#"{"kind":"lattice","dim":0}"#,
            r#"{"kind":"digit_set","base":1,"digits":[0.0,1.0]}"#,
            r#"{"kind":"digit_set","base":4,"digits":[1.0,2.0]}"#,
            r#"{"kind":"explicit","points":[]}"#,
        ] {
            assert!(parse_spectrum(text).is_err(), "{text}");
        }
    }
}
