//! Sampling nodes on the torus [0,1)^d, trigonometric evaluation and the
//! Fourier measurement matrix G with entries e^{2πi⟨k, x_i⟩}.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::{IndexSet, DEFAULT_INDEX_CAP};
use crate::wiener::CoefficientVector;

/// Default cap on measurement-matrix entries (rows × columns).
pub const DEFAULT_MATRIX_CAP: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
enum Provenance {
    /// Drawn i.i.d. uniform on [0,1)^d from this seed; serializes as the seed
    /// and regenerates on load.
    IidUniform { seed: u64 },
    /// Tensor grid {0, 1/g, ..., (g−1)/g}^d.
    Grid { per_axis: u64 },
    /// Arbitrary caller-provided nodes; serializes all coordinates.
    Explicit,
}

/// A finite multiset of sampling nodes in [0,1)^d, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    d: usize,
    n: usize,
    coords: Vec<f64>,
    provenance: Provenance,
}

impl PointSet {
    /// Wraps explicit nodes; every coordinate must lie in [0, 1).
    pub fn from_rows(d: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let n = rows.len();
        let mut coords = Vec::with_capacity(n * d);
        for row in &rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            for &x in row {
                if !(0.0..1.0).contains(&x) {
                    return Err(Error::InvalidParameter(format!(
                        "sample coordinate {x} outside [0, 1)"
                    )));
                }
                coords.push(x);
            }
        }
        Ok(PointSet {
            d,
            n,
            coords,
            provenance: Provenance::Explicit,
        })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Coordinates of node i.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum PointSetJson {
    IidUniform { d: usize, n: usize, seed: u64 },
    Grid { d: usize, per_axis: u64 },
    Explicit { d: usize, points: Vec<Vec<f64>> },
}

impl Serialize for PointSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let json = match self.provenance {
            Provenance::IidUniform { seed } => PointSetJson::IidUniform {
                d: self.d,
                n: self.n,
                seed,
            },
            Provenance::Grid { per_axis } => PointSetJson::Grid {
                d: self.d,
                per_axis,
            },
            Provenance::Explicit => PointSetJson::Explicit {
                d: self.d,
                points: self.rows().map(|r| r.to_vec()).collect(),
            },
        };
        json.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointSet {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match PointSetJson::deserialize(de)? {
            PointSetJson::IidUniform { d, n, seed } => {
                draw_uniform(d, n, seed).map_err(D::Error::custom)
            }
            PointSetJson::Grid { d, per_axis } => full_grid(d, per_axis).map_err(D::Error::custom),
            PointSetJson::Explicit { d, points } => {
                PointSet::from_rows(d, points).map_err(D::Error::custom)
            }
        }
    }
}

/// Draws n i.i.d. uniform nodes on [0,1)^d, deterministically per seed.
pub fn draw_uniform(d: usize, n: usize, seed: u64) -> Result<PointSet> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let coords: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>()).collect();
    Ok(PointSet {
        d,
        n,
        coords,
        provenance: Provenance::IidUniform { seed },
    })
}

/// The tensor grid {j/g : 0 ≤ j < g}^d in lexicographic order (last axis
/// fastest). Fails if g^d exceeds the index cap.
pub fn full_grid(d: usize, per_axis: u64) -> Result<PointSet> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if per_axis == 0 {
        return Err(Error::InvalidParameter(
            "grid resolution must be >= 1".into(),
        ));
    }
    let mut card = 1u128;
    for _ in 0..d {
        card = card.saturating_mul(per_axis as u128);
    }
    if card > DEFAULT_INDEX_CAP as u128 {
        return Err(Error::CapExceeded {
            what: "grid size",
            needed: card,
            cap: DEFAULT_INDEX_CAP as u128,
        });
    }
    let n = card as usize;
    let g = per_axis as f64;
    let mut coords = Vec::with_capacity(n * d);
    let mut digits = vec![0u64; d];
    for _ in 0..n {
        for &j in &digits {
            coords.push(j as f64 / g);
        }
        for axis in (0..d).rev() {
            digits[axis] += 1;
            if digits[axis] < per_axis {
                break;
            }
            digits[axis] = 0;
        }
    }
    Ok(PointSet {
        d,
        n,
        coords,
        provenance: Provenance::Grid { per_axis },
    })
}

/// e^{2πi⟨k, x⟩} with the phase reduced mod 1 before scaling, so large
/// frequencies keep full precision.
fn character(k: &[i64], x: &[f64]) -> Complex64 {
    let mut dot = 0.0f64;
    for (ki, xi) in k.iter().zip(x.iter()) {
        dot += *ki as f64 * xi;
    }
    let frac = dot - dot.floor();
    Complex64::cis(2.0 * std::f64::consts::PI * frac)
}

/// Evaluates f(x_i) = Σ_k c_k e^{2πi⟨k, x_i⟩} at every node.
pub fn evaluate(c: &CoefficientVector, nodes: &PointSet) -> Result<Vec<Complex64>> {
    if c.dimension() != nodes.dimension() {
        return Err(Error::DimensionMismatch {
            expected: nodes.dimension(),
            found: c.dimension(),
        });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); nodes.len()];
    for (k, amp) in c.terms() {
        for (i, x) in nodes.rows().enumerate() {
            out[i] += amp * character(k.entries(), x);
        }
    }
    Ok(out)
}

/// The n × #Λ matrix G with G[i, j] = e^{2πi⟨k_j, x_i⟩}, columns in Λ's
/// enumeration order. Fails when rows × columns exceeds the entry cap.
pub fn measurement_matrix(lambda: &IndexSet, nodes: &PointSet) -> Result<DMatrix<Complex64>> {
    measurement_matrix_with_cap(lambda, nodes, DEFAULT_MATRIX_CAP)
}

/// [`measurement_matrix`] with an explicit entry cap.
pub fn measurement_matrix_with_cap(
    lambda: &IndexSet,
    nodes: &PointSet,
    cap: u128,
) -> Result<DMatrix<Complex64>> {
    if lambda.dimension() != nodes.dimension() {
        return Err(Error::DimensionMismatch {
            expected: nodes.dimension(),
            found: lambda.dimension(),
        });
    }
    let entries = lambda.cardinality() * nodes.len() as u128;
    if entries > cap {
        return Err(Error::CapExceeded {
            what: "measurement matrix entries",
            needed: entries,
            cap,
        });
    }
    let n_cols = lambda.len();
    let n_rows = nodes.len();
    let mut mat = DMatrix::from_element(n_rows, n_cols, Complex64::new(0.0, 0.0));
    for (j, k) in lambda.iter().enumerate() {
        for (i, x) in nodes.rows().enumerate() {
            mat[(i, j)] = character(k.entries(), x);
        }
    }
    Ok(mat)
}
