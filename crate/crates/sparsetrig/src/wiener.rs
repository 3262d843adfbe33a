//! Coefficient vectors in the Wiener algebra and the function classes built
//! on it: the plain Wiener ball, the log-weighted class, mixed-Sobolev
//! intersections and Hölder intersections. Provides membership checks with
//! slack reports, extremal random generators, projections, best s-term tails,
//! class-level projection error bounds and truncation planning.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::{IndexSet, MultiIndex};

/// Default cap on truncation radii returned by [`plan_truncation`].
pub const DEFAULT_RADIUS_CAP: u64 = 1_000_000_000_000;

/// Relative tolerance for membership checks (constraint value <= 1 + tol).
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Finitely supported complex Fourier coefficients. Zero amplitudes are never
/// stored; the Wiener norm Σ|c_k| is finite by construction. Immutable in
/// spirit: build once via `from_terms`/`insert`, then treat as read-only.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector {
    d: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl CoefficientVector {
    pub fn new(d: usize) -> Self {
        assert!(d >= 1, "dimension must be >= 1");
        CoefficientVector {
            d,
            terms: BTreeMap::new(),
        }
    }

    /// Builds from (k, c_k) pairs; duplicate frequencies are accumulated and
    /// exact zeros dropped.
    pub fn from_terms(
        d: usize,
        terms: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut out = CoefficientVector::new(d);
        for (k, c) in terms {
            out.add(k, c)?;
        }
        Ok(out)
    }

    /// Builds from a dense column over an index set (solver output), dropping
    /// exact zeros.
    pub fn from_dense(lambda: &IndexSet, values: &[Complex64]) -> Result<Self> {
        if values.len() != lambda.len() {
            return Err(Error::DimensionMismatch {
                expected: lambda.len(),
                found: values.len(),
            });
        }
        let mut out = CoefficientVector::new(lambda.dimension());
        for (k, &v) in lambda.iter().zip(values.iter()) {
            out.add(k, v)?;
        }
        Ok(out)
    }

    /// Adds `c` to the amplitude at `k` (entries summing to zero are removed).
    pub fn add(&mut self, k: MultiIndex, c: Complex64) -> Result<()> {
        if k.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: k.dim(),
            });
        }
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::NonFinite("coefficient amplitude"));
        }
        let slot = self.terms.entry(k).or_insert(Complex64::new(0.0, 0.0));
        *slot += c;
        if slot.re == 0.0 && slot.im == 0.0 {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.re == 0.0 && v.im == 0.0)
                .map(|(k, _)| k.clone());
            if let Some(key) = key {
                self.terms.remove(&key);
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates (k, c_k) in sorted frequency order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    /// Amplitude at k (zero when absent).
    pub fn amplitude(&self, k: &MultiIndex) -> Complex64 {
        self.terms
            .get(k)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Σ|c_k|, the Wiener-algebra norm.
    pub fn wiener_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// sqrt(Σ|c_k|²), the L2 norm of the function by orthonormality.
    pub fn l2_norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Rescales all amplitudes by `t`.
    pub fn scaled(&self, t: f64) -> CoefficientVector {
        let terms = self
            .terms
            .iter()
            .filter(|(_, c)| !(c.re * t == 0.0 && c.im * t == 0.0))
            .map(|(k, c)| (k.clone(), c * t))
            .collect();
        CoefficientVector { d: self.d, terms }
    }
}

// JSON form: {"d": int, "terms": [{"k": [ints], "re": float, "im": float}]}
// with terms in sorted frequency order. Round-trips bit-exactly.
#[derive(Serialize, Deserialize)]
struct TermJson {
    k: Vec<i64>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct CoefficientVectorJson {
    d: usize,
    terms: Vec<TermJson>,
}

impl Serialize for CoefficientVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let json = CoefficientVectorJson {
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| TermJson {
                    k: k.entries().to_vec(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        };
        json.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoefficientVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let json = CoefficientVectorJson::deserialize(d)?;
        CoefficientVector::from_terms(
            json.d,
            json.terms
                .into_iter()
                .map(|t| (MultiIndex::new(t.k), Complex64::new(t.re, t.im))),
        )
        .map_err(D::Error::custom)
    }
}

/// Constants of the Hölder projection-error bound: c₃ = max(c₁, c₂)·e where
/// c₁ calibrates the Lebesgue-constant growth and c₂ the Jackson estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoelderConstants {
    pub c1: f64,
    pub c2: f64,
}

impl Default for HoelderConstants {
    fn default() -> Self {
        HoelderConstants { c1: 1.5, c2: 3.0 }
    }
}

impl HoelderConstants {
    pub fn c3(&self) -> f64 {
        self.c1.max(self.c2) * std::f64::consts::E
    }
}

/// Which function class a [`ClassSpec`] describes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClassVariant {
    /// Σ|c_k| ≤ 1.
    WienerBall,
    /// Σ|c_k|·max(1, ln‖k‖_∞) ≤ 1.
    LogClass,
    /// Wiener ball ∩ {Σ|c_k|²·∏max(1,|k_i|^{2s}) ≤ 1}, s > 1/2.
    MixedSobolev { s: f64 },
    /// Wiener ball ∩ a sufficient coefficient condition for Hölder constant ≤ 1.
    Hoelder {
        alpha: f64,
        #[serde(default)]
        constants: HoelderConstants,
    },
}

/// A function class over Z^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub dimension: usize,
    #[serde(flatten)]
    pub variant: ClassVariant,
}

impl ClassSpec {
    pub fn wiener_ball(d: usize) -> Self {
        ClassSpec {
            dimension: d,
            variant: ClassVariant::WienerBall,
        }
    }

    pub fn log_class(d: usize) -> Self {
        ClassSpec {
            dimension: d,
            variant: ClassVariant::LogClass,
        }
    }

    pub fn mixed_sobolev(d: usize, s: f64) -> Result<Self> {
        if !(s > 0.5) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mixed-Sobolev smoothness must satisfy s > 1/2, got {s}"
            )));
        }
        Ok(ClassSpec {
            dimension: d,
            variant: ClassVariant::MixedSobolev { s },
        })
    }

    pub fn hoelder(d: usize, alpha: f64) -> Result<Self> {
        Self::hoelder_with_constants(d, alpha, HoelderConstants::default())
    }

    pub fn hoelder_with_constants(
        d: usize,
        alpha: f64,
        constants: HoelderConstants,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Hölder exponent must lie in (0, 1], got {alpha}"
            )));
        }
        if !(constants.c1 > 0.0 && constants.c2 > 0.0) {
            return Err(Error::InvalidParameter(
                "Hölder bound constants must be positive".into(),
            ));
        }
        Ok(ClassSpec {
            dimension: d,
            variant: ClassVariant::Hoelder { alpha, constants },
        })
    }

    /// Validates the parameter ranges (useful after deserialization).
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        match &self.variant {
            ClassVariant::MixedSobolev { s } => {
                Self::mixed_sobolev(self.dimension, *s).map(|_| ())
            }
            ClassVariant::Hoelder { alpha, constants } => {
                Self::hoelder_with_constants(self.dimension, *alpha, *constants).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    /// Short stable name for reports and CSV columns.
    pub fn kind_name(&self) -> &'static str {
        match self.variant {
            ClassVariant::WienerBall => "wiener-ball",
            ClassVariant::LogClass => "log",
            ClassVariant::MixedSobolev { .. } => "mixed-sobolev",
            ClassVariant::Hoelder { .. } => "hoelder",
        }
    }
}

/// The coefficient weight defining each class's summed constraint.
///
/// LogClass: max(1, ln‖k‖_∞), with weight 1 at k = 0. MixedSobolev: the
/// ℓ2-constraint weight ∏max(1, |k_i|^{2s}). WienerBall and Hoelder: 1 (the
/// Hölder condition is a separate per-term coefficient, see
/// [`hoelder_coefficient`]).
pub fn class_weight(spec: &ClassSpec, k: &MultiIndex) -> Result<f64> {
    if k.dim() != spec.dimension {
        return Err(Error::DimensionMismatch {
            expected: spec.dimension,
            found: k.dim(),
        });
    }
    Ok(match &spec.variant {
        ClassVariant::WienerBall | ClassVariant::Hoelder { .. } => 1.0,
        ClassVariant::LogClass => {
            let r = k.linf_norm();
            if r == 0 {
                1.0
            } else {
                (r as f64).ln().max(1.0)
            }
        }
        ClassVariant::MixedSobolev { s } => k
            .entries()
            .iter()
            .map(|&v| (v.unsigned_abs() as f64).powf(2.0 * s).max(1.0))
            .product(),
    })
}

/// Per-term coefficient of the sufficient Hölder condition:
/// 2^{1−α}·(2π‖k‖₂)^α for k ≠ 0 (and 0 at k = 0, which is translation
/// invariant). Σ|c_k|·coefficient ≤ 1 implies a Hölder constant ≤ 1 via
/// |e^{it} − 1| ≤ min(2, |t|) ≤ 2^{1−α}|t|^α.
pub fn hoelder_coefficient(alpha: f64, k: &MultiIndex) -> f64 {
    if k.is_zero() {
        0.0
    } else {
        (2.0f64).powf(1.0 - alpha) * (2.0 * std::f64::consts::PI * k.l2_norm()).powf(alpha)
    }
}

/// One constraint inside a [`MembershipReport`]: `value` must stay ≤ `limit`.
#[derive(Clone, Debug, Serialize)]
pub struct ConstraintCheck {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
}

/// Outcome of a class membership check, with each constraint's value.
#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub member: bool,
    /// True when only a sufficient condition is decidable (Hölder).
    pub sufficient_only: bool,
    pub constraints: Vec<ConstraintCheck>,
}

impl MembershipReport {
    /// Largest constraint value; equals 1 for extremal members.
    pub fn binding_value(&self) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.value / c.limit)
            .fold(0.0, f64::max)
    }
}

/// Checks class membership and reports each constraint's value.
pub fn membership(spec: &ClassSpec, c: &CoefficientVector) -> Result<MembershipReport> {
    if c.dimension() != spec.dimension {
        return Err(Error::DimensionMismatch {
            expected: spec.dimension,
            found: c.dimension(),
        });
    }
    let mut constraints = Vec::new();
    let mut sufficient_only = false;
    match &spec.variant {
        ClassVariant::WienerBall => {
            constraints.push(ConstraintCheck {
                name: "wiener_norm",
                value: c.wiener_norm(),
                limit: 1.0,
            });
        }
        ClassVariant::LogClass => {
            let mut v = 0.0;
            for (k, amp) in c.terms() {
                v += amp.norm() * class_weight(spec, k)?;
            }
            constraints.push(ConstraintCheck {
                name: "log_weighted_sum",
                value: v,
                limit: 1.0,
            });
        }
        ClassVariant::MixedSobolev { .. } => {
            let mut q = 0.0;
            for (k, amp) in c.terms() {
                q += amp.norm_sqr() * class_weight(spec, k)?;
            }
            constraints.push(ConstraintCheck {
                name: "wiener_norm",
                value: c.wiener_norm(),
                limit: 1.0,
            });
            constraints.push(ConstraintCheck {
                name: "sobolev_weighted_l2",
                value: q.sqrt(),
                limit: 1.0,
            });
        }
        ClassVariant::Hoelder { alpha, .. } => {
            sufficient_only = true;
            let h: f64 = c
                .terms()
                .map(|(k, amp)| amp.norm() * hoelder_coefficient(*alpha, k))
                .sum();
            constraints.push(ConstraintCheck {
                name: "wiener_norm",
                value: c.wiener_norm(),
                limit: 1.0,
            });
            constraints.push(ConstraintCheck {
                name: "hoelder_sufficient_sum",
                value: h,
                limit: 1.0,
            });
        }
    }
    let member = constraints
        .iter()
        .all(|c| c.value <= c.limit * (1.0 + MEMBERSHIP_TOL));
    Ok(MembershipReport {
        member,
        sufficient_only,
        constraints,
    })
}

/// Draws an extremal random class member: a random support of
/// `support_budget` distinct frequencies inside [−max_freq, max_freq]^d,
/// amplitudes with uniform phase and uniform modulus, rescaled so the binding
/// class constraint equals 1. Deterministic per seed.
pub fn random_member(
    spec: &ClassSpec,
    support_budget: usize,
    max_freq: u64,
    seed: u64,
) -> Result<CoefficientVector> {
    if support_budget == 0 {
        return Err(Error::InvalidParameter(
            "support budget must be >= 1".into(),
        ));
    }
    spec.validate()?;
    let d = spec.dimension;
    let cube_card = {
        let side = 2u128 * max_freq as u128 + 1;
        let mut card = 1u128;
        for _ in 0..d {
            card = card.saturating_mul(side);
        }
        card
    };
    let budget = (support_budget as u128).min(cube_card) as usize;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut support = std::collections::BTreeSet::new();
    while support.len() < budget {
        let entries: Vec<i64> = (0..d)
            .map(|_| rng.random_range(-(max_freq as i64)..=(max_freq as i64)))
            .collect();
        support.insert(MultiIndex::new(entries));
    }

    let mut raw = CoefficientVector::new(d);
    for k in support {
        // Modulus in (0, 1] so no drawn term vanishes.
        let modulus = 1.0 - rng.random::<f64>();
        let phase = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        raw.add(k, Complex64::from_polar(modulus, phase))?;
    }

    // Rescale so the binding constraint is exactly 1.
    let t = match &spec.variant {
        ClassVariant::WienerBall => 1.0 / raw.wiener_norm(),
        ClassVariant::LogClass => {
            let mut v = 0.0;
            for (k, amp) in raw.terms() {
                v += amp.norm() * class_weight(spec, k)?;
            }
            1.0 / v
        }
        ClassVariant::MixedSobolev { .. } => {
            let a = raw.wiener_norm();
            let mut q = 0.0;
            for (k, amp) in raw.terms() {
                q += amp.norm_sqr() * class_weight(spec, k)?;
            }
            (1.0 / a).min(1.0 / q.sqrt())
        }
        ClassVariant::Hoelder { alpha, .. } => {
            let a = raw.wiener_norm();
            let h: f64 = raw
                .terms()
                .map(|(k, amp)| amp.norm() * hoelder_coefficient(*alpha, k))
                .sum();
            if h > 0.0 {
                (1.0 / a).min(1.0 / h)
            } else {
                1.0 / a
            }
        }
    };
    Ok(raw.scaled(t))
}

/// Restriction of c to Λ. Idempotent.
pub fn project(c: &CoefficientVector, lambda: &IndexSet) -> Result<CoefficientVector> {
    if c.dimension() != lambda.dimension() {
        return Err(Error::DimensionMismatch {
            expected: lambda.dimension(),
            found: c.dimension(),
        });
    }
    CoefficientVector::from_terms(
        c.dimension(),
        c.terms()
            .filter(|(k, _)| lambda.contains(k))
            .map(|(k, v)| (k.clone(), *v)),
    )
}

/// Σ_{k∉Λ} |c_k| — an upper bound on ‖f − P_Λ f‖_∞ for this f.
pub fn tail_wiener_norm(c: &CoefficientVector, lambda: &IndexSet) -> Result<f64> {
    if c.dimension() != lambda.dimension() {
        return Err(Error::DimensionMismatch {
            expected: lambda.dimension(),
            found: c.dimension(),
        });
    }
    Ok(c.terms()
        .filter(|(k, _)| !lambda.contains(k))
        .map(|(_, v)| v.norm())
        .sum())
}

/// Sum of all but the s largest moduli (ties broken by frequency order).
/// σ_0 = wiener_norm; nonincreasing in s; 0 once s ≥ #support.
pub fn sigma_s(c: &CoefficientVector, s: usize) -> f64 {
    if s >= c.support_size() {
        return 0.0;
    }
    let mut moduli: Vec<(f64, &MultiIndex)> = c.terms().map(|(k, v)| (v.norm(), k)).collect();
    // Descending modulus; among equal moduli keep frequency order.
    moduli.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(b.1)));
    moduli[s..].iter().map(|(m, _)| m).sum()
}

/// Riemann zeta for x > 1 via direct summation plus an Euler–Maclaurin tail
/// correction (accurate to ~1e−12 relative even as x approaches 1).
pub fn zeta(x: f64) -> Result<f64> {
    if !(x > 1.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "zeta requires exponent > 1, got {x}"
        )));
    }
    const N: u32 = 1000;
    let n = N as f64;
    let mut sum = 0.0;
    for j in 1..=N {
        sum += (j as f64).powf(-x);
    }
    // Tail Σ_{j>N} j^{−x} by Euler–Maclaurin through the B₆ term.
    let tail = n.powf(1.0 - x) / (x - 1.0) - 0.5 * n.powf(-x)
        + x * n.powf(-x - 1.0) / 12.0
        - x * (x + 1.0) * (x + 2.0) * n.powf(-x - 3.0) / 720.0
        + x * (x + 1.0) * (x + 2.0) * (x + 3.0) * (x + 4.0) * n.powf(-x - 5.0) / 30240.0;
    Ok(sum + tail)
}

/// c_s = 1 + 2ζ(2s) = Σ_{k∈Z} max(1,|k|)^{−2s}, the constant of the
/// mixed-Sobolev projection bound.
pub fn sobolev_cs(s: f64) -> Result<f64> {
    Ok(1.0 + 2.0 * zeta(2.0 * s)?)
}

/// Class-level upper bound on the sup-norm projection error onto [−m, m]^d.
///
/// LogClass → 1/ln(m+1) (m ≥ 1); MixedSobolev → sqrt(d·c_s^d)·m^{−(s−1/2)};
/// Hoelder → (c₃·ln m)^d·m^{−α} (m ≥ 2; the formula is not a valid bound at
/// m = 1); WienerBall → 1 (no decay).
pub fn projection_error_bound(spec: &ClassSpec, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "truncation radius must be >= 1".into(),
        ));
    }
    let d = spec.dimension as f64;
    let mf = m as f64;
    match &spec.variant {
        ClassVariant::WienerBall => Ok(1.0),
        ClassVariant::LogClass => Ok(1.0 / (mf + 1.0).ln()),
        ClassVariant::MixedSobolev { s } => {
            let cs = sobolev_cs(*s)?;
            // Evaluated in log space to survive large d.
            Ok((0.5 * (d.ln() + d * cs.ln()) - (s - 0.5) * mf.ln()).exp())
        }
        ClassVariant::Hoelder { alpha, constants } => {
            if m < 2 {
                return Err(Error::InvalidParameter(
                    "Hölder projection bound requires truncation radius >= 2".into(),
                ));
            }
            let c3 = constants.c3();
            Ok((d * (c3 * mf.ln()).ln() - alpha * mf.ln()).exp())
        }
    }
}

/// A planned truncation: the radius m, the class bound it achieves, and
/// ln((2m+1)^d).
#[derive(Clone, Debug, Serialize)]
pub struct ClassBoundReport {
    pub m: u64,
    pub projection_error_bound: f64,
    pub log_cardinality: f64,
}

/// Smallest truncation radius m with projection_error_bound(spec, m) ≤ ε,
/// under the default radius cap. Accepts 0 < ε ≤ 1.
pub fn plan_truncation(spec: &ClassSpec, eps: f64) -> Result<ClassBoundReport> {
    plan_truncation_with_cap(spec, eps, DEFAULT_RADIUS_CAP)
}

/// [`plan_truncation`] with an explicit cap on the returned radius.
pub fn plan_truncation_with_cap(
    spec: &ClassSpec,
    eps: f64,
    radius_cap: u64,
) -> Result<ClassBoundReport> {
    if !(eps > 0.0 && eps <= 1.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "target projection error must lie in (0, 1], got {eps}"
        )));
    }
    spec.validate()?;
    let d = spec.dimension as f64;

    let m = match &spec.variant {
        ClassVariant::WienerBall => return Err(Error::NoFiniteTruncation),
        ClassVariant::LogClass => {
            // Invert 1/ln(m+1) ≤ ε, then nudge for floating-point boundaries.
            let guess = ((1.0 / eps).exp() - 1.0).ceil().max(1.0);
            adjust_monotone(spec, guess as u64, eps, radius_cap, 1)?
        }
        ClassVariant::MixedSobolev { s } => {
            let cs = sobolev_cs(*s)?;
            let ln_m = (0.5 * (d.ln() + d * cs.ln()) - eps.ln()) / (s - 0.5);
            let guess = ln_m.exp().ceil().max(1.0);
            if guess > 1.8e19 {
                return Err(Error::CapExceeded {
                    what: "truncation radius",
                    needed: guess as u128,
                    cap: radius_cap as u128,
                });
            }
            adjust_monotone(spec, guess as u64, eps, radius_cap, 1)?
        }
        ClassVariant::Hoelder { alpha, .. } => {
            // (c₃ ln m)^d m^{−α} is unimodal with peak at m ≈ e^{d/α}: rises,
            // then decays. Values on [2, peak] all exceed the value at 2, so
            // the smallest admissible m is either 2 or on the decaying branch.
            if projection_error_bound(spec, 2)? <= eps {
                2
            } else {
                let peak = (d / alpha).exp().ceil().max(2.0);
                if peak > radius_cap as f64 {
                    return Err(Error::CapExceeded {
                        what: "truncation radius",
                        needed: peak as u128,
                        cap: radius_cap as u128,
                    });
                }
                let mut lo = peak as u64; // bound(lo) > eps or lo is the answer
                if projection_error_bound(spec, lo)? <= eps {
                    // Between 2 and the peak estimate; scan down is safe since
                    // this range is short only near small d/α — use bisection
                    // on the rising side's mirror: fall back to linear search
                    // from 2 upward.
                    let mut m = 2;
                    while projection_error_bound(spec, m)? > eps {
                        m += 1;
                    }
                    m
                } else {
                    let mut hi = lo;
                    loop {
                        hi = hi.saturating_mul(2);
                        if hi > radius_cap {
                            return Err(Error::CapExceeded {
                                what: "truncation radius",
                                needed: hi as u128,
                                cap: radius_cap as u128,
                            });
                        }
                        if projection_error_bound(spec, hi)? <= eps {
                            break;
                        }
                        lo = hi;
                    }
                    // Smallest m in (lo, hi] with bound ≤ eps (decaying branch).
                    while hi - lo > 1 {
                        let mid = lo + (hi - lo) / 2;
                        if projection_error_bound(spec, mid)? <= eps {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    hi
                }
            }
        }
    };

    if m > radius_cap {
        return Err(Error::CapExceeded {
            what: "truncation radius",
            needed: m as u128,
            cap: radius_cap as u128,
        });
    }
    let bound = projection_error_bound(spec, m)?;
    let log_cardinality = d * (2.0 * m as f64 + 1.0).ln();
    Ok(ClassBoundReport {
        m,
        projection_error_bound: bound,
        log_cardinality,
    })
}

/// For classes with a monotone nonincreasing bound: verifies `guess` achieves
/// ε and walks to the smallest such radius (closed-form guesses are off by at
/// most a few steps from floating-point rounding).
fn adjust_monotone(
    spec: &ClassSpec,
    guess: u64,
    eps: f64,
    radius_cap: u64,
    min_m: u64,
) -> Result<u64> {
    let mut m = guess.max(min_m);
    let mut safety = 0;
    while projection_error_bound(spec, m)? > eps {
        m = m.saturating_add(1).min(radius_cap.saturating_add(1));
        safety += 1;
        if m > radius_cap {
            return Err(Error::CapExceeded {
                what: "truncation radius",
                needed: m as u128,
                cap: radius_cap as u128,
            });
        }
        if safety > 10_000 {
            return Err(Error::Numerical(
                "truncation search failed to converge".into(),
            ));
        }
    }
    while m > min_m && projection_error_bound(spec, m - 1)? <= eps {
        m -= 1;
        safety += 1;
        if safety > 10_000 {
            return Err(Error::Numerical(
                "truncation search failed to converge".into(),
            ));
        }
    }
    Ok(m)
}

/// Numerical L1 norm of the order-m Dirichlet kernel
/// D_m(t) = sin((2m+1)πt)/sin(πt) over one period, by composite Simpson
/// quadrature split at the kernel's zeros (so each panel integrates a smooth
/// function). `quadrature_points` is the total evaluation budget; it must be
/// at least 64·m.
pub fn lebesgue_constant(m: u64, quadrature_points: u64) -> Result<f64> {
    if m < 1 {
        return Err(Error::InvalidParameter(
            "kernel order must be >= 1".into(),
        ));
    }
    if quadrature_points < 64 * m {
        return Err(Error::InvalidParameter(format!(
            "quadrature_points {quadrature_points} too small; need >= {}",
            64 * m
        )));
    }
    let order = 2 * m + 1;
    let kernel = |t: f64| -> f64 {
        let denom = (std::f64::consts::PI * t).sin();
        if denom.abs() < 1e-300 {
            order as f64
        } else {
            ((order as f64) * std::f64::consts::PI * t).sin().abs() / denom.abs()
        }
    };
    // Zeros of D_m at j/(2m+1): integrate each smooth panel separately.
    let panels = order;
    let mut n_per = (quadrature_points / panels).max(4);
    if n_per % 2 == 1 {
        n_per += 1;
    }
    let mut total = 0.0;
    for j in 0..panels {
        let a = j as f64 / panels as f64;
        let b = (j + 1) as f64 / panels as f64;
        let h = (b - a) / n_per as f64;
        let mut acc = kernel(a) + kernel(b);
        for i in 1..n_per {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * kernel(a + i as f64 * h);
        }
        total += acc * h / 3.0;
    }
    Ok(total)
}
