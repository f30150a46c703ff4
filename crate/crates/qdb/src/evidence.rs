//! Dempster-Shafer evidence kernel: frames of discernment, basic probability
//! assignments (BPAs), belief and plausibility functions, the pignistic
//! probability transform, and Deng/Shannon entropies (all logarithms base 2).

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum frame size for operations that enumerate subsets explicitly.
pub const MAX_FRAME_ELEMENTS: usize = 32;

/// Tolerance on |Σ masses − 1| (and distribution sums).
pub const MASS_SUM_TOLERANCE: f64 = 1e-9;

/// Errors raised by the evidence kernel.
#[derive(Debug, Error, PartialEq)]
pub enum EvidenceError {
    /// Frame must contain between 1 and [`MAX_FRAME_ELEMENTS`] labels.
    #[error("frame must contain between 1 and {MAX_FRAME_ELEMENTS} elements, got {size}")]
    FrameSize { size: usize },
    /// Frame labels must be distinct.
    #[error("duplicate frame element {label:?}")]
    DuplicateElement { label: String },
    /// A referenced label is not an element of the frame.
    #[error("label {label:?} is not an element of the frame")]
    UnknownElement { label: String },
    /// Focal sets must be nonempty (m(∅) = 0 by definition).
    #[error("focal sets must be nonempty")]
    EmptyFocalSet,
    /// A focal set refers to indices outside the frame.
    #[error("focal set is not a subset of the frame")]
    NotSubsetOfFrame,
    /// The same focal set appeared twice in a BPA definition.
    #[error("duplicate focal set in mass assignment")]
    DuplicateFocalSet,
    /// Masses must be nonnegative.
    #[error("negative mass {mass}")]
    NegativeMass { mass: f64 },
    /// Masses must be finite numbers.
    #[error("mass values must be finite")]
    NonFiniteMass,
    /// Masses must sum to 1 within [`MASS_SUM_TOLERANCE`]; renormalization is
    /// refused so that data errors surface instead of being silently fixed.
    #[error("masses sum to {sum}, expected 1 within {MASS_SUM_TOLERANCE:e}")]
    MassSumViolation { sum: f64 },
    /// A discrete distribution had negative, non-finite, or non-normalized
    /// probabilities.
    #[error("invalid discrete distribution: {reason}")]
    InvalidDistribution { reason: String },
    /// Closed-form power-set entropy is defined for 1 ≤ n ≤ 64.
    #[error("power-set entropy frame size {n} outside supported range 1..=64")]
    OutOfRange { n: u32 },
    /// BPA JSON did not parse or did not match the expected schema.
    #[error("BPA JSON rejected: {0}")]
    JsonParse(String),
}

/// A frame of discernment: an ordered list of distinct symbolic labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    labels: Vec<String>,
}

impl Frame {
    /// Builds a frame from distinct labels (1 to 32 of them).
    pub fn new<I, S>(labels: I) -> Result<Self, EvidenceError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() || labels.len() > MAX_FRAME_ELEMENTS {
            return Err(EvidenceError::FrameSize { size: labels.len() });
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(EvidenceError::DuplicateElement {
                    label: label.clone(),
                });
            }
        }
        Ok(Self { labels })
    }

    /// Number of elements in the frame.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Frames are never empty; provided for API completeness.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The ordered element labels.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Index of a label, if present.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Builds the focal set containing exactly the given labels.
    pub fn subset<S: AsRef<str>>(&self, labels: &[S]) -> Result<FocalSet, EvidenceError> {
        let mut bits = 0u64;
        for label in labels {
            let idx = self
                .index_of(label.as_ref())
                .ok_or_else(|| EvidenceError::UnknownElement {
                    label: label.as_ref().to_string(),
                })?;
            bits |= 1 << idx;
        }
        if bits == 0 {
            return Err(EvidenceError::EmptyFocalSet);
        }
        Ok(FocalSet { bits })
    }

    /// Builds the focal set of the given element indices.
    pub fn subset_of_indices(&self, indices: &[usize]) -> Result<FocalSet, EvidenceError> {
        let mut bits = 0u64;
        for &idx in indices {
            if idx >= self.len() {
                return Err(EvidenceError::NotSubsetOfFrame);
            }
            bits |= 1 << idx;
        }
        if bits == 0 {
            return Err(EvidenceError::EmptyFocalSet);
        }
        Ok(FocalSet { bits })
    }

    /// The singleton focal set for one label.
    pub fn singleton(&self, label: &str) -> Result<FocalSet, EvidenceError> {
        self.subset(&[label])
    }

    /// The focal set containing every element of the frame.
    pub fn full_set(&self) -> FocalSet {
        FocalSet {
            bits: mask_of_len(self.len()),
        }
    }

    /// Renders a focal set as its member labels, in frame order.
    pub fn set_labels(&self, set: FocalSet) -> Vec<String> {
        set.indices()
            .filter(|&i| i < self.len())
            .map(|i| self.labels[i].clone())
            .collect()
    }

    fn contains_set(&self, set: FocalSet) -> bool {
        set.bits != 0 && self.contains_query(set)
    }

    /// Like `contains_set` but admits the empty set (a valid Bel/Pl query,
    /// though never a valid focal set).
    fn contains_query(&self, set: FocalSet) -> bool {
        set.bits & !mask_of_len(self.len()) == 0
    }
}

fn mask_of_len(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// A nonempty subset of a frame's elements, stored as a bit set over element
/// indices. Ordering (by bit pattern) gives mass functions a deterministic
/// entry order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FocalSet {
    bits: u64,
}

impl FocalSet {
    /// Number of elements in the set.
    pub fn cardinality(&self) -> u32 {
        self.bits.count_ones()
    }

    /// True if every element of `self` is in `other`.
    pub fn is_subset_of(&self, other: FocalSet) -> bool {
        self.bits & !other.bits == 0
    }

    /// True if the sets share at least one element.
    pub fn intersects(&self, other: FocalSet) -> bool {
        self.bits & other.bits != 0
    }

    /// True if the set contains the element with the given frame index.
    pub fn contains(&self, index: usize) -> bool {
        index < 64 && self.bits & (1 << index) != 0
    }

    /// Iterates over the member element indices in ascending order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.bits;
        (0..64).filter(move |i| bits & (1 << i) != 0)
    }

    /// The complement of the set within a frame of `frame_len` elements.
    pub fn complement_in(&self, frame_len: usize) -> FocalSet {
        FocalSet {
            bits: !self.bits & mask_of_len(frame_len),
        }
    }
}

impl fmt::Display for FocalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, idx) in self.indices().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{idx}")?;
        }
        write!(f, "}}")
    }
}

/// A basic probability assignment m: 2^F → [0,1] with m(∅) = 0 and Σ m = 1.
///
/// Construction validates every invariant and refuses renormalization;
/// zero-mass entries are dropped so focal sets carry strictly positive mass.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    frame: Frame,
    entries: BTreeMap<FocalSet, f64>,
}

impl MassFunction {
    /// Validates raw `(subset, mass)` pairs into a mass function.
    pub fn new(
        frame: Frame,
        raw_entries: impl IntoIterator<Item = (FocalSet, f64)>,
    ) -> Result<Self, EvidenceError> {
        let mut entries = BTreeMap::new();
        let mut sum = 0.0;
        for (set, mass) in raw_entries {
            if !mass.is_finite() {
                return Err(EvidenceError::NonFiniteMass);
            }
            if mass < 0.0 {
                return Err(EvidenceError::NegativeMass { mass });
            }
            if set.bits == 0 {
                return Err(EvidenceError::EmptyFocalSet);
            }
            if !frame.contains_set(set) {
                return Err(EvidenceError::NotSubsetOfFrame);
            }
            if entries.insert(set, mass).is_some() {
                return Err(EvidenceError::DuplicateFocalSet);
            }
            sum += mass;
        }
        if (sum - 1.0).abs() > MASS_SUM_TOLERANCE {
            return Err(EvidenceError::MassSumViolation { sum });
        }
        entries.retain(|_, mass| *mass > 0.0);
        Ok(Self { frame, entries })
    }

    /// Convenience constructor from labeled subsets.
    pub fn from_labeled(
        frame: Frame,
        raw_entries: &[(&[&str], f64)],
    ) -> Result<Self, EvidenceError> {
        let mut resolved = Vec::with_capacity(raw_entries.len());
        for (labels, mass) in raw_entries {
            let set = frame.subset(labels)?;
            resolved.push((set, *mass));
        }
        Self::new(frame, resolved)
    }

    /// The frame this BPA is defined over.
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Number of focal sets (entries with strictly positive mass).
    pub fn focal_count(&self) -> usize {
        self.entries.len()
    }

    /// Iterates over `(focal set, mass)` pairs in deterministic order.
    pub fn entries(&self) -> impl Iterator<Item = (FocalSet, f64)> + '_ {
        self.entries.iter().map(|(set, mass)| (*set, *mass))
    }

    /// Mass of a subset (0 for non-focal subsets).
    pub fn mass(&self, set: FocalSet) -> f64 {
        self.entries.get(&set).copied().unwrap_or(0.0)
    }

    /// Mass of the subset described by labels.
    pub fn mass_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<f64, EvidenceError> {
        Ok(self.mass(self.frame.subset(labels)?))
    }

    /// True if every focal set is a singleton (a Bayesian BPA).
    pub fn is_bayesian(&self) -> bool {
        self.entries.keys().all(|set| set.cardinality() == 1)
    }

    /// Belief Bel(A) = Σ_{B ⊆ A} m(B): total support committed to A.
    ///
    /// The query may be empty (Bel(∅) = 0), so the duality
    /// Pl(A) = 1 − Bel(Ā) holds for every subset up to the full frame.
    pub fn bel(&self, a: FocalSet) -> Result<f64, EvidenceError> {
        if !self.frame.contains_query(a) {
            return Err(EvidenceError::NotSubsetOfFrame);
        }
        Ok(self
            .entries
            .iter()
            .filter(|(set, _)| set.is_subset_of(a))
            .map(|(_, mass)| mass)
            .sum())
    }

    /// Plausibility Pl(A) = Σ_{B ∩ A ≠ ∅} m(B) = 1 − Bel(Ā).
    ///
    /// The query may be empty (Pl(∅) = 0).
    pub fn pl(&self, a: FocalSet) -> Result<f64, EvidenceError> {
        if !self.frame.contains_query(a) {
            return Err(EvidenceError::NotSubsetOfFrame);
        }
        Ok(self
            .entries
            .iter()
            .filter(|(set, _)| set.intersects(a))
            .map(|(_, mass)| mass)
            .sum())
    }

    /// Pignistic probability transform: Bet(e) = Σ_{B ∋ e} m(B)/|B|.
    pub fn ppt(&self) -> DiscreteDistribution {
        let mut probs = vec![0.0; self.frame.len()];
        for (set, mass) in &self.entries {
            let share = mass / f64::from(set.cardinality());
            for idx in set.indices() {
                probs[idx] += share;
            }
        }
        DiscreteDistribution::new(self.frame.clone(), probs)
            .expect("pignistic transform of a valid BPA is a valid distribution")
    }

    /// Deng entropy E_d = −Σ m(X)·log₂( m(X) / (2^|X| − 1) ), in bits.
    ///
    /// Degenerates to Shannon entropy when every focal set is a singleton.
    pub fn deng_entropy(&self) -> f64 {
        -self
            .entries
            .iter()
            .map(|(set, mass)| {
                let states = ((1u64 << set.cardinality()) - 1) as f64;
                mass * (mass / states).log2()
            })
            .sum::<f64>()
    }

    /// Serializes to the BPA JSON schema
    /// `{ "frame": [labels], "masses": [{ "set": [labels], "mass": n }] }`.
    pub fn to_json(&self) -> String {
        let doc = BpaJson {
            frame: self.frame.labels.clone(),
            masses: self
                .entries
                .iter()
                .map(|(set, mass)| BpaEntryJson {
                    set: self.frame.set_labels(*set),
                    mass: *mass,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("BPA JSON serialization cannot fail")
    }

    /// Parses and validates the BPA JSON schema. Rejects NaN/Inf masses,
    /// malformed documents, and any BPA invariant violation.
    pub fn from_json(text: &str) -> Result<Self, EvidenceError> {
        let doc: BpaJson =
            serde_json::from_str(text).map_err(|e| EvidenceError::JsonParse(e.to_string()))?;
        let frame = Frame::new(doc.frame)?;
        let mut entries = Vec::with_capacity(doc.masses.len());
        for entry in &doc.masses {
            let set = frame.subset(&entry.set)?;
            entries.push((set, entry.mass));
        }
        Self::new(frame, entries)
    }
}

#[derive(Serialize, Deserialize)]
struct BpaJson {
    frame: Vec<String>,
    masses: Vec<BpaEntryJson>,
}

#[derive(Serialize, Deserialize)]
struct BpaEntryJson {
    set: Vec<String>,
    mass: f64,
}

/// A point probability distribution over a frame's elements.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    frame: Frame,
    probabilities: Vec<f64>,
}

impl DiscreteDistribution {
    /// Validates probabilities (aligned with frame order): nonnegative,
    /// finite, summing to 1 within tolerance.
    pub fn new(frame: Frame, probabilities: Vec<f64>) -> Result<Self, EvidenceError> {
        if probabilities.len() != frame.len() {
            return Err(EvidenceError::InvalidDistribution {
                reason: format!(
                    "{} probabilities for {} elements",
                    probabilities.len(),
                    frame.len()
                ),
            });
        }
        for &p in &probabilities {
            if !p.is_finite() {
                return Err(EvidenceError::InvalidDistribution {
                    reason: "non-finite probability".into(),
                });
            }
            if p < 0.0 {
                return Err(EvidenceError::InvalidDistribution {
                    reason: format!("negative probability {p}"),
                });
            }
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > MASS_SUM_TOLERANCE {
            return Err(EvidenceError::InvalidDistribution {
                reason: format!("probabilities sum to {sum}"),
            });
        }
        Ok(Self {
            frame,
            probabilities,
        })
    }

    /// The frame this distribution is defined over.
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Probabilities in frame order.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Probability of one labeled element.
    pub fn probability(&self, label: &str) -> Result<f64, EvidenceError> {
        self.frame
            .index_of(label)
            .map(|idx| self.probabilities[idx])
            .ok_or_else(|| EvidenceError::UnknownElement {
                label: label.to_string(),
            })
    }

    /// Shannon entropy −Σ p·log₂ p (with 0·log 0 := 0), in bits.
    pub fn shannon_entropy(&self) -> f64 {
        -self
            .probabilities
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>()
    }
}

/// log₂(2^k − 1) computed without overflow or cancellation:
/// 2^k − 1 = 2^k·(1 − 2^(−k)), so log₂(2^k − 1) = k + ln(1 − 2^(−k))/ln 2.
fn log2_pow2_minus_one(k: u32) -> f64 {
    f64::from(k) + (-(2f64.powi(-(k as i32)))).ln_1p() / LN_2
}

/// Closed-form Deng entropy of the uniform BPA over all 2^n − 1 nonempty
/// subsets of an n-element frame, grouping focal sets by cardinality:
///
/// E_d = log₂(2^n − 1) + (1/(2^n − 1)) · Σ_k C(n,k)·log₂(2^k − 1)
///
/// Never enumerates subsets, so n up to 64 is supported.
pub fn deng_entropy_uniform_powerset(n: u32) -> Result<f64, EvidenceError> {
    if !(1..=64).contains(&n) {
        return Err(EvidenceError::OutOfRange { n });
    }
    let total = 2f64.powi(n as i32) - 1.0;
    let mut weighted_sum = 0.0;
    let mut binomial = 1.0;
    for k in 1..=n {
        // C(n,k) from C(n,k−1) by multiplying (n−k+1)/k.
        binomial *= f64::from(n - k + 1) / f64::from(k);
        weighted_sum += binomial * log2_pow2_minus_one(k);
    }
    Ok(log2_pow2_minus_one(n) + weighted_sum / total)
}
