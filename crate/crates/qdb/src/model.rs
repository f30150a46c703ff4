//! The quantum dynamic belief (QDB) pipeline: a two-belief × three-action
//! basis, a superposed initial state, block-diagonal Hamiltonian evolution,
//! measurement-extracted mass functions for the known and unknown
//! conditions, a Deng-entropy entanglement degree, and the resulting
//! interference-corrected action probabilities.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use thiserror::Error;

use crate::evidence::{EvidenceError, FocalSet, Frame, MassFunction};
use crate::quantum::{
    condition_renormalize, project, unitary_of, HermitianGenerator, MeasurementMask, QuantumError,
    StateVector,
};

/// Lower end of the payoff-parameter fitting bracket.
pub const H_MIN: f64 = -0.7;

/// Upper end of the payoff-parameter fitting bracket.
pub const H_MAX: f64 = 1.0;

/// Default evolution time.
pub const DEFAULT_TIME: f64 = FRAC_PI_2;

/// Errors raised by the QDB model.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    /// A parameter fell outside its allowed interval.
    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    /// A parameter must be a finite number.
    #[error("parameter {name} must be finite")]
    NonFiniteParameter { name: &'static str },
    /// Basis labels must be distinct.
    #[error("invalid belief-action basis: {reason}")]
    InvalidBasis { reason: String },
    /// The requested conditional probability lies outside what the payoff
    /// bracket can produce at this evolution time.
    #[error("target conditional probability {target} unreachable; bracket spans [{lo:.6}, {hi:.6}]")]
    TargetUnreachable { target: f64, lo: f64, hi: f64 },
    /// The conditional-probability profile crosses the target more than once
    /// over the bracket (happens for unusual evolution times), so bisection
    /// has no well-defined root.
    #[error("conditional-probability profile is not single-crossing over the bracket at t = {t}")]
    NonMonotoneBracket { t: f64 },
    /// The unknown-condition BPA has zero Deng entropy, so the entanglement
    /// degree is undefined.
    #[error("unknown-condition entropy is zero; entanglement degree undefined")]
    ZeroEntropyDenominator,
    /// Propagated quantum-kernel error.
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    /// Propagated evidence-kernel error.
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
}

/// Sign of the interference term in the unknown-condition distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterferenceSign {
    /// Constructive interference (the default worked case).
    #[default]
    Positive,
    /// Destructive interference.
    Negative,
}

impl InterferenceSign {
    /// The multiplicative factor ±1.
    pub fn factor(self) -> f64 {
        match self {
            Self::Positive => 1.0,
            Self::Negative => -1.0,
        }
    }

    /// The sign as a small integer, for report metadata.
    pub fn signum(self) -> i8 {
        match self {
            Self::Positive => 1,
            Self::Negative => -1,
        }
    }
}

impl FromStr for InterferenceSign {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+" => Ok(Self::Positive),
            "-" => Ok(Self::Negative),
            other => Err(format!("expected '+' or '-', got {other:?}")),
        }
    }
}

impl fmt::Display for InterferenceSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Positive => "+",
            Self::Negative => "-",
        })
    }
}

/// The 2-belief × 3-action basis. Basis order is fixed as
/// [b₁·target, b₁·uncertain, b₁·other, b₂·target, b₂·uncertain, b₂·other].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefActionBasis {
    beliefs: [String; 2],
    actions: [String; 3],
}

impl Default for BeliefActionBasis {
    /// Beliefs G/B (good/bad face) and actions A/U/W (attack, uncertain,
    /// withdraw).
    fn default() -> Self {
        Self {
            beliefs: ["G".into(), "B".into()],
            actions: ["A".into(), "U".into(), "W".into()],
        }
    }
}

impl BeliefActionBasis {
    /// Builds a basis from two belief labels and three action labels
    /// (ordered target, uncertain, other); all five must be distinct.
    pub fn new(beliefs: [&str; 2], actions: [&str; 3]) -> Result<Self, ModelError> {
        let all: Vec<&str> = beliefs.iter().chain(actions.iter()).copied().collect();
        for (i, label) in all.iter().enumerate() {
            if label.is_empty() {
                return Err(ModelError::InvalidBasis {
                    reason: "labels must be non-empty".into(),
                });
            }
            if all[..i].contains(label) {
                return Err(ModelError::InvalidBasis {
                    reason: format!("duplicate label {label:?}"),
                });
            }
        }
        Ok(Self {
            beliefs: beliefs.map(Into::into),
            actions: actions.map(Into::into),
        })
    }

    /// The two belief labels.
    pub fn beliefs(&self) -> &[String; 2] {
        &self.beliefs
    }

    /// The three action labels (target, uncertain, other).
    pub fn actions(&self) -> &[String; 3] {
        &self.actions
    }

    /// The six basis-state labels in fixed order.
    pub fn state_labels(&self) -> Vec<String> {
        self.beliefs
            .iter()
            .flat_map(|b| self.actions.iter().map(move |a| format!("{a}·{b}")))
            .collect()
    }

    /// The 4-element frame of the known-condition BPA:
    /// [target·b₁, other·b₁, target·b₂, other·b₂].
    pub fn known_frame(&self) -> Frame {
        let labels: Vec<String> = self
            .beliefs
            .iter()
            .flat_map(|b| {
                [
                    format!("{}·{}", self.actions[0], b),
                    format!("{}·{}", self.actions[2], b),
                ]
            })
            .collect();
        Frame::new(labels).expect("known frame labels are distinct by construction")
    }

    /// The 3-element action frame of the unknown-condition BPA.
    pub fn unknown_frame(&self) -> Frame {
        Frame::new(self.actions.clone()).expect("action labels are distinct by construction")
    }

    /// The six known-condition focal sets with display names, in the order
    /// [target·b₁, uncertain·b₁, other·b₁, target·b₂, uncertain·b₂, other·b₂].
    /// The uncertain-action sets pair that belief's target and other
    /// elements, giving them cardinality 2.
    pub fn known_focal_sets(&self) -> Vec<(String, FocalSet)> {
        let frame = self.known_frame();
        let mut out = Vec::with_capacity(6);
        for (b, belief) in self.beliefs.iter().enumerate() {
            let target = frame
                .subset_of_indices(&[2 * b])
                .expect("index in range by construction");
            let uncertain = frame
                .subset_of_indices(&[2 * b, 2 * b + 1])
                .expect("indices in range by construction");
            let other = frame
                .subset_of_indices(&[2 * b + 1])
                .expect("index in range by construction");
            out.push((format!("{}·{}", self.actions[0], belief), target));
            out.push((format!("{}·{}", self.actions[1], belief), uncertain));
            out.push((format!("{}·{}", self.actions[2], belief), other));
        }
        out
    }

    /// The three unknown-condition focal sets with display names, in the
    /// order [target, uncertain, other]. The target and other sets include
    /// the uncertain action (cardinality 2); the uncertain set is the whole
    /// action frame (cardinality 3). The `·U` suffix marks the unknown
    /// (unconditioned) branch.
    pub fn unknown_focal_sets(&self) -> Vec<(String, FocalSet)> {
        let frame = self.unknown_frame();
        let target = frame
            .subset_of_indices(&[0, 1])
            .expect("indices in range by construction");
        let uncertain = frame.full_set();
        let other = frame
            .subset_of_indices(&[1, 2])
            .expect("indices in range by construction");
        vec![
            (format!("{}·U", self.actions[0]), target),
            (format!("{}·U", self.actions[1]), uncertain),
            (format!("{}·U", self.actions[2]), other),
        ]
    }
}

/// Validated QDB model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QdbParams {
    h1: f64,
    h2: f64,
    p_b1: f64,
    t: f64,
    sign: InterferenceSign,
}

impl QdbParams {
    /// Validates payoff parameters (within the fitting bracket
    /// [[`H_MIN`], [`H_MAX`]]) and the belief prior (in [0, 1]).
    /// Time defaults to π/2 and the interference sign to positive.
    pub fn new(h1: f64, h2: f64, p_b1: f64) -> Result<Self, ModelError> {
        check_range("h1", h1, H_MIN, H_MAX)?;
        check_range("h2", h2, H_MIN, H_MAX)?;
        check_range("p_b1", p_b1, 0.0, 1.0)?;
        Ok(Self {
            h1,
            h2,
            p_b1,
            t: DEFAULT_TIME,
            sign: InterferenceSign::default(),
        })
    }

    /// Replaces the evolution time (must be finite and positive).
    pub fn with_t(mut self, t: f64) -> Result<Self, ModelError> {
        if !t.is_finite() {
            return Err(ModelError::NonFiniteParameter { name: "t" });
        }
        if t <= 0.0 {
            return Err(ModelError::OutOfRange {
                name: "t",
                value: t,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        self.t = t;
        Ok(self)
    }

    /// Replaces the interference sign.
    pub fn with_sign(mut self, sign: InterferenceSign) -> Self {
        self.sign = sign;
        self
    }

    /// Payoff parameter of belief b₁.
    pub fn h1(&self) -> f64 {
        self.h1
    }

    /// Payoff parameter of belief b₂.
    pub fn h2(&self) -> f64 {
        self.h2
    }

    /// Prior probability of belief b₁.
    pub fn p_b1(&self) -> f64 {
        self.p_b1
    }

    /// Evolution time.
    pub fn t(&self) -> f64 {
        self.t
    }

    /// Interference sign.
    pub fn sign(&self) -> InterferenceSign {
        self.sign
    }
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<(), ModelError> {
    if !(value >= lo && value <= hi) {
        return Err(ModelError::OutOfRange {
            name,
            value,
            lo,
            hi,
        });
    }
    Ok(())
}

/// Action probabilities measured after evolving one belief block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionProbs {
    /// Probability of the target action.
    pub target: f64,
    /// Probability of the uncertain action (always exactly 1/3: the middle
    /// basis state decouples).
    pub uncertain: f64,
    /// Probability of the other action.
    pub other: f64,
}

/// Known-condition outputs: conditional target probabilities per belief and
/// their total-probability combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownDistribution {
    /// P(target | b₁); `None` when the prior is degenerate (p_b1 = 0), which
    /// leaves this conditional undefined.
    pub p_cond_target_b1: Option<f64>,
    /// P(target | b₂); `None` when p_b1 = 1.
    pub p_cond_target_b2: Option<f64>,
    /// The total-probability prediction P₁.
    pub p_total: f64,
}

/// Unknown-condition output with its clamp flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnknownDistribution {
    /// The interference-corrected prediction P₂, clamped into [0, 1].
    pub p_unknown: f64,
    /// True if clamping actually moved the value.
    pub clamped: bool,
}

/// Full output of the QDB pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct QdbResult {
    /// Known-condition BPA m₁ (up to 6 focal sets over the 4-element frame).
    pub m_known: MassFunction,
    /// Unknown-condition BPA m₂ (3 focal sets over the action frame).
    pub m_unknown: MassFunction,
    /// Deng entropy of m₁ (bits).
    pub ed_known: f64,
    /// Deng entropy of m₂ (bits).
    pub ed_unknown: f64,
    /// Entanglement degree γ = (E_d2 − E_d1)/E_d2.
    pub gamma: f64,
    /// P(target | b₁), undefined (None) when p_b1 = 0.
    pub p_cond_target_b1: Option<f64>,
    /// P(target | b₂), undefined (None) when p_b1 = 1.
    pub p_cond_target_b2: Option<f64>,
    /// Total-probability prediction P₁ (known conditions combined).
    pub p_total: f64,
    /// Interference-corrected unknown-condition prediction P₂.
    pub p_unknown: f64,
    /// Interference term Int = sign·γ·m₂(uncertain).
    pub interference: f64,
    /// True if P₂ had to be clamped into [0, 1].
    pub clamped: bool,
}

/// The superposed initial state: √p_b1·(1,1,1)/√3 on the b₁ block
/// concatenated with √(1−p_b1)·(1,1,1)/√3 on the b₂ block.
pub fn initial_state(p_b1: f64) -> Result<StateVector, ModelError> {
    initial_state_with(&BeliefActionBasis::default(), p_b1)
}

/// [`initial_state`] with custom basis labels.
pub fn initial_state_with(
    basis: &BeliefActionBasis,
    p_b1: f64,
) -> Result<StateVector, ModelError> {
    check_range("p_b1", p_b1, 0.0, 1.0)?;
    let block1 = (p_b1 / 3.0).sqrt();
    let block2 = ((1.0 - p_b1) / 3.0).sqrt();
    let amplitudes = Array1::from_iter(
        std::iter::repeat_n(Complex64::new(block1, 0.0), 3)
            .chain(std::iter::repeat_n(Complex64::new(block2, 0.0), 3)),
    );
    Ok(StateVector::new(amplitudes, basis.state_labels())?)
}

/// The block-diagonal 6×6 Hamiltonian diag(H_b1, H_b2) with each 3×3 block
/// [[h, 0, 1], [0, 1, 0], [1, 0, −h]].
pub fn build_hamiltonian(h1: f64, h2: f64) -> Result<HermitianGenerator, ModelError> {
    for (name, value) in [("h1", h1), ("h2", h2)] {
        if !value.is_finite() {
            return Err(ModelError::NonFiniteParameter { name });
        }
    }
    let mut m = Array2::<f64>::zeros((6, 6));
    for (block, h) in [(0, h1), (3, h2)] {
        m[[block, block]] = h;
        m[[block, block + 2]] = 1.0;
        m[[block + 1, block + 1]] = 1.0;
        m[[block + 2, block]] = 1.0;
        m[[block + 2, block + 2]] = -h;
    }
    Ok(HermitianGenerator::from_real(m)?)
}

/// Closed-form action probabilities after evolving one belief block from
/// the uniform state (1,1,1)/√3 for time t under payoff parameter h:
/// with λ = √(1+h²),
/// p_target = (1/3)·[cos²(λt) + sin²(λt)·(1+h)²/λ²],
/// p_other  = (1/3)·[cos²(λt) + sin²(λt)·(1−h)²/λ²],
/// p_uncertain = 1/3 exactly (the middle state only acquires a phase).
pub fn conditional_action_probs(h: f64, t: f64) -> Result<ActionProbs, ModelError> {
    if !h.is_finite() {
        return Err(ModelError::NonFiniteParameter { name: "h" });
    }
    if !t.is_finite() {
        return Err(ModelError::NonFiniteParameter { name: "t" });
    }
    let lambda_sq = 1.0 + h * h;
    let lambda = lambda_sq.sqrt();
    let (sin, cos) = (lambda * t).sin_cos();
    let cos_sq = cos * cos;
    let sin_sq = sin * sin;
    let target = (cos_sq + sin_sq * (1.0 + h) * (1.0 + h) / lambda_sq) / 3.0;
    let other = (cos_sq + sin_sq * (1.0 - h) * (1.0 - h) / lambda_sq) / 3.0;
    Ok(ActionProbs {
        target,
        uncertain: 1.0 / 3.0,
        other,
    })
}

/// Masks selecting one block (three contiguous states) of the 6-state basis.
fn block_mask(belief: usize) -> MeasurementMask {
    MeasurementMask::new(6, &[3 * belief, 3 * belief + 1, 3 * belief + 2])
        .expect("block indices are in range")
}

/// The known-condition BPA m₁: for each belief, condition onto its block,
/// evolve under the payoff Hamiltonian, measure the three actions, and scale
/// the outcome probabilities by that belief's prior. Beliefs with zero prior
/// contribute zero mass and are skipped (their branch cannot be conditioned
/// on).
pub fn bpa_known(params: &QdbParams) -> Result<MassFunction, ModelError> {
    bpa_known_with(&BeliefActionBasis::default(), params)
}

/// [`bpa_known`] with custom basis labels.
pub fn bpa_known_with(
    basis: &BeliefActionBasis,
    params: &QdbParams,
) -> Result<MassFunction, ModelError> {
    let psi0 = initial_state_with(basis, params.p_b1)?;
    let hamiltonian = build_hamiltonian(params.h1, params.h2)?;
    let u = unitary_of(&hamiltonian, params.t)?;
    let sets = basis.known_focal_sets();

    let mut entries: Vec<(FocalSet, f64)> = Vec::with_capacity(6);
    for (belief, prior) in [(0, params.p_b1), (1, 1.0 - params.p_b1)] {
        if prior <= 0.0 {
            continue;
        }
        let conditioned = condition_renormalize(&block_mask(belief), &psi0)?;
        let evolved = u.apply(&conditioned)?;
        for action in 0..3 {
            let mask = MeasurementMask::new(6, &[3 * belief + action])?;
            let (_, probability) = project(&mask, &evolved)?;
            let (_, set) = sets[3 * belief + action];
            entries.push((set, prior * probability));
        }
    }
    Ok(MassFunction::new(basis.known_frame(), entries)?)
}

/// The unknown-condition BPA m₂: evolve the full superposed state and
/// measure each action across both belief blocks jointly.
pub fn bpa_unknown(params: &QdbParams) -> Result<MassFunction, ModelError> {
    bpa_unknown_with(&BeliefActionBasis::default(), params)
}

/// [`bpa_unknown`] with custom basis labels.
pub fn bpa_unknown_with(
    basis: &BeliefActionBasis,
    params: &QdbParams,
) -> Result<MassFunction, ModelError> {
    let psi0 = initial_state_with(basis, params.p_b1)?;
    let hamiltonian = build_hamiltonian(params.h1, params.h2)?;
    let u = unitary_of(&hamiltonian, params.t)?;
    let evolved = u.apply(&psi0)?;
    let mut entries: Vec<(FocalSet, f64)> = Vec::with_capacity(3);
    for (action, (_, set)) in basis.unknown_focal_sets().into_iter().enumerate() {
        let mask = MeasurementMask::new(6, &[action, action + 3])?;
        let (_, probability) = project(&mask, &evolved)?;
        entries.push((set, probability));
    }
    Ok(MassFunction::new(basis.unknown_frame(), entries)?)
}

/// Entanglement degree γ = (E_d2 − E_d1)/E_d2 from the Deng entropies of
/// the two condition BPAs.
pub fn entanglement_degree(
    m_known: &MassFunction,
    m_unknown: &MassFunction,
) -> Result<f64, ModelError> {
    let ed_known = m_known.deng_entropy();
    let ed_unknown = m_unknown.deng_entropy();
    if ed_unknown <= 0.0 {
        return Err(ModelError::ZeroEntropyDenominator);
    }
    Ok((ed_unknown - ed_known) / ed_unknown)
}

/// Known-condition distribution: pignistic split of the uncertain masses,
/// P₁ = m₁(t·b₁) + ½·m₁(u·b₁) + m₁(t·b₂) + ½·m₁(u·b₂), with per-belief
/// conditionals obtained by dividing each belief's share by its prior.
/// A degenerate prior (p_b1 ∈ {0, 1}) leaves the corresponding conditional
/// undefined (`None`); the remaining outputs are still returned.
pub fn distribute_known(
    m_known: &MassFunction,
    p_b1: f64,
) -> Result<KnownDistribution, ModelError> {
    distribute_known_with(&BeliefActionBasis::default(), m_known, p_b1)
}

/// [`distribute_known`] with custom basis labels.
pub fn distribute_known_with(
    basis: &BeliefActionBasis,
    m_known: &MassFunction,
    p_b1: f64,
) -> Result<KnownDistribution, ModelError> {
    check_range("p_b1", p_b1, 0.0, 1.0)?;
    let sets = basis.known_focal_sets();
    let share = |belief: usize| -> f64 {
        let (_, target) = sets[3 * belief];
        let (_, uncertain) = sets[3 * belief + 1];
        m_known.mass(target) + 0.5 * m_known.mass(uncertain)
    };
    let (share1, share2) = (share(0), share(1));
    let p_cond_target_b1 = (p_b1 > 0.0).then(|| share1 / p_b1);
    let p_cond_target_b2 = (p_b1 < 1.0).then(|| share2 / (1.0 - p_b1));
    Ok(KnownDistribution {
        p_cond_target_b1,
        p_cond_target_b2,
        p_total: share1 + share2,
    })
}

/// Unknown-condition distribution:
/// P₂ = m₂(target) + (½ + sign·γ)·m₂(uncertain), clamped into [0, 1] with a
/// flag when γ > ½ forces the raw value outside.
pub fn distribute_unknown(
    m_unknown: &MassFunction,
    gamma: f64,
    sign: InterferenceSign,
) -> UnknownDistribution {
    distribute_unknown_with(&BeliefActionBasis::default(), m_unknown, gamma, sign)
}

/// [`distribute_unknown`] with custom basis labels.
pub fn distribute_unknown_with(
    basis: &BeliefActionBasis,
    m_unknown: &MassFunction,
    gamma: f64,
    sign: InterferenceSign,
) -> UnknownDistribution {
    let sets = basis.unknown_focal_sets();
    let (_, target) = sets[0];
    let (_, uncertain) = sets[1];
    let raw =
        m_unknown.mass(target) + (0.5 + sign.factor() * gamma) * m_unknown.mass(uncertain);
    let p_unknown = raw.clamp(0.0, 1.0);
    UnknownDistribution {
        p_unknown,
        clamped: p_unknown != raw,
    }
}

/// Runs the full pipeline and assembles every output.
pub fn run_pipeline(params: &QdbParams) -> Result<QdbResult, ModelError> {
    run_pipeline_with(&BeliefActionBasis::default(), params)
}

/// [`run_pipeline`] with custom basis labels.
pub fn run_pipeline_with(
    basis: &BeliefActionBasis,
    params: &QdbParams,
) -> Result<QdbResult, ModelError> {
    let m_known = bpa_known_with(basis, params)?;
    let m_unknown = bpa_unknown_with(basis, params)?;
    let ed_known = m_known.deng_entropy();
    let ed_unknown = m_unknown.deng_entropy();
    let gamma = entanglement_degree(&m_known, &m_unknown)?;
    let known = distribute_known_with(basis, &m_known, params.p_b1)?;
    let unknown = distribute_unknown_with(basis, &m_unknown, gamma, params.sign);
    let (_, uncertain_set) = basis.unknown_focal_sets()[1];
    let interference = params.sign.factor() * gamma * m_unknown.mass(uncertain_set);
    Ok(QdbResult {
        m_known,
        m_unknown,
        ed_known,
        ed_unknown,
        gamma,
        p_cond_target_b1: known.p_cond_target_b1,
        p_cond_target_b2: known.p_cond_target_b2,
        p_total: known.p_total,
        p_unknown: unknown.p_unknown,
        interference,
        clamped: unknown.clamped,
    })
}

/// The conditional target probability produced by payoff parameter h at
/// time t: the measured target probability plus the pignistic half-share of
/// the uncertain action, p_target(h, t) + 1/6.
fn fitted_conditional(h: f64, t: f64) -> Result<f64, ModelError> {
    Ok(conditional_action_probs(h, t)?.target + 0.5 / 3.0)
}

/// Solves `fitted_conditional(h, t) = target` for h by bisection on the
/// bracket [[`H_MIN`], [`H_MAX`]].
///
/// Reachability is endpoint-based (the profile must cross the target inside
/// the bracket), and a 129-point sampled single-crossing check rejects
/// evolution times at which the profile oscillates enough to cross more
/// than once, where bisection would silently pick an arbitrary root.
pub fn fit_h(target_cond_prob: f64, t: f64) -> Result<f64, ModelError> {
    if !target_cond_prob.is_finite() {
        return Err(ModelError::NonFiniteParameter { name: "target" });
    }
    if !t.is_finite() {
        return Err(ModelError::NonFiniteParameter { name: "t" });
    }
    if t <= 0.0 {
        return Err(ModelError::OutOfRange {
            name: "t",
            value: t,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }

    let f = |h: f64| -> f64 {
        fitted_conditional(h, t).expect("finite h and t checked above") - target_cond_prob
    };

    let f_lo = f(H_MIN);
    let f_hi = f(H_MAX);
    if !(f_lo <= 0.0 && f_hi >= 0.0) {
        return Err(ModelError::TargetUnreachable {
            target: target_cond_prob,
            lo: f_lo + target_cond_prob,
            hi: f_hi + target_cond_prob,
        });
    }

    // Sampled single-crossing check: count sign changes over a uniform grid.
    const GRID_POINTS: usize = 129;
    let mut crossings = 0usize;
    let mut prev_positive = f(H_MIN) >= 0.0;
    for k in 1..GRID_POINTS {
        let h = H_MIN + (H_MAX - H_MIN) * k as f64 / (GRID_POINTS - 1) as f64;
        let positive = f(h) >= 0.0;
        if positive != prev_positive {
            crossings += 1;
            prev_positive = positive;
        }
    }
    if crossings > 1 {
        return Err(ModelError::NonMonotoneBracket { t });
    }

    let (mut lo, mut hi) = (H_MIN, H_MAX);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
