//! Branching-probability models driving the interval subdivision.
//!
//! A model hands the coder, for every prefix, the integer cumulative counts of
//! the next symbol (a [`QuantizedStep`]) together with the exact probabilities
//! the counts approximate. Two concrete models are provided: the
//! constant-composition model ([`CcdmModel`]), whose counts are exact, and a
//! memoryless model with rounded counts ([`IidModel`]).

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::analysis::count_typeclass;
use crate::error::{Error, Result};
use crate::numeric::rational_from_f64;

const PROB_SUM_TOLERANCE: f64 = 1e-9;

/// Ordered output alphabet. The order fixes the interval layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("alphabet must contain at least one symbol"));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::invalid(format!("duplicate alphabet label {l:?}")));
            }
        }
        Ok(Self { labels })
    }

    /// Alphabet `{"0", "1", ..., "m-1"}`.
    pub fn numeric(m: usize) -> Self {
        Self {
            labels: (0..m).map(|j| j.to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// On-disk form of a target distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TargetFile {
    symbols: Vec<String>,
    probs: Vec<f64>,
}

/// Target distribution `P_A` over an alphabet. All probabilities are positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetDistribution {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

impl TargetDistribution {
    pub fn new(alphabet: Alphabet, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != alphabet.len() {
            return Err(Error::invalid(format!(
                "{} probabilities for {} symbols",
                probs.len(),
                alphabet.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p <= 0.0) {
            return Err(Error::invalid(format!(
                "probability {p} is not positive; drop zero-probability symbols first"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { alphabet, probs })
    }

    /// Builds a distribution proportional to non-negative `weights`.
    pub fn from_weights(alphabet: Alphabet, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::invalid("weights must have a positive sum"));
        }
        Self::new(alphabet, weights.iter().map(|w| w / total).collect())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TargetFile =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("target JSON: {e}")))?;
        Self::new(Alphabet::new(file.symbols)?, file.probs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&TargetFile {
            symbols: self.alphabet.labels.clone(),
            probs: self.probs.clone(),
        })
        .expect("serializable")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Cumulative distribution with the last entry pinned to exactly 1.
    pub fn cumulative(&self) -> Vec<f64> {
        let total: f64 = self.probs.iter().sum();
        let mut acc = 0.0;
        let mut out: Vec<f64> = self
            .probs
            .iter()
            .map(|p| {
                acc += p / total;
                acc.min(1.0)
            })
            .collect();
        *out.last_mut().expect("non-empty") = 1.0;
        out
    }
}

/// Symbol-count vector `γ` of a constant-composition codebook.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composition {
    alphabet: Alphabet,
    counts: Vec<u64>,
}

impl Composition {
    pub fn new(alphabet: Alphabet, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != alphabet.len() {
            return Err(Error::invalid(format!(
                "{} counts for {} symbols",
                counts.len(),
                alphabet.len()
            )));
        }
        if counts.iter().sum::<u64>() == 0 {
            return Err(Error::invalid("composition must have n >= 1"));
        }
        Ok(Self { alphabet, counts })
    }

    /// Composition over the numeric alphabet `{"0", ..., "m-1"}`.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        Self::new(Alphabet::numeric(counts.len()), counts)
    }

    /// Parses a literal such as `1600,1600`.
    pub fn parse_counts(literal: &str) -> Result<Self> {
        let counts = literal
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::invalid(format!("bad count {t:?} in composition")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_counts(counts)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn m(&self) -> usize {
        self.counts.len()
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// The n-type `Q_A(a_j) = n_j / n` as exact rationals.
    pub fn n_type(&self) -> Vec<BigRational> {
        let n = BigInt::from(self.n());
        self.counts
            .iter()
            .map(|&c| BigRational::new(BigInt::from(c), n.clone()))
            .collect()
    }

    pub fn n_type_f64(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Integer cumulative counts `F̂` for one step, scaled by `Θ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedStep {
    theta: u64,
    cum_counts: Vec<u64>,
}

impl QuantizedStep {
    pub fn new(theta: u64, cum_counts: Vec<u64>) -> Result<Self> {
        if theta == 0 {
            return Err(Error::invalid("theta must be positive"));
        }
        if cum_counts.last() != Some(&theta) {
            return Err(Error::invalid("last cumulative count must equal theta"));
        }
        if cum_counts.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("cumulative counts must be non-decreasing"));
        }
        Ok(Self { theta, cum_counts })
    }

    pub fn theta(&self) -> u64 {
        self.theta
    }

    pub fn cum_counts(&self) -> &[u64] {
        &self.cum_counts
    }

    pub fn m(&self) -> usize {
        self.cum_counts.len()
    }

    /// `F̂(a_{j-1})`, with `F̂(a_0) = 0`.
    pub fn lower_cum(&self, j: usize) -> u64 {
        if j == 0 {
            0
        } else {
            self.cum_counts[j - 1]
        }
    }

    /// `P̂(a_j)`.
    pub fn count(&self, j: usize) -> u64 {
        self.cum_counts[j] - self.lower_cum(j)
    }

    pub fn counts(&self) -> Vec<u64> {
        (0..self.m()).map(|j| self.count(j)).collect()
    }
}

/// Quantizes a cumulative distribution: `F̂ = floor(Θ F + 1/2)`, last entry `Θ`.
///
/// Rounding is done exactly on the binary value of each `f64`.
pub fn quantize_cumulative(cumulative: &[f64], theta: u64) -> Result<QuantizedStep> {
    if theta == 0 {
        return Err(Error::invalid("theta must be positive"));
    }
    let Some(&last) = cumulative.last() else {
        return Err(Error::invalid("empty cumulative distribution"));
    };
    if (last - 1.0).abs() > PROB_SUM_TOLERANCE {
        return Err(Error::invalid(format!("cumulative distribution ends at {last}, not 1")));
    }
    if cumulative.iter().any(|f| !(0.0..=1.0 + PROB_SUM_TOLERANCE).contains(f))
        || cumulative.windows(2).any(|w| w[0] > w[1])
    {
        return Err(Error::invalid("cumulative distribution must be non-decreasing in [0, 1]"));
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let scale = BigRational::from_integer(BigInt::from(theta));
    let mut cum: Vec<u64> = cumulative
        .iter()
        .map(|&f| {
            let v = (rational_from_f64(f) * &scale + &half).floor();
            v.to_integer().to_u64().expect("bounded by theta").min(theta)
        })
        .collect();
    *cum.last_mut().expect("non-empty") = theta;
    QuantizedStep::new(theta, cum)
}

/// Exact CCDM step for the given remaining symbol counts: `Θ = Σ remaining`,
/// cumulative counts are the partial sums.
pub fn ccdm_step(remaining: &[u64]) -> Result<QuantizedStep> {
    let mut acc = 0u64;
    let cum: Vec<u64> = remaining
        .iter()
        .map(|&c| {
            acc += c;
            acc
        })
        .collect();
    if acc == 0 {
        return Err(Error::invalid("no symbols left in composition"));
    }
    QuantizedStep::new(acc, cum)
}

/// Exact probability as an unreduced fraction `num / den`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactProb {
    pub num: BigUint,
    pub den: BigUint,
}

impl ExactProb {
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num.clone()), BigInt::from(self.den.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

/// Conditional next-symbol model over a fixed output length.
///
/// Implementations are immutable; all prefix information lives in `State`.
pub trait BranchingModel {
    type State: Clone;

    fn alphabet(&self) -> &Alphabet;

    /// Output length `n`.
    fn output_len(&self) -> usize;

    /// Largest absolute error between the exact model and `P̂ / Θ`.
    fn epsilon(&self) -> BigRational;

    /// Largest `Θ` any step can produce; must not exceed `2^w`.
    fn max_theta(&self) -> u64;

    fn initial_state(&self) -> Self::State;

    fn quantized_step(&self, state: &Self::State, step: usize) -> QuantizedStep;

    /// Exact branching probability `P(a_j | prefix)`.
    fn branching_prob(&self, state: &Self::State, step: usize, symbol: usize) -> ExactProb;

    fn advance(&self, state: &mut Self::State, symbol: usize);

    fn m(&self) -> usize {
        self.alphabet().len()
    }

    /// All exact branching probabilities at this prefix as rationals.
    fn branching_probs(&self, state: &Self::State, step: usize) -> Vec<BigRational> {
        (0..self.m())
            .map(|j| self.branching_prob(state, step, j).to_rational())
            .collect()
    }
}

/// Constant-composition model: `P(a_j | s) = (n_j - n_j(s)) / (n - i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcdmModel {
    composition: Composition,
}

/// Remaining symbol counts along a CCDM prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcdmState {
    remaining: Vec<u64>,
    left: u64,
}

impl CcdmState {
    pub fn remaining(&self) -> &[u64] {
        &self.remaining
    }
}

impl CcdmModel {
    pub fn new(composition: Composition) -> Self {
        Self { composition }
    }

    pub fn composition(&self) -> &Composition {
        &self.composition
    }
}

impl BranchingModel for CcdmModel {
    type State = CcdmState;

    fn alphabet(&self) -> &Alphabet {
        self.composition.alphabet()
    }

    fn output_len(&self) -> usize {
        self.composition.n() as usize
    }

    fn epsilon(&self) -> BigRational {
        BigRational::zero()
    }

    fn max_theta(&self) -> u64 {
        self.composition.n()
    }

    fn initial_state(&self) -> CcdmState {
        CcdmState {
            remaining: self.composition.counts().to_vec(),
            left: self.composition.n(),
        }
    }

    fn quantized_step(&self, state: &CcdmState, _step: usize) -> QuantizedStep {
        ccdm_step(&state.remaining).expect("step requested past the end of the codeword")
    }

    fn branching_prob(&self, state: &CcdmState, _step: usize, symbol: usize) -> ExactProb {
        ExactProb {
            num: BigUint::from(state.remaining[symbol]),
            den: BigUint::from(state.left),
        }
    }

    fn advance(&self, state: &mut CcdmState, symbol: usize) {
        assert!(state.remaining[symbol] > 0, "symbol {symbol} exhausted");
        state.remaining[symbol] -= 1;
        state.left -= 1;
    }
}

/// Memoryless model: every step uses the target distribution quantized to `Θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct IidModel {
    target: TargetDistribution,
    n: usize,
    step: QuantizedStep,
    exact: Vec<ExactProb>,
    epsilon: BigRational,
}

impl IidModel {
    pub fn new(target: TargetDistribution, n: usize, theta: u64) -> Result<Self> {
        if theta < 2 {
            return Err(Error::invalid("theta must be at least 2"));
        }
        if n == 0 {
            return Err(Error::invalid("output length must be positive"));
        }
        let cumulative = target.cumulative();
        let step = quantize_cumulative(&cumulative, theta)?;

        // Exact probabilities are the differences of the (exact binary) cumulative
        // values, so they sum to exactly one.
        let cum_exact: Vec<BigRational> = cumulative.iter().map(|&f| rational_from_f64(f)).collect();
        let mut prev = BigRational::zero();
        let mut exact = Vec::with_capacity(cum_exact.len());
        for f in &cum_exact {
            let p = f - &prev;
            prev = f.clone();
            exact.push(ExactProb {
                num: p.numer().magnitude().clone(),
                den: p.denom().magnitude().clone(),
            });
        }

        // Rounding each boundary to 1/(2Θ) can move a single-symbol probability by
        // up to 1/Θ, so ε is the larger of 1/(2Θ) and the realised error.
        let theta_r = BigRational::from_integer(BigInt::from(theta));
        let mut epsilon = BigRational::new(BigInt::one(), BigInt::from(2 * theta));
        for (j, p) in exact.iter().enumerate() {
            let q = BigRational::from_integer(BigInt::from(step.count(j))) / &theta_r;
            let err = (q - p.to_rational()).abs();
            if err > epsilon {
                epsilon = err;
            }
        }

        Ok(Self {
            target,
            n,
            step,
            exact,
            epsilon,
        })
    }

    pub fn target(&self) -> &TargetDistribution {
        &self.target
    }

    pub fn step(&self) -> &QuantizedStep {
        &self.step
    }
}

impl BranchingModel for IidModel {
    type State = ();

    fn alphabet(&self) -> &Alphabet {
        self.target.alphabet()
    }

    fn output_len(&self) -> usize {
        self.n
    }

    fn epsilon(&self) -> BigRational {
        self.epsilon.clone()
    }

    fn max_theta(&self) -> u64 {
        self.step.theta()
    }

    fn initial_state(&self) {}

    fn quantized_step(&self, _state: &(), _step: usize) -> QuantizedStep {
        self.step.clone()
    }

    fn branching_prob(&self, _state: &(), _step: usize, symbol: usize) -> ExactProb {
        self.exact[symbol].clone()
    }

    fn advance(&self, _state: &mut (), _symbol: usize) {}
}

/// Any of the concrete models, for callers that pick one at runtime.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Ccdm(CcdmModel),
    Iid(IidModel),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelState {
    Ccdm(CcdmState),
    Iid,
}

impl Model {
    pub fn ccdm(composition: Composition) -> Self {
        Model::Ccdm(CcdmModel::new(composition))
    }

    pub fn as_ccdm(&self) -> Option<&CcdmModel> {
        match self {
            Model::Ccdm(m) => Some(m),
            Model::Iid(_) => None,
        }
    }
}

impl BranchingModel for Model {
    type State = ModelState;

    fn alphabet(&self) -> &Alphabet {
        match self {
            Model::Ccdm(m) => m.alphabet(),
            Model::Iid(m) => m.alphabet(),
        }
    }

    fn output_len(&self) -> usize {
        match self {
            Model::Ccdm(m) => m.output_len(),
            Model::Iid(m) => m.output_len(),
        }
    }

    fn epsilon(&self) -> BigRational {
        match self {
            Model::Ccdm(m) => m.epsilon(),
            Model::Iid(m) => m.epsilon(),
        }
    }

    fn max_theta(&self) -> u64 {
        match self {
            Model::Ccdm(m) => m.max_theta(),
            Model::Iid(m) => m.max_theta(),
        }
    }

    fn initial_state(&self) -> ModelState {
        match self {
            Model::Ccdm(m) => ModelState::Ccdm(m.initial_state()),
            Model::Iid(_) => ModelState::Iid,
        }
    }

    fn quantized_step(&self, state: &ModelState, step: usize) -> QuantizedStep {
        match (self, state) {
            (Model::Ccdm(m), ModelState::Ccdm(s)) => m.quantized_step(s, step),
            (Model::Iid(m), ModelState::Iid) => m.quantized_step(&(), step),
            _ => panic!("model/state mismatch"),
        }
    }

    fn branching_prob(&self, state: &ModelState, step: usize, symbol: usize) -> ExactProb {
        match (self, state) {
            (Model::Ccdm(m), ModelState::Ccdm(s)) => m.branching_prob(s, step, symbol),
            (Model::Iid(m), ModelState::Iid) => m.branching_prob(&(), step, symbol),
            _ => panic!("model/state mismatch"),
        }
    }

    fn advance(&self, state: &mut ModelState, symbol: usize) {
        match (self, state) {
            (Model::Ccdm(m), ModelState::Ccdm(s)) => m.advance(s, symbol),
            (Model::Iid(_), ModelState::Iid) => {}
            _ => panic!("model/state mismatch"),
        }
    }
}

/// Objective minimized by [`select_composition`]:
/// `H(Q) - floor(log2 |T_γ|) / n + D(Q || P)`, which equals the cross entropy
/// of `Q` against `P` minus the IPA rate.
fn composition_objective(counts: &[u64], typeclass_size: &BigUint, log_p: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let n_f = n as f64;
    let cross_entropy: f64 = counts
        .iter()
        .zip(log_p)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &lp)| -(c as f64 / n_f) * lp)
        .sum();
    let k_ipa = typeclass_size.bits().saturating_sub(1);
    cross_entropy - k_ipa as f64 / n_f
}

/// Chooses a length-`n` composition approximating `target`.
///
/// Starts from `floor(n P_A(a_j))` and hands out the remaining units one at a
/// time to whichever symbol gives the smallest objective, lowest index on ties.
pub fn select_composition(target: &TargetDistribution, n: u64) -> Result<Composition> {
    if n == 0 {
        return Err(Error::invalid("output length must be positive"));
    }
    let log_p: Vec<f64> = target.probs().iter().map(|p| p.log2()).collect();
    let mut counts: Vec<u64> = target
        .probs()
        .iter()
        .map(|&p| ((n as f64) * p).floor() as u64)
        .collect();
    // Guard against float overshoot.
    while counts.iter().sum::<u64>() > n {
        let j = counts
            .iter()
            .enumerate()
            .max_by_key(|(_, &c)| c)
            .map(|(j, _)| j)
            .expect("non-empty");
        counts[j] -= 1;
    }
    let mut size = count_typeclass(&counts);
    let mut total: u64 = counts.iter().sum();
    while total < n {
        let mut best: Option<(f64, usize, BigUint)> = None;
        for j in 0..counts.len() {
            // |T| for counts + e_j: multiply by (total+1)/(c_j+1), exact.
            let candidate_size = (&size * BigUint::from(total + 1)).div_floor(&BigUint::from(counts[j] + 1));
            counts[j] += 1;
            let obj = composition_objective(&counts, &candidate_size, &log_p);
            counts[j] -= 1;
            if best.as_ref().is_none_or(|(b, _, _)| obj < *b) {
                best = Some((obj, j, candidate_size));
            }
        }
        let (_, j, s) = best.expect("non-empty alphabet");
        counts[j] += 1;
        size = s;
        total += 1;
    }
    Composition::new(target.alphabet().clone(), counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(p0: f64) -> TargetDistribution {
        TargetDistribution::new(Alphabet::numeric(2), vec![p0, 1.0 - p0]).unwrap()
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize_cumulative(&[0.5, 1.0], 3).unwrap().cum_counts(), &[2, 3]);
        assert_eq!(quantize_cumulative(&[1.0], 7).unwrap().cum_counts(), &[7]);
        assert_eq!(
            quantize_cumulative(&[0.2, 0.5, 1.0], 10).unwrap().cum_counts(),
            &[2, 5, 10]
        );
    }

    #[test]
    fn quantize_rejects_bad_input() {
        assert!(quantize_cumulative(&[0.6, 0.5, 1.0], 10).is_err());
        assert!(quantize_cumulative(&[0.5, 0.9], 10).is_err());
        assert!(quantize_cumulative(&[], 10).is_err());
        assert!(quantize_cumulative(&[1.0], 0).is_err());
    }

    #[test]
    fn ccdm_step_examples() {
        let s = ccdm_step(&[2, 2]).unwrap();
        assert_eq!((s.theta(), s.cum_counts()), (4, &[2u64, 4][..]));
        let s = ccdm_step(&[0, 1]).unwrap();
        assert_eq!((s.theta(), s.cum_counts()), (1, &[0u64, 1][..]));
        assert_eq!(s.count(0), 0);
        let s = ccdm_step(&[1, 3]).unwrap();
        assert_eq!((s.theta(), s.cum_counts()), (4, &[1u64, 4][..]));
        assert!(ccdm_step(&[0, 0]).is_err());
    }

    #[test]
    fn ccdm_state_walk_sets_theta_to_remaining_length() {
        let model = CcdmModel::new(Composition::from_counts(vec![1, 3]).unwrap());
        let mut st = model.initial_state();
        for (i, sym) in [1usize, 0, 1, 1].into_iter().enumerate() {
            let step = model.quantized_step(&st, i);
            assert_eq!(step.theta(), 4 - i as u64);
            model.advance(&mut st, sym);
        }
        assert_eq!(st.remaining(), &[0, 0]);
    }

    #[test]
    fn iid_examples() {
        let m = IidModel::new(binary(0.5), 3, 4).unwrap();
        assert_eq!(m.step().cum_counts(), &[2, 4]);
        assert_eq!(m.epsilon(), BigRational::new(1.into(), 8.into()));

        let m = IidModel::new(binary(0.25), 3, 4).unwrap();
        assert_eq!(m.step().cum_counts(), &[1, 4]);

        let t = TargetDistribution::new(Alphabet::numeric(2), vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let m = IidModel::new(t, 3, 4).unwrap();
        assert_eq!(m.step().cum_counts(), &[1, 4]);
        assert_eq!(m.epsilon(), BigRational::new(1.into(), 8.into()));
        // realised error 1/12 sits inside the 1/8 budget
        let p0 = m.branching_prob(&(), 0, 0).to_rational();
        let err = (BigRational::new(1.into(), 4.into()) - p0).abs();
        assert!(err <= m.epsilon());
    }

    #[test]
    fn iid_epsilon_covers_double_rounding() {
        // Boundaries 0.374 and 0.626 round in opposite directions at Θ=4, moving the
        // middle probability from 0.252 to 0.5.
        let t = TargetDistribution::new(Alphabet::numeric(3), vec![0.374, 0.252, 0.374]).unwrap();
        let m = IidModel::new(t, 2, 4).unwrap();
        assert_eq!(m.step().counts(), vec![1, 2, 1]);
        assert!(m.epsilon() > BigRational::new(1.into(), 8.into()));
        for j in 0..3 {
            let q = BigRational::new(BigInt::from(m.step().count(j)), 4.into());
            assert!((q - m.branching_prob(&(), 0, j).to_rational()).abs() <= m.epsilon());
        }
    }

    #[test]
    fn iid_exact_probs_sum_to_one() {
        let t = TargetDistribution::new(Alphabet::numeric(3), vec![0.1, 0.2, 0.7]).unwrap();
        let m = IidModel::new(t, 2, 64).unwrap();
        let total: BigRational = m.branching_probs(&(), 0).into_iter().sum();
        assert_eq!(total, BigRational::one());
    }

    #[test]
    fn target_validation_and_json() {
        assert!(TargetDistribution::new(Alphabet::numeric(2), vec![0.5, 0.6]).is_err());
        assert!(TargetDistribution::new(Alphabet::numeric(2), vec![1.0, 0.0]).is_err());
        assert!(TargetDistribution::new(Alphabet::numeric(3), vec![0.5, 0.5]).is_err());
        let t = TargetDistribution::from_json(r#"{"symbols": ["1","3"], "probs": [0.25, 0.75]}"#).unwrap();
        assert_eq!(t.alphabet().labels(), &["1", "3"]);
        let back = TargetDistribution::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        assert!(TargetDistribution::from_json(r#"{"symbols": ["a","a"], "probs": [0.5, 0.5]}"#).is_err());
        assert!(TargetDistribution::from_json("not json").is_err());
    }

    #[test]
    fn composition_parsing() {
        let c = Composition::parse_counts("1600, 1600").unwrap();
        assert_eq!(c.counts(), &[1600, 1600]);
        assert_eq!(c.n(), 3200);
        assert!(Composition::parse_counts("1,x").is_err());
        assert!(Composition::parse_counts("0,0").is_err());
        let q: BigRational = c.n_type().into_iter().sum();
        assert_eq!(q, BigRational::one());
    }

    #[test]
    fn select_composition_examples() {
        assert_eq!(select_composition(&binary(0.5), 4).unwrap().counts(), &[2, 2]);
        let single = TargetDistribution::new(Alphabet::numeric(1), vec![1.0]).unwrap();
        assert_eq!(select_composition(&single, 5).unwrap().counts(), &[5]);
        assert_eq!(select_composition(&binary(0.25), 8).unwrap().counts(), &[2, 6]);
    }

    #[test]
    fn select_composition_distributes_remainder() {
        let t = TargetDistribution::new(Alphabet::numeric(3), vec![0.3, 0.3, 0.4]).unwrap();
        for n in 1..30 {
            let c = select_composition(&t, n).unwrap();
            assert_eq!(c.n(), n);
            assert_eq!(c, select_composition(&t, n).unwrap());
        }
    }
}
