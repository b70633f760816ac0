//! Rate-loss bounds and input-length selection.
//!
//! The certified path is [`k_fpa_ccdm`]: `floor(log2 |T_γ| - Δk)` with `log2 |T_γ|`
//! rounded down and the closed-form `Δk` rounded up, so the returned length
//! never exceeds what the interval-width bound allows.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::codec::Codeword;
use crate::error::{Error, Result};
use crate::models::{select_composition, BranchingModel, Composition, Model, TargetDistribution};
use crate::numeric::{
    entropy_bits, floor_neg_log2, kl_divergence_bits, log2_approx, log2_floor_and_frac_lower,
    UpwardLog2Sum,
};

/// Additive constant in the binary bound of Ramabadran's m-out-of-n coder.
pub const RAMABADRAN_CONSTANT: f64 = 1.5772;

/// `|T_γ| = n! / Π n_a!`, exact.
pub fn count_typeclass(counts: &[u64]) -> BigUint {
    let mut size = BigUint::one();
    let mut total = 0u64;
    for &c in counts {
        // After each factor this is a product of binomials, hence an integer.
        for i in 1..=c {
            total += 1;
            size *= total;
            size = size.div_floor(&BigUint::from(i));
        }
    }
    size
}

/// `k_IPA = floor(log2 |T_γ|)`, from the bit length of the exact count.
pub fn k_ipa(counts: &[u64]) -> u64 {
    count_typeclass(counts).bits() - 1
}

/// Runs of symbols in ascending count order, ties by symbol index.
pub fn worstcase_sequence(composition: &Composition) -> Codeword {
    let counts = composition.counts();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by_key(|&j| (counts[j], j));
    Codeword::new(
        order
            .into_iter()
            .flat_map(|j| std::iter::repeat_n(j, counts[j] as usize))
            .collect(),
    )
}

/// `(n - i, remaining count)` along a codeword, i.e. the inverse CCDM
/// branching probabilities as fractions.
fn inverse_probs_along(counts: &[u64], codeword: &Codeword) -> Result<Vec<(u64, u64)>> {
    let mut remaining = counts.to_vec();
    let mut left: u64 = counts.iter().sum();
    let mut out = Vec::with_capacity(codeword.len());
    for (i, &s) in codeword.symbols().iter().enumerate() {
        if s >= remaining.len() || remaining[s] == 0 {
            return Err(Error::invalid(format!(
                "symbol {s} at step {i} is outside the type class"
            )));
        }
        out.push((left, remaining[s]));
        remaining[s] -= 1;
        left -= 1;
    }
    Ok(out)
}

fn check_ccdm_precision(composition: &Composition, w: u32) -> Result<()> {
    crate::fpa::check_precision(w)?;
    let n = composition.n();
    if (n as u128) > (1u128 << w) {
        return Err(Error::config(format!(
            "finite-precision CCDM needs 2^w >= n, got w={w}, n={n}"
        )));
    }
    Ok(())
}

/// Closed-form rate loss along the worst-case sequence, rounded up, without
/// the `2^w >= n` check. Outside that range the value is only a formula
/// evaluation: the coder cannot run and the maximality argument does not apply.
pub fn rateloss_theorem1_formula(composition: &Composition, w: u32) -> f64 {
    let z = worstcase_sequence(composition);
    let inv = inverse_probs_along(composition.counts(), &z).expect("z is in the type class");
    let delta = 2f64.powi(-(w as i32));
    let mut acc = UpwardLog2Sum::new();
    for (left, rem) in inv {
        acc.add_log2_1p(delta * (left as f64 / rem as f64));
    }
    acc.upper()
}

/// `Δk = Σ log2(1 + 2^-w / P(z_{i+1} | z_1^i))`, an upper bound on the FPA
/// input-length loss of a CCDM. Requires `2^w >= n`.
pub fn rateloss_theorem1(composition: &Composition, w: u32) -> Result<f64> {
    check_ccdm_precision(composition, w)?;
    Ok(rateloss_theorem1_formula(composition, w))
}

/// `floor(L - Δk)` for a lower bound `L = int + frac` on `log2 |T|`.
fn floor_log2_minus(int_part: u64, frac_lower: f64, delta_upper: f64) -> u64 {
    let f = (frac_lower - delta_upper).floor();
    let k = int_part as f64 + f;
    if k <= 0.0 {
        0
    } else {
        k as u64
    }
}

/// Input length from a type-class size and an upper bound on the rate loss.
pub fn k_fpa_from_delta(counts: &[u64], delta_upper: f64) -> u64 {
    let (i, f) = log2_floor_and_frac_lower(&count_typeclass(counts));
    floor_log2_minus(i, f, delta_upper)
}

/// Certified CCDM input length `floor(log2 |T_γ| - Δk)`.
pub fn k_fpa_ccdm(composition: &Composition, w: u32) -> Result<u64> {
    let delta = rateloss_theorem1(composition, w)?;
    Ok(k_fpa_from_delta(composition.counts(), delta))
}

/// Exact `P_C(c) Π (1 + (ε + 2^-w) / P_i)` as an unreduced fraction.
///
/// Since `P_C(c) = Π P_i` this is `Π (P_i + ε + 2^-w)`.
fn bound_codeword_fraction<M: BranchingModel>(model: &M, codeword: &Codeword, w: u32) -> Result<(BigUint, BigUint)> {
    if codeword.len() != model.output_len() {
        return Err(Error::invalid(format!(
            "codeword has {} symbols, expected n={}",
            codeword.len(),
            model.output_len()
        )));
    }
    let eps = model.epsilon();
    let eps_num = eps.numer().to_biguint().expect("non-negative epsilon");
    let eps_den = eps.denom().to_biguint().expect("positive denominator");
    let pow_w = BigUint::one() << w as usize;
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    let mut state = model.initial_state();
    for (i, &s) in codeword.symbols().iter().enumerate() {
        if s >= model.m() {
            return Err(Error::invalid(format!("symbol index {s} outside alphabet")));
        }
        let p = model.branching_prob(&state, i, s);
        if p.is_zero() {
            return Err(Error::invalid(format!(
                "codeword leaves the model support at step {i}"
            )));
        }
        // p.num/p.den + e_n/e_d + 1/2^w over the common denominator p.den e_d 2^w
        let term_den = &p.den * &eps_den;
        let term_num = (&p.num * &eps_den + &eps_num * &p.den) * &pow_w + &term_den;
        num *= term_num;
        den *= term_den * &pow_w;
        model.advance(&mut state, s);
    }
    Ok((num, den))
}

/// Upper bound on the finite-precision interval width of `codeword`, exact.
pub fn bound_codeword<M: BranchingModel>(model: &M, codeword: &Codeword, w: u32) -> Result<BigRational> {
    let (num, den) = bound_codeword_fraction(model, codeword, w)?;
    Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

/// `floor(-log2 bound_codeword(c))`: the largest `k` this codeword allows.
pub fn k_allowed_by_codeword<M: BranchingModel>(model: &M, codeword: &Codeword, w: u32) -> Result<i64> {
    let (num, den) = bound_codeword_fraction(model, codeword, w)?;
    Ok(floor_neg_log2(&num, &den))
}

/// Draws a codeword from the model's exact branching distribution.
pub fn sample_ancestral<M: BranchingModel, R: Rng>(model: &M, rng: &mut R) -> Codeword {
    let mut state = model.initial_state();
    let mut symbols = Vec::with_capacity(model.output_len());
    for i in 0..model.output_len() {
        let probs: Vec<f64> = (0..model.m())
            .map(|j| {
                let p = model.branching_prob(&state, i, j);
                ratio_f64(&p.num, &p.den)
            })
            .collect();
        let total: f64 = probs.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = None;
        for (j, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                pick = Some(j);
                if u < p {
                    break;
                }
                u -= p;
            }
        }
        let j = pick.expect("some symbol has positive probability");
        model.advance(&mut state, j);
        symbols.push(j);
    }
    Codeword::new(symbols)
}

fn ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    2f64.powf(log2_approx(num) - log2_approx(den))
}

/// Uniform draw from the type class: a shuffle of the worst-case sequence.
pub fn sample_typeclass<R: Rng>(composition: &Composition, rng: &mut R) -> Codeword {
    let mut symbols = worstcase_sequence(composition).symbols().to_vec();
    symbols.shuffle(rng);
    Codeword::new(symbols)
}

fn sample_codewords(model: &Model, samples: u64, seed: u64) -> Vec<Codeword> {
    (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            match model {
                Model::Ccdm(c) => sample_typeclass(c.composition(), &mut rng),
                Model::Iid(m) => sample_ancestral(m, &mut rng),
            }
        })
        .collect()
}

/// Input length from randomly drawn codewords: the floor of the smallest
/// `-log2` width bound seen. Only a probabilistic guarantee.
///
/// CCDM codewords are drawn uniformly from the type class, other models by
/// ancestral sampling.
pub fn k_fpa_sampled(model: &Model, w: u32, samples: u64, seed: u64) -> Result<i64> {
    if samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    crate::fpa::check_precision(w)?;
    sample_codewords(model, samples, seed)
        .par_iter()
        .map(|c| k_allowed_by_codeword(model, c, w))
        .collect::<Result<Vec<_>>>()
        .map(|ks| ks.into_iter().min().expect("samples >= 1"))
}

/// `(ε + 2^-w) log2(e) Σ 1/P_i`, from `log2(1 + x) <= x log2(e)`.
pub fn rateloss_linear_bound(epsilon: f64, w: u32, inv_prob_sum: f64) -> f64 {
    (epsilon + 2f64.powi(-(w as i32))) * std::f64::consts::LOG2_E * inv_prob_sum
}

/// `Σ 1/P_i` along the worst-case sequence.
pub fn worst_path_inv_prob_sum(composition: &Composition) -> f64 {
    let z = worstcase_sequence(composition);
    inverse_probs_along(composition.counts(), &z)
        .expect("z is in the type class")
        .into_iter()
        .map(|(left, rem)| left as f64 / rem as f64)
        .sum()
}

/// Value of the binary m-out-of-n rate-loss bound, or `Overflow` outside its domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum RamabadranBound {
    Value(f64),
    Overflow,
}

impl RamabadranBound {
    pub fn value(self) -> Option<f64> {
        match self {
            RamabadranBound::Value(v) => Some(v),
            RamabadranBound::Overflow => None,
        }
    }
}

/// `Δk < log2(1 + ln(1 / (1 - 2^-(w+1) T)))` with
/// `T = Σ_b n_b (1.5772 + ln n_{1-b} + 1 / (2 n_{1-b}))`.
pub fn ramabadran_bound(composition: &Composition, w: u32) -> Result<RamabadranBound> {
    let c = composition.counts();
    if c.len() != 2 {
        return Err(Error::invalid("the m-out-of-n bound needs a binary composition"));
    }
    if c.contains(&0) {
        return Err(Error::invalid("the m-out-of-n bound needs both counts >= 1"));
    }
    let t: f64 = (0..2)
        .map(|b| {
            let other = c[1 - b] as f64;
            c[b] as f64 * (RAMABADRAN_CONSTANT + other.ln() + 1.0 / (2.0 * other))
        })
        .sum();
    let x = t * 2f64.powi(-(w as i32) - 1);
    if x >= 1.0 {
        return Ok(RamabadranBound::Overflow);
    }
    Ok(RamabadranBound::Value((1.0 + (1.0 / (1.0 - x)).ln()).log2()))
}

/// Which rate-loss estimate to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RateLossMethod {
    Theorem1,
    Sampled,
    Ramabadran,
    Linearized,
}

impl FromStr for RateLossMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem1" => Ok(Self::Theorem1),
            "sample" | "sampled" => Ok(Self::Sampled),
            "ramabadran" => Ok(Self::Ramabadran),
            "linearized" | "linear" => Ok(Self::Linearized),
            other => Err(Error::invalid(format!("unknown rate-loss method {other:?}"))),
        }
    }
}

impl fmt::Display for RateLossMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Theorem1 => "theorem1",
            Self::Sampled => "sampled",
            Self::Ramabadran => "ramabadran",
            Self::Linearized => "linearized",
        })
    }
}

/// Rate-loss summary for one model and precision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateLossReport {
    pub method: RateLossMethod,
    pub delta_k: f64,
    pub k_ipa: u64,
    pub k_fpa: u64,
    pub n: u64,
    pub w: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<u64>>,
}

/// `floor(-log2 max_c P_C(c))` for models where the maximum is known in closed form.
pub fn k_ipa_model(model: &Model) -> u64 {
    match model {
        Model::Ccdm(c) => k_ipa(c.composition().counts()),
        Model::Iid(m) => {
            let st = ();
            let best = (0..m.m())
                .map(|j| m.branching_prob(&st, 0, j).to_rational())
                .max()
                .expect("non-empty alphabet");
            let n = m.output_len();
            let num = best.numer().to_biguint().expect("positive").pow(n as u32);
            let den = best.denom().to_biguint().expect("positive").pow(n as u32);
            floor_neg_log2(&num, &den).max(0) as u64
        }
    }
}

/// Rate-loss report using the requested method.
pub fn rateloss_report(
    model: &Model,
    w: u32,
    method: RateLossMethod,
    samples: u64,
    seed: u64,
) -> Result<RateLossReport> {
    let n = model.output_len() as u64;
    let k_ipa = k_ipa_model(model);
    let gamma = model.as_ccdm().map(|c| c.composition().counts().to_vec());
    let need_ccdm = || {
        model
            .as_ccdm()
            .map(|c| c.composition())
            .ok_or_else(|| Error::invalid(format!("method {method} needs a constant-composition model")))
    };
    let (delta_k, k_fpa) = match method {
        RateLossMethod::Theorem1 => {
            let comp = need_ccdm()?;
            let d = rateloss_theorem1(comp, w)?;
            (d, k_fpa_from_delta(comp.counts(), d))
        }
        RateLossMethod::Ramabadran => {
            let comp = need_ccdm()?;
            match ramabadran_bound(comp, w)? {
                RamabadranBound::Value(d) => (d, k_fpa_from_delta(comp.counts(), d)),
                RamabadranBound::Overflow => {
                    return Err(Error::config(format!(
                        "m-out-of-n bound is not applicable at n={n}, w={w}"
                    )))
                }
            }
        }
        RateLossMethod::Linearized => {
            crate::fpa::check_precision(w)?;
            match model {
                Model::Ccdm(c) => {
                    let comp = c.composition();
                    let d = rateloss_linear_bound(0.0, w, worst_path_inv_prob_sum(comp));
                    (d, k_fpa_from_delta(comp.counts(), d))
                }
                Model::Iid(m) => {
                    let eps = m.epsilon().to_f64().unwrap_or(f64::INFINITY);
                    let p_min = m.target().probs().iter().cloned().fold(f64::INFINITY, f64::min);
                    let d = rateloss_linear_bound(eps, w, n as f64 / p_min);
                    let p_max = m.target().probs().iter().cloned().fold(0.0, f64::max);
                    let ipa = -(n as f64) * p_max.log2() * (1.0 - 1e-12);
                    (d, (ipa - d).floor().max(0.0) as u64)
                }
            }
        }
        RateLossMethod::Sampled => {
            let k = k_fpa_sampled(model, w, samples, seed)?;
            let d = sampled_delta(model, w, samples, seed)?;
            (d, k.max(0) as u64)
        }
    };
    Ok(RateLossReport {
        method,
        delta_k,
        k_ipa,
        k_fpa: k_fpa.min(k_ipa),
        n,
        w,
        gamma,
    })
}

/// Largest `Σ log2(1 + (ε + 2^-w) / P_i)` over the sampled codewords.
fn sampled_delta(model: &Model, w: u32, samples: u64, seed: u64) -> Result<f64> {
    let eps = model.epsilon().to_f64().unwrap_or(f64::INFINITY) + 2f64.powi(-(w as i32));
    let per: Vec<f64> = sample_codewords(model, samples, seed)
        .par_iter()
        .map(|c| {
            let mut state = model.initial_state();
            let mut acc = UpwardLog2Sum::new();
            for (i, &s) in c.symbols().iter().enumerate() {
                let p = model.branching_prob(&state, i, s);
                acc.add_log2_1p(eps / ratio_f64(&p.num, &p.den));
                model.advance(&mut state, s);
            }
            acc.upper()
        })
        .collect();
    Ok(per.into_iter().fold(0.0, f64::max))
}

/// Families of compositions indexed by output length.
#[derive(Debug, Clone, PartialEq)]
pub enum CompositionFamily {
    /// `[n/2, n/2]` for even `n`.
    BalancedBinary,
    /// Composition chosen by [`select_composition`] for each `n`.
    Target(TargetDistribution),
}

impl CompositionFamily {
    fn stride(&self) -> u64 {
        match self {
            CompositionFamily::BalancedBinary => 2,
            CompositionFamily::Target(_) => 1,
        }
    }

    pub fn composition(&self, n: u64) -> Result<Composition> {
        match self {
            CompositionFamily::BalancedBinary => {
                if n == 0 || n % 2 != 0 {
                    return Err(Error::invalid("balanced binary family needs even n >= 2"));
                }
                Composition::from_counts(vec![n / 2, n / 2])
            }
            CompositionFamily::Target(t) => select_composition(t, n),
        }
    }
}

/// Whether the chosen method reports `Δk < 1` at length `n`.
fn rateloss_below_one(family: &CompositionFamily, method: RateLossMethod, w: u32, n: u64) -> Result<bool> {
    let comp = family.composition(n)?;
    Ok(match method {
        RateLossMethod::Theorem1 => match rateloss_theorem1(&comp, w) {
            Ok(d) => d < 1.0,
            Err(Error::Config(_)) => false,
            Err(e) => return Err(e),
        },
        RateLossMethod::Ramabadran => matches!(ramabadran_bound(&comp, w)?, RamabadranBound::Value(d) if d < 1.0),
        RateLossMethod::Linearized => rateloss_linear_bound(0.0, w, worst_path_inv_prob_sum(&comp)) < 1.0,
        RateLossMethod::Sampled => {
            return Err(Error::invalid("n_max search does not support the sampled method"))
        }
    })
}

/// Largest `n <= n_limit` in the family with `Δk < 1`, or 0 if none.
///
/// Bisects assuming `Δk` grows with `n`, then probes the neighbours of the
/// answer; if they disagree with monotonicity it falls back to a linear scan
/// for the longest prefix of lengths that all satisfy the bound.
pub fn nmax_search(w: u32, family: &CompositionFamily, method: RateLossMethod, n_limit: u64) -> Result<u64> {
    crate::fpa::check_precision(w)?;
    let stride = family.stride();
    let max_index = n_limit / stride;
    if max_index == 0 {
        return Ok(0);
    }
    let pred = |t: u64| rateloss_below_one(family, method, w, t * stride);
    if !pred(1)? {
        return Ok(0);
    }
    let (mut lo, mut hi) = (1u64, max_index);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if pred(mid)? {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let mut consistent = true;
    for t in lo.saturating_sub(2).max(1)..=lo {
        consistent &= pred(t)?;
    }
    for t in (lo + 1)..=(lo + 2).min(max_index) {
        consistent &= !pred(t)?;
    }
    if consistent {
        return Ok(lo * stride);
    }
    let mut last = 0;
    for t in 1..=max_index {
        if !pred(t)? {
            break;
        }
        last = t;
    }
    Ok(last * stride)
}

/// Divergence figures for a uniform codebook of `2^k` codewords of one type class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub per_symbol_divergence: f64,
    pub rate: f64,
    pub entropy_q: f64,
    pub entropy_p: f64,
    pub kl_qp: f64,
}

/// `(1/n) D(P_Ã || P_A^n) = H(Q) - k/n + D(Q || P_A)`.
pub fn ccdm_divergence(composition: &Composition, k: u64, target: &TargetDistribution) -> Result<DivergenceReport> {
    if composition.m() != target.alphabet().len() {
        return Err(Error::invalid(format!(
            "composition has {} symbols, target has {}",
            composition.m(),
            target.alphabet().len()
        )));
    }
    if k > k_ipa(composition.counts()) {
        return Err(Error::invalid(format!("2^{k} exceeds the type-class size")));
    }
    let q = composition.n_type_f64();
    let entropy_q = entropy_bits(&q);
    let kl_qp = kl_divergence_bits(&q, target.probs());
    let rate = k as f64 / composition.n() as f64;
    Ok(DivergenceReport {
        per_symbol_divergence: entropy_q - rate + kl_qp,
        rate,
        entropy_q,
        entropy_p: entropy_bits(target.probs()),
        kl_qp,
    })
}

/// Limits of rate and divergence of a one-to-one FPA CCDM with n-type `q`:
/// `(H(Q) - log2(1 + 2^-w), log2(1 + 2^-w) + D(Q || P))`.
///
/// Both are strict asymptotic bounds, not finite-length guarantees.
pub fn asymptotic_bounds(q: &[f64], target: &TargetDistribution, w: u32) -> (f64, f64) {
    let loss = (2f64.powi(-(w as i32))).ln_1p() * std::f64::consts::LOG2_E;
    (entropy_bits(q) - loss, loss + kl_divergence_bits(q, target.probs()))
}

/// One point of a rate/divergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub w: u32,
    pub k_ipa: u64,
    pub k_fpa: u64,
    pub delta_k: f64,
    pub rate: f64,
    pub divergence: f64,
    /// False when `2^w < n`: the closed form is evaluated but the coder cannot run.
    pub certified: bool,
    #[serde(skip)]
    pub gamma: Vec<u64>,
}

/// CCDM figures at length `n` and precision `w` for the composition chosen
/// for `target`.
pub fn sweep_point(target: &TargetDistribution, n: u64, w: u32) -> Result<SweepRow> {
    crate::fpa::check_precision(w)?;
    let comp = select_composition(target, n)?;
    let certified = (n as u128) <= (1u128 << w);
    let delta_k = rateloss_theorem1_formula(&comp, w);
    let k_ipa = k_ipa(comp.counts());
    let k_fpa = k_fpa_from_delta(comp.counts(), delta_k).min(k_ipa);
    let div = ccdm_divergence(&comp, k_fpa, target)?;
    Ok(SweepRow {
        n,
        w,
        k_ipa,
        k_fpa,
        delta_k,
        rate: div.rate,
        divergence: div.per_symbol_divergence,
        certified,
        gamma: comp.counts().to_vec(),
    })
}

/// [`sweep_point`] over a grid, in `(n, w)` row-major order.
pub fn sweep(target: &TargetDistribution, ns: &[u64], ws: &[u32]) -> Result<Vec<SweepRow>> {
    let grid: Vec<(u64, u32)> = ns.iter().flat_map(|&n| ws.iter().map(move |&w| (n, w))).collect();
    grid.par_iter().map(|&(n, w)| sweep_point(target, n, w)).collect()
}
