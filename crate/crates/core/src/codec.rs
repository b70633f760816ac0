//! Block-to-block matcher: `k` uniform bits to `n` symbols and back.
//!
//! The input block `u` is the point `NC_2(u) / 2^k` in `[0, 1)`. The encoder
//! descends the interval tree of the model, always entering the child that
//! contains the point; the decoder rebuilds the interval of a codeword and
//! returns the unique grid point inside it.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis;
use crate::error::{Error, Result};
use crate::fpa::{boundary, check_precision, check_theta, renorm_shift, FpaState};
use crate::models::{Alphabet, BranchingModel, Model};

/// Largest `k` accepted by exhaustive sweeps.
pub const MAX_EXHAUSTIVE_BITS: u64 = 24;

/// `k` input bits, most significant first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitBlock {
    bits: Vec<u8>,
}

impl BitBlock {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::invalid("bits must be 0 or 1"));
        }
        Ok(Self { bits })
    }

    pub fn empty() -> Self {
        Self { bits: Vec::new() }
    }

    /// The `k`-bit binary expansion of `value`. Fails if `value >= 2^k`.
    pub fn from_value(value: &BigUint, k: u64) -> Result<Self> {
        if value.bits() > k {
            return Err(Error::invalid(format!("value does not fit in {k} bits")));
        }
        let bits = (0..k).rev().map(|i| value.bit(i) as u8).collect();
        Ok(Self { bits })
    }

    /// `NC_2(u)`.
    pub fn value(&self) -> BigUint {
        let mut v = BigUint::zero();
        for (i, &b) in self.bits.iter().rev().enumerate() {
            if b == 1 {
                v.set_bit(i as u64, true);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Bit at position `i`, zero past the end.
    #[inline]
    fn bit_or_zero(&self, i: usize) -> u64 {
        self.bits.get(i).copied().unwrap_or(0) as u64
    }
}

impl FromStr for BitBlock {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::invalid(format!("bad bit character {c:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(|bits| Self { bits })
    }
}

impl fmt::Display for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Output sequence of 0-based alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Codeword {
    symbols: Vec<usize>,
}

impl Codeword {
    pub fn new(symbols: Vec<usize>) -> Self {
        Self { symbols }
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbol counts over an alphabet of size `m`.
    pub fn composition(&self, m: usize) -> Vec<u64> {
        let mut counts = vec![0u64; m];
        for &s in &self.symbols {
            counts[s] += 1;
        }
        counts
    }

    /// Parses comma-separated indices, or labels when `alphabet` is given.
    pub fn parse(text: &str, alphabet: Option<&Alphabet>) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Self::new(Vec::new()));
        }
        let symbols = text
            .split(',')
            .map(|t| {
                let t = t.trim();
                match alphabet {
                    Some(a) => a
                        .index_of(t)
                        .ok_or_else(|| Error::invalid(format!("unknown symbol label {t:?}"))),
                    None => t
                        .parse::<usize>()
                        .map_err(|_| Error::invalid(format!("bad symbol index {t:?}"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(symbols))
    }

    pub fn format_indices(&self) -> String {
        self.symbols
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn format_labels(&self, alphabet: &Alphabet) -> String {
        self.symbols
            .iter()
            .map(|&s| alphabet.label(s).unwrap_or("?"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// `NC_m`: the sequence read as a base-`m` number, first symbol most significant.
pub fn nc(symbols: &[usize], m: usize) -> BigUint {
    let base = BigUint::from(m);
    symbols
        .iter()
        .fold(BigUint::zero(), |acc, &s| acc * &base + BigUint::from(s))
}

fn check_setup<M: BranchingModel>(model: &M, w: u32) -> Result<()> {
    check_precision(w)?;
    check_theta(model.max_theta(), w)
}

/// Maps `k` bits to a codeword of length `n`.
///
/// The point is tracked relative to the current interval start, in units of
/// `2^-(L+w)`; its integer part `q` decides the child, and each renormalization
/// shifts in the next input bits. This is the same comparison as
/// `p 2^(L+w) >= x̂ 2^k`, done without big integers.
pub fn encode<M: BranchingModel>(model: &M, w: u32, k: u64, input: &BitBlock) -> Result<Codeword> {
    check_setup(model, w)?;
    if input.len() as u64 != k {
        return Err(Error::invalid(format!(
            "input has {} bits, expected k={k}",
            input.len()
        )));
    }
    let n = model.output_len();
    let mut state = model.initial_state();
    let mut yhat: u64 = 1 << w;
    let mut pos = 0usize;
    let mut q: u64 = 0;
    for _ in 0..w {
        q = (q << 1) | input.bit_or_zero(pos);
        pos += 1;
    }
    let mut symbols = Vec::with_capacity(n);
    for i in 0..n {
        let step = model.quantized_step(&state, i);
        check_theta(step.theta(), w)?;
        let m = step.m();
        // largest j whose lower boundary is <= q
        let mut j = 0;
        let mut lo = 0u64;
        let mut hi = yhat;
        for cand in 1..m {
            let b = boundary(yhat, step.cum_counts()[cand - 1], step.theta());
            if b <= q {
                j = cand;
                lo = b;
            } else {
                hi = b;
                break;
            }
        }
        let width = hi - lo;
        if width == 0 || q - lo >= width {
            return Err(Error::Internal(format!(
                "no child interval contains the point at step {i}"
            )));
        }
        let v = renorm_shift(width, w);
        q -= lo;
        for _ in 0..v {
            q = (q << 1) | input.bit_or_zero(pos);
            pos += 1;
        }
        yhat = width << v;
        model.advance(&mut state, j);
        symbols.push(j);
    }
    Ok(Codeword::new(symbols))
}

/// Finite-precision interval of a codeword.
pub fn codeword_interval<M: BranchingModel>(model: &M, w: u32, codeword: &Codeword) -> Result<FpaState> {
    check_setup(model, w)?;
    let n = model.output_len();
    if codeword.len() != n {
        return Err(Error::invalid(format!(
            "codeword has {} symbols, expected n={n}",
            codeword.len()
        )));
    }
    let m = model.m();
    let mut state = model.initial_state();
    let mut interval = FpaState::new(w)?;
    for (i, &sym) in codeword.symbols().iter().enumerate() {
        if sym >= m {
            return Err(Error::invalid(format!(
                "symbol index {sym} at step {i} outside alphabet of size {m}"
            )));
        }
        let step = model.quantized_step(&state, i);
        interval.refine_in_place(&step, sym, i)?;
        model.advance(&mut state, sym);
    }
    Ok(interval)
}

/// Recovers the `k` input bits from a codeword.
pub fn decode<M: BranchingModel>(model: &M, w: u32, k: u64, codeword: &Codeword) -> Result<BitBlock> {
    let interval = codeword_interval(model, w, codeword).map_err(|e| match e {
        Error::ZeroWidthChild { step, symbol } => Error::DecodeOutsideImage(format!(
            "symbol {symbol} at step {step} has zero probability under the model"
        )),
        other => other,
    })?;
    let scale = interval.scale_bits();
    let xhat = interval.xhat();
    // p = ceil(x̂ 2^k / 2^(L+w))
    let p = if k >= scale {
        xhat << (k - scale) as usize
    } else {
        let sh = (scale - k) as usize;
        let mut p = xhat >> sh;
        if (&p << sh) != *xhat {
            p += 1u32;
        }
        p
    };
    let upper = (xhat + BigUint::from(interval.yhat())) << k as usize;
    if (&p << scale as usize) >= upper {
        return Err(Error::DecodeOutsideImage(
            "final interval contains no input point".into(),
        ));
    }
    BitBlock::from_value(&p, k)
}

/// Outcome of a round-trip verification run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundtripReport {
    pub trials: u64,
    pub passes: u64,
    pub failures: u64,
    /// Input of the lowest-numbered failing trial and what went wrong.
    pub first_failure: Option<RoundtripFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundtripFailure {
    pub trial: u64,
    pub input: String,
    pub reason: String,
}

impl RoundtripReport {
    pub fn all_passed(&self) -> bool {
        self.failures == 0
    }
}

fn roundtrip_one<M: BranchingModel>(model: &M, w: u32, k: u64, input: &BitBlock) -> std::result::Result<(), String> {
    let c = encode(model, w, k, input).map_err(|e| format!("encode: {e}"))?;
    let back = decode(model, w, k, &c).map_err(|e| format!("decode: {e}"))?;
    if &back == input {
        Ok(())
    } else {
        Err(format!("decoded {back}"))
    }
}

fn collect_report(trials: u64, mut failures: Vec<RoundtripFailure>) -> RoundtripReport {
    failures.sort_by_key(|f| f.trial);
    let count = failures.len() as u64;
    RoundtripReport {
        trials,
        passes: trials - count,
        failures: count,
        first_failure: failures.into_iter().next(),
    }
}

/// Input block of a seeded random trial. Each trial has its own ChaCha stream,
/// so results do not depend on scheduling.
pub fn trial_input(seed: u64, trial: u64, k: u64) -> BitBlock {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    BitBlock {
        bits: (0..k).map(|_| rng.random::<bool>() as u8).collect(),
    }
}

/// Encodes and decodes `trials` uniformly random `k`-bit blocks.
pub fn roundtrip_check<M>(model: &M, w: u32, k: u64, trials: u64, seed: u64) -> RoundtripReport
where
    M: BranchingModel + Sync,
{
    let failures: Vec<RoundtripFailure> = (0..trials)
        .into_par_iter()
        .filter_map(|t| {
            let input = trial_input(seed, t, k);
            roundtrip_one(model, w, k, &input).err().map(|reason| RoundtripFailure {
                trial: t,
                input: input.to_string(),
                reason,
            })
        })
        .collect();
    collect_report(trials, failures)
}

/// Sweeps all `2^k` inputs in order.
pub fn roundtrip_exhaustive<M>(model: &M, w: u32, k: u64) -> Result<RoundtripReport>
where
    M: BranchingModel + Sync,
{
    if k > MAX_EXHAUSTIVE_BITS {
        return Err(Error::InstanceTooLarge(format!(
            "2^{k} inputs exceeds the 2^{MAX_EXHAUSTIVE_BITS} sweep limit"
        )));
    }
    let total = 1u64 << k;
    let failures: Vec<RoundtripFailure> = (0..total)
        .into_par_iter()
        .filter_map(|p| {
            let input = BitBlock::from_value(&BigUint::from(p), k).expect("fits");
            roundtrip_one(model, w, k, &input).err().map(|reason| RoundtripFailure {
                trial: p,
                input: input.to_string(),
                reason,
            })
        })
        .collect();
    Ok(collect_report(total, failures))
}

/// Above the analytic bound, [`KPolicy::Checked`] still accepts a `k` up to
/// this many bits if an exhaustive sweep of all inputs round-trips.
pub const MAX_SWEEP_CERTIFY_BITS: u64 = 16;

/// How a [`Matcher`] picks its input length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KPolicy {
    /// Largest length certified by the rate-loss analysis.
    Auto,
    /// Caller-chosen length; rejected unless certified analytically or, for
    /// small `k`, by an exhaustive sweep.
    Checked(u64),
    /// Caller-chosen length, not validated.
    Unchecked(u64),
}

/// Sampling parameters for models without a closed-form rate loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingConfig {
    pub samples: u64,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: 0,
        }
    }
}

/// A model bound to a precision and a validated input length.
#[derive(Debug, Clone)]
pub struct Matcher {
    model: Model,
    w: u32,
    k: u64,
    certified_k: Option<u64>,
}

impl Matcher {
    pub fn new(model: Model, w: u32, policy: KPolicy, sampling: SamplingConfig) -> Result<Self> {
        check_setup(&model, w)?;
        let certified = || -> Result<u64> {
            match &model {
                Model::Ccdm(c) => analysis::k_fpa_ccdm(c.composition(), w),
                Model::Iid(_) => analysis::k_fpa_sampled(&model, w, sampling.samples, sampling.seed)
                    .map(|k| k.max(0) as u64),
            }
        };
        let (k, certified_k) = match policy {
            KPolicy::Auto => {
                let c = certified()?;
                (c, Some(c))
            }
            KPolicy::Checked(k) => {
                let c = certified()?;
                // Small instances can be certified by sweeping every input instead.
                let swept = k > c
                    && k <= MAX_SWEEP_CERTIFY_BITS
                    && roundtrip_exhaustive(&model, w, k)?.all_passed();
                if k > c && !swept {
                    return Err(Error::config(format!(
                        "k={k} exceeds the certified input length {c} at w={w}"
                    )));
                }
                (k, Some(c))
            }
            KPolicy::Unchecked(k) => (k, None),
        };
        Ok(Self {
            model,
            w,
            k,
            certified_k,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.model.output_len()
    }

    pub fn certified_k(&self) -> Option<u64> {
        self.certified_k
    }

    pub fn encode(&self, input: &BitBlock) -> Result<Codeword> {
        encode(&self.model, self.w, self.k, input)
    }

    pub fn decode(&self, codeword: &Codeword) -> Result<BitBlock> {
        decode(&self.model, self.w, self.k, codeword)
    }

    pub fn roundtrip(&self, trials: u64, seed: u64) -> RoundtripReport {
        roundtrip_check(&self.model, self.w, self.k, trials, seed)
    }
}
