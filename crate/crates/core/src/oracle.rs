//! Exact reference implementations for small instances.
//!
//! Everything here enumerates: infinite-precision codeword intervals with
//! exact rationals, all `2^k` inputs of a matcher, all arrangements of a
//! composition. Use it to check the fast paths, not in production.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::analysis::{bound_codeword, worstcase_sequence};
use crate::codec::{codeword_interval, decode, encode, BitBlock, Codeword};
use crate::error::{Error, Result};
use crate::fpa::{check_precision, check_theta, FpaState};
use crate::models::{BranchingModel, Composition, TargetDistribution};
use crate::numeric::{floor_neg_log2_rational, pow2_neg};

/// Most codewords any enumeration here will visit.
pub const ENUMERATION_LIMIT: usize = 100_000;

/// Largest `k` accepted by [`exhaustive_bijectivity`].
pub const MAX_BIJECTIVITY_BITS: u64 = 20;

/// `[start, start + width)` with exact endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalInterval {
    pub start: BigRational,
    pub width: BigRational,
}

impl RationalInterval {
    pub fn end(&self) -> BigRational {
        &self.start + &self.width
    }
}

fn too_large(what: &str) -> Error {
    Error::InstanceTooLarge(format!("{what} exceeds {ENUMERATION_LIMIT} codewords"))
}

/// Infinite-precision intervals of every codeword with positive probability,
/// in lexicographic order.
pub fn ipa_intervals<M: BranchingModel>(model: &M) -> Result<Vec<(Codeword, RationalInterval)>> {
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(model.output_len());
    let root = RationalInterval {
        start: BigRational::zero(),
        width: BigRational::one(),
    };
    ipa_walk(model, model.initial_state(), root, &mut prefix, &mut out)?;
    Ok(out)
}

fn ipa_walk<M: BranchingModel>(
    model: &M,
    state: M::State,
    interval: RationalInterval,
    prefix: &mut Vec<usize>,
    out: &mut Vec<(Codeword, RationalInterval)>,
) -> Result<()> {
    let i = prefix.len();
    if i == model.output_len() {
        if out.len() >= ENUMERATION_LIMIT {
            return Err(too_large("model support"));
        }
        out.push((Codeword::new(prefix.clone()), interval));
        return Ok(());
    }
    let mut start = interval.start.clone();
    for (j, p) in model.branching_probs(&state, i).into_iter().enumerate() {
        let width = &interval.width * &p;
        if !p.is_zero() {
            let mut next = state.clone();
            model.advance(&mut next, j);
            prefix.push(j);
            let child = RationalInterval {
                start: start.clone(),
                width: width.clone(),
            };
            ipa_walk(model, next, child, prefix, out)?;
            prefix.pop();
        }
        start += width;
    }
    Ok(())
}

/// `floor(-log2 max_c P_C(c))`, exact.
pub fn ipa_kmax<M: BranchingModel>(model: &M) -> Result<u64> {
    let widest = ipa_intervals(model)?
        .into_iter()
        .map(|(_, iv)| iv.width)
        .max()
        .ok_or_else(|| Error::invalid("model has no codewords"))?;
    Ok(floor_neg_log2_rational(&widest).max(0) as u64)
}

/// All sequences with the given counts, in lexicographic order.
pub fn typeclass_sequences(counts: &[u64]) -> Result<Vec<Codeword>> {
    let n: u64 = counts.iter().sum();
    let mut out = Vec::new();
    let mut remaining = counts.to_vec();
    let mut prefix = Vec::with_capacity(n as usize);
    permutations_walk(&mut remaining, n as usize, &mut prefix, &mut out)?;
    Ok(out)
}

fn permutations_walk(
    remaining: &mut [u64],
    n: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Codeword>,
) -> Result<()> {
    if prefix.len() == n {
        if out.len() >= ENUMERATION_LIMIT {
            return Err(too_large("type class"));
        }
        out.push(Codeword::new(prefix.clone()));
        return Ok(());
    }
    for j in 0..remaining.len() {
        if remaining[j] > 0 {
            remaining[j] -= 1;
            prefix.push(j);
            permutations_walk(remaining, n, prefix, out)?;
            prefix.pop();
            remaining[j] += 1;
        }
    }
    Ok(())
}

/// Why an input failed the bijectivity check.
#[derive(Debug, Clone, PartialEq)]
pub struct BijectivityCounterexample {
    pub input: BitBlock,
    pub codeword: Option<Codeword>,
    pub reason: String,
}

/// Encodes and decodes all `2^k` inputs.
///
/// Decoding is a function, so `decode(encode(u)) == u` for every `u` also
/// shows the codewords are distinct. Returns the counterexample with the
/// smallest input value, if any.
pub fn exhaustive_bijectivity<M>(model: &M, w: u32, k: u64) -> Result<Option<BijectivityCounterexample>>
where
    M: BranchingModel + Sync,
{
    if k > MAX_BIJECTIVITY_BITS {
        return Err(Error::InstanceTooLarge(format!(
            "2^{k} inputs exceeds 2^{MAX_BIJECTIVITY_BITS}"
        )));
    }
    check_precision(w)?;
    check_theta(model.max_theta(), w)?;
    let failure = (0..1u64 << k).into_par_iter().find_map_first(|value| {
        let input = BitBlock::from_value(&BigUint::from(value), k).expect("value fits in k bits");
        let codeword = match encode(model, w, k, &input) {
            Ok(c) => c,
            Err(e) => {
                return Some(BijectivityCounterexample {
                    input,
                    codeword: None,
                    reason: format!("encode failed: {e}"),
                })
            }
        };
        match decode(model, w, k, &codeword) {
            Ok(back) if back == input => None,
            Ok(back) => Some(BijectivityCounterexample {
                input,
                codeword: Some(codeword),
                reason: format!("decoded to {back}"),
            }),
            Err(e) => Some(BijectivityCounterexample {
                input,
                codeword: Some(codeword),
                reason: format!("decode failed: {e}"),
            }),
        }
    });
    Ok(failure)
}

/// Codewords of the type class attaining the largest width bound, in lexicographic order.
pub fn bound_maximizers(composition: &Composition, w: u32) -> Result<Vec<Codeword>> {
    let model = crate::models::CcdmModel::new(composition.clone());
    let scored = typeclass_sequences(composition.counts())?
        .into_par_iter()
        .map(|c| bound_codeword(&model, &c, w).map(|b| (c, b)))
        .collect::<Result<Vec<_>>>()?;
    let best = scored
        .iter()
        .map(|(_, b)| b)
        .max()
        .cloned()
        .ok_or_else(|| Error::invalid("empty type class"))?;
    Ok(scored.into_iter().filter(|(_, b)| *b == best).map(|(c, _)| c).collect())
}

/// Lexicographically smallest codeword with the largest width bound.
pub fn exhaustive_worstcase(composition: &Composition, w: u32) -> Result<Codeword> {
    Ok(bound_maximizers(composition, w)?.swap_remove(0))
}

/// Whether the closed-form worst-case sequence attains the exhaustive maximum.
pub fn worstcase_is_maximizer(composition: &Composition, w: u32) -> Result<bool> {
    let z = worstcase_sequence(composition);
    Ok(bound_maximizers(composition, w)?.contains(&z))
}

/// Codeword whose finite-precision width exceeds its width bound, if any.
///
/// Codewords that hit a zero-width child have width zero and cannot violate
/// the bound.
pub fn width_bound_violation<M>(model: &M, w: u32) -> Result<Option<Codeword>>
where
    M: BranchingModel + Sync,
{
    let codewords: Vec<Codeword> = ipa_intervals(model)?.into_iter().map(|(c, _)| c).collect();
    codewords
        .into_par_iter()
        .map(|c| {
            let width = match codeword_interval(model, w, &c) {
                Ok(state) => state.interval_value().1,
                Err(Error::ZeroWidthChild { .. }) => BigRational::zero(),
                Err(e) => return Err(e),
            };
            let bound = bound_codeword(model, &c, w)?;
            Ok((width > bound).then_some(c))
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().flatten().next())
}

/// Straightforward encoder: compares the input point with every child's
/// endpoints using big-integer cross-multiplication.
pub fn reference_encode<M: BranchingModel>(model: &M, w: u32, k: u64, input: &BitBlock) -> Result<Codeword> {
    if input.len() as u64 != k {
        return Err(Error::invalid(format!("input has {} bits, expected k={k}", input.len())));
    }
    check_theta(model.max_theta(), w)?;
    let point = input.value();
    let mut interval = FpaState::new(w)?;
    let mut state = model.initial_state();
    let mut symbols = Vec::with_capacity(model.output_len());
    for i in 0..model.output_len() {
        let step = model.quantized_step(&state, i);
        let layout = interval.child_layout(&step)?;
        let scaled_point = &point << interval.scale_bits() as usize;
        let j = (0..step.m())
            .find(|&j| {
                let lo = (interval.xhat() + BigUint::from(layout.lower_offsets[j])) << k as usize;
                let hi = &lo + (BigUint::from(layout.widths[j]) << k as usize);
                lo <= scaled_point && scaled_point < hi
            })
            .ok_or_else(|| Error::Internal(format!("point outside every child at step {i}")))?;
        interval = interval.refine(&step, j)?;
        model.advance(&mut state, j);
        symbols.push(j);
    }
    Ok(Codeword::new(symbols))
}

/// `(1/n) D(P_Ã || P_A^n)` for a uniform distribution over `codewords`,
/// summed term by term.
pub fn divergence_by_enumeration(codewords: &[Codeword], target: &TargetDistribution) -> Result<f64> {
    let first = codewords.first().ok_or_else(|| Error::invalid("no codewords"))?;
    let n = first.len() as f64;
    let q = 1.0 / codewords.len() as f64;
    let mut total = 0.0;
    for c in codewords {
        let mut log_p = 0.0;
        for &s in c.symbols() {
            let p = *target
                .probs()
                .get(s)
                .ok_or_else(|| Error::invalid(format!("symbol index {s} outside target alphabet")))?;
            log_p += p.log2();
        }
        total += q * (q.log2() - log_p);
    }
    Ok(total / n)
}

/// Instance of the arrangement cost `c(s) = Σ log2(1 + δ x_i / r_i)`, where
/// `r_i` is how many copies of `s_i` are still unplaced before position `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostInstance {
    counts: Vec<u64>,
    delta: BigRational,
    x_values: Vec<BigRational>,
}

impl CostInstance {
    /// Requires positive, strictly decreasing `x` of length `n` and `0 < δ <= 1 / max x`.
    pub fn new(counts: Vec<u64>, delta: BigRational, x_values: Vec<BigRational>) -> Result<Self> {
        let n: u64 = counts.iter().sum();
        if x_values.len() as u64 != n {
            return Err(Error::invalid(format!("{} x values for n={n}", x_values.len())));
        }
        if x_values.iter().any(|x| !x.is_positive()) {
            return Err(Error::invalid("x values must be positive"));
        }
        if x_values.windows(2).any(|p| p[0] <= p[1]) {
            return Err(Error::invalid("x values must be strictly decreasing"));
        }
        if !delta.is_positive() {
            return Err(Error::invalid("delta must be positive"));
        }
        if let Some(x_max) = x_values.first() {
            if &delta * x_max > BigRational::one() {
                return Err(Error::invalid("delta exceeds 1 / max x"));
            }
        }
        Ok(Self {
            counts,
            delta,
            x_values,
        })
    }

    /// The CCDM instance: `x_i = n + 1 - i`, `δ = 2^-w`.
    pub fn ccdm(counts: Vec<u64>, w: u32) -> Result<Self> {
        let n: u64 = counts.iter().sum();
        let x = (1..=n)
            .rev()
            .map(|v| BigRational::from_integer(BigInt::from(v)))
            .collect();
        Self::new(counts, pow2_neg(w), x)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `2^c(s) = Π (1 + δ x_i / r_i)`, exact.
    pub fn exp2_cost(&self, sequence: &Codeword) -> Result<BigRational> {
        let mut remaining = self.counts.clone();
        let mut product = BigRational::one();
        if sequence.len() != self.x_values.len() {
            return Err(Error::invalid("sequence length differs from n"));
        }
        for (x, &s) in self.x_values.iter().zip(sequence.symbols()) {
            let r = remaining
                .get_mut(s)
                .filter(|r| **r > 0)
                .ok_or_else(|| Error::invalid("sequence does not have the instance composition"))?;
            product *= BigRational::one() + &self.delta * x / BigRational::from_integer(BigInt::from(*r));
            *r -= 1;
        }
        Ok(product)
    }

    /// Always place the symbol with the fewest unplaced copies, ties to the lowest index.
    pub fn greedy_sequence(&self) -> Codeword {
        let mut remaining = self.counts.clone();
        let n: u64 = remaining.iter().sum();
        let mut symbols = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let j = (0..remaining.len())
                .filter(|&j| remaining[j] > 0)
                .min_by_key(|&j| (remaining[j], j))
                .expect("symbols left to place");
            remaining[j] -= 1;
            symbols.push(j);
        }
        Codeword::new(symbols)
    }
}

/// True iff the greedy arrangement attains the maximum cost over all
/// arrangements; for two symbols with different positive counts the maximizer
/// must also be unique.
pub fn greedy_lemma_check(instance: &CostInstance) -> Result<bool> {
    let greedy = instance.exp2_cost(&instance.greedy_sequence())?;
    let costs = typeclass_sequences(instance.counts())?
        .into_par_iter()
        .map(|s| instance.exp2_cost(&s))
        .collect::<Result<Vec<_>>>()?;
    let best = costs.iter().max().expect("type class is non-empty");
    if *best != greedy {
        return Ok(false);
    }
    let c = instance.counts();
    if c.len() == 2 && c[0] != c[1] && c[0] > 0 && c[1] > 0 {
        return Ok(costs.iter().filter(|v| *v == best).count() == 1);
    }
    Ok(true)
}

/// `f(x2) - f(x1) <= f(x2 - x1)` for `f(x) = log2(1 + δx)`, `x2 >= x1 >= 0`,
/// checked as `1 + δx2 <= (1 + δx1)(1 + δ(x2 - x1))`.
pub fn difference_inequality_holds(delta: &BigRational, x1: &BigRational, x2: &BigRational) -> bool {
    let one = BigRational::one();
    let lhs = &one + delta * x2;
    let rhs = (&one + delta * x1) * (&one + delta * (x2 - x1));
    lhs.cmp(&rhs) != Ordering::Greater
}

/// `f(a + b) <= f(a) + f(b)` for `f(x) = log2(1 + δx)`, `a, b >= 0`.
pub fn subadditivity_holds(delta: &BigRational, a: &BigRational, b: &BigRational) -> bool {
    let one = BigRational::one();
    let lhs = &one + delta * (a + b);
    let rhs = (&one + delta * a) * (&one + delta * b);
    lhs <= rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::k_fpa_ccdm;
    use crate::models::{Alphabet, CcdmModel, IidModel};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn ccdm(c: &[u64]) -> CcdmModel {
        CcdmModel::new(Composition::from_counts(c.to_vec()).unwrap())
    }

    #[test]
    fn interval_examples() {
        let iv = ipa_intervals(&ccdm(&[1, 1])).unwrap();
        assert_eq!(iv.len(), 2);
        assert_eq!((iv[0].1.start.clone(), iv[0].1.width.clone()), (r(0, 1), r(1, 2)));
        assert_eq!((iv[1].1.start.clone(), iv[1].1.width.clone()), (r(1, 2), r(1, 2)));
        assert_eq!(iv[1].0.symbols(), &[1, 0]);

        let one = ipa_intervals(&ccdm(&[4])).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].1.width, r(1, 1));

        let four = ipa_intervals(&ccdm(&[1, 3])).unwrap();
        assert_eq!(four.len(), 4);
        assert!(four.iter().all(|(_, iv)| iv.width == r(1, 4)));
    }

    #[test]
    fn kmax_examples() {
        assert_eq!(ipa_kmax(&ccdm(&[3, 3])).unwrap(), 4);
        assert_eq!(ipa_kmax(&ccdm(&[5])).unwrap(), 0);
        let t = TargetDistribution::new(Alphabet::numeric(2), vec![0.5, 0.5]).unwrap();
        assert_eq!(ipa_kmax(&IidModel::new(t, 3, 2).unwrap()).unwrap(), 3);
    }

    #[test]
    fn enumeration_limit() {
        let t = TargetDistribution::new(Alphabet::numeric(4), vec![0.25; 4]).unwrap();
        let big = IidModel::new(t, 9, 4).unwrap();
        assert!(matches!(ipa_intervals(&big), Err(Error::InstanceTooLarge(_))));
    }

    #[test]
    fn bijectivity_examples() {
        assert!(exhaustive_bijectivity(&ccdm(&[3, 3]), 14, 4).unwrap().is_none());
        assert!(exhaustive_bijectivity(&ccdm(&[3, 3]), 14, 0).unwrap().is_none());
        let k = k_fpa_ccdm(&Composition::from_counts(vec![2, 2]).unwrap(), 2).unwrap();
        assert!(exhaustive_bijectivity(&ccdm(&[2, 2]), 2, k).unwrap().is_none());
        // 2^5 > 20 codewords
        let bad = exhaustive_bijectivity(&ccdm(&[3, 3]), 14, 5).unwrap().unwrap();
        assert!(bad.codeword.is_some());
        assert!(exhaustive_bijectivity(&ccdm(&[3, 3]), 14, 21).is_err());
    }

    #[test]
    fn worstcase_examples() {
        let c13 = Composition::from_counts(vec![1, 3]).unwrap();
        assert_eq!(exhaustive_worstcase(&c13, 4).unwrap().symbols(), &[0, 1, 1, 1]);
        let c22 = Composition::from_counts(vec![2, 2]).unwrap();
        let max = bound_maximizers(&c22, 4).unwrap();
        assert!(max.contains(&Codeword::new(vec![0, 0, 1, 1])));
        assert!(max.contains(&Codeword::new(vec![1, 1, 0, 0])));
        let c4 = Composition::from_counts(vec![4]).unwrap();
        assert_eq!(exhaustive_worstcase(&c4, 3).unwrap().symbols(), &[0, 0, 0, 0]);
    }

    #[test]
    fn greedy_examples() {
        assert!(greedy_lemma_check(&CostInstance::ccdm(vec![5], 3).unwrap()).unwrap());
        let ternary = CostInstance::new(
            vec![1, 2, 3],
            r(1, 8),
            (1..=6).rev().map(|v| r(v, 1)).collect(),
        )
        .unwrap();
        assert!(greedy_lemma_check(&ternary).unwrap());
        assert_eq!(ternary.greedy_sequence().symbols(), &[0, 1, 1, 2, 2, 2]);
        assert!(CostInstance::new(vec![1, 1], r(1, 1), vec![r(2, 1), r(1, 1)]).is_err());
        assert!(CostInstance::new(vec![1, 1], r(1, 4), vec![r(1, 1), r(2, 1)]).is_err());
    }

    #[test]
    fn reference_encoder_matches_fast_encoder() {
        let model = ccdm(&[2, 1, 3]);
        for v in 0..32u32 {
            let input = BitBlock::from_value(&BigUint::from(v), 5).unwrap();
            assert_eq!(
                reference_encode(&model, 4, 5, &input).unwrap(),
                encode(&model, 4, 5, &input).unwrap()
            );
        }
    }

    #[test]
    fn width_bound_holds_small() {
        assert!(width_bound_violation(&ccdm(&[2, 3]), 3).unwrap().is_none());
        let t = TargetDistribution::new(Alphabet::numeric(3), vec![0.2, 0.3, 0.5]).unwrap();
        assert!(width_bound_violation(&IidModel::new(t, 4, 8).unwrap(), 3).unwrap().is_none());
    }

    #[test]
    fn lemma1_inequalities() {
        let d = r(1, 16);
        assert!(difference_inequality_holds(&d, &r(3, 1), &r(7, 2)));
        assert!(subadditivity_holds(&d, &r(3, 1), &r(5, 1)));
    }

    #[test]
    fn enumeration_divergence() {
        let t = TargetDistribution::new(Alphabet::numeric(2), vec![0.5, 0.5]).unwrap();
        let cws = typeclass_sequences(&[2, 2]).unwrap();
        let d = divergence_by_enumeration(&cws[..4], &t).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }
}
