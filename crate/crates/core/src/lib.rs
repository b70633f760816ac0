//! Finite-precision arithmetic-coding distribution matchers.
//!
//! A distribution matcher maps `k` uniform input bits one-to-one onto
//! length-`n` codewords whose empirical distribution approximates a target.
//! This crate implements the arithmetic-coding construction with `w`-bit
//! interval arithmetic, constant-composition (CCDM) and i.i.d. branching
//! models, and the rate-loss analysis used to pick a safe `k`.
//!
//! ```
//! use acdm::{Composition, KPolicy, Matcher, Model, SamplingConfig, BitBlock};
//!
//! let comp = Composition::parse_counts("3,3").unwrap();
//! let m = Matcher::new(Model::ccdm(comp), 14, KPolicy::Auto, SamplingConfig::default()).unwrap();
//! assert_eq!(m.k(), 4);
//! let input: BitBlock = "1011".parse().unwrap();
//! let c = m.encode(&input).unwrap();
//! assert_eq!(m.decode(&c).unwrap(), input);
//! ```

pub mod analysis;
pub mod cli;
pub mod codec;
pub mod error;
pub mod fpa;
pub mod models;
pub mod numeric;
pub mod oracle;

pub use analysis::{
    bound_codeword, ccdm_divergence, count_typeclass, k_fpa_ccdm, k_fpa_sampled, k_ipa, nmax_search,
    ramabadran_bound, rateloss_theorem1, worstcase_sequence, CompositionFamily, RateLossMethod,
};
pub use codec::{decode, encode, BitBlock, Codeword, KPolicy, Matcher, RoundtripReport, SamplingConfig};
pub use error::{Error, Result};
pub use fpa::FpaState;
pub use models::{
    select_composition, Alphabet, BranchingModel, CcdmModel, Composition, IidModel, Model, QuantizedStep,
    TargetDistribution,
};
