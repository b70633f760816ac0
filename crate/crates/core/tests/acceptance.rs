//! Release gate. Every check prints one `PASS`/`FAIL` line with the measured
//! values; the process exits non-zero if any check fails.

use std::time::{Duration, Instant};

use acdm::analysis::{
    ccdm_divergence, count_typeclass, k_fpa_ccdm, k_ipa, nmax_search, rateloss_theorem1, sweep_point,
    worstcase_sequence, CompositionFamily, RateLossMethod,
};
use acdm::codec::{codeword_interval, encode, nc, roundtrip_check, BitBlock};
use acdm::models::{Alphabet, CcdmModel, Composition, IidModel, TargetDistribution};
use acdm::oracle::{
    bound_maximizers, divergence_by_enumeration, exhaustive_bijectivity, greedy_lemma_check, ipa_intervals,
    ipa_kmax, typeclass_sequences, width_bound_violation, CostInstance,
};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative tolerance on the published maximum lengths.
const NMAX_REL_TOL: f64 = 0.02;
const NMAX_THEOREM1_PUBLISHED: f64 = 4440.0;
const NMAX_RAMABADRAN_PUBLISHED: f64 = 2390.0;

const LONG_COMPOSITION: [u64; 2] = [1600, 1600];
const LONG_K: u64 = 3193;
const LONG_K_ACCEPTED: [u64; 2] = [3192, 3193];
const LONG_TRIALS: u64 = 10_000;
const LONG_SEED: u64 = 7;

const SWEEP_LENGTHS: [u64; 3] = [100, 1_000, 10_000];
/// Smallest divergence gap between w=6 and w=18 at n=10^4, bits per symbol.
const MIN_DIVERGENCE_GAP: f64 = 0.02;

const DIVERGENCE_ABS_TOL: f64 = 1e-12;

const BUDGET_NMAX: Duration = Duration::from_secs(10);
const BUDGET_LONG: Duration = Duration::from_secs(60);
const BUDGET_SWEEP: Duration = Duration::from_secs(120);
const BUDGET_EXHAUSTIVE: Duration = Duration::from_secs(30);

fn report(label: &str, pass: bool, detail: String, elapsed: Duration, budget: Duration) -> bool {
    let ok = pass && elapsed <= budget;
    println!(
        "{} {label}: {detail} [{:.2}s of {:.0}s]",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    ok
}

fn min_precision(n: u64) -> u32 {
    (64 - (n.max(2) - 1).leading_zeros()).max(1)
}

/// Every count vector with `1 <= n <= max_n` over 1 to `max_m` symbols.
fn compositions(max_n: u64, max_m: usize) -> Vec<Vec<u64>> {
    fn extend(prefix: &mut Vec<u64>, left: u64, slots: usize, out: &mut Vec<Vec<u64>>) {
        if slots == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            extend(prefix, left - c, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for n in 1..=max_n {
        for m in 1..=max_m {
            extend(&mut Vec::new(), n, m, &mut out);
        }
    }
    out
}

fn fig2_target() -> TargetDistribution {
    let symbols: Vec<String> = (1..32).step_by(2).map(|a: u32| a.to_string()).collect();
    let weights: Vec<f64> = (1..32)
        .step_by(2)
        .map(|a: u32| (-0.004 * (a * a) as f64).exp())
        .collect();
    TargetDistribution::from_weights(Alphabet::new(symbols).unwrap(), &weights).unwrap()
}

fn nmax_balanced_theorem1_w14() -> bool {
    let t = Instant::now();
    let n = nmax_search(14, &CompositionFamily::BalancedBinary, RateLossMethod::Theorem1, 1 << 14).unwrap();
    let rel = (n as f64 - NMAX_THEOREM1_PUBLISHED).abs() / NMAX_THEOREM1_PUBLISHED;
    report(
        "n_max balanced binary, theorem1, w=14",
        rel <= NMAX_REL_TOL,
        format!("n_max={n}, published {NMAX_THEOREM1_PUBLISHED}, rel.dev {rel:.4} (tol {NMAX_REL_TOL})"),
        t.elapsed(),
        BUDGET_NMAX,
    )
}

fn nmax_balanced_ramabadran_w14() -> bool {
    let t = Instant::now();
    let n = nmax_search(14, &CompositionFamily::BalancedBinary, RateLossMethod::Ramabadran, 1 << 14).unwrap();
    let rel = (n as f64 - NMAX_RAMABADRAN_PUBLISHED).abs() / NMAX_RAMABADRAN_PUBLISHED;
    report(
        "n_max balanced binary, ramabadran, w=14",
        rel <= NMAX_REL_TOL,
        format!("n_max={n}, published {NMAX_RAMABADRAN_PUBLISHED}, rel.dev {rel:.4} (tol {NMAX_REL_TOL})"),
        t.elapsed(),
        BUDGET_NMAX,
    )
}

fn long_binary_roundtrip_w14() -> bool {
    let t = Instant::now();
    let comp = Composition::from_counts(LONG_COMPOSITION.to_vec()).unwrap();
    let k = k_fpa_ccdm(&comp, 14).unwrap();
    let model = CcdmModel::new(comp);
    let r = roundtrip_check(&model, 14, LONG_K, LONG_TRIALS, LONG_SEED);
    let pass = LONG_K_ACCEPTED.contains(&k) && r.all_passed();
    report(
        "γ=[1600,1600], w=14: certified k and 10^4 round trips at k=3193",
        pass,
        format!("k_fpa={k} (accepted {LONG_K_ACCEPTED:?}), {}/{} round trips passed", r.passes, r.trials),
        t.elapsed(),
        BUDGET_LONG,
    )
}

fn sweep_w18_tracks_ipa() -> bool {
    let t = Instant::now();
    let target = fig2_target();
    let mut details = Vec::new();
    let mut pass = true;
    for n in SWEEP_LENGTHS {
        let row = sweep_point(&target, n, 18).unwrap();
        let ok = row.k_fpa + 1 >= row.k_ipa;
        pass &= ok;
        details.push(format!(
            "n={n}: k_ipa={} k_fpa={} Δk={:.4}{}",
            row.k_ipa,
            row.k_fpa,
            row.delta_k,
            if ok { "" } else { " (short)" }
        ));
    }
    report(
        "exp(-0.004a²) target, w=18: k_fpa >= k_ipa - 1",
        pass,
        details.join("; "),
        t.elapsed(),
        BUDGET_SWEEP,
    )
}

fn sweep_w6_loses_rate_and_divergence() -> bool {
    let t = Instant::now();
    let target = fig2_target();
    let n = 10_000u64;
    let coarse = sweep_point(&target, n, 6).unwrap();
    let fine = sweep_point(&target, n, 18).unwrap();
    let per_term = (n as f64 * (1.0f64 + 2f64.powi(-6)).log2()).floor() as u64;
    let k_ok = coarse.k_fpa + per_term <= coarse.k_ipa + 1;
    let gap = coarse.divergence - fine.divergence;
    report(
        "exp(-0.004a²) target, n=10^4: w=6 rate and divergence penalty",
        k_ok && gap >= MIN_DIVERGENCE_GAP,
        format!(
            "k_fpa(w=6)={} <= k_ipa - {per_term} + 1 = {}; divergence w=6 {:.6} vs w=18 {:.6}, gap {gap:.6} (min {MIN_DIVERGENCE_GAP})",
            coarse.k_fpa,
            coarse.k_ipa + 1 - per_term,
            coarse.divergence,
            fine.divergence
        ),
        t.elapsed(),
        BUDGET_SWEEP,
    )
}

fn exhaustive_bijectivity_small_compositions() -> bool {
    let t = Instant::now();
    let mut checked = 0;
    let mut failures = Vec::new();
    for c in compositions(8, 3) {
        let n: u64 = c.iter().sum();
        let comp = Composition::from_counts(c.clone()).unwrap();
        let model = CcdmModel::new(comp.clone());
        for w in min_precision(n)..=16 {
            let k = k_fpa_ccdm(&comp, w).unwrap();
            if let Some(bad) = exhaustive_bijectivity(&model, w, k).unwrap() {
                failures.push(format!("{c:?} w={w} k={k}: {}", bad.reason));
            }
            checked += 1;
        }
    }
    report(
        "exhaustive bijectivity at certified k, n<=8, m<=3, all legal w<=16",
        failures.is_empty(),
        format!("{checked} instances, failures: {failures:?}"),
        t.elapsed(),
        BUDGET_EXHAUSTIVE,
    )
}

fn exact_tiling_of_codeword_intervals() -> bool {
    let t = Instant::now();
    let mut checked = 0;
    let mut failures = Vec::new();
    for c in compositions(8, 3) {
        let n: u64 = c.iter().sum();
        let model = CcdmModel::new(Composition::from_counts(c.clone()).unwrap());
        let codewords = typeclass_sequences(&c).unwrap();
        let ipa_total: BigRational = ipa_intervals(&model).unwrap().into_iter().map(|(_, iv)| iv.width).sum();
        if !ipa_total.is_one() {
            failures.push(format!("{c:?} infinite precision sums to {ipa_total}"));
        }
        for w in min_precision(n)..=16 {
            let mut total = BigRational::zero();
            for cw in &codewords {
                total += codeword_interval(&model, w, cw).unwrap().interval_value().1;
            }
            if !total.is_one() {
                failures.push(format!("{c:?} w={w} sums to {total}"));
            }
            checked += 1;
        }
    }
    report(
        "codeword intervals tile [0,1) exactly",
        failures.is_empty(),
        format!("{checked} instances, failures: {failures:?}"),
        t.elapsed(),
        BUDGET_EXHAUSTIVE,
    )
}

fn fpa_width_within_bound() -> bool {
    let t = Instant::now();
    let mut checked = 0;
    let mut failures = Vec::new();
    for c in compositions(8, 3) {
        let n: u64 = c.iter().sum();
        let model = CcdmModel::new(Composition::from_counts(c.clone()).unwrap());
        for w in min_precision(n)..=16 {
            if let Some(cw) = width_bound_violation(&model, w).unwrap() {
                failures.push(format!("{c:?} w={w} {cw:?}"));
            }
            checked += 1;
        }
    }
    let target = TargetDistribution::new(Alphabet::numeric(3), vec![0.15, 0.25, 0.6]).unwrap();
    for n in 1..=6 {
        for theta in [2u64, 5, 16, 64] {
            let model = IidModel::new(target.clone(), n, theta).unwrap();
            for w in min_precision(theta)..=12 {
                if let Some(cw) = width_bound_violation(&model, w).unwrap() {
                    failures.push(format!("iid n={n} theta={theta} w={w} {cw:?}"));
                }
                checked += 1;
            }
        }
    }
    report(
        "finite-precision width <= P_C(c) Π(1 + (ε+2^-w)/P_i) for every codeword",
        failures.is_empty(),
        format!("{checked} instances, failures: {failures:?}"),
        t.elapsed(),
        BUDGET_EXHAUSTIVE,
    )
}

fn worst_case_sequence_maximizes_bound() -> bool {
    let t = Instant::now();
    let mut checked = 0;
    let mut failures = Vec::new();
    for c in compositions(8, 3) {
        let n: u64 = c.iter().sum();
        let comp = Composition::from_counts(c.clone()).unwrap();
        let z = worstcase_sequence(&comp);
        for w in min_precision(n)..=16 {
            if !bound_maximizers(&comp, w).unwrap().contains(&z) {
                failures.push(format!("{c:?} w={w}"));
            }
            checked += 1;
        }
    }
    report(
        "ascending-count sequence is among the exhaustive bound maximizers",
        failures.is_empty(),
        format!("{checked} instances, failures: {failures:?}"),
        t.elapsed(),
        BUDGET_EXHAUSTIVE,
    )
}

fn greedy_arrangement_is_optimal() -> bool {
    let t = Instant::now();
    let mut checked = 0;
    let mut failures = Vec::new();
    for n in 1..=8u64 {
        for n0 in 0..=n {
            for w in min_precision(n)..=16 {
                let inst = CostInstance::ccdm(vec![n0, n - n0], w).unwrap();
                if !greedy_lemma_check(&inst).unwrap() {
                    failures.push(format!("[{n0},{}] w={w}", n - n0));
                }
                checked += 1;
            }
        }
    }
    let x = |n: i64| (1..=n).rev().map(|v| BigRational::from_integer(v.into())).collect::<Vec<_>>();
    let spot = [
        CostInstance::new(vec![1, 2, 3], BigRational::new(1.into(), 8.into()), x(6)).unwrap(),
        CostInstance::new(vec![2, 2, 3], BigRational::new(1.into(), 7.into()), x(7)).unwrap(),
        CostInstance::new(vec![1, 3, 4], BigRational::new(1.into(), 8.into()), x(8)).unwrap(),
        CostInstance::new(vec![3, 1, 2, 2], BigRational::new(1.into(), 8.into()), x(8)).unwrap(),
        CostInstance::ccdm(vec![2, 3, 3], 3).unwrap(),
        CostInstance::new(
            vec![2, 3, 2],
            BigRational::new(1.into(), 20.into()),
            [19, 15, 12, 7, 5, 3, 1].iter().map(|&v| BigRational::from_integer(v.into())).collect(),
        )
        .unwrap(),
    ];
    for inst in &spot {
        if !greedy_lemma_check(inst).unwrap() {
            failures.push(format!("{:?}", inst.counts()));
        }
        checked += 1;
    }
    report(
        "greedy arrangement attains the maximum cost (unique for unequal binary counts)",
        failures.is_empty(),
        format!("{checked} instances, failures: {failures:?}"),
        t.elapsed(),
        BUDGET_EXHAUSTIVE,
    )
}

fn oracle_agrees_with_analysis() -> bool {
    let t = Instant::now();
    let mut kmax_checked = 0;
    let mut failures = Vec::new();
    let mut candidates = compositions(14, 3);
    candidates.extend(compositions(9, 4).into_iter().filter(|c| c.len() == 4));
    for c in &candidates {
        if count_typeclass(c) > BigUint::from(10_000u32) {
            continue;
        }
        let model = CcdmModel::new(Composition::from_counts(c.clone()).unwrap());
        let oracle = ipa_kmax(&model).unwrap();
        if oracle != k_ipa(c) {
            failures.push(format!("kmax {c:?}: oracle {oracle} vs {}", k_ipa(c)));
        }
        kmax_checked += 1;
    }

    let mut div_checked = 0;
    let mut worst_err = 0.0f64;
    for c in compositions(10, 3) {
        if count_typeclass(&c) > BigUint::from(512u32) {
            continue;
        }
        let m = c.len();
        let target = match m {
            1 => TargetDistribution::new(Alphabet::numeric(1), vec![1.0]).unwrap(),
            2 => TargetDistribution::new(Alphabet::numeric(2), vec![0.3, 0.7]).unwrap(),
            _ => TargetDistribution::new(Alphabet::numeric(3), vec![0.2, 0.3, 0.5]).unwrap(),
        };
        let comp = Composition::from_counts(c.clone()).unwrap();
        let model = CcdmModel::new(comp.clone());
        let w = 16;
        let k = k_fpa_ccdm(&comp, w).unwrap();
        let codebook: Vec<_> = (0..1u64 << k)
            .map(|v| encode(&model, w, k, &BitBlock::from_value(&BigUint::from(v), k).unwrap()).unwrap())
            .collect();
        let direct = divergence_by_enumeration(&codebook, &target).unwrap();
        let closed = ccdm_divergence(&comp, k, &target).unwrap().per_symbol_divergence;
        let err = (direct - closed).abs();
        worst_err = worst_err.max(err);
        if err > DIVERGENCE_ABS_TOL {
            failures.push(format!("divergence {c:?}: {direct} vs {closed}"));
        }
        div_checked += 1;
    }
    report(
        "oracle k_max and enumerated divergence match the closed forms",
        failures.is_empty(),
        format!(
            "{kmax_checked} k_max instances, {div_checked} divergence instances (max abs err {worst_err:.2e}, tol {DIVERGENCE_ABS_TOL:e}), failures: {failures:?}"
        ),
        t.elapsed(),
        BUDGET_EXHAUSTIVE,
    )
}

fn monotonicity_and_order_properties() -> bool {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    let trials = 300;
    for trial in 0..trials {
        let m = rng.random_range(2..=5usize);
        let counts: Vec<u64> = (0..m).map(|_| rng.random_range(0..60u64)).collect();
        if counts.iter().sum::<u64>() == 0 {
            continue;
        }
        let comp = Composition::from_counts(counts.clone()).unwrap();
        let w0 = min_precision(comp.n()) + rng.random_range(0..20u32);
        let d: Vec<f64> = (0..3).map(|i| rateloss_theorem1(&comp, w0 + i).unwrap()).collect();
        if !(d[0] > d[1] && d[1] > d[2]) {
            failures.push(format!("trial {trial} {counts:?} w={w0}: Δk not decreasing {d:?}"));
        }
        let k = k_fpa_ccdm(&comp, w0).unwrap();
        if k > k_ipa(&counts) {
            failures.push(format!("trial {trial} {counts:?} w={w0}: k_fpa {k} > k_ipa"));
        }
        let model = CcdmModel::new(comp);
        let mut inputs: Vec<BigUint> = (0..8)
            .map(|_| {
                let bits: Vec<u8> = (0..k).map(|_| rng.random::<bool>() as u8).collect();
                BitBlock::new(bits).unwrap().value()
            })
            .collect();
        inputs.sort();
        inputs.dedup();
        let ranks: Vec<BigUint> = inputs
            .iter()
            .map(|v| nc(encode(&model, w0, k, &BitBlock::from_value(v, k).unwrap()).unwrap().symbols(), m))
            .collect();
        if ranks.windows(2).any(|p| p[0] >= p[1]) {
            failures.push(format!("trial {trial} {counts:?} w={w0}: codeword order differs from input order"));
        }
    }
    report(
        "Δk strictly decreasing in w, k_fpa <= k_ipa, encoding preserves order",
        failures.is_empty(),
        format!("{trials} seeded instances, failures: {failures:?}"),
        t.elapsed(),
        BUDGET_EXHAUSTIVE,
    )
}

fn bound_is_tight_only_up_to_certification() -> bool {
    // Sanity link between the certified length and exact widths on one instance.
    let comp = Composition::from_counts(vec![3, 3]).unwrap();
    let k = k_fpa_ccdm(&comp, 14).unwrap();
    let model = CcdmModel::new(comp);
    let limit = BigRational::new(BigInt::one(), BigInt::one() << k as usize);
    let widest = typeclass_sequences(&[3, 3])
        .unwrap()
        .iter()
        .map(|c| codeword_interval(&model, 14, c).unwrap().interval_value().1)
        .max()
        .unwrap();
    report(
        "γ=[3,3], w=14: widest interval <= 2^-k",
        widest <= limit,
        format!("k={k}, widest={widest}"),
        Duration::ZERO,
        BUDGET_EXHAUSTIVE,
    )
}

type Check = (&'static str, fn() -> bool);

fn main() {
    let checks: &[Check] = &[
        ("nmax_balanced_theorem1_w14", nmax_balanced_theorem1_w14),
        ("nmax_balanced_ramabadran_w14", nmax_balanced_ramabadran_w14),
        ("long_binary_roundtrip_w14", long_binary_roundtrip_w14),
        ("sweep_w18_tracks_ipa", sweep_w18_tracks_ipa),
        ("sweep_w6_loses_rate_and_divergence", sweep_w6_loses_rate_and_divergence),
        ("exhaustive_bijectivity_small_compositions", exhaustive_bijectivity_small_compositions),
        ("exact_tiling_of_codeword_intervals", exact_tiling_of_codeword_intervals),
        ("fpa_width_within_bound", fpa_width_within_bound),
        ("worst_case_sequence_maximizes_bound", worst_case_sequence_maximizes_bound),
        ("greedy_arrangement_is_optimal", greedy_arrangement_is_optimal),
        ("oracle_agrees_with_analysis", oracle_agrees_with_analysis),
        ("monotonicity_and_order_properties", monotonicity_and_order_properties),
        ("bound_is_tight_only_up_to_certification", bound_is_tight_only_up_to_certification),
    ];
    let mut failed = Vec::new();
    for (name, check) in checks {
        match std::panic::catch_unwind(check) {
            Ok(true) => {}
            Ok(false) => failed.push(*name),
            Err(_) => {
                println!("FAIL {name}: panicked");
                failed.push(*name);
            }
        }
    }
    println!(
        "acceptance: {} passed, {} failed {failed:?}",
        checks.len() - failed.len(),
        failed.len()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
