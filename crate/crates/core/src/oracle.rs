//! Brute-force ground truth: exact optima, exact ratios, and a seeded
//! generator of random monotone (generally non-submodular) set functions
//! used as fixtures by the property suites.

use itertools::Itertools;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::greedy::GreedyChain;
use crate::setfn::{subset_to_mask, SetFunctionHandle, UniformMatroid};

/// Default cap on `C(n, k)` for brute-force enumeration.
pub const DEFAULT_ORACLE_CAP: u64 = 1_000_000;

/// Exact optimum over all feasible subsets.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub optimal_set: Vec<usize>,
    pub value: f64,
    pub enumerated: u64,
}

/// `C(n, k)` with saturating arithmetic, for enumeration-size estimates.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Exhaustive maximum of `f` over all subsets of size `<= k`. Ties are broken
/// toward the first subset in (size, lexicographic) enumeration order.
pub fn brute_force_optimum(
    f: &SetFunctionHandle,
    m: &UniformMatroid,
    cap: u64,
) -> Result<OracleResult> {
    let n = m.n();
    let k = m.k();
    let required = binomial(n, k);
    if required > cap as u128 {
        return Err(Error::EnumerationInfeasible { required, cap });
    }

    let mut best_set = Vec::new();
    let mut best_value = f.evaluate(&[])?;
    let mut enumerated: u64 = 1;
    for r in 1..=k {
        for subset in (0..n).combinations(r) {
            let value = f.evaluate(&subset)?;
            enumerated += 1;
            if value > best_value {
                best_value = value;
                best_set = subset;
            }
        }
    }
    Ok(OracleResult {
        optimal_set: best_set,
        value: best_value,
        enumerated,
    })
}

/// `f(S_k) / f(S*)`; in `[0, 1]` for exact oracles.
pub fn exact_ratio(chain: &GreedyChain, opt: &OracleResult) -> Result<f64> {
    if opt.value <= 0.0 {
        return Err(Error::DegenerateInstance(
            "optimal value is zero; the exact ratio is undefined".into(),
        ));
    }
    Ok(chain.value() / opt.value)
}

/// A random monotone function `f(S) = Σ_{∅≠R⊆S, |R|<=3} w_R` with nonnegative
/// subset weights, a fraction `density` of which are nonzero. Monotone and
/// normalized by construction; generally neither sub- nor supermodular.
pub fn random_monotone_function(n: usize, density: f64, seed: u64) -> Result<SetFunctionHandle> {
    if n == 0 || n > 12 {
        return Err(Error::InvalidInput(format!(
            "random monotone fixtures support 1 <= n <= 12, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidInput(format!(
            "density must lie in [0, 1], got {density}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms: Vec<(u32, f64)> = Vec::new();
    for mask in 1u32..(1 << n) {
        if mask.count_ones() <= 3 && rng.gen_bool(density) {
            terms.push((mask, rng.gen_range(0.0..1.0)));
        }
    }
    SetFunctionHandle::new(n, move |s| {
        let smask = subset_to_mask(s);
        terms
            .iter()
            .filter(|(mask, _)| mask & !smask == 0)
            .map(|(_, w)| w)
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::{greedy_maximize, ScanMode};
    use crate::objectives::{build, InstanceDescription};
    use crate::setfn::{GroundSet, SetFunctionHandle};

    fn matroid(n: usize, k: usize) -> UniformMatroid {
        UniformMatroid::new(GroundSet::new(n).unwrap(), k).unwrap()
    }

    #[test]
    fn coverage_optimum() {
        let f = build(&InstanceDescription::coverage(vec![
            vec![1, 2],
            vec![2, 3],
            vec![3, 4],
        ]))
        .unwrap();
        let opt = brute_force_optimum(&f, &matroid(3, 2), DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(opt.optimal_set, vec![0, 2]);
        assert_eq!(opt.value, 4.0);
    }

    #[test]
    fn modular_optimum() {
        let f = build(&InstanceDescription::modular(vec![5.0, 3.0, 1.0])).unwrap();
        let opt = brute_force_optimum(&f, &matroid(3, 2), DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(opt.value, 8.0);
    }

    #[test]
    fn square_optimum_symmetric() {
        let f = SetFunctionHandle::new(4, |s| (s.len() * s.len()) as f64).unwrap();
        let opt = brute_force_optimum(&f, &matroid(4, 2), DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(opt.value, 4.0);
        // Lexicographic tie break keeps the first pair.
        assert_eq!(opt.optimal_set, vec![0, 1]);
    }

    #[test]
    fn cap_enforced() {
        let f = SetFunctionHandle::new(30, |s| s.len() as f64).unwrap();
        assert!(matches!(
            brute_force_optimum(&f, &matroid(30, 15), 100),
            Err(Error::EnumerationInfeasible { .. })
        ));
    }

    #[test]
    fn exact_ratio_examples() {
        let f = build(&InstanceDescription::coverage(vec![
            vec![1, 2],
            vec![2, 3],
            vec![3, 4],
        ]))
        .unwrap();
        let m = matroid(3, 2);
        let chain = greedy_maximize(&f, &m, ScanMode::Exhaustive).unwrap();
        let opt = brute_force_optimum(&f, &m, DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(exact_ratio(&chain, &opt).unwrap(), 1.0);
    }

    #[test]
    fn adversarial_synergy_ratio_below_one() {
        // Greedy is lured by the heaviest singleton and misses the synergy pair.
        let f = build(&InstanceDescription::synergy(
            vec![1.0, 1.0, 1.01],
            vec![
                vec![0.0, 10.0, 0.0],
                vec![10.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0],
            ],
        ))
        .unwrap();
        let m = matroid(3, 2);
        let chain = greedy_maximize(&f, &m, ScanMode::Exhaustive).unwrap();
        assert_eq!(chain.picks()[0], 2);
        let opt = brute_force_optimum(&f, &m, DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(opt.value, 12.0);
        let ratio = exact_ratio(&chain, &opt).unwrap();
        assert!((ratio - 2.01 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn zero_optimum_is_degenerate() {
        let f = build(&InstanceDescription::modular(vec![0.0, 0.0])).unwrap();
        let m = matroid(2, 1);
        let chain = greedy_maximize(&f, &m, ScanMode::Exhaustive).unwrap();
        let opt = brute_force_optimum(&f, &m, DEFAULT_ORACLE_CAP).unwrap();
        assert!(matches!(
            exact_ratio(&chain, &opt),
            Err(Error::DegenerateInstance(_))
        ));
    }

    #[test]
    fn random_monotone_zero_density_is_zero() {
        let f = random_monotone_function(6, 0.0, 1).unwrap();
        assert_eq!(f.evaluate(&[0, 1, 2, 3, 4, 5]).unwrap(), 0.0);
    }

    #[test]
    fn random_monotone_seed_deterministic() {
        let f = random_monotone_function(8, 0.25, 1234).unwrap();
        let g = random_monotone_function(8, 0.25, 1234).unwrap();
        for s in [vec![0], vec![1, 3], vec![0, 2, 5], vec![4, 6, 7], vec![1, 2, 3, 4]] {
            let a = f.evaluate(&s).unwrap();
            let b = g.evaluate(&s).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn singleton_weights_reduce_to_modular() {
        // Force weights onto singletons only and check ∇ = 1 everywhere.
        let f = SetFunctionHandle::new(4, |s| s.iter().map(|&e| (e + 1) as f64).sum()).unwrap();
        for (i, j, s) in [(0, 1, vec![]), (1, 2, vec![0]), (2, 3, vec![0, 1])] {
            assert_eq!(
                crate::curvature::primal_curvature(&f, i, j, &s).unwrap(),
                crate::curvature::Curvature::Finite(1.0)
            );
        }
    }
}
