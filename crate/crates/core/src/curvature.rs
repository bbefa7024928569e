//! Curvature quantities: primal curvature ∇, total primal curvature Γ, the
//! estimator Γ̂, elemental curvature α, and total curvature c.
//!
//! Zero-denominator convention used throughout: `0/0 ↦ 1` and
//! `positive/0 ↦ unbounded`. The convention keeps the telescoping identity
//! `f(T) - f(S) = Σ Γ(j_t | S_{t-1}, S) f_{j_t}(S)` well-defined and lets the
//! ratio formulas degrade to an uninformative value instead of dividing by
//! zero.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::setfn::{
    canonical_subset, insert_sorted, mask_to_subset, GroundSet, SetFunctionHandle, UniformMatroid,
};
#[cfg(debug_assertions)]
use crate::setfn::VALUE_TOLERANCE;

/// Default cap on the number of (set, ordering) terms enumerated by
/// [`gamma_hat_exact`]. Sized for `n <= 12`, `k <= 4` in well under a minute.
pub const DEFAULT_TERM_CAP: u64 = 10_000_000;
/// Default cap on `2^n * n^2` state scans for exact elemental curvature.
pub const DEFAULT_STATE_CAP: u64 = 10_000_000;

/// Denominators smaller than this are treated as zero.
pub const ZERO_TOLERANCE: f64 = 1e-12;

/// A curvature value, possibly unbounded (positive gain over a zero base gain).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Curvature {
    Finite(f64),
    Unbounded,
}

impl Curvature {
    pub fn finite(self) -> Option<f64> {
        match self {
            Curvature::Finite(v) => Some(v),
            Curvature::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Curvature::Unbounded)
    }
}

impl Serialize for Curvature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Curvature::Finite(v) => s.serialize_f64(*v),
            Curvature::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

/// How a Γ̂ certificate was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Full enumeration over feasible sets and orderings.
    Exact,
    /// Max over randomly sampled (set, ordering) pairs; a lower estimate.
    SampledHeuristic,
    /// Γ̂ = k, valid only under submodularity.
    SubmodularAssumption,
}

/// A Γ̂ value together with its provenance and the base solution it covers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureCertificate {
    pub value: Curvature,
    pub provenance: Provenance,
    /// The base solution `S` the estimator is anchored at.
    pub base: Vec<usize>,
    pub k: usize,
}

impl CurvatureCertificate {
    /// The submodular fallback Γ̂ = k.
    pub fn submodular_assumption(base: Vec<usize>, k: usize) -> Self {
        CurvatureCertificate {
            value: Curvature::Finite(k as f64),
            provenance: Provenance::SubmodularAssumption,
            base,
            k,
        }
    }
}

/// `num/den` under the zero-denominator convention.
pub fn curvature_ratio(num: f64, den: f64) -> Curvature {
    if den.abs() <= ZERO_TOLERANCE {
        if num.abs() <= ZERO_TOLERANCE {
            Curvature::Finite(1.0)
        } else {
            Curvature::Unbounded
        }
    } else {
        Curvature::Finite(num / den)
    }
}

/// Primal curvature `∇_f(i, j | S) = f_i(S ∪ {j}) / f_i(S)`.
pub fn primal_curvature(
    f: &SetFunctionHandle,
    i: usize,
    j: usize,
    s: &[usize],
) -> Result<Curvature> {
    if i == j {
        return Err(Error::InvalidInput(
            "primal curvature requires distinct elements i != j".into(),
        ));
    }
    let s = canonical_subset(s, f.n())?;
    for &e in &[i, j] {
        if s.binary_search(&e).is_ok() {
            return Err(Error::ElementInSet { element: e });
        }
    }
    let num = f.marginal_gain(i, &insert_sorted(&s, j))?;
    let den = f.marginal_gain(i, &s)?;
    Ok(curvature_ratio(num, den))
}

/// Total primal curvature `Γ(x | T, S) = f_x(S ∪ T) / f_x(S)` for `S ⊆ T`.
///
/// Debug builds also evaluate the explicit ∇-product over the sorted ordering
/// of `T \ S` and assert agreement within `1e-9`.
pub fn total_primal_curvature(
    f: &SetFunctionHandle,
    x: usize,
    t: &[usize],
    s: &[usize],
) -> Result<Curvature> {
    let t = canonical_subset(t, f.n())?;
    let s = canonical_subset(s, f.n())?;
    for &e in &s {
        if t.binary_search(&e).is_err() {
            return Err(Error::InvalidInput(format!(
                "S must be a subset of T; element {e} of S is missing from T"
            )));
        }
    }
    if t.binary_search(&x).is_ok() {
        return Err(Error::ElementInSet { element: x });
    }
    let num = f.marginal_gain(x, &t)?;
    let den = f.marginal_gain(x, &s)?;
    let closed = curvature_ratio(num, den);

    #[cfg(debug_assertions)]
    {
        let order: Vec<usize> = t
            .iter()
            .copied()
            .filter(|e| s.binary_search(e).is_err())
            .collect();
        let product = tpc_product(f, x, &order, &s)?;
        if let (Curvature::Finite(a), Curvature::Finite(b)) = (closed, product) {
            debug_assert!(
                (a - b).abs() <= VALUE_TOLERANCE * a.abs().max(1.0),
                "tpc closed form {a} disagrees with ∇-product {b}"
            );
        }
    }

    Ok(closed)
}

/// The explicit ∇-product over a supplied ordering of `T \ S`.
pub fn tpc_product(
    f: &SetFunctionHandle,
    x: usize,
    ordering: &[usize],
    s: &[usize],
) -> Result<Curvature> {
    let s = canonical_subset(s, f.n())?;
    let mut base = s;
    let mut product = 1.0;
    for &t_j in ordering {
        match primal_curvature(f, x, t_j, &base)? {
            Curvature::Finite(v) => product *= v,
            Curvature::Unbounded => return Ok(Curvature::Unbounded),
        }
        base = insert_sorted(&base, t_j);
    }
    Ok(Curvature::Finite(product))
}

/// Number of (set, ordering) sum terms enumerated for a given rest size.
fn enumeration_terms(rest: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    for r in 1..=rest.min(k) {
        // C(rest, r) * r! * r terms, i.e. one per position of each r-permutation.
        let mut perms: u128 = 1;
        for i in 0..r {
            perms = perms.saturating_mul((rest - i) as u128);
        }
        total = total.saturating_add(perms.saturating_mul(r as u128));
    }
    total
}

/// Exact Γ̂(S): the maximum over all feasible `T` (any `|T| <= k`, including
/// sets intersecting `S`) and all orderings of `T \ S` of
/// `Σ_t f_{j_t}(S_{t-1}) / f_{j_t}(S)`.
pub fn gamma_hat_exact(
    f: &SetFunctionHandle,
    s: &[usize],
    m: &UniformMatroid,
    cap: u64,
) -> Result<CurvatureCertificate> {
    let s = canonical_subset(s, f.n())?;
    let rest: Vec<usize> = (0..f.n())
        .filter(|e| s.binary_search(e).is_err())
        .collect();
    let k = m.k();

    let required = enumeration_terms(rest.len(), k);
    if required > cap as u128 {
        return Err(Error::EnumerationInfeasible { required, cap });
    }

    // Marginal gains at the anchor S, one per addable element.
    let mut gain_at_s = vec![0.0; f.n()];
    for &j in &rest {
        gain_at_s[j] = f.marginal_gain(j, &s)?;
    }
    let base_value = f.evaluate(&s)?;

    let mut best = 0.0f64;
    for r in 1..=rest.len().min(k) {
        for ordering in rest.iter().copied().permutations(r) {
            match ordering_sum(f, &s, base_value, &ordering, &gain_at_s)? {
                Curvature::Finite(sum) => best = best.max(sum),
                Curvature::Unbounded => {
                    return Ok(CurvatureCertificate {
                        value: Curvature::Unbounded,
                        provenance: Provenance::Exact,
                        base: s,
                        k,
                    })
                }
            }
        }
    }

    Ok(CurvatureCertificate {
        value: Curvature::Finite(best),
        provenance: Provenance::Exact,
        base: s,
        k,
    })
}

/// `Σ_t f_{j_t}(S_{t-1}) / f_{j_t}(S)` for one ordering of `T \ S`.
fn ordering_sum(
    f: &SetFunctionHandle,
    s: &[usize],
    base_value: f64,
    ordering: &[usize],
    gain_at_s: &[f64],
) -> Result<Curvature> {
    let mut prefix = s.to_vec();
    let mut prefix_value = base_value;
    let mut sum = 0.0;
    for &j in ordering {
        let with = insert_sorted(&prefix, j);
        let with_value = f.evaluate(&with)?;
        let step_gain = with_value - prefix_value;
        match curvature_ratio(step_gain, gain_at_s[j]) {
            Curvature::Finite(term) => sum += term,
            Curvature::Unbounded => return Ok(Curvature::Unbounded),
        }
        prefix = with;
        prefix_value = with_value;
    }
    Ok(Curvature::Finite(sum))
}

/// Heuristic Γ̂(S): max of the Γ-sum over randomly sampled (T, ordering)
/// pairs. A lower estimate; downstream ratios must be labeled empirical.
pub fn gamma_hat_sampled(
    f: &SetFunctionHandle,
    s: &[usize],
    m: &UniformMatroid,
    trials: u64,
    seed: u64,
) -> Result<CurvatureCertificate> {
    if trials == 0 {
        return Err(Error::InvalidInput("sampling requires trials >= 1".into()));
    }
    let s = canonical_subset(s, f.n())?;
    let rest: Vec<usize> = (0..f.n())
        .filter(|e| s.binary_search(e).is_err())
        .collect();
    let k = m.k();

    let mut gain_at_s = vec![0.0; f.n()];
    for &j in &rest {
        gain_at_s[j] = f.marginal_gain(j, &s)?;
    }
    let base_value = f.evaluate(&s)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..trials {
        if rest.is_empty() {
            break;
        }
        let r = rng.gen_range(1..=rest.len().min(k));
        let mut pool = rest.clone();
        pool.shuffle(&mut rng);
        pool.truncate(r);
        match ordering_sum(f, &s, base_value, &pool, &gain_at_s)? {
            Curvature::Finite(sum) => best = best.max(sum),
            Curvature::Unbounded => {
                return Ok(CurvatureCertificate {
                    value: Curvature::Unbounded,
                    provenance: Provenance::SampledHeuristic,
                    base: s,
                    k,
                })
            }
        }
    }

    Ok(CurvatureCertificate {
        value: Curvature::Finite(best),
        provenance: Provenance::SampledHeuristic,
        base: s,
        k,
    })
}

/// Exact elemental curvature `α = max_{S, i≠j ∉ S} f_i(S ∪ {j}) / f_i(S)`.
pub fn elemental_curvature_exact(
    f: &SetFunctionHandle,
    ground: GroundSet,
    cap: u64,
) -> Result<Curvature> {
    let n = ground.n();
    if n < 2 {
        return Ok(Curvature::Finite(1.0));
    }
    if n > 30 {
        return Err(Error::EnumerationInfeasible {
            required: u128::MAX,
            cap,
        });
    }
    let states = (1u128 << n) * (n as u128) * (n as u128);
    if states > cap as u128 {
        return Err(Error::EnumerationInfeasible {
            required: states,
            cap,
        });
    }

    // Precompute f over every subset so each ∇ is two table lookups.
    let size = 1usize << n;
    let mut values = vec![0.0f64; size];
    for mask in 0..size {
        values[mask] = f.evaluate(&mask_to_subset(mask as u32, n))?;
    }

    let mut best = f64::NEG_INFINITY;
    for mask in 0..size {
        for i in 0..n {
            if mask & (1 << i) != 0 {
                continue;
            }
            for j in 0..n {
                if j == i || mask & (1 << j) != 0 {
                    continue;
                }
                let den = values[mask | (1 << i)] - values[mask];
                let num = values[mask | (1 << i) | (1 << j)] - values[mask | (1 << j)];
                match curvature_ratio(num, den) {
                    Curvature::Finite(v) => best = best.max(v),
                    Curvature::Unbounded => return Ok(Curvature::Unbounded),
                }
            }
        }
    }
    Ok(Curvature::Finite(best))
}

/// Sampled lower estimate of the elemental curvature.
pub fn elemental_curvature_sampled(
    f: &SetFunctionHandle,
    ground: GroundSet,
    trials: u64,
    seed: u64,
) -> Result<Curvature> {
    if trials == 0 {
        return Err(Error::InvalidInput("sampling requires trials >= 1".into()));
    }
    let n = ground.n();
    if n < 2 {
        return Ok(Curvature::Finite(1.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..trials {
        let i = rng.gen_range(0..n);
        let j = loop {
            let j = rng.gen_range(0..n);
            if j != i {
                break j;
            }
        };
        let s: Vec<usize> = (0..n)
            .filter(|&e| e != i && e != j && rng.gen_bool(0.5))
            .collect();
        match primal_curvature(f, i, j, &s)? {
            Curvature::Finite(v) => best = best.max(v),
            Curvature::Unbounded => return Ok(Curvature::Unbounded),
        }
    }
    Ok(Curvature::Finite(best))
}

/// Total curvature together with the elements skipped for zero singleton gain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TotalCurvature {
    pub value: f64,
    /// Elements `j` with `f({j}) = f(∅)`, excluded from the max.
    pub excluded: Vec<usize>,
}

/// Total curvature `c = max_j { 1 - (f(X) - f(X\{j})) / (f({j}) - f(∅)) }`.
/// Meaningful only for submodular objectives; the caller is expected to flag
/// reports where `α > 1`.
pub fn total_curvature(f: &SetFunctionHandle, ground: GroundSet) -> Result<TotalCurvature> {
    let n = ground.n();
    let full = ground.full_set();
    let f_x = f.evaluate(&full)?;
    let mut best: Option<f64> = None;
    let mut excluded = Vec::new();
    for j in 0..n {
        let singleton = f.evaluate(&[j])?;
        if singleton.abs() <= ZERO_TOLERANCE {
            log::warn!("total curvature: element {j} has zero singleton gain, excluded");
            excluded.push(j);
            continue;
        }
        let without: Vec<usize> = full.iter().copied().filter(|&e| e != j).collect();
        let drop = f_x - f.evaluate(&without)?;
        let term = 1.0 - drop / singleton;
        best = Some(best.map_or(term, |b: f64| b.max(term)));
    }
    match best {
        Some(value) => Ok(TotalCurvature { value, excluded }),
        None => Err(Error::DegenerateInstance(
            "every element has zero singleton gain".into(),
        )),
    }
}
