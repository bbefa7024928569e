//! Ground sets, k-uniform matroids and the black-box set-function contract.
//!
//! Every other module works against [`SetFunctionHandle`]: a deterministic,
//! normalized (`f(∅) = 0`) evaluator over subsets of `0..n`, with a counted
//! number of evaluations. Subsets cross the API boundary as id slices; they
//! are canonicalized (sorted, deduplicated) before hitting the evaluator so
//! that equal subsets always produce bit-identical values.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Absolute tolerance used for equality assertions on function values.
pub const VALUE_TOLERANCE: f64 = 1e-9;
/// Tolerance below which a marginal gain counts as a monotonicity violation.
pub const MONOTONE_TOLERANCE: f64 = 1e-12;

/// The universe `X = {0, .., n-1}` of element ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("ground set must be nonempty".into()));
        }
        Ok(GroundSet { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, element: usize) -> bool {
        element < self.n
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    /// All elements, as a sorted id list.
    pub fn full_set(&self) -> Vec<usize> {
        (0..self.n).collect()
    }
}

/// Feasibility structure: `S` is feasible iff `|S| <= k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniformMatroid {
    ground: GroundSet,
    k: usize,
}

impl UniformMatroid {
    pub fn new(ground: GroundSet, k: usize) -> Result<Self> {
        if k == 0 || k > ground.n() {
            return Err(Error::InvalidInput(format!(
                "budget k = {k} must satisfy 1 <= k <= n = {}",
                ground.n()
            )));
        }
        Ok(UniformMatroid { ground, k })
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.ground.n()
    }

    pub fn is_feasible(&self, subset: &[usize]) -> bool {
        let canon = canonical_subset(subset, self.n());
        matches!(canon, Ok(s) if s.len() <= self.k)
    }
}

/// Validates ids against the ground set and returns a sorted, deduplicated copy.
pub fn canonical_subset(subset: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut s: Vec<usize> = subset.to_vec();
    for &e in &s {
        if e >= n {
            return Err(Error::ElementOutOfRange { element: e, n });
        }
    }
    s.sort_unstable();
    s.dedup();
    Ok(s)
}

type Evaluator = dyn Fn(&[usize]) -> f64 + Send + Sync;

/// A black-box monotone non-decreasing objective with counted evaluations.
///
/// Normalization `f(∅) = 0` is enforced at registration by subtracting the
/// raw empty-set value from every evaluation. The evaluation counter is the
/// only mutable state; the handle is freely shareable across threads.
pub struct SetFunctionHandle {
    n: usize,
    evaluator: Arc<Evaluator>,
    empty_offset: f64,
    submodular_hint: bool,
    eval_count: AtomicU64,
}

impl SetFunctionHandle {
    pub fn new<F>(n: usize, evaluator: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> f64 + Send + Sync + 'static,
    {
        let ground = GroundSet::new(n)?;
        let empty_offset = evaluator(&[]);
        if !empty_offset.is_finite() {
            return Err(Error::ObjectiveFault { subset: vec![] });
        }
        Ok(SetFunctionHandle {
            n: ground.n(),
            evaluator: Arc::new(evaluator),
            empty_offset,
            submodular_hint: false,
            eval_count: AtomicU64::new(0),
        })
    }

    /// Marks the objective as known-submodular, enabling lazy greedy scans.
    pub fn with_submodular_hint(mut self, hint: bool) -> Self {
        self.submodular_hint = hint;
        self
    }

    pub fn submodular_hint(&self) -> bool {
        self.submodular_hint
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ground(&self) -> GroundSet {
        GroundSet { n: self.n }
    }

    /// Number of evaluator invocations so far.
    pub fn eval_count(&self) -> u64 {
        self.eval_count.load(Ordering::Relaxed)
    }

    /// Evaluates `f(S)`, incrementing the evaluation counter by one.
    pub fn evaluate(&self, subset: &[usize]) -> Result<f64> {
        let canon = canonical_subset(subset, self.n)?;
        self.eval_count.fetch_add(1, Ordering::Relaxed);
        let value = (self.evaluator)(&canon) - self.empty_offset;
        if !value.is_finite() {
            return Err(Error::ObjectiveFault { subset: canon });
        }
        Ok(value)
    }

    /// Marginal gain `f_x(S) = f(S ∪ {x}) - f(S)`. Costs two evaluations.
    pub fn marginal_gain(&self, x: usize, subset: &[usize]) -> Result<f64> {
        let canon = canonical_subset(subset, self.n)?;
        if canon.binary_search(&x).is_ok() {
            return Err(Error::ElementInSet { element: x });
        }
        if x >= self.n {
            return Err(Error::ElementOutOfRange { element: x, n: self.n });
        }
        let with = insert_sorted(&canon, x);
        Ok(self.evaluate(&with)? - self.evaluate(&canon)?)
    }
}

/// Inserts `x` into a sorted id list, keeping it sorted. `x` must be absent.
pub fn insert_sorted(sorted: &[usize], x: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(sorted.len() + 1);
    let pos = sorted.partition_point(|&e| e < x);
    out.extend_from_slice(&sorted[..pos]);
    out.push(x);
    out.extend_from_slice(&sorted[pos..]);
    out
}

/// A single monotonicity/normalization finding from [`audit_function`].
#[derive(Clone, Debug, PartialEq)]
pub enum AuditViolation {
    /// `f(S ∪ {x}) < f(S)` by more than the tolerance.
    Monotonicity {
        base: Vec<usize>,
        element: usize,
        before: f64,
        after: f64,
    },
    /// `f(∅)` differs from zero after normalization.
    EmptyNotZero { value: f64 },
}

#[derive(Clone, Debug, Default)]
pub struct AuditReport {
    pub violations: Vec<AuditViolation>,
    pub exhaustive: bool,
    pub checks: u64,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples chains `S ⊂ S ∪ {x}` and reports monotonicity violations.
/// Switches to exhaustive checking of every pair when `2^n <= 4096`.
pub fn audit_function(
    f: &SetFunctionHandle,
    ground: GroundSet,
    trials: u64,
    seed: u64,
) -> Result<AuditReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("audit requires trials >= 1".into()));
    }
    let n = ground.n();
    let mut report = AuditReport::default();

    let empty = f.evaluate(&[])?;
    report.checks += 1;
    if empty.abs() > MONOTONE_TOLERANCE {
        report.violations.push(AuditViolation::EmptyNotZero { value: empty });
    }

    let check_pair = |base: &[usize], x: usize, report: &mut AuditReport| -> Result<()> {
        let before = f.evaluate(base)?;
        let after = f.evaluate(&insert_sorted(base, x))?;
        report.checks += 1;
        if after - before < -MONOTONE_TOLERANCE {
            report.violations.push(AuditViolation::Monotonicity {
                base: base.to_vec(),
                element: x,
                before,
                after,
            });
        }
        Ok(())
    };

    if n <= 12 && (1u64 << n) <= 4096 {
        report.exhaustive = true;
        for mask in 0u32..(1u32 << n) {
            let base = mask_to_subset(mask, n);
            for x in 0..n {
                if mask & (1 << x) == 0 {
                    check_pair(&base, x, &mut report)?;
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trials {
            let mut base: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            if base.len() == n {
                base.pop();
            }
            let outside: Vec<usize> = (0..n).filter(|e| !base.contains(e)).collect();
            let x = outside[rng.gen_range(0..outside.len())];
            check_pair(&base, x, &mut report)?;
        }
    }
    Ok(report)
}

/// Expands a bitmask into a sorted id list.
pub fn mask_to_subset(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&e| mask & (1 << e) != 0).collect()
}

/// Packs a (valid) id list into a bitmask. Only usable for `n <= 32`.
pub fn subset_to_mask(subset: &[usize]) -> u32 {
    subset.iter().fold(0u32, |m, &e| m | (1 << e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{build, InstanceDescription};

    fn coverage_abc() -> SetFunctionHandle {
        // A = {1,2}, B = {2,3}, C = {3,4}
        build(&InstanceDescription::coverage(vec![
            vec![1, 2],
            vec![2, 3],
            vec![3, 4],
        ]))
        .unwrap()
    }

    fn square_cardinality(n: usize) -> SetFunctionHandle {
        SetFunctionHandle::new(n, |s| (s.len() * s.len()) as f64).unwrap()
    }

    #[test]
    fn evaluate_coverage_union() {
        let f = coverage_abc();
        assert_eq!(f.evaluate(&[0, 2]).unwrap(), 4.0);
    }

    #[test]
    fn evaluate_empty_is_zero() {
        let f = coverage_abc();
        assert_eq!(f.evaluate(&[]).unwrap(), 0.0);
        let g = square_cardinality(5);
        assert_eq!(g.evaluate(&[]).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_square_cardinality() {
        let f = square_cardinality(5);
        assert_eq!(f.evaluate(&[0, 2, 4]).unwrap(), 9.0);
    }

    #[test]
    fn evaluate_rejects_out_of_range() {
        let f = coverage_abc();
        assert!(matches!(
            f.evaluate(&[7]),
            Err(Error::ElementOutOfRange { element: 7, .. })
        ));
    }

    #[test]
    fn evaluate_counts() {
        let f = coverage_abc();
        assert_eq!(f.eval_count(), 0);
        f.evaluate(&[0]).unwrap();
        f.evaluate(&[0, 1]).unwrap();
        assert_eq!(f.eval_count(), 2);
    }

    #[test]
    fn normalization_subtracts_raw_empty() {
        let f = SetFunctionHandle::new(3, |s| 10.0 + s.len() as f64).unwrap();
        assert_eq!(f.evaluate(&[]).unwrap(), 0.0);
        assert_eq!(f.evaluate(&[1]).unwrap(), 1.0);
    }

    #[test]
    fn marginal_gain_coverage() {
        let f = coverage_abc();
        // x = B after S = {A}: only item 3 is new.
        assert_eq!(f.marginal_gain(1, &[0]).unwrap(), 1.0);
    }

    #[test]
    fn marginal_gain_modular() {
        let f = build(&InstanceDescription::modular(vec![5.0, 2.0, 7.0])).unwrap();
        assert_eq!(f.marginal_gain(0, &[]).unwrap(), 5.0);
        assert_eq!(f.marginal_gain(0, &[1, 2]).unwrap(), 5.0);
    }

    #[test]
    fn marginal_gain_square() {
        let f = square_cardinality(5);
        assert_eq!(f.marginal_gain(4, &[0, 1]).unwrap(), 5.0);
    }

    #[test]
    fn marginal_gain_rejects_member() {
        let f = coverage_abc();
        assert!(matches!(
            f.marginal_gain(0, &[0, 1]),
            Err(Error::ElementInSet { element: 0 })
        ));
    }

    #[test]
    fn audit_clean_on_monotone_families() {
        let f = coverage_abc();
        let report = audit_function(&f, f.ground(), 10, 7).unwrap();
        assert!(report.is_clean());
        assert!(report.exhaustive);

        let g = square_cardinality(4);
        let report = audit_function(&g, g.ground(), 10, 7).unwrap();
        assert!(report.is_clean());
    }

    #[test]
    fn audit_flags_adversarial_handle() {
        let f = SetFunctionHandle::new(2, |s| match s {
            [0] => 1.0,
            [0, 1] => 0.5,
            _ => 0.0,
        })
        .unwrap();
        let report = audit_function(&f, f.ground(), 10, 7).unwrap();
        assert_eq!(
            report
                .violations
                .iter()
                .filter(|v| matches!(v, AuditViolation::Monotonicity { .. }))
                .count(),
            1
        );
    }

    #[test]
    fn referential_transparency() {
        let f = coverage_abc();
        let a = f.evaluate(&[2, 0]).unwrap();
        let b = f.evaluate(&[0, 2]).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
