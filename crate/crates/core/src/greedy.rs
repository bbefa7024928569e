//! Deterministic greedy maximization on a k-uniform matroid.
//!
//! The solver records the full nested solution chain `S_0 ⊂ S_1 ⊂ … ⊂ S_k`
//! together with the (k+1)-th extension element `g_{k+1}` and its value
//! `f(S⁺)`, which the primal-curvature ratio consumes. Ties between equal
//! marginal gains are broken toward the lowest element id.
//!
//! Evaluation accounting: [`greedy_steps`] performs exactly
//! `Σ_{l=0}^{k-1} (n - l) + 1` evaluator calls — one for the empty base plus
//! one per candidate per step, with the chosen candidate's value reused as
//! the next base. [`extend_chain`] adds `n - k` more.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::setfn::{insert_sorted, SetFunctionHandle, UniformMatroid};

/// Candidate scan strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanMode {
    /// Re-evaluate every remaining candidate each step.
    Exhaustive,
    /// CELF-style priority queue over stale upper bounds. Valid only under
    /// submodularity; falls back to exhaustive (with a warning) otherwise.
    Lazy,
}

/// The greedy step beyond the budget: `g_{k+1}` with its gain and `f(S⁺)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Extension {
    pub element: usize,
    pub gain: f64,
    /// `f(S⁺) = f(S_k ∪ {g_{k+1}})`.
    pub value: f64,
}

/// The nested greedy solutions plus per-step bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyChain {
    picks: Vec<usize>,
    gains: Vec<f64>,
    /// `f(S_0) .. f(S_k)`; `values[0] = 0`.
    values: Vec<f64>,
    extension: Option<Extension>,
}

impl GreedyChain {
    pub fn k(&self) -> usize {
        self.picks.len()
    }

    /// Elements in pick order `g_1 .. g_k`.
    pub fn picks(&self) -> &[usize] {
        &self.picks
    }

    /// Per-step gains `f_{g_{l+1}}(S_l)`.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// Chain values `f(S_0) .. f(S_k)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `f(S_k)`.
    pub fn value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// The sorted l-element prefix `S_l`.
    pub fn prefix(&self, l: usize) -> Vec<usize> {
        let mut s = self.picks[..l].to_vec();
        s.sort_unstable();
        s
    }

    /// The sorted greedy solution `S_k`.
    pub fn solution(&self) -> Vec<usize> {
        self.prefix(self.k())
    }

    pub fn extension(&self) -> Option<&Extension> {
        self.extension.as_ref()
    }

    /// `f(S⁺)` when the supermatroid extension is populated.
    pub fn extension_value(&self) -> Option<f64> {
        self.extension.as_ref().map(|e| e.value)
    }
}

struct HeapEntry {
    gain: f64,
    /// `f(S ∪ {element})` at the step `gain` was computed.
    value: f64,
    element: usize,
    /// Step index at which `gain` was computed.
    stamp: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.gain == other.gain && self.element == other.element
    }
}
impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // Max-heap on gain, then lowest id first among equal gains.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .partial_cmp(&other.gain)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.element.cmp(&self.element))
    }
}

/// Runs greedy to the full budget and, when `k < n`, populates the
/// supermatroid extension with one more greedy step.
pub fn greedy_maximize(
    f: &SetFunctionHandle,
    m: &UniformMatroid,
    mode: ScanMode,
) -> Result<GreedyChain> {
    let chain = greedy_steps(f, m, mode)?;
    if m.k() < m.n() {
        extend_chain(chain, f, m)
    } else {
        Ok(chain)
    }
}

/// Runs the k greedy steps without the extension.
pub fn greedy_steps(
    f: &SetFunctionHandle,
    m: &UniformMatroid,
    mode: ScanMode,
) -> Result<GreedyChain> {
    if f.n() != m.n() {
        return Err(Error::InvalidInput(format!(
            "objective has {} elements but matroid ground set has {}",
            f.n(),
            m.n()
        )));
    }
    match mode {
        ScanMode::Exhaustive => greedy_exhaustive(f, m),
        ScanMode::Lazy => {
            if f.submodular_hint() {
                greedy_lazy(f, m)
            } else {
                log::warn!(
                    "lazy greedy requested for an objective not flagged submodular; \
                     falling back to exhaustive scanning"
                );
                greedy_exhaustive(f, m)
            }
        }
    }
}

fn greedy_exhaustive(f: &SetFunctionHandle, m: &UniformMatroid) -> Result<GreedyChain> {
    let n = m.n();
    let k = m.k();
    let mut base = Vec::new();
    let mut base_value = f.evaluate(&[])?;
    let mut picks = Vec::with_capacity(k);
    let mut gains = Vec::with_capacity(k);
    let mut values = vec![base_value];
    let mut in_solution = vec![false; n];

    for _ in 0..k {
        let mut best: Option<(usize, f64, f64)> = None;
        for x in 0..n {
            if in_solution[x] {
                continue;
            }
            let value = f.evaluate(&insert_sorted(&base, x))?;
            let gain = value - base_value;
            // Strict improvement keeps the lowest id among ties.
            if best.map_or(true, |(_, g, _)| gain > g) {
                best = Some((x, gain, value));
            }
        }
        let (x, gain, value) = best.expect("k <= n guarantees a candidate");
        in_solution[x] = true;
        base = insert_sorted(&base, x);
        base_value = value;
        picks.push(x);
        gains.push(gain);
        values.push(value);
    }

    Ok(GreedyChain {
        picks,
        gains,
        values,
        extension: None,
    })
}

fn greedy_lazy(f: &SetFunctionHandle, m: &UniformMatroid) -> Result<GreedyChain> {
    let n = m.n();
    let k = m.k();
    let mut base = Vec::new();
    let mut base_value = f.evaluate(&[])?;
    let mut picks = Vec::with_capacity(k);
    let mut gains = Vec::with_capacity(k);
    let mut values = vec![base_value];

    let mut heap = BinaryHeap::with_capacity(n);
    for x in 0..n {
        let value = f.evaluate(&[x])?;
        heap.push(HeapEntry {
            gain: value - base_value,
            value,
            element: x,
            stamp: 0,
        });
    }

    for step in 0..k {
        let (x, gain, value) = loop {
            let top = heap.pop().expect("heap holds all unpicked elements");
            if top.stamp != step {
                let value = f.evaluate(&insert_sorted(&base, top.element))?;
                heap.push(HeapEntry {
                    gain: value - base_value,
                    value,
                    element: top.element,
                    stamp: step,
                });
                continue;
            }
            match heap.peek() {
                // An equal stale bound could hide a tie-rule winner with a
                // lower id, so refresh it before committing.
                Some(next) if next.gain == top.gain && next.stamp != step => {
                    let next = heap.pop().unwrap();
                    let value = f.evaluate(&insert_sorted(&base, next.element))?;
                    heap.push(HeapEntry {
                        gain: value - base_value,
                        value,
                        element: next.element,
                        stamp: step,
                    });
                    heap.push(top);
                    continue;
                }
                _ => break (top.element, top.gain, top.value),
            }
        };
        base = insert_sorted(&base, x);
        base_value = value;
        picks.push(x);
        gains.push(gain);
        values.push(value);
    }

    Ok(GreedyChain {
        picks,
        gains,
        values,
        extension: None,
    })
}

/// Populates `g_{k+1}` and `f(S⁺)` with one more exhaustive greedy step.
pub fn extend_chain(
    chain: GreedyChain,
    f: &SetFunctionHandle,
    m: &UniformMatroid,
) -> Result<GreedyChain> {
    if chain.extension.is_some() {
        return Err(Error::InvalidInput("chain already has an extension".into()));
    }
    if m.k() == m.n() {
        return Err(Error::SupermatroidUndefined);
    }
    let base = chain.solution();
    let base_value = chain.value();
    let mut best: Option<(usize, f64, f64)> = None;
    for x in 0..m.n() {
        if base.binary_search(&x).is_ok() {
            continue;
        }
        let value = f.evaluate(&insert_sorted(&base, x))?;
        let gain = value - base_value;
        if best.map_or(true, |(_, g, _)| gain > g) {
            best = Some((x, gain, value));
        }
    }
    let (element, gain, value) = best.expect("k < n leaves a candidate");
    Ok(GreedyChain {
        extension: Some(Extension {
            element,
            gain,
            value,
        }),
        ..chain
    })
}
