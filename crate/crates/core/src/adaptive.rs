//! Stochastic items, the adaptive greedy policy, adaptive curvature, and the
//! adaptive approximation ratio.
//!
//! Items have finite state spaces with independent priors; the objective
//! `f(E, Φ)` reads only the states of selected items, so every expectation is
//! computed exactly by enumerating the states of the items involved. The
//! greedy policy is materialized as a decision tree branching on the states
//! of each selected item, and the brute-force optimal policy is obtained by
//! backward induction over the same game tree.

use std::path::Path;

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_ratio, Curvature, CurvatureCertificate, Provenance};
use crate::error::{Error, Result};
use crate::objectives::{build, InstanceDescription};
use crate::setfn::SetFunctionHandle;

/// Default cap on the number of decision-tree leaves expanded.
pub const DEFAULT_TREE_CAP: u64 = 1_000_000;

/// An item with a finite state space and a prior over it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticItem {
    /// State labels; contribution tables are indexed by position.
    pub states: Vec<String>,
    pub probs: Vec<f64>,
}

impl StochasticItem {
    pub fn deterministic(label: impl Into<String>) -> Self {
        StochasticItem {
            states: vec![label.into()],
            probs: vec![1.0],
        }
    }

    pub fn bernoulli(p_live: f64) -> Self {
        StochasticItem {
            states: vec!["live".into(), "dead".into()],
            probs: vec![p_live, 1.0 - p_live],
        }
    }
}

/// The state-dependent objective families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AdaptiveObjective {
    /// `f(E, Φ) = (Σ_{i∈E} values[i][Φ(i)])^p`. Modular state-wise at `p = 1`.
    PowerSum {
        values: Vec<Vec<f64>>,
        #[serde(default = "default_p")]
        p: f64,
    },
    /// `f(E, Φ) = Σ v_i + Σ_{i<j∈E} b_{ij} v_i v_j` with `v_i = values[i][Φ(i)]`.
    SynergyStates {
        values: Vec<Vec<f64>>,
        synergy: Vec<Vec<f64>>,
    },
    /// State-independent wrapper around a deterministic instance.
    Deterministic { instance: InstanceDescription },
}

fn default_p() -> f64 {
    1.0
}

impl AdaptiveObjective {
    pub fn as_deterministic(&self) -> Option<&InstanceDescription> {
        match self {
            AdaptiveObjective::Deterministic { instance } => Some(instance),
            _ => None,
        }
    }
}

/// A full adaptive instance: items plus objective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveInstance {
    pub items: Vec<StochasticItem>,
    pub objective: AdaptiveObjective,
}

impl AdaptiveInstance {
    pub fn validate(&self) -> Result<()> {
        if self.items.is_empty() {
            return Err(Error::Schema {
                field: "items".into(),
                message: "at least one item is required".into(),
            });
        }
        for (i, item) in self.items.iter().enumerate() {
            if item.states.is_empty() {
                return Err(Error::Schema {
                    field: "items".into(),
                    message: format!("item {i} must have at least one state"),
                });
            }
            if item.probs.len() != item.states.len() {
                return Err(Error::Schema {
                    field: "items".into(),
                    message: format!("item {i}: probs and states lengths differ"),
                });
            }
            let mut total = 0.0;
            for &p in &item.probs {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Schema {
                        field: "items".into(),
                        message: format!("item {i}: probability {p} outside [0, 1]"),
                    });
                }
                total += p;
            }
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::Schema {
                    field: "items".into(),
                    message: format!("item {i}: probabilities sum to {total}, expected 1"),
                });
            }
        }
        let n = self.items.len();
        let check_values = |values: &[Vec<f64>]| -> Result<()> {
            if values.len() != n {
                return Err(Error::Schema {
                    field: "values".into(),
                    message: format!("expected {n} per-item rows, got {}", values.len()),
                });
            }
            for (i, row) in values.iter().enumerate() {
                if row.len() != self.items[i].states.len() {
                    return Err(Error::Schema {
                        field: "values".into(),
                        message: format!("item {i}: one value per state is required"),
                    });
                }
                for &v in row {
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::Schema {
                            field: "values".into(),
                            message: format!("item {i}: values must be finite and >= 0"),
                        });
                    }
                }
            }
            Ok(())
        };
        match &self.objective {
            AdaptiveObjective::PowerSum { values, p } => {
                check_values(values)?;
                if !p.is_finite() || *p < 1.0 {
                    return Err(Error::Schema {
                        field: "p".into(),
                        message: format!("exponent must be finite and >= 1, got {p}"),
                    });
                }
            }
            AdaptiveObjective::SynergyStates { values, synergy } => {
                check_values(values)?;
                if synergy.len() != n || synergy.iter().any(|r| r.len() != n) {
                    return Err(Error::Schema {
                        field: "synergy".into(),
                        message: format!("synergy matrix must be {n}x{n}"),
                    });
                }
                for i in 0..n {
                    if synergy[i][i] != 0.0 {
                        return Err(Error::Schema {
                            field: "synergy".into(),
                            message: format!("diagonal entry ({i},{i}) must be zero"),
                        });
                    }
                    for j in 0..n {
                        let b = synergy[i][j];
                        if !b.is_finite() || b < 0.0 || b != synergy[j][i] {
                            return Err(Error::Schema {
                                field: "synergy".into(),
                                message: format!(
                                    "entry ({i},{j}) must be finite, >= 0 and symmetric"
                                ),
                            });
                        }
                    }
                }
            }
            AdaptiveObjective::Deterministic { instance } => {
                instance.validate()?;
                if instance.n() != n {
                    return Err(Error::Schema {
                        field: "instance".into(),
                        message: format!(
                            "deterministic instance has {} elements but there are {n} items",
                            instance.n()
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// The states observed so far, in observation order.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PartialRealization {
    pairs: Vec<(usize, usize)>,
}

impl PartialRealization {
    pub fn empty() -> Self {
        PartialRealization::default()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sorted item ids in the domain.
    pub fn dom(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.pairs.iter().map(|&(i, _)| i).collect();
        d.sort_unstable();
        d
    }

    pub fn contains_item(&self, item: usize) -> bool {
        self.pairs.iter().any(|&(i, _)| i == item)
    }

    pub fn state_of(&self, item: usize) -> Option<usize> {
        self.pairs
            .iter()
            .find(|&&(i, _)| i == item)
            .map(|&(_, s)| s)
    }

    pub fn extended(&self, item: usize, state: usize) -> Result<Self> {
        if self.contains_item(item) {
            return Err(Error::ElementInSet { element: item });
        }
        let mut pairs = self.pairs.clone();
        pairs.push((item, state));
        Ok(PartialRealization { pairs })
    }

    /// True when `other` agrees with `self` on all of `other`'s domain.
    pub fn extends(&self, other: &Self) -> bool {
        other
            .pairs
            .iter()
            .all(|&(i, s)| self.state_of(i) == Some(s))
    }
}

enum CompiledObjective {
    PowerSum { values: Vec<Vec<f64>>, p: f64 },
    Synergy {
        values: Vec<Vec<f64>>,
        synergy: Vec<Vec<f64>>,
    },
    Deterministic(SetFunctionHandle),
}

/// A validated, evaluable adaptive instance.
pub struct AdaptiveModel {
    items: Vec<StochasticItem>,
    objective: CompiledObjective,
}

impl AdaptiveModel {
    pub fn build(instance: &AdaptiveInstance) -> Result<Self> {
        instance.validate()?;
        let objective = match &instance.objective {
            AdaptiveObjective::PowerSum { values, p } => CompiledObjective::PowerSum {
                values: values.clone(),
                p: *p,
            },
            AdaptiveObjective::SynergyStates { values, synergy } => CompiledObjective::Synergy {
                values: values.clone(),
                synergy: synergy.clone(),
            },
            AdaptiveObjective::Deterministic { instance } => {
                CompiledObjective::Deterministic(build(instance)?)
            }
        };
        Ok(AdaptiveModel {
            items: instance.items.clone(),
            objective,
        })
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn items(&self) -> &[StochasticItem] {
        &self.items
    }

    /// `f(E, Φ)` for the selected items with known states.
    pub fn value(&self, selected: &[(usize, usize)]) -> Result<f64> {
        match &self.objective {
            CompiledObjective::PowerSum { values, p } => {
                let total: f64 = selected.iter().map(|&(i, s)| values[i][s]).sum();
                Ok(if *p == 1.0 { total } else { total.powf(*p) })
            }
            CompiledObjective::Synergy { values, synergy } => {
                let mut total: f64 = selected.iter().map(|&(i, s)| values[i][s]).sum();
                for (a, &(i, si)) in selected.iter().enumerate() {
                    for &(j, sj) in &selected[a + 1..] {
                        total += synergy[i][j] * values[i][si] * values[j][sj];
                    }
                }
                Ok(total)
            }
            CompiledObjective::Deterministic(f) => {
                let ids: Vec<usize> = selected.iter().map(|&(i, _)| i).collect();
                f.evaluate(&ids)
            }
        }
    }
}

/// `Δ(i | ψ)`: the conditional expected marginal gain of selecting item `i`
/// after the observations `ψ`, exact under independent priors.
pub fn conditional_expected_gain(
    model: &AdaptiveModel,
    i: usize,
    psi: &PartialRealization,
) -> Result<f64> {
    if i >= model.n_items() {
        return Err(Error::ElementOutOfRange {
            element: i,
            n: model.n_items(),
        });
    }
    if psi.contains_item(i) {
        return Err(Error::ElementInSet { element: i });
    }
    let base = model.value(psi.pairs())?;
    let mut acc = 0.0;
    for (s, &p) in model.items[i].probs.iter().enumerate() {
        let mut with = psi.pairs().to_vec();
        with.push((i, s));
        acc += p * (model.value(&with)? - base);
    }
    Ok(acc)
}

/// Adaptive primal curvature
/// `∇(i, j | ψ) = E_s[Δ(i | ψ ∪ (j,s)) / Δ(i | ψ)]` over the states of `j`.
pub fn adaptive_primal_curvature(
    model: &AdaptiveModel,
    i: usize,
    j: usize,
    psi: &PartialRealization,
) -> Result<Curvature> {
    if i == j {
        return Err(Error::InvalidInput(
            "adaptive primal curvature requires i != j".into(),
        ));
    }
    let den = conditional_expected_gain(model, i, psi)?;
    if psi.contains_item(j) {
        return Err(Error::ElementInSet { element: j });
    }
    let mut acc = 0.0;
    for (s, &p) in model.items[j].probs.iter().enumerate() {
        let extended = psi.extended(j, s)?;
        let num = conditional_expected_gain(model, i, &extended)?;
        match curvature_ratio(num, den) {
            Curvature::Finite(r) => acc += p * r,
            Curvature::Unbounded => return Ok(Curvature::Unbounded),
        }
    }
    Ok(Curvature::Finite(acc))
}

/// Adaptive total primal curvature `Γ(i | ψ', ψ) = Δ(i | ψ') / Δ(i | ψ)`
/// (the closed form; depends only on the endpoints).
pub fn adaptive_tpc(
    model: &AdaptiveModel,
    i: usize,
    psi_prime: &PartialRealization,
    psi: &PartialRealization,
) -> Result<Curvature> {
    if !psi_prime.extends(psi) {
        return Err(Error::InvalidInput(
            "psi' must extend psi with consistent states".into(),
        ));
    }
    if psi_prime.contains_item(i) {
        return Err(Error::ElementInSet { element: i });
    }
    let num = conditional_expected_gain(model, i, psi_prime)?;
    let den = conditional_expected_gain(model, i, psi)?;
    Ok(curvature_ratio(num, den))
}

/// The alternative reading of the adaptive T.P.C.: the expectation over all
/// orderings of `ψ' \ ψ` of the product of per-step ∇ factors (each of which
/// contains its own inner expectation over the stepped item's states).
pub fn adaptive_tpc_sequence_expectation(
    model: &AdaptiveModel,
    i: usize,
    psi_prime: &PartialRealization,
    psi: &PartialRealization,
) -> Result<Curvature> {
    if !psi_prime.extends(psi) {
        return Err(Error::InvalidInput(
            "psi' must extend psi with consistent states".into(),
        ));
    }
    if psi_prime.contains_item(i) {
        return Err(Error::ElementInSet { element: i });
    }
    let fresh: Vec<(usize, usize)> = psi_prime
        .pairs()
        .iter()
        .copied()
        .filter(|&(item, _)| !psi.contains_item(item))
        .collect();
    if fresh.is_empty() {
        return Ok(Curvature::Finite(1.0));
    }
    let mut total = 0.0;
    let mut count = 0u64;
    for order in fresh.iter().copied().permutations(fresh.len()) {
        let mut current = psi.clone();
        let mut product = 1.0;
        for (item, state) in order {
            match adaptive_primal_curvature(model, i, item, &current)? {
                Curvature::Finite(v) => product *= v,
                Curvature::Unbounded => return Ok(Curvature::Unbounded),
            }
            current = current.extended(item, state)?;
        }
        total += product;
        count += 1;
    }
    Ok(Curvature::Finite(total / count as f64))
}

/// Side-by-side comparison of the two T.P.C. readings. The closed form is
/// authoritative for certificates; the discrepancy is reported, not resolved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TpcComparison {
    pub closed_form: Curvature,
    pub sequence_expectation: Curvature,
    /// Absolute difference when both readings are finite.
    pub discrepancy: Option<f64>,
}

pub fn adaptive_tpc_debug(
    model: &AdaptiveModel,
    i: usize,
    psi_prime: &PartialRealization,
    psi: &PartialRealization,
) -> Result<TpcComparison> {
    let closed_form = adaptive_tpc(model, i, psi_prime, psi)?;
    let sequence_expectation = adaptive_tpc_sequence_expectation(model, i, psi_prime, psi)?;
    let discrepancy = match (closed_form, sequence_expectation) {
        (Curvature::Finite(a), Curvature::Finite(b)) => Some((a - b).abs()),
        _ => None,
    };
    Ok(TpcComparison {
        closed_form,
        sequence_expectation,
        discrepancy,
    })
}

/// One node of the greedy policy tree.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyNode {
    pub psi: PartialRealization,
    /// Probability of reaching this node.
    pub prob: f64,
    pub depth: usize,
    /// Item selected here; `None` at the truncation depth.
    pub chosen: Option<usize>,
    /// `Δ(chosen | ψ)`.
    pub delta: f64,
    pub children: Vec<usize>,
}

/// The greedy policy materialized as a decision tree of depth `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyTrace {
    pub k: usize,
    pub nodes: Vec<PolicyNode>,
    /// Node indices grouped by depth `0..=k`.
    pub levels: Vec<Vec<usize>>,
    /// `f_avg(π_l)` for `l = 0..=k`.
    pub f_avg: Vec<f64>,
    /// `Δ_avg(π_l, π_{l+1}) = f_avg(π_{l+1}) - f_avg(π_l)`.
    pub delta_avg: Vec<f64>,
}

impl PolicyTrace {
    /// `f_avg(π_k)`.
    pub fn value(&self) -> f64 {
        *self.f_avg.last().unwrap()
    }

    /// The item chosen at the root (before any observation).
    pub fn root_choice(&self) -> Option<usize> {
        self.nodes[0].chosen
    }
}

fn tree_leaf_estimate(items: &[StochasticItem], k: usize) -> u128 {
    let mut counts: Vec<u128> = items.iter().map(|it| it.states.len() as u128).collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    counts.iter().take(k).product()
}

/// Runs the adaptive greedy policy: at every reachable `ψ` select
/// `argmax_i Δ(i | ψ)` (lowest id on ties) and branch over its states.
pub fn adaptive_greedy(model: &AdaptiveModel, k: usize, cap: u64) -> Result<PolicyTrace> {
    let n = model.n_items();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "budget k = {k} must satisfy 1 <= k <= {n} items"
        )));
    }
    let leaves = tree_leaf_estimate(model.items(), k);
    if leaves > cap as u128 {
        return Err(Error::EnumerationInfeasible {
            required: leaves,
            cap,
        });
    }

    let mut nodes: Vec<PolicyNode> = vec![PolicyNode {
        psi: PartialRealization::empty(),
        prob: 1.0,
        depth: 0,
        chosen: None,
        delta: 0.0,
        children: Vec::new(),
    }];
    let mut levels: Vec<Vec<usize>> = vec![vec![0]];
    let mut f_avg = Vec::with_capacity(k + 1);

    for depth in 0..=k {
        let level = levels[depth].clone();
        let mut level_value = 0.0;
        for &idx in &level {
            let node_value = model.value(nodes[idx].psi.pairs())?;
            level_value += nodes[idx].prob * node_value;
        }
        f_avg.push(level_value);
        if depth == k {
            break;
        }

        let mut next_level = Vec::new();
        for &idx in &level {
            let psi = nodes[idx].psi.clone();
            let prob = nodes[idx].prob;
            let mut best: Option<(usize, f64)> = None;
            for i in 0..n {
                if psi.contains_item(i) {
                    continue;
                }
                let delta = conditional_expected_gain(model, i, &psi)?;
                if best.map_or(true, |(_, d)| delta > d) {
                    best = Some((i, delta));
                }
            }
            let (chosen, delta) = best.expect("k <= n guarantees a candidate");
            nodes[idx].chosen = Some(chosen);
            nodes[idx].delta = delta;
            for (s, &p) in model.items[chosen].probs.iter().enumerate() {
                let child_idx = nodes.len();
                nodes.push(PolicyNode {
                    psi: psi.extended(chosen, s)?,
                    prob: prob * p,
                    depth: depth + 1,
                    chosen: None,
                    delta: 0.0,
                    children: Vec::new(),
                });
                nodes[idx].children.push(child_idx);
                next_level.push(child_idx);
            }
        }
        levels.push(next_level);
    }

    let delta_avg = f_avg.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(PolicyTrace {
        k,
        nodes,
        levels,
        f_avg,
        delta_avg,
    })
}

/// Exact Γ̂(ψ): the maximum of `Γ(i | ψ', ψ)` over supersets `ψ'` of `ψ`
/// (at most `k` additional observed items) and items `i ∉ dom(ψ')`.
pub fn adaptive_gamma_hat(
    model: &AdaptiveModel,
    psi: &PartialRealization,
    k: usize,
    cap: u64,
) -> Result<CurvatureCertificate> {
    let n = model.n_items();
    let remaining: Vec<usize> = (0..n).filter(|&i| !psi.contains_item(i)).collect();
    let extra = k.min(remaining.len());

    let mut combos: u128 = 0;
    for r in 0..=extra {
        let sets = crate::oracle::binomial(remaining.len(), r);
        // Worst case every added item carries the largest state space.
        let max_states = model
            .items()
            .iter()
            .map(|it| it.states.len() as u128)
            .max()
            .unwrap_or(1);
        combos = combos.saturating_add(sets.saturating_mul(max_states.saturating_pow(r as u32)));
    }
    if combos.saturating_mul(n as u128) > cap as u128 {
        return Err(Error::EnumerationInfeasible {
            required: combos,
            cap,
        });
    }

    let mut den: Vec<Option<f64>> = vec![None; n];
    for &i in &remaining {
        den[i] = Some(conditional_expected_gain(model, i, psi)?);
    }

    let mut best = 1.0f64;
    for r in 0..=extra {
        for added in remaining.iter().copied().combinations(r) {
            let state_spaces: Vec<Vec<usize>> = added
                .iter()
                .map(|&i| (0..model.items[i].states.len()).collect())
                .collect();
            for assignment in state_spaces.into_iter().multi_cartesian_product() {
                let mut psi_prime = psi.clone();
                for (&item, &state) in added.iter().zip(assignment.iter()) {
                    psi_prime = psi_prime.extended(item, state)?;
                }
                for &i in &remaining {
                    if psi_prime.contains_item(i) {
                        continue;
                    }
                    let num = conditional_expected_gain(model, i, &psi_prime)?;
                    match curvature_ratio(num, den[i].unwrap()) {
                        Curvature::Finite(v) => best = best.max(v),
                        Curvature::Unbounded => {
                            return Ok(CurvatureCertificate {
                                value: Curvature::Unbounded,
                                provenance: Provenance::Exact,
                                base: psi.dom(),
                                k,
                            })
                        }
                    }
                }
            }
        }
    }

    Ok(CurvatureCertificate {
        value: Curvature::Finite(best),
        provenance: Provenance::Exact,
        base: psi.dom(),
        k,
    })
}

/// Γ̂ per truncation level and the overall `Γ̂_k(π) = max_{0<=l<=k} Γ̂(π_l)`,
/// where each `Γ̂(π_l)` maxes `Γ̂(ψ)` over the realizations reachable under
/// `π_l` with positive probability.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyGammaHat {
    pub per_level: Vec<Curvature>,
    pub value: Curvature,
}

pub fn adaptive_gamma_hat_policy(
    model: &AdaptiveModel,
    trace: &PolicyTrace,
    cap: u64,
) -> Result<PolicyGammaHat> {
    let mut per_level = Vec::with_capacity(trace.k + 1);
    let mut overall = 1.0f64;
    let mut unbounded = false;
    for level in &trace.levels {
        let mut level_best = 1.0f64;
        let mut level_unbounded = false;
        for &idx in level {
            let node = &trace.nodes[idx];
            if node.prob <= 0.0 {
                continue;
            }
            let cert = adaptive_gamma_hat(model, &node.psi, trace.k, cap)?;
            match cert.value {
                Curvature::Finite(v) => level_best = level_best.max(v),
                Curvature::Unbounded => {
                    level_unbounded = true;
                    break;
                }
            }
        }
        if level_unbounded {
            per_level.push(Curvature::Unbounded);
            unbounded = true;
        } else {
            per_level.push(Curvature::Finite(level_best));
            overall = overall.max(level_best);
        }
    }
    Ok(PolicyGammaHat {
        per_level,
        value: if unbounded {
            Curvature::Unbounded
        } else {
            Curvature::Finite(overall)
        },
    })
}

/// The adaptive ratio `1 - (1 - 1/(k Γ̂_k))^k`.
pub fn adaptive_ratio(gamma_hat_k: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    if !(gamma_hat_k > 0.0) {
        return Err(Error::InvalidInput(format!(
            "gamma_hat_k must be positive, got {gamma_hat_k}"
        )));
    }
    let kg = k as f64 * gamma_hat_k;
    if kg < 1.0 {
        return Err(Error::InvalidInput(format!(
            "k * gamma_hat_k = {kg} must be >= 1"
        )));
    }
    Ok(1.0 - (1.0 - 1.0 / kg).powi(k as i32))
}

/// Exact `f_avg(π*_k)` over all adaptive policies, by backward induction.
pub fn optimal_policy_bruteforce(model: &AdaptiveModel, k: usize, cap: u64) -> Result<f64> {
    let n = model.n_items();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "budget k = {k} must satisfy 1 <= k <= {n} items"
        )));
    }
    let max_states = model
        .items()
        .iter()
        .map(|it| it.states.len() as u128)
        .max()
        .unwrap_or(1);
    let required = ((n as u128) * max_states).saturating_pow(k as u32);
    if required > cap as u128 {
        return Err(Error::EnumerationInfeasible { required, cap });
    }
    backward_induction(model, &PartialRealization::empty(), k)
}

fn backward_induction(
    model: &AdaptiveModel,
    psi: &PartialRealization,
    budget: usize,
) -> Result<f64> {
    if budget == 0 {
        return model.value(psi.pairs());
    }
    let mut best: Option<f64> = None;
    for i in 0..model.n_items() {
        if psi.contains_item(i) {
            continue;
        }
        let mut acc = 0.0;
        for (s, &p) in model.items[i].probs.iter().enumerate() {
            acc += p * backward_induction(model, &psi.extended(i, s)?, budget - 1)?;
        }
        best = Some(best.map_or(acc, |b: f64| b.max(acc)));
    }
    best.ok_or_else(|| Error::InvalidInput("no selectable item remains".into()))
}

/// Parses an adaptive instance from the `{"type": "adaptive", ...}` envelope.
pub fn parse_adaptive_instance(json: &str) -> Result<AdaptiveInstance> {
    let value: serde_json::Value = serde_json::from_str(json)?;
    match value.get("type").and_then(|t| t.as_str()) {
        Some("adaptive") => {}
        Some(other) => return Err(Error::UnsupportedFamily(other.to_string())),
        None => {
            return Err(Error::Schema {
                field: "type".into(),
                message: "missing `type` discriminator".into(),
            })
        }
    }
    let instance: AdaptiveInstance = serde_json::from_value(value).map_err(|e| Error::Schema {
        field: "instance".into(),
        message: e.to_string(),
    })?;
    instance.validate()?;
    Ok(instance)
}

pub fn load_adaptive_instance(path: impl AsRef<Path>) -> Result<AdaptiveInstance> {
    let text = std::fs::read_to_string(path)?;
    parse_adaptive_instance(&text)
}

pub fn save_adaptive_instance(path: impl AsRef<Path>, instance: &AdaptiveInstance) -> Result<()> {
    instance.validate()?;
    let mut value = serde_json::to_value(instance)?;
    value
        .as_object_mut()
        .expect("instances serialize to objects")
        .insert("type".into(), serde_json::Value::String("adaptive".into()));
    std::fs::write(path, serde_json::to_string_pretty(&value)?)?;
    Ok(())
}

/// Draws a small random adaptive instance (used by property suites).
pub fn random_adaptive_instance(
    max_items: usize,
    max_states: usize,
    rng: &mut impl Rng,
) -> AdaptiveInstance {
    let n = rng.gen_range(2..=max_items.max(2));
    let items: Vec<StochasticItem> = (0..n)
        .map(|_| {
            let s = rng.gen_range(1..=max_states.max(1));
            let raw: Vec<f64> = (0..s).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            StochasticItem {
                states: (0..s).map(|i| format!("s{i}")).collect(),
                probs: raw.iter().map(|p| p / total).collect(),
            }
        })
        .collect();
    let values: Vec<Vec<f64>> = items
        .iter()
        .map(|it| (0..it.states.len()).map(|_| rng.gen_range(0.0..2.0)).collect())
        .collect();
    let objective = if rng.gen_bool(0.5) {
        AdaptiveObjective::PowerSum {
            values,
            p: if rng.gen_bool(0.5) { 1.0 } else { 2.0 },
        }
    } else {
        let mut synergy = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen_bool(0.5) {
                    let b = rng.gen_range(0.0..2.0);
                    synergy[i][j] = b;
                    synergy[j][i] = b;
                }
            }
        }
        AdaptiveObjective::SynergyStates { values, synergy }
    };
    AdaptiveInstance { items, objective }
}
