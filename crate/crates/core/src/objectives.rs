//! Concrete benchmark objective families and instance file ingestion.
//!
//! Four closed-form families are provided: weighted coverage (submodular),
//! modular, power-coverage `(coverage)^p` (non-submodular for `p > 1`), and
//! pairwise synergy (supermodular for any positive synergy weight). Instances
//! are described by a single JSON schema discriminated on the `type` field.

use std::collections::HashSet;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setfn::SetFunctionHandle;

/// Weighted coverage: `f(S)` is the total weight of the union of the covered
/// item lists of the elements of `S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageInstance {
    pub n: usize,
    pub sets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item_weights: Option<Vec<f64>>,
}

/// Additive objective `f(S) = Σ_{x∈S} w_x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModularInstance {
    pub n: usize,
    pub weights: Vec<f64>,
}

/// Coverage raised to a power: `f(S) = (coverage value)^p`, `p >= 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerCoverageInstance {
    pub n: usize,
    pub sets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item_weights: Option<Vec<f64>>,
    pub p: f64,
}

/// Weights plus pairwise bonuses: `f(S) = Σ w_x + Σ_{x<y∈S} b_{xy}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynergyInstance {
    pub n: usize,
    pub weights: Vec<f64>,
    pub synergy: Vec<Vec<f64>>,
}

/// The on-disk instance description, discriminated by the `type` key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InstanceDescription {
    Coverage(CoverageInstance),
    Modular(ModularInstance),
    PowerCoverage(PowerCoverageInstance),
    Synergy(SynergyInstance),
}

impl InstanceDescription {
    /// Unit-weight coverage instance over the given covered-item lists.
    pub fn coverage(sets: Vec<Vec<usize>>) -> Self {
        let n = sets.len();
        InstanceDescription::Coverage(CoverageInstance {
            n,
            sets,
            item_weights: None,
        })
    }

    pub fn modular(weights: Vec<f64>) -> Self {
        let n = weights.len();
        InstanceDescription::Modular(ModularInstance { n, weights })
    }

    pub fn power_coverage(sets: Vec<Vec<usize>>, p: f64) -> Self {
        let n = sets.len();
        InstanceDescription::PowerCoverage(PowerCoverageInstance {
            n,
            sets,
            item_weights: None,
            p,
        })
    }

    pub fn synergy(weights: Vec<f64>, synergy: Vec<Vec<f64>>) -> Self {
        let n = weights.len();
        InstanceDescription::Synergy(SynergyInstance { n, weights, synergy })
    }

    pub fn n(&self) -> usize {
        match self {
            InstanceDescription::Coverage(c) => c.n,
            InstanceDescription::Modular(m) => m.n,
            InstanceDescription::PowerCoverage(pc) => pc.n,
            InstanceDescription::Synergy(s) => s.n,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            InstanceDescription::Coverage(_) => "coverage",
            InstanceDescription::Modular(_) => "modular",
            InstanceDescription::PowerCoverage(_) => "power_coverage",
            InstanceDescription::Synergy(_) => "synergy",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InstanceDescription::Coverage(c) => {
                validate_coverage(c.n, &c.sets, c.item_weights.as_deref())
            }
            InstanceDescription::Modular(m) => validate_weights(m.n, &m.weights),
            InstanceDescription::PowerCoverage(pc) => {
                validate_coverage(pc.n, &pc.sets, pc.item_weights.as_deref())?;
                if !pc.p.is_finite() || pc.p < 1.0 {
                    return Err(Error::Schema {
                        field: "p".into(),
                        message: format!("exponent must be finite and >= 1, got {}", pc.p),
                    });
                }
                Ok(())
            }
            InstanceDescription::Synergy(s) => {
                validate_weights(s.n, &s.weights)?;
                validate_synergy(s.n, &s.synergy)
            }
        }
    }
}

fn validate_weights(n: usize, weights: &[f64]) -> Result<()> {
    if n == 0 {
        return Err(Error::Schema {
            field: "n".into(),
            message: "ground set must be nonempty".into(),
        });
    }
    if weights.len() != n {
        return Err(Error::Schema {
            field: "weights".into(),
            message: format!("expected {n} weights, got {}", weights.len()),
        });
    }
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Schema {
                field: "weights".into(),
                message: format!("weight {i} must be finite and >= 0, got {w}"),
            });
        }
    }
    Ok(())
}

fn validate_coverage(n: usize, sets: &[Vec<usize>], item_weights: Option<&[f64]>) -> Result<()> {
    if n == 0 {
        return Err(Error::Schema {
            field: "n".into(),
            message: "ground set must be nonempty".into(),
        });
    }
    if sets.len() != n {
        return Err(Error::Schema {
            field: "sets".into(),
            message: format!("expected {n} covered-item lists, got {}", sets.len()),
        });
    }
    let m = universe_size(sets, item_weights);
    for (e, items) in sets.iter().enumerate() {
        for &it in items {
            if it >= m {
                return Err(Error::Schema {
                    field: "sets".into(),
                    message: format!("element {e} covers item {it} outside universe 0..{m}"),
                });
            }
        }
    }
    if let Some(w) = item_weights {
        for (i, &wi) in w.iter().enumerate() {
            if !wi.is_finite() || wi < 0.0 {
                return Err(Error::Schema {
                    field: "item_weights".into(),
                    message: format!("item weight {i} must be finite and >= 0, got {wi}"),
                });
            }
        }
    }
    Ok(())
}

fn validate_synergy(n: usize, synergy: &[Vec<f64>]) -> Result<()> {
    if synergy.len() != n || synergy.iter().any(|row| row.len() != n) {
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
            if !b.is_finite() || b < 0.0 {
                return Err(Error::Schema {
                    field: "synergy".into(),
                    message: format!("entry ({i},{j}) must be finite and >= 0, got {b}"),
                });
            }
            if (b - synergy[j][i]).abs() > 0.0 {
                return Err(Error::Schema {
                    field: "synergy".into(),
                    message: format!("matrix must be symmetric; ({i},{j}) != ({j},{i})"),
                });
            }
        }
    }
    Ok(())
}

fn universe_size(sets: &[Vec<usize>], item_weights: Option<&[f64]>) -> usize {
    match item_weights {
        Some(w) => w.len(),
        None => sets
            .iter()
            .flat_map(|s| s.iter().copied())
            .max()
            .map_or(0, |m| m + 1),
    }
}

fn coverage_value(subset: &[usize], sets: &[Vec<usize>], item_weights: Option<&[f64]>) -> f64 {
    let mut seen: HashSet<usize> = HashSet::new();
    let mut total = 0.0;
    for &e in subset {
        for &it in &sets[e] {
            if seen.insert(it) {
                total += item_weights.map_or(1.0, |w| w[it]);
            }
        }
    }
    total
}

/// Builds an evaluation handle for a validated instance description.
pub fn build(desc: &InstanceDescription) -> Result<SetFunctionHandle> {
    desc.validate()?;
    match desc.clone() {
        InstanceDescription::Coverage(c) => {
            let weights = c.item_weights;
            let sets = c.sets;
            SetFunctionHandle::new(c.n, move |s| coverage_value(s, &sets, weights.as_deref()))
                .map(|h| h.with_submodular_hint(true))
        }
        InstanceDescription::Modular(m) => {
            let weights = m.weights;
            SetFunctionHandle::new(m.n, move |s| s.iter().map(|&e| weights[e]).sum())
                .map(|h| h.with_submodular_hint(true))
        }
        InstanceDescription::PowerCoverage(pc) => {
            let weights = pc.item_weights;
            let sets = pc.sets;
            let p = pc.p;
            let submodular = p == 1.0;
            SetFunctionHandle::new(pc.n, move |s| {
                coverage_value(s, &sets, weights.as_deref()).powf(p)
            })
            .map(|h| h.with_submodular_hint(submodular))
        }
        InstanceDescription::Synergy(sy) => {
            let weights = sy.weights;
            let synergy = sy.synergy;
            let submodular = synergy.iter().all(|row| row.iter().all(|&b| b == 0.0));
            SetFunctionHandle::new(sy.n, move |s| {
                let mut total: f64 = s.iter().map(|&e| weights[e]).sum();
                for (idx, &x) in s.iter().enumerate() {
                    for &y in &s[idx + 1..] {
                        total += synergy[x][y];
                    }
                }
                total
            })
            .map(|h| h.with_submodular_hint(submodular))
        }
    }
}

/// Parses an instance description from a JSON string.
pub fn parse_instance(json: &str) -> Result<InstanceDescription> {
    let desc: InstanceDescription = serde_json::from_str(json).map_err(|e| {
        let msg = e.to_string();
        if msg.contains("unknown variant") {
            Error::UnsupportedFamily(msg)
        } else {
            Error::Schema {
                field: "instance".into(),
                message: msg,
            }
        }
    })?;
    desc.validate()?;
    Ok(desc)
}

/// Loads and validates an instance description from a JSON file.
pub fn load_instance(path: impl AsRef<Path>) -> Result<InstanceDescription> {
    let text = std::fs::read_to_string(path)?;
    parse_instance(&text)
}

/// Writes an instance description as pretty JSON; `load(save(d)) = d`.
pub fn save_instance(path: impl AsRef<Path>, desc: &InstanceDescription) -> Result<()> {
    desc.validate()?;
    let text = serde_json::to_string_pretty(desc)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Deterministic benchmark family selector for generated test instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Coverage,
    Modular,
    PowerCoverage,
    Synergy,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Coverage,
        Family::Modular,
        Family::PowerCoverage,
        Family::Synergy,
    ];
}

/// Draws a random instance of the given family on `n` elements.
pub fn random_instance(family: Family, n: usize, rng: &mut impl Rng) -> InstanceDescription {
    match family {
        Family::Coverage => InstanceDescription::coverage(random_sets(n, rng)),
        Family::Modular => {
            InstanceDescription::modular((0..n).map(|_| rng.gen_range(0.1..10.0)).collect())
        }
        Family::PowerCoverage => InstanceDescription::power_coverage(random_sets(n, rng), 2.0),
        Family::Synergy => {
            let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
            let mut synergy = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen_bool(0.4) {
                        let b = rng.gen_range(0.0..2.0);
                        synergy[i][j] = b;
                        synergy[j][i] = b;
                    }
                }
            }
            InstanceDescription::synergy(weights, synergy)
        }
    }
}

fn random_sets(n: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let m = n + rng.gen_range(1..=n);
    (0..n)
        .map(|_| {
            let mut items: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.35)).collect();
            if items.is_empty() {
                items.push(rng.gen_range(0..m));
            }
            items
        })
        .collect()
}
