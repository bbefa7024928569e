//! Closed-form approximation-ratio calculators and the combined report.
//!
//! Four bound families are computed: the instance-specific primal-curvature
//! ratio `[1 + (f(S⁺)/f(S) - 1) Γ̂(S)]^{-1}`, the fixed-Γ̂ ratio
//! `1 - (1 - Γ̂^{-1})^k`, the elemental-curvature ratio of Wang et al., and
//! the total-curvature baselines `1/(1+c)` and `(1/c)(1 - e^{-c})`. All
//! ratios are clamped to `[0, 1]` with the pre-clamp value retained.

use serde::Serialize;

use crate::curvature::{Curvature, CurvatureCertificate, Provenance, TotalCurvature};
use crate::error::{Error, Result};
use crate::greedy::GreedyChain;
use crate::oracle::OracleResult;
use crate::setfn::UniformMatroid;

/// A computed ratio with its pre-clamp value and provenance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioValue {
    pub value: f64,
    pub pre_clamp: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    /// Set when the bound degenerates to 0 (e.g. unbounded Γ̂).
    pub uninformative: bool,
}

impl RatioValue {
    fn clamped(raw: f64, provenance: Option<Provenance>) -> Self {
        RatioValue {
            value: raw.clamp(0.0, 1.0),
            pre_clamp: raw,
            provenance,
            uninformative: false,
        }
    }

    fn uninformative(provenance: Option<Provenance>) -> Self {
        RatioValue {
            value: 0.0,
            pre_clamp: 0.0,
            provenance,
            uninformative: true,
        }
    }
}

/// A ratio slot in the report: either a value or a reason it is missing.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum RatioField {
    Present(RatioValue),
    Absent { absent: String },
}

impl RatioField {
    pub fn absent(reason: impl Into<String>) -> Self {
        RatioField::Absent {
            absent: reason.into(),
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            RatioField::Present(v) => Some(v.value),
            RatioField::Absent { .. } => None,
        }
    }
}

/// Which reading of the Wang `A_k` summation to use.
///
/// The corrected convention sums `Σ_{i=0}^{k-1} α^i` so that `α = 1` yields
/// `A_k = k` and the classical finite-k ratio `1 - (1 - 1/k)^k`. The literal
/// convention sums `Σ_{i=1}^{k-1} α^i`, which produces ratio 1 at `k = 2`
/// for submodular objectives, contradicting the known tight 3/4 case; it is
/// kept available for comparison but is not the default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WangConvention {
    #[default]
    Corrected,
    Literal,
}

/// The instance-specific primal-curvature ratio for a chain with its Γ̂
/// certificate: `[1 + (f(S⁺)/f(S_k) - 1) Γ̂]^{-1}`.
pub fn primal_ratio(chain: &GreedyChain, cert: &CurvatureCertificate) -> Result<RatioValue> {
    let extension = chain
        .extension()
        .ok_or_else(|| Error::InvalidInput("chain has no supermatroid extension".into()))?;
    if cert.base != chain.solution() {
        return Err(Error::InvalidInput(
            "certificate base does not match the greedy solution".into(),
        ));
    }
    let f_s = chain.value();
    if f_s <= 0.0 {
        return Err(Error::DegenerateInstance(
            "greedy value f(S) is zero; the primal ratio is undefined".into(),
        ));
    }
    let gamma = match cert.value {
        Curvature::Finite(g) => g,
        Curvature::Unbounded => return Ok(RatioValue::uninformative(Some(cert.provenance))),
    };
    let raw = 1.0 / (1.0 + (extension.value / f_s - 1.0) * gamma);
    Ok(RatioValue::clamped(raw, Some(cert.provenance)))
}

/// The uniform-Γ̂ ratio `1 - (1 - Γ̂^{-1})^k` for an upper bound Γ̂ valid at
/// every chain prefix.
pub fn fixed_gamma_ratio(gamma_hat: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    if !(gamma_hat >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "gamma_hat must be >= 1 (a valid estimator covers single fresh elements), got {gamma_hat}"
        )));
    }
    Ok(one_minus_decay(gamma_hat, k))
}

/// `1 - (1 - 1/g)^k`, shared by every ratio of that shape so that equal
/// inputs produce bit-identical outputs across call sites.
fn one_minus_decay(g: f64, k: usize) -> f64 {
    1.0 - (1.0 - 1.0 / g).powi(k as i32)
}

/// The classical submodular ratio `1 - (1 - 1/k)^k`.
pub fn classic_ratio(k: usize) -> f64 {
    one_minus_decay(k as f64, k.max(1))
}

/// Wang's elemental-curvature ratio `1 - (1 - A_k^{-1})^k` under the default
/// (corrected) summation convention.
pub fn wang_ratio(alpha: f64, k: usize) -> Result<f64> {
    wang_ratio_with(alpha, k, WangConvention::Corrected)
}

pub fn wang_ratio_with(alpha: f64, k: usize, convention: WangConvention) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must be >= 0, got {alpha}"
        )));
    }
    let geometric = if alpha == 1.0 {
        k as f64
    } else {
        (alpha.powi(k as i32) - 1.0) / (alpha - 1.0)
    };
    let a_k = match convention {
        WangConvention::Corrected => geometric,
        WangConvention::Literal => geometric - 1.0,
    };
    if a_k <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "A_k = {a_k} is not positive under the {convention:?} convention"
        )));
    }
    Ok((1.0 - (1.0 - 1.0 / a_k).powi(k as i32)).clamp(0.0, 1.0))
}

/// Total-curvature baselines `(1/(1+c), (1/c)(1 - e^{-c}))`.
pub fn conforti_ratios(c: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidInput(format!(
            "total curvature of a monotone submodular function lies in [0, 1], got {c}"
        )));
    }
    let general = 1.0 / (1.0 + c);
    let uniform = if c == 0.0 { 1.0 } else { -(-c).exp_m1() / c };
    Ok((general, uniform))
}

/// All computed ratios for one instance. JSON keys mirror the field names.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    pub k: usize,
    pub greedy_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extension_value: Option<f64>,
    pub primal_ratio: RatioField,
    pub fixed_gamma_ratio: RatioField,
    pub wang_ratio: RatioField,
    pub conforti_ratio: RatioField,
    pub conforti_uniform_ratio: RatioField,
    pub classic_ratio: f64,
    pub exact_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Curvature>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_curvature: Option<f64>,
    pub warnings: Vec<String>,
}

/// Inputs assembled by the caller for [`build_report`]. Optional pieces are
/// reported absent with a reason rather than failing the whole report.
pub struct ReportInputs<'a> {
    pub chain: &'a GreedyChain,
    pub matroid: &'a UniformMatroid,
    /// Γ̂ certificate anchored at `S_k`, for the instance-specific ratio.
    pub certificate: Option<&'a CurvatureCertificate>,
    /// Max Γ̂ over all chain prefixes, for the uniform-Γ̂ ratio.
    pub gamma_max: Option<&'a CurvatureCertificate>,
    pub alpha: Option<Curvature>,
    pub total_curvature: Option<&'a TotalCurvature>,
    pub oracle: Option<&'a OracleResult>,
    pub wang_convention: WangConvention,
}

pub fn build_report(inputs: &ReportInputs<'_>) -> Result<RatioReport> {
    let chain = inputs.chain;
    let k = inputs.matroid.k();
    let mut warnings = Vec::new();

    let primal = match (chain.extension(), inputs.certificate) {
        (None, _) => RatioField::absent("supermatroid undefined"),
        (Some(_), None) => RatioField::absent("no gamma-hat certificate"),
        (Some(_), Some(cert)) => match primal_ratio(chain, cert) {
            Ok(v) => RatioField::Present(v),
            Err(e) => RatioField::absent(e.to_string()),
        },
    };

    let fixed = match inputs.gamma_max {
        None => RatioField::absent("no gamma-hat certificate"),
        Some(cert) => match cert.value {
            Curvature::Unbounded => {
                let mut v = RatioValue::uninformative(Some(cert.provenance));
                v.provenance = Some(cert.provenance);
                RatioField::Present(v)
            }
            Curvature::Finite(g) => match fixed_gamma_ratio(g, k) {
                Ok(r) => RatioField::Present(RatioValue::clamped(r, Some(cert.provenance))),
                Err(e) => RatioField::absent(e.to_string()),
            },
        },
    };

    let wang = match inputs.alpha {
        None => RatioField::absent("elemental curvature unavailable"),
        Some(Curvature::Unbounded) => RatioField::Present(RatioValue::uninformative(None)),
        Some(Curvature::Finite(a)) => match wang_ratio_with(a, k, inputs.wang_convention) {
            Ok(r) => RatioField::Present(RatioValue::clamped(r, None)),
            Err(e) => RatioField::absent(e.to_string()),
        },
    };

    let alpha_above_one = matches!(inputs.alpha, Some(Curvature::Finite(a)) if a > 1.0 + 1e-12)
        || matches!(inputs.alpha, Some(Curvature::Unbounded));
    let (conforti, conforti_uniform) = match inputs.total_curvature {
        None => (
            RatioField::absent("total curvature unavailable"),
            RatioField::absent("total curvature unavailable"),
        ),
        Some(tc) => {
            if alpha_above_one {
                warnings.push(
                    "total-curvature baselines assume submodularity but alpha > 1".to_string(),
                );
            }
            match conforti_ratios(tc.value) {
                Ok((general, uniform)) => (
                    RatioField::Present(RatioValue::clamped(general, None)),
                    RatioField::Present(RatioValue::clamped(uniform, None)),
                ),
                Err(e) => (
                    RatioField::absent(e.to_string()),
                    RatioField::absent(e.to_string()),
                ),
            }
        }
    };

    let exact = match inputs.oracle {
        None => None,
        Some(opt) => match crate::oracle::exact_ratio(chain, opt) {
            Ok(r) => Some(r),
            Err(e) => {
                warnings.push(format!("exact ratio unavailable: {e}"));
                None
            }
        },
    };

    Ok(RatioReport {
        k,
        greedy_value: chain.value(),
        extension_value: chain.extension_value(),
        primal_ratio: primal,
        fixed_gamma_ratio: fixed,
        wang_ratio: wang,
        conforti_ratio: conforti,
        conforti_uniform_ratio: conforti_uniform,
        classic_ratio: classic_ratio(k),
        exact_ratio: exact,
        alpha: inputs.alpha,
        total_curvature: inputs.total_curvature.map(|tc| tc.value),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{gamma_hat_exact, DEFAULT_TERM_CAP};
    use crate::greedy::{greedy_maximize, ScanMode};
    use crate::objectives::{build, InstanceDescription};
    use crate::oracle::{brute_force_optimum, DEFAULT_ORACLE_CAP};
    use crate::setfn::{GroundSet, SetFunctionHandle};

    fn matroid(n: usize, k: usize) -> UniformMatroid {
        UniformMatroid::new(GroundSet::new(n).unwrap(), k).unwrap()
    }

    #[test]
    fn saturated_chain_gives_ratio_one() {
        let f = build(&InstanceDescription::coverage(vec![
            vec![1, 2],
            vec![2, 3],
            vec![3, 4],
        ]))
        .unwrap();
        let m = matroid(3, 2);
        let chain = greedy_maximize(&f, &m, ScanMode::Exhaustive).unwrap();
        let cert = gamma_hat_exact(&f, &chain.solution(), &m, DEFAULT_TERM_CAP).unwrap();
        let r = primal_ratio(&chain, &cert).unwrap();
        assert_eq!(r.value, 1.0);
        let opt = brute_force_optimum(&f, &m, DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(crate::oracle::exact_ratio(&chain, &opt).unwrap(), 1.0);
    }

    #[test]
    fn square_instance_quarter_ratio() {
        let f = SetFunctionHandle::new(4, |s| (s.len() * s.len()) as f64).unwrap();
        let m = matroid(4, 2);
        let chain = greedy_maximize(&f, &m, ScanMode::Exhaustive).unwrap();
        let cert = gamma_hat_exact(&f, &chain.solution(), &m, DEFAULT_TERM_CAP).unwrap();
        let r = primal_ratio(&chain, &cert).unwrap();
        assert!((r.value - 0.25).abs() < 1e-12);
        // Certified lower bound: 0.25 * f(S*) = 1 <= f(S) = 4.
        let opt = brute_force_optimum(&f, &m, DEFAULT_ORACLE_CAP).unwrap();
        assert!(r.value * opt.value <= chain.value() + 1e-9);
    }

    #[test]
    fn unbounded_certificate_is_uninformative() {
        let f = SetFunctionHandle::new(3, |s| (s.len() * s.len()) as f64).unwrap();
        let m = matroid(3, 2);
        let chain = greedy_maximize(&f, &m, ScanMode::Exhaustive).unwrap();
        let cert = CurvatureCertificate {
            value: Curvature::Unbounded,
            provenance: Provenance::Exact,
            base: chain.solution(),
            k: 2,
        };
        let r = primal_ratio(&chain, &cert).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.uninformative);
    }

    #[test]
    fn fixed_gamma_examples() {
        // Γ̂ = k at large k approaches 1 - 1/e.
        let r = fixed_gamma_ratio(1e6, 1_000_000).unwrap();
        assert!((r - 0.632121).abs() < 1e-5);
        assert_eq!(fixed_gamma_ratio(1.0, 1).unwrap(), 1.0);
        let r = fixed_gamma_ratio(2e6, 1_000_000).unwrap();
        assert!((r - 0.393469).abs() < 1e-5);
        assert!(fixed_gamma_ratio(0.5, 3).is_err());
    }

    #[test]
    fn classic_equals_fixed_gamma_at_k() {
        for k in 1..=100 {
            let fixed = fixed_gamma_ratio(k as f64, k).unwrap();
            assert_eq!(fixed.to_bits(), classic_ratio(k).to_bits());
        }
    }

    #[test]
    fn wang_examples() {
        let r = wang_ratio(1.0, 1_000_000).unwrap();
        assert!((r - 0.632121).abs() < 1e-4);
        let r = wang_ratio(1.3, 25).unwrap();
        assert!((r - 0.0106).abs() < 5e-4);
        let r = wang_ratio(3.0, 2).unwrap();
        assert!((r - 0.4375).abs() < 1e-12);
    }

    #[test]
    fn wang_literal_convention_differs() {
        // Literal A_2 = α, so a submodular α = 1 gives ratio 1 at k = 2.
        let literal = wang_ratio_with(1.0, 2, WangConvention::Literal).unwrap();
        assert_eq!(literal, 1.0);
        let corrected = wang_ratio(1.0, 2).unwrap();
        assert!((corrected - 0.75).abs() < 1e-12);
        assert!(wang_ratio_with(1.0, 1, WangConvention::Literal).is_err());
    }

    #[test]
    fn conforti_examples() {
        let (general, uniform) = conforti_ratios(1.0).unwrap();
        assert_eq!(general, 0.5);
        assert!((uniform - 0.632121).abs() < 1e-5);

        let (general, uniform) = conforti_ratios(1e-12).unwrap();
        assert!((general - 1.0).abs() < 1e-9);
        assert!((uniform - 1.0).abs() < 1e-9);

        let (general, uniform) = conforti_ratios(0.5).unwrap();
        assert!((general - 0.666667).abs() < 1e-6);
        assert!((uniform - 0.786939).abs() < 1e-6);

        assert!(conforti_ratios(1.5).is_err());
    }

    #[test]
    fn monotone_in_gamma_and_alpha() {
        for k in 2..=8 {
            let mut prev = f64::INFINITY;
            for g in [1.0, 1.5, 2.0, 4.0, 10.0] {
                let r = fixed_gamma_ratio(g, k).unwrap();
                assert!(r < prev);
                prev = r;
            }
            let mut prev = f64::INFINITY;
            for a in [0.5, 1.0, 1.5, 2.0, 3.0] {
                let r = wang_ratio(a, k).unwrap();
                assert!(r < prev);
                prev = r;
            }
        }
    }

    #[test]
    fn report_marks_missing_extension() {
        let f = build(&InstanceDescription::modular(vec![2.0, 1.0])).unwrap();
        let m = matroid(2, 2);
        let chain = greedy_maximize(&f, &m, ScanMode::Exhaustive).unwrap();
        let gamma = gamma_hat_exact(&f, &[], &m, DEFAULT_TERM_CAP).unwrap();
        let report = build_report(&ReportInputs {
            chain: &chain,
            matroid: &m,
            certificate: None,
            gamma_max: Some(&gamma),
            alpha: None,
            total_curvature: None,
            oracle: None,
            wang_convention: WangConvention::Corrected,
        })
        .unwrap();
        assert!(matches!(report.primal_ratio, RatioField::Absent { .. }));
        assert!(report.fixed_gamma_ratio.value().is_some());
    }
}
