//! Greedy maximization of monotone set functions with computable, certified
//! approximation ratios.
//!
//! The pipeline: build a set function ([`objectives`]), run the accelerated
//! greedy ([`greedy`]), estimate the total primal curvature ([`curvature`]),
//! and turn the estimate into an a-posteriori approximation guarantee
//! ([`ratios`]) — no submodularity assumption required. [`oracle`] supplies
//! brute-force ground truth for validation, and [`adaptive`] extends the
//! whole story to stochastic items and adaptive policies.

pub mod adaptive;
pub mod curvature;
pub mod error;
pub mod greedy;
pub mod objectives;
pub mod oracle;
pub mod ratios;
pub mod setfn;

pub use adaptive::{
    adaptive_gamma_hat, adaptive_gamma_hat_policy, adaptive_greedy, adaptive_primal_curvature,
    adaptive_ratio, adaptive_tpc, conditional_expected_gain, load_adaptive_instance,
    optimal_policy_bruteforce, parse_adaptive_instance, AdaptiveInstance, AdaptiveModel,
    AdaptiveObjective, PartialRealization, PolicyTrace, StochasticItem,
};
pub use curvature::{
    elemental_curvature_exact, elemental_curvature_sampled, gamma_hat_exact, gamma_hat_sampled,
    primal_curvature, total_curvature, total_primal_curvature, Curvature, CurvatureCertificate,
    Provenance,
};
pub use error::{Error, Result};
pub use greedy::{greedy_maximize, GreedyChain, ScanMode};
pub use objectives::{build, load_instance, parse_instance, InstanceDescription};
pub use oracle::{brute_force_optimum, exact_ratio, random_monotone_function, OracleResult};
pub use ratios::{
    build_report, classic_ratio, conforti_ratios, fixed_gamma_ratio, primal_ratio, wang_ratio,
    wang_ratio_with, RatioReport, RatioValue, ReportInputs, WangConvention,
};
pub use setfn::{GroundSet, SetFunctionHandle, UniformMatroid};
