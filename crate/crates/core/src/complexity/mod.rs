//! Packing-number complexity of a function: the layer decomposition of a
//! grid, greedy packing estimates of `S_C` and `S_NC`, the integral
//! characterization and brute-force oracles for the packing lemmas.

mod integral;
mod layers;
mod lemmas;
mod packing;
mod report;
pub(crate) mod spatial;

pub use integral::{
    integral_estimate, integral_from_decomposition, IntegralEstimate, IntegralMethod,
    MIN_GRID_POINTS, MIN_MC_SAMPLES,
};
pub use layers::{
    layer_decomposition, layer_decomposition_capped, LayerDecomposition, DEFAULT_GRID_CAP,
};
pub use lemmas::{
    lemma3_holds, lemma4_holds, lemma_properties_suite, Counterexample, LemmaVerdict,
};
pub use packing::{
    exact_covering_centers_in_E, exact_packing_bruteforce, greedy_packing, greedy_packing_number,
    ORACLE_CAP,
};
pub use report::{
    default_gamma, estimate_sc, estimate_snc, packing_counts, sandwich_check, ComplexityConfig,
    ComplexityReport, SandwichVerdict, SANDWICH_LOWER_SLACK,
};
