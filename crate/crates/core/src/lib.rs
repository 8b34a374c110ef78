//! Clenshaw-Curtis Smolyak (CCS) sparse-grid cubature on the unit cube.
//!
//! * [`cc1d`]: nested one-dimensional Clenshaw-Curtis rules, their
//!   differences and exact node keys.
//! * [`smolyak`]: the rule `A(d + k, d)` by three independent constructions,
//!   node counts, operator norms and polynomial-exactness diagnostics.
//! * [`tractability`]: level selection for a target error and the closed-form
//!   error and point-count bounds behind it.
//! * [`testfns`]: integrands with exact integrals, including ridge functions
//!   with directional derivatives of every order bounded by one.
//! * [`gridfile`]: the `ccs-grid/1` CSV and JSON formats.
//!
//! ```
//! use ccs_core::{integrate, ridge_cos, smolyak_rule, Integrand};
//!
//! let rule = smolyak_rule(2, 4).unwrap();
//! let f = ridge_cos(1.0, vec![0.6, 0.8], 0.0).unwrap();
//! let err = (integrate(&rule, &f).unwrap() - f.exact_integral().unwrap()).abs();
//! assert!(err < 1e-8);
//! ```

pub mod cc1d;
pub mod error;
pub mod gridfile;
pub mod multi_index;
pub mod smolyak;
pub mod sum;
pub mod testfns;
pub mod tractability;

pub use cc1d::{cc_rule, delta_rule, level_size, node_key, rule_norm, NodeKey, Rule1D};
pub use error::{Error, Result};
pub use gridfile::{GridFile, GridFormat};
pub use multi_index::{multi_indices, MultiIndex};
pub use smolyak::{
    exactness_check, integrate, node_count, node_count_bound, norm_bound, operator_norm,
    smolyak_rule, smolyak_rule_combination, smolyak_rule_recursive, sparse_grid_points,
    BuildOptions, Construction, CubaturePoint, CubatureRule, ExactnessReport,
};
pub use testfns::{
    brute_force_integral, monomial, parse_integrand, ridge_cos, ridge_exp, Integrand, TestFunction,
};
pub use tractability::{
    ccs_error_bound, ccs_point_bound, k_eps, k_star, plan, positive_error_bound, taylor_bound,
    tchakalov_point_bound, TractabilityPlan, Variant,
};
