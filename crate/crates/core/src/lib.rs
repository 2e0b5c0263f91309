//! Lower-bound machinery for diagonal hypercube poset Ramsey numbers.
//!
//! The construction colours a hypercube `Q_N`, `N = (2 + c)n`, in layers and
//! modifies each pair of layers with pivot families so that no monochromatic
//! induced `Q_n` survives. Whether a given set of per-layer parameters
//! `(c_i, h_i)` supports the construction reduces to a system of inequality
//! margins; maximizing `c = 2 * sum c_i` over that system yields the bound
//! `R(Q_n, Q_n) > (2 + c)n + k`.
//!
//! The crate provides:
//!
//! - [`exponent`]: entropy estimates of binomial coefficients, exact
//!   big-integer binomials, and Stirling-sandwich checks;
//! - [`layers`]: the layer schedule and the full constraint-margin system;
//! - [`optimizer`]: constrained maximization of the bound coefficient;
//! - [`certifier`]: extended-precision re-verification, canonical JSON
//!   certificates, and the table of named constants;
//! - [`oracle`]: exact exhaustive combinatorics (cones, pivot conditions,
//!   colourings, embedding search) plus seeded Monte Carlo at toy scale;
//! - [`cli`]: the command-line front end.

pub mod certifier;
pub mod cli;
pub mod exponent;
mod hp;
pub mod layers;
pub mod optimizer;
pub mod oracle;
