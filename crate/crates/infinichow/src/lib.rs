//! Exact-arithmetic computer algebra for the infinitesimal Chow dilogarithm.
//!
//! The crate works over explicitly presented number fields K = Q[x]/(m(x))
//! and computes, with no floating point anywhere:
//!
//! * truncated power series K[t]/(t^N) and bivariate Laurent series
//!   K((s))[t]/(t^N) with honest knowledge tracking ([`series`]);
//! * the map ℓ on wedges of units, residues of K-theory symbols, the additive
//!   dilogarithm ℓi₂ and the five-term relation ([`ktheory`]);
//! * the canonical 1-form ω attached to congruent triples of units and its
//!   reparametrization invariance ([`omega`]);
//! * factored rational functions on P¹ over the dual numbers, their local
//!   expansions, divisors, and goodness analysis ([`ratfun`]);
//! * the regulator ρ on triples of rational functions and the residue map on
//!   B₂ ([`regulator`]);
//! * higher Chow style parametrized cycles of weight two, their faces, and
//!   the cycle regulator ρ_f ([`cycles`]);
//! * deterministic randomized identity suites ([`suites`], [`sample`]) and a
//!   JSON interface shared with the command-line tool ([`json`]).
//!
//! All results are exact: equalities asserted by tests and suites hold on the
//! nose in the relevant quotient ring, with zero tolerance.

pub mod cycles;
pub mod error;
pub mod json;
pub mod ktheory;
pub mod numfield;
pub mod omega;
pub mod ratfun;
pub mod regulator;
pub mod sample;
pub mod series;
pub mod suites;

pub use cycles::{
    boundary, face, faces_report, fixture_445, g3_act, g3_character, l_pair, l_value,
    modulus_check, rho_f, Cycle, FacePoint, FaceReport, ModulusVerdict, Side, ZeroCycle,
};
pub use error::{Error, Result};
pub use json::{exit_code, run_request, run_request_str, COMMANDS};
pub use ktheory::{
    big_delta, delta, ell, five_term_li2, five_term_symbols, li2, li2_via_ell, res_wedge2,
    res_wedge3, BlochSymbol, GoodElement, Wedge2, Wedge3,
};
pub use numfield::{FieldElement, FieldOps, NumberField, Rat};
pub use omega::{
    check_p10, check_p11, check_p4, check_p5, check_p6, check_p7, check_p8,
    check_reparam_invariance, omega_form, omega_residue, OneForm, ReparamMode, TriplePair,
};
pub use ratfun::{
    good_local_lift, goodness_check, support_locations, Divisor, FactoredRational,
    GoodnessReport, Location, LocationReport, Point,
};
pub use regulator::{
    assert_subfield, b2_residue, epsilon_at, lifting_independence_check, reciprocity2, rho,
    rho_delta_check, RegTriple, RhoResult,
};
pub use series::{ExpDecomposition, LaurentBivariate, TruncSeries, DEFAULT_T_PREC, DEFAULT_WINDOW};
pub use suites::{run_all, run_suite, SuiteOutcome, SUITE_NAMES};
