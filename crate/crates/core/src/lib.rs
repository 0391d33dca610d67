//! Extremal proper q-coloring optimization.
//!
//! The central object is the quadratically constrained linear program that
//! asks for the largest value of `Σ α_A ln|A|` over nonnegative weights
//! indexed by nonempty color sets `A ⊆ [q]`, subject to `Σ α_A = 1` and
//! `Σ_{A∩B=∅} α_A α_B ≥ (s-1)/(2s)`. Its optimum `OPT_q(s)` is the
//! exponential growth rate of the number of proper q-colorings of graphs
//! with edge density `(s-1)/(2s)`.
//!
//! Modules:
//!
//! * [`colorsets`]: weight vectors, objective and constraint functionals,
//!   support graphs and their classification.
//! * [`supports`]: candidate support shapes, small-graph spectra and
//!   induced-subgraph search.
//! * [`kkt`]: closed-form stationary points, the structure-guided global
//!   solver and an independent numeric oracle for tiny `q`.
//! * [`relaxation`]: the continuous relaxation with a floor on the weights.
//! * [`counterexamples`]: balanced vectors and the constructions that beat
//!   them.
//! * [`graphs`]: Turán and cluster graphs, exact coloring counts and edit
//!   distances.

#![forbid(unsafe_code)]
// NaN must fail the `!(x > 0.0)` style guards; the numerics index several arrays at once
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod colorsets;
pub mod counterexamples;
pub mod error;
pub mod fmt;
pub mod graphs;
pub mod kkt;
pub mod relaxation;
pub mod supports;

pub use colorsets::{
    classify_support, esum, feasible, obj, support_graph, vsum, ColorSet, SupportClass,
    SupportGraph, WeightVector, DEFAULT_TOL, ZERO_WEIGHT,
};
pub use counterexamples::{
    balanced_lower_bound, balanced_vector, construct_counterexample, embed_counterexample,
    q13_vector, scan_counterexamples, scan_counterexamples_numeric, CounterexampleReport,
};
pub use error::{Error, Result};
pub use graphs::{
    build_g_alpha, build_turan, count_colorings_brute, count_colorings_dc,
    count_colorings_multipartite, edit_distance_iso, edit_distance_labeled, log_rate,
    ColoredGraph, CountMethod, CountResult,
};
pub use kkt::{brute_opt, global_solve, solve_pk, solve_qk, SolveOptions, SolveReport, StationaryPoint};
pub use relaxation::{
    f_theta_profile, relaxed_bound, relaxed_solve, theta_param, RelaxedSolution, ThetaProfile,
};
pub use supports::{
    count_nonneg_eigenvalues, eigenvalues, enum_p_candidates, enum_q_candidates, has_induced,
    CandidateKind, SizedCandidate, SmallGraph,
};
