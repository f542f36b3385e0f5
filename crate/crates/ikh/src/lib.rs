//! Khovanov-type cohomology of involutive link diagrams over GF(2).
//!
//! An involutive diagram is a link diagram symmetric under an involution τ
//! (reflection across an axis in the diagram plane composed with the
//! over/under flip). The complex carries the usual Khovanov differential `d`
//! together with the involutive deformation `d_τ = id + τ`, and two
//! filtrations of the total complex `∂ = d + d_τ`:
//!
//! * `F` — the increasing filtration by cohomological degree `i`,
//! * `G` — the decreasing filtration by a half-integer crossing weight `k`.
//!
//! The crate computes the bifiltered total cohomology, the associated
//! triply graded invariant, both spectral sequences, the explicit model of
//! the second `G`-page, reduced (basepointed) versions, and a collection of
//! consistency suites (mirror duality, skein dimension counts, support
//! bounds, move invariance).
//!
//! Module map:
//!
//! * [`f2linalg`] — sparse/packed linear algebra over GF(2).
//! * [`diagram`] — involutive diagrams, the IKD text format, smoothings.
//! * [`complex`] — the bigraded cochain complex with `d`, `d_τ`, gradings.
//! * [`specseq`] — the filtered-complex Gauss-elimination page engine.
//! * [`homology`] — bifiltered total cohomology and trigraded tables.
//! * [`invariants`] — top-level invariants, oracles, and check suites.

pub mod complex;
pub mod diagram;
pub mod f2linalg;
pub mod homology;
pub mod invariants;
pub mod specseq;
