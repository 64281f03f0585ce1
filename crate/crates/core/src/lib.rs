//! Exact and approximate counting of combinatorial structures by evaluating
//! black-box generating polynomials at the points of explicit Waring
//! decompositions of elementary symmetric polynomials.
//!
//! The crate is organised bottom-up:
//!
//! * [`polycore`]: exact rationals, linear forms, Waring decompositions, the
//!   apolarity pairing and the symbolic expansion used to check everything else.
//! * [`decomp`]: generators and composers of decompositions supported on the
//!   multilinear monomials.
//! * [`genpoly`]: black-box generating polynomials (closed walks, permanents,
//!   set partitions, homomorphisms).
//! * [`splitters`]: sampled balanced splitters, perfect splitters and the
//!   perfectly balanced hash family lower bound.
//! * [`gf2m`]: binary extension fields used by the characteristic-2 detector.
//! * [`engines`]: end-to-end counting and detection pipelines.
//! * [`oracle`]: brute-force baselines and catalecticant rank audits.
//! * [`formats`]: text file formats for graphs, matrices, tree decompositions.

pub mod decomp;
pub mod engines;
pub mod error;
pub mod formats;
pub mod genpoly;
pub mod gf2m;
pub mod oracle;
pub mod polycore;
pub mod splitters;

mod numeric;

pub use error::{Error, Result};
pub use polycore::{
    apply_operator, operator_on_sparse, BlackBoxPolynomial, Limits, LinearForm, Rational,
    SparsePolynomial, WaringDecomposition, WaringTerm,
};
