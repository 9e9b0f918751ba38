//! Lazy SMT solving for quantifier-free (nonlinear) integer arithmetic over
//! bounded domains, with joint Boolean/theory symmetry detection and
//! symmetry-breaking predicates.
//!
//! Pipeline: parse → normalize → skeleton extraction → symmetry detection on
//! a colored graph → restricted SBP injection → CDCL search with lazy theory
//! checks. A brute-force oracle over the finite domain provides ground truth
//! for testing.

pub mod ast;
pub mod deadline;
pub mod dimacs;
pub mod eval;
pub mod gen;
pub mod normalize;
pub mod oracle;
pub mod parser;
pub mod printer;
pub mod sat;
pub mod sbp;
pub mod skeleton;
pub mod solver;
pub mod symgraph;
pub mod theory;
