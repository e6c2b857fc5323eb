//! Strong backdoors to polymorphism-defined classes of constraint languages.
//!
//! The crate is organised bottom-up:
//!
//! - [`relation`], [`language`], [`instance`]: relations in canonical form,
//!   constraint languages, CSP instances and assignment.
//! - [`operation`], [`search`]: operations, preservation, and searches for
//!   polymorphisms satisfying fixed identity systems.
//! - [`class`]: composite class expressions, membership and Helly bounds.
//! - [`backdoor`], [`gac`]: backdoor verification and detection, and
//!   backdoor-driven solving.
//! - [`reductions`]: generators for the hardness reductions with exact
//!   ground-truth oracles.

pub mod backdoor;
pub mod class;
pub mod error;
pub mod gac;
pub mod instance;
pub mod language;
pub mod operation;
pub mod reductions;
pub mod relation;
pub mod search;

pub use backdoor::{BackdoorLimits, SearchOutcome};
pub use class::{ClassExpr, ClassOracle, ClassReport, FixedOp, HellyBound, Witness};
pub use error::{Error, Result};
pub use instance::{Constraint, CspInstance, PartialAssignment};
pub use language::{BijectionMap, Language};
pub use operation::{NamedOp, Operation, OperationTable};
pub use reductions::{Generated, Graph, HittingSetInstance, NonHellyWitness};
pub use relation::{Relation, Tuple, Value};
pub use search::{IdentityFamily, SearchLimits, SetFunction};
