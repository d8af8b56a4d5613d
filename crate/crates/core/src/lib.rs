//! Relational semantic web service composition.
//!
//! The library is organised around the lifecycle of one composition problem:
//!
//! * [`ontology`] — concept hierarchy, relation types and inference rules;
//! * [`knowledge`] — the growing set of typed objects and relation instances,
//!   closed under declared symmetry/transitivity;
//! * [`matcher`] — backtracking search binding service inputs (typed) or rule
//!   variables (untyped) to knowledge objects;
//! * [`engine`] — the composition search loop, service invocation bookkeeping
//!   and useless-service pruning;
//! * [`formats`] — parsers and writers for the instance files (JSON-LD
//!   ontology, rule/repository/query XML) and the plan document;
//! * [`validator`] — an independent replay checker for produced plans;
//! * [`generator`] — a seeded synthetic benchmark instance generator.

pub mod engine;
pub mod formats;
pub mod generator;
pub mod knowledge;
pub mod matcher;
pub mod ontology;
pub mod validator;
