//! Coefficient expression language and validated problem definitions.

mod expr;
mod parser;
mod problem;

pub use expr::{BinOp, Expr, Func};
pub use parser::{parse_expr, ParseError};
pub use problem::{
    validate_at, validate_problem, CheckLevel, Condition, Endpoint, Problem, SpaceError,
    StateSpace, ValidatedProblem, Violation,
};
