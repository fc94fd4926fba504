//! Shared fixtures for the pipeline benchmarks.

use radcone::solver::{constant_state, Operator, State};
use radcone::ProblemSpec;

pub fn example_spec() -> ProblemSpec {
    ProblemSpec::example()
}

/// Operator on `n` intervals together with the usual small initial state.
pub fn operator_and_state(spec: &ProblemSpec, n: usize) -> (Operator<'_>, State) {
    let op = Operator::with_nodes(spec, n).expect("mesh size is valid");
    let x = constant_state(op.grid(), [0.1, 0.1]);
    (op, x)
}
