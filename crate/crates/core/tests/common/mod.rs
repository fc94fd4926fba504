#![allow(dead_code)]

use radcone::config::EXAMPLE_SPEC;
use radcone::{parse_spec_str, Expr, Nonlinearity, NonlinearityEnvelope, ProblemSpec};

/// Equation block with zero functionals, `c`, `d` and `g = 1`.
pub fn local_equation(i: usize, c: f64, d: f64, f: &str, base: &str) -> String {
    format!(
        "[equation.{i}]\nh.power = 4\nc = {c}\nd = {d}\nwindow = 1/4, 1/2\nf = {f}\nf.base = {base}\nf.q_lo = 1\nf.q_hi = 1\n"
    )
}

/// Two copies of the local problem with `c = 0`, `d = 1`, `g = 1` and the given constant forcings.
pub fn local_spec(f1: &str, f2: &str) -> ProblemSpec {
    let src = format!(
        "[geometry]\nn = 3\nr0 = 1\n{}{}",
        local_equation(1, 0.0, 1.0, f1, f1),
        local_equation(2, 0.0, 1.0, f2, f2)
    );
    parse_spec_str(&src).unwrap()
}

pub fn nl(src: &str) -> Nonlinearity {
    Nonlinearity::from_expr(Expr::parse(src, &Nonlinearity::VARS).unwrap())
}

/// `f_i = k_i w_i` as exact factored envelopes with declared ratio bounds.
pub fn linear_envelopes(k: [f64; 2]) -> [NonlinearityEnvelope; 2] {
    [0, 1].map(|i| {
        let ki = k[i];
        let f = Nonlinearity::custom(format!("{ki} * w{}", i + 1), move |u, v, _, _| ki * if i == 0 { u } else { v });
        let base = if i == 0 { nl("u") } else { nl("v") };
        NonlinearityEnvelope::factored(f, base, ki, ki).with_ratio_bounds(Some(1.0), Some(1.0))
    })
}

pub fn example() -> ProblemSpec {
    parse_spec_str(EXAMPLE_SPEC).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
