//! Numbers tagged with how they were obtained.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    /// Parametric scan plus golden-section refinement of a quadrature.
    ScanQuadrature,
    /// Grid search with refinement; the bias is the coarse/fine difference.
    Grid,
    /// Grid search over a domain that is unbounded in the gradient variables.
    SampledGrid,
    /// Combination of tagged inputs.
    Derived,
    /// Fixed-point iteration on the discretized operator.
    Iteration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    /// Absolute uncertainty bound; zero for closed forms.
    pub uncertainty: f64,
    pub method: Method,
}

impl Estimate {
    pub fn new(value: f64, uncertainty: f64, method: Method) -> Self {
        Self {
            value,
            uncertainty,
            method,
        }
    }

    pub fn exact(value: f64) -> Self {
        Self::new(value, 0.0, Method::ClosedForm)
    }
}
