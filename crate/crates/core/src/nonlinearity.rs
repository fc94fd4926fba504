//! Nonlinearities `f(u, v, z1, z2)` and the envelopes that make their extrema
//! over gradient-unbounded boxes computable.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::Violation;
use crate::expr::Expr;

type Fn4 = dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync;

/// A scalar function of `(u, v, z1, z2)`.
#[derive(Clone)]
pub struct Nonlinearity {
    label: String,
    f: Arc<Fn4>,
}

impl Nonlinearity {
    pub const VARS: [&'static str; 4] = ["u", "v", "z1", "z2"];

    pub fn from_expr(e: Expr) -> Self {
        let label = e.source().to_string();
        let f = move |u, v, z1, z2| e.eval(&[u, v, z1, z2]);
        Self {
            label,
            f: Arc::new(f),
        }
    }

    pub fn custom(label: impl Into<String>, f: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::custom(format!("{c}"), move |_, _, _, _| c)
    }

    pub fn eval(&self, u: f64, v: f64, z1: f64, z2: f64) -> f64 {
        (self.f)(u, v, z1, z2)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `λ · f`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let f = self.f.clone();
        Self::custom(format!("{lambda} * ({})", self.label), move |u, v, z1, z2| lambda * f(u, v, z1, z2))
    }
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Nonlinearity").field(&self.label).finish()
    }
}

impl Serialize for Nonlinearity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.label)
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnvelopeForm {
    /// `q_lo · base(u, v) ≤ f ≤ q_hi · base(u, v)` for all gradients.
    Factored {
        base: Nonlinearity,
        q_lo: f64,
        q_hi: f64,
        /// Declared `sup base(u,v)/w_i` over the quadrant.
        ratio_sup: Option<f64>,
        /// Declared `inf base(u,v)/w_i` over the quadrant.
        ratio_inf: Option<f64>,
    },
    /// Black-box `f`, searched over gradients up to `gradient_cap`.
    Sampled { gradient_cap: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct NonlinearityEnvelope {
    pub f: Nonlinearity,
    pub form: EnvelopeForm,
}

/// The `k`-th point of the Halton sequence in base `b`.
fn halton(mut k: usize, b: usize) -> f64 {
    let (mut x, mut scale) = (0.0, 1.0);
    while k > 0 {
        scale /= b as f64;
        x += scale * (k % b) as f64;
        k /= b;
    }
    x
}

/// Deterministic sample points `(u, v, z1, z2)` spread over several decades,
/// including the coordinate faces.
pub(crate) fn sample_points(n: usize) -> Vec<[f64; 4]> {
    let spread = |x: f64| 10f64.powf(-3.0 + 5.0 * x);
    let mut pts = Vec::with_capacity(n + 16);
    for k in 1..=n {
        pts.push([
            spread(halton(k, 2)),
            spread(halton(k, 3)),
            100.0 * halton(k, 5),
            100.0 * halton(k, 7),
        ]);
    }
    for &u in &[0.0, 0.5, 2.0, 10.0] {
        for &v in &[0.0, 0.5, 2.0, 10.0] {
            pts.push([u, v, 0.0, 0.0]);
        }
    }
    pts
}

impl NonlinearityEnvelope {
    pub fn factored(f: Nonlinearity, base: Nonlinearity, q_lo: f64, q_hi: f64) -> Self {
        Self {
            f,
            form: EnvelopeForm::Factored {
                base,
                q_lo,
                q_hi,
                ratio_sup: None,
                ratio_inf: None,
            },
        }
    }

    pub fn sampled(f: Nonlinearity, gradient_cap: f64) -> Self {
        Self {
            f,
            form: EnvelopeForm::Sampled { gradient_cap },
        }
    }

    /// Declares bounds on `base/w_i`; ignored for sampled envelopes.
    pub fn with_ratio_bounds(mut self, inf: Option<f64>, sup: Option<f64>) -> Self {
        if let EnvelopeForm::Factored {
            ratio_sup, ratio_inf, ..
        } = &mut self.form
        {
            *ratio_inf = inf;
            *ratio_sup = sup;
        }
        self
    }

    pub fn is_rigorous(&self) -> bool {
        matches!(self.form, EnvelopeForm::Factored { .. })
    }

    /// `λ · f` with the envelope scaled accordingly.
    pub fn scaled(&self, lambda: f64) -> Self {
        let form = match &self.form {
            EnvelopeForm::Factored {
                base,
                q_lo,
                q_hi,
                ratio_sup,
                ratio_inf,
            } => EnvelopeForm::Factored {
                base: base.clone(),
                q_lo: lambda * q_lo,
                q_hi: lambda * q_hi,
                ratio_sup: *ratio_sup,
                ratio_inf: *ratio_inf,
            },
            s @ EnvelopeForm::Sampled { .. } => s.clone(),
        };
        Self {
            f: self.f.scaled(lambda),
            form,
        }
    }

    /// Sample-based checks of nonnegativity and of the declared envelope.
    /// `component` is 0 for `u` and 1 for `v`.
    pub fn validate(&self, equation: Option<usize>, component: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        let pts = sample_points(2000);
        for p in &pts {
            let y = self.f.eval(p[0], p[1], p[2], p[3]);
            if !y.is_finite() {
                out.push(Violation::new(equation, "f evaluable", format!("f{p:?} = {y}")));
                return out;
            }
            if y < 0.0 {
                out.push(Violation::new(equation, "f≥0", format!("f{p:?} = {y}")));
                return out;
            }
        }
        match &self.form {
            EnvelopeForm::Factored {
                base,
                q_lo,
                q_hi,
                ratio_sup,
                ratio_inf,
            } => {
                if !(*q_lo > 0.0 && q_lo <= q_hi && q_hi.is_finite()) {
                    out.push(Violation::new(
                        equation,
                        "0<q_lo≤q_hi<∞",
                        format!("q_lo = {q_lo}, q_hi = {q_hi}"),
                    ));
                    return out;
                }
                for p in &pts {
                    let b = base.eval(p[0], p[1], 0.0, 0.0);
                    let y = self.f.eval(p[0], p[1], p[2], p[3]);
                    if !(b.is_finite() && b >= 0.0) {
                        out.push(Violation::new(equation, "base≥0", format!("base({}, {}) = {b}", p[0], p[1])));
                        return out;
                    }
                    let slack = 1e-12 * y.abs().max(b.abs());
                    if y < q_lo * b - slack || y > q_hi * b + slack {
                        out.push(Violation::new(
                            equation,
                            "q_lo·base≤f≤q_hi·base",
                            format!("f{p:?} = {y}, base = {b}"),
                        ));
                        return out;
                    }
                    let w = p[component];
                    if w > 0.0 {
                        let r = b / w;
                        let tol = 1e-12 * r.abs().max(1.0);
                        if ratio_sup.is_some_and(|s| r > s + tol) {
                            out.push(Violation::new(equation, "base/w≤ratio_sup", format!("base/w = {r} at {p:?}")));
                            return out;
                        }
                        if ratio_inf.is_some_and(|s| r < s - tol) {
                            out.push(Violation::new(equation, "base/w≥ratio_inf", format!("base/w = {r} at {p:?}")));
                            return out;
                        }
                    }
                }
            }
            EnvelopeForm::Sampled { gradient_cap } => {
                if !(*gradient_cap > 0.0 && gradient_cap.is_finite()) {
                    out.push(Violation::new(equation, "gradient_cap>0", format!("gradient_cap = {gradient_cap}")));
                }
            }
        }
        out
    }
}
