//! Change of variables between the exterior radial problem on `[r0, ∞)` and
//! the ODE system on `(0, 1]`.
//!
//! With `r(t) = r0 · t^(1/(2-n))` the radial Laplacian becomes a plain second
//! derivative and the source picks up the weight
//! `g(t) = r0²/(n-2)² · t^((2n-2)/(2-n)) · h(r(t))`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result, Violation};
use crate::expr::Expr;
use crate::mesh::MeshFunction;

/// Exterior of the ball of radius `r0` in `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExteriorGeometry {
    n: u32,
    r0: f64,
}

impl ExteriorGeometry {
    pub fn new(n: u32, r0: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("dimension n = {n} must be at least 3")));
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::InvalidParameter(format!("inner radius r0 = {r0} must be positive")));
        }
        Ok(Self { n, r0 })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    fn two_minus_n(&self) -> f64 {
        2.0 - self.n as f64
    }

    /// `r(t) = r0 · t^(1/(2-n))`, mapping `(0, 1]` onto `[r0, ∞)`.
    pub fn map_radius(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::Domain {
                what: "t",
                value: t,
                domain: "(0, 1]",
            });
        }
        Ok(self.r0 * t.powf(1.0 / self.two_minus_n()))
    }

    /// Inverse of [`map_radius`](Self::map_radius): `t = (r/r0)^(2-n)`.
    pub fn radius_to_t(&self, r: f64) -> Result<f64> {
        if !(r >= self.r0 && r.is_finite()) {
            return Err(Error::Domain {
                what: "r",
                value: r,
                domain: "[r0, ∞)",
            });
        }
        Ok((r / self.r0).powf(self.two_minus_n()))
    }

    /// Signed `r'(t) = r0/(2-n) · t^((n-1)/(2-n))` (always negative).
    pub fn radius_derivative(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::Domain {
                what: "t",
                value: t,
                domain: "(0, 1]",
            });
        }
        let e = (self.n as f64 - 1.0) / self.two_minus_n();
        Ok(self.r0 / self.two_minus_n() * t.powf(e))
    }

    /// `|r'(t)|`, the divisor turning `|u'(t)|` into `|∇w|` at `r(t)`.
    ///
    /// Accepts `t = 1` (the inner sphere), where the value is `r0/(n-2)`.
    pub fn gradient_scale(&self, t: f64) -> Result<f64> {
        Ok(self.radius_derivative(t)?.abs())
    }
}

/// The radial part `h` of the source term.
#[derive(Clone)]
pub enum RadialProfile {
    /// `h(r) = r^(-p)`.
    Power { p: f64 },
    /// `h(r)` written in the expression language with the single variable `r`.
    Expression(Expr),
    /// Any other nonnegative function of `r`.
    Custom {
        label: String,
        h: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialProfile::Power { p } => write!(f, "Power {{ p: {p} }}"),
            RadialProfile::Expression(e) => write!(f, "Expression({})", e.source()),
            RadialProfile::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

impl RadialProfile {
    pub fn describe(&self) -> String {
        match self {
            RadialProfile::Power { p } => format!("r^(-{p})"),
            RadialProfile::Expression(e) => e.source().to_string(),
            RadialProfile::Custom { label, .. } => label.clone(),
        }
    }

    fn eval(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Power { p } => r.powf(-p),
            RadialProfile::Expression(e) => e.eval(&[r]),
            RadialProfile::Custom { h, .. } => h(r),
        }
    }
}

/// `h` together with its declared decay exponent: `h(r) ≤ r^-(n+μ)` for large `r`.
#[derive(Debug, Clone)]
pub struct RadialWeight {
    pub profile: RadialProfile,
    pub mu: f64,
}

impl Serialize for RadialWeight {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RadialWeight", 2)?;
        st.serialize_field("h", &self.profile.describe())?;
        st.serialize_field("mu", &self.mu)?;
        st.end()
    }
}

impl RadialWeight {
    /// `h(r) = r^(-p)`; the decay exponent is `p - n`.
    pub fn power(p: f64, geom: &ExteriorGeometry) -> Result<Self> {
        let mu = p - geom.n() as f64;
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "power law r^(-{p}) needs p > n = {}",
                geom.n()
            )));
        }
        Ok(Self {
            profile: RadialProfile::Power { p },
            mu,
        })
    }

    pub fn expression(h: Expr, mu: f64) -> Self {
        Self {
            profile: RadialProfile::Expression(h),
            mu,
        }
    }

    pub fn custom(label: impl Into<String>, mu: f64, h: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            profile: RadialProfile::Custom {
                label: label.into(),
                h: Arc::new(h),
            },
            mu,
        }
    }

    pub fn h(&self, r: f64) -> Result<f64> {
        let value = self.profile.eval(r);
        if !value.is_finite() {
            return Err(Error::Evaluation(format!(
                "h({r}) = {value} for h = {}",
                self.profile.describe()
            )));
        }
        Ok(value)
    }

    /// Spot checks of `h ≥ 0` and of the declared decay. These are samples,
    /// not a proof: the decay bound is a modelling hypothesis.
    pub fn validate(&self, geom: &ExteriorGeometry, equation: Option<usize>) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            out.push(Violation::new(equation, "μ>0", format!("declared decay exponent μ = {}", self.mu)));
            return out;
        }
        if let RadialProfile::Power { p } = self.profile {
            if self.mu > p - geom.n() as f64 + 1e-12 {
                out.push(Violation::new(
                    equation,
                    "h(r)≤r^-(n+μ)",
                    format!("r^(-{p}) decays only like r^-(n+{})", p - geom.n() as f64),
                ));
            }
            return out;
        }
        let r0 = geom.r0();
        let exponent = geom.n() as f64 + self.mu;
        let mut scaled = Vec::new();
        for k in 0..=60 {
            let r = r0 * 2f64.powf(k as f64 * 0.5);
            match self.h(r) {
                Ok(h) if h < 0.0 => {
                    out.push(Violation::new(equation, "h≥0", format!("h({r}) = {h}")));
                    return out;
                }
                Ok(h) => scaled.push(h * r.powf(exponent)),
                Err(e) => {
                    out.push(Violation::new(equation, "h evaluable", e.to_string()));
                    return out;
                }
            }
        }
        // h·r^(n+μ) must stay bounded: the far tail may not outgrow the near range.
        let (near, far) = scaled.split_at(30);
        let near_max = near.iter().cloned().fold(0.0, f64::max);
        let far_max = far.iter().cloned().fold(0.0, f64::max);
        if far_max > 10.0 * near_max.max(1.0) {
            out.push(Violation::new(
                equation,
                "h(r)≤r^-(n+μ)",
                format!("h·r^(n+μ) grows to {far_max:.3e} at large r"),
            ));
        }
        out
    }
}

/// The weight `g(t)`, evaluated lazily so quadrature can refine near `t = 0`.
pub fn weight_g(t: f64, w: &RadialWeight, geom: &ExteriorGeometry) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain {
            what: "t",
            value: t,
            domain: "(0, 1]",
        });
    }
    let n = geom.n() as f64;
    let r0 = geom.r0();
    let prefactor = r0 * r0 / ((n - 2.0) * (n - 2.0));
    if let RadialProfile::Power { p } = w.profile {
        // Closed form of t^((2n-2)/(2-n)) · (r0 t^(1/(2-n)))^(-p).
        let e = (2.0 * n - 2.0 - p) / (2.0 - n);
        let tp = if e == 0.0 { 1.0 } else { t.powf(e) };
        return Ok(prefactor * r0.powf(-p) * tp);
    }
    let r = geom.map_radius(t)?;
    let h = w.h(r)?;
    Ok(prefactor * t.powf((2.0 * n - 2.0) / (2.0 - n)) * h)
}

/// `g` bound to its geometry, as consumed by quadrature and the solver.
#[derive(Debug, Clone)]
pub struct WeightG {
    pub geometry: ExteriorGeometry,
    pub radial: RadialWeight,
}

impl WeightG {
    pub fn new(geometry: ExteriorGeometry, radial: RadialWeight) -> Self {
        Self { geometry, radial }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        weight_g(t, &self.radial, &self.geometry)
    }
}

/// One row of a solution profile in the original radial variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub t: f64,
    pub r: f64,
    pub w: f64,
    /// Signed `dw/dr`.
    pub dw_dr: f64,
    /// `|∇w|(r) = |u'(t)| / |r'(t)|`.
    pub grad: f64,
}

/// Maps a mesh function on `(0, 1]` back to `w(r)` and `|∇w|(r)`, sorted by increasing `r`.
pub fn pull_back_profile(mesh: &MeshFunction, geom: &ExteriorGeometry) -> Result<Vec<ProfileRow>> {
    if mesh.is_empty() {
        return Err(Error::InvalidParameter("cannot pull back an empty mesh function".into()));
    }
    let mut rows = Vec::with_capacity(mesh.len());
    for ((&t, &u), &du) in mesh.nodes().iter().zip(mesh.values()).zip(mesh.derivs()) {
        let r = geom.map_radius(t)?;
        let dr = geom.radius_derivative(t)?;
        rows.push(ProfileRow {
            t,
            r,
            w: u,
            dw_dr: du / dr,
            grad: du.abs() / dr.abs(),
        });
    }
    rows.sort_by(|a, b| a.r.total_cmp(&b.r));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Grid;
    use proptest::prelude::*;

    fn g3() -> ExteriorGeometry {
        ExteriorGeometry::new(3, 1.0).unwrap()
    }

    #[test]
    fn geometry_invariants() {
        assert!(ExteriorGeometry::new(2, 1.0).is_err());
        assert!(ExteriorGeometry::new(3, 0.0).is_err());
        assert!(ExteriorGeometry::new(3, -1.0).is_err());
    }

    #[test]
    fn map_radius_examples() {
        assert_eq!(g3().map_radius(1.0).unwrap(), 1.0);
        assert!((g3().map_radius(0.25).unwrap() - 4.0).abs() < 1e-14);
        let g4 = ExteriorGeometry::new(4, 2.0).unwrap();
        assert!((g4.map_radius(1.0 / 16.0).unwrap() - 8.0).abs() < 1e-13);
        assert!(g3().map_radius(0.0).is_err());
        assert!(g3().map_radius(1.5).is_err());
        assert!(g3().map_radius(-0.1).is_err());
    }

    #[test]
    fn gradient_scale_examples() {
        assert!((g3().gradient_scale(0.5).unwrap() - 4.0).abs() < 1e-14);
        assert!((g3().gradient_scale(1.0).unwrap() - 1.0).abs() < 1e-15);
        let g4 = ExteriorGeometry::new(4, 2.0).unwrap();
        assert!((g4.gradient_scale(0.25).unwrap() - 8.0).abs() < 1e-13);
        assert!(g3().gradient_scale(0.0).is_err());
    }

    #[test]
    fn weight_g_examples() {
        let w = RadialWeight::power(4.0, &g3()).unwrap();
        for t in [1e-6, 0.1, 0.5, 1.0] {
            assert_eq!(weight_g(t, &w, &g3()).unwrap(), 1.0);
        }
        let zero = RadialWeight::custom("0", 1.0, |_| 0.0);
        assert_eq!(weight_g(0.5, &zero, &g3()).unwrap(), 0.0);
        let geo = ExteriorGeometry::new(3, 2.0).unwrap();
        let w2 = RadialWeight::power(4.0, &geo).unwrap();
        assert!((weight_g(0.5, &w2, &geo).unwrap() - 0.25).abs() < 1e-15);
        // The generic path agrees with the power-law closed form.
        let e = RadialWeight::expression(Expr::parse("r^(-4)", &["r"]).unwrap(), 1.0);
        assert!((weight_g(0.5, &e, &geo).unwrap() - 0.25).abs() < 1e-14);
        assert!(weight_g(0.0, &w, &g3()).is_err());
    }

    #[test]
    fn weight_g_propagates_failure() {
        let bad = RadialWeight::custom("nan", 1.0, |_| f64::NAN);
        assert!(matches!(weight_g(0.5, &bad, &g3()), Err(Error::Evaluation(_))));
    }

    #[test]
    fn weight_g_slope_near_zero() {
        // For n = 3 the exponent is μ - 1; in general μ/(n-2) - 1.
        for (n, mu) in [(3u32, 0.25), (3, 0.5), (3, 1.0), (4, 0.5), (5, 1.0)] {
            let geom = ExteriorGeometry::new(n, 1.5).unwrap();
            let p = n as f64 + mu;
            let w = RadialWeight::custom("power", mu, move |r: f64| r.powf(-p));
            let (t1, t2) = (1e-6, 1e-3);
            let slope = (weight_g(t2, &w, &geom).unwrap().ln() - weight_g(t1, &w, &geom).unwrap().ln())
                / (t2.ln() - t1.ln());
            let expected = mu / (n as f64 - 2.0) - 1.0;
            assert!((slope - expected).abs() < 0.02, "n={n} mu={mu} slope={slope}");
        }
    }

    #[test]
    fn validate_decay() {
        let good = RadialWeight::expression(Expr::parse("1/(1+r)^5", &["r"]).unwrap(), 1.0);
        assert!(good.validate(&g3(), Some(1)).is_empty());
        let slow = RadialWeight::expression(Expr::parse("r^(-3.5)", &["r"]).unwrap(), 1.0);
        assert!(!slow.validate(&g3(), Some(1)).is_empty());
        let neg = RadialWeight::expression(Expr::parse("-r^(-5)", &["r"]).unwrap(), 1.0);
        assert_eq!(neg.validate(&g3(), Some(2))[0].assumption, "h≥0");
        assert!(RadialWeight::power(3.0, &g3()).is_err());
    }

    #[test]
    fn pull_back_examples() {
        let grid = Grid::uniform(4).unwrap();
        let constant = MeshFunction::from_fn(&grid, |_| 3.0, |_| 0.0);
        for row in pull_back_profile(&constant, &g3()).unwrap() {
            assert_eq!(row.w, 3.0);
            assert_eq!(row.grad, 0.0);
        }
        let linear = MeshFunction::from_fn(&grid, |t| t, |_| 1.0);
        let rows = pull_back_profile(&linear, &g3()).unwrap();
        assert!(rows.windows(2).all(|p| p[0].r < p[1].r));
        let half = rows.iter().find(|r| r.t == 0.5).unwrap();
        assert!((half.r - 2.0).abs() < 1e-14);
        assert_eq!(half.w, 0.5);
        assert!((half.grad - 0.25).abs() < 1e-15);
        let square = MeshFunction::from_fn(&grid, |t| t * t, |t| 2.0 * t);
        let first = pull_back_profile(&square, &g3()).unwrap()[0];
        assert_eq!((first.r, first.w, first.grad), (1.0, 1.0, 2.0));
        assert_eq!(first.dw_dr, -2.0);
        assert!(pull_back_profile(&MeshFunction::empty(), &g3()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(t in 1e-9f64..=1.0, n in 3u32..8, r0 in 0.1f64..10.0) {
            let geom = ExteriorGeometry::new(n, r0).unwrap();
            let back = geom.radius_to_t(geom.map_radius(t).unwrap()).unwrap();
            prop_assert!(((back - t) / t).abs() < 1e-12);
        }

        #[test]
        fn chain_rule(t in 1e-6f64..=1.0, n in 3u32..8, r0 in 0.1f64..10.0) {
            let geom = ExteriorGeometry::new(n, r0).unwrap();
            let r = geom.map_radius(t).unwrap();
            let nf = n as f64;
            let dt_dr = (2.0 - nf) / r0 * (r / r0).powf(1.0 - nf);
            let prod = geom.gradient_scale(t).unwrap() * dt_dr.abs();
            prop_assert!((prod - 1.0).abs() < 1e-12);
        }

        #[test]
        fn map_radius_decreasing(t1 in 1e-6f64..1.0, dt in 1e-6f64..1.0) {
            let t2 = (t1 + dt).min(1.0);
            prop_assume!(t2 > t1);
            let g = ExteriorGeometry::new(3, 1.0).unwrap();
            prop_assert!(g.map_radius(t1).unwrap() > g.map_radius(t2).unwrap());
        }
    }
}
