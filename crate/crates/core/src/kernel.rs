//! Closed forms for the local Robin problem `-w'' = 0`, `w(0) = ·`,
//! `c w(1) + d w'(1) = ·`: the boundary-datum solutions `γ`, `δ`, the Green's
//! kernel `k(t, s)`, its `t`-derivative and the majorant `φ(s)`.
//!
//! [`RobinBC`] methods evaluate the formulas without domain checks; the free
//! functions are the checked entry points.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::radial::ExteriorGeometry;

/// Coefficients `(c, d)` of `c w(1) + d w'(1)` on the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobinBC {
    c: f64,
    d: f64,
    /// `d̃` from the PDE side when the coefficient was converted.
    d_tilde: Option<f64>,
}

impl RobinBC {
    pub fn new(c: f64, d: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("Robin coefficient c = {c} must be ≥ 0")));
        }
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::InvalidParameter(format!("Robin coefficient d = {d} must be ≥ 0")));
        }
        if c + d <= 0.0 {
            return Err(Error::InvalidParameter("Robin coefficients need c + d > 0".into()));
        }
        Ok(Self { c, d, d_tilde: None })
    }

    /// From the exterior-domain condition `c u + d̃ ∂u/∂r` at `|x| = r0`:
    /// `d = r0/(2-n) · d̃`, which is nonnegative only for `d̃ ≤ 0`.
    pub fn from_pde(c: f64, d_tilde: f64, geom: &ExteriorGeometry) -> Result<Self> {
        if d_tilde > 0.0 {
            return Err(Error::InvalidParameter(format!(
                "PDE-side coefficient d̃ = {d_tilde} must be ≤ 0"
            )));
        }
        // `+ 0.0` normalises the -0.0 produced by d̃ = 0.
        let d = geom.r0() / (2.0 - geom.n() as f64) * d_tilde + 0.0;
        let mut bc = Self::new(c, d)?;
        bc.d_tilde = Some(d_tilde);
        Ok(bc)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn d_tilde(&self) -> Option<f64> {
        self.d_tilde
    }

    fn ratio(&self) -> f64 {
        self.c / (self.d + self.c)
    }

    /// `‖δ‖_∞ = 1/(c + d)`.
    pub fn delta_sup(&self) -> f64 {
        1.0 / (self.d + self.c)
    }

    /// `γ(t) = 1 - c t/(c + d)`.
    pub fn gamma(&self, t: f64) -> f64 {
        1.0 - self.ratio() * t
    }

    pub fn gamma_prime(&self) -> f64 {
        -self.ratio()
    }

    /// `δ(t) = t/(c + d)`.
    pub fn delta(&self, t: f64) -> f64 {
        t * self.delta_sup()
    }

    pub fn delta_prime(&self) -> f64 {
        self.delta_sup()
    }

    /// `k(t, s)`; the diagonal `s = t` uses the `s ≤ t` branch.
    pub fn k(&self, t: f64, s: f64) -> f64 {
        if s <= t {
            s * (1.0 - self.ratio() * t)
        } else {
            t * (1.0 - self.ratio() * s)
        }
    }

    /// `∂k/∂t` off the diagonal.
    pub fn k_dt(&self, t: f64, s: f64) -> f64 {
        if s < t {
            -self.ratio() * s
        } else {
            1.0 - self.ratio() * s
        }
    }

    /// `φ(s) = s (1 - c s/(c + d))`, the bound `k(t, s) ≤ φ(s)`.
    pub fn phi(&self, s: f64) -> f64 {
        s * (1.0 - self.ratio() * s)
    }
}

fn unit(what: &'static str, x: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::Domain {
            what,
            value: x,
            domain: "[0, 1]",
        })
    }
}

pub fn gamma(t: f64, bc: &RobinBC) -> Result<f64> {
    Ok(bc.gamma(unit("t", t)?))
}

pub fn delta(t: f64, bc: &RobinBC) -> Result<f64> {
    Ok(bc.delta(unit("t", t)?))
}

pub fn green_k(t: f64, s: f64, bc: &RobinBC) -> Result<f64> {
    Ok(bc.k(unit("t", t)?, unit("s", s)?))
}

/// Errors at the jump `t = s`.
pub fn green_k_dt(t: f64, s: f64, bc: &RobinBC) -> Result<f64> {
    let (t, s) = (unit("t", t)?, unit("s", s)?);
    if t == s {
        return Err(Error::Domain {
            what: "t",
            value: t,
            domain: "[0, 1] minus the jump point t = s",
        });
    }
    Ok(bc.k_dt(t, s))
}

pub fn phi(s: f64, bc: &RobinBC) -> Result<f64> {
    Ok(bc.phi(unit("s", s)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bc(c: f64, d: f64) -> RobinBC {
        RobinBC::new(c, d).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-15 * b.abs().max(1.0)
    }

    #[test]
    fn construction() {
        assert!(RobinBC::new(0.0, 0.0).is_err());
        assert!(RobinBC::new(-1.0, 1.0).is_err());
        assert!(RobinBC::new(1.0, -1.0).is_err());
        let geom = ExteriorGeometry::new(3, 1.0).unwrap();
        let pde = RobinBC::from_pde(2.0, -4.0, &geom).unwrap();
        assert_eq!((pde.c(), pde.d(), pde.d_tilde()), (2.0, 4.0, Some(-4.0)));
        assert!(RobinBC::from_pde(2.0, 1.0, &geom).is_err());
        let g5 = ExteriorGeometry::new(5, 3.0).unwrap();
        assert!(close(RobinBC::from_pde(1.0, -0.5, &g5).unwrap().d(), 0.5));
        assert_eq!(RobinBC::from_pde(1.0, 0.0, &geom).unwrap().d(), 0.0);
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(0.0, &bc(2.0, 4.0)).unwrap(), 1.0);
        assert!(close(gamma(0.25, &bc(2.0, 4.0)).unwrap(), 11.0 / 12.0));
        assert_eq!(gamma(1.0, &bc(1.0, 0.0)).unwrap(), 0.0);
        assert!(gamma(1.1, &bc(1.0, 0.0)).is_err());
    }

    #[test]
    fn gamma_solves_its_bvp() {
        let b = bc(3.0, 0.2);
        assert!(close(b.c() * b.gamma(1.0) + b.d() * b.gamma_prime(), 0.0));
        assert!(close(b.c() * b.delta(1.0) + b.d() * b.delta_prime(), 1.0));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(0.0, &bc(2.0, 4.0)).unwrap(), 0.0);
        assert!(close(delta(0.5, &bc(2.0, 4.0)).unwrap(), 1.0 / 12.0));
        assert_eq!(delta(1.0, &bc(1.0, 0.0)).unwrap(), 1.0);
    }

    #[test]
    fn green_examples() {
        assert!(close(green_k(0.5, 0.25, &bc(2.0, 4.0)).unwrap(), 5.0 / 24.0));
        for s in [0.0, 0.3, 1.0] {
            assert_eq!(green_k(0.0, s, &bc(2.0, 4.0)).unwrap(), 0.0);
        }
        assert_eq!(green_k(0.25, 0.5, &bc(0.0, 1.0)).unwrap(), 0.25);
        assert!(green_k(0.5, -0.1, &bc(0.0, 1.0)).is_err());
        // continuity across the diagonal
        let b = bc(2.0, 4.0);
        let t = 0.37;
        assert!((b.k(t, t) - b.k(t, t + 1e-12)).abs() < 1e-11);
    }

    #[test]
    fn green_dt_examples() {
        assert!(close(green_k_dt(0.75, 0.25, &bc(2.0, 4.0)).unwrap(), -1.0 / 12.0));
        assert!(close(green_k_dt(0.25, 0.75, &bc(2.0, 4.0)).unwrap(), 0.75));
        assert_eq!(green_k_dt(0.5, 0.25, &bc(0.0, 1.0)).unwrap(), 0.0);
        assert!(green_k_dt(0.5, 0.5, &bc(0.0, 1.0)).is_err());
    }

    #[test]
    fn phi_examples() {
        // (1/2)(1 - (2/6)(1/2)) = 5/12
        assert!(close(phi(0.5, &bc(2.0, 4.0)).unwrap(), 5.0 / 12.0));
        assert_eq!(phi(0.0, &bc(2.0, 4.0)).unwrap(), 0.0);
        assert_eq!(phi(1.0, &bc(1.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let b = bc(2.0, 4.0);
        let h = 1e-6;
        for i in 1..20 {
            for j in 1..20 {
                let (t, s) = (i as f64 / 20.0, j as f64 / 20.0 + 0.013);
                if (t - s).abs() < 10.0 * h {
                    continue;
                }
                let fd = (b.k(t + h, s) - b.k(t - h, s)) / (2.0 * h);
                assert!((fd - b.k_dt(t, s)).abs() < 1e-6);
                assert!(b.k_dt(t, s).abs() <= 1.0);
            }
        }
    }
}
