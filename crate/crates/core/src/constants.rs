//! The cone constants `C` and `M` of one equation.
//!
//! ```text
//! C⁻¹ = (1/D)·{[(1-β[δ]) + ‖δ‖β[γ]]·∫₀¹α[k]g + [α[δ] + ‖δ‖(1-α[γ])]·∫₀¹β[k]g} + sup_t ∫₀¹ k(t,s)g(s) ds
//! M⁻¹ = (a/D)·{[(1-β[δ]) + ‖δ‖β[γ]]·∫ₐᵇα[k]g + [α[δ] + ‖δ‖(1-α[γ])]·∫ₐᵇβ[k]g} + inf_{t∈[a,b]} ∫ₐᵇ k(t,s)g(s) ds
//! ```

use serde::Serialize;

use crate::error::{Error, Result, Violation};
use crate::estimate::{Estimate, Method};
use crate::kernel::RobinBC;
use crate::nonlocal::{FunctionalTable, NonlocalFunctional};
use crate::quadrature::{inf_parametric, integrate_with_breaks, sup_parametric, QuadSettings};

/// `[a, b] ⊂ (0, 1)` with `a + b < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeWindow {
    a: f64,
    b: f64,
}

impl ConeWindow {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(0.0 < a && a < b && b < 1.0 && a + b < 1.0) {
            return Err(Error::Validation(vec![Violation::new(
                None,
                "0<a<b<1, a+b<1",
                format!("window [{a}, {b}]"),
            )]));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// An extremum of `t ↦ ∫ k(t,s)g(s) ds` and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocatedEstimate {
    pub estimate: Estimate,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub c: Estimate,
    pub m: Estimate,
    pub d: f64,
    pub table: FunctionalTable,
    pub delta_sup: f64,
    pub window: ConeWindow,
    /// `∫₀¹ α[k(·,s)] g(s) ds`.
    pub alpha_k: Estimate,
    /// `∫₀¹ β[k(·,s)] g(s) ds`.
    pub beta_k: Estimate,
    /// `sup_{t∈[0,1]} ∫₀¹ k(t,s) g(s) ds`.
    pub sup_k: LocatedEstimate,
    /// `∫ₐᵇ α[k(·,s)] g(s) ds`.
    pub window_alpha_k: Estimate,
    /// `∫ₐᵇ β[k(·,s)] g(s) ds`.
    pub window_beta_k: Estimate,
    /// `inf_{t∈[a,b]} ∫ₐᵇ k(t,s) g(s) ds`.
    pub inf_k: LocatedEstimate,
    /// `C⁻¹`.
    pub bracket_c: Estimate,
    /// `M⁻¹`.
    pub bracket_m: Estimate,
    /// `C < M`, expected for nondegenerate problems.
    pub c_below_m: bool,
}

/// Coefficients of `∫α[k]g` and `∫β[k]g` inside both brackets.
fn weights(table: &FunctionalTable, bc: &RobinBC) -> (f64, f64) {
    let ds = bc.delta_sup();
    (
        (1.0 - table.b_delta) + ds * table.b_gamma,
        table.a_delta + ds * (1.0 - table.a_gamma),
    )
}

fn slice_integral<G>(
    f: &NonlocalFunctional,
    bc: &RobinBC,
    g: &G,
    lo: f64,
    hi: f64,
    settings: &QuadSettings,
) -> Result<Estimate>
where
    G: Fn(f64) -> Result<f64>,
{
    if f.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let slice = f.kernel_slice(*bc);
    let q = integrate_with_breaks(|s| Ok(slice.eval(s) * g(s)?), lo, hi, &f.breakpoints(), settings)?;
    Ok(Estimate::new(q.value, q.error, Method::Quadrature))
}

fn kernel_integral<G>(bc: &RobinBC, g: &G, t: f64, lo: f64, hi: f64, settings: &QuadSettings) -> Result<(f64, f64)>
where
    G: Fn(f64) -> Result<f64>,
{
    let q = integrate_with_breaks(|s| Ok(bc.k(t, s) * g(s)?), lo, hi, &[t], settings)?;
    Ok((q.value, q.error))
}

fn check_bracket(name: &str, b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(vec![Violation::new(
            None,
            format!("{name}>0"),
            format!("{name} = {b}"),
        )]))
    }
}

struct Part {
    alpha_k: Estimate,
    beta_k: Estimate,
    extremum: LocatedEstimate,
    bracket: Estimate,
}

fn c_part<G>(
    bc: &RobinBC,
    table: &FunctionalTable,
    alpha: &NonlocalFunctional,
    beta: &NonlocalFunctional,
    g: &G,
    settings: &QuadSettings,
) -> Result<Part>
where
    G: Fn(f64) -> Result<f64> + Sync,
{
    let (wa, wb) = weights(table, bc);
    let alpha_k = slice_integral(alpha, bc, g, 0.0, 1.0, settings)?;
    let beta_k = slice_integral(beta, bc, g, 0.0, 1.0, settings)?;
    let ext = sup_parametric(|t| Ok(kernel_integral(bc, g, t, 0.0, 1.0, settings)?.0), 0.0, 1.0, settings)?;
    let (_, ext_err) = kernel_integral(bc, g, ext.t, 0.0, 1.0, settings)?;
    let d = table.det;
    let value = (wa * alpha_k.value + wb * beta_k.value) / d + ext.value;
    let err = (wa.abs() * alpha_k.uncertainty + wb.abs() * beta_k.uncertainty) / d + ext_err;
    check_bracket("C⁻¹", value)?;
    Ok(Part {
        alpha_k,
        beta_k,
        extremum: LocatedEstimate {
            estimate: Estimate::new(ext.value, ext_err, Method::ScanQuadrature),
            t: ext.t,
        },
        bracket: Estimate::new(value, err, Method::Derived),
    })
}

fn m_part<G>(
    bc: &RobinBC,
    table: &FunctionalTable,
    alpha: &NonlocalFunctional,
    beta: &NonlocalFunctional,
    g: &G,
    window: &ConeWindow,
    settings: &QuadSettings,
) -> Result<Part>
where
    G: Fn(f64) -> Result<f64> + Sync,
{
    let (a, b) = (window.a, window.b);
    let (wa, wb) = weights(table, bc);
    let alpha_k = slice_integral(alpha, bc, g, a, b, settings)?;
    let beta_k = slice_integral(beta, bc, g, a, b, settings)?;
    let ext = inf_parametric(|t| Ok(kernel_integral(bc, g, t, a, b, settings)?.0), a, b, settings)?;
    let (_, ext_err) = kernel_integral(bc, g, ext.t, a, b, settings)?;
    let d = table.det;
    let value = a * (wa * alpha_k.value + wb * beta_k.value) / d + ext.value;
    let err = a * (wa.abs() * alpha_k.uncertainty + wb.abs() * beta_k.uncertainty) / d + ext_err;
    check_bracket("M⁻¹", value)?;
    Ok(Part {
        alpha_k,
        beta_k,
        extremum: LocatedEstimate {
            estimate: Estimate::new(ext.value, ext_err, Method::ScanQuadrature),
            t: ext.t,
        },
        bracket: Estimate::new(value, err, Method::Derived),
    })
}

/// Reciprocal of a bracket; the uncertainty is propagated to first order.
fn reciprocal(b: &Estimate) -> Estimate {
    let v = 1.0 / b.value;
    Estimate::new(v, v * v * b.uncertainty, Method::Derived)
}

pub fn compute_c<G>(
    bc: &RobinBC,
    table: &FunctionalTable,
    alpha: &NonlocalFunctional,
    beta: &NonlocalFunctional,
    g: &G,
    settings: &QuadSettings,
) -> Result<f64>
where
    G: Fn(f64) -> Result<f64> + Sync,
{
    Ok(reciprocal(&c_part(bc, table, alpha, beta, g, settings)?.bracket).value)
}

pub fn compute_m<G>(
    bc: &RobinBC,
    table: &FunctionalTable,
    alpha: &NonlocalFunctional,
    beta: &NonlocalFunctional,
    g: &G,
    window: &ConeWindow,
    settings: &QuadSettings,
) -> Result<f64>
where
    G: Fn(f64) -> Result<f64> + Sync,
{
    Ok(reciprocal(&m_part(bc, table, alpha, beta, g, window, settings)?.bracket).value)
}

/// Both constants with every intermediate quantity.
pub fn compute_constants<G>(
    bc: &RobinBC,
    table: &FunctionalTable,
    alpha: &NonlocalFunctional,
    beta: &NonlocalFunctional,
    g: &G,
    window: &ConeWindow,
    settings: &QuadSettings,
) -> Result<ConstantsReport>
where
    G: Fn(f64) -> Result<f64> + Sync,
{
    settings.validate()?;
    let cp = c_part(bc, table, alpha, beta, g, settings)?;
    let mp = m_part(bc, table, alpha, beta, g, window, settings)?;
    let c = reciprocal(&cp.bracket);
    let m = reciprocal(&mp.bracket);
    Ok(ConstantsReport {
        c,
        m,
        d: table.det,
        table: *table,
        delta_sup: bc.delta_sup(),
        window: *window,
        alpha_k: cp.alpha_k,
        beta_k: cp.beta_k,
        sup_k: cp.extremum,
        window_alpha_k: mp.alpha_k,
        window_beta_k: mp.beta_k,
        inf_k: mp.extremum,
        bracket_c: cp.bracket,
        bracket_m: mp.bracket,
        c_below_m: c.value < m.value,
    })
}
