//! Checks of the sufficient conditions for one or two positive solutions and
//! for nonexistence, with explicit margins.
//!
//! Extrema of `f` over boxes are estimated on refined grids. For factored
//! envelopes the gradient variables drop out and the estimate is rigorous
//! up to grid bias; sampled envelopes cap the gradients and are flagged.

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::ConstantsReport;
use crate::error::{Error, Result};
use crate::estimate::{Estimate, Method};
use crate::nonlinearity::{EnvelopeForm, NonlinearityEnvelope};
use crate::problem::ProblemSpec;

/// Sizes `ρ`, `s` and optionally `θ` of the boxes for both components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxPair {
    pub rho: [f64; 2],
    pub s: [f64; 2],
    pub theta: Option<[f64; 2]>,
}

impl BoxPair {
    pub fn new(rho: [f64; 2], s: [f64; 2], theta: Option<[f64; 2]>) -> Result<Self> {
        let all = rho.iter().chain(&s).chain(theta.iter().flatten());
        for &x in all {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidParameter(format!("box sizes must be positive, got {x}")));
            }
        }
        Ok(Self { rho, s, theta })
    }
}

/// `[lo, hi]` in `u` and in `v`.
pub type Rect = [[f64; 2]; 2];

/// `Ω^ρ = [0, ρ₁] × [0, ρ₂]`.
pub fn omega_box(rho: [f64; 2]) -> Rect {
    [[0.0, rho[0]], [0.0, rho[1]]]
}

/// `A_i^s`: component `i` in `[s_i, s_i/a_i]`, the other in `[0, s_j/a_j]`.
pub fn a_box(i: usize, s: [f64; 2], a: [f64; 2]) -> Rect {
    let mut r = [[0.0, s[0] / a[0]], [0.0, s[1] / a[1]]];
    r[i][0] = s[i];
    r
}

const COARSE_2D: usize = 65;
const FINE_2D: usize = 129;
const COARSE_4D: usize = 9;
const FINE_4D: usize = 17;

fn axis(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |j| if j + 1 == n { hi } else { lo + (hi - lo) * j as f64 / (n - 1) as f64 })
}

/// Best of `sign·f` over an `n × n` grid on `rect`, with its location.
fn grid_best_2d<F>(f: &F, rect: &Rect, n: usize, sign: f64) -> Result<(f64, [f64; 2])>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let rows: Vec<(f64, [f64; 2])> = axis(rect[0][0], rect[0][1], n)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&u| {
            let mut best = (f64::NEG_INFINITY, [u, rect[1][0]]);
            for v in axis(rect[1][0], rect[1][1], n) {
                let y = sign * f(u, v);
                if !y.is_finite() {
                    return Err(Error::Evaluation(format!("base is not finite at (u, v) = ({u}, {v})")));
                }
                if y > best.0 {
                    best = (y, [u, v]);
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().fold((f64::NEG_INFINITY, [0.0, 0.0]), |a, b| if b.0 > a.0 { b } else { a }))
}

/// Refined grid extremum of `sign·f`: coarse and fine grids, then three
/// rounds of local 9×9 zooms. Returns (best, coarse best, location).
fn refined_2d<F>(f: &F, rect: &Rect, sign: f64) -> Result<(f64, f64, [f64; 2])>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let (coarse, _) = grid_best_2d(f, rect, COARSE_2D, sign)?;
    let (mut best, mut at) = grid_best_2d(f, rect, FINE_2D, sign)?;
    let mut h = [
        (rect[0][1] - rect[0][0]) / (FINE_2D - 1) as f64,
        (rect[1][1] - rect[1][0]) / (FINE_2D - 1) as f64,
    ];
    for _ in 0..3 {
        let local = [
            [(at[0] - h[0]).max(rect[0][0]), (at[0] + h[0]).min(rect[0][1])],
            [(at[1] - h[1]).max(rect[1][0]), (at[1] + h[1]).min(rect[1][1])],
        ];
        let (b, p) = grid_best_2d(f, &local, 9, sign)?;
        if b > best {
            best = b;
            at = p;
        }
        h = [h[0] / 4.0, h[1] / 4.0];
    }
    Ok((best, coarse, at))
}

/// Grid extremum of `sign·f` over `rect × [0, Z]²`. Returns (fine best, coarse best).
fn grid_4d(env: &NonlinearityEnvelope, rect: &Rect, cap: f64, sign: f64) -> Result<(f64, f64)> {
    let run = |n: usize| -> Result<f64> {
        let us: Vec<f64> = axis(rect[0][0], rect[0][1], n).collect();
        let best = us
            .par_iter()
            .map(|&u| {
                let mut best = f64::NEG_INFINITY;
                for v in axis(rect[1][0], rect[1][1], n) {
                    for z1 in axis(0.0, cap, n) {
                        for z2 in axis(0.0, cap, n) {
                            let y = sign * env.f.eval(u, v, z1, z2);
                            if !y.is_finite() {
                                return Err(Error::Evaluation(format!("f is not finite at ({u}, {v}, {z1}, {z2})")));
                            }
                            best = best.max(y);
                        }
                    }
                }
                Ok(best)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(best.into_iter().fold(f64::NEG_INFINITY, f64::max))
    };
    Ok((run(FINE_4D)?, run(COARSE_4D)?))
}

fn extremum(env: &NonlinearityEnvelope, rect: &Rect, sign: f64) -> Result<Estimate> {
    match &env.form {
        EnvelopeForm::Factored { base, q_lo, q_hi, .. } => {
            let q = if sign > 0.0 { *q_hi } else { *q_lo };
            let (best, coarse, _) = refined_2d(&|u, v| base.eval(u, v, 0.0, 0.0), rect, sign)?;
            let bias = (best - coarse).max(0.0);
            // sign·best is the grid extremum; push it outward by the bias.
            let value = q * sign * (best + bias);
            Ok(Estimate::new(value, q * bias, Method::Grid))
        }
        EnvelopeForm::Sampled { gradient_cap } => {
            let (fine, coarse) = grid_4d(env, rect, *gradient_cap, sign)?;
            let bias = (fine - coarse).max(0.0);
            Ok(Estimate::new(sign * (fine + bias), bias, Method::SampledGrid))
        }
    }
}

/// Upper estimate of `sup f` over `rect × [0, ∞)²`.
pub fn box_sup(env: &NonlinearityEnvelope, rect: &Rect) -> Result<Estimate> {
    extremum(env, rect, 1.0)
}

/// Lower estimate of `inf f` over `rect × [0, ∞)²`.
pub fn box_inf(env: &NonlinearityEnvelope, rect: &Rect) -> Result<Estimate> {
    extremum(env, rect, -1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = ">")]
    Greater,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Less => "<",
            Relation::Greater => ">",
        }
    }
}

/// One strict inequality `lhs < rhs` or `lhs > rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inequality {
    pub name: String,
    pub equation: usize,
    pub lhs: Estimate,
    pub relation: Relation,
    pub rhs: Estimate,
    /// `rhs - lhs` for `<`, `lhs - rhs` for `>`.
    pub margin: f64,
    pub status: Verdict,
    /// Point where the inequality was worst, for lattice checks.
    pub witness: Option<[f64; 4]>,
}

impl Inequality {
    fn new(name: String, equation: usize, lhs: Estimate, relation: Relation, rhs: Estimate) -> Self {
        let margin = match relation {
            Relation::Less => rhs.value - lhs.value,
            Relation::Greater => lhs.value - rhs.value,
        };
        let threshold = 1e-9f64.max(10.0 * (lhs.uncertainty + rhs.uncertainty));
        let status = if !(margin > 0.0) {
            Verdict::Fail
        } else if margin <= threshold {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        Self {
            name,
            equation,
            lhs,
            relation,
            rhs,
            margin,
            status,
            witness: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertifyMode {
    One,
    Two,
    NoneSmall,
    NoneLarge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantsEcho {
    pub c: f64,
    pub m: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub mode: CertifyMode,
    pub verdict: Verdict,
    /// False when some estimate ignores part of an unbounded domain.
    pub rigorous: bool,
    pub entries: Vec<Inequality>,
    pub constants: [ConstantsEcho; 2],
    pub boxes: Option<BoxPair>,
    pub notes: Vec<String>,
}

fn echo(c: &[ConstantsReport; 2]) -> [ConstantsEcho; 2] {
    [0, 1].map(|i| ConstantsEcho {
        c: c[i].c.value,
        m: c[i].m.value,
        d: c[i].d,
    })
}

fn assemble(
    mode: CertifyMode,
    entries: Vec<Inequality>,
    constants: &[ConstantsReport; 2],
    boxes: Option<BoxPair>,
    rigorous: bool,
    mut notes: Vec<String>,
) -> CertificateReport {
    let verdict = entries.iter().map(|e| e.status).max().unwrap_or(Verdict::Inconclusive);
    if !rigorous {
        notes.push("non-rigorous: sampled envelope or lattice search over an unbounded domain".into());
    }
    CertificateReport {
        mode,
        verdict,
        rigorous,
        entries,
        constants: echo(constants),
        boxes,
        notes,
    }
}

fn windows(spec: &ProblemSpec) -> [f64; 2] {
    [spec.equation(0).window.a(), spec.equation(1).window.a()]
}

fn times(k: &Estimate, x: f64) -> Estimate {
    Estimate::new(k.value * x, k.uncertainty * x, Method::Derived)
}

fn fmt_pair(x: [f64; 2]) -> String {
    format!("({}, {})", x[0], x[1])
}

fn sup_entry(spec: &ProblemSpec, k: &[ConstantsReport; 2], i: usize, r: [f64; 2], label: &str) -> Result<Inequality> {
    let lhs = box_sup(&spec.equation(i).envelope, &omega_box(r))?;
    Ok(Inequality::new(
        format!("sup f{n} on Ω^{label}{} < C{n}·{label}{n}", fmt_pair(r), n = i + 1),
        i + 1,
        lhs,
        Relation::Less,
        times(&k[i].c, r[i]),
    ))
}

fn inf_entry(spec: &ProblemSpec, k: &[ConstantsReport; 2], i: usize, r: [f64; 2], label: &str) -> Result<Inequality> {
    let lhs = box_inf(&spec.equation(i).envelope, &a_box(i, r, windows(spec)))?;
    Ok(Inequality::new(
        format!("inf f{n} on A{n}^{label}{} > M{n}·{label}{n}", fmt_pair(r), n = i + 1),
        i + 1,
        lhs,
        Relation::Greater,
        times(&k[i].m, r[i]),
    ))
}

fn rigorous(spec: &ProblemSpec) -> bool {
    spec.equations().iter().all(|e| e.envelope.is_rigorous())
}

/// One positive solution: `sup_{Ω^ρ} f_i < C_i ρ_i` and `inf_{A_i^s} f_i > M_i s_i`.
pub fn certify_one(spec: &ProblemSpec, boxes: &BoxPair) -> Result<CertificateReport> {
    certify_one_with(spec, &spec.constants()?, boxes)
}

pub fn certify_one_with(spec: &ProblemSpec, k: &[ConstantsReport; 2], boxes: &BoxPair) -> Result<CertificateReport> {
    for i in 0..2 {
        if !(boxes.rho[i] < boxes.s[i]) {
            return Err(Error::Precondition(format!(
                "one-solution boxes need ρ{n} < s{n}, got ρ{n} = {} and s{n} = {}",
                boxes.rho[i],
                boxes.s[i],
                n = i + 1
            )));
        }
    }
    let mut entries = Vec::new();
    for i in 0..2 {
        entries.push(sup_entry(spec, k, i, boxes.rho, "ρ")?);
        entries.push(inf_entry(spec, k, i, boxes.s, "s")?);
    }
    Ok(assemble(CertifyMode::One, entries, k, Some(*boxes), rigorous(spec), Vec::new()))
}

/// Two positive solutions: `inf_{A_i^ρ} f_i > M_i ρ_i`, `sup_{Ω^s} f_i < C_i s_i`
/// and `inf_{A_i^θ} f_i > M_i θ_i`, with `ρ_i/a_i < s_i < θ_i`.
pub fn certify_two(spec: &ProblemSpec, boxes: &BoxPair) -> Result<CertificateReport> {
    certify_two_with(spec, &spec.constants()?, boxes)
}

pub fn certify_two_with(spec: &ProblemSpec, k: &[ConstantsReport; 2], boxes: &BoxPair) -> Result<CertificateReport> {
    let theta = boxes
        .theta
        .ok_or_else(|| Error::Precondition("two-solution mode needs θ".into()))?;
    let a = windows(spec);
    for i in 0..2 {
        if !(boxes.rho[i] / a[i] < boxes.s[i] && boxes.s[i] < theta[i]) {
            return Err(Error::Precondition(format!(
                "two-solution boxes need ρ{n}/a{n} < s{n} < θ{n}, got {} / {} < {} < {}",
                boxes.rho[i],
                a[i],
                boxes.s[i],
                theta[i],
                n = i + 1
            )));
        }
    }
    let mut entries = Vec::new();
    for i in 0..2 {
        entries.push(inf_entry(spec, k, i, boxes.rho, "ρ")?);
        entries.push(sup_entry(spec, k, i, boxes.s, "s")?);
        entries.push(inf_entry(spec, k, i, theta, "θ")?);
    }
    let notes = vec!["box ordering checked as ρ_i/a_i < s_i < θ_i, with a_i the window start".into()];
    Ok(assemble(CertifyMode::Two, entries, k, Some(*boxes), rigorous(spec), notes))
}

/// Test lattice for the nonexistence conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lattice {
    /// Values taken by `u` and `v`; zero is always added for the other component.
    pub w: Vec<f64>,
    pub z: Vec<f64>,
}

impl Default for Lattice {
    fn default() -> Self {
        Self {
            w: (0..=48).map(|k| 10f64.powf(-4.0 + k as f64 / 8.0)).collect(),
            z: vec![0.0, 0.1, 1.0, 10.0, 100.0],
        }
    }
}

fn lattice_entry(spec: &ProblemSpec, k: &[ConstantsReport; 2], i: usize, small: bool, lattice: &Lattice) -> Inequality {
    let env = &spec.equation(i).envelope;
    let kk = if small { k[i].c.value } else { k[i].m.value };
    let mut ws = lattice.w.clone();
    ws.push(0.0);
    // Worst value of f / (K w) relative to 1 (largest for <, smallest for >).
    let mut worst = if small { f64::NEG_INFINITY } else { f64::INFINITY };
    let mut witness = [0.0; 4];
    for &wi in &lattice.w {
        for &wj in &ws {
            for &z1 in &lattice.z {
                for &z2 in &lattice.z {
                    let (u, v) = if i == 0 { (wi, wj) } else { (wj, wi) };
                    let ratio = env.f.eval(u, v, z1, z2) / (kk * wi);
                    let worse = if small { !(ratio <= worst) } else { !(ratio >= worst) };
                    if worse {
                        worst = ratio;
                        witness = [u, v, z1, z2];
                    }
                }
            }
        }
    }
    let (name, relation) = if small {
        (format!("max f{n}/(C{n}·w{n}) on lattice < 1", n = i + 1), Relation::Less)
    } else {
        (format!("min f{n}/(M{n}·w{n}) on lattice > 1", n = i + 1), Relation::Greater)
    };
    let mut e = Inequality::new(
        name,
        i + 1,
        Estimate::new(worst, 0.0, Method::Grid),
        relation,
        Estimate::exact(1.0),
    );
    e.witness = Some(witness);
    e
}

/// `q_hi · sup(base/w_i) < C_i` or `q_lo · inf(base/w_i) > M_i`, when declared.
fn analytic_entry(spec: &ProblemSpec, k: &[ConstantsReport; 2], i: usize, small: bool) -> Option<Inequality> {
    let EnvelopeForm::Factored {
        q_lo,
        q_hi,
        ratio_sup,
        ratio_inf,
        ..
    } = &spec.equation(i).envelope.form
    else {
        return None;
    };
    let n = i + 1;
    if small {
        let r = (*ratio_sup)?;
        Some(Inequality::new(
            format!("q_hi·sup(base/w{n}) < C{n}"),
            n,
            Estimate::exact(q_hi * r),
            Relation::Less,
            k[i].c,
        ))
    } else {
        let r = (*ratio_inf)?;
        Some(Inequality::new(
            format!("q_lo·inf(base/w{n}) > M{n}"),
            n,
            Estimate::exact(q_lo * r),
            Relation::Greater,
            k[i].m,
        ))
    }
}

/// Nonexistence of positive solutions: `f_i < C_i w_i` (small) or `f_i > M_i w_i` (large).
pub fn certify_none(spec: &ProblemSpec, mode: CertifyMode) -> Result<CertificateReport> {
    certify_none_with(spec, &spec.constants()?, mode, &Lattice::default())
}

pub fn certify_none_with(
    spec: &ProblemSpec,
    k: &[ConstantsReport; 2],
    mode: CertifyMode,
    lattice: &Lattice,
) -> Result<CertificateReport> {
    let small = match mode {
        CertifyMode::NoneSmall => true,
        CertifyMode::NoneLarge => false,
        _ => return Err(Error::Precondition("nonexistence checks need mode none-small or none-large".into())),
    };
    let mut entries = Vec::new();
    let mut analytic = 0;
    for i in 0..2 {
        entries.push(lattice_entry(spec, k, i, small, lattice));
        if let Some(e) = analytic_entry(spec, k, i, small) {
            entries.push(e);
            analytic += 1;
        }
    }
    let mut notes = Vec::new();
    if analytic < 2 {
        notes.push("lattice check only: no counterexample found does not prove the condition".into());
    }
    Ok(assemble(mode, entries, k, None, analytic == 2, notes))
}

/// Log grid searched by [`sweep_two`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSettings {
    pub lo: f64,
    pub hi: f64,
    pub per_decade: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            lo: 1e-4,
            hi: 1e4,
            per_decade: 8,
        }
    }
}

/// Searches equal-component boxes `ρ = (r, r)`, `s = (σ, σ)`, `θ = (τ, τ)` on a
/// log grid for a passing two-solution certificate.
pub fn sweep_two(spec: &ProblemSpec, settings: &SweepSettings) -> Result<Option<CertificateReport>> {
    let k = spec.constants()?;
    let decades = (settings.hi / settings.lo).log10();
    let n = (decades * settings.per_decade as f64).round() as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|j| settings.lo * 10f64.powf(j as f64 / settings.per_decade as f64))
        .collect();
    let a = windows(spec);
    let ok = |e: Result<Inequality>| e.map(|x| x.status == Verdict::Pass);
    let flags = grid
        .par_iter()
        .map(|&x| -> Result<(bool, bool)> {
            let p = [x, x];
            let inf_ok = ok(inf_entry(spec, &k, 0, p, "ρ"))? && ok(inf_entry(spec, &k, 1, p, "ρ"))?;
            let sup_ok = ok(sup_entry(spec, &k, 0, p, "s"))? && ok(sup_entry(spec, &k, 1, p, "s"))?;
            Ok((inf_ok, sup_ok))
        })
        .collect::<Result<Vec<_>>>()?;
    let amin = a[0].min(a[1]);
    for (js, &sigma) in grid.iter().enumerate() {
        if !flags[js].1 {
            continue;
        }
        let rho = (0..js).rev().find(|&j| flags[j].0 && grid[j] / amin < sigma);
        let theta = (js + 1..grid.len()).find(|&j| flags[j].0);
        if let (Some(jr), Some(jt)) = (rho, theta) {
            let boxes = BoxPair::new([grid[jr]; 2], [sigma; 2], Some([grid[jt]; 2]))?;
            let report = certify_two_with(spec, &k, &boxes)?;
            if report.verdict == Verdict::Pass {
                return Ok(Some(report));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::nonlinearity::Nonlinearity;

    fn parse(src: &str) -> Nonlinearity {
        Nonlinearity::from_expr(Expr::parse(src, &Nonlinearity::VARS).unwrap())
    }

    fn factored(f: &str, base: &str, lo: f64, hi: f64) -> NonlinearityEnvelope {
        NonlinearityEnvelope::factored(parse(f), parse(base), lo, hi)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-10 * b.abs().max(1.0)
    }

    #[test]
    fn box_sup_examples() {
        let f1 = factored("(2 - sin(z1^2 + z2^2)) * u^5", "u^5", 1.0, 3.0);
        let e = box_sup(&f1, &omega_box([1.0 / 3.0, 0.5])).unwrap();
        assert!(close(e.value, 1.0 / 81.0) && e.uncertainty == 0.0);
        let zero = factored("0", "0", 1.0, 1.0);
        assert_eq!(box_sup(&zero, &omega_box([1.0, 1.0])).unwrap().value, 0.0);
        let lin = factored("u + v", "u + v", 1.0, 1.0);
        assert!(close(box_sup(&lin, &omega_box([1.0, 2.0])).unwrap().value, 3.0));
    }

    #[test]
    fn box_inf_examples() {
        let f1 = factored("(2 - sin(z1^2 + z2^2)) * u^5", "u^5", 1.0, 3.0);
        let a = [0.25, 0.25];
        assert!(close(box_inf(&f1, &a_box(0, [2.0, 3.0], a)).unwrap().value, 32.0));
        let c = factored("7", "1", 7.0, 7.0);
        assert!(close(box_inf(&c, &a_box(0, [2.0, 3.0], a)).unwrap().value, 7.0));
        let uv = factored("u * v", "u * v", 1.0, 1.0);
        assert_eq!(box_inf(&uv, &a_box(1, [2.0, 3.0], a)).unwrap().value, 0.0);
    }

    #[test]
    fn box_shapes() {
        assert_eq!(a_box(0, [2.0, 3.0], [0.25, 0.5]), [[2.0, 8.0], [0.0, 6.0]]);
        assert_eq!(a_box(1, [2.0, 3.0], [0.25, 0.5]), [[0.0, 8.0], [3.0, 6.0]]);
    }

    #[test]
    fn interior_maximum_is_refined() {
        // peak at (0.3, 0.7), off the grid lines
        let f = factored("1 - (u - 0.3)^2 - (v - 0.7)^2 + 1", "2 - (u - 0.3)^2 - (v - 0.7)^2", 1.0, 1.0);
        let e = box_sup(&f, &omega_box([1.0, 1.0])).unwrap();
        assert!(e.value >= 2.0 && e.value - 2.0 < 1e-4 && e.uncertainty < 1e-4);
    }

    #[test]
    fn scaling_covariance() {
        let f = factored("(1 + sin(z1)^2) * (u^2 + v)", "u^2 + v", 1.0, 2.0);
        let rect = omega_box([1.5, 0.7]);
        let lam = 3.7;
        let a = box_sup(&f, &rect).unwrap().value;
        let b = box_sup(&f.scaled(lam), &rect).unwrap().value;
        assert!(close(b, lam * a));
    }

    #[test]
    fn sampled_mode_is_flagged() {
        let f = NonlinearityEnvelope::sampled(parse("u + z1 / (1 + z1)"), 10.0);
        let e = box_sup(&f, &omega_box([1.0, 1.0])).unwrap();
        assert_eq!(e.method, Method::SampledGrid);
        assert!(e.value >= 1.0 + 10.0 / 11.0 - 1e-12);
    }

    #[test]
    fn unbounded_base_errors() {
        let f = factored("1 / u", "1 / u", 1.0, 1.0);
        assert!(box_sup(&f, &omega_box([1.0, 1.0])).is_err());
    }

    #[test]
    fn margins_and_status() {
        let e = Inequality::new("x".into(), 1, Estimate::exact(1.0), Relation::Less, Estimate::exact(2.0));
        assert_eq!((e.margin, e.status), (1.0, Verdict::Pass));
        let e = Inequality::new("x".into(), 1, Estimate::exact(2.0), Relation::Less, Estimate::exact(2.0));
        assert_eq!(e.status, Verdict::Fail);
        let e = Inequality::new(
            "x".into(),
            1,
            Estimate::new(2.0, 0.1, Method::Grid),
            Relation::Greater,
            Estimate::exact(1.5),
        );
        assert_eq!(e.status, Verdict::Inconclusive);
    }
}
