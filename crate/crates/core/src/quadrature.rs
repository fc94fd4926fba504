//! Adaptive Gauss-Kronrod integration on sub-intervals of `[0, 1]`, robust to
//! an integrable power singularity at the left endpoint, plus grid-and-refine
//! extrema of `t`-parameterized integrals.
//!
//! The panel touching the left endpoint is pre-split on the graded sub-mesh
//! `lo + (x - lo)(j/J)^p`, after which the interval with the largest error
//! estimate is bisected until the global tolerance is met. Summation runs in
//! left-to-right order so results are reproducible bit for bit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections of any initial panel.
    pub max_depth: u32,
    /// Grading exponent of the sub-mesh next to the left endpoint.
    pub grading_exponent: f64,
    /// Number of scan nodes used by [`sup_parametric`] / [`inf_parametric`].
    pub scan_nodes: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_depth: 200,
            grading_exponent: 3.0,
            scan_nodes: 513,
        }
    }
}

impl QuadSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter("quadrature tolerances must be positive".into()));
        }
        if self.max_depth < 10 {
            return Err(Error::InvalidParameter(format!("max_depth = {} must be ≥ 10", self.max_depth)));
        }
        if !(self.grading_exponent >= 1.0) {
            return Err(Error::InvalidParameter("grading exponent must be ≥ 1".into()));
        }
        if self.scan_nodes < 513 {
            return Err(Error::InvalidParameter(format!("scan_nodes = {} must be ≥ 513", self.scan_nodes)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Largest error first; ties broken by position for determinism.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<F>(f: &F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x)?;
        let f2 = f(center + x)?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    if !value.is_finite() {
        return Err(Error::Evaluation(format!("non-finite integrand on [{a}, {b}]")));
    }
    Ok((value, err))
}

/// `∫_lo^hi f`, with a possible integrable singularity at `lo` only.
pub fn integrate<F>(f: F, lo: f64, hi: f64, settings: &QuadSettings) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<f64>,
{
    integrate_with_breaks(f, lo, hi, &[], settings)
}

/// As [`integrate`], with known kinks of the integrand passed as `breaks`.
pub fn integrate_with_breaks<F>(f: F, lo: f64, hi: f64, breaks: &[f64], settings: &QuadSettings) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("integration bounds [{lo}, {hi}] must be finite")));
    }
    if lo == hi {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            intervals: 0,
        });
    }
    if lo > hi {
        return Err(Error::InvalidParameter(format!("integration bounds need lo < hi, got [{lo}, {hi}]")));
    }

    let mut points: Vec<f64> = vec![lo];
    points.extend(breaks.iter().copied().filter(|&x| x > lo && x < hi));
    points.push(hi);
    points.sort_by(f64::total_cmp);
    points.dedup();

    // Graded sub-mesh on the first panel.
    const J: usize = 8;
    let first_hi = points[1];
    let graded: Vec<f64> = (1..J)
        .map(|j| lo + (first_hi - lo) * (j as f64 / J as f64).powf(settings.grading_exponent))
        .collect();
    points.splice(1..1, graded);

    let mut heap = BinaryHeap::new();
    let mut done: Vec<Panel> = Vec::new();
    let mut evaluations = 0usize;
    let mut total_err = 0.0;
    let mut total_val = 0.0;
    for w in points.windows(2) {
        let (value, error) = gk15(&f, w[0], w[1])?;
        evaluations += 15;
        total_err += error;
        total_val += value;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
            depth: 0,
        });
    }

    const MAX_PANELS: usize = 20_000;
    loop {
        let tol = settings.abs_tol.max(settings.rel_tol * total_val.abs());
        if total_err <= tol {
            break;
        }
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.a + p.b);
        if p.depth >= settings.max_depth || mid <= p.a || mid >= p.b || heap.len() + done.len() >= MAX_PANELS {
            done.push(p);
            continue;
        }
        let (v1, e1) = gk15(&f, p.a, mid)?;
        let (v2, e2) = gk15(&f, mid, p.b)?;
        evaluations += 30;
        total_val += v1 + v2 - p.value;
        total_err += e1 + e2 - p.error;
        for (a, b, value, error) in [(p.a, mid, v1, e1), (mid, p.b, v2, e2)] {
            heap.push(Panel {
                a,
                b,
                value,
                error,
                depth: p.depth + 1,
            });
        }
    }

    done.extend(heap);
    done.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: f64 = done.iter().map(|p| p.value).sum();
    let error: f64 = done.iter().map(|p| p.error).sum();
    let tol = settings.abs_tol.max(settings.rel_tol * value.abs());
    if error > tol {
        return Err(Error::Quadrature { lo, hi, value, error });
    }
    Ok(QuadResult {
        value,
        error,
        evaluations,
        intervals: done.len(),
    })
}

/// Location and value of a scanned extremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub t: f64,
    pub value: f64,
    /// Number of scan nodes before refinement.
    pub scan_nodes: usize,
}

/// Heuristic `sup_{t ∈ [lo, hi]} I(t)`: a uniform scan followed by golden-section
/// refinement around the best node. Not a verified global optimum.
pub fn sup_parametric<F>(integral: F, lo: f64, hi: f64, settings: &QuadSettings) -> Result<Extremum>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    extremum(&integral, lo, hi, settings, 1.0)
}

/// Heuristic `inf_{t ∈ [lo, hi]} I(t)`; mirror of [`sup_parametric`].
pub fn inf_parametric<F>(integral: F, lo: f64, hi: f64, settings: &QuadSettings) -> Result<Extremum>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    extremum(&integral, lo, hi, settings, -1.0)
}

fn extremum<F>(integral: &F, lo: f64, hi: f64, settings: &QuadSettings, sign: f64) -> Result<Extremum>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(lo <= hi) {
        return Err(Error::InvalidParameter(format!("window [{lo}, {hi}] is empty")));
    }
    let n = settings.scan_nodes.max(2);
    let ts: Vec<f64> = (0..n)
        .map(|j| if j == n - 1 { hi } else { lo + (hi - lo) * j as f64 / (n - 1) as f64 })
        .collect();
    let vals: Vec<f64> = ts
        .par_iter()
        .map(|&t| integral(t).map(|v| sign * v))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (j, v) in vals.iter().enumerate() {
        if *v > vals[best] {
            best = j;
        }
    }
    let mut t_best = ts[best];
    let mut v_best = vals[best];

    // Golden-section search on the two cells around the best node.
    let mut a = ts[best.saturating_sub(1)];
    let mut b = ts[(best + 1).min(n - 1)];
    if b > a {
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - ratio * (b - a);
        let mut x2 = a + ratio * (b - a);
        let mut f1 = sign * integral(x1)?;
        let mut f2 = sign * integral(x2)?;
        let tol = 1e-12 * (hi - lo).max(f64::MIN_POSITIVE);
        while b - a > tol {
            if f1 >= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - ratio * (b - a);
                f1 = sign * integral(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + ratio * (b - a);
                f2 = sign * integral(x2)?;
            }
        }
        for (t, v) in [(x1, f1), (x2, f2)] {
            if v > v_best {
                t_best = t;
                v_best = v;
            }
        }
    }
    Ok(Extremum {
        t: t_best,
        value: sign * v_best,
        scan_nodes: n,
    })
}
