//! Bounded linear functionals `α`, `β` of the nonlocal boundary conditions and
//! the scalar table (`α[γ]`, `β[δ]`, `α[δ]`, `β[γ]`, `D`) built from them.
//!
//! A functional is a finite sum of weighted point evaluations plus an
//! optional piecewise-constant density, so `α[k(·, s)]` is available in closed
//! form.

use serde::Serialize;

use crate::error::{Error, Result, Violation};
use crate::kernel::RobinBC;
use crate::mesh::MeshFunction;
use crate::quadrature::{integrate, QuadSettings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub weight: f64,
    pub node: f64,
}

/// `weight` on `[lo, hi]`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityPiece {
    pub lo: f64,
    pub hi: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NonlocalFunctional {
    atoms: Vec<Atom>,
    density: Vec<DensityPiece>,
}

impl NonlocalFunctional {
    pub fn new(atoms: Vec<Atom>, density: Vec<DensityPiece>) -> Result<Self> {
        for a in &atoms {
            if !a.weight.is_finite() || !(0.0..=1.0).contains(&a.node) {
                return Err(Error::InvalidParameter(format!(
                    "atom {} @ {} needs a finite weight and a node in [0, 1]",
                    a.weight, a.node
                )));
            }
        }
        for p in &density {
            if !p.weight.is_finite() || !(0.0 <= p.lo && p.lo < p.hi && p.hi <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "density piece {} on [{}, {}] needs 0 ≤ lo < hi ≤ 1",
                    p.weight, p.lo, p.hi
                )));
            }
        }
        Ok(Self { atoms, density })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `weight · w(node)`.
    pub fn point(weight: f64, node: f64) -> Result<Self> {
        Self::new(vec![Atom { weight, node }], Vec::new())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> &[DensityPiece] {
        &self.density
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|a| a.weight == 0.0) && self.density.iter().all(|p| p.weight == 0.0)
    }

    /// Negative weights are legal but make positivity depend on the argument.
    pub fn has_negative_weights(&self) -> bool {
        self.atoms.iter().any(|a| a.weight < 0.0) || self.density.iter().any(|p| p.weight < 0.0)
    }

    /// Points where `s ↦ L[k(·, s)]` has kinks.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.atoms.iter().map(|a| a.node).collect();
        for p in &self.density {
            v.push(p.lo);
            v.push(p.hi);
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// `L[f] = Σ w_j f(t_j) + ∫ f · density`.
    pub fn apply<F>(&self, f: F, settings: &QuadSettings) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let mut total = 0.0;
        for a in &self.atoms {
            total += a.weight * f(a.node)?;
        }
        for p in &self.density {
            total += p.weight * integrate(&f, p.lo, p.hi, settings)?.value;
        }
        Ok(total)
    }

    /// `L` applied to the Hermite interpolant of a mesh function.
    pub fn apply_mesh(&self, m: &MeshFunction) -> f64 {
        let mut total = 0.0;
        for a in &self.atoms {
            total += a.weight * m.eval(a.node);
        }
        for p in &self.density {
            total += p.weight * m.integrate(p.lo, p.hi);
        }
        total
    }

    /// `s ↦ L[k(·, s)]`.
    pub fn kernel_slice(&self, bc: RobinBC) -> KernelSlice<'_> {
        KernelSlice { functional: self, bc }
    }
}

/// `s ↦ L[k(·, s)]` for a fixed boundary condition.
#[derive(Debug, Clone, Copy)]
pub struct KernelSlice<'a> {
    functional: &'a NonlocalFunctional,
    bc: RobinBC,
}

impl KernelSlice<'_> {
    pub fn eval(&self, s: f64) -> f64 {
        let bc = &self.bc;
        let rho = bc.c() / (bc.c() + bc.d());
        let mut total = 0.0;
        for a in &self.functional.atoms {
            total += a.weight * bc.k(a.node, s);
        }
        for p in &self.functional.density {
            // t < s contributes t(1 - ρs); t ≥ s contributes s(1 - ρt).
            let m = s.clamp(p.lo, p.hi);
            let left = (1.0 - rho * s) * 0.5 * (m * m - p.lo * p.lo);
            let right = s * ((p.hi - m) - 0.5 * rho * (p.hi * p.hi - m * m));
            total += p.weight * (left + right);
        }
        total
    }

    /// Checks nonnegativity on `points` equispaced nodes of `[0, 1]` plus the kinks.
    pub fn validate(&self, name: &str, points: usize) -> Result<()> {
        let n = points.max(2);
        let mut nodes: Vec<f64> = (0..n).map(|j| j as f64 / (n - 1) as f64).collect();
        nodes.extend(self.functional.breakpoints());
        for s in nodes {
            let v = self.eval(s);
            // Roundoff slack relative to the total mass of the functional.
            let scale: f64 = self.functional.atoms.iter().map(|a| a.weight.abs()).sum::<f64>()
                + self.functional.density.iter().map(|p| p.weight.abs() * (p.hi - p.lo)).sum::<f64>();
            if v < -1e-14 * scale.max(1.0) {
                return Err(Error::NegativeKernelSlice {
                    functional: name.to_string(),
                    s,
                    value: v,
                });
            }
        }
        Ok(())
    }
}

/// The scalars entering the 2×2 system `N (α[u], β[u])ᵀ = …`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalTable {
    pub a_gamma: f64,
    pub b_gamma: f64,
    pub a_delta: f64,
    pub b_delta: f64,
    /// `D = (1 - α[γ])(1 - β[δ]) - α[δ] β[γ]`.
    pub det: f64,
    /// Some functional has a negative weight.
    pub signed: bool,
}

impl FunctionalTable {
    /// `N = [[1 - α[γ], -α[δ]], [-β[γ], 1 - β[δ]]]`.
    pub fn n_matrix(&self) -> [[f64; 2]; 2] {
        [[1.0 - self.a_gamma, -self.a_delta], [-self.b_gamma, 1.0 - self.b_delta]]
    }

    /// `N⁻¹ = (1/D) [[1 - β[δ], α[δ]], [β[γ], 1 - α[γ]]]`; all entries ≥ 0 on a valid table.
    pub fn n_inverse(&self) -> [[f64; 2]; 2] {
        let d = self.det;
        [
            [(1.0 - self.b_delta) / d, self.a_delta / d],
            [self.b_gamma / d, (1.0 - self.a_gamma) / d],
        ]
    }
}

/// Builds and validates the table; every failed assumption is listed.
pub fn build_table(alpha: &NonlocalFunctional, beta: &NonlocalFunctional, bc: &RobinBC) -> Result<FunctionalTable> {
    build_table_for(None, alpha, beta, bc, &QuadSettings::default())
}

pub(crate) fn build_table_for(
    equation: Option<usize>,
    alpha: &NonlocalFunctional,
    beta: &NonlocalFunctional,
    bc: &RobinBC,
    settings: &QuadSettings,
) -> Result<FunctionalTable> {
    let gamma = |t: f64| Ok(bc.gamma(t));
    let delta = |t: f64| Ok(bc.delta(t));
    let a_gamma = alpha.apply(gamma, settings)?;
    let b_gamma = beta.apply(gamma, settings)?;
    let a_delta = alpha.apply(delta, settings)?;
    let b_delta = beta.apply(delta, settings)?;
    let det = (1.0 - a_gamma) * (1.0 - b_delta) - a_delta * b_gamma;

    let mut v = Vec::new();
    let mut check = |ok: bool, name: &str, detail: String| {
        if !ok {
            v.push(Violation::new(equation, name, detail));
        }
    };
    check(a_gamma >= 0.0, "α[γ]≥0", format!("α[γ] = {a_gamma}"));
    check(a_gamma < 1.0, "α[γ]<1", format!("α[γ] = {a_gamma}"));
    check(b_delta >= 0.0, "β[δ]≥0", format!("β[δ] = {b_delta}"));
    check(b_delta < 1.0, "β[δ]<1", format!("β[δ] = {b_delta}"));
    check(a_delta >= 0.0, "α[δ]≥0", format!("α[δ] = {a_delta}"));
    check(b_gamma >= 0.0, "β[γ]≥0", format!("β[γ] = {b_gamma}"));
    check(det > 0.0, "D>0", format!("D = {det}"));
    for (name, assumption, f) in [("α", "α[k]≥0", alpha), ("β", "β[k]≥0", beta)] {
        if let Err(e) = f.kernel_slice(*bc).validate(name, 1001) {
            v.push(Violation::new(equation, assumption, e.to_string()));
        }
    }
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    Ok(FunctionalTable {
        a_gamma,
        b_gamma,
        a_delta,
        b_delta,
        det,
        signed: alpha.has_negative_weights() || beta.has_negative_weights(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Grid;
    use crate::quadrature::integrate_with_breaks;
    use proptest::prelude::*;

    fn bc(c: f64, d: f64) -> RobinBC {
        RobinBC::new(c, d).unwrap()
    }

    fn st() -> QuadSettings {
        QuadSettings::default()
    }

    #[test]
    fn apply_examples() {
        let b = bc(2.0, 4.0);
        let alpha = NonlocalFunctional::point(1.0, 0.25).unwrap();
        let v = alpha.apply(|t| Ok(b.gamma(t)), &st()).unwrap();
        assert!((v - 11.0 / 12.0).abs() < 1e-15);
        let five = NonlocalFunctional::point(5.0, 0.5).unwrap();
        assert_eq!(five.apply(|_| Ok(1.0), &st()).unwrap(), 5.0);
        let l = NonlocalFunctional::new(
            vec![Atom { weight: 1.0, node: 0.25 }],
            vec![DensityPiece { lo: 0.0, hi: 1.0, weight: 0.0 }],
        )
        .unwrap();
        assert_eq!(l.apply(|t| Ok(t), &st()).unwrap(), 0.25);
    }

    #[test]
    fn apply_with_density() {
        let l = NonlocalFunctional::new(Vec::new(), vec![DensityPiece { lo: 0.0, hi: 0.5, weight: 2.0 }]).unwrap();
        assert!((l.apply(|t| Ok(t * t), &st()).unwrap() - 2.0 / 24.0).abs() < 1e-15);
        let g = Grid::graded(32, 2.0, &[]).unwrap();
        let m = MeshFunction::from_fn(&g, |t| t * t, |t| 2.0 * t);
        assert!((l.apply_mesh(&m) - 2.0 / 24.0).abs() < 1e-8);
    }

    #[test]
    fn invalid_functionals() {
        assert!(NonlocalFunctional::point(1.0, 1.5).is_err());
        assert!(NonlocalFunctional::point(f64::NAN, 0.5).is_err());
        assert!(NonlocalFunctional::new(Vec::new(), vec![DensityPiece { lo: 0.5, hi: 0.2, weight: 1.0 }]).is_err());
    }

    #[test]
    fn kernel_slice_examples() {
        let alpha = NonlocalFunctional::point(1.0, 0.25).unwrap();
        // k(1/4, 1/2) = (1/4)(1 - (1/3)(1/2)) = 5/24
        let v = alpha.kernel_slice(bc(2.0, 4.0)).eval(0.5);
        assert!((v - 5.0 / 24.0).abs() < 1e-15);
        assert_eq!(alpha.kernel_slice(bc(0.7, 0.3)).eval(0.0), 0.0);
        let two = NonlocalFunctional::point(2.0, 0.5).unwrap();
        assert_eq!(two.kernel_slice(bc(0.0, 1.0)).eval(0.75), 1.0);
    }

    #[test]
    fn density_slice_matches_quadrature() {
        let b = bc(2.0, 4.0);
        let l = NonlocalFunctional::new(
            vec![Atom { weight: 0.5, node: 0.7 }],
            vec![
                DensityPiece { lo: 0.1, hi: 0.4, weight: 1.5 },
                DensityPiece { lo: 0.6, hi: 0.9, weight: 0.25 },
            ],
        )
        .unwrap();
        let slice = l.kernel_slice(b);
        for j in 0..=20 {
            let s = j as f64 / 20.0;
            let mut oracle = 0.5 * b.k(0.7, s);
            for (lo, hi, w) in [(0.1, 0.4, 1.5), (0.6, 0.9, 0.25)] {
                let q = integrate_with_breaks(|t| Ok(b.k(t, s)), lo, hi, &[s], &st()).unwrap();
                oracle += w * q.value;
            }
            assert!((slice.eval(s) - oracle).abs() < 1e-13, "s={s}");
        }
    }

    #[test]
    fn negative_slice_is_reported() {
        let l = NonlocalFunctional::point(-1.0, 0.5).unwrap();
        match l.kernel_slice(bc(1.0, 1.0)).validate("β", 1001) {
            Err(Error::NegativeKernelSlice { functional, s, .. }) => {
                assert_eq!(functional, "β");
                assert!(s > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn table_examples() {
        let alpha = NonlocalFunctional::point(1.0, 0.25).unwrap();
        let beta = NonlocalFunctional::point(1.0, 0.5).unwrap();
        let t = build_table(&alpha, &beta, &bc(2.0, 4.0)).unwrap();
        assert!((t.det - 1.0 / 24.0).abs() < 1e-15);
        let t2 = build_table(&alpha, &beta, &bc(3.0, 0.2)).unwrap();
        assert!((t2.det - 5.0 / 32.0).abs() < 1e-15);
        let z = NonlocalFunctional::zero();
        assert_eq!(build_table(&z, &z, &bc(1.3, 0.4)).unwrap().det, 1.0);
        // N · N⁻¹ = I
        let (n, ni) = (t.n_matrix(), t.n_inverse());
        for i in 0..2 {
            for j in 0..2 {
                let p = n[i][0] * ni[0][j] + n[i][1] * ni[1][j];
                assert!((p - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn table_closed_form_for_example_family() {
        // α = eval at 1/4, β = eval at 1/2: D = (c - 1)/(4(c + d)).
        let alpha = NonlocalFunctional::point(1.0, 0.25).unwrap();
        let beta = NonlocalFunctional::point(1.0, 0.5).unwrap();
        for (c, d) in [(2.0, 4.0), (3.0, 0.2), (1.5, 1.0), (5.0, 2.5), (10.0, 0.1)] {
            let t = build_table(&alpha, &beta, &bc(c, d)).unwrap();
            let closed = (c - 1.0) / (4.0 * (c + d));
            assert!(((t.det - closed) / closed).abs() < 1e-12);
        }
    }

    #[test]
    fn table_violations_are_named() {
        let at0 = NonlocalFunctional::point(1.0, 0.0).unwrap();
        let err = build_table(&at0, &NonlocalFunctional::zero(), &bc(1.0, 0.0)).unwrap_err();
        assert!(err.violated_assumptions().contains(&"α[γ]<1"));
        // five-fold β with c = 3, d = 1/5 makes D negative
        let alpha = NonlocalFunctional::point(1.0, 0.25).unwrap();
        let beta5 = NonlocalFunctional::point(5.0, 0.5).unwrap();
        let err = build_table(&alpha, &beta5, &bc(3.0, 0.2)).unwrap_err();
        assert!(err.violated_assumptions().contains(&"D>0"));
        let neg = NonlocalFunctional::point(-0.5, 0.5).unwrap();
        let err = build_table(&neg, &NonlocalFunctional::zero(), &bc(1.0, 1.0)).unwrap_err();
        let names = err.violated_assumptions();
        assert!(names.contains(&"α[k]≥0") && names.contains(&"α[γ]≥0"));
    }

    #[test]
    fn signed_functionals_flagged() {
        let alpha = NonlocalFunctional::new(
            vec![Atom { weight: 1.0, node: 0.25 }, Atom { weight: -0.1, node: 0.75 }],
            Vec::new(),
        )
        .unwrap();
        let t = build_table(&alpha, &NonlocalFunctional::zero(), &bc(1.0, 1.0)).unwrap();
        assert!(t.signed);
    }

    fn poly(coeffs: &[f64], t: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    proptest! {
        #[test]
        fn apply_is_linear(
            a in -3.0f64..3.0, b in -3.0f64..3.0,
            p in proptest::collection::vec(-2.0f64..2.0, 1..6),
            q in proptest::collection::vec(-2.0f64..2.0, 1..6),
            node in 0.0f64..=1.0, w in -2.0f64..2.0,
        ) {
            let l = NonlocalFunctional::new(
                vec![Atom { weight: w, node }],
                vec![DensityPiece { lo: 0.2, hi: 0.7, weight: 0.8 }],
            ).unwrap();
            let s = st();
            let lhs = l.apply(|t| Ok(a * poly(&p, t) + b * poly(&q, t)), &s).unwrap();
            let rhs = a * l.apply(|t| Ok(poly(&p, t)), &s).unwrap() + b * l.apply(|t| Ok(poly(&q, t)), &s).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn slices_nonnegative_for_positive_functionals(
            c in 0.0f64..10.0, d in 0.01f64..10.0,
            nodes in proptest::collection::vec(0.0f64..=1.0, 1..4),
        ) {
            let atoms = nodes.iter().map(|&node| Atom { weight: 1.0, node }).collect();
            let l = NonlocalFunctional::new(atoms, vec![DensityPiece { lo: 0.1, hi: 0.9, weight: 1.0 }]).unwrap();
            prop_assert!(l.kernel_slice(bc(c, d)).validate("α", 1001).is_ok());
        }
    }
}
