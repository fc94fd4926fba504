//! A fully validated two-equation problem.

use serde::Serialize;

use crate::certify::BoxPair;
use crate::constants::{compute_constants, ConeWindow, ConstantsReport};
use crate::error::{Error, Result, Violation};
use crate::kernel::RobinBC;
use crate::nonlinearity::NonlinearityEnvelope;
use crate::nonlocal::{build_table_for, FunctionalTable, NonlocalFunctional};
use crate::quadrature::QuadSettings;
use crate::radial::{ExteriorGeometry, RadialWeight, WeightG};

/// Data of one equation of the system.
#[derive(Debug, Clone, Serialize)]
pub struct EquationSpec {
    pub weight: RadialWeight,
    pub bc: RobinBC,
    pub alpha: NonlocalFunctional,
    pub beta: NonlocalFunctional,
    pub window: ConeWindow,
    pub envelope: NonlinearityEnvelope,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemSpec {
    geometry: ExteriorGeometry,
    equations: [EquationSpec; 2],
    tables: [FunctionalTable; 2],
    boxes: Option<BoxPair>,
    quad: QuadSettings,
    /// Conversions applied while loading.
    notes: Vec<String>,
}

impl ProblemSpec {
    /// Validates every assumption and reports all failures together.
    pub fn new(geometry: ExteriorGeometry, equations: [EquationSpec; 2], boxes: Option<BoxPair>) -> Result<Self> {
        Self::with_settings(geometry, equations, boxes, QuadSettings::default())
    }

    pub fn with_settings(
        geometry: ExteriorGeometry,
        equations: [EquationSpec; 2],
        boxes: Option<BoxPair>,
        quad: QuadSettings,
    ) -> Result<Self> {
        quad.validate()?;
        let mut violations: Vec<Violation> = Vec::new();
        let mut tables = Vec::with_capacity(2);
        let mut notes = Vec::new();
        for (i, eq) in equations.iter().enumerate() {
            let idx = Some(i + 1);
            violations.extend(eq.weight.validate(&geometry, idx));
            match build_table_for(idx, &eq.alpha, &eq.beta, &eq.bc, &quad) {
                Ok(t) => tables.push(t),
                Err(Error::Validation(v)) => violations.extend(v),
                Err(e) => violations.push(Violation::new(idx, "table computable", e.to_string())),
            }
            violations.extend(eq.envelope.validate(idx, i));
            if let Some(dt) = eq.bc.d_tilde() {
                notes.push(format!(
                    "equation {}: d = r0/(2-n)·d̃ = {}/(2-{})·({dt}) = {}",
                    i + 1,
                    geometry.r0(),
                    geometry.n(),
                    eq.bc.d()
                ));
            }
        }
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }
        Ok(Self {
            geometry,
            equations,
            tables: [tables[0], tables[1]],
            boxes,
            quad,
            notes,
        })
    }

    /// The bundled example system in ℝ³.
    pub fn example() -> Self {
        crate::config::parse_spec_str(crate::config::EXAMPLE_SPEC).expect("bundled example spec is valid")
    }

    pub fn geometry(&self) -> &ExteriorGeometry {
        &self.geometry
    }

    pub fn equations(&self) -> &[EquationSpec; 2] {
        &self.equations
    }

    /// Equation `i` (0-based).
    pub fn equation(&self, i: usize) -> &EquationSpec {
        &self.equations[i]
    }

    pub fn table(&self, i: usize) -> &FunctionalTable {
        &self.tables[i]
    }

    pub fn weight_g(&self, i: usize) -> WeightG {
        WeightG::new(self.geometry, self.equations[i].weight.clone())
    }

    pub fn boxes(&self) -> Option<&BoxPair> {
        self.boxes.as_ref()
    }

    pub fn quad(&self) -> &QuadSettings {
        &self.quad
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn with_boxes(mut self, boxes: Option<BoxPair>) -> Self {
        self.boxes = boxes;
        self
    }

    /// Replaces both nonlinearities, revalidating them.
    pub fn with_envelopes(&self, envelopes: [NonlinearityEnvelope; 2]) -> Result<Self> {
        let [e1, e2] = envelopes;
        let mut eqs = self.equations.clone();
        eqs[0].envelope = e1;
        eqs[1].envelope = e2;
        Self::with_settings(self.geometry, eqs, self.boxes, self.quad)
    }

    /// `C_i`, `M_i` and their intermediates for both equations.
    pub fn constants(&self) -> Result<[ConstantsReport; 2]> {
        let one = |i: usize| -> Result<ConstantsReport> {
            let eq = &self.equations[i];
            let g = self.weight_g(i);
            compute_constants(
                &eq.bc,
                &self.tables[i],
                &eq.alpha,
                &eq.beta,
                &|t| g.eval(t),
                &eq.window,
                &self.quad,
            )
            .map_err(|e| e.for_equation(i + 1))
        };
        let (a, b) = rayon::join(|| one(0), || one(1));
        Ok([a?, b?])
    }
}
