//! Positive radial solutions of coupled elliptic systems on exterior domains
//! with nonlocal boundary conditions: the radial reduction to `(0, 1]`, the
//! Green's kernel and functional table, the cone constants, existence and
//! nonexistence certificates, and a fixed-point solver for the reduced system.

pub mod certify;
pub mod config;
pub mod constants;
pub mod error;
pub mod estimate;
pub mod expr;
pub mod kernel;
pub mod mesh;
pub mod nonlinearity;
pub mod nonlocal;
pub mod problem;
pub mod quadrature;
pub mod radial;
pub mod solver;

pub use certify::{
    box_inf, box_sup, certify_none, certify_one, certify_two, sweep_two, BoxPair, CertificateReport, CertifyMode,
    Inequality, Verdict,
};
pub use config::{parse_spec, parse_spec_str};
pub use constants::{compute_c, compute_constants, compute_m, ConeWindow, ConstantsReport};
pub use error::{Error, Result, Violation};
pub use estimate::{Estimate, Method};
pub use expr::Expr;
pub use kernel::RobinBC;
pub use mesh::{Grid, MeshFunction};
pub use nonlinearity::{EnvelopeForm, Nonlinearity, NonlinearityEnvelope};
pub use nonlocal::{build_table, Atom, DensityPiece, FunctionalTable, NonlocalFunctional};
pub use problem::{EquationSpec, ProblemSpec};
pub use quadrature::QuadSettings;
pub use radial::{pull_back_profile, ExteriorGeometry, RadialWeight, WeightG};
