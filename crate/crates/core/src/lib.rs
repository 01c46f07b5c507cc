//! Explicit solutions of the n-Laplace Liouville equation `-Δ_n U = e^U` in `R^n`
//! and numerical certificates for the integral identities they satisfy:
//! mass quantization, Pohozaev balances, level-set mass laws, the isoperimetric
//! chain and far-field logarithmic asymptotics.

pub mod error;
pub mod identities;
pub mod level_sets;
pub mod model;
pub mod quadrature;
pub mod shooting;
pub mod vector;

pub use error::{Error, Result};
pub use identities::{AsymptoticsReport, MassFlux, PohozaevReport, Potential};
pub use level_sets::{Chain, Coarea, LevelSetSample, LevelSuite, MassOde};
pub use model::{Dimension, ExactSolution, KelvinSample, RadialProfile, SolutionField};
pub use quadrature::{Estimate, QuadratureSpec, SphereRule};
pub use shooting::{RadialSolution, ShootingOptions, TotalMass};
