//! Bound states and resonances of two identical bosons plus a third particle with
//! Gaussian boson-particle interactions, in one and three dimensions.
//!
//! The three-body Hamiltonian is expanded in boson-symmetrized Gaussians on Jacobi
//! coordinates and complex scaled; resonances appear as θ-stable complex eigenvalues.

pub mod assembly;
pub mod basis;
pub mod csm;
pub mod eigen;
pub mod error;
pub mod gaussint;
pub mod jacobi;
pub mod scan;
pub mod twobody;
pub mod units;

pub use assembly::{assemble, assemble_parts, assemble_thetas, AssembledProblem, ChannelBasis, HamiltonianParts};
pub use basis::{BasisFunction, GaussBasisSpec};
pub use csm::{classify, extract_resonance, ClassifiedSpectrum, ClassifyOptions, FamilyLabel, StateClass, ThresholdSet};
pub use eigen::{solve_generalized, EigOptions, GeneralizedEigResult};
pub use error::{Error, Result};
pub use jacobi::{JacobiSet, JacobiTransform};
pub use twobody::{solve_two_body, tune_depth, GaussPotential, LevelLabel, Sector, TuneRequest, TwoBodySpectrum};
pub use units::{ComplexEnergy, Dimension, Lifetime, MassConfig, ScalingKind};
