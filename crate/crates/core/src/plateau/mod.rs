//! Dirichlet problem for `E_eps`: lattice energy, boundary data, projected descent, harmonic
//! sections and extraction of the limiting current.

mod boundary;
mod extract;
mod harmonic;
mod lattice;
mod minimize;

pub use boundary::{boundary_data_from_recovery, normal_gauge, reduction_boundary_data, BoundaryData, Face};
pub use extract::{extract_plateau, PlateauComparison, PlateauReport, Segment};
pub use harmonic::{harmonic_section, pde_identity_residual, CgOptions, HarmonicSection};
pub use lattice::{energy_and_gradient, energy_of, lattice_energy, offset, transport, LatticeEnergy, LatticeState, Terms};
pub use minimize::{gradient_audit, minimize, minimize_from, write_trace_csv, MinimizeOptions, Minimized, StepRule, StopReason, TraceRow};
