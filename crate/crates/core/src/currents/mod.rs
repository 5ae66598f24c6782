//! Concentration currents: cell-integrated `Z`, degree currents, the quantization gap,
//! skeleton selection, slicing and a weak-* distance between 0-currents.

mod cells;
mod degree;
mod slice;
mod weak;

pub use cells::{
    cell_current, cell_degrees, degree_current, quantization_gap, select_skeleton, skeleton_energy, CellBox,
    CellPartition, SkeletonChoice, MIN_CELL_INTERVALS,
};
pub use degree::{degree, omega_flux, solid_angle, DegreeReport, TriSurface, MIN_MODULUS, ROUNDING_TOL};
pub use slice::{slice, Slice, SliceField};
pub use weak::{weak_star_distance, Atom, Bump, DiscreteZeroCurrent, TestDictionary};
