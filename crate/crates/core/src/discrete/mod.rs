//! Grid oracles: discrete p-modules of sampled ring families and discrete
//! p-capacities of ring condensers.

mod capacity;
mod family;
mod grid;
mod solver;

pub use capacity::{discrete_p_capacity, discrete_p_capacity_with, CapacityOptions, CapacitySolution};
pub use family::{
    covering_curve_count, covering_sphere_count, directions, push_forward_family, ring_cell_fractions,
    sample_joining_curves, sample_separating_surfaces, sphere_geometry, Family, FamilyKind, Geometry, Member, Patch,
};
pub use grid::{Grid, MIN_CELLS};
pub use solver::{discrete_p_module, discrete_p_module_with, ModulusSolution, SolverOptions};
