//! Physical constants (CODATA 2018) and the Rb-87 atomic mass.
//!
//! Values are pinned so that derived quantities are bit-reproducible across
//! builds; do not swap in a constants crate without re-freezing the expected
//! values in the test suite.

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant [J/K] (exact by SI definition).
pub const K_B: f64 = 1.380_649e-23;

/// Bohr radius [m].
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;

/// Mass of a Rb-87 atom [kg].
pub const MASS_RB87: f64 = 1.443_16e-25;
