//! Physical constants and isotope masses.

/// Reduced Planck constant, J s. CODATA 2018.
pub const HBAR: f64 = 1.054571817e-34;

/// Unified atomic mass unit, kg. CODATA 2018.
pub const ATOMIC_MASS: f64 = 1.66053906660e-27;

/// Mass of a 87Rb atom, kg. 86.909180531 u, AME2020.
pub const MASS_RB87: f64 = 86.909180531 * ATOMIC_MASS;

/// Mass of a 7Li atom, kg. 7.0160034366 u, AME2020.
pub const MASS_LI7: f64 = 7.0160034366 * ATOMIC_MASS;
