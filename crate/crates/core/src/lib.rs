//! Mean-field analysis of orientational phase transitions in liquid
//! crystal models with Onsager-type interaction functionals.
//!
//! The crate provides, in dependency order:
//!
//! * [`legendre`]: Legendre/associated Legendre evaluation and
//!   Gauss-Legendre quadrature;
//! * [`potentials`]: angular interaction potentials (Onsager,
//!   Maier-Saupe, sine powers, tabulated) and spatial kernels with their
//!   Fourier transforms;
//! * [`spectrum`]: the Legendre spectrum of an angular potential and the
//!   first-order transition certificate built on it;
//! * [`functional`]: orientation profiles and the free-energy functional
//!   (entropy, direct and spectral interaction energy, order parameter);
//! * [`solver`]: the Euler-Lagrange self-consistency solver and density
//!   scans that bracket the transition.

pub mod error;
pub mod functional;
pub mod legendre;
pub mod potentials;
pub mod solver;
pub mod spectrum;

pub use error::{Error, Result};
pub use functional::{
    energy_direct, energy_direct_with_kernel, energy_spectral, entropy, free_energy,
    order_parameter, AzimuthalKernel, EnergyMode, FreeEnergyBreakdown, OrientationProfile,
};
pub use legendre::{
    assoc_legendre_eval, gauss_legendre, legendre_eval, legendre_eval_all,
    legendre_triple_integral, QuadratureRule,
};
pub use potentials::{
    angular_from_tag, big_phi_hat, load_tabulated, load_tabulated_file, make_angular, phi_hat,
    AngularFamily, AngularPotential, KernelFamily, Parity, SpatialKernel,
};
pub use solver::{
    best_critical_point, destabilizing_mode, el_map, scan, second_variation_mode, seed_profiles,
    solve, BifurcationScan, Branch, CriticalPoint, ScanConfig, ScanRow, SolverConfig,
};
pub use spectrum::{
    certify, certify_with_spectrum, default_xi_grid, find_ell_star, spectrum_onsager_closed_form,
    spectrum_quadrature, spectrum_sinpow_exact, LegendreSpectrum, ModeSearch,
    StabilityCertificate, Verdict,
};
