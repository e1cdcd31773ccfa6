//! Simulation of the atom-optics kicked rotor driven close to a quantum
//! resonance, with multiplicative amplitude noise on the kicks.
//!
//! Close to a resonant kicking period `tau = 2*pi*ell + eps` the quantum
//! dynamics of each quasimomentum fiber reduces, for small `|eps|`, to a
//! classical map in which `|eps|` plays the role of an effective Planck
//! constant.  That map is implemented in [`pclassical`]; the exact quantum
//! evolution (split-operator over momentum eigenstates of a fiber) lives in
//! [`quantum`].  The one-parameter scaling law obeyed by the resonance-peak
//! energy — and its deformation under kick-amplitude noise — is handled by
//! [`scaling`], with the phase-space picture behind it (pendulum islands,
//! noise-smeared separatrix) in [`phasespace`].  [`harness`] ties the engines
//! together into reproducible parameter sweeps, file I/O and comparison with
//! measured data; [`model`] holds the shared parameter types and the
//! counter-based noise/ensemble sampling used by everything else.
//!
//! Conventions used throughout:
//!
//! * momentum is measured in two-photon recoils (units of `2*hbar*k_L`), and
//!   splits as `p = n + beta` with integer `n` and conserved quasimomentum
//!   `beta` in `[0, 1)`;
//! * the kicking period enters as `tau = 2*pi*ell + eps` with integer
//!   `ell >= 1`; a laboratory pulse period `T` converts via `tau = 8*omega_r*T`;
//! * kick amplitudes are `k_s = k*(1 + R_s)` with `R_s` drawn uniformly from
//!   `[-L/2, L/2]`, noise level `L` in `[0, 2]`;
//! * energies are kinetic, `<p^2>/2`, quoted as the change from the initial
//!   ensemble energy.

pub mod error;
pub mod harness;
pub mod model;
pub mod pclassical;
pub mod phasespace;
pub mod quantum;
pub mod scaling;

pub use error::{Error, Result};
