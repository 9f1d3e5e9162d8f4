//! Numerics for complex hyperbolic space in the unit-ball model.
//!
//! The crate covers the signature-(n,1) form and the `SU(n,1)` action
//! ([`hermitian`]), spectral normal forms of hyperbolic elements
//! ([`spectral`]), the Bergman kernel and the connection forms of the
//! canonical circle bundle ([`bundle`]), Bohr-Sommerfeld tori attached to a
//! hyperbolic element ([`torus`]), coherent states ([`coherent`]) and relative
//! Poincare series with their residue constants ([`series`]).

pub mod bundle;
pub mod coherent;
pub mod error;
pub mod exact;
pub mod hermitian;
pub mod quadrature;
pub mod random;
pub mod series;
pub mod spectral;
pub mod torus;

pub use error::{Error, Result};
pub use hermitian::{
    act, classify_vector, herm_form, jacobian_det, validate_group, BallPoint, Flavor, GroupElement,
    HVec, C64,
};
pub use spectral::{build_a, classify_element, normal_form, ElementClass, HyperbolicData};
