//! Acoustic and electromagnetic scattering by many bodies that are small
//! compared with the wavelength.
//!
//! Each body enters only through a handful of shape constants computed from
//! its surface mesh: the electrostatic capacitance, its volume, and the
//! electric and magnetic polarizability tensors. The coupled multi-body
//! problem then reduces to a dense linear system with one (Dirichlet,
//! impedance) or four (Neumann) unknowns per body.
//!
//! - [`mesh`]: closed triangulated surfaces, generators, STL/OBJ loading.
//! - [`potential`]: capacitance series, double-layer operator, polarizability.
//! - [`acoustic`]: scenes, charge and Neumann systems, fields and amplitudes.
//! - [`em`]: electromagnetic scattering-matrix action and amplitudes.
//! - [`scenario`]: scenario files, the end-to-end runner and result writers.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acoustic;
pub mod em;
pub mod linalg;
pub mod mesh;
pub mod potential;
pub mod scenario;

pub use mesh::{GeometrySummary, TriangleMesh, Vec3};
