//! Exact computations with lattices over `A = O[X]/(X^n)`, `O = F_p[[ε]]`.
//!
//! The crate is layered bottom-up:
//!
//! * [`dvr`]: capped-precision power series and matrices over `O`, Smith form,
//!   kernels, solving, saturation.
//! * [`fp`]: dense linear algebra and polynomials over the residue field.
//! * [`lattice`]: A-lattices, morphisms, Hom, covers, kernels, pullbacks,
//!   isomorphism tests and Ext.
//! * [`finalg`]: endomorphism algebras mod ε, radicals, locality and
//!   decomposition by idempotent lifting.
//! * [`heller`]: finite modules, Heller lattices and the closed forms `Z_i`, `L_r`.
//! * [`ars`]: AR translate, the φ search, almost split sequences and the
//!   closed forms `E_i`, `F_i`.
//! * [`quiver`]: component exploration, tube reports and export.
//! * [`verify`]: the claim-by-claim reproduction harness shared by the CLI
//!   and the acceptance tests.

pub mod ars;
pub mod dvr;
mod error;
pub mod finalg;
pub mod fp;
pub mod heller;
pub mod lattice;
pub mod quiver;
pub mod verify;

pub use error::{Error, Result};
