//! Product-matrix regenerating codes for distributed storage.
//!
//! The crate builds minimum-bandwidth (MBR) and minimum-storage (MSR)
//! regenerating codes from a product-matrix construction, layers
//! information-theoretic secrecy on top of either, audits that secrecy
//! exactly by rank accounting, and exercises the whole stack in a small
//! discrete-event cluster simulator.
//!
//! Module map:
//! - [`gf`]: prime-field arithmetic and randomness sources
//! - [`linalg`]: matrices over GF(q), Gaussian elimination, Vandermonde
//! - [`params`]: parameter validation and derived code quantities
//! - [`pm_codes`]: plain MBR/MSR encode, reconstruct, repair
//! - [`secure`]: secrecy layer (random-symbol placement, shortening)
//! - [`secrecy_audit`]: exact leakage measurement for eavesdropper specs
//! - [`cluster_sim`]: scripted failure/repair/collect simulation

pub mod gf;
pub mod linalg;
pub mod params;
pub mod pm_codes;
pub mod secure;
pub mod secrecy_audit;
pub mod cluster_sim;
