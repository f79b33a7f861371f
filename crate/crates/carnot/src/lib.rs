//! Curvature invariants, geodesic flows and growth vectors of rank-two
//! Carnot groups (Goursat groups and the Cartan group).

pub mod curvature;
pub mod elliptic;
pub mod groups;
pub mod hamiltonian;
pub mod oracle;
pub mod regularity;
pub mod scalar;
pub mod symfields;

pub use groups::{build_group, Covector, GroupKind, GroupModel};
pub use symfields::field::RatVecField;
pub use symfields::SymError;
