//! Path surgeries behind the gluing lemma: the ordered minimal crossing path,
//! the marked set `U`, the closing map `Φ`, the rewiring map `Ψ`, and
//! exhaustive audits of both on micro-instances.

pub mod audit;
pub mod columns;
pub mod linkage;
pub mod order;
pub mod phi;
pub mod psi;

pub use audit::{audit, counting_bound_holds, AuditReport, GlueInstance, CountingBound, Tally, CHECKS};
pub use columns::{brute_u, compute_u};
pub use linkage::{check_radius, disjoint_path_count, feasible_r, linkage, Ball, Linkage, RadiusReport};
pub use order::{brute_min_path, compare_paths, min_path, MinPathSearch, Path};
pub use phi::{surgery_phi, PhiOutcome};
pub use psi::{marked_points, surgery_psi, SurgeryError, SurgeryRecord};
