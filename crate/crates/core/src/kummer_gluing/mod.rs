//! Torus orbifolds, their fixed points, the resolution ledger, cutoff gluing of Kähler triples
//! and moduli counts.

pub mod blend;
pub mod lattice;
pub mod ledger;

pub use blend::{
    blend_check_points, blend_configs, blend_difference_norms, blend_forms, gh_blend, primitive_on_annulus, Annulus,
    BlendedForm, Cutoff, FormDifference, GhBlend, GluingSchedule, HomotopyPrimitive, PrimitiveReport,
};
pub use lattice::{
    admissible_orders, admissible_orders_by_search, admissible_orders_with_involution, fixed_points, FixedPoint,
    LatticeTorus, TorusAutomorphism,
};
pub use ledger::{local_model_check, moduli_dimensions, z3_pipeline, LedgerEntry, ModuliCount, SingularityLedger};

#[cfg(test)]
mod tests;
