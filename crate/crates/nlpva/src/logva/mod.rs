//! Desk-scale logarithmic vertex algebra models and their mode-level checks:
//! a free-boson Fock space with a nilpotent braiding map, the mode algebra of
//! the logarithmic Virasoro vertex algebra acting on an ordered-word module,
//! a vector-field realization of the deformed Virasoro commutation relations,
//! and the bracket induced on associated graded objects, which is compared
//! against the builtin non-local Poisson structures.

pub mod fock;
pub mod gr;
pub mod vfield;
pub mod vm;

pub use fock::{fb_borcherds_n0_check, fb_mode_apply, fb_mu, fb_zeta_coeff, FbVariant, FockState};
pub use gr::{gr_bracket_fock, gr_bracket_vm, gr_product_check};
pub use vfield::{vector_field_check, vf_l_mode, VfState};
pub use vm::{vm_commutator_check, vm_l_mode, PbwState, Strategy};
