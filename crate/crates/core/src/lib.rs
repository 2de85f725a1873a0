//! Exact invariants of shift-of-finite-type groupoids and their products,
//! and table models of higher-dimensional Thompson-type groups.

pub mod abelianization;
pub mod aut;
pub mod classify;
pub mod error;
pub mod group;
pub mod homology;
pub mod matrix;
pub mod sft;
pub mod snf;
pub mod table;

pub use abelianization::{extension_data, strong_ah, tfg_abelianization, ExtensionData};
pub use aut::{aut_orbit_equivalent, enumerate_automorphisms, GroupHom};
pub use classify::{
    product_isomorphic, sft_isomorphic, sft_morita, ClassificationVerdict, ClassifyError,
};
pub use error::{BoundExceeded, SearchBounds};
pub use group::{cokernel, ext_group, kernel_group, tensor, tor, FgElement, FgGroup};
pub use homology::{hk_check, kunneth_pair, product_homology, product_k_theory, GradedGroups};
pub use matrix::IntMatrix;
pub use sft::{invariants, validate, SftError, SftInvariants, SftMatrix};
pub use snf::{smith_normal_form, SnfResult};
pub use table::{Arity, TableElement, TableError};
