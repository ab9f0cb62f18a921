//! Tensor random projections.
//!
//! A tensor random projection (TRP) maps `ℝᵈ → ℝᵏ`, `d = d₁⋯d_N`, through
//! the Khatri-Rao product of `N` small random factors `Aᵢ ∈ ℝ^{dᵢ×k}`:
//!
//! ```text
//! f(x) = (1/√k) · (A₁ ⊙ ⋯ ⊙ A_N)ᵀ x
//! ```
//!
//! It stores `k·Σdᵢ` random scalars instead of `k·d`. Averaging `T`
//! independent copies with `1/√T` ([`TrpEnsemble`]) shrinks the excess
//! variance that the Khatri-Rao structure introduces.
//!
//! Modules:
//! - [`linalg`]: dense containers, Khatri-Rao/Kronecker products, index
//!   conventions, unfoldings, Householder QR
//! - [`dist`]: entry laws and seeded streams
//! - [`projection`]: the maps
//! - [`theory`]: closed-form variance and Monte-Carlo estimators
//! - [`sketch`]: randomized low-rank approximation with TRP sketches

pub mod dist;
pub mod error;
pub mod linalg;
pub mod projection;
pub mod sketch;
pub mod theory;

pub use dist::{
    derive_seed, fourth_moment, sample_matrix, very_sparse_delta, DistFamily, EntryDistribution,
    SeedSpec,
};
pub use error::{Error, Result};
pub use linalg::{
    khatri_rao, khatri_rao_all, kron_vec, linear_to_multi_index, mode_n_fold, mode_n_product,
    mode_n_unfold, multi_index_to_linear, qr_orthonormal, DenseMatrix, DenseTensor, Qr, Vector,
};
pub use projection::{
    AnyMap, ConventionalRp, ExplicitMap, MapKind, MapSpec, Projection, TensorRandomProjection,
    TrpEnsemble,
};
