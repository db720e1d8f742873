//! Dense tensor scattering.
//!
//! Transformers between index spaces are tabulated as provision tensors
//! ([`transformer::ProvisionTensor`]). The [`engine`] applies them to data
//! with explicit collision policies and a block-copy fast path, and
//! [`analysis`] decides when that fast path applies and explains when it
//! cannot.

pub mod analysis;
pub mod cli;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod json;
pub mod tensor;
pub mod transformer;

pub use analysis::{
    analyze, detect_collisions, max_sliceable_suffix, pass_through_map, slicing_impossibility, weak_decomposition,
    AnalysisReport, CollisionGroup, CollisionReport, SliceableSuffix, SlicingDiagnostic, Verdict,
};
pub use engine::{
    disseminate_slice, scatter, scatter_nd_update, scatter_planned, scatter_with, scatter_x, torch_scatter,
    CollisionPolicy, ExecPath, Scalar, ScatterReport, Scattering, SlicePlan,
};
pub use error::{Error, Result};
pub use tensor::{Index, IntTensor, Pick, RealTensor, Shape, Tensor};
pub use transformer::{
    compose_provision, tf_transformer, torch_transformer, ProvisionTensor, ValidationReport, XTransformerSpec,
};
