//! Downstream uses: affinities for subspace clustering and volume sampling
//! of approximating flats.

pub mod scc;
pub mod volume_sampling;

pub use scc::{
    clustering_accuracy, scc_affinities, spectral_cluster, tuple_affinity, AffinityMatrix,
    ClusterAssignment, SccConfig,
};
pub use volume_sampling::{
    volume_sample_flat, volume_sampling_distribution, volume_sampling_expected_error, SampledFlat,
};
