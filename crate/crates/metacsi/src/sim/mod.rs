//! Synthetic CSI generation.
//!
//! A parametric multipath scene (room, terminals, people, scatterers,
//! interferers) is turned into a list of propagation paths; the paths are
//! summed into the clean per-subcarrier, per-spatial-link channel matrix;
//! and the matrix is corrupted with co-channel interference, packet-boundary
//! / sampling-time / carrier phase offsets, and additive noise to model what
//! a commodity NIC actually reports.

mod channel;
mod dataset;
mod scene;
mod types;

pub use channel::{
    apply_offsets, apply_phase_offset, clean_channel, interference_channel, interferer_paths,
    path_delay, spatial_link_pair, subcarrier_frequencies,
};
pub use dataset::{generate_dataset, scene_label, LabelKind, SectorGrid};
pub use scene::scene_to_paths;
pub use types::{
    ArrayGeometry, CsiPacket, Dist, InterfererSpec, Label, OffsetSpec, PathSpec, SceneSpec,
    SimError, SubcarrierGrid,
};
