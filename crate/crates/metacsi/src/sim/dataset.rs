//! Labeled dataset generation from scenes.

use serde::{Deserialize, Serialize};

use crate::rng::{self, tag};

use super::channel::{apply_offsets, clean_channel, interference_channel};
use super::scene::scene_to_paths;
use super::types::{
    ArrayGeometry, CsiPacket, Dist, Label, OffsetSpec, SceneSpec, SimError, SubcarrierGrid,
};

/// Square-cell sector grid anchored at the room origin, row-major indexing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorGrid {
    pub cols: usize,
    pub rows: usize,
    pub cell_m: f64,
}

impl SectorGrid {
    pub fn n_sectors(&self) -> usize {
        self.cols * self.rows
    }

    /// Sector index of a point; cells are half-open except the outer edge.
    pub fn sector_of(&self, p: [f64; 2]) -> usize {
        let ix = ((p[0] / self.cell_m) as usize).min(self.cols - 1);
        let iy = ((p[1] / self.cell_m) as usize).min(self.rows - 1);
        iy * self.cols + ix
    }
}

/// Which label variant a generated dataset carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LabelKind {
    /// People count as the class index; `n_classes` bounds the valid range.
    Count { n_classes: usize },
    /// Grid cell of the single person.
    Sector(SectorGrid),
    /// Raw person coordinates for the regression head.
    Coords,
}

/// Derive the ground-truth label of a scene under the requested label kind.
pub fn scene_label(scene: &SceneSpec, kind: &LabelKind) -> Result<Label, SimError> {
    match kind {
        LabelKind::Count { n_classes } => {
            let c = scene.person_positions_m.len();
            if c >= *n_classes {
                return Err(SimError::BadLabel {
                    kind: "count",
                    reason: format!("{c} people but only {n_classes} classes"),
                });
            }
            Ok(Label::Count(c))
        }
        LabelKind::Sector(grid) => {
            if scene.person_positions_m.len() != 1 {
                return Err(SimError::BadLabel {
                    kind: "sector",
                    reason: format!(
                        "sector labeling needs exactly 1 person, scene has {}",
                        scene.person_positions_m.len()
                    ),
                });
            }
            Ok(Label::Sector(grid.sector_of(scene.person_positions_m[0])))
        }
        LabelKind::Coords => {
            if scene.person_positions_m.is_empty() {
                return Err(SimError::BadLabel {
                    kind: "coords",
                    reason: "coordinate labeling needs at least one person".into(),
                });
            }
            Ok(Label::Coords(scene.person_positions_m.clone()))
        }
    }
}

/// Generate `n_packets_per_scene` corrupted packets for every scene.
///
/// Packet indices run consecutively over the whole dataset. The boundary
/// offset is drawn once per scene (one scene = one measurement session);
/// sampling and carrier offsets are redrawn per packet. Every random stream
/// derives from `(seed, scene)` or `(seed, packet index)`, so generation is
/// bit-deterministic and could be parallelized across packets.
pub fn generate_dataset(
    scenes: &[SceneSpec],
    geom: &ArrayGeometry,
    grid: &SubcarrierGrid,
    offsets: &OffsetSpec,
    label_kind: &LabelKind,
    n_packets_per_scene: usize,
    seed: u64,
) -> Result<Vec<CsiPacket>, SimError> {
    assert!(n_packets_per_scene >= 1, "need at least one packet per scene");
    grid.validate()?;
    geom.validate()?;
    offsets.validate()?;

    let mut packets = Vec::with_capacity(scenes.len() * n_packets_per_scene);
    for (s, scene) in scenes.iter().enumerate() {
        let label = scene_label(scene, label_kind)?;
        let paths = scene_to_paths(scene, &mut rng::stream(seed, &[tag::SCENE, s as u64]))?;
        let boundary = offsets
            .boundary_offset
            .sample(&mut rng::stream(seed, &[tag::OFFSET, s as u64]));
        let scene_offsets = OffsetSpec { boundary_offset: Dist::Constant(boundary), ..offsets.clone() };

        for p in 0..n_packets_per_scene {
            let n = (s * n_packets_per_scene + p) as u64;
            let clean = clean_channel(&paths, geom, grid, n, offsets.packet_interval_s)?;
            let interf = interference_channel(scene, geom, grid, n, offsets.packet_interval_s)?;
            let mut packet_rng = rng::stream(seed, &[tag::PACKET, n]);
            let csi = apply_offsets(&clean, &interf, &scene_offsets, &mut packet_rng)?;
            packets.push(CsiPacket { index: n, csi, label: label.clone() });
        }
    }
    Ok(packets)
}
