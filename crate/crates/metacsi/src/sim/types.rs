//! Domain types for the channel simulator.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("subcarrier grid invalid: {0}")]
    BadGrid(String),
    #[error("array geometry invalid: {0}")]
    BadGeometry(String),
    #[error("scene invalid: {0}")]
    BadScene(String),
    #[error("offset spec invalid: {0}")]
    BadOffsets(String),
    #[error("spatial link index {m} out of range [0, {max})")]
    LinkOutOfRange { m: usize, max: usize },
    #[error("path parameter is not finite: {0}")]
    NonFinitePath(String),
    #[error("person at {pos:?} coincides with a terminal")]
    DegeneratePerson { pos: [f64; 2] },
    #[error("label kind {kind} inconsistent with scene: {reason}")]
    BadLabel { kind: &'static str, reason: String },
}

/// OFDM subcarrier layout: the carrier plus one frequency offset per
/// subcarrier, so the k-th subcarrier sits at `carrier_freq_hz + offsets_hz[k]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubcarrierGrid {
    pub carrier_freq_hz: f64,
    pub offsets_hz: Vec<f64>,
}

impl SubcarrierGrid {
    pub fn new(carrier_freq_hz: f64, offsets_hz: Vec<f64>) -> Result<Self, SimError> {
        let grid = Self { carrier_freq_hz, offsets_hz };
        grid.validate()?;
        Ok(grid)
    }

    /// The 52 data/pilot subcarriers of a 20 MHz 802.11n channel: 312.5 kHz
    /// spacing, indices -26..=26 with DC skipped.
    pub fn ieee80211n_20mhz(carrier_freq_hz: f64) -> Self {
        const SPACING_HZ: f64 = 312.5e3;
        let offsets = (-26i32..=26)
            .filter(|&i| i != 0)
            .map(|i| f64::from(i) * SPACING_HZ)
            .collect();
        Self { carrier_freq_hz, offsets_hz: offsets }
    }

    /// `K` evenly spaced subcarriers centered on the carrier (no DC gap).
    /// Handy for small test grids.
    pub fn uniform(carrier_freq_hz: f64, k: usize, spacing_hz: f64) -> Self {
        let mid = (k as f64 - 1.0) / 2.0;
        let offsets = (0..k).map(|i| (i as f64 - mid) * spacing_hz).collect();
        Self { carrier_freq_hz, offsets_hz: offsets }
    }

    pub fn n_subcarriers(&self) -> usize {
        self.offsets_hz.len()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.offsets_hz.len() < 2 {
            return Err(SimError::BadGrid("need at least 2 subcarriers".into()));
        }
        if !self.carrier_freq_hz.is_finite() || self.carrier_freq_hz <= 0.0 {
            return Err(SimError::BadGrid("carrier frequency must be finite and positive".into()));
        }
        for w in self.offsets_hz.windows(2) {
            if !(w[1] > w[0]) {
                return Err(SimError::BadGrid("offsets must be strictly increasing".into()));
            }
        }
        for &o in &self.offsets_hz {
            if !o.is_finite() || self.carrier_freq_hz + o <= 0.0 {
                return Err(SimError::BadGrid("subcarrier frequency not finite/positive".into()));
            }
        }
        Ok(())
    }
}

/// Uniform linear transmit/receive arrays. Spacings are measured from the
/// reference antenna of each array, so the first entry is always 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_tx: usize,
    pub n_rx: usize,
    pub rx_spacings_m: Vec<f64>,
    pub tx_spacings_m: Vec<f64>,
    pub light_speed_mps: f64,
}

pub const LIGHT_SPEED_MPS: f64 = 299_792_458.0;

impl ArrayGeometry {
    pub fn new(
        n_tx: usize,
        n_rx: usize,
        rx_spacings_m: Vec<f64>,
        tx_spacings_m: Vec<f64>,
    ) -> Result<Self, SimError> {
        let geom = Self { n_tx, n_rx, rx_spacings_m, tx_spacings_m, light_speed_mps: LIGHT_SPEED_MPS };
        geom.validate()?;
        Ok(geom)
    }

    /// Arrays with uniform element spacing.
    pub fn uniform(n_tx: usize, n_rx: usize, spacing_m: f64) -> Self {
        let sp = |n: usize| (0..n).map(|i| i as f64 * spacing_m).collect();
        Self {
            n_tx,
            n_rx,
            rx_spacings_m: sp(n_rx),
            tx_spacings_m: sp(n_tx),
            light_speed_mps: LIGHT_SPEED_MPS,
        }
    }

    /// Number of spatial links `M = n_rx * n_tx`.
    pub fn n_links(&self) -> usize {
        self.n_rx * self.n_tx
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(SimError::BadGeometry("antenna counts must be positive".into()));
        }
        if self.rx_spacings_m.len() != self.n_rx || self.tx_spacings_m.len() != self.n_tx {
            return Err(SimError::BadGeometry("spacing vector length mismatch".into()));
        }
        if self.rx_spacings_m[0] != 0.0 || self.tx_spacings_m[0] != 0.0 {
            return Err(SimError::BadGeometry("reference antenna spacing must be 0".into()));
        }
        if !self.light_speed_mps.is_finite() || self.light_speed_mps <= 0.0 {
            return Err(SimError::BadGeometry("light speed must be positive".into()));
        }
        Ok(())
    }
}

/// One propagation path: complex attenuation, reference delay, Doppler shift
/// of the moving reflector, and the arrival/departure angles at the arrays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub attenuation: Complex64,
    pub ref_delay_s: f64,
    pub doppler_hz: f64,
    pub aoa_rad: f64,
    pub aod_rad: f64,
}

impl PathSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if !self.attenuation.re.is_finite() || !self.attenuation.im.is_finite() {
            return Err(SimError::NonFinitePath("attenuation".into()));
        }
        if !self.ref_delay_s.is_finite() || self.ref_delay_s < 0.0 {
            return Err(SimError::NonFinitePath("ref_delay_s".into()));
        }
        if !self.doppler_hz.is_finite() {
            return Err(SimError::NonFinitePath("doppler_hz".into()));
        }
        let half_pi = std::f64::consts::FRAC_PI_2 + 1e-12;
        if self.aoa_rad.abs() > half_pi || self.aod_rad.abs() > half_pi {
            return Err(SimError::NonFinitePath("angle outside [-pi/2, pi/2]".into()));
        }
        Ok(())
    }
}

/// How an interfering device's propagation paths are produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum InterfererSpec {
    /// Fixed path list, mainly for tests and hand-built scenes.
    Explicit(Vec<PathSpec>),
    /// `n_paths` random paths drawn from the given seed; the realization is
    /// fixed per scene so interference looks like a stable external device.
    Random { n_paths: usize, seed: u64 },
}

impl InterfererSpec {
    pub fn n_paths(&self) -> usize {
        match self {
            InterfererSpec::Explicit(paths) => paths.len(),
            InterfererSpec::Random { n_paths, .. } => *n_paths,
        }
    }
}

/// A measurement scene: the room, the terminal positions, the people (which
/// define the labels), static clutter, and external interferers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneSpec {
    pub room_dims_m: (f64, f64),
    pub tx_pos_m: [f64; 2],
    pub rx_pos_m: [f64; 2],
    pub person_positions_m: Vec<[f64; 2]>,
    pub n_static_scatterers: usize,
    pub interferers: Vec<InterfererSpec>,
    /// Doppler magnitude bound for person micro-motion, Uniform(-d, d).
    pub person_doppler_max_hz: f64,
}

impl SceneSpec {
    pub fn n_interferers(&self) -> usize {
        self.interferers.len()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let (w, d) = self.room_dims_m;
        if !(w > 0.0 && d > 0.0) {
            return Err(SimError::BadScene("room dimensions must be positive".into()));
        }
        let inside = |p: &[f64; 2]| p[0] >= 0.0 && p[0] <= w && p[1] >= 0.0 && p[1] <= d;
        if !inside(&self.tx_pos_m) || !inside(&self.rx_pos_m) {
            return Err(SimError::BadScene("terminal outside room".into()));
        }
        for p in &self.person_positions_m {
            if !inside(p) {
                return Err(SimError::BadScene(format!("person {p:?} outside room")));
            }
        }
        if !self.person_doppler_max_hz.is_finite() || self.person_doppler_max_hz < 0.0 {
            return Err(SimError::BadScene("person doppler bound must be >= 0".into()));
        }
        Ok(())
    }
}

/// Scalar distribution descriptor used for the offset laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Dist {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
}

impl Dist {
    pub fn zero() -> Self {
        Dist::Constant(0.0)
    }

    /// Uniform(-b, b).
    pub fn symmetric(bound: f64) -> Self {
        if bound == 0.0 {
            Dist::Constant(0.0)
        } else {
            Dist::Uniform { lo: -bound, hi: bound }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist::Constant(v) => v,
            Dist::Uniform { lo, hi } => rng.gen_range(lo..hi),
        }
    }
}

/// Transceiver offset model for one measurement session.
///
/// `boundary_offset` is the packet-boundary detection term sampled once per
/// session, `sampling_offset_dist` / `carrier_offset_dist` are resampled per
/// packet, and `noise_std` is the per-component standard deviation of the
/// additive complex noise. All phase terms are in cycles: the applied factor
/// is `exp(j*2*pi*((eps_b + eps_s)*k + eps_c))` over 1-based subcarrier `k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OffsetSpec {
    pub boundary_offset: Dist,
    pub sampling_offset_dist: Dist,
    pub carrier_offset_dist: Dist,
    pub noise_std: f64,
    pub packet_interval_s: f64,
    pub sampling_freq_hz: f64,
}

impl OffsetSpec {
    /// No offsets, no noise; 1 kHz packet rate.
    pub fn clean() -> Self {
        Self {
            boundary_offset: Dist::zero(),
            sampling_offset_dist: Dist::zero(),
            carrier_offset_dist: Dist::zero(),
            noise_std: 0.0,
            packet_interval_s: 1e-3,
            sampling_freq_hz: 1e3,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.noise_std >= 0.0) {
            return Err(SimError::BadOffsets("noise_std must be >= 0".into()));
        }
        if !(self.packet_interval_s > 0.0) {
            return Err(SimError::BadOffsets("packet_interval_s must be > 0".into()));
        }
        Ok(())
    }
}

/// Ground-truth label attached to each generated packet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Label {
    /// Number of people in the room.
    Count(usize),
    /// Grid-cell index of the single person.
    Sector(usize),
    /// Positions of all people, meters.
    Coords(Vec<[f64; 2]>),
}

impl Label {
    /// Class index for the classification heads.
    pub fn class(&self) -> Option<usize> {
        match self {
            Label::Count(c) | Label::Sector(c) => Some(*c),
            Label::Coords(_) => None,
        }
    }
}

/// One received packet: measurement index and the raw complex K x M channel
/// matrix (subcarrier-major), plus its ground-truth label.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiPacket {
    pub index: u64,
    pub csi: Array2<Complex64>,
    pub label: Label,
}

impl CsiPacket {
    pub fn n_subcarriers(&self) -> usize {
        self.csi.nrows()
    }

    pub fn n_links(&self) -> usize {
        self.csi.ncols()
    }
}
