//! The channel equations: subcarrier frequencies, per-path delays, clean and
//! interfering channel synthesis, and the receiver offset model.

use std::f64::consts::TAU;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::rng::{self, tag};

use super::types::{
    ArrayGeometry, Dist, InterfererSpec, OffsetSpec, PathSpec, SceneSpec, SimError, SubcarrierGrid,
};

/// Per-subcarrier frequencies `f_k = f_c + delta_f_k`.
pub fn subcarrier_frequencies(grid: &SubcarrierGrid) -> Vec<f64> {
    grid.offsets_hz.iter().map(|o| grid.carrier_freq_hz + o).collect()
}

/// Decompose a 0-based spatial link index into 0-based (rx, tx) antenna
/// indices. Links are ordered receive-antenna-major: link = rx * n_tx + tx.
pub fn spatial_link_pair(geom: &ArrayGeometry, m: usize) -> Result<(usize, usize), SimError> {
    let max = geom.n_links();
    if m >= max {
        return Err(SimError::LinkOutOfRange { m, max });
    }
    Ok((m / geom.n_tx, m % geom.n_tx))
}

/// Propagation delay of one path at packet `n`, subcarrier `k`, spatial link
/// `m` (all 0-based):
///
/// `tau = ref_delay + (doppler / f_k) * n * packet_interval
///      + (d_rx * sin(aoa) + d_tx * sin(aod)) / v_c`
pub fn path_delay(
    path: &PathSpec,
    geom: &ArrayGeometry,
    grid: &SubcarrierGrid,
    n: u64,
    k: usize,
    m: usize,
    packet_interval_s: f64,
) -> Result<f64, SimError> {
    let (rx, tx) = spatial_link_pair(geom, m)?;
    let f_k = grid.carrier_freq_hz + grid.offsets_hz[k];
    let dt_n = n as f64 * packet_interval_s;
    let doppler_term = path.doppler_hz / f_k * dt_n;
    let spatial_term = (geom.rx_spacings_m[rx] * path.aoa_rad.sin()
        + geom.tx_spacings_m[tx] * path.aod_rad.sin())
        / geom.light_speed_mps;
    Ok(path.ref_delay_s + doppler_term + spatial_term)
}

/// Clean multipath channel for packet `n`: each entry is the sum over paths
/// of `attenuation * exp(-j*2*pi*f_k*tau)`. Attenuation is treated as
/// constant within a packet.
pub fn clean_channel(
    paths: &[PathSpec],
    geom: &ArrayGeometry,
    grid: &SubcarrierGrid,
    n: u64,
    packet_interval_s: f64,
) -> Result<Array2<Complex64>, SimError> {
    for p in paths {
        p.validate()?;
    }
    let k_count = grid.n_subcarriers();
    let m_count = geom.n_links();
    let freqs = subcarrier_frequencies(grid);
    let dt_n = n as f64 * packet_interval_s;

    let mut h = Array2::<Complex64>::zeros((k_count, m_count));
    for path in paths {
        let sin_aoa = path.aoa_rad.sin();
        let sin_aod = path.aod_rad.sin();
        for m in 0..m_count {
            let rx = m / geom.n_tx;
            let tx = m % geom.n_tx;
            let spatial = (geom.rx_spacings_m[rx] * sin_aoa + geom.tx_spacings_m[tx] * sin_aod)
                / geom.light_speed_mps;
            for (k, &f_k) in freqs.iter().enumerate() {
                // f_k * (doppler/f_k * dt) folds to doppler * dt: the Doppler
                // phase advance is common to all subcarriers of a path.
                let tau = path.ref_delay_s + path.doppler_hz / f_k * dt_n + spatial;
                let phase = -TAU * f_k * tau;
                h[[k, m]] += path.attenuation * Complex64::from_polar(1.0, phase);
            }
        }
    }
    Ok(h)
}

/// Materialize the path list of one interferer. Random interferers draw
/// delays, complex attenuations, small Doppler shifts, and angles from their
/// own seed so the realization is stable across packets and scenes.
pub fn interferer_paths(spec: &InterfererSpec) -> Vec<PathSpec> {
    match spec {
        InterfererSpec::Explicit(paths) => paths.clone(),
        InterfererSpec::Random { n_paths, seed } => {
            let mut rng = rng::stream(*seed, &[tag::INTERFERER]);
            (0..*n_paths)
                .map(|_| {
                    let mag = rng.gen_range(0.05..0.4);
                    let phase = rng.gen_range(0.0..TAU);
                    PathSpec {
                        attenuation: Complex64::from_polar(mag, phase),
                        ref_delay_s: rng.gen_range(10e-9..300e-9),
                        doppler_hz: rng.gen_range(-2.0..2.0),
                        aoa_rad: rng.gen_range(-1.2..1.2),
                        aod_rad: rng.gen_range(-1.2..1.2),
                    }
                })
                .collect()
        }
    }
}

/// Sum of the interfering channels of all external devices in the scene;
/// zero interferers give the zero matrix.
pub fn interference_channel(
    scene: &SceneSpec,
    geom: &ArrayGeometry,
    grid: &SubcarrierGrid,
    n: u64,
    packet_interval_s: f64,
) -> Result<Array2<Complex64>, SimError> {
    let mut total = Array2::<Complex64>::zeros((grid.n_subcarriers(), geom.n_links()));
    for spec in &scene.interferers {
        let paths = interferer_paths(spec);
        total += &clean_channel(&paths, geom, grid, n, packet_interval_s)?;
    }
    Ok(total)
}

/// Rotate each subcarrier row by `exp(j*2*pi*(slope*k + intercept))` with
/// 1-based `k`. This is the deterministic core of the offset model; `slope`
/// plays the role of `eps_b + eps_s(n)` and `intercept` of `eps_c(n)`.
pub fn apply_phase_offset(csi: &Array2<Complex64>, slope: f64, intercept: f64) -> Array2<Complex64> {
    let mut out = csi.clone();
    for (k, mut row) in out.rows_mut().into_iter().enumerate() {
        let phase = TAU * (slope * (k as f64 + 1.0) + intercept);
        let factor = Complex64::from_polar(1.0, phase);
        row.mapv_inplace(|v| v * factor);
    }
    out
}

/// Per-packet offsets drawn from an [`OffsetSpec`].
#[derive(Debug, Clone, Copy)]
pub struct DrawnOffsets {
    pub slope: f64,
    pub intercept: f64,
}

pub(crate) fn draw_packet_offsets<R: Rng + ?Sized>(
    boundary_offset: f64,
    spec: &OffsetSpec,
    rng: &mut R,
) -> DrawnOffsets {
    let eps_s = spec.sampling_offset_dist.sample(rng);
    let eps_c = spec.carrier_offset_dist.sample(rng);
    DrawnOffsets { slope: boundary_offset + eps_s, intercept: eps_c }
}

/// Corrupt `clean + interference` with the receiver offset model: a phase
/// factor affine in the subcarrier index (shared by all spatial links) plus
/// complex noise drawn once per subcarrier and added to every link, matching
/// the `(n, k)` indexing of the noise term.
pub fn apply_offsets<R: Rng + ?Sized>(
    clean: &Array2<Complex64>,
    interference: &Array2<Complex64>,
    spec: &OffsetSpec,
    rng: &mut R,
) -> Result<Array2<Complex64>, SimError> {
    assert_eq!(clean.dim(), interference.dim(), "matrix shapes must match");
    spec.validate()?;
    let boundary = match spec.boundary_offset {
        Dist::Constant(v) => v,
        ref d => d.sample(rng),
    };
    let drawn = draw_packet_offsets(boundary, spec, rng);
    let mut out = apply_phase_offset(&(clean + interference), drawn.slope, drawn.intercept);
    if spec.noise_std > 0.0 {
        let normal = Normal::new(0.0, spec.noise_std).expect("std validated");
        for mut row in out.rows_mut() {
            let noise = Complex64::new(normal.sample(rng), normal.sample(rng));
            row.mapv_inplace(|v| v + noise);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::types::LIGHT_SPEED_MPS;
    use ndarray::Array2;

    fn small_grid() -> SubcarrierGrid {
        SubcarrierGrid::uniform(2.437e9, 8, 312.5e3)
    }

    fn small_geom() -> ArrayGeometry {
        ArrayGeometry::uniform(2, 2, 0.06)
    }

    #[test]
    fn frequencies_zero_offsets_are_carrier() {
        let grid = SubcarrierGrid { carrier_freq_hz: 2.437e9, offsets_hz: vec![0.0; 4] };
        // strictly-increasing invariant is deliberately bypassed here to get
        // the all-carrier degenerate case
        for f in subcarrier_frequencies(&grid) {
            assert_eq!(f, 2.437e9);
        }
    }

    #[test]
    fn frequencies_80211n_span() {
        let grid = SubcarrierGrid::ieee80211n_20mhz(2.437e9);
        grid.validate().unwrap();
        let f = subcarrier_frequencies(&grid);
        assert_eq!(f.len(), 52);
        assert_eq!(f[0], 2.437e9 - 8.125e6);
        assert_eq!(f[51], 2.437e9 + 8.125e6);
        // 312.5 kHz steps except the doubled gap where DC is skipped
        for w in f.windows(2) {
            let step = w[1] - w[0];
            assert!((step - 312.5e3).abs() < 1e-6 || (step - 625e3).abs() < 1e-6);
        }
    }

    #[test]
    fn frequencies_single_negative_offset() {
        let grid =
            SubcarrierGrid::new(2.437e9, vec![-312_500.0, 0.0, 312_500.0]).unwrap();
        let f = subcarrier_frequencies(&grid);
        assert_eq!(f[0], 2.437e9 - 312_500.0);
    }

    #[test]
    fn delay_reduces_to_reference() {
        let path = PathSpec {
            attenuation: Complex64::new(1.0, 0.0),
            ref_delay_s: 17e-9,
            doppler_hz: 0.0,
            aoa_rad: 0.3,
            aod_rad: -0.2,
        };
        let geom = ArrayGeometry::uniform(2, 2, 0.0);
        let grid = small_grid();
        for m in 0..4 {
            let tau = path_delay(&path, &geom, &grid, 5, 3, m, 1e-3).unwrap();
            assert!((tau - 17e-9).abs() < 1e-24);
        }
    }

    #[test]
    fn delay_doppler_term() {
        let path = PathSpec {
            attenuation: Complex64::new(1.0, 0.0),
            ref_delay_s: 10e-9,
            doppler_hz: 10.0,
            aoa_rad: 0.0,
            aod_rad: 0.0,
        };
        let geom = ArrayGeometry::uniform(1, 1, 0.06);
        let grid = SubcarrierGrid { carrier_freq_hz: 2.437e9, offsets_hz: vec![0.0, 1.0] };
        let tau = path_delay(&path, &geom, &grid, 1, 0, 0, 1e-3).unwrap();
        let expected = 10e-9 + (10.0 / 2.437e9) * 1e-3;
        assert!((tau - expected).abs() < 1e-24);
    }

    #[test]
    fn delay_broadside_spatial_term() {
        let path = PathSpec {
            attenuation: Complex64::new(1.0, 0.0),
            ref_delay_s: 0.0,
            doppler_hz: 0.0,
            aoa_rad: std::f64::consts::FRAC_PI_2,
            aod_rad: 0.0,
        };
        let geom = ArrayGeometry::uniform(1, 2, 0.06);
        let grid = small_grid();
        // second receive antenna, only transmit antenna
        let tau = path_delay(&path, &geom, &grid, 0, 0, 1, 1e-3).unwrap();
        let expected = 0.06 / LIGHT_SPEED_MPS;
        assert!((tau - expected).abs() < 1e-22);
        assert!((expected - 2.0014e-10).abs() < 1e-13);
    }

    #[test]
    fn delay_rejects_out_of_range_link() {
        let path = PathSpec {
            attenuation: Complex64::new(1.0, 0.0),
            ref_delay_s: 0.0,
            doppler_hz: 0.0,
            aoa_rad: 0.0,
            aod_rad: 0.0,
        };
        let err = path_delay(&path, &small_geom(), &small_grid(), 0, 0, 4, 1e-3);
        assert!(matches!(err, Err(SimError::LinkOutOfRange { m: 4, max: 4 })));
    }

    #[test]
    fn clean_channel_single_trivial_path_is_ones() {
        let paths = [PathSpec {
            attenuation: Complex64::new(1.0, 0.0),
            ref_delay_s: 0.0,
            doppler_hz: 0.0,
            aoa_rad: 0.0,
            aod_rad: 0.0,
        }];
        let h = clean_channel(&paths, &small_geom(), &small_grid(), 7, 1e-3).unwrap();
        for v in h.iter() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn clean_channel_half_period_paths_cancel() {
        let grid = small_grid();
        let geom = ArrayGeometry::uniform(1, 1, 0.0);
        let k = 3;
        let f_k = subcarrier_frequencies(&grid)[k];
        let base = PathSpec {
            attenuation: Complex64::new(1.0, 0.0),
            ref_delay_s: 25e-9,
            doppler_hz: 0.0,
            aoa_rad: 0.0,
            aod_rad: 0.0,
        };
        let opposed = PathSpec { ref_delay_s: base.ref_delay_s + 1.0 / (2.0 * f_k), ..base };
        let h = clean_channel(&[base, opposed], &geom, &grid, 0, 1e-3).unwrap();
        assert!(h[[k, 0]].norm() < 1e-12);
    }

    /// Naive per-term oracle: evaluate Eq-by-Eq with scalar calls only.
    fn oracle_channel(
        paths: &[PathSpec],
        geom: &ArrayGeometry,
        grid: &SubcarrierGrid,
        n: u64,
        interval: f64,
    ) -> Array2<Complex64> {
        let k_count = grid.n_subcarriers();
        let m_count = geom.n_links();
        let mut h = Array2::<Complex64>::zeros((k_count, m_count));
        for k in 0..k_count {
            for m in 0..m_count {
                let f_k = subcarrier_frequencies(grid)[k];
                let mut acc = Complex64::new(0.0, 0.0);
                for p in paths {
                    let tau = path_delay(p, geom, grid, n, k, m, interval).unwrap();
                    acc += p.attenuation * Complex64::from_polar(1.0, -TAU * f_k * tau);
                }
                h[[k, m]] = acc;
            }
        }
        h
    }

    #[test]
    fn clean_channel_matches_bruteforce_oracle() {
        use rand::Rng;
        let mut rng = crate::rng::stream(11, &[99]);
        let grid = small_grid();
        let geom = small_geom();
        let paths: Vec<PathSpec> = (0..3)
            .map(|_| PathSpec {
                attenuation: Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                ref_delay_s: rng.gen_range(0.0..200e-9),
                doppler_hz: rng.gen_range(-5.0..5.0),
                aoa_rad: rng.gen_range(-1.0..1.0),
                aod_rad: rng.gen_range(-1.0..1.0),
            })
            .collect();
        let h = clean_channel(&paths, &geom, &grid, 13, 1e-3).unwrap();
        let want = oracle_channel(&paths, &geom, &grid, 13, 1e-3);
        for (a, b) in h.iter().zip(want.iter()) {
            assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn interference_empty_is_zero() {
        let scene = SceneSpec {
            room_dims_m: (5.0, 3.0),
            tx_pos_m: [0.5, 1.5],
            rx_pos_m: [4.5, 1.5],
            person_positions_m: vec![],
            n_static_scatterers: 0,
            interferers: vec![],
            person_doppler_max_hz: 5.0,
        };
        let h = interference_channel(&scene, &small_geom(), &small_grid(), 3, 1e-3).unwrap();
        assert!(h.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn interference_single_explicit_path() {
        let scene = SceneSpec {
            room_dims_m: (5.0, 3.0),
            tx_pos_m: [0.5, 1.5],
            rx_pos_m: [4.5, 1.5],
            person_positions_m: vec![],
            n_static_scatterers: 0,
            interferers: vec![InterfererSpec::Explicit(vec![PathSpec {
                attenuation: Complex64::new(0.5, 0.0),
                ref_delay_s: 0.0,
                doppler_hz: 0.0,
                aoa_rad: 0.0,
                aod_rad: 0.0,
            }])],
            person_doppler_max_hz: 5.0,
        };
        let h = interference_channel(&scene, &small_geom(), &small_grid(), 0, 1e-3).unwrap();
        for v in h.iter() {
            assert!((v - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn interference_is_additive_over_devices() {
        let a = InterfererSpec::Random { n_paths: 3, seed: 5 };
        let b = InterfererSpec::Random { n_paths: 2, seed: 9 };
        let scene = SceneSpec {
            room_dims_m: (5.0, 3.0),
            tx_pos_m: [0.5, 1.5],
            rx_pos_m: [4.5, 1.5],
            person_positions_m: vec![],
            n_static_scatterers: 0,
            interferers: vec![a.clone(), b.clone()],
            person_doppler_max_hz: 5.0,
        };
        let geom = small_geom();
        let grid = small_grid();
        let total = interference_channel(&scene, &geom, &grid, 4, 1e-3).unwrap();
        let ha = clean_channel(&interferer_paths(&a), &geom, &grid, 4, 1e-3).unwrap();
        let hb = clean_channel(&interferer_paths(&b), &geom, &grid, 4, 1e-3).unwrap();
        for ((t, a), b) in total.iter().zip(ha.iter()).zip(hb.iter()) {
            assert!((t - (a + b)).norm() < 1e-12);
        }
    }

    #[test]
    fn offsets_identity_when_zero() {
        let grid = small_grid();
        let geom = small_geom();
        let clean = clean_channel(
            &[PathSpec {
                attenuation: Complex64::new(0.8, 0.1),
                ref_delay_s: 30e-9,
                doppler_hz: 0.0,
                aoa_rad: 0.1,
                aod_rad: 0.2,
            }],
            &geom,
            &grid,
            2,
            1e-3,
        )
        .unwrap();
        let interf = Array2::<Complex64>::zeros(clean.dim());
        let mut rng = crate::rng::stream(1, &[1]);
        let out = apply_offsets(&clean, &interf, &OffsetSpec::clean(), &mut rng).unwrap();
        for (a, b) in out.iter().zip(clean.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn offsets_rotate_per_subcarrier_preserving_magnitude() {
        let k_count = 6;
        let m_count = 3;
        let base = Array2::<Complex64>::from_shape_fn((k_count, m_count), |(k, m)| {
            Complex64::new(1.0 + k as f64, 0.5 - m as f64)
        });
        let out = apply_phase_offset(&base, 0.01, 0.2);
        for k in 0..k_count {
            let expected_phase = TAU * (0.01 * (k as f64 + 1.0) + 0.2);
            for m in 0..m_count {
                let ratio = out[[k, m]] / base[[k, m]];
                assert!((ratio.norm() - 1.0).abs() < 1e-12);
                let diff = (ratio.arg() - expected_phase).rem_euclid(TAU);
                assert!(diff < 1e-9 || (TAU - diff) < 1e-9);
                assert!((out[[k, m]].norm() - base[[k, m]].norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn offset_noise_moments() {
        let spec = OffsetSpec { noise_std: 0.05, ..OffsetSpec::clean() };
        let clean = Array2::<Complex64>::from_elem((100, 1), Complex64::new(1.0, -0.5));
        let interf = Array2::<Complex64>::zeros((100, 1));
        let mut rng = crate::rng::stream(7, &[3]);
        let n_draws = 100_000;
        let mut sum_re = 0.0;
        let mut sum_im = 0.0;
        let mut sum_sq_re = 0.0;
        let mut sum_sq_im = 0.0;
        let mut count = 0usize;
        for _ in 0..n_draws / 100 {
            let out = apply_offsets(&clean, &interf, &spec, &mut rng).unwrap();
            for (o, c) in out.iter().zip(clean.iter()) {
                let d = o - c;
                sum_re += d.re;
                sum_im += d.im;
                sum_sq_re += d.re * d.re;
                sum_sq_im += d.im * d.im;
                count += 1;
            }
        }
        let n = count as f64;
        let mean_tol = 3.0 * 0.05 / n.sqrt();
        assert!((sum_re / n).abs() < mean_tol);
        assert!((sum_im / n).abs() < mean_tol);
        // var(X^2) for X ~ N(0, s^2) is 2 s^4; 3-sigma band on sample variance
        let var_tol = 3.0 * (2.0f64).sqrt() * 0.05 * 0.05 / n.sqrt();
        assert!((sum_sq_re / n - 0.0025).abs() < var_tol);
        assert!((sum_sq_im / n - 0.0025).abs() < var_tol);
    }
}
