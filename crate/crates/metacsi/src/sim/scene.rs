//! Generative scene model: positions in a room become propagation paths.
//!
//! The model is deliberately simple: one line-of-sight path between the
//! terminals, one single-bounce path per person, and a configurable number
//! of random static scatterers. Bounce attenuation falls off with the total
//! path length, people get a small random Doppler for body micro-motion,
//! and arrival/departure angles follow from the 2-D geometry with both
//! arrays oriented along the x axis.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use super::types::{PathSpec, SceneSpec, SimError};
use crate::sim::types::LIGHT_SPEED_MPS;

/// Reflection loss applied to every bounce path on top of the 1/distance
/// spreading term.
const BOUNCE_GAIN: f64 = 0.8;

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Direction cosine along the array axis (x), which is exactly the sine of
/// the angle measured from broadside; asin keeps it in [-pi/2, pi/2].
fn axis_angle(from: [f64; 2], to: [f64; 2]) -> f64 {
    let d = dist(from, to);
    ((to[0] - from[0]) / d).clamp(-1.0, 1.0).asin()
}

fn bounce_path<R: Rng + ?Sized>(
    scene: &SceneSpec,
    point: [f64; 2],
    doppler_hz: f64,
    rng: &mut R,
) -> Result<PathSpec, SimError> {
    let d_tx = dist(scene.tx_pos_m, point);
    let d_rx = dist(point, scene.rx_pos_m);
    if d_tx == 0.0 || d_rx == 0.0 {
        return Err(SimError::DegeneratePerson { pos: point });
    }
    let total = d_tx + d_rx;
    let phase = rng.gen_range(0.0..TAU);
    Ok(PathSpec {
        attenuation: Complex64::from_polar(BOUNCE_GAIN / total, phase),
        ref_delay_s: total / LIGHT_SPEED_MPS,
        doppler_hz,
        aoa_rad: axis_angle(scene.rx_pos_m, point),
        aod_rad: axis_angle(scene.tx_pos_m, point),
    })
}

/// Expand a scene into its path list: `[line-of-sight, people..., scatterers...]`.
///
/// The result is a pure function of the scene and the RNG state, so a caller
/// that derives the stream from a fixed seed gets the identical path list
/// every time.
pub fn scene_to_paths<R: Rng + ?Sized>(
    scene: &SceneSpec,
    rng: &mut R,
) -> Result<Vec<PathSpec>, SimError> {
    scene.validate()?;
    let (w, d) = scene.room_dims_m;

    // Scatterers are drawn before people so scenes that differ only in the
    // number of people share the same static clutter realization.
    let scatterers: Vec<PathSpec> = (0..scene.n_static_scatterers)
        .map(|_| {
            let point = [rng.gen_range(0.0..w), rng.gen_range(0.0..d)];
            bounce_path(scene, point, 0.0, rng)
        })
        .collect::<Result<_, _>>()?;

    let los_dist = dist(scene.tx_pos_m, scene.rx_pos_m);
    if los_dist == 0.0 {
        return Err(SimError::BadScene("tx and rx coincide".into()));
    }
    let mut paths = vec![PathSpec {
        attenuation: Complex64::new(1.0 / los_dist, 0.0),
        ref_delay_s: los_dist / LIGHT_SPEED_MPS,
        doppler_hz: 0.0,
        aoa_rad: axis_angle(scene.rx_pos_m, scene.tx_pos_m),
        aod_rad: axis_angle(scene.tx_pos_m, scene.rx_pos_m),
    }];

    for &pos in &scene.person_positions_m {
        let doppler = if scene.person_doppler_max_hz > 0.0 {
            rng.gen_range(-scene.person_doppler_max_hz..scene.person_doppler_max_hz)
        } else {
            0.0
        };
        paths.push(bounce_path(scene, pos, doppler, rng)?);
    }
    paths.extend(scatterers);
    Ok(paths)
}
