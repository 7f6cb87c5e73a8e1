//! End-to-end downlink budget against values computed offline at 40 digits.

use approx::assert_relative_eq;
use chanborrow_core::metrics::{capacity, sinr, NoiseModel};
use chanborrow_core::propagation::{path_loss_db, received_power_w, PropagationParams};

const PARAMS: PropagationParams = PropagationParams {
    fc_mhz: 1800.0,
    bs_height_m: 100.0,
    mobile_height_m: 5.0,
};

const SINR_AT_HALF_KM: f64 = 12.48596785362312;

fn rx(d_km: f64) -> f64 {
    received_power_w(1500.0, path_loss_db(&PARAMS, d_km).unwrap()).unwrap()
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

#[test]
fn half_km_probe_with_three_first_tier_interferers() {
    let s3 = 3f64.sqrt();
    // Reference BS at the origin, probe 0.5 km out at 30 degrees.
    let probe = (
        0.5 * 30f64.to_radians().cos(),
        0.5 * 30f64.to_radians().sin(),
    );
    let interferers = [(1.5, s3 / 2.0), (0.0, -s3), (-1.5, s3 / 2.0)];
    let distances: Vec<f64> = interferers.iter().map(|c| dist(probe, *c)).collect();
    assert_relative_eq!(distances[0], 1.2320508075688772, max_relative = 1e-12);
    assert_relative_eq!(distances[1], 2.028799, max_relative = 1e-6);
    assert_relative_eq!(distances[2], 2.028799, max_relative = 1e-6);

    let noise = NoiseModel::default().power_w();
    assert_relative_eq!(noise, 8.0077642e-16, max_relative = 1e-8);
    let powers: Vec<f64> = distances.iter().map(|d| rx(*d)).collect();
    let g = sinr(rx(0.5), &powers, noise).unwrap();
    assert_relative_eq!(g, SINR_AT_HALF_KM, max_relative = 1e-9);
    assert_relative_eq!(
        capacity(g).unwrap(),
        (1.0 + SINR_AT_HALF_KM).log2(),
        max_relative = 1e-12
    );
}

#[test]
fn noise_is_negligible_against_interference() {
    let powers = [rx(1.2320508075688772)];
    let with = sinr(rx(0.5), &powers, NoiseModel::default().power_w()).unwrap();
    let without = sinr(rx(0.5), &powers, 0.0).unwrap();
    assert!((with - without).abs() / without < 1e-6);
}
