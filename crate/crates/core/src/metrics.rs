//! Link quality of a reference-cell user: SINR, Shannon capacity and
//! outage probability.
//!
//! The closed-form outage assumes an exponentially faded serving signal and
//! deterministic interference with noise neglected. Under that model it is
//! exact, which is what [`outage_monte_carlo`] checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::propagation::db_to_linear;

pub const MIN_MONTE_CARLO_SAMPLES: u64 = 10_000;

const BOLTZMANN: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageThreshold {
    gamma_db: f64,
    gamma_linear: f64,
}

impl OutageThreshold {
    pub fn from_db(gamma_db: f64) -> Result<Self> {
        if !gamma_db.is_finite() {
            return Err(invalid("gamma_db", "must be finite"));
        }
        Ok(Self {
            gamma_db,
            gamma_linear: db_to_linear(gamma_db),
        })
    }

    pub fn from_linear(gamma_linear: f64) -> Result<Self> {
        if !(gamma_linear > 0.0 && gamma_linear.is_finite()) {
            return Err(invalid("gamma_linear", "must be positive"));
        }
        Ok(Self {
            gamma_db: 10.0 * gamma_linear.log10(),
            gamma_linear,
        })
    }

    pub fn db(&self) -> f64 {
        self.gamma_db
    }

    pub fn linear(&self) -> f64 {
        self.gamma_linear
    }
}

/// Thermal noise floor kTB scaled by a receiver noise figure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub temperature_k: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    /// Replaces the thermal computation when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub override_w: Option<f64>,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            temperature_k: 290.0,
            bandwidth_hz: 200e3,
            noise_figure_db: 0.0,
            override_w: None,
        }
    }
}

impl NoiseModel {
    pub fn power_w(&self) -> f64 {
        self.override_w.unwrap_or_else(|| {
            BOLTZMANN * self.temperature_k * self.bandwidth_hz * db_to_linear(self.noise_figure_db)
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature_k > 0.0 && self.temperature_k.is_finite()) {
            return Err(invalid("noise.temperature_k", "must be positive"));
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(invalid("noise.bandwidth_hz", "must be positive"));
        }
        if !self.noise_figure_db.is_finite() {
            return Err(invalid("noise.noise_figure_db", "must be finite"));
        }
        if let Some(w) = self.override_w {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(invalid("noise.override_w", "must be non-negative"));
            }
        }
        Ok(())
    }
}

/// One evaluated downlink.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSample {
    pub d_km: f64,
    pub s0_w: f64,
    pub interferer_powers_w: Vec<f64>,
    pub n0_w: f64,
    pub sinr_linear: f64,
    pub capacity_bps_hz: f64,
    pub outage_prob: f64,
}

impl LinkSample {
    pub fn evaluate(
        d_km: f64,
        s0_w: f64,
        interferer_powers_w: Vec<f64>,
        n0_w: f64,
        threshold: &OutageThreshold,
    ) -> Result<Self> {
        let sinr_linear = sinr(s0_w, &interferer_powers_w, n0_w)?;
        Ok(Self {
            d_km,
            s0_w,
            capacity_bps_hz: capacity(sinr_linear)?,
            outage_prob: outage_closed_form(threshold, s0_w, &interferer_powers_w)?,
            interferer_powers_w,
            n0_w,
            sinr_linear,
        })
    }
}

fn check_powers(interferer_powers_w: &[f64]) -> Result<()> {
    if interferer_powers_w
        .iter()
        .any(|p| !(*p >= 0.0 && p.is_finite()))
    {
        return Err(invalid(
            "interferer_powers_w",
            "powers must be finite and non-negative",
        ));
    }
    Ok(())
}

fn check_serving(s_w: f64) -> Result<()> {
    if !(s_w > 0.0 && s_w.is_finite()) {
        return Err(invalid("s0_w", "serving power must be positive"));
    }
    Ok(())
}

/// Signal over total interference plus noise, linear.
pub fn sinr(s0_w: f64, interferer_powers_w: &[f64], n0_w: f64) -> Result<f64> {
    check_serving(s0_w)?;
    check_powers(interferer_powers_w)?;
    if !(n0_w >= 0.0 && n0_w.is_finite()) {
        return Err(invalid("n0_w", "noise power must be non-negative"));
    }
    let denom: f64 = interferer_powers_w.iter().sum::<f64>() + n0_w;
    if denom == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(s0_w / denom)
}

/// Shannon spectral efficiency in bit/s/Hz.
pub fn capacity(sinr_linear: f64) -> Result<f64> {
    if sinr_linear.is_nan() || sinr_linear < 0.0 {
        return Err(invalid("sinr_linear", "must be non-negative"));
    }
    Ok(sinr_linear.ln_1p() / std::f64::consts::LN_2)
}

/// `1 − Π exp(−γ·I_i / S)` over every interferer, evaluated as the collapsed
/// single exponential.
pub fn outage_closed_form(
    threshold: &OutageThreshold,
    s_w: f64,
    interferer_powers_w: &[f64],
) -> Result<f64> {
    check_serving(s_w)?;
    check_powers(interferer_powers_w)?;
    let total: f64 = interferer_powers_w.iter().sum();
    Ok(-(-threshold.linear() * total / s_w).exp_m1())
}

/// Empirical `P(S·X < γ·ΣI)` with `X ~ Exp(1)`, i.e. a Rayleigh-faded
/// serving signal against fixed interference and no noise.
pub fn outage_monte_carlo(
    threshold: &OutageThreshold,
    s_w: f64,
    interferer_powers_w: &[f64],
    samples: u64,
    seed: u64,
) -> Result<f64> {
    outage_monte_carlo_with_noise(threshold, s_w, interferer_powers_w, 0.0, samples, seed)
}

/// As [`outage_monte_carlo`], with `n0_w` added to the interference.
pub fn outage_monte_carlo_with_noise(
    threshold: &OutageThreshold,
    s_w: f64,
    interferer_powers_w: &[f64],
    n0_w: f64,
    samples: u64,
    seed: u64,
) -> Result<f64> {
    check_serving(s_w)?;
    check_powers(interferer_powers_w)?;
    if samples < MIN_MONTE_CARLO_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_MONTE_CARLO_SAMPLES,
            got: samples,
        });
    }
    if !(n0_w >= 0.0 && n0_w.is_finite()) {
        return Err(invalid("n0_w", "noise power must be non-negative"));
    }
    let impairment = interferer_powers_w.iter().sum::<f64>() + n0_w;
    if impairment == 0.0 {
        return Ok(0.0);
    }
    // Outage iff the unit-mean fade falls below γ(ΣI + N)/S.
    let cutoff = threshold.linear() * impairment / s_w;
    let fade = Exp::new(1.0).expect("unit rate is valid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..samples)
        .filter(|_| fade.sample(&mut rng) < cutoff)
        .count();
    Ok(hits as f64 / samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn gamma(lin: f64) -> OutageThreshold {
        OutageThreshold::from_linear(lin).unwrap()
    }

    #[test]
    fn sinr_examples() {
        assert_eq!(sinr(1.0, &[], 1.0).unwrap(), 1.0);
        assert_eq!(sinr(1.0, &[0.25, 0.25], 0.5).unwrap(), 1.0);
        assert!(matches!(sinr(1.0, &[], 0.0), Err(Error::ZeroDenominator)));
        assert!(matches!(
            sinr(1.0, &[0.0, 0.0], 0.0),
            Err(Error::ZeroDenominator)
        ));
        assert!(sinr(0.0, &[1.0], 1.0).is_err());
        assert!(sinr(1.0, &[-1.0], 1.0).is_err());
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(capacity(1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(capacity(3.0).unwrap(), 2.0, epsilon = 1e-15);
        assert_eq!(capacity(0.0).unwrap(), 0.0);
        assert!(capacity(-0.5).is_err());
    }

    #[test]
    fn threshold_table_value() {
        let t = OutageThreshold::from_db(9.0).unwrap();
        assert_abs_diff_eq!(t.linear(), 7.943_282_347_242_815, epsilon = 1e-12);
        assert!(OutageThreshold::from_linear(0.0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(outage_closed_form(&gamma(7.9), 1e-9, &[]).unwrap(), 0.0);
        assert_eq!(
            outage_closed_form(&gamma(7.9), 1e-9, &[0.0, 0.0]).unwrap(),
            0.0
        );
        let p = outage_closed_form(&gamma(LN_2), 1.0, &[1.0]).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-15);
        assert!(outage_closed_form(&gamma(1.0), 0.0, &[1.0]).is_err());
    }

    #[test]
    fn monte_carlo_examples() {
        assert_eq!(
            outage_monte_carlo(&gamma(8.0), 1.0, &[], 10_000, 3).unwrap(),
            0.0
        );
        let p = outage_monte_carlo(&gamma(LN_2), 1.0, &[1.0], 1_000_000, 11).unwrap();
        assert!((p - 0.5).abs() < 0.002, "{p}");
        let again = outage_monte_carlo(&gamma(LN_2), 1.0, &[1.0], 1_000_000, 11).unwrap();
        assert_eq!(p, again);
        assert!(matches!(
            outage_monte_carlo(&gamma(1.0), 1.0, &[1.0], 9_999, 0),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn noisy_monte_carlo_matches_noise_inclusive_form() {
        let g = gamma(2.0);
        let p = outage_monte_carlo_with_noise(&g, 1.0, &[0.1], 0.2, 400_000, 5).unwrap();
        let exact = 1.0 - (-2.0 * 0.3f64).exp();
        assert!((p - exact).abs() < 4.0 * (exact * (1.0 - exact) / 4e5).sqrt());
    }

    #[test]
    fn noise_model_default_floor() {
        let n = NoiseModel::default().power_w();
        assert_abs_diff_eq!(n, 8.007_764_2e-16, epsilon = 1e-22);
        assert_abs_diff_eq!(10.0 * (n * 1e3).log10(), -120.965, epsilon = 1e-3);
        let fixed = NoiseModel {
            override_w: Some(1e-13),
            ..NoiseModel::default()
        };
        assert_eq!(fixed.power_w(), 1e-13);
    }

    fn interferers() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0..1e-8f64, 0..12)
    }

    proptest! {
        #[test]
        fn product_form_collapses(g in 0.1..20.0f64, s in 1e-10..1e-6f64, is in interferers()) {
            let product: f64 = is.iter().map(|i| (-(g / s) * i).exp()).product();
            let collapsed = outage_closed_form(&gamma(g), s, &is).unwrap();
            prop_assert!(((1.0 - product) - collapsed).abs() <= 1e-12 * collapsed.max(1e-300) + 1e-15);
        }

        #[test]
        fn outage_monotone(g in 0.1..20.0f64, s in 1e-10..1e-6f64, is in interferers(), bump in 0.0..1e-8f64, k in 1.0..3.0f64) {
            let base = outage_closed_form(&gamma(g), s, &is).unwrap();
            let mut more = is.clone();
            more.push(bump);
            prop_assert!(outage_closed_form(&gamma(g), s, &more).unwrap() >= base);
            prop_assert!(outage_closed_form(&gamma(g * k), s, &is).unwrap() >= base);
            prop_assert!(outage_closed_form(&gamma(g), s * k, &is).unwrap() <= base);
        }

        #[test]
        fn extra_interferers_never_help(s in 1e-10..1e-6f64, is in interferers(), extra in interferers(), n in 1e-16..1e-12f64) {
            let mut superset = is.clone();
            superset.extend(&extra);
            prop_assert!(sinr(s, &is, n).unwrap() >= sinr(s, &superset, n).unwrap());
            let g = gamma(7.94);
            prop_assert!(outage_closed_form(&g, s, &is).unwrap() <= outage_closed_form(&g, s, &superset).unwrap());
        }

        #[test]
        fn capacity_preserves_order(a in 0.0..1e6f64, b in 0.0..1e6f64) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(capacity(lo).unwrap() <= capacity(hi).unwrap());
        }
    }
}
