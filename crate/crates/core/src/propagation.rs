//! Okumura-Hata macro-cell path loss.
//!
//! Units: carrier in MHz, antenna heights in meters, distance in kilometers,
//! base-10 logarithms throughout.

use std::sync::Once;

use crate::error::{invalid, Result};

/// Carrier range the empirical model was fitted on.
pub const HATA_VALID_MHZ: (f64, f64) = (150.0, 1500.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationParams {
    pub fc_mhz: f64,
    pub bs_height_m: f64,
    pub mobile_height_m: f64,
}

impl PropagationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.fc_mhz > 0.0 && self.fc_mhz.is_finite()) {
            return Err(invalid("fc_mhz", "must be positive"));
        }
        if !(self.bs_height_m > 0.0 && self.bs_height_m.is_finite()) {
            return Err(invalid("bs_height_m", "must be positive"));
        }
        if !(self.mobile_height_m >= 0.0 && self.mobile_height_m.is_finite()) {
            return Err(invalid("mobile_height_m", "must be non-negative"));
        }
        Ok(())
    }

    /// Loss added per decade of distance.
    pub fn decade_slope_db(&self) -> f64 {
        44.9 - 6.55 * self.bs_height_m.log10()
    }
}

/// Mobile antenna height correction a(h_m), in dB.
pub fn mobile_correction_db(params: &PropagationParams) -> Result<f64> {
    params.validate()?;
    let log_fc = params.fc_mhz.log10();
    Ok(1.1 * (log_fc - 0.7) * params.mobile_height_m - (1.56 * log_fc - 0.8))
}

/// Median path loss in dB at `d_km` from the base station.
pub fn path_loss_db(params: &PropagationParams, d_km: f64) -> Result<f64> {
    if !(d_km > 0.0 && d_km.is_finite()) {
        return Err(invalid("d_km", "distance must be positive"));
    }
    let a_hm = mobile_correction_db(params)?;
    let log_fc = params.fc_mhz.log10();
    let log_hb = params.bs_height_m.log10();
    Ok(69.55 + 26.16 * log_fc - 13.82 * log_hb - a_hm + params.decade_slope_db() * d_km.log10())
}

/// Transmit power attenuated by `loss_db`.
pub fn received_power_w(tx_power_w: f64, loss_db: f64) -> Result<f64> {
    if !(tx_power_w > 0.0 && tx_power_w.is_finite()) {
        return Err(invalid("tx_power_w", "must be positive"));
    }
    Ok(tx_power_w * 10f64.powf(-loss_db / 10.0))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

static RANGE_NOTICE: Once = Once::new();

/// Logs once per process when the carrier lies outside the fitted range.
/// The formula is still evaluated as-is.
pub fn note_carrier_range(fc_mhz: f64) {
    if fc_mhz < HATA_VALID_MHZ.0 || fc_mhz > HATA_VALID_MHZ.1 {
        RANGE_NOTICE.call_once(|| {
            log::warn!(
                "carrier {fc_mhz} MHz is outside the Okumura-Hata range {}-{} MHz; evaluating anyway",
                HATA_VALID_MHZ.0,
                HATA_VALID_MHZ.1
            );
        });
    }
}
