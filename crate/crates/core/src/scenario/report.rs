use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::error::{Error, Result};

use super::run::{MetricsReport, Scheme};

pub const CSV_HEADER: [&str; 7] = [
    "distance_km",
    "scheme",
    "sinr_db",
    "capacity_bps_hz",
    "outage_prob",
    "active_tier1",
    "active_tier2",
];

/// Lines printed by [`emit_summary`] before the per-distance table.
pub const SUMMARY_PREAMBLE_LINES: usize = 4;
/// Lines printed by [`emit_summary`] after the per-distance table.
pub const SUMMARY_FOOTER_LINES: usize = 3;

/// Plain decimal with 6 significant digits.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    // Round through scientific notation so a carry (9.999996 -> 10.0000)
    // moves the exponent before the decimal count is chosen.
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let rounded: f64 = format!("{mantissa}e{exp}").parse().expect("valid float");
    let decimals = (5 - exp).max(0) as usize;
    format!("{rounded:.decimals$}")
}

/// Writes the report as CSV with LF line endings.
pub fn write_csv<W: io::Write>(report: &MetricsReport, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &report.rows {
        w.write_record([
            format_sig6(r.distance_km),
            r.scheme.label().to_string(),
            format_sig6(r.sinr_db),
            format_sig6(r.capacity_bps_hz),
            format_sig6(r.outage_prob),
            r.active_tier1.to_string(),
            r.active_tier2.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(report: &MetricsReport, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(report, io::BufWriter::new(file))
}

/// One parsed CSV data row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub distance_km: f64,
    pub scheme: Scheme,
    pub sinr_db: f64,
    pub capacity_bps_hz: f64,
    pub outage_prob: f64,
    pub active_tier1: usize,
    pub active_tier2: usize,
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(Error::Premise(format!("unexpected CSV header {header:?}")));
    }
    let bad = |what: &str, v: &str| Error::Premise(format!("bad {what} `{v}`"));
    let float = |v: &str| v.parse::<f64>().map_err(|_| bad("number", v));
    let count = |v: &str| v.parse::<usize>().map_err(|_| bad("count", v));
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok(CsvRow {
                distance_km: float(&rec[0])?,
                scheme: Scheme::from_label(&rec[1]).ok_or_else(|| bad("scheme", &rec[1]))?,
                sinr_db: float(&rec[2])?,
                capacity_bps_hz: float(&rec[3])?,
                outage_prob: float(&rec[4])?,
                active_tier1: count(&rec[5])?,
                active_tier2: count(&rec[6])?,
            })
        })
        .collect()
}

fn stats(values: &[f64]) -> (f64, f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    (min, mean, max)
}

/// Human-readable table of proposed − conventional deltas per distance.
pub fn emit_summary(report: &MetricsReport) -> String {
    let m = &report.metadata;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "scenario {} seed {} strategy {} probe channel {} (borrow at t={:.1}s: {} granted, {} blocked, {} bifurcated)",
        &m.config_hash[..16],
        m.seed,
        m.strategy,
        m.probe_channel,
        m.first_borrow_s,
        m.channels_granted,
        m.copies_blocked,
        m.copies_bifurcated,
    );
    let _ = writeln!(
        s,
        "reference cell calls  conventional {}/{} blocked  proposed {}/{} blocked  noise {:.4e} W",
        m.conventional_calls.blocked,
        m.conventional_calls.offered,
        m.proposed_calls.blocked,
        m.proposed_calls.offered,
        m.noise_w,
    );
    let _ = writeln!(
        s,
        "{:>8} {:>10} {:>10} {:>11} | {:>23} {:>23}",
        "d_km", "dSINR_dB", "dC_bps_hz", "dP_out", "conv P_out closed/mc+N0", "prop P_out closed/mc+N0"
    );
    let _ = writeln!(s, "{}", "-".repeat(92));

    let pairs = report.pairs();
    let (mut ds, mut dc, mut dp) = (Vec::new(), Vec::new(), Vec::new());
    for (conv, prop) in &pairs {
        let (d_sinr, d_cap, d_out) = (
            prop.sinr_db - conv.sinr_db,
            prop.capacity_bps_hz - conv.capacity_bps_hz,
            prop.outage_prob - conv.outage_prob,
        );
        ds.push(d_sinr);
        dc.push(d_cap);
        dp.push(d_out);
        let _ = writeln!(
            s,
            "{:>8.3} {:>10.4} {:>10.4} {:>11.4e} | {:>11.4e}/{:<11.4e} {:>11.4e}/{:<11.4e}",
            conv.distance_km,
            d_sinr,
            d_cap,
            d_out,
            conv.outage_prob,
            conv.outage_mc_noise,
            prop.outage_prob,
            prop.outage_mc_noise,
        );
    }
    for (name, values) in [
        ("SINR delta dB", &ds),
        ("capacity delta bps/Hz", &dc),
        ("outage delta", &dp),
    ] {
        let (min, mean, max) = stats(values);
        let _ = writeln!(
            s,
            "{name:<22} min {min:>11.4e}  mean {mean:>11.4e}  max {max:>11.4e}"
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(1.0), "1.00000");
        assert_eq!(format_sig6(12.3456789), "12.3457");
        assert_eq!(format_sig6(-4.56789123), "-4.56789");
        assert_eq!(format_sig6(9.999996), "10.0000");
        assert_eq!(format_sig6(0.000123456789), "0.000123457");
        assert_eq!(format_sig6(123456.7), "123457");
    }
}
