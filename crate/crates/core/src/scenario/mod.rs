//! Configuration, the distance-sweep experiment and its outputs.

mod config;
mod report;
mod run;

pub use config::{
    load_config, ProbeChannel, ProbeConfig, ScenarioConfig, SweepConfig, TrafficConfig,
};
pub use report::{
    emit_csv, emit_summary, format_sig6, read_csv, write_csv, CsvRow, CSV_HEADER,
    SUMMARY_FOOTER_LINES, SUMMARY_PREAMBLE_LINES,
};
pub use run::{run_scenario, MetricsReport, MetricsRow, ReportMetadata, Scheme};
