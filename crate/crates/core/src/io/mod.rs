//! Configuration files, shipped presets and CSV output.

mod config;
mod csv;
mod presets;

pub use self::config::{
    parse_config, parse_config_with, parse_number_expr, Overrides, RunConfig, MESH_CAP,
};
pub use self::csv::{
    fmt_f64, read_field_csv, read_report_csv, write_field_csv, write_report_csv,
    write_spectrum_csv, write_trace_csv, FieldRecord, ReportRecord, ReportTable, FIELD_HEADER,
    REPORT_HEADER, SPECTRUM_HEADER, TRACE_HEADER,
};
pub use self::presets::{find_preset, load_preset, Preset, PRESETS};
