pub mod matrix_market;
pub mod report;

pub use matrix_market::{
    parse_matrix_market, parse_matrix_market_str, parse_matrix_market_with_header,
    read_matrix_market, MatrixMarketHeader, MmField, MmFormat, MmSymmetry,
};
pub use report::{
    read_report_csv, write_report_csv, write_trace_json, ReportRow, TraceRecord, TraceWriter,
    REPORT_HEADER,
};
