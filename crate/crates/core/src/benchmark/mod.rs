//! Scaling measurements, machine records, ranking and the runtime model.

mod model;
mod records;
mod timing;

pub use model::{
    fit_model, fit_model_separated, model_time, FormulaVariant, LogBase, ModelFit, ModelOptions, PerfModelParams,
};
pub use records::{
    format_real, output_columns, parse_node_layout, parse_records, rank, read_records, record_value, write_records,
    RankedMachine, ScalingRecord, RECORD_FIELDS,
};
pub use timing::{sweep, time_workload, Measurement, SweepReport, WorkloadConfig};
