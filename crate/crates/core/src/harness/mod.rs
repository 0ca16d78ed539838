//! Monte-Carlo campaigns: configuration, per-block simulation, metrics and
//! CSV/SVG output.

pub mod config;
pub mod link;
pub mod metrics;
pub mod oracle;
pub mod output;
pub mod run;
pub mod sweep;

pub use config::{noise_var, CoherentShape, Mode, PdpShape, SimConfig};
pub use metrics::{spectral_efficiency, MetricsRecord, Tally};
pub use output::{emit_csv, emit_svg, read_csv, render_svg, write_csv, CsvRecord, CSV_HEADER};
pub use run::{AmplitudeDetector, PointSetup, Receiver};
pub use sweep::{prepare_model, run_blocks, sweep, train_model};
