pub mod coherence;
pub mod correlate;
pub mod coverage;
pub mod ingest;
pub mod matcher;
pub mod pairs;
pub mod refset;
pub mod sizes;
pub mod stability;
pub mod train;

use std::path::Path;

use topcov::matcher::LogisticModel;

use crate::error::{with_path, CliResult};

pub fn load_matcher(path: &Path) -> CliResult<LogisticModel> {
    let bytes = with_path(path, std::fs::read(path))?;
    with_path(path, LogisticModel::from_json(&bytes))
}
