//! Runs the check suite and reports one line per invariant.
//!
//! Keys: `checks` and `skip` (lists of check names), `<check>.threshold`
//! and per-check size keys such as `ratio_cdf_mc.samples`, `seed`.

use crate::checks::{run_suite, Report};
use crate::config::Config;
use crate::error::LabResult;

pub fn run(cfg: &Config) -> LabResult<Report> {
    run_suite(cfg)
}
