//! The incremental-count pipeline on the built-in dense-order instance.

use std::fmt::Write as _;

use laminar_core::fullvcmin::{dlo_instance, incremental_count_check, IncrementalReport};

use crate::lemmas::{demo_parameters, INCREMENTAL_B_SIZES};
use crate::HarnessError;

/// Runs the pipeline with `|B| = b_size` on the carrier `0..4|B|`.
/// Sizes outside [`INCREMENTAL_B_SIZES`] are usage errors; a certificate
/// mismatch is returned as the core error carrying its witness.
pub fn run_demo(b_size: usize, seed: u64) -> Result<IncrementalReport, HarnessError> {
    if !INCREMENTAL_B_SIZES.contains(&b_size) {
        return Err(HarnessError::Usage(format!(
            "B-size must be one of {INCREMENTAL_B_SIZES:?}, got {b_size}"
        )));
    }
    let (n, b) = demo_parameters(b_size, seed);
    let (family, certificate) = dlo_instance(n);
    Ok(incremental_count_check(&family, &b, &certificate)?)
}

fn status(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

/// Plain-text rendering: one line per step, then the aggregate checks.
pub fn render(report: &IncrementalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "carrier 0..{}  B = {:?}  |Δ0| = {}  |Δ1| = {}",
        report.carrier_size, report.b, report.delta0_size, report.delta1_size
    );
    let _ = writeln!(
        s,
        "{} realized Ψ-types, {} realized Δ1-types, |V(p_0, B)| = {}",
        report.psi_type_count, report.delta1_type_count, report.initial_entries
    );
    for step in &report.steps {
        let _ = writeln!(
            s,
            "step {:>3} -> {:<3} new = {:<2} dist = {:<3} psi changes = {:<3} {}",
            step.from,
            step.to,
            step.new_entries,
            step.dist,
            step.psi_changes,
            status(step.ok)
        );
    }
    let _ = writeln!(
        s,
        "sum dist {} <= {}: {}",
        report.sum_dist,
        report.sum_dist_bound,
        status(report.sum_dist <= report.sum_dist_bound)
    );
    let _ = writeln!(
        s,
        "virtual union {} <= {}: {}",
        report.virtual_union,
        report.aggregate_bound,
        status(report.aggregate_ok)
    );
    let _ = writeln!(
        s,
        "realized Δ0-types ({}) inside virtual spaces: {}",
        report.realized_union,
        status(report.containment_ok)
    );
    let _ = writeln!(s, "overall: {}", status(report.ok));
    s
}
