//! Back-of-the-envelope comparison between shipping a raw source matrix to
//! the recommender and running the latent-vector exchange instead.

use std::fmt;

use super::message::{KEY_BYTES, REAL_BYTES};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferReport {
    pub shared_users: u64,
    pub shared_items: u64,
    pub k: u64,
    pub iterations: u64,
    pub centralized_nnz: u64,
    /// Each raw entry costs a value plus a key.
    pub centralized_bytes: f64,
    /// One round trip of a k-vector per shared entity.
    pub per_iteration_bytes: f64,
    pub distributed_bytes: f64,
    /// `distributed_bytes / centralized_bytes`.
    pub ratio: f64,
}

pub fn transfer_report(
    shared_users: u64,
    shared_items: u64,
    k: u64,
    iterations: u64,
    centralized_nnz: u64,
) -> TransferReport {
    // f64 arithmetic: inputs such as 8e10 entries overflow nothing here, and
    // the results are only ever displayed.
    let centralized_bytes = centralized_nnz as f64 * (REAL_BYTES + KEY_BYTES) as f64;
    let shared = (shared_users + shared_items) as f64;
    let per_iteration_bytes = shared * k as f64 * REAL_BYTES as f64 * 2.0;
    let distributed_bytes = per_iteration_bytes * iterations as f64;
    let ratio = if centralized_bytes > 0.0 {
        distributed_bytes / centralized_bytes
    } else {
        f64::NAN
    };
    TransferReport {
        shared_users,
        shared_items,
        k,
        iterations,
        centralized_nnz,
        centralized_bytes,
        per_iteration_bytes,
        distributed_bytes,
        ratio,
    }
}

const UNITS: [&str; 6] = ["B", "KB", "MB", "GB", "TB", "PB"];

/// Scales `bytes` by powers of 1024 into the largest unit that keeps the
/// mantissa at least 1. Returns the mantissa and the unit label.
pub fn binary_units(bytes: f64) -> (f64, &'static str) {
    let mut value = bytes;
    let mut unit = 0;
    while value >= 1024.0 && unit + 1 < UNITS.len() {
        value /= 1024.0;
        unit += 1;
    }
    (value, UNITS[unit])
}

pub fn format_bytes(bytes: f64) -> String {
    let (v, u) = binary_units(bytes);
    if u == "B" {
        format!("{v:.0} B")
    } else {
        format!("{v:.2} {u}")
    }
}

impl fmt::Display for TransferReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ratio = if self.ratio.is_finite() {
            format!("{:.1}%", self.ratio * 100.0)
        } else {
            "n/a".to_string()
        };
        writeln!(f, "{:<28}{:>20}{:>16}", "quantity", "bytes", "size")?;
        let rows = [
            ("centralized transfer", self.centralized_bytes),
            ("distributed per iteration", self.per_iteration_bytes),
            ("distributed total", self.distributed_bytes),
        ];
        for (name, bytes) in rows {
            writeln!(f, "{:<28}{:>20.0}{:>16}", name, bytes, format_bytes(bytes))?;
        }
        writeln!(f, "{:<28}{:>36}", "distributed / centralized", ratio)
    }
}
