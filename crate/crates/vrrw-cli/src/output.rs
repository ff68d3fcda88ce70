//! Serialization: JSON with 17-significant-digit floats and the CSV
//! trajectory/flow schemas. Fixed float formatting keeps identical runs
//! byte-identical.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::Serialize;
use vrrw::flow::FlowResult;
use vrrw::walk::Trajectory;

use crate::HarnessError;

/// `{:.16e}` prints one digit before the point and sixteen after:
/// 17 significant digits, enough to round-trip any f64.
struct SciFloats;

impl serde_json::ser::Formatter for SciFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, HarnessError> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFloats);
    value
        .serialize(&mut ser)
        .map_err(|e| HarnessError::Invalid(format!("serialization failed: {e}")))?;
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    std::fs::write(path, to_json_bytes(value)?)?;
    Ok(())
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_header(prefix: &str, dim: usize) -> String {
    let mut header = String::from(prefix);
    for i in 1..=dim {
        write!(header, ",v_{i}").unwrap();
    }
    header.push('\n');
    header
}

/// Checkpointed occupation vectors: `n,v_1,...,v_d`.
pub fn trajectory_csv(trajectory: &Trajectory) -> String {
    let dim = trajectory.final_state.counts().len();
    let mut out = csv_header("n", dim);
    for checkpoint in &trajectory.checkpoints {
        out.push_str(&float(checkpoint.time));
        for &x in checkpoint.occupation.coords() {
            out.push(',');
            out.push_str(&float(x));
        }
        out.push('\n');
    }
    out
}

/// Flow path samples: `s,v_1,...,v_d`.
pub fn flow_csv(result: &FlowResult) -> String {
    let dim = result.limit.dim();
    let mut out = csv_header("s", dim);
    for sample in &result.checkpoints {
        out.push_str(&float(sample.s));
        for &x in sample.point.coords() {
            out.push(',');
            out.push_str(&float(x));
        }
        out.push('\n');
    }
    out
}

pub fn unix_timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
