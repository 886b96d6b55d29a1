use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

/// Significant digits kept for every float in a JSON sidecar. Reruns then
/// agree byte for byte even if a parallel reduction reorders the last bits.
const SIG_DIGITS: usize = 12;

fn fix_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let rounded: f64 = format!("{:.*e}", SIG_DIGITS - 1, x).parse().expect("round trip");
            // canonical zero, never "-0.0"
            Value::from(if rounded == 0.0 { 0.0 } else { rounded })
        }
        Value::Array(items) => Value::Array(items.into_iter().map(fix_floats).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, fix_floats(v))).collect()),
        other => other,
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let v = fix_floats(serde_json::to_value(value)?);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Writes to `path`, or to stdout when there is none.
pub fn write_text(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            f.write_all(text.as_bytes())?;
            f.flush()
        }
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

/// `lambda,amplitude` rows for the grid `j/N`.
pub fn write_amplitudes_csv(path: &Path, grid: &[f64]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["lambda", "amplitude"])?;
    let n = grid.len() as f64;
    for (j, a) in grid.iter().enumerate() {
        w.write_record([format!("{:.12e}", j as f64 / n), format!("{a:.12e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// `spec.csv` -> `spec.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_are_rounded_and_zero_is_positive() {
        let v = serde_json::json!({"a": 0.1 + 0.2, "b": [-0.0, 1, 2.5e-300], "c": "x"});
        let s = to_json(&v).unwrap();
        assert!(s.contains("\"a\": 0.3"), "{s}");
        assert!(s.contains("0.0") && !s.contains("-0.0"));
        assert!(s.contains("\"c\": \"x\""));
    }
}
