//! Report files: a comment header describing the run, then the body.
//!
//! Header lines start with `# `. The `generated_at` line is the only part that
//! changes between reruns of the same configuration.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::HarnessError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TIMESTAMP_KEY: &str = "# generated_at:";

pub fn header(config: &ExperimentConfig) -> String {
    format!(
        "# treewalk {VERSION}\n# config: {}\n# seed: {}\n{TIMESTAMP_KEY} {}\n",
        config.to_json(),
        config.seed,
        chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ")
    )
}

/// The text without its timestamp line, for reproducibility comparisons.
pub fn without_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with(TIMESTAMP_KEY))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// Lines that are neither header nor trailer comments.
pub fn body_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().filter(|l| !l.starts_with('#'))
}

/// Header followed by `body`, written to `path` or standard output.
pub fn emit(path: Option<&Path>, config: &ExperimentConfig, body: &str) -> Result<(), HarnessError> {
    let text = format!("{}{body}", header(config));
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| HarnessError::Io(p.display().to_string(), e.to_string())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| HarnessError::Io("stdout".into(), e.to_string())),
    }
}

/// Serializes `rows` as CSV with a header row.
pub fn csv_body<T: Serialize>(rows: &[T], columns: &[&str]) -> Result<String, HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let err = |e: csv::Error| HarnessError::Io("csv".into(), e.to_string());
    w.write_record(columns).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io("csv".into(), e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One trailing comment line carrying a JSON summary.
pub fn summary_line<T: Serialize>(summary: &T) -> String {
    format!("# summary: {}\n", serde_json::to_string(summary).expect("summary serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{Algo, TreeSource};

    #[test]
    fn timestamp_is_the_only_varying_line() {
        let c = ExperimentConfig::new("simulate", Algo::Rotor, TreeSource::Path(3));
        let h = header(&c);
        assert!(h.starts_with("# treewalk "));
        assert_eq!(h.lines().count(), 4);
        let stripped = without_timestamp(&h);
        assert_eq!(stripped.lines().count(), 3);
        assert!(stripped.contains("# seed: 0"));
    }

    #[test]
    fn csv_quotes_fields_with_commas() {
        #[derive(Serialize)]
        struct R {
            a: u32,
            b: String,
        }
        let body = csv_body(&[R { a: 1, b: "x,y".into() }], &["a", "b"]).unwrap();
        assert_eq!(body, "a,b\n1,\"x,y\"\n");
    }
}
