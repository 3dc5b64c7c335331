use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use recoil_core::io::{sidecar_path, write_atomic, RunManifest};
use recoil_core::{Error, ErrorClass};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// A failed command, as reported on stderr.
#[derive(Debug, Serialize)]
pub struct Failure {
    pub code: String,
    pub class: &'static str,
    pub message: String,
    pub exit_code: u8,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: "usage".into(),
            class: "parse",
            message: message.into(),
            exit_code: 1,
        }
    }

    pub fn report(self) -> ExitCode {
        let exit = self.exit_code;
        let body = serde_json::json!({ "schema": schema_id("error"), "error": self });
        eprintln!("{body}");
        ExitCode::from(exit)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (class, exit_code) = match e.class() {
            ErrorClass::Parse => ("parse", 1),
            ErrorClass::Data => ("data", 2),
            ErrorClass::Numerical => ("numerical", 3),
        };
        Self {
            code: e.code().into(),
            class,
            message: e.to_string(),
            exit_code,
        }
    }
}

pub fn schema_id(kind: &str) -> String {
    format!("recoil-sigma/{kind}/v{SCHEMA_VERSION}")
}

#[derive(Serialize)]
struct Record<'a, T> {
    schema: String,
    manifest: &'a RunManifest,
    result: &'a T,
}

fn deliver(bytes: &[u8], output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => write_atomic(path, bytes).map_err(Failure::from),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| Failure::from(Error::Io { path: "<stdout>".into(), source: e }))
        }
    }
}

/// Writes `{schema, manifest, result}` as JSON.
pub fn emit_json<T: Serialize>(kind: &str, manifest: &RunManifest, result: &T, output: Option<&Path>) -> Result<(), Failure> {
    let record = Record {
        schema: schema_id(kind),
        manifest,
        result,
    };
    let mut bytes = serde_json::to_vec_pretty(&record).map_err(|e| Failure::from(Error::from(e)))?;
    bytes.push(b'\n');
    deliver(&bytes, output)
}

/// Writes CSV, plus a manifest sidecar when going to a file.
pub fn emit_csv(kind: &str, manifest: &RunManifest, csv: &[u8], output: Option<&Path>) -> Result<(), Failure> {
    deliver(csv, output)?;
    if let Some(path) = output {
        let record = serde_json::json!({ "schema": schema_id(kind), "manifest": manifest });
        let mut bytes = serde_json::to_vec_pretty(&record).map_err(|e| Failure::from(Error::from(e)))?;
        bytes.push(b'\n');
        write_atomic(sidecar_path(path), &bytes)?;
    }
    Ok(())
}
