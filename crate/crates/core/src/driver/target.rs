// SPDX-License-Identifier: Apache-2.0

//! Running a test case through the compiler under test.

use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

use super::classify::RawResult;
use super::passes::{PassRegistry, Pipeline};
use crate::reference::ReferenceTarget;

/// Name that selects the in-process reference target.
pub const BUILTIN_REFERENCE: &str = "builtin:reference";

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

/// Bytes kept from each of stdout and stderr.
pub const OUTPUT_CAP: u64 = 64 * 1024;

#[derive(Debug, thiserror::Error)]
#[error("cannot run {program}: {source}")]
pub struct SpawnError {
    pub program: PathBuf,
    #[source]
    pub source: io::Error,
}

#[derive(Debug, Clone)]
pub enum Target {
    Reference(ReferenceTarget),
    Command(PathBuf),
}

impl Target {
    /// `builtin:reference` or a path to an opt-style executable.
    pub fn from_spec(spec: &str, registry: &PassRegistry) -> Self {
        if spec == BUILTIN_REFERENCE {
            Target::Reference(ReferenceTarget::new(registry.clone()))
        } else {
            Target::Command(PathBuf::from(spec))
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Target::Reference(_) => BUILTIN_REFERENCE.to_string(),
            Target::Command(p) => p.display().to_string(),
        }
    }

    /// Runs the pipeline on `text`. Only failure to start the target is an
    /// error; everything the target does is reported in the result.
    pub fn run(&self, pipeline: &Pipeline, text: &str, timeout: Duration) -> Result<RawResult, SpawnError> {
        match self {
            Target::Reference(r) => {
                let start = Instant::now();
                let verdict = r.validate(text, &pipeline.flags());
                Ok(RawResult {
                    exit_code: Some(verdict.exit_code),
                    stderr: verdict.diagnostics.join("\n"),
                    duration: start.elapsed(),
                    ..Default::default()
                })
            }
            Target::Command(program) => run_command(program, pipeline, text, timeout),
        }
    }
}

fn run_command(program: &PathBuf, pipeline: &Pipeline, text: &str, timeout: Duration) -> Result<RawResult, SpawnError> {
    let spawn_err = |source| SpawnError { program: program.clone(), source };
    let mut input = tempfile::Builder::new().prefix("case-").suffix(".mlir").tempfile().map_err(spawn_err)?;
    input.write_all(text.as_bytes()).map_err(spawn_err)?;
    input.flush().map_err(spawn_err)?;

    let start = Instant::now();
    let mut child = Command::new(program)
        .args(pipeline.flags())
        .arg(input.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(spawn_err)?;
    let stdout = capture(child.stdout.take());
    let stderr = capture(child.stderr.take());

    let (status, timed_out) = match child.wait_timeout(timeout).map_err(spawn_err)? {
        Some(status) => (status, false),
        None => {
            let _ = child.kill();
            (child.wait().map_err(spawn_err)?, true)
        }
    };
    let duration = start.elapsed();
    Ok(RawResult {
        exit_code: status.code(),
        signal: signal_of(&status),
        timed_out,
        stdout: stdout.join().unwrap_or_default(),
        stderr: stderr.join().unwrap_or_default(),
        duration,
    })
}

/// Reads a pipe to the end on a separate thread, keeping at most
/// [`OUTPUT_CAP`] bytes.
fn capture<R: Read + Send + 'static>(pipe: Option<R>) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let Some(mut pipe) = pipe else { return String::new() };
        let mut kept = Vec::new();
        let _ = (&mut pipe).take(OUTPUT_CAP).read_to_end(&mut kept);
        let _ = io::copy(&mut pipe, &mut io::sink());
        String::from_utf8_lossy(&kept).into_owned()
    })
}

#[cfg(unix)]
fn signal_of(status: &std::process::ExitStatus) -> Option<i32> {
    use std::os::unix::process::ExitStatusExt;
    status.signal()
}

#[cfg(not(unix))]
fn signal_of(_: &std::process::ExitStatus) -> Option<i32> {
    None
}
