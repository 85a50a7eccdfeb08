//! Scoring through a long-lived child process.
//!
//! The child reads one canonical SMILES per line on stdin and answers each
//! with one line on stdout, in order: a decimal number, or `ERR <message>`
//! for a molecule it cannot score. A whole batch is written and flushed
//! before any answer is awaited, and the batch must complete within the
//! timeout or the child is killed.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use pgfs_core::scoring::{ScoreError, ScoreInput, Scorer};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

pub struct ExternalScorer {
    command: String,
    floor: f64,
    timeout: Duration,
    child: Option<Child>,
    stdin: Option<ChildStdin>,
    lines: Option<Receiver<std::io::Result<String>>>,
}

impl ExternalScorer {
    /// Starts `command` through the shell.
    pub fn spawn(command: &str, floor: f64) -> std::io::Result<ExternalScorer> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().ok_or_else(|| std::io::Error::other("no child stdout"))?;
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(ExternalScorer {
            command: String::from(command),
            floor,
            timeout: DEFAULT_TIMEOUT,
            child: Some(child),
            stdin,
            lines: Some(rx),
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> ExternalScorer {
        self.timeout = timeout;
        self
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn shutdown(&mut self) {
        self.stdin = None;
        self.lines = None;
        if let Some(mut c) = self.child.take() {
            let _ = c.kill();
            let _ = c.wait();
        }
    }

    fn run_batch(&mut self, inputs: &[ScoreInput<'_>]) -> Result<Vec<Option<f64>>, ScoreError> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| ScoreError::Process(String::from("scorer process is not running")))?;
        let mut request = String::new();
        for i in inputs {
            request.push_str(i.smiles);
            request.push('\n');
        }
        stdin
            .write_all(request.as_bytes())
            .and_then(|_| stdin.flush())
            .map_err(|e| ScoreError::Process(format!("writing to scorer: {e}")))?;

        let rx = self.lines.as_ref().expect("reader lives as long as stdin");
        let deadline = Instant::now() + self.timeout;
        let mut out = Vec::with_capacity(inputs.len());
        for _ in inputs {
            let left = deadline.saturating_duration_since(Instant::now());
            let line = match rx.recv_timeout(left) {
                Ok(Ok(line)) => line,
                Ok(Err(e)) => return Err(ScoreError::Process(format!("reading from scorer: {e}"))),
                Err(RecvTimeoutError::Timeout) => return Err(ScoreError::Timeout),
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(ScoreError::Process(String::from("scorer exited")));
                }
            };
            let reply = line.trim();
            if reply == "ERR" || reply.starts_with("ERR ") {
                out.push(None);
            } else {
                let v: f64 = reply.parse().map_err(|_| ScoreError::Parse(String::from(reply)))?;
                out.push(Some(v));
            }
        }
        Ok(out)
    }
}

impl Scorer for ExternalScorer {
    fn name(&self) -> &str {
        "external"
    }

    fn floor(&self) -> f64 {
        self.floor
    }

    /// Any failure other than a per-molecule `ERR` leaves the protocol out of
    /// sync, so the child is stopped and later batches fail fast.
    fn score_batch(&mut self, inputs: &[ScoreInput<'_>]) -> Result<Vec<Option<f64>>, ScoreError> {
        if inputs.is_empty() {
            return Ok(Vec::new());
        }
        let result = self.run_batch(inputs);
        if result.is_err() {
            self.shutdown();
        }
        result
    }
}

impl Drop for ExternalScorer {
    fn drop(&mut self) {
        self.stdin = None;
        if let Some(mut c) = self.child.take() {
            // give a well-behaved child a moment to exit on EOF
            let start = Instant::now();
            while start.elapsed() < Duration::from_millis(200) {
                if let Ok(Some(_)) = c.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(5));
            }
            let _ = c.kill();
            let _ = c.wait();
        }
    }
}
