//! Line-oriented evaluator running in a child process.
//!
//! Request: `EVAL <canonical genome text>`. Response: `OK <objective>` or
//! `ERR <message>`. Sessions are pooled so concurrent islands never share a
//! process; a session that times out or breaks protocol is killed.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use crossbeam_channel::{bounded, Receiver, RecvTimeoutError};

use crate::error::EvalError;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Session {
    fn spawn(program: &str, args: &[String]) -> Result<Self, EvalError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| EvalError::External(format!("cannot start {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = bounded(16);
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(Self { child, stdin, lines: rx })
    }

    fn request(&mut self, payload: &str, timeout: Duration) -> Result<f64, SessionFailure> {
        writeln!(self.stdin, "EVAL {payload}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| SessionFailure::Broken(EvalError::External(format!("write failed: {e}"))))?;
        let line = match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(SessionFailure::Broken(EvalError::External(format!("read failed: {e}")))),
            Err(RecvTimeoutError::Timeout) => return Err(SessionFailure::Broken(EvalError::Timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                return Err(SessionFailure::Broken(EvalError::External("evaluator exited".into())))
            }
        };
        parse_response(&line)
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

enum SessionFailure {
    /// Evaluator answered `ERR`; the session stays usable.
    Reported(EvalError),
    Broken(EvalError),
}

fn parse_response(line: &str) -> Result<f64, SessionFailure> {
    let line = line.trim_end();
    if let Some(rest) = line.strip_prefix("OK ") {
        let value: f64 = rest
            .trim()
            .parse()
            .map_err(|_| SessionFailure::Broken(EvalError::External(format!("bad objective {rest:?}"))))?;
        if !value.is_finite() {
            return Err(SessionFailure::Reported(EvalError::External("objective is not finite".into())));
        }
        Ok(value)
    } else if let Some(msg) = line.strip_prefix("ERR") {
        Err(SessionFailure::Reported(EvalError::External(msg.trim().to_string())))
    } else {
        Err(SessionFailure::Broken(EvalError::External(format!("protocol error: {line:?}"))))
    }
}

pub struct ExternalEvaluator {
    program: String,
    args: Vec<String>,
    timeout: Duration,
    stochastic: bool,
    idle: Mutex<Vec<Session>>,
}

impl ExternalEvaluator {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        Self { program: program.into(), args, timeout: DEFAULT_TIMEOUT, stochastic: true, idle: Mutex::new(Vec::new()) }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_stochastic(mut self, stochastic: bool) -> Self {
        self.stochastic = stochastic;
        self
    }

    pub fn is_stochastic(&self) -> bool {
        self.stochastic
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    pub fn evaluate_text(&self, payload: &str) -> Result<f64, EvalError> {
        let pooled = self.idle.lock().expect("session pool poisoned").pop();
        let mut session = match pooled {
            Some(s) => s,
            None => Session::spawn(&self.program, &self.args)?,
        };
        match session.request(payload, self.timeout) {
            Ok(value) => {
                self.idle.lock().expect("session pool poisoned").push(session);
                Ok(value)
            }
            Err(SessionFailure::Reported(e)) => {
                self.idle.lock().expect("session pool poisoned").push(session);
                Err(e)
            }
            Err(SessionFailure::Broken(e)) => {
                log::warn!("dropping evaluator session: {e}");
                Err(e)
            }
        }
    }
}
