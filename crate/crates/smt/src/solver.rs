//! External solver processes speaking SMT-LIB2 over stdin/stdout.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::script::{SmtModel, SmtScript};
use crate::sexpr;

#[derive(Debug, Error)]
pub enum SmtError {
    #[error("cannot start solver `{path}`: {source}")]
    Spawn {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("solver I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("solver exited unexpectedly{}", stderr_suffix(.0))]
    Exited(String),
    #[error("malformed solver output: {0}")]
    Malformed(String),
    #[error("solver reported an error: {0}")]
    Solver(String),
    #[error("solver does not support this query: {0}")]
    Unsupported(String),
    #[error("solver model failed validation (encoding bug): {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Net(#[from] wfsound_core::NetError),
}

fn stderr_suffix(stderr: &str) -> String {
    if stderr.trim().is_empty() {
        String::new()
    } else {
        format!(": {}", stderr.trim())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub path: PathBuf,
    pub args: Vec<String>,
    pub timeout: Duration,
    /// Directory receiving one `.smt2` transcript per query.
    pub dump_dir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            path: PathBuf::from("z3"),
            args: vec!["-in".into(), "-smt2".into()],
            timeout: Duration::from_secs(60),
            dump_dir: None,
        }
    }
}

impl SolverConfig {
    pub fn with_path(path: impl Into<PathBuf>) -> Self {
        SolverConfig {
            path: path.into(),
            ..Default::default()
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckSat {
    Sat,
    Unsat,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat(SmtModel),
    Unsat,
    Unknown(String),
}

/// One running solver. The process is killed when the session is dropped.
pub struct Session {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    stderr: Receiver<String>,
    deadline: Instant,
    timeout: Duration,
    transcript: String,
    dump: Option<PathBuf>,
}

impl Session {
    /// Starts the solver. `name` labels the transcript file when dumping is on.
    pub fn start(config: &SolverConfig, name: &str) -> Result<Session, SmtError> {
        let mut child = Command::new(&config.path)
            .args(&config.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| SmtError::Spawn {
                path: config.path.display().to_string(),
                source,
            })?;
        let stdout = child.stdout.take().expect("piped stdout");
        let errout = child.stderr.take().expect("piped stderr");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let (etx, stderr) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(errout).lines() {
                let Ok(line) = line else { break };
                if etx.send(line).is_err() {
                    break;
                }
            }
        });
        let dump = config
            .dump_dir
            .as_ref()
            .map(|dir| dir.join(format!("{}.smt2", file_stem(name))));
        Ok(Session {
            stdin: child.stdin.take(),
            child,
            lines,
            stderr,
            deadline: Instant::now() + config.timeout,
            timeout: config.timeout,
            transcript: String::new(),
            dump,
        })
    }

    /// Sends commands that produce no output.
    pub fn send(&mut self, text: &str) -> Result<(), SmtError> {
        self.transcript.push_str(text);
        if !text.ends_with('\n') {
            self.transcript.push('\n');
        }
        let stdin = self.stdin.as_mut().ok_or_else(|| SmtError::Exited(String::new()))?;
        let written = stdin
            .write_all(text.as_bytes())
            .and_then(|_| stdin.write_all(b"\n"))
            .and_then(|_| stdin.flush());
        if written.is_err() {
            return Err(SmtError::Exited(self.drain_stderr()));
        }
        Ok(())
    }

    pub fn send_script(&mut self, script: &SmtScript) -> Result<(), SmtError> {
        self.send(&script.render())
    }

    fn drain_stderr(&mut self) -> String {
        let _ = self.child.try_wait();
        let mut out = String::new();
        while let Ok(line) = self.stderr.recv_timeout(Duration::from_millis(50)) {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Reads one complete response expression.
    fn read_response(&mut self) -> Result<sexpr::Sexpr, SmtError> {
        let mut text = String::new();
        loop {
            let remaining = self.deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(remaining) {
                Ok(line) => {
                    text.push_str(&line);
                    text.push('\n');
                    if sexpr::is_complete(&text) {
                        let e = sexpr::parse(&text).map_err(|e| SmtError::Malformed(format!("{e}: {text}")))?;
                        if let Some([head, rest @ ..]) = e.as_list() {
                            if head.as_symbol() == Some("error") {
                                let detail = rest.iter().map(|r| match r {
                                    sexpr::Sexpr::Str(s) => s.clone(),
                                    other => other.to_string(),
                                });
                                return Err(classify_error(detail.collect::<Vec<_>>().join(" ")));
                            }
                        }
                        return Ok(e);
                    }
                }
                Err(RecvTimeoutError::Timeout) => {
                    self.kill();
                    return Err(SmtError::Timeout(self.timeout));
                }
                Err(RecvTimeoutError::Disconnected) => return Err(SmtError::Exited(self.drain_stderr())),
            }
        }
    }

    pub fn check_sat(&mut self) -> Result<CheckSat, SmtError> {
        self.send("(check-sat)")?;
        let response = self.read_response()?;
        match response.as_symbol() {
            Some("sat") => Ok(CheckSat::Sat),
            Some("unsat") => Ok(CheckSat::Unsat),
            Some("unknown") => Ok(CheckSat::Unknown),
            _ => Err(SmtError::Malformed(format!("unexpected check-sat answer {response}"))),
        }
    }

    pub fn get_values(&mut self, symbols: &[String]) -> Result<SmtModel, SmtError> {
        if symbols.is_empty() {
            return Ok(SmtModel::default());
        }
        self.send(&format!("(get-value ({}))", symbols.join(" ")))?;
        let response = self.read_response()?;
        SmtModel::from_response(&response).map_err(SmtError::Malformed)
    }

    pub fn reason_unknown(&mut self) -> Result<String, SmtError> {
        self.send("(get-info :reason-unknown)")?;
        let response = self.read_response()?;
        Ok(match response.as_list() {
            Some([_, sexpr::Sexpr::Str(s)]) => s.clone(),
            _ => response.to_string(),
        })
    }

    pub fn push(&mut self) -> Result<(), SmtError> {
        self.send("(push 1)")
    }

    pub fn pop(&mut self) -> Result<(), SmtError> {
        self.send("(pop 1)")
    }

    /// check-sat, then get-value on sat or reason-unknown on unknown.
    pub fn solve(&mut self, symbols: &[String]) -> Result<SolveResult, SmtError> {
        match self.check_sat()? {
            CheckSat::Sat => Ok(SolveResult::Sat(self.get_values(symbols)?)),
            CheckSat::Unsat => Ok(SolveResult::Unsat),
            CheckSat::Unknown => Ok(SolveResult::Unknown(self.reason_unknown()?)),
        }
    }

    pub fn pid(&self) -> u32 {
        self.child.id()
    }

    pub fn transcript(&self) -> &str {
        &self.transcript
    }

    fn kill(&mut self) {
        self.stdin = None;
        let _ = self.child.kill();
        let _ = self.child.wait();
    }

    /// Ends the session and writes the transcript if dumping is enabled.
    pub fn finish(mut self) -> Result<(), SmtError> {
        self.write_dump()
    }

    fn write_dump(&mut self) -> Result<(), SmtError> {
        if let Some(path) = self.dump.take() {
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, &self.transcript)?;
        }
        Ok(())
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.write_dump();
        if let Some(mut stdin) = self.stdin.take() {
            let _ = stdin.write_all(b"(exit)\n");
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn classify_error(detail: String) -> SmtError {
    let lower = detail.to_lowercase();
    if lower.contains("quantifier") || lower.contains("logic") && lower.contains("support") {
        SmtError::Unsupported(detail)
    } else {
        SmtError::Solver(detail)
    }
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Runs one script and reads back `symbols` on sat. A timeout is reported as
/// `Unknown` after the solver has been killed.
pub fn solve_script(
    config: &SolverConfig,
    name: &str,
    script: &SmtScript,
    symbols: &[String],
) -> Result<SolveResult, SmtError> {
    let mut session = Session::start(config, name)?;
    session.send_script(script)?;
    let result = match session.solve(symbols) {
        Err(SmtError::Timeout(limit)) => SolveResult::Unknown(format!("timeout after {limit:?}")),
        other => other?,
    };
    session.finish()?;
    Ok(result)
}

/// True when the configured binary can be started and answers a trivial query.
pub fn solver_available(config: &SolverConfig) -> bool {
    let quick = SolverConfig {
        timeout: Duration::from_secs(10),
        dump_dir: None,
        ..config.clone()
    };
    let script = SmtScript::new("QF_LRA");
    matches!(solve_script(&quick, "probe", &script, &[]), Ok(SolveResult::Sat(_)))
}

/// Looks up an executable on PATH, or checks an explicit path.
pub fn locate(program: &Path) -> Option<PathBuf> {
    if program.components().count() > 1 {
        return program.is_file().then(|| program.to_path_buf());
    }
    std::env::var_os("PATH").and_then(|paths| {
        std::env::split_paths(&paths)
            .map(|dir| dir.join(program))
            .find(|candidate| candidate.is_file())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::Sort;
    use wfsound_core::rational::ratio;

    fn z3() -> Option<SolverConfig> {
        let config = SolverConfig::default().with_timeout(Duration::from_secs(20));
        solver_available(&config).then_some(config)
    }

    #[test]
    fn assert_false_is_unsat() {
        let Some(config) = z3() else { return };
        let mut s = SmtScript::new("QF_LRA");
        s.assert("false");
        assert_eq!(solve_script(&config, "t", &s, &[]).unwrap(), SolveResult::Unsat);
    }

    #[test]
    fn positive_rational_model() {
        let Some(config) = z3() else { return };
        let mut s = SmtScript::new("QF_LRA");
        s.declare("x", Sort::Real);
        s.assert("(> x 0.0)");
        s.assert("(= (* 3.0 x) 1.0)");
        let SolveResult::Sat(m) = solve_script(&config, "t", &s, &["x".into()]).unwrap() else {
            panic!("expected sat")
        };
        assert_eq!(m.number("x").unwrap(), ratio(1, 3));
    }

    #[test]
    fn errors_are_reported() {
        let Some(config) = z3() else { return };
        let mut s = SmtScript::new("QF_LRA");
        s.assert("(> undeclared 0.0)");
        assert!(matches!(solve_script(&config, "t", &s, &[]), Err(SmtError::Solver(_))));
    }

    #[test]
    fn missing_binary() {
        let config = SolverConfig::with_path("/nonexistent/solver");
        assert!(matches!(
            solve_script(&config, "t", &SmtScript::new("QF_LRA"), &[]),
            Err(SmtError::Spawn { .. })
        ));
        assert!(!solver_available(&config));
    }

    #[test]
    fn push_pop_session() {
        let Some(config) = z3() else { return };
        let mut session = Session::start(&config, "t").unwrap();
        session.send("(declare-const k Int)").unwrap();
        session.push().unwrap();
        session.send("(assert (= k 1))").unwrap();
        session.send("(assert (= k 2))").unwrap();
        assert_eq!(session.check_sat().unwrap(), CheckSat::Unsat);
        session.pop().unwrap();
        assert_eq!(session.check_sat().unwrap(), CheckSat::Sat);
    }
}
