use std::io::Read;
use std::process::{Command, Stdio};
use std::sync::{Condvar, Mutex, RwLock};
use std::thread;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::FromPrimitive;
use thiserror::Error;

use super::{BoundResult, Provenance, SdpCache, TwoDistanceQuery};

/// Environment variable holding the solver command line.
pub const SDP_CMD_ENV: &str = "EQUIBOUND_SDP_CMD";

/// Accepted disagreement between a solver value and a cached value, after
/// flooring both.
pub const SOLVER_VARIATION: u64 = 1;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("failed to start solver `{command}`: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("solver exited with {status}: {stderr}")]
    NonZeroExit { status: String, stderr: String },
    #[error("solver output `{0}` is not a single nonnegative decimal")]
    Unparseable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    /// Program followed by fixed leading arguments.
    pub command: Vec<String>,
    pub timeout: Duration,
    pub parallelism: usize,
}

impl SolverConfig {
    pub fn new(command_line: &str, timeout: Duration, parallelism: usize) -> Option<Self> {
        let command: Vec<String> = command_line.split_whitespace().map(String::from).collect();
        (!command.is_empty()).then_some(SolverConfig { command, timeout, parallelism: parallelism.max(1) })
    }

    pub fn from_env(timeout: Duration, parallelism: usize) -> Option<Self> {
        std::env::var(SDP_CMD_ENV).ok().and_then(|c| Self::new(&c, timeout, parallelism))
    }
}

/// Runs the configured solver with at most `parallelism` concurrent
/// invocations.
#[derive(Debug)]
pub struct ExternalSolver {
    config: SolverConfig,
    running: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a ExternalSolver);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.running.lock().expect("solver lock") -= 1;
        self.0.freed.notify_one();
    }
}

impl ExternalSolver {
    pub fn new(config: SolverConfig) -> Self {
        ExternalSolver { config, running: Mutex::new(0), freed: Condvar::new() }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn acquire(&self) -> Permit<'_> {
        let mut n = self.running.lock().expect("solver lock");
        while *n >= self.config.parallelism {
            n = self.freed.wait(n).expect("solver lock");
        }
        *n += 1;
        Permit(self)
    }

    /// Invokes `<cmd> <r> <beta> <gamma>` and floors the printed value.
    pub fn run(&self, q: &TwoDistanceQuery) -> Result<BigUint, SolverError> {
        let _permit = self.acquire();
        let (program, fixed) = self.config.command.split_first().expect("nonempty command");
        let mut child = Command::new(program)
            .args(fixed)
            .arg(q.r().to_string())
            .arg(q.beta().to_string())
            .arg(q.gamma().to_string())
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| SolverError::Spawn { command: self.config.command.join(" "), source })?;

        let mut stdout = child.stdout.take().expect("piped stdout");
        let mut stderr = child.stderr.take().expect("piped stderr");
        let out_reader = thread::spawn(move || {
            let mut s = String::new();
            let _ = stdout.read_to_string(&mut s);
            s
        });
        let err_reader = thread::spawn(move || {
            let mut s = String::new();
            let _ = stderr.read_to_string(&mut s);
            s
        });

        let deadline = Instant::now() + self.config.timeout;
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) if Instant::now() >= deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(SolverError::Timeout(self.config.timeout));
                }
                Ok(None) => thread::sleep(Duration::from_millis(5)),
                Err(source) => {
                    return Err(SolverError::Spawn { command: self.config.command.join(" "), source })
                }
            }
        };
        let out = out_reader.join().unwrap_or_default();
        let err = err_reader.join().unwrap_or_default();
        if !status.success() {
            return Err(SolverError::NonZeroExit { status: status.to_string(), stderr: err.trim().to_string() });
        }
        parse_output(&out)
    }
}

fn parse_output(out: &str) -> Result<BigUint, SolverError> {
    let text = out.trim();
    let bad = || SolverError::Unparseable(text.to_string());
    if text.split_whitespace().count() != 1 {
        return Err(bad());
    }
    let x: f64 = text.parse().map_err(|_| bad())?;
    if !x.is_finite() || x < 0.0 {
        return Err(bad());
    }
    BigUint::from_f64(x.floor()).ok_or_else(bad)
}

/// Whether two floored solver values agree up to [`SOLVER_VARIATION`].
pub fn within_variation(a: &BigUint, b: &BigUint) -> bool {
    let diff = if a > b { a - b } else { b - a };
    diff <= BigUint::from(SOLVER_VARIATION)
}

/// Solver backend for the pipeline: NONE when not configured or on any
/// failure (logged), otherwise the floored value, which is also recorded in
/// the cache.
pub fn external_sdp(q: &TwoDistanceQuery, solver: Option<&ExternalSolver>, cache: Option<&RwLock<SdpCache>>) -> BoundResult {
    let Some(solver) = solver else {
        return BoundResult::none(Provenance::SdpExternal, "no solver configured");
    };
    match solver.run(q) {
        Ok(v) => {
            if let Some(cache) = cache {
                let mut cache = cache.write().expect("cache lock");
                if let Some(prev) = cache.get(q) {
                    if !within_variation(&v, &prev.bound) {
                        log::warn!("{q}: solver gave {v}, cache holds {} from {}", prev.bound, prev.source);
                    }
                }
                cache.insert(q.clone(), v.clone(), "external");
            }
            BoundResult::some(v, Provenance::SdpExternal, solver.config.command.join(" "))
        }
        Err(e) => {
            log::warn!("{q}: {e}");
            BoundResult::none(Provenance::SdpExternal, e.to_string())
        }
    }
}
