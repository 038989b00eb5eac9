//! Evaluator backed by an external process speaking newline-delimited JSON.
//!
//! Wire protocol (one JSON object per line, over the child's stdin/stdout):
//!
//! ```text
//! -> {"type":"hello","protocol":1}
//! <- {"type":"hello","protocol":1,"name":"..."}
//! -> {"type":"predict","id":7,"context_x":[[..]],"context_y":[..],"query_x":[[..]],"n_classes":2}
//! <- {"type":"proba","id":7,"proba":[[..]]}  |  {"type":"error","id":7,"message":"..."}
//! -> {"type":"bye"}
//! ```
//!
//! An error whose message is `capacity` maps to
//! [`EvalError::CapacityExceeded`]. Each connection carries one request at a
//! time; `connections > 1` spawns that many processes and shares them.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, ExitStatus, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{check_query, ContextSelection, Evaluator, Prediction};
use crate::data::Table;
use crate::error::{EvalError, Result};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct BridgeConfig {
    pub command: String,
    pub args: Vec<String>,
    pub timeout: Duration,
    pub connections: usize,
}

impl BridgeConfig {
    pub fn new(command: impl Into<String>) -> Self {
        BridgeConfig {
            command: command.into(),
            args: Vec::new(),
            timeout: Duration::from_secs(60),
            connections: 1,
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Request<'a> {
    Hello {
        protocol: u32,
    },
    Predict {
        id: u64,
        context_x: &'a [Vec<f64>],
        context_y: &'a [u32],
        query_x: &'a [Vec<f64>],
        n_classes: u32,
    },
    Bye,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Response {
    Hello {
        protocol: u32,
        #[serde(default)]
        name: String,
    },
    Proba {
        id: u64,
        proba: Vec<Vec<f64>>,
    },
    Error {
        id: i64,
        message: String,
    },
}

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Session {
    fn spawn(cfg: &BridgeConfig) -> Result<(Session, String), EvalError> {
        let mut child = Command::new(&cfg.command)
            .args(&cfg.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| EvalError::Protocol(format!("cannot start '{}': {e}", cfg.command)))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut session = Session {
            child,
            stdin,
            lines: rx,
        };
        session.send(&Request::Hello {
            protocol: PROTOCOL_VERSION,
        })?;
        match session.receive(cfg.timeout)? {
            Response::Hello { protocol, name } if protocol == PROTOCOL_VERSION => Ok((session, name)),
            Response::Hello { protocol, .. } => {
                session.kill();
                Err(EvalError::Protocol(format!("bridge speaks protocol {protocol}")))
            }
            _ => {
                session.kill();
                Err(EvalError::Protocol("expected hello".into()))
            }
        }
    }

    fn send(&mut self, req: &Request<'_>) -> Result<(), EvalError> {
        let mut line = serde_json::to_vec(req).map_err(|e| EvalError::Protocol(e.to_string()))?;
        line.push(b'\n');
        self.stdin
            .write_all(&line)
            .and_then(|_| self.stdin.flush())
            .map_err(|e| EvalError::Protocol(format!("write failed: {e}")))
    }

    fn receive(&mut self, timeout: Duration) -> Result<Response, EvalError> {
        let line = match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(EvalError::Protocol(format!("read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => return Err(EvalError::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                return Err(EvalError::Protocol("bridge closed its output".into()))
            }
        };
        serde_json::from_str(&line).map_err(|e| EvalError::Protocol(format!("bad message '{line}': {e}")))
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }

    /// Sends `bye` and waits up to `timeout` for a clean exit.
    fn close(mut self, timeout: Duration) -> Result<ExitStatus, EvalError> {
        let _ = self.send(&Request::Bye);
        let deadline = Instant::now() + timeout;
        loop {
            match self.child.try_wait() {
                Ok(Some(status)) => return Ok(status),
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                Ok(None) => {
                    self.kill();
                    return Err(EvalError::Timeout(timeout));
                }
                Err(e) => return Err(EvalError::Protocol(e.to_string())),
            }
        }
    }
}

struct Pool {
    idle: Vec<Session>,
    live: usize,
}

pub struct BridgeEvaluator {
    config: BridgeConfig,
    pool: Mutex<Pool>,
    available: Condvar,
    next_id: AtomicU64,
    name: String,
}

impl BridgeEvaluator {
    /// Starts `config.connections` bridge processes and performs the handshake.
    pub fn spawn(config: &BridgeConfig) -> Result<Self, EvalError> {
        let n = config.connections.max(1);
        let mut idle = Vec::with_capacity(n);
        let mut name = String::new();
        for _ in 0..n {
            let (s, nm) = Session::spawn(config)?;
            idle.push(s);
            name = nm;
        }
        Ok(BridgeEvaluator {
            config: config.clone(),
            pool: Mutex::new(Pool { idle, live: n }),
            available: Condvar::new(),
            next_id: AtomicU64::new(0),
            name,
        })
    }

    /// Name the bridge announced in its handshake.
    pub fn remote_name(&self) -> &str {
        &self.name
    }

    fn acquire(&self) -> Result<Session, EvalError> {
        let mut pool = self.pool.lock().expect("pool lock");
        loop {
            if let Some(s) = pool.idle.pop() {
                return Ok(s);
            }
            if pool.live == 0 {
                return Err(EvalError::Protocol("no live bridge connections".into()));
            }
            pool = self.available.wait(pool).expect("pool lock");
        }
    }

    fn release(&self, session: Option<Session>) {
        let mut pool = self.pool.lock().expect("pool lock");
        match session {
            Some(s) => pool.idle.push(s),
            None => {
                // A broken connection is replaced so capacity stays constant.
                match Session::spawn(&self.config) {
                    Ok((s, _)) => pool.idle.push(s),
                    Err(_) => pool.live -= 1,
                }
            }
        }
        self.available.notify_one();
    }

    /// Sends one predict request on a pooled connection.
    pub fn request(
        &self,
        context_x: &[Vec<f64>],
        context_y: &[u32],
        query_x: &[Vec<f64>],
        n_classes: usize,
    ) -> Result<Prediction, EvalError> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let mut session = self.acquire()?;
        let result = session
            .send(&Request::Predict {
                id,
                context_x,
                context_y,
                query_x,
                n_classes: n_classes as u32,
            })
            .and_then(|_| session.receive(self.config.timeout));
        let outcome = match result {
            Ok(Response::Proba { id: got, proba }) if got == id => {
                if proba.len() != query_x.len() {
                    Err(EvalError::Protocol(format!(
                        "{} probability rows for {} queries",
                        proba.len(),
                        query_x.len()
                    )))
                } else {
                    Prediction::new(proba, n_classes)
                }
            }
            Ok(Response::Error { id: got, message }) if got == id as i64 => {
                if message.trim() == "capacity" {
                    Err(EvalError::CapacityExceeded {
                        samples: context_x.len(),
                        features: context_x.first().map_or(0, Vec::len),
                        limit: None,
                    })
                } else {
                    Err(EvalError::Remote(message))
                }
            }
            Ok(Response::Proba { id: got, .. }) => Err(EvalError::Protocol(format!(
                "response id {got} does not match request {id}"
            ))),
            Ok(Response::Error { id: got, message }) => Err(EvalError::Protocol(format!(
                "error for id {got} while waiting for {id}: {message}"
            ))),
            Ok(Response::Hello { .. }) => Err(EvalError::Protocol("unexpected hello".into())),
            Err(e) => Err(e),
        };
        let broken = matches!(outcome, Err(EvalError::Protocol(_)) | Err(EvalError::Timeout(_)));
        if broken {
            session.kill();
            self.release(None);
        } else {
            self.release(Some(session));
        }
        outcome
    }

    /// Sends `bye` on every connection and returns the exit statuses.
    pub fn shutdown(self) -> Result<Vec<ExitStatus>, EvalError> {
        let sessions = std::mem::take(&mut self.pool.lock().expect("pool lock").idle);
        sessions
            .into_iter()
            .map(|s| s.close(self.config.timeout))
            .collect()
    }
}

impl Drop for BridgeEvaluator {
    fn drop(&mut self) {
        if let Ok(mut pool) = self.pool.lock() {
            for s in pool.idle.drain(..) {
                let _ = s.close(Duration::from_secs(2));
            }
        }
    }
}

impl Evaluator for BridgeEvaluator {
    fn score_context(
        &self,
        train: &Table,
        ctx: &ContextSelection,
        query: &Table,
    ) -> Result<Prediction, EvalError> {
        check_query(train, ctx, query)?;
        let feats = ctx.features();
        let pick = |row: &[f64]| -> Vec<f64> { feats.iter().map(|&j| row[j]).collect() };
        let context_x: Vec<Vec<f64>> = ctx.samples().iter().map(|&i| pick(train.row(i))).collect();
        let context_y: Vec<u32> = ctx.samples().iter().map(|&i| train.label(i)).collect();
        let query_x: Vec<Vec<f64>> = (0..query.n_rows()).map(|i| pick(query.row(i))).collect();
        self.request(&context_x, &context_y, &query_x, train.class_count())
    }

    fn name(&self) -> String {
        format!("bridge({})", self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_wire_format() {
        let cx = vec![vec![1.0, 2.5]];
        let qx = vec![vec![0.0, -1.0]];
        let msg = serde_json::to_string(&Request::Predict {
            id: 3,
            context_x: &cx,
            context_y: &[1],
            query_x: &qx,
            n_classes: 2,
        })
        .unwrap();
        assert_eq!(
            msg,
            r#"{"type":"predict","id":3,"context_x":[[1.0,2.5]],"context_y":[1],"query_x":[[0.0,-1.0]],"n_classes":2}"#
        );
        assert_eq!(
            serde_json::to_string(&Request::Hello { protocol: 1 }).unwrap(),
            r#"{"type":"hello","protocol":1}"#
        );
        assert_eq!(serde_json::to_string(&Request::Bye).unwrap(), r#"{"type":"bye"}"#);
    }

    #[test]
    fn response_parsing() {
        let r: Response = serde_json::from_str(r#"{"type":"error","id":-1,"message":"bad json"}"#).unwrap();
        assert!(matches!(r, Response::Error { id: -1, .. }));
        let r: Response = serde_json::from_str(r#"{"type":"proba","id":4,"proba":[[0.25,0.75]]}"#).unwrap();
        assert!(matches!(r, Response::Proba { id: 4, .. }));
    }

    #[test]
    fn missing_command_fails_to_spawn() {
        let cfg = BridgeConfig::new("/nonexistent/bridge-binary");
        assert!(matches!(
            BridgeEvaluator::spawn(&cfg),
            Err(EvalError::Protocol(_))
        ));
    }
}
