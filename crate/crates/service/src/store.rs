//! Append-only JSON Lines event log with periodic snapshots.
//!
//! `events.jsonl` holds every accepted event. `snapshot.json` holds the
//! full session map after the first `events` log lines, so recovery
//! loads the snapshot and replays only the tail of the log.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::Materials;
use crate::session::{HumanResponse, Session};

pub const EVENT_LOG: &str = "events.jsonl";
pub const SNAPSHOT: &str = "snapshot.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("corrupt store at {path} line {line}: {reason}")]
    Corrupt { path: PathBuf, line: u64, reason: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    SessionCreated { session: Session },
    ResponseAccepted { session_id: String, response: HumanResponse, at_ms: u64 },
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    events: u64,
    sessions: BTreeMap<String, Session>,
}

/// The writer side of the store. It mirrors the committed state of every
/// session so snapshots never need the per-session locks.
pub struct Journal {
    dir: PathBuf,
    file: File,
    events: u64,
    snapshot_every: u64,
    committed: BTreeMap<String, Session>,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

/// Apply one event to a session map during replay.
fn replay(sessions: &mut BTreeMap<String, Session>, m: &Materials, event: Event) -> Result<(), String> {
    match event {
        Event::SessionCreated { session } => {
            sessions.insert(session.id.clone(), session);
        }
        Event::ResponseAccepted { session_id, response, at_ms } => {
            let s = sessions.get_mut(&session_id).ok_or_else(|| format!("unknown session {session_id}"))?;
            s.apply(m, response, at_ms).map_err(|e| e.to_string())?;
        }
    }
    Ok(())
}

impl Journal {
    /// Open or create a store and reconstruct all sessions.
    pub fn open(dir: &Path, materials: &Materials, snapshot_every: u64) -> Result<(Self, BTreeMap<String, Session>), StoreError> {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let snap_path = dir.join(SNAPSHOT);
        let (skip, mut sessions) = match std::fs::read_to_string(&snap_path) {
            Ok(text) => {
                let s: Snapshot = serde_json::from_str(&text)
                    .map_err(|e| StoreError::Corrupt { path: snap_path.clone(), line: 0, reason: e.to_string() })?;
                (s.events, s.sessions)
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => (0, BTreeMap::new()),
            Err(e) => return Err(StoreError::Io { path: snap_path, source: e }),
        };
        let log_path = dir.join(EVENT_LOG);
        let mut events = 0u64;
        let mut valid_len = 0u64;
        if let Ok(f) = File::open(&log_path) {
            let mut reader = BufReader::new(f);
            let mut line = String::new();
            loop {
                line.clear();
                let n = reader.read_line(&mut line).map_err(io(&log_path))?;
                if n == 0 {
                    break;
                }
                if !line.ends_with('\n') {
                    warn!("discarding truncated final event in {}", log_path.display());
                    break;
                }
                events += 1;
                valid_len += n as u64;
                if events <= skip {
                    continue;
                }
                let corrupt = |reason: String| StoreError::Corrupt { path: log_path.clone(), line: events, reason };
                let event: Event = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
                replay(&mut sessions, materials, event).map_err(corrupt)?;
            }
        }
        if events < skip {
            return Err(StoreError::Corrupt { path: log_path, line: events, reason: "log is shorter than the snapshot".into() });
        }
        let file = OpenOptions::new().create(true).append(true).open(&log_path).map_err(io(&log_path))?;
        file.set_len(valid_len).map_err(io(&log_path))?;
        let journal = Journal { dir: dir.to_path_buf(), file, events, snapshot_every, committed: sessions.clone() };
        Ok((journal, sessions))
    }

    /// Durably append an event and record the resulting session state.
    pub fn append(&mut self, event: &Event, after: &Session) -> Result<(), StoreError> {
        let path = self.dir.join(EVENT_LOG);
        let mut line = serde_json::to_string(event).expect("events serialize");
        line.push('\n');
        self.file.write_all(line.as_bytes()).map_err(io(&path))?;
        self.file.sync_data().map_err(io(&path))?;
        self.events += 1;
        self.committed.insert(after.id.clone(), after.clone());
        if self.snapshot_every > 0 && self.events % self.snapshot_every == 0 {
            self.snapshot()?;
        }
        Ok(())
    }

    /// Write the committed state atomically.
    pub fn snapshot(&self) -> Result<(), StoreError> {
        let path = self.dir.join(SNAPSHOT);
        let tmp = self.dir.join(format!("{SNAPSHOT}.tmp"));
        let bytes = serde_json::to_vec(&Snapshot { events: self.events, sessions: self.committed.clone() }).expect("snapshot serializes");
        std::fs::write(&tmp, bytes).map_err(io(&tmp))?;
        std::fs::rename(&tmp, &path).map_err(io(&path))
    }

    pub fn events(&self) -> u64 {
        self.events
    }
}
