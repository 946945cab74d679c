//! Online sessions: snapshots arrive one request at a time and each is solved
//! against the state left by the previous one.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use estranet_core::api::SessionInfo;
use estranet_core::{
    parse_snapshots_with, process_snapshot, Error, NodeInterner, PipelineConfig, PipelineState,
    ResultDocument, SnapshotDocument, SnapshotRecord,
};

#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub delta: f64,
    pub config: PipelineConfig,
    interner: NodeInterner,
    state: PipelineState,
    records: Vec<SnapshotRecord>,
}

impl Session {
    pub fn new(id: String, delta: f64, config: PipelineConfig) -> Result<Self, Error> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("delta must lie in [0, 1], got {delta}")));
        }
        Ok(Self {
            id,
            delta,
            config,
            interner: NodeInterner::new(),
            state: PipelineState::new(),
            records: Vec::new(),
        })
    }

    pub fn info(&self) -> SessionInfo {
        SessionInfo {
            id: self.id.clone(),
            delta: self.delta,
            seed: self.config.solver.seed,
            snapshots: self.records.len(),
            labels_issued: self.state.registry().issued(),
            last_t: self.records.last().map(|r| r.t),
        }
    }

    /// Parses and processes every snapshot in `text`. Either all of them are
    /// committed or the session is left untouched.
    pub fn append(&mut self, text: &str) -> Result<Vec<SnapshotDocument>, Error> {
        let mut interner = self.interner.clone();
        let graphs = parse_snapshots_with(text, &mut interner)?;
        if graphs.is_empty() {
            return Err(Error::InvalidParameter("no snapshot records in request".into()));
        }
        if let (Some(last), Some(first)) = (self.records.last(), graphs.first()) {
            if first.t() <= last.t {
                return Err(Error::InvalidParameter(format!(
                    "snapshot {} is not after the last processed snapshot {}",
                    first.t(),
                    last.t
                )));
            }
        }
        let mut state = self.state.clone();
        let mut fresh = Vec::with_capacity(graphs.len());
        for g in &graphs {
            let (record, next) = process_snapshot(state, g, self.delta, &self.config)?;
            state = next;
            fresh.push(record);
        }
        self.interner = interner;
        self.state = state;
        let docs = fresh
            .iter()
            .map(|r| SnapshotDocument::from_record(r, &self.interner))
            .collect();
        self.records.extend(fresh);
        Ok(docs)
    }

    pub fn document(&self) -> ResultDocument {
        ResultDocument {
            delta: self.delta,
            seed: self.config.solver.seed,
            snapshots: self
                .records
                .iter()
                .map(|r| SnapshotDocument::from_record(r, &self.interner))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SessionStore {
    inner: Arc<Mutex<HashMap<String, Arc<Mutex<Session>>>>>,
}

impl SessionStore {
    pub fn insert(&self, session: Session) -> Arc<Mutex<Session>> {
        let id = session.id.clone();
        let handle = Arc::new(Mutex::new(session));
        self.inner.lock().unwrap().insert(id, handle.clone());
        handle
    }

    pub fn get(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        self.inner.lock().unwrap().get(id).cloned()
    }

    pub fn remove(&self, id: &str) -> bool {
        self.inner.lock().unwrap().remove(id).is_some()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> PipelineConfig {
        let mut cfg = PipelineConfig::default();
        cfg.solver.final_runs = 5;
        cfg.solver.max_runs = 5;
        cfg
    }

    const TRIANGLES: &str = "a b\nb c\na c\nc d\nd e\ne f\nd f\n";

    fn at(t: u64) -> String {
        TRIANGLES.lines().map(|l| format!("{t} {l}\n")).collect()
    }

    #[test]
    fn append_keeps_labels_on_a_static_graph() {
        let mut s = Session::new("s".into(), 0.0, quick()).unwrap();
        let first = s.append(&at(0)).unwrap();
        let second = s.append(&format!("{}{}", at(1), at(2))).unwrap();
        assert_eq!(second.len(), 2);
        assert_eq!(first[0].labels, second[1].labels);
        assert_eq!(s.info().snapshots, 3);
        assert_eq!(s.info().last_t, Some(2));
        assert_eq!(s.document().snapshots.len(), 3);
    }

    #[test]
    fn rejected_append_leaves_session_untouched() {
        let mut s = Session::new("s".into(), 0.1, quick()).unwrap();
        s.append(&at(5)).unwrap();
        let before = s.info();
        assert!(s.append(&at(5)).is_err());
        assert!(s.append("6 x y\n7 x\n").is_err());
        assert_eq!(s.info(), before);
        assert!(s.interner.get("x").is_none());
    }

    #[test]
    fn delta_is_validated() {
        assert!(Session::new("s".into(), 1.5, quick()).is_err());
    }
}
