//! Directory of per-scenario JSON documents.
//!
//! Every write goes to a temporary file in the same directory which is then
//! renamed over the target, so a reader (or a reopened store after a crash)
//! sees either the old or the new document. Mutations of one scenario are
//! serialized by a per-id lock; reads take no lock.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use tempfile::NamedTempFile;

use crate::error::ServiceError;
use crate::scenario::Scenario;

const TEMP_PREFIX: &str = ".tmp-";

#[derive(Debug)]
pub struct ScenarioStore {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

pub fn check_id(id: &str) -> Result<(), ServiceError> {
    let ok = !id.is_empty() && id.len() <= 128 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(ServiceError::InvalidId(id.to_owned()))
    }
}

impl ScenarioStore {
    /// Opens (creating if needed) a store and removes temporaries left by
    /// interrupted writes.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        for entry in fs::read_dir(&dir)? {
            let entry = entry?;
            if entry.file_name().to_string_lossy().starts_with(TEMP_PREFIX) {
                log::warn!("removing stale temporary {}", entry.path().display());
                fs::remove_file(entry.path())?;
            }
        }
        Ok(Self {
            dir,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    pub fn exists(&self, id: &str) -> bool {
        check_id(id).is_ok() && self.path(id).is_file()
    }

    pub fn list(&self) -> Result<Vec<String>, ServiceError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let name = entry?.file_name().to_string_lossy().into_owned();
            if name.starts_with(TEMP_PREFIX) {
                continue;
            }
            if let Some(id) = name.strip_suffix(".json") {
                ids.push(id.to_owned());
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn load(&self, id: &str) -> Result<Scenario, ServiceError> {
        check_id(id)?;
        let path = self.path(id);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(ServiceError::NotFound(id.to_owned())),
            Err(e) => return Err(e.into()),
        };
        serde_json::from_str(&text).map_err(|source| ServiceError::Corrupt { path, source })
    }

    fn lock_for(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|p| p.into_inner());
        locks.entry(id.to_owned()).or_default().clone()
    }

    fn write(&self, scenario: &Scenario) -> Result<(), ServiceError> {
        let text = serde_json::to_string_pretty(scenario).expect("scenario serializes");
        let mut tmp = tempfile::Builder::new().prefix(TEMP_PREFIX).tempfile_in(&self.dir)?;
        tmp.write_all(text.as_bytes())?;
        tmp.as_file().sync_all()?;
        persist(tmp, &self.path(&scenario.id))
    }

    /// Stores a new scenario; fails if the id is taken.
    pub fn insert(&self, scenario: &Scenario) -> Result<(), ServiceError> {
        check_id(&scenario.id)?;
        let lock = self.lock_for(&scenario.id);
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        if self.path(&scenario.id).exists() {
            return Err(io::Error::new(
                io::ErrorKind::AlreadyExists,
                format!("scenario `{}` exists", scenario.id),
            )
            .into());
        }
        self.write(scenario)
    }

    /// Loads, mutates and stores one scenario under its writer lock. Nothing is
    /// written if `f` fails.
    pub fn update<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Scenario) -> Result<T, ServiceError>,
    ) -> Result<T, ServiceError> {
        check_id(id)?;
        let lock = self.lock_for(id);
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        let mut scenario = self.load(id)?;
        let out = f(&mut scenario)?;
        self.write(&scenario)?;
        Ok(out)
    }
}

fn persist(tmp: NamedTempFile, target: &Path) -> Result<(), ServiceError> {
    tmp.persist(target).map_err(|e| ServiceError::Io(e.error))?;
    Ok(())
}
