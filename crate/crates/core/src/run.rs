//! Persisted mining runs: result records, manifests and the on-disk store.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::log::EventLog;
use crate::miner::{MinerConfig, RoundStats};
use crate::projections::{ProjectionMethod, ProjectionSet};
use crate::quality::Evaluation;

/// Version of the result and manifest JSON layout.
pub const SCHEMA: u32 = 1;

/// Everything that determines the result of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub miner: MinerConfig,
    #[serde(default)]
    pub projection: Option<ProjectionMethod>,
}

/// One event of the attribute index used for overlays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedEvent {
    pub activity: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, String>,
}

/// Event attributes per trace, in log order.
pub fn attribute_index(log: &EventLog) -> Vec<Vec<IndexedEvent>> {
    log.traces()
        .iter()
        .map(|t| {
            t.events
                .iter()
                .map(|e| {
                    let mut attributes: BTreeMap<String, String> =
                        e.attributes.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
                    if let Some(ms) = e.timestamp {
                        attributes.insert("time:timestamp".into(), crate::log::format_timestamp(ms));
                    }
                    IndexedEvent { activity: e.activity.clone(), attributes }
                })
                .collect()
        })
        .collect()
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Content digest of a log.
pub fn log_digest(log: &EventLog) -> String {
    sha256_hex(&serde_json::to_vec(log).expect("logs serialize"))
}

/// Run id: content hash of the configuration and the log digest.
pub fn run_id(config: &RunConfig, digest: &str) -> String {
    let mut bytes = serde_json::to_vec(config).expect("configs serialize");
    bytes.extend_from_slice(digest.as_bytes());
    sha256_hex(&bytes)[..16].to_string()
}

/// Ranked patterns of a run with raw measures, instances and the attribute index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: u32,
    pub id: String,
    pub log_digest: String,
    pub traces: usize,
    pub events: usize,
    pub config: RunConfig,
    #[serde(default)]
    pub projection: Option<ProjectionSet>,
    pub ranking: Vec<Evaluation>,
    pub attributes: Vec<Vec<IndexedEvent>>,
}

impl RunRecord {
    pub fn new(log: &EventLog, config: RunConfig, projection: Option<ProjectionSet>, ranking: Vec<Evaluation>) -> Self {
        let log_digest = log_digest(log);
        RunRecord {
            schema: SCHEMA,
            id: run_id(&config, &log_digest),
            log_digest,
            traces: log.len(),
            events: log.event_count(),
            config,
            projection,
            ranking,
            attributes: attribute_index(log),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Side file of a run with timings and search statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub id: String,
    pub log_digest: String,
    pub log_path: Option<String>,
    pub config: RunConfig,
    pub rounds: Vec<RoundStats>,
    pub qualifying: usize,
    pub projection_sets: Option<ProjectionSet>,
    pub started_at: String,
    pub wall_time_ms: u128,
    pub outputs: Vec<String>,
}

/// Runs keyed by id, optionally backed by a directory of JSON files.
#[derive(Debug, Default)]
pub struct RunStore {
    dir: Option<PathBuf>,
    runs: BTreeMap<String, RunRecord>,
}

fn is_run_file(p: &Path) -> bool {
    let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
    name.ends_with(".json") && !name.ends_with(".manifest.json")
}

impl RunStore {
    pub fn in_memory() -> Self {
        RunStore::default()
    }

    /// Loads every run file in `dir`, creating the directory if needed.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut runs = BTreeMap::new();
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
        paths.sort();
        for p in paths.into_iter().filter(|p| is_run_file(p)) {
            let run: RunRecord = serde_json::from_slice(&fs::read(&p)?)?;
            if run.schema != SCHEMA {
                return Err(Error::Config(format!("{}: unsupported schema {}", p.display(), run.schema)));
            }
            runs.insert(run.id.clone(), run);
        }
        Ok(RunStore { dir: Some(dir), runs })
    }

    pub fn path_of(&self, id: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{id}.json")))
    }

    /// Adds a run, writing it to disk when the store is directory-backed.
    pub fn insert(&mut self, run: RunRecord) -> Result<Option<PathBuf>> {
        let path = self.path_of(&run.id);
        if let Some(p) = &path {
            fs::write(p, run.to_json()?)?;
        }
        self.runs.insert(run.id.clone(), run);
        Ok(path)
    }

    pub fn get(&self, id: &str) -> Option<&RunRecord> {
        self.runs.get(id)
    }

    pub fn runs(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.values()
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }
}

/// Result of executing a run configuration.
#[derive(Debug, Clone)]
pub struct Executed {
    pub record: RunRecord,
    pub rounds: Vec<RoundStats>,
    pub qualifying: usize,
}

/// Mines `log` under `config`, through projections when one is configured.
pub fn execute(log: &EventLog, config: RunConfig) -> Result<Executed> {
    match config.projection {
        None => {
            let out = crate::miner::mine(log, &config.miner)?;
            Ok(Executed { record: RunRecord::new(log, config, None, out.ranking), rounds: out.rounds, qualifying: out.qualifying })
        }
        Some(method) => {
            let sets = crate::projections::discover(log, method)?;
            let ranking = crate::projections::mine_projected(log, &sets, &config.miner)?;
            let qualifying = ranking.len();
            Ok(Executed { record: RunRecord::new(log, config, Some(sets), ranking), rounds: vec![], qualifying })
        }
    }
}
