use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use sparse_edge::persist::atomic_write;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Files produced by a command, held in memory until the run succeeds.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    /// Captures a CSV writer into an in-memory file.
    pub fn csv(
        &mut self,
        name: impl Into<String>,
        write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) {
        let mut buf = Vec::new();
        write(&mut buf).expect("writing to memory");
        self.add(name, buf);
    }
}

#[derive(Debug, Serialize)]
pub struct RunMeta<'a, P: Serialize> {
    pub command: &'a str,
    pub params: &'a P,
    pub master_seed: Option<u64>,
    pub version: &'a str,
    pub timestamp: String,
    pub elapsed_s: f64,
}

/// Writes every file atomically, then `meta.json`.
pub fn write_outputs<P: Serialize>(
    out_dir: &Path,
    outputs: &Outputs,
    command: &str,
    params: &P,
    master_seed: Option<u64>,
    started: Instant,
) -> sparse_edge::Result<()> {
    for (name, bytes) in &outputs.files {
        atomic_write(&out_dir.join(name), bytes)?;
    }
    let meta = RunMeta {
        command,
        params,
        master_seed,
        version: VERSION,
        timestamp: chrono::Utc::now().to_rfc3339(),
        elapsed_s: started.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_vec_pretty(&meta).expect("meta serializes");
    atomic_write(&out_dir.join("meta.json"), &json)
}
