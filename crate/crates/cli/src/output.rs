//! Output routing: stdout or a file chosen by `--out`, written in one
//! shot so bytes are stable.

use std::io::Write;
use std::path::PathBuf;

use spaceform::AmbientPoint;

pub struct Sink {
    out: Option<PathBuf>,
}

impl Sink {
    pub fn new(out: Option<PathBuf>) -> Self {
        Self { out }
    }

    pub fn write_all(&self, bytes: &[u8]) -> std::io::Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, bytes),
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                lock.write_all(bytes)?;
                lock.flush()
            }
        }
    }
}

/// A point as a JSON array of its ambient coordinates.
pub fn json_point(p: &AmbientPoint) -> String {
    let coords: Vec<f64> = p.coords().iter().copied().collect();
    serde_json::to_string(&coords).expect("finite coordinates serialize")
}
