//! Instance JSON Lines.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::graph::{GraphError, Instance};

#[derive(Debug, Error)]
pub enum InstanceIoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Schema { path: String, line: usize, message: String },
    #[error("{path}:{line}: {source}")]
    Invalid {
        path: String,
        line: usize,
        #[source]
        source: GraphError,
    },
}

/// Parses instances from JSON Lines text. Every graph is validated.
pub fn parse_instances(text: &str, name: &str) -> Result<Vec<Instance>, InstanceIoError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let inst: Instance = serde_json::from_str(line).map_err(|e| InstanceIoError::Schema {
            path: name.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        inst.validate().map_err(|source| InstanceIoError::Invalid {
            path: name.to_string(),
            line: i + 1,
            source,
        })?;
        out.push(inst);
    }
    Ok(out)
}

pub fn read_instances(path: &Path) -> Result<Vec<Instance>, InstanceIoError> {
    let name = path.display().to_string();
    let file = File::open(path).map_err(|source| InstanceIoError::Io {
        path: name.clone(),
        source,
    })?;
    let mut text = String::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|source| InstanceIoError::Io {
            path: name.clone(),
            source,
        })?;
        text.push_str(&line);
        text.push('\n');
    }
    parse_instances(&text, &name)
}

pub fn write_instances_to<W: Write>(w: W, instances: &[Instance]) -> io::Result<()> {
    let mut w = BufWriter::new(w);
    for inst in instances {
        serde_json::to_writer(&mut w, inst)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn write_instances(path: &Path, instances: &[Instance]) -> Result<(), InstanceIoError> {
    let file = File::create(path).map_err(|source| InstanceIoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_instances_to(file, instances).map_err(|source| InstanceIoError::Io {
        path: path.display().to_string(),
        source,
    })
}
