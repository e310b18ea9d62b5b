//! File ingestion: TSV and JSONL interaction logs, optional item text, and
//! the persisted forms of accepted synthetic pairs and neighbor lists.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use i2i_core::augment::SyntheticCandidate;
use i2i_core::data::{Dataset, EventType, Interaction};
use i2i_core::neighbors::ItemNeighborList;
use i2i_core::prompt::Decision;

use crate::config::DataFormat;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Record {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Data(#[from] i2i_core::data::DataError),
}

fn open(path: &Path) -> Result<BufReader<File>, IngestError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })
}

#[derive(Debug, Deserialize, Serialize)]
struct JsonInteraction {
    user_id: String,
    item_id: String,
    timestamp: i64,
    event_type: String,
}

/// Reads an interaction log. Blank lines are skipped; any malformed line is
/// an error naming the file and line number.
pub fn read_interactions(path: &Path, format: DataFormat) -> Result<Vec<Interaction>, IngestError> {
    let reader = open(path)?;
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = match format {
            DataFormat::Tsv => {
                Interaction::parse_tsv(&line).map_err(|e| IngestError::Record {
                    path: path.display().to_string(),
                    line: idx + 1,
                    message: e.to_string(),
                })?
            }
            DataFormat::Jsonl => {
                let rec: JsonInteraction =
                    serde_json::from_str(&line).map_err(|e| IngestError::Record {
                        path: path.display().to_string(),
                        line: idx + 1,
                        message: e.to_string(),
                    })?;
                let event_type =
                    EventType::parse(&rec.event_type).ok_or_else(|| IngestError::Record {
                        path: path.display().to_string(),
                        line: idx + 1,
                        message: format!("bad event_type {:?}", rec.event_type),
                    })?;
                if rec.timestamp < 0 || rec.user_id.is_empty() || rec.item_id.is_empty() {
                    return Err(IngestError::Record {
                        path: path.display().to_string(),
                        line: idx + 1,
                        message: "empty id or negative timestamp".to_string(),
                    });
                }
                Interaction::new(&rec.user_id, &rec.item_id, rec.timestamp, event_type)
            }
        };
        out.push(record);
    }
    Ok(out)
}

pub fn write_interactions_tsv(path: &Path, records: &[Interaction]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for rec in records {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            rec.user_id,
            rec.item_id,
            rec.timestamp,
            rec.event_type.as_str()
        )?;
    }
    w.flush()
}

/// Loads a dataset from disk: interactions plus optional item text
/// (`item_id \t title [\t category]`), long-tail labels applied.
pub fn load_dataset(
    interactions: &Path,
    format: DataFormat,
    item_text: Option<&Path>,
    long_tail_fraction: f64,
) -> Result<Dataset, IngestError> {
    let records = read_interactions(interactions, format)?;
    let mut ds = Dataset::from_interactions(records)?;
    if let Some(text_path) = item_text {
        let reader = open(text_path)?;
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|source| IngestError::Io {
                path: text_path.display().to_string(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(id), Some(title)) = (fields.next(), fields.next()) else {
                return Err(IngestError::Record {
                    path: text_path.display().to_string(),
                    line: idx + 1,
                    message: "expected item_id \\t title [\\t category]".to_string(),
                });
            };
            ds.set_item_text(id, Some(title), fields.next());
        }
    }
    ds.label_long_tail(long_tail_fraction)?;
    Ok(ds)
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonCandidate {
    user_id: String,
    item_id: String,
    generator_score: f64,
    confidence: f64,
    accepted: bool,
}

/// One JSONL line per accepted candidate, in the order given.
pub fn write_accepted_jsonl(path: &Path, accepted: &[SyntheticCandidate]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for cand in accepted {
        let rec = JsonCandidate {
            user_id: cand.user_id.clone(),
            item_id: cand.item_id.clone(),
            generator_score: cand.generator_score,
            confidence: cand.confidence,
            accepted: cand.accepted,
        };
        writeln!(w, "{}", serde_json::to_string(&rec)?)?;
    }
    w.flush()
}

pub fn read_accepted_jsonl(path: &Path) -> Result<Vec<SyntheticCandidate>, IngestError> {
    let reader = open(path)?;
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonCandidate = serde_json::from_str(&line).map_err(|e| IngestError::Record {
            path: path.display().to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(SyntheticCandidate {
            user_id: rec.user_id,
            item_id: rec.item_id,
            generator_score: rec.generator_score,
            decision: if rec.accepted {
                Decision::Yes
            } else {
                Decision::No
            },
            confidence: rec.confidence,
            accepted: rec.accepted,
        });
    }
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonNeighborList {
    item_id: String,
    neighbors: Vec<(String, f64)>,
}

pub fn write_neighbors_jsonl(path: &Path, lists: &[ItemNeighborList]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for list in lists {
        let rec = JsonNeighborList {
            item_id: list.item_id.clone(),
            neighbors: list.neighbors.clone(),
        };
        writeln!(w, "{}", serde_json::to_string(&rec)?)?;
    }
    w.flush()
}

pub fn read_neighbors_jsonl(path: &Path) -> Result<Vec<ItemNeighborList>, IngestError> {
    let reader = open(path)?;
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonNeighborList =
            serde_json::from_str(&line).map_err(|e| IngestError::Record {
                path: path.display().to_string(),
                line: idx + 1,
                message: e.to_string(),
            })?;
        out.push(ItemNeighborList {
            item_id: rec.item_id,
            neighbors: rec.neighbors,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use i2i_core::data::EventType;

    fn tmp_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn tsv_and_jsonl_agree() {
        let tsv = tmp_file("u1\ta\t5\tclick\nu2\tb\t9\tpurchase\n");
        let jsonl = tmp_file(concat!(
            "{\"user_id\":\"u1\",\"item_id\":\"a\",\"timestamp\":5,\"event_type\":\"click\"}\n",
            "{\"user_id\":\"u2\",\"item_id\":\"b\",\"timestamp\":9,\"event_type\":\"purchase\"}\n"
        ));
        let a = read_interactions(tsv.path(), DataFormat::Tsv).unwrap();
        let b = read_interactions(jsonl.path(), DataFormat::Jsonl).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[1].event_type, EventType::Purchase);
    }

    #[test]
    fn malformed_line_names_position() {
        let tsv = tmp_file("u1\ta\t5\tclick\nu2\tb\tnope\tclick\n");
        let err = read_interactions(tsv.path(), DataFormat::Tsv).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }

    #[test]
    fn interactions_tsv_roundtrip() {
        let recs = vec![
            Interaction::new("u1", "a", 5, EventType::Click),
            Interaction::new("u2", "b", 9, EventType::Purchase),
        ];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_interactions_tsv(f.path(), &recs).unwrap();
        assert_eq!(read_interactions(f.path(), DataFormat::Tsv).unwrap(), recs);
    }

    #[test]
    fn dataset_with_item_text_and_long_tail() {
        let tsv = tmp_file("u1\ta\t1\tclick\nu1\tb\t2\tclick\nu2\tb\t3\tclick\n");
        let text = tmp_file("a\tAcme Widget\ttools\nb\tOther\n");
        let ds = load_dataset(tsv.path(), DataFormat::Tsv, Some(text.path()), 0.5).unwrap();
        assert_eq!(ds.item("a").unwrap().title.as_deref(), Some("Acme Widget"));
        assert_eq!(ds.item("a").unwrap().category.as_deref(), Some("tools"));
        assert!(ds.item("a").unwrap().long_tail);
        assert!(!ds.item("b").unwrap().long_tail);
    }

    #[test]
    fn accepted_jsonl_roundtrip() {
        let cands = vec![SyntheticCandidate {
            user_id: "u1".into(),
            item_id: "x".into(),
            generator_score: 0.5,
            decision: Decision::Yes,
            confidence: 0.93,
            accepted: true,
        }];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_accepted_jsonl(f.path(), &cands).unwrap();
        assert_eq!(read_accepted_jsonl(f.path()).unwrap(), cands);
    }

    #[test]
    fn neighbors_jsonl_roundtrip() {
        let lists = vec![ItemNeighborList {
            item_id: "a".into(),
            neighbors: vec![("b".into(), 0.25), ("c".into(), 0.125)],
        }];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_neighbors_jsonl(f.path(), &lists).unwrap();
        assert_eq!(read_neighbors_jsonl(f.path()).unwrap(), lists);
    }
}
