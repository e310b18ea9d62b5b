//! On-disk inverted index (.i2idx): a compact little-endian binary with an
//! 8-byte magic and a version byte, plus a JSON debug export.
//!
//! Layout after the header:
//!   k: u32, entry_count: u32
//!   string table: count u32, then per string: len u32 + UTF-8 bytes
//!   entries (key-sorted): key string idx u32, neighbor count u32,
//!     then per neighbor: string idx u32 + score f64 (bit-exact)

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use i2i_core::index::{InvertedIndex, INDEX_VERSION};

pub const INDEX_MAGIC: [u8; 8] = *b"I2IDX\r\n\0";

#[derive(Debug, thiserror::Error)]
pub enum IndexFileError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: not an index file (bad magic)")]
    BadMagic { path: String },
    #[error("{path}: unsupported index version {version}")]
    BadVersion { path: String, version: u8 },
    #[error("{path}: corrupt index: {message}")]
    Corrupt { path: String, message: String },
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> IndexFileError + '_ {
    move |source| IndexFileError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_index(path: &Path, index: &InvertedIndex) -> Result<(), IndexFileError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let err = io_err(path);

    // intern every id that appears as a key or neighbor
    let mut table: BTreeMap<&str, u32> = BTreeMap::new();
    for (key, neighbors) in index.entries() {
        table.entry(key.as_str()).or_insert(0);
        for (n, _) in neighbors {
            table.entry(n.as_str()).or_insert(0);
        }
    }
    for (pos, (_, idx)) in table.iter_mut().enumerate() {
        *idx = pos as u32;
    }

    w.write_all(&INDEX_MAGIC).map_err(&err)?;
    w.write_all(&[index.version]).map_err(&err)?;
    w.write_all(&index.k.to_le_bytes()).map_err(&err)?;
    w.write_all(&(index.item_count() as u32).to_le_bytes())
        .map_err(&err)?;
    w.write_all(&(table.len() as u32).to_le_bytes()).map_err(&err)?;
    for s in table.keys() {
        w.write_all(&(s.len() as u32).to_le_bytes()).map_err(&err)?;
        w.write_all(s.as_bytes()).map_err(&err)?;
    }
    for (key, neighbors) in index.entries() {
        w.write_all(&table[key.as_str()].to_le_bytes()).map_err(&err)?;
        w.write_all(&(neighbors.len() as u32).to_le_bytes())
            .map_err(&err)?;
        for (n, score) in neighbors {
            w.write_all(&table[n.as_str()].to_le_bytes()).map_err(&err)?;
            w.write_all(&score.to_bits().to_le_bytes()).map_err(&err)?;
        }
    }
    w.flush().map_err(&err)
}

pub fn read_index(path: &Path) -> Result<InvertedIndex, IndexFileError> {
    let mut r = BufReader::new(File::open(path).map_err(io_err(path))?);
    let err = io_err(path);
    let corrupt = |message: &str| IndexFileError::Corrupt {
        path: path.display().to_string(),
        message: message.to_string(),
    };

    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(&err)?;
    if magic != INDEX_MAGIC {
        return Err(IndexFileError::BadMagic {
            path: path.display().to_string(),
        });
    }
    let mut version = [0u8; 1];
    r.read_exact(&mut version).map_err(&err)?;
    if version[0] != INDEX_VERSION {
        return Err(IndexFileError::BadVersion {
            path: path.display().to_string(),
            version: version[0],
        });
    }
    let mut u32buf = [0u8; 4];
    let mut read_u32 = |r: &mut BufReader<File>| -> Result<u32, IndexFileError> {
        r.read_exact(&mut u32buf).map_err(&err)?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let k = read_u32(&mut r)?;
    let entry_count = read_u32(&mut r)? as usize;
    let table_len = read_u32(&mut r)? as usize;
    let mut table: Vec<String> = Vec::with_capacity(table_len);
    for _ in 0..table_len {
        let len = read_u32(&mut r)? as usize;
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf).map_err(&err)?;
        table.push(String::from_utf8(buf).map_err(|_| corrupt("non-UTF-8 string"))?);
    }
    let mut entries: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for _ in 0..entry_count {
        let key_idx = read_u32(&mut r)? as usize;
        let key = table
            .get(key_idx)
            .ok_or_else(|| corrupt("key index out of range"))?
            .clone();
        let n = read_u32(&mut r)? as usize;
        let mut neighbors = Vec::with_capacity(n);
        for _ in 0..n {
            let idx = read_u32(&mut r)? as usize;
            let id = table
                .get(idx)
                .ok_or_else(|| corrupt("neighbor index out of range"))?
                .clone();
            let mut bits = [0u8; 8];
            r.read_exact(&mut bits).map_err(&err)?;
            neighbors.push((id, f64::from_bits(u64::from_le_bytes(bits))));
        }
        if entries.insert(key, neighbors).is_some() {
            return Err(corrupt("duplicate key"));
        }
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(&err)? != 0 {
        return Err(corrupt("trailing bytes"));
    }
    Ok(InvertedIndex::from_entries(INDEX_VERSION, k, entries))
}

/// Human-readable JSON dump of an index, for debugging and diffing.
pub fn export_index_json(path: &Path, index: &InvertedIndex) -> Result<(), IndexFileError> {
    #[derive(serde::Serialize)]
    struct Dump<'a> {
        version: u8,
        k: u32,
        entries: BTreeMap<&'a str, &'a Vec<(String, f64)>>,
    }
    let dump = Dump {
        version: index.version,
        k: index.k,
        entries: index
            .entries()
            .map(|(key, neighbors)| (key.as_str(), neighbors))
            .collect(),
    };
    let text = serde_json::to_string_pretty(&dump).map_err(|e| IndexFileError::Corrupt {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    std::fs::write(path, text).map_err(io_err(path))
}
