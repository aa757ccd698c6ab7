//! Parameter checkpoints: a text header with one `name shape` line per
//! parameter, then every value as a little-endian `f64`, in header order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use tin_core::nn::ParamStore;

use crate::{Error, Result};

const MAGIC: &str = "TIN-CHECKPOINT 1";
const END: &str = "end";

/// One stored tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

fn shape_text(shape: &[usize]) -> String {
    shape.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}

pub fn write_checkpoint<W: Write>(mut w: W, store: &ParamStore) -> std::io::Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "params {}", store.len())?;
    for p in store.iter() {
        writeln!(w, "{} {}", p.name, shape_text(p.value.shape()))?;
    }
    writeln!(w, "{END}")?;
    for p in store.iter() {
        for v in p.value.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()
}

pub fn save_checkpoint(path: &Path, store: &ParamStore) -> Result<()> {
    let file = File::create(path).map_err(Error::io(path))?;
    write_checkpoint(BufWriter::new(file), store).map_err(Error::io(path))
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

pub fn read_checkpoint<R: Read>(reader: R) -> Result<Vec<Entry>> {
    let mut r = BufReader::new(reader);
    let mut line = String::new();
    let mut next_line = |r: &mut BufReader<R>| -> Result<String> {
        line.clear();
        let n = r.read_line(&mut line).map_err(|e| bad(e.to_string()))?;
        if n == 0 {
            return Err(bad("truncated header"));
        }
        Ok(line.trim_end_matches('\n').to_string())
    };
    if next_line(&mut r)? != MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let count_line = next_line(&mut r)?;
    let count: usize = count_line
        .strip_prefix("params ")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| bad(format!("bad parameter count line {count_line:?}")))?;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let l = next_line(&mut r)?;
        let (name, shape) = l.rsplit_once(' ').ok_or_else(|| bad(format!("bad parameter line {l:?}")))?;
        let shape = shape
            .split('x')
            .map(|d| d.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad(format!("bad shape in {l:?}")))?;
        entries.push(Entry {
            name: name.to_string(),
            shape,
            values: Vec::new(),
        });
    }
    if next_line(&mut r)? != END {
        return Err(bad("header does not end where its count says"));
    }
    let mut buf = [0u8; 8];
    for e in &mut entries {
        let n: usize = e.shape.iter().product();
        e.values.reserve(n);
        for _ in 0..n {
            r.read_exact(&mut buf)
                .map_err(|_| bad(format!("data ends inside {}", e.name)))?;
            e.values.push(f64::from_le_bytes(buf));
        }
    }
    if r.read(&mut buf).map_err(|e| bad(e.to_string()))? != 0 {
        return Err(bad("trailing bytes after the last parameter"));
    }
    Ok(entries)
}

/// Copies checkpoint values into `store`, whose parameter names and shapes
/// must match the checkpoint exactly and in order.
pub fn restore(store: &mut ParamStore, entries: &[Entry]) -> Result<()> {
    if entries.len() != store.len() {
        return Err(bad(format!("checkpoint has {} parameters, model has {}", entries.len(), store.len())));
    }
    let ids: Vec<_> = store.ids().collect();
    for (id, e) in ids.into_iter().zip(entries) {
        let p = store.param(id);
        if p.name != e.name || p.value.shape() != e.shape.as_slice() {
            return Err(bad(format!(
                "parameter {} {} does not match checkpoint entry {} {}",
                p.name,
                shape_text(p.value.shape()),
                e.name,
                shape_text(&e.shape)
            )));
        }
        store.value_mut(id).copy_from_slice(&e.values);
    }
    Ok(())
}

pub fn load_checkpoint(path: &Path, store: &mut ParamStore) -> Result<()> {
    let file = File::open(path).map_err(Error::io(path))?;
    restore(store, &read_checkpoint(file)?)
}
