//! Checkpoint layout: a UTF-8 text header terminated by a line `end`, then
//! every tensor as little-endian f64 in header order.
//!
//! ```text
//! vfpg-checkpoint 1
//! hidden 64
//! components 128
//! n_tau 32
//! latent_dim 2
//! tensor lstm.w_ih 256 2
//! ...
//! end
//! ```

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use super::{ModelConfig, ModelParams, LATENT_DIM, TENSOR_NAMES};
use crate::autodiff::Tensor;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &str = "vfpg-checkpoint";

pub fn write_checkpoint<W: Write>(params: &ModelParams, mut w: W) -> std::io::Result<()> {
    let cfg = params.config();
    writeln!(w, "{MAGIC} {CHECKPOINT_VERSION}")?;
    writeln!(w, "hidden {}", cfg.hidden)?;
    writeln!(w, "components {}", cfg.components)?;
    writeln!(w, "n_tau {}", cfg.n_tau)?;
    writeln!(w, "latent_dim {LATENT_DIM}")?;
    for (name, t) in TENSOR_NAMES.iter().zip(params.tensors()) {
        writeln!(w, "tensor {name} {} {}", t.rows(), t.cols())?;
    }
    writeln!(w, "end")?;
    for t in params.tensors() {
        for v in t.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()
}

pub fn read_checkpoint<R: BufRead>(mut r: R) -> Result<ModelParams> {
    let bad = |m: String| Error::Checkpoint(m);
    let mut line = String::new();
    let mut next_line = |r: &mut R| -> Result<String> {
        line.clear();
        let n = r.read_line(&mut line).map_err(|e| bad(e.to_string()))?;
        if n == 0 {
            return Err(bad("truncated header".into()));
        }
        Ok(line.trim_end().to_string())
    };

    let head = next_line(&mut r)?;
    let version = head
        .strip_prefix(MAGIC)
        .map(str::trim)
        .ok_or_else(|| bad(format!("not a checkpoint (header {head:?})")))?;
    if version != CHECKPOINT_VERSION.to_string() {
        return Err(bad(format!("unsupported format version {version}")));
    }

    let mut field = |r: &mut R, key: &str| -> Result<usize> {
        let l = next_line(r)?;
        let mut it = l.split_whitespace();
        match (it.next(), it.next().and_then(|v| v.parse().ok()), it.next()) {
            (Some(k), Some(v), None) if k == key => Ok(v),
            _ => Err(bad(format!("expected `{key} <int>`, got {l:?}"))),
        }
    };
    let hidden = field(&mut r, "hidden")?;
    let components = field(&mut r, "components")?;
    let n_tau = field(&mut r, "n_tau")?;
    let latent = field(&mut r, "latent_dim")?;
    if latent != LATENT_DIM {
        return Err(bad(format!("latent_dim {latent} unsupported")));
    }

    let mut shapes = Vec::with_capacity(TENSOR_NAMES.len());
    for name in TENSOR_NAMES {
        let l = next_line(&mut r)?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        match parts.as_slice() {
            ["tensor", n, rows, cols] if *n == name => {
                let rows: usize = rows.parse().map_err(|_| bad(format!("bad row count in {l:?}")))?;
                let cols: usize = cols.parse().map_err(|_| bad(format!("bad col count in {l:?}")))?;
                shapes.push((rows, cols));
            }
            _ => return Err(bad(format!("expected tensor {name}, got {l:?}"))),
        }
    }
    if next_line(&mut r)? != "end" {
        return Err(bad("missing `end` after tensor list".into()));
    }

    let mut tensors = Vec::with_capacity(shapes.len());
    let mut buf = [0u8; 8];
    for (rows, cols) in shapes {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            r.read_exact(&mut buf).map_err(|_| bad("truncated tensor data".into()))?;
            data.push(f64::from_le_bytes(buf));
        }
        tensors.push(Tensor::new(rows, cols, data)?);
    }
    if r.read(&mut buf).map_err(|e| bad(e.to_string()))? != 0 {
        return Err(bad("trailing bytes after tensor data".into()));
    }
    ModelParams::from_tensors(ModelConfig::new(hidden, components, n_tau), tensors)
        .map_err(|e| bad(format!("inconsistent checkpoint: {e}")))
}

/// Writes to a temporary sibling and renames, so an interrupted save never
/// clobbers the previous checkpoint.
pub fn save_checkpoint(params: &ModelParams, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    write_checkpoint(params, std::io::BufWriter::new(f)).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(std::io::BufReader::new(f))
}
