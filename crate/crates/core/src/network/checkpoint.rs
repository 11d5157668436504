//! Binary model checkpoints.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic  b"WNDCKPT\0"
//! 8       4     format version (u32, currently 1)
//! 12      1     cell kind        0 = LSTM, 1 = GRU
//! 13      1     state mode       0 = stateless, 1 = stateful
//! 14      4     layers           u32
//! 18      4     input width      u32
//! 22      4     hidden width     u32
//! 26      4     lookback         u32
//! 30      8     seed             u64
//! 38      4     tensor count     u32
//! then per tensor, in StackedModel::tensors() order:
//!         4     rows (u32)
//!         4     cols (u32)
//!         8·n   values (f64 bit patterns, row-major)
//! ```
//!
//! Persisted stateful states are not part of a checkpoint; a loaded model
//! starts from zero states.

use std::io::{Read, Write};

use super::{CellKind, ModelConfig, StackedModel, StateMode};
use crate::error::{Error, Result};
use crate::numerics::Tensor2;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"WNDCKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

fn io_err(e: std::io::Error) -> Error {
    Error::Format(format!("checkpoint i/o: {e}"))
}

fn u32_of(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("{what} {v} does not fit the checkpoint format")))
}

pub fn write_checkpoint<W: Write>(model: &StackedModel, mut out: W) -> Result<()> {
    let cfg = model.config();
    let mut buf = Vec::new();
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.push(match cfg.cell {
        CellKind::Lstm => 0,
        CellKind::Gru => 1,
    });
    buf.push(match cfg.mode {
        StateMode::Stateless => 0,
        StateMode::Stateful => 1,
    });
    for (v, what) in [
        (cfg.layers, "layers"),
        (cfg.input_width, "input width"),
        (cfg.hidden_width, "hidden width"),
        (cfg.lookback, "lookback"),
    ] {
        buf.extend_from_slice(&u32_of(v, what)?.to_le_bytes());
    }
    buf.extend_from_slice(&cfg.seed.to_le_bytes());
    let tensors = model.tensors();
    buf.extend_from_slice(&u32_of(tensors.len(), "tensor count")?.to_le_bytes());
    for t in tensors {
        buf.extend_from_slice(&u32_of(t.rows(), "rows")?.to_le_bytes());
        buf.extend_from_slice(&u32_of(t.cols(), "cols")?.to_le_bytes());
        for v in t.data() {
            buf.extend_from_slice(&v.to_bits().to_le_bytes());
        }
    }
    out.write_all(&buf).map_err(io_err)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Format(format!("checkpoint truncated at byte {}", self.pos))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<StackedModel> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(io_err)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };

    if cur.take(8)? != CHECKPOINT_MAGIC {
        return Err(Error::Format("not a model checkpoint (bad magic)".into()));
    }
    let version = cur.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let cell = match cur.u8()? {
        0 => CellKind::Lstm,
        1 => CellKind::Gru,
        b => return Err(Error::Format(format!("unknown cell kind tag {b}"))),
    };
    let mode = match cur.u8()? {
        0 => StateMode::Stateless,
        1 => StateMode::Stateful,
        b => return Err(Error::Format(format!("unknown state mode tag {b}"))),
    };
    let config = ModelConfig {
        cell,
        mode,
        layers: cur.u32()? as usize,
        input_width: cur.u32()? as usize,
        hidden_width: cur.u32()? as usize,
        lookback: cur.u32()? as usize,
        seed: cur.u64()?,
    };
    config.validate().map_err(|e| Error::Format(format!("checkpoint header: {e}")))?;

    let count = cur.u32()? as usize;
    let mut tensors = Vec::with_capacity(count.min(4096));
    for _ in 0..count {
        let rows = cur.u32()? as usize;
        let cols = cur.u32()? as usize;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Format("tensor size overflow".into()))?;
        let raw = cur.take(n.checked_mul(8).ok_or_else(|| Error::Format("tensor size overflow".into()))?)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_bits(u64::from_le_bytes(c.try_into().unwrap())))
            .collect();
        tensors.push(Tensor2::new(rows, cols, data).map_err(|e| Error::Format(e.to_string()))?);
    }
    if cur.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after checkpoint",
            bytes.len() - cur.pos
        )));
    }
    StackedModel::from_parts(config, tensors)
}
