//! Binary policy checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes  "SSDQNET\0"
//! version    u32      currently 1
//! use_bias   u8       0 or 1
//! step       u64      training-step counter
//! n_dims     u32
//! dims       n_dims x u32   input width first, output width last
//! per layer  weights (inputs*outputs f64, input-major) then biases (outputs f64)
//! ```
//!
//! Floats are stored as raw IEEE-754 bits so a round trip is bit-exact.

use std::fs;
use std::path::Path;

use super::network::QNetwork;
use super::LearnerError;

const MAGIC: &[u8; 8] = b"SSDQNET\0";
pub const CHECKPOINT_VERSION: u32 = 1;

/// A saved network together with the step it was taken at.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub net: QNetwork,
    pub step: u64,
}

pub fn encode_policy(net: &QNetwork, step: u64) -> Vec<u8> {
    let dims = net.layer_dims();
    let mut out = Vec::with_capacity(32 + 8 * net.num_parameters());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.push(u8::from(net.uses_bias()));
    out.extend_from_slice(&step.to_le_bytes());
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for d in &dims {
        out.extend_from_slice(&(*d as u32).to_le_bytes());
    }
    for l in 0..dims.len() - 1 {
        for v in net.weights(l).iter().chain(net.biases(l)) {
            out.extend_from_slice(&v.to_bits().to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], LearnerError> {
        if self.buf.len() < n {
            return Err(LearnerError::CorruptCheckpoint("unexpected end of file".into()));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32, LearnerError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, LearnerError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode_policy(bytes: &[u8]) -> Result<Checkpoint, LearnerError> {
    let mut r = Reader { buf: bytes };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(LearnerError::CorruptCheckpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(LearnerError::VersionMismatch {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let use_bias = match r.take(1)?[0] {
        0 => false,
        1 => true,
        b => return Err(LearnerError::CorruptCheckpoint(format!("bad bias flag {b}"))),
    };
    let step = r.u64()?;
    let n_dims = r.u32()? as usize;
    if !(2..=64).contains(&n_dims) {
        return Err(LearnerError::CorruptCheckpoint(format!("{n_dims} layer sizes")));
    }
    let dims = (0..n_dims)
        .map(|_| r.u32().map(|d| d as usize))
        .collect::<Result<Vec<_>, _>>()?;
    let mut net = QNetwork::zeros(&dims)
        .map_err(|e| LearnerError::CorruptCheckpoint(e.to_string()))?;
    let expected = net.num_parameters() * 8;
    if r.buf.len() != expected {
        return Err(LearnerError::CorruptCheckpoint(format!(
            "expected {expected} parameter bytes, found {}",
            r.buf.len()
        )));
    }
    let params: Vec<f64> = r
        .buf
        .chunks_exact(8)
        .map(|c| f64::from_bits(u64::from_le_bytes(c.try_into().expect("8 bytes"))))
        .collect();
    net.set_parameters(&params)?;
    if !use_bias {
        net.use_bias = false;
    }
    Ok(Checkpoint { net, step })
}

pub fn save_policy(net: &QNetwork, step: u64, path: &Path) -> Result<(), LearnerError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, encode_policy(net, step))?;
    Ok(())
}

pub fn load_policy(path: &Path) -> Result<Checkpoint, LearnerError> {
    decode_policy(&fs::read(path)?)
}
