//! Network weight files.
//!
//! Binary layout (little endian):
//!
//! ```text
//! "GBNN"  u32 version (= 1)  u32 layer count
//! per layer: u32 rows  u32 cols  u8 activation  f64[rows*cols] weights (row-major)  f64[rows] biases
//! ```
//!
//! Paths ending in `.json` use a JSON mirror with the same fields.

use std::fs;
use std::path::Path;

use graybox_core::{Activation, Layer, Mat, NeuralNet};
use serde::{Deserialize, Serialize};

use crate::error::{IoError, Result};

pub const MAGIC: &[u8; 4] = b"GBNN";
pub const VERSION: u32 = 1;

pub fn encode(net: &NeuralNet) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * (net.param_count() + 2 * net.depth()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(net.depth() as u32).to_le_bytes());
    for layer in net.layers() {
        out.extend_from_slice(&(layer.output_dim() as u32).to_le_bytes());
        out.extend_from_slice(&(layer.input_dim() as u32).to_le_bytes());
        out.push(layer.activation().code());
        for v in layer.weight().as_slice().iter().chain(layer.bias()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        if end > self.buf.len() {
            return Err(IoError::TruncatedPayload {
                expected: end,
                found: self.buf.len(),
            });
        }
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| {
            IoError::DimensionInconsistency(format!("{n} values overflow the address space"))
        })?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn decode(bytes: &[u8]) -> Result<NeuralNet> {
    if bytes.len() < 12 {
        return Err(IoError::MalformedHeader(format!(
            "{} bytes, need at least 12",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(IoError::MalformedHeader("bad magic".into()));
    }
    let mut r = Reader { buf: bytes, pos: 4 };
    let version = r.u32()?;
    if version != VERSION {
        return Err(IoError::MalformedHeader(format!(
            "unsupported version {version}"
        )));
    }
    let count = r.u32()? as usize;
    if count == 0 {
        return Err(IoError::MalformedHeader("zero layers".into()));
    }
    let mut layers = Vec::with_capacity(count.min(1024));
    let mut prev_rows: Option<usize> = None;
    for l in 0..count {
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        let code = r.take(1)?[0];
        if rows == 0 || cols == 0 {
            return Err(IoError::DimensionInconsistency(format!(
                "layer {l} is {rows}x{cols}"
            )));
        }
        if let Some(p) = prev_rows {
            if p != cols {
                return Err(IoError::DimensionInconsistency(format!(
                    "layer {l} takes {cols} inputs but layer {} produces {p}",
                    l - 1
                )));
            }
        }
        let act = Activation::from_code(code).ok_or_else(|| {
            IoError::MalformedHeader(format!("layer {l}: unknown activation code {code}"))
        })?;
        let weights = r.f64s(rows * cols)?;
        let bias = r.f64s(rows)?;
        layers.push(Layer::new(Mat::from_vec(rows, cols, weights)?, bias, act)?);
        prev_rows = Some(rows);
    }
    if r.pos != bytes.len() {
        return Err(IoError::TrailingData(bytes.len() - r.pos));
    }
    Ok(NeuralNet::new(layers)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct JsonNet {
    version: u32,
    layers: Vec<JsonLayer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct JsonLayer {
    rows: usize,
    cols: usize,
    activation: String,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

pub fn to_json(net: &NeuralNet) -> String {
    let doc = JsonNet {
        version: VERSION,
        layers: net
            .layers()
            .iter()
            .map(|l| JsonLayer {
                rows: l.output_dim(),
                cols: l.input_dim(),
                activation: l.activation().name().to_string(),
                weights: l.weight().as_slice().to_vec(),
                bias: l.bias().to_vec(),
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("network serializes")
}

pub fn from_json(text: &str) -> Result<NeuralNet> {
    let doc: JsonNet = serde_json::from_str(text)?;
    if doc.version != VERSION {
        return Err(IoError::MalformedHeader(format!(
            "unsupported version {}",
            doc.version
        )));
    }
    let mut layers = Vec::with_capacity(doc.layers.len());
    for (l, jl) in doc.layers.into_iter().enumerate() {
        let act = Activation::from_name(&jl.activation).ok_or_else(|| {
            IoError::MalformedHeader(format!("layer {l}: unknown activation {}", jl.activation))
        })?;
        if jl.weights.len() != jl.rows * jl.cols || jl.bias.len() != jl.rows {
            return Err(IoError::DimensionInconsistency(format!(
                "layer {l}: {}x{} with {} weights and {} biases",
                jl.rows,
                jl.cols,
                jl.weights.len(),
                jl.bias.len()
            )));
        }
        layers.push(Layer::new(
            Mat::from_vec(jl.rows, jl.cols, jl.weights)?,
            jl.bias,
            act,
        )?);
    }
    NeuralNet::new(layers).map_err(|e| match e {
        graybox_core::Error::InvalidNetwork(msg) => IoError::DimensionInconsistency(msg),
        other => other.into(),
    })
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub fn save_net(net: &NeuralNet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if is_json(path) {
        fs::write(path, to_json(net))?;
    } else {
        fs::write(path, encode(net))?;
    }
    Ok(())
}

pub fn load_net(path: impl AsRef<Path>) -> Result<NeuralNet> {
    let path = path.as_ref();
    if is_json(path) {
        from_json(&fs::read_to_string(path)?)
    } else {
        decode(&fs::read(path)?)
    }
}
