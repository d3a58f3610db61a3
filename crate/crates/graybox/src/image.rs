//! Reference images: one-row CSV files or IDX (`ubyte`) files.

use std::fs;
use std::path::Path;

use crate::error::{IoError, Result};

/// Loads pixel values in `[0, 1]`. IDX files yield their first image, scaled by `1/255`.
pub fn load_reference_input(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    if bytes.len() >= 4 && bytes[0] == 0 && bytes[1] == 0 && bytes[2] == 0x08 {
        return parse_idx(&bytes);
    }
    let text =
        String::from_utf8(bytes).map_err(|_| IoError::Malformed("not UTF-8 text or IDX".into()))?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    for record in reader.records() {
        for field in record?.iter() {
            if field.is_empty() {
                continue;
            }
            let v: f64 = field
                .parse()
                .map_err(|_| IoError::Malformed(format!("'{field}' is not a number")))?;
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(IoError::Malformed("no pixel values".into()));
    }
    check_range(&values)?;
    Ok(values)
}

fn check_range(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(0.0..=1.0).contains(v)) {
        Some(index) => Err(IoError::PixelOutOfRange {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// IDX with unsigned-byte payload and 1 to 3 dimensions.
pub fn parse_idx(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() < 4 || bytes[0] != 0 || bytes[1] != 0 {
        return Err(IoError::MalformedHeader("bad IDX magic".into()));
    }
    if bytes[2] != 0x08 {
        return Err(IoError::MalformedHeader(format!(
            "IDX element type 0x{:02x} is not ubyte",
            bytes[2]
        )));
    }
    let ndim = bytes[3] as usize;
    if !(1..=3).contains(&ndim) {
        return Err(IoError::MalformedHeader(format!(
            "IDX with {ndim} dimensions"
        )));
    }
    let header = 4 + 4 * ndim;
    if bytes.len() < header {
        return Err(IoError::TruncatedPayload {
            expected: header,
            found: bytes.len(),
        });
    }
    let dims: Vec<usize> = bytes[4..header]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes(c.try_into().unwrap()) as usize)
        .collect();
    let per_image = match ndim {
        3 => dims[1] * dims[2],
        2 => dims[0] * dims[1],
        _ => dims[0],
    };
    if per_image == 0 || (ndim == 3 && dims[0] == 0) {
        return Err(IoError::DimensionInconsistency(format!(
            "IDX dimensions {dims:?}"
        )));
    }
    let end = header + per_image;
    if bytes.len() < end {
        return Err(IoError::TruncatedPayload {
            expected: end,
            found: bytes.len(),
        });
    }
    Ok(bytes[header..end]
        .iter()
        .map(|&b| f64::from(b) / 255.0)
        .collect())
}

pub fn save_image_csv(x: &[f64], path: impl AsRef<Path>) -> Result<()> {
    check_range(x)?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(x.iter().map(|v| v.to_string()))?;
    w.flush()?;
    Ok(())
}
