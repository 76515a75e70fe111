use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SurfaceQuasimodeError;
use crate::surface_geometry::Vec2;

pub const FIELD_FORMAT: &str = "f64-le-complex-row-major";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Value,
    Defect,
    Folded,
}

/// Cell-centred rectangular block: sample `(i, j)` sits at `origin + ((i + ½)hx, (j + ½)hy)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonBlock {
    pub polygon: usize,
    pub origin: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl PolygonBlock {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.origin[0] + (i as f64 + 0.5) * self.hx, self.origin[1] + (j as f64 + 0.5) * self.hy)
    }
}

/// JSON sidecar describing a binary field file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub format: String,
    pub kind: FieldKind,
    pub hbar: f64,
    /// Blocks in file order; values inside a block are row-major with `x` fastest.
    pub blocks: Vec<PolygonBlock>,
    pub count: usize,
}

/// Complex samples on a set of polygon blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub header: FieldHeader,
    pub values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(
        kind: FieldKind,
        hbar: f64,
        blocks: Vec<PolygonBlock>,
        values: Vec<Complex64>,
    ) -> Result<Self, SurfaceQuasimodeError> {
        let count: usize = blocks.iter().map(PolygonBlock::len).sum();
        if count != values.len() {
            return Err(SurfaceQuasimodeError::Invalid(format!("{} values for {} samples", values.len(), count)));
        }
        Ok(Self { header: FieldHeader { format: FIELD_FORMAT.into(), kind, hbar, blocks, count }, values })
    }

    /// Values of block `k`.
    pub fn block(&self, k: usize) -> &[Complex64] {
        let start: usize = self.header.blocks[..k].iter().map(PolygonBlock::len).sum();
        &self.values[start..start + self.header.blocks[k].len()]
    }

    pub fn sidecar_path(bin: &Path) -> PathBuf {
        bin.with_extension("json")
    }

    /// Writes `bin` and its `.json` sidecar.
    pub fn write(&self, bin: &Path) -> Result<(), SurfaceQuasimodeError> {
        let mut w = BufWriter::new(fs::File::create(bin)?);
        for z in &self.values {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        w.flush()?;
        let header =
            serde_json::to_string_pretty(&self.header).map_err(|e| SurfaceQuasimodeError::Io(e.to_string()))?;
        fs::write(Self::sidecar_path(bin), header + "\n")?;
        Ok(())
    }

    pub fn read(bin: &Path) -> Result<Self, SurfaceQuasimodeError> {
        let text = fs::read_to_string(Self::sidecar_path(bin))?;
        let header: FieldHeader = serde_json::from_str(&text).map_err(|e| SurfaceQuasimodeError::Io(e.to_string()))?;
        if header.format != FIELD_FORMAT {
            return Err(SurfaceQuasimodeError::Io(format!("unknown field format {}", header.format)));
        }
        let bytes = fs::read(bin)?;
        if bytes.len() != 16 * header.count {
            return Err(SurfaceQuasimodeError::Io(format!("{} bytes for {} samples", bytes.len(), header.count)));
        }
        let f = |k: usize| f64::from_le_bytes(bytes[k..k + 8].try_into().expect("8-byte slice"));
        let values = (0..header.count).map(|n| Complex64::new(f(16 * n), f(16 * n + 8))).collect();
        Ok(Self { header, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let blocks = vec![
            PolygonBlock { polygon: 0, origin: [0.0, 0.0], nx: 3, ny: 2, hx: 0.5, hy: 0.5 },
            PolygonBlock { polygon: 1, origin: [1.0, 0.0], nx: 1, ny: 1, hx: 0.25, hy: 0.5 },
        ];
        let values: Vec<Complex64> = (0..7).map(|k| Complex64::new(k as f64 / 3.0, -(k as f64).sqrt())).collect();
        let f = SampledField::new(FieldKind::Value, 0.01, blocks, values).unwrap();
        let path = dir.path().join("field.bin");
        f.write(&path).unwrap();
        assert!(path.with_extension("json").exists());
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 7 * 16);
        let g = SampledField::read(&path).unwrap();
        assert_eq!(f, g);
        assert_eq!(g.block(1), &f.values[6..7]);
        assert_eq!(g.header.blocks[0].point(2, 1), Vec2::new(1.25, 0.75));
    }

    #[test]
    fn count_mismatch() {
        let blocks = vec![PolygonBlock { polygon: 0, origin: [0.0, 0.0], nx: 2, ny: 2, hx: 1.0, hy: 1.0 }];
        assert!(SampledField::new(FieldKind::Defect, 0.1, blocks, vec![Complex64::new(0.0, 0.0); 3]).is_err());
    }
}
