//! On-disk format for volumetric data: a JSON sidecar describing the grid and
//! frequency list, next to a raw payload of little-endian `f64`. Complex
//! values are interleaved `(re, im)`; ordering is frequency-major, then voxel
//! row-major, then component.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{GruneisenField, SusceptibilityField};
use super::grid::Grid3;
use super::lattice::FrequencyLattice;
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "photoct-volume";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Real,
    Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeHeader {
    pub format: String,
    pub version: u32,
    pub quantity: String,
    pub endianness: String,
    pub scalar: ScalarKind,
    pub components: usize,
    pub grid: Grid3,
    pub frequencies: Vec<f64>,
    pub symmetric_closure: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_width: Option<usize>,
    pub payload: String,
}

impl VolumeHeader {
    pub fn new(quantity: &str, scalar: ScalarKind, components: usize, grid: Grid3) -> Self {
        Self {
            format: FORMAT_TAG.to_string(),
            version: FORMAT_VERSION,
            quantity: quantity.to_string(),
            endianness: "little".to_string(),
            scalar,
            components,
            grid,
            frequencies: Vec::new(),
            symmetric_closure: false,
            boundary_width: None,
            payload: String::new(),
        }
    }

    pub fn with_frequencies(mut self, frequencies: &[f64], symmetric_closure: bool) -> Self {
        self.frequencies = frequencies.to_vec();
        self.symmetric_closure = symmetric_closure;
        self
    }

    /// Number of `f64` values the payload must hold.
    pub fn payload_len(&self) -> usize {
        let per = match self.scalar {
            ScalarKind::Real => 1,
            ScalarKind::Complex => 2,
        };
        self.frequencies.len().max(1) * self.grid.len() * self.components * per
    }
}

pub fn sidecar_path(stem: &Path) -> PathBuf {
    stem.with_extension("json")
}

pub fn payload_path(stem: &Path) -> PathBuf {
    stem.with_extension("bin")
}

/// Writes `<stem>.json` and `<stem>.bin`; returns both paths.
pub fn write_volume(stem: &Path, mut header: VolumeHeader, data: &[f64]) -> Result<Vec<PathBuf>> {
    if data.len() != header.payload_len() {
        return Err(Error::precondition(format!(
            "payload holds {} values, header describes {}",
            data.len(),
            header.payload_len()
        )));
    }
    let bin = payload_path(stem);
    let json = sidecar_path(stem);
    header.payload = bin
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut bytes = Vec::with_capacity(8 * data.len());
    for v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&bin, bytes).map_err(|e| Error::io(&bin, e))?;
    let text =
        serde_json::to_string_pretty(&header).map_err(|e| Error::format(&json, e.to_string()))?;
    fs::write(&json, text + "\n").map_err(|e| Error::io(&json, e))?;
    Ok(vec![json, bin])
}

pub fn read_header(sidecar: &Path) -> Result<VolumeHeader> {
    let text = fs::read_to_string(sidecar).map_err(|e| Error::io(sidecar, e))?;
    let header: VolumeHeader =
        serde_json::from_str(&text).map_err(|e| Error::format(sidecar, e.to_string()))?;
    if header.format != FORMAT_TAG {
        return Err(Error::format(
            sidecar,
            format!("unknown format tag {:?}", header.format),
        ));
    }
    if header.endianness != "little" {
        return Err(Error::format(
            sidecar,
            format!("unsupported endianness {:?}", header.endianness),
        ));
    }
    Ok(header)
}

/// Reads a sidecar and its payload (resolved relative to the sidecar).
pub fn read_volume(sidecar: &Path) -> Result<(VolumeHeader, Vec<f64>)> {
    let header = read_header(sidecar)?;
    let bin = sidecar
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&header.payload);
    let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    if bytes.len() != 8 * header.payload_len() {
        return Err(Error::format(
            &bin,
            format!(
                "payload has {} bytes, expected {}",
                bytes.len(),
                8 * header.payload_len()
            ),
        ));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((header, data))
}

pub fn interleave(values: &[Complex64]) -> Vec<f64> {
    values.iter().flat_map(|v| [v.re, v.im]).collect()
}

pub fn deinterleave(data: &[f64]) -> Vec<Complex64> {
    data.chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect()
}

impl SusceptibilityField {
    pub fn save(&self, stem: &Path) -> Result<Vec<PathBuf>> {
        let mut header = VolumeHeader::new(
            "susceptibility",
            ScalarKind::Complex,
            1,
            self.grid().clone(),
        )
        .with_frequencies(self.freqs().values(), self.freqs().symmetric_closure());
        header.boundary_width = Some(self.boundary_width());
        write_volume(stem, header, &interleave(self.values()))
    }

    pub fn load(sidecar: &Path) -> Result<Self> {
        let (h, data) = read_volume(sidecar)?;
        if h.scalar != ScalarKind::Complex || h.components != 1 {
            return Err(Error::format(sidecar, "expected a complex scalar volume"));
        }
        let freqs = FrequencyLattice::new(h.frequencies.clone(), h.symmetric_closure)?;
        SusceptibilityField::from_values(
            h.grid,
            freqs,
            h.boundary_width
                .unwrap_or(super::field::DEFAULT_BOUNDARY_WIDTH),
            deinterleave(&data),
        )
    }
}

impl GruneisenField {
    pub fn save(&self, stem: &Path) -> Result<Vec<PathBuf>> {
        let header = VolumeHeader::new("gruneisen", ScalarKind::Real, 1, self.grid().clone());
        write_volume(stem, header, self.values())
    }

    pub fn load(sidecar: &Path) -> Result<Self> {
        let (h, data) = read_volume(sidecar)?;
        if h.scalar != ScalarKind::Real || h.components != 1 {
            return Err(Error::format(sidecar, "expected a real scalar volume"));
        }
        GruneisenField::from_values(h.grid, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{build_lorentzian_phantom, LorentzInclusion};

    #[test]
    fn susceptibility_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid3::centered(0.5, [6, 6, 6]).unwrap();
        let freqs = FrequencyLattice::uniform(0.5, 0.5, 3, true).unwrap();
        let m = build_lorentzian_phantom(
            grid,
            freqs,
            &[LorentzInclusion {
                center: [0.0; 3],
                radius: 0.8,
                strength: 1.0,
                resonance: 2.0,
                damping: 0.5,
            }],
        )
        .unwrap();
        let stem = dir.path().join("medium");
        let files = m.save(&stem).unwrap();
        assert_eq!(files.len(), 2);
        let back = SusceptibilityField::load(&sidecar_path(&stem)).unwrap();
        assert_eq!(back.values(), m.values());
        assert_eq!(back.freqs(), m.freqs());
        assert_eq!(back.grid(), m.grid());
    }

    #[test]
    fn payload_layout_is_little_endian_interleaved() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid3::new([0.0; 3], 1.0, [1, 1, 2]).unwrap();
        let header = VolumeHeader::new("t", ScalarKind::Complex, 1, grid);
        let stem = dir.path().join("v");
        write_volume(&stem, header, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let bytes = fs::read(payload_path(&stem)).unwrap();
        assert_eq!(&bytes[8..16], &2.0f64.to_le_bytes());
        assert_eq!(&bytes[24..32], &4.0f64.to_le_bytes());
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid3::new([0.0; 3], 1.0, [1, 1, 2]).unwrap();
        let g = GruneisenField::constant(grid, 1.0);
        let stem = dir.path().join("g");
        g.save(&stem).unwrap();
        fs::write(payload_path(&stem), [0u8; 8]).unwrap();
        assert!(GruneisenField::load(&sidecar_path(&stem)).is_err());
    }
}
