//! On-disk formats.
//!
//! A pattern container is a directory with `manifest.json` and `data.bin`.
//! The binary holds every (element, polarization, frequency) pattern in that
//! nesting order, each as `(M+1) × 2N` row-major complex samples written as
//! little-endian `f64` pairs `re, im`. Models use the same scheme with
//! `model.json` and `model.bin`. Every file is written to a temporary name and
//! renamed into place.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eadf::{ArrayModel, Eadf, ElementModel, Mode, SpectralWindow};
use crate::error::{Error, Result};
use crate::geometry::{AngularGrid, Vec3};
use crate::metrics::{Cdf, RemReport};
use crate::pattern::{PatternSet, Polarization, RadiationPattern};
use crate::phase_center::DelayMap;

pub const PATTERN_FORMAT: &str = "eadf-patterns";
pub const MODEL_FORMAT: &str = "eadf-model";
pub const FORMAT_VERSION: u32 = 1;
pub const PATTERN_LAYOUT: &str =
    "element-major, then polarization, then frequency, then zenith row-major, then azimuth";
pub const ENDIANNESS: &str = "little";
pub const SCALAR: &str = "float64 interleaved re,im";

const MANIFEST: &str = "manifest.json";
const DATA: &str = "data.bin";
const MODEL_MANIFEST: &str = "model.json";
const MODEL_DATA: &str = "model.bin";

fn format_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = temp_path(path);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| format_error(path, e.to_string()))
}

fn write_samples<'a>(out: &mut impl Write, values: impl IntoIterator<Item = &'a Complex64>) -> Result<()> {
    for v in values {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_samples(input: &mut impl Read, count: usize) -> Result<Vec<Complex64>> {
    let mut buf = vec![0u8; count * 16];
    input.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternManifest {
    pub format: String,
    pub version: u32,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub frequencies_hz: Vec<f64>,
    #[serde(rename = "elements")]
    pub element_ids: Vec<u32>,
    pub polarizations: Vec<Polarization>,
    pub data_file: String,
    pub layout: String,
    pub endianness: String,
    pub scalar: String,
}

impl PatternManifest {
    pub fn new(
        grid: AngularGrid,
        frequencies_hz: Vec<f64>,
        element_ids: Vec<u32>,
        polarizations: Vec<Polarization>,
    ) -> Self {
        PatternManifest {
            format: PATTERN_FORMAT.to_string(),
            version: FORMAT_VERSION,
            m: grid.m(),
            n: grid.n(),
            frequencies_hz,
            element_ids,
            polarizations,
            data_file: DATA.to_string(),
            layout: PATTERN_LAYOUT.to_string(),
            endianness: ENDIANNESS.to_string(),
            scalar: SCALAR.to_string(),
        }
    }

    pub fn grid(&self) -> Result<AngularGrid> {
        AngularGrid::new(self.m, self.n)
    }

    fn samples_per_pattern(&self) -> usize {
        (self.m + 1) * 2 * self.n
    }

    pub fn pattern_count(&self) -> usize {
        self.element_ids.len() * self.polarizations.len() * self.frequencies_hz.len()
    }

    fn slot(&self, element_id: u32, polarization: Polarization, freq_index: usize) -> Option<usize> {
        let e = self.element_ids.iter().position(|&id| id == element_id)?;
        let p = self.polarizations.iter().position(|&q| q == polarization)?;
        (freq_index < self.frequencies_hz.len())
            .then(|| (e * self.polarizations.len() + p) * self.frequencies_hz.len() + freq_index)
    }
}

/// Streams patterns into a container in storage order.
pub struct ContainerWriter {
    dir: PathBuf,
    manifest: PatternManifest,
    out: BufWriter<File>,
    written: usize,
}

impl ContainerWriter {
    pub fn create(dir: &Path, manifest: PatternManifest) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let out = BufWriter::new(File::create(temp_path(&dir.join(DATA)))?);
        Ok(ContainerWriter {
            dir: dir.to_path_buf(),
            manifest,
            out,
            written: 0,
        })
    }

    /// Appends the next pattern; it must match the expected slot.
    pub fn write(&mut self, pattern: &RadiationPattern) -> Result<()> {
        let m = &self.manifest;
        let s = m.frequencies_hz.len();
        let slot = self.written;
        if slot >= m.pattern_count() {
            return Err(Error::InvalidInput("container already holds every pattern".to_string()));
        }
        let npol = m.polarizations.len();
        let (e, p, f) = (slot / (npol * s), (slot / s) % npol, slot % s);
        let expect = (m.element_ids[e], m.polarizations[p], m.frequencies_hz[f]);
        if pattern.grid.m() != m.m
            || pattern.grid.n() != m.n
            || pattern.element_id != expect.0
            || pattern.polarization != expect.1
            || (pattern.frequency_hz - expect.2).abs() > 1.0
        {
            return Err(Error::InvalidInput(format!(
                "expected element {} {} at {} Hz on M={}, N={}; got element {} {} at {} Hz on M={}, N={}",
                expect.0,
                expect.1,
                expect.2,
                m.m,
                m.n,
                pattern.element_id,
                pattern.polarization,
                pattern.frequency_hz,
                pattern.grid.m(),
                pattern.grid.n()
            )));
        }
        write_samples(&mut self.out, pattern.data.iter())?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        if self.written != self.manifest.pattern_count() {
            return Err(Error::Missing(format!(
                "container has {} of {} patterns",
                self.written,
                self.manifest.pattern_count()
            )));
        }
        self.out.flush()?;
        self.out.get_ref().sync_all()?;
        let data = self.dir.join(DATA);
        fs::rename(temp_path(&data), &data)?;
        write_json(&self.dir.join(MANIFEST), &self.manifest)
    }
}

/// Writes a complete pattern set; every element needs every polarization at
/// every frequency.
pub fn write_pattern_set(dir: &Path, set: &PatternSet) -> Result<()> {
    let manifest = PatternManifest::new(
        set.grid,
        set.frequencies_hz.clone(),
        set.element_ids(),
        set.polarizations(),
    );
    let mut writer = ContainerWriter::create(dir, manifest.clone())?;
    for &id in &manifest.element_ids {
        for &pol in &manifest.polarizations {
            for p in set.sweep(id, pol)? {
                writer.write(p)?;
            }
        }
    }
    writer.finish()
}

/// Random access to a pattern container.
pub struct ContainerReader {
    dir: PathBuf,
    manifest: PatternManifest,
    grid: AngularGrid,
    data: BufReader<File>,
}

impl ContainerReader {
    pub fn open(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join(MANIFEST);
        if !manifest_path.is_file() {
            return Err(format_error(&manifest_path, "manifest not found"));
        }
        let manifest: PatternManifest = read_json(&manifest_path)?;
        if manifest.format != PATTERN_FORMAT {
            return Err(format_error(&manifest_path, format!("not a pattern container: {}", manifest.format)));
        }
        if manifest.version != FORMAT_VERSION {
            return Err(format_error(&manifest_path, format!("unsupported version {}", manifest.version)));
        }
        let grid = manifest
            .grid()
            .map_err(|e| format_error(&manifest_path, e.to_string()))?;
        let data_path = dir.join(&manifest.data_file);
        let file = File::open(&data_path)?;
        let expected = (manifest.pattern_count() * manifest.samples_per_pattern() * 16) as u64;
        let actual = file.metadata()?.len();
        if actual != expected {
            return Err(format_error(
                &data_path,
                format!("expected {expected} bytes, found {actual}"),
            ));
        }
        Ok(ContainerReader {
            dir: dir.to_path_buf(),
            manifest,
            grid,
            data: BufReader::new(file),
        })
    }

    pub fn manifest(&self) -> &PatternManifest {
        &self.manifest
    }

    pub fn grid(&self) -> AngularGrid {
        self.grid
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn read_pattern(&mut self, element_id: u32, polarization: Polarization, freq_index: usize) -> Result<RadiationPattern> {
        let slot = self.manifest.slot(element_id, polarization, freq_index).ok_or_else(|| {
            Error::Missing(format!(
                "element {element_id} {polarization} frequency index {freq_index}"
            ))
        })?;
        let n = self.manifest.samples_per_pattern();
        self.data.seek(SeekFrom::Start((slot * n * 16) as u64))?;
        let samples = read_samples(&mut self.data, n)?;
        let grid = self.grid;
        let data = Array2::from_shape_vec(grid.shape(), samples)
            .map_err(|e| format_error(&self.dir, e.to_string()))?;
        RadiationPattern::new(
            grid,
            self.manifest.frequencies_hz[freq_index],
            polarization,
            element_id,
            data,
        )
    }

    pub fn read_sweep(&mut self, element_id: u32, polarization: Polarization) -> Result<Vec<RadiationPattern>> {
        (0..self.manifest.frequencies_hz.len())
            .map(|s| self.read_pattern(element_id, polarization, s))
            .collect()
    }

    /// Every element and polarization at one frequency.
    pub fn read_frequency(&mut self, freq_index: usize) -> Result<PatternSet> {
        let mut patterns = Vec::new();
        for id in self.manifest.element_ids.clone() {
            for pol in self.manifest.polarizations.clone() {
                patterns.push(self.read_pattern(id, pol, freq_index)?);
            }
        }
        let f = self.manifest.frequencies_hz[freq_index];
        Ok(PatternSet::new(self.grid, vec![f], patterns))
    }

    pub fn read_all(&mut self) -> Result<PatternSet> {
        let mut patterns = Vec::with_capacity(self.manifest.pattern_count());
        for id in self.manifest.element_ids.clone() {
            for pol in self.manifest.polarizations.clone() {
                patterns.extend(self.read_sweep(id, pol)?);
            }
        }
        Ok(PatternSet::new(
            self.grid,
            self.manifest.frequencies_hz.clone(),
            patterns,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub format: String,
    pub version: u32,
    pub frequency_hz: f64,
    pub wavelength_m: f64,
    pub mode: Mode,
    pub grid: AngularGrid,
    pub elements: Vec<ModelElementEntry>,
    pub data_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelElementEntry {
    pub element_id: u32,
    /// Meters; zero for conventional models.
    pub phase_center: Vec3,
    pub h: Option<BlockEntry>,
    pub v: Option<BlockEntry>,
}

/// One EADF block in `model.bin`, row-major over its window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub window: SpectralWindow,
    /// Sample offset (not bytes) of the first coefficient.
    pub offset: usize,
}

pub fn write_model(dir: &Path, model: &ArrayModel) -> Result<()> {
    let grid = model
        .grid()
        .ok_or_else(|| Error::InvalidInput("model has no elements".to_string()))?;
    fs::create_dir_all(dir)?;
    let data_path = dir.join(MODEL_DATA);
    let mut out = BufWriter::new(File::create(temp_path(&data_path))?);
    let mut offset = 0;
    let mut entries = Vec::new();
    let mut block = |q: &Option<Eadf>, out: &mut BufWriter<File>| -> Result<Option<BlockEntry>> {
        let Some(q) = q else { return Ok(None) };
        write_samples(out, q.data.iter())?;
        let entry = BlockEntry {
            window: q.window,
            offset,
        };
        offset += q.data.len();
        Ok(Some(entry))
    };
    for e in &model.elements {
        let h = block(&e.h, &mut out)?;
        let v = block(&e.v, &mut out)?;
        entries.push(ModelElementEntry {
            element_id: e.element_id,
            phase_center: e.phase_center.unwrap_or(Vec3::ZERO),
            h,
            v,
        });
    }
    out.flush()?;
    drop(out);
    fs::rename(temp_path(&data_path), &data_path)?;
    write_json(
        &dir.join(MODEL_MANIFEST),
        &ModelManifest {
            format: MODEL_FORMAT.to_string(),
            version: FORMAT_VERSION,
            frequency_hz: model.frequency_hz,
            wavelength_m: model.wavelength(),
            mode: model.mode,
            grid,
            elements: entries,
            data_file: MODEL_DATA.to_string(),
        },
    )
}

pub fn read_model(dir: &Path) -> Result<ArrayModel> {
    let manifest_path = dir.join(MODEL_MANIFEST);
    if !manifest_path.is_file() {
        return Err(format_error(&manifest_path, "model manifest not found"));
    }
    let m: ModelManifest = read_json(&manifest_path)?;
    if m.format != MODEL_FORMAT || m.version != FORMAT_VERSION {
        return Err(format_error(
            &manifest_path,
            format!("unsupported model format {} v{}", m.format, m.version),
        ));
    }
    let data_path = dir.join(&m.data_file);
    let mut data = BufReader::new(File::open(&data_path)?);
    let mut read_block = |b: &Option<BlockEntry>| -> Result<Option<Eadf>> {
        let Some(b) = b else { return Ok(None) };
        let shape = (b.window.rows(), b.window.cols());
        data.seek(SeekFrom::Start((b.offset * 16) as u64))?;
        let samples = read_samples(&mut data, shape.0 * shape.1)
            .map_err(|e| format_error(&data_path, e.to_string()))?;
        let arr = Array2::from_shape_vec(shape, samples)
            .map_err(|e| format_error(&data_path, e.to_string()))?;
        Eadf::new(m.grid, b.window, arr).map(Some)
    };
    let mut elements = Vec::new();
    for e in &m.elements {
        elements.push(ElementModel {
            element_id: e.element_id,
            h: read_block(&e.h)?,
            v: read_block(&e.v)?,
            phase_center: match m.mode {
                Mode::Conventional => None,
                Mode::Enhanced => Some(e.phase_center),
            },
        });
    }
    ArrayModel::new(m.frequency_hz, m.mode, elements)
}

fn csv_bytes(header: &str, rows: impl IntoIterator<Item = String>) -> Vec<u8> {
    let mut text = String::from(header);
    text.push('\n');
    for r in rows {
        text.push_str(&r);
        text.push('\n');
    }
    text.into_bytes()
}

/// `theta_deg,phi_deg,delay_ns,masked`; delay is empty where unmasked.
pub fn write_delay_map_csv(path: &Path, map: &DelayMap) -> Result<()> {
    let g = map.grid;
    let rows = map.mask.indexed_iter().map(|((r, c), &m)| {
        let delay = if m {
            format!("{:.9}", map.delays[[r, c]] * 1e9)
        } else {
            String::new()
        };
        format!(
            "{},{},{},{}",
            g.zenith(r).to_degrees(),
            g.azimuth(c).to_degrees(),
            delay,
            u8::from(m)
        )
    });
    write_atomic(path, &csv_bytes("theta_deg,phi_deg,delay_ns,masked", rows))
}

/// `theta_deg,phi_deg,rem,rem_db,masked`.
pub fn write_rem_csv(path: &Path, report: &RemReport) -> Result<()> {
    let g = report.grid;
    let rows = report.mask.indexed_iter().map(|((r, c), &m)| {
        let e = report.rem[[r, c]];
        let (lin, db) = if e.is_nan() {
            (String::new(), String::new())
        } else {
            (format!("{e:.6e}"), format!("{:.4}", crate::metrics::to_db(e)))
        };
        format!(
            "{},{},{},{},{}",
            g.zenith(r).to_degrees(),
            g.azimuth(c).to_degrees(),
            lin,
            db,
            u8::from(m)
        )
    });
    write_atomic(path, &csv_bytes("theta_deg,phi_deg,rem,rem_db,masked", rows))
}

/// `rem_db,probability` at the fixed CDF edges.
pub fn write_cdf_csv(path: &Path, cdf: &Cdf) -> Result<()> {
    let rows = cdf.points().into_iter().map(|(e, p)| format!("{e},{p}"));
    write_atomic(path, &csv_bytes("rem_db,probability", rows))
}

/// `k,l,power_db` over the stored window.
pub fn write_spectrum_csv(path: &Path, q: &Eadf) -> Result<()> {
    let spectrum = crate::metrics::eadf_power_spectrum(q);
    let rows = spectrum.indexed_iter().map(|((i, j), &v)| {
        format!(
            "{},{},{:.4}",
            q.window.k_min + i as i64,
            q.window.l_min + j as i64,
            v
        )
    });
    write_atomic(path, &csv_bytes("k,l,power_db", rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfSummary {
    pub count: usize,
    pub median_db: f64,
    pub p5_db: f64,
    pub p25_db: f64,
    pub p75_db: f64,
    pub p95_db: f64,
    /// `[rem_db, probability]` pairs.
    pub cdf: Vec<(f64, f64)>,
}

impl CdfSummary {
    pub fn new(cdf: &Cdf) -> Self {
        CdfSummary {
            count: cdf.len(),
            median_db: cdf.median(),
            p5_db: cdf.percentile(5.0),
            p25_db: cdf.percentile(25.0),
            p75_db: cdf.percentile(75.0),
            p95_db: cdf.percentile(95.0),
            cdf: cdf.points(),
        }
    }
}
