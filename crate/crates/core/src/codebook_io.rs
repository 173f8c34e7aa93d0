//! Codebook persistence and convolutional kernel export.
//!
//! Codebook file layout (all integers little-endian):
//!
//! ```text
//! "GPKCBK01"              8-byte magic, last two bytes are the format version
//! u32                     manifest length in bytes
//! manifest                UTF-8 TOML
//! f64 × N·m·k             bases, subspace-major, column-major within a basis
//! ```
//!
//! Kernel tensors are laid out out-channel × in-channel × height × width.
//! Output channel `i`, input channel `j` is column `j` of basis `i`, reshaped
//! row-major into `height × width`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{self, Metric, Subspace, ORTHONORMALITY_TOL};
use crate::packing::{Codebook, PackingProblem};

pub const MAGIC: &[u8; 8] = b"GPKCBK01";
const MAGIC_PREFIX: &[u8; 6] = b"GPKCBK";
pub const FORMAT_VERSION: u32 = 1;

/// Orthonormality deviation beyond which a stored basis is rejected.
pub const CORRUPT_BASIS_TOL: f64 = 1e-8;

/// Tolerance between the stored and the recomputed minimum distance.
pub const MIN_DISTANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    m: usize,
    k: usize,
    n: usize,
    metric: Metric,
    // TOML integers are signed 64-bit
    seed: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rankin_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    generalized_rankin_bound: Option<f64>,
    restarts: usize,
    max_iters: usize,
    tolerance: f64,
    iterations_used: usize,
    converged: bool,
}

impl Manifest {
    fn from_codebook(c: &Codebook) -> Self {
        let p = c.problem();
        Self {
            format_version: FORMAT_VERSION,
            m: p.m,
            k: p.k,
            n: p.n,
            metric: p.metric,
            seed: p.seed.to_string(),
            min_distance: c.min_distance(),
            rankin_bound: c.rankin_bound(),
            generalized_rankin_bound: c.generalized_rankin_bound(),
            restarts: p.restarts,
            max_iters: p.max_iters,
            tolerance: p.tolerance,
            iterations_used: c.iterations_used(),
            converged: c.converged(),
        }
    }
}

/// Serializes a codebook into the binary file layout.
pub fn encode_codebook(c: &Codebook) -> Vec<u8> {
    let manifest = toml::to_string(&Manifest::from_codebook(c)).expect("manifest is plain data");
    let p = c.problem();
    let mut out = Vec::with_capacity(12 + manifest.len() + 8 * p.n * p.m * p.k);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
    out.extend_from_slice(manifest.as_bytes());
    for s in c.subspaces() {
        for v in s.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn write_codebook<W: Write>(c: &Codebook, mut writer: W) -> Result<()> {
    writer.write_all(&encode_codebook(c))?;
    writer.flush()?;
    Ok(())
}

pub fn save_codebook(c: &Codebook, path: impl AsRef<Path>) -> Result<()> {
    write_codebook(c, BufWriter::new(File::create(path)?))
}

pub fn read_codebook<R: Read>(mut reader: R) -> Result<Codebook> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    decode_codebook(&bytes)
}

pub fn load_codebook(path: impl AsRef<Path>) -> Result<Codebook> {
    read_codebook(File::open(path)?)
}

/// True if `bytes` start with the codebook magic (any version).
pub fn is_codebook(bytes: &[u8]) -> bool {
    bytes.len() >= MAGIC_PREFIX.len() && &bytes[..MAGIC_PREFIX.len()] == MAGIC_PREFIX
}

/// Parses the binary file layout, re-checking orthonormality and δ(W).
pub fn decode_codebook(bytes: &[u8]) -> Result<Codebook> {
    let malformed = |msg: String| Error::MalformedFile(msg);
    if bytes.len() < MAGIC.len() + 4 {
        return Err(malformed(format!("file too short ({} bytes)", bytes.len())));
    }
    if !is_codebook(bytes) {
        return Err(malformed("bad magic".into()));
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        let version = String::from_utf8_lossy(&bytes[MAGIC_PREFIX.len()..MAGIC.len()]);
        return Err(malformed(format!("unsupported format version '{version}'")));
    }
    let len_bytes: [u8; 4] = bytes[8..12].try_into().expect("four bytes");
    let manifest_len = u32::from_le_bytes(len_bytes) as usize;
    let payload_start = 12usize
        .checked_add(manifest_len)
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| malformed("manifest length exceeds file size".into()))?;
    let text = std::str::from_utf8(&bytes[12..payload_start])
        .map_err(|e| malformed(format!("manifest is not UTF-8: {e}")))?;
    let manifest: Manifest =
        toml::from_str(text).map_err(|e| malformed(format!("manifest: {e}")))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(malformed(format!(
            "unsupported manifest version {}",
            manifest.format_version
        )));
    }
    let seed: u64 = manifest
        .seed
        .parse()
        .map_err(|e| malformed(format!("seed: {e}")))?;

    let (m, k, n) = (manifest.m, manifest.k, manifest.n);
    let values = n
        .checked_mul(m)
        .and_then(|x| x.checked_mul(k))
        .ok_or_else(|| malformed("dimensions overflow".into()))?;
    let payload = &bytes[payload_start..];
    if payload.len() != values * 8 {
        return Err(malformed(format!(
            "payload has {} bytes, expected {} for N={n}, m={m}, k={k}",
            payload.len(),
            values * 8
        )));
    }

    let problem = PackingProblem {
        m,
        k,
        n,
        metric: manifest.metric,
        restarts: manifest.restarts,
        max_iters: manifest.max_iters,
        tolerance: manifest.tolerance,
        seed,
    };
    problem
        .validate()
        .map_err(|e| malformed(format!("manifest describes an invalid problem: {e}")))?;

    let mut subspaces = Vec::with_capacity(n);
    for (index, chunk) in payload.chunks_exact(8 * m * k).enumerate() {
        let entries: Vec<f64> = chunk
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("eight bytes")))
            .collect();
        let basis = DMatrix::from_column_slice(m, k, &entries);
        let deviation = grassmann::orthonormality_deviation(&basis);
        if !(deviation <= CORRUPT_BASIS_TOL) {
            return Err(Error::CorruptBasis { index, deviation });
        }
        let subspace = if deviation <= ORTHONORMALITY_TOL {
            Subspace::from_orthonormal(basis)?
        } else {
            Subspace::orthonormalize(&basis)?
        };
        subspaces.push(subspace);
    }

    let codebook = Codebook::from_parts(
        problem,
        subspaces,
        manifest.iterations_used,
        manifest.converged,
    )?;
    match (manifest.min_distance, codebook.min_distance()) {
        (None, None) => {}
        (Some(stored), Some(actual)) if (stored - actual).abs() <= MIN_DISTANCE_TOL => {}
        (stored, actual) => {
            return Err(malformed(format!(
                "manifest min_distance {stored:?} does not match recomputed {actual:?}"
            )))
        }
    }
    Ok(codebook)
}

/// Magnitude handling for exported kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleMode {
    /// Basis entries as they are.
    Raw,
    /// Basis entries times `√(2/d_in)`, `d_in = in_channels·height·width`.
    Kaiming,
}

impl std::str::FromStr for ScaleMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(ScaleMode::Raw),
            "kaiming" => Ok(ScaleMode::Kaiming),
            other => Err(format!("unknown scale mode '{other}' (expected raw or kaiming)")),
        }
    }
}

impl std::fmt::Display for ScaleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScaleMode::Raw => "raw",
            ScaleMode::Kaiming => "kaiming",
        })
    }
}

/// `√(2/d_in)` for a conv layer with the given fan-in geometry.
pub fn kaiming_factor(in_channels: usize, height: usize, width: usize) -> f64 {
    (2.0 / (in_channels * height * width) as f64).sqrt()
}

/// Target geometry of a kernel export.
#[derive(Debug, Clone, PartialEq)]
pub struct ExportConfig {
    pub height: usize,
    pub width: usize,
    pub scale_mode: ScaleMode,
    /// Required output channel count; defaults to the codebook size.
    pub out_channels: Option<usize>,
    /// Required input channel count; defaults to the subspace dimension.
    pub in_channels: Option<usize>,
}

impl ExportConfig {
    pub fn new(height: usize, width: usize, scale_mode: ScaleMode) -> Self {
        Self {
            height,
            width,
            scale_mode,
            out_channels: None,
            in_channels: None,
        }
    }

    pub fn with_channels(mut self, out_channels: usize, in_channels: usize) -> Self {
        self.out_channels = Some(out_channels);
        self.in_channels = Some(in_channels);
        self
    }
}

/// Dense 4-D convolution weight block in out × in × height × width order.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTensor {
    out_channels: usize,
    in_channels: usize,
    height: usize,
    width: usize,
    values: Vec<f64>,
    /// `None` when the tensor did not come from [`export_kernels`].
    scale_mode: Option<ScaleMode>,
}

impl KernelTensor {
    pub fn new(
        out_channels: usize,
        in_channels: usize,
        height: usize,
        width: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        let expected = out_channels * in_channels * height * width;
        if values.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {out_channels}×{in_channels}×{height}×{width} tensor",
                values.len()
            )));
        }
        Ok(Self {
            out_channels,
            in_channels,
            height,
            width,
            values,
            scale_mode: None,
        })
    }

    pub fn shape(&self) -> [usize; 4] {
        [self.out_channels, self.in_channels, self.height, self.width]
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn scale_mode(&self) -> Option<ScaleMode> {
        self.scale_mode
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of values per output channel, `in·height·width`.
    pub fn kernel_len(&self) -> usize {
        self.in_channels * self.height * self.width
    }

    /// All values of output channel `index`.
    pub fn kernel(&self, index: usize) -> &[f64] {
        let len = self.kernel_len();
        &self.values[index * len..(index + 1) * len]
    }

    pub fn kernels(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.out_channels).map(move |i| self.kernel(i))
    }

    pub fn get(&self, out: usize, input: usize, row: usize, col: usize) -> f64 {
        self.values[((out * self.in_channels + input) * self.height + row) * self.width + col]
    }

    /// Four u32 dims followed by the f64 values, all little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * self.values.len());
        for dim in self.shape() {
            out.extend_from_slice(&(dim as u32).to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 {
            return Err(Error::MalformedFile(format!(
                "kernel file too short ({} bytes)",
                bytes.len()
            )));
        }
        let mut dims = [0usize; 4];
        for (d, chunk) in dims.iter_mut().zip(bytes[..16].chunks_exact(4)) {
            *d = u32::from_le_bytes(chunk.try_into().expect("four bytes")) as usize;
        }
        let count = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        let body = &bytes[16..];
        if count.and_then(|c| c.checked_mul(8)) != Some(body.len()) {
            return Err(Error::MalformedFile(format!(
                "kernel payload has {} bytes, dims {:?}",
                body.len(),
                dims
            )));
        }
        let values = body
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("eight bytes")))
            .collect();
        Self::new(dims[0], dims[1], dims[2], dims[3], values)
    }

    /// One row per value: `out_channel,in_channel,row,col,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("out_channel,in_channel,row,col,value\n");
        for o in 0..self.out_channels {
            for i in 0..self.in_channels {
                for r in 0..self.height {
                    for c in 0..self.width {
                        out.push_str(&format!("{o},{i},{r},{c},{}\n", self.get(o, i, r, c)));
                    }
                }
            }
        }
        out
    }
}

/// Reshapes a codebook into a conv weight tensor.
pub fn export_kernels(c: &Codebook, cfg: &ExportConfig) -> Result<KernelTensor> {
    let p = c.problem();
    let (m, k, n) = (p.m, p.k, c.len());
    if cfg.height * cfg.width != m {
        return Err(Error::ShapeMismatch(format!(
            "kernel {}×{} holds {} values, subspaces live in R^{m}",
            cfg.height,
            cfg.width,
            cfg.height * cfg.width
        )));
    }
    if let Some(out) = cfg.out_channels.filter(|&o| o != n) {
        return Err(Error::ShapeMismatch(format!(
            "{out} output channels requested, codebook has {n} subspaces"
        )));
    }
    if let Some(inp) = cfg.in_channels.filter(|&i| i != k) {
        return Err(Error::ShapeMismatch(format!(
            "{inp} input channels requested, subspaces have dimension {k}"
        )));
    }
    let scale = match cfg.scale_mode {
        ScaleMode::Raw => 1.0,
        ScaleMode::Kaiming => kaiming_factor(k, cfg.height, cfg.width),
    };
    let mut values = Vec::with_capacity(n * k * m);
    for s in c.subspaces() {
        // column j is contiguous in the column-major basis and already in
        // row-major spatial order
        values.extend(s.as_slice().iter().map(|v| v * scale));
    }
    let mut tensor = KernelTensor::new(n, k, cfg.height, cfg.width, values)?;
    tensor.scale_mode = Some(cfg.scale_mode);
    Ok(tensor)
}

/// Inverse of [`export_kernels`]: recovers one orthonormal basis per output
/// channel, undoing the Kaiming factor when the tensor is known to carry it.
pub fn import_kernels(t: &KernelTensor) -> Result<Vec<Subspace>> {
    let m = t.height * t.width;
    let k = t.in_channels;
    let scale = match t.scale_mode {
        Some(ScaleMode::Kaiming) => kaiming_factor(k, t.height, t.width),
        _ => 1.0,
    };
    t.kernels()
        .enumerate()
        .map(|(index, kernel)| {
            let entries: Vec<f64> = kernel.iter().map(|v| v / scale).collect();
            let basis = DMatrix::from_column_slice(m, k, &entries);
            Subspace::from_orthonormal(basis).map_err(|e| match e {
                Error::NotOrthonormal { deviation } => Error::CorruptBasis { index, deviation },
                other => other,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::{optimize, random_codebook};

    fn sample(m: usize, k: usize, n: usize, metric: Metric) -> Codebook {
        let p = PackingProblem::new(m, k, n, metric).unwrap().with_seed(11);
        random_codebook(&p).unwrap()
    }

    #[test]
    fn header_layout_is_fixed() {
        let c = sample(4, 2, 3, Metric::Chordal);
        let bytes = encode_codebook(&c);
        assert_eq!(&bytes[..8], b"GPKCBK01");
        let len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let manifest = std::str::from_utf8(&bytes[12..12 + len]).unwrap();
        assert!(manifest.contains("metric = \"chordal\""));
        assert!(manifest.contains("seed = \"11\""));
        assert_eq!(bytes.len(), 12 + len + 3 * 4 * 2 * 8);
        // first payload value is entry (0, 0) of the first basis
        let first = f64::from_le_bytes(bytes[12 + len..20 + len].try_into().unwrap());
        assert_eq!(first, c.subspaces()[0].basis()[(0, 0)]);
        let second = f64::from_le_bytes(bytes[20 + len..28 + len].try_into().unwrap());
        assert_eq!(second, c.subspaces()[0].basis()[(1, 0)]);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for metric in Metric::ALL {
            let c = sample(5, 2, 4, metric);
            let back = decode_codebook(&encode_codebook(&c)).unwrap();
            assert_eq!(back, c);
        }
        let single = optimize(&PackingProblem::new(3, 1, 1, Metric::Chordal).unwrap()).unwrap();
        assert_eq!(decode_codebook(&encode_codebook(&single)).unwrap(), single);
    }

    #[test]
    fn large_seed_survives() {
        let p = PackingProblem::new(3, 1, 2, Metric::Chordal)
            .unwrap()
            .with_seed(u64::MAX);
        let c = random_codebook(&p).unwrap();
        assert_eq!(decode_codebook(&encode_codebook(&c)).unwrap().problem().seed, u64::MAX);
    }

    #[test]
    fn corrupted_files_are_rejected() {
        let c = sample(4, 2, 3, Metric::FubiniStudy);
        let bytes = encode_codebook(&c);

        let truncated = &bytes[..bytes.len() - 5];
        assert!(matches!(decode_codebook(truncated), Err(Error::MalformedFile(_))));

        let mut extended = bytes.clone();
        extended.extend_from_slice(&[0; 8]);
        assert!(matches!(decode_codebook(&extended), Err(Error::MalformedFile(_))));

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(decode_codebook(&bad_magic), Err(Error::MalformedFile(_))));

        let mut bad_version = bytes.clone();
        bad_version[7] = b'9';
        assert!(matches!(decode_codebook(&bad_version), Err(Error::MalformedFile(_))));

        let mut huge_manifest = bytes.clone();
        huge_manifest[8..12].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(matches!(decode_codebook(&huge_manifest), Err(Error::MalformedFile(_))));

        assert!(matches!(decode_codebook(b"GPK"), Err(Error::MalformedFile(_))));
    }

    #[test]
    fn non_orthonormal_payload_is_corrupt() {
        let c = sample(4, 2, 3, Metric::Chordal);
        let mut bytes = encode_codebook(&c);
        let len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        // second basis, first entry
        let at = 12 + len + 8 * 8;
        let v = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()) + 0.1;
        bytes[at..at + 8].copy_from_slice(&v.to_le_bytes());
        assert!(matches!(
            decode_codebook(&bytes),
            Err(Error::CorruptBasis { index: 1, .. })
        ));
    }

    #[test]
    fn tampered_min_distance_is_rejected() {
        let c = sample(4, 1, 3, Metric::Chordal);
        let bytes = encode_codebook(&c);
        let len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let text = std::str::from_utf8(&bytes[12..12 + len]).unwrap();
        let stored = c.min_distance().unwrap();
        let edited = text.replace(
            &format!("min_distance = {stored:?}"),
            &format!("min_distance = {:?}", stored + 1e-3),
        );
        assert_ne!(edited, text);
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(edited.len() as u32).to_le_bytes());
        out.extend_from_slice(edited.as_bytes());
        out.extend_from_slice(&bytes[12 + len..]);
        assert!(matches!(decode_codebook(&out), Err(Error::MalformedFile(_))));
    }

    #[test]
    fn export_mapping_follows_basis_columns() {
        let c = sample(6, 2, 3, Metric::Chordal);
        let t = export_kernels(&c, &ExportConfig::new(2, 3, ScaleMode::Raw)).unwrap();
        assert_eq!(t.shape(), [3, 2, 2, 3]);
        for (o, s) in c.subspaces().iter().enumerate() {
            for j in 0..2 {
                for r in 0..2 {
                    for col in 0..3 {
                        assert_eq!(t.get(o, j, r, col), s.basis()[(r * 3 + col, j)]);
                    }
                }
            }
        }
        assert_eq!(import_kernels(&t).unwrap(), c.subspaces());
    }

    #[test]
    fn kaiming_export_scales_and_imports_back() {
        let c = sample(9, 3, 4, Metric::FubiniStudy);
        let raw = export_kernels(&c, &ExportConfig::new(3, 3, ScaleMode::Raw)).unwrap();
        let scaled = export_kernels(&c, &ExportConfig::new(3, 3, ScaleMode::Kaiming)).unwrap();
        let factor = (2.0f64 / 27.0).sqrt();
        assert_eq!(kaiming_factor(3, 3, 3), factor);
        for (r, s) in raw.values().iter().zip(scaled.values()) {
            assert_eq!(*s, r * factor);
        }
        let back = import_kernels(&scaled).unwrap();
        for (a, b) in back.iter().zip(c.subspaces()) {
            assert!((a.basis() - b.basis()).amax() < 1e-15);
        }
    }

    #[test]
    fn export_shape_errors() {
        let c = sample(2, 1, 3, Metric::Chordal);
        assert!(export_kernels(&c, &ExportConfig::new(1, 2, ScaleMode::Raw)).is_ok());
        assert!(matches!(
            export_kernels(&c, &ExportConfig::new(1, 3, ScaleMode::Raw)),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            export_kernels(&c, &ExportConfig::new(2, 1, ScaleMode::Raw).with_channels(4, 1)),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            export_kernels(&c, &ExportConfig::new(2, 1, ScaleMode::Raw).with_channels(3, 2)),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn kernel_binary_and_csv() {
        let c = sample(4, 2, 3, Metric::Chordal);
        let t = export_kernels(&c, &ExportConfig::new(2, 2, ScaleMode::Kaiming)).unwrap();
        let bytes = t.to_bytes();
        assert_eq!(&bytes[..4], &3u32.to_le_bytes());
        assert_eq!(&bytes[4..8], &2u32.to_le_bytes());
        assert_eq!(bytes.len(), 16 + 8 * 24);
        let back = KernelTensor::from_bytes(&bytes).unwrap();
        assert_eq!(back.values(), t.values());
        assert_eq!(back.scale_mode(), None);
        assert!(KernelTensor::from_bytes(&bytes[..bytes.len() - 1]).is_err());

        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("out_channel,in_channel,row,col,value"));
        let row: Vec<&str> = lines.nth(5).unwrap().split(',').collect();
        // sixth value: out 0, in 1, row 0, col 1
        assert_eq!(&row[..4], &["0", "1", "0", "1"]);
        assert_eq!(row[4].parse::<f64>().unwrap(), t.get(0, 1, 0, 1));
        assert_eq!(csv.lines().count(), 25);
    }
}
