//! On-disk artifact formats: pair directories, dataset manifests,
//! checkpoints, metrics logs, metrics reports and keypoint files.
//!
//! Every format embeds a version marker. Grids are little-endian 32-bit
//! floats with a small dimension header; cameras and tracks are plain text
//! key-value / record files so they stay inspectable.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{Matrix3, Point3, Vector3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::detector::{Checkpoint, StepMetrics};
use crate::error::{Error, Result};
use crate::evalbench::MetricsReport;
use crate::geometry::{CameraView, Intrinsics};
use crate::grid::Grid;
use crate::sampler::{Keypoint, KeypointSet};
use crate::scenegen::{TrackSet, TwoViewPair};

pub const PAIR_FORMAT: &str = "keyspot-pair v1";
pub const MANIFEST_FORMAT: &str = "keyspot-manifest v1";
pub const KEYPOINT_FORMAT: &str = "keyspot-kps v1";
pub const CHECKPOINT_MAGIC: &[u8; 8] = b"KSCKPT01";

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Grids: [u32 width][u32 height][width*height f32], all little-endian.

pub fn write_grid_f32(path: &Path, grid: &Grid<f32>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(&(grid.width() as u32).to_le_bytes())?;
    w.write_all(&(grid.height() as u32).to_le_bytes())?;
    for v in grid.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_grid_f32(path: &Path) -> Result<Grid<f32>> {
    let bytes = fs::read(path)?;
    if bytes.len() < 8 {
        return Err(format_err(path, "truncated grid header"));
    }
    let width = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let expected = 8 + 4 * width * height;
    if bytes.len() != expected {
        return Err(format_err(
            path,
            format!("grid payload is {} bytes, expected {expected}", bytes.len()),
        ));
    }
    let data: Vec<f32> = bytes[8..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Grid::from_vec(width, height, data))
}

fn write_grid_bool(path: &Path, grid: &Grid<bool>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(&(grid.width() as u32).to_le_bytes())?;
    w.write_all(&(grid.height() as u32).to_le_bytes())?;
    let bytes: Vec<u8> = grid.data().iter().map(|&b| b as u8).collect();
    w.write_all(&bytes)?;
    Ok(())
}

fn read_grid_bool(path: &Path) -> Result<Grid<bool>> {
    let bytes = fs::read(path)?;
    if bytes.len() < 8 {
        return Err(format_err(path, "truncated grid header"));
    }
    let width = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if bytes.len() != 8 + width * height {
        return Err(format_err(path, "bool grid payload size mismatch"));
    }
    let data: Vec<bool> = bytes[8..].iter().map(|&b| b != 0).collect();
    Ok(Grid::from_vec(width, height, data))
}

// ---------------------------------------------------------------------------
// Pair directories.

fn write_camera(out: &mut impl Write, prefix: &str, view: &CameraView) -> Result<()> {
    let k = &view.intrinsics;
    writeln!(out, "{prefix}.fx {:.17e}", k.fx)?;
    writeln!(out, "{prefix}.fy {:.17e}", k.fy)?;
    writeln!(out, "{prefix}.cx {:.17e}", k.cx)?;
    writeln!(out, "{prefix}.cy {:.17e}", k.cy)?;
    let r = &view.rotation;
    for row in 0..3 {
        for col in 0..3 {
            writeln!(out, "{prefix}.r{row}{col} {:.17e}", r[(row, col)])?;
        }
    }
    for (i, axis) in ["x", "y", "z"].iter().enumerate() {
        writeln!(out, "{prefix}.t{axis} {:.17e}", view.translation[i])?;
    }
    Ok(())
}

fn parse_kv(path: &Path, text: &str) -> Result<std::collections::HashMap<String, String>> {
    let mut map = std::collections::HashMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once(' ')
            .ok_or_else(|| format_err(path, format!("bad key-value line: {line}")))?;
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn kv_f64(
    map: &std::collections::HashMap<String, String>,
    path: &Path,
    key: &str,
) -> Result<f64> {
    map.get(key)
        .ok_or_else(|| format_err(path, format!("missing key {key}")))?
        .parse()
        .map_err(|_| format_err(path, format!("non-numeric value for {key}")))
}

fn read_camera(
    map: &std::collections::HashMap<String, String>,
    path: &Path,
    prefix: &str,
    image: Grid<f32>,
    depth: Grid<f64>,
    depth_valid: Grid<bool>,
) -> Result<CameraView> {
    let g = |key: &str| kv_f64(map, path, &format!("{prefix}.{key}"));
    let mut rotation = Matrix3::zeros();
    for row in 0..3 {
        for col in 0..3 {
            rotation[(row, col)] = g(&format!("r{row}{col}"))?;
        }
    }
    let view = CameraView {
        intrinsics: Intrinsics {
            fx: g("fx")?,
            fy: g("fy")?,
            cx: g("cx")?,
            cy: g("cy")?,
        },
        rotation,
        translation: Vector3::new(g("tx")?, g("ty")?, g("tz")?),
        image,
        depth,
        depth_valid,
    };
    view.validate().map_err(|e| format_err(path, e.to_string()))?;
    Ok(view)
}

/// Writes one pair as a directory of grids plus text camera/track files.
pub fn save_pair(dir: &Path, pair: &TwoViewPair) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (side, view) in [("a", &pair.view_a), ("b", &pair.view_b)] {
        write_grid_f32(&dir.join(format!("image_{side}.bin")), &view.image)?;
        write_grid_f32(
            &dir.join(format!("depth_{side}.bin")),
            &view.depth.map(|&d| d as f32),
        )?;
        write_grid_bool(&dir.join(format!("valid_{side}.bin")), &view.depth_valid)?;
    }
    let mut cameras = BufWriter::new(fs::File::create(dir.join("cameras.txt"))?);
    writeln!(cameras, "format {PAIR_FORMAT}")?;
    writeln!(cameras, "overlap {:.17e}", pair.overlap)?;
    write_camera(&mut cameras, "a", &pair.view_a)?;
    write_camera(&mut cameras, "b", &pair.view_b)?;
    let mut tracks = BufWriter::new(fs::File::create(dir.join("tracks.txt"))?);
    writeln!(tracks, "format {PAIR_FORMAT}")?;
    for (i, p) in pair.tracks.points.iter().enumerate() {
        writeln!(
            tracks,
            "{:.17e} {:.17e} {:.17e} {} {}",
            p.x,
            p.y,
            p.z,
            pair.tracks.visibility_a[i] as u8,
            pair.tracks.visibility_b[i] as u8
        )?;
    }
    Ok(())
}

pub fn load_pair(dir: &Path) -> Result<TwoViewPair> {
    let cam_path = dir.join("cameras.txt");
    let map = parse_kv(&cam_path, &fs::read_to_string(&cam_path)?)?;
    match map.get("format").map(String::as_str) {
        Some(PAIR_FORMAT) => {}
        other => {
            return Err(format_err(
                &cam_path,
                format!("unsupported pair format {other:?}"),
            ))
        }
    }
    let mut views = Vec::new();
    for side in ["a", "b"] {
        let image = read_grid_f32(&dir.join(format!("image_{side}.bin")))?;
        let depth = read_grid_f32(&dir.join(format!("depth_{side}.bin")))?.to_f64();
        let valid = read_grid_bool(&dir.join(format!("valid_{side}.bin")))?;
        views.push(read_camera(&map, &cam_path, side, image, depth, valid)?);
    }
    let view_b = views.pop().unwrap();
    let view_a = views.pop().unwrap();

    let track_path = dir.join("tracks.txt");
    let file = BufReader::new(fs::File::open(&track_path)?);
    let mut tracks = TrackSet::default();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line != format!("format {PAIR_FORMAT}") {
                return Err(format_err(&track_path, "bad track header"));
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(format_err(&track_path, "track record needs 5 fields"));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| format_err(&track_path, "bad track value"))
        };
        tracks
            .points
            .push(Point3::new(num(fields[0])?, num(fields[1])?, num(fields[2])?));
        tracks.visibility_a.push(fields[3] == "1");
        tracks.visibility_b.push(fields[4] == "1");
    }
    Ok(TwoViewPair {
        view_a,
        view_b,
        tracks,
        overlap: kv_f64(&map, &cam_path, "overlap")?,
    })
}

// ---------------------------------------------------------------------------
// Dataset manifest.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub seed: u64,
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub config_hash: String,
    pub train: Vec<ManifestEntry>,
    pub test: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(config_hash: String) -> Self {
        Self {
            format: MANIFEST_FORMAT.to_string(),
            config_hash,
            train: Vec::new(),
            test: Vec::new(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let manifest: Self = serde_json::from_str(&text)
            .map_err(|e| format_err(path, e.to_string()))?;
        if manifest.format != MANIFEST_FORMAT {
            return Err(format_err(path, "unsupported manifest format"));
        }
        Ok(manifest)
    }

    /// Content hash of the canonical encoding; identical configs must
    /// reproduce identical hashes.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("manifest serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

// ---------------------------------------------------------------------------
// Checkpoints: magic, config hash, step, rng state, then per-layer blobs.

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(CHECKPOINT_MAGIC)?;
    let hash = ckpt.config_hash.as_bytes();
    w.write_all(&(hash.len() as u32).to_le_bytes())?;
    w.write_all(hash)?;
    w.write_all(&(ckpt.step as u64).to_le_bytes())?;
    w.write_all(&ckpt.rng_state.0.to_le_bytes())?;
    w.write_all(&ckpt.rng_state.1.to_le_bytes())?;
    w.write_all(&(ckpt.net.layers.len() as u32).to_le_bytes())?;
    for layer in &ckpt.net.layers {
        for dim in [layer.in_c, layer.out_c, layer.stride] {
            w.write_all(&(dim as u32).to_le_bytes())?;
        }
        w.write_all(&(layer.weight.len() as u32).to_le_bytes())?;
        for v in &layer.weight {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&(layer.bias.len() as u32).to_le_bytes())?;
        for v in &layer.bias {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(format_err(self.path, "truncated checkpoint"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32_vec(&mut self, n: usize) -> Result<Vec<f32>> {
        Ok(self
            .take(4 * n)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path)?;
    let mut r = Reader {
        bytes: &bytes,
        pos: 0,
        path,
    };
    if r.take(8)? != CHECKPOINT_MAGIC {
        return Err(format_err(path, "bad checkpoint magic"));
    }
    let hash_len = r.u32()? as usize;
    let config_hash = String::from_utf8(r.take(hash_len)?.to_vec())
        .map_err(|_| format_err(path, "non-utf8 config hash"))?;
    let step = r.u64()? as usize;
    let seed = r.u64()?;
    let word_pos = u128::from_le_bytes(r.take(16)?.try_into().unwrap());
    let n_layers = r.u32()? as usize;
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let in_c = r.u32()? as usize;
        let out_c = r.u32()? as usize;
        let stride = r.u32()? as usize;
        let n_w = r.u32()? as usize;
        let weight = r.f32_vec(n_w)?;
        let n_b = r.u32()? as usize;
        let bias = r.f32_vec(n_b)?;
        if n_w != in_c * out_c * 9 || n_b != out_c {
            return Err(format_err(path, "checkpoint layer shape mismatch"));
        }
        layers.push(crate::detector::Conv::from_parts(
            in_c, out_c, stride, weight, bias,
        ));
    }
    if r.pos != bytes.len() {
        return Err(format_err(path, "trailing bytes in checkpoint"));
    }
    Ok(Checkpoint {
        net: crate::detector::ScoreNet::from_layers(layers),
        step,
        config_hash,
        rng_state: (seed, word_pos),
    })
}

// ---------------------------------------------------------------------------
// Metrics log (JSONL) and reports (versioned JSON).

pub fn append_metrics_log(path: &Path, records: &[StepMetrics]) -> Result<()> {
    let mut w = BufWriter::new(fs::OpenOptions::new().create(true).append(true).open(path)?);
    for rec in records {
        let line = serde_json::to_string(rec).expect("metrics serialize");
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_metrics_log(path: &Path) -> Result<Vec<StepMetrics>> {
    let mut out = Vec::new();
    for line in fs::read_to_string(path)?.lines() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(line).map_err(|e| format_err(path, e.to_string()))?,
        );
    }
    Ok(out)
}

pub fn save_report(path: &Path, report: &MetricsReport) -> Result<()> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    fs::write(path, json)?;
    Ok(())
}

pub fn load_report(path: &Path) -> Result<MetricsReport> {
    let text = fs::read_to_string(path)?;
    let report: MetricsReport =
        serde_json::from_str(&text).map_err(|e| format_err(path, e.to_string()))?;
    if report.format_version != MetricsReport::FORMAT_VERSION {
        return Err(format_err(
            path,
            format!("unsupported report version {}", report.format_version),
        ));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Keypoint files: versioned header then `x y score` per line.

pub fn save_keypoints(path: &Path, kps: &KeypointSet) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{KEYPOINT_FORMAT} {} {}", kps.width, kps.height)?;
    for p in &kps.points {
        writeln!(w, "{:.17e} {:.17e} {:.17e}", p.x, p.y, p.score)?;
    }
    Ok(())
}

pub fn load_keypoints(path: &Path) -> Result<KeypointSet> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| format_err(path, "empty keypoint file"))?;
    let rest = header
        .strip_prefix(KEYPOINT_FORMAT)
        .ok_or_else(|| format_err(path, "bad keypoint header"))?;
    let dims: Vec<usize> = rest
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| format_err(path, "bad dimensions")))
        .collect::<Result<_>>()?;
    if dims.len() != 2 {
        return Err(format_err(path, "keypoint header needs width and height"));
    }
    let mut points = Vec::new();
    for line in lines {
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| format_err(path, "bad record")))
            .collect::<Result<_>>()?;
        if nums.len() != 3 {
            return Err(format_err(path, "keypoint record needs 3 fields"));
        }
        points.push(Keypoint {
            x: nums[0],
            y: nums[1],
            score: nums[2],
        });
    }
    Ok(KeypointSet {
        width: dims[0],
        height: dims[1],
        points,
    })
}

/// Output root: `$KEYSPOT_OUT` if set, else `./keyspot-out`.
pub fn default_output_root() -> PathBuf {
    std::env::var_os("KEYSPOT_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("keyspot-out"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil;

    fn tmpdir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("keyspot-io-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn grid_round_trip_exact() {
        let dir = tmpdir("grid");
        let mut g = Grid::zeros_f32(7, 5);
        for (i, v) in g.data_mut().iter_mut().enumerate() {
            *v = (i as f32).sin();
        }
        let path = dir.join("g.bin");
        write_grid_f32(&path, &g).unwrap();
        assert_eq!(read_grid_f32(&path).unwrap(), g);
    }

    #[test]
    fn corrupt_grid_rejected() {
        let dir = tmpdir("grid-bad");
        let path = dir.join("g.bin");
        fs::write(&path, [1, 2, 3]).unwrap();
        assert!(matches!(
            read_grid_f32(&path),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn pair_round_trip() {
        let dir = tmpdir("pair");
        let pair = testutil::random_pair(77);
        save_pair(&dir, &pair).unwrap();
        let back = load_pair(&dir).unwrap();
        assert_eq!(back.view_a.image, pair.view_a.image);
        assert_eq!(back.view_b.image, pair.view_b.image);
        assert_eq!(back.view_a.depth_valid, pair.view_a.depth_valid);
        assert_eq!(back.tracks.points.len(), pair.tracks.points.len());
        assert!((back.overlap - pair.overlap).abs() < 1e-15);
        // Cameras round-trip exactly (printed with 17 significant digits);
        // depth goes through f32.
        assert_eq!(back.view_a.rotation, pair.view_a.rotation);
        assert_eq!(back.view_b.translation, pair.view_b.translation);
        for (a, b) in back.view_a.depth.data().iter().zip(pair.view_a.depth.data()) {
            assert!((a - b).abs() <= b.abs() * 1e-6);
        }
    }

    #[test]
    fn checkpoint_round_trip_bit_exact() {
        let dir = tmpdir("ckpt");
        let ckpt = Checkpoint {
            net: crate::detector::ScoreNet::new(123),
            step: 41,
            config_hash: "deadbeef".into(),
            rng_state: (9, 123456789012345),
        };
        let path = dir.join("c.ckpt");
        save_checkpoint(&path, &ckpt).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back.step, 41);
        assert_eq!(back.config_hash, "deadbeef");
        assert_eq!(back.rng_state, ckpt.rng_state);
        for (a, b) in back.net.layers.iter().zip(&ckpt.net.layers) {
            assert_eq!(a.weight, b.weight);
            assert_eq!(a.bias, b.bias);
            assert_eq!((a.in_c, a.out_c, a.stride), (b.in_c, b.out_c, b.stride));
        }
    }

    #[test]
    fn bad_checkpoint_magic_rejected() {
        let dir = tmpdir("ckpt-bad");
        let path = dir.join("c.ckpt");
        fs::write(&path, b"NOTCKPT0rest").unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn metrics_log_appends_and_reads() {
        let dir = tmpdir("log");
        let path = dir.join("metrics.jsonl");
        let rec = |step| StepMetrics {
            step,
            keypoint_ce: 1.5,
            coverage: 0.25,
            total: 1.75,
            skipped_pairs: 0,
            beta: 50.0,
        };
        append_metrics_log(&path, &[rec(0), rec(1)]).unwrap();
        append_metrics_log(&path, &[rec(2)]).unwrap();
        let back = read_metrics_log(&path).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[2].step, 2);
    }

    #[test]
    fn report_round_trip_and_version_check() {
        let dir = tmpdir("report");
        let report = MetricsReport {
            format_version: MetricsReport::FORMAT_VERSION,
            checkpoint_id: "abc@5".into(),
            step: 5,
            repeatability: Some(0.5),
            auc_thresholds: vec![5.0, 10.0, 20.0],
            auc: vec![0.1, 0.2, 0.3],
            maa: 0.15,
            per_pair_errors: vec![Some(2.0), None],
            mean_keypoints: 100.0,
            pairs_evaluated: 2,
            pairs_failed: 1,
        };
        let path = dir.join("report.json");
        save_report(&path, &report).unwrap();
        assert_eq!(load_report(&path).unwrap(), report);
        let mut old = report;
        old.format_version = 999;
        save_report(&path, &old).unwrap();
        assert!(matches!(load_report(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn keypoints_round_trip() {
        let dir = tmpdir("kps");
        let kps = KeypointSet {
            width: 64,
            height: 64,
            points: vec![
                Keypoint {
                    x: 0.125,
                    y: -0.5,
                    score: 0.75,
                },
                Keypoint {
                    x: -0.03125,
                    y: 0.99,
                    score: 0.5,
                },
            ],
        };
        let path = dir.join("kps.txt");
        save_keypoints(&path, &kps).unwrap();
        assert_eq!(load_keypoints(&path).unwrap(), kps);
    }

    #[test]
    fn manifest_hash_deterministic() {
        let mut m = Manifest::new("cafe".into());
        m.train.push(ManifestEntry {
            name: "pair_000".into(),
            seed: 1,
            overlap: 0.5,
        });
        let m2 = m.clone();
        assert_eq!(m.hash(), m2.hash());
        m.test.push(ManifestEntry {
            name: "pair_100".into(),
            seed: 100,
            overlap: 0.4,
        });
        assert_ne!(m.hash(), m2.hash());
        let dir = tmpdir("manifest");
        let path = dir.join("manifest.json");
        m.save(&path).unwrap();
        assert_eq!(Manifest::load(&path).unwrap(), m);
    }
}
