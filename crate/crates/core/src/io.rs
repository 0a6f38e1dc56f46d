//! File formats.
//!
//! * traces: JSON lines `{"sensor": 3, "t": 12.0, "r": 41.5}`, `r = null`
//!   for no detection;
//! * observations: JSON lines tagged by `kind` (`edge`, `vertex`,
//!   `adjacency`);
//! * scenarios: TOML, see [`ScenarioFile`];
//! * known parameters, reports and manifests: pretty JSON.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{Observation, Observations};
use crate::error::{Error, Result};
use crate::geometry::{Point, PolygonTarget};
use crate::sim::{LineMode, Scenario};
use crate::trace::TraceSample;

/// On-disk scenario. Every key except `polygon` has the default of the
/// numerical experiments.
///
/// ```toml
/// n_s = 2000
/// thetas = [1.5707963267948966]
/// polygon = [[0.0, 0.0], [86.6025, 0.0], [0.0, 50.0]]
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioFile {
    pub omega_radius: f64,
    pub r_max: f64,
    pub n_s: usize,
    pub report_period: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    pub epsilon_s: f64,
    pub epsilon_l: f64,
    pub seed: u64,
    pub line_mode: LineMode,
    pub thetas: Vec<f64>,
    pub speed: f64,
    /// Translate the polygon so its centroid sits at the centre of Ω.
    pub center: bool,
    /// Counterclockwise vertex list.
    pub polygon: Vec<[f64; 2]>,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        Self {
            omega_radius: 200.0,
            r_max: 100.0,
            n_s: 2000,
            report_period: 1.0,
            duration: None,
            epsilon_s: 0.0,
            epsilon_l: 0.0,
            seed: 1,
            line_mode: LineMode::MonitorOmega,
            thetas: vec![std::f64::consts::FRAC_PI_2],
            speed: 1.0,
            center: true,
            polygon: Vec::new(),
        }
    }
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario> {
        let pts: Vec<Point> = self.polygon.iter().map(|&[x, y]| Point::new(x, y)).collect();
        let mut polygon = PolygonTarget::from_vertices(&pts)?;
        if self.center {
            polygon = polygon.centered();
        }
        let sc = Scenario {
            omega_radius: self.omega_radius,
            r_max: self.r_max,
            n_s: self.n_s,
            polygon,
            report_period: self.report_period,
            duration: self.duration,
            epsilon_s: self.epsilon_s,
            epsilon_l: self.epsilon_l,
            seed: self.seed,
            line_mode: self.line_mode,
            thetas: self.thetas,
            speed: self.speed,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_scenario(sc: &Scenario) -> Self {
        Self {
            omega_radius: sc.omega_radius,
            r_max: sc.r_max,
            n_s: sc.n_s,
            report_period: sc.report_period,
            duration: sc.duration,
            epsilon_s: sc.epsilon_s,
            epsilon_l: sc.epsilon_l,
            seed: sc.seed,
            line_mode: sc.line_mode,
            thetas: sc.thetas.clone(),
            speed: sc.speed,
            center: false,
            polygon: sc.polygon.vertices().iter().map(|p| [p.x, p.y]).collect(),
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parse a TOML scenario; `path` only labels errors.
pub fn parse_scenario(text: &str, path: &str) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse {
        path: path.to_string(),
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    if file.polygon.is_empty() {
        return Err(Error::Parse {
            path: path.to_string(),
            line: 0,
            message: "missing field `polygon`".into(),
        });
    }
    file.into_scenario().map_err(|e| match e {
        Error::Parse { .. } => e,
        other => Error::Config(format!("{path}: {other}")),
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text, &path.display().to_string())
}

pub fn scenario_to_toml(sc: &Scenario) -> String {
    toml::to_string(&ScenarioFile::from_scenario(sc)).expect("scenario serializes")
}

pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, items: impl IntoIterator<Item = &'a T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for it in items {
        serde_json::to_writer(&mut w, it)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Read JSON lines, skipping blank lines. Errors name the offending line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

pub fn write_traces(path: &Path, traces: &[Vec<TraceSample>]) -> Result<()> {
    write_jsonl(path, traces.iter().flatten())
}

pub fn read_traces(path: &Path) -> Result<Vec<TraceSample>> {
    read_jsonl(path)
}

pub fn write_observations(path: &Path, obs: &Observations) -> Result<()> {
    write_jsonl(path, obs.to_records().iter())
}

pub fn read_observations(path: &Path) -> Result<Observations> {
    Ok(Observations::from_records(read_jsonl::<Observation>(path)?))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(Self {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        })
    }
}

/// Provenance of one command invocation. `args` re-runs the command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub scenario_sha256: Option<String>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

impl RunManifest {
    pub fn start(command: &str, args: Vec<String>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            args,
            seed: None,
            scenario_sha256: None,
            started_unix: unix_now(),
            finished_unix: 0.0,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(FileDigest::of(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> Result<()> {
        self.outputs.push(FileDigest::of(path)?);
        Ok(())
    }

    pub fn finish(&mut self, path: &Path) -> Result<()> {
        self.finished_unix = unix_now();
        write_json(path, self)
    }
}
