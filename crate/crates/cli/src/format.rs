//! Motion clip files.
//!
//! Binary layout (little-endian), 32-byte header:
//!
//! | offset | type   | field                                   |
//! |--------|--------|-----------------------------------------|
//! | 0      | [u8;4] | magic `PHYM`                            |
//! | 4      | u32    | format version (1)                      |
//! | 8      | u8     | payload kind: 0 positions, 1 rep, 2 markers |
//! | 9      | u8     | up axis: 0 z, 1 y                       |
//! | 10     | u16    | reserved, 0                             |
//! | 12     | u32    | points per person (joints or markers)   |
//! | 16     | u32    | frames                                  |
//! | 20     | u32    | persons                                 |
//! | 24     | f32    | fps                                     |
//! | 28     | u32    | text tag length in bytes                |
//!
//! followed by the UTF-8 text tag and `persons × frames × width` f32
//! values, person-major, where width is `3·points` for positions/markers and
//! `12·points` for the `[p | v | r]` representation.
//!
//! Files ending in `.json` hold the same header fields and payload as JSON.

use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use physimetrics_core::kinematics::{Rotation6D, BODY_JOINTS};
use physimetrics_core::representation::{MotionRep, JOINT_WIDTH};
use physimetrics_core::Trajectory;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 4] = b"PHYM";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;
/// Joint count of inputs that carry two extra hand joints after the body joints.
pub const JOINTS_WITH_HANDS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PayloadKind {
    Positions,
    Rep,
    Markers,
}

impl PayloadKind {
    fn code(self) -> u8 {
        match self {
            PayloadKind::Positions => 0,
            PayloadKind::Rep => 1,
            PayloadKind::Markers => 2,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(PayloadKind::Positions),
            1 => Some(PayloadKind::Rep),
            2 => Some(PayloadKind::Markers),
            _ => None,
        }
    }

    /// Scalars per point per frame.
    pub fn point_width(self) -> usize {
        match self {
            PayloadKind::Positions | PayloadKind::Markers => 3,
            PayloadKind::Rep => JOINT_WIDTH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum UpAxis {
    Z,
    Y,
}

impl UpAxis {
    fn code(self) -> u8 {
        match self {
            UpAxis::Z => 0,
            UpAxis::Y => 1,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(UpAxis::Z),
            1 => Some(UpAxis::Y),
            _ => None,
        }
    }

    /// Rotation taking this convention to canonical z-up: `(x, y, z) ↦ (x, −z, y)` for y-up.
    pub fn to_canonical(self) -> Matrix3<f64> {
        match self {
            UpAxis::Z => Matrix3::identity(),
            UpAxis::Y => Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub version: u32,
    pub kind: PayloadKind,
    pub up_axis: UpAxis,
    pub joints: u32,
    pub frames: u32,
    pub persons: u32,
    pub fps: f32,
    #[serde(default)]
    pub text: Option<String>,
}

impl Header {
    pub fn frame_width(&self) -> usize {
        self.joints as usize * self.kind.point_width()
    }

    pub fn payload_len(&self) -> usize {
        self.persons as usize * self.frames as usize * self.frame_width()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionFile {
    pub header: Header,
    /// Person-major, frame-major values.
    pub payload: Vec<f32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonMotionFile {
    #[serde(flatten)]
    header: Header,
    /// Values widened to f64 so every f32 survives the text round trip.
    data: Vec<Vec<Vec<f64>>>,
}

impl MotionFile {
    pub fn new(header: Header, payload: Vec<f32>) -> CliResult<Self> {
        if payload.len() != header.payload_len() {
            return Err(CliError::Invariant(format!(
                "payload has {} values, header declares {}",
                payload.len(),
                header.payload_len()
            )));
        }
        Ok(Self { header, payload })
    }

    pub fn person(&self, i: usize) -> &[f32] {
        let n = self.header.frames as usize * self.header.frame_width();
        &self.payload[i * n..(i + 1) * n]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let text = h.text.as_deref().unwrap_or("").as_bytes();
        let mut out = Vec::with_capacity(HEADER_LEN + text.len() + 4 * self.payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&h.version.to_le_bytes());
        out.push(h.kind.code());
        out.push(h.up_axis.code());
        out.extend_from_slice(&0u16.to_le_bytes());
        out.extend_from_slice(&h.joints.to_le_bytes());
        out.extend_from_slice(&h.frames.to_le_bytes());
        out.extend_from_slice(&h.persons.to_le_bytes());
        out.extend_from_slice(&h.fps.to_le_bytes());
        out.extend_from_slice(&(text.len() as u32).to_le_bytes());
        out.extend_from_slice(text);
        for v in &self.payload {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Decodes the binary format; `name` labels diagnostics.
    pub fn from_bytes(bytes: &[u8], name: &str) -> CliResult<Self> {
        let err = |off: usize, msg: String| CliError::parse(name, Some(off as u64), msg);
        if bytes.len() < HEADER_LEN {
            return Err(err(bytes.len(), format!("truncated header: {} of {HEADER_LEN} bytes", bytes.len())));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        if &bytes[0..4] != MAGIC {
            return Err(err(0, "bad magic, expected PHYM".into()));
        }
        let version = u32_at(4);
        if version != VERSION {
            return Err(err(4, format!("unsupported version {version}")));
        }
        let kind = PayloadKind::from_code(bytes[8]).ok_or_else(|| err(8, format!("unknown payload kind {}", bytes[8])))?;
        let up_axis = UpAxis::from_code(bytes[9]).ok_or_else(|| err(9, format!("unknown up axis {}", bytes[9])))?;
        if bytes[10] != 0 || bytes[11] != 0 {
            return Err(err(10, "reserved bytes must be zero".into()));
        }
        let (joints, frames, persons) = (u32_at(12), u32_at(16), u32_at(20));
        for (off, what, v) in [(12, "joints", joints), (16, "frames", frames), (20, "persons", persons)] {
            if v == 0 {
                return Err(err(off, format!("{what} must be positive")));
            }
        }
        let fps = f32::from_le_bytes(bytes[24..28].try_into().unwrap());
        if !(fps > 0.0) || !fps.is_finite() {
            return Err(err(24, format!("fps must be positive, got {fps}")));
        }
        let text_len = u32_at(28) as usize;
        let payload_start = HEADER_LEN
            .checked_add(text_len)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| err(28, format!("text tag of {text_len} bytes runs past end of file")))?;
        let text = if text_len == 0 {
            None
        } else {
            Some(
                String::from_utf8(bytes[HEADER_LEN..payload_start].to_vec())
                    .map_err(|e| err(HEADER_LEN + e.utf8_error().valid_up_to(), "text tag is not UTF-8".into()))?,
            )
        };
        let header = Header {
            version,
            kind,
            up_axis,
            joints,
            frames,
            persons,
            fps,
            text,
        };
        let expected = (header.payload_len() as u64) * 4;
        let found = (bytes.len() - payload_start) as u64;
        if found != expected {
            return Err(err(
                payload_start,
                format!("payload is {found} bytes, header declares {expected}"),
            ));
        }
        let payload = bytes[payload_start..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { header, payload })
    }

    pub fn to_json(&self) -> String {
        let n = self.header.frames as usize;
        let w = self.header.frame_width();
        let data = (0..self.header.persons as usize)
            .map(|i| {
                self.person(i)
                    .chunks_exact(w)
                    .take(n)
                    .map(|row| row.iter().map(|v| *v as f64).collect())
                    .collect()
            })
            .collect();
        serde_json::to_string(&JsonMotionFile {
            header: self.header.clone(),
            data,
        })
        .expect("motion file serializes")
    }

    pub fn from_json(text: &str, name: &str) -> CliResult<Self> {
        let file: JsonMotionFile = serde_json::from_str(text).map_err(|e| CliError::parse(name, None, e.to_string()))?;
        let h = file.header;
        if h.version != VERSION {
            return Err(CliError::parse(name, None, format!("unsupported version {}", h.version)));
        }
        if h.joints == 0 || h.frames == 0 || h.persons == 0 || !(h.fps > 0.0) || !h.fps.is_finite() {
            return Err(CliError::parse(name, None, "joints, frames, persons and fps must be positive"));
        }
        if file.data.len() != h.persons as usize
            || file
                .data
                .iter()
                .any(|p| p.len() != h.frames as usize || p.iter().any(|f| f.len() != h.frame_width()))
        {
            return Err(CliError::parse(name, None, "data array shape does not match header"));
        }
        let payload = file.data.into_iter().flatten().flatten().map(|v| v as f32).collect();
        Ok(Self { header: h, payload })
    }

    /// Reads binary, or JSON when the extension is `.json`.
    pub fn read(path: &Path) -> CliResult<Self> {
        let name = path.display().to_string();
        let bytes = std::fs::read(path).map_err(|e| CliError::parse(path, None, e.to_string()))?;
        if is_json(path) {
            let text = String::from_utf8(bytes).map_err(|e| {
                CliError::parse(path, Some(e.utf8_error().valid_up_to() as u64), "file is not UTF-8")
            })?;
            Self::from_json(&text, &name)
        } else {
            Self::from_bytes(&bytes, &name)
        }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let out = if is_json(path) {
            self.to_json().into_bytes()
        } else {
            self.to_bytes()
        };
        std::fs::write(path, out).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
    }

    pub fn from_positions(persons: &[Trajectory<f64>], fps: f64, text: Option<String>) -> CliResult<Self> {
        Self::from_point_sets(persons, PayloadKind::Positions, fps, text)
    }

    pub fn from_markers(persons: &[Trajectory<f64>], fps: f64, text: Option<String>) -> CliResult<Self> {
        Self::from_point_sets(persons, PayloadKind::Markers, fps, text)
    }

    fn from_point_sets(persons: &[Trajectory<f64>], kind: PayloadKind, fps: f64, text: Option<String>) -> CliResult<Self> {
        let first = persons
            .first()
            .ok_or_else(|| CliError::Invariant("no persons to write".into()))?;
        let header = Header {
            version: VERSION,
            kind,
            up_axis: UpAxis::Z,
            joints: first.points() as u32,
            frames: first.frames() as u32,
            persons: persons.len() as u32,
            fps: fps as f32,
            text,
        };
        let payload = persons.iter().flat_map(|p| p.to_flat()).map(|v| v as f32).collect();
        Self::new(header, payload)
    }

    pub fn from_reps(persons: &[MotionRep<f64>], text: Option<String>) -> CliResult<Self> {
        let first = persons
            .first()
            .ok_or_else(|| CliError::Invariant("no persons to write".into()))?;
        let header = Header {
            version: VERSION,
            kind: PayloadKind::Rep,
            up_axis: UpAxis::Z,
            joints: first.joints() as u32,
            frames: first.frames() as u32,
            persons: persons.len() as u32,
            fps: first.fps() as f32,
            text,
        };
        let payload = persons.iter().flat_map(|p| p.to_flat()).map(|v| v as f32).collect();
        Self::new(header, payload)
    }

    fn joints_to_keep(&self, name: &str) -> CliResult<usize> {
        match self.header.joints as usize {
            BODY_JOINTS => Ok(BODY_JOINTS),
            JOINTS_WITH_HANDS => Ok(BODY_JOINTS),
            j => Err(CliError::Invariant(format!(
                "{name}: expected {BODY_JOINTS} or {JOINTS_WITH_HANDS} joints, file has {j}"
            ))),
        }
    }

    /// Joint positions per person in canonical z-up, 22 joints. Rep payloads
    /// contribute their position component.
    pub fn positions(&self, name: &str, up_override: Option<UpAxis>) -> CliResult<Vec<Trajectory<f64>>> {
        let keep = self.joints_to_keep(name)?;
        let conv = up_override.unwrap_or(self.header.up_axis).to_canonical();
        match self.header.kind {
            PayloadKind::Positions => (0..self.header.persons as usize)
                .map(|i| {
                    let flat: Vec<f64> = self.person(i).iter().map(|v| *v as f64).collect();
                    let t = Trajectory::from_flat(self.header.frames as usize, self.header.joints as usize, &flat)
                        .map_err(|e| CliError::from_core(name, e))?;
                    let t = t.truncate_points(keep).map_err(|e| CliError::from_core(name, e))?;
                    Ok(t.map(|x| conv * x))
                })
                .collect(),
            PayloadKind::Rep => Ok(self
                .reps(name, up_override)?
                .into_iter()
                .map(|r| r.positions().clone())
                .collect()),
            PayloadKind::Markers => Err(CliError::Invariant(format!(
                "{name}: marker payloads carry no joint positions"
            ))),
        }
    }

    /// Representation per person in canonical z-up, 22 joints.
    pub fn reps(&self, name: &str, up_override: Option<UpAxis>) -> CliResult<Vec<MotionRep<f64>>> {
        if self.header.kind != PayloadKind::Rep {
            return Err(CliError::Invariant(format!("{name}: payload is not a motion representation")));
        }
        let keep = self.joints_to_keep(name)?;
        let joints = self.header.joints as usize;
        let frames = self.header.frames as usize;
        let conv = up_override.unwrap_or(self.header.up_axis).to_canonical();
        (0..self.header.persons as usize)
            .map(|i| {
                let src = self.person(i);
                let mut flat = Vec::with_capacity(frames * keep * JOINT_WIDTH);
                for frame in src.chunks_exact(joints * JOINT_WIDTH) {
                    let (p, rest) = frame.split_at(3 * joints);
                    let (v, r) = rest.split_at(3 * joints);
                    for c in [&p[..3 * keep], &v[..3 * keep]] {
                        for x in c.chunks_exact(3) {
                            let x = conv * Vector3::new(x[0] as f64, x[1] as f64, x[2] as f64);
                            flat.extend_from_slice(x.as_slice());
                        }
                    }
                    for r in r[..6 * keep].chunks_exact(6) {
                        let r: Vec<f64> = r.iter().map(|v| *v as f64).collect();
                        flat.extend(conjugate_rotation(&conv, &Rotation6D::from_slice(&r)).to_array());
                    }
                }
                MotionRep::from_flat(keep, frames, &flat, self.header.fps as f64).map_err(|e| CliError::from_core(name, e))
            })
            .collect()
    }
}

/// First two columns of `C R Cᵀ`, with `a × b` standing in for R's third
/// column. Exact for proper rotations; identity `C` leaves values untouched.
fn conjugate_rotation(conv: &Matrix3<f64>, r: &Rotation6D<f64>) -> Rotation6D<f64> {
    if *conv == Matrix3::identity() {
        return *r;
    }
    let ct = conv.transpose();
    let cols = [r.a, r.b, r.a.cross(&r.b)];
    let rc = |k: usize| cols[0] * ct[(0, k)] + cols[1] * ct[(1, k)] + cols[2] * ct[(2, k)];
    Rotation6D::new(conv * rc(0), conv * rc(1))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}
