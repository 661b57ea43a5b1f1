use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use physimetrics_core::kinematics::ik_fit;
use physimetrics_core::metrics::{aggregate_reports, evaluate_positions, fid_star_between, MetricsReport};
use physimetrics_core::representation::{assemble_rep, compute_velocity, pos_rot_mpjpe, validate_rep, MotionRep, Violation};
use physimetrics_core::Trajectory;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Context, OutputFormat};
use crate::error::{CliError, CliResult};
use crate::format::{MotionFile, PayloadKind, UpAxis};

/// MPJPE above which validate warns that the two components disagree, mm.
pub const MPJPE_WARNING_MM: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClipReport {
    pub file: String,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalOutput {
    pub clips: Vec<ClipReport>,
    pub aggregate: MetricsReport,
}

struct Clip {
    name: String,
    positions: Vec<Trajectory<f64>>,
    reps: Option<Vec<MotionRep<f64>>>,
    fps: f64,
}

fn load_clip(ctx: &Context, path: &Path, up: Option<UpAxis>) -> CliResult<Clip> {
    let name = path.display().to_string();
    let file = MotionFile::read(path)?;
    let fps = ctx.cfg.fps.unwrap_or(file.header.fps as f64);
    let (positions, reps) = match file.header.kind {
        PayloadKind::Positions => (file.positions(&name, up)?, None),
        PayloadKind::Rep => {
            let reps = file.reps(&name, up)?;
            (reps.iter().map(|r| r.positions().clone()).collect(), Some(reps))
        }
        PayloadKind::Markers => {
            return Err(CliError::Invariant(format!(
                "{name}: expected a positions or rep payload, found markers"
            )))
        }
    };
    if let Some(bad) = positions.iter().position(|p| !p.is_finite()) {
        return Err(CliError::Invariant(format!("{name}: person {bad} has non-finite positions")));
    }
    Ok(Clip {
        name,
        positions,
        reps,
        fps,
    })
}

/// Loads clips in parallel; the first failure in input order wins.
fn load_all(ctx: &Context, paths: &[PathBuf], up: Option<UpAxis>) -> CliResult<Vec<Clip>> {
    paths.par_iter().map(|p| load_clip(ctx, p, up)).collect::<Vec<_>>().into_iter().collect()
}

fn all_persons(clips: &[Clip]) -> Vec<&Trajectory<f64>> {
    clips.iter().flat_map(|c| &c.positions).collect()
}

fn eval_clip(ctx: &Context, clip: &Clip) -> CliResult<ClipReport> {
    let core = |e| CliError::from_core(&clip.name, e);
    let mpjpe = match &clip.reps {
        Some(reps) => {
            let mut sum = 0.0;
            for r in reps {
                sum += pos_rot_mpjpe(r, &ctx.skeleton).map_err(core)?;
            }
            Some(sum / reps.len() as f64)
        }
        None => None,
    };
    let report = evaluate_positions(&clip.positions, mpjpe, &ctx.skeleton, &ctx.body, clip.fps, &ctx.cfg.metrics)
        .map_err(core)?;
    Ok(ClipReport {
        file: clip.name.clone(),
        report,
    })
}

/// Per-clip reports, their aggregate, and FID* against `refs` when given.
pub fn cmd_eval(ctx: &Context, inputs: &[PathBuf], refs: &[PathBuf], up: Option<UpAxis>) -> CliResult<EvalOutput> {
    if inputs.is_empty() {
        return Err(CliError::Usage("eval needs at least one input file".into()));
    }
    let clips = load_all(ctx, inputs, up)?;
    let reference = load_all(ctx, refs, up)?;
    let reports = clips
        .par_iter()
        .map(|c| eval_clip(ctx, c))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<CliResult<Vec<_>>>()?;
    let mut aggregate = aggregate_reports(&reports.iter().map(|r| r.report.clone()).collect::<Vec<_>>())
        .expect("at least one clip");
    if !reference.is_empty() {
        let root = ctx.cfg.metrics.fid_root_centered.then(|| ctx.skeleton.root());
        let fid = fid_star_between(&all_persons(&clips), &all_persons(&reference), root)
            .map_err(|e| CliError::Invariant(format!("fid_star: {e}")))?;
        aggregate.fid_star = Some(fid);
    }
    Ok(EvalOutput {
        clips: reports,
        aggregate,
    })
}

const CSV_COLUMNS: &str =
    "file,penetration_mm,float_mm,foot_contact_mm,skate_cm_s,pfc,interpenetration_cm3,mpjpe_mm,fid_star,frames,persons,clips";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(out: &mut String, name: &str, r: &MetricsReport) {
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        csv_field(name),
        r.penetration_mm,
        r.float_mm,
        r.foot_contact_mm,
        r.skate_cm_s,
        r.pfc,
        opt(r.interpenetration_cm3),
        opt(r.mpjpe_mm),
        opt(r.fid_star),
        r.frames,
        r.persons,
        r.clips
    );
}

impl EvalOutput {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            OutputFormat::Csv => {
                let mut s = String::from(CSV_COLUMNS);
                s.push('\n');
                for c in &self.clips {
                    csv_row(&mut s, &c.file, &c.report);
                }
                csv_row(&mut s, "aggregate", &self.aggregate);
                s
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonFit {
    /// RMS joint error over all frames, m.
    pub residual_rms_m: f64,
    pub max_frame_residual_m: f64,
    pub pos_rot_mpjpe_mm: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutput {
    pub file: String,
    pub persons: Vec<PersonFit>,
}

impl FitOutput {
    /// RMS residual over every person, frame and joint, m.
    pub fn residual_rms_m(&self) -> f64 {
        let n = self.persons.len() as f64;
        (self.persons.iter().map(|p| p.residual_rms_m.powi(2)).sum::<f64>() / n).sqrt()
    }

    pub fn pos_rot_mpjpe_mm(&self) -> f64 {
        self.persons.iter().map(|p| p.pos_rot_mpjpe_mm).sum::<f64>() / self.persons.len() as f64
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (i, p) in self.persons.iter().enumerate() {
            let _ = writeln!(
                s,
                "person {i}: residual_rms_m={:e} max_frame_residual_m={:e} pos_rot_mpjpe_mm={} iterations={}",
                p.residual_rms_m, p.max_frame_residual_m, p.pos_rot_mpjpe_mm, p.iterations
            );
        }
        let _ = writeln!(
            s,
            "clip {}: residual_rms_m={:e} pos_rot_mpjpe_mm={}",
            self.file,
            self.residual_rms_m(),
            self.pos_rot_mpjpe_mm()
        );
        s
    }
}

/// Fits rotations to every person of a positions file and writes the
/// `[p | v | r]` representation to `out`.
pub fn cmd_fit(ctx: &Context, input: &Path, out: &Path, up: Option<UpAxis>) -> CliResult<FitOutput> {
    let name = input.display().to_string();
    let file = MotionFile::read(input)?;
    if file.header.kind != PayloadKind::Positions {
        return Err(CliError::Invariant(format!("{name}: fit needs a positions payload")));
    }
    let fps = ctx.cfg.fps.unwrap_or(file.header.fps as f64);
    let persons = file.positions(&name, up)?;
    let core = |e| CliError::from_core(input, e);
    let fits = persons
        .par_iter()
        .map(|p| {
            let fit = ik_fit(&ctx.skeleton, p, fps, &ctx.cfg.ik).map_err(core)?;
            let v = compute_velocity(p).map_err(core)?;
            let rep = assemble_rep(p.clone(), v, fit.pose.all_rotations().to_vec(), fps).map_err(core)?;
            let mpjpe = pos_rot_mpjpe(&rep, &ctx.skeleton).map_err(core)?;
            let sq = fit.residual_rms.iter().map(|r| r * r).sum::<f64>() / fit.residual_rms.len() as f64;
            let summary = PersonFit {
                residual_rms_m: sq.sqrt(),
                max_frame_residual_m: fit.max_residual(),
                pos_rot_mpjpe_mm: mpjpe,
                iterations: fit.iterations.iter().sum(),
            };
            Ok((rep, summary))
        })
        .collect::<Vec<CliResult<_>>>()
        .into_iter()
        .collect::<CliResult<Vec<_>>>()?;
    let (reps, summaries): (Vec<_>, Vec<_>) = fits.into_iter().unzip();
    MotionFile::from_reps(&reps, file.header.text.clone())?.write(out)?;
    Ok(FitOutput {
        file: name,
        persons: summaries,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonValidation {
    pub violations: Vec<Violation>,
    pub pos_rot_mpjpe_mm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateOutput {
    pub file: String,
    pub persons: Vec<PersonValidation>,
}

impl ValidateOutput {
    pub fn violation_count(&self) -> usize {
        self.persons.iter().map(|p| p.violations.len()).sum()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (i, p) in self.persons.iter().enumerate() {
            match p.pos_rot_mpjpe_mm {
                Some(m) => {
                    let _ = writeln!(s, "person {i}: pos_rot_mpjpe_mm={m}");
                    if m > MPJPE_WARNING_MM {
                        let _ = writeln!(
                            s,
                            "person {i}: warning: pos/rot disagreement noticeable ({m:.1} mm > {MPJPE_WARNING_MM} mm)"
                        );
                    }
                }
                None => {
                    let _ = writeln!(s, "person {i}: pos_rot_mpjpe_mm=n/a");
                }
            }
            for v in &p.violations {
                let _ = writeln!(s, "person {i}: violation: {v}");
            }
        }
        match self.violation_count() {
            0 => {
                let _ = writeln!(s, "{}: ok", self.file);
            }
            n => {
                let _ = writeln!(s, "{}: {n} violation(s)", self.file);
            }
        }
        s
    }
}

/// Checks every person of a representation file against the skeleton.
pub fn cmd_validate(ctx: &Context, input: &Path, up: Option<UpAxis>) -> CliResult<ValidateOutput> {
    let name = input.display().to_string();
    let file = MotionFile::read(input)?;
    if file.header.kind != PayloadKind::Rep {
        return Err(CliError::Invariant(format!("{name}: validate needs a rep payload")));
    }
    let mut reps = file.reps(&name, up)?;
    if let Some(fps) = ctx.cfg.fps {
        reps = reps
            .into_iter()
            .map(|r| {
                let (p, v, rot) = physimetrics_core::representation::split_rep(&r);
                MotionRep::new(p, v, rot, fps).map_err(|e| CliError::from_core(input, e))
            })
            .collect::<CliResult<_>>()?;
    }
    let persons = reps
        .iter()
        .map(|rep| PersonValidation {
            violations: validate_rep(rep, &ctx.skeleton, &ctx.cfg.tolerances),
            pos_rot_mpjpe_mm: pos_rot_mpjpe(rep, &ctx.skeleton).ok().filter(|m| m.is_finite()),
        })
        .collect();
    Ok(ValidateOutput { file: name, persons })
}
