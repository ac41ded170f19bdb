//! End-to-end run: orientation, segmentation, identification, landmarks.

mod config;
mod export;
mod report;

use std::path::Path;

use log::{info, warn};
use thiserror::Error;

use crate::arch::ArchCurve;
use crate::assignment::{
    build_cost_table, measure_characteristics, merge_half_molars, solve_assignment, tooth_types, whole_tooth_codes,
    Characteristics, DatabaseError, TrainingDatabase,
};
use crate::curvature::crease_costs;
use crate::landmarks::extract_landmarks;
use crate::mesh::{index_mesh, parse_stl, IndexOptions, IndexedMesh, MeshError, StlError};
use crate::orientation::{orient, refine_vertical, Frame};
use crate::peaks::{filter_by_height, find_peaks, Peak};
use crate::segmentation::{faces_centroid, Segmentation};

pub use config::{ConfigError, PipelineConfig};
pub use export::{export_annotated, label_color, write_ply, ExportError, ExportFormat, UNLABELED_GRAY};
pub use report::{
    face_digest, BlobReport, Diagnostics, LandmarkReport, PartReport, PipelineStage, RejectedReport, StageFailure,
    ToothReport, REPORT_SCHEMA_VERSION,
};

/// Errors that stop a run before any report exists.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Stl(#[from] StlError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("training database: {0}")]
    Database(#[from] DatabaseError),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Database(_) => PipelineStage::Assignment.exit_code(),
            _ => 2,
        }
    }
}

/// Output of the stages up to and including segmentation.
#[derive(Debug, Clone)]
pub struct Segmented {
    pub frame: Frame,
    /// `None` when the vertical refinement was skipped.
    pub pitch: Option<f64>,
    pub peak_count: usize,
    /// Peaks that passed the height filter; blobs index into this list.
    pub peaks: Vec<Peak>,
    pub segmentation: Segmentation,
    /// Per blob, measured against the segmentation arch.
    pub characteristics: Vec<Characteristics>,
}

/// A finished run: the report plus the per-face tooth labels behind it.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: LandmarkReport,
    /// Index into `report.teeth` for every face, `None` when unlabeled.
    pub face_labels: Vec<Option<usize>>,
}

fn fail(stage: PipelineStage, message: impl ToString) -> StageFailure {
    StageFailure {
        stage,
        message: message.to_string(),
    }
}

/// Orientation, peaks, curvature and adaptive segmentation.
pub fn segment_mesh(mesh: &IndexedMesh, config: &PipelineConfig) -> Result<Segmented, StageFailure> {
    let frame = orient(mesh).map_err(|e| fail(PipelineStage::Orientation, e))?;
    let refined = refine_vertical(mesh, &frame);
    let frame = refined.frame;
    let all = find_peaks(mesh, &frame);
    let peaks = filter_by_height(&all, config.height_threshold_mm);
    let costs = crease_costs(mesh);
    let segmentation = crate::segmentation::adaptive_threshold(mesh, &costs, &frame, &peaks, &config.segmentation())
        .map_err(|e| fail(PipelineStage::Segmentation, e))?;
    let arch = &segmentation.chosen.arch;
    let characteristics = segmentation
        .chosen
        .blobs
        .iter()
        .map(|b| measure_characteristics(&b.faces, mesh, arch))
        .collect();
    Ok(Segmented {
        frame,
        pitch: (!refined.skipped).then_some(refined.pitch),
        peak_count: all.len(),
        peaks,
        segmentation,
        characteristics,
    })
}

/// Runs every stage on an indexed mesh. Stage failures end up in the report.
pub fn analyze(mesh: &IndexedMesh, model_id: &str, config: &PipelineConfig, db: &TrainingDatabase) -> Analysis {
    let mut report = LandmarkReport::empty(model_id, config.jaw_kind);
    let mut face_labels = vec![None; mesh.face_count()];
    let seg = match segment_mesh(mesh, config) {
        Ok(s) => s,
        Err(f) => {
            if f.stage == PipelineStage::Segmentation {
                // Orientation worked; keep the frame for the reader.
                report.frame = orient(mesh).ok().map(|fr| refine_vertical(mesh, &fr).frame);
            }
            warn!("{model_id}: {:?} stage failed: {}", f.stage, f.message);
            report.stage_failure = Some(f);
            return Analysis { report, face_labels };
        }
    };
    report.frame = Some(seg.frame);
    let diag = &mut report.diagnostics;
    diag.pitch_correction_deg = seg.pitch.map(f64::to_degrees);
    if seg.pitch.is_none() {
        diag.warnings.push("vertical refinement skipped".into());
    }
    diag.peak_count = seg.peak_count;
    diag.kept_peak_count = seg.peaks.len();
    let stage = &seg.segmentation.chosen;
    diag.threshold = Some(stage.threshold);
    diag.threshold_scores = seg.segmentation.scores.clone();
    diag.rejected_groups = stage
        .rejected
        .iter()
        .map(|r| RejectedReport {
            peaks: r.peaks.iter().map(|&p| seg.peaks[p].position).collect(),
            face_count: r.face_count,
            reason: r.reason,
        })
        .collect();

    let blobs = &stage.blobs;
    let types = tooth_types(config.jaw_kind);
    let solved = build_cost_table(&seg.characteristics, &types, db).and_then(|t| solve_assignment(&t, &types, db, config.fussiness));
    let assignment = match solved {
        Ok(a) => a,
        Err(e) => {
            warn!("{model_id}: assignment failed: {e}");
            report.stage_failure = Some(fail(PipelineStage::Assignment, e));
            report.unassigned_blobs = (0..blobs.len()).map(|i| blob_report(i, &blobs[i].faces, &seg)).collect();
            return Analysis { report, face_labels };
        }
    };
    report.diagnostics.objective = Some(assignment.objective);
    let teeth = merge_half_molars(&assignment, &types);

    let tooth_faces: Vec<Vec<u32>> = teeth
        .iter()
        .map(|t| {
            let mut f: Vec<u32> = t.blobs().flat_map(|b| blobs[b].faces.iter().copied()).collect();
            f.sort_unstable();
            f
        })
        .collect();
    let arch = landmark_arch(mesh, &seg, &tooth_faces);

    for (k, (tooth, faces)) in teeth.iter().zip(&tooth_faces).enumerate() {
        for &f in faces {
            face_labels[f as usize] = Some(k);
        }
        let class = types.iter().find(|t| t.code == tooth.parts[0].0).expect("assigned type is in the catalog").class();
        let (landmarks, landmark_missing) = if config.skip_landmarks {
            (Vec::new(), false)
        } else {
            let peaks: Vec<Peak> = tooth.blobs().flat_map(|b| blobs[b].peaks.iter().map(|&p| seg.peaks[p])).collect();
            let found = extract_landmarks(&tooth.code, class, faces, &peaks, mesh, &arch, config.incisor_rule);
            (found.landmarks, found.missing)
        };
        if landmark_missing {
            report.diagnostics.warnings.push(format!("{}: no landmark found", tooth.code));
        }
        if tooth.anomalous {
            report.diagnostics.warnings.push(format!("{}: distal half without a mesial half", tooth.code));
        }
        report.teeth.push(ToothReport {
            code: tooth.code.clone(),
            partial: tooth.partial,
            anomalous: tooth.anomalous,
            face_count: faces.len(),
            face_digest: face_digest(faces),
            parts: tooth
                .parts
                .iter()
                .map(|(code, b)| PartReport {
                    code: code.clone(),
                    blob: *b,
                    characteristics: seg.characteristics[*b],
                })
                .collect(),
            landmarks,
            landmark_missing,
        });
    }

    report.unassigned_blobs = (0..blobs.len())
        .filter(|&i| assignment.non_tooth(i))
        .map(|i| blob_report(i, &blobs[i].faces, &seg))
        .collect();
    let present: Vec<String> = assignment
        .blob_type
        .iter()
        .flatten()
        .map(|&j| types[j].whole_code())
        .collect();
    report.missing_types = whole_tooth_codes(config.jaw_kind)
        .into_iter()
        .filter(|c| !present.contains(c))
        .collect();
    info!(
        "{model_id}: {} teeth, {} unassigned blobs, threshold {:.3}",
        report.teeth.len(),
        report.unassigned_blobs.len(),
        stage.threshold
    );
    Analysis { report, face_labels }
}

fn blob_report(i: usize, faces: &[u32], seg: &Segmented) -> BlobReport {
    BlobReport {
        blob: i,
        face_count: faces.len(),
        face_digest: face_digest(faces),
        characteristics: seg.characteristics[i],
    }
}

/// Arch through the identified teeth; falls back to the segmentation arch
/// when fewer than three teeth are known.
fn landmark_arch(mesh: &IndexedMesh, seg: &Segmented, tooth_faces: &[Vec<u32>]) -> ArchCurve {
    let fallback = seg.segmentation.chosen.arch;
    if tooth_faces.len() < 3 {
        return fallback;
    }
    let centres: Vec<_> = tooth_faces.iter().map(|f| faces_centroid(mesh, f)).collect();
    ArchCurve::fit(seg.frame, &centres, None).unwrap_or(fallback)
}

/// Parses and indexes STL bytes.
pub fn load_mesh(bytes: &[u8], config: &PipelineConfig) -> Result<IndexedMesh, PipelineError> {
    let soup = parse_stl(bytes)?;
    let mesh = index_mesh(&soup, IndexOptions {
        snap_tolerance: config.snap_tolerance_mm,
    })?;
    let r = mesh.report();
    if r.degenerate_dropped > 0 {
        warn!("dropped {} degenerate triangles", r.degenerate_dropped);
    }
    Ok(mesh)
}

/// Reads an STL file and runs every stage. `db` defaults to the shipped
/// database for the configured jaw.
pub fn run_pipeline(
    path: &Path,
    config: &PipelineConfig,
    db: Option<&TrainingDatabase>,
) -> Result<Analysis, PipelineError> {
    config.validate()?;
    let bytes = std::fs::read(path).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let shipped;
    let db = match db {
        Some(d) => d,
        None => {
            shipped = TrainingDatabase::shipped(config.jaw_kind)?;
            &shipped
        }
    };
    db.ensure_jaw(config.jaw_kind)?;
    let mesh = load_mesh(&bytes, config)?;
    let id = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    Ok(analyze(&mesh, &id, config, db))
}
