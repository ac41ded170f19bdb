#![allow(dead_code)]

use archmark_core::assignment::{JawKind, TrainingDatabase};
use archmark_core::mesh::{index_mesh, parse_stl, write_binary_stl, IndexOptions, IndexedMesh};
use archmark_core::pipeline::{analyze, Analysis, LandmarkReport, PipelineConfig};
use archmark_core::synth::{generate, SynthModel, SynthSpec, SynthTruth};

/// Landmark positions must land this close to the generator's cusp apices, mm.
pub const TRUTH_TOLERANCE: f64 = 1.0;

pub fn spec(json: &str) -> SynthSpec {
    serde_json::from_str(json).expect("fixture spec parses")
}

/// The end-to-end fixtures: four clean jaws and the awkward cases.
pub fn fixtures() -> Vec<(&'static str, SynthSpec)> {
    vec![
        ("adult upper", spec(r#"{"jaw_kind":"adult-upper","seed":2}"#)),
        ("adult lower", spec(r#"{"jaw_kind":"adult-lower","seed":1}"#)),
        ("deciduous upper", spec(r#"{"jaw_kind":"deciduous-upper","seed":4}"#)),
        ("deciduous lower", spec(r#"{"jaw_kind":"deciduous-lower","seed":3}"#)),
        ("two missing", spec(r#"{"jaw_kind":"adult-lower","seed":11,"missing":["LR5","LL2"]}"#)),
        ("split molar", spec(r#"{"jaw_kind":"adult-upper","seed":12,"split":["UL6"]}"#)),
        ("partial molar", spec(r#"{"jaw_kind":"adult-lower","seed":13,"partial":["LR7"]}"#)),
        ("crowding", spec(r#"{"jaw_kind":"adult-upper","seed":14,"crowding":1.0}"#)),
        ("cheek", spec(r#"{"jaw_kind":"adult-lower","seed":15,"cheek_fragment":true}"#)),
        (
            "combined",
            spec(
                r#"{"jaw_kind":"adult-lower","seed":7,"missing":["LR5","LL2"],"split":["LL6"],
                "partial":["LR7"],"crowding":1.0,"cheek_fragment":true}"#,
            ),
        ),
        ("deciduous split", spec(r#"{"jaw_kind":"deciduous-lower","seed":8,"split":["LLE"],"partial":["LRE"]}"#)),
    ]
}

/// Round-trips the mesh through binary STL, as a real scan would arrive.
pub fn stl_mesh(model: &SynthModel) -> (Vec<u8>, IndexedMesh) {
    let bytes = write_binary_stl(&model.mesh.to_soup());
    let mesh = index_mesh(&parse_stl(&bytes).unwrap(), IndexOptions::default()).unwrap();
    (bytes, mesh)
}

pub fn run_spec(spec: &SynthSpec) -> (SynthModel, IndexedMesh, Analysis) {
    let model = generate(spec).unwrap();
    let (_, mesh) = stl_mesh(&model);
    let analysis = run_mesh(&mesh, spec.jaw_kind);
    (model, mesh, analysis)
}

pub fn run_mesh(mesh: &IndexedMesh, jaw: JawKind) -> Analysis {
    let config = PipelineConfig::new(jaw);
    let db = TrainingDatabase::shipped(jaw).unwrap();
    analyze(mesh, "fixture", &config, &db)
}

/// Labels, flags and landmark kinds in arch order, plus landmark positions
/// one-to-one within [`TRUTH_TOLERANCE`].
pub fn compare_with_truth(report: &LandmarkReport, truth: &SynthTruth) -> Result<(), String> {
    if let Some(f) = &report.stage_failure {
        return Err(format!("{:?} stage failed: {}", f.stage, f.message));
    }
    let got: Vec<&str> = report.teeth.iter().map(|t| t.code.as_str()).collect();
    let want: Vec<&str> = truth.expected.iter().map(|t| t.code.as_str()).collect();
    if got != want {
        return Err(format!("labels {got:?}, expected {want:?}"));
    }
    for (t, e) in report.teeth.iter().zip(&truth.expected) {
        if (t.partial, t.anomalous) != (e.partial, e.anomalous) {
            return Err(format!(
                "{}: partial/anomalous {:?}, expected {:?}",
                t.code,
                (t.partial, t.anomalous),
                (e.partial, e.anomalous)
            ));
        }
        if t.landmark_missing || t.landmarks.is_empty() {
            return Err(format!("{}: no landmarks", t.code));
        }
        if let Some(l) = t.landmarks.iter().find(|l| l.kind != e.landmark_kind) {
            return Err(format!("{}: landmark kind {:?}, expected {:?}", t.code, l.kind, e.landmark_kind));
        }
        if t.landmarks.len() != e.landmarks.len() {
            return Err(format!("{}: {} landmarks, expected {}", t.code, t.landmarks.len(), e.landmarks.len()));
        }
        let mut free: Vec<bool> = vec![true; e.landmarks.len()];
        for l in &t.landmarks {
            let best = e
                .landmarks
                .iter()
                .enumerate()
                .filter(|(i, _)| free[*i])
                .map(|(i, x)| (i, (x.position - l.position).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((i, d)) if d <= TRUTH_TOLERANCE => free[i] = false,
                Some((_, d)) => return Err(format!("{}: landmark {:?} is {d:.2} mm from the nearest truth", t.code, l.position)),
                None => unreachable!("counts match"),
            }
        }
    }
    Ok(())
}
