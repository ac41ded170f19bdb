//! Synthetic jaws with known tooth labels, for tests, benchmarks and the
//! bundled reference data.

mod shapes;
pub mod training;

pub use training::{train_synthetic, training_specs, TrainingError, TrainingSummary};

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::{tooth_class, JawKind, MolarRole, Side, ToothClass, ToothType};
use crate::landmarks::LandmarkKind;
use crate::mesh::{IndexedMesh, MeshError};
use crate::{Vec2, Vec3};

pub use shapes::{ArchShape, Body, Cusp, Gum, LINGUAL_TAPER, RIM_DROP, WALL_SLOPE};

/// Height of every full crown's highest cusp, mm.
pub const CROWN_TOP: f64 = 10.0;
/// Gum ridge height; more than the peak height threshold below the crowns.
pub const GUM_HEIGHT: f64 = 3.5;
const GUM_FLAT: f64 = 8.0;
const GUM_FALLOFF: f64 = 5.0;
const MAX_VERTICES: usize = 4_000_000;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("`{0}` is not a tooth of this jaw")]
    UnknownTooth(String),
    #[error("`{0}` is not a molar that can be split")]
    NotSplittable(String),
    #[error("grid spacing must be positive and give at most {MAX_VERTICES} vertices")]
    BadGrid,
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

fn default_spacing() -> f64 {
    0.3
}

fn default_jitter() -> f64 {
    0.03
}

fn default_gap() -> f64 {
    2.0
}

/// What to generate. Tooth lists take whole codes such as `LR6`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub jaw_kind: JawKind,
    #[serde(default)]
    pub seed: u64,
    /// Include third molars (adult jaws).
    #[serde(default)]
    pub third_molars: bool,
    /// Teeth left out, leaving a gap.
    #[serde(default)]
    pub missing: Vec<String>,
    /// Molars built as two halves with a deep groove between them.
    #[serde(default)]
    pub split: Vec<String>,
    /// Molars of which only the mesial half shows.
    #[serde(default)]
    pub partial: Vec<String>,
    /// Molars of which only the distal half shows.
    #[serde(default)]
    pub distal_only: Vec<String>,
    /// Incisor displacement, mm. Neighbors start to overlap above zero.
    #[serde(default)]
    pub crowding: f64,
    /// A scrap of cheek cut by the front edge of the scan.
    #[serde(default)]
    pub cheek_fragment: bool,
    /// Relative spread of tooth sizes.
    #[serde(default = "default_jitter")]
    pub size_jitter: f64,
    /// Space between neighboring crowns, mm.
    #[serde(default = "default_gap")]
    pub gap: f64,
    #[serde(default = "default_spacing")]
    pub grid_spacing: f64,
}

impl SynthSpec {
    pub fn new(jaw_kind: JawKind, seed: u64) -> SynthSpec {
        SynthSpec {
            jaw_kind,
            seed,
            third_molars: false,
            missing: Vec::new(),
            split: Vec::new(),
            partial: Vec::new(),
            distal_only: Vec::new(),
            crowding: 0.0,
            cheek_fragment: false,
            size_jitter: default_jitter(),
            gap: default_gap(),
            grid_spacing: default_spacing(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthLandmark {
    pub kind: LandmarkKind,
    pub position: Vec3,
}

/// One generated body: a crown or half a molar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthBody {
    /// Type code; halves carry `.0` (mesial) or `.1` (distal).
    pub code: String,
    pub whole_code: String,
    pub centre: Vec3,
    pub landmarks: Vec<TruthLandmark>,
}

/// A tooth as the pipeline should report it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedTooth {
    pub code: String,
    pub partial: bool,
    pub anomalous: bool,
    pub landmark_kind: LandmarkKind,
    pub landmarks: Vec<TruthLandmark>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub jaw_kind: JawKind,
    /// Generator axes: right, forwards, up.
    pub axes: [Vec3; 3],
    pub bodies: Vec<TruthBody>,
    /// Expected teeth in arch order (increasing x).
    pub expected: Vec<ExpectedTooth>,
    /// Apex of the cheek scrap, if any.
    pub cheek_apex: Option<Vec3>,
    /// Per face: index into `bodies`, or none for gum, floor and cheek.
    #[serde(skip)]
    pub face_labels: Vec<Option<usize>>,
}

#[derive(Debug, Clone)]
pub struct SynthModel {
    pub mesh: IndexedMesh,
    pub truth: SynthTruth,
}

/// Mean (mesiodistal, buccolingual) crown size, mm.
fn crown_size(jaw: JawKind, tooth: char) -> (f64, f64) {
    match (jaw, tooth) {
        (JawKind::AdultLower, '1') => (5.4, 5.8),
        (JawKind::AdultLower, '2') => (5.9, 6.2),
        (JawKind::AdultLower, '3') => (6.9, 7.5),
        (JawKind::AdultLower, '4') => (7.0, 7.7),
        (JawKind::AdultLower, '5') => (7.6, 8.3),
        (JawKind::AdultLower, '6') => (11.2, 10.3),
        (JawKind::AdultLower, '7') => (10.3, 10.0),
        (JawKind::AdultLower, _) => (9.4, 9.2),
        (JawKind::AdultUpper, '1') => (8.6, 7.0),
        (JawKind::AdultUpper, '2') => (6.6, 6.2),
        (JawKind::AdultUpper, '3') => (7.6, 8.1),
        (JawKind::AdultUpper, '4') => (7.1, 9.2),
        (JawKind::AdultUpper, '5') => (6.5, 8.8),
        (JawKind::AdultUpper, '6') => (10.4, 11.5),
        (JawKind::AdultUpper, '7') => (9.5, 11.1),
        (JawKind::AdultUpper, _) => (8.6, 10.4),
        (JawKind::DeciduousLower, 'A') => (4.2, 4.0),
        (JawKind::DeciduousLower, 'B') => (4.7, 4.4),
        (JawKind::DeciduousLower, 'C') => (5.8, 5.2),
        (JawKind::DeciduousLower, 'D') => (7.8, 7.0),
        (JawKind::DeciduousLower, _) => (9.9, 8.7),
        (JawKind::DeciduousUpper, 'A') => (6.5, 5.1),
        (JawKind::DeciduousUpper, 'B') => (5.2, 4.8),
        (JawKind::DeciduousUpper, 'C') => (6.8, 7.0),
        (JawKind::DeciduousUpper, 'D') => (7.1, 8.5),
        (JawKind::DeciduousUpper, _) => (8.9, 10.0),
    }
}

fn arch_curvature(jaw: JawKind) -> f64 {
    if jaw.is_adult() {
        0.035
    } else {
        0.05
    }
}

/// Cusps for a crown of the given class, in body coordinates.
fn cusps_for(class: ToothClass, half_md: f64, half_bl: f64) -> Vec<Cusp> {
    match class {
        ToothClass::Incisor => vec![Cusp {
            stretch: 3.0,
            ..Cusp::round(0.0, 0.0, 0.0, 0.5, 8.0)
        }],
        ToothClass::Canine => vec![Cusp::round(0.0, 0.0, 0.0, 1.2, 1.2)],
        ToothClass::Premolar => vec![
            Cusp::round(0.0, 0.3 * half_bl, 0.0, 0.6, 5.0),
            Cusp::round(0.0, -0.3 * half_bl, -0.4, 0.6, 5.0),
        ],
        ToothClass::Molar => {
            let (u, v) = (0.44 * half_md, 0.4 * half_bl);
            vec![
                Cusp::round(-u, v, 0.0, 0.5, 8.0),
                Cusp::round(u, v, -0.05, 0.5, 8.0),
                Cusp::round(-u, -v, -0.3, 0.5, 8.0),
                Cusp::round(u, -v, -0.35, 0.5, 8.0),
            ]
        }
    }
}

/// Cusps of half a molar, centred on the half.
fn half_cusps(half_bl: f64) -> Vec<Cusp> {
    let v = 0.4 * half_bl;
    vec![Cusp::round(0.0, v, 0.0, 0.5, 8.0), Cusp::round(0.0, -v, -0.3, 0.5, 8.0)]
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Render {
    Whole,
    Split,
    MesialOnly,
    DistalOnly,
}

struct Slot {
    ty: ToothType,
    render: Option<Render>,
    md: f64,
    bl: f64,
}

fn whole_type(jaw: JawKind, code: &str) -> Option<ToothType> {
    crate::assignment::tooth_types(jaw)
        .into_iter()
        .find(|t| !t.is_half() && t.code == code)
}

/// Builds the mesh and its ground truth.
pub fn generate(spec: &SynthSpec) -> Result<SynthModel, SynthError> {
    let jaw = spec.jaw_kind;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut render: BTreeMap<String, Render> = BTreeMap::new();
    let lists = [
        (&spec.split, Render::Split),
        (&spec.partial, Render::MesialOnly),
        (&spec.distal_only, Render::DistalOnly),
    ];
    for (codes, how) in lists {
        for code in codes {
            let t = whole_type(jaw, code).ok_or_else(|| SynthError::UnknownTooth(code.clone()))?;
            if !jaw.split_molars().contains(&t.tooth) {
                return Err(SynthError::NotSplittable(code.clone()));
            }
            render.insert(code.clone(), how);
        }
    }
    for code in &spec.missing {
        whole_type(jaw, code).ok_or_else(|| SynthError::UnknownTooth(code.clone()))?;
    }

    let teeth: Vec<char> = jaw
        .teeth()
        .iter()
        .copied()
        .filter(|&t| t != '8' || spec.third_molars)
        .collect();
    let positive_side = if jaw.is_upper() { Side::Left } else { Side::Right };
    let negative_side = if jaw.is_upper() { Side::Right } else { Side::Left };

    let arch = ArchShape {
        a: arch_curvature(jaw),
        vertex_y: 0.0,
    };
    let spread = spec.size_jitter * 3f64.sqrt();
    let mut bodies: Vec<(Body, String, String)> = Vec::new();
    for (side, sign) in [(negative_side, -1.0), (positive_side, 1.0)] {
        let mut s = 0.5 * spec.gap;
        for &tooth in &teeth {
            let role = if jaw.split_molars().contains(&tooth) {
                MolarRole::Whole
            } else {
                MolarRole::None
            };
            let ty = ToothType::new(jaw, side, tooth, role);
            let (md0, bl0) = crown_size(jaw, tooth);
            let md = md0 * (1.0 + rng.random_range(-spread..=spread));
            let bl = bl0 * (1.0 + rng.random_range(-spread..=spread));
            let slot = Slot {
                render: if spec.missing.contains(&ty.code) {
                    None
                } else {
                    Some(render.get(&ty.code).copied().unwrap_or(Render::Whole))
                },
                ty,
                md,
                bl,
            };
            let incisor = tooth_class(tooth) == ToothClass::Incisor;
            let overlap = if incisor { spec.crowding } else { 0.0 };
            let centre_s = s + 0.5 * slot.md - 0.5 * overlap;
            s = centre_s + 0.5 * slot.md + spec.gap - 0.5 * overlap;
            let x = arch.x_at(centre_s);
            let (p, t, n) = arch.frame_at(x);
            let (mut centre, mut distal, buccal) = (
                Vec2::new(sign * p.x, p.y),
                Vec2::new(sign * t.x, t.y),
                Vec2::new(sign * n.x, n.y),
            );
            if incisor && spec.crowding > 0.0 {
                let flip = if (slot.ty.ordinal as usize + (sign > 0.0) as usize) % 2 == 0 { 1.0 } else { -1.0 };
                centre += buccal * (flip * spec.crowding);
                let angle: f64 = flip * 0.1 * spec.crowding;
                distal = nalgebra::Rotation2::new(angle) * distal;
            }
            let buccal = if sign > 0.0 {
                Vec2::new(-distal.y, distal.x)
            } else {
                Vec2::new(distal.y, -distal.x)
            };
            let Some(how) = slot.render else { continue };
            let class = tooth_class(tooth);
            let (half_md, half_bl) = (0.5 * slot.md, 0.5 * slot.bl);
            let whole = Body {
                centre,
                distal,
                buccal,
                half_md,
                half_bl,
                top: CROWN_TOP,
                taper: LINGUAL_TAPER,
                cusps: cusps_for(class, half_md, half_bl),
            };
            let half = |mesial: bool, lowered: f64| {
                let q = 0.5 * half_md;
                let offset = if mesial { -q } else { q };
                Body {
                    centre: centre + distal * offset,
                    half_md: q - 0.25 * spec.gap.max(0.2),
                    top: CROWN_TOP - lowered,
                    taper: 0.0,
                    cusps: half_cusps(half_bl),
                    ..whole.clone()
                }
            };
            let code = |role| ToothType::new(jaw, side, tooth, role).code;
            let whole_code = slot.ty.code.clone();
            match how {
                Render::Whole => bodies.push((whole, slot.ty.code.clone(), whole_code)),
                Render::Split => {
                    bodies.push((half(true, 0.0), code(MolarRole::MesialHalf), whole_code.clone()));
                    bodies.push((half(false, 0.0), code(MolarRole::DistalHalf), whole_code));
                }
                Render::MesialOnly => bodies.push((half(true, 1.0), code(MolarRole::MesialHalf), whole_code)),
                Render::DistalOnly => bodies.push((half(false, 1.0), code(MolarRole::DistalHalf), whole_code)),
            }
        }
    }

    bodies.sort_by(|a, b| a.0.centre.x.total_cmp(&b.0.centre.x));

    let gum = Gum {
        arch,
        height: GUM_HEIGHT,
        flat: GUM_FLAT,
        falloff: GUM_FALLOFF,
    };
    let margin = 5.0;
    let reach = |b: &Body| b.half_md.max(b.half_bl) + (CROWN_TOP - RIM_DROP) / WALL_SLOPE;
    let x_extent = bodies.iter().map(|(b, ..)| b.centre.x.abs() + reach(b)).fold(0.0, f64::max) + margin;
    let y_low = bodies.iter().map(|(b, ..)| b.centre.y - reach(b)).fold(0.0, f64::min) - margin;
    let y_high = bodies.iter().map(|(b, ..)| b.centre.y + reach(b)).fold(0.0, f64::max)
        + if spec.cheek_fragment { 6.0 } else { margin };

    let cheek = spec.cheek_fragment.then(|| Body {
        centre: Vec2::new(0.35 * x_extent, y_high - 1.0),
        distal: Vec2::x(),
        buccal: Vec2::y(),
        half_md: 4.0,
        half_bl: 3.0,
        top: CROWN_TOP - 2.0,
        taper: LINGUAL_TAPER,
        cusps: vec![Cusp::round(0.0, -1.0, 0.0, 0.8, 3.0)],
    });

    let h = spec.grid_spacing;
    if !(h > 0.0) {
        return Err(SynthError::BadGrid);
    }
    let half_nx = (x_extent / h).ceil() as usize;
    let nx = 2 * half_nx + 1;
    let ny = ((y_high - y_low) / h).ceil() as usize + 1;
    if nx.saturating_mul(ny) > MAX_VERTICES {
        return Err(SynthError::BadGrid);
    }
    let x0 = -(half_nx as f64) * h;

    let surface = |p: Vec2| -> (f64, Option<usize>, bool) {
        let mut best = gum.height(p).max(0.0);
        let mut owner = None;
        for (k, (b, ..)) in bodies.iter().enumerate() {
            let z = b.height(p);
            if z > best {
                best = z;
                owner = Some(k);
            }
        }
        let mut on_cheek = false;
        if let Some(c) = &cheek {
            let z = c.height(p);
            if z > best {
                best = z;
                owner = None;
                on_cheek = true;
            }
        }
        (best, owner, on_cheek)
    };

    let mut vertices = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p = Vec2::new(x0 + i as f64 * h, y_low + j as f64 * h);
            vertices.push(Vec3::new(p.x, p.y, surface(p).0));
        }
    }
    let id = |i: usize, j: usize| (j * nx + i) as u32;
    let mut faces = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            // Alternate the diagonal so the grid is mirror symmetric in x.
            if (i < half_nx) == (j % 2 == 0) {
                faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            } else {
                faces.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
                faces.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
    }
    let mesh = IndexedMesh::from_parts(vertices, faces)?;
    let face_labels = mesh
        .face_centroids
        .iter()
        .map(|c| surface(Vec2::new(c.x, c.y)).1)
        .collect();

    let truth_bodies: Vec<TruthBody> = bodies
        .iter()
        .map(|(b, code, whole_code)| TruthBody {
            code: code.clone(),
            whole_code: whole_code.clone(),
            centre: Vec3::new(b.centre.x, b.centre.y, b.top),
            landmarks: body_landmarks(b, code),
        })
        .collect();
    let expected = expected_teeth(&truth_bodies);
    let cheek_apex = cheek.as_ref().map(|c| {
        let (p, z) = c.cusp_apex(&c.cusps[0]);
        Vec3::new(p.x, p.y, z)
    });
    Ok(SynthModel {
        mesh,
        truth: SynthTruth {
            jaw_kind: jaw,
            axes: [Vec3::x(), Vec3::y(), Vec3::z()],
            bodies: truth_bodies,
            expected,
            cheek_apex,
            face_labels,
        },
    })
}

fn tooth_char(code: &str) -> char {
    code.chars().nth(2).expect("codes have a tooth character")
}

fn body_landmarks(b: &Body, code: &str) -> Vec<TruthLandmark> {
    let class = tooth_class(tooth_char(code));
    let kind = crate::landmarks::LandmarkKind::for_class(class);
    let apex = |c: &Cusp| {
        let (p, z) = b.cusp_apex(c);
        Vec3::new(p.x, p.y, z)
    };
    match class {
        ToothClass::Incisor | ToothClass::Canine => vec![TruthLandmark {
            kind,
            position: apex(&b.cusps[0]),
        }],
        _ => {
            let mut buccal: Vec<&Cusp> = b.cusps.iter().filter(|c| c.v > 0.0).collect();
            buccal.sort_by(|a, c| a.u.total_cmp(&c.u));
            buccal.into_iter().map(|c| TruthLandmark { kind, position: apex(c) }).collect()
        }
    }
}

fn expected_teeth(bodies: &[TruthBody]) -> Vec<ExpectedTooth> {
    let mut order: Vec<String> = Vec::new();
    let mut by_whole: BTreeMap<String, Vec<&TruthBody>> = BTreeMap::new();
    for b in bodies {
        if !by_whole.contains_key(&b.whole_code) {
            order.push(b.whole_code.clone());
        }
        by_whole.entry(b.whole_code.clone()).or_default().push(b);
    }
    order
        .into_iter()
        .map(|whole| {
            let members = &by_whole[&whole];
            let mesial = members.iter().any(|b| b.code.ends_with(".0"));
            let distal = members.iter().any(|b| b.code.ends_with(".1"));
            let anomalous = distal && !mesial;
            let class = tooth_class(tooth_char(&whole));
            ExpectedTooth {
                code: if anomalous { members[0].code.clone() } else { whole.clone() },
                partial: mesial && !distal,
                anomalous,
                landmark_kind: LandmarkKind::for_class(class),
                landmarks: members.iter().flat_map(|b| b.landmarks.iter().cloned()).collect(),
            }
        })
        .collect()
}
