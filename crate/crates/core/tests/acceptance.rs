//! Acceptance checks, one PASS/FAIL line each. Exits nonzero if any fail.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use archmark_core::assignment::{
    cost_metric, objective, solve_assignment, tooth_types, CostTable, JawKind, MolarRole, ToothType, TrainingDatabase,
};
use archmark_core::curvature::{crease_costs, edge_curvatures, EdgeCurvatureMap};
use archmark_core::landmarks::Landmark;
use archmark_core::mesh::testing::{height_field, icosphere};
use archmark_core::mesh::{IndexedMesh, NO_FACE};
use archmark_core::orientation::{orient, refine_vertical, Frame};
use archmark_core::peaks::{filter_by_height, find_peaks, Peak};
use archmark_core::pipeline::{analyze, load_mesh, PipelineConfig};
use archmark_core::segmentation::{flood_all, flood_fill, segment_at, RejectReason, SegmentationConfig};
use archmark_core::synth::generate;
use archmark_core::Vec3;
use common::{compare_with_truth, fixtures, run_mesh, stl_mesh};
use nalgebra::{Rotation3, Unit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn main() -> ExitCode {
    let checks: [(&str, Check); 9] = [
        ("flood fill matches a shortest-path oracle", shortest_path_oracle),
        ("assignment matches exhaustive enumeration", exhaustive_assignment),
        ("curvature on a sphere and a right-angle valley", analytic_curvature),
        ("cost metric zero at the mean, non-negative, scale free", cost_metric_properties),
        ("orientation recovered under rigid motion", orientation_recovery),
        ("synthetic jaws labeled and landmarked end to end", end_to_end),
        ("height and steep-neighbor thresholds", cleaning_thresholds),
        ("reports are byte-identical across runs and thread counts", determinism),
        ("landmarks move with the model", landmark_equivariance),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} ({secs:.1} s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} ({secs:.1} s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} criteria failed", checks.len());
        ExitCode::FAILURE
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_rotation(rng: &mut impl Rng) -> Rotation3<f64> {
    let axis = loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if (0.01..=1.0).contains(&v.norm_squared()) {
            break v;
        }
    };
    Rotation3::from_axis_angle(&Unit::new_normalize(axis), rng.random_range(0.0..std::f64::consts::PI))
}

fn random_shift(rng: &mut impl Rng) -> Vec3 {
    Vec3::new(rng.random_range(-80.0..80.0), rng.random_range(-80.0..80.0), rng.random_range(-80.0..80.0))
}

fn peak_at(mesh: &IndexedMesh, v: usize, frame: &Frame) -> Peak {
    Peak {
        vertex: v as u32,
        position: mesh.vertices[v],
        height: frame.height(&mesh.vertices[v]),
    }
}

// 1

/// Random symmetric edge costs on the mesh's face graph.
fn random_costs(mesh: &IndexedMesh, rng: &mut impl Rng) -> EdgeCurvatureMap {
    let mut map = crease_costs(mesh);
    for f in 0..mesh.face_count() {
        for k in 0..3 {
            let g = mesh.adjacency[f][k];
            if g == NO_FACE || (g as usize) < f {
                continue;
            }
            let c = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..1.0) };
            map.cost[f][k] = Some(c);
            let back = mesh.adjacency[g as usize].iter().position(|&h| h as usize == f).unwrap();
            map.cost[g as usize][back] = Some(c);
        }
    }
    map
}

/// Ordered-set Dijkstra; distances at or above `cap` are dropped.
fn oracle_distances(mesh: &IndexedMesh, costs: &EdgeCurvatureMap, seeds: &[u32], cap: f64) -> Vec<Option<f64>> {
    let n = mesh.face_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut queue = BTreeSet::new();
    for &s in seeds {
        dist[s as usize] = 0.0;
        queue.insert((0u64, s as usize));
    }
    // Non-negative floats order like their bit patterns.
    while let Some((bits, u)) = queue.pop_first() {
        let d = f64::from_bits(bits);
        if d > dist[u] {
            continue;
        }
        for k in 0..3 {
            let Some(c) = costs.cost[u][k] else { continue };
            let v = mesh.adjacency[u][k] as usize;
            let nd = d + c;
            if nd < dist[v] {
                queue.remove(&(dist[v].to_bits(), v));
                dist[v] = nd;
                queue.insert((nd.to_bits(), v));
            }
        }
    }
    dist.into_iter().map(|d| (d < cap).then_some(d)).collect()
}

fn shortest_path_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let frame = Frame::identity();
    let mut largest = 0;
    let mut members = 0;
    for case in 0..100 {
        let nx = rng.random_range(4..=32usize);
        let ny_max = (1000 / (nx - 1) + 1).min(40);
        let ny = rng.random_range(3..=ny_max);
        let amp = rng.random_range(0.0..2.0);
        let (a, b) = (rng.random_range(0.1..1.5), rng.random_range(0.1..1.5));
        let mesh = height_field(nx, ny, 0.7, |x, y| amp * (a * x).sin() * (b * y).cos());
        largest = largest.max(mesh.face_count());
        let costs = random_costs(&mesh, &mut rng);
        let v = rng.random_range(0..mesh.vertex_count());
        let cap = rng.random_range(0.1..4.0);
        let region = flood_fill(&mesh, &costs, &frame, 0, &peak_at(&mesh, v, &frame), cap, f64::INFINITY);
        let expect = oracle_distances(&mesh, &costs, mesh.vertex_faces(v), cap);
        let mut got = vec![None; mesh.face_count()];
        for (&f, &t) in region.faces.iter().zip(&region.costs) {
            got[f as usize] = Some(t);
        }
        for f in 0..mesh.face_count() {
            match (got[f], expect[f]) {
                (None, None) => {}
                (Some(g), Some(e)) if (g - e).abs() <= 1e-9 => {}
                (g, e) => return Err(format!("case {case}, face {f}: flood {g:?}, oracle {e:?}")),
            }
        }
        members += region.faces.len();
    }
    ensure(largest <= 2000, || format!("graph with {largest} faces"))?;
    Ok(format!("100 graphs up to {largest} faces, {members} face distances agree"))
}

// 2

/// Best objective over every ordered, conflict-free partial matching.
fn enumerate_best(costs: &[Vec<f64>], priors: &[f64], types: &[ToothType], fussiness: f64) -> f64 {
    fn walk(
        i: usize,
        next: usize,
        chosen: &mut Vec<Option<usize>>,
        ctx: &(&[Vec<f64>], &[f64], &[ToothType], f64),
        best: &mut f64,
    ) {
        let (costs, priors, types, fussiness) = *ctx;
        if i == costs.len() {
            let v = objective(costs, priors, fussiness, chosen);
            if v < *best {
                *best = v;
            }
            return;
        }
        chosen.push(None);
        walk(i + 1, next, chosen, ctx, best);
        chosen.pop();
        for t in next..types.len() {
            if chosen.iter().flatten().any(|&u| types[u].conflicts_with(&types[t])) {
                continue;
            }
            chosen.push(Some(t));
            walk(i + 1, t + 1, chosen, ctx, best);
            chosen.pop();
        }
    }
    let mut best = f64::INFINITY;
    walk(0, 0, &mut Vec::new(), &(costs, priors, types, fussiness), &mut best);
    best
}

fn exhaustive_assignment() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut with_halves = 0;
    for case in 0..200 {
        let jaw = JawKind::ALL[case % 4];
        let all = tooth_types(jaw);
        let n = rng.random_range(1..=8usize);
        let start = rng.random_range(0..=all.len() - n);
        let types = &all[start..start + n];
        if types.iter().any(|t| t.role == MolarRole::Whole) && types.iter().any(ToothType::is_half) {
            with_halves += 1;
        }
        let mut db = TrainingDatabase::shipped(jaw).map_err(|e| e.to_string())?;
        for entry in db.types.values_mut() {
            entry.prior = rng.random_range(0.0..1.0);
        }
        let m = rng.random_range(0..=6usize);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| if rng.random_bool(0.2) { rng.random_range(0.0..40.0) } else { rng.random_range(0.0..4.0) }).collect())
            .collect();
        let fussiness = if case % 2 == 0 { 8.0 } else { rng.random_range(0.0..15.0) };
        let table = CostTable { rows };
        let got = solve_assignment(&table, types, &db, fussiness).map_err(|e| format!("case {case}: {e}"))?;
        let priors: Vec<f64> = types.iter().map(|t| db.prior(t)).collect();
        let best = enumerate_best(&table.rows, &priors, types, fussiness);
        ensure(got.objective.to_bits() == best.to_bits(), || {
            format!("case {case}: solver {} vs enumeration {best}", got.objective)
        })?;
    }
    ensure(with_halves >= 20, || format!("only {with_halves} tables had half-molar triples"))?;
    Ok(format!("200 tables, {with_halves} with half-molar types, objectives identical"))
}

// 3

fn analytic_curvature() -> Result<String, String> {
    let sphere = icosphere(10.0, 4);
    let map = edge_curvatures(&sphere);
    let vals: Vec<f64> = map.signed.iter().flatten().flatten().copied().collect();
    let positive = vals.iter().filter(|&&k| k > 0.0).count();
    let mean = vals.iter().map(|k| k.abs()).sum::<f64>() / vals.len() as f64;
    ensure(positive == vals.len(), || format!("{} of {} edges not positive", vals.len() - positive, vals.len()))?;
    ensure((0.095..=0.105).contains(&mean), || format!("sphere mean |k| {mean}"))?;

    // Two faces meeting at 90° along the y axis, opening upwards.
    let v = vec![
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(-1.0, 0.5, 1.0),
        Vec3::new(1.0, 0.5, 1.0),
    ];
    let valley = IndexedMesh::from_parts(v, vec![[1, 0, 2], [0, 1, 3]]).map_err(|e| e.to_string())?;
    let up = valley.face_normals.iter().all(|n| n.z > 0.0);
    let angle = valley.face_normals[0].angle(&valley.face_normals[1]).to_degrees();
    ensure(up && (angle - 90.0).abs() < 1e-9, || format!("valley fixture: normals up {up}, angle {angle}"))?;
    let d = (valley.face_centroids[0] - valley.face_centroids[1]).norm();
    let k = edge_curvatures(&valley).signed[0].iter().flatten().copied().next().ok_or("valley edge missing")?;
    let want = -1.0 / d;
    ensure(((k - want) / want).abs() <= 0.01, || format!("valley k {k}, want {want}"))?;
    Ok(format!("sphere mean |k| {mean:.4} over {} edges; valley {k:.4} vs {want:.4}", vals.len()))
}

// 4

fn cost_metric_properties() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_scale = 0.0f64;
    for case in 0..50 {
        let k = rng.random_range(2..20usize);
        let centre = rng.random_range(0.1..300.0);
        let spread = rng.random_range(0.01..0.5) * centre;
        let mut r: Vec<f64> = (0..k).map(|_| centre + rng.random_range(-spread..spread)).collect();
        if r.iter().all(|&x| x == r[0]) {
            r[0] += spread;
        }
        let mean = r.iter().sum::<f64>() / k as f64;
        let at_mean = cost_metric(mean, &r).ok_or("degenerate references")?;
        ensure(at_mean < 1e-9, || format!("case {case}: C(mean) = {at_mean}"))?;
        let s = rng.random_range(0.01..100.0);
        let scaled: Vec<f64> = r.iter().map(|x| x * s).collect();
        let (lo, hi) = (centre - 4.0 * spread - 10.0, centre + 4.0 * spread + 10.0);
        for g in 0..1000 {
            let t = lo + (hi - lo) * g as f64 / 999.0;
            let c = cost_metric(t, &r).ok_or("degenerate references")?;
            ensure(c >= 0.0, || format!("case {case}: C({t}) = {c}"))?;
            let cs = cost_metric(t * s, &scaled).ok_or("degenerate scaled references")?;
            let rel = (c - cs).abs() / c.abs().max(f64::MIN_POSITIVE);
            if c > 1e-6 {
                worst_scale = worst_scale.max(rel);
            }
            ensure(rel <= 1e-9 || (c - cs).abs() <= 1e-9, || format!("case {case}: C {c} vs scaled {cs}"))?;
        }
    }
    Ok(format!("50 reference vectors × 1000 points; worst relative scale error {worst_scale:.1e}"))
}

// 5

fn pipeline_frame(mesh: &IndexedMesh) -> Result<Frame, String> {
    let f = orient(mesh).map_err(|e| e.to_string())?;
    Ok(refine_vertical(mesh, &f).frame)
}

fn orientation_recovery() -> Result<String, String> {
    let model = generate(&common::spec(r#"{"jaw_kind":"adult-lower","seed":21}"#)).map_err(|e| e.to_string())?;
    let [right, forwards, up] = model.truth.axes;
    let truth = Frame {
        right,
        forwards,
        up,
        occlusal: up,
        origin: Vec3::zeros(),
    };
    let base = pipeline_frame(&model.mesh)?;
    let base_err = base.max_axis_angle_deg(&truth);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = base_err;
    for run in 0..50 {
        let rot = random_rotation(&mut rng);
        let shift = random_shift(&mut rng);
        let moved = model.mesh.map_vertices(|p| rot * p + shift);
        let f = pipeline_frame(&moved).map_err(|e| format!("motion {run}: {e}"))?;
        let det = f.determinant();
        ensure((det - 1.0).abs() < 1e-9, || format!("motion {run}: determinant {det}"))?;
        let err = f.max_axis_angle_deg(&truth.transformed(&rot, &shift));
        worst = worst.max(err);
        ensure(err <= 0.5, || format!("motion {run}: axes off by {err:.3}°"))?;
    }
    Ok(format!("50 motions, worst axis error {worst:.3}° (unmoved {base_err:.3}°), det +1"))
}

// 6

fn end_to_end() -> Result<String, String> {
    let mut slowest = (0.0f64, "", 0);
    let mut failures = Vec::new();
    let mut count = 0;
    for (name, spec) in fixtures() {
        let model = generate(&spec).map_err(|e| format!("{name}: {e}"))?;
        let (_, mesh) = stl_mesh(&model);
        let start = Instant::now();
        let analysis = run_mesh(&mesh, spec.jaw_kind);
        let secs = start.elapsed().as_secs_f64();
        if secs > slowest.0 {
            slowest = (secs, name, mesh.face_count());
        }
        if secs >= 30.0 {
            failures.push(format!("{name}: {secs:.1} s"));
        }
        if let Err(e) = compare_with_truth(&analysis.report, &model.truth) {
            failures.push(format!("{name}: {e}"));
        }
        let report = &analysis.report;
        match name {
            "cheek" | "combined" => {
                let apex = model.truth.cheek_apex.ok_or("fixture has no cheek")?;
                let boundary = report.diagnostics.rejected_groups.iter().any(|g| {
                    g.reason == RejectReason::TouchesBoundary && g.peaks.iter().any(|p| (p.xy() - apex.xy()).norm() < 3.0)
                });
                if !boundary {
                    failures.push(format!("{name}: cheek fragment not rejected at the boundary"));
                }
            }
            "split molar" | "deciduous split" => {
                let code = if name == "split molar" { "UL6" } else { "LLE" };
                let teeth: Vec<_> = report.teeth.iter().filter(|t| t.code == code).collect();
                let merged = teeth.len() == 1
                    && teeth[0].parts.len() == 2
                    && teeth[0].parts.iter().all(|p| p.code.starts_with(code))
                    && !teeth[0].partial;
                if !merged {
                    failures.push(format!("{name}: {code} not merged into one tooth"));
                }
            }
            _ => {}
        }
        count += 1;
    }

    // One model near 100k faces for the time limit.
    let mut big = common::spec(r#"{"jaw_kind":"adult-upper","seed":31,"third_molars":true}"#);
    big.grid_spacing = 0.42;
    let model = generate(&big).map_err(|e| e.to_string())?;
    let (_, mesh) = stl_mesh(&model);
    let start = Instant::now();
    let analysis = run_mesh(&mesh, big.jaw_kind);
    let big_secs = start.elapsed().as_secs_f64();
    if big_secs >= 30.0 {
        failures.push(format!("{} faces took {big_secs:.1} s", mesh.face_count()));
    }
    if let Err(e) = compare_with_truth(&analysis.report, &model.truth) {
        failures.push(format!("large model: {e}"));
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(format!(
        "{count} fixtures exact; slowest {} ({} faces) {:.1} s; {} faces in {big_secs:.1} s",
        slowest.1, slowest.2, slowest.0,
        mesh.face_count()
    ))
}

// 7

const DOME_HEIGHT: f64 = 8.0;
const BUMP_HEIGHT: f64 = 3.0;

/// Five tall narrow domes along a gentle curve, a small bump `run` mm in
/// front of the middle one, and two knobs 6 mm and 5.875 mm below the top.
fn threshold_field(run: f64) -> IndexedMesh {
    let domes: Vec<(f64, f64)> = [6.0, 14.0, 22.0, 30.0, 38.0]
        .iter()
        .map(|&x: &f64| (x, 14.0 + ((x - 22.0) / 8.0).powi(2)))
        .collect();
    let bump = (22.0, 14.0 - run);
    let knobs = [(4.0, 3.0, DOME_HEIGHT - 6.0), (40.0, 3.0, DOME_HEIGHT - 5.875)];
    height_field(353, 209, 0.125, move |x, y| {
        let cap = |cx: f64, cy: f64, r: f64, h: f64| {
            let d2 = (x - cx).powi(2) + (y - cy).powi(2);
            (h * (1.0 - d2 / (r * r))).max(0.0)
        };
        let mut z = cap(bump.0, bump.1, 0.75, BUMP_HEIGHT);
        for &(cx, cy) in &domes {
            z = z.max(cap(cx, cy, 1.5, DOME_HEIGHT));
        }
        for &(cx, cy, h) in &knobs {
            z = z.max(cap(cx, cy, 0.75, h));
        }
        z
    })
}

fn bump_fate(run: f64) -> Result<(f64, Option<RejectReason>, bool), String> {
    let mesh = threshold_field(run);
    let frame = Frame::identity();
    let config = PipelineConfig::new(JawKind::AdultLower);
    let peaks = filter_by_height(&find_peaks(&mesh, &frame), config.height_threshold_mm);
    let bump = peaks
        .iter()
        .position(|p| (p.height - BUMP_HEIGHT).abs() < 1e-12)
        .ok_or("bump peak not found")?;
    let seg: SegmentationConfig = config.segmentation();
    let threshold = 0.5;
    let floods = flood_all(&mesh, &crease_costs(&mesh), &frame, &peaks, threshold, seg.spill_radius);
    let stage = segment_at(&mesh, &frame, &peaks, &floods, threshold, &seg).map_err(|e| e.to_string())?;
    let reason = stage.rejected.iter().find(|g| g.peaks.contains(&bump)).map(|g| g.reason);
    let kept = stage.blobs.iter().any(|b| b.peaks.contains(&bump));
    let ratio = (DOME_HEIGHT - BUMP_HEIGHT) / run;
    Ok((ratio, reason, kept))
}

fn cleaning_thresholds() -> Result<String, String> {
    let mesh = threshold_field(2.5);
    let frame = Frame::identity();
    let config = PipelineConfig::new(JawKind::AdultLower);
    let all = find_peaks(&mesh, &frame);
    let kept = filter_by_height(&all, config.height_threshold_mm);
    let has = |list: &[Peak], h: f64| list.iter().any(|p| (p.height - h).abs() < 1e-12);
    let (at, inside) = (DOME_HEIGHT - 6.0, DOME_HEIGHT - 5.875);
    ensure(has(&all, at) && has(&all, inside), || "knob peaks not found".into())?;
    ensure(!has(&kept, at), || "peak exactly 6 mm below the top was kept".into())?;
    ensure(has(&kept, inside), || "peak 5.875 mm below the top was dropped".into())?;

    let (steep, steep_reason, steep_kept) = bump_fate(2.5)?;
    ensure((steep - 2.0).abs() < 1e-12, || format!("ratio {steep}"))?;
    ensure(matches!(steep_reason, Some(RejectReason::SteepNeighbor { .. })) && !steep_kept, || {
        format!("ratio 2.0 bump: {steep_reason:?}, kept {steep_kept}")
    })?;
    let (gentle, gentle_reason, gentle_kept) = bump_fate(5.0)?;
    ensure((gentle - 1.0).abs() < 1e-12, || format!("ratio {gentle}"))?;
    ensure(gentle_reason.is_none() && gentle_kept, || format!("ratio 1.0 bump: {gentle_reason:?}, kept {gentle_kept}"))?;
    Ok("6 mm excluded, 5.875 mm kept; ratio 2.0 rejected as steep, ratio 1.0 kept".into())
}

// 8

fn determinism() -> Result<String, String> {
    let (_, spec) = fixtures().into_iter().find(|(n, _)| *n == "combined").ok_or("no combined fixture")?;
    let model = generate(&spec).map_err(|e| e.to_string())?;
    let (bytes, _) = stl_mesh(&model);
    let config = PipelineConfig::new(spec.jaw_kind);
    let db = TrainingDatabase::shipped(spec.jaw_kind).map_err(|e| e.to_string())?;
    let run = || -> Result<String, String> {
        let mesh = load_mesh(&bytes, &config).map_err(|e| e.to_string())?;
        Ok(analyze(&mesh, "determinism", &config, &db).report.to_json())
    };
    let first = run()?;
    let mut runs = 1;
    for _ in 0..2 {
        ensure(run()? == first, || format!("run {} differs", runs + 1))?;
        runs += 1;
    }
    for threads in [1, 2, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        ensure(pool.install(run)? == first, || format!("{threads}-thread report differs"))?;
        runs += 1;
    }
    Ok(format!("{runs} runs on 1, 2, 4 and default threads, {} identical bytes", first.len()))
}

// 9

fn landmark_equivariance() -> Result<String, String> {
    let (_, spec) = fixtures().into_iter().find(|(n, _)| *n == "adult upper").ok_or("no adult upper fixture")?;
    let model = generate(&spec).map_err(|e| e.to_string())?;
    let (_, mesh) = stl_mesh(&model);
    let base = run_mesh(&mesh, spec.jaw_kind).report;
    let original: Vec<(&str, &Landmark)> =
        base.teeth.iter().flat_map(|t| t.landmarks.iter().map(move |l| (t.code.as_str(), l))).collect();
    ensure(!original.is_empty(), || "no landmarks on the unmoved model".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for run in 0..20 {
        let rot = random_rotation(&mut rng);
        let shift = random_shift(&mut rng);
        let moved = run_mesh(&mesh.map_vertices(|p| rot * p + shift), spec.jaw_kind).report;
        let got: Vec<(&str, &Landmark)> =
            moved.teeth.iter().flat_map(|t| t.landmarks.iter().map(move |l| (t.code.as_str(), l))).collect();
        ensure(got.len() == original.len(), || format!("motion {run}: {} landmarks, expected {}", got.len(), original.len()))?;
        let mut free = vec![true; got.len()];
        for (code, l) in &original {
            let want = rot * l.position + shift;
            let best = got
                .iter()
                .enumerate()
                .filter(|(i, (c, g))| free[*i] && c == code && g.kind == l.kind)
                .map(|(i, (_, g))| (i, (g.position - want).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((i, d)) if d <= 0.5 => {
                    free[i] = false;
                    worst = worst.max(d);
                }
                Some((_, d)) => return Err(format!("motion {run}: {code} landmark off by {d:.3} mm")),
                None => return Err(format!("motion {run}: no {code} {:?} landmark", l.kind)),
            }
        }
    }
    Ok(format!("20 motions, {} landmarks each, worst {worst:.2e} mm", original.len()))
}
