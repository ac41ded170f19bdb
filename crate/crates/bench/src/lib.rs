//! Shared inputs for the benchmarks in `benches/`.

use archmark_core::assignment::JawKind;
use archmark_core::mesh::{index_mesh, parse_stl, write_binary_stl, IndexOptions, IndexedMesh};
use archmark_core::synth::{generate, SynthSpec};

/// A clean synthetic jaw, round-tripped through binary STL.
/// `spacing` is the mesh grid spacing in mm; smaller gives more faces.
pub fn jaw(kind: JawKind, seed: u64, spacing: f64) -> (Vec<u8>, IndexedMesh) {
    let mut spec = SynthSpec::new(kind, seed);
    spec.grid_spacing = spacing;
    let model = generate(&spec).expect("benchmark spec is valid");
    let bytes = write_binary_stl(&model.mesh.to_soup());
    let mesh = index_mesh(&parse_stl(&bytes).expect("own output parses"), IndexOptions::default()).expect("indexes");
    (bytes, mesh)
}
