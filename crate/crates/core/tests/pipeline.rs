use cwd::cost::cost_matrix;
use cwd::synth;
use cwd::transport::{dissimilarity_matrix, prepare_surface, DistanceParams};
use cwd::uniformization::{uniformize, ConformalDensity, FlatteningMap, UniformizeParams, Variant};

fn small() -> DistanceParams {
    DistanceParams { samples: 25, quad_h: 0.08, rotations: 16, ..DistanceParams::default() }
}

#[test]
fn map_and_density_round_trip_through_json() {
    let mesh = synth::bumpy_disk(10, 3, 0.2, 4).normalize_area().unwrap();
    let u = uniformize(&mesh, &UniformizeParams::default()).unwrap();
    let map: FlatteningMap = serde_json::from_str(&serde_json::to_string(&u.map).unwrap()).unwrap();
    let density: ConformalDensity = serde_json::from_str(&serde_json::to_string(&u.density).unwrap()).unwrap();
    assert_eq!(map.phi, u.map.phi);
    for z in [cwd::C64::new(0.1, -0.2), cwd::C64::new(-0.5, 0.3)] {
        assert_eq!(
            density.eval(z, Variant::Hyperbolic).unwrap(),
            u.density.eval(z, Variant::Hyperbolic).unwrap()
        );
    }
}

#[test]
fn cost_assembly_ignores_thread_count() {
    let params = small();
    let cfg = params.cost_config().unwrap();
    let a = prepare_surface(&synth::bumpy_disk(10, 3, 0.2, 1), &params).unwrap();
    let b = prepare_surface(&synth::bumpy_disk(10, 3, 0.2, 2), &params).unwrap();
    let build = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            cost_matrix(&a.uniformized.density, &b.uniformized.density, &a.measure.points, &b.measure.points, &cfg)
                .unwrap()
        })
    };
    let (one, four) = (build(1), build(4));
    assert_eq!(one.costs.iter().map(|c| c.to_bits()).collect::<Vec<_>>(), four.costs.iter().map(|c| c.to_bits()).collect::<Vec<_>>());
    assert_eq!(one.argmin, four.argmin);
}

#[test]
fn dissimilarity_is_a_normalized_symmetric_matrix() {
    let meshes: Vec<_> = (0..3).map(|k| synth::bumpy_disk(10, 3, 0.2, 10 + k)).collect();
    let d = dissimilarity_matrix(&meshes, &small()).unwrap();
    assert_eq!(d.raw, d.raw.transpose());
    let off: Vec<f64> = (0..3).flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j))).map(|p| d.normalized[p]).collect();
    assert_eq!(off.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
    assert_eq!(off.iter().copied().fold(0.0, f64::max), 1.0);
    assert!((0..3).all(|i| d.normalized[(i, i)] == 0.0));
}
