use cellgraph::scene::{sample_point, stream_rng};
use cellgraph::{
    generate_samples, shoemake_quaternion, signature, tree_edges, Constraint, ParallelConfig,
    SampleConfig, SampleMode, Scene,
};
use rand::Rng;

fn triangle_scene(bounds: Vec<(f64, f64)>) -> Scene {
    let lines = vec![
        Constraint::new(vec![1.0, 0.0], -5.0).unwrap(),
        Constraint::new(vec![0.0, 1.0], -2.0).unwrap(),
        Constraint::new(vec![-1.0, -1.0], 11.0).unwrap(),
    ];
    Scene::new(2, lines, bounds).unwrap()
}

#[test]
fn labelled_points_land_in_their_cells() {
    let scene = triangle_scene(vec![(0.0, 12.0), (0.0, 9.0)]);
    for (p, want) in [
        ([6.0, 4.0], "111"),
        ([6.5, 6.5], "110"),
        ([11.0, 1.5], "100"),
        ([6.0, 1.0], "101"),
    ] {
        assert_eq!(signature(&scene, &p).unwrap().to_string(), want);
    }
}

#[test]
fn empty_cell_never_sampled_and_four_cycle_found() {
    let scene = triangle_scene(vec![(0.0, 12.0), (0.0, 9.0)]);
    let set = generate_samples(
        &scene,
        &SampleConfig::new(100_000, 5, SampleMode::BoxUniform).unwrap(),
    )
    .unwrap();
    let rows: std::collections::BTreeSet<String> = set.iter().map(|v| v.to_string()).collect();
    assert!(!rows.contains("000"));
    assert_eq!(rows.len(), 7);

    let narrow = triangle_scene(vec![(5.0, 12.0), (0.0, 9.0)]);
    let set = generate_samples(
        &narrow,
        &SampleConfig::new(20_000, 9, SampleMode::BoxUniform).unwrap(),
    )
    .unwrap();
    let g = tree_edges(&set, 1, &ParallelConfig::sequential()).unwrap();
    let names: Vec<String> = g.vertices().iter().map(|v| v.to_string()).collect();
    assert_eq!(names, ["100", "101", "110", "111"]);
    // 100-101, 100-110, 101-111, 110-111
    assert_eq!(g.edges().pairs(), &[(0, 1), (0, 2), (1, 3), (2, 3)]);
    assert_eq!(g.degrees(), vec![2; 4]);
}

#[test]
fn shoemake_quaternions_are_uniform() {
    const N: usize = 100_000;
    let mut sums = [0.0f64; 4];
    let mut squares = [0.0f64; 4];
    for i in 0..N {
        let mut rng = stream_rng(42, i as u64);
        let q = shoemake_quaternion(rng.gen(), rng.gen(), rng.gen()).unwrap();
        let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() <= 1e-12, "norm {norm}");
        for k in 0..4 {
            sums[k] += q[k];
            squares[k] += q[k] * q[k];
        }
    }
    for k in 0..4 {
        let mean = sums[k] / N as f64;
        // each component has variance 1/4 on the unit 3-sphere
        let se = (0.25 / N as f64).sqrt();
        assert!(mean.abs() < 5.0 * se, "component {k} mean {mean}");
        let second = squares[k] / N as f64;
        assert!(
            (second - 0.25).abs() < 0.01,
            "component {k} second moment {second}"
        );
    }
}

#[test]
fn quaternion_mode_needs_four_dimensions() {
    let scene = triangle_scene(vec![(0.0, 1.0), (0.0, 1.0)]);
    assert!(generate_samples(
        &scene,
        &SampleConfig::new(10, 0, SampleMode::QuaternionUniform).unwrap()
    )
    .is_err());
}

#[test]
fn samples_are_reproducible_per_index() {
    let scene = triangle_scene(vec![(0.0, 12.0), (0.0, 9.0)]);
    let cfg = SampleConfig::new(500, 17, SampleMode::BoxUniform).unwrap();
    let a = generate_samples(&scene, &cfg).unwrap();
    let b = generate_samples(&scene, &cfg).unwrap();
    assert_eq!(a, b);
    let longer = generate_samples(
        &scene,
        &SampleConfig::new(800, 17, SampleMode::BoxUniform).unwrap(),
    )
    .unwrap();
    for i in 0..500 {
        assert_eq!(a.get(i), longer.get(i));
    }
    let p = sample_point(&scene, &cfg, 3);
    assert!((0.0..=12.0).contains(&p[0]) && (0.0..=9.0).contains(&p[1]));
}
