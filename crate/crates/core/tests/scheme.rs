use kdl_core::analysis::{discrepancy, moments};
use kdl_core::operators::stream;
use kdl_core::phase_space::{decode_snapshot, encode_snapshot, read_snapshot};
use kdl_core::scheme::{step_index, trajectory_at};
use kdl_core::{
    BoundaryMode, DistributionField, GaussianMixture, GaussianSpec, KernelSpec, Scheme, SchemeParams,
    SpatialPartition, SphereQuadrature, StreamOptions, VelocityGrid,
};

fn grids() -> (SpatialPartition, VelocityGrid) {
    (
        SpatialPartition::new(1.0, 4, 2).unwrap(),
        VelocityGrid::new(2.5, 4).unwrap(),
    )
}

fn data() -> GaussianMixture {
    GaussianMixture::new(vec![GaussianSpec {
        amplitude: 0.3,
        alpha: 2.0,
        tau: 2.0,
        center_x: [0.1, 0.0, -0.1],
        center_v: [0.2, 0.0, 0.1],
    }])
}

fn params(dt: f64, horizon: f64, b0: f64) -> SchemeParams {
    SchemeParams::new(
        dt,
        horizon,
        KernelSpec::maxwell(b0).unwrap(),
        SphereQuadrature::new(2, 4).unwrap(),
    )
}

#[test]
fn collisionless_step_is_pure_streaming() {
    let (p, g) = grids();
    let f0 = data().sample(&p, &g).unwrap();
    let scheme = Scheme::new(params(0.1, 0.3, 0.0), g).unwrap();
    let f1 = scheme.step(&f0, 1).unwrap();
    let streamed = stream(&f0, 0.1, StreamOptions::default());
    assert_eq!(f1.values(), streamed.values());
}

#[test]
fn zero_data_stays_zero() {
    let (p, g) = grids();
    let zero = DistributionField::zeros(p, g);
    let traj = Scheme::new(params(0.05, 0.2, 1.0), g).unwrap().run(&zero).unwrap();
    assert_eq!(traj.steps, 4);
    assert!(traj.last().unwrap().values().iter().all(|&v| v == 0.0));
}

#[test]
fn trajectory_is_piecewise_constant() {
    let (p, g) = grids();
    let f0 = data().sample(&p, &g).unwrap();
    let traj = Scheme::new(params(0.05, 0.15, 1.0), g).unwrap().run(&f0).unwrap();
    assert_eq!(traj.steps, 3);
    assert_eq!(traj.diagnostics.len(), 4);
    assert_eq!(step_index(0.05, 0.15, 0.0).unwrap(), 1);
    assert_eq!(step_index(0.05, 0.15, 0.05).unwrap(), 2);
    assert_eq!(step_index(0.05, 0.15, 0.149).unwrap(), 3);
    assert!(step_index(0.05, 0.15, 0.15).is_err());
    let a = trajectory_at(&traj, 0.06).unwrap();
    let b = trajectory_at(&traj, 0.099).unwrap();
    assert_eq!(a.values(), b.values());
    assert_eq!(a.values(), traj.snapshot(2).unwrap().values());
}

#[test]
fn periodic_uniform_maxwellian_moves_far_less_than_a_bimodal_state() {
    let p = SpatialPartition::new(1.0, 2, 1).unwrap();
    let g = VelocityGrid::new(3.0, 8).unwrap();
    let relative_change = |f0: &DistributionField| {
        let mut prm = params(0.05, 0.2, 1.0);
        prm.stream.boundary = BoundaryMode::Periodic;
        let traj = Scheme::new(prm, g).unwrap().run(f0).unwrap();
        let last = traj.last().unwrap();
        assert!(discrepancy(last, f0).unwrap().value < 0.1);
        last.sub(f0).unwrap().l1() / f0.l1()
    };
    let maxwellian = GaussianSpec::centered(0.5, 0.0, 1.0).sample(&p, &g).unwrap();
    let bump = |c: f64| GaussianSpec {
        amplitude: 0.5,
        alpha: 0.0,
        tau: 3.0,
        center_x: [0.0; 3],
        center_v: [c, 0.0, 0.0],
    };
    let bimodal = GaussianMixture::new(vec![bump(0.8), bump(-0.8)]).sample(&p, &g).unwrap();
    let scale = maxwellian.l1() / bimodal.l1();
    let (a, b) = (relative_change(&maxwellian), relative_change(&bimodal.scaled(scale)));
    assert!(a < 0.25 * b, "{a} vs {b}");
}

#[test]
fn moment_fix_preserves_collision_invariants() {
    let (p, g) = grids();
    let f0 = data().sample(&p, &g).unwrap();
    let mut prm = params(0.05, 0.1, 1.0);
    prm.moment_fix = true;
    prm.stream.boundary = BoundaryMode::Periodic;
    let f1 = Scheme::new(prm, g).unwrap().step(&f0, 1).unwrap();
    let (a, b) = (moments(&f0).as_array(), moments(&f1).as_array());
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-12 * a[0].abs().max(a[4].abs()), "{a:?} vs {b:?}");
    }
}

#[test]
fn snapshots_round_trip() {
    let (p, g) = grids();
    let f = data().sample(&p, &g).unwrap();
    let bytes = encode_snapshot(&f);
    assert_eq!(&bytes[..4], b"KDL1");
    assert_eq!(decode_snapshot(&bytes).unwrap().dims, [4, 4, 4, 4, 4, 4]);
    assert_eq!(read_snapshot(&bytes, &p, &g).unwrap().values(), f.values());
    let other = VelocityGrid::new(2.5, 5).unwrap();
    assert!(read_snapshot(&bytes, &p, &other).is_err());
    assert!(decode_snapshot(&bytes[..bytes.len() - 1]).is_err());
}

#[test]
fn runs_are_reproducible() {
    let (p, g) = grids();
    let f0 = data().sample(&p, &g).unwrap();
    let scheme = Scheme::new(params(0.05, 0.1, 1.0), g).unwrap();
    let a = scheme.run(&f0).unwrap();
    let b = scheme.run(&f0).unwrap();
    assert_eq!(a.last().unwrap().values(), b.last().unwrap().values());
}
