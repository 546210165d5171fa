use std::f64::consts::PI;

use super::*;
use crate::phase_space::{GaussianSpec, SpatialPartition, VelocityGrid};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Direct evaluation of a tensor interpolant at grid coordinates `pos`.
fn naive_interp(vals: &[f64], n: usize, pos: [f64; 3], mode: GainInterpolation) -> f64 {
    let get = |idx: [i64; 3]| -> f64 {
        if idx.iter().all(|&k| (0..n as i64).contains(&k)) {
            vals[(idx[0] as usize * n + idx[1] as usize) * n + idx[2] as usize]
        } else {
            0.0
        }
    };
    let base = pos.map(|p| p.floor() as i64);
    let t = [0, 1, 2].map(|d| pos[d] - base[d] as f64);
    let (offs, w): (Vec<i64>, [Vec<f64>; 3]) = match mode {
        GainInterpolation::Trilinear => (vec![0, 1], t.map(|t| vec![1.0 - t, t])),
        GainInterpolation::MonotoneCubic => (
            vec![-1, 0, 1, 2],
            t.map(|t| {
                vec![
                    -t * (t - 1.0) * (t - 2.0) / 6.0,
                    (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
                    -(t + 1.0) * t * (t - 2.0) / 2.0,
                    (t + 1.0) * t * (t - 1.0) / 6.0,
                ]
            }),
        ),
    };
    let mut acc = 0.0;
    for (a, &oa) in offs.iter().enumerate() {
        for (b, &ob) in offs.iter().enumerate() {
            for (c, &oc) in offs.iter().enumerate() {
                acc += w[0][a] * w[1][b] * w[2][c] * get([base[0] + oa, base[1] + ob, base[2] + oc]);
            }
        }
    }
    if mode == GainInterpolation::MonotoneCubic {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for corner in 0..8 {
            let v = get([0, 1, 2].map(|d| base[d] + ((corner >> d) & 1) as i64));
            lo = lo.min(v);
            hi = hi.max(v);
        }
        acc = acc.max(lo).min(hi);
    }
    acc
}

/// Gain term by direct summation over `(v, v*, omega)`.
fn naive_gain(
    g: &[f64],
    h: &[f64],
    grid: &VelocityGrid,
    spec: &KernelSpec,
    quad: &SphereQuadrature,
    mode: GainInterpolation,
) -> Vec<f64> {
    let n = grid.nodes_per_axis();
    let hv = grid.spacing();
    let to_pos = |v: [f64; 3]| v.map(|x| (x + grid.v_max()) / hv - 0.5);
    let a0 = spec.b0 * hv.powf(3.0 - spec.lambda) * cell_singular_average(spec.lambda);
    (0..grid.len())
        .map(|i| {
            let v = grid.node(i);
            let mut acc = a0 * g[i] * h[i];
            for k in 0..grid.len() {
                if k == i {
                    continue;
                }
                let vs = grid.node(k);
                let s = ((0..3).map(|d| (v[d] - vs[d]).powi(2)).sum::<f64>()).sqrt();
                let b = spec.angular_total(s) / (4.0 * PI);
                for (w, om) in quad.weights().iter().zip(quad.nodes()) {
                    let (vp, vsp) = post_collision(v, vs, *om);
                    acc += w * b * grid.weight()
                        * naive_interp(g, n, to_pos(vp), mode)
                        * naive_interp(h, n, to_pos(vsp), mode);
                }
            }
            acc
        })
        .collect()
}

fn one_cell(n: usize, v_max: f64) -> (SpatialPartition, VelocityGrid) {
    (
        SpatialPartition::new(1.0, 1, 1).unwrap(),
        VelocityGrid::new(v_max, n).unwrap(),
    )
}

#[test]
fn swap_for_parallel_omega() {
    let (vp, vsp) = post_collision([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
    assert_eq!(vp, [-1.0, 0.0, 0.0]);
    assert_eq!(vsp, [1.0, 0.0, 0.0]);
}

#[test]
fn post_collision_conserves_momentum_and_energy() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let v: [f64; 3] = [0, 1, 2].map(|_| rng.gen_range(-3.0..3.0));
        let vs: [f64; 3] = [0, 1, 2].map(|_| rng.gen_range(-3.0..3.0));
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..2.0 * PI);
        let r = (1.0 - z * z).sqrt();
        let om = [r * phi.cos(), r * phi.sin(), z];
        let (vp, vsp) = post_collision(v, vs, om);
        for d in 0..3 {
            assert!((vp[d] + vsp[d] - v[d] - vs[d]).abs() < 1e-14);
        }
        let e0: f64 = (0..3).map(|d| v[d] * v[d] + vs[d] * vs[d]).sum();
        let e1: f64 = (0..3).map(|d| vp[d] * vp[d] + vsp[d] * vsp[d]).sum();
        assert!((e0 - e1).abs() < 1e-14 * e0.max(1.0) * 4.0);
    }
}

#[test]
fn gain_matches_direct_summation() {
    let (p, grid) = one_cell(5, 2.0);
    let quad = SphereQuadrature::new(2, 4).unwrap();
    let g = GaussianSpec {
        amplitude: 1.0,
        alpha: 0.0,
        tau: 0.7,
        center_x: [0.0; 3],
        center_v: [0.3, -0.2, 0.1],
    }
    .sample(&p, &grid)
    .unwrap();
    let h = DistributionField::from_fn(p, grid, |_, v| 1.0 + 0.2 * v[0] - 0.1 * v[1] * v[2]).unwrap();
    for spec in [KernelSpec::maxwell(1.0).unwrap(), KernelSpec::soft(0.8, 1.2).unwrap()] {
        for mode in [GainInterpolation::Trilinear, GainInterpolation::MonotoneCubic] {
            let op = CollisionOperator::new(spec, &quad, grid, mode).unwrap();
            let fast = op.gain(&g, &h).unwrap();
            let slow = naive_gain(g.values(), h.values(), &grid, &spec, &quad, mode);
            for (a, b) in fast.values().iter().zip(&slow) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-3), "{mode:?}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn chunked_and_single_cell_paths_agree() {
    let p = SpatialPartition::new(1.0, 2, 1).unwrap();
    let grid = VelocityGrid::new(2.0, 4).unwrap();
    let quad = SphereQuadrature::new(2, 4).unwrap();
    let g = DistributionField::from_fn(p, grid, |x, v| (1.0 + x[0] * 0.3 + x[2] * 0.1) * (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp()).unwrap();
    let op = CollisionOperator::new(KernelSpec::maxwell(1.0).unwrap(), &quad, grid, GainInterpolation::MonotoneCubic).unwrap();
    let whole = op.collision(&g).unwrap();
    for cell in 0..p.fine_len() {
        let (p1, _) = one_cell(4, 2.0);
        let single = DistributionField::new(p1, grid, g.cell(cell).to_vec()).unwrap();
        let j = op.collision(&single).unwrap();
        assert_eq!(j.values(), whole.cell(cell));
    }
}

#[test]
fn zero_inputs_give_zero() {
    let (p, grid) = one_cell(4, 2.0);
    let quad = SphereQuadrature::new(2, 4).unwrap();
    let spec = KernelSpec::maxwell(1.0).unwrap();
    let zero = DistributionField::zeros(p, grid);
    let g = GaussianSpec::centered(1.0, 0.0, 1.0).sample(&p, &grid).unwrap();
    assert!(loss_term(&g, &zero, &spec, &quad).unwrap().values().iter().all(|&v| v == 0.0));
    assert!(gain_term(&zero, &zero, &spec, &quad).unwrap().values().iter().all(|&v| v == 0.0));
    assert!(collision(&zero, &spec, &quad).unwrap().values().iter().all(|&v| v == 0.0));
    assert!(homogenized_collision(&zero, &spec, &quad).unwrap().values().iter().all(|&v| v == 0.0));
    assert!(collision_frequency(&zero, &spec, &quad).unwrap().values().iter().all(|&v| v == 0.0));
}

#[test]
fn loss_against_unit_maxwellian_is_identity() {
    let (p, grid) = one_cell(16, 5.0);
    let quad = SphereQuadrature::new(2, 4).unwrap();
    let spec = KernelSpec::maxwell(1.0).unwrap();
    let unit = GaussianSpec::centered(PI.powf(-1.5), 0.0, 1.0).sample(&p, &grid).unwrap();
    let g = DistributionField::from_fn(p, grid, |_, v| 1.0 + v[0] * v[0]).unwrap();
    let s = loss_term(&g, &unit, &spec, &quad).unwrap();
    for (a, b) in s.values().iter().zip(g.values()) {
        assert!(rel(*a, *b) < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn maxwell_frequency_is_cell_density() {
    let p = SpatialPartition::new(1.0, 4, 2).unwrap();
    let grid = VelocityGrid::new(2.0, 4).unwrap();
    let quad = SphereQuadrature::new(2, 4).unwrap();
    let spec = KernelSpec::maxwell(1.0).unwrap();
    let g = DistributionField::from_fn(p, grid, |x, v| (2.0 + x[0] + x[1] * x[2]) * (1.0 + 0.1 * v[1] * v[1])).unwrap();
    let e = collision_frequency(&g, &spec, &quad).unwrap();
    let pg = homogenize(&g);
    for c in 0..p.fine_len() {
        let rho: f64 = pg.cell(c).iter().sum::<f64>() * grid.weight();
        for &val in e.cell(c) {
            assert!(rel(val, rho) < 1e-12);
        }
    }
    let neg = g.scaled(-1.0);
    assert!(matches!(collision_frequency(&neg, &spec, &quad), Err(Error::Precondition(_))));
}

#[test]
fn homogenized_collision_equals_collision_on_piecewise_constant_fields() {
    let p = SpatialPartition::new(1.0, 2, 2).unwrap();
    let grid = VelocityGrid::new(2.0, 4).unwrap();
    let quad = SphereQuadrature::new(2, 4).unwrap();
    let spec = KernelSpec::soft(1.0, 0.5).unwrap();
    let g = GaussianSpec::centered(1.0, 0.0, 1.0).sample(&p, &grid).unwrap();
    assert_eq!(
        homogenized_collision(&g, &spec, &quad).unwrap(),
        collision(&g, &spec, &quad).unwrap()
    );
}

#[test]
fn defect_vanishes_at_zero_times_with_unit_blocks() {
    let p = SpatialPartition::new(1.0, 2, 1).unwrap();
    let grid = VelocityGrid::new(2.0, 4).unwrap();
    let quad = SphereQuadrature::new(2, 4).unwrap();
    let spec = KernelSpec::maxwell(1.0).unwrap();
    let g = DistributionField::from_fn(p, grid, |x, v| (1.0 + x[0]) * (-(v[0] * v[0] + v[2] * v[2])).exp()).unwrap();
    let d = defect(&g, &g, 0.0, 0.0, &spec, &quad, StreamOptions::default()).unwrap();
    assert!(d.values().iter().all(|&v| v == 0.0));
}

#[test]
fn gain_and_loss_are_order_preserving_with_trilinear() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let (p, grid) = one_cell(4, 2.0);
    let quad = SphereQuadrature::new(2, 4).unwrap();
    let op = CollisionOperator::new(KernelSpec::soft(1.0, 1.0).unwrap(), &quad, grid, GainInterpolation::Trilinear).unwrap();
    for _ in 0..10 {
        let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
            DistributionField::new(p, grid, (0..grid.len()).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap()
        };
        let g1 = mk(&mut rng);
        let bump = mk(&mut rng);
        let g2 = g1.add(&bump).unwrap();
        let h = mk(&mut rng);
        for (lo, hi) in [
            (op.gain(&g1, &h).unwrap(), op.gain(&g2, &h).unwrap()),
            (op.gain(&h, &g1).unwrap(), op.gain(&h, &g2).unwrap()),
            (op.loss(&g1, &h).unwrap(), op.loss(&g2, &h).unwrap()),
            (op.loss(&h, &g1).unwrap(), op.loss(&h, &g2).unwrap()),
        ] {
            for (a, b) in lo.values().iter().zip(hi.values()) {
                assert!(a <= b);
            }
        }
    }
}

#[test]
fn monotone_cubic_gain_is_nonnegative() {
    let (p, grid) = one_cell(8, 2.5);
    let quad = SphereQuadrature::new(3, 6).unwrap();
    let g = GaussianSpec {
        amplitude: 1.0,
        alpha: 0.0,
        tau: 1.5,
        center_x: [0.0; 3],
        center_v: [0.4, 0.0, -0.3],
    }
    .sample(&p, &grid)
    .unwrap();
    let gain = gain_term(&g, &g, &KernelSpec::maxwell(1.0).unwrap(), &quad).unwrap();
    assert!(gain.is_nonnegative());
}

#[test]
fn singular_cell_average() {
    assert_eq!(cell_singular_average(0.0), 1.0);
    // Monte Carlo free check: midpoint refinement of the cube integral.
    let lambda = 1.0;
    let m = 200;
    let mut acc = 0.0;
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let z = [a, b, c].map(|k| (k as f64 + 0.5) / m as f64 - 0.5);
                acc += (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).powf(-0.5 * lambda);
            }
        }
    }
    acc /= (m * m * m) as f64;
    assert!(rel(cell_singular_average(lambda), acc) < 1e-3);
}

#[test]
fn collisionless_kernel_gives_zero() {
    let (p, grid) = one_cell(4, 2.0);
    let quad = SphereQuadrature::new(2, 4).unwrap();
    let g = GaussianSpec::centered(1.0, 0.0, 1.0).sample(&p, &grid).unwrap();
    let j = collision(&g, &KernelSpec::maxwell(0.0).unwrap(), &quad).unwrap();
    assert!(j.values().iter().all(|&v| v == 0.0));
}
