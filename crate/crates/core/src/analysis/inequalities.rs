use std::f64::consts::{E, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::ConstantsReport;
use crate::error::{config_err, Result};
use crate::kernels::{KernelSpec, SphereQuadrature};
use crate::operators::{homogenize, stream, CollisionOperator, GainInterpolation, StreamOptions};
use crate::phase_space::{norm_sq, DistributionField, GaussianMixture, SpatialPartition, VelocityGrid};

use super::family::FamilySpec;
use super::norms::{b_norm, m_norm};

/// The inequalities checked by [`verify_inequalities`], in report order.
pub const INEQUALITY_IDS: [&str; 16] = [
    "bilinear_weighted_sup",
    "bilinear_l1",
    "collision_lipschitz_b",
    "homogenized_lipschitz_b",
    "collision_lipschitz_m",
    "collision_lipschitz_l1",
    "homogenized_lipschitz_l1",
    "collision_growth_b",
    "collision_growth_m",
    "collision_growth_l1",
    "homogenization_defect_b",
    "homogenization_defect_l1",
    "streaming_defect_b",
    "streaming_defect_l1",
    "key_defect_b",
    "key_defect_l1",
];

/// A seeded campaign over random Gaussian mixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    pub family: FamilySpec,
    pub trials: usize,
    pub seed: u64,
    /// Rate of the `B` and `M` norms; must match the constants.
    pub tau: f64,
    /// Smaller rate of the defect estimates; must match the constants.
    pub sigma: f64,
    /// Streaming times `t, s` are drawn from `[-max_time, max_time]`.
    pub max_time: f64,
    #[serde(default)]
    pub interpolation: GainInterpolation,
    #[serde(default)]
    pub stream: StreamOptions,
}

/// Outcome for one inequality over all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityVerdict {
    pub id: String,
    pub trials: usize,
    /// Largest `lhs - rhs`, clipped at 0.
    pub max_violation: f64,
    /// Tolerance of the trial closest to failing.
    pub tolerance: f64,
    /// Largest `lhs / rhs` seen; how tight the bound is in practice.
    pub max_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    lhs: f64,
    rhs: f64,
}

impl Sample {
    fn gap(&self) -> f64 {
        self.lhs - self.rhs
    }
}

#[derive(Debug, Clone)]
struct Accumulator {
    id: &'static str,
    trials: usize,
    max_violation: f64,
    worst_margin: f64,
    tolerance: f64,
    max_ratio: f64,
}

impl Accumulator {
    fn new(id: &'static str) -> Self {
        Self {
            id,
            trials: 0,
            max_violation: 0.0,
            worst_margin: f64::NEG_INFINITY,
            tolerance: 0.0,
            max_ratio: 0.0,
        }
    }

    fn push(&mut self, full: Sample, half: Sample) {
        let tol = (full.gap() - half.gap()).abs() + 1e-8 * full.rhs.abs();
        let violation = full.gap().max(0.0);
        self.trials += 1;
        self.max_violation = self.max_violation.max(violation);
        if violation - tol > self.worst_margin {
            self.worst_margin = violation - tol;
            self.tolerance = tol;
        }
        if full.rhs > 0.0 {
            self.max_ratio = self.max_ratio.max(full.lhs / full.rhs);
        } else if full.lhs > 0.0 {
            self.max_ratio = f64::INFINITY;
        }
    }

    fn verdict(&self) -> InequalityVerdict {
        InequalityVerdict {
            id: self.id.to_string(),
            trials: self.trials,
            max_violation: self.max_violation,
            tolerance: self.tolerance,
            max_ratio: self.max_ratio,
            pass: self.worst_margin <= 0.0,
        }
    }
}

/// `max |g| exp(alpha x^2 + tau v^2)`.
pub fn weighted_sup(g: &DistributionField, alpha: f64, tau: f64) -> f64 {
    let w: Vec<f64> = g.grid().nodes().iter().map(|&v| (tau * norm_sq(v)).exp()).collect();
    (0..g.n_cells())
        .map(|c| {
            let wx = (alpha * norm_sq(g.partition().center(c))).exp();
            g.cell(c).iter().zip(&w).fold(0.0f64, |m, (f, w)| m.max(f.abs() * w)) * wx
        })
        .fold(0.0, f64::max)
}

fn kernel_of(c: &ConstantsReport) -> Result<KernelSpec> {
    if c.inputs.lambda == 0.0 {
        KernelSpec::maxwell(c.inputs.b0)
    } else {
        KernelSpec::soft(c.inputs.b0, c.inputs.lambda)
    }
}

fn check_consistency(spec: &CampaignSpec, c: &ConstantsReport, partition: &SpatialPartition) -> Result<()> {
    spec.family.validate()?;
    let tol = 1e-12;
    if (spec.tau - c.inputs.tau).abs() > tol * c.inputs.tau
        || (spec.sigma - c.inputs.sigma).abs() > tol * c.inputs.sigma
    {
        return Err(config_err(format!(
            "campaign rates (tau = {}, sigma = {}) differ from the constants (tau = {}, sigma = {})",
            spec.tau, spec.sigma, c.inputs.tau, c.inputs.sigma
        )));
    }
    if spec.family.min_tau() <= spec.tau {
        return Err(config_err(format!(
            "family velocity rates must exceed tau = {}, smallest is {}",
            spec.tau,
            spec.family.min_tau()
        )));
    }
    if spec.trials == 0 {
        return Err(config_err("campaign needs at least one trial"));
    }
    if !(spec.max_time.is_finite() && spec.max_time >= 0.0) {
        return Err(config_err("campaign max_time must be nonnegative"));
    }
    if partition.delta_x() > 1.0 {
        return Err(config_err(format!(
            "the homogenization estimates need dx <= 1, partition has dx = {}",
            partition.delta_x()
        )));
    }
    Ok(())
}

/// The mixtures of one trial.
struct TrialData {
    g1: GaussianMixture,
    g2: GaussianMixture,
    h1: GaussianMixture,
    h2: GaussianMixture,
    m1: GaussianMixture,
    m2: GaussianMixture,
    alpha: f64,
    t: f64,
    s: f64,
}

fn draw_trial(spec: &CampaignSpec, c: &ConstantsReport, trial: usize) -> TrialData {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(trial as u64);
    let f = &spec.family;
    let (r, m) = (c.inputs.r, c.inputs.m);
    let time = |rng: &mut ChaCha8Rng| {
        if spec.max_time == 0.0 {
            0.0
        } else {
            rng.gen_range(-spec.max_time..=spec.max_time)
        }
    };
    TrialData {
        g1: f.sample(&mut rng),
        g2: f.sample(&mut rng),
        h1: f.sample(&mut rng),
        h2: f.sample(&mut rng),
        m1: f.sample_member(&mut rng, spec.tau, r, m),
        m2: f.sample_member(&mut rng, spec.tau, r, m),
        alpha: if trial % 2 == 0 { 0.0 } else { spec.tau },
        t: time(&mut rng),
        s: time(&mut rng),
    }
}

/// Left and right sides of every inequality for one trial on one grid.
fn evaluate(
    d: &TrialData,
    c: &ConstantsReport,
    spec: &CampaignSpec,
    partition: &SpatialPartition,
    grid: &VelocityGrid,
    quad: &SphereQuadrature,
) -> Result<Vec<Vec<Sample>>> {
    let kernel = kernel_of(c)?;
    let op = CollisionOperator::new(kernel, quad, *grid, spec.interpolation)?;
    let sample = |g: &GaussianMixture| g.sample(partition, grid);
    let (g1, g2, h1, h2) = (sample(&d.g1)?, sample(&d.g2)?, sample(&d.h1)?, sample(&d.h2)?);
    let (m1, m2) = (sample(&d.m1)?, sample(&d.m2)?);
    let (tau, sigma) = (spec.tau, spec.sigma);
    let (r, m) = (c.inputs.r, c.inputs.m);
    let (ct, cs) = (c.c_tau, c.c_sigma);
    let dx = partition.delta_x();
    let b = |f: &DistributionField| b_norm(f, tau);
    let mn = |f: &DistributionField| m_norm(f, tau);
    let bs = |f: &DistributionField| b_norm(f, sigma);
    let l1 = |f: &DistributionField| f.l1();
    let diff = |a: &DistributionField, b: &DistributionField| a.sub(b).expect("shared grids");

    let mut out: Vec<Vec<Sample>> = vec![Vec::new(); INEQUALITY_IDS.len()];

    let jg = op.bilinear(&g1, &g2)?;
    let jh = op.bilinear(&h1, &h2)?;
    let dj = diff(&jg, &jh);
    let (dg1, dg2) = (diff(&g1, &h1), diff(&g2, &h2));
    out[0].push(Sample {
        lhs: weighted_sup(&dj, d.alpha, tau),
        rhs: ct * (weighted_sup(&g1, d.alpha, tau) * b(&dg2) + weighted_sup(&h2, d.alpha, tau) * b(&dg1)),
    });
    out[1].push(Sample {
        lhs: l1(&dj),
        rhs: ct * (b(&g1) * l1(&dg2) + b(&h2) * l1(&dg1)),
    });

    let jm1 = op.collision(&m1)?;
    let jm2 = op.collision(&m2)?;
    let jpm1 = op.homogenized(&m1)?;
    let jpm2 = op.homogenized(&m2)?;
    let dm = diff(&m1, &m2);
    let (dj, djp) = (diff(&jm1, &jm2), diff(&jpm1, &jpm2));
    let sum_b = b(&m1) + b(&m2);
    out[2].push(Sample {
        lhs: b(&dj),
        rhs: ct * sum_b * b(&dm),
    });
    out[3].push(Sample {
        lhs: b(&djp),
        rhs: ct * sum_b * b(&dm),
    });
    out[4].push(Sample {
        lhs: mn(&dj),
        rhs: ct * (mn(&m1) + mn(&m2)) * b(&dm),
    });
    out[5].push(Sample {
        lhs: l1(&dj),
        rhs: ct * sum_b * l1(&dm),
    });
    out[6].push(Sample {
        lhs: l1(&djp),
        rhs: ct * sum_b * l1(&dm),
    });
    for (f, j, jp) in [(&m1, &jm1, &jpm1), (&m2, &jm2, &jpm2)] {
        out[7].push(Sample {
            lhs: b(j).max(b(jp)),
            rhs: ct * b(f) * b(f),
        });
        out[8].push(Sample {
            lhs: mn(j),
            rhs: ct * mn(f) * b(f),
        });
        out[9].push(Sample {
            lhs: l1(j).max(l1(jp)),
            rhs: ct * b(f) * l1(f),
        });
    }

    let defect = diff(&jpm1, &jm1);
    out[10].push(Sample {
        lhs: b(&defect),
        rhs: ct * m * r * dx,
    });
    let lam = c.inputs.lambda;
    out[11].push(Sample {
        lhs: l1(&defect),
        rhs: 2.0 * PI.powf(4.5) * c.b_lambda * tau.powf(-(9.0 - lam) / 2.0) * m * r * dx,
    });

    let moved = diff(&stream(&m1, d.s, spec.stream), &m1);
    let rm = r.max(m);
    out[12].push(Sample {
        lhs: bs(&moved),
        rhs: 2f64.sqrt() * E.powf(-0.5) * (tau - sigma).powf(-0.5) * rm * d.s.abs(),
    });
    out[13].push(Sample {
        lhs: l1(&moved),
        rhs: 4.0 * PI.powf(2.5) * tau.powf(-3.5) * rm * d.s.abs(),
    });

    // I(g, h, t, s) with g = g1, h = m1, h-hat = m2
    let left = op.homogenized(&stream(&g1, d.t, spec.stream))?;
    let i = diff(&left, &stream(&jm1, d.s, spec.stream));
    let gh = diff(&g1, &m2);
    let tail = dx + d.t.abs() + d.s.abs();
    out[14].push(Sample {
        lhs: bs(&i),
        rhs: cs * (bs(&g1) + r) * bs(&gh) + c.key.k1 * (bs(&dm) + tail),
    });
    out[15].push(Sample {
        lhs: l1(&i),
        rhs: cs * (bs(&g1) + r) * l1(&gh) + c.key.k2 * (l1(&dm) + tail),
    });
    Ok(out)
}

/// Evaluate every inequality on `spec.trials` seeded random trials.
///
/// Each comparison is repeated on a velocity grid with half the nodes per
/// axis; the change in `lhs - rhs` plus `1e-8 |rhs|` is that comparison's
/// tolerance.
pub fn verify_inequalities(
    spec: &CampaignSpec,
    constants: &ConstantsReport,
    partition: &SpatialPartition,
    grid: &VelocityGrid,
    quad: &SphereQuadrature,
) -> Result<Vec<InequalityVerdict>> {
    check_consistency(spec, constants, partition)?;
    let n = grid.nodes_per_axis();
    if n < 2 {
        return Err(config_err("the campaign needs at least 2 velocity nodes per axis"));
    }
    let half = VelocityGrid::new(grid.v_max(), n / 2)?;
    let mut acc: Vec<Accumulator> = INEQUALITY_IDS.iter().map(|id| Accumulator::new(id)).collect();
    for trial in 0..spec.trials {
        let data = draw_trial(spec, constants, trial);
        let full = evaluate(&data, constants, spec, partition, grid, quad)?;
        let coarse = evaluate(&data, constants, spec, partition, &half, quad)?;
        for (a, (f, h)) in acc.iter_mut().zip(full.iter().zip(&coarse)) {
            for (x, y) in f.iter().zip(h) {
                a.push(*x, *y);
            }
        }
    }
    Ok(acc.iter().map(Accumulator::verdict).collect())
}

/// Homogenization of one field against its analytic class constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogenizationCheck {
    pub delta_x: f64,
    pub b_error: f64,
    pub b_bound: f64,
    pub l1_error: f64,
    pub l1_bound: f64,
}

/// `||pi g - g||` in `B_tau` and `L1` against `M dx` and `(pi/tau)^3 M dx`,
/// with `M` the analytic Lipschitz bound of `g` at rate `tau`.
pub fn homogenization_check(
    g: &GaussianMixture,
    partition: &SpatialPartition,
    grid: &VelocityGrid,
    tau: f64,
) -> Result<HomogenizationCheck> {
    let f = g.sample(partition, grid)?;
    let e = homogenize(&f).sub(&f)?;
    let m = g.lipschitz_bound(tau);
    let dx = partition.delta_x();
    Ok(HomogenizationCheck {
        delta_x: dx,
        b_error: b_norm(&e, tau),
        b_bound: m * dx,
        l1_error: e.l1(),
        l1_bound: (PI / tau).powi(3) * m * dx,
    })
}
