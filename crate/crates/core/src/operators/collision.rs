use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernels::{gauss_legendre, KernelSpec, SphereQuadrature};
use crate::phase_space::{DistributionField, VelocityGrid};

/// How the gain term evaluates densities at off-grid post-collision
/// velocities. Outside the velocity box the density is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainInterpolation {
    /// Tensor linear interpolation on the 8 surrounding nodes.
    Trilinear,
    /// Tensor 4-point Lagrange interpolation, clipped to the range of the
    /// 8 surrounding nodes so it never leaves their convex hull.
    #[default]
    MonotoneCubic,
}

impl GainInterpolation {
    fn taps(self) -> usize {
        match self {
            Self::Trilinear => 2,
            Self::MonotoneCubic => 4,
        }
    }

    /// Offset of the first tap relative to the floor node.
    fn first_tap(self) -> i64 {
        match self {
            Self::Trilinear => 0,
            Self::MonotoneCubic => -1,
        }
    }

    fn weights(self, t: f64) -> [f64; 4] {
        match self {
            Self::Trilinear => [1.0 - t, t, 0.0, 0.0],
            Self::MonotoneCubic => {
                if t == 0.0 {
                    return [0.0, 1.0, 0.0, 0.0];
                }
                [
                    -t * (t - 1.0) * (t - 2.0) / 6.0,
                    (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
                    -(t + 1.0) * t * (t - 2.0) / 2.0,
                    (t + 1.0) * t * (t - 1.0) / 6.0,
                ]
            }
        }
    }

    /// Zero padding needed around the grid so every stencil that touches
    /// the grid stays inside the padded array.
    fn pad(self) -> usize {
        match self {
            Self::Trilinear => 1,
            Self::MonotoneCubic => 3,
        }
    }
}

/// `(integral over the unit cube centred at 0 of |z|^-lambda dz)`.
///
/// The divergence theorem turns the singular volume integral into a smooth
/// integral over the six faces.
pub fn cell_singular_average(lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 1.0;
    }
    let (x, w) = gauss_legendre(24);
    let mut face = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        for (yj, wj) in x.iter().zip(&w) {
            let (a, b) = (0.5 * xi, 0.5 * yj);
            face += 0.25 * wi * wj * (a * a + b * b + 0.25).powf(-0.5 * lambda);
        }
    }
    3.0 / (3.0 - lambda) * face
}

#[derive(Clone, Copy)]
struct AxisTaps {
    /// Tap start for `v'`, relative to the destination index.
    g_start: i64,
    /// Tap start for `v*'`, relative to the destination index.
    h_start: i64,
    wg: [f64; 4],
    wh: [f64; 4],
    lo: usize,
    hi: usize,
}

/// Quadrature of the bilinear collision operator on a uniform velocity grid.
///
/// For a relative index `u = i - k` and sphere node `omega`, both
/// post-collision velocities are displaced by `delta = -(u . omega) omega`
/// grid units, independent of `i`. The gain term is therefore a sum over
/// `(u, omega)` of products of two shifted interpolants, which are applied
/// separably, axis by axis, for blocks of spatial cells at once.
#[derive(Debug, Clone)]
pub struct CollisionOperator {
    spec: KernelSpec,
    grid: VelocityGrid,
    interp: GainInterpolation,
    half_sphere: Vec<([f64; 3], f64)>,
    /// `A(u)` for `u` in `[-(n-1), n-1]^3`: the loss kernel including the
    /// velocity weight.
    loss_kernel: Vec<f64>,
}

impl CollisionOperator {
    pub fn new(
        spec: KernelSpec,
        quad: &SphereQuadrature,
        grid: VelocityGrid,
        interp: GainInterpolation,
    ) -> Result<Self> {
        spec.validate()?;
        let half_sphere = quad.half_sphere();
        let n = grid.nodes_per_axis() as i64;
        let hv = grid.spacing();
        let vol = grid.weight();
        let diag = spec.b0 * hv.powf(3.0 - spec.lambda) * cell_singular_average(spec.lambda);
        let w = 2 * n - 1;
        let mut loss_kernel = Vec::with_capacity((w * w * w) as usize);
        for u0 in -(n - 1)..n {
            for u1 in -(n - 1)..n {
                for u2 in -(n - 1)..n {
                    if (u0, u1, u2) == (0, 0, 0) {
                        loss_kernel.push(diag);
                        continue;
                    }
                    let b = Self::b_at(&spec, [u0, u1, u2], hv);
                    loss_kernel.push(half_sphere.iter().map(|&(_, wq)| wq * b * vol).sum());
                }
            }
        }
        Ok(Self {
            spec,
            grid,
            interp,
            half_sphere,
            loss_kernel,
        })
    }

    fn b_at(spec: &KernelSpec, u: [i64; 3], hv: f64) -> f64 {
        let s = ((u[0] * u[0] + u[1] * u[1] + u[2] * u[2]) as f64).sqrt() * hv;
        spec.angular_total(s) / (4.0 * PI)
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn interpolation(&self) -> GainInterpolation {
        self.interp
    }

    /// Number of sphere nodes actually evaluated (one per antipodal pair).
    pub fn sphere_evaluations(&self) -> usize {
        self.half_sphere.len()
    }

    /// Loss kernel `A(u)` for a relative index.
    pub fn loss_kernel(&self, u: [i64; 3]) -> f64 {
        let n = self.grid.nodes_per_axis() as i64;
        let w = 2 * n - 1;
        let idx = ((u[0] + n - 1) * w + (u[1] + n - 1)) * w + (u[2] + n - 1);
        self.loss_kernel[idx as usize]
    }

    fn check(&self, f: &DistributionField) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(crate::Error::GridMismatch(
                "field velocity grid differs from the collision operator's".into(),
            ));
        }
        Ok(())
    }

    /// `P_B(g, h)`.
    pub fn gain(&self, g: &DistributionField, h: &DistributionField) -> Result<DistributionField> {
        self.check(g)?;
        g.check_same_grids(h)?;
        let (gain, _) = self.evaluate(g.values(), h.values(), g.n_cells(), true, false);
        Ok(g.like(gain))
    }

    /// Velocity convolution `int (int b d omega) h(x, v*) dv*`, the factor
    /// multiplying `g(x, v)` in the loss term.
    pub fn frequency(&self, h: &DistributionField) -> Result<DistributionField> {
        self.check(h)?;
        let (_, freq) = self.evaluate(h.values(), h.values(), h.n_cells(), false, true);
        Ok(h.like(freq))
    }

    /// `S_B(g, h)`.
    pub fn loss(&self, g: &DistributionField, h: &DistributionField) -> Result<DistributionField> {
        g.check_same_grids(h)?;
        let freq = self.frequency(h)?;
        Ok(g.like(
            g.values()
                .iter()
                .zip(freq.values())
                .map(|(a, b)| a * b)
                .collect(),
        ))
    }

    /// Gain and loss of `J_B(g, h)` in one sweep.
    pub fn gain_loss(
        &self,
        g: &DistributionField,
        h: &DistributionField,
    ) -> Result<(DistributionField, DistributionField)> {
        self.check(g)?;
        g.check_same_grids(h)?;
        let (gain, freq) = self.evaluate(g.values(), h.values(), g.n_cells(), true, true);
        let loss = g.values().iter().zip(&freq).map(|(a, b)| a * b).collect();
        Ok((g.like(gain), g.like(loss)))
    }

    /// `J_B(g, h) = P_B(g, h) - S_B(g, h)`.
    pub fn bilinear(&self, g: &DistributionField, h: &DistributionField) -> Result<DistributionField> {
        let (gain, loss) = self.gain_loss(g, h)?;
        gain.sub(&loss)
    }

    fn evaluate(
        &self,
        g: &[f64],
        h: &[f64],
        n_cells: usize,
        want_gain: bool,
        want_freq: bool,
    ) -> (Vec<f64>, Vec<f64>) {
        let nv = self.grid.len();
        if self.spec.is_collisionless() {
            return (vec![0.0; g.len()], vec![0.0; g.len()]);
        }
        if n_cells >= 8 {
            self.evaluate_chunked::<8>(g, h, n_cells, nv, want_gain, want_freq)
        } else {
            self.evaluate_chunked::<1>(g, h, n_cells, nv, want_gain, want_freq)
        }
    }

    fn evaluate_chunked<const CH: usize>(
        &self,
        g: &[f64],
        h: &[f64],
        n_cells: usize,
        nv: usize,
        want_gain: bool,
        want_freq: bool,
    ) -> (Vec<f64>, Vec<f64>) {
        let chunks = n_cells.div_ceil(CH);
        let results: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let cells = (chunk * CH)..((chunk + 1) * CH).min(n_cells);
                let gain = if want_gain {
                    self.gain_chunk::<CH>(g, h, cells.clone(), nv)
                } else {
                    Vec::new()
                };
                let freq = if want_freq {
                    self.freq_chunk::<CH>(h, cells, nv)
                } else {
                    Vec::new()
                };
                (gain, freq)
            })
            .collect();
        let mut gain = vec![0.0; if want_gain { n_cells * nv } else { 0 }];
        let mut freq = vec![0.0; if want_freq { n_cells * nv } else { 0 }];
        for (chunk, (cg, cf)) in results.into_iter().enumerate() {
            let first = chunk * CH;
            let count = CH.min(n_cells - first);
            for c in 0..count {
                for k in 0..nv {
                    if want_gain {
                        gain[(first + c) * nv + k] = cg[k * CH + c];
                    }
                    if want_freq {
                        freq[(first + c) * nv + k] = cf[k * CH + c];
                    }
                }
            }
        }
        (gain, freq)
    }

    /// Convolution with the loss kernel, transposed layout `[v][cell]`.
    fn freq_chunk<const CH: usize>(&self, h: &[f64], cells: std::ops::Range<usize>, nv: usize) -> Vec<f64> {
        let n = self.grid.nodes_per_axis();
        let hv = transpose::<CH>(h, cells, nv);
        let w = 2 * n - 1;
        let mut out = vec![0.0; nv * CH];
        for i in 0..nv {
            let [i0, i1, i2] = self.grid.unflatten(i);
            let mut acc = [0.0; CH];
            for k0 in 0..n {
                for k1 in 0..n {
                    let row = ((i0 + n - 1 - k0) * w + (i1 + n - 1 - k1)) * w + (i2 + n - 1);
                    let src = (k0 * n + k1) * n;
                    for k2 in 0..n {
                        let a = self.loss_kernel[row - k2];
                        let hk = &hv[(src + k2) * CH..(src + k2 + 1) * CH];
                        for c in 0..CH {
                            acc[c] += a * hk[c];
                        }
                    }
                }
            }
            out[i * CH..(i + 1) * CH].copy_from_slice(&acc);
        }
        out
    }

    fn axis_taps(&self, delta: f64, u: i64) -> Option<AxisTaps> {
        let n = self.grid.nodes_per_axis() as i64;
        let first = self.interp.first_tap();
        let last = first + self.interp.taps() as i64 - 1;
        let split = |pos: f64| -> (i64, f64) {
            let r = pos.round();
            if (pos - r).abs() < 1e-13 {
                (r as i64, 0.0)
            } else {
                let f = pos.floor();
                (f as i64, pos - f)
            }
        };
        let (bg, fg) = split(delta);
        let (bh, fh) = split(-(u as f64) - delta);
        let lo = 0.max(u).max(-bg - last).max(-bh - last);
        let hi = n.min(n + u).min(n - bg - first).min(n - bh - first);
        (lo < hi).then(|| AxisTaps {
            g_start: bg + first,
            h_start: bh + first,
            wg: self.interp.weights(fg),
            wh: self.interp.weights(fh),
            lo: lo as usize,
            hi: hi as usize,
        })
    }

    fn gain_chunk<const CH: usize>(
        &self,
        g: &[f64],
        h: &[f64],
        cells: std::ops::Range<usize>,
        nv: usize,
    ) -> Vec<f64> {
        let n = self.grid.nodes_per_axis();
        let ni = n as i64;
        let pad = self.interp.pad();
        let gp = pad_transpose::<CH>(g, cells.clone(), nv, n, pad);
        let hp = pad_transpose::<CH>(h, cells, nv, n, pad);
        let mut out = vec![0.0; nv * CH];
        let mut scratch = Scratch::new(n + 3, CH);
        let hv = self.grid.spacing();
        let vol = self.grid.weight();
        let diag = self.loss_kernel([0, 0, 0]);
        for u0 in -(ni - 1)..ni {
            for u1 in -(ni - 1)..ni {
                for u2 in -(ni - 1)..ni {
                    let u = [u0, u1, u2];
                    if u == [0, 0, 0] {
                        let taps = [0, 1, 2].map(|_| self.axis_taps(0.0, 0).unwrap());
                        self.accumulate::<CH>(&gp, &hp, &taps, diag, &mut scratch, &mut out);
                        continue;
                    }
                    let b = Self::b_at(&self.spec, u, hv);
                    for &(q, w) in &self.half_sphere {
                        let dot = u0 as f64 * q[0] + u1 as f64 * q[1] + u2 as f64 * q[2];
                        let mut taps = [None; 3];
                        for d in 0..3 {
                            taps[d] = self.axis_taps(-dot * q[d], u[d]);
                        }
                        let [Some(t0), Some(t1), Some(t2)] = taps else {
                            continue;
                        };
                        self.accumulate::<CH>(&gp, &hp, &[t0, t1, t2], w * b * vol, &mut scratch, &mut out);
                    }
                }
            }
        }
        out
    }

    fn accumulate<const CH: usize>(
        &self,
        gp: &[f64],
        hp: &[f64],
        taps: &[AxisTaps; 3],
        weight: f64,
        s: &mut Scratch,
        out: &mut [f64],
    ) {
        let n = self.grid.nodes_per_axis();
        let b = [0, 1, 2].map(|d| taps[d].hi - taps[d].lo);
        let len = b[0] * b[1] * b[2] * CH;
        let pad = self.interp.pad();
        let clamp = self.interp == GainInterpolation::MonotoneCubic;
        let starts_g = [0, 1, 2].map(|d| (taps[d].lo as i64 + taps[d].g_start + pad as i64) as usize);
        let starts_h = [0, 1, 2].map(|d| (taps[d].lo as i64 + taps[d].h_start + pad as i64) as usize);
        let wg = [0, 1, 2].map(|d| taps[d].wg);
        let wh = [0, 1, 2].map(|d| taps[d].wh);
        let mut vg = std::mem::take(&mut s.vg);
        let mut vh = std::mem::take(&mut s.vh);
        s.interpolate::<CH>(gp, n + 2 * pad, starts_g, &wg, b, self.interp.taps(), clamp, &mut vg);
        s.interpolate::<CH>(hp, n + 2 * pad, starts_h, &wh, b, self.interp.taps(), clamp, &mut vh);
        let mut o = 0;
        for i0 in taps[0].lo..taps[0].hi {
            for i1 in taps[1].lo..taps[1].hi {
                let row = ((i0 * n + i1) * n + taps[2].lo) * CH;
                let width = b[2] * CH;
                let dst = &mut out[row..row + width];
                let (xg, xh) = (&vg[o..o + width], &vh[o..o + width]);
                for j in 0..width {
                    dst[j] += weight * xg[j] * xh[j];
                }
                o += width;
            }
        }
        debug_assert_eq!(o, len);
        s.vg = vg;
        s.vh = vh;
    }
}

/// `[cell][v]` values of a cell range to `[v][cell]`, zero-filling unused
/// lanes.
fn transpose<const CH: usize>(src: &[f64], cells: std::ops::Range<usize>, nv: usize) -> Vec<f64> {
    let mut out = vec![0.0; nv * CH];
    for (c, cell) in cells.enumerate() {
        for k in 0..nv {
            out[k * CH + c] = src[cell * nv + k];
        }
    }
    out
}

/// Like [`transpose`], with `pad` zero layers around the velocity cube.
fn pad_transpose<const CH: usize>(
    src: &[f64],
    cells: std::ops::Range<usize>,
    nv: usize,
    n: usize,
    pad: usize,
) -> Vec<f64> {
    let p = n + 2 * pad;
    let mut out = vec![0.0; p * p * p * CH];
    for (c, cell) in cells.enumerate() {
        for k in 0..nv {
            let (a, b, d) = (k / (n * n), (k / n) % n, k % n);
            let idx = ((a + pad) * p + (b + pad)) * p + (d + pad);
            out[idx * CH + c] = src[cell * nv + k];
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Reduce {
    Weighted,
    Min,
    Max,
}

/// Reusable buffers for the separable interpolation passes.
struct Scratch {
    t1: Vec<f64>,
    t2: Vec<f64>,
    m1: Vec<f64>,
    m2: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    vg: Vec<f64>,
    vh: Vec<f64>,
}

impl Scratch {
    fn new(extent: usize, ch: usize) -> Self {
        let cap = extent * extent * extent * ch;
        let buf = || Vec::with_capacity(cap);
        Self {
            t1: buf(),
            t2: buf(),
            m1: buf(),
            m2: buf(),
            lo: buf(),
            hi: buf(),
            vg: buf(),
            vh: buf(),
        }
    }

    /// Interpolate the padded array `src` (extent `p` per axis) on the box
    /// `b`, whose first taps sit at `starts`. With `clamp`, the result is
    /// clipped to the range of the two central taps on every axis.
    #[allow(clippy::too_many_arguments)]
    fn interpolate<const CH: usize>(
        &mut self,
        src: &[f64],
        p: usize,
        starts: [usize; 3],
        w: &[[f64; 4]; 3],
        b: [usize; 3],
        taps: usize,
        clamp: bool,
        out: &mut Vec<f64>,
    ) {
        let e = [b[0] + taps - 1, b[1] + taps - 1];
        let full = [p, p, p];
        reduce::<CH>(src, full, starts, [e[0], e[1], b[2]], 2, Reduce::Weighted, &w[2], taps, &mut self.t1);
        reduce::<CH>(&self.t1, [e[0], e[1], b[2]], [0, 0, 0], [e[0], b[1], b[2]], 1, Reduce::Weighted, &w[1], taps, &mut self.t2);
        reduce::<CH>(&self.t2, [e[0], b[1], b[2]], [0, 0, 0], b, 0, Reduce::Weighted, &w[0], taps, out);
        if !clamp {
            return;
        }
        let none = [0.0; 4];
        for (mode, dst) in [(Reduce::Min, 0), (Reduce::Max, 1)] {
            let inner = [starts[0], starts[1], starts[2] + 1];
            reduce::<CH>(src, full, inner, [e[0], e[1], b[2]], 2, mode, &none, 2, &mut self.m1);
            reduce::<CH>(&self.m1, [e[0], e[1], b[2]], [0, 1, 0], [e[0], b[1], b[2]], 1, mode, &none, 2, &mut self.m2);
            let target = if dst == 0 { &mut self.lo } else { &mut self.hi };
            reduce::<CH>(&self.m2, [e[0], b[1], b[2]], [1, 0, 0], b, 0, mode, &none, 2, target);
        }
        for ((v, lo), hi) in out.iter_mut().zip(&self.lo).zip(&self.hi) {
            *v = v.max(*lo).min(*hi);
        }
    }
}

/// Reduce `taps` consecutive entries along `axis` of a 3D array with `CH`
/// interleaved lanes: `out[o] = op_t(src[off + o + t e_axis])`.
#[allow(clippy::too_many_arguments)]
fn reduce<const CH: usize>(
    src: &[f64],
    dims: [usize; 3],
    off: [usize; 3],
    out_dims: [usize; 3],
    axis: usize,
    mode: Reduce,
    w: &[f64; 4],
    taps: usize,
    out: &mut Vec<f64>,
) {
    out.clear();
    out.resize(out_dims[0] * out_dims[1] * out_dims[2] * CH, 0.0);
    let stride = [dims[1] * dims[2] * CH, dims[2] * CH, CH][axis];
    let mut o = 0;
    for a in 0..out_dims[0] {
        for b in 0..out_dims[1] {
            let base = (((a + off[0]) * dims[1] + (b + off[1])) * dims[2] + off[2]) * CH;
            let width = out_dims[2] * CH;
            let dst = &mut out[o..o + width];
            match mode {
                Reduce::Weighted => {
                    for (t, &wt) in w.iter().enumerate().take(taps) {
                        if wt == 0.0 {
                            continue;
                        }
                        let s = &src[base + t * stride..base + t * stride + width];
                        for j in 0..width {
                            dst[j] += wt * s[j];
                        }
                    }
                }
                Reduce::Min | Reduce::Max => {
                    let s0 = &src[base..base + width];
                    let s1 = &src[base + stride..base + stride + width];
                    for j in 0..width {
                        dst[j] = if mode == Reduce::Min {
                            s0[j].min(s1[j])
                        } else {
                            s0[j].max(s1[j])
                        };
                    }
                }
            }
            o += width;
        }
    }
}
