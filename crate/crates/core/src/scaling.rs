//! Finite-size scaling collapse `F = L^{ζ/ν} Ψ((r − r_c) L^{1/ν})`.
//!
//! Quality is the Houdayer–Hartmann statistic: each scaled point is compared
//! with a weighted linear fit through the bracketing points of every other
//! size, normalised by the combined variance. Values near 1 mean the curves
//! collapse within their error bars.

// `!(a < b)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{
    rescaled_variance, thread_pool, EnsembleDataset, EnsemblePoint, SummaryRow, CHI_II, F,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r: f64,
    pub y: f64,
    pub dy: f64,
}

/// One system size: `L` and its `(r, F, σ_F)` series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub l: f64,
    pub points: Vec<CurvePoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub r_c: f64,
    pub nu: f64,
    pub zeta: f64,
}

impl Params {
    fn to_array(self) -> [f64; 3] {
        [self.r_c, self.nu, self.zeta]
    }

    fn from_array(a: [f64; 3]) -> Self {
        Self {
            r_c: a[0],
            nu: a[1],
            zeta: a[2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartLog {
    pub start: Params,
    pub end: Params,
    pub quality: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamErrors {
    pub r_c: f64,
    pub nu: f64,
    pub zeta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub r_c: f64,
    pub nu: f64,
    pub zeta: f64,
    pub quality: f64,
    pub converged: bool,
    pub bootstrap_errors: Option<ParamErrors>,
    pub bootstrap_samples: usize,
    pub sizes: Vec<f64>,
    pub iteration_log: Vec<RestartLog>,
}

impl ScalingFit {
    pub fn params(&self) -> Params {
        Params {
            r_c: self.r_c,
            nu: self.nu,
            zeta: self.zeta,
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledPoint {
    pub l: f64,
    pub r: f64,
    pub x: f64,
    pub y: f64,
    pub dy: f64,
}

pub fn scaled_points(curves: &[Curve], p: Params) -> Vec<Vec<ScaledPoint>> {
    curves
        .iter()
        .map(|c| {
            let sx = c.l.powf(1.0 / p.nu);
            let sy = c.l.powf(-p.zeta / p.nu);
            c.points
                .iter()
                .map(|q| ScaledPoint {
                    l: c.l,
                    r: q.r,
                    x: (q.r - p.r_c) * sx,
                    y: q.y * sy,
                    dy: q.dy * sy,
                })
                .collect()
        })
        .collect()
}

/// Houdayer–Hartmann quality `S`. Infinite for `ν ≤ 0` or when fewer than
/// half of the points overlap another curve.
pub fn quality(curves: &[Curve], p: Params) -> f64 {
    if !(p.nu > 0.0) || !p.r_c.is_finite() || !p.zeta.is_finite() {
        return f64::INFINITY;
    }
    let scaled = scaled_points(curves, p);
    let total: usize = scaled.iter().map(Vec::len).sum();
    let mut sum = 0.0;
    let mut used = 0usize;
    for (i, curve) in scaled.iter().enumerate() {
        for pt in curve {
            let (mut k, mut kx, mut ky, mut kxx, mut kxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            let mut n = 0;
            for (j, other) in scaled.iter().enumerate() {
                if i == j {
                    continue;
                }
                let Some(w) = other.windows(2).find(|w| w[0].x <= pt.x && pt.x <= w[1].x) else {
                    continue;
                };
                for q in w {
                    let wt = 1.0 / (q.dy * q.dy);
                    k += wt;
                    kx += wt * q.x;
                    ky += wt * q.y;
                    kxx += wt * q.x * q.x;
                    kxy += wt * q.x * q.y;
                    n += 1;
                }
            }
            if n < 2 {
                continue;
            }
            let delta = k * kxx - kx * kx;
            if !(delta > 0.0) {
                continue;
            }
            let y_fit = (kxx * ky - kx * kxy + pt.x * (k * kxy - kx * ky)) / delta;
            let dy2_fit = ((kxx - 2.0 * pt.x * kx + pt.x * pt.x * k) / delta).max(0.0);
            sum += (pt.y - y_fit).powi(2) / (pt.dy * pt.dy + dy2_fit);
            used += 1;
        }
    }
    if used == 0 || 2 * used < total {
        return f64::INFINITY;
    }
    sum / used as f64
}

struct NmResult {
    x: [f64; 3],
    f: f64,
    iterations: usize,
    converged: bool,
}

/// Nelder–Mead simplex descent (standard coefficients).
fn nelder_mead(
    f: impl Fn([f64; 3]) -> f64,
    start: [f64; 3],
    step: [f64; 3],
    max_iter: usize,
    tol: f64,
) -> NmResult {
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    simplex.push((start, f(start)));
    for i in 0..3 {
        let mut v = start;
        v[i] += step[i];
        simplex.push((v, f(v)));
    }
    let lerp = |a: [f64; 3], b: [f64; 3], t: f64| {
        [
            a[0] + t * (b[0] - a[0]),
            a[1] + t * (b[1] - a[1]),
            a[2] + t * (b[2] - a[2]),
        ]
    };
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[3].1);
        let size: f64 = (1..4)
            .map(|i| {
                (0..3)
                    .map(|d| (simplex[i].0[d] - simplex[0].0[d]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if best.is_finite() && (worst - best).abs() <= tol * (best.abs() + tol) && size < 1e-6 {
            converged = true;
            break;
        }
        iterations += 1;
        let mut centroid = [0.0; 3];
        for (v, _) in &simplex[..3] {
            for d in 0..3 {
                centroid[d] += v[d] / 3.0;
            }
        }
        let reflected = lerp(centroid, simplex[3].0, -1.0);
        let fr = f(reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(centroid, simplex[3].0, -2.0);
            let fe = f(expanded);
            simplex[3] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[2].1 {
            simplex[3] = (reflected, fr);
        } else {
            let contracted = if fr < simplex[3].1 {
                lerp(centroid, reflected, 0.5)
            } else {
                lerp(centroid, simplex[3].0, 0.5)
            };
            let fc = f(contracted);
            if fc < fr.min(simplex[3].1) {
                simplex[3] = (contracted, fc);
            } else {
                let b = simplex[0].0;
                for item in simplex.iter_mut().skip(1) {
                    let v = lerp(b, item.0, 0.5);
                    *item = (v, f(v));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    NmResult {
        x: simplex[0].0,
        f: simplex[0].1,
        iterations,
        converged,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseOptions {
    pub init: Params,
    /// Half-widths of the 3×3×3 restart grid around `init`.
    pub spread: Params,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        Self {
            init: Params {
                r_c: 0.5,
                nu: 1.33,
                zeta: 2.5,
            },
            spread: Params {
                r_c: 0.03,
                nu: 0.3,
                zeta: 0.5,
            },
            max_iter: 2000,
            tol: 1e-10,
        }
    }
}

fn check_curves(curves: &[Curve]) -> Result<()> {
    if curves.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "collapse needs at least 3 sizes, got {}",
            curves.len()
        )));
    }
    for c in curves {
        if c.points.len() < 5 {
            return Err(Error::DegenerateInput(format!(
                "size {} has {} points, need at least 5",
                c.l,
                c.points.len()
            )));
        }
        if let Some(p) = c.points.iter().find(|p| !(p.dy > 0.0)) {
            return Err(Error::DegenerateInput(format!(
                "non-positive error bar at L={} r={}",
                c.l, p.r
            )));
        }
        if c.points.windows(2).any(|w| w[1].r <= w[0].r) {
            return Err(Error::DegenerateInput(format!(
                "r values of size {} are not increasing",
                c.l
            )));
        }
    }
    Ok(())
}

fn best_of_restarts(curves: &[Curve], opts: &CollapseOptions) -> (NmResult, Vec<RestartLog>) {
    let i = opts.init;
    let s = opts.spread;
    let mut log = Vec::new();
    let mut best: Option<NmResult> = None;
    for a in [-1.0, 0.0, 1.0] {
        for b in [-1.0, 0.0, 1.0] {
            for c in [-1.0, 0.0, 1.0] {
                let start = [i.r_c + a * s.r_c, i.nu + b * s.nu, i.zeta + c * s.zeta];
                let step = [s.r_c, s.nu, s.zeta];
                let res = nelder_mead(
                    |x| quality(curves, Params::from_array(x)),
                    start,
                    step,
                    opts.max_iter,
                    opts.tol,
                );
                log.push(RestartLog {
                    start: Params::from_array(start),
                    end: Params::from_array(res.x),
                    quality: res.f,
                    iterations: res.iterations,
                    converged: res.converged,
                });
                if best.as_ref().is_none_or(|b| res.f < b.f) {
                    best = Some(res);
                }
            }
        }
    }
    (best.expect("27 restarts"), log)
}

/// Fits `(r_c, ν, ζ)`; no bootstrap.
pub fn collapse(curves: &[Curve], opts: &CollapseOptions) -> Result<ScalingFit> {
    check_curves(curves)?;
    let (best, log) = best_of_restarts(curves, opts);
    let p = Params::from_array(best.x);
    if !best.f.is_finite() {
        log::warn!("collapse did not find a finite quality");
    }
    Ok(ScalingFit {
        r_c: p.r_c,
        nu: p.nu,
        zeta: p.zeta,
        quality: best.f,
        converged: best.converged && best.f.is_finite(),
        bootstrap_errors: None,
        bootstrap_samples: 0,
        sizes: curves.iter().map(|c| c.l).collect(),
        iteration_log: log,
    })
}

/// `F` curves from the raw `χ^II` series, one per size (`L = Lx`), keeping
/// `r` inside `window` and points with positive `σ_F`.
pub fn curves_from_dataset(dataset: &EnsembleDataset, window: (f64, f64)) -> Result<Vec<Curve>> {
    let mut curves = Vec::new();
    for (lx, ly) in dataset.sizes() {
        let mut points = Vec::new();
        for p in dataset
            .curve(lx, ly)
            .filter(|p| p.r >= window.0 && p.r <= window.1)
        {
            let (f, sf) = rescaled_variance(p)?;
            if sf > 0.0 {
                points.push(CurvePoint {
                    r: p.r,
                    y: f,
                    dy: sf,
                });
            }
        }
        curves.push(Curve {
            l: lx as f64,
            points,
        });
    }
    Ok(curves)
}

/// `F` curves from `summary.csv` rows.
pub fn curves_from_summary(rows: &[SummaryRow], window: (f64, f64)) -> Vec<Curve> {
    let mut curves: Vec<Curve> = Vec::new();
    for row in rows
        .iter()
        .filter(|r| r.observable == F && r.r >= window.0 && r.r <= window.1 && r.stderr > 0.0)
    {
        let pt = CurvePoint {
            r: row.r,
            y: row.mean,
            dy: row.stderr,
        };
        match curves.iter_mut().find(|c| c.l == row.lx as f64) {
            Some(c) => c.points.push(pt),
            None => curves.push(Curve {
                l: row.lx as f64,
                points: vec![pt],
            }),
        }
    }
    for c in &mut curves {
        c.points.sort_by(|a, b| a.r.total_cmp(&b.r));
    }
    curves
}

fn resample_point<R: Rng>(p: &EnsemblePoint, rng: &mut R) -> Result<EnsemblePoint> {
    let xs = p.values(CHI_II)?;
    let drawn: Vec<f64> = (0..xs.len())
        .map(|_| xs[rng.gen_range(0..xs.len())])
        .collect();
    let mut q = EnsemblePoint::new(p.lx, p.ly, p.r_index, p.r);
    q.series.insert(CHI_II.into(), drawn);
    Ok(q)
}

/// Collapse plus trajectory-bootstrap errors: each resample redraws the
/// `χ^II` samples at every `(L, r)` with replacement and refits from the
/// central estimate.
pub fn collapse_with_bootstrap(
    dataset: &EnsembleDataset,
    window: (f64, f64),
    opts: &CollapseOptions,
    resamples: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<ScalingFit> {
    let curves = curves_from_dataset(dataset, window)?;
    let mut fit = collapse(&curves, opts)?;
    if resamples == 0 {
        return Ok(fit);
    }
    let center = fit.params().to_array();
    let step = [opts.spread.r_c, opts.spread.nu, opts.spread.zeta];
    let pool = thread_pool(threads)?;
    let draws: Vec<[f64; 3]> = pool.install(|| {
        (0..resamples)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    seed ^ (b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                );
                let points = dataset
                    .points
                    .iter()
                    .filter(|p| p.r >= window.0 && p.r <= window.1)
                    .map(|p| resample_point(p, &mut rng))
                    .collect::<Result<Vec<_>>>()?;
                let resampled = EnsembleDataset {
                    initial_state: dataset.initial_state,
                    points,
                };
                let curves = curves_from_dataset(&resampled, window)?;
                check_curves(&curves)?;
                let res = nelder_mead(
                    |x| quality(&curves, Params::from_array(x)),
                    center,
                    step,
                    opts.max_iter,
                    opts.tol,
                );
                Ok(res.x)
            })
            .collect::<Result<_>>()
    })?;
    let n = draws.len() as f64;
    let sd = |d: usize| {
        let m = draws.iter().map(|x| x[d]).sum::<f64>() / n;
        (draws.iter().map(|x| (x[d] - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt()
    };
    fit.bootstrap_errors = Some(ParamErrors {
        r_c: sd(0),
        nu: sd(1),
        zeta: sd(2),
    });
    fit.bootstrap_samples = resamples;
    Ok(fit)
}

pub fn write_collapsed_csv(path: &Path, curves: &[Curve], p: Params) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for pt in scaled_points(curves, p).into_iter().flatten() {
        w.serialize(pt).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
