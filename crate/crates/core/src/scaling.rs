//! Finite-size scaling: data collapse over `(p_c, ν)`, power-law fits,
//! rescaled-time collapses of dynamics curves, and bootstrap errors.
//!
//! Collapse quality is a master-curve residual: every point is compared with
//! a weighted local-linear fit through the four nearest points belonging to
//! other curves, counting only points that can be interpolated.

use argmin::core::{CostFunction, Executor, State, TerminationReason};
use argmin::solver::neldermead::NelderMead;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::trajectory_rng;
use crate::error::{Error, Result};

/// One sweep point: system size, control parameter (`p` or `p_m`) and the
/// observable's trajectory mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "L")]
    pub size: usize,
    pub control: f64,
    pub mean: f64,
    pub stderr: f64,
    pub n_traj: usize,
    /// Per-trajectory values, when kept. Used for bootstrap resampling.
    #[serde(skip)]
    pub samples: Vec<f64>,
}

impl SweepRow {
    pub fn new(size: usize, control: f64, mean: f64, stderr: f64, n_traj: usize) -> Self {
        Self {
            size,
            control,
            mean,
            stderr,
            n_traj,
            samples: Vec::new(),
        }
    }

    pub fn from_samples(size: usize, control: f64, samples: Vec<f64>) -> Self {
        let (mean, stderr) = mean_and_stderr(&samples);
        Self {
            size,
            control,
            mean,
            stderr,
            n_traj: samples.len(),
            samples,
        }
    }
}

/// Sample mean and standard error of the mean (0 for fewer than two values).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn new(rows: Vec<SweepRow>) -> Result<Self> {
        for r in &rows {
            if !r.mean.is_finite() || !r.control.is_finite() || !(r.stderr >= 0.0) || r.size == 0 {
                return Err(Error::InsufficientData(format!("invalid row {r:?}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct sizes in increasing order.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.rows.iter().map(|r| r.size).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Rows of one size, sorted by control parameter.
    pub fn curve(&self, size: usize) -> Vec<&SweepRow> {
        let mut v: Vec<&SweepRow> = self.rows.iter().filter(|r| r.size == size).collect();
        v.sort_by(|a, b| a.control.total_cmp(&b.control));
        v
    }

    pub fn filter(&self, keep: impl Fn(&SweepRow) -> bool) -> Self {
        Self {
            rows: self.rows.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }

    pub fn control_range(&self) -> Option<(f64, f64)> {
        let lo = self.rows.iter().map(|r| r.control).fold(f64::INFINITY, f64::min);
        let hi = self.rows.iter().map(|r| r.control).fold(f64::NEG_INFINITY, f64::max);
        (lo <= hi).then_some((lo, hi))
    }

    /// At least three sizes with five sweep points each.
    pub fn check_fit_data(&self) -> Result<()> {
        let sizes = self.sizes();
        if sizes.len() < 3 {
            return Err(Error::InsufficientData(format!("{} sizes, need at least 3", sizes.len())));
        }
        for l in sizes {
            let n = self.curve(l).len();
            if n < 5 {
                return Err(Error::InsufficientData(format!("L = {l} has {n} sweep points, need 5")));
            }
        }
        Ok(())
    }

    /// Sizes at which the curves of consecutive sizes cross, as control
    /// values found by linear interpolation of their difference.
    pub fn crossings(&self) -> Vec<(usize, usize, f64)> {
        let sizes = self.sizes();
        let mut out = Vec::new();
        for w in sizes.windows(2) {
            let (a, b) = (self.curve(w[0]), self.curve(w[1]));
            let common: Vec<(f64, f64)> = a
                .iter()
                .filter_map(|ra| {
                    b.iter()
                        .find(|rb| (rb.control - ra.control).abs() < 1e-12)
                        .map(|rb| (ra.control, rb.mean - ra.mean))
                })
                .collect();
            for pair in common.windows(2) {
                let ((x0, d0), (x1, d1)) = (pair[0], pair[1]);
                if d0 == 0.0 {
                    out.push((w[0], w[1], x0));
                } else if d0 * d1 < 0.0 {
                    out.push((w[0], w[1], x0 + (x1 - x0) * d0 / (d0 - d1)));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    group: usize,
    x: f64,
    y: f64,
    sigma: f64,
}

/// Weighted master-curve residual of points grouped into curves. Returns
/// infinity when no point can be interpolated.
fn master_curve_residual(points: &[Point]) -> f64 {
    let groups = points.iter().map(|p| p.group).max().map_or(0, |g| g + 1);
    let mut by_group: Vec<Vec<Point>> = vec![Vec::new(); groups];
    for p in points {
        by_group[p.group].push(*p);
    }
    for g in &mut by_group {
        g.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    }
    let scale = points.iter().map(|p| p.y.abs()).fold(0.0, f64::max);
    let floor = if scale > 0.0 { 1e-3 * scale } else { 1e-12 };
    let sig = |s: f64| s.max(floor);

    let mut total = 0.0;
    let mut used = 0usize;
    let mut near: Vec<(f64, usize, f64, f64, f64)> = Vec::new();
    for p in points {
        near.clear();
        for (g, curve) in by_group.iter().enumerate() {
            if g == p.group || curve.is_empty() {
                continue;
            }
            let k = curve.partition_point(|q| q.x < p.x);
            for q in &curve[k.saturating_sub(4)..(k + 4).min(curve.len())] {
                near.push(((q.x - p.x).abs(), g, q.x, q.y, sig(q.sigma)));
            }
        }
        if near.len() < 2 {
            continue;
        }
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.total_cmp(&b.2)));
        let window = &near[..near.len().min(4)];
        let lo = window.iter().map(|w| w.2).fold(f64::INFINITY, f64::min);
        let hi = window.iter().map(|w| w.2).fold(f64::NEG_INFINITY, f64::max);
        if !(lo <= p.x && p.x <= hi) {
            continue;
        }
        let sw: f64 = window.iter().map(|w| 1.0 / (w.4 * w.4)).sum();
        let xm = window.iter().map(|w| w.2 / (w.4 * w.4)).sum::<f64>() / sw;
        let ym = window.iter().map(|w| w.3 / (w.4 * w.4)).sum::<f64>() / sw;
        let sxx: f64 = window.iter().map(|w| (w.2 - xm).powi(2) / (w.4 * w.4)).sum();
        let sxy: f64 = window.iter().map(|w| (w.2 - xm) * (w.3 - ym) / (w.4 * w.4)).sum();
        let (slope, var) = if sxx > 1e-300 {
            (sxy / sxx, 1.0 / sw + (p.x - xm).powi(2) / sxx)
        } else {
            (0.0, 1.0 / sw)
        };
        let pred = ym + slope * (p.x - xm);
        total += (p.y - pred).powi(2) / (sig(p.sigma).powi(2) + var);
        used += 1;
    }
    if used == 0 {
        return f64::INFINITY;
    }
    let n = points.len() as f64;
    total / used as f64 * (n / used as f64)
}

fn group_index(sizes: &[usize], size: usize) -> usize {
    sizes.binary_search(&size).expect("size taken from the table")
}

/// Master-curve residual of `y = O / L^power` against `x = (p − p_c) L^{1/ν}`.
pub fn collapse_quality(table: &SweepTable, p_c: f64, nu: f64, rescale_power: f64) -> f64 {
    let sizes = table.sizes();
    let points: Vec<Point> = table
        .rows
        .iter()
        .map(|r| {
            let l = r.size as f64;
            let s = l.powf(-rescale_power);
            Point {
                group: group_index(&sizes, r.size),
                x: (r.control - p_c) * l.powf(1.0 / nu),
                y: r.mean * s,
                sigma: r.stderr * s,
            }
        })
        .collect();
    master_curve_residual(&points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseOptions {
    pub rescale_power: f64,
    /// Pin `ν` instead of fitting it.
    pub fix_nu: Option<f64>,
    /// Search range for `p_c`; defaults to the table's control range.
    pub pc_range: Option<(f64, f64)>,
    pub nu_range: (f64, f64),
    pub pc_points: usize,
    pub nu_points: usize,
    pub max_iters: u64,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        Self {
            rescale_power: 0.0,
            fix_nu: None,
            pc_range: None,
            nu_range: (1.0, 4.0),
            pc_points: 200,
            nu_points: 60,
            max_iters: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseFit {
    pub p_c: f64,
    pub nu: f64,
    pub quality: f64,
    /// Bootstrap standard deviations of `(p_c, ν)`, when computed.
    pub bootstrap_sd: Option<(f64, f64)>,
    pub fixed_nu: Option<f64>,
    pub rescale_power: f64,
    /// False when the simplex refinement hit its iteration limit; the fit
    /// is then the best point found.
    pub converged: bool,
}

#[derive(Clone, Copy)]
struct Objective<'a> {
    table: &'a SweepTable,
    opts: &'a CollapseOptions,
    pc_range: (f64, f64),
}

impl Objective<'_> {
    fn params(&self, v: &[f64]) -> (f64, f64) {
        (v[0], self.opts.fix_nu.unwrap_or_else(|| v[1]))
    }

    fn eval(&self, v: &[f64]) -> f64 {
        let (pc, nu) = self.params(v);
        let (lo, hi) = self.pc_range;
        let (nlo, nhi) = self.opts.nu_range;
        if pc < lo || pc > hi || (self.opts.fix_nu.is_none() && (nu < nlo || nu > nhi)) {
            return f64::INFINITY;
        }
        collapse_quality(self.table, pc, nu, self.opts.rescale_power)
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;
    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let v = self.eval(p);
        // The simplex needs finite values to order its vertices.
        Ok(if v.is_finite() { v } else { 1e300 })
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn collapse_fit(table: &SweepTable, rescale_power: f64, fix_nu: Option<f64>) -> Result<CollapseFit> {
    collapse_fit_with(
        table,
        &CollapseOptions {
            rescale_power,
            fix_nu,
            ..CollapseOptions::default()
        },
    )
}

/// Grid search over `(p_c, ν)` followed by Nelder–Mead refinement from the
/// best grid point.
pub fn collapse_fit_with(table: &SweepTable, opts: &CollapseOptions) -> Result<CollapseFit> {
    table.check_fit_data()?;
    let pc_range = opts
        .pc_range
        .or_else(|| table.control_range())
        .ok_or_else(|| Error::InsufficientData("empty table".into()))?;
    let obj = Objective { table, opts, pc_range };
    let nus = match opts.fix_nu {
        Some(nu) => vec![nu],
        None => linspace(opts.nu_range.0, opts.nu_range.1, opts.nu_points),
    };
    let mut best = (f64::INFINITY, pc_range.0, nus[0]);
    for &pc in &linspace(pc_range.0, pc_range.1, opts.pc_points) {
        for &nu in &nus {
            let q = collapse_quality(table, pc, nu, opts.rescale_power);
            if q < best.0 {
                best = (q, pc, nu);
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::InsufficientData("no overlapping points between sizes".into()));
    }
    let dpc = (pc_range.1 - pc_range.0) / opts.pc_points.max(2) as f64;
    let dnu = (opts.nu_range.1 - opts.nu_range.0) / opts.nu_points.max(2) as f64;
    let start = match opts.fix_nu {
        Some(_) => vec![vec![best.1], vec![best.1 + dpc]],
        None => vec![
            vec![best.1, best.2],
            vec![best.1 + dpc, best.2],
            vec![best.1, best.2 + dnu],
        ],
    };
    let solver = NelderMead::new(start)
        .with_sd_tolerance(1e-12)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let (mut fit_pc, mut fit_nu, mut quality, mut converged) = (best.1, best.2, best.0, false);
    if let Ok(res) = Executor::new(obj, solver)
        .configure(|s| s.max_iters(opts.max_iters))
        .run()
    {
        let state = res.state();
        converged = state.get_termination_reason() == Some(&TerminationReason::SolverConverged);
        if let Some(p) = state.get_best_param() {
            let q = obj.eval(p);
            if q <= quality {
                let (pc, nu) = obj.params(p);
                (fit_pc, fit_nu, quality) = (pc, nu, q);
            }
        }
    }
    Ok(CollapseFit {
        p_c: fit_pc,
        nu: fit_nu,
        quality,
        bootstrap_sd: None,
        fixed_nu: opts.fix_nu,
        rescale_power: opts.rescale_power,
        converged,
    })
}

/// Standard deviation with `n − 1` normalization.
fn sample_sd(values: &[f64]) -> f64 {
    let (_, se) = mean_and_stderr(values);
    se * (values.len() as f64).sqrt()
}

fn resample_row<R: Rng + ?Sized>(row: &SweepRow, rng: &mut R) -> SweepRow {
    if row.samples.is_empty() {
        let z: f64 = rng.sample(StandardNormal);
        return SweepRow::new(row.size, row.control, row.mean + row.stderr * z, row.stderr, row.n_traj);
    }
    let drawn: Vec<f64> = (0..row.samples.len())
        .map(|_| *row.samples.choose(rng).expect("non-empty"))
        .collect();
    SweepRow::from_samples(row.size, row.control, drawn)
}

/// Refits `fit` on `resamples` bootstrap copies of `table` and returns the
/// standard deviation of each fitted parameter. Rows carrying per-trajectory
/// samples are resampled with replacement; rows without them are perturbed by
/// a normal draw of width `stderr`. Resample `i` uses stream `i` of `seed`.
pub fn bootstrap<F>(table: &SweepTable, fit: F, resamples: usize, seed: u64) -> Result<Vec<f64>>
where
    F: Fn(&SweepTable) -> Result<Vec<f64>> + Sync,
{
    if resamples < 100 {
        return Err(Error::InvalidConfig(format!("bootstrap needs at least 100 resamples, got {resamples}")));
    }
    let fits: Vec<Vec<f64>> = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = trajectory_rng(seed, i as u64);
            let rows = table.rows.iter().map(|r| resample_row(r, &mut rng)).collect();
            fit(&SweepTable { rows })
        })
        .collect::<Result<_>>()?;
    let k = fits.first().map_or(0, |f| f.len());
    Ok((0..k)
        .map(|j| sample_sd(&fits.iter().map(|f| f[j]).collect::<Vec<_>>()))
        .collect())
}

/// `collapse_fit_with` plus bootstrap errors on `(p_c, ν)`.
pub fn collapse_fit_bootstrap(
    table: &SweepTable,
    opts: &CollapseOptions,
    resamples: usize,
    seed: u64,
) -> Result<CollapseFit> {
    let mut fit = collapse_fit_with(table, opts)?;
    let sd = bootstrap(
        table,
        |t| collapse_fit_with(t, opts).map(|f| vec![f.p_c, f.nu]),
        resamples,
        seed,
    )?;
    fit.bootstrap_sd = Some((sd[0], sd[1]));
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    /// Rows dropped because the observable was not positive.
    pub excluded: usize,
}

/// Least squares of `log O` against `log(L / control)`.
pub fn power_fit(table: &SweepTable) -> Result<PowerFit> {
    let (kept, dropped): (Vec<&SweepRow>, Vec<&SweepRow>) = table.rows.iter().partition(|r| r.mean > 0.0);
    if !dropped.is_empty() {
        log::warn!("power_fit: excluding {} rows with nonpositive values", dropped.len());
    }
    let sizes = SweepTable {
        rows: kept.iter().map(|r| (*r).clone()).collect(),
    }
    .sizes();
    if sizes.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} sizes with positive values, need 4",
            sizes.len()
        )));
    }
    if kept.iter().any(|r| !(r.control > 0.0)) {
        return Err(Error::InsufficientData("control parameter must be positive".into()));
    }
    let xs: Vec<f64> = kept.iter().map(|r| (r.size as f64 / r.control).ln()).collect();
    let ys: Vec<f64> = kept.iter().map(|r| r.mean.ln()).collect();
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let syy: f64 = ys.iter().map(|y| (y - ym).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(PowerFit {
        exponent: slope,
        amplitude: intercept.exp(),
        r_squared,
        excluded: dropped.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsPoint {
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
}

/// One time series of an observable at fixed `(L, p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsCurve {
    #[serde(rename = "L")]
    pub size: usize,
    pub p: f64,
    pub points: Vec<DynamicsPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimescaleReport {
    /// `(exponent, residual)` for every candidate rescaling `t / (L/p)^exponent`.
    pub residuals: Vec<(f64, f64)>,
    pub best_exponent: f64,
}

/// Exponents compared by default: `1/3`, `1/2` and `1`.
pub const TIMESCALE_EXPONENTS: [f64; 3] = [1.0 / 3.0, 0.5, 1.0];

/// Collapses curves against `t / (L/p)^e` for each candidate `e` and reports
/// which one overlays them best. Every curve must decay below 0.1.
pub fn timescale_collapse(curves: &[DynamicsCurve], exponents: &[f64]) -> Result<TimescaleReport> {
    if curves.len() < 2 || exponents.is_empty() {
        return Err(Error::InsufficientData("need at least two curves and one exponent".into()));
    }
    for c in curves {
        if !(c.p > 0.0) {
            return Err(Error::InsufficientData(format!("curve at L = {} has p = {}", c.size, c.p)));
        }
        let min = c.points.iter().map(|q| q.mean).fold(f64::INFINITY, f64::min);
        if !(min < 0.1) {
            return Err(Error::InsufficientData(format!(
                "curve L = {}, p = {} never decays below 0.1 (min {min})",
                c.size, c.p
            )));
        }
    }
    let residuals: Vec<(f64, f64)> = exponents
        .iter()
        .map(|&e| {
            let points: Vec<Point> = curves
                .iter()
                .enumerate()
                .flat_map(|(g, c)| {
                    let tau = (c.size as f64 / c.p).powf(e);
                    c.points.iter().map(move |q| Point {
                        group: g,
                        x: q.t / tau,
                        y: q.mean,
                        sigma: q.stderr,
                    })
                })
                .collect();
            (e, master_curve_residual(&points))
        })
        .collect();
    let best_exponent = residuals
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|r| r.0)
        .expect("non-empty");
    Ok(TimescaleReport {
        residuals,
        best_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn synthetic(pc: f64, nu: f64, sigma: f64, seed: u64) -> SweepTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        for l in [16usize, 32, 64, 128] {
            for i in 0..11 {
                let p = 0.02 + 0.01 * i as f64;
                let lf = l as f64;
                let z: f64 = rng.sample(StandardNormal);
                let y = ((p - pc) * lf.powf(1.0 / nu)).tanh() * lf.powf(1.0 / 3.0) + sigma * z;
                rows.push(SweepRow::new(l, p, y, sigma.max(1e-9), 100));
            }
        }
        SweepTable::new(rows).unwrap()
    }

    #[test]
    fn recovers_planted_collapse() {
        let t = synthetic(0.06, 2.0, 0.01, 1);
        let fit = collapse_fit(&t, 1.0 / 3.0, None).unwrap();
        assert!((fit.p_c - 0.06).abs() < 0.005, "{fit:?}");
        assert!((fit.nu - 2.0).abs() < 0.2, "{fit:?}");
        let pinned = collapse_fit(&t, 1.0 / 3.0, Some(2.0)).unwrap();
        assert_eq!(pinned.nu, 2.0);
        assert!((pinned.p_c - 0.06).abs() < 0.005);
    }

    #[test]
    fn optimum_beats_grid() {
        let t = synthetic(0.07, 1.5, 0.02, 2);
        let opts = CollapseOptions {
            rescale_power: 1.0 / 3.0,
            pc_points: 20,
            nu_points: 10,
            ..Default::default()
        };
        let fit = collapse_fit_with(&t, &opts).unwrap();
        for pc in linspace(0.02, 0.12, 20) {
            for nu in linspace(1.0, 4.0, 10) {
                assert!(fit.quality <= collapse_quality(&t, pc, nu, 1.0 / 3.0));
            }
        }
    }

    #[test]
    fn argmin_invariant_under_relabeling_and_scale() {
        let t = synthetic(0.06, 2.0, 0.01, 3);
        let fit = collapse_fit(&t, 1.0 / 3.0, None).unwrap();
        let mut rows = t.rows().to_vec();
        rows.reverse();
        rows.swap(3, 17);
        let shuffled = collapse_fit(&SweepTable::new(rows.clone()).unwrap(), 1.0 / 3.0, None).unwrap();
        assert_eq!((fit.p_c, fit.nu), (shuffled.p_c, shuffled.nu));
        let scaled: Vec<SweepRow> = rows
            .iter()
            .map(|r| SweepRow::new(r.size, r.control, 8.0 * r.mean, 8.0 * r.stderr, r.n_traj))
            .collect();
        let scaled = collapse_fit(&SweepTable::new(scaled).unwrap(), 1.0 / 3.0, None).unwrap();
        assert!((fit.p_c - scaled.p_c).abs() < 1e-9 && (fit.nu - scaled.nu).abs() < 1e-9);
    }

    #[test]
    fn insufficient_data() {
        let rows = vec![SweepRow::new(8, 0.1, 1.0, 0.1, 10)];
        assert!(matches!(
            collapse_fit(&SweepTable::new(rows).unwrap(), 0.0, None),
            Err(Error::InsufficientData(_))
        ));
        assert!(SweepTable::new(vec![SweepRow::new(8, 0.1, f64::NAN, 0.1, 1)]).is_err());
    }

    #[test]
    fn power_fit_cube_root() {
        let rows = [16usize, 32, 64, 128, 256]
            .iter()
            .flat_map(|&l| {
                [0.2, 0.3].map(|p| SweepRow::new(l, p, 1.7 * (l as f64 / p).powf(1.0 / 3.0), 0.01, 10))
            })
            .collect();
        let fit = power_fit(&SweepTable::new(rows).unwrap()).unwrap();
        assert!((fit.exponent - 1.0 / 3.0).abs() < 1e-6);
        assert!((fit.amplitude - 1.7).abs() < 1e-6);
        assert!(fit.r_squared > 0.999999);
        let few = (0..3).map(|i| SweepRow::new(8 << i, 0.2, 1.0, 0.1, 1)).collect();
        assert!(power_fit(&SweepTable::new(few).unwrap()).is_err());
    }

    #[test]
    fn power_fit_excludes_nonpositive() {
        let mut rows: Vec<SweepRow> = [16usize, 32, 64, 128]
            .iter()
            .map(|&l| SweepRow::new(l, 0.3, (l as f64 / 0.3).sqrt(), 0.01, 10))
            .collect();
        rows.push(SweepRow::new(256, 0.3, 0.0, 0.0, 10));
        let fit = power_fit(&SweepTable::new(rows).unwrap()).unwrap();
        assert_eq!(fit.excluded, 1);
        assert!((fit.exponent - 0.5).abs() < 1e-9);
    }

    fn decay_curves(exponent: f64) -> Vec<DynamicsCurve> {
        let mut curves = Vec::new();
        for l in [16usize, 32, 64] {
            for p in [0.5, 1.0, 2.0] {
                let tau = (l as f64 / p).powf(exponent);
                let points = (0..=100)
                    .map(|i| {
                        let t = (i as f64 * 0.08 * tau).round();
                        DynamicsPoint {
                            t,
                            mean: 2.0 * (-t / tau).exp(),
                            stderr: 0.01,
                        }
                    })
                    .collect();
                curves.push(DynamicsCurve { size: l, p, points });
            }
        }
        curves
    }

    #[test]
    fn timescale_prefers_planted_exponent() {
        let report = timescale_collapse(&decay_curves(0.5), &TIMESCALE_EXPONENTS).unwrap();
        assert_eq!(report.best_exponent, 0.5);
        let report = timescale_collapse(&decay_curves(1.0), &TIMESCALE_EXPONENTS).unwrap();
        assert_eq!(report.best_exponent, 1.0);
        let mut slow = decay_curves(0.5);
        slow[0].points.truncate(2);
        assert!(timescale_collapse(&slow, &TIMESCALE_EXPONENTS).is_err());
    }

    #[test]
    fn bootstrap_of_exact_data_is_zero() {
        let rows: Vec<SweepRow> = [16usize, 32, 64, 128]
            .iter()
            .map(|&l| SweepRow::from_samples(l, 0.25, vec![(l as f64 / 0.25).powf(0.25); 20]))
            .collect();
        let t = SweepTable::new(rows).unwrap();
        let sd = bootstrap(&t, |t| power_fit(t).map(|f| vec![f.exponent]), 100, 7).unwrap();
        assert!(sd[0].abs() < 1e-12);
        assert!(bootstrap(&t, |_| Ok(vec![0.0]), 10, 7).is_err());
    }

    #[test]
    fn bootstrap_sd_tracks_standard_error() {
        // Mean of N draws with spread s: the bootstrap SD of the mean is s / sqrt(N).
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [25usize, 100, 400] {
            let samples: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) * 0.5).collect();
            let t = SweepTable::new(vec![SweepRow::from_samples(8, 0.1, samples)]).unwrap();
            let sd = bootstrap(&t, |t| Ok(vec![t.rows()[0].mean]), 400, 3).unwrap();
            let expected = 0.5 / (n as f64).sqrt();
            assert!((sd[0] / expected - 1.0).abs() < 0.2, "n = {n}: {} vs {expected}", sd[0]);
        }
    }

    #[test]
    fn crossings_found() {
        let t = synthetic(0.06, 2.0, 0.0, 4);
        let c = t.crossings();
        assert_eq!(c.len(), 3);
        for (_, _, x) in c {
            assert!((x - 0.06).abs() < 0.011);
        }
    }
}
