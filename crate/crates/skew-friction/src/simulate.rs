//! Independent Monte Carlo oracle: a skew lattice random walk with
//! state-dependent drift, weakly convergent to the dry-friction process.
//!
//! The walk lives on `delta * Z` with time step `delta^2`. At a site
//! above zero it steps up with probability `(1 - m delta)/2`, below zero
//! with `(1 + m delta)/2`, and at zero with `p` (no drift bias at the
//! origin; its effect vanishes in the diffusion limit). An Euler scheme
//! would not realize the skewness at zero without ad-hoc correction,
//! which is why the lattice construction is used.
//!
//! Randomness is drawn from a counter-based keyed stream per path
//! (ChaCha8, stream = path index), so summaries are bit-identical
//! regardless of execution order or thread count.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Lattice discretization and sampling policy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LatticeConfig {
    /// Space step; the time step is `delta^2`.
    pub delta: f64,
    /// Local-time window half-width in lattice units: `epsilon = K * delta`.
    pub epsilon_factor: u32,
    pub seed: u64,
    pub path_budget: u64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            delta: 0.005,
            epsilon_factor: 10,
            seed: 2024,
            path_budget: 100_000,
        }
    }
}

impl LatticeConfig {
    /// Number of lattice steps covering `[0, T]`: `floor(T / delta^2)`.
    pub fn steps(&self, horizon: f64) -> u64 {
        (horizon / (self.delta * self.delta)).floor() as u64
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::config("delta must be positive"));
        }
        if self.epsilon_factor < 1 {
            return Err(Error::config("epsilon_factor must be >= 1"));
        }
        if self.path_budget < 1 {
            return Err(Error::config("path_budget must be >= 1"));
        }
        let m = params.friction()?;
        if m.abs() * self.delta >= 1.0 {
            return Err(Error::config(format!(
                "|m| * delta must be < 1 so step probabilities stay in (0, 1); got {} * {}",
                m.abs(),
                self.delta
            )));
        }
        if self.steps(params.horizon()) < 1 {
            return Err(Error::config("horizon shorter than one lattice time step"));
        }
        Ok(())
    }
}

/// Per-path functionals extracted from one simulated trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathFunctionals {
    /// Terminal position.
    pub x_t: f64,
    /// Local-time estimate from the symmetric epsilon window.
    pub l_t: f64,
    /// Alternative local-time estimate: `delta` times site-0 visits.
    pub l_t_visits: f64,
    /// Occupation time of the nonnegative half-line.
    pub u: f64,
    /// Last visit to the origin (0 when the walk never returns).
    pub tau: f64,
    /// Nonnegative occupation accumulated before `tau`.
    pub v: f64,
}

/// Windowed local-time estimator: occupation of `[-eps, eps]` over `2 eps`.
pub fn local_time_estimate(window_occupation: f64, epsilon: f64) -> f64 {
    window_occupation / (2.0 * epsilon)
}

/// Simulate one path. Randomness depends only on `(config.seed, path_index)`.
pub fn simulate_path(
    params: &ModelParams,
    config: &LatticeConfig,
    path_index: u64,
) -> Result<PathFunctionals> {
    config.validate(params)?;
    let m = params.friction()?;
    let delta = config.delta;
    let steps = config.steps(params.horizon());
    let dt = delta * delta;
    let window = config.epsilon_factor as i64;

    let to_threshold = |prob: f64| -> Result<u32> {
        if !(prob > 0.0 && prob < 1.0) {
            return Err(Error::config(format!("step probability {prob} outside (0, 1)")));
        }
        Ok((prob * 4294967296.0) as u32)
    };
    let up_above = to_threshold((1.0 - m * delta) / 2.0)?;
    let up_below = to_threshold((1.0 + m * delta) / 2.0)?;
    let up_at_zero = to_threshold(params.p())?;

    let mut rng = path_rng(config.seed, path_index);

    let mut site: i64 = 0;
    let mut nonneg_count: u64 = 0;
    let mut window_count: u64 = 0;
    let mut zero_visits: u64 = 0;
    let mut last_zero_step: u64 = 0;
    let mut nonneg_before_last_zero: u64 = 0;

    for step in 0..steps {
        // bookkeeping for the state at time step * dt
        if site >= 0 {
            nonneg_count += 1;
        }
        if site.abs() <= window {
            window_count += 1;
        }
        if site == 0 {
            zero_visits += 1;
            last_zero_step = step;
            // occupation strictly before this visit
            nonneg_before_last_zero = nonneg_count - 1;
        }
        let threshold = if site > 0 {
            up_above
        } else if site < 0 {
            up_below
        } else {
            up_at_zero
        };
        site += if rng.next_u32() < threshold { 1 } else { -1 };
    }
    // the terminal state can still be the last zero
    if site == 0 {
        last_zero_step = steps;
        nonneg_before_last_zero = nonneg_count;
    }

    let epsilon = config.epsilon_factor as f64 * delta;
    let out = PathFunctionals {
        x_t: site as f64 * delta,
        l_t: local_time_estimate(window_count as f64 * dt, epsilon),
        l_t_visits: zero_visits as f64 * delta,
        u: nonneg_count as f64 * dt,
        tau: last_zero_step as f64 * dt,
        v: nonneg_before_last_zero as f64 * dt,
    };
    assert!(
        0.0 <= out.v && out.v <= out.tau && out.tau <= params.horizon() + dt,
        "path invariant 0 <= v <= tau <= T violated: {out:?}"
    );
    Ok(out)
}

fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(seed ^ 0x9e37_79b9_7f4a_7c15).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(path_index);
    rng
}

/// Fixed-bin histogram with explicit underflow/overflow counters, so
/// counts always sum to the number of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn new(min: f64, max: f64, bins: usize) -> Self {
        let step = (max - min) / bins as f64;
        let edges = (0..=bins).map(|i| min + i as f64 * step).collect();
        Histogram {
            edges,
            counts: vec![0; bins],
            underflow: 0,
            overflow: 0,
        }
    }

    pub fn record(&mut self, x: f64) {
        let min = self.edges[0];
        let max = *self.edges.last().unwrap();
        if x < min {
            self.underflow += 1;
        } else if x >= max {
            self.overflow += 1;
        } else {
            let bins = self.counts.len();
            let idx = (((x - min) / (max - min) * bins as f64) as usize).min(bins - 1);
            self.counts[idx] += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }
}

/// 2-D fixed-bin histogram (row-major, first coordinate outermost).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram2d {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub outside: u64,
}

impl Histogram2d {
    pub fn new(x_range: (f64, f64), x_bins: usize, y_range: (f64, f64), y_bins: usize) -> Self {
        let xs = (0..=x_bins)
            .map(|i| x_range.0 + i as f64 * (x_range.1 - x_range.0) / x_bins as f64)
            .collect();
        let ys = (0..=y_bins)
            .map(|i| y_range.0 + i as f64 * (y_range.1 - y_range.0) / y_bins as f64)
            .collect();
        Histogram2d {
            x_edges: xs,
            y_edges: ys,
            counts: vec![0; x_bins * y_bins],
            outside: 0,
        }
    }

    pub fn record(&mut self, x: f64, y: f64) {
        let (x0, x1) = (self.x_edges[0], *self.x_edges.last().unwrap());
        let (y0, y1) = (self.y_edges[0], *self.y_edges.last().unwrap());
        let nx = self.x_edges.len() - 1;
        let ny = self.y_edges.len() - 1;
        if x < x0 || x >= x1 || y < y0 || y >= y1 {
            self.outside += 1;
            return;
        }
        let i = (((x - x0) / (x1 - x0) * nx as f64) as usize).min(nx - 1);
        let j = (((y - y0) / (y1 - y0) * ny as f64) as usize).min(ny - 1);
        self.counts[i * ny + j] += 1;
    }
}

/// First two moments of one functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub second: f64,
}

fn moments(samples: impl Iterator<Item = f64> + Clone, n: u64) -> Moments {
    let mean = samples.clone().sum::<f64>() / n as f64;
    let second = samples.map(|x| x * x).sum::<f64>() / n as f64;
    Moments { mean, second }
}

/// Streaming summary of a Monte Carlo run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub n_paths: u64,
    pub params: ModelParams,
    pub config: LatticeConfig,
    pub histograms: Vec<(String, Histogram)>,
    pub moments: Vec<(String, Moments)>,
    /// Joint histograms of `(x_t, l_t)` and `(u, l_t)`.
    pub joint_x_l: Histogram2d,
    pub joint_u_l: Histogram2d,
    /// Empirical probability of a nonnegative terminal position.
    pub prob_x_nonneg: f64,
}

/// Simulate all paths, in path-index order. Safe to call from rayon
/// contexts; the output is independent of the thread count.
pub fn simulate_paths(params: &ModelParams, config: &LatticeConfig) -> Result<Vec<PathFunctionals>> {
    config.validate(params)?;
    (0..config.path_budget)
        .into_par_iter()
        .map(|i| simulate_path(params, config, i))
        .collect()
}

/// Aggregate [`simulate_paths`] into an [`EmpiricalSummary`].
pub fn run_monte_carlo(params: &ModelParams, config: &LatticeConfig) -> Result<EmpiricalSummary> {
    let paths = simulate_paths(params, config)?;
    Ok(summarize(params, config, &paths))
}

pub fn summarize(
    params: &ModelParams,
    config: &LatticeConfig,
    paths: &[PathFunctionals],
) -> EmpiricalSummary {
    let horizon = params.horizon();
    let n = paths.len() as u64;
    let span = 5.0 * horizon.sqrt();

    let mut hx = Histogram::new(-span, span, 80);
    let mut hl = Histogram::new(0.0, span, 60);
    let mut hu = Histogram::new(0.0, horizon, 50);
    let mut htau = Histogram::new(0.0, horizon, 50);
    let mut hv = Histogram::new(0.0, horizon, 50);
    let mut joint_x_l = Histogram2d::new((-3.0 * horizon.sqrt(), 3.0 * horizon.sqrt()), 20, (0.0, 3.0 * horizon.sqrt()), 20);
    let mut joint_u_l = Histogram2d::new((0.0, horizon), 14, (0.0, 3.5 * horizon.sqrt()), 14);
    let mut nonneg = 0u64;

    for f in paths {
        hx.record(f.x_t);
        hl.record(f.l_t);
        hu.record(f.u);
        htau.record(f.tau);
        hv.record(f.v);
        // The visit-count estimator has O(delta) bias versus O(epsilon)
        // for the window estimator, which matters for chi-square tests
        // on the joint histograms.
        joint_x_l.record(f.x_t, f.l_t_visits);
        joint_u_l.record(f.u, f.l_t_visits);
        if f.x_t >= 0.0 {
            nonneg += 1;
        }
    }

    EmpiricalSummary {
        n_paths: n,
        params: *params,
        config: *config,
        histograms: vec![
            ("x_t".into(), hx),
            ("l_t".into(), hl),
            ("u".into(), hu),
            ("tau".into(), htau),
            ("v".into(), hv),
        ],
        moments: vec![
            ("x_t".into(), moments(paths.iter().map(|f| f.x_t), n)),
            ("l_t".into(), moments(paths.iter().map(|f| f.l_t), n)),
            ("l_t_visits".into(), moments(paths.iter().map(|f| f.l_t_visits), n)),
            ("u".into(), moments(paths.iter().map(|f| f.u), n)),
            ("tau".into(), moments(paths.iter().map(|f| f.tau), n)),
            ("v".into(), moments(paths.iter().map(|f| f.v), n)),
        ],
        joint_x_l,
        joint_u_l,
        prob_x_nonneg: nonneg as f64 / n as f64,
    }
}

/// One CSV row per path: `path_index,x_t,l_t,u,tau,v`.
pub fn write_paths_csv<W: std::io::Write>(w: &mut W, paths: &[PathFunctionals]) -> Result<()> {
    writeln!(w, "path_index,x_t,l_t,u,tau,v")?;
    for (i, f) in paths.iter().enumerate() {
        writeln!(w, "{},{},{},{},{},{}", i, f.x_t, f.l_t, f.u, f.tau, f.v)?;
    }
    Ok(())
}
