//! Finding and certifying configurations where `G^(N)` vanishes.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::contour::marching_squares;
use crate::correlation::gn_permanent;
use crate::error::{Error, Result};
use crate::factorial;
use crate::geometry::{NormConvention, PhaseConfig};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::permanent::{Algorithm, FAST_LIMIT};

/// A configuration is a dip when `|perm|/N!` is at most this.
pub const DIP_TOLERANCE: f64 = 1e-9;

/// Grids are capped at this many points.
pub const MAX_GRID_POINTS: usize = 100_000_000;

pub const DEFAULT_RESOLUTION: usize = 512;

/// A checked claim that `phases` do or do not produce a dip.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DipCertificate {
    pub phases: PhaseConfig,
    pub n: usize,
    /// `|perm(c)|/N!` with unit-norm coefficients.
    pub normalized_residual: f64,
    pub verified: bool,
    pub algorithm: Algorithm,
}

/// `Δφ₁ = 2π/N`, `Δφ_m = 2π·m` for `m ≥ 2`.
///
/// Every pair is distinct, so each phase belongs to a separate detector.
pub fn canonical_dip(n: usize) -> Result<PhaseConfig> {
    if n < 2 {
        return Err(Error::DimensionTooSmall {
            what: "photon number",
            dim: n,
            min: 2,
        });
    }
    let mut deltas = Vec::with_capacity(n);
    deltas.push(TAU / n as f64);
    deltas.extend((2..=n).map(|m| TAU * m as f64));
    PhaseConfig::new(deltas)
}

pub fn verify_dip(phases: &PhaseConfig, algorithm: Algorithm) -> Result<DipCertificate> {
    let r = gn_permanent(phases, NormConvention::Unit, algorithm)?;
    let normalized_residual = r.amplitude.norm() / factorial(phases.n());
    Ok(DipCertificate {
        phases: phases.clone(),
        n: phases.n(),
        normalized_residual,
        verified: normalized_residual <= DIP_TOLERANCE,
        algorithm,
    })
}

/// A dense `resolution × resolution` scan over two phases with the rest held fixed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    /// Full phase list; the entries at `free` are overwritten per grid point.
    pub template: Vec<f64>,
    /// The two scanned phase indices (0-based): rows vary `free[0]`, columns `free[1]`.
    pub free: [usize; 2],
    /// Half-open ranges `[lo, hi)` for the row and column phases.
    pub ranges: [[f64; 2]; 2],
    pub resolution: usize,
    pub algorithm: Algorithm,
    pub norm: NormConvention,
}

impl GridSpec {
    /// `[0, 2π)²` over phases `free` of an `n`-phase template, unit norm, Ryser.
    pub fn new(template: Vec<f64>, free: [usize; 2], resolution: usize) -> Result<Self> {
        let spec = GridSpec {
            template,
            free,
            ranges: [[0.0, TAU], [0.0, TAU]],
            resolution,
            algorithm: Algorithm::Ryser,
            norm: NormConvention::Unit,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        PhaseConfig::new(self.template.clone())?;
        for &f in &self.free {
            if f >= n {
                return Err(Error::InvalidIndex { index: f, n });
            }
        }
        if self.free[0] == self.free[1] {
            return Err(Error::UnsupportedInput(
                "the two scanned phases must differ",
            ));
        }
        if n > FAST_LIMIT {
            return Err(Error::Limit {
                algorithm: Algorithm::Ryser,
                dim: n,
                limit: FAST_LIMIT,
            });
        }
        self.algorithm.check(n)?;
        if self.resolution < 2 {
            return Err(Error::DimensionTooSmall {
                what: "grid resolution",
                dim: self.resolution,
                min: 2,
            });
        }
        match self.resolution.checked_mul(self.resolution) {
            Some(points) if points <= MAX_GRID_POINTS => {}
            _ => {
                return Err(Error::DimensionTooLarge {
                    what: "grid points",
                    dim: self.resolution.saturating_mul(self.resolution),
                    limit: MAX_GRID_POINTS,
                })
            }
        }
        for r in &self.ranges {
            if !r[0].is_finite() || !r[1].is_finite() || r[1] <= r[0] {
                return Err(Error::UnsupportedInput(
                    "grid ranges must be finite with lo < hi",
                ));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.template.len()
    }

    /// Phase at fractional index `t` along `axis` (0 = rows, 1 = columns).
    pub fn coordinate(&self, axis: usize, t: f64) -> f64 {
        let [lo, hi] = self.ranges[axis];
        lo + t * (hi - lo) / self.resolution as f64
    }

    pub fn phases_at(&self, row_phase: f64, col_phase: f64) -> Result<PhaseConfig> {
        let mut deltas = self.template.clone();
        deltas[self.free[0]] = row_phase;
        deltas[self.free[1]] = col_phase;
        PhaseConfig::new(deltas)
    }

    /// `G^(N)` with the free phases set to `(row_phase, col_phase)`.
    pub fn evaluate(&self, row_phase: f64, col_phase: f64) -> Result<f64> {
        let phases = self.phases_at(row_phase, col_phase)?;
        Ok(gn_permanent(&phases, self.norm, self.algorithm)?.g_value)
    }

    /// Fill `out` (length `resolution`) with grid row `i`.
    pub fn evaluate_row(&self, i: usize, out: &mut [f64]) -> Result<()> {
        let a = self.coordinate(0, i as f64);
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = self.evaluate(a, self.coordinate(1, j as f64))?;
        }
        Ok(())
    }

    /// Largest possible `|perm|` for this norm: `N!·c_norm^N`.
    pub fn amplitude_scale(&self) -> f64 {
        let n = self.n();
        factorial(n) * libm::pow(self.norm.c_norm(n), n as f64)
    }

    /// `G` level treated as zero: `(DIP_TOLERANCE·N!·c_norm^N)²`.
    pub fn zero_level(&self) -> f64 {
        let a = DIP_TOLERANCE * self.amplitude_scale();
        a * a
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    pub spec: GridSpec,
    /// Row-major, `values[i * resolution + j]`.
    pub values: Vec<f64>,
}

impl Grid {
    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        let expected = spec.resolution * spec.resolution;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(Grid { spec, values })
    }

    pub fn resolution(&self) -> usize {
        self.spec.resolution
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.resolution + j]
    }

    /// `(i, j, value)` of the largest sample; first occurrence in row-major order.
    pub fn max(&self) -> (usize, usize, f64) {
        self.extreme(|a, b| a > b)
    }

    /// `(i, j, value)` of the smallest sample; first occurrence in row-major order.
    pub fn min(&self) -> (usize, usize, f64) {
        self.extreme(|a, b| a < b)
    }

    fn extreme(&self, better: impl Fn(f64, f64) -> bool) -> (usize, usize, f64) {
        let mut best = 0;
        for (k, &v) in self.values.iter().enumerate() {
            if better(v, self.values[best]) {
                best = k;
            }
        }
        let r = self.spec.resolution;
        (best / r, best % r, self.values[best])
    }
}

pub fn scan_grid(spec: &GridSpec) -> Result<Grid> {
    spec.validate()?;
    let r = spec.resolution;
    let mut values = vec![0.0; r * r];
    for (i, row) in values.chunks_mut(r).enumerate() {
        spec.evaluate_row(i, row)?;
    }
    Ok(Grid {
        spec: spec.clone(),
        values,
    })
}

/// A zero-level polyline in phase coordinates `(row phase, column phase)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContourSet {
    pub spec: GridSpec,
    pub level: f64,
    pub polylines: Vec<Polyline>,
    pub vertex_count: usize,
    /// Largest `G` found when re-evaluating every vertex directly.
    pub max_vertex_g: f64,
    /// Every vertex re-evaluated to `G ≤ level`.
    pub verified: bool,
}

impl ContourSet {
    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }
}

/// Trace `G = spec.zero_level()` on a scanned grid.
pub fn extract_contour(grid: &Grid) -> Result<ContourSet> {
    extract_contour_at(grid, grid.spec.zero_level())
}

/// Trace `G = level` and re-evaluate every vertex from scratch.
pub fn extract_contour_at(grid: &Grid, level: f64) -> Result<ContourSet> {
    let spec = &grid.spec;
    let r = spec.resolution;
    let mut failure = None;
    let lines = marching_squares(&grid.values, r, r, level, |i, j| {
        let a = spec.coordinate(0, i as f64 + 0.5);
        let b = spec.coordinate(1, j as f64 + 0.5);
        spec.evaluate(a, b).unwrap_or_else(|e| {
            failure = Some(e);
            f64::INFINITY
        })
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let mut polylines = Vec::with_capacity(lines.len());
    let mut vertex_count = 0;
    let mut max_vertex_g: f64 = 0.0;
    for line in lines {
        let mut points = Vec::with_capacity(line.points.len());
        for [ti, tj] in line.points {
            let a = spec.coordinate(0, ti);
            let b = spec.coordinate(1, tj);
            max_vertex_g = max_vertex_g.max(spec.evaluate(a, b)?);
            points.push([a, b]);
        }
        vertex_count += points.len();
        polylines.push(Polyline {
            points,
            closed: line.closed,
        });
    }

    Ok(ContourSet {
        spec: spec.clone(),
        level,
        polylines,
        vertex_count,
        max_vertex_g,
        verified: max_vertex_g <= level,
    })
}

/// Outcome of a local search for a dip.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Refinement {
    pub certificate: DipCertificate,
    /// Unit-norm `G` at the start and at the refined point.
    pub start_g: f64,
    pub final_g: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Same as `certificate.verified`.
    pub converged: bool,
}

/// Options for [`refine_dip`]; defaults are 2000 iterations and a 0.01 rad simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    pub max_iterations: usize,
    pub initial_step: f64,
    pub algorithm: Algorithm,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            max_iterations: 2000,
            initial_step: 1e-2,
            algorithm: Algorithm::Ryser,
        }
    }
}

/// Nelder-Mead descent on `G^(N)` over the phases listed in `free` (0-based).
///
/// Never ends above the starting value. With nothing free the start point is
/// certified as-is.
pub fn refine_dip(start: &PhaseConfig, free: &[usize], opts: &RefineOptions) -> Result<Refinement> {
    let n = start.n();
    opts.algorithm.check(n)?;
    for (k, &f) in free.iter().enumerate() {
        if f >= n {
            return Err(Error::InvalidIndex { index: f, n });
        }
        if free[..k].contains(&f) {
            return Err(Error::UnsupportedInput(
                "free phase indices must be distinct",
            ));
        }
    }

    let scale = factorial(n);
    let mut phases = start.deltas().to_vec();
    let mut failure = None;
    // Normalized objective |perm|²/(N!)², so tolerances are scale-free.
    let mut objective = |x: &[f64]| -> f64 {
        for (&f, &v) in free.iter().zip(x) {
            phases[f] = v;
        }
        match PhaseConfig::new(phases.clone())
            .and_then(|p| gn_permanent(&p, NormConvention::Unit, opts.algorithm))
        {
            Ok(r) => r.g_value / (scale * scale),
            Err(e) => {
                failure = Some(e);
                f64::INFINITY
            }
        }
    };

    let x0: Vec<f64> = free.iter().map(|&f| start.deltas()[f]).collect();
    let start_norm = objective(&x0);
    let nm = nelder_mead(
        &mut objective,
        &x0,
        &NelderMeadOptions {
            max_iterations: opts.max_iterations,
            initial_step: opts.initial_step,
            // Aim three decades below the acceptance threshold on |perm|/N!.
            f_target: (DIP_TOLERANCE * 1e-3) * (DIP_TOLERANCE * 1e-3),
            x_tolerance: 1e-15,
            f_tolerance: 0.0,
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }

    let mut refined = start.deltas().to_vec();
    for (&f, &v) in free.iter().zip(&nm.x) {
        refined[f] = v;
    }
    let refined = PhaseConfig::new(refined)?;
    let certificate = verify_dip(&refined, opts.algorithm)?;
    let converged = certificate.verified;
    Ok(Refinement {
        certificate,
        start_g: start_norm * scale * scale,
        final_g: nm.f * scale * scale,
        iterations: nm.iterations,
        evaluations: nm.evaluations,
        converged,
    })
}

/// Wrap a phase into `[0, 2π)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi - TAU * libm::floor(phi / TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Distance from `phi` to the nearest odd multiple of `π`.
pub fn distance_to_odd_pi(phi: f64) -> f64 {
    (wrap_phase(phi) - PI).abs()
}
