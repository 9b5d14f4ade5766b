//! Source and detector layout, phase configurations and transfer matrices.
//!
//! Sources sit on a line at distances `d, 2d, …, N·d` from the origin. A
//! far-field detector at angle `θ_m` picks up a phase `n·Δφ_m` from source `n`,
//! with `Δφ_m = k·d·sin θ_m`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::permanent::ComplexMatrix;

/// Two detector angles closer than this are treated as the same position.
pub const ANGLE_RESOLUTION: f64 = 1e-9;

/// Physical layout: `N` sources with spacing `d`, wavenumber `k`, `N` detector angles.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Geometry {
    #[cfg_attr(feature = "serde", serde(rename = "n"))]
    n_sources: usize,
    #[cfg_attr(feature = "serde", serde(rename = "d"))]
    spacing_d: f64,
    #[cfg_attr(feature = "serde", serde(rename = "k"))]
    wavenumber_k: f64,
    #[cfg_attr(feature = "serde", serde(rename = "angles"))]
    detector_angles: Vec<f64>,
}

impl Geometry {
    pub fn new(
        n_sources: usize,
        spacing_d: f64,
        wavenumber_k: f64,
        detector_angles: Vec<f64>,
    ) -> Result<Self> {
        let geom = Geometry {
            n_sources,
            spacing_d,
            wavenumber_k,
            detector_angles,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// Re-check the invariants, e.g. after deserializing.
    pub fn validate(&self) -> Result<()> {
        if self.n_sources < 2 {
            return Err(Error::DimensionTooSmall {
                what: "source count",
                dim: self.n_sources,
                min: 2,
            });
        }
        if self.detector_angles.len() != self.n_sources {
            return Err(Error::DimensionMismatch {
                expected: self.n_sources,
                found: self.detector_angles.len(),
            });
        }
        if !self.spacing_d.is_finite() || !self.wavenumber_k.is_finite() {
            return Err(Error::NonFinite("spacing and wavenumber"));
        }
        if self.spacing_d <= 0.0 {
            return Err(Error::OutOfRange {
                what: "source spacing d",
                value: self.spacing_d,
            });
        }
        if self.wavenumber_k <= 0.0 {
            return Err(Error::OutOfRange {
                what: "wavenumber k",
                value: self.wavenumber_k,
            });
        }
        for &theta in &self.detector_angles {
            if !theta.is_finite() {
                return Err(Error::NonFinite("detector angles"));
            }
            if theta.abs() > FRAC_PI_2 {
                return Err(Error::OutOfRange {
                    what: "detector angle",
                    value: theta,
                });
            }
        }
        if let Some((first, second)) = find_close_pair(&self.detector_angles, ANGLE_RESOLUTION) {
            return Err(Error::DuplicateDetectors { first, second });
        }
        Ok(())
    }

    pub fn n_sources(&self) -> usize {
        self.n_sources
    }

    pub fn spacing_d(&self) -> f64 {
        self.spacing_d
    }

    pub fn wavenumber_k(&self) -> f64 {
        self.wavenumber_k
    }

    pub fn detector_angles(&self) -> &[f64] {
        &self.detector_angles
    }

    pub fn kd(&self) -> f64 {
        self.wavenumber_k * self.spacing_d
    }
}

fn find_close_pair(values: &[f64], tol: f64) -> Option<(usize, usize)> {
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if (values[i] - values[j]).abs() <= tol {
                return Some((i, j));
            }
        }
    }
    None
}

/// Detector phase steps `Δφ_m` in radians.
///
/// `physical` is set when the phases came from (or were checked against) a
/// [`Geometry`]; phases typed in directly for exploration leave it unset.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseConfig {
    deltas: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(default))]
    physical: bool,
}

impl PhaseConfig {
    pub fn new(deltas: Vec<f64>) -> Result<Self> {
        let cfg = PhaseConfig {
            deltas,
            physical: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.deltas.len() < 2 {
            return Err(Error::DimensionTooSmall {
                what: "phase configuration",
                dim: self.deltas.len(),
                min: 2,
            });
        }
        if self.deltas.iter().any(|d| !d.is_finite()) {
            return Err(Error::NonFinite("phases"));
        }
        if self.physical {
            if let Some((first, second)) = find_close_pair(&self.deltas, 0.0) {
                return Err(Error::DuplicatePhases { first, second });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.deltas.len()
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn is_physical(&self) -> bool {
        self.physical
    }

    /// Same phases with a different value at `index`; drops the `physical` flag.
    pub fn with_delta(&self, index: usize, value: f64) -> Result<Self> {
        if index >= self.n() {
            return Err(Error::InvalidIndex { index, n: self.n() });
        }
        let mut deltas = self.deltas.clone();
        deltas[index] = value;
        PhaseConfig::new(deltas)
    }

    pub fn into_deltas(self) -> Vec<f64> {
        self.deltas
    }
}

/// Scale `c_norm` shared by every transfer-matrix entry.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NormConvention {
    /// `c_norm = 1`; `G^(2)` peaks at 4.
    #[default]
    Unit,
    /// `c_norm = 1/√N`, the scale of a unitary `N`-port.
    SqrtModes,
    Custom(f64),
}

impl NormConvention {
    pub fn c_norm(self, n: usize) -> f64 {
        match self {
            NormConvention::Unit => 1.0,
            NormConvention::SqrtModes => 1.0 / libm::sqrt(n as f64),
            NormConvention::Custom(c) => c,
        }
    }
}

impl core::str::FromStr for NormConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(NormConvention::Unit),
            "sqrt_modes" | "sqrt-modes" => Ok(NormConvention::SqrtModes),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|c| c.is_finite() && *c > 0.0)
                .map(NormConvention::Custom)
                .ok_or(Error::UnsupportedInput(
                    "norm must be unit, sqrt_modes or a positive number",
                )),
        }
    }
}

/// `N × N` matrix of source-to-detector amplitudes `c_nm`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransferMatrix {
    matrix: ComplexMatrix,
    norm: NormConvention,
}

impl TransferMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn norm(&self) -> NormConvention {
        self.norm
    }

    pub fn c_norm(&self) -> f64 {
        self.norm.c_norm(self.matrix.dim())
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

impl AsRef<ComplexMatrix> for TransferMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// `Δφ_m = k·d·sin θ_m`.
pub fn phases_from_geometry(geom: &Geometry) -> Result<PhaseConfig> {
    geom.validate()?;
    let kd = geom.kd();
    let deltas = geom.detector_angles.iter().map(|&t| kd * libm::sin(t)).collect();
    let cfg = PhaseConfig {
        deltas,
        physical: true,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Detector angles `θ_m = asin(Δφ_m / (k·d))` realizing `phases`.
pub fn angles_from_phases(phases: &PhaseConfig, k: f64, d: f64) -> Result<Geometry> {
    phases.validate()?;
    if !k.is_finite() || !d.is_finite() {
        return Err(Error::NonFinite("spacing and wavenumber"));
    }
    if k <= 0.0 {
        return Err(Error::OutOfRange {
            what: "wavenumber k",
            value: k,
        });
    }
    if d <= 0.0 {
        return Err(Error::OutOfRange {
            what: "source spacing d",
            value: d,
        });
    }
    if let Some((first, second)) = find_close_pair(phases.deltas(), 0.0) {
        return Err(Error::DuplicatePhases { first, second });
    }
    let kd = k * d;
    let widest = phases.deltas.iter().fold(0.0f64, |acc, p| acc.max(p.abs()));
    if widest > kd {
        return Err(Error::Infeasible { min_kd: widest });
    }
    let angles = phases.deltas.iter().map(|p| libm::asin(p / kd)).collect();
    Geometry::new(phases.n(), d, k, angles)
}

/// `c_nm = c_norm·exp(-i·n·Δφ_m)` with source index `n` running `1..=N`.
pub fn build_transfer_matrix(phases: &PhaseConfig, norm: NormConvention) -> Result<TransferMatrix> {
    phases.validate()?;
    let n = phases.n();
    let c = norm.c_norm(n);
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::OutOfRange {
            what: "normalization c_norm",
            value: c,
        });
    }
    let matrix = ComplexMatrix::from_fn(n, |row, col| {
        let source = (row + 1) as f64;
        Complex64::from_polar(c, -reduced_phase(source, phases.deltas[col]))
    })?;
    Ok(TransferMatrix { matrix, norm })
}

/// `n·Δ` reduced into `[-π, π]`.
///
/// The product and the reduction are done in double-double so that a row
/// phase of tens of radians keeps the absolute accuracy of `Δ` itself.
fn reduced_phase(n: f64, delta: f64) -> f64 {
    // 2π - TAU, the part of 2π below f64 precision.
    const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;
    let p = TwoFloat::new_mul(n, delta);
    let k = libm::round(p.hi() / TAU);
    let r = p - TwoFloat::new_mul(k, TAU) - k * TAU_LO;
    r.hi() + r.lo()
}
