//! Aggregate self-check behind `freehom verify`.
//!
//! Every check runs on seeded inputs, so a report is reproducible from its
//! options. The report passes only if every check passes.

use std::f64::consts::{PI, TAU};

use freehom_core::correlation::{
    beam_splitter_output, coincidence_amplitude_check, full_state_expansion, g2_closed_form,
    gn_permanent,
};
use freehom_core::dipfinder::{canonical_dip, DIP_TOLERANCE};
use freehom_core::geometry::{build_transfer_matrix, NormConvention, PhaseConfig};
use freehom_core::permanent::{self, Algorithm, ComplexMatrix, FAST_LIMIT};
use freehom_core::{factorial, Complex64, Error, Result};
use serde::Serialize;

use crate::parallel::par_permanent;
use crate::sampling;

pub const ORACLE_TOLERANCE: f64 = 1e-10;
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-12;
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// Deliberate defects for exercising the failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Ryser adds its last Gray-code term with the wrong sign.
    RyserSign,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyOptions {
    /// Largest `N` for the canonical-dip check, at most 30.
    pub n_max: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n_max: 14,
            seed: 0,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub cases: usize,
    pub failures: usize,
    /// Largest error seen, in the same units as `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalResidual {
    pub n: usize,
    pub ryser: f64,
    pub glynn: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub options: VerifyOptions,
    pub checks: Vec<CheckResult>,
    pub canonical_residuals: Vec<CanonicalResidual>,
}

impl VerifyReport {
    pub fn failed(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name)
    }
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tally {
            name,
            tolerance,
            cases: 0,
            failures: 0,
            worst: 0.0,
        }
    }

    fn record(&mut self, err: f64) {
        self.cases += 1;
        if err.is_nan() || err > self.tolerance {
            self.failures += 1;
        }
        if err.is_nan() || err > self.worst {
            self.worst = err;
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            pass: self.failures == 0 && self.cases > 0,
            cases: self.cases,
            failures: self.failures,
            worst: self.worst,
            tolerance: self.tolerance,
        }
    }
}

/// `|a - b| / max(1, |b|)`.
pub fn oracle_error(value: Complex64, oracle: Complex64) -> f64 {
    (value - oracle).norm() / oracle.norm().max(1.0)
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn ryser(m: &ComplexMatrix, fault: Option<Fault>) -> Result<Complex64> {
    match fault {
        None => Ok(permanent::permanent_ryser(m)?.value),
        Some(Fault::RyserSign) => {
            let n = m.dim();
            let t = Algorithm::Ryser.term_count(n);
            let head = permanent::partial_sum(m, Algorithm::Ryser, 0..t - 1);
            let last = permanent::partial_sum(m, Algorithm::Ryser, t - 1..t);
            Ok(permanent::finish(Algorithm::Ryser, n, head - last))
        }
    }
}

pub fn run(opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.n_max > FAST_LIMIT {
        return Err(Error::Limit {
            algorithm: Algorithm::Ryser,
            dim: opts.n_max,
            limit: FAST_LIMIT,
        });
    }
    if opts.n_max < 2 {
        return Err(Error::DimensionTooSmall {
            what: "n-max",
            dim: opts.n_max,
            min: 2,
        });
    }

    let mut checks = Vec::new();
    checks.push(oracle_equivalence(opts)?);
    let (canon, residuals) = canonical_dips(opts.n_max)?;
    checks.push(canon);
    checks.push(two_photon_closed_form()?);
    checks.push(beam_splitter()?);
    checks.push(state_expansion(opts.seed)?);
    checks.push(unitarity(opts.seed)?);
    checks.extend(symmetries(opts.seed)?);

    Ok(VerifyReport {
        pass: checks.iter().all(|c| c.pass),
        options: opts.clone(),
        checks,
        canonical_residuals: residuals,
    })
}

fn oracle_equivalence(opts: &VerifyOptions) -> Result<CheckResult> {
    let mut tally = Tally::new("oracle_equivalence", ORACLE_TOLERANCE);
    let mut rng = sampling::rng(opts.seed);
    for n in 2..=8 {
        for _ in 0..100 {
            let m = sampling::random_complex_matrix(&mut rng, n);
            let naive = permanent::permanent_naive(&m)?.value;
            tally.record(oracle_error(ryser(&m, opts.fault)?, naive));
            tally.record(oracle_error(permanent::permanent_glynn(&m)?.value, naive));
        }
    }
    Ok(tally.finish())
}

fn canonical_dips(n_max: usize) -> Result<(CheckResult, Vec<CanonicalResidual>)> {
    let mut tally = Tally::new("canonical_dips", DIP_TOLERANCE);
    let mut residuals = Vec::new();
    for n in 2..=n_max {
        let phases = canonical_dip(n)?;
        let t = build_transfer_matrix(&phases, NormConvention::Unit)?;
        let scale = factorial(n);
        let ryser = par_permanent(t.matrix(), Algorithm::Ryser)?.value.norm() / scale;
        let glynn = par_permanent(t.matrix(), Algorithm::Glynn)?.value.norm() / scale;
        tally.record(ryser);
        tally.record(glynn);
        residuals.push(CanonicalResidual { n, ryser, glynn });
    }
    Ok((tally.finish(), residuals))
}

fn two_photon_closed_form() -> Result<CheckResult> {
    let mut tally = Tally::new("two_photon_closed_form", CLOSED_FORM_TOLERANCE);
    for k in 0..360 {
        let delta = TAU * k as f64 / 360.0;
        let closed = g2_closed_form(delta, 0.0).g_value;
        let phases = PhaseConfig::new(vec![delta, 0.0])?;
        let perm = gn_permanent(&phases, NormConvention::Unit, Algorithm::Ryser)?.g_value;
        tally.record((closed - perm).abs());
    }
    tally.record(g2_closed_form(0.0, PI).g_value.abs());
    Ok(tally.finish())
}

fn beam_splitter() -> Result<CheckResult> {
    let mut tally = Tally::new("beam_splitter", 1e-12);
    let d = beam_splitter_output(&[1, 1])?;
    tally.record((d.weight(&[2, 0]) - 0.5).abs());
    tally.record((d.weight(&[0, 2]) - 0.5).abs());
    tally.record(d.weight(&[1, 1]).abs());
    tally.record((d.total_weight - 1.0).abs());
    Ok(tally.finish())
}

fn state_expansion(seed: u64) -> Result<CheckResult> {
    let mut tally = Tally::new("state_expansion_coincidence", ORACLE_TOLERANCE);
    let mut rng = sampling::rng(seed.wrapping_add(1));
    for n in 2..=5 {
        for _ in 0..50 {
            let phases = sampling::random_phases(&mut rng, n);
            let t = build_transfer_matrix(&phases, NormConvention::Unit)?;
            let r = coincidence_amplitude_check(t.matrix(), Algorithm::Ryser)?;
            tally.record(r.discrepancy / r.permanent.norm().max(1.0));
        }
    }
    Ok(tally.finish())
}

fn unitarity(seed: u64) -> Result<CheckResult> {
    let mut tally = Tally::new("unitary_total_weight", UNITARITY_TOLERANCE);
    let mut rng = sampling::rng(seed.wrapping_add(2));
    for n in 2..=4 {
        for _ in 0..20 {
            let u = sampling::random_unitary(&mut rng, n);
            tally.record((full_state_expansion(&u)?.total_weight - 1.0).abs());
        }
    }
    Ok(tally.finish())
}

fn symmetries(seed: u64) -> Result<[CheckResult; 3]> {
    let mut perm_tally = Tally::new("symmetry_column_permutation", SYMMETRY_TOLERANCE);
    let mut shift_tally = Tally::new("symmetry_2pi_shift", SYMMETRY_TOLERANCE);
    let mut neg_tally = Tally::new("symmetry_negation", SYMMETRY_TOLERANCE);
    let mut rng = sampling::rng(seed.wrapping_add(3));
    let g = |deltas: Vec<f64>| -> Result<f64> {
        Ok(gn_permanent(
            &PhaseConfig::new(deltas)?,
            NormConvention::Unit,
            Algorithm::Ryser,
        )?
        .g_value)
    };
    for case in 0..100 {
        let n = 2 + case % 9;
        let phases = sampling::random_phases(&mut rng, n);
        let base = g(phases.deltas().to_vec())?;

        let order = sampling::random_permutation(&mut rng, n);
        let permuted = order.iter().map(|&i| phases.deltas()[i]).collect();
        perm_tally.record(relative_error(g(permuted)?, base));

        let mut shifted = phases.deltas().to_vec();
        shifted[case % n] += TAU;
        shift_tally.record(relative_error(g(shifted)?, base));

        let negated = phases.deltas().iter().map(|d| -d).collect();
        neg_tally.record(relative_error(g(negated)?, base));
    }
    Ok([
        perm_tally.finish(),
        shift_tally.finish(),
        neg_tally.finish(),
    ])
}
