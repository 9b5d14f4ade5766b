//! Coincidence correlation functions.
//!
//! `G^(N)` is computed from the permanent of the transfer matrix. Two
//! independent cross-checks sit alongside it: the two-photon closed form and
//! a literal expansion of the product output state into occupation patterns.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{build_transfer_matrix, NormConvention, PhaseConfig};
use crate::permanent::{permanent, Algorithm, ComplexMatrix};

/// Largest mode count accepted by [`full_state_expansion`] (`N^N` assignments).
pub const EXPANSION_LIMIT: usize = 6;

/// How a correlation value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Method {
    ClosedForm,
    Permanent(Algorithm),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorrelationResult {
    /// `|amplitude|²`.
    pub g_value: f64,
    /// Sum over permutations before squaring.
    pub amplitude: Complex64,
    pub n: usize,
    pub norm: NormConvention,
    pub method: Method,
}

/// `G^(2) = 2(1 + cos(Δφ₁ - Δφ₂))` for unit-norm coefficients.
pub fn g2_closed_form(dp1: f64, dp2: f64) -> CorrelationResult {
    let amplitude = Complex64::from_polar(1.0, -(dp1 + 2.0 * dp2))
        + Complex64::from_polar(1.0, -(dp2 + 2.0 * dp1));
    CorrelationResult {
        g_value: 2.0 * (1.0 + libm::cos(dp1 - dp2)),
        amplitude,
        n: 2,
        norm: NormConvention::Unit,
        method: Method::ClosedForm,
    }
}

/// `G^(N) = |perm(c)|²` for the transfer matrix built from `phases`.
pub fn gn_permanent(
    phases: &PhaseConfig,
    norm: NormConvention,
    algorithm: Algorithm,
) -> Result<CorrelationResult> {
    algorithm.check(phases.n())?;
    let t = build_transfer_matrix(phases, norm)?;
    let amplitude = permanent(t.matrix(), algorithm)?.value;
    Ok(CorrelationResult {
        g_value: amplitude.norm_sqr(),
        amplitude,
        n: phases.n(),
        norm,
        method: Method::Permanent(algorithm),
    })
}

/// Photon count per output mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct OccupancyPattern(Vec<u8>);

impl OccupancyPattern {
    pub fn new(counts: Vec<u8>) -> Self {
        OccupancyPattern(counts)
    }

    /// `|1, 1, …, 1⟩`: one photon in each of `n` modes.
    pub fn coincidence(n: usize) -> Self {
        OccupancyPattern(vec![1; n])
    }

    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    pub fn photons(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }

    pub fn is_coincidence(&self) -> bool {
        self.0.iter().all(|&c| c == 1)
    }

    /// `Π_j k_j!`, the norm² of `Π_j (b_j^†)^{k_j} |0⟩`.
    pub fn bosonic_factor(&self) -> f64 {
        self.0
            .iter()
            .map(|&c| crate::factorial(c as usize))
            .product()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PatternWeight {
    pub pattern: OccupancyPattern,
    /// Coefficient of the operator monomial `Π_j (b_j^†)^{k_j}`: the sum of
    /// `Π_n c_{n,m(n)}` over every assignment landing on this pattern.
    pub amplitude: Complex64,
    /// `|amplitude|²·Π_j k_j!`.
    pub weight: f64,
}

impl PatternWeight {
    /// Coefficient of the normalized Fock state `|k_1, …, k_N⟩`.
    pub fn state_amplitude(&self) -> Complex64 {
        self.amplitude * libm::sqrt(self.pattern.bosonic_factor())
    }
}

/// Output weights per occupation pattern.
///
/// `total_weight` is reported as computed. For a unitary matrix it is 1; for
/// an `N`-detector slice of a larger mode transformation it is below 1 and is
/// deliberately not renormalized.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OutputDistribution {
    pub entries: Vec<PatternWeight>,
    pub total_weight: f64,
}

impl OutputDistribution {
    pub fn get(&self, counts: &[u8]) -> Option<&PatternWeight> {
        self.entries.iter().find(|e| e.pattern.counts() == counts)
    }

    pub fn weight(&self, counts: &[u8]) -> f64 {
        self.get(counts).map_or(0.0, |e| e.weight)
    }

    pub fn coincidence(&self) -> Option<&PatternWeight> {
        self.entries.iter().find(|e| e.pattern.is_coincidence())
    }
}

/// Expand `Π_n Σ_m c_nm b_m^† |0⟩` term by term.
///
/// Every one of the `N^N` ways to send source `n` to mode `m(n)` adds
/// `Π_n c_{n,m(n)}` to the pattern it produces. The coincidence pattern
/// collects exactly the permutations, so its amplitude is `perm(c)`.
pub fn full_state_expansion(matrix: &ComplexMatrix) -> Result<OutputDistribution> {
    let n = matrix.dim();
    if n > EXPANSION_LIMIT {
        return Err(Error::DimensionTooLarge {
            what: "state expansion",
            dim: n,
            limit: EXPANSION_LIMIT,
        });
    }

    let mut amplitudes: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
    let mut assignment = vec![0usize; n];
    let mut counts = vec![0u8; n];
    loop {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut term = Complex64::ONE;
        for (source, &mode) in assignment.iter().enumerate() {
            term *= matrix.get(source, mode);
            counts[mode] += 1;
        }
        *amplitudes.entry(counts.clone()).or_insert(Complex64::ZERO) += term;

        // Odometer over assignments, last source fastest.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(collect(amplitudes));
            }
            pos -= 1;
            assignment[pos] += 1;
            if assignment[pos] < n {
                break;
            }
            assignment[pos] = 0;
        }
    }
}

fn collect(amplitudes: BTreeMap<Vec<u8>, Complex64>) -> OutputDistribution {
    let entries: Vec<PatternWeight> = amplitudes
        .into_iter()
        .map(|(counts, amplitude)| {
            let pattern = OccupancyPattern(counts);
            let weight = amplitude.norm_sqr() * pattern.bosonic_factor();
            PatternWeight {
                pattern,
                amplitude,
                weight,
            }
        })
        .collect();
    let total_weight = entries.iter().map(|e| e.weight).sum();
    OutputDistribution {
        entries,
        total_weight,
    }
}

/// The symmetric 50:50 beam splitter `(1/√2)[[1, 1], [1, -1]]`.
pub fn beam_splitter_matrix() -> ComplexMatrix {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    ComplexMatrix::from_rows(&[vec![h, h], vec![h, -h]]).expect("2x2 literal")
}

/// Output of the 50:50 beam splitter for one photon in each input port.
pub fn beam_splitter_output(input: &[u8]) -> Result<OutputDistribution> {
    if input != [1, 1] {
        return Err(Error::UnsupportedInput("beam splitter input must be |1,1>"));
    }
    full_state_expansion(&beam_splitter_matrix())
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoincidenceReport {
    pub n: usize,
    pub expansion_amplitude: Complex64,
    pub permanent: Complex64,
    pub algorithm: Algorithm,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compare the coincidence amplitude of the state expansion with `perm(matrix)`.
///
/// Passes when the two differ by at most `1e-10·max(1, |perm|)`.
pub fn coincidence_amplitude_check(
    matrix: &ComplexMatrix,
    algorithm: Algorithm,
) -> Result<CoincidenceReport> {
    let dist = full_state_expansion(matrix)?;
    let expansion_amplitude = dist
        .coincidence()
        .map(|e| e.amplitude)
        .unwrap_or(Complex64::ZERO);
    let perm = permanent(matrix, algorithm)?.value;
    let discrepancy = (expansion_amplitude - perm).norm();
    let tolerance = 1e-10 * perm.norm().max(1.0);
    Ok(CoincidenceReport {
        n: matrix.dim(),
        expansion_amplitude,
        permanent: perm,
        algorithm,
        discrepancy,
        tolerance,
        pass: discrepancy <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn closed_form_values() {
        assert!(g2_closed_form(0.0, PI).g_value.abs() < 1e-15);
        for phi in [-3.0, 0.0, 0.7, 12.5] {
            assert!((g2_closed_form(phi, phi).g_value - 4.0).abs() < 1e-15);
        }
        assert!((g2_closed_form(0.0, PI / 2.0).g_value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_amplitude_matches_value() {
        for (a, b) in [(0.1, 2.3), (-1.0, 4.0), (3.3, 3.3)] {
            let r = g2_closed_form(a, b);
            assert!((r.amplitude.norm_sqr() - r.g_value).abs() < 1e-12);
        }
    }

    #[test]
    fn permanent_route_two_photons() {
        let p = PhaseConfig::new(vec![0.0, PI / 2.0]).unwrap();
        for alg in Algorithm::ALL {
            let r = gn_permanent(&p, NormConvention::Unit, alg).unwrap();
            assert!((r.g_value - 2.0).abs() < 1e-12);
            let closed = g2_closed_form(0.0, PI / 2.0);
            assert!((r.amplitude - closed.amplitude).norm() < 1e-12);
        }
    }

    #[test]
    fn gn_examples() {
        let zero = PhaseConfig::new(vec![0.0, PI]).unwrap();
        assert!(
            gn_permanent(&zero, NormConvention::Unit, Algorithm::Ryser)
                .unwrap()
                .g_value
                < 1e-24
        );

        let flat = PhaseConfig::new(vec![0.0; 3]).unwrap();
        let r = gn_permanent(&flat, NormConvention::Unit, Algorithm::Glynn).unwrap();
        assert!((r.g_value - 36.0).abs() < 1e-12);

        let canon = PhaseConfig::new(vec![2.0 * PI / 3.0, 4.0 * PI, 6.0 * PI]).unwrap();
        let r = gn_permanent(&canon, NormConvention::Unit, Algorithm::Ryser).unwrap();
        assert!(r.g_value <= 1e-9 * 36.0);
    }

    #[test]
    fn gn_respects_algorithm_limit() {
        let p = PhaseConfig::new(vec![0.0; 11]).unwrap();
        assert!(matches!(
            gn_permanent(&p, NormConvention::Unit, Algorithm::Naive),
            Err(Error::Limit { .. })
        ));
    }

    #[test]
    fn beam_splitter_anchor() {
        let d = beam_splitter_output(&[1, 1]).unwrap();
        assert!((d.weight(&[2, 0]) - 0.5).abs() < 1e-12);
        assert!((d.weight(&[0, 2]) - 0.5).abs() < 1e-12);
        assert_eq!(d.weight(&[1, 1]), 0.0);
        assert!((d.total_weight - 1.0).abs() < 1e-12);
        // (|2,0> - |0,2>)/√2
        let a20 = d.get(&[2, 0]).unwrap().state_amplitude();
        let a02 = d.get(&[0, 2]).unwrap().state_amplitude();
        assert!((a20 - FRAC_1_SQRT_2).norm() < 1e-12);
        assert!((a02 + FRAC_1_SQRT_2).norm() < 1e-12);
    }

    #[test]
    fn beam_splitter_rejects_other_inputs() {
        assert!(beam_splitter_output(&[2, 0]).is_err());
        assert!(beam_splitter_output(&[1, 1, 0]).is_err());
    }

    #[test]
    fn free_space_hom_expansion() {
        let p = PhaseConfig::new(vec![0.0, PI]).unwrap();
        let t = build_transfer_matrix(&p, NormConvention::SqrtModes).unwrap();
        let d = full_state_expansion(t.matrix()).unwrap();
        assert!(d.coincidence().unwrap().amplitude.norm() < 1e-15);
        assert!((d.weight(&[2, 0]) - 0.5).abs() < 1e-12);
        assert!((d.weight(&[0, 2]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identity_stays_put() {
        for n in 1..=5 {
            let d = full_state_expansion(&ComplexMatrix::identity(n).unwrap()).unwrap();
            for e in &d.entries {
                let expected = if e.pattern.is_coincidence() { 1.0 } else { 0.0 };
                assert_eq!(e.weight, expected);
            }
        }
    }

    #[test]
    fn expansion_enumerates_every_pattern() {
        // C(2N-1, N) patterns of N photons in N modes.
        let expected = [1, 3, 10, 35, 126];
        for (n, count) in (1..=5).zip(expected) {
            let d = full_state_expansion(&ComplexMatrix::ones(n).unwrap()).unwrap();
            assert_eq!(d.entries.len(), count);
            assert!(d.entries.iter().all(|e| e.pattern.photons() == n));
        }
    }

    #[test]
    fn expansion_limit() {
        let m = ComplexMatrix::identity(7).unwrap();
        assert!(matches!(
            full_state_expansion(&m),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn coincidence_check_on_hom_matrix() {
        let p = PhaseConfig::new(vec![0.0, PI]).unwrap();
        let t = build_transfer_matrix(&p, NormConvention::Unit).unwrap();
        let r = coincidence_amplitude_check(t.matrix(), Algorithm::Ryser).unwrap();
        assert!(r.pass);
        assert!(r.permanent.norm() < 1e-15 && r.expansion_amplitude.norm() < 1e-15);
    }
}
