//! Exact permanents of complex square matrices.
//!
//! Three independent routes are provided:
//!
//! * [`permanent_naive`] sums over all `N!` permutations. Slow, but it is the
//!   definition, so the other two are checked against it.
//! * [`permanent_ryser`] uses the inclusion-exclusion formula
//!   `perm(A) = (-1)^N Σ_S (-1)^|S| Π_i Σ_{j∈S} a_ij` over column subsets `S`.
//! * [`permanent_glynn`] uses the `±1` formula
//!   `perm(A) = 2^(1-N) Σ_δ (Π_k δ_k) Π_i Σ_j δ_j a_ij` with `δ_1 = +1`.
//!
//! Both fast routes walk their subset space in Gray-code order so consecutive
//! terms differ by a single column, and each step costs `O(N)`.
//!
//! Near an interference zero the Gray-code terms are many orders of magnitude
//! larger than their sum. Both fast routes therefore carry row sums, products
//! and totals in double-double arithmetic ([`PartialSum`]) and round to `f64`
//! once, at the end; the result is accurate relative to `|perm|` itself rather
//! than to the largest term.
//!
//! The subset space is cut into fixed segments ([`segments`]). Every segment
//! starts from a directly computed state, so segments can be evaluated in any
//! order or on any thread; summing the partial sums in segment order gives the
//! same bits as the sequential routines here.

use alloc::vec;
use alloc::vec::Vec;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Mul, Neg, Range, Sub, SubAssign};

use num_complex::Complex64;
use twofloat::TwoFloat;

use crate::error::{Error, Result};

/// Largest dimension accepted by [`permanent_naive`].
pub const NAIVE_LIMIT: usize = 10;
/// Largest dimension accepted by the Gray-code algorithms.
pub const FAST_LIMIT: usize = 30;

/// Minimum number of Gray-code steps per segment.
const MIN_SEGMENT_LEN: u64 = 1 << 10;
/// log2 of the maximum number of segments.
const MAX_SEGMENTS_LOG2: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Algorithm {
    Naive,
    Ryser,
    Glynn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Naive, Algorithm::Ryser, Algorithm::Glynn];

    pub fn limit(self) -> usize {
        match self {
            Algorithm::Naive => NAIVE_LIMIT,
            Algorithm::Ryser | Algorithm::Glynn => FAST_LIMIT,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Naive => "naive",
            Algorithm::Ryser => "ryser",
            Algorithm::Glynn => "glynn",
        }
    }

    pub fn check(self, dim: usize) -> Result<()> {
        if dim > self.limit() {
            return Err(Error::Limit {
                algorithm: self,
                dim,
                limit: self.limit(),
            });
        }
        Ok(())
    }

    /// Number of Gray-code terms the algorithm visits for an `dim × dim` matrix.
    ///
    /// Naive has no subset space and reports 0.
    pub fn term_count(self, dim: usize) -> u64 {
        match self {
            Algorithm::Naive => 0,
            Algorithm::Ryser => 1u64 << dim,
            Algorithm::Glynn => 1u64 << (dim - 1),
        }
    }
}

impl core::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Algorithm::Naive),
            "ryser" => Ok(Algorithm::Ryser),
            "glynn" => Ok(Algorithm::Glynn),
            _ => Err(Error::UnsupportedInput(
                "algorithm must be naive, ryser or glynn",
            )),
        }
    }
}

impl core::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Dense row-major complex square matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionTooSmall {
                what: "matrix",
                dim,
                min: 1,
            });
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(ComplexMatrix { dim, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    /// Build entry-wise from `f(row, col)`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self::new(dim, data)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_fn(dim, |r, c| {
            if r == c {
                Complex64::ONE
            } else {
                Complex64::ZERO
            }
        })
    }

    pub fn ones(dim: usize) -> Result<Self> {
        Self::from_fn(dim, |_, _| Complex64::ONE)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(self.get(c, r));
            }
        }
        ComplexMatrix { dim: n, data }
    }

    /// `out[r][c] = self[row_perm[r]][col_perm[c]]`.
    ///
    /// # Panics
    /// If either slice is not a permutation of `0..dim`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        let n = self.dim;
        assert!(is_permutation(row_perm, n) && is_permutation(col_perm, n));
        let mut data = Vec::with_capacity(n * n);
        for &r in row_perm {
            for &c in col_perm {
                data.push(self.get(r, c));
            }
        }
        ComplexMatrix { dim: n, data }
    }

    pub fn scale_row(&mut self, row: usize, s: Complex64) {
        let n = self.dim;
        for z in &mut self.data[row * n..(row + 1) * n] {
            *z *= s;
        }
    }

    pub fn scale_col(&mut self, col: usize, s: Complex64) {
        let n = self.dim;
        for r in 0..n {
            self.data[r * n + col] *= s;
        }
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Largest `|(A·A^†)_ij - δ_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: Complex64 = self
                    .row(i)
                    .iter()
                    .zip(self.row(j))
                    .map(|(a, b)| a * b.conj())
                    .sum();
                let target = if i == j {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }
}

fn is_permutation(p: &[usize], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    p.iter()
        .all(|&i| i < n && !core::mem::replace(&mut seen[i], true))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PermanentResult {
    pub value: Complex64,
    pub algorithm: Algorithm,
    pub dim: usize,
}

pub fn permanent(m: &ComplexMatrix, algorithm: Algorithm) -> Result<PermanentResult> {
    match algorithm {
        Algorithm::Naive => permanent_naive(m),
        Algorithm::Ryser => permanent_ryser(m),
        Algorithm::Glynn => permanent_glynn(m),
    }
}

/// Literal sum over all permutations (Heap's algorithm), `O(N!·N)`.
pub fn permanent_naive(m: &ComplexMatrix) -> Result<PermanentResult> {
    let n = m.dim();
    Algorithm::Naive.check(n)?;

    let mut sigma: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    let term = |sigma: &[usize]| -> Complex64 {
        sigma
            .iter()
            .enumerate()
            .fold(Complex64::ONE, |acc, (col, &row)| acc * m.get(row, col))
    };

    let mut sum = term(&sigma);
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                sigma.swap(0, i);
            } else {
                sigma.swap(counters[i], i);
            }
            sum += term(&sigma);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }

    Ok(PermanentResult {
        value: sum,
        algorithm: Algorithm::Naive,
        dim: n,
    })
}

pub fn permanent_ryser(m: &ComplexMatrix) -> Result<PermanentResult> {
    gray_code_permanent(m, Algorithm::Ryser)
}

pub fn permanent_glynn(m: &ComplexMatrix) -> Result<PermanentResult> {
    gray_code_permanent(m, Algorithm::Glynn)
}

fn gray_code_permanent(m: &ComplexMatrix, algorithm: Algorithm) -> Result<PermanentResult> {
    let sum = segments(algorithm, m.dim())?
        .into_iter()
        .map(|seg| partial_sum(m, algorithm, seg))
        .sum();
    Ok(PermanentResult {
        value: finish(algorithm, m.dim(), sum),
        algorithm,
        dim: m.dim(),
    })
}

/// Fixed partition of the Gray-code index range for `algorithm` at `dim`.
///
/// Boundaries depend only on `(algorithm, dim)`, never on the thread count.
pub fn segments(algorithm: Algorithm, dim: usize) -> Result<Vec<Range<u64>>> {
    if algorithm == Algorithm::Naive {
        return Err(Error::UnsupportedInput(
            "naive permanent has no Gray-code segments",
        ));
    }
    algorithm.check(dim)?;
    if dim == 0 {
        return Err(Error::DimensionTooSmall {
            what: "matrix",
            dim,
            min: 1,
        });
    }
    let total = algorithm.term_count(dim);
    let len = MIN_SEGMENT_LEN.max(total >> MAX_SEGMENTS_LOG2);
    let mut out = Vec::new();
    let mut start = 0;
    while start < total {
        let end = (start + len).min(total);
        out.push(start..end);
        start = end;
    }
    Ok(out)
}

/// Sum of the signed Gray-code terms with index in `range`.
///
/// Indices run over `0..algorithm.term_count(dim)`; term `k` belongs to the
/// subset (or sign vector) `k ^ (k >> 1)`. Combine the partial sums of a full
/// partition and pass the total through [`finish`].
///
/// # Panics
/// If `algorithm` is [`Algorithm::Naive`] or the range exceeds the term count.
pub fn partial_sum(m: &ComplexMatrix, algorithm: Algorithm, range: Range<u64>) -> PartialSum {
    match algorithm {
        Algorithm::Ryser => ryser_partial(m, range),
        Algorithm::Glynn => glynn_partial(m, range),
        Algorithm::Naive => panic!("naive permanent has no partial sums"),
    }
}

/// Apply the algorithm's global sign or scale to a complete partial-sum total.
pub fn finish(algorithm: Algorithm, dim: usize, total: PartialSum) -> Complex64 {
    let z = total.to_complex();
    match algorithm {
        Algorithm::Ryser if dim % 2 == 1 => -z,
        Algorithm::Ryser | Algorithm::Naive => z,
        // Division by a power of two is exact.
        Algorithm::Glynn => z / (1u64 << (dim - 1)) as f64,
    }
}

/// A complex number in double-double precision (about 106 significant bits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialSum {
    re: TwoFloat,
    im: TwoFloat,
}

impl PartialSum {
    pub const ZERO: PartialSum = PartialSum {
        re: TwoFloat::from_f64(0.0),
        im: TwoFloat::from_f64(0.0),
    };

    pub fn from_complex(z: Complex64) -> Self {
        PartialSum {
            re: TwoFloat::from(z.re),
            im: TwoFloat::from(z.im),
        }
    }

    /// Nearest `f64` complex value.
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re.hi() + self.re.lo(), self.im.hi() + self.im.lo())
    }
}

impl Default for PartialSum {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Add for PartialSum {
    type Output = PartialSum;
    fn add(self, rhs: PartialSum) -> PartialSum {
        PartialSum {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for PartialSum {
    type Output = PartialSum;
    fn sub(self, rhs: PartialSum) -> PartialSum {
        PartialSum {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Neg for PartialSum {
    type Output = PartialSum;
    fn neg(self) -> PartialSum {
        PartialSum {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Mul for PartialSum {
    type Output = PartialSum;
    fn mul(self, rhs: PartialSum) -> PartialSum {
        PartialSum {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

impl AddAssign for PartialSum {
    fn add_assign(&mut self, rhs: PartialSum) {
        *self = *self + rhs;
    }
}

impl SubAssign for PartialSum {
    fn sub_assign(&mut self, rhs: PartialSum) {
        *self = *self - rhs;
    }
}

impl AddAssign<Complex64> for PartialSum {
    fn add_assign(&mut self, z: Complex64) {
        self.re += z.re;
        self.im += z.im;
    }
}

impl SubAssign<Complex64> for PartialSum {
    fn sub_assign(&mut self, z: Complex64) {
        self.re -= z.re;
        self.im -= z.im;
    }
}

impl Sum for PartialSum {
    fn sum<I: Iterator<Item = PartialSum>>(iter: I) -> PartialSum {
        iter.fold(PartialSum::ZERO, |acc, x| acc + x)
    }
}

fn product(row_sums: &[PartialSum]) -> PartialSum {
    row_sums[1..].iter().fold(row_sums[0], |acc, &s| acc * s)
}

#[inline]
fn gray(k: u64) -> u64 {
    k ^ (k >> 1)
}

fn ryser_partial(m: &ComplexMatrix, range: Range<u64>) -> PartialSum {
    let n = m.dim();
    assert!(range.end <= 1u64 << n, "segment past end of subset space");
    if range.is_empty() {
        return PartialSum::ZERO;
    }

    // Row sums for the first subset of the segment, computed directly.
    let mut subset = gray(range.start);
    let mut row_sums = vec![PartialSum::ZERO; n];
    for (r, sum) in row_sums.iter_mut().enumerate() {
        let row = m.row(r);
        for (c, z) in row.iter().enumerate() {
            if subset >> c & 1 == 1 {
                *sum += *z;
            }
        }
    }

    let mut total = PartialSum::ZERO;
    let mut k = range.start;
    loop {
        // The empty subset contributes a product of zeros.
        if subset != 0 {
            let prod = product(&row_sums);
            if subset.count_ones() % 2 == 1 {
                total -= prod;
            } else {
                total += prod;
            }
        }
        k += 1;
        if k >= range.end {
            break;
        }
        let col = k.trailing_zeros() as usize;
        subset ^= 1 << col;
        if subset >> col & 1 == 1 {
            for (r, sum) in row_sums.iter_mut().enumerate() {
                *sum += m.get(r, col);
            }
        } else {
            for (r, sum) in row_sums.iter_mut().enumerate() {
                *sum -= m.get(r, col);
            }
        }
    }
    total
}

fn glynn_partial(m: &ComplexMatrix, range: Range<u64>) -> PartialSum {
    let n = m.dim();
    assert!(
        range.end <= 1u64 << (n - 1),
        "segment past end of sign space"
    );
    if range.is_empty() {
        return PartialSum::ZERO;
    }

    // Bit b of `flips` set means δ_{b+1} = -1; column 0 is pinned to +1.
    let mut flips = gray(range.start);
    let mut row_sums = vec![PartialSum::ZERO; n];
    for (r, sum) in row_sums.iter_mut().enumerate() {
        let row = m.row(r);
        *sum = PartialSum::from_complex(row[0]);
        for (c, z) in row.iter().enumerate().skip(1) {
            if flips >> (c - 1) & 1 == 1 {
                *sum -= *z;
            } else {
                *sum += *z;
            }
        }
    }

    let mut total = PartialSum::ZERO;
    let mut k = range.start;
    loop {
        let prod = product(&row_sums);
        if flips.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
        k += 1;
        if k >= range.end {
            break;
        }
        let bit = k.trailing_zeros() as usize;
        flips ^= 1 << bit;
        let col = bit + 1;
        if flips >> bit & 1 == 1 {
            for (r, sum) in row_sums.iter_mut().enumerate() {
                let z = m.get(r, col);
                *sum -= z + z;
            }
        } else {
            for (r, sum) in row_sums.iter_mut().enumerate() {
                let z = m.get(r, col);
                *sum += z + z;
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn all(m: &ComplexMatrix) -> [Complex64; 3] {
        [
            permanent_naive(m).unwrap().value,
            permanent_ryser(m).unwrap().value,
            permanent_glynn(m).unwrap().value,
        ]
    }

    #[test]
    fn single_entry_is_itself() {
        let z = c(0.3, -1.7);
        let m = ComplexMatrix::new(1, vec![z]).unwrap();
        for v in all(&m) {
            assert!((v - z).norm() < 1e-15);
        }
    }

    #[test]
    fn hom_matrix_vanishes() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(-1.0, 0.0)],
            vec![c(1.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        for v in all(&m) {
            assert_eq!(v, Complex64::ZERO);
        }
    }

    #[test]
    fn two_by_two_by_hand() {
        let (a, b, cc, d) = (c(1.0, 2.0), c(-0.5, 0.25), c(3.0, -1.0), c(0.0, 1.5));
        let m = ComplexMatrix::from_rows(&[vec![a, b], vec![cc, d]]).unwrap();
        let expected = a * d + b * cc;
        for v in all(&m) {
            assert!((v - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn identity_and_ones() {
        for n in 1..=7 {
            let id = ComplexMatrix::identity(n).unwrap();
            let ones = ComplexMatrix::ones(n).unwrap();
            let fact = crate::factorial(n);
            for v in all(&id) {
                assert!((v - Complex64::ONE).norm() < 1e-12);
            }
            for v in all(&ones) {
                assert!((v.re - fact).abs() <= 1e-12 * fact && v.im.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn identity_twenty() {
        let id = ComplexMatrix::identity(20).unwrap();
        assert!((permanent_ryser(&id).unwrap().value - 1.0).norm() < 1e-9);
        assert!((permanent_glynn(&id).unwrap().value - 1.0).norm() < 1e-9);
    }

    #[test]
    fn ones_twelve() {
        let ones = ComplexMatrix::ones(12).unwrap();
        let expected = 479_001_600.0;
        for v in [
            permanent_ryser(&ones).unwrap().value,
            permanent_glynn(&ones).unwrap().value,
        ] {
            assert!((v - expected).norm() <= 1e-10 * expected);
        }
    }

    #[test]
    fn limits_are_enforced() {
        let big = ComplexMatrix::identity(11).unwrap();
        assert!(matches!(
            permanent_naive(&big),
            Err(Error::Limit {
                algorithm: Algorithm::Naive,
                dim: 11,
                limit: 10
            })
        ));
        let huge = ComplexMatrix::identity(31).unwrap();
        assert!(matches!(
            permanent_ryser(&huge),
            Err(Error::Limit { limit: 30, .. })
        ));
        assert!(matches!(
            permanent_glynn(&huge),
            Err(Error::Limit { limit: 30, .. })
        ));
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(ComplexMatrix::new(0, vec![]).is_err());
        assert!(ComplexMatrix::new(2, vec![Complex64::ONE; 3]).is_err());
        assert!(ComplexMatrix::new(1, vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn segments_cover_the_space_once() {
        for alg in [Algorithm::Ryser, Algorithm::Glynn] {
            for n in [1, 5, 11, 17, 24] {
                let segs = segments(alg, n).unwrap();
                assert!(segs.len() <= 1 << MAX_SEGMENTS_LOG2);
                assert_eq!(segs[0].start, 0);
                assert_eq!(segs.last().unwrap().end, alg.term_count(n));
                for w in segs.windows(2) {
                    assert_eq!(w[0].end, w[1].start);
                }
            }
        }
    }

    #[test]
    fn segment_sums_add_up_in_any_split() {
        let m = ComplexMatrix::from_fn(11, |r, col| {
            c((r * 7 + col) as f64 * 0.13, (r as f64 - col as f64) * 0.05)
        })
        .unwrap();
        let whole = permanent_ryser(&m).unwrap().value;
        let total = 1u64 << 11;
        let split = [0, 3, 1000, 1001, 1500, total];
        let parts: PartialSum = split
            .windows(2)
            .map(|w| partial_sum(&m, Algorithm::Ryser, w[0]..w[1]))
            .sum();
        let rebuilt = finish(Algorithm::Ryser, 11, parts);
        assert!((rebuilt - whole).norm() <= 1e-10 * whole.norm());
    }
}
