//! Spreading sequences: maximal-length LFSR sequences, Gold families built
//! from a preferred pair, unit-energy extended signatures, and the partial
//! cross-correlation matrices between delayed signatures.
//!
//! Time is measured in chips (one chip = one time unit) and the chip pulse is
//! rectangular, so every correlation integral reduces exactly to a finite sum
//! of chip products.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Register length of the generating LFSRs.
pub const LFSR_DEGREE: u32 = 5;
/// Period of a degree-5 m-sequence, `2^5 - 1`.
pub const SEQUENCE_LEN: usize = (1 << LFSR_DEGREE) - 1;
/// Chips per bit after appending the extension bit.
pub const SIGNATURE_LEN: usize = SEQUENCE_LEN + 1;
/// Number of sequences in a Gold family, `2^5 + 1`.
pub const GOLD_FAMILY_SIZE: usize = SEQUENCE_LEN + 2;
/// Three-valued cross-correlation bound `t = 1 + 2^((n+1)/2)` for odd `n`.
const GOLD_T: i32 = 1 + (1 << LFSR_DEGREE.div_ceil(2));

/// Default preferred pair, `x^5 + x^2 + 1` and `x^5 + x^4 + x^3 + x^2 + 1`.
pub const DEFAULT_PREFERRED_PAIR: (u32, u32) = (0o45, 0o75);

/// Parses a feedback polynomial written in octal (e.g. `"45"` or `"0o45"`).
/// Bit `i` of the result is the coefficient of `x^i`.
pub fn parse_octal_taps(text: &str) -> Result<u32> {
    let trimmed = text.trim();
    let digits = trimmed
        .strip_prefix("0o")
        .or_else(|| trimmed.strip_prefix("0O"))
        .unwrap_or(trimmed);
    u32::from_str_radix(digits, 8)
        .map_err(|_| Error::Config(format!("tap mask {text:?} is not an octal number")))
}

fn validate_taps(taps: u32) -> Result<()> {
    // degree exactly 5, nonzero constant term
    if taps >> LFSR_DEGREE != 1 || taps & 1 == 0 {
        return Err(Error::NotPrimitive {
            taps,
            degree: LFSR_DEGREE,
        });
    }
    Ok(())
}

/// One period of the m-sequence with characteristic polynomial `taps`.
///
/// The recurrence is `a[n+5] = XOR_{i<5} c_i a[n+i]` where `c_i` is bit `i`
/// of `taps`; bit `j` of `seed` is the initial term `a[j]`.
pub fn generate_m_sequence(taps: u32, seed: u32) -> Result<Vec<u8>> {
    validate_taps(taps)?;
    let mask = (1u32 << LFSR_DEGREE) - 1;
    if seed & mask == 0 {
        return Err(Error::ZeroSeed {
            degree: LFSR_DEGREE,
        });
    }
    let feedback = taps & mask;
    let start = seed & mask;
    let mut state = start;
    let mut out = Vec::with_capacity(SEQUENCE_LEN);
    loop {
        out.push((state & 1) as u8);
        let next = (state & feedback).count_ones() & 1;
        state = (state >> 1) | (next << (LFSR_DEGREE - 1));
        if state == start {
            break;
        }
        if out.len() > SEQUENCE_LEN {
            break;
        }
    }
    if out.len() != SEQUENCE_LEN {
        return Err(Error::NotPrimitive {
            taps,
            degree: LFSR_DEGREE,
        });
    }
    Ok(out)
}

/// Periodic cross-correlation of two binary sequences in the `{1 -> +1, 0 -> -1}`
/// alphabet, with `b` advanced by `shift`.
pub fn periodic_correlation(a: &[u8], b: &[u8], shift: usize) -> i32 {
    let n = a.len();
    (0..n)
        .map(|m| if a[m] == b[(m + shift) % n] { 1 } else { -1 })
        .sum()
}

fn cyclic_xor(u: &[u8], v: &[u8], shift: usize) -> Vec<u8> {
    let n = u.len();
    (0..n).map(|m| u[m] ^ v[(m + shift) % n]).collect()
}

/// Builds the Gold family `{u, v, u ^ shift^j(v) : j = 0..30}` from two
/// degree-5 polynomials, after checking that their m-sequences form a
/// preferred pair.
pub fn generate_gold_family(preferred_pair: (u32, u32)) -> Result<Vec<Vec<u8>>> {
    let (first, second) = preferred_pair;
    let u = generate_m_sequence(first, 1)?;
    let v = generate_m_sequence(second, 1)?;
    for shift in 0..SEQUENCE_LEN {
        let value = periodic_correlation(&u, &v, shift);
        if value != -1 && value != -GOLD_T && value != GOLD_T - 2 {
            return Err(Error::NotPreferredPair {
                first,
                second,
                value,
                shift,
            });
        }
    }
    let mut family = Vec::with_capacity(GOLD_FAMILY_SIZE);
    family.push(u.clone());
    family.push(v.clone());
    family.extend((0..SEQUENCE_LEN).map(|j| cyclic_xor(&u, &v, j)));
    Ok(family)
}

/// A user's unit-energy chip sequence; every chip is `±1/sqrt(nc)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingCode {
    chips: Vec<f64>,
}

impl SpreadingCode {
    /// Maps binary chips `{1, 0}` to `{+1/sqrt(n), -1/sqrt(n)}`.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidParameter("empty chip sequence".into()));
        }
        let amp = 1.0 / (bits.len() as f64).sqrt();
        let chips = bits
            .iter()
            .map(|&b| match b {
                1 => Ok(amp),
                0 => Ok(-amp),
                other => Err(Error::InvalidParameter(format!(
                    "chip bit {other} is not binary"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { chips })
    }

    pub fn chips(&self) -> &[f64] {
        &self.chips
    }

    /// Spreading factor (chips per bit).
    pub fn nc(&self) -> usize {
        self.chips.len()
    }

    pub fn energy(&self) -> f64 {
        self.chips.iter().map(|c| c * c).sum()
    }
}

/// Extends a 31-chip Gold sequence with one `0` bit and normalizes it into a
/// 32-chip signature. The extension bit uses the antipodal alphabet like
/// every other chip, so the signature keeps unit energy.
pub fn build_signature(code_bits: &[u8]) -> Result<SpreadingCode> {
    if code_bits.len() != SEQUENCE_LEN {
        return Err(Error::LengthMismatch {
            expected: SEQUENCE_LEN,
            actual: code_bits.len(),
        });
    }
    let mut extended = code_bits.to_vec();
    extended.push(0);
    SpreadingCode::from_bits(&extended)
}

/// Signatures for the first `k` members of the Gold family generated by
/// `preferred_pair`, in construction order.
pub fn assign_codes(preferred_pair: (u32, u32), k: usize) -> Result<Vec<SpreadingCode>> {
    if k == 0 || k > GOLD_FAMILY_SIZE {
        return Err(Error::InvalidParameter(format!(
            "user count {k} outside [1, {GOLD_FAMILY_SIZE}]"
        )));
    }
    generate_gold_family(preferred_pair)?
        .iter()
        .take(k)
        .map(|bits| build_signature(bits))
        .collect()
}

/// Partial cross-correlation matrices `R(-1)`, `R(0)`, `R(1)`.
///
/// Entry `[k][l]` of `R(i)` correlates user `l`'s delayed signature with user
/// `k`'s signature delayed by `i` bit periods plus its own delay.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSet {
    pub r_minus: DMatrix<f64>,
    pub r_zero: DMatrix<f64>,
    pub r_plus: DMatrix<f64>,
    pub delays: Vec<usize>,
}

impl CorrelationSet {
    pub fn users(&self) -> usize {
        self.delays.len()
    }

    /// `R(i)` for `i` in `{-1, 0, 1}`; `None` for larger lags, which are
    /// identically zero.
    pub fn lag(&self, i: i64) -> Option<&DMatrix<f64>> {
        match i {
            -1 => Some(&self.r_minus),
            0 => Some(&self.r_zero),
            1 => Some(&self.r_plus),
            _ => None,
        }
    }
}

/// `sum_n a[n] * b[n - offset]` over the indices where both are defined.
fn overlap_sum(a: &[f64], b: &[f64], offset: i64) -> f64 {
    let n = a.len() as i64;
    let lo = offset.max(0);
    let hi = n.min(n + offset);
    (lo..hi)
        .map(|m| a[m as usize] * b[(m - offset) as usize])
        .sum()
}

/// Checks that `delays` is strictly ascending and every delay is below `nc`.
pub fn validate_delays(delays: &[usize], nc: usize) -> Result<()> {
    if let Some(&bad) = delays.iter().find(|&&d| d >= nc) {
        return Err(Error::DelayOutOfRange {
            delay: bad,
            max: nc - 1,
        });
    }
    if delays.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedDelays(delays.to_vec()));
    }
    Ok(())
}

pub fn cross_correlation_matrices(
    codes: &[SpreadingCode],
    delays: &[usize],
) -> Result<CorrelationSet> {
    if codes.is_empty() {
        return Err(Error::InvalidParameter("no spreading codes".into()));
    }
    if codes.len() != delays.len() {
        return Err(Error::LengthMismatch {
            expected: codes.len(),
            actual: delays.len(),
        });
    }
    let nc = codes[0].nc();
    if let Some(odd) = codes.iter().find(|c| c.nc() != nc) {
        return Err(Error::LengthMismatch {
            expected: nc,
            actual: odd.nc(),
        });
    }
    validate_delays(delays, nc)?;

    let k = codes.len();
    let entry = |lag: i64, row: usize, col: usize| {
        // s_l(t - tau_l) * s_k(t - lag*Tb - tau_k): chip n of user l meets
        // chip n - offset of user k
        let offset = lag * nc as i64 + delays[row] as i64 - delays[col] as i64;
        overlap_sum(codes[col].chips(), codes[row].chips(), offset)
    };
    Ok(CorrelationSet {
        r_minus: DMatrix::from_fn(k, k, |r, c| entry(-1, r, c)),
        r_zero: DMatrix::from_fn(k, k, |r, c| entry(0, r, c)),
        r_plus: DMatrix::from_fn(k, k, |r, c| entry(1, r, c)),
        delays: delays.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_sequence_has_full_period() {
        let seq = generate_m_sequence(0o45, 1).unwrap();
        assert_eq!(seq.len(), 31);
    }

    #[test]
    fn m_sequence_balanced_for_every_seed() {
        for taps in [0o45, 0o75] {
            for seed in 1..32 {
                let seq = generate_m_sequence(taps, seed).unwrap();
                let ones = seq.iter().filter(|&&b| b == 1).count();
                assert_eq!(
                    (ones, seq.len() - ones),
                    (16, 15),
                    "taps {taps:o} seed {seed}"
                );
            }
        }
    }

    #[test]
    fn m_sequence_two_valued_autocorrelation() {
        let seq = generate_m_sequence(0o45, 0b10110).unwrap();
        assert_eq!(periodic_correlation(&seq, &seq, 0), 31);
        for shift in 1..31 {
            assert_eq!(periodic_correlation(&seq, &seq, shift), -1, "shift {shift}");
        }
    }

    #[test]
    fn m_sequence_rejects_zero_seed() {
        assert!(matches!(
            generate_m_sequence(0o45, 0),
            Err(Error::ZeroSeed { .. })
        ));
        // only the low five bits matter
        assert!(generate_m_sequence(0o45, 32).is_err());
    }

    #[test]
    fn m_sequence_rejects_non_primitive() {
        // x^5 + 1 and x^5 + x^4 + x + 1 are reducible
        assert!(generate_m_sequence(0o41, 1).is_err());
        assert!(generate_m_sequence(0o63, 1).is_err());
        // wrong degree
        assert!(generate_m_sequence(0o13, 1).is_err());
    }

    #[test]
    fn gold_family_size() {
        let family = generate_gold_family(DEFAULT_PREFERRED_PAIR).unwrap();
        assert_eq!(family.len(), 33);
        assert!(family.iter().all(|s| s.len() == 31));
    }

    #[test]
    fn gold_family_self_correlation_peak() {
        let family = generate_gold_family(DEFAULT_PREFERRED_PAIR).unwrap();
        for member in &family {
            assert_eq!(periodic_correlation(member, member, 0), 31);
        }
    }

    #[test]
    fn gold_rejects_non_preferred_pair() {
        // a polynomial paired with itself correlates to 31 at some shift
        let err = generate_gold_family((0o45, 0o45)).unwrap_err();
        assert!(
            matches!(err, Error::NotPreferredPair { value: 31, .. }),
            "{err}"
        );
        // reciprocal pair x^5+x^2+1 / x^5+x^3+1 is not preferred
        assert!(generate_gold_family((0o45, 0o51)).is_err());
    }

    #[test]
    fn octal_taps_parse() {
        assert_eq!(parse_octal_taps("45").unwrap(), 37);
        assert_eq!(parse_octal_taps("0o75").unwrap(), 61);
        assert!(parse_octal_taps("98").is_err());
    }

    #[test]
    fn signature_extension() {
        let code = build_signature(&[1; 31]).unwrap();
        let c = 1.0 / 32f64.sqrt();
        assert_eq!(code.nc(), 32);
        assert!(code.chips()[..31].iter().all(|&x| x == c));
        assert_eq!(code.chips()[31], -c);
        assert!((code.energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn signature_rejects_wrong_length() {
        assert!(matches!(
            build_signature(&[1; 32]),
            Err(Error::LengthMismatch {
                expected: 31,
                actual: 32
            })
        ));
    }

    #[test]
    fn single_user_correlations() {
        let codes = assign_codes(DEFAULT_PREFERRED_PAIR, 1).unwrap();
        let set = cross_correlation_matrices(&codes, &[0]).unwrap();
        assert!((set.r_zero[(0, 0)] - 1.0).abs() < 1e-12);
        assert_eq!(set.r_plus[(0, 0)], 0.0);
        assert_eq!(set.r_minus[(0, 0)], 0.0);
        assert!(set.lag(2).is_none());
    }

    #[test]
    fn correlation_rejects_bad_delays() {
        let codes = assign_codes(DEFAULT_PREFERRED_PAIR, 3).unwrap();
        assert!(matches!(
            cross_correlation_matrices(&codes, &[0, 5, 5]),
            Err(Error::UnsortedDelays(_))
        ));
        assert!(matches!(
            cross_correlation_matrices(&codes, &[0, 9, 5]),
            Err(Error::UnsortedDelays(_))
        ));
        assert!(matches!(
            cross_correlation_matrices(&codes, &[0, 5, 32]),
            Err(Error::DelayOutOfRange { .. })
        ));
    }

    /// Brute-force sliding sum over an explicit chip grid at one sample per chip.
    fn grid_correlation(a: &SpreadingCode, b: &SpreadingCode, da: i64, db: i64) -> f64 {
        let nc = a.nc() as i64;
        let at = |code: &SpreadingCode, start: i64, m: i64| {
            let idx = m - start;
            if (0..nc).contains(&idx) {
                code.chips()[idx as usize]
            } else {
                0.0
            }
        };
        (-3 * nc..4 * nc).map(|m| at(a, da, m) * at(b, db, m)).sum()
    }

    #[test]
    fn two_user_matrices_match_grid_sum() {
        let codes = assign_codes(DEFAULT_PREFERRED_PAIR, 4).unwrap();
        let pair = [codes[2].clone(), codes[3].clone()];
        let delays = [0usize, 5];
        let set = cross_correlation_matrices(&pair, &delays).unwrap();
        for lag in -1i64..=1 {
            let m = set.lag(lag).unwrap();
            for k in 0..2 {
                for l in 0..2 {
                    let expected = grid_correlation(
                        &pair[l],
                        &pair[k],
                        delays[l] as i64,
                        lag * 32 + delays[k] as i64,
                    );
                    assert!(
                        (m[(k, l)] - expected).abs() < 1e-12,
                        "lag {lag} [{k}][{l}]: {} vs {expected}",
                        m[(k, l)]
                    );
                }
            }
        }
    }
}
