//! Arithmetic helpers: the smallest non-divisor `d(n)`, the second
//! Chebyshev function and `lcm(1..i)`, with finite-range checks of the
//! classical envelopes for `ψ`.

use std::io::Write;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    #[error("argument must be at least {min}, got {value}")]
    OutOfRange { value: u64, min: u64 },
    #[error("csv: {0}")]
    Csv(String),
}

/// Upper bound used by the Chebyshev envelope check.
pub const PSI_RATIO_BOUND: f64 = 1.03883;

/// Smallest `d >= 2` with `d ∤ n`.
pub fn smallest_nondivisor(n: u64) -> Result<u64, NumError> {
    if n < 1 {
        return Err(NumError::OutOfRange { value: n, min: 1 });
    }
    Ok((2..).find(|d| !n.is_multiple_of(*d)).unwrap())
}

pub fn smallest_nondivisor_big(n: &BigUint) -> Result<u64, NumError> {
    if n.is_zero() {
        return Err(NumError::OutOfRange { value: 0, min: 1 });
    }
    Ok((2u64..).find(|&d| !(n % d).is_zero()).unwrap())
}

/// `lcm(1, …, i)`; `lcm_upto(0) = 1`.
pub fn lcm_upto(i: u64) -> BigUint {
    (2..=i).fold(BigUint::one(), |acc, j| acc.lcm(&BigUint::from(j)))
}

/// Natural logarithm of a big integer from its leading 64 bits.
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap() as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// If `m = p^k` with `p` prime and `k >= 1`, returns `p`.
fn prime_power_base(m: u64, smallest_factor: &[u32]) -> Option<u64> {
    let p = smallest_factor[m as usize] as u64;
    let mut r = m;
    while r.is_multiple_of(p) {
        r /= p;
    }
    (r == 1).then_some(p)
}

fn smallest_factors(limit: u64) -> Vec<u32> {
    let n = limit as usize;
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            for j in (i..=n).step_by(i) {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
            }
        }
    }
    spf
}

/// `ψ(m)` for `0 <= m <= m_max`, summed with Kahan compensation.
#[derive(Clone, Debug)]
pub struct ChebyshevTable {
    psi: Vec<f64>,
    prime_power_base: Vec<Option<u64>>,
}

impl ChebyshevTable {
    pub fn new(m_max: u64) -> ChebyshevTable {
        let spf = smallest_factors(m_max.max(1));
        let mut psi = vec![0.0; m_max as usize + 1];
        let mut bases = vec![None; m_max as usize + 1];
        let (mut sum, mut carry) = (0.0f64, 0.0f64);
        for m in 2..=m_max {
            if let Some(p) = prime_power_base(m, &spf) {
                bases[m as usize] = Some(p);
                let y = (p as f64).ln() - carry;
                let t = sum + y;
                carry = (t - sum) - y;
                sum = t;
            }
            psi[m as usize] = sum;
        }
        ChebyshevTable { psi, prime_power_base: bases }
    }

    pub fn m_max(&self) -> u64 {
        self.psi.len() as u64 - 1
    }

    pub fn psi(&self, m: u64) -> f64 {
        self.psi[m as usize]
    }

    /// `p` when `m` is a power of the prime `p`.
    pub fn prime_power_base(&self, m: u64) -> Option<u64> {
        self.prime_power_base[m as usize]
    }

    /// Largest `|ψ(m) − ln lcm(1..m)|` over `1 <= m <= limit`, with the lcm
    /// kept exactly.
    pub fn lcm_deviation(&self, limit: u64) -> f64 {
        let mut lcm = BigUint::one();
        let mut worst = 0.0f64;
        for m in 1..=limit.min(self.m_max()) {
            if let Some(p) = self.prime_power_base(m) {
                lcm *= p;
            }
            worst = worst.max((self.psi(m) - big_ln(&lcm)).abs());
        }
        worst
    }

    /// Rows `(m, ψ(m), ψ(m)/m)`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), NumError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "psi", "ratio"]).map_err(|e| NumError::Csv(e.to_string()))?;
        for m in 1..=self.m_max() {
            let psi = self.psi(m);
            w.write_record([m.to_string(), format!("{psi:.12}"), format!("{:.12}", psi / m as f64)])
                .map_err(|e| NumError::Csv(e.to_string()))?;
        }
        w.flush().map_err(|e| NumError::Csv(e.to_string()))
    }
}

pub fn chebyshev_psi(m: u64) -> Result<f64, NumError> {
    if m < 1 {
        return Err(NumError::OutOfRange { value: m, min: 1 });
    }
    Ok(ChebyshevTable::new(m).psi(m))
}

pub fn rosser_schoenfeld_r() -> f64 {
    515.0 / (546f64.sqrt() - 322f64.sqrt()).powi(2)
}

pub fn envelope_epsilon(m: u64) -> f64 {
    let l = (m as f64).ln();
    l.sqrt() * (-(l / rosser_schoenfeld_r()).sqrt()).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub m_max: u64,
    pub lower_violations: Vec<u64>,
    pub upper_violations: Vec<u64>,
    pub ratio_bound_violations: Vec<u64>,
    pub argmax: u64,
    pub max_ratio: f64,
    /// Smallest `ψ(m) − (1 − ε(m)) m` over the range.
    pub lower_margin: f64,
    /// Smallest `(1 + ε(m)) m − ψ(m)` over the range.
    pub upper_margin: f64,
    /// Smallest `1.03883 m − ψ(m)` over the range.
    pub ratio_margin: f64,
    pub lcm_deviation: f64,
}

impl EnvelopeReport {
    pub fn holds(&self) -> bool {
        self.lower_violations.is_empty() && self.upper_violations.is_empty() && self.ratio_bound_violations.is_empty()
    }
}

/// Checks `(1 − ε(m)) m < ψ(m) < (1 + ε(m)) m` and `ψ(m) < 1.03883 m`
/// across the range and locates the maximum of `ψ(m)/m`.
pub fn rosser_schoenfeld_check(m_max: u64) -> Result<EnvelopeReport, NumError> {
    if m_max < 2 {
        return Err(NumError::OutOfRange { value: m_max, min: 2 });
    }
    let table = ChebyshevTable::new(m_max);
    let mut report = EnvelopeReport {
        m_max,
        lower_violations: Vec::new(),
        upper_violations: Vec::new(),
        ratio_bound_violations: Vec::new(),
        argmax: 1,
        max_ratio: 0.0,
        lower_margin: f64::INFINITY,
        upper_margin: f64::INFINITY,
        ratio_margin: f64::INFINITY,
        lcm_deviation: table.lcm_deviation(m_max.min(10_000)),
    };
    for m in 1..=m_max {
        let psi = table.psi(m);
        let mf = m as f64;
        let eps = envelope_epsilon(m);
        let upper = (1.0 + eps) * mf - psi;
        report.upper_margin = report.upper_margin.min(upper);
        if upper <= 0.0 {
            report.upper_violations.push(m);
        }
        if m >= 2 {
            let lower = psi - (1.0 - eps) * mf;
            report.lower_margin = report.lower_margin.min(lower);
            if lower <= 0.0 {
                report.lower_violations.push(m);
            }
        }
        let ratio = PSI_RATIO_BOUND * mf - psi;
        report.ratio_margin = report.ratio_margin.min(ratio);
        if ratio <= 0.0 {
            report.ratio_bound_violations.push(m);
        }
        if psi / mf > report.max_ratio {
            report.max_ratio = psi / mf;
            report.argmax = m;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LcmRow {
    pub i: u64,
    /// Decimal digits of `lcm(1..i)`.
    pub n_i: String,
    pub d: u64,
    pub ln_n_i: f64,
}

impl LcmRow {
    pub fn gap(&self) -> f64 {
        self.d as f64 - self.ln_n_i
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NondivisorReport {
    pub n_max: u64,
    /// `max (d(n) − ln n)` over `2 <= n <= n_max`.
    pub c_hat: f64,
    pub c_hat_at: u64,
    /// Largest `n` in range with `d(n) > ln n + ln 2 + 1`, if any.
    pub last_excess: Option<u64>,
    pub rows: Vec<LcmRow>,
    /// `i` with `d(lcm(1..i)) < i + 1`; always empty.
    pub failures: Vec<u64>,
}

/// Scans `d(n)` over `2..=n_max` and tabulates `d(lcm(1..i))` for
/// `2..=i_max`.
pub fn lemma2_bounds_check(n_max: u64, i_max: u64) -> Result<NondivisorReport, NumError> {
    if n_max < 2 {
        return Err(NumError::OutOfRange { value: n_max, min: 2 });
    }
    if i_max < 2 {
        return Err(NumError::OutOfRange { value: i_max, min: 2 });
    }
    let (mut c_hat, mut c_hat_at, mut last_excess) = (f64::NEG_INFINITY, 2, None);
    let slack = std::f64::consts::LN_2 + 1.0;
    for n in 2..=n_max {
        let d = smallest_nondivisor(n)?;
        let gap = d as f64 - (n as f64).ln();
        if gap > c_hat {
            c_hat = gap;
            c_hat_at = n;
        }
        if gap > slack {
            last_excess = Some(n);
        }
    }
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut lcm = BigUint::one();
    for i in 1..=i_max {
        lcm = lcm.lcm(&BigUint::from(i));
        if i < 2 {
            continue;
        }
        let d = smallest_nondivisor_big(&lcm)?;
        if d < i + 1 {
            failures.push(i);
        }
        rows.push(LcmRow { i, n_i: lcm.to_string(), d, ln_n_i: big_ln(&lcm) });
    }
    Ok(NondivisorReport { n_max, c_hat, c_hat_at, last_excess, rows, failures })
}

/// Rows `(i, n_i, d(n_i), ln n_i)`.
pub fn write_lcm_csv<W: Write>(rows: &[LcmRow], out: W) -> Result<(), NumError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| NumError::Csv(e.to_string());
    w.write_record(["i", "n_i", "d", "ln_n_i"]).map_err(err)?;
    for r in rows {
        w.write_record([r.i.to_string(), r.n_i.clone(), r.d.to_string(), format!("{:.12}", r.ln_n_i)]).map_err(err)?;
    }
    w.flush().map_err(|e| NumError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    // trial division, independent of the scan above
    fn is_prime(p: u64) -> bool {
        p >= 2 && (2..).take_while(|q| q * q <= p).all(|q| !p.is_multiple_of(q))
    }

    fn is_prime_power(n: u64) -> bool {
        (2..=n).find(|p| n.is_multiple_of(*p)).is_some_and(|p| {
            let mut r = n;
            while r.is_multiple_of(p) {
                r /= p;
            }
            r == 1 && is_prime(p)
        })
    }

    #[test]
    fn nondivisor_examples() {
        assert_eq!(smallest_nondivisor(6), Ok(4));
        assert_eq!(smallest_nondivisor(12), Ok(5));
        assert_eq!(smallest_nondivisor(2), Ok(3));
        assert_eq!(smallest_nondivisor(1), Ok(2));
        assert!(smallest_nondivisor(0).is_err());
        assert_eq!(smallest_nondivisor_big(&BigUint::from(2520u32)), Ok(11));
    }

    #[test]
    fn nondivisor_structure() {
        for n in 1..=100_000u64 {
            let d = smallest_nondivisor(n).unwrap();
            assert!(is_prime_power(d), "d({n}) = {d}");
            assert!((2..d).all(|j| n % j == 0));
            if n >= 3 {
                assert!(d < n);
            }
        }
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(lcm_upto(1), BigUint::one());
        assert_eq!(lcm_upto(4), BigUint::from(12u32));
        assert_eq!(lcm_upto(10), BigUint::from(2520u32));
        for i in 1..60u64 {
            let (q, r) = lcm_upto(i + 1).div_rem(&lcm_upto(i));
            assert!(r.is_zero());
            let q = q.to_u64().unwrap();
            assert!(q == 1 || (is_prime(q) && is_prime_power(i + 1)));
        }
    }

    #[test]
    fn psi_examples() {
        assert_eq!(chebyshev_psi(1), Ok(0.0));
        assert!((chebyshev_psi(2).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((chebyshev_psi(10).unwrap() - 2520f64.ln()).abs() < 1e-12);
        assert!(chebyshev_psi(0).is_err());
        let t = ChebyshevTable::new(10_000);
        assert!(t.lcm_deviation(10_000) < 1e-9);
        assert!((1..10_000).all(|m| t.psi(m) <= t.psi(m + 1)));
    }

    #[test]
    fn envelope_small_range() {
        assert!((rosser_schoenfeld_r() - 17.51631).abs() < 1e-5);
        let r = rosser_schoenfeld_check(1000).unwrap();
        assert!(r.holds());
        assert_eq!(r.argmax, 113);
        let eps = envelope_epsilon(2);
        let psi = 2f64.ln();
        assert!((1.0 - eps) * 2.0 < psi && psi < (1.0 + eps) * 2.0);
    }

    #[test]
    fn lcm_table_rows() {
        let report = lemma2_bounds_check(1000, 20).unwrap();
        assert!(report.failures.is_empty());
        let row = report.rows.iter().find(|r| r.i == 4).unwrap();
        assert_eq!((row.n_i.as_str(), row.d), ("12", 5));
        let mut out = Vec::new();
        write_lcm_csv(&report.rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("i,n_i,d,ln_n_i\n2,2,3,"));
    }
}
