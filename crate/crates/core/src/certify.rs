//! Covering certificates: independently re-checkable evidence that every
//! value m^k + u over |u| <= y is composite.
//!
//! Each u gets one witness. Almost all are a small prime divisor (checked by
//! one modular exponentiation); the leftovers from the matching carry strong
//! compositeness witnesses instead — bases whose strong test proves the value
//! composite, recorded so verification replays bit for bit. Verification uses
//! only the certificate header (m, k, y, x) and the witness list, never the
//! construction internals, and its primality code is written separately from
//! the search battery.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::construction::ConstructionResult;
use crate::modular::pow_mod;
use crate::primality;
use crate::sieve::{is_prime_u64, primes_up_to};

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("construction unsound: m^k + ({0}) has no divisor witness and passes the primality battery")]
    Unsound(i64),
    #[error("malformed certificate: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    PrimeDivisor,
    CompositePrp,
}

/// Compositeness evidence for one u: either a prime p <= x dividing m^k + u,
/// or the bases of failed strong probable-prime tests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub u: i64,
    pub kind: WitnessKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bases: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    m: String,
    k: u64,
    y: u64,
    x: u64,
}

/// A full covering certificate: header plus one witness per u in [-y, y].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub m: BigUint,
    pub k: u64,
    pub y: u64,
    pub x: u64,
    pub witnesses: Vec<Witness>,
}

/// Build the witness for a single u, preferring cheap prime divisors:
/// P1 divisors of u, then P2 primes dividing u + 1, then the matched p_u,
/// then trial division by every prime <= x, and strong bases as last resort.
fn witness_for(
    u: i64,
    result: &ConstructionResult,
    all_primes: &[u64],
) -> Result<Witness, CertifyError> {
    let params = &result.params;
    let k = params.k;
    let m = &result.m;
    let divisor_witness = |p: u64| -> Option<Witness> {
        let m_mod = (m % p).to_u64_digits().first().copied().unwrap_or(0);
        let residue = (pow_mod(m_mod, k, p) as i64 + u.rem_euclid(p as i64)) % p as i64;
        (residue == 0).then_some(Witness {
            u,
            kind: WitnessKind::PrimeDivisor,
            p: Some(p),
            bases: None,
        })
    };
    for &p in &params.p1 {
        if u % p as i64 == 0 {
            if let Some(w) = divisor_witness(p) {
                return Ok(w);
            }
        }
    }
    for &p in &params.p2 {
        if (u + 1).rem_euclid(p as i64) == 0 {
            if let Some(w) = divisor_witness(p) {
                return Ok(w);
            }
        }
    }
    if let Some(p) = result.assignment.prime_for(u) {
        if let Some(w) = divisor_witness(p) {
            return Ok(w);
        }
    }
    for &p in all_primes {
        if let Some(w) = divisor_witness(p) {
            return Ok(w);
        }
    }
    let value = result.window_value(u);
    if primality::is_probable_prime(&value) {
        return Err(CertifyError::Unsound(u));
    }
    let base = primality::find_strong_witness(&value).ok_or(CertifyError::Unsound(u))?;
    Ok(Witness {
        u,
        kind: WitnessKind::CompositePrp,
        p: None,
        bases: Some(vec![base]),
    })
}

/// Materialize the construction's conclusion as one witness per u.
pub fn build_certificate(result: &ConstructionResult) -> Result<Certificate, CertifyError> {
    let params = &result.params;
    let y = params.y;
    let all_primes = primes_up_to(params.x);
    let us: Vec<i64> = (-(y as i64)..=y as i64).collect();

    #[cfg(feature = "parallel")]
    let collected: Result<Vec<Witness>, CertifyError> = us
        .par_iter()
        .map(|&u| witness_for(u, result, all_primes.primes()))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let collected: Result<Vec<Witness>, CertifyError> = us
        .iter()
        .map(|&u| witness_for(u, result, all_primes.primes()))
        .collect();

    Ok(Certificate {
        m: result.m.clone(),
        k: params.k,
        y,
        x: params.x,
        witnesses: collected?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyFailure {
    /// The offending u, when the failure is tied to one witness.
    pub u: Option<i64>,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub checked: u64,
    pub failures: Vec<VerifyFailure>,
}

/// Re-check every witness from scratch.
///
/// Prime-divisor witnesses are validated by modular evaluation; the divisor
/// is proper because m > x + y forces m^k + u >= m - y > x >= p. Strong
/// witnesses are replayed through [`independent_is_composite_base`], a code
/// path separate from the search battery.
pub fn verify_certificate(cert: &Certificate) -> VerifyReport {
    let mut failures = Vec::new();
    let y = cert.y as i64;
    if cert.y < 1 {
        failures.push(VerifyFailure {
            u: None,
            reason: "empty interval: y < 1".into(),
        });
    }
    if cert.m <= BigUint::from(cert.x + cert.y) {
        failures.push(VerifyFailure {
            u: None,
            reason: "m <= x + y: divisors need not be proper".into(),
        });
    }
    let expected: Vec<i64> = (-y..=y).collect();
    let actual: Vec<i64> = cert.witnesses.iter().map(|w| w.u).collect();
    if actual != expected {
        let offender = expected
            .iter()
            .copied()
            .zip(actual.iter().copied().map(Some).chain(std::iter::repeat(None)))
            .find(|&(e, a)| Some(e) != a)
            .map(|(e, _)| e)
            .or(Some(y));
        failures.push(VerifyFailure {
            u: offender,
            reason: format!(
                "witness list must cover -{y}..={y} in order: {} entries, first defect at u = {}",
                actual.len(),
                offender.unwrap()
            ),
        });
        return VerifyReport {
            ok: false,
            checked: cert.witnesses.len() as u64,
            failures,
        };
    }

    let check_one = |w: &Witness| -> Option<VerifyFailure> {
        let fail = |reason: String| Some(VerifyFailure { u: Some(w.u), reason });
        match w.kind {
            WitnessKind::PrimeDivisor => {
                let p = match w.p {
                    Some(p) => p,
                    None => return fail("prime_divisor witness without p".into()),
                };
                if p > cert.x {
                    return fail(format!("witness prime {p} exceeds x = {}", cert.x));
                }
                if !is_prime_u64(p) {
                    return fail(format!("witness {p} is not prime"));
                }
                let m_mod = (&cert.m % p).to_u64_digits().first().copied().unwrap_or(0);
                let residue = (pow_mod(m_mod, cert.k, p) as i64 + w.u.rem_euclid(p as i64)) % p as i64;
                if residue != 0 {
                    return fail(format!("{p} does not divide m^k + ({})", w.u));
                }
                None
            }
            WitnessKind::CompositePrp => {
                let bases = match &w.bases {
                    Some(b) if !b.is_empty() => b,
                    _ => return fail("composite_prp witness without bases".into()),
                };
                let mk = cert.m.pow(cert.k as u32);
                let value = if w.u >= 0 {
                    &mk + BigUint::from(w.u as u64)
                } else {
                    &mk - BigUint::from(w.u.unsigned_abs())
                };
                for &b in bases {
                    if !independent_is_composite_base(&value, b) {
                        return fail(format!("base {b} does not witness compositeness"));
                    }
                }
                None
            }
        }
    };

    #[cfg(feature = "parallel")]
    let per_witness: Vec<Option<VerifyFailure>> = cert.witnesses.par_iter().map(check_one).collect();
    #[cfg(not(feature = "parallel"))]
    let per_witness: Vec<Option<VerifyFailure>> = cert.witnesses.iter().map(check_one).collect();

    failures.extend(per_witness.into_iter().flatten());
    VerifyReport {
        ok: failures.is_empty(),
        checked: cert.witnesses.len() as u64,
        failures,
    }
}

/// Serialize as JSON lines: header first, then one record per u ascending.
pub fn to_jsonl(cert: &Certificate) -> String {
    let mut out = String::new();
    let header = Header {
        m: cert.m.to_string(),
        k: cert.k,
        y: cert.y,
        x: cert.x,
    };
    out.push_str(&serde_json::to_string(&header).expect("header serializes"));
    out.push('\n');
    for w in &cert.witnesses {
        out.push_str(&serde_json::to_string(w).expect("witness serializes"));
        out.push('\n');
    }
    out
}

pub fn from_jsonl(text: &str) -> Result<Certificate, CertifyError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header_line) = lines
        .next()
        .ok_or_else(|| CertifyError::Parse("empty certificate".into()))?;
    let header: Header = serde_json::from_str(header_line)
        .map_err(|e| CertifyError::Parse(format!("header: {e}")))?;
    let m: BigUint = header
        .m
        .parse()
        .map_err(|e| CertifyError::Parse(format!("header m: {e}")))?;
    let mut witnesses = Vec::new();
    for (idx, line) in lines {
        let w: Witness = serde_json::from_str(line)
            .map_err(|e| CertifyError::Parse(format!("line {}: {e}", idx + 1)))?;
        witnesses.push(w);
    }
    Ok(Certificate {
        m,
        k: header.k,
        y: header.y,
        x: header.x,
        witnesses,
    })
}

/// True when `base` proves n composite under a strong test.
///
/// Written independently of the search battery: its own decomposition of
/// n - 1 and its own squaring loop.
pub fn independent_is_composite_base(n: &BigUint, base: u64) -> bool {
    if n.is_even() {
        return *n != BigUint::from(2u32);
    }
    if *n <= BigUint::from(3u32) {
        return n.is_one() || n.is_zero();
    }
    let minus_one = n - 1u32;
    let mut d = minus_one.clone();
    let mut rounds = 0u64;
    while d.is_even() {
        d >>= 1;
        rounds += 1;
    }
    let b = BigUint::from(base) % n;
    if b.is_zero() {
        return false; // no information from a base divisible by n
    }
    let mut acc = b.modpow(&d, n);
    if acc.is_one() || acc == minus_one {
        return false;
    }
    for _ in 1..rounds {
        acc = (&acc * &acc) % n;
        if acc == minus_one {
            return false;
        }
        if acc.is_one() {
            return true; // nontrivial square root of 1
        }
    }
    true
}

const INDEPENDENT_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Primality test on its own code path, used for the exhaustive acceptance
/// checks and as the oracle opposite the search battery. Deterministic for
/// any input below 3.3e24; thirteen strong bases beyond that.
pub fn independent_is_prime(n: &BigUint) -> bool {
    static TRIAL_PRIMES: std::sync::OnceLock<Vec<u64>> = std::sync::OnceLock::new();
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    let small = TRIAL_PRIMES.get_or_init(|| primes_up_to(2_000).primes().to_vec());
    for &p in small {
        let pb = BigUint::from(p);
        if (n % &pb).is_zero() {
            return *n == pb;
        }
    }
    INDEPENDENT_BASES
        .iter()
        .all(|&b| !independent_is_composite_base(n, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{construct, ConstructOptions};

    #[test]
    fn independent_prime_agrees_with_u64_oracle() {
        for n in 0u64..5_000 {
            assert_eq!(
                independent_is_prime(&BigUint::from(n)),
                is_prime_u64(n),
                "n = {n}"
            );
        }
        let m127 = (BigUint::one() << 127) - 1u32;
        assert!(independent_is_prime(&m127));
        assert!(!independent_is_prime(&(&m127 * &m127)));
    }

    #[test]
    fn round_trip_even_k() {
        let result = construct(2, 50, &ConstructOptions::default()).unwrap();
        let cert = build_certificate(&result).unwrap();
        assert_eq!(cert.witnesses.len() as u64, 2 * cert.y + 1);
        let report = verify_certificate(&cert);
        assert!(report.ok, "failures: {:?}", report.failures);

        // even u gets the P1 witness 2
        let w = cert.witnesses.iter().find(|w| w.u == 4).unwrap();
        assert_eq!((w.kind, w.p), (WitnessKind::PrimeDivisor, Some(2)));
        // matched u carries its matched prime
        for &(u, p) in &result.assignment.pairs {
            let w = cert.witnesses.iter().find(|w| w.u == u).unwrap();
            assert_eq!(w.p, Some(p), "matched witness for u = {u}");
            let m_mod = (&result.m % p).to_u64_digits()[0];
            assert_eq!((pow_mod(m_mod, 2, p) as i64 + u).rem_euclid(p as i64), 0);
        }
        // leftovers either found a trial divisor or carry strong bases
        for &u in &result.assignment.leftovers {
            let w = cert.witnesses.iter().find(|w| w.u == u).unwrap();
            if w.kind == WitnessKind::CompositePrp {
                assert!(w.bases.as_ref().is_some_and(|b| !b.is_empty()));
            }
        }
        // composite_prp appears only on leftovers
        for w in &cert.witnesses {
            if w.kind == WitnessKind::CompositePrp {
                assert!(result.assignment.leftovers.contains(&w.u));
            }
        }
    }

    #[test]
    fn round_trip_odd_k() {
        let result = construct(1, 30, &ConstructOptions::default()).unwrap();
        let cert = build_certificate(&result).unwrap();
        let report = verify_certificate(&cert);
        assert!(report.ok, "failures: {:?}", report.failures);
        // all witnesses are prime divisors for odd k (no leftovers)
        assert!(cert
            .witnesses
            .iter()
            .all(|w| w.kind == WitnessKind::PrimeDivisor));
    }

    #[test]
    fn tampered_witness_is_rejected_and_named() {
        let result = construct(2, 50, &ConstructOptions::default()).unwrap();
        let mut cert = build_certificate(&result).unwrap();
        // find a witness whose prime we can break
        let idx = cert
            .witnesses
            .iter()
            .position(|w| w.kind == WitnessKind::PrimeDivisor && w.p != Some(47))
            .unwrap();
        let u = cert.witnesses[idx].u;
        cert.witnesses[idx].p = Some(47);
        let report = verify_certificate(&cert);
        assert!(!report.ok);
        assert!(report.failures.iter().any(|f| f.u == Some(u)));
    }

    #[test]
    fn structural_defects_are_reported() {
        let result = construct(2, 50, &ConstructOptions::default()).unwrap();
        let mut cert = build_certificate(&result).unwrap();
        let dropped = cert.witnesses.remove(3).u;
        let report = verify_certificate(&cert);
        assert!(!report.ok);
        assert_eq!(report.failures[0].u, Some(dropped), "gap names the missing u");

        let mut cert2 = build_certificate(&result).unwrap();
        cert2.witnesses[0].p = Some(10_007); // prime, but beyond x
        let report = verify_certificate(&cert2);
        assert!(!report.ok);
        assert!(report
            .failures
            .iter()
            .any(|f| f.reason.contains("exceeds x")));
    }

    #[test]
    fn jsonl_round_trip() {
        let result = construct(2, 30, &ConstructOptions::default()).unwrap();
        let cert = build_certificate(&result).unwrap();
        let text = to_jsonl(&cert);
        let first_line = text.lines().next().unwrap();
        let header: serde_json::Value = serde_json::from_str(first_line).unwrap();
        assert!(header["m"].is_string());
        assert_eq!(header["k"], 2);
        let parsed = from_jsonl(&text).unwrap();
        assert_eq!(parsed, cert);
        assert!(verify_certificate(&parsed).ok);
    }

    #[test]
    fn malformed_jsonl_is_a_parse_error() {
        assert!(matches!(from_jsonl(""), Err(CertifyError::Parse(_))));
        assert!(matches!(
            from_jsonl("{\"m\": \"12\", \"k\": 1, \"y\": 1, \"x\": 30}\nnot json\n"),
            Err(CertifyError::Parse(_))
        ));
    }

    #[test]
    fn strong_base_check_spot_values() {
        // 2047 = 23 * 89: base 2 lies, base 3 witnesses
        let n = BigUint::from(2047u32);
        assert!(!independent_is_composite_base(&n, 2));
        assert!(independent_is_composite_base(&n, 3));
        // primes are never witnessed against
        let p = BigUint::from(1_000_003u64);
        for b in [2u64, 3, 5, 7, 11] {
            assert!(!independent_is_composite_base(&p, b));
        }
    }
}
