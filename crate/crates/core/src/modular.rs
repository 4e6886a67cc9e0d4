//! Modular arithmetic over prime moduli: powering, Jacobi symbols, root
//! counting and root extraction for the congruence n^k + u ≡ 0 (mod p), and
//! CRT combination of a covering residue system into a single class A mod M.
//!
//! Root extraction deliberately avoids general discrete logarithms. The two
//! cases the construction produces — gcd(k, p-1) = 1, and gcd(k, p-1) = 2
//! with p ≡ 3 (mod 4) — both reduce to one modular exponentiation by an
//! inverted exponent, because choosing p ≡ 3 (mod 2k) makes (p-1)/2 odd and
//! coprime to k.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sieve::is_prime_u64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModularError {
    #[error("conflicting or redundant constraint: modulus {0} appears twice")]
    DuplicateModulus(u64),
    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),
    #[error("unsupported structure: gcd(k, p-1) = {gcd} for p = {p}")]
    UnsupportedStructure { p: u64, gcd: u64 },
}

/// One covering constraint: `m ≡ residue (mod modulus)` with a prime modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Congruence {
    pub residue: u64,
    pub modulus: u64,
}

impl Congruence {
    pub fn new(residue: u64, modulus: u64) -> Self {
        debug_assert!(residue < modulus);
        Congruence { residue, modulus }
    }
}

/// The CRT-combined form of a residue system: all m with m ≡ A (mod M),
/// 0 <= A < M, M the product of the (pairwise distinct prime) moduli.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombinedClass {
    pub a: BigUint,
    pub m: BigUint,
}

/// b^e mod m in [0, m), via binary exponentiation with u128 intermediates.
pub fn pow_mod(b: u64, e: u64, m: u64) -> u64 {
    assert!(m >= 1);
    if m == 1 {
        return 0;
    }
    let mut base = b % m;
    let mut exp = e;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % m as u128) as u64;
        }
        base = ((base as u128 * base as u128) % m as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Jacobi symbol (a/m) for odd positive m; the Legendre symbol when m is prime.
pub fn jacobi(a: i64, m: u64) -> i8 {
    assert!(m % 2 == 1 && m >= 1, "Jacobi symbol needs odd positive m");
    if m == 1 {
        return 1;
    }
    let mut num = (a as i128).rem_euclid(m as i128) as u64;
    let mut den = m;
    let mut sign = 1i8;
    while num != 0 {
        while num % 2 == 0 {
            num /= 2;
            // (2/den) = -1 iff den ≡ ±3 (mod 8)
            if den % 8 == 3 || den % 8 == 5 {
                sign = -sign;
            }
        }
        std::mem::swap(&mut num, &mut den);
        // reciprocity: both odd now
        if num % 4 == 3 && den % 4 == 3 {
            sign = -sign;
        }
        num %= den;
    }
    if den == 1 {
        sign
    } else {
        0
    }
}

/// rho_{u,k}(p): the number of n mod p with n^k + u ≡ 0 (mod p).
///
/// Subgroup method: the k-th power map on the units of F_p is g-to-1 onto the
/// index-g subgroup, g = gcd(k, p-1), so the count is g when (-u) raised to
/// (p-1)/g is 1 and 0 otherwise. When p | u the only root is n = 0.
pub fn rho(u: i64, k: u64, p: u64) -> u64 {
    assert!(u != 0 && k >= 1);
    debug_assert!(is_prime_u64(p));
    let w = (-(u as i128)).rem_euclid(p as i128) as u64;
    if w == 0 {
        return 1;
    }
    let g = k.gcd(&(p - 1));
    if pow_mod(w, (p - 1) / g, p) == 1 {
        g
    } else {
        0
    }
}

/// Exhaustive-scan rho, cross-checked against the subgroup method in tests;
/// the fast path is authoritative above the scan range.
pub fn rho_scan(u: i64, k: u64, p: u64) -> u64 {
    assert!(u != 0 && k >= 1);
    let w = (-(u as i128)).rem_euclid(p as i128) as u64;
    (0..p).filter(|&n| pow_mod(n, k, p) == w).count() as u64
}

fn mod_inverse_u64(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(m as i128) as u64)
}

/// Some n with n^k ≡ -u (mod p), or `None` when no solution exists.
///
/// Supported cases: gcd(k, p-1) = 1 (always solvable, n = (-u)^{k^{-1} mod p-1})
/// and gcd(k, p-1) = 2 with p ≡ 3 (mod 4) (solvable iff (-u/p) = +1, via the
/// exponent inverse of k mod (p-1)/2, which is odd there). Requires p prime
/// and p not dividing u.
pub fn kth_root_mod(u: i64, k: u64, p: u64) -> Result<Option<u64>, ModularError> {
    assert!(u != 0 && k >= 1);
    debug_assert!(is_prime_u64(p));
    let w = (-(u as i128)).rem_euclid(p as i128) as u64;
    assert!(w != 0, "p must not divide u");
    if p == 2 {
        return Ok(Some(1)); // 1^k = 1 = w
    }
    let g = k.gcd(&(p - 1));
    match g {
        1 => {
            let e = mod_inverse_u64(k % (p - 1), p - 1).expect("k invertible when gcd is 1");
            Ok(Some(pow_mod(w, e, p)))
        }
        2 if p % 4 == 3 => {
            if jacobi(-u, p) == -1 {
                return Ok(None);
            }
            let half = (p - 1) / 2; // odd, so k is invertible mod half
            let e = mod_inverse_u64(k % half, half)
                .ok_or(ModularError::UnsupportedStructure { p, gcd: g })?;
            Ok(Some(pow_mod(w, e, p)))
        }
        _ => Err(ModularError::UnsupportedStructure { p, gcd: g }),
    }
}

/// Combine pairwise-distinct prime-modulus congruences into A mod M.
pub fn crt_combine(constraints: &[Congruence]) -> Result<CombinedClass, ModularError> {
    let mut seen = std::collections::BTreeSet::new();
    for c in constraints {
        if !is_prime_u64(c.modulus) {
            return Err(ModularError::CompositeModulus(c.modulus));
        }
        if !seen.insert(c.modulus) {
            return Err(ModularError::DuplicateModulus(c.modulus));
        }
    }
    let mut a = BigUint::zero();
    let mut m = BigUint::one();
    for c in constraints {
        let p = c.modulus;
        // lift: new A = A + M * t with t ≡ (r - A) * M^{-1} (mod p)
        let a_mod_p = (&a % p).to_u64_digits().first().copied().unwrap_or(0);
        let m_mod_p = (&m % p).to_u64_digits().first().copied().unwrap_or(0);
        let inv = mod_inverse_u64(m_mod_p, p).expect("moduli pairwise coprime");
        let diff = (c.residue + p - a_mod_p) % p;
        let t = ((diff as u128 * inv as u128) % p as u128) as u64;
        a += &m * t;
        m *= p;
    }
    debug_assert!(a < m || constraints.is_empty());
    Ok(CombinedClass { a, m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pow_mod_examples() {
        assert_eq!(pow_mod(3, 2, 7), 2);
        assert_eq!(pow_mod(10, 0, 7), 1);
        assert_eq!(pow_mod(10, 0, 1), 0); // 1 mod 1
        // Repeated-multiplication oracle for (5, 117, 101).
        let mut acc = 1u64;
        for _ in 0..117 {
            acc = acc * 5 % 101;
        }
        assert_eq!(acc, 54);
        assert_eq!(pow_mod(5, 117, 101), 54);
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi(2, 7), 1); // 3^2 ≡ 2 (mod 7)
        for a in -20..20 {
            assert_eq!(jacobi(a, 1), 1);
        }
        // (-1/p) = -1 for p ≡ 3 (mod 4): the sign that forces u = 1 to stay
        // unmatched in the even-k construction.
        for p in [3u64, 7, 11, 19, 23, 31, 43] {
            assert_eq!(jacobi(-1, p), -1);
            assert_eq!(
                pow_mod((p - 1) % p, (p - 1) / 2, p),
                p - 1,
                "Euler criterion agrees"
            );
        }
        assert_eq!(jacobi(1001, 9907), -1);
        assert_eq!(jacobi(21, 45), 0); // shared factor 3
    }

    #[test]
    fn jacobi_equals_euler_criterion() {
        let table = crate::sieve::primes_up_to(1000);
        for p in table.iter().filter(|&p| p > 2) {
            for a in 0..p {
                let symbol = jacobi(a as i64, p);
                let euler = pow_mod(a, (p - 1) / 2, p);
                let expected: i8 = if euler == 0 {
                    0
                } else if euler == 1 {
                    1
                } else {
                    assert_eq!(euler, p - 1);
                    -1
                };
                assert_eq!(symbol, expected, "a = {a}, p = {p}");
            }
        }
    }

    #[test]
    fn rho_examples() {
        for (u, p) in [(1i64, 5u64), (-4, 7), (9, 13)] {
            assert_eq!(rho(u, 1, p), 1);
        }
        assert_eq!(rho(-2, 2, 7), 2); // n = 3, 4
        assert_eq!(rho(2, 2, 7), 0); // -2 ≡ 5 is a non-residue mod 7
        assert_eq!(rho_scan(-2, 2, 7), 2);
        assert_eq!(rho_scan(2, 2, 7), 0);
    }

    #[test]
    fn rho_fast_equals_scan() {
        let primes = crate::sieve::primes_up_to(200);
        for p in primes.iter() {
            for u in (-20i64..=20).filter(|&u| u != 0) {
                for k in 1..=6 {
                    assert_eq!(rho(u, k, p), rho_scan(u, k, p), "u={u} k={k} p={p}");
                }
            }
        }
    }

    #[test]
    fn rho_mass_and_structure() {
        let primes = crate::sieve::primes_up_to(200);
        for p in primes.iter() {
            for k in 1..=6u64 {
                // every n mod p lands on exactly one value of n^k
                let total: u64 = (1..=p).map(|u| rho(-(u as i64), k, p)).sum();
                assert_eq!(total, p, "mass at k={k} p={p}");
            }
            for u in (-20i64..=20).filter(|&u| u != 0 && u.unsigned_abs() % p != 0) {
                for k in 1..=6u64 {
                    let r = rho(u, k, p);
                    let g = num_integer::gcd(k, p - 1);
                    assert!(r == 0 || r == g, "structure at u={u} k={k} p={p}");
                }
            }
        }
    }

    #[test]
    fn kth_root_examples() {
        // k = 1: the root is just (-u) mod p.
        assert_eq!(kth_root_mod(3, 1, 11), Ok(Some(8)));
        // gcd(2, 6) = 2, p = 7 ≡ 3 (mod 4): root of n^2 ≡ 2 (mod 7).
        let r = kth_root_mod(-2, 2, 7).unwrap().unwrap();
        assert!(r == 3 || r == 4);
        assert_eq!(pow_mod(r, 2, 7), 2);
        // no solution: 2 is residue, -2 is not
        assert_eq!(kth_root_mod(2, 2, 7), Ok(None));
        assert_eq!(rho(2, 2, 7), 0);
        // unsupported: gcd(4, 12) = 4 for p = 13
        assert!(matches!(
            kth_root_mod(2, 4, 13),
            Err(ModularError::UnsupportedStructure { p: 13, gcd: 4 })
        ));
    }

    #[test]
    fn kth_roots_verify_by_powering() {
        let primes = crate::sieve::primes_up_to(500);
        for p in primes.iter() {
            for k in 1..=7u64 {
                let g = num_integer::gcd(k, p.saturating_sub(1).max(1));
                let supported = g == 1 || (g == 2 && p % 4 == 3);
                if !supported {
                    continue;
                }
                for u in (-30i64..=30).filter(|&u| u != 0 && u.unsigned_abs() % p != 0) {
                    match kth_root_mod(u, k, p) {
                        Ok(Some(n)) => {
                            let w = (-u).rem_euclid(p as i64) as u64;
                            assert_eq!(pow_mod(n, k, p), w, "u={u} k={k} p={p}");
                        }
                        Ok(None) => assert_eq!(rho(u, k, p), 0, "u={u} k={k} p={p}"),
                        Err(e) => panic!("unexpected error {e} at u={u} k={k} p={p}"),
                    }
                }
            }
        }
    }

    #[test]
    fn crt_examples() {
        // Scan oracle over 0..5: only 4 satisfies (0 mod 2, 1 mod 3).
        let combined = crt_combine(&[Congruence::new(0, 2), Congruence::new(1, 3)]).unwrap();
        assert_eq!(combined.a, BigUint::from(4u32));
        assert_eq!(combined.m, BigUint::from(6u32));
        let empty = crt_combine(&[]).unwrap();
        assert_eq!(empty.a, BigUint::zero());
        assert_eq!(empty.m, BigUint::one());
        assert_eq!(
            crt_combine(&[Congruence::new(1, 5), Congruence::new(1, 5)]),
            Err(ModularError::DuplicateModulus(5))
        );
        assert_eq!(
            crt_combine(&[Congruence::new(1, 6)]),
            Err(ModularError::CompositeModulus(6))
        );
    }

    proptest! {
        #[test]
        fn crt_round_trip(picks in proptest::collection::vec(0usize..8, 1..6)) {
            let pool = [3u64, 5, 7, 11, 13, 17, 19, 23];
            let mut constraints = Vec::new();
            let mut used = std::collections::BTreeSet::new();
            for (i, &pick) in picks.iter().enumerate() {
                let p = pool[pick];
                if used.insert(p) {
                    constraints.push(Congruence::new((i as u64 * 7 + 2) % p, p));
                }
            }
            let combined = crt_combine(&constraints).unwrap();
            for c in &constraints {
                let r = (&combined.a % c.modulus).to_u64_digits().first().copied().unwrap_or(0);
                prop_assert_eq!(r, c.residue);
            }
            let product = constraints.iter().fold(BigUint::one(), |acc, c| acc * c.modulus);
            prop_assert_eq!(&combined.m, &product);
            prop_assert!(combined.a < combined.m);
        }

        #[test]
        fn pow_mod_matches_naive(b in 0u64..1000, e in 0u64..200, m in 1u64..1000) {
            let mut acc = 1u64 % m;
            for _ in 0..e {
                acc = acc * (b % m) % m;
            }
            prop_assert_eq!(pow_mod(b, e, m), acc);
        }

        #[test]
        fn jacobi_multiplicative(a in -50i64..50, b in -50i64..50, idx in 0usize..6) {
            let m = [3u64, 9, 15, 21, 35, 45][idx];
            prop_assert_eq!(jacobi(a, m) * jacobi(b, m), jacobi(a * b, m));
        }
    }
}
