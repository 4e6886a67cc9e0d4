//! The strong probable-prime battery that drives the j-search: a base-2
//! strong test followed by a strong Lucas test with Selfridge parameters.
//! A composite verdict from either half is a proof of compositeness; the
//! battery is what the construction treats as authoritative, and the certify
//! module re-checks everything through a separately written code path.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::modular::jacobi;

/// Strong probable-prime test to the given base. `true` means "no witness":
/// n is either prime or a strong liar survived. `false` proves n composite.
pub fn sprp(n: &BigUint, base: u64) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    if n.is_even() {
        return *n == two;
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let b = BigUint::from(base) % n;
    if b.is_zero() {
        return true; // base shares the full modulus; no information
    }
    let mut x = b.modpow(&d, n);
    if x.is_one() || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = x.modpow(&two, n);
        if x == n_minus_1 {
            return true;
        }
    }
    false
}

/// Strong Lucas probable-prime test with the Selfridge parameters
/// (P = 1, Q = (1 - D)/4, D the first of 5, -7, 9, ... with (D/n) = -1).
/// `false` proves n composite; primes always return `true`.
pub fn strong_lucas(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    if n.is_even() {
        return *n == two;
    }
    // Select D. For composite n every candidate may share a factor; detect
    // perfect squares (which admit no D at all) after a few attempts.
    let mut d: i64 = 5;
    let mut attempts = 0;
    let jac_of = |d: i64| -> i8 {
        if let Some(small) = n.to_u64() {
            jacobi(d, small)
        } else {
            jacobi_bigint(d, n)
        }
    };
    loop {
        let j = jac_of(d);
        if j == -1 {
            break;
        }
        if j == 0 {
            // gcd(|D|, n) > 1; for n itself equal to |D| that factor is n
            let abs_d = BigUint::from(d.unsigned_abs());
            return *n == abs_d;
        }
        attempts += 1;
        if attempts == 20 {
            let root = n.sqrt();
            if &root * &root == *n {
                return false;
            }
        }
        d = if d > 0 { -(d + 2) } else { -(d - 2) };
    }
    let p: i64 = 1;
    let q: i64 = (1 - d) / 4;

    let to_mod = |v: i64| -> BigUint {
        let m = BigInt::from(v).mod_floor(&BigInt::from_biguint(num_bigint::Sign::Plus, n.clone()));
        m.to_biguint().expect("non-negative after mod_floor")
    };
    let d_mod = to_mod(d);
    let q_mod = to_mod(q);
    let p_mod = to_mod(p);

    // n + 1 = t * 2^s with t odd
    let n_plus_1 = n + 1u32;
    let s = n_plus_1.trailing_zeros().unwrap_or(0);
    let t = &n_plus_1 >> s;

    // Compute U_t, V_t, Q^t by the binary double-and-add chain.
    let mut u = BigUint::one();
    let mut v = p_mod.clone();
    let mut qk = q_mod.clone();
    let half = |x: BigUint| -> BigUint {
        if x.is_odd() {
            (x + n) >> 1
        } else {
            x >> 1
        }
    };
    let bits = t.bits();
    for i in (0..bits.saturating_sub(1)).rev() {
        // double: (U, V, Q^k) -> (U V, V^2 - 2 Q^k, Q^2k)
        let new_u = (&u * &v) % n;
        let v2 = (&v * &v) % n;
        let twice_qk = (&qk << 1) % n;
        let new_v = (v2 + n - twice_qk) % n;
        u = new_u;
        v = new_v;
        qk = (&qk * &qk) % n;
        if t.bit(i) {
            // add one: (U, V) -> ((P U + V)/2, (D U + P V)/2), Q^k -> Q^{k+1}
            let pu_plus_v = (&p_mod * &u + &v) % n;
            let du_plus_pv = (&d_mod * &u + &p_mod * &v) % n;
            u = half(pu_plus_v);
            v = half(du_plus_pv);
            qk = (&qk * &q_mod) % n;
        }
    }

    if u.is_zero() || v.is_zero() {
        return true;
    }
    // V_{t 2^r} ≡ 0 for some 0 <= r < s
    for _ in 1..s {
        let v2 = (&v * &v) % n;
        let twice_qk = (&qk << 1) % n;
        v = (v2 + n - twice_qk) % n;
        qk = (&qk * &qk) % n;
        if v.is_zero() {
            return true;
        }
    }
    false
}

/// Jacobi symbol (a/n) for big odd n, binary algorithm.
fn jacobi_bigint(a: i64, n: &BigUint) -> i8 {
    let n_int = BigInt::from_biguint(num_bigint::Sign::Plus, n.clone());
    let mut num = BigInt::from(a).mod_floor(&n_int);
    let mut den = n_int;
    let mut sign = 1i8;
    while !num.is_zero() {
        while num.is_even() {
            num >>= 1;
            let r = (&den % 8u32).to_u8().unwrap();
            if r == 3 || r == 5 {
                sign = -sign;
            }
        }
        std::mem::swap(&mut num, &mut den);
        if (&num % 4u32).to_u8().unwrap() == 3 && (&den % 4u32).to_u8().unwrap() == 3 {
            sign = -sign;
        }
        num = num.mod_floor(&den);
    }
    if den.is_one() {
        sign
    } else {
        0
    }
}

const SMALL_PRIMES: [u64; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// The search battery: trial division by the first primes, then base-2
/// strong test, then strong Lucas. No composite passing both halves is known.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if n < &BigUint::from(2u32) {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let pb = BigUint::from(p);
        if (n % &pb).is_zero() {
            return *n == pb;
        }
    }
    sprp(n, 2) && strong_lucas(n)
}

/// For a composite n, find a base whose strong test proves compositeness.
///
/// At least three quarters of all bases witness a given odd composite, so
/// scanning the small primes terminates immediately in practice. Returns
/// `None` for n that are probably prime (no witness exists among the first
/// candidates).
pub fn find_strong_witness(n: &BigUint) -> Option<u64> {
    static CANDIDATES: std::sync::OnceLock<Vec<u64>> = std::sync::OnceLock::new();
    debug_assert!(n.is_odd() && *n > BigUint::from(3u32));
    let candidates = CANDIDATES.get_or_init(|| crate::sieve::primes_up_to(10_000).primes().to_vec());
    candidates.iter().copied().find(|&b| !sprp(n, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use std::str::FromStr;

    fn big(s: &str) -> BigUint {
        BigUint::from_str(s).unwrap()
    }

    #[test]
    fn battery_agrees_with_u64_oracle() {
        for n in 0u64..3_000 {
            assert_eq!(
                is_probable_prime(&BigUint::from(n)),
                crate::sieve::is_prime_u64(n),
                "n = {n}"
            );
        }
        // straddle some structured composites
        for n in [2047u64, 3277, 4033, 8321, 561, 41041, 825265] {
            assert!(!is_probable_prime(&BigUint::from(n)), "n = {n}");
        }
    }

    #[test]
    fn sprp_liars_are_caught_by_lucas() {
        // 2047 = 23 * 89 passes the base-2 strong test
        let n = BigUint::from(2047u32);
        assert!(sprp(&n, 2));
        assert!(!strong_lucas(&n));
    }

    #[test]
    fn primes_beyond_i64_range_pass() {
        // regression: n > i64::MAX must not wrap during Lucas D selection
        let n = BigUint::from(13011917811852960001u64); // prime, = 60060^4 + 1
        assert!(sprp(&n, 2));
        assert!(strong_lucas(&n));
        assert!(is_probable_prime(&n));
        assert!(!is_probable_prime(&BigUint::from(13011917811852960003u64)));
    }

    #[test]
    fn known_large_primes_pass() {
        let m127 = (BigUint::one() << 127) - 1u32; // Mersenne prime
        assert!(is_probable_prime(&m127));
        let m521 = (BigUint::one() << 521) - 1u32;
        assert!(is_probable_prime(&m521));
        assert!(!is_probable_prime(&((BigUint::one() << 129) - 1u32)));
    }

    #[test]
    fn known_large_composites_fail() {
        // 10^30 + 1 = 61 * 101 * ... composite
        let n = BigUint::from(10u32).pow(30) + 1u32;
        assert!(!is_probable_prime(&n));
        // a 60-digit semiprime: (10^30 + 57) * (10^30 + 99)
        let p = big("1000000000000000000000000000057");
        let q = big("1000000000000000000000000000099");
        assert!(is_probable_prime(&p));
        assert!(is_probable_prime(&q));
        assert!(!is_probable_prime(&(&p * &q)));
        let w = find_strong_witness(&(&p * &q)).expect("witness exists");
        assert!(!sprp(&(&p * &q), w));
    }

    #[test]
    fn lucas_handles_perfect_squares() {
        let n = big("22801763489") * big("22801763489");
        assert!(!strong_lucas(&n));
        assert!(!is_probable_prime(&n));
    }

    #[test]
    fn witness_search_on_structured_composites() {
        for n in [2047u64, 1373653, 25326001] {
            let nb = BigUint::from(n);
            if let Some(w) = find_strong_witness(&nb) {
                assert!(!sprp(&nb, w));
            } else {
                panic!("no witness found for composite {n}");
            }
        }
    }
}
