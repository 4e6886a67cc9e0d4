//! Prime generation and smooth-number counting.
//!
//! Everything here is exact: a segmented sieve of Eratosthenes for prime
//! enumeration (segments sized to stay cache-resident, limits up to ~10^9
//! are practical), trial-division factorization for the small integers the
//! construction handles, and smooth counting by literally dividing out all
//! prime factors up to `z` — no Dickman-rho style approximation.

/// Segment length for the segmented sieve, in odd-number slots (1 MiB of flags).
const SEGMENT_LEN: usize = 1 << 20;

/// The primes up to an inclusive limit, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().copied()
    }
}

/// Simple odd-only sieve used for base primes up to `sqrt(limit)`.
fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    // flags[i] represents the odd number 2i + 1; index 0 (the number 1) unused.
    let mut flags = vec![true; n / 2 + 1];
    let mut primes = vec![2];
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) <= n {
        if flags[i] {
            let p = 2 * i + 1;
            let mut j = (p * p) / 2;
            while j < flags.len() {
                flags[j] = false;
                j += p;
            }
        }
        i += 1;
    }
    for i in 1..flags.len() {
        let v = 2 * i + 1;
        if v <= n && flags[i] {
            primes.push(v as u64);
        }
    }
    primes
}

/// Visit every prime p with `lo < p <= hi`, ascending.
///
/// Runs a segmented sieve over odd candidates so the working set stays small
/// regardless of the range; results are identical for any segmentation.
pub fn for_each_prime<F: FnMut(u64)>(lo: u64, hi: u64, mut visit: F) {
    if hi < 2 || hi <= lo {
        return;
    }
    if lo < 2 {
        visit(2);
    }
    let mut sqrt_hi = (hi as f64).sqrt() as u64;
    while (sqrt_hi + 1).saturating_mul(sqrt_hi + 1) <= hi {
        sqrt_hi += 1;
    }
    let base = small_primes(sqrt_hi);
    // Odd numbers only from here on.
    let mut start = if lo < 2 { 3 } else { lo + 1 };
    if start % 2 == 0 {
        start += 1;
    }
    let mut seg = vec![true; SEGMENT_LEN];
    while start <= hi {
        let end = hi.min(start + (2 * SEGMENT_LEN as u64) - 2); // inclusive, odd stride
        let slots = ((end - start) / 2 + 1) as usize;
        seg[..slots].fill(true);
        for &p in base.iter().skip(1) {
            if p * p > end {
                break;
            }
            // first odd multiple of p in [start, end] that is >= p*p
            let mut mult = p * p;
            if mult < start {
                mult = start.div_ceil(p) * p;
                if mult % 2 == 0 {
                    mult += p;
                }
            }
            let mut idx = (mult - start) / 2;
            while idx < slots as u64 {
                seg[idx as usize] = false;
                idx += p;
            }
        }
        for (i, &is_prime) in seg[..slots].iter().enumerate() {
            if is_prime {
                visit(start + 2 * i as u64);
            }
        }
        let next = if end % 2 == 0 { end + 1 } else { end + 2 };
        if next <= end {
            break; // overflow guard
        }
        start = next;
    }
}

/// All primes `<= n`, ascending; `n < 2` yields an empty table.
pub fn primes_up_to(n: u64) -> PrimeTable {
    let mut primes = Vec::new();
    for_each_prime(0, n, |p| primes.push(p));
    PrimeTable { limit: n, primes }
}

/// Primes p with `lo < p <= hi` and `p ≡ a (mod q)`, ascending.
///
/// `q = 1` imposes nothing. A residue class sharing a factor with `q` is not
/// an error; it just contains at most the prime `a` itself.
pub fn primes_in_range_ap(lo: u64, hi: u64, a: u64, q: u64) -> Vec<u64> {
    assert!(lo < hi, "empty range");
    assert!(q >= 1 && a < q, "residue out of range");
    let mut out = Vec::new();
    for_each_prime(lo, hi, |p| {
        if p % q == a {
            out.push(p);
        }
    });
    out
}

/// Largest prime factor P+(n), with the convention P+(1) = 1 so that 1 is
/// z-smooth for every z.
pub fn largest_prime_factor(n: u64) -> u64 {
    assert!(n >= 1);
    let mut n = n;
    let mut largest = 1;
    while n % 2 == 0 {
        largest = 2;
        n /= 2;
    }
    let mut d = 3;
    while d * d <= n {
        while n % d == 0 {
            largest = d;
            n /= d;
        }
        d += 2;
    }
    if n > 1 {
        largest = n;
    }
    largest
}

/// Number of n in `[1, x]` with P+(n) <= z, by exact enumeration.
///
/// Works segment by segment, dividing every value by each prime `p <= z`
/// until it no longer divides; a value is z-smooth exactly when the residual
/// reaches 1.
pub fn smooth_count(x: u64, z: u64) -> u64 {
    assert!(x >= 1 && z >= 1);
    if z == 1 {
        return 1; // only n = 1
    }
    let small = primes_up_to(z.min(x));
    let mut count = 0u64;
    let seg_len = SEGMENT_LEN as u64;
    let mut lo = 1u64;
    while lo <= x {
        let hi = x.min(lo + seg_len - 1);
        let mut residual: Vec<u64> = (lo..=hi).collect();
        for &p in small.primes() {
            let mut mult = lo.div_ceil(p) * p;
            while mult <= hi {
                let slot = &mut residual[(mult - lo) as usize];
                while *slot % p == 0 {
                    *slot /= p;
                }
                mult += p;
            }
        }
        count += residual.iter().filter(|&&r| r == 1).count() as u64;
        lo = hi + 1;
    }
    count
}

/// Deterministic Miller-Rabin for u64 (base set proven exact below 3.3e24).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'base: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'base;
            }
        }
        return false;
    }
    true
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_u64(acc, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    acc
}
