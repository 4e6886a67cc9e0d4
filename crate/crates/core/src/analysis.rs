//! Exact desk-scale verification of the estimates behind the construction:
//! smooth-number counts, sieved prime counts against the Mertens product,
//! the quadratic character sum S over the exceptional set, the local root
//! density product for n^k + u, and maximal prime gap records.
//!
//! Counts and products are exact (integer or big-rational); the reported
//! ratios are rendered at 50 significant digits through [`crate::hp`].
//! None of the asymptotic implied constants are asserted here — the test
//! suite checks boundedness and trend only, with generous factors.

use num_bigint::BigUint;
use num_traits::One;

use crate::construction::ExceptionalSet;
use crate::hp::{ln_u64, rational_decimal, HpFloat};
use crate::modular::{jacobi, rho};
use crate::sieve::{for_each_prime, primes_up_to, smooth_count};

/// A record prime gap: no smaller starting prime has a gap this large, and
/// no prime lies between p and q.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRecord {
    pub p: u64,
    pub q: u64,
    pub gap: u64,
    /// gap / log p, the normalized gap of the Cramér model
    pub merit: f64,
    /// gap (log₃p)² / (log p · log₂p · log₄p), defined once log₄p > 0,
    /// i.e. beyond p ≈ 3.81e6
    pub rankin_ratio: Option<f64>,
}

impl GapRecord {
    pub const CSV_HEADER: &'static str = "p,q,gap,merit,rankin_ratio";

    pub fn csv_row(&self) -> String {
        let rankin = self
            .rankin_ratio
            .map(|r| r.to_string())
            .unwrap_or_default();
        format!("{},{},{},{},{}", self.p, self.q, self.gap, self.merit, rankin)
    }
}

/// All record gaps among primes up to `limit` (both endpoints within limit).
pub fn max_gap(limit: u64) -> Vec<GapRecord> {
    assert!(limit >= 3);
    let mut records = Vec::new();
    let mut prev: Option<u64> = None;
    let mut best = 0u64;
    for_each_prime(0, limit, |p| {
        if let Some(last) = prev {
            let gap = p - last;
            if gap > best {
                best = gap;
                let l1 = (last as f64).ln();
                let l2 = l1.ln();
                let l3 = l2.ln();
                let rankin_ratio = if l3 > 0.0 {
                    let l4 = l3.ln();
                    (l4 > 0.0).then(|| gap as f64 * l3 * l3 / (l1 * l2 * l4))
                } else {
                    None
                };
                records.push(GapRecord {
                    p: last,
                    q: p,
                    gap,
                    merit: gap as f64 / l1,
                    rankin_ratio,
                });
            }
        }
        prev = Some(p);
    });
    records
}

/// Exact smooth count against the x / log⁵x comparison quantity.
#[derive(Debug, Clone)]
pub struct SmoothBound {
    pub x: u64,
    pub z: u64,
    pub count: u64,
    /// count / (x / log⁵x)
    pub bound_ratio: f64,
    pub bound_ratio_decimal: String,
    /// whether z is within the hypothesis z <= x^(log₃x / (10 log₂x))
    pub hypothesis_met: bool,
}

impl SmoothBound {
    pub const CSV_HEADER: &'static str = "x,z,count,bound_ratio,hypothesis_met";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.x, self.z, self.count, self.bound_ratio_decimal, self.hypothesis_met
        )
    }
}

/// The z value of the smooth-count hypothesis, ⌊x^(log₃x/(10 log₂x))⌋,
/// clamped up to 2 so the count is defined.
pub fn smooth_cutoff_z(x: u64) -> u64 {
    let l1 = HpFloat::from_u64(x).ln();
    let l2 = l1.ln();
    let l3 = l2.ln();
    assert!(l3.is_positive(), "x must be at least 16");
    let z = l1.mul(&l3).div(&l2).div_u64(10).exp().floor_u64();
    z.max(2)
}

pub fn check_smooth_bound(x: u64, z: u64) -> SmoothBound {
    assert!(2 <= z && z <= x);
    let count = smooth_count(x, z);
    let l1 = HpFloat::from_u64(x).ln();
    let l2 = l1.ln();
    let l3 = l2.ln();
    let l1_5 = l1.mul(&l1).mul(&l1).mul(&l1).mul(&l1);
    let ratio = HpFloat::from_u64(count).mul(&l1_5).div_u64(x);
    let cutoff = l1.mul(&l3).div(&l2).div_u64(10).exp();
    SmoothBound {
        x,
        z,
        count,
        bound_ratio: ratio.to_f64(),
        bound_ratio_decimal: ratio.to_decimal(50),
        hypothesis_met: HpFloat::from_u64(z) <= cutoff,
    }
}

/// Exact count of primes avoiding a residue class against the sieve bound.
#[derive(Debug, Clone)]
pub struct SieveBound {
    pub x: u64,
    pub a: i64,
    pub r_len: usize,
    pub count: u64,
    /// (x / log x) · ∏_{r in R, r <= x} (1 - 1/r)
    pub mertens_bound: f64,
    pub mertens_bound_decimal: String,
    pub ratio: f64,
    pub ratio_decimal: String,
}

impl SieveBound {
    pub const CSV_HEADER: &'static str = "x,a,r_len,count,mertens_bound,ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.x, self.a, self.r_len, self.count, self.mertens_bound_decimal, self.ratio_decimal
        )
    }
}

/// Count primes p <= x with p ≢ a (mod r) for every r in R, a in {-1, +1}.
pub fn check_sieve_bound(x: u64, r_set: &[u64], a: i64) -> SieveBound {
    assert!(a == 1 || a == -1);
    let mut count = 0u64;
    for_each_prime(0, x, |p| {
        let avoided = r_set
            .iter()
            .all(|&r| p % r != a.rem_euclid(r as i64) as u64);
        if avoided {
            count += 1;
        }
    });
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for &r in r_set.iter().filter(|&&r| r <= x) {
        num *= r - 1;
        den *= r;
    }
    let l1 = ln_u64(x);
    let bound = HpFloat::from_u64(x)
        .div(&l1)
        .mul(&HpFloat::from_ratio(&num, &den));
    let ratio = HpFloat::from_u64(count).div(&bound);
    SieveBound {
        x,
        a,
        r_len: r_set.len(),
        count,
        mertens_bound: bound.to_f64(),
        mertens_bound_decimal: bound.to_decimal(50),
        ratio: ratio.to_f64(),
        ratio_decimal: ratio.to_decimal(50),
    }
}

/// The exact character sum S = Σ_{u in U} |Σ_{p in P3} (-u/p)|², with every
/// inner sum retained so the threshold test for the analytic leftover set
/// can be replayed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharSum {
    pub s: u128,
    /// (u, Σ_{p in P3} (-u/p))
    pub per_u: Vec<(i64, i64)>,
}

impl CharSum {
    pub const CSV_HEADER: &'static str = "k,x,members,p3_len,s,s_p_major,s_reciprocity";
}

/// u-major evaluation: one inner sum per u, then the sum of squares.
pub fn char_sum_s(u_set: &ExceptionalSet, p3: &[u64]) -> CharSum {
    let per_u: Vec<(i64, i64)> = u_set
        .members
        .iter()
        .map(|&u| {
            let inner: i64 = p3.iter().map(|&p| jacobi(-u, p) as i64).sum();
            (u, inner)
        })
        .collect();
    let s = per_u.iter().map(|&(_, v)| (v * v) as u128).sum();
    CharSum { s, per_u }
}

/// p-major evaluation: accumulate all inner sums prime by prime. Must agree
/// exactly with the u-major order.
pub fn char_sum_s_p_major(u_set: &ExceptionalSet, p3: &[u64]) -> u128 {
    let mut partial = vec![0i64; u_set.members.len()];
    for &p in p3 {
        for (slot, &u) in partial.iter_mut().zip(&u_set.members) {
            *slot += jacobi(-u, p) as i64;
        }
    }
    partial.iter().map(|&v| (v * v) as u128).sum()
}

/// Quadratic-reciprocity form: write u = s·u1²·u2 with u2 squarefree, then
/// (-u/p) = (-s)·(-1)^((u2-1)/2)·(p/u2) for p ≡ 3 (mod 4). Requires odd u
/// (exceptional values always are) and p larger than u1.
pub fn char_sum_s_reciprocity(u_set: &ExceptionalSet, p3: &[u64]) -> u128 {
    let mut s_total: u128 = 0;
    for &u in &u_set.members {
        let abs = u.unsigned_abs();
        assert!(abs % 2 == 1, "reciprocity form needs odd u");
        let mut u2 = 1u64;
        let mut rest = abs;
        let mut d = 3u64;
        // odd part of the squarefree kernel (u odd, so no factor 2)
        while d * d <= rest {
            let mut e = 0;
            while rest % d == 0 {
                rest /= d;
                e += 1;
            }
            if e % 2 == 1 {
                u2 *= d;
            }
            d += 2;
        }
        if rest > 1 {
            u2 *= rest;
        }
        let sign_s: i64 = if u > 0 { -1 } else { 1 }; // the (-s) factor
        let sign_u2: i64 = if u2 % 4 == 3 { -1 } else { 1 }; // (-1)^((u2-1)/2)
        let inner: i64 = p3
            .iter()
            .map(|&p| {
                debug_assert!(u2 == 1 || p as u128 * p as u128 > abs as u128 / u2 as u128);
                sign_s * sign_u2 * jacobi(p as i64, u2) as i64
            })
            .sum();
        s_total += (inner * inner) as u128;
    }
    s_total
}

/// The large-sieve shape: Σ over odd squarefree m <= x of |Σ_{p in P} (p/m)|².
pub fn char_sum_lemma3(p_set: &[u64], x: u64) -> u128 {
    // squarefree flags by striking multiples of prime squares
    let mut squarefree = vec![true; (x + 1) as usize];
    let table = primes_up_to((x as f64).sqrt() as u64 + 1);
    for p in table.iter() {
        let p2 = p * p;
        if p2 > x {
            break;
        }
        let mut mult = p2;
        while mult <= x {
            squarefree[mult as usize] = false;
            mult += p2;
        }
    }
    let mut total: u128 = 0;
    for m in (1..=x).step_by(2) {
        if !squarefree[m as usize] {
            continue;
        }
        let inner: i64 = p_set.iter().map(|&p| jacobi(p as i64, m) as i64).sum();
        total += (inner * inner) as u128;
    }
    total
}

/// The exact product ∏_{x < p <= y} (1 - ρ_u(p)/p) and its normalized ratio
/// against log x / log y.
#[derive(Debug, Clone)]
pub struct RhoProduct {
    pub u: i64,
    pub k: u64,
    pub x: u64,
    pub y: u64,
    pub numerator: BigUint,
    pub denominator: BigUint,
    pub product: f64,
    pub product_decimal: String,
    /// product · log y / log x
    pub ratio: f64,
    pub ratio_decimal: String,
}

impl RhoProduct {
    pub const CSV_HEADER: &'static str = "u,k,x,y,product,ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.u, self.k, self.x, self.y, self.product_decimal, self.ratio_decimal
        )
    }
}

fn rho_product_with(u: i64, k: u64, x: u64, y: u64, rho_fn: impl Fn(i64, u64, u64) -> u64) -> RhoProduct {
    assert!(2 <= x && x < y);
    assert!(u != 0 && k >= 1);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for_each_prime(x, y, |p| {
        let r = rho_fn(u, k, p);
        num *= p - r;
        den *= p;
    });
    let product_hp = HpFloat::from_ratio(&num, &den);
    let ratio_hp = product_hp.mul(&ln_u64(y)).div(&ln_u64(x));
    let product_decimal = rational_decimal(&num, &den, 50);
    RhoProduct {
        u,
        k,
        x,
        y,
        product: product_hp.to_f64(),
        product_decimal,
        ratio: ratio_hp.to_f64(),
        ratio_decimal: ratio_hp.to_decimal(50),
        numerator: num,
        denominator: den,
    }
}

/// Exact local density product via the subgroup-count ρ.
pub fn rho_product(u: i64, k: u64, x: u64, y: u64) -> RhoProduct {
    rho_product_with(u, k, x, y, rho)
}
