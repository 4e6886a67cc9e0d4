//! The main construction: derive parameters, cover the interval
//! `[-y, y]` around a perfect power with prime congruences, and search the
//! uncovered residue class for a fully composite window.
//!
//! The pipeline, for a given k and cutoff x:
//!
//! 1. derive y, z and the prime partitions P1, P2, P3;
//! 2. impose m ≡ 0 (mod p) for p in P1 and m ≡ 1 (mod p) for p in P2,
//!    which covers every u divisible by a P1 prime, u = -1, and every prime
//!    |u| with a P2 divisor of u + 1;
//! 3. list the exceptional set U of u values still uncovered;
//! 4. match each u in U with its own prime p_u and impose
//!    m^k ≡ -u (mod p_u): for odd k any prime with gcd(p-1, k) = 1 works
//!    (taken as p ≡ 2 mod k), for even k only p in P3 with (-u/p) = +1
//!    can serve, and the rest of U stays as leftovers;
//! 5. combine everything into a class A mod M and pick m = Mj + A with the
//!    smallest j that makes m^k + u composite for every leftover u.
//!
//! At desk scale the asymptotic inequalities backing step 4 can fail, so
//! the default "adaptive" mode shrinks y by 3/4 and retries whenever the
//! matching or the j-search runs out of room; "strict" mode errors instead.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::hp::HpFloat;
use crate::modular::{crt_combine, kth_root_mod, CombinedClass, Congruence, ModularError};
use crate::primality::is_probable_prime;
use crate::sieve::{is_prime_u64, primes_in_range_ap, primes_up_to};

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("parameter regime undefined: x must be at least 16, got {0}")]
    ParamRegime(u64),
    #[error("target interval empty, increase c2 or x")]
    EmptyTarget,
    #[error("insufficient primes; shrink c2 (|U| = {needed}, candidates = {available})")]
    InsufficientPrimes { needed: usize, available: usize },
    #[error("search budget exhausted after {0} candidates")]
    BudgetExhausted(u64),
    #[error(transparent)]
    Modular(#[from] ModularError),
}

/// All derived construction parameters.
///
/// With natural logs throughout: z = ⌊x^(c1·log₃x/log₂x)⌋ and
/// y = ⌊c2·x·log x·log₃x/(log₂x)²⌋; P1 = {p ≤ log x} ∪ {z < p ≤ x/4},
/// P2 = {log x < p ≤ z}, and for even k
/// P3 = {x/4 < p ≤ x/2 : p ≡ 3 (mod 2k)}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    pub k: u64,
    pub x: u64,
    pub c1: Ratio<u64>,
    pub c2: Ratio<u64>,
    /// 1/(15·φ(2k)); meaningful for even k, where it sets the counting
    /// threshold for the analytic leftover set.
    pub delta: Ratio<u64>,
    pub y: u64,
    pub z: u64,
    pub p1: Vec<u64>,
    pub p2: Vec<u64>,
    pub p3: Vec<u64>,
}

pub fn euler_phi(n: u64) -> u64 {
    assert!(n >= 1);
    let mut n = n;
    let mut phi = n;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            phi -= phi / d;
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

/// Derive y, z and the prime partitions for (k, x, c1, c2).
pub fn derive_params(
    k: u64,
    x: u64,
    c1: Ratio<u64>,
    c2: Ratio<u64>,
) -> Result<Params, ConstructError> {
    assert!(k >= 1 && k <= u32::MAX as u64, "k must be a positive machine exponent");
    assert!(!c1.numer().is_zero() && !c2.numer().is_zero(), "c1, c2 must be positive");
    if x < 16 {
        return Err(ConstructError::ParamRegime(x));
    }
    let l1 = HpFloat::from_u64(x).ln();
    let l2 = l1.ln();
    let l3 = l2.ln();
    debug_assert!(l2 > HpFloat::from_u64(1) && l3.is_positive());

    // z = floor(exp(c1 * l3/l2 * l1)), y = floor(c2 * x * l1 * l3 / l2^2)
    let z = l1
        .mul(&l3)
        .div(&l2)
        .mul_u64(*c1.numer())
        .div_u64(*c1.denom())
        .exp()
        .floor_u64();
    let y = HpFloat::from_u64(x)
        .mul(&l1)
        .mul(&l3)
        .div(&l2.mul(&l2))
        .mul_u64(*c2.numer())
        .div_u64(*c2.denom())
        .floor_u64();
    if y < 1 {
        return Err(ConstructError::EmptyTarget);
    }

    let log_x = l1.to_f64();
    let table = primes_up_to(x);
    let mut p1 = Vec::new();
    let mut p2 = Vec::new();
    let mut p3 = Vec::new();
    for p in table.iter() {
        let below_log = (p as f64) <= log_x;
        if below_log || (p > z && 4 * p <= x) {
            p1.push(p);
        } else if !below_log && p <= z {
            p2.push(p);
        }
    }
    if k % 2 == 0 {
        for p in table.iter() {
            if 4 * p > x && 2 * p <= x && p % (2 * k) == 3 {
                p3.push(p);
            }
        }
        // disjointness from P1 and P2 holds whenever z <= x/4; enforce it
        // for extreme c1 as well
        p3.retain(|p| !p1.contains(p) && !p2.contains(p));
    }

    Ok(Params {
        k,
        x,
        c1,
        c2,
        delta: Ratio::new(1, 15 * euler_phi(2 * k)),
        y,
        z,
        p1,
        p2,
        p3,
    })
}

/// The covering congruences (m1): residue 0 on P1, residue 1 on P2.
pub fn residue_system(params: &Params) -> Vec<Congruence> {
    params
        .p1
        .iter()
        .map(|&p| Congruence::new(0, p))
        .chain(params.p2.iter().map(|&p| Congruence::new(1 % p, p)))
        .collect()
}

/// The u in [-y, y] not covered by the congruences (m1), sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExceptionalSet {
    pub members: Vec<i64>,
}

impl ExceptionalSet {
    pub fn contains(&self, u: i64) -> bool {
        self.members.binary_search(&u).is_ok()
    }
}

/// Membership rule: u is exceptional iff no P1 prime divides it, and — when
/// |u| is 1 or a prime — no P2 prime divides u + 1. The latter clause is
/// exactly the reach of the m ≡ 1 congruences: p | u + 1 makes p | m^k + u.
/// In particular u = -1 (where u + 1 = 0 is divisible by everything) is
/// covered by any P2 prime and only counts as exceptional when P2 is empty.
pub fn exceptional_set(params: &Params) -> ExceptionalSet {
    let y = params.y as i64;
    let mut members = Vec::new();
    'next: for u in -y..=y {
        if u == 0 {
            continue;
        }
        for &p in &params.p1 {
            if u % p as i64 == 0 {
                continue 'next;
            }
        }
        let abs = u.unsigned_abs();
        if abs == 1 || is_prime_u64(abs) {
            for &p in &params.p2 {
                if (u + 1).rem_euclid(p as i64) == 0 {
                    continue 'next;
                }
            }
        }
        members.push(u);
    }
    ExceptionalSet { members }
}

/// The matching u -> p_u, with the unmatched u as leftovers (even k only;
/// odd k either matches everything or fails).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    /// sorted by u; the p_u are pairwise distinct
    pub pairs: Vec<(i64, u64)>,
    /// sorted ascending
    pub leftovers: Vec<i64>,
}

impl Assignment {
    pub fn prime_for(&self, u: i64) -> Option<u64> {
        self.pairs
            .binary_search_by_key(&u, |&(u, _)| u)
            .ok()
            .map(|i| self.pairs[i].1)
    }
}

/// Greedy order: fewest candidate primes first, ties by |u| ascending with
/// the positive sign first.
fn matching_order(counts: &[(i64, usize)]) -> Vec<i64> {
    let mut order: Vec<(i64, usize)> = counts.to_vec();
    order.sort_by_key(|&(u, count)| (count, u.unsigned_abs(), u < 0));
    order.into_iter().map(|(u, _)| u).collect()
}

/// Candidate primes for odd k: p in (x/4, x] with gcd(p-1, k) = 1, taken as
/// p ≡ 2 (mod k) for k > 1 and every prime for k = 1.
pub fn odd_candidates(params: &Params) -> Vec<u64> {
    let (a, q) = if params.k == 1 { (0, 1) } else { (2 % params.k, params.k) };
    let mut cands = primes_in_range_ap(params.x / 4, params.x, a, q);
    cands.retain(|p| !params.p1.contains(p) && !params.p2.contains(p));
    cands
}

/// Match every exceptional u with a distinct prime for odd k.
pub fn match_odd(u_set: &ExceptionalSet, params: &Params) -> Result<Assignment, ConstructError> {
    assert!(params.k % 2 == 1);
    let cands = odd_candidates(params);
    if u_set.members.len() > cands.len() {
        return Err(ConstructError::InsufficientPrimes {
            needed: u_set.members.len(),
            available: cands.len(),
        });
    }
    let counts: Vec<(i64, usize)> = u_set.members.iter().map(|&u| (u, cands.len())).collect();
    let order = matching_order(&counts);
    let mut pairs: Vec<(i64, u64)> = order.into_iter().zip(cands).collect();
    pairs.sort_by_key(|&(u, _)| u);
    Ok(Assignment {
        pairs,
        leftovers: Vec::new(),
    })
}

/// Greedy maximal matching for even k: u may take p in P3 with (-u/p) = +1.
/// Unmatched u become leftovers; an empty P3 simply leaves everything over.
pub fn match_even(u_set: &ExceptionalSet, params: &Params) -> Assignment {
    assert!(params.k % 2 == 0);
    let candidates: Vec<(i64, Vec<u64>)> = u_set
        .members
        .iter()
        .map(|&u| {
            let list: Vec<u64> = params
                .p3
                .iter()
                .filter(|&&p| crate::modular::jacobi(-u, p) == 1)
                .copied()
                .collect();
            (u, list)
        })
        .collect();
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by_key(|&i| {
        let (u, list) = &candidates[i];
        (list.len(), u.unsigned_abs(), *u < 0)
    });
    let mut available: std::collections::BTreeSet<u64> = params.p3.iter().copied().collect();
    let mut pairs = Vec::new();
    let mut leftovers = Vec::new();
    for i in order {
        let (u, list) = &candidates[i];
        match list.iter().find(|p| available.contains(p)) {
            Some(&p) => {
                available.remove(&p);
                pairs.push((*u, p));
            }
            None => leftovers.push(*u),
        }
    }
    pairs.sort_by_key(|&(u, _)| u);
    leftovers.sort_unstable();
    Assignment { pairs, leftovers }
}

/// The analytic leftover set U': the u whose count of usable primes in P3
/// is at most δx/log x. Reported for comparison with the operational
/// leftovers; when the threshold reaches |P3| it is vacuous and U' = U.
pub fn u_prime_analytic(u_set: &ExceptionalSet, params: &Params) -> Vec<i64> {
    assert!(params.k % 2 == 0);
    let threshold = params.delta.to_f64().unwrap() * params.x as f64 / (params.x as f64).ln();
    u_set
        .members
        .iter()
        .filter(|&&u| {
            let count = params
                .p3
                .iter()
                .filter(|&&p| crate::modular::jacobi(-u, p) == 1)
                .count();
            (count as f64) <= threshold
        })
        .copied()
        .collect()
}

/// Product of all primes <= x.
pub fn primorial(x: u64) -> BigUint {
    let mut n = BigUint::one();
    crate::sieve::for_each_prime(0, x, |p| n *= p);
    n
}

/// Find the smallest admissible j (and m = Mj + A).
///
/// Every leftover u must make m^k + u composite under the probable-prime
/// battery, and m must stay within 2N, N the primorial of x; odd k also
/// requires m > N so that the window sits above every covering prime. The
/// search tries at most `j_max` candidates.
pub fn search_j(
    system: &CombinedClass,
    leftovers: &[i64],
    k: u64,
    params: &Params,
    j_max: u64,
) -> Result<(BigUint, BigUint), ConstructError> {
    let n = primorial(params.x);
    let two_n = &n * 2u32;
    // odd k: start above N (exists below 2N because M divides N);
    // even k: any j >= 1 qualifies on size
    let j_start = if k % 2 == 1 {
        (&n - &system.a) / &system.m + 1u32
    } else {
        BigUint::one()
    };
    // the window must also clear every covering prime: m^k > x + y
    let window_floor = BigUint::from(params.x + params.y);
    let mut tried = 0u64;
    let mut j = j_start;
    loop {
        let m = &system.m * &j + &system.a;
        if m > two_n {
            return Err(ConstructError::BudgetExhausted(tried));
        }
        if tried >= j_max && !leftovers.is_empty() {
            return Err(ConstructError::BudgetExhausted(tried));
        }
        let mk = m.pow(k as u32);
        if mk > window_floor {
            let all_composite = leftovers.iter().all(|&u| {
                let value = if u >= 0 {
                    &mk + BigUint::from(u as u64)
                } else {
                    &mk - BigUint::from(u.unsigned_abs())
                };
                !is_probable_prime(&value)
            });
            if all_composite {
                return Ok((j, m));
            }
        }
        tried += 1;
        j += 1u32;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Shrink y by 3/4 and retry when matching or the j-search fails.
    Adaptive,
    /// Fail instead.
    Strict,
}

#[derive(Debug, Clone)]
pub struct ConstructOptions {
    pub c1: Ratio<u64>,
    pub c2: Ratio<u64>,
    pub mode: Mode,
    pub j_max: u64,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        ConstructOptions {
            c1: Ratio::one(),
            c2: Ratio::one(),
            mode: Mode::Adaptive,
            j_max: 1_000_000,
        }
    }
}

/// The fully assembled construction: m = Mj + A with m^k + u composite for
/// every |u| <= y (y the achieved interval radius).
#[derive(Debug, Clone)]
pub struct ConstructionResult {
    pub params: Params,
    pub y_target: u64,
    pub system: CombinedClass,
    pub j: BigUint,
    pub m: BigUint,
    pub assignment: Assignment,
}

#[derive(Serialize)]
struct PairDto {
    u: i64,
    p: u64,
}

#[derive(Serialize)]
struct ResultDto {
    k: u64,
    x: u64,
    c1: f64,
    c2: f64,
    y_target: u64,
    y_achieved: u64,
    #[serde(rename = "A")]
    a: String,
    #[serde(rename = "M")]
    modulus: String,
    j: String,
    m: String,
    pairs: Vec<PairDto>,
    leftovers: Vec<i64>,
}

impl ConstructionResult {
    pub fn y_achieved(&self) -> u64 {
        self.params.y
    }

    pub fn to_json(&self) -> serde_json::Value {
        let dto = ResultDto {
            k: self.params.k,
            x: self.params.x,
            c1: self.params.c1.to_f64().unwrap(),
            c2: self.params.c2.to_f64().unwrap(),
            y_target: self.y_target,
            y_achieved: self.params.y,
            a: self.system.a.to_string(),
            modulus: self.system.m.to_string(),
            j: self.j.to_string(),
            m: self.m.to_string(),
            pairs: self
                .assignment
                .pairs
                .iter()
                .map(|&(u, p)| PairDto { u, p })
                .collect(),
            leftovers: self.assignment.leftovers.clone(),
        };
        serde_json::to_value(dto).expect("plain data serializes")
    }

    /// The value m^k + u.
    pub fn window_value(&self, u: i64) -> BigUint {
        let mk = self.m.pow(self.params.k as u32);
        if u >= 0 {
            mk + BigUint::from(u as u64)
        } else {
            mk - BigUint::from(u.unsigned_abs())
        }
    }
}

/// Run the whole pipeline for (k, x).
pub fn construct(k: u64, x: u64, options: &ConstructOptions) -> Result<ConstructionResult, ConstructError> {
    let mut params = derive_params(k, x, options.c1, options.c2)?;
    let y_target = params.y;
    loop {
        let u_set = exceptional_set(&params);
        let attempt = (|| -> Result<ConstructionResult, ConstructError> {
            let assignment = if k % 2 == 1 {
                match_odd(&u_set, &params)?
            } else {
                match_even(&u_set, &params)
            };
            let mut congruences = residue_system(&params);
            for &(u, p) in &assignment.pairs {
                let root = kth_root_mod(u, k, p)?
                    .expect("matched prime admits a k-th root by construction");
                congruences.push(Congruence::new(root, p));
            }
            let system = crt_combine(&congruences)?;
            let (j, m) = search_j(&system, &assignment.leftovers, k, &params, options.j_max)?;
            Ok(ConstructionResult {
                params: params.clone(),
                y_target,
                system,
                j,
                m,
                assignment,
            })
        })();
        match attempt {
            Ok(result) => {
                // the window must clear every covering prime: m^k - y > x
                let mk = result.m.pow(k as u32);
                assert!(
                    mk > BigUint::from(params.x + params.y),
                    "window floor must exceed every witness prime"
                );
                return Ok(result);
            }
            Err(e @ (ConstructError::InsufficientPrimes { .. } | ConstructError::BudgetExhausted(_))) => {
                if options.mode == Mode::Strict {
                    return Err(e);
                }
                let shrunk = params.y * 3 / 4;
                if shrunk < 1 {
                    return Err(e);
                }
                params.y = shrunk;
            }
            Err(e) => return Err(e),
        }
    }
}
