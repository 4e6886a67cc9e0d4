//! End-to-end round trips: every construction the pipeline emits must yield
//! a certificate that verifies, across both parities of k and at a scale
//! where the m ≡ 1 (mod p) congruences actually participate.

use num_bigint::BigUint;
use powergap_core::certify::{build_certificate, verify_certificate, WitnessKind};
use powergap_core::construction::{
    construct, exceptional_set, primorial, ConstructOptions, Mode,
};

#[test]
fn certificates_verify_across_the_parameter_grid() {
    for k in [1u64, 2, 3] {
        for x in [30u64, 50, 80] {
            let result = construct(k, x, &ConstructOptions::default())
                .unwrap_or_else(|e| panic!("construct k={k} x={x}: {e}"));
            let cert = build_certificate(&result)
                .unwrap_or_else(|e| panic!("certificate k={k} x={x}: {e}"));
            assert_eq!(cert.witnesses.len() as u64, 2 * cert.y + 1);
            let report = verify_certificate(&cert);
            assert!(
                report.ok,
                "verification failed at k={k} x={x}: {:?}",
                report.failures
            );
        }
    }
}

#[test]
fn odd_k_sits_between_n_and_2n() {
    for x in [30u64, 50, 80] {
        let result = construct(1, x, &ConstructOptions::default()).unwrap();
        let n = primorial(x);
        assert!(result.m > n);
        assert!(result.m <= &n * 2u32);
        assert_eq!(result.m, &result.system.m * &result.j + &result.system.a);
    }
}

#[test]
fn p2_congruences_participate_at_larger_x() {
    // x = 3000 is the smallest acceptance-adjacent scale where z exceeds
    // log x, so P2 is nonempty and the m ≡ 1 coverage has work to do.
    let result = construct(1, 3000, &ConstructOptions::default()).unwrap();
    let params = &result.params;
    assert_eq!(params.p2, vec![11, 13]);

    // -1 is covered by P2, not exceptional
    let u_set = exceptional_set(params);
    assert!(!u_set.contains(-1));

    // m ≡ 0 on P1, m ≡ 1 on P2
    for &p in &params.p1 {
        assert!((&result.m % p).to_u64_digits().is_empty(), "m mod {p} = 0");
    }
    for &p in &params.p2 {
        assert_eq!((&result.m % p).to_u64_digits(), vec![1], "m mod {p} = 1");
    }

    let cert = build_certificate(&result).unwrap();
    let report = verify_certificate(&cert);
    assert!(report.ok, "{:?}", report.failures);

    // some prime |u| with 11 | u + 1 must carry the witness 11
    let w = cert
        .witnesses
        .iter()
        .find(|w| w.u == -1)
        .expect("u = -1 in range");
    assert_eq!(w.kind, WitnessKind::PrimeDivisor);
    assert!(params.p2.contains(&w.p.unwrap()));
    let covered_prime = cert.witnesses.iter().any(|w| {
        w.u > 0
            && powergap_core::sieve::is_prime_u64(w.u as u64)
            && w.p == Some(11)
            && (w.u + 1) % 11 == 0
    });
    assert!(covered_prime, "P2 coverage of prime u values never fired");
}

#[test]
fn k_divisible_by_three_has_empty_p3_and_still_certifies() {
    // p ≡ 3 (mod 2k) forces 3 | p once 3 | k, so P3 = {} for k = 6: the
    // matching finds nothing and the j-search alone covers the whole
    // exceptional set
    let result = construct(6, 50, &ConstructOptions::default()).unwrap();
    assert!(result.params.p3.is_empty());
    assert!(result.assignment.pairs.is_empty());
    let u_set = exceptional_set(&result.params);
    assert_eq!(result.assignment.leftovers, u_set.members);
    let cert = build_certificate(&result).unwrap();
    let report = verify_certificate(&cert);
    assert!(report.ok, "{:?}", report.failures);
}

#[test]
fn higher_odd_k_uses_the_residue_two_candidates() {
    let result = construct(5, 50, &ConstructOptions::default()).unwrap();
    for &(_, p) in &result.assignment.pairs {
        assert_eq!(p % 5, 2, "candidate prime {p} must be 2 mod 5");
    }
    assert!(result.assignment.leftovers.is_empty());
    let report = verify_certificate(&build_certificate(&result).unwrap());
    assert!(report.ok, "{:?}", report.failures);
}

#[test]
fn adaptive_mode_records_both_targets() {
    let result = construct(3, 80, &ConstructOptions::default()).unwrap();
    assert_eq!(result.y_target, 62);
    assert!(result.y_achieved() <= result.y_target);
    assert!(result.y_achieved() >= 1);

    // strict mode refuses the same instance
    let strict = ConstructOptions {
        mode: Mode::Strict,
        ..ConstructOptions::default()
    };
    assert!(construct(3, 80, &strict).is_err());
}

#[test]
fn tampered_m_breaks_verification() {
    let result = construct(2, 50, &ConstructOptions::default()).unwrap();
    let mut cert = build_certificate(&result).unwrap();
    cert.m += BigUint::from(1u32);
    // m left its residue class: at least the even-u witnesses (p = 2) fail
    let report = verify_certificate(&cert);
    assert!(!report.ok);
    assert!(report.failures.iter().any(|f| f.u == Some(0)));
}
