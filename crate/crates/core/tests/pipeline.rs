use dbm_core::dynamics::{composite_cycle_length, orbit_summary};
use dbm_core::heuristics::{
    build_smooth_modulus, prob_all_large_primes_hit, HeuristicParams, LengthSource,
};
use dbm_core::modarith::{factorize, sieve_primes};
use dbm_core::obstruction::{search_modulus, ObstructionReport, Outcome, SearchOptions, Strategy};
use dbm_core::scan::{cycle_scan, RowOutcome};
use dbm_core::smoothness::{accumulate_s, accumulate_s_with, is_smooth_power, Alpha, Threshold};
use dbm_core::variety::text::{parse_map, parse_variety};
use dbm_core::variety::IntPoint;
use dbm_core::Exec;

fn phi() -> dbm_core::variety::PolyMap {
    parse_map("ambient projective 1\nx1^2 + 5*x2^2\nx2^2\n").unwrap()
}

#[test]
fn scan_rows_match_single_orbits() {
    let point = IntPoint::from_i64(&[1, 1]);
    let scan = cycle_scan(&phi(), &point, 300, 1_000_000, Exec::Sequential).unwrap();
    assert_eq!(scan.rows.len(), sieve_primes(300).unwrap().len());
    for row in &scan.rows {
        let RowOutcome::Cycle { tail, cycle } = row.outcome else {
            continue;
        };
        let s = orbit_summary(&phi(), &point.reduce(phi().ambient(), row.prime).unwrap()).unwrap();
        assert_eq!((s.tail, s.cycle), (tail, cycle), "p = {}", row.prime);
    }
}

#[test]
fn ledger_counts_smooth_cycles_by_hand() {
    let point = IntPoint::from_i64(&[1, 1]);
    let scan = cycle_scan(&phi(), &point, 2000, 1_000_000, Exec::Parallel).unwrap();
    let alpha = Alpha::new(1, 3);
    let fixed = accumulate_s_with(&scan, alpha, Threshold::FixedTop).unwrap();
    let x = fixed.x_max;
    let by_hand: Vec<u64> = scan
        .measured()
        .filter(|&(_, _, c)| is_smooth_power(c, x, alpha))
        .map(|(p, _, _)| p)
        .collect();
    assert_eq!(fixed.qualifying_primes, by_hand);
    let sum: f64 = by_hand.iter().map(|&p| (p as f64).ln()).sum();
    assert!((fixed.log_s_at(x) - sum).abs() < 1e-9 * sum);
    let running = accumulate_s(&scan, alpha).unwrap();
    assert!(running.log_s_at(x) <= fixed.log_s_at(x) + 1e-9);
}

#[test]
fn smooth_modulus_cycle_is_lcm_of_its_primes() {
    let point = IntPoint::from_i64(&[1, 1]);
    let scan = cycle_scan(&phi(), &point, 500, 1_000_000, Exec::Sequential).unwrap();
    let m = build_smooth_modulus(&scan, 500, Alpha::new(1, 2)).unwrap();
    let summaries: Vec<_> = m
        .primes
        .iter()
        .map(|&p| orbit_summary(&phi(), &point.reduce(phi().ambient(), p).unwrap()).unwrap())
        .collect();
    let (_, lcm) = composite_cycle_length(&summaries).unwrap();
    assert_eq!(lcm, m.cycle_lcm);
    let log_m: f64 = m.primes.iter().map(|&p| (p as f64).ln()).sum();
    assert!((m.log_m - log_m).abs() < 1e-9 * log_m.max(1.0));
    for &p in &m.primes {
        assert_eq!(factorize(p).unwrap().factors(), &[(p, 1)]);
    }
}

#[test]
fn scan_and_model_probabilities_are_probabilities() {
    let point = IntPoint::from_i64(&[1, 1]);
    let scan = cycle_scan(&phi(), &point, 1000, 1_000_000, Exec::Sequential).unwrap();
    let params = HeuristicParams::new(3, 2, Alpha::new(1, 3), 20).unwrap();
    for source in [LengthSource::Scan(&scan), LengthSource::Model] {
        let hit = prob_all_large_primes_hit(1000, &params, source).unwrap();
        assert!((0.0..=1.0).contains(&hit.probability));
        assert!(hit.warning.is_none());
    }
    assert!(prob_all_large_primes_hit(5000, &params, LengthSource::Scan(&scan)).is_err());
}

#[test]
fn report_text_round_trips_through_parse() {
    let phi = parse_map("ambient affine 2\nx1\nx2\n").unwrap();
    let v = parse_variety("ambient affine 2\n1 - x1^2 - x2^2\n").unwrap();
    let opts = SearchOptions {
        exec: Exec::Sequential,
        ..SearchOptions::default()
    };
    let report = search_modulus(
        &phi,
        &IntPoint::from_i64(&[1, 1]),
        &v,
        100,
        Strategy::All,
        &opts,
    )
    .unwrap();
    assert_eq!(report.outcome, Outcome::FoundPrime);
    let back: ObstructionReport = report.to_string().parse().unwrap();
    assert_eq!(back, report);
}
