mod common;

use common::*;
use lpmforge::alignment::{extract_instances, Segment};
use lpmforge::gap::{
    constrained_match, constrained_support, extract_dynamic, extract_static, dynamic_segments, instance_satisfies, parse_duration, static_segments,
    ExtractionCache, ExtractionStrategy, GapConstraint,
};
use lpmforge::log::{Event, EventLog, Trace};
use lpmforge::Error;
use proptest::prelude::*;

fn timed(labels: &str, times: &[i64]) -> Trace {
    Trace::new("s", labels.chars().zip(times).map(|(c, &t)| Event::at(c.to_string(), t)).collect())
}

fn untimed(labels: &str) -> Trace {
    Trace::new("s", labels.chars().map(|c| Event::new(c.to_string())).collect())
}

const TIMES: [i64; 7] = [0, 1000, 1200, 2000, 2600, 2700, 2800];

#[test]
fn event_gap_decision_table() {
    let t = untimed("axybzc");
    for g in 0..5 {
        assert_eq!(instance_satisfies(&t, &[1, 4, 6], GapConstraint::Event(g)).unwrap(), g >= 2, "gap {g}");
    }
    assert!(instance_satisfies(&t, &[3], GapConstraint::Event(0)).unwrap());
}

#[test]
fn time_gap_decisions() {
    let t = timed("axbcabc", &TIMES);
    assert!(instance_satisfies(&t, &[5, 6, 7], GapConstraint::Time(120)).unwrap());
    assert!(!instance_satisfies(&t, &[1, 3, 4], GapConstraint::Time(120)).unwrap());
    let u = untimed("abc");
    assert!(matches!(instance_satisfies(&u, &[1, 2], GapConstraint::Time(5)), Err(Error::MissingTimestamp { .. })));
}

#[test]
fn dynamic_extraction_running_example() {
    let log = EventLog::new(vec![untimed("ababcxxabc")]).unwrap();
    let p = tree("seq(a,and(b,c))");
    let ex = extract_dynamic(&log, &p, GapConstraint::Event(0)).unwrap();
    let got: Vec<Vec<String>> = ex.traces().iter().map(|t| t.labels()).collect();
    assert_eq!(got, vec![labels("ababc"), labels("abc")]);
    assert_eq!(constrained_support(&log, &p, GapConstraint::Event(0), ExtractionStrategy::Dynamic, None).unwrap(), 2);
    let m = constrained_match(&log, &p, GapConstraint::Event(0), ExtractionStrategy::Dynamic, None).unwrap();
    let lms: Vec<Vec<usize>> = m.instances.instances.iter().map(|i| i.landmark.clone()).collect();
    assert_eq!(lms, vec![vec![3, 4, 5], vec![8, 9, 10]]);
}

#[test]
fn running_example_all_strategies() {
    // one event per second; a one-second time gap admits adjacent events only
    let times: Vec<i64> = (0..10).map(|i| i * 1000).collect();
    let log = EventLog::new(vec![timed("ababcxxabc", &times)]).unwrap();
    let p = tree("seq(a,and(b,c))");
    let cache = ExtractionCache::new();
    let c = GapConstraint::Time(1000);
    for s in [ExtractionStrategy::Dynamic, ExtractionStrategy::Static, ExtractionStrategy::CachedDynamic] {
        assert_eq!(constrained_support(&log, &p, c, s, Some(&cache)).unwrap(), 2, "{s:?}");
    }
    assert_eq!(cache.len(), 1);
    assert_eq!(constrained_support(&log, &p, c, ExtractionStrategy::CachedDynamic, Some(&cache)).unwrap(), 2);
    assert_eq!(cache.len(), 1);
}

#[test]
fn static_segmentation_gap_500() {
    let log = EventLog::new(vec![timed("axbcabc", &TIMES)]).unwrap();
    let ex = extract_static(&log, 500).unwrap();
    let got: Vec<Vec<String>> = ex.traces().iter().map(|t| t.labels()).collect();
    assert_eq!(got, vec![labels("a"), labels("xb"), labels("c"), labels("abc")]);
    let whole = extract_static(&log, 10_000).unwrap();
    assert_eq!(whole.len(), 1);
    let tiny = extract_static(&log, 50).unwrap();
    assert_eq!(tiny.len(), 7);
}

#[test]
fn static_requires_time_and_timestamps() {
    let log = EventLog::new(vec![untimed("abc")]).unwrap();
    let p = tree("seq(a,b)");
    assert!(matches!(
        constrained_support(&log, &p, GapConstraint::Event(1), ExtractionStrategy::Static, None),
        Err(Error::Config(_))
    ));
    assert!(matches!(extract_static(&log, 10), Err(Error::MissingTimestamp { .. })));
    assert!(matches!(
        constrained_support(&log, &p, GapConstraint::Time(5), ExtractionStrategy::Dynamic, None),
        Err(Error::MissingTimestamp { .. })
    ));
}

#[test]
fn absent_pattern_and_no_start_events() {
    let log = EventLog::new(vec![untimed("xyz"), untimed("bcb")]).unwrap();
    let p = tree("seq(a,b)");
    assert_eq!(constrained_support(&log, &p, GapConstraint::Event(3), ExtractionStrategy::Dynamic, None).unwrap(), 0);
    assert!(extract_dynamic(&log, &p, GapConstraint::Event(3)).unwrap().is_empty());
}

#[test]
fn durations() {
    assert_eq!(parse_duration("2m").unwrap(), 120_000);
    assert_eq!(parse_duration("120s").unwrap(), 120_000);
    assert_eq!(parse_duration("1h 30m").unwrap(), 5_400_000);
    assert!(parse_duration("soon").is_err());
    assert!(parse_duration("0s").is_err());
}

fn arb_timed_log(max_acts: u8, max_len: usize, max_traces: usize) -> impl Strategy<Value = EventLog> {
    prop::collection::vec(prop::collection::vec((0..max_acts, 0i64..400), 0..=max_len), 1..=max_traces).prop_map(
        |ts| {
            let traces = ts
                .into_iter()
                .enumerate()
                .map(|(i, t)| {
                    let mut clock = 0;
                    let events = t
                        .into_iter()
                        .map(|(a, dt)| {
                            clock += dt;
                            Event::at(((b'a' + a) as char).to_string(), clock)
                        })
                        .collect();
                    Trace::new(format!("c{i}"), events)
                })
                .collect();
            EventLog::new(traces).unwrap()
        },
    )
}

fn arb_constraint() -> impl Strategy<Value = GapConstraint> {
    prop_oneof![(0usize..4).prop_map(GapConstraint::Event), (1i64..600).prop_map(GapConstraint::Time)]
}

fn satisfies(trace: &Trace, pos: &[usize], c: GapConstraint) -> bool {
    pos.windows(2).all(|w| match c {
        GapConstraint::Event(g) => w[1] - w[0] - 1 <= g,
        GapConstraint::Time(g) => trace.events[w[1]].timestamp.unwrap() - trace.events[w[0]].timestamp.unwrap() <= g,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn strategies_agree(log in arb_timed_log(10, 12, 5), t in arb_tree(3, &["a", "b", "c", "d"]), g in 1i64..800) {
        let c = GapConstraint::Time(g);
        let cache = ExtractionCache::new();
        let d = constrained_support(&log, &t, c, ExtractionStrategy::Dynamic, None).unwrap();
        prop_assert_eq!(d, constrained_support(&log, &t, c, ExtractionStrategy::Static, Some(&cache)).unwrap());
        prop_assert_eq!(d, constrained_support(&log, &t, c, ExtractionStrategy::CachedDynamic, Some(&cache)).unwrap());
        let e = GapConstraint::Event((g % 4) as usize);
        prop_assert_eq!(
            constrained_support(&log, &t, e, ExtractionStrategy::Dynamic, None).unwrap(),
            constrained_support(&log, &t, e, ExtractionStrategy::CachedDynamic, Some(&cache)).unwrap()
        );
    }

    #[test]
    fn matches_brute_force_oracle(log in arb_timed_log(4, 8, 2), t in arb_tree(3, &["a", "b", "c"]), c in arb_constraint()) {
        let acts = t.activities();
        let m = constrained_match(&log, &t, c, ExtractionStrategy::Dynamic, None).unwrap();
        for (ti, tr) in log.traces().iter().enumerate() {
            let idx: Vec<usize> = (0..tr.len()).filter(|&i| acts.contains(&tr.events[i].activity)).collect();
            let word: Vec<String> = idx.iter().map(|&i| tr.events[i].activity.clone()).collect();
            let ok = |pos: &[usize]| satisfies(tr, &pos.iter().map(|&p| idx[p]).collect::<Vec<_>>(), c);
            let (covered, count) = brute_gamma_with(&t, &word, &ok);
            let mine: Vec<&[usize]> = m.instances.landmarks_of(ti);
            prop_assert_eq!(mine.len(), count, "trace {:?}", word);
            prop_assert_eq!(mine.iter().map(|l| l.len()).sum::<usize>(), covered);
            for l in mine {
                prop_assert!(instance_satisfies(tr, l, c).unwrap());
            }
        }
    }

    #[test]
    fn unbounded_gap_is_unconstrained(log in arb_timed_log(5, 12, 4), t in arb_tree(3, &["a", "b", "c"])) {
        let s = extract_instances(&t, &log).unwrap().len();
        prop_assert_eq!(constrained_support(&log, &t, GapConstraint::Event(usize::MAX / 2), ExtractionStrategy::Dynamic, None).unwrap(), s);
        prop_assert_eq!(constrained_support(&log, &t, GapConstraint::Time(i64::MAX / 2), ExtractionStrategy::Static, None).unwrap(), s);
    }

    #[test]
    fn covered_events_monotone_in_max_gap(log in arb_timed_log(5, 12, 4), t in arb_tree(3, &["a", "b", "c"]), g in 0usize..5, h in 1i64..500) {
        // the instance count itself can drop: loop(c) on ⟨c,a,c⟩ has 2 instances at gap 0 and 1 at gap 1
        let cov = |c| -> usize {
            constrained_match(&log, &t, c, ExtractionStrategy::Dynamic, None).unwrap().instances.instances.iter().map(|i| i.landmark.len()).sum()
        };
        prop_assert!(cov(GapConstraint::Event(g)) <= cov(GapConstraint::Event(g + 1)));
        prop_assert!(cov(GapConstraint::Time(h)) <= cov(GapConstraint::Time(h + 100)));
    }

    #[test]
    fn no_satisfying_instance_spans_a_boundary(log in arb_timed_log(4, 8, 2), t in arb_tree(3, &["a", "b", "c"]), c in arb_constraint()) {
        // brute-force Γ on each original trace equals the sum over its extracted pieces
        let acts = t.activities();
        let dynamic = dynamic_segments(&log, &acts, &t.start_activities(), c).unwrap();
        let mut views = vec![dynamic];
        if let GapConstraint::Time(g) = c {
            views.push(static_segments(&log, g).unwrap().into_iter().map(|s| {
                let keep: Vec<usize> = (0..s.positions.len()).filter(|&k| acts.contains(&s.labels[k])).collect();
                Segment { trace: s.trace, positions: keep.iter().map(|&k| s.positions[k]).collect(), labels: keep.iter().map(|&k| s.labels[k].clone()).collect() }
            }).collect());
        }
        for (ti, tr) in log.traces().iter().enumerate() {
            let idx: Vec<usize> = (0..tr.len()).filter(|&i| acts.contains(&tr.events[i].activity)).collect();
            let word: Vec<String> = idx.iter().map(|&i| tr.events[i].activity.clone()).collect();
            let whole = brute_gamma_with(&t, &word, &|pos: &[usize]| satisfies(tr, &pos.iter().map(|&p| idx[p]).collect::<Vec<_>>(), c));
            for segs in &views {
                let (mut cov, mut cnt) = (0, 0);
                for s in segs.iter().filter(|s| s.trace == ti) {
                    let (a, b) = brute_gamma_with(&t, &s.labels, &|pos: &[usize]| satisfies(tr, &pos.iter().map(|&p| s.positions[p]).collect::<Vec<_>>(), c));
                    cov += a;
                    cnt += b;
                }
                prop_assert_eq!((cov, cnt), whole);
            }
        }
    }
}
