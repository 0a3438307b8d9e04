use graphdrift::forest::AdjacencyMatrix;
use graphdrift::transition::{
    build_stability_dataset, decode_bits, encode_bits, fold_transition, pairs, stability_indicator, Code,
    StabilityMode,
};
use proptest::prelude::*;

fn am_from_bits(v: usize, t: usize, bits: &[bool]) -> AdjacencyMatrix {
    let mut am = AdjacencyMatrix::empty(v, t);
    for (k, (i, j)) in pairs(v).into_iter().enumerate() {
        am.set(i, j, bits[k]);
    }
    am
}

#[test]
fn table_of_three_bit_histories() {
    let rows = [
        ([0, 0, 0], 0),
        ([1, 0, 0], 4),
        ([1, 1, 0], 6),
        ([1, 1, 1], 7),
        ([0, 1, 0], 2),
        ([0, 0, 1], 1),
        ([1, 0, 1], 5),
        ([0, 1, 1], 3),
    ];
    for (bits, w) in rows {
        let ams: Vec<_> = bits
            .iter()
            .enumerate()
            .map(|(k, &b)| am_from_bits(2, k + 1, &[b == 1]))
            .collect();
        let tms = fold_transition(&ams).unwrap();
        assert_eq!(tms.last().unwrap().value(0, 1).unwrap(), w);
    }
}

#[test]
fn decode_examples() {
    assert_eq!(decode_bits(7, 3).unwrap(), vec![true, true, true]);
    assert_eq!(decode_bits(0, 4).unwrap(), vec![false; 4]);
    assert_eq!(decode_bits(4, 3).unwrap(), vec![true, false, false]);
    assert!(decode_bits(8, 3).is_err());
}

#[test]
fn indicator_examples() {
    assert!(stability_indicator(0, 5).unwrap());
    assert!(stability_indicator(31, 5).unwrap());
    assert!(!stability_indicator(6, 3).unwrap());
}

#[test]
fn long_horizons_stay_bitwise() {
    let ams: Vec<_> = (1..=82).map(|t| am_from_bits(2, t, &[true])).collect();
    let tms = fold_transition(&ams).unwrap();
    let last = tms.last().unwrap();
    assert_eq!(last.horizon(), 82);
    assert!(last.code(0, 1).is_all_present());
    assert!(last.value(0, 1).is_err());
    let d = build_stability_dataset(&ams, StabilityMode::Cumulative).unwrap();
    assert_eq!(d.stability_fraction(82).unwrap(), 1.0);
}

#[test]
fn record_count_for_five_nodes() {
    let ams: Vec<_> = (1..=82).map(|t| AdjacencyMatrix::empty(5, t)).collect();
    let d = build_stability_dataset(&ams, StabilityMode::Cumulative).unwrap();
    assert_eq!(d.records.len(), 810);
    assert_eq!(d.pairs_per_transition(), 10);
}

#[test]
fn consecutive_codes_are_two_bits() {
    let ams = vec![
        am_from_bits(3, 1, &[true, false, true]),
        am_from_bits(3, 2, &[false, false, true]),
        am_from_bits(3, 3, &[true, false, true]),
    ];
    let d = build_stability_dataset(&ams, StabilityMode::Consecutive).unwrap();
    assert!(d.records.iter().all(|r| r.code.horizon() == 2));
    assert_eq!(d.stability_fraction(2).unwrap(), 2.0 / 3.0);
    assert_eq!(d.stability_fraction(3).unwrap(), 2.0 / 3.0);
    let cum = build_stability_dataset(&ams, StabilityMode::Cumulative).unwrap();
    assert_eq!(cum.stability_fraction(3).unwrap(), 2.0 / 3.0);
}

#[test]
fn csv_header_and_bit_strings() {
    let ams = vec![am_from_bits(2, 1, &[true]), am_from_bits(2, 2, &[false])];
    let d = build_stability_dataset(&ams, StabilityMode::Cumulative).unwrap();
    let mut buf = Vec::new();
    d.write_csv(&mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "pair_i,pair_j,t,w,y\n0,1,2,10,0\n"
    );
}

#[test]
fn roundtrip_exhaustive_to_eight() {
    for h in 1..=8usize {
        for w in 0..(1u64 << h) {
            let bits = decode_bits(w, h).unwrap();
            assert_eq!(encode_bits(&bits).unwrap(), w);
            assert_eq!(Code::from_bits(bits).value().unwrap(), w);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn roundtrip_to_sixteen(bits in prop::collection::vec(any::<bool>(), 1..=16)) {
        let ams: Vec<_> = bits.iter().enumerate().map(|(k, &b)| am_from_bits(2, k + 1, &[b])).collect();
        if ams.len() >= 2 {
            let tms = fold_transition(&ams).unwrap();
            let w = tms.last().unwrap().value(0, 1).unwrap();
            prop_assert_eq!(decode_bits(w, bits.len()).unwrap(), bits.clone());
            for k in 1..tms.len() {
                let prev = tms[k - 1].value(0, 1).unwrap();
                let cur = tms[k].value(0, 1).unwrap();
                prop_assert_eq!(cur, 2 * prev + u64::from(bits[k]));
            }
        }
    }

    #[test]
    fn cumulative_fraction_non_increasing(v in 2usize..=8, t in 2usize..=10, seed in any::<u64>()) {
        let mut state = seed | 1;
        let npairs = v * (v - 1) / 2;
        let ams: Vec<_> = (1..=t).map(|k| {
            let bits: Vec<bool> = (0..npairs).map(|_| {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                state % 3 != 0
            }).collect();
            am_from_bits(v, k, &bits)
        }).collect();
        let d = build_stability_dataset(&ams, StabilityMode::Cumulative).unwrap();
        let f = d.fractions();
        for w in f.windows(2) {
            prop_assert!(w[1].1 <= w[0].1);
        }
        for p in 0..npairs {
            let ys: Vec<bool> = d.records.iter().skip(p).step_by(npairs).map(|r| r.y).collect();
            for w in ys.windows(2) {
                prop_assert!(w[0] || !w[1]);
            }
        }
    }
}
