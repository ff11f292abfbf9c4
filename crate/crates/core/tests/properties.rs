//! Cross-module properties checked on randomized inputs.

use proptest::prelude::*;

use deltanas::encoding::{apply_diff, diff, diff_to_feature, encode_onehot};
use deltanas::hash::rng_from_words;
use deltanas::space::{
    Architecture, SearchSpaceSpec, edit_distance, neighbors_k, random_architecture,
};

/// A small spec plus a seed for drawing member architectures.
fn small_spec() -> impl Strategy<Value = SearchSpaceSpec> {
    (2usize..=5, 2usize..=4, prop::bool::ANY).prop_map(|(n, r, cell)| {
        if cell {
            SearchSpaceSpec::cell(n, r).unwrap()
        } else {
            SearchSpaceSpec::block(n, r).unwrap()
        }
    })
}

fn arch_of(spec: &SearchSpaceSpec, seed: u64) -> Architecture {
    random_architecture(spec, &mut rng_from_words(&[seed]))
}

proptest! {
    #[test]
    fn edit_distance_is_a_metric(spec in small_spec(), sa in 0u64..1000, sb in 0u64..1000, sc in 0u64..1000) {
        let a = arch_of(&spec, sa);
        let b = arch_of(&spec, sb);
        let c = arch_of(&spec, sc);
        let dab = edit_distance(&a, &b).unwrap();
        let dba = edit_distance(&b, &a).unwrap();
        prop_assert_eq!(dab, dba);
        prop_assert_eq!(edit_distance(&a, &a).unwrap(), 0);
        prop_assert_eq!(dab == 0, a == b);
        let dac = edit_distance(&a, &c).unwrap();
        let dcb = edit_distance(&c, &b).unwrap();
        prop_assert!(dab <= dac + dcb);
    }

    #[test]
    fn neighbor_relation_is_symmetric(spec in small_spec(), seed in 0u64..500, k in 1usize..=2) {
        let a = arch_of(&spec, seed);
        prop_assume!(k <= spec.num_positions());
        for b in neighbors_k(&spec, &a, k).unwrap() {
            let back = neighbors_k(&spec, &b, k).unwrap();
            prop_assert!(back.contains(&a));
        }
    }

    #[test]
    fn diff_apply_round_trips(spec in small_spec(), sa in 0u64..1000, sb in 0u64..1000) {
        let a = arch_of(&spec, sa);
        let b = arch_of(&spec, sb);
        let d = diff(&a, &b).unwrap();
        prop_assert_eq!(d.len(), edit_distance(&a, &b).unwrap());
        prop_assert_eq!(apply_diff(&a, &d).unwrap(), b.clone());
        prop_assert_eq!(apply_diff(&b, &d.reversed()).unwrap(), a);
    }

    #[test]
    fn feature_is_onehot_subtraction(spec in small_spec(), sa in 0u64..1000, sb in 0u64..1000) {
        let a = arch_of(&spec, sa);
        let b = arch_of(&spec, sb);
        let f = diff_to_feature(&spec, &diff(&a, &b).unwrap());
        let ea = encode_onehot(&spec, &a).unwrap();
        let eb = encode_onehot(&spec, &b).unwrap();
        for ((fv, av), bv) in f.values.iter().zip(&ea.values).zip(&eb.values) {
            prop_assert_eq!(*fv, bv - av);
        }
        // nonzero count: 2 per op edit, 1 per adjacency edit
        let d = diff(&a, &b).unwrap();
        let op_edits = d.edits().iter().filter(|e| !e.is_adj).count();
        let adj_edits = d.edits().len() - op_edits;
        let nonzeros = f.values.iter().filter(|v| **v != 0.0).count();
        prop_assert_eq!(nonzeros, 2 * op_edits + adj_edits);
    }

    #[test]
    fn key_parse_is_bijective(spec in small_spec(), seed in 0u64..1000) {
        let a = arch_of(&spec, seed);
        let key = a.key();
        let parsed = Architecture::from_key(&spec, key.as_str()).unwrap();
        prop_assert_eq!(parsed.key(), key);
        prop_assert_eq!(parsed, a);
    }

    #[test]
    fn tau_is_invariant_under_strictly_monotone_maps(
        xs in prop::collection::vec(-100i32..100, 5..40),
        ys in prop::collection::vec(-100i32..100, 5..40),
    ) {
        let n = xs.len().min(ys.len());
        let x: Vec<f64> = xs[..n].iter().map(|&v| v as f64).collect();
        let y: Vec<f64> = ys[..n].iter().map(|&v| v as f64).collect();
        let base = deltanas::predictor::kendall_tau(&x, &y);
        let x2: Vec<f64> = x.iter().map(|v| (v / 30.0).exp()).collect();
        let y2: Vec<f64> = y.iter().map(|v| 2.5 * v - 7.0).collect();
        let mapped = deltanas::predictor::kendall_tau(&x2, &y2);
        match (base, mapped) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-9),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }
}
