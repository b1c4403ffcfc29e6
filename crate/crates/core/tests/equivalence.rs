// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::{BTreeSet, HashMap};
use std::ops::ControlFlow;

use linchk::oracle::{brute_force_check, count_linearizations, for_each_linearization, OracleBudget};
use linchk::{History, Verdict};
use proptest::prelude::*;

/// Linear extensions of the real-time order, counted by plain recursion
/// over the remaining operations.
fn count_extensions(history: &History) -> u64 {
    let mut call = HashMap::new();
    let mut ret = HashMap::new();
    for (i, e) in history.events().iter().enumerate() {
        if e.is_call() {
            call.insert(e.id, i);
        } else {
            ret.insert(e.id, i);
        }
    }
    fn go(left: &BTreeSet<u64>, call: &HashMap<u64, usize>, ret: &HashMap<u64, usize>) -> u64 {
        if left.is_empty() {
            return 1;
        }
        left.iter()
            .filter(|&&a| !left.iter().any(|&b| ret[&b] < call[&a]))
            .map(|&a| {
                let mut rest = left.clone();
                rest.remove(&a);
                go(&rest, call, ret)
            })
            .sum()
    }
    go(&call.keys().copied().collect(), &call, &ret)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn enumeration_counts_linear_extensions(seed in any::<u64>()) {
        let h = common::small_history(seed, &common::SPECS[(seed % 3) as usize]);
        let n = count_linearizations(&h, &OracleBudget::default()).unwrap();
        prop_assert_eq!(n, count_extensions(&h));

        let ops = h.operations();
        let mut seen = BTreeSet::new();
        for_each_linearization(&h, &OracleBudget::default(), |order| {
            let ids: Vec<u64> = order.iter().map(|&i| ops[i].id).collect();
            assert!(seen.insert(ids));
            ControlFlow::Continue(())
        })
        .unwrap();
        prop_assert_eq!(seen.len() as u64, n);
    }

    #[test]
    fn checkers_agree_with_oracle(seed in any::<u64>(), spec_ix in 0usize..3) {
        let spec = common::SPECS[spec_ix];
        let h = common::small_history(seed, &spec);
        let expected = if brute_force_check(&h, &spec, &OracleBudget::default()).unwrap() {
            Verdict::Linearizable
        } else {
            Verdict::NotLinearizable
        };
        for (label, v) in common::all_verdicts(&h, &spec, &[1, 4, 64]) {
            prop_assert_eq!(v, expected, "{}", label);
        }
    }
}
