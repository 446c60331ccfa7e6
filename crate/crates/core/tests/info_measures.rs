use macfb_core::prob::entropy_of;
use macfb_core::{Alphabet, JointTable};
use proptest::prelude::*;

const NAMES: [&str; 4] = ["a", "b", "c", "d"];

/// Random joint tables over 1 to 4 variables with alphabets of size 1 to 3,
/// including exact zeros.
fn joint_table() -> impl Strategy<Value = JointTable> {
    prop::collection::vec(1usize..=3, 1..=4).prop_flat_map(|sizes| {
        let cells: usize = sizes.iter().product();
        let weights = prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.0f64..1.0], cells);
        (Just(sizes), weights).prop_filter_map("all-zero weights", |(sizes, w)| {
            let total: f64 = w.iter().sum();
            if total <= 0.0 {
                return None;
            }
            let vars = sizes
                .iter()
                .zip(NAMES)
                .map(|(&s, n)| Alphabet::new(n, s).unwrap())
                .collect();
            JointTable::new(vars, w.iter().map(|x| x / total).collect()).ok()
        })
    })
}

fn names(t: &JointTable) -> Vec<&str> {
    NAMES[..t.vars().len()].to_vec()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chain_rule(t in joint_table()) {
        let v = names(&t);
        // H(all) = sum_i H(X_i | X_1..X_{i-1})
        let mut acc = 0.0;
        for i in 0..v.len() {
            acc += t.entropy(&v[i..=i], &v[..i]).unwrap();
        }
        prop_assert!((acc - t.entropy(&v, &[]).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn measures_are_nonnegative_and_bounded(t in joint_table()) {
        let v = names(&t);
        for i in 0..v.len() {
            let rest: Vec<&str> = v.iter().copied().filter(|n| *n != v[i]).collect();
            let h = t.entropy(&v[i..=i], &[]).unwrap();
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (t.vars()[i].size as f64).log2() + 1e-10);
            prop_assert!(t.entropy(&v[i..=i], &rest).unwrap() >= 0.0);
            if let Some((b, given)) = rest.split_first() {
                prop_assert!(t.mutual_info(&v[i..=i], &[b], given).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn entropy_splits_into_conditional_entropy_and_information(t in joint_table()) {
        let v = names(&t);
        if v.len() >= 2 {
            let (a, b) = (&v[..1], &v[1..2]);
            let given = &v[2..];
            let ha = t.entropy(a, given).unwrap();
            let split = t.entropy(a, &[b, given].concat()).unwrap() + t.mutual_info(a, b, given).unwrap();
            prop_assert!((ha - split).abs() < 1e-10);
            // Symmetry of information.
            let ab = t.mutual_info(a, b, given).unwrap();
            let ba = t.mutual_info(b, a, given).unwrap();
            prop_assert!((ab - ba).abs() < 1e-10);
        }
    }

    #[test]
    fn marginalizing_twice_matches_once(t in joint_table()) {
        let v = names(&t);
        let once = t.marginalize(&v[..1]).unwrap();
        let twice = t.marginalize(&v[..v.len().min(2)]).unwrap().marginalize(&v[..1]).unwrap();
        for (x, y) in once.probs().iter().zip(twice.probs()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        let total: f64 = once.probs().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn binary_entropy_values() {
    assert!((entropy_of(&[0.2, 0.8]) - 0.7219280948873623).abs() < 1e-12);
    assert!((entropy_of(&[0.3, 0.7]) - 0.8812908992306927).abs() < 1e-12);
    assert_eq!(entropy_of(&[1.0, 0.0]), 0.0);

    // Y = X through BSC(0.2) with X uniform: I(X;Y) = 1 - h(0.2).
    let xy = JointTable::new(
        vec![Alphabet::new("x", 2).unwrap(), Alphabet::new("y", 2).unwrap()],
        vec![0.4, 0.1, 0.1, 0.4],
    )
    .unwrap();
    let i = xy.mutual_info(&["x"], &["y"], &[]).unwrap();
    assert!((i - 0.2780719051126377).abs() < 1e-12);
}
