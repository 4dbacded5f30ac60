mod common;

use maskprompt::eval::{aggregate, dice};
use maskprompt::{BinaryMask, CaseScore};
use proptest::prelude::*;

fn pair(max: usize) -> impl Strategy<Value = (BinaryMask, BinaryMask)> {
    (1..=max, 1..=max).prop_flat_map(|(w, h)| {
        (
            prop::collection::vec(any::<bool>(), w * h),
            prop::collection::vec(any::<bool>(), w * h),
        )
            .prop_map(move |(a, b)| {
                (
                    BinaryMask::new(w, h, a).unwrap(),
                    BinaryMask::new(w, h, b).unwrap(),
                )
            })
    })
}

fn scores() -> impl Strategy<Value = Vec<CaseScore<f64>>> {
    prop::collection::vec((0usize..4, 0.0f64..=1.0), 1..30).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (d, dice))| CaseScore {
                case_id: format!("c{i}"),
                source_domain: "A".into(),
                target_domain: ["A", "B", "C", "D"][d].into(),
                dice,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn dice_symmetric_bounded_and_matches_oracle((a, b) in pair(16)) {
        let ab: f64 = dice(&a, &b).unwrap();
        prop_assert_eq!(ab, dice::<f64>(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ab, common::oracle_dice(&a, &b));
        prop_assert_eq!(ab == 1.0, a == b);
    }

    #[test]
    fn aggregate_permutation_invariant(s in scores(), seed in any::<u64>()) {
        let Ok(r) = aggregate(s.clone()) else {
            // only-source inputs have no rest domains
            prop_assert!(s.iter().all(|c| c.target_domain == "A"));
            return Ok(());
        };
        let mut shuffled = s.clone();
        let n = shuffled.len();
        let mut x = seed;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (x >> 33) as usize % (i + 1));
        }
        let r2 = aggregate(shuffled).unwrap();
        prop_assert_eq!(r.per_domain_mean(), r2.per_domain_mean());
        prop_assert_eq!(r.source_to_rest(), r2.source_to_rest());
        for (d, &m) in r.per_domain_mean() {
            let v: Vec<f64> = s.iter().filter(|c| &c.target_domain == d).map(|c| c.dice).collect();
            prop_assert!((m - v.iter().sum::<f64>() / v.len() as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn f32_and_f64_agree() {
    let a = BinaryMask::from_fn(9, 9, |x, y| x + y < 7);
    let b = BinaryMask::from_fn(9, 9, |x, y| x * y < 9);
    let d32: f32 = dice(&a, &b).unwrap();
    let d64: f64 = dice(&a, &b).unwrap();
    assert!((f64::from(d32) - d64).abs() < 1e-6);
}
