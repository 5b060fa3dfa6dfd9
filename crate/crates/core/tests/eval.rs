use faithful::eval::{average_ranks, fidelity_vs_reference, runtime_bench, spearman_rho};
use proptest::prelude::*;

fn distinct(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(-1000i32..1000, n).prop_map(|s| {
        let mut v: Vec<f64> = s.into_iter().map(|i| i as f64 / 10.0).collect();
        // Shuffle deterministically so values are not sorted.
        let len = v.len();
        for i in 0..len {
            v.swap(i, (i * 7 + 3) % len);
        }
        v
    })
}

proptest! {
    #[test]
    fn rho_is_symmetric_and_bounded(
        a in prop::collection::vec(-5.0..5.0f64, 2..30),
        b_seed in prop::collection::vec(-5.0..5.0f64, 30),
    ) {
        let b = &b_seed[..a.len()];
        if let (Ok(x), Ok(y)) = (spearman_rho(&a, b), spearman_rho(b, &a)) {
            prop_assert!((x - y).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&x));
        }
    }

    #[test]
    fn rho_ignores_increasing_transforms(a in distinct(12), b in distinct(12)) {
        let r = spearman_rho(&a, &b).unwrap();
        let a3: Vec<f64> = a.iter().map(|v| v * v * v + 2.0).collect();
        let eb: Vec<f64> = b.iter().map(|v| (v / 50.0).exp()).collect();
        prop_assert!((spearman_rho(&a3, &eb).unwrap() - r).abs() < 1e-12);
        prop_assert_eq!(spearman_rho(&a, &a3).unwrap(), 1.0);
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        prop_assert!((spearman_rho(&a, &neg).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn ranks_sum_to_triangular_number(v in prop::collection::vec(-3i32..3, 1..40)) {
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let n = v.len() as f64;
        prop_assert!((average_ranks(&v).iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
    }
}

#[test]
fn fidelity_skips_constant_vectors() {
    let r = vec![vec![1.0, 2.0, 3.0], vec![5.0, 5.0, 5.0]];
    let m = vec![vec![1.0, 2.0, 4.0], vec![1.0, 2.0, 3.0]];
    let f = fidelity_vs_reference(&r, &m).unwrap();
    assert_eq!((f.mean_rho, f.instances, f.excluded), (1.0, 1, 1));
}

#[test]
fn bench_warms_up_once_then_repeats() {
    let mut calls = Vec::new();
    runtime_bench(&[10, 20, 30], 4, |i, _| {
        calls.push(i);
        Ok(())
    })
    .unwrap();
    assert_eq!(calls.len(), 1 + 4 * 3);
    assert_eq!(calls[..4], [0, 0, 1, 2]);
}
