use proptest::prelude::*;

use pulsom_core::som::{
    find_bmu, linear_decay, neighborhood, quantization_error, som_update, squared_distance,
    train_som, Lattice, Schedule,
};

fn lattice_strategy() -> impl Strategy<Value = (Lattice, Vec<f64>)> {
    (1usize..6, 1usize..6, 1usize..5).prop_flat_map(|(rows, cols, dim)| {
        (
            prop::collection::vec(-10.0f64..10.0, rows * cols * dim),
            prop::collection::vec(-10.0f64..10.0, dim),
        )
            .prop_map(move |(w, x)| (Lattice::from_weights(rows, cols, dim, 0, w).unwrap(), x))
    })
}

fn scan(x: &[f64], l: &Lattice) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for u in 0..l.len() {
        let d: f64 = x
            .iter()
            .zip(l.weight(u))
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if d < best_d {
            best_d = d;
            best = u;
        }
    }
    best
}

proptest! {
    #[test]
    fn bmu_matches_exhaustive_scan((l, x) in lattice_strategy()) {
        let bmu = find_bmu(&x, &l).unwrap();
        prop_assert_eq!(bmu.flat, scan(&x, &l));
        prop_assert_eq!(bmu.row * l.cols() + bmu.col, bmu.flat);
    }

    #[test]
    fn zero_rate_is_identity((l, x) in lattice_strategy(), radius in 0.1f64..5.0) {
        let mut updated = l.clone();
        let bmu = find_bmu(&x, &l).unwrap();
        som_update(&x, &mut updated, bmu, 0.0, radius).unwrap();
        prop_assert_eq!(updated, l);
    }

    #[test]
    fn update_never_overshoots((l, x) in lattice_strategy(), lr in 0.0f64..=1.0, radius in 0.1f64..5.0) {
        let mut updated = l.clone();
        let bmu = find_bmu(&x, &l).unwrap();
        som_update(&x, &mut updated, bmu, lr, radius).unwrap();
        for u in 0..l.len() {
            for ((&w0, &w1), &xk) in l.weight(u).iter().zip(updated.weight(u)).zip(&x) {
                prop_assert!((w1 - xk).abs() <= (w0 - xk).abs() + 1e-12);
                prop_assert!(w1 >= w0.min(xk) - 1e-12 && w1 <= w0.max(xk) + 1e-12);
            }
        }
    }

    #[test]
    fn kernel_is_bounded_and_monotone(r in 0.1f64..10.0, d1 in 0.0f64..40.0, d2 in 0.0f64..40.0) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let (h_lo, h_hi) = (neighborhood(lo, r).unwrap(), neighborhood(hi, r).unwrap());
        prop_assert!((0.0..=1.0).contains(&h_lo));
        prop_assert!(h_hi <= h_lo);
        if hi > 3.0 * r {
            prop_assert_eq!(h_hi, 0.0);
        }
    }

    #[test]
    fn decay_hits_endpoints_and_is_monotone(epochs in 1usize..200, lr0 in 0.1f64..=1.0, r0 in 1.0f64..10.0) {
        let s = Schedule::new(epochs, lr0, lr0 / 10.0, r0, 1.0).unwrap();
        let (lr_first, r_first) = linear_decay(0, &s).unwrap();
        prop_assert_eq!((lr_first, r_first), (lr0, r0));
        if epochs > 1 {
            let (lr_last, r_last) = linear_decay(epochs - 1, &s).unwrap();
            prop_assert!((lr_last - lr0 / 10.0).abs() < 1e-12);
            prop_assert!((r_last - 1.0).abs() < 1e-12);
        }
        for t in 1..epochs {
            let (a, b) = (linear_decay(t - 1, &s).unwrap(), linear_decay(t, &s).unwrap());
            prop_assert!(b.0 <= a.0 && b.1 <= a.1);
        }
        prop_assert!(linear_decay(epochs, &s).is_err());
    }

    #[test]
    fn serialization_round_trips((l, _) in lattice_strategy()) {
        let mut buf = Vec::new();
        l.write_to(&mut buf).unwrap();
        prop_assert_eq!(Lattice::read_from(buf.as_slice()).unwrap(), l);
    }
}

#[test]
fn qe_of_data_on_the_lattice_is_zero() {
    let l = Lattice::from_weights(1, 3, 2, 0, vec![0.0, 0.0, 1.0, 1.0, 2.0, 0.5]).unwrap();
    let data = vec![vec![1.0, 1.0], vec![2.0, 0.5]];
    assert_eq!(quantization_error(&data, &l).unwrap(), 0.0);
    assert_eq!(
        quantization_error(&[vec![3.0, 4.0]], &l).unwrap(),
        squared_distance(&[3.0, 4.0], &[1.0, 1.0]).sqrt()
    );
}

#[test]
fn training_is_deterministic_and_reduces_error() {
    let data: Vec<Vec<f64>> = (0..60)
        .map(|i| {
            let c = (i % 3) as f64 * 4.0;
            vec![
                c + (i as f64 * 0.37).sin() * 0.3,
                c - (i as f64 * 0.11).cos() * 0.3,
            ]
        })
        .collect();
    let init = Lattice::init_from_data(4, 4, 9, &data).unwrap();
    let before = quantization_error(&data, &init).unwrap();
    let schedule = Schedule::for_lattice(&init);
    let (mut a, mut b) = (init.clone(), init);
    let log_a = train_som(&data, &mut a, &schedule, 9).unwrap();
    let log_b = train_som(&data, &mut b, &schedule, 9).unwrap();
    assert_eq!(a, b);
    assert_eq!(log_a, log_b);
    assert_eq!(log_a.epochs.len(), 80);
    assert!(log_a.final_qe().unwrap() < before);
}
