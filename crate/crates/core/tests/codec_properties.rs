use proptest::prelude::*;

use pulsom_core::codec::{decode_latency, encode_latency, psp_trace};

fn bounded() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..16).prop_flat_map(|dim| {
        (
            prop::collection::vec(-5.0f64..5.0, dim),
            prop::collection::vec(0.0f64..5.0, dim),
            prop::collection::vec(0.0f64..=1.0, dim),
        )
            .prop_map(|(lo, width, u)| {
                let hi: Vec<f64> = lo.iter().zip(&width).map(|(l, w)| l + w).collect();
                let x = lo
                    .iter()
                    .zip(&width)
                    .zip(&u)
                    .map(|((l, w), u)| l + w * u)
                    .collect();
                (x, lo, hi)
            })
    })
}

proptest! {
    #[test]
    fn spike_times_stay_in_horizon((x, lo, hi) in bounded(), t_max in 0.5f64..100.0) {
        let e = encode_latency(&x, &lo, &hi, t_max).unwrap();
        prop_assert!(e.spike_times.iter().all(|t| (0.0..=t_max).contains(t)));
    }

    #[test]
    fn larger_values_fire_earlier((x, lo, hi) in bounded(), t_max in 0.5f64..100.0) {
        let e = encode_latency(&x, &lo, &hi, t_max).unwrap();
        for i in 0..x.len() {
            for j in 0..x.len() {
                if lo[i] == lo[j] && hi[i] == hi[j] && hi[i] > lo[i] && x[i] > x[j] {
                    prop_assert!(e.spike_times[i] <= e.spike_times[j]);
                }
            }
        }
    }

    #[test]
    fn decode_inverts_encode((x, lo, hi) in bounded(), t_max in 0.5f64..100.0) {
        let e = encode_latency(&x, &lo, &hi, t_max).unwrap();
        let v = decode_latency(&e);
        for k in 0..x.len() {
            let expected = if hi[k] > lo[k] { (x[k] - lo[k]) / (hi[k] - lo[k]) } else { 0.5 };
            prop_assert!((v[k] - expected.clamp(0.0, 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn psp_is_causal_and_decaying(ts in 0.0f64..20.0, dt1 in 0.0f64..50.0, dt2 in 0.0f64..50.0, tau in 0.1f64..20.0) {
        prop_assert_eq!(psp_trace(ts, ts - 1e-6, tau), 0.0);
        let (a, b) = if dt1 <= dt2 { (dt1, dt2) } else { (dt2, dt1) };
        let (pa, pb) = (psp_trace(ts, ts + a, tau), psp_trace(ts, ts + b, tau));
        prop_assert!(pa <= 1.0 && pb <= pa && pb > 0.0);
    }
}
