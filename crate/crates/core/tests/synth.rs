use proptest::prelude::*;
use trajclean::geo::segment_speed;
use trajclean::synth::{generate_dataset, generate_trajectory, SynthSpec};

fn spec(n: usize, rate: f64, seed: u64) -> SynthSpec {
    SynthSpec {
        n_points: n,
        outlier_rate: rate,
        seed,
        ..SynthSpec::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn label_count_matches_rate(n in 3usize..600, rate in 0.0f64..0.5, seed in any::<u64>()) {
        let s = spec(n, rate, seed);
        let (traj, labels) = generate_trajectory(&s).unwrap();
        prop_assert_eq!(traj.len(), n);
        prop_assert_eq!(labels.len(), s.outlier_count());
        prop_assert!(labels.iter().all(|i| i > 0 && i < n - 1));
    }

    /// With displacement >= 100 * speed * interval, every outlier breaks a
    /// 10x speed bound against its clean predecessor.
    #[test]
    fn displaced_points_violate_bound(seed in any::<u64>(), speed in 1.0f64..30.0, interval in 0.5f64..5.0) {
        let s = SynthSpec {
            n_points: 300,
            base_speed: speed,
            sample_interval: interval,
            outlier_displacement: 100.0 * speed * interval,
            seed,
            ..SynthSpec::default()
        };
        let (traj, labels) = generate_trajectory(&s).unwrap();
        let pts = traj.points();
        for i in labels.iter() {
            prop_assert!(!labels.contains(i - 1));
            let v = segment_speed(&pts[i - 1], &pts[i]).unwrap();
            prop_assert!(v > 10.0 * speed, "index {} speed {}", i, v);
        }
    }
}

#[test]
fn same_seed_same_dataset() {
    let s = spec(200, 0.05, 99);
    assert_eq!(generate_dataset(&s, 4).unwrap(), generate_dataset(&s, 4).unwrap());
    assert_ne!(generate_dataset(&s, 1).unwrap(), generate_dataset(&spec(200, 0.05, 100), 1).unwrap());
}

#[test]
fn clean_points_track_base_speed() {
    let s = SynthSpec {
        position_noise_sigma: 0.0,
        outlier_rate: 0.0,
        ..spec(100, 0.0, 1)
    };
    let (traj, labels) = generate_trajectory(&s).unwrap();
    assert!(labels.is_empty());
    for w in traj.points().windows(2) {
        assert!((segment_speed(&w[0], &w[1]).unwrap() - 10.0).abs() < 0.01);
    }
}

#[test]
fn polar_tracks_are_rejected() {
    let s = SynthSpec {
        n_points: 1_000_000,
        base_bearing: 0.0,
        ..SynthSpec::default()
    };
    assert!(generate_trajectory(&s).is_err());
}
