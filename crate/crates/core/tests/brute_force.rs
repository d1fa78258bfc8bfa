//! The sweep implementations against naive window enumeration.
//!
//! The enumerators below recompute every admissible window regression
//! from scratch, with no scratch reuse and no shared state, so any
//! indexing or caching mistake in the sweeps shows up as a mismatch.

use bubbletest::{
    adf_t_stat, bsadf_sequence, generate, gsadf, sadf, simulate_null, AdfSpec, DgpKind, DgpSpec,
    Series,
};

fn brute_sadf(series: &Series<f64>, spec: AdfSpec, min_window: usize) -> f64 {
    let values = series.values();
    (min_window..=values.len())
        .map(|t2| adf_t_stat(&values[..t2], spec).unwrap().t_stat)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn brute_bsadf_at(series: &Series<f64>, spec: AdfSpec, min_window: usize, t2: usize) -> f64 {
    let values = series.values();
    (0..=(t2 - min_window))
        .map(|t1| adf_t_stat(&values[t1..t2], spec).unwrap().t_stat)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn brute_gsadf(series: &Series<f64>, spec: AdfSpec, min_window: usize) -> f64 {
    (min_window..=series.len())
        .map(|t2| brute_bsadf_at(series, spec, min_window, t2))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn sweeps_match_enumeration_on_seeded_null_paths() {
    let spec = AdfSpec::default();
    for seed in 0..12u64 {
        let length = 24 + (seed as usize * 7) % 37;
        let series: Series<f64> = simulate_null(length, seed).unwrap();

        let (s, _) = sadf(&series, spec, 12).unwrap();
        assert!((s - brute_sadf(&series, spec, 12)).abs() <= 1e-12, "seed {seed}");

        let (g, _) = gsadf(&series, spec, 12).unwrap();
        assert!((g - brute_gsadf(&series, spec, 12)).abs() <= 1e-12, "seed {seed}");

        let sequence = bsadf_sequence(&series, spec, 12).unwrap();
        assert_eq!(sequence.entries.len(), length - 12 + 1);
        for entry in &sequence.entries {
            let oracle = brute_bsadf_at(&series, spec, 12, entry.endpoint);
            assert!((entry.stat - oracle).abs() <= 1e-12, "seed {seed} t2 {}", entry.endpoint);
        }
    }
}

#[test]
fn sweeps_match_enumeration_with_lag_augmentation() {
    let spec = AdfSpec {
        lags: 1,
        ..AdfSpec::default()
    };
    let min_window = spec.min_window_len().max(10);
    for seed in 100..106u64 {
        let series: Series<f64> = simulate_null(45, seed).unwrap();
        let (s, _) = sadf(&series, spec, min_window).unwrap();
        assert!((s - brute_sadf(&series, spec, min_window)).abs() <= 1e-12);
        let (g, _) = gsadf(&series, spec, min_window).unwrap();
        assert!((g - brute_gsadf(&series, spec, min_window)).abs() <= 1e-12);
    }
}

#[test]
fn sweeps_match_enumeration_on_explosive_series() {
    let spec = AdfSpec::default();
    let dgp = DgpSpec {
        kind: DgpKind::ExplosiveAr { beta: 1.04 },
        length: 50,
        seed: 9,
        noise: true,
        start: "2000-01".parse().unwrap(),
    };
    let series: Series<f64> = generate(&dgp).unwrap();
    let (g, window) = gsadf(&series, spec, 12).unwrap();
    assert!((g - brute_gsadf(&series, spec, 12)).abs() <= 1e-12);
    let (t1, t2) = (window.start_obs(50), window.end_obs(50));
    assert!(t2 - t1 >= 12 && t2 <= 50);
}
