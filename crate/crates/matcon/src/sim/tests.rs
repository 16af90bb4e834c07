use super::*;
use crate::piecewise::PiecewiseProcess;

fn scalar_intensity(horizon: f64, rate: f64) -> IntensitySpec {
    IntensitySpec::constant(horizon, Matrix::filled(1, 1, rate)).unwrap()
}

#[test]
fn zero_intensity_produces_no_jumps() {
    let intensity = scalar_intensity(5.0, 0.0);
    let path = simulate_counting(
        &intensity,
        &JumpMarkSpec::constant_one(),
        &ReplicateStreams::new(1, 0),
    )
    .unwrap();
    assert_eq!(path.total_jumps(), 0);
}

#[test]
fn negative_intensity_rejected() {
    let err = IntensitySpec::constant(1.0, Matrix::filled(1, 1, -0.5));
    assert!(matches!(err, Err(SimError::NegativeIntensity { .. })));
}

#[test]
fn constant_rate_jump_counts_match_poisson_mean() {
    // rate 2 on [0, 5]: mean count 10, SE of the Monte Carlo mean is
    // sqrt(10 / reps)
    let intensity = scalar_intensity(5.0, 2.0);
    let marks = JumpMarkSpec::constant_one();
    let reps = 100_000u64;
    let mut total = 0usize;
    let mut total_sq = 0.0f64;
    for rep in 0..reps {
        let path =
            simulate_counting(&intensity, &marks, &ReplicateStreams::new(2024, rep)).unwrap();
        let n = path.total_jumps();
        total += n;
        total_sq += (n * n) as f64;
    }
    let mean = total as f64 / reps as f64;
    let se = (10.0f64 / reps as f64).sqrt();
    assert!((mean - 10.0).abs() <= 3.0 * se, "mean {mean}");
    // Poisson variance matches the mean at Monte Carlo precision
    let var = total_sq / reps as f64 - mean * mean;
    assert!((var - 10.0).abs() <= 0.5, "var {var}");
}

#[test]
fn two_piece_rate_integrates_across_the_breakpoint() {
    let pieces = PiecewiseProcess::new(
        vec![0.0, 1.0, 2.0],
        vec![Matrix::filled(1, 1, 1.0), Matrix::filled(1, 1, 3.0)],
    )
    .unwrap();
    let intensity = IntensitySpec::new(pieces).unwrap();
    let marks = JumpMarkSpec::constant_one();
    let reps = 40_000u64;
    let mut total = 0usize;
    for rep in 0..reps {
        let path = simulate_counting(&intensity, &marks, &ReplicateStreams::new(7, rep)).unwrap();
        total += path.total_jumps();
    }
    let mean = total as f64 / reps as f64;
    let se = (4.0f64 / reps as f64).sqrt();
    assert!((mean - 4.0).abs() <= 3.0 * se, "mean {mean}");
}

#[test]
fn compensator_values_are_exact_piecewise_integrals() {
    let intensity = scalar_intensity(5.0, 2.0);
    let values = compensator_path(&intensity, &[0.0, 5.0]).unwrap();
    assert_eq!(values[1].get(0, 0), 10.0);

    let zero = scalar_intensity(5.0, 0.0);
    assert_eq!(compensator_path(&zero, &[5.0]).unwrap()[0].get(0, 0), 0.0);

    let pieces = PiecewiseProcess::new(
        vec![0.0, 1.0, 2.0],
        vec![Matrix::filled(1, 1, 1.0), Matrix::filled(1, 1, 3.0)],
    )
    .unwrap();
    let two_piece = IntensitySpec::new(pieces).unwrap();
    assert_eq!(
        compensator_path(&two_piece, &[2.0]).unwrap()[0].get(0, 0),
        4.0
    );
    assert!(matches!(
        compensator_path(&two_piece, &[3.0]),
        Err(SimError::GridOutsideHorizon { .. })
    ));
}

#[test]
fn constant_one_marks_reproduce_counting_minus_compensator() {
    let intensity = scalar_intensity(4.0, 1.5);
    let marks = JumpMarkSpec::constant_one();
    let streams = ReplicateStreams::new(5, 3);
    let path = simulate_counting(&intensity, &marks, &streams).unwrap();
    let stream = martingale_jump_stream(&path, &marks, &intensity);
    let t = 3.0;
    let m = stream.martingale_at(t).unwrap();
    let expected = path.counts_at(t).get(0, 0) - 1.5 * t;
    assert!((m.get(0, 0) - expected).abs() < 1e-12);
}

#[test]
fn symmetric_marks_have_zero_drift() {
    let intensity = scalar_intensity(1.0, 2.0);
    let marks = JumpMarkSpec::new(MarkLaw::Uniform { half_width: 1.0 }).unwrap();
    let path = simulate_counting(&intensity, &marks, &ReplicateStreams::new(9, 0)).unwrap();
    let stream = martingale_jump_stream(&path, &marks, &intensity);
    assert_eq!(stream.drift_rate.values()[0].get(0, 0), 0.0);
}

#[test]
fn compensated_martingale_has_zero_mean() {
    // lambda = 3, t = 1, uniform(-1, 1) marks: Var M_1 = 3 * E J^2 = 1
    let intensity = scalar_intensity(1.0, 3.0);
    let marks = JumpMarkSpec::new(MarkLaw::Uniform { half_width: 1.0 }).unwrap();
    let reps = 10_000u64;
    let mut sum = 0.0;
    for rep in 0..reps {
        let path = simulate_counting(&intensity, &marks, &ReplicateStreams::new(11, rep)).unwrap();
        let stream = martingale_jump_stream(&path, &marks, &intensity);
        sum += stream.martingale_at(1.0).unwrap().get(0, 0);
    }
    let mean = sum / reps as f64;
    let se = (1.0f64 / reps as f64).sqrt();
    assert!(mean.abs() <= 3.0 * se, "mean {mean}");
}

#[test]
fn jump_times_are_pairwise_distinct_across_entries() {
    let intensity = IntensitySpec::constant(2.0, Matrix::filled(3, 3, 4.0)).unwrap();
    let marks = JumpMarkSpec::constant_one();
    for rep in 0..200 {
        let path = simulate_counting(&intensity, &marks, &ReplicateStreams::new(13, rep)).unwrap();
        let mut all: Vec<f64> = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                let entry = path.entry_jumps(i, j);
                for w in entry.windows(2) {
                    assert!(w[0].0 < w[1].0, "per-entry times must increase");
                }
                all.extend(entry.iter().map(|(t, _)| *t));
            }
        }
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in all.windows(2) {
            assert!(w[0] < w[1], "tie at {}", w[0]);
        }
    }
}

#[test]
fn mark_law_moments_match_sampling() {
    let laws = [
        JumpMarkSpec::constant_one(),
        JumpMarkSpec::new(MarkLaw::Uniform { half_width: 0.8 }).unwrap(),
        JumpMarkSpec::new(MarkLaw::Rademacher { scale: 0.5 }).unwrap(),
        JumpMarkSpec::new(MarkLaw::TwoPoint {
            magnitude: 0.7,
            prob_positive: 0.3,
        })
        .unwrap(),
    ];
    for (li, law) in laws.iter().enumerate() {
        let mut rng = crate::rng::substream(99, &[li as u64]);
        let reps = 200_000;
        let (mut m1, mut m2, mut m3) = (0.0, 0.0, 0.0);
        for _ in 0..reps {
            let v = law.sample(&mut rng);
            assert!(v.abs() <= law.max_abs() + 1e-15);
            m1 += v;
            m2 += v * v;
            m3 += v * v * v;
        }
        let n = reps as f64;
        let tol = 4.0 * law.max_abs().powi(3).max(law.max_abs()) / n.sqrt();
        assert!((m1 / n - law.moment(1)).abs() <= tol, "law {li} mean");
        assert!((m2 / n - law.moment(2)).abs() <= tol, "law {li} second");
        assert!((m3 / n - law.moment(3)).abs() <= tol, "law {li} third");
    }
}

#[test]
fn brownian_increment_variance_matches_cell_length() {
    let reps = 100_000u64;
    let mut sum_sq = 0.0;
    for rep in 0..reps {
        let path = simulate_brownian((1, 1), &[0.0, 1.0], &ReplicateStreams::new(17, rep)).unwrap();
        let v = path.increments()[0].get(0, 0);
        sum_sq += v * v;
    }
    let var = sum_sq / reps as f64;
    // Var of a squared standard normal is 2, so SE = sqrt(2 / reps)
    let se = (2.0f64 / reps as f64).sqrt();
    assert!((var - 1.0).abs() <= 3.0 * se, "var {var}");
}

#[test]
fn brownian_sum_of_increments_has_variance_t() {
    let grid: Vec<f64> = (0..=8).map(|i| i as f64 / 4.0).collect();
    let reps = 50_000u64;
    let mut sum_sq = 0.0;
    for rep in 0..reps {
        let path = simulate_brownian((1, 1), &grid, &ReplicateStreams::new(19, rep)).unwrap();
        let total = path.value_at_index(8).get(0, 0);
        sum_sq += total * total;
    }
    let var = sum_sq / reps as f64;
    let se = 2.0 * (2.0f64 / reps as f64).sqrt();
    assert!((var - 2.0).abs() <= 3.0 * se, "var {var}");
}

#[test]
fn brownian_quadratic_variation_refines_to_time() {
    let cells = 1usize << 10;
    let grid: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
    let reps = 200u64;
    let mut qv_sum = 0.0;
    for rep in 0..reps {
        let path = simulate_brownian((1, 1), &grid, &ReplicateStreams::new(23, rep)).unwrap();
        qv_sum += path
            .increments()
            .iter()
            .map(|m| m.get(0, 0) * m.get(0, 0))
            .sum::<f64>();
    }
    let qv = qv_sum / reps as f64;
    assert!((qv - 1.0).abs() <= 0.05, "qv {qv}");
}

#[test]
fn empty_grid_yields_empty_path() {
    let path = simulate_brownian((2, 2), &[0.0], &ReplicateStreams::new(1, 0)).unwrap();
    assert!(path.increments().is_empty());
    let path = simulate_brownian((2, 2), &[], &ReplicateStreams::new(1, 0)).unwrap();
    assert!(path.increments().is_empty());
    assert!(matches!(
        simulate_brownian((1, 1), &[0.5, 1.0], &ReplicateStreams::new(1, 0)),
        Err(SimError::BadGrid)
    ));
}

#[test]
fn paths_are_bit_reproducible() {
    let intensity = IntensitySpec::constant(3.0, Matrix::filled(2, 2, 1.0)).unwrap();
    let marks = JumpMarkSpec::new(MarkLaw::Uniform { half_width: 0.5 }).unwrap();
    let a = simulate_counting(&intensity, &marks, &ReplicateStreams::new(31, 6)).unwrap();
    let b = simulate_counting(&intensity, &marks, &ReplicateStreams::new(31, 6)).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(a.entry_jumps(i, j), b.entry_jumps(i, j));
        }
    }
    let g = &[0.0, 0.5, 1.0];
    let x = simulate_brownian((2, 2), g, &ReplicateStreams::new(31, 6)).unwrap();
    let y = simulate_brownian((2, 2), g, &ReplicateStreams::new(31, 6)).unwrap();
    assert_eq!(x.increments()[1], y.increments()[1]);
}
