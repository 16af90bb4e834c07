use super::presets::Preset;
use super::*;
use crate::linalg::{Rank4Tensor, SymMatrix};
use crate::martingale::{matrix_integrand_tensor, sandwich_tensor};
use crate::sim::{IntensitySpec, MarkLaw};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| r.gen_range(-1.0..1.0))
}

fn random_positive(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| r.gen_range(0.2..1.5))
}

fn random_tensor(m: usize, n: usize, p: usize, q: usize, r: &mut ChaCha8Rng) -> Rank4Tensor {
    Rank4Tensor::from_fn(m, n, p, q, |_, _, _, _| r.gen_range(-1.0..1.0))
}

fn scalar_setup() -> (Rank4Tensor, Matrix, Matrix, Matrix) {
    (
        Rank4Tensor::slicewise_identity(1, 1),
        Matrix::filled(1, 1, 1.0),
        Matrix::filled(1, 1, 1.0),
        Matrix::filled(1, 1, 1.0),
    )
}

#[test]
fn jump_variance_rate_scalar_unit_case() {
    let (t, c, lam, ej2) = scalar_setup();
    let w = variance_rate_jump(&t, &c, &lam, &ej2).unwrap();
    assert_eq!(w, SymMatrix::from_diagonal(&[1.0, 1.0]));
}

#[test]
fn jump_variance_rate_vanishes_with_zero_c() {
    let mut r = rng(70);
    let t = random_tensor(3, 2, 2, 2, &mut r);
    let lam = random_positive(2, 2, &mut r);
    let ej2 = Matrix::filled(2, 2, 0.5);
    let w = variance_rate_jump(&t, &Matrix::zeros(2, 2), &lam, &ej2).unwrap();
    assert_eq!(w.frobenius_norm(), 0.0);
}

#[test]
fn jump_variance_rate_matches_quadruple_loop_oracle() {
    let mut r = rng(71);
    let (m, n, p, q) = (3, 2, 2, 3);
    let t = random_tensor(m, n, p, q, &mut r);
    let c = random_matrix(p, q, &mut r);
    let lam = random_positive(p, q, &mut r);
    let ej2 = random_positive(p, q, &mut r);
    let w = variance_rate_jump(&t, &c, &lam, &ej2).unwrap();

    // oracle: explicit sums over all indices
    for i in 0..m {
        for j in 0..m {
            let mut acc = 0.0;
            for a in 0..n {
                for k in 0..p {
                    for l in 0..q {
                        acc += t.get(i, a, k, l)
                            * t.get(j, a, k, l)
                            * ej2.get(k, l)
                            * c.get(k, l)
                            * c.get(k, l)
                            * lam.get(k, l);
                    }
                }
            }
            assert!((w.get(i, j) - acc).abs() <= 1e-12 * acc.abs().max(1.0));
        }
    }
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for a in 0..m {
                for k in 0..p {
                    for l in 0..q {
                        acc += t.get(a, i, k, l)
                            * t.get(a, j, k, l)
                            * ej2.get(k, l)
                            * c.get(k, l)
                            * c.get(k, l)
                            * lam.get(k, l);
                    }
                }
            }
            assert!((w.get(m + i, m + j) - acc).abs() <= 1e-12 * acc.abs().max(1.0));
        }
    }
    // off-diagonal blocks are exactly zero
    for i in 0..m {
        for j in 0..n {
            assert_eq!(w.get(i, m + j), 0.0);
        }
    }

    // dual route: slice-wise tensor composition then contraction
    let weight = ej2.hadamard(&c.hadamard_pow(2)).unwrap().hadamard(&lam).unwrap();
    let top = t.compose(&t.transpose()).unwrap().apply(&weight).unwrap();
    for i in 0..m {
        for j in 0..m {
            assert!((w.get(i, j) - top.get(i, j)).abs() <= 1e-12 * top.get(i, j).abs().max(1.0));
        }
    }
}

#[test]
fn jump_variance_rate_rejects_bad_inputs() {
    let (t, c, lam, ej2) = scalar_setup();
    assert!(matches!(
        variance_rate_jump(&t, &Matrix::zeros(2, 2), &lam, &ej2),
        Err(BoundsError::ShapeMismatch { .. })
    ));
    assert!(matches!(
        variance_rate_jump(&t, &c, &Matrix::filled(1, 1, -1.0), &ej2),
        Err(BoundsError::NegativeWeight { .. })
    ));
}

#[test]
fn brownian_variance_rate_is_jump_rate_with_unit_weights() {
    let mut r = rng(72);
    let t = random_tensor(3, 3, 3, 3, &mut r);
    let c = random_matrix(3, 3, &mut r);
    let ones = Matrix::filled(3, 3, 1.0);
    assert_eq!(
        variance_rate_brownian(&t, &c).unwrap(),
        variance_rate_jump(&t, &c, &ones, &ones).unwrap()
    );

    // slicewise identity with unit C: blocks q I and p I
    let id = Rank4Tensor::slicewise_identity(3, 3);
    let w = variance_rate_brownian(&id, &ones).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let expect = if i == j { 3.0 } else { 0.0 };
            assert_eq!(w.get(i, j), expect);
            assert_eq!(w.get(3 + i, 3 + j), expect);
        }
    }
}

fn jump_weight<'a>(
    intensity: &'a IntensitySpec,
    marks: &'a crate::sim::JumpMarkSpec,
) -> DriverWeight<'a> {
    DriverWeight::Jump {
        intensity: intensity.pieces(),
        marks,
    }
}

#[test]
fn integrated_variance_constant_coefficients_scale_linearly() {
    let mut r = rng(73);
    let t_value = random_tensor(2, 2, 2, 2, &mut r);
    let c_value = random_matrix(2, 2, &mut r);
    let horizon = 3.0;
    let tensor = crate::piecewise::PiecewiseProcess::constant(horizon, t_value.clone());
    let c = crate::piecewise::PiecewiseProcess::constant(horizon, c_value.clone());
    let v = integrated_variance(&tensor, &c, &DriverWeight::Brownian, 2.5).unwrap();
    let w = variance_rate_brownian(&t_value, &c_value).unwrap();
    let expected = w.scale(2.5);
    assert!(v.sub(&expected).unwrap().frobenius_norm() <= 1e-13 * expected.frobenius_norm());

    let zero = integrated_variance(&tensor, &c, &DriverWeight::Brownian, 0.0).unwrap();
    assert_eq!(zero.frobenius_norm(), 0.0);
    assert!(matches!(
        integrated_variance(&tensor, &c, &DriverWeight::Brownian, 3.5),
        Err(BoundsError::BeyondHorizon { .. })
    ));
}

#[test]
fn integrated_variance_refinement_is_exact() {
    let mut r = rng(74);
    let t1 = random_tensor(2, 2, 2, 2, &mut r);
    let t2 = random_tensor(2, 2, 2, 2, &mut r);
    let c_value = random_matrix(2, 2, &mut r);
    let coarse = crate::piecewise::PiecewiseProcess::new(
        vec![0.0, 1.0, 2.0],
        vec![t1.clone(), t2.clone()],
    )
    .unwrap();
    let fine = crate::piecewise::PiecewiseProcess::new(
        vec![0.0, 0.5, 1.0, 1.5, 2.0],
        vec![t1.clone(), t1, t2.clone(), t2],
    )
    .unwrap();
    let c = crate::piecewise::PiecewiseProcess::constant(2.0, c_value);
    let a = integrated_variance(&coarse, &c, &DriverWeight::Brownian, 2.0).unwrap();
    let b = integrated_variance(&fine, &c, &DriverWeight::Brownian, 2.0).unwrap();
    assert!(a.sub(&b).unwrap().frobenius_norm() <= 1e-14 * a.frobenius_norm().max(1.0));
}

#[test]
fn sigma_sq_reads_top_eigenvalue_and_block_norms() {
    assert_eq!(sigma_sq(&SymMatrix::from_diagonal(&[3.0, 1.0, 2.0])), 3.0);
    assert_eq!(sigma_sq(&SymMatrix::zeros(3)), 0.0);

    let mut r = rng(75);
    let top = random_matrix(3, 3, &mut r).gram_left();
    let bottom = random_matrix(2, 2, &mut r).gram_left();
    let v = SymMatrix::block_diagonal(&top, &bottom);
    let expected = top.operator_norm().max(bottom.operator_norm());
    assert!((sigma_sq(&v) - expected).abs() <= 1e-12 * expected.max(1.0));
}

#[test]
fn jump_bound_cases() {
    let horizon = 2.0;
    let tensor = crate::piecewise::PiecewiseProcess::constant(
        horizon,
        Rank4Tensor::slicewise_identity(1, 1),
    );
    let ones = crate::piecewise::PiecewiseProcess::constant(horizon, Matrix::filled(1, 1, 1.0));
    assert_eq!(jump_bound(&tensor, &ones, 1.0, horizon).unwrap(), 1.0);

    let zero_c = crate::piecewise::PiecewiseProcess::constant(horizon, Matrix::zeros(1, 1));
    assert_eq!(jump_bound(&tensor, &zero_c, 1.0, horizon).unwrap(), 0.0);

    let mut r = rng(76);
    let t1 = random_tensor(2, 3, 2, 2, &mut r);
    let t2 = random_tensor(2, 3, 2, 2, &mut r);
    let c1 = random_matrix(2, 2, &mut r);
    let c2 = random_matrix(2, 2, &mut r);
    let tensor = crate::piecewise::PiecewiseProcess::new(vec![0.0, 1.0, 2.0], vec![t1.clone(), t2.clone()])
        .unwrap();
    let c = crate::piecewise::PiecewiseProcess::new(vec![0.0, 1.0, 2.0], vec![c1.clone(), c2.clone()])
        .unwrap();
    let jmax = 0.8;
    let got = jump_bound(&tensor, &c, jmax, 2.0).unwrap();
    let piece1 = c1.max_abs_entry() * t1.max_slice_op_norm();
    let piece2 = c2.max_abs_entry() * t2.max_slice_op_norm();
    let expected = jmax * piece1.max(piece2);
    assert!((got - expected).abs() <= 1e-12 * expected.max(1.0));
}

#[test]
fn exp_remainder_values_and_quadratic_bound() {
    assert_eq!(exp_remainder(0.0), 0.0);
    assert!((exp_remainder(1.0) - (std::f64::consts::E - 2.0)).abs() < 1e-15);
    assert!(exp_remainder(-3.0) >= 0.0);
    for x in [0.5f64, 1.0, 2.0, 2.9] {
        let quad = x * x / (2.0 * (1.0 - x / 3.0));
        assert!(exp_remainder(x) <= quad, "x = {x}");
    }
}

#[test]
fn integrability_integral_scalar_unit_value() {
    let horizon = 1.0;
    let tensor = crate::piecewise::PiecewiseProcess::constant(
        horizon,
        Rank4Tensor::slicewise_identity(1, 1),
    );
    let c = crate::piecewise::PiecewiseProcess::constant(horizon, Matrix::filled(1, 1, 1.0));
    let intensity = IntensitySpec::constant(horizon, Matrix::filled(1, 1, 1.0)).unwrap();
    let marks = crate::sim::JumpMarkSpec::constant_one();
    let got = integrability_integral(&tensor, &c, &jump_weight(&intensity, &marks), 1.0, 3.0)
        .unwrap();
    let expected = 3.0f64.exp() - 4.0;
    assert!((got.get(0, 0) - expected).abs() <= 1e-12 * expected);
    assert!((got.get(1, 1) - expected).abs() <= 1e-12 * expected);

    // zero C contributes nothing even through the limiting coefficient
    let zero_c = crate::piecewise::PiecewiseProcess::constant(horizon, Matrix::zeros(1, 1));
    let z = integrability_integral(&tensor, &zero_c, &jump_weight(&intensity, &marks), 1.0, 3.0)
        .unwrap();
    assert_eq!(z.frobenius_norm(), 0.0);
}

#[test]
fn integrability_integral_matches_midpoint_quadrature() {
    let mut r = rng(77);
    let horizon = 2.0;
    let t1 = random_tensor(2, 2, 2, 2, &mut r);
    let t2 = random_tensor(2, 2, 2, 2, &mut r);
    let tensor =
        crate::piecewise::PiecewiseProcess::new(vec![0.0, 0.7, 2.0], vec![t1, t2]).unwrap();
    let c = crate::piecewise::PiecewiseProcess::constant(horizon, random_positive(2, 2, &mut r));
    let intensity =
        IntensitySpec::constant(horizon, random_positive(2, 2, &mut r)).unwrap();
    let marks = crate::sim::JumpMarkSpec::new(MarkLaw::Uniform { half_width: 0.9 }).unwrap();
    let weight = jump_weight(&intensity, &marks);
    let xi = 3.0;
    let exact = integrability_integral(&tensor, &c, &weight, horizon, xi).unwrap();

    // midpoint rule, exact for piecewise-constant integrands when the
    // sampling respects the breakpoints
    let mut quad = SymMatrix::zeros(4);
    let steps = 200usize;
    for segment in [(0.0, 0.7), (0.7, 2.0)] {
        let h = (segment.1 - segment.0) / steps as f64;
        for s in 0..steps {
            let mid = segment.0 + (s as f64 + 0.5) * h;
            let tv = tensor.value_at(mid).unwrap();
            let cv = c.value_at(mid).unwrap();
            let lam = intensity.pieces().value_at(mid).unwrap();
            let ej2 = marks.second_moment_matrix(2, 2);
            let w = variance_rate_jump(tv, cv, lam, &ej2).unwrap();
            let factor = marks.max_abs() * cv.max_abs_entry() * tv.max_slice_op_norm();
            quad.add_scaled_assign(&w, exp_remainder_factor(xi, factor) * h);
        }
    }
    assert!(exact.sub(&quad).unwrap().frobenius_norm() <= 1e-12 * exact.frobenius_norm());
}

#[test]
fn freedman_threshold_values() {
    let zero = BoundQuery {
        x: 1.0,
        v: 0.0,
        b: 0.0,
        dims: (2, 2),
    };
    assert_eq!(freedman_threshold(&zero), 0.0);

    let q = BoundQuery {
        x: 3.0,
        v: 5.0,
        b: 1.0,
        dims: (1, 1),
    };
    let l = 3.0 + 2.0f64.ln();
    let expected = (10.0 * l).sqrt() + l / 3.0;
    assert!((freedman_threshold(&q) - expected).abs() < 1e-14);

    let continuous = BoundQuery { b: 0.0, ..q };
    assert!((freedman_threshold(&continuous) - (10.0 * l).sqrt()).abs() < 1e-14);
}

#[test]
fn threshold_forms_and_caps() {
    let q = BoundQuery {
        x: 2.0,
        v: 4.0,
        b: 0.5,
        dims: (3, 2),
    };
    let folded = ThresholdForm::FreedmanFolded.threshold(&q);
    let bare = ThresholdForm::FreedmanBare.threshold(&q);
    assert!(folded > bare);
    assert!((bare - ((16.0f64).sqrt() + 0.5 * 2.0 / 3.0)).abs() < 1e-14);
    assert!((ThresholdForm::FreedmanFolded.cap(2.0, (3, 2)) - (-2.0f64).exp()).abs() < 1e-16);
    assert!(
        (ThresholdForm::FreedmanBare.cap(2.0, (3, 2)) - 5.0 * (-2.0f64).exp()).abs() < 1e-15
    );
    let g = BoundQuery { b: 0.0, ..q };
    let gaussian = ThresholdForm::GaussianFolded.threshold(&g);
    assert!((gaussian - (4.0 * (2.0 + 5.0f64.ln())).sqrt()).abs() < 1e-14);
}

#[test]
fn scaling_in_c_transforms_bounds_predictably() {
    let mut r = rng(78);
    let horizon = 1.5;
    let t_value = random_tensor(2, 3, 2, 2, &mut r);
    let c_value = random_matrix(2, 2, &mut r);
    let tensor = crate::piecewise::PiecewiseProcess::constant(horizon, t_value);
    let c = crate::piecewise::PiecewiseProcess::constant(horizon, c_value.clone());
    let c2 = crate::piecewise::PiecewiseProcess::constant(horizon, c_value.scale(2.0));

    let v1 = integrated_variance(&tensor, &c, &DriverWeight::Brownian, horizon).unwrap();
    let v2 = integrated_variance(&tensor, &c2, &DriverWeight::Brownian, horizon).unwrap();
    assert!(
        v2.sub(&v1.scale(4.0)).unwrap().frobenius_norm() <= 1e-12 * v2.frobenius_norm().max(1.0)
    );

    let b1 = jump_bound(&tensor, &c, 1.0, horizon).unwrap();
    let b2 = jump_bound(&tensor, &c2, 1.0, horizon).unwrap();
    assert!((b2 - 2.0 * b1).abs() <= 1e-12 * b2.max(1.0));

    let q1 = BoundQuery {
        x: 1.7,
        v: sigma_sq(&v1),
        b: b1,
        dims: (2, 3),
    };
    let q2 = BoundQuery {
        x: 1.7,
        v: sigma_sq(&v2),
        b: b2,
        dims: (2, 3),
    };
    let l = 1.7 + 5.0f64.ln();
    let sqrt1 = (2.0 * q1.v * l).sqrt();
    let sqrt2 = (2.0 * q2.v * l).sqrt();
    assert!((sqrt2 - 2.0 * sqrt1).abs() <= 1e-10 * sqrt2.max(1.0));
    assert!(
        (freedman_threshold(&q2) - (2.0 * sqrt1 + 2.0 * q1.b * l / 3.0)).abs()
            <= 1e-10 * freedman_threshold(&q2)
    );
}

#[test]
fn discrete_reduction_recovers_series_variance() {
    // piecewise-constant tensor over unit intervals with a Brownian driver:
    // the variance proxy at integer time equals the series variance of the
    // induced summand covariances
    let mut r = rng(79);
    let n_pieces = 4usize;
    let (m, n, p, q) = (2, 3, 2, 2);
    let pieces: Vec<Rank4Tensor> = (0..n_pieces)
        .map(|_| random_tensor(m, n, p, q, &mut r))
        .collect();
    let c_value = random_matrix(p, q, &mut r);
    let breaks: Vec<f64> = (0..=n_pieces).map(|k| k as f64).collect();
    let tensor = crate::piecewise::PiecewiseProcess::new(breaks, pieces.clone()).unwrap();
    let c = crate::piecewise::PiecewiseProcess::constant(n_pieces as f64, c_value.clone());

    let v = integrated_variance(&tensor, &c, &DriverWeight::Brownian, n_pieces as f64).unwrap();
    let direct = sigma_sq(&v);

    let pairs: Vec<(SymMatrix, SymMatrix)> = pieces
        .iter()
        .map(|t| {
            let w = variance_rate_brownian(t, &c_value).unwrap();
            (w.leading_block(m), w.trailing_block(m))
        })
        .collect();
    let series = tropp_variance(&pairs).unwrap();
    assert!((direct - series).abs() <= 1e-12 * direct.max(1.0));
}

#[test]
fn series_variance_orderings() {
    let mut r = rng(80);
    let single = vec![(
        random_matrix(3, 2, &mut r).gram_left(),
        random_matrix(3, 2, &mut r).gram_left(),
    )];
    assert_eq!(
        tropp_variance(&single).unwrap(),
        ahlswede_winter_variance(&single).unwrap()
    );

    for _ in 0..100 {
        let k = r.gen_range(2..6);
        let pairs: Vec<(SymMatrix, SymMatrix)> = (0..k)
            .map(|_| {
                let g = random_matrix(3, 2, &mut r);
                (g.gram_left(), g.gram_right())
            })
            .collect();
        let tropp = tropp_variance(&pairs).unwrap();
        let aw = ahlswede_winter_variance(&pairs).unwrap();
        assert!(aw >= tropp - 1e-12 * tropp.max(1.0));
    }
}

#[test]
fn sandwich_identity_factors_reduce_to_row_column_sums() {
    let mut r = rng(81);
    let (p, q) = (4, 3);
    let c = random_matrix(p, q, &mut r);
    let lam = random_positive(p, q, &mut r);
    let ones = Matrix::filled(p, q, 1.0);
    let w = variance_rate_sandwich(&Matrix::identity(p), &Matrix::identity(q), &c, &lam, &ones)
        .unwrap();
    // diagonal with row sums of C^2 (Hadamard) lambda on top, column sums
    // below; the top eigenvalue is the larger of the two max sums
    let g = c.hadamard_pow(2).hadamard(&lam).unwrap();
    for k in 0..p {
        let row_sum: f64 = (0..q).map(|l| g.get(k, l)).sum();
        assert!((w.get(k, k) - row_sum).abs() <= 1e-13 * row_sum.max(1.0));
    }
    for l in 0..q {
        let col_sum: f64 = (0..p).map(|k| g.get(k, l)).sum();
        assert!((w.get(p + l, p + l) - col_sum).abs() <= 1e-13 * col_sum.max(1.0));
    }
    let expected = g.max_row_lp_norm(1).unwrap().max(g.max_col_lp_norm(1).unwrap());
    assert!((sigma_sq(&w) - expected).abs() <= 1e-12 * expected.max(1.0));
}

#[test]
fn sandwich_matches_general_tensor_pipeline() {
    let mut r = rng(82);
    for _ in 0..100 {
        let (m, n, p, q) = (3, 2, 4, 2);
        let a = random_matrix(m, p, &mut r);
        let b = random_matrix(q, n, &mut r);
        let c = random_matrix(p, q, &mut r);
        let lam = random_positive(p, q, &mut r);
        let ej2 = random_positive(p, q, &mut r);

        let block_form = variance_rate_sandwich(&a, &b, &c, &lam, &ej2).unwrap();
        let tensor = Rank4Tensor::from_fn(m, n, p, q, |i, j, k, l| a.get(i, k) * b.get(l, j));
        let general = variance_rate_jump(&tensor, &c, &lam, &ej2).unwrap();
        let diff = block_form.sub(&general).unwrap().frobenius_norm();
        assert!(diff <= 1e-10 * general.frobenius_norm().max(1.0), "diff {diff}");

        let horizon = 1.0;
        let a_proc = crate::piecewise::PiecewiseProcess::constant(horizon, a);
        let b_proc = crate::piecewise::PiecewiseProcess::constant(horizon, b);
        let c_proc = crate::piecewise::PiecewiseProcess::constant(horizon, c);
        let jmax = 0.9;
        let specialized = jump_bound_sandwich(&a_proc, &b_proc, &c_proc, jmax, horizon).unwrap();
        let tensor_proc = sandwich_tensor(&a_proc, &b_proc).unwrap();
        let general_b = jump_bound(&tensor_proc, &c_proc, jmax, horizon).unwrap();
        assert!((specialized - general_b).abs() <= 1e-10 * general_b.max(1.0));
    }
}

#[test]
fn sandwich_zero_c_gives_zero() {
    let w = variance_rate_sandwich(
        &Matrix::identity(2),
        &Matrix::identity(2),
        &Matrix::zeros(2, 2),
        &Matrix::filled(2, 2, 1.0),
        &Matrix::filled(2, 2, 1.0),
    )
    .unwrap();
    assert_eq!(w.frobenius_norm(), 0.0);
}

#[test]
fn expected_norm_bound_values() {
    assert_eq!(expected_norm_bound(0.0, 0.0, 4, 4), 0.0);
    let sigma = 1.3;
    let got = expected_norm_bound(sigma, 0.0, 1, 1);
    assert!((got - sigma * (2.0 * 2.0f64.ln()).sqrt()).abs() < 1e-14);

    // square all-ones Gaussian setting: sigma^2 = n gives sqrt(2 n log 2n)
    let n = 20usize;
    let got = expected_norm_bound((n as f64).sqrt(), 0.0, n, n);
    assert!((got - (2.0 * n as f64 * (2.0 * n as f64).ln()).sqrt()).abs() < 1e-12);
}

#[test]
fn preset_static_gaussian_unit_variances() {
    let n = 20;
    let preset = Preset::StaticGaussian {
        c: Matrix::filled(n, n, 1.0),
    };
    let bound = preset.closed_form().unwrap();
    assert_eq!(bound.sigma_sq, n as f64);
    assert_eq!(bound.jump_bound, 0.0);
    // rectangular case picks the larger dimension
    let preset = Preset::StaticGaussian {
        c: Matrix::filled(3, 7, 1.0),
    };
    assert_eq!(preset.closed_form().unwrap().sigma_sq, 7.0);
}

#[test]
fn preset_static_poisson_values() {
    let preset = Preset::StaticPoisson {
        lam: Matrix::filled(5, 5, 2.0),
    };
    let bound = preset.closed_form().unwrap();
    assert_eq!(bound.sigma_sq, 10.0);
    let x = 4.0f64;
    let expected = (20.0 * x).sqrt() + x / 3.0;
    assert!((bound.threshold(x) - expected).abs() < 1e-13);
    assert!((bound.cap(x) - 10.0 * (-x).exp()).abs() < 1e-15);
}

#[test]
fn preset_scalar_point_process_integral() {
    let horizon = 2.0;
    let weights = crate::piecewise::PiecewiseProcess::constant(
        horizon,
        Matrix::from_rows(vec![vec![0.5, -0.8, 0.3]]).unwrap(),
    );
    let lam = Matrix::from_rows(vec![vec![1.0], vec![2.0], vec![0.5]]).unwrap();
    let intensity = IntensitySpec::constant(horizon, lam).unwrap();
    let preset = Preset::ScalarPointProcess { weights, intensity };
    let bound = preset.closed_form().unwrap();
    let expected = horizon * (0.25 * 1.0 + 0.64 * 2.0 + 0.09 * 0.5);
    assert!((bound.sigma_sq - expected).abs() <= 1e-13 * expected);
    assert_eq!(bound.threshold_b, 1.0);
    assert_eq!(bound.dims, (1, 1));

    let too_big = Preset::ScalarPointProcess {
        weights: crate::piecewise::PiecewiseProcess::constant(
            1.0,
            Matrix::from_rows(vec![vec![1.5]]).unwrap(),
        ),
        intensity: IntensitySpec::constant(1.0, Matrix::filled(1, 1, 1.0)).unwrap(),
    };
    assert!(matches!(
        too_big.closed_form(),
        Err(BoundsError::WeightBoundExceeded(_))
    ));
}

#[test]
fn preset_counting_matrix_closed_form() {
    let horizon = 1.0;
    let mut r = rng(83);
    let c_value = random_matrix(3, 4, &mut r);
    let lam = random_positive(3, 4, &mut r);
    let preset = Preset::CountingMatrix {
        c: crate::piecewise::PiecewiseProcess::constant(horizon, c_value.clone()),
        intensity: IntensitySpec::constant(horizon, lam.clone()).unwrap(),
    };
    let bound = preset.closed_form().unwrap();
    let g = c_value.hadamard_pow(2).hadamard(&lam).unwrap();
    let expected = g.max_row_lp_norm(1).unwrap().max(g.max_col_lp_norm(1).unwrap());
    assert!((bound.sigma_sq - expected).abs() <= 1e-13 * expected.max(1.0));
    assert_eq!(bound.jump_bound, c_value.max_abs_entry());
    assert_eq!(bound.form, ThresholdForm::FreedmanFolded);
}

#[test]
fn preset_counting_matrix_with_piecewise_modulation() {
    let mut r = rng(85);
    let c1 = random_matrix(2, 3, &mut r);
    let c2 = random_matrix(2, 3, &mut r);
    let lam = random_positive(2, 3, &mut r);
    let c = crate::piecewise::PiecewiseProcess::new(vec![0.0, 0.6, 2.0], vec![c1.clone(), c2.clone()])
        .unwrap();
    let preset = Preset::CountingMatrix {
        c: c.clone(),
        intensity: IntensitySpec::constant(2.0, lam.clone()).unwrap(),
    };
    let bound = preset.closed_form().unwrap();
    let integral = c1
        .hadamard_pow(2)
        .hadamard(&lam)
        .unwrap()
        .scale(0.6)
        .add(&c2.hadamard_pow(2).hadamard(&lam).unwrap().scale(1.4))
        .unwrap();
    let expected = integral
        .max_row_lp_norm(1)
        .unwrap()
        .max(integral.max_col_lp_norm(1).unwrap());
    assert!((bound.sigma_sq - expected).abs() <= 1e-12 * expected.max(1.0));
    assert_eq!(
        bound.jump_bound,
        c1.max_abs_entry().max(c2.max_abs_entry())
    );
}

#[test]
fn preset_scalar_point_process_with_piecewise_weights() {
    let w1 = Matrix::from_rows(vec![vec![0.4, -0.6]]).unwrap();
    let w2 = Matrix::from_rows(vec![vec![0.9, 0.1]]).unwrap();
    let weights =
        crate::piecewise::PiecewiseProcess::new(vec![0.0, 1.0, 3.0], vec![w1, w2]).unwrap();
    let lam = Matrix::from_rows(vec![vec![2.0], vec![1.0]]).unwrap();
    let preset = Preset::ScalarPointProcess {
        weights,
        intensity: IntensitySpec::constant(3.0, lam).unwrap(),
    };
    let bound = preset.closed_form().unwrap();
    let expected = 1.0 * (0.16 * 2.0 + 0.36 * 1.0) + 2.0 * (0.81 * 2.0 + 0.01 * 1.0);
    assert!((bound.sigma_sq - expected).abs() <= 1e-13 * expected);
    assert_eq!(bound.jump_bound, 0.9);
}

#[test]
fn preset_matrix_integrand_variance() {
    let mut r = rng(84);
    let pieces: Vec<Matrix> = (0..3).map(|_| random_matrix(2, 3, &mut r)).collect();
    let integrand =
        crate::piecewise::PiecewiseProcess::new(vec![0.0, 1.0, 2.0, 3.0], pieces.clone()).unwrap();
    let preset = Preset::TroppContinuous {
        integrand: integrand.clone(),
    };
    let bound = preset.closed_form().unwrap();

    let mut left = SymMatrix::zeros(2);
    let mut right = SymMatrix::zeros(3);
    for p in &pieces {
        left.add_scaled_assign(&p.gram_left(), 1.0);
        right.add_scaled_assign(&p.gram_right(), 1.0);
    }
    let expected = left.operator_norm().max(right.operator_norm());
    assert!((bound.sigma_sq - expected).abs() <= 1e-12 * expected.max(1.0));
    assert_eq!(bound.jump_bound, 0.0);

    // agrees with the general pipeline on the same scenario
    let tensor = matrix_integrand_tensor(&integrand);
    let c = crate::piecewise::PiecewiseProcess::constant(3.0, Matrix::filled(1, 1, 1.0));
    let v = integrated_variance(&tensor, &c, &DriverWeight::Brownian, 3.0).unwrap();
    assert!((bound.sigma_sq - sigma_sq(&v)).abs() <= 1e-10 * bound.sigma_sq.max(1.0));
}
