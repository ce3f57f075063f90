//! Property suites: aggregation conservation, serialization round trips,
//! solver invariants, regression orthogonality and equivariance, and the
//! randomness screen's calibration.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use iwa_core::diagnostics::{self, runs_test};
use iwa_core::ingest::{aggregate, AccidentRecord, Cause, CauseYearMatrix};
use iwa_core::linalg::Matrix;
use iwa_core::ols::{self, ModelSpec};
use iwa_core::spatiotemporal::{district_distribution, hourly_distribution};

const CAUSES: [Cause; 6] = [
    Cause::Collision,
    Cause::StormyWeather,
    Cause::ExcessiveCurrent,
    Cause::Grounding,
    Cause::Overloading,
    Cause::Other,
];

fn arb_record() -> impl Strategy<Value = AccidentRecord> {
    (
        2000u16..2016,
        prop::sample::select(vec!["dhaka", "khulna", "barishal", "chattogram"]),
        prop::option::of(0u8..24),
        0usize..6,
        prop::option::of(0u32..50),
    )
        .prop_map(|(year, district, hour, cause, casualties)| AccidentRecord {
            year,
            district: district.to_string(),
            hour,
            cause: CAUSES[cause],
            casualties,
        })
}

fn arb_records() -> impl Strategy<Value = Vec<AccidentRecord>> {
    prop::collection::vec(arb_record(), 1..80)
}

proptest! {
    #[test]
    fn aggregation_conserves_record_count(records in arb_records()) {
        let m = aggregate(&records, 2000, 2015).unwrap();
        let total: u64 = m.response().iter().map(|&v| v as u64).sum();
        prop_assert_eq!(total, records.len() as u64);
    }

    #[test]
    fn matrix_csv_round_trip(records in arb_records()) {
        let m = aggregate(&records, 2000, 2015).unwrap();
        let mut buf = Vec::new();
        m.to_csv(&mut buf).unwrap();
        let back = CauseYearMatrix::from_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(m, back);
    }

    #[test]
    fn adding_one_record_bumps_one_row(records in arb_records(), extra in arb_record()) {
        let before = aggregate(&records, 2000, 2015).unwrap();
        let mut more = records.clone();
        more.push(extra.clone());
        let after = aggregate(&more, 2000, 2015).unwrap();

        let i = before.year_index(extra.year).unwrap();
        for (row, (rb, ra)) in before.response().iter().zip(after.response()).enumerate() {
            if row == i {
                prop_assert_eq!(ra - rb, 1);
            } else {
                prop_assert_eq!(ra, rb);
            }
        }
        let mut predictor_bumps = 0u32;
        for label in before.labels() {
            let cb = before.predictor_column(label).unwrap();
            let ca = after.predictor_column(label).unwrap();
            for row in 0..cb.len() {
                let d = ca[row] - cb[row];
                prop_assert!(d <= 1);
                prop_assert!(d == 0 || row == i);
                predictor_bumps += d;
            }
        }
        prop_assert!(predictor_bumps <= 1);
    }

    #[test]
    fn histograms_conserve_and_merge(
        a in arb_records(),
        b in arb_records(),
        mut shuffled in arb_records()
    ) {
        let da = district_distribution(&a).unwrap();
        prop_assert_eq!(da.total, a.len() as u64);
        let ha = hourly_distribution(&a).unwrap();
        prop_assert_eq!(ha.total(), a.len() as u64);
        prop_assert_eq!(
            ha.unknown,
            a.iter().filter(|r| r.hour.is_none()).count() as u64
        );

        let mut both = a.clone();
        both.extend(b.clone());
        let db = district_distribution(&b).unwrap();
        let hb = hourly_distribution(&b).unwrap();
        prop_assert_eq!(da.merge(&db), district_distribution(&both).unwrap());
        prop_assert_eq!(ha.merge(&hb), hourly_distribution(&both).unwrap());

        // permutation invariance
        let before = district_distribution(&shuffled).unwrap();
        shuffled.reverse();
        prop_assert_eq!(before, district_distribution(&shuffled).unwrap());
    }
}

fn arb_dominant_system() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (2usize..7).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, n), n),
            prop::collection::vec(-10.0f64..10.0, n),
        )
            .prop_map(move |(mut rows, rhs)| {
                for (i, row) in rows.iter_mut().enumerate() {
                    row[i] += (n as f64) + 1.0;
                }
                (rows, rhs)
            })
    })
}

proptest! {
    #[test]
    fn solve_then_multiply((rows, rhs) in arb_dominant_system()) {
        let a = Matrix::from_rows(&rows).unwrap();
        let x = a.solve(&rhs).unwrap();
        let ax = a.mul_vec(&x).unwrap();
        let rhs_norm = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..rhs.len() {
            prop_assert!((ax[i] - rhs[i]).abs() <= 1e-8 * (1.0 + rhs_norm));
        }
    }

    #[test]
    fn solution_invariant_under_row_permutation(
        (rows, rhs) in arb_dominant_system(),
        seed in 0u64..1000
    ) {
        let n = rhs.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let permuted_rows: Vec<Vec<f64>> = order.iter().map(|&i| rows[i].clone()).collect();
        let permuted_rhs: Vec<f64> = order.iter().map(|&i| rhs[i]).collect();

        let x1 = Matrix::from_rows(&rows).unwrap().solve(&rhs).unwrap();
        let x2 = Matrix::from_rows(&permuted_rows).unwrap().solve(&permuted_rhs).unwrap();
        for i in 0..n {
            prop_assert!((x1[i] - x2[i]).abs() <= 1e-8 * (1.0 + x1[i].abs()));
        }
    }
}

fn arb_design() -> impl Strategy<Value = CauseYearMatrix> {
    (8usize..20, 1usize..4).prop_flat_map(|(n, k)| {
        (
            prop::collection::vec(prop::collection::vec(0u32..20, k), n),
            prop::collection::vec(0u32..100, n),
        )
            .prop_map(move |(counts, response)| {
                let labels: Vec<String> = (0..k).map(|j| format!("x{j}")).collect();
                let years: Vec<u16> = (0..n).map(|i| 2000 + i as u16).collect();
                CauseYearMatrix::from_design(labels, years, counts, response).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn residuals_orthogonal_to_design(m in arb_design()) {
        let spec = ModelSpec::new(m.labels().to_vec()).unwrap();
        let fit = match ols::fit::<f64>(&m, &spec, None) {
            Ok(f) => f,
            Err(_) => return Ok(()), // collinear draw
        };
        let max_y = m.response().iter().cloned().max().unwrap() as f64;
        let tol = 1e-6 * m.n() as f64 * (1.0 + max_y);
        let dot_intercept: f64 = fit.residuals.iter().sum();
        prop_assert!(dot_intercept.abs() < tol);
        for label in m.labels() {
            let col = m.predictor_column(label).unwrap();
            let dot: f64 = col
                .iter()
                .zip(&fit.residuals)
                .map(|(&x, &r)| x as f64 * r)
                .sum();
            prop_assert!(dot.abs() < tol, "column {} dot {}", label, dot);
        }
    }

    #[test]
    fn nested_specs_never_increase_sse(m in arb_design()) {
        let labels = m.labels().to_vec();
        for end in 1..labels.len() {
            let small = ModelSpec::new(labels[..end].to_vec()).unwrap();
            let big = ModelSpec::new(labels[..end + 1].to_vec()).unwrap();
            let (fs, fb) = match (
                ols::fit::<f64>(&m, &small, None),
                ols::fit::<f64>(&m, &big, None),
            ) {
                (Ok(a), Ok(b)) => (a, b),
                _ => return Ok(()),
            };
            prop_assert!(fb.sse <= fs.sse + 1e-6 * (1.0 + fs.sse));
            prop_assert!(fb.r2 + 1e-9 >= fs.r2);
        }
    }

    #[test]
    fn scale_equivariance(m in arb_design(), factor in 2u32..6) {
        let labels = m.labels().to_vec();
        let spec = ModelSpec::new(labels.clone()).unwrap();
        let base = match ols::fit::<f64>(&m, &spec, None) {
            Ok(f) => f,
            Err(_) => return Ok(()),
        };
        // rescale the first predictor column by `factor`
        let n = m.n();
        let counts: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                labels
                    .iter()
                    .enumerate()
                    .map(|(j, l)| {
                        let v = m.predictor_column(l).unwrap()[i];
                        if j == 0 { v * factor } else { v }
                    })
                    .collect()
            })
            .collect();
        let scaled = CauseYearMatrix::from_design(
            labels.clone(),
            m.years().to_vec(),
            counts,
            m.response().to_vec(),
        )
        .unwrap();
        let fit2 = match ols::fit::<f64>(&scaled, &spec, None) {
            Ok(f) => f,
            Err(_) => return Ok(()),
        };
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
        prop_assert!(rel(
            base.coefficients.slopes[&labels[0]],
            fit2.coefficients.slopes[&labels[0]] * factor as f64
        ));
        prop_assert!(rel(base.sse, fit2.sse));
        prop_assert!(rel(base.r2, fit2.r2));
        prop_assert!(rel(base.f_stat, fit2.f_stat));
        for (a, b) in base.fitted.iter().zip(&fit2.fitted) {
            prop_assert!(rel(*a, *b));
        }
    }
}

proptest! {
    #[test]
    fn pearson_affine_invariance_and_sign_flip(
        xs in prop::collection::vec(-50.0f64..50.0, 5..30),
        scale in 0.5f64..10.0,
        shift in -20.0f64..20.0,
    ) {
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, &x)| x * 0.7 + (i as f64 % 3.0)).collect();
        let (r, _) = match diagnostics::pearson(&xs, &ys) {
            Ok(v) => v,
            Err(_) => return Ok(()),
        };
        let rescaled: Vec<f64> = xs.iter().map(|&x| x * scale + shift).collect();
        let (r2, _) = diagnostics::pearson(&rescaled, &ys).unwrap();
        prop_assert!((r - r2).abs() < 1e-9);
        let negated: Vec<f64> = xs.iter().map(|&x| -x).collect();
        let (r3, _) = diagnostics::pearson(&negated, &ys).unwrap();
        prop_assert!((r + r3).abs() < 1e-9);
    }
}

#[test]
fn independent_predictors_have_unit_vif() {
    // n = 200 synthetic rows of independent draws: both VIFs near 1
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 200;
    let a: Vec<u32> = (0..n).map(|_| rng.gen_range(0..30)).collect();
    let b: Vec<u32> = (0..n).map(|_| rng.gen_range(0..30)).collect();
    let years: Vec<u16> = (0..n).map(|i| 1995 + i as u16).collect();
    let counts: Vec<Vec<u32>> = (0..n).map(|i| vec![a[i], b[i]]).collect();
    let response: Vec<u32> = (0..n).map(|i| a[i] + b[i] + 5).collect();
    let m = CauseYearMatrix::from_design(
        vec!["a".into(), "b".into()],
        years,
        counts,
        response,
    )
    .unwrap();
    let rep = diagnostics::vif::<f64>(&m, &["a".to_string(), "b".to_string()], 5.0).unwrap();
    for entry in &rep.entries {
        assert!((entry.vif - 1.0).abs() < 0.3, "{}: {}", entry.label, entry.vif);
        assert!(entry.vif >= 1.0 - 1e-9);
    }
}

#[test]
fn orthogonal_predictors_vif_at_most_one() {
    // centered-orthogonal integer columns
    let x1 = vec![1u32, 2, 3, 4, 5];
    let x2 = vec![4u32, 1, 3, 5, 2];
    let years: Vec<u16> = (0..5).map(|i| 2000 + i as u16).collect();
    let counts: Vec<Vec<u32>> = (0..5).map(|i| vec![x1[i], x2[i]]).collect();
    let m = CauseYearMatrix::from_design(
        vec!["x1".into(), "x2".into()],
        years,
        counts,
        vec![10, 11, 12, 13, 14],
    )
    .unwrap();
    let rep = diagnostics::vif::<f64>(&m, &["x1".to_string(), "x2".to_string()], 5.0).unwrap();
    for entry in &rep.entries {
        assert!(entry.vif <= 1.0 + 1e-9, "{}", entry.vif);
    }
}

#[test]
fn runs_screen_calibration() {
    // random sign sequences should pass the |z| < 2 screen about 95% of
    // the time
    let mut rng = ChaCha8Rng::seed_from_u64(20240817);
    let trials = 1000;
    let mut passes = 0;
    for _ in 0..trials {
        let residuals: Vec<f64> = (0..50)
            .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        if runs_test(&residuals).pass {
            passes += 1;
        }
    }
    let rate = passes as f64 / trials as f64;
    assert!((rate - 0.95).abs() <= 0.03, "pass rate {rate}");
}
