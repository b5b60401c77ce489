mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64 as C;
use spfc_core::spectral::*;
use spfc_core::{Error, Field, Grid, SpectralField};

#[test]
fn forward_transform_matches_direct_sum() {
    let mut r = rng(1);
    for (n, l) in [(8, 1.0), (7, 3.0)] {
        let grid = Grid::new(2, n, l).unwrap();
        let f = random_field(&grid, &mut r, 1.0);
        let s = forward_transform(&f);
        for (k, c) in dense_coeffs(&f) {
            assert!((s.coeff(&k) - c).norm() < 1e-12, "mode {k:?}");
        }
    }
}

#[test]
fn constant_and_single_mode_coefficients() {
    let grid = Grid::new(2, 9, 2.0).unwrap();
    let s = forward_transform(&Field::constant(&grid, 1.0));
    assert!((s.coeff(&[0, 0]) - C::new(4.0, 0.0)).norm() < 1e-13);
    assert!(s.coeffs().iter().skip(1).all(|c| c.norm() < 1e-13));

    let f = sample(&grid, |x| (2.0 * PI * x[0] / 2.0).sin());
    let s = forward_transform(&f);
    let big: Vec<usize> = (0..grid.len())
        .filter(|&j| s.coeffs()[j].norm() > 1e-12)
        .collect();
    assert_eq!(big.len(), 2);
    assert!((s.coeff(&[1, 0]).norm() - s.coeff(&[-1, 0]).norm()).abs() < 1e-13);
}

#[test]
fn round_trip_and_rejection() {
    let mut r = rng(2);
    let grid = Grid::new(2, 16, 5.0).unwrap();
    let f = random_field(&grid, &mut r, 3.0);
    let back = inverse_transform(&forward_transform(&f)).unwrap();
    assert!(back.max_abs_diff(&f) <= 1e-12 * norm_inf(&f));

    assert_eq!(
        inverse_transform(&SpectralField::zeros(&grid))
            .unwrap()
            .values(),
        Field::zeros(&grid).values()
    );

    let mut s = SpectralField::zeros(&grid);
    s.set_coeff(&[1, 0], C::new(12.5, 0.0));
    s.set_coeff(&[-1, 0], C::new(12.5, 0.0));
    let cosine = inverse_transform(&s).unwrap();
    let expect = sample(&grid, |x| (2.0 * PI * x[0] / 5.0).cos());
    assert!(cosine.max_abs_diff(&expect) < 1e-14);

    s.set_coeff(&[-1, 0], C::new(0.0, 1.0));
    assert!(matches!(
        inverse_transform(&s),
        Err(Error::NotHermitian { .. })
    ));
}

#[test]
fn derivatives_match_dense_oracle() {
    let mut r = rng(3);
    for (dim, n) in [(2, 8), (2, 7), (3, 6)] {
        let grid = Grid::new(dim, n, 2.0).unwrap();
        let f = random_field(&grid, &mut r, 1.0);
        let g = grad(&f);
        for a in 0..dim {
            let want = dense_deriv(&f, a);
            assert!(max_diff(g.components()[a].values(), &want) < 1e-12 * max_abs(&want).max(1.0));
        }
        let want = dense_lap(&f);
        assert!(max_diff(laplacian(&f).values(), &want) < 1e-12 * max_abs(&want));

        // div against componentwise dense derivatives of an arbitrary vector field
        let comps: Vec<Field> = (0..dim).map(|_| random_field(&grid, &mut r, 1.0)).collect();
        let v = spfc_core::VectorField::new(comps.clone()).unwrap();
        let mut want = vec![0.0; grid.len()];
        for (a, c) in comps.iter().enumerate() {
            for (w, d) in want.iter_mut().zip(dense_deriv(c, a)) {
                *w += d;
            }
        }
        assert!(max_diff(div(&v).unwrap().values(), &want) < 1e-12 * max_abs(&want));
        assert!(
            div(&grad(&f)).unwrap().max_abs_diff(&laplacian(&f)) < 1e-12 * norm_inf(&laplacian(&f))
        );
    }
}

#[test]
fn div_rejects_mixed_grids() {
    let a = Grid::new(2, 8, 1.0).unwrap();
    let b = Grid::new(2, 8, 2.0).unwrap();
    let v = spfc_core::VectorField::new(vec![Field::zeros(&a), Field::zeros(&b)]);
    assert!(v.is_err());
}

#[test]
fn single_mode_identities() {
    let l = 3.0;
    let w = 2.0 * PI / l;
    let grid = Grid::new(2, 12, l).unwrap();
    let s = sample(&grid, |x| (w * x[0]).sin());
    let dx = grad(&s);
    let expect = sample(&grid, |x| w * (w * x[0]).cos());
    assert!(dx.components()[0].max_abs_diff(&expect) < 1e-13);
    assert!(norm_inf(&dx.components()[1]) < 1e-13);
    assert!(div(&dx).unwrap().max_abs_diff(&s.scaled(-w * w)) < 1e-12);

    let p = sample(&grid, |x| (w * x[0]).sin() * (w * x[1]).cos());
    assert!(laplacian(&p).max_abs_diff(&p.scaled(-2.0 * w * w)) < 1e-12);
    assert!(norm_inf(&laplacian(&Field::constant(&grid, 4.0))) < 1e-11);
    let g = grad(&Field::constant(&grid, 4.0));
    assert!(g.components().iter().all(|c| norm_inf(c) < 1e-12));

    let inv = neg_laplacian_pow(&s, -1.0).unwrap();
    assert!(inv.max_abs_diff(&s.scaled(1.0 / (w * w))) < 1e-14);
    let f = smooth_field(&grid, &mut rng(4), 1.0, 3);
    assert!(
        neg_laplacian_pow(&f, 1.0)
            .unwrap()
            .max_abs_diff(&laplacian(&f).scaled(-1.0))
            < 1e-12 * norm_inf(&laplacian(&f))
    );
}

#[test]
fn symbol_composition() {
    let mut r = rng(5);
    let grid = Grid::new(2, 16, 1.0).unwrap();
    let f = random_field(&grid, &mut r, 1.0);
    let bi = apply_symbol(&f, |w| w.lambda * w.lambda);
    let twice = laplacian(&laplacian(&f));
    assert!(bi.max_abs_diff(&twice) <= 1e-11 * norm_inf(&twice));
}

#[test]
fn fractional_semigroup() {
    let mut r = rng(6);
    let grid = Grid::new(2, 16, 1.0).unwrap();
    let f = random_field(&grid, &mut r, 1.0).mean_free();
    let half = neg_laplacian_pow(&neg_laplacian_pow(&f, -0.5).unwrap(), -0.5).unwrap();
    let full = neg_laplacian_pow(&f, -1.0).unwrap();
    assert!(half.max_abs_diff(&full) <= 1e-12 * norm_inf(&full));
    assert!(full.mean().abs() < 1e-16);
    assert!(matches!(
        neg_laplacian_pow(&Field::constant(&grid, 1.0), -1.0),
        Err(Error::MeanViolation { .. })
    ));
}

#[test]
fn norms() {
    let grid = Grid::new(2, 10, 1.0).unwrap();
    let one = Field::constant(&grid, 1.0);
    assert!((norm_l2(&one) - 1.0).abs() < 1e-14);
    for p in [1.0, 3.0, 4.0, f64::INFINITY] {
        assert!((norm_lp(&one, p) - 1.0).abs() < 1e-14);
    }
    let s = sample(&grid, |x| (2.0 * PI * x[0]).sin());
    assert!((norm_l2(&s).powi(2) - 0.5).abs() < 1e-14);
    assert!((norm_hm1(&s).unwrap() - norm_l2(&s) / (2.0 * PI)).abs() < 1e-14);
    assert!(norm_hm1(&one).is_err());

    let mut r = rng(7);
    let f = random_field(&grid, &mut r, 1.0);
    let g = random_field(&grid, &mut r, 1.0);
    assert_eq!(inner(&f, &g), inner(&g, &f));
    let h = f.axpy(2.0, &g);
    assert!((inner(&h, &g) - inner(&f, &g) - 2.0 * inner(&g, &g)).abs() < 1e-13);

    // Parseval against the dense coefficients.
    let parseval: f64 = dense_coeffs(&f)
        .iter()
        .map(|(_, c)| c.norm_sqr())
        .sum::<f64>()
        / grid.volume();
    assert!((parseval - norm_l2(&f).powi(2)).abs() < 1e-12 * parseval);
    let m = f.mean_free();
    assert!((norm_hm1(&m).unwrap().powi(2) - dense_hm1_sq(&m)).abs() < 1e-12 * dense_hm1_sq(&m));
}

#[test]
fn sampled_exact_solution() {
    let grid = Grid::new(2, 16, 1.0).unwrap();
    assert_eq!(
        sample(&grid, |_| 3.0).values(),
        Field::constant(&grid, 3.0).values()
    );
    let phi = sample(&grid, |x| {
        (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos() / (2.0 * PI)
    });
    assert!(norm_inf(&phi) <= 1.0 / (2.0 * PI));
    let s = forward_transform(&sample(&grid, |x| (2.0 * PI * x[0]).sin()));
    for (k, c) in modes(&grid).iter().zip(s.coeffs()) {
        if c.norm() > 1e-12 {
            assert!(k[0].abs() == 1 && k[1] == 0);
        }
    }
}

fn sbp_worst(grid: &Grid, pairs: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let f = random_field(grid, &mut r, 1.0);
        let g = random_field(grid, &mut r, 1.0);
        let gi = |a: &Field, b: &Field| -> f64 {
            grad(a)
                .components()
                .iter()
                .zip(grad(b).components())
                .map(|(x, y)| inner(x, y))
                .sum()
        };
        let lg = laplacian(&g);
        let llg = laplacian(&lg);
        let lllg = laplacian(&llg);
        let lf = laplacian(&f);
        let scale = norm_l2(&f) * norm_h2(&g);
        worst = worst.max((inner(&f, &lg) + gi(&f, &g)).abs() / scale);
        worst =
            worst.max((inner(&f, &llg) - inner(&lf, &lg)).abs() / (norm_l2(&f) * norm_l2(&llg)));
        worst = worst.max((inner(&f, &lllg) + gi(&lf, &lg)).abs() / (norm_l2(&f) * norm_l2(&lllg)));
    }
    worst
}

#[test]
fn summation_by_parts() {
    for (dim, n) in [(2, 16), (2, 32), (2, 15), (3, 16)] {
        let grid = Grid::new(dim, n, 1.0).unwrap();
        let worst = sbp_worst(&grid, 20, n as u64);
        assert!(worst < 1e-10, "{dim}D N={n}: {worst:e}");
    }
}

#[test]
fn interpolation_inequalities() {
    let mut r = rng(8);
    let grid = Grid::new(2, 16, 1.0).unwrap();
    for _ in 0..200 {
        let f = random_field(&grid, &mut r, 1.0).mean_free();
        assert!(spfc_core::harness::verify::interpolation_excess(&f) <= 1e-12);
    }
}

#[test]
fn embedding_ratio_is_stable_across_resolutions() {
    let f = |x: &[f64]| {
        (2.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).cos() + 0.3 * (6.0 * PI * (x[0] + x[1])).cos()
    };
    let ratios: Vec<f64> = [16, 32, 64, 128]
        .iter()
        .map(|&n| {
            let grid = Grid::new(2, n, 1.0).unwrap();
            let s = sample(&grid, f);
            let g = grad(&s);
            let mag: Vec<f64> = g.magnitude_squared().iter().map(|m| m.sqrt()).collect();
            norm_lp(&Field::new(&grid, mag).unwrap(), 6.0) / norm_l2(&laplacian(&s))
        })
        .collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 1.05, "{ratios:?}");
}

#[test]
fn resample_keeps_resolved_modes() {
    let coarse = Grid::new(2, 12, 2.0).unwrap();
    let fine = Grid::new(2, 30, 2.0).unwrap();
    let f = |x: &[f64]| (PI * x[0]).sin() + (3.0 * PI * x[1]).cos() * (2.0 * PI * x[0]).cos();
    let up = resample(&sample(&coarse, f), &fine).unwrap();
    assert!(up.max_abs_diff(&sample(&fine, f)) < 1e-13);
    assert!(resample(&up, &Grid::new(3, 12, 2.0).unwrap()).is_err());
}
