use fracreg::charpoly::{
    eval_fracpoly, find_roots, find_roots_commensurate, find_roots_newton, Method, RootFindConfig,
};
use fracreg::model::FracPoly;
use fracreg::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Real-coefficient polynomial with random roots in `|s| <= 5`: conjugate
/// pairs and real roots, total degree 1..=6.
fn random_polynomial(seed: u64) -> (FracPoly, Vec<Complex64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degree = rng.gen_range(1..=6);
    let mut roots = Vec::new();
    while roots.len() < degree {
        let r = 5.0 * rng.gen::<f64>().sqrt();
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        if roots.len() + 2 <= degree && rng.gen_bool(0.6) {
            let z = Complex64::from_polar(r, theta);
            roots.push(z);
            roots.push(z.conj());
        } else {
            roots.push(Complex64::new(r * theta.cos(), 0.0));
        }
    }
    // expand prod (s - r_i), ascending coefficients
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for r in &roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * r;
        }
        coeffs = next;
    }
    let poly = FracPoly::new(coeffs.iter().enumerate().map(|(i, c)| (c.re, i as f64)));
    (poly, roots)
}

fn same_set(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| b.iter().any(|y| (x - y).norm() <= tol))
        && b.iter().all(|y| a.iter().any(|x| (x - y).norm() <= tol))
}

#[test]
fn newton_grid_matches_companion_on_integer_polynomials() {
    let cfg = RootFindConfig::default();
    let mut agree = 0;
    for seed in 0..100 {
        let (poly, _) = random_polynomial(seed);
        if poly.len() < 2 {
            continue;
        }
        let companion = find_roots_commensurate(&poly, &cfg)
            .unwrap()
            .expect("integer exponents");
        assert_eq!(companion.method, Method::Commensurate);
        let newton = find_roots_newton(&poly, &cfg).unwrap();
        let a: Vec<_> = companion.roots.iter().map(|r| r.value).collect();
        let b: Vec<_> = newton.roots.iter().map(|r| r.value).collect();
        assert!(same_set(&a, &b, 1e-6), "seed {seed}: {a:?} vs {b:?}");
        agree += 1;
    }
    assert_eq!(agree, 100);
}

#[test]
fn companion_recovers_generating_roots() {
    let cfg = RootFindConfig::default();
    for seed in 0..20 {
        let (poly, roots) = random_polynomial(seed);
        let report = find_roots(&poly, &cfg).unwrap();
        let found: Vec<_> = report.roots.iter().map(|r| r.value).collect();
        assert!(
            same_set(&found, &roots, 1e-6),
            "seed {seed}: {found:?} vs {roots:?}"
        );
    }
}

/// Local minima of `|f|` on a dense grid, kept when the value is small
/// compared to the neighbourhood scale.
fn scan_minima(poly: &FracPoly, half_width: f64, n: usize) -> Vec<Complex64> {
    let step = 2.0 * half_width / n as f64;
    let at = |i: usize, j: usize| {
        Complex64::new(
            -half_width + (i as f64 + 0.5) * step,
            -half_width + (j as f64 + 0.5) * step,
        )
    };
    let grid: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| eval_fracpoly(poly, at(i, j)).unwrap().norm())
                .collect()
        })
        .collect();
    let mut minima = Vec::new();
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let v = grid[i][j];
            let lowest = (i - 1..=i + 1)
                .flat_map(|a| (j - 1..=j + 1).map(move |b| (a, b)))
                .filter(|&(a, b)| (a, b) != (i, j))
                .all(|(a, b)| grid[a][b] > v);
            if lowest && v < 0.05 {
                minima.push(at(i, j));
            }
        }
    }
    minima
}

#[test]
fn open_loop_roots_match_dense_scan() {
    let poly = FracPoly::new([(0.8, 2.2), (0.5, 0.9), (1.0, 0.0)]);
    let report = find_roots(&poly, &RootFindConfig::default()).unwrap();
    let minima = scan_minima(&poly, 2.0, 400);
    let spacing = 4.0 / 400.0;
    assert!(!report.roots.is_empty());
    assert_eq!(
        report.roots.len(),
        minima.len(),
        "{:?} vs {minima:?}",
        report.roots
    );
    for r in &report.roots {
        assert!(
            minima.iter().any(|m| (m - r.value).norm() <= 2.0 * spacing),
            "{r:?}"
        );
    }
}
