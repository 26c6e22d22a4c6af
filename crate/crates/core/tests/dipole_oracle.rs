//! Dipole masses against a direct polar quadrature and frozen values.

use dmtrace::dipole::{dipole_mass, dipole_mass_polar, fit_log_bound, log_model};

const R1: [f64; 8] = [
    6.426744367589433,
    4.342678143003333,
    2.7204418417621867,
    1.6329976090844682,
    0.9526699394691088,
    0.5443935263129122,
    0.30622266943531806,
    0.1701238664911892,
];

const R4: [f64; 8] = [
    10.881767367048747,
    6.531990436337873,
    3.8106797578764353,
    2.1775741052516486,
    1.2248906777412722,
    0.6804954659647569,
    0.3742725858642219,
    0.20414869303931732,
];

#[test]
fn closed_form_matches_polar_quadrature() {
    for (k, r) in [(1, 1.0), (3, 1.0), (2, 4.0), (6, 4.0)] {
        let beta = 0.5f64.powi(k);
        let a = dipole_mass(beta, r).unwrap();
        let b = dipole_mass_polar(beta, r).unwrap();
        assert!((a - b).abs() <= 1e-8 * a, "k={k} R={r}: {a} vs {b}");
    }
}

#[test]
fn frozen_values() {
    for (k, (&v1, &v4)) in (1..=8).zip(R1.iter().zip(&R4)) {
        let beta = 0.5f64.powi(k);
        assert!((dipole_mass(beta, 1.0).unwrap() - v1).abs() <= 1e-10 * v1, "R=1 k={k}");
        let got = dipole_mass(beta, 4.0).unwrap();
        assert!((got - v4).abs() <= 1e-10 * v4, "R=4 k={k}: {got} vs {v4}");
    }
}

#[test]
fn log_bound_fit() {
    let fit = fit_log_bound(&(1..=8).collect::<Vec<_>>(), &[1.0, 4.0]).unwrap();
    assert_eq!(fit.samples.len(), 16);
    for &(k, r, v) in &fit.samples {
        assert!(v <= fit.c_bound * log_model(k, r) * (1.0 + 1e-12));
    }
    assert!(fit.c_fit <= fit.c_bound);
}
