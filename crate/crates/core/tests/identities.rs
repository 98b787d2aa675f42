use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toda_core::diagnostics::{kelvin_transform, pohozaev_residual, sigma1_roots, two_point_defect};

#[test]
fn pohozaev_full_blow_up_and_swap() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let a: f64 = rng.gen_range(-0.9..0.95);
        let s = 2.0 * (1.0 - a);
        assert!(pohozaev_residual(s, s, a, a).residual.abs() <= 1e-12);
        let (a1, a2) = (rng.gen_range(-0.9..0.95), rng.gen_range(-0.9..0.95));
        let (s1, s2) = (rng.gen::<f64>() * 3.0, rng.gen::<f64>() * 3.0);
        assert_eq!(
            pohozaev_residual(s1, s2, a1, a2).residual,
            pohozaev_residual(s2, s1, a2, a1).residual
        );
    }
}

#[test]
fn half_blow_up_root() {
    for a1 in [-0.5, 0.0, 0.3, 0.8] {
        let roots = sigma1_roots(0.0, a1, 0.2);
        assert!(roots.iter().any(|r| (r - (1.0 - a1)).abs() < 1e-12), "{roots:?}");
    }
}

#[test]
fn kelvin_two_point_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..1000 {
        let x = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let y = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        assert!(two_point_defect(&x, &y) <= 1e-12);
    }
}

#[test]
fn kelvin_transform_is_an_involution() {
    let points: Vec<Vec<f64>> = (1..50).map(|k| vec![0.3 * k as f64, 1.0 / k as f64]).collect();
    let values: Vec<f64> = points.iter().map(|p| -0.4 * (p[0] * p[0] + p[1] * p[1]).ln()).collect();
    let w = vec![0.0; points.len()];
    let once = kelvin_transform(&points, &values, &w, 0.4).unwrap();
    let twice = kelvin_transform(&once.points, &once.values, &once.log_weight, 0.4).unwrap();
    for k in 0..points.len() {
        assert!((twice.values[k] - values[k]).abs() <= 1e-10);
        assert!((twice.points[k][0] - points[k][0]).abs() <= 1e-10 * points[k][0].abs().max(1.0));
    }
}
