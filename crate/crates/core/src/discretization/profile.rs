//! The radial profile u₀: −log|x| outside the unit ball, a polynomial in |x|² inside.

/// u₀ at radius r. Inside the unit ball this is the degree-5 Taylor polynomial of
/// −½ log s at s = 1 in s = r², so the seam at r = 1 is C⁵.
pub fn u0(r: f64) -> f64 {
    if r >= 1.0 {
        -r.ln()
    } else {
        let d = r * r - 1.0;
        // −½ Σ_{k=1}^{5} (−1)^{k+1} d^k / k, Horner form
        -0.5 * d * (1.0 + d * (-0.5 + d * (1.0 / 3.0 + d * (-0.25 + d * 0.2))))
    }
}

/// du₀/dr.
pub fn u0_prime(r: f64) -> f64 {
    if r >= 1.0 {
        -1.0 / r
    } else {
        let e = 1.0 - r * r;
        -r * (1.0 + e * (1.0 + e * (1.0 + e * (1.0 + e))))
    }
}

pub fn u0_at(x: &[f64]) -> f64 {
    u0(x.iter().map(|v| v * v).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_log_outside() {
        assert_eq!(u0(1.0), 0.0);
        assert!((u0(3.0) + 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn smooth_across_unit_sphere() {
        let h = 1e-4;
        let below = |k: f64| u0(1.0 - k * h);
        let above = |k: f64| u0(1.0 + k * h);
        assert!(below(0.0).abs() < 1e-15 && u0(1.0 - 1e-9).abs() < 1e-8);
        let d1l = (3.0 * below(0.0) - 4.0 * below(1.0) + below(2.0)) / (2.0 * h);
        let d1r = (-3.0 * above(0.0) + 4.0 * above(1.0) - above(2.0)) / (2.0 * h);
        assert!((d1l - d1r).abs() < 1e-6 && (d1l + 1.0).abs() < 1e-6);
        let d2l = (below(0.0) - 2.0 * below(1.0) + below(2.0)) / (h * h);
        let d2r = (above(0.0) - 2.0 * above(1.0) + above(2.0)) / (h * h);
        assert!((d2l - d2r).abs() < 1e-3 && (d2r - 1.0).abs() < 1e-3);
    }

    #[test]
    fn flat_at_origin_and_decreasing() {
        assert!(u0_prime(0.0).abs() < 1e-15);
        let mut prev = u0(0.0);
        for k in 1..=100 {
            let v = u0(k as f64 / 100.0);
            assert!(v < prev);
            prev = v;
        }
        for k in 1..100 {
            let r = k as f64 / 100.0;
            let fd = (u0(r + 1e-6) - u0(r - 1e-6)) / 2e-6;
            assert!((fd - u0_prime(r)).abs() < 1e-8);
        }
    }
}
