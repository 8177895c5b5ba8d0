use std::f64::consts::PI;

use super::EllipseSpec;

/// Perimeter of an ellipse with semi-axes `r1`, `r2`.
///
/// Uses the arithmetic-geometric mean form of the complete elliptic
/// integral of the second kind:
///
/// ```text
/// C = 2π / M(a, b) · (a² - Σ_{n≥0} 2^(n-1) c_n²),   c_0² = a² - b²,
/// c_{n+1} = (a_n - b_n) / 2
/// ```
pub fn ellipse_perimeter(r1: f64, r2: f64) -> f64 {
    let (mut a, mut b) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
    if b == 0.0 {
        return 4.0 * a;
    }
    let a0 = a;
    let mut sum = 0.5 * (a * a - b * b);
    let mut weight = 0.5;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        if c.abs() <= f64::EPSILON * a {
            break;
        }
        let next_a = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next_a;
        weight *= 2.0;
        sum += weight * c * c;
    }
    2.0 * PI / a * (a0 * a0 - sum)
}

/// Perimeter of the continuum ellipse `{½ (x-p)ᵀ A (x-p) = k}`.
pub fn circumference(spec: &EllipseSpec) -> f64 {
    let s = spec.spectrum();
    ellipse_perimeter(s.r1, s.r2)
}
