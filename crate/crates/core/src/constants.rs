//! Closed-form constants of the convergence bounds.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::geometry::spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `λ₁ < 1/√2`: the profile maximum sits at `±x₂`.
    Lambda1Small,
    /// `λ₁ ≥ 1/√2`: the profile maximum sits at `x = 0`.
    Lambda1Large,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsBundle {
    pub lambda1: f64,
    pub lambda2: f64,
    pub g: f64,
    pub h_squared: f64,
    /// Replaces `h²` for ellipses centred away from the origin.
    pub h_offcenter_squared: f64,
    pub branch: Branch,
    /// Whether `0 < λ₁ ≤ 1 < λ₂`; the constants are computed regardless.
    pub eligible: bool,
}

pub fn branch(lambda1: f64) -> Branch {
    if lambda1 < FRAC_1_SQRT_2 {
        Branch::Lambda1Small
    } else {
        Branch::Lambda1Large
    }
}

pub fn h_squared(l1: f64, l2: f64) -> f64 {
    match branch(l1) {
        Branch::Lambda1Small => {
            let d = 1.0 + 2.0 * l1 * l2;
            ((l1 + l2) / (l1 * l2 * d)).sqrt() + 2.0 * (l1 * l2 * (l1 + l2) / d).sqrt()
        }
        Branch::Lambda1Large => 1.0 / l2.sqrt() + (2.0 * l2).sqrt(),
    }
}

/// The constant of the convergence rate, in its own closed form.
pub fn g(l1: f64, l2: f64) -> f64 {
    let s = l1.sqrt() + l2.sqrt();
    match branch(l1) {
        Branch::Lambda1Small => {
            let d = 1.0 + 2.0 * l1 * l2;
            (l1 + l2).sqrt() * s * ((1.0 / (l1 * l2 * d)).sqrt() + 2.0 * (l1 * l2 / d).sqrt())
        }
        Branch::Lambda1Large => s * (1.0 / l2.sqrt() + (2.0 * l2).sqrt()),
    }
}

pub fn h_offcenter_squared(l1: f64, l2: f64) -> f64 {
    (2.0 * l2).sqrt() + (1.0 + l2) / l1.sqrt()
}

pub fn constants_from_eigenvalues(lambda1: f64, lambda2: f64) -> ConstantsBundle {
    ConstantsBundle {
        lambda1,
        lambda2,
        g: g(lambda1, lambda2),
        h_squared: h_squared(lambda1, lambda2),
        h_offcenter_squared: h_offcenter_squared(lambda1, lambda2),
        branch: branch(lambda1),
        eligible: 0.0 < lambda1 && lambda1 <= 1.0 && 1.0 < lambda2,
    }
}

pub fn constants(a: [[f64; 2]; 2]) -> ConstantsBundle {
    let s = spectrum(a, 1.0);
    constants_from_eigenvalues(s.lambda1, s.lambda2)
}

/// `M(x) = √((2k/λ₂ + x²(1 − λ₁/λ₂))/2) + √(2kλ₂ − λ₁(λ₂ − λ₁)x²)` on
/// `|x| ≤ √(2k/λ₁)`.
pub fn m_profile(l1: f64, l2: f64, k: f64, x: f64) -> f64 {
    let first = ((2.0 * k / l2 + x * x * (1.0 - l1 / l2)) / 2.0).sqrt();
    let second = (2.0 * k * l2 - l1 * (l2 - l1) * x * x).max(0.0).sqrt();
    first + second
}

/// The critical point `x₂` of `M` for `λ₁ < 1/√2`.
pub fn critical_x2(l1: f64, l2: f64, k: f64) -> Option<f64> {
    let den = -l1 * l1 + l1 * l2 - 2.0 * l1.powi(3) * l2 + 2.0 * l1 * l1 * l2 * l2;
    let num = 1.0 - 2.0 * l1 * l1;
    (num > 0.0 && den > 0.0).then(|| (2.0 * k * l2).sqrt() * num.sqrt() / den.sqrt())
}

/// Global maximum of `M` over its domain: golden-section search on each
/// segment between the critical points and the endpoints.
pub fn m_profile_max(l1: f64, l2: f64, k: f64) -> f64 {
    let end = (2.0 * k / l1).sqrt();
    let mut cuts = vec![-end, 0.0, end];
    if let Some(x2) = critical_x2(l1, l2, k).filter(|x| *x < end) {
        cuts.extend([-x2, x2]);
    }
    cuts.sort_by(f64::total_cmp);
    let f = |x: f64| m_profile(l1, l2, k, x);
    let mut best = cuts.iter().map(|&x| f(x)).fold(f64::NEG_INFINITY, f64::max);
    for w in cuts.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        while b - a > 1e-10 * (1.0 + end) {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best = best.max(f(0.5 * (a + b)));
    }
    best
}
