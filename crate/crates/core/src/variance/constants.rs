//! Scalar constants relating the scan policies.

/// `(k₁(r), k₂(r))` with `V_D ≤ k₁ V_R(r)` and `V_R(r) ≤ k₂ V_D`.
pub fn comparison_constants(r: f64) -> (f64, f64) {
    let num = 1.0 - r + r * r + (r * r * (1.0 - r).powi(2) + (1.0 - 2.0 * r).powi(2)).sqrt();
    (num, num / (2.0 * r * (1.0 - r)))
}

/// Ratio of the DG and RG(r) step times, `(τ+1) / (2(rτ+1−r))`.
pub fn kappa(tau: f64, r: f64) -> f64 {
    (tau + 1.0) / (2.0 * (r * tau + 1.0 - r))
}

/// Selection probability solving `k₂(r)/κ(τ, r) = 2` other than the trivial root `r = 1/2`;
/// the two roots merge at `τ = 1`.
pub fn optimal_r(tau: f64) -> f64 {
    if (tau - 1.0).abs() < 1e-6 {
        // numerator and denominator both vanish; the limit is 1/2
        return 0.5;
    }
    let disc = (tau * (2.0 * tau + 1.0) * (tau + 2.0)).sqrt();
    (-2.0 * tau - 1.0 + disc) / (tau * tau - 1.0)
}

/// Numerical minimizer of `k₂(r)/κ(τ, r)` over `r ∈ (0, 1)`.
pub fn optimal_r_numeric(tau: f64) -> f64 {
    let g = |r: f64| comparison_constants(r).1 / kappa(tau, r);
    let (mut lo, mut hi) = (1e-9, 1.0 - 1e-9);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let (mut ga, mut gb) = (g(a), g(b));
    for _ in 0..200 {
        if ga <= gb {
            hi = b;
            b = a;
            gb = ga;
            a = hi - phi * (hi - lo);
            ga = g(a);
        } else {
            lo = a;
            a = b;
            ga = gb;
            b = lo + phi * (hi - lo);
            gb = g(b);
        }
    }
    (lo + hi) / 2.0
}

/// Largest `l` with `l ≤ (1 + √(1 + 4(τ+1))) / 2`, at least 1.
pub fn max_l(tau: f64) -> u32 {
    let bound = (1.0 + (1.0 + 4.0 * (tau + 1.0)).sqrt()) / 2.0;
    // guard exact integer bounds against rounding just below
    (bound + 1e-12).floor().max(1.0) as u32
}

/// `(m₁(l), m₂(l))` with `Σ_M(l) ≤ m₁ Σ_D` and `Σ_D ≤ m₂ Σ_M(l)`.
pub fn mdg_constants(l: u32) -> (f64, f64) {
    let l = l as f64;
    let num = l * l + l + 2.0 + (l - 1.0) * ((l + 1.0).powi(2) + 1.0).sqrt();
    (num / (2.0 * (l + 1.0)), num / (l + 1.0).powi(2))
}

/// `max{(2l+1)/(l+1), (l+1)/l}`, the MDG-to-RG(1/(l+1)) sandwich constant.
pub fn mdg_sandwich(l: u32) -> f64 {
    let l = l as f64;
    ((2.0 * l + 1.0) / (l + 1.0)).max((l + 1.0) / l)
}
