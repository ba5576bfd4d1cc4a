/// A priori forward-error bound for MCH on an `n x n` matrix with
/// `||L|| = norm_l` at unit roundoff `u`, where the per-product error
/// constant grows like `n^mu_degree`.
///
/// Returns `+inf` when `u > 1 / (2^n n^mu_degree)`, outside the regime where
/// the bound holds, or when `n` is not a power of two `>= 2`.
pub fn mch_error_bound(n: usize, norm_l: f64, u: f64, mu_degree: f64) -> f64 {
    if n < 2 || !n.is_power_of_two() || !(norm_l >= 0.0) || !(u >= 0.0) {
        return f64::INFINITY;
    }
    let nf = n as f64;
    let mu = nf.powf(mu_degree);
    if u * mu * 2f64.powf(nf) > 1.0 {
        return f64::INFINITY;
    }
    let big_k = (n / 2).trailing_zeros() as i32;
    let e2 = |k: i32| 2f64.powi(k);
    let psi = |k: i32, c: f64, d: i32| (1..=k).map(|i| 1.0 + (c * norm_l).powf(e2(i + d))).product::<f64>();
    let phi = |k: i32| {
        psi(k, 1.0, 0) * (2.0 * norm_l).powf(e2(k))
            + (1.0 + norm_l) * 2f64.powf(e2(k)) * psi(k, 2.0, 1) * (1.0 + (2.0 * norm_l).powf(e2(k + 1)))
    };
    let tail: f64 = (1..big_k).map(|j| phi(j) * psi(big_k, 2.0, 0) / psi(j, 2.0, 0)).sum();
    let b = mu * u * (phi(big_k) + tail);
    if b.is_nan() { f64::INFINITY } else { b }
}
