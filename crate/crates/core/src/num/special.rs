//! The few special values the geometry needs: Γ(n/2 + 1) for integer n,
//! evaluated exactly by the recurrence rather than through a general lgamma.

/// Γ(n/2 + 1) for integer n >= 0.
///
/// Even n: (n/2)!. Odd n = 2k+1: Γ(k + 3/2) = √π · (2k+1)!! / 2^{k+1}.
/// Computed multiplicatively, which is exact to rounding for the dimensions
/// used here.
pub fn gamma_half_plus_one(n: u32) -> f64 {
    if n % 2 == 0 {
        let mut acc = 1.0;
        for j in 1..=(n / 2) {
            acc *= j as f64;
        }
        acc
    } else {
        // Γ(1/2) = √π, then Γ(x+1) = x Γ(x) stepping x = 1/2, 3/2, ...
        let mut acc = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        for _ in 0..((n + 1) / 2) {
            acc *= x;
            x += 1.0;
        }
        acc
    }
}
