/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `failures` out of `shots`, clamped so that it
/// always brackets the point estimate.
pub fn wilson_interval(failures: usize, shots: usize) -> (f64, f64) {
    if shots == 0 {
        return (0.0, 1.0);
    }
    let n = shots as f64;
    let phat = failures as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).clamp(0.0, phat), (center + half).clamp(phat, 1.0))
}

/// Failure probability per round given the probability `total` over
/// `rounds` rounds.
pub fn per_round(total: f64, rounds: usize) -> f64 {
    if total >= 1.0 {
        return 1.0;
    }
    // 1 - (1 - P)^(1/T), written to stay accurate for tiny P.
    -((1.0 - total).ln() / rounds as f64).exp_m1()
}

/// Inverse of [`per_round`].
pub fn total_from_per_round(round: f64, rounds: usize) -> f64 {
    if round >= 1.0 {
        return 1.0;
    }
    -((1.0 - round).ln() * rounds as f64).exp_m1()
}
