/// Modified Bessel function of the first kind, order zero.
///
/// Power series up to `x = 50` (all terms positive, so no cancellation),
/// Hankel asymptotic expansion beyond.
pub fn bessel_i0(x: f64) -> f64 {
    1.0 + i0_minus_one(x)
}

/// `I0(x) - 1` without cancellation at small `x`.
pub(crate) fn i0_minus_one(x: f64) -> f64 {
    let x = x.abs();
    if x > 50.0 {
        return asymptotic(x) - 1.0;
    }
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

fn asymptotic(x: f64) -> f64 {
    // e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k)
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..30 {
        let kf = k as f64;
        let next = term * (2.0 * kf - 1.0).powi(2) / (kf * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    x.exp() / (2.0 * std::f64::consts::PI * x).sqrt() * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Straight 40-term series, summed from the small end.
    fn series_oracle(x: f64) -> f64 {
        let q = 0.25 * x * x;
        let mut terms = vec![1.0f64];
        for k in 1..120 {
            let prev = *terms.last().unwrap();
            terms.push(prev * q / (k as f64 * k as f64));
        }
        terms.iter().rev().sum()
    }

    #[test]
    fn known_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!((bessel_i0(10.0) / 2815.716_628_466_254_4 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn series_and_asymptotic_meet_smoothly() {
        let below = bessel_i0(50.0);
        let above = asymptotic(50.0);
        assert!((below / above - 1.0).abs() < 1e-13, "{below} {above}");
        for x in [0.001, 0.3, 2.5, 17.0, 33.3, 49.9] {
            assert!((bessel_i0(x) / series_oracle(x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn minus_one_is_accurate_for_tiny_arguments() {
        let x = 1e-6;
        assert!((i0_minus_one(x) / (x * x / 4.0) - 1.0).abs() < 1e-12);
    }
}
