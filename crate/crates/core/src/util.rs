//! Small shared helpers: seeded RNG, summation, CSV number formatting.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG used by every sampled check.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Format with 17 significant digits (round-trips f64).
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{:.16e}", v)
    } else {
        format!("{}", v)
    }
}

/// Least-squares slope of y against x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// Worker count: explicit request, capped by `QNLS_THREADS` when set.
pub fn worker_count(requested: Option<usize>) -> usize {
    let hw = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut w = requested.unwrap_or(hw).max(1);
    if let Ok(cap) = std::env::var("QNLS_THREADS") {
        if let Ok(c) = cap.trim().parse::<usize>() {
            if c > 0 {
                w = w.min(c);
            }
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_roundtrips() {
        for v in [1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.1 + 0.2] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn slope_of_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        assert!((ls_slope(&x, &y) - 2.0).abs() < 1e-14);
    }
}
