/// Romberg integration of a smooth integrand over `[a, b]`.
///
/// Stops when successive diagonal extrapolants agree to `rel_tol` (relative)
/// or after `2^20` panels.
pub(crate) fn romberg(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    const MAX_LEVEL: usize = 20;
    let mut prev = vec![0.5 * (b - a) * (f(a) + f(b))];
    let mut h = b - a;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let fresh: f64 = (0..1usize << (level - 1))
            .map(|i| f(a + (2 * i + 1) as f64 * h))
            .sum();
        let mut row = Vec::with_capacity(level + 1);
        row.push(0.5 * prev[0] + h * fresh);
        let mut factor = 1.0;
        for k in 1..=level {
            factor *= 4.0;
            let r = row[k - 1] + (row[k - 1] - prev[k - 1]) / (factor - 1.0);
            row.push(r);
        }
        let diff = (row[level] - prev[level - 1]).abs();
        let done = level >= 4 && diff <= rel_tol * row[level].abs().max(f64::MIN_POSITIVE);
        prev = row;
        if done {
            break;
        }
    }
    prev[prev.len() - 1]
}
