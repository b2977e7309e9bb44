use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::BitString;
use crate::error::{Error, Result};

/// A Hamming ball: every string within `radius` of `center`.
///
/// This is the computable form of a family of likely bit strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LikelySetSpec {
    center: BitString,
    radius: usize,
    cardinality: BigUint,
}

impl LikelySetSpec {
    pub fn new(center: BitString, radius: usize) -> Result<Self> {
        let cardinality = hamming_ball_size(center.len(), radius)?;
        Ok(Self {
            center,
            radius,
            cardinality,
        })
    }

    pub fn center(&self) -> &BitString {
        &self.center
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn cardinality(&self) -> &BigUint {
        &self.cardinality
    }

    pub fn contains(&self, s: &BitString) -> bool {
        self.center
            .hamming_distance(s)
            .map(|d| d <= self.radius)
            .unwrap_or(false)
    }

    pub fn iter(&self) -> BallIter<'_> {
        BallIter {
            center: &self.center,
            sets: FlipSets::new(self.center.len(), self.radius),
        }
    }
}

/// Exact `sum_{k=0}^{r} C(n, k)`.
pub fn hamming_ball_size(n: usize, r: usize) -> Result<BigUint> {
    if r > n {
        return Err(Error::InvalidArgument(format!(
            "radius {r} exceeds string length {n}"
        )));
    }
    let mut total = BigUint::zero();
    let mut term = BigUint::one();
    for k in 0..=r {
        if k > 0 {
            term = term * BigUint::from(n - k + 1) / BigUint::from(k);
        }
        total += &term;
    }
    Ok(total)
}

/// `log2` of [`hamming_ball_size`] evaluated in floating point.
///
/// Usable for lengths where the exact count has millions of bits. Accuracy
/// is limited by `lgamma`, roughly `1e-15` relative to `n`.
pub fn log2_ball_size(n: u64, r: u64) -> f64 {
    assert!(r <= n, "radius {r} exceeds string length {n}");
    if r == n {
        return n as f64;
    }
    if 2 * r > n {
        // complement: 2^n minus the ball of radius n - r - 1
        let tail = log2_ball_size(n, n - r - 1) - n as f64;
        return n as f64 + (-(tail.exp2())).ln_1p() / std::f64::consts::LN_2;
    }
    let ln_top = ln_binomial(n, r);
    // sum_{j>=0} C(n, r - j) / C(n, r); ratios shrink geometrically since r <= n/2
    let mut sum = 1.0;
    let mut ratio = 1.0;
    let mut k = r;
    while k > 0 {
        ratio *= k as f64 / (n - k + 1) as f64;
        sum += ratio;
        if ratio < sum * 1e-17 {
            break;
        }
        k -= 1;
    }
    (ln_top + sum.ln()) / std::f64::consts::LN_2
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    if k == 0 || k == n {
        return 0.0;
    }
    if n < 64 {
        let mut acc = 0.0;
        for i in 0..k {
            acc += ((n - i) as f64 / (i + 1) as f64).ln();
        }
        return acc;
    }
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// `log2` of a big unsigned integer, accurate to double precision.
pub fn log2_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        return x.to_u64().map(|v| (v as f64).log2()).unwrap_or(f64::NAN);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX);
    (top as f64).log2() + shift as f64
}

/// Index sets of flipped positions, in nondecreasing size and, within a size,
/// ascending lexicographic order.
#[derive(Debug, Clone)]
pub struct FlipSets {
    len: usize,
    radius: usize,
    current: Vec<usize>,
    started: bool,
    done: bool,
}

impl FlipSets {
    pub fn new(len: usize, radius: usize) -> Self {
        Self {
            len,
            radius: radius.min(len),
            current: Vec::new(),
            started: false,
            done: false,
        }
    }

    /// Advances and returns the next set, or `None` once the ball is exhausted.
    pub fn next_set(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.current);
        }
        let d = self.current.len();
        // rightmost slot that can still move right
        let pos = (0..d).rev().find(|&i| self.current[i] < self.len - d + i);
        match pos {
            Some(i) => {
                self.current[i] += 1;
                for j in i + 1..d {
                    self.current[j] = self.current[j - 1] + 1;
                }
            }
            None => {
                if d >= self.radius {
                    self.done = true;
                    return None;
                }
                self.current = (0..d + 1).collect();
            }
        }
        Some(&self.current)
    }
}

impl Iterator for FlipSets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        self.next_set().map(<[usize]>::to_vec)
    }
}

/// Streams the members of a [`LikelySetSpec`], center first.
#[derive(Debug, Clone)]
pub struct BallIter<'a> {
    center: &'a BitString,
    sets: FlipSets,
}

impl Iterator for BallIter<'_> {
    type Item = BitString;

    fn next(&mut self) -> Option<BitString> {
        let set = self.sets.next_set()?;
        let mut s = self.center.clone();
        for &i in set {
            s.flip(i);
        }
        Some(s)
    }
}

/// Convenience wrapper matching the ball enumeration contract.
pub fn enumerate_ball(spec: &LikelySetSpec) -> BallIter<'_> {
    spec.iter()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcore::entropy::h2;
    use std::collections::HashSet;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn all_strings(n: usize) -> impl Iterator<Item = BitString> {
        (0..1u64 << n).map(move |v| BitString::from_u64(v, n))
    }

    #[test]
    fn ball_size_examples() {
        assert_eq!(hamming_ball_size(5, 0).unwrap(), BigUint::from(1u32));
        assert_eq!(hamming_ball_size(5, 1).unwrap(), BigUint::from(6u32));
        assert!(hamming_ball_size(3, 4).is_err());
    }

    #[test]
    fn ball_size_20_3_matches_brute_force() {
        let zero = BitString::zeros(20);
        let brute = all_strings(20)
            .filter(|s| s.hamming_distance(&zero).unwrap() <= 3)
            .count();
        assert_eq!(brute, 1351);
        assert_eq!(hamming_ball_size(20, 3).unwrap(), BigUint::from(1351u32));
    }

    #[test]
    fn enumerate_small_examples() {
        let spec = LikelySetSpec::new(bs("000"), 0).unwrap();
        assert_eq!(spec.iter().collect::<Vec<_>>(), vec![bs("000")]);

        let spec = LikelySetSpec::new(bs("000"), 1).unwrap();
        let got: Vec<_> = spec.iter().map(|s| s.to_string()).collect();
        assert_eq!(got, ["000", "100", "010", "001"]);

        let center = bs("101");
        let spec = LikelySetSpec::new(center.clone(), 2).unwrap();
        let got: HashSet<_> = spec.iter().collect();
        let brute: HashSet<_> = all_strings(3)
            .filter(|s| s.hamming_distance(&center).unwrap() <= 2)
            .collect();
        assert_eq!(got.len(), 7);
        assert_eq!(got, brute);
    }

    #[test]
    fn enumeration_order_is_distance_then_lex() {
        let center = BitString::zeros(6);
        let spec = LikelySetSpec::new(center.clone(), 3).unwrap();
        let sets: Vec<Vec<usize>> = FlipSets::new(6, 3).collect();
        for w in sets.windows(2) {
            assert!(w[0].len() < w[1].len() || (w[0].len() == w[1].len() && w[0] < w[1]));
        }
        let first = spec.iter().next().unwrap();
        assert_eq!(first, center);
    }

    #[test]
    fn enumeration_count_matches_size_exhaustively() {
        for n in 0..=16usize {
            for r in 0..=n {
                let count = FlipSets::new(n, r).count();
                assert_eq!(BigUint::from(count), hamming_ball_size(n, r).unwrap(), "n={n} r={r}");
            }
        }
    }

    #[test]
    fn enumeration_is_exact_ball_for_small_n() {
        for n in 1..=12usize {
            let center = BitString::from_u64(0b1011_0110_1101 & ((1 << n) - 1), n);
            for r in [0, 1, n / 3, n / 2, n] {
                let spec = LikelySetSpec::new(center.clone(), r).unwrap();
                let got: Vec<_> = spec.iter().collect();
                let set: HashSet<_> = got.iter().cloned().collect();
                assert_eq!(set.len(), got.len(), "duplicates at n={n} r={r}");
                let brute: HashSet<_> = all_strings(n)
                    .filter(|s| s.hamming_distance(&center).unwrap() <= r)
                    .collect();
                assert_eq!(set, brute, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn log2_size_tracks_exact_count() {
        for n in [1u64, 7, 30, 64, 65, 200, 1000, 3000] {
            for r in [0, 1, n / 10, n / 3, n / 2, (2 * n) / 3, n] {
                let exact = log2_biguint(&hamming_ball_size(n as usize, r as usize).unwrap());
                let approx = log2_ball_size(n, r);
                assert!(
                    (exact - approx).abs() <= 1e-9 * exact.max(1.0),
                    "n={n} r={r} exact={exact} approx={approx}"
                );
            }
        }
    }

    #[test]
    fn log2_size_below_entropy_volume() {
        for n in 1..=64u64 {
            for r in 0..=n / 2 {
                let lhs = log2_biguint(&hamming_ball_size(n as usize, r as usize).unwrap());
                let rhs = n as f64 * h2(r as f64 / n as f64);
                assert!(lhs <= rhs + 1e-9, "n={n} r={r}: {lhs} > {rhs}");
            }
        }
    }
}
