use std::fmt;

use serde::{Deserialize, Serialize};

/// Per-mode excitation counts of a vibrational level.
///
/// Ordering is lexicographic over the counts, which is the tie-break order used
/// throughout the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhotonPattern(Vec<usize>);

impl PhotonPattern {
    pub fn new(counts: Vec<usize>) -> Self {
        Self(counts)
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self(vec![0; n_modes])
    }

    pub fn n_modes(&self) -> usize {
        self.0.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_vacuum(&self) -> bool {
        self.0.iter().all(|&n| n == 0)
    }

    /// Whether every count renders as a single decimal digit.
    pub fn is_single_digit(&self) -> bool {
        self.0.iter().all(|&n| n <= 9)
    }

    /// Digit-string rendering (`0010000`), falling back to comma separation
    /// when some count exceeds 9.
    pub fn render(&self) -> String {
        if self.is_single_digit() {
            self.0.iter().map(|n| char::from(b'0' + *n as u8)).collect()
        } else {
            self.0
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
    }

    /// Inverse of [`render`](Self::render).
    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        if text.contains(',') {
            text.split(',')
                .map(|s| s.trim().parse().ok())
                .collect::<Option<Vec<_>>>()
                .map(Self)
        } else {
            text.chars()
                .map(|c| c.to_digit(10).map(|d| d as usize))
                .collect::<Option<Vec<_>>>()
                .map(Self)
        }
    }

    /// Componentwise sum of two patterns of equal length.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n_modes(), other.n_modes());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<usize>> for PhotonPattern {
    fn from(counts: Vec<usize>) -> Self {
        Self(counts)
    }
}

impl std::ops::Index<usize> for PhotonPattern {
    type Output = usize;
    fn index(&self, mode: usize) -> &usize {
        &self.0[mode]
    }
}

impl fmt::Display for PhotonPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Visits every pattern of `n_modes` counts in `0..=per_mode_cap` whose total
/// is at most `total_cap`, in lexicographic order.
pub fn for_each_pattern(
    n_modes: usize,
    per_mode_cap: usize,
    total_cap: usize,
    mut visit: impl FnMut(&[usize]),
) {
    let mut counts = vec![0usize; n_modes];
    fn rec(
        mode: usize,
        remaining: usize,
        cap: usize,
        counts: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if mode == counts.len() {
            visit(counts);
            return;
        }
        for n in 0..=cap.min(remaining) {
            counts[mode] = n;
            rec(mode + 1, remaining - n, cap, counts, visit);
        }
        counts[mode] = 0;
    }
    rec(0, total_cap, per_mode_cap, &mut counts, &mut visit);
}

/// Collects the patterns visited by [`for_each_pattern`].
pub fn enumerate_patterns(
    n_modes: usize,
    per_mode_cap: usize,
    total_cap: usize,
) -> Vec<PhotonPattern> {
    let mut out = Vec::new();
    for_each_pattern(n_modes, per_mode_cap, total_cap, |c| {
        out.push(PhotonPattern(c.to_vec()))
    });
    out
}

/// Number of patterns [`for_each_pattern`] would visit, saturating at `limit + 1`.
pub fn count_patterns(n_modes: usize, per_mode_cap: usize, total_cap: usize, limit: usize) -> usize {
    // ways[t] = number of prefixes with total t
    let mut ways = vec![0usize; total_cap + 1];
    ways[0] = 1;
    for _ in 0..n_modes {
        let mut next = vec![0usize; total_cap + 1];
        for (t, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for n in 0..=per_mode_cap.min(total_cap - t) {
                next[t + n] = next[t + n].saturating_add(w).min(limit.saturating_add(1));
            }
        }
        ways = next;
    }
    ways.iter().fold(0usize, |acc, &w| acc.saturating_add(w)).min(limit.saturating_add(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_digits_and_commas() {
        assert_eq!(PhotonPattern::new(vec![0, 0, 1, 0, 0, 0, 0]).render(), "0010000");
        let wide = PhotonPattern::new(vec![1, 12, 0]);
        assert!(!wide.is_single_digit());
        assert_eq!(wide.render(), "1,12,0");
        assert_eq!(PhotonPattern::parse("1,12,0"), Some(wide));
        assert_eq!(
            PhotonPattern::parse("0010000"),
            Some(PhotonPattern::new(vec![0, 0, 1, 0, 0, 0, 0]))
        );
        assert_eq!(PhotonPattern::parse("0x1"), None);
    }

    #[test]
    fn enumeration_is_lexicographic_and_counted() {
        let all = enumerate_patterns(3, 2, 3);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all.iter().all(|p| p.total() <= 3 && p.counts().iter().all(|&n| n <= 2)));
        assert_eq!(count_patterns(3, 2, 3, usize::MAX - 1), all.len());
        // 4^7 patterns when the total cap is not binding
        assert_eq!(count_patterns(7, 3, 21, 1 << 20), 16384);
        assert_eq!(count_patterns(26, 3, 78, 1000), 1001);
    }
}
