use serde::Serialize;

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunsResult {
    pub runs: usize,
    /// Count of the symbol that opens the sequence.
    pub n1: usize,
    pub n2: usize,
    pub mean: f64,
    pub variance: f64,
    pub z: f64,
}

/// Wald–Wolfowitz runs test over a two-symbol sequence.
pub fn runs_test<T: PartialEq>(seq: &[T]) -> Result<RunsResult, StatsError> {
    if seq.len() < 3 {
        return Err(StatsError::TooShort(seq.len()));
    }
    let first = &seq[0];
    let Some(second) = seq.iter().find(|x| *x != first) else {
        return Err(StatsError::SingleCategory);
    };
    if seq.iter().any(|x| x != first && x != second) {
        return Err(StatsError::TooManyCategories);
    }
    let n1 = seq.iter().filter(|x| *x == first).count();
    let n2 = seq.len() - n1;
    let runs = 1 + seq.windows(2).filter(|w| w[0] != w[1]).count();

    let (a, b) = (n1 as f64, n2 as f64);
    let n = a + b;
    let mean = 2.0 * a * b / n + 1.0;
    let variance = 2.0 * a * b * (2.0 * a * b - n) / (n * n * (n - 1.0));
    let z = (runs as f64 - mean) / variance.sqrt();
    Ok(RunsResult {
        runs,
        n1,
        n2,
        mean,
        variance,
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn two_blocks() {
        let r = runs_test(&seq("AAAABBBB")).unwrap();
        assert_eq!(r.runs, 2);
        assert_eq!((r.n1, r.n2), (4, 4));
    }

    #[test]
    fn alternating() {
        let r = runs_test(&seq("ABAB")).unwrap();
        assert_eq!(r.runs, 4);
        assert!((r.mean - 3.0).abs() < 1e-12);
        assert!((r.variance - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.z - 1.224_744_871).abs() < 1e-6);
    }

    #[test]
    fn error_paths() {
        assert_eq!(runs_test(&seq("AAAAAA")), Err(StatsError::SingleCategory));
        assert_eq!(runs_test(&seq("AB")), Err(StatsError::TooShort(2)));
        assert_eq!(runs_test(&seq("ABC")), Err(StatsError::TooManyCategories));
    }

    /// Every arrangement of `n1` trues and `n2` falses.
    fn arrangements(n1: usize, n2: usize) -> Vec<Vec<bool>> {
        let n = n1 + n2;
        (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == n1)
            .map(|m| (0..n).map(|i| m >> i & 1 == 1).collect())
            .collect()
    }

    #[test]
    fn moments_match_exhaustive_enumeration() {
        for n1 in 1..=5 {
            for n2 in 1..=5 {
                if n1 + n2 < 3 {
                    continue;
                }
                let all = arrangements(n1, n2);
                let runs: Vec<f64> = all
                    .iter()
                    .map(|s| (1 + s.windows(2).filter(|w| w[0] != w[1]).count()) as f64)
                    .collect();
                let m = runs.iter().sum::<f64>() / runs.len() as f64;
                let v = runs.iter().map(|r| (r - m).powi(2)).sum::<f64>() / runs.len() as f64;
                // the formula is symmetric in n1, n2, so any arrangement works
                let r = runs_test(&all[0]).unwrap();
                assert!((r.mean - m).abs() < 1e-12, "n1={n1} n2={n2}");
                assert!((r.variance - v).abs() < 1e-12, "n1={n1} n2={n2}");
                if n1 + n2 >= 3 {
                    assert!(r.variance > 0.0);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn reversal_preserves_runs(s in prop::collection::vec(any::<bool>(), 3..60)) {
            prop_assume!(s.iter().any(|b| *b) && s.iter().any(|b| !*b));
            let r = runs_test(&s).unwrap();
            let mut rev = s.clone();
            rev.reverse();
            prop_assert_eq!(runs_test(&rev).unwrap().runs, r.runs);
            prop_assert!(r.runs >= 1 && r.runs <= s.len());
        }
    }
}
