use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Train / validation / test proportions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub ratios: [f64; 3],
}

impl SplitSpec {
    pub const ETT: SplitSpec = SplitSpec {
        ratios: [0.6, 0.2, 0.2],
    };
    pub const DEFAULT: SplitSpec = SplitSpec {
        ratios: [0.7, 0.1, 0.2],
    };

    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let s = SplitSpec {
            ratios: [train, val, test],
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ratios.iter().any(|r| r.is_nan() || *r <= 0.0) {
            return Err(Error::config(format!(
                "split ratios {:?} must all be positive",
                self.ratios
            )));
        }
        let sum: f64 = self.ratios.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!(
                "split ratios {:?} sum to {sum}, not 1",
                self.ratios
            )));
        }
        Ok(())
    }
}

/// Contiguous, ordered, non-overlapping index ranges covering `[0, T)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRanges {
    pub train: Range<usize>,
    pub val: Range<usize>,
    pub test: Range<usize>,
}

impl SplitRanges {
    pub fn all(&self) -> [&Range<usize>; 3] {
        [&self.train, &self.val, &self.test]
    }
}

/// Splits `[0, len)` in chronological order. Train and validation get `floor(len * r)`
/// steps, test takes the remainder. Every part must hold at least `min_len` steps.
pub fn chronological_split(len: usize, spec: &SplitSpec, min_len: usize) -> Result<SplitRanges> {
    spec.validate()?;
    // The epsilon keeps products like 17420 * 0.6 from flooring one short.
    let part = |r: f64| (len as f64 * r + 1e-9).floor() as usize;
    let n_train = part(spec.ratios[0]);
    let n_val = part(spec.ratios[1]);
    let n_train = n_train.min(len);
    let n_val = n_val.min(len - n_train);
    let ranges = SplitRanges {
        train: 0..n_train,
        val: n_train..n_train + n_val,
        test: n_train + n_val..len,
    };
    for (name, r) in ["train", "validation", "test"].iter().zip(ranges.all()) {
        if r.len() < min_len {
            return Err(Error::config(format!(
                "{name} split has {} steps but a window needs {min_len} (look-back + horizon)",
                r.len()
            )));
        }
    }
    Ok(ranges)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn ten_steps() {
        let r = chronological_split(10, &SplitSpec::ETT, 1).unwrap();
        assert_eq!((r.train, r.val, r.test), (0..6, 6..8, 8..10));
    }

    #[test]
    fn ett_h1_sizes() {
        let r = chronological_split(17420, &SplitSpec::ETT, 432).unwrap();
        assert_eq!(r.train.len(), 10452);
        assert_eq!(r.val.len(), 3484);
        assert_eq!(r.test.len(), 3484);
    }

    #[test]
    fn too_small_is_config_error() {
        let err = chronological_split(100, &SplitSpec::ETT, 30).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn bad_ratios() {
        assert!(SplitSpec::new(0.5, 0.5, 0.0).is_err());
        assert!(SplitSpec::new(0.6, 0.3, 0.2).is_err());
        assert!(SplitSpec::new(0.7, 0.1, 0.2).is_ok());
    }

    proptest! {
        #[test]
        fn ranges_partition_the_series(len in 3usize..100_000, a in 1u32..100, b in 1u32..100, c in 1u32..100) {
            let total = (a + b + c) as f64;
            let spec = SplitSpec { ratios: [a as f64 / total, b as f64 / total, 1.0 - (a + b) as f64 / total] };
            prop_assume!(spec.validate().is_ok());
            let r = chronological_split(len, &spec, 0).unwrap();
            prop_assert_eq!(r.train.start, 0);
            prop_assert_eq!(r.train.end, r.val.start);
            prop_assert_eq!(r.val.end, r.test.start);
            prop_assert_eq!(r.test.end, len);
            prop_assert!(r.train.start <= r.train.end && r.val.start <= r.val.end && r.test.start <= r.test.end);
        }
    }
}
