//! Finite unions of closed subintervals of `[0, 1]`.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Sorted, pairwise disjoint closed intervals inside `[0, 1]`.
///
/// Used both for the indicator `I_S` of an arbitrary set and for the complement of the
/// node windows, `[0,1] ∖ ⋃ (t_j − δ, t_j + δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMask {
    intervals: Vec<(f64, f64)>,
}

impl IntervalMask {
    pub fn full() -> Self {
        IntervalMask {
            intervals: alloc::vec![(0.0, 1.0)],
        }
    }

    pub fn empty() -> Self {
        IntervalMask {
            intervals: Vec::new(),
        }
    }

    /// Validates ordering and disjointness. Degenerate intervals (`a == b`) are dropped.
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            if !(a.is_finite() && b.is_finite()) || a > b || a < 0.0 || b > 1.0 {
                return Err(Error::invalid(alloc::format!(
                    "mask interval [{a}, {b}] is not inside [0, 1]"
                )));
            }
            if let Some(&(_, prev_b)) = out.last() {
                if a <= prev_b {
                    return Err(Error::invalid("mask intervals must be sorted and disjoint"));
                }
            }
            if b > a {
                out.push((a, b));
            }
        }
        Ok(IntervalMask { intervals: out })
    }

    /// `[0,1] ∖ ⋃_j (c_j − r, c_j + r)` for sorted centers whose windows fit inside `[0,1]`.
    pub fn complement_of_windows(centers: &[f64], radius: f64) -> Result<Self> {
        let mut intervals = Vec::with_capacity(centers.len() + 1);
        let mut left = 0.0;
        for &c in centers {
            let (a, b) = (c - radius, c + radius);
            if a < left || b > 1.0 {
                return Err(Error::domain(alloc::format!(
                    "window [{a}, {b}] overlaps its neighbour or leaves [0, 1]"
                )));
            }
            intervals.push((left, a));
            left = b;
        }
        intervals.push((left, 1.0));
        // Touching windows produce zero-length pieces, which `new` drops.
        IntervalMask::new(intervals)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= t && t <= b)
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Endpoints of all intervals, sorted.
    pub fn endpoints(&self) -> Vec<f64> {
        self.intervals.iter().flat_map(|&(a, b)| [a, b]).collect()
    }

    /// Intersection of the mask with `[a, b]` as a list of intervals.
    pub fn clip(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        self.intervals
            .iter()
            .filter_map(|&(lo, hi)| {
                let lo = lo.max(a);
                let hi = hi.min(b);
                (hi > lo).then_some((lo, hi))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_complement() {
        let m = IntervalMask::complement_of_windows(&[0.25, 0.75], 0.1).unwrap();
        assert_eq!(m.intervals(), &[(0.0, 0.15), (0.35, 0.65), (0.85, 1.0)]);
        assert!(m.contains(0.5));
        assert!(!m.contains(0.25));
        assert!(m.contains(0.15));
        assert!((m.measure() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rejects_overlap() {
        assert!(IntervalMask::new(alloc::vec![(0.0, 0.5), (0.4, 1.0)]).is_err());
        assert!(IntervalMask::new(alloc::vec![(0.5, 0.4)]).is_err());
        assert!(IntervalMask::complement_of_windows(&[0.05], 0.1).is_err());
    }

    #[test]
    fn clip_to_subinterval() {
        let m = IntervalMask::new(alloc::vec![(0.0, 0.2), (0.5, 0.9)]).unwrap();
        assert_eq!(m.clip(0.1, 0.6), alloc::vec![(0.1, 0.2), (0.5, 0.6)]);
    }
}
