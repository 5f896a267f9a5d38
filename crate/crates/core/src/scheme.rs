//! Stratification schemes: disjoint covers of a 1-D covariate space with
//! per-stratum weights.
//!
//! Memberships are finite unions of half-open intervals `[lo, hi)`, which
//! makes disjointness and coverage decidable exactly. Endpoints may be
//! infinite so that a scheme can cover any pool support.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Half-open interval `[lo, hi)`. Empty when `lo >= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(!lo.is_nan() && !hi.is_nan());
        Interval { lo, hi }
    }

    /// The whole real line.
    pub fn all() -> Self {
        Interval::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn width(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    fn overlaps(&self, other: &Interval) -> bool {
        !self.is_empty() && !other.is_empty() && self.lo < other.hi && other.lo < self.hi
    }
}

/// One stratum: an id, a membership predicate, and a weight `P_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stratum {
    pub id: usize,
    pub intervals: Vec<Interval>,
    pub weight: f64,
}

impl Stratum {
    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    /// Leftmost finite-ordered position, used for adjacency when merging.
    fn position(&self) -> f64 {
        self.intervals
            .iter()
            .map(|iv| iv.lo)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Where a scheme came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    APriori,
    LearnedFromClassifier,
}

/// Disjoint cover of the covariate space; stratum ids are `0..G-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StratificationScheme {
    strata: Vec<Stratum>,
    provenance: Provenance,
}

const WEIGHT_SUM_TOL: f64 = 1e-9;

impl StratificationScheme {
    /// Builds a scheme from `(membership, weight)` parts. Zero-weight parts
    /// are dropped; negative weights and overlapping memberships are
    /// rejected; weights must sum to one within `1e-9`.
    pub fn new(parts: Vec<(Vec<Interval>, f64)>, provenance: Provenance) -> Result<Self> {
        let mut sum = 0.0;
        for &(_, w) in &parts {
            if w < 0.0 || !w.is_finite() {
                return Err(Error::Domain {
                    parameter: "stratum weight",
                    value: w,
                });
            }
            sum += w;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::BadWeightSum { sum });
        }

        let strata: Vec<Stratum> = parts
            .into_iter()
            .filter(|(_, w)| *w > 0.0)
            .enumerate()
            .map(|(id, (intervals, weight))| Stratum {
                id,
                intervals,
                weight,
            })
            .collect();
        if strata.is_empty() {
            return Err(Error::EmptyScheme);
        }

        // Pairwise disjointness across strata.
        let mut spans: Vec<(Interval, usize)> = Vec::new();
        for s in &strata {
            for iv in &s.intervals {
                if !iv.is_empty() {
                    spans.push((*iv, s.id));
                }
            }
        }
        spans.sort_by(|a, b| a.0.lo.partial_cmp(&b.0.lo).unwrap());
        for pair in spans.windows(2) {
            let (a, ga) = pair[0];
            let (b, gb) = pair[1];
            if ga != gb && a.overlaps(&b) {
                return Err(Error::OverlappingStrata { a: ga, b: gb });
            }
        }

        Ok(StratificationScheme { strata, provenance })
    }

    /// Single stratum covering the whole line with weight one.
    pub fn single() -> Self {
        StratificationScheme {
            strata: alloc::vec![Stratum {
                id: 0,
                intervals: alloc::vec![Interval::all()],
                weight: 1.0,
            }],
            provenance: Provenance::APriori,
        }
    }

    /// Two strata split at `t` with explicit weights `(p_left, 1 - p_left)`.
    pub fn split_at(t: f64, p_left: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_left) {
            return Err(Error::Domain {
                parameter: "p_left",
                value: p_left,
            });
        }
        StratificationScheme::new(
            alloc::vec![
                (alloc::vec![Interval::new(f64::NEG_INFINITY, t)], p_left),
                (alloc::vec![Interval::new(t, f64::INFINITY)], 1.0 - p_left),
            ],
            Provenance::APriori,
        )
    }

    /// `k` equal-weight bins over `[lo, hi)`, with the outer bins extended
    /// to infinity so any pool support is covered.
    pub fn equal_bins(lo: f64, hi: f64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyScheme);
        }
        let range_ok = hi > lo;
        if !range_ok {
            return Err(Error::Domain {
                parameter: "bin range",
                value: hi - lo,
            });
        }
        let width = (hi - lo) / k as f64;
        let parts = (0..k)
            .map(|i| {
                let a = if i == 0 {
                    f64::NEG_INFINITY
                } else {
                    lo + i as f64 * width
                };
                let b = if i == k - 1 {
                    f64::INFINITY
                } else {
                    lo + (i + 1) as f64 * width
                };
                (alloc::vec![Interval::new(a, b)], 1.0 / k as f64)
            })
            .collect();
        StratificationScheme::new(parts, Provenance::APriori)
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn stratum(&self, g: usize) -> &Stratum {
        &self.strata[g]
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.strata.iter().map(|s| s.weight)
    }

    /// Maps a covariate to its stratum id, if covered.
    pub fn assign(&self, x: f64) -> Option<usize> {
        self.strata.iter().find(|s| s.contains(x)).map(|s| s.id)
    }

    /// Checks that every covariate maps to exactly one stratum. Disjointness
    /// is enforced at construction, so only coverage can fail here.
    pub fn validate_coverage(&self, xs: &[f64]) -> Result<()> {
        for &x in xs {
            if self.assign(x).is_none() {
                return Err(Error::UncoveredPoint { x });
            }
        }
        Ok(())
    }

    /// Merges the smallest-weight stratum into its positionally nearest
    /// neighbor until at most `max_groups` remain. Returns the number of
    /// merges performed. Used when a stage-2 budget cannot cover every
    /// learned stratum.
    pub fn coarsen_to(&mut self, max_groups: usize) -> usize {
        let mut merges = 0;
        while self.strata.len() > max_groups.max(1) {
            let smallest = self
                .strata
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.weight.partial_cmp(&b.1.weight).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            // Nearest neighbor by interval position; prefer the lighter side
            // on ties.
            let pos = self.strata[smallest].position();
            let neighbor = self
                .strata
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != smallest)
                .min_by(|a, b| {
                    let da = (a.1.position() - pos).abs();
                    let db = (b.1.position() - pos).abs();
                    da.partial_cmp(&db)
                        .unwrap()
                        .then(a.1.weight.partial_cmp(&b.1.weight).unwrap())
                })
                .map(|(i, _)| i)
                .unwrap();
            let removed = self.strata.remove(smallest);
            let target = if neighbor > smallest {
                neighbor - 1
            } else {
                neighbor
            };
            self.strata[target].weight += removed.weight;
            self.strata[target].intervals.extend(removed.intervals);
            merges += 1;
        }
        for (i, s) in self.strata.iter_mut().enumerate() {
            s.id = i;
        }
        merges
    }
}
