//! Grouping consecutive segments that one grasp can serve.
//!
//! Regions are index sets into the canonical cloud. Because every transformed
//! cloud keeps point order, intersecting regions across segments is plain set
//! intersection on indices.

use serde::{Deserialize, Serialize};

use crate::cloud::ContactPair;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAX_BRUTEFORCE_SEGMENTS: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Score {
    /// Smallest entry of `gamma_list`.
    pub gamma: f64,
    /// Fraction of each region that survives the intersection.
    pub gamma_list: Vec<f64>,
    pub intersection: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Group {
    /// First and last segment (0-based, inclusive).
    pub first: usize,
    pub last: usize,
    pub score: Score,
    /// The segment's region was empty, so it stands alone with `gamma = 0`.
    pub empty_region: bool,
}

impl Group {
    pub fn segment_count(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn segments(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegraspPlan {
    pub groups: Vec<Group>,
}

impl RegraspPlan {
    /// Number of grasps.
    pub fn alpha(&self) -> usize {
        self.groups.len()
    }

    pub fn regrasp_count(&self) -> usize {
        self.alpha().saturating_sub(1)
    }

    /// Ranges as 1-based inclusive pairs.
    pub fn ranges(&self) -> Vec<(usize, usize)> {
        self.groups.iter().map(|g| (g.first + 1, g.last + 1)).collect()
    }

    pub fn group_lengths(&self) -> Vec<usize> {
        self.groups.iter().map(Group::segment_count).collect()
    }
}

/// Intersection of two sorted, deduplicated index lists.
pub fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn normalized(set: &[usize]) -> Vec<usize> {
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Score of a group of regions. An empty region scores zero.
pub fn compute_score<S: AsRef<[usize]>>(regions: &[S]) -> Result<Score> {
    let Some(first) = regions.first() else {
        return Err(Error::EmptyInput);
    };
    let sets: Vec<Vec<usize>> = regions.iter().map(|r| normalized(r.as_ref())).collect();
    let mut inter = normalized(first.as_ref());
    for s in &sets[1..] {
        inter = intersect_sorted(&inter, s);
    }
    let gamma_list: Vec<f64> = sets
        .iter()
        .map(|s| if s.is_empty() { 0.0 } else { inter.len() as f64 / s.len() as f64 })
        .collect();
    let gamma = gamma_list.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Score { gamma, gamma_list, intersection: inter })
}

fn group(regions: &[Vec<usize>], first: usize, last: usize) -> Group {
    let empty_region = first == last && regions[first].is_empty();
    let score = compute_score(&regions[first..=last]).expect("nonempty range");
    Group { first, last, score, empty_region }
}

fn feasible(regions: &[Vec<usize>], first: usize, last: usize, gamma_th: f64) -> bool {
    first == last || compute_score(&regions[first..=last]).map_or(false, |s| s.gamma >= gamma_th)
}

/// Longest feasible prefix, repeated. A group closes just before the region
/// that would push its score below `gamma_th`; an empty region always forms
/// its own group.
pub fn greedy_partition<S: AsRef<[usize]>>(regions: &[S], gamma_th: f64) -> RegraspPlan {
    let regions: Vec<Vec<usize>> = regions.iter().map(|r| normalized(r.as_ref())).collect();
    let n = regions.len();
    let mut groups = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        if !regions[i].is_empty() {
            while j + 1 < n && !regions[j + 1].is_empty() && feasible(&regions, i, j + 1, gamma_th) {
                j += 1;
            }
        }
        groups.push(group(&regions, i, j));
        i = j + 1;
    }
    RegraspPlan { groups }
}

/// Fewest groups over all sequential partitions in which every group of two
/// or more regions scores at least `gamma_th`. Among equally small partitions
/// the one with the lexicographically largest group lengths wins.
pub fn optimal_partition_bruteforce<S: AsRef<[usize]>>(regions: &[S], gamma_th: f64) -> Result<RegraspPlan> {
    let regions: Vec<Vec<usize>> = regions.iter().map(|r| normalized(r.as_ref())).collect();
    let n = regions.len();
    if n > MAX_BRUTEFORCE_SEGMENTS {
        return Err(Error::TooManySegments(n));
    }
    if n == 0 {
        return Ok(RegraspPlan { groups: Vec::new() });
    }
    // feasibility of every contiguous range, computed once
    let mut ok = vec![vec![false; n]; n];
    for a in 0..n {
        for b in a..n {
            ok[a][b] = feasible(&regions, a, b, gamma_th);
        }
    }
    let mut best: Option<Vec<(usize, usize)>> = None;
    for mask in 0u32..(1u32 << (n - 1)) {
        // bit c set: cut between segment c and c + 1
        let mut ranges = Vec::new();
        let mut start = 0;
        for c in 0..n - 1 {
            if mask & (1 << c) != 0 {
                ranges.push((start, c));
                start = c + 1;
            }
        }
        ranges.push((start, n - 1));
        if !ranges.iter().all(|&(a, b)| ok[a][b]) {
            continue;
        }
        let better = match &best {
            None => true,
            Some(cur) => {
                let lens = |r: &[(usize, usize)]| -> Vec<usize> { r.iter().map(|(a, b)| b - a + 1).collect() };
                ranges.len() < cur.len() || (ranges.len() == cur.len() && lens(&ranges) > lens(cur))
            }
        };
        if better {
            best = Some(ranges);
        }
    }
    let ranges = best.expect("all-singleton partition is always feasible");
    Ok(RegraspPlan { groups: ranges.into_iter().map(|(a, b)| group(&regions, a, b)).collect() })
}

/// Picks the pair inside `intersection` whose weaker endpoint is strongest
/// across the group's segments. `segment_eta` holds one per-point metric
/// slice per segment of the group. Ties go to the pair that comes first.
pub fn grasp_contact_selection<T: Real>(
    intersection: &[usize],
    pairs: &[ContactPair<T>],
    segment_eta: &[&[T]],
) -> Result<(usize, T)> {
    let inside = |i: usize| intersection.binary_search(&i).is_ok();
    let mut best: Option<(usize, T)> = None;
    for (k, p) in pairs.iter().enumerate() {
        if !inside(p.index_a) || !inside(p.index_b) {
            continue;
        }
        let worst = segment_eta
            .iter()
            .map(|eta| eta[p.index_a].min(eta[p.index_b]))
            .fold(T::infinity(), |a, b| a.min(b));
        let worst = if worst.is_finite() { worst } else { T::zero() };
        if best.map_or(true, |(_, v)| worst > v) {
            best = Some((k, worst));
        }
    }
    best.ok_or(Error::NoFeasiblePair)
}
