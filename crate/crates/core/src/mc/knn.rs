//! k-nearest-neighbor distances from a query point to a set of sites.
//!
//! Candidates are ordered by `(proximity, site index)`, so exact ties go to
//! the lower index and every search path returns the same list.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::manifold::{FlatTorus2D, Manifold, ProximityOrder};
use crate::scalar::Real;

/// The `k` best `(key, index)` pairs seen so far, kept sorted.
#[derive(Debug, Clone)]
pub(crate) struct Best<T> {
    k: usize,
    items: Vec<(T, usize)>,
}

#[inline]
fn before<T: PartialOrd>(a: &(T, usize), b: &(T, usize)) -> bool {
    match a.0.partial_cmp(&b.0) {
        Some(Ordering::Less) => true,
        Some(Ordering::Equal) => a.1 < b.1,
        _ => false,
    }
}

impl<T: Real> Best<T> {
    pub(crate) fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    pub(crate) fn clear(&mut self) {
        self.items.clear();
    }

    #[inline]
    pub(crate) fn offer(&mut self, key: T, index: usize) {
        let cand = (key, index);
        if self.items.len() == self.k {
            if !before(&cand, &self.items[self.k - 1]) {
                return;
            }
            self.items.pop();
        }
        let mut pos = self.items.len();
        while pos > 0 && before(&cand, &self.items[pos - 1]) {
            pos -= 1;
        }
        self.items.insert(pos, cand);
    }

    pub(crate) fn full(&self) -> bool {
        self.items.len() == self.k
    }

    /// Largest retained key, once `k` candidates are held.
    pub(crate) fn worst(&self) -> Option<T> {
        self.full().then(|| self.items[self.k - 1].0)
    }

    pub(crate) fn keys(&self) -> impl Iterator<Item = T> + '_ {
        self.items.iter().map(|p| p.0)
    }
}

fn check_k<P>(sites: &[P], k: usize) -> Result<()> {
    if k == 0 || sites.len() < k {
        return Err(Error::InvalidParameter(format!(
            "need 1 ≤ k ≤ #sites, got k = {k} with {} sites",
            sites.len()
        )));
    }
    Ok(())
}

fn nan_guard<T: Real>(p: T) -> Result<T> {
    if p.is_nan() {
        Err(Error::Domain("distance evaluated to NaN".into()))
    } else {
        Ok(p)
    }
}

/// Sorted distances from `x` to its `k` nearest sites (brute force).
///
/// For metrics whose proximity is only a lower bound on the distance, exact
/// distances are evaluated in increasing bound order until no unevaluated
/// site can beat the current `k`-th.
pub fn knn_distances<T: Real, M: Manifold<T> + ?Sized>(
    m: &M,
    x: &M::Point,
    sites: &[M::Point],
    k: usize,
) -> Result<Vec<T>> {
    let mut best = Best::new(k);
    knn_into(m, x, sites, &mut best)?;
    Ok(match m.proximity_order() {
        ProximityOrder::Monotone => best.keys().map(|p| m.proximity_to_distance(p)).collect(),
        ProximityOrder::LowerBound => best.keys().collect(),
    })
}

/// Fills `best` with the `k` nearest sites; keys are proximities for
/// monotone metrics and exact distances otherwise.
pub(crate) fn knn_into<T: Real, M: Manifold<T> + ?Sized>(
    m: &M,
    x: &M::Point,
    sites: &[M::Point],
    best: &mut Best<T>,
) -> Result<()> {
    check_k(sites, best.k)?;
    best.clear();
    match m.proximity_order() {
        ProximityOrder::Monotone => {
            for (i, s) in sites.iter().enumerate() {
                best.offer(nan_guard(m.proximity(x, s))?, i);
            }
        }
        ProximityOrder::LowerBound => {
            let mut bounds = Vec::with_capacity(sites.len());
            for (i, s) in sites.iter().enumerate() {
                bounds.push((nan_guard(m.proximity_to_distance(m.proximity(x, s)))?, i));
            }
            bounds.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            for &(lb, i) in &bounds {
                if let Some(w) = best.worst() {
                    if w < lb {
                        break;
                    }
                }
                best.offer(nan_guard(m.try_distance(x, &sites[i])?)?, i);
            }
        }
    }
    Ok(())
}

/// Uniform bucket grid over sites on the unit square torus, for repeated
/// queries against one site set.
///
/// Returns exactly the brute-force answer: the same squared distances are
/// compared under the same `(distance, index)` order.
#[derive(Debug, Clone)]
pub struct FlatTorusGrid<T> {
    g: usize,
    sites: Vec<[T; 2]>,
    start: Vec<usize>,
    members: Vec<usize>,
}

impl<T: Real> FlatTorusGrid<T> {
    /// Buckets `sites` into about two sites per cell.
    pub fn new(sites: Vec<[T; 2]>) -> Self {
        let g = ((sites.len() as f64 / 2.0).sqrt() as usize).max(1);
        let mut counts = vec![0usize; g * g + 1];
        let cells: Vec<usize> = sites.iter().map(|p| Self::cell_of(g, p)).collect();
        for &c in &cells {
            counts[c + 1] += 1;
        }
        for i in 0..g * g {
            counts[i + 1] += counts[i];
        }
        let start = counts.clone();
        let mut fill = counts;
        let mut members = vec![0; sites.len()];
        for (i, &c) in cells.iter().enumerate() {
            members[fill[c]] = i;
            fill[c] += 1;
        }
        Self {
            g,
            sites,
            start,
            members,
        }
    }

    fn axis_cell(g: usize, u: T) -> usize {
        let c = (u * T::of_usize(g)).floor().to_usize().unwrap_or(0);
        c.min(g - 1)
    }

    fn cell_of(g: usize, p: &[T; 2]) -> usize {
        Self::axis_cell(g, p[0]) * g + Self::axis_cell(g, p[1])
    }

    pub fn sites(&self) -> &[[T; 2]] {
        &self.sites
    }

    pub fn knn(&self, x: &[T; 2], k: usize) -> Result<Vec<T>> {
        check_k(&self.sites, k)?;
        let g = self.g as isize;
        let (cx, cy) = (
            Self::axis_cell(self.g, x[0]) as isize,
            Self::axis_cell(self.g, x[1]) as isize,
        );
        let h = T::of_usize(self.g).recip();
        let mut best = Best::new(k);
        let mut r: isize = 0;
        loop {
            if 2 * r + 1 > g {
                // rings would wrap onto cells already visited
                best.clear();
                for (i, s) in self.sites.iter().enumerate() {
                    best.offer(FlatTorus2D::distance_sq(x, s), i);
                }
                break;
            }
            for dx in -r..=r {
                for dy in -r..=r {
                    if dx.abs() != r && dy.abs() != r {
                        continue;
                    }
                    let c = ((cx + dx).rem_euclid(g) * g + (cy + dy).rem_euclid(g)) as usize;
                    for &i in &self.members[self.start[c]..self.start[c + 1]] {
                        best.offer(FlatTorus2D::distance_sq(x, &self.sites[i]), i);
                    }
                }
            }
            // sites outside rings 0..=r are at least r·h away along some axis
            let reach = T::of_usize(r as usize) * h * (T::one() - T::lit(1e-9));
            if let Some(w) = best.worst() {
                if w < reach * reach {
                    break;
                }
            }
            r += 1;
        }
        Ok(best.keys().map(|p| p.sqrt()).collect())
    }
}
