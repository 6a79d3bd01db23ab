//! Suprema of oscillatory integrals over subintervals, via prefix curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::spectral::{C64, ZERO};

pub const MAX_GRID: usize = 4096;

/// Sorted breakpoints `t_0 < … < t_G`; subintervals `S` range over pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalGrid {
    breakpoints: Vec<f64>,
}

impl IntervalGrid {
    pub fn new(mut breakpoints: Vec<f64>) -> Result<Self> {
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        if breakpoints.len() < 2 || breakpoints.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("grid needs at least two finite breakpoints"));
        }
        if breakpoints.len() - 1 > MAX_GRID {
            return Err(Error::domain(format!(
                "grid has {} intervals, limit is {MAX_GRID}",
                breakpoints.len() - 1
            )));
        }
        Ok(IntervalGrid { breakpoints })
    }

    /// `g` equal intervals on `[t0, t1]`.
    pub fn uniform(t0: f64, t1: f64, g: usize) -> Result<Self> {
        Self::new(crate::potential::uniform_nodes(t0, t1, g))
    }

    /// Uniform grid merged with the potential's nodes inside `[t0, t1]`.
    pub fn for_potential(pot: &PotentialModel, t0: f64, t1: f64, g: usize) -> Result<Self> {
        let mut b = crate::potential::uniform_nodes(t0, t1, g);
        b.extend(pot.breakpoints_in(t0, t1));
        Self::new(b)
    }

    /// Inserts `factor - 1` equispaced points into every interval.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let factor = factor.max(1);
        let mut b = Vec::with_capacity(self.intervals() * factor + 1);
        for w in self.breakpoints.windows(2) {
            for i in 0..factor {
                b.push(w[0] + (w[1] - w[0]) * i as f64 / factor as f64);
            }
        }
        b.push(*self.breakpoints.last().unwrap());
        Self::new(b)
    }

    pub fn points(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Number of intervals `G`.
    pub fn intervals(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }
}

/// `prefix[i] = ∫_{t_0}^{t_i} V̂_l(t) e^{iωt} dt`, exact cell by cell.
pub fn prefix_curve(pot: &PotentialModel, l: i64, omega: f64, grid: &IntervalGrid) -> Vec<C64> {
    let mut out = Vec::with_capacity(grid.points().len());
    let mut acc = ZERO;
    out.push(acc);
    for w in grid.points().windows(2) {
        acc += pot.integrate_mode(l, omega, w[0], w[1]);
        out.push(acc);
    }
    out
}

fn cross(o: C64, a: C64, b: C64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Convex hull in counter-clockwise order (monotone chain), collinear points dropped.
pub fn convex_hull(points: &[C64]) -> Vec<C64> {
    let mut p: Vec<C64> = points.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup();
    if p.len() <= 2 {
        return p;
    }
    let mut hull: Vec<C64> = Vec::with_capacity(2 * p.len());
    for &pt in &p {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0.0 {
            hull.pop();
        }
        hull.push(pt);
    }
    let lower = hull.len() + 1;
    for &pt in p.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0.0
        {
            hull.pop();
        }
        hull.push(pt);
    }
    hull.pop();
    hull
}

/// Largest pairwise distance, by rotating calipers on the hull.
pub fn diameter(points: &[C64]) -> f64 {
    let h = convex_hull(points);
    match h.len() {
        0 | 1 => 0.0,
        2 => (h[0] - h[1]).norm(),
        n => {
            let mut best = 0.0f64;
            let mut j = 1;
            for i in 0..n {
                let ni = (i + 1) % n;
                // advance j while the triangle area grows
                loop {
                    let nj = (j + 1) % n;
                    if cross(h[i], h[ni], h[nj]).abs() > cross(h[i], h[ni], h[j]).abs() {
                        j = nj;
                    } else {
                        break;
                    }
                }
                best = best.max((h[i] - h[j]).norm()).max((h[ni] - h[j]).norm());
            }
            best
        }
    }
}

/// `sup_S |∫_S V̂_l(t) e^{ikt} dt|` over subintervals with grid endpoints.
pub fn carleson_q(pot: &PotentialModel, l: i64, k: f64, grid: &IntervalGrid) -> f64 {
    diameter(&prefix_curve(pot, l, k, grid))
}
