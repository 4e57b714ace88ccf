use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 4;

/// A point of Z^d, `d <= MAX_DIM`. Unused trailing coordinates are zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Site {
    coords: [i32; MAX_DIM],
}

impl Site {
    pub const ORIGIN: Site = Site { coords: [0; MAX_DIM] };

    pub fn new(coords: &[i32]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::Domain(format!(
                "site must have between 1 and {MAX_DIM} coordinates, got {}",
                coords.len()
            )));
        }
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Site { coords: c })
    }

    /// The unit vector `e_i` (0-based axis).
    pub fn unit(axis: usize) -> Self {
        let mut c = [0; MAX_DIM];
        c[axis] = 1;
        Site { coords: c }
    }

    #[inline]
    pub fn coord(&self, i: usize) -> i32 {
        self.coords[i]
    }

    #[inline]
    pub fn coords(&self, dim: usize) -> &[i32] {
        &self.coords[..dim]
    }

    #[inline]
    pub fn add(&self, other: &Site) -> Site {
        let mut c = self.coords;
        for (a, b) in c.iter_mut().zip(other.coords.iter()) {
            *a += *b;
        }
        Site { coords: c }
    }

    #[inline]
    pub fn sub(&self, other: &Site) -> Site {
        let mut c = self.coords;
        for (a, b) in c.iter_mut().zip(other.coords.iter()) {
            *a -= *b;
        }
        Site { coords: c }
    }

    pub fn scale(&self, k: i32) -> Site {
        let mut c = self.coords;
        c.iter_mut().for_each(|a| *a *= k);
        Site { coords: c }
    }

    #[inline]
    pub fn l1(&self) -> i64 {
        self.coords.iter().map(|&a| (a as i64).abs()).sum()
    }

    #[inline]
    pub fn linf(&self) -> i64 {
        self.coords.iter().map(|&a| (a as i64).abs()).max().unwrap_or(0)
    }

    #[inline]
    pub fn coord_sum(&self) -> i64 {
        self.coords.iter().map(|&a| a as i64).sum()
    }

    /// Neighbour `direction` of `2d`: direction `2i` is `+e_i`, `2i+1` is `-e_i`.
    #[inline]
    pub fn step(&self, direction: usize) -> Site {
        let mut c = self.coords;
        let axis = direction >> 1;
        if direction & 1 == 0 {
            c[axis] += 1;
        } else {
            c[axis] -= 1;
        }
        Site { coords: c }
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}

/// Checks that `dim` is supported.
pub fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        Err(Error::Domain(format!(
            "dimension must be in 1..={MAX_DIM}, got {dim}"
        )))
    } else {
        Ok(())
    }
}

/// All sites of the cube `{lo..=hi}^d` in lexicographic order.
pub fn cube_sites(dim: usize, lo: i32, hi: i32) -> Vec<Site> {
    box_sites(&vec![(lo, hi); dim])
}

/// All sites of the box `prod_i {lo_i..=hi_i}` in lexicographic order.
pub fn box_sites(ranges: &[(i32, i32)]) -> Vec<Site> {
    let mut out = Vec::new();
    if ranges.iter().any(|&(lo, hi)| lo > hi) {
        return out;
    }
    let mut cur: Vec<i32> = ranges.iter().map(|r| r.0).collect();
    loop {
        out.push(Site::new(&cur).expect("dimension checked by caller"));
        let mut i = ranges.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < ranges[i].1 {
                cur[i] += 1;
                for (j, c) in cur.iter_mut().enumerate().skip(i + 1) {
                    *c = ranges[j].0;
                }
                break;
            }
        }
    }
}
