//! Oracles that share no code with the library's engines.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use brwre::{Environment, EnvironmentLaw, Site};

/// Smallest root in `[0, 1]` of `f(s) = s` for the generating function of
/// `pmf`, by bisection on `f(s) - s`.
pub fn extinction_probability(pmf: &[f64]) -> f64 {
    let f = |s: f64| pmf.iter().rev().fold(0.0, |acc, p| acc * s + p);
    let g = |s: f64| f(s) - s;
    let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    if mean <= 1.0 {
        return 1.0;
    }
    // g(0) = p0 >= 0 and g < 0 just below 1 in the supercritical case.
    let mut hi = 1.0 - 1e-3;
    while g(hi) >= 0.0 {
        hi = 1.0 - (1.0 - hi) / 2.0;
    }
    let mut lo = 0.0;
    if g(lo) == 0.0 {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `log Z_t` by explicit enumeration of the `(2d)^t` nearest-neighbour paths.
pub fn log_z_by_paths<E: Environment>(env: &E, t: u32) -> f64 {
    let dim = env.dim();
    let moves = 2 * dim;
    let paths = (moves as u64).pow(t);
    let mut sum = 0.0;
    for code in 0..paths {
        let mut c = code;
        let mut x = vec![0i32; dim];
        let mut w = 1.0;
        for u in 0..t {
            w *= env.mean_at(u, &Site::new(&x).unwrap());
            let m = (c % moves as u64) as usize;
            c /= moves as u64;
            x[m / 2] += if m.is_multiple_of(2) { 1 } else { -1 };
        }
        sum += w;
    }
    (sum / paths as f64).ln()
}

/// A particle system kept as a sorted map with a `ChaCha8` stream. The
/// environment is drawn lazily per space-time site.
pub struct NaiveBrw {
    pub dim: usize,
    weights: Vec<f64>,
    pmfs: Vec<Vec<f64>>,
    env: HashMap<(u32, Vec<i32>), usize>,
    rng: ChaCha8Rng,
    pub t: u32,
    pub sites: BTreeMap<Vec<i32>, u64>,
    /// Half-width of the truncation cube.
    pub half_width: Option<i32>,
    pub site_cap: Option<u64>,
}

impl NaiveBrw {
    pub fn new(components: &[(f64, Vec<f64>)], dim: usize, seed: u64) -> Self {
        NaiveBrw {
            dim,
            weights: components.iter().map(|c| c.0).collect(),
            pmfs: components.iter().map(|c| c.1.clone()).collect(),
            env: HashMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            t: 0,
            sites: BTreeMap::new(),
            half_width: None,
            site_cap: None,
        }
    }

    pub fn place(&mut self, x: Vec<i32>, n: u64) {
        *self.sites.entry(x).or_insert(0) += n;
    }

    fn draw_index(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probs.len() - 1
    }

    pub fn total(&self) -> u64 {
        self.sites.values().sum()
    }

    pub fn step(&mut self) {
        let mut next: BTreeMap<Vec<i32>, u64> = BTreeMap::new();
        let sites = std::mem::take(&mut self.sites);
        for (x, n) in sites {
            let comp = match self.env.get(&(self.t, x.clone())) {
                Some(&c) => c,
                None => {
                    let c = Self::draw_index(&mut self.rng, &self.weights);
                    self.env.insert((self.t, x.clone()), c);
                    c
                }
            };
            for _ in 0..n {
                let children = Self::draw_index(&mut self.rng, &self.pmfs[comp]) as u64;
                let dir = self.rng.gen_range(0..2 * self.dim);
                if children == 0 {
                    continue;
                }
                let mut y = x.clone();
                y[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
                if let Some(h) = self.half_width {
                    if y.iter().any(|c| c.abs() > h) {
                        continue;
                    }
                }
                *next.entry(y).or_insert(0) += children;
            }
        }
        if let Some(cap) = self.site_cap {
            for v in next.values_mut() {
                *v = (*v).min(cap);
            }
        }
        self.sites = next;
        self.t += 1;
    }
}

/// Diamond of radius `n` in dimension `dim`, built by brute force.
pub fn naive_diamond(n: i32, dim: usize) -> Vec<Vec<i32>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| (-n..=n).map(move |c| [p.clone(), vec![c]].concat()))
            .collect();
    }
    out.retain(|x| x.iter().map(|c| c.abs()).sum::<i32>() <= n && x.iter().sum::<i32>() % 2 == 0);
    out
}

/// The block event for the naive engine: start from the diamond, run in the
/// cube of half-width `2L + 2n`, look for a translated diamond in the slab
/// during `T..=2T`.
pub fn naive_block_event(components: &[(f64, Vec<f64>)], dim: usize, n: i32, l: i32, t: u32, site_cap: u64, seed: u64) -> bool {
    let a = naive_diamond(n, dim);
    let mut sim = NaiveBrw::new(components, dim, seed);
    sim.half_width = Some(2 * l + 2 * n);
    sim.site_cap = Some(site_cap);
    for x in &a {
        sim.place(x.clone(), 1);
    }
    let mut slab: Vec<Vec<i32>> = (l + n..=2 * l + n).map(|c| vec![c]).collect();
    for _ in 1..dim {
        slab = slab
            .into_iter()
            .flat_map(|p| (0..=2 * l).map(move |c| [p.clone(), vec![c]].concat()))
            .collect();
    }
    loop {
        if sim.sites.is_empty() || sim.t > 2 * t {
            return false;
        }
        if sim.t >= t {
            let hit = slab.iter().any(|x| {
                a.iter().all(|d| {
                    let y: Vec<i32> = x.iter().zip(d).map(|(p, q)| p + q).collect();
                    sim.sites.contains_key(&y)
                })
            });
            if hit {
                return true;
            }
        }
        sim.step();
    }
}

pub fn law(components: &[(f64, Vec<f64>)]) -> EnvironmentLaw {
    EnvironmentLaw::new(components.to_vec()).unwrap()
}

/// Frozen lower bound for the binary-splitting block event (`d = 1`, `n = 4`,
/// `L = 12`, `T = 40`). Calibrated on [`naive_block_event`]: 300/300 runs
/// succeed, Wilson lower bound 0.987.
pub const BLOCK_EVENT_THRESHOLD: f64 = 0.9;
