//! Geometry of the block construction: diamonds, the block event and the
//! orthant / lateral-face statistics that the square-root trick relates.

use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::envmodel::{Environment, EnvironmentLaw, QuenchedEnvironment};
use crate::error::{Error, Result};
use crate::lattice::{box_sites, check_dim, cube_sites, Site};
use crate::particles::{Configuration, FaceCounts, Simulation, TruncationBox};
use crate::rng::derive_seed;
use crate::stats::McEstimate;

/// `A_n = {x : |x|_1 <= n, sum_i x_i even}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diamond {
    pub n: u32,
    pub dim: usize,
    /// Sites in lexicographic order.
    pub sites: Vec<Site>,
}

pub fn diamond(n: u32, dim: usize) -> Result<Diamond> {
    check_dim(dim)?;
    let r = n as i32;
    let sites = cube_sites(dim, -r, r)
        .into_iter()
        .filter(|x| x.l1() <= n as i64 && x.coord_sum().rem_euclid(2) == 0)
        .collect();
    Ok(Diamond { n, dim, sites })
}

impl Diamond {
    /// One particle per site.
    pub fn configuration(&self) -> Configuration {
        Configuration::from_sites(&self.sites)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

/// Anything that answers site membership.
pub trait SiteSet {
    fn has(&self, x: &Site) -> bool;
}

impl SiteSet for Configuration {
    fn has(&self, x: &Site) -> bool {
        self.is_occupied(x)
    }
}

impl SiteSet for FxHashSet<Site> {
    fn has(&self, x: &Site) -> bool {
        self.contains(x)
    }
}

/// `x + A_n` is contained in the occupied set.
pub fn contains_translate<S: SiteSet + ?Sized>(occupied: &S, x: &Site, diamond: &Diamond) -> bool {
    diamond.sites.iter().all(|a| occupied.has(&x.add(a)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockEventSpec {
    pub n: u32,
    pub l: u32,
    pub t: u32,
    pub dim: usize,
    /// Per-site clip applied to the process (see [`crate::particles::RunSpec::site_cap`]).
    pub site_cap: Option<u64>,
}

/// Default per-site clip for block events.
pub const BLOCK_SITE_CAP: u64 = 64;

impl BlockEventSpec {
    pub fn new(n: u32, l: u32, t: u32, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if l == 0 || t == 0 {
            return Err(Error::Domain("block event needs L >= 1 and T >= 1".into()));
        }
        if n > l {
            return Err(Error::Domain(format!("block event needs n <= L, got n={n}, L={l}")));
        }
        Ok(BlockEventSpec {
            n,
            l,
            t,
            dim,
            site_cap: Some(BLOCK_SITE_CAP),
        })
    }

    pub fn site_cap(mut self, site_cap: Option<u64>) -> Self {
        self.site_cap = site_cap;
        self
    }

    /// Truncation half-width `2L + 2n`.
    pub fn box_size(&self) -> i64 {
        2 * self.l as i64 + 2 * self.n as i64
    }

    /// `{L+n..2L+n} x {0..2L}^{d-1}` in lexicographic order.
    pub fn slab(&self) -> Vec<Site> {
        let (n, l) = (self.n as i32, self.l as i32);
        let mut ranges = vec![(l + n, 2 * l + n)];
        ranges.extend(std::iter::repeat_n((0, 2 * l), self.dim - 1));
        box_sites(&ranges)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockEventResult {
    pub occurred: bool,
    pub witness: Option<(Site, u32)>,
}

/// Runs the process from `A_n` in `{-(2L+2n)..2L+2n}^d` up to time `2T` and
/// looks for the first `(t, x)`, `t` in `T..=2T` and `x` in the slab, with
/// `x + A_n` occupied at time `t`.
pub fn block_event<E: Environment + ?Sized>(
    env: &E,
    spec: &BlockEventSpec,
    master_seed: u64,
) -> Result<BlockEventResult> {
    if env.dim() != spec.dim {
        return Err(Error::Domain("environment and block spec dimensions differ".into()));
    }
    let a_n = diamond(spec.n, spec.dim)?;
    let slab = spec.slab();
    let mut sim = Simulation::new(
        env,
        a_n.configuration(),
        TruncationBox::CenteredCube(spec.box_size()),
        spec.site_cap,
        master_seed,
    )?;
    loop {
        let t = sim.time();
        if sim.current().is_empty() || t > 2 * spec.t {
            return Ok(BlockEventResult {
                occurred: false,
                witness: None,
            });
        }
        if t >= spec.t {
            if let Some(x) = slab.iter().find(|x| contains_translate(sim.current(), x, &a_n)) {
                return Ok(BlockEventResult {
                    occurred: true,
                    witness: Some((*x, t)),
                });
            }
        }
        sim.advance();
    }
}

/// Annealed block-event probability: replica `i` uses environment seed
/// `derive_seed(master, "block-env", i)` and dynamics seed
/// `derive_seed(master, "block-dyn", i)`.
pub fn block_event_probability(
    law: &EnvironmentLaw,
    spec: &BlockEventSpec,
    replicas: usize,
    master_seed: u64,
) -> Result<(McEstimate, Vec<BlockEventResult>)> {
    let results = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let env = QuenchedEnvironment::new(law.clone(), derive_seed(master_seed, "block-env", i), spec.dim)?;
            block_event(&env, spec, derive_seed(master_seed, "block-dyn", i))
        })
        .collect::<Result<Vec<_>>>()?;
    let occurred: Vec<bool> = results.iter().map(|r| r.occurred).collect();
    Ok((McEstimate::bernoulli(&occurred), results))
}

/// Per-replica statistics of the process from `A_n` truncated to `{-L..L}^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrthantRow {
    pub replica: u64,
    /// `|_L eta_{t_top}|`.
    pub total: u64,
    pub occupied: u64,
    /// Restriction to the orthant `{0..L}^d`.
    pub orthant_total: u64,
    pub orthant_occupied: u64,
    pub faces: FaceCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthantTable {
    pub dim: usize,
    pub n: u32,
    pub l: u32,
    pub t_top: u32,
    pub t_face: u32,
    pub rows: Vec<OrthantRow>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct OrthantOptions {
    pub site_cap: Option<u64>,
}

fn in_positive_orthant(x: &Site, dim: usize) -> bool {
    (0..dim).all(|i| x.coord(i) >= 0)
}

/// Orthant and face statistics on one environment.
#[allow(clippy::too_many_arguments)]
pub fn orthant_row<E: Environment + ?Sized>(
    env: &E,
    n: u32,
    l: u32,
    t_top: u32,
    t_face: u32,
    options: &OrthantOptions,
    master_seed: u64,
    replica: u64,
) -> Result<OrthantRow> {
    if l <= n {
        return Err(Error::Domain(format!("orthant statistics need L > n, got L={l}, n={n}")));
    }
    let dim = env.dim();
    let a_n = diamond(n, dim)?;
    let li = l as i64;
    let mut sim = Simulation::new(
        env,
        a_n.configuration(),
        TruncationBox::CenteredCube(li),
        options.site_cap,
        master_seed,
    )?;
    let mut faces = FaceCounts::default();
    let mut row = OrthantRow {
        replica,
        total: 0,
        occupied: 0,
        orthant_total: 0,
        orthant_occupied: 0,
        faces,
    };
    let horizon = t_top.max(t_face);
    loop {
        let t = sim.time();
        let field = sim.current();
        if t <= t_face {
            faces.accumulate(field, li, dim);
        }
        if t == t_top {
            row.total = field.total();
            row.occupied = field.occupied();
            for (x, &c) in field.iter() {
                if in_positive_orthant(x, dim) {
                    row.orthant_total += c;
                    row.orthant_occupied += 1;
                }
            }
        }
        if t >= horizon || field.is_empty() {
            break;
        }
        sim.advance();
    }
    row.faces = faces;
    Ok(row)
}

/// Annealed table over `replicas` fresh environments.
#[allow(clippy::too_many_arguments)]
pub fn orthant_statistics(
    law: &EnvironmentLaw,
    dim: usize,
    n: u32,
    l: u32,
    t_top: u32,
    t_face: u32,
    options: &OrthantOptions,
    master_seed: u64,
    replicas: usize,
) -> Result<OrthantTable> {
    check_dim(dim)?;
    let rows = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let env = QuenchedEnvironment::new(law.clone(), derive_seed(master_seed, "orthant-env", i), dim)?;
            orthant_row(&env, n, l, t_top, t_face, options, derive_seed(master_seed, "orthant-dyn", i), i)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrthantTable {
        dim,
        n,
        l,
        t_top,
        t_face,
        rows,
    })
}

/// One comparison `P(X <= a)^k <= P(Y <= a k)` with Monte Carlo errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub threshold: u64,
    pub exponent: u32,
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    pub pass: bool,
}

fn power_check(
    name: &str,
    small: &[u64],
    large: &[u64],
    threshold: u64,
    exponent: u32,
) -> InequalityCheck {
    let n = small.len() as f64;
    let p = small.iter().filter(|&&v| v <= threshold).count() as f64 / n;
    let big = threshold * exponent as u64;
    let q = large.iter().filter(|&&v| v <= big).count() as f64 / n;
    let se_p = (p * (1.0 - p) / n).sqrt();
    let se_q = (q * (1.0 - q) / n).sqrt();
    let k = exponent as i32;
    let lhs = p.powi(k);
    // delta method
    let lhs_se = k as f64 * p.powi(k - 1) * se_p;
    let margin = 3.0 * (lhs_se * lhs_se + se_q * se_q).sqrt();
    InequalityCheck {
        name: name.to_string(),
        threshold,
        exponent,
        lhs,
        lhs_se,
        rhs: q,
        rhs_se: se_q,
        pass: lhs <= q + margin,
    }
}

/// `P(|orthant| <= N)^{2^d} <= P(|total| <= N 2^d)` for particles and occupied sites.
pub fn square_root_trick_checks(table: &OrthantTable, thresholds: &[u64]) -> Vec<InequalityCheck> {
    let k = 1u32 << table.dim;
    let col = |f: fn(&OrthantRow) -> u64| table.rows.iter().map(f).collect::<Vec<_>>();
    let (ot, tt) = (col(|r| r.orthant_total), col(|r| r.total));
    let (oo, to) = (col(|r| r.orthant_occupied), col(|r| r.occupied));
    let mut out = Vec::new();
    for &nn in thresholds {
        out.push(power_check("orthant-particles", &ot, &tt, nn, k));
        out.push(power_check("orthant-occupied", &oo, &to, nn, k));
    }
    out
}

/// `P(N_+ <= M)^{d 2^d} <= P(N <= M d 2^d)` for particles and occupied sites.
pub fn face_checks(table: &OrthantTable, thresholds: &[u64]) -> Vec<InequalityCheck> {
    let k = table.dim as u32 * (1u32 << table.dim);
    let col = |f: fn(&OrthantRow) -> u64| table.rows.iter().map(f).collect::<Vec<_>>();
    let (pp, pf) = (
        col(|r| r.faces.particles_on_positive_orthant_face),
        col(|r| r.faces.particles_on_face),
    );
    let (op, of) = (
        col(|r| r.faces.occupied_on_positive_orthant_face),
        col(|r| r.faces.occupied_on_face),
    );
    let mut out = Vec::new();
    for &m in thresholds {
        out.push(power_check("face-particles", &pp, &pf, m, k));
        out.push(power_check("face-occupied", &op, &of, m, k));
    }
    out
}
