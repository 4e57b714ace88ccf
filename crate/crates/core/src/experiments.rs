//! Monte Carlo experiments: survival proxies, coupled rho-sweeps, FKG tests
//! and the finite-scale diagnostic curves.
//!
//! Replica `i` of an experiment tagged `tag` uses the environment seed
//! `derive_seed(master, "<tag>-env", i)` and the dynamics seed
//! `derive_seed(master, "<tag>-dyn", i)`; results are collected in replica
//! order, so nothing depends on scheduling.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envmodel::{validate, EnvironmentLaw, QuenchedEnvironment};
use crate::error::{Error, Result};
use crate::lattice::{box_sites, check_dim, Site};
use crate::particles::{
    run, run_truncation_chain, Configuration, RunSpec, Simulation, TruncationBox,
};
use crate::polymer::{free_energy, FreeEnergyEstimate, FreeEnergyMethod};
use crate::renorm::{contains_translate, diamond};
use crate::rng::derive_seed;
use crate::stats::{covariance_and_se, McEstimate};

/// Annealed draws a fresh environment per replica; quenched keeps one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase", tag = "mode", content = "env_seed")]
pub enum Sampling {
    #[default]
    Annealed,
    Quenched(u64),
}

fn replica_seeds(master: u64, tag: &str, i: u64, sampling: Sampling) -> (u64, u64) {
    let env = match sampling {
        Sampling::Annealed => derive_seed(master, &format!("{tag}-env"), i),
        Sampling::Quenched(s) => s,
    };
    (env, derive_seed(master, &format!("{tag}-dyn"), i))
}

/// Outcome of one survival replica.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReplicaOutcome {
    pub replica: u64,
    pub tau: Option<u32>,
    pub capped: bool,
    pub final_total: u64,
    pub final_occupied: u64,
}

impl ReplicaOutcome {
    pub fn survived(&self) -> bool {
        self.tau.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalParams {
    pub dim: usize,
    pub horizon: u32,
    pub cap: u64,
    pub replicas: usize,
    pub sampling: Sampling,
}

/// Fraction of replicas alive at the horizon or capped.
pub fn survival_probability(
    law: &EnvironmentLaw,
    initial: &Configuration,
    params: &SurvivalParams,
    master_seed: u64,
) -> Result<(McEstimate, Vec<ReplicaOutcome>)> {
    check_dim(params.dim)?;
    if initial.is_empty() {
        return Err(Error::Domain(
            "empty initial configuration has tau = 0 and is excluded from survival statistics".into(),
        ));
    }
    if params.replicas == 0 {
        return Err(Error::Domain("need at least one replica".into()));
    }
    let spec = RunSpec::new(params.horizon).cap(params.cap).keep_fields(false);
    let outcomes = replica_outcomes("survival", law, initial, &spec, params, master_seed)?;
    let flags: Vec<bool> = outcomes.iter().map(|o| o.survived()).collect();
    Ok((McEstimate::bernoulli(&flags), outcomes))
}

fn replica_outcomes(
    tag: &str,
    law: &EnvironmentLaw,
    initial: &Configuration,
    spec: &RunSpec,
    params: &SurvivalParams,
    master_seed: u64,
) -> Result<Vec<ReplicaOutcome>> {
    (0..params.replicas as u64)
        .into_par_iter()
        .map(|i| {
            let (es, ds) = replica_seeds(master_seed, tag, i, params.sampling);
            let env = QuenchedEnvironment::new(law.clone(), es, params.dim)?;
            let tr = run(&env, initial, spec, ds)?;
            Ok(ReplicaOutcome {
                replica: i,
                tau: tr.tau,
                capped: tr.capped,
                final_total: tr.final_total(),
                final_occupied: tr.final_occupied(),
            })
        })
        .collect()
}

/// Independent runs of the (possibly truncated) process. Horizon and cap
/// come from `spec`; only the dimension, replica count and sampling mode are
/// read from `params`.
pub fn simulate(
    law: &EnvironmentLaw,
    initial: &Configuration,
    spec: &RunSpec,
    params: &SurvivalParams,
    master_seed: u64,
) -> Result<Vec<ReplicaOutcome>> {
    check_dim(params.dim)?;
    let spec = spec.clone().keep_fields(false);
    replica_outcomes("simulate", law, initial, &spec, params, master_seed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepParams {
    pub dim: usize,
    pub horizon: u32,
    pub cap: u64,
    pub replicas: usize,
    /// Polymer time used for the free-energy estimate.
    pub t_polymer: u32,
    pub polymer_replicas: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rho_grid: Vec<f64>,
    pub survival_proxy: Vec<McEstimate>,
    pub psi_hat: FreeEnergyEstimate,
    /// `exp(-psi_hat)`, or 1 when `psi_hat <= 0`.
    pub rho_c_predicted: f64,
    pub warnings: Vec<String>,
    /// `survived[replica][grid index]`.
    #[serde(skip)]
    pub survived: Vec<Vec<bool>>,
}

/// Survival proxy of `law^rho` over an increasing grid of `rho`, coupled
/// across `rho`: replica `i` uses the same environment seed and dynamics
/// streams at every grid point, so its proxy is nondecreasing in `rho`.
pub fn rho_sweep(
    law: &EnvironmentLaw,
    initial: &Configuration,
    rho_grid: &[f64],
    params: &SweepParams,
    master_seed: u64,
) -> Result<SweepResult> {
    check_dim(params.dim)?;
    if rho_grid.is_empty() || rho_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("rho grid must be nonempty and strictly increasing".into()));
    }
    if initial.is_empty() {
        return Err(Error::Domain("empty initial configuration".into()));
    }
    let report = validate(law);
    if !report.hyp1_ok {
        return Err(Error::Hyp1(report.messages.join("; ")));
    }
    let mut warnings = Vec::new();
    if !report.hyp2_ok {
        warnings.push(format!("law fails the non-degeneracy assumption: {}", report.messages.join("; ")));
    }
    let laws = rho_grid
        .iter()
        .map(|&r| law.perturb(r))
        .collect::<Result<Vec<_>>>()?;
    let psi_hat = free_energy(
        law,
        params.dim,
        params.t_polymer,
        params.polymer_replicas,
        derive_seed(master_seed, "sweep-polymer", 0),
        FreeEnergyMethod::Slope,
    )?;
    let rho_c_predicted = if psi_hat.psi_hat > 0.0 {
        (-psi_hat.psi_hat).exp()
    } else {
        warnings.push(format!(
            "estimated free energy {} is not positive; predicted critical rho set to 1",
            psi_hat.psi_hat
        ));
        1.0
    };
    let spec = RunSpec::new(params.horizon).cap(params.cap).keep_fields(false);
    let survived = (0..params.replicas as u64)
        .into_par_iter()
        .map(|i| {
            let (es, ds) = replica_seeds(master_seed, "sweep", i, Sampling::Annealed);
            let row = laws
                .iter()
                .map(|l| {
                    let env = QuenchedEnvironment::new(l.clone(), es, params.dim)?;
                    Ok(run(&env, initial, &spec, ds)?.survived())
                })
                .collect::<Result<Vec<bool>>>()?;
            if let Some(j) = row.windows(2).position(|w| w[0] && !w[1]) {
                return Err(Error::CouplingViolation {
                    t: params.horizon,
                    detail: format!(
                        "replica {i} survives at rho={} but not at rho={}",
                        rho_grid[j],
                        rho_grid[j + 1]
                    ),
                });
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let survival_proxy = (0..rho_grid.len())
        .map(|j| McEstimate::bernoulli(&survived.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect();
    Ok(SweepResult {
        rho_grid: rho_grid.to_vec(),
        survival_proxy,
        psi_hat,
        rho_c_predicted,
        warnings,
        survived,
    })
}

/// The closed catalog of nondecreasing functionals of the particle field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Functional {
    /// `|eta|`.
    TotalMass,
    /// Number of occupied sites.
    OccupiedCount,
    /// Indicator that a site is occupied.
    /// `dim` is the number of coordinates as written.
    SiteOccupied { site: Site, dim: usize },
    /// Particles with `x_axis >= threshold`.
    HalfSpaceCount { axis: usize, threshold: i32 },
    /// `min(f, cap)`.
    Capped { inner: Box<Functional>, cap: u64 },
}

impl Functional {
    pub fn evaluate(&self, field: &Configuration) -> f64 {
        match self {
            Functional::TotalMass => field.total() as f64,
            Functional::OccupiedCount => field.occupied() as f64,
            Functional::SiteOccupied { site, .. } => field.is_occupied(site) as u8 as f64,
            Functional::HalfSpaceCount { axis, threshold } => field
                .iter()
                .filter(|(x, _)| x.coord(*axis) >= *threshold)
                .map(|(_, &n)| n as f64)
                .sum(),
            Functional::Capped { inner, cap } => inner.evaluate(field).min(*cap as f64),
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            Functional::HalfSpaceCount { axis, .. } if *axis >= dim => Err(Error::Domain(format!(
                "half-space axis {axis} out of range for dimension {dim}"
            ))),
            Functional::SiteOccupied { site, dim: n } if *n != dim => Err(Error::Domain(format!(
                "site {site:?} has {n} coordinates, dimension is {dim}"
            ))),
            Functional::Capped { inner, .. } => inner.check_dim(dim),
            _ => Ok(()),
        }
    }
}

fn parse_site(s: &str) -> Result<(Site, usize)> {
    let coords = s
        .split(',')
        .map(|c| c.trim().parse::<i32>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Domain(format!("bad site `{s}`")))?;
    Ok((Site::new(&coords)?, coords.len()))
}

impl FromStr for Functional {
    type Err = Error;

    /// `total`, `occupied`, `site:x1,..,xd`, `halfspace:axis:threshold`
    /// (axis 1-based) and `capped:C:<functional>`.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownFunctional(s.to_string());
        let s_trim = s.trim();
        match s_trim {
            "total" => return Ok(Functional::TotalMass),
            "occupied" => return Ok(Functional::OccupiedCount),
            _ => {}
        }
        let (head, rest) = s_trim.split_once(':').ok_or_else(unknown)?;
        match head {
            "site" => {
                let (site, dim) = parse_site(rest).map_err(|_| unknown())?;
                Ok(Functional::SiteOccupied { site, dim })
            }
            "halfspace" => {
                let (a, th) = rest.split_once(':').ok_or_else(unknown)?;
                let axis: usize = a.parse().map_err(|_| unknown())?;
                if axis == 0 || axis > crate::lattice::MAX_DIM {
                    return Err(unknown());
                }
                Ok(Functional::HalfSpaceCount {
                    axis: axis - 1,
                    threshold: th.parse().map_err(|_| unknown())?,
                })
            }
            "capped" => {
                let (c, inner) = rest.split_once(':').ok_or_else(unknown)?;
                Ok(Functional::Capped {
                    cap: c.parse().map_err(|_| unknown())?,
                    inner: Box::new(inner.parse().map_err(|_| unknown())?),
                })
            }
            _ => Err(unknown()),
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::TotalMass => write!(f, "total"),
            Functional::OccupiedCount => write!(f, "occupied"),
            Functional::SiteOccupied { site, dim } => {
                let c: Vec<String> = site.coords(*dim).iter().map(|v| v.to_string()).collect();
                write!(f, "site:{}", c.join(","))
            }
            Functional::HalfSpaceCount { axis, threshold } => {
                write!(f, "halfspace:{}:{threshold}", axis + 1)
            }
            Functional::Capped { inner, cap } => write!(f, "capped:{cap}:{inner}"),
        }
    }
}

/// The default functional catalog used by the FKG suite.
pub fn default_catalog(dim: usize) -> Vec<Functional> {
    let origin = Site::new(&vec![0; dim]).expect("dimension checked");
    vec![
        Functional::TotalMass,
        Functional::OccupiedCount,
        Functional::SiteOccupied { site: origin, dim },
        Functional::HalfSpaceCount { axis: 0, threshold: 1 },
        Functional::Capped {
            inner: Box::new(Functional::TotalMass),
            cap: 10,
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FkgReport {
    pub f: String,
    pub g: String,
    pub mean_f: f64,
    pub mean_g: f64,
    pub covariance: f64,
    pub std_error: f64,
    pub replicas: usize,
    /// `covariance >= -3 std_error`.
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FkgParams {
    pub dim: usize,
    pub t: u32,
    pub replicas: usize,
    pub sampling: Sampling,
}

/// Samples `eta_t^A` for every replica and tests every unordered pair
/// (including `f = g`) of `functionals`.
pub fn fkg_suite(
    law: &EnvironmentLaw,
    initial: &Configuration,
    functionals: &[Functional],
    params: &FkgParams,
    master_seed: u64,
) -> Result<Vec<FkgReport>> {
    check_dim(params.dim)?;
    for f in functionals {
        f.check_dim(params.dim)?;
    }
    if params.replicas < 2 {
        return Err(Error::Domain("FKG test needs at least 2 replicas".into()));
    }
    let values: Vec<Vec<f64>> = (0..params.replicas as u64)
        .into_par_iter()
        .map(|i| {
            let (es, ds) = replica_seeds(master_seed, "fkg", i, params.sampling);
            let env = QuenchedEnvironment::new(law.clone(), es, params.dim)?;
            let mut sim = Simulation::new(&env, initial.clone(), TruncationBox::None, None, ds)?;
            while sim.time() < params.t && !sim.current().is_empty() {
                sim.advance();
            }
            Ok(functionals.iter().map(|f| f.evaluate(sim.current())).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let column = |j: usize| values.iter().map(|v| v[j]).collect::<Vec<f64>>();
    let mut out = Vec::new();
    for a in 0..functionals.len() {
        for b in a..functionals.len() {
            let (fa, fb) = (column(a), column(b));
            let (cov, se) = covariance_and_se(&fa, &fb);
            out.push(FkgReport {
                f: functionals[a].to_string(),
                g: functionals[b].to_string(),
                mean_f: fa.iter().sum::<f64>() / fa.len() as f64,
                mean_g: fb.iter().sum::<f64>() / fb.len() as f64,
                covariance: cov,
                std_error: se,
                replicas: params.replicas,
                pass: cov >= -3.0 * se,
            });
        }
    }
    Ok(out)
}

/// One-sided test of `Cov(f(eta_t), g(eta_t)) >= 0`.
pub fn fkg_test(
    law: &EnvironmentLaw,
    initial: &Configuration,
    f: &Functional,
    g: &Functional,
    params: &FkgParams,
    master_seed: u64,
) -> Result<FkgReport> {
    let reports = fkg_suite(law, initial, &[f.clone(), g.clone()], params, master_seed)?;
    Ok(reports.into_iter().nth(1).expect("pair (f, g) is the second report"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsOptions {
    pub replicas: usize,
    pub cap: u64,
    /// (a) horizon of the conditional growth curve.
    pub growth_horizon: u32,
    /// (b) even radius `n` and the grid of initial particle numbers.
    pub fill_n: u32,
    pub fill_particles: Vec<u64>,
    /// (c) radii and horizon of the survival-vs-n curve.
    pub radius_grid: Vec<u32>,
    pub radius_horizon: u32,
    /// (d) time, threshold and box sizes of the saturation curve.
    pub saturation_t: u32,
    pub saturation_threshold: u64,
    pub saturation_sizes: Vec<i64>,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        DiagnosticsOptions {
            replicas: 1000,
            cap: crate::particles::DEFAULT_CAP,
            growth_horizon: 100,
            fill_n: 2,
            fill_particles: vec![0, 1, 2, 4, 8, 16, 32],
            radius_grid: vec![0, 2, 4, 6, 8],
            radius_horizon: 100,
            saturation_t: 20,
            saturation_threshold: 10,
            saturation_sizes: vec![1, 2, 4, 8, 16, 32],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthPoint {
    pub t: u32,
    /// Mean of `|eta_t|` over replicas alive at the horizon that were still
    /// being simulated at `t` (capped runs stop early).
    pub mean_total: f64,
    pub replicas: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub estimate: McEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub growth: Vec<GrowthPoint>,
    pub fill: Vec<CurvePoint>,
    pub radius: Vec<CurvePoint>,
    pub saturation: Vec<CurvePoint>,
}

fn bernoulli_columns(rows: &[Vec<bool>], xs: impl IntoIterator<Item = f64>) -> Vec<CurvePoint> {
    xs.into_iter()
        .enumerate()
        .map(|(j, x)| CurvePoint {
            x,
            estimate: McEstimate::bernoulli(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()),
        })
        .collect()
}

fn assert_monotone(rows: &[Vec<bool>], what: &str) -> Result<()> {
    for (i, r) in rows.iter().enumerate() {
        if let Some(j) = r.windows(2).position(|w| w[0] && !w[1]) {
            return Err(Error::CouplingViolation {
                t: 0,
                detail: format!("{what}: replica {i} not monotone at grid index {j}"),
            });
        }
    }
    Ok(())
}

/// (a) `E[|eta_t| | tau > horizon]` from a single particle at the origin.
pub fn growth_curve(
    law: &EnvironmentLaw,
    dim: usize,
    options: &DiagnosticsOptions,
    master_seed: u64,
) -> Result<Vec<GrowthPoint>> {
    let origin = Configuration::single(Site::new(&vec![0; dim])?, 1);
    let spec = RunSpec::new(options.growth_horizon).cap(options.cap).keep_fields(false);
    let totals: Vec<Option<Vec<u64>>> = (0..options.replicas as u64)
        .into_par_iter()
        .map(|i| {
            let (es, ds) = replica_seeds(master_seed, "growth", i, Sampling::Annealed);
            let env = QuenchedEnvironment::new(law.clone(), es, dim)?;
            let tr = run(&env, &origin, &spec, ds)?;
            Ok(tr.survived().then_some(tr.totals))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..=options.growth_horizon)
        .map(|t| {
            let vals: Vec<f64> = totals
                .iter()
                .flatten()
                .filter_map(|v| v.get(t as usize).map(|&n| n as f64))
                .collect();
            GrowthPoint {
                t,
                mean_total: if vals.is_empty() { f64::NAN } else { vals.iter().sum::<f64>() / vals.len() as f64 },
                replicas: vals.len(),
            }
        })
        .collect())
}

/// (b) `P(n e_1 + A_n within the occupied set at time 2n)` for `N` particles
/// started at the origin in `B_n = {0..2n} x {-n..n}^{d-1}`, coupled in `N`.
pub fn fill_curve(
    law: &EnvironmentLaw,
    dim: usize,
    options: &DiagnosticsOptions,
    master_seed: u64,
) -> Result<Vec<CurvePoint>> {
    let n = options.fill_n;
    if !n.is_multiple_of(2) {
        return Err(Error::Domain(format!("fill radius must be even, got {n}")));
    }
    let grid = &options.fill_particles;
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("particle grid must be strictly increasing".into()));
    }
    let ni = n as i32;
    let mut ranges = vec![(0, 2 * ni)];
    ranges.extend(std::iter::repeat_n((-ni, ni), dim - 1));
    let b_n: rustc_hash::FxHashSet<Site> = box_sites(&ranges).into_iter().collect();
    let a_n = diamond(n, dim)?;
    let centre = Site::unit(0).scale(ni);
    let origin = Site::new(&vec![0; dim])?;
    let rows = (0..options.replicas as u64)
        .into_par_iter()
        .map(|i| {
            let (es, ds) = replica_seeds(master_seed, "fill", i, Sampling::Annealed);
            let env = QuenchedEnvironment::new(law.clone(), es, dim)?;
            grid.iter()
                .map(|&count| {
                    let mut sim = Simulation::new(
                        &env,
                        Configuration::single(origin, count),
                        TruncationBox::Explicit(b_n.clone()),
                        None,
                        ds,
                    )?;
                    for _ in 0..2 * n {
                        sim.advance();
                    }
                    Ok(contains_translate(sim.current(), &centre, &a_n))
                })
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    assert_monotone(&rows, "fill curve")?;
    Ok(bernoulli_columns(&rows, grid.iter().map(|&c| c as f64)))
}

/// (c) survival proxy from `A_n` for each radius, on shared randomness.
pub fn radius_curve(
    law: &EnvironmentLaw,
    dim: usize,
    options: &DiagnosticsOptions,
    master_seed: u64,
) -> Result<Vec<CurvePoint>> {
    let radii = &options.radius_grid;
    let starts = radii
        .iter()
        .map(|&n| Ok(diamond(n, dim)?.configuration()))
        .collect::<Result<Vec<_>>>()?;
    let spec = RunSpec::new(options.radius_horizon).cap(options.cap).keep_fields(false);
    let rows = (0..options.replicas as u64)
        .into_par_iter()
        .map(|i| {
            let (es, ds) = replica_seeds(master_seed, "radius", i, Sampling::Annealed);
            let env = QuenchedEnvironment::new(law.clone(), es, dim)?;
            starts
                .iter()
                .map(|a| Ok(run(&env, a, &spec, ds)?.survived()))
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(bernoulli_columns(&rows, radii.iter().map(|&n| n as f64)))
}

/// (d) `P(|_L eta_t| >= N)` from one particle, for each box size `L`,
/// along a coupled truncation chain.
pub fn saturation_curve(
    law: &EnvironmentLaw,
    dim: usize,
    options: &DiagnosticsOptions,
    master_seed: u64,
) -> Result<Vec<CurvePoint>> {
    let sizes = &options.saturation_sizes;
    let origin = Configuration::single(Site::new(&vec![0; dim])?, 1);
    // no population cap: |eta_t| at the fixed time t is needed exactly
    let spec = RunSpec::new(options.saturation_t).cap(u64::MAX).keep_fields(false);
    let rows = (0..options.replicas as u64)
        .into_par_iter()
        .map(|i| {
            let (es, ds) = replica_seeds(master_seed, "saturation", i, Sampling::Annealed);
            let env = QuenchedEnvironment::new(law.clone(), es, dim)?;
            let chain = run_truncation_chain(&env, &origin, sizes, &spec, ds)?;
            Ok(chain[..sizes.len()]
                .iter()
                .map(|tr| tr.tau.is_none() && tr.final_total() >= options.saturation_threshold)
                .collect::<Vec<bool>>())
        })
        .collect::<Result<Vec<_>>>()?;
    assert_monotone(&rows, "saturation curve")?;
    Ok(bernoulli_columns(&rows, sizes.iter().map(|&l| l as f64)))
}

/// All four diagnostic curves.
pub fn diagnostics(
    law: &EnvironmentLaw,
    dim: usize,
    master_seed: u64,
    options: &DiagnosticsOptions,
) -> Result<DiagnosticsReport> {
    check_dim(dim)?;
    Ok(DiagnosticsReport {
        growth: growth_curve(law, dim, options, master_seed)?,
        fill: fill_curve(law, dim, options, master_seed)?,
        radius: radius_curve(law, dim, options, master_seed)?,
        saturation: saturation_curve(law, dim, options, master_seed)?,
    })
}
