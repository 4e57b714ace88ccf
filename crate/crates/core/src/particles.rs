//! The branching random walk built from the i.i.d. families `U_{t,x,k}`
//! (offspring uniforms) and `D_{t,x,k}` (displacements).
//!
//! The `k`-th particle on site `x` at time `t` draws its offspring count from
//! `q_{t,x}` with `U_{t,x,k}` and all of its children land on `x + D_{t,x,k}`.
//! Both variates are pure functions of `(master_seed, stream, t, x, k)`, so any
//! two runs sharing a master seed are coupled: more parents, a larger box or
//! a less thinned environment can only produce more particles, site by site.

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::envmodel::Environment;
use crate::error::{Error, Result};
use crate::lattice::{Site, MAX_DIM};
use crate::rng::{Key, Stream};

/// Default population cap.
pub const DEFAULT_CAP: u64 = 1_000_000;

/// Particle counts per site. Zero counts are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Configuration {
    counts: FxHashMap<Site, u64>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(site: Site, count: u64) -> Self {
        let mut c = Self::new();
        c.add(site, count);
        c
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Site, u64)>) -> Self {
        let mut c = Self::new();
        for (s, n) in pairs {
            c.add(s, n);
        }
        c
    }

    /// One particle on each site.
    pub fn from_sites<'a>(sites: impl IntoIterator<Item = &'a Site>) -> Self {
        Self::from_pairs(sites.into_iter().map(|s| (*s, 1)))
    }

    #[inline]
    pub fn add(&mut self, site: Site, count: u64) {
        if count > 0 {
            *self.counts.entry(site).or_insert(0) += count;
        }
    }

    pub fn get(&self, site: &Site) -> u64 {
        self.counts.get(site).copied().unwrap_or(0)
    }

    pub fn is_occupied(&self, site: &Site) -> bool {
        self.counts.contains_key(site)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `|eta|`, the number of particles.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Number of occupied sites.
    pub fn occupied(&self) -> u64 {
        self.counts.len() as u64
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Site, &u64)> {
        self.counts.iter()
    }

    pub fn sites(&self) -> impl Iterator<Item = &Site> {
        self.counts.keys()
    }

    /// Entries in site order.
    pub fn sorted(&self) -> Vec<(Site, u64)> {
        let mut v: Vec<_> = self.counts.iter().map(|(s, n)| (*s, *n)).collect();
        v.sort_unstable();
        v
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &Configuration) -> bool {
        self.counts.iter().all(|(s, n)| *n <= other.get(s))
    }

    /// First site where `self > other`, in site order.
    pub fn first_excess(&self, other: &Configuration) -> Option<(Site, u64, u64)> {
        self.sorted()
            .into_iter()
            .find(|(s, n)| *n > other.get(s))
            .map(|(s, n)| (s, n, other.get(&s)))
    }

    fn clip(&mut self, site_cap: u64) {
        for n in self.counts.values_mut() {
            *n = (*n).min(site_cap);
        }
    }

    pub fn max_linf(&self) -> i64 {
        self.counts.keys().map(|s| s.linf()).max().unwrap_or(0)
    }
}

/// Region outside of which particles are discarded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TruncationBox {
    None,
    /// `{-L, .., L}^d`.
    CenteredCube(i64),
    Explicit(FxHashSet<Site>),
}

impl TruncationBox {
    pub fn explicit(sites: impl IntoIterator<Item = Site>) -> Self {
        TruncationBox::Explicit(sites.into_iter().collect())
    }

    #[inline]
    pub fn contains(&self, site: &Site) -> bool {
        match self {
            TruncationBox::None => true,
            TruncationBox::CenteredCube(l) => site.linf() <= *l,
            TruncationBox::Explicit(set) => set.contains(site),
        }
    }

    /// Whether every site of `self` lies in `other`, for boxes whose
    /// inclusion is decidable without enumeration.
    fn nested_in(&self, other: &TruncationBox) -> bool {
        match (self, other) {
            (_, TruncationBox::None) => true,
            (TruncationBox::CenteredCube(a), TruncationBox::CenteredCube(b)) => a <= b,
            (TruncationBox::Explicit(s), o) => s.iter().all(|x| o.contains(x)),
            _ => false,
        }
    }
}

/// The offspring and displacement streams of one master seed.
#[derive(Debug, Clone, Copy)]
pub struct Dynamics {
    offspring: Key,
    displacement: Key,
}

impl Dynamics {
    pub fn new(master_seed: u64) -> Self {
        Dynamics {
            offspring: Key::new(master_seed, Stream::Offspring),
            displacement: Key::new(master_seed, Stream::Displacement),
        }
    }

    #[inline]
    fn site_keys(&self, t: u32, x: &Site, dim: usize) -> (Key, Key) {
        let mut u = self.offspring.absorb(t as u64);
        let mut d = self.displacement.absorb(t as u64);
        for &c in x.coords(dim) {
            u = u.absorb_i64(c as i64);
            d = d.absorb_i64(c as i64);
        }
        (u, d)
    }
}

/// One step of the (possibly truncated) process.
pub fn step<E: Environment + ?Sized>(
    env: &E,
    t: u32,
    current: &Configuration,
    truncation: &TruncationBox,
    dynamics: &Dynamics,
) -> Configuration {
    let dim = env.dim();
    let mut next = Configuration {
        counts: FxHashMap::with_capacity_and_hasher(current.counts.len() * 2, Default::default()),
    };
    let directions = 2 * dim as u64;
    for (x, &p) in current.counts.iter() {
        let q = env.law_at(t, x);
        if q.is_dirac_zero() {
            continue;
        }
        let (ukey, dkey) = dynamics.site_keys(t, x, dim);
        let mut per_direction = [0u64; 2 * MAX_DIM];
        for k in 1..=p {
            let children = q.sample(ukey.absorb(k).uniform());
            per_direction[dkey.absorb(k).below(directions) as usize] += children as u64;
        }
        for (dir, &n) in per_direction[..2 * dim].iter().enumerate() {
            if n > 0 {
                let y = x.step(dir);
                if truncation.contains(&y) {
                    next.add(y, n);
                }
            }
        }
    }
    next
}

/// Parameters of a single run.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub horizon: u32,
    pub truncation: TruncationBox,
    /// Stop once the population reaches this many particles.
    pub cap: u64,
    /// Clip every site count to at most this value after each step.
    /// Clipping is monotone, so all couplings survive it; the clipped
    /// process is dominated by the true one.
    pub site_cap: Option<u64>,
    pub keep_fields: bool,
}

impl RunSpec {
    pub fn new(horizon: u32) -> Self {
        RunSpec {
            horizon,
            truncation: TruncationBox::None,
            cap: DEFAULT_CAP,
            site_cap: None,
            keep_fields: true,
        }
    }

    pub fn truncation(mut self, b: TruncationBox) -> Self {
        self.truncation = b;
        self
    }

    pub fn cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn site_cap(mut self, site_cap: Option<u64>) -> Self {
        self.site_cap = site_cap;
        self
    }

    pub fn keep_fields(mut self, keep: bool) -> Self {
        self.keep_fields = keep;
        self
    }
}

/// A process advanced one step at a time.
pub struct Simulation<'a, E: Environment + ?Sized> {
    env: &'a E,
    dynamics: Dynamics,
    truncation: TruncationBox,
    site_cap: Option<u64>,
    t: u32,
    current: Configuration,
}

impl<'a, E: Environment + ?Sized> Simulation<'a, E> {
    pub fn new(
        env: &'a E,
        initial: Configuration,
        truncation: TruncationBox,
        site_cap: Option<u64>,
        master_seed: u64,
    ) -> Result<Self> {
        if let Some(s) = initial.sites().find(|s| !truncation.contains(s)) {
            return Err(Error::Domain(format!(
                "initial site {s:?} lies outside the truncation box"
            )));
        }
        let mut current = initial;
        if let Some(c) = site_cap {
            current.clip(c);
        }
        Ok(Simulation {
            env,
            dynamics: Dynamics::new(master_seed),
            truncation,
            site_cap,
            t: 0,
            current,
        })
    }

    pub fn time(&self) -> u32 {
        self.t
    }

    pub fn current(&self) -> &Configuration {
        &self.current
    }

    pub fn into_current(self) -> Configuration {
        self.current
    }

    pub fn advance(&mut self) {
        let mut next = step(
            self.env,
            self.t,
            &self.current,
            &self.truncation,
            &self.dynamics,
        );
        if let Some(c) = self.site_cap {
            next.clip(c);
        }
        self.current = next;
        self.t += 1;
    }
}

/// Record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `fields[t]` for `t = 0..=last_time`; empty unless fields were kept.
    pub fields: Vec<Configuration>,
    /// Extinction time, if extinction happened within the horizon.
    pub tau: Option<u32>,
    pub capped: bool,
    /// `|eta_t|` per recorded step.
    pub totals: Vec<u64>,
    /// Occupied-site counts per recorded step.
    pub occupied: Vec<u64>,
    pub final_field: Configuration,
    pub truncation: TruncationBox,
}

impl Trajectory {
    pub fn last_time(&self) -> u32 {
        (self.totals.len() - 1) as u32
    }

    /// Survival proxy: alive at the horizon or capped.
    pub fn survived(&self) -> bool {
        self.tau.is_none()
    }

    pub fn final_total(&self) -> u64 {
        *self.totals.last().unwrap()
    }

    pub fn final_occupied(&self) -> u64 {
        *self.occupied.last().unwrap()
    }
}

struct Recorder {
    keep: bool,
    traj: Trajectory,
}

impl Recorder {
    fn new(keep: bool, truncation: TruncationBox) -> Self {
        Recorder {
            keep,
            traj: Trajectory {
                fields: Vec::new(),
                tau: None,
                capped: false,
                totals: Vec::new(),
                occupied: Vec::new(),
                final_field: Configuration::new(),
                truncation,
            },
        }
    }

    /// Records the field and reports whether the run must stop.
    fn record(&mut self, t: u32, field: &Configuration, cap: u64) -> bool {
        let total = field.total();
        self.traj.totals.push(total);
        self.traj.occupied.push(field.occupied());
        if self.keep {
            self.traj.fields.push(field.clone());
        }
        if total == 0 {
            self.traj.tau = Some(t);
            return true;
        }
        if total >= cap {
            self.traj.capped = true;
            return true;
        }
        false
    }

    fn finish(mut self, field: Configuration) -> Trajectory {
        self.traj.final_field = field;
        self.traj
    }
}

/// Runs the process from `initial` until extinction, the horizon or the cap.
pub fn run<E: Environment + ?Sized>(
    env: &E,
    initial: &Configuration,
    spec: &RunSpec,
    master_seed: u64,
) -> Result<Trajectory> {
    let mut sim = Simulation::new(
        env,
        initial.clone(),
        spec.truncation.clone(),
        spec.site_cap,
        master_seed,
    )?;
    let mut rec = Recorder::new(spec.keep_fields, spec.truncation.clone());
    let mut stop = rec.record(0, sim.current(), spec.cap);
    while !stop && sim.time() < spec.horizon {
        sim.advance();
        stop = rec.record(sim.time(), sim.current(), spec.cap);
    }
    Ok(rec.finish(sim.into_current()))
}

fn check_ordered(t: u32, lo: &Configuration, hi: &Configuration, what: &str) -> Result<()> {
    match lo.first_excess(hi) {
        None => Ok(()),
        Some((s, a, b)) => Err(Error::CouplingViolation {
            t,
            detail: format!("{what}: site {s:?} has {a} > {b}"),
        }),
    }
}

/// Lockstep runs of several processes on shared randomness, asserting that
/// `fields[i] <= fields[i + 1]` pointwise at every step.
fn run_ordered<E: Environment + ?Sized>(
    env: &E,
    starts: Vec<(Configuration, TruncationBox)>,
    spec: &RunSpec,
    master_seed: u64,
    what: &str,
) -> Result<Vec<Trajectory>> {
    let mut sims = starts
        .into_iter()
        .map(|(a, b)| {
            let rec = Recorder::new(spec.keep_fields, b.clone());
            Simulation::new(env, a, b, spec.site_cap, master_seed).map(|s| (s, rec, false))
        })
        .collect::<Result<Vec<_>>>()?;
    for (sim, rec, stop) in sims.iter_mut() {
        *stop = rec.record(0, sim.current(), spec.cap);
    }
    let mut t = 0;
    loop {
        for w in sims.windows(2) {
            // a run stopped at the cap is frozen and no longer comparable
            let live = |s: &(Simulation<'_, E>, Recorder, bool)| {
                s.0.time() == t || s.1.traj.tau.is_some()
            };
            if live(&w[0]) && live(&w[1]) {
                check_ordered(t, w[0].0.current(), w[1].0.current(), what)?;
            }
        }
        if t >= spec.horizon || sims.iter().all(|s| s.2) {
            break;
        }
        t += 1;
        for (sim, rec, stop) in sims.iter_mut() {
            if !*stop {
                sim.advance();
                *stop = rec.record(t, sim.current(), spec.cap);
            }
        }
    }
    Ok(sims
        .into_iter()
        .map(|(sim, rec, _)| rec.finish(sim.into_current()))
        .collect())
}

/// Runs from `a` and `a_prime >= a` on shared randomness.
pub fn run_coupled<E: Environment + ?Sized>(
    env: &E,
    a: &Configuration,
    a_prime: &Configuration,
    spec: &RunSpec,
    master_seed: u64,
) -> Result<(Trajectory, Trajectory)> {
    if let Some((s, x, y)) = a.first_excess(a_prime) {
        return Err(Error::Domain(format!(
            "initial configurations are not ordered at {s:?}: {x} > {y}"
        )));
    }
    let mut out = run_ordered(
        env,
        vec![
            (a.clone(), spec.truncation.clone()),
            (a_prime.clone(), spec.truncation.clone()),
        ],
        spec,
        master_seed,
        "initial-condition coupling",
    )?;
    let hi = out.pop().unwrap();
    let lo = out.pop().unwrap();
    Ok((lo, hi))
}

/// Runs the truncations to `{-L..L}^d` for each `L` in `sizes` (strictly
/// increasing) followed by the untruncated process, all on shared randomness.
/// `spec.truncation` is ignored.
pub fn run_truncation_chain<E: Environment + ?Sized>(
    env: &E,
    a: &Configuration,
    sizes: &[i64],
    spec: &RunSpec,
    master_seed: u64,
) -> Result<Vec<Trajectory>> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("box sizes must be strictly increasing".into()));
    }
    if let Some(&l) = sizes.first() {
        if l < 0 {
            return Err(Error::Domain(format!("box size {l} is negative")));
        }
    }
    let mut boxes: Vec<TruncationBox> = sizes.iter().map(|&l| TruncationBox::CenteredCube(l)).collect();
    boxes.push(TruncationBox::None);
    debug_assert!(boxes.windows(2).all(|w| w[0].nested_in(&w[1])));
    let starts = boxes.into_iter().map(|b| (a.clone(), b)).collect();
    run_ordered(env, starts, spec, master_seed, "truncation chain")
}

/// Particle and occupied-site counts on the lateral faces of `{-L..L}^d`,
/// summed over times `0..=T`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FaceCounts {
    pub particles_on_face: u64,
    pub occupied_on_face: u64,
    pub particles_on_positive_orthant_face: u64,
    pub occupied_on_positive_orthant_face: u64,
}

impl FaceCounts {
    /// Adds the contribution of one time slice.
    pub fn accumulate(&mut self, field: &Configuration, l: i64, dim: usize) {
        for (x, &n) in field.iter() {
            if x.linf() != l {
                continue;
            }
            self.particles_on_face += n;
            self.occupied_on_face += 1;
            if x.coord(0) as i64 == l && (1..dim).all(|i| x.coord(i) >= 0) {
                self.particles_on_positive_orthant_face += n;
                self.occupied_on_positive_orthant_face += 1;
            }
        }
    }
}

/// Face counts of a trajectory truncated to `{-L..L}^d`, over `t = 0..=T`.
pub fn face_counts(trajectory: &Trajectory, l: i64, t_max: u32, dim: usize) -> Result<FaceCounts> {
    if trajectory.truncation != TruncationBox::CenteredCube(l) {
        return Err(Error::Domain(format!(
            "face counts need a trajectory truncated to the cube of size {l}, got {:?}",
            trajectory.truncation
        )));
    }
    let recorded_to = trajectory.last_time();
    let ended = trajectory.tau.is_some();
    if trajectory.fields.is_empty() {
        return Err(Error::Domain("trajectory was run without keeping fields".into()));
    }
    if recorded_to < t_max && !ended {
        return Err(Error::Domain(format!(
            "trajectory stops at {recorded_to} before the face horizon {t_max}"
        )));
    }
    let mut fc = FaceCounts::default();
    for field in trajectory.fields.iter().take(t_max as usize + 1) {
        fc.accumulate(field, l, dim);
    }
    Ok(fc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envmodel::{EnvironmentLaw, OffspringLaw, QuenchedEnvironment};

    fn det_env(pmf: Vec<f64>, dim: usize) -> QuenchedEnvironment {
        QuenchedEnvironment::new(EnvironmentLaw::deterministic(pmf).unwrap(), 1, dim).unwrap()
    }

    fn origin(dim: usize) -> Site {
        Site::new(&vec![0; dim]).unwrap()
    }

    #[test]
    fn dirac_zero_empties_everything() {
        let env = det_env(vec![1.0], 2);
        let a = Configuration::from_pairs([(origin(2), 5), (Site::new(&[3, 1]).unwrap(), 2)]);
        let next = step(&env, 0, &a, &TruncationBox::None, &Dynamics::new(1));
        assert!(next.is_empty());
    }

    #[test]
    fn singleton_box_kills_walkers() {
        let env = det_env(vec![0.0, 1.0], 1);
        let b = TruncationBox::explicit([origin(1)]);
        let next = step(&env, 0, &Configuration::single(origin(1), 1), &b, &Dynamics::new(4));
        assert!(next.is_empty());
    }

    #[test]
    fn single_walker_moves_left_or_right_evenly() {
        let env = det_env(vec![0.0, 1.0], 1);
        let a = Configuration::single(origin(1), 1);
        let right = Site::new(&[1]).unwrap();
        let left = Site::new(&[-1]).unwrap();
        let n = 10_000;
        let mut plus = 0;
        for seed in 0..n {
            let next = step(&env, 0, &a, &TruncationBox::None, &Dynamics::new(seed));
            assert_eq!(next.total(), 1);
            if next.get(&right) == 1 {
                plus += 1;
            } else {
                assert_eq!(next.get(&left), 1);
            }
        }
        assert!((plus as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn run_dies_at_one_under_dirac_zero() {
        let env = det_env(vec![1.0], 1);
        let tr = run(&env, &Configuration::single(origin(1), 1), &RunSpec::new(10), 3).unwrap();
        assert_eq!(tr.tau, Some(1));
        assert!(tr.fields[1].is_empty());
        assert!(!tr.survived());
    }

    #[test]
    fn immortal_walker() {
        let env = det_env(vec![0.0, 1.0], 2);
        let tr = run(&env, &Configuration::single(origin(2), 1), &RunSpec::new(50), 3).unwrap();
        assert_eq!(tr.tau, None);
        assert!(tr.totals.iter().all(|&n| n == 1));
        assert_eq!(tr.totals.len(), 51);
    }

    #[test]
    fn empty_start_has_tau_zero() {
        let env = det_env(vec![0.0, 1.0], 1);
        let tr = run(&env, &Configuration::new(), &RunSpec::new(5), 0).unwrap();
        assert_eq!(tr.tau, Some(0));
    }

    #[test]
    fn cap_stops_growth() {
        let env = det_env(vec![0.0, 0.0, 1.0], 1);
        let tr = run(&env, &Configuration::single(origin(1), 1), &RunSpec::new(100).cap(1000), 3).unwrap();
        assert!(tr.capped);
        assert!(tr.survived());
        assert_eq!(tr.final_total(), 1024);
        assert_eq!(tr.last_time(), 10);
    }

    #[test]
    fn start_outside_box_is_rejected() {
        let env = det_env(vec![0.0, 1.0], 1);
        let a = Configuration::single(Site::new(&[5]).unwrap(), 1);
        assert!(run(&env, &a, &RunSpec::new(3).truncation(TruncationBox::CenteredCube(2)), 0).is_err());
    }

    #[test]
    fn coupled_identical_starts_give_identical_runs() {
        let law = EnvironmentLaw::new(vec![(0.5, vec![0.0, 0.0, 1.0]), (0.5, vec![0.5, 0.5])]).unwrap();
        let env = QuenchedEnvironment::new(law, 8, 1).unwrap();
        let a = Configuration::single(origin(1), 1);
        let (x, y) = run_coupled(&env, &a, &a, &RunSpec::new(30), 12).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn coupled_rejects_unordered_starts() {
        let env = det_env(vec![0.5, 0.0, 0.5], 1);
        let a = Configuration::single(origin(1), 2);
        let b = Configuration::single(origin(1), 1);
        assert!(matches!(
            run_coupled(&env, &a, &b, &RunSpec::new(3), 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn large_box_equals_untruncated() {
        let env = det_env(vec![0.25, 0.25, 0.5], 2);
        let a = Configuration::single(origin(2), 1);
        let chain = run_truncation_chain(&env, &a, &[20], &RunSpec::new(20), 77).unwrap();
        assert_eq!(chain[0].fields, chain[1].fields);
    }

    #[test]
    fn zero_box_dies_at_once() {
        let env = det_env(vec![0.0, 0.0, 1.0], 1);
        let a = Configuration::single(origin(1), 1);
        let chain = run_truncation_chain(&env, &a, &[0], &RunSpec::new(5), 1).unwrap();
        assert_eq!(chain[0].tau, Some(1));
    }

    #[test]
    fn truncation_chain_requires_increasing_sizes() {
        let env = det_env(vec![0.0, 1.0], 1);
        let a = Configuration::single(origin(1), 1);
        assert!(run_truncation_chain(&env, &a, &[4, 2], &RunSpec::new(5), 1).is_err());
    }

    #[test]
    fn face_counts_need_matching_box() {
        let env = det_env(vec![0.0, 1.0], 1);
        let a = Configuration::single(origin(1), 1);
        let tr = run(&env, &a, &RunSpec::new(5).truncation(TruncationBox::CenteredCube(3)), 1).unwrap();
        assert!(face_counts(&tr, 2, 5, 1).is_err());
        assert!(face_counts(&tr, 3, 5, 1).is_ok());
    }

    #[test]
    fn face_counts_vanish_without_offspring() {
        let env = det_env(vec![1.0], 1);
        let a = Configuration::from_pairs([(origin(1), 3)]);
        let tr = run(&env, &a, &RunSpec::new(5).truncation(TruncationBox::CenteredCube(2)), 1).unwrap();
        assert_eq!(face_counts(&tr, 2, 5, 1).unwrap(), FaceCounts::default());
    }

    #[test]
    fn conditional_mean_matches_site_means() {
        let law = EnvironmentLaw::new(vec![(0.5, vec![0.1, 0.2, 0.7]), (0.5, vec![0.6, 0.3, 0.1])]).unwrap();
        let env = QuenchedEnvironment::new(law, 2024, 1).unwrap();
        let eta = Configuration::from_pairs([
            (Site::new(&[0]).unwrap(), 3),
            (Site::new(&[2]).unwrap(), 1),
            (Site::new(&[-2]).unwrap(), 2),
        ]);
        let t = 4;
        let expected: f64 = eta.iter().map(|(x, &n)| n as f64 * env.mean_at(t, x)).sum();
        let n = 10_000;
        let samples: Vec<f64> = (0..n)
            .map(|s| step(&env, t, &eta, &TruncationBox::None, &Dynamics::new(s)).total() as f64)
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected} (se {se})");
    }

    #[test]
    fn site_cap_clips_counts() {
        let env = det_env(vec![0.0, 0.0, 1.0], 1);
        let a = Configuration::single(origin(1), 1);
        let tr = run(
            &env,
            &a,
            &RunSpec::new(20).truncation(TruncationBox::CenteredCube(2)).site_cap(Some(10)),
            1,
        )
        .unwrap();
        assert!(tr.fields.iter().all(|f| f.iter().all(|(_, &n)| n <= 10)));
        assert!(tr.survived());
    }

    #[test]
    fn explicit_environment_drives_the_step() {
        let mut env = crate::envmodel::ExplicitEnvironment::new(1, OffspringLaw::dirac(0)).unwrap();
        env.set(0, origin(1), OffspringLaw::dirac(3));
        let next = step(&env, 0, &Configuration::single(origin(1), 2), &TruncationBox::None, &Dynamics::new(0));
        assert_eq!(next.total(), 6);
    }
}
