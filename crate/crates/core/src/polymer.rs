//! The directed polymer associated with the environment: its partition
//! function `Z_t = E_S[prod_{u<t} m_{u,S_u}]` over simple random walk paths
//! from the origin, computed exactly by dynamic programming over the cone of
//! reachable sites, and free-energy estimates built on it.

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::envmodel::{validate, Environment, EnvironmentLaw, QuenchedEnvironment};
use crate::error::{Error, Result};
use crate::lattice::{check_dim, Site};
use crate::stats::{ls_slope, mean_and_se};

/// Largest number of paths the brute-force oracle will enumerate.
pub const BRUTEFORCE_LIMIT: u128 = 10_000_000;

/// Unnormalised point-to-line weights at time `time`. The true weight of `x`
/// is `weights[x] * exp(log_scale)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolymerLayer {
    pub weights: FxHashMap<Site, f64>,
    pub log_scale: f64,
    pub time: u32,
}

impl PolymerLayer {
    pub fn origin() -> Self {
        let mut weights = FxHashMap::default();
        weights.insert(Site::ORIGIN, 1.0);
        PolymerLayer {
            weights,
            log_scale: 0.0,
            time: 0,
        }
    }

    /// `log sum_x W(x)`, summed in site order.
    pub fn log_total(&self) -> f64 {
        let mut entries: Vec<(&Site, &f64)> = self.weights.iter().collect();
        entries.sort_unstable_by(|a, b| a.0.cmp(b.0));
        let s: f64 = entries.iter().map(|(_, w)| **w).sum();
        s.ln() + self.log_scale
    }

    /// `W_{u+1}(x) = sum_v m_{u,x-v} W_u(x-v) / 2d`, then divided by its max.
    pub fn advance<E: Environment + ?Sized>(&self, env: &E) -> Result<PolymerLayer> {
        let dim = env.dim();
        let u = self.time;
        let inv = 1.0 / (2 * dim) as f64;
        let mut pushed: FxHashMap<Site, f64> =
            FxHashMap::with_capacity_and_hasher(self.weights.len(), Default::default());
        let mut targets: FxHashSet<Site> = FxHashSet::default();
        for (y, w) in &self.weights {
            let m = env.mean_at(u, y);
            if m <= 0.0 {
                return Err(Error::ZeroMean { t: u, site: *y });
            }
            pushed.insert(*y, m * w * inv);
            for dir in 0..2 * dim {
                targets.insert(y.step(dir));
            }
        }
        // pull in a fixed direction order so every target sum is reproducible
        let mut weights: FxHashMap<Site, f64> =
            FxHashMap::with_capacity_and_hasher(targets.len(), Default::default());
        let mut max = 0.0f64;
        for x in targets {
            let mut s = 0.0;
            for dir in 0..2 * dim {
                // step(dir ^ 1) is x - v for v = step direction dir
                if let Some(c) = pushed.get(&x.step(dir ^ 1)) {
                    s += c;
                }
            }
            if s > 0.0 {
                max = max.max(s);
                weights.insert(x, s);
            }
        }
        let mut log_scale = self.log_scale;
        if max > 0.0 && max.is_finite() {
            let inv_max = 1.0 / max;
            weights.values_mut().for_each(|w| *w *= inv_max);
            log_scale += max.ln();
        }
        Ok(PolymerLayer {
            weights,
            log_scale,
            time: u + 1,
        })
    }
}

/// `log Z_u` for `u = 1..=t`, plus the final layer.
pub fn log_partition_series<E: Environment + ?Sized>(
    env: &E,
    t: u32,
) -> Result<(Vec<f64>, PolymerLayer)> {
    if t == 0 {
        return Err(Error::Domain("partition function needs t >= 1".into()));
    }
    let mut layer = PolymerLayer::origin();
    let mut series = Vec::with_capacity(t as usize);
    for _ in 0..t {
        layer = layer.advance(env)?;
        series.push(layer.log_total());
    }
    Ok((series, layer))
}

/// `log Z_t` and the final layer.
pub fn partition_function<E: Environment + ?Sized>(env: &E, t: u32) -> Result<(f64, PolymerLayer)> {
    let (series, layer) = log_partition_series(env, t)?;
    Ok((*series.last().unwrap(), layer))
}

/// `log Z_t` by enumerating all `(2d)^t` paths. Oracle for small sizes.
pub fn partition_function_bruteforce<E: Environment + ?Sized>(env: &E, t: u32) -> Result<f64> {
    let dim = env.dim();
    let paths = (2 * dim as u128).checked_pow(t).unwrap_or(u128::MAX);
    if paths > BRUTEFORCE_LIMIT {
        return Err(Error::TooLarge {
            paths,
            limit: BRUTEFORCE_LIMIT,
        });
    }
    fn walk<E: Environment + ?Sized>(env: &E, u: u32, t: u32, x: Site, acc: f64) -> f64 {
        if u == t {
            return acc;
        }
        let m = env.mean_at(u, &x);
        (0..2 * env.dim())
            .map(|dir| walk(env, u + 1, t, x.step(dir), acc * m))
            .sum()
    }
    let total = walk(env, 0, t, Site::ORIGIN, 1.0);
    Ok(total.ln() - t as f64 * ((2 * dim) as f64).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FreeEnergyMethod {
    /// `(1/t) log Z_t`.
    Point,
    /// Least-squares slope of `log Z_u` over `u` in the upper half of times.
    Slope,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeEnergyEstimate {
    pub psi_hat: f64,
    pub std_error: f64,
    pub t_used: u32,
    pub replicas: usize,
    pub method: FreeEnergyMethod,
    /// Per-replica values, in replica order.
    pub values: Vec<f64>,
    /// Environment seed of each replica.
    pub seeds: Vec<u64>,
}

/// Per-environment free-energy value from a `log Z_u` series (`u = 1..=t`).
pub fn replica_value(series: &[f64], method: FreeEnergyMethod) -> f64 {
    let t = series.len();
    match method {
        FreeEnergyMethod::Point => series[t - 1] / t as f64,
        FreeEnergyMethod::Slope => {
            let start = t.div_ceil(2).max(1);
            let xs: Vec<f64> = (start..=t).map(|u| u as f64).collect();
            let ys: Vec<f64> = (start..=t).map(|u| series[u - 1]).collect();
            ls_slope(&xs, &ys)
        }
    }
}

/// Estimates the free energy from `replicas` environments with seeds
/// `master_seed + i`.
pub fn free_energy(
    law: &EnvironmentLaw,
    dim: usize,
    t: u32,
    replicas: usize,
    master_seed: u64,
    method: FreeEnergyMethod,
) -> Result<FreeEnergyEstimate> {
    check_dim(dim)?;
    let report = validate(law);
    if !report.hyp1_ok {
        return Err(Error::Hyp1(report.messages.join("; ")));
    }
    if t < 2 {
        return Err(Error::Domain(format!("free energy needs t >= 2, got {t}")));
    }
    if replicas < 2 {
        return Err(Error::Domain(format!("free energy needs at least 2 replicas, got {replicas}")));
    }
    let seeds: Vec<u64> = (0..replicas as u64).map(|i| master_seed.wrapping_add(i)).collect();
    let values = seeds
        .par_iter()
        .map(|&seed| {
            let env = QuenchedEnvironment::new(law.clone(), seed, dim)?;
            let (series, _) = log_partition_series(&env, t)?;
            Ok(replica_value(&series, method))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (psi_hat, std_error) = mean_and_se(&values);
    Ok(FreeEnergyEstimate {
        psi_hat,
        std_error,
        t_used: t,
        replicas,
        method,
        values,
        seeds,
    })
}

/// `|log Z_t^rho - t log rho - log Z_t|` on one environment seed.
pub fn perturbation_identity_check(
    law: &EnvironmentLaw,
    rho: f64,
    dim: usize,
    t: u32,
    master_seed: u64,
) -> Result<f64> {
    let env = QuenchedEnvironment::new(law.clone(), master_seed, dim)?;
    let thin = env.perturbed(rho)?;
    let (log_z, _) = partition_function(&env, t)?;
    let (log_z_rho, _) = partition_function(&thin, t)?;
    Ok((log_z_rho - t as f64 * rho.ln() - log_z).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envmodel::{ExplicitEnvironment, OffspringLaw};

    fn two_point() -> EnvironmentLaw {
        EnvironmentLaw::new(vec![(0.5, vec![0.0, 0.0, 1.0]), (0.5, vec![0.5, 0.5])]).unwrap()
    }

    #[test]
    fn constant_mean_gives_power() {
        let env = QuenchedEnvironment::new(EnvironmentLaw::deterministic(vec![0.25, 0.25, 0.5]).unwrap(), 0, 2)
            .unwrap();
        let (log_z, _) = partition_function(&env, 4).unwrap();
        assert!((log_z.exp() - 2.441_406_25).abs() < 1e-12);
    }

    #[test]
    fn two_step_hand_computation() {
        let mut env = ExplicitEnvironment::new(1, OffspringLaw::dirac(1)).unwrap();
        env.set(0, Site::ORIGIN, OffspringLaw::dirac(2))
            .set(1, Site::new(&[-1]).unwrap(), OffspringLaw::dirac(1))
            .set(1, Site::new(&[1]).unwrap(), OffspringLaw::dirac(3));
        let (log_z, _) = partition_function(&env, 2).unwrap();
        assert!((log_z.exp() - 4.0).abs() < 1e-12);
        assert!((partition_function_bruteforce(&env, 2).unwrap().exp() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn one_step_is_the_origin_mean() {
        let env = QuenchedEnvironment::new(two_point(), 17, 2).unwrap();
        let m = env.mean_at(0, &Site::ORIGIN);
        assert!((partition_function_bruteforce(&env, 1).unwrap() - m.ln()).abs() < 1e-15);
        assert!((partition_function(&env, 1).unwrap().0 - m.ln()).abs() < 1e-15);
    }

    #[test]
    fn layers_respect_parity_and_radius() {
        let env = QuenchedEnvironment::new(two_point(), 3, 2).unwrap();
        let mut layer = PolymerLayer::origin();
        for _ in 0..12 {
            layer = layer.advance(&env).unwrap();
            let u = layer.time as i64;
            for (x, w) in &layer.weights {
                assert!(*w > 0.0);
                assert!(x.l1() <= u);
                assert_eq!((x.coord_sum() + u).rem_euclid(2), 0);
            }
        }
    }

    #[test]
    fn zero_mean_is_reported_with_location() {
        let env = QuenchedEnvironment::new(EnvironmentLaw::deterministic(vec![1.0]).unwrap(), 0, 1).unwrap();
        assert!(matches!(partition_function(&env, 3), Err(Error::ZeroMean { t: 0, .. })));
    }

    #[test]
    fn bruteforce_guard() {
        let env = QuenchedEnvironment::new(two_point(), 0, 2).unwrap();
        assert!(matches!(
            partition_function_bruteforce(&env, 12),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn bumping_a_site_mean_never_lowers_log_z() {
        let base = QuenchedEnvironment::new(two_point(), 21, 1).unwrap();
        let t = 10;
        let mut env = ExplicitEnvironment::new(1, OffspringLaw::dirac(1)).unwrap();
        for u in 0..t {
            for x in -(u as i32)..=(u as i32) {
                let s = Site::new(&[x]).unwrap();
                env.set(u, s, base.query(u, &s).clone());
            }
        }
        let (before, _) = partition_function(&env, t).unwrap();
        let bumped = Site::new(&[1]).unwrap();
        env.set(5, bumped, OffspringLaw::dirac(4));
        let (after, _) = partition_function(&env, t).unwrap();
        assert!(after > before);
    }

    #[test]
    fn free_energy_rejects_hyp1_failure() {
        let law = EnvironmentLaw::new(vec![(0.5, vec![1.0]), (0.5, vec![0.0, 0.0, 1.0])]).unwrap();
        assert!(matches!(
            free_energy(&law, 1, 10, 4, 0, FreeEnergyMethod::Point),
            Err(Error::Hyp1(_))
        ));
    }

    #[test]
    fn free_energy_deterministic_is_exact() {
        let law = EnvironmentLaw::deterministic(vec![0.25, 0.25, 0.5]).unwrap();
        for method in [FreeEnergyMethod::Point, FreeEnergyMethod::Slope] {
            let est = free_energy(&law, 1, 40, 5, 9, method).unwrap();
            assert!((est.psi_hat - 1.25f64.ln()).abs() < 1e-12);
            assert_eq!(est.std_error, 0.0);
        }
    }

    #[test]
    fn rho_one_identity_is_exact() {
        assert_eq!(perturbation_identity_check(&two_point(), 1.0, 1, 30, 4).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_identity() {
        let law = EnvironmentLaw::deterministic(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(perturbation_identity_check(&law, 0.5, 1, 10, 0).unwrap() <= 1e-12);
    }
}
