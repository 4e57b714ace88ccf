//! Offspring laws, environment laws, the thinning perturbation and the lazily
//! realised i.i.d. space-time environment.

use std::fmt;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{check_dim, Site};
use crate::rng::{Key, Stream};

/// Normalisation tolerance for probability vectors.
pub const NORM_TOL: f64 = 1e-12;

/// A finitely supported distribution on the nonnegative integers.
///
/// Besides the pmf we keep the cumulative distribution `cdf[k] = 1 - tail[k]`
/// where `tail[k] = sum_{j > k} pmf[j]`. Thinning multiplies the tail by rho,
/// so the sampler is monotone in rho bit for bit, not only in exact arithmetic.
#[derive(Clone, PartialEq)]
pub struct OffspringLaw {
    pmf: Vec<f64>,
    tail: Vec<f64>,
    cdf: Vec<f64>,
    mean: f64,
}

impl OffspringLaw {
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::MalformedLaw("empty pmf".into()));
        }
        if let Some((k, p)) = pmf
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::MalformedLaw(format!(
                "pmf entry {k} is {p}, must be a nonnegative number"
            )));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::MalformedLaw(format!("pmf sums to {total}, not 1")));
        }
        let mut pmf = pmf;
        while pmf.len() > 1 && *pmf.last().unwrap() == 0.0 {
            pmf.pop();
        }
        let mut tail = vec![0.0; pmf.len()];
        for k in (0..pmf.len() - 1).rev() {
            tail[k] = tail[k + 1] + pmf[k + 1];
        }
        let cdf = tail.iter().map(|t| 1.0 - t).collect();
        let mean = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        Ok(OffspringLaw {
            pmf,
            tail,
            cdf,
            mean,
        })
    }

    /// Dirac mass at `k`.
    pub fn dirac(k: usize) -> Self {
        let mut pmf = vec![0.0; k + 1];
        pmf[k] = 1.0;
        Self::new(pmf).expect("dirac is normalised")
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Largest value in the support (after trimming trailing zeros).
    pub fn max_offspring(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn is_dirac_zero(&self) -> bool {
        self.pmf.len() == 1
    }

    /// `q^rho = rho q + (1 - rho) delta_0`.
    pub fn perturb(&self, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        if rho == 1.0 {
            return Ok(self.clone());
        }
        let mut pmf: Vec<f64> = self.pmf.iter().map(|p| rho * p).collect();
        pmf[0] = rho * self.pmf[0] + (1.0 - rho);
        let tail: Vec<f64> = self.tail.iter().map(|t| rho * t).collect();
        let cdf = tail.iter().map(|t| 1.0 - t).collect();
        Ok(OffspringLaw {
            pmf,
            tail,
            cdf,
            mean: rho * self.mean,
        })
    }

    /// Inverse-CDF sampling: the smallest `k` with `F(k) > u`.
    #[inline]
    pub fn sample(&self, u: f64) -> usize {
        // counting instead of searching avoids a data-dependent branch
        let n = self.cdf.len() - 1;
        self.cdf[..n].iter().map(|&f| (f <= u) as usize).sum()
    }
}

impl fmt::Debug for OffspringLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OffspringLaw{:?}", self.pmf)
    }
}

/// Draws an offspring count from `q` using the uniform variate `u`.
#[inline]
pub fn sample_offspring(q: &OffspringLaw, u: f64) -> usize {
    q.sample(u)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("rho must lie in (0, 1], got {rho}")))
    }
}

/// A finite mixture of offspring laws: the law of one site of the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentLaw {
    weights: Vec<f64>,
    laws: Vec<OffspringLaw>,
    cumulative: Vec<f64>,
}

impl EnvironmentLaw {
    /// Builds a law from `(weight, pmf)` pairs. Components with identical pmfs
    /// are merged and zero-weight components dropped.
    pub fn new(components: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::MalformedLaw("no components".into()));
        }
        let mut parsed = Vec::with_capacity(components.len());
        for (i, (w, pmf)) in components.into_iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::MalformedLaw(format!(
                    "component {i}: weight {w} is not a nonnegative number"
                )));
            }
            let law = OffspringLaw::new(pmf)
                .map_err(|e| Error::MalformedLaw(format!("component {i}: {}", inner(&e))))?;
            parsed.push((w, law));
        }
        let total: f64 = parsed.iter().map(|c| c.0).sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::MalformedLaw(format!(
                "component weights sum to {total}, not 1"
            )));
        }
        Self::from_laws(parsed)
    }

    /// A degenerate (deterministic) environment.
    pub fn deterministic(pmf: Vec<f64>) -> Result<Self> {
        Self::new(vec![(1.0, pmf)])
    }

    fn from_laws(parsed: Vec<(f64, OffspringLaw)>) -> Result<Self> {
        let mut weights: Vec<f64> = Vec::new();
        let mut laws: Vec<OffspringLaw> = Vec::new();
        for (w, law) in parsed {
            if w == 0.0 {
                continue;
            }
            match laws.iter().position(|l| l.pmf == law.pmf) {
                Some(j) => weights[j] += w,
                None => {
                    weights.push(w);
                    laws.push(law);
                }
            }
        }
        if laws.is_empty() {
            return Err(Error::MalformedLaw("all component weights are zero".into()));
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        *cumulative.last_mut().unwrap() = f64::INFINITY;
        Ok(EnvironmentLaw {
            weights,
            laws,
            cumulative,
        })
    }

    pub fn len(&self) -> usize {
        self.laws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.laws.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (f64, &OffspringLaw)> {
        self.weights.iter().copied().zip(self.laws.iter())
    }

    pub fn component(&self, i: usize) -> &OffspringLaw {
        &self.laws[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Component selected by a uniform variate.
    #[inline]
    pub fn select(&self, u: f64) -> usize {
        self.cumulative.iter().position(|&c| c > u).unwrap_or(0)
    }

    /// Annealed mean `E[m]`.
    pub fn annealed_mean(&self) -> f64 {
        self.components().map(|(w, l)| w * l.mean()).sum()
    }

    /// `E[log m]`; `-inf` when a component has mean zero.
    pub fn mean_log_mean(&self) -> f64 {
        self.components().map(|(w, l)| w * l.mean().ln()).sum()
    }

    /// Applies the thinning perturbation to every component; weights unchanged.
    pub fn perturb(&self, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        let laws = self
            .laws
            .iter()
            .map(|l| l.perturb(rho))
            .collect::<Result<Vec<_>>>()?;
        Ok(EnvironmentLaw {
            weights: self.weights.clone(),
            laws,
            cumulative: self.cumulative.clone(),
        })
    }

    pub fn is_deterministic(&self) -> bool {
        self.laws.len() == 1
    }
}

fn inner(e: &Error) -> String {
    match e {
        Error::MalformedLaw(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Free function form of [`EnvironmentLaw::perturb`].
pub fn perturb(law: &EnvironmentLaw, rho: f64) -> Result<EnvironmentLaw> {
    law.perturb(rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Dichotomy {
    /// Some component is the Dirac mass at zero.
    H,
    /// Every component puts mass on positive offspring counts.
    HComplement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub hyp1_ok: bool,
    pub hyp2_ok: bool,
    pub dichotomy: Dichotomy,
    pub messages: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.hyp1_ok && self.hyp2_ok
    }
}

/// Checks the moment and non-degeneracy assumptions and classifies the law.
pub fn validate(law: &EnvironmentLaw) -> ValidationReport {
    let mut messages = Vec::new();
    let mut hyp1_ok = true;
    let mut dirac_zero = false;
    for (i, (w, q)) in law.components().enumerate() {
        if w > 0.0 && q.mean() <= 0.0 {
            hyp1_ok = false;
            messages.push(format!(
                "component {i} (weight {w}) has mean 0, so E[1/m] is infinite"
            ));
        }
        if w > 0.0 && q.is_dirac_zero() {
            dirac_zero = true;
        }
    }
    let can_die = law.components().any(|(w, q)| w > 0.0 && q.pmf()[0] > 0.0);
    // pmf[0] + pmf[1] < 1, read off the tail to avoid rounding in the sum
    let can_branch = law.components().any(|(w, q)| w > 0.0 && q.tail[1.min(q.tail.len() - 1)] > 0.0);
    if !can_die {
        messages.push("no component puts mass on 0 children: survival is certain".into());
    }
    if !can_branch {
        messages.push("no component puts mass on 2 or more children: extinction is certain".into());
    }
    let dichotomy = if dirac_zero {
        messages.push("some component is the Dirac mass at 0 (case H)".into());
        Dichotomy::H
    } else {
        Dichotomy::HComplement
    };
    ValidationReport {
        hyp1_ok,
        hyp2_ok: can_die && can_branch,
        dichotomy,
        messages,
    }
}

/// A space-time field of offspring laws.
pub trait Environment: Sync {
    fn dim(&self) -> usize;

    /// The offspring law `q_{t,x}`.
    fn law_at(&self, t: u32, x: &Site) -> &OffspringLaw;

    fn mean_at(&self, t: u32, x: &Site) -> f64 {
        self.law_at(t, x).mean()
    }
}

/// The i.i.d. environment with site law `law`, realised lazily from `seed`.
#[derive(Debug, Clone)]
pub struct QuenchedEnvironment {
    law: EnvironmentLaw,
    seed: u64,
    dim: usize,
    key: Key,
}

impl QuenchedEnvironment {
    pub fn new(law: EnvironmentLaw, seed: u64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(QuenchedEnvironment {
            law,
            seed,
            dim,
            key: Key::new(seed, Stream::Environment),
        })
    }

    pub fn law(&self) -> &EnvironmentLaw {
        &self.law
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Index of the mixture component at `(t, x)`.
    #[inline]
    pub fn component_index(&self, t: u32, x: &Site) -> usize {
        if self.law.is_deterministic() {
            return 0;
        }
        let mut k = self.key.absorb(t as u64);
        for &c in x.coords(self.dim) {
            k = k.absorb_i64(c as i64);
        }
        self.law.select(k.uniform())
    }

    pub fn query(&self, t: u32, x: &Site) -> &OffspringLaw {
        self.law.component(self.component_index(t, x))
    }

    /// Same seed and dimension, thinned law. Site means become `rho * m_{t,x}`.
    pub fn perturbed(&self, rho: f64) -> Result<Self> {
        Self::new(self.law.perturb(rho)?, self.seed, self.dim)
    }
}

impl Environment for QuenchedEnvironment {
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn law_at(&self, t: u32, x: &Site) -> &OffspringLaw {
        self.query(t, x)
    }
}

/// An environment given site by site, with a default law elsewhere.
#[derive(Debug, Clone)]
pub struct ExplicitEnvironment {
    dim: usize,
    default: OffspringLaw,
    sites: FxHashMap<(u32, Site), OffspringLaw>,
}

impl ExplicitEnvironment {
    pub fn new(dim: usize, default: OffspringLaw) -> Result<Self> {
        check_dim(dim)?;
        Ok(ExplicitEnvironment {
            dim,
            default,
            sites: FxHashMap::default(),
        })
    }

    pub fn set(&mut self, t: u32, x: Site, law: OffspringLaw) -> &mut Self {
        self.sites.insert((t, x), law);
        self
    }
}

impl Environment for ExplicitEnvironment {
    fn dim(&self) -> usize {
        self.dim
    }

    fn law_at(&self, t: u32, x: &Site) -> &OffspringLaw {
        self.sites.get(&(t, *x)).unwrap_or(&self.default)
    }
}
