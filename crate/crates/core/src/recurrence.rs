//! Master recurrences for the expected degree sequence.
//!
//! Each model family induces a stationary balance for the limiting degree
//! fractions `d_k`:
//!
//! ```text
//! (1 + B_k) d_k = A_k d_{k-1} + phi_k,        d_{-1} = 0,
//! ```
//!
//! where `phi` is a forcing sequence bounding (or measuring) the distribution
//! of the newcomer's degree. Solving forward with a lower forcing `psi` and an
//! upper forcing `phi` sandwiches the empirical fractions. The same
//! coefficients drive a time-dependent evolution of the expected counts
//! `Dbar_k(t)`, which is what finite-time simulations should be compared
//! against.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Recurrence families. `PureBa` and `PureCopy` are the `alpha = 1`
/// endpoints of `Mixed` and `HardCopy`; they get their own variants because
/// their coefficient structure and tail behavior are qualitatively different.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    PureBa,
    Mixed,
    Classical,
    HardCopy,
    PureCopy,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::PureBa => "pure-ba",
            Family::Mixed => "mixed",
            Family::Classical => "classical",
            Family::HardCopy => "hard-copy",
            Family::PureCopy => "pure-copy",
        }
    }
}

/// Gain/loss coefficients `(A_k, B_k)` of the stationary balance.
///
/// For the copying families `A_k = B_k`; the apparently negative `B_0` there
/// is correct: it absorbs the `alpha * d_0` inflow of newcomers that copy an
/// isolated vertex onto the left-hand side.
pub fn coefficients(family: Family, params: &ModelParams, k: u64) -> (f64, f64) {
    let k = k as f64;
    match family {
        Family::PureBa => ((k - 1.0) / 2.0, k / 2.0),
        Family::Mixed => {
            let cl = (1.0 - params.alpha) * params.mu;
            (
                params.alpha * (k - 1.0) / 2.0 + cl,
                params.alpha * k / 2.0 + cl,
            )
        }
        Family::Classical => (params.zeta, params.zeta),
        Family::HardCopy => {
            let c = params.alpha * (k - 1.0) + (1.0 - params.alpha) * params.mu;
            (c, c)
        }
        Family::PureCopy => (k - 1.0, k - 1.0),
    }
}

/// Coefficients for the mixed family with distinct rates `mu != zeta`,
/// using the mean step edge count `xi = alpha*mu + (1-alpha)*zeta`:
/// `A_k = alpha*mu*(k-1)/(2 xi) + (1-alpha)*zeta`. This reduces to the
/// `mu = zeta` coefficients and reproduces the tail exponent
/// `1 + 2 xi/(alpha mu)`.
pub fn coefficients_general_mixed(params: &ModelParams, k: u64) -> (f64, f64) {
    let k = k as f64;
    let xi = params.xi();
    let pa = params.alpha * params.mu / (2.0 * xi);
    let cl = (1.0 - params.alpha) * params.zeta;
    (pa * (k - 1.0) + cl, pa * k + cl)
}

/// A fully specified stationary recurrence: family, parameters and forcing.
#[derive(Debug, Clone)]
pub struct RecurrenceSpec {
    pub family: Family,
    pub params: ModelParams,
    /// `phi_k` for `k = 0..=k_max`; the solution has the same length.
    pub forcing: Vec<f64>,
    general_rates: bool,
}

impl RecurrenceSpec {
    pub fn preset(family: Family, params: ModelParams, forcing: Vec<f64>) -> Result<Self> {
        match family {
            Family::Mixed => {
                if !(params.alpha > 0.0 && params.alpha < 1.0) {
                    return Err(Error::InvalidParameter(
                        "mixed family needs alpha in (0,1); use pure-ba or classical at the endpoints"
                            .into(),
                    ));
                }
                if params.mu != params.zeta {
                    return Err(Error::InvalidParameter(
                        "mixed preset assumes mu == zeta; use preset_general_mixed".into(),
                    ));
                }
            }
            Family::HardCopy => {
                if params.alpha >= 1.0 {
                    return Err(Error::InvalidParameter(
                        "hard-copy family needs alpha < 1; use pure-copy".into(),
                    ));
                }
            }
            _ => {}
        }
        validate_forcing(&forcing)?;
        Ok(Self {
            family,
            params,
            forcing,
            general_rates: false,
        })
    }

    /// Mixed family with `mu != zeta` allowed (an extension of the preset
    /// coefficients, see [`coefficients_general_mixed`]).
    pub fn preset_general_mixed(params: ModelParams, forcing: Vec<f64>) -> Result<Self> {
        if !(params.alpha > 0.0 && params.alpha < 1.0) {
            return Err(Error::InvalidParameter(
                "general mixed needs alpha in (0,1)".into(),
            ));
        }
        validate_forcing(&forcing)?;
        Ok(Self {
            family: Family::Mixed,
            params,
            forcing,
            general_rates: true,
        })
    }

    pub fn gain(&self, k: u64) -> f64 {
        self.rates(k).0
    }

    pub fn loss(&self, k: u64) -> f64 {
        self.rates(k).1
    }

    fn rates(&self, k: u64) -> (f64, f64) {
        if self.general_rates {
            coefficients_general_mixed(&self.params, k)
        } else {
            coefficients(self.family, &self.params, k)
        }
    }
}

fn validate_forcing(forcing: &[f64]) -> Result<()> {
    if forcing.is_empty() {
        return Err(Error::InvalidParameter("forcing must be non-empty".into()));
    }
    if let Some(k) = forcing.iter().position(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::Numeric {
            k,
            reason: format!("forcing value {} is not a finite non-negative number", forcing[k]),
        });
    }
    Ok(())
}

/// A solved stationary sequence `d_k`, `k = 0..=k_max`.
#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceSolution {
    pub d: Vec<f64>,
}

impl RecurrenceSolution {
    pub fn k_max(&self) -> usize {
        self.d.len() - 1
    }

    /// `d_k / d_{k-1}`, the quantity whose limit separates power-law from
    /// geometric tails.
    pub fn ratio(&self, k: usize) -> f64 {
        self.d[k] / self.d[k - 1]
    }

    /// Local power-law exponent `log(d_{k-1}/d_k) / log(k/(k-1))`.
    pub fn local_exponent(&self, k: usize) -> f64 {
        (self.d[k - 1] / self.d[k]).ln() / (k as f64 / (k as f64 - 1.0)).ln()
    }
}

/// Forward substitution of the stationary balance.
pub fn solve_forward(spec: &RecurrenceSpec) -> Result<RecurrenceSolution> {
    let mut d = Vec::with_capacity(spec.forcing.len());
    let mut prev = 0.0f64;
    for (k, &phi) in spec.forcing.iter().enumerate() {
        let (a, b) = spec.rates(k as u64);
        let denom = 1.0 + b;
        let numer = a * prev + phi;
        let value = if denom > 0.0 {
            numer / denom
        } else if numer == 0.0 {
            // Degenerate balance (pure copying at k = 0): no stationary mass.
            0.0
        } else {
            return Err(Error::Numeric {
                k,
                reason: format!("balance denominator {denom} <= 0 with inflow {numer}"),
            });
        };
        if !value.is_finite() {
            return Err(Error::Numeric {
                k,
                reason: "stationary value overflowed".into(),
            });
        }
        d.push(value);
        prev = value;
    }
    Ok(RecurrenceSolution { d })
}

/// Closed form for the pure preferential-attachment balance,
/// `d_k = sum_{j<=k} 2 j (j+1) phi_j / (k (k+1) (k+2))` for `k >= 1` and
/// `d_0 = phi_0`, evaluated with a running prefix sum. Used as an
/// independent cross-check of [`solve_forward`].
pub fn closed_form_pure_ba(forcing: &[f64]) -> Result<RecurrenceSolution> {
    validate_forcing(forcing)?;
    let mut d = Vec::with_capacity(forcing.len());
    d.push(forcing[0]);
    let mut prefix = 0.0f64;
    for (k, &phi) in forcing.iter().enumerate().skip(1) {
        let k = k as f64;
        prefix += 2.0 * k * (k + 1.0) * phi;
        d.push(prefix / (k * (k + 1.0) * (k + 2.0)));
    }
    Ok(RecurrenceSolution { d })
}

/// Closed form for the mixed balance with `mu == zeta` and `alpha` strictly
/// inside (0,1). Writing `c = 2(1-alpha)mu/alpha` and `b = 2/alpha + c`, the
/// balance is `(k + b) d_k = (k - 1 + c) d_{k-1} + (2/alpha) phi_k` and
/// unrolls to
///
/// ```text
/// d_k = P(k) * sum_{j<=k} (2/alpha) phi_j / ((j + b) P(j)),
/// P(k) = prod_{i<=k} (i - 1 + c)/(i + b),
/// ```
///
/// evaluated with log-space products so large `k` stays finite.
pub fn closed_form_mixed(params: &ModelParams, forcing: &[f64]) -> Result<RecurrenceSolution> {
    if !(params.alpha > 0.0 && params.alpha < 1.0) {
        return Err(Error::InvalidParameter(
            "closed form needs alpha in (0,1)".into(),
        ));
    }
    if params.mu != params.zeta {
        return Err(Error::InvalidParameter(
            "closed form assumes mu == zeta".into(),
        ));
    }
    validate_forcing(forcing)?;
    let c = 2.0 * (1.0 - params.alpha) * params.mu / params.alpha;
    let b = 2.0 / params.alpha + c;
    let scale = 2.0 / params.alpha;
    let mut d = Vec::with_capacity(forcing.len());
    let mut log_p = 0.0f64; // ln P(k)
    let mut sum = scale * forcing[0] / b; // sum of phi_j / ((j+b) P(j))
    d.push(sum);
    for (k, &phi) in forcing.iter().enumerate().skip(1) {
        let kf = k as f64;
        log_p += ((kf - 1.0 + c) / (kf + b)).ln();
        sum += scale * phi / (kf + b) * (-log_p).exp();
        d.push(log_p.exp() * sum);
    }
    Ok(RecurrenceSolution { d })
}

fn factorial_ln(n: u64) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

/// Lower forcing: all mass at `k = 0`. `rho` must be a genuine lower bound on
/// the limiting probability of an isolated newcomer; `None` picks a
/// conservative family default.
pub fn forcing_lower_psi(
    family: Family,
    params: &ModelParams,
    rho: Option<f64>,
    k_max: usize,
) -> Result<Vec<f64>> {
    let rho = match rho {
        Some(r) => r,
        None => default_rho(family, params)?,
    };
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rho must be in (0,1], got {rho}"
        )));
    }
    let mut psi = vec![0.0; k_max + 1];
    psi[0] = rho;
    Ok(psi)
}

/// Conservative default for the isolated-newcomer mass `rho`.
pub fn default_rho(family: Family, params: &ModelParams) -> Result<f64> {
    match family {
        Family::PureBa => Ok((-params.mu).exp() / 2.0),
        Family::Mixed | Family::Classical => {
            Ok((1.0 - params.alpha) * (-params.zeta).exp())
        }
        Family::HardCopy => Ok((1.0 - params.alpha) * (-params.mu).exp() / 2.0),
        Family::PureCopy => Err(Error::Unsupported(
            "pure copying never creates isolated vertices; no lower forcing".into(),
        )),
    }
}

/// Upper forcing: a family-specific bound on the limiting distribution of the
/// newcomer's degree.
///
/// * pure BA: `phi_0 = e^{-mu}`, `phi_k = C k^{-4}` with `C = max(mu,1)^4 4!`;
/// * mixed: `phi_0 = e^{-mu}`, `phi_k = C(alpha) k^{-n(alpha)}` with
///   `n = 3 + floor(2/alpha)` and `C = max(mu,1)^n n!`, so the forcing decays
///   strictly faster than the solution's tail;
/// * classical: the Poisson(`zeta`) mass function;
/// * hard copy: `(1-alpha)` times the Poisson(`mu`) mass function;
/// * pure copy: zero (the newcomer's degree is another vertex's degree, not
///   an external source).
pub fn forcing_upper_phi(family: Family, params: &ModelParams, k_max: usize) -> Result<Vec<f64>> {
    let mut phi = vec![0.0; k_max + 1];
    match family {
        Family::PureBa => {
            phi[0] = (-params.mu).exp();
            let log_c = 4.0 * params.mu.max(1.0).ln() + factorial_ln(4);
            for (k, slot) in phi.iter_mut().enumerate().skip(1) {
                *slot = (log_c - 4.0 * (k as f64).ln()).exp();
            }
        }
        Family::Mixed => {
            if !(params.alpha > 0.0 && params.alpha < 1.0) {
                return Err(Error::InvalidParameter(
                    "mixed upper forcing needs alpha in (0,1); use the classical or pure-ba family"
                        .into(),
                ));
            }
            let n = 3 + (2.0 / params.alpha).floor() as u64;
            let log_c = n as f64 * params.mu.max(1.0).ln() + factorial_ln(n);
            phi[0] = (-params.mu).exp();
            for (k, slot) in phi.iter_mut().enumerate().skip(1) {
                // An upper bound may be astronomically slack at small k; cap
                // instead of overflowing.
                *slot = (log_c - n as f64 * (k as f64).ln()).exp().min(1e300);
            }
        }
        Family::Classical => {
            poisson_into(&mut phi, params.zeta, 1.0);
        }
        Family::HardCopy => {
            poisson_into(&mut phi, params.mu, 1.0 - params.alpha);
        }
        Family::PureCopy => {}
    }
    Ok(phi)
}

fn poisson_into(buf: &mut [f64], rate: f64, scale: f64) {
    let mut p = (-rate).exp();
    for (k, slot) in buf.iter_mut().enumerate() {
        *slot = scale * p;
        p *= rate / (k as f64 + 1.0);
    }
}

/// Plug-in forcing: the empirical increment distribution from a simulation
/// window, renormalized to a probability distribution.
pub fn forcing_plugin(increment_freq: &[f64]) -> Result<Vec<f64>> {
    validate_forcing(increment_freq)?;
    let total: f64 = increment_freq.iter().sum();
    if total <= 0.0 {
        return Err(Error::InsufficientData(
            "increment distribution has no mass".into(),
        ));
    }
    Ok(increment_freq.iter().map(|x| x / total).collect())
}

/// Forcing for the time-dependent evolution.
#[derive(Debug, Clone)]
pub enum EvolveForcing {
    /// A fixed sequence `phi_k`, injected from step `t >= k` on. When the
    /// sequence is a probability distribution the injected mass is
    /// renormalized over `k <= t` so each step adds exactly one vertex.
    Stationary(Vec<f64>),
    /// The newcomer-degree distribution of a classical step: the binomial
    /// `B(t+1, rate/(t+1))` mass function at each step (scaled by `1-alpha`
    /// for the hard-copy family).
    StepBinomial,
}

/// Evolves the expected counts `Dbar_k(t)` from the two-vertex seed at
/// `t = 1` up to `t_max`, truncated at `k_max`. Returns the final row.
pub fn evolve_master(
    family: Family,
    params: &ModelParams,
    forcing: &EvolveForcing,
    t_max: u64,
    k_max: usize,
) -> Result<Vec<f64>> {
    Ok(evolve_master_grid(family, params, forcing, &[t_max], k_max)?
        .pop()
        .expect("one grid point requested")
        .1)
}

/// Same as [`evolve_master`] but snapshots the state at every requested time
/// (ascending) in one pass.
pub fn evolve_master_grid(
    family: Family,
    params: &ModelParams,
    forcing: &EvolveForcing,
    grid: &[u64],
    k_max: usize,
) -> Result<Vec<(u64, Vec<f64>)>> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] < 1 {
        return Err(Error::InvalidParameter(
            "time grid must be ascending and start at t >= 1".into(),
        ));
    }
    if let EvolveForcing::Stationary(phi) = forcing {
        validate_forcing(phi)?;
    }
    let t_max = *grid.last().unwrap();
    let mut d = vec![0.0f64; k_max + 1];
    if k_max >= 1 {
        d[1] = 2.0;
    }
    let stationary_sum = match forcing {
        EvolveForcing::Stationary(phi) => phi.iter().sum::<f64>(),
        EvolveForcing::StepBinomial => 0.0,
    };
    let renormalize = (stationary_sum - 1.0).abs() < 1e-9;

    let mut out = Vec::with_capacity(grid.len());
    let mut next_grid = 0usize;
    if grid[0] == 1 {
        out.push((1, d.clone()));
        next_grid = 1;
    }
    let mut new = vec![0.0f64; k_max + 1];
    let mut pmf = Vec::new();
    for t in 1..t_max {
        let tf = t as f64;
        match family {
            Family::Classical if params.zeta >= tf + 1.0 => {
                // Connection probability capped at 1: the graph stays
                // complete and every degree shifts up by one.
                new[0] = 0.0;
                for k in (1..=k_max).rev() {
                    new[k] = d[k - 1];
                }
                let newcomer = (t + 1) as usize;
                if newcomer <= k_max {
                    new[newcomer] += 1.0;
                }
            }
            Family::PureBa | Family::Mixed | Family::Classical => {
                // Early-time clamp of the classical connection probability,
                // mirroring min(zeta/t, 1) in the process itself. The
                // classical branch divides by t+1 and only runs once
                // zeta < t+1, so it never clamps.
                let z_eff = match family {
                    Family::Classical => params.zeta,
                    _ => params.zeta.min(tf),
                };
                let (denom, rates): (f64, fn(&ModelParams, f64, f64) -> (f64, f64)) = match family
                {
                    Family::PureBa => (tf, |_, k, _| ((k - 1.0) / 2.0, k / 2.0)),
                    Family::Mixed => (tf, |p, k, z| {
                        let cl = (1.0 - p.alpha) * z;
                        (p.alpha * (k - 1.0) / 2.0 + cl, p.alpha * k / 2.0 + cl)
                    }),
                    Family::Classical => ((t + 1) as f64, |_, _, z| (z, z)),
                    _ => unreachable!(),
                };
                for k in 0..=k_max {
                    let (a, b) = rates(params, k as f64, z_eff);
                    let inflow = if k >= 1 { a * d[k - 1] } else { 0.0 };
                    new[k] = d[k] + (inflow - b * d[k]) / denom;
                }
            }
            Family::HardCopy | Family::PureCopy => {
                // For t < mu - 1 the classical probability mu/(t+1) caps at 1.
                let rate = match family {
                    Family::HardCopy => params.mu.min(tf + 1.0),
                    _ => 0.0,
                };
                let alpha = match family {
                    Family::HardCopy => params.alpha,
                    _ => 1.0,
                };
                for k in 0..=k_max {
                    let c = alpha * (k as f64 - 1.0) + (1.0 - alpha) * rate;
                    let prev = if k >= 1 { d[k - 1] } else { 0.0 };
                    new[k] = d[k] + c * (prev - d[k]) / (tf + 1.0);
                }
            }
        }
        // Newcomer-degree injection.
        let complete_segment = family == Family::Classical && params.zeta >= tf + 1.0;
        if !complete_segment {
            match forcing {
                EvolveForcing::Stationary(phi) => {
                    let hi = (t as usize).min(phi.len() - 1).min(k_max);
                    let norm = if renormalize {
                        phi[..=(t as usize).min(phi.len() - 1)].iter().sum::<f64>()
                    } else {
                        1.0
                    };
                    if norm > 0.0 {
                        for k in 0..=hi {
                            new[k] += phi[k] / norm;
                        }
                    }
                }
                EvolveForcing::StepBinomial => {
                    let (rate, scale) = match family {
                        Family::HardCopy => (params.mu, 1.0 - params.alpha),
                        Family::Classical => (params.zeta, 1.0),
                        Family::PureCopy => (0.0, 0.0),
                        _ => {
                            return Err(Error::Unsupported(
                                "binomial forcing applies to classical-manner steps only".into(),
                            ))
                        }
                    };
                    if scale > 0.0 {
                        binomial_pmf_into(&mut pmf, t + 1, rate / (t + 1) as f64);
                        for (k, &p) in pmf.iter().enumerate().take(k_max + 1) {
                            new[k] += scale * p;
                        }
                    }
                }
            }
        }
        for (k, v) in new.iter_mut().enumerate() {
            if *v < 0.0 {
                if *v < -1e-12 * (t as f64) {
                    return Err(Error::Numeric {
                        k,
                        reason: format!("expected count went negative ({v}) at t={}", t + 1),
                    });
                }
                *v = 0.0;
            }
        }
        std::mem::swap(&mut d, &mut new);
        if next_grid < grid.len() && grid[next_grid] == t + 1 {
            out.push((t + 1, d.clone()));
            next_grid += 1;
        }
    }
    Ok(out)
}

fn binomial_pmf_into(buf: &mut Vec<f64>, n: u64, p: f64) {
    buf.clear();
    let p = p.clamp(0.0, 1.0);
    if p >= 1.0 {
        buf.resize(n as usize + 1, 0.0);
        buf[n as usize] = 1.0;
        return;
    }
    let q = 1.0 - p;
    let mut val = (n as f64 * q.ln()).exp();
    for k in 0..=n {
        buf.push(val);
        val *= (n - k) as f64 / (k + 1) as f64 * p / q;
    }
}

/// Predicted tail behavior of the stationary sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailDescriptor {
    /// `d_k ~ C k^{-beta}`.
    PowerLaw { beta: f64 },
    /// `d_k / d_{k-1} -> ratio < 1`.
    Geometric { ratio: f64 },
    /// No normalizable stationary tail.
    Degenerate,
}

pub fn predicted_exponent(family: Family, params: &ModelParams) -> TailDescriptor {
    match family {
        Family::PureBa => TailDescriptor::PowerLaw { beta: 3.0 },
        Family::Mixed => {
            if params.alpha <= 0.0 {
                TailDescriptor::Geometric {
                    ratio: params.zeta / (1.0 + params.zeta),
                }
            } else if params.alpha >= 1.0 {
                TailDescriptor::PowerLaw { beta: 3.0 }
            } else {
                TailDescriptor::PowerLaw {
                    beta: 1.0 + 2.0 * params.xi() / (params.alpha * params.mu),
                }
            }
        }
        Family::Classical => TailDescriptor::Geometric {
            ratio: params.zeta / (1.0 + params.zeta),
        },
        Family::HardCopy => {
            if params.alpha <= 0.0 {
                TailDescriptor::Geometric {
                    ratio: params.mu / (1.0 + params.mu),
                }
            } else if params.alpha >= 1.0 {
                TailDescriptor::Degenerate
            } else {
                TailDescriptor::PowerLaw {
                    beta: 1.0 / params.alpha,
                }
            }
        }
        Family::PureCopy => TailDescriptor::Degenerate,
    }
}

/// Per-class verdict of the lower/upper sandwich against empirical fractions.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichVerdict {
    pub k: usize,
    pub lower: f64,
    pub upper: f64,
    pub empirical: f64,
    pub pass: bool,
}

/// Checks `lower_k - slack <= empirical_k <= upper_k + slack` classwise.
/// With the default lower forcing the lower side is informative only at
/// `k = 0` (it is zero elsewhere).
pub fn comparing_sandwich(
    lower: &[f64],
    upper: &[f64],
    empirical: &[f64],
    slack: f64,
) -> Vec<SandwichVerdict> {
    let n = lower.len().min(upper.len()).min(empirical.len());
    (0..n)
        .map(|k| {
            let pass = empirical[k] >= lower[k] - slack && empirical[k] <= upper[k] + slack;
            SandwichVerdict {
                k,
                lower: lower[k],
                upper: upper[k],
                empirical: empirical[k],
                pass,
            }
        })
        .collect()
}
