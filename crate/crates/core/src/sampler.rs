//! MCMC orchestration for bagged posteriors: one long chain on the full
//! data, then `B` short chains on bootstrap datasets warm-started from the
//! long chain's samples and adapted hyperparameters.

use std::fmt::Debug;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ConjugateModel, Dataset, GaussianLocationModel};
use crate::randstream::{draw_counts, resample, SeedPath, Stream};

/// Output of one MCMC call: adapted hyperparameters and `T x D` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct McmcRun<H> {
    pub hyper: H,
    pub samples: DMatrix<f64>,
}

/// An MCMC procedure `(data, T, theta_init, hyper, stream) -> (hyper, samples)`.
/// A missing `theta_init` lets the procedure choose its own starting point.
pub trait MCMCProcedure: Sync {
    type Hyper: Clone + Debug + Send + Sync + Serialize;

    fn run(
        &self,
        data: &Dataset,
        t: usize,
        theta_init: Option<&DVector<f64>>,
        hyper: &Self::Hyper,
        rng: &mut Stream,
    ) -> Result<McmcRun<Self::Hyper>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    /// Long-run length `T`.
    pub t: usize,
    /// Kept samples per short run `T_flat`.
    pub t_flat: usize,
    /// Bootstrap dataset size `M`.
    pub m: usize,
    /// Number of bootstrap datasets `B`.
    pub b: usize,
    /// Extra leading fraction of each short run that is run and discarded.
    #[serde(default)]
    pub discard_fraction: f64,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t == 0 || self.t_flat == 0 {
            return Err(Error::invalid("t and t_flat must be at least 1"));
        }
        if self.b > 0 && self.m == 0 {
            return Err(Error::invalid("bootstrap size m must be positive"));
        }
        if !(0.0..1.0).contains(&self.discard_fraction) {
            return Err(Error::invalid(format!(
                "discard_fraction must lie in [0, 1), got {}",
                self.discard_fraction
            )));
        }
        Ok(())
    }

    /// Samples discarded at the start of each short run.
    pub fn burn_in(&self) -> usize {
        (self.discard_fraction * self.t_flat as f64).ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortRunMeta<H> {
    pub index: usize,
    pub counts_seed_path: SeedPath,
    /// Row of the long run used as the initial state.
    pub init_index: usize,
    pub theta_init: Vec<f64>,
    pub hyper: H,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerOutput<H> {
    pub standard_samples: DMatrix<f64>,
    /// `B * T_flat` rows, short runs concatenated in index order.
    pub bagged_samples: DMatrix<f64>,
    pub long_run_hyper: H,
    pub runs: Vec<ShortRunMeta<H>>,
    pub t_flat: usize,
}

type ShortRun<H> = (ShortRunMeta<H>, DMatrix<f64>);

/// Stream layout: long run at `root/0`; short run `b` draws its bootstrap
/// counts from `root/1/b/0`, its initial state from `root/1/b/1` and runs its
/// chain on `root/1/b/2`.
pub fn bayesbag_sample<P: MCMCProcedure>(
    mcmc: &P,
    data: &Dataset,
    cfg: &SamplerConfig,
    beta_init: &P::Hyper,
    root: &SeedPath,
) -> Result<SamplerOutput<P::Hyper>> {
    cfg.validate()?;
    let long = mcmc.run(data, cfg.t, None, beta_init, &mut root.child(0).stream())?;
    if long.samples.nrows() != cfg.t {
        return Err(Error::ContractViolation {
            run: "long run".into(),
            expected: cfg.t,
            got: long.samples.nrows(),
        });
    }
    let dim = long.samples.ncols();
    let burn = cfg.burn_in();
    let short_len = cfg.t_flat + burn;
    let runs: Vec<Result<ShortRun<P::Hyper>>> = (0..cfg.b)
        .into_par_iter()
        .map(|b| {
            let base = root.child(1).child(b as u32);
            let counts_path = base.child(0);
            let boot = resample(data, &draw_counts(data.n(), cfg.m, &counts_path)?)?;
            let init_index = base.child(1).stream().random_range(0..cfg.t);
            let theta_init = long.samples.row(init_index).transpose();
            let run = mcmc.run(
                &boot,
                short_len,
                Some(&theta_init),
                &long.hyper,
                &mut base.child(2).stream(),
            )?;
            if run.samples.nrows() != short_len || run.samples.ncols() != dim {
                return Err(Error::ContractViolation {
                    run: format!("short run {b}"),
                    expected: short_len,
                    got: run.samples.nrows(),
                });
            }
            let kept = run.samples.rows(burn, cfg.t_flat).into_owned();
            Ok((
                ShortRunMeta {
                    index: b,
                    counts_seed_path: counts_path,
                    init_index,
                    theta_init: theta_init.iter().copied().collect(),
                    hyper: run.hyper,
                },
                kept,
            ))
        })
        .collect();
    let mut metas = Vec::with_capacity(cfg.b);
    let mut bagged = DMatrix::zeros(cfg.b * cfg.t_flat, dim);
    for (b, r) in runs.into_iter().enumerate() {
        let (meta, samples) = r?;
        bagged.rows_mut(b * cfg.t_flat, cfg.t_flat).copy_from(&samples);
        metas.push(meta);
    }
    Ok(SamplerOutput {
        standard_samples: long.samples,
        bagged_samples: bagged,
        long_run_hyper: long.hyper,
        runs: metas,
        t_flat: cfg.t_flat,
    })
}

impl<H> SamplerOutput<H> {
    /// Mean of each short run's samples, one row per run.
    pub fn run_means(&self) -> DMatrix<f64> {
        let b = self.runs.len();
        let dim = self.bagged_samples.ncols();
        DMatrix::from_fn(b, dim, |i, j| {
            self.bagged_samples.view((i * self.t_flat, j), (self.t_flat, 1)).mean()
        })
    }

    /// CSV with a `run` column (`standard` or `bag-<b>`) and `theta_0..` columns.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let dim = self.standard_samples.ncols();
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["run".to_string()];
        header.extend((0..dim).map(|j| format!("theta_{j}")));
        w.write_record(&header)?;
        let mut write_row = |label: &str, row: nalgebra::RowDVector<f64>| -> Result<()> {
            let mut rec = vec![label.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
            Ok(())
        };
        for row in self.standard_samples.row_iter() {
            write_row("standard", row.into_owned())?;
        }
        for (i, row) in self.bagged_samples.row_iter().enumerate() {
            write_row(&format!("bag-{}", i / self.t_flat.max(1)), row.into_owned())?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Adapted proposal scale of the random-walk Metropolis sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RwmHyper {
    pub proposal_sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RwmOutput {
    pub samples: DMatrix<f64>,
    pub proposal_sd: f64,
    /// Acceptance rate after adaptation stopped (whole run if `t < 2`).
    pub acceptance_rate: f64,
}

pub const TARGET_ACCEPTANCE: f64 = 0.234;

/// Metropolis with spherical Gaussian proposals. During the first half of
/// the run `log(sd)` moves by `(i + 1)^{-0.6} (accept_prob - 0.234)`; the
/// second half uses the frozen scale. Row `i` of the output is the state
/// after step `i`.
pub fn random_walk_metropolis<F, R>(
    log_density: F,
    proposal_sd: f64,
    t: usize,
    theta_init: &[f64],
    rng: &mut R,
) -> Result<RwmOutput>
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    if !(proposal_sd > 0.0 && proposal_sd.is_finite()) {
        return Err(Error::invalid(format!(
            "proposal sd must be positive, got {proposal_sd}"
        )));
    }
    if theta_init.is_empty() {
        return Err(Error::invalid("initial state must have at least one coordinate"));
    }
    let mut current = theta_init.to_vec();
    let mut lp = log_density(&current);
    if !lp.is_finite() {
        return Err(Error::InvalidStart(lp));
    }
    let dim = current.len();
    let adapt_until = t / 2;
    let mut log_sd = proposal_sd.ln();
    let mut samples = DMatrix::zeros(t, dim);
    let mut proposal = vec![0.0; dim];
    let (mut accepted, mut counted) = (0usize, 0usize);
    for i in 0..t {
        let sd = log_sd.exp();
        for (p, c) in proposal.iter_mut().zip(&current) {
            let e: f64 = StandardNormal.sample(rng);
            *p = c + sd * e;
        }
        let lp_new = log_density(&proposal);
        let log_ratio = if lp_new.is_nan() {
            f64::NEG_INFINITY
        } else {
            lp_new - lp
        };
        let accept_prob = log_ratio.min(0.0).exp();
        let u: f64 = rng.random();
        let accept = u < accept_prob;
        if accept {
            current.copy_from_slice(&proposal);
            lp = lp_new;
        }
        if i < adapt_until {
            log_sd += ((i + 1) as f64).powf(-0.6) * (accept_prob - TARGET_ACCEPTANCE);
        } else {
            counted += 1;
            accepted += accept as usize;
        }
        for (j, v) in current.iter().enumerate() {
            samples[(i, j)] = *v;
        }
    }
    Ok(RwmOutput {
        samples,
        proposal_sd: log_sd.exp(),
        acceptance_rate: if counted > 0 {
            accepted as f64 / counted as f64
        } else {
            0.0
        },
    })
}

/// Random-walk Metropolis on a conjugate model's log posterior.
#[derive(Debug, Clone)]
pub struct MetropolisProcedure<M> {
    pub model: M,
    /// Starting point when no initial state is supplied.
    pub default_start: Vec<f64>,
}

impl<M: ConjugateModel> MCMCProcedure for MetropolisProcedure<M> {
    type Hyper = RwmHyper;

    fn run(
        &self,
        data: &Dataset,
        t: usize,
        theta_init: Option<&DVector<f64>>,
        hyper: &RwmHyper,
        rng: &mut Stream,
    ) -> Result<McmcRun<RwmHyper>> {
        let start: Vec<f64> = match theta_init {
            Some(v) => v.iter().copied().collect(),
            None => self.default_start.clone(),
        };
        self.model.log_posterior(data, &start)?;
        let out = random_walk_metropolis(
            |theta| self.model.log_posterior(data, theta).unwrap_or(f64::NEG_INFINITY),
            hyper.proposal_sd,
            t,
            &start,
            rng,
        )?;
        Ok(McmcRun {
            hyper: RwmHyper {
                proposal_sd: out.proposal_sd,
            },
            samples: out.samples,
        })
    }
}

/// Independent draws from the exact Gaussian location posterior; ignores
/// the initial state.
#[derive(Debug, Clone)]
pub struct ExactGaussianLocationSampler {
    pub model: GaussianLocationModel,
}

impl MCMCProcedure for ExactGaussianLocationSampler {
    type Hyper = ();

    fn run(
        &self,
        data: &Dataset,
        t: usize,
        _theta_init: Option<&DVector<f64>>,
        _hyper: &(),
        rng: &mut Stream,
    ) -> Result<McmcRun<()>> {
        let post = self.model.posterior(data)?;
        let root = crate::linalg::psd_sqrt(&post.cov);
        let d = post.mean.len();
        let mut samples = DMatrix::zeros(t, d);
        let mut e = DVector::zeros(d);
        for i in 0..t {
            for v in e.iter_mut() {
                *v = StandardNormal.sample(rng);
            }
            let draw = &post.mean + &root * &e;
            samples.row_mut(i).copy_from(&draw.transpose());
        }
        Ok(McmcRun { hyper: (), samples })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    #[test]
    fn rwm_standard_normal() {
        let mut rng = SeedPath::root(3).stream();
        let out = random_walk_metropolis(|x| -0.5 * x[0] * x[0], 1.0, 100_000, &[0.0], &mut rng).unwrap();
        let col = out.samples.column(0);
        let kept = col.rows(50_000, 50_000);
        let mean = kept.mean();
        let sd = (kept.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 50_000.0).sqrt();
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((sd - 1.0).abs() < 0.05, "sd {sd}");
        assert!(out.acceptance_rate > 0.1 && out.acceptance_rate < 0.6);
    }

    #[test]
    fn rwm_errors() {
        let mut rng = SeedPath::root(3).stream();
        assert!(matches!(
            random_walk_metropolis(|_| 0.0, 0.0, 10, &[0.0], &mut rng),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            random_walk_metropolis(|_| f64::NEG_INFINITY, 1.0, 10, &[0.0], &mut rng),
            Err(Error::InvalidStart(_))
        ));
    }

    /// Records each call and returns `t` copies of a constant row.
    type Call = (usize, usize, Option<Vec<f64>>, u32);

    struct Recorder {
        calls: Mutex<Vec<Call>>,
        short_by: usize,
    }

    impl MCMCProcedure for Recorder {
        type Hyper = u32;

        fn run(
            &self,
            data: &Dataset,
            t: usize,
            theta_init: Option<&DVector<f64>>,
            hyper: &u32,
            _rng: &mut Stream,
        ) -> Result<McmcRun<u32>> {
            self.calls
                .lock()
                .unwrap()
                .push((data.n(), t, theta_init.map(|v| v.iter().copied().collect()), *hyper));
            let rows = if theta_init.is_some() { t - self.short_by } else { t };
            Ok(McmcRun {
                hyper: hyper + 1,
                samples: DMatrix::from_fn(rows, 1, |i, _| i as f64),
            })
        }
    }

    fn data() -> Dataset {
        Dataset::location(DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 4.0])).unwrap()
    }

    #[test]
    fn orchestration_matches_algorithm() {
        let rec = Recorder {
            calls: Mutex::new(Vec::new()),
            short_by: 0,
        };
        let cfg = SamplerConfig {
            t: 20,
            t_flat: 10,
            m: 3,
            b: 3,
            discard_fraction: 0.0,
        };
        let out = bayesbag_sample(&rec, &data(), &cfg, &7, &SeedPath::root(1)).unwrap();
        assert_eq!(out.bagged_samples.nrows(), 30);
        assert_eq!(out.standard_samples.nrows(), 20);
        let calls = rec.calls.into_inner().unwrap();
        assert_eq!(calls.len(), 4);
        assert_eq!(calls[0], (4, 20, None, 7));
        for c in &calls[1..] {
            assert_eq!((c.0, c.1, c.3), (3, 10, 8));
            let init = c.2.as_ref().unwrap()[0];
            assert!(init.fract() == 0.0 && (0.0..20.0).contains(&init));
        }
        for m in &out.runs {
            assert_eq!(m.theta_init[0], m.init_index as f64);
        }
    }

    #[test]
    fn zero_bootstrap_runs() {
        let rec = Recorder {
            calls: Mutex::new(Vec::new()),
            short_by: 0,
        };
        let cfg = SamplerConfig {
            t: 5,
            t_flat: 3,
            m: 4,
            b: 0,
            discard_fraction: 0.0,
        };
        let out = bayesbag_sample(&rec, &data(), &cfg, &0, &SeedPath::root(1)).unwrap();
        assert_eq!(out.bagged_samples.nrows(), 0);
        assert_eq!(out.standard_samples.nrows(), 5);
    }

    #[test]
    fn contract_violation_names_run() {
        let rec = Recorder {
            calls: Mutex::new(Vec::new()),
            short_by: 1,
        };
        let cfg = SamplerConfig {
            t: 5,
            t_flat: 3,
            m: 4,
            b: 2,
            discard_fraction: 0.0,
        };
        match bayesbag_sample(&rec, &data(), &cfg, &0, &SeedPath::root(1)) {
            Err(Error::ContractViolation { run, expected, got }) => {
                assert!(run.starts_with("short run"));
                assert_eq!((expected, got), (3, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn burn_in_keeps_t_flat() {
        let rec = Recorder {
            calls: Mutex::new(Vec::new()),
            short_by: 0,
        };
        let cfg = SamplerConfig {
            t: 5,
            t_flat: 4,
            m: 4,
            b: 2,
            discard_fraction: 0.5,
        };
        let out = bayesbag_sample(&rec, &data(), &cfg, &0, &SeedPath::root(1)).unwrap();
        assert_eq!(out.bagged_samples.nrows(), 8);
        assert_eq!(out.bagged_samples[(0, 0)], 2.0);
    }
}
