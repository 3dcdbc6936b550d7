//! Noise-sweep experiments over synthetic pairs.
//!
//! A plan lists `(case, prefilter, estimator)` combinations, a grid of noise
//! levels and a number of trials per level. Every trial synthesizes a fresh
//! pair from a seed derived from `(case, sigma index, trial index)`, so all
//! estimators and prefilters within a case see the same frames and a rerun
//! reproduces every record exactly.

mod plan;
mod results;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gs::{estimate_step, Aggregator, Estimator};
use crate::prefilter::{Prefilter, PrefilterConfig};
use crate::seed::derive_seed;
use crate::stats;
use crate::synth::{synthesize, Case, SynthSpec, DEFAULT_FRINGE_SCALE, DEFAULT_SIZE};

pub use plan::{parse_plan, read_plan};
pub use results::{read_csv, write_csv, CSV_HEADER};

pub const DEFAULT_TRIALS: usize = 50;
pub const DEFAULT_SIGMA_LEVELS: usize = 10;
pub const DEFAULT_BASE_SEED: u64 = 20_200_917;

/// `i / (levels - 1)` for `i = 0..levels`, i.e. `0.0 ..= 1.0`.
pub fn default_sigmas() -> Vec<f64> {
    (0..DEFAULT_SIGMA_LEVELS).map(|i| i as f64 / (DEFAULT_SIGMA_LEVELS - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImageParams {
    pub width: usize,
    pub height: usize,
    pub fringe_scale: f64,
}

impl Default for ImageParams {
    fn default() -> Self {
        Self { width: DEFAULT_SIZE, height: DEFAULT_SIZE, fringe_scale: DEFAULT_FRINGE_SCALE }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Combination {
    pub case: Case,
    #[serde(default)]
    pub prefilter: Prefilter,
    pub estimator: Estimator,
}

impl Combination {
    pub fn new(case: Case, prefilter: Prefilter, estimator: Estimator) -> Self {
        Self { case, prefilter, estimator }
    }

    /// Background must be removed before either estimator, and the sin
    /// estimator additionally assumes unit amplitude.
    pub fn validate(&self) -> Result<()> {
        if self.case == Case::III && self.prefilter == Prefilter::None {
            return Err(Error::InvalidParameter(format!(
                "case III with the {} estimator needs a prefilter (isotropic or gfb)",
                self.estimator
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.case, self.prefilter, self.estimator)
    }
}

/// Everything needed to regenerate an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub combinations: Vec<Combination>,
    pub sigmas: Vec<f64>,
    pub trials: usize,
    pub delta_true: f64,
    pub base_seed: u64,
    pub image: ImageParams,
    pub aggregator: Aggregator,
    pub prefilters: PrefilterConfig,
}

impl ExperimentPlan {
    /// The three-case sweep: cases I and II unfiltered with both estimators,
    /// case III with the sin estimator behind each prefilter.
    pub fn default_paper() -> Self {
        use Estimator::{Sin, Tan};
        let combinations = vec![
            Combination::new(Case::I, Prefilter::None, Tan),
            Combination::new(Case::I, Prefilter::None, Sin),
            Combination::new(Case::II, Prefilter::None, Tan),
            Combination::new(Case::II, Prefilter::None, Sin),
            Combination::new(Case::III, Prefilter::Isotropic, Sin),
            Combination::new(Case::III, Prefilter::Gfb, Sin),
        ];
        Self {
            combinations,
            sigmas: default_sigmas(),
            trials: DEFAULT_TRIALS,
            delta_true: std::f64::consts::FRAC_PI_3,
            base_seed: DEFAULT_BASE_SEED,
            image: ImageParams::default(),
            aggregator: Aggregator::Median,
            prefilters: PrefilterConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.combinations.is_empty() {
            return Err(Error::InvalidParameter("plan has no combinations".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.combinations {
            c.validate()?;
            if !seen.insert(*c) {
                return Err(Error::InvalidParameter(format!("combination {c} listed twice")));
            }
        }
        if self.sigmas.is_empty() {
            return Err(Error::InvalidParameter("plan has no noise levels".into()));
        }
        if self.sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::InvalidParameter("noise levels must be finite and >= 0".into()));
        }
        if self.sigmas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("noise levels must be strictly ascending".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        self.synth_spec(Case::I, 0.0, 0).validate()?;
        self.prefilters.gfb.validate()?;
        Ok(())
    }

    fn synth_spec(&self, case: Case, sigma: f64, seed: u64) -> SynthSpec {
        SynthSpec {
            width: self.image.width,
            height: self.image.height,
            case,
            delta: self.delta_true,
            sigma,
            seed,
            fringe_scale: self.image.fringe_scale,
        }
    }

    /// Seed of trial `trial` at noise level index `sigma_index` within `case`.
    pub fn trial_seed(&self, case: Case, sigma_index: usize, trial: usize) -> u64 {
        derive_seed(self.base_seed, &[case.index(), sigma_index as u64, trial as u64])
    }

    /// Number of records [`run_plan`] produces.
    pub fn record_count(&self) -> usize {
        self.combinations.len() * self.sigmas.len() * self.trials
    }

    /// The plan with its combinations in canonical order.
    fn canonical(&self) -> Self {
        let mut p = self.clone();
        p.combinations.sort();
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Ok,
    Failed,
}

/// One trial's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub case: Case,
    pub prefilter: Prefilter,
    pub estimator: Estimator,
    pub sigma: f64,
    pub trial: usize,
    pub delta_true: f64,
    /// `None` for failed trials.
    pub delta_hat: Option<f64>,
    pub abs_err: Option<f64>,
    pub status: TrialStatus,
    pub kappa_ratio: f64,
    pub mask_fraction: f64,
    pub seed: u64,
}

impl ExperimentRecord {
    pub fn combination(&self) -> Combination {
        Combination::new(self.case, self.prefilter, self.estimator)
    }

    pub fn is_ok(&self) -> bool {
        self.status == TrialStatus::Ok
    }
}

/// Inputs of a single trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    pub combination: Combination,
    pub sigma: f64,
    pub trial: usize,
    pub delta_true: f64,
    pub seed: u64,
    pub image: ImageParams,
    pub aggregator: Aggregator,
    pub prefilters: PrefilterConfig,
}

/// Synthesizes, optionally prefilters, and estimates.
///
/// Estimator failures (degenerate pair, mask starvation, non-finite result)
/// become a `failed` record rather than an error; only an invalid trial
/// specification is an error.
pub fn run_trial(t: &TrialSpec) -> Result<ExperimentRecord> {
    t.combination.validate()?;
    let spec = SynthSpec {
        width: t.image.width,
        height: t.image.height,
        case: t.combination.case,
        delta: t.delta_true,
        sigma: t.sigma,
        seed: t.seed,
        fringe_scale: t.image.fringe_scale,
    };
    let pair = synthesize::<f64>(&spec)?;

    let outcome = t
        .combination
        .prefilter
        .apply(&pair.i1, &t.prefilters)
        .and_then(|u1| Ok((u1, t.combination.prefilter.apply(&pair.i2, &t.prefilters)?)))
        .and_then(|(u1, u2)| estimate_step(&u1, &u2, t.combination.estimator, t.aggregator));

    finish_record(t, outcome)
}

fn finish_record(t: &TrialSpec, outcome: Result<crate::gs::StepEstimate<f64>>) -> Result<ExperimentRecord> {
    let base = ExperimentRecord {
        case: t.combination.case,
        prefilter: t.combination.prefilter,
        estimator: t.combination.estimator,
        sigma: t.sigma,
        trial: t.trial,
        delta_true: t.delta_true,
        delta_hat: None,
        abs_err: None,
        status: TrialStatus::Failed,
        kappa_ratio: 0.0,
        mask_fraction: 0.0,
        seed: t.seed,
    };
    Ok(match outcome {
        Ok(e) => ExperimentRecord {
            delta_hat: Some(e.delta_hat),
            abs_err: Some((e.delta_hat - t.delta_true).abs()),
            status: TrialStatus::Ok,
            kappa_ratio: e.kappa_ratio,
            mask_fraction: e.mask_fraction,
            ..base
        },
        Err(Error::MaskStarvation { kept, total }) => ExperimentRecord { mask_fraction: kept as f64 / total as f64, ..base },
        Err(e) if e.is_degeneracy() || matches!(e, Error::NonFinite(_)) => base,
        Err(e) => return Err(e),
    })
}

fn trial_specs(plan: &ExperimentPlan) -> Vec<TrialSpec> {
    let mut jobs = Vec::with_capacity(plan.record_count());
    for &combination in &plan.combinations {
        for (si, &sigma) in plan.sigmas.iter().enumerate() {
            for trial in 0..plan.trials {
                jobs.push(TrialSpec {
                    combination,
                    sigma,
                    trial,
                    delta_true: plan.delta_true,
                    seed: plan.trial_seed(combination.case, si, trial),
                    image: plan.image,
                    aggregator: plan.aggregator,
                    prefilters: plan.prefilters,
                });
            }
        }
    }
    jobs
}

/// Runs every trial of the plan in parallel.
///
/// Records come back sorted by combination, then noise level, then trial,
/// independent of scheduling.
pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<ExperimentRecord>> {
    plan.validate()?;
    let plan = plan.canonical();
    trial_specs(&plan).par_iter().map(run_trial).collect()
}

/// MAE statistics for one `(case, prefilter, estimator, sigma)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct MaeSummary {
    pub combination: Combination,
    pub sigma: f64,
    pub n_ok: usize,
    pub n_failed: usize,
    /// `None` when every trial in the group failed.
    pub stats: Option<MaeStats>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaeStats {
    pub mae_mean: f64,
    pub mae_median: f64,
    pub q25: f64,
    pub q75: f64,
}

impl MaeSummary {
    pub fn median(&self) -> Option<f64> {
        self.stats.map(|s| s.mae_median)
    }
}

/// Groups records and summarizes the absolute errors of successful trials.
pub fn aggregate_mae(records: &[ExperimentRecord]) -> Result<Vec<MaeSummary>> {
    if records.is_empty() {
        return Err(Error::Empty("no records to aggregate"));
    }
    let mut groups: BTreeMap<(Combination, u64), (f64, Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        // non-negative floats order like their bit patterns
        let entry = groups.entry((r.combination(), r.sigma.to_bits())).or_insert((r.sigma, Vec::new(), 0));
        match (r.status, r.abs_err) {
            (TrialStatus::Ok, Some(e)) => entry.1.push(e),
            _ => entry.2 += 1,
        }
    }
    groups
        .into_iter()
        .map(|((combination, _), (sigma, errs, n_failed))| {
            let stats = if errs.is_empty() {
                None
            } else {
                let q = stats::percentiles(&errs, &[25.0, 50.0, 75.0])?;
                Some(MaeStats { mae_mean: stats::mean(&errs)?, mae_median: q[1], q25: q[0], q75: q[2] })
            };
            Ok(MaeSummary { combination, sigma, n_ok: errs.len(), n_failed, stats })
        })
        .collect()
}

/// Median MAE per noise level for one combination, in ascending sigma.
pub fn median_curve(summaries: &[MaeSummary], combination: Combination) -> Vec<(f64, Option<f64>)> {
    summaries.iter().filter(|s| s.combination == combination).map(|s| (s.sigma, s.median())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_3;

    fn small_plan(combos: Vec<Combination>, sigmas: Vec<f64>, trials: usize) -> ExperimentPlan {
        ExperimentPlan {
            combinations: combos,
            sigmas,
            trials,
            image: ImageParams { width: 96, height: 96, fringe_scale: 12.0 },
            ..ExperimentPlan::default_paper()
        }
    }

    fn record(abs_err: Option<f64>) -> ExperimentRecord {
        ExperimentRecord {
            case: Case::I,
            prefilter: Prefilter::None,
            estimator: Estimator::Tan,
            sigma: 0.5,
            trial: 0,
            delta_true: 1.0,
            delta_hat: abs_err.map(|e| 1.0 + e),
            abs_err,
            status: if abs_err.is_some() { TrialStatus::Ok } else { TrialStatus::Failed },
            kappa_ratio: 0.0,
            mask_fraction: 0.9,
            seed: 0,
        }
    }

    #[test]
    fn default_plan_shape() {
        let p = ExperimentPlan::default_paper();
        p.validate().unwrap();
        assert_eq!(p.sigmas.len(), 10);
        assert_eq!(p.sigmas[0], 0.0);
        assert_eq!(p.sigmas[9], 1.0);
        assert_eq!(p.record_count(), 6 * 10 * 50);
        let case_one = p.combinations.iter().filter(|c| c.case == Case::I).count();
        assert_eq!(case_one * 10 * 50, 1000);
    }

    #[test]
    fn plan_validation() {
        let mut p = ExperimentPlan::default_paper();
        p.combinations.push(Combination::new(Case::III, Prefilter::None, Estimator::Sin));
        assert!(p.validate().is_err());

        let mut p = ExperimentPlan::default_paper();
        p.combinations.push(p.combinations[0]);
        assert!(p.validate().is_err());

        for sigmas in [vec![], vec![0.2, 0.1], vec![-0.1, 0.2]] {
            let p = ExperimentPlan { sigmas, ..ExperimentPlan::default_paper() };
            assert!(p.validate().is_err());
        }
        assert!(ExperimentPlan { trials: 0, ..ExperimentPlan::default_paper() }.validate().is_err());
        assert!(ExperimentPlan { delta_true: 4.0, ..ExperimentPlan::default_paper() }.validate().is_err());
    }

    #[test]
    fn noiseless_trials_are_accurate_and_deterministic() {
        for estimator in [Estimator::Tan, Estimator::Sin] {
            let t = TrialSpec {
                combination: Combination::new(Case::I, Prefilter::None, estimator),
                sigma: 0.0,
                trial: 0,
                delta_true: FRAC_PI_3,
                seed: 99,
                image: ImageParams::default(),
                aggregator: Aggregator::Median,
                prefilters: PrefilterConfig::default(),
            };
            let a = run_trial(&t).unwrap();
            assert_eq!(a, run_trial(&t).unwrap());
            assert!(a.is_ok());
            assert_eq!(a.abs_err, Some((a.delta_hat.unwrap() - FRAC_PI_3).abs()));
            assert!(a.abs_err.unwrap() < 0.05);
        }
    }

    #[test]
    fn plan_cardinality_and_determinism() {
        let p = small_plan(vec![Combination::new(Case::I, Prefilter::None, Estimator::Tan)], vec![0.3], 3);
        let r = run_plan(&p).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r, run_plan(&p).unwrap());
        assert_eq!(r.iter().map(|x| x.trial).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(r[0].seed != r[1].seed);
    }

    #[test]
    fn noiseless_records_do_not_depend_on_seed() {
        let p = small_plan(
            vec![
                Combination::new(Case::II, Prefilter::None, Estimator::Tan),
                Combination::new(Case::II, Prefilter::None, Estimator::Sin),
            ],
            vec![0.0],
            4,
        );
        let r = run_plan(&p).unwrap();
        for est in [Estimator::Tan, Estimator::Sin] {
            let hats: Vec<_> = r.iter().filter(|x| x.estimator == est).map(|x| x.delta_hat).collect();
            assert!(hats.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn combination_order_does_not_matter() {
        let a = Combination::new(Case::I, Prefilter::None, Estimator::Sin);
        let b = Combination::new(Case::I, Prefilter::None, Estimator::Tan);
        let p1 = small_plan(vec![a, b], vec![0.0, 0.5], 2);
        let p2 = small_plan(vec![b, a], vec![0.0, 0.5], 2);
        assert_eq!(run_plan(&p1).unwrap(), run_plan(&p2).unwrap());
    }

    #[test]
    fn estimator_failures_become_failed_records() {
        let t = TrialSpec {
            combination: Combination::new(Case::II, Prefilter::None, Estimator::Tan),
            sigma: 0.0,
            trial: 0,
            delta_true: FRAC_PI_3,
            seed: 1,
            image: ImageParams::default(),
            aggregator: Aggregator::Median,
            prefilters: PrefilterConfig::default(),
        };
        let r = finish_record(&t, Err(Error::DegeneratePair)).unwrap();
        assert_eq!(r.status, TrialStatus::Failed);
        assert_eq!((r.delta_hat, r.abs_err), (None, None));
        assert!(r.kappa_ratio.is_finite() && r.mask_fraction.is_finite());

        let r = finish_record(&t, Err(Error::MaskStarvation { kept: 1, total: 200 })).unwrap();
        assert_eq!(r.status, TrialStatus::Failed);
        assert_eq!(r.mask_fraction, 0.005);

        assert!(finish_record(&t, Err(Error::InvalidParameter("x".into()))).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let recs: Vec<_> = [0.1, 0.2, 0.3].iter().map(|&e| record(Some(e))).collect();
        let s = aggregate_mae(&recs).unwrap();
        assert_eq!(s.len(), 1);
        let st = s[0].stats.unwrap();
        assert!((st.mae_mean - 0.2).abs() < 1e-15);
        assert_eq!(st.mae_median, 0.2);

        let recs: Vec<_> = [1.0, 2.0, 3.0, 4.0].iter().map(|&e| record(Some(e))).collect();
        let st = aggregate_mae(&recs).unwrap()[0].stats.unwrap();
        assert_eq!((st.q25, st.q75), (1.75, 3.25));

        let recs = vec![record(None), record(None)];
        let s = aggregate_mae(&recs).unwrap();
        assert_eq!(s[0].stats, None);
        assert_eq!((s[0].n_ok, s[0].n_failed), (0, 2));

        let mixed = vec![record(Some(0.5)), record(None)];
        let s = aggregate_mae(&mixed).unwrap();
        assert_eq!((s[0].n_ok, s[0].n_failed), (1, 1));

        assert!(aggregate_mae(&[]).is_err());
    }
}
