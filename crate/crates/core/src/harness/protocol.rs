//! Repeated stratified cross-validation comparing every model on the
//! original test fold and on an IV-perturbed copy of it.
//!
//! Random streams are derived from the master seed by position, so each
//! `(iteration, fold)` task is reproducible in isolation: the split from
//! `[iteration, SPLIT, attempt]`, the perturbed test fold from
//! `[iteration, fold, PERTURB]` and the augmentation from
//! `[iteration, fold, AUGMENT]`. Models are always seeded with the master seed.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::folds::{folds_are_usable, split, stratified_folds};
use crate::harness::metrics::{metrics, Metric, Metrics};
use crate::harness::report::{
    ConditionSummary, EvalReport, Provenance, ReportEntry, REPORT_SCHEMA_VERSION,
};
use crate::harness::stats::{confidence_interval, overlap};
use crate::iv::{perturb, CvProfile, Dataset, PerturbOptions};
use crate::learners::{fit, Classifier, ModelKind, ModelSpec};
use crate::rng::{derive_rng, rng_from_seed};
use crate::robust::{
    augment, fit_robust, imprecisiate_all, ImpreciseInstance, RobustConfig, RobustKind, Scheme,
};
use crate::Label;

const STREAM_SPLIT: u64 = 0;
const STREAM_PERTURB: u64 = 1;
const STREAM_AUGMENT: u64 = 2;
const MAX_SPLIT_ATTEMPTS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Standard,
    Augmented,
    Imprecise,
}

/// What the per-condition sample is made of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiBasis {
    /// One fold-averaged value per iteration.
    PerIteration,
    /// Every fold value.
    PerFold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub iterations: usize,
    pub folds: usize,
    pub metrics: Vec<Metric>,
    pub augment_n: usize,
    pub seed: u64,
    pub ci_level: f64,
    pub ci_basis: CiBasis,
    /// Build test-time IV distributions from the elementwise-max CVI over
    /// classes instead of the true label's CVI.
    pub class_agnostic: bool,
    pub clip_nonnegative: bool,
    pub robust: RobustConfig,
    /// Worker threads; results do not depend on it.
    #[serde(skip, default = "one_job")]
    pub jobs: usize,
}

fn one_job() -> usize {
    1
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            iterations: 100,
            folds: 3,
            metrics: Metric::ALL.to_vec(),
            augment_n: 100,
            seed: 99,
            ci_level: 0.95,
            ci_basis: CiBasis::PerIteration,
            class_agnostic: false,
            clip_nonnegative: false,
            robust: RobustConfig::default(),
            jobs: 1,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::InvalidInput("iterations must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidInput("folds must be at least 2".into()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidInput(format!(
                "CI level must lie in (0, 1), got {}",
                self.ci_level
            )));
        }
        if self.augment_n < 1 {
            return Err(Error::InvalidInput(
                "augmentation count must be at least 1".into(),
            ));
        }
        if self.metrics.is_empty() {
            return Err(Error::InvalidInput("no metrics selected".into()));
        }
        let samples = match self.ci_basis {
            CiBasis::PerIteration => self.iterations,
            CiBasis::PerFold => self.iterations * self.folds,
        };
        if samples < 2 {
            return Err(Error::InvalidInput(
                "confidence intervals need at least 2 samples".into(),
            ));
        }
        Ok(())
    }

    fn options(&self) -> PerturbOptions {
        PerturbOptions {
            clip_nonnegative: self.clip_nonnegative,
        }
    }
}

/// One model under one protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum Candidate {
    Standard {
        spec: ModelSpec,
    },
    /// Trained on `augment_n` perturbed copies of each training instance.
    Augmented {
        spec: ModelSpec,
    },
    Imprecise {
        kind: RobustKind,
    },
}

impl Candidate {
    pub fn name(&self) -> String {
        match self {
            Candidate::Standard { spec } => spec.kind.abbreviation().to_string(),
            Candidate::Augmented { spec } => match spec.kind {
                ModelKind::SvmRbf => "ACS".to_string(),
                ModelKind::GradientBoosting => "ACG".to_string(),
                k => format!("AC{}", k.abbreviation()),
            },
            Candidate::Imprecise { kind } => kind.abbreviation().to_string(),
        }
    }

    pub fn protocol(&self) -> Protocol {
        match self {
            Candidate::Standard { .. } => Protocol::Standard,
            Candidate::Augmented { .. } => Protocol::Augmented,
            Candidate::Imprecise { .. } => Protocol::Imprecise,
        }
    }

    /// The seven standard classifiers with default hyperparameters.
    pub fn standard_roster() -> Vec<Candidate> {
        ModelSpec::all_defaults()
            .into_iter()
            .map(|spec| Candidate::Standard { spec })
            .collect()
    }

    /// ACS and ACG.
    pub fn augmented_roster() -> Vec<Candidate> {
        [ModelKind::SvmRbf, ModelKind::GradientBoosting]
            .into_iter()
            .map(|k| Candidate::Augmented {
                spec: ModelSpec::new(k),
            })
            .collect()
    }

    pub fn imprecise_roster() -> Vec<Candidate> {
        RobustKind::ALL
            .into_iter()
            .map(|kind| Candidate::Imprecise { kind })
            .collect()
    }
}

/// Baseline and perturbed metrics of one candidate on one fold.
type FoldScores = (Metrics, Metrics);

struct IterationResult {
    /// `[fold][candidate]`
    folds: Vec<Vec<FoldScores>>,
    notes: Vec<String>,
}

struct FoldData {
    x_train: Array2<f64>,
    y_train: Vec<Label>,
    x_test: Array2<f64>,
    x_perturbed: Array2<f64>,
    y_test: Vec<Label>,
}

fn select_rows(x: ArrayView2<'_, f64>, rows: &[usize]) -> Array2<f64> {
    x.select(ndarray::Axis(0), rows)
}

fn score_crisp<C: Classifier>(model: &C, x: ArrayView2<'_, f64>, y: &[Label]) -> Result<Metrics> {
    let scores = model.scores(x)?;
    let rule = model.rule();
    let pred: Vec<Label> = scores.iter().map(|&s| rule.apply(s)).collect();
    metrics(y, &pred, &scores)
}

fn score_imprecise(
    model: &crate::robust::RobustModel,
    test: &[ImpreciseInstance],
) -> Result<Metrics> {
    let scores = test
        .iter()
        .map(|q| model.score(q))
        .collect::<Result<Vec<f64>>>()?;
    let rule = model.rule();
    let pred: Vec<Label> = scores.iter().map(|&s| rule.apply(s)).collect();
    let y: Vec<Label> = test.iter().map(|q| q.label).collect();
    metrics(&y, &pred, &scores)
}

struct Evaluator<'a> {
    candidates: &'a [Candidate],
    data: &'a Dataset,
    profile: CvProfile,
    test_profile: CvProfile,
    cfg: &'a ProtocolConfig,
}

impl Evaluator<'_> {
    fn assignment(&self, it: usize, notes: &mut Vec<String>) -> Result<Vec<usize>> {
        for attempt in 0..MAX_SPLIT_ATTEMPTS {
            let mut rng = derive_rng(self.cfg.seed, &[it as u64, STREAM_SPLIT, attempt]);
            let a = stratified_folds(&self.data.y, self.cfg.folds, &mut rng)?;
            if folds_are_usable(&self.data.y, &a, self.cfg.folds) {
                return Ok(a);
            }
            let msg = format!("iteration {it}: split attempt {attempt} left a fold with a single class; re-splitting");
            log::info!("{msg}");
            notes.push(msg);
        }
        Err(Error::InvalidInput(format!(
            "could not build {} stratified folds with both classes in every fold",
            self.cfg.folds
        )))
    }

    fn fold_data(&self, it: usize, f: usize, assignment: &[usize]) -> Result<FoldData> {
        let (train, test) = split(assignment, f);
        let x = self.data.x.view();
        let x_test = select_rows(x, &test);
        let y_test: Vec<Label> = test.iter().map(|&i| self.data.y[i]).collect();
        let mut rng = derive_rng(self.cfg.seed, &[it as u64, f as u64, STREAM_PERTURB]);
        let mut perturbed = Vec::with_capacity(x_test.len());
        for (row, &label) in x_test.rows().into_iter().zip(&y_test) {
            perturbed.extend(perturb(
                &row.to_vec(),
                label,
                &self.test_profile,
                self.cfg.options(),
                &mut rng,
            )?);
        }
        Ok(FoldData {
            x_train: select_rows(x, &train),
            y_train: train.iter().map(|&i| self.data.y[i]).collect(),
            x_perturbed: Array2::from_shape_vec(x_test.raw_dim(), perturbed).expect("same shape"),
            x_test,
            y_test,
        })
    }

    fn run_fold(
        &self,
        it: usize,
        f: usize,
        assignment: &[usize],
        notes: &mut Vec<String>,
    ) -> Result<Vec<FoldScores>> {
        let fd = self.fold_data(it, f, assignment)?;
        let needs_aug = self
            .candidates
            .iter()
            .any(|c| matches!(c, Candidate::Augmented { .. }));
        let augmented = if needs_aug {
            let mut rng = derive_rng(self.cfg.seed, &[it as u64, f as u64, STREAM_AUGMENT]);
            Some(augment(
                fd.x_train.view(),
                &fd.y_train,
                &self.profile,
                self.cfg.augment_n,
                self.cfg.options(),
                &mut rng,
            )?)
        } else {
            None
        };
        let mut imprecise: Option<[Vec<ImpreciseInstance>; 3]> = None;
        let mut out = Vec::with_capacity(self.candidates.len());
        for cand in self.candidates {
            let scores = match cand {
                Candidate::Standard { spec } => {
                    let model = fit(
                        spec,
                        fd.x_train.view(),
                        &fd.y_train,
                        &mut rng_from_seed(self.cfg.seed),
                    )?;
                    (
                        score_crisp(&model, fd.x_test.view(), &fd.y_test)?,
                        score_crisp(&model, fd.x_perturbed.view(), &fd.y_test)?,
                    )
                }
                Candidate::Augmented { spec } => {
                    let (xa, ya) = augmented.as_ref().expect("augmented training set");
                    let model = fit(spec, xa.view(), ya, &mut rng_from_seed(self.cfg.seed))?;
                    (
                        score_crisp(&model, fd.x_test.view(), &fd.y_test)?,
                        score_crisp(&model, fd.x_perturbed.view(), &fd.y_test)?,
                    )
                }
                Candidate::Imprecise { kind } => {
                    if imprecise.is_none() {
                        // training, original test and perturbed test, as probabilistic instances
                        imprecise = Some([
                            imprecisiate_all(
                                fd.x_train.view(),
                                &fd.y_train,
                                &self.profile,
                                Scheme::Prob,
                            )?,
                            imprecisiate_all(
                                fd.x_test.view(),
                                &fd.y_test,
                                &self.test_profile,
                                Scheme::Prob,
                            )?,
                            imprecisiate_all(
                                fd.x_perturbed.view(),
                                &fd.y_test,
                                &self.test_profile,
                                Scheme::Prob,
                            )?,
                        ]);
                    }
                    let [train, te_b, te_p] = imprecise.as_ref().expect("set above");
                    let scheme = kind.scheme();
                    let as_scheme = |v: &[ImpreciseInstance]| -> Vec<ImpreciseInstance> {
                        v.iter()
                            .map(|t| ImpreciseInstance {
                                scheme,
                                ..t.clone()
                            })
                            .collect()
                    };
                    let model =
                        fit_robust(*kind, &as_scheme(train), &self.cfg.robust, self.cfg.seed)?;
                    if let crate::robust::RobustModel::Smm(m) = &model {
                        if m.jittered {
                            notes.push(format!(
                                "iteration {it}, fold {f}: SMM Gram matrix jittered"
                            ));
                        }
                    }
                    (
                        score_imprecise(&model, &as_scheme(te_b))?,
                        score_imprecise(&model, &as_scheme(te_p))?,
                    )
                }
            };
            out.push(scores);
        }
        Ok(out)
    }

    fn run_iteration(&self, it: usize) -> Result<IterationResult> {
        let mut notes = Vec::new();
        let assignment = self.assignment(it, &mut notes)?;
        let folds = (0..self.cfg.folds)
            .map(|f| self.run_fold(it, f, &assignment, &mut notes))
            .collect::<Result<Vec<_>>>()?;
        Ok(IterationResult { folds, notes })
    }
}

fn summarize(samples: Vec<f64>, level: f64) -> Result<ConditionSummary> {
    if samples.is_empty() {
        return Err(Error::Numeric("metric undefined on every fold".into()));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let mut ci = confidence_interval(&samples, level)?;
    // keep lo <= mean <= hi even for very skewed samples
    ci.lo = ci.lo.min(mean);
    ci.hi = ci.hi.max(mean);
    Ok(ConditionSummary { samples, mean, ci })
}

fn config_hash(
    cfg: &ProtocolConfig,
    candidates: &[Candidate],
    profile: &CvProfile,
) -> Result<String> {
    let doc = serde_json::json!({ "config": cfg, "candidates": candidates, "profile": profile });
    let digest = Sha256::digest(serde_json::to_vec(&doc)?);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Runs every candidate on shared splits and shared perturbed test folds.
pub fn evaluate(
    candidates: &[Candidate],
    data: &Dataset,
    profile: &CvProfile,
    cfg: &ProtocolConfig,
) -> Result<EvalReport> {
    cfg.validate()?;
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no models to evaluate".into()));
    }
    for spec in candidates.iter().filter_map(|c| match c {
        Candidate::Standard { spec } | Candidate::Augmented { spec } => Some(spec),
        Candidate::Imprecise { .. } => None,
    }) {
        spec.validate()?;
    }
    data.check_finite()?;
    let profile = profile.aligned_to(&data.feature_names)?;
    profile.covers_classes(data.classes())?;
    let test_profile = if cfg.class_agnostic {
        profile.class_agnostic()
    } else {
        profile.clone()
    };
    let eval = Evaluator {
        candidates,
        data,
        profile: profile.clone(),
        test_profile,
        cfg,
    };

    let run = |it: usize| eval.run_iteration(it);
    let results: Vec<IterationResult> = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..cfg.iterations)
                .into_par_iter()
                .map(run)
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        (0..cfg.iterations).map(run).collect::<Result<Vec<_>>>()?
    };

    let mut entries = Vec::new();
    for (c, cand) in candidates.iter().enumerate() {
        for &metric in &cfg.metrics {
            let mut base = Vec::new();
            let mut pert = Vec::new();
            for r in &results {
                let pairs: Vec<(f64, f64)> = r
                    .folds
                    .iter()
                    .filter_map(|fold| Some((fold[c].0.get(metric)?, fold[c].1.get(metric)?)))
                    .collect();
                match cfg.ci_basis {
                    CiBasis::PerFold => {
                        base.extend(pairs.iter().map(|p| p.0));
                        pert.extend(pairs.iter().map(|p| p.1));
                    }
                    CiBasis::PerIteration if !pairs.is_empty() => {
                        let k = pairs.len() as f64;
                        base.push(pairs.iter().map(|p| p.0).sum::<f64>() / k);
                        pert.push(pairs.iter().map(|p| p.1).sum::<f64>() / k);
                    }
                    CiBasis::PerIteration => {}
                }
            }
            let baseline = summarize(base, cfg.ci_level)?;
            let perturbed = summarize(pert, cfg.ci_level)?;
            entries.push(ReportEntry {
                model: cand.name(),
                protocol: cand.protocol(),
                metric,
                gap: baseline.mean - perturbed.mean,
                verdict: overlap(baseline.ci, perturbed.ci),
                baseline,
                perturbed,
            });
        }
    }
    let smm_gamma = candidates
        .iter()
        .any(|c| {
            matches!(
                c,
                Candidate::Imprecise {
                    kind: RobustKind::Smm
                }
            )
        })
        .then(|| cfg.robust.smm.gamma.unwrap_or(1.0 / data.dim() as f64));
    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        provenance: Provenance {
            seed: cfg.seed,
            config_hash: config_hash(cfg, candidates, &profile)?,
            config: cfg.clone(),
            models: candidates.iter().map(Candidate::name).collect(),
            dataset_rows: data.len(),
            features: data.feature_names.clone(),
            smm_gamma,
        },
        entries,
        notes: results.into_iter().flat_map(|r| r.notes).collect(),
    })
}

/// The standard protocol over the given model specs.
pub fn evaluate_standard(
    specs: &[ModelSpec],
    data: &Dataset,
    profile: &CvProfile,
    cfg: &ProtocolConfig,
) -> Result<EvalReport> {
    let c: Vec<Candidate> = specs
        .iter()
        .cloned()
        .map(|spec| Candidate::Standard { spec })
        .collect();
    evaluate(&c, data, profile, cfg)
}

/// The augmentation protocol: each spec is trained on perturbed copies.
pub fn evaluate_augmented(
    specs: &[ModelSpec],
    data: &Dataset,
    profile: &CvProfile,
    cfg: &ProtocolConfig,
) -> Result<EvalReport> {
    let c: Vec<Candidate> = specs
        .iter()
        .cloned()
        .map(|spec| Candidate::Augmented { spec })
        .collect();
    evaluate(&c, data, profile, cfg)
}

/// The imprecisiation protocol for KND, SMM and WSF.
pub fn evaluate_imprecise(
    kinds: &[RobustKind],
    data: &Dataset,
    profile: &CvProfile,
    cfg: &ProtocolConfig,
) -> Result<EvalReport> {
    let c: Vec<Candidate> = kinds
        .iter()
        .map(|&kind| Candidate::Imprecise { kind })
        .collect();
    evaluate(&c, data, profile, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Verdict;
    use rand::Rng;
    use rand_distr::StandardNormal;
    use std::collections::BTreeMap;

    fn blobs(n: usize, shift: f64) -> Dataset {
        let mut rng = rng_from_seed(11);
        let mut x = Array2::zeros((n, 2));
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let label = u8::from(i % 2 == 1);
            let s = if label == 1 { shift } else { 0.0 };
            for j in 0..2 {
                let z: f64 = rng.sample(StandardNormal);
                x[[i, j]] = 5.0 + s + z;
            }
            y.push(label);
        }
        Dataset::new(x, y, vec!["a".into(), "b".into()]).unwrap()
    }

    fn profile(cv: f64) -> CvProfile {
        let cvi: BTreeMap<Label, Vec<f64>> = [(0, vec![cv; 2]), (1, vec![cv; 2])].into();
        CvProfile::new(vec!["a".into(), "b".into()], vec![0.0; 2], cvi).unwrap()
    }

    fn small_cfg() -> ProtocolConfig {
        ProtocolConfig {
            iterations: 3,
            augment_n: 2,
            ..ProtocolConfig::default()
        }
    }

    fn quick_roster() -> Vec<Candidate> {
        vec![
            Candidate::Standard {
                spec: ModelSpec::new(ModelKind::SvmRbf),
            },
            Candidate::Standard {
                spec: ModelSpec::new(ModelKind::Knn),
            },
            Candidate::Standard {
                spec: ModelSpec::new(ModelKind::RandomForest).with("n_trees", 10.0),
            },
            Candidate::Imprecise {
                kind: RobustKind::Knd,
            },
            Candidate::Imprecise {
                kind: RobustKind::Smm,
            },
        ]
    }

    #[test]
    fn zero_profile_has_no_gap() {
        let report = evaluate(
            &quick_roster(),
            &blobs(60, 2.0),
            &profile(0.0),
            &small_cfg(),
        )
        .unwrap();
        assert_eq!(report.entries.len(), 5 * 3);
        for e in &report.entries {
            assert_eq!(e.gap, 0.0, "{}", e.model);
            assert_eq!(e.verdict, Verdict::Robust);
            assert!(e.baseline.ci.lo <= e.baseline.mean && e.baseline.mean <= e.baseline.ci.hi);
        }
    }

    #[test]
    fn noise_lowers_auc() {
        let report = evaluate(
            &quick_roster()[..1],
            &blobs(90, 2.0),
            &profile(0.3),
            &small_cfg(),
        )
        .unwrap();
        let e = report.entry("SVM", Metric::Auc).unwrap();
        assert!(e.gap > 0.0);
        assert_eq!(e.baseline.samples.len(), 3);
    }

    #[test]
    fn runs_are_reproducible_and_independent_of_jobs() {
        let data = blobs(60, 1.5);
        let p = profile(0.1);
        let a = evaluate(&quick_roster(), &data, &p, &small_cfg()).unwrap();
        let b = evaluate(&quick_roster(), &data, &p, &small_cfg()).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let parallel = evaluate(
            &quick_roster(),
            &data,
            &p,
            &ProtocolConfig {
                jobs: 2,
                ..small_cfg()
            },
        )
        .unwrap();
        assert_eq!(a.to_json().unwrap(), parallel.to_json().unwrap());
        let other = evaluate(
            &quick_roster(),
            &data,
            &p,
            &ProtocolConfig {
                seed: 7,
                ..small_cfg()
            },
        )
        .unwrap();
        assert_ne!(a.provenance.config_hash, other.provenance.config_hash);
    }

    #[test]
    fn provenance_records_smm_gamma() {
        let data = blobs(60, 2.0);
        let report = evaluate(&quick_roster(), &data, &profile(0.1), &small_cfg()).unwrap();
        assert_eq!(report.provenance.smm_gamma, Some(0.5));
        assert_eq!(report.provenance.models, ["SVM", "KNN", "RF", "KND", "SMM"]);
        let crisp = evaluate(&quick_roster()[..1], &data, &profile(0.1), &small_cfg()).unwrap();
        assert_eq!(crisp.provenance.smm_gamma, None);
        let back = EvalReport::from_json(&report.to_json().unwrap()).unwrap();
        assert_eq!(back, report);
        assert_eq!(
            report.table_string().unwrap().lines().count(),
            1 + 2 * report.entries.len()
        );
    }

    #[test]
    fn single_noiseless_copy_matches_standard_training() {
        let data = blobs(60, 1.0);
        let spec = ModelSpec::new(ModelKind::SvmRbf);
        let cfg = ProtocolConfig {
            augment_n: 1,
            ..small_cfg()
        };
        let std =
            evaluate_standard(std::slice::from_ref(&spec), &data, &profile(0.0), &cfg).unwrap();
        let aug = evaluate_augmented(&[spec], &data, &profile(0.0), &cfg).unwrap();
        for (a, b) in std.entries.iter().zip(&aug.entries) {
            assert_eq!(a.baseline.samples, b.baseline.samples);
        }
        assert_eq!(aug.entries[0].model, "ACS");
    }

    #[test]
    fn roster_names() {
        let names = |r: Vec<Candidate>| r.iter().map(Candidate::name).collect::<Vec<_>>();
        assert_eq!(
            names(Candidate::standard_roster()),
            ["SVM", "LR", "KNN", "NB", "RF", "ET", "GB"]
        );
        assert_eq!(names(Candidate::augmented_roster()), ["ACS", "ACG"]);
        assert_eq!(names(Candidate::imprecise_roster()), ["KND", "SMM", "WSF"]);
    }

    #[test]
    fn rejects_bad_configs() {
        let data = blobs(30, 1.0);
        let p = profile(0.1);
        let roster = &quick_roster()[..1];
        assert!(evaluate(
            roster,
            &data,
            &p,
            &ProtocolConfig {
                iterations: 1,
                ..small_cfg()
            }
        )
        .is_err());
        assert!(evaluate(
            roster,
            &data,
            &p,
            &ProtocolConfig {
                iterations: 1,
                ci_basis: CiBasis::PerFold,
                ..small_cfg()
            }
        )
        .is_ok());
        assert!(evaluate(
            roster,
            &data,
            &p,
            &ProtocolConfig {
                folds: 1,
                ..small_cfg()
            }
        )
        .is_err());
        assert!(evaluate(
            roster,
            &data,
            &p,
            &ProtocolConfig {
                ci_level: 1.0,
                ..small_cfg()
            }
        )
        .is_err());
        assert!(evaluate(&[], &data, &p, &small_cfg()).is_err());
        let wrong = CvProfile::zero(&["z".into()], &[0, 1]);
        assert!(evaluate(roster, &data, &wrong, &small_cfg()).is_err());
    }
}
