//! Longitudinal studies and estimation of individual variation.
//!
//! A study follows each subject over `m >= 2` time steps with `k >= 2`
//! replicate measurements per step. Per subject and feature:
//!
//! * `iv_sd`: sample SD of every value the subject produced,
//! * `av_sd`: root of the mean per-step sample variance of the replicates,
//! * `bv_sd = sqrt(iv_sd^2 - av_sd^2)`,
//! * homeostatic estimate: the pooled mean.

use std::collections::BTreeMap;
use std::io::Read;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iv::CvProfile;
use crate::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeStep {
    pub replicates: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub steps: Vec<TimeStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongitudinalStudy {
    pub feature_names: Vec<String>,
    pub subjects: Vec<SubjectRecord>,
}

impl LongitudinalStudy {
    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.subjects.is_empty() {
            return Err(Error::Empty("study has no subjects".into()));
        }
        let d = self.dim();
        for s in &self.subjects {
            if s.steps.len() < 2 {
                return Err(Error::Study {
                    subject: s.subject_id.clone(),
                    step: s.steps.len(),
                    reason: format!("{} time step(s), at least 2 required", s.steps.len()),
                });
            }
            for (t, step) in s.steps.iter().enumerate() {
                if step.replicates.len() < 2 {
                    return Err(Error::Study {
                        subject: s.subject_id.clone(),
                        step: t,
                        reason: format!(
                            "{} replicate(s), at least 2 required",
                            step.replicates.len()
                        ),
                    });
                }
                if let Some(r) = step.replicates.iter().find(|r| r.len() != d) {
                    return Err(Error::Study {
                        subject: s.subject_id.clone(),
                        step: t,
                        reason: format!("replicate has {} values for {d} features", r.len()),
                    });
                }
                if step.replicates.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::Study {
                        subject: s.subject_id.clone(),
                        step: t,
                        reason: "non-finite measurement".into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Reads a study from delimited text with header
    /// `subject,step,replicate,<feature>...`.
    ///
    /// Rows are grouped by subject and step in order of first appearance; the
    /// replicate column is informational.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let lower: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
        let col = |name: &str| {
            lower
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse {
                    row: 0,
                    column: name.into(),
                    reason: "missing required column".into(),
                })
        };
        let subject_col = col("subject")?;
        let step_col = col("step")?;
        let replicate_col = lower.iter().position(|h| h == "replicate");
        let feature_cols: Vec<usize> = (0..headers.len())
            .filter(|&i| i != subject_col && i != step_col && Some(i) != replicate_col)
            .collect();
        if feature_cols.is_empty() {
            return Err(Error::Parse {
                row: 0,
                column: "<header>".into(),
                reason: "no feature columns".into(),
            });
        }
        let feature_names = feature_cols
            .iter()
            .map(|&i| headers[i].to_string())
            .collect();

        let mut subjects: Vec<SubjectRecord> = Vec::new();
        let mut subject_index: BTreeMap<String, usize> = BTreeMap::new();
        let mut step_index: Vec<BTreeMap<String, usize>> = Vec::new();
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            let row = r + 1;
            let sid = record[subject_col].to_string();
            let step_key = record[step_col].to_string();
            let values = feature_cols
                .iter()
                .map(|&c| {
                    record[c].parse::<f64>().map_err(|e| Error::Parse {
                        row,
                        column: headers[c].to_string(),
                        reason: e.to_string(),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            let si = *subject_index.entry(sid.clone()).or_insert_with(|| {
                subjects.push(SubjectRecord {
                    subject_id: sid.clone(),
                    steps: Vec::new(),
                });
                step_index.push(BTreeMap::new());
                subjects.len() - 1
            });
            let steps = &mut subjects[si].steps;
            let ti = *step_index[si].entry(step_key).or_insert_with(|| {
                steps.push(TimeStep {
                    replicates: Vec::new(),
                });
                steps.len() - 1
            });
            steps[ti].replicates.push(values);
        }
        Ok(LongitudinalStudy {
            feature_names,
            subjects,
        })
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["subject".to_string(), "step".into(), "replicate".into()];
        header.extend(self.feature_names.iter().cloned());
        w.write_record(&header)?;
        for s in &self.subjects {
            for (t, step) in s.steps.iter().enumerate() {
                for (k, rep) in step.replicates.iter().enumerate() {
                    let mut row = vec![s.subject_id.clone(), t.to_string(), k.to_string()];
                    row.extend(rep.iter().map(|v| format!("{v}")));
                    w.write_record(&row)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// IV decomposition for one subject, one entry per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectComponents {
    pub subject_id: String,
    pub iv_sd: Vec<f64>,
    pub av_sd: Vec<f64>,
    pub bv_sd: Vec<f64>,
    pub homeostatic_estimate: Vec<f64>,
    /// Set where `iv_sd^2 < av_sd^2`; `bv_sd` is clamped to zero there.
    pub negative_bv: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvComponents {
    pub feature_names: Vec<String>,
    pub subjects: Vec<SubjectComponents>,
}

impl IvComponents {
    /// `(subject, feature)` pairs whose biological variance came out negative.
    pub fn negative_bv_cells(&self) -> Vec<(String, String)> {
        self.subjects
            .iter()
            .flat_map(|s| {
                s.negative_bv
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| **f)
                    .map(|(j, _)| (s.subject_id.clone(), self.feature_names[j].clone()))
            })
            .collect()
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

/// `sqrt(iv^2 - av^2)`, clamped to zero when the difference is negative.
pub fn biological_sd(iv_sd: f64, av_sd: f64) -> (f64, bool) {
    let diff = iv_sd * iv_sd - av_sd * av_sd;
    if diff < 0.0 {
        (0.0, true)
    } else {
        (diff.sqrt(), false)
    }
}

pub fn estimate_iv_components(study: &LongitudinalStudy) -> Result<IvComponents> {
    study.validate()?;
    let d = study.dim();
    let subjects = study
        .subjects
        .iter()
        .map(|s| {
            let mut out = SubjectComponents {
                subject_id: s.subject_id.clone(),
                iv_sd: Vec::with_capacity(d),
                av_sd: Vec::with_capacity(d),
                bv_sd: Vec::with_capacity(d),
                homeostatic_estimate: Vec::with_capacity(d),
                negative_bv: Vec::with_capacity(d),
            };
            for j in 0..d {
                let pooled: Vec<f64> = s
                    .steps
                    .iter()
                    .flat_map(|t| t.replicates.iter().map(move |r| r[j]))
                    .collect();
                let step_vars: Vec<f64> = s
                    .steps
                    .iter()
                    .map(|t| {
                        sample_variance(&t.replicates.iter().map(|r| r[j]).collect::<Vec<_>>())
                    })
                    .collect();
                let iv = sample_variance(&pooled).sqrt();
                let av = mean(&step_vars).sqrt();
                let (bv, negative) = biological_sd(iv, av);
                if negative {
                    log::warn!(
                        "negative biological variance for subject {}, feature {}",
                        s.subject_id,
                        study.feature_names[j]
                    );
                }
                out.iv_sd.push(iv);
                out.av_sd.push(av);
                out.bv_sd.push(bv);
                out.homeostatic_estimate.push(mean(&pooled));
                out.negative_bv.push(negative);
            }
            out
        })
        .collect();
    Ok(IvComponents {
        feature_names: study.feature_names.clone(),
        subjects,
    })
}

/// Averages per-subject CVT/CVA/CVI over the population.
///
/// The resulting profile carries CVI (and the estimated CVT) under `class`.
pub fn coefficients_of_variation(components: &IvComponents, class: Label) -> Result<CvProfile> {
    let d = components.feature_names.len();
    if components.subjects.is_empty() {
        return Err(Error::Empty("no subjects".into()));
    }
    let mut cvt = vec![0.0; d];
    let mut cva = vec![0.0; d];
    let mut cvi = vec![0.0; d];
    for s in &components.subjects {
        for j in 0..d {
            let h = s.homeostatic_estimate[j];
            if !(h > 0.0) {
                return Err(Error::NonPositiveHomeostatic {
                    subject: s.subject_id.clone(),
                    feature: components.feature_names[j].clone(),
                    value: h,
                });
            }
            cvt[j] += s.iv_sd[j] / h;
            cva[j] += s.av_sd[j] / h;
            cvi[j] += s.bv_sd[j] / h;
        }
    }
    let n = components.subjects.len() as f64;
    for v in [&mut cvt, &mut cva, &mut cvi] {
        v.iter_mut().for_each(|c| *c /= n);
    }
    let mut profile = CvProfile::new(
        components.feature_names.clone(),
        cva,
        BTreeMap::from([(class, cvi)]),
    )?;
    profile.cvt_by_class = Some(BTreeMap::from([(class, cvt)]));
    Ok(profile)
}

/// Parameters for simulating a study with known variation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySimulation {
    pub feature_names: Vec<String>,
    /// Population mean of the homeostatic points.
    pub homeostatic_means: Vec<f64>,
    /// Relative between-subject spread of homeostatic points.
    pub between_subject_cv: f64,
    pub cva: Vec<f64>,
    pub cvi: Vec<f64>,
    pub subjects: usize,
    pub steps: usize,
    pub replicates: usize,
}

/// Simulates a study: each step's biological value is an IV perturbation
/// (CVI only) of the subject's homeostatic point; each replicate adds
/// analytical noise with SD `cva * homeostatic`.
pub fn simulate_study<R: Rng + ?Sized>(
    sim: &StudySimulation,
    rng: &mut R,
) -> Result<LongitudinalStudy> {
    let d = sim.feature_names.len();
    if sim.homeostatic_means.len() != d || sim.cva.len() != d || sim.cvi.len() != d {
        return Err(Error::InvalidInput(
            "simulation vectors must match feature count".into(),
        ));
    }
    let biological = CvProfile::new(
        sim.feature_names.clone(),
        vec![0.0; d],
        BTreeMap::from([(0, sim.cvi.clone())]),
    )?;
    let analytical = CvProfile::new(
        sim.feature_names.clone(),
        sim.cva.clone(),
        BTreeMap::from([(0, vec![0.0; d])]),
    )?;
    let subjects = (0..sim.subjects)
        .map(|i| {
            let home: Vec<f64> = sim
                .homeostatic_means
                .iter()
                .map(|&m| {
                    let z: f64 = rng.sample(StandardNormal);
                    (m * (1.0 + sim.between_subject_cv * z)).abs()
                })
                .collect();
            let av_sigma = super::build_sigma(&home, 0, &analytical)?;
            let steps = (0..sim.steps)
                .map(|_| {
                    let level = super::perturb(&home, 0, &biological, Default::default(), rng)?;
                    let replicates = (0..sim.replicates)
                        .map(|_| {
                            super::perturb::sample_diagonal(
                                &level,
                                &av_sigma,
                                Default::default(),
                                rng,
                            )
                        })
                        .collect();
                    Ok(TimeStep { replicates })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SubjectRecord {
                subject_id: format!("S{:03}", i + 1),
                steps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LongitudinalStudy {
        feature_names: sim.feature_names.clone(),
        subjects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use approx::assert_relative_eq;

    fn single_subject(steps: &[&[f64]]) -> LongitudinalStudy {
        LongitudinalStudy {
            feature_names: vec!["f".into()],
            subjects: vec![SubjectRecord {
                subject_id: "a".into(),
                steps: steps
                    .iter()
                    .map(|s| TimeStep {
                        replicates: s.iter().map(|v| vec![*v]).collect(),
                    })
                    .collect(),
            }],
        }
    }

    #[test]
    fn constant_subject_has_zero_variation() {
        let c = estimate_iv_components(&single_subject(&[&[4.0, 4.0], &[4.0, 4.0]])).unwrap();
        let s = &c.subjects[0];
        assert_eq!((s.iv_sd[0], s.av_sd[0], s.bv_sd[0]), (0.0, 0.0, 0.0));
        assert!(!s.negative_bv[0]);
    }

    #[test]
    fn two_step_hand_example() {
        // pooled {9, 11, 19, 21}: mean 15, sample variance 104/3
        let c = estimate_iv_components(&single_subject(&[&[9.0, 11.0], &[19.0, 21.0]])).unwrap();
        let s = &c.subjects[0];
        assert_relative_eq!(s.iv_sd[0], (104.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(s.iv_sd[0], 5.888, epsilon = 1e-3);
        assert_relative_eq!(s.av_sd[0], 2.0f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(s.bv_sd[0], (104.0f64 / 3.0 - 2.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(s.bv_sd[0], 5.715, epsilon = 1e-3);
        assert_eq!(s.homeostatic_estimate[0], 15.0);
    }

    #[test]
    fn three_four_five() {
        assert_eq!(biological_sd(5.0, 3.0), (4.0, false));
    }

    #[test]
    fn negative_biological_variance_is_clamped_and_flagged() {
        // replicate scatter dominates the pooled spread
        let c = estimate_iv_components(&single_subject(&[&[0.0, 10.0], &[10.0, 0.0]])).unwrap();
        let s = &c.subjects[0];
        assert!(s.negative_bv[0]);
        assert_eq!(s.bv_sd[0], 0.0);
        assert_eq!(c.negative_bv_cells().len(), 1);
    }

    #[test]
    fn rejects_single_replicate_and_single_step() {
        match estimate_iv_components(&single_subject(&[&[1.0, 2.0], &[3.0]])) {
            Err(Error::Study { subject, step, .. }) => {
                assert_eq!((subject.as_str(), step), ("a", 1))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(estimate_iv_components(&single_subject(&[&[1.0, 2.0]])).is_err());
    }

    #[test]
    fn cv_is_ratio_and_population_mean() {
        let comps = IvComponents {
            feature_names: vec!["f".into()],
            subjects: vec![
                SubjectComponents {
                    subject_id: "a".into(),
                    iv_sd: vec![5.0],
                    av_sd: vec![1.0],
                    bv_sd: vec![2.0],
                    homeostatic_estimate: vec![100.0],
                    negative_bv: vec![false],
                },
                SubjectComponents {
                    subject_id: "b".into(),
                    iv_sd: vec![5.0],
                    av_sd: vec![1.0],
                    bv_sd: vec![2.0],
                    homeostatic_estimate: vec![50.0],
                    negative_bv: vec![false],
                },
            ],
        };
        let p = coefficients_of_variation(&comps, 0).unwrap();
        assert_relative_eq!(p.cvi(0).unwrap()[0], 0.03, epsilon = 1e-15);
        let cvt = &p.cvt_by_class.as_ref().unwrap()[&0];
        assert_relative_eq!(cvt[0], 0.075, epsilon = 1e-15);

        let mut one = comps.clone();
        one.subjects.truncate(1);
        let p = coefficients_of_variation(&one, 0).unwrap();
        assert_relative_eq!(p.cvt_by_class.unwrap()[&0][0], 0.05, epsilon = 1e-15);
    }

    #[test]
    fn non_positive_homeostatic_is_rejected() {
        let c = estimate_iv_components(&single_subject(&[&[-1.0, 1.0], &[0.0, 0.0]])).unwrap();
        assert!(matches!(
            coefficients_of_variation(&c, 0),
            Err(Error::NonPositiveHomeostatic { .. })
        ));
    }

    #[test]
    fn csv_round_trip_and_grouping() {
        let text = "subject,step,replicate,A,B\n\
                    s1,1,1,9,1\ns1,1,2,11,1\ns1,2,1,19,1\ns1,2,2,21,1\n";
        let study = LongitudinalStudy::read_csv(text.as_bytes()).unwrap();
        assert_eq!(study.feature_names, vec!["A", "B"]);
        assert_eq!(study.subjects[0].steps.len(), 2);
        let mut out = Vec::new();
        study.write_csv(&mut out).unwrap();
        let back = LongitudinalStudy::read_csv(out.as_slice()).unwrap();
        assert_eq!(back, study);
    }

    #[test]
    fn csv_parse_error_names_coordinates() {
        let text = "subject,step,A\ns1,1,abc\n";
        match LongitudinalStudy::read_csv(text.as_bytes()) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column.as_str()), (1, "A")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn simulated_study_recovers_known_cvs() {
        let sim = StudySimulation {
            feature_names: vec!["f".into()],
            homeostatic_means: vec![100.0],
            between_subject_cv: 0.2,
            cva: vec![0.03],
            cvi: vec![0.10],
            subjects: 30,
            steps: 10,
            replicates: 2,
        };
        let study = simulate_study(&sim, &mut rng_from_seed(99)).unwrap();
        let p = coefficients_of_variation(&estimate_iv_components(&study).unwrap(), 0).unwrap();
        assert!((p.cva[0] - 0.03).abs() / 0.03 < 0.10, "cva {}", p.cva[0]);
        assert!(
            (p.cvi(0).unwrap()[0] - 0.10).abs() / 0.10 < 0.10,
            "cvi {}",
            p.cvi(0).unwrap()[0]
        );
    }
}
