use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::json;

use ivrobust::harness::{evaluate, ks_check, Candidate, CiBasis, ProtocolConfig};
use ivrobust::iv::{
    coefficients_of_variation, estimate_iv_components, load_dataset, perturb as perturb_row,
    simulate_study as simulate, ColumnSchema, CvProfile, Dataset, LongitudinalStudy,
    PerturbOptions, StudySimulation, SyntheticSpec,
};
use ivrobust::rng::rng_from_seed;

use crate::manifest::RunManifest;
use crate::{
    BenchArgs, CiBasisArg, CommonArgs, EstimateArgs, PerturbArgs, ProtocolArg, SimulateArgs,
    SynthArgs,
};

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Dataset, profile, the input files they came from and a JSON description of the source.
struct Inputs {
    data: Dataset,
    profile: CvProfile,
    files: Vec<PathBuf>,
    source: serde_json::Value,
}

fn load_inputs(args: &CommonArgs) -> Result<Inputs> {
    let mut files = Vec::new();
    let (data, source) = if let Some(path) = &args.source.data {
        let schema = ColumnSchema {
            label: args.label.clone(),
            ..ColumnSchema::default()
        };
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let data = load_dataset(BufReader::new(file), &schema)
            .with_context(|| format!("loading {}", path.display()))?;
        let p = &data.provenance;
        if p.rows_dropped > 0 || p.cells_imputed > 0 {
            log::warn!(
                "dropped {} rows and imputed {} cells",
                p.rows_dropped,
                p.cells_imputed
            );
        }
        files.push(path.clone());
        (data, json!({ "data": path, "label": args.label }))
    } else {
        let spec = match &args.synthetic_spec {
            Some(path) => {
                files.push(path.clone());
                SyntheticSpec::load(path).with_context(|| format!("loading {}", path.display()))?
            }
            None => SyntheticSpec::table_a1_default(),
        };
        (spec.generate()?, json!({ "synthetic": spec }))
    };
    let profile = match &args.profile {
        Some(path) => {
            files.push(path.clone());
            CvProfile::load(path).with_context(|| format!("loading {}", path.display()))?
        }
        None => CvProfile::table_a1(),
    };
    Ok(Inputs {
        data,
        profile,
        files,
        source,
    })
}

fn manifest(
    command: &str,
    config: serde_json::Value,
    seed: u64,
    files: &[PathBuf],
) -> Result<RunManifest> {
    let paths: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
    RunManifest::new(command, config, seed, &paths)
}

pub fn estimate_cv(args: EstimateArgs) -> Result<()> {
    let file =
        File::open(&args.data).with_context(|| format!("opening {}", args.data.display()))?;
    let study = LongitudinalStudy::read_csv(BufReader::new(file))?;
    let components = estimate_iv_components(&study)?;
    let negative = components.negative_bv_cells();
    if !negative.is_empty() {
        log::warn!(
            "{} subject/feature cells had negative biological variance, clamped to 0",
            negative.len()
        );
    }
    let profile = coefficients_of_variation(&components, args.class)?;
    ensure_dir(&args.out_dir)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.out_dir.join("profile.json"));
    profile.save(&out)?;

    let cvt = &profile
        .cvt_by_class
        .as_ref()
        .expect("estimated profiles carry CVT")[&args.class];
    let cvi = profile.cvi(args.class)?;
    println!("{:<12} {:>9} {:>9} {:>9}", "feature", "CVT", "CVA", "CVI");
    for (j, name) in profile.feature_names.iter().enumerate() {
        println!(
            "{:<12} {:>9.5} {:>9.5} {:>9.5}",
            name, cvt[j], profile.cva[j], cvi[j]
        );
    }
    let config = json!({ "data": args.data, "class": args.class, "out": out, "subjects": study.subjects.len() });
    manifest("estimate-cv", config, 0, &[args.data])?.save(&args.out_dir)
}

fn candidates(protocol: ProtocolArg) -> Vec<Candidate> {
    match protocol {
        ProtocolArg::Standard => Candidate::standard_roster(),
        ProtocolArg::Augmented => Candidate::augmented_roster(),
        ProtocolArg::Imprecise => Candidate::imprecise_roster(),
        ProtocolArg::All => {
            let mut all = Candidate::standard_roster();
            all.extend(Candidate::augmented_roster());
            all.extend(Candidate::imprecise_roster());
            all
        }
    }
}

pub fn bench(args: BenchArgs) -> Result<()> {
    let c = &args.common;
    let inputs = load_inputs(c)?;
    let cfg = ProtocolConfig {
        iterations: args.iterations,
        folds: args.folds,
        augment_n: args.augment_n,
        seed: c.seed,
        ci_level: args.ci_level,
        ci_basis: match args.ci_basis {
            CiBasisArg::PerIteration => CiBasis::PerIteration,
            CiBasisArg::PerFold => CiBasis::PerFold,
        },
        class_agnostic: c.class_agnostic_cv,
        clip_nonnegative: c.clip_nonnegative,
        jobs: args.jobs.max(1),
        ..ProtocolConfig::default()
    };
    let roster = candidates(args.protocol);
    let report = evaluate(&roster, &inputs.data, &inputs.profile, &cfg)?;
    ensure_dir(&c.out_dir)?;
    report.save(&c.out_dir, "report")?;

    println!(
        "{:<5} {:<9} {:>8} {:>8} {:>8}  verdict",
        "model", "metric", "base", "pert", "gap"
    );
    for e in &report.entries {
        println!(
            "{:<5} {:<9} {:>8.4} {:>8.4} {:>8.4}  {}",
            e.model,
            e.metric.name(),
            e.baseline.mean,
            e.perturbed.mean,
            e.gap,
            e.verdict.name()
        );
    }
    for note in &report.notes {
        log::info!("{note}");
    }
    let config = json!({
        "source": inputs.source,
        "profile": c.profile,
        "protocol": format!("{:?}", args.protocol).to_lowercase(),
        "harness": cfg,
        "config_hash": report.provenance.config_hash,
    });
    manifest("bench", config, c.seed, &inputs.files)?.save(&c.out_dir)
}

pub fn perturb(args: PerturbArgs) -> Result<()> {
    let c = &args.common;
    let inputs = load_inputs(c)?;
    let data = &inputs.data;
    let profile = inputs.profile.aligned_to(&data.feature_names)?;
    profile.covers_classes(data.classes())?;
    let profile = if c.class_agnostic_cv {
        profile.class_agnostic()
    } else {
        profile
    };
    let columns = args
        .features
        .iter()
        .map(|f| {
            data.column_index(f)
                .with_context(|| format!("feature {f:?} not in dataset"))
        })
        .collect::<Result<Vec<_>>>()?;

    let options = PerturbOptions {
        clip_nonnegative: c.clip_nonnegative,
    };
    let mut rng = rng_from_seed(c.seed);
    let mut perturbed = data.clone();
    for (i, mut row) in perturbed.x.rows_mut().into_iter().enumerate() {
        let xp = perturb_row(
            &data.x.row(i).to_vec(),
            data.y[i],
            &profile,
            options,
            &mut rng,
        )?;
        for (dst, v) in row.iter_mut().zip(xp) {
            *dst = v;
        }
    }

    ensure_dir(&c.out_dir)?;
    perturbed.write_csv(File::create(c.out_dir.join("perturbed.csv"))?, &c.label)?;
    let mut ks = csv::Writer::from_path(c.out_dir.join("ks.csv"))?;
    ks.write_record(["feature", "statistic", "p_value", "reject"])?;
    println!(
        "{:<8} {:>9} {:>9}  reject@{}",
        "feature", "D", "p", args.alpha
    );
    for (name, &j) in args.features.iter().zip(&columns) {
        let a = data.x.column(j).to_vec();
        let b = perturbed.x.column(j).to_vec();
        let r = ks_check(&a, &b, args.alpha)?;
        ks.write_record([
            name.clone(),
            r.statistic.to_string(),
            r.p_value.to_string(),
            r.reject.to_string(),
        ])?;
        println!(
            "{:<8} {:>9.5} {:>9.5}  {}",
            name, r.statistic, r.p_value, r.reject
        );
    }
    ks.flush()?;
    let config = json!({
        "source": inputs.source,
        "profile": c.profile,
        "features": args.features,
        "alpha": args.alpha,
        "class_agnostic_cv": c.class_agnostic_cv,
        "clip_nonnegative": c.clip_nonnegative,
    });
    manifest("perturb", config, c.seed, &inputs.files)?.save(&c.out_dir)
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let mut files = Vec::new();
    let mut spec = match &args.spec {
        Some(path) => {
            files.push(path.clone());
            SyntheticSpec::load(path).with_context(|| format!("loading {}", path.display()))?
        }
        None => SyntheticSpec::table_a1_default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let data = spec.generate()?;
    ensure_dir(&args.out_dir)?;
    data.write_csv(File::create(args.out_dir.join("synthetic.csv"))?, "target")?;
    std::fs::write(
        args.out_dir.join("synthetic_spec.json"),
        spec.to_json()? + "\n",
    )?;
    let [neg, pos] = data.class_counts();
    println!(
        "{} rows, {} features, {pos} positive / {neg} negative",
        data.len(),
        data.dim()
    );
    manifest("synth", json!({ "spec": spec }), spec.seed, &files)?.save(&args.out_dir)
}

pub fn simulate_study(args: SimulateArgs) -> Result<()> {
    let sim = StudySimulation {
        feature_names: vec!["A".into(), "B".into(), "C".into()],
        homeostatic_means: vec![10.0, 50.0, 200.0],
        between_subject_cv: 0.2,
        cva: vec![args.cva; 3],
        cvi: vec![args.cvi; 3],
        subjects: args.subjects,
        steps: args.steps,
        replicates: args.replicates,
    };
    let study = simulate(&sim, &mut rng_from_seed(args.seed))?;
    ensure_dir(&args.out_dir)?;
    study.write_csv(File::create(args.out_dir.join("study.csv"))?)?;
    manifest(
        "simulate-study",
        serde_json::to_value(&sim)?,
        args.seed,
        &[],
    )?
    .save(&args.out_dir)
}

pub fn verify_manifest(path: &Path) -> Result<()> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let manifest: RunManifest = serde_json::from_str(&text)?;
    let stale = manifest.stale_inputs()?;
    if !stale.is_empty() {
        bail!(
            "inputs changed since the run: {}",
            stale
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    println!("{} input(s) match", manifest.inputs.len());
    Ok(())
}
