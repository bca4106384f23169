//! Individual-variation model: CV estimation from longitudinal studies,
//! the Gaussian perturbation generator, dataset ingestion and synthesis.

mod dataset;
mod perturb;
mod profile;
mod study;
mod synthetic;

pub use dataset::{load_dataset, ColumnSchema, Dataset, IngestReport, MAX_MISSING_FRACTION};
pub use perturb::{build_sigma, perturb, PerturbOptions};
pub use profile::CvProfile;
pub use study::{
    biological_sd, coefficients_of_variation, estimate_iv_components, simulate_study, IvComponents,
    LongitudinalStudy, StudySimulation, SubjectComponents, SubjectRecord, TimeStep,
};
pub use synthetic::{
    synthesize_dataset, SyntheticSpec, DEFAULT_CLASS_SHIFTS, DEFAULT_INSTANCES, DEFAULT_PREVALENCE,
    DEFAULT_SEED, TABLE_A1_MEANS, TABLE_A1_SDS,
};

pub(crate) use perturb::sample_diagonal;
