//! Case-dependent, class-conditional Gaussian perturbation.
//!
//! An observed instance `x` with label `y` is modelled as a draw from a
//! diagonal Gaussian centred at `x` whose per-feature standard deviation is
//! `|x_j| * sqrt(cva_j^2 + cvi_{y,j}^2)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::iv::CvProfile;
use crate::Label;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PerturbOptions {
    /// Clamp perturbed values at zero (lab measurands are non-negative).
    pub clip_nonnegative: bool,
}

/// Per-feature standard deviations of the IV distribution around `x`.
pub fn build_sigma(x: &[f64], y: Label, profile: &CvProfile) -> Result<Vec<f64>> {
    if x.len() != profile.dim() {
        return Err(Error::DimensionMismatch {
            expected: profile.dim(),
            got: x.len(),
        });
    }
    let cvi = profile.cvi(y)?;
    Ok(x.iter()
        .zip(&profile.cva)
        .zip(cvi)
        .map(|((xj, a), i)| xj.abs() * (a * a + i * i).sqrt())
        .collect())
}

/// Draws one realization `x_p ~ N(x, diag(sigma^2))`.
///
/// One standard-normal draw is consumed per feature whatever the scale, so the
/// stream position after the call only depends on the dimension.
pub fn perturb<R: Rng + ?Sized>(
    x: &[f64],
    y: Label,
    profile: &CvProfile,
    options: PerturbOptions,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let sigma = build_sigma(x, y, profile)?;
    Ok(sample_diagonal(x, &sigma, options, rng))
}

pub(crate) fn sample_diagonal<R: Rng + ?Sized>(
    center: &[f64],
    sigma: &[f64],
    options: PerturbOptions,
    rng: &mut R,
) -> Vec<f64> {
    center
        .iter()
        .zip(sigma)
        .map(|(&m, &s)| {
            let z: f64 = rng.sample(StandardNormal);
            let v = if s == 0.0 { m } else { m + s * z };
            if options.clip_nonnegative {
                v.max(0.0)
            } else {
                v
            }
        })
        .collect()
}
