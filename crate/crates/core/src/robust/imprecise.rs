use ndarray::ArrayView2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iv::{build_sigma, CvProfile};
use crate::Label;

/// How an imprecise instance's `(center, scale)` pair is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Gaussian with mean `center` and diagonal covariance `scale^2`.
    Prob,
    /// Gaussian fuzzy vector, membership `exp(-(x - center)^2 / scale^2)` per coordinate.
    Poss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpreciseInstance {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
    pub label: Label,
    pub scheme: Scheme,
}

impl ImpreciseInstance {
    pub fn new(center: Vec<f64>, scale: Vec<f64>, label: Label, scheme: Scheme) -> Result<Self> {
        if center.len() != scale.len() {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                got: scale.len(),
            });
        }
        if let Some(s) = scale.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "scale entries must be finite and >= 0, got {s}"
            )));
        }
        Ok(ImpreciseInstance {
            center,
            scale,
            label,
            scheme,
        })
    }

    /// A crisp point (all scales zero).
    pub fn crisp(center: Vec<f64>, label: Label, scheme: Scheme) -> Self {
        let d = center.len();
        ImpreciseInstance {
            center,
            scale: vec![0.0; d],
            label,
            scheme,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn is_crisp(&self) -> bool {
        self.scale.iter().all(|&s| s == 0.0)
    }

    /// Possibility degree of `x` under the min-combined Gaussian fuzzy vector.
    /// A zero-scale coordinate is an indicator of its center.
    pub fn membership(&self, x: &[f64]) -> f64 {
        self.center
            .iter()
            .zip(&self.scale)
            .zip(x)
            .map(|((a, b), v)| gauss_membership(*v, *a, *b))
            .fold(1.0, f64::min)
    }
}

/// `exp(-(x - a)^2 / b^2)`; for `b = 0` the indicator of `x == a`.
pub fn gauss_membership(x: f64, a: f64, b: f64) -> f64 {
    if b == 0.0 {
        return if x == a { 1.0 } else { 0.0 };
    }
    (-((x - a) / b).powi(2)).exp()
}

pub fn imprecisiate(
    x: &[f64],
    y: Label,
    profile: &CvProfile,
    scheme: Scheme,
) -> Result<ImpreciseInstance> {
    let scale = build_sigma(x, y, profile)?;
    Ok(ImpreciseInstance {
        center: x.to_vec(),
        scale,
        label: y,
        scheme,
    })
}

/// Imprecisiates every row of `x`.
pub fn imprecisiate_all(
    x: ArrayView2<'_, f64>,
    y: &[Label],
    profile: &CvProfile,
    scheme: Scheme,
) -> Result<Vec<ImpreciseInstance>> {
    x.rows()
        .into_iter()
        .zip(y)
        .map(|(r, &l)| imprecisiate(&r.to_vec(), l, profile, scheme))
        .collect()
}

/// Half-width of the alpha-cut of a Gaussian fuzzy number with scale `b`.
pub fn cut_half_width(b: f64, alpha: f64) -> f64 {
    b * (-alpha.ln()).sqrt()
}

/// A point drawn uniformly from the alpha-cut box at a given `alpha`.
/// One uniform draw is consumed per coordinate.
pub fn sample_cut<R: Rng + ?Sized>(inst: &ImpreciseInstance, alpha: f64, rng: &mut R) -> Vec<f64> {
    inst.center
        .iter()
        .zip(&inst.scale)
        .map(|(&a, &b)| {
            let u: f64 = rng.random();
            if b == 0.0 {
                a
            } else {
                let h = cut_half_width(b, alpha);
                a + h * (2.0 * u - 1.0)
            }
        })
        .collect()
}

/// Draws `alpha ~ U(0, 1]`, then a point uniform on the alpha-cut.
/// Returns the point, the label and the drawn `alpha`.
pub fn alpha_cut_sample<R: Rng + ?Sized>(
    inst: &ImpreciseInstance,
    rng: &mut R,
) -> (Vec<f64>, Label, f64) {
    let alpha = 1.0 - rng.random::<f64>();
    (sample_cut(inst, alpha, rng), inst.label, alpha)
}
