//! Sequential minimal optimization for the C-SVM dual
//!
//! ```text
//! min  1/2 a'Qa - e'a   s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j K_ij
//! ```
//!
//! Working pairs are chosen with second-order information (maximal violating
//! `i`, then the `j` giving the largest guaranteed decrease). Kernel rows come
//! from a [`KernelRows`] source, which may cache them.

use std::rc::Rc;

use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

/// Row access to a symmetric kernel matrix.
pub trait KernelRows {
    fn len(&self) -> usize;
    fn diag(&self, i: usize) -> f64;
    fn row(&mut self, i: usize) -> Rc<[f64]>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoConfig {
    pub c: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SmoConfig {
    fn default() -> Self {
        SmoConfig {
            c: 1.0,
            tol: 1e-3,
            max_iter: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Offset: the decision value is `sum_i alpha_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    pub iterations: usize,
    /// Maximal KKT violation `m(a) - M(a)` at termination.
    pub violation: f64,
    pub converged: bool,
}

impl SmoSolution {
    pub fn bias(&self) -> f64 {
        -self.rho
    }
}

/// `y` holds +1/-1 signs.
pub fn solve<K: KernelRows>(kernel: &mut K, y: &[f64], config: &SmoConfig) -> Result<SmoSolution> {
    let l = kernel.len();
    if l != y.len() {
        return Err(Error::DimensionMismatch {
            expected: l,
            got: y.len(),
        });
    }
    if l == 0 {
        return Err(Error::Empty("no training instances".into()));
    }
    if !(config.c > 0.0) {
        return Err(Error::InvalidInput(format!(
            "C must be positive, got {}",
            config.c
        )));
    }
    let c = config.c;
    let qd: Vec<f64> = (0..l).map(|i| kernel.diag(i)).collect();
    let mut alpha = vec![0.0; l];
    let mut grad = vec![-1.0; l];
    let max_iter = config.max_iter.max(100 * l);

    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut violation;
    let mut converged = false;
    loop {
        // select i: maximal -y_t G_t over I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..l {
            if y[t] > 0.0 {
                if !upper(alpha[t]) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    i_sel = t;
                }
            } else if !lower(alpha[t]) && grad[t] >= gmax {
                gmax = grad[t];
                i_sel = t;
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut obj_min = f64::INFINITY;
        let ki = if i_sel != usize::MAX {
            Some(kernel.row(i_sel))
        } else {
            None
        };
        for t in 0..l {
            if y[t] > 0.0 {
                if !lower(alpha[t]) {
                    let grad_diff = gmax + grad[t];
                    if grad[t] >= gmax2 {
                        gmax2 = grad[t];
                    }
                    if grad_diff > 0.0 {
                        let ki = ki.as_ref().unwrap();
                        let quad = qd[i_sel] + qd[t] - 2.0 * ki[t];
                        let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                        if obj <= obj_min {
                            obj_min = obj;
                            j_sel = t;
                        }
                    }
                }
            } else if !upper(alpha[t]) {
                let grad_diff = gmax - grad[t];
                if -grad[t] >= gmax2 {
                    gmax2 = -grad[t];
                }
                if grad_diff > 0.0 {
                    let ki = ki.as_ref().unwrap();
                    let quad = qd[i_sel] + qd[t] - 2.0 * ki[t];
                    let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                    if obj <= obj_min {
                        obj_min = obj;
                        j_sel = t;
                    }
                }
            }
        }
        violation = gmax + gmax2;
        if violation < config.tol || j_sel == usize::MAX {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            log::warn!("SMO stopped at the iteration cap with violation {violation}");
            break;
        }
        iterations += 1;

        let (i, j) = (i_sel, j_sel);
        let ki = ki.unwrap();
        let kj = kernel.row(j);
        let qij = y[i] * y[j] * ki[j];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (qd[i] + qd[j] + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qd[i] + qd[j] - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        let (si, sj) = (y[i] * di, y[j] * dj);
        for t in 0..l {
            grad[t] += y[t] * (ki[t] * si + kj[t] * sj);
        }
    }

    // offset from free vectors, midpoint of the feasible range otherwise
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..l {
        let yg = y[t] * grad[t];
        if upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else if lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        0.5 * (ub + lb)
    };
    if !rho.is_finite() {
        return Err(Error::Numeric("SMO produced a non-finite offset".into()));
    }
    Ok(SmoSolution {
        alpha,
        rho,
        iterations,
        violation,
        converged,
    })
}

/// A fully materialized kernel matrix.
pub struct PrecomputedRows {
    rows: Vec<Rc<[f64]>>,
}

impl PrecomputedRows {
    pub fn new(gram: &ndarray::Array2<f64>) -> Self {
        PrecomputedRows {
            rows: gram
                .rows()
                .into_iter()
                .map(|r| Rc::from(r.to_vec()))
                .collect(),
        }
    }
}

impl KernelRows for PrecomputedRows {
    fn len(&self) -> usize {
        self.rows.len()
    }
    fn diag(&self, i: usize) -> f64 {
        self.rows[i][i]
    }
    fn row(&mut self, i: usize) -> Rc<[f64]> {
        self.rows[i].clone()
    }
}

/// Least-recently-used cache of kernel rows computed on demand.
pub struct CachedRows<F: FnMut(usize, &mut [f64])> {
    n: usize,
    diag: Vec<f64>,
    compute: F,
    slots: Vec<Option<(Rc<[f64]>, u64)>>,
    cached: usize,
    capacity: usize,
    clock: u64,
}

impl<F: FnMut(usize, &mut [f64])> CachedRows<F> {
    /// `compute(i, out)` fills `out` with row `i`; at most `capacity_bytes`
    /// of rows are kept (and at least two).
    pub fn new(n: usize, diag: Vec<f64>, capacity_bytes: usize, compute: F) -> Self {
        let per_row = (n * std::mem::size_of::<f64>()).max(1);
        CachedRows {
            n,
            diag,
            compute,
            slots: vec![None; n],
            cached: 0,
            capacity: (capacity_bytes / per_row).max(2),
            clock: 0,
        }
    }
}

impl<F: FnMut(usize, &mut [f64])> KernelRows for CachedRows<F> {
    fn len(&self) -> usize {
        self.n
    }
    fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }
    fn row(&mut self, i: usize) -> Rc<[f64]> {
        self.clock += 1;
        if let Some((row, stamp)) = &mut self.slots[i] {
            *stamp = self.clock;
            return row.clone();
        }
        if self.cached >= self.capacity {
            let victim = self
                .slots
                .iter()
                .enumerate()
                .filter_map(|(k, s)| s.as_ref().map(|(_, t)| (k, *t)))
                .min_by_key(|&(_, t)| t)
                .map(|(k, _)| k)
                .unwrap();
            self.slots[victim] = None;
            self.cached -= 1;
        }
        let mut buf = vec![0.0; self.n];
        (self.compute)(i, &mut buf);
        let row: Rc<[f64]> = Rc::from(buf);
        self.slots[i] = Some((row.clone(), self.clock));
        self.cached += 1;
        row
    }
}
