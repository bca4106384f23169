//! Binary decision trees on real targets.
//!
//! One builder serves every tree model in the crate. Splits minimize the
//! weighted within-child variance of the targets; for 0/1 targets this is
//! the Gini criterion (Gini impurity is twice the Bernoulli variance), for
//! residual targets it is the least-squares criterion used by gradient
//! boosting.
//!
//! Each feature keeps the node's sample slots sorted by value, partitioned
//! in place on every split, so a level costs O(n d) after the initial sort.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major view over a dense matrix.
#[derive(Debug, Clone, Copy)]
pub struct RowMatrix<'a> {
    data: &'a [f64],
    pub rows: usize,
    pub cols: usize,
}

impl<'a> RowMatrix<'a> {
    pub fn new(data: &'a [f64], rows: usize, cols: usize) -> Self {
        assert_eq!(data.len(), rows * cols);
        RowMatrix { data, rows, cols }
    }

    /// Panics unless `x` is in standard (row-major, contiguous) layout.
    pub fn from_array(x: &'a ndarray::Array2<f64>) -> Self {
        let data = x.as_slice().expect("standard layout matrix");
        RowMatrix::new(data, x.nrows(), x.ncols())
    }

    #[inline]
    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitter {
    /// Exhaustive search over midpoints between consecutive distinct values.
    Best,
    /// One uniform threshold in `[min, max)` per candidate feature.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => ((d as f64).sqrt() as usize).max(1),
            MaxFeatures::Count(k) => k.clamp(1, d.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
    pub splitter: Splitter,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            max_features: MaxFeatures::All,
            splitter: Splitter::Best,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == Some(0) {
            return Err(Error::InvalidInput("tree depth must be at least 1".into()));
        }
        if self.min_samples_split < 2 || self.min_samples_leaf < 1 {
            return Err(Error::InvalidInput(
                "min_samples_split >= 2 and min_samples_leaf >= 1 required".into(),
            ));
        }
        if self.max_features == MaxFeatures::Count(0) {
            return Err(Error::InvalidInput(
                "max_features must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                Node::Leaf { .. } => return k,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    k = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(x)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], k: usize) -> usize {
            match nodes[k] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn set_leaf_value(&mut self, node: usize, value: f64) {
        if let Node::Leaf { value: v } = &mut self.nodes[node] {
            *v = value;
        }
    }
}

/// Per-feature slot orderings of a training sample, sorted by value.
#[derive(Debug, Clone)]
pub struct Presorted {
    order: Vec<u32>,
    n: usize,
}

impl Presorted {
    /// `rows[s]` is the matrix row behind sample slot `s` (duplicates allowed).
    pub fn new(x: RowMatrix<'_>, rows: &[usize]) -> Self {
        let n = rows.len();
        let mut order = Vec::with_capacity(n * x.cols);
        for f in 0..x.cols {
            let mut slots: Vec<u32> = (0..n as u32).collect();
            slots.sort_by(|&a, &b| {
                x.get(rows[a as usize], f)
                    .total_cmp(&x.get(rows[b as usize], f))
                    .then(a.cmp(&b))
            });
            order.extend(slots);
        }
        Presorted { order, n }
    }
}

/// A fitted tree plus the leaf reached by every training slot.
pub struct FittedTree {
    pub tree: Tree,
    pub leaf_of_slot: Vec<usize>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Grows a tree on sample slots `rows` with per-slot `targets`.
pub fn fit_tree<R: Rng + ?Sized>(
    x: RowMatrix<'_>,
    rows: &[usize],
    targets: &[f64],
    params: &TreeParams,
    rng: &mut R,
) -> Result<FittedTree> {
    let presorted = Presorted::new(x, rows);
    fit_tree_presorted(x, rows, &presorted, targets, params, rng)
}

pub fn fit_tree_presorted<R: Rng + ?Sized>(
    x: RowMatrix<'_>,
    rows: &[usize],
    presorted: &Presorted,
    targets: &[f64],
    params: &TreeParams,
    rng: &mut R,
) -> Result<FittedTree> {
    params.validate()?;
    let n = rows.len();
    let d = x.cols;
    if n == 0 {
        return Err(Error::Empty("tree needs at least one sample".into()));
    }
    if targets.len() != n || presorted.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: targets.len(),
        });
    }
    let k_features = params.max_features.resolve(d);
    let mut order = presorted.order.clone();
    let mut buffer: Vec<u32> = vec![0; n];
    let mut go_left = vec![false; n];
    let mut leaf_of_slot = vec![0usize; n];
    let mut features: Vec<usize> = (0..d).collect();
    let mut nodes: Vec<Node> = Vec::new();
    let value = |s: u32, f: usize| x.get(rows[s as usize], f);

    // (start, end, depth, node index)
    nodes.push(Node::Leaf { value: 0.0 });
    let mut stack = vec![(0usize, n, 0usize, 0usize)];
    while let Some((start, end, depth, id)) = stack.pop() {
        let count = end - start;
        let seg0 = &order[start..end];
        let (sum, sumsq) = seg0.iter().fold((0.0, 0.0), |(a, b), &s| {
            let t = targets[s as usize];
            (a + t, b + t * t)
        });
        let mean = sum / count as f64;
        let impurity = sumsq / count as f64 - mean * mean;
        let depth_capped = params.max_depth.is_some_and(|m| depth >= m);
        let mut best: Option<Candidate> = None;
        if !depth_capped
            && count >= params.min_samples_split
            && count >= 2 * params.min_samples_leaf
            && impurity > 1e-12
        {
            features.shuffle(rng);
            let mut visited = 0;
            for &f in features.iter() {
                if visited >= k_features {
                    break;
                }
                let seg = &order[f * n + start..f * n + end];
                let lo = value(seg[0], f);
                let hi = value(seg[count - 1], f);
                if !(hi > lo) {
                    continue;
                }
                visited += 1;
                let candidate = match params.splitter {
                    Splitter::Best => {
                        best_split(seg, f, &value, targets, sum, params.min_samples_leaf)
                    }
                    Splitter::Random => {
                        let mut t = rng.random_range(lo..hi);
                        if t >= hi {
                            t = lo;
                        }
                        random_split(seg, f, t, &value, targets, sum, params.min_samples_leaf)
                    }
                };
                if let Some(c) = candidate {
                    if best.as_ref().is_none_or(|b| c.score > b.score) {
                        best = Some(c);
                    }
                }
            }
        }

        let Some(split) = best else {
            nodes[id] = Node::Leaf { value: mean };
            for &s in &order[start..end] {
                leaf_of_slot[s as usize] = id;
            }
            continue;
        };

        let mut n_left = 0;
        for &s in &order[split.feature * n + start..split.feature * n + end] {
            let l = value(s, split.feature) <= split.threshold;
            go_left[s as usize] = l;
            n_left += l as usize;
        }
        for f in 0..d {
            let seg = &mut order[f * n + start..f * n + end];
            let (mut li, mut ri) = (0, n_left);
            for &s in seg.iter() {
                if go_left[s as usize] {
                    buffer[li] = s;
                    li += 1;
                } else {
                    buffer[ri] = s;
                    ri += 1;
                }
            }
            seg.copy_from_slice(&buffer[..count]);
        }
        let left = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        let right = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        stack.push((start + n_left, end, depth + 1, right));
        stack.push((start, start + n_left, depth + 1, left));
    }
    Ok(FittedTree {
        tree: Tree { nodes },
        leaf_of_slot,
    })
}

fn best_split(
    seg: &[u32],
    f: usize,
    value: &impl Fn(u32, usize) -> f64,
    targets: &[f64],
    total: f64,
    min_leaf: usize,
) -> Option<Candidate> {
    let count = seg.len();
    let mut left_sum = 0.0;
    let mut best: Option<Candidate> = None;
    for p in 0..count - 1 {
        left_sum += targets[seg[p] as usize];
        let n_left = p + 1;
        let n_right = count - n_left;
        if n_left < min_leaf || n_right < min_leaf {
            continue;
        }
        let (v, w) = (value(seg[p], f), value(seg[p + 1], f));
        if !(w > v) {
            continue;
        }
        let right_sum = total - left_sum;
        // maximizing this proxy minimizes the summed child variance
        let score = left_sum * left_sum / n_left as f64 + right_sum * right_sum / n_right as f64;
        if best.as_ref().is_none_or(|b| score > b.score) {
            let mut t = 0.5 * (v + w);
            if t >= w {
                t = v;
            }
            best = Some(Candidate {
                feature: f,
                threshold: t,
                score,
            });
        }
    }
    best
}

fn random_split(
    seg: &[u32],
    f: usize,
    threshold: f64,
    value: &impl Fn(u32, usize) -> f64,
    targets: &[f64],
    total: f64,
    min_leaf: usize,
) -> Option<Candidate> {
    let count = seg.len();
    let mut left_sum = 0.0;
    let mut n_left = 0;
    for &s in seg {
        if value(s, f) > threshold {
            break;
        }
        left_sum += targets[s as usize];
        n_left += 1;
    }
    let n_right = count - n_left;
    if n_left < min_leaf || n_right < min_leaf {
        return None;
    }
    let right_sum = total - left_sum;
    let score = left_sum * left_sum / n_left as f64 + right_sum * right_sum / n_right as f64;
    Some(Candidate {
        feature: f,
        threshold,
        score,
    })
}
