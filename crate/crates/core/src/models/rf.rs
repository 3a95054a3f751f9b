use super::{argmax, Prepared};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfParams {
    pub trees: usize,
    /// Candidate features per split; 0 means `floor(sqrt(d))`.
    pub max_features: usize,
    pub min_leaf: usize,
    /// Draw a bootstrap sample per tree; otherwise every tree sees all rows.
    pub bootstrap: bool,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams { trees: 100, max_features: 0, min_leaf: 1, bootstrap: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        class: usize,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A CART tree grown with Gini impurity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return class,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub params: RfParams,
    pub max_features: usize,
    pub classes: usize,
    pub trees: Vec<Tree>,
}

struct Builder<'a> {
    data: &'a Prepared,
    k: usize,
    max_features: usize,
    min_leaf: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    argmax(counts.iter().map(|&c| c as f64))
}

struct BestSplit {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn best_split_on(&self, rows: &[usize], feature: usize, total: &[usize]) -> Option<BestSplit> {
        let mut sorted: Vec<(f64, usize)> = rows.iter().map(|&r| (self.data.row(r)[feature], self.data.y[r])).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let n = sorted.len();
        let mut left = vec![0usize; self.k];
        let mut best: Option<BestSplit> = None;
        for i in 0..n - 1 {
            left[sorted[i].1] += 1;
            let nl = i + 1;
            if sorted[i].0 == sorted[i + 1].0 || nl < self.min_leaf || n - nl < self.min_leaf {
                continue;
            }
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let score = (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64;
            if best.as_ref().is_none_or(|b| score < b.score) {
                best = Some(BestSplit { score, feature, threshold: sorted[i].0 });
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>) -> usize {
        let mut counts = vec![0usize; self.k];
        for &r in &rows {
            counts[self.data.y[r]] += 1;
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { class: majority(&counts) });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || rows.len() < 2 * self.min_leaf {
            return id;
        }

        let mut features: Vec<usize> = (0..self.data.d).collect();
        features.shuffle(&mut self.rng);
        let mut best: Option<BestSplit> = None;
        for (tried, &f) in features.iter().enumerate() {
            // Keep looking past the candidate budget only while no usable
            // split has been found.
            if tried >= self.max_features && best.is_some() {
                break;
            }
            if let Some(s) = self.best_split_on(&rows, f, &counts) {
                if best.as_ref().is_none_or(|b| s.score < b.score) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else { return id };

        let (l, r): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&i| self.data.row(i)[split.feature] <= split.threshold);
        let left = self.grow(l);
        let right = self.grow(r);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        id
    }
}

fn tree_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

impl Forest {
    pub(crate) fn fit(data: &Prepared, params: &RfParams, seed: u64) -> Self {
        let max_features = if params.max_features == 0 {
            ((data.d as f64).sqrt().floor() as usize).max(1)
        } else {
            params.max_features.min(data.d)
        };
        let min_leaf = params.min_leaf.max(1);
        let build = |t: usize| {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(seed, t));
            let n = data.n();
            let rows: Vec<usize> =
                if params.bootstrap { (0..n).map(|_| rng.gen_range(0..n)).collect() } else { (0..n).collect() };
            let mut b = Builder { data, k: data.k(), max_features, min_leaf, rng, nodes: Vec::new() };
            b.grow(rows);
            Tree { nodes: b.nodes }
        };
        #[cfg(feature = "parallel")]
        let trees = (0..params.trees).into_par_iter().map(build).collect();
        #[cfg(not(feature = "parallel"))]
        let trees = (0..params.trees).map(build).collect();
        Forest { params: params.clone(), max_features, classes: data.k(), trees }
    }

    pub fn votes(&self, row: &[f64]) -> Vec<usize> {
        let mut v = vec![0usize; self.classes];
        for t in &self.trees {
            v[t.predict(row)] += 1;
        }
        v
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        majority(&self.votes(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureMatrix;
    use crate::models::prepare;
    use crate::session::Label;

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[4, 0], 4), 0.0);
        assert_eq!(gini(&[2, 2], 4), 0.5);
    }

    #[test]
    fn unbagged_tree_reaches_purity() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 * 0.77).sin(), (i as f64 * 1.3).cos()]).collect();
        let labels: Vec<Label> =
            (0..40).map(|i| if (i * 7) % 3 == 0 { Label::HandOpen } else { Label::Relax }).collect();
        let m =
            FeatureMatrix::new(vec!["a".into(), "b".into()], rows, labels, (0..40).map(f64::from).collect()).unwrap();
        let p = prepare(&m, 1).unwrap();
        let params = RfParams { trees: 1, bootstrap: false, ..RfParams::default() };
        let forest = Forest::fit(&p, &params, 3);
        for i in 0..p.n() {
            assert_eq!(forest.predict(p.row(i)), p.y[i]);
        }
        assert!(forest.trees[0].depth() >= 1);
    }
}
