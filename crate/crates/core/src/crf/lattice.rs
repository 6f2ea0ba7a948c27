use super::Instance;

/// `log Σ exp(x)`, stable for large magnitudes. Empty input gives `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Log-domain scores of every (position, label) node and every
/// (previous label, label) edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    num_labels: usize,
    state: Vec<f64>,
    trans: Vec<f64>,
}

/// Posterior marginals of a lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginals {
    num_labels: usize,
    /// `[position × label]`
    pub state: Vec<f64>,
    /// `[edge × previous label × label]`, edge `i` joins positions `i` and `i + 1`.
    pub edges: Vec<f64>,
    pub log_partition: f64,
}

impl Marginals {
    pub fn state(&self, i: usize, y: usize) -> f64 {
        self.state[i * self.num_labels + y]
    }

    /// Marginal of labels `(prev, y)` at positions `(i - 1, i)`.
    pub fn edge(&self, i: usize, prev: usize, y: usize) -> f64 {
        let l = self.num_labels;
        self.edges[((i - 1) * l + prev) * l + y]
    }
}

impl Lattice {
    /// `state` is `[position × label]`, `trans` is `[label × label]`.
    pub fn new(num_labels: usize, state: Vec<f64>, trans: Vec<f64>) -> Self {
        assert!(num_labels > 0, "lattice needs at least one label");
        assert_eq!(state.len() % num_labels, 0);
        assert_eq!(trans.len(), num_labels * num_labels);
        Lattice {
            num_labels,
            state,
            trans,
        }
    }

    /// Scores `instance` under weights scaled by `scale`.
    pub(crate) fn from_weights(
        state_weights: &[f64],
        trans_weights: &[f64],
        scale: f64,
        num_labels: usize,
        instance: &Instance,
    ) -> Self {
        let l = num_labels;
        let mut state = vec![0.0; instance.len() * l];
        for (i, attrs) in instance.positions.iter().enumerate() {
            let row = &mut state[i * l..(i + 1) * l];
            for &(a, v) in attrs {
                let w = &state_weights[a * l..(a + 1) * l];
                for (s, wy) in row.iter_mut().zip(w) {
                    *s += v * wy;
                }
            }
            if scale != 1.0 {
                row.iter_mut().for_each(|s| *s *= scale);
            }
        }
        let trans = trans_weights.iter().map(|w| w * scale).collect();
        Lattice::new(l, state, trans)
    }

    pub fn len(&self) -> usize {
        self.state.len() / self.num_labels
    }

    pub fn is_empty(&self) -> bool {
        self.state.is_empty()
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn state(&self, i: usize, y: usize) -> f64 {
        self.state[i * self.num_labels + y]
    }

    pub fn state_mut(&mut self, i: usize, y: usize) -> &mut f64 {
        &mut self.state[i * self.num_labels + y]
    }

    pub fn trans(&self, prev: usize, y: usize) -> f64 {
        self.trans[prev * self.num_labels + y]
    }

    pub fn state_scores(&self) -> &[f64] {
        &self.state
    }

    pub fn transition_scores(&self) -> &[f64] {
        &self.trans
    }

    /// Unnormalized log score of a label path, summed left to right in the
    /// same order as [`Lattice::viterbi`], so the two agree bit for bit.
    pub fn path_score(&self, path: &[usize]) -> f64 {
        assert_eq!(path.len(), self.len());
        let Some(&first) = path.first() else {
            return 0.0;
        };
        let mut score = self.state(0, first);
        for i in 1..path.len() {
            score = score + self.trans(path[i - 1], path[i]) + self.state(i, path[i]);
        }
        score
    }

    /// Forward log scores `alpha[i][y]`: log-sum of all prefixes ending in `y` at `i`.
    fn forward(&self) -> Vec<f64> {
        let (m, l) = (self.len(), self.num_labels);
        let mut alpha = vec![0.0; m * l];
        if m == 0 {
            return alpha;
        }
        alpha[..l].copy_from_slice(&self.state[..l]);
        let mut buf = vec![0.0; l];
        for i in 1..m {
            for y in 0..l {
                for (p, b) in buf.iter_mut().enumerate() {
                    *b = alpha[(i - 1) * l + p] + self.trans(p, y);
                }
                alpha[i * l + y] = log_sum_exp(&buf) + self.state(i, y);
            }
        }
        alpha
    }

    /// Backward log scores `beta[i][y]`: log-sum of all suffixes after `y` at `i`.
    fn backward(&self) -> Vec<f64> {
        let (m, l) = (self.len(), self.num_labels);
        let mut beta = vec![0.0; m * l];
        let mut buf = vec![0.0; l];
        for i in (0..m.saturating_sub(1)).rev() {
            for y in 0..l {
                for (n, b) in buf.iter_mut().enumerate() {
                    *b = self.trans(y, n) + self.state(i + 1, n) + beta[(i + 1) * l + n];
                }
                beta[i * l + y] = log_sum_exp(&buf);
            }
        }
        beta
    }

    /// `log Z`: log of the summed exponentiated scores of all label paths.
    pub fn log_partition(&self) -> f64 {
        let m = self.len();
        if m == 0 {
            return 0.0;
        }
        let l = self.num_labels;
        log_sum_exp(&self.forward()[(m - 1) * l..])
    }

    pub fn marginals(&self) -> Marginals {
        let (m, l) = (self.len(), self.num_labels);
        let alpha = self.forward();
        let beta = self.backward();
        let log_z = if m == 0 {
            0.0
        } else {
            log_sum_exp(&alpha[(m - 1) * l..])
        };
        let state = alpha.iter().zip(&beta).map(|(a, b)| (a + b - log_z).exp()).collect();
        let mut edges = vec![0.0; m.saturating_sub(1) * l * l];
        for i in 1..m {
            for p in 0..l {
                for y in 0..l {
                    let s = alpha[(i - 1) * l + p] + self.trans(p, y) + self.state(i, y) + beta[i * l + y];
                    edges[((i - 1) * l + p) * l + y] = (s - log_z).exp();
                }
            }
        }
        Marginals {
            num_labels: l,
            state,
            edges,
            log_partition: log_z,
        }
    }

    /// Highest-scoring label path and its score. Ties go to the lowest label
    /// index, both for the final label and at every backtrace step.
    pub fn viterbi(&self) -> (Vec<usize>, f64) {
        let (m, l) = (self.len(), self.num_labels);
        if m == 0 {
            return (Vec::new(), 0.0);
        }
        let mut best = self.state[..l].to_vec();
        let mut back = vec![0usize; m * l];
        let mut next = vec![0.0; l];
        for i in 1..m {
            for (y, slot) in next.iter_mut().enumerate() {
                let mut arg = 0;
                let mut max = f64::NEG_INFINITY;
                for (p, &b) in best.iter().enumerate() {
                    let s = b + self.trans(p, y);
                    if s > max {
                        max = s;
                        arg = p;
                    }
                }
                back[i * l + y] = arg;
                *slot = max + self.state(i, y);
            }
            std::mem::swap(&mut best, &mut next);
        }
        let (mut y, mut score) = (0, f64::NEG_INFINITY);
        for (k, &s) in best.iter().enumerate() {
            if s > score {
                score = s;
                y = k;
            }
        }
        let mut path = vec![0; m];
        for i in (0..m).rev() {
            path[i] = y;
            y = back[i * l + y];
        }
        (path, score)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeros(m: usize, l: usize) -> Lattice {
        Lattice::new(l, vec![0.0; m * l], vec![0.0; l * l])
    }

    #[test]
    fn lse_basics() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert!((log_sum_exp(&[1e4, 1e4]) - (1e4 + 2f64.ln())).abs() < 1e-9);
        assert!((log_sum_exp(&[-1e4, 0.0]) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_partition() {
        assert!((zeros(1, 2).log_partition() - 2f64.ln()).abs() < 1e-15);
        assert!((zeros(2, 2).log_partition() - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn uniform_marginals() {
        let m = zeros(3, 2).marginals();
        assert!(m.state.iter().all(|&p| (p - 0.5).abs() < 1e-12));
        assert!(m.edges.iter().all(|&p| (p - 0.25).abs() < 1e-12));
    }

    #[test]
    fn saturated_marginal() {
        let mut lat = zeros(2, 3);
        *lat.state_mut(1, 2) = 1e3;
        let m = lat.marginals();
        assert!((m.state(1, 2) - 1.0).abs() < 1e-12);
        assert!(m.state(1, 0) < 1e-300);
        assert!(lat.log_partition().is_finite());
    }

    #[test]
    fn no_overflow_at_large_scores() {
        let mut lat = zeros(4, 3);
        for i in 0..4 {
            *lat.state_mut(i, i % 3) = 1e4;
            *lat.state_mut(i, (i + 1) % 3) = -1e4;
        }
        assert!(lat.log_partition().is_finite());
        assert!(lat.marginals().state.iter().all(|p| p.is_finite()));
    }

    #[test]
    fn viterbi_tie_breaks_low() {
        let (path, score) = zeros(4, 3).viterbi();
        assert_eq!(path, vec![0, 0, 0, 0]);
        assert_eq!(score, 0.0);
    }

    #[test]
    fn viterbi_dominant_path() {
        let mut lat = zeros(3, 3);
        *lat.state_mut(0, 2) = 5.0;
        *lat.state_mut(1, 1) = 5.0;
        *lat.state_mut(2, 2) = 5.0;
        let (path, score) = lat.viterbi();
        assert_eq!(path, vec![2, 1, 2]);
        assert_eq!(score, 15.0);
    }

    #[test]
    fn empty_lattice() {
        let lat = zeros(0, 2);
        assert_eq!(lat.log_partition(), 0.0);
        assert_eq!(lat.viterbi(), (vec![], 0.0));
    }
}
