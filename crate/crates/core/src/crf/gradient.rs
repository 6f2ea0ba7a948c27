use std::collections::BTreeMap;

use super::{CrfModel, Instance, Lattice};

/// Sparse gradient of one instance's log-likelihood.
///
/// `state` is keyed by the flat index `attribute * num_labels + label`;
/// `transition` is dense `[previous label × label]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Gradient {
    pub state: BTreeMap<usize, f64>,
    pub transition: Vec<f64>,
}

/// Log P(gold | instance) under `model`.
pub fn log_likelihood(model: &CrfModel, instance: &Instance, gold: &[usize]) -> f64 {
    let lattice = model.lattice(instance);
    lattice.path_score(gold) - lattice.log_partition()
}

/// Empirical minus expected feature counts for one instance; the L2 term is
/// not included.
pub fn instance_gradient(model: &CrfModel, instance: &Instance, gold: &[usize]) -> Gradient {
    let l = model.num_labels();
    let mut grad = Gradient {
        state: BTreeMap::new(),
        transition: vec![0.0; l * l],
    };
    let lattice = model.lattice(instance);
    accumulate(&lattice, instance, gold, |coord, g| match coord {
        Coord::State(k) => *grad.state.entry(k).or_insert(0.0) += g,
        Coord::Transition(k) => grad.transition[k] += g,
    });
    grad
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Coord {
    State(usize),
    Transition(usize),
}

/// Feeds every nonzero gradient contribution of `instance` to `sink`.
/// Returns the instance log-likelihood.
pub(crate) fn accumulate(
    lattice: &Lattice,
    instance: &Instance,
    gold: &[usize],
    mut sink: impl FnMut(Coord, f64),
) -> f64 {
    assert_eq!(gold.len(), instance.len(), "gold length must match the instance");
    let l = lattice.num_labels();
    let marg = lattice.marginals();
    for (i, attrs) in instance.positions.iter().enumerate() {
        for &(a, v) in attrs {
            for y in 0..l {
                let empirical = if y == gold[i] { 1.0 } else { 0.0 };
                let g = v * (empirical - marg.state(i, y));
                if g != 0.0 {
                    sink(Coord::State(a * l + y), g);
                }
            }
        }
    }
    for i in 1..instance.len() {
        for p in 0..l {
            for y in 0..l {
                let empirical = if p == gold[i - 1] && y == gold[i] { 1.0 } else { 0.0 };
                let g = empirical - marg.edge(i, p, y);
                if g != 0.0 {
                    sink(Coord::Transition(p * l + y), g);
                }
            }
        }
    }
    lattice.path_score(gold) - marg.log_partition
}
