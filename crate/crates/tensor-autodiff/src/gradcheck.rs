//! Central finite-difference gradient oracle. Only forward evaluation
//! is used here, so it stays independent of the tape's backward pass.

use crate::graph::{NodeId, Tape};
use crate::tensor::Tensor;

/// Builds a scalar loss from leaf nodes created for `params`.
pub type LossBuilder<'a> = &'a dyn Fn(&mut Tape, &[NodeId]) -> NodeId;

/// Compares tape gradients against central finite differences for every
/// element of every parameter. Returns the max relative error, where the
/// relative scale floors at 1e-3 so near-zero gradients are compared
/// absolutely.
pub fn max_relative_error(build: LossBuilder, params: &[Tensor], eps: f64) -> f64 {
    let analytic = {
        let mut tape = Tape::new();
        let ids: Vec<NodeId> = params.iter().map(|p| tape.leaf(p.clone())).collect();
        let loss = build(&mut tape, &ids);
        let grads = tape.backward(loss).expect("backward");
        ids.iter()
            .map(|&id| {
                grads
                    .get(id)
                    .cloned()
                    .unwrap_or_else(|| Tensor::zeros(tape.value(id).shape()))
            })
            .collect::<Vec<_>>()
    };
    let eval = |ps: &[Tensor]| -> f64 {
        let mut tape = Tape::new();
        let ids: Vec<NodeId> = ps.iter().map(|p| tape.leaf(p.clone())).collect();
        let loss = build(&mut tape, &ids);
        tape.value(loss).scalar_value()
    };
    let mut worst = 0.0f64;
    let mut work: Vec<Tensor> = params.to_vec();
    for (pi, grad) in analytic.iter().enumerate() {
        for ei in 0..grad.len() {
            let orig = work[pi].data()[ei];
            work[pi].data_mut()[ei] = orig + eps;
            let fp = eval(&work);
            work[pi].data_mut()[ei] = orig - eps;
            let fm = eval(&work);
            work[pi].data_mut()[ei] = orig;
            let fd = (fp - fm) / (2.0 * eps);
            let a = grad.data()[ei];
            let denom = a.abs().max(fd.abs()).max(1e-3);
            worst = worst.max((a - fd).abs() / denom);
        }
    }
    worst
}
