//! Invariant pooling over the group axis of regular features.

use std::sync::Arc;

use tensor_autodiff::{CustomOp, NodeId, Tape, Tensor};

use crate::LayerError;

/// Max over the group axis: [n, c*|G|, h, w] -> [n, c, h, w]. Max is
/// permutation-invariant, so the output is exactly invariant to the
/// regular channel action.
pub fn group_pool_tensor(x: &Tensor, order: usize) -> Result<(Tensor, Vec<usize>), LayerError> {
    if x.ndim() != 4 || order == 0 || x.shape()[1] % order != 0 {
        return Err(LayerError::BadInput {
            reason: "group_pool expects [n, c*|G|, h, w]",
            got: x.shape().to_vec(),
        });
    }
    let (n, ct, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3]);
    let c = ct / order;
    let mut out = Tensor::zeros(&[n, c, h, w]);
    let mut arg = vec![0usize; n * c * h * w];
    let hw = h * w;
    for ni in 0..n {
        for cb in 0..c {
            let obase = (ni * c + cb) * hw;
            for p in 0..hw {
                let mut best = f64::NEG_INFINITY;
                let mut bi = 0usize;
                for g in 0..order {
                    let idx = ((ni * ct + cb * order + g) * hw) + p;
                    let v = x.data()[idx];
                    if v > best {
                        best = v;
                        bi = idx;
                    }
                }
                out.data_mut()[obase + p] = best;
                arg[obase + p] = bi;
            }
        }
    }
    Ok((out, arg))
}

#[derive(Debug)]
struct GroupPoolOp {
    x_shape: Vec<usize>,
    arg: Vec<usize>,
}

impl CustomOp for GroupPoolOp {
    fn backward(&self, _saved: &[Tensor], grad_out: &Tensor) -> Vec<Option<Tensor>> {
        let mut gx = Tensor::zeros(&self.x_shape);
        for (g, &src) in grad_out.data().iter().zip(self.arg.iter()) {
            gx.data_mut()[src] += g;
        }
        vec![Some(gx)]
    }
}

pub fn group_pool_tape(tape: &mut Tape, x: NodeId, order: usize) -> Result<NodeId, LayerError> {
    let (v, arg) = group_pool_tensor(tape.value(x), order)?;
    let op = Arc::new(GroupPoolOp {
        x_shape: tape.value(x).shape().to_vec(),
        arg,
    });
    Ok(tape.custom(&[x], v, vec![], op))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_over_group_is_unchanged() {
        let mut x = Tensor::zeros(&[1, 6, 2, 2]);
        for g in 0..3 {
            for p in 0..4 {
                x.data_mut()[g * 4 + p] = 1.5;
                x.data_mut()[(3 + g) * 4 + p] = -2.0;
            }
        }
        let (y, _) = group_pool_tensor(&x, 3).unwrap();
        assert!(y.data()[..4].iter().all(|&v| v == 1.5));
        assert!(y.data()[4..].iter().all(|&v| v == -2.0));
    }

    #[test]
    fn permuting_group_channels_is_a_fixed_point() {
        let x = Tensor::from_vec(
            &[1, 4, 1, 2],
            vec![0.3, -1.0, 2.0, 0.1, -0.4, 7.0, 0.0, 0.25],
        )
        .unwrap();
        let perm = Tensor::from_vec(
            &[1, 4, 1, 2],
            vec![2.0, 0.1, 0.3, -1.0, 0.0, 0.25, -0.4, 7.0],
        )
        .unwrap();
        let (a, _) = group_pool_tensor(&x, 2).unwrap();
        let (b, _) = group_pool_tensor(&perm, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn indivisible_channels_rejected() {
        let x = Tensor::zeros(&[1, 5, 2, 2]);
        assert!(group_pool_tensor(&x, 4).is_err());
    }

    #[test]
    fn gradient_routes_to_argmax_channel() {
        let x = Tensor::from_vec(&[1, 2, 1, 1], vec![1.0, 3.0]).unwrap();
        let mut tape = Tape::new();
        let xi = tape.leaf(x);
        let p = group_pool_tape(&mut tape, xi, 2).unwrap();
        let loss = tape.sum_all(p);
        let g = tape.backward(loss).unwrap();
        assert_eq!(g.get(xi).unwrap().data(), &[0.0, 1.0]);
    }
}
