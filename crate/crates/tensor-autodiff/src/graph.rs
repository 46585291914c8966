//! Tape-based reverse-mode differentiation. Nodes are appended in
//! forward order, so the reverse of insertion order is a valid
//! topological order and backward visits each node exactly once.

use std::sync::Arc;

use crate::ops;
use crate::tensor::Tensor;
use crate::TensorError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(pub(crate) usize);

/// Extension point for ops with hand-written backward passes (the
/// equivariant layers use this). `backward` returns one gradient slot
/// per parent, aligned with the `parents` list passed to `Tape::custom`.
pub trait CustomOp: std::fmt::Debug + Send + Sync {
    fn backward(&self, saved: &[Tensor], grad_out: &Tensor) -> Vec<Option<Tensor>>;
}

#[derive(Debug)]
enum OpRecord {
    Leaf,
    Relu {
        x: NodeId,
    },
    Conv2d {
        x: NodeId,
        k: NodeId,
        b: Option<NodeId>,
        stride: usize,
        pad: usize,
    },
    Linear {
        x: NodeId,
        w: NodeId,
        b: Option<NodeId>,
    },
    MaxPool {
        x: NodeId,
        arg: Vec<usize>,
    },
    FlattenBatch {
        x: NodeId,
    },
    Concat {
        xs: Vec<NodeId>,
        axis: usize,
    },
    SoftmaxCrossEntropy {
        logits: NodeId,
        labels: Vec<usize>,
        probs: Tensor,
    },
    Add {
        a: NodeId,
        b: NodeId,
    },
    Mul {
        a: NodeId,
        b: NodeId,
    },
    Scale {
        x: NodeId,
        c: f64,
    },
    SumAll {
        x: NodeId,
    },
    Custom {
        parents: Vec<NodeId>,
        saved: Vec<Tensor>,
        op: Arc<dyn CustomOp>,
    },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: OpRecord,
}

/// Gradients for every node of a tape, indexed by `NodeId`.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, id: NodeId) -> Option<&Tensor> {
        self.grads[id.0].as_ref()
    }

    pub fn take(&mut self, id: NodeId) -> Option<Tensor> {
        self.grads[id.0].take()
    }
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, value: Tensor, op: OpRecord) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    /// Inserts an input or parameter tensor.
    pub fn leaf(&mut self, value: Tensor) -> NodeId {
        self.push(value, OpRecord::Leaf)
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let v = self.value(x).map(|v| v.max(0.0));
        self.push(v, OpRecord::Relu { x })
    }

    pub fn conv2d(
        &mut self,
        x: NodeId,
        k: NodeId,
        b: Option<NodeId>,
        stride: usize,
        pad: usize,
    ) -> Result<NodeId, TensorError> {
        let v = ops::conv2d_forward(
            self.value(x),
            self.value(k),
            b.map(|b| self.value(b)),
            stride,
            pad,
        )?;
        Ok(self.push(v, OpRecord::Conv2d { x, k, b, stride, pad }))
    }

    pub fn linear(&mut self, x: NodeId, w: NodeId, b: Option<NodeId>) -> Result<NodeId, TensorError> {
        let v = ops::linear_forward(self.value(x), self.value(w), b.map(|b| self.value(b)))?;
        Ok(self.push(v, OpRecord::Linear { x, w, b }))
    }

    pub fn maxpool2d(&mut self, x: NodeId, k: usize, stride: usize) -> Result<NodeId, TensorError> {
        let (v, arg) = ops::maxpool2d_forward(self.value(x), k, stride)?;
        Ok(self.push(v, OpRecord::MaxPool { x, arg }))
    }

    /// [n, d0, d1, ...] -> [n, d0*d1*...]
    pub fn flatten_batch(&mut self, x: NodeId) -> Result<NodeId, TensorError> {
        let xv = self.value(x);
        if xv.ndim() < 2 {
            return Err(TensorError::ShapeMismatch {
                context: "flatten_batch needs rank >= 2",
                expected: vec![2],
                got: xv.shape().to_vec(),
            });
        }
        let n = xv.shape()[0];
        let rest: usize = xv.shape()[1..].iter().product();
        let v = xv.reshaped(&[n, rest])?;
        Ok(self.push(v, OpRecord::FlattenBatch { x }))
    }

    pub fn concat(&mut self, xs: &[NodeId], axis: usize) -> Result<NodeId, TensorError> {
        let parts: Vec<&Tensor> = xs.iter().map(|&id| self.value(id)).collect();
        let v = ops::concat_forward(&parts, axis)?;
        Ok(self.push(
            v,
            OpRecord::Concat {
                xs: xs.to_vec(),
                axis,
            },
        ))
    }

    pub fn softmax_cross_entropy(
        &mut self,
        logits: NodeId,
        labels: &[usize],
    ) -> Result<NodeId, TensorError> {
        let (loss, probs) = ops::softmax_cross_entropy_forward(self.value(logits), labels)?;
        Ok(self.push(
            Tensor::scalar(loss),
            OpRecord::SoftmaxCrossEntropy {
                logits,
                labels: labels.to_vec(),
                probs,
            },
        ))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TensorError> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(TensorError::ShapeMismatch {
                context: "add",
                expected: self.value(a).shape().to_vec(),
                got: self.value(b).shape().to_vec(),
            });
        }
        let mut v = self.value(a).clone();
        v.axpy(1.0, self.value(b));
        Ok(self.push(v, OpRecord::Add { a, b }))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, TensorError> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(TensorError::ShapeMismatch {
                context: "mul",
                expected: self.value(a).shape().to_vec(),
                got: self.value(b).shape().to_vec(),
            });
        }
        let data = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| x * y)
            .collect();
        let v = Tensor::from_vec(self.value(a).shape(), data).unwrap();
        Ok(self.push(v, OpRecord::Mul { a, b }))
    }

    pub fn scale(&mut self, x: NodeId, c: f64) -> NodeId {
        let v = self.value(x).map(|v| v * c);
        self.push(v, OpRecord::Scale { x, c })
    }

    pub fn sum_all(&mut self, x: NodeId) -> NodeId {
        let s: f64 = self.value(x).data().iter().sum();
        self.push(Tensor::scalar(s), OpRecord::SumAll { x })
    }

    /// Records a node whose backward pass is implemented by `op`.
    pub fn custom(
        &mut self,
        parents: &[NodeId],
        value: Tensor,
        saved: Vec<Tensor>,
        op: Arc<dyn CustomOp>,
    ) -> NodeId {
        self.push(
            value,
            OpRecord::Custom {
                parents: parents.to_vec(),
                saved,
                op,
            },
        )
    }

    /// Reverse pass from a scalar loss node.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients, TensorError> {
        if !self.value(loss).is_scalar() {
            return Err(TensorError::NonScalarLoss {
                shape: self.value(loss).shape().to_vec(),
            });
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::scalar(1.0));
        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else {
                continue;
            };
            self.propagate(idx, &g, &mut grads)?;
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn accumulate(grads: &mut [Option<Tensor>], id: NodeId, g: Tensor) {
        match &mut grads[id.0] {
            Some(acc) => acc.axpy(1.0, &g),
            slot @ None => *slot = Some(g),
        }
    }

    fn propagate(
        &self,
        idx: usize,
        g: &Tensor,
        grads: &mut Vec<Option<Tensor>>,
    ) -> Result<(), TensorError> {
        match &self.nodes[idx].op {
            OpRecord::Leaf => {}
            OpRecord::Relu { x } => {
                let xv = self.value(*x);
                let data = xv
                    .data()
                    .iter()
                    .zip(g.data())
                    .map(|(&xi, &gi)| if xi > 0.0 { gi } else { 0.0 })
                    .collect();
                Self::accumulate(grads, *x, Tensor::from_vec(xv.shape(), data).unwrap());
            }
            OpRecord::Conv2d { x, k, b, stride, pad } => {
                let (gx, gk, gb) = ops::conv2d_backward(
                    self.value(*x),
                    self.value(*k),
                    g,
                    *stride,
                    *pad,
                    b.is_some(),
                )?;
                Self::accumulate(grads, *x, gx);
                Self::accumulate(grads, *k, gk);
                if let (Some(bid), Some(gb)) = (b, gb) {
                    Self::accumulate(grads, *bid, gb);
                }
            }
            OpRecord::Linear { x, w, b } => {
                let (gx, gw, gb) =
                    ops::linear_backward(self.value(*x), self.value(*w), g, b.is_some());
                Self::accumulate(grads, *x, gx);
                Self::accumulate(grads, *w, gw);
                if let (Some(bid), Some(gb)) = (b, gb) {
                    Self::accumulate(grads, *bid, gb);
                }
            }
            OpRecord::MaxPool { x, arg } => {
                let gx = ops::maxpool2d_backward(self.value(*x).shape(), arg, g);
                Self::accumulate(grads, *x, gx);
            }
            OpRecord::FlattenBatch { x } => {
                let gx = g.reshaped(self.value(*x).shape())?;
                Self::accumulate(grads, *x, gx);
            }
            OpRecord::Concat { xs, axis } => {
                let shapes: Vec<&[usize]> = xs.iter().map(|&id| self.value(id).shape()).collect();
                let parts = ops::concat_backward(&shapes, *axis, g);
                for (id, part) in xs.iter().zip(parts) {
                    Self::accumulate(grads, *id, part);
                }
            }
            OpRecord::SoftmaxCrossEntropy {
                logits,
                labels,
                probs,
            } => {
                let gl = ops::softmax_cross_entropy_backward(probs, labels, g.scalar_value());
                Self::accumulate(grads, *logits, gl);
            }
            OpRecord::Add { a, b } => {
                Self::accumulate(grads, *a, g.clone());
                Self::accumulate(grads, *b, g.clone());
            }
            OpRecord::Mul { a, b } => {
                let av = self.value(*a);
                let bv = self.value(*b);
                let ga: Vec<f64> = g
                    .data()
                    .iter()
                    .zip(bv.data())
                    .map(|(gi, bi)| gi * bi)
                    .collect();
                let gb: Vec<f64> = g
                    .data()
                    .iter()
                    .zip(av.data())
                    .map(|(gi, ai)| gi * ai)
                    .collect();
                Self::accumulate(grads, *a, Tensor::from_vec(av.shape(), ga).unwrap());
                Self::accumulate(grads, *b, Tensor::from_vec(bv.shape(), gb).unwrap());
            }
            OpRecord::Scale { x, c } => {
                Self::accumulate(grads, *x, g.map(|v| v * c));
            }
            OpRecord::SumAll { x } => {
                let xv = self.value(*x);
                Self::accumulate(grads, *x, Tensor::filled(xv.shape(), g.scalar_value()));
            }
            OpRecord::Custom { parents, saved, op } => {
                let parent_grads = op.backward(saved, g);
                debug_assert_eq!(parent_grads.len(), parents.len());
                for (pid, pg) in parents.iter().zip(parent_grads) {
                    if let Some(pg) = pg {
                        Self::accumulate(grads, *pid, pg);
                    }
                }
            }
        }
        Ok(())
    }
}
