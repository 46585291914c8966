//! Mixed-representation actor head and invariant critic over a vector
//! of regular features (spatial dimensions already collapsed).
//!
//! These are property-checked architectural pieces: equivariance and
//! invariance must hold for arbitrary weights, so every reduction here
//! is either indexed canonically (the group-algebra maps) or runs
//! through `stable_sum`, which is bit-stable under permutation of its
//! terms.

use group_core::{rep_matrix, Group, GroupElement, RepKind, RepMatrix};
use tensor_autodiff::{rng::uniform_vec, stable_sum, Prng, Tensor};

use crate::LayerError;

/// Policy output: a 2-vector transforming under the standard 2D
/// representation plus invariant action components and standard
/// deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedActionValue {
    pub a_equiv: [f64; 2],
    pub a_inv: Vec<f64>,
    pub a_sigma: Vec<f64>,
}

impl MixedActionValue {
    /// The group action: only the equivariant 2-vector transforms.
    pub fn transformed(&self, group: &Group, g: GroupElement) -> MixedActionValue {
        let m = rep_matrix(group, RepKind::Standard2d, g);
        let v = m.apply(&self.a_equiv);
        MixedActionValue {
            a_equiv: [v[0], v[1]],
            a_inv: self.a_inv.clone(),
            a_sigma: self.a_sigma.clone(),
        }
    }

    pub fn max_abs_diff(&self, other: &MixedActionValue) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            worst = worst.max((self.a_equiv[i] - other.a_equiv[i]).abs());
        }
        for (a, b) in self.a_inv.iter().zip(&other.a_inv) {
            worst = worst.max((a - b).abs());
        }
        for (a, b) in self.a_sigma.iter().zip(&other.a_sigma) {
            worst = worst.max((a - b).abs());
        }
        worst
    }
}

/// Actor head mapping regular features [c_in * |G|] to a
/// MixedActionValue. The equivariant output uses the intertwiner basis
/// A[:, (c, h)] = rho_2d(h) v_c; invariant outputs read the
/// group-summed features. Biases attach only to invariant components.
#[derive(Debug, Clone)]
pub struct ActorHead {
    pub group: Group,
    pub c_in: usize,
    /// [c_in, 2] free parameters of the equivariant output.
    pub w_equiv: Tensor,
    /// [n_inv, c_in]
    pub w_inv: Tensor,
    pub b_inv: Tensor,
    /// [n_sigma, c_in]
    pub w_sigma: Tensor,
    pub b_sigma: Tensor,
    rho2d: Vec<RepMatrix>,
}

impl ActorHead {
    pub fn init(
        group: Group,
        c_in: usize,
        n_inv: usize,
        n_sigma: usize,
        rng: &mut Prng,
    ) -> Self {
        let scale = (1.0 / (c_in * group.order()) as f64).sqrt();
        let mk = |r: usize, c: usize, rng: &mut Prng| {
            Tensor::from_vec(
                &[r, c],
                uniform_vec(rng, r * c, -scale, scale),
            )
            .unwrap()
        };
        let rho2d = group
            .elements()
            .iter()
            .map(|g| rep_matrix(&group, RepKind::Standard2d, *g))
            .collect();
        ActorHead {
            c_in,
            w_equiv: mk(c_in, 2, rng),
            w_inv: mk(n_inv, c_in, rng),
            b_inv: mk(n_inv, 1, rng).reshaped(&[n_inv]).unwrap(),
            w_sigma: mk(n_sigma, c_in, rng),
            b_sigma: mk(n_sigma, 1, rng).reshaped(&[n_sigma]).unwrap(),
            group,
            rho2d,
        }
    }

    /// state: regular features of length c_in * |G|, slot index c*|G|+g.
    pub fn forward(&self, state: &[f64]) -> Result<MixedActionValue, LayerError> {
        let order = self.group.order();
        if state.len() != self.c_in * order {
            return Err(LayerError::BadInput {
                reason: "actor head input length mismatch",
                got: vec![state.len()],
            });
        }
        let mut tx = Vec::with_capacity(self.c_in * order);
        let mut ty = Vec::with_capacity(self.c_in * order);
        for c in 0..self.c_in {
            let v = [self.w_equiv.at2(c, 0), self.w_equiv.at2(c, 1)];
            for h in 0..order {
                let rv = self.rho2d[h].apply(&v);
                let f = state[c * order + h];
                tx.push(rv[0] * f);
                ty.push(rv[1] * f);
            }
        }
        let a_equiv = [stable_sum(&mut tx), stable_sum(&mut ty)];
        // group-summed invariant content per channel
        let pooled: Vec<f64> = (0..self.c_in)
            .map(|c| {
                let mut vals: Vec<f64> = state[c * order..(c + 1) * order].to_vec();
                stable_sum(&mut vals)
            })
            .collect();
        let readout = |w: &Tensor, b: &Tensor| -> Vec<f64> {
            (0..w.shape()[0])
                .map(|i| {
                    let mut acc = b.data()[i];
                    for c in 0..self.c_in {
                        acc += w.at2(i, c) * pooled[c];
                    }
                    acc
                })
                .collect()
        };
        Ok(MixedActionValue {
            a_equiv,
            a_inv: readout(&self.w_inv, &self.b_inv),
            a_sigma: readout(&self.w_sigma, &self.b_sigma),
        })
    }
}

/// Permutes a regular feature vector by the left-translation action:
/// out[c*|G| + j] = state[c*|G| + g^-1 j].
pub fn act_on_regular_vector(group: &Group, g: GroupElement, state: &[f64]) -> Vec<f64> {
    let order = group.order();
    debug_assert_eq!(state.len() % order, 0);
    let ginv = group.inverse(g);
    let c = state.len() / order;
    let mut out = vec![0.0; state.len()];
    for cb in 0..c {
        for j in 0..order {
            out[cb * order + j] = state[cb * order + group.compose_idx(ginv.index, j)];
        }
    }
    out
}

/// Max residual of pi(g s) vs g pi(s) over the whole group.
pub fn check_actor_equivariance(head: &ActorHead, state: &[f64]) -> Result<f64, LayerError> {
    let base = head.forward(state)?;
    let mut worst = 0.0f64;
    for g in head.group.elements() {
        let lhs = head.forward(&act_on_regular_vector(&head.group, *g, state))?;
        let rhs = base.transformed(&head.group, *g);
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    Ok(worst)
}

/// Group-algebra linear map between regular feature vectors:
/// out[(c', g')] = sum_{c, h} w[c', c, h] * x[(c, g' h)].
/// The canonical (c, h) iteration order makes the map bit-exactly
/// equivariant under the regular permutation action.
pub fn group_algebra_apply(group: &Group, w: &Tensor, x: &[f64]) -> Vec<f64> {
    let order = group.order();
    let (c_out, c_in) = (w.shape()[0], w.shape()[1]);
    debug_assert_eq!(w.shape()[2], order);
    debug_assert_eq!(x.len(), c_in * order);
    let mut out = vec![0.0; c_out * order];
    for co in 0..c_out {
        for gp in 0..order {
            let mut acc = 0.0;
            for c in 0..c_in {
                for h in 0..order {
                    let wv = w.data()[(co * c_in + c) * order + h];
                    acc += wv * x[c * order + group.compose_idx(gp, h)];
                }
            }
            out[co * order + gp] = acc;
        }
    }
    out
}

/// Invariant critic q(s, a). The state passes through a group-algebra
/// map and a pointwise nonlinearity; the action embeds into regular
/// features through representation-typed linear maps and stays linear
/// up to the invariant reduction, so at zero state the group sum
/// cancels every non-invariant action component analytically. Both
/// paths reduce with stable sums.
#[derive(Debug, Clone)]
pub struct InvariantCritic {
    pub group: Group,
    pub c_state: usize,
    pub c_mix: usize,
    /// [c_mix, 2]: embeds a_equiv via B[h, :] = u rho_2d(h^-1).
    pub w_embed_equiv: Tensor,
    /// [c_mix, n_inv] and [c_mix, n_sigma]: broadcast embeddings.
    pub w_embed_inv: Tensor,
    pub w_embed_sigma: Tensor,
    /// [c_mix, c_state, |G|] group-algebra map on state features.
    pub w_state: Tensor,
    /// [c_mix] readout of the state trunk.
    pub w_read: Tensor,
    /// [c_mix] readout of the action embedding.
    pub w_read_action: Tensor,
    pub b_read: f64,
    rho2d_inv: Vec<RepMatrix>,
}

impl InvariantCritic {
    pub fn init(
        group: Group,
        c_state: usize,
        c_mix: usize,
        n_inv: usize,
        n_sigma: usize,
        rng: &mut Prng,
    ) -> Self {
        let order = group.order();
        let scale = (1.0 / (c_state * order) as f64).sqrt();
        let mk = |shape: &[usize], rng: &mut Prng| {
            let n: usize = shape.iter().product();
            Tensor::from_vec(shape, uniform_vec(rng, n, -scale, scale)).unwrap()
        };
        let rho2d_inv = group
            .elements()
            .iter()
            .map(|g| rep_matrix(&group, RepKind::Standard2d, group.inverse(*g)))
            .collect();
        InvariantCritic {
            c_state,
            c_mix,
            w_embed_equiv: mk(&[c_mix, 2], rng),
            w_embed_inv: mk(&[c_mix, n_inv], rng),
            w_embed_sigma: mk(&[c_mix, n_sigma], rng),
            w_state: mk(&[c_mix, c_state, order], rng),
            w_read: mk(&[c_mix], rng),
            w_read_action: mk(&[c_mix], rng),
            b_read: 0.1,
            group,
            rho2d_inv,
        }
    }

    pub fn forward(&self, state: &[f64], action: &MixedActionValue) -> Result<f64, LayerError> {
        let order = self.group.order();
        if state.len() != self.c_state * order {
            return Err(LayerError::BadInput {
                reason: "critic state length mismatch",
                got: vec![state.len()],
            });
        }
        let mixed_state = group_algebra_apply(&self.group, &self.w_state, state);
        let mut state_terms = Vec::with_capacity(self.c_mix * order);
        for cm in 0..self.c_mix {
            for gp in 0..order {
                let z = mixed_state[cm * order + gp];
                state_terms.push(self.w_read.data()[cm] * z.max(0.0));
            }
        }
        let mut action_terms = Vec::with_capacity(self.c_mix * order);
        for cm in 0..self.c_mix {
            let u = [self.w_embed_equiv.at2(cm, 0), self.w_embed_equiv.at2(cm, 1)];
            let mut invariant = 0.0;
            for (i, v) in action.a_inv.iter().enumerate() {
                invariant += self.w_embed_inv.at2(cm, i) * v;
            }
            for (i, v) in action.a_sigma.iter().enumerate() {
                invariant += self.w_embed_sigma.at2(cm, i) * v;
            }
            let wr = self.w_read_action.data()[cm];
            for h in 0..order {
                let rv = self.rho2d_inv[h].apply(&action.a_equiv);
                let embed = u[0] * rv[0] + u[1] * rv[1] + invariant;
                action_terms.push(wr * embed);
            }
        }
        Ok(self.b_read + stable_sum(&mut state_terms) + stable_sum(&mut action_terms))
    }
}

/// Max residual of q(g s, g a) vs q(s, a) over the whole group.
pub fn check_critic_invariance(
    critic: &InvariantCritic,
    state: &[f64],
    action: &MixedActionValue,
) -> Result<f64, LayerError> {
    let base = critic.forward(state, action)?;
    let mut worst = 0.0f64;
    for g in critic.group.elements() {
        let gs = act_on_regular_vector(&critic.group, *g, state);
        let ga = action.transformed(&critic.group, *g);
        worst = worst.max((critic.forward(&gs, &ga)? - base).abs());
    }
    Ok(worst)
}
