//! The two classifier architectures. Both follow the same macro
//! structure (conv k5, pool, conv k3, pool, conv k3, conv k3 down to
//! 1x1, readout) so the comparison isolates the symmetry constraint.
//! Plain widths are chosen automatically to match the equivariant
//! model's free parameter count within 10%.

use group_core::{make_group, Group, GroupKind};
use equivariant_layers::{group_pool_tape, EquivConvLayer, LayerRep};
use tensor_autodiff::rng::{seeded, uniform_vec};
use tensor_autodiff::{Gradients, NodeId, Tape, Tensor};

use crate::config::ModelConfig;
use crate::HarnessError;

pub const INPUT_CHANNELS: usize = 8;
pub const NUM_CLASSES: usize = 8;
/// Spatial trace for crop 31: 31 -conv5-> 27 -pool-> 13 -conv3-> 11
/// -pool-> 5 -conv3-> 3 -conv3-> 1. Every stage stays odd.
pub const CROP_PX: usize = 31;

pub struct EquiModel {
    pub group: Group,
    pub lift: EquivConvLayer,
    pub conv2: EquivConvLayer,
    pub conv3: EquivConvLayer,
    pub conv4: EquivConvLayer,
    pub head_w: Tensor,
    pub head_b: Tensor,
}

pub struct PlainModel {
    pub convs: Vec<(Tensor, Tensor)>, // (kernel [co,ci,k,k], bias [co])
    pub head_w: Tensor,
    pub head_b: Tensor,
}

pub enum Model {
    Equi(EquiModel),
    Plain(PlainModel),
}

fn linear_init(rows: usize, cols: usize, rng: &mut tensor_autodiff::Prng) -> Tensor {
    let scale = (1.0 / cols as f64).sqrt();
    Tensor::from_vec(&[rows, cols], uniform_vec(rng, rows * cols, -scale, scale)).unwrap()
}

impl Model {
    pub fn build(config: ModelConfig, init_seed: u64) -> Result<Model, HarnessError> {
        let mut rng = seeded(init_seed);
        match config {
            ModelConfig::Equivariant { width } => {
                let group = make_group(GroupKind::Cyclic, 8).map_err(|e| {
                    HarnessError::Config {
                        reason: format!("group: {e}"),
                    }
                })?;
                let lift = EquivConvLayer::init(
                    group.clone(),
                    LayerRep::Trivial,
                    INPUT_CHANNELS,
                    width,
                    5,
                    &mut rng,
                )?;
                let conv2 =
                    EquivConvLayer::init(group.clone(), LayerRep::Regular, width, width, 3, &mut rng)?;
                let conv3 =
                    EquivConvLayer::init(group.clone(), LayerRep::Regular, width, width, 3, &mut rng)?;
                let conv4 =
                    EquivConvLayer::init(group.clone(), LayerRep::Regular, width, width, 3, &mut rng)?;
                let head_w = linear_init(NUM_CLASSES, width, &mut rng);
                let head_b = Tensor::zeros(&[NUM_CLASSES]);
                Ok(Model::Equi(EquiModel {
                    group,
                    lift,
                    conv2,
                    conv3,
                    conv4,
                    head_w,
                    head_b,
                }))
            }
            ModelConfig::PlainMatched { equi_width } => {
                let equi = Model::build(
                    ModelConfig::Equivariant { width: equi_width },
                    init_seed,
                )?;
                let widths = matching_plain_widths(equi.param_count());
                Model::build(ModelConfig::Plain { widths }, init_seed)
            }
            ModelConfig::Plain { widths } => {
                let mut convs = Vec::new();
                let mut c_in = INPUT_CHANNELS;
                for (i, &c_out) in widths.iter().enumerate() {
                    let k = if i == 0 { 5 } else { 3 };
                    let fan_in = (c_in * k * k) as f64;
                    let scale = (2.0 / fan_in).sqrt() * 1.7320508075688772;
                    let kern = Tensor::from_vec(
                        &[c_out, c_in, k, k],
                        uniform_vec(&mut rng, c_out * c_in * k * k, -scale, scale),
                    )
                    .unwrap();
                    convs.push((kern, Tensor::zeros(&[c_out])));
                    c_in = c_out;
                }
                let head_w = linear_init(NUM_CLASSES, c_in, &mut rng);
                let head_b = Tensor::zeros(&[NUM_CLASSES]);
                Ok(Model::Plain(PlainModel {
                    convs,
                    head_w,
                    head_b,
                }))
            }
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Model::Equi(m) => {
                m.lift.param_count()
                    + m.conv2.param_count()
                    + m.conv3.param_count()
                    + m.conv4.param_count()
                    + m.head_w.len()
                    + m.head_b.len()
            }
            Model::Plain(m) => {
                m.convs
                    .iter()
                    .map(|(k, b)| k.len() + b.len())
                    .sum::<usize>()
                    + m.head_w.len()
                    + m.head_b.len()
            }
        }
    }

    /// Records the forward pass; returns logits and the parameter leaf
    /// ids in the same order as `params_mut`.
    pub fn forward(
        &self,
        tape: &mut Tape,
        x: NodeId,
    ) -> Result<(NodeId, Vec<NodeId>), HarnessError> {
        match self {
            Model::Equi(m) => {
                let order = m.group.order();
                let mut ids = Vec::new();
                let (h1, w1, b1) = m.lift.forward_tape(tape, x)?;
                ids.extend([w1, b1]);
                let r1 = tape.relu(h1);
                let p1 = tape.maxpool2d(r1, 3, 2)?;
                let (h2, w2, b2) = m.conv2.forward_tape(tape, p1)?;
                ids.extend([w2, b2]);
                let r2 = tape.relu(h2);
                let p2 = tape.maxpool2d(r2, 3, 2)?;
                let (h3, w3, b3) = m.conv3.forward_tape(tape, p2)?;
                ids.extend([w3, b3]);
                let r3 = tape.relu(h3);
                let (h4, w4, b4) = m.conv4.forward_tape(tape, r3)?;
                ids.extend([w4, b4]);
                let r4 = tape.relu(h4);
                let pooled = group_pool_tape(tape, r4, order)?;
                let flat = tape.flatten_batch(pooled)?;
                let hw = tape.leaf(m.head_w.clone());
                let hb = tape.leaf(m.head_b.clone());
                let logits = tape.linear(flat, hw, Some(hb))?;
                ids.extend([hw, hb]);
                Ok((logits, ids))
            }
            Model::Plain(m) => {
                let mut ids = Vec::new();
                let mut cur = x;
                for (i, (kern, bias)) in m.convs.iter().enumerate() {
                    let ki = tape.leaf(kern.clone());
                    let bi = tape.leaf(bias.clone());
                    let conv = tape.conv2d(cur, ki, Some(bi), 1, 0)?;
                    ids.extend([ki, bi]);
                    let r = tape.relu(conv);
                    cur = if i < 2 { tape.maxpool2d(r, 3, 2)? } else { r };
                }
                let flat = tape.flatten_batch(cur)?;
                let hw = tape.leaf(m.head_w.clone());
                let hb = tape.leaf(m.head_b.clone());
                let logits = tape.linear(flat, hw, Some(hb))?;
                ids.extend([hw, hb]);
                Ok((logits, ids))
            }
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Model::Equi(m) => vec![
                &mut m.lift.canonical,
                &mut m.lift.bias,
                &mut m.conv2.canonical,
                &mut m.conv2.bias,
                &mut m.conv3.canonical,
                &mut m.conv3.bias,
                &mut m.conv4.canonical,
                &mut m.conv4.bias,
                &mut m.head_w,
                &mut m.head_b,
            ],
            Model::Plain(m) => {
                let mut out: Vec<&mut Tensor> = Vec::new();
                for (k, b) in m.convs.iter_mut() {
                    out.push(k);
                    out.push(b);
                }
                out.push(&mut m.head_w);
                out.push(&mut m.head_b);
                out
            }
        }
    }

    pub fn snapshot(&mut self) -> Vec<Tensor> {
        self.params_mut().iter().map(|t| (**t).clone()).collect()
    }

    pub fn restore(&mut self, snap: &[Tensor]) {
        for (p, s) in self.params_mut().into_iter().zip(snap) {
            *p = s.clone();
        }
    }

    pub fn take_gradients(
        &self,
        grads: &mut Gradients,
        ids: &[NodeId],
    ) -> Result<Vec<Tensor>, HarnessError> {
        ids.iter()
            .map(|&id| {
                grads.take(id).ok_or_else(|| HarnessError::Train {
                    reason: "missing parameter gradient".into(),
                })
            })
            .collect()
    }

    /// Named parameters for serialization.
    pub fn named_params(&mut self) -> Vec<(String, Tensor)> {
        let names: Vec<String> = match self {
            Model::Equi(_) => [
                "lift.w", "lift.b", "conv2.w", "conv2.b", "conv3.w", "conv3.b", "conv4.w",
                "conv4.b", "head.w", "head.b",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            Model::Plain(m) => {
                let mut names = Vec::new();
                for i in 0..m.convs.len() {
                    names.push(format!("conv{}.w", i + 1));
                    names.push(format!("conv{}.b", i + 1));
                }
                names.push("head.w".to_string());
                names.push("head.b".to_string());
                names
            }
        };
        names
            .into_iter()
            .zip(self.params_mut().into_iter().map(|t| t.clone()))
            .collect()
    }

    /// Self-describing metadata for the model manifest.
    pub fn manifest_metadata(&self, config: &ModelConfig) -> serde_json::Value {
        match (self, config) {
            (Model::Equi(m), _) => serde_json::json!({
                "architecture": "equivariant-c8",
                "group": {"kind": "cyclic", "n": m.group.n()},
                "layers": [
                    {"name": "lift", "rep": "trivial->regular", "k": 5},
                    {"name": "conv2", "rep": "regular->regular", "k": 3},
                    {"name": "conv3", "rep": "regular->regular", "k": 3},
                    {"name": "conv4", "rep": "regular->regular", "k": 3},
                    {"name": "head", "rep": "invariant-linear"},
                ],
            }),
            (Model::Plain(_), _) => serde_json::json!({
                "architecture": "plain-cnn",
                "layers": ["conv5", "conv3", "conv3", "conv3", "linear"],
            }),
        }
    }
}

/// Closed-form parameter count of the plain CNN with first-block width
/// `a` and later widths `b`.
fn plain_param_count(a: usize, b: usize) -> usize {
    let conv1 = 25 * INPUT_CHANNELS * a + a;
    let conv2 = 9 * a * b + b;
    let conv34 = 2 * (9 * b * b + b);
    let head = NUM_CLASSES * b + NUM_CLASSES;
    conv1 + conv2 + conv34 + head
}

/// Picks plain widths [a, b, b, b] whose parameter count is closest to
/// the target.
pub fn matching_plain_widths(target_params: usize) -> [usize; 4] {
    let mut best = (usize::MAX, [1usize; 4]);
    for a in 1..=64 {
        for b in 1..=64 {
            let diff = plain_param_count(a, b).abs_diff(target_params);
            if diff < best.0 {
                best = (diff, [a, b, b, b]);
            }
        }
    }
    best.1
}

/// Relative parameter-count gap between two models.
pub fn parity_gap(a: usize, b: usize) -> f64 {
    (a as f64 - b as f64).abs() / (b as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equi_and_matched_plain_are_within_ten_percent() {
        for width in [2usize, 3, 4] {
            let equi = Model::build(ModelConfig::Equivariant { width }, 0).unwrap();
            let plain =
                Model::build(ModelConfig::PlainMatched { equi_width: width }, 0).unwrap();
            let gap = parity_gap(equi.param_count(), plain.param_count());
            assert!(
                gap < 0.10,
                "width {width}: equi {} vs plain {} (gap {gap:.3})",
                equi.param_count(),
                plain.param_count()
            );
        }
    }

    #[test]
    fn forward_shapes_reach_eight_logits() {
        for cfg in [
            ModelConfig::Equivariant { width: 2 },
            ModelConfig::Plain {
                widths: [4, 4, 4, 4],
            },
        ] {
            let model = Model::build(cfg, 1).unwrap();
            let mut tape = Tape::new();
            let x = tape.leaf(Tensor::zeros(&[2, INPUT_CHANNELS, CROP_PX, CROP_PX]));
            let (logits, _) = model.forward(&mut tape, x).unwrap();
            assert_eq!(tape.value(logits).shape(), &[2, NUM_CLASSES]);
        }
    }

    #[test]
    fn equi_model_logits_are_invariant_to_quarter_turn_co_rotation() {
        // The quarter-turn slots are exact; the 45-degree slots are
        // resampled, and their values enter the group max, so the model
        // is invariant to rounding (comfortably inside any decision
        // margin) rather than bit-exact. Argmax must never move.
        let model = Model::build(ModelConfig::Equivariant { width: 2 }, 3).unwrap();
        let group = make_group(GroupKind::Cyclic, 8).unwrap();
        let x = Tensor::from_vec(
            &[1, INPUT_CHANNELS, CROP_PX, CROP_PX],
            uniform_vec(&mut seeded(9), INPUT_CHANNELS * CROP_PX * CROP_PX, 0.0, 1.0),
        )
        .unwrap();
        let run = |inp: &Tensor| {
            let mut tape = Tape::new();
            let xi = tape.leaf(inp.clone());
            let (logits, _) = model.forward(&mut tape, xi).unwrap();
            tape.value(logits).data().to_vec()
        };
        let base = run(&x);
        let argmax = |v: &[f64]| {
            v.iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0
        };
        for steps in [2usize, 4, 6] {
            let rotated = equivariant_layers::act_on_image_batch(
                &group,
                group.element(steps),
                &x,
                group_core::ResampleMode::Exact,
            )
            .unwrap();
            let got = run(&rotated);
            let worst = got
                .iter()
                .zip(&base)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(worst <= 1e-12, "steps {steps}: logit deviation {worst}");
            assert_eq!(argmax(&got), argmax(&base), "steps {steps}");
        }
    }
}
