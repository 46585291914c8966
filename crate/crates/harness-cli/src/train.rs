//! Training loop: Adam on cross-entropy with early stopping on
//! validation accuracy; the best-validation checkpoint is evaluated
//! exactly once on the untouched test split.

use serde::{Deserialize, Serialize};
use tensor_autodiff::augment::{center_crop, random_crop};
use tensor_autodiff::rng::{derive_seed, seeded};
use tensor_autodiff::{AdamConfig, AdamState, Tape, Tensor};

use crate::augment::rotate_pair_image;
use crate::config::ExperimentConfig;
use crate::models::Model;
use crate::HarnessError;
use synthetic_tasks::{make_rotation_pairs, PairSetConfig, RotationPairSet};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStats {
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub method: String,
    pub param_count: usize,
    pub epochs: Vec<EpochStats>,
    pub best_epoch: Option<usize>,
    pub best_val_accuracy: f64,
    pub test_accuracy: Option<f64>,
    pub stopped_early: bool,
    pub diverged: bool,
}

/// Wall-clock timing and other volatile facts, kept out of the
/// deterministic report so identical configs produce identical report
/// bytes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub wall_seconds: f64,
    pub epochs_run: usize,
}

pub struct TrainOutcome {
    pub report: RunReport,
    pub meta: RunMeta,
    pub model: Model,
}

struct PreparedData {
    train_full: Vec<Tensor>, // [8, render, render], crop applied per batch
    train_labels: Vec<usize>,
    val_inputs: Vec<Tensor>, // center-cropped
    val_labels: Vec<usize>,
    test_inputs: Vec<Tensor>,
    test_labels: Vec<usize>,
}

fn prepare(set: &RotationPairSet, crop: usize) -> Result<PreparedData, HarnessError> {
    let stack = |idx: &[usize]| -> Vec<Tensor> {
        idx.iter().map(|&i| set.samples[i].stacked()).collect()
    };
    let labels = |idx: &[usize]| -> Vec<usize> {
        idx.iter().map(|&i| set.samples[i].label).collect()
    };
    let center = |ts: Vec<Tensor>| -> Result<Vec<Tensor>, HarnessError> {
        ts.into_iter()
            .map(|t| center_crop(&t, (crop, crop)).map_err(HarnessError::Tensor))
            .collect()
    };
    Ok(PreparedData {
        train_full: stack(&set.train_idx),
        train_labels: labels(&set.train_idx),
        val_inputs: center(stack(&set.val_idx))?,
        val_labels: labels(&set.val_idx),
        test_inputs: center(stack(&set.test_idx))?,
        test_labels: labels(&set.test_idx),
    })
}

fn batch_tensor(inputs: &[&Tensor]) -> Tensor {
    let (c, h, w) = (
        inputs[0].shape()[0],
        inputs[0].shape()[1],
        inputs[0].shape()[2],
    );
    let mut data = Vec::with_capacity(inputs.len() * c * h * w);
    for t in inputs {
        data.extend_from_slice(t.data());
    }
    Tensor::from_vec(&[inputs.len(), c, h, w], data).unwrap()
}

/// Mean loss and accuracy of the model on pre-cropped inputs.
pub fn evaluate(
    model: &Model,
    inputs: &[Tensor],
    labels: &[usize],
    batch: usize,
) -> Result<(f64, f64), HarnessError> {
    let mut correct = 0usize;
    let mut loss_sum = 0.0f64;
    for (chunk, lchunk) in inputs.chunks(batch).zip(labels.chunks(batch)) {
        let refs: Vec<&Tensor> = chunk.iter().collect();
        let x = batch_tensor(&refs);
        let mut tape = Tape::new();
        let xi = tape.leaf(x);
        let (logits, _) = model.forward(&mut tape, xi)?;
        let loss = tape.softmax_cross_entropy(logits, lchunk)?;
        loss_sum += tape.value(loss).scalar_value() * lchunk.len() as f64;
        let lv = tape.value(logits);
        for (bi, &lab) in lchunk.iter().enumerate() {
            let row = &lv.data()[bi * 8..(bi + 1) * 8];
            let argmax = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            if argmax == lab {
                correct += 1;
            }
        }
    }
    Ok((
        loss_sum / labels.len() as f64,
        correct as f64 / labels.len() as f64,
    ))
}

/// Builds the model named by the config with the run's init stream.
pub fn build_model_for(config: &ExperimentConfig) -> Result<Model, HarnessError> {
    Model::build(config.model, derive_seed(config.seed, 0xA11CE))
}

pub fn train(config: &ExperimentConfig) -> Result<TrainOutcome, HarnessError> {
    config.validate()?;
    let t0 = std::time::Instant::now();
    let set = make_rotation_pairs(PairSetConfig {
        n_train: config.task.n_train,
        n_val: config.task.n_val,
        n_test: config.task.n_test,
        px: config.task.render_px,
        corruption: config.task.corruption,
        seed: config.data_seed(),
    })?;
    train_on(config, &set, t0)
}

/// Trains on an already generated dataset (shared across methods).
pub fn train_on(
    config: &ExperimentConfig,
    set: &RotationPairSet,
    t0: std::time::Instant,
) -> Result<TrainOutcome, HarnessError> {
    let crop = config.task.crop_px;
    let data = prepare(set, crop)?;
    let mut model = build_model_for(config)?;
    let param_count = model.param_count();
    let adam_cfg = AdamConfig {
        lr: config.optim.lr,
        ..AdamConfig::default()
    };
    let mut adam = {
        let params = model.snapshot();
        AdamState::new(&params, adam_cfg)?
    };
    let n_train = data.train_full.len();
    let batch = config.optim.batch_size;
    let mut epochs: Vec<EpochStats> = Vec::new();
    let mut best: Option<(usize, f64, Vec<Tensor>)> = None;
    let mut diverged = false;
    let mut stopped_early = false;

    'epochs: for epoch in 0..config.optim.max_epochs {
        let mut order: Vec<usize> = (0..n_train).collect();
        {
            use rand::seq::SliceRandom;
            order.shuffle(&mut seeded(derive_seed(
                config.seed,
                0xE0000 + epoch as u64,
            )));
        }
        let mut aug_rng = seeded(derive_seed(config.seed, 0xC0000 + epoch as u64));
        let mut train_loss = 0.0f64;
        let mut train_correct = 0usize;
        for chunk in order.chunks(batch) {
            let mut views: Vec<Tensor> = Vec::with_capacity(chunk.len());
            let mut labels: Vec<usize> = Vec::with_capacity(chunk.len());
            for &i in chunk {
                let full = &data.train_full[i];
                let img = if config.augment.image_transform {
                    use rand::Rng;
                    let steps = aug_rng.gen_range(0..8usize);
                    rotate_pair_image(full, steps)?
                } else {
                    full.clone()
                };
                let cropped = if config.augment.random_crop {
                    random_crop(&img, (crop, crop), &mut aug_rng)?
                } else {
                    center_crop(&img, (crop, crop))?
                };
                views.push(cropped);
                labels.push(data.train_labels[i]);
            }
            let refs: Vec<&Tensor> = views.iter().collect();
            let x = batch_tensor(&refs);
            let mut tape = Tape::new();
            let xi = tape.leaf(x);
            let (logits, param_ids) = model.forward(&mut tape, xi)?;
            let loss = tape.softmax_cross_entropy(logits, &labels)?;
            let loss_v = tape.value(loss).scalar_value();
            if !loss_v.is_finite() {
                diverged = true;
                break 'epochs;
            }
            train_loss += loss_v * labels.len() as f64;
            let lv = tape.value(logits);
            for (bi, &lab) in labels.iter().enumerate() {
                let row = &lv.data()[bi * 8..(bi + 1) * 8];
                let argmax = row
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .unwrap()
                    .0;
                if argmax == lab {
                    train_correct += 1;
                }
            }
            let mut grads = tape.backward(loss)?;
            let grad_list = model.take_gradients(&mut grads, &param_ids)?;
            let mut params = model.params_mut();
            let mut own: Vec<Tensor> = params.iter().map(|p| (**p).clone()).collect();
            match adam.step(&mut own, &grad_list) {
                Ok(()) => {
                    for (p, o) in params.iter_mut().zip(own) {
                        **p = o;
                    }
                }
                Err(tensor_autodiff::TensorError::NonFiniteGradient { .. }) => {
                    diverged = true;
                    break 'epochs;
                }
                Err(e) => return Err(HarnessError::Tensor(e)),
            }
        }
        let (val_loss, val_acc) = evaluate(&model, &data.val_inputs, &data.val_labels, batch)?;
        epochs.push(EpochStats {
            train_loss: train_loss / n_train as f64,
            train_accuracy: train_correct as f64 / n_train as f64,
            val_loss,
            val_accuracy: val_acc,
        });
        let improved = best.as_ref().map_or(true, |(_, b, _)| val_acc > *b);
        if improved {
            best = Some((epoch, val_acc, model.snapshot()));
        } else if let Some((be, _, _)) = &best {
            if epoch - be >= config.optim.patience {
                stopped_early = true;
                break;
            }
        }
    }

    let (best_epoch, best_val, test_accuracy) = match &best {
        Some((be, bv, snap)) => {
            model.restore(snap);
            let (_, test_acc) =
                evaluate(&model, &data.test_inputs, &data.test_labels, batch)?;
            (Some(*be), *bv, Some(test_acc))
        }
        None => (None, 0.0, None),
    };

    let epochs_run = epochs.len();
    Ok(TrainOutcome {
        report: RunReport {
            config: config.clone(),
            method: config.method_label(),
            param_count,
            epochs,
            best_epoch,
            best_val_accuracy: best_val,
            test_accuracy,
            stopped_early,
            diverged,
        },
        meta: RunMeta {
            wall_seconds: t0.elapsed().as_secs_f64(),
            epochs_run,
        },
        model,
    })
}
