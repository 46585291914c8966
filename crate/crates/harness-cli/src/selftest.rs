//! Runtime property suites: the same checks the test suite runs, made
//! available to the CLI (and reused by the acceptance tests with their
//! own counts).

use equivariant_layers::{
    act_on_features, act_on_image_batch, action_restrict_flatten, check_actor_equivariance,
    check_critic_invariance, group_pool_tensor, kernel_constraint_residual,
    restricted_axis_permutation, ActorHead, EquivConvLayer, InvariantCritic, LayerRep,
    MixedActionValue,
};
use group_core::{
    make_group, validate_representation, GroupKind, RepKind, Representation, ResampleMode,
};
use num_traits::ToPrimitive;
use symmetry_diagnostics::{best_invariant_accuracy, golden, loose_bound, random_instance, tight_bound};
use tensor_autodiff::rng::{seeded, uniform_vec};
use tensor_autodiff::{Tape, Tensor};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn ok(name: &str, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: true,
            detail,
        }
    }

    fn fail(name: &str, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: false,
            detail,
        }
    }
}

pub fn check_group_axioms() -> CheckResult {
    for (kind, n) in [
        (GroupKind::Cyclic, 1),
        (GroupKind::Cyclic, 4),
        (GroupKind::Cyclic, 8),
        (GroupKind::Dihedral, 1),
        (GroupKind::Dihedral, 4),
    ] {
        let g = match make_group(kind, n) {
            Ok(g) => g,
            Err(e) => return CheckResult::fail("group-axioms", format!("{kind:?}{n}: {e}")),
        };
        for rk in [RepKind::Trivial, RepKind::Signed, RepKind::Standard2d, RepKind::Regular] {
            if let Err(e) = validate_representation(&Representation::new(g.clone(), rk), 1e-12) {
                return CheckResult::fail("group-axioms", format!("{kind:?}{n} {rk:?}: {e}"));
            }
        }
    }
    CheckResult::ok("group-axioms", "cyclic/dihedral tables and representations valid".into())
}

/// Analytic gradients vs central finite differences across the op set.
pub fn check_gradients(n_tensors: usize) -> CheckResult {
    let mut worst = 0.0f64;
    for i in 0..n_tensors as u64 {
        let rand_t = |seed: u64, shape: &[usize]| -> Tensor {
            let n = shape.iter().product();
            let data = uniform_vec(&mut seeded(seed), n, -1.0, 1.0)
                .into_iter()
                .map(|v| v + 0.3 * v.signum())
                .collect();
            Tensor::from_vec(shape, data).unwrap()
        };
        let err = match i % 5 {
            0 => {
                let x = rand_t(i * 7 + 1, &[1, 2, 6, 6]);
                let k = rand_t(i * 7 + 2, &[3, 2, 3, 3]);
                let b = rand_t(i * 7 + 3, &[3]);
                tensor_autodiff::gradcheck::max_relative_error(
                    &|t: &mut Tape, ids| {
                        let y = t.conv2d(ids[0], ids[1], Some(ids[2]), 1, 0).unwrap();
                        t.sum_all(y)
                    },
                    &[x, k, b],
                    1e-5,
                )
            }
            1 => {
                let x = rand_t(i * 7 + 1, &[3, 6]);
                let w = rand_t(i * 7 + 2, &[4, 6]);
                let b = rand_t(i * 7 + 3, &[4]);
                tensor_autodiff::gradcheck::max_relative_error(
                    &|t: &mut Tape, ids| {
                        let y = t.linear(ids[0], ids[1], Some(ids[2])).unwrap();
                        let r = t.relu(y);
                        t.sum_all(r)
                    },
                    &[x, w, b],
                    1e-5,
                )
            }
            2 => {
                let x = rand_t(i * 7 + 1, &[1, 2, 7, 7]);
                tensor_autodiff::gradcheck::max_relative_error(
                    &|t: &mut Tape, ids| {
                        let r = t.relu(ids[0]);
                        let p = t.maxpool2d(r, 3, 2).unwrap();
                        let f = t.flatten_batch(p).unwrap();
                        t.sum_all(f)
                    },
                    &[x],
                    1e-5,
                )
            }
            3 => {
                let logits = rand_t(i * 7 + 1, &[4, 8]);
                let labels = vec![0usize, 3, 5, 7];
                tensor_autodiff::gradcheck::max_relative_error(
                    &|t: &mut Tape, ids| t.softmax_cross_entropy(ids[0], &labels).unwrap(),
                    &[logits],
                    1e-5,
                )
            }
            _ => {
                // equivariant conv, quadratic loss (exact central diffs)
                let group_kinds = [(GroupKind::Dihedral, 4usize), (GroupKind::Cyclic, 8)];
                let (kind, n) = group_kinds[(i as usize / 5) % 2];
                let group = make_group(kind, n).unwrap();
                let mut layer =
                    EquivConvLayer::init(group, LayerRep::Trivial, 1, 1, 3, &mut seeded(i)).unwrap();
                let nw = layer.canonical.len();
                layer
                    .canonical
                    .data_mut()
                    .copy_from_slice(&uniform_vec(&mut seeded(i * 7 + 2), nw, -1.0, 1.0));
                let x = rand_t(i * 7 + 1, &[1, 1, 5, 5]);
                tensor_autodiff::gradcheck::max_relative_error(
                    &|t: &mut Tape, ids| {
                        let y = layer.forward_tape_with(t, ids[0], ids[1], ids[2]).unwrap();
                        let sq = t.mul(y, y).unwrap();
                        t.sum_all(sq)
                    },
                    &[x, layer.canonical.clone(), layer.bias.clone()],
                    1e-3,
                )
            }
        };
        worst = worst.max(err);
        if worst >= 1e-6 {
            return CheckResult::fail("gradient-check", format!("tensor {i}: rel err {worst}"));
        }
    }
    CheckResult::ok(
        "gradient-check",
        format!("{n_tensors} tensors, max rel err {worst:.2e} < 1e-6"),
    )
}

fn rand_layer(
    kind: GroupKind,
    n: usize,
    in_rep: LayerRep,
    c_in: usize,
    c_out: usize,
    k: usize,
    seed: u64,
) -> EquivConvLayer {
    let group = make_group(kind, n).unwrap();
    let mut layer = EquivConvLayer::new(group, in_rep, c_in, c_out, k).unwrap();
    let mut rng = seeded(seed);
    let nw = layer.canonical.len();
    layer
        .canonical
        .data_mut()
        .copy_from_slice(&uniform_vec(&mut rng, nw, -1.0, 1.0));
    let nb = layer.bias.len();
    layer
        .bias
        .data_mut()
        .copy_from_slice(&uniform_vec(&mut rng, nb, -0.5, 0.5));
    layer
}

pub fn smooth_input(shape: &[usize], seed: u64) -> Tensor {
    let (n, c, h, w) = (shape[0], shape[1], shape[2], shape[3]);
    let mut rng = seeded(seed);
    let mut out = Tensor::zeros(shape);
    let sigma = h as f64 / 3.5;
    for ni in 0..n {
        for ci in 0..c {
            let params = uniform_vec(&mut rng, 12, -1.0, 1.0);
            for bump in 0..4 {
                let cy = h as f64 / 2.0 + params[bump * 3] * h as f64 / 6.0;
                let cx = w as f64 / 2.0 + params[bump * 3 + 1] * w as f64 / 6.0;
                let amp = params[bump * 3 + 2];
                for i in 0..h {
                    for j in 0..w {
                        let r2 = (i as f64 - cy).powi(2) + (j as f64 - cx).powi(2);
                        let idx = ((ni * c + ci) * h + i) * w + j;
                        out.data_mut()[idx] += amp * (-r2 / (2.0 * sigma * sigma)).exp();
                    }
                }
            }
        }
    }
    out
}

pub fn rel_l2_interior(a: &Tensor, b: &Tensor, radius: f64) -> f64 {
    let (n, c, h, w) = (a.shape()[0], a.shape()[1], a.shape()[2], a.shape()[3]);
    let (cy, cx) = ((h / 2) as f64, (w / 2) as f64);
    let (mut num, mut den) = (0.0f64, 1e-18f64);
    for ni in 0..n {
        for ci in 0..c {
            for i in 0..h {
                for j in 0..w {
                    let r = ((i as f64 - cy).powi(2) + (j as f64 - cx).powi(2)).sqrt();
                    if r > radius {
                        continue;
                    }
                    let av = a.at4(ni, ci, i, j);
                    let bv = b.at4(ni, ci, i, j);
                    num += (av - bv) * (av - bv);
                    den += bv * bv;
                }
            }
        }
    }
    (num / den).sqrt()
}

/// Exact-mode layers must commute bit-for-bit; bilinear C8 within 5e-2
/// relative L2 on the valid interior of smooth inputs.
pub fn check_layer_equivariance(n_inputs: usize) -> CheckResult {
    let name = "layer-equivariance";
    let exact_groups = [
        (GroupKind::Cyclic, 4usize),
        (GroupKind::Dihedral, 4),
        (GroupKind::Dihedral, 1),
    ];
    for i in 0..n_inputs as u64 {
        // exact lift + group conv + pool two-path
        let (kind, n) = exact_groups[(i as usize) % exact_groups.len()];
        let group = make_group(kind, n).unwrap();
        let lift = rand_layer(kind, n, LayerRep::Trivial, 2, 2, 3, 900 + i);
        let gc = rand_layer(kind, n, LayerRep::Regular, 2, 2, 3, 950 + i);
        let x = Tensor::from_vec(
            &[1, 2, 9, 9],
            uniform_vec(&mut seeded(1000 + i), 2 * 81, -1.0, 1.0),
        )
        .unwrap();
        let feats = lift.forward_tensor(&x).unwrap();
        let deep = gc.forward_tensor(&feats).unwrap();
        let (pooled, _) = group_pool_tensor(&deep, group.order()).unwrap();
        for g in group.elements() {
            let gx = act_on_image_batch(&group, *g, &x, ResampleMode::Exact).unwrap();
            let f2 = lift.forward_tensor(&gx).unwrap();
            let d2 = gc.forward_tensor(&f2).unwrap();
            let (p2, _) = group_pool_tensor(&d2, group.order()).unwrap();
            let fe = act_on_features(&group, *g, &feats, ResampleMode::Exact).unwrap();
            let de = act_on_features(&group, *g, &deep, ResampleMode::Exact).unwrap();
            let pe = group_core::act_on_image(
                &group,
                *g,
                &pooled.reshaped(&[2, 7, 7]).unwrap(),
                ResampleMode::Exact,
            )
            .unwrap();
            if f2.max_abs_diff(&fe) != 0.0
                || d2.max_abs_diff(&de) != 0.0
                || p2.reshaped(&[2, 7, 7]).unwrap().max_abs_diff(&pe) != 0.0
            {
                return CheckResult::fail(
                    name,
                    format!("exact two-path mismatch at input {i}, g {}", g.index),
                );
            }
        }
        // heads
        let mut rng = seeded(1100 + i);
        let d4 = make_group(GroupKind::Dihedral, 4).unwrap();
        let head = ActorHead::init(d4.clone(), 4, 2, 3, &mut rng);
        let state = uniform_vec(&mut rng, 4 * 8, -1.0, 1.0);
        let res = check_actor_equivariance(&head, &state).unwrap();
        if res != 0.0 {
            return CheckResult::fail(name, format!("actor residual {res} at input {i}"));
        }
        let critic = InvariantCritic::init(d4.clone(), 4, 3, 2, 3, &mut rng);
        let action = MixedActionValue {
            a_equiv: [state[0], state[1]],
            a_inv: vec![state[2], state[3]],
            a_sigma: vec![state[4], state[5], state[6]],
        };
        let res = check_critic_invariance(&critic, &state, &action).unwrap();
        if res != 0.0 {
            return CheckResult::fail(name, format!("critic residual {res} at input {i}"));
        }
        // action restriction: right-multiplication on the group axis
        let feat = Tensor::from_vec(
            &[8, 5, 5],
            uniform_vec(&mut seeded(1200 + i), 8 * 25, -1.0, 1.0),
        )
        .unwrap();
        let base = action_restrict_flatten(&d4, &feat).unwrap();
        let batched = feat.reshaped(&[1, 8, 5, 5]).unwrap();
        for g0 in d4.elements() {
            let moved = act_on_features(&d4, *g0, &batched, ResampleMode::Exact)
                .unwrap()
                .reshaped(&[8, 5, 5])
                .unwrap();
            let lhs = action_restrict_flatten(&d4, &moved).unwrap();
            let perm = restricted_axis_permutation(&d4, *g0);
            let flat = base.shape()[2];
            for fi in 0..flat {
                for (g, &pg) in perm.iter().enumerate() {
                    if lhs.data()[fi * 8 + g] != base.data()[fi * 8 + pg] {
                        return CheckResult::fail(
                            name,
                            format!("action restriction mismatch at input {i}"),
                        );
                    }
                }
            }
        }
        // bilinear C8
        let c8 = make_group(GroupKind::Cyclic, 8).unwrap();
        let fill = ResampleMode::Bilinear { fill: 0.0 };
        let lift8 = rand_layer(GroupKind::Cyclic, 8, LayerRep::Trivial, 2, 2, 7, 1300 + i);
        let xs = smooth_input(&[1, 2, 25, 25], 1400 + i);
        let ys = lift8.forward_tensor(&xs).unwrap();
        let radius = 25.0 / 2.0 - 7.0 * 1.5;
        for g in c8.elements() {
            let gx = act_on_image_batch(&c8, *g, &xs, fill).unwrap();
            let ya = lift8.forward_tensor(&gx).unwrap();
            let yb = act_on_features(&c8, *g, &ys, fill).unwrap();
            let r = rel_l2_interior(&ya, &yb, radius);
            if r >= 5e-2 {
                return CheckResult::fail(
                    name,
                    format!("c8 residual {r} at input {i}, g {}", g.index),
                );
            }
        }
    }
    CheckResult::ok(
        name,
        format!("{n_inputs} inputs: exact paths bit-identical, c8 within 5e-2"),
    )
}

/// K(gy) = rho_out(g) K(y) rho_in(g)^-1 residual must be exactly zero
/// for grid-exact g.
pub fn check_kernel_constraint(n_layers: usize) -> CheckResult {
    let combos = [
        (GroupKind::Cyclic, 4usize, LayerRep::Trivial, 5usize),
        (GroupKind::Dihedral, 4, LayerRep::Regular, 3),
        (GroupKind::Cyclic, 8, LayerRep::Regular, 5),
        (GroupKind::Dihedral, 1, LayerRep::Trivial, 3),
        (GroupKind::Dihedral, 2, LayerRep::Regular, 3),
    ];
    for i in 0..n_layers as u64 {
        let (kind, n, in_rep, k) = combos[(i as usize) % combos.len()];
        let layer = rand_layer(kind, n, in_rep, 2, 2, k, 2000 + i);
        let bank = layer.expand_kernel();
        let res = kernel_constraint_residual(&layer, &bank);
        if res != 0.0 {
            return CheckResult::fail(
                "kernel-constraint",
                format!("layer {i} ({kind:?}{n}): residual {res}"),
            );
        }
    }
    CheckResult::ok(
        "kernel-constraint",
        format!("{n_layers} random layers: residual exactly 0 for grid-exact elements"),
    )
}

/// Closed-form tight bound equals the exhaustive per-orbit optimum, and
/// the loose bound dominates it.
pub fn check_bound_oracle(n_instances: usize) -> CheckResult {
    for seed in 0..n_instances as u64 {
        let inst = random_instance(seed, 24, 4);
        let tb = tight_bound(&inst);
        let oracle = best_invariant_accuracy(&inst);
        if tb.exact != oracle {
            return CheckResult::fail(
                "bound-oracle",
                format!(
                    "seed {seed}: tight {} vs oracle {}",
                    tb.exact, oracle
                ),
            );
        }
        let (loose_exact, _) = loose_bound(&inst);
        if loose_exact < tb.exact {
            return CheckResult::fail(
                "bound-oracle",
                format!("seed {seed}: loose < tight"),
            );
        }
    }
    CheckResult::ok(
        "bound-oracle",
        format!("{n_instances} instances: tight == exhaustive optimum, loose >= tight"),
    )
}

pub fn check_golden_constants() -> CheckResult {
    let inv = golden::label_inversion_instance();
    let tb = tight_bound(&inv);
    let rep = &tb.report;
    let c1 = rep
        .c_p
        .get(&num_rational::Ratio::new(1, 1))
        .and_then(|w| w.to_f64());
    let c_half = rep
        .c_p
        .get(&num_rational::Ratio::new(1, 2))
        .and_then(|w| w.to_f64());
    if c1 != Some(0.25) || c_half != Some(0.75) || tb.value != 0.625 {
        return CheckResult::fail(
            "golden-constants",
            format!("inversion instance: c1 {c1:?}, c1/2 {c_half:?}, tight {}", tb.value),
        );
    }
    let ring = golden::antipodal_ring_instance();
    let tb2 = tight_bound(&ring);
    if tb2.value != 0.5 {
        return CheckResult::fail(
            "golden-constants",
            format!("antipodal ring tight {}", tb2.value),
        );
    }
    CheckResult::ok(
        "golden-constants",
        "c_1 = 0.25, c_1/2 = 0.75, bounds 0.625 and 0.5 exact".into(),
    )
}

/// The fast property suites, as run by `equisym selftest`.
pub fn run_selftest() -> Vec<CheckResult> {
    vec![
        check_group_axioms(),
        check_gradients(15),
        check_layer_equivariance(10),
        check_kernel_constraint(25),
        check_bound_oracle(200),
        check_golden_constants(),
    ]
}
