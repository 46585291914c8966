//! Group-equivariant convolution layers.
//!
//! Weights are stored once in canonical form; the filter bank seen by
//! the convolution is the canonical filter transformed per output group
//! slot. The forward loop iterates canonical weight indices in a fixed
//! order and transforms the *input access pattern* per slot. Under a
//! grid-exact group action on the input, the slot-g' accumulation then
//! runs through bit-identical terms in bit-identical order as slot
//! g0^-1 g' on the untransformed input, which makes the equivariance of
//! exact-mode layers hold bit-for-bit, not just to rounding.

use std::sync::Arc;

use group_core::{
    bilinear_pixel_weights, exact_pixel_map, is_grid_exact, Group, GroupElement,
};
use tensor_autodiff::{CustomOp, NodeId, Prng, Tape, Tensor};

use crate::LayerError;

/// Input typing of an equivariant conv layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerRep {
    /// Plain image channels; the layer lifts them to regular features.
    Trivial,
    /// Regular-representation features with channel index c * |G| + g.
    Regular,
}

#[derive(Debug, Clone)]
enum SlotPlan {
    /// Per canonical tap (row-major over k*k): the transformed offset.
    Exact(Vec<(usize, usize)>),
    /// Sparse filter-resampling map: per transformed tap, (src tap, coeff).
    Bilinear(Vec<Vec<(usize, f64)>>),
}

#[derive(Debug)]
struct ConvTables {
    order: usize,
    group_axis: usize, // |G| for regular input, 1 for trivial
    c_in: usize,
    c_out: usize,
    k: usize,
    /// comp[g' * |G| + h] = index of g' h
    comp: Vec<usize>,
    plans: Vec<SlotPlan>,
    /// Radial support mask over the k*k taps. All ones for grid-exact
    /// groups. Groups with non-grid elements get disc-supported filters:
    /// a square support loses its corner mass under 45-degree rotation,
    /// which would break the equivariance tolerance for random weights.
    mask: Vec<f64>,
}

/// A lifting (trivial -> regular) or group (regular -> regular)
/// convolution layer. `canonical` is the full set of free parameters:
/// [c_out, c_in_total, k, k]; bias has one entry per output channel,
/// shared across the group axis.
#[derive(Debug, Clone)]
pub struct EquivConvLayer {
    pub group: Group,
    pub in_rep: LayerRep,
    pub c_in: usize,
    pub c_out: usize,
    pub k: usize,
    pub canonical: Tensor,
    pub bias: Tensor,
    tables: Arc<ConvTables>,
}

impl EquivConvLayer {
    pub fn new(
        group: Group,
        in_rep: LayerRep,
        c_in: usize,
        c_out: usize,
        k: usize,
    ) -> Result<Self, LayerError> {
        if k % 2 == 0 || k == 0 {
            return Err(LayerError::BadConfig {
                reason: "filter size must be odd",
            });
        }
        if c_in == 0 || c_out == 0 {
            return Err(LayerError::BadConfig {
                reason: "channel counts must be positive",
            });
        }
        let tables = Arc::new(build_tables(&group, in_rep, c_in, c_out, k)?);
        let c_in_total = tables.c_in * tables.group_axis;
        Ok(EquivConvLayer {
            group,
            in_rep,
            c_in,
            c_out,
            k,
            canonical: Tensor::zeros(&[c_out, c_in_total, k, k]),
            bias: Tensor::zeros(&[c_out]),
            tables,
        })
    }

    /// He-style init scaled by the expanded fan-in.
    pub fn init(
        group: Group,
        in_rep: LayerRep,
        c_in: usize,
        c_out: usize,
        k: usize,
        rng: &mut Prng,
    ) -> Result<Self, LayerError> {
        let mut layer = Self::new(group, in_rep, c_in, c_out, k)?;
        let k2 = k * k;
        let live: f64 = layer.tables.mask.iter().sum();
        let fan_in = layer.c_in_total() as f64 * live;
        let scale = (2.0 / fan_in).sqrt() * 1.7320508075688772; // uniform, matched variance
        let n = layer.canonical.len();
        let data = tensor_autodiff::rng::uniform_vec(rng, n, -1.0, 1.0);
        let mask = layer.tables.mask.clone();
        for (e, (w, u)) in layer.canonical.data_mut().iter_mut().zip(data).enumerate() {
            *w = if mask[e % k2] == 0.0 { 0.0 } else { u * scale };
        }
        Ok(layer)
    }

    pub fn c_in_total(&self) -> usize {
        self.tables.c_in * self.tables.group_axis
    }

    pub fn c_out_total(&self) -> usize {
        self.c_out * self.group.order()
    }

    /// Free parameters: taps inside the filter support, plus biases.
    /// For grid-exact groups the support is the full square, so this is
    /// exactly the canonical tensor size.
    pub fn param_count(&self) -> usize {
        let live_taps = self.tables.mask.iter().filter(|&&m| m != 0.0).count();
        self.c_out * self.c_in_total() * live_taps + self.bias.len()
    }

    /// Output spatial size for a valid (no padding, stride 1) application.
    pub fn out_hw(&self, h: usize, w: usize) -> Result<(usize, usize), LayerError> {
        if h < self.k || w < self.k {
            return Err(LayerError::BadConfig {
                reason: "input smaller than filter",
            });
        }
        Ok((h - self.k + 1, w - self.k + 1))
    }

    /// Materializes the expanded filter bank
    /// [c_out * |G|, c_in_total, k, k] that the layer is equivalent to.
    pub fn expand_kernel(&self) -> Tensor {
        expand_kernel_of(&self.tables, &self.canonical)
    }

    /// Runs the layer on a plain tensor (no tape), for property checks.
    pub fn forward_tensor(&self, x: &Tensor) -> Result<Tensor, LayerError> {
        forward_impl(&self.tables, x, &self.canonical, Some(&self.bias))
    }

    /// Records the layer on a tape. Returns (output, weight leaf, bias
    /// leaf) so a trainer can read gradients and update the layer.
    pub fn forward_tape(
        &self,
        tape: &mut Tape,
        x: NodeId,
    ) -> Result<(NodeId, NodeId, NodeId), LayerError> {
        let w = tape.leaf(self.canonical.clone());
        let b = tape.leaf(self.bias.clone());
        let out = self.forward_tape_with(tape, x, w, b)?;
        Ok((out, w, b))
    }

    /// Same as `forward_tape` but with caller-owned weight/bias leaves.
    pub fn forward_tape_with(
        &self,
        tape: &mut Tape,
        x: NodeId,
        w: NodeId,
        b: NodeId,
    ) -> Result<NodeId, LayerError> {
        let value = forward_impl(&self.tables, tape.value(x), tape.value(w), Some(tape.value(b)))?;
        let saved = vec![tape.value(x).clone(), tape.value(w).clone()];
        let op = Arc::new(EquivConvOp {
            tables: Arc::clone(&self.tables),
        });
        Ok(tape.custom(&[x, w, b], value, saved, op))
    }
}

/// Lifting convolution: trivial image channels to regular features.
pub fn lift_conv(
    group: Group,
    c_in: usize,
    c_out: usize,
    k: usize,
) -> Result<EquivConvLayer, LayerError> {
    EquivConvLayer::new(group, LayerRep::Trivial, c_in, c_out, k)
}

/// Group convolution on regular features.
pub fn group_conv(
    group: Group,
    c_in: usize,
    c_out: usize,
    k: usize,
) -> Result<EquivConvLayer, LayerError> {
    EquivConvLayer::new(group, LayerRep::Regular, c_in, c_out, k)
}

fn build_tables(
    group: &Group,
    in_rep: LayerRep,
    c_in: usize,
    c_out: usize,
    k: usize,
) -> Result<ConvTables, LayerError> {
    let order = group.order();
    let group_axis = match in_rep {
        LayerRep::Trivial => 1,
        LayerRep::Regular => order,
    };
    let mut comp = vec![0usize; order * order];
    for g in 0..order {
        for h in 0..order {
            comp[g * order + h] = group.compose_idx(g, h);
        }
    }
    let mut plans: Vec<Option<SlotPlan>> = vec![None; order];
    let mut any_bilinear = false;
    let grid_exact: Vec<bool> = group
        .elements()
        .iter()
        .map(|g| is_grid_exact(group, *g))
        .collect();
    for g in group.elements() {
        if grid_exact[g.index] {
            // exact_pixel_map sends an output tap to its source tap; the
            // forward loop needs the other direction.
            let map = exact_pixel_map(group, *g, k, k).map_err(LayerError::Group)?;
            let mut fwd = vec![(0usize, 0usize); k * k];
            for (dst, &src) in map.iter().enumerate() {
                fwd[src] = (dst / k, dst % k);
            }
            plans[g.index] = Some(SlotPlan::Exact(fwd));
        }
    }
    for g in group.elements() {
        if grid_exact[g.index] {
            continue;
        }
        any_bilinear = true;
        // If g = q * b with q grid-exact and b already resampled, derive
        // the plan by permuting b's taps. One resampling per grid coset
        // keeps the kernel constraint bit-exact for grid elements even
        // across resampled slots.
        let mut derived = None;
        'search: for b in group.elements() {
            if grid_exact[b.index] || plans[b.index].is_none() {
                continue;
            }
            for q in group.elements() {
                if !grid_exact[q.index] {
                    continue;
                }
                if group.compose_idx(q.index, b.index) == g.index {
                    let qmap = exact_pixel_map(group, *q, k, k).map_err(LayerError::Group)?;
                    if let Some(SlotPlan::Bilinear(base)) = &plans[b.index] {
                        let composed: Vec<Vec<(usize, f64)>> =
                            qmap.iter().map(|&src| base[src].clone()).collect();
                        derived = Some(SlotPlan::Bilinear(composed));
                        break 'search;
                    }
                }
            }
        }
        plans[g.index] = Some(derived.unwrap_or_else(|| {
            // Resample the filter with the adjoint (splat) of the inverse
            // image rotation: pairing a splat-rotated filter with a patch
            // equals pairing the original filter with the back-rotated
            // patch, so the equivariance error scales with the input's
            // smoothness instead of the filter's.
            let inv = group.inverse(*g);
            let gather = bilinear_pixel_weights(group, inv, k, k).expect("odd k");
            let mut splat: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k * k];
            for (q, taps) in gather.iter().enumerate() {
                for &(s, wgt) in taps {
                    splat[s].push((q, wgt));
                }
            }
            SlotPlan::Bilinear(splat)
        }));
    }
    let plans: Vec<SlotPlan> = plans.into_iter().map(|p| p.unwrap()).collect();
    let mask = if any_bilinear {
        disc_mask(k)
    } else {
        vec![1.0; k * k]
    };
    Ok(ConvTables {
        order,
        group_axis,
        c_in,
        c_out,
        k,
        comp,
        plans,
        mask,
    })
}

/// Rotation-symmetric support: 1 inside the inscribed disc, smooth
/// cosine taper over the outer ring, 0 at the corners.
fn disc_mask(k: usize) -> Vec<f64> {
    let c = (k / 2) as f64;
    let r_full = c - 0.5;
    let r_zero = c + 0.5;
    let mut mask = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            let r = ((i as f64 - c).powi(2) + (j as f64 - c).powi(2)).sqrt();
            mask[i * k + j] = if r <= r_full {
                1.0
            } else if r >= r_zero {
                0.0
            } else {
                let t = (r - r_full) / (r_zero - r_full);
                (0.5 + 0.5 * (std::f64::consts::PI * t).cos()).powi(1)
            };
        }
    }
    mask
}

/// The transformed filter used by one output slot, flattened to
/// [c_in_total * k * k] per output channel lane (ci_b, h).
fn slot_filter(tables: &ConvTables, canonical: &Tensor, slot: usize, co: usize, lane: usize) -> Vec<f64> {
    let k2 = tables.k * tables.k;
    let base = (co * tables.c_in * tables.group_axis + lane) * k2;
    let w = &canonical.data()[base..base + k2];
    match &tables.plans[slot] {
        SlotPlan::Exact(_) => w
            .iter()
            .zip(&tables.mask)
            .map(|(wv, m)| wv * m)
            .collect(),
        SlotPlan::Bilinear(map) => {
            let mut rot = vec![0.0; k2];
            for (dst, taps) in map.iter().enumerate() {
                let mut acc = 0.0;
                for &(src, c) in taps {
                    acc += c * w[src] * tables.mask[src];
                }
                rot[dst] = acc;
            }
            rot
        }
    }
}

fn expand_kernel_of(tables: &ConvTables, canonical: &Tensor) -> Tensor {
    let (order, k) = (tables.order, tables.k);
    let k2 = k * k;
    let c_in_total = tables.c_in * tables.group_axis;
    let mut bank = Tensor::zeros(&[tables.c_out * order, c_in_total, k, k]);
    for slot in 0..order {
        for co in 0..tables.c_out {
            for ci_b in 0..tables.c_in {
                for h in 0..tables.group_axis {
                    // input slot fed by canonical lane h under this output slot
                    let j = if tables.group_axis == 1 {
                        ci_b
                    } else {
                        ci_b * order + tables.comp[slot * order + h]
                    };
                    let lane = ci_b * tables.group_axis + h;
                    let filt = slot_filter(tables, canonical, slot, co, lane);
                    let out_c = co * order + slot;
                    let dst = (out_c * c_in_total + j) * k2;
                    match &tables.plans[slot] {
                        SlotPlan::Exact(fwd) => {
                            for (src, &(dy, dx)) in fwd.iter().enumerate() {
                                bank.data_mut()[dst + dy * k + dx] = filt[src];
                            }
                        }
                        SlotPlan::Bilinear(_) => {
                            bank.data_mut()[dst..dst + k2].copy_from_slice(&filt);
                        }
                    }
                }
            }
        }
    }
    bank
}

fn forward_impl(
    tables: &ConvTables,
    x: &Tensor,
    canonical: &Tensor,
    bias: Option<&Tensor>,
) -> Result<Tensor, LayerError> {
    let (order, k) = (tables.order, tables.k);
    let c_in_total = tables.c_in * tables.group_axis;
    if x.ndim() != 4 || x.shape()[1] != c_in_total {
        return Err(LayerError::BadInput {
            reason: "expected [n, c_in_total, h, w] input matching the layer",
            got: x.shape().to_vec(),
        });
    }
    let (n, h, w) = (x.shape()[0], x.shape()[2], x.shape()[3]);
    if h < k || w < k {
        return Err(LayerError::BadInput {
            reason: "input spatially smaller than filter",
            got: x.shape().to_vec(),
        });
    }
    let (oh, ow) = (h - k + 1, w - k + 1);
    let expected = [tables.c_out, c_in_total, k, k];
    if canonical.shape() != expected {
        return Err(LayerError::BadInput {
            reason: "canonical weight shape mismatch",
            got: canonical.shape().to_vec(),
        });
    }
    let mut out = Tensor::zeros(&[n, tables.c_out * order, oh, ow]);
    let k2 = k * k;
    let xd = x.data();
    let od = out.data_mut();
    for slot in 0..order {
        // For non-grid slots the canonical filters are resampled once.
        let rotated: Option<Vec<f64>> = match &tables.plans[slot] {
            SlotPlan::Exact(_) => None,
            SlotPlan::Bilinear(_) => {
                let mut buf = vec![0.0; tables.c_out * c_in_total * k2];
                for co in 0..tables.c_out {
                    for lane in 0..c_in_total {
                        let filt = slot_filter(tables, canonical, slot, co, lane);
                        let dst = (co * c_in_total + lane) * k2;
                        buf[dst..dst + k2].copy_from_slice(&filt);
                    }
                }
                Some(buf)
            }
        };
        for ni in 0..n {
            for co in 0..tables.c_out {
                let obase = ((ni * tables.c_out * order + co * order + slot) * oh) * ow;
                if let Some(b) = bias {
                    let bv = b.data()[co];
                    for v in od[obase..obase + oh * ow].iter_mut() {
                        *v = bv;
                    }
                }
                for ci_b in 0..tables.c_in {
                    for hh in 0..tables.group_axis {
                        let j = if tables.group_axis == 1 {
                            ci_b
                        } else {
                            ci_b * order + tables.comp[slot * order + hh]
                        };
                        let lane = ci_b * tables.group_axis + hh;
                        let xbase = ((ni * c_in_total + j) * h) * w;
                        let wbase = (co * c_in_total + lane) * k2;
                        match &tables.plans[slot] {
                            SlotPlan::Exact(fwd) => {
                                for t in 0..k2 {
                                    let wv = canonical.data()[wbase + t] * tables.mask[t];
                                    if wv == 0.0 {
                                        continue;
                                    }
                                    let (dy, dx) = fwd[t];
                                    tap_axpy(od, xd, obase, xbase, wv, dy, dx, oh, ow, w);
                                }
                            }
                            SlotPlan::Bilinear(_) => {
                                let filt = &rotated.as_ref().unwrap()[wbase..wbase + k2];
                                for (t, &wv) in filt.iter().enumerate() {
                                    if wv == 0.0 {
                                        continue;
                                    }
                                    tap_axpy(od, xd, obase, xbase, wv, t / k, t % k, oh, ow, w);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn tap_axpy(
    od: &mut [f64],
    xd: &[f64],
    obase: usize,
    xbase: usize,
    wv: f64,
    dy: usize,
    dx: usize,
    oh: usize,
    ow: usize,
    w: usize,
) {
    for oy in 0..oh {
        let orow = &mut od[obase + oy * ow..obase + (oy + 1) * ow];
        let xrow = &xd[xbase + (oy + dy) * w + dx..xbase + (oy + dy) * w + dx + ow];
        for (o, xv) in orow.iter_mut().zip(xrow) {
            *o += wv * xv;
        }
    }
}

#[derive(Debug)]
struct EquivConvOp {
    tables: Arc<ConvTables>,
}

impl CustomOp for EquivConvOp {
    fn backward(&self, saved: &[Tensor], grad_out: &Tensor) -> Vec<Option<Tensor>> {
        let (x, canonical) = (&saved[0], &saved[1]);
        let t = &self.tables;
        let (order, k) = (t.order, t.k);
        let k2 = k * k;
        let c_in_total = t.c_in * t.group_axis;
        let (n, h, w) = (x.shape()[0], x.shape()[2], x.shape()[3]);
        let (oh, ow) = (h - k + 1, w - k + 1);
        let mut gx = Tensor::zeros(x.shape());
        let mut gw = Tensor::zeros(canonical.shape());
        let mut gb = Tensor::zeros(&[t.c_out]);
        let gd = grad_out.data();
        let xd = x.data();
        for slot in 0..order {
            let rotated: Option<Vec<f64>> = match &t.plans[slot] {
                SlotPlan::Exact(_) => None,
                SlotPlan::Bilinear(_) => {
                    let mut buf = vec![0.0; t.c_out * c_in_total * k2];
                    for co in 0..t.c_out {
                        for lane in 0..c_in_total {
                            let filt = slot_filter(t, canonical, slot, co, lane);
                            let dst = (co * c_in_total + lane) * k2;
                            buf[dst..dst + k2].copy_from_slice(&filt);
                        }
                    }
                    Some(buf)
                }
            };
            for ni in 0..n {
                for co in 0..t.c_out {
                    let obase = ((ni * t.c_out * order + co * order + slot) * oh) * ow;
                    gb.data_mut()[co] += gd[obase..obase + oh * ow].iter().sum::<f64>();
                    for ci_b in 0..t.c_in {
                        for hh in 0..t.group_axis {
                            let j = if t.group_axis == 1 {
                                ci_b
                            } else {
                                ci_b * order + t.comp[slot * order + hh]
                            };
                            let lane = ci_b * t.group_axis + hh;
                            let xbase = ((ni * c_in_total + j) * h) * w;
                            let wbase = (co * c_in_total + lane) * k2;
                            match &t.plans[slot] {
                                SlotPlan::Exact(fwd) => {
                                    for tt in 0..k2 {
                                        let (dy, dx) = fwd[tt];
                                        let wv = canonical.data()[wbase + tt] * t.mask[tt];
                                        let acc = tap_backward(
                                            gx.data_mut(),
                                            gd,
                                            xd,
                                            obase,
                                            xbase,
                                            wv,
                                            dy,
                                            dx,
                                            oh,
                                            ow,
                                            w,
                                        );
                                        gw.data_mut()[wbase + tt] += acc * t.mask[tt];
                                    }
                                }
                                SlotPlan::Bilinear(map) => {
                                    let filt = &rotated.as_ref().unwrap()[wbase..wbase + k2];
                                    for (tt, taps) in map.iter().enumerate() {
                                        let wv = filt[tt];
                                        let acc = tap_backward(
                                            gx.data_mut(),
                                            gd,
                                            xd,
                                            obase,
                                            xbase,
                                            wv,
                                            tt / k,
                                            tt % k,
                                            oh,
                                            ow,
                                            w,
                                        );
                                        for &(src, c) in taps {
                                            gw.data_mut()[wbase + src] += c * acc * t.mask[src];
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        vec![Some(gx), Some(gw), Some(gb)]
    }
}

/// Accumulates gx for one tap and returns the weight gradient for it.
#[allow(clippy::too_many_arguments)]
#[inline]
fn tap_backward(
    gxd: &mut [f64],
    gd: &[f64],
    xd: &[f64],
    obase: usize,
    xbase: usize,
    wv: f64,
    dy: usize,
    dx: usize,
    oh: usize,
    ow: usize,
    w: usize,
) -> f64 {
    let mut acc = 0.0;
    for oy in 0..oh {
        let grow = &gd[obase + oy * ow..obase + (oy + 1) * ow];
        let xoff = xbase + (oy + dy) * w + dx;
        let xrow = &xd[xoff..xoff + ow];
        let gxrow = &mut gxd[xoff..xoff + ow];
        for ((g, xv), gx) in grow.iter().zip(xrow).zip(gxrow.iter_mut()) {
            acc += g * xv;
            *gx += wv * g;
        }
    }
    acc
}

/// Applies the full feature-space action of g to regular features
/// [n, c*|G|, h, w]: channel slots permute by left translation and the
/// spatial grid transforms by g.
pub fn act_on_features(
    group: &Group,
    g: GroupElement,
    feat: &Tensor,
    mode: group_core::ResampleMode,
) -> Result<Tensor, LayerError> {
    let order = group.order();
    if feat.ndim() != 4 || feat.shape()[1] % order != 0 {
        return Err(LayerError::BadInput {
            reason: "expected [n, c*|G|, h, w] regular features",
            got: feat.shape().to_vec(),
        });
    }
    let (n, c_tot, h, w) = (
        feat.shape()[0],
        feat.shape()[1],
        feat.shape()[2],
        feat.shape()[3],
    );
    let c_b = c_tot / order;
    let ginv = group.inverse(g);
    let mut out = Tensor::zeros(feat.shape());
    for ni in 0..n {
        for cb in 0..c_b {
            for j in 0..order {
                let src_slot = group.compose_idx(ginv.index, j);
                let src_plane = extract_plane(feat, ni, cb * order + src_slot);
                let moved = group_core::act_on_image(group, g, &src_plane, mode)
                    .map_err(LayerError::Group)?;
                insert_plane(&mut out, ni, cb * order + j, &moved);
            }
        }
    }
    let _ = (h, w);
    Ok(out)
}

/// Applies g spatially to every channel of a batched [n, c, h, w]
/// tensor of trivially-typed channels.
pub fn act_on_image_batch(
    group: &Group,
    g: GroupElement,
    x: &Tensor,
    mode: group_core::ResampleMode,
) -> Result<Tensor, LayerError> {
    if x.ndim() != 4 {
        return Err(LayerError::BadInput {
            reason: "expected [n, c, h, w]",
            got: x.shape().to_vec(),
        });
    }
    let (n, c) = (x.shape()[0], x.shape()[1]);
    let mut out = Tensor::zeros(x.shape());
    for ni in 0..n {
        for ci in 0..c {
            let plane = extract_plane(x, ni, ci);
            let moved =
                group_core::act_on_image(group, g, &plane, mode).map_err(LayerError::Group)?;
            insert_plane(&mut out, ni, ci, &moved);
        }
    }
    Ok(out)
}

fn extract_plane(x: &Tensor, ni: usize, ci: usize) -> Tensor {
    let (c, h, w) = (x.shape()[1], x.shape()[2], x.shape()[3]);
    let base = ((ni * c + ci) * h) * w;
    Tensor::from_vec(&[1, h, w], x.data()[base..base + h * w].to_vec()).unwrap()
}

fn insert_plane(x: &mut Tensor, ni: usize, ci: usize, plane: &Tensor) {
    let (c, h, w) = (x.shape()[1], x.shape()[2], x.shape()[3]);
    let base = ((ni * c + ci) * h) * w;
    x.data_mut()[base..base + h * w].copy_from_slice(plane.data());
}

/// Max over grid-exact group elements and filter positions of
/// |K(g y) - rho_out(g) K(y) rho_in(g)^-1|, evaluated by permutation
/// index arithmetic on the expanded bank.
pub fn kernel_constraint_residual(layer: &EquivConvLayer, bank: &Tensor) -> f64 {
    let group = &layer.group;
    let order = group.order();
    let k = layer.k;
    let k2 = k * k;
    let c_in_total = layer.c_in_total();
    let mut worst = 0.0f64;
    for g in group.elements() {
        if !is_grid_exact(group, *g) {
            continue;
        }
        // pixel_map[q_out] = q_src with q_src = g^-1 q_out, i.e. K(g y)
        // read at q_out = g y means reading K at y = pixel_map[q_out].
        let map = exact_pixel_map(group, *g, k, k).unwrap();
        for out_row in 0..layer.c_out * order {
            let (co, a) = (out_row / order, out_row % order);
            // rho_out(g)^-1 row: (co, g^-1 a)
            let ga_inv = group.compose_idx(group.inverse_idx(g.index), a);
            let lhs_row = out_row;
            let rhs_row = co * order + ga_inv;
            for in_col in 0..c_in_total {
                let rhs_col = match layer.in_rep {
                    LayerRep::Trivial => in_col,
                    LayerRep::Regular => {
                        let (cb, b) = (in_col / order, in_col % order);
                        cb * order + group.compose_idx(group.inverse_idx(g.index), b)
                    }
                };
                for q_out in 0..k2 {
                    let y = map[q_out];
                    let lhs = bank.data()[(lhs_row * c_in_total + in_col) * k2 + q_out];
                    let rhs = bank.data()[(rhs_row * c_in_total + rhs_col) * k2 + y];
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
    }
    worst
}
