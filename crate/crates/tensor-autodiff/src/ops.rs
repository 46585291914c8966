//! Raw forward/backward kernels on plain tensors. The tape in
//! `graph` wires these into a computation graph; layer crates may call
//! them directly when they implement custom ops.

use crate::tensor::Tensor;
use crate::TensorError;

fn conv_out_size(h: usize, k: usize, stride: usize, pad: usize) -> Option<usize> {
    let span = h + 2 * pad;
    if span < k {
        return None;
    }
    Some((span - k) / stride + 1)
}

pub fn conv2d_shape(
    x: &[usize],
    k: &[usize],
    stride: usize,
    pad: usize,
) -> Result<[usize; 4], TensorError> {
    if x.len() != 4 || k.len() != 4 || x[1] != k[1] || stride == 0 {
        return Err(TensorError::ShapeMismatch {
            context: "conv2d",
            expected: k.to_vec(),
            got: x.to_vec(),
        });
    }
    let oh = conv_out_size(x[2], k[2], stride, pad);
    let ow = conv_out_size(x[3], k[3], stride, pad);
    match (oh, ow) {
        (Some(oh), Some(ow)) => Ok([x[0], k[0], oh, ow]),
        _ => Err(TensorError::ShapeMismatch {
            context: "conv2d window larger than padded input",
            expected: k.to_vec(),
            got: x.to_vec(),
        }),
    }
}

/// Cross-correlation of x:[n,ci,h,w] with k:[co,ci,kh,kw].
pub fn conv2d_forward(
    x: &Tensor,
    kern: &Tensor,
    bias: Option<&Tensor>,
    stride: usize,
    pad: usize,
) -> Result<Tensor, TensorError> {
    let os = conv2d_shape(x.shape(), kern.shape(), stride, pad)?;
    let [n, co, oh, ow] = os;
    let (ci, h, w) = (x.shape()[1], x.shape()[2], x.shape()[3]);
    let (kh, kw) = (kern.shape()[2], kern.shape()[3]);
    if let Some(b) = bias {
        if b.shape() != [co] {
            return Err(TensorError::ShapeMismatch {
                context: "conv2d bias",
                expected: vec![co],
                got: b.shape().to_vec(),
            });
        }
    }
    let mut out = Tensor::zeros(&os);
    let xd = x.data();
    let kd = kern.data();
    let od = out.data_mut();
    for ni in 0..n {
        for c_out in 0..co {
            let obase = ((ni * co + c_out) * oh) * ow;
            if let Some(b) = bias {
                let bv = b.data()[c_out];
                for v in od[obase..obase + oh * ow].iter_mut() {
                    *v = bv;
                }
            }
            for c_in in 0..ci {
                let xbase = ((ni * ci + c_in) * h) * w;
                for ky in 0..kh {
                    for kx in 0..kw {
                        let wv = kd[((c_out * ci + c_in) * kh + ky) * kw + kx];
                        if wv == 0.0 {
                            continue;
                        }
                        accumulate_tap(
                            &mut od[obase..obase + oh * ow],
                            &xd[xbase..xbase + h * w],
                            wv,
                            (h, w),
                            (oh, ow),
                            (ky, kx),
                            stride,
                            pad,
                        );
                    }
                }
            }
        }
    }
    Ok(out)
}

/// out[oy][ox] += wv * x[oy*s + ky - p][ox*s + kx - p] over in-bounds pixels.
#[allow(clippy::too_many_arguments)]
#[inline]
fn accumulate_tap(
    out: &mut [f64],
    x: &[f64],
    wv: f64,
    (h, w): (usize, usize),
    (oh, ow): (usize, usize),
    (ky, kx): (usize, usize),
    stride: usize,
    pad: usize,
) {
    for oy in 0..oh {
        let iy = (oy * stride + ky) as isize - pad as isize;
        if iy < 0 || iy >= h as isize {
            continue;
        }
        let ox_lo = ox_low(kx, pad, stride);
        let ox_hi = ox_high(kx, pad, stride, w, ow);
        if ox_lo >= ox_hi {
            continue;
        }
        let orow = &mut out[oy * ow..(oy + 1) * ow];
        let xrow = &x[(iy as usize) * w..(iy as usize + 1) * w];
        if stride == 1 {
            let ix0 = (ox_lo * stride + kx) as isize - pad as isize;
            let xseg = &xrow[ix0 as usize..ix0 as usize + (ox_hi - ox_lo)];
            for (o, xv) in orow[ox_lo..ox_hi].iter_mut().zip(xseg) {
                *o += wv * xv;
            }
        } else {
            for ox in ox_lo..ox_hi {
                let ix = (ox * stride + kx) as isize - pad as isize;
                orow[ox] += wv * xrow[ix as usize];
            }
        }
    }
}

#[inline]
fn ox_low(kx: usize, pad: usize, stride: usize) -> usize {
    if pad > kx {
        (pad - kx + stride - 1) / stride
    } else {
        0
    }
}

#[inline]
fn ox_high(kx: usize, pad: usize, stride: usize, w: usize, ow: usize) -> usize {
    // largest ox with ox*stride + kx - pad <= w-1, exclusive bound
    let limit = w + pad;
    if limit <= kx {
        return 0;
    }
    (((limit - 1 - kx) / stride) + 1).min(ow)
}

pub fn conv2d_backward(
    x: &Tensor,
    kern: &Tensor,
    gout: &Tensor,
    stride: usize,
    pad: usize,
    with_bias: bool,
) -> Result<(Tensor, Tensor, Option<Tensor>), TensorError> {
    let os = conv2d_shape(x.shape(), kern.shape(), stride, pad)?;
    debug_assert_eq!(gout.shape(), os);
    let [n, co, oh, ow] = os;
    let (ci, h, w) = (x.shape()[1], x.shape()[2], x.shape()[3]);
    let (kh, kw) = (kern.shape()[2], kern.shape()[3]);
    let mut gx = Tensor::zeros(x.shape());
    let mut gk = Tensor::zeros(kern.shape());
    let gd = gout.data();
    let xd = x.data();
    let kd = kern.data();
    {
        let gxd = gx.data_mut();
        for ni in 0..n {
            for c_out in 0..co {
                let obase = ((ni * co + c_out) * oh) * ow;
                for c_in in 0..ci {
                    let xbase = ((ni * ci + c_in) * h) * w;
                    for ky in 0..kh {
                        for kx in 0..kw {
                            let kidx = ((c_out * ci + c_in) * kh + ky) * kw + kx;
                            let wv = kd[kidx];
                            let mut acc = 0.0;
                            for oy in 0..oh {
                                let iy = (oy * stride + ky) as isize - pad as isize;
                                if iy < 0 || iy >= h as isize {
                                    continue;
                                }
                                let ox_lo = ox_low(kx, pad, stride);
                                let ox_hi = ox_high(kx, pad, stride, w, ow);
                                if ox_lo >= ox_hi {
                                    continue;
                                }
                                let grow = &gd[obase + oy * ow..obase + (oy + 1) * ow];
                                let xrow = &xd[xbase + (iy as usize) * w..];
                                let gxrow = &mut gxd[xbase + (iy as usize) * w
                                    ..xbase + (iy as usize + 1) * w];
                                for ox in ox_lo..ox_hi {
                                    let ix =
                                        ((ox * stride + kx) as isize - pad as isize) as usize;
                                    acc += grow[ox] * xrow[ix];
                                    gxrow[ix] += wv * grow[ox];
                                }
                            }
                            gk.data_mut()[kidx] += acc;
                        }
                    }
                }
            }
        }
    }
    let gb = if with_bias {
        let mut gb = Tensor::zeros(&[co]);
        for ni in 0..n {
            for c_out in 0..co {
                let obase = ((ni * co + c_out) * oh) * ow;
                let s: f64 = gd[obase..obase + oh * ow].iter().sum();
                gb.data_mut()[c_out] += s;
            }
        }
        Some(gb)
    } else {
        None
    };
    Ok((gx, gk, gb))
}

/// x:[n,di] * w:[do,di]^T + b -> [n,do]
pub fn linear_forward(
    x: &Tensor,
    w: &Tensor,
    b: Option<&Tensor>,
) -> Result<Tensor, TensorError> {
    if x.ndim() != 2 || w.ndim() != 2 || x.shape()[1] != w.shape()[1] {
        return Err(TensorError::ShapeMismatch {
            context: "linear",
            expected: w.shape().to_vec(),
            got: x.shape().to_vec(),
        });
    }
    let (n, di) = (x.shape()[0], x.shape()[1]);
    let dout = w.shape()[0];
    if let Some(b) = b {
        if b.shape() != [dout] {
            return Err(TensorError::ShapeMismatch {
                context: "linear bias",
                expected: vec![dout],
                got: b.shape().to_vec(),
            });
        }
    }
    let mut out = Tensor::zeros(&[n, dout]);
    for ni in 0..n {
        let xrow = &x.data()[ni * di..(ni + 1) * di];
        for o in 0..dout {
            let wrow = &w.data()[o * di..(o + 1) * di];
            let mut acc = match b {
                Some(b) => b.data()[o],
                None => 0.0,
            };
            for (xv, wv) in xrow.iter().zip(wrow) {
                acc += xv * wv;
            }
            out.data_mut()[ni * dout + o] = acc;
        }
    }
    Ok(out)
}

pub fn linear_backward(
    x: &Tensor,
    w: &Tensor,
    gout: &Tensor,
    with_bias: bool,
) -> (Tensor, Tensor, Option<Tensor>) {
    let (n, di) = (x.shape()[0], x.shape()[1]);
    let dout = w.shape()[0];
    let mut gx = Tensor::zeros(x.shape());
    let mut gw = Tensor::zeros(w.shape());
    for ni in 0..n {
        let xrow = &x.data()[ni * di..(ni + 1) * di];
        for o in 0..dout {
            let g = gout.data()[ni * dout + o];
            if g == 0.0 {
                continue;
            }
            let wrow = &w.data()[o * di..(o + 1) * di];
            let gxrow = &mut gx.data_mut()[ni * di..(ni + 1) * di];
            for i in 0..di {
                gxrow[i] += g * wrow[i];
            }
            let gwrow = &mut gw.data_mut()[o * di..(o + 1) * di];
            for i in 0..di {
                gwrow[i] += g * xrow[i];
            }
        }
    }
    let gb = if with_bias {
        let mut gb = Tensor::zeros(&[dout]);
        for ni in 0..n {
            for o in 0..dout {
                gb.data_mut()[o] += gout.data()[ni * dout + o];
            }
        }
        Some(gb)
    } else {
        None
    };
    (gx, gw, gb)
}

/// Max pooling over k x k windows. Returns output and the flat input
/// index of each window maximum (first occurrence in scan order).
pub fn maxpool2d_forward(
    x: &Tensor,
    k: usize,
    stride: usize,
) -> Result<(Tensor, Vec<usize>), TensorError> {
    if x.ndim() != 4 || k == 0 || stride == 0 {
        return Err(TensorError::ShapeMismatch {
            context: "maxpool2d",
            expected: vec![4],
            got: x.shape().to_vec(),
        });
    }
    let (n, c, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3]);
    let oh = conv_out_size(h, k, stride, 0).ok_or(TensorError::ShapeMismatch {
        context: "maxpool2d window larger than input",
        expected: vec![k, k],
        got: x.shape().to_vec(),
    })?;
    let ow = conv_out_size(w, k, stride, 0).unwrap();
    let mut out = Tensor::zeros(&[n, c, oh, ow]);
    let mut arg = vec![0usize; n * c * oh * ow];
    let xd = x.data();
    for ni in 0..n {
        for ci in 0..c {
            let xbase = ((ni * c + ci) * h) * w;
            let obase = ((ni * c + ci) * oh) * ow;
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut best = f64::NEG_INFINITY;
                    let mut bi = 0usize;
                    for dy in 0..k {
                        let iy = oy * stride + dy;
                        for dx in 0..k {
                            let ix = ox * stride + dx;
                            let v = xd[xbase + iy * w + ix];
                            if v > best {
                                best = v;
                                bi = xbase + iy * w + ix;
                            }
                        }
                    }
                    out.data_mut()[obase + oy * ow + ox] = best;
                    arg[obase + oy * ow + ox] = bi;
                }
            }
        }
    }
    Ok((out, arg))
}

pub fn maxpool2d_backward(x_shape: &[usize], arg: &[usize], gout: &Tensor) -> Tensor {
    let mut gx = Tensor::zeros(x_shape);
    for (gi, &src) in gout.data().iter().zip(arg.iter()) {
        gx.data_mut()[src] += gi;
    }
    gx
}

/// Mean cross-entropy over the batch; also returns softmax probabilities.
pub fn softmax_cross_entropy_forward(
    logits: &Tensor,
    labels: &[usize],
) -> Result<(f64, Tensor), TensorError> {
    if logits.ndim() != 2 || logits.shape()[0] != labels.len() {
        return Err(TensorError::ShapeMismatch {
            context: "softmax_cross_entropy",
            expected: vec![labels.len()],
            got: logits.shape().to_vec(),
        });
    }
    let (n, m) = (logits.shape()[0], logits.shape()[1]);
    for &l in labels {
        if l >= m {
            return Err(TensorError::ShapeMismatch {
                context: "cross_entropy label out of range",
                expected: vec![m],
                got: vec![l],
            });
        }
    }
    let mut probs = Tensor::zeros(&[n, m]);
    let mut loss = 0.0;
    for ni in 0..n {
        let row = &logits.data()[ni * m..(ni + 1) * m];
        let mx = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let mut denom = 0.0;
        for &v in row {
            denom += (v - mx).exp();
        }
        let lse = mx + denom.ln();
        loss += lse - row[labels[ni]];
        let prow = &mut probs.data_mut()[ni * m..(ni + 1) * m];
        for (p, &v) in prow.iter_mut().zip(row) {
            *p = (v - mx).exp() / denom;
        }
    }
    Ok((loss / n as f64, probs))
}

pub fn softmax_cross_entropy_backward(probs: &Tensor, labels: &[usize], gloss: f64) -> Tensor {
    let (n, m) = (probs.shape()[0], probs.shape()[1]);
    let mut g = probs.clone();
    for ni in 0..n {
        g.data_mut()[ni * m + labels[ni]] -= 1.0;
    }
    let scale = gloss / n as f64;
    for v in g.data_mut() {
        *v *= scale;
    }
    g
}

pub fn concat_forward(parts: &[&Tensor], axis: usize) -> Result<Tensor, TensorError> {
    if parts.is_empty() {
        return Err(TensorError::ShapeMismatch {
            context: "concat of zero tensors",
            expected: vec![1],
            got: vec![0],
        });
    }
    let nd = parts[0].ndim();
    if axis >= nd {
        return Err(TensorError::ShapeMismatch {
            context: "concat axis",
            expected: vec![nd],
            got: vec![axis],
        });
    }
    let mut shape = parts[0].shape().to_vec();
    for p in &parts[1..] {
        if p.ndim() != nd {
            return Err(TensorError::ShapeMismatch {
                context: "concat rank",
                expected: shape.clone(),
                got: p.shape().to_vec(),
            });
        }
        for d in 0..nd {
            if d != axis && p.shape()[d] != shape[d] {
                return Err(TensorError::ShapeMismatch {
                    context: "concat shape",
                    expected: shape.clone(),
                    got: p.shape().to_vec(),
                });
            }
        }
        shape[axis] += p.shape()[axis];
    }
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = Tensor::zeros(&shape);
    let total_axis = shape[axis];
    let mut offset = 0usize;
    for p in parts {
        let pa = p.shape()[axis];
        for o in 0..outer {
            let src = &p.data()[o * pa * inner..(o + 1) * pa * inner];
            let dst_start = (o * total_axis + offset) * inner;
            out.data_mut()[dst_start..dst_start + pa * inner].copy_from_slice(src);
        }
        offset += pa;
    }
    Ok(out)
}

pub fn concat_backward(parts: &[&[usize]], axis: usize, gout: &Tensor) -> Vec<Tensor> {
    let shape = gout.shape().to_vec();
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let total_axis = shape[axis];
    let mut grads = Vec::with_capacity(parts.len());
    let mut offset = 0usize;
    for pshape in parts {
        let pa = pshape[axis];
        let mut g = Tensor::zeros(pshape);
        for o in 0..outer {
            let src_start = (o * total_axis + offset) * inner;
            g.data_mut()[o * pa * inner..(o + 1) * pa * inner]
                .copy_from_slice(&gout.data()[src_start..src_start + pa * inner]);
        }
        grads.push(g);
        offset += pa;
    }
    grads
}
