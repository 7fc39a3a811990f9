//! Forward and backward kernels for the layers of the network. All tensors
//! are planar `channels x height x width` in row-major order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.plane_len();
        &self.data[c * n..(c + 1) * n]
    }
}

/// Square convolution with "same" zero padding and stride 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conv2d {
    pub out_channels: usize,
    pub in_channels: usize,
    pub kernel: usize,
    /// `[out][in][ky][kx]`
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Valid output range along one axis for kernel offset `d`.
#[inline]
fn span(len: usize, d: isize) -> (usize, usize) {
    let lo = (-d).max(0) as usize;
    let hi = (len as isize - d).min(len as isize).max(0) as usize;
    (lo, hi.max(lo))
}

impl Conv2d {
    pub fn zeros(out_channels: usize, in_channels: usize, kernel: usize) -> Self {
        Self {
            out_channels,
            in_channels,
            kernel,
            weights: vec![0.0; out_channels * in_channels * kernel * kernel],
            bias: vec![0.0; out_channels],
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    #[inline]
    fn widx(&self, co: usize, ci: usize, ky: usize, kx: usize) -> usize {
        ((co * self.in_channels + ci) * self.kernel + ky) * self.kernel + kx
    }

    pub fn forward(&self, x: &Tensor) -> Tensor {
        debug_assert_eq!(x.channels, self.in_channels);
        let (h, w) = (x.height, x.width);
        let n = h * w;
        let pad = (self.kernel / 2) as isize;
        let mut out = Tensor::zeros(self.out_channels, h, w);
        for co in 0..self.out_channels {
            let out_plane = &mut out.data[co * n..(co + 1) * n];
            out_plane.fill(self.bias[co]);
            for ci in 0..self.in_channels {
                let in_plane = &x.data[ci * n..(ci + 1) * n];
                for ky in 0..self.kernel {
                    let dy = ky as isize - pad;
                    let (y0, y1) = span(h, dy);
                    for kx in 0..self.kernel {
                        let dx = kx as isize - pad;
                        let (x0, x1) = span(w, dx);
                        let wv = self.weights[self.widx(co, ci, ky, kx)];
                        for y in y0..y1 {
                            let src = ((y as isize + dy) as usize) * w;
                            let orow = &mut out_plane[y * w + x0..y * w + x1];
                            let irow = &in_plane[(src as isize + x0 as isize + dx) as usize
                                ..(src as isize + x1 as isize + dx) as usize];
                            for (o, i) in orow.iter_mut().zip(irow) {
                                *o += wv * i;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Accumulates parameter gradients into `grad` and returns the gradient
    /// with respect to the input when `need_input_grad` is set.
    pub fn backward(
        &self,
        x: &Tensor,
        d_out: &Tensor,
        grad: &mut Conv2d,
        need_input_grad: bool,
    ) -> Option<Tensor> {
        let (h, w) = (x.height, x.width);
        let n = h * w;
        let pad = (self.kernel / 2) as isize;
        let mut d_in = need_input_grad.then(|| Tensor::zeros(self.in_channels, h, w));
        for co in 0..self.out_channels {
            let g_plane = &d_out.data[co * n..(co + 1) * n];
            grad.bias[co] += g_plane.iter().sum::<f64>();
            for ci in 0..self.in_channels {
                let in_plane = &x.data[ci * n..(ci + 1) * n];
                for ky in 0..self.kernel {
                    let dy = ky as isize - pad;
                    let (y0, y1) = span(h, dy);
                    for kx in 0..self.kernel {
                        let dx = kx as isize - pad;
                        let (x0, x1) = span(w, dx);
                        let wi = self.widx(co, ci, ky, kx);
                        let wv = self.weights[wi];
                        let mut acc = 0.0;
                        for y in y0..y1 {
                            let src = ((y as isize + dy) as usize) * w;
                            let lo = (src as isize + x0 as isize + dx) as usize;
                            let hi = (src as isize + x1 as isize + dx) as usize;
                            let grow = &g_plane[y * w + x0..y * w + x1];
                            let irow = &in_plane[lo..hi];
                            acc += grow.iter().zip(irow).map(|(g, i)| g * i).sum::<f64>();
                            if let Some(d) = d_in.as_mut() {
                                let drow = &mut d.data[ci * n + lo..ci * n + hi];
                                for (di, g) in drow.iter_mut().zip(grow) {
                                    *di += wv * g;
                                }
                            }
                        }
                        grad.weights[wi] += acc;
                    }
                }
            }
        }
        d_in
    }
}

pub fn relu_in_place(t: &mut Tensor) {
    for v in &mut t.data {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// Zeroes `grad` wherever the ReLU output was not positive.
pub fn relu_backward_in_place(activated: &Tensor, grad: &mut Tensor) {
    for (g, &a) in grad.data.iter_mut().zip(&activated.data) {
        if a <= 0.0 {
            *g = 0.0;
        }
    }
}

/// 2x2 max pooling, stride 2. Returns the pooled tensor and, per output
/// element, the flat index of the winning input (first maximum on ties).
pub fn maxpool2(x: &Tensor) -> (Tensor, Vec<usize>) {
    let (oh, ow) = (x.height / 2, x.width / 2);
    let mut out = Tensor::zeros(x.channels, oh, ow);
    let mut argmax = vec![0usize; out.data.len()];
    let n = x.plane_len();
    for c in 0..x.channels {
        for oy in 0..oh {
            for ox in 0..ow {
                let base = c * n + 2 * oy * x.width + 2 * ox;
                let candidates = [base, base + 1, base + x.width, base + x.width + 1];
                let mut best = candidates[0];
                for &i in &candidates[1..] {
                    if x.data[i] > x.data[best] {
                        best = i;
                    }
                }
                let o = c * oh * ow + oy * ow + ox;
                out.data[o] = x.data[best];
                argmax[o] = best;
            }
        }
    }
    (out, argmax)
}

pub fn maxpool2_backward(input_shape: (usize, usize, usize), argmax: &[usize], d_out: &Tensor) -> Tensor {
    let (c, h, w) = input_shape;
    let mut d_in = Tensor::zeros(c, h, w);
    for (&src, &g) in argmax.iter().zip(&d_out.data) {
        d_in.data[src] += g;
    }
    d_in
}

/// Nearest-neighbour 2x upsampling.
pub fn upsample2(x: &Tensor) -> Tensor {
    let (oh, ow) = (x.height * 2, x.width * 2);
    let mut out = Tensor::zeros(x.channels, oh, ow);
    for c in 0..x.channels {
        for y in 0..oh {
            for xx in 0..ow {
                out.data[c * oh * ow + y * ow + xx] =
                    x.data[c * x.plane_len() + (y / 2) * x.width + xx / 2];
            }
        }
    }
    out
}

pub fn upsample2_backward(d_out: &Tensor) -> Tensor {
    let (h, w) = (d_out.height / 2, d_out.width / 2);
    let mut d_in = Tensor::zeros(d_out.channels, h, w);
    let n_out = d_out.plane_len();
    for c in 0..d_out.channels {
        for y in 0..d_out.height {
            for x in 0..d_out.width {
                d_in.data[c * h * w + (y / 2) * w + x / 2] += d_out.data[c * n_out + y * d_out.width + x];
            }
        }
    }
    d_in
}
