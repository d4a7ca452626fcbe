//! 3D convolution with explicit backward passes, plus the elementwise
//! layers used by the volumetric codecs.
//!
//! Convolutions run as chunked im2col + GEMM. Column transfer works on
//! per-tap segment descriptors so the inner loops are slice copies rather
//! than per-voxel index arithmetic; 1×1×1 convolutions skip im2col
//! entirely. The backward pass computes input gradients via a colᵀ GEMM
//! and segment scatter, and weight gradients via a second GEMM against
//! the same column buffer.

use super::{Scalar, Tensor4};

/// Column buffer budget in elements (K·chunk ≤ this).
const COL_BUDGET: usize = 2 * 1024 * 1024;

/// Cubic-kernel 3D convolution. Weights are laid out
/// `w[co][ci][kz][ky][kx]`, biases per output channel.
#[derive(Debug, Clone)]
pub struct Conv3d<S: Scalar> {
    pub ci: usize,
    pub co: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
    pub w: Vec<S>,
    pub b: Vec<S>,
}

/// Parameter gradients for one [`Conv3d`].
#[derive(Debug, Clone)]
pub struct Conv3dGrad<S: Scalar> {
    pub dw: Vec<S>,
    pub db: Vec<S>,
}

impl<S: Scalar> Conv3dGrad<S> {
    pub fn zeros(layer: &Conv3d<S>) -> Self {
        Conv3dGrad {
            dw: vec![S::ZERO; layer.w.len()],
            db: vec![S::ZERO; layer.b.len()],
        }
    }
}

/// One contiguous run of valid input for a kernel tap: `len` output
/// positions starting at column `dst`, reading the input from `src` with
/// the layer stride.
#[derive(Debug, Clone, Copy)]
struct Segment {
    dst: usize,
    src: usize,
    len: usize,
}

impl<S: Scalar> Conv3d<S> {
    /// Zero-initialized layer; callers randomize weights.
    pub fn new(ci: usize, co: usize, k: usize, stride: usize, pad: usize) -> Self {
        Conv3d {
            ci,
            co,
            k,
            stride,
            pad,
            w: vec![S::ZERO; co * ci * k * k * k],
            b: vec![S::ZERO; co],
        }
    }

    pub fn param_count(&self) -> usize {
        self.w.len() + self.b.len()
    }

    fn out_dim(&self, d: usize) -> usize {
        (d + 2 * self.pad - self.k) / self.stride + 1
    }

    pub fn output_shape(&self, input: [usize; 4]) -> [usize; 4] {
        [
            self.co,
            self.out_dim(input[1]),
            self.out_dim(input[2]),
            self.out_dim(input[3]),
        ]
    }

    /// Valid-input segments of one kernel tap over output voxels
    /// [s0, s0+chunk). Segments are shared across input channels.
    #[allow(clippy::too_many_arguments)]
    fn tap_segments(
        &self,
        segs: &mut Vec<Segment>,
        s0: usize,
        chunk: usize,
        in_shape: [usize; 4],
        out_shape: [usize; 4],
        pad: usize,
        kz: usize,
        ky: usize,
        kx: usize,
    ) {
        segs.clear();
        let [_, d, h, w] = in_shape;
        let [_, _, oh, ow] = out_shape;
        let s = self.stride as isize;
        let p = pad as isize;

        // valid output range along one axis for a tap offset
        let axis_range = |kq: usize, limit: usize, out_limit: usize| -> (usize, usize) {
            let off = kq as isize - p;
            // 0 <= o*s + off < limit
            let lo = if off >= 0 { 0 } else { (-off + s - 1) / s };
            let hi = ((limit as isize - 1 - off) / s).min(out_limit as isize - 1);
            if hi < lo {
                (1, 0)
            } else {
                (lo as usize, hi as usize)
            }
        };

        let (x_lo, x_hi) = axis_range(kx, w, ow);
        if x_lo > x_hi {
            return;
        }
        let seg_len = x_hi - x_lo + 1;
        let ix0 = (x_lo as isize) * s + kx as isize - p;

        let oz0 = s0 / (oh * ow);
        let slices = chunk / (oh * ow);
        for oz in oz0..oz0 + slices {
            let iz = (oz as isize) * s + kz as isize - p;
            if iz < 0 || iz >= d as isize {
                continue;
            }
            let (y_lo, y_hi) = axis_range(ky, h, oh);
            for oy in y_lo..=y_hi {
                let iy = (oy as isize) * s + ky as isize - p;
                segs.push(Segment {
                    dst: ((oz - oz0) * oh + oy) * ow + x_lo,
                    src: ((iz as usize * h + iy as usize) * w) + ix0 as usize,
                    len: seg_len,
                });
            }
        }
    }

    pub fn forward(&self, x: &Tensor4<S>) -> Tensor4<S> {
        assert_eq!(x.channels(), self.ci, "conv3d input channel mismatch");
        let mut y = self.correlate(x, &self.w, self.co, self.pad);
        let spatial_out = y.spatial();
        let yd: &mut [S] = y.data_mut();
        for c in 0..self.co {
            let bias = self.b[c];
            for v in &mut yd[c * spatial_out..(c + 1) * spatial_out] {
                *v += bias;
            }
        }
        y
    }

    /// Cross-correlation of `x` against a (cout × cin·k³) weight matrix
    /// using this layer's kernel size and stride. Shared by the forward
    /// pass and the transposed-weight input-gradient pass.
    fn correlate(&self, x: &Tensor4<S>, w: &[S], cout: usize, pad: usize) -> Tensor4<S> {
        let in_shape = x.shape();
        let cin = in_shape[0];
        let out_shape = [
            cout,
            (in_shape[1] + 2 * pad - self.k) / self.stride + 1,
            (in_shape[2] + 2 * pad - self.k) / self.stride + 1,
            (in_shape[3] + 2 * pad - self.k) / self.stride + 1,
        ];
        let mut y = Tensor4::zeros(out_shape);
        let spatial_out = out_shape[1] * out_shape[2] * out_shape[3];
        let yd: &mut [S] = y.data_mut();

        if self.k == 1 && self.stride == 1 && pad == 0 {
            // pointwise: y = W(cout×cin)·x(cin×spatial)
            unsafe {
                S::gemm(
                    cout,
                    cin,
                    spatial_out,
                    S::ONE,
                    w.as_ptr(),
                    cin as isize,
                    1,
                    x.data().as_ptr(),
                    spatial_out as isize,
                    1,
                    S::ZERO,
                    yd.as_mut_ptr(),
                    spatial_out as isize,
                    1,
                );
            }
            return y;
        }

        let spatial_in = x.spatial();

        if cout <= 8 && self.stride == 1 && self.k > 1 {
            // few output channels: accumulate tap-by-tap without a column
            // buffer, keeping the output rows cache-resident
            let k3 = self.k * self.k * self.k;
            let xd = x.data();
            let mut segs: Vec<Segment> = Vec::new();
            let mut tap = 0;
            for kz in 0..self.k {
                for ky in 0..self.k {
                    for kx in 0..self.k {
                        self.tap_segments(
                            &mut segs, 0, spatial_out, in_shape, out_shape, pad, kz, ky, kx,
                        );
                        for ci in 0..cin {
                            let xrow = &xd[ci * spatial_in..(ci + 1) * spatial_in];
                            for co in 0..cout {
                                let weight = w[(co * cin + ci) * k3 + tap];
                                let yrow =
                                    &mut yd[co * spatial_out..(co + 1) * spatial_out];
                                for seg in &segs {
                                    let dst = &mut yrow[seg.dst..seg.dst + seg.len];
                                    let src = &xrow[seg.src..seg.src + seg.len];
                                    for (dv, sv) in dst.iter_mut().zip(src) {
                                        *dv += weight * *sv;
                                    }
                                }
                            }
                        }
                        tap += 1;
                    }
                }
            }
            return y;
        }

        let kk = cin * self.k * self.k * self.k;
        let chunk_cap = chunk_voxels(kk, out_shape);
        let mut col = vec![S::ZERO; kk * chunk_cap];
        let mut segs = vec![Vec::new(); self.k * self.k * self.k];
        let xd = x.data();

        let mut s0 = 0;
        while s0 < spatial_out {
            let chunk = chunk_cap.min(spatial_out - s0);
            self.collect_segments(&mut segs, s0, chunk, in_shape, out_shape, pad);
            fill_col(
                &mut col, &segs, chunk, chunk_cap, xd, spatial_in, cin, self.k, self.stride,
            );
            unsafe {
                S::gemm(
                    cout,
                    kk,
                    chunk,
                    S::ONE,
                    w.as_ptr(),
                    kk as isize,
                    1,
                    col.as_ptr(),
                    chunk_cap as isize,
                    1,
                    S::ZERO,
                    yd.as_mut_ptr().add(s0),
                    spatial_out as isize,
                    1,
                );
            }
            s0 += chunk;
        }
        y
    }

    fn collect_segments(
        &self,
        segs: &mut [Vec<Segment>],
        s0: usize,
        chunk: usize,
        in_shape: [usize; 4],
        out_shape: [usize; 4],
        pad: usize,
    ) {
        let mut tap = 0;
        for kz in 0..self.k {
            for ky in 0..self.k {
                for kx in 0..self.k {
                    let mut v = std::mem::take(&mut segs[tap]);
                    self.tap_segments(&mut v, s0, chunk, in_shape, out_shape, pad, kz, ky, kx);
                    segs[tap] = v;
                    tap += 1;
                }
            }
        }
    }

    /// Gradients w.r.t. input and parameters. `x` is the forward input;
    /// parameter gradients accumulate into `grad`.
    pub fn backward(
        &self,
        x: &Tensor4<S>,
        dy: &Tensor4<S>,
        grad: &mut Conv3dGrad<S>,
    ) -> Tensor4<S> {
        let in_shape = x.shape();
        let out_shape = self.output_shape(in_shape);
        assert_eq!(dy.shape(), out_shape, "conv3d backward shape mismatch");
        let spatial_in = x.spatial();
        let spatial_out = out_shape[1] * out_shape[2] * out_shape[3];
        let dyd = dy.data();

        for c in 0..self.co {
            let mut acc = S::ZERO;
            for &g in &dyd[c * spatial_out..(c + 1) * spatial_out] {
                acc += g;
            }
            grad.db[c] += acc;
        }

        self.accumulate_dw(x, dy, grad);

        if self.stride == 1 {
            // input gradient as a cross-correlation of dy with
            // channel-swapped, spatially flipped weights
            let k3 = self.k * self.k * self.k;
            let mut wt = vec![S::ZERO; self.w.len()];
            for co in 0..self.co {
                for ci in 0..self.ci {
                    for kz in 0..self.k {
                        for ky in 0..self.k {
                            for kx in 0..self.k {
                                let src = ((co * self.ci + ci) * k3)
                                    + (kz * self.k + ky) * self.k
                                    + kx;
                                let dst = ((ci * self.co + co) * k3)
                                    + ((self.k - 1 - kz) * self.k + (self.k - 1 - ky)) * self.k
                                    + (self.k - 1 - kx);
                                wt[dst] = self.w[src];
                            }
                        }
                    }
                }
            }
            return self.correlate(dy, &wt, self.ci, self.k - 1 - self.pad);
        }

        // strided: dcol GEMM + segment scatter
        let mut dx = Tensor4::zeros(in_shape);
        let dxd: &mut [S] = dx.data_mut();
        let kk = self.ci * self.k * self.k * self.k;
        let k3 = self.k * self.k * self.k;
        let chunk_cap = chunk_voxels(kk, out_shape);
        let mut dcol = vec![S::ZERO; kk * chunk_cap];
        let mut segs = vec![Vec::new(); k3];

        let mut s0 = 0;
        while s0 < spatial_out {
            let chunk = chunk_cap.min(spatial_out - s0);
            self.collect_segments(&mut segs, s0, chunk, in_shape, out_shape, self.pad);
            unsafe {
                // dcol(kk×chunk) = Wᵀ(kk×co)·dY(co×chunk)
                S::gemm(
                    kk,
                    self.co,
                    chunk,
                    S::ONE,
                    self.w.as_ptr(),
                    1,
                    kk as isize,
                    dyd.as_ptr().add(s0),
                    spatial_out as isize,
                    1,
                    S::ZERO,
                    dcol.as_mut_ptr(),
                    chunk_cap as isize,
                    1,
                );
            }
            for (tap, tap_segs) in segs.iter().enumerate() {
                for ci in 0..self.ci {
                    let row = ci * k3 + tap;
                    let src_row = &dcol[row * chunk_cap..row * chunk_cap + chunk];
                    let dst = &mut dxd[ci * spatial_in..(ci + 1) * spatial_in];
                    for seg in tap_segs {
                        for j in 0..seg.len {
                            dst[seg.src + j * self.stride] += src_row[seg.dst + j];
                        }
                    }
                }
            }
            s0 += chunk;
        }
        dx
    }

    /// Accumulate weight gradients. Stride-1 kernels use direct per-tap
    /// segment dot products (no column buffer); strided kernels go through
    /// im2col + GEMM.
    fn accumulate_dw(&self, x: &Tensor4<S>, dy: &Tensor4<S>, grad: &mut Conv3dGrad<S>) {
        let in_shape = x.shape();
        let out_shape = self.output_shape(in_shape);
        let spatial_in = x.spatial();
        let spatial_out = out_shape[1] * out_shape[2] * out_shape[3];
        let dyd = dy.data();

        if self.stride == 1 && self.k > 1 && self.co <= 8 {
            let k3 = self.k * self.k * self.k;
            let xd = x.data();
            let mut segs: Vec<Segment> = Vec::new();
            let mut tap = 0;
            for kz in 0..self.k {
                for ky in 0..self.k {
                    for kx in 0..self.k {
                        self.tap_segments(
                            &mut segs, 0, spatial_out, in_shape, out_shape, self.pad, kz, ky, kx,
                        );
                        for ci in 0..self.ci {
                            let xrow = &xd[ci * spatial_in..(ci + 1) * spatial_in];
                            for co in 0..self.co {
                                let dyrow = &dyd[co * spatial_out..(co + 1) * spatial_out];
                                let mut acc = S::ZERO;
                                for seg in &segs {
                                    let a = &dyrow[seg.dst..seg.dst + seg.len];
                                    let b = &xrow[seg.src..seg.src + seg.len];
                                    for (av, bv) in a.iter().zip(b) {
                                        acc += *av * *bv;
                                    }
                                }
                                grad.dw[(co * self.ci + ci) * k3 + tap] += acc;
                            }
                        }
                        tap += 1;
                    }
                }
            }
            return;
        }

        if self.k == 1 && self.stride == 1 && self.pad == 0 {
            unsafe {
                // dW(co×ci) += dY(co×S)·Xᵀ(S×ci)
                S::gemm(
                    self.co,
                    spatial_out,
                    self.ci,
                    S::ONE,
                    dyd.as_ptr(),
                    spatial_out as isize,
                    1,
                    x.data().as_ptr(),
                    1,
                    spatial_out as isize,
                    S::ONE,
                    grad.dw.as_mut_ptr(),
                    self.ci as isize,
                    1,
                );
            }
            return;
        }

        let xd = x.data();
        let kk = self.ci * self.k * self.k * self.k;
        let chunk_cap = chunk_voxels(kk, out_shape);
        let mut col = vec![S::ZERO; kk * chunk_cap];
        let mut segs = vec![Vec::new(); self.k * self.k * self.k];

        let mut s0 = 0;
        while s0 < spatial_out {
            let chunk = chunk_cap.min(spatial_out - s0);
            self.collect_segments(&mut segs, s0, chunk, in_shape, out_shape, self.pad);
            fill_col(
                &mut col, &segs, chunk, chunk_cap, xd, spatial_in, self.ci, self.k, self.stride,
            );
            unsafe {
                S::gemm(
                    self.co,
                    chunk,
                    kk,
                    S::ONE,
                    dyd.as_ptr().add(s0),
                    spatial_out as isize,
                    1,
                    col.as_ptr(),
                    1,
                    chunk_cap as isize,
                    S::ONE,
                    grad.dw.as_mut_ptr(),
                    kk as isize,
                    1,
                );
            }
            s0 += chunk;
        }
    }
}

/// Chunk size in output voxels, a whole number of z-slices.
fn chunk_voxels(kk: usize, out_shape: [usize; 4]) -> usize {
    let slice = out_shape[2] * out_shape[3];
    let slices_fit = (COL_BUDGET / (kk * slice)).max(1);
    (slices_fit.min(out_shape[1])) * slice
}

#[allow(clippy::too_many_arguments)]
fn fill_col<S: Scalar>(
    col: &mut [S],
    segs: &[Vec<Segment>],
    chunk: usize,
    chunk_cap: usize,
    xd: &[S],
    spatial_in: usize,
    cin: usize,
    k: usize,
    stride: usize,
) {
    let k3 = k * k * k;
    for (tap, tap_segs) in segs.iter().enumerate() {
        for ci in 0..cin {
            let row = ci * k3 + tap;
            let dst_row = &mut col[row * chunk_cap..row * chunk_cap + chunk];
            dst_row.fill(S::ZERO);
            let src = &xd[ci * spatial_in..(ci + 1) * spatial_in];
            if stride == 1 {
                for seg in tap_segs {
                    dst_row[seg.dst..seg.dst + seg.len]
                        .copy_from_slice(&src[seg.src..seg.src + seg.len]);
                }
            } else {
                for seg in tap_segs {
                    for j in 0..seg.len {
                        dst_row[seg.dst + j] = src[seg.src + j * stride];
                    }
                }
            }
        }
    }
}

/// Nearest-neighbor 2× spatial upsample.
pub fn upsample2_forward<S: Scalar>(x: &Tensor4<S>) -> Tensor4<S> {
    let [c, d, h, w] = x.shape();
    let mut y = Tensor4::zeros([c, d * 2, h * 2, w * 2]);
    let xd = x.data();
    let yd: &mut [S] = y.data_mut();
    let (oh, ow) = (h * 2, w * 2);
    for ci in 0..c {
        for oz in 0..d * 2 {
            for oy in 0..oh {
                let src_row = ((ci * d + oz / 2) * h + oy / 2) * w;
                let dst_row = ((ci * d * 2 + oz) * oh + oy) * ow;
                for ox in 0..ow {
                    yd[dst_row + ox] = xd[src_row + ox / 2];
                }
            }
        }
    }
    y
}

/// Backward of [`upsample2_forward`]: each input voxel sums its 8 children.
pub fn upsample2_backward<S: Scalar>(dy: &Tensor4<S>, in_shape: [usize; 4]) -> Tensor4<S> {
    let [c, d, h, w] = in_shape;
    let mut dx = Tensor4::zeros(in_shape);
    let dyd = dy.data();
    let dxd: &mut [S] = dx.data_mut();
    let (oh, ow) = (h * 2, w * 2);
    for ci in 0..c {
        for oz in 0..d * 2 {
            for oy in 0..oh {
                let dst_row = ((ci * d + oz / 2) * h + oy / 2) * w;
                let src_row = ((ci * d * 2 + oz) * oh + oy) * ow;
                for ox in 0..ow {
                    dxd[dst_row + ox / 2] += dyd[src_row + ox];
                }
            }
        }
    }
    dx
}

fn sigmoid<S: Scalar>(x: S) -> S {
    S::ONE / (S::ONE + (-x).exp())
}

/// SiLU activation x·σ(x).
pub fn silu_forward<S: Scalar>(x: &Tensor4<S>) -> Tensor4<S> {
    x.map(|v| v * sigmoid(v))
}

pub fn silu_backward<S: Scalar>(x: &Tensor4<S>, dy: &Tensor4<S>) -> Tensor4<S> {
    assert_eq!(x.shape(), dy.shape());
    let data = x
        .iter()
        .zip(dy.iter())
        .map(|(&v, &g)| {
            let s = sigmoid(v);
            g * (s * (S::ONE + v * (S::ONE - s)))
        })
        .collect();
    Tensor4::from_data(x.shape(), data)
}

/// Saturating output activation mapping ℝ → (0,1).
pub fn sigmoid_forward<S: Scalar>(x: &Tensor4<S>) -> Tensor4<S> {
    x.map(sigmoid)
}

/// Backward given the forward *output* y = σ(x).
pub fn sigmoid_backward<S: Scalar>(y: &Tensor4<S>, dy: &Tensor4<S>) -> Tensor4<S> {
    assert_eq!(y.shape(), dy.shape());
    let data = y
        .iter()
        .zip(dy.iter())
        .map(|(&yv, &g)| g * yv * (S::ONE - yv))
        .collect();
    Tensor4::from_data(y.shape(), data)
}
