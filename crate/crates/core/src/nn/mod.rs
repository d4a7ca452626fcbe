//! Minimal reverse-mode differentiation core.
//!
//! Just enough machinery for the tokenizer's 3D convolutional
//! encoder/decoder and the token policy: dense tensors, GEMM-backed
//! convolutions with hand-written backward passes, elementwise
//! activations, and Adam. No graph, no tape; each layer exposes an
//! explicit `forward` and `backward`.

mod adam;
pub mod checkpoint;
mod conv;
mod tensor;

pub use adam::Adam;
pub use conv::{
    sigmoid_backward, sigmoid_forward, silu_backward, silu_forward, upsample2_backward,
    upsample2_forward, Conv3d, Conv3dGrad,
};
pub use tensor::Tensor4;

/// Scalar type the numeric core is generic over.
///
/// Training runs in `f32` for throughput; gradient checks instantiate the
/// same code at `f64` so central finite differences resolve at 1e-3
/// relative error.
pub trait Scalar:
    Copy
    + Default
    + PartialOrd
    + Send
    + Sync
    + std::fmt::Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + std::ops::AddAssign
    + 'static
{
    const ZERO: Self;
    const ONE: Self;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp(self) -> Self;

    /// C ← alpha·A·B + beta·C with caller-provided strides.
    ///
    /// # Safety
    /// Pointers must reference buffers valid for the given shape/strides.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );
}

impl Scalar for f32 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn exp(self) -> Self {
        f32::exp(self)
    }

    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }

    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

/// C(m×n, row-major) ← A(m×k, row-major)·B(k×n, row-major), overwriting C.
pub fn matmul<S: Scalar>(m: usize, k: usize, n: usize, a: &[S], b: &[S], c: &mut [S]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    unsafe {
        S::gemm(
            m,
            k,
            n,
            S::ONE,
            a.as_ptr(),
            k as isize,
            1,
            b.as_ptr(),
            n as isize,
            1,
            S::ZERO,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}
