// throwaway: pure GEMM throughput at tokenizer shapes
use std::time::Instant;

fn main() {
    for &(m, k, n) in &[(32usize, 192usize, 4096usize), (64, 2048, 512), (128, 4096, 64), (64, 3456, 512), (32, 1728, 4096), (3, 864, 8192)] {
        let a = vec![1.0f32; m * k];
        let b = vec![1.0f32; k * n];
        let mut c = vec![0.0f32; m * n];
        let t0 = Instant::now();
        let mut iters = 0;
        while t0.elapsed().as_secs_f64() < 1.0 {
            unsafe {
                matrixmultiply::sgemm(m, k, n, 1.0, a.as_ptr(), k as isize, 1, b.as_ptr(), n as isize, 1, 0.0, c.as_mut_ptr(), n as isize, 1);
            }
            iters += 1;
        }
        let gflops = (2.0 * m as f64 * k as f64 * n as f64 * iters as f64) / t0.elapsed().as_secs_f64() / 1e9;
        println!("({m:4},{k:5},{n:5}): {gflops:.1} GFLOP/s");
    }
}
