// throwaway: per-layer timing
use acetone::nn::{Conv3d, Conv3dGrad, Tensor4};
use std::time::Instant;

fn time_layer(name: &str, layer: &Conv3d<f32>, in_shape: [usize; 4]) {
    let x = Tensor4::<f32>::zeros(in_shape);
    let y = layer.forward(&x);
    let dy = Tensor4::<f32>::zeros(y.shape());
    let reps = 20;
    let t0 = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(layer.forward(&x));
    }
    let fwd = t0.elapsed().as_secs_f64() / reps as f64;
    let t0 = Instant::now();
    for _ in 0..reps {
        let mut g = Conv3dGrad::zeros(layer);
        std::hint::black_box(layer.backward(&x, &dy, &mut g));
    }
    let bwd = t0.elapsed().as_secs_f64() / reps as f64;
    println!("{name}: fwd {:.1} ms  bwd {:.1} ms", fwd * 1e3, bwd * 1e3);
}

fn main() {
    time_layer("enc1 3->32 k4s2  in32", &Conv3d::new(3, 32, 4, 2, 1), [3, 32, 32, 32]);
    time_layer("enc2 32->64 k4s2 in16", &Conv3d::new(32, 64, 4, 2, 1), [32, 16, 16, 16]);
    time_layer("enc3 64->128 k4s2 in8", &Conv3d::new(64, 128, 4, 2, 1), [64, 8, 8, 8]);
    time_layer("proj 128->64 k1  in4", &Conv3d::new(128, 64, 1, 1, 0), [128, 4, 4, 4]);
    time_layer("demb 64->128 k1  in4", &Conv3d::new(64, 128, 1, 1, 0), [64, 4, 4, 4]);
    time_layer("dec1 128->64 k3  in8", &Conv3d::new(128, 64, 3, 1, 1), [128, 8, 8, 8]);
    time_layer("dec2 64->32 k3  in16", &Conv3d::new(64, 32, 3, 1, 1), [64, 16, 16, 16]);
    time_layer("dec3 32->3 k3   in32", &Conv3d::new(32, 3, 3, 1, 1), [32, 32, 32, 32]);
}
