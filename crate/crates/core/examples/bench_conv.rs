// throwaway throughput probe
use acetone::nn::{Conv3d, Conv3dGrad, Tensor4};
use std::time::Instant;

fn bench<S: acetone::nn::Scalar>(name: &str) {
    // the three encoder convs + three decoder convs at production shapes
    let enc1 = Conv3d::<S>::new(3, 32, 4, 2, 1);
    let enc2 = Conv3d::<S>::new(32, 64, 4, 2, 1);
    let enc3 = Conv3d::<S>::new(64, 128, 4, 2, 1);
    let proj = Conv3d::<S>::new(128, 64, 1, 1, 0);
    let dembed = Conv3d::<S>::new(64, 128, 1, 1, 0);
    let dec1 = Conv3d::<S>::new(128, 64, 3, 1, 1);
    let dec2 = Conv3d::<S>::new(64, 32, 3, 1, 1);
    let dec3 = Conv3d::<S>::new(32, 3, 3, 1, 1);

    let x = Tensor4::<S>::zeros([3, 32, 32, 32]);
    let t0 = Instant::now();
    let mut n = 0;
    while t0.elapsed().as_secs_f64() < 3.0 {
        let a = enc1.forward(&x);
        let b = enc2.forward(&a);
        let c = enc3.forward(&b);
        let d = proj.forward(&c);
        let e = dembed.forward(&d);
        let e2 = acetone::nn::upsample2_forward(&e);
        let f = dec1.forward(&e2);
        let f2 = acetone::nn::upsample2_forward(&f);
        let g = dec2.forward(&f2);
        let g2 = acetone::nn::upsample2_forward(&g);
        let h = dec3.forward(&g2);
        std::hint::black_box(&h);

        // backward
        let mut g1 = Conv3dGrad::zeros(&dec3);
        let dh = Tensor4::<S>::zeros(h.shape());
        let dg2 = dec3.backward(&g2, &dh, &mut g1);
        let dg = acetone::nn::upsample2_backward(&dg2, g.shape());
        let mut g2g = Conv3dGrad::zeros(&dec2);
        let df2 = dec2.backward(&f2, &dg, &mut g2g);
        let df = acetone::nn::upsample2_backward(&df2, f.shape());
        let mut g3g = Conv3dGrad::zeros(&dec1);
        let de2 = dec1.backward(&e2, &df, &mut g3g);
        let de = acetone::nn::upsample2_backward(&de2, e.shape());
        let mut g4 = Conv3dGrad::zeros(&dembed);
        let dd = dembed.backward(&d, &de, &mut g4);
        let mut g5 = Conv3dGrad::zeros(&proj);
        let dc = proj.backward(&c, &dd, &mut g5);
        let mut g6 = Conv3dGrad::zeros(&enc3);
        let db = enc3.backward(&b, &dc, &mut g6);
        let mut g7 = Conv3dGrad::zeros(&enc2);
        let da = enc2.backward(&a, &db, &mut g7);
        let mut g8 = Conv3dGrad::zeros(&enc1);
        let dx = enc1.backward(&x, &da, &mut g8);
        std::hint::black_box(&dx);
        n += 1;
    }
    let per = t0.elapsed().as_secs_f64() / n as f64;
    // ~0.55 GMAC fwd + ~1.1 GMAC bwd = 1.65 GMAC = 3.3 GFLOP per iter
    println!("{name}: {:.3} s per fwd+bwd sample, {:.1} GFLOP/s, {n} iters", per, 3.3 / per);
}

fn main() {
    bench::<f32>("f32 single-thread");
    bench::<f64>("f64 single-thread");
}
