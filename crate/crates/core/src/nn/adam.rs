//! Adam optimizer over a flat parameter vector.

use super::Scalar;

/// Adam with bias correction. Moments are kept in the same scalar type
/// as the parameters; two trainers with identical seeds and configs
/// produce bit-identical trajectories.
#[derive(Debug, Clone)]
pub struct Adam<S: Scalar> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<S>,
    v: Vec<S>,
}

impl<S: Scalar> Adam<S> {
    pub fn new(lr: f64, param_count: usize) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![S::ZERO; param_count],
            v: vec![S::ZERO; param_count],
        }
    }

    /// One descent step: params ← params − lr·m̂/(√v̂ + ε).
    pub fn step(&mut self, params: &mut [S], grads: &[S]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let b1 = S::from_f64(self.beta1);
        let b2 = S::from_f64(self.beta2);
        let one_m_b1 = S::from_f64(1.0 - self.beta1);
        let one_m_b2 = S::from_f64(1.0 - self.beta2);
        let corr1 = S::from_f64(1.0 / (1.0 - self.beta1.powi(self.t as i32)));
        let corr2 = S::from_f64(1.0 / (1.0 - self.beta2.powi(self.t as i32)));
        let lr = S::from_f64(self.lr);
        let eps = S::from_f64(self.eps);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = b1 * self.m[i] + one_m_b1 * g;
            self.v[i] = b2 * self.v[i] + one_m_b2 * g * g;
            let mh = self.m[i] * corr1;
            let vh = self.v[i] * corr2;
            params[i] = params[i] - lr * mh / (S::from_f64(vh.to_f64().sqrt()) + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converges_on_quadratic() {
        // minimize (p - 3)^2
        let mut p = vec![0.0f64];
        let mut opt = Adam::new(0.1, 1);
        for _ in 0..500 {
            let g = vec![2.0 * (p[0] - 3.0)];
            opt.step(&mut p, &g);
        }
        assert!((p[0] - 3.0).abs() < 1e-3, "got {}", p[0]);
    }

    #[test]
    fn deterministic_trajectory() {
        let run = || {
            let mut p = vec![0.5f32, -0.25];
            let mut opt = Adam::new(0.01, 2);
            for i in 0..100 {
                let g = vec![p[0] * 0.3 + i as f32 * 1e-4, p[1] - 0.1];
                opt.step(&mut p, &g);
            }
            p
        };
        assert_eq!(run(), run());
    }
}
