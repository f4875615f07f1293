use crate::engine::ModelWeights;
use crate::Real;

/// Adam over the flattened parameter vector (W1, b1, W2, b2).
#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
}

impl<T: Real> Adam<T> {
    pub fn new(params: usize) -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![T::zero(); params],
            v: vec![T::zero(); params],
            t: 0,
        }
    }

    pub fn step(&mut self, weights: &mut ModelWeights<T>, grads: &ModelWeights<T>, lr: f64) {
        self.t += 1;
        let (b1, b2) = (T::of(self.beta1), T::of(self.beta2));
        let c1 = T::of(1.0 - self.beta1.powi(self.t));
        let c2 = T::of(1.0 - self.beta2.powi(self.t));
        let (lr, eps) = (T::of(lr), T::of(self.eps));
        for (((p, g), m), v) in weights.params_mut().zip(grads.params()).zip(&mut self.m).zip(&mut self.v) {
            *m = b1 * *m + (T::one() - b1) * g;
            *v = b2 * *v + (T::one() - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ModelConfig;

    #[test]
    fn first_step_moves_by_lr() {
        let cfg = ModelConfig { channels: 1, hidden: 1, ..Default::default() };
        let mut w = ModelWeights::<f64>::zeros(cfg);
        let mut g = ModelWeights::<f64>::zeros(cfg);
        g.b2[0] = 5.0;
        g.b1[0] = -0.01;
        let mut opt = Adam::new(cfg.param_count());
        opt.step(&mut w, &g, 0.1);
        assert!((w.b2[0] + 0.1).abs() < 1e-8);
        assert!((w.b1[0] - 0.1).abs() < 1e-6);
        assert_eq!(w.w2[[0, 0]], 0.0);
    }

    #[test]
    fn minimizes_quadratic() {
        let cfg = ModelConfig { channels: 1, hidden: 1, ..Default::default() };
        let mut w = ModelWeights::<f64>::zeros(cfg);
        let mut opt = Adam::new(cfg.param_count());
        for _ in 0..2000 {
            let mut g = ModelWeights::<f64>::zeros(cfg);
            g.b2[0] = 2.0 * (w.b2[0] - 3.0);
            opt.step(&mut w, &g, 0.05);
        }
        assert!((w.b2[0] - 3.0).abs() < 1e-3);
    }
}
