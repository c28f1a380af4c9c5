use super::{LinearModel, MlpModel, Standardizer};
use crate::linalg::{bce_with_logit, sigmoid, Matrix};

/// A model whose mean cross-entropy can be differentiated analytically.
pub trait Differentiable: Clone {
    fn params(&self) -> Vec<f64>;
    fn set_params(&mut self, p: &[f64]);
    /// Mean binary cross-entropy on raw rows.
    fn loss(&self, x: &Matrix, y: &[u8]) -> f64;
    /// Analytic gradient of [`Differentiable::loss`], in `params` order.
    fn gradient(&self, x: &Matrix, y: &[u8]) -> Vec<f64>;
}

fn standardized(st: &Option<Standardizer>, x: &Matrix) -> Matrix {
    st.as_ref().map_or_else(|| x.clone(), |s| s.apply(x))
}

impl Differentiable for LinearModel {
    fn params(&self) -> Vec<f64> {
        let mut p = self.weights.clone();
        p.push(self.bias);
        p
    }

    fn set_params(&mut self, p: &[f64]) {
        let d = self.weights.len();
        self.weights.copy_from_slice(&p[..d]);
        self.bias = p[d];
    }

    fn loss(&self, x: &Matrix, y: &[u8]) -> f64 {
        let z = standardized(&self.standardizer, x);
        let total: f64 = z
            .iter_rows()
            .zip(y)
            .map(|(r, &t)| bce_with_logit(self.standardized_logit(r), f64::from(t)))
            .sum();
        total / y.len() as f64
    }

    fn gradient(&self, x: &Matrix, y: &[u8]) -> Vec<f64> {
        let z = standardized(&self.standardizer, x);
        let d = self.weights.len();
        let mut g = vec![0.0; d + 1];
        for (r, &t) in z.iter_rows().zip(y) {
            let e = sigmoid(self.standardized_logit(r)) - f64::from(t);
            for (gj, v) in g.iter_mut().zip(r) {
                *gj += e * v;
            }
            g[d] += e;
        }
        g.iter_mut().for_each(|v| *v /= y.len() as f64);
        g
    }
}

impl Differentiable for MlpModel {
    fn params(&self) -> Vec<f64> {
        self.weights
            .iter()
            .chain(&self.biases)
            .flatten()
            .copied()
            .collect()
    }

    fn set_params(&mut self, p: &[f64]) {
        let mut it = p.iter();
        for v in self
            .weights
            .iter_mut()
            .chain(self.biases.iter_mut())
            .flatten()
        {
            *v = *it.next().expect("parameter vector too short");
        }
    }

    fn loss(&self, x: &Matrix, y: &[u8]) -> f64 {
        let z = standardized(&self.standardizer, x);
        let mut acts = Vec::new();
        let total: f64 = z
            .iter_rows()
            .zip(y)
            .map(|(r, &t)| bce_with_logit(self.forward(r, &mut acts), f64::from(t)))
            .sum();
        total / y.len() as f64
    }

    fn gradient(&self, x: &Matrix, y: &[u8]) -> Vec<f64> {
        let z = standardized(&self.standardizer, x);
        let (mut gw, mut gb) = self.zero_grads();
        let mut acts = Vec::new();
        let scale = 1.0 / y.len() as f64;
        for (r, &t) in z.iter_rows().zip(y) {
            let logit = self.forward(r, &mut acts);
            self.backward(
                &acts,
                (sigmoid(logit) - f64::from(t)) * scale,
                &mut gw,
                &mut gb,
            );
        }
        gw.into_iter().chain(gb).flatten().collect()
    }
}

/// Largest relative disagreement between the analytic gradient and central
/// finite differences (step 1e-4), with relative error
/// `|a - f| / max(1e-8, |a| + |f|)`. Meant for small batches (n <= 32).
pub fn grad_check<M: Differentiable>(model: &M, x: &Matrix, y: &[u8]) -> f64 {
    const H: f64 = 1e-4;
    let analytic = model.gradient(x, y);
    let base = model.params();
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for (k, &a) in analytic.iter().enumerate() {
        let mut p = base.clone();
        p[k] = base[k] + H;
        probe.set_params(&p);
        let up = probe.loss(x, y);
        p[k] = base[k] - H;
        probe.set_params(&p);
        let down = probe.loss(x, y);
        let f = (up - down) / (2.0 * H);
        let rel = (a - f).abs() / (a.abs() + f.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    worst
}
