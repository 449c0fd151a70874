use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Smallest diagonal term added to the correlation matrix.
pub const JITTER: f64 = 1e-6;

const LENGTHSCALES: [f64; 8] = [0.03, 0.05, 0.08, 0.13, 0.2, 0.35, 0.6, 1.0];
const NOISE_RATIOS: [f64; 3] = [JITTER, 1e-3, 1e-2];

/// Zero-mean GP on standardised targets with an anisotropic
/// squared-exponential kernel over the unit square.
///
/// Length scales and the noise-to-signal ratio are picked by maximum
/// marginal likelihood over a fixed grid; the signal variance is profiled
/// out in closed form.
#[derive(Debug, Clone)]
pub struct GaussianProcess {
    x: Vec<[f64; 2]>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    pub lengthscales: [f64; 2],
    pub noise_ratio: f64,
    signal_var: f64,
    y_mean: f64,
    y_scale: f64,
}

fn corr(a: &[f64; 2], b: &[f64; 2], l: &[f64; 2]) -> f64 {
    let d0 = (a[0] - b[0]) / l[0];
    let d1 = (a[1] - b[1]) / l[1];
    (-0.5 * (d0 * d0 + d1 * d1)).exp()
}

/// Cholesky of `r + noise·I`, raising the diagonal tenfold until it succeeds.
fn factor(r: &DMatrix<f64>, mut noise: f64) -> (Cholesky<f64, Dyn>, f64) {
    loop {
        let mut m = r.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += noise;
        }
        if let Some(c) = Cholesky::new(m) {
            return (c, noise);
        }
        noise *= 10.0;
    }
}

impl GaussianProcess {
    pub fn fit(x: &[[f64; 2]], y: &[f64]) -> Self {
        assert!(!x.is_empty() && x.len() == y.len());
        let n = y.len();
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n as f64;
        let y_scale = if var > 1e-24 { var.sqrt() } else { 1.0 };
        let yn = DVector::from_iterator(n, y.iter().map(|v| (v - y_mean) / y_scale));

        let mut best: Option<(f64, GaussianProcess)> = None;
        for &l0 in &LENGTHSCALES {
            for &l1 in &LENGTHSCALES {
                let l = [l0, l1];
                let r = DMatrix::from_fn(n, n, |i, j| corr(&x[i], &x[j], &l));
                for &eta in &NOISE_RATIOS {
                    let (chol, eta) = factor(&r, eta);
                    let alpha = chol.solve(&yn);
                    let quad = yn.dot(&alpha).max(1e-300);
                    let signal_var = quad / n as f64;
                    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
                    let nll = 0.5 * n as f64 * signal_var.ln() + 0.5 * log_det;
                    if best.as_ref().is_none_or(|(b, _)| nll < *b) {
                        best = Some((
                            nll,
                            GaussianProcess {
                                x: x.to_vec(),
                                chol,
                                alpha,
                                lengthscales: l,
                                noise_ratio: eta,
                                signal_var,
                                y_mean,
                                y_scale,
                            },
                        ));
                    }
                }
            }
        }
        best.expect("grid is non-empty").1
    }

    /// Posterior mean and standard deviation in the original units.
    pub fn predict(&self, p: &[f64; 2]) -> (f64, f64) {
        let k = DVector::from_iterator(self.x.len(), self.x.iter().map(|xi| corr(xi, p, &self.lengthscales)));
        let mean = k.dot(&self.alpha);
        let v = self.chol.solve(&k);
        let var = (self.signal_var * (1.0 - k.dot(&v))).max(0.0);
        (self.y_mean + self.y_scale * mean, self.y_scale * var.sqrt())
    }

    /// Expected improvement over `best` for maximisation, with exploration
    /// margin `xi` in the original units.
    pub fn expected_improvement(&self, p: &[f64; 2], best: f64, xi: f64) -> f64 {
        let (mu, sigma) = self.predict(p);
        expected_improvement(mu, sigma, best, xi)
    }
}

pub fn expected_improvement(mu: f64, sigma: f64, best: f64, xi: f64) -> f64 {
    let gain = mu - best - xi;
    if sigma <= 1e-12 {
        return gain.max(0.0);
    }
    let z = gain / sigma;
    let cdf = 0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2);
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    (gain * cdf + sigma * pdf).max(0.0)
}
