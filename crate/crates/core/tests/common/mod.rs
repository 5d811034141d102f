//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use failprob::criteria::QuadratureRule;
use failprob::gp::{CovarianceSpec, Design, FitOptions, KrigingModel, Points, TrendSpec};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Misclassification probability via the standard normal tail.
pub fn tau(mean: f64, sd: f64, u: f64) -> f64 {
    if sd <= 0.0 {
        return if mean == u { 0.5 } else { 0.0 };
    }
    0.5 * libm::erfc((mean - u).abs() / sd / std::f64::consts::SQRT_2)
}

/// Prediction from the bordered system `[K F; Fᵀ 0] [λ; μ] = [k(x); h(x)]`,
/// solved densely by LU.
pub struct DenseKriging {
    system: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    points: Points,
    values: DVector<f64>,
    trend: TrendSpec,
    cov: CovarianceSpec,
}

impl DenseKriging {
    pub fn new(points: &Points, values: &[f64], trend: &TrendSpec, cov: &CovarianceSpec, nugget: f64) -> Self {
        let n = points.len();
        let l = trend.len();
        let mut a = DMatrix::zeros(n + l, n + l);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = cov_direct(cov, points.row(i), points.row(j));
            }
            a[(i, i)] += nugget;
            for (k, h) in trend.eval(points.row(i)).into_iter().enumerate() {
                a[(i, n + k)] = h;
                a[(n + k, i)] = h;
            }
        }
        Self {
            system: a.lu(),
            points: points.clone(),
            values: DVector::from_column_slice(values),
            trend: trend.clone(),
            cov: cov.clone(),
        }
    }

    fn rhs(&self, x: &[f64]) -> DVector<f64> {
        let n = self.points.len();
        let mut r = DVector::zeros(n + self.trend.len());
        for i in 0..n {
            r[i] = cov_direct(&self.cov, self.points.row(i), x);
        }
        for (k, h) in self.trend.eval(x).into_iter().enumerate() {
            r[n + k] = h;
        }
        r
    }

    /// `(λ, μ)` of the bordered system.
    pub fn weights(&self, x: &[f64]) -> (DVector<f64>, DVector<f64>) {
        let sol = self.system.solve(&self.rhs(x)).expect("oracle system is singular");
        let n = self.points.len();
        (sol.rows(0, n).into_owned(), sol.rows(n, self.trend.len()).into_owned())
    }

    pub fn mean(&self, x: &[f64]) -> f64 {
        self.weights(x).0.dot(&self.values)
    }

    pub fn covariance(&self, x: &[f64], y: &[f64]) -> f64 {
        let sol = self.system.solve(&self.rhs(y)).expect("oracle system is singular");
        cov_direct(&self.cov, x, y) - self.rhs(x).dot(&sol)
    }
}

/// Matérn covariance through the scaled distance, written out from the
/// definition (shares only the Bessel routine with the library).
pub fn cov_direct(cov: &CovarianceSpec, x: &[f64], y: &[f64]) -> f64 {
    let h = x
        .iter()
        .zip(y)
        .zip(cov.ranges())
        .map(|((a, b), r)| ((a - b) / r).powi(2))
        .sum::<f64>()
        .sqrt();
    cov.variance() * failprob::gp::matern_correlation(h, cov.smoothness()).unwrap()
}

/// SUR variant 3 at candidate `c` by refitting the model for each value of a
/// 200-point trapezoid rule over `mean ± 8 sd` of the candidate.
pub fn sur3_refit(model: &KrigingModel, sample: &Points, u: f64, c: usize) -> f64 {
    sur3_refit_n(model, sample, u, c, 200)
}

pub fn sur3_refit_n(model: &KrigingModel, sample: &Points, u: f64, c: usize, nodes: usize) -> f64 {
    sur_refit_integrand(model, sample, c, nodes, |mean, sd| tau(mean, sd, u))
}

/// `E (1/m) Σ_j v(mean_{n+1}(Y_j), sd_{n+1}(Y_j))` over the value observed at
/// candidate `c`, by trapezoid rule over `mean ± 8 sd` and full refits.
pub fn sur_refit_integrand(
    model: &KrigingModel,
    sample: &Points,
    c: usize,
    nodes: usize,
    v: impl Fn(f64, f64) -> f64,
) -> f64 {
    let x = sample.row(c);
    let pred = model.predict(x).unwrap();
    let sd = pred.sd();
    let h = 16.0 / (nodes - 1) as f64;
    let mut total = 0.0;
    for k in 0..nodes {
        let s = -8.0 + k as f64 * h;
        let w = if k == 0 || k == nodes - 1 { 0.5 } else { 1.0 } * h * normal_pdf(s);
        let refit = refit_with(model, x, pred.mean + sd * s);
        let avg = sample
            .rows()
            .map(|y| {
                let p = refit.predict(y).unwrap();
                v(p.mean, p.sd())
            })
            .sum::<f64>()
            / sample.len() as f64;
        total += w * avg;
    }
    total
}

/// All four SUR variants at candidate `c`, with the expectation over the
/// observed value taken on the nodes of `rule` and a full refit per node.
pub fn sur_node_refit(model: &KrigingModel, sample: &Points, u: f64, c: usize, rule: &QuadratureRule) -> [f64; 4] {
    let x = sample.row(c);
    let pred = model.predict(x).unwrap();
    let m = sample.len() as f64;
    let mut out = [0.0; 4];
    for (node, w) in rule.nodes.iter().zip(&rule.weights) {
        let refit = refit_with(model, x, pred.mean + pred.sd() * node * std::f64::consts::SQRT_2);
        let mut s = [0.0; 4];
        for y in sample.rows() {
            let p = refit.predict(y).unwrap();
            let t = tau(p.mean, p.sd(), u);
            let nu = t * (1.0 - t);
            s[0] += t.sqrt();
            s[1] += nu.sqrt();
            s[2] += t;
            s[3] += nu;
        }
        out[0] += w * (s[0] / m).powi(2);
        out[1] += w * (s[1] / m).powi(2);
        out[2] += w * s[2] / m;
        out[3] += w * s[3] / m;
    }
    out
}

/// tIMSE at candidate `c` from a full refit (the variance does not depend
/// on the observed value).
pub fn timse_refit(model: &KrigingModel, sample: &Points, u: f64, sigma_eps_sq: f64, c: usize) -> f64 {
    let x = sample.row(c);
    let refit = refit_with(model, x, model.predict(x).unwrap().mean);
    sample
        .rows()
        .map(|y| {
            let now = model.predict(y).unwrap();
            let s = (sigma_eps_sq + now.variance).sqrt();
            refit.predict(y).unwrap().variance * normal_pdf((now.mean - u) / s) / s
        })
        .sum::<f64>()
        / sample.len() as f64
}

pub fn refit_with(model: &KrigingModel, x: &[f64], z: f64) -> KrigingModel {
    let mut pts = model.design().points().clone();
    pts.push(x).unwrap();
    let mut values = model.design().values().to_vec();
    values.push(z);
    let design = Design::new(pts, values).unwrap();
    KrigingModel::fit(design, model.trend().clone(), model.covariance().clone(), model.options()).unwrap()
}

/// `E max(0, κ^δ − |t + U|^δ)` with the integral split at the kinks
/// `u = −t ± κ` and `u = −t`, each piece by composite Simpson.
pub fn g_reference(t: f64, kappa: f64, delta: u8) -> f64 {
    let f = |u: f64| {
        let a = (t + u).abs();
        (kappa.powi(delta as i32) - a.powi(delta as i32)).max(0.0) * normal_pdf(u)
    };
    simpson(f, -t - kappa, -t, 4000) + simpson(f, -t, -t + kappa, 4000)
}

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Random small kriging instance: design in `[0, 1]^d` with well separated
/// points, random Matérn parameters and values.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, d: usize, linear: bool) -> KrigingModel {
    let mut pts = Points::new(d);
    while pts.len() < n {
        let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        if pts.rows().all(|p| failprob::gp::euclidean(p, &x) > 0.05) {
            pts.push(&x).unwrap();
        }
    }
    let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let cov = CovarianceSpec::new(
        rng.gen_range(0.5..3.0),
        rng.gen_range(0.5..4.0),
        (0..d).map(|_| rng.gen_range(0.15..0.8)).collect(),
    )
    .unwrap();
    let trend = if linear { TrendSpec::linear(d) } else { TrendSpec::constant() };
    KrigingModel::fit(Design::new(pts, values).unwrap(), trend, cov, FitOptions::default()).unwrap()
}

/// Gauss–Hermite rule (weight `e^{−x²}`) of any order by Golub–Welsch on
/// the Jacobi matrix.
pub fn hermite_rule(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::zeros(q, q);
    for k in 1..q {
        let b = (k as f64 / 2.0).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = j.symmetric_eigen();
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = (0..q)
        .map(|k| (eig.eigenvalues[k], sqrt_pi * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}
