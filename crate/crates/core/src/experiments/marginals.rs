use num_complex::Complex64;

use super::{z_score, Z_THRESHOLD};
use crate::error::{invalid, Result};
use crate::gaussian::SECOND_MOMENT;
use crate::montecarlo::{Engine, RngStream};
use crate::path::DyadicPath;
use crate::report::{ExperimentReport, ReportBuilder};
use crate::tree::{sample_tree_with, Recursion};

pub const MAX_LEVEL: u32 = 8;

/// Number of U-statistic levels above `n` that are included.
const U_LEVELS: u32 = 4;

#[derive(Clone)]
struct Moments {
    count: u64,
    sum: Vec<Complex64>,
    sum_sq: Vec<f64>,
    sum_quad: Vec<f64>,
    /// Upper-triangular `Σ x_i conj(x_j)` and `Σ x_i x_j` with `|x_i|²|x_j|²`.
    cross: Vec<Complex64>,
    pseudo: Vec<Complex64>,
    cross_sq: Vec<f64>,
}

impl Moments {
    fn new(v: usize) -> Self {
        let pairs = v * (v + 1) / 2;
        Moments {
            count: 0,
            sum: vec![Complex64::new(0.0, 0.0); v],
            sum_sq: vec![0.0; v],
            sum_quad: vec![0.0; v],
            cross: vec![Complex64::new(0.0, 0.0); pairs],
            pseudo: vec![Complex64::new(0.0, 0.0); pairs],
            cross_sq: vec![0.0; pairs],
        }
    }

    fn push(&mut self, x: &[Complex64]) {
        self.count += 1;
        let mut p = 0;
        for i in 0..x.len() {
            let a = x[i].norm_sqr();
            self.sum[i] += x[i];
            self.sum_sq[i] += a;
            self.sum_quad[i] += a * a;
            for j in i..x.len() {
                self.cross[p] += x[i] * x[j].conj();
                self.pseudo[p] += x[i] * x[j];
                self.cross_sq[p] += a * x[j].norm_sqr();
                p += 1;
            }
        }
    }

    fn merge(&mut self, o: &Moments) {
        self.count += o.count;
        let add_c = |a: &mut [Complex64], b: &[Complex64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        let add_f = |a: &mut [f64], b: &[f64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add_c(&mut self.sum, &o.sum);
        add_f(&mut self.sum_sq, &o.sum_sq);
        add_f(&mut self.sum_quad, &o.sum_quad);
        add_c(&mut self.cross, &o.cross);
        add_c(&mut self.pseudo, &o.pseudo);
        add_f(&mut self.cross_sq, &o.cross_sq);
    }
}

/// Checks that `{Z_σ : σ ∈ 2^n} ∪ {U_{σ,k} : σ ∈ 2^n, n ≤ k ≤ n+3}` look
/// like independent standard complex Gaussians: means zero, `E|·|² = 2`,
/// and vanishing covariances `E[X conj Y]` and pseudo-covariances `E[XY]`
/// for every pair (pseudo-variances `E[X²]` included).
///
/// Complex statistics are compared with the root-mean-square standard error
/// of the complex estimate, so `|mean| ≤ 3·SE` has false-alarm rate
/// `e^{-9}` per variable.
pub fn verify_marginals(
    engine: &Engine,
    n: u32,
    samples: usize,
    stream: &RngStream,
    recursion: Recursion,
) -> Result<ExperimentReport> {
    if n > MAX_LEVEL {
        return Err(invalid(format!("marginal check limited to n ≤ {MAX_LEVEL}, got {n}")));
    }
    if samples < 2 {
        return Err(invalid("need at least two samples"));
    }
    let depth = n + U_LEVELS;
    let width = 1usize << n;
    let vars = width * (1 + U_LEVELS as usize);

    let blocks = engine.map_blocks(stream, samples, |rng, count| -> Result<Moments> {
        let mut m = Moments::new(vars);
        let mut x = Vec::with_capacity(vars);
        for _ in 0..count {
            let t = sample_tree_with(depth, recursion, rng)?;
            x.clear();
            x.extend_from_slice(t.level_values(n));
            for k in n..n + U_LEVELS {
                for sigma in DyadicPath::all(n) {
                    x.push(t.u_stat(&sigma, k)?);
                }
            }
            m.push(&x);
        }
        Ok(m)
    });
    let mut total = Moments::new(vars);
    for b in blocks {
        total.merge(&b?);
    }

    let count = total.count as f64;
    let mean: Vec<Complex64> = total.sum.iter().map(|s| s / count).collect();
    let m2: Vec<f64> = total.sum_sq.iter().map(|s| s / count).collect();

    let mut max_mean_z = 0.0f64;
    let mut max_m2_z = 0.0f64;
    let (mut lo_m2, mut hi_m2) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..vars {
        max_mean_z = max_mean_z.max(z_score(mean[i].norm(), (m2[i] / count).sqrt()));
        let var_of_sq = total.sum_quad[i] / count - m2[i] * m2[i];
        max_m2_z = max_m2_z.max(z_score(m2[i] - SECOND_MOMENT, (var_of_sq / count).sqrt()));
        lo_m2 = lo_m2.min(m2[i]);
        hi_m2 = hi_m2.max(m2[i]);
    }

    let mut max_cov_z = 0.0f64;
    let mut max_pseudo_z = 0.0f64;
    let mut p = 0;
    for i in 0..vars {
        for j in i..vars {
            let se = (total.cross_sq[p] / count / count).sqrt();
            if i != j {
                let cov = total.cross[p] / count - mean[i] * mean[j].conj();
                max_cov_z = max_cov_z.max(z_score(cov.norm(), se));
            }
            let pseudo = total.pseudo[p] / count - mean[i] * mean[j];
            max_pseudo_z = max_pseudo_z.max(z_score(pseudo.norm(), se));
            p += 1;
        }
    }

    let mut b = ReportBuilder::new("verify-marginals", stream.master_seed);
    b.param("n", n)
        .param("samples", samples)
        .param("variables", vars)
        .param("u_levels", format!("{}..={}", n, n + U_LEVELS - 1))
        .param(
            "sampler",
            match recursion {
                Recursion::Exact => "exact",
                Recursion::Unnormalized => "unnormalized",
            },
        )
        .observe("max_mean_z", max_mean_z)
        .observe("max_second_moment_z", max_m2_z)
        .observe("max_covariance_z", max_cov_z)
        .observe("max_pseudo_covariance_z", max_pseudo_z)
        .observe("min_second_moment", lo_m2)
        .observe("max_second_moment", hi_m2)
        .max("max_mean_z", Z_THRESHOLD)
        .max("max_second_moment_z", Z_THRESHOLD)
        .max("max_covariance_z", Z_THRESHOLD)
        .max("max_pseudo_covariance_z", Z_THRESHOLD);
    Ok(b.finish())
}
