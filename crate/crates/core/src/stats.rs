//! Statistical toolkit: kernel density estimation, the Wilcoxon signed-rank
//! test, Spearman correlation, and the two curve fits used on edge-type
//! incidences (exponential saturation and nested-ANOVA polynomial selection).

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal};
use thiserror::Error;

use crate::model::{AnovaStep, FitResult, ModelError, ModelKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("{0}")]
    Contract(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("test undefined: {0}")]
    Undefined(String),
    #[error("fit did not converge after {iterations} iterations (a={a}, b={b}, rss={rss})")]
    NoConvergence {
        iterations: usize,
        a: f64,
        b: f64,
        rss: f64,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn contract(msg: impl Into<String>) -> StatsError {
    StatsError::Contract(msg.into())
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
pub fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(v: &[f64]) -> Option<Summary> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    Some(Summary {
        mean: mean(v),
        sd: std_dev(v),
        median: quantile_sorted(&s, 0.5),
        min: s[0],
        max: s[s.len() - 1],
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KdeCurve {
    pub xs: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl KdeCurve {
    pub fn integral(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, d)| (x[1] - x[0]) * (d[0] + d[1]) / 2.0)
            .sum()
    }
}

pub const DEFAULT_KDE_POINTS: usize = 512;

/// Silverman's rule of thumb, `0.9 min(sd, IQR/1.34) n^(-1/5)`. A zero IQR
/// falls back to the standard deviation.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let sd = std_dev(values);
    let iqr = quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (values.len() as f64).powf(-0.2)
}

/// Gaussian KDE on `grid_points` evenly spaced points over `[min - 3h, max + 3h]`.
pub fn kde(values: &[f64], grid_points: usize) -> Result<KdeCurve, StatsError> {
    if grid_points < 2 {
        return Err(contract("kde grid needs at least 2 points"));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if values.len() < 2 || lo == hi {
        return Err(StatsError::Degenerate("kde needs at least 2 distinct values".into()));
    }
    let h = silverman_bandwidth(values);
    let start = lo - 3.0 * h;
    let step = (hi - lo + 6.0 * h) / (grid_points - 1) as f64;
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let xs: Vec<f64> = (0..grid_points).map(|i| start + step * i as f64).collect();
    let density = xs
        .iter()
        .map(|&x| {
            norm * values
                .iter()
                .map(|&v| {
                    let z = (x - v) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
        })
        .collect();
    Ok(KdeCurve {
        xs,
        density,
        bandwidth: h,
    })
}

/// Average ranks (1-based) with ties sharing their mid-rank.
pub fn mid_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

pub const WILCOXON_EXACT_MAX_N: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WilcoxonResult {
    /// Signed rank sum `W+ - W-`.
    pub statistic: f64,
    pub w_plus: f64,
    /// Pairs left after dropping zero differences.
    pub n: usize,
    pub p_two_sided: f64,
    pub exact: bool,
}

/// Paired signed-rank test. Zero differences are dropped; the null
/// distribution is exact up to 25 pairs and normal (tie-corrected, no
/// continuity correction) beyond.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult, StatsError> {
    if a.len() != b.len() {
        return Err(contract("paired samples must have equal length"));
    }
    if a.len() < 5 {
        return Err(contract("signed-rank test needs at least 5 pairs"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(StatsError::Undefined("all paired differences are zero".into()));
    }
    let n = diffs.len();
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = mid_ranks(&abs);
    let w_plus: f64 = ranks.iter().zip(&diffs).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let statistic = 2.0 * w_plus - total;

    let p_two_sided = if n <= WILCOXON_EXACT_MAX_N {
        let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
        exact_signed_rank_p(&doubled, (w_plus * 2.0).round() as usize)
    } else {
        let mut tie_term = 0.0;
        let mut sorted = abs.clone();
        sorted.sort_by(f64::total_cmp);
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            tie_term += t * t * t - t;
            i = j + 1;
        }
        let nf = n as f64;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
        let z = (w_plus - total / 2.0) / var.sqrt();
        let normal = Normal::standard();
        (2.0 * normal.sf(z.abs())).min(1.0)
    };
    Ok(WilcoxonResult {
        statistic,
        w_plus,
        n,
        p_two_sided,
        exact: n <= WILCOXON_EXACT_MAX_N,
    })
}

/// Two-sided exact p of the signed-rank sum, ranks doubled to integers.
/// Counts sign assignments through a subset-sum table.
fn exact_signed_rank_p(doubled_ranks: &[usize], observed: usize) -> f64 {
    let max: usize = doubled_ranks.iter().sum();
    let mut counts = vec![0f64; max + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in doubled_ranks {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let total: f64 = counts.iter().sum();
    let lower: f64 = counts[..=observed].iter().sum();
    let upper: f64 = counts[observed..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

/// Pearson correlation of mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(contract("spearman inputs must have equal length"));
    }
    if x.len() < 3 {
        return Err(contract("spearman needs at least 3 points"));
    }
    let rx = mid_ranks(x);
    let ry = mid_ranks(y);
    let (mx, my) = (mean(&rx), mean(&ry));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::Undefined("constant input vector".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// `y = b (1 - exp(-a x))`.
pub fn saturation(a: f64, b: f64, x: f64) -> f64 {
    b * (1.0 - (-a * x).exp())
}

pub fn saturation_rss(a: f64, b: f64, x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(&xi, &yi)| (saturation(a, b, xi) - yi).powi(2)).sum()
}

/// Analytic gradient of the RSS with respect to (a, b).
pub fn saturation_rss_gradient(a: f64, b: f64, x: &[f64], y: &[f64]) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (&xi, &yi) in x.iter().zip(y) {
        let e = (-a * xi).exp();
        let r = b * (1.0 - e) - yi;
        g[0] += 2.0 * r * b * xi * e;
        g[1] += 2.0 * r * (1.0 - e);
    }
    g
}

const EXP_MAX_ITER: usize = 500;

/// Non-linear least squares for the saturation model by damped Gauss-Newton
/// with step halving, started from `b = max(y)`, `a = 1 / mean(x > 0)`.
pub fn fit_exponential_saturation(x: &[f64], y: &[f64]) -> Result<FitResult, StatsError> {
    if x.len() != y.len() {
        return Err(contract("x and y must have equal length"));
    }
    if x.len() < 3 {
        return Err(contract("exponential fit needs at least 3 points"));
    }
    if x.iter().any(|&v| v < 0.0 || !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(contract("exponential fit needs finite data with x >= 0"));
    }
    let n = x.len();
    let positive: Vec<f64> = x.iter().copied().filter(|&v| v > 0.0).collect();
    if positive.is_empty() {
        return Err(StatsError::Degenerate("all x are zero".into()));
    }
    let a0 = 1.0 / mean(&positive);
    let b0 = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let dof = n - 2;

    if y.iter().all(|&v| v == 0.0) {
        return Ok(FitResult::new(
            ModelKind::ExponentialSaturation,
            vec![a0, 0.0],
            0.0,
            dof,
            Vec::new(),
            vec!["b = 0: rate parameter a is unidentifiable".into()],
        )?);
    }

    let (mut a, mut b) = (a0, b0);
    let mut rss = saturation_rss(a, b, x, y);
    let scale = 1.0 + y.iter().map(|v| v * v).sum::<f64>();
    for iter in 0..EXP_MAX_ITER {
        let (mut jtj, mut jtr) = ([[0.0f64; 2]; 2], [0.0f64; 2]);
        for (&xi, &yi) in x.iter().zip(y) {
            let e = (-a * xi).exp();
            let ja = b * xi * e;
            let jb = 1.0 - e;
            let r = b * (1.0 - e) - yi;
            jtj[0][0] += ja * ja;
            jtj[0][1] += ja * jb;
            jtj[1][1] += jb * jb;
            jtr[0] += ja * r;
            jtr[1] += jb * r;
        }
        jtj[1][0] = jtj[0][1];
        let grad_norm = 2.0 * (jtr[0].hypot(jtr[1]));
        if grad_norm <= 1e-12 * (1.0 + rss) || rss <= 1e-30 * scale {
            return finish_exponential(a, b, rss, dof, iter);
        }
        let mut det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        let trace = jtj[0][0] + jtj[1][1];
        if det.abs() <= 1e-14 * trace * trace {
            let mu = 1e-8 * trace.max(1e-300);
            jtj[0][0] += mu;
            jtj[1][1] += mu;
            det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        }
        let da = -(jtj[1][1] * jtr[0] - jtj[0][1] * jtr[1]) / det;
        let db = -(jtj[0][0] * jtr[1] - jtj[1][0] * jtr[0]) / det;

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let (na, nb) = (a + lambda * da, b + lambda * db);
            let new_rss = saturation_rss(na, nb, x, y);
            if new_rss.is_finite() && new_rss <= rss {
                accepted = Some((na, nb, new_rss));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((na, nb, new_rss)) => {
                let step = (na - a).hypot(nb - b);
                let improvement = rss - new_rss;
                a = na;
                b = nb;
                rss = new_rss;
                if step <= 1e-14 * (1.0 + a.hypot(b)) || (improvement <= 1e-15 * rss && step <= 1e-9 * (1.0 + a.hypot(b))) {
                    return finish_exponential(a, b, rss, dof, iter);
                }
            }
            None => {
                if grad_norm <= 1e-6 * (1.0 + rss) {
                    return finish_exponential(a, b, rss, dof, iter);
                }
                return Err(StatsError::NoConvergence {
                    iterations: iter,
                    a,
                    b,
                    rss,
                });
            }
        }
    }
    Err(StatsError::NoConvergence {
        iterations: EXP_MAX_ITER,
        a,
        b,
        rss,
    })
}

fn finish_exponential(a: f64, b: f64, rss: f64, dof: usize, iterations: usize) -> Result<FitResult, StatsError> {
    log::debug!("exponential fit converged in {iterations} iterations");
    let rse = if dof == 0 { 0.0 } else { (rss / dof as f64).sqrt() };
    Ok(FitResult::new(
        ModelKind::ExponentialSaturation,
        vec![a, b],
        rse,
        dof,
        Vec::new(),
        Vec::new(),
    )?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OlsFit {
    /// Lowest degree first.
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub condition_number: f64,
    pub rank: usize,
}

pub fn vandermonde(x: &[f64], order: usize) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), order + 1, |i, j| x[i].powi(j as i32))
}

/// Least squares polynomial of the given order through an SVD
/// pseudo-inverse; tiny singular values are truncated.
pub fn ols_polynomial(x: &[f64], y: &[f64], order: usize) -> Result<OlsFit, StatsError> {
    if x.len() != y.len() {
        return Err(contract("x and y must have equal length"));
    }
    let design = vandermonde(x, order);
    let rhs = DVector::from_column_slice(y);
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let tol = smax * f64::EPSILON * x.len().max(order + 1) as f64;
    let rank = sv.iter().filter(|&&s| s > tol).count();
    let smin = sv.min();
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let coef = svd
        .solve(&rhs, tol)
        .map_err(|e| StatsError::Degenerate(e.to_string()))?;
    let fitted = &design * &coef;
    let residuals: Vec<f64> = rhs.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let rss = residuals.iter().map(|r| r * r).sum();
    Ok(OlsFit {
        coefficients: coef.iter().copied().collect(),
        residuals,
        rss,
        condition_number,
        rank,
    })
}

pub const DEFAULT_MAX_ORDER: usize = 6;
pub const DEFAULT_ALPHA: f64 = 0.05;
const CONDITION_WARNING: f64 = 1e12;

/// Fits orders 1..=max_order, compares each order with the one below it by
/// a nested-model F test and keeps the highest order whose added term is
/// significant at `alpha` (order 1 when none is). A lower order can be
/// insignificant on its own while higher ones are not, so the scan never
/// stops early.
///
/// Residual sums below a noise floor of `n (1e-10 max|y|)^2` count as an
/// exact fit, so noiseless data does not chase rounding error.
pub fn fit_polynomial_anova(
    x: &[f64],
    y: &[f64],
    max_order: usize,
    alpha: f64,
) -> Result<FitResult, StatsError> {
    if max_order < 1 {
        return Err(contract("max_order must be at least 1"));
    }
    if x.len() != y.len() {
        return Err(contract("x and y must have equal length"));
    }
    let n = x.len();
    if n <= max_order + 1 {
        return Err(contract(format!("need more than {} points for order {max_order}", max_order + 1)));
    }
    let fits = (1..=max_order)
        .map(|k| ols_polynomial(x, y, k))
        .collect::<Result<Vec<_>, _>>()?;

    let ymax = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = n as f64 * (1e-10 * ymax).powi(2);
    let mut trace = Vec::with_capacity(max_order.saturating_sub(1));
    let mut order = 1;
    for k in 1..max_order {
        let (small, large) = (&fits[k - 1], &fits[k]);
        let df2 = (n - k - 2) as f64;
        let (f, p) = if small.rss <= floor {
            (0.0, 1.0)
        } else if large.rss <= floor {
            (f64::INFINITY, 0.0)
        } else {
            let f = ((small.rss - large.rss) / (large.rss / df2)).max(0.0);
            let dist = FisherSnedecor::new(1.0, df2).map_err(|e| contract(e.to_string()))?;
            (f, dist.sf(f))
        };
        trace.push(AnovaStep {
            order: k + 1,
            f_statistic: f,
            p_value: p,
        });
        if p < alpha {
            order = k + 1;
        }
    }
    let fit = &fits[order - 1];
    let mut warnings = Vec::new();
    if fit.rank < order + 1 || fit.condition_number > CONDITION_WARNING {
        warnings.push(format!(
            "design rank {} of {}, condition number {:.3e}; solved by pseudo-inverse",
            fit.rank,
            order + 1,
            fit.condition_number
        ));
    }
    let dof = n - order - 1;
    Ok(FitResult::new(
        ModelKind::Polynomial { order },
        fit.coefficients.clone(),
        (fit.rss / dof as f64).sqrt(),
        dof,
        trace,
        warnings,
    )?)
}

/// Evaluates a polynomial whose coefficients are lowest degree first.
pub fn polyval(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
}
