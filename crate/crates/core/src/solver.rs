//! Elastic-net penalized least squares by cyclic coordinate descent.
//!
//! Minimizes, for each λ on a decreasing path,
//!
//! ```text
//! (1/2n)·Σ(yᵢ − β₀ − x̃ᵢᵀβ̃)² + λ·Σⱼ pⱼ·(α·|β̃ⱼ| + (1−α)/2·β̃ⱼ²)
//! ```
//!
//! where x̃ⱼ are the penalized columns standardized to mean 0 and (population)
//! variance 1, and pⱼ is 0 for unpenalized columns. Unpenalized columns and
//! the intercept form one block that is re-solved exactly (least squares
//! through a pivoted QR factorization) after every sweep, so linearly
//! dependent unpenalized columns, such as per-season intercepts, are handled
//! without special cases. Coefficients are reported on the original scale.

use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::seed;

/// Floor applied to α when computing λ_max, so a ridge path still has a
/// finite starting point.
pub const ALPHA_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticNetSpec {
    /// Mixing weight: 1 is the lasso, 0 is ridge.
    pub alpha: f64,
    /// Explicit λ path; when absent one is generated from λ_max.
    pub lambda_path: Option<Vec<f64>>,
    pub n_lambda: usize,
    /// λ_min / λ_max for generated paths.
    pub path_ratio: f64,
    /// Convergence threshold on the largest coefficient change in a sweep.
    pub tol: f64,
    /// Sweep cap per λ.
    pub max_iter: usize,
    pub folds: usize,
    pub seed: u64,
}

impl Default for ElasticNetSpec {
    fn default() -> Self {
        ElasticNetSpec {
            alpha: 0.5,
            lambda_path: None,
            n_lambda: 100,
            path_ratio: 1e-4,
            tol: 1e-7,
            max_iter: 100_000,
            folds: 10,
            seed: 0,
        }
    }
}

impl ElasticNetSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!("need at least 2 folds, got {}", self.folds)));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config("tol and max_iter must be positive".into()));
        }
        match &self.lambda_path {
            Some(path) => {
                if path.is_empty() || path.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
                    return Err(Error::Config("lambda path must be non-empty, positive and finite".into()));
                }
                if path.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(Error::Config("lambda path must be strictly decreasing".into()));
                }
            }
            None => {
                if self.n_lambda == 0 || !(self.path_ratio > 0.0 && self.path_ratio < 1.0) {
                    return Err(Error::Config(
                        "n_lambda must be positive and path_ratio within (0, 1)".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Cross-validation summary attached to a [`FitResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    /// Mean squared prediction error over all held-out rows, per λ.
    pub mean: Vec<f64>,
    /// Standard error of the per-fold errors, per λ.
    pub se: Vec<f64>,
    pub chosen_index: usize,
    pub lambda_chosen: f64,
    pub fold_of_row: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub lambdas: Vec<f64>,
    pub lambda_max: f64,
    pub alpha: f64,
    pub intercepts: Vec<f64>,
    /// `coefficients[k][j]`: column `j` at λ index `k`, original scale.
    pub coefficients: Vec<Vec<f64>>,
    pub sweeps: Vec<usize>,
    pub cv: Option<CrossValidation>,
}

impl FitResult {
    /// Index of the CV-chosen λ, or the last λ when no CV was run.
    pub fn chosen_index(&self) -> usize {
        self.cv
            .as_ref()
            .map_or(self.lambdas.len() - 1, |cv| cv.chosen_index)
    }

    pub fn lambda_chosen(&self) -> f64 {
        self.lambdas[self.chosen_index()]
    }

    pub fn chosen_coefficients(&self) -> &[f64] {
        &self.coefficients[self.chosen_index()]
    }

    pub fn chosen_intercept(&self) -> f64 {
        self.intercepts[self.chosen_index()]
    }

    /// exp(coefficient) per column at the chosen λ.
    pub fn effects(&self) -> Vec<f64> {
        self.chosen_coefficients().iter().map(|c| c.exp()).collect()
    }

    pub fn nonzero_count(&self, k: usize, penalized: &[bool]) -> usize {
        self.coefficients[k]
            .iter()
            .zip(penalized)
            .filter(|(c, p)| **p && **c != 0.0)
            .count()
    }

    /// Writes `lambda,cv_mean,cv_se,nonzero` rows.
    pub fn write_cv_table<W: Write>(&self, out: W, penalized: &[bool]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lambda", "cv_mean", "cv_se", "nonzero"])?;
        for k in 0..self.lambdas.len() {
            let (m, s) = match &self.cv {
                Some(cv) => (cv.mean[k].to_string(), cv.se[k].to_string()),
                None => (String::new(), String::new()),
            };
            w.write_record([
                self.lambdas[k].to_string(),
                m,
                s,
                self.nonzero_count(k, penalized).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn soft_threshold(z: f64, g: f64) -> f64 {
    debug_assert!(g >= 0.0);
    if z > g {
        z - g
    } else if z < -g {
        z + g
    } else {
        0.0
    }
}

/// Column means and population standard deviations, computed from the
/// sparse entries. Columns with zero variance have `sd == 0`.
pub(crate) fn column_moments(x: &DesignMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = x.n_rows() as f64;
    let mut means = Vec::with_capacity(x.n_cols());
    let mut sds = Vec::with_capacity(x.n_cols());
    for j in 0..x.n_cols() {
        let col = x.column(j);
        let mean = col.values.iter().sum::<f64>() / n;
        // two-pass: implicit zeros contribute mean² each
        let zeros = n - col.nnz() as f64;
        let ss = col.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() + zeros * mean * mean;
        let var = ss / n;
        let scale = mean.abs().max(col.values.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        let sd = if var <= 1e-24 * (1.0 + scale * scale) { 0.0 } else { var.sqrt() };
        means.push(mean);
        sds.push(sd);
    }
    (means, sds)
}

/// The intercept plus the unpenalized columns that are linearly
/// independent of it and of each other, with the triangular factor R of
/// their QR decomposition. Least-squares refits use the semi-normal
/// equations RᵀR·a = Uᵀr, which only touch the sparse columns.
struct UnpenalizedBlock {
    /// Design columns kept after the leading constant.
    columns: Vec<usize>,
    /// Upper-triangular, `r[a][b]` for `a <= b`.
    r: Vec<Vec<f64>>,
}

impl UnpenalizedBlock {
    fn new(x: &DesignMatrix) -> Self {
        let n = x.n_rows();
        let mut q: Vec<Vec<f64>> = Vec::new();
        let mut r: Vec<Vec<f64>> = Vec::new();
        let mut columns = Vec::new();
        let candidates = std::iter::once(None).chain((0..x.n_cols()).filter(|&j| !x.penalized()[j]).map(Some));
        for cand in candidates {
            let mut v = vec![0.0; n];
            match cand {
                None => v.iter_mut().for_each(|e| *e = 1.0),
                Some(j) => x.column(j).iter().for_each(|(i, val)| v[i] = val),
            }
            let norm0 = dot(&v, &v).sqrt();
            if norm0 == 0.0 {
                continue;
            }
            // modified Gram-Schmidt with one reorthogonalization pass
            let mut proj = vec![0.0; q.len()];
            for _ in 0..2 {
                for (k, qk) in q.iter().enumerate() {
                    let c = dot(qk, &v);
                    proj[k] += c;
                    axpy(-c, qk, &mut v);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if norm <= 1e-9 * norm0 {
                continue;
            }
            v.iter_mut().for_each(|e| *e /= norm);
            for (k, row) in r.iter_mut().enumerate() {
                row.push(proj[k]);
            }
            let mut last = vec![0.0; q.len()];
            last.push(norm);
            r.push(last);
            q.push(v);
            if let Some(j) = cand {
                columns.push(j);
            }
        }
        UnpenalizedBlock { columns, r }
    }

    fn len(&self) -> usize {
        self.r.len()
    }

    /// Solves RᵀR·a = g. Returns `a` and ‖R·a‖.
    fn solve(&self, g: &[f64]) -> (Vec<f64>, f64) {
        let k = g.len();
        let mut z = vec![0.0; k];
        for i in 0..k {
            let s: f64 = (0..i).map(|j| self.r[j][i] * z[j]).sum();
            z[i] = (g[i] - s) / self.r[i][i];
        }
        let mut a = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| self.r[i][j] * a[j]).sum();
            a[i] = (z[i] - s) / self.r[i][i];
        }
        (a, dot(&z, &z).sqrt())
    }
}

/// Solves `m·x = b` in place for symmetric positive definite `m` (n×n,
/// row-major). Only the lower triangle is read. Returns false if `m` is not
/// numerically positive definite.
fn cholesky_solve(m: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let (top, rest) = m.split_at_mut((j + 1) * n);
        let row_j = &mut top[j * n..];
        let d = row_j[j] - dot(&row_j[..j], &row_j[..j]);
        if !(d > 1e-12) {
            return false;
        }
        let d = d.sqrt();
        row_j[j] = d;
        let row_j = &row_j[..j];
        for row_i in rest.chunks_exact_mut(n) {
            row_i[j] = (row_i[j] - dot(&row_i[..j], row_j)) / d;
        }
    }
    for i in 0..n {
        let row = &m[i * n..i * n + i];
        b[i] = (b[i] - dot(row, &b[..i])) / m[i * n + i];
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[k * n + i] * b[k]).sum();
        b[i] = (b[i] - s) / m[i * n + i];
    }
    true
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four lanes so the loop vectorizes
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Coordinate-descent state for one design and response.
pub(crate) struct CoordinateDescent<'a> {
    x: &'a DesignMatrix,
    alpha: f64,
    n: f64,
    means: Vec<f64>,
    sds: Vec<f64>,
    colsums: Vec<f64>,
    /// Penalized, non-constant columns.
    free: Vec<usize>,
    block: UnpenalizedBlock,
    /// Standardized coefficients, indexed by design column.
    beta: Vec<f64>,
    /// Block coefficients: constant first, then `block.columns`.
    block_coef: Vec<f64>,
    /// True residual is `resid[i] + shift`.
    resid: Vec<f64>,
    shift: f64,
    /// Sum of the true residual; penalized updates leave it unchanged.
    resid_sum: f64,
    /// Position of each design column in `free`.
    free_pos: Vec<Option<usize>>,
    /// Standardized Gram matrix of the free columns with the unpenalized
    /// block projected out, row-major; built on first use.
    gram: Option<Vec<f64>>,
    gram_tried: bool,
}

/// Free-column count above which the exact active-set step is skipped.
const MAX_GRAM_COLUMNS: usize = 2000;

impl<'a> CoordinateDescent<'a> {
    pub(crate) fn new(x: &'a DesignMatrix, y: &[f64], alpha: f64) -> Self {
        let (means, sds) = column_moments(x);
        let n = x.n_rows() as f64;
        let colsums = means.iter().map(|m| m * n).collect();
        let free: Vec<usize> = (0..x.n_cols())
            .filter(|&j| x.penalized()[j] && sds[j] > 0.0)
            .collect();
        let mut free_pos = vec![None; x.n_cols()];
        for (p, &j) in free.iter().enumerate() {
            free_pos[j] = Some(p);
        }
        let block = UnpenalizedBlock::new(x);
        let mut cd = CoordinateDescent {
            x,
            alpha,
            n,
            means,
            sds,
            colsums,
            free,
            block_coef: vec![0.0; block.len()],
            block,
            beta: vec![0.0; x.n_cols()],
            resid: y.to_vec(),
            shift: 0.0,
            resid_sum: 0.0,
            free_pos,
            gram: None,
            gram_tried: false,
        };
        cd.resync();
        // a second pass refines the semi-normal solution
        cd.refit_block();
        cd.refit_block();
        cd
    }

    /// Exact least-squares refit of the intercept and unpenalized columns
    /// against the current residual. Returns the RMS change in fitted values.
    fn refit_block(&mut self) -> f64 {
        let mut g = Vec::with_capacity(self.block.len());
        g.push(self.resid_sum);
        for &j in &self.block.columns {
            let raw: f64 = self.x.column(j).iter().map(|(i, v)| v * self.resid[i]).sum();
            g.push(raw + self.shift * self.colsums[j]);
        }
        let (delta, norm) = self.block.solve(&g);
        self.shift -= delta[0];
        self.resid_sum -= delta[0] * self.n;
        for (k, &j) in self.block.columns.iter().enumerate() {
            let d = delta[k + 1];
            for (i, v) in self.x.column(j).iter() {
                self.resid[i] -= d * v;
            }
            self.resid_sum -= d * self.colsums[j];
        }
        for (c, d) in self.block_coef.iter_mut().zip(delta) {
            *c += d;
        }
        norm / self.n.sqrt()
    }

    /// Recomputes the residual sum, which rounding lets drift.
    fn resync(&mut self) {
        self.resid_sum = self.resid.iter().sum::<f64>() + self.n * self.shift;
    }

    /// ⟨x̃ⱼ, r⟩ / n.
    fn gradient(&self, j: usize) -> f64 {
        let col = self.x.column(j);
        let raw: f64 = col.iter().map(|(i, v)| v * self.resid[i]).sum::<f64>() + self.shift * self.colsums[j];
        (raw - self.means[j] * self.resid_sum) / (self.sds[j] * self.n)
    }

    fn update(&mut self, j: usize, lambda: f64) -> f64 {
        let old = self.beta[j];
        let z = self.gradient(j) + old;
        let new = soft_threshold(z, lambda * self.alpha) / (1.0 + lambda * (1.0 - self.alpha));
        let delta = new - old;
        if delta != 0.0 {
            self.beta[j] = new;
            let scale = delta / self.sds[j];
            for (i, v) in self.x.column(j).iter() {
                self.resid[i] -= scale * v;
            }
            self.shift += scale * self.means[j];
        }
        delta.abs()
    }

    /// One pass over `cols` followed by an exact refit of the unpenalized
    /// block. Returns the largest change seen.
    pub(crate) fn sweep(&mut self, cols: &[usize], lambda: f64) -> f64 {
        let mut max_change = 0.0f64;
        for &j in cols {
            max_change = max_change.max(self.update(j, lambda));
        }
        max_change.max(self.refit_block())
    }

    pub(crate) fn active(&self) -> Vec<usize> {
        self.free.iter().copied().filter(|&j| self.beta[j] != 0.0).collect()
    }

    /// Runs sweeps at one λ until the largest change falls below `tol`.
    pub(crate) fn solve(&mut self, lambda: f64, tol: f64, max_iter: usize, lambda_index: usize) -> Result<usize> {
        let all = self.free.clone();
        let mut sweeps = 0;
        let bump = |sweeps: &mut usize| -> Result<()> {
            *sweeps += 1;
            if *sweeps > max_iter {
                Err(Error::NoConvergence {
                    lambda_index,
                    sweeps: max_iter,
                })
            } else {
                Ok(())
            }
        };
        loop {
            bump(&mut sweeps)?;
            self.resync();
            let change = self.sweep(&all, lambda);
            if change < tol {
                return Ok(sweeps);
            }
            // an exact step costs about a³/3 flops: take one at once when
            // far from converged, then whenever the sweeps since the last
            // one have cost as much
            let mut budget = if change > 1e-5 { f64::INFINITY } else { 0.0 };
            loop {
                let active = self.active();
                let a = active.len() as f64;
                if budget >= a * a * a / 20.0 {
                    self.exact_step(lambda);
                    budget = 0.0;
                    continue;
                }
                bump(&mut sweeps)?;
                if self.sweep(&active, lambda) < tol {
                    break;
                }
                budget += active.iter().map(|&j| self.x.column(j).nnz() as f64).sum::<f64>() + self.n;
            }
        }
    }

    fn build_gram(&mut self) {
        self.gram_tried = true;
        let f = self.free.len();
        if f == 0 || f > MAX_GRAM_COLUMNS {
            return;
        }
        let b = self.block.columns.len();
        let m = f + b;
        // raw inner products by row, over free columns then block columns
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.x.n_rows()];
        for (p, &j) in self.free.iter().chain(&self.block.columns).enumerate() {
            for (i, v) in self.x.column(j).iter() {
                rows[i].push((p, v));
            }
        }
        let mut raw = vec![0.0; m * m];
        for row in &rows {
            for &(a, va) in row {
                for &(c, vc) in row {
                    raw[a * m + c] += va * vc;
                }
            }
        }
        let n = self.n;
        let (mu, sd): (Vec<f64>, Vec<f64>) = self.free.iter().map(|&j| (self.means[j], self.sds[j])).unzip();
        // projections of each standardized column on the orthonormal block basis
        let k = self.block.len();
        let mut proj = vec![0.0; f * k];
        for a in 0..f {
            let mut cross = vec![0.0; k];
            for (l, &u) in self.block.columns.iter().enumerate() {
                cross[l + 1] = (raw[a * m + f + l] - mu[a] * self.colsums[u]) / sd[a];
            }
            let z = &mut proj[a * k..(a + 1) * k];
            for i in 0..k {
                let s: f64 = (0..i).map(|j| self.block.r[j][i] * z[j]).sum();
                z[i] = (cross[i] - s) / self.block.r[i][i];
            }
        }
        let mut gram = vec![0.0; f * f];
        for a in 0..f {
            for c in 0..f {
                let std = (raw[a * m + c] - n * mu[a] * mu[c]) / (sd[a] * sd[c]);
                let pa = &proj[a * k..(a + 1) * k];
                let pc = &proj[c * k..(c + 1) * k];
                gram[a * f + c] = std - dot(pa, pc);
            }
        }
        self.gram = Some(gram);
    }

    /// Moves toward the minimizer of the objective restricted to the active
    /// set and its sign pattern: a full step when no sign changes, otherwise
    /// up to the first coefficient that reaches zero, which then leaves the
    /// set. The objective never increases. Sweeps still decide convergence.
    fn exact_step(&mut self, lambda: f64) {
        if !self.gram_tried {
            self.build_gram();
        }
        if self.gram.is_none() {
            return;
        }
        let mut active = self.active();
        for _ in 0..4 {
            if active.is_empty() {
                break;
            }
            let Some(step) = self.newton_direction(&active, lambda) else {
                break;
            };
            // largest t ≤ 1 keeping every sign; ridge has no kink at zero
            let mut t = 1.0f64;
            if self.alpha > 0.0 {
                for (&j, d) in active.iter().zip(&step) {
                    let b = self.beta[j];
                    if b * (b + d) <= 0.0 {
                        t = t.min(-b / d);
                    }
                }
            }
            let mut hit_zero = Vec::new();
            for (&j, d) in active.iter().zip(&step) {
                let old = self.beta[j];
                let mut new = old + t * d;
                if self.alpha > 0.0 && (new * old <= 0.0 || (t < 1.0 && (-old / d - t).abs() <= 1e-15)) {
                    new = 0.0;
                    hit_zero.push(j);
                }
                let delta = new - old;
                self.beta[j] = new;
                let scale = delta / self.sds[j];
                for (i, v) in self.x.column(j).iter() {
                    self.resid[i] -= scale * v;
                }
                self.shift += scale * self.means[j];
            }
            self.refit_block();
            if hit_zero.is_empty() {
                break;
            }
            active.retain(|j| !hit_zero.contains(j));
        }
    }

    /// Newton direction for the active-set quadratic at the current point.
    fn newton_direction(&self, active: &[usize], lambda: f64) -> Option<Vec<f64>> {
        let gram = self.gram.as_ref()?;
        let a = active.len();
        let f = self.free.len();
        let ridge = lambda * (1.0 - self.alpha);
        let l1 = lambda * self.alpha;
        let pos: Vec<usize> = active.iter().map(|&j| self.free_pos[j].expect("free column")).collect();
        let mut k = vec![0.0; a * a];
        for (r, &pr) in pos.iter().enumerate() {
            for (c, &pc) in pos.iter().enumerate() {
                k[r * a + c] = gram[pr * f + pc] / self.n;
            }
            k[r * a + r] += ridge;
        }
        let mut step: Vec<f64> = active
            .iter()
            .map(|&j| {
                let b = self.beta[j];
                self.gradient(j) - ridge * b - l1 * b.signum()
            })
            .collect();
        cholesky_solve(&mut k, &mut step, a).then_some(step)
    }

    /// λ at which every penalized coefficient first becomes zero.
    pub(crate) fn lambda_max(&self) -> f64 {
        let g = self
            .free
            .iter()
            .map(|&j| self.gradient(j).abs())
            .fold(0.0f64, f64::max);
        g / self.alpha.max(ALPHA_FLOOR)
    }

    /// Intercept and original-scale coefficients of the current state.
    pub(crate) fn coefficients(&self) -> (f64, Vec<f64>) {
        let mut coef = vec![0.0; self.x.n_cols()];
        let mut intercept = self.block_coef[0];
        for &j in &self.free {
            if self.beta[j] != 0.0 {
                coef[j] = self.beta[j] / self.sds[j];
                intercept -= coef[j] * self.means[j];
            }
        }
        for (k, &j) in self.block.columns.iter().enumerate() {
            coef[j] = self.block_coef[k + 1];
        }
        (intercept, coef)
    }

    #[cfg(test)]
    pub(crate) fn free_columns(&self) -> &[usize] {
        &self.free
    }
}

fn check_inputs(x: &DesignMatrix, y: &[f64]) -> Result<()> {
    if x.n_rows() < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 rows, got {}", x.n_rows())));
    }
    if y.len() != x.n_rows() {
        return Err(Error::InvalidInput(format!(
            "response has {} values for {} rows",
            y.len(),
            x.n_rows()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite response value".into()));
    }
    for j in 0..x.n_cols() {
        if x.column(j).values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value in column {}", x.labels()[j])));
        }
    }
    Ok(())
}

/// Log-spaced path from λ_max down to λ_max·ratio.
pub fn lambda_path(lambda_max: f64, n_lambda: usize, ratio: f64) -> Vec<f64> {
    if n_lambda == 1 {
        return vec![lambda_max];
    }
    let step = ratio.ln() / (n_lambda - 1) as f64;
    (0..n_lambda)
        .map(|k| if k == 0 { lambda_max } else { lambda_max * (step * k as f64).exp() })
        .collect()
}

/// Fits the whole λ path with warm starts. At any λ ≥ λ_max the penalized
/// coefficients are exactly zero.
pub fn fit_path(x: &DesignMatrix, y: &[f64], spec: &ElasticNetSpec) -> Result<FitResult> {
    spec.validate()?;
    check_inputs(x, y)?;
    let mut cd = CoordinateDescent::new(x, y, spec.alpha);
    // a response already explained by the unpenalized block has λ_max = 0
    let lambda_max = cd.lambda_max().max(f64::MIN_POSITIVE);
    let lambdas = match &spec.lambda_path {
        Some(p) => p.clone(),
        None => lambda_path(lambda_max, spec.n_lambda, spec.path_ratio),
    };
    let mut intercepts = Vec::with_capacity(lambdas.len());
    let mut coefficients = Vec::with_capacity(lambdas.len());
    let mut sweeps = Vec::with_capacity(lambdas.len());
    for (k, &lambda) in lambdas.iter().enumerate() {
        let used = if lambda >= lambda_max {
            0
        } else {
            cd.solve(lambda, spec.tol, spec.max_iter, k)?
        };
        let (b0, b) = cd.coefficients();
        intercepts.push(b0);
        coefficients.push(b);
        sweeps.push(used);
    }
    Ok(FitResult {
        lambdas,
        lambda_max,
        alpha: spec.alpha,
        intercepts,
        coefficients,
        sweeps,
        cv: None,
    })
}

/// Seeded shuffle dealt round-robin into `folds` groups; sizes differ by at
/// most one.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed, "cv-folds"));
    let mut fold_of = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        fold_of[row] = pos % folds;
    }
    fold_of
}

/// K-fold cross-validation over the full-data λ path. The chosen λ
/// minimizes mean held-out squared error; ties go to the larger λ.
pub fn cross_validate(x: &DesignMatrix, y: &[f64], spec: &ElasticNetSpec) -> Result<FitResult> {
    spec.validate()?;
    check_inputs(x, y)?;
    if x.n_rows() < spec.folds {
        return Err(Error::InvalidInput(format!(
            "{} rows cannot fill {} folds",
            x.n_rows(),
            spec.folds
        )));
    }
    let mut full = fit_path(x, y, spec)?;
    let fold_of = fold_assignment(x.n_rows(), spec.folds, spec.seed);
    let fold_spec = ElasticNetSpec {
        lambda_path: Some(full.lambdas.clone()),
        ..spec.clone()
    };
    let per_fold: Vec<(usize, Vec<f64>)> = (0..spec.folds)
        .into_par_iter()
        .map(|f| -> Result<(usize, Vec<f64>)> {
            let train: Vec<usize> = (0..x.n_rows()).filter(|&i| fold_of[i] != f).collect();
            let test: Vec<usize> = (0..x.n_rows()).filter(|&i| fold_of[i] == f).collect();
            let xt = x.select_rows(&train);
            let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let fit = fit_path(&xt, &yt, &fold_spec)?;
            let xv = x.select_rows(&test);
            let mse = (0..fit.lambdas.len())
                .map(|k| {
                    let pred = xv.predict(fit.intercepts[k], &fit.coefficients[k]);
                    test.iter()
                        .zip(pred)
                        .map(|(&i, p)| (y[i] - p) * (y[i] - p))
                        .sum::<f64>()
                        / test.len() as f64
                })
                .collect();
            Ok((test.len(), mse))
        })
        .collect::<Result<_>>()?;

    let n = x.n_rows() as f64;
    let k_folds = spec.folds as f64;
    let n_lambda = full.lambdas.len();
    let mut mean = vec![0.0; n_lambda];
    let mut se = vec![0.0; n_lambda];
    for l in 0..n_lambda {
        let m = per_fold.iter().map(|(nk, e)| *nk as f64 * e[l]).sum::<f64>() / n;
        let var = per_fold
            .iter()
            .map(|(nk, e)| *nk as f64 * (e[l] - m) * (e[l] - m))
            .sum::<f64>()
            / n
            / (k_folds - 1.0);
        mean[l] = m;
        se[l] = var.sqrt();
    }
    let mut chosen = 0;
    for l in 1..n_lambda {
        if mean[l] < mean[chosen] {
            chosen = l;
        }
    }
    full.cv = Some(CrossValidation {
        lambda_chosen: full.lambdas[chosen],
        chosen_index: chosen,
        mean,
        se,
        fold_of_row: fold_of,
    });
    Ok(full)
}

/// Value of the penalized objective at the given original-scale solution.
pub fn objective(x: &DesignMatrix, y: &[f64], alpha: f64, lambda: f64, intercept: f64, coefficients: &[f64]) -> f64 {
    let (_, sds) = column_moments(x);
    let pred = x.predict(intercept, coefficients);
    let n = y.len() as f64;
    let loss = y.iter().zip(&pred).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (2.0 * n);
    let penalty: f64 = (0..x.n_cols())
        .filter(|&j| x.penalized()[j] && sds[j] > 0.0)
        .map(|j| {
            let b = coefficients[j] * sds[j];
            alpha * b.abs() + 0.5 * (1.0 - alpha) * b * b
        })
        .sum();
    loss + lambda * penalty
}

/// Largest violation of the optimality conditions at a solution.
///
/// For penalized column j with standardized coefficient b and
/// g = ⟨x̃ⱼ, r⟩/n: if b ≠ 0, |g − λ(1−α)b − λα·sign(b)|; otherwise
/// max(0, |g| − λα). Unpenalized columns and the intercept contribute
/// |⟨xⱼ, r⟩|/n.
pub fn kkt_violation(x: &DesignMatrix, y: &[f64], alpha: f64, lambda: f64, intercept: f64, coefficients: &[f64]) -> f64 {
    let (means, sds) = column_moments(x);
    let pred = x.predict(intercept, coefficients);
    let resid: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
    let n = y.len() as f64;
    let rsum: f64 = resid.iter().sum();
    let mut worst = (rsum / n).abs();
    for j in 0..x.n_cols() {
        let raw: f64 = x.column(j).iter().map(|(i, v)| v * resid[i]).sum();
        let v = if !x.penalized()[j] {
            (raw / n).abs()
        } else if sds[j] == 0.0 {
            0.0
        } else {
            let g = (raw - means[j] * rsum) / (sds[j] * n);
            let b = coefficients[j] * sds[j];
            if b != 0.0 {
                (g - lambda * (1.0 - alpha) * b - lambda * alpha * b.signum()).abs()
            } else {
                (g.abs() - lambda * alpha).max(0.0)
            }
        };
        worst = worst.max(v);
    }
    worst
}
