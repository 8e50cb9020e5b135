//! Multi-class Fisher linear discriminant analysis.
//!
//! Discriminant axes solve `S_b v = λ Σ v` with `Σ = S_w + εI`; they are
//! Σ-orthonormal and at most `C - 1` of them carry any separation.
//! Classification uses the Gaussian shared-covariance score
//! `δ_k(x) = xᵀΣ⁻¹μ_k - ½ μ_kᵀΣ⁻¹μ_k + ln π_k`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::numlin::{
    accumulate_lower_outer, chunks, cholesky, dot, generalized_eigh_factored, Cholesky, Matrix,
    RowSource, SymMatrix,
};
use crate::realfmt;
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Automatic shrinkage is this fraction of the mean diagonal of `S_w`.
pub const AUTO_SHRINKAGE_SCALE: f64 = 1e-6;

/// Generalized eigenvalues past `C - 1` must stay below this fraction of the first.
pub const RANK_TOLERANCE: f64 = 1e-8;

const DEFAULT_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Shrinkage {
    /// `1e-6 · trace(S_w) / d`
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    class_labels: Vec<String>,
    /// `C x d`
    class_means: Matrix,
    priors: Vec<f64>,
    global_mean: Vec<f64>,
    within_scatter: SymMatrix,
    /// `m x d`, Σ-orthonormal rows
    axes: Matrix,
    eigenvalues: Vec<f64>,
    shrinkage: f64,
    sigma: Cholesky,
    /// `Σ⁻¹ μ_k` per class
    weights: Matrix,
    biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: usize,
    pub scores: Vec<f64>,
}

pub fn fit_lda<S: RowSource>(source: &S, labels: &[usize], class_labels: &[String], shrinkage: Shrinkage) -> Result<LdaModel> {
    fit_lda_chunked(source, labels, class_labels, shrinkage, DEFAULT_CHUNK)
}

pub fn fit_lda_chunked<S: RowSource>(
    source: &S,
    labels: &[usize],
    class_labels: &[String],
    shrinkage: Shrinkage,
    chunk: usize,
) -> Result<LdaModel> {
    let (n, d, c) = (source.n_rows(), source.dim(), class_labels.len());
    if c < 2 {
        return Err(Error::Argument(format!("LDA needs at least 2 classes, got {c}")));
    }
    if labels.len() != n {
        return Err(Error::Argument(format!("{} labels for {n} rows", labels.len())));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= c) {
        return Err(Error::Argument(format!("label {bad} outside 0..{c}")));
    }
    if n <= c {
        return Err(Error::Degenerate(format!("{n} rows for {c} classes")));
    }

    let mut counts = vec![0usize; c];
    let mut sums = Matrix::zeros(c, d);
    for (s, e) in chunks(n, chunk) {
        let block = source.read_block(s, e)?;
        for (row, &l) in block.row_iter().zip(&labels[s..e]) {
            counts[l] += 1;
            for (acc, x) in sums.row_mut(l).iter_mut().zip(row) {
                *acc += x;
            }
        }
    }
    if let Some(k) = counts.iter().position(|&n_k| n_k < 2) {
        return Err(Error::Degenerate(format!(
            "class {:?} has {} samples, at least 2 are required",
            class_labels[k], counts[k]
        )));
    }
    let class_means = Matrix::from_fn(c, d, |k, j| sums[(k, j)] / counts[k] as f64);
    let global_mean: Vec<f64> = (0..d)
        .map(|j| (0..c).map(|k| sums[(k, j)]).sum::<f64>() / n as f64)
        .collect();

    let mut acc = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for (s, e) in chunks(n, chunk) {
        let block = source.read_block(s, e)?;
        for (row, &l) in block.row_iter().zip(&labels[s..e]) {
            for ((cv, x), m) in centered.iter_mut().zip(row).zip(class_means.row(l)) {
                *cv = x - m;
            }
            accumulate_lower_outer(&mut acc, &centered);
        }
    }
    let within = SymMatrix::from_lower_accumulator(d, &acc, 1.0 / (n - c) as f64);

    let mut acc = vec![0.0; d * d];
    for k in 0..c {
        let diff: Vec<f64> = class_means
            .row(k)
            .iter()
            .zip(&global_mean)
            .map(|(m, g)| (m - g) * (counts[k] as f64).sqrt())
            .collect();
        accumulate_lower_outer(&mut acc, &diff);
    }
    let between = SymMatrix::from_lower_accumulator(d, &acc, 1.0 / (n - 1) as f64);

    let eps = match shrinkage {
        Shrinkage::Auto => AUTO_SHRINKAGE_SCALE * within.trace() / d as f64,
        Shrinkage::Fixed(e) if e >= 0.0 && e.is_finite() => e,
        Shrinkage::Fixed(e) => {
            return Err(Error::Argument(format!("shrinkage must be finite and >= 0, got {e}")))
        }
    };
    let sigma = cholesky(&within.add_diagonal(eps)).map_err(|e| match e {
        Error::NotPositiveDefinite { pivot } => Error::SingularScatter { pivot },
        other => other,
    })?;
    let eig = generalized_eigh_factored(&between, &sigma)?;
    let lead = eig.eigenvalues[0];
    if !(lead > 0.0) {
        return Err(Error::Degenerate("all class means coincide".into()));
    }
    let m = (c - 1).min(d);
    if let Some(extra) = eig.eigenvalues[m..]
        .iter()
        .find(|l| l.abs() > RANK_TOLERANCE * lead)
    {
        return Err(Error::Degenerate(format!(
            "between-class scatter has a separating direction beyond C-1 (eigenvalue {extra:e} vs {lead:e})"
        )));
    }
    let axes = Matrix::from_fn(m, d, |i, j| eig.eigenvectors[(j, i)]);
    let priors = counts.iter().map(|&n_k| n_k as f64 / n as f64).collect();

    Ok(LdaModel::assemble(
        class_labels.to_vec(),
        class_means,
        priors,
        global_mean,
        within,
        axes,
        eig.eigenvalues[..m].to_vec(),
        eps,
        sigma,
    ))
}

impl LdaModel {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        class_labels: Vec<String>,
        class_means: Matrix,
        priors: Vec<f64>,
        global_mean: Vec<f64>,
        within_scatter: SymMatrix,
        axes: Matrix,
        eigenvalues: Vec<f64>,
        shrinkage: f64,
        sigma: Cholesky,
    ) -> Self {
        let c = class_labels.len();
        let d = global_mean.len();
        let mut weights = Matrix::zeros(c, d);
        let mut biases = Vec::with_capacity(c);
        for k in 0..c {
            let w = sigma.solve(class_means.row(k));
            biases.push(-0.5 * dot(class_means.row(k), &w) + priors[k].ln());
            weights.row_mut(k).copy_from_slice(&w);
        }
        Self {
            class_labels,
            class_means,
            priors,
            global_mean,
            within_scatter,
            axes,
            eigenvalues,
            shrinkage,
            sigma,
            weights,
            biases,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn dim(&self) -> usize {
        self.global_mean.len()
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn class_means(&self) -> &Matrix {
        &self.class_means
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn global_mean(&self) -> &[f64] {
        &self.global_mean
    }

    /// Pooled within-class covariance, divisor `n - C`, without shrinkage.
    pub fn within_scatter(&self) -> &SymMatrix {
        &self.within_scatter
    }

    pub fn axes(&self) -> &Matrix {
        &self.axes
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn shrinkage(&self) -> f64 {
        self.shrinkage
    }

    /// Cholesky factor of `Σ = S_w + εI`.
    pub fn sigma_factor(&self) -> &Cholesky {
        &self.sigma
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Argument(format!(
                "input has dimension {}, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `axes · (x - global mean)`
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let centered: Vec<f64> = x.iter().zip(&self.global_mean).map(|(a, m)| a - m).collect();
        self.axes.mul_vec(&centered)
    }

    /// Linear discriminant score of every class.
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self
            .weights
            .row_iter()
            .zip(&self.biases)
            .map(|(w, b)| dot(w, x) + b)
            .collect())
    }

    /// Highest-scoring class; ties go to the lowest index.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let scores = self.scores(x)?;
        Ok(Prediction {
            label: argmax(&scores),
            scores,
        })
    }

    /// Softmax of the discriminant scores.
    pub fn posterior(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.scores(x)?))
    }

    /// Class means in discriminant coordinates.
    pub fn projected_centroids(&self) -> Result<Matrix> {
        let rows: Vec<Vec<f64>> = self
            .class_means
            .row_iter()
            .map(|m| self.project(m))
            .collect::<Result<_>>()?;
        Matrix::from_rows(&rows)
    }

    /// Nearest projected centroid with the `ln π_k` prior adjustment. Agrees
    /// with [`predict`](Self::predict) when the model keeps `C - 1` axes.
    pub fn predict_nearest_centroid(&self, x: &[f64]) -> Result<usize> {
        let z = self.project(x)?;
        let centroids = self.projected_centroids()?;
        let scores: Vec<f64> = centroids
            .row_iter()
            .zip(&self.priors)
            .map(|(nu, p)| {
                let dist: f64 = z.iter().zip(nu).map(|(a, b)| (a - b) * (a - b)).sum();
                -0.5 * dist + p.ln()
            })
            .collect();
        Ok(argmax(&scores))
    }

    /// Predicted class for every row of a source.
    pub fn predict_rows<S: RowSource>(&self, source: &S, chunk: usize) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(source.n_rows());
        for (s, e) in chunks(source.n_rows(), chunk) {
            let block = source.read_block(s, e)?;
            for row in block.row_iter() {
                out.push(self.predict(row)?.label);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = LdaDocument {
            format_version: FORMAT_VERSION,
            class_labels: self.class_labels.clone(),
            priors: self.priors.clone(),
            class_means: self.class_means.as_slice().to_vec(),
            axes: self.axes.as_slice().to_vec(),
            eigenvalues: self.eigenvalues.clone(),
            shrinkage: self.shrinkage,
            global_mean: self.global_mean.clone(),
            sigma_inverse_factor: self.sigma.factor().as_slice().to_vec(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: LdaDocument = serde_json::from_str(text)?;
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::Unsupported(format!(
                "LDA model format version {}",
                doc.format_version
            )));
        }
        let c = doc.class_labels.len();
        let d = doc.global_mean.len();
        let m = doc.eigenvalues.len();
        if c < 2 || doc.priors.len() != c {
            return Err(Error::Format(format!(
                "{} priors for {c} class labels",
                doc.priors.len()
            )));
        }
        let class_means = Matrix::from_vec(c, d, doc.class_means)?;
        let axes = Matrix::from_vec(m, d, doc.axes)?;
        let sigma = Cholesky::from_factor(Matrix::from_vec(d, d, doc.sigma_inverse_factor)?)?;
        let l = sigma.factor();
        let within = Matrix::from_fn(d, d, |i, j| {
            let s: f64 = (0..=i.min(j)).map(|k| l[(i, k)] * l[(j, k)]).sum();
            if i == j {
                s - doc.shrinkage
            } else {
                s
            }
        });
        Ok(Self::assemble(
            doc.class_labels,
            class_means,
            doc.priors,
            doc.global_mean,
            SymMatrix::symmetrize(&within)?,
            axes,
            doc.eigenvalues,
            doc.shrinkage,
            sigma,
        ))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct LdaDocument {
    format_version: u32,
    class_labels: Vec<String>,
    #[serde(with = "realfmt::vec")]
    priors: Vec<f64>,
    /// `C x d`, row-major.
    #[serde(with = "realfmt::vec")]
    class_means: Vec<f64>,
    /// `m x d`, row-major.
    #[serde(with = "realfmt::vec")]
    axes: Vec<f64>,
    #[serde(with = "realfmt::vec")]
    eigenvalues: Vec<f64>,
    #[serde(with = "realfmt::scalar")]
    shrinkage: f64,
    #[serde(with = "realfmt::vec")]
    global_mean: Vec<f64>,
    /// Lower-triangular `L` with `Σ = L Lᵀ`, `d x d` row-major.
    #[serde(with = "realfmt::vec")]
    sigma_inverse_factor: Vec<f64>,
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - top).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}
