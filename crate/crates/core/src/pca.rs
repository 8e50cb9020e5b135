//! Principal component analysis with an automatic primal/dual strategy.
//!
//! With at least as many rows as features the `d x d` sample covariance is
//! decomposed directly. Otherwise the `n x n` Gram matrix of centered rows is
//! decomposed and its eigenvectors are mapped back to feature space, which
//! keeps 64x64x3 images (d = 12288) from ever needing a `d x d` matrix.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::numlin::{
    dot, gram_matrix, jacobi_eigh, norm, sign_of_largest, streaming_mean, streaming_mean_cov,
    Matrix, RowSource, SymMatrix,
};
use crate::realfmt::{self, format_real};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_COMPONENTS: usize = 400;
pub const DEFAULT_VARIANCE_TARGET: f64 = 0.90;
pub const DEFAULT_CHUNK: usize = 256;

/// Dual-path eigenvalues at or below this fraction of the largest one are
/// treated as exact zeros.
const NULL_EIGENVALUE_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PcaStrategy {
    /// Primal when `d <= n`, dual otherwise.
    #[default]
    Auto,
    Primal,
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PcaOptions {
    pub strategy: PcaStrategy,
    /// Rows read per block.
    pub chunk: usize,
}

impl Default for PcaOptions {
    fn default() -> Self {
        Self {
            strategy: PcaStrategy::Auto,
            chunk: DEFAULT_CHUNK,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    /// `k x d`, orthonormal rows.
    components: Matrix,
    eigenvalues: Vec<f64>,
    total_variance: f64,
}

pub fn fit_pca<S: RowSource>(source: &S, k: usize) -> Result<PcaModel> {
    fit_pca_with(source, k, &PcaOptions::default())
}

pub fn fit_pca_with<S: RowSource>(source: &S, k: usize, opts: &PcaOptions) -> Result<PcaModel> {
    let (n, d) = (source.n_rows(), source.dim());
    if n < 2 {
        return Err(Error::Degenerate(format!("PCA needs at least 2 rows, got {n}")));
    }
    let max_k = (n - 1).min(d);
    if k == 0 || k > max_k {
        return Err(Error::Argument(format!(
            "k = {k} outside 1..={max_k} for {n} rows of dimension {d}"
        )));
    }
    let dual = match opts.strategy {
        PcaStrategy::Auto => d > n,
        PcaStrategy::Primal => false,
        PcaStrategy::Dual => true,
    };
    if dual {
        fit_dual(source, k, opts.chunk)
    } else {
        fit_primal(source, k, opts.chunk)
    }
}

fn fit_primal<S: RowSource>(source: &S, k: usize, chunk: usize) -> Result<PcaModel> {
    let (mean, cov) = streaming_mean_cov(source, chunk)?;
    let eig = jacobi_eigh(&cov)?;
    let d = mean.len();
    let components = Matrix::from_fn(k, d, |i, j| eig.eigenvectors[(j, i)]);
    Ok(PcaModel {
        mean,
        components,
        eigenvalues: eig.eigenvalues[..k].iter().map(|&l| l.max(0.0)).collect(),
        total_variance: cov.trace(),
    })
}

fn fit_dual<S: RowSource>(source: &S, k: usize, chunk: usize) -> Result<PcaModel> {
    let n = source.n_rows();
    let d = source.dim();
    let mean = streaming_mean(source, chunk)?;
    let gram = gram_matrix(source, &mean, chunk)?;
    let denom = (n - 1) as f64;
    let scaled = Matrix::from_fn(n, n, |i, j| gram.get(i, j) / denom);
    let eig = jacobi_eigh(&SymMatrix::from_full(scaled)?)?;
    let eigenvalues: Vec<f64> = eig.eigenvalues[..k].iter().map(|&l| l.max(0.0)).collect();
    let lead = eigenvalues[0];

    // u_i = Xcᵀ y_i / sqrt((n-1) λ_i), accumulated one row at a time
    let live: Vec<bool> = eigenvalues
        .iter()
        .map(|&l| lead > 0.0 && l > NULL_EIGENVALUE_RATIO * lead)
        .collect();
    let scale: Vec<f64> = eigenvalues
        .iter()
        .zip(&live)
        .map(|(&l, &ok)| if ok { 1.0 / (denom * l).sqrt() } else { 0.0 })
        .collect();
    let mut components = Matrix::zeros(k, d);
    let mut centered = vec![0.0; d];
    for (s, e) in crate::numlin::chunks(n, chunk) {
        let block = source.read_block(s, e)?;
        for (r, row) in (s..e).zip(block.row_iter()) {
            for ((c, x), m) in centered.iter_mut().zip(row).zip(&mean) {
                *c = x - m;
            }
            for i in (0..k).filter(|&i| live[i]) {
                let w = eig.eigenvectors[(r, i)] * scale[i];
                for (u, c) in components.row_mut(i).iter_mut().zip(&centered) {
                    *u += w * c;
                }
            }
        }
    }
    orthonormalize_rows(&mut components, &live);
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        total_variance: gram.trace() / denom,
    })
}

/// Two passes of modified Gram-Schmidt over the live rows, then fills dead
/// rows with unit vectors orthogonal to everything before them. Rows end up
/// with the crate-wide sign convention.
fn orthonormalize_rows(m: &mut Matrix, live: &[bool]) {
    let (k, d) = (m.rows(), m.cols());
    for i in 0..k {
        if live[i] {
            for _ in 0..2 {
                project_out_previous(m, i);
            }
            let len = norm(m.row(i));
            if len > 0.5 {
                m.row_mut(i).iter_mut().for_each(|v| *v /= len);
                continue;
            }
        }
        // complete with the first coordinate axis not already spanned
        for axis in 0..d {
            m.row_mut(i).iter_mut().for_each(|v| *v = 0.0);
            m[(i, axis)] = 1.0;
            for _ in 0..2 {
                project_out_previous(m, i);
            }
            let len = norm(m.row(i));
            if len > 0.5 {
                m.row_mut(i).iter_mut().for_each(|v| *v /= len);
                break;
            }
        }
    }
    for i in 0..k {
        let sign = sign_of_largest(m.row(i));
        m.row_mut(i).iter_mut().for_each(|v| *v *= sign);
    }
}

fn project_out_previous(m: &mut Matrix, i: usize) {
    for j in 0..i {
        let p = dot(m.row(i), m.row(j));
        let prev = m.row(j).to_vec();
        for (v, q) in m.row_mut(i).iter_mut().zip(&prev) {
            *v -= p * q;
        }
    }
}

impl PcaModel {
    pub fn new(mean: Vec<f64>, components: Matrix, eigenvalues: Vec<f64>, total_variance: f64) -> Result<Self> {
        if components.cols() != mean.len() {
            return Err(Error::Argument(format!(
                "components have {} columns, mean has length {}",
                components.cols(),
                mean.len()
            )));
        }
        if components.rows() != eigenvalues.len() || components.rows() == 0 {
            return Err(Error::Argument(format!(
                "{} component rows for {} eigenvalues",
                components.rows(),
                eigenvalues.len()
            )));
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) || eigenvalues.iter().any(|&l| l < 0.0) {
            return Err(Error::Argument(
                "eigenvalues must be nonnegative and nonincreasing".into(),
            ));
        }
        Ok(Self {
            mean,
            components,
            eigenvalues,
            total_variance,
        })
    }

    pub fn k(&self) -> usize {
        self.components.rows()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &Matrix {
        &self.components
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    /// The leading `k` components of this model.
    pub fn truncated(&self, k: usize) -> Result<PcaModel> {
        if k == 0 || k > self.k() {
            return Err(Error::Argument(format!("cannot keep {k} of {} components", self.k())));
        }
        Ok(PcaModel {
            mean: self.mean.clone(),
            components: self.components.top_rows(k),
            eigenvalues: self.eigenvalues[..k].to_vec(),
            total_variance: self.total_variance,
        })
    }

    /// `components · (x - mean)`
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Argument(format!(
                "input has dimension {}, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        self.components.mul_vec(&centered)
    }

    pub fn transform_block(&self, rows: &Matrix) -> Result<Matrix> {
        let mut out = Vec::with_capacity(rows.rows() * self.k());
        for r in rows.row_iter() {
            out.extend(self.transform(r)?);
        }
        Matrix::from_vec(rows.rows(), self.k(), out)
    }

    /// `mean + componentsᵀ · z`
    pub fn reconstruct(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.k() {
            return Err(Error::Argument(format!(
                "score vector has length {}, model keeps {}",
                z.len(),
                self.k()
            )));
        }
        let mut x = self.mean.clone();
        for (zi, row) in z.iter().zip(self.components.row_iter()) {
            for (xv, c) in x.iter_mut().zip(row) {
                *xv += zi * c;
            }
        }
        Ok(x)
    }

    pub fn explained_variance_ratio(&self) -> Result<Vec<f64>> {
        if !(self.total_variance > 0.0) {
            return Err(Error::Degenerate("total variance is zero".into()));
        }
        Ok(self
            .eigenvalues
            .iter()
            .map(|l| (l / self.total_variance).clamp(0.0, 1.0))
            .collect())
    }

    pub fn cumulative_ratio(&self) -> Result<Vec<f64>> {
        Ok(cumulative(&self.explained_variance_ratio()?))
    }

    pub fn choose_k(&self, target: f64) -> Result<usize> {
        choose_k(&self.explained_variance_ratio()?, target)
    }

    /// `component,eigenvalue,variance_ratio,cumulative_ratio`, one row per
    /// retained component, reals with 17 significant digits.
    pub fn scree_csv(&self) -> Vec<u8> {
        let ratios = self
            .explained_variance_ratio()
            .unwrap_or_else(|_| vec![0.0; self.k()]);
        let mut out = String::from("component,eigenvalue,variance_ratio,cumulative_ratio\n");
        for (i, ((l, r), c)) in self
            .eigenvalues
            .iter()
            .zip(&ratios)
            .zip(cumulative(&ratios))
            .enumerate()
        {
            out.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                format_real(*l),
                format_real(*r),
                format_real(c)
            ));
        }
        out.into_bytes()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = PcaDocument {
            format_version: FORMAT_VERSION,
            mean: self.mean.clone(),
            components: self.components.as_slice().to_vec(),
            eigenvalues: self.eigenvalues.clone(),
            total_variance: self.total_variance,
            k: self.k(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PcaDocument = serde_json::from_str(text)?;
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::Unsupported(format!(
                "PCA model format version {}",
                doc.format_version
            )));
        }
        let components = Matrix::from_vec(doc.k, doc.mean.len(), doc.components)?;
        Self::new(doc.mean, components, doc.eigenvalues, doc.total_variance)
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
struct PcaDocument {
    format_version: u32,
    #[serde(with = "realfmt::vec")]
    mean: Vec<f64>,
    /// `k x d`, row-major.
    #[serde(with = "realfmt::vec")]
    components: Vec<f64>,
    #[serde(with = "realfmt::vec")]
    eigenvalues: Vec<f64>,
    #[serde(with = "realfmt::scalar")]
    total_variance: f64,
    k: usize,
}

pub fn cumulative(ratios: &[f64]) -> Vec<f64> {
    ratios
        .iter()
        .scan(0.0, |acc, r| {
            *acc += r;
            Some(*acc)
        })
        .collect()
}

/// Cumulative sums within this distance of the target count as reaching it,
/// so that a full spectrum reaches 1.0 despite rounding.
const TARGET_SLACK: f64 = 1e-12;

/// Smallest `k` whose cumulative ratio is at least `target`.
pub fn choose_k(ratios: &[f64], target: f64) -> Result<usize> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::Argument(format!("variance target {target} outside (0, 1]")));
    }
    let cum = cumulative(ratios);
    cum.iter()
        .position(|&c| c >= target - TARGET_SLACK)
        .map(|i| i + 1)
        .ok_or(Error::NotReachable {
            target,
            max_cumulative: cum.last().copied().unwrap_or(0.0),
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreeRow {
    pub component: usize,
    pub eigenvalue: f64,
    pub variance_ratio: f64,
    pub cumulative_ratio: f64,
}

pub fn parse_scree_csv(bytes: &[u8]) -> Result<Vec<ScreeRow>> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::Format("scree CSV is not UTF-8".into()))?;
    let mut lines = text.lines();
    if lines.next() != Some("component,eigenvalue,variance_ratio,cumulative_ratio") {
        return Err(Error::Format("unexpected scree CSV header".into()));
    }
    lines
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Format(format!("bad scree row {line:?}")));
            }
            Ok(ScreeRow {
                component: fields[0]
                    .parse()
                    .map_err(|_| Error::Format(format!("bad component index {:?}", fields[0])))?,
                eigenvalue: realfmt::parse_real(fields[1])?,
                variance_ratio: realfmt::parse_real(fields[2])?,
                cumulative_ratio: realfmt::parse_real(fields[3])?,
            })
        })
        .collect()
}
