//! Per-kernel diagnostics: mean, variance and norm distributions, sparse
//! (near-zero) kernel counts, and pairwise distance spectra.
//!
//! Variances use the population convention (divide by the number of values).

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::codebook_io::{kaiming_factor, KernelTensor};
use crate::error::{Error, Result};
use crate::grassmann::{self, Metric};
use crate::packing::Codebook;

/// Fraction of the median kernel norm used as the default sparsity threshold.
pub const DEFAULT_RELATIVE_THRESHOLD: f64 = 1e-2;

/// How a kernel is classified as sparse ("dying").
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SparsityConfig {
    /// Absolute Frobenius norm at or below which a kernel counts as sparse.
    /// `None` means 1e-2 × the median kernel norm of the tensor.
    pub norm_threshold: Option<f64>,
}

impl SparsityConfig {
    pub fn absolute(threshold: f64) -> Self {
        Self {
            norm_threshold: Some(threshold),
        }
    }
}

/// min / max / mean / population std of a list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelStats {
    pub per_kernel_mean: Vec<f64>,
    pub per_kernel_variance: Vec<f64>,
    pub per_kernel_norm: Vec<f64>,
    pub is_sparse: Vec<bool>,
    pub sparse_count: usize,
    /// Threshold actually applied.
    pub norm_threshold: f64,
    pub mean_summary: Summary,
    pub variance_summary: Summary,
    pub norm_summary: Summary,
}

impl KernelStats {
    pub fn len(&self) -> usize {
        self.per_kernel_mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_kernel_mean.is_empty()
    }

    /// `index,mean,variance,norm,is_sparse` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,mean,variance,norm,is_sparse\n");
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{i},{},{},{},{}",
                self.per_kernel_mean[i],
                self.per_kernel_variance[i],
                self.per_kernel_norm[i],
                self.is_sparse[i]
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "kernels:        {}", self.len());
        let _ = writeln!(
            out,
            "sparse kernels: {} (norm <= {:.6e})",
            self.sparse_count, self.norm_threshold
        );
        for (name, s) in [
            ("mean", &self.mean_summary),
            ("variance", &self.variance_summary),
            ("norm", &self.norm_summary),
        ] {
            let _ = writeln!(
                out,
                "{name:<9} min {:.6e}  max {:.6e}  mean {:.6e}  std {:.6e}",
                s.min, s.max, s.mean, s.std
            );
        }
        out
    }
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Statistics per output channel over all of its `in·h·w` values.
pub fn compute_stats(t: &KernelTensor, cfg: &SparsityConfig) -> Result<KernelStats> {
    if t.is_empty() {
        return Err(Error::EmptyTensor);
    }
    if let Some(th) = cfg.norm_threshold {
        if !(th >= 0.0) {
            return Err(Error::InvalidProblem(format!(
                "sparsity threshold must be non-negative, got {th}"
            )));
        }
    }
    let mut means = Vec::with_capacity(t.out_channels());
    let mut variances = Vec::with_capacity(t.out_channels());
    let mut norms = Vec::with_capacity(t.out_channels());
    for kernel in t.kernels() {
        let n = kernel.len() as f64;
        let mean = kernel.iter().sum::<f64>() / n;
        let var = kernel.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let norm = kernel.iter().map(|v| v * v).sum::<f64>().sqrt();
        means.push(mean);
        variances.push(var);
        norms.push(norm);
    }
    let threshold = cfg
        .norm_threshold
        .unwrap_or_else(|| DEFAULT_RELATIVE_THRESHOLD * median(&norms));
    let is_sparse: Vec<bool> = norms.iter().map(|&n| n <= threshold).collect();
    Ok(KernelStats {
        sparse_count: is_sparse.iter().filter(|&&s| s).count(),
        is_sparse,
        norm_threshold: threshold,
        mean_summary: Summary::of(&means),
        variance_summary: Summary::of(&variances),
        norm_summary: Summary::of(&norms),
        per_kernel_mean: means,
        per_kernel_variance: variances,
        per_kernel_norm: norms,
    })
}

/// All N(N−1)/2 pairwise distances, ascending. The first entry is δ(W).
pub fn distance_spectrum(c: &Codebook, metric: Metric) -> Result<Vec<f64>> {
    let subspaces = c.subspaces();
    if subspaces.len() < 2 {
        return Err(Error::InvalidProblem(format!(
            "distance spectrum needs at least two subspaces, got {}",
            subspaces.len()
        )));
    }
    let mut out = Vec::with_capacity(subspaces.len() * (subspaces.len() - 1) / 2);
    for (i, s) in subspaces.iter().enumerate() {
        for t in &subspaces[i + 1..] {
            out.push(grassmann::distance(s, t, metric)?);
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Equal-width histogram of `values` over `[lo, hi]` as `(bin_lo, bin_hi, count)`.
pub fn histogram(values: &[f64], bins: usize, lo: f64, hi: f64) -> Vec<(f64, f64, usize)> {
    let bins = bins.max(1);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = if width > 0.0 {
            (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1)
        } else {
            0
        };
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + width * i as f64, lo + width * (i + 1) as f64, c))
        .collect()
}

/// Field-by-field differences `a − b` of two stat reports.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsComparison {
    pub mean_delta: Vec<f64>,
    pub variance_delta: Vec<f64>,
    pub norm_delta: Vec<f64>,
    pub sparse_count_delta: i64,
    pub mean_summary_delta: Summary,
    pub variance_summary_delta: Summary,
    pub norm_summary_delta: Summary,
}

fn summary_delta(a: &Summary, b: &Summary) -> Summary {
    Summary {
        min: a.min - b.min,
        max: a.max - b.max,
        mean: a.mean - b.mean,
        std: a.std - b.std,
    }
}

impl StatsComparison {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,mean_delta,variance_delta,norm_delta\n");
        for i in 0..self.mean_delta.len() {
            let _ = writeln!(
                out,
                "{i},{},{},{}",
                self.mean_delta[i], self.variance_delta[i], self.norm_delta[i]
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "sparse count delta: {}", self.sparse_count_delta);
        for (name, s) in [
            ("mean", &self.mean_summary_delta),
            ("variance", &self.variance_summary_delta),
            ("norm", &self.norm_summary_delta),
        ] {
            let _ = writeln!(
                out,
                "{name:<9} Δmin {:+.6e}  Δmax {:+.6e}  Δmean {:+.6e}  Δstd {:+.6e}",
                s.min, s.max, s.mean, s.std
            );
        }
        out
    }
}

pub fn compare_reports(a: &KernelStats, b: &KernelStats) -> Result<StatsComparison> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "reports cover {} and {} kernels",
            a.len(),
            b.len()
        )));
    }
    let diff = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p - q).collect::<Vec<_>>();
    Ok(StatsComparison {
        mean_delta: diff(&a.per_kernel_mean, &b.per_kernel_mean),
        variance_delta: diff(&a.per_kernel_variance, &b.per_kernel_variance),
        norm_delta: diff(&a.per_kernel_norm, &b.per_kernel_norm),
        sparse_count_delta: a.sparse_count as i64 - b.sparse_count as i64,
        mean_summary_delta: summary_delta(&a.mean_summary, &b.mean_summary),
        variance_summary_delta: summary_delta(&a.variance_summary, &b.variance_summary),
        norm_summary_delta: summary_delta(&a.norm_summary, &b.norm_summary),
    })
}

/// Baseline conv weights drawn i.i.d. from `N(0, 2/d_in)`.
pub fn kaiming_normal_tensor(
    out_channels: usize,
    in_channels: usize,
    height: usize,
    width: usize,
    seed: u64,
) -> KernelTensor {
    let std = kaiming_factor(in_channels, height, width);
    let normal = Normal::new(0.0, std).expect("finite positive std");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..out_channels * in_channels * height * width)
        .map(|_| normal.sample(&mut rng))
        .collect();
    KernelTensor::new(out_channels, in_channels, height, width, values).expect("sized to shape")
}
