//! Points of the real Grassmann manifold G(m, k) and the distances between them.
//!
//! A subspace is stored as an explicit m×k basis with orthonormal columns.
//! Principal angles come from the singular values of `SᵀT` (cosines) and of
//! the residual `T − S·SᵀT` (sines); the sine branch is used for small angles
//! where `arccos` loses half of the available precision.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum entrywise deviation of `BᵀB` from the identity tolerated by [`Subspace`].
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Relative singular value threshold below which a raw matrix is considered rank deficient.
pub const RANK_TOL: f64 = 1e-8;

/// A k-dimensional linear subspace of R^m, represented by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Wraps a basis that is already orthonormal.
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Result<Self> {
        check_shape(basis.nrows(), basis.ncols())?;
        let deviation = orthonormality_deviation(&basis);
        if deviation > ORTHONORMALITY_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { basis })
    }

    /// Orthonormalizes the columns of `raw` with a Householder QR whose `R`
    /// factor has a non-negative diagonal, so the result is a deterministic
    /// function of the input.
    pub fn orthonormalize(raw: &DMatrix<f64>) -> Result<Self> {
        let (m, k) = raw.shape();
        check_shape(m, k)?;
        let sv = raw.singular_values();
        let largest = sv.max();
        let smallest = sv.min();
        if !(largest > 0.0) || !(smallest > RANK_TOL * largest) {
            return Err(Error::RankDeficient { smallest, largest });
        }
        Ok(Self {
            basis: qr_positive(raw.clone()),
        })
    }

    /// Ambient dimension m.
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Subspace dimension k.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn into_basis(self) -> DMatrix<f64> {
        self.basis
    }

    /// `‖BᵀB − I‖_max` for this basis.
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_deviation(&self.basis)
    }

    /// Basis entries in column-major order.
    pub fn as_slice(&self) -> &[f64] {
        self.basis.as_slice()
    }

    pub(crate) fn from_basis_unchecked(basis: DMatrix<f64>) -> Self {
        Self { basis }
    }
}

fn check_shape(m: usize, k: usize) -> Result<()> {
    if k == 0 || k > m {
        return Err(Error::DimensionMismatch(format!(
            "subspace dimension must satisfy 1 <= k <= m, got m={m}, k={k}"
        )));
    }
    Ok(())
}

pub(crate) fn orthonormality_deviation(basis: &DMatrix<f64>) -> f64 {
    let gram = basis.transpose() * basis;
    let k = gram.nrows();
    let mut worst = 0.0_f64;
    for j in 0..k {
        for i in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            let dev = (gram[(i, j)] - target).abs();
            if !(dev <= worst) {
                worst = dev;
            }
        }
    }
    worst
}

/// Thin Q factor of `raw` with columns flipped so that `diag(R) ≥ 0`.
pub(crate) fn qr_positive(raw: DMatrix<f64>) -> DMatrix<f64> {
    let k = raw.ncols();
    let qr = raw.qr();
    let r_diag = qr.r().diagonal();
    let mut q = qr.q();
    for j in 0..k {
        if r_diag[j] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Principal angles θ₁ ≤ … ≤ θ_k between two subspaces, in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalAngles {
    angles: Vec<f64>,
}

impl PrincipalAngles {
    pub fn as_slice(&self) -> &[f64] {
        &self.angles
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Smallest principal angle θ₁.
    pub fn smallest(&self) -> f64 {
        self.angles[0]
    }
}

/// Subspace distance measures supported by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// `√(Σ sin²θᵢ)`, bounded by `√k`.
    Chordal,
    /// `arccos(Π cos θᵢ)`, bounded by `π/2`.
    FubiniStudy,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Chordal, Metric::FubiniStudy];

    /// Largest value the metric can take on G(m, k).
    pub fn max_distance(self, k: usize) -> f64 {
        match self {
            Metric::Chordal => (k as f64).sqrt(),
            Metric::FubiniStudy => std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Chordal => "chordal",
            Metric::FubiniStudy => "fs",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "chordal" | "chord" => Ok(Metric::Chordal),
            "fs" | "fubini-study" | "fubinistudy" | "fubini_study" => Ok(Metric::FubiniStudy),
            other => Err(format!("unknown metric '{other}' (expected chordal or fs)")),
        }
    }
}

fn check_compatible(s: &Subspace, t: &Subspace) -> Result<()> {
    if s.ambient_dim() != t.ambient_dim() || s.dim() != t.dim() {
        return Err(Error::DimensionMismatch(format!(
            "G({}, {}) vs G({}, {})",
            s.ambient_dim(),
            s.dim(),
            t.ambient_dim(),
            t.dim()
        )));
    }
    Ok(())
}

/// Principal angles between `s` and `t`, sorted ascending.
pub fn principal_angles(s: &Subspace, t: &Subspace) -> Result<PrincipalAngles> {
    check_compatible(s, t)?;
    let cross = s.basis.transpose() * &t.basis;
    let residual = &t.basis - &s.basis * &cross;

    let mut cosines: Vec<f64> = cross
        .singular_values()
        .iter()
        .map(|c| c.clamp(0.0, 1.0))
        .collect();
    cosines.sort_by(|a, b| b.total_cmp(a));
    let mut sines: Vec<f64> = residual
        .singular_values()
        .iter()
        .map(|x| x.clamp(0.0, 1.0))
        .collect();
    sines.sort_by(f64::total_cmp);

    let mut angles: Vec<f64> = cosines
        .iter()
        .zip(&sines)
        .map(|(&c, &s)| {
            // below π/4 the sine branch is well conditioned, above it the cosine one
            if c * c >= 0.5 {
                s.asin()
            } else {
                c.acos()
            }
        })
        .map(|a| a.clamp(0.0, std::f64::consts::FRAC_PI_2))
        .collect();
    angles.sort_by(f64::total_cmp);
    Ok(PrincipalAngles { angles })
}

/// Distance between two subspaces under `metric`.
pub fn distance(s: &Subspace, t: &Subspace, metric: Metric) -> Result<f64> {
    check_compatible(s, t)?;
    match metric {
        // ‖(I − SSᵀ)T‖_F² = k − ‖SᵀT‖_F², without the cancellation near zero
        Metric::Chordal => {
            let cross = s.basis.transpose() * &t.basis;
            let residual = &t.basis - &s.basis * cross;
            Ok(residual.norm())
        }
        Metric::FubiniStudy => {
            let angles = principal_angles(s, t)?;
            Ok(fubini_study_from_angles(angles.as_slice()))
        }
    }
}

/// `arccos(Π cos θᵢ)` evaluated through `atan2` so that tiny distances keep
/// their relative precision.
pub fn fubini_study_from_angles(angles: &[f64]) -> f64 {
    let cos_prod: f64 = angles.iter().map(|a| a.cos()).product();
    let log_cos2: f64 = angles
        .iter()
        .map(|a| {
            let s = a.sin();
            (-s * s).ln_1p()
        })
        .sum();
    let sin2 = -log_cos2.exp_m1();
    sin2.max(0.0).sqrt().atan2(cos_prod.abs())
}

/// `√(Σ sin²θᵢ)`.
pub fn chordal_from_angles(angles: &[f64]) -> f64 {
    angles.iter().map(|a| a.sin().powi(2)).sum::<f64>().sqrt()
}

/// Symmetric N×N matrix of pairwise distances with a zero diagonal.
pub fn pairwise_distances(subspaces: &[Subspace], metric: Metric) -> Result<DMatrix<f64>> {
    let n = subspaces.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = distance(&subspaces[i], &subspaces[j], metric)?;
            out[(i, j)] = d;
            out[(j, i)] = d;
        }
    }
    Ok(out)
}

/// Minimum off-diagonal pairwise distance δ(W); `None` when fewer than two
/// subspaces are given.
pub fn min_distance(subspaces: &[Subspace], metric: Metric) -> Result<Option<f64>> {
    let n = subspaces.len();
    let mut best: Option<f64> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = distance(&subspaces[i], &subspaces[j], metric)?;
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    }
    Ok(best)
}
