use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::engine::{mc_engine, Draw, McConfig};
use super::ensemble::{sample, EnsembleSpec};
use crate::error::{Error, Result};
use crate::numerics::{complex_eigenvalues, C64};

/// How eigenvalues are binned.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Binning {
    /// Equal-width bins in `|z|` on `[0, r_max]`.
    Radial { r_max: f64, bins: usize },
    /// Equal-width bins in `|z|^2` on `[lo, hi]`, i.e. equal-area annuli.
    RadialSq { lo: f64, hi: f64, bins: usize },
    /// Rectangular grid on `[x_lo, x_hi] x [y_lo, y_hi]`.
    Planar { x_lo: f64, x_hi: f64, nx: usize, y_lo: f64, y_hi: f64, ny: usize },
}

/// A bin of the complex plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Annulus { r_lo: f64, r_hi: f64 },
    Rect { x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64 },
}

impl Region {
    pub fn area(&self) -> f64 {
        match *self {
            Region::Annulus { r_lo, r_hi } => PI * (r_hi * r_hi - r_lo * r_lo),
            Region::Rect { x_lo, x_hi, y_lo, y_hi } => (x_hi - x_lo) * (y_hi - y_lo),
        }
    }

    /// Representative point: mid-radius on the positive real axis, or the centre.
    pub fn center(&self) -> (f64, f64) {
        match *self {
            Region::Annulus { r_lo, r_hi } => (0.5 * (r_lo + r_hi), 0.0),
            Region::Rect { x_lo, x_hi, y_lo, y_hi } => (0.5 * (x_lo + x_hi), 0.5 * (y_lo + y_hi)),
        }
    }
}

impl Binning {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Binning::Radial { r_max, bins } => r_max > 0.0 && bins > 0,
            Binning::RadialSq { lo, hi, bins } => lo >= 0.0 && hi > lo && bins > 0,
            Binning::Planar { x_lo, x_hi, nx, y_lo, y_hi, ny } => x_hi > x_lo && y_hi > y_lo && nx > 0 && ny > 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid binning {self:?}")))
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            Binning::Radial { bins, .. } | Binning::RadialSq { bins, .. } => bins,
            Binning::Planar { nx, ny, .. } => nx * ny,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn regions(&self) -> Vec<Region> {
        match *self {
            Binning::Radial { r_max, bins } => {
                let h = r_max / bins as f64;
                (0..bins).map(|k| Region::Annulus { r_lo: k as f64 * h, r_hi: (k + 1) as f64 * h }).collect()
            }
            Binning::RadialSq { lo, hi, bins } => {
                let h = (hi - lo) / bins as f64;
                (0..bins)
                    .map(|k| Region::Annulus {
                        r_lo: (lo + k as f64 * h).sqrt(),
                        r_hi: (lo + (k + 1) as f64 * h).sqrt(),
                    })
                    .collect()
            }
            Binning::Planar { x_lo, x_hi, nx, y_lo, y_hi, ny } => {
                let (hx, hy) = ((x_hi - x_lo) / nx as f64, (y_hi - y_lo) / ny as f64);
                let mut out = Vec::with_capacity(nx * ny);
                for iy in 0..ny {
                    for ix in 0..nx {
                        out.push(Region::Rect {
                            x_lo: x_lo + ix as f64 * hx,
                            x_hi: x_lo + (ix + 1) as f64 * hx,
                            y_lo: y_lo + iy as f64 * hy,
                            y_hi: y_lo + (iy + 1) as f64 * hy,
                        });
                    }
                }
                out
            }
        }
    }

    /// Bin index of `z`, or `None` outside the binned region.
    pub fn locate(&self, z: C64) -> Option<usize> {
        fn slot(v: f64, lo: f64, hi: f64, n: usize) -> Option<usize> {
            if !(v >= lo && v < hi) {
                return None;
            }
            Some((((v - lo) / (hi - lo)) * n as f64).floor().min((n - 1) as f64) as usize)
        }
        match *self {
            Binning::Radial { r_max, bins } => slot(z.norm(), 0.0, r_max, bins),
            Binning::RadialSq { lo, hi, bins } => slot(z.norm_sqr(), lo, hi, bins),
            Binning::Planar { x_lo, x_hi, nx, y_lo, y_hi, ny } => {
                let ix = slot(z.re, x_lo, x_hi, nx)?;
                let iy = slot(z.im, y_lo, y_hi, ny)?;
                Some(iy * nx + ix)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityBin {
    pub region: Region,
    /// Mean eigenvalue count per unit area.
    pub density: f64,
    pub stderr: f64,
}

/// Empirical one-point density `rho_n`; integrates to `n` over the plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityTable {
    pub binning: Binning,
    pub bins: Vec<DensityBin>,
    /// Mean number of eigenvalues per matrix that fell outside every bin.
    pub outside: f64,
    pub outside_stderr: f64,
    pub samples: u64,
    /// Matrices skipped after an eigensolver failure.
    pub skipped: u64,
    pub seed: u64,
}

/// Histogram of all sampled eigenvalues. Standard errors come from the
/// per-matrix variance of bin counts, so correlations between eigenvalues of
/// the same matrix are accounted for.
pub fn eig_histogram(spec: &EnsembleSpec, binning: Binning, cfg: McConfig) -> Result<DensityTable> {
    binning.validate()?;
    let regions = binning.regions();
    let areas: Vec<f64> = regions.iter().map(Region::area).collect();
    let nb = regions.len();
    let res = mc_engine(cfg, nb + 1, |_, rng| {
        let m = sample(spec, rng);
        let Ok(eigs) = complex_eigenvalues(&m) else {
            return Ok(Draw::Skip);
        };
        let mut counts = vec![C64::new(0.0, 0.0); nb + 1];
        for z in eigs {
            match binning.locate(z) {
                Some(k) => counts[k].re += 1.0 / areas[k],
                None => counts[nb].re += 1.0,
            }
        }
        Ok(Draw::Value(counts))
    })?;
    let bins = regions
        .into_iter()
        .enumerate()
        .map(|(k, region)| DensityBin { region, density: res.mean[k].re, stderr: res.stderr[k] })
        .collect();
    Ok(DensityTable {
        binning,
        bins,
        outside: res.mean[nb].re,
        outside_stderr: res.stderr[nb],
        samples: res.samples,
        skipped: res.skipped,
        seed: res.seed,
    })
}
