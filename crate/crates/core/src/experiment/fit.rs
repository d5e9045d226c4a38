//! Least-squares fits of `p_L = p^(d/2) exp(c0 + c1 p + c2 p^2)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::layout::LayoutKind;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub residual_norm: f64,
    pub d: usize,
}

impl FitResult {
    pub fn evaluate(&self, p: f64) -> f64 {
        formula(self.d, self.c0, self.c1, self.c2, p)
    }
}

pub fn formula(d: usize, c0: f64, c1: f64, c2: f64, p: f64) -> f64 {
    p.powf(d as f64 / 2.0) * (c0 + c1 * p + c2 * p * p).exp()
}

/// Published fit constants for one code and layout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitRow {
    pub code: &'static str,
    pub layout: LayoutKind,
    pub d: usize,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl FitRow {
    pub fn evaluate(&self, p: f64) -> f64 {
        formula(self.d, self.c0, self.c1, self.c2, p)
    }
}

pub const PUBLISHED_FITS: [FitRow; 8] = [
    FitRow { code: "bb72", layout: LayoutKind::Sparse, d: 6, c0: 12.002, c1: 674.98, c2: -67694.0 },
    FitRow { code: "bb90", layout: LayoutKind::Sparse, d: 10, c0: 24.397, c1: -290.59, c2: 24215.0 },
    FitRow { code: "bb108", layout: LayoutKind::Sparse, d: 10, c0: 22.137, c1: 683.86, c2: -72746.0 },
    FitRow { code: "bb144", layout: LayoutKind::Sparse, d: 12, c0: 28.049, c1: 375.30, c2: -42586.0 },
    FitRow { code: "bb72", layout: LayoutKind::Flat, d: 6, c0: 11.963, c1: 408.55, c2: -29498.0 },
    FitRow { code: "bb90", layout: LayoutKind::Flat, d: 10, c0: 24.105, c1: -325.04, c2: 34571.0 },
    FitRow { code: "bb108", layout: LayoutKind::Flat, d: 10, c0: 21.678, c1: 522.45, c2: -43848.0 },
    FitRow { code: "bb144", layout: LayoutKind::Flat, d: 12, c0: 27.422, c1: 140.49, c2: 3216.1 },
];

pub fn published_fit(code: &str, layout: LayoutKind) -> Option<&'static FitRow> {
    PUBLISHED_FITS.iter().find(|r| r.code == code && r.layout == layout)
}

/// Fits `ln p_L - (d/2) ln p` against `[1, p, p^2]`. Points with
/// non-positive `p` or `p_L` are ignored.
pub fn fit_curve(points: &[(f64, f64)], d: usize) -> Result<FitResult> {
    let usable: Vec<(f64, f64)> = points.iter().copied().filter(|&(p, pl)| p > 0.0 && pl > 0.0).collect();
    if usable.len() < 3 {
        return Err(Error::Fit(format!("{} usable points, at least 3 are required", usable.len())));
    }
    // Columns in t = p / scale keep the design well conditioned.
    let scale = usable.iter().map(|&(p, _)| p).fold(0.0, f64::max);
    let a = DMatrix::from_fn(usable.len(), 3, |i, j| (usable[i].0 / scale).powi(j as i32));
    let y = DVector::from_iterator(usable.len(), usable.iter().map(|&(p, pl)| pl.ln() - d as f64 / 2.0 * p.ln()));
    let qr = a.clone().qr();
    let r = qr.r();
    let rmax = (0..3).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..3).any(|i| r[(i, i)].abs() <= 1e-10 * rmax) {
        return Err(Error::Fit("design matrix is rank deficient; at least 3 distinct p values are required".into()));
    }
    let qty = qr.q().transpose() * &y;
    let t = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Fit("singular triangular factor".into()))?;
    let residual_norm = (&a * &t - &y).norm();
    let c = [t[0], t[1] / scale, t[2] / (scale * scale)];
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::Fit("non-finite coefficients".into()));
    }
    Ok(FitResult { c0: c[0], c1: c[1], c2: c[2], residual_norm, d })
}
