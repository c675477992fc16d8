use nalgebra::DMatrix;

/// Residuals of the minimum-norm least-squares fit of every column of `y`
/// on the columns of `design`.
pub(crate) fn ols_residuals(design: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let coef = min_norm_solve(design, y);
    y - design * coef
}

/// Minimum-norm least-squares solution via the SVD pseudo-inverse.
pub(crate) fn min_norm_solve(design: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * design.nrows().max(design.ncols()) as f64 * f64::EPSILON;
    svd.solve(y, tol)
        .expect("both singular vector sets were requested")
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Pearson correlation of two equal-length slices. `None` when either side
/// has zero variance.
pub(crate) fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let ma = mean(a);
    let mb = mean(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}
