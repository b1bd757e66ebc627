//! Fixed-format CSV emission (17 significant digits, no timestamps).

use dirac_semiclassical::kernel::{KernelEstimate, RatioRow};
use dirac_semiclassical::linalg::CMat;

/// Negative zero prints as zero.
pub fn fmt(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_else(|| "nan".to_string())
}

pub fn kernel_header(n: usize) -> String {
    let mut cols = vec!["h".to_string()];
    for i in 0..n {
        for j in 0..n {
            cols.push(format!("re_{i}{j}"));
            cols.push(format!("im_{i}{j}"));
        }
    }
    cols.extend(
        ["dA", "det_exp_prime", "ratio", "abs_ratio_minus_1"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols.join(",")
}

/// One data row; `matrix` is written row-major.
pub fn kernel_row(
    h: f64,
    matrix: &CMat<f64>,
    est: &KernelEstimate<f64>,
    ratio: Option<&RatioRow<f64>>,
) -> String {
    let mut cols = vec![fmt(h)];
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            cols.push(fmt(matrix[(i, j)].re));
            cols.push(fmt(matrix[(i, j)].im));
        }
    }
    cols.push(fmt(est.d_a));
    cols.push(fmt_opt(est.det_exp_prime));
    cols.push(fmt_opt(ratio.map(|r| r.ratio.re)));
    cols.push(fmt_opt(ratio.map(|r| r.abs_ratio_minus_1)));
    cols.join(",")
}

pub fn slope_footer(slope: Option<f64>) -> String {
    format!("# slope,{}", fmt_opt(slope))
}
