//! Finite-difference oracle: Richardson-extrapolated central differences of
//! plain `f64` metric values. Independent of the jet arithmetic, so it
//! catches convention slips in the forward-mode path.

use super::MetricChart;

/// Default base step.
pub const STEP: f64 = 1e-4;

/// `∂_v f(x)` by 4th-order Richardson-extrapolated central differences.
pub fn partial<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x: &[f64], v: usize, h: f64) -> Vec<f64> {
    let central = |h: f64| {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[v] += h;
        xm[v] -= h;
        let (fp, fm) = (f(&xp), f(&xm));
        fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<f64>>()
    };
    let d1 = central(h);
    let d2 = central(h / 2.0);
    d1.iter().zip(&d2).map(|(a, b)| (4.0 * b - a) / 3.0).collect()
}

/// `Γ^i_{jk}` from finite differences of `g`.
pub fn christoffel(chart: &MetricChart, x: &[f64], h: f64) -> Vec<f64> {
    let n = chart.dim();
    let metric = |y: &[f64]| chart.field.metric_f64(y);
    let dg: Vec<Vec<f64>> = (0..n).map(|l| partial(&metric, x, l, h)).collect();
    let ginv = chart
        .metric(x)
        .try_inverse()
        .expect("oracle needs a nondegenerate metric");
    let mut gamma = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv[(i, l)] * (dg[j][l * n + k] + dg[k][l * n + j] - dg[l][j * n + k]);
                }
                gamma[(i * n + j) * n + k] = 0.5 * s;
            }
        }
    }
    gamma
}

/// `R^i_{jkl}` by differencing the oracle Christoffel symbols.
pub fn riemann(chart: &MetricChart, x: &[f64], h: f64) -> Vec<f64> {
    let n = chart.dim();
    // A coarser outer step keeps nested-difference roundoff in check.
    let outer = h * 10.0;
    let gam = |y: &[f64]| christoffel(chart, y, h);
    let dgam: Vec<Vec<f64>> = (0..n).map(|v| partial(&gam, x, v, outer)).collect();
    let g0 = gam(x);
    let g3 = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let mut r = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = dgam[k][g3(i, l, j)] - dgam[l][g3(i, k, j)];
                    for m in 0..n {
                        acc += g0[g3(i, k, m)] * g0[g3(m, l, j)] - g0[g3(i, l, m)] * g0[g3(m, k, j)];
                    }
                    r[((i * n + j) * n + k) * n + l] = acc;
                }
            }
        }
    }
    r
}
