//! Least-squares fits and a 1D maximizer.

// unused whenever std's inherent float methods are in scope
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {required} points, got {got}")]
    InsufficientPoints { required: usize, got: usize },
    #[error("abscissae are degenerate (zero spread)")]
    Degenerate,
    #[error("non-positive value {value} at index {index} cannot be log-transformed")]
    NonPositive { index: usize, value: f64 },
    #[error("fit did not converge after {iterations} iterations (residual {residual:e}, mu {mu:e}, kT {kt:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        mu: f64,
        kt: f64,
    },
}

/// Ordinary least-squares straight line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit, FitError> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return Err(FitError::InsufficientPoints { required: 2, got: n });
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(FitError::Degenerate);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (intercept + slope * x);
        ss_res += r * r;
    }
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(LinearFit {
        slope,
        intercept,
        residual: (ss_res / nf).sqrt(),
        r_squared,
    })
}

/// Fits `ln y = intercept + slope · ln x`.
pub fn power_law_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit, FitError> {
    let mut lx = alloc::vec::Vec::with_capacity(xs.len());
    let mut ly = alloc::vec::Vec::with_capacity(ys.len());
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        if x <= 0.0 {
            return Err(FitError::NonPositive { index: i, value: x });
        }
        if y <= 0.0 {
            return Err(FitError::NonPositive { index: i, value: y });
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    linear_fit(&lx, &ly)
}

/// Least-squares parabola `c0 + c1 t + c2 t²`, returned as `[c0, c1, c2]`.
pub fn quadratic_fit(ts: &[f64], xs: &[f64]) -> Result<[f64; 3], FitError> {
    let n = ts.len().min(xs.len());
    if n < 3 {
        return Err(FitError::InsufficientPoints { required: 3, got: n });
    }
    // Centre and scale time for conditioning, then map back.
    let t0 = ts[..n].iter().sum::<f64>() / n as f64;
    let scale = ts[..n].iter().map(|t| (t - t0).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(FitError::Degenerate);
    }
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (t, x) in ts.iter().zip(xs) {
        let s = (t - t0) / scale;
        let pows = [1.0, s, s * s];
        for i in 0..3 {
            rhs[i] += pows[i] * x;
            for j in 0..3 {
                m[i][j] += pows[i] * pows[j];
            }
        }
    }
    let c = solve3(m, rhs).ok_or(FitError::Degenerate)?;
    // x = c0 + c1 s + c2 s², s = (t - t0)/scale
    let a2 = c[2] / (scale * scale);
    let a1 = c[1] / scale - 2.0 * a2 * t0;
    let a0 = c[0] - c[1] * t0 / scale + a2 * t0 * t0;
    Ok([a0, a1, a2])
}

#[allow(clippy::needless_range_loop)]
fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for k in row + 1..3 {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Fermi–Dirac occupancy `1 / (exp((e - mu)/kt) + 1)`.
pub fn fermi_dirac(energy: f64, mu: f64, kt: f64) -> f64 {
    if kt <= 0.0 {
        return if energy < mu {
            1.0
        } else if energy > mu {
            0.0
        } else {
            0.5
        };
    }
    let z = (energy - mu) / kt;
    if z > 700.0 {
        0.0
    } else {
        1.0 / (z.exp() + 1.0)
    }
}

/// Result of a Fermi–Dirac least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiFit {
    pub mu: f64,
    /// Fitted thermal energy `k_B T` in the same units as the energies.
    pub kt: f64,
    /// Root-mean-square occupancy residual.
    pub residual: f64,
    pub iterations: usize,
}

/// Levenberg–Marquardt fit of `occupancy(energy)` to a Fermi–Dirac curve with
/// `mu` and `kt` free.
pub fn fit_fermi_dirac(energies: &[f64], occupancy: &[f64], mu0: f64, kt0: f64) -> Result<FermiFit, FitError> {
    let n = energies.len().min(occupancy.len());
    if n < 3 {
        return Err(FitError::InsufficientPoints { required: 3, got: n });
    }
    let scale = if kt0 > 0.0 {
        kt0
    } else {
        return Err(FitError::Degenerate);
    };
    let e: alloc::vec::Vec<f64> = energies[..n].iter().map(|x| x / scale).collect();
    let f = &occupancy[..n];

    let cost = |mu: f64, kt: f64| -> f64 {
        e.iter()
            .zip(f)
            .map(|(&ei, &fi)| {
                let r = fi - fermi_dirac(ei, mu, kt);
                r * r
            })
            .sum::<f64>()
    };

    let mut mu = mu0 / scale;
    let mut kt = 1.0;
    let mut c = cost(mu, kt);
    let mut lambda = 1e-3;
    const MAX_ITER: usize = 500;
    for iter in 1..=MAX_ITER {
        let mut jtj = [[0.0f64; 2]; 2];
        let mut jtr = [0.0f64; 2];
        for (&ei, &fi) in e.iter().zip(f) {
            let g = fermi_dirac(ei, mu, kt);
            let z = (ei - mu) / kt;
            let s = g * (1.0 - g);
            // residual r = f - g, dr/dp = -dg/dp
            let j = [-s / kt, -s * z / kt];
            let r = fi - g;
            for a in 0..2 {
                jtr[a] += j[a] * r;
                for b in 0..2 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let mut accepted = false;
        for _ in 0..60 {
            let a00 = jtj[0][0] * (1.0 + lambda);
            let a11 = jtj[1][1] * (1.0 + lambda);
            let a01 = jtj[0][1];
            let det = a00 * a11 - a01 * a01;
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let d_mu = -(a11 * jtr[0] - a01 * jtr[1]) / det;
            let d_kt = -(a00 * jtr[1] - a01 * jtr[0]) / det;
            let new_mu = mu + d_mu;
            let new_kt = kt + d_kt;
            if new_kt <= 0.0 || !new_mu.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let nc = cost(new_mu, new_kt);
            if nc <= c {
                let converged = d_mu.abs() < 1e-12 * (1.0 + mu.abs()) && d_kt.abs() < 1e-12 * kt
                    || (c - nc) <= 1e-15 * c.max(1e-300);
                mu = new_mu;
                kt = new_kt;
                c = nc;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                if converged {
                    return Ok(FermiFit {
                        mu: mu * scale,
                        kt: kt * scale,
                        residual: (c / n as f64).sqrt(),
                        iterations: iter,
                    });
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: we are at a minimum.
            return Ok(FermiFit {
                mu: mu * scale,
                kt: kt * scale,
                residual: (c / n as f64).sqrt(),
                iterations: iter,
            });
        }
    }
    Err(FitError::NonConvergence {
        iterations: MAX_ITER,
        residual: (c / n as f64).sqrt(),
        mu: mu * scale,
        kt: kt * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn linear_fit_recovers_exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.5).collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept + 1.5).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn power_law_fit_rejects_single_point() {
        assert_eq!(
            power_law_fit(&[1.0], &[2.0]),
            Err(FitError::InsufficientPoints { required: 2, got: 1 })
        );
    }

    #[test]
    fn quadratic_fit_recovers_parabola_with_offset_times() {
        let ts: Vec<f64> = (0..20).map(|i| 1e-14 * (100.0 + i as f64)).collect();
        let xs: Vec<f64> = ts.iter().map(|t| 2e-9 + 1e6 * t - 0.5 * 3e20 * t * t).collect();
        let c = quadratic_fit(&ts, &xs).unwrap();
        assert!((2.0 * c[2] + 3e20).abs() / 3e20 < 1e-6, "{c:?}");
    }

    #[test]
    fn golden_section_finds_parabola_top() {
        let (x, v) = golden_section_max(|x| 1.0 - (x - 0.3) * (x - 0.3), -2.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fermi_fit_recovers_synthetic_curve() {
        let es: Vec<f64> = (0..80).map(|i| i as f64 * 0.05).collect();
        let fs: Vec<f64> = es.iter().map(|&e| fermi_dirac(e, 1.7, 0.13)).collect();
        let fit = fit_fermi_dirac(&es, &fs, 1.0, 0.3).unwrap();
        assert!((fit.mu - 1.7).abs() < 1e-8, "{fit:?}");
        assert!((fit.kt - 0.13).abs() < 1e-8, "{fit:?}");
    }
}
