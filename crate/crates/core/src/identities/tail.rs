//! Extrapolation of truncated integrals and the quadratic area fit.

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailVerdict {
    /// `I(t) = I∞ + c t^(−p)` fits with `p ≥ 0.1`, or the values have stopped moving.
    Converged,
    /// Increments do not shrink fast enough to bound the tail.
    Diverging,
    /// Fewer than three usable levels.
    Insufficient,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFit {
    /// Value at the largest level.
    pub last: f64,
    /// Extrapolated limit; equals `last` unless converged.
    pub limit: f64,
    pub exponent: Option<f64>,
    pub verdict: TailVerdict,
    pub t: [f64; 3],
    pub values: [f64; 3],
}

impl TailFit {
    pub fn converged(&self) -> bool {
        self.verdict == TailVerdict::Converged
    }

    /// A trivially converged fit for a quantity known exactly.
    pub fn exact(value: f64) -> TailFit {
        TailFit {
            last: value,
            limit: value,
            exponent: None,
            verdict: TailVerdict::Converged,
            t: [f64::NAN; 3],
            values: [value; 3],
        }
    }
}

const MIN_EXPONENT: f64 = 0.1;
const MAX_EXPONENT: f64 = 50.0;

fn closest_log(ts: &[f64], target: f64, below: usize) -> usize {
    let mut best = 0;
    for k in 0..below {
        if (ts[k].ln() - target.ln()).abs() < (ts[best].ln() - target.ln()).abs() {
            best = k;
        }
    }
    best
}

/// Fits `I(t) = I∞ + c t^(−p)` through three levels: the last one, the one
/// nearest a decade below it and the one nearest their geometric mean.
pub fn tail_extrapolate(ts: &[f64], values: &[f64]) -> TailFit {
    let n = ts.len().min(values.len());
    let last = if n > 0 { values[n - 1] } else { f64::NAN };
    let mut fit = TailFit {
        last,
        limit: last,
        exponent: None,
        verdict: TailVerdict::Insufficient,
        t: [f64::NAN; 3],
        values: [f64::NAN; 3],
    };
    if n < 3 || ts[..n].iter().any(|t| !(*t > 0.0)) {
        return fit;
    }
    let k3 = n - 1;
    let t3 = ts[k3];
    let k1 = closest_log(ts, t3 / 10f64.sqrt(), k3);
    let t1 = ts[k1];
    let mut k2 = closest_log(&ts[..k3], (t1 * t3).sqrt(), k3);
    if k2 <= k1 {
        k2 = k1 + 1;
    }
    if k2 >= k3 {
        return fit;
    }
    let t2 = ts[k2];
    let (i1, i2, i3) = (values[k1], values[k2], values[k3]);
    fit.t = [t1, t2, t3];
    fit.values = [i1, i2, i3];

    if (i3 - i1).abs() <= 1e-9 * (1.0 + i3.abs()) {
        fit.verdict = TailVerdict::Converged;
        return fit;
    }
    let d1 = i2 - i1;
    let d2 = i3 - i2;
    let rho = d2 / d1;
    // Shape of the increment ratio for a given exponent; decreasing in p.
    let shape = |p: f64| (t2.powf(-p) - t3.powf(-p)) / (t1.powf(-p) - t2.powf(-p));
    let at_zero = (t3 / t2).ln() / (t2 / t1).ln();
    if !(rho > 0.0) || rho >= at_zero {
        fit.verdict = TailVerdict::Diverging;
        return fit;
    }
    let (mut lo, mut hi) = (1e-9, MAX_EXPONENT);
    if rho <= shape(hi) {
        lo = hi;
    } else {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if shape(mid) > rho {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let p = 0.5 * (lo + hi);
    let c = d2 / (t3.powf(-p) - t2.powf(-p));
    fit.exponent = Some(p);
    if p >= MIN_EXPONENT {
        fit.limit = i3 - c * t3.powf(-p);
        fit.verdict = TailVerdict::Converged;
    } else {
        fit.verdict = TailVerdict::Diverging;
    }
    fit
}

/// Least-squares `v ≈ c₂t² + c₁t + c₀` over the top half-decade of levels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticFit {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    /// `c₂/π`, the area-growth limit.
    pub ratio: f64,
    /// RMS residual over RMS value.
    pub rel_residual: f64,
    pub levels: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    pub gate_ok: bool,
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(m);
    if d.abs() < 1e-14 {
        return None;
    }
    let mut x = [0.0; 3];
    for (c, xc) in x.iter_mut().enumerate() {
        let mut mc = m;
        for r in 0..3 {
            mc[r][c] = b[r];
        }
        *xc = det(mc) / d;
    }
    Some(x)
}

/// Fits the top half-decade `[t_max/√10, t_max]`. `None` with fewer than
/// three levels in the window.
pub fn quadratic_fit(ts: &[f64], vs: &[f64], gate: f64) -> Option<QuadraticFit> {
    let t_hi = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(t_hi > 0.0) {
        return None;
    }
    let t_lo = t_hi / 10f64.sqrt();
    let pts: alloc::vec::Vec<(f64, f64)> = ts
        .iter()
        .zip(vs)
        .filter(|(t, v)| **t >= t_lo * (1.0 - 1e-12) && v.is_finite())
        .map(|(t, v)| (*t / t_hi, *v))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let mut m = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for &(s, v) in &pts {
        let row = [s * s, s, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            b[i] += row[i] * v;
        }
    }
    let [a2, a1, a0] = solve3(m, b)?;
    let (mut ss_res, mut ss_val) = (0.0, 0.0);
    for &(s, v) in &pts {
        let e = a2 * s * s + a1 * s + a0 - v;
        ss_res += e * e;
        ss_val += v * v;
    }
    let rel = (ss_res / ss_val).sqrt();
    let c2 = a2 / (t_hi * t_hi);
    Some(QuadraticFit {
        c2,
        c1: a1 / t_hi,
        c0: a0,
        ratio: c2 / core::f64::consts::PI,
        rel_residual: rel,
        levels: pts.len(),
        t_lo,
        t_hi,
        gate_ok: rel < gate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| (a.ln() + (b.ln() - a.ln()) * k as f64 / (n - 1) as f64).exp())
            .collect()
    }

    #[test]
    fn recovers_power_law_limit() {
        let ts = logspace(1.0, 300.0, 24);
        for p in [0.5, 2.0 / 3.0, 2.0] {
            let vs: Vec<f64> = ts.iter().map(|t| 7.0 - 3.0 * t.powf(-p)).collect();
            let f = tail_extrapolate(&ts, &vs);
            assert!(f.converged(), "{p}: {f:?}");
            assert!((f.limit - 7.0).abs() < 1e-9, "{p}: {f:?}");
            assert!((f.exponent.unwrap() - p).abs() < 1e-6);
        }
    }

    #[test]
    fn flags_growth() {
        let ts = logspace(1.0, 100.0, 20);
        for g in [|t: f64| 8.0 * t, |t: f64| t.ln(), |t: f64| t.powf(0.05)] {
            let vs: Vec<f64> = ts.iter().map(|&t| g(t)).collect();
            let f = tail_extrapolate(&ts, &vs);
            assert_eq!(f.verdict, TailVerdict::Diverging, "{f:?}");
            assert_eq!(f.limit, f.last);
        }
    }

    #[test]
    fn constant_and_short_inputs() {
        let ts = logspace(1.0, 10.0, 5);
        assert!(tail_extrapolate(&ts, &[2.0; 5]).converged());
        assert_eq!(tail_extrapolate(&ts[..2], &[1.0, 2.0]).verdict, TailVerdict::Insufficient);
    }

    #[test]
    fn quadratic_fit_recovers_coefficients() {
        let ts = logspace(1.0, 100.0, 30);
        let vs: Vec<f64> = ts.iter().map(|t| 3.0 * core::f64::consts::PI * t * t + 2.0 * t - 5.0).collect();
        let f = quadratic_fit(&ts, &vs, 1e-2).unwrap();
        assert!((f.ratio - 3.0).abs() < 1e-9, "{f:?}");
        assert!((f.c1 - 2.0).abs() < 1e-6 && (f.c0 + 5.0).abs() < 1e-4);
        assert!(f.gate_ok && f.rel_residual < 1e-12);
        assert!(quadratic_fit(&ts[..1], &vs[..1], 1e-2).is_none());
    }
}
