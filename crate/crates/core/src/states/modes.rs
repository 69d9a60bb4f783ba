use crate::error::{Error, Result};
use crate::solver::TestFunction;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Cylinder modes e^{-i w_n t + i k_n x}, k_n = 2 pi n / L, |n| <= k_max.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeBasis {
    pub mass: f64,
    pub length: f64,
    pub k_max: usize,
}

impl ModeBasis {
    pub fn new(mass: f64, length: f64, k_max: usize) -> Result<ModeBasis> {
        if !(mass > 0.0) {
            return Err(Error::Precondition("mode states need m > 0 (zero mode of the massless cylinder)".into()));
        }
        if !(length > 0.0) || k_max == 0 {
            return Err(Error::Precondition("need L > 0 and k_max >= 1".into()));
        }
        Ok(ModeBasis { mass, length, k_max })
    }

    pub fn k(&self, n: i64) -> f64 {
        2.0 * PI * n as f64 / self.length
    }

    pub fn omega(&self, n: i64) -> f64 {
        let k = self.k(n);
        (self.mass * self.mass + k * k).sqrt()
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let k = self.k_max as i64;
        -k..=k
    }

    /// a_n(f) = sum f e^{-i w_n t + i k_n x} dt dx (flat volume element), n = -k_max..=k_max.
    pub fn coefficients(&self, f: &TestFunction) -> Result<Vec<Complex64>> {
        let g = f.grid();
        if (g.length - self.length).abs() > 1e-12 * self.length {
            return Err(Error::SpaceMismatch(format!("test function on L = {}, modes on L = {}", g.length, self.length)));
        }
        let kmax = self.k_max as i64;
        let nm = (2 * kmax + 1) as usize;
        let (lo, hi) = match f.level_range() {
            Some(r) => r,
            None => return Ok(vec![Complex64::new(0.0, 0.0); nm]),
        };
        let n = g.n_x;
        let cols: Vec<usize> = (0..n).filter(|&i| (lo..=hi).any(|j| f.values().at(j, i) != 0.0)).collect();
        // spatial transform row by row, then the time sum
        let mut out = vec![Complex64::new(0.0, 0.0); nm];
        let mut row = vec![Complex64::new(0.0, 0.0); nm];
        let ex: Vec<Vec<Complex64>> = cols
            .iter()
            .map(|&i| {
                let x = g.x(i);
                let base = Complex64::from_polar(1.0, self.k(1) * x);
                let mut e = Vec::with_capacity(nm);
                let mut z = Complex64::from_polar(1.0, -(kmax as f64) * self.k(1) * x);
                for _ in 0..nm {
                    e.push(z);
                    z *= base;
                }
                e
            })
            .collect();
        for j in lo..=hi {
            row.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            let mut any = false;
            for (c, &i) in cols.iter().enumerate() {
                let v = f.values().at(j, i);
                if v == 0.0 {
                    continue;
                }
                any = true;
                for (r, e) in row.iter_mut().zip(&ex[c]) {
                    *r += v * e;
                }
            }
            if !any {
                continue;
            }
            let t = g.t(j);
            for (m, nn) in self.modes().enumerate() {
                out[m] += row[m] * Complex64::from_polar(1.0, -self.omega(nn) * t);
            }
        }
        let w = g.dt * g.dx();
        out.iter_mut().for_each(|v| *v *= w);
        Ok(out)
    }
}

/// Bose occupation 1 / (e^{beta w} - 1).
pub fn bose(beta: f64, omega: f64) -> f64 {
    1.0 / (beta * omega).exp_m1()
}
