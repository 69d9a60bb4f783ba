//! Smooth compactly supported profiles b(u) = exp(1 - 1/(1 - u^2)).

use crate::grid::periodic_delta;
use serde::{Deserialize, Serialize};

/// (b, b', b'') at u.
pub fn profile(u: f64) -> (f64, f64, f64) {
    if u.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - u * u;
    let b = (1.0 - 1.0 / q).exp();
    let d1 = -2.0 * u * b / (q * q);
    let d2 = b * (4.0 * u * u / q.powi(4) - 2.0 / (q * q) - 8.0 * u * u / q.powi(3));
    (b, d1, d2)
}

/// Value and derivatives of a scalar function of (t, x).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub t: f64,
    pub x: f64,
    pub tt: f64,
    pub tx: f64,
    pub xx: f64,
}

impl Jet {
    pub fn scale(self, c: f64) -> Jet {
        Jet { v: c * self.v, t: c * self.t, x: c * self.x, tt: c * self.tt, tx: c * self.tx, xx: c * self.xx }
    }
}

/// Product bump in t and periodic x: b((t - tc)/rt) b(d(x, xc)/rx).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub tc: f64,
    pub xc: f64,
    pub rt: f64,
    pub rx: f64,
}

impl Bump {
    pub fn new(tc: f64, xc: f64, rt: f64, rx: f64) -> Bump {
        Bump { tc, xc, rt, rx }
    }

    pub fn jet(&self, t: f64, x: f64, length: f64) -> Jet {
        let ut = (t - self.tc) / self.rt;
        let ux = periodic_delta(x, self.xc, length) / self.rx;
        let (a, a1, a2) = profile(ut);
        let (b, b1, b2) = profile(ux);
        let (it, ix) = (1.0 / self.rt, 1.0 / self.rx);
        Jet {
            v: a * b,
            t: a1 * it * b,
            x: a * b1 * ix,
            tt: a2 * it * it * b,
            tx: a1 * it * b1 * ix,
            xx: a * b2 * ix * ix,
        }
    }

    pub fn value(&self, t: f64, x: f64, length: f64) -> f64 {
        let ut = (t - self.tc) / self.rt;
        let ux = periodic_delta(x, self.xc, length) / self.rx;
        profile(ut).0 * profile(ux).0
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.tc - self.rt, self.tc + self.rt)
    }
}

/// Vector field X^mu = (a_t, a_x) * bump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorBump {
    pub bump: Bump,
    pub a_t: f64,
    pub a_x: f64,
}

impl VectorBump {
    /// Components and their gradients: ([X^t, X^x], [[d_t X^t, d_x X^t], [d_t X^x, d_x X^x]]).
    pub fn eval(&self, t: f64, x: f64, length: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let j = self.bump.jet(t, x, length);
        (
            [self.a_t * j.v, self.a_x * j.v],
            [[self.a_t * j.t, self.a_t * j.x], [self.a_x * j.t, self.a_x * j.x]],
        )
    }
}
