//! Truncated Taylor (jet) arithmetic up to fourth derivatives.
//!
//! Used to differentiate the compactly supported bump profile analytically
//! when evaluating Sobolev norms of `û₊(ξ)/(ξ + p/2)` — quotient-rule
//! bookkeeping by hand is error-prone at order 4, jets are not.

pub const JET_LEN: usize = 5;

/// Value and derivatives `[f, f', f'', f''', f'''']` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub c: [f64; JET_LEN],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; JET_LEN];
        c[0] = v;
        Jet { c }
    }

    /// The identity jet at `x`: value `x`, first derivative 1.
    pub fn variable(x: f64) -> Self {
        let mut c = [0.0; JET_LEN];
        c[0] = x;
        c[1] = 1.0;
        Jet { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative (k < JET_LEN).
    pub fn derivative(&self, k: usize) -> f64 {
        self.c[k]
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let mut c = [0.0; JET_LEN];
        for i in 0..JET_LEN {
            c[i] = self.c[i] + o.c[i];
        }
        Jet { c }
    }

    pub fn neg(&self) -> Jet {
        let mut c = [0.0; JET_LEN];
        for i in 0..JET_LEN {
            c[i] = -self.c[i];
        }
        Jet { c }
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        // Leibniz rule on derivative coefficients.
        let mut c = [0.0; JET_LEN];
        for k in 0..JET_LEN {
            let mut acc = 0.0;
            for i in 0..=k {
                acc += binom(k, i) * self.c[i] * o.c[k - i];
            }
            c[k] = acc;
        }
        Jet { c }
    }

    pub fn recip(&self) -> Jet {
        // g = 1/f: solve f·g = 1 triangularly.
        let mut g = [0.0; JET_LEN];
        g[0] = 1.0 / self.c[0];
        for k in 1..JET_LEN {
            let mut acc = 0.0;
            for i in 1..=k {
                acc += binom(k, i) * self.c[i] * g[k - i];
            }
            g[k] = -acc / self.c[0];
        }
        Jet { c: g }
    }

    pub fn div(&self, o: &Jet) -> Jet {
        self.mul(&o.recip())
    }

    pub fn powi(&self, n: usize) -> Jet {
        let mut out = Jet::constant(1.0);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn exp(&self) -> Jet {
        // h = exp(f): h' = f'·h, differentiated repeatedly.
        let mut h = [0.0; JET_LEN];
        h[0] = self.c[0].exp();
        for k in 1..JET_LEN {
            let mut acc = 0.0;
            for i in 1..=k {
                acc += binom(k - 1, i - 1) * self.c[i] * h[k - i];
            }
            h[k] = acc;
        }
        Jet { c: h }
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut c = [0.0; JET_LEN];
        for i in 0..JET_LEN {
            c[i] = self.c[i] * s;
        }
        Jet { c }
    }
}

fn binom(n: usize, k: usize) -> f64 {
    const TABLE: [[f64; JET_LEN]; JET_LEN] = [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0, 0.0],
        [1.0, 3.0, 3.0, 1.0, 0.0],
        [1.0, 4.0, 6.0, 4.0, 1.0],
    ];
    TABLE[n][k]
}
