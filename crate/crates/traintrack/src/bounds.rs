//! The cancellation and iteration constants derived from `V(f)` and the
//! expansion data: `C`, `C'`, `C_1`, `t_1`, and `t_hat`.

use crate::vsets::enumerate_v;
use crate::{Error, Result, Session};
use serde::Serialize;

/// Exact non-negative rational, kept reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub num: u128,
    pub den: u128,
}

impl Ratio {
    pub fn new(num: u128, den: u128) -> Ratio {
        assert!(den != 0);
        let g = gcd(num.max(1), den);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn from_int(n: u128) -> Ratio {
        Ratio { num: n, den: 1 }
    }

    /// self < n for an integer n.
    pub fn lt_int(&self, n: u128) -> bool {
        self.num < n.saturating_mul(self.den)
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    /// Maximal length of the paths from `V(f)`.
    #[serde(rename = "C")]
    pub c: u64,
    pub t_exp: u32,
    pub lambda_min: u128,
    pub lambda_max: u128,
    /// Cancellation bound for `f^{t_exp}`: `C (lambda_max^t_exp - 1) / (lambda_max - 1)`.
    #[serde(rename = "C_prime")]
    pub c_prime: Ratio,
    /// `C' / (lambda_min - 1)`; bounds the length of every INP path.
    #[serde(rename = "C_1")]
    pub c_1: Ratio,
    /// Minimal power with `|f^{t_1}(e)| > C_1` for every edge.
    pub t_1: u32,
    /// `t_1 + 2 t_0`.
    pub t_hat: u32,
    pub t0: u32,
}

/// Compute all constants. Requires a validated expanding train track map.
pub fn compute_bounds(sess: &Session) -> Result<BoundsReport> {
    let t_exp = sess.require_expanding_train_track()?;
    let v1 = enumerate_v(sess, 1)?;
    let c = v1.iter().map(|e| e.len()).max().unwrap_or(0) as u64;

    let mut lambda_min = u128::MAX;
    let mut lambda_max = 0u128;
    for e in sess.sys.graph.forward_tops() {
        let l = sess.view.edge_len(e, t_exp)?;
        lambda_min = lambda_min.min(l);
        lambda_max = lambda_max.max(l);
    }
    if lambda_min < 2 {
        return Err(Error::Internal(
            "expanding map has an edge of image length < 2 at t_exp".into(),
        ));
    }
    // c_prime = c * (lambda_max^t_exp - 1) / (lambda_max - 1), an integer:
    // the geometric sum 1 + lambda_max + ... + lambda_max^(t_exp-1).
    let mut geo: u128 = 0;
    let mut pow: u128 = 1;
    for _ in 0..t_exp {
        geo = geo
            .checked_add(pow)
            .ok_or(Error::Capacity { cap: "bounds overflow", limit: u128::MAX })?;
        pow = pow
            .checked_mul(lambda_max)
            .ok_or(Error::Capacity { cap: "bounds overflow", limit: u128::MAX })?;
    }
    let c_prime_int = (c as u128)
        .checked_mul(geo)
        .ok_or(Error::Capacity { cap: "bounds overflow", limit: u128::MAX })?;
    let c_prime = Ratio::from_int(c_prime_int);
    let c_1 = Ratio::new(c_prime_int, lambda_min - 1);

    // t_1: minimal with |f^{t1}(e)| > C_1 for every edge, i.e.
    // |f^{t1}(e)| * (lambda_min - 1) > C', exactly in integers.
    let mut t_1 = 0u32;
    'search: for t in 1..=sess.caps.max_power {
        for e in sess.sys.graph.forward_tops() {
            let l = sess.view.edge_len(e, t)?;
            if l.saturating_mul(c_1.den) <= c_1.num {
                continue 'search;
            }
        }
        t_1 = t;
        break;
    }
    if t_1 == 0 {
        return Err(Error::Capacity {
            cap: "max_power while searching t_1",
            limit: sess.caps.max_power as u128,
        });
    }
    let t0 = sess.profile.closure.t0;
    Ok(BoundsReport {
        c,
        t_exp,
        lambda_min,
        lambda_max,
        c_prime,
        c_1,
        t_1,
        t_hat: t_1 + 2 * t0,
        t0,
    })
}
