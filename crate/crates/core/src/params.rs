//! Screening of strongly regular parameter sets.
//!
//! Two classical necessary conditions are applied: the counting identity
//! `k(k - lambda - 1) = (n - k - 1) mu` and integrality of the eigenvalue
//! multiplicities, with conference graphs admitted separately. The complement
//! must also have `lambda >= 0`. All arithmetic is exact.

use std::fmt;

use serde::Serialize;

use crate::pds::Params;

/// A parameter set that passed the screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FeasibleParams {
    pub params: Params,
    /// Multiplicities of the positive and negative restricted eigenvalues.
    pub multiplicities: (u64, u64),
    pub conference: bool,
}

/// The first condition a parameter set failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    /// `k >= n - 1`: the complete graph.
    Complete,
    /// `mu = 0`: a disjoint union of cliques.
    Disconnected,
    /// `mu = k`: complete multipartite, whose complement is disconnected.
    Imprimitive,
    CountingIdentity {
        lhs: u64,
        rhs: u64,
    },
    /// The complement would have `lambda = n - 2 - 2k + mu < 0`.
    ComplementLambda {
        value: i64,
    },
    /// `(lambda - mu)^2 + 4(k - mu)` is not a square and the conference case
    /// does not apply.
    IrrationalEigenvalues {
        discriminant: i64,
    },
    /// A multiplicity came out fractional or negative.
    Multiplicity {
        numerator_plus: i64,
        numerator_minus: i64,
    },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Rejection::Complete => write!(f, "k >= n-1 gives the complete graph"),
            Rejection::Disconnected => write!(f, "mu = 0 gives a disconnected graph"),
            Rejection::Imprimitive => {
                write!(f, "mu = k gives a complete multipartite (imprimitive) graph")
            }
            Rejection::CountingIdentity { lhs, rhs } => write!(
                f,
                "counting identity fails: k(k-lambda-1) = {lhs} but (n-k-1)mu = {rhs}"
            ),
            Rejection::ComplementLambda { value } => write!(
                f,
                "complement would have lambda = n-2-2k+mu = {value} < 0"
            ),
            Rejection::IrrationalEigenvalues { discriminant } => write!(
                f,
                "discriminant {discriminant} is not a square and the conference case does not apply"
            ),
            Rejection::Multiplicity {
                numerator_plus,
                numerator_minus,
            } => write!(
                f,
                "eigenvalue multiplicities {numerator_plus}/2 and {numerator_minus}/2 are not nonnegative integers"
            ),
        }
    }
}

/// Exact integer square root, `None` unless `v` is a perfect square.
fn exact_sqrt(v: i64) -> Option<i64> {
    if v < 0 {
        return None;
    }
    let r = (v as f64).sqrt() as i64;
    (r.saturating_sub(1)..=r + 1).find(|&s| s >= 0 && s * s == v)
}

pub fn check_feasible(params: Params) -> Result<FeasibleParams, Rejection> {
    let (n, k, l, m) = (
        params.n() as i64,
        params.k() as i64,
        params.lambda() as i64,
        params.mu() as i64,
    );
    if k >= n - 1 {
        return Err(Rejection::Complete);
    }
    if m == 0 {
        return Err(Rejection::Disconnected);
    }
    if m == k {
        return Err(Rejection::Imprimitive);
    }
    let lhs = k * (k - l - 1);
    let rhs = (n - k - 1) * m;
    if lhs != rhs {
        return Err(Rejection::CountingIdentity {
            lhs: lhs as u64,
            rhs: rhs as u64,
        });
    }
    if n - 2 - 2 * k + m < 0 {
        return Err(Rejection::ComplementLambda {
            value: n - 2 - 2 * k + m,
        });
    }

    let conference = l - m == -1 && 2 * k == n - 1;
    let disc = (l - m) * (l - m) + 4 * (k - m);
    let numerator = 2 * k + (n - 1) * (l - m);
    let Some(root) = exact_sqrt(disc) else {
        if conference && n % 4 == 1 {
            let half = ((n - 1) / 2) as u64;
            return Ok(FeasibleParams {
                params,
                multiplicities: (half, half),
                conference,
            });
        }
        return Err(Rejection::IrrationalEigenvalues { discriminant: disc });
    };
    // m_plus = ((n-1) - numerator/root) / 2, m_minus = ((n-1) + numerator/root) / 2.
    // disc >= 1 here because k > mu.
    let bad = Rejection::Multiplicity {
        numerator_plus: (n - 1) * root - numerator,
        numerator_minus: (n - 1) * root + numerator,
    };
    if numerator % root != 0 {
        return Err(bad);
    }
    let q = numerator / root;
    let (plus2, minus2) = (n - 1 - q, n - 1 + q);
    if plus2 < 0 || minus2 < 0 || plus2 % 2 != 0 {
        return Err(bad);
    }
    Ok(FeasibleParams {
        params,
        multiplicities: ((plus2 / 2) as u64, (minus2 / 2) as u64),
        conference,
    })
}

/// Every parameter set on `n` vertices passing [`check_feasible`], sorted by
/// `k` then `lambda`. With `half_only`, only sets with `k <= (n-1)/2` are
/// kept; otherwise each set appears together with its complement.
pub fn enumerate_feasible(n: usize, half_only: bool) -> Vec<FeasibleParams> {
    let mut out = Vec::new();
    if n < 5 {
        return out;
    }
    for k in 1..n - 1 {
        if half_only && 2 * k > n - 1 {
            break;
        }
        for mu in 1..k {
            // lambda = k - 1 - (n-k-1) mu / k
            let num = (n - k - 1) * mu;
            if !num.is_multiple_of(k) || num / k > k - 1 {
                continue;
            }
            let lambda = k - 1 - num / k;
            let Ok(params) = Params::new(n, k, lambda, mu) else {
                continue;
            };
            if let Ok(f) = check_feasible(params) {
                out.push(f);
            }
        }
    }
    out.sort_by_key(|f| (f.params.k(), f.params.lambda()));
    out
}
