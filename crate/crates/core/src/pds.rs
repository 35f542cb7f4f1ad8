//! Group-ring bookkeeping for a candidate set `D`.
//!
//! A [`SearchState`] keeps the coefficient vector of `D^2` (all `k^2` ordered
//! products, diagonal included) and the squared distance from the target
//! `k*1 + lambda*D + mu*(G - 1 - D)`. That distance is zero exactly when `D`
//! is a regular partial difference set. A single-element swap changes only
//! `O(k)` coefficients, so its effect on the error is computed without a full
//! rescan.

use std::cell::RefCell;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::GroupTable;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamsError {
    #[error("subset size k = {k} must satisfy 0 < k < n = {n}")]
    SubsetSize { n: usize, k: usize },
    #[error("lambda = {lambda} must be less than k = {k}")]
    Lambda { k: usize, lambda: usize },
    #[error("mu = {mu} must not exceed k = {k}")]
    Mu { k: usize, mu: usize },
}

/// The quadruple `(n, k, lambda, mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct Params {
    n: usize,
    k: usize,
    lambda: usize,
    mu: usize,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: usize,
    k: usize,
    lambda: usize,
    mu: usize,
}

impl TryFrom<RawParams> for Params {
    type Error = ParamsError;
    fn try_from(r: RawParams) -> Result<Self, ParamsError> {
        Params::new(r.n, r.k, r.lambda, r.mu)
    }
}

impl From<Params> for RawParams {
    fn from(p: Params) -> Self {
        RawParams {
            n: p.n,
            k: p.k,
            lambda: p.lambda,
            mu: p.mu,
        }
    }
}

impl Params {
    pub fn new(n: usize, k: usize, lambda: usize, mu: usize) -> Result<Self, ParamsError> {
        if k == 0 || k >= n {
            return Err(ParamsError::SubsetSize { n, k });
        }
        if lambda >= k {
            return Err(ParamsError::Lambda { k, lambda });
        }
        if mu > k {
            return Err(ParamsError::Mu { k, mu });
        }
        Ok(Params { n, k, lambda, mu })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn lambda(&self) -> usize {
        self.lambda
    }
    pub fn mu(&self) -> usize {
        self.mu
    }

    /// `k(k - lambda - 1) == (n - k - 1) mu`.
    pub fn satisfies_counting_identity(&self) -> bool {
        self.k * (self.k - self.lambda - 1) == (self.n - self.k - 1) * self.mu
    }

    /// Parameters of the complementary set `G - 1 - D`:
    /// `(n, n-k-1, n-2-2k+mu, n-2k+lambda)`.
    ///
    /// Returns `None` when the formulas leave the valid range, which cannot
    /// happen for parameters that satisfy the counting identity with
    /// `k < n - 1`.
    pub fn complement(&self) -> Option<Params> {
        let (n, k, l, m) = (
            self.n as i64,
            self.k as i64,
            self.lambda as i64,
            self.mu as i64,
        );
        let k2 = n - k - 1;
        let l2 = n - 2 - 2 * k + m;
        let m2 = n - 2 * k + l;
        if k2 < 1 || l2 < 0 || m2 < 0 {
            return None;
        }
        Params::new(self.n, k2 as usize, l2 as usize, m2 as usize).ok()
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.n, self.k, self.lambda, self.mu)
    }
}

impl std::str::FromStr for Params {
    type Err = String;

    /// Accepts `n,k,lambda,mu`, optionally wrapped in parentheses.
    fn from_str(s: &str) -> Result<Self, String> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<usize> = inner
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("bad parameter list {s:?}: {e}"))?;
        let [n, k, lambda, mu] = parts[..] else {
            return Err(format!(
                "expected four values n,k,lambda,mu, got {}",
                parts.len()
            ));
        };
        Params::new(n, k, lambda, mu).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StateError {
    #[error("parameters are for order {params} but the group has order {group}")]
    OrderMismatch { params: usize, group: usize },
    #[error("expected {expected} elements, got {got}")]
    Cardinality { expected: usize, got: usize },
    #[error("the identity element {0} cannot be in the set")]
    ContainsIdentity(usize),
    #[error("element {0} appears more than once")]
    Duplicate(usize),
    #[error("element {element} is out of range for a group of order {n}")]
    OutOfRange { element: usize, n: usize },
    #[error("swap removes {0}, which is not in the set")]
    OutNotMember(usize),
    #[error("swap inserts {0}, which is already in the set")]
    InAlreadyMember(usize),
    #[error("swap inserts the identity element {0}")]
    InIsIdentity(usize),
}

const NOT_MEMBER: u32 = u32::MAX;

/// Scratch buffers for the pure swap evaluation. `change` and `marked` are
/// all-zero between calls.
#[derive(Clone, Debug)]
struct Scratch {
    change: Vec<i64>,
    marked: Vec<bool>,
    touched: Vec<usize>,
}

/// The current set `D` with the coefficients of `D^2` and the cached error.
#[derive(Clone, Debug)]
pub struct SearchState<'g> {
    group: &'g GroupTable,
    params: Params,
    /// Roster slot of each member, `NOT_MEMBER` otherwise.
    slot: Vec<u32>,
    roster: Vec<usize>,
    coeff: Vec<i64>,
    error: i64,
    scratch: RefCell<Scratch>,
}

impl<'g> SearchState<'g> {
    /// Builds `D^2` from all `k^2` ordered products and computes the error by
    /// a full scan. Costs `O(k^2 + n)`.
    pub fn new(group: &'g GroupTable, params: Params, set: &[usize]) -> Result<Self, StateError> {
        let n = group.order();
        if params.n() != n {
            return Err(StateError::OrderMismatch {
                params: params.n(),
                group: n,
            });
        }
        if set.len() != params.k() {
            return Err(StateError::Cardinality {
                expected: params.k(),
                got: set.len(),
            });
        }
        let mut slot = vec![NOT_MEMBER; n];
        for (i, &g) in set.iter().enumerate() {
            if g >= n {
                return Err(StateError::OutOfRange { element: g, n });
            }
            if g == group.identity() {
                return Err(StateError::ContainsIdentity(g));
            }
            if slot[g] != NOT_MEMBER {
                return Err(StateError::Duplicate(g));
            }
            slot[g] = i as u32;
        }
        let mut coeff = vec![0i64; n];
        for &a in set {
            let row = group.row(a);
            for &b in set {
                coeff[row[b] as usize] += 1;
            }
        }
        let mut state = SearchState {
            group,
            params,
            slot,
            roster: set.to_vec(),
            coeff,
            error: 0,
            scratch: RefCell::new(Scratch {
                change: vec![0; n],
                marked: vec![false; n],
                touched: Vec::with_capacity(4 * params.k() + 4),
            }),
        };
        state.error = state.recompute_error();
        Ok(state)
    }

    pub fn group(&self) -> &'g GroupTable {
        self.group
    }

    pub fn params(&self) -> Params {
        self.params
    }

    /// Cached `e(D)`.
    pub fn error(&self) -> i64 {
        self.error
    }

    /// Members in roster order. Swaps replace a member in place, so a slot
    /// keeps its index across moves.
    pub fn roster(&self) -> &[usize] {
        &self.roster
    }

    pub fn sorted_members(&self) -> Vec<usize> {
        let mut v = self.roster.clone();
        v.sort_unstable();
        v
    }

    /// Coefficient of each element in `D^2`.
    pub fn coefficients(&self) -> &[i64] {
        &self.coeff
    }

    #[inline]
    pub fn contains(&self, g: usize) -> bool {
        self.slot[g] != NOT_MEMBER
    }

    /// Target coefficient of `g`: `k` at the identity, `lambda` on `D`, `mu`
    /// elsewhere.
    #[inline]
    pub fn target(&self, g: usize) -> i64 {
        if g == self.group.identity() {
            self.params.k() as i64
        } else if self.contains(g) {
            self.params.lambda() as i64
        } else {
            self.params.mu() as i64
        }
    }

    /// Full `O(n)` evaluation of the error from the stored coefficients.
    pub fn recompute_error(&self) -> i64 {
        self.coeff
            .iter()
            .enumerate()
            .map(|(g, &c)| {
                let d = c - self.target(g);
                d * d
            })
            .sum()
    }

    fn check_swap(&self, out: usize, incoming: usize) -> Result<(), StateError> {
        let n = self.group.order();
        for g in [out, incoming] {
            if g >= n {
                return Err(StateError::OutOfRange { element: g, n });
            }
        }
        if !self.contains(out) {
            return Err(StateError::OutNotMember(out));
        }
        if incoming == self.group.identity() {
            return Err(StateError::InIsIdentity(incoming));
        }
        if self.contains(incoming) {
            return Err(StateError::InAlreadyMember(incoming));
        }
        Ok(())
    }

    /// `e(D') - e(D)` for `D' = D - out + incoming`, without changing the state.
    pub fn swap_delta(&self, out: usize, incoming: usize) -> Result<i64, StateError> {
        self.check_swap(out, incoming)?;
        Ok(self.swap_delta_unchecked(out, incoming))
    }

    /// As [`SearchState::swap_delta`] with the preconditions assumed.
    pub(crate) fn swap_delta_unchecked(&self, out: usize, incoming: usize) -> i64 {
        let mut guard = self.scratch.borrow_mut();
        let Scratch {
            change,
            marked,
            touched,
        } = &mut *guard;
        let mut bump = |g: usize, by: i64| {
            if !marked[g] {
                marked[g] = true;
                touched.push(g);
            }
            change[g] += by;
        };

        // With A = D - out: D^2 - D'^2 differs only in the products that
        // involve out or incoming.
        let g = self.group;
        let row_out = g.row(out);
        let row_in = g.row(incoming);
        for &a in &self.roster {
            if a == out {
                continue;
            }
            let row_a = g.row(a);
            bump(row_a[out] as usize, -1);
            bump(row_out[a] as usize, -1);
            bump(row_a[incoming] as usize, 1);
            bump(row_in[a] as usize, 1);
        }
        bump(row_out[out] as usize, -1);
        bump(row_in[incoming] as usize, 1);
        // Targets move at out (lambda -> mu) and incoming (mu -> lambda).
        bump(out, 0);
        bump(incoming, 0);

        let (lambda, mu) = (self.params.lambda() as i64, self.params.mu() as i64);
        let mut delta = 0i64;
        for &h in touched.iter() {
            let c = self.coeff[h];
            let old_t = self.target(h);
            let new_t = if h == out {
                mu
            } else if h == incoming {
                lambda
            } else {
                old_t
            };
            let before = c - old_t;
            let after = c + change[h] - new_t;
            delta += after * after - before * before;
            change[h] = 0;
            marked[h] = false;
        }
        touched.clear();
        delta
    }

    /// Replaces `out` with `incoming`, updating every cached quantity in
    /// `O(k)`. Returns the change in error.
    pub fn apply_swap(&mut self, out: usize, incoming: usize) -> Result<i64, StateError> {
        self.check_swap(out, incoming)?;
        Ok(self.apply_swap_unchecked(out, incoming))
    }

    pub(crate) fn apply_swap_unchecked(&mut self, out: usize, incoming: usize) -> i64 {
        let delta = self.swap_delta_unchecked(out, incoming);
        let g = self.group;
        let row_out = g.row(out);
        let row_in = g.row(incoming);
        for &a in &self.roster {
            if a == out {
                continue;
            }
            let row_a = g.row(a);
            self.coeff[row_a[out] as usize] -= 1;
            self.coeff[row_out[a] as usize] -= 1;
            self.coeff[row_a[incoming] as usize] += 1;
            self.coeff[row_in[a] as usize] += 1;
        }
        self.coeff[row_out[out] as usize] -= 1;
        self.coeff[row_in[incoming] as usize] += 1;

        let s = self.slot[out];
        self.slot[out] = NOT_MEMBER;
        self.slot[incoming] = s;
        self.roster[s as usize] = incoming;
        self.error += delta;
        delta
    }
}
