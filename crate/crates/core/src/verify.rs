//! Brute-force certification of partial difference sets and strongly
//! regular graphs.
//!
//! Nothing here touches the coefficient machinery in [`crate::pds`]. The PDS
//! check counts differences `d1 * d2^-1` over ordered pairs with `d1 != d2`;
//! the graph check counts common neighbours in the Cayley graph. Both are the
//! reference against which the search is judged, so they stay simple.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::GroupTable;
use crate::pds::Params;

/// One violated PDS axiom with a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PdsViolation {
    OrderMismatch {
        params: usize,
        group: usize,
    },
    OutOfRange {
        element: usize,
    },
    Duplicate {
        element: usize,
    },
    Cardinality {
        expected: usize,
        got: usize,
    },
    ContainsIdentity {
        identity: usize,
    },
    /// `element` is in the set but its inverse is not.
    NotInverseClosed {
        element: usize,
        inverse: usize,
    },
    /// The difference count of `element` is wrong. `mismatches` counts all
    /// non-identity elements with a wrong count.
    DifferenceCount {
        element: usize,
        in_set: bool,
        expected: usize,
        got: usize,
        mismatches: usize,
    },
}

impl fmt::Display for PdsViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PdsViolation::OrderMismatch { params, group } => {
                write!(f, "parameters have n = {params}, group has order {group}")
            }
            PdsViolation::OutOfRange { element } => write!(f, "element {element} out of range"),
            PdsViolation::Duplicate { element } => write!(f, "element {element} repeated"),
            PdsViolation::Cardinality { expected, got } => {
                write!(f, "set has {got} elements, expected {expected}")
            }
            PdsViolation::ContainsIdentity { identity } => {
                write!(f, "set contains the identity {identity}")
            }
            PdsViolation::NotInverseClosed { element, inverse } => write!(
                f,
                "set is not inverse-closed: {element} is in it, its inverse {inverse} is not"
            ),
            PdsViolation::DifferenceCount {
                element,
                in_set,
                expected,
                got,
                mismatches,
            } => write!(
                f,
                "element {element} ({}) arises as a difference {got} times, expected {expected} \
                 ({mismatches} elements wrong in total)",
                if in_set { "in set" } else { "not in set" }
            ),
        }
    }
}

/// Result of [`verify_pds`]: every violated axiom, in check order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PdsReport {
    pub violations: Vec<PdsViolation>,
}

impl PdsReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `set` is a regular partial difference set with `params` in
/// `group`, by direct difference counting.
pub fn verify_pds(group: &GroupTable, params: Params, set: &[usize]) -> PdsReport {
    let n = group.order();
    let mut violations = Vec::new();
    if params.n() != n {
        violations.push(PdsViolation::OrderMismatch {
            params: params.n(),
            group: n,
        });
        return PdsReport { violations };
    }
    let mut member = vec![false; n];
    let mut structural = false;
    for &g in set {
        if g >= n {
            violations.push(PdsViolation::OutOfRange { element: g });
            structural = true;
        } else if member[g] {
            violations.push(PdsViolation::Duplicate { element: g });
            structural = true;
        } else {
            member[g] = true;
        }
    }
    if structural {
        return PdsReport { violations };
    }

    if set.len() != params.k() {
        violations.push(PdsViolation::Cardinality {
            expected: params.k(),
            got: set.len(),
        });
    }
    let e = group.identity();
    if member[e] {
        violations.push(PdsViolation::ContainsIdentity { identity: e });
    }
    if let Some(&g) = set.iter().find(|&&g| !member[group.inv(g)]) {
        violations.push(PdsViolation::NotInverseClosed {
            element: g,
            inverse: group.inv(g),
        });
    }

    let mut count = vec![0usize; n];
    for &a in set {
        for &b in set {
            if a != b {
                count[group.mul(a, group.inv(b))] += 1;
            }
        }
    }
    let mut first = None;
    let mut mismatches = 0;
    for g in (0..n).filter(|&g| g != e) {
        let expected = if member[g] {
            params.lambda()
        } else {
            params.mu()
        };
        if count[g] != expected {
            mismatches += 1;
            first.get_or_insert((g, expected, count[g]));
        }
    }
    if let Some((element, expected, got)) = first {
        violations.push(PdsViolation::DifferenceCount {
            element,
            in_set: member[element],
            expected,
            got,
            mismatches,
        });
    }
    PdsReport { violations }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CayleyError {
    #[error("connection set contains the identity {0}")]
    ContainsIdentity(usize),
    #[error("connection set is not inverse-closed: {element} is in it, {inverse} is not")]
    NotInverseClosed { element: usize, inverse: usize },
    #[error("element {0} is out of range")]
    OutOfRange(usize),
}

/// A simple graph as sorted neighbour lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<u32>>,
}

impl Graph {
    /// Builds a graph from undirected edges. Duplicate edges collapse;
    /// loops are kept so that [`verify_srg`] can reject them.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            adjacency[u].push(v as u32);
            if u != v {
                adjacency[v].push(u as u32);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Graph { adjacency }
    }

    pub fn order(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbours(&self, v: usize) -> &[u32] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&(v as u32)).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// The Cayley graph with `g ~ h` iff `g * h^-1` lies in `set`.
pub fn build_cayley_graph(group: &GroupTable, set: &[usize]) -> Result<Graph, CayleyError> {
    let n = group.order();
    let mut member = vec![false; n];
    for &g in set {
        if g >= n {
            return Err(CayleyError::OutOfRange(g));
        }
        member[g] = true;
    }
    if member[group.identity()] {
        return Err(CayleyError::ContainsIdentity(group.identity()));
    }
    if let Some(&g) = set.iter().find(|&&g| !member[group.inv(g)]) {
        return Err(CayleyError::NotInverseClosed {
            element: g,
            inverse: group.inv(g),
        });
    }
    let adjacency = (0..n)
        .map(|g| {
            (0..n)
                .filter(|&h| member[group.mul(g, group.inv(h))])
                .map(|h| h as u32)
                .collect()
        })
        .collect();
    Ok(Graph { adjacency })
}

/// First failing condition found by [`verify_srg`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SrgViolation {
    OrderMismatch {
        params: usize,
        graph: usize,
    },
    Loop {
        vertex: usize,
    },
    Asymmetric {
        u: usize,
        v: usize,
    },
    Degree {
        vertex: usize,
        expected: usize,
        got: usize,
    },
    AdjacentPair {
        u: usize,
        v: usize,
        expected: usize,
        got: usize,
    },
    NonAdjacentPair {
        u: usize,
        v: usize,
        expected: usize,
        got: usize,
    },
    /// The Cayley graph could not be formed.
    NoGraph(CayleyError),
}

impl fmt::Display for SrgViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SrgViolation::OrderMismatch { params, graph } => {
                write!(
                    f,
                    "parameters have n = {params}, graph has {graph} vertices"
                )
            }
            SrgViolation::Loop { vertex } => write!(f, "loop at vertex {vertex}"),
            SrgViolation::Asymmetric { u, v } => write!(f, "edge {u}->{v} has no reverse"),
            SrgViolation::Degree {
                vertex,
                expected,
                got,
            } => write!(f, "vertex {vertex} has degree {got}, expected {expected}"),
            SrgViolation::AdjacentPair {
                u,
                v,
                expected,
                got,
            } => write!(
                f,
                "adjacent pair ({u}, {v}) has {got} common neighbours, expected lambda = {expected}"
            ),
            SrgViolation::NonAdjacentPair {
                u,
                v,
                expected,
                got,
            } => write!(
                f,
                "non-adjacent pair ({u}, {v}) has {got} common neighbours, expected mu = {expected}"
            ),
            SrgViolation::NoGraph(e) => write!(f, "no Cayley graph: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SrgReport {
    pub violation: Option<SrgViolation>,
}

impl SrgReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

fn common_neighbours(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Checks strong regularity with `params` by counting over every vertex
/// pair. `O(n^2 k)`.
pub fn verify_srg(graph: &Graph, params: Params) -> SrgReport {
    let fail = |v| SrgReport { violation: Some(v) };
    let n = graph.order();
    if params.n() != n {
        return fail(SrgViolation::OrderMismatch {
            params: params.n(),
            graph: n,
        });
    }
    for u in 0..n {
        for &v in graph.neighbours(u) {
            let v = v as usize;
            if u == v {
                return fail(SrgViolation::Loop { vertex: u });
            }
            if !graph.is_adjacent(v, u) {
                return fail(SrgViolation::Asymmetric { u, v });
            }
        }
    }
    if let Some(v) = (0..n).find(|&v| graph.degree(v) != params.k()) {
        return fail(SrgViolation::Degree {
            vertex: v,
            expected: params.k(),
            got: graph.degree(v),
        });
    }
    for u in 0..n {
        for v in u + 1..n {
            let got = common_neighbours(graph.neighbours(u), graph.neighbours(v));
            if graph.is_adjacent(u, v) {
                if got != params.lambda() {
                    return fail(SrgViolation::AdjacentPair {
                        u,
                        v,
                        expected: params.lambda(),
                        got,
                    });
                }
            } else if got != params.mu() {
                return fail(SrgViolation::NonAdjacentPair {
                    u,
                    v,
                    expected: params.mu(),
                    got,
                });
            }
        }
    }
    SrgReport { violation: None }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplementError {
    #[error("input is not a PDS: {0}")]
    NotPds(String),
    #[error("complement parameters of {0} are degenerate")]
    Degenerate(Params),
}

/// `G - 1 - D` with parameters `(n, n-k-1, n-2-2k+mu, n-2k+lambda)`.
pub fn complement_pds(
    group: &GroupTable,
    params: Params,
    set: &[usize],
) -> Result<(Vec<usize>, Params), ComplementError> {
    let report = verify_pds(group, params, set);
    if let Some(v) = report.violations.first() {
        return Err(ComplementError::NotPds(v.to_string()));
    }
    let comp_params = params
        .complement()
        .ok_or(ComplementError::Degenerate(params))?;
    let mut member = vec![false; group.order()];
    set.iter().for_each(|&g| member[g] = true);
    let comp = group.non_identity().filter(|&g| !member[g]).collect();
    Ok((comp, comp_params))
}

/// A verified (or refuted) claim that a set is a PDS with given parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub group_label: String,
    pub params: Params,
    /// Sorted, 0-indexed.
    pub pds: Vec<usize>,
    pub pds_check: PdsReport,
    pub srg_check: SrgReport,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.pds_check.passed() && self.srg_check.passed()
    }

    /// The set in the 1-indexed convention used for interchange.
    pub fn emitted_1indexed(&self) -> Vec<usize> {
        self.pds.iter().map(|&g| g + 1).collect()
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            group_label: self.group_label.clone(),
            n: self.params.n(),
            k: self.params.k(),
            lambda: self.params.lambda(),
            mu: self.params.mu(),
            pds_1indexed: self.emitted_1indexed(),
            pds_pass: self.pds_check.passed(),
            srg_pass: self.srg_check.passed(),
        }
    }
}

/// Serialized form of a [`Certificate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub group_label: String,
    pub n: usize,
    pub k: usize,
    pub lambda: usize,
    pub mu: usize,
    pub pds_1indexed: Vec<usize>,
    pub pds_pass: bool,
    pub srg_pass: bool,
}

/// Runs both independent checks on `set`. The graph check is attempted even
/// when the PDS check fails, so that the two verdicts can be compared.
pub fn certify(group: &GroupTable, params: Params, set: &[usize]) -> Certificate {
    let mut pds = set.to_vec();
    pds.sort_unstable();
    let pds_check = verify_pds(group, params, &pds);
    let srg_check = match build_cayley_graph(group, &pds) {
        Ok(graph) => verify_srg(&graph, params),
        Err(e) => SrgReport {
            violation: Some(SrgViolation::NoGraph(e)),
        },
    };
    Certificate {
        group_label: group.label().to_string(),
        params,
        pds,
        pds_check,
        srg_check,
    }
}
