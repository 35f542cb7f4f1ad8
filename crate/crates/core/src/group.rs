//! Finite groups as explicit multiplication tables.
//!
//! Elements are the dense indices `0..n`. A [`GroupTable`] built through any
//! checked path (constructors, [`GroupTable::from_products`], [`parse_table`])
//! satisfies the group axioms; [`GroupTable::from_parts_unchecked`] exists so
//! that [`validate_table`] can be pointed at arbitrary data.

use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

/// Largest order a table may have. The table is stored densely, so this is
/// a memory bound as much as an index bound.
pub const MAX_ORDER: usize = 1 << 14;

/// Above this order the O(n^3) associativity scan may be skipped on request.
pub const ASSOCIATIVITY_MANDATORY_UP_TO: usize = 512;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("invalid group order {order}: {reason}")]
    InvalidOrder { order: usize, reason: &'static str },
    #[error("group order {0} exceeds the supported maximum of {MAX_ORDER}")]
    TooLarge(u128),
    #[error("malformed table at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("table entry {value} at row {row}, column {col} is outside 1..={n}")]
    OutOfRange {
        row: usize,
        col: usize,
        value: i64,
        n: usize,
    },
    #[error("table is not a Latin square: {0}")]
    NotLatin(Failure),
    #[error("no identity element: no row and column both act as the identity permutation")]
    NoIdentity,
    #[error("missing two-sided inverse: {0}")]
    NoInverse(Failure),
    #[error("operation is not associative: {0}")]
    NotAssociative(Failure),
}

/// A complete multiplication table with its identity and inverse maps.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupTable {
    n: usize,
    mul: Vec<u32>,
    identity: usize,
    inv: Vec<u32>,
    label: String,
}

impl fmt::Debug for GroupTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupTable")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("identity", &self.identity)
            .finish_non_exhaustive()
    }
}

impl GroupTable {
    /// Builds a group from a row-major 0-indexed product table, detecting the
    /// identity structurally and deriving inverses. The table is fully
    /// validated, including associativity.
    pub fn from_products(
        n: usize,
        products: Vec<u32>,
        label: impl Into<String>,
    ) -> Result<Self, GroupError> {
        Self::from_products_with(n, products, label, false)
    }

    /// As [`GroupTable::from_products`], but `skip_associativity` drops the
    /// cubic associativity scan for orders above
    /// [`ASSOCIATIVITY_MANDATORY_UP_TO`]. It is ignored for smaller orders.
    pub fn from_products_with(
        n: usize,
        products: Vec<u32>,
        label: impl Into<String>,
        skip_associativity: bool,
    ) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::InvalidOrder {
                order: 0,
                reason: "a group has at least one element",
            });
        }
        if n > MAX_ORDER {
            return Err(GroupError::TooLarge(n as u128));
        }
        if products.len() != n * n {
            return Err(GroupError::Malformed {
                line: 0,
                reason: format!("expected {} entries, found {}", n * n, products.len()),
            });
        }
        for (idx, &v) in products.iter().enumerate() {
            if v as usize >= n {
                return Err(GroupError::OutOfRange {
                    row: idx / n,
                    col: idx % n,
                    value: i64::from(v) + 1,
                    n,
                });
            }
        }
        let mut table = GroupTable {
            n,
            mul: products,
            identity: 0,
            inv: vec![0; n],
            label: label.into(),
        };
        if let Some(f) = table.latin_failure() {
            return Err(GroupError::NotLatin(f));
        }
        table.identity = (0..n)
            .find(|&e| (0..n).all(|g| table.mul(e, g) == g && table.mul(g, e) == g))
            .ok_or(GroupError::NoIdentity)?;
        for g in 0..n {
            // Rows are permutations, so the right inverse exists and is unique.
            let h = (0..n).find(|&h| table.mul(g, h) == table.identity).unwrap();
            table.inv[g] = h as u32;
        }
        if let Some(f) = table.inverse_failure() {
            return Err(GroupError::NoInverse(f));
        }
        let check_assoc = n <= ASSOCIATIVITY_MANDATORY_UP_TO || !skip_associativity;
        if check_assoc {
            if let Some(f) = table.associativity_failure() {
                return Err(GroupError::NotAssociative(f));
            }
        }
        Ok(table)
    }

    /// Assembles a table without any checking. Intended for feeding
    /// deliberately broken data to [`validate_table`].
    ///
    /// # Panics
    /// Panics if the slice lengths do not match `n`.
    pub fn from_parts_unchecked(
        n: usize,
        products: Vec<u32>,
        identity: usize,
        inverses: Vec<u32>,
        label: impl Into<String>,
    ) -> Self {
        assert_eq!(products.len(), n * n);
        assert_eq!(inverses.len(), n);
        GroupTable {
            n,
            mul: products,
            identity,
            inv: inverses,
            label: label.into(),
        }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n + b] as usize
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        self.inv[g] as usize
    }

    /// Row `a` of the table: `row(a)[b] == mul(a, b)`.
    #[inline]
    pub fn row(&self, a: usize) -> &[u32] {
        &self.mul[a * self.n..(a + 1) * self.n]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.n).all(|a| (a + 1..self.n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Non-identity elements in index order.
    pub fn non_identity(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&g| g != self.identity)
    }

    /// Writes the table in the 1-indexed text format read by [`parse_table`].
    /// The label travels in a leading `# label:` comment.
    pub fn to_table_string(&self) -> String {
        let mut out = String::with_capacity(self.n * self.n * 4 + 64);
        let _ = writeln!(out, "# label: {}", self.label);
        let _ = writeln!(out, "{}", self.n);
        for a in 0..self.n {
            let mut first = true;
            for &v in self.row(a) {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{}", v + 1);
            }
            out.push('\n');
        }
        out
    }

    fn latin_failure(&self) -> Option<Failure> {
        let n = self.n;
        let mut seen = vec![usize::MAX; n];
        for a in 0..n {
            for b in 0..n {
                let v = self.mul(a, b);
                if seen[v] == a {
                    return Some(Failure::LatinRow {
                        row: a,
                        col: b,
                        value: v,
                    });
                }
                seen[v] = a;
            }
        }
        seen.iter_mut().for_each(|s| *s = usize::MAX);
        for b in 0..n {
            for a in 0..n {
                let v = self.mul(a, b);
                if seen[v] == b {
                    return Some(Failure::LatinColumn {
                        row: a,
                        col: b,
                        value: v,
                    });
                }
                seen[v] = b;
            }
        }
        None
    }

    fn identity_failure(&self) -> Option<Failure> {
        let e = self.identity;
        if e >= self.n {
            return Some(Failure::IdentityOutOfRange { identity: e });
        }
        (0..self.n).find_map(|g| {
            let left = self.mul(e, g);
            let right = self.mul(g, e);
            (left != g || right != g).then_some(Failure::Identity {
                element: g,
                left,
                right,
            })
        })
    }

    fn inverse_failure(&self) -> Option<Failure> {
        let e = self.identity;
        (0..self.n).find_map(|g| {
            let h = self.inv(g);
            if h >= self.n {
                return Some(Failure::Inverse {
                    element: g,
                    inverse: h,
                    left: usize::MAX,
                    right: usize::MAX,
                });
            }
            let right = self.mul(g, h);
            let left = self.mul(h, g);
            (right != e || left != e).then_some(Failure::Inverse {
                element: g,
                inverse: h,
                left,
                right,
            })
        })
    }

    fn associativity_failure(&self) -> Option<Failure> {
        let n = self.n;
        for a in 0..n {
            let row_a = self.row(a);
            for b in 0..n {
                let ab = row_a[b] as usize;
                let row_b = self.row(b);
                let row_ab = self.row(ab);
                for c in 0..n {
                    if row_ab[c] != row_a[row_b[c] as usize] {
                        return Some(Failure::Associativity { a, b, c });
                    }
                }
            }
        }
        None
    }
}

/// One failed group axiom, with the elements that witness it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    /// `value` appears twice in `row`; `col` is the second occurrence.
    LatinRow {
        row: usize,
        col: usize,
        value: usize,
    },
    /// `value` appears twice in `col`; `row` is the second occurrence.
    LatinColumn {
        row: usize,
        col: usize,
        value: usize,
    },
    IdentityOutOfRange {
        identity: usize,
    },
    /// `e * element = left` and `element * e = right`, not both `element`.
    Identity {
        element: usize,
        left: usize,
        right: usize,
    },
    /// `inverse * element = left` and `element * inverse = right`.
    Inverse {
        element: usize,
        inverse: usize,
        left: usize,
        right: usize,
    },
    /// `(a * b) * c != a * (b * c)`.
    Associativity {
        a: usize,
        b: usize,
        c: usize,
    },
}

impl Failure {
    pub fn check(&self) -> Check {
        match self {
            Failure::LatinRow { .. } | Failure::LatinColumn { .. } => Check::Latin,
            Failure::IdentityOutOfRange { .. } | Failure::Identity { .. } => Check::Identity,
            Failure::Inverse { .. } => Check::Inverse,
            Failure::Associativity { .. } => Check::Associativity,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Failure::LatinRow { row, col, value } => {
                write!(f, "row {row} repeats value {value} (again at column {col})")
            }
            Failure::LatinColumn { row, col, value } => {
                write!(f, "column {col} repeats value {value} (again at row {row})")
            }
            Failure::IdentityOutOfRange { identity } => {
                write!(f, "identity index {identity} is out of range")
            }
            Failure::Identity {
                element,
                left,
                right,
            } => write!(
                f,
                "identity fails on {element}: e*g = {left}, g*e = {right}"
            ),
            Failure::Inverse {
                element,
                inverse,
                left,
                right,
            } => write!(
                f,
                "{inverse} is not a two-sided inverse of {element}: h*g = {left}, g*h = {right}"
            ),
            Failure::Associativity { a, b, c } => {
                write!(f, "(a*b)*c != a*(b*c) for (a, b, c) = ({a}, {b}, {c})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    Latin,
    Identity,
    Inverse,
    Associativity,
}

/// Outcome of [`validate_table`]: at most one failure per [`Check`], each
/// with the first witness found.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub failures: Vec<Failure>,
    /// Set when the associativity scan was skipped for a large table.
    pub associativity_skipped: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failure(&self, check: Check) -> Option<&Failure> {
        self.failures.iter().find(|f| f.check() == check)
    }
}

/// Checks every group axiom on `table` and reports all that fail.
pub fn validate_table(table: &GroupTable) -> ValidationReport {
    validate_table_with(table, false)
}

pub fn validate_table_with(table: &GroupTable, skip_associativity: bool) -> ValidationReport {
    let mut report = ValidationReport::default();
    report.failures.extend(table.latin_failure());
    report.failures.extend(table.identity_failure());
    report.failures.extend(table.inverse_failure());
    if table.order() > ASSOCIATIVITY_MANDATORY_UP_TO && skip_associativity {
        report.associativity_skipped = true;
    } else {
        report.failures.extend(table.associativity_failure());
    }
    report
}

/// Z_m with addition mod m.
pub fn cyclic_group(m: usize) -> Result<GroupTable, GroupError> {
    if m == 0 {
        return Err(GroupError::InvalidOrder {
            order: 0,
            reason: "cyclic group needs m >= 1",
        });
    }
    if m > MAX_ORDER {
        return Err(GroupError::TooLarge(m as u128));
    }
    let mul = (0..m)
        .flat_map(|i| (0..m).map(move |j| ((i + j) % m) as u32))
        .collect();
    let inv = (0..m).map(|i| ((m - i) % m) as u32).collect();
    Ok(GroupTable {
        n: m,
        mul,
        identity: 0,
        inv,
        label: format!("cyclic({m})"),
    })
}

/// Dihedral group of order 2m. Indices `0..m` are the rotations `r^i`,
/// indices `m..2m` are the reflections `r^i f`.
pub fn dihedral_group(m: usize) -> Result<GroupTable, GroupError> {
    if m < 3 {
        return Err(GroupError::InvalidOrder {
            order: 2 * m,
            reason: "dihedral group needs m >= 3",
        });
    }
    if 2 * m > MAX_ORDER {
        return Err(GroupError::TooLarge(2 * m as u128));
    }
    let n = 2 * m;
    let split = |g: usize| (g % m, g >= m);
    let mut mul = Vec::with_capacity(n * n);
    for a in 0..n {
        let (i, fa) = split(a);
        for b in 0..n {
            let (j, fb) = split(b);
            // r^i f^x * r^j f^y = r^(i + (-1)^x j) f^(x xor y)
            let rot = if fa { (i + m - j) % m } else { (i + j) % m };
            let refl = fa ^ fb;
            mul.push((rot + if refl { m } else { 0 }) as u32);
        }
    }
    let inv = (0..n)
        .map(|g| {
            if g < m {
                ((m - g) % m) as u32
            } else {
                g as u32
            }
        })
        .collect();
    Ok(GroupTable {
        n,
        mul,
        identity: 0,
        inv,
        label: format!("dihedral({m})"),
    })
}

/// Direct product `a x b`; the pair `(x, y)` is encoded as `x * b.n + y`.
pub fn direct_product(a: &GroupTable, b: &GroupTable) -> Result<GroupTable, GroupError> {
    let n = (a.n as u128) * (b.n as u128);
    if n > MAX_ORDER as u128 {
        return Err(GroupError::TooLarge(n));
    }
    let n = n as usize;
    let nb = b.n;
    let mut mul = Vec::with_capacity(n * n);
    for x in 0..n {
        let (x1, x2) = (x / nb, x % nb);
        for y in 0..n {
            let (y1, y2) = (y / nb, y % nb);
            mul.push((a.mul(x1, y1) * nb + b.mul(x2, y2)) as u32);
        }
    }
    let inv = (0..n)
        .map(|x| (a.inv(x / nb) * nb + b.inv(x % nb)) as u32)
        .collect();
    Ok(GroupTable {
        n,
        mul,
        identity: a.identity * nb + b.identity,
        inv,
        label: format!("{}x{}", a.label, b.label),
    })
}

/// Elementary abelian group (Z_p)^d as an iterated direct product.
pub fn elementary_abelian(p: usize, d: usize) -> Result<GroupTable, GroupError> {
    if d == 0 {
        return Err(GroupError::InvalidOrder {
            order: 1,
            reason: "rank must be at least 1",
        });
    }
    let factor = cyclic_group(p)?;
    let mut g = factor.clone();
    for _ in 1..d {
        g = direct_product(&factor, &g)?;
    }
    Ok(g.with_label(format!("EA({p}^{d})")))
}

/// Reads the 1-indexed table text format:
///
/// ```text
/// # comment lines and blank lines are ignored
/// n
/// <n rows of n space-separated products>
/// ```
///
/// A comment of the form `# label: <text>` sets the label. The identity is
/// found structurally, so it need not be element 1.
pub fn parse_table(text: &str) -> Result<GroupTable, GroupError> {
    parse_table_with(text, false)
}

pub fn parse_table_with(text: &str, skip_associativity: bool) -> Result<GroupTable, GroupError> {
    let mut label = None;
    let mut order: Option<usize> = None;
    let mut products: Vec<u32> = Vec::new();
    let mut rows = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if label.is_none() {
                if let Some(l) = comment.trim().strip_prefix("label:") {
                    label = Some(l.trim().to_string());
                }
            }
            continue;
        }
        let Some(n) = order else {
            let n: usize = line.parse().map_err(|_| GroupError::Malformed {
                line: lineno,
                reason: format!("expected the group order, found {line:?}"),
            })?;
            if n == 0 {
                return Err(GroupError::InvalidOrder {
                    order: 0,
                    reason: "a group has at least one element",
                });
            }
            if n > MAX_ORDER {
                return Err(GroupError::TooLarge(n as u128));
            }
            products.reserve(n * n);
            order = Some(n);
            continue;
        };
        if rows == n {
            return Err(GroupError::Malformed {
                line: lineno,
                reason: format!("more than {n} table rows"),
            });
        }
        let before = products.len();
        for (col, tok) in line.split_whitespace().enumerate() {
            let v: i64 = tok.parse().map_err(|_| GroupError::Malformed {
                line: lineno,
                reason: format!("not an integer: {tok:?}"),
            })?;
            if v < 1 || v > n as i64 {
                return Err(GroupError::OutOfRange {
                    row: rows,
                    col,
                    value: v,
                    n,
                });
            }
            products.push((v - 1) as u32);
        }
        let got = products.len() - before;
        if got != n {
            return Err(GroupError::Malformed {
                line: lineno,
                reason: format!("expected {n} entries, found {got}"),
            });
        }
        rows += 1;
    }

    let Some(n) = order else {
        return Err(GroupError::Malformed {
            line: 0,
            reason: "empty input".to_string(),
        });
    };
    if rows != n {
        return Err(GroupError::Malformed {
            line: 0,
            reason: format!("expected {n} table rows, found {rows}"),
        });
    }
    GroupTable::from_products_with(
        n,
        products,
        label.unwrap_or_else(|| format!("table({n})")),
        skip_associativity,
    )
}
