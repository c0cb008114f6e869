//! Sylvester Hadamard matrices and the sign matrices built from them.
//!
//! A sign matrix has one row per qubit and one column per free-evolution
//! interval. Entry `S[q][k] = −1` means qubit `q` sits in the X-flipped frame
//! during interval `k`, which reverses the sign of its `σ^z` term. Over a
//! cycle the term `σ^z_q` is weighted by the row sum and `σ^z_q σ^z_{q+1}` by
//! the dot product of the two rows.

use std::fmt;

use crate::error::{Error, Result};

/// Largest Sylvester order exponent accepted by [`hadamard_matrix`].
pub const MAX_HADAMARD_ORDER: u32 = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignMatrix {
    rows: Vec<Vec<i8>>,
}

impl SignMatrix {
    pub fn new(rows: Vec<Vec<i8>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(Error::SignMatrix("sign matrix must be non-empty".into()));
        }
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::SignMatrix("rows have different lengths".into()));
        }
        if rows.iter().flatten().any(|&s| s != 1 && s != -1) {
            return Err(Error::SignMatrix("entries must be ±1".into()));
        }
        Ok(Self { rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<i8>] {
        &self.rows
    }

    /// Row of `qubit` (1-based).
    pub fn row(&self, qubit: usize) -> &[i8] {
        &self.rows[qubit - 1]
    }

    pub fn get(&self, qubit: usize, interval: usize) -> i8 {
        self.rows[qubit - 1][interval]
    }

    /// Sum of the row of `qubit`.
    pub fn row_sum(&self, qubit: usize) -> i64 {
        self.row(qubit).iter().map(|&s| i64::from(s)).sum()
    }

    pub fn dot(&self, a: usize, b: usize) -> i64 {
        self.row(a)
            .iter()
            .zip(self.row(b))
            .map(|(&x, &y)| i64::from(x) * i64::from(y))
            .sum()
    }

    /// Checks the decoupling conditions for `target`: the target row is all
    /// `+1`, every other row sums to zero and adjacent rows are orthogonal.
    pub fn check_decoupling(&self, target: usize) -> Result<()> {
        let n = self.n_rows();
        check_index(target, n)?;
        if self.row(target).iter().any(|&s| s != 1) {
            return Err(Error::SignMatrix(format!("target row {target} is not all +1")));
        }
        for q in (1..=n).filter(|&q| q != target) {
            if self.row_sum(q) != 0 {
                return Err(Error::SignMatrix(format!("row {q} is not balanced")));
            }
        }
        self.check_neighbours_orthogonal(None)
    }

    /// Checks the recoupling conditions for the pair `(i, j)`: equal pair
    /// rows, every row balanced, all other adjacent rows orthogonal.
    pub fn check_recoupling(&self, pair: (usize, usize)) -> Result<()> {
        let n = self.n_rows();
        let (i, j) = pair;
        check_index(i, n)?;
        check_index(j, n)?;
        if i >= j {
            return Err(Error::SignMatrix(format!("pair ({i}, {j}) must satisfy i < j")));
        }
        if self.row(i) != self.row(j) {
            return Err(Error::SignMatrix(format!("rows {i} and {j} differ")));
        }
        for q in 1..=n {
            if self.row_sum(q) != 0 {
                return Err(Error::SignMatrix(format!("row {q} is not balanced")));
            }
        }
        self.check_neighbours_orthogonal(Some(pair))
    }

    fn check_neighbours_orthogonal(&self, skip: Option<(usize, usize)>) -> Result<()> {
        for q in 1..self.n_rows() {
            if skip == Some((q, q + 1)) {
                continue;
            }
            if self.dot(q, q + 1) != 0 {
                return Err(Error::SignMatrix(format!("rows {q} and {} are not orthogonal", q + 1)));
            }
        }
        Ok(())
    }
}

impl fmt::Display for SignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let line: String = row.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

fn check_index(q: usize, n: usize) -> Result<()> {
    if q == 0 || q > n {
        return Err(Error::QubitOutOfRange { qubit: q, n });
    }
    Ok(())
}

/// Sylvester Hadamard matrix of order `2^k`: entry `(r, c)` is
/// `(−1)^{popcount(r & c)}`.
pub fn hadamard_matrix(k: u32) -> Result<SignMatrix> {
    if k > MAX_HADAMARD_ORDER {
        return Err(Error::SignMatrix(format!(
            "Hadamard order 2^{k} exceeds the supported 2^{MAX_HADAMARD_ORDER}"
        )));
    }
    let size = 1usize << k;
    let rows = (0..size)
        .map(|r| {
            (0..size)
                .map(|c| if (r & c).count_ones().is_multiple_of(2) { 1 } else { -1 })
                .collect()
        })
        .collect();
    SignMatrix::new(rows)
}

/// Row `idx` of the Sylvester matrix of order `2^k`.
fn hadamard_row(k: u32, idx: usize) -> Vec<i8> {
    (0..1usize << k)
        .map(|c| {
            if (idx & c).count_ones().is_multiple_of(2) {
                1
            } else {
                -1
            }
        })
        .collect()
}

fn order_for(rows_needed: usize) -> Result<u32> {
    let k = rows_needed.next_power_of_two().trailing_zeros();
    if k > MAX_HADAMARD_ORDER {
        return Err(Error::SignMatrix(format!(
            "{rows_needed} rows exceed the supported Hadamard order"
        )));
    }
    Ok(k)
}

/// Decoupling matrix taken from the smallest Sylvester matrix with at least
/// `n` rows: the target gets the all-`+` row 0, the other qubits rows
/// `1, 2, …` in ascending qubit order. For `target = 1` this is the first `n`
/// rows of the Hadamard matrix.
pub fn decoupling_sign_matrix(n: usize, target: usize) -> Result<SignMatrix> {
    if n > 8 {
        return Err(Error::SignMatrix(format!(
            "decoupling of {n} qubits needs more than 8 intervals"
        )));
    }
    check_index(target, n)?;
    let k = order_for(n)?;
    let mut next = 1;
    let rows = (1..=n)
        .map(|q| {
            if q == target {
                hadamard_row(k, 0)
            } else {
                next += 1;
                hadamard_row(k, next - 1)
            }
        })
        .collect();
    let s = SignMatrix::new(rows)?;
    s.check_decoupling(target)?;
    Ok(s)
}

/// Recoupling matrix for the adjacent or non-adjacent pair `(i, j)`: both
/// get row 1 of the smallest Sylvester matrix with at least `max(n, 2)` rows,
/// the remaining qubits rows `2, 3, …` in ascending qubit order.
pub fn recoupling_sign_matrix(n: usize, pair: (usize, usize)) -> Result<SignMatrix> {
    let (i, j) = pair;
    check_index(i, n)?;
    check_index(j, n)?;
    if i >= j {
        return Err(Error::SignMatrix(format!("pair ({i}, {j}) must satisfy i < j")));
    }
    let k = order_for(n.max(2))?;
    let mut next = 2;
    let rows = (1..=n)
        .map(|q| {
            if q == i || q == j {
                hadamard_row(k, 1)
            } else {
                next += 1;
                hadamard_row(k, next - 1)
            }
        })
        .collect();
    let s = SignMatrix::new(rows)?;
    s.check_recoupling(pair)?;
    Ok(s)
}

const C0: [i8; 4] = [1, 1, 1, 1];
const C1: [i8; 4] = [1, -1, 1, -1];
const C2: [i8; 4] = [1, 1, -1, -1];
const C3: [i8; 4] = [1, -1, -1, 1];

/// Four-interval decoupling matrix for any register size, drawn from the
/// order-4 Hadamard matrix. The target keeps `++++`, qubits of the same
/// parity as the target take `+−+−`, the others `+−−+`. Adjacent qubits
/// always have opposite parity, so every adjacent pair is orthogonal.
///
/// For `target = 1` on seven qubits the resulting pulse sequence is
/// `U X_{2..7} U X_{3,5,7} U X_{2..7} U X_{3,5,7}`.
pub fn compact_decoupling_sign_matrix(n: usize, target: usize) -> Result<SignMatrix> {
    check_index(target, n)?;
    let rows = (1..=n)
        .map(|q| {
            if q == target {
                C0.to_vec()
            } else if q % 2 == target % 2 {
                C1.to_vec()
            } else {
                C3.to_vec()
            }
        })
        .collect();
    let s = SignMatrix::new(rows)?;
    s.check_decoupling(target)?;
    Ok(s)
}

/// Four-interval recoupling matrix for the adjacent pair `(l, l + 1)`. The pair
/// takes `+−+−`; other qubits alternate between `++−−` and `+−−+` with their
/// distance from the pair, so neighbouring rows always differ.
pub fn compact_recoupling_sign_matrix(n: usize, pair: (usize, usize)) -> Result<SignMatrix> {
    let (l, m) = pair;
    check_index(l, n)?;
    check_index(m, n)?;
    if m != l + 1 {
        return Err(Error::NonAdjacentPair(l, m));
    }
    let rows = (1..=n)
        .map(|q| {
            let d = if q < l { l - q } else { q.saturating_sub(m) };
            if q == l || q == m {
                C1.to_vec()
            } else if d % 2 == 1 {
                C2.to_vec()
            } else {
                C3.to_vec()
            }
        })
        .collect();
    let s = SignMatrix::new(rows)?;
    s.check_recoupling(pair)?;
    Ok(s)
}
