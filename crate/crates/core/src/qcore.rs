//! Dense complex linear algebra and quantum-state primitives.
//!
//! Operators are plain [`CMatrix`] values (`nalgebra::DMatrix<Complex64>`).
//! Hermiticity and unitarity are checked where an operation depends on them
//! rather than carried as flags.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => CMatrix::identity(2, 2),
            Pauli::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Pauli::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
            Pauli::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        }
    }
}

/// Bit of basis index `index` that belongs to `qubit` (1-based, qubit 1 is the MSB).
#[inline]
pub fn qubit_bit(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - qubit)) & 1
}

/// Mask selecting `qubit` (1-based) within an `n`-qubit basis index.
#[inline]
pub fn qubit_mask(qubit: usize, n: usize) -> usize {
    1 << (n - qubit)
}

/// Number of qubits of a `dim`-dimensional register, if `dim` is a power of two.
pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Dimension(format!("{dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

pub fn kron_pair(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Tensor product `F₁ ⊗ F₂ ⊗ … ⊗ F_k`.
pub fn kron(factors: &[CMatrix]) -> Result<CMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("kron of an empty factor list".into()))?;
    for f in factors {
        if !f.is_square() {
            return Err(Error::Dimension(format!(
                "kron factor is {}x{}, expected square",
                f.nrows(),
                f.ncols()
            )));
        }
    }
    Ok(rest.iter().fold(first.clone(), |acc, f| acc.kronecker(f)))
}

fn check_qubit(qubit: usize, n: usize) -> Result<()> {
    if qubit == 0 || qubit > n {
        return Err(Error::QubitOutOfRange { qubit, n });
    }
    Ok(())
}

/// `σ^p` acting on `site` of an `n`-qubit register, identity elsewhere.
pub fn pauli_embed(p: Pauli, site: usize, n: usize) -> Result<CMatrix> {
    check_qubit(site, n)?;
    let factors: Vec<CMatrix> = (1..=n)
        .map(|q| if q == site { p.matrix() } else { Pauli::I.matrix() })
        .collect();
    kron(&factors)
}

/// Product of Paulis on distinct sites, e.g. `σ^z_3 σ^z_4`.
pub fn pauli_string(terms: &[(Pauli, usize)], n: usize) -> Result<CMatrix> {
    let mut labels = vec![Pauli::I; n];
    for &(p, site) in terms {
        check_qubit(site, n)?;
        if labels[site - 1] != Pauli::I {
            return Err(Error::InvalidArgument(format!("site {site} repeated in Pauli string")));
        }
        labels[site - 1] = p;
    }
    let factors: Vec<CMatrix> = labels.into_iter().map(Pauli::matrix).collect();
    kron(&factors)
}

/// Precomputed index layout for applying a `k`-qubit operator inside an
/// `n`-qubit register.
struct LocalLayout {
    /// Offsets of the `2^k` local basis states relative to a base index.
    offsets: Vec<usize>,
    /// Basis indices with every target bit cleared.
    bases: Vec<usize>,
    positions: Vec<usize>,
}

impl LocalLayout {
    fn new(targets: &[usize], n: usize) -> Result<Self> {
        let k = targets.len();
        if k == 0 {
            return Err(Error::InvalidArgument("operator has no target qubits".into()));
        }
        let mut seen = 0usize;
        let mut positions = Vec::with_capacity(k);
        for &t in targets {
            check_qubit(t, n)?;
            let m = qubit_mask(t, n);
            if seen & m != 0 {
                return Err(Error::InvalidArgument(format!("qubit {t} targeted twice")));
            }
            seen |= m;
            positions.push(n - t);
        }
        let offsets = (0..1usize << k)
            .map(|a| {
                positions
                    .iter()
                    .enumerate()
                    .map(|(i, &pos)| ((a >> (k - 1 - i)) & 1) << pos)
                    .sum()
            })
            .collect();
        let bases = (0..1usize << n).filter(|b| b & seen == 0).collect();
        Ok(Self {
            offsets,
            bases,
            positions,
        })
    }

    /// Local index of a full basis index.
    fn local_index(&self, index: usize) -> usize {
        let k = self.positions.len();
        self.positions
            .iter()
            .enumerate()
            .map(|(i, &pos)| ((index >> pos) & 1) << (k - 1 - i))
            .sum()
    }
}

fn is_diagonal(m: &CMatrix) -> bool {
    let n = m.nrows();
    (0..n).all(|j| (0..n).all(|i| i == j || m[(i, j)] == ZERO))
}

/// Left-multiplies the column-major `2^n × ncols` block in `data` by `op`
/// embedded on `targets` (first target is the most significant local bit).
pub fn apply_left_slice(op: &CMatrix, targets: &[usize], n: usize, data: &mut [C64], ncols: usize) -> Result<()> {
    let dim = 1usize << n;
    let local = 1usize << targets.len();
    if op.nrows() != local || op.ncols() != local {
        return Err(Error::Dimension(format!(
            "operator is {}x{} but acts on {} qubit(s)",
            op.nrows(),
            op.ncols(),
            targets.len()
        )));
    }
    if data.len() != dim * ncols {
        return Err(Error::Dimension(format!(
            "state buffer has {} entries, expected {}",
            data.len(),
            dim * ncols
        )));
    }
    let layout = LocalLayout::new(targets, n)?;
    if is_diagonal(op) {
        let phases: Vec<C64> = (0..dim)
            .map(|i| op[(layout.local_index(i), layout.local_index(i))])
            .collect();
        for col in data.chunks_mut(dim) {
            for (x, p) in col.iter_mut().zip(&phases) {
                *x *= p;
            }
        }
        return Ok(());
    }
    let mut gathered = vec![ZERO; local];
    for col in data.chunks_mut(dim) {
        for &base in &layout.bases {
            for (g, off) in gathered.iter_mut().zip(&layout.offsets) {
                *g = col[base + off];
            }
            for (a, off) in layout.offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (b, g) in gathered.iter().enumerate() {
                    acc += op[(a, b)] * g;
                }
                col[base + off] = acc;
            }
        }
    }
    Ok(())
}

/// `m ← U·m` with `U` the embedding of `op` on `targets`.
pub fn apply_left(op: &CMatrix, targets: &[usize], n: usize, m: &mut CMatrix) -> Result<()> {
    let ncols = m.ncols();
    apply_left_slice(op, targets, n, m.as_mut_slice(), ncols)
}

/// `ρ ← U·ρ·U†` with `U` the embedding of `op` on `targets`.
pub fn conjugate(op: &CMatrix, targets: &[usize], n: usize, rho: &mut CMatrix) -> Result<()> {
    apply_left(op, targets, n, rho)?;
    let mut t = rho.adjoint();
    apply_left(op, targets, n, &mut t)?;
    *rho = t.adjoint();
    Ok(())
}

/// Full-register matrix of `op` acting on `targets`.
pub fn embed(op: &CMatrix, targets: &[usize], n: usize) -> Result<CMatrix> {
    let mut m = CMatrix::identity(1 << n, 1 << n);
    apply_left(op, targets, n, &mut m)?;
    Ok(m)
}

/// `‖A − A†‖_max`.
pub fn hermitian_deviation(a: &CMatrix) -> f64 {
    (a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `‖U†U − I‖_max`.
pub fn unitary_deviation(u: &CMatrix) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - CMatrix::identity(n, n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(a: &CMatrix) -> bool {
    a.is_square() && hermitian_deviation(a) <= tol::HERMITIAN * max_abs(a).max(1.0)
}

pub fn is_unitary(u: &CMatrix) -> bool {
    u.is_square() && unitary_deviation(u) <= tol::UNITARY
}

/// Hermitian part of `a` divided by its largest entry magnitude, and that
/// magnitude. nalgebra's symmetric eigensolver can return NaN for matrices
/// whose entries are all tiny, so the solvers work on the rescaled matrix.
fn normalised_hermitian_part(a: &CMatrix) -> (CMatrix, f64) {
    let sym = (a + a.adjoint()) * r(0.5);
    let scale = max_abs(&sym);
    if scale == 0.0 || !scale.is_finite() {
        return (sym, 1.0);
    }
    (sym.map(|z| z / scale), scale)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn eigh(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !is_hermitian(a) {
        return Err(Error::NotHermitian(hermitian_deviation(a)));
    }
    let (sym, scale) = normalised_hermitian_part(a);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| scale * eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(a.nrows(), a.ncols(), |row, col| eig.eigenvectors[(row, order[col])]);
    Ok((values, vectors))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn eigvalsh(a: &CMatrix) -> Result<Vec<f64>> {
    if !is_hermitian(a) {
        return Err(Error::NotHermitian(hermitian_deviation(a)));
    }
    let (sym, scale) = normalised_hermitian_part(a);
    let mut v: Vec<f64> = sym.symmetric_eigenvalues().iter().map(|l| scale * l).collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `exp(scale · H)` for Hermitian `H`, through its eigendecomposition.
///
/// Diagonal input is exponentiated entrywise, which keeps diagonal
/// propagators exactly diagonal.
pub fn matexp_hermitian(h: &CMatrix, scale: C64) -> Result<CMatrix> {
    if !h.is_square() {
        return Err(Error::Dimension("matrix exponential of a non-square matrix".into()));
    }
    if !is_hermitian(h) {
        return Err(Error::NotHermitian(hermitian_deviation(h)));
    }
    let n = h.nrows();
    if is_diagonal(h) {
        return Ok(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                (scale * h[(i, i)].re).exp()
            } else {
                ZERO
            }
        }));
    }
    let (values, vectors) = eigh(h)?;
    let mut scaled = vectors.clone();
    for (j, lambda) in values.iter().enumerate() {
        let f = (scale * *lambda).exp();
        for i in 0..n {
            scaled[(i, j)] *= f;
        }
    }
    Ok(scaled * vectors.adjoint())
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Multiplies `candidate` by the global phase that lines up its entry at the
/// position of `reference`'s largest-magnitude entry.
pub fn phase_align(reference: &CMatrix, candidate: &CMatrix) -> CMatrix {
    let (mut best, mut idx) = (-1.0, (0, 0));
    for j in 0..reference.ncols() {
        for i in 0..reference.nrows() {
            let m = reference[(i, j)].norm();
            if m > best {
                best = m;
                idx = (i, j);
            }
        }
    }
    let (a, b) = (reference[idx], candidate[idx]);
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return candidate.clone();
    }
    let phase = C64::from_polar(1.0, a.arg() - b.arg());
    candidate * phase
}

/// Bloch vector `(r_x, r_y, r_z)` of a single-qubit state `ρ = ½(I + r·σ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector(pub [f64; 3]);

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self([x, y, z])
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_physical(&self) -> bool {
        self.norm() <= 1.0 + tol::BLOCH_NORM
    }

    pub fn to_density(&self) -> DensityMatrix {
        bloch_to_density(self)
    }
}

pub fn bloch_to_density(v: &BlochVector) -> DensityMatrix {
    let [x, y, z] = v.0;
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            c(0.5 * (1.0 + z), 0.0),
            c(0.5 * x, -0.5 * y),
            c(0.5 * x, 0.5 * y),
            c(0.5 * (1.0 - z), 0.0),
        ],
    );
    DensityMatrix::new_unchecked(m)
}

/// Inverse of [`bloch_to_density`]: `r_a = tr(ρ σ^a)`.
pub fn density_to_bloch(rho: &CMatrix) -> Result<BlochVector> {
    if rho.nrows() != 2 || rho.ncols() != 2 {
        return Err(Error::Dimension(format!(
            "Bloch vector of a {}x{} matrix",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let off = rho[(1, 0)] + rho[(0, 1)].conj();
    Ok(BlochVector::new(off.re, off.im, (rho[(0, 0)] - rho[(1, 1)]).re))
}

/// Density matrix on a register of qubits.
///
/// [`DensityMatrix::new`] validates the physical invariants. States produced
/// by non-CPTP maps are wrapped with [`DensityMatrix::new_unchecked`] so their
/// defects can still be inspected.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Dimension("density matrix must be square".into()));
        }
        qubit_count(mat.nrows())?;
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol::TRACE || tr.im.abs() > tol::TRACE {
            return Err(Error::InvalidArgument(format!("density matrix trace is {tr}")));
        }
        let eig = eigvalsh(&mat)?;
        if eig[0] < -tol::POSITIVITY {
            return Err(Error::InvalidArgument(format!(
                "density matrix has eigenvalue {:.3e}",
                eig[0]
            )));
        }
        Ok(Self { mat })
    }

    pub fn new_unchecked(mat: CMatrix) -> Self {
        Self { mat }
    }

    /// `|ψ⟩⟨ψ|` for a normalised amplitude vector.
    pub fn pure(psi: &CVector) -> Self {
        Self {
            mat: psi * psi.adjoint(),
        }
    }

    /// `|index⟩⟨index|` on `n` qubits.
    pub fn basis_state(n: usize, index: usize) -> Self {
        let dim = 1 << n;
        let mut mat = CMatrix::zeros(dim, dim);
        mat[(index, index)] = ONE;
        Self { mat }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1 << n;
        Self {
            mat: CMatrix::identity(dim, dim) * r(1.0 / dim as f64),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigvalsh(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// `ρ ⊗ σ`.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self {
            mat: self.mat.kronecker(&other.mat),
        }
    }
}

/// `½‖a − b‖₁`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "trace distance between {}- and {}-dimensional states",
            a.dim(),
            b.dim()
        )));
    }
    let diff = a.matrix() - b.matrix();
    Ok(0.5 * eigvalsh(&diff)?.iter().map(|l| l.abs()).sum::<f64>())
}
