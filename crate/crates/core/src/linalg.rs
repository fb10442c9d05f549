//! Dense complex linear-algebra helpers shared by the state and optimizer code.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Row-major-agnostic dense complex matrix; all state data lives in one of these.
pub type ComplexMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermitian_residual(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `|v⟩⟨v|` for an arbitrary (not necessarily normalized) vector.
pub fn outer(v: &[C64]) -> ComplexMatrix {
    let n = v.len();
    ComplexMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Inner product `⟨a|b⟩`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    ComplexMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
///
/// Exactly diagonal input short-circuits to the standard basis so that
/// incoherent states keep exactly incoherent eigenvectors.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let is_diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == ZERO));
    let (values, vectors) = if is_diagonal {
        let vals: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
        (vals, ComplexMatrix::identity(n, n))
    } else {
        let herm = (m + m.adjoint()).scale(0.5);
        let eig = herm.symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps the standard-basis order among ties
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let sorted_vals = order.iter().map(|&i| values[i]).collect();
    let sorted_vecs = ComplexMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    (sorted_vals, sorted_vecs)
}

/// Eigenvalues of a Hermitian matrix given as a dense row-major slice, written
/// into `out` (unsorted). Closed forms for sizes 1-3, nalgebra otherwise.
pub fn hermitian_eigenvalues_into(n: usize, h: &[C64], out: &mut [f64]) {
    debug_assert_eq!(h.len(), n * n);
    match n {
        1 => out[0] = h[0].re,
        2 => {
            let a = h[0].re;
            let d = h[3].re;
            let b = h[1];
            let mean = 0.5 * (a + d);
            let half = 0.5 * (a - d);
            let disc = (half * half + b.norm_sqr()).sqrt();
            out[0] = mean + disc;
            out[1] = mean - disc;
        }
        3 => eigenvalues_3x3(h, out),
        _ => {
            let m = ComplexMatrix::from_row_slice(n, n, h);
            let herm = (&m + m.adjoint()).scale(0.5);
            for (o, v) in out.iter_mut().zip(herm.symmetric_eigenvalues().iter()) {
                *o = *v;
            }
        }
    }
}

// Trigonometric solution of the characteristic cubic of a 3x3 Hermitian matrix.
fn eigenvalues_3x3(h: &[C64], out: &mut [f64]) {
    let a = h[0].re;
    let b = h[4].re;
    let c = h[8].re;
    let d = h[1];
    let e = h[5];
    let f = h[2];
    let off = d.norm_sqr() + e.norm_sqr() + f.norm_sqr();
    let q = (a + b + c) / 3.0;
    if off <= 1e-300 {
        out[0] = a;
        out[1] = b;
        out[2] = c;
        return;
    }
    let (aq, bq, cq) = (a - q, b - q, c - q);
    let p2 = aq * aq + bq * bq + cq * cq + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    if p <= 1e-300 {
        out[..3].fill(q);
        return;
    }
    // det(B) with B = (H - qI)/p
    let det = aq * bq * cq + 2.0 * (d * e * f.conj()).re
        - aq * e.norm_sqr()
        - bq * f.norm_sqr()
        - cq * d.norm_sqr();
    let r = (det / (p * p * p) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + two_pi_3).cos();
    out[0] = l1;
    out[1] = 3.0 * q - l1 - l3;
    out[2] = l3;
}

/// Solve `a x = b` for a small square complex system.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Option<ComplexMatrix> {
    a.clone().lu().solve(b)
}
