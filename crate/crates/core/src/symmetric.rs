//! Elementary symmetric functions of eigenvalue vectors and symmetric
//! matrices, rank estimation and the bordered-matrix case split used by the
//! constant rank analysis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest supported length of an eigenvalue vector.
pub const MAX_DIM: usize = 16;
/// Largest vector accepted by the subset-enumeration oracle.
pub const MAX_BRUTEFORCE_DIM: usize = 12;
/// Absolute floor for the spectral scale.
pub const SCALE_FLOOR: f64 = 1e-14;

fn check_vector(lambda: &[f64]) -> Result<()> {
    if lambda.len() > MAX_DIM {
        return Err(Error::invalid(format!(
            "eigenvalue vector of length {} exceeds {MAX_DIM}",
            lambda.len()
        )));
    }
    if let Some(v) = lambda.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite entry {v}")));
    }
    Ok(())
}

/// All elementary symmetric functions `σ_0, …, σ_n` at once, by expanding
/// `∏ (1 + λ_i x)` one factor at a time.
pub fn sigma_all(lambda: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; lambda.len() + 1];
    e[0] = 1.0;
    for (i, &l) in lambda.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += l * e[k - 1];
        }
    }
    e
}

/// `σ_k(λ)` with `σ_0 = 1` and `σ_k = 0` for `k > n`.
pub fn sigma_k(lambda: &[f64], k: i64) -> Result<f64> {
    if k < 0 {
        return Err(Error::invalid(format!("negative order k = {k}")));
    }
    check_vector(lambda)?;
    Ok(sigma_unchecked(lambda, k))
}

/// Same as [`sigma_k`] without validation; negative orders give 0.
pub fn sigma_unchecked(lambda: &[f64], k: i64) -> f64 {
    if k < 0 || k as usize > lambda.len() {
        return 0.0;
    }
    let k = k as usize;
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (i, &l) in lambda.iter().enumerate() {
        for j in (1..=(i + 1).min(k)).rev() {
            e[j] += l * e[j - 1];
        }
    }
    e[k]
}

/// Reference `σ_k` by summing over all `k`-subsets.
pub fn sigma_k_bruteforce(lambda: &[f64], k: i64) -> Result<f64> {
    if k < 0 {
        return Err(Error::invalid(format!("negative order k = {k}")));
    }
    let n = lambda.len();
    if n > MAX_BRUTEFORCE_DIM {
        return Err(Error::invalid(format!(
            "subset enumeration limited to n <= {MAX_BRUTEFORCE_DIM}, got {n}"
        )));
    }
    let k = k as u32;
    let mut total = 0.0;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() != k {
            continue;
        }
        let mut prod = 1.0;
        for (i, l) in lambda.iter().enumerate() {
            if mask & (1 << i) != 0 {
                prod *= l;
            }
        }
        total += prod;
    }
    Ok(total)
}

/// `σ_k` of `λ` with the listed components removed.
pub fn sigma_deleted(lambda: &[f64], k: i64, deleted: &[usize]) -> Result<f64> {
    if deleted.len() > 3 {
        return Err(Error::invalid("at most three indices may be deleted"));
    }
    for (a, &i) in deleted.iter().enumerate() {
        if i >= lambda.len() {
            return Err(Error::invalid(format!(
                "index {i} out of range for length {}",
                lambda.len()
            )));
        }
        if deleted[..a].contains(&i) {
            return Err(Error::invalid(format!("index {i} deleted twice")));
        }
    }
    let reduced: Vec<f64> = lambda
        .iter()
        .enumerate()
        .filter(|(i, _)| !deleted.contains(i))
        .map(|(_, v)| *v)
        .collect();
    sigma_k(&reduced, k)
}

/// Validates squareness, finiteness and symmetry (relative 1e-12).
pub fn check_symmetric(w: &DMatrix<f64>) -> Result<()> {
    if w.nrows() != w.ncols() {
        return Err(Error::invalid(format!("matrix is {}x{}", w.nrows(), w.ncols())));
    }
    if w.nrows() > MAX_DIM {
        return Err(Error::invalid(format!(
            "matrix dimension {} exceeds {MAX_DIM}",
            w.nrows()
        )));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let scale = w.amax().max(SCALE_FLOOR);
    for i in 0..w.nrows() {
        for j in 0..i {
            if (w[(i, j)] - w[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::invalid(format!("matrix not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Eigenvalues sorted in descending order.
pub fn eigenvalues_desc(w: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(w.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// `σ_k` of a symmetric matrix through its spectrum.
pub fn sigma_matrix(w: &DMatrix<f64>, k: i64) -> f64 {
    if k < 0 || k as usize > w.nrows() {
        return 0.0;
    }
    if k == 0 {
        return 1.0;
    }
    sigma_unchecked(&eigenvalues_desc(w), k)
}

/// Principal submatrix with the listed rows and columns removed.
pub fn delete_indices(w: &DMatrix<f64>, deleted: &[usize]) -> DMatrix<f64> {
    let keep: Vec<usize> = (0..w.nrows()).filter(|i| !deleted.contains(i)).collect();
    DMatrix::from_fn(keep.len(), keep.len(), |a, b| w[(keep[a], keep[b])])
}

/// Gradient of `σ_m` at a diagonal matrix: `diag(σ_{m-1}(W|i))`.
pub fn sigma_matrix_gradient(w: &DMatrix<f64>, m: i64) -> Result<DMatrix<f64>> {
    check_symmetric(w)?;
    let n = w.nrows();
    let scale = w.amax().max(SCALE_FLOOR);
    for i in 0..n {
        for j in 0..n {
            if i != j && w[(i, j)].abs() > 1e-12 * scale {
                return Err(Error::invalid(format!("matrix not diagonal at ({i}, {j})")));
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| w[(i, i)]).collect();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = sigma_deleted(&diag, m - 1, &[i])?;
    }
    Ok(out)
}

/// Spectral scale `max(|λ|_max, 1e-14)`.
pub fn spectral_scale(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().fold(SCALE_FLOOR, |s, v| s.max(v.abs()))
}

/// Rank of a positive semidefinite matrix read off the symmetric functions
/// of its spectrum.
///
/// With `s` the spectral scale, the rank is the largest `r` such that
/// `σ_k > tol·s·σ_{k-1}` for every `k ≤ r`. The ratio `σ_k/σ_{k-1}` tracks the
/// `k`-th eigenvalue, so on separated spectra this agrees with counting
/// eigenvalues above `tol·s`.
pub fn rank_by_sigma(w: &DMatrix<f64>, tol: f64) -> Result<usize> {
    check_symmetric(w)?;
    rank_from_eigenvalues(&eigenvalues_desc(w), tol)
}

pub fn rank_from_eigenvalues(eigenvalues: &[f64], tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("rank tolerance {tol} must be positive")));
    }
    let s = spectral_scale(eigenvalues);
    let min = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -tol * s {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let clipped: Vec<f64> = eigenvalues.iter().map(|v| v.max(0.0)).collect();
    let e = sigma_all(&clipped);
    let mut r = 0;
    for k in 1..e.len() {
        if e[k] > tol * s * e[k - 1] {
            r = k;
        } else {
            break;
        }
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Case {
    #[serde(rename = "CASE1")]
    Case1,
    #[serde(rename = "CASE2")]
    Case2,
    #[serde(rename = "FULL_RANK")]
    FullRank,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CaseTag {
    pub tag: Case,
    pub rank: usize,
    /// Observed Schur slack `â_nn - Σ â_in²/â_ii` over the nonzero leading block.
    pub margin: f64,
}

/// Splits a rank-deficient PSD matrix into the two bordered cases.
///
/// The leading `(n-1)×(n-1)` block is diagonalized (eigenvalues descending)
/// and the last column rotated accordingly. With `l` the rank and `k` the rank
/// of the leading block, CASE1 is `k = l - 1` with positive Schur slack and
/// CASE2 is `k = l` with vanishing slack.
pub fn classify_case(a: &DMatrix<f64>, tol: f64) -> Result<CaseTag> {
    check_symmetric(a)?;
    let n = a.nrows();
    if n == 0 {
        return Err(Error::invalid("empty matrix"));
    }
    let full = eigenvalues_desc(a);
    let l = rank_from_eigenvalues(&full, tol)?;
    let s = spectral_scale(&full);
    let m = n - 1;
    let (diag, border) = rotate_leading_block(a);
    let k = diag.iter().filter(|d| **d > tol * s).count();
    let mut slack = a[(m, m)];
    for i in 0..k {
        slack -= border[i] * border[i] / diag[i];
    }
    if l == n {
        return Ok(CaseTag {
            tag: Case::FullRank,
            rank: l,
            margin: slack,
        });
    }
    if k + 1 == l && slack > tol * s {
        return Ok(CaseTag {
            tag: Case::Case1,
            rank: l,
            margin: slack,
        });
    }
    if k == l && slack.abs() <= tol * s {
        return Ok(CaseTag {
            tag: Case::Case2,
            rank: l,
            margin: slack,
        });
    }
    Err(Error::ClassificationAmbiguous(format!(
        "rank {l}, leading block rank {k}, Schur slack {slack:e} at threshold {:e}",
        tol * s
    )))
}

/// Diagonalizes the leading block; returns its eigenvalues (descending) and
/// the last column expressed in the eigenbasis.
pub fn rotate_leading_block(a: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let m = a.nrows() - 1;
    if m == 0 {
        return (Vec::new(), Vec::new());
    }
    let block = a.view((0, 0), (m, m)).into_owned();
    let eig = SymmetricEigen::new(block);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let b = DVector::from_fn(m, |i, _| a[(i, m)]);
    let rotated = eig.eigenvectors.transpose() * b;
    (
        order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        order.iter().map(|&i| rotated[i]).collect(),
    )
}

/// Outcome of the bordered expansion check.
#[derive(Clone, Debug, Serialize)]
pub struct BorderedReport {
    /// Remainder for the matrix as given.
    pub remainder: f64,
    /// Remainders for the off-diagonal leading block scaled by 1, 1/2, 1/4.
    pub scaled_remainders: [f64; 3],
    /// Fitted exponent of the remainder in the scaling factor, when the
    /// remainder is not identically zero.
    pub exponent: Option<f64>,
    /// Tolerance below which a remainder counts as zero.
    pub zero_tol: f64,
    /// Whether `(n, l)` lies in the range where the expansion is stated.
    pub in_stated_range: bool,
}

impl BorderedReport {
    /// Zero remainder on the input and either identically zero or at least
    /// cubic under scaling.
    pub fn passes(&self) -> bool {
        self.remainder.abs() <= self.zero_tol && self.exponent.is_none_or(|e| e >= 2.8)
    }
}

/// Remainder of the five-term expansion of `σ_{l+1}` for a bordered matrix
/// `â = [[M, b], [bᵀ, â_nn]]`.
pub fn bordered_remainder(a: &DMatrix<f64>, l: usize) -> f64 {
    let n = a.nrows();
    let m = n - 1;
    let li = l as i64;
    let mm = a.view((0, 0), (m, m)).into_owned();
    let ann = a[(m, m)];
    let b: Vec<f64> = (0..m).map(|i| a[(i, m)]).collect();
    let mut terms = sigma_matrix(&mm, li + 1) + ann * sigma_matrix(&mm, li);
    for i in 0..m {
        terms -= b[i] * b[i] * sigma_matrix(&delete_indices(&mm, &[i]), li - 1);
    }
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            terms += b[i] * b[j] * mm[(i, j)] * sigma_matrix(&delete_indices(&mm, &[i, j]), li - 2);
            for k in 0..m {
                if k == i || k == j {
                    continue;
                }
                terms -= b[i] * b[j] * mm[(i, k)] * mm[(k, j)] * sigma_matrix(&delete_indices(&mm, &[i, j, k]), li - 3);
            }
        }
    }
    sigma_matrix(a, li + 1) - terms
}

/// Checks the expansion on `â` (whose leading block must be diagonal) and
/// measures how the remainder scales when the leading block is given the
/// off-diagonal part `ε·P` for `ε ∈ {1, 1/2, 1/4}`. Without an explicit `P` a
/// fixed pattern of size `0.3·scale` is used.
pub fn bordered_expansion_check(
    a: &DMatrix<f64>,
    l: usize,
    perturbation: Option<&DMatrix<f64>>,
) -> Result<BorderedReport> {
    check_symmetric(a)?;
    let n = a.nrows();
    if n < 2 {
        return Err(Error::invalid("bordered matrix needs n >= 2"));
    }
    if l + 1 > n {
        return Err(Error::invalid(format!("order l + 1 = {} exceeds n = {n}", l + 1)));
    }
    let m = n - 1;
    let scale = a.amax().max(SCALE_FLOOR);
    for i in 0..m {
        for j in 0..m {
            if i != j && a[(i, j)].abs() > 1e-12 * scale {
                return Err(Error::invalid(format!("leading block not diagonal at ({i}, {j})")));
            }
        }
    }
    let pattern = match perturbation {
        Some(p) => {
            check_symmetric(p)?;
            if p.nrows() != m {
                return Err(Error::invalid(format!(
                    "perturbation must be {m}x{m}, got {}x{}",
                    p.nrows(),
                    p.ncols()
                )));
            }
            p.clone()
        }
        None => DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                0.0
            } else {
                0.3 * scale * ((i + j + 1) as f64 * 1.7 + (i * j) as f64).sin()
            }
        }),
    };
    let zero_tol = 1e-12 * scale.powi(l as i32 + 1) * (n as f64).powi(3);
    let remainder = bordered_remainder(a, l);
    let eps = [1.0, 0.5, 0.25];
    let mut scaled = [0.0; 3];
    for (s, e) in scaled.iter_mut().zip(eps) {
        let mut b = a.clone();
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    b[(i, j)] = e * pattern[(i, j)];
                }
            }
        }
        *s = bordered_remainder(&b, l);
    }
    let exponent = if scaled.iter().all(|t| t.abs() <= zero_tol) {
        None
    } else {
        // least-squares slope of log|T| against log ε
        let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
        let ys: Vec<f64> = scaled.iter().map(|t| t.abs().max(f64::MIN_POSITIVE).ln()).collect();
        let mx = xs.iter().sum::<f64>() / 3.0;
        let my = ys.iter().sum::<f64>() / 3.0;
        let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        Some(num / den)
    };
    Ok(BorderedReport {
        remainder,
        scaled_remainders: scaled,
        exponent,
        zero_tol,
        in_stated_range: n >= 3 && l >= 3,
    })
}

/// A matrix-valued field sampled on an `nx × ny` grid; `None` marks cells
/// outside the domain.
#[derive(Clone, Debug)]
pub struct MatrixField {
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub values: Vec<Option<DMatrix<f64>>>,
}

impl MatrixField {
    fn at(&self, i: isize, j: isize) -> Option<&DMatrix<f64>> {
        if i < 0 || j < 0 || i >= self.nx as isize || j >= self.ny as isize {
            return None;
        }
        self.values[j as usize * self.nx + i as usize].as_ref()
    }
}

/// Worst ratio `|∇W_ij| / (W_ii W_jj)^{1/4}` over cells whose axis neighbours
/// are all present, using central differences. The denominator is floored at
/// 1e-30. Purely diagnostic.
pub fn gradient_quarter_bound_diagnostic(field: &MatrixField) -> f64 {
    let h = field.spacing;
    let mut worst = 0.0f64;
    for j in 0..field.ny as isize {
        for i in 0..field.nx as isize {
            let Some(w) = field.at(i, j) else { continue };
            let mut axes: Vec<(&DMatrix<f64>, &DMatrix<f64>)> = Vec::new();
            let mut ok = true;
            if field.nx > 1 {
                match (field.at(i + 1, j), field.at(i - 1, j)) {
                    (Some(p), Some(q)) => axes.push((p, q)),
                    _ => ok = false,
                }
            }
            if field.ny > 1 {
                match (field.at(i, j + 1), field.at(i, j - 1)) {
                    (Some(p), Some(q)) => axes.push((p, q)),
                    _ => ok = false,
                }
            }
            if !ok || axes.is_empty() {
                continue;
            }
            let n = w.nrows();
            for a in 0..n {
                for b in 0..n {
                    let grad2: f64 = axes
                        .iter()
                        .map(|(p, q)| ((p[(a, b)] - q[(a, b)]) / (2.0 * h)).powi(2))
                        .sum();
                    let denom = (w[(a, a)].max(0.0) * w[(b, b)].max(0.0)).powf(0.25).max(1e-30);
                    worst = worst.max(grad2.sqrt() / denom);
                }
            }
        }
    }
    worst
}
