//! Curvature of spatial and space-time level sets from jets (plane case).
//!
//! Spatial level curves `{u(·, t) = c}` carry the 1×1 tensor `a`; space-time
//! level surfaces `{u = c}` carry the 2×2 tensor `â`, indexed by the spatial
//! coordinates. Signs are taken with respect to the upward normals `∇u/|∇u|`
//! and `Du/|Du|`, so convex superlevel sets give nonnegative tensors.

use nalgebra::{DMatrix, Matrix2, Matrix3, SymmetricEigen, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symmetric::sigma_all;

use super::jet::{Jet, DEGENERACY_FLOOR, T};

/// Eigen-data of a level-set curvature tensor.
#[derive(Clone, Debug, Serialize)]
pub struct ShapeReport {
    pub normal: Vec<f64>,
    /// Tensor in aligned coordinates.
    #[serde(skip)]
    pub tensor: DMatrix<f64>,
    /// Eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// `σ_1, …, σ_m` of the eigenvalues.
    pub sigma: Vec<f64>,
    pub gauss: f64,
    /// `W = |∇u|/|u_n|` or `Ŵ = |Du|/|u_t|`.
    pub w: f64,
}

impl ShapeReport {
    fn from_tensor(normal: Vec<f64>, tensor: DMatrix<f64>, w: f64) -> Self {
        let mut eigenvalues: Vec<f64> = SymmetricEigen::new(tensor.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let sigma = sigma_all(&eigenvalues)[1..].to_vec();
        let gauss = eigenvalues.iter().product();
        ShapeReport {
            normal,
            tensor,
            eigenvalues,
            sigma,
            gauss,
            w,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap_or(&0.0)
    }
}

/// Mode of the projection formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Spatial,
    SpaceTime,
}

/// Upward normals `∇u/|∇u|` and `Du/|Du|`.
pub fn upward_normals(jet: &Jet) -> Result<([f64; 2], [f64; 3])> {
    let g = jet.grad_norm();
    if !(g > DEGENERACY_FLOOR) {
        return Err(Error::DegenerateGradient(g));
    }
    check_time_derivative(jet)?;
    let big = jet.spacetime_grad_norm();
    Ok((
        [jet.d1[0] / g, jet.d1[1] / g],
        [jet.d1[0] / big, jet.d1[1] / big, jet.d1[T] / big],
    ))
}

fn check_time_derivative(jet: &Jet) -> Result<()> {
    if !(jet.d1[T] > DEGENERACY_FLOOR) {
        return Err(Error::DegenerateTimeDerivative(jet.d1[T]));
    }
    Ok(())
}

/// `h_11 = u_2² u_11 + u_22 u_1² - 2 u_2 u_1 u_12` in the current frame, the
/// second axis playing the role of the normal direction.
pub fn spatial_h_in_frame(jet: &Jet) -> f64 {
    let (u1, un) = (jet.d1[0], jet.d1[1]);
    let d = &jet.d2;
    un * un * d[0][0] + d[1][1] * u1 * u1 - un * u1 * d[0][1] - un * u1 * d[0][1]
}

/// The 1×1 tensor `h` in aligned coordinates.
pub fn spatial_h_tensor(jet: &Jet) -> Result<DMatrix<f64>> {
    let (aligned, _) = jet.aligned()?;
    Ok(DMatrix::from_element(1, 1, spatial_h_in_frame(&aligned)))
}

/// Curvature of the spatial level curve through the correction formula in the
/// current frame (requires `u_2 ≠ 0`). The curve is oriented by the upward
/// normal of the graph `x_2 = v(x_1)`, i.e. `sign(u_2)·∇u/|∇u|`, so the sign is
/// flipped relative to [`spatial_curvature`] when `u_2 < 0`.
pub fn spatial_curvature_in_frame(jet: &Jet) -> Result<f64> {
    let (u1, un) = (jet.d1[0], jet.d1[1]);
    if !(un.abs() > DEGENERACY_FLOOR) {
        return Err(Error::DegenerateGradient(un.abs()));
    }
    let g = jet.grad_norm();
    let w = g / un.abs();
    let h = spatial_h_in_frame(jet);
    let big_a = h - 2.0 * u1 * u1 * h / (w * (1.0 + w) * un * un)
        + u1.powi(4) * h / (w * w * (1.0 + w) * (1.0 + w) * un.powi(4));
    Ok(-un.abs() / (g * un.powi(3)) * big_a)
}

/// Curvature of the spatial level curve, `κ = -h_11/(|∇u| u_n²)` aligned.
pub fn spatial_curvature(jet: &Jet) -> Result<ShapeReport> {
    let (aligned, frame) = jet.aligned()?;
    let un = aligned.d1[1];
    let kappa = -spatial_h_in_frame(&aligned) / (un * un * un);
    Ok(ShapeReport::from_tensor(
        frame[1].to_vec(),
        DMatrix::from_element(1, 1, kappa),
        1.0,
    ))
}

/// `ĥ_αβ = u_t² u_αβ + u_tt u_α u_β - u_t u_β u_αt - u_t u_α u_βt` in the
/// current frame.
pub fn spacetime_h_in_frame(jet: &Jet) -> [[f64; 2]; 2] {
    let ut = jet.d1[T];
    let utt = jet.d2[T][T];
    let mut h = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            h[a][b] = ut * ut * jet.d2[a][b] + utt * jet.d1[a] * jet.d1[b]
                - ut * jet.d1[b] * jet.d2[a][T]
                - ut * jet.d1[a] * jet.d2[b][T];
        }
    }
    h
}

/// Frame aligned with `∇u` when the gradient is nondegenerate, else the
/// identity frame.
fn spacetime_aligned(jet: &Jet) -> (Jet, [[f64; 2]; 2]) {
    match jet.aligned() {
        Ok(pair) => pair,
        Err(_) => (jet.clone(), [[1.0, 0.0], [0.0, 1.0]]),
    }
}

/// The 2×2 tensor `ĥ` in aligned coordinates.
pub fn spacetime_h_tensor(jet: &Jet) -> Result<DMatrix<f64>> {
    check_time_derivative(jet)?;
    let (aligned, _) = spacetime_aligned(jet);
    let h = spacetime_h_in_frame(&aligned);
    Ok(DMatrix::from_fn(2, 2, |a, b| h[a][b]))
}

fn w_hat(jet: &Jet) -> f64 {
    jet.spacetime_grad_norm() / jet.d1[T].abs()
}

/// `Â` assembled from the general correction formula, any frame.
pub fn a_hat_big_general(jet: &Jet) -> [[f64; 2]; 2] {
    let h = spacetime_h_in_frame(jet);
    let ut = jet.d1[T];
    let w = w_hat(jet);
    let d1 = w * (1.0 + w) * ut * ut;
    let d2 = d1 * d1;
    let u = [jet.d1[0], jet.d1[1]];
    let uhu: f64 = (0..2).map(|g| (0..2).map(|e| u[g] * u[e] * h[g][e]).sum::<f64>()).sum();
    let mut out = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let hb: f64 = (0..2).map(|g| u[g] * h[b][g]).sum();
            let ha: f64 = (0..2).map(|g| u[g] * h[a][g]).sum();
            out[a][b] = h[a][b] - u[a] * hb / d1 - u[b] * ha / d1 + u[a] * u[b] * uhu / d2;
        }
    }
    out
}

/// The remainder terms carrying at least three tangential first derivatives
/// in the explicit expansion (second axis normal): `(T_11, T_12, T_22)`.
pub fn t_terms(jet: &Jet) -> [f64; 3] {
    let h = spacetime_h_in_frame(jet);
    let ut = jet.d1[T];
    let w = w_hat(jet);
    let d2 = (w * (1.0 + w) * ut * ut).powi(2);
    let (u1, un) = (jet.d1[0], jet.d1[1]);
    [
        (2.0 * u1.powi(3) * un * h[0][1] + u1.powi(4) * h[0][0]) / d2,
        u1.powi(3) * un * h[0][0] / d2,
        0.0,
    ]
}

/// `Â` through the explicit expansion in the tangential/normal split plus the
/// literal remainder terms.
pub fn a_hat_big_explicit(jet: &Jet) -> [[f64; 2]; 2] {
    let h = spacetime_h_in_frame(jet);
    let ut = jet.d1[T];
    let w = w_hat(jet);
    let d1 = w * (1.0 + w) * ut * ut;
    let d2 = d1 * d1;
    let (u1, un) = (jet.d1[0], jet.d1[1]);
    let (h11, h1n, hnn) = (h[0][0], h[0][1], h[1][1]);
    let t = t_terms(jet);
    let a11 = h11 - u1 * un * h1n / d1 - u1 * un * h1n / d1 - u1 * u1 * h11 / d1 - u1 * u1 * h11 / d1
        + u1 * u1 * un * un * hnn / d2
        + t[0];
    let a1n = h1n - u1 * un * hnn / d1 - un * un * h1n / d1 - un * u1 * h11 / d1 + u1 * un.powi(3) * hnn / d2
        - u1 * u1 * h1n / d1
        + 2.0 * u1 * un * un * u1 * h1n / d2
        + t[1];
    let ann = hnn - 2.0 * un * un * hnn / d1 + un.powi(4) * hnn / d2 - 2.0 * un * u1 * h1n / d1
        + 2.0 * un.powi(3) * u1 * h1n / d2
        + un * un * u1 * u1 * h11 / d2
        + t[2];
    [[a11, a1n], [a1n, ann]]
}

fn a_hat_from_big(jet: &Jet, big: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let ut = jet.d1[T];
    let factor = -ut.abs() / (jet.spacetime_grad_norm() * ut.powi(3));
    [
        [factor * big[0][0], factor * big[0][1]],
        [factor * big[1][0], factor * big[1][1]],
    ]
}

/// `â` in the current frame via the general formula.
pub fn a_hat_general(jet: &Jet) -> Result<[[f64; 2]; 2]> {
    check_time_derivative(jet)?;
    Ok(a_hat_from_big(jet, a_hat_big_general(jet)))
}

/// `â` in the current frame via the explicit expansion.
pub fn a_hat_explicit(jet: &Jet) -> Result<[[f64; 2]; 2]> {
    check_time_derivative(jet)?;
    Ok(a_hat_from_big(jet, a_hat_big_explicit(jet)))
}

/// Space-time curvature tensor `â` in aligned coordinates with its eigen-data.
pub fn spacetime_shape_operator(jet: &Jet) -> Result<ShapeReport> {
    check_time_derivative(jet)?;
    let (aligned, _) = spacetime_aligned(jet);
    let a = a_hat_from_big(&aligned, a_hat_big_general(&aligned));
    let (_, normal) = upward_normals_relaxed(jet);
    Ok(ShapeReport::from_tensor(
        normal.to_vec(),
        DMatrix::from_fn(2, 2, |i, j| a[i][j]),
        w_hat(jet),
    ))
}

fn upward_normals_relaxed(jet: &Jet) -> ([f64; 2], [f64; 3]) {
    let g = jet.grad_norm().max(f64::MIN_POSITIVE);
    let big = jet.spacetime_grad_norm();
    (
        [jet.d1[0] / g, jet.d1[1] / g],
        [jet.d1[0] / big, jet.d1[1] / big, jet.d1[T] / big],
    )
}

/// Coordinate-free shape operator `-P H P / |g|` restricted to the tangent
/// space of the level set.
pub fn projection_shape_operator(jet: &Jet, mode: Mode) -> Result<ShapeReport> {
    match mode {
        Mode::Spatial => {
            let g = jet.grad_norm();
            if !(g > DEGENERACY_FLOOR) {
                return Err(Error::DegenerateGradient(g));
            }
            let n = [jet.d1[0] / g, jet.d1[1] / g];
            let tangent = [-n[1], n[0]];
            let hess = Matrix2::new(jet.d2[0][0], jet.d2[0][1], jet.d2[1][0], jet.d2[1][1]);
            let tv = nalgebra::Vector2::new(tangent[0], tangent[1]);
            let k = -(tv.transpose() * hess * tv)[(0, 0)] / g;
            Ok(ShapeReport::from_tensor(
                n.to_vec(),
                DMatrix::from_element(1, 1, k),
                1.0,
            ))
        }
        Mode::SpaceTime => {
            check_time_derivative(jet)?;
            let big = jet.spacetime_grad_norm();
            let n = Vector3::new(jet.d1[0], jet.d1[1], jet.d1[T]) / big;
            let hess = Matrix3::from_fn(|a, b| jet.d2[a][b]);
            let g = jet.grad_norm();
            let t1 = if g > DEGENERACY_FLOOR {
                Vector3::new(-jet.d1[1] / g, jet.d1[0] / g, 0.0)
            } else {
                Vector3::new(1.0, 0.0, 0.0)
            };
            let t1 = (t1 - n * n.dot(&t1)).normalize();
            let t2 = n.cross(&t1);
            let basis = [t1, t2];
            let tensor = DMatrix::from_fn(2, 2, |a, b| -(basis[a].transpose() * hess * basis[b])[(0, 0)] / big);
            Ok(ShapeReport::from_tensor(
                n.iter().copied().collect(),
                tensor,
                w_hat(jet),
            ))
        }
    }
}
