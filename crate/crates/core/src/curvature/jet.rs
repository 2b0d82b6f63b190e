use crate::error::{Error, Result};

/// Index of the time variable in jet arrays.
pub const T: usize = 2;

/// Absolute floor below which gradients and time derivatives count as zero.
pub const DEGENERACY_FLOOR: f64 = 1e-8;

pub type D3 = [[[f64; 3]; 3]; 3];

/// Derivatives of `u(x, y, t)` at a point, indices `0 = x`, `1 = y`, `2 = t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: [f64; 3],
    pub d2: [[f64; 3]; 3],
    pub d3: Option<D3>,
    /// Time derivatives satisfy `u_t = Δu` and its derivatives.
    pub heat_constrained: bool,
}

impl Jet {
    pub fn new(value: f64, d1: [f64; 3], d2: [[f64; 3]; 3]) -> Self {
        Jet {
            value,
            d1,
            d2,
            d3: None,
            heat_constrained: false,
        }
    }

    /// Purely spatial jet; all time derivatives are zero.
    pub fn spatial(value: f64, grad: [f64; 2], hess: [[f64; 2]; 2]) -> Self {
        let mut d2 = [[0.0; 3]; 3];
        for a in 0..2 {
            for b in 0..2 {
                d2[a][b] = hess[a][b];
            }
        }
        Jet::new(value, [grad[0], grad[1], 0.0], d2)
    }

    pub fn with_third(mut self, d3: D3) -> Self {
        self.d3 = Some(d3);
        self
    }

    pub fn grad_norm(&self) -> f64 {
        self.d1[0].hypot(self.d1[1])
    }

    /// `|Du| = |(∇u, u_t)|`.
    pub fn spacetime_grad_norm(&self) -> f64 {
        (self.d1[0] * self.d1[0] + self.d1[1] * self.d1[1] + self.d1[T] * self.d1[T]).sqrt()
    }

    /// Largest deviation from symmetry of the mixed partials.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..3 {
            for b in 0..3 {
                worst = worst.max((self.d2[a][b] - self.d2[b][a]).abs());
                if let Some(d3) = &self.d3 {
                    for c in 0..3 {
                        worst = worst.max((d3[a][b][c] - d3[b][a][c]).abs());
                        worst = worst.max((d3[a][b][c] - d3[a][c][b]).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest violation of `u_t = Δu` and of its differentiated forms.
    pub fn heat_defect(&self) -> f64 {
        let mut worst = (self.d1[T] - self.d2[0][0] - self.d2[1][1]).abs();
        if let Some(d3) = &self.d3 {
            for a in 0..3 {
                worst = worst.max((self.d2[a][T] - d3[0][0][a] - d3[1][1][a]).abs());
            }
        }
        worst
    }

    /// Expresses the jet in the spatial frame whose rows are `frame[0]` and
    /// `frame[1]` (orthonormal, in the current coordinates). Time is untouched.
    pub fn in_frame(&self, frame: [[f64; 2]; 2]) -> Jet {
        let q = [
            [frame[0][0], frame[0][1], 0.0],
            [frame[1][0], frame[1][1], 0.0],
            [0.0, 0.0, 1.0],
        ];
        let mut d1 = [0.0; 3];
        let mut d2 = [[0.0; 3]; 3];
        for a in 0..3 {
            for i in 0..3 {
                d1[a] += q[a][i] * self.d1[i];
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += q[a][i] * q[b][j] * self.d2[i][j];
                    }
                }
                d2[a][b] = s;
            }
        }
        let d3 = self.d3.as_ref().map(|old| {
            let mut new = [[[0.0; 3]; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    for c in 0..3 {
                        let mut s = 0.0;
                        for i in 0..3 {
                            for j in 0..3 {
                                for k in 0..3 {
                                    s += q[a][i] * q[b][j] * q[c][k] * old[i][j][k];
                                }
                            }
                        }
                        new[a][b][c] = s;
                    }
                }
            }
            new
        });
        Jet {
            value: self.value,
            d1,
            d2,
            d3,
            heat_constrained: self.heat_constrained,
        }
    }

    /// Rotates the spatial axes by `angle` (counterclockwise).
    pub fn rotated(&self, angle: f64) -> Jet {
        let (s, c) = angle.sin_cos();
        self.in_frame([[c, s], [-s, c]])
    }

    /// Frame in which the second spatial axis points along `∇u`, so that
    /// `u_1 = 0` and `u_2 = |∇u| > 0`. Returns the rotated jet and the frame.
    pub fn aligned(&self) -> Result<(Jet, [[f64; 2]; 2])> {
        let g = self.grad_norm();
        if !(g > DEGENERACY_FLOOR) {
            return Err(Error::DegenerateGradient(g));
        }
        let e2 = [self.d1[0] / g, self.d1[1] / g];
        let e1 = [e2[1], -e2[0]];
        let frame = [e1, e2];
        let mut jet = self.in_frame(frame);
        jet.d1[0] = 0.0;
        jet.d1[1] = g;
        Ok((jet, frame))
    }

    /// Jet of `c·u`.
    pub fn scaled(&self, c: f64) -> Jet {
        let mut j = self.clone();
        j.value *= c;
        j.d1.iter_mut().for_each(|v| *v *= c);
        j.d2.iter_mut().flatten().for_each(|v| *v *= c);
        if let Some(d3) = j.d3.as_mut() {
            d3.iter_mut().flatten().flatten().for_each(|v| *v *= c);
        }
        j
    }

    /// Convex combination of jets (used to blend node jets bilinearly).
    pub fn blend(parts: &[(f64, &Jet)]) -> Jet {
        let mut out = Jet::new(0.0, [0.0; 3], [[0.0; 3]; 3]);
        let third = parts.iter().all(|(_, j)| j.d3.is_some());
        let mut d3 = [[[0.0; 3]; 3]; 3];
        for (w, j) in parts {
            out.value += w * j.value;
            for a in 0..3 {
                out.d1[a] += w * j.d1[a];
                for b in 0..3 {
                    out.d2[a][b] += w * j.d2[a][b];
                    if third {
                        for c in 0..3 {
                            d3[a][b][c] += w * j.d3.as_ref().unwrap()[a][b][c];
                        }
                    }
                }
            }
        }
        if third {
            out.d3 = Some(d3);
        }
        out.heat_constrained = parts.iter().all(|(_, j)| j.heat_constrained);
        out
    }
}
