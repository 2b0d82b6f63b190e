//! Machine checks of the exact algebra behind the CASE 2 constant-rank
//! argument in two space dimensions, on random constrained jets.
//!
//! Coordinates are aligned (`u_1 = 0`, `u_2 = |∇u|`), so the "good" index set
//! is `{1}` and the normal index is `2`. Each identity is polynomial (or
//! rational with a `u_t` denominator) in the jet entries and is checked
//! against the absolute tolerance `1e-12 · scale^degree`.

use num_dual::Dual64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curvature::jet::{Jet, D3, T};
use crate::error::{Error, Result};

pub const IDENTITY_RTOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct JetTags {
    /// `u_1 = 0`, `u_2 > 0`.
    pub aligned: bool,
    /// `u_t = Δu`, `u_it = Δu_i`, `u_tt = Δu_t`.
    pub heat: bool,
    /// Rank-one `ĥ` with `ĥ_11 ≠ 0`, the CASE 2 side relations imposed.
    pub case2: bool,
}

impl JetTags {
    pub const ALIGNED_HEAT: JetTags = JetTags {
        aligned: true,
        heat: true,
        case2: false,
    };
    pub const CASE2: JetTags = JetTags {
        aligned: true,
        heat: true,
        case2: true,
    };
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedJet {
    pub jet: Jet,
    pub tags: JetTags,
    pub seed: u64,
    /// The `ĥ` the jet was built from (CASE 2 jets only).
    pub hhat: Option<[[f64; 2]; 2]>,
}

fn sym3(v: &[(usize, usize, usize, f64)]) -> D3 {
    let mut d3 = [[[0.0; 3]; 3]; 3];
    for &(a, b, c, x) in v {
        for (i, j, k) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
            d3[i][j][k] = x;
        }
    }
    d3
}

/// Random order-3 jet satisfying `tags`. Free slots are uniform in
/// `[-1, 1]`; `u_t` and `u_2` are drawn from `[0.5, 1.5]`.
pub fn random_constrained_jet(seed: u64, tags: JetTags) -> Result<ConstrainedJet> {
    if tags.case2 && !(tags.aligned && tags.heat) {
        return Err(Error::invalid("case2 jets must also be aligned and heat-constrained"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut free = || rng.gen_range(-1.0..=1.0);
    let value = free();
    let (mut u1, mut u2) = (free(), free());
    let ut = 1.0 + 0.5 * free();
    if tags.aligned {
        u1 = 0.0;
        u2 = 1.0 + 0.5 * free();
    }
    let (u1t, u2t) = (free(), free());
    let mut u11 = free();
    let mut u12 = free();
    let mut u22 = free();
    let mut utt = free();
    let mut hhat = None;
    if tags.case2 {
        let h11 = -(1.0 + 0.5 * free());
        let h12 = free();
        let h22 = h12 * h12 / h11;
        u11 = h11 / (ut * ut);
        u12 = (h12 + u2 * ut * u1t) / (ut * ut);
        u22 = ut - h11 / (ut * ut);
        utt = (h22 - ut * ut * u22 + 2.0 * ut * u2 * u2t) / (u2 * u2);
        hhat = Some([[h11, h12], [h12, h22]]);
    } else if tags.heat {
        u22 = ut - u11;
    }
    let (u111, u112, u11t, u12t, u1tt, u2tt, uttt) = (free(), free(), free(), free(), free(), free(), free());
    let (mut u122, mut u222, mut u22t) = (free(), free(), free());
    if tags.heat {
        u122 = u1t - u111;
        u222 = u2t - u112;
        u22t = utt - u11t;
    }
    let d2 = [[u11, u12, u1t], [u12, u22, u2t], [u1t, u2t, utt]];
    let d3 = sym3(&[
        (0, 0, 0, u111),
        (0, 0, 1, u112),
        (0, 1, 1, u122),
        (1, 1, 1, u222),
        (0, 0, T, u11t),
        (0, 1, T, u12t),
        (1, 1, T, u22t),
        (0, T, T, u1tt),
        (1, T, T, u2tt),
        (T, T, T, uttt),
    ]);
    let mut jet = Jet::new(value, [u1, u2, ut], d2).with_third(d3);
    jet.heat_constrained = tags.heat;
    Ok(ConstrainedJet { jet, tags, seed, hhat })
}

/// Largest absolute jet entry (at least 1), the scale in tolerances.
pub fn jet_scale(jet: &Jet) -> f64 {
    let mut s = 1.0f64;
    for a in 0..3 {
        s = s.max(jet.d1[a].abs());
        for b in 0..3 {
            s = s.max(jet.d2[a][b].abs());
            if let Some(d3) = &jet.d3 {
                for c in 0..3 {
                    s = s.max(d3[a][b][c].abs());
                }
            }
        }
    }
    s
}

fn third(jet: &Jet) -> D3 {
    jet.d3.unwrap_or([[[0.0; 3]; 3]; 3])
}

/// `ĥ_αβ` and `∂_γ ĥ_αβ` (`γ ∈ {1, 2, t}`) by forward-mode differentiation of
/// the defining expression. Works in any frame.
pub fn hhat_derivatives_chain_rule(jet: &Jet) -> ([[f64; 2]; 2], [[[f64; 3]; 2]; 2]) {
    let d3 = third(jet);
    let mut h = [[0.0; 2]; 2];
    let mut dh = [[[0.0; 3]; 2]; 2];
    for g in 0..3 {
        let d1 = |a: usize| Dual64::new(jet.d1[a], jet.d2[a][g]);
        let d2 = |a: usize, b: usize| Dual64::new(jet.d2[a][b], d3[a][b][g]);
        for a in 0..2 {
            for b in 0..2 {
                let ut = d1(T);
                let v = ut * ut * d2(a, b) + d2(T, T) * d1(a) * d1(b) - ut * d1(b) * d2(a, T) - ut * d1(a) * d2(b, T);
                h[a][b] = v.re;
                dh[a][b][g] = v.eps;
            }
        }
    }
    (h, dh)
}

/// The expanded formulas for `ĥ_11,γ`, `ĥ_12,γ` and `ĥ_22,γ` in aligned
/// coordinates.
pub fn hhat_derivatives_expanded(jet: &Jet) -> [[[f64; 3]; 2]; 2] {
    let d3 = third(jet);
    let u = |a: usize| jet.d1[a];
    let uu = |a: usize, b: usize| jet.d2[a][b];
    let uuu = |a: usize, b: usize, c: usize| d3[a][b][c];
    let (ut, un, n) = (u(T), u(1), 1);
    let mut dh = [[[0.0; 3]; 2]; 2];
    for g in 0..3 {
        let i = 0;
        dh[0][0][g] = ut * ut * uuu(i, i, g) + 2.0 * ut * uu(T, g) * uu(i, i) - 2.0 * uu(i, g) * ut * uu(T, i);
        let h1n = ut * ut * uuu(i, n, g) + 2.0 * ut * uu(T, g) * uu(i, n) + uu(i, g) * un * uu(T, T)
            - uu(i, g) * ut * uu(T, n)
            - uu(n, g) * ut * uu(T, i)
            - un * uu(T, g) * uu(T, i)
            - un * ut * uuu(T, i, g);
        dh[0][1][g] = h1n;
        dh[1][0][g] = h1n;
        dh[1][1][g] = ut * ut * uuu(n, n, g)
            + 2.0 * ut * uu(T, g) * uu(n, n)
            + un * un * uuu(T, T, g)
            + 2.0 * un * uu(n, g) * uu(T, T)
            - 2.0 * uu(n, g) * ut * uu(T, n)
            - 2.0 * un * uu(T, g) * uu(T, n)
            - 2.0 * un * ut * uuu(T, n, g);
    }
    dh
}

/// One checked identity.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct IdentityResidual {
    pub identity: String,
    pub residual: f64,
    pub degree: u32,
    /// Exact identities are asserted; remainder statements are only reported.
    pub asserted: bool,
    pub tolerance: f64,
}

impl IdentityResidual {
    fn new(identity: &str, residual: f64, degree: u32, asserted: bool, scale: f64) -> Self {
        IdentityResidual {
            identity: identity.to_string(),
            residual,
            degree,
            asserted,
            tolerance: IDENTITY_RTOL * scale.powi(degree as i32),
        }
    }

    pub fn pass(&self) -> bool {
        !self.asserted || self.residual < self.tolerance
    }
}

fn require_aligned(cj: &ConstrainedJet) -> Result<()> {
    if !cj.tags.aligned || cj.jet.d1[0] != 0.0 {
        return Err(Error::invalid("identity needs an aligned jet (u_1 = 0)"));
    }
    if cj.jet.d3.is_none() {
        return Err(Error::invalid("identity needs an order-3 jet"));
    }
    Ok(())
}

/// Largest difference between the chain-rule and expanded `ĥ_αβ,γ`.
pub fn verify_hhat_derivative_formula(cj: &ConstrainedJet) -> Result<IdentityResidual> {
    require_aligned(cj)?;
    let (_, a) = hhat_derivatives_chain_rule(&cj.jet);
    let b = hhat_derivatives_expanded(&cj.jet);
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            for g in 0..3 {
                worst = worst.max((a[i][j][g] - b[i][j][g]).abs());
            }
        }
    }
    Ok(IdentityResidual::new(
        "hhat_derivative_expansion",
        worst,
        3,
        true,
        jet_scale(&cj.jet),
    ))
}

/// The exact CASE 2 side relations (and the `u_tt` remainder relation,
/// reported only), evaluated against the `ĥ` the jet was built from and
/// against `ĥ` recomputed from the jet.
pub fn verify_case2_relations(cj: &ConstrainedJet) -> Result<Vec<IdentityResidual>> {
    require_aligned(cj)?;
    let built = cj
        .hhat
        .ok_or_else(|| Error::invalid("case2 relations need a jet built with the case2 tag"))?;
    let jet = &cj.jet;
    let scale = jet_scale(jet).max(built.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())));
    let (recomputed, _) = hhat_derivatives_chain_rule(jet);
    let (ut, u2) = (jet.d1[T], jet.d1[1]);
    let (u11, u12, u22) = (jet.d2[0][0], jet.d2[0][1], jet.d2[1][1]);
    let (u1t, u2t, utt) = (jet.d2[0][T], jet.d2[1][T], jet.d2[T][T]);
    let [[h11, h12], [_, h22]] = built;
    let hhat_gap = (0..2)
        .flat_map(|a| (0..2).map(move |b| (a, b)))
        .map(|(a, b)| (built[a][b] - recomputed[a][b]).abs())
        .fold(0.0, f64::max);
    let rank_one = (h11 * h22 - h12 * h12).abs();
    Ok(vec![
        IdentityResidual::new("hhat_recomputed", hhat_gap, 3, true, scale),
        IdentityResidual::new("hhat_rank_one", rank_one, 6, true, scale),
        IdentityResidual::new("ut2_u11=h11", (ut * ut * u11 - h11).abs(), 3, true, scale),
        IdentityResidual::new(
            "ut2_u12=h12+u2_ut_u1t",
            (ut * ut * u12 - h12 - u2 * ut * u1t).abs(),
            3,
            true,
            scale,
        ),
        IdentityResidual::new(
            "ut2_u22=ut3-h11",
            (ut * ut * u22 - ut * ut * ut + h11).abs(),
            3,
            true,
            scale,
        ),
        IdentityResidual::new(
            "u2^2_utt~h12^2/h11+h11-ut3+2u2_ut_u2t",
            (u2 * u2 * utt - (h12 * h12 / h11 + h11 - ut * ut * ut + 2.0 * u2 * ut * u2t)).abs(),
            3,
            false,
            scale,
        ),
    ])
}

/// The nine third-derivative relations of the rank-one CASE 2 table. The two
/// `u_tt`-gradient rows are reported, not asserted.
pub fn verify_third_derivative_table(cj: &ConstrainedJet) -> Result<Vec<IdentityResidual>> {
    require_aligned(cj)?;
    let jet = &cj.jet;
    let scale = jet_scale(jet);
    let (h, dh) = hhat_derivatives_chain_rule(jet);
    let d3 = third(jet);
    let (ut, u2) = (jet.d1[T], jet.d1[1]);
    let (u12, u22) = (jet.d2[0][1], jet.d2[1][1]);
    let (u11, u1t, u2t, utt) = (jet.d2[0][0], jet.d2[0][T], jet.d2[1][T], jet.d2[T][T]);
    let (h11, h12) = (h[0][0], h[0][1]);
    let hd = |a: usize, b: usize, g: usize| dh[a][b][g];
    let (x1, x2) = (0, 1);
    let u3 = |a: usize, b: usize, c: usize| d3[a][b][c];
    let rows: [(&str, f64, f64, bool); 9] = [
        ("ut2_u111", ut * ut * u3(x1, x1, x1), hd(0, 0, x1), true),
        (
            "ut2_u221",
            ut * ut * u3(x2, x2, x1),
            -hd(0, 0, x1) + ut * ut * u1t,
            true,
        ),
        (
            "ut2_u112",
            ut * ut * u3(x1, x1, x2),
            hd(0, 0, x2) - 2.0 * u2t / ut * h11 + 2.0 * u1t / ut * h12 + 2.0 * u2 * u1t * u1t,
            true,
        ),
        (
            "ut2_u222",
            ut * ut * u3(x2, x2, x2),
            -hd(0, 0, x2) + ut * ut * u2t + 2.0 * u2t / ut * h11 - 2.0 * u1t / ut * h12 - 2.0 * u2 * u1t * u1t,
            true,
        ),
        (
            "u2_ut_u11t",
            u2 * ut * u3(x1, x1, T),
            hd(0, 0, x2) - hd(0, 1, x1) - 3.0 * u2t / ut * h11
                + 3.0 * u1t / ut * h12
                + 2.0 * u2 * u1t * u1t
                + u2 * u11 * utt,
            true,
        ),
        (
            "u2_ut_u22t",
            u2 * ut * u3(x2, x2, T),
            hd(0, 1, x1) - hd(0, 0, x2) + u2 * u22 * utt + 3.0 * u2t / ut * h11
                - 3.0 * u1t / ut * h12
                - 2.0 * u2 * u1t * u1t,
            true,
        ),
        (
            "u2_ut_u12t",
            u2 * ut * u3(x1, x2, T),
            -hd(0, 0, x1) - hd(0, 1, x2) + u1t / ut * h11 + u2t / ut * h12 + u2 * u12 * utt,
            true,
        ),
        (
            "u2^2_utt1",
            u2 * u2 * u3(T, T, x1),
            hd(1, 1, x1) - hd(0, 0, x1) - 2.0 * hd(0, 1, x2) + 2.0 * u1t / ut * h11 + 2.0 * u2t / ut * h12
                - 2.0 * u1t / ut * ut * ut * u22
                - ut * ut * u1t
                + 2.0 * ut * u12 * u2t
                + 2.0 * u2 * u1t * u2t,
            false,
        ),
        (
            "u2^2_utt2",
            u2 * u2 * u3(T, T, x2),
            hd(1, 1, x2) - hd(0, 0, x2) + 2.0 * hd(0, 1, x1) + 4.0 * u2t / ut * h11
                - 4.0 * u1t / ut * h12
                - ut * ut * u2t
                - 2.0 * u2 * u1t * u1t
                + 2.0 * u2 * u2t * u2t,
            false,
        ),
    ];
    Ok(rows
        .iter()
        .map(|&(name, lhs, rhs, asserted)| IdentityResidual::new(name, (lhs - rhs).abs(), 3, asserted, scale))
        .collect())
}

/// Worst residual per identity over a seed sweep.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct IdentitySummary {
    pub identity: String,
    pub max_residual: f64,
    /// Largest `residual / tolerance` over the sweep.
    pub max_scaled_residual: f64,
    pub degree: u32,
    pub asserted: bool,
    pub failures: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct IdentityReport {
    pub first_seed: u64,
    pub seeds: u64,
    pub pass: bool,
    pub identities: Vec<IdentitySummary>,
}

/// All checks on CASE 2 jets for seeds `first..first + seeds`.
pub fn verify_identities(first: u64, seeds: u64) -> Result<IdentityReport> {
    use rayon::prelude::*;
    let per_seed = (first..first.saturating_add(seeds))
        .into_par_iter()
        .map(|seed| -> Result<Vec<IdentityResidual>> {
            let cj = random_constrained_jet(seed, JetTags::CASE2)?;
            let mut rows = vec![verify_hhat_derivative_formula(&cj)?];
            rows.extend(verify_case2_relations(&cj)?);
            rows.extend(verify_third_derivative_table(&cj)?);
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut identities: Vec<IdentitySummary> = Vec::new();
    for rows in &per_seed {
        for r in rows {
            let entry = match identities.iter_mut().find(|s| s.identity == r.identity) {
                Some(e) => e,
                None => {
                    identities.push(IdentitySummary {
                        identity: r.identity.clone(),
                        max_residual: 0.0,
                        max_scaled_residual: 0.0,
                        degree: r.degree,
                        asserted: r.asserted,
                        failures: 0,
                    });
                    identities.last_mut().unwrap()
                }
            };
            entry.max_residual = entry.max_residual.max(r.residual);
            entry.max_scaled_residual = entry.max_scaled_residual.max(r.residual / r.tolerance);
            if !r.pass() {
                entry.failures += 1;
            }
        }
    }
    let pass = identities.iter().all(|s| s.failures == 0);
    Ok(IdentityReport {
        first_seed: first,
        seeds,
        pass,
        identities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case2_jet_satisfies_its_constraints() {
        let cj = random_constrained_jet(3, JetTags::CASE2).unwrap();
        assert_eq!(cj.jet.d1[0], 0.0);
        assert!(cj.jet.heat_defect() < 1e-13);
        assert!(cj.jet.symmetry_defect() == 0.0);
        let report = verify_identities(0, 20).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn inconsistent_tags_are_rejected() {
        let tags = JetTags {
            aligned: false,
            heat: true,
            case2: true,
        };
        assert!(random_constrained_jet(0, tags).is_err());
    }
}
