//! Orthogonal matrix polynomials of the four perturbed families, their
//! second-kind companions, Schur complements and the Σ columns that tie
//! them to the block Hankel data.

use crate::blockkit::BlockVector;
use crate::error::{Error, Result};
use crate::mat::{cr, eye, hermitize, solve, CMat};
use crate::moments::{hankel, transform_moments, u_vectors, MomentSequence};
use crate::poly::MatrixPolynomial;

/// Schur complement of the bottom-right block: s_{2j} − Y* H⁻¹ Y, hermitized.
pub fn schur_complement(h_prev: &CMat, y: &BlockVector, s2j: &CMat) -> Result<CMat> {
    let ys = y.stacked();
    let hy = solve(h_prev, &ys)?;
    Ok(hermitize(&(s2j - ys.adjoint() * hy)))
}

/// Σ column (−H⁻¹Y; I): the last block column of the inverse-factorized
/// Hankel matrix up to right normalization.
pub fn sigma_column(h_prev: &CMat, y: &BlockVector) -> Result<BlockVector> {
    let q = y.q;
    let hy = solve(h_prev, &y.stacked())?;
    let mut blocks: Vec<CMat> = BlockVector::from_stacked(q, -hy).blocks;
    blocks.push(eye(q));
    Ok(BlockVector::new(q, blocks))
}

/// Coefficients of z ↦ w* R_j(z) u for block columns w, u of equal length:
/// the z^p coefficient is Σ_{k≥p} w_k* u_{k−p}.
pub fn bilinear_resolvent(w: &BlockVector, u: &BlockVector) -> MatrixPolynomial {
    assert_eq!(w.len(), u.len());
    let q = w.q;
    let j = w.len() - 1;
    let coeffs = (0..=j)
        .map(|p| {
            let mut acc = CMat::zeros(q, q);
            for k in p..=j {
                acc += w.block(k).adjoint() * u.block(k - p);
            }
            acc
        })
        .collect();
    MatrixPolynomial::new(q, coeffs)
}

/// Coefficients of z ↦ w* R_j*(z̄) u; here the left column lags:
/// the z^p coefficient is Σ_{k≥p} w_{k−p}* u_k.
pub fn bilinear_resolvent_adjoint(w: &BlockVector, u: &BlockVector) -> MatrixPolynomial {
    bilinear_resolvent(u, w).sharp()
}

/// Largest polynomial index j buildable for family r from a sequence of
/// order m (the Σ column needs the transformed moments up to 2j−1).
pub fn max_family_order(m: usize, r: u8) -> usize {
    match r {
        1 => m.div_ceil(2),
        2 => {
            if m < 2 {
                0
            } else {
                (m - 1) / 2
            }
        }
        3 | 4 => m / 2,
        _ => panic!("family index must be 1..=4"),
    }
}

/// One family r: first-kind monic polynomials, second-kind companions,
/// Σ columns and Schur complements, indexed 0..=n_max.
#[derive(Debug, Clone)]
pub struct OmpFamily {
    pub r: u8,
    pub q: usize,
    pub n_max: usize,
    pub sigmas: Vec<BlockVector>,
    pub first_kind: Vec<MatrixPolynomial>,
    pub second_kind: Vec<MatrixPolynomial>,
    /// Ĥ_{r,j} for j up to the largest order the moments support
    /// (may stop one short of n_max).
    pub schur: Vec<CMat>,
}

impl OmpFamily {
    pub fn p(&self, j: usize) -> &MatrixPolynomial {
        &self.first_kind[j]
    }

    pub fn q_poly(&self, j: usize) -> &MatrixPolynomial {
        &self.second_kind[j]
    }

    pub fn hhat(&self, j: usize) -> Option<&CMat> {
        self.schur.get(j)
    }
}

/// Y_{r,j} = (s_j; …; s_{2j−1}) of an already transformed sequence.
fn y_column(seq_r: &MomentSequence, j: usize) -> Result<BlockVector> {
    seq_r.require_order("Y column", 2 * j - 1)?;
    Ok(BlockVector::new(
        seq_r.q,
        (j..2 * j).map(|i| seq_r.moment(i).clone()).collect(),
    ))
}

/// Build family r from the original sequence up to index n_max.
pub fn build_family(seq: &MomentSequence, r: u8, n_max: usize) -> Result<OmpFamily> {
    let q = seq.q;
    if n_max > max_family_order(seq.order(), r) {
        return Err(Error::InsufficientMoments {
            what: "polynomial family",
            needed: 2 * n_max - 1,
            have: seq.order(),
        });
    }
    // the index-0 members of family 2 need no transformed moments at all
    let seq_r = match transform_moments(seq, r) {
        Ok(s) => Some(s),
        Err(_) if r == 2 && n_max == 0 => None,
        Err(e) => return Err(e),
    };

    let mut sigmas = vec![BlockVector::new(q, vec![eye(q)])];
    let mut first_kind = vec![MatrixPolynomial::identity(q)];
    let mut second_kind = vec![second_kind_at(seq, r, 0, &sigmas[0])?];
    let mut schur = match &seq_r {
        Some(s) => vec![s.moment(0).clone()],
        None => vec![],
    };

    for j in 1..=n_max {
        let seq_r = seq_r.as_ref().expect("n_max >= 1 guarantees the transform");
        let h_prev = hankel(seq_r, r, j - 1)?.h;
        let y = y_column(seq_r, j)?;
        let sigma = sigma_column(&h_prev, &y)?;
        let p = MatrixPolynomial::new(q, sigma.blocks.iter().map(|b| b.adjoint()).collect());
        let qp = second_kind_at(seq, r, j, &sigma)?;
        if seq_r.order() >= 2 * j {
            schur.push(schur_complement(&h_prev, &y, seq_r.moment(2 * j))?);
        }
        sigmas.push(sigma);
        first_kind.push(p);
        second_kind.push(qp);
    }

    Ok(OmpFamily {
        r,
        q,
        n_max,
        sigmas,
        first_kind,
        second_kind,
        schur,
    })
}

/// Second-kind polynomial of family r at index j given its Σ column.
///
/// Family 2 is the only one whose defining vector depends on z; that
/// dependence lives entirely in the affine vector û + z·v·s₀ while the
/// Σ column stays constant, so the result is an honest degree-(j+1)
/// polynomial assembled from the z-free part plus a shifted first-kind
/// tail.
fn second_kind_at(
    seq: &MomentSequence,
    r: u8,
    j: usize,
    sigma: &BlockVector,
) -> Result<MatrixPolynomial> {
    let q = seq.q;
    let uv = u_vectors(seq, j)?;
    Ok(match r {
        1 => bilinear_resolvent(sigma, &uv.u1).neg(),
        2 => {
            let hat = uv.u2_hat.clone().ok_or(Error::InsufficientMoments {
                what: "second-kind family 2",
                needed: j + 1,
                have: seq.order(),
            })?;
            let s0 = seq.moment(0).clone();
            let fixed = bilinear_resolvent(sigma, &hat).neg();
            // −z Σ* R(z) v s0 = −z P_{2,j}(z) s0
            let p2 = MatrixPolynomial::new(q, sigma.blocks.iter().map(|b| b.adjoint()).collect());
            fixed.add(&p2.mul_const_right(&s0).shift_up(1).neg())
        }
        3 => bilinear_resolvent(sigma, &uv.u3),
        4 => bilinear_resolvent(sigma, &uv.u4),
        _ => return Err(Error::InvalidArgument("family index out of range".into())),
    })
}

/// Second-kind polynomial attached to the shifted Hankel matrix together
/// with that matrix's Schur complement.  Needs the shifted Hankel block of
/// order n−1 to be invertible.
pub struct TildeSecondKind {
    pub q_poly: MatrixPolynomial,
    pub schur_tilde: CMat,
}

pub fn tilde_second_kind(seq: &MomentSequence, n: usize) -> Result<TildeSecondKind> {
    seq.require_order("shifted-Hankel second kind", 2 * n + 1)?;
    let q = seq.q;
    let u_n = seq.u_vec(n)?;
    let (sigma_tilde, schur_tilde) = if n == 0 {
        (BlockVector::new(q, vec![eye(q)]), seq.moment(1).clone())
    } else {
        let prev = hankel(seq, 1, n - 1)?;
        let ht_prev = prev
            .htilde
            .expect("order 2n+1 >= 2(n-1)+1 provides the shifted block");
        if !crate::mat::robustly_invertible(&ht_prev, crate::mat::fro_norm(&prev.h)) {
            return Err(Error::AssumptionViolated(format!(
                "shifted Hankel block of order {} is singular or too ill-conditioned",
                n - 1
            )));
        }
        let ytilde = BlockVector::new(q, (n + 1..=2 * n).map(|i| seq.moment(i).clone()).collect());
        let mut blocks = BlockVector::from_stacked(q, -solve(&ht_prev, &ytilde.stacked())?).blocks;
        blocks.push(eye(q));
        let sigma_tilde = BlockVector::new(q, blocks);
        let schur_tilde = schur_complement(&ht_prev, &ytilde, seq.moment(2 * n + 1))?;
        (sigma_tilde, schur_tilde)
    };
    Ok(TildeSecondKind {
        q_poly: bilinear_resolvent(&sigma_tilde, &u_n).neg(),
        schur_tilde,
    })
}

/// ⟨P, Q⟩ under the r-th perturbed measure by exact atom summation:
/// Σ_k P(t_k) W_k^{(r)} Q(t_k)*.
pub fn inner_product_atoms(
    mu: &crate::moments::DiscreteMatrixMeasure,
    r: u8,
    p: &MatrixPolynomial,
    qp: &MatrixPolynomial,
) -> CMat {
    let qdim = p.q;
    let mut acc = CMat::zeros(qdim, qdim);
    for (t, w) in &mu.atoms {
        let wr = mu.perturbed_weight(r, *t, w);
        acc += p.eval(cr(*t)) * wr * qp.eval(cr(*t)).adjoint();
    }
    acc
}

/// ⟨P, Q⟩ by contraction of the coefficient rows against the Hankel matrix
/// of the transformed moments.
pub fn inner_product_hankel(
    seq_r: &MomentSequence,
    p: &MatrixPolynomial,
    qp: &MatrixPolynomial,
) -> Result<CMat> {
    let n = p.degree().max(qp.degree());
    seq_r.require_order("inner product contraction", 2 * n)?;
    let h = hankel(seq_r, 1, n)?.h;
    let q = p.q;
    let mut arow = CMat::zeros(q, (n + 1) * q);
    let mut bcol = CMat::zeros((n + 1) * q, q);
    for k in 0..=n {
        arow.view_mut((0, k * q), (q, q)).copy_from(&p.coeff(k));
        bcol.view_mut((k * q, 0), (q, q))
            .copy_from(&qp.coeff(k).adjoint());
    }
    Ok(arow * h * bcol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::{c, cond_one, max_abs, rel_residual};
    use crate::moments::fixtures::two_atom_moments;
    use crate::moments::{
        moments_from_measure, random_hausdorff_sequence, DiscreteMatrixMeasure, Interval,
    };

    /// Monic OMP by Gram–Schmidt on monomials, inner products by atom sums.
    fn gram_schmidt_omp(mu: &DiscreteMatrixMeasure, r: u8, n: usize) -> Vec<MatrixPolynomial> {
        let q = mu.q;
        let mut out: Vec<MatrixPolynomial> = vec![MatrixPolynomial::identity(q)];
        for ell in 1..=n {
            let mut coeffs = vec![CMat::zeros(q, q); ell + 1];
            coeffs[ell] = eye(q);
            let mut p = MatrixPolynomial::new(q, coeffs);
            for prev in &out {
                let num = inner_product_atoms(mu, r, &p, prev);
                let den = inner_product_atoms(mu, r, prev, prev);
                let corr = &num * crate::mat::inverse(&den).unwrap();
                p = p.sub(&prev.mul_const_left(&corr));
            }
            out.push(p);
        }
        out
    }

    /// ∫ (P(t) − P(z)) / (t − z) dσ_r by atom summation, coefficient-wise in z.
    fn second_kind_oracle(
        mu: &DiscreteMatrixMeasure,
        r: u8,
        p: &MatrixPolynomial,
        z: crate::mat::C64,
    ) -> CMat {
        let q = p.q;
        let mut acc = CMat::zeros(q, q);
        for (t, w) in &mu.atoms {
            let wr = mu.perturbed_weight(r, *t, w);
            let diff = p.eval(cr(*t)) - p.eval(z);
            acc += diff * (cr(*t) - z).inv() * wr;
        }
        acc
    }

    #[test]
    fn bilinear_forms_match_dense_products() {
        // oracle: evaluate w* R_j(z) u and w* R_j*(z̄) u as explicit dense
        // block products and compare with the assembled coefficients
        use crate::blockkit::{shift_resolvent, BlockVector};
        let q = 2usize;
        let j = 3usize;
        let mk = |seed: u64| {
            let mut state = seed;
            let mut next = move || {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 33) as f64) / (u32::MAX as f64) - 0.5
            };
            BlockVector::new(
                q,
                (0..=j)
                    .map(|_| CMat::from_fn(q, q, |_, _| c(next(), next())))
                    .collect(),
            )
        };
        let w = mk(5);
        let u = mk(17);
        let plain = bilinear_resolvent(&w, &u);
        let adjoint = bilinear_resolvent_adjoint(&w, &u);
        for z in [c(0.4, 0.0), c(-1.3, 0.8), c(0.2, -1.7)] {
            let r = shift_resolvent(j, q, z).data;
            let oracle_plain = w.stacked().adjoint() * &r * u.stacked();
            assert!(rel_residual(&plain.eval(z), &oracle_plain) < 1e-13);
            let rstar = shift_resolvent(j, q, z.conj()).data.adjoint();
            let oracle_adj = w.stacked().adjoint() * &rstar * u.stacked();
            assert!(rel_residual(&adjoint.eval(z), &oracle_adj) < 1e-13);
        }
    }

    #[test]
    fn schur_complement_fixture() {
        let seq = two_atom_moments(2);
        let b = hankel(&seq, 1, 1).unwrap();
        let h_prev = hankel(&seq, 1, 0).unwrap().h;
        let hh = schur_complement(&h_prev, b.y.as_ref().unwrap(), seq.moment(2)).unwrap();
        assert!((hh[(0, 0)].re - 0.125).abs() < 1e-14);
    }

    #[test]
    fn schur_complement_rank_one_measure_vanishes() {
        let interval = Interval::new(0.0, 1.0).unwrap();
        let mu = DiscreteMatrixMeasure::new(interval, 1, vec![(0.5, eye(1))]).unwrap();
        let seq = moments_from_measure(&mu, 2).unwrap();
        let b = hankel(&seq, 1, 1).unwrap();
        let h_prev = hankel(&seq, 1, 0).unwrap().h;
        let hh = schur_complement(&h_prev, b.y.as_ref().unwrap(), seq.moment(2)).unwrap();
        assert!(max_abs(&hh) < 1e-14);
    }

    #[test]
    fn schur_equals_bordered_row_times_sigma() {
        let interval = Interval::new(-1.0, 2.0).unwrap();
        let (_, seq) = random_hausdorff_sequence(2, 6, interval, 5).unwrap();
        for r in 1..=4u8 {
            let seq_r = transform_moments(&seq, r).unwrap();
            let jmax = seq_r.order() / 2;
            for j in 1..=jmax {
                let h_prev = hankel(&seq_r, r, j - 1).unwrap().h;
                let y = y_column(&seq_r, j).unwrap();
                let sigma = sigma_column(&h_prev, &y).unwrap();
                let hh = schur_complement(&h_prev, &y, seq_r.moment(2 * j)).unwrap();
                // (Y*, s_{2j}) Σ
                let mut row = CMat::zeros(2, 2 * (j + 1));
                for k in 0..j {
                    row.view_mut((0, 2 * k), (2, 2))
                        .copy_from(&y.block(k).adjoint());
                }
                row.view_mut((0, 2 * j), (2, 2))
                    .copy_from(seq_r.moment(2 * j));
                let prod = row * sigma.stacked();
                assert!(rel_residual(&prod, &hh) < 1e-11, "r={r} j={j}");
            }
        }
    }

    #[test]
    fn sigma_fixture_and_last_column_property() {
        let seq = two_atom_moments(2);
        let b = hankel(&seq, 1, 1).unwrap();
        let h_prev = hankel(&seq, 1, 0).unwrap().h;
        let sigma = sigma_column(&h_prev, b.y.as_ref().unwrap()).unwrap();
        assert!((sigma.block(0)[(0, 0)].re + 0.5).abs() < 1e-14);
        assert_eq!(sigma.block(1), &eye(1));
        // H Σ = (0; Ĥ) and the two annihilation identities
        let hs = &b.h * sigma.stacked();
        assert!(hs[(0, 0)].norm() < 1e-14);
        let t = crate::blockkit::shift(1, 1);
        assert!(max_abs(&(&t.data * &hs)) < 1e-14);
    }

    #[test]
    fn first_kind_single_atom_and_fixture() {
        let interval = Interval::new(0.0, 1.0).unwrap();
        let w = CMat::from_element(1, 1, cr(1.5));
        let mu = DiscreteMatrixMeasure::new(interval, 1, vec![(0.3, w)]).unwrap();
        let seq = moments_from_measure(&mu, 2).unwrap();
        let fam = build_family(&seq, 1, 1).unwrap();
        // P_{1,1}(z) = z − 0.3
        assert!(rel_residual(&fam.p(1).coeff(0), &CMat::from_element(1, 1, cr(-0.3))) < 1e-13);
        assert!(fam.p(1).is_monic(1e-12));

        let seq_f = two_atom_moments(2);
        let fam_f = build_family(&seq_f, 1, 1).unwrap();
        assert!((fam_f.p(1).coeff(0)[(0, 0)].re + 0.5).abs() < 1e-14);
        assert_eq!(fam_f.p(0).coeff(0), eye(1));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn first_kind_matches_gram_schmidt_oracle() {
        let interval = Interval::new(-0.5, 1.5).unwrap();
        let (mu, seq) = random_hausdorff_sequence(2, 6, interval, 17).unwrap();
        for r in 1..=4u8 {
            let n = max_family_order(seq.order(), r).min(2);
            let fam = build_family(&seq, r, n).unwrap();
            let oracle = gram_schmidt_omp(&mu, r, n);
            for j in 0..=n {
                for k in 0..=j {
                    assert!(
                        rel_residual(&fam.p(j).coeff(k), &oracle[j].coeff(k)) < 1e-9,
                        "r={r} j={j} coeff {k}"
                    );
                }
            }
        }
    }

    #[test]
    fn second_kind_examples() {
        // single atom: Q_{1,1} is the constant total mass
        let interval = Interval::new(0.0, 1.0).unwrap();
        let w = CMat::from_element(1, 1, cr(1.5));
        let mu = DiscreteMatrixMeasure::new(interval, 1, vec![(0.3, w.clone())]).unwrap();
        let seq = moments_from_measure(&mu, 2).unwrap();
        let fam = build_family(&seq, 1, 1).unwrap();
        assert_eq!(fam.q_poly(1).degree(), 0);
        assert!(rel_residual(&fam.q_poly(1).coeff(0), &w) < 1e-13);

        // fixture on [0,1]: Q_{2,0}(z) = 1 − 2z
        let seq_f = two_atom_moments(2);
        let fam2 = build_family(&seq_f, 2, 0).unwrap();
        assert!((fam2.q_poly(0).coeff(0)[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((fam2.q_poly(0).coeff(1)[(0, 0)].re + 2.0).abs() < 1e-14);

        // Q_{3,0} = s_0 and Q_{4,0} = −s_0
        let fam3 = build_family(&seq_f, 3, 0).unwrap();
        let fam4 = build_family(&seq_f, 4, 0).unwrap();
        assert_eq!(fam3.q_poly(0).coeff(0), *seq_f.moment(0));
        assert_eq!(fam4.q_poly(0).coeff(0), -seq_f.moment(0));
    }

    #[test]
    fn second_kind_matches_integral_oracle() {
        let interval = Interval::new(-0.25, 1.25).unwrap();
        let (mu, seq) = random_hausdorff_sequence(2, 7, interval, 23).unwrap();
        let s0 = seq.moment(0).clone();
        let zs = [c(0.3, 0.7), c(-1.0, -0.4), c(2.2, 0.1)];
        let (a, b) = (interval.a, interval.b);
        for r in 1..=4u8 {
            let n = max_family_order(seq.order(), r).min(3);
            let fam = build_family(&seq, r, n).unwrap();
            for j in 1..=n {
                for &z in &zs {
                    let qhat = second_kind_oracle(&mu, r, fam.p(j), z);
                    let expected = match r {
                        1 => qhat,
                        2 => {
                            // Q_2 = Qhat_2 − P_2(z)(u_{2,0} + z s_0)
                            let u20 = seq.moment(1) - &s0 * cr(a + b);
                            &qhat - fam.p(j).eval(z) * (u20 + &s0 * z)
                        }
                        3 => fam.p(j).eval(z) * &s0 - qhat,
                        4 => -(fam.p(j).eval(z) * &s0) - qhat,
                        _ => unreachable!(),
                    };
                    assert!(
                        rel_residual(&fam.q_poly(j).eval(z), &expected) < 1e-9,
                        "r={r} j={j} z={z}"
                    );
                }
            }
        }
    }

    #[test]
    fn degree_profile_is_exact() {
        let interval = Interval::new(-0.5, 2.0).unwrap();
        let (_, seq) = random_hausdorff_sequence(2, 7, interval, 31).unwrap();
        for r in 1..=4u8 {
            let n = max_family_order(seq.order(), r);
            let fam = build_family(&seq, r, n).unwrap();
            for j in 0..=n {
                assert_eq!(fam.p(j).degree(), j, "first kind r={r}");
                assert!(fam.p(j).is_monic(1e-12));
                let expect_deg = match r {
                    1 => j.saturating_sub(1),
                    2 => j + 1,
                    _ => j,
                };
                assert_eq!(
                    fam.q_poly(j).degree(),
                    expect_deg,
                    "second kind r={r} j={j}"
                );
            }
        }
    }

    #[test]
    fn orthogonality_by_atom_summation() {
        let interval = Interval::new(0.25, 1.75).unwrap();
        let (mu, seq) = random_hausdorff_sequence(2, 6, interval, 41).unwrap();
        for r in 1..=4u8 {
            let n = max_family_order(seq.order(), r).min(2);
            let fam = build_family(&seq, r, n).unwrap();
            for j in 0..=n {
                for l in 0..=n {
                    let ip = inner_product_atoms(&mu, r, fam.p(j), fam.p(l));
                    if j != l {
                        let scale = max_abs(fam.hhat(j.max(l)).unwrap());
                        assert!(max_abs(&ip) <= 1e-10 * (1.0 + scale), "r={r} j={j} l={l}");
                    } else if let Some(hh) = fam.hhat(j) {
                        assert!(rel_residual(&ip, hh) < 1e-10, "diagonal r={r} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn inner_product_contraction_matches_atoms() {
        let interval = Interval::new(0.0, 1.0).unwrap();
        let (mu, seq) = random_hausdorff_sequence(2, 6, interval, 53).unwrap();
        let fam = build_family(&seq, 1, 2).unwrap();
        let lhs = inner_product_atoms(&mu, 1, fam.p(2), fam.p(1));
        let rhs = inner_product_hankel(&seq, fam.p(2), fam.p(1)).unwrap();
        assert!(max_abs(&(lhs - rhs)) < 1e-10);
    }

    #[test]
    fn tilde_second_kind_layout_and_schur_link() {
        // scalar layout at z = 0 for n = 1: s_1 − s_2 (s_1)⁻¹ s_0
        let seq = two_atom_moments(3);
        let t = tilde_second_kind(&seq, 1).unwrap();
        let s = |j: usize| seq.moment(j)[(0, 0)].re;
        let expected = s(1) - s(2) / s(1) * s(0);
        assert!((t.q_poly.eval(cr(0.0))[(0, 0)].re - expected).abs() < 1e-13);

        // Schur complement of the shifted Hankel equals −Q̃(0) P_{1,n+1}*(0)
        let fam1 = build_family(&seq, 1, 2).unwrap();
        let lhs = t.schur_tilde.clone();
        let rhs = -(t.q_poly.eval(cr(0.0)) * fam1.p(2).eval(cr(0.0)).adjoint());
        assert!(rel_residual(&lhs, &rhs) < 1e-11);

        // q = 2 random instance
        let interval = Interval::new(0.1, 1.4).unwrap();
        let (_, seq2) = random_hausdorff_sequence(2, 5, interval, 71).unwrap();
        let t2 = tilde_second_kind(&seq2, 2).unwrap();
        let famb = build_family(&seq2, 1, 3).unwrap();
        let rhs2 = -(t2.q_poly.eval(cr(0.0)) * famb.p(3).eval(cr(0.0)).adjoint());
        assert!(rel_residual(&t2.schur_tilde, &rhs2) < 1e-10);
    }

    #[test]
    fn schur_polynomial_links_at_left_endpoint() {
        let interval = Interval::new(-0.3, 1.2).unwrap();
        let (_, seq) = random_hausdorff_sequence(2, 7, interval, 83).unwrap();
        let a = cr(interval.a);
        let f1 = build_family(&seq, 1, max_family_order(7, 1)).unwrap();
        let f2 = build_family(&seq, 2, max_family_order(7, 2)).unwrap();
        let f3 = build_family(&seq, 3, max_family_order(7, 3)).unwrap();
        let f4 = build_family(&seq, 4, max_family_order(7, 4)).unwrap();
        for j in 1..=2usize {
            // Ĥ_{1,j} = −P_{1,j}(a) Q_{4,j}*(a)
            let lhs1 = f1.hhat(j).unwrap().clone();
            let rhs1 = -(f1.p(j).eval(a) * f4.q_poly(j).eval(a).adjoint());
            assert!(rel_residual(&lhs1, &rhs1) < 1e-10, "j={j}");
            // Ĥ_{2,j−1} = −Q_{2,j−1}(a) P_{3,j}*(a)
            let lhs2 = f2.hhat(j - 1).unwrap().clone();
            let rhs2 = -(f2.q_poly(j - 1).eval(a) * f3.p(j).eval(a).adjoint());
            assert!(rel_residual(&lhs2, &rhs2) < 1e-10, "j={j}");
            // Ĥ_{3,j} = P_{3,j}(a) Q_{2,j}*(a)
            let lhs3 = f3.hhat(j).unwrap().clone();
            let rhs3 = f3.p(j).eval(a) * f2.q_poly(j).eval(a).adjoint();
            assert!(rel_residual(&lhs3, &rhs3) < 1e-10, "j={j}");
            // Ĥ_{4,j} = Q_{4,j}(a) P_{1,j+1}*(a)
            let lhs4 = f4.hhat(j).unwrap().clone();
            let rhs4 = f4.q_poly(j).eval(a) * f1.p(j + 1).eval(a).adjoint();
            assert!(rel_residual(&lhs4, &rhs4) < 1e-10, "j={j}");
        }
    }

    #[test]
    fn endpoint_values_invertible_on_pd_instances() {
        let interval = Interval::new(0.2, 1.3).unwrap();
        let (_, seq) = random_hausdorff_sequence(2, 6, interval, 97).unwrap();
        let a = cr(interval.a);
        let b = cr(interval.b);
        let f1 = build_family(&seq, 1, 3).unwrap();
        let f2 = build_family(&seq, 2, 2).unwrap();
        let f3 = build_family(&seq, 3, 3).unwrap();
        let f4 = build_family(&seq, 4, 3).unwrap();
        for j in 1..=2usize {
            for m in [
                f1.p(j).eval(a),
                f4.q_poly(j).eval(a),
                f2.q_poly(j).eval(a),
                f3.p(j).eval(a),
                f1.p(j).eval(b),
            ] {
                assert!(cond_one(&m) < 1e10);
            }
        }
    }
}
