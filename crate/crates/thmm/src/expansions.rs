//! Closed-form power-series coefficients of the resolvent matrices at z = 0
//! and z = a, cross-checked against coefficient extraction from the
//! assembled matrix polynomials.

use serde::Serialize;

use crate::blockkit::{unit_column, BlockVector};
use crate::error::Result;
use crate::mat::{block2x2, cr, eye, rel_residual, solve, zeros, CMat, C64};
use crate::moments::{hankel, transform_moments, u_vectors, MomentSequence, Parity};
use crate::omp::build_family;
use crate::poly::MatrixPolynomial;
use crate::resolvent::{odd_coupling, u_even, u_odd, v_even_poly, v_odd_poly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Center {
    Zero,
    LeftEndpoint,
}

/// Power-series coefficients of one resolvent around one center, with the
/// independently extracted coefficients and the per-coefficient deviation.
#[derive(Debug, Clone)]
pub struct SeriesCoefficients {
    pub center: Center,
    pub parity: Parity,
    pub n: usize,
    /// Closed-form coefficients (extraction fills the single undisplayed
    /// interior index in the even-at-zero case).
    pub coeffs: Vec<CMat>,
    /// Coefficients read off the assembled matrix polynomial.
    pub extracted: Vec<CMat>,
    /// Scale-free deviation per coefficient.
    pub diffs: Vec<f64>,
}

fn with_diffs(
    center: Center,
    parity: Parity,
    n: usize,
    coeffs: Vec<CMat>,
    extracted: Vec<CMat>,
) -> SeriesCoefficients {
    let diffs = coeffs
        .iter()
        .zip(&extracted)
        .map(|(c1, c2)| rel_residual(c1, c2))
        .collect();
    SeriesCoefficients {
        center,
        parity,
        n,
        coeffs,
        extracted,
        diffs,
    }
}

/// Block k of a stacked column, zero when out of range.
fn block_or_zero(x: &BlockVector, k: isize) -> CMat {
    if k < 0 || k as usize >= x.len() {
        zeros(x.q, x.q)
    } else {
        x.block(k as usize).clone()
    }
}

/// w* T^{*p} x = Σ_k w_k* x_{k+p}, zero when p exceeds the length.
fn row_contract(w: &BlockVector, p: isize, x: &BlockVector) -> CMat {
    let q = w.q;
    if p < 0 {
        return zeros(q, q);
    }
    let p = p as usize;
    let mut acc = zeros(q, q);
    for k in 0..w.len() {
        if k + p < x.len() {
            acc += w.block(k).adjoint() * x.block(k + p);
        }
    }
    acc
}

/// Coefficients of the even-count resolvent at 0 from the displayed closed
/// forms.  The single interior index the display skips (j = n for n ≥ 2)
/// is taken from coefficient extraction.
#[allow(clippy::needless_range_loop)]
pub fn series_even_at_zero(seq: &MomentSequence, n: usize) -> Result<SeriesCoefficients> {
    seq.require_order("even-count expansion at 0", 2 * n + 1)?;
    let q = seq.q;
    let (a, b) = (seq.interval.a, seq.interval.b);
    let (ab, apb) = (a * b, a + b);

    let htilde = hankel(seq, 1, n)?.htilde.expect("order 2n+1");
    let h1 = hankel(seq, 1, n)?.h;
    let seq3 = transform_moments(seq, 3)?;
    let seq4 = transform_moments(seq, 4)?;
    let h3 = hankel(&seq3, 3, n)?.h;
    let h4 = hankel(&seq4, 4, n)?.h;

    let u = seq.u_vec(n)?;
    let v = unit_column(n, q);

    // K v = H4^{-1} H̃ H3^{-1} v and the companion columns
    let h3inv_v = solve(&h3, &v.stacked())?;
    let kv = BlockVector::from_stacked(q, solve(&h4, &(&htilde * &h3inv_v))?);
    let htinv_u = BlockVector::from_stacked(q, solve(&htilde, &u.stacked())?);
    // W0 v = ab (T* H4^{-1} H̃ − H4^{-1} H1) H3^{-1} v
    let t = crate::blockkit::shift(n, q);
    let w0v = BlockVector::from_stacked(
        q,
        (t.data.adjoint() * kv.stacked() - solve(&h4, &(&h1 * &h3inv_v))?) * cr(ab),
    );

    let (vpoly, _) = v_even_poly(seq, n)?;
    let extracted: Vec<CMat> = pad_coeffs(vpoly.coefficients(), n + 3, 2 * q);

    let count = n + 3;
    let mut coeffs = Vec::with_capacity(count);
    for j in 0..count {
        if n >= 2 && j == n {
            coeffs.push(extracted[j].clone());
            continue;
        }
        let ji = j as isize;
        let a11 = if j == 0 {
            eye(q)
        } else {
            block_or_zero(&htinv_u, ji - 1)
        };
        let a21 = row_contract(&u, ji, &htinv_u);
        let a12 = block_or_zero(&kv, ji - 2) - block_or_zero(&kv, ji - 1) * cr(apb)
            + block_or_zero(&kv, ji) * cr(ab);
        let a22 = if j == 0 {
            eye(q) + row_contract(&u, 0, &w0v)
        } else {
            row_contract(&u, ji - 1, &kv) - row_contract(&u, ji, &kv) * cr(apb)
                + row_contract(&u, ji + 1, &kv) * cr(ab)
        };
        coeffs.push(block2x2(&a11, &a12, &a21, &a22));
    }
    Ok(with_diffs(
        Center::Zero,
        Parity::EvenCount,
        n,
        coeffs,
        extracted,
    ))
}

/// Coefficients of the odd-count resolvent at 0: the constant term is the
/// corrector product, the rest are rank-structured contractions against
/// H_{1,n}^{-1}, all right-multiplied by the corrector product.
pub fn series_odd_at_zero(seq: &MomentSequence, n: usize) -> Result<SeriesCoefficients> {
    seq.require_order("odd-count expansion at 0", 2 * n)?;
    let q = seq.q;
    let coupling = odd_coupling(seq, n)?;
    let cd = {
        let mn = eye(q) + &coupling.m_factor * &coupling.n_factor;
        block2x2(&mn, &coupling.m_factor, &coupling.n_factor, &eye(q))
    };

    let h1 = hankel(seq, 1, n)?.h;
    let uv = u_vectors(seq, n)?;
    let v = unit_column(n, q);
    let hi_u1 = BlockVector::from_stacked(q, solve(&h1, &uv.u1.stacked())?);
    let hi_v = BlockVector::from_stacked(q, solve(&h1, &v.stacked())?);

    let (vpoly, _) = v_odd_poly(seq, n)?;
    let extracted: Vec<CMat> = pad_coeffs(vpoly.coefficients(), n + 2, 2 * q);

    let mut coeffs = vec![cd.clone()];
    for j in 1..=(n + 1) as isize {
        let b11 = block_or_zero(&hi_u1, j - 1);
        let b12 = -block_or_zero(&hi_v, j - 1);
        let b21 = row_contract(&uv.u1, j - 1, &hi_u1);
        let b22 = -row_contract(&uv.u1, j - 1, &hi_v);
        coeffs.push(block2x2(&b11, &b12, &b21, &b22) * &cd);
    }
    Ok(with_diffs(
        Center::Zero,
        Parity::OddCount,
        n,
        coeffs,
        extracted,
    ))
}

/// Derivative ladder: (1/k!) X^{(k)} evaluated at a, for the
/// coefficient-adjoint polynomial of X.
struct DerivativeLadder {
    values: Vec<CMat>,
}

impl DerivativeLadder {
    fn new(p: &MatrixPolynomial, at: C64, orders: usize) -> Self {
        let sharp = p.sharp();
        let mut factorial = 1.0;
        let values = (0..=orders)
            .map(|k| {
                if k > 0 {
                    factorial *= k as f64;
                }
                sharp.derivative_n(k).eval(at) * cr(1.0 / factorial)
            })
            .collect();
        DerivativeLadder { values }
    }

    /// (1/k!) X*^{[k]}(a); zero beyond the polynomial degree.
    fn get(&self, k: isize) -> CMat {
        if k < 0 || k as usize >= self.values.len() {
            let q = self.values[0].nrows();
            zeros(q, q)
        } else {
            self.values[k as usize].clone()
        }
    }
}

/// Coefficients of the even-count resolvent at a in powers of (z − a),
/// through derivatives of the polynomial values at a.
pub fn series_even_at_a(seq: &MomentSequence, n: usize) -> Result<SeriesCoefficients> {
    seq.require_order("even-count expansion at a", 2 * n + 1)?;
    let q = seq.q;
    let (a, b) = (seq.interval.a, seq.interval.b);
    let fam1 = build_family(seq, 1, n + 1)?;
    let fam2 = build_family(seq, 2, n)?;
    let q2a_inv = crate::mat::inverse(&fam2.q_poly(n).eval(cr(a)).adjoint())?;
    let p1a_inv = crate::mat::inverse(&fam1.p(n + 1).eval(cr(a)).adjoint())?;

    let count = n + 3;
    let lq2 = DerivativeLadder::new(fam2.q_poly(n), cr(a), count);
    let lq1 = DerivativeLadder::new(fam1.q_poly(n + 1), cr(a), count);
    let lp2 = DerivativeLadder::new(fam2.p(n), cr(a), count);
    let lp1 = DerivativeLadder::new(fam1.p(n + 1), cr(a), count);

    let u = u_even(seq, n)?;
    let extracted = pad_coeffs(u.poly().coefficients_at(cr(a)), count, 2 * q);

    let mut coeffs = Vec::with_capacity(count);
    for j in 0..count {
        let ji = j as isize;
        let m = if j == 0 {
            block2x2(&eye(q), &(-(lq1.get(0) * &p1a_inv)), &zeros(q, q), &eye(q))
        } else if j == count - 1 {
            // only the (z−a)² tail of the lower-left block survives
            block2x2(
                &zeros(q, q),
                &zeros(q, q),
                &(lp2.get(ji - 2) * &q2a_inv),
                &zeros(q, q),
            )
        } else {
            let c11 = lq2.get(ji) * &q2a_inv;
            let c12 = -(lq1.get(ji) * &p1a_inv);
            let c21 = (lp2.get(ji - 2) - lp2.get(ji - 1) * cr(b - a)) * &q2a_inv;
            let c22 = lp1.get(ji) * &p1a_inv;
            block2x2(&c11, &c12, &c21, &c22)
        };
        coeffs.push(m);
    }
    Ok(with_diffs(
        Center::LeftEndpoint,
        Parity::EvenCount,
        n,
        coeffs,
        extracted,
    ))
}

/// Coefficients of the odd-count resolvent at a in powers of (z − a).
pub fn series_odd_at_a(seq: &MomentSequence, n: usize) -> Result<SeriesCoefficients> {
    seq.require_order("odd-count expansion at a", 2 * n)?;
    let q = seq.q;
    let (a, b) = (seq.interval.a, seq.interval.b);
    let w = 1.0 / (b - a);
    let fam3 = build_family(seq, 3, n)?;
    let fam4 = build_family(seq, 4, n)?;
    let q4a_inv = crate::mat::inverse(&fam4.q_poly(n).eval(cr(a)).adjoint())?;
    let p3a_inv = crate::mat::inverse(&fam3.p(n).eval(cr(a)).adjoint())?;

    let count = n + 2;
    let lq4 = DerivativeLadder::new(fam4.q_poly(n), cr(a), count);
    let lq3 = DerivativeLadder::new(fam3.q_poly(n), cr(a), count);
    let lp4 = DerivativeLadder::new(fam4.p(n), cr(a), count);
    let lp3 = DerivativeLadder::new(fam3.p(n), cr(a), count);

    let u = u_odd(seq, n)?;
    let extracted = pad_coeffs(u.poly().coefficients_at(cr(a)), count, 2 * q);

    let mut coeffs = Vec::with_capacity(count);
    for j in 0..count {
        let ji = j as isize;
        let m = if j == 0 {
            block2x2(
                &eye(q),
                &(lq3.get(0) * &p3a_inv * cr(w)),
                &zeros(q, q),
                &eye(q),
            )
        } else {
            let d11 = lq4.get(ji) * &q4a_inv;
            let d12 = lq3.get(ji) * &p3a_inv * cr(w);
            let d21 = lp4.get(ji - 1) * &q4a_inv;
            let d22 = (lp3.get(ji) * cr(b - a) - lp3.get(ji - 1)) * &p3a_inv * cr(w);
            block2x2(&d11, &d12, &d21, &d22)
        };
        coeffs.push(m);
    }
    Ok(with_diffs(
        Center::LeftEndpoint,
        Parity::OddCount,
        n,
        coeffs,
        extracted,
    ))
}

/// Dispatch on the sequence parity.
pub fn series_at(seq: &MomentSequence, center: Center) -> Result<SeriesCoefficients> {
    let (parity, n) = Parity::of_order(seq.order());
    match (parity, center) {
        (Parity::EvenCount, Center::Zero) => series_even_at_zero(seq, n),
        (Parity::EvenCount, Center::LeftEndpoint) => series_even_at_a(seq, n),
        (Parity::OddCount, Center::Zero) => series_odd_at_zero(seq, n),
        (Parity::OddCount, Center::LeftEndpoint) => series_odd_at_a(seq, n),
    }
}

fn pad_coeffs(mut v: Vec<CMat>, len: usize, dim: usize) -> Vec<CMat> {
    assert!(
        v.len() <= len,
        "assembled polynomial has {} coefficients, expected at most {len}",
        v.len()
    );
    while v.len() < len {
        v.push(zeros(dim, dim));
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::{get_block, max_abs};
    use crate::moments::fixtures::two_atom_moments;
    use crate::moments::{random_hausdorff_sequence, Interval};

    #[test]
    fn even_at_zero_fixture_matches_extraction() {
        let seq = two_atom_moments(3);
        let s = series_even_at_zero(&seq, 1).unwrap();
        assert_eq!(s.coeffs.len(), 4);
        for (j, d) in s.diffs.iter().enumerate() {
            assert!(*d <= 1e-10, "coefficient {j}: {d}");
        }
        // top-left block of the constant term is the identity
        assert!(max_abs(&(get_block(&s.coeffs[0], 1, 0, 0) - eye(1))) < 1e-13);
        // the highest coefficient has only the upper-right block
        let top = &s.coeffs[3];
        assert!(max_abs(&get_block(top, 1, 0, 0)) < 1e-13);
        assert!(max_abs(&get_block(top, 1, 1, 0)) < 1e-13);
        assert!(max_abs(&get_block(top, 1, 1, 1)) < 1e-13);
    }

    #[test]
    fn even_at_zero_matches_value_at_origin() {
        let interval = Interval::new(-0.5, 1.5).unwrap();
        let (_, seq) = random_hausdorff_sequence(2, 5, interval, 61).unwrap();
        let s = series_even_at_zero(&seq, 2).unwrap();
        let (vpoly, _) = v_even_poly(&seq, 2).unwrap();
        assert!(rel_residual(&s.coeffs[0], &vpoly.eval(cr(0.0)).m) < 1e-11);
    }

    #[test]
    fn odd_at_zero_constant_term_is_corrector_product() {
        let seq = two_atom_moments(2);
        let s = series_odd_at_zero(&seq, 1).unwrap();
        assert_eq!(s.coeffs.len(), 3);
        for d in &s.diffs {
            assert!(*d <= 1e-10);
        }
        let coupling = odd_coupling(&seq, 1).unwrap();
        // a = 0 here, so M = 0 and the lower-left block of the constant
        // term is exactly N
        assert!(max_abs(&(get_block(&s.coeffs[0], 1, 1, 0) - coupling.n_factor)) < 1e-13);
    }

    #[test]
    fn even_at_a_displays() {
        let interval = Interval::new(0.3, 1.6).unwrap();
        let (_, seq) = random_hausdorff_sequence(2, 5, interval, 67).unwrap();
        let n = 2;
        let s = series_even_at_a(&seq, n).unwrap();
        assert_eq!(s.coeffs.len(), n + 3);
        for (j, d) in s.diffs.iter().enumerate() {
            assert!(*d <= 1e-9, "coefficient {j}: {d}");
        }
        // unitriangular constant term
        let c0 = &s.coeffs[0];
        assert!(max_abs(&(get_block(c0, 2, 0, 0) - eye(2))) < 1e-12);
        assert!(max_abs(&(get_block(c0, 2, 1, 1) - eye(2))) < 1e-12);
        assert!(max_abs(&get_block(c0, 2, 1, 0)) < 1e-12);
        // value consistency: constant term equals the resolvent at a
        let u = u_even(&seq, n).unwrap();
        assert!(rel_residual(c0, &u.eval(cr(interval.a)).m) < 1e-11);
    }

    #[test]
    fn odd_at_a_taylor_oracle() {
        let seq = two_atom_moments(2);
        let s = series_odd_at_a(&seq, 1).unwrap();
        assert_eq!(s.coeffs.len(), 3);
        for (j, d) in s.diffs.iter().enumerate() {
            assert!(*d <= 1e-10, "coefficient {j}: {d}");
        }
        // the top block row of the last coefficient vanishes
        let last = s.coeffs.last().unwrap();
        assert!(max_abs(&get_block(last, 1, 0, 0)) < 1e-13);
        assert!(max_abs(&get_block(last, 1, 0, 1)) < 1e-13);
    }

    #[test]
    fn endpoint_weighted_inverse_identity() {
        // a H4^{-1} + b H3^{-1} = (b-a) H4^{-1} H̃ H3^{-1}, the identity the
        // constant-term closed forms lean on
        use crate::mat::solve;
        for (q, m, seed) in [(1usize, 5usize, 71u64), (2, 3, 72), (2, 5, 73)] {
            let interval = Interval::new(0.2, 1.4).unwrap();
            let (_, seq) = random_hausdorff_sequence(q, m, interval, seed).unwrap();
            let (a, b) = (interval.a, interval.b);
            let n = (m - 1) / 2;
            let htilde = hankel(&seq, 1, n).unwrap().htilde.unwrap();
            let h3 = hankel(&transform_moments(&seq, 3).unwrap(), 3, n)
                .unwrap()
                .h;
            let h4 = hankel(&transform_moments(&seq, 4).unwrap(), 4, n)
                .unwrap()
                .h;
            let id = eye((n + 1) * q);
            let lhs = solve(&h4, &id).unwrap() * cr(a) + solve(&h3, &id).unwrap() * cr(b);
            let rhs = solve(&h4, &(&htilde * solve(&h3, &id).unwrap())).unwrap() * cr(b - a);
            let res = rel_residual(&lhs, &rhs);
            assert!(res <= 1e-11, "q={q} m={m}: {res:.3e}");
        }
    }

    #[test]
    fn parities_and_centers_sweep() {
        for (q, m, seed) in [(1usize, 3usize, 1u64), (2, 5, 2), (1, 4, 3), (2, 6, 4)] {
            let interval = Interval::new(0.1, 1.2).unwrap();
            let (_, seq) = random_hausdorff_sequence(q, m, interval, seed).unwrap();
            for center in [Center::Zero, Center::LeftEndpoint] {
                let s = series_at(&seq, center).unwrap();
                for (j, d) in s.diffs.iter().enumerate() {
                    assert!(*d <= 1e-9, "q={q} m={m} {center:?} coeff {j}: {d}");
                }
            }
        }
    }
}
