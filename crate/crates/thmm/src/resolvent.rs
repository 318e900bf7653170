//! Resolvent matrices of the truncated Hausdorff matrix moment problem:
//! the Kovalishina building block, the resolvent at the point 0 (built from
//! it), the resolvent at the point a (built from orthogonal polynomial
//! values), the explicit coupling between the two and the canonical
//! solutions attached to each polynomial family.

use crate::blockkit::{signature_matrices, unit_column, BlockVector};
use crate::error::{Error, Result};
use crate::mat::{
    block2x2, c, cond_one, cr, eye, fro_norm, get_block, hermitize, inverse, max_eig_hermitian,
    rel_residual, robustly_invertible, solve, solve_adjoint_from_right, zeros, CMat, C64,
};
use crate::moments::{
    hankel, transform_moments, u_vectors, Interval, MomentSequence, Parity, COND_LIMIT,
};
use crate::omp::{bilinear_resolvent_adjoint, build_family, OmpFamily};
use crate::poly::{poly_weight, MatrixPolynomial};

/// A 2q×2q resolvent value at one point with labelled q×q blocks.
#[derive(Debug, Clone)]
pub struct ResolventEval {
    pub z: C64,
    pub q: usize,
    pub m: CMat,
}

impl ResolventEval {
    pub fn alpha(&self) -> CMat {
        get_block(&self.m, self.q, 0, 0)
    }
    pub fn beta(&self) -> CMat {
        get_block(&self.m, self.q, 0, 1)
    }
    pub fn gamma(&self) -> CMat {
        get_block(&self.m, self.q, 1, 0)
    }
    pub fn delta(&self) -> CMat {
        get_block(&self.m, self.q, 1, 1)
    }
}

/// 2×2 grid of matrix polynomials; the polynomial form of a resolvent.
#[derive(Debug, Clone)]
pub struct Resolvent2x2Poly {
    pub q: usize,
    pub blocks: [[MatrixPolynomial; 2]; 2],
}

impl Resolvent2x2Poly {
    pub fn eval(&self, z: C64) -> ResolventEval {
        let m = block2x2(
            &self.blocks[0][0].eval(z),
            &self.blocks[0][1].eval(z),
            &self.blocks[1][0].eval(z),
            &self.blocks[1][1].eval(z),
        );
        ResolventEval { z, q: self.q, m }
    }

    /// Number of 2q×2q coefficients (maximal block degree + 1).
    pub fn num_coeffs(&self) -> usize {
        1 + self
            .blocks
            .iter()
            .flatten()
            .map(|p| if p.is_zero() { 0 } else { p.degree() })
            .max()
            .unwrap()
    }

    /// k-th 2q×2q coefficient of the expansion at zero.
    pub fn coefficient(&self, k: usize) -> CMat {
        block2x2(
            &self.blocks[0][0].coeff(k),
            &self.blocks[0][1].coeff(k),
            &self.blocks[1][0].coeff(k),
            &self.blocks[1][1].coeff(k),
        )
    }

    pub fn coefficients(&self) -> Vec<CMat> {
        (0..self.num_coeffs())
            .map(|k| self.coefficient(k))
            .collect()
    }

    /// Coefficients recentered at z0 (expansion in powers of z − z0).
    pub fn coefficients_at(&self, z0: C64) -> Vec<CMat> {
        let shifted: Vec<Vec<CMat>> = self
            .blocks
            .iter()
            .flatten()
            .map(|p| p.recenter(z0))
            .collect();
        (0..self.num_coeffs())
            .map(|k| {
                let pick = |i: usize| {
                    shifted[i]
                        .get(k)
                        .cloned()
                        .unwrap_or_else(|| zeros(self.q, self.q))
                };
                block2x2(&pick(0), &pick(1), &pick(2), &pick(3))
            })
            .collect()
    }

    fn map_right(&self, f: impl Fn(usize, usize) -> MatrixPolynomial) -> Self {
        Resolvent2x2Poly {
            q: self.q,
            blocks: [[f(0, 0), f(0, 1)], [f(1, 0), f(1, 1)]],
        }
    }

    /// Right-multiply by a constant 2q×2q matrix.
    pub fn mul_const_right(&self, m: &CMat) -> Self {
        let q = self.q;
        let b = |i: usize, j: usize| get_block(m, q, i, j);
        self.map_right(|i, j| {
            self.blocks[i][0]
                .mul_const_right(&b(0, j))
                .add(&self.blocks[i][1].mul_const_right(&b(1, j)))
        })
    }
}

/// The moment data entering one Kovalishina matrix: the Hankel matrix of
/// family r at order n and the two contracted columns H⁻¹u_r, H⁻¹v.
struct KovalishinaData {
    hi_u: BlockVector,
    hi_v: BlockVector,
    u_r: BlockVector,
    v: BlockVector,
}

fn kovalishina_data(seq: &MomentSequence, r: u8, n: usize) -> Result<KovalishinaData> {
    let q = seq.q;
    let seq_r = transform_moments(seq, r)?;
    let h = hankel(&seq_r, r, n)?.h;
    let uv = u_vectors(seq, n)?;
    // The second family enters through its z-free part: the affine tail
    // z·v·s0 would break hermiticity of the defining Ljapunov identity at
    // complex z, and nothing downstream needs it.
    let u_r = match r {
        1 => uv.u1.clone(),
        2 => uv.u2_hat.clone().ok_or(Error::InsufficientMoments {
            what: "Kovalishina family 2",
            needed: n + 1,
            have: seq.order(),
        })?,
        3 => uv.u3.clone(),
        4 => uv.u4.clone(),
        _ => return Err(Error::InvalidArgument("family index out of range".into())),
    };
    let v = unit_column(n, q);
    let hi_u = BlockVector::from_stacked(q, solve(&h, &u_r.stacked())?);
    let hi_v = BlockVector::from_stacked(q, solve(&h, &v.stacked())?);
    Ok(KovalishinaData { hi_u, hi_v, u_r, v })
}

/// Kovalishina matrix of family r at order n, as four matrix polynomials
/// in z.  At z = 0 it is the identity.
pub fn kovalishina_poly(seq: &MomentSequence, r: u8, n: usize) -> Result<Resolvent2x2Poly> {
    let q = seq.q;
    let d = kovalishina_data(seq, r, n)?;
    let id = MatrixPolynomial::identity(q);
    let alpha = id.add(&bilinear_resolvent_adjoint(&d.v, &d.hi_u).shift_up(1));
    let beta = bilinear_resolvent_adjoint(&d.v, &d.hi_v).shift_up(1).neg();
    let gamma = bilinear_resolvent_adjoint(&d.u_r, &d.hi_u).shift_up(1);
    let delta = id.sub(&bilinear_resolvent_adjoint(&d.u_r, &d.hi_v).shift_up(1));
    Ok(Resolvent2x2Poly {
        q,
        blocks: [[alpha, beta], [gamma, delta]],
    })
}

pub fn kovalishina(seq: &MomentSequence, r: u8, n: usize, z: C64) -> Result<ResolventEval> {
    Ok(kovalishina_poly(seq, r, n)?.eval(z))
}

// NaN must fail the check, hence the negated comparison
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn check_cond(name: &str, m: &CMat) -> Result<()> {
    let cond = cond_one(m);
    if !(cond < COND_LIMIT) {
        return Err(Error::AssumptionViolated(format!(
            "{name} is singular or too ill-conditioned (cond {cond:.3e})"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Even number of moments: m = 2n+1
// ---------------------------------------------------------------------------

/// Coupling data between the two resolvents when the number of moments is
/// even: the shear factors M, N, the triangular correctors C, D, the
/// normalizer d built from first-kind values at 0 and a, and the
/// block-diagonal 𝔇 = diag(d^{*-1}, d).
#[derive(Debug, Clone)]
pub struct EvenCoupling {
    pub n: usize,
    pub m_factor: CMat,
    pub n_factor: CMat,
    pub c: CMat,
    pub d: CMat,
    pub d_norm: CMat,
    pub d_norm_star_inv: CMat,
    pub dfrak: CMat,
}

pub fn even_coupling(seq: &MomentSequence, n: usize) -> Result<EvenCoupling> {
    seq.require_order("even-count coupling", 2 * n + 1)?;
    let q = seq.q;
    let (a, b) = (seq.interval.a, seq.interval.b);
    let h1 = hankel(seq, 1, n)?;
    let htilde = h1.htilde.expect("order 2n+1 provides the shifted Hankel");
    if !robustly_invertible(&htilde, fro_norm(&h1.h)) {
        return Err(Error::AssumptionViolated(
            "shifted Hankel block is singular or too ill-conditioned".into(),
        ));
    }
    if n >= 1 {
        let prev = hankel(seq, 1, n - 1)?;
        let ht_prev = prev.htilde.expect("order suffices");
        if !robustly_invertible(&ht_prev, fro_norm(&prev.h)) {
            return Err(Error::AssumptionViolated(
                "shifted Hankel block of order n-1 is singular or too ill-conditioned".into(),
            ));
        }
    }
    let seq3 = transform_moments(seq, 3)?;
    let seq4 = transform_moments(seq, 4)?;
    let h3 = hankel(&seq3, 3, n)?.h;
    let h4 = hankel(&seq4, 4, n)?.h;

    let u_n = seq.u_vec(n)?.stacked();
    let v_n = unit_column(n, q).stacked();

    let m_factor = -(u_n.adjoint() * solve(&htilde, &u_n)?) * cr(a);
    let n_factor = -(v_n.adjoint() * solve(&h4, &(&htilde * solve(&h3, &v_n)?))?) * cr(b);

    let c = block2x2(&eye(q), &zeros(q, q), &m_factor, &eye(q));
    let d = block2x2(&eye(q), &n_factor, &zeros(q, q), &eye(q));

    let fam1 = build_family(seq, 1, n + 1)?;
    let p_at_0 = fam1.p(n + 1).eval(cr(0.0));
    let p_at_a = fam1.p(n + 1).eval(cr(a));
    check_cond("first-kind value at a", &p_at_a)?;
    let d_norm = solve_adjoint_from_right(&p_at_0.adjoint(), &p_at_a)?;
    let d_norm_star_inv = inverse(&d_norm.adjoint())?;
    let dfrak = block2x2(&d_norm_star_inv, &zeros(q, q), &zeros(q, q), &d_norm);

    Ok(EvenCoupling {
        n,
        m_factor,
        n_factor,
        c,
        d,
        d_norm,
        d_norm_star_inv,
        dfrak,
    })
}

/// The product of the two triangular correctors, [[I, N], [M, I+MN]].
fn even_cd(coupling: &EvenCoupling, q: usize) -> CMat {
    let mn = &coupling.m_factor * &coupling.n_factor;
    block2x2(
        &eye(q),
        &coupling.n_factor,
        &coupling.m_factor,
        &(eye(q) + mn),
    )
}

/// Resolvent at the point 0 for an even number of moments, materialized as
/// a genuine matrix polynomial: the conjugation by diag(I, (z−a)^{±1})
/// is carried out on coefficients, so the removable singularity at a never
/// appears.
pub fn v_even_poly(seq: &MomentSequence, n: usize) -> Result<(Resolvent2x2Poly, EvenCoupling)> {
    let coupling = even_coupling(seq, n)?;
    let kov = kovalishina_poly(seq, 4, n)?;
    let x = kov.mul_const_right(&even_cd(&coupling, seq.q));
    let a = cr(seq.interval.a);
    let (v21, rem) = x.blocks[1][0].div_linear(a);
    let scale = x.blocks[1][0].fro_norm();
    if fro_norm(&rem) > 1e-8 * (1.0 + scale) {
        return Err(Error::AssumptionViolated(format!(
            "lower-left block does not vanish at a (remainder {:.3e})",
            fro_norm(&rem)
        )));
    }
    let poly = Resolvent2x2Poly {
        q: seq.q,
        blocks: [
            [x.blocks[0][0].clone(), x.blocks[0][1].mul_linear(a)],
            [v21, x.blocks[1][1].clone()],
        ],
    };
    Ok((poly, coupling))
}

/// Raw conjugated product form of the even-count resolvent at 0; defined
/// for z ≠ a only.
pub fn v_even_raw(seq: &MomentSequence, n: usize, z: C64) -> Result<ResolventEval> {
    let a = cr(seq.interval.a);
    if (z - a).norm() == 0.0 {
        return Err(Error::BadEvaluationPoint {
            z,
            why: "the raw conjugated product is undefined at z = a".into(),
        });
    }
    let coupling = even_coupling(seq, n)?;
    let kov = kovalishina_poly(seq, 4, n)?;
    let q = seq.q;
    let x = kov.mul_const_right(&even_cd(&coupling, q)).eval(z);
    let mut left = eye(2 * q);
    left.view_mut((q, q), (q, q))
        .copy_from(&(eye(q) * (z - a).inv()));
    let mut right = eye(2 * q);
    right
        .view_mut((q, q), (q, q))
        .copy_from(&(eye(q) * (z - a)));
    Ok(ResolventEval {
        z,
        q,
        m: left * x.m * right,
    })
}

/// Resolvent at the point a for an even number of moments, held as the
/// orthogonal-polynomial data it is defined through.
#[derive(Debug, Clone)]
pub struct UEven {
    pub n: usize,
    interval: Interval,
    q2_sharp: MatrixPolynomial,
    q1_sharp: MatrixPolynomial,
    p2_sharp: MatrixPolynomial,
    p1_sharp: MatrixPolynomial,
    inv_q2a_star: CMat,
    inv_p1a_star: CMat,
}

pub fn u_even(seq: &MomentSequence, n: usize) -> Result<UEven> {
    seq.require_order("even-count resolvent at a", 2 * n + 1)?;
    let a = seq.interval.a;
    let fam1 = build_family(seq, 1, n + 1)?;
    let fam2 = build_family(seq, 2, n)?;
    let q2a = fam2.q_poly(n).eval(cr(a));
    let p1a = fam1.p(n + 1).eval(cr(a));
    check_cond("second-kind value at a", &q2a)?;
    check_cond("first-kind value at a", &p1a)?;
    Ok(UEven {
        n,
        interval: seq.interval,
        q2_sharp: fam2.q_poly(n).sharp(),
        q1_sharp: fam1.q_poly(n + 1).sharp(),
        p2_sharp: fam2.p(n).sharp(),
        p1_sharp: fam1.p(n + 1).sharp(),
        inv_q2a_star: inverse(&q2a.adjoint())?,
        inv_p1a_star: inverse(&p1a.adjoint())?,
    })
}

impl UEven {
    pub fn eval(&self, z: C64) -> ResolventEval {
        let (a, b) = (self.interval.a, self.interval.b);
        let alpha = self.q2_sharp.eval(z) * &self.inv_q2a_star;
        let beta = -(self.q1_sharp.eval(z) * &self.inv_p1a_star);
        let gamma = self.p2_sharp.eval(z) * &self.inv_q2a_star * (-(cr(b) - z) * (z - cr(a)));
        let delta = self.p1_sharp.eval(z) * &self.inv_p1a_star;
        ResolventEval {
            z,
            q: alpha.nrows(),
            m: block2x2(&alpha, &beta, &gamma, &delta),
        }
    }

    pub fn poly(&self) -> Resolvent2x2Poly {
        let (a, b) = (self.interval.a, self.interval.b);
        let alpha = self.q2_sharp.mul_const_right(&self.inv_q2a_star);
        let beta = self.q1_sharp.mul_const_right(&self.inv_p1a_star).neg();
        // −(b−z)(z−a) = (z−b)(z−a)
        let gamma = self
            .p2_sharp
            .mul_const_right(&self.inv_q2a_star)
            .mul_linear(cr(a))
            .mul_linear(cr(b));
        let delta = self.p1_sharp.mul_const_right(&self.inv_p1a_star);
        Resolvent2x2Poly {
            q: self.q2_sharp.q,
            blocks: [[alpha, beta], [gamma, delta]],
        }
    }
}

// ---------------------------------------------------------------------------
// Odd number of moments: m = 2n
// ---------------------------------------------------------------------------

/// Coupling data for an odd number of moments: the two endpoint
/// contractions Γ_a, Γ_b, the shear factors M = aΓ_a and N = (bΓ_b −
/// aΓ_a)^{-1}, the triangular correctors and 𝔇 = diag(d, d^{*-1}).
#[derive(Debug, Clone)]
pub struct OddCoupling {
    pub n: usize,
    pub gamma_a: CMat,
    pub gamma_b: CMat,
    pub m_factor: CMat,
    pub n_factor: CMat,
    pub c1: CMat,
    pub d1: CMat,
    pub d_norm: CMat,
    pub d_norm_star_inv: CMat,
    pub dfrak: CMat,
}

/// Σ_k p^k x_k: a block column contracted against the real-point row
/// v* R*(p).
fn real_row_eval(p: f64, x: &BlockVector) -> CMat {
    let q = x.q;
    let mut acc = zeros(q, q);
    let mut w = 1.0;
    for k in 0..x.len() {
        acc += x.block(k) * cr(w);
        w *= p;
    }
    acc
}

fn endpoint_contraction(
    point: f64,
    hi_u1: &BlockVector,
    hi_v: &BlockVector,
    label: &str,
) -> Result<CMat> {
    let q = hi_v.q;
    let x = real_row_eval(point, hi_u1) * cr(point);
    let lhs = eye(q) + &x;
    if !robustly_invertible(&lhs, fro_norm(&x)) {
        return Err(Error::AssumptionViolated(format!(
            "{label} is singular or too ill-conditioned"
        )));
    }
    solve(&lhs, &real_row_eval(point, hi_v))
}

pub fn odd_coupling(seq: &MomentSequence, n: usize) -> Result<OddCoupling> {
    seq.require_order("odd-count coupling", 2 * n)?;
    let q = seq.q;
    let (a, b) = (seq.interval.a, seq.interval.b);
    let h1 = hankel(seq, 1, n)?.h;
    let uv = u_vectors(seq, n)?;
    let v = unit_column(n, q);
    let hi_u1 = BlockVector::from_stacked(q, solve(&h1, &uv.u1.stacked())?);
    let hi_v = BlockVector::from_stacked(q, solve(&h1, &v.stacked())?);

    let gamma_a = endpoint_contraction(a, &hi_u1, &hi_v, "endpoint contraction at a")?;
    let gamma_b = endpoint_contraction(b, &hi_u1, &hi_v, "endpoint contraction at b")?;
    let m_factor = &gamma_a * cr(a);
    let spread = &gamma_b * cr(b) - &m_factor;
    check_cond("spread bΓ_b − aΓ_a", &spread)?;
    let n_factor = inverse(&spread)?;

    let c1 = block2x2(&eye(q), &m_factor, &zeros(q, q), &eye(q));
    let d1 = block2x2(&eye(q), &zeros(q, q), &n_factor, &eye(q));

    let fam4 = build_family(seq, 4, n)?;
    let q4_0 = fam4.q_poly(n).eval(cr(0.0));
    let q4_a = fam4.q_poly(n).eval(cr(a));
    check_cond("second-kind value at a", &q4_a)?;
    check_cond("second-kind value at 0", &q4_0)?;
    let d_norm = solve_adjoint_from_right(&q4_0.adjoint(), &q4_a)?;
    let d_norm_star_inv = inverse(&d_norm.adjoint())?;
    let dfrak = block2x2(&d_norm, &zeros(q, q), &zeros(q, q), &d_norm_star_inv);

    Ok(OddCoupling {
        n,
        gamma_a,
        gamma_b,
        m_factor,
        n_factor,
        c1,
        d1,
        d_norm,
        d_norm_star_inv,
        dfrak,
    })
}

/// The product C₁ D₁ = [[I + MN, M], [N, I]].
fn odd_cd(coupling: &OddCoupling, q: usize) -> CMat {
    let mn = &coupling.m_factor * &coupling.n_factor;
    block2x2(
        &(eye(q) + mn),
        &coupling.m_factor,
        &coupling.n_factor,
        &eye(q),
    )
}

/// Resolvent at the point 0 for an odd number of moments (a genuine matrix
/// polynomial, no conjugation needed).
pub fn v_odd_poly(seq: &MomentSequence, n: usize) -> Result<(Resolvent2x2Poly, OddCoupling)> {
    let coupling = odd_coupling(seq, n)?;
    let kov = kovalishina_poly(seq, 1, n)?;
    Ok((kov.mul_const_right(&odd_cd(&coupling, seq.q)), coupling))
}

/// Resolvent at the point a for an odd number of moments.
#[derive(Debug, Clone)]
pub struct UOdd {
    pub n: usize,
    interval: Interval,
    q4_sharp: MatrixPolynomial,
    q3_sharp: MatrixPolynomial,
    p4_sharp: MatrixPolynomial,
    p3_sharp: MatrixPolynomial,
    inv_q4a_star: CMat,
    inv_p3a_star: CMat,
}

pub fn u_odd(seq: &MomentSequence, n: usize) -> Result<UOdd> {
    seq.require_order("odd-count resolvent at a", 2 * n)?;
    let a = seq.interval.a;
    let fam3 = build_family(seq, 3, n)?;
    let fam4 = build_family(seq, 4, n)?;
    let q4a = fam4.q_poly(n).eval(cr(a));
    let p3a = fam3.p(n).eval(cr(a));
    check_cond("second-kind value at a", &q4a)?;
    check_cond("first-kind value at a", &p3a)?;
    Ok(UOdd {
        n,
        interval: seq.interval,
        q4_sharp: fam4.q_poly(n).sharp(),
        q3_sharp: fam3.q_poly(n).sharp(),
        p4_sharp: fam4.p(n).sharp(),
        p3_sharp: fam3.p(n).sharp(),
        inv_q4a_star: inverse(&q4a.adjoint())?,
        inv_p3a_star: inverse(&p3a.adjoint())?,
    })
}

impl UOdd {
    pub fn eval(&self, z: C64) -> ResolventEval {
        let (a, b) = (self.interval.a, self.interval.b);
        let w = cr(1.0 / (b - a));
        let alpha = self.q4_sharp.eval(z) * &self.inv_q4a_star;
        let beta = self.q3_sharp.eval(z) * &self.inv_p3a_star * w;
        let gamma = self.p4_sharp.eval(z) * &self.inv_q4a_star * (z - cr(a));
        let delta = self.p3_sharp.eval(z) * &self.inv_p3a_star * ((cr(b) - z) * w);
        ResolventEval {
            z,
            q: alpha.nrows(),
            m: block2x2(&alpha, &beta, &gamma, &delta),
        }
    }

    pub fn poly(&self) -> Resolvent2x2Poly {
        let (a, b) = (self.interval.a, self.interval.b);
        let w = cr(1.0 / (b - a));
        let alpha = self.q4_sharp.mul_const_right(&self.inv_q4a_star);
        let beta = self.q3_sharp.mul_const_right(&self.inv_p3a_star).scale(w);
        let gamma = self
            .p4_sharp
            .mul_const_right(&self.inv_q4a_star)
            .mul_linear(cr(a));
        // (b−z)/(b−a) = −(z−b)/(b−a)
        let delta = self
            .p3_sharp
            .mul_const_right(&self.inv_p3a_star)
            .mul_linear(cr(b))
            .scale(-w);
        Resolvent2x2Poly {
            q: self.q4_sharp.q,
            blocks: [[alpha, beta], [gamma, delta]],
        }
    }
}

// ---------------------------------------------------------------------------
// Coupling theorem, block-wise identities, J-properties
// ---------------------------------------------------------------------------

/// Default evaluation grid: five real abscissas spanning [a−1, b+1] crossed
/// with imaginary offsets {0, ±1/2, ±1}; real points are nudged off the
/// endpoints a and b.
pub fn default_grid(interval: Interval) -> Vec<C64> {
    let (a, b) = (interval.a, interval.b);
    let lo = a - 1.0;
    let hi = b + 1.0;
    let mut out = Vec::with_capacity(25);
    for i in 0..5 {
        let mut x = lo + (hi - lo) * i as f64 / 4.0;
        if (x - a).abs() < 1e-3 {
            x += 2e-3;
        }
        if (x - b).abs() < 1e-3 {
            x += 2e-3;
        }
        for y in [0.0, 0.5, -0.5, 1.0, -1.0] {
            out.push(c(x, y));
        }
    }
    out
}

/// Ten points in the open upper half plane above the interval.
pub fn upper_half_points(interval: Interval) -> Vec<C64> {
    let (a, b) = (interval.a, interval.b);
    let lo = a - 1.0;
    let hi = b + 1.0;
    (0..10)
        .map(|i| c(lo + (hi - lo) * i as f64 / 9.0, 0.3 + 0.15 * i as f64))
        .collect()
}

/// Maximum over the grid of the scale-free residual between the resolvent
/// at a and the swapped, 𝔇-normalized resolvent at 0.
pub fn coupling_residual(seq: &MomentSequence, grid: &[C64]) -> Result<f64> {
    let (parity, n) = Parity::of_order(seq.order());
    let (swap, u_at, v_poly, dfrak) = match parity {
        Parity::EvenCount => {
            let (v_poly, coupling) = v_even_poly(seq, n)?;
            let u = u_even(seq, n)?;
            let swap = signature_matrices(seq.q).1.data;
            (
                swap,
                Box::new(move |z: C64| u.eval(z).m) as Box<dyn Fn(C64) -> CMat>,
                v_poly,
                coupling.dfrak,
            )
        }
        Parity::OddCount => {
            let (v_poly, coupling) = v_odd_poly(seq, n)?;
            let u = u_odd(seq, n)?;
            let swap = signature_matrices(seq.q).1.data;
            (
                swap,
                Box::new(move |z: C64| u.eval(z).m) as Box<dyn Fn(C64) -> CMat>,
                v_poly,
                coupling.dfrak,
            )
        }
    };
    let mut worst: f64 = 0.0;
    for &z in grid {
        let u_val = u_at(z);
        let rhs = &swap * v_poly.eval(z).m * &swap * &dfrak;
        let res = fro_norm(&(&u_val - &rhs)) / (1.0 + fro_norm(&u_val));
        worst = worst.max(res);
    }
    Ok(worst)
}

/// Per-block residuals of the four coupling identities in the even-count
/// case, max over the grid: each compares one block of the resolvent at a
/// against its expression through the Kovalishina blocks.
pub fn even_block_identity_residuals(
    seq: &MomentSequence,
    n: usize,
    grid: &[C64],
) -> Result<[f64; 4]> {
    let coupling = even_coupling(seq, n)?;
    let kov = kovalishina_poly(seq, 4, n)?;
    let u = u_even(seq, n)?;
    let a = cr(seq.interval.a);
    let q = seq.q;
    let mn = eye(q) + &coupling.m_factor * &coupling.n_factor;
    let mut worst = [0.0f64; 4];
    for &z in grid {
        if (z - a).norm() < 1e-9 {
            continue;
        }
        let k = kov.eval(z);
        let uval = u.eval(z);
        let rhs_alpha =
            (k.gamma() * &coupling.n_factor + k.delta() * &mn) * &coupling.d_norm_star_inv;
        let rhs_beta =
            (k.gamma() + k.delta() * &coupling.m_factor) * &coupling.d_norm * (z - a).inv();
        let rhs_gamma =
            (k.alpha() * &coupling.n_factor + k.beta() * &mn) * &coupling.d_norm_star_inv * (z - a);
        let rhs_delta = (k.alpha() + k.beta() * &coupling.m_factor) * &coupling.d_norm;
        worst[0] = worst[0].max(rel_residual(&uval.alpha(), &rhs_alpha));
        worst[1] = worst[1].max(rel_residual(&uval.beta(), &rhs_beta));
        worst[2] = worst[2].max(rel_residual(&uval.gamma(), &rhs_gamma));
        worst[3] = worst[3].max(rel_residual(&uval.delta(), &rhs_delta));
    }
    Ok(worst)
}

/// Per-block residuals of the four coupling identities in the odd-count case.
pub fn odd_block_identity_residuals(
    seq: &MomentSequence,
    n: usize,
    grid: &[C64],
) -> Result<[f64; 4]> {
    let coupling = odd_coupling(seq, n)?;
    let kov = kovalishina_poly(seq, 1, n)?;
    let u = u_odd(seq, n)?;
    let q = seq.q;
    let mn = eye(q) + &coupling.m_factor * &coupling.n_factor;
    let mut worst = [0.0f64; 4];
    for &z in grid {
        let k = kov.eval(z);
        let uval = u.eval(z);
        let rhs_alpha = (k.gamma() * &coupling.m_factor + k.delta()) * &coupling.d_norm;
        let rhs_beta =
            (k.gamma() * &mn + k.delta() * &coupling.n_factor) * &coupling.d_norm_star_inv;
        let rhs_gamma = (k.alpha() * &coupling.m_factor + k.beta()) * &coupling.d_norm;
        let rhs_delta =
            (k.alpha() * &mn + k.beta() * &coupling.n_factor) * &coupling.d_norm_star_inv;
        worst[0] = worst[0].max(rel_residual(&uval.alpha(), &rhs_alpha));
        worst[1] = worst[1].max(rel_residual(&uval.beta(), &rhs_beta));
        worst[2] = worst[2].max(rel_residual(&uval.gamma(), &rhs_gamma));
        worst[3] = worst[3].max(rel_residual(&uval.delta(), &rhs_delta));
    }
    Ok(worst)
}

/// Signature properties of the Kovalishina matrix: the defect
/// J − Ṽ(z) J Ṽ(z)* is negative semidefinite above the real axis, and the
/// inverse is J Ṽ(z̄)* J everywhere.
pub struct JPropertyResult {
    /// max over upper-half-plane grid points of the largest eigenvalue of
    /// J − Ṽ(z) J Ṽ(z)*, relative to the defect's own scale.
    pub max_defect_eigenvalue: f64,
    /// max over the grid of the backward residual ‖Ṽ(z)·JṼ(z̄)*J − I‖
    /// relative to the operand norms; Ṽ grows like |z|^{n+1}, so this is
    /// the cancellation-aware statement of the inverse identity.
    pub inverse_residual: f64,
}

pub fn j_property_check(
    seq: &MomentSequence,
    r: u8,
    n: usize,
    grid: &[C64],
) -> Result<JPropertyResult> {
    let q = seq.q;
    let kov = kovalishina_poly(seq, r, n)?;
    let j = signature_matrices(q).0.data;
    let mut max_defect = f64::NEG_INFINITY;
    let mut inv_res: f64 = 0.0;
    for &z in grid {
        let v = kov.eval(z).m;
        if z.im > 0.0 {
            let defect = hermitize(&(&j - &v * &j * v.adjoint()));
            max_defect = max_defect.max(max_eig_hermitian(&defect) / (1.0 + fro_norm(&defect)));
        }
        let candidate = &j * kov.eval(z.conj()).m.adjoint() * &j;
        let prod = &v * &candidate;
        let res = fro_norm(&(&prod - eye(2 * q))) / (1.0 + fro_norm(&v) * fro_norm(&candidate));
        inv_res = inv_res.max(res);
    }
    Ok(JPropertyResult {
        max_defect_eigenvalue: max_defect,
        inverse_residual: inv_res,
    })
}

/// Canonical solution attached to family r: the rational matrix function
/// Q_{r,n}(z̄)* [P_{r,n}(z̄)*]^{-1} divided by the family weight, defined
/// off [a, b].
pub fn canonical_solution(family: &OmpFamily, interval: Interval, z: C64) -> Result<CMat> {
    let n = family.n_max;
    let on_axis = z.im.abs() < 1e-12 && z.re >= interval.a - 1e-12 && z.re <= interval.b + 1e-12;
    if on_axis {
        return Err(Error::BadEvaluationPoint {
            z,
            why: "canonical solutions are defined off the interval".into(),
        });
    }
    let p_sharp = family.p(n).sharp().eval(z);
    let q_sharp = family.q_poly(n).sharp().eval(z);
    let w = poly_weight(family.r, z, interval.a, interval.b);
    Ok(q_sharp * inverse(&p_sharp)? * w.inv())
}
