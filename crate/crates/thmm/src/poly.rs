//! Matrix polynomials with q×q complex coefficients.

use crate::mat::{c, cr, eye, fro_norm, max_abs, zeros, CMat, C64};

/// Polynomial Σ_k z^k C_k with dense q×q coefficients, trailing zero
/// coefficients trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    pub q: usize,
    coeffs: Vec<CMat>,
}

impl MatrixPolynomial {
    pub fn new(q: usize, mut coeffs: Vec<CMat>) -> Self {
        assert!(coeffs.iter().all(|m| m.nrows() == q && m.ncols() == q));
        while coeffs.len() > 1 && max_abs(coeffs.last().unwrap()) == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(zeros(q, q));
        }
        MatrixPolynomial { q, coeffs }
    }

    pub fn zero(q: usize) -> Self {
        Self::new(q, vec![zeros(q, q)])
    }

    pub fn constant(m: CMat) -> Self {
        let q = m.nrows();
        Self::new(q, vec![m])
    }

    pub fn identity(q: usize) -> Self {
        Self::constant(eye(q))
    }

    /// Highest stored power (zero polynomial reports 0).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && max_abs(&self.coeffs[0]) == 0.0
    }

    /// Coefficient of z^k, zero-padded beyond the stored degree.
    pub fn coeff(&self, k: usize) -> CMat {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| zeros(self.q, self.q))
    }

    pub fn coeffs(&self) -> &[CMat] {
        &self.coeffs
    }

    pub fn leading(&self) -> &CMat {
        self.coeffs.last().unwrap()
    }

    pub fn is_monic(&self, tol: f64) -> bool {
        max_abs(&(self.leading() - eye(self.q))) <= tol
    }

    /// Horner evaluation.  z is scalar, so it commutes with the matrix
    /// coefficients and the usual scheme applies.
    pub fn eval(&self, z: C64) -> CMat {
        let mut acc = self.coeffs.last().unwrap().clone();
        for k in (0..self.coeffs.len() - 1).rev() {
            acc = acc * z + &self.coeffs[k];
        }
        acc
    }

    /// Coefficient-wise adjoint: z ↦ P(z̄)*.  Evaluating the result at z
    /// gives the adjoint of P at z̄, which stays polynomial in z.
    pub fn sharp(&self) -> Self {
        Self::new(self.q, self.coeffs.iter().map(|m| m.adjoint()).collect())
    }

    /// Formal derivative, coefficient rule C'_k = (k+1) C_{k+1}.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero(self.q);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, m)| m * cr(k as f64))
            .collect();
        Self::new(self.q, coeffs)
    }

    pub fn derivative_n(&self, order: usize) -> Self {
        let mut p = self.clone();
        for _ in 0..order {
            p = p.derivative();
        }
        p
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.q, rhs.q);
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        Self::new(self.q, coeffs)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.q, self.coeffs.iter().map(|m| -m).collect())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.q, self.coeffs.iter().map(|m| m * s).collect())
    }

    /// Right-multiply every coefficient by a constant matrix.
    pub fn mul_const_right(&self, m: &CMat) -> Self {
        Self::new(self.q, self.coeffs.iter().map(|cfe| cfe * m).collect())
    }

    /// Left-multiply every coefficient by a constant matrix.
    pub fn mul_const_left(&self, m: &CMat) -> Self {
        Self::new(self.q, self.coeffs.iter().map(|cfe| m * cfe).collect())
    }

    /// Multiply by z^k.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![zeros(self.q, self.q); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::new(self.q, coeffs)
    }

    /// Multiply by the scalar linear factor (z − root).
    pub fn mul_linear(&self, root: C64) -> Self {
        self.shift_up(1).sub(&self.scale(root))
    }

    /// Divide by (z − root) with remainder (synthetic division):
    /// self = (z − root)·quotient + remainder.
    pub fn div_linear(&self, root: C64) -> (Self, CMat) {
        let n = self.coeffs.len();
        if n == 1 {
            return (Self::zero(self.q), self.coeffs[0].clone());
        }
        let mut quot = vec![zeros(self.q, self.q); n - 1];
        let mut carry = self.coeffs[n - 1].clone();
        for k in (0..n - 1).rev() {
            quot[k] = carry.clone();
            carry = &self.coeffs[k] + carry * root;
        }
        (Self::new(self.q, quot), carry)
    }

    /// Coefficients of the expansion in powers of (z − center): the Taylor
    /// shift, computed by repeated synthetic division.
    pub fn recenter(&self, center: C64) -> Vec<CMat> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        let mut p = self.clone();
        for _ in 0..self.coeffs.len() {
            let (quot, rem) = p.div_linear(center);
            out.push(rem);
            p = quot;
        }
        out
    }

    pub fn fro_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|m| fro_norm(m).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// z ↦ (z − a)(b − z) and friends are handled with plain closures; the only
/// scalar polynomial helper worth sharing is evaluation of products of
/// linear factors with complex z.
pub fn linear_factor(z: C64, root: f64) -> C64 {
    z - cr(root)
}

pub fn poly_weight(r: u8, z: C64, a: f64, b: f64) -> C64 {
    match r {
        1 => c(1.0, 0.0),
        2 => (z - cr(a)) * (cr(b) - z),
        3 => cr(b) - z,
        4 => z - cr(a),
        _ => panic!("family index must be 1..=4"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::rel_residual;
    use proptest::prelude::*;

    fn naive_eval(p: &MatrixPolynomial, z: C64) -> CMat {
        let mut acc = zeros(p.q, p.q);
        let mut zp = cr(1.0);
        for k in 0..=p.degree() {
            acc += p.coeff(k) * zp;
            zp *= z;
        }
        acc
    }

    #[test]
    fn eval_and_derivative_basics() {
        // p(z) = z - 1/2 vanishes at 1/2
        let p = MatrixPolynomial::new(1, vec![CMat::from_element(1, 1, cr(-0.5)), eye(1)]);
        assert!(max_abs(&p.eval(cr(0.5))) < 1e-15);
        // d/dz z^2 I = 2z I
        let p2 = MatrixPolynomial::new(2, vec![zeros(2, 2), zeros(2, 2), eye(2)]);
        let d = p2.derivative();
        assert_eq!(d.degree(), 1);
        assert_eq!(d.coeff(1), eye(2) * cr(2.0));
    }

    #[test]
    fn division_by_linear_factor_roundtrips() {
        let p = MatrixPolynomial::new(
            1,
            vec![
                CMat::from_element(1, 1, c(1.0, -2.0)),
                CMat::from_element(1, 1, c(0.0, 1.0)),
                CMat::from_element(1, 1, c(3.0, 0.5)),
            ],
        );
        let root = c(0.7, -0.2);
        let (quot, rem) = p.div_linear(root);
        let back = quot.mul_linear(root).add(&MatrixPolynomial::constant(rem));
        for k in 0..=p.degree() {
            assert!(rel_residual(&back.coeff(k), &p.coeff(k)) < 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn horner_matches_power_sum(
            entries in proptest::collection::vec(-5.0f64..5.0, 4 * 2 * 4 * 2),
            zr in -2.0f64..2.0,
            zi in -2.0f64..2.0,
        ) {
            let q = 2usize;
            let coeffs: Vec<CMat> = entries
                .chunks(2 * q * q)
                .map(|ch| CMat::from_fn(q, q, |i, j| c(ch[2 * (i * q + j)], ch[2 * (i * q + j) + 1])))
                .collect();
            let p = MatrixPolynomial::new(q, coeffs);
            let z = c(zr, zi);
            prop_assert!(rel_residual(&p.eval(z), &naive_eval(&p, z)) < 1e-12);
        }

        #[test]
        fn recenter_preserves_values(
            re in proptest::collection::vec(-3.0f64..3.0, 4),
            center in -1.5f64..1.5,
            at in -2.0f64..2.0,
        ) {
            let coeffs: Vec<CMat> = re.iter().map(|&x| CMat::from_element(1, 1, cr(x))).collect();
            let p = MatrixPolynomial::new(1, coeffs);
            let shifted = p.recenter(cr(center));
            let z = cr(at);
            let mut acc = zeros(1, 1);
            let mut wp = cr(1.0);
            for cm in &shifted {
                acc += cm * wp;
                wp *= z - cr(center);
            }
            prop_assert!(rel_residual(&acc, &p.eval(z)) < 1e-11);
        }
    }
}
