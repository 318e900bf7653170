//! Moment sequences on a finite interval, their four perturbed transforms,
//! discrete matrix measures as generators, block Hankel structures and the
//! solvability / assumption checks.

use nalgebra::DMatrix;
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blockkit::{shift, shift_resolvent, truncations, unit_column, BlockVector};
use crate::error::{Error, Result};
use crate::mat::{
    c, cr, eye, fro_norm, hermitian_eigenvalues, hermitize, is_finite, is_hermitian,
    robustly_invertible, solve, zeros, CMat, C64,
};

/// Default tolerance for the hermitian-within-roundoff checks.
pub const HERMIT_TOL: f64 = 1e-12;
/// Default scale-relative positive definiteness threshold.
pub const PD_TOL: f64 = 1e-10;
/// Weights may dip this far below zero and still count as PSD.
pub const PSD_TOL: f64 = 1e-10;
/// 1-norm condition estimate limit for the invertibility assumptions.
pub const COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a >= b || !a.is_finite() || !b.is_finite() || a.is_nan() || b.is_nan() {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Interval { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }
}

/// Hermitian q×q moments s_0, …, s_m on [a, b].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    pub interval: Interval,
    pub q: usize,
    s: Vec<CMat>,
}

impl MomentSequence {
    /// Validates shapes and hermitian-ness, then stores the hermitized
    /// moments so downstream eigenvalue tests stay meaningful.
    pub fn new(interval: Interval, q: usize, s: Vec<CMat>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidArgument("need at least s_0".into()));
        }
        for (j, m) in s.iter().enumerate() {
            if m.nrows() != q || m.ncols() != q {
                return Err(Error::DimensionMismatch(format!(
                    "moment s_{j} is {}x{}, expected {q}x{q}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if !is_finite(m) || !is_hermitian(m, HERMIT_TOL) {
                return Err(Error::NonHermitianMoment { index: j });
            }
        }
        Ok(MomentSequence {
            interval,
            q,
            s: s.iter().map(hermitize).collect(),
        })
    }

    /// Highest moment index m.
    pub fn order(&self) -> usize {
        self.s.len() - 1
    }

    pub fn moment(&self, j: usize) -> &CMat {
        &self.s[j]
    }

    pub fn moments(&self) -> &[CMat] {
        &self.s
    }

    pub fn require_order(&self, what: &'static str, needed: usize) -> Result<()> {
        if self.order() < needed {
            return Err(Error::InsufficientMoments {
                what,
                needed,
                have: self.order(),
            });
        }
        Ok(())
    }

    /// Stack −(s_0; …; s_j).
    pub fn u_vec(&self, j: usize) -> Result<BlockVector> {
        self.require_order("u vector", j)?;
        Ok(BlockVector::new(
            self.q,
            self.s[..=j].iter().map(|m| -m).collect(),
        ))
    }
}

/// Finitely many atoms t_k with hermitian PSD weights W_k.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMatrixMeasure {
    pub interval: Interval,
    pub q: usize,
    pub atoms: Vec<(f64, CMat)>,
}

impl DiscreteMatrixMeasure {
    pub fn new(interval: Interval, q: usize, atoms: Vec<(f64, CMat)>) -> Result<Self> {
        let mut seen: Vec<f64> = Vec::new();
        for (t, w) in &atoms {
            if *t < interval.a || *t > interval.b {
                return Err(Error::AtomOutsideInterval {
                    t: *t,
                    a: interval.a,
                    b: interval.b,
                });
            }
            if seen.iter().any(|s| s == t) {
                return Err(Error::DuplicateAtom { t: *t });
            }
            seen.push(*t);
            if w.nrows() != q || w.ncols() != q {
                return Err(Error::DimensionMismatch(format!(
                    "weight at t = {t} is {}x{}, expected {q}x{q}",
                    w.nrows(),
                    w.ncols()
                )));
            }
            if !is_hermitian(w, HERMIT_TOL) {
                return Err(Error::NonPsdWeight {
                    t: *t,
                    min_eig: f64::NAN,
                });
            }
            let min_eig = hermitian_eigenvalues(w)[0];
            if min_eig < -PSD_TOL * (1.0 + hermitian_eigenvalues(w).last().unwrap().abs()) {
                return Err(Error::NonPsdWeight { t: *t, min_eig });
            }
        }
        Ok(DiscreteMatrixMeasure { interval, q, atoms })
    }

    /// Weight of the r-th perturbed measure at atom t: the original weight
    /// scaled by 1, (b−t)(t−a), (b−t) or (t−a).
    pub fn perturbed_weight(&self, r: u8, t: f64, w: &CMat) -> CMat {
        let (a, b) = (self.interval.a, self.interval.b);
        let factor = match r {
            1 => 1.0,
            2 => (b - t) * (t - a),
            3 => b - t,
            4 => t - a,
            _ => panic!("family index must be 1..=4"),
        };
        w * cr(factor)
    }
}

/// s_j = Σ_k t_k^j W_k for j = 0..=m, hermitized.
pub fn moments_from_measure(mu: &DiscreteMatrixMeasure, m: usize) -> Result<MomentSequence> {
    let mut s = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let mut acc = zeros(mu.q, mu.q);
        for (t, w) in &mu.atoms {
            acc += w * cr(t.powi(j as i32));
        }
        s.push(hermitize(&acc));
    }
    MomentSequence::new(mu.interval, mu.q, s)
}

/// Moments of the r-th perturbed measure as linear combinations of the
/// originals; r = 1 is the identity, r = 2 drops the order by two,
/// r = 3, 4 drop it by one.
pub fn transform_moments(seq: &MomentSequence, r: u8) -> Result<MomentSequence> {
    let (a, b) = (seq.interval.a, seq.interval.b);
    let m = seq.order();
    let s = seq.moments();
    let out: Vec<CMat> = match r {
        1 => s.to_vec(),
        2 => {
            seq.require_order("transform r=2", 2)?;
            (0..=m - 2)
                .map(|j| &s[j] * cr(-a * b) + &s[j + 1] * cr(a + b) - &s[j + 2])
                .collect()
        }
        3 => {
            seq.require_order("transform r=3", 1)?;
            (0..=m - 1).map(|j| &s[j] * cr(b) - &s[j + 1]).collect()
        }
        4 => {
            seq.require_order("transform r=4", 1)?;
            (0..=m - 1).map(|j| &s[j] * cr(-a) + &s[j + 1]).collect()
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "family index r = {r} out of range 1..=4"
            )))
        }
    };
    MomentSequence::new(seq.interval, seq.q, out)
}

/// Block Hankel data of one transformed sequence at order j: the Hankel
/// matrix H with entries s_{k+ℓ}, the once-shifted H̃ with entries
/// s_{k+ℓ+1} when enough moments exist, and the top-right column Y.
#[derive(Debug, Clone)]
pub struct HankelBundle {
    pub r: u8,
    pub j: usize,
    pub h: CMat,
    pub htilde: Option<CMat>,
    pub y: Option<BlockVector>,
}

/// Build the Hankel bundle from an already transformed sequence.
pub fn hankel(seq_r: &MomentSequence, r: u8, j: usize) -> Result<HankelBundle> {
    seq_r.require_order("Hankel matrix", 2 * j)?;
    let q = seq_r.q;
    let n = (j + 1) * q;
    let mut h = zeros(n, n);
    for k in 0..=j {
        for l in 0..=j {
            crate::mat::set_block(&mut h, q, k, l, seq_r.moment(k + l));
        }
    }
    let htilde = if seq_r.order() > 2 * j {
        let mut ht = zeros(n, n);
        for k in 0..=j {
            for l in 0..=j {
                crate::mat::set_block(&mut ht, q, k, l, seq_r.moment(k + l + 1));
            }
        }
        Some(ht)
    } else {
        None
    };
    let y = if j >= 1 {
        Some(BlockVector::new(
            q,
            (j..2 * j).map(|i| seq_r.moment(i).clone()).collect(),
        ))
    } else {
        None
    };
    Ok(HankelBundle { r, j, h, htilde, y })
}

/// The family of moment block columns used throughout: u_j = −(s_0; …; s_j)
/// and its four companions.  The second-family vector is the affine pair
/// (û_{2,j}, v_j s_0); it materialises per z.
#[derive(Debug, Clone)]
pub struct UVectors {
    pub j: usize,
    pub u: BlockVector,
    pub u1: BlockVector,
    pub u2_hat: Option<BlockVector>,
    pub u3: BlockVector,
    pub u4: BlockVector,
    s0: CMat,
}

impl UVectors {
    /// u_{2,j}(z) = û_{2,j} + z v_j s_0.
    pub fn u2(&self, z: C64) -> Option<BlockVector> {
        let hat = self.u2_hat.as_ref()?;
        let q = hat.q;
        let v = unit_column(self.j, q);
        let vs0 = BlockVector::new(q, v.blocks.iter().map(|bl| bl * &self.s0).collect());
        Some(hat.sub(&vs0.scale(-z)))
    }
}

pub fn u_vectors(seq: &MomentSequence, j: usize) -> Result<UVectors> {
    seq.require_order("u vectors", j)?;
    let q = seq.q;
    let (a, b) = (seq.interval.a, seq.interval.b);
    let u = seq.u_vec(j)?;
    let t = shift(j, q);
    let u1 = t.mul_vec(&u);
    let id = eye((j + 1) * q);
    let u3 = BlockVector::from_stacked(q, -((&id - &t.data * cr(b)) * u.stacked()));
    let u4 = BlockVector::from_stacked(q, (&id - &t.data * cr(a)) * u.stacked());
    let u2_hat = if seq.order() > j {
        let u_next = seq.u_vec(j + 1)?;
        let t_next = shift(j + 1, q);
        let id_next = eye((j + 2) * q);
        let (l1, _) = truncations(j + 1, q)?;
        let inner = (&id_next - &t_next.data * cr(b))
            * (&id_next - &t_next.data * cr(a))
            * u_next.stacked();
        Some(BlockVector::from_stacked(q, -(l1.data.adjoint() * inner)))
    } else {
        None
    };
    Ok(UVectors {
        j,
        u,
        u1,
        u2_hat,
        u3,
        u4,
        s0: seq.moment(0).clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    /// m = 2n+1, an even number of moments s_0..s_m.
    EvenCount,
    /// m = 2n, an odd number of moments.
    OddCount,
}

impl Parity {
    pub fn of_order(m: usize) -> (Parity, usize) {
        if m % 2 == 1 {
            (Parity::EvenCount, (m - 1) / 2)
        } else {
            (Parity::OddCount, m / 2)
        }
    }
}

/// Outcome of the Hausdorff positive definiteness test together with the
/// invertibility assumptions the resolvent constructions rely on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolvabilityVerdict {
    pub parity: Parity,
    pub n: usize,
    pub pd: bool,
    /// Smallest eigenvalue per tested Hankel matrix.
    pub min_eigs: Vec<(String, f64)>,
    /// Shifted-Hankel invertibility (even-count case), None when not applicable.
    pub h1tilde_invertible: Option<bool>,
    /// Invertibility of I + a v* R*(a) H⁻¹ u₁ (odd-count case).
    pub gamma_invertible: Option<bool>,
}

/// Positive definiteness of the parity-appropriate Hankel matrices plus the
/// numeric stand-ins for the two abstract invertibility assumptions.
pub fn check_solvability(seq: &MomentSequence, tol: f64) -> Result<SolvabilityVerdict> {
    let m = seq.order();
    let (parity, n) = Parity::of_order(m);
    let mut min_eigs = Vec::new();
    let mut pd = true;
    let record = |name: String, mat: &CMat, pd: &mut bool, out: &mut Vec<(String, f64)>| {
        let eigs = hermitian_eigenvalues(mat);
        let min = eigs[0];
        let scale = eigs.iter().fold(0.0f64, |acc, e| acc.max(e.abs()));
        if min <= tol * scale {
            *pd = false;
        }
        out.push((name, min));
    };

    let mut h1tilde_invertible = None;
    let mut gamma_invertible = None;
    match parity {
        Parity::EvenCount => {
            let s3 = transform_moments(seq, 3)?;
            let s4 = transform_moments(seq, 4)?;
            record(
                format!("H_{{3,{n}}}"),
                &hankel(&s3, 3, n)?.h,
                &mut pd,
                &mut min_eigs,
            );
            record(
                format!("H_{{4,{n}}}"),
                &hankel(&s4, 4, n)?.h,
                &mut pd,
                &mut min_eigs,
            );
            let b1 = hankel(seq, 1, n)?;
            let ht_n = b1
                .htilde
                .as_ref()
                .expect("order 2n+1 provides the shifted Hankel");
            let mut ok = robustly_invertible(ht_n, fro_norm(&b1.h));
            if n >= 1 {
                let prev = hankel(seq, 1, n - 1)?;
                let ht_prev = prev.htilde.expect("order suffices");
                ok = ok && robustly_invertible(&ht_prev, fro_norm(&prev.h));
            }
            h1tilde_invertible = Some(ok);
        }
        Parity::OddCount => {
            record(
                format!("H_{{1,{n}}}"),
                &hankel(seq, 1, n)?.h,
                &mut pd,
                &mut min_eigs,
            );
            if n >= 1 {
                let s2 = transform_moments(seq, 2)?;
                record(
                    format!("H_{{2,{}}}", n - 1),
                    &hankel(&s2, 2, n - 1)?.h,
                    &mut pd,
                    &mut min_eigs,
                );
            }
            // I + a v_n* R_n*(a) H_{1,n}^{-1} u_{1,n} invertible
            let h = hankel(seq, 1, n)?.h;
            let uv = u_vectors(seq, n)?;
            let sol = solve(&h, &uv.u1.stacked());
            gamma_invertible = Some(match sol {
                Ok(hu1) => {
                    let a = seq.interval.a;
                    let ra = shift_resolvent(n, seq.q, cr(a));
                    let v = unit_column(n, seq.q).stacked();
                    let x = (v.adjoint() * ra.data.adjoint() * hu1) * cr(a);
                    robustly_invertible(&(eye(seq.q) + &x), fro_norm(&x))
                }
                Err(_) => false,
            });
        }
    }
    Ok(SolvabilityVerdict {
        parity,
        n,
        pd,
        min_eigs,
        h1tilde_invertible,
        gamma_invertible,
    })
}

/// Deterministic fixture generator: ⌈m/2⌉+2 atoms on a jittered uniform grid
/// in the open interval, full-rank PSD weights G G*.  The returned sequence
/// passes `check_solvability`.
pub fn random_hausdorff_sequence(
    q: usize,
    m: usize,
    interval: Interval,
    seed: u64,
) -> Result<(DiscreteMatrixMeasure, MomentSequence)> {
    if q == 0 || m == 0 {
        return Err(Error::InvalidArgument("need q >= 1 and m >= 1".into()));
    }
    let k = m.div_ceil(2) + 2;
    for attempt in 0..16u64 {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9)));
        let mut atoms = Vec::with_capacity(k);
        for i in 0..k {
            let jitter: f64 = rng.random::<f64>() - 0.5;
            let frac = (i as f64 + 0.5 + 0.6 * jitter) / k as f64;
            let t = interval.a + interval.length() * frac;
            let g = DMatrix::from_fn(q, q, |_, _| {
                c(
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                )
            });
            let w = &g * g.adjoint();
            atoms.push((t, hermitize(&w)));
        }
        let mu = DiscreteMatrixMeasure::new(interval, q, atoms)?;
        let seq = moments_from_measure(&mu, m)?;
        let verdict = check_solvability(&seq, PD_TOL)?;
        if verdict.pd {
            return Ok((mu, seq));
        }
    }
    Err(Error::InvalidArgument(format!(
        "could not generate a positive definite sequence for q={q}, m={m}, seed={seed}"
    )))
}

// ---------------------------------------------------------------------------
// JSON formats
// ---------------------------------------------------------------------------

type MatrixJson = Vec<Vec<[f64; 2]>>;

fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn matrix_from_json(rows: &MatrixJson, q: usize) -> Result<CMat> {
    if rows.len() != q || rows.iter().any(|r| r.len() != q) {
        return Err(Error::DimensionMismatch(format!(
            "matrix in file is not {q}x{q}"
        )));
    }
    Ok(CMat::from_fn(q, q, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

#[derive(Serialize, Deserialize)]
struct AtomJson {
    t: f64,
    weight: MatrixJson,
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    q: usize,
    a: f64,
    b: f64,
    atoms: Vec<AtomJson>,
}

#[derive(Serialize, Deserialize)]
struct MomentsJson {
    q: usize,
    a: f64,
    b: f64,
    m: usize,
    moments: Vec<MatrixJson>,
}

pub fn measure_to_json(mu: &DiscreteMatrixMeasure) -> String {
    let doc = MeasureJson {
        q: mu.q,
        a: mu.interval.a,
        b: mu.interval.b,
        atoms: mu
            .atoms
            .iter()
            .map(|(t, w)| AtomJson {
                t: *t,
                weight: matrix_to_json(w),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

pub fn measure_from_json(text: &str) -> Result<DiscreteMatrixMeasure> {
    let doc: MeasureJson = serde_json::from_str(text)?;
    let interval = Interval::new(doc.a, doc.b)?;
    let atoms = doc
        .atoms
        .iter()
        .map(|a| Ok((a.t, matrix_from_json(&a.weight, doc.q)?)))
        .collect::<Result<Vec<_>>>()?;
    DiscreteMatrixMeasure::new(interval, doc.q, atoms)
}

pub fn moments_to_json(seq: &MomentSequence) -> String {
    let doc = MomentsJson {
        q: seq.q,
        a: seq.interval.a,
        b: seq.interval.b,
        m: seq.order(),
        moments: seq.moments().iter().map(matrix_to_json).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

pub fn moments_from_json(text: &str) -> Result<MomentSequence> {
    let doc: MomentsJson = serde_json::from_str(text)?;
    let interval = Interval::new(doc.a, doc.b)?;
    if doc.moments.len() != doc.m + 1 {
        return Err(Error::DimensionMismatch(format!(
            "file declares m = {} but carries {} moments",
            doc.m,
            doc.moments.len()
        )));
    }
    let s = doc
        .moments
        .iter()
        .map(|m| matrix_from_json(m, doc.q))
        .collect::<Result<Vec<_>>>()?;
    MomentSequence::new(interval, doc.q, s)
}
