//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line with the observed extremal residual.

use std::time::Instant;

use num_complex::Complex64;

use thmm::blockkit::signature_matrices;
use thmm::expansions::{series_at, Center};
use thmm::identities::{catalog, run_battery, TolProfile};
use thmm::mat::{cr, fro_norm, max_abs, rel_residual, CMat};
use thmm::moments::{
    moments_from_measure, random_hausdorff_sequence, transform_moments, DiscreteMatrixMeasure,
    Interval, MomentSequence,
};
use thmm::omp::{build_family, inner_product_atoms, max_family_order};
use thmm::poly::poly_weight;
use thmm::resolvent::{
    canonical_solution, coupling_residual, default_grid, even_block_identity_residuals,
    j_property_check, odd_block_identity_residuals, u_even, u_odd, upper_half_points, v_even_poly,
    v_even_raw, v_odd_poly,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The three interval classes the criteria range over.
fn interval_classes() -> [Interval; 3] {
    [
        Interval::new(-0.75, 1.25).unwrap(),
        Interval::new(0.0, 1.0).unwrap(),
        Interval::new(0.4, 1.6).unwrap(),
    ]
}

fn two_atom_moments(m: usize) -> MomentSequence {
    let interval = Interval::new(0.0, 1.0).unwrap();
    let mu = DiscreteMatrixMeasure::new(
        interval,
        1,
        vec![(0.25, CMat::identity(1, 1)), (0.75, CMat::identity(1, 1))],
    )
    .unwrap();
    moments_from_measure(&mu, m).unwrap()
}

fn report(name: &str, pass: bool, detail: String) {
    println!(
        "acceptance {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance {name} failed: {detail}");
}

fn coupling_sweep(even: bool) -> (f64, f64) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for q in 1..=3usize {
        for n in 1..=3usize {
            let m = if even { 2 * n + 1 } else { 2 * n };
            for seed in 0..10u64 {
                let interval = interval_classes()[(seed as usize) % 3];
                let (_, seq) =
                    random_hausdorff_sequence(q, m, interval, 1000 + seed + 17 * q as u64).unwrap();
                let grid = default_grid(interval);
                assert_eq!(grid.len(), 25);
                let res = coupling_residual(&seq, &grid).unwrap();
                worst = worst.max(res);
            }
        }
    }
    (worst, start.elapsed().as_secs_f64())
}

#[test]
fn criterion_01_coupling_theorem_even_case() {
    let (worst, secs) = coupling_sweep(true);
    report(
        "1 (coupling theorem, even count)",
        worst <= 1e-7 && secs <= 60.0,
        format!("max residual {worst:.3e}, {secs:.1} s"),
    );
}

#[test]
fn criterion_02_coupling_theorem_odd_case() {
    let (worst, secs) = coupling_sweep(false);
    report(
        "2 (coupling theorem, odd count)",
        worst <= 1e-7 && secs <= 60.0,
        format!("max residual {worst:.3e}, {secs:.1} s"),
    );
}

#[test]
fn criterion_03_blockwise_coupling_identities() {
    let mut worst: f64 = 0.0;
    for q in 1..=3usize {
        for n in 1..=3usize {
            for seed in 0..2u64 {
                let interval = interval_classes()[(n + seed as usize) % 3];
                let grid = default_grid(interval);
                let (_, seq_even) =
                    random_hausdorff_sequence(q, 2 * n + 1, interval, 2000 + seed + 13 * q as u64)
                        .unwrap();
                for r in even_block_identity_residuals(&seq_even, n, &grid).unwrap() {
                    worst = worst.max(r);
                }
                let (_, seq_odd) =
                    random_hausdorff_sequence(q, 2 * n, interval, 3000 + seed + 13 * q as u64)
                        .unwrap();
                for r in odd_block_identity_residuals(&seq_odd, n, &grid).unwrap() {
                    worst = worst.max(r);
                }
            }
        }
    }
    report(
        "3 (block-level proof identities)",
        worst <= 1e-8,
        format!("max block residual {worst:.3e}"),
    );
}

#[test]
fn criterion_04_identity_battery() {
    let tols = TolProfile::default();
    assert!(
        catalog().len() >= 40,
        "catalog needs at least 40 identities"
    );
    let mut instances = Vec::new();
    let mut k = 0u64;
    // 20 instances spanning parities, block sizes and the interval classes
    for (q, m) in [
        (1usize, 2usize),
        (1, 3),
        (1, 4),
        (1, 5),
        (2, 3),
        (2, 4),
        (2, 5),
        (2, 6),
        (3, 2),
        (3, 3),
    ] {
        for _rep in 0..2 {
            let interval = interval_classes()[(k as usize) % 3];
            instances.push((q, m, interval, 5000 + 7 * k));
            k += 1;
        }
    }
    assert_eq!(instances.len(), 20);
    let mut worst_margin: f64 = 0.0;
    let mut applied_total = 0usize;
    for (q, m, interval, seed) in instances {
        let (_, seq) = random_hausdorff_sequence(q, m, interval, seed).unwrap();
        let grid = default_grid(interval);
        let report_ = run_battery(&seq, &grid, &tols, Some(seed)).unwrap();
        for e in &report_.entries {
            assert!(
                e.pass,
                "q={q} m={m} a={} seed={seed}: {} residual {:?} tol {}",
                interval.a, e.id, e.residual, e.tol
            );
            if let Some(res) = e.residual {
                applied_total += 1;
                worst_margin = worst_margin.max(res / e.tol);
            }
        }
        assert!(report_.overall);
    }
    report(
        "4 (identity battery, 20 instances)",
        true,
        format!("{applied_total} applied entries, worst residual at {worst_margin:.2e} of its tolerance"),
    );
}

#[test]
fn criterion_05_omp_correctness() {
    let mut worst_orth: f64 = 0.0;
    let mut worst_monic: f64 = 0.0;
    for (q, m, seed) in [(1usize, 6usize, 11u64), (2, 6, 12), (3, 5, 13)] {
        for interval in interval_classes() {
            let (mu, seq) = random_hausdorff_sequence(q, m, interval, seed).unwrap();
            for r in 1..=4u8 {
                let n = max_family_order(m, r);
                let fam = build_family(&seq, r, n).unwrap();
                for j in 0..=n {
                    assert_eq!(fam.p(j).degree(), j, "deg P r={r}");
                    worst_monic =
                        worst_monic.max(max_abs(&(fam.p(j).leading() - CMat::identity(q, q))));
                    let expect = match r {
                        1 => j.saturating_sub(1),
                        2 => j + 1,
                        _ => j,
                    };
                    assert_eq!(fam.q_poly(j).degree(), expect, "deg Q r={r} j={j}");
                    for l in 0..j {
                        let ip = inner_product_atoms(&mu, r, fam.p(j), fam.p(l));
                        let scale = match fam.hhat(j) {
                            Some(h) => max_abs(h),
                            None => max_abs(fam.hhat(l).unwrap()),
                        };
                        worst_orth = worst_orth.max(max_abs(&ip) / (1e-300 + scale));
                    }
                }
            }
        }
    }
    report(
        "5 (orthogonality, monicity, degree profile)",
        worst_orth <= 1e-10 && worst_monic <= 1e-12,
        format!("orthogonality {worst_orth:.3e} of scale, monic defect {worst_monic:.3e}"),
    );
}

#[test]
fn criterion_06_kovalishina_j_properties() {
    let mut worst_inv: f64 = 0.0;
    let mut worst_eig = f64::NEG_INFINITY;
    for (q, m, seed) in [(1usize, 6usize, 21u64), (2, 5, 22)] {
        for interval in interval_classes() {
            let (_, seq) = random_hausdorff_sequence(q, m, interval, seed).unwrap();
            let grid = default_grid(interval);
            let upper = upper_half_points(interval);
            assert_eq!(upper.len(), 10);
            for r in 1..=4u8 {
                let n = max_family_order(m, r).min(transform_moments(&seq, r).unwrap().order() / 2);
                let on_grid = j_property_check(&seq, r, n, &grid).unwrap();
                worst_inv = worst_inv.max(on_grid.inverse_residual);
                let on_upper = j_property_check(&seq, r, n, &upper).unwrap();
                worst_eig = worst_eig.max(on_upper.max_defect_eigenvalue);
            }
        }
    }
    report(
        "6 (Kovalishina signature properties)",
        worst_inv <= 1e-11 && worst_eig <= 1e-10,
        format!("inverse residual {worst_inv:.3e}, max defect eigenvalue {worst_eig:.3e}"),
    );
}

#[test]
fn criterion_07_series_expansions() {
    let mut worst: f64 = 0.0;
    for q in 1..=2usize {
        for n in 1..=3usize {
            for (idx, interval) in interval_classes().iter().enumerate() {
                for (m, seed) in [(2 * n + 1, 31u64), (2 * n, 32)] {
                    let (_, seq) = random_hausdorff_sequence(
                        q,
                        m,
                        *interval,
                        seed + 100 * n as u64 + 10 * idx as u64,
                    )
                    .unwrap();
                    for center in [Center::Zero, Center::LeftEndpoint] {
                        let series = series_at(&seq, center).unwrap();
                        for d in &series.diffs {
                            worst = worst.max(*d);
                        }
                    }
                }
            }
        }
    }
    report(
        "7 (closed-form series vs extraction)",
        worst <= 1e-9,
        format!("max coefficient deviation {worst:.3e}"),
    );
}

#[test]
fn criterion_08_canonical_solutions() {
    let mut worst_sym: f64 = 0.0;
    let mut worst_laurent: f64 = 0.0;
    for (q, m, seed) in [(1usize, 6usize, 41u64), (2, 6, 42)] {
        for interval in interval_classes() {
            let (_, seq) = random_hausdorff_sequence(q, m, interval, seed).unwrap();
            let s0 = seq.moment(0).clone();
            let u20 = seq.moment(1) - &s0 * cr(interval.a + interval.b);
            for r in 1..=4u8 {
                let n = max_family_order(m, r);
                let fam = build_family(&seq, r, n).unwrap();
                for &z in default_grid(interval).iter().filter(|z| z.im.abs() > 0.4) {
                    let s = canonical_solution(&fam, interval, z).unwrap();
                    let s_conj = canonical_solution(&fam, interval, z.conj()).unwrap();
                    worst_sym = worst_sym.max(rel_residual(&s_conj, &s.adjoint()));
                }
                // leading Laurent coefficient of the second-kind ratio is
                // the r-transformed zeroth moment
                let sr = transform_moments(&seq, r).unwrap();
                for z in [c(7071.07, 7071.07), c(-1e4, 0.5), c(0.0, 1e4)] {
                    let s = canonical_solution(&fam, interval, z).unwrap();
                    let w = poly_weight(r, z, interval.a, interval.b);
                    let ratio = match r {
                        1 => s,
                        2 => &s * w + &u20 + &s0 * z,
                        3 => -(&s * w) + &s0,
                        4 => -(&s * w) - &s0,
                        _ => unreachable!(),
                    };
                    let rel = max_abs(&(ratio * z - sr.moment(0))) / max_abs(sr.moment(0));
                    worst_laurent = worst_laurent.max(rel);
                }
            }
        }
    }
    report(
        "8 (canonical solutions)",
        worst_sym <= 1e-11 && worst_laurent <= 1e-3,
        format!("symmetry {worst_sym:.3e}, Laurent deviation {worst_laurent:.3e}"),
    );
}

#[test]
fn criterion_09_removable_singularity() {
    let mut worst: f64 = 0.0;
    // fixture-scale instances, q = 1 and q = 2
    let seq1 = two_atom_moments(3);
    let (vpoly1, _) = v_even_poly(&seq1, 1).unwrap();
    let z1 = cr(1e-8);
    worst = worst.max(rel_residual(
        &vpoly1.eval(z1).m,
        &v_even_raw(&seq1, 1, z1).unwrap().m,
    ));
    let interval = Interval::new(0.0, 1.0).unwrap();
    let (_, seq2) = random_hausdorff_sequence(2, 5, interval, 51).unwrap();
    let (vpoly2, _) = v_even_poly(&seq2, 2).unwrap();
    worst = worst.max(rel_residual(
        &vpoly2.eval(z1).m,
        &v_even_raw(&seq2, 2, z1).unwrap().m,
    ));
    report(
        "9 (removable singularity at a)",
        worst <= 1e-6,
        format!("max deviation {worst:.3e}"),
    );
}

#[test]
fn criterion_10_brute_force_closed_forms() {
    let mut worst: f64 = 0.0;
    let mut track = |x: f64| worst = worst.max(x);
    let zs = [c(0.25, 0.0), c(-0.6, 0.4), c(1.5, -0.8)];

    // even count, n = 0: two-atom fixture truncated to m = 1
    let seq1 = two_atom_moments(1);
    let u1 = u_even(&seq1, 0).unwrap();
    let (v1, coupling1) = v_even_poly(&seq1, 0).unwrap();
    let swap = signature_matrices(1).1.data;
    for &z in &zs {
        let val = u1.eval(z);
        track((val.alpha()[(0, 0)] - (cr(1.0) - z * cr(2.0))).norm());
        track((val.beta()[(0, 0)] - cr(4.0)).norm());
        track((val.gamma()[(0, 0)] + (cr(1.0) - z) * z).norm());
        track((val.delta()[(0, 0)] - (cr(1.0) - z * cr(2.0))).norm());
        // V^{(1)} = [[1-2z, z(z-1)], [4, 1-2z]]
        let v = v1.eval(z);
        track((v.alpha()[(0, 0)] - (cr(1.0) - z * cr(2.0))).norm());
        track((v.beta()[(0, 0)] - z * (z - cr(1.0))).norm());
        track((v.gamma()[(0, 0)] - cr(4.0)).norm());
        track((v.delta()[(0, 0)] - (cr(1.0) - z * cr(2.0))).norm());
        // and the coupling closes: U = 𝔍 V 𝔍 𝔇
        let rhs = &swap * &v.m * &swap * &coupling1.dfrak;
        track(fro_norm(&(&val.m - rhs)));
    }

    // odd count, n = 1: fixture with m = 2
    let seq2 = two_atom_moments(2);
    let u2 = u_odd(&seq2, 1).unwrap();
    let (v2, _) = v_odd_poly(&seq2, 1).unwrap();
    for &z in &zs {
        let val = u2.eval(z);
        track((val.alpha()[(0, 0)] - (cr(1.0) - z * cr(8.0))).norm());
        track((val.beta()[(0, 0)] - (cr(14.0 / 3.0) - z * cr(16.0 / 3.0))).norm());
        track((val.gamma()[(0, 0)] - (z * z * cr(4.0) - z * cr(2.5))).norm());
        track((val.delta()[(0, 0)] - (cr(1.0) - z) * (cr(1.0) - z * cr(8.0 / 3.0))).norm());
        let v = v2.eval(z);
        track((v.alpha()[(0, 0)] - (cr(1.0) - z * cr(11.0 / 3.0) + z * z * cr(8.0 / 3.0))).norm());
        track((v.beta()[(0, 0)] - (z * z * cr(4.0) - z * cr(2.5))).norm());
        track((v.gamma()[(0, 0)] - (cr(14.0 / 3.0) - z * cr(16.0 / 3.0))).norm());
        track((v.delta()[(0, 0)] - (cr(1.0) - z * cr(8.0))).norm());
    }
    report(
        "10 (hand-expanded closed forms at n = 0, 1)",
        worst <= 1e-12,
        format!("max deviation {worst:.3e}"),
    );
}
