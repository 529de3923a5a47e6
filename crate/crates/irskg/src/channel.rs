//! One channel realization: steering vectors, the rank-one reflected links
//! through the IRS, Rayleigh direct links, and the geometry-only objects
//! (beta, psi, R_BS) that the rate analysis consumes.
//!
//! IRS elements are enumerated row-major: element `n = row * cols + col`
//! with `row in 0..X`, `col in 0..Y`. The same enumeration is used for
//! steering vectors and for the beta/psi phase-difference vectors, so the
//! reflect coefficient `v[n]` always addresses the same physical element.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::rng::complex_gaussian;
use crate::scenario::{ElevAz, Scenario};

/// Array response vector; entries have modulus `1/sqrt(len)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: DVector<Complex64>,
}

/// Planar-array phase exponent for element (row, col): the steering entry is
/// `exp(i * upa_phase)` with
/// `upa_phase = -2 pi s (row sin(elev) sin(az) + col cos(az))`.
fn upa_phase(angles: ElevAz, spacing: f64, row: usize, col: usize) -> f64 {
    -TAU * spacing
        * (row as f64 * angles.elevation.sin() * angles.azimuth.sin()
            + col as f64 * angles.azimuth.cos())
}

/// BS linear-array response: entry `m` is `exp(-i 2 pi s m sin(azimuth)) / sqrt(M)`.
pub fn bs_steering(azimuth: f64, antennas: usize, spacing: f64) -> SteeringVector {
    let norm = 1.0 / (antennas as f64).sqrt();
    SteeringVector {
        entries: DVector::from_fn(antennas, |m, _| {
            Complex64::from_polar(norm, -TAU * spacing * m as f64 * azimuth.sin())
        }),
    }
}

/// Unnormalized BS array response (unit-modulus entries, no `1/sqrt(M)`).
pub fn bs_steering_unnormalized(azimuth: f64, antennas: usize, spacing: f64) -> DVector<Complex64> {
    DVector::from_fn(antennas, |m, _| {
        Complex64::from_polar(1.0, -TAU * spacing * m as f64 * azimuth.sin())
    })
}

/// IRS planar-array response for an X-by-Y grid, row-major enumeration.
pub fn irs_steering(
    angles: ElevAz,
    rows: usize,
    cols: usize,
    spacing: f64,
) -> SteeringVector {
    let len = rows * cols;
    let norm = 1.0 / (len as f64).sqrt();
    SteeringVector {
        entries: DVector::from_fn(len, |n, _| {
            Complex64::from_polar(norm, upa_phase(angles, spacing, n / cols, n % cols))
        }),
    }
}

/// Complex scalar gains of the three cascade links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeGains {
    /// BS-to-IRS gain.
    pub bs_irs: Complex64,
    /// IRS-to-UT gain.
    pub irs_ut: Complex64,
    /// IRS-to-Eve gain.
    pub irs_eve: Complex64,
}

/// Direct-link Rayleigh fading draws.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectFading {
    /// BS-to-UT fading, one entry per BS antenna.
    pub bs_ut: DVector<Complex64>,
    /// BS-to-Eve fading, one entry per BS antenna.
    pub bs_eve: DVector<Complex64>,
    /// UT-to-Eve fading (never observed downstream; kept for completeness).
    pub ut_eve: Complex64,
}

/// One full draw of the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub fading: DirectFading,
    pub gains: CascadeGains,
    /// BS-to-IRS matrix, L x M, rank one.
    pub q: DMatrix<Complex64>,
    /// IRS-to-UT row gains (L entries).
    pub g_ut: DVector<Complex64>,
    /// IRS-to-Eve row gains (L entries).
    pub g_eve: DVector<Complex64>,
    /// Reflected BS-to-UT cascade diag(g_ut) * q, L x M.
    pub r_ut: DMatrix<Complex64>,
    /// Reflected BS-to-Eve cascade diag(g_eve) * q, L x M.
    pub r_eve: DMatrix<Complex64>,
}

/// Geometry-only objects entering the rate formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryVectors {
    /// Unit-modulus phase differences (arrival minus UT departure), length L.
    pub beta: DVector<Complex64>,
    /// Unit-modulus phase differences (arrival minus Eve departure), length L.
    pub psi: DVector<Complex64>,
    /// Rank-one BS spatial correlation matrix, trace M, unit diagonal.
    pub r_bs: DMatrix<Complex64>,
}

/// Draw the three cascade gains (in a fixed order) from their path-loss
/// variances.
pub fn sample_gains<R: Rng + ?Sized>(scen: &Scenario, rng: &mut R) -> CascadeGains {
    CascadeGains {
        bs_irs: complex_gaussian(rng, scen.var_bs_irs),
        irs_ut: complex_gaussian(rng, scen.var_irs_ut),
        irs_eve: complex_gaussian(rng, scen.var_irs_eve),
    }
}

/// Draw the direct-link fading (in a fixed order).
pub fn sample_fading<R: Rng + ?Sized>(scen: &Scenario, rng: &mut R) -> DirectFading {
    let m = scen.antennas();
    DirectFading {
        bs_ut: DVector::from_fn(m, |_, _| complex_gaussian(rng, scen.var_bs_ut)),
        bs_eve: DVector::from_fn(m, |_, _| complex_gaussian(rng, scen.var_bs_eve)),
        ut_eve: complex_gaussian(rng, scen.var_ut_eve),
    }
}

/// Assemble the deterministic reflected-link matrices for given gains and
/// fading. `q` is built as the rank-one steering outer product and the
/// cascades literally as `diag(g) * q`.
pub fn realization_from_parts(
    scen: &Scenario,
    gains: CascadeGains,
    fading: DirectFading,
) -> ChannelRealization {
    let m = scen.antennas();
    let l = scen.irs_elements();
    let s = scen.spacing();
    let (rows, cols) = (scen.config.irs_rows, scen.config.irs_cols);
    let a_irs = irs_steering(scen.angles.irs_arrival, rows, cols, s);
    let a_bs = bs_steering(scen.angles.bs_aod_azimuth, m, s);

    let scale = Complex64::new((m as f64 * l as f64).sqrt(), 0.0) * gains.bs_irs;
    let q = (&a_irs.entries * a_bs.entries.adjoint()).map(|z| z * scale);

    // Row gains: sqrt(L) * alpha * conj(steering entry), with the 1/sqrt(L)
    // normalization cancelling to leave unit-modulus phases times alpha.
    let row_gains = |alpha: Complex64, angles: ElevAz| {
        DVector::from_fn(l, |n, _| {
            alpha * Complex64::from_polar(1.0, -upa_phase(angles, s, n / cols, n % cols))
        })
    };
    let g_ut = row_gains(gains.irs_ut, scen.angles.irs_to_ut);
    let g_eve = row_gains(gains.irs_eve, scen.angles.irs_to_eve);

    let diag_mul = |g: &DVector<Complex64>| {
        let mut r = q.clone();
        for (row_idx, gain) in g.iter().enumerate() {
            for c in 0..m {
                r[(row_idx, c)] *= gain;
            }
        }
        r
    };
    let r_ut = diag_mul(&g_ut);
    let r_eve = diag_mul(&g_eve);

    ChannelRealization { fading, gains, q, g_ut, g_eve, r_ut, r_eve }
}

/// One full channel draw: gains first, then fading, then the deterministic
/// assembly. Bit-identical for identical (scenario, RNG state).
pub fn sample_realization<R: Rng + ?Sized>(scen: &Scenario, rng: &mut R) -> ChannelRealization {
    let gains = sample_gains(scen, rng);
    let fading = sample_fading(scen, rng);
    realization_from_parts(scen, gains, fading)
}

/// Build beta, psi and R_BS from the resolved scenario angles.
pub fn geometry_vectors(scen: &Scenario) -> GeometryVectors {
    let l = scen.irs_elements();
    let cols = scen.config.irs_cols;
    let s = scen.spacing();
    let arrival = scen.angles.irs_arrival;
    let phase_diff = |departure: ElevAz| {
        DVector::from_fn(l, |n, _| {
            let (row, col) = (n / cols, n % cols);
            Complex64::from_polar(
                1.0,
                upa_phase(arrival, s, row, col) - upa_phase(departure, s, row, col),
            )
        })
    };
    let beta = phase_diff(scen.angles.irs_to_ut);
    let psi = phase_diff(scen.angles.irs_to_eve);

    let bar = bs_steering_unnormalized(scen.angles.bs_aod_azimuth, scen.antennas(), s);
    let conj_bar = bar.conjugate();
    let r_bs = &conj_bar * conj_bar.adjoint();

    GeometryVectors { beta, psi, r_bs }
}

/// Serialize a realization to CSV (`kind,row,col,re,im`) for inspection.
pub fn dump_realization_csv(real: &ChannelRealization) -> String {
    let mut out = String::from("kind,row,col,re,im\n");
    let mut vec_rows = |name: &str, v: &DVector<Complex64>| {
        for (i, z) in v.iter().enumerate() {
            let _ = writeln!(out, "{name},0,{i},{:.17e},{:.17e}", z.re, z.im);
        }
    };
    vec_rows("h_bs_ut", &real.fading.bs_ut);
    vec_rows("h_bs_eve", &real.fading.bs_eve);
    let _ = writeln!(
        out,
        "h_ut_eve,0,0,{:.17e},{:.17e}",
        real.fading.ut_eve.re, real.fading.ut_eve.im
    );
    for (name, z) in [
        ("gain_bs_irs", real.gains.bs_irs),
        ("gain_irs_ut", real.gains.irs_ut),
        ("gain_irs_eve", real.gains.irs_eve),
    ] {
        let _ = writeln!(out, "{name},0,0,{:.17e},{:.17e}", z.re, z.im);
    }
    let mut vec_rows = |name: &str, v: &DVector<Complex64>| {
        for (i, z) in v.iter().enumerate() {
            let _ = writeln!(out, "{name},0,{i},{:.17e},{:.17e}", z.re, z.im);
        }
    };
    vec_rows("g_ut", &real.g_ut);
    vec_rows("g_eve", &real.g_eve);
    for (name, mat) in [("q", &real.q), ("r_ut", &real.r_ut), ("r_eve", &real.r_eve)] {
        for r in 0..mat.nrows() {
            for c in 0..mat.ncols() {
                let z = mat[(r, c)];
                let _ = writeln!(out, "{name},{r},{c},{:.17e},{:.17e}", z.re, z.im);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;
    use crate::scenario::ScenarioConfig;
    use std::f64::consts::PI;

    fn scen() -> Scenario {
        ScenarioConfig::default().resolve().unwrap()
    }

    fn random_unit_modulus<R: Rng>(l: usize, rng: &mut R) -> DVector<Complex64> {
        DVector::from_fn(l, |_, _| Complex64::from_polar(1.0, rng.gen_range(0.0..TAU)))
    }

    #[test]
    fn bs_steering_closed_cases() {
        let single = bs_steering(1.234, 1, 0.1);
        assert_eq!(single.entries.len(), 1);
        assert!((single.entries[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        let broadside = bs_steering(0.0, 5, 0.1);
        for z in broadside.entries.iter() {
            assert!((z - Complex64::new(1.0 / 5f64.sqrt(), 0.0)).norm() < 1e-15);
        }

        let two = bs_steering(PI / 2.0, 2, 0.1);
        let expect = Complex64::from_polar(1.0 / 2f64.sqrt(), -0.2 * PI);
        assert!((two.entries[0].re - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((two.entries[1] - expect).norm() < 1e-15);
    }

    #[test]
    fn irs_steering_closed_cases() {
        let single = irs_steering(ElevAz { elevation: 0.7, azimuth: 0.9 }, 1, 1, 0.1);
        assert!((single.entries[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        // cos(azimuth) = 0 and sin(elevation) = 0 leave every phase at zero
        let flat = irs_steering(ElevAz { elevation: 0.0, azimuth: PI / 2.0 }, 3, 4, 0.1);
        for z in flat.entries.iter() {
            assert!((z - Complex64::new(1.0 / 12f64.sqrt(), 0.0)).norm() < 1e-14);
        }

        let two = irs_steering(ElevAz { elevation: PI / 2.0, azimuth: PI / 2.0 }, 2, 1, 0.1);
        let expect = Complex64::from_polar(1.0 / 2f64.sqrt(), -0.2 * PI);
        assert!((two.entries[1] - expect).norm() < 1e-15);
    }

    #[test]
    fn steering_norms_are_unit() {
        for (m, x, y) in [(1usize, 1usize, 1usize), (4, 4, 5), (8, 2, 3)] {
            let a = bs_steering(0.77, m, 0.1);
            assert!((a.entries.norm() - 1.0).abs() < 1e-12);
            let b = irs_steering(ElevAz { elevation: 0.3, azimuth: 1.1 }, x, y, 0.1);
            assert!((b.entries.norm() - 1.0).abs() < 1e-12);
            let lm = 1.0 / ((x * y) as f64).sqrt();
            assert!(b.entries.iter().all(|z| (z.norm() - lm).abs() < 1e-12));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let scen = scen();
        let a = sample_realization(&scen, &mut trial_rng(42, 0, 0));
        let b = sample_realization(&scen, &mut trial_rng(42, 0, 0));
        assert_eq!(a, b);
        let c = sample_realization(&scen, &mut trial_rng(43, 0, 0));
        assert_ne!(a, c);
    }

    #[test]
    fn q_is_rank_one_every_draw() {
        let scen = scen();
        let mut rng = trial_rng(7, 0, 0);
        for _ in 0..10 {
            let real = sample_realization(&scen, &mut rng);
            let sv = real.q.clone().svd(false, false).singular_values;
            let mut vals: Vec<f64> = sv.iter().copied().collect();
            vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
            assert!(vals[1] < 1e-10 * vals[0], "second singular value {}", vals[1]);
        }
    }

    #[test]
    fn direct_fading_variance_matches_path_loss() {
        let scen = scen();
        let mut rng = trial_rng(99, 1, 0);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let f = sample_fading(&scen, &mut rng);
            acc += f.bs_ut.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        let sample_var = acc / (n * scen.antennas()) as f64;
        let rel = (sample_var - scen.var_bs_ut).abs() / scen.var_bs_ut;
        assert!(rel < 0.02, "sample variance off by {rel:.4}");
    }

    #[test]
    fn geometry_vectors_are_unit_modulus_with_rank_one_r_bs() {
        let scen = scen();
        let geo = geometry_vectors(&scen);
        assert!(geo.beta.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        assert!(geo.psi.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));

        let m = scen.antennas() as f64;
        let trace: Complex64 = geo.r_bs.diagonal().iter().sum();
        assert!((trace.re - m).abs() < 1e-12 && trace.im.abs() < 1e-12);
        for d in geo.r_bs.diagonal().iter() {
            assert!((d.re - 1.0).abs() < 1e-12 && d.im.abs() < 1e-14);
        }
        let eigs = crate::linalg::hermitian_eigenvalues(&geo.r_bs);
        assert!((eigs.last().unwrap() - m).abs() < 1e-10);
        for &e in &eigs[..eigs.len() - 1] {
            assert!(e.abs() < 1e-10 * m);
        }
    }

    #[test]
    fn identical_ut_and_eve_angles_give_identical_vectors() {
        let mut config = ScenarioConfig::default();
        config.eve_pos = [0.0, 100.0, -5.0]; // same direction from the IRS as the UT
        let scen = config.resolve().unwrap();
        let geo = geometry_vectors(&scen);
        assert_eq!(scen.angles.irs_to_ut, scen.angles.irs_to_eve);
        assert_eq!(geo.beta, geo.psi);
    }

    #[test]
    fn swapping_angle_sets_swaps_beta_and_psi() {
        let mut config = ScenarioConfig::default();
        let geo = geometry_vectors(&config.clone().resolve().unwrap());
        std::mem::swap(&mut config.ut_pos, &mut config.eve_pos);
        let swapped = geometry_vectors(&config.resolve().unwrap());
        assert_eq!(geo.beta, swapped.psi);
        assert_eq!(geo.psi, swapped.beta);
    }

    #[test]
    fn cascade_shortcut_matches_matrix_product() {
        let scen = scen();
        let geo = geometry_vectors(&scen);
        let a_bs = bs_steering(scen.angles.bs_aod_azimuth, scen.antennas(), scen.spacing());
        let mut rng = trial_rng(5, 2, 0);
        for _ in 0..100 {
            let real = sample_realization(&scen, &mut rng);
            let v = random_unit_modulus(scen.irs_elements(), &mut rng);

            // direct evaluation of v^T (diag(g_ut) q)
            let direct = real.r_ut.transpose() * &v;

            // shortcut: sqrt(M) alpha_gu alpha_q (v^T beta) conj(a_bs)
            let vt_beta: Complex64 = v.dot(&geo.beta);
            let coeff = Complex64::new((scen.antennas() as f64).sqrt(), 0.0)
                * real.gains.irs_ut
                * real.gains.bs_irs
                * vt_beta;
            let shortcut = a_bs.entries.conjugate().map(|z| z * coeff);

            let num = (&direct - &shortcut).norm();
            let den = direct.norm();
            assert!(num <= 1e-10 * den, "cascade mismatch {num:e} vs scale {den:e}");
        }
    }

    #[test]
    fn dump_csv_has_expected_shape() {
        let scen = scen();
        let real = sample_realization(&scen, &mut trial_rng(1, 3, 0));
        let csv = dump_realization_csv(&real);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "kind,row,col,re,im");
        let m = scen.antennas();
        let l = scen.irs_elements();
        // 2 fading vectors + scalar + 3 gains + 2 row-gain vectors + 3 LxM matrices
        let expected = 1 + 2 * m + 1 + 3 + 2 * l + 3 * l * m;
        assert_eq!(lines.len(), expected);
    }
}
