//! Secret-key rates for the jointly Gaussian observation model.
//!
//! The conditional mutual information between the two legitimate channel
//! estimates given the eavesdropper's estimate is computed along two
//! independent routes:
//!
//! * [`rate_direct`] assembles the stacked observation covariances and takes
//!   log-determinants. This is the ground-truth oracle for the module.
//! * [`rate_closed`] evaluates the factorized closed form that exploits the
//!   rank-one structure of the reflected-path covariances.
//!
//! Both are expressed in bits per observation vector. Determinants are
//! always taken in log-space through Hermitian eigenvalues; the covariance
//! entries sit around 1e-10 and plain determinant products would underflow.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::LN_2;

use crate::channel::{CascadeGains, GeometryVectors};
use crate::error::KeyRateError;
use crate::linalg::{hermitian_eigenvalues, hermitize, ln_det_hpd};
use crate::scenario::Scenario;

/// Noise and fading variances feeding the effective statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBudget {
    /// Direct BS-to-UT fading variance.
    pub fading_ut: f64,
    /// Direct BS-to-Eve fading variance.
    pub fading_eve: f64,
    /// Post-LS estimation noise at the legitimate ends (receiver noise / P).
    pub estimation_ut: f64,
    /// Post-LS estimation noise at the eavesdropper.
    pub estimation_eve: f64,
    /// Raw legitimate receiver noise, before the pilot-power division. Only
    /// the deliberate-fault diagnostics consume this.
    pub raw_noise_ut: f64,
}

impl NoiseBudget {
    pub fn of(scen: &Scenario) -> Self {
        Self {
            fading_ut: scen.var_bs_ut,
            fading_eve: scen.var_bs_eve,
            estimation_ut: scen.post_ls_noise_ut(),
            estimation_eve: scen.post_ls_noise_eve(),
            raw_noise_ut: scen.noise_ut,
        }
    }
}

/// Scalars that fully determine every covariance block for a fixed reflect
/// vector: reflected powers, their cross term, and effective variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveStatistics {
    /// BS antenna count M.
    pub antennas: usize,
    /// Reflected power toward the UT: c_ut * |v^T beta|^2.
    pub p_ut: f64,
    /// Reflected power toward the Eve: c_eve * |v^T psi|^2.
    pub p_eve: f64,
    /// Cross term of the two reflected paths; |p_cross|^2 = p_ut * p_eve.
    pub p_cross: Complex64,
    /// |gain_irs_ut * gain_bs_irs|^2.
    pub c_ut: f64,
    /// |gain_irs_eve * gain_bs_irs|^2.
    pub c_eve: f64,
    /// Per-entry variance of a legitimate estimate: estimation_ut + fading_ut.
    pub sigma_ut2: f64,
    /// Per-entry variance of the Eve estimate: estimation_eve + fading_eve.
    pub sigma_eve2: f64,
    /// Joint-block variance: estimation_ut + 2 * fading_ut.
    pub sigma_joint2: f64,
    pub fading_ut: f64,
    pub fading_eve: f64,
    pub estimation_ut: f64,
    pub estimation_eve: f64,
    pub raw_noise_ut: f64,
}

impl EffectiveStatistics {
    /// Build the statistics for a unit-modulus reflect vector `v`.
    pub fn new(
        v: &DVector<Complex64>,
        geo: &GeometryVectors,
        gains: &CascadeGains,
        noise: &NoiseBudget,
    ) -> Result<Self, KeyRateError> {
        for (index, z) in v.iter().enumerate() {
            let modulus = z.norm();
            if (modulus - 1.0).abs() > 1e-9 {
                return Err(KeyRateError::NonUnitModulus { index, modulus });
            }
        }
        let vt_beta: Complex64 = v.dot(&geo.beta);
        let vt_psi: Complex64 = v.dot(&geo.psi);
        let c_ut = (gains.irs_ut * gains.bs_irs).norm_sqr();
        let c_eve = (gains.irs_eve * gains.bs_irs).norm_sqr();
        let p_cross =
            gains.irs_ut * gains.irs_eve.conj() * gains.bs_irs.norm_sqr() * vt_beta * vt_psi.conj();
        Ok(Self {
            antennas: geo.r_bs.nrows(),
            p_ut: c_ut * vt_beta.norm_sqr(),
            p_eve: c_eve * vt_psi.norm_sqr(),
            p_cross,
            c_ut,
            c_eve,
            sigma_ut2: noise.estimation_ut + noise.fading_ut,
            sigma_eve2: noise.estimation_eve + noise.fading_eve,
            sigma_joint2: noise.estimation_ut + 2.0 * noise.fading_ut,
            fading_ut: noise.fading_ut,
            fading_eve: noise.fading_eve,
            estimation_ut: noise.estimation_ut,
            estimation_eve: noise.estimation_eve,
            raw_noise_ut: noise.raw_noise_ut,
        })
    }

    /// Statistics with the reflected path switched off (no IRS).
    pub fn no_reflection(antennas: usize, noise: &NoiseBudget) -> Self {
        Self {
            antennas,
            p_ut: 0.0,
            p_eve: 0.0,
            p_cross: Complex64::new(0.0, 0.0),
            c_ut: 0.0,
            c_eve: 0.0,
            sigma_ut2: noise.estimation_ut + noise.fading_ut,
            sigma_eve2: noise.estimation_eve + noise.fading_eve,
            sigma_joint2: noise.estimation_ut + 2.0 * noise.fading_ut,
            fading_ut: noise.fading_ut,
            fading_eve: noise.fading_eve,
            estimation_ut: noise.estimation_ut,
            estimation_eve: noise.estimation_eve,
            raw_noise_ut: noise.raw_noise_ut,
        }
    }

    /// Same statistics at a different reflected UT power (used by the
    /// no-eavesdropper maximization, whose optimum is phase alignment).
    pub fn with_p_ut(&self, p_ut: f64) -> Self {
        let mut s = *self;
        s.p_ut = p_ut;
        // keep the cross-term identity |p_cross|^2 = p_ut * p_eve intact
        let target = (p_ut * s.p_eve).sqrt();
        let norm = s.p_cross.norm();
        s.p_cross = if norm > 0.0 {
            s.p_cross * (target / norm)
        } else {
            Complex64::new(target, 0.0)
        };
        s
    }

    fn validate_variances(&self) -> Result<(), KeyRateError> {
        for (name, value) in [
            ("sigma_ut2", self.sigma_ut2),
            ("sigma_eve2", self.sigma_eve2),
            ("sigma_joint2", self.sigma_joint2),
            ("estimation_ut", self.estimation_ut),
            ("estimation_eve", self.estimation_eve),
        ] {
            if value < 0.0 {
                return Err(KeyRateError::NegativeVariance { name, value });
            }
        }
        Ok(())
    }
}

/// Convenience wrapper: statistics from a resolved scenario.
pub fn effective_stats(
    v: &DVector<Complex64>,
    geo: &GeometryVectors,
    gains: &CascadeGains,
    scen: &Scenario,
) -> Result<EffectiveStatistics, KeyRateError> {
    EffectiveStatistics::new(v, geo, gains, &NoiseBudget::of(scen))
}

/// All covariance blocks of the stacked observation vector, plus the stacked
/// matrices entering the mutual-information determinants.
#[derive(Debug, Clone)]
pub struct CovarianceSet {
    pub k_aa: DMatrix<Complex64>,
    pub k_bb: DMatrix<Complex64>,
    pub k_ee: DMatrix<Complex64>,
    pub k_ab: DMatrix<Complex64>,
    pub k_ae: DMatrix<Complex64>,
    /// 2M x 2M stack of (H_A, H_E).
    pub stack_ae: DMatrix<Complex64>,
    /// 2M x 2M stack of (H_B, H_E).
    pub stack_be: DMatrix<Complex64>,
    /// 3M x 3M stack of (H_A, H_B, H_E).
    pub stack_abe: DMatrix<Complex64>,
    /// M x M Eve-only block.
    pub stack_e: DMatrix<Complex64>,
}

fn place_block(target: &mut DMatrix<Complex64>, row: usize, col: usize, block: &DMatrix<Complex64>) {
    let m = block.nrows();
    for r in 0..m {
        for c in 0..m {
            target[(row * m + r, col * m + c)] = block[(r, c)];
        }
    }
}

fn stack(blocks: &[&[&DMatrix<Complex64>]]) -> DMatrix<Complex64> {
    let m = blocks[0][0].nrows();
    let n = blocks.len();
    let mut out = DMatrix::<Complex64>::zeros(n * m, n * m);
    for (i, row) in blocks.iter().enumerate() {
        for (j, block) in row.iter().enumerate() {
            place_block(&mut out, i, j, block);
        }
    }
    out
}

/// Assemble every covariance block from the effective statistics and the BS
/// correlation matrix; the stacks are Hermitian-symmetrized against rounding.
pub fn covariance_set(
    stats: &EffectiveStatistics,
    r_bs: &DMatrix<Complex64>,
) -> Result<CovarianceSet, KeyRateError> {
    stats.validate_variances()?;
    let m = stats.antennas;
    let eye = DMatrix::<Complex64>::identity(m, m);
    let real = |x: f64| Complex64::new(x, 0.0);

    let w_ut = r_bs.map(|z| z * real(stats.p_ut));
    let w_eve = r_bs.map(|z| z * real(stats.p_eve));
    let w_cross = r_bs.map(|z| z * stats.p_cross);

    let k_aa = &w_ut + eye.map(|z| z * real(stats.sigma_ut2));
    let k_bb = k_aa.clone();
    let k_ee = &w_eve + eye.map(|z| z * real(stats.sigma_eve2));
    let k_ab = &w_ut + eye.map(|z| z * real(stats.fading_ut));
    let k_ae = w_cross;
    let k_ea = k_ae.adjoint();

    let stack_ae = hermitize(&stack(&[&[&k_aa, &k_ae], &[&k_ea, &k_ee]]));
    let stack_be = hermitize(&stack(&[&[&k_bb, &k_ae], &[&k_ea, &k_ee]]));
    let stack_abe = hermitize(&stack(&[
        &[&k_aa, &k_ab, &k_ae],
        &[&k_ab, &k_bb, &k_ae],
        &[&k_ea, &k_ea, &k_ee],
    ]));
    let stack_e = hermitize(&k_ee);

    Ok(CovarianceSet { k_aa, k_bb, k_ee, k_ab, k_ae, stack_ae, stack_be, stack_abe, stack_e })
}

/// Conditional mutual information I(H_A; H_B | H_E) in bits, from the
/// stacked covariance determinants. Ground-truth oracle for this module.
pub fn rate_direct(cov: &CovarianceSet) -> Result<f64, KeyRateError> {
    let ld_ae = ln_det_hpd(&cov.stack_ae)?;
    let ld_be = ln_det_hpd(&cov.stack_be)?;
    let ld_e = ln_det_hpd(&cov.stack_e)?;
    let ld_abe = ln_det_hpd(&cov.stack_abe)?;
    Ok((ld_ae + ld_be - ld_e - ld_abe) / LN_2)
}

/// The four rank-one-plus-identity matrix terms whose eigenvalues carry the
/// whole rate: K_AA, K_EE, and the two Schur complements.
pub fn schur_matrix_terms(
    stats: &EffectiveStatistics,
    r_bs: &DMatrix<Complex64>,
) -> Result<[DMatrix<Complex64>; 4], KeyRateError> {
    let cov = covariance_set(stats, r_bs)?;
    let inv_aa = cov
        .k_aa
        .clone()
        .try_inverse()
        .ok_or(KeyRateError::Degenerate(crate::error::LinalgError::SingularMatrix {
            eigenvalue: 0.0,
        }))?;
    let inv_ee = cov
        .k_ee
        .clone()
        .try_inverse()
        .ok_or(KeyRateError::Degenerate(crate::error::LinalgError::SingularMatrix {
            eigenvalue: 0.0,
        }))?;
    let term_eve_given_a = &cov.k_ee - cov.k_ae.adjoint() * &inv_aa * &cov.k_ae;
    let m = stats.antennas;
    let eye = DMatrix::<Complex64>::identity(m, m);
    let two_w_ut = r_bs.map(|z| z * Complex64::new(2.0 * stats.p_ut, 0.0));
    let term_joint = &two_w_ut + eye.map(|z| z * Complex64::new(stats.sigma_joint2, 0.0))
        - (&cov.k_ae * &inv_ee * cov.k_ae.adjoint()).map(|z| z * Complex64::new(2.0, 0.0));
    Ok([
        hermitize(&cov.k_aa),
        hermitize(&cov.k_ee),
        hermitize(&term_eve_given_a),
        hermitize(&term_joint),
    ])
}

/// Closed-form eigenvalues of the four matrix terms: `(floor, shifted)` with
/// the floor appearing M-1 times.
pub fn schur_eigenvalue_closed_forms(stats: &EffectiveStatistics) -> [(f64, f64); 4] {
    let m = stats.antennas as f64;
    let (pu, pe) = (stats.p_ut, stats.p_eve);
    let (su, se, sn) = (stats.sigma_ut2, stats.sigma_eve2, stats.sigma_joint2);
    [
        (su, m * pu + su),
        (se, m * pe + se),
        (se, (se * su + se * m * pu + m * pe * su) / (su + m * pu)),
        (sn, (sn * se + sn * m * pe + 2.0 * m * pu * se) / (se + m * pe)),
    ]
}

/// Same rate as [`rate_direct`] but through the factorized determinants
/// (block determinant lemma on the stacks).
pub fn rate_direct_factorized(
    stats: &EffectiveStatistics,
    r_bs: &DMatrix<Complex64>,
) -> Result<f64, KeyRateError> {
    let [k_aa, k_ee, term3, term4] = schur_matrix_terms(stats, r_bs)?;
    let ld_ae = ln_det_hpd(&k_aa)? + ln_det_hpd(&term3)?;
    let ld_e = ln_det_hpd(&k_ee)?;
    let ld_abe =
        stats.antennas as f64 * stats.estimation_ut.ln() + ln_det_hpd(&k_ee)? + ln_det_hpd(&term4)?;
    Ok((2.0 * ld_ae - ld_e - ld_abe) / LN_2)
}

/// Which noise power enters the v-independent constant of the closed form.
/// `PostLs` is the self-consistent choice (it reproduces the determinant
/// oracle); `RawReceiver` exists only so the self-check suite can prove the
/// distinction matters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantTerm {
    PostLs,
    RawReceiver,
}

/// Factorized closed form of the secret-key rate, in bits.
pub fn rate_closed(stats: &EffectiveStatistics) -> f64 {
    rate_closed_with_constant(stats, ConstantTerm::PostLs)
}

/// Closed form with an explicit choice of the constant-term noise power.
pub fn rate_closed_with_constant(stats: &EffectiveStatistics, constant: ConstantTerm) -> f64 {
    let m = stats.antennas as f64;
    let (pu, pe) = (stats.p_ut, stats.p_eve);
    let (su, se, sn) = (stats.sigma_ut2, stats.sigma_eve2, stats.sigma_joint2);
    let numerator_root = se * m * pu + su * m * pe + se * su;
    let g1 = m * pe + se;
    let g2 = 2.0 * se * m * pu + sn * m * pe + se * sn;
    let noise = match constant {
        ConstantTerm::PostLs => stats.estimation_ut,
        ConstantTerm::RawReceiver => stats.raw_noise_ut,
    };
    let constant_bits = (2.0 * m - 2.0) * su.log2() - m * noise.log2() - (m - 1.0) * sn.log2();
    2.0 * numerator_root.log2() - g1.log2() - g2.log2() + constant_bits
}

/// Rate of the scheme without any IRS: independent of the reflect vector.
pub fn rate_no_irs(stats: &EffectiveStatistics) -> f64 {
    let m = stats.antennas as f64;
    2.0 * m * stats.sigma_ut2.log2() - m * (stats.estimation_ut * stats.sigma_joint2).log2()
}

/// Unconditioned mutual information I(H_A; H_B) in bits, via the 2M x 2M
/// stacked determinant (no eavesdropper blocks).
pub fn rate_no_eve(
    stats: &EffectiveStatistics,
    r_bs: &DMatrix<Complex64>,
) -> Result<f64, KeyRateError> {
    let cov = covariance_set(stats, r_bs)?;
    let stack_ab = hermitize(&stack(&[&[&cov.k_aa, &cov.k_ab], &[&cov.k_ab, &cov.k_bb]]));
    let ld_aa = ln_det_hpd(&cov.k_aa)?;
    Ok((2.0 * ld_aa - ln_det_hpd(&stack_ab)?) / LN_2)
}

/// Closed form of [`rate_no_eve`]; strictly increasing in `p_ut`, so the
/// no-eavesdropper optimum is reached by plain phase alignment.
pub fn rate_no_eve_closed(stats: &EffectiveStatistics) -> f64 {
    let m = stats.antennas as f64;
    let (pu, su, sn) = (stats.p_ut, stats.sigma_ut2, stats.sigma_joint2);
    2.0 * (m * pu + su).log2() + (2.0 * m - 2.0) * su.log2()
        - m * stats.estimation_ut.log2()
        - (m - 1.0) * sn.log2()
        - (2.0 * m * pu + sn).log2()
}

/// Relative reduction of the maximal rate caused by eavesdropper
/// correlation, in percent (negative when the correlation hurts).
pub fn rate_reduction(opt_with_eve: f64, opt_no_eve: f64) -> Result<f64, KeyRateError> {
    if opt_no_eve <= 0.0 {
        return Err(KeyRateError::NonPositiveReference(opt_no_eve));
    }
    Ok((opt_with_eve - opt_no_eve) / opt_no_eve * 100.0)
}

/// Eigenvalue diagnostics for one matrix term.
#[derive(Debug, Clone)]
pub struct TermEigenvalues {
    pub name: &'static str,
    pub eigenvalues: Vec<f64>,
}

/// Full rate report for one reflect vector.
#[derive(Debug, Clone)]
pub struct KeyRateReport {
    /// Closed-form rate in bits per observation vector.
    pub rate_closed: f64,
    /// Determinant-oracle rate in bits.
    pub rate_direct: f64,
    /// Rate without any IRS.
    pub rate_no_irs: f64,
    /// Unconditioned legitimate rate I(H_A; H_B).
    pub rate_no_eve: f64,
    /// Reduction of the maximal rate in percent, when both optima are known.
    pub reduction_pct: Option<f64>,
    /// Eigenvalue lists of the four determinant factors.
    pub diagnostics: Vec<TermEigenvalues>,
}

impl KeyRateReport {
    /// Evaluate every rate for the given statistics.
    pub fn evaluate(
        stats: &EffectiveStatistics,
        r_bs: &DMatrix<Complex64>,
    ) -> Result<Self, KeyRateError> {
        let cov = covariance_set(stats, r_bs)?;
        let terms = schur_matrix_terms(stats, r_bs)?;
        let names = ["legitimate", "eavesdropper", "eve_given_legitimate", "joint_given_eve"];
        let diagnostics = names
            .iter()
            .zip(terms.iter())
            .map(|(name, t)| TermEigenvalues { name, eigenvalues: hermitian_eigenvalues(t) })
            .collect();
        Ok(Self {
            rate_closed: rate_closed(stats),
            rate_direct: rate_direct(&cov)?,
            rate_no_irs: rate_no_irs(stats),
            rate_no_eve: rate_no_eve(stats, r_bs)?,
            reduction_pct: None,
            diagnostics,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{bs_steering_unnormalized, geometry_vectors};
    use crate::linalg::rel_err;
    use crate::rng::trial_rng;
    use crate::scenario::ScenarioConfig;
    use rand::Rng;
    use std::f64::consts::TAU;

    fn default_scen() -> Scenario {
        ScenarioConfig::default().resolve().unwrap()
    }

    fn random_unit<R: Rng>(l: usize, rng: &mut R) -> DVector<Complex64> {
        DVector::from_fn(l, |_, _| Complex64::from_polar(1.0, rng.gen_range(0.0..TAU)))
    }

    /// Synthetic but model-consistent statistics with O(1) variances.
    fn synthetic_stats<R: Rng>(m: usize, l: usize, rng: &mut R) -> (EffectiveStatistics, DMatrix<Complex64>) {
        let beta = random_unit(l, rng);
        let psi = random_unit(l, rng);
        let bar = bs_steering_unnormalized(rng.gen_range(0.0..TAU), m, 0.1);
        let conj_bar = bar.conjugate();
        let r_bs = &conj_bar * conj_bar.adjoint();
        let geo = GeometryVectors { beta, psi, r_bs: r_bs.clone() };
        let amp = |rng: &mut R| 10f64.powf(rng.gen_range(-0.5..0.5)) / (l as f64).sqrt();
        let gains = CascadeGains {
            bs_irs: Complex64::from_polar(amp(rng), rng.gen_range(0.0..TAU)),
            irs_ut: Complex64::from_polar(amp(rng), rng.gen_range(0.0..TAU)),
            irs_eve: Complex64::from_polar(amp(rng), rng.gen_range(0.0..TAU)),
        };
        let noise = NoiseBudget {
            fading_ut: 10f64.powf(rng.gen_range(-1.0..1.0)),
            fading_eve: 10f64.powf(rng.gen_range(-1.0..1.0)),
            estimation_ut: 10f64.powf(rng.gen_range(-1.0..1.0)),
            estimation_eve: 10f64.powf(rng.gen_range(-1.0..1.0)),
            raw_noise_ut: 1.0,
        };
        let v = random_unit(l, rng);
        (EffectiveStatistics::new(&v, &geo, &gains, &noise).unwrap(), geo.r_bs)
    }

    #[test]
    fn aligned_phases_reach_the_quadratic_maximum() {
        let scen = default_scen();
        let geo = geometry_vectors(&scen);
        let gains = crate::channel::sample_gains(&scen, &mut trial_rng(1, 0, 0));
        let v = geo.beta.map(|z| z.conj());
        let stats = effective_stats(&v, &geo, &gains, &scen).unwrap();
        let l = scen.irs_elements() as f64;
        assert!(rel_err(stats.p_ut, stats.c_ut * l * l) < 1e-12);
    }

    #[test]
    fn identical_geometry_vectors_tie_the_quadratic_forms() {
        let scen = default_scen();
        let mut geo = geometry_vectors(&scen);
        geo.psi = geo.beta.clone();
        let gains = crate::channel::sample_gains(&scen, &mut trial_rng(2, 0, 0));
        let mut rng = trial_rng(3, 0, 0);
        for _ in 0..20 {
            let v = random_unit(scen.irs_elements(), &mut rng);
            let stats = effective_stats(&v, &geo, &gains, &scen).unwrap();
            assert!(rel_err(stats.p_ut / stats.c_ut, stats.p_eve / stats.c_eve) < 1e-10);
        }
    }

    #[test]
    fn p_ut_matches_double_sum_oracle() {
        let scen = ScenarioConfig { irs_rows: 2, irs_cols: 3, ..Default::default() }
            .resolve()
            .unwrap();
        let geo = geometry_vectors(&scen);
        let gains = crate::channel::sample_gains(&scen, &mut trial_rng(4, 0, 0));
        let mut rng = trial_rng(5, 0, 0);
        let v = random_unit(6, &mut rng);
        let stats = effective_stats(&v, &geo, &gains, &scen).unwrap();
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..6 {
            for n in 0..6 {
                acc += v[m] * geo.beta[m] * (v[n] * geo.beta[n]).conj();
            }
        }
        assert!(rel_err(stats.p_ut, stats.c_ut * acc.re) < 1e-12);
        assert!(acc.im.abs() < 1e-12 * acc.re.abs());
    }

    #[test]
    fn cross_term_identity_holds_exactly() {
        let mut rng = trial_rng(6, 0, 0);
        for _ in 0..100 {
            let (stats, _) = synthetic_stats(3, 8, &mut rng);
            assert!(rel_err(stats.p_cross.norm_sqr(), stats.p_ut * stats.p_eve) < 1e-12);
        }
    }

    #[test]
    fn non_unit_modulus_is_rejected() {
        let scen = default_scen();
        let geo = geometry_vectors(&scen);
        let gains = crate::channel::sample_gains(&scen, &mut trial_rng(7, 0, 0));
        let mut v = DVector::from_element(scen.irs_elements(), Complex64::new(1.0, 0.0));
        v[3] = Complex64::new(1.5, 0.0);
        assert!(matches!(
            effective_stats(&v, &geo, &gains, &scen),
            Err(KeyRateError::NonUnitModulus { index: 3, .. })
        ));
    }

    #[test]
    fn covariance_blocks_reduce_to_noise_without_reflection() {
        let noise = NoiseBudget {
            fading_ut: 0.25,
            fading_eve: 0.5,
            estimation_ut: 0.75,
            estimation_eve: 0.3,
            raw_noise_ut: 0.75,
        };
        let stats = EffectiveStatistics::no_reflection(3, &noise);
        let bar = bs_steering_unnormalized(0.7, 3, 0.1).conjugate();
        let r_bs = &bar * bar.adjoint();
        let cov = covariance_set(&stats, &r_bs).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let expect = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                assert!((cov.k_aa[(r, c)] - expect * stats.sigma_ut2).norm() < 1e-15);
                assert!(cov.k_ae[(r, c)].norm() < 1e-20);
            }
        }
    }

    #[test]
    fn trace_of_eve_block_follows_linearity() {
        let mut rng = trial_rng(8, 0, 0);
        let (stats, r_bs) = synthetic_stats(4, 10, &mut rng);
        let cov = covariance_set(&stats, &r_bs).unwrap();
        let m = stats.antennas as f64;
        let trace: Complex64 = cov.k_ee.diagonal().iter().sum();
        assert!(rel_err(trace.re, m * stats.p_eve + m * stats.sigma_eve2) < 1e-12);
    }

    #[test]
    fn legitimate_block_eigenvalues_split_into_floor_and_shift() {
        let mut rng = trial_rng(9, 0, 0);
        let (stats, r_bs) = synthetic_stats(5, 6, &mut rng);
        let cov = covariance_set(&stats, &r_bs).unwrap();
        let eigs = hermitian_eigenvalues(&cov.k_aa);
        let m = stats.antennas as f64;
        for &e in &eigs[..stats.antennas - 1] {
            assert!(rel_err(e, stats.sigma_ut2) < 1e-10);
        }
        assert!(rel_err(eigs[stats.antennas - 1], m * stats.p_ut + stats.sigma_ut2) < 1e-10);
    }

    #[test]
    fn direct_rate_reduces_to_no_irs_formula() {
        let noise = NoiseBudget {
            fading_ut: 0.4,
            fading_eve: 0.2,
            estimation_ut: 0.1,
            estimation_eve: 0.05,
            raw_noise_ut: 0.1,
        };
        let stats = EffectiveStatistics::no_reflection(4, &noise);
        let bar = bs_steering_unnormalized(1.2, 4, 0.1).conjugate();
        let r_bs = &bar * bar.adjoint();
        let cov = covariance_set(&stats, &r_bs).unwrap();
        let direct = rate_direct(&cov).unwrap();
        let m = 4.0;
        let expect = 2.0 * m * stats.sigma_ut2.log2()
            - m * (stats.estimation_ut * stats.sigma_joint2).log2();
        assert!(rel_err(direct, expect) < 1e-10, "direct {direct} vs {expect}");
        assert!(rel_err(rate_no_irs(&stats), expect) < 1e-14);
    }

    #[test]
    fn conditioning_on_independent_eve_changes_nothing() {
        let mut rng = trial_rng(10, 0, 0);
        for _ in 0..10 {
            let (mut stats, r_bs) = synthetic_stats(3, 7, &mut rng);
            stats.p_cross = Complex64::new(0.0, 0.0);
            let cov = covariance_set(&stats, &r_bs).unwrap();
            let direct = rate_direct(&cov).unwrap();
            let no_eve = rate_no_eve(&stats, &r_bs).unwrap();
            assert!(rel_err(direct, no_eve) < 1e-9, "{direct} vs {no_eve}");
        }
    }

    #[test]
    fn closed_form_matches_determinant_oracle() {
        let mut rng = trial_rng(11, 0, 0);
        for i in 0..50 {
            let m = [1, 2, 4, 8][i % 4];
            let (stats, r_bs) = synthetic_stats(m, 12, &mut rng);
            let cov = covariance_set(&stats, &r_bs).unwrap();
            let direct = rate_direct(&cov).unwrap();
            let closed = rate_closed(&stats);
            assert!(
                rel_err(closed, direct) < 1e-9,
                "m={m} closed {closed} direct {direct}"
            );
        }
    }

    #[test]
    fn closed_form_hand_value_at_unit_parameters() {
        let noise = NoiseBudget {
            fading_ut: 0.0,
            fading_eve: 0.0,
            estimation_ut: 1.0,
            estimation_eve: 1.0,
            raw_noise_ut: 1.0,
        };
        let mut stats = EffectiveStatistics::no_reflection(1, &noise);
        stats.p_ut = 1.0;
        stats.p_eve = 1.0;
        stats.p_cross = Complex64::new(1.0, 0.0);
        // all sigma^2 = 1, p = 1, M = 1: rate = log2(9/8)
        assert!((rate_closed(&stats) - (9f64 / 8.0).log2()).abs() < 1e-12);
    }

    #[test]
    fn closed_form_reduces_to_no_irs_at_zero_power() {
        let mut rng = trial_rng(12, 0, 0);
        let (stats, _) = synthetic_stats(4, 9, &mut rng);
        let mut zeroed = stats;
        zeroed.p_ut = 0.0;
        zeroed.p_eve = 0.0;
        zeroed.p_cross = Complex64::new(0.0, 0.0);
        assert!(rel_err(rate_closed(&zeroed), rate_no_irs(&zeroed)) < 1e-12);
    }

    #[test]
    fn closed_form_is_continuous_as_eve_power_vanishes() {
        let mut rng = trial_rng(13, 0, 0);
        let (stats, _) = synthetic_stats(4, 9, &mut rng);
        let mut tiny = stats;
        let mut zero = stats;
        let scale = 1e-12 / stats.p_eve;
        tiny.p_eve *= scale;
        tiny.p_cross *= scale.sqrt();
        zero.p_eve = 0.0;
        zero.p_cross = Complex64::new(0.0, 0.0);
        assert!((rate_closed(&tiny) - rate_closed(&zero)).abs() < 1e-8);
    }

    #[test]
    fn closed_form_invariant_under_global_phase() {
        let scen = default_scen();
        let geo = geometry_vectors(&scen);
        let gains = crate::channel::sample_gains(&scen, &mut trial_rng(14, 0, 0));
        let mut rng = trial_rng(15, 0, 0);
        let v = random_unit(scen.irs_elements(), &mut rng);
        let base = rate_closed(&effective_stats(&v, &geo, &gains, &scen).unwrap());
        for _ in 0..10 {
            let phase = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
            let rotated = v.map(|z| z * phase);
            let r = rate_closed(&effective_stats(&rotated, &geo, &gains, &scen).unwrap());
            assert!((r - base).abs() < 1e-9 * base.abs().max(1.0));
        }
    }

    #[test]
    fn no_eve_rate_dominates_conditioned_rate() {
        let mut rng = trial_rng(16, 0, 0);
        for _ in 0..30 {
            let (stats, r_bs) = synthetic_stats(3, 6, &mut rng);
            let cov = covariance_set(&stats, &r_bs).unwrap();
            let with_eve = rate_direct(&cov).unwrap();
            let without = rate_no_eve(&stats, &r_bs).unwrap();
            assert!(
                without >= with_eve - 1e-9,
                "conditioning raised the rate: {with_eve} > {without}"
            );
        }
    }

    #[test]
    fn no_eve_rate_matches_independent_4x4_assembly() {
        let mut rng = trial_rng(17, 0, 0);
        let (stats, r_bs) = synthetic_stats(2, 5, &mut rng);
        let cov = covariance_set(&stats, &r_bs).unwrap();
        // independent assembly of the (H_A, H_B) stack, entry by entry
        let mut joint = DMatrix::<Complex64>::zeros(4, 4);
        for r in 0..2 {
            for c in 0..2 {
                joint[(r, c)] = cov.k_aa[(r, c)];
                joint[(r + 2, c + 2)] = cov.k_bb[(r, c)];
                joint[(r, c + 2)] = cov.k_ab[(r, c)];
                joint[(r + 2, c)] = cov.k_ab[(c, r)].conj();
            }
        }
        let expect = (2.0 * ln_det_hpd(&cov.k_aa).unwrap() - ln_det_hpd(&joint).unwrap()) / LN_2;
        let got = rate_no_eve(&stats, &r_bs).unwrap();
        assert!(rel_err(got, expect) < 1e-12);
    }

    #[test]
    fn no_eve_closed_form_matches_determinant_path() {
        let mut rng = trial_rng(18, 0, 0);
        for _ in 0..20 {
            let (stats, r_bs) = synthetic_stats(4, 8, &mut rng);
            let det_path = rate_no_eve(&stats, &r_bs).unwrap();
            let closed = rate_no_eve_closed(&stats);
            assert!(rel_err(closed, det_path) < 1e-9, "{closed} vs {det_path}");
        }
    }

    #[test]
    fn stacked_and_factorized_determinant_paths_agree() {
        let mut rng = trial_rng(19, 0, 0);
        for _ in 0..20 {
            let (stats, r_bs) = synthetic_stats(3, 6, &mut rng);
            let cov = covariance_set(&stats, &r_bs).unwrap();
            let stacked = rate_direct(&cov).unwrap();
            let factorized = rate_direct_factorized(&stats, &r_bs).unwrap();
            assert!(rel_err(stacked, factorized) < 1e-10, "{stacked} vs {factorized}");
        }
    }

    #[test]
    fn ae_and_be_determinants_coincide() {
        let mut rng = trial_rng(20, 0, 0);
        let (stats, r_bs) = synthetic_stats(4, 8, &mut rng);
        let cov = covariance_set(&stats, &r_bs).unwrap();
        assert_eq!(cov.stack_ae, cov.stack_be);
        assert_eq!(
            ln_det_hpd(&cov.stack_ae).unwrap(),
            ln_det_hpd(&cov.stack_be).unwrap()
        );
    }

    #[test]
    fn reduction_arithmetic_and_domain() {
        assert_eq!(rate_reduction(10.0, 10.0).unwrap(), 0.0);
        assert!((rate_reduction(9.0, 10.0).unwrap() + 10.0).abs() < 1e-12);
        assert!(rate_reduction(1.0, 0.0).is_err());
        assert!(rate_reduction(1.0, -2.0).is_err());
    }

    #[test]
    fn report_carries_eigenvalue_diagnostics() {
        let mut rng = trial_rng(21, 0, 0);
        let (stats, r_bs) = synthetic_stats(3, 6, &mut rng);
        let report = KeyRateReport::evaluate(&stats, &r_bs).unwrap();
        assert_eq!(report.diagnostics.len(), 4);
        assert!(report.diagnostics.iter().all(|d| d.eigenvalues.len() == 3));
        assert!(rel_err(report.rate_closed, report.rate_direct) < 1e-9);
    }

    #[test]
    fn degenerate_zero_noise_input_is_an_error() {
        let noise = NoiseBudget {
            fading_ut: 0.0,
            fading_eve: 0.0,
            estimation_ut: 0.0,
            estimation_eve: 0.0,
            raw_noise_ut: 0.0,
        };
        let stats = EffectiveStatistics::no_reflection(2, &noise);
        let bar = bs_steering_unnormalized(0.3, 2, 0.1).conjugate();
        let r_bs = &bar * bar.adjoint();
        let cov = covariance_set(&stats, &r_bs).unwrap();
        assert!(matches!(rate_direct(&cov), Err(KeyRateError::Degenerate(_))));
    }
}
