//! Simulation and optimization toolkit for physical-layer secret key
//! generation assisted by an intelligent reflecting surface (IRS) in a
//! multi-antenna network.
//!
//! The crate models a TDD system where an M-antenna base station and a
//! single-antenna user terminal derive symmetric keys from reciprocal
//! channel estimates while a single-antenna eavesdropper listens. It
//! provides:
//!
//! * [`scenario`] — deterministic configuration: geometry, path loss,
//!   power/noise budgets, array shapes, angle conventions, seeding.
//! * [`channel`] — synthesis of one channel realization and of the
//!   geometry objects feeding the rate analysis.
//! * [`keyrate`] — secret-key rates via Gaussian mutual-information
//!   determinants, a factorized closed form, and the no-IRS /
//!   no-eavesdropper variants.
//! * [`optimizer`] — IRS phase-shift design: semidefinite lifting,
//!   Dinkelbach fractional iterations, tangent-surrogate ascent,
//!   Gaussian randomization, plus brute-force and random baselines.
//! * [`probing`] — the pilot exchange producing per-trial channel
//!   estimates at both ends and at the eavesdropper.
//! * [`quantize`] — guardband quantization of observations into key bits
//!   and the bit disagreement ratio between the two parties.
//! * [`experiment`] — seeded sweep runners and CSV/SVG emission.
//! * [`oracles`] — self-check suite tying the implementations to
//!   independent references.

pub mod channel;
pub mod error;
pub mod keyrate;
pub mod optimizer;
pub mod linalg;
pub mod rng;
pub mod scenario;
