//! Deterministic scenario configuration: node geometry, path loss, power and
//! noise levels, array shapes, angle conventions, and the RNG seed.
//!
//! All dB/dBm quantities are converted to linear units exactly once, when a
//! [`ScenarioConfig`] is resolved into a [`Scenario`]. Downstream code only
//! ever sees watts and linear variances.
//!
//! # Angle convention
//!
//! This is the single place where the geometric convention is defined; the
//! steering-vector builders consume the resulting (elevation, azimuth) pairs
//! verbatim.
//!
//! * Global frame: positions in meters, z pointing up.
//! * The BS uniform linear array lies along the global +x axis. Its azimuth
//!   of departure toward the IRS satisfies `sin(azimuth) = u_x`, with `u` the
//!   unit BS-to-IRS direction; the angle is reported in [0, 2pi).
//! * The IRS uniform planar array lies in the horizontal plane with its row
//!   index running along +x and its column index along +y. For a unit
//!   direction `u` from the IRS toward a node:
//!   `azimuth = acos(u_y)` in [0, pi], and
//!   `elevation = asin(u_x / sin(azimuth))` in [-pi/2, pi/2]
//!   (zero when `sin(azimuth)` vanishes, since the row phase term is then
//!   independent of the elevation).
//!
//! Derived elevations can leave [0, pi] when a node sits on the negative-x
//! side of the IRS; only the sine of the elevation enters any phase, so this
//! is a pure reporting matter. Explicit angle overrides are range-checked
//! against the stricter [0, pi] (and [0, 2pi] for the BS azimuth).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::ConfigError;

/// Elevation/azimuth pair in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElevAz {
    pub elevation: f64,
    pub azimuth: f64,
}

/// Resolved angle set consumed by the channel builders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSet {
    /// Azimuth of departure at the BS toward the IRS.
    pub bs_aod_azimuth: f64,
    /// Arrival angles at the IRS for the BS-to-IRS link.
    pub irs_arrival: ElevAz,
    /// Departure angles at the IRS toward the UT.
    pub irs_to_ut: ElevAz,
    /// Departure angles at the IRS toward the Eve.
    pub irs_to_eve: ElevAz,
}

/// Optional explicit angle overrides; any field set here wins over the
/// geometry-derived value.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AngleOverrides {
    pub bs_aod_azimuth: Option<f64>,
    pub irs_aoa_elevation: Option<f64>,
    pub irs_aoa_azimuth: Option<f64>,
    pub irs_ut_aod_elevation: Option<f64>,
    pub irs_ut_aod_azimuth: Option<f64>,
    pub irs_eve_aod_elevation: Option<f64>,
    pub irs_eve_aod_azimuth: Option<f64>,
}

/// Raw scenario parameters, as read from a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub bs_pos: [f64; 3],
    pub ut_pos: [f64; 3],
    pub eve_pos: [f64; 3],
    pub irs_pos: [f64; 3],
    /// Constant path-loss term in dB at the 1 m reference distance.
    pub pl0_db: f64,
    pub pathloss_exp_bs_ut: f64,
    pub pathloss_exp_bs_eve: f64,
    pub pathloss_exp_bs_irs: f64,
    pub pathloss_exp_irs_ut: f64,
    pub pathloss_exp_irs_eve: f64,
    pub tx_power_dbm: f64,
    /// Receiver noise variance at the legitimate ends, dBm.
    pub noise_ut_dbm: f64,
    /// Receiver noise variance at the eavesdropper, dBm.
    pub noise_eve_dbm: f64,
    /// BS antenna count M.
    pub bs_antennas: usize,
    /// IRS grid rows X.
    pub irs_rows: usize,
    /// IRS grid columns Y.
    pub irs_cols: usize,
    /// Element spacing over wavelength, d/lambda.
    pub element_spacing_ratio: f64,
    pub seed: u64,
    pub angles: AngleOverrides,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            bs_pos: [5.0, 0.0, 20.0],
            ut_pos: [0.0, 100.0, 0.0],
            eve_pos: [0.0, 105.0, 0.0],
            irs_pos: [0.0, 100.0, 20.0],
            pl0_db: 30.0,
            pathloss_exp_bs_ut: 3.5,
            pathloss_exp_bs_eve: 3.5,
            pathloss_exp_bs_irs: 2.0,
            pathloss_exp_irs_ut: 2.0,
            pathloss_exp_irs_eve: 2.0,
            tx_power_dbm: 20.0,
            noise_ut_dbm: -80.0,
            noise_eve_dbm: -80.0,
            bs_antennas: 4,
            irs_rows: 4,
            irs_cols: 5,
            element_spacing_ratio: 0.1,
            seed: 1,
            angles: AngleOverrides::default(),
        }
    }
}

/// Path loss in dB at distance `d` meters: `pl0 + 10 c log10(d)`.
pub fn path_loss_db(d: f64, c: f64, pl0: f64) -> Result<f64, ConfigError> {
    if d <= 0.0 || !d.is_finite() {
        return Err(ConfigError::InvalidValue {
            key: "distance".into(),
            reason: format!("path loss needs a positive distance, got {d}"),
        });
    }
    Ok(pl0 + 10.0 * c * d.log10())
}

/// Linear link-gain variance implied by the path loss: `10^(-0.1 PL)`.
pub fn path_loss_variance(d: f64, c: f64, pl0: f64) -> Result<f64, ConfigError> {
    Ok(10f64.powf(-0.1 * path_loss_db(d, c, pl0)?))
}

/// dBm to watts.
pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Watts to dBm.
pub fn watt_to_dbm(watt: f64) -> f64 {
    10.0 * watt.log10() + 30.0
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn unit_direction(from: [f64; 3], to: [f64; 3]) -> [f64; 3] {
    let d = distance(from, to);
    [(to[0] - from[0]) / d, (to[1] - from[1]) / d, (to[2] - from[2]) / d]
}

/// Elevation/azimuth of a unit direction in the IRS array frame (rows along
/// +x, columns along +y). See the module docs for the convention.
fn elev_az_from_direction(u: [f64; 3]) -> ElevAz {
    let azimuth = u[1].clamp(-1.0, 1.0).acos();
    let sin_az = azimuth.sin();
    let elevation = if sin_az < 1e-12 {
        0.0
    } else {
        (u[0] / sin_az).clamp(-1.0, 1.0).asin()
    };
    ElevAz { elevation, azimuth }
}

/// Derive the full angle set from node geometry, honoring any explicit
/// overrides in the config.
pub fn derive_angles(config: &ScenarioConfig) -> Result<AngleSet, ConfigError> {
    for (a, b, name) in [
        (config.bs_pos, config.irs_pos, "bs/irs"),
        (config.irs_pos, config.ut_pos, "irs/ut"),
        (config.irs_pos, config.eve_pos, "irs/eve"),
    ] {
        if distance(a, b) <= 0.0 {
            return Err(ConfigError::InvalidScenario(format!(
                "coincident nodes ({name}) leave the link direction undefined"
            )));
        }
    }

    let u_bs_irs = unit_direction(config.bs_pos, config.irs_pos);
    let mut bs_az = u_bs_irs[0].clamp(-1.0, 1.0).asin();
    if bs_az < 0.0 {
        bs_az += 2.0 * std::f64::consts::PI;
    }

    let irs_arrival = elev_az_from_direction(unit_direction(config.irs_pos, config.bs_pos));
    let irs_to_ut = elev_az_from_direction(unit_direction(config.irs_pos, config.ut_pos));
    let irs_to_eve = elev_az_from_direction(unit_direction(config.irs_pos, config.eve_pos));

    let ov = &config.angles;
    let pick = |derived: ElevAz, e: Option<f64>, a: Option<f64>| ElevAz {
        elevation: e.unwrap_or(derived.elevation),
        azimuth: a.unwrap_or(derived.azimuth),
    };
    Ok(AngleSet {
        bs_aod_azimuth: ov.bs_aod_azimuth.unwrap_or(bs_az),
        irs_arrival: pick(irs_arrival, ov.irs_aoa_elevation, ov.irs_aoa_azimuth),
        irs_to_ut: pick(irs_to_ut, ov.irs_ut_aod_elevation, ov.irs_ut_aod_azimuth),
        irs_to_eve: pick(irs_to_eve, ov.irs_eve_aod_elevation, ov.irs_eve_aod_azimuth),
    })
}

/// Fully resolved scenario: linear units, derived link variances, angles.
///
/// Immutable after construction; safe to share read-only across workers.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// Transmit power in watts.
    pub tx_power: f64,
    /// Legitimate-side receiver noise variance in watts.
    pub noise_ut: f64,
    /// Eavesdropper receiver noise variance in watts.
    pub noise_eve: f64,
    /// Direct BS-to-UT fading variance.
    pub var_bs_ut: f64,
    /// Direct BS-to-Eve fading variance.
    pub var_bs_eve: f64,
    /// UT-to-Eve fading variance (reuses the direct-link exponent).
    pub var_ut_eve: f64,
    /// BS-to-IRS complex gain variance.
    pub var_bs_irs: f64,
    /// IRS-to-UT complex gain variance.
    pub var_irs_ut: f64,
    /// IRS-to-Eve complex gain variance.
    pub var_irs_eve: f64,
    pub angles: AngleSet,
}

impl ScenarioConfig {
    /// Parse a line-oriented `key=value` config file. `#` starts a comment;
    /// blank lines are ignored; unknown keys are errors; later assignments
    /// win over earlier ones.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_contents(&text)
    }

    /// Parse config text (same format as [`Self::from_file`]), starting from
    /// the default scenario.
    pub fn from_str_contents(text: &str) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::MalformedLine {
                line: idx + 1,
                text: raw.to_string(),
            })?;
            config.set_field(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    /// Apply one `key=value` override, e.g. from a `--set` flag.
    pub fn apply_set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment.split_once('=').ok_or(ConfigError::MalformedLine {
            line: 0,
            text: assignment.to_string(),
        })?;
        self.set_field(key.trim(), value.trim())
    }

    fn set_field(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn f64_of(key: &str, value: &str) -> Result<f64, ConfigError> {
            value.parse::<f64>().map_err(|e| ConfigError::InvalidValue {
                key: key.into(),
                reason: e.to_string(),
            })
        }
        fn usize_of(key: &str, value: &str) -> Result<usize, ConfigError> {
            value.parse::<usize>().map_err(|e| ConfigError::InvalidValue {
                key: key.into(),
                reason: e.to_string(),
            })
        }
        fn pos_of(key: &str, value: &str) -> Result<[f64; 3], ConfigError> {
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(ConfigError::InvalidValue {
                    key: key.into(),
                    reason: format!("expected `x,y,z`, got `{value}`"),
                });
            }
            Ok([f64_of(key, parts[0])?, f64_of(key, parts[1])?, f64_of(key, parts[2])?])
        }

        match key {
            "bs_pos" => self.bs_pos = pos_of(key, value)?,
            "ut_pos" => self.ut_pos = pos_of(key, value)?,
            "eve_pos" => self.eve_pos = pos_of(key, value)?,
            "irs_pos" => self.irs_pos = pos_of(key, value)?,
            "pl0_db" => self.pl0_db = f64_of(key, value)?,
            "pathloss_exp_bs_ut" => self.pathloss_exp_bs_ut = f64_of(key, value)?,
            "pathloss_exp_bs_eve" => self.pathloss_exp_bs_eve = f64_of(key, value)?,
            "pathloss_exp_bs_irs" => self.pathloss_exp_bs_irs = f64_of(key, value)?,
            "pathloss_exp_irs_ut" => self.pathloss_exp_irs_ut = f64_of(key, value)?,
            "pathloss_exp_irs_eve" => self.pathloss_exp_irs_eve = f64_of(key, value)?,
            "tx_power_dbm" => self.tx_power_dbm = f64_of(key, value)?,
            "noise_ut_dbm" => self.noise_ut_dbm = f64_of(key, value)?,
            "noise_eve_dbm" => self.noise_eve_dbm = f64_of(key, value)?,
            "bs_antennas" => self.bs_antennas = usize_of(key, value)?,
            "irs_rows" => self.irs_rows = usize_of(key, value)?,
            "irs_cols" => self.irs_cols = usize_of(key, value)?,
            "element_spacing_ratio" => self.element_spacing_ratio = f64_of(key, value)?,
            "seed" => {
                self.seed = value.parse::<u64>().map_err(|e| ConfigError::InvalidValue {
                    key: key.into(),
                    reason: e.to_string(),
                })?
            }
            "bs_aod_azimuth" => self.angles.bs_aod_azimuth = Some(f64_of(key, value)?),
            "irs_aoa_elevation" => self.angles.irs_aoa_elevation = Some(f64_of(key, value)?),
            "irs_aoa_azimuth" => self.angles.irs_aoa_azimuth = Some(f64_of(key, value)?),
            "irs_ut_aod_elevation" => self.angles.irs_ut_aod_elevation = Some(f64_of(key, value)?),
            "irs_ut_aod_azimuth" => self.angles.irs_ut_aod_azimuth = Some(f64_of(key, value)?),
            "irs_eve_aod_elevation" => {
                self.angles.irs_eve_aod_elevation = Some(f64_of(key, value)?)
            }
            "irs_eve_aod_azimuth" => self.angles.irs_eve_aod_azimuth = Some(f64_of(key, value)?),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// IRS element count L = X * Y.
    pub fn irs_elements(&self) -> usize {
        self.irs_rows * self.irs_cols
    }

    /// Validate and convert to linear units, deriving angles from geometry.
    pub fn resolve(&self) -> Result<Scenario, ConfigError> {
        if self.bs_antennas < 1 {
            return Err(ConfigError::InvalidScenario("bs_antennas must be >= 1".into()));
        }
        if self.irs_rows < 1 || self.irs_cols < 1 {
            return Err(ConfigError::InvalidScenario("irs grid must be at least 1x1".into()));
        }
        if self.element_spacing_ratio <= 0.0 {
            return Err(ConfigError::InvalidScenario(
                "element_spacing_ratio must be positive".into(),
            ));
        }
        for c in [
            self.pathloss_exp_bs_ut,
            self.pathloss_exp_bs_eve,
            self.pathloss_exp_bs_irs,
            self.pathloss_exp_irs_ut,
            self.pathloss_exp_irs_eve,
        ] {
            if c <= 0.0 {
                return Err(ConfigError::InvalidScenario(
                    "path-loss exponents must be positive".into(),
                ));
            }
        }
        let nodes = [
            ("bs", self.bs_pos),
            ("ut", self.ut_pos),
            ("eve", self.eve_pos),
            ("irs", self.irs_pos),
        ];
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                if distance(nodes[i].1, nodes[j].1) <= 0.0 {
                    return Err(ConfigError::InvalidScenario(format!(
                        "nodes `{}` and `{}` coincide",
                        nodes[i].0, nodes[j].0
                    )));
                }
            }
        }
        let pi = std::f64::consts::PI;
        let in_range = |v: Option<f64>, lo: f64, hi: f64, name: &str| -> Result<(), ConfigError> {
            if let Some(x) = v {
                if !(lo..=hi).contains(&x) {
                    return Err(ConfigError::InvalidValue {
                        key: name.into(),
                        reason: format!("must lie in [{lo}, {hi}], got {x}"),
                    });
                }
            }
            Ok(())
        };
        in_range(self.angles.bs_aod_azimuth, 0.0, 2.0 * pi, "bs_aod_azimuth")?;
        in_range(self.angles.irs_aoa_elevation, 0.0, pi, "irs_aoa_elevation")?;
        in_range(self.angles.irs_aoa_azimuth, 0.0, pi, "irs_aoa_azimuth")?;
        in_range(self.angles.irs_ut_aod_elevation, 0.0, pi, "irs_ut_aod_elevation")?;
        in_range(self.angles.irs_ut_aod_azimuth, 0.0, pi, "irs_ut_aod_azimuth")?;
        in_range(self.angles.irs_eve_aod_elevation, 0.0, pi, "irs_eve_aod_elevation")?;
        in_range(self.angles.irs_eve_aod_azimuth, 0.0, pi, "irs_eve_aod_azimuth")?;

        let angles = derive_angles(self)?;
        let pl0 = self.pl0_db;
        Ok(Scenario {
            tx_power: dbm_to_watt(self.tx_power_dbm),
            noise_ut: dbm_to_watt(self.noise_ut_dbm),
            noise_eve: dbm_to_watt(self.noise_eve_dbm),
            var_bs_ut: path_loss_variance(
                distance(self.bs_pos, self.ut_pos),
                self.pathloss_exp_bs_ut,
                pl0,
            )?,
            var_bs_eve: path_loss_variance(
                distance(self.bs_pos, self.eve_pos),
                self.pathloss_exp_bs_eve,
                pl0,
            )?,
            var_ut_eve: path_loss_variance(
                distance(self.ut_pos, self.eve_pos),
                self.pathloss_exp_bs_ut,
                pl0,
            )?,
            var_bs_irs: path_loss_variance(
                distance(self.bs_pos, self.irs_pos),
                self.pathloss_exp_bs_irs,
                pl0,
            )?,
            var_irs_ut: path_loss_variance(
                distance(self.irs_pos, self.ut_pos),
                self.pathloss_exp_irs_ut,
                pl0,
            )?,
            var_irs_eve: path_loss_variance(
                distance(self.irs_pos, self.eve_pos),
                self.pathloss_exp_irs_eve,
                pl0,
            )?,
            angles,
            config: self.clone(),
        })
    }

    /// Canonical text form: every key on its own line, fixed order. Used for
    /// config hashing and for echoing resolved configs into output files.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let pos = |p: [f64; 3]| format!("{},{},{}", p[0], p[1], p[2]);
        let _ = writeln!(s, "bs_pos={}", pos(self.bs_pos));
        let _ = writeln!(s, "ut_pos={}", pos(self.ut_pos));
        let _ = writeln!(s, "eve_pos={}", pos(self.eve_pos));
        let _ = writeln!(s, "irs_pos={}", pos(self.irs_pos));
        let _ = writeln!(s, "pl0_db={}", self.pl0_db);
        let _ = writeln!(s, "pathloss_exp_bs_ut={}", self.pathloss_exp_bs_ut);
        let _ = writeln!(s, "pathloss_exp_bs_eve={}", self.pathloss_exp_bs_eve);
        let _ = writeln!(s, "pathloss_exp_bs_irs={}", self.pathloss_exp_bs_irs);
        let _ = writeln!(s, "pathloss_exp_irs_ut={}", self.pathloss_exp_irs_ut);
        let _ = writeln!(s, "pathloss_exp_irs_eve={}", self.pathloss_exp_irs_eve);
        let _ = writeln!(s, "tx_power_dbm={}", self.tx_power_dbm);
        let _ = writeln!(s, "noise_ut_dbm={}", self.noise_ut_dbm);
        let _ = writeln!(s, "noise_eve_dbm={}", self.noise_eve_dbm);
        let _ = writeln!(s, "bs_antennas={}", self.bs_antennas);
        let _ = writeln!(s, "irs_rows={}", self.irs_rows);
        let _ = writeln!(s, "irs_cols={}", self.irs_cols);
        let _ = writeln!(s, "element_spacing_ratio={}", self.element_spacing_ratio);
        let _ = writeln!(s, "seed={}", self.seed);
        let ov = &self.angles;
        for (name, v) in [
            ("bs_aod_azimuth", ov.bs_aod_azimuth),
            ("irs_aoa_elevation", ov.irs_aoa_elevation),
            ("irs_aoa_azimuth", ov.irs_aoa_azimuth),
            ("irs_ut_aod_elevation", ov.irs_ut_aod_elevation),
            ("irs_ut_aod_azimuth", ov.irs_ut_aod_azimuth),
            ("irs_eve_aod_elevation", ov.irs_eve_aod_elevation),
            ("irs_eve_aod_azimuth", ov.irs_eve_aod_azimuth),
        ] {
            if let Some(x) = v {
                let _ = writeln!(s, "{name}={x}");
            }
        }
        s
    }

    /// FNV-1a hash of the canonical form, hex-encoded. Stamped into every
    /// experiment CSV so outputs are traceable to exact parameters.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in self.canonical_string().bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

impl Scenario {
    /// BS antenna count M.
    pub fn antennas(&self) -> usize {
        self.config.bs_antennas
    }

    /// IRS element count L.
    pub fn irs_elements(&self) -> usize {
        self.config.irs_elements()
    }

    /// Element spacing ratio d/lambda.
    pub fn spacing(&self) -> f64 {
        self.config.element_spacing_ratio
    }

    /// Post-LS estimation-noise variance at the legitimate ends (sigma1^2/P).
    pub fn post_ls_noise_ut(&self) -> f64 {
        self.noise_ut / self.tx_power
    }

    /// Post-LS estimation-noise variance at the eavesdropper (sigma2^2/P).
    pub fn post_ls_noise_eve(&self) -> f64 {
        self.noise_eve / self.tx_power
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn path_loss_reference_values() {
        assert_eq!(path_loss_db(1.0, 3.5, 30.0).unwrap(), 30.0);
        assert!((path_loss_db(10.0, 2.0, 30.0).unwrap() - 50.0).abs() < 1e-12);
        assert!((path_loss_db(100.0, 3.5, 30.0).unwrap() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn path_loss_rejects_nonpositive_distance() {
        assert!(path_loss_db(0.0, 2.0, 30.0).is_err());
        assert!(path_loss_db(-3.0, 2.0, 30.0).is_err());
    }

    #[test]
    fn dbm_round_trip_and_reference_power() {
        assert!((dbm_to_watt(20.0) - 0.1).abs() <= 1e-12 * 0.1);
        for dbm in [-80.0, -12.5, 0.0, 20.0, 33.3] {
            let rt = watt_to_dbm(dbm_to_watt(dbm));
            assert!((rt - dbm).abs() <= 1e-12 * dbm.abs().max(1.0), "{dbm} -> {rt}");
        }
    }

    #[test]
    fn default_resolves_with_expected_magnitudes() {
        let scen = ScenarioConfig::default().resolve().unwrap();
        assert_eq!(scen.antennas(), 4);
        assert_eq!(scen.irs_elements(), 20);
        assert!((scen.tx_power - 0.1).abs() < 1e-15);
        assert!((scen.noise_ut - 1e-11).abs() < 1e-23);
        // BS-UT distance is sqrt(10425) ~ 102.1 m at exponent 3.5
        let pl = path_loss_db(10425f64.sqrt(), 3.5, 30.0).unwrap();
        assert!((scen.var_bs_ut - 10f64.powf(-0.1 * pl)).abs() < 1e-25);
    }

    #[test]
    fn derived_angles_match_hand_geometry() {
        let scen = ScenarioConfig::default().resolve().unwrap();
        let a = scen.angles;
        // IRS sits directly above the UT: boundary elevation 0, azimuth pi/2.
        assert!(a.irs_to_ut.elevation.abs() < 1e-12);
        assert!((a.irs_to_ut.azimuth - PI / 2.0).abs() < 1e-12);
        // BS link: unit direction (5,-100,0)/sqrt(10025) from the IRS.
        let norm = 10025f64.sqrt();
        assert!((a.irs_arrival.azimuth - (-100.0 / norm).acos()).abs() < 1e-12);
        // asin departs from pi/2 at O(sqrt(ulp)) when its argument rounds below 1;
        // only sin(elevation) enters any phase, and that stays exact.
        assert!((a.irs_arrival.elevation - PI / 2.0).abs() < 1e-5);
        assert!((a.irs_arrival.elevation.sin() - 1.0).abs() < 1e-12);
        // BS departure azimuth keeps sin(phi) = -5/sqrt(10025), mapped to [0, 2pi).
        assert!((a.bs_aod_azimuth.sin() - (-5.0 / norm)).abs() < 1e-12);
        assert!(a.bs_aod_azimuth >= 0.0 && a.bs_aod_azimuth < 2.0 * PI);
    }

    #[test]
    fn swapping_ut_and_eve_swaps_angle_pairs() {
        let mut config = ScenarioConfig::default();
        let base = derive_angles(&config).unwrap();
        std::mem::swap(&mut config.ut_pos, &mut config.eve_pos);
        let swapped = derive_angles(&config).unwrap();
        assert_eq!(base.irs_to_ut, swapped.irs_to_eve);
        assert_eq!(base.irs_to_eve, swapped.irs_to_ut);
        assert_eq!(base.irs_arrival, swapped.irs_arrival);
    }

    #[test]
    fn overrides_win_over_derived_values() {
        let mut config = ScenarioConfig::default();
        config.angles.irs_ut_aod_elevation = Some(0.3);
        config.angles.bs_aod_azimuth = Some(1.25);
        let a = derive_angles(&config).unwrap();
        assert_eq!(a.irs_to_ut.elevation, 0.3);
        assert_eq!(a.bs_aod_azimuth, 1.25);
        // untouched fields still derive from geometry
        assert!((a.irs_to_ut.azimuth - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_nodes_are_rejected() {
        let mut config = ScenarioConfig::default();
        config.eve_pos = config.ut_pos;
        assert!(matches!(config.resolve(), Err(ConfigError::InvalidScenario(_))));
        config = ScenarioConfig::default();
        config.irs_pos = config.ut_pos;
        assert!(derive_angles(&config).is_err());
    }

    #[test]
    fn variance_is_monotone_in_distance() {
        let mut prev = f64::INFINITY;
        for d in [1.0, 5.0, 25.0, 125.0] {
            let v = path_loss_variance(d, 2.5, 30.0).unwrap();
            assert!(v < prev, "variance must strictly decrease with distance");
            prev = v;
        }
    }

    #[test]
    fn config_file_parsing_and_unknown_keys() {
        let text = "\
# comment line
tx_power_dbm = 23.0
bs_pos = 1, 2, 3   # trailing comment
irs_rows=2
irs_cols=10
";
        let config = ScenarioConfig::from_str_contents(text).unwrap();
        assert_eq!(config.tx_power_dbm, 23.0);
        assert_eq!(config.bs_pos, [1.0, 2.0, 3.0]);
        assert_eq!(config.irs_elements(), 20);

        let err = ScenarioConfig::from_str_contents("no_such_key=1\n");
        assert!(matches!(err, Err(ConfigError::UnknownKey(k)) if k == "no_such_key"));

        let mut config = ScenarioConfig::default();
        config.apply_set("bs_antennas=8").unwrap();
        assert_eq!(config.bs_antennas, 8);
        assert!(config.apply_set("bogus=1").is_err());
        assert!(config.apply_set("just-a-token").is_err());
    }

    #[test]
    fn hash_tracks_config_changes() {
        let base = ScenarioConfig::default();
        let mut other = base.clone();
        other.apply_set("seed=2").unwrap();
        assert_ne!(base.hash(), other.hash());
        assert_eq!(base.hash(), ScenarioConfig::default().hash());
    }

    #[test]
    fn angle_override_range_checks() {
        let mut config = ScenarioConfig::default();
        config.angles.irs_aoa_elevation = Some(3.5); // > pi
        assert!(config.resolve().is_err());
        let mut config = ScenarioConfig::default();
        config.angles.bs_aod_azimuth = Some(-0.1);
        assert!(config.resolve().is_err());
    }
}
