//! Scenario configuration, named presets and the flat key-value file format.
//!
//! Config files are TOML with flat keys named after the model parameters
//! (`T`, `B`, `C`, `A1_0`, `gamma_RR`, `phi`, ...). A file may name a
//! `preset`; keys given explicitly override the preset. `seed` is mandatory.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::ledger::ReserveBase;
use crate::stochastics::TriangularParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LendingBehaviour {
    /// Target total deposits of `reserve / gamma`.
    MoneyMultiplication,
    /// Lend reserves held above `gamma * deposits`.
    FractionalReserve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchingMode {
    Exogenous,
    Endogenous,
}

/// Named scenario presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig1Left,
    Fig1Right,
    Fig2Left,
    Fig2Mid,
    Fig2Right,
    BaselinePerfect,
    BaselineSmooth,
    BaselineDistressed,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Fig1Left,
        Preset::Fig1Right,
        Preset::Fig2Left,
        Preset::Fig2Mid,
        Preset::Fig2Right,
        Preset::BaselinePerfect,
        Preset::BaselineSmooth,
        Preset::BaselineDistressed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1Left => "fig1_left",
            Preset::Fig1Right => "fig1_right",
            Preset::Fig2Left => "fig2_left",
            Preset::Fig2Mid => "fig2_mid",
            Preset::Fig2Right => "fig2_right",
            Preset::BaselinePerfect => "baseline_perfect",
            Preset::BaselineSmooth => "baseline_smooth",
            Preset::BaselineDistressed => "baseline_distressed",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Fig1Left => "narrow base, fractional reserve, no customer repayment, omega=0.5",
            Preset::Fig1Right => "narrow base, money multiplication, no customer repayment, omega=0.5",
            Preset::Fig2Left => "narrow base, fractional reserve, no customer or interbank repayment",
            Preset::Fig2Mid => "broad base, fractional reserve, no customer or interbank repayment",
            Preset::Fig2Right => "broad base, money multiplication, no customer or interbank repayment",
            Preset::BaselinePerfect => "baseline calibration, perfect pooling (phi=0)",
            Preset::BaselineSmooth => "baseline calibration, smooth pooling (phi=0.4)",
            Preset::BaselineDistressed => "baseline calibration, distressed pooling (phi=0.8)",
        }
    }

    /// Parameter values of the preset under `seed`.
    pub fn config(self, seed: u64) -> ScenarioConfig {
        let mut c = match self {
            Preset::Fig1Left | Preset::Fig1Right | Preset::Fig2Left | Preset::Fig2Mid | Preset::Fig2Right => {
                ScenarioConfig::benchmark(seed)
            }
            _ => ScenarioConfig::baseline(seed),
        };
        c.preset = Some(self);
        match self {
            Preset::Fig1Left | Preset::Fig1Right => {
                c.reserve_base = ReserveBase::Narrow;
                c.repayment = TriangularParams::point(0.0);
                c.omega = 0.5;
                c.phi = 0.0;
                c.lending = if self == Preset::Fig1Left {
                    LendingBehaviour::FractionalReserve
                } else {
                    LendingBehaviour::MoneyMultiplication
                };
            }
            Preset::Fig2Left | Preset::Fig2Mid | Preset::Fig2Right => {
                c.reserve_base = if self == Preset::Fig2Left {
                    ReserveBase::Narrow
                } else {
                    ReserveBase::Broad
                };
                c.lending = if self == Preset::Fig2Right {
                    LendingBehaviour::MoneyMultiplication
                } else {
                    LendingBehaviour::FractionalReserve
                };
                c.repayment = TriangularParams::point(0.0);
                c.omega = 1.0;
                c.phi = 0.0;
            }
            Preset::BaselinePerfect => c.phi = 0.0,
            Preset::BaselineSmooth => c.phi = 0.4,
            Preset::BaselineDistressed => c.phi = 0.8,
        }
        c
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Distributions of the per-period reference rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateLaws {
    pub a1: TriangularParams,
    pub a2: TriangularParams,
    pub l1: TriangularParams,
    pub l2: TriangularParams,
    /// System-wide interbank rate, applied to both A3 and L3.
    pub interbank: TriangularParams,
    pub l5_spread: f64,
}

impl RateLaws {
    /// Point masses at the benchmark values.
    pub fn benchmark() -> Self {
        Self {
            a1: TriangularParams::point(0.01),
            a2: TriangularParams::point(0.03),
            l1: TriangularParams::point(0.01),
            l2: TriangularParams::point(0.01),
            interbank: TriangularParams::point(0.015),
            l5_spread: 0.03,
        }
    }

    /// Triangular laws of the baseline calibration.
    pub fn baseline() -> Self {
        let tri = |l, p, u| TriangularParams::new(l, p, u).expect("static params are ordered");
        Self {
            a1: tri(0.005, 0.01, 0.015),
            a2: tri(0.02, 0.03, 0.04),
            l1: tri(0.005, 0.01, 0.015),
            l2: tri(0.005, 0.01, 0.015),
            interbank: tri(0.005, 0.015, 0.025),
            l5_spread: 0.03,
        }
    }

    pub fn zero() -> Self {
        Self {
            a1: TriangularParams::point(0.0),
            a2: TriangularParams::point(0.0),
            l1: TriangularParams::point(0.0),
            l2: TriangularParams::point(0.0),
            interbank: TriangularParams::point(0.0),
            l5_spread: 0.0,
        }
    }
}

/// Every model parameter plus the scenario switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    pub seed: u64,
    #[serde(rename = "T")]
    pub periods: usize,
    #[serde(rename = "B")]
    pub banks: usize,
    #[serde(rename = "C")]
    pub customers: usize,
    #[serde(rename = "A1_0")]
    pub base_money: f64,
    #[serde(rename = "A4_0")]
    pub total_equity: f64,
    #[serde(rename = "gamma_RR")]
    pub gamma_rr: f64,
    /// Nonnegative noise added to `gamma_RR` to form each bank's target ratio.
    #[serde(rename = "gamma_TR_noise")]
    pub gamma_tr_noise: TriangularParams,
    pub lending: LendingBehaviour,
    pub reserve_base: ReserveBase,
    /// Absorption law (share of potential lending actually granted).
    #[serde(rename = "theta")]
    pub absorption: TriangularParams,
    /// Customer loan repayment ratio law.
    #[serde(rename = "psi")]
    pub repayment: TriangularParams,
    pub omega: f64,
    pub phi: f64,
    pub matching: MatchingMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub xi1: f64,
    pub xi2: f64,
    #[serde(rename = "r_A1")]
    pub r_a1: TriangularParams,
    #[serde(rename = "r_A2")]
    pub r_a2: TriangularParams,
    #[serde(rename = "r_L1")]
    pub r_l1: TriangularParams,
    #[serde(rename = "r_L2")]
    pub r_l2: TriangularParams,
    /// Interbank rate law, shared by A3 and L3.
    #[serde(rename = "r_IB")]
    pub r_interbank: TriangularParams,
    #[serde(rename = "L5_spread")]
    pub l5_spread: f64,
    pub fixed_payment_matrix: bool,
    pub transfer_on_issue: bool,
    pub relax_target_base: bool,
}

const KNOWN_KEYS: &[&str] = &[
    "preset",
    "seed",
    "T",
    "B",
    "C",
    "A1_0",
    "A4_0",
    "gamma_RR",
    "gamma_TR_noise",
    "lending",
    "reserve_base",
    "theta",
    "psi",
    "omega",
    "phi",
    "matching",
    "alpha",
    "lambda",
    "xi1",
    "xi2",
    "r_A1",
    "r_A2",
    "r_L1",
    "r_L2",
    "r_IB",
    "L5_spread",
    "fixed_payment_matrix",
    "transfer_on_issue",
    "relax_target_base",
];

impl ScenarioConfig {
    /// Baseline calibration column: broad reserve base, money multiplication,
    /// perfect pooling, exogenous matching.
    pub fn baseline(seed: u64) -> Self {
        let rates = RateLaws::baseline();
        let tri = |l, p, u| TriangularParams::new(l, p, u).expect("static params are ordered");
        Self {
            preset: None,
            seed,
            periods: 50,
            banks: 10,
            customers: 1000,
            base_money: 1e9,
            total_equity: 1e8,
            gamma_rr: 0.1,
            gamma_tr_noise: TriangularParams::point(0.0),
            lending: LendingBehaviour::MoneyMultiplication,
            reserve_base: ReserveBase::Broad,
            absorption: tri(0.0, 0.8, 1.0),
            repayment: tri(0.0, 0.3, 1.0),
            omega: 0.5,
            phi: 0.0,
            matching: MatchingMode::Exogenous,
            alpha: None,
            lambda: None,
            xi1: 0.1,
            xi2: 0.1,
            r_a1: rates.a1,
            r_a2: rates.a2,
            r_l1: rates.l1,
            r_l2: rates.l2,
            r_interbank: rates.interbank,
            l5_spread: rates.l5_spread,
            fixed_payment_matrix: false,
            transfer_on_issue: true,
            relax_target_base: false,
        }
    }

    /// Benchmark column: point-mass rates and (0, 0.5, 1) laws.
    pub fn benchmark(seed: u64) -> Self {
        let rates = RateLaws::benchmark();
        let half = TriangularParams::new(0.0, 0.5, 1.0).expect("ordered");
        Self {
            absorption: half,
            repayment: half,
            r_a1: rates.a1,
            r_a2: rates.a2,
            r_l1: rates.l1,
            r_l2: rates.l2,
            r_interbank: rates.interbank,
            l5_spread: rates.l5_spread,
            ..Self::baseline(seed)
        }
    }

    pub fn rate_laws(&self) -> RateLaws {
        RateLaws {
            a1: self.r_a1,
            a2: self.r_a2,
            l1: self.r_l1,
            l2: self.r_l2,
            interbank: self.r_interbank,
            l5_spread: self.l5_spread,
        }
    }

    pub fn set_rate_laws(&mut self, laws: RateLaws) {
        self.r_a1 = laws.a1;
        self.r_a2 = laws.a2;
        self.r_l1 = laws.l1;
        self.r_l2 = laws.l2;
        self.r_interbank = laws.interbank;
        self.l5_spread = laws.l5_spread;
    }

    /// `(alpha, lambda)` when endogenous partner search is selected.
    pub fn partner_search(&self) -> Option<(f64, f64)> {
        match self.matching {
            MatchingMode::Exogenous => None,
            MatchingMode::Endogenous => Some((self.alpha.unwrap_or(f64::NAN), self.lambda.unwrap_or(f64::NAN))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(key: &str, reason: impl Into<String>) -> Error {
            Error::InvalidConfig {
                key: key.to_string(),
                reason: reason.into(),
            }
        }
        fn unit(key: &str, v: f64) -> Result<()> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(bad(key, format!("must lie in [0, 1], got {v}")))
            }
        }
        fn unit_law(key: &str, p: &TriangularParams) -> Result<()> {
            if p.lower() >= 0.0 && p.upper() <= 1.0 {
                Ok(())
            } else {
                Err(bad(key, "support must lie in [0, 1]"))
            }
        }
        if self.seed > i64::MAX as u64 {
            return Err(bad("seed", "must not exceed 9223372036854775807"));
        }
        if self.banks < 2 {
            return Err(bad("B", "at least two banks are required"));
        }
        if self.customers < self.banks {
            return Err(bad("C", "need at least one customer per bank"));
        }
        if !(self.base_money > 0.0 && self.base_money.is_finite()) {
            return Err(bad("A1_0", "must be positive and finite"));
        }
        if !(self.total_equity > 0.0 && self.total_equity.is_finite()) {
            return Err(bad("A4_0", "must be positive and finite"));
        }
        if !(self.gamma_rr > 0.0 && self.gamma_rr <= 1.0) {
            return Err(bad("gamma_RR", format!("must lie in (0, 1], got {}", self.gamma_rr)));
        }
        if self.gamma_tr_noise.lower() < 0.0 {
            return Err(bad("gamma_TR_noise", "noise must be nonnegative"));
        }
        unit_law("theta", &self.absorption)?;
        unit_law("psi", &self.repayment)?;
        unit("omega", self.omega)?;
        unit("phi", self.phi)?;
        unit("xi1", self.xi1)?;
        unit("xi2", self.xi2)?;
        if self.matching == MatchingMode::Endogenous {
            match self.alpha {
                Some(a) if a > 0.0 && a.is_finite() => {}
                _ => return Err(bad("alpha", "endogenous matching needs alpha > 0")),
            }
            match self.lambda {
                Some(l) if l > 0.0 && l.is_finite() => {}
                _ => return Err(bad("lambda", "endogenous matching needs lambda > 0")),
            }
        }
        if !self.l5_spread.is_finite() {
            return Err(bad("L5_spread", "must be finite"));
        }
        Ok(())
    }

    /// Serialises every key explicitly.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Expands `preset` (if any), then applies every other key as an override.
    pub fn from_table(table: Table) -> Result<Self> {
        ConfigBuilder::new().merge(table)?.build()
    }
}

/// Layers preset, file keys and command-line overrides.
#[derive(Debug, Default, Clone)]
pub struct ConfigBuilder {
    preset: Option<Preset>,
    keys: Table,
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn preset(mut self, preset: Preset) -> Self {
        self.preset = Some(preset);
        self
    }

    /// Merges `table`; later keys win.
    pub fn merge(mut self, table: Table) -> Result<Self> {
        for (key, value) in table {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::UnknownKey(key));
            }
            if key == "preset" {
                let name = value
                    .as_str()
                    .ok_or_else(|| Error::Parse("`preset` must be a string".into()))?;
                self.preset = Some(name.parse()?);
            } else {
                self.keys.insert(key, value);
            }
        }
        Ok(self)
    }

    /// Merges the keys of a TOML document.
    pub fn merge_toml(self, text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        self.merge(table)
    }

    /// Applies a single `key=value` override; `value` uses TOML syntax, with
    /// bare words accepted as strings.
    pub fn set(self, assignment: &str) -> Result<Self> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("override `{assignment}` is not of the form key=value")))?;
        let key = key.trim();
        let raw = raw.trim();
        let value = match format!("v = {raw}").parse::<Table>() {
            Ok(mut t) => t.remove("v").expect("key just inserted"),
            Err(_) => Value::String(raw.to_string()),
        };
        let mut table = Table::new();
        table.insert(key.to_string(), value);
        self.merge(table)
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.keys.insert("seed".into(), Value::Integer(seed as i64));
        self
    }

    pub fn build(self) -> Result<ScenarioConfig> {
        if !self.keys.contains_key("seed") {
            return Err(Error::MissingSeed);
        }
        let mut base = match self.preset {
            Some(p) => toml::Value::try_from(p.config(0)),
            None => toml::Value::try_from(ScenarioConfig::baseline(0)),
        }
        .map_err(|e| Error::Parse(e.to_string()))?;
        let table = base.as_table_mut().expect("config serialises to a table");
        for (k, v) in self.keys {
            table.insert(k, v);
        }
        let config: ScenarioConfig = base.try_into().map_err(|e: toml::de::Error| {
            let msg = e.to_string();
            match invalid_key(&msg) {
                Some(key) => Error::InvalidConfig {
                    key,
                    reason: msg.trim().to_string(),
                },
                None => Error::Parse(msg),
            }
        })?;
        config.validate()?;
        Ok(config)
    }
}

fn invalid_key(msg: &str) -> Option<String> {
    KNOWN_KEYS
        .iter()
        .find(|k| msg.contains(&format!("`{k}`")) || msg.contains(&format!("key `{k}`")))
        .map(|k| k.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_preset_expands_calibration() {
        let c = ScenarioConfig::from_toml_str("preset = \"baseline_perfect\"\nseed = 3").unwrap();
        assert_eq!(c.phi, 0.0);
        assert_eq!(c.omega, 0.5);
        assert_eq!(c.gamma_rr, 0.1);
        assert_eq!((c.periods, c.banks, c.customers), (50, 10, 1000));
        assert_eq!(c.base_money, 1e9);
        assert_eq!(c.total_equity, 1e8);
        assert_eq!(c.absorption, TriangularParams::new(0.0, 0.8, 1.0).unwrap());
        assert_eq!(c.repayment, TriangularParams::new(0.0, 0.3, 1.0).unwrap());
        assert_eq!((c.xi1, c.xi2), (0.1, 0.1));
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn override_beats_preset() {
        let c = ScenarioConfig::from_toml_str("preset = \"baseline_perfect\"\nseed = 3\nphi = 0.4").unwrap();
        let smooth = Preset::BaselineSmooth.config(3);
        assert_eq!(c.phi, smooth.phi);
        assert_eq!(
            ScenarioConfig { preset: None, ..c },
            ScenarioConfig { preset: None, ..smooth }
        );
    }

    #[test]
    fn zero_required_ratio_is_rejected() {
        let err = ScenarioConfig::from_toml_str("seed = 1\ngamma_RR = 0.0").unwrap_err();
        assert!(
            matches!(err, Error::InvalidConfig { ref key, .. } if key == "gamma_RR"),
            "{err}"
        );
    }

    #[test]
    fn seed_is_mandatory() {
        let err = ScenarioConfig::from_toml_str("preset = \"fig1_left\"").unwrap_err();
        assert!(matches!(err, Error::MissingSeed));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ScenarioConfig::from_toml_str("seed = 1\nbogus = 2").unwrap_err();
        assert!(matches!(err, Error::UnknownKey(ref k) if k == "bogus"));
    }

    #[test]
    fn out_of_range_names_key() {
        let err = ScenarioConfig::from_toml_str("seed = 1\nphi = 1.5").unwrap_err();
        assert!(matches!(err, Error::InvalidConfig { ref key, .. } if key == "phi"));
        let err = ScenarioConfig::from_toml_str("seed = 1\ntheta = [0.5, 0.1, 1.0]").unwrap_err();
        assert!(
            matches!(err, Error::InvalidConfig { ref key, .. } if key == "theta"),
            "{err}"
        );
    }

    #[test]
    fn endogenous_matching_needs_parameters() {
        let err = ScenarioConfig::from_toml_str("seed = 1\nmatching = \"endogenous\"\nalpha = 1.0").unwrap_err();
        assert!(matches!(err, Error::InvalidConfig { ref key, .. } if key == "lambda"));
        let ok = ScenarioConfig::from_toml_str("seed = 1\nmatching = \"endogenous\"\nalpha = 1.0\nlambda = 2.0");
        assert!(ok.is_ok());
    }

    #[test]
    fn set_overrides_accept_bare_words() {
        let c = ConfigBuilder::new()
            .preset(Preset::Fig1Left)
            .set("lending=money_multiplication")
            .unwrap()
            .set("xi2 = 0")
            .unwrap()
            .seed(9)
            .build()
            .unwrap();
        assert_eq!(c.lending, LendingBehaviour::MoneyMultiplication);
        assert_eq!(c.xi2, 0.0);
        assert_eq!(c.preset, Some(Preset::Fig1Left));
    }

    #[test]
    fn every_preset_validates() {
        for p in Preset::ALL {
            p.config(1).validate().unwrap();
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
    }

    #[test]
    fn figure_presets_switch_the_right_knobs() {
        let f = Preset::Fig2Mid.config(0);
        assert_eq!(f.reserve_base, ReserveBase::Broad);
        assert_eq!(f.lending, LendingBehaviour::FractionalReserve);
        assert_eq!(f.omega, 1.0);
        assert!(f.repayment.is_point_mass());
        let f = Preset::Fig1Right.config(0);
        assert_eq!(f.reserve_base, ReserveBase::Narrow);
        assert_eq!(f.lending, LendingBehaviour::MoneyMultiplication);
        assert_eq!(f.omega, 0.5);
    }
}
