//! Simulation configuration, read from a `key = value` TOML file.
//!
//! ```toml
//! mode = "differential-vql-nn"
//! uses = 256
//! antennas = 96
//! groups = [32, 32, 32]
//! taps = 31
//! pdp = "exponential"
//! pdp_decay = 0.5
//! mod_order = 16
//! ring_ratio = 2.0
//! snr_db = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0]
//! blocks = 200
//! seed = 1
//! ser_threshold = 0.05
//! ```
//!
//! Every key is optional; missing keys take the values of
//! [`SimConfig::default`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelConfig, PowerDelayProfile};
use crate::error::{Error, Result};
use crate::modem::ConstellationSpec;
use crate::neural::TrainConfig;
use crate::quantize::QuantizerSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Every antenna one-bit, joint ML amplitude and phase detection.
    DifferentialOnebit,
    /// VQL groups, MLP amplitude detector, ML phase detector on the sign group.
    DifferentialVqlNn,
    /// VQL groups, likelihood-ratio energy test for the amplitude bit.
    DifferentialVqlLrt,
    /// Pilot-aided coherent one-bit receiver.
    Coherent,
}

impl Mode {
    pub const ALL: [Mode; 4] =
        [Mode::DifferentialOnebit, Mode::DifferentialVqlNn, Mode::DifferentialVqlLrt, Mode::Coherent];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::DifferentialOnebit => "differential-onebit",
            Mode::DifferentialVqlNn => "differential-vql-nn",
            Mode::DifferentialVqlLrt => "differential-vql-lrt",
            Mode::Coherent => "coherent",
        }
    }

    pub fn is_differential(self) -> bool {
        self != Mode::Coherent
    }

    pub fn uses_vql(self) -> bool {
        matches!(self, Mode::DifferentialVqlNn | Mode::DifferentialVqlLrt)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PdpShape {
    Uniform,
    Exponential,
}

/// Signal set of the coherent reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoherentShape {
    /// `mod_order`-PSK on the unit circle.
    Psk,
    /// Two rings `psi0`, `psi1` with `mod_order / 2` phases each.
    Apsk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub mode: Mode,
    /// Channel uses per block, `N`.
    pub uses: usize,
    /// Receive antennas, `U`.
    pub antennas: usize,
    /// VQL group sizes; `None` splits the array into equal thirds.
    pub groups: Option<[usize; 3]>,
    /// Channel taps, `L`.
    pub taps: usize,
    pub pdp: PdpShape,
    /// `p[l]` proportional to `exp(-pdp_decay * l)` for the exponential shape.
    pub pdp_decay: f64,
    /// Constellation size `2M` (differential) or signal-set size (coherent).
    pub mod_order: usize,
    pub ring_ratio: f64,
    pub snr_db: Vec<f64>,
    pub blocks: usize,
    pub seed: u64,
    pub ser_threshold: f64,
    /// Pilot fraction `xi` of the coherent reference.
    pub pilot_fraction: f64,
    pub coherent_shape: CoherentShape,
    /// Trained amplitude detector. When absent in NN mode, one is trained
    /// before the sweep using the settings below.
    pub model: Option<PathBuf>,
    pub hidden: Vec<usize>,
    pub train_samples: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            mode: Mode::DifferentialVqlNn,
            uses: 256,
            antennas: 96,
            groups: None,
            taps: 31,
            pdp: PdpShape::Exponential,
            pdp_decay: 0.5,
            mod_order: 16,
            ring_ratio: 2.0,
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
            blocks: 100,
            seed: 1,
            ser_threshold: 0.05,
            pilot_fraction: 0.5,
            coherent_shape: CoherentShape::Psk,
            model: None,
            hidden: vec![64, 64, 64],
            train_samples: 60_000,
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => bad(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(bad("antennas must be >= 1"));
        }
        if self.uses < 2 {
            return Err(bad("a block needs at least 2 channel uses"));
        }
        if self.taps == 0 || self.taps > self.uses {
            return Err(bad(format!("taps must lie in 1..={}, got {}", self.uses, self.taps)));
        }
        if !(self.pdp_decay.is_finite() && self.pdp_decay >= 0.0) {
            return Err(bad("pdp_decay must be >= 0"));
        }
        if self.blocks == 0 {
            return Err(bad("blocks must be >= 1"));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(bad("SNR grid values must be finite"));
        }
        if self.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("SNR grid must be strictly increasing"));
        }
        if !(0.0..=1.0).contains(&self.ser_threshold) {
            return Err(bad("ser_threshold must lie in [0, 1]"));
        }
        if let Some(g) = self.groups {
            if g.iter().sum::<usize>() != self.antennas {
                return Err(bad(format!(
                    "group sizes {:?} sum to {} but antennas = {}",
                    g,
                    g.iter().sum::<usize>(),
                    self.antennas
                )));
            }
            if g[1] == 0 {
                return Err(bad("the sign group (second entry of groups) must not be empty"));
            }
        }
        if self.mode.uses_vql() && self.antennas < 3 && self.groups.is_none() {
            return Err(bad("VQL modes need at least 3 antennas"));
        }
        if self.mode == Mode::Coherent {
            if !(self.pilot_fraction > 0.0 && self.pilot_fraction < 1.0) {
                return Err(bad("pilot_fraction must lie strictly between 0 and 1"));
            }
            if self.pilot_count() == 0 || self.pilot_count() >= self.uses {
                return Err(bad("pilot_fraction leaves no pilot or no data use"));
            }
        }
        if self.hidden.contains(&0) {
            return Err(bad("hidden layer widths must be >= 1"));
        }
        if self.mode == Mode::DifferentialVqlNn && self.model.is_none() {
            if self.train_samples == 0 || self.epochs == 0 || self.batch_size == 0 {
                return Err(bad("train_samples, epochs and batch_size must be >= 1"));
            }
            if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
                return Err(bad("learning_rate must be > 0"));
            }
        }
        self.constellation()?;
        self.quantizer()?;
        self.pdp_profile()?;
        Ok(())
    }

    /// Differential constellation, or the two rings of the coherent APSK set.
    pub fn constellation(&self) -> Result<ConstellationSpec> {
        ConstellationSpec::from_order(self.mod_order, self.ring_ratio).map_err(|e| bad(e.to_string()))
    }

    pub fn group_sizes(&self) -> [usize; 3] {
        self.groups.unwrap_or_else(|| {
            let third = self.antennas / 3;
            [third, self.antennas - 2 * third, third]
        })
    }

    /// Sign quantizers everywhere except in the VQL modes.
    pub fn quantizer(&self) -> Result<QuantizerSpec> {
        let q = if self.mode.uses_vql() {
            QuantizerSpec::vql(self.group_sizes(), &self.constellation()?)
        } else {
            QuantizerSpec::sign(self.antennas)
        };
        q.map_err(|e| bad(e.to_string()))
    }

    pub fn pdp_profile(&self) -> Result<PowerDelayProfile> {
        match self.pdp {
            PdpShape::Uniform => PowerDelayProfile::uniform(self.taps),
            PdpShape::Exponential => PowerDelayProfile::exponential(self.taps, self.pdp_decay),
        }
        .map_err(|e| bad(e.to_string()))
    }

    pub fn channel(&self, snr_db: f64) -> Result<ChannelConfig> {
        ChannelConfig::new(self.antennas, self.uses, self.pdp_profile()?, noise_var(snr_db))
    }

    /// Pilot uses of the coherent reference, `ceil(xi N)`.
    pub fn pilot_count(&self) -> usize {
        (self.pilot_fraction * self.uses as f64).ceil() as usize
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed,
            ..TrainConfig::default()
        }
    }
}

/// `sigma_z^2 = 10^(-SNR/10)` for a unit-power signal and channel.
pub fn noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}
