//! Monte-Carlo campaigns over an SNR grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Mode, SimConfig};
use super::link::{block_stream, stream_rng};
use super::metrics::{MetricsRecord, Tally};
use super::run::PointSetup;
use crate::error::{Error, Result};
use crate::neural::dataset::{feature_dim, generate_dataset};
use crate::neural::{load_model, train, MlpModel, TrainReport};

/// Sums the tallies of blocks `0..blocks` at grid point `point`. Every block
/// draws from its own stream, so the result does not depend on scheduling.
pub fn run_blocks(setup: &PointSetup<'_>, seed: u64, point: usize, blocks: usize) -> Result<Tally> {
    (0..blocks)
        .into_par_iter()
        .map(|b| setup.run_block(&mut stream_rng(seed, block_stream(point, b))))
        .try_reduce(Tally::default, |a, b| Ok(a + b))
}

/// One record per SNR grid point. `model` is used only in neural mode.
pub fn sweep(cfg: &SimConfig, model: Option<&MlpModel>) -> Result<Vec<MetricsRecord>> {
    cfg.validate()?;
    cfg.snr_db
        .iter()
        .enumerate()
        .map(|(i, &snr)| {
            let setup = PointSetup::new(cfg, snr, model)?;
            let tally = run_blocks(&setup, cfg.seed, i, cfg.blocks)?;
            Ok(MetricsRecord::from_tally(
                cfg.mode,
                snr,
                cfg.antennas,
                cfg.mod_order,
                &tally,
                setup.data_fraction(),
                setup.bits_per_symbol(),
                cfg.ser_threshold,
            ))
        })
        .collect()
}

/// Generates a dataset over `cfg.snr_db` and trains a fresh MLP on it.
pub fn train_model(cfg: &SimConfig, seed: u64) -> Result<(MlpModel, TrainReport)> {
    let set = generate_dataset(cfg, cfg.train_samples, seed)?;
    let mut init = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_1417);
    let mut model = MlpModel::new(feature_dim(cfg.snr_db.len()), &cfg.hidden, 2, &mut init)?;
    model.snr_grid_db = cfg.snr_db.clone();
    let report = train(&mut model, &set, &cfg.train_config(seed))?;
    Ok((model, report))
}

/// The model a sweep of `cfg` needs: loaded from `cfg.model` when set,
/// trained from scratch otherwise. `None` outside neural mode.
pub fn prepare_model(cfg: &SimConfig) -> Result<Option<MlpModel>> {
    if cfg.mode != Mode::DifferentialVqlNn {
        return Ok(None);
    }
    let model = match &cfg.model {
        Some(path) => {
            if !path.exists() {
                return Err(Error::Config(format!(
                    "model file {} does not exist; run `train` first or drop the `model` key",
                    path.display()
                )));
            }
            load_model(path)?
        }
        None => train_model(cfg, cfg.seed)?.0,
    };
    Ok(Some(model))
}
