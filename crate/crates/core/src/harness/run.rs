//! Detector setup for one SNR point and single-block simulation.

use ndarray::Array2;
use rand::Rng;

use super::config::{noise_var, CoherentShape, Mode, SimConfig};
use super::link::{transmit_differential, DifferentialBlock};
use super::metrics::Tally;
use crate::baseline::{coherent_detect, ChannelEstimator, CoherentConstellation, PilotDistortion, PilotPlan};
use crate::channel::{apply_channel, gen_channel, ChannelConfig};
use crate::detect::{
    energy_statistic, lrt_amplitude_test, onebit_ml_detect, vql_phase_detect, EnergyModel, EnergyStat, RhoTable,
};
use crate::error::{invalid, Error, Result};
use crate::modem::{recover_bits, BitBlock, ConstellationSpec};
use crate::neural::dataset::{feature_dim, FeatureVector};
use crate::neural::{predict_amplitude_bit, MlpModel};
use crate::quantize::{bussgang_for_noise, QuantizerSpec};
use num_complex::Complex64;

/// How the amplitude bit is decided in the VQL modes.
#[derive(Debug, Clone)]
pub enum AmplitudeDetector<'a> {
    Neural { model: &'a MlpModel, snr_index: usize },
    Lrt(EnergyModel),
    /// Reads the transmitted bit; isolates the phase detector in tests.
    Genie,
}

#[derive(Debug, Clone)]
pub enum Receiver<'a> {
    JointOnebit { rho: RhoTable },
    Vql { amplitude: AmplitudeDetector<'a>, sign_antennas: Vec<usize>, rho: f64 },
    Coherent { plan: PilotPlan, estimator: Box<ChannelEstimator>, set: CoherentConstellation },
}

/// Everything needed to simulate blocks at one SNR.
#[derive(Debug, Clone)]
pub struct PointSetup<'a> {
    pub snr_db: f64,
    pub spec: ConstellationSpec,
    pub qspec: QuantizerSpec,
    pub channel: ChannelConfig,
    pub receiver: Receiver<'a>,
}

/// Index of `snr_db` in a model's training grid.
pub fn model_snr_index(model: &MlpModel, snr_db: f64) -> Result<usize> {
    model.snr_grid_db.iter().position(|s| (s - snr_db).abs() < 1e-9).ok_or_else(|| {
        Error::Config(format!(
            "SNR {snr_db} dB is not on the model's training grid {:?}",
            model.snr_grid_db
        ))
    })
}

impl<'a> PointSetup<'a> {
    /// `model` is required in [`Mode::DifferentialVqlNn`] and ignored
    /// otherwise.
    pub fn new(cfg: &SimConfig, snr_db: f64, model: Option<&'a MlpModel>) -> Result<Self> {
        let spec = cfg.constellation()?;
        let qspec = cfg.quantizer()?;
        let channel = cfg.channel(snr_db)?;
        let sigma_z2 = noise_var(snr_db);
        let bussgang = bussgang_for_noise(sigma_z2)?;
        let rho = RhoTable::from_noise(bussgang, sigma_z2, spec.ring_ratio());
        let receiver = match cfg.mode {
            Mode::DifferentialOnebit => Receiver::JointOnebit { rho },
            Mode::DifferentialVqlNn | Mode::DifferentialVqlLrt => {
                let amplitude = if cfg.mode == Mode::DifferentialVqlNn {
                    let model = model.ok_or_else(|| Error::Config("neural mode needs a trained model".into()))?;
                    let grid = model.snr_grid_db.len();
                    if model.input_dim() != feature_dim(grid) || model.output_dim() != 2 {
                        return Err(Error::Config(format!(
                            "model maps {} inputs to {} outputs; expected {} to 2",
                            model.input_dim(),
                            model.output_dim(),
                            feature_dim(grid)
                        )));
                    }
                    AmplitudeDetector::Neural { model, snr_index: model_snr_index(model, snr_db)? }
                } else {
                    AmplitudeDetector::Lrt(EnergyModel::moment_matched(&qspec, &spec, sigma_z2)?)
                };
                Receiver::Vql { amplitude, sign_antennas: qspec.sign_antennas(), rho: rho.keep }
            }
            Mode::Coherent => {
                let plan = PilotPlan::new(cfg.uses, cfg.pilot_fraction)?;
                let estimator = ChannelEstimator::new(&plan, channel.pdp(), PilotDistortion::ArcsineLaw, sigma_z2)?;
                let set = match cfg.coherent_shape {
                    CoherentShape::Psk => CoherentConstellation::psk(cfg.mod_order)?,
                    CoherentShape::Apsk => CoherentConstellation::apsk(&spec)?,
                };
                Receiver::Coherent { plan, estimator: Box::new(estimator), set }
            }
        };
        Ok(Self { snr_db, spec, qspec, channel, receiver })
    }

    /// Share of the channel uses carrying data.
    pub fn data_fraction(&self) -> f64 {
        match &self.receiver {
            Receiver::Coherent { plan, .. } => plan.data_fraction(),
            _ => 1.0,
        }
    }

    pub fn bits_per_symbol(&self) -> usize {
        match &self.receiver {
            Receiver::Coherent { set, .. } => set.bits_per_symbol(),
            _ => self.spec.bits_per_symbol(),
        }
    }

    /// Simulates one block and counts its errors.
    pub fn run_block<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Tally> {
        match &self.receiver {
            Receiver::Coherent { plan, estimator, set } => self.run_coherent(plan, estimator, set, rng),
            _ => {
                let tx = transmit_differential(&self.spec, &self.qspec, &self.channel, rng)?;
                self.detect_differential(&tx)
            }
        }
    }

    /// Detects every data use of an already transmitted differential block.
    pub fn detect_differential(&self, tx: &DifferentialBlock) -> Result<Tally> {
        let n = tx.q.ncols();
        let cols: Vec<Vec<Complex64>> = (0..n).map(|v| tx.q.column(v).to_vec()).collect();
        let m = self.spec.phases();
        let mut tally = Tally { blocks: 1, ..Tally::default() };

        let decisions: Vec<(u8, usize)> = match &self.receiver {
            Receiver::JointOnebit { rho } => (1..n)
                .map(|v| {
                    let d = onebit_ml_detect(&cols[v], &cols[v - 1], &self.spec, rho)?;
                    Ok((d.amplitude_bit, d.candidate.phase_index))
                })
                .collect::<Result<_>>()?,
            Receiver::Vql { amplitude, sign_antennas, rho } => {
                let amp = self.amplitude_bits(amplitude, &cols, tx)?;
                (1..n)
                    .map(|v| {
                        let c = vql_phase_detect(&cols[v], &cols[v - 1], sign_antennas, &self.spec, *rho)?;
                        Ok((amp[v - 1], c.phase_index))
                    })
                    .collect::<Result<_>>()?
            }
            Receiver::Coherent { .. } => return Err(invalid("coherent receiver given a differential block")),
        };
        for (v, (amp, k)) in decisions.into_iter().enumerate() {
            let rotation = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
            let got = recover_bits(amp, rotation, m)?;
            tally.record(tx.bits[v].bits(), got.bits(), 1);
        }
        Ok(tally)
    }

    fn amplitude_bits(
        &self,
        det: &AmplitudeDetector<'_>,
        cols: &[Vec<Complex64>],
        tx: &DifferentialBlock,
    ) -> Result<Vec<u8>> {
        let n = cols.len();
        if let AmplitudeDetector::Genie = det {
            return Ok(tx.bits.iter().map(BitBlock::amplitude_bit).collect());
        }
        let energy: Vec<EnergyStat> = cols.iter().map(|c| energy_statistic(c)).collect::<Result<_>>()?;
        match det {
            AmplitudeDetector::Neural { model, snr_index } => {
                let grid = model.snr_grid_db.len();
                let mut x = Array2::zeros((n - 1, feature_dim(grid)));
                for v in 1..n {
                    let f = FeatureVector::new(energy[v].lambda, energy[v - 1].lambda, *snr_index, grid)?;
                    for (dst, src) in x.row_mut(v - 1).iter_mut().zip(f.to_vec()) {
                        *dst = src;
                    }
                }
                let probs = model.forward_batch(x.view())?;
                Ok(probs.rows().into_iter().map(|p| predict_amplitude_bit(&p.to_vec())).collect())
            }
            AmplitudeDetector::Lrt(em) => (1..n)
                .map(|v| Ok(lrt_amplitude_test(&energy[v], &energy[v - 1], em)?.amplitude_bit()))
                .collect(),
            AmplitudeDetector::Genie => unreachable!(),
        }
    }

    fn run_coherent<R: Rng + ?Sized>(
        &self,
        plan: &PilotPlan,
        estimator: &ChannelEstimator,
        set: &CoherentConstellation,
        rng: &mut R,
    ) -> Result<Tally> {
        let data_uses = plan.data_positions().len();
        let sent: Vec<usize> = (0..data_uses).map(|_| rng.random_range(0..set.len())).collect();
        let symbols: Vec<Complex64> = sent.iter().map(|&i| set.points()[i]).collect();
        let x = plan.frame(&symbols)?;
        let ch = gen_channel(&self.channel, rng);
        let y = apply_channel(&x, &ch, self.channel.sigma_z2(), rng)?;
        let q = self.qspec.quantize(&y)?;
        let est = estimator.estimate(&q)?;
        let mut tally = Tally { blocks: 1, ..Tally::default() };
        for (&v, &i) in plan.data_positions().iter().zip(&sent) {
            let qv = q.column(v).to_vec();
            let hv = est.h_hat.column(v).to_vec();
            let got = coherent_detect(&qv, &hv, set, self.channel.sigma_z2(), est.mse[v])?;
            tally.record(set.labels()[i].bits(), set.labels()[got].bits(), set.amplitude_bits());
        }
        Ok(tally)
    }
}
