//! WINNER II path loss, Rayleigh block fading and SNR.
//!
//! Powers are in mW, the noise density in mW/Hz and the SNR threshold is a
//! linear ratio.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{ensure_finite, ensure_positive, Result};

/// Distances below this are evaluated at this distance.
pub const REFERENCE_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    BsToUav,
    UavToUav,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams {
    /// Loss at the reference distance, dB.
    pub pl0_db: f64,
    /// Distance coefficient, dB per decade of metres.
    pub dist_coeff_a: f64,
    /// Carrier-frequency coefficient, dB per decade of `fc / 5 GHz`.
    pub freq_coeff_b: f64,
    pub carrier_freq_ghz: f64,
}

impl PathLossParams {
    pub fn winner2_bs_to_uav() -> Self {
        PathLossParams { pl0_db: 39.0, dist_coeff_a: 26.0, freq_coeff_b: 20.0, carrier_freq_ghz: 2.0 }
    }

    pub fn winner2_uav_to_uav() -> Self {
        PathLossParams { pl0_db: 41.0, dist_coeff_a: 22.7, freq_coeff_b: 20.0, carrier_freq_ghz: 5.8 }
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        ensure_finite(&format!("{prefix}.pl0_db"), self.pl0_db)?;
        ensure_finite(&format!("{prefix}.dist_coeff_a"), self.dist_coeff_a)?;
        ensure_finite(&format!("{prefix}.freq_coeff_b"), self.freq_coeff_b)?;
        ensure_positive(&format!("{prefix}.carrier_freq_ghz"), self.carrier_freq_ghz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    pub p_bs_mw: f64,
    pub p_uav_mw: f64,
    pub bandwidth_hz: f64,
    pub noise_density_mw_per_hz: f64,
    /// SNR threshold, linear.
    pub snr_threshold: f64,
    pub bs_to_uav: PathLossParams,
    pub uav_to_uav: PathLossParams,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            p_bs_mw: 1000.0,
            p_uav_mw: 10.0,
            bandwidth_hz: 20e6,
            noise_density_mw_per_hz: dbm_to_mw(-174.0),
            snr_threshold: 20.0,
            bs_to_uav: PathLossParams::winner2_bs_to_uav(),
            uav_to_uav: PathLossParams::winner2_uav_to_uav(),
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("radio.p_bs_mw", self.p_bs_mw)?;
        ensure_positive("radio.p_uav_mw", self.p_uav_mw)?;
        ensure_positive("radio.bandwidth_hz", self.bandwidth_hz)?;
        ensure_positive("radio.noise_density_mw_per_hz", self.noise_density_mw_per_hz)?;
        ensure_positive("radio.snr_threshold", self.snr_threshold)?;
        self.bs_to_uav.validate("radio.bs_to_uav")?;
        self.uav_to_uav.validate("radio.uav_to_uav")
    }

    pub fn path_loss_params(&self, kind: LinkKind) -> &PathLossParams {
        match kind {
            LinkKind::BsToUav => &self.bs_to_uav,
            LinkKind::UavToUav => &self.uav_to_uav,
        }
    }

    /// Transmit power of the sender on a link of this kind.
    pub fn tx_power(&self, kind: LinkKind) -> f64 {
        match kind {
            LinkKind::BsToUav => self.p_bs_mw,
            LinkKind::UavToUav => self.p_uav_mw,
        }
    }

    /// Thermal noise power over the full bandwidth, mW.
    pub fn noise_power_mw(&self) -> f64 {
        self.bandwidth_hz * self.noise_density_mw_per_hz
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// dBm (or dBm/Hz) to mW (or mW/Hz).
pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

/// Result of a path-loss evaluation, flagging distances raised to the
/// reference floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    pub gain: f64,
    pub clamped: bool,
}

pub fn path_loss_db(kind: LinkKind, distance: f64, params: &RadioParams) -> f64 {
    let p = params.path_loss_params(kind);
    let d = distance.max(REFERENCE_DISTANCE_M);
    p.pl0_db + p.dist_coeff_a * d.log10() + p.freq_coeff_b * (p.carrier_freq_ghz / 5.0).log10()
}

pub fn path_loss(kind: LinkKind, distance: f64, params: &RadioParams) -> PathLoss {
    PathLoss { gain: db_to_linear(-path_loss_db(kind, distance, params)), clamped: distance < REFERENCE_DISTANCE_M }
}

/// Linear power gain of the WINNER II model, `10^(-PL_dB / 10)`.
pub fn path_loss_linear(kind: LinkKind, distance: f64, params: &RadioParams) -> f64 {
    path_loss(kind, distance, params).gain
}

/// `|h|^2` for Rayleigh fading: unit-mean exponential.
pub fn sample_power_fading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Inverse CDF of the unit exponential.
pub fn fading_quantile(u: f64) -> f64 {
    -(-u).ln_1p()
}

pub fn snr(p_tx_mw: f64, path_gain: f64, fading: f64, params: &RadioParams) -> f64 {
    p_tx_mw * path_gain * fading / params.noise_power_mw()
}

/// `Γ·B·N0 / (p_tx·PL(d))`: the fading level a link must exceed.
pub fn fading_margin(p_tx_mw: f64, distance: f64, kind: LinkKind, params: &RadioParams) -> f64 {
    params.snr_threshold * params.noise_power_mw() / (p_tx_mw * path_loss_linear(kind, distance, params))
}

/// Closed-form `P(SNR > Γ)` under unit-mean exponential fading.
pub fn success_probability(p_tx_mw: f64, distance: f64, kind: LinkKind, params: &RadioParams) -> f64 {
    (-fading_margin(p_tx_mw, distance, kind, params)).exp()
}

/// One reception attempt with a fresh fading draw.
pub fn reception_success<R: Rng + ?Sized>(
    p_tx_mw: f64,
    distance: f64,
    kind: LinkKind,
    params: &RadioParams,
    rng: &mut R,
) -> bool {
    let gain = path_loss_linear(kind, distance, params);
    snr(p_tx_mw, gain, sample_power_fading(rng), params) > params.snr_threshold
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn bs_link_at_100m() {
        let p = RadioParams::default();
        let db = path_loss_db(LinkKind::BsToUav, 100.0, &p);
        assert!((db - 83.041).abs() < 1e-3, "{db}");
        let g = path_loss_linear(LinkKind::BsToUav, 100.0, &p);
        assert!((g - 4.96e-9).abs() < 1e-11, "{g:e}");
    }

    #[test]
    fn uav_link_at_10m() {
        let p = RadioParams::default();
        let db = path_loss_db(LinkKind::UavToUav, 10.0, &p);
        assert!((db - 64.989).abs() < 1e-3, "{db}");
        let g = path_loss_linear(LinkKind::UavToUav, 10.0, &p);
        assert!((g - 3.17e-7).abs() < 1e-9, "{g:e}");
    }

    #[test]
    fn log_terms_vanish_at_5ghz_1m() {
        let mut p = RadioParams::default();
        p.bs_to_uav.carrier_freq_ghz = 5.0;
        p.uav_to_uav.carrier_freq_ghz = 5.0;
        for kind in [LinkKind::BsToUav, LinkKind::UavToUav] {
            let pl0 = p.path_loss_params(kind).pl0_db;
            let g = path_loss_linear(kind, 1.0, &p);
            assert!(rel(g, 10f64.powf(-pl0 / 10.0)) < 1e-14);
        }
    }

    #[test]
    fn sub_reference_distance_is_clamped() {
        let p = RadioParams::default();
        let near = path_loss(LinkKind::UavToUav, 0.2, &p);
        assert!(near.clamped);
        assert_eq!(near.gain, path_loss_linear(LinkKind::UavToUav, 1.0, &p));
        assert!(!path_loss(LinkKind::UavToUav, 1.0, &p).clamped);
    }

    #[test]
    fn path_loss_strictly_decreasing() {
        let p = RadioParams::default();
        for kind in [LinkKind::BsToUav, LinkKind::UavToUav] {
            let mut prev = f64::INFINITY;
            for i in 1..2000 {
                let g = path_loss_linear(kind, i as f64 * 0.9 + 1.0, &p);
                assert!(g < prev);
                prev = g;
            }
        }
    }

    #[test]
    fn noise_conversion_round_trips() {
        let p = RadioParams::default();
        assert!(rel(p.noise_density_mw_per_hz, 10f64.powf(-17.4)) < 1e-12);
        assert!(rel(linear_to_db(p.noise_density_mw_per_hz), -174.0) < 1e-12);
        for db in [-174.0, -30.0, 0.0, 13.0, 83.041] {
            assert!((linear_to_db(db_to_linear(db)) - db).abs() <= 1e-12 * db.abs().max(1.0));
        }
        assert!(rel(p.noise_power_mw(), 7.962e-11) < 1e-3);
    }

    #[test]
    fn snr_arithmetic() {
        let p = RadioParams::default();
        let s = snr(10.0, 1e-9, 1.0, &p);
        assert!((s - 125.6).abs() < 0.1, "{s}");
        assert_eq!(snr(10.0, 1e-9, 0.0, &p), 0.0);
        assert!(rel(snr(20.0, 1e-9, 1.0, &p), 2.0 * s) < 1e-15);
    }

    #[test]
    fn fading_moments() {
        let mut rng = seeded(11);
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_power_fading(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let tail = draws.iter().filter(|&&h| h > 1.0).count() as f64 / n as f64;
        assert!((mean - 1.0).abs() < 0.004, "{mean}");
        assert!((tail - (-1f64).exp()).abs() < 0.002, "{tail}");
        assert_eq!(fading_quantile(0.0), 0.0);
        assert!((fading_quantile(1.0 - (-1f64).exp()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uav_link_at_50m_closed_form() {
        let p = RadioParams::default();
        let margin = fading_margin(p.p_uav_mw, 50.0, LinkKind::UavToUav, &p);
        assert!((margin - 0.0194).abs() < 1e-4, "{margin}");
        let closed = success_probability(p.p_uav_mw, 50.0, LinkKind::UavToUav, &p);
        assert!((closed - 0.9808).abs() < 1e-4);

        let mut rng = seeded(12);
        let n = 100_000;
        let hits = (0..n).filter(|_| reception_success(p.p_uav_mw, 50.0, LinkKind::UavToUav, &p, &mut rng)).count();
        let mc = hits as f64 / n as f64;
        assert!((mc - closed).abs() < 0.004, "{mc} vs {closed}");
    }

    #[test]
    fn success_probability_limits() {
        let p = RadioParams::default();
        assert!(success_probability(1e12, 500.0, LinkKind::BsToUav, &p) > 1.0 - 1e-9);
        assert!(success_probability(p.p_uav_mw, 1e7, LinkKind::UavToUav, &p) < 1e-12);
    }

    #[test]
    fn monte_carlo_matches_closed_form_across_distances() {
        let p = RadioParams::default();
        let mut rng = seeded(13);
        let n = 200_000;
        for (kind, distances) in [
            (LinkKind::BsToUav, [200.0, 500.0, 900.0, 1500.0, 2500.0]),
            (LinkKind::UavToUav, [5.0, 30.0, 80.0, 150.0, 300.0]),
        ] {
            for d in distances {
                let tx = p.tx_power(kind);
                let expected = success_probability(tx, d, kind, &p);
                let hits = (0..n).filter(|_| reception_success(tx, d, kind, &p, &mut rng)).count();
                let est = hits as f64 / n as f64;
                let se = (expected * (1.0 - expected) / n as f64).sqrt().max(1e-9);
                assert!((est - expected).abs() < 4.0 * se, "{kind:?} d={d}: {est} vs {expected}");
            }
        }
    }

    #[test]
    fn invalid_radio_names_field() {
        let mut p = RadioParams::default();
        p.p_uav_mw = 0.0;
        let err = p.validate().unwrap_err();
        assert!(err.to_string().contains("radio.p_uav_mw"));
    }
}
