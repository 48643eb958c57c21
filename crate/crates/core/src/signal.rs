//! Power normalization and closed-form communication and sensing metrics.

use crate::channel::ChannelSet;
use crate::cxla::{CMat, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SignalError {
    #[error("beamformer power is {0}; cannot scale to the power budget")]
    DegeneratePower(f64),
}

/// Power-normalized transmit beamformers, `W = [Wc, Ws]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformers {
    /// N×M communication beams, one column per UAV.
    pub wc: CMat,
    /// N×N radar probing beams.
    pub ws: CMat,
}

impl Beamformers {
    pub fn total_power(&self) -> f64 {
        self.wc.frobenius_sqr() + self.ws.frobenius_sqr()
    }

    pub fn stream_count(&self) -> usize {
        self.wc.cols() + self.ws.cols()
    }

    /// Column k of `W`; communication columns first.
    pub fn stream(&self, k: usize) -> impl Iterator<Item = C64> + '_ {
        let m = self.wc.cols();
        let (mat, col) = if k < m { (&self.wc, k) } else { (&self.ws, k - m) };
        (0..mat.rows()).map(move |i| mat[(i, col)])
    }

    pub fn combined(&self) -> CMat {
        self.wc.hcat(&self.ws).expect("Wc and Ws share the antenna dimension")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisePowers {
    /// Receiver noise at each UAV (W).
    pub sigma_m2: f64,
    /// Echo noise at the base station (W).
    pub sigma_b2: f64,
}

/// Scales `(Ac, As)` by `√ε`, `ε = P_max / (tr(AcᴴAc) + tr(AsᴴAs))`, so the
/// budget is met with equality.
pub fn scale_to_power(ac: &CMat, as_: &CMat, p_max: f64) -> Result<Beamformers, SignalError> {
    let total = ac.frobenius_sqr() + as_.frobenius_sqr();
    if !(total > 0.0 && total.is_finite()) {
        return Err(SignalError::DegeneratePower(total));
    }
    let s = C64::new((p_max / total).sqrt(), 0.0);
    Ok(Beamformers {
        wc: ac.scale(s),
        ws: as_.scale(s),
    })
}

/// `|h_mᵀ w_k|²` for every UAV m and every stream k.
fn gains(ch: &ChannelSet, bf: &Beamformers) -> Vec<Vec<f64>> {
    let hc = &ch.hc;
    (0..hc.cols())
        .map(|m| {
            (0..bf.stream_count())
                .map(|k| {
                    bf.stream(k)
                        .enumerate()
                        .map(|(i, w)| hc[(i, m)] * w)
                        .sum::<C64>()
                        .norm_sqr()
                })
                .collect()
        })
        .collect()
}

fn sinr_from_row(row: &[f64], m: usize, sigma2: f64) -> f64 {
    let interference: f64 = row.iter().enumerate().filter(|&(k, _)| k != m).map(|(_, g)| g).sum();
    row[m] / (interference + sigma2)
}

/// SINR at UAV `m` (0-based); interference sums over all other `N + M` streams.
pub fn sinr(ch: &ChannelSet, bf: &Beamformers, noise: &NoisePowers, m: usize) -> f64 {
    let g = gains(ch, bf);
    sinr_from_row(&g[m], m, noise.sigma_m2)
}

pub fn sinrs(ch: &ChannelSet, bf: &Beamformers, noise: &NoisePowers) -> Vec<f64> {
    gains(ch, bf)
        .iter()
        .enumerate()
        .map(|(m, row)| sinr_from_row(row, m, noise.sigma_m2))
        .collect()
}

/// `log2(1 + s)` without losing tiny SINRs to rounding.
pub fn rate(sinr: f64) -> f64 {
    sinr.ln_1p() / std::f64::consts::LN_2
}

/// Sum-rate in bits/s/Hz.
pub fn sum_rate(ch: &ChannelSet, bf: &Beamformers, noise: &NoisePowers) -> f64 {
    sinrs(ch, bf, noise).into_iter().map(rate).sum()
}

/// Linear sensing SNR, `tr(Wᴴ Hsᴴ Hs W) / σ_b²`.
pub fn sensing_snr(ch: &ChannelSet, bf: &Beamformers, noise: &NoisePowers) -> f64 {
    let w = bf.combined();
    let hw = ch.hs_mat.matmul(&w).expect("Hs is N×N and W is N×(N+M)");
    let tr = hw.hermitian().matmul(&hw).expect("square product").trace().expect("square");
    tr.re.max(0.0) / noise.sigma_b2
}

/// `10·log10`, with non-positive input mapped to −∞.
pub fn snr_db(linear: f64) -> f64 {
    if linear > 0.0 {
        10.0 * linear.log10()
    } else {
        f64::NEG_INFINITY
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelParams;
    use crate::cxla::{outer_tt, CVec};
    use crate::world::{Pos2, TargetState, UavState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cmat(rng: &mut impl Rng, r: usize, c: usize, scale: f64) -> CMat {
        CMat::from_fn(r, c, |_, _| C64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
    }

    fn random_set(rng: &mut impl Rng, n: usize, m: usize) -> ChannelSet {
        let hc = cmat(rng, n, m, 1.0);
        let hs = CVec::from_vec((0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect());
        let hs_mat = outer_tt(&hs);
        ChannelSet { hc, hs, hs_mat }
    }

    const NOISE: NoisePowers = NoisePowers { sigma_m2: 0.1, sigma_b2: 0.1 };

    #[test]
    fn scale_identity_at_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ac = cmat(&mut rng, 4, 2, 1.0);
        let as_ = cmat(&mut rng, 4, 4, 1.0);
        let p = ac.frobenius_sqr() + as_.frobenius_sqr();
        let bf = scale_to_power(&ac, &as_, p).unwrap();
        assert_eq!(bf.wc, ac);
        assert_eq!(bf.ws, as_);
    }

    #[test]
    fn scale_quarter_halves_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ac = cmat(&mut rng, 3, 2, 1.0);
        let as_ = cmat(&mut rng, 3, 3, 1.0);
        let p = (ac.frobenius_sqr() + as_.frobenius_sqr()) / 4.0;
        let bf = scale_to_power(&ac, &as_, p).unwrap();
        for (w, a) in bf.wc.as_slice().iter().zip(ac.as_slice()) {
            assert!((w - a * 0.5).norm() < 1e-15);
        }
    }

    #[test]
    fn scale_reaches_40_dbm() {
        let p_max = dbm_to_watts(40.0);
        assert!((p_max - 10.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let bf = scale_to_power(&cmat(&mut rng, 6, 4, 2.0), &cmat(&mut rng, 6, 6, 2.0), p_max).unwrap();
            assert!((bf.total_power() - 10.0).abs() / 10.0 <= 1e-9);
        }
    }

    #[test]
    fn scale_rejects_zero() {
        assert!(scale_to_power(&CMat::zeros(2, 2), &CMat::zeros(2, 2), 10.0).is_err());
    }

    #[test]
    fn zero_beams_give_zero_metrics() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = random_set(&mut rng, 3, 2);
        let bf = Beamformers { wc: CMat::zeros(3, 2), ws: CMat::zeros(3, 3) };
        assert_eq!(sinr(&ch, &bf, &NOISE, 0), 0.0);
        assert_eq!(sum_rate(&ch, &bf, &NOISE), 0.0);
        assert_eq!(sensing_snr(&ch, &bf, &NOISE), 0.0);
    }

    #[test]
    fn matched_filter_single_uav() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = random_set(&mut rng, 4, 1);
        let h = ch.hc.column(0);
        let c = 0.7;
        let w = h.conj().scale(C64::new(c, 0.0));
        let bf = Beamformers { wc: CMat::from_columns(&[w]).unwrap(), ws: CMat::zeros(4, 4) };
        let want = h.norm_sqr().powi(2) * c * c / NOISE.sigma_m2;
        let got = sinr(&ch, &bf, &NOISE, 0);
        assert!((got - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn unit_sinr_gives_m_bits() {
        // diagonal channel, one beam per UAV, desired gain equal to the noise
        let n = 3;
        let hc = CMat::identity(n);
        let hs = CVec::zeros(n);
        let ch = ChannelSet { hc, hs_mat: outer_tt(&hs), hs };
        let noise = NoisePowers { sigma_m2: 0.25, sigma_b2: 1.0 };
        let bf = Beamformers { wc: CMat::identity(n).scale(C64::new(0.5, 0.0)), ws: CMat::zeros(n, n) };
        assert!((sum_rate(&ch, &bf, &noise) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn desired_gain_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ch = random_set(&mut rng, 4, 3);
        let base = Beamformers { wc: cmat(&mut rng, 4, 3, 1.0), ws: cmat(&mut rng, 4, 4, 1.0) };
        let mut prev = f64::NEG_INFINITY;
        for s in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let mut bf = base.clone();
            for i in 0..4 {
                bf.wc[(i, 1)] = base.wc[(i, 1)] * s;
            }
            let r = sinrs(&ch, &bf, &NOISE)[1];
            assert!((1.0 + r).log2() >= prev);
            prev = (1.0 + r).log2();
        }
    }

    #[test]
    fn snr_quadratic_in_beams() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ch = random_set(&mut rng, 4, 2);
        let bf = Beamformers { wc: cmat(&mut rng, 4, 2, 1.0), ws: cmat(&mut rng, 4, 4, 1.0) };
        let two = Beamformers { wc: bf.wc.scale(C64::new(2.0, 0.0)), ws: bf.ws.scale(C64::new(2.0, 0.0)) };
        let (a, b) = (sensing_snr(&ch, &bf, &NOISE), sensing_snr(&ch, &two, &NOISE));
        assert!((b - 4.0 * a).abs() <= 1e-10 * b);
    }

    #[test]
    fn snr_rank_one_identity_on_real_geometry() {
        let p = ChannelParams {
            l0: 1e-3,
            d0: 1.0,
            exponent: 3.2,
            sensing_exponent: 3.2,
            d_over_lambda: 0.5,
            antennas: 6,
            gbs: Pos2::new(0.0, 0.0),
        };
        let uavs = [UavState::new(Pos2::new(-100.0, 100.0), Pos2::new(100.0, 100.0), 80.0, 10.0)];
        let t = TargetState { pos: Pos2::new(-60.0, 100.0), altitude: 70.0, azimuth: 0.5, elevation: 0.5, step_len: 10.0 };
        let ch = p.build(&uavs, &t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let bf = scale_to_power(&cmat(&mut rng, 6, 1, 1.0), &cmat(&mut rng, 6, 6, 1.0), 10.0).unwrap();
        let noise = NoisePowers { sigma_m2: 1e-11, sigma_b2: 1e-11 };
        let trace_form = sensing_snr(&ch, &bf, &noise);
        let rank1: f64 = (0..bf.stream_count())
            .map(|k| ch.hs.dot_t(&bf.stream(k).collect::<Vec<_>>()).norm_sqr())
            .sum::<f64>()
            * ch.hs.norm_sqr()
            / noise.sigma_b2;
        assert!((trace_form - rank1).abs() <= 1e-10 * rank1);
    }

    #[test]
    fn db_conversions() {
        assert_eq!(snr_db(1.0), 0.0);
        assert!((snr_db(10.0) - 10.0).abs() < 1e-15);
        assert_eq!(snr_db(0.0), f64::NEG_INFINITY);
        assert_eq!(snr_db(-1.0), f64::NEG_INFINITY);
        for x in [1e-20, 0.3, 1.0, 7.5, 1e9] {
            assert!((db_to_linear(snr_db(x)) - x).abs() <= 1e-12 * x);
        }
        assert!((dbm_to_watts(-80.0) - 1e-11).abs() < 1e-24);
    }
}
