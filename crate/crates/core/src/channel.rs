//! Line-of-sight channels from the ground base station's uniform linear
//! array to each UAV and to the sensing target.

use crate::cxla::{outer_tt, CMat, CVec, C64};
use crate::world::{Pos2, TargetState, UavState};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("zero distance between the array and a node at horizontal {pos:?}, altitude {altitude}")]
    ZeroDistance { pos: Pos2, altitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Linear path gain at the reference distance.
    pub l0: f64,
    /// Reference distance (meters).
    pub d0: f64,
    /// Path-loss exponent of the UAV links.
    pub exponent: f64,
    /// Path-loss exponent of the target link.
    pub sensing_exponent: f64,
    /// Element spacing in wavelengths.
    pub d_over_lambda: f64,
    pub antennas: usize,
    /// Array position in the horizontal plane.
    pub gbs: Pos2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// N×M, column m is UAV m's channel.
    pub hc: CMat,
    pub hs: CVec,
    /// `hs hsᵀ`.
    pub hs_mat: CMat,
}

impl ChannelParams {
    fn dist_sqr(&self, pos: Pos2, altitude: f64) -> Result<f64, ChannelError> {
        let d2 = (self.gbs - pos).norm_sqr() + altitude * altitude;
        if d2 > 0.0 {
            Ok(d2)
        } else {
            Err(ChannelError::ZeroDistance { pos, altitude })
        }
    }

    /// Power gain `L0·D0 / (‖b−u‖² + H²)^ς`.
    pub fn path_loss_with(&self, pos: Pos2, altitude: f64, exponent: f64) -> Result<f64, ChannelError> {
        let d2 = self.dist_sqr(pos, altitude)?;
        Ok(self.l0 * self.d0 / d2.powf(exponent))
    }

    pub fn path_loss(&self, pos: Pos2, altitude: f64) -> Result<f64, ChannelError> {
        self.path_loss_with(pos, altitude, self.exponent)
    }

    /// Angle of departure from the array axis, in [0, π/2].
    pub fn aod(&self, pos: Pos2, altitude: f64) -> Result<f64, ChannelError> {
        let d2 = self.dist_sqr(pos, altitude)?;
        Ok((altitude / d2.sqrt()).clamp(-1.0, 1.0).acos())
    }

    pub fn steering_vector(&self, psi: f64) -> CVec {
        let phase = 2.0 * PI * self.d_over_lambda * psi.cos();
        CVec::from_vec(
            (0..self.antennas)
                .map(|n| C64::from_polar(1.0, phase * n as f64))
                .collect(),
        )
    }

    fn link(&self, pos: Pos2, altitude: f64, exponent: f64) -> Result<CVec, ChannelError> {
        let gain = self.path_loss_with(pos, altitude, exponent)?;
        let psi = self.aod(pos, altitude)?;
        Ok(self.steering_vector(psi).scale(C64::new(gain.sqrt(), 0.0)))
    }

    pub fn build(&self, uavs: &[UavState], target: &TargetState) -> Result<ChannelSet, ChannelError> {
        let cols = uavs
            .iter()
            .map(|u| self.link(u.pos, u.altitude, self.exponent))
            .collect::<Result<Vec<_>, _>>()?;
        let hc = CMat::from_columns(&cols).expect("equal-length steering vectors");
        let hs = self.link(target.pos, target.altitude, self.sensing_exponent)?;
        let hs_mat = outer_tt(&hs);
        Ok(ChannelSet { hc, hs, hs_mat })
    }
}

pub fn path_loss(p: &ChannelParams, pos: Pos2, altitude: f64) -> Result<f64, ChannelError> {
    p.path_loss(pos, altitude)
}

pub fn aod(p: &ChannelParams, pos: Pos2, altitude: f64) -> Result<f64, ChannelError> {
    p.aod(pos, altitude)
}

pub fn steering_vector(p: &ChannelParams, psi: f64) -> CVec {
    p.steering_vector(psi)
}

pub fn build_channels(p: &ChannelParams, uavs: &[UavState], target: &TargetState) -> Result<ChannelSet, ChannelError> {
    p.build(uavs, target)
}
