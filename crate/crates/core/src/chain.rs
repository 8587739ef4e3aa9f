//! Physical layout of a repeater chain and the fiber loss model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rgs::RgsSpec;

#[derive(Debug, Error, PartialEq)]
pub enum ChainError {
    #[error("distance and spacing must be positive")]
    InvalidGeometry,
    #[error("attenuation must be non-negative")]
    InvalidAttenuation,
    #[error("bsm success cap must be in (0, 1]")]
    InvalidBsmCap,
    #[error("detector efficiency must be in (0, 1]")]
    InvalidDetector,
}

/// Full configuration of one chain simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub distance_km: f64,
    pub rgss_spacing_km: f64,
    pub attenuation_db_per_km: f64,
    /// Linear-optics BSM success probability (theoretical limit 1/2).
    pub bsm_success_cap: f64,
    pub detector_efficiency: f64,
    pub rgs_spec: RgsSpec,
    pub rng_seed: u64,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<(), ChainError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.distance_km) || !positive(self.rgss_spacing_km) {
            return Err(ChainError::InvalidGeometry);
        }
        if !(self.attenuation_db_per_km.is_finite() && self.attenuation_db_per_km >= 0.0) {
            return Err(ChainError::InvalidAttenuation);
        }
        if !(positive(self.bsm_success_cap) && self.bsm_success_cap <= 1.0) {
            return Err(ChainError::InvalidBsmCap);
        }
        if !(positive(self.detector_efficiency) && self.detector_efficiency <= 1.0) {
            return Err(ChainError::InvalidDetector);
        }
        Ok(())
    }
}

/// Node positions along the chain. ABSAs sit halfway between consecutive
/// photon sources (RGSS or end node), so every photon flies spacing/2 of
/// fiber in the regular layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainTopology {
    pub distance_km: f64,
    pub rgss_positions_km: Vec<f64>,
    pub absa_positions_km: Vec<f64>,
    pub end_node_positions_km: (f64, f64),
    /// Fiber length of each photon hop (source to its ABSA).
    pub segment_km: f64,
}

impl ChainTopology {
    pub fn n_rgss(&self) -> usize {
        self.rgss_positions_km.len()
    }

    pub fn n_absa(&self) -> usize {
        self.absa_positions_km.len()
    }
}

/// Place round(distance/spacing) - 1 sources at spacing intervals, with an
/// ABSA at every midpoint. spacing >= distance degenerates to a single
/// direct-BSM link: 0 sources, 1 ABSA at the middle.
pub fn plan_chain(config: &ChainConfig) -> Result<ChainTopology, ChainError> {
    config.validate()?;
    let d = config.distance_km;
    let s = config.rgss_spacing_km;
    let n_seg = (d / s).round().max(1.0) as usize;
    let n_rgss = n_seg - 1;
    let pitch = d / n_seg as f64;
    let rgss_positions_km: Vec<f64> = (1..=n_rgss).map(|k| k as f64 * pitch).collect();
    let absa_positions_km: Vec<f64> = (0..n_seg).map(|k| (k as f64 + 0.5) * pitch).collect();
    Ok(ChainTopology {
        distance_km: d,
        rgss_positions_km,
        absa_positions_km,
        end_node_positions_km: (0.0, d),
        segment_km: pitch / 2.0,
    })
}

/// Probability that a photon survives `length_km` of fiber and is detected.
pub fn survival_probability(
    length_km: f64,
    attenuation_db_per_km: f64,
    detector_efficiency: f64,
) -> f64 {
    detector_efficiency * 10f64.powf(-attenuation_db_per_km * length_km / 10.0)
}

/// SplitMix64 step; used to derive independent per-trial seeds from a master
/// seed without platform-dependent hashing.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `index` under `master_seed`.
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index.wrapping_add(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rgs::BranchingVector;

    fn config(distance: f64, spacing: f64) -> ChainConfig {
        ChainConfig {
            distance_km: distance,
            rgss_spacing_km: spacing,
            attenuation_db_per_km: 0.2,
            bsm_success_cap: 0.5,
            detector_efficiency: 1.0,
            rgs_spec: RgsSpec::new(1, BranchingVector::new(vec![1]).unwrap()).unwrap(),
            rng_seed: 1,
        }
    }

    #[test]
    fn sixteen_km_layout() {
        let t = plan_chain(&config(16.0, 4.0)).unwrap();
        assert_eq!(t.rgss_positions_km, vec![4.0, 8.0, 12.0]);
        assert_eq!(t.absa_positions_km, vec![2.0, 6.0, 10.0, 14.0]);
        assert_eq!(t.segment_km, 2.0);
    }

    #[test]
    fn degenerate_single_link() {
        let t = plan_chain(&config(4.0, 4.0)).unwrap();
        assert!(t.rgss_positions_km.is_empty());
        assert_eq!(t.absa_positions_km, vec![2.0]);
        let t2 = plan_chain(&config(3.0, 10.0)).unwrap();
        assert_eq!(t2.n_rgss(), 0);
        assert_eq!(t2.n_absa(), 1);
    }

    #[test]
    fn thousand_km_layout() {
        let t = plan_chain(&config(1000.0, 4.0)).unwrap();
        assert_eq!(t.n_rgss(), 249);
        assert_eq!(t.n_absa(), 250);
        assert_eq!(t.segment_km, 2.0);
    }

    #[test]
    fn survival_values() {
        assert!((survival_probability(0.0, 0.2, 1.0) - 1.0).abs() < 1e-12);
        assert!((survival_probability(2.0, 0.2, 1.0) - 10f64.powf(-0.04)).abs() < 1e-12);
        assert!((survival_probability(50.0, 0.2, 1.0) - 0.1).abs() < 1e-12);
        assert!((survival_probability(2.0, 0.0, 0.7) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut c = config(16.0, 4.0);
        c.bsm_success_cap = 0.0;
        assert_eq!(c.validate(), Err(ChainError::InvalidBsmCap));
        let mut c = config(16.0, 4.0);
        c.distance_km = -1.0;
        assert_eq!(c.validate(), Err(ChainError::InvalidGeometry));
    }

    #[test]
    fn trial_seeds_differ() {
        let a = trial_seed(42, 0);
        let b = trial_seed(42, 1);
        let c = trial_seed(43, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, trial_seed(42, 0));
    }
}
