//! Space-time cost of a schedule, with the code distance `d` kept symbolic.
//!
//! A timestep lasts `d` code cycles and a rotated patch holds `d²` data plus
//! `d² − 1` syndrome qubits, counted as `2d²`. A schedule with footprint `P` and
//! `T` timesteps therefore occupies `2d²·P` qubits for `T·d` cycles, a volume of
//! `2·P·T·d³`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::schedule::SurgerySchedule;

/// Cost summary of one schedule. Quantities that scale with `d` are stored as
/// the coefficient of their power of `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResourceEstimate {
    /// Footprint `P`: distinct grid cells used by any operation.
    pub patches: u64,
    /// Timestep count `T`.
    pub timesteps: u64,
    /// Code cycles per unit of `d` (`cycles = T·d`).
    pub cycles_per_d: u64,
    /// Physical qubits per patch per `d²` (`2d²`).
    pub phys_qubits_per_patch_per_d2: u64,
    /// `c` in `volume = c·d³`; always `2·P·T`.
    pub volume_coefficient: u64,
}

impl ResourceEstimate {
    pub fn new(patches: u64, timesteps: u64) -> Self {
        ResourceEstimate {
            patches,
            timesteps,
            cycles_per_d: timesteps,
            phys_qubits_per_patch_per_d2: 2,
            volume_coefficient: 2 * patches * timesteps,
        }
    }

    pub fn cycles(&self, d: u64) -> u64 {
        self.cycles_per_d * d
    }

    pub fn physical_qubits(&self, d: u64) -> u64 {
        self.patches * self.phys_qubits_per_patch_per_d2 * d * d
    }

    pub fn volume(&self, d: u64) -> u64 {
        self.volume_coefficient * d * d * d
    }
}

/// Estimate for `s`: footprint is the number of distinct cells ever occupied.
pub fn estimate(s: &SurgerySchedule) -> ResourceEstimate {
    ResourceEstimate::new(s.occupied_cells().len() as u64, s.num_timesteps() as u64)
}

/// Braid-based reference volumes (coefficients of `d³`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Baseline {
    /// `|Y⟩` distillation with the 7-qubit code.
    #[serde(rename = "Y_BRAID")]
    YBraid,
    /// `|A⟩` distillation with the 15-qubit code.
    #[serde(rename = "A_BRAID")]
    ABraid,
    /// Bravyi–Haah `|A⟩` distillation.
    #[serde(rename = "BH_BRAID")]
    BhBraid,
}

impl Baseline {
    pub const ALL: [Baseline; 3] = [Baseline::YBraid, Baseline::ABraid, Baseline::BhBraid];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::YBraid => "Y_BRAID",
            Baseline::ABraid => "A_BRAID",
            Baseline::BhBraid => "BH_BRAID",
        }
    }

    pub fn volume_coefficient(self) -> u64 {
        match self {
            Baseline::YBraid => 140,
            Baseline::ABraid => 1500,
            Baseline::BhBraid => 4688,
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown baseline {0:?} (expected Y_BRAID, A_BRAID or BH_BRAID)")]
pub struct UnknownBaseline(pub String);

impl FromStr for Baseline {
    type Err = UnknownBaseline;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownBaseline(s.to_string()))
    }
}

/// Lattice-surgery volume relative to a braiding baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub baseline: Baseline,
    pub surgery: u64,
    pub braiding: u64,
    /// `surgery / braiding` as a reduced fraction.
    pub ratio_num: u64,
    pub ratio_den: u64,
    pub ratio: f64,
}

impl Comparison {
    /// Whether lattice surgery uses strictly less volume than braiding.
    pub fn surgery_is_cheaper(&self) -> bool {
        self.ratio_num < self.ratio_den
    }

    pub fn verdict(&self) -> &'static str {
        if self.surgery_is_cheaper() {
            "lattice surgery uses less space-time volume"
        } else if self.ratio_num == self.ratio_den {
            "both use the same space-time volume"
        } else {
            "braiding uses less space-time volume"
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}d³ vs {} {}d³: ratio {}/{} = {} ({})",
            self.surgery,
            self.baseline,
            self.braiding,
            self.ratio_num,
            self.ratio_den,
            self.ratio,
            self.verdict()
        )
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn compare_table(est: &ResourceEstimate, baseline: Baseline) -> Comparison {
    let (surgery, braiding) = (est.volume_coefficient, baseline.volume_coefficient());
    let g = gcd(surgery, braiding).max(1);
    let (ratio_num, ratio_den) = (surgery / g, braiding / g);
    Comparison {
        baseline,
        surgery,
        braiding,
        ratio_num,
        ratio_den,
        ratio: ratio_num as f64 / ratio_den as f64,
    }
}

impl fmt::Display for ResourceEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "P = {} patches, T = {} timesteps ({}d cycles), {}d² physical qubits, volume {}d³",
            self.patches,
            self.timesteps,
            self.cycles_per_d,
            self.patches * self.phys_qubits_per_patch_per_d2,
            self.volume_coefficient
        )
    }
}
