use crate::Ratio;

/// Penalty per mismatch instance and the acceptance threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct Scoring {
    pub rename: Ratio,
    pub permutation: Ratio,
    /// Per converted slot, including the return value.
    pub conversion: Ratio,
    /// Per filled slot.
    pub default_fill: Ratio,
    /// Per hop between concepts.
    pub concept_hop: Ratio,
    pub threshold: Ratio,
}

impl Default for Scoring {
    fn default() -> Scoring {
        Scoring {
            rename: Ratio::ZERO,
            permutation: Ratio::new(5, 100),
            conversion: Ratio::new(10, 100),
            default_fill: Ratio::new(15, 100),
            concept_hop: Ratio::new(10, 100),
            threshold: Ratio::new(1, 2),
        }
    }
}
