//! Alignment binning of estimated membership rows.

use ndarray::Array2;

/// Two-level alignment by the row maximum `V(i) = max_j pi_hat[i, j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    Weak,
    Strong,
}

impl Alignment {
    pub fn as_str(self) -> &'static str {
        match self {
            Alignment::Weak => "weak",
            Alignment::Strong => "strong",
        }
    }
}

/// Boundary between weak and strong alignment; the weak bin is inclusive of
/// the boundary.
#[derive(Debug, Clone, Copy)]
pub struct TwoBinConfig {
    pub strong_above: f64,
}

impl Default for TwoBinConfig {
    fn default() -> Self {
        // weak on [1/4, 5/8], strong on (5/8, 1]
        Self {
            strong_above: 5.0 / 8.0,
        }
    }
}

/// Label each node weak/strong by its dominant membership weight.
pub fn alignment_bins_two(pi_hat: &Array2<f64>, cfg: TwoBinConfig) -> Vec<Alignment> {
    pi_hat
        .rows()
        .into_iter()
        .map(|row| {
            let v = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if v > cfg.strong_above {
                Alignment::Strong
            } else {
                Alignment::Weak
            }
        })
        .collect()
}

/// Five-level likelihood bins for one designated column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LikelihoodBin {
    VeryLow,
    Low,
    Mid,
    High,
    VeryHigh,
}

impl LikelihoodBin {
    pub fn as_str(self) -> &'static str {
        match self {
            LikelihoodBin::VeryLow => "very-low",
            LikelihoodBin::Low => "low",
            LikelihoodBin::Mid => "mid",
            LikelihoodBin::High => "high",
            LikelihoodBin::VeryHigh => "very-high",
        }
    }
}

/// Cut points for the five bins: `[0, c1]`, `(c1, c2]`, `(c2, c3]`,
/// `(c3, c4]`, `(c4, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct FiveBinConfig {
    pub cuts: [f64; 4],
}

impl Default for FiveBinConfig {
    fn default() -> Self {
        Self {
            cuts: [0.2, 0.4, 0.6, 0.8],
        }
    }
}

/// Bin each node by its membership likelihood in `column`.
pub fn alignment_bins_five(
    pi_hat: &Array2<f64>,
    column: usize,
    cfg: FiveBinConfig,
) -> Vec<LikelihoodBin> {
    pi_hat
        .rows()
        .into_iter()
        .map(|row| {
            let p = row[column];
            if p <= cfg.cuts[0] {
                LikelihoodBin::VeryLow
            } else if p <= cfg.cuts[1] {
                LikelihoodBin::Low
            } else if p <= cfg.cuts[2] {
                LikelihoodBin::Mid
            } else if p <= cfg.cuts[3] {
                LikelihoodBin::High
            } else {
                LikelihoodBin::VeryHigh
            }
        })
        .collect()
}
