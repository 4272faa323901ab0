use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use congest_core::graph::{ceil_log2, Graph};

use crate::MwmError;

/// Dual values, weights and modifiers in fixed point: one unit is `ε′/2`,
/// the finest granularity any quantity reaches (`δ_L/2`).
pub type Q = i128;

/// Largest max weight accepted, relative to n: W ≤ max(n⁴, 2²⁰).
pub fn weight_cap(n: usize) -> u64 {
    (n as u64).saturating_pow(4).max(1 << 20)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwmConfig {
    pub epsilon: f64,
    /// ε′ = 2^-p.
    pub eps_prime_exp: u32,
    /// ε″ = ε / (48·C_H²·log₂ W), with log₂ W taken as at least 1.
    pub eps_dd: f64,
    pub k_iter: usize,
    pub c_h: usize,
    /// Max weight rounded up to a power of two.
    pub w: u64,
    pub l: u32,
}

impl MwmConfig {
    pub fn new(g: &Graph, epsilon: f64, k_iter: usize) -> Result<MwmConfig, MwmError> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(MwmError::BadEpsilon(epsilon));
        }
        for e in 0..g.m() {
            if g.weight(e) == 0 {
                return Err(MwmError::NonPositiveWeight { edge: e });
            }
        }
        let max_w = g.max_weight().max(1);
        if max_w > weight_cap(g.n()) {
            return Err(MwmError::WeightTooLarge { w: max_w, cap: weight_cap(g.n()) });
        }
        let w = max_w.next_power_of_two();
        let l = w.trailing_zeros();
        let target = (epsilon / 16.0).min(1.0 / 6.0);
        let mut p = 0;
        while 0.5f64.powi(p as i32) > target {
            p += 1;
        }
        let c_h = g.density_bound().map_or(3, |c| c.ceil().to_integer().max(1) as usize);
        let eps_dd = epsilon / (48.0 * (c_h * c_h) as f64 * l.max(1) as f64);
        Ok(MwmConfig { epsilon, eps_prime_exp: p, eps_dd, k_iter, c_h, w, l })
    }

    /// Replaces the density constant; ε″ follows it.
    pub fn with_c_h(mut self, c_h: usize) -> MwmConfig {
        self.c_h = c_h.max(1);
        self.eps_dd = self.epsilon / (48.0 * (self.c_h * self.c_h) as f64 * self.l.max(1) as f64);
        self
    }

    /// Units per 1.
    pub fn den(&self) -> Q {
        1 << (self.eps_prime_exp + 1)
    }

    pub fn eps_prime(&self) -> Ratio<i128> {
        Ratio::new(1, 1 << self.eps_prime_exp)
    }

    /// δ_i = ε′·W/2^i, in units.
    pub fn delta(&self, i: u32) -> Q {
        2 * (self.w >> i) as Q
    }

    pub fn from_int(&self, x: u64) -> Q {
        x as Q * self.den()
    }

    pub fn to_ratio(&self, q: Q) -> Ratio<i128> {
        Ratio::new(q, self.den())
    }

    pub fn to_f64(&self, q: Q) -> f64 {
        q as f64 / self.den() as f64
    }

    /// τ where scale `i` stops: W/2^{i+2} − δ_i/2 below the last scale, 0 at it.
    pub fn tau_end(&self, i: u32) -> Q {
        if i == self.l {
            0
        } else {
            self.from_int(self.w) / (1 << (i + 2)) - self.delta(i) / 2
        }
    }

    /// Iterations scale `i` should take: 1/(2ε′) at scale 0, two more above,
    /// and 1/ε′ + 1 at the last scale (which runs τ down to 0).
    pub fn expected_iterations(&self, i: u32) -> u64 {
        let half = 1u64 << (self.eps_prime_exp - 1);
        if i == self.l {
            if i == 0 {
                // Single scale: W/2 − δ₀/2 down to 0 in steps of δ₀/2.
                (1u64 << self.eps_prime_exp) - 1
            } else {
                2 * half + 1
            }
        } else if i == 0 {
            half
        } else {
            half + 2
        }
    }

    pub fn iteration_guard(&self) -> u64 {
        2 * ((1u64 << (self.eps_prime_exp - 1)) + 2)
    }

    /// Repetitions of the random-neighbour augmentation: K·C_H²·⌈log₂ n⌉.
    pub fn repetitions(&self, n: usize) -> usize {
        self.k_iter * self.c_h * self.c_h * ceil_log2(n as u64).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weighted(w: i64) -> Graph {
        Graph::from_weighted_edges(2, &[(0, 1, w)]).unwrap()
    }

    #[test]
    fn init_parameters() {
        let c = MwmConfig::new(&weighted(8), 0.5, 2).unwrap();
        assert_eq!(c.eps_prime(), Ratio::new(1, 32));
        assert_eq!((c.w, c.l), (8, 3));
        assert_eq!(c.to_ratio(c.delta(0)), Ratio::new(1, 4));
        let c = MwmConfig::new(&weighted(8), 4.0, 2).unwrap();
        assert_eq!(c.eps_prime(), Ratio::new(1, 8));
        assert_eq!(c.to_ratio(c.delta(0)), Ratio::from_integer(1));
        let c = MwmConfig::new(&weighted(5), 0.5, 2).unwrap();
        assert_eq!(c.w, 8);
    }

    #[test]
    fn iteration_counts_follow_tau_schedule() {
        let c = MwmConfig::new(&weighted(8), 0.5, 2).unwrap();
        assert_eq!(c.expected_iterations(0), 16);
        assert_eq!(c.expected_iterations(1), 18);
        assert_eq!(c.expected_iterations(3), 33);
        assert!(c.expected_iterations(3) <= c.iteration_guard());
    }
}
