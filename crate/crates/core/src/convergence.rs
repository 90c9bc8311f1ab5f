//! Observed convergence orders over grid-doubling sequences.

/// Observed order between two levels whose spacing halves: `log2(e_coarse / e_fine)`.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Errors measured on a sequence of grids, each doubling the previous one.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementStudy {
    pub levels: Vec<(usize, usize)>,
    pub errors: Vec<f64>,
}

impl RefinementStudy {
    /// Runs `measure` on every `(n_r, n_theta)` level.
    pub fn run(levels: &[(usize, usize)], mut measure: impl FnMut(usize, usize) -> f64) -> Self {
        let errors = levels.iter().map(|&(nr, nt)| measure(nr, nt)).collect();
        Self {
            levels: levels.to_vec(),
            errors,
        }
    }

    pub fn orders(&self) -> Vec<f64> {
        self.errors
            .windows(2)
            .map(|w| observed_order(w[0], w[1]))
            .collect()
    }

    pub fn finest_error(&self) -> f64 {
        *self.errors.last().expect("empty study")
    }

    pub fn finest_order(&self) -> Option<f64> {
        self.orders().last().copied()
    }

    /// True when the finest error has reached the rounding `floor`, or when
    /// errors strictly decrease and the finest observed order is at least
    /// `min_order`.
    pub fn converges_at(&self, min_order: f64, floor: f64) -> bool {
        if self.finest_error() <= floor {
            return true;
        }
        let decreasing = self.errors.windows(2).all(|w| w[1] < w[0]);
        decreasing && self.finest_order().is_some_and(|p| p >= min_order)
    }

    /// True when each level improves on the previous one (or sits at `floor`).
    pub fn decreasing(&self, floor: f64) -> bool {
        self.errors.windows(2).all(|w| w[1] < w[0] || w[1] <= floor)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let orders = self.orders();
        for (i, ((nr, nt), e)) in self.levels.iter().zip(&self.errors).enumerate() {
            if i == 0 {
                s.push_str(&format!("({nr},{nt}) {e:.3e}"));
            } else {
                s.push_str(&format!("; ({nr},{nt}) {e:.3e} [p={:.2}]", orders[i - 1]));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_order_sequence() {
        let study = RefinementStudy {
            levels: vec![(8, 16), (16, 32), (32, 64)],
            errors: vec![1.0, 0.25, 0.0625],
        };
        assert_eq!(study.orders(), vec![2.0, 2.0]);
        assert!(study.converges_at(2.0, 1e-13));
        assert!(!study.converges_at(2.5, 1e-13));
    }

    #[test]
    fn rounding_floor_counts_as_converged() {
        let study = RefinementStudy {
            levels: vec![(8, 16), (16, 32)],
            errors: vec![3e-15, 4e-15],
        };
        assert!(study.converges_at(2.0, 1e-12));
        assert!(study.decreasing(1e-12));
    }
}
