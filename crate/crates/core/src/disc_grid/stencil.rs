//! Finite-difference weights on arbitrary 1-D node sets.

/// Fornberg's recursion: weights `w[d][i]` such that
/// `f^(d)(x0) ~= sum_i w[d][i] f(nodes[i])` for `d = 0..=max_deriv`.
pub(crate) fn fornberg_weights(x0: f64, nodes: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_deriv + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_three_point() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn nonuniform_weights_are_exact_on_quadratics() {
        let nodes = [-1.0, 0.0, 0.5];
        let w = fornberg_weights(0.0, &nodes, 2);
        let f = |x: f64| 3.0 - 2.0 * x + 5.0 * x * x;
        let d1: f64 = nodes.iter().zip(&w[1]).map(|(&x, &c)| c * f(x)).sum();
        let d2: f64 = nodes.iter().zip(&w[2]).map(|(&x, &c)| c * f(x)).sum();
        assert!((d1 + 2.0).abs() < 1e-13);
        assert!((d2 - 10.0).abs() < 1e-12);
    }
}
