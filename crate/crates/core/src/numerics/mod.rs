//! Dense linear algebra, activations and seeded initialization.

mod activation;
mod matrix;
mod rng;

pub use activation::{apply_activation, relu, sigmoid, Activation};
pub use matrix::{gemm, matmul, matmul_naive, Matrix, Real, Trans};
pub use rng::Rng;

/// Fan-in scaled uniform init: entries i.i.d. in `[-k, k]` with `k = 1/sqrt(cols)`.
pub fn init_uniform(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    let k = 1.0 / (cols.max(1) as Real).sqrt();
    let mut m = Matrix::zeros(rows, cols);
    for v in m.as_mut_slice() {
        *v = rng.uniform(-k, k);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic() {
        let a = init_uniform(3, 4, &mut Rng::new(7));
        let b = init_uniform(3, 4, &mut Rng::new(7));
        assert_eq!(a, b);
        assert_ne!(a, init_uniform(3, 4, &mut Rng::new(8)));
    }

    #[test]
    fn init_respects_fan_in_bound() {
        let m = init_uniform(100, 100, &mut Rng::new(1));
        assert!(m.as_slice().iter().all(|v| (-0.1..=0.1).contains(v)));
    }

    #[test]
    fn init_mean_near_zero() {
        let m = init_uniform(1000, 1000, &mut Rng::new(2));
        let mean = m.as_slice().iter().sum::<Real>() / m.len() as Real;
        assert!(mean.abs() < 0.001, "mean {mean}");
    }

    #[test]
    fn fork_is_reproducible() {
        let mut a = Rng::new(9);
        let mut b = Rng::new(9);
        assert_eq!(a.fork().next_u64(), b.fork().next_u64());
        assert_eq!(a.next_u64(), b.next_u64());
    }
}
