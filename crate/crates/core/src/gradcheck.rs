//! Central-difference gradients used to certify the losses.

use crate::scalar::Real;

/// `∂f/∂x_i ≈ (f(x + h e_i) − f(x − h e_i)) / 2h` for every element.
pub fn finite_diff_grad<T: Real>(f: impl Fn(&[T]) -> T, x: &[T], step: T) -> Vec<T> {
    let mut probe = x.to_vec();
    let two_h = step + step;
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + step;
            let plus = f(&probe);
            probe[i] = orig - step;
            let minus = f(&probe);
            probe[i] = orig;
            (plus - minus) / two_h
        })
        .collect()
}

/// `‖a − b‖ / max(‖b‖, floor)`, the relative error used by gradient checks.
pub fn relative_error<T: Real>(a: &[T], b: &[T], floor: T) -> T {
    let diff = a
        .iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + (*x - *y) * (*x - *y))
        .sqrt();
    let norm = b.iter().fold(T::zero(), |acc, y| acc + *y * *y).sqrt();
    diff / norm.max(floor)
}
