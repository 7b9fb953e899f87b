//! Small quadrature kernels for continuum norms and averages.

use crate::scalar::Real;
use crate::sums::Kahan;

/// Composite Simpson rule on `[a, b]` with `n` subintervals (rounded up to
/// an even count). Exact on cubics per panel; error `O(h^4)` otherwise.
pub fn simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T, n: usize) -> T {
    let n = n.max(2) + n % 2;
    let h = (b - a) / T::from_f64(n as f64);
    let mut acc = Kahan::new();
    acc.add(f(a));
    acc.add(f(b));
    for i in 1..n {
        let x = a + h * T::from_f64(i as f64);
        let w = if i % 2 == 1 { T::from_f64(4.0) } else { T::from_f64(2.0) };
        acc.add(w * f(x));
    }
    acc.value() * h / T::from_f64(3.0)
}

/// Simpson integration split at interior knots, so that known kinks (like
/// the one of `|X|` at the origin) always land on panel boundaries.
pub fn simpson_split<T: Real>(f: impl Fn(T) -> T, mut a: T, b: T, knots: &[T], n_per: usize) -> T {
    let mut total = Kahan::new();
    let mut pts: Vec<T> = knots.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    pts.push(b);
    for x in pts {
        total.add(simpson(&f, a, x, n_per));
        a = x;
    }
    total.value()
}

/// Trapezoid rule on one full period of a periodic function; spectrally
/// exact for trigonometric polynomials resolved by the grid.
pub fn trapezoid_periodic<T: Real>(f: impl Fn(T) -> T, a: T, b: T, n: usize) -> T {
    let n = n.max(1);
    let h = (b - a) / T::from_f64(n as f64);
    let mut acc = Kahan::new();
    for i in 0..n {
        acc.add(f(a + h * T::from_f64(i as f64)));
    }
    acc.value() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson(|x: f64| x * x * x, 0.0, 1.0, 8);
        assert!((v - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn simpson_gaussian_mass() {
        let v = simpson(|x: f64| (-x * x).exp(), -8.0, 8.0, 4000);
        assert!((v - std::f64::consts::PI.sqrt()).abs() <= 1e-12, "got {v}");
    }

    #[test]
    fn split_rule_handles_the_absolute_value_kink() {
        // integral of |x| over [-1, 2] = 1/2 + 2 = 5/2, exact once the kink
        // is a panel boundary.
        let v = simpson_split(|x: f64| x.abs(), -1.0, 2.0, &[0.0], 16);
        assert!((v - 2.5).abs() <= 1e-14, "got {v}");
    }

    #[test]
    fn periodic_trapezoid_is_spectrally_exact() {
        let tau = std::f64::consts::TAU;
        let v = trapezoid_periodic(|x: f64| x.cos().powi(2), 0.0, tau, 16);
        assert!((v - tau / 2.0).abs() <= 1e-13, "got {v}");
    }
}
