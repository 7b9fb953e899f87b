//! Windowed lattice sequences and the shift / difference calculus.
//!
//! A sequence lives on the symmetric window `[-J, J]` and is implicitly zero
//! outside it, so every operator below is total: reads past either edge give
//! `0`. The window stands in for the infinite lattice; experiment drivers are
//! responsible for sizing `J` so that nothing of interest reaches the edges.

use crate::scalar::Real;
use crate::sums::sum_of_squares;
use crate::Error;

/// Symmetric index window `[-radius, radius]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    radius: i64,
}

impl Window {
    pub fn new(radius: i64) -> Self {
        assert!(radius >= 0, "window radius must be nonnegative");
        Self { radius }
    }

    /// Window sized for a long-wave run: `J * eps >= x_support + c * t_horizon
    /// + 10`, so data moving at speed `c` for `t_horizon / eps` time units
    /// stays at least `10 / eps` sites away from the zero-filled edges.
    pub fn for_long_wave(epsilon: f64, x_support: f64, wave_speed: f64, t_horizon: f64) -> Self {
        const MARGIN: f64 = 10.0;
        assert!(epsilon > 0.0 && x_support >= 0.0 && wave_speed >= 0.0 && t_horizon >= 0.0);
        let radius = ((x_support + wave_speed * t_horizon + MARGIN) / epsilon).ceil() as i64;
        Self::new(radius)
    }

    #[inline]
    pub fn radius(&self) -> i64 {
        self.radius
    }

    #[inline]
    pub fn len(&self) -> usize {
        (2 * self.radius + 1) as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn contains(&self, j: i64) -> bool {
        j.abs() <= self.radius
    }

    #[inline]
    pub fn index_of(&self, j: i64) -> Option<usize> {
        self.contains(j).then_some((j + self.radius) as usize)
    }

    #[inline]
    pub fn site_at(&self, index: usize) -> i64 {
        index as i64 - self.radius
    }

    /// Sites in ascending order, `-radius ..= radius`.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = i64> + Clone {
        -self.radius..=self.radius
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[-{}, {}]", self.radius, self.radius)
    }
}

/// Shift / difference orientation: `Forward` references site `j + 1`,
/// `Backward` references site `j - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Real sequence on a symmetric window, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSeq<T> {
    window: Window,
    data: Vec<T>,
}

impl<T: Real> LatticeSeq<T> {
    pub fn zeros(window: Window) -> Self {
        Self {
            window,
            data: vec![T::zero(); window.len()],
        }
    }

    pub fn from_fn(window: Window, mut f: impl FnMut(i64) -> T) -> Self {
        Self {
            window,
            data: window.iter().map(&mut f).collect(),
        }
    }

    pub fn from_vec(window: Window, data: Vec<T>) -> Result<Self, Error> {
        if data.len() != window.len() {
            return Err(Error::InvalidArgument(format!(
                "data length {} does not match window {}",
                data.len(),
                window
            )));
        }
        Ok(Self { window, data })
    }

    #[inline]
    pub fn window(&self) -> Window {
        self.window
    }

    /// Value at site `j`; zero outside the window.
    #[inline]
    pub fn get(&self, j: i64) -> T {
        match self.window.index_of(j) {
            Some(i) => self.data[i],
            None => T::zero(),
        }
    }

    #[inline]
    pub fn set(&mut self, j: i64, value: T) {
        let i = self
            .window
            .index_of(j)
            .expect("site outside the sequence window");
        self.data[i] = value;
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// `(site, value)` pairs in ascending site order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        self.window.iter().zip(self.data.iter().copied())
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        Self {
            window: self.window,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Compensated `l^2` norm over the window.
    pub fn l2_norm(&self) -> T {
        sum_of_squares(self.data.iter().copied()).sqrt()
    }

    pub fn linf_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }
}

fn zip_same_window<'a, T: Real>(
    f: &'a LatticeSeq<T>,
    g: &'a LatticeSeq<T>,
    context: &'static str,
) -> Result<(&'a [T], &'a [T]), Error> {
    if f.window != g.window {
        return Err(Error::WindowMismatch {
            left: f.window,
            right: g.window,
            context,
        });
    }
    Ok((&f.data, &g.data))
}

/// Pointwise difference `f - g` (same window required).
pub fn sub<T: Real>(f: &LatticeSeq<T>, g: &LatticeSeq<T>) -> Result<LatticeSeq<T>, Error> {
    let (a, b) = zip_same_window(f, g, "sub")?;
    Ok(LatticeSeq {
        window: f.window,
        data: a.iter().zip(b).map(|(&x, &y)| x - y).collect(),
    })
}

/// `l^2` distance between two sequences on the same window.
pub fn l2_distance<T: Real>(f: &LatticeSeq<T>, g: &LatticeSeq<T>) -> Result<T, Error> {
    let (a, b) = zip_same_window(f, g, "l2_distance")?;
    Ok(sum_of_squares(a.iter().zip(b).map(|(&x, &y)| x - y)).sqrt())
}

/// Shift operator: `Forward` gives `f(j + 1)`, `Backward` gives `f(j - 1)`,
/// reading zero past the window edge.
pub fn shift<T: Real>(f: &LatticeSeq<T>, direction: Direction) -> LatticeSeq<T> {
    let offset = match direction {
        Direction::Forward => 1,
        Direction::Backward => -1,
    };
    LatticeSeq::from_fn(f.window, |j| f.get(j + offset))
}

/// Difference operator: `Forward` gives `f(j + 1) - f(j)`, `Backward` gives
/// `f(j) - f(j - 1)`, reading zero past the window edge.
pub fn difference<T: Real>(f: &LatticeSeq<T>, direction: Direction) -> LatticeSeq<T> {
    match direction {
        Direction::Forward => LatticeSeq::from_fn(f.window, |j| f.get(j + 1) - f.get(j)),
        Direction::Backward => LatticeSeq::from_fn(f.window, |j| f.get(j) - f.get(j - 1)),
    }
}
