//! Compensated summation.
//!
//! Orbit sums run over 10⁶–10⁸ terms whose magnitudes span many decades;
//! Neumaier's variant of Kahan summation keeps the running error at a few
//! ulps of the final value regardless of ordering.

use std::ops::AddAssign;

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            compensation: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl AddAssign<NeumaierSum> for NeumaierSum {
    fn add_assign(&mut self, rhs: NeumaierSum) {
        self.add(rhs.sum);
        self.add(rhs.compensation);
    }
}

/// Componentwise compensated sum of complex numbers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub const fn new() -> Self {
        Self {
            re: NeumaierSum::new(),
            im: NeumaierSum::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl AddAssign<Complex64> for ComplexSum {
    fn add_assign(&mut self, rhs: Complex64) {
        self.add(rhs);
    }
}

impl AddAssign<ComplexSum> for ComplexSum {
    fn add_assign(&mut self, rhs: ComplexSum) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

pub fn neumaier<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut s = NeumaierSum::new();
    for v in values {
        s.add(v);
    }
    s.value()
}
