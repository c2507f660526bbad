//! Piecewise-linear interpolation on an ascending grid. Extrapolation is
//! forbidden: queries outside the grid hull are an error.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct LinearInterp<S> {
    xs: Vec<S>,
    ys: Vec<S>,
}

impl<S: Scalar> LinearInterp<S> {
    pub fn new(xs: Vec<S>, ys: Vec<S>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Domain(
                "interpolation grid needs at least two aligned samples".into(),
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "interpolation grid must be strictly ascending".into(),
            ));
        }
        Ok(Self { xs, ys })
    }

    pub fn lo(&self) -> S {
        self.xs[0]
    }

    pub fn hi(&self) -> S {
        *self.xs.last().unwrap()
    }

    pub fn eval(&self, x: S) -> Result<S> {
        if x < self.lo() || x > self.hi() {
            return Err(Error::Domain(format!(
                "query {x} outside grid hull [{}, {}]",
                self.lo(),
                self.hi()
            )));
        }
        let idx = match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => return Ok(self.ys[i]),
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.xs[idx], self.xs[idx + 1]);
        let (y0, y1) = (self.ys[idx], self.ys[idx + 1]);
        let w = (x - x0) / (x1 - x0);
        Ok(y0 + w * (y1 - y0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_rejects_extrapolation() {
        let li = LinearInterp::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 2.0]).unwrap();
        assert_eq!(li.eval(0.5).unwrap(), 1.0);
        assert_eq!(li.eval(2.0).unwrap(), 2.0);
        assert!(li.eval(-0.1).is_err());
        assert!(li.eval(3.1).is_err());
    }
}
