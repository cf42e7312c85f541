use std::fmt::Debug;

use num_traits::Zero;

use crate::param::{Instantiation, LinearTerm, ParamError, Rational};

/// Edge weight arithmetic shared by the numeric and parametric algorithms.
pub trait Weight: Clone + Debug + PartialEq {
    /// Additive identity.
    fn origin() -> Self;
    fn is_origin(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, factor: &Rational) -> Self;
    /// Value of the weight at `pi`.
    fn at(&self, pi: &Instantiation) -> Result<Rational, ParamError>;
}

impl Weight for Rational {
    fn origin() -> Self {
        Zero::zero()
    }
    fn is_origin(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, factor: &Rational) -> Self {
        self * factor
    }
    fn at(&self, _pi: &Instantiation) -> Result<Rational, ParamError> {
        Ok(self.clone())
    }
}

impl Weight for LinearTerm {
    fn origin() -> Self {
        LinearTerm::zero()
    }
    fn is_origin(&self) -> bool {
        LinearTerm::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, factor: &Rational) -> Self {
        self.scale(factor)
    }
    fn at(&self, pi: &Instantiation) -> Result<Rational, ParamError> {
        self.evaluate(pi)
    }
}
