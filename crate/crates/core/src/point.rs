//! Points of ℝⁿ and extended reals ℝ ∪ {+∞}.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Deref, Index, Mul, Neg, Sub};

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A point of ℝⁿ. Coordinates are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(SmallVec<[f64; 4]>);

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let coords = coords.into();
        if coords.is_empty() {
            return Err(Error::InvalidParameter("point must have dimension >= 1".into()));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "coordinate {i} is not finite ({})",
                coords[i]
            )));
        }
        Ok(Point(SmallVec::from_vec(coords)))
    }

    /// Builds a point from coordinates that are already known to be finite.
    pub(crate) fn from_iter_unchecked(coords: impl IntoIterator<Item = f64>) -> Self {
        let p = Point(coords.into_iter().collect());
        debug_assert!(p.0.iter().all(|c| c.is_finite()), "non-finite point {p:?}");
        p
    }

    pub fn zeros(dim: usize) -> Self {
        Point(SmallVec::from_elem(0.0, dim))
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut p = Self::zeros(dim);
        p.0[axis] = 1.0;
        p
    }

    pub fn splat(dim: usize, value: f64) -> Self {
        Point(SmallVec::from_elem(value, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().fold(0.0f64, |acc, c| acc.hypot(*c))
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0f64, |acc, (a, b)| acc.hypot(a - b))
    }

    pub fn scale(&self, s: f64) -> Point {
        Point(self.0.iter().map(|c| c * s).collect())
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Point) -> Point {
        Point(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + s * b).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Point {
        Point(self.0.iter().map(|c| f(*c)).collect())
    }

    pub fn zip_map(&self, other: &Point, f: impl Fn(f64, f64) -> f64) -> Point {
        Point(self.0.iter().zip(other.0.iter()).map(|(a, b)| f(*a, *b)).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn check_dim(&self, expected: usize, context: &str) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::dim(context, expected, self.dim()))
        }
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        self.scale(s)
    }
}

impl Neg for &Point {
    type Output = Point;
    fn neg(self) -> Point {
        self.scale(-1.0)
    }
}

impl serde::Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

/// Comma-separated decimals, e.g. `"3,4"` or `"(3, 4)"`.
impl std::str::FromStr for Point {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let coords = body
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad coordinate {:?} in point {s:?}", c.trim())))
            })
            .collect::<Result<Vec<f64>>>()?;
        Point::new(coords)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", fmt_real(*c))?;
        }
        write!(f, ")")
    }
}

/// Formats a real with 12 decimals, trailing zeros trimmed, so closed-form
/// results such as `0.8 * 3` print as `2.4`.
pub fn fmt_real(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "+inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// A value of ℝ ∪ {+∞}. Never −∞ and never NaN.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);
    pub const ZERO: ExtReal = ExtReal(0.0);

    pub fn finite(v: f64) -> Result<Self> {
        if v.is_finite() {
            Ok(ExtReal(v))
        } else {
            Err(Error::ExtendedArithmetic("expected a finite real"))
        }
    }

    pub fn new(v: f64) -> Result<Self> {
        if v.is_nan() || v == f64::NEG_INFINITY {
            Err(Error::ExtendedArithmetic("value is NaN or -inf"))
        } else {
            Ok(ExtReal(v))
        }
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_infinite(self) -> bool {
        !self.0.is_finite()
    }

    /// The finite value, if any.
    pub fn value(self) -> Option<f64> {
        self.is_finite().then_some(self.0)
    }

    /// The raw representation; +∞ maps to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        self.0
    }

    /// Adds a finite real; +∞ absorbs.
    pub fn add_real(self, r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::ExtendedArithmetic("added term must be finite"));
        }
        Ok(ExtReal(self.0 + r))
    }

    /// `self - other`; fails when the difference is ∞ − ∞ or −∞.
    pub fn try_sub(self, other: ExtReal) -> Result<Self> {
        match (self.is_finite(), other.is_finite()) {
            (_, true) => Ok(ExtReal(self.0 - other.0)),
            (false, false) => Err(Error::ExtendedArithmetic("inf - inf is undefined")),
            (true, false) => Err(Error::ExtendedArithmetic("difference would be -inf")),
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        ExtReal(self.0 + rhs.0)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_real(self.0))
    }
}
