//! Exact rational weights and decimal conversions.

use std::ops::{Index, IndexMut};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::graph::VertexId;

/// Exact rational number used for weights and measures.
pub type Rational = Ratio<i128>;

/// Maximum number of fraction digits accepted by [`parse_decimal`].
pub const MAX_FRACTION_DIGITS: usize = 9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecimalError {
    #[error("empty number")]
    Empty,
    #[error("invalid decimal `{0}`")]
    Invalid(String),
    #[error("more than {MAX_FRACTION_DIGITS} fraction digits in `{0}`")]
    TooPrecise(String),
    #[error("negative value `{0}`")]
    Negative(String),
}

/// Parses a nonnegative decimal such as `3`, `0.25` or `12.000000001` exactly.
pub fn parse_decimal(s: &str) -> Result<Rational, DecimalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(DecimalError::Empty);
    }
    if s.starts_with('-') {
        return Err(DecimalError::Negative(s.to_string()));
    }
    let body = s.strip_prefix('+').unwrap_or(s);
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(DecimalError::Invalid(s.to_string()));
    }
    let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return Err(DecimalError::Invalid(s.to_string()));
    }
    if frac_part.len() > MAX_FRACTION_DIGITS {
        return Err(DecimalError::TooPrecise(s.to_string()));
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = i128::from_str(if digits.is_empty() { "0" } else { &digits })
        .map_err(|_| DecimalError::Invalid(s.to_string()))?;
    let denom = 10i128.pow(frac_part.len() as u32);
    Ok(Rational::new(numer, denom))
}

/// Formats a rational as a terminating decimal when possible (`2`, `0.156`,
/// `-1.5`), and as `p/q` otherwise.
pub fn format_decimal(r: &Rational) -> String {
    let mut d = *r.denom();
    let mut scale = 0u32;
    let (mut twos, mut fives) = (0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    scale += twos.max(fives);
    let sign = if r.is_negative() { "-" } else { "" };
    let abs = r.abs();
    let scaled = abs * Rational::from_integer(10i128.pow(scale));
    debug_assert!(scaled.is_integer());
    let digits = scaled.to_integer().to_string();
    if scale == 0 {
        return format!("{sign}{digits}");
    }
    let scale = scale as usize;
    let padded = format!("{digits:0>width$}", width = scale + 1);
    let (i, f) = padded.split_at(padded.len() - scale);
    format!("{sign}{i}.{f}")
}

/// Converts to `f64` for bound evaluation only.
pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exact nonnegative weight per vertex id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMap(Vec<Rational>);

impl WeightMap {
    pub fn new(weights: Vec<Rational>) -> Self {
        WeightMap(weights)
    }

    pub fn unit(n: usize) -> Self {
        WeightMap(vec![Rational::from_integer(1); n])
    }

    pub fn from_integers(ws: &[i64]) -> Self {
        WeightMap(
            ws.iter()
                .map(|&w| Rational::from_integer(w as i128))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|w| !w.is_negative())
    }

    pub fn total<'a>(&self, set: impl IntoIterator<Item = &'a VertexId>) -> Rational {
        set.into_iter()
            .fold(Rational::zero(), |acc, v| acc + self[*v])
    }
}

impl Index<VertexId> for WeightMap {
    type Output = Rational;
    fn index(&self, v: VertexId) -> &Rational {
        &self.0[v.index()]
    }
}

impl IndexMut<VertexId> for WeightMap {
    fn index_mut(&mut self, v: VertexId) -> &mut Rational {
        &mut self.0[v.index()]
    }
}

/// Serializes a rational as a decimal string.
pub fn serialize_decimal<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_decimal(r))
}

pub fn serialize_opt_decimal<S: serde::Serializer>(
    r: &Option<Rational>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&format_decimal(r)),
        None => s.serialize_none(),
    }
}
