//! Extended integer weights carried by diagram terminals.
//!
//! A [`Value`] is a 64-bit signed weight in scaled units, extended with two
//! sentinels: `NEG_INF` marks branches that violate a hard constraint (or were
//! pruned away), `POS_INF` only ever arises inside derivatives taken across a
//! `NEG_INF` branch. The sentinel encodings are reserved: no arithmetic result
//! may silently land on them, and overflow is an error rather than wraparound.

use std::fmt;

/// Result of an arithmetic step that left the representable range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overflow;

impl fmt::Display for Overflow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "weight arithmetic overflow")
    }
}

impl std::error::Error for Overflow {}

/// Extended integer: finite scaled weight, negative infinity, or positive
/// infinity.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Value(i64);

impl Value {
    /// Absorbing under `+`, identity under `max`; encodes hard violation.
    pub const NEG_INF: Value = Value(i64::MIN);
    /// Only produced by [`Value::diff`] when the subtrahend is `NEG_INF`.
    pub const POS_INF: Value = Value(i64::MAX);
    pub const ZERO: Value = Value(0);
    pub const ONE: Value = Value(1);

    /// Wraps a finite weight. Fails on the two reserved encodings.
    pub fn new(w: i64) -> Result<Value, Overflow> {
        if w == i64::MIN || w == i64::MAX {
            Err(Overflow)
        } else {
            Ok(Value(w))
        }
    }

    pub fn is_finite(self) -> bool {
        self != Value::NEG_INF && self != Value::POS_INF
    }

    /// The finite payload, if any.
    pub fn finite(self) -> Option<i64> {
        if self.is_finite() {
            Some(self.0)
        } else {
            None
        }
    }

    /// Pointwise sum. `NEG_INF` absorbs (even against `POS_INF`), then
    /// `POS_INF` absorbs; finite sums are checked.
    pub fn add(self, other: Value) -> Result<Value, Overflow> {
        if self == Value::NEG_INF || other == Value::NEG_INF {
            return Ok(Value::NEG_INF);
        }
        if self == Value::POS_INF || other == Value::POS_INF {
            return Ok(Value::POS_INF);
        }
        let sum = self.0.checked_add(other.0).ok_or(Overflow)?;
        Value::new(sum)
    }

    /// Difference used by derivatives: the result only needs an exact sign.
    /// `t - NEG_INF` saturates to `POS_INF`; equal infinities give 0 so that
    /// ties resolve toward the positive branch.
    pub fn diff(self, other: Value) -> Result<Value, Overflow> {
        match (self, other) {
            (a, b) if a == b && !a.is_finite() => Ok(Value::ZERO),
            (Value::NEG_INF, _) => Ok(Value::NEG_INF),
            (_, Value::NEG_INF) => Ok(Value::POS_INF),
            (Value::POS_INF, _) => Ok(Value::POS_INF),
            (_, Value::POS_INF) => Ok(Value::NEG_INF),
            (a, b) => Value::new(a.0.checked_sub(b.0).ok_or(Overflow)?),
        }
    }

    pub fn max(self, other: Value) -> Value {
        Value(self.0.max(other.0))
    }

    pub fn min(self, other: Value) -> Value {
        Value(self.0.min(other.0))
    }

    /// 1 if nonnegative (including `POS_INF`), else 0. `NEG_INF` counts as
    /// negative.
    pub fn sign(self) -> Value {
        if self.0 >= 0 {
            Value::ONE
        } else {
            Value::ZERO
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Value::NEG_INF => write!(f, "-inf"),
            Value::POS_INF => write!(f, "+inf"),
            Value(w) => write!(f, "{w}"),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i32> for Value {
    fn from(w: i32) -> Value {
        Value(w as i64)
    }
}
