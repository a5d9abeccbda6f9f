//! Runtime values: exact rationals, integers, floats, and nested pairs.
//!
//! The number kind is tracked explicitly. Arithmetic between exact kinds
//! stays exact; any operand that is already a float forces the result to a
//! float. Equality on floats is bitwise so that the coupled dual-semantics
//! checks can demand bit-for-bit agreement.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

pub type Rat = BigRational;

/// Build an exact rational from an integer pair.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValueError {
    #[error("arithmetic on non-scalar value")]
    NonScalar,
    #[error("division by zero")]
    DivisionByZero,
    #[error("expected a pair, found a scalar")]
    NotAPair,
}

/// A runtime value: a scalar with tracked number kind, or a nested pair.
#[derive(Debug, Clone)]
pub enum Value {
    /// Integer-coded discrete value (Bernoulli outcomes, comparison results).
    Int(i64),
    /// Exact rational real.
    Rat(Rat),
    /// Floating-point real (forced by the normal quantile).
    F64(f64),
    Pair(Box<Value>, Box<Value>),
    /// The empty input of a model that samples nothing.
    Unit,
}

impl Value {
    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn is_scalar(&self) -> bool {
        !matches!(self, Value::Pair(..) | Value::Unit)
    }

    pub fn fst(&self) -> Result<&Value, ValueError> {
        match self {
            Value::Pair(a, _) => Ok(a),
            _ => Err(ValueError::NotAPair),
        }
    }

    pub fn snd(&self) -> Result<&Value, ValueError> {
        match self {
            Value::Pair(_, b) => Ok(b),
            _ => Err(ValueError::NotAPair),
        }
    }

    /// Numeric view as f64, for domain checks and float promotion.
    pub fn as_f64(&self) -> Result<f64, ValueError> {
        match self {
            Value::Int(n) => Ok(*n as f64),
            Value::Rat(r) => Ok(rat_to_f64(r)),
            Value::F64(x) => Ok(*x),
            _ => Err(ValueError::NonScalar),
        }
    }

    /// Exact rational view; `None` when the value is a float or a pair.
    pub fn as_rat(&self) -> Option<Rat> {
        match self {
            Value::Int(n) => Some(rat_int(*n)),
            Value::Rat(r) => Some(r.clone()),
            _ => None,
        }
    }

    pub fn is_float(&self) -> bool {
        matches!(self, Value::F64(_))
    }
}

fn both_exact(a: &Value, b: &Value) -> Option<(Rat, Rat)> {
    Some((a.as_rat()?, b.as_rat()?))
}

pub fn add(a: &Value, b: &Value) -> Result<Value, ValueError> {
    if let (Value::Int(x), Value::Int(y)) = (a, b) {
        return Ok(Value::Int(x + y));
    }
    match both_exact(a, b) {
        Some((x, y)) => Ok(Value::Rat(x + y)),
        None => Ok(Value::F64(a.as_f64()? + b.as_f64()?)),
    }
}

pub fn sub(a: &Value, b: &Value) -> Result<Value, ValueError> {
    if let (Value::Int(x), Value::Int(y)) = (a, b) {
        return Ok(Value::Int(x - y));
    }
    match both_exact(a, b) {
        Some((x, y)) => Ok(Value::Rat(x - y)),
        None => Ok(Value::F64(a.as_f64()? - b.as_f64()?)),
    }
}

pub fn mul(a: &Value, b: &Value) -> Result<Value, ValueError> {
    if let (Value::Int(x), Value::Int(y)) = (a, b) {
        return Ok(Value::Int(x * y));
    }
    match both_exact(a, b) {
        Some((x, y)) => Ok(Value::Rat(x * y)),
        None => Ok(Value::F64(a.as_f64()? * b.as_f64()?)),
    }
}

/// Division always leaves the integer kind: exact operands give a rational.
pub fn div(a: &Value, b: &Value) -> Result<Value, ValueError> {
    match both_exact(a, b) {
        Some((x, y)) => {
            if y.is_zero() {
                Err(ValueError::DivisionByZero)
            } else {
                Ok(Value::Rat(x / y))
            }
        }
        None => {
            let d = b.as_f64()?;
            if d == 0.0 {
                Err(ValueError::DivisionByZero)
            } else {
                Ok(Value::F64(a.as_f64()? / d))
            }
        }
    }
}

/// Numeric comparison across kinds: exact when both sides are exact,
/// float comparison as soon as either side is a float.
pub fn num_cmp(a: &Value, b: &Value) -> Result<Ordering, ValueError> {
    match both_exact(a, b) {
        Some((x, y)) => Ok(x.cmp(&y)),
        None => {
            let (x, y) = (a.as_f64()?, b.as_f64()?);
            x.partial_cmp(&y).ok_or(ValueError::NonScalar)
        }
    }
}

/// Bitwise structural equality. Floats compare by bit pattern; kinds are
/// never conflated (`Int(1)` differs from `Rat(1)`).
impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Rat(a), Value::Rat(b)) => a == b,
            (Value::F64(a), Value::F64(b)) => a.to_bits() == b.to_bits(),
            (Value::Pair(a1, b1), Value::Pair(a2, b2)) => a1 == a2 && b1 == b2,
            (Value::Unit, Value::Unit) => true,
            _ => false,
        }
    }
}

impl Eq for Value {}

fn kind_rank(v: &Value) -> u8 {
    match v {
        Value::Unit => 0,
        Value::Int(_) => 1,
        Value::Rat(_) => 2,
        Value::F64(_) => 3,
        Value::Pair(..) => 4,
    }
}

/// Total order used to sort measure supports deterministically.
impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Rat(a), Value::Rat(b)) => a.cmp(b),
            (Value::F64(a), Value::F64(b)) => a.total_cmp(b),
            (Value::Pair(a1, b1), Value::Pair(a2, b2)) => {
                a1.cmp(a2).then_with(|| b1.cmp(b2))
            }
            _ => kind_rank(self).cmp(&kind_rank(other)),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Render a rational: plain integer when the denominator is one, `n/d`
/// otherwise.
pub fn display_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Render a rational as a terminating decimal when its denominator is of
/// the form 2^a * 5^b, otherwise fall back to `n/d`.
pub fn display_rat_decimal(r: &Rat) -> Option<String> {
    if r.denom().is_one() {
        return Some(r.numer().to_string());
    }
    let mut d = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let mut a = 0u32;
    let mut b = 0u32;
    while (&d % &two).is_zero() {
        d /= &two;
        a += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        b += 1;
    }
    if !d.is_one() {
        return None;
    }
    let places = a.max(b);
    let scale = BigInt::from(10).pow(places);
    let scaled = r.numer() * &scale / r.denom();
    let neg = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let digits = if digits.len() <= places as usize {
        format!("{}{}", "0".repeat(places as usize + 1 - digits.len()), digits)
    } else {
        digits
    };
    let split = digits.len() - places as usize;
    Some(format!(
        "{}{}.{}",
        if neg { "-" } else { "" },
        &digits[..split],
        &digits[split..]
    ))
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Rat(r) => write!(f, "{}", display_rat(r)),
            Value::F64(x) => write!(f, "{x}"),
            Value::Pair(a, b) => write!(f, "({a},{b})"),
            Value::Unit => write!(f, "()"),
        }
    }
}
