use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Coefficient field. Prime fields keep residues in `0..p` as `u32`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Prime(u32),
    Rational,
}

pub const GF2: Field = Field::Prime(2);
pub const GF3: Field = Field::Prime(3);

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    /// `GF(p)`; `p` must be a prime below 2^31.
    pub fn prime(p: u32) -> Result<Field> {
        if p >= 1 << 31 || !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not a prime below 2^31")));
        }
        Ok(Field::Prime(p))
    }

    pub fn characteristic(&self) -> u32 {
        match self {
            Field::Prime(p) => *p,
            Field::Rational => 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Field::Prime(_))
    }

    pub fn zero(&self) -> Scalar {
        match self {
            Field::Prime(_) => Scalar::Fp(0),
            Field::Rational => Scalar::Q(BigRational::zero()),
        }
    }

    pub fn one(&self) -> Scalar {
        match self {
            Field::Prime(_) => Scalar::Fp(1),
            Field::Rational => Scalar::Q(BigRational::one()),
        }
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match self {
            Field::Prime(p) => Scalar::Fp(v.rem_euclid(*p as i64) as u32),
            Field::Rational => Scalar::Q(BigRational::from_integer(BigInt::from(v))),
        }
    }

    pub fn from_rational(&self, v: &BigRational) -> Result<Scalar> {
        match self {
            Field::Rational => Ok(Scalar::Q(v.clone())),
            Field::Prime(p) => {
                let pb = BigInt::from(*p);
                let reduce = |x: &BigInt| -> u32 {
                    let r = x % &pb;
                    let r = if r.is_negative() { r + &pb } else { r };
                    r.to_u32().expect("residue fits in u32")
                };
                let den = reduce(v.denom());
                if den == 0 {
                    return Err(Error::NotRepresentable(v.to_string(), self.to_string()));
                }
                let num = reduce(v.numer());
                Ok(Scalar::Fp(mul_mod(num, inv_mod(den, *p), *p)))
            }
        }
    }

    /// Parses an entry such as `"3"`, `"-1/2"` or `"0.25"`.
    pub fn parse_scalar(&self, s: &str) -> Result<Scalar> {
        let q = parse_rational(s)?;
        self.from_rational(&q)
    }

    /// Number of elements, if the field is finite.
    pub fn order(&self) -> Option<u64> {
        match self {
            Field::Prime(p) => Some(*p as u64),
            Field::Rational => None,
        }
    }

    /// The `i`-th element in the enumeration `0, 1, ..., p-1` of a prime field.
    pub fn nth(&self, i: u64) -> Scalar {
        match self {
            Field::Prime(p) => Scalar::Fp((i % *p as u64) as u32),
            Field::Rational => self.from_i64(i as i64),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Prime(2) => write!(f, "gf2"),
            Field::Prime(3) => write!(f, "gf3"),
            Field::Prime(p) => write!(f, "gfp:{p}"),
            Field::Rational => write!(f, "rational"),
        }
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Field> {
        match s {
            "gf2" => Ok(GF2),
            "gf3" => Ok(GF3),
            "rational" | "q" | "Q" => Ok(Field::Rational),
            _ => {
                let p = s
                    .strip_prefix("gfp:")
                    .and_then(|t| t.parse::<u32>().ok())
                    .ok_or_else(|| Error::InvalidField(s.to_string()))?;
                Field::prime(p)
            }
        }
    }
}

/// A single field element, tagged with its representation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Fp(u32),
    Q(BigRational),
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Fp(v) => *v == 0,
            Scalar::Q(q) => q.is_zero(),
        }
    }

    pub fn to_rational(&self) -> BigRational {
        match self {
            Scalar::Fp(v) => BigRational::from_integer(BigInt::from(*v)),
            Scalar::Q(q) => q.clone(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Fp(v) => write!(f, "{v}"),
            Scalar::Q(q) => write!(f, "{q}"),
        }
    }
}

/// Parses an integer, a fraction `a/b`, or a finite decimal into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num::pow(BigInt::from(10), fp.len());
        let q = BigRational::new(n, d);
        return Ok(if neg { -q } else { q });
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

pub(crate) fn mul_mod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    let (mut t, mut nt) = (0i64, 1i64);
    let (mut r, mut nr) = (p as i64, a as i64);
    while nr != 0 {
        let q = r / nr;
        (t, nt) = (nt, t - q * nt);
        (r, nr) = (nr, r - q * nr);
    }
    t.rem_euclid(p as i64) as u32
}
