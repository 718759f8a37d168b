use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::FieldError;

/// The residue field k: ℚ or 𝔽_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResidueField {
    Rationals,
    Prime(u64),
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut i = 2u64;
    while i * i <= p {
        if p % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

impl ResidueField {
    pub fn prime(p: u64) -> Result<ResidueField, FieldError> {
        if p > u32::MAX as u64 || !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(ResidueField::Prime(p))
    }

    /// 0 for ℚ.
    pub fn characteristic(&self) -> u64 {
        match self {
            ResidueField::Rationals => 0,
            ResidueField::Prime(p) => *p,
        }
    }
}

impl fmt::Display for ResidueField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidueField::Rationals => write!(f, "Q"),
            ResidueField::Prime(p) => write!(f, "F_{p}"),
        }
    }
}

/// An element of k.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Q(BigRational),
    Fp { v: u64, p: u64 },
}

impl Scalar {
    pub fn zero(k: ResidueField) -> Scalar {
        Scalar::from_i64(k, 0)
    }

    pub fn one(k: ResidueField) -> Scalar {
        Scalar::from_i64(k, 1)
    }

    pub fn from_i64(k: ResidueField, n: i64) -> Scalar {
        match k {
            ResidueField::Rationals => Scalar::Q(BigRational::from_integer(n.into())),
            ResidueField::Prime(p) => Scalar::Fp {
                v: n.rem_euclid(p as i64) as u64,
                p,
            },
        }
    }

    pub fn from_bigint(k: ResidueField, n: &BigInt) -> Scalar {
        match k {
            ResidueField::Rationals => Scalar::Q(BigRational::from_integer(n.clone())),
            ResidueField::Prime(p) => Scalar::Fp {
                v: n.mod_floor(&BigInt::from(p)).to_u64().unwrap(),
                p,
            },
        }
    }

    pub fn from_rational(k: ResidueField, r: &BigRational) -> Result<Scalar, FieldError> {
        let n = Scalar::from_bigint(k, r.numer());
        let d = Scalar::from_bigint(k, r.denom());
        Ok(&n * &d.inv()?)
    }

    pub fn field(&self) -> ResidueField {
        match self {
            Scalar::Q(_) => ResidueField::Rationals,
            Scalar::Fp { p, .. } => ResidueField::Prime(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_one(),
            Scalar::Fp { v, .. } => *v == 1,
        }
    }

    /// True for ℚ elements below zero; never for 𝔽_p.
    pub fn is_negative(&self) -> bool {
        matches!(self, Scalar::Q(r) if r.is_negative())
    }

    pub fn inv(&self) -> Result<Scalar, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(match self {
            Scalar::Q(r) => Scalar::Q(r.recip()),
            Scalar::Fp { v, p } => Scalar::Fp {
                v: pow_mod(*v, p - 2, *p),
                p: *p,
            },
        })
    }

    pub fn pow(&self, e: u64) -> Scalar {
        match self {
            Scalar::Q(r) => Scalar::Q(num_traits::pow(r.clone(), e as usize)),
            Scalar::Fp { v, p } => Scalar::Fp {
                v: pow_mod(*v, e, *p),
                p: *p,
            },
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Q(r) => Some(r),
            Scalar::Fp { .. } => None,
        }
    }
}

pub(crate) fn pow_mod(b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let m = p as u128;
    let mut base = (b % p) as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc as u64
}

fn check(a: &Scalar, b: &Scalar) {
    assert_eq!(a.field(), b.field(), "scalars from different residue fields");
}

impl std::ops::Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        check(self, rhs);
        match (self, rhs) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a + b),
            (Scalar::Fp { v: a, p }, Scalar::Fp { v: b, .. }) => Scalar::Fp {
                v: ((*a as u128 + *b as u128) % *p as u128) as u64,
                p: *p,
            },
            _ => unreachable!(),
        }
    }
}

impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Q(a) => Scalar::Q(-a),
            Scalar::Fp { v, p } => Scalar::Fp {
                v: if *v == 0 { 0 } else { p - v },
                p: *p,
            },
        }
    }
}

impl std::ops::Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl std::ops::Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        check(self, rhs);
        match (self, rhs) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a * b),
            (Scalar::Fp { v: a, p }, Scalar::Fp { v: b, .. }) => Scalar::Fp {
                v: ((*a as u128 * *b as u128) % *p as u128) as u64,
                p: *p,
            },
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Q(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Fp { v, .. } => write!(f, "{v}"),
        }
    }
}
