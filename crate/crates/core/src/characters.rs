//! Dirichlet characters in characteristic zero and their reductions mod 2.
//!
//! A character mod `N` is fixed by its values on canonical generators of
//! `(Z/N)^x`: one generator per odd prime power (its smallest primitive root,
//! lifted by CRT to be 1 at the other factors), and `-1`, `5` for the 2-power
//! part. Values are roots of unity kept as exact fractions in `Q/Z`.
//!
//! Reduction mod 2 kills the 2-power part of a root of unity and sends
//! `zeta_o` (odd `o`) to `g^((2^k - 1)/o)` for the canonical generator `g` of
//! the smallest canonical field `F_{2^k}` containing the `o`-th roots of unity.
//! Because the canonical fields form a compatible tower this is one coherent
//! choice of prime above 2 in every cyclotomic field.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{divisors, factorize, gcd, inv_mod, lcm, odd_part, order_of_two, pow_mod};
use crate::gf2k::{BinaryField, FieldElem, FieldError, Poly, MAX_DEGREE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharError {
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("modulus {0} is even")]
    EvenModulus(u64),
    #[error("{ell} is not coprime to 2*{modulus}")]
    BadPrime { ell: u64, modulus: u64 },
    #[error("exponent vector {got:?} does not fit cyclic orders {orders:?}")]
    BadExponents { got: Vec<u64>, orders: Vec<u64> },
    #[error("roots of unity of order {order} need F_2^{degree}, beyond the supported fields")]
    FieldTooLarge { order: u64, degree: u64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Cyclic decomposition of `(Z/N)^x` with canonical generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnitGroupStructure {
    pub modulus: u64,
    pub orders: Vec<u64>,
    pub generators: Vec<u64>,
    /// Prime-power modulus each generator lives on.
    components: Vec<u64>,
}

/// Smallest primitive root modulo an odd prime power.
fn primitive_root(p: u64, q: u64) -> u64 {
    let phi = q / p * (p - 1);
    let primes: Vec<u64> = factorize(phi).into_iter().map(|(r, _)| r).collect();
    (2..q)
        .find(|&g| g % p != 0 && primes.iter().all(|&r| pow_mod(g, phi / r, q) != 1))
        .expect("odd prime powers have primitive roots")
}

/// `x` with `x = a mod q` and `x = 1 mod rest`, `gcd(q, rest) = 1`.
fn crt_lift(a: u64, q: u64, rest: u64) -> u64 {
    if rest == 1 {
        return a % q;
    }
    // x = 1 + rest * t, rest * t = a - 1 mod q
    let inv = inv_mod(rest % q, q).expect("coprime");
    let t = ((a + q - 1) % q) as u128 * inv as u128 % q as u128;
    (1 + rest as u128 * t) as u64 % (q * rest)
}

impl UnitGroupStructure {
    pub fn new(modulus: u64) -> Result<Self, CharError> {
        if modulus == 0 {
            return Err(CharError::ZeroModulus);
        }
        let mut orders = Vec::new();
        let mut generators = Vec::new();
        let mut components = Vec::new();
        for (p, e) in factorize(modulus) {
            let q = p.pow(e);
            let rest = modulus / q;
            if p == 2 {
                if e >= 2 {
                    orders.push(2);
                    generators.push(crt_lift(q - 1, q, rest));
                    components.push(q);
                }
                if e >= 3 {
                    orders.push(q / 4);
                    generators.push(crt_lift(5, q, rest));
                    components.push(q);
                }
            } else {
                orders.push(q / p * (p - 1));
                generators.push(crt_lift(primitive_root(p, q), q, rest));
                components.push(q);
            }
        }
        Ok(Self {
            modulus,
            orders,
            generators,
            components,
        })
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// Group exponent `mu`.
    pub fn exponent(&self) -> u64 {
        self.orders.iter().fold(1, |a, &o| lcm(a, o))
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Exponents `x_i` with `n = prod g_i^{x_i}`, or `None` when `n` is not a unit.
    pub fn discrete_log(&self, n: u64) -> Option<Vec<u64>> {
        if gcd(n % self.modulus, self.modulus) != 1 {
            return None;
        }
        let mut out = Vec::with_capacity(self.rank());
        let mut i = 0;
        while i < self.rank() {
            let q = self.components[i];
            let r = n % q;
            if q.is_multiple_of(2) {
                // 2-power component: n = (-1)^a 5^b mod q
                let (a, r) = if r % 4 == 3 { (1, q - r) } else { (0, r) };
                out.push(a);
                if i + 1 < self.rank() && self.components[i + 1] == q {
                    let mut x = 1;
                    let b = (0..self.orders[i + 1])
                        .find(|_| {
                            let hit = x == r;
                            x = x * 5 % q;
                            hit
                        })
                        .expect("5 generates the 1 mod 4 units");
                    out.push(b);
                    i += 1;
                }
            } else {
                let g = self.generators[i] % q;
                let mut x = 1;
                let e = (0..self.orders[i])
                    .find(|_| {
                        let hit = x == r;
                        x = x * g % q;
                        hit
                    })
                    .expect("primitive root generates");
                out.push(e);
            }
            i += 1;
        }
        Some(out)
    }
}

/// Root of unity `exp(2 pi i num/den)`, kept reduced with `0 <= num < den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootOfUnity {
    pub num: u64,
    pub den: u64,
}

impl RootOfUnity {
    pub fn new(num: u64, den: u64) -> Self {
        let num = num % den;
        let g = gcd(num, den);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub fn one() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn order(&self) -> u64 {
        self.den
    }

    pub fn mul(self, other: Self) -> Self {
        let den = lcm(self.den, other.den);
        Self::new(self.num * (den / self.den) + other.num * (den / other.den), den)
    }

    pub fn pow(self, e: u64) -> Self {
        Self::new(((self.num as u128 * e as u128) % self.den as u128) as u64, self.den)
    }

    /// Image mod 2 in the canonical field `field`, which must contain the
    /// odd-order roots of unity involved.
    pub fn reduce_in(self, field: BinaryField) -> Result<FieldElem, CharError> {
        let o = odd_part(self.den);
        let nu = self.den / o;
        let q = field.order() as u64 - 1;
        if !q.is_multiple_of(o) {
            return Err(FieldError::IncompatibleDegrees {
                from: order_of_two(o) as u32,
                to: field.degree(),
            }
            .into());
        }
        let exp = if o == 1 {
            0
        } else {
            self.num % o * inv_mod(nu % o, o).expect("nu is a power of two") % o
        };
        Ok(field.generator().pow(q / o * exp))
    }
}

/// Smallest canonical field containing the `o`-th roots of unity (`o` odd).
pub fn field_for_odd_order(o: u64) -> Result<BinaryField, CharError> {
    let degree = order_of_two(o);
    if degree > MAX_DEGREE as u64 {
        return Err(CharError::FieldTooLarge { order: o, degree });
    }
    Ok(BinaryField::new(degree as u32)?)
}

/// Character `(Z/N)^x -> C^x` with `chi(g_i) = zeta_{o_i}^{e_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Char0 {
    group: UnitGroupStructure,
    exponents: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct Char0Repr {
    modulus: u64,
    exponents: Vec<u64>,
}

impl Serialize for Char0 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Char0Repr {
            modulus: self.modulus(),
            exponents: self.exponents.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Char0 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = Char0Repr::deserialize(d)?;
        Char0::new(r.modulus, r.exponents).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Char0 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi_{}{:?}", self.modulus(), self.exponents)
    }
}

impl Char0 {
    pub fn new(modulus: u64, exponents: Vec<u64>) -> Result<Self, CharError> {
        let group = UnitGroupStructure::new(modulus)?;
        Self::from_group(group, exponents)
    }

    pub fn from_group(group: UnitGroupStructure, exponents: Vec<u64>) -> Result<Self, CharError> {
        // an empty exponent list means trivial
        let exponents = if exponents.is_empty() {
            vec![0; group.rank()]
        } else {
            exponents
        };
        if exponents.len() != group.rank()
            || exponents.iter().zip(&group.orders).any(|(e, o)| e >= o)
        {
            return Err(CharError::BadExponents {
                got: exponents,
                orders: group.orders.clone(),
            });
        }
        Ok(Self { group, exponents })
    }

    pub fn trivial(modulus: u64) -> Result<Self, CharError> {
        Self::new(modulus, Vec::new())
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    pub fn group(&self) -> &UnitGroupStructure {
        &self.group
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    /// `chi(g_i)`.
    pub fn generator_value(&self, i: usize) -> RootOfUnity {
        RootOfUnity::new(self.exponents[i], self.group.orders[i])
    }

    pub fn value(&self, n: u64) -> Option<RootOfUnity> {
        let logs = self.group.discrete_log(n)?;
        Some(
            logs.iter()
                .enumerate()
                .fold(RootOfUnity::one(), |acc, (i, &x)| acc.mul(self.generator_value(i).pow(x))),
        )
    }

    pub fn order(&self) -> u64 {
        (0..self.group.rank()).fold(1, |acc, i| lcm(acc, self.generator_value(i).order()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.modulus(), other.modulus());
        let exponents = self
            .exponents
            .iter()
            .zip(&other.exponents)
            .zip(&self.group.orders)
            .map(|((a, b), o)| (a + b) % o)
            .collect();
        Self {
            group: self.group.clone(),
            exponents,
        }
    }

    /// Smallest modulus through which the character factors.
    pub fn conductor(&self) -> u64 {
        conductor_by_search(self.modulus(), |n| self.value(n) == Some(RootOfUnity::one()))
    }

    /// Reduction modulo the canonical prime above 2.
    pub fn reduce_mod2(&self) -> Result<CharMod2, CharError> {
        let o = odd_part(self.order());
        let field = field_for_odd_order(o)?;
        let images = (0..self.group.rank())
            .map(|i| self.generator_value(i).reduce_in(field))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CharMod2 {
            group: self.group.clone(),
            field,
            images,
        })
    }
}

/// Smallest divisor `d` of `modulus` such that `is_one(n)` holds for every
/// unit `n = 1 mod d`.
fn conductor_by_search(modulus: u64, is_one: impl Fn(u64) -> bool) -> u64 {
    for d in divisors(modulus) {
        let ok = (0..modulus / d)
            .map(|t| 1 + d * t)
            .filter(|&n| gcd(n, modulus) == 1)
            .all(&is_one);
        if ok {
            return d;
        }
    }
    modulus
}

/// All characters mod `modulus`, exponent tuples in lexicographic order,
/// trivial character first.
pub fn enumerate_char0(modulus: u64) -> Result<Vec<Char0>, CharError> {
    let group = UnitGroupStructure::new(modulus)?;
    let mut out = Vec::with_capacity(group.order() as usize);
    let mut e = vec![0u64; group.rank()];
    loop {
        out.push(Char0 {
            group: group.clone(),
            exponents: e.clone(),
        });
        // odometer, last position fastest
        let mut i = group.rank();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            e[i] += 1;
            if e[i] < group.orders[i] {
                break;
            }
            e[i] = 0;
        }
    }
}

/// Characters mod odd `m` that reduce to the trivial character mod 2:
/// exactly those of 2-power order.
pub fn delta_group(m: u64) -> Result<Vec<Char0>, CharError> {
    if m.is_multiple_of(2) {
        return Err(CharError::EvenModulus(m));
    }
    Ok(enumerate_char0(m)?
        .into_iter()
        .filter(|c| c.order().is_power_of_two())
        .collect())
}

/// Homomorphism `(Z/N)^x -> F_{2^k}^x` of odd order, always stored over the
/// smallest canonical field containing its image.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CharMod2 {
    group: UnitGroupStructure,
    field: BinaryField,
    images: Vec<FieldElem>,
}

#[derive(Serialize, Deserialize)]
struct CharMod2Repr {
    modulus: u64,
    field_degree: u32,
    generator_images: Vec<u32>,
}

impl Serialize for CharMod2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CharMod2Repr {
            modulus: self.modulus(),
            field_degree: self.field.degree(),
            generator_images: self.images.iter().map(|x| x.value()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CharMod2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = CharMod2Repr::deserialize(d)?;
        let group = UnitGroupStructure::new(r.modulus).map_err(D::Error::custom)?;
        let field = BinaryField::new(r.field_degree).map_err(D::Error::custom)?;
        let images = r
            .generator_images
            .iter()
            .map(|&v| field.elem(v))
            .collect::<Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        CharMod2::from_images(group, images).map_err(D::Error::custom)
    }
}

impl fmt::Display for CharMod2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let imgs: Vec<String> = self.images.iter().map(|x| x.to_string()).collect();
        write!(f, "chibar_{}[{}]", self.modulus(), imgs.join(","))
    }
}

impl CharMod2 {
    /// Character with the given generator images. Images must be units whose
    /// orders divide the generator orders; the field is shrunk to the
    /// smallest one containing them.
    pub fn from_images(group: UnitGroupStructure, images: Vec<FieldElem>) -> Result<Self, CharError> {
        let bad = || CharError::BadExponents {
            got: images.iter().map(|x| x.value() as u64).collect(),
            orders: group.orders.clone(),
        };
        if images.len() != group.rank() {
            return Err(bad());
        }
        let mut degree = 1;
        for (x, &o) in images.iter().zip(&group.orders) {
            if x.is_zero() || o % x.multiplicative_order().unwrap_or(0) != 0 {
                return Err(bad());
            }
            degree = crate::gf2k::lcm(degree, x.degree_over_f2());
        }
        let field = BinaryField::new(degree)?;
        let images = images
            .into_iter()
            .map(|x| x.restrict(field).expect("degree checked"))
            .collect();
        Ok(Self { group, field, images })
    }

    pub fn trivial(modulus: u64) -> Result<Self, CharError> {
        let group = UnitGroupStructure::new(modulus)?;
        let f2 = BinaryField::prime();
        let images = vec![f2.one(); group.rank()];
        Ok(Self {
            group,
            field: f2,
            images,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    pub fn field(&self) -> BinaryField {
        self.field
    }

    pub fn group(&self) -> &UnitGroupStructure {
        &self.group
    }

    pub fn generator_images(&self) -> &[FieldElem] {
        &self.images
    }

    pub fn is_trivial(&self) -> bool {
        self.images.iter().all(|x| x.is_one())
    }

    pub fn order(&self) -> u64 {
        self.images
            .iter()
            .fold(1, |acc, x| lcm(acc, x.multiplicative_order().expect("unit")))
    }

    pub fn value(&self, n: u64) -> Option<FieldElem> {
        let logs = self.group.discrete_log(n)?;
        Some(
            logs.iter()
                .zip(&self.images)
                .fold(self.field.one(), |acc, (&x, &g)| acc * g.pow(x)),
        )
    }

    pub fn mul(&self, other: &Self) -> Result<Self, CharError> {
        assert_eq!(self.modulus(), other.modulus());
        let field = self.field.compositum(&other.field)?;
        let images = self
            .images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| Ok(a.embed(field)? * b.embed(field)?))
            .collect::<Result<Vec<_>, FieldError>>()?;
        Self::from_images(self.group.clone(), images)
    }

    pub fn inverse(&self) -> Self {
        let images = self
            .images
            .iter()
            .map(|x| x.inverse().expect("unit"))
            .collect();
        Self {
            group: self.group.clone(),
            field: self.field,
            images,
        }
    }

    /// Apply the field Frobenius `times` times to every value.
    pub fn frobenius(&self, times: u32) -> Self {
        Self {
            group: self.group.clone(),
            field: self.field,
            images: self.images.iter().map(|x| x.frobenius(times)).collect(),
        }
    }

    pub fn conductor(&self) -> u64 {
        conductor_by_search(self.modulus(), |n| self.value(n).is_some_and(|v| v.is_one()))
    }

    /// The same character viewed modulo `modulus`, which must be a multiple
    /// of the conductor.
    pub fn with_modulus(&self, modulus: u64) -> Result<Self, CharError> {
        let conductor = self.conductor();
        if !modulus.is_multiple_of(conductor) {
            return Err(CharError::BadExponents {
                got: vec![modulus],
                orders: vec![conductor],
            });
        }
        let group = UnitGroupStructure::new(modulus)?;
        let images = group
            .generators
            .iter()
            .map(|&g| {
                // a unit mod self.modulus congruent to g mod conductor
                let n = (0..)
                    .map(|t| g % conductor + conductor * t)
                    .find(|&n| gcd(n, self.modulus()) == 1)
                    .expect("units exist in every residue class");
                self.value(n).expect("unit")
            })
            .collect();
        Self::from_images(group, images)
    }

    /// The primitive character inducing this one.
    pub fn primitive(&self) -> Self {
        self.with_modulus(self.conductor()).expect("conductor divides itself")
    }

    /// `1 + chibar(ell) X`.
    pub fn frob_poly(&self, ell: u64) -> Result<Poly, CharError> {
        if gcd(ell, 2 * self.modulus()) != 1 {
            return Err(CharError::BadPrime {
                ell,
                modulus: self.modulus(),
            });
        }
        let v = self.value(ell).expect("coprime");
        Ok(Poly::from_elems(self.field, &[self.field.one(), v]))
    }
}
