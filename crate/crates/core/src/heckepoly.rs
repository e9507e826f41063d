//! Hecke eigenpackets and their polynomial systems.
//!
//! The Hecke polynomial of an eigenpacket at `ell` is
//! `sum_k (-1)^k ell^(k(k-1)/2) a(ell, k) X^k` for `k = 0..=4`, with
//! `a(ell, 0) = a(ell, 4) = 1`. Over characteristic 2 and odd `ell` every
//! prefactor is 1, so the coefficients are the eigenvalues themselves.
//! Polynomials are stored constant term first, in the orientation of
//! `det(I - rho(Frob) X)`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2k::{BinaryField, FieldElem, FieldError, Poly};
use crate::matf2k::{OpKind, OperatorLabel, SimultaneousEigenspace};

#[derive(Debug, Error)]
pub enum HeckeError {
    #[error("no eigenvalue for {kind}({ell},{k}) at level {level}")]
    Missing { level: u64, ell: u32, k: u32, kind: OpKind },
    #[error("{label} has the wrong kind at level {level}: U is used exactly for primes dividing the level")]
    WrongKind { level: u64, label: OperatorLabel },
    #[error("{ell} does not divide the level {level}")]
    NotDividing { ell: u64, level: u64 },
    #[error("{ell} divides the level {level}")]
    Dividing { ell: u64, level: u64 },
    #[error("ell = {0} must be an odd prime")]
    BadPrime(u64),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed eigenpacket file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Default prime set `L` for a level.
pub fn default_primes(level: u64) -> Vec<u64> {
    match level {
        3..=10 | 17 => vec![3, 5, 7, 11, 13],
        11 => vec![3, 5, 7, 11, 13, 17],
        13 => vec![3, 5, 7, 11],
        _ => vec![3, 5, 7],
    }
}

/// Eigenvalues `(ell, k, kind) -> a(ell, k)` of one simultaneous eigenspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eigenpacket {
    pub level: u64,
    pub field: BinaryField,
    pub dim: usize,
    pub values: BTreeMap<OperatorLabel, FieldElem>,
}

impl Eigenpacket {
    /// Checks that each operator's kind matches whether `ell` divides the level.
    pub fn new(
        level: u64,
        field: BinaryField,
        dim: usize,
        values: BTreeMap<OperatorLabel, FieldElem>,
    ) -> Result<Self, HeckeError> {
        let mut embedded = BTreeMap::new();
        for (label, v) in values {
            let expected = if level.is_multiple_of(label.ell as u64) { OpKind::U } else { OpKind::T };
            if label.kind != expected {
                return Err(HeckeError::WrongKind { level, label });
            }
            embedded.insert(label, v.embed(field)?);
        }
        Ok(Self {
            level,
            field,
            dim,
            values: embedded,
        })
    }

    pub fn from_eigenspace(level: u64, field: BinaryField, space: &SimultaneousEigenspace) -> Result<Self, HeckeError> {
        Self::new(level, field, space.space.dim(), space.eigenvalues.clone())
    }

    fn kind_at(&self, ell: u64) -> OpKind {
        if self.level.is_multiple_of(ell) {
            OpKind::U
        } else {
            OpKind::T
        }
    }

    pub fn get(&self, ell: u64, k: u32) -> Result<FieldElem, HeckeError> {
        let kind = self.kind_at(ell);
        let label = OperatorLabel { ell: ell as u32, k, kind };
        self.values.get(&label).copied().ok_or(HeckeError::Missing {
            level: self.level,
            ell: ell as u32,
            k,
            kind,
        })
    }

    /// Every `(ell, k)` for `ell` in `primes` and `k = 1, 2, 3` is present.
    pub fn check_complete(&self, primes: &[u64]) -> Result<(), HeckeError> {
        for &ell in primes {
            for k in 1..=3 {
                self.get(ell, k)?;
            }
        }
        Ok(())
    }

    pub fn embed(&self, field: BinaryField) -> Result<Self, HeckeError> {
        Self::new(self.level, field, self.dim, self.values.clone())
    }

    /// Applies `x -> x^(2^times)` to every eigenvalue.
    pub fn frobenius(&self, times: u32) -> Self {
        Self {
            values: self.values.iter().map(|(&l, v)| (l, v.frobenius(times))).collect(),
            ..self.clone()
        }
    }

    /// Smallest field containing all eigenvalues.
    pub fn eigenvalue_degree(&self) -> u32 {
        self.values
            .values()
            .fold(1, |acc, v| crate::gf2k::lcm(acc, v.degree_over_f2()))
    }
}

/// Prefactor `(-1)^k ell^(k(k-1)/2)` reduced mod 2.
fn prefactor_mod2(ell: u64, k: u32) -> bool {
    // (-1)^k is odd; ell^(k(k-1)/2) is even only when ell is even and the exponent positive
    !(ell.is_multiple_of(2) && k * (k.saturating_sub(1)) / 2 > 0)
}

fn poly_from_values(field: BinaryField, ell: u64, a: [FieldElem; 3]) -> Poly {
    let coeffs: Vec<FieldElem> = [field.one(), a[0], a[1], a[2], field.one()]
        .iter()
        .enumerate()
        .map(|(k, &c)| if prefactor_mod2(ell, k as u32) { c } else { field.zero() })
        .collect();
    Poly::from_elems(field, &coeffs)
}

fn is_odd_prime(ell: u64) -> bool {
    ell > 2 && crate::arith::factorize(ell) == vec![(ell, 1)]
}

/// Hecke polynomial of a `T` operator; `ell` must not divide the level.
pub fn hecke_poly(packet: &Eigenpacket, ell: u64) -> Result<Poly, HeckeError> {
    if !is_odd_prime(ell) {
        return Err(HeckeError::BadPrime(ell));
    }
    if packet.level.is_multiple_of(ell) {
        return Err(HeckeError::Dividing { ell, level: packet.level });
    }
    Ok(poly_from_values(
        packet.field,
        ell,
        [packet.get(ell, 1)?, packet.get(ell, 2)?, packet.get(ell, 3)?],
    ))
}

/// The same expression for the `U` operators at `ell | level`. Used only for reporting.
pub fn u_poly(packet: &Eigenpacket, ell: u64) -> Result<Poly, HeckeError> {
    if !is_odd_prime(ell) {
        return Err(HeckeError::BadPrime(ell));
    }
    if !packet.level.is_multiple_of(ell) {
        return Err(HeckeError::NotDividing { ell, level: packet.level });
    }
    Ok(poly_from_values(
        packet.field,
        ell,
        [packet.get(ell, 1)?, packet.get(ell, 2)?, packet.get(ell, 3)?],
    ))
}

/// Map `ell -> polynomial` over one field, taken pointwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolynomialSystem {
    field: BinaryField,
    polys: BTreeMap<u64, Poly>,
}

impl PolynomialSystem {
    pub fn new(field: BinaryField, polys: BTreeMap<u64, Poly>) -> Result<Self, FieldError> {
        let polys = polys
            .into_iter()
            .map(|(l, p)| Ok((l, p.embed(field)?)))
            .collect::<Result<_, FieldError>>()?;
        Ok(Self { field, polys })
    }

    /// The constant system 1 on `primes`.
    pub fn trivial(field: BinaryField, primes: &[u64]) -> Self {
        Self {
            field,
            polys: primes.iter().map(|&l| (l, Poly::one(field))).collect(),
        }
    }

    pub fn field(&self) -> BinaryField {
        self.field
    }

    pub fn primes(&self) -> Vec<u64> {
        self.polys.keys().copied().collect()
    }

    pub fn get(&self, ell: u64) -> Option<&Poly> {
        self.polys.get(&ell)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &Poly)> {
        self.polys.iter().map(|(&l, p)| (l, p))
    }

    /// Largest degree over all primes.
    pub fn degree(&self) -> usize {
        self.polys.values().filter_map(Poly::degree).max().unwrap_or(0)
    }

    /// Every polynomial has degree zero.
    pub fn is_trivial(&self) -> bool {
        self.polys.values().all(|p| p.degree() == Some(0))
    }

    pub fn embed(&self, field: BinaryField) -> Result<Self, FieldError> {
        Self::new(field, self.polys.clone())
    }

    pub fn frobenius(&self, times: u32) -> Self {
        Self {
            field: self.field,
            polys: self.polys.iter().map(|(&l, p)| (l, p.frobenius(times))).collect(),
        }
    }

    /// Pointwise product; both systems must share field and primes.
    pub fn mul(&self, other: &Self) -> Option<Self> {
        if self.field != other.field || self.primes() != other.primes() {
            return None;
        }
        Some(Self {
            field: self.field,
            polys: self.polys.iter().map(|(&l, p)| (l, p * &other.polys[&l])).collect(),
        })
    }

    /// Pointwise exact quotient, if every division is exact.
    pub fn exact_div(&self, other: &Self) -> Option<Self> {
        if self.field != other.field || self.primes() != other.primes() {
            return None;
        }
        let polys = self
            .polys
            .iter()
            .map(|(&l, p)| Some((l, p.exact_div(&other.polys[&l])?)))
            .collect::<Option<_>>()?;
        Some(Self { field: self.field, polys })
    }

    /// Degree of the smallest extension over which every polynomial splits.
    pub fn splitting_degree(&self) -> Result<u32, FieldError> {
        let mut d = 1;
        for p in self.polys.values() {
            d = crate::gf2k::lcm(d, p.factor()?.splitting_degree());
        }
        Ok(crate::gf2k::lcm(d, self.field.degree()))
    }
}

/// `ell -> hecke_poly(packet, ell)` on the primes of `primes` not dividing the level.
pub fn poly_system(packet: &Eigenpacket, primes: &[u64]) -> Result<PolynomialSystem, HeckeError> {
    let polys = good_primes(packet.level, primes)
        .into_iter()
        .map(|ell| Ok((ell, hecke_poly(packet, ell)?)))
        .collect::<Result<_, HeckeError>>()?;
    Ok(PolynomialSystem {
        field: packet.field,
        polys,
    })
}

/// `L'`: the primes of `primes` not dividing `level`.
pub fn good_primes(level: u64, primes: &[u64]) -> Vec<u64> {
    primes.iter().copied().filter(|&l| !level.is_multiple_of(l)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EigenvalueEntry {
    pub ell: u32,
    pub k: u32,
    pub kind: OpKind,
    pub value: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PacketEntry {
    pub dim: usize,
    pub a: Vec<EigenvalueEntry>,
}

/// Eigenpacket file: `{ level, field_degree, packets: [ { dim, a: [ {ell, k, kind, value} ] } ] }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PacketFile {
    pub level: u64,
    pub field_degree: u32,
    /// Dimension of the space the packets were cut out of, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient_dim: Option<usize>,
    pub packets: Vec<PacketEntry>,
}

impl PacketFile {
    pub fn from_packets(level: u64, field: BinaryField, packets: &[Eigenpacket]) -> Self {
        Self {
            level,
            field_degree: field.degree(),
            ambient_dim: None,
            packets: packets
                .iter()
                .map(|p| PacketEntry {
                    dim: p.dim,
                    a: p
                        .values
                        .iter()
                        .map(|(l, v)| EigenvalueEntry {
                            ell: l.ell,
                            k: l.k,
                            kind: l.kind,
                            value: v.embed(field).expect("packet field embeds").value(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_packets(&self) -> Result<Vec<Eigenpacket>, HeckeError> {
        let field = BinaryField::new(self.field_degree)?;
        self.packets
            .iter()
            .map(|p| {
                let values = p
                    .a
                    .iter()
                    .map(|e| {
                        Ok((
                            OperatorLabel {
                                ell: e.ell,
                                k: e.k,
                                kind: e.kind,
                            },
                            field.elem(e.value)?,
                        ))
                    })
                    .collect::<Result<_, HeckeError>>()?;
                Eigenpacket::new(self.level, field, p.dim, values)
            })
            .collect()
    }
}

/// Reads a file holding one [`PacketFile`] or a list of them.
pub fn load_packet_files(path: &Path) -> Result<Vec<PacketFile>, HeckeError> {
    let text = std::fs::read_to_string(path).map_err(|source| HeckeError::Io {
        path: path.display().to_string(),
        source,
    })?;
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(PacketFile),
        Many(Vec<PacketFile>),
    }
    Ok(match serde_json::from_str(&text)? {
        OneOrMany::One(f) => vec![f],
        OneOrMany::Many(v) => v,
    })
}
