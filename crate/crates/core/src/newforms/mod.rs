//! Classical newform data and the two-dimensional mod-2 blocks it yields.
//!
//! A database file looks like
//!
//! ```json
//! { "records": [ { "label": "11.2.0.a", "level": 11, "weight": 2,
//!                  "nebentype": {"modulus": 11, "exponents": [0]},
//!                  "degree": 1, "disc": 1, "defining_poly": [-1, 1],
//!                  "a": {"3": [-1], "5": [1]} } ],
//!   "coverage": [ {"level": 11, "weight": 2, "nebentype": {"modulus": 11, "exponents": [0]}} ] }
//! ```
//!
//! `a` gives Hecke eigenvalues as coordinates in the order's basis; the order
//! comes from `mult_table` when present, else from `defining_poly`.
//! `coverage` lists the queries the file answers completely, including the
//! ones with no newforms at all.

mod remote;

pub use remote::{conrey_index, NewformSource, RemoteClient, RemoteError, DEFAULT_BASE_URL};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characters::{Char0, CharError, CharMod2};
use crate::gf2k::{BinaryField, FieldElem, FieldError, Poly};
use crate::numberfield::{Order, OrderElem, OrderError, OrderRepr, Prime2Data};

#[derive(Debug, Error)]
pub enum NewformError {
    #[error("malformed newform database: {0}")]
    Json(#[from] serde_json::Error),
    #[error("record {index} ({label}): field `{field}`: {message}")]
    Schema {
        index: usize,
        label: String,
        field: &'static str,
        message: String,
    },
    #[error("{label}: no eigenvalue for ell = {ell}")]
    MissingPrime { label: String, ell: u64 },
    #[error("{label}: {ell} divides 2 * level")]
    BadPrime { label: String, ell: u64 },
    #[error("{label}: {source}")]
    Reduction { label: String, source: OrderError },
    #[error(transparent)]
    Character(#[from] CharError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `(level, weight, nebentype)`, the unit of lookup and caching.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Query {
    pub level: u64,
    pub weight: u32,
    pub nebentype: Char0,
}

impl Query {
    /// Stable file-name-friendly key, e.g. `13.3.3`.
    pub fn key(&self) -> String {
        let exps: Vec<String> = self.nebentype.exponents().iter().map(|e| e.to_string()).collect();
        let exps = if exps.is_empty() { "0".to_string() } else { exps.join("-") };
        format!("{}.{}.{}", self.level, self.weight, exps)
    }
}

/// Reductions of `a_ell` supplied by the data source, values in the canonical
/// `F_{2^f}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecomputedReduction {
    pub ideal: usize,
    pub f: u32,
    pub e: u32,
    pub a_mod2: BTreeMap<String, u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewformRecord {
    pub label: String,
    pub level: u64,
    pub weight: u32,
    pub nebentype: Char0,
    pub degree: usize,
    pub disc: i128,
    pub order: Order,
    pub a: BTreeMap<u64, OrderElem>,
    pub reductions: Vec<PrecomputedReduction>,
}

#[derive(Serialize, Deserialize)]
struct RecordRepr {
    #[serde(default)]
    label: String,
    level: u64,
    weight: u32,
    nebentype: Char0,
    degree: usize,
    disc: i128,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    defining_poly: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    integral_basis_denominator: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mult_table: Option<Vec<Vec<Vec<i64>>>>,
    a: BTreeMap<String, Vec<i64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    reductions: Vec<PrecomputedReduction>,
}

#[derive(Serialize, Deserialize, Default)]
struct DbRepr {
    records: Vec<RecordRepr>,
    #[serde(default)]
    coverage: Vec<Query>,
}

/// Parsed newform database.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NewformDb {
    pub records: Vec<NewformRecord>,
    pub coverage: Vec<Query>,
}

impl NewformDb {
    /// Whether the file answers `q` completely.
    pub fn covers(&self, q: &Query) -> bool {
        self.coverage.contains(q)
    }

    /// Records answering `q`, in database order.
    pub fn lookup(&self, q: &Query) -> Vec<&NewformRecord> {
        self.records
            .iter()
            .filter(|r| r.level == q.level && r.weight == q.weight && r.nebentype == q.nebentype)
            .collect()
    }

    pub fn merge(&mut self, other: NewformDb) {
        for r in other.records {
            if !self.records.iter().any(|s| s.label == r.label && s.nebentype == r.nebentype) {
                self.records.push(r);
            }
        }
        for q in other.coverage {
            if !self.coverage.contains(&q) {
                self.coverage.push(q);
            }
        }
    }
}

fn schema_err(index: usize, label: &str, field: &'static str, message: impl fmt::Display) -> NewformError {
    NewformError::Schema {
        index,
        label: label.to_string(),
        field,
        message: message.to_string(),
    }
}

impl NewformRecord {
    fn from_repr(index: usize, r: RecordRepr, required: &[u64]) -> Result<Self, NewformError> {
        let label = if r.label.is_empty() { format!("#{index}") } else { r.label.clone() };
        if r.level.is_multiple_of(2) {
            return Err(schema_err(index, &label, "level", "even levels are not supported"));
        }
        if !(2..=4).contains(&r.weight) {
            return Err(schema_err(index, &label, "weight", format!("{} not in 2..=4", r.weight)));
        }
        if !r.level.is_multiple_of(r.nebentype.modulus()) {
            return Err(schema_err(
                index,
                &label,
                "nebentype",
                format!("modulus {} does not divide level {}", r.nebentype.modulus(), r.level),
            ));
        }
        let order = Order::from_repr(&OrderRepr {
            degree: r.degree,
            defining_poly: r.defining_poly.clone(),
            integral_basis_denominator: r.integral_basis_denominator,
            mult_table: r.mult_table.clone(),
        })
        .map_err(|e| schema_err(index, &label, "mult_table", e))?;
        let den = r.integral_basis_denominator.unwrap_or(1) as i128;
        if den <= 0 {
            return Err(schema_err(index, &label, "integral_basis_denominator", "must be positive"));
        }
        let mut a = BTreeMap::new();
        for (key, coords) in &r.a {
            let ell: u64 = key
                .parse()
                .map_err(|_| schema_err(index, &label, "a", format!("key {key:?} is not a prime")))?;
            if coords.len() != r.degree {
                return Err(schema_err(
                    index,
                    &label,
                    "a",
                    format!("a_{ell} has {} coordinates, degree is {}", coords.len(), r.degree),
                ));
            }
            a.insert(ell, OrderElem::new(coords.iter().map(|&c| c as i128).collect(), den));
        }
        for &ell in required {
            if !a.contains_key(&ell) {
                return Err(NewformError::MissingPrime { label, ell });
            }
        }
        Ok(Self {
            label,
            level: r.level,
            weight: r.weight,
            nebentype: r.nebentype,
            degree: r.degree,
            disc: r.disc,
            order,
            a,
            reductions: r.reductions,
        })
    }

    fn to_repr(&self) -> RecordRepr {
        let o = self.order.to_repr();
        RecordRepr {
            label: self.label.clone(),
            level: self.level,
            weight: self.weight,
            nebentype: self.nebentype.clone(),
            degree: self.degree,
            disc: self.disc,
            defining_poly: o.defining_poly,
            integral_basis_denominator: None,
            mult_table: o.mult_table,
            a: self
                .a
                .iter()
                .map(|(ell, x)| {
                    assert_eq!(x.denominator(), 1, "only integral coordinates serialize");
                    (ell.to_string(), x.coords().iter().map(|&c| c as i64).collect())
                })
                .collect(),
            reductions: self.reductions.clone(),
        }
    }

    pub fn query(&self) -> Query {
        Query {
            level: self.level,
            weight: self.weight,
            nebentype: self.nebentype.clone(),
        }
    }

    /// Trace to Q of `a_ell`, from the trace of the multiplication matrices.
    pub fn trace(&self, ell: u64) -> Option<i128> {
        let x = self.a.get(&ell)?;
        let table = self.order.table();
        let d = self.degree;
        let total: i128 = (0..d)
            .map(|i| x.coords()[i] * (0..d).map(|j| table[i][j][j] as i128).sum::<i128>())
            .sum();
        Some(total / x.denominator())
    }

    /// Sort key: degree, then |disc|, then the trace form on `primes`, then the label.
    pub fn sort_key(&self, primes: &[u64]) -> (usize, u128, Vec<i128>, String) {
        (
            self.degree,
            self.disc.unsigned_abs(),
            primes.iter().map(|&p| self.trace(p).unwrap_or(0)).collect(),
            self.label.clone(),
        )
    }
}

/// Parse a database, requiring `a_ell` for every `ell` in `required`.
pub fn parse_db(text: &str, required: &[u64]) -> Result<NewformDb, NewformError> {
    let repr: DbRepr = serde_json::from_str(text)?;
    let records = repr
        .records
        .into_iter()
        .enumerate()
        .map(|(i, r)| NewformRecord::from_repr(i, r, required))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NewformDb {
        records,
        coverage: repr.coverage,
    })
}

pub fn serialize_db(db: &NewformDb) -> String {
    let repr = DbRepr {
        records: db.records.iter().map(|r| r.to_repr()).collect(),
        coverage: db.coverage.clone(),
    };
    serde_json::to_string_pretty(&repr).expect("records serialize")
}

/// Which reduction of which newform a block comes from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BlockSource {
    pub label: String,
    pub ideal: usize,
    pub embedding: u32,
}

impl fmt::Display for BlockSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (p{}, sigma^{})", self.label, self.ideal, self.embedding)
    }
}

/// Two-dimensional block: the reduction of a newform at a prime above 2,
/// embedded into the working field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaloisBlock2 {
    pub source: BlockSource,
    pub level: u64,
    pub weight: u32,
    /// The characteristic-zero nebentype of the newform.
    pub psi: Char0,
    /// Its reduction, the determinant of the block.
    pub nebentype: CharMod2,
    pub field: BinaryField,
    pub residue_degree: u32,
    pub ramification: u32,
    pub traces: BTreeMap<u64, FieldElem>,
}

impl GaloisBlock2 {
    /// `1 + a_ell X + psi(ell) X^2`; for trivial mod-2 nebentype this is
    /// `1 + a_ell X + X^2`.
    pub fn frob_poly(&self, ell: u64) -> Result<Poly, NewformError> {
        if ell.is_multiple_of(2) || self.level.is_multiple_of(ell) {
            return Err(NewformError::BadPrime {
                label: self.source.label.clone(),
                ell,
            });
        }
        let a = *self.traces.get(&ell).ok_or_else(|| NewformError::MissingPrime {
            label: self.source.label.clone(),
            ell,
        })?;
        let det = self
            .nebentype
            .value(ell)
            .expect("ell is prime to the level")
            .embed(self.field)?;
        Ok(Poly::from_elems(self.field, &[self.field.one(), a, det]))
    }
}

/// `block_frob_poly` as a free function.
pub fn block_frob_poly(block: &GaloisBlock2, ell: u64) -> Result<Poly, NewformError> {
    block.frob_poly(ell)
}

/// `(f, e, ell -> a_ell mod p)` for one prime above 2.
type ResidueTraces = (u32, u32, BTreeMap<u64, FieldElem>);

/// Reductions `ell -> a_ell mod p` in the residue field of each prime.
fn residue_traces(record: &NewformRecord) -> Result<Vec<ResidueTraces>, NewformError> {
    match record.order.decompose_mod2() {
        Ok(data) => {
            let computed = reduce_with(&data, record);
            match computed {
                Ok(v) => return Ok(v),
                Err(OrderError::EvenDenominator) if !record.reductions.is_empty() => {}
                Err(e) => {
                    return Err(NewformError::Reduction {
                        label: record.label.clone(),
                        source: e,
                    })
                }
            }
        }
        Err(e) if record.reductions.is_empty() => {
            return Err(NewformError::Reduction {
                label: record.label.clone(),
                source: e,
            })
        }
        Err(_) => {}
    }
    // fall back to the supplied reductions
    record
        .reductions
        .iter()
        .map(|r| {
            let field = BinaryField::new(r.f)?;
            let traces = r
                .a_mod2
                .iter()
                .map(|(k, &v)| {
                    let ell: u64 = k.parse().map_err(|_| {
                        schema_err(0, &record.label, "reductions", format!("bad key {k:?}"))
                    })?;
                    Ok((ell, field.elem(v)?))
                })
                .collect::<Result<BTreeMap<_, _>, NewformError>>()?;
            Ok((r.f, r.e, traces))
        })
        .collect()
}

fn reduce_with(
    data: &Prime2Data,
    record: &NewformRecord,
) -> Result<Vec<ResidueTraces>, OrderError> {
    data.ideals
        .iter()
        .enumerate()
        .map(|(n, p)| {
            let field = p.residue_field();
            let traces = record
                .a
                .iter()
                .map(|(&ell, x)| Ok((ell, data.reduce_elem(x, n, field, 0)?)))
                .collect::<Result<BTreeMap<_, _>, OrderError>>()?;
            Ok((p.f, p.e, traces))
        })
        .collect()
}

/// Blocks of `record` over `field`, one per prime above 2 and distinct
/// conjugate of its trace vector, in ideal order then embedding order.
/// Embeddings giving the same traces as an earlier one are dropped.
///
/// A residue field `F_{2^f}` that does not embed in `field` contributes only
/// when all its traces lie in the common subfield. Otherwise the prime is
/// skipped: its representation cannot be defined over `field`.
pub fn blocks_of(record: &NewformRecord, field: BinaryField) -> Result<Vec<GaloisBlock2>, NewformError> {
    let nebentype = record.nebentype.reduce_mod2()?;
    let k = field.degree();
    let mut out = Vec::new();
    for (ideal, (f, e, traces)) in residue_traces(record)?.into_iter().enumerate() {
        if !k.is_multiple_of(f) && !traces.values().all(|x| x.in_subfield(crate::gf2k::gcd(f, k))) {
            continue;
        }
        // distinct conjugates of the trace vector
        let mut seen: Vec<Vec<FieldElem>> = Vec::new();
        let mut embeddings = Vec::new();
        for j in 0..f {
            let v: Vec<FieldElem> = traces.values().map(|x| x.frobenius(j)).collect();
            if !seen.contains(&v) {
                seen.push(v);
                embeddings.push(j);
            }
        }
        for j in embeddings {
            let conj = traces
                .iter()
                .map(|(&ell, x)| {
                    let y = x.frobenius(j);
                    let y = if k.is_multiple_of(f) {
                        y.embed(field)?
                    } else {
                        let sub = BinaryField::new(crate::gf2k::gcd(f, k))?;
                        y.restrict(sub).expect("checked").embed(field)?
                    };
                    Ok((ell, y))
                })
                .collect::<Result<BTreeMap<_, _>, FieldError>>()?;
            out.push(GaloisBlock2 {
                source: BlockSource {
                    label: record.label.clone(),
                    ideal,
                    embedding: j,
                },
                level: record.level,
                weight: record.weight,
                psi: record.nebentype.clone(),
                nebentype: nebentype.clone(),
                field,
                residue_degree: f,
                ramification: e,
                traces: conj,
            });
        }
    }
    Ok(out)
}
