//! The Galois representation finder.
//!
//! A polynomial system is matched against an ordered list of one- and
//! two-dimensional blocks. Each block that divides the system, simultaneously
//! at every prime, is split off as often as it divides; the pass never
//! restarts. The system is accounted for when nothing of positive degree is
//! left.
//!
//! Two lists are used. ChiS holds the mod-2 Dirichlet characters of
//! conductor dividing the odd part `M` of the level, then reductions of
//! weight-2 and weight-4 newforms of trivial nebentype and level dividing `M`.
//! ChiB holds the same characters, then weight-2 and weight-3 newforms of any
//! nebentype whose reduction is `delta`, the inverse of the product of the
//! characters already split off.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{divisors, odd_part};
use crate::characters::{enumerate_char0, Char0, CharError, CharMod2, UnitGroupStructure};
use crate::gf2k::{BinaryField, FieldElem, FieldError, Poly};
use crate::heckepoly::{good_primes, poly_system, u_poly, Eigenpacket, HeckeError, PolynomialSystem};
use crate::newforms::{blocks_of, GaloisBlock2, NewformDb, NewformError, NewformRecord, NewformSource, Query, RemoteError};

#[derive(Debug, Error)]
pub enum FinderError {
    #[error("no newform data for level {level}, weight {weight}, nebentype {nebentype}")]
    MissingData { level: u64, weight: u32, nebentype: String },
    #[error("system is not divisible by {block} {times} times")]
    NotExact { block: String, times: u32 },
    #[error("expected a system of degree 4, got degree {0}")]
    BadDegree(usize),
    #[error(transparent)]
    Newform(#[from] NewformError),
    #[error(transparent)]
    Remote(#[from] RemoteError),
    #[error(transparent)]
    Hecke(#[from] HeckeError),
    #[error(transparent)]
    Character(#[from] CharError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Where the finder gets newforms for `(level, weight, nebentype)`.
pub trait NewformLookup: Sync {
    fn newforms(&self, q: &Query) -> Result<Vec<NewformRecord>, FinderError>;
}

fn missing(q: &Query) -> FinderError {
    FinderError::MissingData {
        level: q.level,
        weight: q.weight,
        nebentype: describe_char0(&q.nebentype),
    }
}

impl NewformLookup for NewformDb {
    fn newforms(&self, q: &Query) -> Result<Vec<NewformRecord>, FinderError> {
        if !self.covers(q) {
            return Err(missing(q));
        }
        Ok(self.lookup(q).into_iter().cloned().collect())
    }
}

impl NewformLookup for NewformSource {
    fn newforms(&self, q: &Query) -> Result<Vec<NewformRecord>, FinderError> {
        match self.resolve(q) {
            Err(RemoteError::NotCovered(_)) => Err(missing(q)),
            other => Ok(other?),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ListKind {
    ChiS,
    ChiB,
}

impl fmt::Display for ListKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ListKind::ChiS => "ChiS",
            ListKind::ChiB => "ChiB",
        })
    }
}

/// A candidate building block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Block {
    Character(CharMod2),
    Newform(GaloisBlock2),
}

impl Block {
    pub fn degree(&self) -> usize {
        match self {
            Block::Character(_) => 1,
            Block::Newform(_) => 2,
        }
    }

    /// `ell -> det(1 - rho(Frob_ell) X)` over `field`.
    pub fn system(&self, field: BinaryField, primes: &[u64]) -> Result<PolynomialSystem, FinderError> {
        let polys = primes
            .iter()
            .map(|&ell| {
                let p = match self {
                    Block::Character(chi) => chi.frob_poly(ell)?,
                    Block::Newform(b) => b.frob_poly(ell)?,
                };
                Ok((ell, p))
            })
            .collect::<Result<BTreeMap<_, _>, FinderError>>()?;
        Ok(PolynomialSystem::new(field, polys)?)
    }

    pub fn reference(&self) -> BlockRef {
        match self {
            Block::Character(chi) => BlockRef::Character {
                modulus: chi.modulus(),
                conductor: chi.conductor(),
                order: chi.order(),
                field_degree: chi.field().degree(),
                generator_images: chi.generator_images().iter().map(|x| x.value()).collect(),
            },
            Block::Newform(b) => BlockRef::Newform {
                label: b.source.label.clone(),
                level: b.level,
                weight: b.weight,
                nebentype: describe_char0(&b.psi),
                ideal: b.source.ideal,
                embedding: b.source.embedding,
                residue_degree: b.residue_degree,
                ramification: b.ramification,
            },
        }
    }
}

/// Serializable description of a block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockRef {
    Character {
        modulus: u64,
        conductor: u64,
        order: u64,
        field_degree: u32,
        generator_images: Vec<u32>,
    },
    Newform {
        label: String,
        level: u64,
        weight: u32,
        nebentype: String,
        ideal: usize,
        embedding: u32,
        residue_degree: u32,
        ramification: u32,
    },
}

impl fmt::Display for BlockRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockRef::Character {
                conductor,
                order,
                generator_images,
                ..
            } => {
                if *order == 1 {
                    write!(f, "1")
                } else {
                    write!(f, "chi(cond {conductor}, order {order}, images {generator_images:?})")
                }
            }
            BlockRef::Newform {
                label,
                nebentype,
                ideal,
                embedding,
                residue_degree,
                ramification,
                ..
            } => {
                write!(
                    f,
                    "{label} [p{ideal}: e={ramification} f={residue_degree}, sigma^{embedding}]"
                )?;
                if nebentype != "trivial" {
                    write!(f, ", nebentype {nebentype}")?;
                }
                Ok(())
            }
        }
    }
}

/// `mod 13 mapping 2 -> i`, or `trivial`.
pub fn describe_char0(psi: &Char0) -> String {
    if psi.is_trivial() {
        return "trivial".to_string();
    }
    let g = psi.group();
    let parts: Vec<String> = (0..g.rank())
        .map(|i| {
            let v = psi.generator_value(i);
            let s = match (v.num, v.den) {
                (0, _) => "1".to_string(),
                (1, 2) => "-1".to_string(),
                (1, 4) => "i".to_string(),
                (3, 4) => "-i".to_string(),
                (n, d) => format!("zeta_{d}^{n}"),
            };
            format!("{} -> {}", g.generators[i], s)
        })
        .collect();
    format!("mod {} mapping {}", psi.modulus(), parts.join(", "))
}

/// A block with its polynomial system over the working field.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub block: Block,
    pub system: PolynomialSystem,
}

impl Candidate {
    fn new(block: Block, field: BinaryField, primes: &[u64]) -> Result<Self, FinderError> {
        let system = block.system(field, primes)?;
        Ok(Self { block, system })
    }
}

/// Largest `n` such that `block^n` divides `system` at every prime at once.
pub fn divides(block: &PolynomialSystem, system: &PolynomialSystem) -> u32 {
    if block.is_trivial() {
        return 0;
    }
    let mut n = 0;
    let mut rest = system.clone();
    while let Some(q) = rest.exact_div(block) {
        n += 1;
        rest = q;
    }
    n
}

/// `system / block^n`, pointwise.
pub fn quotient(system: &PolynomialSystem, block: &PolynomialSystem, n: u32) -> Result<PolynomialSystem, FinderError> {
    let mut rest = system.clone();
    for i in 0..n {
        rest = rest.exact_div(block).ok_or_else(|| FinderError::NotExact {
            block: format!("{block:?}"),
            times: i + 1,
        })?;
    }
    Ok(rest)
}

/// Mod-2 characters of conductor dividing `m` with values in `field`, by
/// increasing conductor. Galois conjugates are adjacent, each orbit ordered by
/// the exponents of its generator images.
pub fn mod2_characters(m: u64, field: BinaryField) -> Result<Vec<CharMod2>, FinderError> {
    let group = UnitGroupStructure::new(m)?;
    let q1 = field.order() as u64 - 1;
    let gamma = field.generator();
    // allowed exponents of gamma for each generator image
    let choices: Vec<Vec<u64>> = group
        .orders
        .iter()
        .map(|&o| {
            let d = crate::arith::gcd(odd_part(o), q1);
            (0..d).map(|t| t * (q1 / d)).collect()
        })
        .collect();
    let mut all: Vec<(Vec<u64>, CharMod2)> = Vec::new();
    let mut idx = vec![0usize; choices.len()];
    loop {
        let exps: Vec<u64> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        let images: Vec<FieldElem> = exps.iter().map(|&e| gamma.pow(e)).collect();
        all.push((exps, CharMod2::from_images(group.clone(), images)?));
        // odometer, last generator fastest
        let mut pos = choices.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < choices[pos].len() {
                break;
            }
            idx[pos] = 0;
            if pos == 0 {
                pos = usize::MAX;
                break;
            }
        }
        if pos == usize::MAX || choices.is_empty() {
            break;
        }
    }
    let conductors: Vec<u64> = all.iter().map(|(_, c)| c.conductor()).collect();
    let mut order: Vec<usize> = (0..all.len()).collect();
    order.sort_by_key(|&i| (conductors[i], all[i].0.clone()));
    let mut placed = vec![false; all.len()];
    let mut out = Vec::new();
    for &i in &order {
        if placed[i] {
            continue;
        }
        let orbit: Vec<CharMod2> = (0..field.degree()).map(|j| all[i].1.frobenius(j)).collect();
        let mut members: Vec<usize> = (0..all.len())
            .filter(|&t| !placed[t] && orbit.contains(&all[t].1))
            .collect();
        members.sort_by_key(|&t| all[t].0.clone());
        for t in members {
            placed[t] = true;
            out.push(all[t].1.clone());
        }
    }
    Ok(out)
}

/// `psi(-1) = (-1)^weight`, the condition for newforms to exist.
fn parity_matches(psi: &Char0, weight: u32) -> bool {
    let m = psi.modulus();
    if m <= 2 {
        return true;
    }
    let v = psi.value(m - 1).expect("-1 is a unit");
    let odd = v.num * 2 == v.den;
    odd == (weight % 2 == 1)
}

/// Newform blocks of one `(level, weight, nebentype)`, sorted by degree,
/// absolute discriminant, then the rest of the record sort key.
fn form_blocks<S: NewformLookup + ?Sized>(
    source: &S,
    q: &Query,
    field: BinaryField,
    primes: &[u64],
) -> Result<Vec<Candidate>, FinderError> {
    let mut records = source.newforms(q)?;
    records.sort_by_cached_key(|r| r.sort_key(primes));
    let mut out = Vec::new();
    for r in &records {
        for b in blocks_of(r, field)? {
            out.push(Candidate::new(Block::Newform(b), field, primes)?);
        }
    }
    Ok(out)
}

/// The divisors of `m` that can carry cusp forms of weight at most 4.
fn form_levels(m: u64) -> Vec<u64> {
    divisors(m).into_iter().filter(|&d| d > 1).collect()
}

/// ChiS newform blocks: weight 2 then 4, trivial nebentype, levels dividing `m` ascending.
pub fn build_chis_forms<S: NewformLookup + ?Sized>(
    m: u64,
    field: BinaryField,
    primes: &[u64],
    source: &S,
) -> Result<Vec<Candidate>, FinderError> {
    let mut out = Vec::new();
    for weight in [2, 4] {
        for n1 in form_levels(m) {
            let q = Query {
                level: n1,
                weight,
                nebentype: Char0::trivial(n1)?,
            };
            out.extend(form_blocks(source, &q, field, primes)?);
        }
    }
    Ok(out)
}

/// ChiB newform blocks whose nebentype reduces to `delta` (a character mod `m`):
/// weight 2 then 3, levels ascending, nebentypes in generator-exponent order.
pub fn build_chib_tail<S: NewformLookup + ?Sized>(
    m: u64,
    delta: &CharMod2,
    field: BinaryField,
    primes: &[u64],
    source: &S,
) -> Result<Vec<Candidate>, FinderError> {
    let mut out = Vec::new();
    for weight in [2, 3] {
        for n1 in form_levels(m) {
            for psi in enumerate_char0(n1)? {
                if !parity_matches(&psi, weight) {
                    continue;
                }
                let reduced = match psi.reduce_mod2() {
                    Ok(r) => r,
                    // image outside every supported field, so it cannot equal delta
                    Err(CharError::FieldTooLarge { .. }) => continue,
                    Err(e) => return Err(e.into()),
                };
                if reduced.with_modulus(m)? != *delta {
                    continue;
                }
                let q = Query {
                    level: n1,
                    weight,
                    nebentype: psi,
                };
                out.extend(form_blocks(source, &q, field, primes)?);
            }
        }
    }
    Ok(out)
}

/// One block split off, with multiplicity and list position.
#[derive(Clone, Debug, Serialize)]
pub struct Split {
    pub block: BlockRef,
    pub multiplicity: u32,
    pub position: usize,
    #[serde(skip)]
    pub source: Block,
    #[serde(skip)]
    pub system: PolynomialSystem,
}

/// Result of one finder run: success when the residual system is trivial.
#[derive(Clone, Debug, Serialize)]
pub struct FoundRep {
    pub list: ListKind,
    pub splits: Vec<Split>,
    #[serde(serialize_with = "serialize_system")]
    pub residual: PolynomialSystem,
    pub success: bool,
    /// The greedy pass left a residual and the decomposition came from the
    /// exhaustive search over the same list.
    pub backtracked: bool,
}

fn serialize_system<S: serde::Serializer>(sys: &PolynomialSystem, s: S) -> Result<S::Ok, S::Error> {
    let m: BTreeMap<u64, String> = sys.iter().map(|(l, p)| (l, display_poly(p))).collect();
    m.serialize(s)
}

impl FoundRep {
    /// Product of the split blocks with multiplicity, times the residual.
    pub fn product_system(&self) -> PolynomialSystem {
        self.splits.iter().fold(self.residual.clone(), |acc, s| {
            (0..s.multiplicity).fold(acc, |a, _| a.mul(&s.system).expect("same field and primes"))
        })
    }

    pub fn total_degree(&self) -> usize {
        self.splits
            .iter()
            .map(|s| s.source.degree() * s.multiplicity as usize)
            .sum()
    }
}

/// Classification of a successful result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum RepType {
    I,
    Im(u64),
    II,
    III,
    IV,
    Other,
    Failure,
}

impl fmt::Display for RepType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepType::I => write!(f, "I"),
            RepType::Im(m) => write!(f, "I_{m}"),
            RepType::II => write!(f, "II"),
            RepType::III => write!(f, "III"),
            RepType::IV => write!(f, "IV"),
            RepType::Other => write!(f, "other"),
            RepType::Failure => write!(f, "failure"),
        }
    }
}

pub fn classify(rep: &FoundRep) -> RepType {
    if !rep.success {
        return RepType::Failure;
    }
    let mut trivial = 0;
    let mut chars = Vec::new();
    let mut forms = Vec::new();
    for s in &rep.splits {
        match &s.source {
            Block::Character(c) if c.is_trivial() => trivial += s.multiplicity,
            Block::Character(c) => chars.extend(std::iter::repeat_n(c, s.multiplicity as usize)),
            Block::Newform(b) => forms.extend(std::iter::repeat_n(b, s.multiplicity as usize)),
        }
    }
    match (trivial, chars.as_slice(), forms.as_slice()) {
        (4, [], []) => RepType::I,
        (2, [a, b], []) => {
            let surjects_f4 = a.order() == 3 && a.field().degree() == 2;
            if surjects_f4 && **b == a.frobenius(1) && a.conductor() == b.conductor() {
                RepType::Im(a.conductor())
            } else {
                RepType::Other
            }
        }
        (2, [], [b]) => match b.weight {
            2 => RepType::II,
            3 => RepType::III,
            4 => RepType::IV,
            _ => RepType::Other,
        },
        _ => RepType::Other,
    }
}

/// Candidate lists for one level and working field.
pub struct Finder<'a, S: NewformLookup + ?Sized> {
    pub level: u64,
    pub field: BinaryField,
    /// Primes not dividing the level.
    pub primes: Vec<u64>,
    source: &'a S,
    characters: Vec<Candidate>,
    chis_forms: Mutex<Option<Arc<Vec<Candidate>>>>,
    chib_tails: Mutex<BTreeMap<Vec<u32>, Arc<Vec<Candidate>>>>,
}

impl<'a, S: NewformLookup + ?Sized> Finder<'a, S> {
    /// `primes` is the full prime set `L`; those dividing the level are dropped.
    pub fn new(level: u64, field: BinaryField, primes: &[u64], source: &'a S) -> Result<Self, FinderError> {
        let primes = good_primes(level, primes);
        let m = odd_part(level);
        let characters = mod2_characters(m, field)?
            .into_iter()
            .map(|c| Candidate::new(Block::Character(c), field, &primes))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            level,
            field,
            primes,
            source,
            characters,
            chis_forms: Mutex::new(None),
            chib_tails: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn odd_level(&self) -> u64 {
        odd_part(self.level)
    }

    pub fn characters(&self) -> &[Candidate] {
        &self.characters
    }

    pub fn chis_forms(&self) -> Result<Arc<Vec<Candidate>>, FinderError> {
        let mut guard = self.chis_forms.lock().expect("not poisoned");
        if let Some(v) = guard.as_ref() {
            return Ok(v.clone());
        }
        let v = Arc::new(build_chis_forms(self.odd_level(), self.field, &self.primes, self.source)?);
        *guard = Some(v.clone());
        Ok(v)
    }

    pub fn chib_tail(&self, delta: &CharMod2) -> Result<Arc<Vec<Candidate>>, FinderError> {
        let key: Vec<u32> = delta
            .generator_images()
            .iter()
            .map(|x| x.embed(self.field).map(|y| y.value()))
            .collect::<Result<_, _>>()?;
        if let Some(v) = self.chib_tails.lock().expect("not poisoned").get(&key) {
            return Ok(v.clone());
        }
        let v = Arc::new(build_chib_tail(self.odd_level(), delta, self.field, &self.primes, self.source)?);
        self.chib_tails.lock().expect("not poisoned").insert(key, v.clone());
        Ok(v)
    }

    /// Runs the greedy pass over `list` on a degree-4 system.
    pub fn find(&self, system: &PolynomialSystem, list: ListKind) -> Result<FoundRep, FinderError> {
        let mut rest = system.embed(self.field)?;
        if rest.primes() != self.primes {
            return Err(FinderError::BadDegree(rest.degree()));
        }
        if rest.iter().any(|(_, p)| p.degree() != Some(4)) {
            return Err(FinderError::BadDegree(rest.degree()));
        }
        let mut splits = Vec::new();
        let mut position = 0;
        let try_block = |c: &Candidate, rest: &mut PolynomialSystem, splits: &mut Vec<Split>, position: usize| {
            if rest.is_trivial() {
                return Ok::<_, FinderError>(());
            }
            let n = divides(&c.system, rest);
            if n > 0 {
                *rest = quotient(rest, &c.system, n)?;
                splits.push(Split {
                    block: c.block.reference(),
                    multiplicity: n,
                    position,
                    source: c.block.clone(),
                    system: c.system.clone(),
                });
            }
            Ok(())
        };
        for c in &self.characters {
            try_block(c, &mut rest, &mut splits, position)?;
            position += 1;
        }
        if !rest.is_trivial() {
            let tail = match list {
                ListKind::ChiS => self.chis_forms()?,
                ListKind::ChiB => {
                    let chars = splits.iter().filter_map(|s| match &s.source {
                        Block::Character(c) => Some((c, s.multiplicity)),
                        Block::Newform(_) => None,
                    });
                    self.chib_tail(&self.delta(chars)?)?
                }
            };
            for c in tail.iter() {
                try_block(c, &mut rest, &mut splits, position)?;
                position += 1;
            }
        }
        let mut success = rest.is_trivial();
        let mut backtracked = false;
        if !success {
            let mut chosen = Vec::new();
            if let Some(picks) = self.search_chars(&system.embed(self.field)?, list, 0, &mut chosen)? {
                splits = merge_picks(picks);
                rest = PolynomialSystem::trivial(self.field, &self.primes);
                success = true;
                backtracked = true;
            }
        }
        log::info!(
            "level {} {}: split positions {:?}{}",
            self.level,
            list,
            splits.iter().map(|s| (s.position, s.multiplicity)).collect::<Vec<_>>(),
            match (success, backtracked) {
                (false, _) => ", failed",
                (true, true) => ", after backtracking",
                (true, false) => "",
            }
        );
        Ok(FoundRep {
            list,
            splits,
            residual: rest,
            success,
            backtracked,
        })
    }

    /// Inverse of the product of the given characters with multiplicity.
    fn delta<'c>(&self, chars: impl Iterator<Item = (&'c CharMod2, u32)>) -> Result<CharMod2, FinderError> {
        let mut product = CharMod2::trivial(self.odd_level())?;
        for (c, n) in chars {
            for _ in 0..n {
                product = product.mul(c)?;
            }
        }
        Ok(product.inverse())
    }

    /// Depth-first search for any exact decomposition: characters first, in
    /// list order with repetition, then the tail for those characters.
    fn search_chars(
        &self,
        rest: &PolynomialSystem,
        list: ListKind,
        from: usize,
        chosen: &mut Vec<usize>,
    ) -> Result<Option<Vec<(usize, Candidate)>>, FinderError> {
        let picked = |chosen: &[usize]| -> Vec<(usize, Candidate)> {
            chosen.iter().map(|&i| (i, self.characters[i].clone())).collect()
        };
        if rest.is_trivial() {
            return Ok(Some(picked(chosen)));
        }
        for i in from..self.characters.len() {
            if let Some(q) = exact_div(rest, &self.characters[i].system) {
                chosen.push(i);
                if let Some(found) = self.search_chars(&q, list, i, chosen)? {
                    return Ok(Some(found));
                }
                chosen.pop();
            }
        }
        let tail = match list {
            ListKind::ChiS => self.chis_forms()?,
            ListKind::ChiB => {
                let chars = chosen.iter().map(|&i| match &self.characters[i].block {
                    Block::Character(c) => (c, 1),
                    Block::Newform(_) => unreachable!("character list holds characters"),
                });
                self.chib_tail(&self.delta(chars)?)?
            }
        };
        let mut picks = Vec::new();
        if search_list(&tail, rest, 0, &mut picks) {
            let offset = self.characters.len();
            let mut out = picked(chosen);
            out.extend(picks.into_iter().map(|j| (offset + j, tail[j].clone())));
            return Ok(Some(out));
        }
        Ok(None)
    }
}

fn exact_div(rest: &PolynomialSystem, block: &PolynomialSystem) -> Option<PolynomialSystem> {
    if block.is_trivial() {
        return None;
    }
    rest.exact_div(block)
}

fn search_list(list: &[Candidate], rest: &PolynomialSystem, from: usize, picks: &mut Vec<usize>) -> bool {
    if rest.is_trivial() {
        return true;
    }
    for j in from..list.len() {
        if let Some(q) = exact_div(rest, &list[j].system) {
            picks.push(j);
            if search_list(list, &q, j, picks) {
                return true;
            }
            picks.pop();
        }
    }
    false
}

/// Runs of equal positions become one split with multiplicity.
fn merge_picks(picks: Vec<(usize, Candidate)>) -> Vec<Split> {
    let mut splits: Vec<Split> = Vec::new();
    for (position, c) in picks {
        match splits.last_mut() {
            Some(last) if last.position == position => last.multiplicity += 1,
            _ => splits.push(Split {
                block: c.block.reference(),
                multiplicity: 1,
                position,
                source: c.block,
                system: c.system,
            }),
        }
    }
    splits
}

/// Prints a polynomial over the smallest field containing its coefficients.
pub fn display_poly(p: &Poly) -> String {
    let d = p
        .coeffs()
        .iter()
        .fold(1, |acc, c| crate::gf2k::lcm(acc, c.degree_over_f2()));
    let sub = BinaryField::new(d).expect("subfield degree");
    p.restrict(sub).unwrap_or_else(|| p.clone()).to_string()
}

/// One simultaneous eigenspace in a report.
#[derive(Clone, Debug, Serialize)]
pub struct ReportRow {
    pub packet: usize,
    #[serde(rename = "type")]
    pub rep_type: String,
    pub dim: usize,
    pub block_refs: Vec<BlockRef>,
    pub u_polys: BTreeMap<u64, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<BTreeMap<u64, String>>,
}

/// Findings at one level.
#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    pub level: u64,
    pub dim_total: usize,
    pub field_degree: u32,
    pub primes: Vec<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<ReportRow>,
    /// ChiB rows that differ from the ChiS row of the same packet.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub chib_rows: Vec<ReportRow>,
    #[serde(skip)]
    pub chis: Vec<FoundRep>,
    #[serde(skip)]
    pub chib: Vec<FoundRep>,
}

/// Smallest field containing the packets' eigenvalues over which every Hecke
/// polynomial splits.
pub fn working_field(packets: &[Eigenpacket], primes: &[u64]) -> Result<BinaryField, FinderError> {
    let mut d = 1;
    for p in packets {
        d = crate::gf2k::lcm(d, p.field.degree());
        d = crate::gf2k::lcm(d, poly_system(p, primes)?.splitting_degree()?);
    }
    Ok(BinaryField::new(d)?)
}

fn make_row(index: usize, packet: &Eigenpacket, rep: &FoundRep, u_polys: &BTreeMap<u64, String>) -> ReportRow {
    ReportRow {
        packet: index,
        rep_type: classify(rep).to_string(),
        dim: packet.dim,
        block_refs: rep
            .splits
            .iter()
            .filter(|s| !matches!(&s.source, Block::Character(c) if c.is_trivial()))
            .map(|s| s.block.clone())
            .collect(),
        u_polys: u_polys.clone(),
        residual: (!rep.success).then(|| rep.residual.iter().map(|(l, p)| (l, display_poly(p))).collect()),
    }
}

/// Runs the finder on every packet of one level with the requested lists.
pub fn report_level<S: NewformLookup + ?Sized>(
    level: u64,
    dim_total: Option<usize>,
    packets: &[Eigenpacket],
    primes: &[u64],
    lists: &[ListKind],
    source: &S,
) -> Result<LevelReport, FinderError> {
    let field = working_field(packets, primes)?;
    let finder = Finder::new(level, field, primes, source)?;
    let results = packets
        .par_iter()
        .map(|p| {
            let sys = poly_system(p, primes)?;
            let chis = lists.contains(&ListKind::ChiS).then(|| finder.find(&sys, ListKind::ChiS)).transpose()?;
            let chib = lists.contains(&ListKind::ChiB).then(|| finder.find(&sys, ListKind::ChiB)).transpose()?;
            let u = primes
                .iter()
                .filter(|&&l| level.is_multiple_of(l))
                .map(|&l| Ok((l, display_poly(&u_poly(p, l)?))))
                .collect::<Result<BTreeMap<_, _>, FinderError>>()?;
            Ok((chis, chib, u))
        })
        .collect::<Result<Vec<_>, FinderError>>()?;
    let mut rows = Vec::new();
    let mut chib_rows = Vec::new();
    let mut chis_reps = Vec::new();
    let mut chib_reps = Vec::new();
    for (i, ((chis, chib, u), p)) in results.into_iter().zip(packets).enumerate() {
        let s_row = chis.as_ref().map(|r| make_row(i, p, r, &u));
        if let Some(r) = &s_row {
            rows.push(r.clone());
        }
        if let Some(b) = &chib {
            let b_row = make_row(i, p, b, &u);
            let differs = s_row
                .as_ref()
                .is_none_or(|s| s.rep_type != b_row.rep_type || s.block_refs != b_row.block_refs);
            if differs {
                chib_rows.push(b_row);
            }
        }
        chis_reps.extend(chis);
        chib_reps.extend(chib);
    }
    Ok(LevelReport {
        level,
        dim_total: dim_total.unwrap_or_else(|| packets.iter().map(|p| p.dim).sum()),
        field_degree: field.degree(),
        primes: primes.to_vec(),
        rows,
        chib_rows,
        chis: chis_reps,
        chib: chib_reps,
    })
}

fn render_row(out: &mut String, row: &ReportRow) {
    use std::fmt::Write;
    let refs: Vec<String> = row.block_refs.iter().map(|b| b.to_string()).collect();
    let _ = write!(out, "  {:<6} {:>3}", row.rep_type, row.dim);
    if !refs.is_empty() {
        let _ = write!(out, "  {}", refs.join(" + "));
    }
    for (l, p) in &row.u_polys {
        let _ = write!(out, "  U{l}: {p}");
    }
    if let Some(res) = &row.residual {
        let r: Vec<String> = res.iter().map(|(l, p)| format!("{l}: {p}")).collect();
        let _ = write!(out, "  residual {{{}}}", r.join(", "));
    }
    out.push('\n');
}

/// Plain-text rendering of level reports.
pub fn render_text(reports: &[LevelReport]) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for r in reports {
        let primes: Vec<String> = r.primes.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(
            out,
            "Level {}. Dimension {}. Field F_{}. L = {{{}}}.",
            r.level,
            r.dim_total,
            1u64 << r.field_degree,
            primes.join(", ")
        );
        for row in &r.rows {
            render_row(&mut out, row);
        }
        if !r.chib_rows.is_empty() {
            let _ = writeln!(out, " ChiB, where it differs:");
            for row in &r.chib_rows {
                render_row(&mut out, row);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heckepoly::Eigenpacket;
    use crate::matf2k::{OpKind, OperatorLabel};

    fn f(k: u32) -> BinaryField {
        BinaryField::new(k).unwrap()
    }

    fn sys(field: BinaryField, polys: &[(u64, Poly)]) -> PolynomialSystem {
        PolynomialSystem::new(field, polys.iter().cloned().collect()).unwrap()
    }

    fn p(field: BinaryField, c: &[u32]) -> Poly {
        Poly::from_values(field, c).unwrap()
    }

    #[test]
    fn divides_and_quotient() {
        let f2 = f(1);
        let one_x = sys(f2, &[(3, p(f2, &[1, 1])), (5, p(f2, &[1, 1]))]);
        let e = sys(f2, &[(3, p(f2, &[1, 1]).pow(4)), (5, p(f2, &[1, 1]).pow(4))]);
        assert_eq!(divides(&one_x, &e), 4);
        let q = quotient(&e, &one_x, 4).unwrap();
        assert!(q.is_trivial());
        assert!(quotient(&e, &one_x, 5).is_err());
        // multiplicity is the simultaneous minimum
        let mixed = sys(f2, &[(3, p(f2, &[1, 1]).pow(4)), (5, &p(f2, &[1, 1]).pow(2) * &p(f2, &[1, 1, 1]))]);
        assert_eq!(divides(&one_x, &mixed), 2);
        let back = quotient(&mixed, &one_x, 2).unwrap().mul(&one_x).unwrap().mul(&one_x).unwrap();
        assert_eq!(back, mixed);
    }

    #[test]
    fn chi9_does_not_divide_type_one() {
        let f4 = f(2);
        let chars = mod2_characters(9, f4).unwrap();
        // trivial, then chi_9 and its conjugate
        assert_eq!(chars.len(), 3);
        assert!(chars[0].is_trivial());
        assert_eq!(chars[2], chars[1].frobenius(1));
        let chi = Block::Character(chars[1].clone());
        let s = chi.system(f4, &[5, 7]).unwrap();
        let e = sys(f4, &[(5, p(f4, &[1, 1]).pow(4)), (7, p(f4, &[1, 1]).pow(4))]);
        assert_eq!(divides(&s, &e), 0);
    }

    #[test]
    fn characters_by_conductor() {
        let f4 = f(2);
        let chars = mod2_characters(27, f4).unwrap();
        let conds: Vec<u64> = chars.iter().map(|c| c.conductor()).collect();
        assert_eq!(conds, vec![1, 9, 9]);
        // over F_2 only the trivial character survives
        assert_eq!(mod2_characters(27, f(1)).unwrap().len(), 1);
        assert_eq!(mod2_characters(1, f4).unwrap().len(), 1);
        // conductors 7 and 5*7: characters mod 35 of odd order with values in F_4
        let c35 = mod2_characters(35, f4).unwrap();
        let conds: Vec<u64> = c35.iter().map(|c| c.conductor()).collect();
        assert_eq!(conds, vec![1, 7, 7]);
        let mut sorted = conds.clone();
        sorted.sort();
        assert_eq!(conds, sorted);
    }

    #[test]
    fn describe_nebentypes() {
        assert_eq!(describe_char0(&Char0::new(13, vec![3]).unwrap()), "mod 13 mapping 2 -> i");
        assert_eq!(describe_char0(&Char0::new(19, vec![9]).unwrap()), "mod 19 mapping 2 -> -1");
        assert_eq!(describe_char0(&Char0::trivial(19).unwrap()), "trivial");
    }

    #[test]
    fn parity() {
        assert!(parity_matches(&Char0::trivial(13).unwrap(), 2));
        assert!(!parity_matches(&Char0::trivial(13).unwrap(), 3));
        // 2 -> i mod 13: psi(-1) = psi(2^6) = i^6 = -1
        assert!(parity_matches(&Char0::new(13, vec![3]).unwrap(), 3));
        assert!(!parity_matches(&Char0::new(13, vec![6]).unwrap(), 3));
    }

    fn packet_from_traces(level: u64, field: BinaryField, traces: &[(u64, FieldElem)]) -> Eigenpacket {
        let mut values = BTreeMap::new();
        for &(ell, a) in traces {
            let kind = if level.is_multiple_of(ell) { OpKind::U } else { OpKind::T };
            values.insert(OperatorLabel { ell: ell as u32, k: 1, kind }, a);
            values.insert(OperatorLabel { ell: ell as u32, k: 2, kind }, field.zero());
            values.insert(OperatorLabel { ell: ell as u32, k: 3, kind }, a);
        }
        Eigenpacket::new(level, field, 1, values).unwrap()
    }

    const LEVEL11: &str = r#"{"records": [{"label": "11.2.0.a", "level": 11, "weight": 2,
        "nebentype": {"modulus": 11, "exponents": [0]}, "degree": 1, "disc": 1,
        "defining_poly": [-1, 1], "a": {"3": [-1], "5": [1], "7": [-2], "13": [4], "17": [-2]}}],
        "coverage": [{"level": 11, "weight": 2, "nebentype": {"modulus": 11, "exponents": [0]}},
                     {"level": 11, "weight": 4, "nebentype": {"modulus": 11, "exponents": [0]}}]}"#;

    #[test]
    fn level_11_type_two() {
        let db = crate::newforms::parse_db(LEVEL11, &[3, 5, 7, 13, 17]).unwrap();
        let f2 = f(1);
        let primes = [3, 5, 7, 11, 13, 17];
        let finder = Finder::new(11, f2, &primes, &db).unwrap();
        let one = f2.one();
        let zero = f2.zero();
        let pk = packet_from_traces(
            11,
            f2,
            &[(3, one), (5, one), (7, zero), (11, zero), (13, zero), (17, zero)],
        );
        let s = poly_system(&pk, &primes).unwrap();
        let rep = finder.find(&s, ListKind::ChiS).unwrap();
        assert!(rep.success);
        assert_eq!(classify(&rep), RepType::II);
        assert_eq!(rep.product_system(), s);
        assert_eq!(rep.splits[0].multiplicity, 2);
        assert!(matches!(&rep.splits[1].block, BlockRef::Newform { label, .. } if label == "11.2.0.a"));

        // type I
        let zero_pk = packet_from_traces(11, f2, &[(3, zero), (5, zero), (7, zero), (11, zero), (13, zero), (17, zero)]);
        let rep = finder.find(&poly_system(&zero_pk, &primes).unwrap(), ListKind::ChiS).unwrap();
        assert_eq!(classify(&rep), RepType::I);
        assert_eq!(rep.splits.len(), 1);
        assert_eq!(rep.splits[0].multiplicity, 4);

        // missing weight-3 coverage surfaces for ChiB once the characters are exhausted
        let err = finder.find(&s, ListKind::ChiB).unwrap_err();
        assert!(matches!(err, FinderError::MissingData { .. }), "{err}");
    }

    #[test]
    fn failure_keeps_residual() {
        let db = crate::newforms::parse_db(r#"{"records": [], "coverage": [
            {"level": 11, "weight": 2, "nebentype": {"modulus": 11, "exponents": [0]}},
            {"level": 11, "weight": 4, "nebentype": {"modulus": 11, "exponents": [0]}}]}"#, &[]).unwrap();
        let f2 = f(1);
        let primes = [3, 5, 7];
        let finder = Finder::new(11, f2, &primes, &db).unwrap();
        let pk = packet_from_traces(11, f2, &[(3, f2.one()), (5, f2.one()), (7, f2.zero())]);
        let s = poly_system(&pk, &primes).unwrap();
        let rep = finder.find(&s, ListKind::ChiS).unwrap();
        assert!(!rep.success);
        assert_eq!(classify(&rep), RepType::Failure);
        assert_eq!(rep.residual.degree(), 2);
        assert_eq!(rep.product_system(), s);
    }

    #[test]
    fn type_i9() {
        let f4 = f(2);
        let chars = mod2_characters(9, f4).unwrap();
        let primes = [5u64, 7];
        let chi = &chars[1];
        let polys: Vec<(u64, Poly)> = primes
            .iter()
            .map(|&l| {
                let c = chi.value(l).unwrap().embed(f4).unwrap();
                let q = &p(f4, &[1, 1]).pow(2) * &Poly::from_elems(f4, &[f4.one(), c]);
                (l, &q * &Poly::from_elems(f4, &[f4.one(), c.frobenius(1)]))
            })
            .collect();
        let s = sys(f4, &polys);
        let db = NewformDb::default();
        let finder = Finder::new(27, f4, &[3, 5, 7], &db).unwrap();
        let rep = finder.find(&s, ListKind::ChiS).unwrap();
        assert_eq!(classify(&rep), RepType::Im(9));
        assert_eq!(rep.total_degree(), 4);
    }
}
