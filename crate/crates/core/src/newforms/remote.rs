//! Client for the public modular-forms database (LMFDB) REST API, with an
//! on-disk cache in the local database format.
//!
//! A query `(level, weight, psi)` lists the newforms of that level and weight
//! whose character orbit contains `psi` (matched through Conrey labels, which
//! use the same generators as [`crate::characters`]), then reads each form's
//! Hecke ring and eigenvalues. The Hecke ring becomes the record's order.

use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::Value;
use thiserror::Error;

use super::{parse_db, serialize_db, NewformDb, NewformError, NewformRecord, Query};
use crate::numberfield::{Order, OrderElem};

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("request to {url} failed after {attempts} attempts: {message}")]
    Network { url: String, attempts: u32, message: String },
    #[error("unparseable payload from {url}: {message}")]
    Payload { url: String, message: String },
    #[error("cache: {0}")]
    Cache(#[from] std::io::Error),
    #[error(transparent)]
    Newform(#[from] NewformError),
    #[error("query {0} is not covered by local data and no remote client is configured")]
    NotCovered(String),
}

pub const DEFAULT_BASE_URL: &str = "https://www.lmfdb.org";

pub struct RemoteClient {
    base_url: String,
    cache_dir: PathBuf,
    primes: Vec<u64>,
    retries: u32,
    backoff: Duration,
    min_interval: Duration,
    last_request: Mutex<Option<Instant>>,
    agent: ureq::Agent,
}

impl RemoteClient {
    pub fn new(base_url: &str, cache_dir: &Path, primes: &[u64]) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .build();
        Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            cache_dir: cache_dir.to_path_buf(),
            primes: primes.to_vec(),
            retries: 4,
            backoff: Duration::from_millis(500),
            min_interval: Duration::from_millis(500),
            last_request: Mutex::new(None),
            agent: ureq::Agent::new_with_config(config),
        }
    }

    pub fn with_retry(mut self, retries: u32, backoff: Duration) -> Self {
        self.retries = retries.max(1);
        self.backoff = backoff;
        self
    }

    /// Minimum spacing between requests, shared by all threads using this client.
    pub fn with_min_interval(mut self, d: Duration) -> Self {
        self.min_interval = d;
        self
    }

    fn cache_path(&self, q: &Query) -> PathBuf {
        self.cache_dir.join(format!("{}.json", q.key()))
    }

    /// Records answering `q`, from the cache when present.
    pub fn fetch(&self, q: &Query) -> Result<Vec<NewformRecord>, RemoteError> {
        let path = self.cache_path(q);
        if path.exists() {
            log::debug!("cache hit {}", path.display());
            let text = std::fs::read_to_string(&path)?;
            return Ok(parse_db(&text, &self.primes)?.records);
        }
        let records = self.fetch_uncached(q)?;
        let db = NewformDb {
            records: records.clone(),
            coverage: vec![q.clone()],
        };
        std::fs::create_dir_all(&self.cache_dir)?;
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serialize_db(&db))?;
        std::fs::rename(&tmp, &path)?;
        Ok(records)
    }

    fn throttle(&self) {
        let mut last = self.last_request.lock().expect("not poisoned");
        if let Some(t) = *last {
            let since = t.elapsed();
            if since < self.min_interval {
                std::thread::sleep(self.min_interval - since);
            }
        }
        *last = Some(Instant::now());
    }

    fn get_json(&self, url: &str) -> Result<Value, RemoteError> {
        let mut message = String::new();
        let mut delay = self.backoff;
        for attempt in 1..=self.retries {
            self.throttle();
            match self.agent.get(url).call() {
                Ok(mut resp) => {
                    let text = resp.body_mut().read_to_string().map_err(|e| RemoteError::Payload {
                        url: url.to_string(),
                        message: e.to_string(),
                    })?;
                    return serde_json::from_str(&text).map_err(|e| RemoteError::Payload {
                        url: url.to_string(),
                        message: e.to_string(),
                    });
                }
                Err(ureq::Error::StatusCode(code)) if code != 429 && code < 500 => {
                    return Err(RemoteError::Network {
                        url: url.to_string(),
                        attempts: attempt,
                        message: format!("http status {code}"),
                    });
                }
                Err(e) => {
                    message = e.to_string();
                    log::warn!("attempt {attempt} for {url} failed: {message}");
                    if attempt < self.retries {
                        std::thread::sleep(delay);
                        delay *= 2;
                    }
                }
            }
        }
        Err(RemoteError::Network {
            url: url.to_string(),
            attempts: self.retries,
            message,
        })
    }

    /// All rows of a paged API listing.
    fn get_rows(&self, url: &str) -> Result<Vec<Value>, RemoteError> {
        let mut rows = Vec::new();
        let mut next = Some(url.to_string());
        while let Some(u) = next {
            let page = self.get_json(&u)?;
            let data = page.get("data").and_then(Value::as_array).ok_or_else(|| RemoteError::Payload {
                url: u.clone(),
                message: "missing `data` array".into(),
            })?;
            rows.extend(data.iter().cloned());
            next = page.get("next").and_then(Value::as_str).map(|n| {
                if n.starts_with('/') {
                    format!("{}{}", self.base_url, n)
                } else {
                    n.to_string()
                }
            });
        }
        Ok(rows)
    }

    fn fetch_uncached(&self, q: &Query) -> Result<Vec<NewformRecord>, RemoteError> {
        let conrey = conrey_index(&q.nebentype);
        let url = format!(
            "{}/api/mf_newforms/?level={}&weight={}&_format=json&_fields=label,dim,conrey_indexes,field_disc,nf_label,traces",
            self.base_url, q.level, q.weight
        );
        let mut out = Vec::new();
        for row in self.get_rows(&url)? {
            let payload = |m: &str| RemoteError::Payload {
                url: url.clone(),
                message: m.to_string(),
            };
            let label = row.get("label").and_then(Value::as_str).ok_or_else(|| payload("newform without label"))?;
            let orbit: Vec<u64> = row
                .get("conrey_indexes")
                .and_then(Value::as_array)
                .map(|a| a.iter().filter_map(Value::as_u64).collect())
                .unwrap_or_default();
            if !orbit.contains(&conrey) {
                continue;
            }
            let dim = row.get("dim").and_then(Value::as_u64).ok_or_else(|| payload("newform without dim"))?;
            let disc = field_disc(&row, dim).ok_or_else(|| payload("no field discriminant"))?;
            let (order, a) = if dim == 1 {
                let traces = row.get("traces").and_then(Value::as_array).ok_or_else(|| payload("no traces"))?;
                let a = self
                    .primes
                    .iter()
                    .map(|&p| {
                        let v = traces.get(p as usize - 1).and_then(Value::as_i64).ok_or_else(|| payload("short traces"))?;
                        Ok((p, OrderElem::from_ints(&[v])))
                    })
                    .collect::<Result<_, RemoteError>>()?;
                (Order::from_poly(&[-1, 1]).expect("Z"), a)
            } else {
                self.hecke_data(label)?
            };
            out.push(NewformRecord {
                label: label.to_string(),
                level: q.level,
                weight: q.weight,
                nebentype: q.nebentype.clone(),
                degree: dim as usize,
                disc,
                order,
                a,
                reductions: Vec::new(),
            });
        }
        Ok(out)
    }

    /// Hecke ring as an order, and `a_p` in its basis.
    fn hecke_data(&self, label: &str) -> Result<(Order, std::collections::BTreeMap<u64, OrderElem>), RemoteError> {
        let url = format!("{}/api/mf_hecke_nf/?label={}&_format=json", self.base_url, label);
        let rows = self.get_rows(&url)?;
        let payload = |m: String| RemoteError::Payload {
            url: url.clone(),
            message: m,
        };
        let row = rows.first().ok_or_else(|| payload(format!("no Hecke data for {label}")))?;
        if row.get("hecke_ring_cyclotomic_generator").and_then(Value::as_u64).unwrap_or(0) != 0 {
            return Err(payload("cyclotomic Hecke ring representation is not supported".into()));
        }
        let ints = |v: &Value| -> Option<Vec<BigInt>> {
            v.as_array()?.iter().map(json_bigint).collect()
        };
        let field_poly = row.get("field_poly").and_then(ints).ok_or_else(|| payload("field_poly".into()))?;
        let nums: Vec<Vec<BigInt>> = row
            .get("hecke_ring_numerators")
            .and_then(Value::as_array)
            .and_then(|a| a.iter().map(ints).collect())
            .ok_or_else(|| payload("hecke_ring_numerators".into()))?;
        let dens: Vec<BigInt> = row
            .get("hecke_ring_denominators")
            .and_then(ints)
            .ok_or_else(|| payload("hecke_ring_denominators".into()))?;
        let table = hecke_ring_table(&field_poly, &nums, &dens).map_err(payload)?;
        let poly: Option<Vec<i64>> = field_poly.iter().map(|c| c.to_i64()).collect();
        let order = Order::from_table(table, poly).map_err(|e| payload(e.to_string()))?;
        let an = row.get("an").and_then(Value::as_array).ok_or_else(|| payload("an".into()))?;
        let mut a = std::collections::BTreeMap::new();
        for &p in &self.primes {
            let coords = an
                .get(p as usize - 1)
                .and_then(ints)
                .and_then(|v| v.iter().map(|c| c.to_i64()).collect::<Option<Vec<_>>>())
                .ok_or_else(|| payload(format!("a_{p}")))?;
            a.insert(p, OrderElem::from_ints(&coords));
        }
        Ok((order, a))
    }
}

fn json_bigint(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

/// Field discriminant from `field_disc`, or from the number field label
/// `d.r.D.i` (sign `(-1)^((d - r)/2)`), or 1 for Q.
fn field_disc(row: &Value, dim: u64) -> Option<i128> {
    if dim == 1 {
        return Some(1);
    }
    if let Some(d) = row.get("field_disc").and_then(json_bigint) {
        return d.to_i128();
    }
    let label = row.get("nf_label")?.as_str()?;
    let parts: Vec<&str> = label.split('.').collect();
    let (d, r, disc): (i128, i128, i128) = (parts.first()?.parse().ok()?, parts.get(1)?.parse().ok()?, parts.get(2)?.parse().ok()?);
    Some(if ((d - r) / 2) % 2 == 0 { disc } else { -disc })
}

/// Conrey index of a character: `prod g_i^{e_i} mod N` with the canonical generators.
pub fn conrey_index(chi: &crate::characters::Char0) -> u64 {
    let g = chi.group();
    g.generators
        .iter()
        .zip(chi.exponents())
        .fold(1 % g.modulus, |acc, (&gen, &e)| {
            (acc as u128 * crate::arith::pow_mod(gen, e, g.modulus) as u128 % g.modulus as u128) as u64
        })
        .max(1)
}

/// Multiplication table of the Z-basis `beta_i = nums[i](x) / dens[i]` of a
/// ring inside `Q[x]/(field_poly)`.
pub(crate) fn hecke_ring_table(
    field_poly: &[BigInt],
    nums: &[Vec<BigInt>],
    dens: &[BigInt],
) -> Result<Vec<Vec<Vec<i64>>>, String> {
    let d = field_poly.len().checked_sub(1).ok_or("empty field polynomial")?;
    if nums.len() != d || dens.len() != d {
        return Err(format!("Hecke ring basis has {} elements, field degree is {d}", nums.len()));
    }
    if !field_poly[d].is_one() {
        return Err("field polynomial is not monic".into());
    }
    let q = |x: &BigInt| BigRational::from_integer(x.clone());
    let basis: Vec<Vec<BigRational>> = nums
        .iter()
        .zip(dens)
        .map(|(n, den)| {
            let mut v: Vec<BigRational> = (0..d).map(|i| n.get(i).map(q).unwrap_or_else(BigRational::zero) / q(den)).collect();
            v.resize(d, BigRational::zero());
            v
        })
        .collect();
    let mut unit = vec![BigRational::zero(); d];
    unit[0] = BigRational::one();
    if basis[0] != unit {
        return Err("first Hecke ring basis element is not 1".into());
    }
    // columns of `basis` as a matrix, for solving
    let inverse = invert(&basis).ok_or("Hecke ring basis is singular")?;
    let mut table = vec![vec![vec![0i64; d]; d]; d];
    for i in 0..d {
        for j in i..d {
            let prod = polymulmod(&basis[i], &basis[j], field_poly);
            // coordinates c with prod = sum c_k basis[k]
            let coords: Vec<BigRational> = (0..d)
                .map(|k| (0..d).fold(BigRational::zero(), |acc, m| acc + &prod[m] * &inverse[m][k]))
                .collect();
            let ints: Vec<i64> = coords
                .iter()
                .map(|c| {
                    if !c.is_integer() {
                        return Err(format!("b_{i} b_{j} is not integral in the Hecke ring basis"));
                    }
                    c.to_integer().to_i64().ok_or_else(|| "structure constant overflows i64".to_string())
                })
                .collect::<Result<_, _>>()?;
            table[i][j] = ints.clone();
            table[j][i] = ints;
        }
    }
    Ok(table)
}

fn polymulmod(a: &[BigRational], b: &[BigRational], modulus: &[BigInt]) -> Vec<BigRational> {
    let d = modulus.len() - 1;
    let mut prod = vec![BigRational::zero(); 2 * d];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            prod[i + j] += x * y;
        }
    }
    for top in (d..2 * d).rev() {
        let c = std::mem::replace(&mut prod[top], BigRational::zero());
        if c.is_zero() {
            continue;
        }
        for (i, m) in modulus[..d].iter().enumerate() {
            prod[top - d + i] -= &c * BigRational::from_integer(m.clone());
        }
    }
    prod.truncate(d);
    prod
}

/// Inverse of the matrix whose rows are `rows`: returns `m` with
/// `sum_m v[m] inv[m][k]` = coordinate `k` of `v` in the row basis.
fn invert(rows: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = rows.len();
    let mut a: Vec<Vec<BigRational>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.clone();
            v.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            v
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        let inv = a[c][c].recip();
        for x in a[c].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..2 * n {
                    let t = &a[c][j] * &f;
                    a[i][j] -= t;
                }
            }
        }
    }
    // rows: B^{-1}; v = c B  =>  c = v B^{-1}
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Local database first, then the remote client for uncovered queries.
pub struct NewformSource {
    pub local: NewformDb,
    pub remote: Option<RemoteClient>,
}

impl NewformSource {
    pub fn resolve(&self, q: &Query) -> Result<Vec<NewformRecord>, RemoteError> {
        if self.local.covers(q) {
            return Ok(self.local.lookup(q).into_iter().cloned().collect());
        }
        match &self.remote {
            Some(client) => client.fetch(q),
            None => Err(RemoteError::NotCovered(q.key())),
        }
    }
}
