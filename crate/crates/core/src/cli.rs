//! Pipeline steps behind the command-line tool.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

use crate::characters::{enumerate_char0, Char0, CharError};
use crate::finder::{report_level, FinderError, LevelReport, ListKind, NewformLookup};
use crate::gf2k::{lcm, BinaryField, FieldError};
use crate::heckepoly::{default_primes, good_primes, poly_system, Eigenpacket, HeckeError, PacketFile};
use crate::matf2k::{LoadError, OperatorFile};
use crate::matf2k::{eigenvalue_field, refine, MatError, MatF2k, OpKind, OperatorLabel};
use crate::newforms::{parse_db, NewformDb, NewformError, NewformSource, Query, RemoteClient, RemoteError, DEFAULT_BASE_URL};

/// Environment variable overriding the newform database base URL.
pub const BASE_URL_ENV: &str = "M2GALOIS_DB_URL";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("level {level}: operator {label} is missing")]
    MissingOperator { level: u64, label: OperatorLabel },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Matrix(#[from] MatError),
    #[error(transparent)]
    Hecke(#[from] HeckeError),
    #[error(transparent)]
    Finder(#[from] FinderError),
    #[error(transparent)]
    Newform(#[from] NewformError),
    #[error(transparent)]
    Remote(#[from] RemoteError),
    #[error(transparent)]
    Character(#[from] CharError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Sharbly(#[from] crate::sharbly::SharblyError),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Options shared by the pipeline steps.
#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    /// Restrict to these levels; all levels in the input otherwise.
    pub levels: Option<Vec<u64>>,
    /// Override the per-level default prime set.
    pub ell_set: Option<Vec<u64>>,
    pub lists: Vec<ListKind>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn primes_for(&self, level: u64) -> Vec<u64> {
        self.ell_set.clone().unwrap_or_else(|| default_primes(level))
    }

    pub fn wants(&self, level: u64) -> bool {
        self.levels.as_ref().is_none_or(|l| l.contains(&level))
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = self.jobs {
            b = b.num_threads(j.max(1));
        }
        b.build().map_err(|e| CliError::Pool(e.to_string()))
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Result of refining one level's operators.
#[derive(Clone, Debug)]
pub struct RefineOutput {
    pub file: PacketFile,
    pub packets: Vec<Eigenpacket>,
    pub warnings: Vec<String>,
}

/// Simultaneous eigenspaces of all operators of one level, over the smallest
/// field containing the eigenvalues in which every Hecke polynomial splits.
pub fn run_refine(
    ops: &OperatorFile,
    mats: &[(OperatorLabel, MatF2k)],
    primes: &[u64],
) -> Result<RefineOutput, CliError> {
    let level = ops.level;
    for &ell in primes {
        let kind = if level.is_multiple_of(ell) { OpKind::U } else { OpKind::T };
        for k in 1..=3 {
            let label = OperatorLabel { ell: ell as u32, k, kind };
            if !mats.iter().any(|(l, _)| *l == label) {
                return Err(CliError::MissingOperator { level, label });
            }
        }
    }
    let refs: Vec<&MatF2k> = mats.iter().map(|(_, m)| m).collect();
    let field = eigenvalue_field(&refs)?;
    let decomps = mats
        .iter()
        .map(|(l, m)| m.eigenspaces(*l, field))
        .collect::<Result<Vec<_>, _>>()?;
    let spaces = refine(&decomps)?;
    let packets = spaces
        .iter()
        .map(|s| Eigenpacket::from_eigenspace(level, field, s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut warnings = Vec::new();
    let total: usize = packets.iter().map(|p| p.dim).sum();
    if total < ops.ambient_dim {
        let w = format!(
            "level {level}: eigenspaces span {total} of {} dimensions; some operator is not semisimple",
            ops.ambient_dim
        );
        log::warn!("{w}");
        warnings.push(w);
    }
    let mut degree = field.degree();
    for p in &packets {
        degree = lcm(degree, poly_system(p, primes)?.splitting_degree()?);
    }
    let working = BinaryField::new(degree)?;
    if working != field {
        log::info!("level {level}: enlarging F_{} to F_{}", field.order(), working.order());
    }
    let packets = packets
        .iter()
        .map(|p| p.embed(working))
        .collect::<Result<Vec<_>, _>>()?;
    let mut file = PacketFile::from_packets(level, working, &packets);
    file.ambient_dim = Some(ops.ambient_dim);
    Ok(RefineOutput { file, packets, warnings })
}

/// Runs the finder on every selected level, in parallel, reports sorted by level.
pub fn run_find<S: NewformLookup + ?Sized>(
    files: &[PacketFile],
    config: &RunConfig,
    source: &S,
) -> Result<Vec<LevelReport>, CliError> {
    let lists = if config.lists.is_empty() {
        vec![ListKind::ChiS, ListKind::ChiB]
    } else {
        config.lists.clone()
    };
    let mut selected: Vec<&PacketFile> = files.iter().filter(|f| config.wants(f.level)).collect();
    selected.sort_by_key(|f| f.level);
    let pool = config.pool()?;
    pool.install(|| {
        selected
            .par_iter()
            .map(|f| {
                let packets = f.to_packets()?;
                let primes = config.primes_for(f.level);
                Ok(report_level(f.level, f.ambient_dim, &packets, &primes, &lists, source)?)
            })
            .collect()
    })
}

/// Local database plus, when a cache directory is given, the remote client.
pub fn newform_source(db_path: Option<&Path>, cache: Option<&Path>, primes: &[u64]) -> Result<NewformSource, CliError> {
    let local = match db_path {
        Some(p) => parse_db(&read_text(p)?, &[])?,
        None => NewformDb::default(),
    };
    let remote = cache.map(|dir| {
        let base = std::env::var(BASE_URL_ENV).unwrap_or_else(|_| DEFAULT_BASE_URL.to_string());
        RemoteClient::new(&base, dir, primes).with_retry(4, Duration::from_millis(500))
    });
    Ok(NewformSource { local, remote })
}

/// Queries the finder needs at `level` when the characters split off have
/// 2-power-order nebentypes only: weights 2 and 4 with trivial nebentype, and
/// weights 2 and 3 with every 2-power-order nebentype of matching parity.
pub fn standard_queries(level: u64) -> Result<Vec<Query>, CliError> {
    let m = crate::arith::odd_part(level);
    let mut out = BTreeSet::new();
    for n1 in crate::arith::divisors(m).into_iter().filter(|&d| d > 1) {
        for weight in [2u32, 3, 4] {
            for psi in enumerate_char0(n1)? {
                let two_power = psi.order().is_power_of_two();
                let trivial_ok = weight != 3 && psi.is_trivial();
                let parity = parity_of(&psi) == (weight % 2 == 1);
                if (trivial_ok || (weight != 4 && two_power && !psi.is_trivial())) && parity {
                    out.insert((n1, weight, psi.exponents().to_vec()));
                }
            }
        }
    }
    out.into_iter()
        .map(|(n1, weight, e)| {
            Ok(Query {
                level: n1,
                weight,
                nebentype: Char0::new(n1, e)?,
            })
        })
        .collect()
}

fn parity_of(psi: &Char0) -> bool {
    let m = psi.modulus();
    if m <= 2 {
        return false;
    }
    let v = psi.value(m - 1).expect("-1 is a unit");
    v.num * 2 == v.den
}

/// Fetches every standard query for `levels` and returns them as one database.
pub fn fetch_newforms(levels: &[u64], client: &RemoteClient) -> Result<NewformDb, CliError> {
    let mut db = NewformDb::default();
    let mut queries = BTreeSet::new();
    for &n in levels {
        for q in standard_queries(n)? {
            if queries.insert(q.key()) {
                let records = client.fetch(&q)?;
                db.merge(NewformDb {
                    records,
                    coverage: vec![q],
                });
            }
        }
    }
    Ok(db)
}

/// Every file path named by `path`: the file itself, or the `.json` files in a directory.
pub fn json_files(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut out: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    out.sort();
    Ok(out)
}

/// `L'` for a level under `config`.
pub fn good_primes_for(config: &RunConfig, level: u64) -> Vec<u64> {
    good_primes(level, &config.primes_for(level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matf2k::OperatorEntry;

    fn entry(ell: u32, k: u32, kind: OpKind, rows: Vec<Vec<u32>>) -> OperatorEntry {
        OperatorEntry { ell, k, kind, field_degree: 1, rows }
    }

    fn load(file: &OperatorFile) -> Vec<(OperatorLabel, MatF2k)> {
        file.operators
            .iter()
            .map(|op| (op.label(), op.matrix(file.ambient_dim).unwrap()))
            .collect()
    }

    fn diag(d: &[u32]) -> Vec<Vec<u32>> {
        (0..d.len()).map(|i| (0..d.len()).map(|j| if i == j { d[i] } else { 0 }).collect()).collect()
    }

    #[test]
    fn two_commuting_operators_give_four_packets() {
        let mut ops = vec![entry(3, 1, OpKind::T, diag(&[0, 0, 1, 1])), entry(5, 1, OpKind::T, diag(&[0, 1, 0, 1]))];
        for ell in [3, 5] {
            for k in 2..=3 {
                ops.push(entry(ell, k, OpKind::T, diag(&[0, 0, 0, 0])));
            }
        }
        let file = OperatorFile { level: 11, ambient_dim: 4, operators: ops };
        let out = run_refine(&file, &load(&file), &[3, 5]).unwrap();
        assert_eq!(out.packets.len(), 4);
        assert!(out.packets.iter().all(|p| p.dim == 1));
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn non_semisimple_warns() {
        let mut ops = vec![entry(3, 1, OpKind::T, vec![vec![0, 1], vec![0, 0]])];
        ops.push(entry(3, 2, OpKind::T, diag(&[0, 0])));
        ops.push(entry(3, 3, OpKind::T, diag(&[0, 0])));
        let file = OperatorFile { level: 11, ambient_dim: 2, operators: ops };
        let out = run_refine(&file, &load(&file), &[3]).unwrap();
        assert_eq!(out.packets.iter().map(|p| p.dim).sum::<usize>(), 1);
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn missing_operator_is_an_error() {
        let file = OperatorFile {
            level: 11,
            ambient_dim: 1,
            operators: vec![entry(3, 1, OpKind::T, diag(&[1]))],
        };
        assert!(matches!(
            run_refine(&file, &load(&file), &[3]),
            Err(CliError::MissingOperator { .. })
        ));
    }

    #[test]
    fn empty_packet_list_gives_empty_report() {
        let f = PacketFile { level: 11, field_degree: 1, ambient_dim: None, packets: vec![] };
        let reports = run_find(&[f], &RunConfig::default(), &NewformDb::default()).unwrap();
        assert_eq!(reports.len(), 1);
        assert!(reports[0].rows.is_empty());
    }

    #[test]
    fn standard_queries_level_13() {
        let q = standard_queries(13).unwrap();
        let keys: Vec<String> = q.iter().map(|q| q.key()).collect();
        // weight 2 and 4 trivial; weight 3 needs an odd 2-power character: order 4
        assert!(keys.contains(&"13.2.0".to_string()));
        assert!(keys.contains(&"13.4.0".to_string()));
        assert!(keys.contains(&"13.3.3".to_string()));
        assert!(keys.contains(&"13.3.9".to_string()));
        assert!(!keys.contains(&"13.3.6".to_string()));
        assert!(!keys.iter().any(|k| k.starts_with("13.4.") && k != "13.4.0"));
    }
}
