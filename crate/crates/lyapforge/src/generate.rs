//! Sharded, resumable dataset generation.
//!
//! Group `g` of a run always draws from `rng::stream(seed, g)`, and shards are
//! merged in index order, so the output depends only on (config, seed, count).

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lyapforge_core::backward::{generate_group as backward_group, GenError};
use lyapforge_core::forward::{find_barrier, findlyap, sample_poly_system, FindResult};
use lyapforge_core::rng::{stream, Rng};
use lyapforge_core::sample::sample_expr;
use lyapforge_core::simplify::simplify;
use lyapforge_core::deadline::Deadline;
use lyapforge_core::sos::SosSettings;
use lyapforge_core::{Expr, PolyNF, System};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ForwardSpec, GenerationConfig, Generator, WildSpec};
use crate::deadline::Timer;
use crate::error::{PipelineError, Result};
use crate::record::{read_jsonl, write_json, write_jsonl, DatasetRecord, GenKind, Witness, SCHEMA_VERSION};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroupOutput {
    pub records: Vec<DatasetRecord>,
    /// The sampler gave up on this group.
    pub degenerate: bool,
}

fn record_id(cfg: &GenerationConfig, seed: u64, group: u64, k: usize) -> String {
    format!("{}-{}-{}-{}", cfg.tag, seed, group, k)
}

/// Records of group `group`; a pure function of its arguments except for forward timeouts.
pub fn generate_group(cfg: &GenerationConfig, seed: u64, group: u64) -> GroupOutput {
    let mut rng = stream(seed, group);
    let out = match &cfg.generator {
        Generator::Backward(b) => match backward_group(b, group, &mut rng) {
            Ok(pairs) => pairs
                .iter()
                .enumerate()
                .map(|(k, pair)| {
                    let sys = System::new(pair.system.clone());
                    let id = record_id(cfg, seed, group, k);
                    let mut r =
                        DatasetRecord::new(id, GenKind::Backward, &sys, Some(&pair.lyapunov), group, seed).ok()?;
                    r.is_barrier = pair.is_barrier;
                    r.witness = cfg.with_witness.then(|| Witness::of_pair(pair));
                    Some(r)
                })
                .collect(),
            Err(GenError::DegenerateSystem) => None,
            Err(e) => panic!("configuration was validated: {e}"),
        },
        Generator::Forward(f) => forward_group(cfg, f, seed, group, &mut rng),
        Generator::Wild(w) => wild_system(w, &mut rng).and_then(|sys| {
            let id = record_id(cfg, seed, group, 0);
            Some(vec![DatasetRecord::new(id, GenKind::Wild, &sys, None, group, seed).ok()?])
        }),
    };
    match out {
        Some(mut records) => {
            for r in &mut records {
                r.tag = Some(cfg.tag.clone());
            }
            GroupOutput {
                records,
                degenerate: false,
            }
        }
        None => GroupOutput {
            records: Vec::new(),
            degenerate: true,
        },
    }
}

fn poly_system(f: &[PolyNF]) -> System {
    System::new(f.iter().map(|p| p.to_expr()).collect())
}

fn forward_group(
    cfg: &GenerationConfig,
    spec: &ForwardSpec,
    seed: u64,
    group: u64,
    rng: &mut Rng,
) -> Option<Vec<DatasetRecord>> {
    let f = sample_poly_system(&spec.system, rng);
    let n = f.len();
    let timer = Timer::after_secs(spec.timeout_s);
    let settings = SosSettings::default();
    let eps = vec![spec.eps; n];
    for &d in &spec.degrees {
        if timer.expired() {
            break;
        }
        let res = if spec.barrier {
            find_barrier(&f, d, &settings, &timer)
        } else {
            findlyap(&f, d, &eps, &settings, &timer)
        };
        if let Ok(FindResult::Found(v)) = res {
            let id = record_id(cfg, seed, group, 0);
            let mut r = DatasetRecord::new(id, GenKind::Forward, &poly_system(&f), Some(&v.to_expr()), group, seed).ok()?;
            r.is_barrier = spec.barrier;
            r.witness = cfg.with_witness.then_some(Witness::Forward {
                degree: d,
                eps: if spec.barrier { 0.0 } else { spec.eps },
            });
            return Some(vec![r]);
        }
    }
    Some(Vec::new())
}

/// Attempts per equation before a non-polynomial wild group counts as degenerate.
const WILD_ATTEMPTS: usize = 100;

/// A random system vanishing at the origin; `None` if no usable equation was drawn.
pub fn wild_system(spec: &WildSpec, rng: &mut Rng) -> Option<System> {
    if spec.polynomial {
        return Some(poly_system(&sample_poly_system(&spec.poly, rng)));
    }
    let n = spec.expr.sample_dim(rng);
    let mut eqs = Vec::with_capacity(n);
    for _ in 0..n {
        let eq = (0..WILD_ATTEMPTS).find_map(|_| {
            let q = sample_expr(&spec.expr, n, rng);
            let at0 = q.substitute(&|_| Expr::zero());
            at0.eval(&[]).ok()?;
            let p = simplify(&Expr::sub(q, simplify(&at0)));
            (0..n).any(|i| p.depends_on(i)).then_some(p)
        })?;
        eqs.push(eq);
    }
    Some(System::new(eqs))
}

/// First-come deduplication by system tokens, stopping at `target` records.
#[derive(Debug)]
pub struct Deduper {
    seen: HashSet<String>,
    pub records: Vec<DatasetRecord>,
    pub duplicates: u64,
    target: usize,
}

impl Deduper {
    pub fn new(target: usize) -> Self {
        Deduper {
            seen: HashSet::new(),
            records: Vec::new(),
            duplicates: 0,
            target,
        }
    }

    pub fn is_full(&self) -> bool {
        self.records.len() >= self.target
    }

    pub fn push(&mut self, r: DatasetRecord) {
        if self.is_full() {
            return;
        }
        if self.seen.insert(r.key().to_owned()) {
            self.records.push(r);
        } else {
            self.duplicates += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub tool_version: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: GenerationConfig,
    pub requested: usize,
    pub records: usize,
    pub groups: u64,
    pub shards: u64,
    pub degenerate_groups: u64,
    pub degenerate_rate: f64,
    pub duplicates_dropped: u64,
    pub elapsed_s: f64,
    pub records_per_s: f64,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Keep the shard directory after a successful merge.
    pub keep_shards: bool,
    /// Give up after this many groups; defaults to `1000 * count + 10000`.
    pub max_groups: Option<u64>,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
struct Stamp {
    config_hash: String,
    seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ShardMeta {
    groups: u64,
    degenerate: u64,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    sibling(out, ".manifest.json")
}

pub fn shard_dir(out: &Path) -> PathBuf {
    sibling(out, ".shards")
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Loads shard `k` if a previous run completed it, otherwise generates and stores it.
fn shard(cfg: &GenerationConfig, seed: u64, dir: &Path, k: u64) -> Result<(Vec<DatasetRecord>, ShardMeta)> {
    let data = dir.join(format!("shard-{k:06}.jsonl"));
    let meta = dir.join(format!("shard-{k:06}.done.json"));
    if meta.exists() {
        let m: ShardMeta = serde_json::from_slice(&std::fs::read(&meta).map_err(PipelineError::io(&meta))?)
            .map_err(|source| PipelineError::Json {
                path: meta.clone(),
                line: 1,
                source,
            })?;
        return Ok((read_jsonl(&data)?, m));
    }
    let lo = k * cfg.shard_size;
    let outputs: Vec<GroupOutput> = (lo..lo + cfg.shard_size)
        .into_par_iter()
        .map(|g| generate_group(cfg, seed, g))
        .collect();
    let degenerate = outputs.iter().filter(|o| o.degenerate).count() as u64;
    let records: Vec<DatasetRecord> = outputs.into_iter().flat_map(|o| o.records).collect();
    write_jsonl(&data, &records)?;
    let m = ShardMeta {
        groups: cfg.shard_size,
        degenerate,
    };
    write_json(&meta, &m)?;
    Ok((records, m))
}

/// Writes `count` deduplicated records to `out` and a manifest beside it.
///
/// Shards live in `<out>.shards/` until the merge succeeds; rerunning with the
/// same config and seed after an interruption reuses the finished shards.
pub fn run_generation(cfg: &GenerationConfig, seed: u64, count: usize, out: &Path, opts: &RunOptions) -> Result<Manifest> {
    cfg.validate()?;
    let start = Instant::now();
    let dir = shard_dir(out);
    std::fs::create_dir_all(&dir).map_err(PipelineError::io(&dir))?;
    let stamp = Stamp {
        config_hash: cfg.hash(),
        seed,
    };
    let stamp_path = dir.join("stamp.json");
    match std::fs::read(&stamp_path) {
        Ok(bytes) => {
            if serde_json::from_slice::<Stamp>(&bytes).ok().as_ref() != Some(&stamp) {
                return Err(PipelineError::ShardMismatch(dir));
            }
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => write_json(&stamp_path, &stamp)?,
        Err(e) => return Err(PipelineError::io(&stamp_path)(e)),
    }
    let max_groups = opts.max_groups.unwrap_or(1000 * count as u64 + 10_000);
    let mut dedup = Deduper::new(count);
    let (mut groups, mut degenerate, mut shards) = (0u64, 0u64, 0u64);
    while !dedup.is_full() {
        if groups >= max_groups {
            return Err(PipelineError::Exhausted {
                groups,
                found: dedup.records.len(),
                requested: count,
            });
        }
        let (records, meta) = shard(cfg, seed, &dir, shards)?;
        shards += 1;
        groups += meta.groups;
        degenerate += meta.degenerate;
        for r in records {
            dedup.push(r);
        }
        log::info!(
            "{}: shard {} done, {}/{} records, {} degenerate groups so far",
            cfg.tag,
            shards,
            dedup.records.len(),
            count,
            degenerate
        );
    }
    write_jsonl(out, &dedup.records)?;
    let elapsed = start.elapsed().as_secs_f64();
    let degenerate_rate = if groups == 0 { 0.0 } else { degenerate as f64 / groups as f64 };
    log::info!("{}: degenerate-generation rate {:.4} over {} groups", cfg.tag, degenerate_rate, groups);
    let manifest = Manifest {
        schema: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed,
        config_hash: stamp.config_hash,
        config: cfg.clone(),
        requested: count,
        records: dedup.records.len(),
        groups,
        shards,
        degenerate_groups: degenerate,
        degenerate_rate,
        duplicates_dropped: dedup.duplicates,
        elapsed_s: elapsed,
        records_per_s: if elapsed > 0.0 { dedup.records.len() as f64 / elapsed } else { 0.0 },
    };
    write_json(&manifest_path(out), &manifest)?;
    if !opts.keep_shards {
        std::fs::remove_dir_all(&dir).map_err(PipelineError::io(&dir))?;
    }
    Ok(manifest)
}
