//! Mixing a primary dataset with exact counts drawn from extra sources.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use lyapforge_core::rng::{stream, Rng};
use rand::seq::SliceRandom;

use crate::error::{PipelineError, Result};
use crate::record::{read_records, write_records, DatasetRecord};

/// `count` records of `pool` whose systems are not in `seen`, in random order.
pub(crate) fn select_distinct(
    name: &str,
    pool: &[DatasetRecord],
    count: usize,
    seen: &mut HashSet<String>,
    rng: &mut Rng,
) -> Result<Vec<DatasetRecord>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.shuffle(rng);
    let mut local = HashSet::new();
    let fresh: Vec<usize> = order
        .into_iter()
        .filter(|&i| !seen.contains(pool[i].key()) && local.insert(pool[i].key()))
        .collect();
    if fresh.len() < count {
        return Err(PipelineError::InsufficientRecords {
            source_name: name.into(),
            requested: count,
            available: fresh.len(),
        });
    }
    let chosen: Vec<DatasetRecord> = fresh[..count].iter().map(|&i| pool[i].clone()).collect();
    seen.extend(chosen.iter().map(|r| r.key().to_owned()));
    Ok(chosen)
}

pub struct Extra {
    pub name: String,
    pub records: Vec<DatasetRecord>,
    pub count: usize,
}

/// Primary records keep their relative order; the chosen extras are spliced in at
/// random positions. Extras never repeat a system already present.
pub fn mix_records(primary: Vec<DatasetRecord>, extras: &[Extra], seed: u64) -> Result<Vec<DatasetRecord>> {
    let mut seen: HashSet<String> = primary.iter().map(|r| r.key().to_owned()).collect();
    let mut chosen = Vec::with_capacity(extras.len());
    for (j, e) in extras.iter().enumerate() {
        let mut rng = stream(seed, j as u64 + 1);
        chosen.push(select_distinct(&e.name, &e.records, e.count, &mut seen, &mut rng)?);
    }
    // Source label per output slot: 0 is the primary, j + 1 is extra j.
    let mut labels: Vec<usize> = vec![0; primary.len()];
    for (j, c) in chosen.iter().enumerate() {
        labels.extend(std::iter::repeat(j + 1).take(c.len()));
    }
    if labels.len() > primary.len() {
        labels.shuffle(&mut stream(seed, 0));
    }
    let mut sources: Vec<std::vec::IntoIter<DatasetRecord>> = std::iter::once(primary.into_iter())
        .chain(chosen.into_iter().map(|c| c.into_iter()))
        .collect();
    Ok(labels
        .into_iter()
        .map(|l| sources[l].next().expect("one label per record"))
        .collect())
}

pub fn mix_datasets(primary: &Path, extras: &[(PathBuf, usize)], out: &Path, seed: u64) -> Result<usize> {
    let primary = read_records(primary)?;
    let extras = extras
        .iter()
        .map(|(p, count)| {
            Ok(Extra {
                name: p.display().to_string(),
                records: read_records(p)?,
                count: *count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mixed = mix_records(primary, &extras, seed)?;
    write_records(out, &mixed)?;
    Ok(mixed.len())
}
