//! Dataset records and their JSONL files.
//!
//! Every expression is stored twice: as space-separated prefix tokens and as
//! infix text. Readers check that both forms denote the same tree.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use lyapforge_core::backward::SystemPair;
use lyapforge_core::parse::parse_expr_dim;
use lyapforge_core::tokenizer::{decode_expr, decode_system, encode_expr, encode_system, from_text, to_text, EncodeError};
use lyapforge_core::{Expr, System};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    Backward,
    Forward,
    Wild,
    ModelVerified,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedSystem {
    pub tokens: String,
    pub infix: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedExpr {
    pub tokens: String,
    pub infix: String,
}

impl EncodedSystem {
    pub fn new(sys: &System) -> Result<EncodedSystem, EncodeError> {
        Ok(EncodedSystem {
            tokens: to_text(&encode_system(sys)?),
            infix: sys.equations.iter().map(|e| e.to_string()).collect(),
        })
    }

    /// Decodes both forms and requires them to agree.
    pub fn decode(&self, n: usize) -> std::result::Result<System, String> {
        let toks = from_text(&self.tokens).map_err(|e| format!("system tokens: {e}"))?;
        let from_tokens = decode_system(&toks).map_err(|e| format!("system tokens: {e}"))?;
        let parsed = self
            .infix
            .iter()
            .map(|s| parse_expr_dim(s, n).map_err(|e| format!("system infix {s:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if from_tokens.equations != parsed {
            return Err("system tokens and infix disagree".into());
        }
        if from_tokens.dim() != n || from_tokens.equations.iter().any(|e| e.dimension() > n) {
            return Err(format!("system does not have {n} equations over x0..x{}", n.saturating_sub(1)));
        }
        Ok(from_tokens)
    }
}

impl EncodedExpr {
    pub fn new(e: &Expr) -> Result<EncodedExpr, EncodeError> {
        Ok(EncodedExpr {
            tokens: to_text(&encode_expr(e)?),
            infix: e.to_string(),
        })
    }

    pub fn decode(&self, n: usize) -> std::result::Result<Expr, String> {
        let toks = from_text(&self.tokens).map_err(|e| format!("lyapunov tokens: {e}"))?;
        let from_tokens = decode_expr(&toks).map_err(|e| format!("lyapunov tokens: {e}"))?;
        let parsed = parse_expr_dim(&self.infix, n).map_err(|e| format!("lyapunov infix: {e}"))?;
        if from_tokens != parsed {
            return Err("lyapunov tokens and infix disagree".into());
        }
        if from_tokens.dimension() > n {
            return Err(format!("lyapunov function uses variables beyond x{}", n.saturating_sub(1)));
        }
        Ok(from_tokens)
    }
}

/// How a record was constructed. Omitted from training data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    Backward {
        v_proper: String,
        v_cross: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<Vec<Vec<i64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<Vec<u32>>,
        h: Vec<String>,
        g: Vec<String>,
        tau: Vec<(usize, usize)>,
        perm: Vec<usize>,
        p: usize,
        k1: usize,
    },
    Forward {
        degree: u32,
        eps: f64,
    },
}

impl Witness {
    pub fn of_pair(pair: &SystemPair) -> Witness {
        let lw = &pair.lyapunov_witness;
        let w = &pair.witness;
        let text = |es: &[Expr]| es.iter().map(|e| e.to_string()).collect();
        Witness::Backward {
            v_proper: lw.v_proper.to_string(),
            v_cross: lw.v_cross.to_string(),
            alpha: lw.core.as_ref().map(|c| c.alpha.clone()),
            beta: lw.core.as_ref().map(|c| c.beta.clone()),
            h: text(&w.h),
            g: text(&w.g),
            tau: w.tau.clone(),
            perm: w.perm.clone(),
            p: w.p,
            k1: w.k1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub schema: u32,
    pub id: String,
    pub gen_mode: GenKind,
    /// Profile that produced the record, kept through mixing and expert iteration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    pub n: usize,
    pub system: EncodedSystem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<EncodedExpr>,
    pub is_barrier: bool,
    pub group_id: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl DatasetRecord {
    pub fn new(
        id: String,
        gen_mode: GenKind,
        system: &System,
        lyapunov: Option<&Expr>,
        group_id: u64,
        seed: u64,
    ) -> Result<DatasetRecord, EncodeError> {
        Ok(DatasetRecord {
            schema: SCHEMA_VERSION,
            id,
            gen_mode,
            tag: None,
            n: system.dim(),
            system: EncodedSystem::new(system)?,
            lyapunov: lyapunov.map(EncodedExpr::new).transpose()?,
            is_barrier: false,
            group_id,
            seed,
            witness: None,
        })
    }

    /// Dedup key.
    pub fn key(&self) -> &str {
        &self.system.tokens
    }

    pub fn decode_system(&self) -> std::result::Result<System, String> {
        self.system.decode(self.n)
    }

    pub fn decode_lyapunov(&self) -> std::result::Result<Option<Expr>, String> {
        self.lyapunov.as_ref().map(|l| l.decode(self.n)).transpose()
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.schema != SCHEMA_VERSION {
            return Err(format!("schema {} is not {}", self.schema, SCHEMA_VERSION));
        }
        if self.n == 0 {
            return Err("empty system".into());
        }
        self.decode_system()?;
        self.decode_lyapunov()?;
        Ok(())
    }
}

/// One value per line; blank lines are skipped.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let f = File::open(path).map_err(PipelineError::io(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(PipelineError::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line).map_err(|source| PipelineError::Json {
            path: path.into(),
            line: i + 1,
            source,
        })?;
        out.push(v);
    }
    Ok(out)
}

/// Written to a sibling temporary file and renamed, so readers never see a partial file.
pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, items: impl IntoIterator<Item = &'a T>) -> Result<()> {
    write_atomic(path, |w| {
        for it in items {
            serde_json::to_writer(&mut *w, it).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::from)?;
        w.write_all(b"\n")
    })
}

fn write_atomic(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(PipelineError::io(dir))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let run = || -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        std::fs::rename(&tmp, path)
    };
    run().map_err(PipelineError::io(path))
}

/// Reads and validates every record.
pub fn read_records(path: &Path) -> Result<Vec<DatasetRecord>> {
    let recs: Vec<DatasetRecord> = read_jsonl(path)?;
    for (i, r) in recs.iter().enumerate() {
        r.validate().map_err(|message| PipelineError::Record {
            path: path.into(),
            line: i + 1,
            message,
        })?;
    }
    Ok(recs)
}

pub fn write_records(path: &Path, recs: &[DatasetRecord]) -> Result<()> {
    write_jsonl(path, recs)
}
