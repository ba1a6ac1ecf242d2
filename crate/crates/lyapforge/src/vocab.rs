//! Vocabulary file shared with the trainer. Token ids are line positions in `tokens`.

use lyapforge_core::tokenizer::{vocabulary, Token};
use serde::{Deserialize, Serialize};

use crate::record::SCHEMA_VERSION;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocab {
    pub schema: u32,
    pub tokens: Vec<String>,
    pub pad: usize,
    pub bos: usize,
    pub eos: usize,
    pub unk: usize,
    pub sep: usize,
}

pub fn vocab() -> Vocab {
    let toks = vocabulary();
    let id = |t: Token| toks.iter().position(|x| *x == t).expect("special tokens are in the vocabulary");
    Vocab {
        schema: SCHEMA_VERSION,
        tokens: toks.iter().map(|t| t.name()).collect(),
        pad: id(Token::Pad),
        bos: id(Token::Bos),
        eos: id(Token::Eos),
        unk: id(Token::Unk),
        sep: id(Token::Sep),
    }
}

/// Byte-stable JSON text of the vocabulary.
pub fn vocab_json() -> String {
    let mut s = serde_json::to_string_pretty(&vocab()).expect("vocabulary serializes");
    s.push('\n');
    s
}
