//! Seeded generator for the scalable Wisconsin benchmark relation.
//!
//! `unique1` is a random permutation of `0..n`, `unique2` is the record
//! ordinal, and every other attribute is derived from those two:
//!
//! | field | value |
//! |---|---|
//! | two, four, ten, twenty | unique1 mod 2, 4, 10, 20 |
//! | onePercent, tenPercent, twentyPercent, fiftyPercent | unique1 mod 100, 10, 5, 2 |
//! | evenOnePercent, oddOnePercent | 2·onePercent, 2·onePercent + 1 |
//! | unique3 | unique1 |
//! | stringu1, stringu2 | 7 base-26 letters of unique1 / unique2, then `x` filler |
//! | string4 | AAAA, HHHH, OOOO, VVVV cycling with unique2, then `x` filler |

mod permute;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::ast::DatasetRef;
use crate::dialect::{DdlRequest, FieldDecl, FieldType};

pub use permute::{permutation, KeyedPermutation};

/// Attribute names in declaration order.
pub const FIELD_NAMES: [&str; 16] = [
    "unique1",
    "unique2",
    "unique3",
    "two",
    "four",
    "ten",
    "twenty",
    "onePercent",
    "tenPercent",
    "twentyPercent",
    "fiftyPercent",
    "evenOnePercent",
    "oddOnePercent",
    "stringu1",
    "stringu2",
    "string4",
];

/// Name of the optional filler field added by `pad_bytes`.
pub const PAD_FIELD: &str = "padding";

pub const DEFAULT_STRING_LENGTH: usize = 52;
const CODE_LETTERS: usize = 7;
const STRING4_CYCLE: [char; 4] = ['A', 'H', 'O', 'V'];
/// 26^7 distinct codes.
pub const MAX_RECORDS: u64 = 8_031_810_176;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("record count must be at least 1")]
    ZeroRecords,
    #[error("record count {0} exceeds the {MAX_RECORDS} distinct string codes")]
    TooManyRecords(u64),
    #[error("string length must be at least {CODE_LETTERS}, got {0}")]
    StringTooShort(usize),
    #[error("{field} = {value} is outside 0..{n}")]
    OutOfRange {
        field: &'static str,
        value: u64,
        n: u64,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" | "jsonl" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?} (expected json or csv)")),
        }
    }
}

/// How `unique1` values are scattered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PermutationKind {
    /// Seeded Fisher-Yates shuffle; O(n) memory.
    #[default]
    Shuffle,
    /// Keyed Feistel bijection evaluated per record; O(1) memory.
    Keyed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub records: u64,
    pub seed: u64,
    pub format: Format,
    pub string_length: usize,
    /// Length of an extra filler field; 0 omits the field.
    pub pad_bytes: usize,
    pub permutation: PermutationKind,
}

impl GenConfig {
    pub fn new(records: u64, seed: u64) -> Self {
        Self {
            records,
            seed,
            format: Format::Json,
            string_length: DEFAULT_STRING_LENGTH,
            pad_bytes: 0,
            permutation: PermutationKind::Shuffle,
        }
    }

    pub fn with_format(mut self, format: Format) -> Self {
        self.format = format;
        self
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.records == 0 {
            return Err(GenError::ZeroRecords);
        }
        if self.records > MAX_RECORDS {
            return Err(GenError::TooManyRecords(self.records));
        }
        if self.string_length < CODE_LETTERS {
            return Err(GenError::StringTooShort(self.string_length));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WisconsinRecord {
    pub unique1: i64,
    pub unique2: i64,
    pub unique3: i64,
    pub two: i64,
    pub four: i64,
    pub ten: i64,
    pub twenty: i64,
    pub one_percent: i64,
    pub ten_percent: i64,
    pub twenty_percent: i64,
    pub fifty_percent: i64,
    pub even_one_percent: i64,
    pub odd_one_percent: i64,
    pub stringu1: String,
    pub stringu2: String,
    pub string4: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub padding: Option<String>,
}

impl WisconsinRecord {
    /// Cell values in [`FIELD_NAMES`] order, then the padding if present.
    pub fn cells(&self) -> Vec<String> {
        let mut out: Vec<String> = [
            self.unique1,
            self.unique2,
            self.unique3,
            self.two,
            self.four,
            self.ten,
            self.twenty,
            self.one_percent,
            self.ten_percent,
            self.twenty_percent,
            self.fifty_percent,
            self.even_one_percent,
            self.odd_one_percent,
        ]
        .iter()
        .map(i64::to_string)
        .collect();
        out.push(self.stringu1.clone());
        out.push(self.stringu2.clone());
        out.push(self.string4.clone());
        if let Some(p) = &self.padding {
            out.push(p.clone());
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("record serializes")
    }
}

/// Seven base-26 letters (most significant first, `A` = 0) followed by `x`
/// up to `len` characters.
pub fn encode_stringu(k: u64, len: usize) -> String {
    let mut code = [b'A'; CODE_LETTERS];
    let mut rest = k;
    for slot in code.iter_mut().rev() {
        *slot = b'A' + (rest % 26) as u8;
        rest /= 26;
    }
    let mut s = String::with_capacity(len.max(CODE_LETTERS));
    s.extend(code.iter().map(|b| *b as char));
    s.extend(std::iter::repeat_n('x', len.saturating_sub(CODE_LETTERS)));
    s
}

/// Inverse of [`encode_stringu`]; `None` for strings it cannot produce.
pub fn decode_stringu(s: &str) -> Option<u64> {
    let bytes = s.as_bytes();
    if bytes.len() < CODE_LETTERS || !bytes[CODE_LETTERS..].iter().all(|b| *b == b'x') {
        return None;
    }
    bytes[..CODE_LETTERS].iter().try_fold(0u64, |acc, b| {
        b.is_ascii_uppercase().then(|| acc * 26 + u64::from(b - b'A'))
    })
}

pub fn string4(unique2: u64, len: usize) -> String {
    let c = STRING4_CYCLE[(unique2 % 4) as usize];
    let mut s: String = std::iter::repeat_n(c, 4).collect();
    s.extend(std::iter::repeat_n('x', len.saturating_sub(4)));
    s
}

/// Builds one record from its two independent attributes.
pub fn derive_fields(unique1: u64, unique2: u64, n: u64, string_length: usize) -> Result<WisconsinRecord, GenError> {
    for (field, value) in [("unique1", unique1), ("unique2", unique2)] {
        if value >= n {
            return Err(GenError::OutOfRange { field, value, n });
        }
    }
    if string_length < CODE_LETTERS {
        return Err(GenError::StringTooShort(string_length));
    }
    let u1 = unique1 as i64;
    let one_percent = u1 % 100;
    Ok(WisconsinRecord {
        unique1: u1,
        unique2: unique2 as i64,
        unique3: u1,
        two: u1 % 2,
        four: u1 % 4,
        ten: u1 % 10,
        twenty: u1 % 20,
        one_percent,
        ten_percent: u1 % 10,
        twenty_percent: u1 % 5,
        fifty_percent: u1 % 2,
        even_one_percent: one_percent * 2,
        odd_one_percent: one_percent * 2 + 1,
        stringu1: encode_stringu(unique1, string_length),
        stringu2: encode_stringu(unique2, string_length),
        string4: string4(unique2, string_length),
        padding: None,
    })
}

/// Records in file order (`unique2` = 0, 1, ...).
pub fn records(config: &GenConfig) -> Result<impl Iterator<Item = WisconsinRecord>, GenError> {
    config.validate()?;
    let n = config.records;
    let source: Box<dyn Iterator<Item = u64>> = match config.permutation {
        PermutationKind::Shuffle => Box::new(permutation(n, config.seed).into_iter()),
        PermutationKind::Keyed => {
            let p = KeyedPermutation::new(n, config.seed);
            Box::new((0..n).map(move |i| p.apply(i)))
        }
    };
    let len = config.string_length;
    let pad = (config.pad_bytes > 0).then(|| "x".repeat(config.pad_bytes));
    Ok(source.enumerate().map(move |(i, u1)| {
        let mut r = derive_fields(u1, i as u64, n, len).expect("validated config yields in-range values");
        r.padding = pad.clone();
        r
    }))
}

/// What [`generate`] wrote.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSummary {
    pub records_written: u64,
    pub bytes: u64,
}

struct Counting<W> {
    inner: W,
    bytes: u64,
}

impl<W: Write> Write for Counting<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.bytes += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Writes the relation as JSON lines or CSV (with header) to `out`.
pub fn write_records<W: Write>(config: &GenConfig, out: W) -> Result<GenSummary, GenError> {
    let rows = records(config)?;
    let mut sink = Counting { inner: out, bytes: 0 };
    let mut written = 0u64;
    match config.format {
        Format::Json => {
            for r in rows {
                serde_json::to_writer(&mut sink, &r).map_err(io::Error::from)?;
                sink.write_all(b"\n")?;
                written += 1;
            }
            sink.flush()?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut sink);
            let mut header: Vec<&str> = FIELD_NAMES.to_vec();
            if config.pad_bytes > 0 {
                header.push(PAD_FIELD);
            }
            w.write_record(&header)?;
            for r in rows {
                w.write_record(r.cells())?;
                written += 1;
            }
            w.flush()?;
        }
    }
    Ok(GenSummary {
        records_written: written,
        bytes: sink.bytes,
    })
}

/// Writes the relation to `path`.
pub fn generate(config: &GenConfig, path: &Path) -> Result<GenSummary, GenError> {
    config.validate()?;
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    let summary = write_records(config, &mut out)?;
    out.flush()?;
    Ok(summary)
}

/// `CREATE TYPE <name> AS CLOSED {...}` declaring all sixteen attributes.
pub fn closed_type(name: &str) -> DdlRequest {
    let fields = FIELD_NAMES
        .iter()
        .map(|f| {
            let ty = if f.starts_with("string") {
                FieldType::String
            } else {
                FieldType::Int64
            };
            FieldDecl::new(*f, ty)
        })
        .collect();
    DdlRequest::create_type(name, fields, false)
}

/// `CREATE DATASET <dataset>(<type>) PRIMARY KEY unique2`, optionally with
/// snappy block compression.
pub fn keyed_dataset(dataset: DatasetRef, type_name: &str, compressed: bool) -> DdlRequest {
    let mut storage_options = std::collections::BTreeMap::new();
    if compressed {
        storage_options.insert(
            "storage-block-compression".to_owned(),
            serde_json::json!({"scheme": "snappy"}),
        );
    }
    DdlRequest::CreateDataset {
        dataset,
        type_name: type_name.to_owned(),
        primary_key: "unique2".to_owned(),
        storage_options,
    }
}
