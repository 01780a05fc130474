//! Class tables, LFPE censuses and group counts,
//! as CSV or aligned text.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::ff::{FieldCtx, UniPoly};
use crate::lfpe::Census;
pub use crate::lfpe::CensusCount;
use crate::orbits::{count_groups, ClassPartition, LinearClass};
use crate::polymap::{format_map, PolyMap};
use crate::scan::{signature_depth, Record};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("unknown format `{0}`")]
    UnknownFormat(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableId {
    T1Classes,
    F2Deg3Classes,
    F2Lfpe,
    F3Lfpe,
    Counts,
}

impl TableId {
    pub const ALL: [TableId; 5] = [TableId::T1Classes, TableId::F2Deg3Classes, TableId::F2Lfpe, TableId::F3Lfpe, TableId::Counts];

    pub fn name(self) -> &'static str {
        match self {
            TableId::T1Classes => "T1-classes",
            TableId::F2Deg3Classes => "F2-deg3-classes",
            TableId::F2Lfpe => "F2-lfpe",
            TableId::F3Lfpe => "F3-lfpe",
            TableId::Counts => "counts",
        }
    }
}

impl FromStr for TableId {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TableId::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| ReportError::UnknownTable(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            _ => Err(ReportError::UnknownFormat(s.into())),
        }
    }
}

pub const SIGNATURE_COLUMNS: u32 = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassRow {
    pub class_id: usize,
    pub representative: String,
    pub size: u64,
    pub is_automorphism: bool,
    /// Bit `r - 1` set when bijective over the degree-`r` extension.
    pub signature: u32,
    /// Extension degrees `1..=signature_known` were tested.
    pub signature_known: u32,
    pub dependence: bool,
}

impl ClassRow {
    fn sort_key(&self) -> (bool, std::cmp::Reverse<u32>, bool, usize) {
        (!self.is_automorphism, std::cmp::Reverse(self.signature), !self.dependence, self.class_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTable {
    /// Characteristic of the base field, used to name extensions.
    pub p: u32,
    pub r: u32,
    pub rows: Vec<ClassRow>,
}

impl ClassTable {
    /// Linear-conjugation classes of scan records; class flags are read from
    /// the first member, since every flag is a conjugation invariant.
    pub fn from_linear_classes(field: &FieldCtx, classes: &[LinearClass], records: &[Record]) -> Self {
        let depth = signature_depth(field, 3);
        let rows = classes
            .iter()
            .map(|c| {
                let rec = &records[c.members[0]];
                ClassRow {
                    class_id: 0,
                    representative: format_map(&c.representative),
                    size: c.size() as u64,
                    is_automorphism: rec.is_automorphism(),
                    signature: rec.signature(),
                    signature_known: if rec.is_automorphism() { SIGNATURE_COLUMNS } else { depth },
                    dependence: rec.dependence(),
                }
            })
            .collect();
        Self::numbered(field, rows)
    }

    /// Classes of a closure partition, in the partition's own order.
    pub fn from_partition(field: &FieldCtx, part: &ClassPartition) -> Self {
        let known = part.stages.first().map_or(0, |s| s.sig_rmax).min(SIGNATURE_COLUMNS);
        let rows = part
            .classes
            .iter()
            .map(|c| ClassRow {
                class_id: 0,
                representative: format_map(&c.representative),
                size: c.size() as u64,
                is_automorphism: c.invariants.automorphism,
                signature: c.invariants.signature & ((1 << known) - 1),
                signature_known: known,
                dependence: c.dependence,
            })
            .collect();
        Self::numbered(field, rows)
    }

    fn numbered(field: &FieldCtx, mut rows: Vec<ClassRow>) -> Self {
        // Input order breaks ties, so number first and then sort.
        for (i, r) in rows.iter_mut().enumerate() {
            r.class_id = i + 1;
        }
        rows.sort_by_key(ClassRow::sort_key);
        for (i, r) in rows.iter_mut().enumerate() {
            r.class_id = i + 1;
        }
        Self { p: field.p(), r: field.r(), rows }
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.size).sum()
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.size).collect()
    }

    /// Reads a classes CSV; columns are located by header name and any
    /// extra columns are ignored.
    pub fn from_csv(text: &str, p: u32, r: u32) -> Result<Self, ReportError> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let headers = rd.headers()?.clone();
        let col = |name: &str| {
            headers.iter().position(|h| h == name).ok_or_else(|| ReportError::MissingInput(format!("column `{name}`")))
        };
        let (id, rep, size, auto, dep) = (col("class_id")?, col("representative")?, col("size")?, col("is_automorphism")?, col("dependence")?);
        let sig: Vec<usize> = (1..=SIGNATURE_COLUMNS).filter_map(|r| col(&format!("signature_r{r}")).ok()).collect();
        let bad = |what: &str, v: &str| ReportError::Inconsistent(format!("bad {what} `{v}`"));
        let flag = |v: &str| match v {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(bad("flag", v)),
        };
        let maybe = |v: &str| if v.is_empty() { Ok(None) } else { flag(v).map(Some) };
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let (mut signature, mut signature_known) = (0, 0);
            for (bit, &c) in sig.iter().enumerate() {
                match maybe(&rec[c])? {
                    None => break,
                    Some(b) => {
                        signature |= u32::from(b) << bit;
                        signature_known = bit as u32 + 1;
                    }
                }
            }
            rows.push(ClassRow {
                class_id: rec[id].parse().map_err(|_| bad("class id", &rec[id]))?,
                representative: rec[rep].to_string(),
                size: rec[size].parse().map_err(|_| bad("size", &rec[size]))?,
                is_automorphism: flag(&rec[auto])?,
                signature,
                signature_known,
                dependence: flag(&rec[dep])?,
            });
        }
        rows.sort_by_key(ClassRow::sort_key);
        Ok(Self { p, r, rows })
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["class_id".to_string(), "representative".into(), "size".into(), "is_automorphism".into()];
        header.extend((1..=SIGNATURE_COLUMNS).map(|r| format!("signature_r{r}")));
        header.push("dependence".into());
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec =
                vec![r.class_id.to_string(), r.representative.clone(), r.size.to_string(), bit(r.is_automorphism)];
            rec.extend(
                (0..SIGNATURE_COLUMNS).map(|k| if k < r.signature_known { bit(r.signature >> k & 1 == 1) } else { String::new() }),
            );
            rec.push(bit(r.dependence));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
    }

    /// `all` or the list of fields `F_{p^{r k}}` over which the map is
    /// bijective, among the tested extension degrees.
    pub fn bijection_over(&self, row: &ClassRow) -> String {
        let known = row.signature_known;
        if known == SIGNATURE_COLUMNS && row.signature == (1 << SIGNATURE_COLUMNS) - 1 {
            return "all".into();
        }
        let fields: Vec<String> = (1..=known)
            .filter(|k| row.signature >> (k - 1) & 1 == 1)
            .map(|k| format!("F_{}", (self.p as u64).pow(self.r * k)))
            .collect();
        let mut s = if fields.is_empty() { "none".into() } else { fields.join(",") };
        if known < SIGNATURE_COLUMNS {
            let _ = write!(s, " (r<={known} tested)");
        }
        s
    }

    pub fn to_text(&self) -> String {
        let head = ["#", "Representative", "Bijection over", "Size", "Auto", "Dep"];
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.class_id.to_string(),
                    r.representative.clone(),
                    self.bijection_over(r),
                    r.size.to_string(),
                    yes_no(r.is_automorphism),
                    yes_no(r.dependence),
                ]
            })
            .collect();
        let mut out = aligned(&head, &body, &[false, false, false, true, false, false]);
        let _ = writeln!(out, "total {}", self.total());
        out
    }

    pub fn render(&self, fmt: Format) -> String {
        match fmt {
            Format::Csv => self.to_csv(),
            Format::Text => self.to_text(),
        }
    }
}

fn bit(b: bool) -> String {
    u8::from(b).to_string()
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.into()
}

/// Columns padded to their widest cell; numeric columns right-aligned.
fn aligned(head: &[&str], body: &[Vec<String>], right: &[bool]) -> String {
    let mut width: Vec<usize> = head.iter().map(|h| h.chars().count()).collect();
    for row in body {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate() {
            let pad = width[i] - c.chars().count();
            if i > 0 {
                s.push_str(" | ");
            }
            if right[i] {
                s.push_str(&" ".repeat(pad));
                s.push_str(c);
            } else {
                s.push_str(c);
                s.push_str(&" ".repeat(pad));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(&head.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    out.push_str(&"-".repeat(width.iter().sum::<usize>() + 3 * (width.len() - 1)));
    out.push('\n');
    for row in body {
        out.push_str(&line(row));
    }
    out
}

/// Minimal polynomial as an operator relation, e.g. `F^2+2I`.
pub fn operator_poly(m: &UniPoly) -> String {
    let mut s = String::new();
    for (k, &c) in m.coeffs().iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        if !s.is_empty() {
            s.push('+');
        }
        if c != 1 {
            let _ = write!(s, "{c}");
        }
        match k {
            0 => s.push('I'),
            1 => s.push('F'),
            _ => {
                let _ = write!(s, "F^{k}");
            }
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfpeRow {
    pub min_poly: String,
    pub order: u64,
    pub class_count: u64,
    pub example: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfpeTable {
    pub rows: Vec<LfpeRow>,
}

pub const LFPE_CSV_HEADER: [&str; 4] = ["min_poly", "order", "class_count", "example"];

impl LfpeTable {
    pub fn from_census(census: &Census) -> Self {
        let rows = census
            .rows
            .iter()
            .map(|r| LfpeRow {
                min_poly: r.min_poly_text(),
                order: r.order,
                class_count: r.class_count(census.count),
                example: format_map(&r.example),
            })
            .collect();
        Self { rows }
    }

    pub fn from_csv(text: &str) -> Result<Self, ReportError> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        if rd.headers()?.iter().ne(LFPE_CSV_HEADER) {
            return Err(ReportError::Inconsistent("census header".into()));
        }
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let num = |i: usize| rec[i].parse::<u64>().map_err(|_| ReportError::Inconsistent(format!("bad number `{}`", &rec[i])));
            rows.push(LfpeRow { min_poly: rec[0].into(), order: num(1)?, class_count: num(2)?, example: rec[3].into() });
        }
        Ok(Self { rows })
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.class_count).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(LFPE_CSV_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([r.min_poly.clone(), r.order.to_string(), r.class_count.to_string(), r.example.clone()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
    }

    pub fn to_text(&self) -> String {
        let head = ["Minimum polynomial", "t", "#", "Example"];
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let poly = parse_t_poly(&r.min_poly).map(|m| operator_poly(&m)).unwrap_or_else(|| r.min_poly.clone());
                vec![poly, r.order.to_string(), r.class_count.to_string(), r.example.clone()]
            })
            .collect();
        let mut out = aligned(&head, &body, &[false, true, true, false]);
        let _ = writeln!(out, "total {} in {} rows", self.total(), self.rows.len());
        out
    }

    pub fn render(&self, fmt: Format) -> String {
        match fmt {
            Format::Csv => self.to_csv(),
            Format::Text => self.to_text(),
        }
    }
}

/// Parses the `T^3+T^2+2T+2` notation back into a polynomial.
pub fn parse_t_poly(text: &str) -> Option<UniPoly> {
    let mut coeffs = Vec::new();
    for term in text.split('+') {
        let (c, k) = match term.find('T') {
            None => (term.parse().ok()?, 0usize),
            Some(i) => {
                let c = if i == 0 { 1 } else { term[..i].parse().ok()? };
                let rest = &term[i + 1..];
                let k = if rest.is_empty() { 1 } else { rest.strip_prefix('^')?.parse().ok()? };
                (c, k)
            }
        };
        if coeffs.len() <= k {
            coeffs.resize(k + 1, 0);
        }
        coeffs[k] = c;
    }
    Some(UniPoly::new(coeffs))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsRow {
    pub q: u64,
    pub n: u32,
    pub linear: u128,
    pub affine: u128,
    /// `None` when no automorphism list was supplied for this field.
    pub identity_affine_autos: Option<u64>,
}

impl CountsRow {
    pub fn new(q: u64, n: u32, identity_affine_autos: Option<u64>) -> Self {
        let (linear, affine) = count_groups(q, n);
        Self { q, n, linear, affine, identity_affine_autos }
    }

    pub fn total_autos(&self) -> Option<u128> {
        self.identity_affine_autos.map(|a| a as u128 * self.affine)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsTable {
    pub rows: Vec<CountsRow>,
}

impl CountsTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["q", "n", "linear", "affine", "identity_affine_autos", "total_autos"]).expect("in-memory write");
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.q.to_string(),
                r.n.to_string(),
                r.linear.to_string(),
                r.affine.to_string(),
                opt(r.identity_affine_autos.map(|v| v.to_string())),
                opt(r.total_autos().map(|v| v.to_string())),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
    }

    pub fn to_text(&self) -> String {
        let head = ["q", "n", "linear", "affine", "id-affine autos", "total autos"];
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.q.to_string(),
                    r.n.to_string(),
                    r.linear.to_string(),
                    r.affine.to_string(),
                    r.identity_affine_autos.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
                    r.total_autos().map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
                ]
            })
            .collect();
        aligned(&head, &body, &[true; 6])
    }

    pub fn render(&self, fmt: Format) -> String {
        match fmt {
            Format::Csv => self.to_csv(),
            Format::Text => self.to_text(),
        }
    }
}

/// Identity-affine automorphism count of a list of scan records.
pub fn automorphism_count(records: &[Record]) -> u64 {
    records.iter().filter(|r| r.is_automorphism()).count() as u64
}

/// Representative texts of a table, parsed back over `field`.
pub fn representatives(table: &ClassTable, field: &std::sync::Arc<FieldCtx>) -> Result<Vec<PolyMap>, ReportError> {
    table
        .rows
        .iter()
        .map(|r| crate::polymap::parse_map(&r.representative, field).map_err(|e| ReportError::Inconsistent(e.to_string())))
        .collect()
}
