//! The endpoint pool: CSV ingestion, schema validation and quantiles.
//!
//! A zoo file has a fixed header: `id`, `model-id`, `model`, then the 34
//! observable attributes. The two name columns are parsed and kept for
//! operator display but never rendered for the agent. Row order is
//! authoritative: mask bit `m` always refers to source row `m`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

use thiserror::Error;

/// The bundled 25-endpoint table.
pub const BUNDLED_ZOO_CSV: &str = include_str!("../data/model_zoo.csv");

/// Columns that identify a model by name. Excluded from the agent view.
pub const NAME_COLUMNS: [&str; 2] = ["model-id", "model"];

const ID_COLUMN: &str = "id";

/// Value kind of a zoo attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttrKind {
    /// Integer score in `1..=5`.
    Score,
    /// `0`/`1` capability flag.
    Flag,
    /// USD per 1M tokens.
    Price,
    /// Token count with optional `k`/`M` suffix.
    Tokens,
    /// Knowledge cutoff, `YY-Mon`.
    Date,
    /// Rate-limit tier, tokens per minute with optional `k`/`M` suffix.
    TierRate,
}

impl AttrKind {
    pub fn is_numeric(self) -> bool {
        !matches!(self, AttrKind::Date)
    }
}

impl fmt::Display for AttrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AttrKind::Score => "score",
            AttrKind::Flag => "flag",
            AttrKind::Price => "price",
            AttrKind::Tokens => "token count",
            AttrKind::Date => "date",
            AttrKind::TierRate => "tier rate",
        };
        f.write_str(s)
    }
}

/// Attribute columns in source order.
pub const ZOO_SCHEMA: [(&str, AttrKind); 34] = [
    ("Intelligence", AttrKind::Score),
    ("Speed", AttrKind::Score),
    ("Text In", AttrKind::Flag),
    ("Image In", AttrKind::Flag),
    ("Voice In", AttrKind::Flag),
    ("Video In", AttrKind::Flag),
    ("Text Out", AttrKind::Flag),
    ("Image Out", AttrKind::Flag),
    ("Audio Out", AttrKind::Flag),
    ("Video Out", AttrKind::Flag),
    ("Reasoning", AttrKind::Flag),
    ("Input Price", AttrKind::Price),
    ("Cached Price", AttrKind::Price),
    ("Output Price", AttrKind::Price),
    ("Context Window", AttrKind::Tokens),
    ("Max Output", AttrKind::Tokens),
    ("Know. Cutoff", AttrKind::Date),
    ("Comp. Endpt", AttrKind::Flag),
    ("Resp. Endpt", AttrKind::Flag),
    ("Assist. Endpt", AttrKind::Flag),
    ("Batch Endpt", AttrKind::Flag),
    ("Fine-Tune Endpt", AttrKind::Flag),
    ("Streaming", AttrKind::Flag),
    ("Func. Calling", AttrKind::Flag),
    ("Struct. Output", AttrKind::Flag),
    ("Fine-Tuning", AttrKind::Flag),
    ("Distillation", AttrKind::Flag),
    ("Pred. Outputs", AttrKind::Flag),
    ("Rate Lim (Free)", AttrKind::TierRate),
    ("Rate Lim (T1)", AttrKind::TierRate),
    ("Rate Lim (T2)", AttrKind::TierRate),
    ("Rate Lim (T3)", AttrKind::TierRate),
    ("Rate Lim (T4)", AttrKind::TierRate),
    ("Rate Lim (T5)", AttrKind::TierRate),
];

#[derive(Debug, Error)]
pub enum ZooError {
    #[error("schema mismatch at column {index}: expected `{expected}`, found `{found}`")]
    Schema {
        index: usize,
        expected: String,
        found: String,
    },
    #[error("row {row}, column `{column}`: cannot parse `{cell}` as {kind}")]
    Parse {
        row: usize,
        column: String,
        cell: String,
        kind: String,
    },
    #[error("row {row}: {message}")]
    Invariant { row: usize, message: String },
    #[error("degenerate zoo: {0} endpoint(s), at least 2 required")]
    Degenerate(usize),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{0}` is not numeric")]
    NotNumeric(String),
    #[error("attribute `{0}` has no non-missing values")]
    InsufficientData(String),
    #[error("quantile fraction {0} is outside [0, 1]")]
    QuantileRange(f64),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One parsed cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttrValue {
    Score(u8),
    Flag(bool),
    Price(f64),
    Tokens(u64),
    Date { year: u16, month: u8 },
    Rate(u64),
    Missing,
}

impl AttrValue {
    /// Numeric view used by comparisons and quantiles. Dates and missing
    /// cells have none.
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            AttrValue::Score(s) => Some(f64::from(s)),
            AttrValue::Flag(b) => Some(if b { 1.0 } else { 0.0 }),
            AttrValue::Price(p) => Some(p),
            AttrValue::Tokens(n) | AttrValue::Rate(n) => Some(n as f64),
            AttrValue::Date { .. } | AttrValue::Missing => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, AttrValue::Missing)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub kind: AttrKind,
}

/// One row of the pool.
#[derive(Debug, Clone, PartialEq)]
pub struct Endpoint {
    /// 1-based row index.
    pub id: usize,
    pub model_id: String,
    pub name: String,
    values: Vec<AttrValue>,
    raw: Vec<String>,
}

impl Endpoint {
    /// Parsed value of the attribute at schema position `index`.
    pub fn value(&self, index: usize) -> AttrValue {
        self.values[index]
    }

    pub fn values(&self) -> &[AttrValue] {
        &self.values
    }

    /// Source text of the attribute cells, in schema order.
    pub fn raw_cells(&self) -> &[String] {
        &self.raw
    }
}

/// Lower quartile, median and upper quartile of one numeric column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartiles {
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Zoo {
    endpoints: Vec<Endpoint>,
    schema: Vec<Attribute>,
    quantile_cache: BTreeMap<String, Quartiles>,
    /// Sorted non-missing values per schema column; `None` for non-numeric.
    sorted_columns: Vec<Option<Vec<f64>>>,
}

/// Parses a zoo CSV stream.
pub fn load_zoo<R: Read>(source: R) -> Result<Zoo, ZooError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut records = reader.records();

    let header = match records.next() {
        Some(rec) => rec?,
        None => {
            return Err(ZooError::Schema {
                index: 0,
                expected: ID_COLUMN.to_string(),
                found: "<empty file>".to_string(),
            })
        }
    };
    check_header(&header)?;

    let mut endpoints = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 1;
        let rec = rec?;
        endpoints.push(parse_row(row, &rec)?);
    }
    Zoo::from_endpoints(endpoints)
}

/// Loads the bundled reference table.
pub fn bundled_zoo() -> Zoo {
    load_zoo(BUNDLED_ZOO_CSV.as_bytes()).expect("bundled zoo is valid")
}

fn expected_header() -> impl Iterator<Item = &'static str> {
    [ID_COLUMN]
        .into_iter()
        .chain(NAME_COLUMNS)
        .chain(ZOO_SCHEMA.iter().map(|(name, _)| *name))
}

fn check_header(header: &csv::StringRecord) -> Result<(), ZooError> {
    let expected: Vec<&str> = expected_header().collect();
    for (index, want) in expected.iter().enumerate() {
        let found = header.get(index).map(str::trim);
        if found != Some(*want) {
            return Err(ZooError::Schema {
                index,
                expected: want.to_string(),
                found: found.unwrap_or("<missing>").to_string(),
            });
        }
    }
    if let Some(extra) = header.get(expected.len()) {
        return Err(ZooError::Schema {
            index: expected.len(),
            expected: "<end of header>".to_string(),
            found: extra.to_string(),
        });
    }
    Ok(())
}

fn parse_row(row: usize, rec: &csv::StringRecord) -> Result<Endpoint, ZooError> {
    let width = 3 + ZOO_SCHEMA.len();
    if rec.len() != width {
        return Err(ZooError::Invariant {
            row,
            message: format!("expected {width} cells, found {}", rec.len()),
        });
    }
    let id_cell = rec[0].trim();
    let id: usize = id_cell.parse().map_err(|_| ZooError::Parse {
        row,
        column: ID_COLUMN.to_string(),
        cell: id_cell.to_string(),
        kind: "row id".to_string(),
    })?;
    if id != row {
        return Err(ZooError::Invariant {
            row,
            message: format!("id {id} out of sequence, expected {row}"),
        });
    }

    let mut values = Vec::with_capacity(ZOO_SCHEMA.len());
    let mut raw = Vec::with_capacity(ZOO_SCHEMA.len());
    for (k, (name, kind)) in ZOO_SCHEMA.iter().enumerate() {
        let cell = rec[3 + k].trim();
        let value = parse_cell(cell, *kind).ok_or_else(|| ZooError::Parse {
            row,
            column: name.to_string(),
            cell: cell.to_string(),
            kind: kind.to_string(),
        })?;
        values.push(value);
        raw.push(cell.to_string());
    }

    let endpoint = Endpoint {
        id,
        model_id: rec[1].trim().to_string(),
        name: rec[2].trim().to_string(),
        values,
        raw,
    };
    check_row_invariants(&endpoint)?;
    Ok(endpoint)
}

fn parse_cell(cell: &str, kind: AttrKind) -> Option<AttrValue> {
    if cell == "-" {
        return Some(AttrValue::Missing);
    }
    match kind {
        AttrKind::Score => match cell.parse::<u8>().ok()? {
            s @ 1..=5 => Some(AttrValue::Score(s)),
            _ => None,
        },
        AttrKind::Flag => match cell {
            "0" => Some(AttrValue::Flag(false)),
            "1" => Some(AttrValue::Flag(true)),
            _ => None,
        },
        AttrKind::Price => {
            let p: f64 = cell.parse().ok()?;
            (p.is_finite() && p >= 0.0).then_some(AttrValue::Price(p))
        }
        AttrKind::Tokens => parse_token_count(cell).map(AttrValue::Tokens),
        AttrKind::TierRate => parse_token_count(cell).map(AttrValue::Rate),
        AttrKind::Date => parse_cutoff(cell),
    }
}

/// `16k` → 16 000, `1M` → 1 000 000, `4096` → 4096.
pub fn parse_token_count(cell: &str) -> Option<u64> {
    let (digits, multiplier) = match cell.as_bytes().last()? {
        b'k' => (&cell[..cell.len() - 1], 1_000),
        b'M' => (&cell[..cell.len() - 1], 1_000_000),
        _ => (cell, 1),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse::<u64>().ok()?.checked_mul(multiplier)
}

const MONTHS: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

fn parse_cutoff(cell: &str) -> Option<AttrValue> {
    let (yy, mon) = cell.split_once('-')?;
    if yy.len() != 2 {
        return None;
    }
    let yy: u16 = yy.parse().ok()?;
    let month = MONTHS.iter().position(|m| *m == mon)? as u8 + 1;
    Some(AttrValue::Date {
        year: 2000 + yy,
        month,
    })
}

fn check_row_invariants(ep: &Endpoint) -> Result<(), ZooError> {
    let ctx = column_index("Context Window").and_then(|i| ep.values[i].as_f64());
    let max_out = column_index("Max Output").and_then(|i| ep.values[i].as_f64());
    if let Some(out) = max_out {
        if out <= 0.0 {
            return Err(ZooError::Invariant {
                row: ep.id,
                message: "Max Output must be positive".to_string(),
            });
        }
        if let Some(ctx) = ctx {
            if ctx < out {
                return Err(ZooError::Invariant {
                    row: ep.id,
                    message: format!("Context Window {ctx} is smaller than Max Output {out}"),
                });
            }
        }
    }
    Ok(())
}

fn column_index(name: &str) -> Option<usize> {
    ZOO_SCHEMA.iter().position(|(n, _)| *n == name)
}

/// Nearest-rank quantile: the `ceil(q * n)`-th order statistic of `sorted`
/// (1-based, clamped to the first element at `q = 0`).
pub fn nearest_rank(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let n = sorted.len();
    // The slack absorbs products like 0.3 * 10 = 3.0000000000000004.
    let rank = ((q * n as f64) - 1e-9).ceil().max(1.0) as usize;
    Some(sorted[rank.min(n) - 1])
}

impl Zoo {
    /// Builds a zoo from parsed rows, validating ids and populating the
    /// quantile cache.
    pub fn from_endpoints(endpoints: Vec<Endpoint>) -> Result<Zoo, ZooError> {
        if endpoints.len() < 2 {
            return Err(ZooError::Degenerate(endpoints.len()));
        }
        for (i, ep) in endpoints.iter().enumerate() {
            if ep.id != i + 1 {
                return Err(ZooError::Invariant {
                    row: i + 1,
                    message: format!("id {} out of sequence", ep.id),
                });
            }
        }
        let schema = ZOO_SCHEMA
            .iter()
            .map(|(name, kind)| Attribute {
                name: name.to_string(),
                kind: *kind,
            })
            .collect();
        let mut zoo = Zoo {
            endpoints,
            schema,
            quantile_cache: BTreeMap::new(),
            sorted_columns: Vec::new(),
        };
        zoo.rebuild_cache();
        Ok(zoo)
    }

    /// Recomputes the sorted columns and quartiles from the endpoint rows.
    pub fn rebuild_cache(&mut self) {
        self.sorted_columns = self
            .schema
            .iter()
            .enumerate()
            .map(|(k, attr)| {
                attr.kind.is_numeric().then(|| {
                    let mut col: Vec<f64> = self
                        .endpoints
                        .iter()
                        .filter_map(|ep| ep.values[k].as_f64())
                        .collect();
                    col.sort_by(f64::total_cmp);
                    col
                })
            })
            .collect();
        self.quantile_cache = self
            .schema
            .iter()
            .zip(&self.sorted_columns)
            .filter_map(|(attr, col)| {
                let col = col.as_deref()?;
                Some((
                    attr.name.clone(),
                    Quartiles {
                        q25: nearest_rank(col, 0.25)?,
                        median: nearest_rank(col, 0.5)?,
                        q75: nearest_rank(col, 0.75)?,
                    },
                ))
            })
            .collect();
    }

    pub fn len(&self) -> usize {
        self.endpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.endpoints.is_empty()
    }

    pub fn endpoints(&self) -> &[Endpoint] {
        &self.endpoints
    }

    /// Endpoint by 1-based id.
    pub fn endpoint(&self, id: usize) -> Option<&Endpoint> {
        id.checked_sub(1).and_then(|i| self.endpoints.get(i))
    }

    /// Looks an endpoint up by id, model name or model id (case-insensitive).
    pub fn find(&self, needle: &str) -> Option<&Endpoint> {
        if let Ok(id) = needle.trim().parse::<usize>() {
            return self.endpoint(id);
        }
        let needle = needle.trim().to_lowercase();
        self.endpoints
            .iter()
            .find(|ep| ep.name.to_lowercase() == needle || ep.model_id.to_lowercase() == needle)
    }

    pub fn schema(&self) -> &[Attribute] {
        &self.schema
    }

    pub fn attr_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|a| a.name == name)
    }

    pub fn quantile_cache(&self) -> &BTreeMap<String, Quartiles> {
        &self.quantile_cache
    }

    /// Value of `attr` for `endpoint`, or `None` if the attribute is unknown.
    pub fn value(&self, endpoint: &Endpoint, attr: &str) -> Option<AttrValue> {
        self.attr_index(attr).map(|k| endpoint.values[k])
    }

    fn numeric_column(&self, attr: &str) -> Result<&[f64], ZooError> {
        let k = self
            .attr_index(attr)
            .ok_or_else(|| ZooError::UnknownAttribute(attr.to_string()))?;
        let col = self.sorted_columns[k]
            .as_deref()
            .ok_or_else(|| ZooError::NotNumeric(attr.to_string()))?;
        if col.is_empty() {
            return Err(ZooError::InsufficientData(attr.to_string()));
        }
        Ok(col)
    }

    /// Nearest-rank `q`-quantile of `attr` over non-missing values.
    pub fn attribute_quantile(&self, attr: &str, q: f64) -> Result<f64, ZooError> {
        if !(0.0..=1.0).contains(&q) {
            return Err(ZooError::QuantileRange(q));
        }
        let col = self.numeric_column(attr)?;
        Ok(nearest_rank(col, q).expect("non-empty column, q in range"))
    }

    /// CSV text without the name columns, as shown to a routing agent.
    pub fn render_for_agent(&self) -> String {
        self.render(false)
    }

    /// CSV text of the full table, name columns included.
    pub fn to_csv(&self) -> String {
        self.render(true)
    }

    /// One endpoint's agent-view row, without header or trailing newline.
    pub fn render_row(&self, endpoint: &Endpoint) -> String {
        let mut w = csv_writer();
        w.write_record(agent_row(endpoint)).expect("in-memory write");
        let mut s = finish(w);
        s.truncate(s.trim_end_matches('\n').len());
        s
    }

    fn render(&self, with_names: bool) -> String {
        let mut w = csv_writer();
        let header: Vec<&str> = expected_header()
            .filter(|c| with_names || !NAME_COLUMNS.contains(c))
            .collect();
        w.write_record(&header).expect("in-memory write");
        for ep in &self.endpoints {
            if with_names {
                let mut cells = vec![ep.id.to_string(), ep.model_id.clone(), ep.name.clone()];
                cells.extend(ep.raw.iter().cloned());
                w.write_record(&cells).expect("in-memory write");
            } else {
                w.write_record(agent_row(ep)).expect("in-memory write");
            }
        }
        finish(w)
    }
}

fn agent_row(ep: &Endpoint) -> Vec<String> {
    std::iter::once(ep.id.to_string())
        .chain(ep.raw.iter().cloned())
        .collect()
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input cells")
}
