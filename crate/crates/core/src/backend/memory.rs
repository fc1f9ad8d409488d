//! In-memory catalog and naive plan executor: the correctness oracle.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, RwLock};
use std::time::Instant;

use serde_json::{Map, Value};

use crate::ast::{AggArg, AggFn, Expr, LogicalPlan, PlanNode, SortOrder};
use crate::dialect::parse::{parse_statement, Statement};
use crate::dialect::{DdlRequest, FieldDecl};

use super::eval::{total_cmp, values_equal, EvalContext, Udf};
use super::{Backend, BackendError, ExecError, QueryResult, Request};

/// Behaviour switches for a [`MemoryCatalog`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogOptions {
    /// Create undeclared datasets on first load or insert.
    pub auto_create: bool,
    /// Treat references to absent fields as errors instead of null.
    pub strict_fields: bool,
}

impl Default for CatalogOptions {
    fn default() -> Self {
        Self {
            auto_create: true,
            strict_fields: false,
        }
    }
}

#[derive(Debug, Clone)]
struct TypeDecl {
    fields: Vec<FieldDecl>,
    open: bool,
}

#[derive(Debug, Clone, Default)]
struct Dataset {
    type_name: Option<String>,
    primary_key: Option<String>,
    records: Vec<Map<String, Value>>,
    keys: BTreeSet<String>,
}

#[derive(Default)]
struct State {
    types: BTreeMap<String, TypeDecl>,
    datasets: BTreeMap<String, Dataset>,
    /// (dataset, field) pairs with an index; `None` field = primary index.
    indexes: BTreeSet<(String, Option<String>)>,
}

/// Named datasets of JSON records plus the DDL state needed to accept the
/// statements the dialects emit. Writes are serialized; reads run
/// concurrently between writes.
pub struct MemoryCatalog {
    state: RwLock<State>,
    udfs: RwLock<BTreeMap<String, Udf>>,
    options: CatalogOptions,
}

impl Default for MemoryCatalog {
    fn default() -> Self {
        Self::new(CatalogOptions::default())
    }
}

impl std::fmt::Debug for MemoryCatalog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MemoryCatalog")
            .field("datasets", &self.dataset_names())
            .field("options", &self.options)
            .finish()
    }
}

impl MemoryCatalog {
    pub fn new(options: CatalogOptions) -> Self {
        Self {
            state: RwLock::default(),
            udfs: RwLock::default(),
            options,
        }
    }

    pub fn options(&self) -> CatalogOptions {
        self.options
    }

    /// Registers a scalar function callable from queries.
    pub fn register_function(
        &self,
        name: &str,
        f: impl Fn(&[Value]) -> Result<Value, String> + Send + Sync + 'static,
    ) {
        self.udfs
            .write()
            .expect("udf registry poisoned")
            .insert(name.to_ascii_lowercase(), Arc::new(f));
    }

    pub fn dataset_names(&self) -> Vec<String> {
        self.read().datasets.keys().cloned().collect()
    }

    pub fn contains(&self, dataset: &str) -> bool {
        self.read().datasets.contains_key(dataset)
    }

    pub fn has_index(&self, dataset: &str, field: Option<&str>) -> bool {
        self.read()
            .indexes
            .contains(&(dataset.to_owned(), field.map(str::to_owned)))
    }

    /// Stored records of a dataset, in insertion order.
    pub fn records(&self, dataset: &str) -> Result<Vec<Value>, ExecError> {
        let state = self.read();
        let ds = state
            .datasets
            .get(dataset)
            .ok_or_else(|| ExecError::MissingDataset(dataset.to_owned()))?;
        Ok(ds.records.iter().cloned().map(Value::Object).collect())
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, State> {
        self.state.read().expect("catalog poisoned")
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, State> {
        self.state.write().expect("catalog poisoned")
    }

    /// Declares an empty dataset, optionally keyed.
    pub fn create_dataset(&self, dataset: &str, primary_key: Option<&str>) -> Result<(), ExecError> {
        let mut state = self.write();
        if state.datasets.contains_key(dataset) {
            return Err(ExecError::DatasetExists(dataset.to_owned()));
        }
        state.datasets.insert(
            dataset.to_owned(),
            Dataset {
                primary_key: primary_key.map(str::to_owned),
                ..Dataset::default()
            },
        );
        Ok(())
    }

    /// Appends records. All-or-nothing: on error nothing is stored.
    pub fn load(&self, dataset: &str, records: impl IntoIterator<Item = Value>) -> Result<usize, ExecError> {
        let mut state = self.write();
        let State {
            types, datasets, ..
        } = &mut *state;
        if !datasets.contains_key(dataset) {
            if !self.options.auto_create {
                return Err(ExecError::MissingDataset(dataset.to_owned()));
            }
            datasets.insert(dataset.to_owned(), Dataset::default());
        }
        let ds = datasets.get_mut(dataset).expect("inserted above");
        let decl = ds.type_name.as_ref().and_then(|t| types.get(t));
        let mut staged = Vec::new();
        let mut new_keys = BTreeSet::new();
        for (i, rec) in records.into_iter().enumerate() {
            let Value::Object(map) = rec else {
                return Err(ExecError::InvalidRecord(format!(
                    "record {i} for {dataset} is not an object"
                )));
            };
            if let Some(decl) = decl {
                check_against_type(decl, &map, dataset)?;
            }
            if let Some(pk) = &ds.primary_key {
                let key = map.get(pk).filter(|v| !v.is_null()).ok_or_else(|| {
                    ExecError::InvalidRecord(format!("record {i} for {dataset} lacks key field {pk:?}"))
                })?;
                let key = key.to_string();
                if ds.keys.contains(&key) || !new_keys.insert(key.clone()) {
                    return Err(ExecError::DuplicateKey {
                        dataset: dataset.to_owned(),
                        key,
                    });
                }
            }
            staged.push(map);
        }
        let n = staged.len();
        ds.records.extend(staged);
        ds.keys.extend(new_keys);
        Ok(n)
    }

    /// Loads a JSON-lines (`json`, `adm`) or CSV-with-header (`csv`,
    /// `delimited-text`) file. CSV cells that parse as integers become numbers.
    pub fn load_file(&self, dataset: &str, path: &Path, format: &str) -> Result<usize, ExecError> {
        let io = |e: std::io::Error| ExecError::Load(format!("{}: {e}", path.display()));
        let file = File::open(path).map_err(io)?;
        let records = match format.to_ascii_lowercase().as_str() {
            "json" | "adm" | "jsonl" => {
                let mut out = Vec::new();
                for (lineno, line) in BufReader::new(file).lines().enumerate() {
                    let line = line.map_err(io)?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    out.push(serde_json::from_str(&line).map_err(|e| {
                        ExecError::Load(format!("{}:{}: {e}", path.display(), lineno + 1))
                    })?);
                }
                out
            }
            "csv" | "delimited-text" => {
                let mut reader = csv::Reader::from_reader(file);
                let headers = reader
                    .headers()
                    .map_err(|e| ExecError::Load(e.to_string()))?
                    .clone();
                let mut out = Vec::new();
                for row in reader.records() {
                    let row = row.map_err(|e| ExecError::Load(e.to_string()))?;
                    let map: Map<String, Value> = headers
                        .iter()
                        .zip(row.iter())
                        .map(|(h, cell)| {
                            let v = cell
                                .parse::<i64>()
                                .map(Value::from)
                                .unwrap_or_else(|_| Value::String(cell.to_owned()));
                            (h.to_owned(), v)
                        })
                        .collect();
                    out.push(Value::Object(map));
                }
                out
            }
            other => return Err(ExecError::Load(format!("unsupported format {other:?}"))),
        };
        self.load(dataset, records)
    }

    /// Applies a DDL request and returns the number of records written.
    pub fn apply_ddl(&self, req: &DdlRequest) -> Result<usize, ExecError> {
        match req {
            DdlRequest::CreateType { name, fields, open } => {
                let mut state = self.write();
                if state.types.contains_key(name) {
                    return Err(ExecError::TypeExists(name.clone()));
                }
                state.types.insert(
                    name.clone(),
                    TypeDecl {
                        fields: fields.clone(),
                        open: *open,
                    },
                );
                Ok(0)
            }
            DdlRequest::CreateDataset {
                dataset,
                type_name,
                primary_key,
                ..
            } => {
                let mut state = self.write();
                let decl = state
                    .types
                    .get(type_name)
                    .ok_or_else(|| ExecError::UnknownType(type_name.clone()))?;
                if !decl.open && !decl.fields.iter().any(|f| &f.name == primary_key) {
                    return Err(ExecError::InvalidRecord(format!(
                        "primary key {primary_key:?} is not a field of closed type {type_name}"
                    )));
                }
                let name = dataset.to_string();
                if state.datasets.contains_key(&name) {
                    return Err(ExecError::DatasetExists(name));
                }
                state.datasets.insert(
                    name,
                    Dataset {
                        type_name: Some(type_name.clone()),
                        primary_key: Some(primary_key.clone()),
                        ..Dataset::default()
                    },
                );
                Ok(0)
            }
            DdlRequest::CreateIndex { dataset, field, .. } => {
                let mut state = self.write();
                let name = dataset.to_string();
                if !state.datasets.contains_key(&name) {
                    return Err(ExecError::MissingDataset(name));
                }
                state.indexes.insert((name, field.clone()));
                Ok(0)
            }
            DdlRequest::LoadDataset {
                dataset,
                path,
                format,
            } => self.load_file(&dataset.to_string(), Path::new(strip_host(path)), format),
            DdlRequest::Persist { source, target } => {
                let rows = self.execute(source)?;
                self.load(&target.to_string(), rows)
            }
        }
    }

    /// Evaluates a plan with naive semantics: full scans, nested-loop joins,
    /// stable full sorts and grouping in first-appearance order.
    pub fn execute(&self, plan: &LogicalPlan) -> Result<Vec<Value>, ExecError> {
        let udfs = self.udfs.read().expect("udf registry poisoned");
        let ctx = EvalContext {
            strict_fields: self.options.strict_fields,
            udfs: &udfs,
        };
        let state = self.read();
        run(plan, &state, &ctx)
    }
}

/// `localhost:///tmp/x.json` → `/tmp/x.json`.
fn strip_host(path: &str) -> &str {
    match path.find("://") {
        Some(i) => &path[i + 3..],
        None => path,
    }
}

fn check_against_type(decl: &TypeDecl, rec: &Map<String, Value>, dataset: &str) -> Result<(), ExecError> {
    for f in &decl.fields {
        match rec.get(&f.name) {
            Some(v) if f.ty.admits(v) => {}
            Some(v) => {
                return Err(ExecError::InvalidRecord(format!(
                    "field {:?} of {dataset} expects {}, got {v}",
                    f.name, f.ty
                )))
            }
            None => {
                return Err(ExecError::InvalidRecord(format!(
                    "record for {dataset} lacks declared field {:?}",
                    f.name
                )))
            }
        }
    }
    if !decl.open {
        if let Some(extra) = rec.keys().find(|k| !decl.fields.iter().any(|f| &f.name == *k)) {
            return Err(ExecError::InvalidRecord(format!(
                "field {extra:?} is not declared by the closed type of {dataset}"
            )));
        }
    }
    Ok(())
}

fn aggregate(func: AggFn, arg: &AggArg, rows: &[Value], ctx: &EvalContext<'_>) -> Result<Value, ExecError> {
    let expr = match arg {
        AggArg::Star => return Ok(Value::from(rows.len() as u64)),
        AggArg::Expr(e) => e,
    };
    let mut count = 0u64;
    let mut best: Option<Value> = None;
    for row in rows {
        let v = ctx.eval(expr, row)?;
        if v.is_null() {
            continue;
        }
        count += 1;
        let replace = match &best {
            None => true,
            Some(b) => match func {
                AggFn::Max => total_cmp(&v, b).is_gt(),
                AggFn::Min => total_cmp(&v, b).is_lt(),
                AggFn::Count => false,
            },
        };
        if replace {
            best = Some(v);
        }
    }
    Ok(match func {
        AggFn::Count => Value::from(count),
        _ => best.unwrap_or(Value::Null),
    })
}

fn as_record(row: &Value) -> Map<String, Value> {
    match row {
        Value::Object(m) => m.clone(),
        _ => Map::new(),
    }
}

fn run(plan: &LogicalPlan, state: &State, ctx: &EvalContext<'_>) -> Result<Vec<Value>, ExecError> {
    Ok(match plan.node() {
        PlanNode::Scan { dataset } => {
            let name = dataset.to_string();
            let ds = state
                .datasets
                .get(&name)
                .ok_or(ExecError::MissingDataset(name))?;
            ds.records.iter().cloned().map(Value::Object).collect()
        }
        PlanNode::Filter { input, predicate } => {
            let mut out = Vec::new();
            for row in run(input, state, ctx)? {
                if ctx.eval(predicate, &row)? == Value::Bool(true) {
                    out.push(row);
                }
            }
            out
        }
        PlanNode::Project { input, items } => {
            let rows = run(input, state, ctx)?;
            if items.iter().all(|i| matches!(i.expr, Expr::Aggregate { .. })) {
                let mut rec = Map::new();
                let mut unnamed = 0;
                for item in items {
                    let Expr::Aggregate { func, arg } = &item.expr else {
                        unreachable!()
                    };
                    let name = item.output_name().map(str::to_owned).unwrap_or_else(|| {
                        unnamed += 1;
                        format!("${unnamed}")
                    });
                    rec.insert(name, aggregate(*func, arg, &rows, ctx)?);
                }
                vec![Value::Object(rec)]
            } else {
                let mut out = Vec::with_capacity(rows.len());
                for row in &rows {
                    let mut rec = Map::new();
                    let mut unnamed = 0;
                    for item in items {
                        if matches!(item.expr, Expr::Wildcard) {
                            rec.extend(as_record(row));
                            continue;
                        }
                        let name = item.output_name().map(str::to_owned).unwrap_or_else(|| {
                            unnamed += 1;
                            format!("${unnamed}")
                        });
                        rec.insert(name, ctx.eval(&item.expr, row)?);
                    }
                    out.push(Value::Object(rec));
                }
                out
            }
        }
        PlanNode::ProjectValue { input, item } => {
            let rows = run(input, state, ctx)?;
            match item {
                Expr::Aggregate { func, arg } => vec![aggregate(*func, arg, &rows, ctx)?],
                _ => rows
                    .iter()
                    .map(|r| ctx.eval(item, r))
                    .collect::<Result<_, _>>()?,
            }
        }
        PlanNode::Limit { input, count } => {
            let mut rows = run(input, state, ctx)?;
            rows.truncate(usize::try_from(*count).unwrap_or(usize::MAX));
            rows
        }
        PlanNode::GroupAgg {
            input,
            key,
            key_alias,
            aggs,
        } => {
            let rows = run(input, state, ctx)?;
            let mut groups: Vec<(Value, Vec<Value>)> = Vec::new();
            let mut index: HashMap<String, usize> = HashMap::new();
            for row in rows {
                let k = ctx.eval(key, &row)?;
                let slot = *index.entry(canonical_key(&k)).or_insert_with(|| {
                    groups.push((k.clone(), Vec::new()));
                    groups.len() - 1
                });
                groups[slot].1.push(row);
            }
            let mut out = Vec::with_capacity(groups.len());
            for (k, members) in groups {
                let mut rec = Map::new();
                rec.insert(key_alias.clone(), k);
                for a in aggs {
                    rec.insert(a.alias.clone(), aggregate(a.func, &a.arg, &members, ctx)?);
                }
                out.push(Value::Object(rec));
            }
            out
        }
        PlanNode::Sort { input, key, order } => {
            let rows = run(input, state, ctx)?;
            let mut keyed = rows
                .into_iter()
                .map(|r| Ok((ctx.eval(key, &r)?, r)))
                .collect::<Result<Vec<_>, ExecError>>()?;
            keyed.sort_by(|a, b| {
                let o = total_cmp(&a.0, &b.0);
                match order {
                    SortOrder::Asc => o,
                    SortOrder::Desc => o.reverse(),
                }
            });
            keyed.into_iter().map(|(_, r)| r).collect()
        }
        PlanNode::Join {
            left,
            right,
            left_key,
            right_key,
            ..
        } => {
            let l = run(left, state, ctx)?;
            let r = run(right, state, ctx)?;
            let lk = l.iter().map(|row| ctx.eval(left_key, row)).collect::<Result<Vec<_>, _>>()?;
            let rk = r.iter().map(|row| ctx.eval(right_key, row)).collect::<Result<Vec<_>, _>>()?;
            let mut out = Vec::new();
            for (lrow, lv) in l.iter().zip(&lk) {
                if lv.is_null() {
                    continue;
                }
                for (rrow, rv) in r.iter().zip(&rk) {
                    if !rv.is_null() && values_equal(lv, rv) {
                        let mut pair = Map::new();
                        pair.insert("l".to_owned(), lrow.clone());
                        pair.insert("r".to_owned(), rrow.clone());
                        out.push(Value::Object(pair));
                    }
                }
            }
            out
        }
        PlanNode::CountAll { input } => vec![Value::from(run(input, state, ctx)?.len() as u64)],
    })
}

/// Grouping key: integral floats collapse onto the matching integer.
fn canonical_key(v: &Value) -> String {
    match v {
        Value::Number(n) if n.as_i64().is_none() => match n.as_f64() {
            Some(f) if f.fract() == 0.0 && f.abs() < 9.0e15 => (f as i64).to_string(),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

/// [`Backend`] over a shared [`MemoryCatalog`]. Uses the structured
/// statement when the caller supplies one and parses the SQL++ text
/// otherwise.
#[derive(Debug, Clone)]
pub struct MemoryBackend {
    catalog: Arc<MemoryCatalog>,
    counter: Arc<AtomicU64>,
}

impl MemoryBackend {
    pub fn new(catalog: Arc<MemoryCatalog>) -> Self {
        Self {
            catalog,
            counter: Arc::default(),
        }
    }

    pub fn catalog(&self) -> &Arc<MemoryCatalog> {
        &self.catalog
    }

    /// Runs one statement without touching the request counter.
    pub fn run_statement(&self, request: &Request) -> QueryResult {
        let started = Instant::now();
        let parsed;
        let statement = match &request.statement {
            Some(s) => s,
            None => match parse_statement(&request.text) {
                Ok(s) => {
                    parsed = s;
                    &parsed
                }
                Err(e) => return QueryResult::error(e.to_string(), started.elapsed()),
            },
        };
        let outcome = match statement {
            Statement::Query(plan) => self.catalog.execute(plan),
            Statement::Ddl(req) => self.catalog.apply_ddl(req).map(|_| Vec::new()),
        };
        match outcome {
            Ok(rows) => QueryResult::success(rows, started.elapsed()),
            Err(e) => QueryResult::error(e.to_string(), started.elapsed()),
        }
    }
}

impl Backend for MemoryBackend {
    fn execute(&self, request: &Request) -> Result<QueryResult, BackendError> {
        self.counter.fetch_add(1, AtomicOrdering::SeqCst);
        Ok(self.run_statement(request))
    }

    fn request_count(&self) -> u64 {
        self.counter.load(AtomicOrdering::SeqCst)
    }
}
