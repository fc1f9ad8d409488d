mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

use common::{brute, fixture};
use lazydf::ast::{
    AggFn, Aggregation, CompareOp, DatasetRef, Expr, JoinKind, LogicalPlan, NodeSpec, ProjectItem, SortOrder,
};
use lazydf::backend::MemoryCatalog;
use lazydf::dialect::parse::{parse_statement, Statement};
use lazydf::dialect::Dialect;
use lazydf::frame::{Frame, FrameError, PersistPolicy, Session};
use lazydf::wisconsin;
use proptest::prelude::*;
use serde_json::Value;

const INT_COLUMNS: [&str; 12] = [
    "unique1",
    "unique2",
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
];
const UNIQUE_COLUMNS: [&str; 2] = ["unique1", "unique2"];

fn scan(name: &str) -> LogicalPlan {
    LogicalPlan::scan_dataset(DatasetRef::unqualified(name).unwrap())
}

fn int_column() -> impl Strategy<Value = &'static str> {
    prop::sample::select(&INT_COLUMNS[..])
}

fn compare_op() -> impl Strategy<Value = CompareOp> {
    prop::sample::select(vec![
        CompareOp::Eq,
        CompareOp::Ne,
        CompareOp::Lt,
        CompareOp::Le,
        CompareOp::Gt,
        CompareOp::Ge,
    ])
}

fn agg_fn() -> impl Strategy<Value = AggFn> {
    prop::sample::select(vec![AggFn::Count, AggFn::Max, AggFn::Min])
}

/// Integer-valued expression over one row.
fn value_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        3 => int_column().prop_map(Expr::col),
        1 => (-5i64..200).prop_map(Expr::lit),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        (
            inner.clone(),
            prop::sample::select(vec![
                lazydf::ast::ArithOp::Add,
                lazydf::ast::ArithOp::Sub,
                lazydf::ast::ArithOp::Mul,
            ]),
            inner,
        )
            .prop_map(|(l, op, r)| Expr::arith(op, l, r))
    })
}

/// Boolean predicate over one row.
fn predicate() -> impl Strategy<Value = Expr> {
    let leaf = (value_expr(), compare_op(), value_expr()).prop_map(|(l, op, r)| Expr::compare(op, l, r));
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
            inner.prop_map(Expr::not),
        ]
    })
}

#[derive(Debug, Clone)]
enum Top {
    Rows,
    Project(Vec<(Expr, bool)>),
    Value(Expr),
    Group(&'static str, Vec<(AggFn, Option<&'static str>)>),
    Aggregates(Vec<(AggFn, &'static str, bool)>),
}

#[derive(Debug, Clone)]
struct PlanSpec {
    filters: Vec<Expr>,
    sort: Option<(&'static str, bool)>,
    limit_before: Option<u64>,
    top: Top,
    limit_after: Option<u64>,
    count: bool,
}

fn top() -> impl Strategy<Value = Top> {
    prop_oneof![
        Just(Top::Rows),
        prop::collection::vec((value_expr(), any::<bool>()), 1..4).prop_map(Top::Project),
        value_expr().prop_map(Top::Value),
        (int_column(), prop::collection::vec((agg_fn(), prop::option::of(int_column())), 1..3))
            .prop_map(|(k, a)| Top::Group(k, a)),
        prop::collection::vec((agg_fn(), int_column(), any::<bool>()), 1..4).prop_map(Top::Aggregates),
    ]
}

fn plan_spec() -> impl Strategy<Value = PlanSpec> {
    (
        prop::collection::vec(predicate(), 0..3),
        prop::option::of((prop::sample::select(&UNIQUE_COLUMNS[..]), any::<bool>())),
        prop::option::of(1u64..60),
        top(),
        prop::option::of(1u64..60),
        any::<bool>(),
    )
        .prop_map(|(filters, sort, limit_before, top, limit_after, count)| PlanSpec {
            filters,
            sort,
            limit_before,
            top,
            limit_after,
            count,
        })
}

/// Builds the plan; `None` when the shape checker rejects it. The second
/// value says whether row order is fully determined. Unsorted limits take
/// a storage-order prefix on both evaluators.
fn build(spec: &PlanSpec) -> Option<(LogicalPlan, bool)> {
    let mut plan = scan("Data");
    for f in &spec.filters {
        plan = plan.filter(f.clone()).ok()?;
    }
    if let Some((key, asc)) = spec.sort {
        let order = if asc { SortOrder::Asc } else { SortOrder::Desc };
        plan = plan.sort(Expr::col(key), order).ok()?;
    }
    if let Some(n) = spec.limit_before {
        plan = plan.limit(n).ok()?;
    }
    let mut ordered = true;
    plan = match &spec.top {
        Top::Rows => plan,
        Top::Project(items) => {
            let items = items
                .iter()
                .enumerate()
                .map(|(i, (e, named))| match (e, named) {
                    (Expr::Column { .. }, false) if i == 0 => ProjectItem::new(e.clone()),
                    _ => ProjectItem::aliased(e.clone(), format!("a{i}")),
                })
                .collect();
            plan.project(items).ok()?
        }
        Top::Value(e) => plan.project_value(e.clone()).ok()?,
        Top::Group(key, aggs) => {
            ordered = false;
            let aggs = aggs
                .iter()
                .enumerate()
                .map(|(i, (f, c))| match c {
                    Some(c) => Aggregation::of(*f, Expr::col(*c), format!("m{i}")),
                    None => Aggregation::count_star(format!("m{i}")),
                })
                .collect();
            plan.group_agg(Expr::col(*key), "grp_id", aggs).ok()?
        }
        Top::Aggregates(aggs) => {
            let items = aggs
                .iter()
                .enumerate()
                .map(|(i, (f, c, named))| {
                    let e = Expr::agg(*f, Some(Expr::col(*c)));
                    if *named {
                        ProjectItem::aliased(e, format!("g{i}"))
                    } else {
                        ProjectItem::new(e)
                    }
                })
                .collect();
            plan.project(items).ok()?
        }
    };
    if let Some(n) = spec.limit_after {
        if !ordered {
            return None;
        }
        plan = plan.limit(n).ok()?;
    }
    if spec.count {
        plan = plan.count_all().ok()?;
    }
    Some((plan, ordered && spec.sort.is_some()))
}

struct Shared {
    catalog: Arc<MemoryCatalog>,
    data: std::collections::HashMap<String, Vec<Value>>,
}

fn shared() -> &'static Shared {
    static SHARED: OnceLock<Shared> = OnceLock::new();
    SHARED.get_or_init(|| {
        let (catalog, data) = fixture(200, 8);
        catalog.apply_ddl(&wisconsin::closed_type("WisconsinType")).unwrap();
        Shared { catalog, data }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn memory_executor_agrees_with_brute_force(spec in plan_spec()) {
        let Some((plan, ordered)) = build(&spec) else { return Ok(()) };
        let s = shared();
        let got = s.catalog.execute(&plan).unwrap();
        let want = brute::run(plan.node(), &s.data);
        if ordered {
            prop_assert_eq!(got, want);
        } else {
            prop_assert_eq!(brute::multiset(&got), brute::multiset(&want));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rendering_is_deterministic_and_parses_back(spec in plan_spec()) {
        let Some((plan, _)) = build(&spec) else { return Ok(()) };
        let sqlpp = Dialect::sqlpp();
        let text = sqlpp.render_query(&plan).unwrap();
        prop_assert_eq!(&text, &sqlpp.render_query(&plan.clone()).unwrap());
        let ansi = Dialect::ansi().render_query(&plan).unwrap();
        prop_assert!(ansi.ends_with(';'));
        match parse_statement(&text) {
            Ok(Statement::Query(back)) => prop_assert_eq!(sqlpp.render_query(&back).unwrap(), text),
            other => prop_assert!(false, "{text} parsed as {other:?}"),
        }
    }
}

fn node_spec() -> impl Strategy<Value = NodeSpec> {
    prop_oneof![
        predicate().prop_map(NodeSpec::Filter),
        prop::collection::vec(value_expr(), 1..3)
            .prop_map(|es| NodeSpec::Project(es.into_iter().map(ProjectItem::new).collect())),
        prop::collection::vec(agg_fn(), 1..3).prop_map(|fs| NodeSpec::Project(
            fs.into_iter().map(|f| ProjectItem::new(Expr::agg(f, None))).collect()
        )),
        Just(NodeSpec::Project(vec![ProjectItem::new(Expr::Wildcard)])),
        value_expr().prop_map(NodeSpec::ProjectValue),
        agg_fn().prop_map(|f| NodeSpec::ProjectValue(Expr::agg(f, None))),
        (0u64..20).prop_map(NodeSpec::Limit),
        (value_expr(), "[a-z]{0,3}").prop_map(|(key, key_alias)| NodeSpec::GroupAgg {
            key,
            key_alias,
            aggs: vec![Aggregation::count_star("cnt")],
        }),
        (value_expr(), any::<bool>()).prop_map(|(key, asc)| NodeSpec::Sort {
            key,
            order: if asc { SortOrder::Asc } else { SortOrder::Desc },
        }),
        (int_column(), prop::sample::select(vec![JoinKind::Inner, JoinKind::Left])).prop_map(|(c, kind)| {
            NodeSpec::Join {
                right: scan("rightData"),
                left_key: Expr::col(c),
                right_key: Expr::col(c),
                kind,
            }
        }),
        Just(NodeSpec::CountAll),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Any sequence of operators is either accepted (and then renders and
    /// executes without panicking) or rejected with a typed error.
    #[test]
    fn shape_checker_is_total(specs in prop::collection::vec(node_spec(), 0..8)) {
        let mut plan = scan("Data");
        for spec in specs {
            match plan.compose(spec) {
                Ok(next) => plan = next,
                Err(e) => prop_assert!(!e.to_string().is_empty()),
            }
        }
        let _ = Dialect::sqlpp().render_query(&plan).unwrap();
        let _ = Dialect::ansi().render_query(&plan).unwrap();
        let _ = shared().catalog.execute(&plan);
    }
}

#[derive(Debug, Clone)]
enum Op {
    Filter(&'static str, CompareOp, i64),
    FilterBoth(&'static str, i64, &'static str, i64),
    Select(Vec<&'static str>),
    Sort(&'static str, bool),
    WithColumn(&'static str, i64),
    GroupCount(&'static str),
    GroupAgg(&'static str, &'static str, AggFn),
    Upper,
    SelfMerge,
    Explain,
}

#[derive(Debug, Clone)]
enum Terminal {
    Head(u64),
    Count,
    Collect,
    Max(&'static str),
    Min(&'static str),
    Describe(&'static str),
    PersistAppend,
    PersistCreate,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (int_column(), compare_op(), 0i64..100).prop_map(|(c, o, v)| Op::Filter(c, o, v)),
        1 => (int_column(), 0i64..20, int_column(), 0i64..20).prop_map(|(a, x, b, y)| Op::FilterBoth(a, x, b, y)),
        2 => prop::sample::subsequence(INT_COLUMNS.to_vec(), 1..4).prop_map(Op::Select),
        1 => (int_column(), any::<bool>()).prop_map(|(c, a)| Op::Sort(c, a)),
        1 => (int_column(), -3i64..3).prop_map(|(c, v)| Op::WithColumn(c, v)),
        1 => int_column().prop_map(Op::GroupCount),
        1 => (int_column(), int_column(), agg_fn()).prop_map(|(k, c, f)| Op::GroupAgg(k, c, f)),
        1 => Just(Op::Upper),
        1 => Just(Op::SelfMerge),
        1 => Just(Op::Explain),
    ]
}

fn terminal() -> impl Strategy<Value = Terminal> {
    prop_oneof![
        (1u64..10).prop_map(Terminal::Head),
        Just(Terminal::Count),
        Just(Terminal::Collect),
        int_column().prop_map(Terminal::Max),
        int_column().prop_map(Terminal::Min),
        int_column().prop_map(Terminal::Describe),
        Just(Terminal::PersistAppend),
        Just(Terminal::PersistCreate),
    ]
}

fn apply(f: &Frame, op: &Op, session: &Session) -> Result<Frame, FrameError> {
    Ok(match op {
        Op::Filter(c, o, v) => {
            let col = f.col(c)?;
            let mask = match o {
                CompareOp::Eq => col.eq(*v),
                CompareOp::Ne => col.ne(*v),
                CompareOp::Lt => col.lt(*v),
                CompareOp::Le => col.le(*v),
                CompareOp::Gt => col.gt(*v),
                CompareOp::Ge => col.ge(*v),
            };
            f.filter(&mask)?
        }
        Op::FilterBoth(a, x, b, y) => f.filter(&(f.col(a)?.ge(*x) | !f.col(b)?.eq(*y)))?,
        Op::Select(cols) => f.select(cols)?,
        Op::Sort(c, asc) => f.sort_values(c, *asc)?,
        Op::WithColumn(c, v) => f.with_column("extra", &(f.col(c)? + *v))?,
        Op::GroupCount(k) => f.groupby(k)?.count()?,
        Op::GroupAgg(k, c, func) => f.groupby(k)?.agg(c, func.name())?,
        Op::Upper => f.col("stringu1")?.map("upper")?,
        Op::SelfMerge => f.merge(&session.open("rightData")?, "unique1", "unique1", "inner")?,
        Op::Explain => {
            let _ = f.explain();
            f.clone()
        }
    })
}

static TARGETS: AtomicUsize = AtomicUsize::new(0);

/// Runs the terminal; returns the most requests it may issue.
fn finish(f: &Frame, t: &Terminal) -> (Result<(), FrameError>, u64) {
    let target = format!("Persisted{}", TARGETS.fetch_add(1, Ordering::Relaxed));
    match t {
        Terminal::Head(n) => (f.head(*n).map(drop), 1),
        Terminal::Count => (f.count().map(drop), 1),
        Terminal::Collect => (f.collect().map(drop), 1),
        Terminal::Max(c) => (f.col(c).and_then(|c| c.max()).map(drop), 1),
        Terminal::Min(c) => (f.col(c).and_then(|c| c.min()).map(drop), 1),
        Terminal::Describe(c) => (f.describe(&[c]).map(drop), 1),
        Terminal::PersistAppend => (f.persist(&target, &PersistPolicy::Append).map(drop), 1),
        Terminal::PersistCreate => (
            f.persist(
                &target,
                &PersistPolicy::CreateOrFail {
                    type_name: "WisconsinType".into(),
                    primary_key: "unique2".into(),
                },
            )
            .map(drop),
            2,
        ),
    }
}

fn is_local(e: &FrameError) -> bool {
    matches!(
        e,
        FrameError::Usage(_)
            | FrameError::CrossFrame
            | FrameError::UnknownFunction { .. }
            | FrameError::Shape(_)
            | FrameError::Render(_)
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn only_terminal_actions_send_requests(ops in prop::collection::vec(op(), 1..10), t in terminal()) {
        let session = Session::memory(shared().catalog.clone());
        let mut f = session.open("Data").unwrap();
        for op in &ops {
            if let Ok(next) = apply(&f, op, &session) {
                f = next;
            }
        }
        prop_assert_eq!(session.request_count(), 0);

        let (result, most) = finish(&f, &t);
        let sent = session.request_count();
        match &result {
            Ok(()) if matches!(t, Terminal::PersistCreate) => prop_assert_eq!(sent, 2),
            Ok(()) => prop_assert_eq!(sent, 1),
            Err(e) if is_local(e) => prop_assert_eq!(sent, 0, "{}", e),
            Err(_) => prop_assert!((1..=most).contains(&sent), "sent {}", sent),
        }
    }
}

#[test]
fn very_deep_expressions_render_and_execute() {
    let depth = 10_000;
    let mut pred = Expr::col("ten").ge(Expr::lit(0i64));
    let mut value = Expr::col("unique1");
    for i in 0..depth {
        pred = if i % 2 == 0 {
            pred.and(Expr::col("two").ge(Expr::lit(0i64)))
        } else {
            pred.or(Expr::col("two").lt(Expr::lit(0i64)))
        };
        value = Expr::arith(lazydf::ast::ArithOp::Add, value, Expr::lit(1i64));
    }
    let plan = scan("Data")
        .filter(pred)
        .unwrap()
        .project_value(value)
        .unwrap();
    let text = Dialect::sqlpp().render_query(&plan).unwrap();
    assert!(text.len() > depth * 10);
    let _ = Dialect::ansi().render_query(&plan).unwrap();

    let s = shared();
    let got = s.catalog.execute(&plan).unwrap();
    assert_eq!(got.len(), s.data["Data"].len());
    for (g, r) in got.iter().zip(&s.data["Data"]) {
        assert_eq!(g.as_i64().unwrap(), r["unique1"].as_i64().unwrap() + depth as i64);
    }
    drop(plan);
}

#[test]
fn generators_mostly_produce_usable_cases() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;

    let mut runner = TestRunner::deterministic();
    let specs = plan_spec();
    let built = (0..200)
        .filter(|_| build(&specs.new_tree(&mut runner).unwrap().current()).is_some())
        .count();
    assert!(built >= 120, "only {built}/200 plans accepted");

    let (ops_s, term_s) = (prop::collection::vec(op(), 1..10), terminal());
    let mut completed = 0;
    for _ in 0..200 {
        let session = Session::memory(shared().catalog.clone());
        let mut f = session.open("Data").unwrap();
        for op in ops_s.new_tree(&mut runner).unwrap().current() {
            if let Ok(next) = apply(&f, &op, &session) {
                f = next;
            }
        }
        if finish(&f, &term_s.new_tree(&mut runner).unwrap().current()).0.is_ok() {
            completed += 1;
        }
    }
    assert!(completed >= 100, "only {completed}/200 terminal actions succeeded");
}
