use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::path::Path;

use serde::Serialize;

use super::write::{emit, sidecar};
use super::{
    resolve_seed, CliError, Command, Common, Envelope, Format, RunConfig, EXIT_NEGATIVE, EXIT_OK, EXIT_UNDECIDED,
};
use crate::expr::{DomainBox, Expr, Interval, ZERO_SEED};
use crate::flow::{
    check_invariance, check_invariance_between, check_naive_invariance, check_naive_invariance_between, complex_to_dot,
    find_information_loops, graph_to_dot, info_flow_graph, ComplexSerial, FlowComplex, FlowGraph, FlowReport,
    InvarianceReport, InvarianceStatus,
};
use crate::model::{load_system, naive_flow_graph, CoordinateChange, SystemDef};
use crate::order::{
    check_well_posed, compare_level_sets, compare_superlevel_sets, OrderVerdict, SampleSet, WellPosedReport,
};
use crate::sim::{
    evaluate_objective, formation_edges, initial_state, numeric_jacobian, ClosedLoop, EdgeErrorSeries, ObjectiveStatus,
};

pub(super) fn dispatch(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Analyze { common, naive } => analyze(&common, naive),
        Command::Complex { common } => complex(&common),
        Command::Invariance {
            common,
            change,
            naive,
            against,
        } => invariance(&common, change, naive, against.as_deref()),
        Command::Order {
            common,
            lhs,
            rhs,
            superlevel,
            boxes,
            mu,
            samples_file,
        } => order(&common, &lhs, &rhs, superlevel, &boxes, &mu, samples_file.as_deref()),
        Command::Simulate {
            common,
            dt,
            t_end,
            x0_file,
            mu,
            stride,
        } => simulate(&common, dt, t_end, x0_file.as_deref(), &mu, stride),
        Command::Wellposed {
            common,
            mu,
            samples_file,
        } => wellposed(&common, &mu, samples_file.as_deref()),
    }
}

fn unsupported(command: &str, format: Format) -> CliError {
    CliError::Usage(format!("{command} does not support --format {format:?}").to_lowercase())
}

fn write_json<T: Serialize>(config: &RunConfig, report: &T, output: Option<&Path>) -> Result<(), CliError> {
    emit(output, &Envelope::new(config, report).to_json()?)
}

/// `NAME=VALUE` pairs, each argument possibly comma-separated.
fn parse_assignments(args: &[String]) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for pair in args.iter().flat_map(|a| a.split(',')).filter(|s| !s.trim().is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected NAME=VALUE, got `{pair}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| CliError::Usage(format!("invalid number in `{pair}`")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

/// The system's `mu` overridden by `--mu`.
fn resolve_mu(sys: &SystemDef, args: &[String]) -> Result<BTreeMap<String, f64>, CliError> {
    let mut mu = sys.mu.clone();
    for (k, v) in parse_assignments(args)? {
        if !sys.param_vars.contains(&k) {
            return Err(CliError::Usage(format!("`{k}` is not a parameter of {}", sys.name)));
        }
        mu.insert(k, v);
    }
    Ok(mu)
}

fn load_samples(path: &Path, tol: f64) -> Result<SampleSet, CliError> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(SampleSet::from_csv(file)?.with_tolerance(tol))
}

#[derive(Serialize)]
struct AnalyzeReport {
    system: String,
    naive: bool,
    #[serde(flatten)]
    flow: FlowReport,
}

fn edges_csv(g: &FlowGraph) -> String {
    let mut rows: Vec<(usize, usize, &str)> = g.edges().map(|(a, b, _)| (a, b, "confirmed")).collect();
    rows.extend(g.unknown_edges().iter().map(|&(a, b)| (a, b, "unknown")));
    rows.sort();
    let mut out = String::from("from,to,status\n");
    for (a, b, status) in rows {
        out.push_str(&format!("{},{},{status}\n", g.vertices[a], g.vertices[b]));
    }
    out
}

fn analyze(c: &Common, naive: bool) -> Result<u8, CliError> {
    let mut config = RunConfig::new("analyze", c, resolve_seed(c.seed)?);
    config.naive = Some(naive);
    let sys = load_system(&c.file)?;
    let g = if naive {
        naive_flow_graph(&sys)?
    } else {
        info_flow_graph(&sys, c.depth)
    };
    let loops = find_information_loops(&g, c.max_len);
    match c.format {
        Format::Dot => emit(c.output.as_deref(), &graph_to_dot(&g, &sys.name, Some(&loops)))?,
        Format::Csv => emit(c.output.as_deref(), &edges_csv(&g))?,
        Format::Json => {
            let complex = FlowComplex::from_graph(&g);
            let report = AnalyzeReport {
                system: sys.name.clone(),
                naive,
                flow: FlowReport::new(&g, Some(&complex), &loops, c.depth, ZERO_SEED),
            };
            write_json(&config, &report, c.output.as_deref())?;
        }
    }
    Ok(if g.unknown_edges().is_empty() {
        EXIT_OK
    } else {
        EXIT_UNDECIDED
    })
}

#[derive(Serialize)]
struct ComplexReport {
    system: String,
    depth: usize,
    dimension: usize,
    /// Simplex count per dimension.
    counts: Vec<usize>,
    labels: Vec<String>,
    unknown_edges: Vec<[String; 2]>,
    complex: ComplexSerial,
}

fn complex(c: &Common) -> Result<u8, CliError> {
    let config = RunConfig::new("complex", c, resolve_seed(c.seed)?);
    let sys = load_system(&c.file)?;
    let g = info_flow_graph(&sys, c.depth);
    let fc = FlowComplex::from_graph(&g);
    let report = ComplexReport {
        system: sys.name.clone(),
        depth: c.depth,
        dimension: fc.dimension(),
        counts: (0..=fc.dimension()).map(|k| fc.of_dim(k).len()).collect(),
        labels: fc.simplices().into_iter().map(|s| fc.label(s)).collect(),
        unknown_edges: g
            .unknown_edges()
            .iter()
            .map(|&(a, b)| [g.vertices[a].clone(), g.vertices[b].clone()])
            .collect(),
        complex: fc.to_serial(),
    };
    match c.format {
        Format::Json => write_json(&config, &report, c.output.as_deref())?,
        Format::Dot => {
            emit(c.output.as_deref(), &complex_to_dot(&fc, &sys.name))?;
            if let Some(out) = &c.output {
                let side = sidecar(out, ".json");
                if &side != out {
                    write_json(&config, &report, Some(&side))?;
                }
            }
        }
        Format::Csv => return Err(unsupported("complex", c.format)),
    }
    Ok(if g.unknown_edges().is_empty() {
        EXIT_OK
    } else {
        EXIT_UNDECIDED
    })
}

fn invariance(c: &Common, change: Option<String>, naive: bool, against: Option<&Path>) -> Result<u8, CliError> {
    let mut config = RunConfig::new("invariance", c, resolve_seed(c.seed)?);
    config.naive = Some(naive);
    if c.format != Format::Json {
        return Err(unsupported("invariance", c.format));
    }
    let sys = load_system(&c.file)?;
    let report: InvarianceReport = if let Some(other) = against {
        config.against = Some(other.display().to_string());
        let other = load_system(other)?;
        if naive {
            check_naive_invariance_between(&sys, &other)?
        } else {
            check_invariance_between(&sys, &other, c.depth)
        }
    } else {
        let identity;
        let ch: &CoordinateChange = match change.as_deref() {
            Some("identity") => {
                identity = CoordinateChange::identity(&sys.state_vars);
                &identity
            }
            Some(name) => sys.change(name)?,
            None => sys.changes.first().ok_or_else(|| {
                CliError::Usage(format!(
                    "{} declares no change of coordinates; use --change identity or --against FILE",
                    sys.name
                ))
            })?,
        };
        config.change = Some(ch.name.clone());
        if naive {
            check_naive_invariance(&sys, ch)?
        } else {
            check_invariance(&sys, ch, c.depth)?
        }
    };
    write_json(&config, &report, c.output.as_deref())?;
    Ok(match report.status {
        InvarianceStatus::Equal => EXIT_OK,
        InvarianceStatus::Inconclusive => EXIT_UNDECIDED,
        InvarianceStatus::Differ => EXIT_NEGATIVE,
    })
}

#[derive(Serialize)]
struct OrderReport {
    system: String,
    lhs: String,
    rhs: String,
    lhs_components: Vec<String>,
    rhs_components: Vec<String>,
    variables: Vec<String>,
    verdict: OrderVerdict,
}

fn parse_box(args: &[String], mut domain: DomainBox) -> Result<DomainBox, CliError> {
    for item in args.iter().flat_map(|a| a.split(',')).filter(|s| !s.trim().is_empty()) {
        let bad = || CliError::Usage(format!("expected VAR=LO:HI, got `{item}`"));
        let (var, range) = item.split_once('=').ok_or_else(bad)?;
        let (lo, hi) = range.split_once(':').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(bad());
        }
        domain.set(var.trim(), Interval::new(lo, hi));
    }
    Ok(domain)
}

/// Variables the functions use, in declaration order, completed by the
/// whole sphere block when any sphere variable appears.
fn sample_vars(sys: &SystemDef, functions: &[&[Expr]], fixed: &BTreeMap<String, f64>) -> Vec<String> {
    let mut used: BTreeSet<String> = functions
        .iter()
        .flat_map(|f| f.iter().flat_map(Expr::free_vars))
        .filter(|v| !fixed.contains_key(v))
        .collect();
    if sys.sphere.iter().any(|v| used.contains(v)) {
        used.extend(sys.sphere.iter().cloned());
    }
    let declared = sys.state_vars.iter().chain(&sys.param_vars);
    let vars: Vec<String> = declared.filter(|v| used.contains(*v)).cloned().collect();
    if vars.is_empty() {
        sys.state_vars.clone()
    } else {
        vars
    }
}

#[allow(clippy::too_many_arguments)]
fn order(
    c: &Common,
    lhs: &str,
    rhs: &str,
    superlevel: bool,
    boxes: &[String],
    mu_args: &[String],
    samples_file: Option<&Path>,
) -> Result<u8, CliError> {
    let seed = resolve_seed(c.seed)?;
    let mut config = RunConfig::new("order", c, seed);
    config.lhs = Some(lhs.to_string());
    config.rhs = Some(rhs.to_string());
    config.superlevel = Some(superlevel);
    let sys = load_system(&c.file)?;
    let domain = parse_box(boxes, sys.domain.clone())?;
    let mu = if superlevel {
        resolve_mu(&sys, mu_args)?
    } else {
        BTreeMap::new()
    };
    let unknown = |id: &str| CliError::Usage(format!("no function or objective named `{id}` in {}", sys.name));

    let (a, b) = if superlevel {
        let a = sys.objective_by_id(lhs).ok_or_else(|| unknown(lhs))?.clone();
        let b = sys.objective_by_id(rhs).ok_or_else(|| unknown(rhs))?.clone();
        (a.components.clone(), b.components.clone())
    } else {
        (
            sys.function_by_id(lhs).ok_or_else(|| unknown(lhs))?,
            sys.function_by_id(rhs).ok_or_else(|| unknown(rhs))?,
        )
    };
    let vars = sample_vars(&sys, &[&a, &b], &mu);
    let samples = match samples_file {
        Some(p) => {
            config.samples_file = Some(p.display().to_string());
            load_samples(p, c.tol)?
        }
        None => {
            let sphere: Vec<String> = sys.sphere.iter().filter(|v| vars.contains(v)).cloned().collect();
            config.domain = Some(
                vars.iter()
                    .filter(|v| !sphere.contains(v))
                    .map(|v| {
                        let iv = domain.get(v);
                        (v.clone(), [iv.lo, iv.hi])
                    })
                    .collect(),
            );
            SampleSet::random(&vars, &domain, &sphere, c.samples, seed)?.with_tolerance(c.tol)
        }
    };
    if superlevel {
        config.mu = Some(mu.clone());
    }
    if c.format == Format::Csv {
        let mut buf = Vec::new();
        samples.write_csv(&mut buf)?;
        emit(
            c.output.as_deref(),
            &String::from_utf8(buf).expect("csv output is utf-8"),
        )?;
        return Ok(EXIT_OK);
    }
    if c.format == Format::Dot {
        return Err(unsupported("order", c.format));
    }
    let verdict = if superlevel {
        let a = sys.objective_by_id(lhs).expect("resolved above");
        let b = sys.objective_by_id(rhs).expect("resolved above");
        compare_superlevel_sets(a, b, &mu, &samples)?
    } else {
        compare_level_sets(&a, &b, &samples)?
    };
    let report = OrderReport {
        system: sys.name.clone(),
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        lhs_components: a.iter().map(ToString::to_string).collect(),
        rhs_components: b.iter().map(ToString::to_string).collect(),
        variables: samples.vars.clone(),
        verdict,
    };
    write_json(&config, &report, c.output.as_deref())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct TrajectoryRows {
    stride: usize,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct SimulateReport {
    system: String,
    state_vars: Vec<String>,
    steps: usize,
    diverged: bool,
    final_time: f64,
    final_state: Vec<f64>,
    edge_labels: Vec<String>,
    final_edge_errors: Vec<f64>,
    max_abs_edge_error: f64,
    objective: Option<ObjectiveStatus>,
    trajectory: TrajectoryRows,
}

fn read_x0(path: &Path, sys: &SystemDef) -> Result<Vec<f64>, CliError> {
    let s = load_samples(path, 0.0)?;
    sys.state_vars
        .iter()
        .map(|v| {
            s.vars
                .iter()
                .position(|h| h == v)
                .map(|k| s.points[0][k])
                .ok_or_else(|| CliError::Usage(format!("{} has no column `{v}`", path.display())))
        })
        .collect()
}

fn simulate(
    c: &Common,
    dt: f64,
    t_end: f64,
    x0_file: Option<&Path>,
    mu_args: &[String],
    stride: usize,
) -> Result<u8, CliError> {
    let mut config = RunConfig::new("simulate", c, resolve_seed(c.seed)?);
    let sys = load_system(&c.file)?;
    let mu = resolve_mu(&sys, mu_args)?;
    config.mu = Some(mu.clone());
    config.dt = Some(dt);
    config.t_end = Some(t_end);
    config.stride = Some(stride.max(1));
    let x0 = match x0_file {
        Some(p) => {
            config.x0_file = Some(p.display().to_string());
            read_x0(p, &sys)?
        }
        None => initial_state(&sys)?,
    };
    let cl = ClosedLoop::new(&sys, &mu)?;
    let traj = cl.integrate(&x0, dt, t_end)?;
    let edges = formation_edges(&sys, &mu)?;
    let series = EdgeErrorSeries::new(&traj, &edges, true);

    match c.format {
        Format::Csv => {
            emit(c.output.as_deref(), &traj.to_csv(stride))?;
            if let (Some(out), false) = (&c.output, edges.is_empty()) {
                emit(Some(&sidecar(out, ".edges.csv")), &series.to_csv(stride))?;
            }
        }
        Format::Dot => return Err(unsupported("simulate", c.format)),
        Format::Json => {
            let last = traj.last_state().to_vec();
            let objective = match &sys.global_objective {
                Some(f) => {
                    let j = if f.uses_jacobian_eigenvalues {
                        Some(numeric_jacobian(|y| cl.rhs_vec(y), &last)?)
                    } else {
                        None
                    };
                    Some(evaluate_objective(f, &sys.state_vars, &mu, &last, j.as_ref())?)
                }
                None => None,
            };
            let stride = stride.max(1);
            let keep = |k: usize| k.is_multiple_of(stride) || k + 1 == traj.len();
            let report = SimulateReport {
                system: sys.name.clone(),
                state_vars: sys.state_vars.clone(),
                steps: traj.len() - 1,
                diverged: traj.diverged,
                final_time: *traj.times.last().expect("trajectory holds x0"),
                final_edge_errors: series.values.last().cloned().unwrap_or_default(),
                max_abs_edge_error: series.final_max_abs(),
                edge_labels: series.labels.clone(),
                final_state: last,
                objective,
                trajectory: TrajectoryRows {
                    stride,
                    times: traj
                        .times
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| keep(*k))
                        .map(|(_, t)| *t)
                        .collect(),
                    states: traj
                        .states
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| keep(*k))
                        .map(|(_, s)| s.clone())
                        .collect(),
                },
            };
            write_json(&config, &report, c.output.as_deref())?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct WellposedOutput {
    system: String,
    variables: Vec<String>,
    #[serde(flatten)]
    result: WellPosedReport,
}

fn wellposed(c: &Common, mu_args: &[String], samples_file: Option<&Path>) -> Result<u8, CliError> {
    let seed = resolve_seed(c.seed)?;
    let mut config = RunConfig::new("wellposed", c, seed);
    if c.format != Format::Json {
        return Err(unsupported("wellposed", c.format));
    }
    let sys = load_system(&c.file)?;
    let mu = resolve_mu(&sys, mu_args)?;
    config.mu = Some(mu.clone());
    let samples = match samples_file {
        Some(p) => {
            config.samples_file = Some(p.display().to_string());
            load_samples(p, c.tol)?
        }
        None => {
            let sphere: Vec<String> = sys
                .sphere
                .iter()
                .filter(|v| sys.state_vars.contains(v))
                .cloned()
                .collect();
            SampleSet::random(&sys.state_vars, &sys.domain, &sphere, c.samples, seed)?.with_tolerance(c.tol)
        }
    };
    let result = check_well_posed(&sys, &mu, &samples)?;
    if result.locals_satisfied == 0 {
        eprintln!("warning: no sample satisfies every local objective; the check is vacuous");
    }
    let code = if result.is_well_posed() { EXIT_OK } else { EXIT_NEGATIVE };
    let out = WellposedOutput {
        system: sys.name.clone(),
        variables: samples.vars.clone(),
        result,
    };
    write_json(&config, &out, c.output.as_deref())?;
    Ok(code)
}
