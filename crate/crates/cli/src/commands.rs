use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use matscale::baseline::{osborne, sinkhorn, BaselineConfig};
use matscale::generate as gen;
use matscale::ipm::{ipm_balance, ipm_scale, IpmConfig, IpmDriverConfig, Schedule};
use matscale::matrix::{check_scalable, load_matrix_market, scc_decompose, write_matrix_market, Scalability};
use matscale::newton::{solve_balancing, solve_scaling, DriverConfig};
use matscale::{Error, FactorsResult, SparseMatrix};

use crate::report::{CheckReport, ConfigEcho, InputInfo, RunReport, Status};
use crate::{CheckArgs, CompareArgs, GenerateArgs, Kind, Method, ScaleArgs, SolveArgs, Targets, Task};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_INPUT: u8 = 1;
pub const EXIT_SOLVE: u8 = 2;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_)
            | Error::Parse { .. }
            | Error::NotSquare { .. }
            | Error::IndexOutOfRange { .. }
            | Error::NegativeEntry { .. }
            | Error::NonFiniteEntry { .. }
            | Error::EmptyMatrix
            | Error::DimensionMismatch { .. }
            | Error::SumMismatch { .. }
            | Error::InvalidArgument(_) => EXIT_INPUT,
            _ => EXIT_SOLVE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(msg: String) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: msg,
    }
}

type CmdResult = Result<u8, Failure>;

fn load(path: &Path) -> Result<(SparseMatrix, InputInfo), Failure> {
    let a = load_matrix_market(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let info = InputInfo {
        path: path.display().to_string(),
        stats: a.stats()?,
        strongly_connected_blocks: scc_decompose(&a).components.len(),
    };
    Ok((a, info))
}

fn read_vector(source: &str, n: usize) -> Result<Vec<f64>, Failure> {
    if source == "uniform" {
        return Ok(vec![1.0; n]);
    }
    let text = fs::read_to_string(source).map_err(|e| input_error(format!("{source}: {e}")))?;
    let mut v = Vec::with_capacity(n);
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let x: f64 = tok
                .parse()
                .map_err(|_| input_error(format!("{source}: line {}: bad number {tok:?}", k + 1)))?;
            if !(x.is_finite() && x >= 0.0) {
                return Err(input_error(format!("{source}: line {}: target {x} must be nonnegative", k + 1)));
            }
            v.push(x);
        }
    }
    if v.len() != n {
        return Err(input_error(format!("{source}: expected {n} values, found {}", v.len())));
    }
    Ok(v)
}

fn targets(t: &Targets, n: usize) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    Ok((read_vector(&t.rows, n)?, read_vector(&t.cols, n)?))
}

fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), Failure> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| input_error(e.to_string()))?;
    fs::write(path, buf).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_file(p, |b| b.write_all(text.as_bytes())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn config_echo(a: &SolveArgs, t: Option<&Targets>) -> ConfigEcho {
    ConfigEcho {
        eps: a.eps,
        seed: a.seed,
        max_b: a.max_b,
        max_sweeps: a.max_sweeps,
        ipm_schedule: if a.ipm_long_step { "long" } else { "short" },
        rows: t.map(|t| t.rows.clone()),
        cols: t.map(|t| t.cols.clone()),
    }
}

fn newton_cfg(max_b: f64) -> DriverConfig {
    DriverConfig {
        b_cap: max_b,
        ..Default::default()
    }
}

fn ipm_cfg(max_b: f64, long_step: bool) -> IpmDriverConfig {
    IpmDriverConfig {
        ipm: IpmConfig {
            schedule: if long_step { Schedule::LongStep } else { Schedule::ShortStep },
            ..Default::default()
        },
        b_cap: max_b,
        ..Default::default()
    }
}

fn baseline_cfg(eps: f64, max_sweeps: usize) -> BaselineConfig {
    BaselineConfig {
        max_sweeps,
        target_error: eps,
        ..Default::default()
    }
}

struct Params {
    eps: f64,
    max_b: f64,
    max_sweeps: usize,
    long_step: bool,
}

fn run_balance(a: &SparseMatrix, method: Method, p: &Params) -> Result<FactorsResult, Failure> {
    Ok(match method {
        Method::Newton => solve_balancing(a, p.eps, &newton_cfg(p.max_b))?,
        Method::Ipm => ipm_balance(a, p.eps, &ipm_cfg(p.max_b, p.long_step))?,
        Method::Osborne => osborne(a, &baseline_cfg(p.eps, p.max_sweeps))?,
        Method::Sinkhorn => return Err(input_error("sinkhorn applies to scaling only".into())),
    })
}

fn run_scale(a: &SparseMatrix, r: &[f64], c: &[f64], method: Method, p: &Params) -> Result<FactorsResult, Failure> {
    Ok(match method {
        Method::Newton => solve_scaling(a, r, c, p.eps, &newton_cfg(p.max_b))?,
        Method::Ipm => ipm_scale(a, r, c, p.eps, &ipm_cfg(p.max_b, p.long_step))?,
        Method::Sinkhorn => sinkhorn(a, r, c, &baseline_cfg(p.eps, p.max_sweeps))?,
        Method::Osborne => return Err(input_error("osborne applies to balancing only".into())),
    })
}

fn format_factors(res: &FactorsResult) -> String {
    let mut s = String::new();
    for v in res.factors.x.iter().chain(res.factors.y.iter().flatten()) {
        s.push_str(&format!("{v}\n"));
    }
    s
}

fn finish(args: &SolveArgs, a: &SparseMatrix, mut report: RunReport, res: FactorsResult, start: Instant) -> CmdResult {
    report.status = if res.converged { Status::Ok } else { Status::NotConverged };
    report.error = Some(res.error);
    report.kappa = Some(res.kappa);
    report.iterations = Some(res.iterations);
    report.notes = res.notes.clone();
    if args.trace {
        report.trace = Some(res.trace.clone());
    }
    if let Some(p) = &args.factors_out {
        write_file(p, |b| b.write_all(format_factors(&res).as_bytes()))?;
    }
    if let Some(p) = &args.matrix_out {
        let m = match &res.factors.y {
            Some(y) => a.apply_scaling(&res.factors.x, y)?,
            None => a.apply_balancing(&res.factors.x)?,
        };
        write_file(p, |b| write_matrix_market(&m, b).map_err(std::io::Error::other))?;
    }
    if !args.no_timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    write_report(args, &report)?;
    if !res.converged {
        eprintln!("matscale: did not reach eps = {:e} (error {:e})", args.eps, res.error);
        return Ok(EXIT_SOLVE);
    }
    Ok(0)
}

fn write_report(args: &SolveArgs, report: &RunReport) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| input_error(e.to_string()))?;
    text.push('\n');
    emit(args.out.as_deref(), &text)
}

fn params(a: &SolveArgs) -> Params {
    Params {
        eps: a.eps,
        max_b: a.max_b,
        max_sweeps: a.max_sweeps,
        long_step: a.ipm_long_step,
    }
}

fn blank_report(command: &'static str, info: InputInfo, args: &SolveArgs, t: Option<&Targets>) -> RunReport {
    RunReport {
        command,
        input: info,
        method: args.method.name(),
        config: config_echo(args, t),
        status: Status::Ok,
        error: None,
        kappa: None,
        iterations: None,
        wall_time_s: None,
        scalability: None,
        notes: Vec::new(),
        trace: None,
    }
}

pub fn balance(args: &SolveArgs) -> CmdResult {
    let start = Instant::now();
    let (a, info) = load(&args.input)?;
    let report = blank_report("balance", info, args, None);
    let res = run_balance(&a, args.method, &params(args))?;
    finish(args, &a, report, res, start)
}

pub fn scale(args: &ScaleArgs) -> CmdResult {
    let start = Instant::now();
    let s = &args.solve;
    let (a, info) = load(&s.input)?;
    let (r, c) = targets(&args.targets, a.n())?;
    let mut report = blank_report("scale", info, s, Some(&args.targets));
    let sc = check_scalable(&a, &r, &c)?;
    report.scalability = Some(sc.clone());
    if let Scalability::Infeasible { rows, cols } = &sc {
        report.status = Status::Infeasible;
        report.notes.push(format!(
            "zero minor on rows {rows:?} and columns {cols:?}: the other rows supply less than these columns demand"
        ));
        write_report(s, &report)?;
        return Err(Failure {
            code: EXIT_SOLVE,
            message: format!("not scalable: zero minor rows {rows:?} x cols {cols:?}"),
        });
    }
    let res = run_scale(&a, &r, &c, s.method, &params(s))?;
    finish(s, &a, report, res, start)
}

pub fn compare(args: &CompareArgs) -> CmdResult {
    let (a, _) = load(&args.input)?;
    let tv = match args.task {
        Task::Scale => Some(targets(&args.targets, a.n())?),
        Task::Balance => None,
    };
    let mut out = String::from("method,eps,iterations,error,time_s,status\n");
    let mut any_ok = false;
    for &method in &args.methods {
        for &eps in &args.eps {
            let p = Params {
                eps,
                max_b: args.max_b,
                max_sweeps: args.max_sweeps,
                long_step: false,
            };
            let start = Instant::now();
            let res = match &tv {
                Some((r, c)) => run_scale(&a, r, c, method, &p),
                None => run_balance(&a, method, &p),
            };
            let time = if args.no_timing {
                String::new()
            } else {
                format!("{:.6}", start.elapsed().as_secs_f64())
            };
            let row = match res {
                Ok(res) => {
                    any_ok = true;
                    let status = if res.converged { "ok" } else { "not_converged" };
                    format!("{},{eps:e},{},{:e},{time},{status}\n", method.name(), res.iterations, res.error)
                }
                Err(f) => format!("{},{eps:e},,,{time},\"failed: {}\"\n", method.name(), f.message.replace('"', "'")),
            };
            out.push_str(&row);
        }
    }
    emit(args.out.as_deref(), &out)?;
    Ok(if any_ok { 0 } else { EXIT_SOLVE })
}

pub fn check(args: &CheckArgs) -> CmdResult {
    let (a, info) = load(&args.input)?;
    let scalability = match (&args.rows, &args.cols) {
        (None, None) => None,
        (r, c) => {
            let t = Targets {
                rows: r.clone().unwrap_or_else(|| "uniform".into()),
                cols: c.clone().unwrap_or_else(|| "uniform".into()),
            };
            let (r, c) = targets(&t, a.n())?;
            Some(check_scalable(&a, &r, &c)?)
        }
    };
    let infeasible = matches!(scalability, Some(Scalability::Infeasible { .. }));
    let report = CheckReport {
        strongly_connected: info.strongly_connected_blocks == 1,
        input: info,
        scalability,
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| input_error(e.to_string()))?;
    text.push('\n');
    print!("{text}");
    Ok(if infeasible { EXIT_SOLVE } else { 0 })
}

pub fn generate(args: &GenerateArgs) -> CmdResult {
    if args.n < 2 {
        return Err(input_error("n must be at least 2".into()));
    }
    let mut rng = gen::rng(args.seed);
    let m = if args.m == 0 { 4 * args.n } else { args.m };
    let a = match args.kind {
        Kind::StronglyConnected => gen::strongly_connected(&mut rng, args.n, m, args.spread),
        Kind::Matching => gen::with_matching(&mut rng, args.n, m, args.spread),
        Kind::Positive => gen::positive(&mut rng, args.n, args.spread),
    };
    let mut buf = Vec::new();
    write_matrix_market(&a, &mut buf)?;
    emit(args.out.as_deref(), &String::from_utf8_lossy(&buf))?;
    Ok(0)
}
