//! The `costcap` command line.
//!
//! Every command writes CSV with a header row to standard output. Failures
//! print one line `error,<code>,<message>` to standard error and exit with
//! status 1; usage errors exit with status 2. Numbers carry 12 significant
//! digits.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::capacity::CapacityModel;
use crate::counting::{
    asymptotic_fixed_length, count_fixed, count_table, count_totals, denominator_and_numerator,
    exact_expansion, ln_biguint,
};
use crate::error::{Error, Result};
use crate::graph::{parse_graph, ChannelGraph};
use crate::par::{self, Execution};
use crate::spectral::{cost_matrix, perron};
use crate::structure::{analyze_structure, format_rational};
use crate::synthesis::{
    builtin_constraint, label_product, period_alphabet, shared_alphabet, synthesis_capacity_fixed,
    synthesis_graph, synthesis_sweep, SynthesisSpec,
};

#[derive(Debug, Parser)]
#[command(
    name = "costcap",
    version,
    about = "Capacity analysis of costly constrained channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Sweep {
    /// Evaluate sweeps on one thread
    #[arg(long)]
    pub sequential: bool,
    /// Worker threads for sweeps (0 = all cores)
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

impl Sweep {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Period, cost-period and coboundary data
    Analyze { file: PathBuf },
    /// Perron data of P(x)
    Spectral {
        file: PathBuf,
        #[arg(long)]
        x: f64,
    },
    /// Variable-length capacity and thresholds
    Capacity { file: PathBuf },
    /// Capacity-cost curve or a single C(alpha)
    Curve {
        file: PathBuf,
        #[arg(long, default_value_t = 100, conflicts_with = "alpha")]
        samples: usize,
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        sweep: Sweep,
    },
    /// Exact follower counts N(t, n) or N(t)
    Count {
        file: PathBuf,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        n: Option<usize>,
        /// Start vertex name (default: the graph's start, else the first vertex)
        #[arg(long)]
        start: Option<String>,
        /// Emit every t from 0 to T
        #[arg(long)]
        all: bool,
    },
    /// Closed-form expansion of N(t)
    Exact {
        file: PathBuf,
        #[arg(long)]
        start: Option<String>,
        /// Print H(x) and Q(x) instead of the expansion terms
        #[arg(long)]
        polynomials: bool,
    },
    /// Leading-order asymptotics of N(t, n)
    Asympt {
        file: PathBuf,
        #[arg(long)]
        t: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        start: Option<String>,
        /// Skip the exact DP comparison
        #[arg(long)]
        no_dp: bool,
    },
    /// Synthesis capacities of periodic sequences
    Synth {
        /// Period string; repeat for a sweep
        #[arg(long, required = true)]
        period: Vec<String>,
        /// Builtin constraint: identity, max-run:S:k or min-run:S:k
        #[arg(long, conflicts_with = "constraint_file")]
        constraint: Option<String>,
        #[arg(long)]
        constraint_file: Option<PathBuf>,
        #[arg(long, conflicts_with = "curve")]
        alpha: Option<f64>,
        #[arg(long)]
        curve: Option<usize>,
        #[command(flatten)]
        sweep: Sweep,
    },
    /// Label product of a channel and a constraint graph
    Product {
        channel: PathBuf,
        constraint: PathBuf,
    },
}

/// Formats with 12 significant digits, trailing zeros removed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..12).contains(&mag) {
        let decimals = (11 - mag).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.11e}");
        let (mant, exp) = s.split_once('e').unwrap();
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{exp}")
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn read_graph(path: &Path) -> Result<ChannelGraph> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_graph(&text)
}

fn resolve_start(g: &ChannelGraph, name: Option<&str>) -> Result<usize> {
    match name {
        Some(n) => g
            .vertex_index(n)
            .ok_or_else(|| Error::Domain(format!("unknown start vertex {n}"))),
        None => Ok(g.start().unwrap_or(0)),
    }
}

struct Out<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Out<'_> {
    fn row(&mut self, fields: &[&str]) -> Result<()> {
        writeln!(self.out, "{}", fields.join(",")).map_err(|e| Error::Io(e.to_string()))
    }

    fn warn(&mut self, code: &str, msg: &str) {
        let _ = writeln!(self.err, "warning,{code},{}", msg.replace(',', ";"));
    }
}

/// Parses `argv` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn main_with_args<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    let mut o = Out { out, err };
    match run(&cli.command, &mut o) {
        Ok(()) => 0,
        Err(e) => {
            let full = e.to_string();
            let msg = full
                .strip_prefix(&format!("{}: ", e.code()))
                .unwrap_or(&full)
                .replace(['\n', ','], ";");
            let _ = writeln!(o.err, "error,{},{msg}", e.code());
            1
        }
    }
}

pub fn run_command(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    run(cmd, &mut Out { out, err })
}

fn run(cmd: &Command, o: &mut Out) -> Result<()> {
    match cmd {
        Command::Analyze { file } => analyze(&read_graph(file)?, o),
        Command::Spectral { file, x } => spectral(&read_graph(file)?, *x, o),
        Command::Capacity { file } => capacity(&read_graph(file)?, o),
        Command::Curve {
            file,
            samples,
            alpha,
            sweep,
        } => curve(&read_graph(file)?, *samples, *alpha, sweep, o),
        Command::Count {
            file,
            t,
            n,
            start,
            all,
        } => count(&read_graph(file)?, *t, *n, start.as_deref(), *all, o),
        Command::Exact {
            file,
            start,
            polynomials,
        } => exact(&read_graph(file)?, start.as_deref(), *polynomials, o),
        Command::Asympt {
            file,
            t,
            n,
            start,
            no_dp,
        } => asympt(&read_graph(file)?, *t, *n, start.as_deref(), *no_dp, o),
        Command::Synth {
            period,
            constraint,
            constraint_file,
            alpha,
            curve,
            sweep,
        } => synth(
            period,
            constraint.as_deref(),
            constraint_file.as_deref(),
            *alpha,
            *curve,
            sweep,
            o,
        ),
        Command::Product {
            channel,
            constraint,
        } => product(&read_graph(channel)?, &read_graph(constraint)?, o),
    }
}

fn analyze(g: &ChannelGraph, o: &mut Out) -> Result<()> {
    let r = analyze_structure(g)?;
    o.row(&["key", "value"])?;
    o.row(&["deterministic", &r.deterministic.to_string()])?;
    o.row(&["strongly_connected", &r.strongly_connected.to_string()])?;
    o.row(&["d", &r.period.to_string()])?;
    o.row(&["c", &r.cost_period.to_string()])?;
    o.row(&["cost_diverse", &r.cost_diverse.to_string()])?;
    o.row(&["zero_cost_cycle", &r.zero_cost_cycle.to_string()])?;
    o.row(&["b", &format_rational(&r.b)])?;
    for (v, b) in r.potentials.iter().enumerate() {
        o.row(&["B", g.vertex_name(v), &format_rational(b)])?;
    }
    Ok(())
}

fn spectral(g: &ChannelGraph, x: f64, o: &mut Out) -> Result<()> {
    let sp = perron(&cost_matrix(g), x)?;
    o.row(&["quantity", "vertex", "value"])?;
    o.row(&["x", "", &fmt_num(sp.x)])?;
    o.row(&["rho", "", &fmt_num(sp.rho)])?;
    o.row(&["rho_prime", "", &fmt_num(sp.rho_prime)])?;
    o.row(&["J", "", &fmt_num(sp.curvature)])?;
    for (v, u) in sp.u.iter().enumerate() {
        o.row(&["u", g.vertex_name(v), &fmt_num(*u)])?;
    }
    for (v, w) in sp.v.iter().enumerate() {
        o.row(&["v", g.vertex_name(v), &fmt_num(*w)])?;
    }
    Ok(())
}

fn capacity(g: &ChannelGraph, o: &mut Out) -> Result<()> {
    let m = CapacityModel::new(g)?;
    let vc = m.variable_length()?;
    o.row(&["key", "value"])?;
    o.row(&["C", &fmt_num(vc.capacity)])?;
    o.row(&["x0", &fmt_num(vc.x0)])?;
    o.row(&["alpha_lo", &fmt_num(m.alpha_lo())])?;
    o.row(&["alpha_up", &fmt_num(m.alpha_up())])?;
    o.row(&["alpha_star", &fmt_num(m.alpha_star()?)])?;
    Ok(())
}

fn curve(
    g: &ChannelGraph,
    samples: usize,
    alpha: Option<f64>,
    sweep: &Sweep,
    o: &mut Out,
) -> Result<()> {
    let m = CapacityModel::new(g)?;
    if let Some(a) = alpha {
        let f = m.fixed_length(a)?;
        if let Some(w) = &f.warning {
            o.warn("boundary", w);
        }
        o.row(&["alpha", "capacity", "x0"])?;
        return o.row(&[&fmt_num(a), &fmt_num(f.capacity), &opt_num(f.x0)]);
    }
    let c = par::with_threads(sweep.threads, || m.curve(samples, sweep.execution()))?;
    o.row(&["alpha", "capacity", "x0"])?;
    for p in &c.samples {
        o.row(&[&fmt_num(p.alpha), &fmt_num(p.capacity), &opt_num(p.x0)])?;
    }
    Ok(())
}

fn count(
    g: &ChannelGraph,
    t: usize,
    n: Option<usize>,
    start: Option<&str>,
    all: bool,
    o: &mut Out,
) -> Result<()> {
    let v = resolve_start(g, start)?;
    o.row(&["t", "n", "count"])?;
    match (n, all) {
        (Some(n), false) => {
            let c = count_fixed(g, v, t, n)?;
            o.row(&[&t.to_string(), &n.to_string(), &c.to_string()])
        }
        (Some(n), true) => {
            let tab = count_table(g, v, t, n)?;
            for tt in 0..=t {
                o.row(&[&tt.to_string(), &n.to_string(), &tab.get(tt, n).to_string()])?;
            }
            Ok(())
        }
        (None, _) => {
            let totals = count_totals(g, v, t)?;
            let from = if all { 0 } else { t };
            for (tt, c) in totals.iter().enumerate().skip(from) {
                o.row(&[&tt.to_string(), "", &c.to_string()])?;
            }
            Ok(())
        }
    }
}

fn exact(g: &ChannelGraph, start: Option<&str>, polynomials: bool, o: &mut Out) -> Result<()> {
    let v = resolve_start(g, start)?;
    if polynomials {
        let (h, q) = denominator_and_numerator(g, v)?;
        o.row(&["poly", "power", "coefficient"])?;
        for (name, p) in [("H", &h), ("Q", &q)] {
            for (k, c) in p.coeffs().iter().enumerate() {
                o.row(&[name, &k.to_string(), &c.to_string()])?;
            }
        }
        return Ok(());
    }
    let e = exact_expansion(g, v)?;
    o.row(&[
        "term",
        "root_re",
        "root_im",
        "multiplicity",
        "pole_order",
        "power",
        "coeff_re",
        "coeff_im",
    ])?;
    for (i, term) in e.terms.iter().enumerate() {
        let head = [
            i.to_string(),
            fmt_num(term.root.re),
            fmt_num(term.root.im),
            term.multiplicity.to_string(),
            term.pole_order.to_string(),
        ];
        if term.pi.is_empty() {
            o.row(&[
                &head[0], &head[1], &head[2], &head[3], &head[4], "", "0", "0",
            ])?;
        }
        for (k, c) in term.pi.iter().enumerate() {
            o.row(&[
                &head[0],
                &head[1],
                &head[2],
                &head[3],
                &head[4],
                &k.to_string(),
                &fmt_num(c.re),
                &fmt_num(c.im),
            ])?;
        }
    }
    Ok(())
}

/// Largest `t·n·|E|` for which `asympt` also runs the exact DP.
const DP_BUDGET: u64 = 200_000_000;

fn asympt(
    g: &ChannelGraph,
    t: u64,
    n: u64,
    start: Option<&str>,
    no_dp: bool,
    o: &mut Out,
) -> Result<()> {
    let v = resolve_start(g, start)?;
    let est = asymptotic_fixed_length(g, v, n, t)?;
    let dp = if !no_dp && t.saturating_mul(n).saturating_mul(g.edges().len() as u64) <= DP_BUDGET {
        Some(count_fixed(g, v, t as usize, n as usize)?)
    } else {
        None
    };
    o.row(&["key", "value"])?;
    o.row(&["regime", est.regime.as_str()])?;
    o.row(&["t", &t.to_string()])?;
    o.row(&["n", &n.to_string()])?;
    o.row(&["alpha", &fmt_num(est.alpha)])?;
    o.row(&["x0", &opt_num(est.x0)])?;
    o.row(&["estimate", &fmt_num(est.estimate)])?;
    o.row(&["ln_estimate", &fmt_num(est.ln_estimate)])?;
    o.row(&[
        "dp",
        &dp.as_ref().map(|d| d.to_string()).unwrap_or_default(),
    ])?;
    let ratio = dp.as_ref().and_then(|d| {
        if est.estimate == 0.0 {
            None
        } else if d.bits() == 0 {
            Some(0.0)
        } else {
            Some((ln_biguint(d) - est.ln_estimate).exp())
        }
    });
    o.row(&["ratio", &opt_num(ratio)])
}

fn synth(
    periods: &[String],
    constraint: Option<&str>,
    constraint_file: Option<&Path>,
    alpha: Option<f64>,
    curve_samples: Option<usize>,
    sweep: &Sweep,
    o: &mut Out,
) -> Result<()> {
    let specs = periods
        .iter()
        .map(|r| {
            let c = match (constraint, constraint_file) {
                (Some(name), _) => Some(builtin_constraint(name, &period_alphabet(r))?),
                (None, Some(path)) => Some(read_graph(path)?),
                (None, None) => None,
            };
            SynthesisSpec::new(r, c)
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(samples) = curve_samples {
        let [spec] = specs.as_slice() else {
            return Err(Error::Domain("--curve takes exactly one period".into()));
        };
        let g = synthesis_graph(spec)?
            .ok_or_else(|| Error::Synthesis("constrained product has no recurrent part".into()))?;
        let c = par::with_threads(sweep.threads, || {
            CapacityModel::new(&g).and_then(|m| m.curve(samples, sweep.execution()))
        })?;
        o.row(&["alpha", "capacity", "x0"])?;
        for p in &c.samples {
            o.row(&[&fmt_num(p.alpha), &fmt_num(p.capacity), &opt_num(p.x0)])?;
        }
        return Ok(());
    }
    if let Some(a) = alpha {
        let rows = par::with_threads(sweep.threads, || {
            par::map(sweep.execution(), &specs, |s| {
                synthesis_capacity_fixed(s, a)
            })
        });
        o.row(&["period", "alpha", "capacity", "x0"])?;
        for (s, r) in specs.iter().zip(rows) {
            let f = r?;
            if let Some(w) = &f.warning {
                o.warn("synthesis", &format!("{}: {w}", s.period));
            }
            o.row(&[&s.period, &fmt_num(a), &fmt_num(f.capacity), &opt_num(f.x0)])?;
        }
        return Ok(());
    }
    let rows = par::with_threads(sweep.threads, || synthesis_sweep(&specs, sweep.execution()));
    o.row(&["period", "capacity", "x0"])?;
    for (s, r) in specs.iter().zip(rows) {
        let c = r?;
        if let Some(w) = &c.warning {
            o.warn("synthesis", &format!("{}: {w}", s.period));
        }
        o.row(&[&s.period, &fmt_num(c.capacity), &opt_num(c.x0)])?;
    }
    Ok(())
}

fn product(g1: &ChannelGraph, g2: &ChannelGraph, o: &mut Out) -> Result<()> {
    if shared_alphabet(g1, g2).is_empty() {
        o.warn(
            "alphabet",
            "channel and constraint share no symbols; product has no edges",
        );
    }
    let p = label_product(g1, g2);
    write!(o.out, "{}", p.to_text()).map_err(|e| Error::Io(e.to_string()))
}
