//! Command-line front end: parameter sweeps over every channel class, with
//! CSV or JSON output and an ordering check on every row.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::bsc::{cf_bsc, BscGrids, BscParams, Theorem7Table};
use crate::discrete::{cf_and_prop4, cutset_primitive, PrimitiveChannel};
use crate::error::Error;
use crate::gaussian_primitive::{
    cf_product_form, cutset_product_form, df_product_form, prop5_bound, wu_bound,
    PrimitiveGaussianParams,
};
use crate::gaussian_relay::{
    compress_forward_gaussian, cutset_gaussian, decode_forward_gaussian, theorem2_bound,
    ScalarRelaySnr,
};
use crate::iid::{
    cf_time_sharing, cor10_estimate, cor10_gaussian_estimate, prop4_iid_gaussian,
    tu_bound_discrete, IidDiscreteChannel, IidGaussianParams,
};
use crate::optim::{linspace, SearchConfig};

/// Slack allowed when checking that lower bounds stay below upper bounds.
pub const ORDER_TOL: f64 = 1e-6;
/// Significant digits of every emitted number.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CHANNEL: i32 = 3;
pub const EXIT_SEARCH: i32 = 4;
pub const EXIT_ORDER: i32 = 5;

/// Points of the compress-forward test-channel scan for the binary relay.
const BSC_CF_POINTS: usize = 1001;

#[derive(Debug, Parser)]
#[command(name = "relaybound", version, about = "Capacity bounds for relay channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scalar Gaussian relay: cutset, auxiliary-variable bound, decode-forward, compress-forward.
    GaussianRelay(Common),
    /// Gaussian primitive relay with a noiseless link.
    GaussianPrimitive(Common),
    /// Symmetric binary primitive relay.
    Bsc(Common),
    /// Discrete primitive relay from a channel file.
    Discrete(Common),
    /// Gaussian relay whose relay output is i.i.d. noise.
    IidGaussian(Common),
    /// Discrete relay with i.i.d. relay output from a channel file.
    IidDiscrete(Common),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    s12: Option<f64>,
    #[arg(long)]
    s13: Option<f64>,
    #[arg(long)]
    s23: Option<f64>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Source power of the i.i.d. Gaussian relay.
    #[arg(long)]
    p: Option<f64>,
    /// Destination noise power of the i.i.d. Gaussian relay.
    #[arg(long)]
    n1: Option<f64>,
    /// Relay observation noise power of the i.i.d. Gaussian relay.
    #[arg(long)]
    nr: Option<f64>,
    /// Sweep as `var:start:stop:points`.
    #[arg(long, value_parser = parse_sweep)]
    sweep: Option<Sweep>,
    /// Channel file in JSON.
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Profile::Thorough)]
    search_profile: Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Profile {
    Fast,
    Thorough,
}

/// Parameter sweep `var:start:stop:points`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.points)
    }
}

pub fn parse_sweep(s: &str) -> std::result::Result<Sweep, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [variable, start, stop, points] = parts[..] else {
        return Err(format!("expected var:start:stop:points, got {s:?}"));
    };
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    let (start, stop) = (num(start)?, num(stop)?);
    let points: usize = points.parse().map_err(|e| format!("{points:?}: {e}"))?;
    if !(start.is_finite() && stop.is_finite() && start < stop) {
        return Err(format!("need finite start < stop, got {start} and {stop}"));
    }
    if points < 2 {
        return Err(format!("need at least 2 points, got {points}"));
    }
    Ok(Sweep {
        variable: variable.to_ascii_lowercase(),
        start,
        stop,
        points,
    })
}

/// Failure of a run, with its exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn channel(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CHANNEL,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain { .. } => EXIT_USAGE,
            Error::InvalidChannel(_) => EXIT_CHANNEL,
            _ => EXIT_SEARCH,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Result table: column names and rows of values in sweep order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// A lower-bound column that must not exceed an upper-bound column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Order {
    pub lower: &'static str,
    pub upper: &'static str,
}

/// Column pairs checked for each subcommand.
pub fn orderings(subcommand: &str) -> &'static [Order] {
    match subcommand {
        "gaussian-relay" => &[
            Order { lower: "cf", upper: "theorem2" },
            Order { lower: "df", upper: "theorem2" },
            Order { lower: "theorem2", upper: "cutset" },
        ],
        "gaussian-primitive" => &[
            Order { lower: "cf", upper: "prop5" },
            Order { lower: "df", upper: "prop5" },
            Order { lower: "cf", upper: "wu" },
            Order { lower: "df", upper: "wu" },
            Order { lower: "prop5", upper: "cutset" },
        ],
        "bsc" => &[Order { lower: "cf", upper: "theorem7" }],
        "discrete" => &[Order { lower: "cf", upper: "prop4" }, Order { lower: "prop4", upper: "cutset" }],
        "iid-gaussian" => &[
            Order { lower: "direct", upper: "cor10" },
            Order { lower: "cor10", upper: "prop4" },
            Order { lower: "prop4", upper: "ceiling" },
        ],
        "iid-discrete" => &[Order { lower: "cor10", upper: "tu" }, Order { lower: "cf", upper: "tu" }],
        _ => &[],
    }
}

/// Checks every ordering on every row; the error names the first violation.
pub fn check_order(table: &Table, orders: &[Order]) -> std::result::Result<(), String> {
    let col = |name: &str| table.columns.iter().position(|c| c == name);
    for (i, row) in table.rows.iter().enumerate() {
        if let Some(bad) = row.iter().position(|v| !v.is_finite()) {
            return Err(format!("row {i}: {} is not finite", table.columns[bad]));
        }
        for o in orders {
            let (Some(a), Some(b)) = (col(o.lower), col(o.upper)) else {
                continue;
            };
            if row[a] > row[b] + ORDER_TOL {
                return Err(format!(
                    "row {i}: {} = {} exceeds {} = {}",
                    o.lower,
                    fmt_num(row[a]),
                    o.upper,
                    fmt_num(row[b])
                ));
            }
        }
    }
    Ok(())
}

/// Formats with [`SIGNIFICANT_DIGITS`] significant digits, dropping trailing
/// zeros; scientific notation outside `[1e-5, 1e12)`.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn render(table: &Table, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(&table.columns.join(","));
            out.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        Format::Json => {
            out.push('[');
            for (i, row) in table.rows.iter().enumerate() {
                out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
                for (j, (c, &v)) in table.columns.iter().zip(row).enumerate() {
                    let sep = if j == 0 { "" } else { ", " };
                    write!(out, "{sep}\"{c}\": {}", fmt_num(v)).expect("string write");
                }
                out.push('}');
            }
            out.push_str("\n]\n");
        }
    }
    out
}

impl Common {
    fn config(&self) -> SearchConfig {
        match self.search_profile {
            Profile::Fast => SearchConfig::fast(),
            Profile::Thorough => SearchConfig::thorough(),
        }
        .with_seed(self.seed)
    }

    /// Values of the swept variable, or a single point without a column.
    fn points(&self, allowed: &[&str]) -> Result<(Option<String>, Vec<f64>), Failure> {
        match &self.sweep {
            None => Ok((None, vec![f64::NAN])),
            Some(s) if allowed.contains(&s.variable.as_str()) => {
                Ok((Some(s.variable.clone()), s.values()))
            }
            Some(s) => Err(Failure::usage(format!(
                "cannot sweep {} here; choose one of {}",
                s.variable,
                allowed.join(", ")
            ))),
        }
    }

    /// Value of `name` at one sweep point, or the fixed flag.
    fn value(&self, name: &str, swept: Option<&str>, x: f64) -> Result<f64, Failure> {
        if swept == Some(name) {
            return Ok(x);
        }
        let flag = match name {
            "s12" => self.s12,
            "s13" => self.s13,
            "s23" => self.s23,
            "c0" => self.c0,
            "rho" => self.rho,
            "p" => self.p,
            "n1" => self.n1,
            "nr" => self.nr,
            _ => None,
        };
        flag.ok_or_else(|| Failure::usage(format!("missing --{name}")))
    }

    fn channel_text(&self) -> Result<String, Failure> {
        let path = self.channel.as_ref().ok_or_else(|| Failure::usage("missing --channel"))?;
        std::fs::read_to_string(path)
            .map_err(|e| Failure::channel(format!("cannot read {}: {e}", path.display())))
    }
}

/// Evaluates `row` at every sweep point concurrently, keeping sweep order.
fn sweep_table<F>(swept: Option<String>, xs: Vec<f64>, names: &[&str], row: F) -> Result<Table, Failure>
where
    F: Fn(f64) -> Result<Vec<f64>, Failure> + Sync,
{
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| {
            let values = row(x)?;
            Ok(swept.iter().map(|_| x).chain(values).collect())
        })
        .collect::<Result<_, Failure>>()?;
    let columns = swept.iter().cloned().chain(names.iter().map(|s| s.to_string())).collect();
    Ok(Table { columns, rows })
}

fn gaussian_relay(a: &Common) -> Result<Table, Failure> {
    let cfg = a.config();
    let (swept, xs) = a.points(&["s12", "s13", "s23"])?;
    let v = swept.as_deref();
    sweep_table(swept.clone(), xs, &["cutset", "theorem2", "df", "cf"], |x| {
        let snr = ScalarRelaySnr::new(a.value("s12", v, x)?, a.value("s13", v, x)?, a.value("s23", v, x)?)?;
        Ok(vec![
            cutset_gaussian(&snr),
            theorem2_bound(&snr, &cfg)?,
            decode_forward_gaussian(&snr),
            compress_forward_gaussian(&snr),
        ])
    })
}

fn gaussian_primitive(a: &Common) -> Result<Table, Failure> {
    let (swept, xs) = a.points(&["s12", "s13", "s23", "c0"])?;
    let v = swept.as_deref();
    let link_is_snr = v == Some("s23") || (v != Some("c0") && a.s23.is_some());
    if link_is_snr && a.c0.is_some() && v != Some("s23") {
        return Err(Failure::usage("give either --s23 or --c0, not both"));
    }
    sweep_table(swept.clone(), xs, &["prop5", "wu", "cutset", "df", "cf"], |x| {
        let (s12, s13) = (a.value("s12", v, x)?, a.value("s13", v, x)?);
        let p = if link_is_snr {
            PrimitiveGaussianParams::from_s23(s12, s13, a.value("s23", v, x)?)?
        } else {
            PrimitiveGaussianParams::new(s12, s13, a.value("c0", v, x)?)?
        };
        Ok(vec![
            prop5_bound(&p),
            wu_bound(&p),
            cutset_product_form(&p),
            df_product_form(&p),
            cf_product_form(&p),
        ])
    })
}

fn bsc(a: &Common) -> Result<Table, Failure> {
    let grids = match a.search_profile {
        Profile::Fast => BscGrids::fast(),
        Profile::Thorough => BscGrids::default(),
    };
    let (swept, xs) = a.points(&["rho", "c0"])?;
    let v = swept.as_deref();
    // one envelope table serves every link capacity
    let shared = match v {
        Some("rho") => None,
        _ => {
            let rho = a.value("rho", v, f64::NAN)?;
            BscParams::new(rho, 0.0)?;
            Some(Theorem7Table::compute(rho, &grids)?)
        }
    };
    sweep_table(swept.clone(), xs, &["theorem7", "cf"], |x| {
        let params = BscParams::new(a.value("rho", v, x)?, a.value("c0", v, x)?)?;
        let (bound, _) = match &shared {
            Some(t) => t.best(params.c0),
            None => Theorem7Table::compute(params.rho, &grids)?.best(params.c0),
        };
        Ok(vec![bound, cf_bsc(&params, BSC_CF_POINTS)?])
    })
}

fn discrete(a: &Common) -> Result<Table, Failure> {
    let cfg = a.config();
    let base = PrimitiveChannel::from_json(&a.channel_text()?)?;
    let (swept, xs) = a.points(&["c0"])?;
    let v = swept.as_deref();
    sweep_table(swept.clone(), xs, &["cutset", "prop4", "cf"], |x| {
        let ch = match (v, a.c0) {
            (Some(_), _) => base.with_c0(x)?,
            (None, Some(c0)) => base.with_c0(c0)?,
            (None, None) => base.clone(),
        };
        let ((cf, _), (p4, _)) = cf_and_prop4(&ch, &cfg)?;
        Ok(vec![cutset_primitive(&ch), p4, cf])
    })
}

fn iid_gaussian(a: &Common) -> Result<Table, Failure> {
    let cfg = a.config();
    let (swept, xs) = a.points(&["p", "n1", "nr", "c0"])?;
    let v = swept.as_deref();
    sweep_table(swept.clone(), xs, &["prop4", "cor10", "direct", "ceiling"], |x| {
        let p = IidGaussianParams::new(
            a.value("p", v, x)?,
            a.value("n1", v, x)?,
            a.value("nr", v, x)?,
            a.value("c0", v, x)?,
        )?;
        let (cor10, _) = cor10_gaussian_estimate(&p, &cfg)?;
        Ok(vec![prop4_iid_gaussian(&p, &cfg)?, cor10, p.floor(), p.ceiling()])
    })
}

fn iid_discrete(a: &Common) -> Result<Table, Failure> {
    let cfg = a.config();
    let base = IidDiscreteChannel::from_json(&a.channel_text()?)?;
    let (swept, xs) = a.points(&["c0"])?;
    let v = swept.as_deref();
    sweep_table(swept.clone(), xs, &["tu", "cor10", "cf"], |x| {
        let ch = match (v, a.c0) {
            (Some(_), _) => base.with_c0(x)?,
            (None, Some(c0)) => base.with_c0(c0)?,
            (None, None) => base.clone(),
        };
        let (tu, _) = tu_bound_discrete(&ch, &cfg)?;
        let (cor10, _) = cor10_estimate(&ch, &cfg)?;
        Ok(vec![tu, cor10, cf_time_sharing(&ch, &cfg)?])
    })
}

/// Rendered output and the file it was written to, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub text: String,
    pub path: Option<PathBuf>,
}

/// Parses `argv` (program name first), evaluates and writes the output file
/// when `--out` is given.
pub fn run<I, T>(argv: I) -> Result<Emitted, Failure>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Failure {
        code: if e.use_stderr() { EXIT_USAGE } else { 0 },
        message: e.render().to_string(),
    })?;
    let (name, args, table) = match &cli.command {
        Command::GaussianRelay(a) => ("gaussian-relay", a, gaussian_relay(a)?),
        Command::GaussianPrimitive(a) => ("gaussian-primitive", a, gaussian_primitive(a)?),
        Command::Bsc(a) => ("bsc", a, bsc(a)?),
        Command::Discrete(a) => ("discrete", a, discrete(a)?),
        Command::IidGaussian(a) => ("iid-gaussian", a, iid_gaussian(a)?),
        Command::IidDiscrete(a) => ("iid-discrete", a, iid_discrete(a)?),
    };
    check_order(&table, orderings(name)).map_err(|message| Failure {
        code: EXIT_ORDER,
        message: format!("ordering violated at {message}"),
    })?;
    let text = render(&table, args.format);
    if let Some(path) = &args.out {
        std::fs::write(path, &text).map_err(|e| Failure {
            code: EXIT_USAGE,
            message: format!("cannot write {}: {e}", path.display()),
        })?;
    }
    Ok(Emitted {
        text,
        path: args.out.clone(),
    })
}
