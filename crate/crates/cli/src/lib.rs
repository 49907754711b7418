//! Command-line front end for `shellavg-core`.
//!
//! [`run`] is the whole program minus process plumbing, so tests can drive
//! it with an argument vector and in-memory output streams.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use shellavg_core::averages::{average_energy, spin_average, two_electron_terms};
use shellavg_core::counting::{expand_generating, twice_projections, twice_spins};
use shellavg_core::numerics::QuadraticSum;
use shellavg_core::oracle::{coulomb_matrix, CoulombMatrix, DEFAULT_DIMENSION_CAP};
use shellavg_core::parametrization::{convert_form, e_to_f, f_to_e};
use shellavg_core::wigner::{sum_rule_clebsch_gordan, sum_rule_lhs, sum_rule_rhs};
use shellavg_core::{AomParams, Basis, EnergyForm, Error, Parity, ShellPair, SlaterParams};

pub mod verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "shellavg",
    version,
    about = "Exact spin counts, parameter transforms and average energies of l^N shells"
)]
struct Cli {
    /// key=value file whose entries act as flags; command-line flags win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Also print floating-point values (lossy).
    #[arg(long, global = true)]
    decimal: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// State counts by spin projection, total spin, or (M_S, M_L).
    Count(CountArgs),
    /// Convert parameter values between the F^(k) and E^lambda bases.
    Transform(TransformArgs),
    /// Average energy of a configuration, or of one spin multiplicity.
    Avg(AvgArgs),
    /// Term energies of two equivalent electrons.
    Terms(TermsArgs),
    /// Check the 3-jm sum rule for one argument quadruple or all of them.
    Sumrule(SumruleArgs),
    /// Run the invariant suite and print a JSON report.
    Verify(VerifyArgs),
    /// Write the Coulomb matrix in the determinant basis.
    EmitMatrix(EmitMatrixArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CountBy {
    Spin,
    Ms,
    Msml,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BasisArg {
    E,
    F,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Basis {
        match b {
            BasisArg::E => Basis::E,
            BasisArg::F => Basis::F,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SumruleMethod {
    ThreeJ,
    ClebschGordan,
}

/// Orbital angular momentum from an integer or a letter `s p d f g h i`.
pub fn parse_shell(s: &str) -> Result<u32, String> {
    const LETTERS: &str = "spdfghi";
    let t = s.trim();
    if let Ok(v) = t.parse::<u32>() {
        return Ok(v);
    }
    let mut chars = t.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => LETTERS
            .find(c.to_ascii_lowercase())
            .map(|i| i as u32)
            .ok_or_else(|| format!("unknown shell letter {c:?} (expected one of s p d f g h i)")),
        _ => Err(format!(
            "invalid shell {s:?}: expected an integer or one of s p d f g h i"
        )),
    }
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct CountArgs {
    #[arg(long, value_parser = parse_shell)]
    ell: u32,
    #[arg(long)]
    n: u32,
    #[arg(long, value_enum, default_value = "both")]
    by: CountBy,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct TransformArgs {
    #[arg(long, value_parser = parse_shell)]
    ell: u32,
    /// Second shell for cross-shell parameters (defaults to --ell).
    #[arg(long, value_parser = parse_shell)]
    ell_prime: Option<u32>,
    /// Basis of the input values.
    #[arg(long, value_enum, ignore_case = true)]
    from: Option<BasisArg>,
    /// Comma-separated values in index order, e.g. `1,0` or `1/2,sqrt(3)`.
    #[arg(long, conflicts_with = "input")]
    values: Option<String>,
    /// JSON file {"ell", "ell_prime", "basis", "values": {label: value}}.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct AvgArgs {
    #[arg(long, value_parser = parse_shell)]
    ell: u32,
    #[arg(long)]
    n: u32,
    /// Twice the total spin, 2S.
    #[arg(long, value_name = "2S")]
    spin: Option<u32>,
    #[arg(long, value_enum, default_value = "e", ignore_case = true)]
    basis: BasisArg,
    /// Parameter values, e.g. `sigma=1,pi=1/2` (or `F0=...,F2=...` with --basis f).
    #[arg(long)]
    eval: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct TermsArgs {
    #[arg(long, value_parser = parse_shell)]
    ell: u32,
    #[arg(long, value_enum, default_value = "e", ignore_case = true)]
    basis: BasisArg,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct SumruleArgs {
    #[arg(long, value_parser = parse_shell)]
    ell: u32,
    #[arg(long, value_parser = parse_parity)]
    parity: Parity,
    /// `m,m',mu,mu'`; every quadruple is checked when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    args: Option<Vec<i32>>,
    #[arg(long, value_enum, default_value = "three-j")]
    method: SumruleMethod,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct VerifyArgs {
    /// Largest shell for the full suites.
    #[arg(long, default_value_t = 3)]
    max_ell: u32,
    /// Largest electron count for the oracle suites, or `all`.
    #[arg(long, default_value = "all")]
    max_n: String,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct EmitMatrixArgs {
    #[arg(long, value_parser = parse_shell)]
    ell: u32,
    #[arg(long)]
    n: u32,
    #[arg(long, value_enum, default_value = "e", ignore_case = true)]
    basis: BasisArg,
    /// Restrict to one 2M_S block.
    #[arg(long, value_name = "2MS", allow_hyphen_values = true)]
    ms: Option<i32>,
    #[arg(long, default_value_t = DEFAULT_DIMENSION_CAP)]
    max_dim: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn parse_parity(s: &str) -> Result<Parity, String> {
    s.parse()
        .map_err(|_| format!("invalid parity {s:?}: expected even or odd"))
}

fn parse_max_n(s: &str) -> Result<Option<u32>, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| format!("invalid --max-n {s:?}"))
}

/// What went wrong, and which exit code it maps to.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Check(format!("i/o error: {e}"))
    }
}

type CmdResult = Result<i32, Failure>;

/// Runs the program on `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let argv = match apply_config(argv) {
        Ok(a) => a,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Check(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

/// Splices `--config` entries into `argv` right after the subcommand, so
/// that flags given explicitly later on the command line override them.
fn apply_config(argv: Vec<String>) -> Result<Vec<String>, String> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    let program = it.next().unwrap_or_else(|| "shellavg".to_string());
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or("--config needs a path")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let mut out = vec![program];
    let Some(path) = path else {
        out.extend(rest);
        return Ok(out);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let mut flags = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{path}:{}: expected key=value", no + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        match value {
            "true" => flags.push(format!("--{key}")),
            "false" => {}
            _ => {
                flags.push(format!("--{key}"));
                flags.push(value.to_string());
            }
        }
    }
    let at = rest
        .iter()
        .position(|a| !a.starts_with('-'))
        .map_or(rest.len(), |i| i + 1);
    out.extend(rest[..at].iter().cloned());
    out.extend(flags);
    out.extend(rest[at..].iter().cloned());
    Ok(out)
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> CmdResult {
    match &cli.command {
        Command::Count(a) => count(a, out),
        Command::Transform(a) => transform(a, cli.decimal, out),
        Command::Avg(a) => avg(a, cli.decimal, out),
        Command::Terms(a) => terms(a, cli.decimal, out),
        Command::Sumrule(a) => sumrule(a, out),
        Command::Verify(a) => {
            let max_n = parse_max_n(&a.max_n).map_err(Failure::Usage)?;
            let report = verify::run_suite(&verify::Options {
                max_ell: a.max_ell,
                max_n,
            });
            write_json(out, &report.to_json())?;
            Ok(if report.passed() {
                EXIT_OK
            } else {
                EXIT_FAILURE
            })
        }
        Command::EmitMatrix(a) => emit_matrix(a, out),
    }
}

fn unsupported(command: &str, format: Format) -> Failure {
    Failure::Usage(format!("{command} does not support --format {format:?}").to_lowercase())
}

fn write_json(out: &mut dyn Write, v: &Value) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    writeln!(out, "{text}")
}

fn twice_to_half(t: i32) -> String {
    if t % 2 == 0 {
        (t / 2).to_string()
    } else {
        format!("{t}/2")
    }
}

fn count(a: &CountArgs, out: &mut dyn Write) -> CmdResult {
    let table = expand_generating(a.ell)?;
    shellavg_core::counting::ShellConfig::new(a.ell, a.n)?;
    let n = a.n;
    let by_ms: Vec<(i32, u64)> = twice_projections(n).map(|t| (t, table.g(n, t))).collect();
    let by_spin: Vec<(u32, u64)> = twice_spins(n).map(|t| (t, table.h(n, t))).collect();
    let mut msml: Vec<(i32, i32, u64)> = table.entries(n);
    msml.sort_by(|x, y| y.0.cmp(&x.0).then(y.1.cmp(&x.1)));
    let (want_ms, want_spin, want_msml) = match a.by {
        CountBy::Spin => (false, true, false),
        CountBy::Ms => (true, false, false),
        CountBy::Msml => (false, false, true),
        CountBy::Both => (true, true, false),
    };
    match a.format {
        Format::Json => {
            let mut obj = Map::new();
            obj.insert("ell".into(), json!(a.ell));
            obj.insert("n".into(), json!(n));
            obj.insert("total".into(), json!(table.total(n)));
            if want_ms {
                let rows: Vec<Value> = by_ms
                    .iter()
                    .map(|&(t, c)| json!({"twice_ms": t, "MS": twice_to_half(t), "count": c}))
                    .collect();
                obj.insert("by_ms".into(), Value::Array(rows));
            }
            if want_spin {
                let rows: Vec<Value> = by_spin
                    .iter()
                    .map(|&(t, c)| json!({"twice_s": t, "S": twice_to_half(t as i32), "count": c}))
                    .collect();
                obj.insert("by_spin".into(), Value::Array(rows));
            }
            if want_msml {
                let rows: Vec<Value> = msml
                    .iter()
                    .map(|&(t, ml, c)| json!({"twice_ms": t, "ml": ml, "count": c}))
                    .collect();
                obj.insert("by_ms_ml".into(), Value::Array(rows));
            }
            write_json(out, &Value::Object(obj))?;
        }
        Format::Csv => {
            let mut blocks = Vec::new();
            if want_ms {
                let mut s = String::from("N,2MS,count\n");
                for (t, c) in &by_ms {
                    s.push_str(&format!("{n},{t},{c}\n"));
                }
                blocks.push(s);
            }
            if want_spin {
                let mut s = String::from("N,2S,count\n");
                for (t, c) in &by_spin {
                    s.push_str(&format!("{n},{t},{c}\n"));
                }
                blocks.push(s);
            }
            if want_msml {
                let mut s = String::from("N,2MS,ML,count\n");
                for (t, ml, c) in &msml {
                    s.push_str(&format!("{n},{t},{ml},{c}\n"));
                }
                blocks.push(s);
            }
            write!(out, "{}", blocks.join("\n"))?;
        }
        Format::Text => return Err(unsupported("count", a.format)),
    }
    Ok(EXIT_OK)
}

fn parse_value(s: &str) -> Result<QuadraticSum, Failure> {
    s.trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("cannot parse {s:?} as an exact value")))
}

fn parse_list(s: &str) -> Result<Vec<QuadraticSum>, Failure> {
    s.split(',').map(parse_value).collect()
}

/// Reads the transform input file; returns the pair, basis and values keyed
/// by parameter index.
fn read_transform_input(
    path: &PathBuf,
) -> Result<(ShellPair, Basis, BTreeMap<u32, QuadraticSum>), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}: invalid JSON: {e}", path.display())))?;
    let field = |k: &str| {
        v.get(k)
            .ok_or_else(|| Failure::Usage(format!("input lacks {k:?}")))
    };
    let as_shell = |x: &Value| -> Result<u32, Failure> {
        match x {
            Value::Number(n) => n
                .as_u64()
                .map(|n| n as u32)
                .ok_or_else(|| Failure::Usage(format!("invalid shell {n}"))),
            Value::String(s) => parse_shell(s).map_err(Failure::Usage),
            _ => Err(Failure::Usage(format!("invalid shell {x}"))),
        }
    };
    let ell = as_shell(field("ell")?)?;
    let ell_prime = match v.get("ell_prime") {
        Some(x) => as_shell(x)?,
        None => ell,
    };
    let basis = match field("basis")?.as_str() {
        Some("E") | Some("e") => Basis::E,
        Some("F") | Some("f") => Basis::F,
        other => return Err(Failure::Usage(format!("invalid basis {other:?}"))),
    };
    let entries = field("values")?
        .as_object()
        .ok_or_else(|| Failure::Usage("\"values\" must be an object".into()))?;
    let mut values = BTreeMap::new();
    for (label, x) in entries {
        let index = basis.parse_label(label)?;
        let value = match x {
            Value::String(s) => parse_value(s)?,
            Value::Number(n) => parse_value(&n.to_string())?,
            _ => return Err(Failure::Usage(format!("invalid value for {label}"))),
        };
        values.insert(index, value);
    }
    Ok((ShellPair::new(ell, ell_prime), basis, values))
}

fn transform(a: &TransformArgs, decimal: bool, out: &mut dyn Write) -> CmdResult {
    let (pair, basis, values) = match (&a.input, &a.values) {
        (Some(path), _) => {
            let (pair, basis, values) = read_transform_input(path)?;
            if a.from.is_some_and(|f| Basis::from(f) != basis) {
                return Err(Failure::Usage(
                    "--from disagrees with the input file".into(),
                ));
            }
            (pair, basis, values)
        }
        (None, Some(list)) => {
            let from = a
                .from
                .ok_or_else(|| Failure::Usage("--values needs --from".into()))?;
            let pair = ShellPair::new(a.ell, a.ell_prime.unwrap_or(a.ell));
            let basis = Basis::from(from);
            let indices = match basis {
                Basis::E => pair.lambdas(),
                Basis::F => pair.allowed_k(),
            };
            let list = parse_list(list)?;
            if list.len() != indices.len() {
                return Err(Failure::Usage(format!(
                    "expected {} values ({}), got {}",
                    indices.len(),
                    indices
                        .iter()
                        .map(|&i| basis.label(i))
                        .collect::<Vec<_>>()
                        .join(","),
                    list.len()
                )));
            }
            (pair, basis, indices.into_iter().zip(list).collect())
        }
        (None, None) => return Err(Failure::Usage("give --values or --input".into())),
    };
    let (target, result) = match basis {
        Basis::F => (
            Basis::E,
            f_to_e(&SlaterParams::new(pair, values)?)?.values().clone(),
        ),
        Basis::E => (
            Basis::F,
            e_to_f(&AomParams::new(pair, values)?)?.values().clone(),
        ),
    };
    match a.format {
        Format::Json => {
            let mut vals = Map::new();
            let mut decimals = Map::new();
            for (&i, v) in &result {
                vals.insert(target.label(i), json!(v.to_string()));
                decimals.insert(target.label(i), json!(v.to_f64()));
            }
            let mut obj = Map::new();
            obj.insert("ell".into(), json!(pair.ell));
            obj.insert("ell_prime".into(), json!(pair.ell_prime));
            obj.insert("basis".into(), json!(target.to_string()));
            obj.insert("values".into(), Value::Object(vals));
            if decimal {
                obj.insert("decimal".into(), Value::Object(decimals));
            }
            write_json(out, &Value::Object(obj))?;
        }
        Format::Text => {
            for (&i, v) in &result {
                if decimal {
                    writeln!(out, "{} = {v} ~ {}", target.label(i), v.to_f64())?;
                } else {
                    writeln!(out, "{} = {v}", target.label(i))?;
                }
            }
        }
        Format::Csv => {
            writeln!(out, "label,value")?;
            for (&i, v) in &result {
                writeln!(out, "{},{v}", target.label(i))?;
            }
        }
    }
    Ok(EXIT_OK)
}

/// `{"basis": "E", "coeffs": {"sigma": "1/2", ...}}`.
pub fn form_to_json(form: &EnergyForm) -> Value {
    let mut coeffs = Map::new();
    for (i, c) in form.coeffs() {
        coeffs.insert(form.basis().label(i), json!(c.to_string()));
    }
    json!({"basis": form.basis().to_string(), "coeffs": Value::Object(coeffs)})
}

fn parse_assignments(s: &str, basis: Basis) -> Result<BTreeMap<u32, QuadraticSum>, Failure> {
    let mut values = BTreeMap::new();
    for item in s.split(',').filter(|x| !x.trim().is_empty()) {
        let (label, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("expected label=value, got {item:?}")))?;
        values.insert(basis.parse_label(label.trim())?, parse_value(value)?);
    }
    Ok(values)
}

fn avg(a: &AvgArgs, decimal: bool, out: &mut dyn Write) -> CmdResult {
    let form = match a.spin {
        Some(ts) => spin_average(a.ell, a.n, ts)?,
        None => average_energy(a.ell, a.n)?,
    };
    let basis = Basis::from(a.basis);
    let form = convert_form(&form, basis)?;
    let value = match &a.eval {
        Some(list) => {
            let values = parse_assignments(list, basis)?;
            let missing: Vec<String> = basis
                .indices(a.ell)
                .into_iter()
                .filter(|i| !values.contains_key(i))
                .map(|i| basis.label(i))
                .collect();
            if !missing.is_empty() {
                return Err(Failure::Usage(format!(
                    "--eval lacks {}",
                    missing.join(", ")
                )));
            }
            Some(form.evaluate(&values))
        }
        None => None,
    };
    match a.format {
        Format::Text => {
            writeln!(out, "{form}")?;
            if let Some(v) = &value {
                writeln!(out, "= {v}")?;
                writeln!(out, "~ {}", v.to_f64())?;
            }
        }
        Format::Json => {
            let mut obj = form_to_json(&form);
            if let Some(v) = &value {
                obj["value"] = json!(v.to_string());
                if decimal {
                    obj["decimal"] = json!(v.to_f64());
                }
            }
            write_json(out, &obj)?;
        }
        Format::Csv => return Err(unsupported("avg", a.format)),
    }
    Ok(EXIT_OK)
}

fn terms(a: &TermsArgs, decimal: bool, out: &mut dyn Write) -> CmdResult {
    let basis = Basis::from(a.basis);
    let rows: Vec<(String, EnergyForm)> = two_electron_terms(a.ell)?
        .into_iter()
        .map(|(t, f)| convert_form(&f, basis).map(|f| (t.to_string(), f)))
        .collect::<Result<_, _>>()?;
    match a.format {
        Format::Text => {
            let width = rows.iter().map(|(t, _)| t.len()).max().unwrap_or(0);
            for (t, f) in &rows {
                writeln!(out, "{t:<width$}  {f}")?;
            }
        }
        Format::Json => {
            let list: Vec<Value> = rows
                .iter()
                .map(|(t, f)| json!({"term": t, "energy": form_to_json(f)}))
                .collect();
            write_json(out, &json!({"ell": a.ell, "terms": list}))?;
        }
        Format::Csv => {
            let indices = basis.indices(a.ell);
            let header: Vec<String> = indices.iter().map(|&i| basis.label(i)).collect();
            writeln!(out, "term,{}", header.join(","))?;
            for (t, f) in &rows {
                let cells: Vec<String> = indices
                    .iter()
                    .map(|&i| {
                        let c = f.coeff(i);
                        if decimal {
                            c.to_f64().to_string()
                        } else {
                            c.to_string()
                        }
                    })
                    .collect();
                writeln!(out, "{t},{}", cells.join(","))?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn sumrule(a: &SumruleArgs, out: &mut dyn Write) -> CmdResult {
    let lhs = |q: [i32; 4]| match a.method {
        SumruleMethod::ThreeJ => sum_rule_lhs(a.ell, a.parity, q[0], q[1], q[2], q[3]),
        SumruleMethod::ClebschGordan => {
            sum_rule_clebsch_gordan(a.ell, a.parity, q[0], q[1], q[2], q[3])
        }
    };
    if let Some(args) = &a.args {
        let q: [i32; 4] = args.as_slice().try_into().map_err(|_| {
            Failure::Usage(format!(
                "--args needs 4 values m,m',mu,mu', got {}",
                args.len()
            ))
        })?;
        let left = lhs(q)?;
        let right = sum_rule_rhs(a.parity, q[0], q[1], q[2], q[3]);
        let pass = left == right;
        match a.format {
            Format::Json => write_json(
                out,
                &json!({
                    "ell": a.ell,
                    "parity": a.parity.to_string(),
                    "args": q,
                    "lhs": left.to_string(),
                    "rhs": right.to_string(),
                    "pass": pass,
                }),
            )?,
            Format::Text => {
                writeln!(out, "LHS {left}")?;
                writeln!(out, "RHS {right}")?;
                writeln!(out, "{}", if pass { "PASS" } else { "FAIL" })?;
            }
            Format::Csv => return Err(unsupported("sumrule", a.format)),
        }
        return Ok(if pass { EXIT_OK } else { EXIT_FAILURE });
    }
    let l = a.ell as i32;
    let mut checked = 0u64;
    let mut failures = Vec::new();
    for m in -l..=l {
        for mp in -l..=l {
            for mu in -l..=l {
                for mup in -l..=l {
                    let q = [m, mp, mu, mup];
                    let left = lhs(q)?;
                    let right = sum_rule_rhs(a.parity, m, mp, mu, mup);
                    checked += 1;
                    if left != right {
                        failures.push((q, left, right));
                    }
                }
            }
        }
    }
    let pass = failures.is_empty();
    match a.format {
        Format::Json => {
            let list: Vec<Value> = failures
                .iter()
                .map(|(q, l, r)| json!({"args": q, "lhs": l.to_string(), "rhs": r.to_string()}))
                .collect();
            write_json(
                out,
                &json!({
                    "ell": a.ell,
                    "parity": a.parity.to_string(),
                    "checked": checked,
                    "failures": list,
                    "pass": pass,
                }),
            )?;
        }
        Format::Text => {
            for (q, l, r) in &failures {
                writeln!(out, "FAIL {q:?}: LHS {l}, RHS {r}")?;
            }
            writeln!(
                out,
                "checked {checked} quadruples, {} failures",
                failures.len()
            )?;
            writeln!(out, "{}", if pass { "PASS" } else { "FAIL" })?;
        }
        Format::Csv => return Err(unsupported("sumrule", a.format)),
    }
    Ok(if pass { EXIT_OK } else { EXIT_FAILURE })
}

fn matrix_json(m: &CoulombMatrix, basis: Basis, twice_ms: Option<i32>) -> Value {
    let elements: Vec<Value> = m
        .elements
        .iter()
        .map(|(&(i, j), f)| {
            let coeffs = form_to_json(f)["coeffs"].clone();
            json!({"row": i, "col": j, "coeffs": coeffs})
        })
        .collect();
    json!({
        "ell": m.ell,
        "n": m.n,
        "twice_ms": twice_ms,
        "basis": basis.to_string(),
        "parameters": basis.indices(m.ell).into_iter().map(|i| basis.label(i)).collect::<Vec<_>>(),
        "dimension": m.dimension(),
        "determinants": m.determinants.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "elements": elements,
    })
}

fn matrix_csv(m: &CoulombMatrix, basis: Basis) -> String {
    let indices = basis.indices(m.ell);
    let labels: Vec<String> = indices.iter().map(|&i| basis.label(i)).collect();
    let mut s = format!("row,col,{}\n", labels.join(","));
    for (&(i, j), f) in &m.elements {
        let cells: Vec<String> = indices.iter().map(|&k| f.coeff(k).to_string()).collect();
        s.push_str(&format!("{i},{j},{}\n", cells.join(",")));
    }
    s
}

fn emit_matrix(a: &EmitMatrixArgs, out: &mut dyn Write) -> CmdResult {
    let basis = Basis::from(a.basis);
    let matrix = coulomb_matrix(a.ell, a.n, a.ms, a.max_dim)?.to_basis(basis)?;
    let body = match a.format {
        Format::Json => {
            let text = serde_json::to_string_pretty(&matrix_json(&matrix, basis, a.ms))
                .expect("JSON values always serialize");
            text + "\n"
        }
        Format::Csv => matrix_csv(&matrix, basis),
        Format::Text => return Err(unsupported("emit-matrix", a.format)),
    };
    match &a.out {
        Some(path) => {
            fs::write(path, body)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            writeln!(
                out,
                "wrote {d}x{d} matrix ({} nonzero elements) to {}",
                matrix.elements.len(),
                path.display(),
                d = matrix.dimension()
            )?;
        }
        None => write!(out, "{body}")?,
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("shellavg").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn shell_letters() {
        assert_eq!(parse_shell("f"), Ok(3));
        assert_eq!(parse_shell("F"), Ok(3));
        assert_eq!(parse_shell("7"), Ok(7));
        assert!(parse_shell("x").is_err());
        assert!(parse_shell("pd").is_err());
    }

    #[test]
    fn config_entries_follow_the_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        fs::write(
            &path,
            "# shell\nell = d\nmax_dim=10\ndecimal=true\nquiet=false\n",
        )
        .unwrap();
        let argv: Vec<String> = [
            "shellavg",
            "--config",
            path.to_str().unwrap(),
            "avg",
            "--n",
            "2",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let spliced = apply_config(argv).unwrap();
        assert_eq!(
            spliced,
            [
                "shellavg",
                "avg",
                "--ell",
                "d",
                "--max-dim",
                "10",
                "--decimal",
                "--n",
                "2"
            ]
        );
    }

    #[test]
    fn avg_example() {
        let (code, out, _) = run_capture(&["avg", "--ell", "p", "--n", "2", "--spin", "2"]);
        assert_eq!(code, 0);
        assert_eq!(out, "E^pi\n");
    }

    #[test]
    fn bad_shell_is_a_usage_error() {
        let (code, _, err) = run_capture(&["count", "--ell", "q", "--n", "2"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("shell"));
    }
}
