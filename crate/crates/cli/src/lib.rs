//! The `kflow` command line: argument parsing, input handling and output
//! formatting around the `kflow` engine. [`run`] is the whole program; the
//! binary only wires it to the process.

use std::fmt::Write as _;
use std::io::Read;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kflow::fourier::{is_lattice_periodic, torus_demo};
use kflow::graphs::{evaluate_on, leibniz_redirect, GraphError};
use kflow::linalg::LinalgError;
use kflow::schouten::{jacobiator, SchoutenError};
use kflow::tetraflow::{flow, gamma1, gamma2, gamma2_skew, FlowSpec, Gamma2Table};
use kflow::trivialize::{assemble_system, build_ansatz_up_to, check_solution_for, solve, TrivializeError};
use kflow::{GraphSum, PolyVector, Rational, TrigPoly};

/// Tag identifying the structured output schema.
pub const FORMAT_TAG: &str = "kflow/v1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INCONSISTENT: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "kflow",
    version,
    about = "Exact computations for the tetrahedral flows on Poisson bivectors"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Which {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "2skew")]
    TwoSkew,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Γ₁, the full Γ₂ table or the skew part of Γ₂.
    Gamma {
        #[arg(long, value_enum)]
        which: Which,
        /// Dimension of the symbolic bivector (checked against --poisson).
        #[arg(long)]
        dim: Option<usize>,
        /// Bivector file in polyvector format ('-' for stdin).
        #[arg(long)]
        poisson: Option<String>,
    },
    /// The Jacobiator [[P, P]] of a bivector read from INPUT or stdin.
    Jacobiator { input: Option<String> },
    /// The flow a·Γ₁ + b·skew(Γ₂).
    Flow {
        #[arg(long, value_parser = parse_rational)]
        a: Rational,
        #[arg(long, value_parser = parse_rational)]
        b: Rational,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        poisson: Option<String>,
    },
    /// Solves the 2D conjugation equation by undetermined coefficients.
    Trivialize {
        /// Highest jet order allowed in the ansatz.
        #[arg(long, default_value_t = 5, value_parser = parse_max_order)]
        max_order: usize,
    },
    /// Residual [[X, P]] − Γ₁(P) of a vector field; exit 2 when nonzero.
    Check {
        /// Vector field file in polyvector format ('-' for stdin).
        #[arg(long)]
        field: String,
        /// Concrete bivector; the symbolic one of matching dimension otherwise.
        #[arg(long)]
        poisson: Option<String>,
    },
    /// Evaluates a graph sum read from INPUT or stdin.
    GraphEval {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        poisson: Option<String>,
        input: Option<String>,
    },
    /// Lets the edge on one ground vertex fall on every internal vertex.
    GraphRedirect {
        /// 0-based ground vertex; defaults to the last one.
        #[arg(long)]
        slot: Option<usize>,
        input: Option<String>,
    },
    /// The flow and its trivialization for u = α sin(2πx) cos(2πy).
    TorusDemo,
}

/// Exit code and the two output streams of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Inconsistent(String),
}

impl From<SchoutenError> for Failure {
    fn from(e: SchoutenError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<TrivializeError> for Failure {
    fn from(e: TrivializeError) -> Self {
        match e {
            TrivializeError::Linalg(LinalgError::Inconsistent { .. }) => Failure::Inconsistent(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

/// Rendered result: text, structured form and exit code.
struct Report {
    text: String,
    json: Value,
    code: i32,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Report {
            text,
            json,
            code: EXIT_OK,
        }
    }
}

fn parse_max_order(s: &str) -> Result<usize, String> {
    match s {
        "3" => Ok(3),
        "5" => Ok(5),
        _ => Err(format!("'{s}' is not one of 3, 5")),
    }
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    Rational::from_str(s.trim()).map_err(|_| format!("'{s}' is not a rational number"))
}

/// Runs one invocation. `args` excludes the program name; `stdin` backs
/// inputs given as `-` or omitted.
pub fn run<S: AsRef<str>>(args: &[S], stdin: &mut dyn Read) -> Outcome {
    let argv = std::iter::once("kflow").chain(args.iter().map(|a| a.as_ref()));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: rendered,
                }
            } else {
                Outcome {
                    code: EXIT_OK,
                    stdout: rendered,
                    stderr: String::new(),
                }
            };
        }
    };
    let mut input = Input { stdin, consumed: false };
    match execute(&cli.command, &mut input) {
        Ok(report) => {
            let stdout = match cli.format {
                Format::Text => with_newline(report.text),
                Format::Json => {
                    let mut body = json!({ "format": FORMAT_TAG, "command": command_name(&cli.command) });
                    if let (Value::Object(dst), Value::Object(src)) = (&mut body, report.json) {
                        dst.extend(src);
                    }
                    with_newline(serde_json::to_string_pretty(&body).expect("serializable"))
                }
            };
            Outcome {
                code: report.code,
                stdout,
                stderr: String::new(),
            }
        }
        Err(Failure::Usage(msg)) => Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Inconsistent(msg)) => Outcome {
            code: EXIT_INCONSISTENT,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Gamma { .. } => "gamma",
        Command::Jacobiator { .. } => "jacobiator",
        Command::Flow { .. } => "flow",
        Command::Trivialize { .. } => "trivialize",
        Command::Check { .. } => "check",
        Command::GraphEval { .. } => "graph-eval",
        Command::GraphRedirect { .. } => "graph-redirect",
        Command::TorusDemo => "torus-demo",
    }
}

struct Input<'a> {
    stdin: &'a mut dyn Read,
    consumed: bool,
}

impl Input<'_> {
    fn read(&mut self, path: Option<&str>) -> Result<(String, String), Failure> {
        match path {
            None | Some("-") => {
                if self.consumed {
                    return Err(Failure::Usage("stdin can back only one input".into()));
                }
                self.consumed = true;
                let mut s = String::new();
                self.stdin
                    .read_to_string(&mut s)
                    .map_err(|e| Failure::Usage(format!("reading stdin: {e}")))?;
                Ok(("<stdin>".into(), s))
            }
            Some(p) => std::fs::read_to_string(p)
                .map(|s| (p.to_string(), s))
                .map_err(|e| Failure::Usage(format!("{p}: {e}"))),
        }
    }

    fn polyvector(&mut self, path: Option<&str>, degree: usize) -> Result<PolyVector, Failure> {
        let (name, text) = self.read(path)?;
        let p = PolyVector::parse(&text).map_err(|e| Failure::Usage(format!("{name}: {e}")))?;
        p.expect_degree(degree)
            .map_err(|e| Failure::Usage(format!("{name}: {e}")))?;
        Ok(p)
    }

    fn graphs(&mut self, path: Option<&str>) -> Result<GraphSum, Failure> {
        let (name, text) = self.read(path)?;
        GraphSum::parse(&text).map_err(|e| Failure::Usage(format!("{name}: {e}")))
    }

    /// The bivector from `--poisson`, or the symbolic one of dimension
    /// `dim` (default 2).
    fn bivector(&mut self, path: Option<&str>, dim: Option<usize>) -> Result<PolyVector, Failure> {
        match path {
            Some(p) => {
                let b = self.polyvector(Some(p), 2)?;
                if let Some(d) = dim.filter(|&d| d != b.dim()) {
                    return Err(Failure::Usage(format!(
                        "--dim {d} does not match the {}-dimensional bivector in {p}",
                        b.dim()
                    )));
                }
                Ok(b)
            }
            None => {
                let d = dim.unwrap_or(2);
                if d < 2 {
                    return Err(Failure::Usage(format!("--dim must be at least 2, got {d}")));
                }
                Ok(PolyVector::symbolic_bivector(d))
            }
        }
    }
}

fn execute(command: &Command, input: &mut Input<'_>) -> Result<Report, Failure> {
    match command {
        Command::Gamma { which, dim, poisson } => {
            let p = input.bivector(poisson.as_deref(), *dim)?;
            Ok(match which {
                Which::One => polyvector_report(&gamma1(&p)?),
                Which::TwoSkew => polyvector_report(&gamma2_skew(&p)?),
                Which::Two => table_report(&gamma2(&p)?),
            })
        }
        Command::Jacobiator { input: path } => {
            let p = input.polyvector(path.as_deref(), 2)?;
            let j = jacobiator(&p)?;
            let mut report = polyvector_report(&j);
            report.json["poisson"] = json!(j.is_zero());
            Ok(report)
        }
        Command::Flow { a, b, dim, poisson } => {
            let p = input.bivector(poisson.as_deref(), *dim)?;
            Ok(polyvector_report(&flow(&FlowSpec::new(a.clone(), b.clone()), &p)?))
        }
        Command::Trivialize { max_order } => trivialize_report(*max_order),
        Command::Check { field, poisson } => {
            let x = input.polyvector(Some(field), 1)?;
            let p = input.bivector(poisson.as_deref(), Some(x.dim()))?;
            let target = gamma1(&p)?;
            let residual = check_solution_for(&p, &x, &target)?;
            let mut report = polyvector_report(&residual);
            report.json["solves"] = json!(residual.is_zero());
            if !residual.is_zero() {
                report.code = EXIT_INCONSISTENT;
            }
            Ok(report)
        }
        Command::GraphEval {
            dim,
            poisson,
            input: path,
        } => {
            let sum = input.graphs(path.as_deref())?;
            let p = input.bivector(poisson.as_deref(), *dim)?;
            let value = evaluate_on(&sum, &p)?;
            Ok(Report::ok(
                value.to_string(),
                json!({ "result": polyvector_json(&value) }),
            ))
        }
        Command::GraphRedirect { slot, input: path } => {
            let sum = input.graphs(path.as_deref())?;
            let mut out = GraphSum::new();
            for (w, g) in sum.terms() {
                let s = slot.unwrap_or(g.ground_count().saturating_sub(1));
                out = out.concat(&leibniz_redirect(g, s)?.scale(w));
            }
            Ok(Report::ok(out.to_string(), json!({ "result": graphs_json(&out) })))
        }
        Command::TorusDemo => Ok(torus_report()),
    }
}

/// Polyvector output; a 2D bivector prints as its single component `u`-polynomial.
fn polyvector_report(v: &PolyVector) -> Report {
    let text = match v.single_component() {
        Some(c) if v.degree() == 2 && v.dim() == 2 => c.to_string(),
        None if v.degree() == 2 && v.dim() == 2 => "0".to_string(),
        _ => v.to_string(),
    };
    Report::ok(text, json!({ "result": polyvector_json(v) }))
}

fn polyvector_json(v: &PolyVector) -> Value {
    let components: Vec<Value> = v
        .components()
        .map(|(idx, c)| json!({ "index": idx, "value": c.to_string() }))
        .collect();
    json!({ "degree": v.degree(), "dim": v.dim(), "components": components })
}

fn table_report(t: &Gamma2Table) -> Report {
    let n = t.dim();
    let mut text = String::new();
    let mut entries = Vec::new();
    for i in 1..=n {
        for m in 1..=n {
            let v = t.get(i, m).to_string();
            let _ = writeln!(text, "{i} {m} : {v}");
            entries.push(json!({ "index": [i, m], "value": v }));
        }
    }
    Report::ok(text, json!({ "result": { "dim": n, "entries": entries } }))
}

fn graphs_json(sum: &GraphSum) -> Value {
    Value::Array(
        sum.terms()
            .iter()
            .map(|(w, g)| json!({ "weight": w.to_string(), "graph": g.to_string() }))
            .collect(),
    )
}

fn trivialize_report(max_order: usize) -> Result<Report, Failure> {
    let limit = (max_order < 5).then_some(max_order);
    let system = assemble_system(&build_ansatz_up_to(limit))?;
    let space = solve(&system)?;
    let mut text = String::new();
    let _ = writeln!(text, "unknowns {}", space.unknowns);
    let _ = writeln!(text, "rank {}", space.rank);
    let _ = writeln!(text, "kernel {}", space.kernel_basis.len());
    let _ = writeln!(text, "parameters {}", space.parameter_names.join(" "));
    let _ = writeln!(text, "\n# particular\n{}", space.particular);
    for (name, k) in space.parameter_names.iter().zip(&space.kernel_basis) {
        let _ = writeln!(text, "\n# kernel {name}\n{k}");
    }
    let _ = write!(text, "\n# general\n{}", space.general_field());
    let kernel: Vec<Value> = space
        .parameter_names
        .iter()
        .zip(&space.kernel_basis)
        .map(|(n, k)| json!({ "parameter": n, "field": polyvector_json(k) }))
        .collect();
    Ok(Report::ok(
        text,
        json!({
            "max_order": max_order,
            "unknowns": space.unknowns,
            "rank": space.rank,
            "parameters": space.parameter_names,
            "particular": polyvector_json(&space.particular),
            "kernel": kernel,
            "general": polyvector_json(&space.general_field()),
        }),
    ))
}

fn support_text(f: &TrigPoly) -> String {
    let (_, support) = is_lattice_periodic(f);
    support
        .iter()
        .map(|k| format!("({})", k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn torus_report() -> Report {
    let r = torus_demo();
    let residual = r.conjugation_residual();
    let rows: [(&str, &TrigPoly); 6] = [
        ("u", &r.u),
        ("flow", &r.flow),
        ("H", &r.potential),
        ("F", &r.f),
        ("G", &r.g),
        ("residual", &residual),
    ];
    let mut text = String::new();
    let mut fields = serde_json::Map::new();
    for (name, f) in rows {
        let _ = writeln!(text, "{name} = {f}");
        fields.insert(name.to_string(), json!(f.to_string()));
    }
    let _ = write!(text, "support(flow) = {}", support_text(&r.flow));
    let (periodic, support) = is_lattice_periodic(&r.flow);
    fields.insert("flow_support".into(), json!(support));
    fields.insert("lattice_periodic".into(), json!(periodic));
    Report::ok(text, json!({ "result": fields }))
}
