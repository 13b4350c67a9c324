use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use padic_series::adele::{adelic_e_check, h_series_cross_check};
use padic_series::corpus::{list_identities, run_grid, GridConfig, IdentityId};
use padic_series::evaluator::{check_term_decay, eval_padic, eval_padic_traced, SeriesAt};
use padic_series::exactnum::{factorial_valuation, primes_up_to, rational, rational_valuation};
use padic_series::par::{self, Execution};
use padic_series::series_model::{convergence_domain, real_classify, PolynomialQ, SeriesSpec};
use padic_series::telescope::{adelic_sum_assignment, verify_telescoping, TelescopedSeries};
use padic_series::ukvk::{alternating_pair, general_family_form, solve_pair, uniqueness_evidence};
use padic_series::{Error, Prime};

mod output;

use output::CommandResult;

/// Exact p-adic evaluation of factorial power series.
#[derive(Parser, Debug)]
#[command(name = "padic-series", version)]
struct Cli {
    /// Print the machine-readable JSON result instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for per-prime work; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Precision {
    /// Target precision N: results are exact modulo p^N.
    #[arg(
        long = "precision",
        short = 'N',
        env = "PADIC_PRECISION",
        default_value_t = 20
    )]
    value: i64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// v_p of a factorial or a rational.
    Valuation {
        #[arg(
            long,
            conflicts_with = "rational",
            required_unless_present = "rational"
        )]
        factorial: Option<u64>,
        #[arg(long)]
        rational: Option<String>,
        #[arg(long)]
        p: u64,
    },
    /// p-adic convergence domain of a series.
    Domain {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        p: u64,
    },
    /// Certified p-adic sum of a series at x.
    Sum {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = "1")]
        x: String,
        #[arg(long)]
        p: u64,
        #[command(flatten)]
        precision: Precision,
        /// Also report the valuation of every summed term.
        #[arg(long)]
        trace: bool,
    },
    /// Whether the terms tend to zero in Q_p.
    DecayCheck {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = "1")]
        x: String,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 40)]
        n_max: u64,
    },
    /// Telescope a base series with a generator polynomial and check the sum prime by prime.
    Telescope {
        #[arg(long)]
        spec: PathBuf,
        /// JSON array of rational coefficients of A(n), ascending.
        #[arg(long)]
        generator: PathBuf,
        #[arg(long, default_value = "1")]
        x: String,
        #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
        primes: Vec<u64>,
        #[command(flatten)]
        precision: Precision,
    },
    /// The pair (u_k, v_k) with sum n! (n^k + u_k) = v_k.
    Ukvk {
        #[arg(long)]
        k: u64,
        /// Solve the alternating variant sum (-1)^n n! (n^k + u_k) = v_k.
        #[arg(long)]
        alternating: bool,
        /// Also print C_0 and D of the general family up to degree k.
        #[arg(long)]
        general: bool,
        /// Report the system determinants for every k' <= k.
        #[arg(long)]
        uniqueness: bool,
    },
    /// Adelic checks of the H- and E-families.
    AdeleCheck {
        #[command(subcommand)]
        which: AdeleCommand,
    },
    /// Verify the identity corpus over a parameter grid.
    Corpus {
        /// Grid file; the bundled grid when absent.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Restrict to these identities, e.g. A1,A16.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// List the identities and their parameter slots instead of running.
        #[arg(long)]
        list: bool,
    },
    /// Real-side convergence of a series.
    RealClassify {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum AdeleCommand {
    /// Compare the H-series with its rational sum at every prime up to a bound.
    HSeries {
        #[arg(long, default_value_t = 1)]
        mu: u64,
        #[arg(long, default_value_t = 0)]
        nu: u64,
        #[arg(long, default_value = "1")]
        q: String,
        #[arg(long, default_value = "1")]
        x: String,
        #[arg(long, default_value_t = 50)]
        p_max: u64,
        #[command(flatten)]
        precision: Precision,
    },
    /// Sketch the adele of E-series with q = p^(-s).
    ESketch {
        #[arg(long, default_value_t = 1)]
        mu: u64,
        #[arg(long, default_value_t = 0)]
        nu: u64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        epsilon: i64,
        #[arg(long, default_value_t = 1)]
        s: u64,
        #[arg(long, default_value = "1")]
        x: String,
        #[arg(long, default_value_t = 30)]
        p_max: u64,
        #[command(flatten)]
        precision: Precision,
    },
}

fn read_spec(path: &Path) -> Result<SeriesSpec, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Json(format!("cannot read {}: {e}", path.display())))?;
    SeriesSpec::from_json(&text)
}

fn read_generator(path: &Path) -> Result<PolynomialQ, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Json(format!("cannot read {}: {e}", path.display())))?;
    let coeffs: Vec<String> = serde_json::from_str(&text)?;
    let coeffs = coeffs
        .iter()
        .map(|c| rational::parse(c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PolynomialQ::new(coeffs))
}

fn primes(list: &[u64]) -> Result<Vec<Prime>, Error> {
    list.iter().map(|&p| Prime::new(p)).collect()
}

fn valuation(factorial: Option<u64>, text: Option<&str>, p: u64) -> CommandResult {
    let p = match Prime::new(p) {
        Ok(p) => p,
        Err(e) => return CommandResult::failure(e),
    };
    if let Some(m) = factorial {
        let v = factorial_valuation(m, p);
        return CommandResult::ok(
            json!({ "m": m, "p": p, "valuation": v }),
            format!("v_{p}({m}!) = {v}"),
        );
    }
    match rational::parse(text.unwrap_or_default()) {
        Ok(r) => {
            let v = rational_valuation(&r, p);
            let shown = v
                .finite()
                .map_or_else(|| "infinity".to_string(), |v| v.to_string());
            CommandResult::ok(
                json!({ "rational": r.to_string(), "p": p, "valuation": v }),
                format!("v_{p}({r}) = {shown}"),
            )
        }
        Err(e) => CommandResult::failure(e),
    }
}

fn domain(spec: &Path, p: u64) -> Result<CommandResult, Error> {
    let spec = read_spec(spec)?;
    let p = Prime::new(p)?;
    let d = convergence_domain(&spec, p);
    let human = match d.v_min {
        Some(v) => format!("converges in Q_{p} iff x = 0 or v_{p}(x) >= {v}"),
        None => format!("converges on all of Q_{p}"),
    };
    Ok(CommandResult::ok(serde_json::to_value(&d)?, human))
}

fn sum(spec: &Path, x: &str, p: u64, precision: i64, trace: bool) -> Result<CommandResult, Error> {
    let spec = read_spec(spec)?;
    let x = rational::parse(x)?;
    let p = Prime::new(p)?;
    let series = SeriesAt::new(spec.clone(), x.clone());
    let result = if trace {
        eval_padic_traced(&series, p, precision)
    } else {
        eval_padic(&series, p, precision)
    };
    let report = match result {
        Ok(r) => r,
        Err(e @ Error::OutsideDomain { .. }) => {
            let payload = json!({
                "x": x.to_string(),
                "x_valuation": rational_valuation(&x, p),
                "domain": convergence_domain(&spec, p),
            });
            return Ok(CommandResult::failure(e).with_payload(payload));
        }
        Err(e) => return Err(e),
    };
    let certificate = format!(
        "every term from n = {} on has v_{p} >= {}",
        report.terms_used, report.tail_bound_valuation
    );
    let residue = report.value.residue().map(|r| r.to_string());
    let mut human = format!("sum = {} + O({p}^{precision})", report.value);
    if let Some(r) = &residue {
        human.push_str(&format!("\n    = {r} mod {p}^{precision}"));
    }
    human.push_str(&format!("\n{certificate}"));
    let mut payload = serde_json::to_value(&report)?;
    payload["prime"] = json!(p);
    payload["precision"] = json!(precision);
    payload["residue"] = json!(residue);
    payload["certificate"] = json!(certificate);
    Ok(CommandResult::ok(payload, human))
}

fn decay_check(spec: &Path, x: &str, p: u64, n_max: u64) -> Result<CommandResult, Error> {
    let spec = read_spec(spec)?;
    let x = rational::parse(x)?;
    let p = Prime::new(p)?;
    let report = check_term_decay(&spec, &x, p, n_max)?;
    let human = format!("{:?}: {}", report.verdict, report.certificate);
    Ok(CommandResult::ok(serde_json::to_value(&report)?, human))
}

fn telescope(
    spec: &Path,
    generator: &Path,
    x: &str,
    prime_list: &[u64],
    precision: i64,
    mode: Execution,
) -> Result<CommandResult, Error> {
    let base = read_spec(spec)?;
    let a = read_generator(generator)?;
    let x = rational::parse(x)?;
    let ps = primes(prime_list)?;
    let t = TelescopedSeries::new(&base, a, x);
    let checks = par::map(ps.clone(), mode, |p| verify_telescoping(&t, p, precision));
    let assignment = adelic_sum_assignment(&t, &ps, precision, mode);
    let mut rows = Vec::new();
    let mut lines = vec![format!("telescoped sum = {}", t.rhs())];
    if let Some(p) = t.effective_p() {
        lines.push(format!("effective polynomial P(n) = {p}"));
    }
    let mut diagnostics = Vec::new();
    for (p, check) in ps.iter().zip(checks) {
        match check {
            Ok(c) => {
                lines.push(format!(
                    "p = {p}: {}",
                    if c.congruent { "congruent" } else { "MISMATCH" }
                ));
                rows.push(serde_json::to_value(&c)?);
            }
            Err(e) => {
                lines.push(format!("p = {p}: {e}"));
                diagnostics.push(format!("p = {p}: {e}"));
                rows.push(json!({ "prime": p, "error": e.to_string() }));
            }
        }
    }
    let payload = json!({
        "rhs": t.rhs().to_string(),
        "effective_p": t.effective_p(),
        "checks": rows,
        "assignment": assignment,
    });
    let result = CommandResult::ok(payload, lines.join("\n")).with_diagnostics(diagnostics);
    Ok(if assignment.assigned().is_some() {
        result
    } else {
        result.into_error("some prime disagrees with the telescoped sum")
    })
}

fn ukvk(
    k: u64,
    alternating: bool,
    general: bool,
    uniqueness: bool,
) -> Result<CommandResult, Error> {
    let s = if alternating {
        alternating_pair(k)?
    } else {
        solve_pair(k)?
    };
    let mut payload = json!({
        "k": k,
        "u": s.u.to_string(),
        "v": s.v.to_string(),
        "generator": s.a,
        "determinant": s.system_determinant.to_string(),
    });
    let mut lines = vec![format!("(u_{k}, v_{k}) = ({}, {})", s.u, s.v)];
    if general {
        let form = general_family_form(k)?;
        lines.push(format!("C_0 = {}", form.c0));
        lines.push(format!("D = {}", form.d));
        payload["general"] = json!({ "c0": form.c0.to_string(), "d": form.d.to_string() });
    }
    if uniqueness {
        let report = uniqueness_evidence(k);
        for d in &report.determinants {
            lines.push(format!("det(k = {}) = {}", d.k, d.determinant));
        }
        payload["uniqueness"] = serde_json::to_value(&report)?;
        if let Some(alarm) = report.alarm {
            return Ok(CommandResult::ok(payload, lines.join("\n")).into_error(alarm));
        }
    }
    Ok(CommandResult::ok(payload, lines.join("\n")))
}

fn adele(which: &AdeleCommand, mode: Execution) -> Result<CommandResult, Error> {
    match which {
        AdeleCommand::HSeries {
            mu,
            nu,
            q,
            x,
            p_max,
            precision,
        } => {
            let q = rational::parse(q)?;
            let x = rational::parse(x)?;
            let report = h_series_cross_check(
                *mu,
                *nu,
                &q,
                &x,
                &primes_up_to(*p_max),
                precision.value,
                mode,
            )?;
            let mut lines = vec![format!("S = {}", report.sum)];
            lines.push(format!(
                "exceptional primes: {:?}",
                report
                    .exceptional_primes
                    .iter()
                    .map(|p| p.get())
                    .collect::<Vec<_>>()
            ));
            for row in &report.rows {
                lines.push(format!("p = {}: {:?}", row.prime, row.status));
            }
            let passed = report.passed();
            let result = CommandResult::ok(serde_json::to_value(&report)?, lines.join("\n"));
            Ok(if passed {
                result
            } else {
                result.into_error("H-series cross-check failed")
            })
        }
        AdeleCommand::ESketch {
            mu,
            nu,
            epsilon,
            s,
            x,
            p_max,
            precision,
        } => {
            let x = rational::parse(x)?;
            let sketch = adelic_e_check(*mu, *nu, *epsilon, *s, &x, *p_max, precision.value, mode)?;
            let mut lines: Vec<String> = sketch
                .per_prime_values
                .iter()
                .map(|(p, v)| format!("p = {p}: {v}"))
                .collect();
            lines.push(format!("real slot: {}", sketch.real_slot));
            let diagnostics: Vec<String> = sketch
                .errors
                .iter()
                .map(|(p, e)| format!("p = {p}: {e}"))
                .collect();
            let ok = sketch.term_bound_holds
                && sketch.witness_covers_exceptions()
                && diagnostics.is_empty();
            let result = CommandResult::ok(serde_json::to_value(&sketch)?, lines.join("\n"))
                .with_diagnostics(diagnostics);
            Ok(if ok {
                result
            } else {
                result.into_error("E-series adele sketch failed")
            })
        }
    }
}

fn corpus(
    grid: Option<&Path>,
    only: &[String],
    list: bool,
    mode: Execution,
) -> Result<CommandResult, Error> {
    if list {
        let infos = list_identities();
        let human = infos
            .iter()
            .map(|i| {
                format!(
                    "{:<4} sum {:<40} = {}  [{}]",
                    i.id, i.series, i.sum, i.admissible
                )
            })
            .collect::<Vec<_>>()
            .join("\n");
        return Ok(CommandResult::ok(serde_json::to_value(&infos)?, human));
    }
    let mut config = match grid {
        Some(path) => GridConfig::from_json(
            &std::fs::read_to_string(path)
                .map_err(|e| Error::Json(format!("cannot read {}: {e}", path.display())))?,
        )?,
        None => GridConfig::default_grid(),
    };
    if !only.is_empty() {
        let ids = only
            .iter()
            .map(|s| {
                IdentityId::parse(s).ok_or_else(|| Error::InvalidSpec {
                    field: "only",
                    reason: format!("unknown identity {s:?}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        config.only = Some(ids);
    }
    let report = run_grid(&config, mode);
    let failures = report.failures();
    let mut lines = Vec::new();
    for id in report.identities_covered() {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.id == id).collect();
        let passed = rows
            .iter()
            .filter(|r| r.status == padic_series::corpus::Status::Pass)
            .count();
        lines.push(format!("{id:<4} {passed}/{} rows pass", rows.len()));
    }
    let diagnostics: Vec<String> = report
        .rows
        .iter()
        .filter_map(|r| {
            r.detail
                .as_ref()
                .map(|d| format!("{} {} p = {}: {d}", r.id, r.params, r.prime))
        })
        .chain(report.cross_validations.iter().filter_map(|c| {
            c.detail
                .as_ref()
                .map(|d| format!("{} {} telescope: {d}", c.id, c.params))
        }))
        .collect();
    lines.push(format!(
        "{} rows, {} cross-checks, {} skipped, {failures} failures",
        report.rows.len(),
        report.cross_validations.len(),
        report.skipped.len()
    ));
    let result = CommandResult::ok(serde_json::to_value(&report)?, lines.join("\n"))
        .with_diagnostics(diagnostics);
    Ok(if failures == 0 {
        result
    } else {
        result.into_error(format!("{failures} corpus checks failed"))
    })
}

fn classify(spec: &Path) -> Result<CommandResult, Error> {
    let spec = read_spec(spec)?;
    let c = real_classify(&spec);
    let payload = c.to_json();
    let human = match &c {
        padic_series::series_model::RealClassification::ConvergesWithin(r) => {
            format!("converges for |x| < {r}")
        }
        other => format!("{other:?}"),
    };
    Ok(CommandResult::ok(payload, human))
}

fn run(cli: &Cli, mode: Execution) -> CommandResult {
    let result = match &cli.command {
        Command::Valuation {
            factorial,
            rational,
            p,
        } => return valuation(*factorial, rational.as_deref(), *p),
        Command::Domain { spec, p } => domain(spec, *p),
        Command::Sum {
            spec,
            x,
            p,
            precision,
            trace,
        } => sum(spec, x, *p, precision.value, *trace),
        Command::DecayCheck { spec, x, p, n_max } => decay_check(spec, x, *p, *n_max),
        Command::Telescope {
            spec,
            generator,
            x,
            primes,
            precision,
        } => telescope(spec, generator, x, primes, precision.value, mode),
        Command::Ukvk {
            k,
            alternating,
            general,
            uniqueness,
        } => ukvk(*k, *alternating, *general, *uniqueness),
        Command::AdeleCheck { which } => adele(which, mode),
        Command::Corpus { grid, only, list } => corpus(grid.as_deref(), only, *list, mode),
        Command::RealClassify { spec } => classify(spec),
    };
    result.unwrap_or_else(CommandResult::failure)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mode = match cli.jobs {
        Some(1) => Execution::Sequential,
        _ => Execution::Parallel,
    };
    let mut result = match cli.jobs {
        Some(jobs) if jobs > 1 => par::with_jobs(jobs, || run(&cli, mode)),
        _ => run(&cli, mode),
    };
    if cli.jobs.is_some_and(|j| j > 1) && !Execution::is_parallel_available() {
        result
            .diagnostics
            .push("built without the parallel feature; --jobs ignored".into());
    }
    result.print(cli.json);
    result.exit_code()
}
