use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use serde_json::json;
use snowflake::distortion;
use snowflake::filling::{self, FillRequest, HnnDualTree};
use snowflake::hnn_group::{self, DEFAULT_STATE_BUDGET};
use snowflake::paths::{self, PathWord, SnowflakeFlavor};
use snowflake::vertex_group::{Flavor, GroupParams, HPoint};
use snowflake::Error;
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "snowflake",
    version,
    about = "Word metric, geodesics and fillings in the snowflake groups G_L"
)]
struct Cli {
    /// The group parameter: an even integer >= 6.
    #[arg(long = "L", global = true, default_value_t = 6)]
    l: i64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,
    /// State budget for breadth-first searches.
    #[arg(long, global = true, env = "SNOWFLAKE_BFS_BUDGET", default_value_t = DEFAULT_STATE_BUDGET)]
    budget: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Target {
    /// Exponent m of a^m.
    #[arg(long, allow_hyphen_values = true)]
    a_power: Option<BigInt>,
    /// Element a^u x^v of H, written u,v.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_h)]
    h: Option<HPoint>,
}

impl Target {
    fn point(&self) -> HPoint {
        match (&self.a_power, &self.h) {
            (Some(m), _) => HPoint::a(m.clone()),
            (_, Some(h)) => h.clone(),
            _ => unreachable!("clap requires one target"),
        }
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct LoopSource {
    /// Snowflake loop of this depth.
    #[arg(long)]
    n: Option<u32>,
    /// An explicit loop.
    #[arg(long, value_parser = parse_word)]
    word: Option<PathWord>,
}

#[derive(Subcommand)]
enum Command {
    /// Length of a^m or of an element of H.
    Dist(Target),
    /// Geodesic digit expansion of a^m.
    Expr {
        #[arg(long, allow_hyphen_values = true)]
        a_power: BigInt,
    },
    /// A geodesic word for a^m or an element of H.
    Word(Target),
    /// Distortion table m, |g^m|, ratio for m = 1..=m-max.
    Table {
        #[arg(long)]
        m_max: u64,
        #[arg(long, default_value = "a", value_parser = parse_flavor)]
        flavor: Flavor,
        /// Check the two-sided bound instead of printing rows.
        #[arg(long)]
        check: bool,
    },
    /// The witness sequence m_n with exact and predicted lengths.
    Mn {
        #[arg(long)]
        n_max: u32,
    },
    /// A snowflake path, or with --loop the snowflake loop.
    Snowflake {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "s", value_parser = parse_snowflake_flavor)]
        flavor: SnowflakeFlavor,
        #[arg(long = "loop")]
        closed: bool,
    },
    /// Checks that a loop is geodesic: antipodal vertices at half its length.
    VerifyLoop {
        #[command(flatten)]
        source: LoopSource,
        /// Search radius; defaults to half the loop length.
        #[arg(long)]
        cap: Option<u32>,
    },
    /// The ball of a given radius around 1.
    Ball {
        #[arg(long)]
        radius: u32,
    },
    /// Van Kampen diagrams.
    Fill {
        #[command(subcommand)]
        kind: FillKind,
    },
    /// Central region of a dual tree.
    Central {
        /// Tree JSON file.
        #[arg(long, conflicts_with = "n", required_unless_present = "n")]
        input: Option<std::path::PathBuf>,
        /// Dual tree of the snowflake loop of this depth.
        #[arg(long)]
        n: Option<u32>,
        /// Print the tree in Graphviz format instead.
        #[arg(long)]
        dot: bool,
    },
    /// Enfilade decomposition of an escape.
    Enfilade {
        #[arg(long, value_parser = parse_word)]
        word: PathWord,
        /// Growth ratio R > 2, as an integer or p/q.
        #[arg(long, value_parser = parse_ratio)]
        r: Ratio<i64>,
    },
    /// Area bound for assembling a diagram out of shells.
    AreaBudget {
        #[arg(long)]
        central: BigUint,
        #[arg(long)]
        enfilade: BigUint,
        #[arg(long)]
        branching: BigUint,
        #[arg(long)]
        shells: u32,
    },
}

#[derive(Subcommand)]
enum FillKind {
    /// Fill a bigon from a polygon JSON file.
    Bigon(PolygonFile),
    /// Fill a triangle from a polygon JSON file.
    Triangle(PolygonFile),
    /// Fill a diamond from a polygon JSON file.
    Diamond(PolygonFile),
    /// Subdivide the snowflake loop of depth n.
    Snowflake {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 6)]
        lambda: usize,
        /// Include the full diagram in JSON output.
        #[arg(long)]
        diagram: bool,
    },
}

#[derive(Args)]
struct PolygonFile {
    #[arg(long)]
    input: std::path::PathBuf,
    /// Include the full diagram in JSON output.
    #[arg(long)]
    diagram: bool,
}

fn parse_h(s: &str) -> Result<HPoint, String> {
    let (u, v) = s.split_once(',').ok_or("expected u,v")?;
    let u: BigInt = u.trim().parse().map_err(|e| format!("bad u: {e}"))?;
    let v: BigInt = v.trim().parse().map_err(|e| format!("bad v: {e}"))?;
    Ok(HPoint::new(u, v))
}

fn parse_word(s: &str) -> Result<PathWord, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_flavor(s: &str) -> Result<Flavor, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_snowflake_flavor(s: &str) -> Result<SnowflakeFlavor, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_ratio(s: &str) -> Result<Ratio<i64>, String> {
    let parsed = match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n
                .trim()
                .parse()
                .map_err(|e| format!("bad numerator: {e}"))?;
            let d: i64 = d
                .trim()
                .parse()
                .map_err(|e| format!("bad denominator: {e}"))?;
            if d == 0 {
                return Err("zero denominator".into());
            }
            Ratio::new(n, d)
        }
        None => Ratio::from_integer(s.trim().parse().map_err(|e| format!("bad ratio: {e}"))?),
    };
    Ok(parsed)
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Verification(_) | Error::BudgetExceeded { .. } | Error::Incomplete(_) => {
                Failure::Verification(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

type Out<'a> = &'a mut dyn Write;

fn emit_json(out: Out, v: &impl serde::Serialize) -> Result<(), Failure> {
    writeln!(out, "{}", serde_json::to_string(v).expect("serializable"))?;
    Ok(())
}

fn read_file(path: &std::path::Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn run(cli: Cli, out: Out) -> Result<(), Failure> {
    let p = GroupParams::new(cli.l).map_err(|e| Failure::Usage(format!("--L: {e}")))?;
    if cli.budget == 0 {
        return Err(Failure::Usage("--budget must be positive".into()));
    }
    let fmt = cli.format;
    match cli.command {
        Command::Dist(t) => {
            let d = p.dist_h(&t.point());
            match fmt {
                Format::Json => emit_json(
                    out,
                    &json!({ "element": t.point().to_string(), "dist": d.to_string() }),
                )?,
                _ => writeln!(out, "{d}")?,
            }
        }
        Command::Expr { a_power } => {
            let e = p.geodesic_expression(&a_power)?;
            match fmt {
                Format::Json => emit_json(out, &e)?,
                _ => {
                    let digits: Vec<String> = e.digits.iter().map(ToString::to_string).collect();
                    writeln!(
                        out,
                        "{}",
                        digits.join(if fmt == Format::Csv { "," } else { " " })
                    )?;
                }
            }
        }
        Command::Word(t) => {
            let w = p.geodesic_word_h(&t.point());
            match fmt {
                Format::Json => emit_json(
                    out,
                    &json!({ "word": w.to_string(), "length": w.length(&p) }),
                )?,
                _ => writeln!(out, "{w}")?,
            }
        }
        Command::Table {
            m_max,
            flavor,
            check,
        } => {
            if m_max == 0 {
                return Err(Failure::Usage("--m-max must be at least 1".into()));
            }
            if check {
                let report = distortion::check_bounds(&p, flavor, m_max);
                match fmt {
                    Format::Json => emit_json(out, &report)?,
                    _ => writeln!(
                        out,
                        "holds: {}\nmin_ratio: {:.12}\nmax_ratio: {:.12}\nC: {}",
                        report.holds(),
                        report.min_ratio,
                        report.max_ratio,
                        report.constant
                    )?,
                }
                if let Some(v) = report.violations.first() {
                    return Err(Failure::Verification(format!(
                        "bound fails at m = {} (dist {}, ratio {})",
                        v.m, v.dist, v.ratio
                    )));
                }
            } else {
                let rows = distortion::distortion_table_for(&p, flavor, m_max);
                match fmt {
                    Format::Json => emit_json(out, &rows)?,
                    _ => distortion::write_csv(&rows, &mut *out)?,
                }
            }
        }
        Command::Mn { n_max } => {
            let rows = distortion::mn_sequence(&p, n_max);
            match fmt {
                Format::Json => emit_json(out, &rows)?,
                _ => {
                    writeln!(out, "n,m,dist,predicted,ratio")?;
                    for r in &rows {
                        writeln!(
                            out,
                            "{},{},{},{},{:.12}",
                            r.n, r.m, r.dist, r.predicted, r.ratio
                        )?;
                    }
                }
            }
            if let Some(r) = rows.iter().find(|r| r.dist != r.predicted) {
                return Err(Failure::Verification(format!(
                    "closed form fails at n = {}: |a^{}| = {}, predicted {}",
                    r.n, r.m, r.dist, r.predicted
                )));
            }
        }
        Command::Snowflake { n, flavor, closed } => {
            let w = if closed {
                paths::snowflake_loop(&p, n)?
            } else {
                paths::snowflake_path(&p, n, flavor)?
            };
            match fmt {
                Format::Json => emit_json(
                    out,
                    &json!({ "word": w.to_string(), "length": w.length(&p) }),
                )?,
                _ => writeln!(out, "{w}")?,
            }
        }
        Command::VerifyLoop { source, cap } => {
            let w = match (source.n, source.word) {
                (Some(n), _) => paths::snowflake_loop(&p, n)?,
                (_, Some(w)) => w,
                _ => unreachable!("clap requires one source"),
            };
            let half = (w.length(&p) / 2).min(u32::MAX as u64) as u32;
            let check = paths::check_geodesic_loop(&p, &w, cap.unwrap_or(half), cli.budget)?;
            match fmt {
                Format::Json => emit_json(out, &check)?,
                _ => writeln!(
                    out,
                    "geodesic: {}\nlength: {}",
                    check.geodesic, check.length
                )?,
            }
            if let Some((i, j, d)) = check.counterexample {
                return Err(Failure::Verification(format!(
                    "vertices {i} and {j} are at distance {d}, below half the length {}",
                    check.length / 2
                )));
            }
        }
        Command::Ball { radius } => {
            let ball = hnn_group::bfs_ball(&p, radius, cli.budget)?;
            match fmt {
                Format::Json => ball.write_json_lines(&mut *out)?,
                Format::Csv => {
                    writeln!(out, "normal_form,distance")?;
                    for (g, d) in ball.iter() {
                        writeln!(out, "{g},{d}")?;
                    }
                }
                Format::Plain => {
                    let sizes: Vec<String> = ball
                        .sphere_sizes()
                        .iter()
                        .map(ToString::to_string)
                        .collect();
                    writeln!(
                        out,
                        "elements: {}\nspheres: {}",
                        ball.len(),
                        sizes.join(" ")
                    )?;
                }
            }
        }
        Command::Fill { kind } => fill(&p, kind, fmt, out)?,
        Command::Central { input, n, dot } => {
            let tree = match (input, n) {
                (Some(path), _) => HnnDualTree::from_json(&read_file(&path)?)?,
                (_, Some(n)) => filling::snowflake_hnn_tree(&p, n)?,
                _ => unreachable!("clap requires one source"),
            };
            if dot {
                write!(out, "{}", tree.to_dot())?;
                return Ok(());
            }
            let region = filling::find_central_region(&tree)?;
            match fmt {
                Format::Json => emit_json(out, &region)?,
                _ => match region {
                    filling::CentralRegion::Vertex { node, f } => {
                        writeln!(out, "vertex {node} f {f}")?
                    }
                    filling::CentralRegion::Edge {
                        u, v, position, f, ..
                    } => writeln!(out, "edge {u}-{v} position {position} f {f}")?,
                },
            }
        }
        Command::Enfilade { word, r } => {
            let dec = paths::enfilade_decompose(&p, &word, r)?;
            match fmt {
                Format::Json => emit_json(out, &dec)?,
                _ => {
                    writeln!(out, "depth: {}", dec.depth())?;
                    for (i, e) in dec.epsilons.iter().enumerate() {
                        writeln!(
                            out,
                            "level {i}: {} {}^{}",
                            e.letter(),
                            dec.flavors[i],
                            dec.exponents[i]
                        )?;
                    }
                    writeln!(out, "end: {}", dec.end)?;
                }
            }
        }
        Command::AreaBudget {
            central,
            enfilade,
            branching,
            shells,
        } => {
            let a = filling::area_budget(&central, &enfilade, &branching, shells);
            match fmt {
                Format::Json => emit_json(out, &json!({ "area": a.to_string() }))?,
                _ => writeln!(out, "{a}")?,
            }
        }
    }
    Ok(())
}

fn fill(p: &GroupParams, kind: FillKind, fmt: Format, out: Out) -> Result<(), Failure> {
    let (file, expected) = match kind {
        FillKind::Snowflake { n, lambda, diagram } => {
            let d = filling::subdivide_snowflake(p, n, lambda)?;
            d.validate()?;
            let half = paths::snowflake_loop(p, n)?.length(p) / 2;
            let summary = json!({
                "area": d.area(),
                "mesh": d.mesh(),
                "half_length": half,
                "cap_off_depth": filling::cap_off_depth(p, n, lambda as u64),
            });
            match fmt {
                Format::Json if diagram => {
                    emit_json(out, &json!({ "summary": summary, "diagram": d.export() }))?
                }
                Format::Json => emit_json(out, &summary)?,
                Format::Csv => writeln!(
                    out,
                    "area,mesh,half_length\n{},{},{half}",
                    d.area(),
                    d.mesh()
                )?,
                Format::Plain => writeln!(
                    out,
                    "area: {}\nmesh: {}\nhalf_length: {half}",
                    d.area(),
                    d.mesh()
                )?,
            }
            return Ok(());
        }
        FillKind::Bigon(f) => (f, filling::PolygonKind::Bigon),
        FillKind::Triangle(f) => (f, filling::PolygonKind::Triangle),
        FillKind::Diamond(f) => (f, filling::PolygonKind::Diamond),
    };
    let req = FillRequest::from_json(&read_file(&file.input)?)?;
    if req.polygon.kind != expected {
        return Err(Failure::Usage(format!(
            "--input holds a {:?}, not a {expected:?}",
            req.polygon.kind
        )));
    }
    let (result, report) = req.report(p)?;
    match fmt {
        Format::Json if file.diagram => emit_json(
            out,
            &json!({ "report": report, "diagram": result.diagram.export() }),
        )?,
        Format::Json => emit_json(out, &report)?,
        _ => {
            writeln!(out, "area: {} (bound {})", report.area, report.bounds.area)?;
            writeln!(
                out,
                "mesh: {} (bound {:.3})",
                report.mesh, report.bounds.mesh
            )?;
            writeln!(
                out,
                "output exponent: {} (bound {:.3})",
                report.output_exponent, report.bounds.exponent
            )?;
            for s in &report.outputs {
                let parts: Vec<String> = s.exponents.iter().map(ToString::to_string).collect();
                writeln!(out, "output: {}", parts.join(" "))?;
            }
        }
    }
    if !report.holds() {
        return Err(Failure::Verification(format!(
            "bounds fail: area {}, mesh {}, exponent {}, pieces {}",
            report.area_ok, report.mesh_ok, report.exponent_ok, report.output_count_ok
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let code = match run(cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    };
    let _ = lock.flush();
    code
}
