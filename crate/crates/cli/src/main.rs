use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rv14_core::complex::{
    assert_monotone, euler, fixed_point_complex, link_euler_fast, r_vector, AssignmentEntry,
    TypeAssignment,
};
use rv14_core::data::{
    parse_group_file, Bundle, GroupRecord, APPENDIX_JSON, GROUPS_JSON, SUBGROUPS_JSON,
};
use rv14_core::oracle::{adversary_path, exhaustive_conjecture_check, BooleanFunction};
use rv14_core::orbits::{build_poset, compute_orbits, cover_edges, OrbitPoset, OrbitTable};
use rv14_core::perm::{classify, ClassKind, ClassifyOptions, PermGroup, DEFAULT_ELEMENT_CAP};
use rv14_core::report::{replay_text, verify14, Verify14Options};
use rv14_core::search::{replay_appendix, Campaign, SearchOptions, DEFAULT_RESIDUAL_CAP};

#[derive(Parser)]
#[command(
    name = "rv14",
    version,
    about = "Elusiveness verifier for weakly symmetric functions on 14 variables"
)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Replace the bundled groups with the records in this file.
    #[arg(long, global = true)]
    group_file: Option<PathBuf>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Group order and classification.
    #[command(subcommand)]
    Group(GroupCmd),
    /// Orbits of subsets under a group.
    #[command(subcommand)]
    Orbits(OrbitsCmd),
    /// r-vector and Euler characteristic of an assignment.
    Euler { group: String, assignment: PathBuf },
    /// Fixed-point complex of a subgroup.
    Fixedpoint {
        group: String,
        subgroup: String,
        assignment: PathBuf,
    },
    /// Exact decision-tree depth of an assignment's function.
    Dtree { group: String, assignment: PathBuf },
    /// Exhaustive sweep over all monotone functions on n variables.
    ConjectureCheck {
        #[arg(long)]
        n: usize,
    },
    /// Verify every bundled group.
    Verify14(Verify14Args),
    /// Replay the worked branch of the G6 search.
    ReplayAppendix,
}

#[derive(Subcommand)]
enum GroupCmd {
    Order {
        group: String,
    },
    Classify {
        group: String,
        #[arg(long)]
        no_sylow: bool,
        #[arg(long)]
        no_witness_search: bool,
    },
}

#[derive(Subcommand)]
enum OrbitsCmd {
    Compute { group: String },
    Poset { group: String },
}

#[derive(Args)]
struct Verify14Args {
    #[arg(long, default_value = "fewest-blocks")]
    schedule: String,
    /// Also run a second, different schedule.
    #[arg(long)]
    seed_independent: bool,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Residual enumeration cap per leaf.
    #[arg(long, default_value_t = DEFAULT_RESIDUAL_CAP)]
    cap: u64,
    #[arg(long)]
    no_sylow: bool,
    #[arg(long)]
    no_witness_search: bool,
    #[arg(long)]
    no_link_check: bool,
    #[arg(long)]
    audit: bool,
}

/// Successful run whose verdict is negative.
struct Failed;

struct Ctx {
    format: Format,
    bundle: Bundle,
}

impl Ctx {
    fn emit(&self, value: &Value, text: impl FnOnce() -> String) {
        match self.format {
            Format::Json => out(&(serde_json::to_string_pretty(value).expect("json value") + "\n")),
            Format::Text => out(&text()),
        }
    }

    /// `bundled:NAME`, `PATH` or `PATH#NAME`.
    fn record(&self, spec: &str) -> Result<GroupRecord> {
        if let Some(name) = spec.strip_prefix("bundled:") {
            if let Some(g) = self.bundle.group(name) {
                return Ok(g.clone());
            }
            if let Some(s) = self.bundle.subgroup(name) {
                return Ok(s.as_group_record());
            }
            bail!("no bundled group named {name}");
        }
        let (path, name) = match spec.rsplit_once('#') {
            Some((p, n)) => (p, Some(n)),
            None => (spec, None),
        };
        let records = parse_group_file(&read(Path::new(path))?)?;
        let record = match name {
            Some(n) => records.into_iter().find(|r| r.name == n),
            None => records.into_iter().next(),
        };
        record.ok_or_else(|| anyhow!("{spec}: no matching group record"))
    }

    fn group(&self, spec: &str) -> Result<(GroupRecord, PermGroup)> {
        let r = self.record(spec)?;
        let g = r
            .group(DEFAULT_ELEMENT_CAP)
            .with_context(|| format!("group {}", r.name))?;
        Ok((r, g))
    }
}

/// A closed pipe is not an error.
fn out(s: &str) {
    let _ = io::stdout().lock().write_all(s.as_bytes());
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_bundle(group_file: Option<&Path>) -> Result<Bundle> {
    let groups = match group_file {
        None => GROUPS_JSON.to_string(),
        Some(p) => serde_json::to_string(&parse_group_file(&read(p)?)?)?,
    };
    Ok(Bundle::from_sources(
        &groups,
        SUBGROUPS_JSON,
        APPENDIX_JSON,
    )?)
}

fn orbit_setup(g: &PermGroup) -> Result<(OrbitTable, OrbitPoset)> {
    let t = compute_orbits(g)?;
    let p = build_poset(&t);
    Ok((t, p))
}

fn read_assignment(path: &Path, t: &OrbitTable, p: &OrbitPoset) -> Result<TypeAssignment> {
    let entries: Vec<AssignmentEntry> = serde_json::from_str(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(TypeAssignment::from_entries(t, p, &entries)?)
}

fn group_cmd(ctx: &Ctx, cmd: &GroupCmd) -> Result<Option<Failed>> {
    match cmd {
        GroupCmd::Order { group } => {
            let (r, g) = ctx.group(group)?;
            let v = json!({
                "name": r.name,
                "degree": g.degree(),
                "order": g.order(),
                "printed_order": r.printed_order,
                "order_discrepancy": r.printed_order.is_some_and(|p| p != g.order()),
                "transitive": g.is_transitive(),
            });
            ctx.emit(&v, || {
                format!(
                    "{}: degree {} order {}{} {}\n",
                    r.name,
                    g.degree(),
                    g.order(),
                    r.printed_order
                        .map(|p| format!(" (printed {p})"))
                        .unwrap_or_default(),
                    if g.is_transitive() {
                        "transitive"
                    } else {
                        "intransitive"
                    }
                )
            });
            Ok(None)
        }
        GroupCmd::Classify {
            group,
            no_sylow,
            no_witness_search,
        } => {
            let (r, g) = ctx.group(group)?;
            let witness = r.bundled_witness()?;
            let c = classify(
                &g,
                witness.as_ref(),
                ClassifyOptions {
                    sylow: !no_sylow,
                    search: !no_witness_search,
                },
            );
            let v = json!({
                "name": r.name,
                "order": g.order(),
                "transitive": g.is_transitive(),
                "classification": c,
            });
            ctx.emit(&v, || format!("{}: {} ({:?})\n", r.name, c.kind, c.source));
            Ok((c.kind == ClassKind::Unresolved).then_some(Failed))
        }
    }
}

fn orbits_cmd(ctx: &Ctx, cmd: &OrbitsCmd) -> Result<()> {
    match cmd {
        OrbitsCmd::Compute { group } => {
            let (r, g) = ctx.group(group)?;
            let t = compute_orbits(&g)?;
            let census = t.census();
            let v = json!({
                "name": r.name,
                "degree": t.degree(),
                "group_order": t.group_order(),
                "transitive": t.is_transitive(),
                "nonempty_orbits": t.nonempty_count(),
                "level_counts": t.level_counts(),
                "orbits": census,
            });
            ctx.emit(&v, || {
                let mut s = format!(
                    "{}: {} nonempty orbits, per level {:?}\n",
                    r.name,
                    t.nonempty_count(),
                    t.level_counts()
                );
                for e in &census {
                    let _ = writeln!(
                        s,
                        "{:>6} size {:>5} x1 {:>5} rep {:?}",
                        e.orbit.to_string(),
                        e.size,
                        e.containing_x1,
                        e.representative
                    );
                }
                s
            });
        }
        OrbitsCmd::Poset { group } => {
            let (r, g) = ctx.group(group)?;
            let (t, p) = orbit_setup(&g)?;
            let edges: Vec<[String; 2]> = cover_edges(&p)
                .into_iter()
                .map(|(a, b)| [t.id(a).to_string(), t.id(b).to_string()])
                .collect();
            let v = json!({ "name": r.name, "orbits": t.len(), "covers": edges });
            ctx.emit(&v, || {
                let mut s = String::new();
                for [a, b] in &edges {
                    let _ = writeln!(s, "{a} < {b}");
                }
                s
            });
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Option<Failed>> {
    let ctx = Ctx {
        format: cli.format,
        bundle: load_bundle(cli.group_file.as_deref())?,
    };
    match &cli.command {
        Command::Group(cmd) => group_cmd(&ctx, cmd),
        Command::Orbits(cmd) => orbits_cmd(&ctx, cmd).map(|_| None),
        Command::Euler { group, assignment } => {
            let (_, g) = ctx.group(group)?;
            let (t, p) = orbit_setup(&g)?;
            let a = read_assignment(assignment, &t, &p)?;
            let r = r_vector(&t, &a)?;
            let chi = euler(&t, &a)?;
            let link = link_euler_fast(&t, &a, 0)?;
            let v = json!({
                "r_vector": r.r,
                "euler": chi,
                "link_euler_x1": link,
                "monotone": assert_monotone(&p, &a),
            });
            ctx.emit(&v, || format!("r {:?}\nchi {chi}\nchi_link {link}\n", r.r));
            Ok(None)
        }
        Command::Fixedpoint {
            group,
            subgroup,
            assignment,
        } => {
            let (_, g) = ctx.group(group)?;
            let (sr, h) = ctx.group(subgroup)?;
            if !h.is_subgroup_of(&g) {
                bail!("{} is not a subgroup of {group}", sr.name);
            }
            let (t, p) = orbit_setup(&g)?;
            let a = read_assignment(assignment, &t, &p)?;
            let fp = fixed_point_complex(&t, &a, &h)?;
            let v = json!({
                "subgroup": sr.name,
                "blocks": fp.blocks,
                "faces": fp.face_lists(),
                "face_counts": fp.face_counts(),
                "euler": fp.euler,
            });
            ctx.emit(&v, || {
                format!(
                    "{}: {} blocks, face counts {:?}, chi {}\n",
                    sr.name,
                    fp.blocks.len(),
                    fp.face_counts(),
                    fp.euler
                )
            });
            Ok(None)
        }
        Command::Dtree { group, assignment } => {
            let (_, g) = ctx.group(group)?;
            let (t, p) = orbit_setup(&g)?;
            let a = read_assignment(assignment, &t, &p)?;
            let f = BooleanFunction::from_assignment(&t, &a)?;
            let cert = adversary_path(&f)?;
            let elusive = cert.depth == f.arity();
            let v = json!({
                "n": f.arity(),
                "depth": cert.depth,
                "elusive": elusive,
                "certificate": cert,
            });
            ctx.emit(&v, || {
                format!(
                    "D(f) = {} of {}{}\nadversary path {:?}\n",
                    cert.depth,
                    f.arity(),
                    if elusive { " (elusive)" } else { "" },
                    cert.path
                )
            });
            Ok(None)
        }
        Command::ConjectureCheck { n } => {
            let r = exhaustive_conjecture_check(*n)?;
            ctx.emit(&serde_json::to_value(&r)?, || {
                format!(
                    "n = {}: {} monotone functions, {} nontrivial weakly symmetric, {} elusive, {} counterexamples\n\
                     non-elusive with f(empty) = 1: {}, with chi = 1: {}\n",
                    r.n,
                    r.monotone_functions,
                    r.weakly_symmetric_nontrivial,
                    r.elusive_weakly_symmetric,
                    r.counterexamples.len(),
                    r.non_elusive,
                    r.non_elusive_chi_one
                )
            });
            Ok((!r.holds()).then_some(Failed))
        }
        Command::Verify14(args) => {
            let mut schedules = vec![args.schedule.clone()];
            if args.seed_independent {
                let other = if args.schedule == "most-blocks" {
                    "fewest-blocks"
                } else {
                    "most-blocks"
                };
                schedules.push(other.into());
            }
            let opts = Verify14Options {
                schedules,
                search: SearchOptions {
                    link_check: !args.no_link_check,
                    residual_cap: args.cap,
                    jobs: args.jobs.max(1),
                    audit: args.audit,
                    ..SearchOptions::default()
                },
                sylow: !args.no_sylow,
                witness_search: !args.no_witness_search,
            };
            let r = verify14(&ctx.bundle, &opts)?;
            match ctx.format {
                Format::Json => out(&(r.to_json() + "\n")),
                Format::Text => out(&r.to_text()),
            }
            Ok((!r.verdict).then_some(Failed))
        }
        Command::ReplayAppendix => {
            let camp = Campaign::from_bundle(&ctx.bundle)?;
            let r = replay_appendix(&camp, &ctx.bundle)?;
            ctx.emit(&serde_json::to_value(&r)?, || replay_text(&r));
            Ok(None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Failed)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
