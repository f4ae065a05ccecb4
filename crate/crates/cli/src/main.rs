use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use toric_fano::classify::table1::{self, label_by_matching, parse_expectations, verify_table1_edges};
use toric_fano::classify::{
    are_isomorphic, classify, gorenstein_polygons, resume_closure, CheckpointConfig, Closure, ClosureOptions,
    GraphSummary, Mode,
};
use toric_fano::fan::{ConeRef, Fan};
use toric_fano::format::{parse_fan, parse_polytope, write_fan, write_polytope, FanDocument};
use toric_fano::polytope::{
    crepant_resolution, gorenstein_class_of, is_reflexive, polar_dual, Polytope, Witness,
};
use toric_fano::primitive::{
    is_fano, is_pseudo_symmetric, is_splitting_fan, is_weak_fano, primitive_relations, PrimitiveCollection,
};
use toric_fano::surgery::{blow_down, blow_up, flop, BlowDownSpec};

#[derive(Parser)]
#[command(name = "toric-fano", version, about = "Nonsingular toric Fano varieties: fans, surgery and classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fano,
    Weak,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Lines,
}

#[derive(Subcommand)]
enum Command {
    /// Check every fan invariant and print the report.
    Validate { fan: PathBuf },
    /// Print rays, primitive relations and the Fano-type flags of a fan.
    Analyze { fan: PathBuf },
    /// Blow up along a cone given by 0-based ray indices.
    Blowup {
        fan: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        cone: Vec<usize>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Blow down along a relation, by its index in the `analyze` listing.
    Blowdown {
        fan: PathBuf,
        #[arg(long)]
        relation: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Flop a primitive collection, by its index in the `analyze` listing.
    Flop {
        fan: PathBuf,
        #[arg(long)]
        collection: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Polar dual of a polytope with the origin in its interior.
    Polar {
        polytope: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Decide reflexivity and print the certificate.
    Reflexive { polytope: PathBuf },
    /// Crepant resolution of a reflexive polytope of dimension at most 3.
    Resolve {
        polytope: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// The reflexive polytope of a weak Fano fan.
    GorensteinClass {
        fan: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Enumerate classes connected to projective space.
    Enumerate {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum, default_value = "fano")]
        mode: ModeArg,
        #[arg(long, env = "TORIC_FANO_THREADS")]
        threads: Option<usize>,
        /// Checkpoint file; defaults to `<out>/checkpoint.txt` in dimension 4.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        checkpoint_interval: usize,
        #[arg(long)]
        no_checkpoint: bool,
        /// Continue from the checkpoint file instead of starting afresh.
        #[arg(long)]
        resume: bool,
        /// Skip the cross-checks and filter blow-downs by the predictor.
        #[arg(long)]
        no_audit: bool,
        #[arg(long)]
        confirm_isomorphisms: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
        /// Directory for graph files and representative fans.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reflexive polygons from the weak Fano surfaces.
    GorensteinSurfaces {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "TORIC_FANO_THREADS")]
        threads: Option<usize>,
    },
    /// Decide whether two fans are isomorphic.
    Iso { first: PathBuf, second: PathBuf },
    /// Check a 4-dimensional graph against the blow-up table.
    VerifyTable1 {
        graph: PathBuf,
        /// Expectations file; the built-in table when omitted.
        #[arg(long)]
        expectations: Option<PathBuf>,
        /// Only report these rows.
        #[arg(long, value_delimiter = ',')]
        rows: Vec<usize>,
        /// Label all classes by matching the whole table before checking.
        #[arg(long)]
        full: bool,
    },
}

/// Outcome of a command that ran to completion.
enum Verdict {
    Ok,
    Failed,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_fan(path: &Path) -> Result<Fan> {
    parse_fan(&read(path)?).with_context(|| format!("loading fan {}", path.display()))
}

fn load_polytope(path: &Path) -> Result<Polytope> {
    parse_polytope(&read(path)?).with_context(|| format!("loading polytope {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn analyze(fan: &Fan) -> Result<()> {
    println!("dim {}", fan.dim());
    println!("rays {}", fan.n_rays());
    for (i, r) in fan.rays().iter().enumerate() {
        println!("  x{i} = {r}");
    }
    println!("picard {}", fan.picard_number());
    if !fan.is_nonsingular() {
        println!("nonsingular no");
        return Ok(());
    }
    let rels = primitive_relations(fan)?;
    println!("primitive collections {}", rels.len());
    for (k, r) in rels.iter().enumerate() {
        println!("  [{k}] {}  degree {}", r.render(0), r.degree);
    }
    let fano = is_fano(fan)?;
    let weak = is_weak_fano(fan)?;
    println!("fano {}", yes_no(fano));
    println!("weak-fano {}", yes_no(weak));
    println!("pseudo-symmetric {}", yes_no(is_pseudo_symmetric(fan)));
    println!("splitting {}", yes_no(is_splitting_fan(fan)));
    Ok(())
}

fn write_closure(closure: &Closure, format: OutputFormat, out: Option<&Path>) -> Result<()> {
    let graph = &closure.graph;
    if let Some(dir) = out {
        fs::create_dir_all(dir.join("fans"))?;
        fs::write(dir.join("graph.txt"), graph.to_lines())?;
        fs::write(dir.join("graph.dot"), graph.to_dot())?;
        for n in &graph.nodes {
            fs::write(dir.join("fans").join(format!("{}.toml", n.key.fingerprint())), write_fan(&n.fan))?;
        }
    }
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    match format {
        OutputFormat::Lines => write!(w, "{}", graph.to_lines())?,
        OutputFormat::Text => {
            writeln!(w, "classes {}", graph.nodes.len())?;
            writeln!(w, "edges {}", graph.edges.len())?;
            for (name, t) in closure.audit.tallies() {
                writeln!(w, "audit {name:<26} checked {:>8} failed {}", t.checked, t.failed)?;
                for e in &t.examples {
                    writeln!(w, "  {e}")?;
                }
            }
        }
    }
    Ok(())
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            bail!("thread count must be positive");
        }
        b = b.num_threads(t);
    }
    Ok(b.build()?)
}

fn run(cli: Cli) -> Result<Verdict> {
    match cli.command {
        Command::Validate { fan } => {
            let doc = FanDocument::parse(&read(&fan)?)?;
            let report = doc.validate();
            print!("{report}");
            Ok(if report.is_valid() { Verdict::Ok } else { Verdict::Failed })
        }
        Command::Analyze { fan } => {
            let doc = FanDocument::parse(&read(&fan)?)?;
            let report = doc.validate();
            if !report.is_valid() {
                print!("{report}");
                return Ok(Verdict::Failed);
            }
            analyze(&doc.into_fan()?)?;
            Ok(Verdict::Ok)
        }
        Command::Blowup { fan, cone, out } => {
            let s = blow_up(&load_fan(&fan)?, &ConeRef::new(cone))?;
            emit(&write_fan(&s.fan), out.as_deref())?;
            Ok(Verdict::Ok)
        }
        Command::Blowdown { fan, relation, out } => {
            let f = load_fan(&fan)?;
            let rels = primitive_relations(&f)?;
            let rel = rels.get(relation).ok_or_else(|| anyhow!("no relation with index {relation}"))?;
            let s = blow_down(&f, &BlowDownSpec::new(rel.clone())?)?;
            emit(&write_fan(&s.fan), out.as_deref())?;
            Ok(Verdict::Ok)
        }
        Command::Flop { fan, collection, out } => {
            let f = load_fan(&fan)?;
            let rels = primitive_relations(&f)?;
            let rel = rels.get(collection).ok_or_else(|| anyhow!("no collection with index {collection}"))?;
            let s = flop(&f, &PrimitiveCollection::new(rel.collection.indices().to_vec()))?;
            emit(&write_fan(&s.fan), out.as_deref())?;
            Ok(Verdict::Ok)
        }
        Command::Polar { polytope, out } => {
            emit(&write_polytope(&polar_dual(&load_polytope(&polytope)?)?), out.as_deref())?;
            Ok(Verdict::Ok)
        }
        Command::Reflexive { polytope } => {
            let cert = is_reflexive(&load_polytope(&polytope)?)?;
            println!("reflexive {}", yes_no(cert.reflexive));
            match cert.witness {
                Witness::PolarVertices(vs) => {
                    println!("polar vertices");
                    for v in vs {
                        println!("  {v}");
                    }
                }
                Witness::ViolatingFacet(f) => {
                    println!("facet {} at distance {}", f.normal, f.offset);
                }
            }
            Ok(if cert.reflexive { Verdict::Ok } else { Verdict::Failed })
        }
        Command::Resolve { polytope, out } => {
            emit(&write_fan(&crepant_resolution(&load_polytope(&polytope)?)?), out.as_deref())?;
            Ok(Verdict::Ok)
        }
        Command::GorensteinClass { fan, out } => {
            emit(&write_polytope(&gorenstein_class_of(&load_fan(&fan)?)?), out.as_deref())?;
            Ok(Verdict::Ok)
        }
        Command::Enumerate {
            dim,
            mode,
            threads,
            checkpoint,
            checkpoint_interval,
            no_checkpoint,
            resume,
            no_audit,
            confirm_isomorphisms,
            format,
            out,
        } => {
            if !(2..=4).contains(&dim) {
                bail!("enumeration supports dimensions 2, 3 and 4");
            }
            if checkpoint_interval == 0 {
                bail!("checkpoint interval must be positive");
            }
            let mode = match mode {
                ModeArg::Fano => Mode::Fano,
                ModeArg::Weak => Mode::WeakFano,
            };
            let cp_path = match (checkpoint, &out) {
                _ if no_checkpoint => None,
                (Some(p), _) => Some(p),
                (None, Some(dir)) if dim == 4 => Some(dir.join("checkpoint.txt")),
                _ => None,
            };
            if let Some(dir) = &out {
                fs::create_dir_all(dir)?;
            }
            let options = ClosureOptions {
                audit: !no_audit,
                confirm_isomorphisms,
                checkpoint: cp_path.clone().map(|path| CheckpointConfig { path, interval: checkpoint_interval }),
            };
            let pool = thread_pool(threads)?;
            let mut closure = pool.install(|| -> Result<Closure> {
                if resume {
                    let path = cp_path.as_ref().ok_or_else(|| anyhow!("--resume needs a checkpoint file"))?;
                    Ok(resume_closure(&read(path)?, &options)?)
                } else {
                    Ok(classify(dim, mode, &options)?)
                }
            })?;
            if resume && dim == 4 && mode == Mode::Fano {
                table1::attach_fixture_labels(&mut closure.graph)?;
            }
            write_closure(&closure, format, out.as_deref())?;
            Ok(if closure.audit.is_clean() { Verdict::Ok } else { Verdict::Failed })
        }
        Command::GorensteinSurfaces { out, threads } => {
            let pool = thread_pool(threads)?;
            let (polygons, _) = pool.install(|| gorenstein_polygons(&ClosureOptions::default()))?;
            println!("polygons {}", polygons.len());
            for (i, p) in polygons.iter().enumerate() {
                let vs: Vec<String> = p
                    .lattice_vertices()
                    .ok_or_else(|| anyhow!("non-lattice polygon"))?
                    .iter()
                    .map(ToString::to_string)
                    .collect();
                println!("  [{i}] {}", vs.join(" "));
            }
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                for (i, p) in polygons.iter().enumerate() {
                    fs::write(dir.join(format!("polygon-{i:02}.toml")), write_polytope(p))?;
                }
            }
            Ok(Verdict::Ok)
        }
        Command::Iso { first, second } => {
            let iso = are_isomorphic(&load_fan(&first)?, &load_fan(&second)?)?;
            println!("isomorphic {}", yes_no(iso));
            Ok(if iso { Verdict::Ok } else { Verdict::Failed })
        }
        Command::VerifyTable1 { graph, expectations, rows, full } => {
            let mut summary = GraphSummary::parse(&read(&graph)?)?;
            let table = match expectations {
                Some(p) => parse_expectations(&read(&p)?)?,
                None => table1::table1(),
            };
            if full {
                let matched = label_by_matching(&mut summary, &table)?;
                println!("structural match {}", if matched { "found" } else { "not found" });
                if !matched {
                    return Ok(Verdict::Failed);
                }
            }
            let selected: Vec<_> =
                table.iter().filter(|r| rows.is_empty() || rows.contains(&r.row)).cloned().collect();
            if selected.is_empty() {
                bail!("no rows selected");
            }
            let report = verify_table1_edges(&summary, &selected)?;
            print!("{report}");
            Ok(if report.all_pass() { Verdict::Ok } else { Verdict::Failed })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
