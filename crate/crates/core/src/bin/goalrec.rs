use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use goalrec::domains::{generate, Family, GeneratorConfig, Setting};
use goalrec::gbt::GbtEnsemble;
use goalrec::harness::{
    build_dataset, curve_csv, evaluate, learning_curve_eval, truncate, CurveMethod, Dataset, Gbt, HyperConfig, Lgr,
    Lstm, Method, RATIOS,
};
use goalrec::planner::{gbfs_plan, validate, SearchConfig};
use goalrec::seq::SeqModel;
use goalrec::strips::{ground, parse_domain, parse_problem};

#[derive(Parser)]
#[command(name = "goalrec", version, about = "Goal recognition experiments over plan traces")]
struct Cli {
    /// TOML file of hyperparameters; missing keys keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    #[arg(long, default_value = "set1")]
    setting: Setting,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Candidate goal cells for grid set2.
    #[arg(long, default_value_t = 10)]
    grid_goal_pool: usize,
}

impl GenArgs {
    fn config(&self) -> GeneratorConfig {
        GeneratorConfig {
            grid_goal_pool: self.grid_goal_pool,
            ..GeneratorConfig::new(self.family, self.setting, self.seed, self.scale)
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a labeled trace dataset into a directory.
    Generate {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan for one instance, either from PDDL files or a generated one.
    Plan {
        #[arg(long, requires = "problem")]
        domain: Option<PathBuf>,
        #[arg(long, requires = "domain")]
        problem: Option<PathBuf>,
        #[arg(long, required_unless_present = "domain")]
        family: Option<Family>,
        #[arg(long, default_value = "set1")]
        setting: Setting,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Hypothesis to plan for; defaults to the true goal.
        #[arg(long)]
        goal: Option<usize>,
        /// Heuristic noise; 0 gives greedy tie-broken search.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Print the generated problem before the plan.
        #[arg(long)]
        show_problem: bool,
    },
    /// Fit a learned recognizer on a dataset's training split.
    Train {
        #[arg(long, value_parser = ["gbt", "lstm"])]
        method: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict the goal of one dataset trace from a prefix.
    Recognize {
        /// lgr, lgr+prior, gbt or lstm.
        #[arg(long)]
        method: String,
        #[arg(long)]
        data: PathBuf,
        /// Trace index within the dataset.
        #[arg(long)]
        trace: usize,
        #[arg(long, default_value_t = 1.0)]
        ratio: f64,
        /// Trained model file for gbt or lstm.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Accuracy and timing of methods on the held-out traces.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "lstm,gbt,lgr,lgr+prior")]
        methods: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        #[arg(long)]
        gbt_model: Option<PathBuf>,
        #[arg(long)]
        lstm_model: Option<PathBuf>,
        /// Write CSV here instead of printing a table.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace timings with dashes so reports compare byte for byte.
        #[arg(long)]
        no_timing: bool,
    },
    /// Held-out accuracy as a function of training-set size.
    Curve {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, value_parser = ["gbt", "lstm"], default_value = "lstm")]
        method: String,
        #[arg(long, value_delimiter = ',', default_value = "10,50,100,200,400")]
        sizes: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let hyper = match &cli.config {
        Some(p) => HyperConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => HyperConfig::default(),
    };
    match cli.cmd {
        Cmd::Generate { gen, n, out } => {
            let ds = build_dataset(&gen.config(), n)?;
            ds.save(&out)?;
            eprintln!(
                "{} traces, {} actions, {} instances -> {}",
                ds.traces.len(),
                ds.vocab.len(),
                ds.instances.len(),
                out.display()
            );
        }
        Cmd::Plan {
            domain,
            problem,
            family,
            setting,
            seed,
            scale,
            goal,
            noise,
            show_problem,
        } => {
            let task = match (domain, problem, family) {
                (Some(d), Some(p), _) => {
                    let schema = parse_domain(&fs::read_to_string(&d)?)?;
                    ground(&schema, &parse_problem(&fs::read_to_string(&p)?, &schema)?)?
                }
                (_, _, Some(f)) => {
                    let inst = generate(&GeneratorConfig::new(f, setting, seed, scale))?;
                    if show_problem {
                        println!("{}", inst.problem);
                    }
                    inst.task
                }
                _ => bail!("give --domain and --problem, or --family"),
            };
            let h = match goal.or(task.true_goal()) {
                Some(h) if h < task.hypotheses().len() => h,
                Some(h) => bail!("goal {h} out of range"),
                None => bail!("instance has no true goal; pass --goal"),
            };
            let cfg = SearchConfig {
                seed,
                noise,
                ..SearchConfig::default()
            };
            let plan = gbfs_plan(&task, task.hypothesis(h), &cfg)?;
            validate(&task, &plan, task.hypothesis(h))?;
            for &a in &plan.actions {
                println!("{}", task.action(a));
            }
            eprintln!("; {} steps to hypothesis {h}", plan.actions.len());
        }
        Cmd::Train { method, data, out } => {
            let ds = Dataset::load(&data)?;
            let w = BufWriter::new(File::create(&out)?);
            let train = ds.split.train.clone();
            if method == "gbt" {
                let mut m = Gbt::new(hyper.gbt);
                m.fit(&ds, &train)?.save(w)?;
                eprintln!(
                    "final train loss {:.5}",
                    m.train_loss.last().copied().unwrap_or(f64::NAN)
                );
            } else {
                let mut m = Lstm::new(hyper.lstm, hyper.seed);
                m.fit(&ds, &train)?.save(w)?;
                eprintln!(
                    "final batch loss {:.5}",
                    m.batch_loss.last().copied().unwrap_or(f64::NAN)
                );
            }
        }
        Cmd::Recognize {
            method,
            data,
            trace,
            ratio,
            model,
        } => {
            let ds = Dataset::load(&data)?;
            if trace >= ds.traces.len() {
                bail!("trace {trace} out of range ({} traces)", ds.traces.len());
            }
            if !(ratio > 0.0 && ratio <= 1.0) {
                bail!("ratio must be in (0, 1]");
            }
            let prefix = truncate(&ds.traces[trace], ratio);
            let mut m = build_method(&method, &hyper, model.as_deref())?;
            if !m.supports(&ds) {
                bail!("{method} cannot handle {} datasets", ds.meta.family);
            }
            m.prepare(&ds, &[trace], 1)?;
            let (pred, t) = m.predict(&ds, trace, &prefix)?;
            println!(
                "predicted {pred} label {} observed {}/{} ({:.6}s)",
                ds.traces[trace].label.map_or_else(|| "-".into(), |l| l.to_string()),
                prefix.len(),
                ds.traces[trace].len(),
                t.as_secs_f64()
            );
        }
        Cmd::Eval {
            data,
            methods,
            ratios,
            gbt_model,
            lstm_model,
            out,
            no_timing,
        } => {
            let ds = Dataset::load(&data)?;
            let mut ms = methods
                .iter()
                .map(|name| {
                    let model = match name.as_str() {
                        "gbt" => gbt_model.as_deref(),
                        "lstm" => lstm_model.as_deref(),
                        _ => None,
                    };
                    build_method(name, &hyper, model)
                })
                .collect::<Result<Vec<_>>>()?;
            let ratios = ratios.unwrap_or_else(|| RATIOS.to_vec());
            let mut report = evaluate(&mut ms, &ds, &ratios)?;
            if no_timing {
                report = report.without_timing();
            }
            match out {
                Some(p) => fs::write(p, report.to_csv())?,
                None => print!("{}", report.to_table()),
            }
        }
        Cmd::Curve {
            gen,
            method,
            sizes,
            out,
        } => {
            let method: CurveMethod = method.parse()?;
            let points = learning_curve_eval(&gen.config(), &sizes, method, &hyper)?;
            let csv = curve_csv(&points);
            match out {
                Some(p) => fs::write(p, csv)?,
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}

fn build_method(name: &str, hyper: &HyperConfig, model: Option<&Path>) -> Result<Box<dyn Method>> {
    let open = |p: &Path| {
        File::open(p)
            .map(BufReader::new)
            .with_context(|| format!("opening {}", p.display()))
    };
    Ok(match (name, model) {
        ("lgr", _) => Box::new(Lgr::new(hyper.theta, false)),
        ("lgr+prior", _) => Box::new(Lgr::new(hyper.theta, true)),
        ("gbt", Some(p)) => Box::new(Gbt::pretrained(GbtEnsemble::load(open(p)?)?)),
        ("gbt", None) => Box::new(Gbt::new(hyper.gbt)),
        ("lstm", Some(p)) => Box::new(Lstm::pretrained(SeqModel::load(open(p)?)?)),
        ("lstm", None) => Box::new(Lstm::new(hyper.lstm, hyper.seed)),
        _ => bail!("unknown method `{name}`; expected lgr, lgr+prior, gbt or lstm"),
    })
}
