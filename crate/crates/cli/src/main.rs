use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use rca_core::harness::{verify_run, KappaSource, VerifyOptions};
use rca_core::regions::region_scan;
use rca_core::{corpus, run, Algo, AlgoConfig, NuResetRule, RegionParams, TerminationReason, Trajectory};

const SCHEMAS: &str = "\
Exit codes:
  0  success, or verification found no violations
  1  verification violations, or a run that diverged
  2  usage or input error

File formats (schema version 1; floats carry 17 significant digits):
  trajectory CSV   k,x_0..x_{n-1},f,grad_norm,lambda_minus,nu,delta,step_norm,
                   accepted,region,delta_f,model_decrease
                   (empty cell when a value is not available)
  trajectory JSON  objective_id, config, region_params, x0, f_inf, records,
                   termination_reason, evaluations, schema_version
  region-map CSV   x_0..x_{n-1},label,delta_f,grad_norm,lambda_minus
  report JSON      VerificationReport with schema_version
  config file      one `key = value` per line, `#` starts a comment; keys are
                   the long `run` flags with `-` or `_`; flags override the file";

#[derive(Parser)]
#[command(name = "rca", version, about = "Run, scan and verify regional complexity experiments")]
#[command(after_long_help = SCHEMAS)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one algorithm, or every spec file in a directory with --batch.
    #[command(after_long_help = SCHEMAS)]
    Run(Box<RunCmd>),
    /// Label a grid over the objective's scan domain.
    #[command(after_long_help = SCHEMAS)]
    Scan(ScanArgs),
    /// Check a trajectory JSON against the rate templates.
    #[command(after_long_help = SCHEMAS)]
    Verify(VerifyArgs),
    /// Print the corpus manifest as JSON.
    Corpus {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunCmd {
    /// `key = value` config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run every `*.conf` file in this directory in parallel.
    #[arg(long, conflicts_with = "config")]
    batch: Option<PathBuf>,
    #[command(flatten)]
    spec: RawSpec,
}

#[derive(Args, Clone, Default)]
struct RawSpec {
    /// Corpus objective id, e.g. `quad_sc` or `quad_sc:1,2`.
    #[arg(long)]
    obj: Option<String>,
    /// rg, rg_a, tr_g, tr_h, rn or rn_a.
    #[arg(long)]
    algo: Option<String>,
    /// Comma-separated point, `default`, or `random` (uniform on the scan domain).
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Seed for the `random` start.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    l1: Option<f64>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    psi: Option<f64>,
    #[arg(long)]
    nu_min: Option<f64>,
    #[arg(long)]
    nu_max: Option<f64>,
    #[arg(long)]
    nu0: Option<f64>,
    /// clamp or min.
    #[arg(long)]
    nu_reset: Option<String>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    eps_f: Option<f64>,
    #[arg(long)]
    eps_1: Option<f64>,
    #[arg(long)]
    eps_2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    divergence_floor: Option<f64>,
    /// Region parameter kappa; the corpus recommendation when absent.
    #[arg(long)]
    kappa: Option<f64>,
    /// Region parameter f_ref; the corpus recommendation when absent.
    #[arg(long, allow_hyphen_values = true)]
    f_ref: Option<f64>,
    /// Output stem; `<out>.csv` and `<out>.json` are written.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    obj: String,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    f_ref: Option<f64>,
    /// Grid nodes per axis.
    #[arg(long, default_value_t = 201)]
    res: usize,
    #[arg(long, default_value = "regions.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Trajectory JSON written by `run`.
    trajectory: PathBuf,
    /// Explicit kappa; overrides --kappa-source.
    #[arg(long)]
    kappa: Option<f64>,
    /// derived (from the trajectory), recorded (run parameters) or recommended (corpus).
    #[arg(long, default_value = "derived")]
    kappa_source: String,
    #[arg(long, allow_hyphen_values = true)]
    f_ref: Option<f64>,
    /// Replaces every calibrated or analytic zeta.
    #[arg(long)]
    zeta: Option<f64>,
    /// Replaces the window length.
    #[arg(long)]
    m: Option<usize>,
    /// Tolerances for the |K_f| counts.
    #[arg(long, value_delimiter = ',')]
    eps_f: Option<Vec<f64>>,
    #[arg(long)]
    eps_1: Option<f64>,
    #[arg(long)]
    eps_2: Option<f64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with a chosen exit status.
struct Exit(u8, anyhow::Error);

fn usage(e: anyhow::Error) -> Exit {
    Exit(2, e)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Run(c) => cmd_run(*c),
        Cmd::Scan(a) => cmd_scan(a).map_err(usage),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Corpus { out } => cmd_corpus(out).map_err(usage),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn parse_config(path: &Path) -> Result<RawSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected `key = value`", path.display(), i + 1))?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    let mut s = RawSpec::default();
    for (k, v) in map {
        let num = || v.parse::<f64>().with_context(|| format!("{}: bad number for {k}", path.display()));
        match k.as_str() {
            "obj" => s.obj = Some(v),
            "algo" => s.algo = Some(v),
            "x0" => s.x0 = Some(v),
            "seed" => s.seed = Some(v.parse()?),
            "l1" => s.l1 = Some(num()?),
            "l2" => s.l2 = Some(num()?),
            "eta" => s.eta = Some(num()?),
            "psi" => s.psi = Some(num()?),
            "nu_min" => s.nu_min = Some(num()?),
            "nu_max" => s.nu_max = Some(num()?),
            "nu0" => s.nu0 = Some(num()?),
            "nu_reset" => s.nu_reset = Some(v),
            "max_iters" => s.max_iters = Some(v.parse()?),
            "eps_f" => s.eps_f = Some(num()?),
            "eps_1" => s.eps_1 = Some(num()?),
            "eps_2" => s.eps_2 = Some(num()?),
            "divergence_floor" => s.divergence_floor = Some(num()?),
            "kappa" => s.kappa = Some(num()?),
            "f_ref" => s.f_ref = Some(num()?),
            "out" => s.out = Some(PathBuf::from(v)),
            _ => bail!("{}: unknown key `{k}`", path.display()),
        }
    }
    Ok(s)
}

impl RawSpec {
    /// Fields set in `flags` win.
    fn overlay(self, flags: &RawSpec) -> RawSpec {
        let f = flags.clone();
        RawSpec {
            obj: f.obj.or(self.obj),
            algo: f.algo.or(self.algo),
            x0: f.x0.or(self.x0),
            seed: f.seed.or(self.seed),
            l1: f.l1.or(self.l1),
            l2: f.l2.or(self.l2),
            eta: f.eta.or(self.eta),
            psi: f.psi.or(self.psi),
            nu_min: f.nu_min.or(self.nu_min),
            nu_max: f.nu_max.or(self.nu_max),
            nu0: f.nu0.or(self.nu0),
            nu_reset: f.nu_reset.or(self.nu_reset),
            max_iters: f.max_iters.or(self.max_iters),
            eps_f: f.eps_f.or(self.eps_f),
            eps_1: f.eps_1.or(self.eps_1),
            eps_2: f.eps_2.or(self.eps_2),
            divergence_floor: f.divergence_floor.or(self.divergence_floor),
            kappa: f.kappa.or(self.kappa),
            f_ref: f.f_ref.or(self.f_ref),
            out: f.out.or(self.out),
        }
    }
}

struct RunSpec {
    entry: corpus::CorpusEntry,
    config: AlgoConfig,
    params: RegionParams,
    x0: DVector<f64>,
    out: PathBuf,
}

fn resolve(raw: RawSpec, default_out: &Path) -> Result<RunSpec> {
    let obj = raw.obj.ok_or_else(|| anyhow!("missing --obj"))?;
    let entry = corpus::get(&obj)?;
    let algo: Algo = raw.algo.ok_or_else(|| anyhow!("missing --algo"))?.parse()?;
    let mut c = AlgoConfig::new(algo);
    c.l1 = raw.l1;
    c.l2 = raw.l2;
    c = c.fill_from_constants(&entry.objective);
    if let Some(v) = raw.eta {
        c.eta = v;
    }
    if let Some(v) = raw.psi {
        c.psi = v;
    }
    if let Some(v) = raw.nu_min {
        c.nu_min = v;
    }
    if let Some(v) = raw.nu_max {
        c.nu_max = v;
    }
    c.nu0 = raw.nu0;
    if let Some(v) = raw.nu_reset {
        c.nu_reset_rule = v.parse::<NuResetRule>()?;
    }
    if let Some(v) = raw.max_iters {
        c.max_iters = v;
    }
    c.termination.eps_f = raw.eps_f;
    c.termination.eps_1 = raw.eps_1;
    c.termination.eps_2 = raw.eps_2;
    c.divergence_floor = raw.divergence_floor;
    c.validate_for(&entry.objective)?;

    let mut params = entry.recommended;
    if let Some(k) = raw.kappa {
        params.kappa = k;
    }
    if let Some(f) = raw.f_ref {
        params.f_ref = f;
    }
    params.validate()?;

    let x0 = match raw.x0.as_deref().map(str::trim) {
        None | Some("default") => entry.default_x0.clone(),
        Some("random") => {
            let mut rng = ChaCha8Rng::seed_from_u64(raw.seed.unwrap_or(0));
            let d = &entry.objective.scan_domain;
            d.lower.iter().zip(&d.upper).map(|(lo, hi)| rng.random_range(*lo..=*hi)).collect()
        }
        Some(s) => s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("bad --x0 `{s}`"))?,
    };
    Ok(RunSpec {
        entry,
        config: c,
        params,
        x0: DVector::from_vec(x0),
        out: raw.out.unwrap_or_else(|| default_out.to_path_buf()),
    })
}

/// Runs one spec; `Ok(false)` when the run diverged.
fn execute(spec: &RunSpec) -> Result<(Trajectory, bool)> {
    let t = run(&spec.entry.objective, &spec.config, &spec.params, &spec.x0)?;
    if let Some(dir) = spec.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    t.write_files(&spec.out)?;
    info!("wrote {}.{{csv,json}}", spec.out.display());
    let ok = t.termination_reason != TerminationReason::Diverged;
    Ok((t, ok))
}

fn summary(t: &Trajectory) -> String {
    let last = t.last();
    let gap = t
        .f_inf
        .map(|fi| format!("{:.6e}", last.f - fi))
        .unwrap_or_else(|| "unknown".into());
    format!(
        "{} {}: iterations {} termination {} final_f {:.6e} final_delta_f {}",
        t.objective_id,
        t.config.algo,
        t.records.len() - 1,
        t.termination_reason,
        last.f,
        gap
    )
}

fn cmd_run(c: RunCmd) -> std::result::Result<(), Exit> {
    if let Some(dir) = c.batch {
        return run_batch(&dir, &c.spec);
    }
    let raw = match &c.config {
        Some(p) => parse_config(p).map_err(usage)?.overlay(&c.spec),
        None => c.spec,
    };
    let spec = resolve(raw, Path::new("traj")).map_err(usage)?;
    let (t, ok) = execute(&spec).map_err(usage)?;
    println!("{}", summary(&t));
    if ok {
        Ok(())
    } else {
        Err(Exit(1, anyhow!("run diverged; partial trajectory written to {}", spec.out.display())))
    }
}

fn run_batch(dir: &Path, flags: &RawSpec) -> std::result::Result<(), Exit> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))
        .map_err(usage)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "conf"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(usage(anyhow!("no *.conf files in {}", dir.display())));
    }
    let out_dir = flags.out.clone().unwrap_or_else(|| dir.to_path_buf());
    let mut flags = flags.clone();
    flags.out = None;
    let results: Vec<_> = files
        .par_iter()
        .map(|f| -> std::result::Result<Trajectory, Exit> {
            let raw = parse_config(f).map_err(usage)?.overlay(&flags);
            let stem = f.file_stem().unwrap_or_default();
            let mut spec = resolve(raw, &out_dir.join(stem)).map_err(usage)?;
            if spec.out.is_relative() && !spec.out.starts_with(&out_dir) {
                spec.out = out_dir.join(&spec.out);
            }
            let (t, ok) = execute(&spec).map_err(usage)?;
            if ok {
                Ok(t)
            } else {
                Err(Exit(1, anyhow!("{}: run diverged", f.display())))
            }
        })
        .collect();
    let (mut code, mut failed) = (0, 0);
    for (f, r) in files.iter().zip(results) {
        match r {
            Ok(t) => println!("{}: {}", f.display(), summary(&t)),
            Err(Exit(c, e)) => {
                eprintln!("{}: error: {e:#}", f.display());
                code = code.max(c);
                failed += 1;
            }
        }
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Exit(code, anyhow!("{failed} of {} runs failed", files.len())))
    }
}

fn cmd_scan(a: ScanArgs) -> Result<()> {
    let entry = corpus::get(&a.obj)?;
    let mut params = entry.recommended;
    if let Some(k) = a.kappa {
        params.kappa = k;
    }
    if let Some(f) = a.f_ref {
        params.f_ref = f;
    }
    let map = region_scan(&entry.objective, a.res, &params)?;
    fs::write(&a.out, map.to_csv()).with_context(|| format!("writing {}", a.out.display()))?;
    for (r, n) in map.histogram() {
        println!("{r} {n}");
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> std::result::Result<(), Exit> {
    let t = Trajectory::read_json(&a.trajectory)
        .with_context(|| format!("loading {}", a.trajectory.display()))
        .map_err(usage)?;
    let kappa = match a.kappa {
        Some(k) => KappaSource::Explicit(k),
        None => match a.kappa_source.as_str() {
            "derived" => KappaSource::Derived,
            "recorded" => KappaSource::Recorded,
            "recommended" => KappaSource::Recommended,
            s => return Err(usage(anyhow!("unknown kappa source `{s}`"))),
        },
    };
    let mut opts = VerifyOptions {
        kappa,
        f_ref: a.f_ref,
        zeta: a.zeta,
        m: a.m,
        eps_1: a.eps_1,
        eps_2: a.eps_2,
        ..VerifyOptions::default()
    };
    if let Some(e) = a.eps_f {
        opts.eps_f = e;
    }
    let rep = verify_run(&t, &opts).map_err(|e| usage(e.into()))?;
    let json = rep.to_json().map_err(|e| usage(e.into()))?;
    match &a.out {
        Some(p) => fs::write(p, &json)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(usage)?,
        None => println!("{json}"),
    }
    eprintln!(
        "{}: {} checks, {} applicable, {} violations",
        rep.trajectory_id,
        rep.coverage.windows,
        rep.coverage.applicable,
        rep.violations.len()
    );
    if rep.is_clean() {
        Ok(())
    } else {
        Err(Exit(1, anyhow!("{} violations", rep.violations.len())))
    }
}

fn cmd_corpus(out: Option<PathBuf>) -> Result<()> {
    let json = serde_json::to_string_pretty(&corpus::manifest())?;
    match out {
        Some(p) => fs::write(&p, json).with_context(|| format!("writing {}", p.display()))?,
        None => println!("{json}"),
    }
    Ok(())
}
