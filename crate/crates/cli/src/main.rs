//! Command-line front end: generate arrays, analyze their co-array figures
//! of merit, search for minimum-redundancy arrays, run the coupled imaging
//! simulation, and sweep family comparisons. Every command writes a run
//! manifest, and identical flags plus seed reproduce byte-identical outputs.

mod manifest;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coarray::configurations::{
    essential_elements, make_cra_with, satisfies_corner_property, ArrayFamily, ArrayKind,
    OddDimPolicy,
};
use coarray::geometry::{difference_coarray, is_contiguous, sum_coarray, ElementSet};
use coarray::imaging::{
    monte_carlo_rmse, trial_phase, ImagingConfig, ImagingStudy, ReferenceMode, ScanGrid, Scene,
};
use coarray::metrics::{aspect_ratio, redundancy, sparseness_sq};
use coarray::mra_search::{find_mra, min_unit_spacing_mra, SearchResult, SearchSpec};

use manifest::RunManifest;
use output::{fmt_f64, image_to_csv, image_to_pgm};

#[derive(Parser)]
#[command(
    name = "coarray",
    version,
    about = "Sparse planar array design, co-array analysis, MRA search, and coupled imaging"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory for files and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Seed for randomized operations.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a closed-form array and write it as JSON.
    Generate {
        /// Array family: ura | ba | cra.
        family: String,
        lx: i64,
        ly: i64,
        /// Output file name (default `<family>_<lx>x<ly>.json`).
        #[arg(long)]
        file: Option<String>,
        /// Reject odd dimensions for the cra family.
        #[arg(long)]
        reject_odd: bool,
    },
    /// Analyze an element-set file: redundancy, contiguity, sparseness.
    Analyze {
        /// Element set JSON file.
        input: PathBuf,
        /// Metrics output file name (default `<stem>_metrics.json`).
        #[arg(long)]
        file: Option<String>,
        /// Also dump the sum co-array as CSV.
        #[arg(long)]
        sum_csv: Option<String>,
        /// Also dump the difference co-array as CSV.
        #[arg(long)]
        diff_csv: Option<String>,
        /// Also list essential elements (requires a contiguous sum co-array).
        #[arg(long)]
        essential: bool,
    },
    /// Search for minimum-redundancy arrays on an aperture grid.
    Search {
        #[arg(long)]
        lx: i64,
        #[arg(long)]
        ly: i64,
        /// Enumerate all optimal solutions (canonical representatives).
        #[arg(long)]
        all: bool,
        /// Restrict the search to mirror-symmetric candidates.
        #[arg(long)]
        symmetric: bool,
        /// Node budget.
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
        /// Tractability guard on decision-variable count for --all.
        #[arg(long)]
        guard: Option<usize>,
        /// Result file name (default `search_<lx>x<ly>.json`).
        #[arg(long)]
        file: Option<String>,
    },
    /// Simulate coupled-array imaging: single phase or Monte-Carlo.
    Simulate {
        /// Array: ura | ba | cra, or a path to an element-set JSON file.
        #[arg(long)]
        array: String,
        #[arg(long)]
        lx: Option<i64>,
        #[arg(long)]
        ly: Option<i64>,
        /// Coupling magnitude.
        #[arg(long, default_value_t = 0.2)]
        c1: f64,
        /// Fixed coupling phase in radians (single-shot mode).
        #[arg(long)]
        phase: Option<f64>,
        /// Monte-Carlo trial count (summary mode).
        #[arg(long)]
        trials: Option<usize>,
        /// Dolph-Chebyshev sidelobe attenuation in dB.
        #[arg(long, default_value_t = 40.0)]
        sidelobe_db: f64,
        /// SVD energy fraction to retain.
        #[arg(long, default_value_t = 0.9999)]
        threshold: f64,
        /// Scan grid size per axis.
        #[arg(long, default_value_t = 201)]
        grid: usize,
        /// RMSE reference: self | ura.
        #[arg(long, default_value = "self")]
        reference: String,
        /// Output file prefix (default derived from the array).
        #[arg(long)]
        prefix: Option<String>,
    },
    /// Tabulate N, R, and sparseness across families and square apertures.
    Compare {
        /// Comma-separated families: ura, ba, cra, mra.
        #[arg(long, value_delimiter = ',')]
        families: Vec<String>,
        #[arg(long)]
        lmin: i64,
        #[arg(long)]
        lmax: i64,
        #[arg(long, default_value_t = 1)]
        step: i64,
        /// Node budget for mra rows.
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
        /// Guard for mra enumeration.
        #[arg(long)]
        guard: Option<usize>,
        /// Output CSV name (default `compare_<lmin>_<lmax>.csv`).
        #[arg(long)]
        file: Option<String>,
    },
}

// Exit codes: 0 ok, 2 usage, 3 input parse, 4 infeasible/budget, 5 internal.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Exit {
    Usage = 2,
    Parse = 3,
    Infeasible = 4,
    Internal = 5,
}

impl Exit {
    fn tag(self) -> &'static str {
        match self {
            Exit::Usage => "usage",
            Exit::Parse => "parse",
            Exit::Infeasible => "infeasible",
            Exit::Internal => "internal",
        }
    }
}

struct CliError {
    kind: Exit,
    msg: String,
}

impl CliError {
    fn new(kind: Exit, msg: impl Into<String>) -> Self {
        Self {
            kind,
            msg: msg.into(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Maps core errors onto exit codes; `as_parse` marks file-sourced data.
fn core_err(e: coarray::Error, as_parse: bool) -> CliError {
    use coarray::Error as E;
    let kind = match (&e, as_parse) {
        (_, true) => Exit::Parse,
        (E::TractabilityGuard { .. }, _) => Exit::Infeasible,
        (E::ContiguitySelfCheckFailed { .. }, _) => Exit::Infeasible,
        (E::InternalInvariant(_), _) => Exit::Internal,
        (E::MultiplicityShiftMismatch { .. }, _) => Exit::Internal,
        _ => Exit::Usage,
    };
    CliError::new(kind, e.to_string())
}

fn io_err(e: std::io::Error, path: &Path) -> CliError {
    CliError::new(Exit::Parse, format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        coarray::configure_thread_pool(threads);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind.tag(), e.msg);
            ExitCode::from(e.kind as u8)
        }
    }
}

fn ensure_out_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(e, dir))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], quiet: bool) -> CliResult<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| io_err(e, &path))?;
    if !quiet {
        println!("wrote {}", path.display());
    }
    Ok(path)
}

fn finish(cli: &Cli, manifest: &RunManifest) -> CliResult<()> {
    write_file(
        &cli.out,
        "run_manifest.json",
        manifest.to_json().as_bytes(),
        cli.quiet,
    )?;
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    ensure_out_dir(&cli.out)?;
    match &cli.command {
        Command::Generate {
            family,
            lx,
            ly,
            file,
            reject_odd,
        } => cmd_generate(cli, family, *lx, *ly, file.as_deref(), *reject_odd),
        Command::Analyze {
            input,
            file,
            sum_csv,
            diff_csv,
            essential,
        } => cmd_analyze(
            cli,
            input,
            file.as_deref(),
            sum_csv.as_deref(),
            diff_csv.as_deref(),
            *essential,
        ),
        Command::Search {
            lx,
            ly,
            all,
            symmetric,
            budget,
            guard,
            file,
        } => cmd_search(cli, *lx, *ly, *all, *symmetric, *budget, *guard, file.as_deref()),
        Command::Simulate {
            array,
            lx,
            ly,
            c1,
            phase,
            trials,
            sidelobe_db,
            threshold,
            grid,
            reference,
            prefix,
        } => cmd_simulate(
            cli,
            array,
            *lx,
            *ly,
            *c1,
            *phase,
            *trials,
            *sidelobe_db,
            *threshold,
            *grid,
            reference,
            prefix.as_deref(),
        ),
        Command::Compare {
            families,
            lmin,
            lmax,
            step,
            budget,
            guard,
            file,
        } => cmd_compare(cli, families, *lmin, *lmax, *step, *budget, *guard, file.as_deref()),
    }
}

fn parse_family(name: &str) -> CliResult<ArrayKind> {
    ArrayKind::parse(name)
        .ok_or_else(|| CliError::new(Exit::Usage, format!("unknown family '{name}'")))
}

fn cmd_generate(
    cli: &Cli,
    family: &str,
    lx: i64,
    ly: i64,
    file: Option<&str>,
    reject_odd: bool,
) -> CliResult<()> {
    let kind = parse_family(family)?;
    let d = match kind {
        ArrayKind::Cra if reject_odd => {
            make_cra_with(lx, ly, OddDimPolicy::Reject).map_err(|e| core_err(e, false))?
        }
        _ => ArrayFamily::new(kind, lx, ly)
            .and_then(|f| f.generate())
            .map_err(|e| core_err(e, false))?,
    };
    let sum_ok = is_contiguous(&sum_coarray(&d), lx, ly);
    let diff_ok = is_contiguous(&difference_coarray(&d), lx, ly);
    let name = file
        .map(str::to_owned)
        .unwrap_or_else(|| format!("{}_{}x{}.json", kind.name(), lx, ly));
    write_file(&cli.out, &name, format!("{}\n", d.to_json()).as_bytes(), cli.quiet)?;
    if !cli.quiet {
        println!(
            "{} lx={} ly={} n={} contiguous_sum={} contiguous_diff={}",
            kind.name(),
            lx,
            ly,
            d.len(),
            sum_ok,
            diff_ok
        );
    }
    finish(cli, &RunManifest::new(cli.seed))
}

fn load_element_set(path: &Path, manifest: &mut RunManifest) -> CliResult<ElementSet> {
    let bytes = fs::read(path).map_err(|e| io_err(e, path))?;
    manifest.add_input(path, &bytes);
    let text = String::from_utf8(bytes)
        .map_err(|e| CliError::new(Exit::Parse, format!("{}: {e}", path.display())))?;
    ElementSet::from_json(&text).map_err(|e| core_err(e, true))
}

fn metrics_json(d: &ElementSet) -> String {
    let sum = sum_coarray(d);
    let diff = difference_coarray(d);
    format!(
        "{{\"n\":{},\"redundancy\":{},\"contiguous_sum\":{},\"contiguous_diff\":{},\"s1\":{},\"s_sqrt2\":{},\"s2\":{},\"aspect_ratio\":{}}}\n",
        d.len(),
        fmt_f64(redundancy(d)),
        is_contiguous(&sum, d.lx(), d.ly()),
        is_contiguous(&diff, d.lx(), d.ly()),
        sparseness_sq(d, 1),
        sparseness_sq(d, 2),
        sparseness_sq(d, 4),
        fmt_f64(aspect_ratio(d.lx(), d.ly())),
    )
}

fn cmd_analyze(
    cli: &Cli,
    input: &Path,
    file: Option<&str>,
    sum_csv: Option<&str>,
    diff_csv: Option<&str>,
    essential: bool,
) -> CliResult<()> {
    let mut manifest = RunManifest::new(cli.seed);
    let d = load_element_set(input, &mut manifest)?;
    let json = metrics_json(&d);
    print!("{json}");
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "input".into());
    let name = file
        .map(str::to_owned)
        .unwrap_or_else(|| format!("{stem}_metrics.json"));
    write_file(&cli.out, &name, json.as_bytes(), cli.quiet)?;
    if let Some(name) = sum_csv {
        write_file(&cli.out, name, sum_coarray(&d).to_csv().as_bytes(), cli.quiet)?;
    }
    if let Some(name) = diff_csv {
        write_file(&cli.out, name, difference_coarray(&d).to_csv().as_bytes(), cli.quiet)?;
    }
    if essential {
        let ess = essential_elements(&d).map_err(|e| core_err(e, false))?;
        let rows: Vec<String> = ess.iter().map(|p| format!("[{},{}]", p.x, p.y)).collect();
        let doc = format!(
            "{{\"essential_count\":{},\"essential\":[{}]}}\n",
            ess.len(),
            rows.join(",")
        );
        print!("{doc}");
        write_file(&cli.out, &format!("{stem}_essential.json"), doc.as_bytes(), cli.quiet)?;
    }
    finish(cli, &manifest)
}

fn solutions_json(solutions: &[ElementSet]) -> String {
    let rows: Vec<String> = solutions
        .iter()
        .map(|d| {
            let pts: Vec<String> = d
                .elements()
                .iter()
                .map(|p| format!("[{},{}]", p.x, p.y))
                .collect();
            format!(
                "{{\"s1\":{},\"elements\":[{}]}}",
                sparseness_sq(d, 1),
                pts.join(",")
            )
        })
        .collect();
    format!("[{}]", rows.join(","))
}

fn search_result_json(r: &SearchResult, budget: u64) -> String {
    format!(
        "{{\"lx\":{},\"ly\":{},\"optimal_n\":{},\"exhaustive\":{},\"nodes_explored\":{},\"budget\":{},\"symmetric\":{},\"raw_solution_count\":{},\"min_s1\":{},\"solutions\":{},\"min_s1_solutions\":{}}}\n",
        r.lx,
        r.ly,
        r.optimal_n,
        r.exhaustive,
        r.nodes_explored,
        budget,
        r.symmetric_mode,
        r.raw_solution_count,
        r.min_s1.map_or("null".to_string(), |v| v.to_string()),
        solutions_json(&r.solutions),
        solutions_json(&r.min_s1_solutions),
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    cli: &Cli,
    lx: i64,
    ly: i64,
    all: bool,
    symmetric: bool,
    budget: u64,
    guard: Option<usize>,
    file: Option<&str>,
) -> CliResult<()> {
    let mut spec = SearchSpec::new(lx, ly)
        .enumerate_all(all)
        .symmetric(symmetric)
        .budget(budget);
    if let Some(g) = guard {
        spec = spec.guard(g);
    }
    let r = find_mra(&spec).map_err(|e| core_err(e, false))?;
    let json = search_result_json(&r, budget);
    print!("{json}");
    let name = file
        .map(str::to_owned)
        .unwrap_or_else(|| format!("search_{lx}x{ly}.json"));
    write_file(&cli.out, &name, json.as_bytes(), cli.quiet)?;
    finish(cli, &RunManifest::new(cli.seed))?;
    if !r.exhaustive {
        return Err(CliError::new(
            Exit::Infeasible,
            format!(
                "node budget {budget} exhausted; optimal_n={} is an upper bound only",
                r.optimal_n
            ),
        ));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    cli: &Cli,
    array: &str,
    lx: Option<i64>,
    ly: Option<i64>,
    c1: f64,
    phase: Option<f64>,
    trials: Option<usize>,
    sidelobe_db: f64,
    threshold: f64,
    grid: usize,
    reference: &str,
    prefix: Option<&str>,
) -> CliResult<()> {
    if phase.is_some() && trials.is_some() {
        return Err(CliError::new(
            Exit::Usage,
            "--phase and --trials are mutually exclusive",
        ));
    }
    let reference = match reference {
        "self" => ReferenceMode::SelfCouplingFree,
        "ura" => ReferenceMode::UraCouplingFree,
        other => {
            return Err(CliError::new(
                Exit::Usage,
                format!("unknown reference '{other}' (expected self or ura)"),
            ))
        }
    };
    let mut manifest = RunManifest::new(cli.seed);
    let (d, default_prefix) = if let Some(kind) = ArrayKind::parse(array) {
        let (lx, ly) = match (lx, ly) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(CliError::new(
                    Exit::Usage,
                    "--lx and --ly are required with a named family",
                ))
            }
        };
        let d = ArrayFamily::new(kind, lx, ly)
            .and_then(|f| f.generate())
            .map_err(|e| core_err(e, false))?;
        (d, format!("{}_{}x{}", kind.name(), lx, ly))
    } else {
        let path = PathBuf::from(array);
        let d = load_element_set(&path, &mut manifest)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "array".into());
        (d, stem)
    };
    let prefix = prefix.map(str::to_owned).unwrap_or(default_prefix);

    let config = ImagingConfig {
        scene: Scene::demo(),
        grid: ScanGrid::square(grid).map_err(|e| core_err(e, false))?,
        sidelobe_db,
        energy_threshold: threshold,
        c1,
        reference,
        trials: trials.unwrap_or(100),
        seed: cli.seed.unwrap_or(0),
    };
    let study = ImagingStudy::new(d, &config).map_err(|e| core_err(e, false))?;

    if let Some(n_trials) = trials {
        if n_trials == 0 {
            return Err(CliError::new(Exit::Usage, "--trials must be at least 1"));
        }
        let seed = config.seed;
        let fam_result = {
            // reuse the prepared study rather than regenerating per trial
            let mut values = Vec::with_capacity(n_trials);
            for t in 0..n_trials as u64 {
                values.push(
                    study
                        .rmse_at_phase(trial_phase(seed, t))
                        .map_err(|e| core_err(e, false))?,
                );
            }
            values
        };
        let mean = fam_result.iter().sum::<f64>() / n_trials as f64;
        let std = if n_trials < 2 {
            0.0
        } else {
            (fam_result.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
                / (n_trials - 1) as f64)
                .sqrt()
        };
        let rows: Vec<String> = fam_result.iter().map(|&x| fmt_f64(x)).collect();
        let json = format!(
            "{{\"mean\":{},\"std\":{},\"trials\":[{}],\"seed\":{}}}\n",
            fmt_f64(mean),
            fmt_f64(std),
            rows.join(","),
            seed
        );
        print!("{json}");
        write_file(&cli.out, &format!("{prefix}_summary.json"), json.as_bytes(), cli.quiet)?;
        // reference image accompanies the summary
        write_file(
            &cli.out,
            &format!("{prefix}_image.pgm"),
            &image_to_pgm(study.reference()),
            cli.quiet,
        )?;
        write_file(
            &cli.out,
            &format!("{prefix}_image.csv"),
            image_to_csv(study.reference()).as_bytes(),
            cli.quiet,
        )?;
    } else {
        let phase = phase.unwrap_or(0.0);
        let img = study.image_at_phase(phase).map_err(|e| core_err(e, false))?;
        let rmse = study.rmse_at_phase(phase).map_err(|e| core_err(e, false))?;
        let json = format!(
            "{{\"rmse\":{},\"phase\":{},\"c1\":{},\"q\":{},\"reference_peak\":{}}}\n",
            fmt_f64(rmse),
            fmt_f64(phase),
            fmt_f64(c1),
            study.weights().q(),
            fmt_f64(study.reference_peak()),
        );
        print!("{json}");
        write_file(&cli.out, &format!("{prefix}_result.json"), json.as_bytes(), cli.quiet)?;
        write_file(&cli.out, &format!("{prefix}_image.pgm"), &image_to_pgm(&img), cli.quiet)?;
        write_file(
            &cli.out,
            &format!("{prefix}_image.csv"),
            image_to_csv(&img).as_bytes(),
            cli.quiet,
        )?;
    }
    finish(cli, &manifest)
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    cli: &Cli,
    families: &[String],
    lmin: i64,
    lmax: i64,
    step: i64,
    budget: u64,
    guard: Option<usize>,
    file: Option<&str>,
) -> CliResult<()> {
    if families.is_empty() {
        return Err(CliError::new(Exit::Usage, "--families must not be empty"));
    }
    if lmin < 0 || lmax < lmin || step < 1 {
        return Err(CliError::new(Exit::Usage, "invalid aperture range"));
    }
    let mut csv = String::from("family,l,n,redundancy,s1,s_sqrt2,s2\n");
    for fam in families {
        let mut l = lmin;
        while l <= lmax {
            let row = match fam.as_str() {
                "mra" => {
                    let mut spec = SearchSpec::new(l, l).budget(budget);
                    if let Some(g) = guard {
                        spec = spec.guard(g);
                    }
                    match min_unit_spacing_mra(&spec) {
                        Ok(r) if r.exhaustive && !r.min_s1_solutions.is_empty() => {
                            let d = &r.min_s1_solutions[0];
                            Some(compare_row("mra", l, d))
                        }
                        _ => {
                            if !cli.quiet {
                                eprintln!("note: skipping mra at L={l} (not exhaustively solved)");
                            }
                            None
                        }
                    }
                }
                name => {
                    let kind = parse_family(name)?;
                    match ArrayFamily::new(kind, l, l).and_then(|f| f.generate()) {
                        Ok(d) => Some(compare_row(kind.name(), l, &d)),
                        Err(_) => None, // family undefined at this aperture
                    }
                }
            };
            if let Some(row) = row {
                csv.push_str(&row);
            }
            l += step;
        }
    }
    print!("{csv}");
    let name = file
        .map(str::to_owned)
        .unwrap_or_else(|| format!("compare_{lmin}_{lmax}.csv"));
    write_file(&cli.out, &name, csv.as_bytes(), cli.quiet)?;
    finish(cli, &RunManifest::new(cli.seed))
}

fn compare_row(family: &str, l: i64, d: &ElementSet) -> String {
    debug_assert!(satisfies_corner_property(d) || family == "ura" || d.len() < 4);
    format!(
        "{family},{l},{},{},{},{},{}\n",
        d.len(),
        fmt_f64(redundancy(d)),
        sparseness_sq(d, 1),
        sparseness_sq(d, 2),
        sparseness_sq(d, 4),
    )
}
