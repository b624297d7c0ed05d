use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use kg_core::benchmark::{
    fit_model, format_real, model_time, output_columns, parse_records, rank, record_value, sweep, FormulaVariant,
    LogBase, Measurement, ModelFit, ModelOptions, PerfModelParams, ScalingRecord, WorkloadConfig,
};
use kg_core::checkpoint;
use kg_core::diagnostics::{error_vs_exact, ENERGY_CSV_HEADER};
use kg_core::stepper::RunError;
use kg_core::{
    drift_series, instrument, run, EnergyReport, FftPlan, Grid, InitialCondition, Profile, SchemeOptions,
    SolverState,
};
use num_complex::Complex64;
use serde_json::json;

use crate::args::{
    parse_worker_value, BenchArgs, Cli, Command, EvalArgs, FitArgs, IcPreset, ProblemArgs, RankArgs, SolveArgs,
    Variant, WorkerList,
};
use crate::config::{parse_config, ConfigFile};
use crate::error::{CliError, CliResult};
use crate::values::{
    parse_axis, parse_bool, parse_count, parse_lengths, parse_modes, parse_non_negative_real, parse_positive_int,
    parse_positive_real, parse_sizes,
};

/// Name of the environment variable giving the default worker count.
pub const WORKERS_ENV: &str = "KG_WORKERS";

pub const DEFAULT_N: usize = 64;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_STEPS: u64 = 30;
pub const DEFAULT_REPEATS: u64 = 3;

/// Inputs that come from outside the command line.
#[derive(Debug, Clone, Default)]
pub struct Environment {
    /// Value of `KG_WORKERS`.
    pub workers: Option<String>,
    /// Cores the machine offers.
    pub available: usize,
}

impl Environment {
    pub fn from_process() -> Self {
        Self {
            workers: std::env::var(WORKERS_ENV).ok(),
            available: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

/// Value sources in precedence order: flag, config file, environment, default.
struct Sources<'a> {
    file: &'a ConfigFile,
    env: &'a Environment,
}

impl Sources<'_> {
    fn pick<T>(&self, flag: Option<T>, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> CliResult<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => parse(v).map(Some).map_err(|e| {
                CliError::Usage(format!("config line {}: {key}: {e}", self.file.line(key).unwrap_or(0)))
            }),
        }
    }

    fn switch(&self, flag: bool, key: &str) -> CliResult<bool> {
        Ok(flag || self.pick(None, key, parse_bool)?.unwrap_or(false))
    }

    fn path(&self, flag: Option<PathBuf>, key: &str) -> CliResult<Option<PathBuf>> {
        self.pick(flag, key, |s| Ok(PathBuf::from(s)))
    }

    /// Worker list and whether anyone asked for it explicitly.
    fn workers(&self, flag: Option<WorkerList>) -> CliResult<Option<Vec<usize>>> {
        if let Some(w) = self.pick(flag, "workers", parse_worker_value)? {
            return Ok(Some(w.0));
        }
        match &self.env.workers {
            Some(v) => parse_worker_value(v)
                .map(|w| Some(w.0))
                .map_err(|e| CliError::Usage(format!("{WORKERS_ENV}: {e}"))),
            None => Ok(None),
        }
    }

    fn variant(&self, flag: Option<Variant>) -> CliResult<ModelOptions> {
        let variant = match self.pick(flag, "variant", |s| s.parse())?.unwrap_or(Variant::Final) {
            Variant::Final => FormulaVariant::Final,
            Variant::DoubledFft => FormulaVariant::DoubledFft,
        };
        Ok(ModelOptions { variant, log_base: LogBase::Natural })
    }
}

/// A fully resolved problem description.
struct Problem {
    grid: Arc<Grid>,
    dt: f64,
    steps: u64,
    ic: InitialCondition,
    ic_label: String,
    /// `None` when the default should be used.
    workers: Option<Vec<usize>>,
    options: SchemeOptions,
}

fn resolve_problem(args: &ProblemArgs, src: &Sources) -> CliResult<Problem> {
    let n = src.pick(args.n, "n", parse_sizes)?.unwrap_or([DEFAULT_N; 3]);
    let length = src.pick(args.length, "length", parse_lengths)?.unwrap_or([2.0 * std::f64::consts::PI; 3]);
    let grid = Arc::new(Grid::new(n, length)?);
    let dt = src.pick(args.dt, "dt", parse_positive_real)?.unwrap_or(DEFAULT_DT);
    let steps = src.pick(args.steps, "steps", parse_positive_int)?.unwrap_or(DEFAULT_STEPS);
    let preset = src.pick(args.ic, "ic", |s| s.parse())?.unwrap_or(IcPreset::Gaussian);
    let amplitude = src.pick(args.amplitude, "amplitude", |s| s.trim().parse::<f64>().map_err(|e| e.to_string()))?;
    if amplitude.is_some_and(|a| !a.is_finite()) {
        return Err(CliError::Usage("amplitude must be finite".into()));
    }
    let width = src.pick(args.width, "width", parse_positive_real)?.unwrap_or(1.0);
    let modes = src.pick(args.modes, "modes", parse_modes)?.unwrap_or([1, 0, 0]);
    let axis = src.pick(args.axis, "axis", parse_axis)?.unwrap_or(0);
    let center = src.pick(args.center, "center", |s| s.trim().parse::<f64>().map_err(|e| e.to_string()))?;
    let (ic, ic_label) = match preset {
        IcPreset::Zero => (InitialCondition::zero(), "zero".to_string()),
        IcPreset::Gaussian => {
            let a = amplitude.unwrap_or(0.1);
            (InitialCondition::gaussian(a, width), format!("gaussian amplitude={a} width={width}"))
        }
        IcPreset::PlaneWave => {
            let a = amplitude.unwrap_or(0.1);
            (
                InitialCondition::plane_wave(Complex64::new(a, 0.0), modes),
                format!("plane-wave amplitude={a} modes={modes:?}"),
            )
        }
        IcPreset::Constant => {
            let a = amplitude.unwrap_or(0.5);
            (InitialCondition::oscillating_constant(Complex64::new(a, 0.0)), format!("constant amplitude={a}"))
        }
        IcPreset::Sech => {
            let a = amplitude.unwrap_or(2f64.sqrt());
            let mut ic = InitialCondition::sech_line(axis, center);
            ic.displacement = Profile::SechLine { amplitude: a, axis, center };
            (ic, format!("sech amplitude={a} axis={axis}"))
        }
    };
    let options = SchemeOptions {
        dealias: src.switch(args.dealias, "dealias")?,
        blowup_threshold: src
            .pick(args.blowup_threshold, "blowup_threshold", parse_positive_real)?
            .unwrap_or(kg_core::stepper::DEFAULT_BLOWUP_THRESHOLD),
    };
    Ok(Problem { grid, dt, steps, ic, ic_label, workers: src.workers(args.workers.clone())?, options })
}

/// One worker count: the requested one, or every available core up to the
/// grid's slab limit.
fn single_worker_count(p: &Problem, env: &Environment) -> CliResult<usize> {
    let [nx, _, nz] = p.grid.n();
    match &p.workers {
        Some(list) if list.len() == 1 => Ok(list[0]),
        Some(list) => Err(CliError::Usage(format!("expected one worker count, got {} ({list:?})", list.len()))),
        None => Ok(env.available.clamp(1, nx.min(nz))),
    }
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    }
    instrument::record_disk_write();
    std::fs::write(path, contents).map_err(|e| CliError::io(path.display(), e))
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))
}

fn read_records_file(path: &Path) -> CliResult<Vec<ScalingRecord>> {
    parse_records(&read_file(path)?).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Seventeen significant digits.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parses the command line and runs it, writing human-readable output to `out`.
pub fn run_cli(cli: Cli, env: &Environment, out: &mut dyn Write) -> CliResult<()> {
    let file = match &cli.config {
        Some(path) => {
            let text = read_file(path)?;
            parse_config(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    let src = Sources { file: &file, env };
    match cli.command {
        Command::Solve(a) => cmd_solve(&a, &src, out),
        Command::Bench(a) => cmd_bench(&a, &src, out, false),
        Command::Sweep(a) => cmd_bench(&a, &src, out, true),
        Command::Rank(a) => cmd_rank(&a, &src, out),
        Command::ModelFit(a) => cmd_model_fit(&a, &src, out),
        Command::ModelEval(a) => cmd_model_eval(&a, &src, out),
    }
}

fn say(out: &mut dyn Write, text: impl AsRef<str>) -> CliResult<()> {
    writeln!(out, "{}", text.as_ref()).map_err(|e| CliError::io("stdout", e))
}

pub fn energy_csv(series: &[EnergyReport]) -> String {
    let mut s = String::from(ENERGY_CSV_HEADER);
    s.push('\n');
    for r in series {
        s.push_str(&r.to_csv_row());
        s.push('\n');
    }
    s
}

fn cmd_solve(a: &SolveArgs, src: &Sources, out: &mut dyn Write) -> CliResult<()> {
    let p = resolve_problem(&a.problem, src)?;
    let every = src.pick(a.diagnostics_every, "diagnostics_every", parse_count)?.unwrap_or(1);
    let energy_out = src.path(a.energy_out.clone(), "energy_out")?.unwrap_or_else(|| "energy.csv".into());
    let checkpoint_out = src.path(a.checkpoint.clone(), "checkpoint")?;
    let resume = src.path(a.resume.clone(), "resume")?;
    let workers = single_worker_count(&p, src.env)?;
    let mut plan = FftPlan::new(p.grid.clone(), workers)?;

    let mut state = match &resume {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| CliError::io(path.display(), e))?;
            checkpoint::decode(&bytes)
                .and_then(|c| c.into_state(&mut plan))
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
        }
        None => SolverState::initialize(&p.ic, p.dt, &mut plan, p.options)?,
    };
    let start_step = state.step_index();
    say(
        out,
        format!(
            "solve: grid {:?}, dt {}, {} steps from step {start_step}, {workers} worker(s), ic {}",
            p.grid.n(),
            state.dt(),
            p.steps,
            if resume.is_some() { "checkpoint" } else { p.ic_label.as_str() }
        ),
    )?;

    let (series, failure) = match run(&mut state, p.steps, &mut plan, every) {
        Ok(series) => (series, None),
        Err(RunError { error, series }) => (series, Some(error)),
    };
    write_file(&energy_out, energy_csv(&series).as_bytes())?;
    if let Some(error) = failure {
        let e = CliError::from(error);
        if let CliError::BlowUp { step, report } = &e {
            say(out, format!("blow-up at step {step}: {report}"))?;
            say(out, format!("energy history ({} rows) written to {}", series.len(), energy_out.display()))?;
        }
        return Err(e);
    }

    say(out, format!("reached step {} (t = {})", state.step_index(), state.time()))?;
    if !series.is_empty() {
        let last = series.last().expect("non-empty");
        say(out, format!("final energy {}, max relative drift {:e}", sci(last.total), drift_series(&series)?))?;
    }
    if resume.is_none() {
        if let Some(exact) = p.ic.exact_solution() {
            let e = error_vs_exact(&state, &exact)?;
            say(out, format!("error vs exact solution: linf {:e}, l2 {:e}", e.linf, e.l2))?;
        }
    }
    say(out, format!("energy history ({} rows) written to {}", series.len(), energy_out.display()))?;
    if let Some(path) = checkpoint_out {
        write_file(&path, &checkpoint::encode(&state))?;
        say(out, format!("checkpoint written to {}", path.display()))?;
    }
    Ok(())
}

pub const RESULTS_HEADER: &str = "machine,cores,time_seconds,steps,N,transform_seconds,transpose_seconds";

pub fn results_csv(measurements: &[Measurement]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(format!("results CSV: {e}"));
    w.write_record(RESULTS_HEADER.split(',')).map_err(err)?;
    for m in measurements {
        w.write_record([
            m.record.machine.clone(),
            m.record.cores.to_string(),
            format_real(m.record.time_seconds),
            m.steps.to_string(),
            m.n[0].to_string(),
            format_real(m.transform_seconds),
            format_real(m.transpose_seconds),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(format!("results CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}

/// Whitespace-separated `cores seconds` pairs.
pub fn scaling_plot(measurements: &[Measurement], title: &str) -> String {
    let mut s = format!("# {title}\n# strong scaling, plot on log-log axes\n# cores seconds\n");
    for m in measurements {
        let _ = writeln!(s, "{} {}", m.record.cores, sci(m.record.time_seconds));
    }
    s
}

/// Time against total on-chip bandwidth, one block per machine separated by
/// two blank lines.
pub fn bandwidth_plot(blocks: &[(String, Vec<(f64, f64, u64)>)]) -> String {
    let mut s = String::from(
        "# time against total on-chip bandwidth (chip bandwidth x sockets x nodes used)\n\
         # one block per machine; columns: bandwidth seconds cores\n",
    );
    for (i, (machine, rows)) in blocks.iter().enumerate() {
        if i > 0 {
            s.push_str("\n\n");
        }
        let _ = writeln!(s, "# machine: {machine}");
        for (bw, t, cores) in rows {
            let _ = writeln!(s, "{} {} {cores}", sci(*bw), sci(*t));
        }
    }
    s
}

fn cmd_bench(a: &BenchArgs, src: &Sources, out: &mut dyn Write, is_sweep: bool) -> CliResult<()> {
    let p = resolve_problem(&a.problem, src)?;
    let repeats = src.pick(a.repeats, "repeats", parse_positive_int)?.unwrap_or(DEFAULT_REPEATS);
    let machine = src.pick(a.machine.clone(), "machine", |s| Ok(s.to_owned()))?.unwrap_or_else(|| "local".into());
    let out_dir = src.path(a.out_dir.clone(), "out_dir")?.unwrap_or_else(|| ".".into());
    let machines = src.path(a.machines.clone(), "machines")?;
    let chip = src.pick(a.chip_bandwidth, "chip_bandwidth", parse_positive_real)?;
    let cores_per_node = src.pick(a.cores_per_node, "cores_per_node", parse_positive_int)?;
    let model = src.variant(a.variant)?;

    let counts = if is_sweep {
        match &p.workers {
            Some(list) => list.clone(),
            None => {
                let limit = src.env.available.max(1);
                let mut v = vec![1];
                while v.last().unwrap() * 2 <= limit {
                    v.push(v.last().unwrap() * 2);
                }
                v
            }
        }
    } else {
        vec![single_worker_count(&p, src.env)?]
    };
    let repeats = u32::try_from(repeats).map_err(|_| CliError::Usage(format!("repeats {repeats} is too large")))?;
    let cfg = WorkloadConfig {
        grid: p.grid.clone(),
        steps: p.steps,
        repeats,
        dt: p.dt,
        initial: p.ic.clone(),
        options: p.options,
        machine: machine.clone(),
    };
    // Reference data is read before any timing so a bad file fails fast.
    let reference = machines.as_deref().map(read_records_file).transpose()?;

    let report = sweep(&cfg, &counts)?;
    for m in &report.measurements {
        say(
            out,
            format!(
                "p = {:>4}: {:.6} s (transform {:.6} s, transpose {:.6} s, best of {})",
                m.record.cores, m.record.time_seconds, m.transform_seconds, m.transpose_seconds, m.repeats
            ),
        )?;
    }
    for (w, e) in &report.failures {
        say(out, format!("p = {w:>4}: skipped, {e}"))?;
    }

    let results = out_dir.join("results.csv");
    write_file(&results, results_csv(&report.measurements)?.as_bytes())?;
    let [nx, ny, nz] = p.grid.n();
    let metadata = json!({
        "command": if is_sweep { "sweep" } else { "bench" },
        "machine": machine,
        "formula_variant": model.variant,
        "log_base": model.log_base,
        "repeats": repeats,
        "steps": p.steps,
        "dt": p.dt,
        "grid": { "n": p.grid.n(), "length": p.grid.length() },
        "initial_condition": p.ic_label,
        "dealias": p.options.dealias,
        "worker_counts": counts,
        "versions": {
            "kgbench": env!("CARGO_PKG_VERSION"),
            "kg_core": kg_core::VERSION,
            "fft": kg_core::fft::BACKEND,
        },
        "measurements": report.measurements,
        "failures": report.failures.iter().map(|(w, e)| json!({ "workers": w, "error": e.to_string() })).collect::<Vec<_>>(),
    });
    let json_path = out_dir.join("results.json");
    write_file(&json_path, serde_json::to_string_pretty(&metadata).expect("JSON value").as_bytes())?;
    let plot = out_dir.join("scaling.dat");
    let title = format!("{machine}: {} steps on a {nx}x{ny}x{nz} grid", p.steps);
    write_file(&plot, scaling_plot(&report.measurements, &title).as_bytes())?;
    say(out, format!("wrote {}, {}, {}", results.display(), json_path.display(), plot.display()))?;

    if chip.is_some() || reference.is_some() {
        let mut blocks = Vec::new();
        if let Some(chip) = chip {
            let per_node = cores_per_node.unwrap_or(src.env.available.max(1) as u64);
            let rows = report
                .measurements
                .iter()
                .map(|m| (chip * m.record.cores.div_ceil(per_node) as f64, m.record.time_seconds, m.record.cores))
                .collect();
            blocks.push((machine.clone(), rows));
        }
        for r in reference.iter().flatten() {
            match r.total_bandwidth_gbs() {
                Some(bw) => blocks.push((r.machine.clone(), vec![(bw, r.time_seconds, r.cores)])),
                None => say(out, format!("{}: no chip bandwidth, left out of the bandwidth plot", r.machine))?,
            }
        }
        let path = out_dir.join("bandwidth.dat");
        write_file(&path, bandwidth_plot(&blocks).as_bytes())?;
        say(out, format!("wrote {}", path.display()))?;
    }
    if report.measurements.is_empty() {
        return Err(CliError::Usage("no worker count could run on this grid".into()));
    }
    Ok(())
}

/// Text table of a ranking.
pub fn rank_table(records: &[ScalingRecord]) -> CliResult<String> {
    let ranked = rank(records)?;
    let header = ["Rank", "Machine", "Time (s)", "Cores", "Node type", "Interconnect", "Chip GB/s", "Peak TFLOP/s"];
    let rows: Vec<[String; 8]> = ranked
        .iter()
        .map(|r| {
            let b = &r.best;
            [
                r.rank.to_string(),
                b.machine.clone(),
                format_real(b.time_seconds),
                b.cores.to_string(),
                record_value(b, "node_type"),
                record_value(b, "interconnect"),
                record_value(b, "chip_bandwidth_gbs"),
                record_value(b, "peak_tflops"),
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let padded: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_owned()
    };
    let mut s = line(header.to_vec());
    s.push('\n');
    s.push_str(&line(widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
    s.push('\n');
    for row in &rows {
        s.push_str(&line(row.iter().map(String::as_str).collect()));
        s.push('\n');
    }
    Ok(s)
}

/// Ranking as CSV: `rank` followed by the record columns.
pub fn rank_csv(records: &[ScalingRecord]) -> CliResult<String> {
    let ranked = rank(records)?;
    let best: Vec<ScalingRecord> = ranked.iter().map(|r| r.best.clone()).collect();
    let cols = output_columns(&best);
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(format!("ranking CSV: {e}"));
    w.write_record(std::iter::once("rank".to_string()).chain(cols.iter().cloned())).map_err(err)?;
    for r in &ranked {
        w.write_record(std::iter::once(r.rank.to_string()).chain(cols.iter().map(|c| record_value(&r.best, c))))
            .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(format!("ranking CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}

fn cmd_rank(a: &RankArgs, src: &Sources, out: &mut dyn Write) -> CliResult<()> {
    let path = src
        .path(a.machines.clone(), "machines")?
        .ok_or_else(|| CliError::Usage("rank needs a machines CSV".into()))?;
    let records = read_records_file(&path)?;
    let table = rank_table(&records)?;
    out.write_all(table.as_bytes()).map_err(|e| CliError::io("stdout", e))?;
    if let Some(csv_path) = src.path(a.out.clone(), "out")? {
        write_file(&csv_path, rank_csv(&records)?.as_bytes())?;
        say(out, format!("wrote {}", csv_path.display()))?;
    }
    Ok(())
}

fn model_options(variant: Option<Variant>, log2: bool, src: &Sources) -> CliResult<ModelOptions> {
    let mut o = src.variant(variant)?;
    if src.switch(log2, "log2")? {
        o.log_base = LogBase::Two;
    }
    Ok(o)
}

/// The grid size a set of records was measured at, from their `N` column.
fn records_grid_size(records: &[ScalingRecord]) -> Option<u64> {
    let mut sizes = records.iter().map(|r| r.extra("N").and_then(|v| v.trim().parse::<u64>().ok()));
    let first = sizes.next()??;
    sizes.all(|s| s == Some(first)).then_some(first)
}

pub fn fit_json(fit: &ModelFit, machine: &str) -> serde_json::Value {
    let mut v = serde_json::to_value(fit).expect("fit serializes");
    let obj = v.as_object_mut().expect("struct serializes to an object");
    obj.insert("machine".into(), json!(machine));
    obj.insert("optimal_processes".into(), json!(fit.optimal_processes()));
    v
}

fn cmd_model_fit(a: &FitArgs, src: &Sources, out: &mut dyn Write) -> CliResult<()> {
    let options = model_options(a.variant, a.log2, src)?;
    let mut records = read_records_file(&a.input)?;
    let mut names: Vec<&str> = records.iter().map(|r| r.machine.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    let machine = match src.pick(a.machine.clone(), "machine", |s| Ok(s.to_owned()))? {
        Some(m) => m,
        None if names.len() == 1 => names[0].to_owned(),
        None => {
            return Err(CliError::Usage(format!(
                "{} holds {} machines; choose one with --machine",
                a.input.display(),
                names.len()
            )))
        }
    };
    records.retain(|r| r.machine == machine);
    if records.is_empty() {
        return Err(CliError::Usage(format!("no records for machine '{machine}'")));
    }
    let n = match src.pick(a.n, "n", parse_positive_int)? {
        Some(n) => n,
        None => records_grid_size(&records)
            .ok_or_else(|| CliError::Usage("grid size unknown: pass --n or include an N column".into()))?,
    };
    let fit = fit_model(&records, n, options).map_err(|e| CliError::Fit(e.to_string()))?;
    say(
        out,
        format!(
            "{machine}, N = {n}: work {:e} s, latency {:e} s, network {:e} s, rms residual {:e} s over {} points",
            fit.work, fit.latency, fit.network, fit.residual_rms, fit.points
        ),
    )?;
    let json_path = src.path(a.out.clone(), "out")?.unwrap_or_else(|| "model_fit.json".into());
    write_file(&json_path, serde_json::to_string_pretty(&fit_json(&fit, &machine)).expect("JSON").as_bytes())?;
    let overlay = src.path(a.overlay.clone(), "overlay")?.unwrap_or_else(|| "model_overlay.dat".into());
    let mut sorted = records.clone();
    sorted.sort_by(|x, y| x.cores.cmp(&y.cores).then(x.time_seconds.total_cmp(&y.time_seconds)));
    let mut s = format!("# {machine}, N = {n}: measured and fitted times\n# cores measured_seconds model_seconds\n");
    for r in &sorted {
        let _ = writeln!(s, "{} {} {}", r.cores, sci(r.time_seconds), sci(fit.predict(r.cores)));
    }
    write_file(&overlay, s.as_bytes())?;
    say(out, format!("wrote {}, {}", json_path.display(), overlay.display()))?;
    Ok(())
}

pub fn eval_csv(points: &[(usize, f64)]) -> String {
    let mut s = String::from("p,seconds\n");
    for (p, t) in points {
        let _ = writeln!(s, "{p},{}", sci(*t));
    }
    s
}

fn cmd_model_eval(a: &EvalArgs, src: &Sources, out: &mut dyn Write) -> CliResult<()> {
    let counts = src
        .pick(a.p.clone(), "p", parse_worker_value)?
        .map(|w| w.0)
        .unwrap_or_else(|| (0..=10).map(|k| 1usize << k).collect());
    let fit_path = src.path(a.fit.clone(), "fit")?;
    let points: Vec<(usize, f64)> = match fit_path {
        Some(path) => {
            let fit: ModelFit = serde_json::from_str(&read_file(&path)?)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            counts.iter().map(|&p| (p, fit.predict(p as u64))).collect()
        }
        None => {
            let options = model_options(a.variant, a.log2, src)?;
            let get = |flag, key| src.pick(flag, key, parse_non_negative_real);
            let params = PerfModelParams::new(
                get(a.d1, "d1")?.unwrap_or(0.0),
                get(a.d2, "d2")?.unwrap_or(0.0),
                get(a.d3, "d3")?.unwrap_or(0.0),
                src.pick(a.bc, "bc", parse_positive_real)?.unwrap_or(1.0),
                get(a.ln, "ln")?.unwrap_or(0.0),
            )?;
            let n = src.pick(a.n, "n", parse_positive_int)?.unwrap_or(DEFAULT_N as u64);
            counts.iter().map(|&p| (p, model_time(&params, n, p as u64, options))).collect()
        }
    };
    let path = src.path(a.out.clone(), "out")?.unwrap_or_else(|| "model_eval.csv".into());
    write_file(&path, eval_csv(&points).as_bytes())?;
    say(out, format!("wrote {} predictions to {}", points.len(), path.display()))?;
    Ok(())
}
