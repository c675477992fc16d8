//! `mmgraph` command-line tool. Every stage reads and writes the plain-text
//! matrix format, so stages can be chained through files; `run` executes the
//! whole pipeline from a TOML config.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mmgraph::config::PipelineConfig;
use mmgraph::dynamics::{dynamic_graph_series, metric_series, WindowSpec};
use mmgraph::eeg_power::{band_power_series, hrf_convolve, hrf_kernel, RawEegRecord, HRF_DURATION};
use mmgraph::graph::{
    pearson_correlation_matrix, split_signed, ClusteringDenominator, GraphMetricSet, Metric, Sign,
};
use mmgraph::io::{fmt_f64, read_labels, read_matrix_file, write_labels, write_matrix_file};
use mmgraph::pipeline::{
    preprocess, run_pipeline, temporal_summary, window_majority_labels, PreprocessOptions,
};
use mmgraph::report::{write_dynamic, write_states, write_static};
use mmgraph::states::{
    adjusted_rand_index, detect_states, state_average_graphs, window_similarity,
};
use mmgraph::stats::{paired_ttest, PairedSamples};
use mmgraph::synth::{generate_dataset, planted_templates, GenerateOptions};
use mmgraph::timeseries::{Band, BandDefinition, TimeSeriesMatrix};

#[derive(Parser)]
#[command(
    name = "mmgraph",
    version,
    about = "Signed graph analysis of multimodal EEG/fMRI time series"
)]
struct Cli {
    /// Log more (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted multi-state dataset with ground-truth labels.
    Synth(SynthArgs),
    /// Detrend, regress nuisance signals, despike and band-pass.
    Preprocess(PreprocessArgs),
    /// Band-power series from high-rate EEG, optionally HRF-convolved.
    Bandpower(BandpowerArgs),
    /// Whole-recording signed graph and its metrics.
    Static(StaticArgs),
    /// Sliding-window graphs, metric series and temporal summaries.
    Dynamic(DynamicArgs),
    /// Connectivity states from window similarity.
    States(StatesArgs),
    /// Paired t-tests from a `measure,subject,a,b` table.
    Ttest(TtestArgs),
    /// Full pipeline from a TOML config; flags override the file.
    Run(RunArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Matrix file(s); several are joined column-wise in the order given.
    #[arg(short, long = "input", required = true)]
    inputs: Vec<PathBuf>,
}

impl InputArgs {
    fn load(&self) -> Result<TimeSeriesMatrix> {
        let mut joined: Option<TimeSeriesMatrix> = None;
        for path in &self.inputs {
            let m =
                read_matrix_file(path).with_context(|| format!("reading {}", path.display()))?;
            joined = Some(match joined {
                None => m,
                Some(j) => j
                    .hconcat(&m)
                    .with_context(|| format!("joining {}", path.display()))?,
            });
        }
        Ok(joined.expect("clap requires one input"))
    }
}

#[derive(Args)]
struct WindowArgs {
    /// Window length in samples.
    #[arg(long, default_value_t = 20)]
    window_length: usize,
    /// Hop between window starts in samples.
    #[arg(long, default_value_t = 1)]
    window_step: usize,
}

impl WindowArgs {
    fn spec(&self) -> Result<WindowSpec> {
        Ok(WindowSpec::new(self.window_length, self.window_step)?)
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    seed: u64,
    /// Output directory for eeg.csv, fmri.csv and labels.txt.
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    n_eeg: usize,
    #[arg(long, default_value_t = 10)]
    n_fmri: usize,
    #[arg(long, default_value_t = 2)]
    states: usize,
    /// Samples per state visit.
    #[arg(long, default_value_t = 500)]
    dwell: usize,
    /// Number of passes through all states.
    #[arg(long, default_value_t = 1)]
    cycles: usize,
    /// Correlation inside each planted node group.
    #[arg(long, default_value_t = 0.7)]
    within: f64,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 2.0)]
    tr: f64,
}

#[derive(Args)]
struct PreprocessArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Nuisance regressors (one column per parameter).
    #[arg(long)]
    regressors: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
    /// Polynomial detrending degree; 0 disables.
    #[arg(long, default_value_t = 3)]
    detrend_order: usize,
    /// Leave first differences out of the nuisance design.
    #[arg(long)]
    no_derivatives: bool,
    #[arg(long)]
    no_despike: bool,
    #[arg(long, default_value_t = mmgraph::timeseries::DEFAULT_OUTLIER_Z)]
    outlier_z: f64,
    #[arg(long)]
    no_bandpass: bool,
    #[arg(long, default_value_t = mmgraph::timeseries::DEFAULT_BANDPASS.0)]
    bandpass_lo: f64,
    #[arg(long, default_value_t = mmgraph::timeseries::DEFAULT_BANDPASS.1)]
    bandpass_hi: f64,
}

#[derive(Args)]
struct BandpowerArgs {
    /// High-rate EEG matrix; the time column sets the sampling rate.
    #[arg(short, long)]
    input: PathBuf,
    /// Output directory; one `<band>.csv` per band.
    #[arg(short, long)]
    out: PathBuf,
    /// Bands to compute (default: all five).
    #[arg(long = "band")]
    bands: Vec<Band>,
    #[arg(long, default_value_t = 2.0)]
    tr: f64,
    #[arg(long)]
    no_hrf: bool,
    #[arg(long, default_value_t = HRF_DURATION)]
    hrf_duration: f64,
}

#[derive(Args)]
struct StaticArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, default_value = "strength")]
    clustering_denominator: ClusteringDenominator,
}

#[derive(Args)]
struct DynamicArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(short, long)]
    out: PathBuf,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, default_value = "strength")]
    clustering_denominator: ClusteringDenominator,
    #[arg(long, default_value_t = mmgraph::dynamics::LOW_FREQ_BAND.0)]
    lf_lo: f64,
    #[arg(long, default_value_t = mmgraph::dynamics::LOW_FREQ_BAND.1)]
    lf_hi: f64,
}

#[derive(Args)]
struct StatesArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    window: WindowArgs,
    /// Graph half whose strengths define window similarity.
    #[arg(long, default_value = "positive")]
    sign: Sign,
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,
    /// Per-sample ground-truth labels; reports the adjusted Rand index.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct TtestArgs {
    /// CSV with header `measure,subject,a,b`.
    #[arg(short, long)]
    input: PathBuf,
    /// Write the result table here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; any key can also be given as a flag below.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    eeg_matrix: Option<PathBuf>,
    #[arg(long)]
    eeg_raw: Option<PathBuf>,
    #[arg(long)]
    fmri_matrix: Option<PathBuf>,
    #[arg(long)]
    regressors: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tr: Option<f64>,
    #[arg(long = "band")]
    bands: Vec<Band>,
    #[arg(long)]
    no_hrf: bool,
    #[arg(long)]
    detrend_order: Option<usize>,
    #[arg(long)]
    no_despike: bool,
    #[arg(long)]
    no_bandpass: bool,
    #[arg(long)]
    window_length: Option<usize>,
    #[arg(long)]
    window_step: Option<usize>,
    #[arg(long)]
    clustering_denominator: Option<ClusteringDenominator>,
    #[arg(long)]
    state_sign: Option<Sign>,
    #[arg(long)]
    resolution: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth(a) => synth(a),
        Command::Preprocess(a) => preprocess_cmd(a),
        Command::Bandpower(a) => bandpower(a),
        Command::Static(a) => static_cmd(a),
        Command::Dynamic(a) => dynamic_cmd(a),
        Command::States(a) => states_cmd(a),
        Command::Ttest(a) => ttest(a),
        Command::Run(a) => run(a),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn synth(a: SynthArgs) -> Result<()> {
    let n = a.n_eeg + a.n_fmri;
    let templates = planted_templates(n, a.states, a.within)?;
    let dwell = (0..a.cycles)
        .flat_map(|_| (0..a.states).map(|s| (s, a.dwell)))
        .collect();
    let opts = GenerateOptions {
        dwell,
        n_eeg: a.n_eeg,
        n_fmri: a.n_fmri,
        noise_sigma: a.noise,
        dt: a.tr,
        seed: a.seed,
    };
    let ds = generate_dataset(&templates, &opts)?;
    create_dir(&a.out)?;
    let part = |start: usize, len: usize| {
        TimeSeriesMatrix::new(
            ds.ts.values().columns(start, len).into_owned(),
            ds.ts.labels()[start..start + len].to_vec(),
            ds.ts.modalities()[start..start + len].to_vec(),
            ds.ts.dt(),
        )
    };
    if a.n_eeg > 0 {
        write_matrix_file(a.out.join("eeg.csv"), &part(0, a.n_eeg)?)?;
    }
    if a.n_fmri > 0 {
        write_matrix_file(a.out.join("fmri.csv"), &part(a.n_eeg, a.n_fmri)?)?;
    }
    write_labels(a.out.join("labels.txt"), &ds.true_labels)?;
    println!(
        "wrote {} samples x {} nodes ({} states) to {}",
        ds.ts.n_samples(),
        n,
        a.states,
        a.out.display()
    );
    Ok(())
}

fn preprocess_cmd(a: PreprocessArgs) -> Result<()> {
    let ts = a.input.load()?;
    let regressors = match &a.regressors {
        Some(p) => Some(
            read_matrix_file(p)
                .with_context(|| format!("reading {}", p.display()))?
                .values()
                .clone(),
        ),
        None => None,
    };
    let opts = PreprocessOptions {
        detrend_order: a.detrend_order,
        regress_derivatives: !a.no_derivatives,
        despike: !a.no_despike,
        outlier_z: a.outlier_z,
        bandpass: (!a.no_bandpass).then_some((a.bandpass_lo, a.bandpass_hi)),
    };
    let clean = preprocess(&ts, regressors.as_ref(), &opts)?;
    write_matrix_file(&a.output, &clean)?;
    Ok(())
}

fn bandpower(a: BandpowerArgs) -> Result<()> {
    let raw_ts =
        read_matrix_file(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let raw = RawEegRecord::from_matrix(&raw_ts)?;
    let bands = if a.bands.is_empty() {
        Band::ALL.to_vec()
    } else {
        a.bands
    };
    let kernel = if a.no_hrf {
        None
    } else {
        Some(hrf_kernel(a.tr, a.hrf_duration)?)
    };
    create_dir(&a.out)?;
    for band in bands {
        let power = band_power_series(&raw, &BandDefinition::standard(band), a.tr)?;
        let series = match &kernel {
            Some(k) => hrf_convolve(&power.series, k)?,
            None => power.series,
        };
        write_matrix_file(a.out.join(format!("{}.csv", band.name())), &series)?;
    }
    Ok(())
}

fn static_cmd(a: StaticArgs) -> Result<()> {
    let ts = a.input.load()?;
    let graph = split_signed(&pearson_correlation_matrix(&ts)?);
    let metrics: Vec<_> = Sign::BOTH
        .iter()
        .map(|&s| {
            (
                s,
                GraphMetricSet::compute(graph.weights(s), a.clustering_denominator),
            )
        })
        .collect();
    write_static(&a.out, &graph, &metrics, ts.modalities())?;
    println!("sign,cs_net,cc_net,ge_net");
    for (sign, m) in &metrics {
        println!(
            "{sign},{},{},{}",
            fmt_f64(m.cs_net),
            fmt_f64(m.cc_net),
            fmt_f64(m.ge_net)
        );
    }
    Ok(())
}

fn dynamic_cmd(a: DynamicArgs) -> Result<()> {
    let ts = a.input.load()?;
    let dynamic = dynamic_graph_series(&ts, a.window.spec()?)?;
    let cfg = PipelineConfig {
        lf_lo: a.lf_lo,
        lf_hi: a.lf_hi,
        clustering_denominator: a.clustering_denominator,
        ..Default::default()
    };
    let mut series = Vec::new();
    for metric in Metric::ALL {
        for sign in Sign::BOTH {
            series.push((
                metric,
                sign,
                metric_series(&dynamic, metric, sign, a.clustering_denominator),
            ));
        }
    }
    let temporal = series
        .iter()
        .map(|(m, s, v)| temporal_summary(*m, *s, v, dynamic.dt(), &cfg))
        .collect::<mmgraph::Result<Vec<_>>>()?;
    write_dynamic(&a.out, &dynamic, &series, &temporal, ts.modalities())?;
    println!("{} windows written to {}", dynamic.len(), a.out.display());
    Ok(())
}

fn states_cmd(a: StatesArgs) -> Result<()> {
    let ts = a.input.load()?;
    let dynamic = dynamic_graph_series(&ts, a.window.spec()?)?;
    let similarity = window_similarity(&dynamic, a.sign)?;
    let partition = detect_states(&similarity, a.resolution, a.seed)?;
    let graphs = state_average_graphs(&dynamic, &partition.assignment)?;
    write_states(
        &a.out,
        &dynamic,
        &similarity,
        &partition,
        &graphs,
        ts.modalities(),
    )?;
    println!(
        "n_states={} modularity_q={}",
        partition.n_states,
        fmt_f64(partition.modularity_q)
    );
    if let Some(path) = &a.labels {
        let labels = read_labels(path)?;
        if labels.len() != ts.n_samples() {
            bail!("{} labels for {} samples", labels.len(), ts.n_samples());
        }
        let truth = window_majority_labels(&labels, dynamic.windows());
        println!(
            "adjusted_rand_index={}",
            fmt_f64(adjusted_rand_index(&truth, &partition.assignment))
        );
    }
    Ok(())
}

fn ttest(a: TtestArgs) -> Result<()> {
    let text =
        fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let mut rows = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    match rows.next() {
        Some((_, header))
            if header
                .split(',')
                .map(str::trim)
                .eq(["measure", "subject", "a", "b"]) => {}
        _ => bail!(
            "{}: header must be `measure,subject,a,b`",
            a.input.display()
        ),
    }
    // measures in order of first appearance
    let mut groups: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    for (i, line) in rows {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 4 {
            bail!(
                "{}:{}: expected 4 fields, found {}",
                a.input.display(),
                i + 1,
                cells.len()
            );
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .with_context(|| format!("{}:{}: `{s}` is not a number", a.input.display(), i + 1))
        };
        let (va, vb) = (parse(cells[2])?, parse(cells[3])?);
        match groups.iter_mut().find(|g| g.0 == cells[0]) {
            Some(g) => {
                g.1.push(va);
                g.2.push(vb);
            }
            None => groups.push((cells[0].to_string(), vec![va], vec![vb])),
        }
    }
    if groups.is_empty() {
        bail!("{}: no data rows", a.input.display());
    }
    let mut out = String::from("measure,n,mean_difference,t,df,p_two_sided\n");
    for (measure, va, vb) in groups {
        let n = va.len();
        let samples = PairedSamples::new(va, vb).with_context(|| format!("measure `{measure}`"))?;
        let r = paired_ttest(&samples);
        writeln!(
            out,
            "{measure},{n},{},{},{},{}",
            fmt_f64(r.mean_difference),
            fmt_f64(r.t),
            r.df,
            fmt_f64(r.p_two_sided)
        )
        .unwrap();
    }
    match &a.output {
        Some(p) => fs::write(p, out).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{out}"),
    }
    Ok(())
}

fn run(a: RunArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => PipelineConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => PipelineConfig::default(),
    };
    // relative input paths in a config file are relative to the file
    if let Some(base) = a.config.as_ref().and_then(|p| p.parent()) {
        for path in [
            &mut cfg.eeg_matrix,
            &mut cfg.eeg_raw,
            &mut cfg.fmri_matrix,
            &mut cfg.regressors,
            &mut cfg.labels,
        ]
        .into_iter()
        .flatten()
        {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }
    macro_rules! set {
        ($($flag:ident => $field:ident),* $(,)?) => {
            $(if let Some(v) = a.$flag { cfg.$field = v; })*
        };
    }
    macro_rules! set_some {
        ($($flag:ident),* $(,)?) => {
            $(if a.$flag.is_some() { cfg.$flag = a.$flag; })*
        };
    }
    set_some!(
        eeg_matrix,
        eeg_raw,
        fmri_matrix,
        regressors,
        labels,
        threads,
        seed
    );
    set!(
        output => output,
        tr => tr_seconds,
        detrend_order => detrend_order,
        window_length => window_length,
        window_step => window_step,
        clustering_denominator => clustering_denominator,
        state_sign => state_sign,
        resolution => resolution,
    );
    if !a.bands.is_empty() {
        cfg.bands = a.bands;
    }
    if a.no_hrf {
        cfg.hrf = false;
    }
    if a.no_despike {
        cfg.despike = false;
    }
    if a.no_bandpass {
        cfg.bandpass = false;
    }
    if cfg.seed.is_none() {
        bail!("a seed is required: pass --seed or set `seed` in the config");
    }
    let out = run_pipeline(&cfg)?;
    for an in &out.analyses {
        let ari = an
            .ari
            .map(|v| format!(" adjusted_rand_index={v:.4}"))
            .unwrap_or_default();
        println!(
            "{}: {} samples, {} nodes, {} windows, {} states (Q={:.4}){ari}",
            an.name,
            an.ts.n_samples(),
            an.ts.n_nodes(),
            an.dynamic.len(),
            an.partition.n_states,
            an.partition.modularity_q
        );
    }
    println!("report written to {}", cfg.output.display());
    Ok(())
}
