use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context as _, Result};
use chrono::NaiveDate;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use pagrowth::affit::{
    compare_af, fit_af_with, loglinearity_score_with, AfFamily, AttachmentFunctionFit, SegmentOptions, Weighting,
};
use pagrowth::distfit::{
    compare_families, cumulative, fit_mle, gof_test, select_kmin, select_kmin_plausible, write_cumulative_csv,
    Family, FitOptions, TailFit,
};
use pagrowth::ingest::{parse_corpus, CitationCorpus, DateWindow};
use pagrowth::netsim::{simulate as run_model, AttachmentFunction, EdgesPerStep, GrowthMode, ModelConfig};
use pagrowth::rate::{bin_rate, jeong_rate, newman_rate, BinnedRate, NewmanVariant, DEFAULT_HALF_WIDTH};
use pagrowth::timeline::{build_sequence, coarsen, GrowthSequence, Resolution};

use crate::context::Context;
use crate::usage;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct WindowArgs {
    /// First publication date kept (YYYY-MM-DD).
    #[arg(long, requires = "to")]
    pub from: Option<NaiveDate>,
    /// Last publication date kept (YYYY-MM-DD).
    #[arg(long, requires = "from")]
    pub to: Option<NaiveDate>,
}

impl WindowArgs {
    fn window(&self) -> Result<Option<DateWindow>> {
        match (self.from, self.to) {
            (Some(a), Some(b)) => Ok(Some(DateWindow::new(a, b)?)),
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct IngestArgs {
    /// Articles CSV with header `id,date`.
    #[arg(long)]
    pub nodes: PathBuf,
    /// Citations CSV with header `citing_id,cited_id`.
    #[arg(long)]
    pub edges: PathBuf,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Also write the cleaned corpus as `nodes.csv` and `edges.csv` here.
    #[arg(long)]
    pub emit_canonical: Option<PathBuf>,
}

pub fn ingest(args: &IngestArgs, ctx: &mut Context) -> Result<()> {
    let corpus = load_corpus(&args.nodes, &args.edges, &args.window, ctx)?;
    let mut out = ctx.create("stats.json")?;
    writeln!(out, "{}", corpus.stats_json()?)?;
    out.flush()?;
    if let Some(dir) = &args.emit_canonical {
        let mut nodes = ctx.create_at(&dir.join("nodes.csv"))?;
        corpus.write_nodes(&mut nodes)?;
        nodes.flush()?;
        let mut edges = ctx.create_at(&dir.join("edges.csv"))?;
        corpus.write_edges(&mut edges)?;
        edges.flush()?;
    }
    let s = &corpus.stats;
    log::info!(
        "{} articles, {} citations; removed {} duplicate, {} self, {} dangling",
        s.n_articles,
        s.n_citations,
        s.n_duplicates_removed,
        s.n_self_citations_removed,
        s.n_dangling_removed
    );
    Ok(())
}

fn load_corpus(
    nodes: &std::path::Path,
    edges: &std::path::Path,
    window: &WindowArgs,
    ctx: &mut Context,
) -> Result<CitationCorpus> {
    let window = window.window()?;
    let n = ctx.open(nodes)?;
    let e = ctx.open(edges)?;
    parse_corpus(n, e, window).with_context(|| format!("parsing {} and {}", nodes.display(), edges.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Linear attachment, `k + 1`.
    Price,
    /// Uniform attachment.
    Callaway,
    /// Log-linear attachment, `(k + 1)^α`.
    Krapivsky,
    /// Nonlinear attachment, `(k + 1) / (1 + β ln(k + 1))`.
    Redner,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// Edges added per step (the mean when `--variable-m` is set).
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Total steps including the initial network.
    #[arg(long)]
    pub steps: u64,
    /// Exponent for `krapivsky`.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Parameter for `redner`.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Nodes in the initial network.
    #[arg(long, default_value_t = 1)]
    pub n1: u32,
    /// Random edges inside the initial network.
    #[arg(long, default_value_t = 0)]
    pub m1_prime: u32,
    /// Draw each step's edge count uniformly from 1..=2m-1.
    #[arg(long)]
    pub variable_m: bool,
    /// Two-step growth in which step 2 adds this many nodes (requires `--steps 2`).
    #[arg(long)]
    pub jeong_n2: Option<u32>,
}

fn attachment(args: &SimulateArgs) -> Result<AttachmentFunction<f64>> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| usage(format!("--model {:?} needs {flag}", args.model)));
    Ok(match args.model {
        ModelKind::Price => AttachmentFunction::Linear,
        ModelKind::Callaway => AttachmentFunction::Uniform,
        ModelKind::Krapivsky => AttachmentFunction::LogLinear { alpha: need(args.alpha, "--alpha")? },
        ModelKind::Redner => AttachmentFunction::Nonlinear { beta: need(args.beta, "--beta")? },
    })
}

pub fn simulate(args: &SimulateArgs, ctx: &mut Context) -> Result<()> {
    let config = ModelConfig {
        attachment: attachment(args)?,
        steps: args.steps,
        n1: args.n1,
        m1_prime: args.m1_prime,
        initial_edges: None,
        edges_per_step: if args.variable_m {
            EdgesPerStep::Uniform { m: args.m }
        } else {
            EdgesPerStep::Constant { m: args.m }
        },
        mode: match args.jeong_n2 {
            Some(n2) => GrowthMode::Jeong { n2 },
            None => GrowthMode::Price,
        },
        rng_seed: ctx.seed,
    };
    let seq = run_model(&config)?;
    ctx.write_json("config.json", &config)?;
    let mut out = ctx.create("sequence.jsonl")?;
    seq.write_jsonl(&mut out)?;
    out.flush()?;
    let mut out = ctx.create("degrees.csv")?;
    writeln!(out, "k,count")?;
    for (k, c) in seq.final_histogram().iter() {
        writeln!(out, "{k},{c}")?;
    }
    out.flush()?;
    log::info!("{} nodes, {} edges in {} steps", seq.node_count(), seq.edge_count(), seq.steps());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionKind {
    Maximal,
    Daily,
    Monthly,
    Yearly,
    Biepochal,
}

/// Where a growth sequence comes from: a `simulate` output or a corpus.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SourceArgs {
    /// Growth sequence in JSON lines, as written by `simulate`.
    #[arg(long, conflicts_with_all = ["nodes", "edges"], required_unless_present = "nodes")]
    pub sequence: Option<PathBuf>,
    /// Articles CSV (`id,date`).
    #[arg(long, requires = "edges")]
    pub nodes: Option<PathBuf>,
    /// Citations CSV (`citing_id,cited_id`).
    #[arg(long, requires = "nodes")]
    pub edges: Option<PathBuf>,
    #[command(flatten)]
    pub window: WindowArgs,
    /// First bi-epochal interval, `YYYY:YYYY` or `YYYY-MM-DD:YYYY-MM-DD`.
    #[arg(long)]
    pub t1: Option<String>,
    /// Second bi-epochal interval.
    #[arg(long)]
    pub t2: Option<String>,
}

enum Loaded {
    Corpus(CitationCorpus),
    Sequence(GrowthSequence),
}

fn parse_span(s: &str) -> Result<DateWindow> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| usage(format!("interval {s:?} should look like 1990:1999")))?;
    let date = |v: &str, end: bool| -> Result<NaiveDate> {
        if let Ok(year) = v.parse::<i32>() {
            let d = if end { NaiveDate::from_ymd_opt(year, 12, 31) } else { NaiveDate::from_ymd_opt(year, 1, 1) };
            return d.ok_or_else(|| usage(format!("year {year} out of range")));
        }
        NaiveDate::parse_from_str(v, "%Y-%m-%d").map_err(|e| usage(format!("bad date {v:?}: {e}")))
    };
    Ok(DateWindow::new(date(a, false)?, date(b, true)?)?)
}

impl SourceArgs {
    fn load(&self, ctx: &mut Context) -> Result<Loaded> {
        if let Some(path) = &self.sequence {
            let input = ctx.open(path)?;
            let seq = GrowthSequence::read_jsonl(input, Resolution::Synthetic)
                .with_context(|| format!("reading {}", path.display()))?;
            return Ok(Loaded::Sequence(seq));
        }
        match (&self.nodes, &self.edges) {
            (Some(n), Some(e)) => Ok(Loaded::Corpus(load_corpus(n, e, &self.window, ctx)?)),
            _ => Err(usage("give either --sequence or both --nodes and --edges")),
        }
    }

    fn resolution(&self, kind: ResolutionKind) -> Result<Resolution> {
        Ok(match kind {
            ResolutionKind::Maximal => Resolution::Maximal,
            ResolutionKind::Daily => Resolution::Daily,
            ResolutionKind::Monthly => Resolution::Monthly,
            ResolutionKind::Yearly => Resolution::Yearly,
            ResolutionKind::Biepochal => match (&self.t1, &self.t2) {
                (Some(a), Some(b)) => Resolution::bi_epochal(parse_span(a)?, parse_span(b)?)?,
                _ => return Err(usage("bi-epochal resolution needs --t1 and --t2")),
            },
        })
    }
}

/// Turns loaded data into a sequence. `kind` applies to corpora only;
/// `coarsen_to` merges steps afterwards.
fn sequence_for(
    source: &SourceArgs,
    loaded: &Loaded,
    kind: Option<ResolutionKind>,
    coarsen_to: Option<usize>,
) -> Result<GrowthSequence> {
    let seq = match loaded {
        Loaded::Sequence(seq) => {
            if kind.is_some() {
                return Err(usage("--resolution applies to corpus input; a sequence file is used as is"));
            }
            seq.clone()
        }
        Loaded::Corpus(corpus) => {
            let resolution = source.resolution(kind.unwrap_or(ResolutionKind::Maximal))?;
            build_sequence(corpus, resolution)?
        }
    };
    match coarsen_to {
        Some(n) => Ok(coarsen(&seq, n)?),
        None => Ok(seq),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Corrected Newman estimator.
    Newman,
    /// Newman estimator averaged over all steps.
    NewmanUncorrected,
    /// Bi-epochal estimator; needs exactly two steps.
    Jeong,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Time resolution for corpus input [default: maximal]
    #[arg(long, value_enum)]
    pub resolution: Option<ResolutionKind>,
    /// Merge consecutive steps into groups of this many new nodes.
    #[arg(long)]
    pub coarsen: Option<usize>,
    #[arg(long, value_enum, default_value = "newman")]
    pub estimator: EstimatorKind,
    /// Relative half-width h of the bins `[k(1-h), k(1+h)]`.
    #[arg(long, default_value_t = DEFAULT_HALF_WIDTH)]
    pub half_width: f64,
}

pub fn measure(args: &MeasureArgs, ctx: &mut Context) -> Result<()> {
    let loaded = args.source.load(ctx)?;
    if args.estimator == EstimatorKind::Jeong
        && matches!(loaded, Loaded::Corpus(_))
        && args.resolution != Some(ResolutionKind::Biepochal)
    {
        return Err(usage("the jeong estimator needs --resolution biepochal"));
    }
    let seq = sequence_for(&args.source, &loaded, args.resolution, args.coarsen)?;
    let est = match args.estimator {
        EstimatorKind::Jeong => jeong_rate::<f64>(&seq)?,
        EstimatorKind::Newman => newman_rate::<f64>(&seq, NewmanVariant::Corrected)?,
        EstimatorKind::NewmanUncorrected => newman_rate::<f64>(&seq, NewmanVariant::Uncorrected)?,
    };
    for w in &est.warnings {
        log::warn!("{w}");
    }
    let mut out = ctx.create("rate.csv")?;
    est.write_csv(&mut out)?;
    out.flush()?;
    let binned = bin_rate(&est, args.half_width)?;
    let mut out = ctx.create("binned.csv")?;
    binned.write_csv(&mut out)?;
    out.flush()?;
    log::info!("{} degrees measured from {} edges, {} bins", est.points.len(), est.edges_measured, binned.len());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyChoice {
    All,
    Lognormal,
    Powerlaw,
    Exponential,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitDistArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value = "all")]
    pub family: FamilyChoice,
    /// Lower cutoff on the `k + 1` scale: a number, `auto` (minimum KS
    /// distance) or `auto-pNNN` (smallest cutoff with bootstrap p ≥ NNN/100).
    #[arg(long, default_value = "auto")]
    pub kmin: String,
    /// Bootstrap replicates for the goodness-of-fit p-value; 0 skips it.
    #[arg(long, default_value_t = pagrowth::distfit::DEFAULT_BOOTSTRAP)]
    pub bootstrap: usize,
    /// Common cutoff at which all families are ranked against each other.
    #[arg(long, default_value_t = 1)]
    pub rank_kmin: u64,
}

enum Kmin {
    Fixed(u64),
    MinKs,
    Plausible(f64),
}

fn parse_kmin(s: &str) -> Result<Kmin> {
    if s == "auto" {
        return Ok(Kmin::MinKs);
    }
    if let Some(digits) = s.strip_prefix("auto-p") {
        let v: u32 = digits.parse().map_err(|_| usage(format!("bad --kmin {s:?}")))?;
        return Ok(Kmin::Plausible(v as f64 / 100.0));
    }
    s.parse().map(Kmin::Fixed).map_err(|_| usage(format!("bad --kmin {s:?}; expected a number, auto or auto-pNNN")))
}

fn family_file(f: Family) -> String {
    f.name().replace('_', "")
}

pub fn fitdist(args: &FitDistArgs, ctx: &mut Context) -> Result<()> {
    let kmin = parse_kmin(&args.kmin)?;
    if matches!(kmin, Kmin::Plausible(_)) && args.bootstrap == 0 {
        return Err(usage("--kmin auto-pNNN needs --bootstrap > 0"));
    }
    let loaded = args.source.load(ctx)?;
    let hist = sequence_for(&args.source, &loaded, None, None)?.final_histogram();
    let families: Vec<Family> = match args.family {
        FamilyChoice::All => Family::ALL.to_vec(),
        FamilyChoice::Lognormal => vec![Family::LogNormal],
        FamilyChoice::Powerlaw => vec![Family::PowerLaw],
        FamilyChoice::Exponential => vec![Family::Exponential],
    };

    let rows = cumulative::<f64>(&hist)?;
    let mut out = ctx.create("cumulative.csv")?;
    write_cumulative_csv(&rows, &mut out)?;
    out.flush()?;
    let k_max = hist.max_degree().unwrap_or(0);

    for &family in &families {
        let fit: TailFit<f64> = match kmin {
            Kmin::Fixed(k) => fit_mle(&hist, family, k)?,
            Kmin::MinKs => select_kmin(&hist, family)?,
            Kmin::Plausible(level) => {
                select_kmin_plausible(&hist, family, level, args.bootstrap, ctx.seed, &FitOptions::default())?
            }
        };
        let fit = if args.bootstrap > 0 && fit.p_value.is_none() {
            gof_test(&hist, &fit, args.bootstrap, ctx.seed)?
        } else {
            fit
        };
        for w in &fit.warnings {
            log::warn!("{}: {w}", family.name());
        }
        log::info!(
            "{}: k_min {}, {:?}, KS {:.5}, p {:?}",
            family.name(),
            fit.k_min,
            fit.model.params(),
            fit.ks_stat,
            fit.p_value
        );
        let name = family_file(family);
        ctx.write_json(&format!("fit_{name}.json"), &fit)?;
        let mut out = ctx.create(&format!("overlay_{name}.csv"))?;
        writeln!(out, "k,c_k")?;
        for (k, c) in fit.overlay(k_max, 20) {
            writeln!(out, "{k},{c}")?;
        }
        out.flush()?;
    }

    if families.len() > 1 {
        let fits = families
            .iter()
            .map(|&f| fit_mle::<f64>(&hist, f, args.rank_kmin))
            .collect::<pagrowth::Result<Vec<_>>>()?;
        let ranking = compare_families(&hist, &fits)?;
        match ranking.winner() {
            Some(f) => log::info!("ranking at k_min {}: {} first", ranking.k_min, f.name()),
            None => log::info!("ranking at k_min {}: no significant winner", ranking.k_min),
        }
        ctx.write_json("ranking.json", &ranking)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AfChoice {
    All,
    /// Log-linear, `(k + 1)^α`.
    LogLinear,
    /// Nonlinear, `(k + 1) / (1 + β ln(k + 1))`.
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingChoice {
    /// One unit per bin.
    Equal,
    /// Proportional to the attachment events in each bin.
    Events,
}

impl From<WeightingChoice> for Weighting {
    fn from(w: WeightingChoice) -> Self {
        match w {
            WeightingChoice::Equal => Weighting::Equal,
            WeightingChoice::Events => Weighting::Events,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitAttachArgs {
    /// Binned rate CSV, as written by `measure`.
    #[arg(long)]
    pub rate: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub family: AfChoice,
    /// Least-squares weight of each bin.
    #[arg(long, value_enum, default_value = "events")]
    pub weighting: WeightingChoice,
}

fn read_binned(path: &std::path::Path, ctx: &mut Context) -> Result<BinnedRate<f64>> {
    let input = ctx.open(path)?;
    BinnedRate::read_csv(input).with_context(|| format!("reading {}", path.display()))
}

fn model_name(f: AfFamily) -> &'static str {
    match f {
        AfFamily::LogLinear => "krapivsky",
        AfFamily::Nonlinear => "redner",
    }
}

pub fn fitattach(args: &FitAttachArgs, ctx: &mut Context) -> Result<()> {
    let binned = read_binned(&args.rate, ctx)?;
    let families = match args.family {
        AfChoice::All => AfFamily::ALL.to_vec(),
        AfChoice::LogLinear => vec![AfFamily::LogLinear],
        AfChoice::Nonlinear => vec![AfFamily::Nonlinear],
    };
    let mut fits: Vec<AttachmentFunctionFit<f64>> = Vec::new();
    for &family in &families {
        let fit = fit_af_with(&binned, family, args.weighting.into())?;
        log::info!("{}: shape {}, AIC {}", family.name(), fit.shape, fit.aic);
        ctx.write_json(&format!("fit_{}.json", family.name()), &fit)?;
        let mut out = ctx.create(&format!("overlay_{}.csv", family.name()))?;
        fit.write_overlay_csv(&binned, &mut out)?;
        out.flush()?;
        fits.push(fit);
    }
    if fits.len() > 1 {
        let ranking = compare_af(&fits)?;
        log::info!("AIC prefers {}", model_name(ranking.aic_winner));
        ctx.write_json("ranking.json", &ranking)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ScoreArgs {
    /// Binned rate CSV, as written by `measure`.
    #[arg(long)]
    pub rate: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub max_segments: usize,
    /// GCV cost per knot.
    #[arg(long, default_value_t = 3.0)]
    pub penalty: f64,
    /// Cap on candidate knot positions examined per insertion.
    #[arg(long, default_value_t = 200)]
    pub max_candidates: usize,
    #[arg(long, value_enum, default_value = "events")]
    pub weighting: WeightingChoice,
}

pub fn score(args: &ScoreArgs, ctx: &mut Context) -> Result<()> {
    let binned = read_binned(&args.rate, ctx)?;
    let options = SegmentOptions {
        max_segments: args.max_segments,
        weighting: args.weighting.into(),
        penalty: args.penalty,
        max_candidates: args.max_candidates,
    };
    let s = loglinearity_score_with(&binned, &options)?;
    log::info!("{} segments, score {}", s.segments.len(), s.score);
    ctx.write_json("score.json", &s)
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReportArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Comma-separated list of maximal, daily, monthly, yearly, biepochal
    /// (corpus input), `as-is` (sequence input) or `coarsened:N`.
    #[arg(long, default_value = "maximal,daily,monthly,yearly")]
    pub resolutions: String,
    #[arg(long, default_value_t = DEFAULT_HALF_WIDTH)]
    pub half_width: f64,
    #[arg(long, value_enum, default_value = "events")]
    pub weighting: WeightingChoice,
}

#[derive(Debug, Serialize)]
struct ReportRow {
    resolution: String,
    steps: usize,
    fits: Vec<AttachmentFunctionFit<f64>>,
    aic_winner: String,
    bic_winner: String,
    score: f64,
}

pub fn report(args: &ReportArgs, ctx: &mut Context) -> Result<()> {
    let loaded = args.source.load(ctx)?;
    let mut rows = Vec::new();
    for token in args.resolutions.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (kind, coarsen_to) = match token.split_once(':') {
            Some(("coarsened", n)) => {
                let n = n.parse().map_err(|_| usage(format!("bad resolution {token:?}")))?;
                (None, Some(n))
            }
            _ if token == "as-is" => (None, None),
            _ => {
                let kind = ResolutionKind::from_str(token, true).map_err(|_| usage(format!("unknown resolution {token:?}")))?;
                (Some(kind), None)
            }
        };
        if matches!(loaded, Loaded::Sequence(_)) && kind.is_some() {
            return Err(usage(format!("resolution {token:?} needs corpus input; use as-is or coarsened:N")));
        }
        let seq = sequence_for(&args.source, &loaded, kind, coarsen_to)?;
        let est = newman_rate::<f64>(&seq, NewmanVariant::Corrected)?;
        let binned = bin_rate(&est, args.half_width)?;
        let fits = AfFamily::ALL
            .iter()
            .map(|&f| fit_af_with(&binned, f, args.weighting.into()))
            .collect::<pagrowth::Result<Vec<_>>>()?;
        let ranking = compare_af(&fits)?;
        let score = loglinearity_score_with(
            &binned,
            &SegmentOptions { weighting: args.weighting.into(), ..SegmentOptions::default() },
        )?;
        log::info!("{token}: {} steps, AIC prefers {}", seq.steps(), model_name(ranking.aic_winner));
        rows.push(ReportRow {
            resolution: token.to_owned(),
            steps: seq.steps(),
            fits,
            aic_winner: model_name(ranking.aic_winner).to_owned(),
            bic_winner: model_name(ranking.bic_winner).to_owned(),
            score: score.score,
        });
    }
    if rows.is_empty() {
        return Err(usage("--resolutions is empty"));
    }

    let mut out = ctx.create("report.csv")?;
    writeln!(
        out,
        "resolution,steps,n_points,alpha,beta,aic_log_linear,aic_nonlinear,bic_log_linear,bic_nonlinear,aic_winner,bic_winner,score"
    )?;
    for r in &rows {
        let (ll, nl) = (&r.fits[0], &r.fits[1]);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.resolution,
            r.steps,
            ll.n_points,
            ll.shape,
            nl.shape,
            ll.aic,
            nl.aic,
            ll.bic,
            nl.bic,
            r.aic_winner,
            r.bic_winner,
            r.score
        )?;
    }
    out.flush()?;
    ctx.write_json("report.json", &rows)
}
