use trimlab_core::experiment::{
    allocate_shares, allocate_split, moment_study, run, simulate_chain, spare_band_study,
    sweep_cold_fraction, sweep_spare_split, sweep_trim, ChainConfig, ExperimentError, HotColdFrame,
    RunConfig, RunReport, Summary,
};
use trimlab_core::markov::{
    calibrate_shift, effective_overprovisioning, exact_pdf, gaussian_pdf, stirling_pdf, PdfMethod,
    SteadyDistribution, TrimParams,
};
use trimlab_core::ssd::DeviceGeometry;
use trimlab_core::workload::{lba_ranges, HotColdPlacement, TempClass, WorkloadSpec};
use trimlab_core::writeamp::{
    wa_agarwal, wa_agarwal_trim, wa_hu, wa_hu_trim, wa_xiang, wa_xiang_trim, HuParams,
};
use trimlab_core::WaModel;

use crate::output::{num, opt, Chart, Table};
use crate::params::{p, Param, Resolved};
use crate::CliError;

pub struct Command {
    /// `group.kind`, e.g. `analyze.pdf`.
    pub path: &'static str,
    pub about: &'static str,
    pub params: &'static [Param],
    pub run: fn(&Resolved) -> Result<Table, CliError>,
}

const SEED: Param = p("seed", "1592598547", "base random seed");
const T: Param = p("t", "65536", "physical pages");
const NP: Param = p("np", "64", "pages per erase block");
const R: Param = p("r", "8", "reserve-queue threshold in blocks");
const WARMUP: Param = p(
    "warmup",
    "0",
    "minimum warmup requests (2u, 3 erases per block and a full In-Use count always apply)",
);
const MEASURE: Param = p("measure", "3000000", "measured host requests per run");
const RUNS: Param = p("runs", "1", "independent replications");
const PH: Param = p("ph", "0.9", "probability a request is hot");
const QH: Param = p("qh", "0.2", "hot Trim probability");
const QC: Param = p("qc", "0.1", "cold Trim probability");

const TRIM_GRID: &str = "0,0.05,0.1,0.15,0.2,0.25,0.3";
const COLD_GRID: &str = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
const SPLIT_GRID: &str = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
const SPARE_GRID: &str = "0,0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5";

pub const COMMANDS: &[Command] = &[
    Command {
        path: "analyze.pdf",
        about: "steady-state In-Use pdf: exact, Stirling and Gaussian",
        params: &[
            p("u", "1000", "user LBAs"),
            p("q", "0.4", "Trim probability, in (0, 0.5)"),
            p(
                "shift",
                "auto",
                "approximation shift, or 'auto' to calibrate against the exact pdf",
            ),
        ],
        run: analyze_pdf,
    },
    Command {
        path: "analyze.spare",
        about: "effective spare factor mean and 3-sigma band",
        params: &[
            p("t", "1280", "physical pages"),
            p("q", "0.1", "Trim probability"),
            p("sf", SPARE_GRID, "manufacturer spare factors (comma list)"),
        ],
        run: analyze_spare,
    },
    Command {
        path: "analyze.writeamp",
        about: "closed-form write amplification models",
        params: &[
            p("rho", "1/9", "overprovisioning ratios (comma list)"),
            p("q", "0,0.1", "Trim probabilities (comma list)"),
            T,
            NP,
            R,
        ],
        run: analyze_writeamp,
    },
    Command {
        path: "simulate.uniform",
        about: "uniform random Write/Trim workload",
        params: &[
            p("q", "0", "Trim probability"),
            p("sf", "0.1", "spare factor"),
            T,
            NP,
            R,
            WARMUP,
            MEASURE,
            RUNS,
            SEED,
        ],
        run: simulate_uniform,
    },
    Command {
        path: "simulate.hotcold",
        about: "hot/cold workload, mixed and/or separated placement",
        params: &[
            p("fc", "0.5", "fraction of LBAs that are cold"),
            PH,
            QH,
            QC,
            p("sf", "0.2", "spare factor"),
            p("placement", "both", "mixed, separated or both"),
            p(
                "split",
                "0.5",
                "hot share of the spare blocks when separated",
            ),
            T,
            NP,
            R,
            WARMUP,
            MEASURE,
            RUNS,
            SEED,
        ],
        run: simulate_hotcold,
    },
    Command {
        path: "simulate.multitemp",
        about: "N-temperature workload",
        params: &[
            p("fractions", "0.1,0.2,0.7", "LBA fraction per temperature"),
            p(
                "probs",
                "0.6,0.3,0.1",
                "request probability per temperature",
            ),
            p("trims", "0.2,0.1,0.05", "Trim probability per temperature"),
            p(
                "shares",
                "",
                "spare-block share per temperature (default: equal)",
            ),
            p("sf", "0.2", "spare factor"),
            T,
            NP,
            R,
            WARMUP,
            MEASURE,
            RUNS,
            SEED,
        ],
        run: simulate_multitemp,
    },
    Command {
        path: "sweep.trim",
        about: "uniform workload across Trim probabilities",
        params: &[
            p("qs", TRIM_GRID, "Trim probabilities"),
            p("sf", "0.1", "spare factor"),
            T,
            NP,
            R,
            WARMUP,
            MEASURE,
            RUNS,
            SEED,
        ],
        run: sweep_trim_cmd,
    },
    Command {
        path: "sweep.cold-fraction",
        about: "mixed vs separated hot/cold across cold fractions",
        params: &[
            p("fcs", COLD_GRID, "cold fractions"),
            PH,
            QH,
            QC,
            p("sf", "0.2", "spare factor"),
            T,
            NP,
            R,
            WARMUP,
            MEASURE,
            RUNS,
            SEED,
        ],
        run: sweep_cold_cmd,
    },
    Command {
        path: "sweep.spare-split",
        about: "separated hot/cold across hot shares of the spare blocks",
        params: &[
            p("splits", SPLIT_GRID, "hot shares of the spare blocks"),
            p("fc", "0.9", "fraction of LBAs that are cold"),
            PH,
            QH,
            QC,
            p("sf", "0.2", "spare factor"),
            T,
            NP,
            R,
            WARMUP,
            MEASURE,
            RUNS,
            SEED,
        ],
        run: sweep_split_cmd,
    },
    Command {
        path: "reproduce.pdf",
        about: "In-Use histogram at u=1000, q=0.4 against the analytic pdfs",
        params: &[
            p("steps", "1000000", "sampled chain steps per run"),
            RUNS,
            SEED,
        ],
        run: reproduce_pdf,
    },
    Command {
        path: "reproduce.moments",
        about: "skewness and kurtosis study at u=25, q=0.3",
        params: &[
            p("steps", "1000000", "sampled chain steps per run"),
            p("runs", "64", "independent replications"),
            SEED,
        ],
        run: reproduce_moments,
    },
    Command {
        path: "reproduce.spare",
        about: "effective vs specified spare factor at t=1280, q=0.1",
        params: &[
            p("steps", "1000000", "sampled chain steps per spare factor"),
            SEED,
        ],
        run: reproduce_spare,
    },
    Command {
        path: "reproduce.trim",
        about: "Trim sweep at spare factor 0.1 with three models",
        params: &[T, NP, R, WARMUP, MEASURE, RUNS, SEED],
        run: reproduce_trim,
    },
    Command {
        path: "reproduce.mixed",
        about: "mixed hot/cold data against the naive uniform model",
        params: &[T, NP, R, WARMUP, MEASURE, RUNS, SEED],
        run: reproduce_mixed,
    },
    Command {
        path: "reproduce.split",
        about: "spare-block split sweep for separated hot/cold data",
        params: &[T, NP, R, WARMUP, MEASURE, RUNS, SEED],
        run: reproduce_split,
    },
    Command {
        path: "reproduce.placement",
        about: "mixed vs separated hot/cold data across cold fractions",
        params: &[T, NP, R, WARMUP, MEASURE, RUNS, SEED],
        run: reproduce_placement,
    },
];

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Ftl { .. } | ExperimentError::WarmupStalled { .. } => {
                CliError::Runtime(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn config_err(what: impl std::fmt::Display) -> CliError {
    CliError::Config(what.to_string())
}

fn trim_params(u: usize, q: f64) -> Result<TrimParams, CliError> {
    TrimParams::new(u, q).map_err(|e| config_err(format!("u = {u}, q = {q}: {e}")))
}

fn geometry(r: &Resolved, spare_factor: f64) -> Result<DeviceGeometry, CliError> {
    DeviceGeometry::with_spare_factor(r.get("t")?, spare_factor, r.get("np")?, r.get("r")?)
        .map_err(|e| config_err(format!("geometry (t, np, r, sf = {spare_factor}): {e}")))
}

fn base(r: &Resolved, spare_factor: f64, workload: WorkloadSpec) -> Result<RunConfig, CliError> {
    Ok(RunConfig {
        seed: r.get("seed")?,
        warmup_requests: r.get("warmup")?,
        measure_requests: r.get("measure")?,
        runs: r.get("runs")?,
        ..RunConfig::new(geometry(r, spare_factor)?, workload)
    })
}

fn frame(r: &Resolved) -> Result<HotColdFrame, CliError> {
    Ok(HotColdFrame {
        hot_request_prob: r.real("ph")?,
        hot_trim_prob: r.real("qh")?,
        cold_trim_prob: r.real("qc")?,
    })
}

fn with_notes(mut t: Table, r: &Resolved, extra: Vec<String>) -> Table {
    t.notes = r.echo();
    t.notes.extend(extra);
    t
}

fn pdf_column(d: &SteadyDistribution, x: usize) -> String {
    num(d.prob(x))
}

fn analyze_pdf(r: &Resolved) -> Result<Table, CliError> {
    let params = trim_params(r.get("u")?, r.real("q")?)?;
    let (s_shift, g_shift) = match r.raw("shift") {
        "auto" => (
            calibrate_shift(&params, PdfMethod::Stirling)
                .map_err(config_err)?
                .0,
            calibrate_shift(&params, PdfMethod::Gaussian)
                .map_err(config_err)?
                .0,
        ),
        _ => {
            let s = r.real("shift")?;
            (s, s)
        }
    };
    let exact = exact_pdf(&params);
    let stirling = stirling_pdf(&params, s_shift).map_err(|e| config_err(format!("q: {e}")))?;
    let gaussian = gaussian_pdf(&params, g_shift).map_err(|e| config_err(format!("q: {e}")))?;
    let mut t = Table::new(vec!["x", "exact", "stirling", "gaussian"]);
    for x in 0..=params.u() {
        t.push(vec![
            x.to_string(),
            pdf_column(&exact, x),
            pdf_column(&stirling, x),
            pdf_column(&gaussian, x),
        ]);
    }
    t.chart = Some(Chart {
        title: format!("steady-state pdf, u={}, q={}", params.u(), params.q()),
        x: "x",
        y: vec!["exact", "stirling", "gaussian"],
    });
    Ok(with_notes(
        t,
        r,
        vec![
            format!("stirling_shift = {s_shift}"),
            format!("gaussian_shift = {g_shift}"),
        ],
    ))
}

fn analyze_spare(r: &Resolved) -> Result<Table, CliError> {
    let total: usize = r.get("t")?;
    let q = r.real("q")?;
    let mut t = Table::new(vec![
        "sf",
        "q",
        "mean",
        "std",
        "lower_3sigma",
        "upper_3sigma",
        "rho_eff",
    ]);
    for sf in r.reals("sf")? {
        let e = effective_overprovisioning(sf, q, total as f64)
            .map_err(|e| config_err(format!("sf = {sf}, q = {q}: {e}")))?;
        let sd = e.std_spare_factor();
        t.push(vec![
            num(sf),
            num(q),
            num(e.mean_spare_factor),
            num(sd),
            num(e.mean_spare_factor - 3.0 * sd),
            num(e.mean_spare_factor + 3.0 * sd),
            num(e.rho_eff),
        ]);
    }
    t.chart = Some(Chart {
        title: format!("effective spare factor, t={total}, q={q}"),
        x: "sf",
        y: vec!["mean", "lower_3sigma", "upper_3sigma"],
    });
    Ok(with_notes(t, r, vec![]))
}

fn analyze_writeamp(r: &Resolved) -> Result<Table, CliError> {
    let total: usize = r.get("t")?;
    let (np, reserve): (usize, usize) = (r.get("np")?, r.get("r")?);
    let mut t = Table::new(vec!["model", "rho", "q", "value"]);
    for rho in r.reals("rho")? {
        for q in r.reals("q")? {
            wa_xiang_trim(rho, q).map_err(|e| config_err(format!("rho = {rho}, q = {q}: {e}")))?;
            let hu = HuParams::greedy(total, total as f64 / (1.0 + rho), np, reserve);
            let rows = [
                (WaModel::Hu, wa_hu(&hu)),
                (WaModel::HuTrim, wa_hu_trim(&hu, q)),
                (WaModel::Agarwal, wa_agarwal(rho)),
                (WaModel::AgarwalTrim, wa_agarwal_trim(rho, q)),
                (WaModel::Xiang, wa_xiang(rho)),
                (WaModel::XiangTrim, wa_xiang_trim(rho, q)),
            ];
            for (model, value) in rows {
                t.push(vec![
                    model.name().to_string(),
                    num(rho),
                    num(q),
                    opt(value.ok().map(|p| p.value)),
                ]);
            }
        }
    }
    Ok(with_notes(t, r, vec![]))
}

fn prediction(report: &RunReport, model: WaModel) -> Option<f64> {
    report.prediction(model).map(|p| p.value)
}

fn simulate_uniform(r: &Resolved) -> Result<Table, CliError> {
    let q = r.real("q")?;
    let sf = r.real("sf")?;
    let cfg = base(r, sf, WorkloadSpec::Uniform { trim_prob: q })?;
    let report = run(&cfg)?;
    let g = cfg.geometry;
    let mut t = Table::new(vec![
        "q",
        "sf",
        "t",
        "u",
        "runs",
        "measured_wa",
        "measured_std",
        "in_use_mean",
        "in_use_var",
        "hu_trim",
        "agarwal_trim",
        "xiang_trim",
    ]);
    t.push(vec![
        num(q),
        num(g.spare_factor()),
        g.total_pages().to_string(),
        g.user_lbas().to_string(),
        cfg.runs.to_string(),
        num(report.measured_wa.mean),
        num(report.measured_wa.std),
        num(report.in_use.mean()),
        num(report.in_use.variance()),
        opt(prediction(&report, WaModel::HuTrim)),
        opt(prediction(&report, WaModel::AgarwalTrim)),
        opt(prediction(&report, WaModel::XiangTrim)),
    ]);
    Ok(with_notes(t, r, vec![]))
}

fn summary_cells(s: Option<Summary>) -> [String; 2] {
    match s {
        Some(s) => [num(s.mean), num(s.std)],
        None => [String::new(), String::new()],
    }
}

fn simulate_hotcold(r: &Resolved) -> Result<Table, CliError> {
    let fc = r.real("fc")?;
    let split = r.real("split")?;
    let fr = frame(r)?;
    let probe = base(r, r.real("sf")?, fr.workload(fc, HotColdPlacement::Mixed))?;
    let ranges = lba_ranges(&probe.workload.classes(), probe.geometry.user_lbas());
    let g = probe.geometry;
    let (hot_blocks, cold_blocks) = allocate_split(
        g.blocks(),
        g.pages_per_block(),
        ranges[0].len(),
        ranges[1].len(),
        split,
    )?;
    let (mixed, separated) = match r.raw("placement") {
        "mixed" => (true, false),
        "separated" => (false, true),
        "both" => (true, true),
        other => {
            return Err(config_err(format!(
                "parameter 'placement' = '{other}': expected mixed, separated or both"
            )))
        }
    };
    let mixed = mixed.then(|| run(&probe)).transpose()?;
    let separated = separated
        .then(|| {
            run(&RunConfig {
                workload: fr.workload(fc, HotColdPlacement::Separated { hot_blocks }),
                ..probe.clone()
            })
        })
        .transpose()?;
    let mut t = Table::new(vec![
        "fc",
        "split",
        "hot_blocks",
        "cold_blocks",
        "mixed_wa",
        "mixed_std",
        "separated_wa",
        "separated_std",
        "hot_pool_wa",
        "cold_pool_wa",
        "mixed_naive",
        "hot_cold_separated",
    ]);
    let [mm, ms] = summary_cells(mixed.as_ref().map(|m| m.measured_wa));
    let [sm, ss] = summary_cells(separated.as_ref().map(|s| s.measured_wa));
    let pool = |j: usize| opt(separated.as_ref().map(|s| s.pool_wa[j].mean));
    t.push(vec![
        num(fc),
        num(split),
        hot_blocks.to_string(),
        cold_blocks.to_string(),
        mm,
        ms,
        sm,
        ss,
        pool(0),
        pool(1),
        opt(mixed
            .as_ref()
            .and_then(|m| prediction(m, WaModel::MixedNaive))),
        opt(separated
            .as_ref()
            .and_then(|s| prediction(s, WaModel::HotColdSeparated))),
    ]);
    Ok(with_notes(t, r, vec![]))
}

fn simulate_multitemp(r: &Resolved) -> Result<Table, CliError> {
    let (fractions, probs, trims) = (r.reals("fractions")?, r.reals("probs")?, r.reals("trims")?);
    if fractions.len() != probs.len() || fractions.len() != trims.len() {
        return Err(config_err(
            "parameters 'fractions', 'probs' and 'trims' must have equal length",
        ));
    }
    let n = fractions.len();
    let classes: Vec<TempClass> = (0..n)
        .map(|j| TempClass {
            lba_fraction: fractions[j],
            request_prob: probs[j],
            trim_prob: trims[j],
        })
        .collect();
    let g = geometry(r, r.real("sf")?)?;
    let lbas: Vec<usize> = lba_ranges(&classes, g.user_lbas())
        .iter()
        .map(|x| x.len())
        .collect();
    let shares = match r.reals("shares")? {
        s if s.is_empty() => vec![1.0 / n as f64; n],
        s => s,
    };
    let blocks = allocate_shares(g.blocks(), g.pages_per_block(), &lbas, &shares)?;
    let pages: Vec<usize> = blocks.iter().map(|b| b * g.pages_per_block()).collect();
    let cfg = base(
        r,
        r.real("sf")?,
        WorkloadSpec::MultiTemp {
            classes: classes.clone(),
            pages: pages.clone(),
        },
    )?;
    let report = run(&cfg)?;
    let mut t = Table::new(vec![
        "pool",
        "lba_fraction",
        "request_prob",
        "trim_prob",
        "lbas",
        "blocks",
        "rho",
        "measured_wa",
        "measured_std",
        "predicted",
    ]);
    for j in 0..n {
        let rho = (pages[j] as f64 - lbas[j] as f64) / lbas[j] as f64;
        t.push(vec![
            j.to_string(),
            num(classes[j].lba_fraction),
            num(classes[j].request_prob),
            num(classes[j].trim_prob),
            lbas[j].to_string(),
            blocks[j].to_string(),
            num(rho),
            num(report.pool_wa[j].mean),
            num(report.pool_wa[j].std),
            opt(wa_xiang_trim(rho, classes[j].trim_prob)
                .ok()
                .map(|p| p.value)),
        ]);
    }
    let model = WaModel::MultiTemp;
    t.push(vec![
        "all".into(),
        "1".into(),
        "1".into(),
        String::new(),
        g.user_lbas().to_string(),
        g.blocks().to_string(),
        num(g.rho()),
        num(report.measured_wa.mean),
        num(report.measured_wa.std),
        opt(prediction(&report, model)),
    ]);
    Ok(with_notes(
        t,
        r,
        vec![format!("predicted_model = {}", model.name())],
    ))
}

fn trim_table(cfg: &RunConfig, qs: &[f64]) -> Result<Table, CliError> {
    let rows = sweep_trim(cfg, qs)?;
    let mut t = Table::new(vec![
        "q",
        "measured_wa",
        "measured_std",
        "hu_trim",
        "agarwal_trim",
        "xiang_trim",
    ]);
    for row in rows {
        t.push(vec![
            num(row.trim_prob),
            num(row.measured.mean),
            num(row.measured.std),
            opt(row.predicted(WaModel::HuTrim)),
            opt(row.predicted(WaModel::AgarwalTrim)),
            opt(row.predicted(WaModel::XiangTrim)),
        ]);
    }
    t.chart = Some(Chart {
        title: "write amplification vs Trim probability".into(),
        x: "q",
        y: vec!["measured_wa", "hu_trim", "agarwal_trim", "xiang_trim"],
    });
    Ok(t)
}

fn cold_table(cfg: &RunConfig, fr: &HotColdFrame, fcs: &[f64]) -> Result<Table, CliError> {
    let rows = sweep_cold_fraction(cfg, fr, fcs)?;
    let mut t = Table::new(vec![
        "fc",
        "hot_blocks",
        "mixed_wa",
        "mixed_std",
        "separated_wa",
        "separated_std",
        "mixed_naive",
        "hot_cold_separated",
    ]);
    for row in rows {
        t.push(vec![
            num(row.cold_fraction),
            row.hot_blocks.to_string(),
            num(row.mixed.mean),
            num(row.mixed.std),
            num(row.separated.mean),
            num(row.separated.std),
            opt(row.naive),
            opt(row.separated_theory),
        ]);
    }
    t.chart = Some(Chart {
        title: "mixed vs separated hot/cold data".into(),
        x: "fc",
        y: vec![
            "mixed_wa",
            "separated_wa",
            "mixed_naive",
            "hot_cold_separated",
        ],
    });
    Ok(t)
}

fn split_table(
    cfg: &RunConfig,
    fr: &HotColdFrame,
    fc: f64,
    splits: &[f64],
) -> Result<(Table, Vec<String>), CliError> {
    let sweep = sweep_spare_split(cfg, fr, fc, splits)?;
    let mut t = Table::new(vec![
        "split",
        "hot_blocks",
        "cold_blocks",
        "measured_wa",
        "measured_std",
        "hot_cold_separated",
        "status",
    ]);
    for row in &sweep.rows {
        let [m, s] = summary_cells(row.measured);
        let status = match &row.error {
            None => "ok".to_string(),
            Some(e) => format!("infeasible: {}", e.replace(',', ";")),
        };
        t.push(vec![
            num(row.split),
            row.hot_blocks.to_string(),
            row.cold_blocks.to_string(),
            m,
            s,
            opt(row.predicted),
            status,
        ]);
    }
    t.chart = Some(Chart {
        title: format!("spare-block split, fc={fc}"),
        x: "split",
        y: vec!["measured_wa", "hot_cold_separated"],
    });
    let notes = vec![
        format!("measured_argmin = {}", opt(sweep.measured_argmin)),
        format!("predicted_argmin = {}", opt(sweep.predicted_argmin)),
    ];
    Ok((t, notes))
}

fn sweep_trim_cmd(r: &Resolved) -> Result<Table, CliError> {
    let cfg = base(r, r.real("sf")?, WorkloadSpec::Sequential)?;
    Ok(with_notes(trim_table(&cfg, &r.reals("qs")?)?, r, vec![]))
}

fn sweep_cold_cmd(r: &Resolved) -> Result<Table, CliError> {
    let cfg = base(r, r.real("sf")?, WorkloadSpec::Sequential)?;
    Ok(with_notes(
        cold_table(&cfg, &frame(r)?, &r.reals("fcs")?)?,
        r,
        vec![],
    ))
}

fn sweep_split_cmd(r: &Resolved) -> Result<Table, CliError> {
    let cfg = base(r, r.real("sf")?, WorkloadSpec::Sequential)?;
    let (t, notes) = split_table(&cfg, &frame(r)?, r.real("fc")?, &r.reals("splits")?)?;
    Ok(with_notes(t, r, notes))
}

fn chain(r: &Resolved, u: usize, q: f64) -> Result<ChainConfig, CliError> {
    Ok(ChainConfig {
        user_lbas: u,
        trim_prob: q,
        warmup_steps: None,
        steps: r.get("steps")?,
        runs: r.get("runs")?,
        seed: r.get("seed")?,
    })
}

fn reproduce_pdf(r: &Resolved) -> Result<Table, CliError> {
    let params = trim_params(1000, 0.4)?;
    let report = simulate_chain(&chain(r, 1000, 0.4)?)?;
    let sim = report.empirical_pdf();
    let s_shift = calibrate_shift(&params, PdfMethod::Stirling)
        .map_err(config_err)?
        .0;
    let g_shift = calibrate_shift(&params, PdfMethod::Gaussian)
        .map_err(config_err)?
        .0;
    let exact = exact_pdf(&params);
    let stirling = stirling_pdf(&params, s_shift).map_err(config_err)?;
    let gaussian = gaussian_pdf(&params, g_shift).map_err(config_err)?;
    let mut t = Table::new(vec!["x", "simulated", "exact", "stirling", "gaussian"]);
    for (x, p) in sim.iter().enumerate() {
        t.push(vec![
            x.to_string(),
            num(*p),
            pdf_column(&exact, x),
            pdf_column(&stirling, x),
            pdf_column(&gaussian, x),
        ]);
    }
    t.chart = Some(Chart {
        title: "In-Use pdf, u=1000, q=0.4".into(),
        x: "x",
        y: vec!["simulated", "exact", "stirling", "gaussian"],
    });
    let ks = trimlab_core::markov::ks_distance(&report.empirical_cdf(), &exact.cdf());
    Ok(with_notes(
        t,
        r,
        vec![
            "u = 1000".into(),
            "q = 0.4".into(),
            format!("stirling_shift = {s_shift}"),
            format!("gaussian_shift = {g_shift}"),
            format!("ks_simulated_exact = {ks}"),
        ],
    ))
}

fn reproduce_moments(r: &Resolved) -> Result<Table, CliError> {
    let study = moment_study(&chain(r, 25, 0.3)?)?;
    let mut t = Table::new(vec![
        "statistic",
        "simulated_mean",
        "simulated_std",
        "exact",
        "theory",
    ]);
    t.push(vec![
        "skewness".into(),
        num(study.skewness.mean),
        num(study.skewness.std),
        num(study.exact.skewness),
        num(study.theory_skewness),
    ]);
    t.push(vec![
        "excess_kurtosis".into(),
        num(study.excess_kurtosis.mean),
        num(study.excess_kurtosis.std),
        num(study.exact.excess_kurtosis),
        num(study.theory_excess_kurtosis),
    ]);
    Ok(with_notes(t, r, vec!["u = 25".into(), "q = 0.3".into()]))
}

fn reproduce_spare(r: &Resolved) -> Result<Table, CliError> {
    let sfs = grid(SPARE_GRID);
    let rows = spare_band_study(1280, &sfs, 0.1, r.get("steps")?, r.get("seed")?)?;
    let mut t = Table::new(vec![
        "sf",
        "theory_mean",
        "theory_lower_3sigma",
        "theory_upper_3sigma",
        "simulated_mean",
        "simulated_std",
        "within_3sigma",
    ]);
    for (sf, row) in sfs.iter().zip(rows) {
        t.push(vec![
            num(*sf),
            num(row.theory_mean),
            num(row.theory_mean - 3.0 * row.theory_std),
            num(row.theory_mean + 3.0 * row.theory_std),
            num(row.empirical_mean),
            num(row.empirical_std),
            num(row.within_3sigma),
        ]);
    }
    t.chart = Some(Chart {
        title: "effective spare factor, t=1280, q=0.1".into(),
        x: "sf",
        y: vec![
            "theory_mean",
            "theory_lower_3sigma",
            "theory_upper_3sigma",
            "simulated_mean",
        ],
    });
    Ok(with_notes(
        t,
        r,
        vec!["t_pages = 1280".into(), "q = 0.1".into()],
    ))
}

fn grid(s: &str) -> Vec<f64> {
    s.split(',').map(|x| x.parse().unwrap()).collect()
}

fn reproduce_trim(r: &Resolved) -> Result<Table, CliError> {
    let cfg = base(r, 0.1, WorkloadSpec::Sequential)?;
    Ok(with_notes(
        trim_table(&cfg, &grid(TRIM_GRID))?,
        r,
        vec!["sf = 0.1".into()],
    ))
}

fn frame_notes() -> Vec<String> {
    let f = HotColdFrame::STANDARD;
    vec![
        "sf = 0.2".into(),
        format!("ph = {}", f.hot_request_prob),
        format!("qh = {}", f.hot_trim_prob),
        format!("qc = {}", f.cold_trim_prob),
    ]
}

fn reproduce_mixed(r: &Resolved) -> Result<Table, CliError> {
    let cfg = base(r, 0.2, WorkloadSpec::Sequential)?;
    let fr = HotColdFrame::STANDARD;
    let mut t = Table::new(vec!["fc", "mixed_wa", "mixed_std", "mixed_naive"]);
    for fc in grid(COLD_GRID) {
        let report = run(&RunConfig {
            workload: fr.workload(fc, HotColdPlacement::Mixed),
            ..cfg.clone()
        })?;
        t.push(vec![
            num(fc),
            num(report.measured_wa.mean),
            num(report.measured_wa.std),
            opt(prediction(&report, WaModel::MixedNaive)),
        ]);
    }
    t.chart = Some(Chart {
        title: "mixed hot/cold data".into(),
        x: "fc",
        y: vec!["mixed_wa", "mixed_naive"],
    });
    Ok(with_notes(t, r, frame_notes()))
}

fn reproduce_split(r: &Resolved) -> Result<Table, CliError> {
    let cfg = base(r, 0.2, WorkloadSpec::Sequential)?;
    let (t, mut notes) = split_table(&cfg, &HotColdFrame::STANDARD, 0.9, &grid(SPLIT_GRID))?;
    let mut all = frame_notes();
    all.push("fc = 0.9".into());
    all.append(&mut notes);
    Ok(with_notes(t, r, all))
}

fn reproduce_placement(r: &Resolved) -> Result<Table, CliError> {
    let cfg = base(r, 0.2, WorkloadSpec::Sequential)?;
    let t = cold_table(&cfg, &HotColdFrame::STANDARD, &grid(COLD_GRID))?;
    let mut notes = frame_notes();
    notes.push("split = 0.5".into());
    Ok(with_notes(t, r, notes))
}
