use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use matnc_core::bitstring::{format_bitstrings, parse_bitstrings, random_bitstrings, random_distinct_bitstrings};
use matnc_core::circuit::random::sycamore_like;
use matnc_core::cost::{layer_widths, partition_blocks, WidthsSource};
use matnc_core::exec::run_parallel;
use matnc_core::io::{amplitudes_jsonl, format_f64, pairs_jsonl, parse_amplitudes_jsonl};
use matnc_core::oracle::{statevector_capped, DEFAULT_MAX_QUBITS};
use matnc_core::reuse::{plan_memory_sliced, PlanSummary};
use matnc_core::tensor::{TensorError, DEFAULT_MAX_ELEMENTS};
use matnc_core::xeb::{histogram_rescaled, ks_critical_1pct, ks_statistic, porter_thomas_cdf, xeb_estimate};
use matnc_core::{
    anneal_order, build_tensor_network, build_tree, cost_report, greedy_order, parse_circuit, select_slices,
    AmplitudeSet, Bitstring, Circuit, ContractionOrder, ExecError, ExecOptions, Loss, SearchConfig, SliceSpec,
    TensorNetwork, WidthsMode,
};
use serde_json::json;

use crate::config::ConfigFile;
use crate::{
    CliError, Command, Common, GenerateArgs, LossArg, OracleArgs, PlanArgs, PrecisionArg, ReportArgs, ScalingArgs,
    SearchArgs, SimulateArgs, WidthsArg, WidthsOpts, XebArgs,
};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Search(a) => search(a),
        Command::Report(a) => report(a),
        Command::Plan(a) => plan(a),
        Command::Simulate(a) => simulate(a),
        Command::Oracle(a) => oracle(a),
        Command::Xeb(a) => xeb(a),
        Command::Scaling(a) => scaling(a),
    }
}

/// Common inputs after merging flags with the config file.
struct Inputs {
    cfg: ConfigFile,
    circuit: Option<PathBuf>,
    bitstrings: Option<PathBuf>,
    order: Option<PathBuf>,
    seed: u64,
    out_dir: PathBuf,
}

impl Inputs {
    fn new(c: Common) -> Result<Self, CliError> {
        let cfg = ConfigFile::load(c.config.as_deref())?;
        Ok(Inputs {
            circuit: cfg.resolve("circuit", c.circuit)?,
            bitstrings: cfg.resolve("bitstrings", c.bitstrings)?,
            order: cfg.resolve("order", c.order)?,
            seed: cfg.value_or("seed", c.seed, 0)?,
            out_dir: cfg.value_or("out-dir", c.out_dir, PathBuf::from("."))?,
            cfg,
        })
    }

    fn circuit(&self) -> Result<(Circuit, TensorNetwork), CliError> {
        let path = self.circuit.as_ref().ok_or_else(|| CliError::Usage("--circuit is required".into()))?;
        let c = parse_circuit(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
        let tn = build_tensor_network(&c);
        Ok((c, tn))
    }

    fn bitstrings(&self, n: usize) -> Result<Option<Vec<Bitstring>>, CliError> {
        match &self.bitstrings {
            None => Ok(None),
            Some(p) => {
                let list = parse_bitstrings(&read(p)?, n).with_context(|| format!("parsing {}", p.display()))?;
                Ok(Some(list))
            }
        }
    }

    fn required_bitstrings(&self, n: usize) -> Result<Vec<Bitstring>, CliError> {
        self.bitstrings(n)?.ok_or_else(|| CliError::Usage("--bitstrings is required".into()))
    }

    /// The order file if given, else a greedy order.
    fn order(&self, tn: &TensorNetwork) -> Result<ContractionOrder, CliError> {
        match &self.order {
            Some(p) => Ok(ContractionOrder::from_json(&read(p)?, tn).with_context(|| format!("loading {}", p.display()))?),
            None => Ok(greedy_order(tn, self.seed)),
        }
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out_dir).with_context(|| format!("creating {}", self.out_dir.display()))?;
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    Ok(std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
}

fn widths_source(
    inputs: &Inputs,
    opts: WidthsOpts,
    bitstrings: Option<&[Bitstring]>,
) -> Result<(WidthsMode, WidthsSource), CliError> {
    let mode = inputs.cfg.value_or("widths", opts.widths, WidthsArg::Exact)?;
    let k = inputs.cfg.resolve("k", opts.k)?;
    match mode {
        WidthsArg::Exact => {
            let list =
                bitstrings.ok_or_else(|| CliError::Usage("--widths exact needs --bitstrings (or use --widths model --k K)".into()))?;
            Ok((WidthsMode::Exact, WidthsSource::exact(list)))
        }
        WidthsArg::Model => {
            let k = k.ok_or_else(|| CliError::Usage("--widths model needs --k".into()))?;
            if k == 0 {
                return Err(CliError::Usage("--k must be at least 1".into()));
            }
            Ok((WidthsMode::Model { k }, WidthsSource::Model { k }))
        }
    }
}

fn generate(a: GenerateArgs) -> Result<(), CliError> {
    let inputs = Inputs::new(a.common)?;
    let n: usize = inputs.cfg.resolve("qubits", a.qubits)?.ok_or_else(|| CliError::Usage("--qubits is required".into()))?;
    let depth: usize = inputs.cfg.resolve("depth", a.depth)?.ok_or_else(|| CliError::Usage("--depth is required".into()))?;
    if n == 0 || n > 64 {
        return Err(CliError::Usage(format!("--qubits must be in 1..=64, got {n}")));
    }
    let c = sycamore_like(n, depth, inputs.seed);
    let path = inputs.write("circuit.txt", &c.to_string())?;
    println!("circuit: {} qubits, {} gates, depth {} -> {}", n, c.gates().len(), c.depth(), path.display());
    if let Some(k) = inputs.cfg.resolve::<usize>("random-bitstrings", a.random_bitstrings)? {
        let list = random_bitstrings(n, k, inputs.seed);
        let path = inputs.write("bitstrings.txt", &format_bitstrings(&list))?;
        println!("bitstrings: {k} -> {}", path.display());
    }
    Ok(())
}

fn search(a: SearchArgs) -> Result<(), CliError> {
    let inputs = Inputs::new(a.common)?;
    let loss = match inputs.cfg.value_or("loss", a.loss, LossArg::Multi)? {
        LossArg::Single => Loss::Single,
        LossArg::Multi => Loss::Multi,
    };
    let budget = inputs.cfg.value_or("budget", a.budget, 20_000)?;
    let (_, tn) = inputs.circuit()?;
    let bitstrings = inputs.bitstrings(tn.n_qubits())?;
    let (widths, _) = widths_source(&inputs, a.widths, bitstrings.as_deref())?;
    let init = inputs.order(&tn)?;
    let cfg = SearchConfig { loss, widths, budget, seed: inputs.seed, ..SearchConfig::default() };
    let (order, report) = anneal_order(&tn, &init, &cfg, bitstrings.as_deref())?;
    let order_path = inputs.write("order.json", &order.to_json(&tn))?;
    let report_path = inputs.write("report.json", &report.to_json())?;
    println!(
        "single cost {}  multi cost {}  reuse ratio {:.3}",
        report.single_cost, report.multi_cost, report.reuse_ratio
    );
    println!("wrote {} and {}", order_path.display(), report_path.display());
    Ok(())
}

fn report(a: ReportArgs) -> Result<(), CliError> {
    let inputs = Inputs::new(a.common)?;
    let (_, tn) = inputs.circuit()?;
    let bitstrings = inputs.bitstrings(tn.n_qubits())?;
    let (_, source) = widths_source(&inputs, a.widths, bitstrings.as_deref())?;
    let order = inputs.order(&tn)?;
    let report = cost_report(&order, &tn, &source)?;
    let path = inputs.write("report.json", &report.to_json())?;
    println!(
        "k {}  single cost {}  multi cost {}  linear baseline {}  reuse ratio {:.3}",
        report.k, report.single_cost, report.multi_cost, report.linear_baseline, report.reuse_ratio
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn slices_for(
    inputs: &Inputs,
    flag: Option<usize>,
    order: &ContractionOrder,
    tn: &TensorNetwork,
) -> Result<SliceSpec, CliError> {
    match inputs.cfg.resolve("max-rank", flag)? {
        None => Ok(SliceSpec::none()),
        Some(r) => Ok(select_slices(order, tn, r)?),
    }
}

fn plan(a: PlanArgs) -> Result<(), CliError> {
    let inputs = Inputs::new(a.common)?;
    let (_, tn) = inputs.circuit()?;
    let bitstrings = inputs.required_bitstrings(tn.n_qubits())?;
    let order = inputs.order(&tn)?;
    let slices = slices_for(&inputs, a.max_rank, &order, &tn)?;
    let tree = build_tree(&partition_blocks(&order, &tn)?, &bitstrings)?;
    let memory = plan_memory_sliced(&tree, &tn, &order, &slices)?;
    let report = cost_report(&order, &tn, &WidthsSource::exact(&bitstrings))?;
    let summary = PlanSummary::new(&tree, &memory, &report);
    let mut doc = serde_json::to_value(&summary)?;
    doc["slicing"] = serde_json::to_value(&slices)?;
    doc["lossless"] = json!(memory.is_lossless());
    let path = inputs.write("plan.json", &serde_json::to_string_pretty(&doc)?)?;
    println!(
        "{} distinct of {} requested  nodes {}  widths {:?}",
        summary.distinct, summary.requested, summary.nodes, summary.widths
    );
    println!(
        "peak {} elements ({} bytes)  single-amplitude peak {}  reuse ratio {:.3}  slices {}",
        summary.peak_elements, summary.peak_bytes, summary.single_amplitude_peak, summary.reuse_ratio, slices.n_slices
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn is_capacity(e: &ExecError) -> bool {
    match e {
        ExecError::Step { source: TensorError::Capacity { .. }, .. } => true,
        ExecError::Fix(TensorError::Capacity { .. }) => true,
        ExecError::Slice { source, .. } => is_capacity(source),
        _ => false,
    }
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let inputs = Inputs::new(a.common)?;
    let workers = inputs.cfg.value_or("workers", a.workers, 1usize)?;
    if workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let precision = inputs.cfg.value_or("precision", a.precision, PrecisionArg::F64)?;
    let max_elements = inputs.cfg.value_or("max-elements", a.max_elements, DEFAULT_MAX_ELEMENTS)?;
    let (_, tn) = inputs.circuit()?;
    let bitstrings = inputs.required_bitstrings(tn.n_qubits())?;
    let order = inputs.order(&tn)?;
    let slices = slices_for(&inputs, a.max_rank, &order, &tn)?;
    let tree = build_tree(&partition_blocks(&order, &tn)?, &bitstrings)?;
    let report = cost_report(&order, &tn, &WidthsSource::exact(&bitstrings))?;
    let opts = ExecOptions { max_elements };

    let start = Instant::now();
    let result: Result<AmplitudeSet, ExecError> = match precision {
        PrecisionArg::F64 => run_parallel::<f64>(&tn, &order, &tree, &slices, workers, &opts),
        PrecisionArg::F32 => run_parallel::<f32>(&tn, &order, &tree, &slices, workers, &opts),
    };
    let elapsed = start.elapsed();
    let set = match result {
        Ok(set) => set,
        Err(e) if is_capacity(&e) => {
            let rank = usize::BITS - 1 - max_elements.max(1).leading_zeros();
            return Err(CliError::Runtime(anyhow::anyhow!(
                "{e}; rerun with --max-rank {rank} (or smaller) to slice the network"
            )));
        }
        Err(e) => return Err(e.into()),
    };

    let bytes_per_element: u128 = match precision {
        PrecisionArg::F64 => 16,
        PrecisionArg::F32 => 8,
    };
    let summary = json!({
        "n_qubits": set.n_qubits,
        "requested": bitstrings.len(),
        "distinct": tree.distinct().len(),
        "precision": format!("{precision:?}").to_lowercase(),
        "order_fingerprint": set.meta.order_fingerprint,
        "single_cost": report.single_cost,
        "multi_cost": report.multi_cost,
        "linear_baseline": report.linear_baseline,
        "reuse_ratio": report.reuse_ratio,
        "n_slices": slices.n_slices,
        "sliced_ids": slices.sliced_ids,
        "multiplications": set.meta.multiplications,
        "peak_live_elements": set.meta.peak_live_elements,
        "peak_bytes": set.meta.peak_live_elements * bytes_per_element,
        "max_intermediate_rank": set.meta.max_intermediate_rank,
    });
    let amp_path = inputs.write("amplitudes.jsonl", &amplitudes_jsonl(&set))?;
    let sum_path = inputs.write("summary.json", &serde_json::to_string_pretty(&summary)?)?;
    println!(
        "{} amplitudes  single cost {}  multi cost {}  reuse ratio {:.3}  slices {}  peak {} elements",
        set.entries.len(),
        report.single_cost,
        report.multi_cost,
        report.reuse_ratio,
        slices.n_slices,
        set.meta.peak_live_elements
    );
    println!("wall time {:.3} s on {workers} worker(s)", elapsed.as_secs_f64());
    println!("wrote {} and {}", amp_path.display(), sum_path.display());
    Ok(())
}

fn oracle(a: OracleArgs) -> Result<(), CliError> {
    let inputs = Inputs::new(a.common)?;
    let cap = inputs.cfg.value_or("max-qubits", a.max_qubits, DEFAULT_MAX_QUBITS)?;
    let (circuit, _) = inputs.circuit()?;
    let bitstrings = inputs.required_bitstrings(circuit.n_qubits())?;
    let sv = statevector_capped(&circuit, cap)?;
    let pairs: Vec<_> = bitstrings.iter().map(|b| (*b, sv.amplitude(b))).collect();
    let path = inputs.write("oracle.jsonl", &pairs_jsonl(&pairs))?;
    println!("{} amplitudes, state norm² {:.15}", pairs.len(), sv.norm_sqr());
    println!("wrote {}", path.display());
    Ok(())
}

fn xeb(a: XebArgs) -> Result<(), CliError> {
    let inputs = Inputs::new(a.common)?;
    let path: PathBuf =
        inputs.cfg.resolve("amplitudes", a.amplitudes)?.ok_or_else(|| CliError::Usage("--amplitudes is required".into()))?;
    let bins = inputs.cfg.value_or("bins", a.bins, 50usize)?;
    let log_x = a.log_x || inputs.cfg.value_or("log-x", None, false)?;
    let records = parse_amplitudes_jsonl(&read(&path)?).with_context(|| format!("parsing {}", path.display()))?;
    let n = records.first().map(|r| r.bitstring.len()).unwrap_or(0);
    if let Some(r) = records.iter().find(|r| r.bitstring.len() != n) {
        return Err(CliError::Runtime(anyhow::anyhow!(
            "mixed bitstring lengths {} and {} in {}",
            n,
            r.bitstring.len(),
            path.display()
        )));
    }
    let probs: Vec<f64> = records.iter().map(|r| r.p).collect();
    let est = xeb_estimate(&probs, n)?;
    let hist = histogram_rescaled(&probs, n, bins, log_x)?;
    let big_n = est.n_states;
    let xs: Vec<f64> = probs.iter().map(|p| p * big_n).collect();
    let f = est.f_xeb.clamp(0.0, 1.0);
    let ks = ks_statistic(&xs, |x| porter_thomas_cdf(x, f));
    let doc = json!({
        "f_xeb": est.f_xeb,
        "stderr": est.stderr,
        "k": est.k,
        "n_qubits": est.n_qubits,
        "ks_statistic": ks,
        "ks_critical_1pct": ks_critical_1pct(xs.len()),
        "ks_fidelity": f,
    });
    let json_path = inputs.write("xeb.json", &serde_json::to_string_pretty(&doc)?)?;
    let csv_path = inputs.write("histogram.csv", &hist.to_csv())?;
    println!("F_xeb {:.6} ± {:.6} over {} amplitudes  KS {:.5} (1% critical {:.5})", est.f_xeb, est.stderr, est.k, ks, ks_critical_1pct(xs.len()));
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(())
}

fn scaling(a: ScalingArgs) -> Result<(), CliError> {
    let inputs = Inputs::new(a.common)?;
    let (_, tn) = inputs.circuit()?;
    let n = tn.n_qubits();
    let ks: Vec<u64> = match a.ks {
        Some(ks) => ks,
        None => {
            let k_max = inputs.cfg.value_or("k-max", a.k_max, 1024u64)?;
            (0..64).map(|e| 1u64 << e).take_while(|&k| k <= k_max).collect()
        }
    };
    if ks.is_empty() || ks.contains(&0) {
        return Err(CliError::Usage("k values must be at least 1".into()));
    }
    let k_max = *ks.iter().max().expect("non-empty") as usize;
    let pool = match inputs.bitstrings(n)? {
        Some(list) => {
            let distinct = matnc_core::bitstring::dedup(&list).0;
            if distinct.len() < k_max {
                return Err(CliError::Usage(format!(
                    "k = {k_max} needs {k_max} distinct bitstrings, file has {}",
                    distinct.len()
                )));
            }
            distinct
        }
        None => {
            if n < 64 && (k_max as u128) > (1u128 << n) {
                return Err(CliError::Usage(format!("k = {k_max} exceeds 2^{n} distinct bitstrings")));
            }
            random_distinct_bitstrings(n, k_max, inputs.seed)
        }
    };
    let order = inputs.order(&tn)?;
    let partition = partition_blocks(&order, &tn)?;
    let single = partition.single_cost();
    let mut csv = String::from("k,S_k,kS,ratio\n");
    for &k in &ks {
        let w = layer_widths(&partition, &pool[..k as usize])?;
        let s_k = matnc_core::cost::multi_cost(&partition, &w)?;
        let k_s = single * k as u128;
        let ratio = if k_s == 0 { 1.0 } else { s_k as f64 / k_s as f64 };
        writeln!(csv, "{k},{s_k},{k_s},{}", format_f64(ratio)).expect("writing to a string");
    }
    let path = inputs.write("scaling.csv", &csv)?;
    println!("{} rows, single cost {single}", ks.len());
    println!("wrote {}", path.display());
    Ok(())
}
