use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};
use ofdm_papr::config::CONFIG_KEYS;
use ofdm_papr::fir::FilterPreset;
use ofdm_papr::harness::{
    curve_tag, reproduce_tables, selftest, write_ber_file, write_ccdf_file, write_filter_files, Harness,
};
use ofdm_papr::SimulationConfig;

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<ofdm_papr::Error> for Failure {
    fn from(e: ofdm_papr::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

fn cli() -> Command {
    let mut overrides: Vec<Arg> = Vec::new();
    for &key in CONFIG_KEYS {
        let mut arg = Arg::new(key)
            .long(flag_name(key))
            .value_name("VALUE")
            .global(true)
            .help_heading("Config overrides")
            .help(format!("overrides `{key}`"));
        if key.contains('_') {
            arg = arg.alias(key);
        }
        arg = match key {
            "master_seed" => arg.alias("seed"),
            "num_blocks" => arg.alias("blocks"),
            _ => arg,
        };
        overrides.push(arg);
    }
    Command::new("papr-sim")
        .about("OFDM clipping-and-filtering PAPR simulator")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .global(true)
                .help("key = value config file applied before overrides"),
        )
        .arg(
            Arg::new("out")
                .long("out")
                .value_name("DIR")
                .global(true)
                .default_value("results")
                .help("output directory"),
        )
        .args(overrides)
        .subcommand(
            Command::new("ccdf").about("PAPR CCDF per clipping ratio").arg(
                Arg::new("cr")
                    .long("cr")
                    .value_name("RATIO")
                    .action(ArgAction::Append)
                    .value_parser(clap::value_parser!(f64))
                    .help("clipping ratio; repeatable, defaults to clipping_ratios"),
            ),
        )
        .subcommand(
            Command::new("ber").about("BER over the SNR grid per clipping ratio").arg(
                Arg::new("cr")
                    .long("cr")
                    .value_name("RATIO")
                    .action(ArgAction::Append)
                    .value_parser(clap::value_parser!(f64))
                    .help("clipping ratio; repeatable, defaults to clipping_ratios"),
            ),
        )
        .subcommand(
            Command::new("design-filter").about("Design a preset filter and write taps and response").arg(
                Arg::new("preset")
                    .long("preset")
                    .value_name("NAME")
                    .required(true)
                    .help("existing_bpf, proposed_hpf or receiver_lpf"),
            ),
        )
        .subcommand(Command::new("reproduce").about("All tables, curves and filters"))
        .subcommand(Command::new("selftest").about("Quick end-to-end sanity checks"))
}

fn load_config(m: &ArgMatches) -> Result<SimulationConfig, Failure> {
    let mut cfg = SimulationConfig::default();
    if let Some(path) = m.get_one::<String>("config") {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read config {path}: {e}")))?;
        cfg.apply_text(&text).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
    }
    for &key in CONFIG_KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(key, v).map_err(|e| Failure::Usage(e.to_string()))?;
        }
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn ratios(sub: &ArgMatches, cfg: &SimulationConfig) -> Vec<f64> {
    match sub.get_many::<f64>("cr") {
        Some(v) => v.copied().collect(),
        None if cfg.scheme == ofdm_papr::Scheme::None => vec![1.0],
        None => cfg.clipping_ratios.clone(),
    }
}

fn run(m: &ArgMatches) -> Result<(), Failure> {
    let (name, sub) = m.subcommand().expect("subcommand required");
    let cfg = load_config(m)?;
    let out = PathBuf::from(m.get_one::<String>("out").expect("has default"));
    match name {
        "ccdf" => {
            let h = Harness::new(&cfg)?;
            for cr in ratios(sub, &cfg) {
                let curve = h.ccdf(cfg.scheme, cfg.modulation, cr)?;
                let path = write_ccdf_file(&out, &cfg, &curve_tag(cfg.scheme, cfg.modulation, cr), &curve)?;
                let p = curve.papr_at(0.1).map(|v| format!("{v:.3} dB")).unwrap_or_else(|e| e.to_string());
                println!("{} cr {cr}: PAPR at 1e-1 {p} -> {}", cfg.scheme, path.display());
            }
        }
        "ber" => {
            let h = Harness::new(&cfg)?;
            for cr in ratios(sub, &cfg) {
                let curve = h.ber(cfg.scheme, cfg.modulation, cr)?;
                let path = write_ber_file(&out, &cfg, &curve_tag(cfg.scheme, cfg.modulation, cr), &curve)?;
                println!("{} cr {cr} -> {}", cfg.scheme, path.display());
                for p in &curve.points {
                    println!("  snr {:>5} dB  ber {:.6}  ({} errors / {} bits)", p.snr_db, p.ber, p.errors, p.bits);
                }
            }
        }
        "design-filter" => {
            let preset: FilterPreset = sub
                .get_one::<String>("preset")
                .expect("required")
                .parse()
                .map_err(|e: ofdm_papr::Error| Failure::Usage(e.to_string()))?;
            let (filter, files) = write_filter_files(&cfg, preset, &out)?;
            println!("{}: {} taps, ripple {:.6e}", preset.name(), filter.taps().len(), filter.achieved_ripple());
            print_files(&files);
        }
        "reproduce" => {
            let rep = reproduce_tables(&cfg, &out)?;
            for (m, p) in &rep.unclipped_papr {
                println!("{m} unclipped PAPR at 1e-1: {p:.3} dB");
            }
            for ((m, papr), (_, ber)) in rep.papr_tables.iter().zip(&rep.ber_tables) {
                println!("{m}: cr, PAPR existing/proposed (dB), BER at {} dB existing/proposed", cfg.table_snr_db);
                for (a, b) in papr.iter().zip(ber) {
                    println!(
                        "  {:.1}  {:.3} / {:.3}  {:.5} / {:.5}",
                        a.cr, a.existing, a.proposed, b.existing, b.proposed
                    );
                }
            }
            println!("{} files in {}", rep.files.len(), out.display());
        }
        "selftest" => {
            let mut ok = true;
            for (name, passed, detail) in selftest() {
                println!("{} {name}: {detail}", if passed { "ok  " } else { "FAIL" });
                ok &= passed;
            }
            if !ok {
                return Err(Failure::Runtime("selftest failed".into()));
            }
        }
        _ => unreachable!("unknown subcommand"),
    }
    Ok(())
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("  {}", Path::new(f).display());
    }
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
