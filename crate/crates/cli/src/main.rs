//! `bondscope` command-line interface.

mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use bondscope::crystals::{bond_switch, crystal_configuration, generate_cristobalite, CrystalForm};
use bondscope::descriptors::h1_barcode;
use bondscope::ingest::{
    build_bond_network, network_from_json, network_to_json, parse_configuration, parse_species_map, write_xyz,
    BondRule, InputFormat,
};
use bondscope::network::Extractor;
use bondscope::stats::{
    classify_joint, classify_roots, ranked_diff_table, scaled_entropy, select_roots, uncertainty_coefficient,
    EmpiricalDistribution, SortMode,
};
use bondscope::{BondNetwork, DescriptorConfig, DescriptorTag};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bondscope", version, about = "Topological descriptors of atomic environments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify environments and write their empirical distribution as JSON.
    Classify(ClassifyArgs),
    /// Compare two distribution files as a ranked CSV table.
    Compare(CompareArgs),
    /// Uncertainty coefficients between two descriptors on the same roots.
    MutualInfo(MutualInfoArgs),
    /// H1 barcode of one environment, as text and optionally SVG.
    Barcode(BarcodeArgs),
    /// Time the profile descriptors on a synthetic or given network.
    Bench(BenchArgs),
    /// Write a silica crystal supercell as extended XYZ.
    Crystal(CrystalArgs),
    /// Write the bond network of an input as edge-list JSON.
    ExportNetwork(ExportArgs),
}

#[derive(Args)]
struct InputArgs {
    /// XYZ, LAMMPS dump, or bond-network JSON file.
    input: PathBuf,
    /// Bonding cutoffs, e.g. `Si-O:2.2,Ge-O:2.4`.
    #[arg(long, default_value = "Si-O:2.2")]
    bonds: String,
    /// Atom type to species mapping for dump files, e.g. `1=Si,2=O`.
    #[arg(long)]
    species_map: Option<String>,
}

#[derive(Args)]
struct Threads {
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "BONDSCOPE_THREADS")]
    threads: Option<usize>,
}

impl Threads {
    fn get(&self) -> usize {
        self.threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    descriptor: DescriptorTag,
    #[arg(long)]
    radius: u32,
    /// Only atoms of this species are used as roots.
    #[arg(long)]
    root_species: Option<String>,
    /// Append species labels to coordination profiles.
    #[arg(long)]
    coordination_species: bool,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    threads: Threads,
}

#[derive(Args)]
struct CompareArgs {
    first: PathBuf,
    second: PathBuf,
    #[arg(long, default_value = "f1")]
    sort: SortMode,
    #[arg(long, default_value_t = 20)]
    top: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MutualInfoArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    x: DescriptorTag,
    #[arg(long)]
    y: DescriptorTag,
    #[arg(long)]
    radius_x: u32,
    #[arg(long)]
    radius_y: u32,
    #[arg(long)]
    root_species: Option<String>,
    #[command(flatten)]
    threads: Threads,
}

#[derive(Args)]
struct BarcodeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    root: u32,
    #[arg(long)]
    radius: u32,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Network to time; defaults to a bond-switched cristobalite supercell.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "Si-O:2.2")]
    bonds: String,
    #[arg(long)]
    species_map: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    roots: usize,
    #[arg(long, default_value_t = 6)]
    radius: u32,
    #[arg(long, default_value = "Si")]
    root_species: String,
    #[arg(long, value_delimiter = ',', default_value = "coordination,h1-barcode,primitive-rings")]
    descriptors: Vec<DescriptorTag>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct CrystalArgs {
    #[arg(long)]
    form: CrystalForm,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: PathBuf,
}

/// Writes `contents` to a temporary file next to `path`, then renames it
/// into place.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn load_network(path: &Path, bonds: &str, species_map: Option<&str>) -> Result<BondNetwork> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if InputFormat::detect(&text) == InputFormat::NetworkJson {
        return network_from_json(&text).with_context(|| format!("parsing {}", path.display()));
    }
    let map = species_map.map(parse_species_map).transpose()?;
    let cfg = parse_configuration(&text, map.as_ref()).with_context(|| format!("parsing {}", path.display()))?;
    Ok(build_bond_network(&cfg, &BondRule::parse(bonds)?)?)
}

fn load(input: &InputArgs) -> Result<BondNetwork> {
    load_network(&input.input, &input.bonds, input.species_map.as_deref())
}

fn roots_of(net: &BondNetwork, species: Option<&str>) -> Result<Vec<u32>> {
    let roots = select_roots(net, |s| species.is_none_or(|r| r == s));
    if roots.is_empty() {
        bail!("no atoms of species {} to use as roots", species.unwrap_or("any"));
    }
    Ok(roots)
}

fn classify(args: ClassifyArgs) -> Result<()> {
    let start = Instant::now();
    let net = load(&args.input)?;
    let roots = roots_of(&net, args.root_species.as_deref())?;
    let cfg = DescriptorConfig {
        coordination_species: args.coordination_species,
        ..DescriptorConfig::default()
    };
    let mut dist = classify_roots(&net, &roots, args.descriptor, args.radius, &cfg, args.threads.get())?;
    let truncated = count_truncated(&net, &roots, args.radius)?;
    if truncated > 0 {
        eprintln!("warning: {truncated} environments reach an open boundary and are truncated");
    }
    let name = args.input.input.file_name().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    dist.set_source(name);
    write_atomic(&args.out, dist.to_json()?.as_bytes())?;
    println!("roots: {}", dist.total());
    println!("classes: {}", dist.len());
    println!("scaled entropy: {:.6}", scaled_entropy(&dist));
    println!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    Ok(())
}

fn count_truncated(net: &BondNetwork, roots: &[u32], radius: u32) -> Result<usize> {
    if !(0..net.len() as u32).any(|a| net.is_boundary_atom(a)) {
        return Ok(0);
    }
    let mut ex = Extractor::new(net);
    let mut n = 0;
    for &root in roots {
        n += ex.extract(root, radius)?.is_truncated() as usize;
    }
    Ok(n)
}

fn read_distribution(path: &Path) -> Result<EmpiricalDistribution> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    EmpiricalDistribution::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn compare(args: CompareArgs) -> Result<()> {
    let p = read_distribution(&args.first)?;
    let q = read_distribution(&args.second)?;
    let report = ranked_diff_table(&p, &q, args.sort, args.top)?;
    write_atomic(&args.out, report.to_csv()?.as_bytes())?;
    println!("symmetrized KL: {:.6}", report.divergence);
    if !p.counts().keys().any(|k| q.count(k) > 0) {
        println!("note: the supports are disjoint; zero-probability terms are dropped, so the divergence is 0");
    }
    Ok(())
}

fn mutual_info(args: MutualInfoArgs) -> Result<()> {
    let net = load(&args.input)?;
    let roots = roots_of(&net, args.root_species.as_deref())?;
    let x = (args.x, args.radius_x);
    let y = (args.y, args.radius_y);
    let joint = classify_joint(&net, &roots, x, y, &DescriptorConfig::default(), args.threads.get())?;
    let swapped = classify_joint(&net, &roots, y, x, &DescriptorConfig::default(), args.threads.get())?;
    let show = |r: bondscope::Result<f64>| r.map_or_else(|e| format!("undefined ({e})"), |u| format!("{u:.6}"));
    println!("U({}_{} | {}_{}) = {}", x.0, x.1, y.0, y.1, show(uncertainty_coefficient(&joint)));
    println!("U({}_{} | {}_{}) = {}", y.0, y.1, x.0, x.1, show(uncertainty_coefficient(&swapped)));
    Ok(())
}

fn barcode(args: BarcodeArgs) -> Result<()> {
    let net = load(&args.input)?;
    let env = Extractor::new(&net).extract(args.root, args.radius)?;
    let bc = h1_barcode(&env)?;
    println!("{bc}");
    if let Some(path) = &args.svg {
        let title = format!("H1 barcode, root {}, r = {}", args.root, args.radius);
        write_atomic(path, svg::barcode_svg(&bc, args.radius, &title).as_bytes())?;
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let net = match &args.input {
        Some(path) => load_network(path, &args.bonds, args.species_map.as_deref())?,
        None => {
            let n = (1..).find(|n| 8 * n * n * n >= args.roots).unwrap_or(1).max(3);
            let crystal = generate_cristobalite(n)?;
            bond_switch(&crystal, crystal.len() / 60, 1)?
        }
    };
    let roots: Vec<u32> = roots_of(&net, Some(&args.root_species))?.into_iter().take(args.roots).collect();
    println!("roots: {}, radius: {}, threads: {}", roots.len(), args.radius, args.threads);
    for tag in &args.descriptors {
        let start = Instant::now();
        let dist = classify_roots(&net, &roots, *tag, args.radius, &DescriptorConfig::default(), args.threads)?;
        println!("{tag}: {:.3} s, {} classes", start.elapsed().as_secs_f64(), dist.len());
    }
    Ok(())
}

fn crystal(args: CrystalArgs) -> Result<()> {
    let cfg = crystal_configuration(args.form, args.n)?;
    write_atomic(&args.out, write_xyz(&cfg).as_bytes())?;
    println!("{} atoms", cfg.len());
    Ok(())
}

fn export_network(args: ExportArgs) -> Result<()> {
    let net = load(&args.input)?;
    write_atomic(&args.out, network_to_json(&net)?.as_bytes())?;
    println!("{} atoms, {} bonds", net.len(), net.num_bonds());
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classify(a) => classify(a),
        Command::Compare(a) => compare(a),
        Command::MutualInfo(a) => mutual_info(a),
        Command::Barcode(a) => barcode(a),
        Command::Bench(a) => bench(a),
        Command::Crystal(a) => crystal(a),
        Command::ExportNetwork(a) => export_network(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
