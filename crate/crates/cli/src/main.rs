mod cache;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use lat40::aut;
use lat40::construction;
use lat40::enumeration::{self, VectorSet};
use lat40::fixtures::Fixtures;
use lat40::frames::{self, OrthoGraph, TieBreak};
use lat40::glue;
use lat40::linalg::{self, IntMatrix};
use lat40::qr::{self, SearchOptions};
use lat40::symmetry::{self, SymmetryGroup};
use lat40::typing::{self, InnerProducts, Partition, TypeSig};
use lat40::verify;
use lat40::{AmbientFrame, Lattice};

use cache::{Cache, Source};

#[derive(Parser)]
#[command(name = "lat40", version, about = "Exact verification pipeline for the 40-dimensional lattice O40")]
struct Cli {
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Construct O40 from the codes and write its lattice file.
    Build {
        /// Directory holding the fixture matrices and SHA256SUMS.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Enumerate the vectors of a given norm, up to sign.
    Minvec {
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long, default_value_t = 4)]
        norm: u64,
        /// Also copy the vector file here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Split a norm-4 vector set by type and refine to irreducible blocks.
    Types {
        #[arg(long)]
        vecs: PathBuf,
        /// Needed when the vector file is not in the O40 frame.
        #[arg(long)]
        lattice: Option<PathBuf>,
        /// Directory for level1.csv and irreducible.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Greedy orthogonal sets per orbit representative and the frame search.
    Frames {
        #[arg(long)]
        vecs: PathBuf,
        #[arg(long)]
        lattice: Option<PathBuf>,
        /// Node cap for each exhaustive frame search.
        #[arg(long, default_value_t = 1_000)]
        node_cap: u64,
        /// Distinct pools explored per representative when resolving ties.
        #[arg(long, default_value_t = 2_000_000)]
        tie_budget: usize,
        /// Search for frames from representatives whose greedy length reaches this;
        /// 0 searches from every representative.
        #[arg(long, default_value_t = 28)]
        certify_from: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Automorphism group and its semidirect structure.
    Aut {
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long)]
        vecs: PathBuf,
        #[arg(long, default_value_t = 36)]
        order1: usize,
        #[arg(long, default_value_t = 19)]
        order2: usize,
        #[arg(long, default_value_t = 3)]
        exponent: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Find M = A1(2)^2 + A19(2)^2 among the norm-4 vectors and check L + M = O40.
    Glue {
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long)]
        vecs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run every claim in order and report.
    VerifyAll {
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000)]
        node_cap: u64,
        #[arg(long, default_value_t = 2_000_000)]
        tie_budget: usize,
        /// Report destination; the JSON report is written here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Search glue parameters: six residues mod 3, then six mod 21.
    Search {
        /// Six comma-separated entries, each `*` or `a|b|...`.
        #[arg(long, default_value = "*,*,*,*,*,*")]
        region3: String,
        #[arg(long, default_value = "*,*,*,*,*,*")]
        region21: String,
        /// Keep only pairs whose glued lattice has at least this minimum.
        #[arg(long)]
        min_norm: Option<u64>,
        #[arg(long)]
        cap: Option<usize>,
        /// Keep one pair per orbit of the unit scaling action.
        #[arg(long)]
        unit_reduction: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

/// Failure classes and their exit codes.
#[derive(Debug)]
enum Failure {
    Claim(String),
    Input(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Claim(_) => 1,
            Failure::Input(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl From<lat40::Error> for Failure {
    fn from(e: lat40::Error) -> Self {
        use lat40::Error as E;
        match e {
            E::Parse(_) | E::FrameMismatch(_) | E::Io(_) | E::FixtureChecksum(_) | E::Dimension(_) | E::InvalidArgument(_) => {
                Failure::Input(e.to_string())
            }
            E::ConstructionMismatch | E::GlueCondition { .. } | E::SearchFailed(_) | E::StructureMismatch(_) => {
                Failure::Claim(e.to_string())
            }
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Claim(m) | Failure::Input(m) | Failure::Internal(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Build { fixtures, out, format } => cmd_build(fixtures.as_deref(), out.as_deref(), format),
        Command::Minvec { lattice, norm, out, format } => cmd_minvec(&lattice, norm, out.as_deref(), format),
        Command::Types { vecs, lattice, out, format } => cmd_types(&vecs, lattice.as_deref(), out.as_deref(), format),
        Command::Frames { vecs, lattice, node_cap, tie_budget, certify_from, out, format } => {
            cmd_frames(&vecs, lattice.as_deref(), node_cap, tie_budget, certify_from, out.as_deref(), format)
        }
        Command::Aut { lattice, vecs, order1, order2, exponent, out, format } => {
            cmd_aut(&lattice, &vecs, (order1, order2, exponent), out.as_deref(), format)
        }
        Command::Glue { lattice, vecs, out, format } => cmd_glue(&lattice, &vecs, out.as_deref(), format),
        Command::VerifyAll { fixtures, node_cap, tie_budget, out, format } => {
            cmd_verify_all(fixtures.as_deref(), node_cap, tie_budget, out.as_deref(), format)
        }
        Command::Search { region3, region21, min_norm, cap, unit_reduction, out, format } => {
            cmd_search(&region3, &region21, min_norm, cap, unit_reduction, out.as_deref(), format)
        }
    }
}

// ---------------------------------------------------------------------------
// Input and output helpers
// ---------------------------------------------------------------------------

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => Ok(cache::write_file(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn read_lattice(path: &Path) -> CliResult<(Lattice, String)> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok((Lattice::from_file_string(&text)?, text))
}

/// Loads a vector file; the frame comes from `lattice` when given and must
/// otherwise be the O40 frame.
fn read_vecs(path: &Path, lattice: Option<&Lattice>) -> CliResult<VectorSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let frame = match lattice {
        Some(l) => l.frame().clone(),
        None => construction::o40_frame(),
    };
    Ok(VectorSet::from_cache_string(&text, frame)?.folded())
}

fn read_optional_lattice(path: Option<&Path>) -> CliResult<Option<Lattice>> {
    path.map(|p| read_lattice(p).map(|(l, _)| l)).transpose()
}

fn matrix_rows(m: &IntMatrix) -> CliResult<Vec<Vec<i64>>> {
    let flat = m.to_i64().ok_or_else(|| Failure::Internal("matrix entry exceeds 64 bits".into()))?;
    Ok(flat.chunks(m.cols().max(1)).map(<[i64]>::to_vec).collect())
}

fn csv_line(values: impl IntoIterator<Item = impl ToString>) -> String {
    let v: Vec<String> = values.into_iter().map(|x| x.to_string()).collect();
    v.join(",")
}

/// Norm-`norm` vectors of the lattice in `text`, up to sign, through the cache.
fn cached_vectors(lat: &Lattice, lattice_text: &str, norm: u64) -> CliResult<(VectorSet, Source, PathBuf)> {
    let cache = Cache::from_env();
    let key = Cache::key(lattice_text, &format!("minvec norm={norm}"));
    let frame = lat.frame().clone();
    let target = BigRational::from_integer(norm.into());
    let (set, source) = cache.load_or_build(
        "minvec",
        &key,
        |text| VectorSet::from_cache_string(text, frame.clone()),
        || {
            let set = enumeration::vectors_of_norm_at_most_folded(lat, norm)?.with_norm(&target);
            let text = set.to_cache_string();
            Ok((set, text))
        },
    )?;
    Ok((set, source, cache.entry_path("minvec", &key)))
}

/// `Γ` in the O40 frame, `{±I}` elsewhere.
fn symmetry_for(frame: &AmbientFrame) -> CliResult<SymmetryGroup> {
    if *frame == AmbientFrame::o40() {
        Ok(symmetry::gamma_group()?)
    } else {
        Ok(SymmetryGroup::generate(&[IntMatrix::scalar(frame.dim(), -1)], 2)?)
    }
}

fn typed(set: &VectorSet) -> CliResult<(InnerProducts, Partition, Partition)> {
    let ips = InnerProducts::compute(set)?;
    let level1 = typing::partition_by_type(&ips)?;
    let (stable, _) = typing::refine_to_irreducible(&ips, &level1)?;
    Ok((ips, level1, stable))
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_build(fixtures: Option<&Path>, out: Option<&Path>, format: Format) -> CliResult<()> {
    let fx = match fixtures {
        Some(d) => Fixtures::load_from_dir(d)?,
        None => Fixtures::embedded()?,
    };
    let lat = construction::build_O40_with(&fx)?;
    let text = match format {
        Format::Text => lat.to_file_string(),
        Format::Csv => lat.basis().iter_rows().map(|r| csv_line(r) + "\n").collect(),
        Format::Json => json_text(&json!({
            "schema_version": verify::SCHEMA_VERSION,
            "frame": lat.frame().id(),
            "rank": lat.rank(),
            "even": lat.is_even(),
            "unimodular": lat.is_unimodular(),
            "basis": matrix_rows(lat.basis())?,
        })),
    };
    emit(out, &text)
}

fn cmd_minvec(lattice: &Path, norm: u64, out: Option<&Path>, format: Format) -> CliResult<()> {
    let (lat, text) = read_lattice(lattice)?;
    let (set, source, path) = cached_vectors(&lat, &text, norm)?;
    if let Some(p) = out {
        cache::write_file(p, &set.to_cache_string())?;
    }
    let hit = source == Source::Hit;
    let report = match format {
        Format::Json => json_text(&json!({
            "schema_version": verify::SCHEMA_VERSION,
            "norm": norm,
            "count": set.signed_len(),
            "stored_up_to_sign": set.len(),
            "cache_file": path.display().to_string(),
            "cache_hit": hit,
        })),
        Format::Csv => format!("norm,count,stored_up_to_sign,cache_hit\n{norm},{},{},{hit}\n", set.signed_len(), set.len()),
        Format::Text => format!(
            "norm={norm} count={} stored_up_to_sign={} cache_hit={hit}\ncache_file={}\n",
            set.signed_len(),
            set.len(),
            path.display()
        ),
    };
    print!("{report}");
    Ok(())
}

fn type_rows(p: &Partition, types: &[TypeSig]) -> Vec<(String, [u32; 4], usize)> {
    p.blocks.iter().zip(types).map(|(b, t)| (b.label_string(), t.as_array(), b.size())).collect()
}

fn rows_csv(rows: &[(String, [u32; 4], usize)]) -> String {
    let mut s = String::from("label,t0,t1,t2,t4,size\n");
    for (label, t, size) in rows {
        let _ = writeln!(s, "\"{label}\",{},{},{},{},{size}", t[0], t[1], t[2], t[3]);
    }
    s
}

fn rows_text(rows: &[(String, [u32; 4], usize)]) -> String {
    let mut s = format!("{:<8}{:>8}{:>8}{:>6}{:>4}{:>7}\n", "block", "t0", "t1", "t2", "t4", "size");
    for (label, t, size) in rows {
        let _ = writeln!(s, "{label:<8}{:>8}{:>8}{:>6}{:>4}{size:>7}", t[0], t[1], t[2], t[3]);
    }
    s
}

fn rows_json(rows: &[(String, [u32; 4], usize)]) -> Value {
    rows.iter()
        .map(|(label, t, size)| json!({"label": label, "t0": t[0], "t1": t[1], "t2": t[2], "t4": t[3], "size": size}))
        .collect()
}

fn cmd_types(vecs: &Path, lattice: Option<&Path>, out: Option<&Path>, format: Format) -> CliResult<()> {
    let lat = read_optional_lattice(lattice)?;
    let set = read_vecs(vecs, lat.as_ref())?;
    let (ips, level1, stable) = typed(&set)?;
    let split: Vec<TypeSig> = level1.blocks.iter().map(|b| b.split_type).collect();
    let l1 = type_rows(&level1, &split);
    let irr = type_rows(&stable, &stable.local_types(&ips)?);
    let frame_signature = typing::frame_signature_present(&ips, &stable)?;
    match (format, out) {
        (Format::Json, _) => emit(
            out,
            &json_text(&json!({
                "schema_version": verify::SCHEMA_VERSION,
                "level1": rows_json(&l1),
                "irreducible": rows_json(&irr),
                "frame_signature": frame_signature,
            })),
        ),
        (Format::Csv, Some(dir)) => {
            cache::write_file(&dir.join("level1.csv"), &rows_csv(&l1))?;
            cache::write_file(&dir.join("irreducible.csv"), &rows_csv(&irr))?;
            Ok(())
        }
        (Format::Csv, None) => emit(None, &format!("{}\n{}", rows_csv(&l1), rows_csv(&irr))),
        (Format::Text, _) => emit(
            out,
            &format!(
                "{} blocks\n{}\n{} irreducible blocks\n{}\nframe_signature={frame_signature}\n",
                l1.len(),
                rows_text(&l1),
                irr.len(),
                rows_text(&irr)
            ),
        ),
    }
}

fn cmd_frames(
    vecs: &Path,
    lattice: Option<&Path>,
    node_cap: u64,
    tie_budget: usize,
    certify_from: usize,
    out: Option<&Path>,
    format: Format,
) -> CliResult<()> {
    let lat = read_optional_lattice(lattice)?;
    let set = read_vecs(vecs, lat.as_ref())?;
    let group = symmetry_for(set.frame())?;
    let ips = InnerProducts::compute(&set)?;
    let orbits = symmetry::orbits(&set, &group)?;
    let g = OrthoGraph::new(&ips);
    let (rows, table) = frames::orthogonal_table(&g, &orbits, &TieBreak::SmallestIndex);
    let outcomes = frames::outcome_table(&g, &orbits, tie_budget)?;
    let n_max = outcomes.iter().filter_map(|o| o.last().copied()).max().unwrap_or(0);
    let selected: Vec<&symmetry::Orbit> = orbits
        .iter()
        .zip(&outcomes)
        .filter(|(_, o)| o.last().is_some_and(|&m| m >= certify_from))
        .map(|(orbit, _)| orbit)
        .collect();
    let cert = frames::certify_frames(&g, &ips, &selected, orbits.len(), set.dim(), 4, node_cap);
    let verdict = match cert.verdict() {
        Some(true) => "true",
        Some(false) => "false",
        None => "undetermined",
    };
    let complete = cert.searches.iter().filter(|s| s.complete).count();
    let text = match format {
        Format::Csv => {
            let mut s = String::from("m,count\n");
            for (m, c) in &table {
                let _ = writeln!(s, "{m},{c}");
            }
            let _ = writeln!(s, "n_max={n_max} frame={verdict}");
            s
        }
        Format::Text => {
            let mut s = format!("{} orbit representatives\n", orbits.len());
            for (i, (r, reach)) in rows.iter().zip(&outcomes).enumerate() {
                let reach: Vec<String> = reach.iter().map(ToString::to_string).collect();
                let _ = writeln!(s, "rep {i:>3}: orbit size {:>4}  m = {:>2}  reachable {{{}}}", orbits[i].size, r.m, reach.join(","));
            }
            let _ = writeln!(s, "frame searches complete {complete}/{} ({} nodes)", selected.len(), cert.nodes());
            let _ = writeln!(s, "n_max={n_max} frame={verdict}");
            s
        }
        Format::Json => json_text(&json!({
            "schema_version": verify::SCHEMA_VERSION,
            "representatives": rows.iter().zip(&outcomes).zip(&orbits).map(|((r, reach), o)| json!({
                "vector": r.representative,
                "orbit_size": o.size,
                "m": r.m,
                "reachable": reach,
            })).collect::<Vec<_>>(),
            "table": table.iter().map(|(m, c)| (m.to_string(), *c)).collect::<BTreeMap<_, _>>(),
            "n_max": n_max,
            "frame_searches": selected.len(),
            "frame_searches_complete": complete,
            "frame_search_nodes": cert.nodes(),
            "frame": verdict,
            "frame_vectors": cert.frame.as_ref().map(|f| f.iter().map(|&i| set.vectors()[i].clone()).collect::<Vec<_>>()),
        })),
    };
    emit(out, &text)
}

fn cmd_aut(lattice: &Path, vecs: &Path, orders: (usize, usize, usize), out: Option<&Path>, format: Format) -> CliResult<()> {
    let (lat, _) = read_lattice(lattice)?;
    let set = read_vecs(vecs, Some(&lat))?;
    let (ips, _, stable) = typed(&set)?;
    let gamma = symmetry_for(lat.frame())?;
    let comp = aut::full_aut(&lat, &set, &ips, &stable, &gamma)?;
    let rep = aut::verify_semidirect(&comp.group, orders.0, orders.1, orders.2)?;
    let ok = rep.normal && rep.trivial_intersection && rep.product_is_group;
    let census: Vec<String> = rep.order_census.iter().map(|(o, c)| format!("{o}:{c}")).collect();
    let text = match format {
        Format::Text => format!(
            "order={}\nisometry_solutions={}\nanchor_position={}\ng1_order={}\ng2_order={}\nrelation=g1*g2*g1^-1=g2^{}\nnormal={}\ntrivial_intersection={}\nproduct_is_group={}\norder_census={}\n",
            comp.group.order(),
            comp.solutions.len(),
            comp.anchor_position,
            rep.order_g1,
            rep.order_g2,
            rep.exponent,
            rep.normal,
            rep.trivial_intersection,
            rep.product_is_group,
            census.join(",")
        ),
        Format::Csv => {
            let mut s = String::from("element_order,count\n");
            for (o, c) in &rep.order_census {
                let _ = writeln!(s, "{o},{c}");
            }
            s
        }
        Format::Json => json_text(&json!({
            "schema_version": verify::SCHEMA_VERSION,
            "order": comp.group.order(),
            "isometry_solutions": comp.solutions.len(),
            "anchor_position": comp.anchor_position,
            "basis": comp.selection.vectors,
            "g1": matrix_rows(&rep.g1)?,
            "g2": matrix_rows(&rep.g2)?,
            "g1_order": rep.order_g1,
            "g2_order": rep.order_g2,
            "exponent": rep.exponent,
            "normal": rep.normal,
            "trivial_intersection": rep.trivial_intersection,
            "product_is_group": rep.product_is_group,
            "order_census": rep.order_census.iter().map(|(o, c)| (o.to_string(), *c)).collect::<BTreeMap<_, _>>(),
        })),
    };
    emit(out, &text)?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Claim("semidirect structure check failed".into()))
    }
}

/// Names the orthogonal summands of a block-diagonal Gram of scaled `A`-type blocks.
fn block_structure(gram: &IntMatrix) -> String {
    let n = gram.rows();
    let mut parts = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (end..n).any(|j| (start..end).any(|i| gram[(i, j)] != 0.into())) {
            end += 1;
        }
        let scale = &gram[(start, start)] / 2;
        parts.push(format!("A{}({scale})", end - start));
        start = end;
    }
    parts.join("+")
}

fn cmd_glue(lattice: &Path, vecs: &Path, out: Option<&Path>, format: Format) -> CliResult<()> {
    let (lat, _) = read_lattice(lattice)?;
    let set = read_vecs(vecs, Some(&lat))?;
    let (ips, _, stable) = typed(&set)?;
    let m = glue::find_sublattice_m(&lat, &set, &ips, &stable)?;
    let l = construction::build_L();
    let sum = glue::verify_glue_sum(&l, &m.lattice, &lat)?;
    let index = glue::index_in(&m.lattice, &lat)?;
    let structure = block_structure(&m.gram);
    let chosen: Vec<Vec<i64>> = m.chosen.clone();
    let det = linalg::det(&m.gram)?;
    let text = match format {
        Format::Text => {
            let mut s = format!("pair_block={}\nchain_block={}\nvectors:\n", glue::PAIR_BLOCK, m.chain_block);
            for v in &chosen {
                let _ = writeln!(s, "{}", v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
            }
            let _ = write!(s, "gram_blocks={structure}\ndet_gram={det}\nindex={index}\nglue_sum={sum}\n");
            s
        }
        Format::Csv => chosen.iter().map(|v| csv_line(v) + "\n").collect(),
        Format::Json => json_text(&json!({
            "schema_version": verify::SCHEMA_VERSION,
            "pair_block": glue::PAIR_BLOCK,
            "chain_block": m.chain_block,
            "vectors": chosen,
            "gram_blocks": structure,
            "det_gram": det.to_string(),
            "index": index.to_string(),
            "glue_sum": sum,
        })),
    };
    emit(out, &text)?;
    if sum {
        Ok(())
    } else {
        Err(Failure::Claim("L + M differs from the lattice".into()))
    }
}

fn cmd_verify_all(fixtures: Option<&Path>, node_cap: u64, tie_budget: usize, out: Option<&Path>, format: Format) -> CliResult<()> {
    let start = Instant::now();
    let fx = match fixtures {
        Some(d) => Fixtures::load_from_dir(d),
        None => Fixtures::embedded(),
    };
    let opts = verify::Options { tie_budget, frame_node_cap: node_cap, ..Default::default() };
    let mut load = |lat: &Lattice| {
        cached_vectors(lat, &lat.to_file_string(), 4).map(|(s, _, _)| s).map_err(|f| match f {
            Failure::Claim(m) => lat40::Error::SearchFailed(m),
            Failure::Input(m) | Failure::Internal(m) => lat40::Error::InvalidArgument(m),
        })
    };
    let text_mode = format == Format::Text;
    let report = verify::run(fx, &opts, &mut load, &mut |c| {
        if text_mode {
            println!("{:<7} {:>2} {:<20} {:>8} ms  {}", c.status.to_string(), c.id, c.name, c.wall_ms, c.computed);
        }
    });
    let value = serde_json::to_value(&report).map_err(|e| Failure::Internal(e.to_string()))?;
    match format {
        Format::Json => emit(out, &json_text(&value))?,
        Format::Csv => {
            let mut s = String::from("id,name,status,wall_ms\n");
            for c in &report.claims {
                let _ = writeln!(s, "{},{},{},{}", c.id, c.name, c.status, c.wall_ms);
            }
            emit(out, &s)?;
        }
        Format::Text => {
            if let Some(p) = out {
                cache::write_file(p, &json_text(&value))?;
            }
            let passed = report.claims.iter().filter(|c| c.status == verify::Status::Pass).count();
            println!("{passed}/{} claims passed in {:.1} s", report.claims.len(), start.elapsed().as_secs_f64());
        }
    }
    if report.all_passed() {
        Ok(())
    } else {
        let bad: Vec<String> =
            report.claims.iter().filter(|c| c.status != verify::Status::Pass).map(|c| format!("{} ({})", c.id, c.status)).collect();
        Err(Failure::Claim(format!("claims not passed: {}", bad.join(", "))))
    }
}

/// Parses `*,0|1,2,...` into six residue lists modulo `modulus`.
fn parse_region(spec: &str, modulus: u64) -> CliResult<[Vec<u64>; 6]> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(Failure::Input(format!("region `{spec}` needs six entries")));
    }
    let mut out: [Vec<u64>; 6] = Default::default();
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = if p == "*" {
            (0..modulus).collect()
        } else {
            let mut v = p
                .split('|')
                .map(|x| {
                    x.trim()
                        .parse::<i64>()
                        .map(|r| r.rem_euclid(modulus as i64) as u64)
                        .map_err(|_| Failure::Input(format!("bad residue `{x}` in region `{spec}`")))
                })
                .collect::<CliResult<Vec<u64>>>()?;
            v.sort_unstable();
            v.dedup();
            v
        };
    }
    Ok(out)
}

fn cmd_search(
    region3: &str,
    region21: &str,
    min_norm: Option<u64>,
    cap: Option<usize>,
    unit_reduction: bool,
    out: Option<&Path>,
    format: Format,
) -> CliResult<()> {
    let opts = SearchOptions {
        region3: parse_region(region3, 3)?,
        region21: parse_region(region21, 21)?,
        min_norm,
        cap,
        unit_reduction,
    };
    let outcome = qr::search_params(&opts, |c3, c21| {
        let lat = construction::build_variant(construction::O40_R, c3, c21)?;
        Ok(enumeration::min_norm(&lat)? >= min_norm.unwrap_or(0))
    })?;
    let text = match format {
        Format::Json => json_text(&json!({
            "schema_version": verify::SCHEMA_VERSION,
            "counts": serde_json::to_value(&outcome.counts).map_err(|e| Failure::Internal(e.to_string()))?,
            "candidates": serde_json::to_value(&outcome.candidates).map_err(|e| Failure::Internal(e.to_string()))?,
        })),
        Format::Csv => {
            let mut s = String::from("params3,params21,min_ok\n");
            for c in &outcome.candidates {
                let _ = writeln!(
                    s,
                    "{},{},{}",
                    c.code3.params.map(|x| x.to_string()).join(" "),
                    c.code21.params.map(|x| x.to_string()).join(" "),
                    c.min_ok.map_or("unchecked".to_string(), |b| b.to_string())
                );
            }
            s
        }
        Format::Text => {
            let k = &outcome.counts;
            let mut s = format!(
                "region={} mod7={} mod3={} glue={} min_checked={} accepted={}\n",
                k.region, k.mod7_survivors, k.mod3_survivors, k.glue_survivors, k.min_checked, k.accepted
            );
            for c in &outcome.candidates {
                let _ = writeln!(s, "{:?} {:?}", c.code3.params, c.code21.params);
            }
            s
        }
    };
    emit(out, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_parsing() {
        let r = parse_region("*, 1, 0|2, -1, 4, 5", 3).unwrap();
        assert_eq!(r[0], vec![0, 1, 2]);
        assert_eq!(r[2], vec![0, 2]);
        assert_eq!(r[3], vec![2]);
        assert_eq!(r[4], vec![1]);
        assert!(parse_region("1,2", 3).is_err());
    }

    #[test]
    fn block_structure_of_chain_gram() {
        assert_eq!(block_structure(&glue::target_gram()), "A1(2)+A1(2)+A19(2)+A19(2)");
    }

    #[test]
    fn error_classes() {
        assert_eq!(Failure::from(lat40::Error::Parse("x".into())).code(), 2);
        assert_eq!(Failure::from(lat40::Error::ConstructionMismatch).code(), 1);
        assert_eq!(Failure::from(lat40::Error::Singular).code(), 3);
    }
}

