use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

use polyscan::ff::BinaryExtField;
use polyscan::lfpe::{self, CensusCount, LfpeCaps, LfpeVerdict};
use polyscan::orbits::{count_groups, linear_classes, tame_closure_staged, ClosureParams};
use polyscan::report::{self, ClassTable, CountsRow, CountsTable, Format, LfpeTable, TableId};
use polyscan::scan::{self, maps_of, Predicate, RecordFile, ScanConfig, ScanOptions, Shape};
use polyscan::{format_map, parse_map, FieldCtx, Inversion, PolyMap};

use crate::{CapArgs, Classify, ClosureArgs, Command, Lfpe, MapArgs, Outcome, ReportArgs, ScanArgs, Verify};

/// Prints the resolved configuration up front and a hash of everything
/// read and written at the end.
struct Run {
    hasher: Sha256,
}

impl Run {
    fn start(config: &[(&str, String)]) -> Self {
        let mut line = String::from("config:");
        for (k, v) in config {
            let _ = write!(line, " {k}={v}");
        }
        println!("{line}");
        let mut hasher = Sha256::new();
        hasher.update(line.as_bytes());
        Self { hasher }
    }

    fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).with_context(|| format!("--in {}: cannot read", path.display()))?;
        self.hasher.update(&bytes);
        Ok(bytes)
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("--out {}: cannot create directory", path.display()))?;
        }
        fs::write(path, bytes).with_context(|| format!("--out {}: cannot write", path.display()))?;
        self.hasher.update(bytes);
        println!("wrote {}", path.display());
        Ok(())
    }

    fn say(&mut self, line: impl AsRef<str>) {
        let line = line.as_ref();
        println!("{line}");
        self.hasher.update(line.as_bytes());
        self.hasher.update(b"\n");
    }

    fn finish(self, outcome: Outcome) -> Result<Outcome> {
        println!("hash: {}", hex::encode(self.hasher.finalize()));
        Ok(outcome)
    }
}

pub fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Counts { q, n } => counts(q, n),
        Command::Scan(args) => scan_cmd(args),
        Command::Classify { what: Classify::LinearOrbits { input, out } } => classify(&input, out),
        Command::Closure(args) => closure(args),
        Command::Signature { input, rmax } => signature(&input, rmax),
        Command::Lfpe { what: Lfpe::Census { q, deg, out, count, caps } } => census(q, deg, out, count, &caps),
        Command::Lfpe { what: Lfpe::Analyze { map, caps } } => analyze(&map, &caps),
        Command::Invert(map) => invert(&map),
        Command::Verify { what: Verify::LemmaL1 { rmax } } => lemma_l1(rmax),
        Command::Report(args) => report_cmd(args),
    }
}

/// `F_q` for a prime power `q`.
fn field(q: u64) -> Result<Arc<FieldCtx>> {
    for p in [2u64, 3, 5, 7] {
        let (mut r, mut v) = (0, q);
        while v > 1 && v % p == 0 {
            v /= p;
            r += 1;
        }
        if v == 1 && r > 0 {
            return FieldCtx::new(p as u32, r).map_err(|e| anyhow!("--q {q}: {e}"));
        }
    }
    bail!("--q {q}: expected a power of 2, 3, 5 or 7")
}

/// `--out` if given, else `name` inside `$POLYSCAN_DATA` (or the current
/// directory).
fn out_path(out: Option<PathBuf>, name: &str) -> PathBuf {
    out.unwrap_or_else(|| {
        let dir = std::env::var_os("POLYSCAN_DATA").map(PathBuf::from).unwrap_or_default();
        dir.join(name)
    })
}

fn caps(c: &CapArgs) -> LfpeCaps {
    LfpeCaps { k_max: c.k_max, deg_cap: c.deg_cap }
}

fn parse(map: &MapArgs) -> Result<PolyMap> {
    let f = field(map.q)?;
    parse_map(&map.map, &f).map_err(|e| anyhow!("--map: {e}"))
}

fn read_records(run: &mut Run, path: &Path) -> Result<RecordFile> {
    let bytes = run.read(path)?;
    RecordFile::from_bytes(&bytes).map_err(|e| anyhow!("--in {}: {e}", path.display()))
}

fn counts(q: u64, n: u32) -> Result<Outcome> {
    field(q)?;
    if n == 0 {
        bail!("--n must be positive");
    }
    let mut run = Run::start(&[("command", "counts".into()), ("q", q.to_string()), ("n", n.to_string())]);
    let (linear, affine) = count_groups(q, n);
    run.say(format!("linear={linear} affine={affine}"));
    run.finish(Outcome::Ok)
}

fn scan_cmd(a: ScanArgs) -> Result<Outcome> {
    let f = field(a.q)?;
    let shape: Shape = a.shape.parse().map_err(|e| anyhow!("--shape: {e}"))?;
    let predicate: Predicate = a.predicate.parse().map_err(|e| anyhow!("--predicate: {e}"))?;
    if a.shards == 0 {
        bail!("--shards must be positive");
    }
    let out = out_path(a.out, &format!("{}-q{}-{}.pmrc", shape.name(), a.q, predicate.name()));
    let config = ScanConfig::new(shape, f.p(), f.r(), predicate).with_shards(a.shards).with_prune(!a.no_prune);
    let checkpoint = a.resume.clone().unwrap_or_else(|| {
        let mut s = out.clone().into_os_string();
        s.push(".ckpt");
        PathBuf::from(s)
    });
    let mut run = Run::start(&[
        ("command", "scan".into()),
        ("scan", config.describe()),
        ("config_hash", config.hash()),
        ("out", out.display().to_string()),
        ("checkpoint", checkpoint.display().to_string()),
        ("resume", a.resume.is_some().to_string()),
    ]);
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("--out {}: cannot create directory", out.display()))?;
    }
    let opts = ScanOptions { checkpoint: Some(checkpoint.clone()), resume: a.resume.is_some(), stop_after_chunks: None };
    let summary = scan::scan_to_file(&config, &out, &opts).map_err(|e| anyhow!("scan: {e}"))?;
    let bytes = fs::read(&out).with_context(|| format!("--out {}: cannot read back", out.display()))?;
    run.hasher.update(&bytes);
    let _ = fs::remove_file(&checkpoint);
    run.say(format!(
        "candidates={} records={} automorphisms={} complete={}",
        summary.candidates, summary.records, summary.automorphisms, summary.complete
    ));
    println!("wrote {}", out.display());
    run.finish(Outcome::Ok)
}

fn classify(input: &Path, out: Option<PathBuf>) -> Result<Outcome> {
    let out = out_path(out, "linear-orbits.csv");
    let mut run = Run::start(&[
        ("command", "classify linear-orbits".into()),
        ("in", input.display().to_string()),
        ("out", out.display().to_string()),
    ]);
    let file = read_records(&mut run, input)?;
    let (space, maps) = maps_of(&file).map_err(|e| anyhow!("--in: {e}"))?;
    let classes = linear_classes(&maps);
    let table = ClassTable::from_linear_classes(space.field(), &classes, &file.records);
    run.say(format!("classes={} sizes={:?}", table.rows.len(), table.sizes()));
    run.write(&out, table.to_csv().as_bytes())?;
    run.finish(Outcome::Ok)
}

fn read_seeds(run: &mut Run, path: &Path, field: &Arc<FieldCtx>) -> Result<Vec<PolyMap>> {
    let text = String::from_utf8(run.read(path)?).with_context(|| format!("--seeds {}: not UTF-8", path.display()))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| parse_map(l, field).map_err(|e| anyhow!("--seeds: `{l}`: {e}")))
        .collect()
}

fn closure(a: ClosureArgs) -> Result<Outcome> {
    let out = out_path(a.out, "closure.csv");
    let mut run = Run::start(&[
        ("command", "closure".into()),
        ("in", a.input.display().to_string()),
        ("seeds", a.seeds.as_ref().map(|s| s.display().to_string()).unwrap_or_default()),
        ("dmax", a.dmax.to_string()),
        ("budget", a.budget.to_string()),
        ("depth", a.depth.to_string()),
        ("out", out.display().to_string()),
    ]);
    let file = read_records(&mut run, &a.input)?;
    let (space, targets) = maps_of(&file).map_err(|e| anyhow!("--in: {e}"))?;
    let seeds = match &a.seeds {
        Some(p) => read_seeds(&mut run, p, space.field())?,
        None => Vec::new(),
    };
    let deg = targets.iter().map(PolyMap::degree).max().unwrap_or(1);
    let top = seeds.iter().map(PolyMap::degree).fold(deg, u32::max);
    if a.dmax < top {
        bail!("--dmax {} is below the map degree {top}", a.dmax);
    }
    let rmax = a.rmax.unwrap_or_else(|| scan::signature_depth(space.field(), 3));
    // Connect everything reachable at the maps' own degree first, then let
    // the seeds reach further.
    let mut stages = vec![ClosureParams {
        gen_degree: deg,
        d_max: deg,
        target_depth: 100,
        seed_depth: 100,
        budget: a.budget,
        sig_rmax: rmax,
        probes: 1,
    }];
    if a.dmax > deg {
        stages.push(ClosureParams {
            gen_degree: a.gen.unwrap_or(deg.max(a.dmax / 2)),
            d_max: a.dmax,
            target_depth: a.depth,
            seed_depth: a.depth,
            budget: a.budget,
            sig_rmax: rmax,
            probes: 1,
        });
    }
    let part = tame_closure_staged(&seeds, &targets, &stages).map_err(|e| anyhow!("closure: {e}"))?;
    let table = ClassTable::from_partition(space.field(), &part);
    run.say(format!("classes={} sizes={:?} states={} complete={}", table.rows.len(), table.sizes(), part.states, part.complete));
    for (i, s) in part.seed_class.iter().enumerate() {
        match s {
            Some(c) => run.say(format!("seed {} joins class of size {}", format_map(&seeds[i]), part.classes[*c].size())),
            None => run.say(format!("seed {} joins no class", format_map(&seeds[i]))),
        }
    }
    run.write(&out, table.to_csv().as_bytes())?;
    run.finish(Outcome::Ok)
}

fn signature(input: &Path, rmax: u32) -> Result<Outcome> {
    let mut run = Run::start(&[
        ("command", "signature".into()),
        ("in", input.display().to_string()),
        ("rmax", rmax.to_string()),
    ]);
    let file = read_records(&mut run, input)?;
    let (space, maps) = maps_of(&file).map_err(|e| anyhow!("--in: {e}"))?;
    let f = space.field();
    let mut hist = std::collections::BTreeMap::new();
    for (m, rec) in maps.iter().zip(&file.records) {
        let sig = if rec.is_automorphism() {
            (1u32 << rmax) - 1
        } else {
            m.extension_signature(rmax).map_err(|e| anyhow!("--rmax {rmax}: {e}"))?
        };
        *hist.entry(std::cmp::Reverse(sig)).or_insert(0u64) += 1;
    }
    for (std::cmp::Reverse(sig), count) in hist {
        let fields: Vec<String> = (1..=rmax)
            .filter(|r| sig >> (r - 1) & 1 == 1)
            .map(|r| format!("F_{}", (f.q() as u64).pow(r)))
            .collect();
        run.say(format!("{count} bijective over {{{}}}", fields.join(",")));
    }
    run.finish(Outcome::Ok)
}

fn census(q: u64, deg: u32, out: Option<PathBuf>, count: Option<String>, c: &CapArgs) -> Result<Outcome> {
    let f = field(q)?;
    let count = match count {
        Some(s) => s.parse().map_err(|e| anyhow!("--count: {e}"))?,
        None => CensusCount::published(q),
    };
    let out = out_path(out, &format!("lfpe-q{q}-deg{deg}.csv"));
    let mut run = Run::start(&[
        ("command", "lfpe census".into()),
        ("q", q.to_string()),
        ("deg", deg.to_string()),
        ("count", count.name().into()),
        ("k_max", c.k_max.to_string()),
        ("deg_cap", c.deg_cap.to_string()),
        ("out", out.display().to_string()),
    ]);
    let census = lfpe::lfpe_census(&f, deg, &caps(c), count).map_err(|e| anyhow!("census: {e}"))?;
    run.say(format!(
        "representatives={} automorphisms={} candidates={} locally_finite_pairs={} undecided={}",
        census.representatives,
        census.automorphisms,
        census.candidates(),
        census.locally_finite,
        census.undecided
    ));
    if let Some(c) = census.conjugacy_classes {
        run.say(format!("conjugacy_classes={c}"));
    }
    run.say(format!(
        "total={} min_polys={} max_degree={}",
        census.total(),
        census.rows.len(),
        census.max_min_poly_degree()
    ));
    run.write(&out, LfpeTable::from_census(&census).to_csv().as_bytes())?;
    run.finish(Outcome::Ok)
}

fn analyze(m: &MapArgs, c: &CapArgs) -> Result<Outcome> {
    let map = parse(m)?;
    let mut run = Run::start(&[
        ("command", "lfpe analyze".into()),
        ("map", format_map(&map)),
        ("q", m.q.to_string()),
        ("k_max", c.k_max.to_string()),
        ("deg_cap", c.deg_cap.to_string()),
    ]);
    let verdict = lfpe::is_locally_finite(&map, &caps(c)).map_err(|e| anyhow!("analyze: {e}"))?;
    let outcome = match verdict {
        LfpeVerdict::LocallyFinite { order, min_poly } => {
            run.say(format!("order={order}"));
            run.say(format!("min_poly={} ({})", min_poly.to_text("T"), report::operator_poly(&min_poly)));
            Outcome::Ok
        }
        LfpeVerdict::NotLocallyFinite => {
            run.say("not a locally finite automorphism");
            Outcome::Failed
        }
        LfpeVerdict::Undecided(hit) => {
            run.say(format!("undecided: {hit}"));
            Outcome::Failed
        }
    };
    run.finish(outcome)
}

fn invert(m: &MapArgs) -> Result<Outcome> {
    let map = parse(m)?;
    let mut run = Run::start(&[("command", "invert".into()), ("map", format_map(&map)), ("q", m.q.to_string())]);
    let dec = map.affine_decompose().map_err(|e| anyhow!("--map: {e}"))?;
    let inverse = match dec.fprime.formal_inverse().map_err(|e| anyhow!("invert: {e}"))? {
        Inversion::NotInvertible => None,
        Inversion::Inverse(g) => {
            let alpha_inv = dec.alpha.affine_inverse().map_err(|e| anyhow!("invert: {e}"))?;
            let cap = map.ring().cap();
            Some(g.compose(&alpha_inv, cap).map_err(|e| anyhow!("invert: {e}"))?)
        }
    };
    let outcome = match inverse {
        Some(g) => {
            let cap = map.ring().cap();
            let both = map.compose(&g, cap).is_ok_and(|h| h.is_identity()) && g.compose(&map, cap).is_ok_and(|h| h.is_identity());
            if !both {
                bail!("inverse candidate failed the composition check");
            }
            run.say(format!("inverse={}", format_map(&g)));
            run.say(format!("degree={}", g.degree()));
            Outcome::Ok
        }
        None => {
            run.say("no polynomial inverse");
            Outcome::Failed
        }
    };
    run.finish(outcome)
}

fn lemma_l1(rmax: u32) -> Result<Outcome> {
    if rmax == 0 || rmax > BinaryExtField::MAX_DEGREE {
        bail!("--rmax must lie in 1..={}", BinaryExtField::MAX_DEGREE);
    }
    let mut run = Run::start(&[("command", "verify lemma-l1".into()), ("rmax", rmax.to_string())]);
    let polys: [(&str, &[u32], u32); 3] =
        [("x^4+x^2+x", &[4, 2, 1], 3), ("x^8+x^4+x", &[8, 4, 1], 7), ("x^8+x^2+x", &[8, 2, 1], 7)];
    let mut ok = true;
    for r in 1..=rmax {
        let f = BinaryExtField::new(r).map_err(|e| anyhow!("--rmax: {e}"))?;
        let mut line = format!("r={r:<2}");
        for (name, exps, d) in polys {
            let got = f.is_permutation(exps);
            let want = r % d != 0;
            ok &= got == want;
            let _ = write!(line, " {name}:{}", if got { "bijective" } else { "not-bijective" });
            if got != want {
                line.push_str("(MISMATCH)");
            }
        }
        run.say(line);
    }
    run.say(if ok { "lemma holds for all r checked" } else { "lemma FAILS" });
    run.finish(if ok { Outcome::Ok } else { Outcome::Failed })
}

fn report_cmd(a: ReportArgs) -> Result<Outcome> {
    let table: TableId = a.table.parse().map_err(|e| anyhow!("--table: {e}"))?;
    let format: Format = a.format.parse().map_err(|e| anyhow!("--format: {e}"))?;
    let mut run = Run::start(&[
        ("command", "report".into()),
        ("table", table.name().into()),
        ("format", a.format.clone()),
        ("in", a.input.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(",")),
    ]);
    let single = |run: &mut Run| -> Result<String> {
        let [path] = a.input.as_slice() else {
            bail!("--in: table {} takes exactly one file", table.name());
        };
        String::from_utf8(run.read(path)?).with_context(|| format!("--in {}: not UTF-8", path.display()))
    };
    let text = match table {
        TableId::T1Classes | TableId::F2Deg3Classes => {
            let t = ClassTable::from_csv(&single(&mut run)?, 2, 1).map_err(|e| anyhow!("--in: {e}"))?;
            t.render(format)
        }
        TableId::F2Lfpe | TableId::F3Lfpe => {
            let t = LfpeTable::from_csv(&single(&mut run)?).map_err(|e| anyhow!("--in: {e}"))?;
            t.render(format)
        }
        TableId::Counts => {
            let mut autos = std::collections::BTreeMap::new();
            for path in &a.input {
                let file = read_records(&mut run, path)?;
                let h = file.header;
                if h.shape != Shape::IdentityAffineDeg2 {
                    bail!("--in {}: counts need identity-affine scans, found {}", path.display(), h.shape);
                }
                let q = (h.p as u64).pow(h.r as u32);
                autos.insert(q, report::automorphism_count(&file.records));
            }
            let rows = [2u64, 3, 4, 5].into_iter().map(|q| CountsRow::new(q, 3, autos.get(&q).copied())).collect();
            CountsTable { rows }.render(format)
        }
    };
    match a.out {
        Some(out) => run.write(&out, text.as_bytes())?,
        None => {
            print!("{text}");
            run.hasher.update(text.as_bytes());
        }
    }
    run.finish(Outcome::Ok)
}
