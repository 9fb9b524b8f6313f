//! End-to-end driver: route primes, run the trees, write records.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use rug::Integer;

use crate::curve::{parse_curve_str, Curve};
use crate::error::{Error, Result};
use crate::frobenius::{assemble_frobenius, compute_u_table, FrobContext};
use crate::oracle::{fallback_lpoly, DEFAULT_BUDGET_BITS};
use crate::rtree::sieve_primes;
use crate::zeta::{charpoly_mod, lift_weil_lpoly, LPolyRecord, Status};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveSource {
    Coeffs(String),
    File(PathBuf),
}

impl CurveSource {
    pub fn load(&self) -> Result<Curve> {
        match self {
            CurveSource::Coeffs(s) => parse_curve_str(s),
            CurveSource::File(path) => parse_curve_str(&fs::read_to_string(path)?),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub source: CurveSource,
    /// Records are produced for odd primes below this bound.
    pub limit: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: usize,
    /// Cross-check records with p <= verify_limit by brute force; 0 = off.
    pub verify_limit: u64,
    pub budget_bits: u32,
}

impl RunConfig {
    pub fn new(source: CurveSource, limit: u64) -> Self {
        RunConfig { source, limit, out: None, format: Format::Csv, threads: 1, verify_limit: 0, budget_bits: DEFAULT_BUDGET_BITS }
    }

    fn validate(&self) -> Result<()> {
        if self.limit < 3 {
            return Err(Error::Parse(format!("limit must be at least 3, got {}", self.limit)));
        }
        if self.threads == 0 {
            return Err(Error::Parse("threads must be at least 1".into()));
        }
        Ok(())
    }
}

/// Counters gathered from the main path.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub computed: usize,
    pub fallback: usize,
    pub bad: usize,
    pub u_entries: usize,
    /// U-values whose denominator product was divisible by p.
    pub positive_valuation: usize,
    pub max_valuation: u32,
    /// Largest e - rho seen (never positive on success).
    pub max_excess: i64,
}

/// Records for every odd prime below the limit, ascending.
pub fn run_pipeline(cfg: &RunConfig) -> Result<(Vec<LPolyRecord>, RunStats)> {
    cfg.validate()?;
    let curve = cfg.source.load()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build().map_err(|e| Error::Parse(format!("thread pool: {e}")))?;
    pool.install(|| run_on_curve(&curve, cfg))
}

/// Like [`run_pipeline`] for an already parsed curve, on the current pool.
pub fn run_on_curve(curve: &Curve, cfg: &RunConfig) -> Result<(Vec<LPolyRecord>, RunStats)> {
    cfg.validate()?;
    let ctx = FrobContext::new(curve)?;
    let primes: Vec<u64> = sieve_primes(cfg.limit).into_iter().filter(|&p| p > 2).collect();
    let main: Vec<u64> = primes.iter().copied().filter(|&p| ctx.in_main_range(p)).collect();
    let mut stats = RunStats::default();

    let table = compute_u_table(&ctx, &main, cfg.limit).map_err(|e| at_stage(e, "remainder tree"))?;
    stats.u_entries = table.len();
    for u in table.values() {
        stats.max_valuation = stats.max_valuation.max(u.e);
        stats.positive_valuation += usize::from(u.e > 0);
        stats.max_excess = stats.max_excess.max(u.e as i64 - u.rho as i64);
    }
    if table.is_empty() {
        stats.max_excess = 0;
    }

    let records = primes
        .par_iter()
        .map(|&p| {
            if !curve.is_good_prime(p) {
                return Ok(LPolyRecord::bad(p));
            }
            if ctx.in_main_range(p) {
                let f = assemble_frobenius(&ctx, p, &table).map_err(|e| e.at(p, "assembly"))?;
                let e = charpoly_mod(&f.matrix, p).map_err(|e| e.at(p, "charpoly"))?;
                let rec = lift_weil_lpoly(&e, p, ctx.genus(), ctx.mu).map_err(|e| e.at(p, "lift"))?;
                rec.check().map_err(|e| e.at(p, "lift"))?;
                Ok(rec)
            } else {
                fallback_lpoly(curve, p, cfg.budget_bits).map_err(|e| e.at(p, "fallback"))
            }
        })
        .collect::<Result<Vec<_>>>()?;

    for r in &records {
        match r.status {
            Status::Computed => stats.computed += 1,
            Status::Fallback => stats.fallback += 1,
            Status::Bad => stats.bad += 1,
        }
    }

    if cfg.verify_limit > 0 {
        records.par_iter().filter(|r| r.status != Status::Bad && r.p <= cfg.verify_limit).try_for_each(|r| {
            let expected = fallback_lpoly(curve, r.p, cfg.budget_bits).map_err(|e| e.at(r.p, "verify"))?;
            if expected.a != r.a {
                return Err(Error::VerificationMismatch { p: r.p, computed: r.describe(), expected: expected.describe() });
            }
            Ok(())
        })?;
    }
    Ok((records, stats))
}

fn at_stage(e: Error, stage: &'static str) -> Error {
    let p = match &e {
        Error::ValuationOverflow { p, .. } | Error::PrecisionLoss { p, .. } | Error::MissingEntry { p, .. } => *p,
        _ => return e,
    };
    e.at(p, stage)
}

fn a_value(a: &Integer) -> Result<i64> {
    a.to_i64().ok_or_else(|| Error::Parse(format!("coefficient {a} does not fit in 64 bits")))
}

/// Write records in the chosen format; `genus` fixes the column count.
pub fn write_records(out: &mut dyn Write, records: &[LPolyRecord], genus: usize, format: Format) -> Result<()> {
    let width = 2 * genus + 1;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let mut header = vec!["p".to_string(), "status".to_string()];
            header.extend((0..width).map(|i| format!("a_{i}")));
            w.write_record(&header).map_err(csv_error)?;
            for r in records {
                let mut row = vec![r.p.to_string(), r.status.to_string()];
                if r.a.is_empty() {
                    row.extend(std::iter::repeat_n(String::new(), width));
                } else {
                    row.extend(r.a.iter().map(Integer::to_string));
                }
                w.write_record(&row).map_err(csv_error)?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            for r in records {
                let mut obj = serde_json::Map::new();
                obj.insert("p".into(), r.p.into());
                obj.insert("status".into(), r.status.as_str().into());
                for i in 0..width {
                    let v = match r.a.get(i) {
                        Some(a) => serde_json::Value::from(a_value(a)?),
                        None => serde_json::Value::Null,
                    };
                    obj.insert(format!("a_{i}"), v);
                }
                writeln!(out, "{}", serde_json::Value::Object(obj))?;
            }
        }
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Parse(format!("csv: {other:?}")),
    }
}

/// Compute zeta functions of y^2 = Q(x) at every odd prime below a bound.
#[derive(Debug, Parser)]
#[command(name = "hyperzeta", version)]
pub struct Args {
    /// Coefficients c0,c1,...,c_{2g+1} of Q, ascending; the last must be 1.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "curve_file", required_unless_present = "curve_file")]
    pub coeffs: Option<String>,
    /// File holding the coefficient list.
    #[arg(long)]
    pub curve_file: Option<PathBuf>,
    /// Emit records for odd primes p < LIMIT.
    #[arg(long)]
    pub limit: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Check every record with p <= LIMIT against brute-force counts.
    #[arg(long, value_name = "LIMIT", default_value_t = 0)]
    pub verify: u64,
    /// Refuse brute-force counts over fields larger than 2^BITS.
    #[arg(long, value_name = "BITS", default_value_t = DEFAULT_BUDGET_BITS)]
    pub budget: u32,
}

impl Args {
    pub fn to_config(&self) -> RunConfig {
        let source = match (&self.coeffs, &self.curve_file) {
            (Some(c), _) => CurveSource::Coeffs(c.clone()),
            (None, Some(f)) => CurveSource::File(f.clone()),
            (None, None) => unreachable!("clap enforces a curve source"),
        };
        RunConfig {
            source,
            limit: self.limit,
            out: self.out.clone(),
            format: self.format,
            threads: self.threads,
            verify_limit: self.verify,
            budget_bits: self.budget,
        }
    }
}

/// Run with parsed arguments and return the process exit code.
pub fn run(args: &Args) -> i32 {
    match run_and_write(&args.to_config()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hyperzeta: {e}");
            e.exit_code()
        }
    }
}

fn run_and_write(cfg: &RunConfig) -> Result<()> {
    let (records, _) = run_pipeline(cfg)?;
    let genus = cfg.source.load()?.genus();
    match &cfg.out {
        Some(path) => {
            let mut f = io::BufWriter::new(fs::File::create(path)?);
            write_records(&mut f, &records, genus, cfg.format)?;
            f.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_records(&mut lock, &records, genus, cfg.format)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(s: &str, limit: u64) -> RunConfig {
        RunConfig::new(CurveSource::Coeffs(s.into()), limit)
    }

    fn a(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&c| Integer::from(c)).collect()
    }

    #[test]
    fn tiny_run_is_all_fallback() {
        let (recs, stats) = run_pipeline(&coeffs("1,1,0,1", 10)).unwrap();
        let ps: Vec<u64> = recs.iter().map(|r| r.p).collect();
        assert_eq!(ps, vec![3, 5, 7]);
        assert!(recs.iter().all(|r| r.status == Status::Fallback));
        assert_eq!(recs[2].a, a(&[1, -3, 7]));
        assert_eq!(recs[1].a, a(&[1, 3, 5]));
        assert_eq!(stats.u_entries, 0);
    }

    #[test]
    fn main_path_kicks_in_above_cutoff() {
        let mut cfg = coeffs("1,1,0,1", 50);
        cfg.verify_limit = 50;
        let (recs, stats) = run_pipeline(&cfg).unwrap();
        let status = |p| recs.iter().find(|r| r.p == p).unwrap().status;
        assert_eq!(status(31), Status::Bad);
        for p in [37, 41, 43, 47] {
            assert_eq!(status(p), Status::Computed);
        }
        assert_eq!(recs.iter().find(|r| r.p == 37).unwrap().a, a(&[1, 10, 37]));
        assert_eq!(stats.u_entries, 4 * 15);
        assert!(stats.max_excess <= 0);
    }

    #[test]
    fn zero_constant_term() {
        let (recs, _) = run_pipeline(&coeffs("0,-1,0,1", 20)).unwrap();
        assert_eq!(recs.len(), 7);
        assert!(recs.iter().all(|r| r.status == Status::Fallback));
    }

    #[test]
    fn bad_input() {
        let err = run_pipeline(&coeffs("1,1,0,0,1", 20)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = run_pipeline(&coeffs("1,1,0,1", 2)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn output_formats() {
        let recs = vec![LPolyRecord { p: 3, status: Status::Fallback, a: a(&[1, -1, 3]) }, LPolyRecord::bad(31)];
        let mut csv = Vec::new();
        write_records(&mut csv, &recs, 1, Format::Csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "p,status,a_0,a_1,a_2\n3,fallback,1,-1,3\n31,bad,,,\n");
        let mut jsonl = Vec::new();
        write_records(&mut jsonl, &recs, 1, Format::Jsonl).unwrap();
        let text = String::from_utf8(jsonl).unwrap();
        let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines[0]["a_1"], -1);
        assert_eq!(lines[0]["status"], "fallback");
        assert!(lines[1]["a_0"].is_null());
    }

    #[test]
    fn args_parse() {
        let args = Args::try_parse_from(["hyperzeta", "--coeffs", "1,1,0,1", "--limit", "100", "--format", "jsonl"]).unwrap();
        let cfg = args.to_config();
        assert_eq!(cfg.format, Format::Jsonl);
        assert_eq!((cfg.limit, cfg.threads, cfg.budget_bits), (100, 1, 25));
        let neg = Args::try_parse_from(["hyperzeta", "--coeffs", "-1,0,0,1", "--limit", "10"]).unwrap();
        assert_eq!(neg.coeffs.as_deref(), Some("-1,0,0,1"));
        assert!(Args::try_parse_from(["hyperzeta", "--limit", "10"]).is_err());
    }
}
